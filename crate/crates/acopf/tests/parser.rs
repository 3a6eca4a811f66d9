mod common;

use acopf::{parse_matpower, write_matpower, BusType, OpfError};
use common::*;
use proptest::prelude::*;

fn parse_err(src: &str) -> (usize, String) {
    match parse_matpower(src) {
        Err(OpfError::Parse { line, message }) => (line, message),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn case9_counts() {
    let m = parse_matpower(&case_text("case9")).unwrap();
    assert_eq!((m.buses.len(), m.gens.len(), m.branches.len()), (9, 3, 9));
    assert_eq!(m.base_mva, 100.0);
    assert_eq!(m.name, "case9");
    assert_eq!(m.buses[0].kind, BusType::Ref);
}

#[test]
fn per_unit_and_radians() {
    let m = parse_matpower(&case_text("case9")).unwrap();
    // Bus 5: Pd 90 MW, Qd 30 MVAr.
    assert_eq!(m.buses[4].pd, 0.9);
    assert_eq!(m.buses[4].qd, 0.3);
    assert_eq!(m.gens[0].pmax, 2.5);
    assert_eq!(m.branches[2].rate_a, 1.5);
    assert_eq!(m.branches[0].angmax, 360f64.to_radians());
    // Costs keep the file's units.
    assert_eq!((m.gens[0].cost.c2, m.gens[0].cost.c1, m.gens[0].cost.c0), (0.11, 5.0, 150.0));
}

#[test]
fn every_bundled_case_parses() {
    for name in CASES {
        let m = load(name);
        assert!(!m.buses.is_empty() && !m.gens.is_empty() && !m.branches.is_empty(), "{name}");
        m.validate().unwrap();
    }
}

#[test]
fn empty_source_has_no_bus() {
    let (_, msg) = parse_err("");
    assert_eq!(msg, "no mpc.bus");
}

#[test]
fn out_of_service_branch_is_dropped() {
    let text = RADIAL3.replace("0.02	0.08	0.01	0	0	0	0	0	1", "0.02	0.08	0.01	0	0	0	0	0	0");
    let m = parse_matpower(&text).unwrap();
    assert_eq!(m.branches.len(), 1);
}

#[test]
fn out_of_service_generator_drops_its_cost_row() {
    let text = RADIAL3
        .replace(
            "	1	0	0	200	-200	1	100	1	300	0	0	0	0	0	0	0	0	0	0	0	0;\n",
            "	1	0	0	200	-200	1	100	1	300	0	0	0	0	0	0	0	0	0	0	0	0;\n	2	0	0	10	-10	1	100	0	50	0	0	0	0	0	0	0	0	0	0	0	0;\n",
        )
        .replace("	2	0	0	3	0.02	20	0;\n", "	2	0	0	3	0.02	20	0;\n	2	0	0	3	9	9	9;\n");
    let m = parse_matpower(&text).unwrap();
    assert_eq!(m.gens.len(), 1);
    assert_eq!(m.gens[0].cost.c1, 20.0);
}

#[test]
fn isolated_bus_and_its_branches_are_dropped() {
    let text = RADIAL3.replace("	3	1	30	8", "	3	4	30	8");
    let m = parse_matpower(&text).unwrap();
    assert_eq!((m.buses.len(), m.branches.len()), (2, 1));
}

#[test]
fn piecewise_linear_cost_is_rejected_with_line() {
    let text = RADIAL3.replace("	2	0	0	3	0.02	20	0;", "	1	0	0	2	0	0	100	2000;");
    let (line, msg) = parse_err(&text);
    assert_eq!(line, 17);
    assert!(msg.contains("piecewise-linear"), "{msg}");
}

#[test]
fn cubic_cost_is_rejected() {
    let text = RADIAL3.replace("	2	0	0	3	0.02	20	0;", "	2	0	0	4	1	0.02	20	0;");
    let (_, msg) = parse_err(&text);
    assert!(msg.contains("at most 3"), "{msg}");
}

#[test]
fn ragged_row_is_rejected_with_line() {
    let text = RADIAL3.replace("	2	1	40	10	0	0	1	1	0	135	1	1.1	0.9;", "	2	1	40	10	0	0	1	1	0	135	1	1.1;");
    let (line, msg) = parse_err(&text);
    assert_eq!(line, 6);
    assert!(msg.contains("ragged"), "{msg}");
}

#[test]
fn missing_matrix_is_rejected() {
    let start = RADIAL3.find("mpc.gencost").unwrap();
    let (_, msg) = parse_err(&RADIAL3[..start]);
    assert_eq!(msg, "no mpc.gencost");
}

#[test]
fn unsupported_field_is_rejected_with_line() {
    let text = format!("{RADIAL3}mpc.dcline = [\n	1	2	1	0	0	0	0	1	1	0	100	-100	100	-100	100	0	0;\n];\n");
    let (line, msg) = parse_err(&text);
    assert_eq!(line, 19);
    assert!(msg.contains("mpc.dcline"), "{msg}");
}

#[test]
fn other_versions_are_rejected() {
    let (line, msg) = parse_err(&RADIAL3.replace("'2'", "'1'"));
    assert_eq!(line, 2);
    assert!(msg.contains("version"), "{msg}");
}

#[test]
fn bad_number_is_rejected_with_line() {
    let (line, msg) = parse_err(&RADIAL3.replace("0.01	0.05", "0.01	x5"));
    assert_eq!(line, 13);
    assert!(msg.contains("x5"), "{msg}");
}

#[test]
fn generator_at_unknown_bus_is_rejected() {
    let (line, _) = parse_err(&RADIAL3.replace("	1	0	0	200", "	7	0	0	200"));
    assert_eq!(line, 10);
}

#[test]
fn cell_arrays_and_comments_are_skipped() {
    let text = format!("{RADIAL3}mpc.bus_name = {{\n\t'A';\n\t'B';\n\t'C';\n}};\n% mpc.dcline = [];\n");
    assert_eq!(parse_matpower(&text).unwrap(), parse_matpower(RADIAL3).unwrap());
}

#[test]
fn bundled_cases_round_trip_exactly() {
    for name in CASES {
        let m = acopf::parse_matpower(&case_text(name)).unwrap();
        let again = parse_matpower(&write_matpower(&m)).unwrap();
        assert_eq!(again, m, "{name}");
    }
}

/// Case text with the given file-unit values substituted in.
fn radial3_with(loads: &[f64], angles: &[f64], rates: &[f64], base: f64) -> String {
    let (mut bus, mut br) = (0, 0);
    let mut out = String::new();
    for line in RADIAL3.lines() {
        let mut cols: Vec<String> = line.split('\t').map(str::to_string).collect();
        if cols.len() == 14 && line.contains("-360") {
            cols[6] = rates[br].to_string();
            cols[10] = (rates[br] / 70.0).to_string();
            br += 1;
        } else if cols.len() == 14 {
            cols[3] = loads[2 * bus].to_string();
            cols[4] = loads[2 * bus + 1].to_string();
            cols[9] = angles[bus].to_string();
            bus += 1;
        }
        out.push_str(&cols.join("\t").replace("mpc.baseMVA = 100", &format!("mpc.baseMVA = {base}")));
        out.push('\n');
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn parsed_models_round_trip(
        loads in prop::collection::vec(-300.0f64..300.0, 6),
        angles in prop::collection::vec(-80.0f64..80.0, 3),
        rates in prop::collection::vec(0.0f64..700.0, 2),
        base in 1.0f64..1000.0,
    ) {
        let m = parse_matpower(&radial3_with(&loads, &angles, &rates, base)).unwrap();
        prop_assert_eq!(m.base_mva, base);
        let again = parse_matpower(&write_matpower(&m)).unwrap();
        prop_assert_eq!(again, m);
    }
}
