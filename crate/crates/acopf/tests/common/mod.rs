#![allow(dead_code)]

use std::path::PathBuf;

use acopf::{build_admittance, load_case, parse_matpower, NetworkModel};

pub const CASES: [&str; 6] = ["case9", "case14", "case30", "case39", "case118", "case1354pegase"];

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(format!("{name}.m"))
}

pub fn load(name: &str) -> NetworkModel {
    load_case(&data_path(name)).unwrap()
}

pub fn case_text(name: &str) -> String {
    std::fs::read_to_string(data_path(name)).unwrap()
}

/// Three buses in a line, one generator at the head, loads downstream.
pub const RADIAL3: &str = "function mpc = radial3
mpc.version = '2';
mpc.baseMVA = 100;
mpc.bus = [
	1	3	0	0	0	0	1	1	0	135	1	1.1	0.9;
	2	1	40	10	0	0	1	1	0	135	1	1.1	0.9;
	3	1	30	8	0	0	1	1	0	135	1	1.1	0.9;
];
mpc.gen = [
	1	0	0	200	-200	1	100	1	300	0	0	0	0	0	0	0	0	0	0	0	0;
];
mpc.branch = [
	1	2	0.01	0.05	0.02	0	0	0	0	0	1	-360	360;
	2	3	0.02	0.08	0.01	0	0	0	0	0	1	-360	360;
];
mpc.gencost = [
	2	0	0	3	0.02	20	0;
];
";

pub fn radial3() -> NetworkModel {
    build_admittance(parse_matpower(RADIAL3).unwrap()).unwrap()
}
