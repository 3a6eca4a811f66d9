//! MATPOWER case files (format version 2).
//!
//! Values are converted on read: powers and line ratings to per unit on
//! `baseMVA`, angles to radians. Cost coefficients stay in the file's units
//! ($/h per MW^k). Out-of-service generators and branches and isolated
//! (type 4) buses are dropped.

use std::collections::HashMap;
use std::fmt::Write;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::admittance::Admittance;
use crate::error::OpfError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BusType {
    Pq,
    Pv,
    Ref,
}

impl BusType {
    fn code(self) -> u8 {
        match self {
            BusType::Pq => 1,
            BusType::Pv => 2,
            BusType::Ref => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: usize,
    pub kind: BusType,
    pub pd: f64,
    pub qd: f64,
    pub gs: f64,
    pub bs: f64,
    pub area: f64,
    pub vm: f64,
    pub va: f64,
    pub base_kv: f64,
    pub zone: f64,
    pub vmax: f64,
    pub vmin: f64,
}

/// Polynomial cost `c2·P² + c1·P + c0` with `P` in MW.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cost {
    pub startup: f64,
    pub shutdown: f64,
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gen {
    pub bus: usize,
    pub pg: f64,
    pub qg: f64,
    pub qmax: f64,
    pub qmin: f64,
    pub vg: f64,
    pub mbase: f64,
    pub pmax: f64,
    pub pmin: f64,
    pub cost: Cost,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub from: usize,
    pub to: usize,
    pub r: f64,
    pub x: f64,
    pub b: f64,
    /// Long-term rating; 0 means unlimited.
    pub rate_a: f64,
    pub rate_b: f64,
    pub rate_c: f64,
    /// Off-nominal tap ratio; 0 means a line (ratio 1).
    pub ratio: f64,
    pub shift: f64,
    pub angmin: f64,
    pub angmax: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkModel {
    pub name: String,
    pub base_mva: f64,
    pub buses: Vec<Bus>,
    pub gens: Vec<Gen>,
    pub branches: Vec<Branch>,
    /// Filled by [`crate::build_admittance`].
    #[serde(skip)]
    pub admittance: Option<Admittance>,
}

impl NetworkModel {
    /// Position of each bus id in `buses`.
    pub fn bus_index(&self) -> HashMap<usize, usize> {
        self.buses.iter().enumerate().map(|(k, b)| (b.id, k)).collect()
    }

    /// Index of the reference bus (the first type-3 bus, else bus 0).
    pub fn reference_bus(&self) -> usize {
        self.buses.iter().position(|b| b.kind == BusType::Ref).unwrap_or(0)
    }

    pub fn validate(&self) -> Result<(), OpfError> {
        if !(self.base_mva > 0.0) {
            return Err(OpfError::Model("baseMVA must be positive".into()));
        }
        let idx = self.bus_index();
        if idx.len() != self.buses.len() {
            return Err(OpfError::Model("duplicate bus id".into()));
        }
        for b in &self.buses {
            if !(b.vmin <= b.vmax) || !(b.vmax > 0.0) {
                return Err(OpfError::Model(format!("bus {}: Vmin {} > Vmax {}", b.id, b.vmin, b.vmax)));
            }
        }
        for g in &self.gens {
            if !idx.contains_key(&g.bus) {
                return Err(OpfError::Model(format!("generator at unknown bus {}", g.bus)));
            }
            if !(g.pmin <= g.pmax) || !(g.qmin <= g.qmax) {
                return Err(OpfError::Model(format!("generator at bus {}: empty P or Q range", g.bus)));
            }
            if g.cost.c2 < 0.0 {
                return Err(OpfError::Model(format!("generator at bus {}: negative quadratic cost", g.bus)));
            }
        }
        for br in &self.branches {
            if !idx.contains_key(&br.from) || !idx.contains_key(&br.to) {
                return Err(OpfError::Model(format!("branch {}-{} references an unknown bus", br.from, br.to)));
            }
            if br.from == br.to {
                return Err(OpfError::Model(format!("branch {}-{} is a self loop", br.from, br.to)));
            }
        }
        Ok(())
    }
}

struct Matrix {
    rows: Vec<(usize, Vec<f64>)>,
}

fn parse_number(tok: &str, line: usize) -> Result<f64, OpfError> {
    let t = tok.trim();
    match t {
        "Inf" | "inf" => Ok(f64::INFINITY),
        "-Inf" | "-inf" => Ok(f64::NEG_INFINITY),
        _ => t.parse::<f64>().map_err(|_| OpfError::parse(line, format!("not a number: '{t}'"))),
    }
}

fn strip_comment(line: &str) -> &str {
    line.split('%').next().unwrap_or("")
}

/// Fields that are read without effect.
const IGNORED: &[&str] = &["bus_name", "gentype", "genfuel", "areas", "branch_name"];

pub fn parse_matpower(source: &str) -> Result<NetworkModel, OpfError> {
    let assign = Regex::new(r"^\s*mpc\.(\w+)\s*=\s*(.*)$").expect("static regex");
    let func = Regex::new(r"^\s*function\s+\w+\s*=\s*(\w+)").expect("static regex");
    let lines: Vec<&str> = source.lines().collect();
    let mut name = String::from("case");
    let mut base_mva: Option<(usize, f64)> = None;
    let mut matrices: HashMap<String, (usize, Matrix)> = HashMap::new();
    let mut i = 0;
    while i < lines.len() {
        let lineno = i + 1;
        let text = strip_comment(lines[i]);
        if let Some(c) = func.captures(text) {
            name = c[1].to_string();
            i += 1;
            continue;
        }
        let Some(c) = assign.captures(text) else {
            i += 1;
            continue;
        };
        let field = c[1].to_string();
        let rest = c[2].trim();
        if rest.starts_with('[') {
            let mut rows = Vec::new();
            let mut body = rest[1..].to_string();
            let mut at = i;
            loop {
                let (content, closed) = match body.find(']') {
                    Some(p) => (body[..p].to_string(), true),
                    None => (body.clone(), false),
                };
                for piece in content.split(';') {
                    let toks: Vec<&str> =
                        piece.split(|ch: char| ch.is_whitespace() || ch == ',').filter(|t| !t.is_empty()).collect();
                    if toks.is_empty() {
                        continue;
                    }
                    let vals = toks.iter().map(|t| parse_number(t, at + 1)).collect::<Result<Vec<_>, _>>()?;
                    rows.push((at + 1, vals));
                }
                if closed {
                    break;
                }
                at += 1;
                if at >= lines.len() {
                    return Err(OpfError::parse(lineno, format!("mpc.{field}: missing closing ']'")));
                }
                body = strip_comment(lines[at]).to_string();
            }
            i = at + 1;
            if !IGNORED.contains(&field.as_str()) {
                check_known(&field, lineno)?;
                matrices.insert(field, (lineno, Matrix { rows }));
            }
            continue;
        }
        if rest.starts_with('{') {
            let mut at = i;
            while !strip_comment(lines[at]).contains('}') {
                at += 1;
                if at >= lines.len() {
                    return Err(OpfError::parse(lineno, format!("mpc.{field}: missing closing '}}'")));
                }
            }
            if !IGNORED.contains(&field.as_str()) {
                return Err(OpfError::parse(lineno, format!("unsupported field mpc.{field}")));
            }
            i = at + 1;
            continue;
        }
        let value = rest.trim_end_matches(';').trim().trim_matches('\'').trim_matches('"');
        match field.as_str() {
            "version" => {
                if value != "2" {
                    return Err(OpfError::parse(lineno, format!("unsupported case format version '{value}'")));
                }
            }
            "baseMVA" => base_mva = Some((lineno, parse_number(value, lineno)?)),
            f if IGNORED.contains(&f) => {}
            f => return Err(OpfError::parse(lineno, format!("unsupported field mpc.{f}"))),
        }
        i += 1;
    }

    let take = |m: &mut HashMap<String, (usize, Matrix)>, key: &str| {
        m.remove(key).ok_or_else(|| OpfError::parse(lines.len().max(1), format!("no mpc.{key}")))
    };
    let (_, bus) = take(&mut matrices, "bus")?;
    let (_, gen) = take(&mut matrices, "gen")?;
    let (_, branch) = take(&mut matrices, "branch")?;
    let (cost_line, gencost) = take(&mut matrices, "gencost")?;
    let (_, base) = base_mva.ok_or_else(|| OpfError::parse(lines.len().max(1), "no mpc.baseMVA"))?;
    if !(base > 0.0) {
        return Err(OpfError::parse(base_mva.map_or(1, |b| b.0), "baseMVA must be positive"));
    }

    check_width(&bus, 13, "bus")?;
    check_width(&gen, 10, "gen")?;
    check_width(&branch, 11, "branch")?;

    let mut buses = Vec::new();
    for (line, r) in &bus.rows {
        let kind = match r[1] as i64 {
            1 => BusType::Pq,
            2 => BusType::Pv,
            3 => BusType::Ref,
            4 => continue,
            t => return Err(OpfError::parse(*line, format!("unknown bus type {t}"))),
        };
        buses.push(Bus {
            id: as_id(r[0], *line)?,
            kind,
            pd: r[2] / base,
            qd: r[3] / base,
            gs: r[4] / base,
            bs: r[5] / base,
            area: r[6],
            vm: r[7],
            va: r[8].to_radians(),
            base_kv: r[9],
            zone: r[10],
            vmax: r[11],
            vmin: r[12],
        });
    }
    let live: HashMap<usize, ()> = buses.iter().map(|b| (b.id, ())).collect();
    let all_ids: Vec<usize> = bus.rows.iter().map(|(l, r)| as_id(r[0], *l)).collect::<Result<_, _>>()?;
    let known = |id: usize| all_ids.contains(&id);

    let ng_all = gen.rows.len();
    if gencost.rows.len() == 2 * ng_all && ng_all > 0 {
        return Err(OpfError::parse(cost_line, "reactive power costs are not supported"));
    }
    if gencost.rows.len() != ng_all {
        return Err(OpfError::parse(
            cost_line,
            format!("mpc.gencost has {} rows for {} generators", gencost.rows.len(), ng_all),
        ));
    }
    let mut gens = Vec::new();
    for ((line, r), (cline, c)) in gen.rows.iter().zip(&gencost.rows) {
        let cost = parse_cost(c, *cline)?;
        let bus_id = as_id(r[0], *line)?;
        if !known(bus_id) {
            return Err(OpfError::parse(*line, format!("generator at unknown bus {bus_id}")));
        }
        if r[7] <= 0.0 || !live.contains_key(&bus_id) {
            continue;
        }
        gens.push(Gen {
            bus: bus_id,
            pg: r[1] / base,
            qg: r[2] / base,
            qmax: r[3] / base,
            qmin: r[4] / base,
            vg: r[5],
            mbase: r[6],
            pmax: r[8] / base,
            pmin: r[9] / base,
            cost,
        });
    }

    let mut branches = Vec::new();
    for (line, r) in &branch.rows {
        let (f, t) = (as_id(r[0], *line)?, as_id(r[1], *line)?);
        if !known(f) || !known(t) {
            return Err(OpfError::parse(*line, format!("branch {f}-{t} references an unknown bus")));
        }
        if r[10] == 0.0 || !live.contains_key(&f) || !live.contains_key(&t) {
            continue;
        }
        let (angmin, angmax) = if r.len() >= 13 { (r[11], r[12]) } else { (-360.0, 360.0) };
        branches.push(Branch {
            from: f,
            to: t,
            r: r[2],
            x: r[3],
            b: r[4],
            rate_a: r[5] / base,
            rate_b: r[6] / base,
            rate_c: r[7] / base,
            ratio: r[8],
            shift: r[9].to_radians(),
            angmin: angmin.to_radians(),
            angmax: angmax.to_radians(),
        });
    }

    let model = NetworkModel { name, base_mva: base, buses, gens, branches, admittance: None };
    model.validate()?;
    Ok(model)
}

fn check_known(field: &str, line: usize) -> Result<(), OpfError> {
    match field {
        "bus" | "gen" | "branch" | "gencost" => Ok(()),
        f => Err(OpfError::parse(line, format!("unsupported field mpc.{f}"))),
    }
}

fn check_width(m: &Matrix, min: usize, name: &str) -> Result<(), OpfError> {
    let Some((_, first)) = m.rows.first() else { return Ok(()) };
    let w = first.len();
    if w < min {
        return Err(OpfError::parse(m.rows[0].0, format!("mpc.{name} needs at least {min} columns, found {w}")));
    }
    for (line, r) in &m.rows {
        if r.len() != w {
            return Err(OpfError::parse(*line, format!("ragged mpc.{name} row: {} columns, expected {w}", r.len())));
        }
    }
    Ok(())
}

fn as_id(v: f64, line: usize) -> Result<usize, OpfError> {
    if v >= 1.0 && v.fract() == 0.0 {
        Ok(v as usize)
    } else {
        Err(OpfError::parse(line, format!("invalid bus id {v}")))
    }
}

fn parse_cost(c: &[f64], line: usize) -> Result<Cost, OpfError> {
    if c.len() < 4 {
        return Err(OpfError::parse(line, "mpc.gencost row needs at least 4 columns"));
    }
    match c[0] as i64 {
        2 => {}
        1 => return Err(OpfError::parse(line, "piecewise-linear cost (model 1) is not supported")),
        m => return Err(OpfError::parse(line, format!("unknown cost model {m}"))),
    }
    let n = c[3];
    if n.fract() != 0.0 || !(0.0..=3.0).contains(&n) {
        return Err(OpfError::parse(
            line,
            format!("polynomial cost with {n} coefficients; at most 3 (degree 2) supported"),
        ));
    }
    let n = n as usize;
    if c.len() < 4 + n {
        return Err(OpfError::parse(
            line,
            format!("mpc.gencost row declares {n} coefficients but has {}", c.len() - 4),
        ));
    }
    // Highest degree first.
    let mut coef = [0.0; 3];
    for k in 0..n {
        coef[3 - n + k] = c[4 + k];
    }
    Ok(Cost { startup: c[1], shutdown: c[2], c2: coef[0], c1: coef[1], c0: coef[2] })
}

/// Decimal value `r` with `from_file(r) == v`, so that writing `r` and
/// parsing it again reproduces `v` bit for bit.
fn file_value(v: f64, to_file: impl Fn(f64) -> f64, from_file: impl Fn(f64) -> f64) -> f64 {
    if !v.is_finite() {
        return to_file(v);
    }
    let r = to_file(v);
    if from_file(r) == v {
        return r;
    }
    let (mut up, mut down) = (r, r);
    for _ in 0..64 {
        up = up.next_up();
        if from_file(up) == v {
            return up;
        }
        down = down.next_down();
        if from_file(down) == v {
            return down;
        }
    }
    r
}

fn num(v: f64) -> String {
    if v == f64::INFINITY {
        "Inf".into()
    } else if v == f64::NEG_INFINITY {
        "-Inf".into()
    } else {
        format!("{v}")
    }
}

/// Canonical case text; [`parse_matpower`] reads it back to an identical
/// model.
pub fn write_matpower(model: &NetworkModel) -> String {
    let base = model.base_mva;
    let pu = |v: f64| num(file_value(v, |x| x * base, |x| x / base));
    let deg = |v: f64| num(file_value(v, f64::to_degrees, f64::to_radians));
    let mut s = String::new();
    let _ = writeln!(s, "function mpc = {}", model.name);
    let _ = writeln!(s, "mpc.version = '2';");
    let _ = writeln!(s, "mpc.baseMVA = {};", num(base));
    let _ = writeln!(s, "\n%\tbus_i\ttype\tPd\tQd\tGs\tBs\tarea\tVm\tVa\tbaseKV\tzone\tVmax\tVmin");
    let _ = writeln!(s, "mpc.bus = [");
    for b in &model.buses {
        let cols = [
            b.id.to_string(),
            b.kind.code().to_string(),
            pu(b.pd),
            pu(b.qd),
            pu(b.gs),
            pu(b.bs),
            num(b.area),
            num(b.vm),
            deg(b.va),
            num(b.base_kv),
            num(b.zone),
            num(b.vmax),
            num(b.vmin),
        ];
        let _ = writeln!(s, "\t{};", cols.join("\t"));
    }
    let _ = writeln!(s, "];\n\n%\tbus\tPg\tQg\tQmax\tQmin\tVg\tmBase\tstatus\tPmax\tPmin");
    let _ = writeln!(s, "mpc.gen = [");
    for g in &model.gens {
        let mut cols = vec![
            g.bus.to_string(),
            pu(g.pg),
            pu(g.qg),
            pu(g.qmax),
            pu(g.qmin),
            num(g.vg),
            num(g.mbase),
            "1".into(),
            pu(g.pmax),
            pu(g.pmin),
        ];
        cols.extend(std::iter::repeat_n("0".to_string(), 11));
        let _ = writeln!(s, "\t{};", cols.join("\t"));
    }
    let _ = writeln!(s, "];\n\n%\tfbus\ttbus\tr\tx\tb\trateA\trateB\trateC\tratio\tangle\tstatus\tangmin\tangmax");
    let _ = writeln!(s, "mpc.branch = [");
    for br in &model.branches {
        let cols = [
            br.from.to_string(),
            br.to.to_string(),
            num(br.r),
            num(br.x),
            num(br.b),
            pu(br.rate_a),
            pu(br.rate_b),
            pu(br.rate_c),
            num(br.ratio),
            deg(br.shift),
            "1".into(),
            deg(br.angmin),
            deg(br.angmax),
        ];
        let _ = writeln!(s, "\t{};", cols.join("\t"));
    }
    let _ = writeln!(s, "];\n\n%\t2\tstartup\tshutdown\tn\tc2\tc1\tc0");
    let _ = writeln!(s, "mpc.gencost = [");
    for g in &model.gens {
        let c = &g.cost;
        let cols = ["2".into(), num(c.startup), num(c.shutdown), "3".into(), num(c.c2), num(c.c1), num(c.c0)];
        let _ = writeln!(s, "\t{};", cols.join("\t"));
    }
    let _ = writeln!(s, "];");
    s
}
