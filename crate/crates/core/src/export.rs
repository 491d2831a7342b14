//! Disjunctive big-M MIP model of an instance, written in CPLEX LP format,
//! and start vectors derived from schedules.
//!
//! Variables: `S_j_k` is the start of operation `k` of job `j`, `Cmax` the
//! makespan and `x_i_j_k_l` orders the same-machine pair (`Oi.j`, `Ok.l`),
//! with value 1 when `Oi.j` comes first. Each pair is listed once, the
//! lower flat index first. The LP file has sections in the order
//! `Minimize`, `Subject To`, `Bounds`, `Binaries`, `End`; rows appear as
//! precedence rows by job, then both disjunctive rows of each pair by
//! machine, then one makespan row per job.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::instance::{validate_schedule, Instance, OperationId, Schedule, Time};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Ge,
    Le,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Ge => ">=",
            Sense::Le => "<=",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(Time, String)>,
    pub sense: Sense,
    pub rhs: Time,
}

impl Constraint {
    fn ge(name: String, terms: Vec<(Time, String)>, rhs: Time) -> Self {
        Constraint {
            name,
            terms,
            sense: Sense::Ge,
            rhs,
        }
    }

    /// Left-hand side under `values`; missing variables count as zero.
    pub fn lhs(&self, values: &BTreeMap<String, Time>) -> Time {
        self.terms
            .iter()
            .map(|(c, v)| c * values.get(v).copied().unwrap_or(0))
            .sum()
    }

    pub fn holds(&self, values: &BTreeMap<String, Time>) -> bool {
        let lhs = self.lhs(values);
        match self.sense {
            Sense::Ge => lhs >= self.rhs,
            Sense::Le => lhs <= self.rhs,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MipModel {
    pub name: String,
    /// Non-negative continuous variables, `Cmax` last.
    pub continuous: Vec<String>,
    pub binaries: Vec<String>,
    pub constraints: Vec<Constraint>,
    pub big_m: Time,
}

pub fn start_var(op: OperationId) -> String {
    format!("S_{}_{}", op.job, op.position)
}

pub fn pair_var(a: OperationId, b: OperationId) -> String {
    format!("x_{}_{}_{}_{}", a.job, a.position, b.job, b.position)
}

const CMAX: &str = "Cmax";

impl MipModel {
    pub fn build(inst: &Instance) -> Self {
        let big_m = 1 + inst.total_duration();
        let mut continuous: Vec<String> = inst.ops().map(start_var).collect();
        continuous.push(CMAX.to_string());
        let mut constraints = Vec::new();
        for j in 0..inst.n_jobs() {
            for k in 1..inst.n_machines() {
                let (a, b) = (OperationId::new(j, k - 1), OperationId::new(j, k));
                constraints.push(Constraint::ge(
                    format!("prec_{j}_{k}"),
                    vec![(1, start_var(b)), (-1, start_var(a))],
                    inst.duration_of(a),
                ));
            }
        }
        let mut binaries = Vec::new();
        for mach in 0..inst.n_machines() {
            let ops = inst.machine_ops(mach);
            for (i, &ai) in ops.iter().enumerate() {
                for &bi in &ops[i + 1..] {
                    let (a, b) = (inst.op(ai), inst.op(bi));
                    let x = pair_var(a, b);
                    let tag = &x[2..];
                    constraints.push(Constraint::ge(
                        format!("da_{tag}"),
                        vec![(1, start_var(b)), (-1, start_var(a)), (-big_m, x.clone())],
                        inst.duration_of(a) - big_m,
                    ));
                    constraints.push(Constraint::ge(
                        format!("db_{tag}"),
                        vec![(1, start_var(a)), (-1, start_var(b)), (big_m, x.clone())],
                        inst.duration_of(b),
                    ));
                    binaries.push(x);
                }
            }
        }
        for j in 0..inst.n_jobs() {
            let last = OperationId::new(j, inst.n_machines() - 1);
            constraints.push(Constraint::ge(
                format!("mk_{j}"),
                vec![(1, CMAX.to_string()), (-1, start_var(last))],
                inst.duration_of(last),
            ));
        }
        MipModel {
            name: inst.name().to_string(),
            continuous,
            binaries,
            constraints,
            big_m,
        }
    }

    /// Rows whose left-hand side carries the big-M coefficient.
    pub fn big_m_rows(&self) -> usize {
        self.constraints
            .iter()
            .filter(|c| c.terms.iter().any(|(coef, _)| coef.abs() == self.big_m))
            .count()
    }

    pub fn to_lp(&self) -> String {
        let mut out = String::new();
        if !self.name.is_empty() {
            let _ = writeln!(out, "\\ instance {}", self.name);
        }
        let _ = writeln!(out, "\\ big_M = {}", self.big_m);
        out.push_str("Minimize\n obj: Cmax\nSubject To\n");
        for c in &self.constraints {
            let _ = write!(out, " {}:", c.name);
            for (i, (coef, var)) in c.terms.iter().enumerate() {
                let sign = if *coef < 0 { "-" } else if i > 0 { "+" } else { "" };
                let mag = coef.abs();
                let sep = if sign.is_empty() { "" } else { " " };
                if mag == 1 {
                    let _ = write!(out, " {sign}{sep}{var}");
                } else {
                    let _ = write!(out, " {sign}{sep}{mag} {var}");
                }
            }
            let _ = writeln!(out, " {} {}", c.sense, c.rhs);
        }
        out.push_str("Bounds\n");
        for v in &self.continuous {
            let _ = writeln!(out, " {v} >= 0");
        }
        out.push_str("Binaries\n");
        for v in &self.binaries {
            let _ = writeln!(out, " {v}");
        }
        out.push_str("End\n");
        out
    }

    /// Every constraint, bound and integrality requirement that `values`
    /// violates, as readable messages.
    pub fn violations(&self, values: &BTreeMap<String, Time>) -> Vec<String> {
        let mut bad = Vec::new();
        for v in self.continuous.iter().chain(&self.binaries) {
            if !values.contains_key(v) {
                bad.push(format!("{v} has no value"));
            }
        }
        for v in &self.continuous {
            if values.get(v).is_some_and(|&x| x < 0) {
                bad.push(format!("{v} is negative"));
            }
        }
        for v in &self.binaries {
            if values.get(v).is_some_and(|&x| x != 0 && x != 1) {
                bad.push(format!("{v} is not binary"));
            }
        }
        for c in &self.constraints {
            if !c.holds(values) {
                bad.push(format!("{}: lhs {} {} {}", c.name, c.lhs(values), c.sense, c.rhs));
            }
        }
        bad
    }
}

/// The disjunctive model of `inst` as LP text.
pub fn export_disjunctive_lp(inst: &Instance) -> String {
    MipModel::build(inst).to_lp()
}

/// Variable values of a feasible schedule, in model order with `Cmax` last.
pub fn start_values(inst: &Instance, schedule: &Schedule) -> Result<Vec<(String, Time)>> {
    validate_schedule(inst, schedule).map_err(Error::Infeasible)?;
    let mut out: Vec<(String, Time)> = inst.ops().map(|op| (start_var(op), schedule.start(op))).collect();
    for mach in 0..inst.n_machines() {
        let ops = inst.machine_ops(mach);
        for (i, &ai) in ops.iter().enumerate() {
            for &bi in &ops[i + 1..] {
                let (a, b) = (inst.op(ai), inst.op(bi));
                out.push((pair_var(a, b), Time::from(schedule.start(a) < schedule.start(b))));
            }
        }
    }
    out.push((CMAX.to_string(), schedule.makespan()));
    Ok(out)
}

/// Start file: a `# name value` header then one `name value` line per variable.
pub fn export_start_vector(inst: &Instance, schedule: &Schedule) -> Result<String> {
    let mut out = String::from("# name value\n");
    for (name, value) in start_values(inst, schedule)? {
        let _ = writeln!(out, "{name} {value}");
    }
    Ok(out)
}

/// Reads a start file back into a name to value map.
pub fn parse_start_vector(text: &str) -> Result<BTreeMap<String, Time>> {
    let mut values = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| Error::Parse { line: i + 1, message };
        let mut it = line.split_whitespace();
        let (Some(name), Some(value), None) = (it.next(), it.next(), it.next()) else {
            return Err(parse_err(format!("expected \"name value\", got {line:?}")));
        };
        let value = value
            .parse::<Time>()
            .map_err(|_| parse_err(format!("invalid value {value:?}")))?;
        values.insert(name.to_string(), value);
    }
    Ok(values)
}
