//! Mixed-integer formulation of the scheduling problem and CPLEX-LP export.
//!
//! The model is a faithful row-by-row rendering of the formulation; the exact
//! solver in [`crate::solver`] does not read it. It exists for export to
//! external MIP solvers and for cross-checking schedules against the rows.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::MissionInstance;
use crate::solver::diff::{DiffConstraintSystem, Node};
use crate::solver::Schedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Makespan only.
    P1,
    /// Makespan plus importance-weighted completion times.
    P2,
    /// P2 plus a per-robot utilization cost.
    P3,
}

impl Variant {
    pub fn has_importance(self) -> bool {
        matches!(self, Variant::P2 | Variant::P3)
    }

    pub fn has_utilization(self) -> bool {
        self == Variant::P3
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::P1 => "p1",
            Variant::P2 => "p2",
            Variant::P3 => "p3",
        })
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "p1" => Ok(Variant::P1),
            "p2" => Ok(Variant::P2),
            "p3" => Ok(Variant::P3),
            other => Err(Error::InvalidParameter { name: "variant", reason: format!("expected p1, p2 or p3, got `{other}`") }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    /// Task assigned to robot.
    X { task: usize, robot: usize },
    /// On `robot`, task `first` precedes task `second`.
    Y { robot: usize, first: usize, second: usize },
    /// Product `x[i][robot] * x[j][robot]` for `i < j`.
    Z { robot: usize, i: usize, j: usize },
    /// Orientation of conflict pair `pair`: 1 when its `task_a` enters first.
    COrient { pair: usize },
    /// Robot used at all.
    U { robot: usize },
    Start { task: usize },
    Makespan,
}

impl Var {
    pub fn name(&self) -> String {
        match *self {
            Var::X { task, robot } => format!("x_{task}_{robot}"),
            Var::Y { robot, first, second } => format!("y_{robot}_{first}_{second}"),
            Var::Z { robot, i, j } => format!("z_{robot}_{i}_{j}"),
            Var::COrient { pair } => format!("c_{pair}"),
            Var::U { robot } => format!("u_{robot}"),
            Var::Start { task } => format!("S_{task}"),
            Var::Makespan => "Cmax".to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

/// Which family of the formulation a row belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tag {
    /// Non-negative start times.
    Start,
    /// Each task assigned exactly once.
    Assign,
    /// Dependency precedence.
    Precedence,
    /// Big-M ordering of tasks sharing a robot, occupancy form.
    Order,
    /// Linearized product defining the ordering pair.
    Pair,
    /// Material budget.
    Material,
    /// Battery flight-time budget.
    Battery,
    /// First-in-first-out conflict resolution.
    Conflict,
    /// Makespan upper-bounds every completion.
    Makespan,
    /// Utilization switching.
    Utilization,
}

impl Tag {
    pub const ALL: [Tag; 10] =
        [Tag::Start, Tag::Assign, Tag::Precedence, Tag::Order, Tag::Pair, Tag::Material, Tag::Battery, Tag::Conflict, Tag::Makespan, Tag::Utilization];

    fn label(self) -> &'static str {
        match self {
            Tag::Start => "start",
            Tag::Assign => "assign",
            Tag::Precedence => "prec",
            Tag::Order => "order",
            Tag::Pair => "pair",
            Tag::Material => "material",
            Tag::Battery => "battery",
            Tag::Conflict => "conflict",
            Tag::Makespan => "makespan",
            Tag::Utilization => "util",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
    pub tag: Tag,
}

impl LinearConstraint {
    /// Signed violation at `values`; zero or negative means satisfied.
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs: f64 = self.terms.iter().map(|&(v, a)| a * values[v]).sum();
        match self.sense {
            Sense::Le => lhs - self.rhs,
            Sense::Ge => self.rhs - lhs,
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MilpModel {
    pub variant: Variant,
    pub variables: Vec<(Var, Domain)>,
    pub constraints: Vec<LinearConstraint>,
    /// Weighted objective terms `(variable, coefficient)`.
    pub objective: Vec<(usize, f64)>,
    pub objective_constant: f64,
    pub big_m: f64,
    index: HashMap<Var, usize>,
}

/// Big-M constant: a completion horizon plus the widest row offset,
/// `sum_i max(tau_s + d_i + tau_e, d_i + delta) + max_i d_i + delta + 1`.
///
/// Every arc of an earliest-start schedule leaving task `i` is at most
/// `max(occupancy_i, d_i + delta)` long, so no completion passes the sum and
/// every deactivated row stays slack.
pub fn big_m(instance: &MissionInstance) -> f64 {
    let p = &instance.params;
    let delta = p.fifo_buffer;
    let horizon: f64 = instance.tasks.iter().map(|t| p.occupancy(t.duration).max(t.duration + delta)).sum();
    let max_d = instance.tasks.iter().map(|t| t.duration).fold(0.0, f64::max);
    horizon + max_d + delta + 1.0
}

struct Builder {
    variables: Vec<(Var, Domain)>,
    index: HashMap<Var, usize>,
    constraints: Vec<LinearConstraint>,
}

impl Builder {
    fn var(&mut self, v: Var, domain: Domain) -> usize {
        let id = self.variables.len();
        self.variables.push((v, domain));
        self.index.insert(v, id);
        id
    }

    fn id(&self, v: Var) -> usize {
        self.index[&v]
    }

    fn row(&mut self, tag: Tag, terms: Vec<(Var, f64)>, sense: Sense, rhs: f64) {
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(terms.len());
        for (v, a) in terms {
            let id = self.id(v);
            match merged.iter_mut().find(|(i, _)| *i == id) {
                Some(t) => t.1 += a,
                None => merged.push((id, a)),
            }
        }
        merged.retain(|&(_, a)| a != 0.0);
        self.constraints.push(LinearConstraint { terms: merged, sense, rhs, tag });
    }
}

/// Entry and exit offsets (seconds after printing start) of segment `seg`.
fn segment_window(instance: &MissionInstance, task: usize, seg: usize) -> (f64, f64) {
    let path = &instance.tasks[task].path;
    let v = instance.params.v_ex;
    (path.entry_length(seg) / v, path.cumulative_lengths()[seg] / v)
}

/// Builds the full model for `m_robots` robots of the instance fleet.
pub fn build_model(instance: &MissionInstance, m_robots: usize, variant: Variant) -> Result<MilpModel> {
    build_model_with_big_m(instance, m_robots, variant, big_m(instance))
}

/// As [`build_model`] but with an explicit big-M constant.
pub fn build_model_with_big_m(
    instance: &MissionInstance,
    m_robots: usize,
    variant: Variant,
    big_m: f64,
) -> Result<MilpModel> {
    let n = instance.task_count();
    if n == 0 {
        return Err(Error::EmptyTaskSet);
    }
    if m_robots == 0 {
        return Err(Error::InvalidParameter { name: "m_robots", reason: "at least one robot".into() });
    }
    let m = m_robots;
    let fleet = instance.fleet(m);
    let p = instance.params;
    let o = big_m;
    let d = instance.durations();
    let occ: Vec<f64> = d.iter().map(|&di| p.occupancy(di)).collect();

    let mut b = Builder { variables: Vec::new(), index: HashMap::new(), constraints: Vec::new() };
    for i in 0..n {
        for k in 0..m {
            b.var(Var::X { task: i, robot: k }, Domain::Binary);
        }
    }
    for k in 0..m {
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    b.var(Var::Y { robot: k, first: i, second: j }, Domain::Binary);
                }
            }
        }
    }
    for k in 0..m {
        for i in 0..n {
            for j in i + 1..n {
                b.var(Var::Z { robot: k, i, j }, Domain::Binary);
            }
        }
    }
    for pair in 0..instance.conflicts.len() {
        b.var(Var::COrient { pair }, Domain::Binary);
    }
    if variant.has_utilization() {
        for k in 0..m {
            b.var(Var::U { robot: k }, Domain::Binary);
        }
    }
    for i in 0..n {
        b.var(Var::Start { task: i }, Domain::Continuous);
    }
    b.var(Var::Makespan, Domain::Continuous);

    let s = |i: usize| Var::Start { task: i };
    let x = |i: usize, k: usize| Var::X { task: i, robot: k };

    for i in 0..n {
        b.row(Tag::Start, vec![(s(i), 1.0)], Sense::Ge, 0.0);
    }
    for i in 0..n {
        b.row(Tag::Assign, (0..m).map(|k| (x(i, k), 1.0)).collect(), Sense::Eq, 1.0);
    }
    for &(i, j) in instance.deps.edges() {
        b.row(Tag::Precedence, vec![(s(j), 1.0), (s(i), -1.0)], Sense::Ge, d[i]);
    }
    // S_i + occ_i <= S_j + O (1 - y)
    for k in 0..m {
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let y = Var::Y { robot: k, first: i, second: j };
                    b.row(Tag::Order, vec![(s(i), 1.0), (s(j), -1.0), (y, o)], Sense::Le, o - occ[i]);
                }
            }
        }
    }
    for k in 0..m {
        for i in 0..n {
            for j in i + 1..n {
                let z = Var::Z { robot: k, i, j };
                b.row(Tag::Pair, vec![(z, 1.0), (x(i, k), -1.0)], Sense::Le, 0.0);
                b.row(Tag::Pair, vec![(z, 1.0), (x(j, k), -1.0)], Sense::Le, 0.0);
                b.row(Tag::Pair, vec![(z, 1.0), (x(i, k), -1.0), (x(j, k), -1.0)], Sense::Ge, -1.0);
                b.row(
                    Tag::Pair,
                    vec![
                        (Var::Y { robot: k, first: i, second: j }, 1.0),
                        (Var::Y { robot: k, first: j, second: i }, 1.0),
                        (z, -1.0),
                    ],
                    Sense::Eq,
                    0.0,
                );
            }
        }
    }
    for (k, robot) in fleet.iter().enumerate() {
        b.row(Tag::Material, (0..n).map(|i| (x(i, k), instance.tasks[i].volume)).collect(), Sense::Le, robot.capacity);
    }
    for (k, robot) in fleet.iter().enumerate() {
        b.row(Tag::Battery, (0..n).map(|i| (x(i, k), occ[i])).collect(), Sense::Le, robot.battery_time);
    }
    // Time offsets cancel the common tau_s term of both arrival times.
    let delta = p.fifo_buffer;
    for (pair, cp) in instance.conflicts.pairs.iter().enumerate() {
        let (a, bt) = (cp.task_a, cp.task_b);
        let (ea, xa) = segment_window(instance, a, cp.seg_a);
        let (eb, xb) = segment_window(instance, bt, cp.seg_b);
        let c = Var::COrient { pair };
        // entry_a <= entry_b + O (1 - c)
        b.row(Tag::Conflict, vec![(s(a), 1.0), (s(bt), -1.0), (c, o)], Sense::Le, o + eb - ea);
        // entry_b <= entry_a + O c
        b.row(Tag::Conflict, vec![(s(bt), 1.0), (s(a), -1.0), (c, -o)], Sense::Le, ea - eb);
        // exit_a + delta <= entry_b + O (1 - c)
        b.row(Tag::Conflict, vec![(s(a), 1.0), (s(bt), -1.0), (c, o)], Sense::Le, o + eb - xa - delta);
        // exit_b + delta <= entry_a + O c
        b.row(Tag::Conflict, vec![(s(bt), 1.0), (s(a), -1.0), (c, -o)], Sense::Le, ea - xb - delta);
    }
    for i in 0..n {
        b.row(Tag::Makespan, vec![(s(i), 1.0), (Var::Makespan, -1.0)], Sense::Le, -occ[i]);
    }
    if variant.has_utilization() {
        for k in 0..m {
            let u = Var::U { robot: k };
            let mut le: Vec<(Var, f64)> = (0..n).map(|i| (x(i, k), 1.0)).collect();
            le.push((u, -o));
            b.row(Tag::Utilization, le, Sense::Le, 0.0);
            let mut ge: Vec<(Var, f64)> = (0..n).map(|i| (x(i, k), 1.0)).collect();
            ge.push((u, -1.0));
            b.row(Tag::Utilization, ge, Sense::Ge, 0.0);
        }
    }

    let mut objective = vec![(b.id(Var::Makespan), p.g_ms)];
    let mut objective_constant = 0.0;
    if variant.has_importance() {
        let alpha = instance.importance();
        for i in 0..n {
            if alpha[i] != 0.0 {
                objective.push((b.id(s(i)), p.g_im * alpha[i]));
                objective_constant += p.g_im * alpha[i] * occ[i];
            }
        }
    }
    if variant.has_utilization() {
        for k in 0..m {
            objective.push((b.id(Var::U { robot: k }), p.g_ut));
        }
    }

    Ok(MilpModel {
        variant,
        variables: b.variables,
        constraints: b.constraints,
        objective,
        objective_constant,
        big_m: o,
        index: b.index,
    })
}

impl MilpModel {
    pub fn var_index(&self, v: &Var) -> Option<usize> {
        self.index.get(v).copied()
    }

    pub fn count_tag(&self, tag: Tag) -> usize {
        self.constraints.iter().filter(|c| c.tag == tag).count()
    }

    pub fn count_vars(&self, pred: impl Fn(&Var) -> bool) -> usize {
        self.variables.iter().filter(|(v, _)| pred(v)).count()
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective_constant + self.objective.iter().map(|&(v, a)| a * values[v]).sum::<f64>()
    }

    /// Rows violated by more than `tol` at `values`, with their violation.
    pub fn violated_rows(&self, values: &[f64], tol: f64) -> Vec<(usize, f64)> {
        let mut out: Vec<(usize, f64)> = self
            .constraints
            .iter()
            .enumerate()
            .map(|(r, c)| (r, c.violation(values)))
            .filter(|&(_, v)| v > tol)
            .collect();
        for (id, (_, domain)) in self.variables.iter().enumerate() {
            let v = values[id];
            let bad = match domain {
                Domain::Binary => v != 0.0 && v != 1.0,
                Domain::Continuous => v < -tol,
            };
            if bad {
                out.push((usize::MAX, v));
            }
        }
        out
    }

    /// Full variable vector corresponding to a schedule.
    ///
    /// Ordering binaries follow the start times of tasks sharing a robot and
    /// each conflict binary is set to 1 when `task_a` clears the pair first.
    pub fn assignment_from_schedule(&self, instance: &MissionInstance, schedule: &Schedule) -> Vec<f64> {
        let mut values = vec![0.0; self.variables.len()];
        let delta = instance.params.fifo_buffer;
        for (id, (var, _)) in self.variables.iter().enumerate() {
            values[id] = match *var {
                Var::X { task, robot } => (schedule.robot_of[task] == robot) as u8 as f64,
                Var::Y { robot, first, second } => {
                    let same = schedule.robot_of[first] == robot && schedule.robot_of[second] == robot;
                    let before = (schedule.start[first], first) < (schedule.start[second], second);
                    (same && before) as u8 as f64
                }
                Var::Z { robot, i, j } => {
                    (schedule.robot_of[i] == robot && schedule.robot_of[j] == robot) as u8 as f64
                }
                Var::COrient { pair } => {
                    let cp = &instance.conflicts.pairs[pair];
                    let (_, xa) = segment_window(instance, cp.task_a, cp.seg_a);
                    let (eb, _) = segment_window(instance, cp.task_b, cp.seg_b);
                    let a_first = schedule.start[cp.task_a] + xa + delta <= schedule.start[cp.task_b] + eb + 1e-9;
                    a_first as u8 as f64
                }
                Var::U { robot } => schedule.robot_of.contains(&robot) as u8 as f64,
                Var::Start { task } => schedule.start[task],
                Var::Makespan => schedule.makespan,
            };
        }
        values
    }
}

/// Exhaustive solve of a small model: enumerates every binary vector and
/// solves the remaining difference rows for earliest continuous values.
///
/// Only usable for tiny models; refuses more than `max_binaries` binaries.
/// Returns the optimal objective and variable vector, or `None` if infeasible.
pub fn solve_by_enumeration(model: &MilpModel, max_binaries: usize) -> Result<Option<(f64, Vec<f64>)>> {
    let binaries: Vec<usize> =
        model.variables.iter().enumerate().filter(|(_, (_, d))| *d == Domain::Binary).map(|(i, _)| i).collect();
    if binaries.len() > max_binaries {
        return Err(Error::InvalidParameter {
            name: "max_binaries",
            reason: format!("model has {} binaries, limit {max_binaries}", binaries.len()),
        });
    }
    let continuous: Vec<usize> =
        model.variables.iter().enumerate().filter(|(_, (_, d))| *d == Domain::Continuous).map(|(i, _)| i).collect();
    let mut slot = vec![usize::MAX; model.variables.len()];
    for (pos, &v) in continuous.iter().enumerate() {
        slot[v] = pos;
    }
    let is_binary: Vec<bool> = model.variables.iter().map(|(_, d)| *d == Domain::Binary).collect();

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut values = vec![0.0; model.variables.len()];
    'outer: for mask in 0u64..(1u64 << binaries.len()) {
        for (bit, &v) in binaries.iter().enumerate() {
            values[v] = ((mask >> bit) & 1) as f64;
        }
        let mut sys = DiffConstraintSystem::new(continuous.len());
        for row in &model.constraints {
            let mut rhs = row.rhs;
            let mut cont: Vec<(usize, f64)> = Vec::with_capacity(2);
            for &(v, a) in &row.terms {
                if is_binary[v] {
                    rhs -= a * values[v];
                } else {
                    cont.push((slot[v], a));
                }
            }
            let senses: &[Sense] = match row.sense {
                Sense::Eq => &[Sense::Le, Sense::Ge],
                Sense::Le => &[Sense::Le],
                Sense::Ge => &[Sense::Ge],
            };
            for &sense in senses {
                // Normalize to `sum a x <= r`.
                let (sign, r) = if sense == Sense::Le { (1.0, rhs) } else { (-1.0, -rhs) };
                match cont.as_slice() {
                    [] => {
                        if 0.0 > r + 1e-9 {
                            continue 'outer;
                        }
                    }
                    &[(u, a)] if (sign * a) == 1.0 => sys.add(Node::Var(u), Node::Origin, -r),
                    &[(u, a)] if (sign * a) == -1.0 => sys.add(Node::Origin, Node::Var(u), -r),
                    &[(u, a), (w, c)] if sign * a == 1.0 && sign * c == -1.0 => sys.add(Node::Var(u), Node::Var(w), -r),
                    &[(u, a), (w, c)] if sign * a == -1.0 && sign * c == 1.0 => sys.add(Node::Var(w), Node::Var(u), -r),
                    _ => unreachable!("model rows are difference rows once binaries are fixed"),
                }
            }
        }
        let Some(cont_values) = sys.earliest_starts() else { continue };
        for (pos, &v) in continuous.iter().enumerate() {
            values[v] = cont_values[pos];
        }
        let obj = model.objective_value(&values);
        if best.as_ref().is_none_or(|(b, _)| obj < *b - 1e-9) {
            best = Some((obj, values.clone()));
        }
    }
    Ok(best)
}

/// Formats like C's `%.17g`.
fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.16e}", v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        let fixed = format!("{:.*}", decimals, v);
        if fixed.contains('.') {
            fixed.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            fixed
        }
    } else {
        let m = if mantissa.contains('.') { mantissa.trim_end_matches('0').trim_end_matches('.') } else { mantissa };
        format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn write_terms(out: &mut String, terms: &[(usize, f64)], names: &[String]) {
    for (n, &(v, a)) in terms.iter().enumerate() {
        if n > 0 && n % 8 == 0 {
            out.push_str("\n   ");
        }
        let sign = if a < 0.0 { '-' } else { '+' };
        if n == 0 && a >= 0.0 {
            let _ = write!(out, " {} {}", fmt_num(a), names[v]);
        } else {
            let _ = write!(out, " {sign} {} {}", fmt_num(a.abs()), names[v]);
        }
    }
}

/// Renders the model in CPLEX LP format. Output is deterministic.
pub fn export_lp(model: &MilpModel) -> String {
    let names: Vec<String> = model.variables.iter().map(|(v, _)| v.name()).collect();
    let mut out = String::new();
    let _ = writeln!(out, "\\ aeroprint scheduling model, variant {}", model.variant);
    let _ = writeln!(out, "\\ big-M = {}", fmt_num(model.big_m));
    out.push_str("Minimize\n obj:");
    write_terms(&mut out, &model.objective, &names);
    if model.objective_constant != 0.0 {
        let _ = write!(out, " + {}", fmt_num(model.objective_constant));
    }
    out.push_str("\nSubject To\n");
    let mut counters: HashMap<Tag, usize> = HashMap::new();
    for row in &model.constraints {
        let c = counters.entry(row.tag).or_default();
        let _ = write!(out, " {}_{}:", row.tag.label(), c);
        *c += 1;
        write_terms(&mut out, &row.terms, &names);
        let sense = match row.sense {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        };
        let _ = writeln!(out, " {sense} {}", fmt_num(row.rhs));
    }
    out.push_str("Bounds\n");
    for (v, d) in &model.variables {
        if *d == Domain::Continuous {
            let _ = writeln!(out, " {} >= 0", v.name());
        }
    }
    out.push_str("Binaries\n");
    let binaries: Vec<&String> =
        model.variables.iter().zip(&names).filter(|((_, d), _)| *d == Domain::Binary).map(|(_, n)| n).collect();
    for chunk in binaries.chunks(10) {
        out.push(' ');
        out.push_str(&chunk.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(" "));
        out.push('\n');
    }
    out.push_str("End\n");
    out
}
