//! Exact branch-and-bound for the scheduling model.
//!
//! Robots are branched on task by task. Same-robot ordering and conflict
//! orientation disjunctions are branched lazily: a node's continuous part is
//! the earliest-start solution of its difference constraints, and only a
//! disjunction that this solution violates is split. See [`search`] for the
//! bounding rules.

pub mod diff;
mod search;

use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::instance::{MissionInstance, RobotSpec};
use crate::model::Variant;

pub use search::PairWindows;

/// Absolute optimality tolerance on the objective.
pub const GAP_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    pub time_limit: Duration,
    /// Worker threads; 0 means all available cores.
    pub threads: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self { time_limit: Duration::from_secs(300), threads: 0 }
    }
}

impl Limits {
    pub fn with_time_limit(time_limit: Duration) -> Self {
        Self { time_limit, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Optimal,
    /// The time limit hit with an incumbent in hand.
    FeasibleTimeout,
    /// The time limit hit before any schedule was found.
    Timeout,
    Infeasible,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Optimal => "optimal",
            Status::FeasibleTimeout => "feasible-timeout",
            Status::Timeout => "timeout",
            Status::Infeasible => "infeasible",
        })
    }
}

/// Objective value and its unweighted components.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Objective {
    pub total: f64,
    /// Makespan.
    pub j_ms: f64,
    /// Importance-weighted sum of completion times.
    pub j_im: f64,
    /// Number of robots used.
    pub j_ut: f64,
}

/// A complete assignment of tasks to robots with start times.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub robot_of: Vec<usize>,
    /// Start of each task's occupancy window (logistics before printing included).
    pub start: Vec<f64>,
    /// Tasks of each robot, ordered by start time.
    pub sequences: Vec<Vec<usize>>,
    /// Per conflict pair: `true` when its `task_a` clears the pair first.
    pub orientations: Vec<bool>,
    pub makespan: f64,
    pub material: Vec<f64>,
    pub flight_time: Vec<f64>,
    pub used: Vec<bool>,
}

impl Schedule {
    /// Derives sequences, orientations and robot totals for `m` robots.
    pub fn new(instance: &MissionInstance, m: usize, robot_of: Vec<usize>, start: Vec<f64>) -> Self {
        let p = instance.params;
        let mut sequences = vec![Vec::new(); m];
        let mut material = vec![0.0; m];
        let mut flight_time = vec![0.0; m];
        for (i, &k) in robot_of.iter().enumerate() {
            sequences[k].push(i);
            material[k] += instance.tasks[i].volume;
            flight_time[k] += p.occupancy(instance.tasks[i].duration);
        }
        for seq in &mut sequences {
            seq.sort_by(|&a, &b| start[a].total_cmp(&start[b]).then(a.cmp(&b)));
        }
        let used = sequences.iter().map(|s| !s.is_empty()).collect();
        let makespan = robot_of
            .iter()
            .enumerate()
            .map(|(i, _)| start[i] + p.occupancy(instance.tasks[i].duration))
            .fold(0.0, f64::max);
        let v = p.v_ex;
        let orientations = instance
            .conflicts
            .pairs
            .iter()
            .map(|cp| {
                let exit_a = instance.tasks[cp.task_a].path.cumulative_lengths()[cp.seg_a] / v;
                let entry_b = instance.tasks[cp.task_b].path.entry_length(cp.seg_b) / v;
                start[cp.task_a] + exit_a + p.fifo_buffer <= start[cp.task_b] + entry_b + 1e-9
            })
            .collect();
        Self { robot_of, start, sequences, orientations, makespan, material, flight_time, used }
    }

    pub fn robot_count(&self) -> usize {
        self.sequences.len()
    }

    pub fn used_robots(&self) -> usize {
        self.used.iter().filter(|&&u| u).count()
    }
}

/// Evaluates the weighted objective of `variant` for a schedule.
pub fn evaluate_objective(instance: &MissionInstance, variant: Variant, schedule: &Schedule) -> Objective {
    let p = instance.params;
    let alpha = instance.importance();
    let j_ms = schedule.makespan;
    let j_im: f64 = (0..instance.task_count())
        .map(|i| alpha[i] * (schedule.start[i] + p.occupancy(instance.tasks[i].duration)))
        .sum();
    let j_ut = schedule.used_robots() as f64;
    Objective { total: combine(p.g_ms, p.g_im, p.g_ut, variant, j_ms, j_im, j_ut), j_ms, j_im, j_ut }
}

pub(crate) fn combine(g_ms: f64, g_im: f64, g_ut: f64, variant: Variant, j_ms: f64, j_im: f64, j_ut: f64) -> f64 {
    let mut total = g_ms * j_ms;
    if variant.has_importance() {
        total += g_im * j_im;
    }
    if variant.has_utilization() {
        total += g_ut * j_ut;
    }
    total
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub status: Status,
    pub variant: Variant,
    pub robots: usize,
    pub objective: Option<Objective>,
    /// Proven lower bound on the optimal objective.
    pub best_bound: f64,
    pub nodes: u64,
    pub wall_time: Duration,
    pub schedule: Option<Schedule>,
    /// Why the instance is infeasible, when it is.
    pub certificate: Option<String>,
}

impl SolveReport {
    /// Absolute gap between incumbent and bound; zero when optimal.
    pub fn gap(&self) -> Option<f64> {
        self.objective.map(|o| (o.total - self.best_bound).max(0.0))
    }

    /// Gap relative to the incumbent objective.
    pub fn relative_gap(&self) -> Option<f64> {
        self.objective.map(|o| if o.total > 0.0 { (o.total - self.best_bound).max(0.0) / o.total } else { 0.0 })
    }

    pub fn makespan(&self) -> Option<f64> {
        self.schedule.as_ref().map(|s| s.makespan)
    }
}

/// Budget conditions that no assignment can satisfy, if any.
pub fn infeasibility_certificate(instance: &MissionInstance, fleet: &[RobotSpec]) -> Option<String> {
    let p = instance.params;
    let demand: f64 = instance.tasks.iter().map(|t| t.volume).sum();
    let supply: f64 = fleet.iter().map(|r| r.capacity).sum();
    if demand > supply {
        return Some(format!("material: tasks need {demand} l but {} robots carry {supply} l", fleet.len()));
    }
    let max_cap = fleet.iter().map(|r| r.capacity).fold(0.0, f64::max);
    if let Some(t) = instance.tasks.iter().find(|t| t.volume > max_cap) {
        return Some(format!("material: task {} needs {} l, largest robot carries {max_cap} l", t.id, t.volume));
    }
    let max_battery = fleet.iter().map(|r| r.battery_time).fold(0.0, f64::max);
    if let Some(t) = instance.tasks.iter().find(|t| p.occupancy(t.duration) > max_battery) {
        return Some(format!(
            "battery: task {} needs {} s of flight, best robot has {max_battery} s",
            t.id,
            p.occupancy(t.duration)
        ));
    }
    let need: f64 = instance.tasks.iter().map(|t| p.occupancy(t.duration)).sum();
    let have: f64 = fleet.iter().map(|r| r.battery_time).sum();
    if need > have {
        return Some(format!("battery: tasks need {need} s of flight, fleet has {have} s"));
    }
    None
}

/// Solves the scheduling problem for the first `m_robots` robots.
pub fn solve(instance: &MissionInstance, m_robots: usize, variant: Variant, limits: &Limits) -> SolveReport {
    search::solve(instance, m_robots, variant, limits)
}

#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub robots: usize,
    pub report: SolveReport,
}

impl SweepEntry {
    /// Rows that no schedule can satisfy, e.g. because of material budgets.
    pub fn infeasible(&self) -> bool {
        self.report.status == Status::Infeasible
    }
}

/// One solve per fleet size in `m_min..=m_max`.
pub fn sweep_fleet(
    instance: &MissionInstance,
    m_min: usize,
    m_max: usize,
    variant: Variant,
    limits: &Limits,
) -> Vec<SweepEntry> {
    (m_min.max(1)..=m_max)
        .map(|m| {
            let report = solve(instance, m, variant, limits);
            log::info!("sweep M={m}: {} makespan={:?}", report.status, report.makespan());
            SweepEntry { robots: m, report }
        })
        .collect()
}
