//! Brute-force optimal scheduling for tiny instances.
//!
//! Enumerates every task-to-robot assignment, every task order on each robot
//! and every orientation of the conflicting segment pairs whose tasks fly on
//! different robots. Each combination fixes all binaries, so its best start
//! times are the earliest starts of a difference system. Shares nothing with
//! the branch-and-bound except the schedule types.

use std::cmp::Ordering;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};
use std::time::Instant;

use itertools::Itertools;
use rayon::prelude::*;

use crate::instance::MissionInstance;
use crate::model::Variant;
use crate::solver::diff::{DiffConstraintSystem, Node};
use crate::solver::{evaluate_objective, infeasibility_certificate, Schedule, SolveReport, Status};
use crate::{Error, Result};

/// Largest task count the oracle accepts.
pub const MAX_TASKS: usize = 7;

struct Candidate {
    total: f64,
    robot_of: Vec<usize>,
    start: Vec<f64>,
}

fn better(a: &Candidate, b: &Candidate) -> Ordering {
    a.total
        .total_cmp(&b.total)
        .then_with(|| a.robot_of.cmp(&b.robot_of))
        .then_with(|| a.start.iter().zip(&b.start).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal))
}

fn pick(a: Option<Candidate>, b: Option<Candidate>) -> Option<Candidate> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if better(&x, &y).is_le() { x } else { y }),
        (x, None) | (None, x) => x,
    }
}

/// Decodes assignment number `code` in base `m`, task 0 least significant.
fn decode(mut code: u64, n: usize, m: usize) -> Vec<usize> {
    (0..n)
        .map(|_| {
            let k = (code % m as u64) as usize;
            code /= m as u64;
            k
        })
        .collect()
}

/// Optimal schedule of `instance` on its first `m_robots` robots, by exhaustive enumeration.
pub fn brute_force_schedule(instance: &MissionInstance, m_robots: usize, variant: Variant) -> Result<SolveReport> {
    let n = instance.task_count();
    if n > MAX_TASKS {
        return Err(Error::OracleTooLarge { tasks: n, limit: MAX_TASKS });
    }
    let started = Instant::now();
    let p = instance.params;
    let fleet = instance.fleet(m_robots);
    let occ: Vec<f64> = instance.tasks.iter().map(|t| p.occupancy(t.duration)).collect();
    let v = p.v_ex;
    // Per conflict pair: the arc for "a clears first" and for "b clears first".
    let sides: Vec<(usize, usize, [(usize, usize, f64); 2])> = instance
        .conflicts
        .pairs
        .iter()
        .map(|cp| {
            let (pa, pb) = (&instance.tasks[cp.task_a].path, &instance.tasks[cp.task_b].path);
            let (ea, xa) = (pa.entry_length(cp.seg_a) / v, pa.cumulative_lengths()[cp.seg_a] / v);
            let (eb, xb) = (pb.entry_length(cp.seg_b) / v, pb.cumulative_lengths()[cp.seg_b] / v);
            let (a, b) = (cp.task_a, cp.task_b);
            (a, b, [(a, b, xa + p.fifo_buffer - eb), (b, a, xb + p.fifo_buffer - ea)])
        })
        .collect();

    let combos = AtomicU64::new(0);
    let evaluate = |robot_of: &[usize]| -> Option<Candidate> {
        let mut tasks_on = vec![Vec::new(); m_robots];
        for (i, &k) in robot_of.iter().enumerate() {
            tasks_on[k].push(i);
        }
        for (k, tasks) in tasks_on.iter().enumerate() {
            let material: f64 = tasks.iter().map(|&i| instance.tasks[i].volume).sum();
            let flight: f64 = tasks.iter().map(|&i| occ[i]).sum();
            if material > fleet[k].capacity || flight > fleet[k].battery_time {
                return None;
            }
        }
        let active: Vec<usize> = (0..sides.len()).filter(|&c| robot_of[sides[c].0] != robot_of[sides[c].1]).collect();
        let orders = tasks_on.iter().map(|t| t.iter().copied().permutations(t.len()));
        let mut best: Option<Candidate> = None;
        for orders in orders.multi_cartesian_product() {
            let mut rank = vec![0; n];
            let mut base = DiffConstraintSystem::new(n);
            for &(i, j) in instance.deps.edges() {
                base.add(Node::Var(i), Node::Var(j), instance.tasks[i].duration);
            }
            for seq in &orders {
                for (pos, &i) in seq.iter().enumerate() {
                    rank[i] = pos;
                }
                for w in seq.windows(2) {
                    base.add(Node::Var(w[0]), Node::Var(w[1]), occ[w[0]]);
                }
            }
            for &(a, b, s) in &sides {
                if robot_of[a] == robot_of[b] {
                    let (u, v, w) = if rank[a] < rank[b] { s[0] } else { s[1] };
                    base.add(Node::Var(u), Node::Var(v), w);
                }
            }
            for mask in 0u64..1 << active.len() {
                let mut sys = base.clone();
                for (bit, &c) in active.iter().enumerate() {
                    let (u, v, w) = sides[c].2[(mask >> bit & 1) as usize];
                    sys.add(Node::Var(u), Node::Var(v), w);
                }
                combos.fetch_add(1, AtomicOrdering::Relaxed);
                let Some(start) = sys.earliest_starts() else { continue };
                let schedule = Schedule::new(instance, m_robots, robot_of.to_vec(), start);
                let total = evaluate_objective(instance, variant, &schedule).total;
                best = pick(best, Some(Candidate { total, robot_of: robot_of.to_vec(), start: schedule.start }));
            }
        }
        best
    };

    let assignments = (m_robots as u64).checked_pow(n as u32).unwrap_or(0);
    let best = if m_robots == 0 {
        None
    } else {
        (0..assignments).into_par_iter().map(|code| evaluate(&decode(code, n, m_robots))).reduce(|| None, pick)
    };

    let report = |status, objective, best_bound, nodes, schedule, certificate| SolveReport {
        status,
        variant,
        robots: m_robots,
        objective,
        best_bound,
        nodes,
        wall_time: started.elapsed(),
        schedule,
        certificate,
    };
    Ok(match best {
        Some(c) => {
            let schedule = Schedule::new(instance, m_robots, c.robot_of, c.start);
            let objective = evaluate_objective(instance, variant, &schedule);
            report(Status::Optimal, Some(objective), objective.total, combos.into_inner(), Some(schedule), None)
        }
        None => {
            let reason = infeasibility_certificate(instance, &fleet)
                .unwrap_or_else(|| "no assignment, order and orientation is feasible".into());
            report(Status::Infeasible, None, f64::INFINITY, 0, None, Some(reason))
        }
    })
}
