//! Independent re-checking of schedules: constraint arithmetic, sampled
//! clearance simulation and Gantt output.
//!
//! Nothing here goes through the model rows or the solver's arcs; every
//! condition is re-derived from the instance data.

use std::fmt::{self, Write as _};

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::instance::MissionInstance;
use crate::solver::Schedule;
use crate::{Error, Result};

/// Slack allowed on timing conditions, in seconds. Budgets get none.
pub const TIME_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ViolationKind {
    Assignment,
    Precedence,
    Ordering,
    Material,
    Battery,
    Conflict,
    Makespan,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant");
        f.write_str(s.as_str().expect("string tag"))
    }
}

/// One broken condition. `ids` are task ids, except for budget kinds where
/// the single id is the robot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub ids: Vec<usize>,
    pub magnitude: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:?} by {}", self.kind, self.ids, self.magnitude)
    }
}

fn sum_in_id_order(tasks: impl Iterator<Item = f64>) -> f64 {
    tasks.fold(0.0, |acc, x| acc + x)
}

/// Lists every violated condition of `schedule`; empty means feasible.
pub fn check_schedule(instance: &MissionInstance, schedule: &Schedule) -> Vec<Violation> {
    let n = instance.task_count();
    let m = schedule.robot_count();
    let p = instance.params;
    let mut out = Vec::new();
    let mut push = |kind, ids: Vec<usize>, magnitude: f64| out.push(Violation { kind, ids, magnitude });

    if schedule.robot_of.len() != n || schedule.start.len() != n {
        push(ViolationKind::Assignment, vec![], n.abs_diff(schedule.robot_of.len().min(schedule.start.len())) as f64);
        return out;
    }
    let mut bad_assignment = false;
    for i in 0..n {
        if schedule.robot_of[i] >= m {
            push(ViolationKind::Assignment, vec![i], 1.0);
            bad_assignment = true;
        }
        let s = schedule.start[i];
        if !s.is_finite() {
            push(ViolationKind::Assignment, vec![i], f64::INFINITY);
            bad_assignment = true;
        } else if s < -TIME_TOLERANCE {
            push(ViolationKind::Precedence, vec![i], -s);
        }
    }
    if bad_assignment {
        return out;
    }

    let s = &schedule.start;
    let d: Vec<f64> = instance.tasks.iter().map(|t| t.duration).collect();
    let occ: Vec<f64> = d.iter().map(|&d| p.tau_log_s + d + p.tau_log_e).collect();

    for &(i, j) in instance.deps.edges() {
        let gap = s[i] + d[i] - s[j];
        if gap > TIME_TOLERANCE {
            push(ViolationKind::Precedence, vec![i, j], gap);
        }
    }

    let fleet = instance.fleet(m);
    for (k, robot) in fleet.iter().enumerate() {
        let mine: Vec<usize> = (0..n).filter(|&i| schedule.robot_of[i] == k).collect();
        let material = sum_in_id_order(mine.iter().map(|&i| instance.tasks[i].volume));
        if material > robot.capacity {
            push(ViolationKind::Material, vec![k], material - robot.capacity);
        }
        let flight = sum_in_id_order(mine.iter().map(|&i| occ[i]));
        if flight > robot.battery_time {
            push(ViolationKind::Battery, vec![k], flight - robot.battery_time);
        }
        for (x, &i) in mine.iter().enumerate() {
            for &j in &mine[x + 1..] {
                let overlap = (s[i] + occ[i]).min(s[j] + occ[j]) - s[i].max(s[j]);
                if overlap > TIME_TOLERANCE {
                    push(ViolationKind::Ordering, vec![i, j], overlap);
                }
            }
        }
    }

    let v = p.v_ex;
    for cp in &instance.conflicts.pairs {
        let (a, b) = (cp.task_a, cp.task_b);
        let (pa, pb) = (&instance.tasks[a].path, &instance.tasks[b].path);
        let enter_a = s[a] + p.tau_log_s + pa.entry_length(cp.seg_a) / v;
        let leave_a = s[a] + p.tau_log_s + pa.cumulative_lengths()[cp.seg_a] / v;
        let enter_b = s[b] + p.tau_log_s + pb.entry_length(cp.seg_b) / v;
        let leave_b = s[b] + p.tau_log_s + pb.cumulative_lengths()[cp.seg_b] / v;
        let a_first = leave_a + p.fifo_buffer - enter_b;
        let b_first = leave_b + p.fifo_buffer - enter_a;
        let miss = a_first.min(b_first);
        if miss > TIME_TOLERANCE {
            push(ViolationKind::Conflict, vec![a, b, cp.seg_a, cp.seg_b], miss);
        }
    }

    for i in 0..n {
        let late = s[i] + occ[i] - schedule.makespan;
        if late > TIME_TOLERANCE || schedule.makespan.is_nan() {
            push(ViolationKind::Makespan, vec![i], late);
        }
    }
    out
}

fn none_if_missing<S: Serializer>(value: &Option<f64>, ser: S) -> std::result::Result<S::Ok, S::Error> {
    match value {
        Some(v) => ser.serialize_f64(*v),
        None => ser.serialize_str("none"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample {
    pub time_s: f64,
    /// Smallest distance between two printing robots; "none" with fewer than two.
    #[serde(serialize_with = "none_if_missing")]
    pub min_distance_m: Option<f64>,
    pub pair: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub dt_s: f64,
    /// Over the uniform samples and every segment boundary instant.
    #[serde(serialize_with = "none_if_missing")]
    pub global_min_distance_m: Option<f64>,
    pub series: Vec<Sample>,
    pub material_l: Vec<f64>,
    pub flight_time_s: Vec<f64>,
    pub makespan_s: f64,
}

impl SimReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Printing window and path of one task, for position lookups.
struct Printer<'a> {
    task: usize,
    begin: f64,
    end: f64,
    path: &'a crate::geometry::PrintPath,
}

fn closest_pair(printers: &[Printer<'_>], v: f64, t: f64) -> Option<(f64, (usize, usize))> {
    let active: Vec<(usize, crate::geometry::Point3)> = printers
        .iter()
        .filter(|p| p.begin <= t && t <= p.end)
        .map(|p| (p.task, p.path.point_at_length(((t - p.begin) * v).clamp(0.0, p.path.total_length()))))
        .collect();
    let mut best: Option<(f64, (usize, usize))> = None;
    for (x, &(i, pi)) in active.iter().enumerate() {
        for &(j, pj) in &active[x + 1..] {
            let dist = pi.distance(pj);
            if best.is_none_or(|(b, _)| dist < b) {
                best = Some((dist, (i.min(j), i.max(j))));
            }
        }
    }
    best
}

/// Samples every robot's printing position every `dt` seconds and at every
/// segment boundary, recording the closest approach between printing robots.
pub fn simulate(instance: &MissionInstance, schedule: &Schedule, dt: f64) -> Result<SimReport> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParameter { name: "dt", reason: format!("must be positive, got {dt}") });
    }
    let p = instance.params;
    let n = instance.task_count();
    let m = schedule.robot_count();
    let printers: Vec<Printer<'_>> = (0..n)
        .map(|i| {
            let begin = schedule.start[i] + p.tau_log_s;
            Printer { task: i, begin, end: begin + instance.tasks[i].duration, path: &instance.tasks[i].path }
        })
        .collect();
    let makespan = (0..n)
        .map(|i| schedule.start[i] + p.tau_log_s + instance.tasks[i].duration + p.tau_log_e)
        .fold(0.0, f64::max);

    let steps = (makespan / dt).ceil() as usize;
    let series: Vec<Sample> = (0..=steps)
        .into_par_iter()
        .map(|k| {
            let t = k as f64 * dt;
            let hit = closest_pair(&printers, p.v_ex, t);
            Sample { time_s: t, min_distance_m: hit.map(|h| h.0), pair: hit.map(|h| h.1) }
        })
        .collect();
    let events: Vec<f64> = printers
        .iter()
        .flat_map(|pr| pr.path.cumulative_lengths().iter().map(move |&len| pr.begin + len / p.v_ex))
        .chain(printers.iter().map(|pr| pr.begin))
        .collect();
    let event_min = events
        .par_iter()
        .filter_map(|&t| closest_pair(&printers, p.v_ex, t).map(|h| h.0))
        .reduce_with(f64::min);
    let sample_min = series.iter().filter_map(|s| s.min_distance_m).reduce(f64::min);
    let global = match (sample_min, event_min) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    };

    let mut material = vec![0.0; m];
    let mut flight = vec![0.0; m];
    for i in 0..n {
        let k = schedule.robot_of[i];
        material[k] += instance.tasks[i].volume;
        flight[k] += p.tau_log_s + instance.tasks[i].duration + p.tau_log_e;
    }
    Ok(SimReport {
        dt_s: dt,
        global_min_distance_m: global,
        series,
        material_l: material,
        flight_time_s: flight,
        makespan_s: makespan,
    })
}

/// Gantt chart of `schedule` as SVG 1.1 and as CSV.
pub fn emit_gantt(instance: &MissionInstance, schedule: &Schedule) -> (String, String) {
    let p = instance.params;
    let n = instance.task_count();
    let m = schedule.robot_count();
    let (label_w, row_h, plot_w) = (70.0, 30.0, 1000.0);
    let horizon = schedule.makespan.max(1e-9);
    let x = |t: f64| label_w + t / horizon * plot_w;
    let height = row_h * m as f64 + 30.0;

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{height}" font-family="sans-serif" font-size="11">"#,
        label_w + plot_w + 10.0
    );
    for k in 0..m {
        let _ = writeln!(svg, r#"<text x="4" y="{}">UAV {k}</text>"#, row_h * k as f64 + 19.0);
    }
    let mut csv = String::from("task,robot,start_s,print_start_s,print_end_s,complete_s\n");
    for i in 0..n {
        let k = schedule.robot_of[i];
        let start = schedule.start[i];
        let print_start = start + p.tau_log_s;
        let print_end = print_start + instance.tasks[i].duration;
        let complete = print_end + p.tau_log_e;
        let _ = writeln!(csv, "{i},{k},{start},{print_start},{print_end},{complete}");

        let y = row_h * k as f64 + 5.0;
        let hue = (i * 137) % 360;
        for (from, to, fill) in [
            (start, print_start, "#b0b0b0".to_string()),
            (print_start, print_end, format!("hsl({hue},60%,60%)")),
            (print_end, complete, "#b0b0b0".to_string()),
        ] {
            let _ = writeln!(
                svg,
                r#"<rect x="{:.3}" y="{y}" width="{:.3}" height="20" fill="{fill}" stroke="black" stroke-width="0.3"/>"#,
                x(from),
                x(to) - x(from)
            );
        }
        let _ = writeln!(svg, r#"<text x="{:.3}" y="{}" text-anchor="middle">{i}</text>"#, x((print_start + print_end) / 2.0), y + 14.0);
    }
    let _ = writeln!(
        svg,
        r#"<text x="{label_w}" y="{}">0 s</text><text x="{}" y="{}" text-anchor="end">{:.1} s</text>"#,
        height - 6.0,
        label_w + plot_w,
        height - 6.0,
        schedule.makespan
    );
    svg.push_str("</svg>\n");
    (svg, csv)
}
