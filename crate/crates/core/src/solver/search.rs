//! Depth-first branch-and-bound over robot assignments and disjunctions.
//!
//! A node holds a partial robot assignment and a set of difference arcs
//! (precedences plus the disjunct chosen at every branching so far). Its
//! earliest starts ("heads") and longest paths to the end ("tails") are kept
//! up to date incrementally as arcs are added.
//!
//! Conflicts between two tasks are handled per task pair rather than per
//! segment pair: every conflicting segment pair forbids an open interval of
//! the start offset `S_b - S_a`, and the union of those intervals is the only
//! thing that matters for the pair. Branching on one merged interval is the
//! same as fixing the orientation of every segment pair inside it.
//!
//! Lower bound at a node, all terms valid for every completion of the node:
//! * longest head-plus-tail path, and the average robot load;
//! * Jackson's preemptive one-machine bound over groups of tasks that must
//!   not start together (pairwise conflict at zero offset), and over the
//!   tasks already sharing a robot;
//! * importance-weighted completion at the heads;
//! * robots already used, or the minimum count the budgets force.

use std::collections::VecDeque;
use std::time::Instant;

use crate::instance::{MissionInstance, RobotSpec};
use crate::model::Variant;

use super::{combine, evaluate_objective, infeasibility_certificate, Limits, Schedule, SolveReport, Status, GAP_TOLERANCE};

const EPS: f64 = 1e-9;
/// A start offset must sit this far inside a forbidden interval to count as violating it.
const VIOLATION_EPS: f64 = 1e-7;

/// Forbidden start offsets `S_b - S_a` for one conflicting task pair, as
/// sorted disjoint open intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct PairWindows {
    pub a: usize,
    pub b: usize,
    pub forbidden: Vec<(f64, f64)>,
}

impl PairWindows {
    /// Merges the segment-level conflict windows of every conflicting task pair.
    pub fn build(instance: &MissionInstance) -> Vec<PairWindows> {
        let v = instance.params.v_ex;
        let delta = instance.params.fifo_buffer;
        instance
            .conflicts
            .task_pairs()
            .into_iter()
            .filter_map(|(a, b)| {
                let pa = &instance.tasks[a].path;
                let pb = &instance.tasks[b].path;
                let mut windows: Vec<(f64, f64)> = instance
                    .conflicts
                    .between(a, b)
                    .iter()
                    .map(|cp| {
                        let (ea, xa) = (pa.entry_length(cp.seg_a) / v, pa.cumulative_lengths()[cp.seg_a] / v);
                        let (eb, xb) = (pb.entry_length(cp.seg_b) / v, pb.cumulative_lengths()[cp.seg_b] / v);
                        // a first: S_a + xa + delta <= S_b + eb; b first: S_b + xb + delta <= S_a + ea.
                        (ea - xb - delta, xa + delta - eb)
                    })
                    .filter(|(lo, hi)| lo < hi)
                    .collect();
                windows.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
                let mut forbidden: Vec<(f64, f64)> = Vec::with_capacity(windows.len());
                for (lo, hi) in windows {
                    match forbidden.last_mut() {
                        Some(last) if lo < last.1 => last.1 = last.1.max(hi),
                        _ => forbidden.push((lo, hi)),
                    }
                }
                (!forbidden.is_empty()).then_some(PairWindows { a, b, forbidden })
            })
            .collect()
    }

    /// The forbidden interval strictly containing `delta`, if any.
    pub fn violated(&self, delta: f64) -> Option<(f64, f64)> {
        let i = self.forbidden.partition_point(|&(lo, _)| lo < delta);
        if i == 0 {
            return None;
        }
        let (lo, hi) = self.forbidden[i - 1];
        (delta > lo + VIOLATION_EPS && delta < hi - VIOLATION_EPS).then_some((lo, hi))
    }

    /// The forbidden interval around a zero offset, when simultaneous starts conflict.
    fn central(&self) -> Option<(f64, f64)> {
        self.forbidden.iter().copied().find(|&(lo, hi)| lo < 0.0 && 0.0 < hi)
    }
}

/// Tasks that pairwise cannot start together, with the smallest separation
/// each member needs before any other member may start after it.
#[derive(Debug, Clone)]
struct Group {
    members: Vec<usize>,
    sep: Vec<f64>,
}

struct Problem {
    n: usize,
    m: usize,
    fleet: Vec<RobotSpec>,
    occ: Vec<f64>,
    volume: Vec<f64>,
    alpha: Vec<f64>,
    variant: Variant,
    gains: (f64, f64, f64),
    prec: Vec<(usize, usize, f64)>,
    pairs: Vec<PairWindows>,
    groups: Vec<Group>,
    branch_order: Vec<usize>,
    robot_class: Vec<usize>,
    min_robots: usize,
    total_occ: f64,
}

fn min_robots_for(mut values: Vec<f64>, need: f64) -> usize {
    values.sort_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    for (k, v) in values.iter().enumerate() {
        acc += v;
        if acc + EPS >= need {
            return k + 1;
        }
    }
    values.len()
}

impl Problem {
    fn new(instance: &MissionInstance, m: usize, variant: Variant) -> Self {
        let n = instance.task_count();
        let p = instance.params;
        let fleet = instance.fleet(m);
        let occ: Vec<f64> = instance.tasks.iter().map(|t| p.occupancy(t.duration)).collect();
        let volume: Vec<f64> = instance.tasks.iter().map(|t| t.volume).collect();
        let alpha = instance.importance();
        let prec = instance.deps.edges().iter().map(|&(i, j)| (i, j, instance.tasks[i].duration)).collect();
        let pairs = PairWindows::build(instance);
        let groups = build_groups(n, &pairs, &instance.durations());

        let mut branch_order: Vec<usize> = (0..n).collect();
        branch_order.sort_by(|&a, &b| alpha[b].total_cmp(&alpha[a]).then(a.cmp(&b)));

        let mut robot_class = vec![0; m];
        for k in 0..m {
            robot_class[k] = (0..k)
                .find(|&j| fleet[j].capacity == fleet[k].capacity && fleet[j].battery_time == fleet[k].battery_time)
                .map_or(k, |j| robot_class[j]);
        }
        let total_occ: f64 = occ.iter().sum();
        let min_robots = min_robots_for(fleet.iter().map(|r| r.capacity).collect(), volume.iter().sum())
            .max(min_robots_for(fleet.iter().map(|r| r.battery_time).collect(), total_occ))
            .max(1);

        Self {
            n,
            m,
            fleet,
            occ,
            volume,
            alpha,
            variant,
            gains: (p.g_ms, p.g_im, p.g_ut),
            prec,
            pairs,
            groups,
            branch_order,
            robot_class,
            min_robots,
            total_occ,
        }
    }

    fn combine(&self, j_ms: f64, j_im: f64, j_ut: f64) -> f64 {
        combine(self.gains.0, self.gains.1, self.gains.2, self.variant, j_ms, j_im, j_ut)
    }
}

/// Greedy maximal groups of mutually exclusive tasks, one seeded at every task.
fn build_groups(n: usize, pairs: &[PairWindows], durations: &[f64]) -> Vec<Group> {
    let mut sep = vec![vec![f64::NAN; n]; n];
    for pw in pairs {
        if let Some((lo, hi)) = pw.central() {
            sep[pw.a][pw.b] = hi;
            sep[pw.b][pw.a] = -lo;
        }
    }
    let adjacent = |i: usize, j: usize| !sep[i][j].is_nan();
    let mut by_length: Vec<usize> = (0..n).collect();
    by_length.sort_by(|&a, &b| durations[b].total_cmp(&durations[a]).then(a.cmp(&b)));

    let mut seen: Vec<Vec<usize>> = Vec::new();
    let mut groups = Vec::new();
    for seed in 0..n {
        let mut members = vec![seed];
        for &c in &by_length {
            if c != seed && members.iter().all(|&x| adjacent(x, c)) {
                members.push(c);
            }
        }
        if members.len() < 2 {
            continue;
        }
        members.sort_unstable();
        if seen.contains(&members) {
            continue;
        }
        seen.push(members.clone());
        let sep_of = members
            .iter()
            .map(|&i| members.iter().filter(|&&j| j != i).map(|&j| sep[i][j]).fold(f64::INFINITY, f64::min))
            .collect();
        groups.push(Group { members, sep: sep_of });
    }
    groups
}

/// Jackson's preemptive schedule: lower bound on `max_j (C_j + q_j)` for one
/// machine with release `r`, processing `p` and delivery `q`.
fn preemptive_bound(jobs: &mut [(f64, f64, f64)]) -> f64 {
    jobs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut ready: Vec<(f64, f64)> = Vec::with_capacity(jobs.len());
    let mut next = 0;
    let mut t = f64::NEG_INFINITY;
    let mut best = f64::NEG_INFINITY;
    loop {
        if ready.is_empty() {
            if next == jobs.len() {
                return best;
            }
            t = t.max(jobs[next].0);
        }
        while next < jobs.len() && jobs[next].0 <= t {
            ready.push((jobs[next].2, jobs[next].1));
            next += 1;
        }
        let pick = (0..ready.len()).max_by(|&a, &b| ready[a].0.total_cmp(&ready[b].0)).expect("ready job");
        let horizon = if next < jobs.len() { jobs[next].0 } else { f64::INFINITY };
        let run = ready[pick].1.min(horizon - t);
        t += run;
        ready[pick].1 -= run;
        if ready[pick].1 <= EPS {
            best = best.max(t + ready[pick].0);
            ready.swap_remove(pick);
        }
    }
}

/// How much sequencing raises `sum alpha * start` above `sum alpha * head`
/// for jobs `(head, p, alpha)` that start in some order, each at least `p`
/// after the previous one. Smith's ratio rule from the earliest head bounds
/// the sequenced sum from below.
fn sequencing_gain(jobs: &mut [(f64, f64, f64)]) -> f64 {
    jobs.sort_by(|x, y| (x.1 * y.2).total_cmp(&(y.1 * x.2)));
    let at_heads: f64 = jobs.iter().map(|j| j.2 * j.0).sum();
    let mut t = jobs.iter().map(|j| j.0).fold(f64::INFINITY, f64::min);
    let mut smith = 0.0;
    for &(_, p, alpha) in jobs.iter() {
        smith += alpha * t;
        t += p;
    }
    (smith - at_heads).max(0.0)
}

/// As [`sequencing_gain`] for completions `start + p` on `m` parallel
/// machines, after Eastman, Even and Isaacs: the weighted completion sum is at
/// least the single-machine Smith value with every `p` divided by `m`, plus
/// `(m - 1) / (2m)` times the weighted processing.
fn parallel_gain(jobs: &mut [(f64, f64, f64)], m: usize) -> f64 {
    jobs.sort_by(|x, y| (x.1 * y.2).total_cmp(&(y.1 * x.2)));
    let at_heads: f64 = jobs.iter().map(|j| j.2 * (j.0 + j.1)).sum();
    let m = m as f64;
    let mut t = jobs.iter().map(|j| j.0).fold(f64::INFINITY, f64::min);
    let mut bound = 0.0;
    for &(_, p, alpha) in jobs.iter() {
        t += p / m;
        bound += alpha * (t + (m - 1.0) / (2.0 * m) * p);
    }
    (bound - at_heads).max(0.0)
}

struct State {
    out: Vec<Vec<(usize, f64)>>,
    inn: Vec<Vec<(usize, f64)>>,
    heads: Vec<f64>,
    tails: Vec<f64>,
    robot_of: Vec<Option<usize>>,
    tasks_on: Vec<Vec<usize>>,
    queue: VecDeque<usize>,
    queued: Vec<bool>,
    updates: Vec<usize>,
}

impl State {
    fn new(p: &Problem) -> Self {
        Self {
            out: vec![Vec::new(); p.n],
            inn: vec![Vec::new(); p.n],
            heads: vec![0.0; p.n],
            tails: p.occ.clone(),
            robot_of: vec![None; p.n],
            tasks_on: vec![Vec::new(); p.m],
            queue: VecDeque::new(),
            queued: vec![false; p.n],
            updates: vec![0; p.n],
        }
    }

    /// Adds `S_v >= S_u + w`; `false` when it closes a positive cycle.
    /// The caller restores heads and tails on undo.
    fn add_arc(&mut self, u: usize, v: usize, w: f64) -> bool {
        self.out[u].push((v, w));
        self.inn[v].push((u, w));
        self.propagate(u, v, w, true) && self.propagate(v, u, w, false)
    }

    fn remove_arc(&mut self, u: usize, v: usize) {
        let popped = self.out[u].pop();
        debug_assert_eq!(popped.map(|e| e.0), Some(v));
        self.inn[v].pop();
    }

    /// Longest-path relaxation from the endpoint of a new arc, forward on
    /// heads or backward on tails.
    fn propagate(&mut self, from: usize, to: usize, w: f64, forward: bool) -> bool {
        let n = self.heads.len();
        let (dist, adj) = if forward { (&mut self.heads, &self.out) } else { (&mut self.tails, &self.inn) };
        let cand = dist[from] + w;
        if cand <= dist[to] + EPS {
            return true;
        }
        dist[to] = cand;
        self.updates.iter_mut().for_each(|c| *c = 0);
        self.queue.clear();
        self.queue.push_back(to);
        self.queued[to] = true;
        let mut ok = true;
        while let Some(x) = self.queue.pop_front() {
            self.queued[x] = false;
            if !ok {
                continue;
            }
            for &(y, w) in &adj[x] {
                let cand = dist[x] + w;
                if cand > dist[y] + EPS {
                    dist[y] = cand;
                    self.updates[y] += 1;
                    if self.updates[y] > n {
                        ok = false;
                        break;
                    }
                    if !self.queued[y] {
                        self.queued[y] = true;
                        self.queue.push_back(y);
                    }
                }
            }
        }
        ok
    }

    fn assign(&mut self, task: usize, robot: usize) {
        self.robot_of[task] = Some(robot);
        self.tasks_on[robot].push(task);
    }

    fn unassign(&mut self, task: usize, robot: usize) {
        self.robot_of[task] = None;
        self.tasks_on[robot].pop();
    }

    fn bound(&self, p: &Problem, jobs: &mut Vec<(f64, f64, f64)>) -> f64 {
        let mut cmax = (0..p.n).map(|i| self.heads[i] + self.tails[i]).fold(0.0, f64::max);
        let min_head = self.heads.iter().copied().fold(f64::INFINITY, f64::min);
        cmax = cmax.max(min_head + p.total_occ / p.m as f64);
        for g in &p.groups {
            jobs.clear();
            jobs.extend(g.members.iter().zip(&g.sep).map(|(&i, &s)| (self.heads[i], s, self.tails[i] - s)));
            cmax = cmax.max(preemptive_bound(jobs));
        }
        for tasks in &self.tasks_on {
            if tasks.len() >= 2 {
                jobs.clear();
                jobs.extend(tasks.iter().map(|&i| (self.heads[i], p.occ[i], self.tails[i] - p.occ[i])));
                cmax = cmax.max(preemptive_bound(jobs));
            }
        }
        let j_im = if p.variant.has_importance() {
            let at_heads: f64 = (0..p.n).map(|i| p.alpha[i] * (self.heads[i] + p.occ[i])).sum();
            // Robots hold disjoint task sets, so their gains add up; groups may overlap.
            let mut robots_gain = 0.0;
            for tasks in &self.tasks_on {
                if tasks.len() >= 2 {
                    jobs.clear();
                    jobs.extend(tasks.iter().map(|&i| (self.heads[i], p.occ[i], p.alpha[i])));
                    robots_gain += sequencing_gain(jobs);
                }
            }
            let mut group_gain: f64 = 0.0;
            for g in &p.groups {
                jobs.clear();
                jobs.extend(g.members.iter().zip(&g.sep).map(|(&i, &s)| (self.heads[i], s, p.alpha[i])));
                group_gain = group_gain.max(sequencing_gain(jobs));
            }
            jobs.clear();
            jobs.extend((0..p.n).map(|i| (self.heads[i], p.occ[i], p.alpha[i])));
            let fleet_gain = parallel_gain(jobs, p.m);
            at_heads + robots_gain.max(group_gain).max(fleet_gain)
        } else {
            0.0
        };
        let used = self.tasks_on.iter().filter(|t| !t.is_empty()).count().max(p.min_robots);
        p.combine(cmax, j_im, used as f64)
    }

    /// Earliest violated disjunction: `(u, v, w)` arc pairs of its two sides.
    fn pick_violation(&self, p: &Problem) -> Option<[(usize, usize, f64); 2]> {
        let mut best: Option<((f64, f64), [(usize, usize, f64); 2])> = None;
        let mut consider = |key: (f64, f64), sides: [(usize, usize, f64); 2]| {
            if best.as_ref().is_none_or(|(k, _)| key.0 < k.0 || (key.0 == k.0 && key.1 > k.1)) {
                best = Some((key, sides));
            }
        };
        for pw in &p.pairs {
            let delta = self.heads[pw.b] - self.heads[pw.a];
            if let Some((lo, hi)) = pw.violated(delta) {
                let key = (self.heads[pw.a].min(self.heads[pw.b]), (delta - lo).min(hi - delta));
                consider(key, [(pw.a, pw.b, hi), (pw.b, pw.a, -lo)]);
            }
        }
        for tasks in &self.tasks_on {
            for (x, &i) in tasks.iter().enumerate() {
                for &j in &tasks[x + 1..] {
                    let (si, sj) = (self.heads[i], self.heads[j]);
                    let overlap = (si + p.occ[i]).min(sj + p.occ[j]) - si.max(sj);
                    if overlap > VIOLATION_EPS {
                        consider((si.min(sj), overlap), [(i, j, p.occ[i]), (j, i, p.occ[j])]);
                    }
                }
            }
        }
        best.map(|(_, sides)| sides)
    }
}

struct Search<'a> {
    p: &'a Problem,
    state: State,
    incumbent: f64,
    best: Option<(Vec<usize>, Vec<f64>)>,
    nodes: u64,
    deadline: Instant,
    timed_out: bool,
    open_bound: f64,
    jobs: Vec<(f64, f64, f64)>,
}

enum Child {
    Arc(usize, usize, f64),
    Assign(usize, usize),
}

impl Search<'_> {
    fn prunable(&self, lb: f64) -> bool {
        lb >= self.incumbent - GAP_TOLERANCE
    }

    fn apply(&mut self, child: &Child) -> bool {
        match *child {
            Child::Arc(u, v, w) => self.state.add_arc(u, v, w),
            Child::Assign(task, robot) => {
                self.state.assign(task, robot);
                true
            }
        }
    }

    fn undo(&mut self, child: &Child, saved: &(Vec<f64>, Vec<f64>)) {
        match *child {
            Child::Arc(u, v, _) => {
                self.state.remove_arc(u, v);
                self.state.heads.copy_from_slice(&saved.0);
                self.state.tails.copy_from_slice(&saved.1);
            }
            Child::Assign(task, robot) => self.state.unassign(task, robot),
        }
    }

    /// Robots that can still take `task`, one per class of identical unused robots.
    fn candidates(&self, task: usize) -> Vec<usize> {
        let p = self.p;
        (0..p.m)
            .filter(|&k| {
                let unused = self.state.tasks_on[k].is_empty();
                if unused && (0..k).any(|j| p.robot_class[j] == p.robot_class[k] && self.state.tasks_on[j].is_empty()) {
                    return false;
                }
                // Summed in id order so the budget test matches an independent check bit for bit.
                let mut mine = self.state.tasks_on[k].clone();
                mine.push(task);
                mine.sort_unstable();
                let material = mine.iter().fold(0.0, |acc, &i| acc + p.volume[i]);
                let flight = mine.iter().fold(0.0, |acc, &i| acc + p.occ[i]);
                material <= p.fleet[k].capacity && flight <= p.fleet[k].battery_time
            })
            .collect()
    }

    /// Forced assignments come first, then violated disjunctions, then the
    /// most important unassigned task. `None` at a leaf.
    fn children(&self) -> Option<Vec<Child>> {
        let p = self.p;
        let mut next = None;
        for &task in p.branch_order.iter().filter(|&&t| self.state.robot_of[t].is_none()) {
            let robots = self.candidates(task);
            if robots.len() <= 1 {
                return Some(robots.into_iter().map(|k| Child::Assign(task, k)).collect());
            }
            next.get_or_insert((task, robots));
        }
        if let Some(sides) = self.state.pick_violation(p) {
            return Some(sides.iter().map(|&(u, v, w)| Child::Arc(u, v, w)).collect());
        }
        let (task, robots) = next?;
        Some(robots.into_iter().map(|k| Child::Assign(task, k)).collect())
    }

    fn leaf(&mut self) {
        let p = self.p;
        let makespan = (0..p.n).map(|i| self.state.heads[i] + p.occ[i]).fold(0.0, f64::max);
        let j_im: f64 = (0..p.n).map(|i| p.alpha[i] * (self.state.heads[i] + p.occ[i])).sum();
        let used = self.state.tasks_on.iter().filter(|t| !t.is_empty()).count();
        let value = p.combine(makespan, j_im, used as f64);
        if value < self.incumbent - EPS {
            self.incumbent = value;
            let robots = self.state.robot_of.iter().map(|r| r.expect("leaf is fully assigned")).collect();
            self.best = Some((robots, self.state.heads.clone()));
            log::debug!("incumbent {value:.6} after {} nodes", self.nodes);
        }
    }

    /// Explores the current node; `false` if interrupted by the deadline.
    fn dfs(&mut self, lb: f64) -> bool {
        self.nodes += 1;
        if self.nodes.is_multiple_of(256) && Instant::now() >= self.deadline {
            self.timed_out = true;
        }
        if self.timed_out {
            self.open_bound = self.open_bound.min(lb);
            return false;
        }
        if self.prunable(lb) {
            return true;
        }
        let Some(children) = self.children() else {
            self.leaf();
            return true;
        };

        let saved = (self.state.heads.clone(), self.state.tails.clone());
        let mut scored: Vec<(f64, usize)> = Vec::with_capacity(children.len());
        for (idx, child) in children.iter().enumerate() {
            if self.apply(child) {
                let child_lb = self.state.bound(self.p, &mut self.jobs).max(lb);
                scored.push((child_lb, idx));
            }
            self.undo(child, &saved);
        }
        scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        for (pos, &(child_lb, idx)) in scored.iter().enumerate() {
            if self.prunable(child_lb) {
                continue;
            }
            let child = &children[idx];
            let feasible = self.apply(child);
            debug_assert!(feasible);
            let complete = self.dfs(child_lb);
            self.undo(child, &saved);
            if !complete {
                for &(rest, _) in &scored[pos + 1..] {
                    self.open_bound = self.open_bound.min(rest);
                }
                return false;
            }
        }
        true
    }
}

pub(super) fn solve(instance: &MissionInstance, m: usize, variant: Variant, limits: &Limits) -> SolveReport {
    let started = Instant::now();
    let report = |status, objective, best_bound, nodes, schedule, certificate| SolveReport {
        status,
        variant,
        robots: m,
        objective,
        best_bound,
        nodes,
        wall_time: started.elapsed(),
        schedule,
        certificate,
    };
    if m == 0 {
        return report(Status::Infeasible, None, f64::INFINITY, 0, None, Some("no robots".into()));
    }
    let fleet = instance.fleet(m);
    if let Some(reason) = infeasibility_certificate(instance, &fleet) {
        return report(Status::Infeasible, None, f64::INFINITY, 0, None, Some(reason));
    }

    let problem = Problem::new(instance, m, variant);
    let mut state = State::new(&problem);
    for &(i, j, w) in &problem.prec {
        let ok = state.add_arc(i, j, w);
        debug_assert!(ok, "dependency graph is acyclic");
    }
    let mut search = Search {
        p: &problem,
        state,
        incumbent: f64::INFINITY,
        best: None,
        nodes: 0,
        deadline: started + limits.time_limit,
        timed_out: false,
        open_bound: f64::INFINITY,
        jobs: Vec::new(),
    };
    let root_lb = search.state.bound(&problem, &mut search.jobs);
    let complete = search.dfs(root_lb);
    let nodes = search.nodes;
    let incumbent = search.incumbent;
    let open_bound = search.open_bound;

    match search.best {
        Some((robot_of, start)) => {
            let schedule = Schedule::new(instance, m, robot_of, start);
            let objective = evaluate_objective(instance, variant, &schedule);
            let (status, bound) = if complete {
                (Status::Optimal, objective.total.min(incumbent))
            } else {
                (Status::FeasibleTimeout, open_bound.min(incumbent))
            };
            report(status, Some(objective), bound, nodes, Some(schedule), None)
        }
        None if complete => {
            report(Status::Infeasible, None, f64::INFINITY, nodes, None, Some("search tree exhausted".into()))
        }
        None => report(Status::Timeout, None, open_bound, nodes, None, None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jackson_bound_single_job() {
        let mut jobs = vec![(5.0, 10.0, 3.0)];
        assert_eq!(preemptive_bound(&mut jobs), 18.0);
    }

    #[test]
    fn jackson_bound_preempts_for_longer_tail() {
        // Job A released at 0 (p=10, q=0); job B released at 2 (p=3, q=20).
        // JPS: A runs 0-2, B runs 2-5 (5+20=25), A resumes 5-13.
        let mut jobs = vec![(0.0, 10.0, 0.0), (2.0, 3.0, 20.0)];
        assert_eq!(preemptive_bound(&mut jobs), 25.0);
    }

    #[test]
    fn jackson_bound_idle_gap() {
        let mut jobs = vec![(0.0, 1.0, 0.0), (10.0, 1.0, 0.0)];
        assert_eq!(preemptive_bound(&mut jobs), 11.0);
    }

    #[test]
    fn windows_merge_and_lookup() {
        let pw = PairWindows { a: 0, b: 1, forbidden: vec![(-5.0, 2.0), (4.0, 9.0)] };
        assert_eq!(pw.violated(0.0), Some((-5.0, 2.0)));
        assert_eq!(pw.violated(3.0), None);
        assert_eq!(pw.violated(2.0), None);
        assert_eq!(pw.violated(8.0), Some((4.0, 9.0)));
        assert_eq!(pw.violated(-7.0), None);
        assert_eq!(pw.central(), Some((-5.0, 2.0)));
    }

    #[test]
    fn sequencing_gain_follows_ratio_rule() {
        // Ratios 4 and 1: the second job goes first, the first starts at 1.
        let mut jobs = vec![(0.0, 4.0, 1.0), (0.0, 1.0, 1.0)];
        assert_eq!(sequencing_gain(&mut jobs), 1.0);
        // Zero weights sort last and contribute nothing.
        let mut jobs = vec![(0.0, 2.0, 0.0), (0.0, 3.0, 2.0)];
        assert_eq!(sequencing_gain(&mut jobs), 0.0);
        // Heads already spread the jobs out.
        let mut jobs = vec![(0.0, 1.0, 1.0), (5.0, 1.0, 1.0)];
        assert_eq!(sequencing_gain(&mut jobs), 0.0);
    }

    #[test]
    fn parallel_gain_single_machine_is_smith() {
        let mut jobs = vec![(0.0, 4.0, 1.0), (0.0, 1.0, 1.0)];
        // Completions 1 and 5 against 4 + 1 at the heads.
        assert_eq!(parallel_gain(&mut jobs, 1), 1.0);
        // Two machines: both finish at their own length.
        let mut jobs = vec![(0.0, 4.0, 1.0), (0.0, 1.0, 1.0)];
        assert_eq!(parallel_gain(&mut jobs, 2), 0.0);
    }

    #[test]
    fn min_robot_count() {
        assert_eq!(min_robots_for(vec![5.0, 5.0, 5.0], 11.0), 3);
        assert_eq!(min_robots_for(vec![5.0, 5.0, 5.0], 10.0), 2);
        assert_eq!(min_robots_for(vec![5.0, 5.0, 5.0], 0.5), 1);
    }
}
