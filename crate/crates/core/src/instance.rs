//! Mission data model: tasks, fleet, dependency graph and global parameters.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{detect_conflicts, ConflictGraph, ConflictSet, Point3, PrintPath};

/// Global mission parameters. Defaults are the reference values used for the
/// rectangle mission: 15 s logistics windows, 0.1 m/s printing speed, 1 m
/// clearance, beta 0.5 and gains (1, 0.07, 100).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MissionParams {
    pub tau_log_s: f64,
    pub tau_log_e: f64,
    pub v_ex: f64,
    pub r_c: f64,
    pub beta: f64,
    pub g_ms: f64,
    pub g_im: f64,
    pub g_ut: f64,
    /// Extra separation between a segment exit and the next entry of a
    /// conflicting segment, in seconds.
    pub fifo_buffer: f64,
}

impl Default for MissionParams {
    fn default() -> Self {
        Self {
            tau_log_s: 15.0,
            tau_log_e: 15.0,
            v_ex: 0.1,
            r_c: 1.0,
            beta: 0.5,
            g_ms: 1.0,
            g_im: 0.07,
            g_ut: 100.0,
            fifo_buffer: 0.0,
        }
    }
}

impl MissionParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("params.v_ex", self.v_ex),
            ("params.r_c", self.r_c),
            ("params.beta", self.beta),
        ];
        for (field, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(schema(field, format!("must be strictly positive, got {v}")));
            }
        }
        let non_negative = [
            ("params.tau_log_s", self.tau_log_s),
            ("params.tau_log_e", self.tau_log_e),
            ("params.g_ms", self.g_ms),
            ("params.g_im", self.g_im),
            ("params.g_ut", self.g_ut),
            ("params.fifo_buffer", self.fifo_buffer),
        ];
        for (field, v) in non_negative {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(schema(field, format!("must be non-negative, got {v}")));
            }
        }
        Ok(())
    }

    /// Time a robot is airborne for a task of printing duration `d`.
    pub fn occupancy(&self, d: f64) -> f64 {
        self.tau_log_s + d + self.tau_log_e
    }
}

fn schema(field: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::Schema { field: field.into(), reason: reason.into() }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub id: usize,
    pub path: PrintPath,
    /// Material volume in liters.
    pub volume: f64,
    /// Printing duration in seconds, always `path length / v_ex`.
    pub duration: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotSpec {
    pub id: usize,
    /// Material capacity in liters.
    #[serde(rename = "capacity_l")]
    pub capacity: f64,
    /// Remaining flight time in seconds.
    #[serde(rename = "battery_s")]
    pub battery_time: f64,
}

/// Directed acyclic graph; an edge `(i, j)` means task `i` finishes printing
/// before task `j` starts printing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    preds: Vec<Vec<usize>>,
    succs: Vec<Vec<usize>>,
}

impl DependencyGraph {
    /// Builds the graph, rejecting unknown nodes, self loops, duplicates and cycles.
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut preds = vec![Vec::new(); n];
        let mut succs = vec![Vec::new(); n];
        for &(i, j) in &edges {
            if i >= n || j >= n {
                return Err(schema("dependencies", format!("edge ({i}, {j}) references an unknown task")));
            }
            if i == j {
                return Err(Error::DependencyCycle(i));
            }
            if !seen.insert((i, j)) {
                return Err(schema("dependencies", format!("duplicate edge ({i}, {j})")));
            }
            preds[j].push(i);
            succs[i].push(j);
        }
        let g = Self { n, edges, preds, succs };
        g.topological_order()?;
        Ok(g)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn predecessors(&self, node: usize) -> &[usize] {
        &self.preds[node]
    }

    pub fn successors(&self, node: usize) -> &[usize] {
        &self.succs[node]
    }

    pub fn in_degree(&self, node: usize) -> Result<usize> {
        self.preds.get(node).map(Vec::len).ok_or(Error::UnknownTask(node))
    }

    /// Kahn's algorithm; ties resolved by lowest id.
    pub fn topological_order(&self) -> Result<Vec<usize>> {
        let mut indeg: Vec<usize> = self.preds.iter().map(Vec::len).collect();
        let mut ready: BTreeSet<usize> = (0..self.n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(self.n);
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for &w in &self.succs[v] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    ready.insert(w);
                }
            }
        }
        if order.len() < self.n {
            let stuck = (0..self.n).find(|&v| indeg[v] > 0).unwrap_or(0);
            return Err(Error::DependencyCycle(stuck));
        }
        Ok(order)
    }

    /// Second-order in-degree of every node:
    /// `alpha_i = indeg(i) + beta * sum(indeg(u) for u in direct predecessors of i)`.
    pub fn importance(&self, beta: f64) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let first = self.preds[i].len() as f64;
                let second: usize = self.preds[i].iter().map(|&u| self.preds[u].len()).sum();
                first + beta * second as f64
            })
            .collect()
    }
}

/// A full scheduling input with derived durations and the cached conflict set.
#[derive(Debug, Clone)]
pub struct MissionInstance {
    pub tasks: Vec<Task>,
    pub robots: Vec<RobotSpec>,
    pub params: MissionParams,
    pub deps: DependencyGraph,
    pub conflicts: ConflictSet,
    pub conflict_graph: ConflictGraph,
}

/// Geometry and material of one task before durations are derived.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskSpec {
    pub path: PrintPath,
    pub volume: f64,
}

impl MissionInstance {
    /// Assembles an instance; task and robot ids are their positions.
    pub fn new(
        tasks: Vec<TaskSpec>,
        robots: Vec<(f64, f64)>,
        edges: Vec<(usize, usize)>,
        params: MissionParams,
    ) -> Result<Self> {
        params.validate()?;
        if tasks.is_empty() {
            return Err(Error::EmptyTaskSet);
        }
        if robots.is_empty() {
            return Err(schema("robots", "at least one robot is required"));
        }
        for (k, &(capacity, battery)) in robots.iter().enumerate() {
            if !(capacity > 0.0) || !capacity.is_finite() {
                return Err(schema(format!("robots[{k}].capacity_l"), format!("must be positive, got {capacity}")));
            }
            if !(battery > 0.0) || !battery.is_finite() {
                return Err(schema(format!("robots[{k}].battery_s"), format!("must be positive, got {battery}")));
            }
        }
        for (i, t) in tasks.iter().enumerate() {
            if !(t.volume > 0.0) || !t.volume.is_finite() {
                return Err(schema(format!("tasks[{i}].volume_l"), format!("must be positive, got {}", t.volume)));
            }
        }
        let deps = DependencyGraph::new(tasks.len(), edges)?;
        let paths: Vec<PrintPath> = tasks.iter().map(|t| t.path.clone()).collect();
        let conflicts = detect_conflicts(&paths, params.r_c)?;
        let conflict_graph = ConflictGraph::from_conflicts(&paths, &conflicts);
        let tasks = tasks
            .into_iter()
            .enumerate()
            .map(|(id, t)| Task { id, duration: t.path.total_length() / params.v_ex, path: t.path, volume: t.volume })
            .collect();
        let robots = robots
            .into_iter()
            .enumerate()
            .map(|(id, (capacity, battery_time))| RobotSpec { id, capacity, battery_time })
            .collect();
        Ok(Self { tasks, robots, params, deps, conflicts, conflict_graph })
    }

    /// Same tasks and fleet with different parameters; durations and
    /// conflicts are recomputed.
    pub fn with_params(&self, params: MissionParams) -> Result<Self> {
        Self::new(
            self.tasks.iter().map(|t| TaskSpec { path: t.path.clone(), volume: t.volume }).collect(),
            self.robots.iter().map(|r| (r.capacity, r.battery_time)).collect(),
            self.deps.edges().to_vec(),
            params,
        )
    }

    pub fn task_count(&self) -> usize {
        self.tasks.len()
    }

    pub fn durations(&self) -> Vec<f64> {
        self.tasks.iter().map(|t| t.duration).collect()
    }

    pub fn importance(&self) -> Vec<f64> {
        self.deps.importance(self.params.beta)
    }

    /// The first `m` robots of the fleet. Missing robots are filled in as
    /// copies of the last listed robot (the fleet is homogeneous).
    pub fn fleet(&self, m: usize) -> Vec<RobotSpec> {
        let last = *self.robots.last().expect("instance has robots");
        (0..m)
            .map(|k| self.robots.get(k).copied().unwrap_or(RobotSpec { id: k, ..last }))
            .collect()
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MissionFile {
    #[serde(default)]
    params: MissionParams,
    robots: Vec<RobotSpec>,
    tasks: Vec<TaskRecord>,
    #[serde(default)]
    dependencies: Vec<(usize, usize)>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TaskRecord {
    id: usize,
    volume_l: f64,
    waypoints: Vec<Point3>,
}

fn check_dense_ids(field: &str, mut ids: Vec<usize>) -> Result<Vec<usize>> {
    let original = ids.clone();
    ids.sort_unstable();
    for (pos, w) in ids.windows(2).enumerate() {
        if w[0] == w[1] {
            return Err(schema(format!("{field}[{pos}].id"), format!("duplicate id {}", w[0])));
        }
    }
    if let Some((expected, &got)) = ids.iter().enumerate().find(|(e, &g)| *e != g) {
        return Err(schema(field.to_string(), format!("ids must be dense 0..{}; missing {expected}, found {got}", ids.len())));
    }
    Ok(original)
}

/// Parses a mission document. Durations and conflicts are recomputed.
pub fn load_instance(text: &str) -> Result<MissionInstance> {
    let file: MissionFile = serde_json::from_str(text)?;
    let robot_order = check_dense_ids("robots", file.robots.iter().map(|r| r.id).collect())?;
    let task_order = check_dense_ids("tasks", file.tasks.iter().map(|t| t.id).collect())?;

    let mut robots = vec![(0.0, 0.0); robot_order.len()];
    for r in &file.robots {
        robots[r.id] = (r.capacity, r.battery_time);
    }
    let mut tasks: Vec<Option<TaskSpec>> = vec![None; task_order.len()];
    for (pos, t) in file.tasks.into_iter().enumerate() {
        let path = PrintPath::new(t.waypoints)
            .map_err(|e| schema(format!("tasks[{pos}].waypoints"), e.to_string()))?;
        tasks[t.id] = Some(TaskSpec { path, volume: t.volume_l });
    }
    MissionInstance::new(tasks.into_iter().map(Option::unwrap).collect(), robots, file.dependencies, file.params)
}

/// Serializes to the mission document format.
pub fn save_instance(instance: &MissionInstance) -> String {
    let file = MissionFile {
        params: instance.params,
        robots: instance.robots.clone(),
        tasks: instance
            .tasks
            .iter()
            .map(|t| TaskRecord { id: t.id, volume_l: t.volume, waypoints: t.path.waypoints().to_vec() })
            .collect(),
        dependencies: instance.deps.edges().to_vec(),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("mission serializes");
    text.push('\n');
    text
}

/// Configuration of the synthetic box chunker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectConfig {
    /// Box size (x, y, z) in meters.
    pub size: [f64; 3],
    /// Chunk counts along x, y, z.
    pub grid: [usize; 3],
    /// Target spacing of raster lines inside a layer.
    pub raster_spacing: f64,
    /// Target layer height.
    pub layer_height: f64,
    /// Ratio of printed foam volume to the liquid volume carried.
    pub expansion_factor: f64,
    pub robots: usize,
    /// Per-robot capacity in liters; `None` lets every robot carry the whole mission.
    pub capacity: Option<f64>,
    /// Per-robot battery time; `None` lets every robot fly the whole mission alone.
    pub battery: Option<f64>,
}

impl Default for RectConfig {
    fn default() -> Self {
        Self {
            size: [2.0, 2.0, 0.5],
            grid: [3, 3, 2],
            raster_spacing: 0.1,
            layer_height: 0.125,
            expansion_factor: 10.0,
            robots: 6,
            capacity: None,
            battery: None,
        }
    }
}

impl RectConfig {
    pub fn new(size: [f64; 3], grid: [usize; 3]) -> Self {
        Self { size, grid, ..Self::default() }
    }
}

/// Boustrophedon raster over one chunk: lines along x, one sweep per layer.
/// Consecutive layers are traversed in reverse so the path stays continuous.
fn chunk_path(lo: [f64; 3], hi: [f64; 3], spacing: f64, layer_height: f64) -> Result<PrintPath> {
    let ext = [hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]];
    let lines = ((ext[1] / spacing).round() as usize).max(1);
    let layers = ((ext[2] / layer_height).round() as usize).max(1);
    let inset = (spacing / 2.0).min(ext[0] / 4.0);
    let (x0, x1) = (lo[0] + inset, hi[0] - inset);
    let mut points = Vec::with_capacity(2 * lines * layers);
    for l in 0..layers {
        let z = lo[2] + (l as f64 + 0.5) * ext[2] / layers as f64;
        let mut layer = Vec::with_capacity(2 * lines);
        for r in 0..lines {
            let y = lo[1] + (r as f64 + 0.5) * ext[1] / lines as f64;
            let (from, to) = if r % 2 == 0 { (x0, x1) } else { (x1, x0) };
            layer.push(Point3::new(from, y, z));
            layer.push(Point3::new(to, y, z));
        }
        if l % 2 == 1 {
            layer.reverse();
        }
        points.extend(layer);
    }
    PrintPath::new(points)
}

/// Tiles a box into `nx * ny * nz` chunks and builds a raster task for each.
///
/// Chunk `(ix, iy, iz)` gets id `iz * nx * ny + iy * nx + ix`. Every chunk
/// depends on the chunk directly below it and on its face-adjacent neighbors
/// of the same level with a lower id.
pub fn generate_rect_instance(config: &RectConfig, params: MissionParams) -> Result<MissionInstance> {
    let RectConfig { size, grid, raster_spacing, layer_height, expansion_factor, robots, .. } = *config;
    for (axis, s) in ["width", "length", "height"].into_iter().zip(size) {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::InvalidParameter { name: "size", reason: format!("{axis} must be positive, got {s}") });
        }
    }
    if grid.contains(&0) {
        return Err(Error::InvalidParameter { name: "grid", reason: format!("chunk counts must be >= 1, got {grid:?}") });
    }
    for (name, v) in [("raster_spacing", raster_spacing), ("layer_height", layer_height), ("expansion_factor", expansion_factor)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidParameter { name, reason: format!("must be positive, got {v}") });
        }
    }
    if robots == 0 {
        return Err(Error::InvalidParameter { name: "robots", reason: "at least one robot".into() });
    }
    let [nx, ny, nz] = grid;
    let cell = [size[0] / nx as f64, size[1] / ny as f64, size[2] / nz as f64];
    let id = |ix: usize, iy: usize, iz: usize| iz * nx * ny + iy * nx + ix;

    let mut tasks = Vec::with_capacity(nx * ny * nz);
    let mut edges = Vec::new();
    for iz in 0..nz {
        for iy in 0..ny {
            for ix in 0..nx {
                let lo = [ix as f64 * cell[0], iy as f64 * cell[1], iz as f64 * cell[2]];
                let hi = [lo[0] + cell[0], lo[1] + cell[1], lo[2] + cell[2]];
                let path = chunk_path(lo, hi, raster_spacing, layer_height)?;
                // m^3 -> liters, then shrink by the foam expansion.
                let volume = cell[0] * cell[1] * cell[2] * 1000.0 / expansion_factor;
                tasks.push(TaskSpec { path, volume });

                let me = id(ix, iy, iz);
                if iz > 0 {
                    edges.push((id(ix, iy, iz - 1), me));
                }
                if ix > 0 {
                    edges.push((id(ix - 1, iy, iz), me));
                }
                if iy > 0 {
                    edges.push((id(ix, iy - 1, iz), me));
                }
            }
        }
    }

    let total_volume: f64 = tasks.iter().map(|t| t.volume).sum();
    let total_occupancy: f64 =
        tasks.iter().map(|t| params.occupancy(t.path.total_length() / params.v_ex)).sum();
    let capacity = config.capacity.unwrap_or(total_volume);
    let battery = config.battery.unwrap_or(total_occupancy);
    MissionInstance::new(tasks, vec![(capacity, battery); robots], edges, params)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FindingKind {
    DependencyCycle,
    NonPositiveVolume,
    NonPositiveDuration,
    MaterialInfeasible,
    BatteryUnschedulable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Finding {
    pub kind: FindingKind,
    pub task: Option<usize>,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Necessary feasibility conditions. An empty list means none is violated.
pub fn validate_instance(instance: &MissionInstance) -> Vec<Finding> {
    let mut findings = Vec::new();
    if let Err(Error::DependencyCycle(v)) = instance.deps.topological_order() {
        findings.push(Finding {
            kind: FindingKind::DependencyCycle,
            task: Some(v),
            message: format!("dependency cycle through task {v}"),
        });
    }
    for t in &instance.tasks {
        if !(t.volume > 0.0) {
            findings.push(Finding {
                kind: FindingKind::NonPositiveVolume,
                task: Some(t.id),
                message: format!("task {}: non-positive volume {}", t.id, t.volume),
            });
        }
        if !(t.duration > 0.0) {
            findings.push(Finding {
                kind: FindingKind::NonPositiveDuration,
                task: Some(t.id),
                message: format!("task {}: non-positive duration {}", t.id, t.duration),
            });
        }
    }
    let demand: f64 = instance.tasks.iter().map(|t| t.volume).sum();
    let supply: f64 = instance.robots.iter().map(|r| r.capacity).sum();
    if demand > supply {
        findings.push(Finding {
            kind: FindingKind::MaterialInfeasible,
            task: None,
            message: format!("material infeasible: tasks need {demand} l, fleet carries {supply} l"),
        });
    }
    let best_battery = instance.robots.iter().map(|r| r.battery_time).fold(0.0, f64::max);
    for t in &instance.tasks {
        let need = instance.params.occupancy(t.duration);
        if need > best_battery {
            findings.push(Finding {
                kind: FindingKind::BatteryUnschedulable,
                task: Some(t.id),
                message: format!("task unschedulable: battery (task {} needs {need} s, best robot has {best_battery} s)", t.id),
            });
        }
    }
    findings
}
