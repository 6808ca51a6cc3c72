//! `aeroprint`: generate, plan, validate, sweep and export aerial printing missions.

mod schedule_file;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Duration;

use aeroprint::instance::{generate_rect_instance, load_instance, save_instance, MissionInstance, MissionParams, RectConfig};
use aeroprint::model::{build_model, export_lp, Variant};
use aeroprint::solver::{solve, sweep_fleet, Limits, Status};
use aeroprint::validate::{check_schedule, emit_gantt, simulate};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use schedule_file::ScheduleFile;

const EXIT_USAGE: u8 = 2;
const EXIT_TIMEOUT: u8 = 3;
const EXIT_INFEASIBLE: u8 = 4;
const EXIT_VIOLATIONS: u8 = 5;

#[derive(Parser)]
#[command(name = "aeroprint", version, about = "Safety-aware scheduling for multi-UAV aerial 3D printing")]
struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic mission.
    Gen {
        #[command(subcommand)]
        shape: Shape,
    },
    /// Solve a mission and write the schedule.
    Plan {
        mission: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value = "p1")]
        variant: Variant,
        #[arg(long, default_value = "6")]
        robots: Robots,
        #[command(flatten)]
        gains: Overrides,
        #[arg(long, default_value_t = 300.0)]
        time_limit: f64,
    },
    /// Check a schedule and simulate clearances.
    Validate {
        mission: PathBuf,
        schedule: PathBuf,
        /// Full JSON report.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 0.1)]
        dt: f64,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Solve for a range of fleet sizes and tabulate the results.
    Sweep {
        mission: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, default_value = "p1")]
        variant: Variant,
        #[arg(long, default_value = "1..8")]
        robots: Robots,
        #[command(flatten)]
        gains: Overrides,
        #[arg(long, default_value_t = 300.0)]
        time_limit: f64,
    },
    /// Write the mixed-integer model in LP format.
    ExportLp {
        mission: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, default_value = "p1")]
        variant: Variant,
        #[arg(long, default_value = "6")]
        robots: Robots,
        #[command(flatten)]
        gains: Overrides,
    },
}

#[derive(Subcommand)]
enum Shape {
    /// Rectangular box tiled into a grid of chunks.
    Rect {
        #[arg(long, num_args = 3, value_names = ["X", "Y", "Z"], default_values_t = [2.0, 2.0, 0.5])]
        size: Vec<f64>,
        #[arg(long, num_args = 3, value_names = ["NX", "NY", "NZ"], default_values_t = [3, 3, 2])]
        grid: Vec<usize>,
        #[arg(short, long)]
        output: PathBuf,
        /// Fleet size written into the mission.
        #[arg(long, default_value_t = 6)]
        fleet: usize,
        /// Per-robot material capacity in liters (default: whole mission).
        #[arg(long)]
        capacity: Option<f64>,
        /// Per-robot battery time in seconds (default: whole mission).
        #[arg(long)]
        battery: Option<f64>,
        #[arg(long, default_value_t = 0.125)]
        layer_height: f64,
        #[arg(long, default_value_t = 0.1)]
        raster_spacing: f64,
        #[command(flatten)]
        gains: Overrides,
    },
}

/// Overrides of the mission parameters.
#[derive(Args, Clone, Copy, Default)]
struct Overrides {
    #[arg(long)]
    gms: Option<f64>,
    #[arg(long)]
    gim: Option<f64>,
    #[arg(long)]
    gut: Option<f64>,
    /// FIFO buffer between conflicting segments, in seconds.
    #[arg(long)]
    delta: Option<f64>,
}

impl Overrides {
    fn apply(self, p: MissionParams) -> MissionParams {
        MissionParams {
            g_ms: self.gms.unwrap_or(p.g_ms),
            g_im: self.gim.unwrap_or(p.g_im),
            g_ut: self.gut.unwrap_or(p.g_ut),
            fifo_buffer: self.delta.unwrap_or(p.fifo_buffer),
            ..p
        }
    }

    fn is_empty(self) -> bool {
        self.gms.is_none() && self.gim.is_none() && self.gut.is_none() && self.delta.is_none()
    }
}

/// `N` or an inclusive range `A..B`.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Robots {
    Count(usize),
    Range(usize, usize),
}

impl FromStr for Robots {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("`{x}`: {e}"));
        let r = match s.split_once("..") {
            Some((a, b)) => Robots::Range(parse(a)?, parse(b)?),
            None => Robots::Count(parse(s)?),
        };
        match r {
            Robots::Count(0) | Robots::Range(0, _) => Err("robot count must be at least 1".into()),
            Robots::Range(a, b) if a > b => Err(format!("empty range {a}..{b}")),
            r => Ok(r),
        }
    }
}

impl Robots {
    fn single(self) -> Result<usize> {
        match self {
            Robots::Count(n) => Ok(n),
            Robots::Range(..) => bail!("expected a single robot count, got a range"),
        }
    }

    fn bounds(self) -> (usize, usize) {
        match self {
            Robots::Count(n) => (n, n),
            Robots::Range(a, b) => (a, b),
        }
    }
}

fn read_mission(path: &Path, overrides: Overrides) -> Result<MissionInstance> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let instance = load_instance(&text).with_context(|| format!("loading {}", path.display()))?;
    if overrides.is_empty() {
        return Ok(instance);
    }
    Ok(instance.with_params(overrides.apply(instance.params))?)
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn limits(time_limit: f64, threads: Option<usize>) -> Result<Limits> {
    if !(time_limit > 0.0) || !time_limit.is_finite() {
        bail!("--time-limit must be positive");
    }
    Ok(Limits { time_limit: Duration::from_secs_f64(time_limit), threads: threads.unwrap_or(0) })
}

fn run(cli: Cli) -> Result<u8> {
    if let Some(k) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(k).build_global().context("configuring threads")?;
    }
    match cli.command {
        Command::Gen { shape: Shape::Rect { size, grid, output, fleet, capacity, battery, layer_height, raster_spacing, gains } } => {
            let config = RectConfig {
                size: [size[0], size[1], size[2]],
                grid: [grid[0], grid[1], grid[2]],
                raster_spacing,
                layer_height,
                robots: fleet,
                capacity,
                battery,
                ..RectConfig::default()
            };
            let instance = generate_rect_instance(&config, gains.apply(MissionParams::default()))?;
            write_out(Some(&output), &save_instance(&instance))?;
            println!("wrote {} tasks, {} dependencies, {} conflict pairs", instance.task_count(), instance.deps.edges().len(), instance.conflicts.len());
            Ok(0)
        }
        Command::Plan { mission, output, variant, robots, gains, time_limit } => {
            let m = robots.single()?;
            let limits = limits(time_limit, cli.threads)?;
            let instance = read_mission(&mission, gains)?;
            let report = solve(&instance, m, variant, &limits);
            let gap = report.gap().map_or("-".into(), |g| format!("{g}"));
            println!(
                "status={} robots={m} used={} makespan_s={} objective={} bound={} gap={gap} nodes={} wall_s={:.3}",
                report.status,
                report.schedule.as_ref().map_or("-".into(), |s| s.used_robots().to_string()),
                report.makespan().map_or("-".into(), |x| x.to_string()),
                report.objective.map_or("-".into(), |o| o.total.to_string()),
                report.best_bound,
                report.nodes,
                report.wall_time.as_secs_f64()
            );
            if let Some(reason) = &report.certificate {
                println!("infeasible: {reason}");
            }
            if let (Some(schedule), Some(objective)) = (&report.schedule, report.objective) {
                let file = ScheduleFile::new(&instance, schedule, objective, variant, report.status);
                write_out(Some(&output), &file.to_json())?;
            }
            Ok(match report.status {
                Status::Optimal => 0,
                Status::FeasibleTimeout | Status::Timeout => EXIT_TIMEOUT,
                Status::Infeasible => EXIT_INFEASIBLE,
            })
        }
        Command::Validate { mission, schedule, output, dt, svg, csv } => {
            let text = std::fs::read_to_string(&schedule).with_context(|| format!("reading {}", schedule.display()))?;
            let file = ScheduleFile::from_json(&text).with_context(|| format!("loading {}", schedule.display()))?;
            let instance = read_mission(&mission, Overrides::default())?;
            let instance = if instance.params == file.params_used { instance } else { instance.with_params(file.params_used)? };
            let schedule = match file.to_schedule(&instance) {
                Ok(s) => s,
                Err(problems) => {
                    for p in problems {
                        println!("violation {p}");
                    }
                    return Ok(EXIT_VIOLATIONS);
                }
            };
            let violations = check_schedule(&instance, &schedule);
            let sim = simulate(&instance, &schedule, dt)?;
            for v in &violations {
                println!("violation {v}");
            }
            let min = sim.global_min_distance_m.map_or("none".into(), |d| d.to_string());
            println!("violations={} min_distance_m={min} makespan_s={}", violations.len(), sim.makespan_s);
            if let Some(path) = &output {
                let mut report = serde_json::to_string_pretty(&json!({ "violations": violations, "simulation": sim }))?;
                report.push('\n');
                write_out(Some(path), &report)?;
            }
            if svg.is_some() || csv.is_some() {
                let (svg_text, csv_text) = emit_gantt(&instance, &schedule);
                if let Some(p) = &svg {
                    write_out(Some(p), &svg_text)?;
                }
                if let Some(p) = &csv {
                    write_out(Some(p), &csv_text)?;
                }
            }
            Ok(if violations.is_empty() { 0 } else { EXIT_VIOLATIONS })
        }
        Command::Sweep { mission, output, variant, robots, gains, time_limit } => {
            let limits = limits(time_limit, cli.threads)?;
            let instance = read_mission(&mission, gains)?;
            let (lo, hi) = robots.bounds();
            let mut csv = String::from("M,status,makespan_s,objective,used_robots,wall_s\n");
            for entry in sweep_fleet(&instance, lo, hi, variant, &limits) {
                let r = &entry.report;
                if r.status == Status::FeasibleTimeout {
                    log::warn!("M={} timed out with gap {:?}", entry.robots, r.gap());
                }
                csv.push_str(&format!(
                    "{},{},{},{},{},{:.3}\n",
                    entry.robots,
                    r.status,
                    r.makespan().map_or(String::new(), |x| x.to_string()),
                    r.objective.map_or(String::new(), |o| o.total.to_string()),
                    r.schedule.as_ref().map_or(String::new(), |s| s.used_robots().to_string()),
                    r.wall_time.as_secs_f64()
                ));
            }
            write_out(output.as_deref(), &csv)?;
            Ok(0)
        }
        Command::ExportLp { mission, output, variant, robots, gains } => {
            let m = robots.single()?;
            let instance = read_mission(&mission, gains)?;
            let model = build_model(&instance, m, variant)?;
            write_out(output.as_deref(), &export_lp(&model))?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("AEROPRINT_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
