//! Seeded generator for the small-instance corpus shared by integration tests.
#![allow(dead_code)]

use aeroprint::geometry::{Point3, PrintPath};
use aeroprint::instance::{MissionInstance, MissionParams, TaskSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CORPUS_SIZE: usize = 36;
pub const MAX_CONFLICTS: usize = 8;

/// A small instance and the fleet size to solve it with.
pub struct Case {
    pub seed: u64,
    pub instance: MissionInstance,
    pub robots: usize,
}

fn random_path(rng: &mut ChaCha8Rng) -> PrintPath {
    let segments = rng.gen_range(1..=3);
    let mut p = Point3::new(rng.gen_range(0.0..4.0), rng.gen_range(0.0..4.0), rng.gen_range(0.0..1.0));
    let mut pts = vec![p];
    for _ in 0..segments {
        let angle: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let len = rng.gen_range(0.5..2.0);
        p = Point3::new(p.x + len * angle.cos(), p.y + len * angle.sin(), p.z);
        pts.push(p);
    }
    PrintPath::new(pts).expect("non-degenerate random path")
}

/// One corpus instance: 2 to 6 tasks, 1 to 3 robots, at most 8 conflicting segment pairs.
pub fn case(seed: u64) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let n = rng.gen_range(2..=6);
        let robots = rng.gen_range(1..=3);
        let params = MissionParams {
            tau_log_s: [0.0, 2.0, 15.0][rng.gen_range(0..3)],
            tau_log_e: [0.0, 3.0, 15.0][rng.gen_range(0..3)],
            fifo_buffer: [0.0, 0.05, 2.0][rng.gen_range(0..3)],
            ..MissionParams::default()
        };
        let tasks: Vec<TaskSpec> =
            (0..n).map(|_| TaskSpec { path: random_path(&mut rng), volume: rng.gen_range(1.0..3.0) }).collect();
        let edges = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|_| rng.gen_bool(0.2))
            .collect::<Vec<_>>();
        let volume: f64 = tasks.iter().map(|t| t.volume).sum();
        let occupancy: f64 = tasks.iter().map(|t| params.occupancy(t.path.total_length() / params.v_ex)).sum();
        // Roughly a third of the fleets run on tight budgets.
        let fleet = (0..robots)
            .map(|_| {
                if rng.gen_bool(0.35) {
                    (volume * rng.gen_range(0.45..0.9), occupancy * rng.gen_range(0.5..1.0))
                } else {
                    (volume, occupancy)
                }
            })
            .collect();
        let instance = MissionInstance::new(tasks, fleet, edges, params).expect("valid random instance");
        if instance.conflicts.len() <= MAX_CONFLICTS {
            return Case { seed, instance, robots };
        }
    }
}

pub fn corpus() -> Vec<Case> {
    (0..CORPUS_SIZE as u64).map(case).collect()
}

/// Minimum distance between two segments by brute force: a 64 x 64 grid
/// over both parameters, then nested ternary search from the best cell.
/// Distance is convex in the parameter pair, so the refinement converges to
/// the global minimum.
pub fn sampled_segment_distance(a: &aeroprint::geometry::Segment, b: &aeroprint::geometry::Segment) -> f64 {
    let dist = |s: f64, t: f64| a.point_at(s).distance(b.point_at(t));
    const GRID: usize = 64;
    let mut best = f64::INFINITY;
    for i in 0..=GRID {
        for j in 0..=GRID {
            best = best.min(dist(i as f64 / GRID as f64, j as f64 / GRID as f64));
        }
    }
    let inner = |s: f64| {
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..100 {
            let (m1, m2) = (lo + (hi - lo) / 3.0, hi - (hi - lo) / 3.0);
            if dist(s, m1) <= dist(s, m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        dist(s, (lo + hi) / 2.0)
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..100 {
        let (m1, m2) = (lo + (hi - lo) / 3.0, hi - (hi - lo) / 3.0);
        if inner(m1) <= inner(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    best.min(inner((lo + hi) / 2.0))
}

/// Random segment pairs in a 4 m cube, a tenth of them degenerate to a point
/// and a tenth parallel.
pub fn random_segment_pairs(seed: u64, count: usize) -> Vec<(aeroprint::geometry::Segment, aeroprint::geometry::Segment)> {
    use aeroprint::geometry::Segment;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let point = |rng: &mut ChaCha8Rng| Point3::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    (0..count)
        .map(|k| {
            let a = Segment::new(point(&mut rng), point(&mut rng));
            let b = match k % 10 {
                0 => {
                    let p = point(&mut rng);
                    Segment::new(p, p)
                }
                1 => {
                    let shift = point(&mut rng);
                    let scale = rng.gen_range(0.2..1.5);
                    Segment::new(a.a + shift, a.a + shift + (a.b - a.a) * scale)
                }
                _ => Segment::new(point(&mut rng), point(&mut rng)),
            };
            (a, b)
        })
        .collect()
}
