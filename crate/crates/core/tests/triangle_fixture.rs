use aeroprint::instance::load_instance;
use aeroprint::model::Variant;
use aeroprint::oracle::brute_force_schedule;
use aeroprint::solver::{evaluate_objective, solve, Limits, Schedule, Status};
use aeroprint::validate::check_schedule;

const MISSION: &str = include_str!("fixtures/triangle.json");
const EXPECTED: &str = include_str!("fixtures/triangle.expected.json");

#[test]
fn solver_and_oracle_reproduce_recorded_optimum() {
    let inst = load_instance(MISSION).unwrap();
    assert_eq!(inst.conflicts.task_pairs(), vec![(0, 1), (0, 2), (1, 2)]);
    let expected: serde_json::Value = serde_json::from_str(EXPECTED).unwrap();
    let m = expected["robots"].as_u64().unwrap() as usize;
    for variant in [Variant::P1, Variant::P2, Variant::P3] {
        let want = expected[variant.to_string()].as_f64().unwrap();
        let exact = brute_force_schedule(&inst, m, variant).unwrap();
        let found = solve(&inst, m, variant, &Limits::default());
        assert_eq!(found.status, Status::Optimal);
        assert!((exact.objective.unwrap().total - want).abs() <= 1e-6, "{variant}");
        assert!((found.objective.unwrap().total - want).abs() <= 1e-6, "{variant}");
    }
}

#[test]
fn hand_built_schedules_are_no_better_than_oracle() {
    let inst = load_instance(MISSION).unwrap();
    let occ: Vec<f64> = inst.tasks.iter().map(|t| inst.params.occupancy(t.duration)).collect();
    let manual = [
        // One robot, tasks back to back.
        Schedule::new(&inst, 2, vec![0, 0, 0], vec![0.0, occ[0], occ[0] + occ[1]]),
        // Two robots, each task printed only after the previous one finished printing.
        Schedule::new(&inst, 2, vec![0, 1, 0], vec![0.0, inst.tasks[0].duration + 0.05, occ[0]]),
        // Staggered by whole occupancy windows across robots.
        Schedule::new(&inst, 2, vec![1, 0, 1], vec![0.0, occ[0], occ[0] + occ[1]]),
    ];
    for variant in [Variant::P1, Variant::P2, Variant::P3] {
        let best = brute_force_schedule(&inst, 2, variant).unwrap().objective.unwrap().total;
        for (k, s) in manual.iter().enumerate() {
            assert_eq!(check_schedule(&inst, s), vec![], "manual schedule {k}");
            assert!(evaluate_objective(&inst, variant, s).total >= best - 1e-9, "manual schedule {k} {variant}");
        }
    }
}
