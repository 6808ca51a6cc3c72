mod common;

use aeroprint::geometry::{arrival_offsets, segment_min_distance, Point3, Segment};
use aeroprint::instance::{load_instance, save_instance};
use aeroprint::model::Variant;
use aeroprint::solver::{solve, Limits};
use aeroprint::validate::{check_schedule, simulate};
use proptest::prelude::*;

fn point() -> impl Strategy<Value = Point3> {
    (-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64).prop_map(|(x, y, z)| Point3::new(x, y, z))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn distance_is_symmetric_and_below_endpoints(a0 in point(), a1 in point(), b0 in point(), b1 in point()) {
        let (a, b) = (Segment::new(a0, a1), Segment::new(b0, b1));
        let d = segment_min_distance(&a, &b).unwrap();
        prop_assert!((d - segment_min_distance(&b, &a).unwrap()).abs() < 1e-12);
        prop_assert!(d >= 0.0);
        for (p, q) in [(a0, b0), (a0, b1), (a1, b0), (a1, b1)] {
            prop_assert!(d <= p.distance(q) + 1e-12);
        }
    }

    #[test]
    fn arrival_offsets_increase(seed in 0u64..500) {
        let case = common::case(seed);
        for task in &case.instance.tasks {
            let offsets = arrival_offsets(&task.path, case.instance.params.v_ex).unwrap();
            prop_assert_eq!(offsets.len(), task.path.segment_count());
            prop_assert!(offsets[0] > 0.0);
            prop_assert!(offsets.windows(2).all(|w| w[1] > w[0]));
            prop_assert!((offsets.last().unwrap() - task.duration).abs() < 1e-9);
        }
    }

    #[test]
    fn importance_is_non_negative(seed in 0u64..500) {
        let case = common::case(seed);
        let alpha = case.instance.importance();
        prop_assert!(alpha.iter().all(|&a| a >= 0.0));
        for i in 0..case.instance.task_count() {
            prop_assert!(alpha[i] >= case.instance.deps.in_degree(i).unwrap() as f64);
        }
    }

    #[test]
    fn mission_round_trip_is_stable(seed in 0u64..500) {
        let case = common::case(seed);
        let text = save_instance(&case.instance);
        let back = load_instance(&text).unwrap();
        prop_assert_eq!(save_instance(&back), text);
        prop_assert_eq!(back.conflicts, case.instance.conflicts.clone());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn solver_schedules_pass_every_check(seed in 0u64..10_000, v in 0usize..3) {
        let case = common::case(seed);
        let variant = [Variant::P1, Variant::P2, Variant::P3][v];
        let report = solve(&case.instance, case.robots, variant, &Limits::default());
        if let Some(schedule) = &report.schedule {
            prop_assert_eq!(check_schedule(&case.instance, schedule), vec![]);
            let sim = simulate(&case.instance, schedule, 0.5).unwrap();
            prop_assert_eq!(sim.series.len(), (sim.makespan_s / 0.5).ceil() as usize + 1);
            prop_assert!((sim.makespan_s - schedule.makespan).abs() <= 1e-9);
            prop_assert_eq!(&sim.material_l, &schedule.material);
            prop_assert_eq!(&sim.flight_time_s, &schedule.flight_time);
            if let Some(d) = sim.global_min_distance_m {
                prop_assert!(d >= case.instance.params.r_c - 2.0 * case.instance.params.v_ex * 0.5);
            }
        }
    }
}
