use proptest::prelude::*;
use racenav::acceptance::{builtin_scenarios, outage_scenario};
use racenav::fusion::NavLevel;
use racenav::sim::{
    build_oval_track, read_trace, run_scenario, step_vehicle, synth_lidar, trace_to_string, DriveMode,
    GpsSimulator, LidarParams, Scenario, TRACE_HEADER,
};
use racenav::{ControlInput, Pose2D, VehicleState};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn nominal() -> Scenario {
    builtin_scenarios().remove(0)
}

#[test]
fn nominal_lap_is_uneventful() {
    let sc = nominal();
    let out = run_scenario(&sc).unwrap();
    assert!(out.off_track.is_none());
    assert_eq!(out.records.len(), 9000);
    assert!(out.records.iter().all(|r| r.status == NavLevel::Nominal));
    assert!(out.records.iter().all(|r| r.mode == DriveMode::RacingLine));
    // more than a full lap, so both turns were driven
    let driven: f64 = out
        .records
        .windows(2)
        .map(|w| (w[1].true_x - w[0].true_x).hypot(w[1].true_y - w[0].true_y))
        .sum();
    assert!(driven > out.track.perimeter(), "driven {driven}");
}

#[test]
fn every_tick_stays_in_corridor() {
    let sc = outage_scenario(true);
    let out = run_scenario(&sc).unwrap();
    let limit = sc.track.half_width - sc.vehicle.half_width;
    for r in &out.records {
        assert!(out.track.frenet(r.true_x, r.true_y).1.abs() <= limit);
    }
}

#[test]
fn trace_round_trips_through_csv() {
    let sc = outage_scenario(true);
    let out = run_scenario(&sc).unwrap();
    let text = trace_to_string(&out.records).unwrap();
    assert!(text.starts_with(TRACE_HEADER));
    let back = read_trace(text.as_bytes()).unwrap();
    assert_eq!(back, out.records);
}

#[test]
fn summary_is_recomputable_from_the_written_trace() {
    let sc = outage_scenario(true);
    let out = run_scenario(&sc).unwrap();
    let back = read_trace(trace_to_string(&out.records).unwrap().as_bytes()).unwrap();
    let again = racenav::sim::summarize(&sc, &out.track, &back, out.off_track.is_some());
    assert_eq!(again, out.summary(&sc));
    assert!(again.time_in_emergency_s > 6.5 && again.time_in_emergency_s < 7.5);
}

#[test]
fn sensors_never_look_ahead() {
    let track = build_oval_track(600.0, 200.0, 7.5, 9f64.to_radians()).unwrap();
    let mut gps = GpsSimulator::new(0.1, 2, Default::default(), ChaCha8Rng::seed_from_u64(1)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for k in 0..50 {
        let t = k as f64 * 0.05;
        let (x, y, yaw) = track.to_world(30.0 * t, -1.0);
        let truth = VehicleState::new(Pose2D::new(x, y, yaw).unwrap(), 30.0, 0.0, t).unwrap();
        assert!(gps.sample(&truth, t).iter().all(|m| m.timestamp <= t));
        assert!(synth_lidar(&truth, &track, &LidarParams::default(), &mut rng).unwrap().stamp <= t);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn speed_is_conserved_without_accel(v in 0.0..80.0f64, steer in -0.3..0.3f64, yaw in -3.0..3.0f64) {
        let mut s = VehicleState::new(Pose2D::new(0.0, 0.0, yaw).unwrap(), v, 0.0, 0.0).unwrap();
        let u = ControlInput { steer, accel: 0.0 };
        for _ in 0..500 {
            s = step_vehicle(&s, &u, 0.01, 3.048).unwrap();
        }
        prop_assert!((s.speed - v).abs() <= 1e-12);
    }

    #[test]
    fn speed_never_goes_negative(v in 0.0..5.0f64, brake in 0.0..20.0f64) {
        let mut s = VehicleState::new(Pose2D::new(0.0, 0.0, 0.0).unwrap(), v, 0.0, 0.0).unwrap();
        for _ in 0..200 {
            s = step_vehicle(&s, &ControlInput { steer: 0.0, accel: -brake }, 0.01, 3.048).unwrap();
            prop_assert!(s.speed >= 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn seed_fixes_the_trace(seed in any::<u64>()) {
        let mut sc = nominal();
        sc.duration_s = 1.5;
        sc.seed = seed;
        let a = trace_to_string(&run_scenario(&sc).unwrap().records).unwrap();
        let b = trace_to_string(&run_scenario(&sc).unwrap().records).unwrap();
        prop_assert_eq!(a, b);
    }
}
