use trophwave_core::wave::shoot::profile_lyapunov;
use trophwave_core::wave::{find_wave, wave_config, ShotVerdict, WaveLyapunovForm};
use trophwave_core::ModelParams;

fn check_speed(c: f64) {
    let p = ModelParams::reference();
    let cfg = wave_config(&p, c).unwrap();
    let start = std::time::Instant::now();
    let sol = find_wave(&p, &cfg, 0.01, 1e-12, 500.0).unwrap();
    eprintln!(
        "c={c}: z*={} refinements={} shots={} tail={:e} final={:?} L={:?} in {:?}",
        sol.z_star,
        sol.refinements,
        sol.shots,
        sol.tail_distance,
        sol.final_verdict,
        sol.lyapunov,
        start.elapsed()
    );
    assert!(sol.certified);
    assert_eq!(sol.final_verdict, ShotVerdict::ConvergedEstar);
    assert!(sol.bracket.1 - sol.bracket.0 <= 1e-12);
    let last = sol.trajectory.last().unwrap();
    for (got, want) in [last.x1, last.x2, last.y, last.z].iter().zip([0.3, 1.2, 0.62, 0.62]) {
        assert!((got - want).abs() <= 1e-3, "{last}");
    }
    // Z/Y tends to one, inside the wedge slopes
    assert!((last.z / last.y - 1.0).abs() < 1e-3);
    let s1 = cfg.sigma1.unwrap();
    assert!(sol.scan.first().unwrap().1 == ShotVerdict::ExitP1);
    assert!(sol.scan.last().unwrap().1 == ShotVerdict::ExitP2);
    assert!(sol.z_star > s1 * 0.01 && sol.z_star < cfg.sigma2 * 0.01);
    // the printed variant of L is reported but not relied on
    let unit = profile_lyapunov(&p, &cfg, &sol.trajectory, WaveLyapunovForm::UnitShift).unwrap();
    eprintln!("unit-shift L: {unit:?}");
}

#[test]
fn front_at_speed_1_5() {
    check_speed(1.5);
}

#[test]
fn front_at_speed_2() {
    check_speed(2.0);
}
