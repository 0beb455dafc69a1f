use std::time::Instant;

use tribody::orbit::{shoot_periodic, verify_orbit, ShootOptions, VerifyOptions};
use tribody::{Error, Masses, PhaseState, PotentialSpec, Vec2};

fn euler_guess(q1: Vec2, v3: Vec2) -> PhaseState {
    PhaseState::new(0.0, [q1, -q1, Vec2::ZERO], [v3 * -0.5, v3 * -0.5, v3])
}

#[test]
fn newtonian_figure_eight() {
    let m = Masses::equal(1.0).unwrap();
    let pot = PotentialSpec::new(-1.0, m);
    let guess = euler_guess(Vec2::new(0.97, -0.243), Vec2::new(-0.932, -0.865));
    let t = Instant::now();
    let rec = shoot_periodic(&guess, 6.33, &pot, "coarse", &ShootOptions::default()).unwrap();
    println!(
        "shoot {:?} {:?} T={} it={}",
        t.elapsed(),
        rec.residuals,
        rec.period,
        rec.provenance.iterations
    );
    // Period scales as |q1|^(3/2) under the Newtonian similarity.
    let expected = 6.32591398 * guess.q[0].norm().powf(1.5);
    assert!((rec.period - expected).abs() < 1e-6, "{}", rec.period);
    assert!(rec.residuals.periodicity < 1e-8);
    let t = Instant::now();
    let cert = verify_orbit(&rec, &VerifyOptions::default()).unwrap();
    println!("verify {:?} {:?}", t.elapsed(), cert.residuals);
    assert_eq!(cert.syzygies_per_period, 6);
    assert_eq!(cert.middle_counts, [2, 2, 2]);
    assert!(cert.similarity_refusals > cert.samples / 2);
    assert!(cert.passed(), "{:?} {:?}", cert.residuals, cert.failures);
}

#[test]
fn strong_force_figure_eight() {
    let m = Masses::equal(1.0).unwrap();
    let pot = PotentialSpec::new(-2.0, m);
    let guess = euler_guess(Vec2::new(1.0, 0.0), Vec2::new(-0.477, -1.128));
    let t = Instant::now();
    let rec = shoot_periodic(&guess, 7.11, &pot, "coarse", &ShootOptions::default()).unwrap();
    println!(
        "shoot {:?} {:?} T={} it={}",
        t.elapsed(),
        rec.residuals,
        rec.period,
        rec.provenance.iterations
    );
    let t = Instant::now();
    let cert = verify_orbit(&rec, &VerifyOptions::default()).unwrap();
    println!("verify {:?} {:?} {:?}", t.elapsed(), cert.residuals, cert.failures);
    assert!(cert.passed());
}

#[test]
fn rotated_guess_gives_rotated_orbit() {
    let m = Masses::equal(1.0).unwrap();
    let pot = PotentialSpec::new(-1.0, m);
    let guess = euler_guess(Vec2::new(0.97, -0.243), Vec2::new(-0.932, -0.865));
    let a = shoot_periodic(&guess, 6.33, &pot, "g", &ShootOptions::default()).unwrap();
    let angle = 0.7;
    let b = shoot_periodic(&guess.rotated(angle), 6.33, &pot, "g", &ShootOptions::default()).unwrap();
    let back = b.initial.rotated(-angle);
    for k in 0..3 {
        assert!((back.q[k] - a.initial.q[k]).norm() < 1e-9);
        assert!((back.p[k] - a.initial.p[k]).norm() < 1e-9);
    }
    assert!((a.period - b.period).abs() < 1e-9);
}

#[test]
fn infeasible_guess_fails() {
    let m = Masses::equal(1.0).unwrap();
    let pot = PotentialSpec::new(-1.0, m);
    let guess = euler_guess(Vec2::new(0.97, -0.243), Vec2::new(-0.932, -0.865));
    let opts = ShootOptions {
        max_iterations: 8,
        ..ShootOptions::default()
    };
    match shoot_periodic(&guess, 400.0, &pot, "bad", &opts) {
        Err(Error::NoConvergence { best_residual, .. }) => assert!(best_residual > 1e-9),
        Err(Error::ShootingCollision(_)) => {}
        other => panic!("{other:?}"),
    }
}
