//! Zero angular momentum identities along a Newtonian free fall from a
//! scalene triangle with unequal masses. One coordinate of the third body is
//! tuned so that bodies 2 and 3 collide, and the integration runs until the
//! close approach stops it.

use std::sync::OnceLock;

use tribody::dynamics::{integrate, IntegrateOptions, PotentialSpec, Termination, Trajectory};
use tribody::scaling::{general_area_residual, scale_state, scaled_similarity_report};
use tribody::syzygy::{
    delta_ode_residual, detect_events, gap_certificate, omega_bound, omega_sq, EventKind, EventOptions,
};
use tribody::{Masses, PhaseState, Vec2};

fn run(x3: f64) -> Trajectory {
    let m = Masses::new(1.0, 1.3, 0.8).unwrap();
    let q = [Vec2::new(-1.0, 0.1), Vec2::new(1.1, -0.2), Vec2::new(x3, 1.2)];
    let s = PhaseState::new(0.0, q, [Vec2::ZERO; 3]).recentred(&m);
    integrate(
        &s,
        &PotentialSpec::new(-1.0, m),
        (0.0, 3.0),
        &IntegrateOptions::default(),
    )
    .unwrap()
}

/// Relative angular momentum of bodies 2 and 3 at their first close approach.
fn miss(x3: f64) -> f64 {
    let traj = run(x3);
    let m = *traj.masses();
    let mut best = (f64::INFINITY, 0.0);
    for st in traj.samples() {
        let r = st.distances()[1];
        if r < best.0 {
            let v = st.velocities(&m);
            best = (r, (st.q[2] - st.q[1]).wedge(v[2] - v[1]));
        } else if best.0 < 0.5 && r > 2.0 * best.0 {
            break;
        }
    }
    best.1
}

fn free_fall() -> Trajectory {
    static X3: OnceLock<f64> = OnceLock::new();
    let x3 = *X3.get_or_init(|| {
        let (mut lo, mut hi) = (0.8, 0.9);
        let s_lo = miss(lo).signum();
        assert!(s_lo != miss(hi).signum());
        while hi - lo > 1e-14 {
            let mid = 0.5 * (lo + hi);
            if miss(mid).signum() == s_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    });
    run(x3)
}

fn sample_times(traj: &Trajectory, n: usize) -> Vec<f64> {
    let (a, b) = (traj.t_start(), traj.t_end());
    (1..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}

#[test]
fn reaches_close_approach_with_zero_angular_momentum() {
    let traj = free_fall();
    assert!(matches!(traj.meta().termination, Termination::CollisionApproach { .. }));
    for s in traj.samples() {
        assert!(s.angular_momentum().abs() < 1e-11);
    }
}

#[test]
fn general_area_identity_holds() {
    let traj = free_fall();
    let m = *traj.masses();
    let mut worst = 0.0f64;
    for t in sample_times(&traj, 100) {
        let s = traj.state_at(t).unwrap();
        for pair in [(0, 1), (1, 2), (2, 0)] {
            worst = worst.max(general_area_residual(&s, &m, pair).unwrap().relative().abs());
        }
    }
    assert!(worst < 1e-9, "{worst:e}");
}

#[test]
fn scaled_variables_hold_their_identities() {
    let traj = free_fall();
    let m = *traj.masses();
    let (mut inv, mut sim) = (0.0f64, 0.0f64);
    for t in sample_times(&traj, 100) {
        let sc = scale_state(&traj.state_at(t).unwrap(), &m).unwrap();
        inv = sc.invariant_residuals(&m).iter().fold(inv, |a, r| a.max(r.abs()));
        sim = sim.max(scaled_similarity_report(&sc, &m).unwrap().max_abs());
    }
    assert!(inv < 1e-11, "{inv:e}");
    assert!(sim < 1e-9, "{sim:e}");
}

#[test]
fn oriented_area_equation_holds() {
    let traj = free_fall();
    let worst = sample_times(&traj, 100)
        .into_iter()
        .map(|t| delta_ode_residual(&traj, t).unwrap().abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-9, "{worst:e}");
}

#[test]
fn zeros_are_closer_than_the_bound() {
    let traj = free_fall();
    let bound = omega_bound(&traj, -1.0).unwrap();
    assert!(bound.holds(), "{bound:?}");
    for s in traj.samples() {
        assert!(omega_sq(s, traj.potential()).unwrap() >= bound.omega0_sq);
    }
    let opts = EventOptions {
        max_step: Some(bound.t0 / 8.0),
        ..EventOptions::default()
    };
    let events = detect_events(&traj, &opts).unwrap();
    assert!(!events.is_empty());
    assert!(matches!(events.last().unwrap().kind, EventKind::PairCollision { .. }));
    for e in events.iter().filter(|e| matches!(e.kind, EventKind::Syzygy { .. })) {
        assert!(e.delta.abs() < 1e-10 && e.scaled.abs() < 1e-10);
    }
    let cert = gap_certificate(&events, &bound, (traj.t_start(), traj.t_end()));
    assert!(cert.all_pass(), "{cert:?}");
}
