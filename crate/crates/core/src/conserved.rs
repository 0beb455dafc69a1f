//! Energy partition and the homogeneous constant on constant-inertia,
//! zero angular momentum orbits, and the momentum/force-space identities.

use crate::dynamics::{PotentialSpec, Trajectory};
use crate::error::{Error, Result};
use crate::geometry::{AlgebraicTriplet, Residual, ResidualSet};
use crate::state::{Masses, PhaseState, CYCLIC};

/// Relative size of `dI/dt` and `d²I/dt²` below which a trajectory counts as
/// having constant moment of inertia.
pub const INERTIA_CONST_TOL: f64 = 1e-9;

/// `Σ m_i m_j |p_k|^α` over cyclic triples, or `Σ m_i m_j log|p_k|` at `α = 0`.
pub fn homogeneous_constant(state: &PhaseState, masses: &Masses, alpha: f64) -> Result<f64> {
    state.ensure_finite()?;
    let m = masses.as_array();
    let mut sum = 0.0;
    for &(i, j, k) in CYCLIC.iter() {
        let pk = state.p[k].norm();
        if pk == 0.0 && alpha <= 0.0 {
            return Err(Error::ConstantUndefined(k));
        }
        let mm = m[i] * m[j];
        sum += if alpha == 0.0 {
            mm * pk.ln()
        } else {
            mm * pk.powf(alpha)
        };
    }
    Ok(sum)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstantReport {
    pub alpha: f64,
    pub series: Vec<(f64, f64)>,
    /// `M I / (m1 m2 m3)` at the first sample, for `α = −2` only.
    pub reference: Option<f64>,
    /// Largest deviation from the first value, relative to it.
    pub drift: f64,
    /// Largest pointwise deviation from `M I(t) / (m1 m2 m3)`, relative; `α = −2` only.
    pub reference_deviation: Option<f64>,
    /// Smallest momentum magnitude seen along the series.
    pub min_momentum: f64,
}

pub fn constant_report(traj: &Trajectory, alpha: f64) -> Result<ConstantReport> {
    let masses = traj.masses();
    let mut series = Vec::with_capacity(traj.samples().len());
    let mut ref_dev = 0.0f64;
    let mut min_p = f64::INFINITY;
    let reference_at = |s: &PhaseState| masses.total() * s.inertia(masses) / masses.product();
    for s in traj.samples() {
        let c = homogeneous_constant(s, masses, alpha)?;
        if alpha == -2.0 {
            let r = reference_at(s);
            ref_dev = ref_dev.max((c - r).abs() / r);
        }
        min_p = s.p.iter().map(|p| p.norm()).fold(min_p, f64::min);
        series.push((s.t, c));
    }
    let first = series[0].1;
    let drift = series.iter().map(|&(_, c)| (c - first).abs()).fold(0.0, f64::max)
        / if first != 0.0 { first.abs() } else { 1.0 };
    let is_strong = alpha == -2.0;
    Ok(ConstantReport {
        alpha,
        series,
        reference: is_strong.then(|| reference_at(&traj.samples()[0])),
        drift,
        reference_deviation: is_strong.then_some(ref_dev),
        min_momentum: min_p,
    })
}

/// Largest relative `|dI/dt|` and `|d²I/dt²|` over the samples.
pub fn inertia_constancy(traj: &Trajectory) -> Result<(f64, f64)> {
    let masses = traj.masses();
    let pot = traj.potential();
    let mut rate = 0.0f64;
    let mut accel = 0.0f64;
    for s in traj.samples() {
        let scale: f64 = (0..3).map(|k| s.q[k].norm() * s.p[k].norm()).sum();
        rate = rate.max(s.virial().abs() / scale.max(f64::MIN_POSITIVE));
        let k2 = s.twice_kinetic(masses);
        let w = pot.virial_sum(&s.q)?;
        accel = accel.max((k2 - w).abs() / (k2 + w.abs()).max(f64::MIN_POSITIVE));
    }
    Ok((rate, accel))
}

/// Checks the split between kinetic and potential energy forced by constant
/// inertia: `K = 2αE/(2+α)` in general, `K = −2V` with zero total energy at
/// `α = −2`, and `K = Σ m_i m_j` at `α = 0`.
pub fn energy_partition_check(traj: &Trajectory, alpha: f64) -> Result<ResidualSet> {
    let pot = traj.potential();
    if alpha != pot.alpha {
        return Err(Error::InvalidInput(format!(
            "alpha {alpha} does not match the trajectory potential ({})",
            pot.alpha
        )));
    }
    let (rate, accel) = inertia_constancy(traj)?;
    let worst = rate.max(accel);
    if worst > INERTIA_CONST_TOL {
        return Err(Error::HypothesisViolated {
            constraint: "I=const",
            residual: worst,
            tolerance: INERTIA_CONST_TOL,
        });
    }
    let masses = traj.masses();
    let m = masses.as_array();
    let pair_sum = m[0] * m[1] + m[1] * m[2] + m[2] * m[0];
    let tol = 1e-8;
    let mut partition = 0.0f64;
    let mut zero_energy = 0.0f64;
    let (mut k_min, mut k_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut v_min, mut v_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in traj.samples() {
        let k2 = s.twice_kinetic(masses);
        let v = pot.potential_energy(&s.q)?;
        let e = 0.5 * k2 + v;
        let r = if alpha == -2.0 {
            zero_energy = zero_energy.max(e.abs() / k2);
            (k2 + 2.0 * v) / k2
        } else if alpha == 0.0 {
            (k2 - pair_sum) / pair_sum
        } else {
            (k2 - 2.0 * alpha * e / (2.0 + alpha)) / k2
        };
        partition = partition.max(r.abs());
        k_min = k_min.min(k2);
        k_max = k_max.max(k2);
        v_min = v_min.min(v);
        v_max = v_max.max(v);
    }
    let mut out = ResidualSet::new();
    out.push(Residual::new("energy-partition", None, partition, tol));
    if alpha == -2.0 {
        out.push(Residual::new("zero-energy", None, zero_energy, tol));
    }
    // At α = −2 constant inertia only ties K to V; each may still vary.
    if alpha != -2.0 {
        out.push(Residual::new(
            "kinetic-constant",
            None,
            (k_max - k_min) / k_max.abs(),
            tol,
        ));
    }
    if alpha != 0.0 && alpha != -2.0 {
        out.push(Residual::new(
            "potential-constant",
            None,
            (v_max - v_min) / v_max.abs().max(v_min.abs()),
            tol,
        ));
    }
    Ok(out)
}

/// Force-space counterparts of the area and moment relations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentumForce {
    /// `Σ m_i m_j r_ij^(α−2) p_k·f_k`, relative to its term scale.
    pub inner: f64,
    /// `Σ m_i m_j r_ij^(α−2) p_k∧f_k`, relative to its term scale.
    pub outer: f64,
    pub scale: f64,
    /// Weights `μ_k = 1/(m_i m_j r_ij^(α−2))` with `ξ = p/μ`, `ξ̄ = f/μ`.
    pub triplet: AlgebraicTriplet,
}

pub fn momentum_force_residuals(state: &PhaseState, masses: &Masses, alpha: f64) -> Result<MomentumForce> {
    state.ensure_finite()?;
    let pot = PotentialSpec::new(alpha, *masses);
    let a = pot.accelerations(&state.q)?;
    let w = pot.pair_weights(&state.q)?;
    let m = masses.as_array();
    let f: [_; 3] = std::array::from_fn(|k| a[k] * m[k]);
    let mut inv_mu = [0.0; 3];
    let (mut inner, mut outer, mut scale) = (0.0, 0.0, 0.0);
    for (n, &(i, j, k)) in CYCLIC.iter().enumerate() {
        inv_mu[k] = m[i] * m[j] * w[n];
        inner += inv_mu[k] * state.p[k].dot(f[k]);
        outer += inv_mu[k] * state.p[k].wedge(f[k]);
        scale += inv_mu[k] * state.p[k].norm() * f[k].norm();
    }
    let rel = |x: f64| if scale > 0.0 { x / scale } else { x };
    Ok(MomentumForce {
        inner: rel(inner),
        outer: rel(outer),
        scale,
        triplet: AlgebraicTriplet {
            mu: inv_mu.map(|x| 1.0 / x),
            xi: std::array::from_fn(|k| state.p[k] * inv_mu[k]),
            xibar: std::array::from_fn(|k| f[k] * inv_mu[k]),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate, IntegrateOptions};
    use crate::geometry::{moment, theorem5_sample, theorem5_verify};
    use crate::state::fixtures::st1;
    use crate::state::{project_constraints, ConstraintFlags};
    use crate::vec2::Vec2;
    use approx::assert_abs_diff_eq;

    #[test]
    fn st1_constant_values() {
        let (s, m) = st1();
        assert_abs_diff_eq!(homogeneous_constant(&s, &m, -2.0).unwrap(), 2.25, epsilon = 1e-14);
        assert_abs_diff_eq!(
            homogeneous_constant(&s, &m, 2.0).unwrap(),
            s.twice_kinetic(&m),
            epsilon = 1e-14
        );
    }

    #[test]
    fn stationary_body_constant_undefined() {
        let (mut s, m) = st1();
        s.p[1] = Vec2::ZERO;
        assert_eq!(homogeneous_constant(&s, &m, -2.0), Err(Error::ConstantUndefined(1)));
        assert!(homogeneous_constant(&s, &m, 1.0).is_ok());
    }

    #[test]
    fn st1_momentum_force() {
        let (s, m) = st1();
        let r = momentum_force_residuals(&s, &m, 2.0).unwrap();
        assert!(r.inner.abs() < 1e-15 && r.outer.abs() < 1e-15);
        assert!(theorem5_verify(&r.triplet).unwrap().all_pass());
    }

    #[test]
    fn outer_vanishes_with_zero_angular_momentum() {
        let m = Masses::new(0.7, 1.9, 3.1).unwrap();
        let s = PhaseState::new(
            0.0,
            [Vec2::new(1.3, 0.2), Vec2::new(-0.4, 0.9), Vec2::new(0.1, -1.1)],
            [Vec2::new(0.3, 0.5), Vec2::new(-0.8, 0.1), Vec2::new(0.2, -0.7)],
        );
        let flags = ConstraintFlags {
            zero_linear: true,
            zero_angular: true,
            zero_inertia_rate: false,
        };
        let s = project_constraints(&s, &m, flags).unwrap();
        let r = momentum_force_residuals(&s, &m, -1.0).unwrap();
        assert!(r.outer.abs() < 1e-12);
        assert!(r.inner.abs() > 1e-6);
    }

    /// Harmonic orbit `q = A cos(√M t) + B sin(√M t)` built from a sampled
    /// triplet with equal moments; it has L = 0 and constant I.
    fn harmonic_constant_inertia_orbit() -> (PhaseState, Masses) {
        let t = theorem5_sample(3);
        let m = Masses::new(t.mu[0], t.mu[1], t.mu[2]).unwrap();
        let ratio = (moment(&t.mu, &t.xi) / moment(&t.mu, &t.xibar)).sqrt();
        let b = t.xibar.map(|v| v * ratio);
        let v = b.map(|x| x * m.total().sqrt());
        (PhaseState::from_velocities(0.0, t.xi, v, &m), m)
    }

    #[test]
    fn harmonic_partition_and_inner_identity() {
        let (s, m) = harmonic_constant_inertia_orbit();
        let pot = PotentialSpec::new(2.0, m);
        let traj = integrate(&s, &pot, (0.0, 5.0), &IntegrateOptions::default()).unwrap();
        let rep = energy_partition_check(&traj, 2.0).unwrap();
        assert!(rep.all_pass(), "{rep:?}");
        for st in traj.samples() {
            let r = momentum_force_residuals(st, &m, 2.0).unwrap();
            assert!(r.inner.abs() < 1e-9 && r.outer.abs() < 1e-9);
        }
    }

    #[test]
    fn logarithmic_partition_on_single_sample() {
        // Equilateral rotation-free state with K = Σ m_i m_j and İ = 0.
        let m = Masses::equal(1.0).unwrap();
        let q = [0.0, 2.0, 4.0].map(|k: f64| Vec2::from_polar(1.0, k * std::f64::consts::PI / 3.0));
        let p = [Vec2::new(1.0, 0.0), Vec2::new(-1.0, 0.0), Vec2::ZERO];
        let s = PhaseState::new(0.0, q, p);
        let s = project_constraints(&s, &m, ConstraintFlags::ALL).unwrap();
        let k2 = s.twice_kinetic(&m);
        let s = PhaseState {
            p: s.p.map(|x| x * (3.0 / k2).sqrt()),
            ..s
        };
        let traj = Trajectory::from_samples(PotentialSpec::new(0.0, m), vec![s], 1e-10, 1e-12).unwrap();
        let rep = energy_partition_check(&traj, 0.0).unwrap();
        assert!(rep.get("energy-partition", None).unwrap().passes());
    }

    #[test]
    fn varying_inertia_rejected() {
        let (s, m) = st1();
        let traj = integrate(
            &s,
            &PotentialSpec::new(-1.0, m),
            (0.0, 1.0),
            &IntegrateOptions::default(),
        )
        .unwrap();
        assert!(matches!(
            energy_partition_check(&traj, -1.0),
            Err(Error::HypothesisViolated {
                constraint: "I=const",
                ..
            })
        ));
    }
}
