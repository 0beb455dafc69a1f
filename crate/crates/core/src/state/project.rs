use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Masses, PhaseState};
use crate::error::{Error, Result};
use crate::vec2::Vec2;

/// Which linear momentum constraints to enforce.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ConstraintFlags {
    /// `Σ p_k = 0`
    pub zero_linear: bool,
    /// `Σ q_k ∧ p_k = 0`
    pub zero_angular: bool,
    /// `Σ q_k · p_k = 0`, i.e. `dI/dt = 0`
    pub zero_inertia_rate: bool,
}

impl ConstraintFlags {
    pub const ALL: ConstraintFlags = ConstraintFlags {
        zero_linear: true,
        zero_angular: true,
        zero_inertia_rate: true,
    };

    /// The hypotheses of the three-tangents theorem.
    pub const TANGENTS: ConstraintFlags = ConstraintFlags {
        zero_linear: true,
        zero_angular: true,
        zero_inertia_rate: false,
    };

    fn any(&self) -> bool {
        self.zero_linear || self.zero_angular || self.zero_inertia_rate
    }
}

/// Seeded random state satisfying the flagged constraints: masses uniform in
/// `[0.1, 10]`, position and momentum components uniform in `[−1, 1]`, then
/// projected. Draws the projector rejects, or that leave a body at rest, are
/// redrawn from the same stream.
pub fn random_constrained_state(seed: u64, flags: ConstraintFlags) -> Result<(Masses, PhaseState)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let masses = Masses::new(
            rng.random_range(0.1..10.0),
            rng.random_range(0.1..10.0),
            rng.random_range(0.1..10.0),
        )?;
        let mut v = || Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let state = PhaseState::new(0.0, [v(), v(), v()], [v(), v(), v()]);
        let out = if flags.any() {
            match project_constraints(&state, &masses, flags) {
                Ok(out) => out,
                Err(_) => continue,
            }
        } else {
            state.recentred(&masses)
        };
        let p_scale: f64 = out.p.iter().map(|p| p.norm()).sum();
        if out.p.iter().all(|p| p.norm() > 1e-6 * p_scale) {
            return Ok((masses, out));
        }
    }
}

/// Recentres positions and applies the smallest momentum correction, measured
/// in the kinetic metric `Σ |δp_k|² / m_k`, that satisfies the flagged
/// constraints. Each constraint is linear in `p` at fixed `q`, so the
/// correction is a weighted least-norm solve and feasible states are fixed
/// points.
pub fn project_constraints(state: &PhaseState, masses: &Masses, flags: ConstraintFlags) -> Result<PhaseState> {
    state.ensure_finite()?;
    if !flags.any() {
        return Err(Error::InvalidInput("no constraint requested".into()));
    }
    let mut out = state.recentred(masses);

    let mut rows: Vec<[f64; 6]> = Vec::with_capacity(4);
    if flags.zero_linear {
        rows.push([1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        rows.push([0.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
    }
    let q = out.q;
    if flags.zero_angular {
        rows.push([-q[0].y, q[0].x, -q[1].y, q[1].x, -q[2].y, q[2].x]);
    }
    if flags.zero_inertia_rate {
        rows.push([q[0].x, q[0].y, q[1].x, q[1].y, q[2].x, q[2].y]);
    }
    let n = rows.len();
    let c = DMatrix::from_fn(n, 6, |r, col| rows[r][col]);
    let w = DVector::from_fn(6, |i, _| masses.get(i / 2));

    // Normal matrix G = C W Cᵀ, row-equilibrated before the rank test.
    let cw = DMatrix::from_fn(n, 6, |r, col| c[(r, col)] * w[col]);
    let g = &cw * c.transpose();
    let d = DVector::from_fn(n, |r, _| g[(r, r)].sqrt());
    if d.iter().any(|&x| x == 0.0 || !x.is_finite()) {
        return Err(Error::RankDeficient);
    }
    let g_scaled = DMatrix::from_fn(n, n, |r, s| g[(r, s)] / (d[r] * d[s]));
    let sv = g_scaled.clone().svd(false, false).singular_values;
    let (smax, smin) = sv
        .iter()
        .fold((0.0f64, f64::INFINITY), |(a, b), &x| (a.max(x), b.min(x)));
    if smin <= 1e-12 * smax {
        return Err(Error::RankDeficient);
    }
    let chol = g_scaled.cholesky().ok_or(Error::RankDeficient)?;

    // Two passes: the second removes the rounding left by the first.
    for _ in 0..2 {
        let p = DVector::from_fn(6, |i, _| {
            let v = out.p[i / 2];
            if i % 2 == 0 {
                v.x
            } else {
                v.y
            }
        });
        let rhs = -(&c * &p);
        let rhs_scaled = DVector::from_fn(n, |r, _| rhs[r] / d[r]);
        let lambda_scaled = chol.solve(&rhs_scaled);
        let lambda = DVector::from_fn(n, |r, _| lambda_scaled[r] / d[r]);
        let dp = c.transpose() * lambda;
        for k in 0..3 {
            out.p[k] += Vec2::new(w[2 * k] * dp[2 * k], w[2 * k + 1] * dp[2 * k + 1]);
        }
    }
    Ok(out)
}

/// `m_i m_j (η_i − η_j)² + M m_k η_k² − (m_i + m_j) Σ m_l η_l²` for centred
/// vectors; `k` is the zero-based index of the body left out of the pair.
pub fn lagrange_identity_residual(eta: &[Vec2; 3], masses: &Masses, k: usize) -> Result<f64> {
    if k > 2 {
        return Err(Error::InvalidInput(format!("body index {k} out of range")));
    }
    let m = masses.as_array();
    let mut centroid = Vec2::ZERO;
    let mut scale = 0.0;
    for l in 0..3 {
        centroid += eta[l] * m[l];
        scale += m[l] * eta[l].norm();
    }
    let c = centroid.norm();
    if c > 1e-12 * scale {
        return Err(Error::CentroidNotRemoved(c));
    }
    let (i, j) = ((k + 1) % 3, (k + 2) % 3);
    let moment: f64 = (0..3).map(|l| m[l] * eta[l].norm_sq()).sum();
    let lhs = m[i] * m[j] * (eta[i] - eta[j]).norm_sq() + masses.total() * m[k] * eta[k].norm_sq();
    Ok(lhs - (m[i] + m[j]) * moment)
}
