//! Scaled variables `q̃ = q/√I`, `ṽ = dq̃/dt`, and the area identity that
//! holds on any zero angular momentum orbit without constant inertia.

use crate::error::{Error, Result};
use crate::geometry::{theorem5_verify_with, AlgebraicTriplet, Residual, ResidualSet};
use crate::state::{Masses, PhaseState, Tolerances, CYCLIC};
use crate::vec2::Vec2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledState {
    pub t: f64,
    pub qt: [Vec2; 3],
    pub vt: [Vec2; 3],
    /// `Σ m_k ṽ_k²`.
    pub kt: f64,
}

const MIN_INERTIA: f64 = 1e-300;

pub fn scale_state(state: &PhaseState, masses: &Masses) -> Result<ScaledState> {
    state.ensure_finite()?;
    let inertia = state.inertia(masses);
    if inertia <= MIN_INERTIA {
        return Err(Error::TripleCollision);
    }
    let rate = 2.0 * state.virial();
    let root = inertia.sqrt();
    let v = state.velocities(masses);
    let qt = state.q.map(|q| q / root);
    let vt = std::array::from_fn(|k| v[k] / root - state.q[k] * (rate / (2.0 * inertia * root)));
    let kt = (0..3).map(|k| masses.get(k) * vt[k].norm_sq()).sum();
    Ok(ScaledState { t: state.t, qt, vt, kt })
}

impl ScaledState {
    /// `[Σ m q̃² − 1, |Σ m q̃|, |Σ m ṽ|, Σ m q̃∧ṽ, Σ m q̃·ṽ]`; the last four are
    /// divided by their natural scales.
    pub fn invariant_residuals(&self, masses: &Masses) -> [f64; 5] {
        let m = masses.as_array();
        let sum_v = |f: &dyn Fn(usize) -> Vec2| (0..3).fold(Vec2::ZERO, |a, k| a + f(k));
        let rel = |r: f64, s: f64| if s > 0.0 { r / s } else { r };
        let sq: f64 = (0..3).map(|k| m[k] * self.qt[k].norm()).sum();
        let sv: f64 = (0..3).map(|k| m[k] * self.vt[k].norm()).sum();
        let sqv: f64 = (0..3).map(|k| m[k] * self.qt[k].norm() * self.vt[k].norm()).sum();
        [
            (0..3).map(|k| m[k] * self.qt[k].norm_sq()).sum::<f64>() - 1.0,
            rel(sum_v(&|k| self.qt[k] * m[k]).norm(), sq),
            rel(sum_v(&|k| self.vt[k] * m[k]).norm(), sv),
            rel((0..3).map(|k| m[k] * self.qt[k].wedge(self.vt[k])).sum(), sqv),
            rel((0..3).map(|k| m[k] * self.qt[k].dot(self.vt[k])).sum(), sqv),
        ]
    }

    /// Vertices of the triangle whose sides are `m_k ṽ_k`, divided by the
    /// scaled ratio of magnification so that it is congruent to the `q̃`
    /// triangle.
    pub fn perimeter_triangle(&self, masses: &Masses) -> Result<[Vec2; 3]> {
        let m = masses.as_array();
        let kappa = (masses.product() * self.kt / masses.total()).sqrt();
        if kappa == 0.0 {
            return Err(Error::NotSimilarityInstance("scaled velocities vanish".into()));
        }
        let mut w = [Vec2::ZERO; 3];
        for &(i, j, k) in CYCLIC.iter() {
            w[k] = (self.vt[i] * m[i] - self.vt[j] * m[j]) / (3.0 * kappa);
        }
        Ok(w)
    }
}

/// Raw value and term scale of `K q_i∧q_j + I v_i∧v_j − ½ İ d(q_i∧q_j)/dt`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AreaResidual {
    pub value: f64,
    pub scale: f64,
}

impl AreaResidual {
    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.value / self.scale
        } else {
            self.value
        }
    }
}

pub fn general_area_residual(state: &PhaseState, masses: &Masses, pair: (usize, usize)) -> Result<AreaResidual> {
    general_area_residual_with(state, masses, pair, &Tolerances::default())
}

pub fn general_area_residual_with(
    state: &PhaseState,
    masses: &Masses,
    (i, j): (usize, usize),
    tol: &Tolerances,
) -> Result<AreaResidual> {
    state.ensure_finite()?;
    if i > 2 || j > 2 || i == j {
        return Err(Error::InvalidInput(format!("invalid pair ({i}, {j})")));
    }
    let qp_scale: f64 = (0..3).map(|k| state.q[k].norm() * state.p[k].norm()).sum();
    let l = state.angular_momentum();
    if l.abs() > tol.abs + tol.rel * qp_scale {
        return Err(Error::NonZeroAngularMomentum(l));
    }
    let inertia = state.inertia(masses);
    let k2 = state.twice_kinetic(masses);
    let rate = 2.0 * state.virial();
    let v = state.velocities(masses);
    let (qi, qj, vi, vj) = (state.q[i], state.q[j], v[i], v[j]);
    let area_rate = vi.wedge(qj) + qi.wedge(vj);
    let value = k2 * qi.wedge(qj) + inertia * vi.wedge(vj) - 0.5 * rate * area_rate;
    let scale = k2 * qi.norm() * qj.norm()
        + inertia * vi.norm() * vj.norm()
        + 0.5 * rate.abs() * (vi.norm() * qj.norm() + qi.norm() * vj.norm());
    Ok(AreaResidual { value, scale })
}

/// Similarity residuals for the scaled position and scaled momentum
/// triangles, plus the scaled area relation per cyclic pair.
pub fn scaled_similarity_report(scaled: &ScaledState, masses: &Masses) -> Result<ResidualSet> {
    scaled_similarity_report_with(scaled, masses, &Tolerances::default())
}

pub fn scaled_similarity_report_with(scaled: &ScaledState, masses: &Masses, tol: &Tolerances) -> Result<ResidualSet> {
    if scaled.kt == 0.0 {
        return Err(Error::NotSimilarityInstance("scaled velocities vanish".into()));
    }
    let triplet = AlgebraicTriplet {
        mu: masses.as_array(),
        xi: scaled.qt,
        xibar: scaled.vt,
    };
    let mut out = theorem5_verify_with(&triplet, tol)?;
    let weight = masses.total() / 3.0;
    for &(i, j, _) in CYCLIC.iter() {
        let v = scaled.qt[i].wedge(scaled.qt[j]) + scaled.vt[i].wedge(scaled.vt[j]) / scaled.kt;
        out.push(Residual::new("scaled-area", Some((i, j)), v * weight, tol.rel));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::fixtures::st1;
    use approx::assert_abs_diff_eq;

    #[test]
    fn st1_scaling_halves() {
        let (s, m) = st1();
        let sc = scale_state(&s, &m).unwrap();
        for k in 0..3 {
            assert!((sc.qt[k] - s.q[k] * 0.5).norm() < 1e-15);
            assert!((sc.vt[k] - s.p[k] * 0.5).norm() < 1e-15);
        }
        assert_abs_diff_eq!(sc.kt, 1.2, epsilon = 1e-14);
        assert!(sc.invariant_residuals(&m).iter().all(|r| r.abs() < 1e-15));
        assert!(scaled_similarity_report(&sc, &m).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn st1_general_area() {
        let (s, m) = st1();
        for (i, j, _) in CYCLIC {
            assert!(general_area_residual(&s, &m, (i, j)).unwrap().relative().abs() < 1e-15);
        }
    }

    #[test]
    fn free_fall_instant_is_degenerate() {
        let (mut s, m) = st1();
        s.p = [Vec2::ZERO; 3];
        let sc = scale_state(&s, &m).unwrap();
        assert!(sc.vt.iter().all(|v| *v == Vec2::ZERO));
        assert!(matches!(
            scaled_similarity_report(&sc, &m),
            Err(Error::NotSimilarityInstance(_))
        ));
    }

    #[test]
    fn angular_momentum_required() {
        let (mut s, m) = st1();
        s.p[0] = Vec2::new(1.0, 2.0);
        assert!(matches!(
            general_area_residual(&s, &m, (0, 1)),
            Err(Error::NonZeroAngularMomentum(_))
        ));
    }

    #[test]
    fn triple_collision_rejected() {
        let (mut s, m) = st1();
        s.q = [Vec2::ZERO; 3];
        assert_eq!(scale_state(&s, &m), Err(Error::TripleCollision));
    }

    #[test]
    fn perimeter_triangle_is_congruent() {
        let (s, m) = st1();
        let sc = scale_state(&s, &m).unwrap();
        let w = sc.perimeter_triangle(&m).unwrap();
        for n in 0..3 {
            let a = (sc.qt[n] - sc.qt[(n + 1) % 3]).norm();
            let b = (w[n] - w[(n + 1) % 3]).norm();
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }
    }
}
