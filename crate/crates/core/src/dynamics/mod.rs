//! Homogeneous pair potential, equations of motion and trajectory production.

mod csv;
mod integrate;
mod tableau;

pub use self::csv::{read_trajectory_csv, write_trajectory_csv, TRAJECTORY_CSV_HEADER};
pub use integrate::{integrate, IntegrateOptions, Termination, Trajectory, TrajectoryMeta};

use crate::error::{Error, Result};
use crate::state::{Masses, PhaseState, CYCLIC};
use crate::vec2::Vec2;

/// Pair potential `V = (1/α) Σ m_i m_j r_ij^α`, logarithmic at `α = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PotentialSpec {
    pub alpha: f64,
    pub masses: Masses,
}

impl PotentialSpec {
    pub fn new(alpha: f64, masses: Masses) -> Self {
        Self { alpha, masses }
    }

    pub fn is_logarithmic(&self) -> bool {
        self.alpha == 0.0
    }

    /// Mutual distances `[r12, r23, r31]`, rejecting coincident bodies when
    /// the force law is singular there (`α < 2`).
    pub fn checked_distances(&self, q: &[Vec2; 3]) -> Result<[f64; 3]> {
        let mut r = [0.0; 3];
        for (n, &(i, j, _)) in CYCLIC.iter().enumerate() {
            r[n] = (q[i] - q[j]).norm();
            if !r[n].is_finite() {
                return Err(Error::NonFinite("positions"));
            }
            if r[n] == 0.0 && self.alpha < 2.0 {
                return Err(Error::CollisionSingularity(i.min(j), i.max(j)));
            }
        }
        Ok(r)
    }

    pub fn potential_energy(&self, q: &[Vec2; 3]) -> Result<f64> {
        let r = self.checked_distances(q)?;
        let m = self.masses.as_array();
        let v = CYCLIC
            .iter()
            .zip(r)
            .map(|(&(i, j, _), rij)| {
                let mm = m[i] * m[j];
                if self.is_logarithmic() {
                    mm * rij.ln()
                } else {
                    mm * rij.powf(self.alpha) / self.alpha
                }
            })
            .sum();
        Ok(v)
    }

    /// `Σ m_i m_j r_ij^α`, which equals `α V` for `α ≠ 0` and `Σ m_i m_j` at `α = 0`.
    pub fn virial_sum(&self, q: &[Vec2; 3]) -> Result<f64> {
        let r = self.checked_distances(q)?;
        let m = self.masses.as_array();
        Ok(CYCLIC
            .iter()
            .zip(r)
            .map(|(&(i, j, _), rij)| m[i] * m[j] * rij.powf(self.alpha))
            .sum())
    }

    /// Force-law weights `r_ij^(α−2)` in cyclic pair order.
    pub fn pair_weights(&self, q: &[Vec2; 3]) -> Result<[f64; 3]> {
        let r = self.checked_distances(q)?;
        Ok(r.map(|rij| rij.powf(self.alpha - 2.0)))
    }

    /// `a_i = Σ_{j≠i} m_j r_ij^(α−2) (q_j − q_i)`.
    pub fn accelerations(&self, q: &[Vec2; 3]) -> Result<[Vec2; 3]> {
        let w = self.pair_weights(q)?;
        let m = self.masses.as_array();
        let mut a = [Vec2::ZERO; 3];
        for (n, &(i, j, _)) in CYCLIC.iter().enumerate() {
            let d = (q[j] - q[i]) * w[n];
            a[i] += d * m[j];
            a[j] -= d * m[i];
        }
        Ok(a)
    }

    /// Period-like time unit `2π √(R^(2−α) / M)` with `R = √(I/M)`.
    pub fn characteristic_time(&self, state: &PhaseState) -> f64 {
        let m = self.masses.total();
        let r = (state.recentred(&self.masses).inertia(&self.masses) / m).sqrt();
        2.0 * std::f64::consts::PI * (r.powf(2.0 - self.alpha) / m).sqrt()
    }
}

pub fn acceleration(state: &PhaseState, potential: &PotentialSpec) -> Result<[Vec2; 3]> {
    state.ensure_finite()?;
    potential.accelerations(&state.q)
}

/// Positions, velocities and accelerations at one instant; every time
/// derivative used by the checkers is assembled from these analytically.
#[derive(Clone, Copy, Debug)]
pub struct Kinematics {
    pub q: [Vec2; 3],
    pub v: [Vec2; 3],
    pub a: [Vec2; 3],
    pub masses: Masses,
}

impl Kinematics {
    pub fn new(state: &PhaseState, potential: &PotentialSpec) -> Result<Self> {
        Ok(Self {
            q: state.q,
            v: state.velocities(&potential.masses),
            a: acceleration(state, potential)?,
            masses: potential.masses,
        })
    }

    pub fn inertia(&self) -> f64 {
        (0..3).map(|k| self.masses.get(k) * self.q[k].norm_sq()).sum()
    }

    pub fn twice_kinetic(&self) -> f64 {
        (0..3).map(|k| self.masses.get(k) * self.v[k].norm_sq()).sum()
    }

    pub fn inertia_rate(&self) -> f64 {
        2.0 * (0..3)
            .map(|k| self.masses.get(k) * self.q[k].dot(self.v[k]))
            .sum::<f64>()
    }

    pub fn inertia_second_derivative(&self) -> f64 {
        2.0 * self.twice_kinetic()
            + 2.0
                * (0..3)
                    .map(|k| self.masses.get(k) * self.q[k].dot(self.a[k]))
                    .sum::<f64>()
    }

    pub fn delta(&self) -> f64 {
        0.5 * (self.q[1] - self.q[0]).wedge(self.q[2] - self.q[0])
    }

    pub fn delta_rate(&self) -> f64 {
        let (q, v) = (&self.q, &self.v);
        0.5 * ((v[1] - v[0]).wedge(q[2] - q[0]) + (q[1] - q[0]).wedge(v[2] - v[0]))
    }

    /// Second derivative of the oriented area, `½ Σ_cyc (2 v_i∧v_j + a_i∧q_j + q_i∧a_j)`.
    pub fn delta_second_derivative(&self) -> f64 {
        let (q, v, a) = (&self.q, &self.v, &self.a);
        0.5 * CYCLIC
            .iter()
            .map(|&(i, j, _)| 2.0 * v[i].wedge(v[j]) + a[i].wedge(q[j]) + q[i].wedge(a[j]))
            .sum::<f64>()
    }
}

/// Residual of `d²I/dt² = 2(K − Σ m_i m_j r_ij^α)`, with the left side taken
/// from the accelerations, together with the magnitude it is measured against.
pub fn jacobi_lagrange_residual(state: &PhaseState, potential: &PotentialSpec) -> Result<(f64, f64)> {
    let kin = Kinematics::new(state, potential)?;
    let lhs = kin.inertia_second_derivative();
    let k = kin.twice_kinetic();
    let w = potential.virial_sum(&state.q)?;
    Ok((lhs - 2.0 * (k - w), 2.0 * (k + w.abs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::fixtures::st1;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn harmonic_acceleration_on_st1() {
        let (s, m) = st1();
        let a = acceleration(&s, &PotentialSpec::new(2.0, m)).unwrap();
        let expected = [Vec2::new(-3.0, 0.0), Vec2::new(0.0, -3.0), Vec2::new(3.0, 3.0)];
        for k in 0..3 {
            assert_abs_diff_eq!(a[k].x, expected[k].x, epsilon = 1e-15);
            assert_abs_diff_eq!(a[k].y, expected[k].y, epsilon = 1e-15);
        }
    }

    #[test]
    fn newtonian_two_body_limit() {
        let m = Masses::new(2.0, 3.0, 1e-3).unwrap();
        let q = [Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.0), Vec2::new(1e6, 1e6)];
        let a = PotentialSpec::new(-1.0, m).accelerations(&q).unwrap();
        // |a_1| = m_2 / r², pointing at body 2
        assert_abs_diff_eq!(a[0].x, 3.0 / 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a[1].x, -2.0 / 4.0, epsilon = 1e-12);
    }

    #[test]
    fn equilateral_points_at_centroid() {
        let m = Masses::equal(1.5).unwrap();
        let q = [0.0, 1.0, 2.0].map(|k: f64| Vec2::from_polar(1.3, 0.2 + k * 2.0 * std::f64::consts::PI / 3.0));
        for alpha in [-2.0, -1.0, 0.0, 1.0, 2.0, 0.5] {
            let a = PotentialSpec::new(alpha, m).accelerations(&q).unwrap();
            let mag = a[0].norm();
            for k in 0..3 {
                assert!((a[k].norm() - mag).abs() < 1e-13 * mag);
                assert!(a[k].wedge(q[k]).abs() < 1e-13 * mag);
                assert!(a[k].dot(q[k]) < 0.0);
            }
        }
    }

    #[test]
    fn logarithmic_potential_energy() {
        let m = Masses::new(1.0, 2.0, 3.0).unwrap();
        let q = [Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.0), Vec2::new(0.0, 1.0)];
        let v = PotentialSpec::new(0.0, m).potential_energy(&q).unwrap();
        let expected = 2.0 * 2f64.ln() + 6.0 * 5f64.sqrt().ln() + 3.0 * 1f64.ln();
        assert_abs_diff_eq!(v, expected, epsilon = 1e-14);
    }

    proptest! {
        #[test]
        fn forces_sum_to_zero_and_obey_jacobi_lagrange(
            alpha in -2.5f64..2.0,
            m in prop::array::uniform3(0.1f64..10.0),
            q in prop::array::uniform6(-2.0f64..2.0),
            p in prop::array::uniform6(-2.0f64..2.0),
        ) {
            let masses = Masses::new(m[0], m[1], m[2]).unwrap();
            let q: [Vec2; 3] = std::array::from_fn(|k| Vec2::new(q[2 * k], q[2 * k + 1]));
            let p: [Vec2; 3] = std::array::from_fn(|k| Vec2::new(p[2 * k], p[2 * k + 1]));
            let s = PhaseState::new(0.0, q, p).recentred(&masses);
            let r = s.distances();
            prop_assume!(r.iter().all(|&x| x > 0.05));
            let pot = PotentialSpec::new(alpha, masses);
            let a = pot.accelerations(&s.q).unwrap();
            let mut total = Vec2::ZERO;
            let mut scale = 0.0;
            for k in 0..3 {
                total += a[k] * masses.get(k);
                scale += (a[k] * masses.get(k)).norm();
            }
            prop_assert!(total.norm() <= 1e-13 * scale.max(1.0));
            let (res, sc) = jacobi_lagrange_residual(&s, &pot).unwrap();
            prop_assert!(res.abs() <= 1e-11 * sc);
        }
    }
}
