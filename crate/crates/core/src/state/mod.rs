//! State representation, derived scalar quantities and constraint projection.
//!
//! All identities in this crate are stated in the centre-of-mass frame with
//! the cyclic index convention `(i, j, k) = (1,2,3), (2,3,1), (3,1,2)`. Pair
//! quantities are therefore stored in the order `r12, r23, r31`, and the pair
//! `(i, j)` is always matched with the third body `k`.

mod literal;
mod project;

pub use literal::{format_state_literal, parse_state_literal};
pub use project::{lagrange_identity_residual, project_constraints, random_constrained_state, ConstraintFlags};

use crate::dynamics::PotentialSpec;
use crate::error::{Error, Result};
use crate::vec2::Vec2;

/// Cyclic index triples `(i, j, k)` in zero-based form.
pub const CYCLIC: [(usize, usize, usize); 3] = [(0, 1, 2), (1, 2, 0), (2, 0, 1)];

/// Residual thresholds shared by the checkers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { abs: 1e-12, rel: 1e-10 }
    }
}

/// The three body masses, all strictly positive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Masses([f64; 3]);

impl Masses {
    pub fn new(m1: f64, m2: f64, m3: f64) -> Result<Self> {
        let m = [m1, m2, m3];
        for (i, &mi) in m.iter().enumerate() {
            if !mi.is_finite() {
                return Err(Error::NonFinite("masses"));
            }
            if mi <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "mass m{} = {mi} must be strictly positive",
                    i + 1
                )));
            }
        }
        Ok(Self(m))
    }

    pub fn equal(m: f64) -> Result<Self> {
        Self::new(m, m, m)
    }

    pub fn as_array(&self) -> [f64; 3] {
        self.0
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn product(&self) -> f64 {
        self.0.iter().product()
    }

    pub fn is_equal(&self) -> bool {
        self.0[0] == self.0[1] && self.0[1] == self.0[2]
    }
}

/// Time, positions and momenta of the three bodies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseState {
    pub t: f64,
    pub q: [Vec2; 3],
    pub p: [Vec2; 3],
}

impl PhaseState {
    pub fn new(t: f64, q: [Vec2; 3], p: [Vec2; 3]) -> Self {
        Self { t, q, p }
    }

    pub fn from_velocities(t: f64, q: [Vec2; 3], v: [Vec2; 3], masses: &Masses) -> Self {
        let p = std::array::from_fn(|k| v[k] * masses.get(k));
        Self { t, q, p }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.q.iter().all(|v| v.is_finite()) && self.p.iter().all(|v| v.is_finite())
    }

    pub fn ensure_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite("phase state"))
        }
    }

    pub fn velocities(&self, masses: &Masses) -> [Vec2; 3] {
        std::array::from_fn(|k| self.p[k] / masses.get(k))
    }

    pub fn centre_of_mass(&self, masses: &Masses) -> Vec2 {
        let mut c = Vec2::ZERO;
        for k in 0..3 {
            c += self.q[k] * masses.get(k);
        }
        c / masses.total()
    }

    pub fn total_momentum(&self) -> Vec2 {
        self.p[0] + self.p[1] + self.p[2]
    }

    pub fn angular_momentum(&self) -> f64 {
        (0..3).map(|k| self.q[k].wedge(self.p[k])).sum()
    }

    /// `Σ q_k · p_k`, half the rate of change of the moment of inertia.
    pub fn virial(&self) -> f64 {
        (0..3).map(|k| self.q[k].dot(self.p[k])).sum()
    }

    pub fn inertia(&self, masses: &Masses) -> f64 {
        (0..3).map(|k| masses.get(k) * self.q[k].norm_sq()).sum()
    }

    /// Twice the kinetic energy, `Σ p_k² / m_k`.
    pub fn twice_kinetic(&self, masses: &Masses) -> f64 {
        (0..3).map(|k| self.p[k].norm_sq() / masses.get(k)).sum()
    }

    /// Mutual distances in cyclic order `[r12, r23, r31]`.
    pub fn distances(&self) -> [f64; 3] {
        CYCLIC.map(|(i, j, _)| (self.q[i] - self.q[j]).norm())
    }

    /// Oriented area `½ (q2 − q1) ∧ (q3 − q1)`.
    pub fn oriented_area(&self) -> f64 {
        0.5 * (self.q[1] - self.q[0]).wedge(self.q[2] - self.q[0])
    }

    /// Largest mutual distance; the natural length unit of a configuration.
    pub fn length_scale(&self) -> f64 {
        self.distances().into_iter().fold(0.0, f64::max)
    }

    pub fn recentred(&self, masses: &Masses) -> Self {
        let c = self.centre_of_mass(masses);
        Self {
            t: self.t,
            q: self.q.map(|q| q - c),
            p: self.p,
        }
    }

    pub fn rotated(&self, angle: f64) -> Self {
        Self {
            t: self.t,
            q: self.q.map(|v| v.rotate(angle)),
            p: self.p.map(|v| v.rotate(angle)),
        }
    }
}

/// Scalar quantities evaluated at a single state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivedQuantities {
    pub total_mass: f64,
    pub inertia: f64,
    pub twice_kinetic: f64,
    pub angular_momentum: f64,
    /// `dI/dt = 2 Σ q_k · p_k`.
    pub inertia_rate: f64,
    pub potential: f64,
    pub energy: f64,
    /// Ratio of magnification `√(m1 m2 m3 K / (M I))`.
    pub kappa: f64,
    pub delta: f64,
    pub distances: [f64; 3],
}

pub fn derived_quantities(state: &PhaseState, potential: &PotentialSpec) -> Result<DerivedQuantities> {
    state.ensure_finite()?;
    let masses = &potential.masses;
    let total_mass = masses.total();
    let inertia = state.inertia(masses);
    let twice_kinetic = state.twice_kinetic(masses);
    let v = potential.potential_energy(&state.q)?;
    if inertia == 0.0 {
        return Err(Error::TripleCollision);
    }
    let kappa = (masses.product() * twice_kinetic / (total_mass * inertia)).sqrt();
    Ok(DerivedQuantities {
        total_mass,
        inertia,
        twice_kinetic,
        angular_momentum: state.angular_momentum(),
        inertia_rate: 2.0 * state.virial(),
        potential: v,
        energy: 0.5 * twice_kinetic + v,
        kappa,
        delta: state.oriented_area(),
        distances: state.distances(),
    })
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Kinematic snapshot satisfying Σp = 0, L = 0 and Σ q·p = 0 with unit masses.
    pub fn st1() -> (PhaseState, Masses) {
        let q = [Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0), Vec2::new(-1.0, -1.0)];
        let p = [Vec2::new(1.0, 1.0), Vec2::new(-0.2, -1.4), Vec2::new(-0.8, 0.4)];
        (PhaseState::new(0.0, q, p), Masses::equal(1.0).unwrap())
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::st1;
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn st1_derived_quantities() {
        let (s, m) = st1();
        let d = derived_quantities(&s, &PotentialSpec::new(2.0, m)).unwrap();
        assert_abs_diff_eq!(d.inertia, 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.twice_kinetic, 4.8, epsilon = 1e-14);
        assert_abs_diff_eq!(d.angular_momentum, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.inertia_rate, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.kappa, 0.4f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(d.delta, 1.5, epsilon = 1e-15);
        assert_eq!(d.total_mass, 3.0);
    }

    #[test]
    fn equilateral_at_rest() {
        let m = Masses::equal(1.0).unwrap();
        let q = [0.0, 1.0, 2.0].map(|k: f64| Vec2::from_polar(1.0, k * 2.0 * std::f64::consts::PI / 3.0));
        let s = PhaseState::new(0.0, q, [Vec2::ZERO; 3]);
        let d = derived_quantities(&s, &PotentialSpec::new(-1.0, m)).unwrap();
        assert_eq!(d.twice_kinetic, 0.0);
        assert_eq!(d.kappa, 0.0);
        assert_abs_diff_eq!(d.angular_momentum, 0.0);
        let side = 3f64.sqrt();
        assert_abs_diff_eq!(d.delta, side * side * 3f64.sqrt() / 4.0, epsilon = 1e-14);
    }

    #[test]
    fn collinear_has_zero_area() {
        let m = Masses::new(1.0, 2.0, 1.0).unwrap();
        let q = [Vec2::new(1.0, 0.0), Vec2::new(0.3, 0.0), Vec2::new(-1.0, 0.0)];
        let s = PhaseState::new(0.0, q, [Vec2::ZERO; 3]).recentred(&m);
        let d = derived_quantities(&s, &PotentialSpec::new(-1.0, m)).unwrap();
        assert_eq!(d.delta, 0.0);
    }

    #[test]
    fn coincident_bodies_are_a_collision_singularity() {
        let m = Masses::equal(1.0).unwrap();
        let q = [Vec2::new(1.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(-2.0, 0.0)];
        let s = PhaseState::new(0.0, q, [Vec2::ZERO; 3]);
        let err = derived_quantities(&s, &PotentialSpec::new(-1.0, m)).unwrap_err();
        assert_eq!(err, Error::CollisionSingularity(0, 1));
        // α = 2 has no singularity at a binary collision
        assert!(derived_quantities(&s, &PotentialSpec::new(2.0, m)).is_ok());
    }

    #[test]
    fn triple_collision_rejected() {
        let m = Masses::equal(1.0).unwrap();
        let s = PhaseState::new(0.0, [Vec2::ZERO; 3], [Vec2::new(1.0, 0.0); 3]);
        let err = derived_quantities(&s, &PotentialSpec::new(2.0, m)).unwrap_err();
        assert_eq!(err, Error::TripleCollision);
    }

    #[test]
    fn non_finite_rejected() {
        let (mut s, m) = st1();
        s.p[1].x = f64::NAN;
        assert!(matches!(
            derived_quantities(&s, &PotentialSpec::new(2.0, m)),
            Err(Error::NonFinite(_))
        ));
        assert!(Masses::new(1.0, -1.0, 1.0).is_err());
        assert!(Masses::new(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn area_balance_on_st1() {
        let (s, m) = st1();
        let v = s.velocities(&m);
        let (i, k) = (s.inertia(&m), s.twice_kinetic(&m));
        for (a, b, _) in CYCLIC {
            let r = s.q[a].wedge(s.q[b]) / i + v[a].wedge(v[b]) / k;
            assert!(r.abs() < 1e-15, "pair ({a},{b}) residual {r}");
        }
    }
}
