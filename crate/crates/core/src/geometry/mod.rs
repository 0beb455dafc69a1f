//! Concurrency of tangent and normal lines, the circumcircle diameter
//! property, synchronised similarity, and the algebraic similarity oracle.

mod algebraic;
mod lines;

pub use algebraic::{
    conjugate_jacobi, from_jacobi, jacobi_coordinates, moment, theorem5_sample, theorem5_verify, theorem5_verify_with,
    AlgebraicTriplet,
};
pub use lines::{
    centre_of_normals, centre_of_normals_with, centre_of_tangents, centre_of_tangents_with, circumcircle,
    circumcircle_check, circumcircle_check_with, similarity_report, similarity_report_with, CircumcircleReport,
    Circumdata, Concurrency, ConcurrencyKind, CONCURRENCY_TOL,
};

use std::fmt;

use crate::error::{Error, Result};
use crate::state::{Masses, PhaseState, Tolerances};
use crate::vec2::Vec2;

/// A single named residual with the tolerance it is judged against.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Residual {
    pub check: &'static str,
    /// Zero-based body pair, if the residual belongs to one.
    pub pair: Option<(usize, usize)>,
    pub value: f64,
    pub tolerance: f64,
}

impl Residual {
    pub fn new(check: &'static str, pair: Option<(usize, usize)>, value: f64, tolerance: f64) -> Self {
        Self {
            check,
            pair,
            value,
            tolerance,
        }
    }

    pub fn passes(&self) -> bool {
        self.value.abs() <= self.tolerance
    }

    pub fn pair_label(&self) -> String {
        match self.pair {
            Some((i, j)) => format!("{}{}", i + 1, j + 1),
            None => "-".to_string(),
        }
    }
}

impl fmt::Display for Residual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "theorem={} pair={} residual={:.6e} tol={:.1e} status={}",
            self.check,
            self.pair_label(),
            self.value,
            self.tolerance,
            if self.passes() { "PASS" } else { "FAIL" }
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ResidualSet(pub Vec<Residual>);

impl ResidualSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, r: Residual) {
        self.0.push(r);
    }

    pub fn extend(&mut self, other: ResidualSet) {
        self.0.extend(other.0);
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Residual> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn all_pass(&self) -> bool {
        self.0.iter().all(Residual::passes)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|r| r.value.abs()).fold(0.0, f64::max)
    }

    pub fn max_abs_of(&self, check: &str) -> f64 {
        self.0
            .iter()
            .filter(|r| r.check == check)
            .map(|r| r.value.abs())
            .fold(0.0, f64::max)
    }

    pub fn get(&self, check: &str, pair: Option<(usize, usize)>) -> Option<&Residual> {
        self.0.iter().find(|r| r.check == check && r.pair == pair)
    }
}

impl<'a> IntoIterator for &'a ResidualSet {
    type Item = &'a Residual;
    type IntoIter = std::slice::Iter<'a, Residual>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Constraints a state may be required to satisfy before a check runs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Hypothesis {
    Centroid,
    LinearMomentum,
    AngularMomentum,
    ConstantInertia,
}

impl Hypothesis {
    fn name(self) -> &'static str {
        match self {
            Hypothesis::Centroid => "centre of mass",
            Hypothesis::LinearMomentum => "linear momentum",
            Hypothesis::AngularMomentum => "L=0",
            Hypothesis::ConstantInertia => "I=const",
        }
    }
}

pub(crate) fn require(state: &PhaseState, masses: &Masses, hyps: &[Hypothesis], tol: &Tolerances) -> Result<()> {
    state.ensure_finite()?;
    let qp_scale: f64 = (0..3).map(|k| state.q[k].norm() * state.p[k].norm()).sum();
    for &h in hyps {
        let (residual, scale) = match h {
            Hypothesis::Centroid => (
                (0..3)
                    .fold(Vec2::ZERO, |acc, k| acc + state.q[k] * masses.get(k))
                    .norm(),
                (0..3).map(|k| masses.get(k) * state.q[k].norm()).sum(),
            ),
            Hypothesis::LinearMomentum => (state.total_momentum().norm(), state.p.iter().map(|p| p.norm()).sum()),
            Hypothesis::AngularMomentum => (state.angular_momentum().abs(), qp_scale),
            Hypothesis::ConstantInertia => (state.virial().abs(), qp_scale),
        };
        let tolerance = tol.abs + tol.rel * scale;
        if residual > tolerance {
            return Err(Error::HypothesisViolated {
                constraint: h.name(),
                residual,
                tolerance,
            });
        }
    }
    Ok(())
}
