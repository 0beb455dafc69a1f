use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Residual, ResidualSet};
use crate::error::{Error, Result};
use crate::state::{Tolerances, CYCLIC};
use crate::vec2::Vec2;

/// Weights `μ` and two vector triplets `ξ`, `ξ̄` with
/// `Σμξ = Σμξ̄ = Σμ ξ∧ξ̄ = Σμ ξ·ξ̄ = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlgebraicTriplet {
    pub mu: [f64; 3],
    pub xi: [Vec2; 3],
    pub xibar: [Vec2; 3],
}

/// `I(η) = Σ μ_k η_k²`.
pub fn moment(mu: &[f64; 3], eta: &[Vec2; 3]) -> f64 {
    (0..3).map(|k| mu[k] * eta[k].norm_sq()).sum()
}

fn rho_sigma(mu: &[f64; 3]) -> (f64, f64) {
    let s12 = mu[0] + mu[1];
    let total = s12 + mu[2];
    ((s12 * total / mu[2]).sqrt(), (mu[0] * mu[1] / s12).sqrt())
}

/// Jacobi vectors `(a, b)` of a centred triplet, normalised so that
/// `Σ μ ξ·η = a·a' + b·b'`.
pub fn jacobi_coordinates(mu: &[f64; 3], xi: &[Vec2; 3]) -> (Vec2, Vec2) {
    let (rho, sigma) = rho_sigma(mu);
    let s12 = mu[0] + mu[1];
    let a = (xi[0] * mu[0] + xi[1] * mu[1]) * (rho / s12);
    let b = (xi[0] - xi[1]) * sigma;
    (a, b)
}

/// Inverse of [`jacobi_coordinates`]; the result is centred.
pub fn from_jacobi(mu: &[f64; 3], a: Vec2, b: Vec2) -> [Vec2; 3] {
    let (rho, sigma) = rho_sigma(mu);
    let s12 = mu[0] + mu[1];
    let c = a / rho;
    let d = b / sigma;
    [c + d * (mu[1] / s12), c - d * (mu[0] / s12), c * (-s12 / mu[2])]
}

/// The `b̄` that makes `a∧ā + b∧b̄ = 0` and `a·ā + b·b̄ = 0`.
pub fn conjugate_jacobi(a: Vec2, abar: Vec2, b: Vec2) -> Vec2 {
    let len = a.norm() * abar.norm() / b.norm();
    Vec2::from_polar(len, abar.angle() - a.angle() + b.angle() + PI)
}

fn hypothesis_residuals(t: &AlgebraicTriplet) -> [(f64, f64); 4] {
    let mu = &t.mu;
    let sum = |f: &dyn Fn(usize) -> Vec2| (0..3).fold(Vec2::ZERO, |acc, k| acc + f(k));
    let c1 = sum(&|k| t.xi[k] * mu[k]).norm();
    let s1: f64 = (0..3).map(|k| mu[k] * t.xi[k].norm()).sum();
    let c2 = sum(&|k| t.xibar[k] * mu[k]).norm();
    let s2: f64 = (0..3).map(|k| mu[k] * t.xibar[k].norm()).sum();
    let s3: f64 = (0..3).map(|k| mu[k] * t.xi[k].norm() * t.xibar[k].norm()).sum();
    let w: f64 = (0..3).map(|k| mu[k] * t.xi[k].wedge(t.xibar[k])).sum();
    let d: f64 = (0..3).map(|k| mu[k] * t.xi[k].dot(t.xibar[k])).sum();
    [(c1, s1), (c2, s2), (w.abs(), s3), (d.abs(), s3)]
}

impl AlgebraicTriplet {
    /// Largest hypothesis residual relative to its natural scale.
    pub fn hypothesis_residual(&self) -> f64 {
        hypothesis_residuals(self)
            .iter()
            .map(|&(r, s)| if s > 0.0 { r / s } else { r })
            .fold(0.0, f64::max)
    }
}

/// Residuals of the three equivalent side/moment relations and the area
/// relation, one group per cyclic pair.
pub fn theorem5_verify(triplet: &AlgebraicTriplet) -> Result<ResidualSet> {
    theorem5_verify_with(triplet, &Tolerances::default())
}

pub fn theorem5_verify_with(t: &AlgebraicTriplet, tol: &Tolerances) -> Result<ResidualSet> {
    let all_finite =
        t.mu.iter().all(|m| m.is_finite() && *m > 0.0) && t.xi.iter().chain(t.xibar.iter()).all(|v| v.is_finite());
    if !all_finite {
        return Err(Error::NotSimilarityInstance(
            "weights must be positive and vectors finite".into(),
        ));
    }
    let names = ["Σμξ", "Σμξ̄", "Σμ ξ∧ξ̄", "Σμ ξ·ξ̄"];
    for (n, (r, s)) in hypothesis_residuals(t).into_iter().enumerate() {
        if r > tol.abs + tol.rel * s {
            return Err(Error::NotSimilarityInstance(format!("{} = {r:e}", names[n])));
        }
    }
    let ix = moment(&t.mu, &t.xi);
    let ib = moment(&t.mu, &t.xibar);
    if ix == 0.0 || ib == 0.0 {
        return Err(Error::NotSimilarityInstance("a triplet has zero moment".into()));
    }
    let mu = &t.mu;
    let total: f64 = mu.iter().sum();
    let (x, xb) = (&t.xi, &t.xibar);
    let mut out = ResidualSet::new();
    for &(i, j, k) in CYCLIC.iter() {
        let pair = Some((i, j));
        let own = mu[k] * x[k].norm_sq() / ix;
        let own_bar = mu[k] * xb[k].norm_sq() / ib;
        let side = mu[i] * mu[j] * (x[i] - x[j]).norm_sq() / (total * ix);
        let side_bar = mu[i] * mu[j] * (xb[i] - xb[j]).norm_sq() / (total * ib);
        out.push(Residual::new("algebraic-side", pair, own - side_bar, tol.rel));
        out.push(Residual::new("algebraic-side-mirror", pair, own_bar - side, tol.rel));
        out.push(Residual::new(
            "algebraic-moment",
            pair,
            own + own_bar - (mu[i] + mu[j]) / total,
            tol.rel,
        ));
        // Area terms carry units of 1/μ; compare against the mean weight.
        let area = x[i].wedge(x[j]) / ix + xb[i].wedge(xb[j]) / ib;
        out.push(Residual::new("algebraic-area", pair, area * total / 3.0, tol.rel));
    }
    Ok(out)
}

/// Draws a random triplet satisfying all four hypotheses by construction:
/// random weights and Jacobi vectors `a`, `b`, `ā`, with `b̄` from
/// [`conjugate_jacobi`].
pub fn theorem5_sample(seed: u64) -> AlgebraicTriplet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mu = std::array::from_fn(|_| 10f64.powf(rng.random_range(-1.0..1.0)));
    let draw = |rng: &mut ChaCha8Rng| {
        let r = 10f64.powf(rng.random_range(-1.0..0.5));
        Vec2::from_polar(r, rng.random_range(0.0..2.0 * PI))
    };
    let a = draw(&mut rng);
    let abar = draw(&mut rng);
    let b = loop {
        let b = draw(&mut rng);
        if b.norm() >= 1e-8 {
            break b;
        }
    };
    let bbar = conjugate_jacobi(a, abar, b);
    AlgebraicTriplet {
        mu,
        xi: from_jacobi(&mu, a, b),
        xibar: from_jacobi(&mu, abar, bbar),
    }
}
