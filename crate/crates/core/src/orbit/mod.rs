//! Symmetric periodic orbits: quarter-period shooting from the Euler
//! configuration, certification, and a checksummed line-oriented library.

mod library;
mod shoot;
mod verify;

pub use library::{append_record, format_record, parse_guesses, parse_record, read_library, Guess};
pub use shoot::{shoot_periodic, ShootOptions};
pub use verify::{verify_orbit, LociSample, OrbitCertificate, VerifyOptions};

use crate::dynamics::{integrate, IntegrateOptions, PotentialSpec};
use crate::error::Result;
use crate::state::{Masses, PhaseState};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbitResiduals {
    /// `|Φ_T(x₀) − x₀|`, positions over `√(I/M)` and velocities over `√(K/M)`.
    pub periodicity: f64,
    /// Largest symmetry residual at the quarter period, same scaling.
    pub quarter: f64,
    pub angular_momentum: f64,
    pub energy: f64,
    /// Relative spread of `I` over one period; recorded for `α = −2`.
    pub inertia_drift: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Provenance {
    pub guess: String,
    pub iterations: usize,
    pub rtol: f64,
    pub atol: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitRecord {
    pub alpha: f64,
    pub masses: Masses,
    pub initial: PhaseState,
    pub period: f64,
    pub residuals: OrbitResiduals,
    pub provenance: Provenance,
}

impl OrbitRecord {
    pub fn potential(&self) -> PotentialSpec {
        PotentialSpec::new(self.alpha, self.masses)
    }
}

/// Scaled distance between two states: positions over `√(I/M)` and
/// velocities over `√(K/M)` of the reference state.
pub fn phase_distance(a: &PhaseState, b: &PhaseState, masses: &Masses) -> f64 {
    let total = masses.total();
    let r = (a.inertia(masses) / total).sqrt();
    let v = (a.twice_kinetic(masses) / total).sqrt();
    let va = a.velocities(masses);
    let vb = b.velocities(masses);
    (0..3)
        .map(|k| ((a.q[k] - b.q[k]).norm() / r).max((va[k] - vb[k]).norm() / v))
        .fold(0.0, f64::max)
}

/// Integrates one period and measures closure, conservation and `I` spread.
pub(crate) fn measure(
    initial: &PhaseState,
    potential: &PotentialSpec,
    period: f64,
    quarter: f64,
    opts: &IntegrateOptions,
) -> Result<OrbitResiduals> {
    let traj = integrate(initial, potential, (0.0, period), opts)?;
    let masses = &potential.masses;
    let end = traj.last();
    let periodicity = if traj.meta().termination.is_collision() {
        f64::INFINITY
    } else {
        phase_distance(initial, &PhaseState { t: 0.0, ..*end }, masses)
    };
    let (mut i_lo, mut i_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in traj.samples() {
        let i = s.inertia(masses);
        i_lo = i_lo.min(i);
        i_hi = i_hi.max(i);
    }
    let e0 = traj.meta().initial_energy;
    Ok(OrbitResiduals {
        periodicity,
        quarter,
        angular_momentum: initial.angular_momentum().abs().max(end.angular_momentum().abs()),
        energy: e0,
        inertia_drift: (potential.alpha == -2.0).then(|| (i_hi - i_lo) / i_hi),
    })
}
