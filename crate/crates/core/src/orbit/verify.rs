use super::{phase_distance, OrbitRecord};
use crate::conserved::{constant_report, energy_partition_check, momentum_force_residuals};
use crate::dynamics::{integrate, IntegrateOptions, Trajectory};
use crate::error::{Error, Result};
use crate::geometry::{
    centre_of_normals_with, centre_of_tangents_with, circumcircle, similarity_report_with, Residual, ResidualSet,
};
use crate::scaling::{scale_state, scaled_similarity_report};
use crate::state::{PhaseState, Tolerances};
use crate::syzygy::{detect_events, EventKind, EventOptions};
use crate::vec2::Vec2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyOptions {
    pub integrator: IntegrateOptions,
    pub periodicity_tol: f64,
    pub angular_momentum_tol: f64,
    pub drift_tol: f64,
    pub kappa_tol: f64,
    /// Tolerance for the similarity, constant and force-space identities.
    pub identity_tol: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            integrator: IntegrateOptions::with_tolerances(1e-13, 1e-15),
            periodicity_tol: 1e-8,
            angular_momentum_tol: 1e-11,
            drift_tol: 1e-7,
            kappa_tol: 1e-7,
            identity_tol: 1e-6,
        }
    }
}

/// Centre of tangents, centre of normals and circumcentre at one instant;
/// `None` where the point is undefined (parallel lines or collinear bodies).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LociSample {
    pub t: f64,
    pub ct: Option<Vec2>,
    pub cn: Option<Vec2>,
    pub co: Option<Vec2>,
}

#[derive(Clone, Debug)]
pub struct OrbitCertificate {
    pub residuals: ResidualSet,
    /// Checks that could not be evaluated, with the reason.
    pub failures: Vec<String>,
    pub syzygies_per_period: usize,
    /// Syzygies with each body in the middle.
    pub middle_counts: [usize; 3],
    /// Samples where the constant-inertia similarity report refused to run.
    pub similarity_refusals: usize,
    pub samples: usize,
    /// Smallest `|p_k|` over the period (recorded for `α = −2`).
    pub min_momentum: Option<f64>,
    pub loci: Vec<LociSample>,
    pub trajectory: Trajectory,
}

impl OrbitCertificate {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.residuals.all_pass()
    }
}

/// Re-integrates a record over one period and certifies it. Failures are
/// collected in the report rather than returned as errors.
pub fn verify_orbit(record: &OrbitRecord, opts: &VerifyOptions) -> Result<OrbitCertificate> {
    let pot = record.potential();
    let masses = record.masses;
    let t_end = record.period;
    let traj = integrate(&record.initial, &pot, (0.0, t_end), &opts.integrator)?;
    let mut res = ResidualSet::new();
    let mut failures = Vec::new();

    let end = PhaseState { t: 0.0, ..*traj.last() };
    let periodicity = if traj.meta().termination.is_collision() {
        f64::INFINITY
    } else {
        phase_distance(&record.initial, &end, &masses)
    };
    res.push(Residual::new("periodicity", None, periodicity, opts.periodicity_tol));
    let l_max = traj
        .samples()
        .iter()
        .map(|s| s.angular_momentum().abs())
        .fold(0.0, f64::max);
    res.push(Residual::new(
        "angular-momentum",
        None,
        l_max,
        opts.angular_momentum_tol,
    ));
    res.push(Residual::new(
        "energy-drift",
        None,
        traj.meta().relative_energy_drift(),
        opts.drift_tol,
    ));

    // Syzygies over one period, starting away from the collinear initial instant.
    let phase = t_end / 12.0;
    let shifted = traj.state_at(phase)?;
    let window = integrate(&shifted, &pot, (phase, phase + t_end), &opts.integrator)?;
    let events = detect_events(&window, &EventOptions::default())?;
    let mut middle_counts = [0usize; 3];
    let mut syzygies = 0;
    for e in &events {
        if let EventKind::Syzygy { middle } = e.kind {
            syzygies += 1;
            middle_counts[middle] += 1;
        }
    }

    let gate = Tolerances { abs: 1e-12, rel: 1e-8 };
    let mut refusals = 0;
    let mut loci = Vec::new();
    let mut min_momentum = None;
    if pot.alpha == -2.0 {
        let (i_lo, i_hi) = traj
            .samples()
            .iter()
            .map(|s| s.inertia(&masses))
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), i| (lo.min(i), hi.max(i)));
        res.push(Residual::new(
            "inertia-drift",
            None,
            (i_hi - i_lo) / i_hi,
            opts.drift_tol,
        ));

        let (mut kappa, mut other, mut inner, mut outer) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for s in traj.samples() {
            match similarity_report_with(s, &masses, &gate) {
                Ok(rep) => {
                    kappa = kappa.max(rep.max_abs_of("kappa"));
                    for r in rep.iter().filter(|r| r.check != "kappa") {
                        other = other.max(r.value.abs());
                    }
                }
                Err(err) => {
                    refusals += 1;
                    failures.push(format!("t={}: {err}", s.t));
                }
            }
            let mf = momentum_force_residuals(s, &masses, pot.alpha)?;
            inner = inner.max(mf.inner.abs());
            outer = outer.max(mf.outer.abs());
            let ct = centre_of_tangents_with(s, &masses, &gate).ok().and_then(|c| c.point());
            let cn = centre_of_normals_with(s, &masses, &gate).ok().and_then(|c| c.point());
            loci.push(LociSample {
                t: s.t,
                ct,
                cn,
                co: circumcircle(&s.q).ok().map(|c| c.center),
            });
        }
        res.push(Residual::new("kappa", None, kappa, opts.kappa_tol));
        res.push(Residual::new("similarity", None, other, opts.identity_tol));
        res.push(Residual::new("force-inner", None, inner, opts.drift_tol));
        res.push(Residual::new("force-outer", None, outer, opts.drift_tol));

        let c = constant_report(&traj, -2.0)?;
        min_momentum = Some(c.min_momentum);
        res.push(Residual::new("constant-drift", None, c.drift, opts.drift_tol));
        res.push(Residual::new(
            "constant-reference",
            None,
            c.reference_deviation.unwrap_or(f64::NAN),
            opts.identity_tol,
        ));
        match energy_partition_check(&traj, -2.0) {
            Ok(rep) => res.extend(rep),
            Err(err) => failures.push(format!("energy partition: {err}")),
        }
    } else {
        let mut scaled_max = 0.0f64;
        for s in traj.samples() {
            match similarity_report_with(s, &masses, &Tolerances::default()) {
                Err(Error::HypothesisViolated { .. }) => refusals += 1,
                Err(err) => failures.push(format!("t={}: {err}", s.t)),
                Ok(_) => {}
            }
            match scale_state(s, &masses).and_then(|sc| scaled_similarity_report(&sc, &masses)) {
                Ok(rep) => scaled_max = scaled_max.max(rep.max_abs()),
                Err(err) => failures.push(format!("scaled t={}: {err}", s.t)),
            }
        }
        res.push(Residual::new("scaled-similarity", None, scaled_max, 1e-9));
    }

    Ok(OrbitCertificate {
        residuals: res,
        failures,
        syzygies_per_period: syzygies,
        middle_counts,
        similarity_refusals: refusals,
        samples: traj.samples().len(),
        min_momentum,
        loci,
        trajectory: traj,
    })
}
