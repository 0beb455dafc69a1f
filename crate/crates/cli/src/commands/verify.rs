use std::io::Write;

use tribody::conserved::{constant_report, energy_partition_check, inertia_constancy, INERTIA_CONST_TOL};
use tribody::geometry::{
    centre_of_normals_with, centre_of_tangents_with, circumcircle, circumcircle_check_with, similarity_report_with,
    Residual,
};
use tribody::orbit::{verify_orbit, OrbitRecord, VerifyOptions};
use tribody::scaling::{general_area_residual, scale_state, scaled_similarity_report_with};
use tribody::{Error, Masses, PhaseState, Result, Tolerances};

use super::{create, flush, row, trajectory};
use crate::config::{Initial, RunConfig};
use crate::report::{fmt_opt, Summary};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Plain,
    Scaled,
    Constants,
}

const SCALED_INVARIANT_TOL: f64 = 1e-11;
const AREA_TOL: f64 = 1e-9;
const REFERENCE_TOL: f64 = 1e-6;

pub const LOCI_HEADER: &str = "t,q1x,q1y,q2x,q2y,q3x,q3y,ctx,cty,cnx,cny,cox,coy";
pub const SCALED_HEADER: &str = "t,qt1x,qt1y,qt2x,qt2y,qt3x,qt3y,w1x,w1y,w2x,w2y,w3x,w3y";

pub fn run(cfg: &RunConfig, mode: Mode, out: &mut impl Write) -> Result<bool> {
    match mode {
        Mode::Plain => plain(cfg, out),
        Mode::Scaled => scaled(cfg, out),
        Mode::Constants => constants(cfg, out),
    }
}

fn f(x: f64) -> String {
    format!("{x:.16e}")
}

fn states(cfg: &RunConfig) -> Result<Vec<PhaseState>> {
    match trajectory(cfg)? {
        Some(traj) => traj.uniform_states(cfg.samples),
        None => Ok(vec![cfg.initial_state()]),
    }
}

fn geometry(s: &PhaseState, masses: &Masses, tol: &Tolerances, summary: &mut Summary) {
    match circumcircle_check_with(s, masses, tol) {
        Ok(rep) => summary.absorb(&rep.residuals),
        Err(e) => summary.error("circumcircle", &e),
    }
    match similarity_report_with(s, masses, tol) {
        Ok(rep) => summary.absorb(&rep),
        Err(e) => summary.error("similarity", &e),
    }
}

fn loci_row(s: &PhaseState, masses: &Masses, tol: &Tolerances) -> String {
    let point = |p: Option<tribody::Vec2>| [fmt_opt(p.map(|v| v.x)), fmt_opt(p.map(|v| v.y))];
    let mut fields = vec![f(s.t)];
    for q in s.q {
        fields.extend([f(q.x), f(q.y)]);
    }
    fields.extend(point(
        centre_of_tangents_with(s, masses, tol).ok().and_then(|c| c.point()),
    ));
    fields.extend(point(
        centre_of_normals_with(s, masses, tol).ok().and_then(|c| c.point()),
    ));
    fields.extend(point(circumcircle(&s.q).ok().map(|c| c.center)));
    row(&fields)
}

fn write_loci(cfg: &RunConfig, states: &[PhaseState], tol: &Tolerances) -> Result<()> {
    if let Some(dir) = &cfg.output_dir {
        let mut w = create(dir, "loci.csv")?;
        writeln!(w, "{LOCI_HEADER}")?;
        for s in states {
            writeln!(w, "{}", loci_row(s, &cfg.potential.masses, tol))?;
        }
        flush(w)?;
    }
    Ok(())
}

/// Geometric identities at the initial state, at sampled times along a
/// trajectory, or the full certificate of a library orbit.
fn plain(cfg: &RunConfig, out: &mut impl Write) -> Result<bool> {
    if let (Initial::Record(record), None) = (&cfg.initial, cfg.t_end) {
        return orbit(cfg, record, out);
    }
    let masses = cfg.potential.masses;
    let states = states(cfg)?;
    let mut summary = Summary::default();
    for s in &states {
        geometry(s, &masses, &cfg.tolerances, &mut summary);
    }
    if states.len() > 1 {
        writeln!(out, "samples={}", states.len())?;
    }
    write_loci(cfg, &states, &cfg.tolerances)?;
    Ok(summary.print(out)?)
}

fn orbit(cfg: &RunConfig, record: &OrbitRecord, out: &mut impl Write) -> Result<bool> {
    let cert = verify_orbit(record, &VerifyOptions::default())?;
    let m = cert.middle_counts;
    writeln!(
        out,
        "period={:.16e} syzygies={} middle={},{},{} samples={} refusals={}",
        record.period, cert.syzygies_per_period, m[0], m[1], m[2], cert.samples, cert.similarity_refusals
    )?;
    let mut summary = Summary::default();
    summary.absorb(&cert.residuals);
    let mut pass = summary.print(out)?;
    for reason in &cert.failures {
        writeln!(out, "theorem=orbit pair=- error=\"{reason}\" status=FAIL")?;
        pass = false;
    }
    // Loci tolerate the looser gate the certificate uses for constant inertia.
    let gate = Tolerances {
        abs: cfg.tolerances.abs,
        rel: cfg.tolerances.rel.max(1e-8),
    };
    write_loci(cfg, &cert.trajectory.uniform_states(cfg.samples)?, &gate)?;
    Ok(pass)
}

const SCALED_NAMES: [&str; 5] = [
    "scaled-inertia",
    "scaled-centroid",
    "scaled-momentum",
    "scaled-angular",
    "scaled-rate",
];

/// Identities of the scaled variables; writes the congruent triangle pairs.
fn scaled(cfg: &RunConfig, out: &mut impl Write) -> Result<bool> {
    let masses = cfg.potential.masses;
    let states = states(cfg)?;
    let mut summary = Summary::default();
    let mut rows = Vec::with_capacity(states.len());
    for s in &states {
        let sc = match scale_state(s, &masses) {
            Ok(sc) => sc,
            Err(e) => {
                summary.error("scaled", &e);
                continue;
            }
        };
        for (name, v) in SCALED_NAMES.iter().zip(sc.invariant_residuals(&masses)) {
            summary.push(Residual::new(name, None, v, SCALED_INVARIANT_TOL));
        }
        match scaled_similarity_report_with(&sc, &masses, &cfg.tolerances) {
            Ok(rep) => summary.absorb(&rep),
            Err(e) => summary.error("scaled-similarity", &e),
        }
        for pair in [(0, 1), (1, 2), (2, 0)] {
            match general_area_residual(s, &masses, pair) {
                Ok(a) => summary.push(Residual::new("general-area", Some(pair), a.relative(), AREA_TOL)),
                Err(e) => summary.error("general-area", &e),
            }
        }
        match sc.perimeter_triangle(&masses) {
            Ok(w) => {
                let mut fields = vec![f(sc.t)];
                for v in sc.qt.iter().chain(w.iter()) {
                    fields.extend([f(v.x), f(v.y)]);
                }
                rows.push(row(&fields));
            }
            Err(e) => summary.error("perimeter-triangle", &e),
        }
    }
    if let Some(dir) = &cfg.output_dir {
        let mut w = create(dir, "scaled.csv")?;
        writeln!(w, "{SCALED_HEADER}")?;
        for r in &rows {
            writeln!(w, "{r}")?;
        }
        flush(w)?;
    }
    Ok(summary.print(out)?)
}

/// The momentum-weighted constant, constant-inertia rates and the energy split.
fn constants(cfg: &RunConfig, out: &mut impl Write) -> Result<bool> {
    let traj = trajectory(cfg)?.ok_or_else(|| Error::InvalidInput("--constants needs a trajectory".into()))?;
    let alpha = cfg.potential.alpha;
    let mut summary = Summary::default();
    match constant_report(&traj, alpha) {
        Ok(rep) => {
            if let Some(dir) = &cfg.output_dir {
                let mut w = create(dir, "constants.csv")?;
                writeln!(w, "t,value")?;
                for (t, c) in &rep.series {
                    writeln!(w, "{},{}", f(*t), f(*c))?;
                }
                flush(w)?;
            }
            writeln!(
                out,
                "samples={} min_momentum={:.6e}",
                rep.series.len(),
                rep.min_momentum
            )?;
            summary.push(Residual::new("constant-drift", None, rep.drift, cfg.drift_tol));
            if let Some(dev) = rep.reference_deviation {
                summary.push(Residual::new("constant-reference", None, dev, REFERENCE_TOL));
            }
        }
        Err(e) => summary.error("constant", &e),
    }
    let (rate, accel) = inertia_constancy(&traj)?;
    summary.push(Residual::new("inertia-rate", None, rate, INERTIA_CONST_TOL));
    summary.push(Residual::new("inertia-acceleration", None, accel, INERTIA_CONST_TOL));
    match energy_partition_check(&traj, alpha) {
        Ok(rep) => summary.absorb(&rep),
        Err(e) => summary.error("energy-partition", &e),
    }
    Ok(summary.print(out)?)
}
