use std::io::Write;

use tribody::syzygy::{detect_events, gap_certificate, omega_bound, EventKind, EventOptions, GapKind};
use tribody::{Error, Result};

use super::{create, flush, trajectory};
use crate::config::RunConfig;
use crate::report::status;

pub const EVENTS_HEADER: &str = "t,kind,detail";

/// Collinear instants and collisions along the trajectory, followed by the
/// check that no zero-free stretch outlasts `π/ω₀`.
pub fn run(cfg: &RunConfig, out: &mut impl Write) -> Result<bool> {
    let traj = trajectory(cfg)?.ok_or_else(|| Error::InvalidInput("syzygy needs a trajectory".into()))?;
    let bound = omega_bound(&traj, cfg.potential.alpha)?;
    let opts = EventOptions {
        max_step: Some(bound.t0 / 8.0),
        ..EventOptions::default()
    };
    let events = detect_events(&traj, &opts)?;

    writeln!(out, "{EVENTS_HEADER}")?;
    for e in &events {
        writeln!(out, "{e}")?;
    }
    if let Some(dir) = &cfg.output_dir {
        let mut w = create(dir, "events.csv")?;
        writeln!(w, "{EVENTS_HEADER}")?;
        for e in &events {
            writeln!(w, "{e}")?;
        }
        flush(w)?;
    }

    let cert = gap_certificate(&events, &bound, (traj.t_start(), traj.t_end()));
    let syzygies = events
        .iter()
        .filter(|e| matches!(e.kind, EventKind::Syzygy { .. }))
        .count();
    let longest = cert.checks.iter().map(|c| c.length()).fold(0.0, f64::max);
    let between = cert.checks.iter().filter(|c| c.kind == GapKind::Between).count();
    writeln!(
        out,
        "syzygies={syzygies} events={} gaps={between} t_start={:.16e} t_end={:.16e} termination=\"{}\"",
        events.len(),
        traj.t_start(),
        traj.t_end(),
        traj.meta().termination.label()
    )?;
    writeln!(
        out,
        "theorem=frequency-bound pair=- residual={:.6e} tol={:.6e} status={}",
        bound.min_omega_sq,
        bound.omega0_sq,
        status(bound.holds())
    )?;
    writeln!(
        out,
        "theorem=gap-certificate pair=- residual={longest:.6e} tol={:.6e} status={}",
        bound.t0,
        status(cert.all_pass())
    )?;
    Ok(bound.holds() && cert.all_pass())
}
