use std::io::Write;
use std::path::Path;

use tribody::dynamics::write_trajectory_csv;
use tribody::geometry::Residual;
use tribody::{Result, Termination};

use super::{create, flush, trajectory};
use crate::config::RunConfig;
use crate::report::Summary;

/// Integrates the configured span, writes `trajectory.csv` into `dir` and
/// checks energy and angular momentum drift.
pub fn run(cfg: &RunConfig, dir: &Path, out: &mut impl Write) -> Result<bool> {
    let traj = trajectory(cfg)?.expect("span checked before running");
    let mut csv = create(dir, "trajectory.csv")?;
    write_trajectory_csv(&traj, &mut csv)?;
    flush(csv)?;

    let meta = traj.meta();
    if let Some(seed) = cfg.seed {
        writeln!(out, "seed={seed}")?;
    }
    let detail = match meta.termination {
        Termination::CollisionApproach { pair, distance, .. } => {
            format!(" pair={}{} distance={distance:.6e}", pair.0 + 1, pair.1 + 1)
        }
        _ => String::new(),
    };
    writeln!(
        out,
        "termination=\"{}\"{detail} t_end={:.16e} accepted={} rejected={}",
        meta.termination.label(),
        traj.t_end(),
        meta.accepted_steps,
        meta.rejected_steps
    )?;
    let mut summary = Summary::default();
    summary.push(Residual::new(
        "energy-drift",
        None,
        meta.relative_energy_drift(),
        cfg.conservation_tol,
    ));
    summary.push(Residual::new(
        "angular-momentum-drift",
        None,
        meta.relative_angular_momentum_drift(),
        cfg.conservation_tol,
    ));
    Ok(summary.print(out)?)
}
