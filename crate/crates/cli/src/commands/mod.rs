pub mod find_orbit;
pub mod fuzz;
pub mod simulate;
pub mod syzygy;
pub mod verify;

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use tribody::{integrate, Result, Trajectory};

use crate::config::{Initial, RunConfig};

/// The trajectory a command works on, or `None` for a snapshot of the
/// initial state. A library record without a span covers one period.
pub fn trajectory(cfg: &RunConfig) -> Result<Option<Trajectory>> {
    let end = match (&cfg.initial, cfg.t_end) {
        (Initial::Trajectory(t), _) => return Ok(Some((**t).clone())),
        (_, Some(t)) => t,
        (Initial::Record(r), None) => r.initial.t + r.period,
        (Initial::State(_), None) => return Ok(None),
    };
    let s = cfg.initial_state();
    integrate(&s, &cfg.potential, (s.t, end), &cfg.integrator).map(Some)
}

pub fn create(dir: &Path, name: &str) -> io::Result<BufWriter<fs::File>> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(fs::File::create(dir.join(name))?))
}

pub fn row(values: &[String]) -> String {
    values.join(",")
}

pub fn flush(mut w: impl Write) -> io::Result<()> {
    w.flush()
}
