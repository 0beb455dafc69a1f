use std::io::{BufRead, Write};

use super::{PotentialSpec, Trajectory};
use crate::error::{Error, Result};
use crate::state::PhaseState;
use crate::vec2::Vec2;

pub const TRAJECTORY_CSV_HEADER: &str = "t,q1x,q1y,q2x,q2y,q3x,q3y,p1x,p1y,p2x,p2y,p3x,p3y,I,K,L,E,Delta";

/// Writes one row per sample with 17 significant digits.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, out: &mut W) -> Result<()> {
    let masses = traj.masses();
    let pot = traj.potential();
    writeln!(out, "{TRAJECTORY_CSV_HEADER}")?;
    for s in traj.samples() {
        let e = 0.5 * s.twice_kinetic(masses) + pot.potential_energy(&s.q)?;
        let mut fields = vec![s.t];
        for v in s.q.iter().chain(s.p.iter()) {
            fields.push(v.x);
            fields.push(v.y);
        }
        fields.extend([
            s.inertia(masses),
            s.twice_kinetic(masses),
            s.angular_momentum(),
            e,
            s.oriented_area(),
        ]);
        let row: Vec<String> = fields.iter().map(|x| format!("{x:.16e}")).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Reads a trajectory export back. Only the state columns are used; the
/// derived columns are recomputed on demand.
pub fn read_trajectory_csv<R: BufRead>(input: R, potential: PotentialSpec, rtol: f64, atol: f64) -> Result<Trajectory> {
    let mut samples = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = n + 1;
        if n == 0 {
            if line.trim() != TRAJECTORY_CSV_HEADER {
                return Err(Error::Parse {
                    line: 1,
                    message: "unexpected trajectory header".into(),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let vals = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse {
                line: lineno,
                message: e.to_string(),
            })?;
        if vals.len() < 13 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected at least 13 fields, found {}", vals.len()),
            });
        }
        let v = |i: usize| Vec2::new(vals[i], vals[i + 1]);
        samples.push(PhaseState::new(vals[0], [v(1), v(3), v(5)], [v(7), v(9), v(11)]));
    }
    Trajectory::from_samples(potential, samples, rtol, atol)
}
