use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use tribody::orbit::{append_record, parse_guesses, shoot_periodic, verify_orbit, ShootOptions, VerifyOptions};
use tribody::{Error, PotentialSpec, Result};

use crate::report::{status, Summary};

/// Shoots every guess with the requested exponent, certifies the converged
/// orbits and appends the certified ones to the library in guess order.
pub fn run(alpha: f64, guess_file: &Path, library: &Path, out: &mut impl Write) -> Result<bool> {
    let text = fs::read_to_string(guess_file)?;
    let guesses: Vec<_> = parse_guesses(&text)?.into_iter().filter(|g| g.alpha == alpha).collect();
    if guesses.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no guesses with alpha = {alpha} in {}",
            guess_file.display()
        )));
    }
    let results: Vec<_> = guesses
        .par_iter()
        .map(|g| {
            let pot = PotentialSpec::new(g.alpha, g.masses);
            shoot_periodic(&g.state, g.period, &pot, &g.name, &ShootOptions::default())
                .and_then(|rec| verify_orbit(&rec, &VerifyOptions::default()).map(|cert| (rec, cert)))
        })
        .collect();

    let mut all = true;
    for (g, res) in guesses.iter().zip(results) {
        match res {
            Ok((rec, cert)) => {
                let mut summary = Summary::default();
                summary.absorb(&cert.residuals);
                let pass = cert.passed();
                writeln!(
                    out,
                    "orbit={} alpha={} period={:.16e} iterations={} syzygies={} status={}",
                    g.name,
                    rec.alpha,
                    rec.period,
                    rec.provenance.iterations,
                    cert.syzygies_per_period,
                    status(pass)
                )?;
                summary.print(out)?;
                for reason in &cert.failures {
                    writeln!(out, "theorem=orbit pair=- error=\"{reason}\" status=FAIL")?;
                }
                if pass {
                    append_record(library, &rec)?;
                }
                all &= pass;
            }
            Err(e) => {
                writeln!(out, "orbit={} alpha={} error=\"{e}\" status=FAIL", g.name, g.alpha)?;
                all = false;
            }
        }
    }
    Ok(all)
}
