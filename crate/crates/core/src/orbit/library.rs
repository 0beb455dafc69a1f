//! One record per line:
//!
//! ```text
//! <state literal> | alpha=.. period=.. periodicity=.. quarter=.. L=.. E=.. I_drift=.. iterations=.. rtol=.. atol=.. guess=.. | sha256=<hex>
//! ```
//!
//! The checksum covers everything before the final ` | sha256=`.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::{OrbitRecord, OrbitResiduals, Provenance};
use crate::error::{Error, Result};
use crate::state::{format_state_literal, parse_state_literal, PhaseState};

const CHECKSUM_SEP: &str = " | sha256=";

fn checksum(body: &str) -> String {
    hex::encode(Sha256::digest(body.as_bytes()))
}

fn sanitize(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| {
            if c.is_whitespace() || c == '|' || c == '=' {
                '_'
            } else {
                c
            }
        })
        .collect();
    if s.is_empty() {
        "-".into()
    } else {
        s
    }
}

pub fn format_record(r: &OrbitRecord) -> String {
    let f = |x: f64| format!("{x:.16e}");
    let i_drift = r.residuals.inertia_drift.map_or("none".to_string(), f);
    let body = format!(
        "{} | alpha={} period={} periodicity={} quarter={} L={} E={} I_drift={} iterations={} rtol={} atol={} guess={}",
        format_state_literal(&r.masses, &r.initial),
        f(r.alpha),
        f(r.period),
        f(r.residuals.periodicity),
        f(r.residuals.quarter),
        f(r.residuals.angular_momentum),
        f(r.residuals.energy),
        i_drift,
        r.provenance.iterations,
        f(r.provenance.rtol),
        f(r.provenance.atol),
        sanitize(&r.provenance.guess),
    );
    let sum = checksum(&body);
    format!("{body}{CHECKSUM_SEP}{sum}")
}

pub fn parse_record(line: &str) -> Result<OrbitRecord> {
    let bad = |m: String| Error::Parse { line: 1, message: m };
    let (body, sum) = line
        .trim_end()
        .rsplit_once(CHECKSUM_SEP)
        .ok_or_else(|| bad("missing checksum field".into()))?;
    if checksum(body) != sum {
        return Err(bad("checksum mismatch".into()));
    }
    let (literal, fields) = body
        .split_once(" | ")
        .ok_or_else(|| bad("missing field separator".into()))?;
    let (masses, initial) = parse_state_literal(literal)?;
    let mut kv = std::collections::HashMap::new();
    for tok in fields.split_whitespace() {
        let (k, v) = tok.split_once('=').ok_or_else(|| bad(format!("bad field '{tok}'")))?;
        kv.insert(k, v);
    }
    let get = |k: &str| kv.get(k).copied().ok_or_else(|| bad(format!("missing field {k}")));
    let num = |k: &str| -> Result<f64> { get(k)?.parse().map_err(|_| bad(format!("bad number in {k}"))) };
    let i_drift = match get("I_drift")? {
        "none" => None,
        v => Some(v.parse().map_err(|_| bad("bad number in I_drift".into()))?),
    };
    Ok(OrbitRecord {
        alpha: num("alpha")?,
        masses,
        initial,
        period: num("period")?,
        residuals: OrbitResiduals {
            periodicity: num("periodicity")?,
            quarter: num("quarter")?,
            angular_momentum: num("L")?,
            energy: num("E")?,
            inertia_drift: i_drift,
        },
        provenance: Provenance {
            guess: get("guess")?.to_string(),
            iterations: get("iterations")?
                .parse()
                .map_err(|_| bad("bad iteration count".into()))?,
            rtol: num("rtol")?,
            atol: num("atol")?,
        },
    })
}

/// Appends one record; existing lines are never rewritten.
pub fn append_record(path: &Path, record: &OrbitRecord) -> Result<()> {
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    writeln!(f, "{}", format_record(record))?;
    Ok(())
}

pub fn read_library(path: &Path) -> Result<Vec<OrbitRecord>> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(n, l)| {
            parse_record(l).map_err(|e| match e {
                Error::Parse { message, .. } => Error::Parse { line: n + 1, message },
                other => Error::Parse {
                    line: n + 1,
                    message: other.to_string(),
                },
            })
        })
        .collect()
}

/// A solver starting point: name, exponent, period estimate and state.
#[derive(Clone, Debug, PartialEq)]
pub struct Guess {
    pub name: String,
    pub alpha: f64,
    pub period: f64,
    pub masses: crate::state::Masses,
    pub state: PhaseState,
}

/// Guess files hold lines `<name> <alpha> <period> <state literal>`; `#` starts a comment.
pub fn parse_guesses(text: &str) -> Result<Vec<Guess>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |m: String| Error::Parse {
            line: n + 1,
            message: m,
        };
        let mut parts = line.splitn(4, char::is_whitespace);
        let mut next = |what: &str| {
            parts
                .next()
                .map(str::trim)
                .ok_or_else(|| err(format!("missing {what}")))
        };
        let name = next("name")?.to_string();
        let alpha = next("alpha")?.parse().map_err(|_| err("bad alpha".into()))?;
        let period = next("period")?.parse().map_err(|_| err("bad period".into()))?;
        let literal = next("state literal")?;
        let (masses, state) = parse_state_literal(literal).map_err(|e| err(e.to_string()))?;
        out.push(Guess {
            name,
            alpha,
            period,
            masses,
            state,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::fixtures::st1;

    fn sample_record() -> OrbitRecord {
        let (s, m) = st1();
        OrbitRecord {
            alpha: -2.0,
            masses: m,
            initial: s,
            period: 7.1,
            residuals: OrbitResiduals {
                periodicity: 1e-10,
                quarter: 3e-11,
                angular_momentum: 0.0,
                energy: -1e-13,
                inertia_drift: Some(2e-12),
            },
            provenance: Provenance {
                guess: "coarse guess".into(),
                iterations: 4,
                rtol: 1e-12,
                atol: 1e-14,
            },
        }
    }

    #[test]
    fn record_round_trip() {
        let r = sample_record();
        let line = format_record(&r);
        let back = parse_record(&line).unwrap();
        assert_eq!(back.initial, r.initial);
        assert_eq!(back.period, r.period);
        assert_eq!(back.residuals, r.residuals);
        assert_eq!(back.provenance.guess, "coarse_guess");
        assert_eq!(format_record(&back), line);
    }

    #[test]
    fn tampering_detected() {
        let line = format_record(&sample_record()).replace("period=7", "period=8");
        assert!(matches!(parse_record(&line), Err(Error::Parse { .. })));
    }

    #[test]
    fn guesses_parse() {
        let text =
            "# solver inputs\nf8 -1 6.33 1 1 1 / 0.97 -0.243 -0.97 0.243 0 0 / 0.466 0.432 0.466 0.432 -0.932 -0.864\n";
        let g = parse_guesses(text).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].alpha, -1.0);
        assert!(parse_guesses("x -1\n").is_err());
    }
}
