use std::io::{self, Write};

use tribody::geometry::{Residual, ResidualSet};
use tribody::Error;

/// Largest residual per (check, pair) over many evaluations, plus checks
/// that could not be evaluated.
#[derive(Default)]
pub struct Summary {
    worst: Vec<Residual>,
    errors: Vec<(String, usize, String)>,
    skipped: Vec<(String, usize, String)>,
}

/// Inputs where a check is undefined rather than violated.
fn is_degenerate(err: &Error) -> bool {
    matches!(
        err,
        Error::NotSimilarityInstance(_)
            | Error::StationaryBody(_)
            | Error::DiameterUndefined(_)
            | Error::DegenerateCircumcircle
    )
}

fn count(list: &mut Vec<(String, usize, String)>, check: &str, err: &Error) {
    match list.iter_mut().find(|e| e.0 == check) {
        Some(e) => e.1 += 1,
        None => list.push((check.to_string(), 1, err.to_string())),
    }
}

impl Summary {
    pub fn push(&mut self, r: Residual) {
        match self.worst.iter_mut().find(|w| w.check == r.check && w.pair == r.pair) {
            // NaN never compares greater, so keep it explicitly.
            Some(w) => {
                if r.value.abs() > w.value.abs() || r.value.is_nan() {
                    *w = r;
                }
            }
            None => self.worst.push(r),
        }
    }

    pub fn absorb(&mut self, set: &ResidualSet) {
        for r in set.iter() {
            self.push(*r);
        }
    }

    /// Records a check that could not run; degenerate inputs count as skipped.
    pub fn error(&mut self, check: &str, err: &Error) {
        if is_degenerate(err) {
            count(&mut self.skipped, check, err);
        } else {
            count(&mut self.errors, check, err);
        }
    }

    pub fn passed(&self) -> bool {
        self.errors.is_empty() && self.worst.iter().all(Residual::passes)
    }

    pub fn print(&self, out: &mut impl Write) -> io::Result<bool> {
        for r in &self.worst {
            writeln!(out, "{r}")?;
        }
        for (check, count, first) in &self.skipped {
            writeln!(
                out,
                "theorem={check} pair=- count={count} reason=\"{first}\" status=SKIP"
            )?;
        }
        for (check, count, first) in &self.errors {
            writeln!(
                out,
                "theorem={check} pair=- count={count} error=\"{first}\" status=FAIL"
            )?;
        }
        Ok(self.passed())
    }
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| format!("{x:.16e}"))
}

pub fn status(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keeps_worst_per_pair() {
        let mut s = Summary::default();
        s.push(Residual::new("kappa", Some((0, 1)), 1e-12, 1e-10));
        s.push(Residual::new("kappa", Some((0, 1)), -3e-11, 1e-10));
        s.push(Residual::new("kappa", Some((1, 2)), 1e-13, 1e-10));
        s.push(Residual::new("kappa", Some((0, 1)), 2e-11, 1e-10));
        let mut buf = Vec::new();
        assert!(s.print(&mut buf).unwrap());
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.starts_with("theorem=kappa pair=12 residual=-3.000000e-11"));
    }

    #[test]
    fn errors_fail_the_summary() {
        let mut s = Summary::default();
        s.error("similarity", &Error::TripleCollision);
        s.error("similarity", &Error::TripleCollision);
        let mut buf = Vec::new();
        assert!(!s.print(&mut buf).unwrap());
        assert!(String::from_utf8(buf).unwrap().contains("count=2"));
    }

    #[test]
    fn degenerate_inputs_are_skipped() {
        let mut s = Summary::default();
        s.error("tangents", &Error::StationaryBody(1));
        let mut buf = Vec::new();
        assert!(s.print(&mut buf).unwrap());
        assert!(String::from_utf8(buf).unwrap().contains("status=SKIP"));
    }
}
