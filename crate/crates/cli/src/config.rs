//! Run configuration: a TOML file with the sections `[potential]`,
//! `[initial]`, `[span]`, `[integrator]`, `[tolerances]` and `[output]`.
//! Everything is checked here, before any integration starts.

use std::fmt;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use toml::Spanned;
use tribody::dynamics::read_trajectory_csv;
use tribody::orbit::{read_library, OrbitRecord};
use tribody::state::{parse_state_literal, random_constrained_state, ConstraintFlags};
use tribody::{IntegrateOptions, Masses, PhaseState, PotentialSpec, Tolerances, Trajectory};

#[derive(Debug)]
pub struct ConfigError {
    pub path: PathBuf,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{}: {}", self.path.display(), line, self.message),
            None => write!(f, "{}: {}", self.path.display(), self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    potential: Option<RawPotential>,
    initial: Spanned<RawInitial>,
    span: Option<Spanned<RawSpan>>,
    #[serde(default)]
    integrator: RawIntegrator,
    #[serde(default)]
    tolerances: RawTolerances,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPotential {
    alpha: Spanned<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    state: Option<Spanned<String>>,
    seed: Option<Spanned<u64>>,
    constraints: Option<Spanned<Vec<String>>>,
    library: Option<Spanned<String>>,
    record: Option<Spanned<usize>>,
    trajectory: Option<Spanned<String>>,
    masses: Option<Spanned<[f64; 3]>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpan {
    t_end: Option<Spanned<f64>>,
    periods: Option<Spanned<f64>>,
    characteristic_times: Option<Spanned<f64>>,
    samples: Option<Spanned<usize>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIntegrator {
    rtol: Option<Spanned<f64>>,
    atol: Option<Spanned<f64>>,
    close_approach_ratio: Option<Spanned<f64>>,
    max_steps: Option<Spanned<usize>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTolerances {
    abs: Option<Spanned<f64>>,
    rel: Option<Spanned<f64>>,
    conservation: Option<Spanned<f64>>,
    drift: Option<Spanned<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<String>,
}

pub enum Initial {
    State(PhaseState),
    Record(Box<OrbitRecord>),
    Trajectory(Box<Trajectory>),
}

pub struct RunConfig {
    pub potential: PotentialSpec,
    pub initial: Initial,
    /// `None` means a single snapshot of the initial state.
    pub t_end: Option<f64>,
    pub samples: usize,
    pub integrator: IntegrateOptions,
    pub tolerances: Tolerances,
    /// Relative energy and angular momentum drift allowed by `simulate`.
    pub conservation_tol: f64,
    /// Relative drift allowed for conserved quantities checked by `verify --constants`.
    pub drift_tol: f64,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn initial_state(&self) -> PhaseState {
        match &self.initial {
            Initial::State(s) => *s,
            Initial::Record(r) => r.initial,
            Initial::Trajectory(t) => t.samples()[0],
        }
    }
}

struct Ctx<'a> {
    path: &'a Path,
    text: &'a str,
}

impl Ctx<'_> {
    fn line_of(&self, offset: usize) -> usize {
        self.text[..offset.min(self.text.len())].matches('\n').count() + 1
    }

    fn err<T>(&self, span: Option<std::ops::Range<usize>>, message: impl Into<String>) -> Result<T, ConfigError> {
        Err(ConfigError {
            path: self.path.to_path_buf(),
            line: span.map(|s| self.line_of(s.start)),
            message: message.into(),
        })
    }

    fn positive(&self, v: &Option<Spanned<f64>>, name: &str, default: f64) -> Result<f64, ConfigError> {
        match v {
            None => Ok(default),
            Some(s) if s.get_ref().is_finite() && *s.get_ref() > 0.0 => Ok(*s.get_ref()),
            Some(s) => self.err(Some(s.span()), format!("{name} must be positive and finite")),
        }
    }

    fn resolve(&self, rel: &str) -> PathBuf {
        let base = self.path.parent().unwrap_or(Path::new("."));
        base.join(rel)
    }
}

pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|e| ConfigError {
        path: path.to_path_buf(),
        line: None,
        message: e.to_string(),
    })?;
    parse(path, &text)
}

pub fn parse(path: &Path, text: &str) -> Result<RunConfig, ConfigError> {
    let cx = Ctx { path, text };
    let raw: RawConfig = match toml::from_str(text) {
        Ok(raw) => raw,
        Err(e) => return cx.err(e.span(), e.message().to_string()),
    };

    let rtol = cx.positive(&raw.integrator.rtol, "rtol", 1e-10)?;
    let atol = cx.positive(&raw.integrator.atol, "atol", 1e-12)?;
    let mut integrator = IntegrateOptions::with_tolerances(rtol, atol);
    integrator.close_approach_ratio = cx.positive(
        &raw.integrator.close_approach_ratio,
        "close_approach_ratio",
        integrator.close_approach_ratio,
    )?;
    if let Some(n) = &raw.integrator.max_steps {
        if *n.get_ref() == 0 {
            return cx.err(Some(n.span()), "max_steps must be at least 1");
        }
        integrator.max_steps = *n.get_ref();
    }
    let defaults = Tolerances::default();
    let tolerances = Tolerances {
        abs: cx.positive(&raw.tolerances.abs, "abs", defaults.abs)?,
        rel: cx.positive(&raw.tolerances.rel, "rel", defaults.rel)?,
    };
    let conservation_tol = cx.positive(&raw.tolerances.conservation, "conservation", 1e-9)?;
    let drift_tol = cx.positive(&raw.tolerances.drift, "drift", 1e-7)?;

    let alpha = match &raw.potential {
        Some(p) if p.alpha.get_ref().is_finite() => Some(*p.alpha.get_ref()),
        Some(p) => return cx.err(Some(p.alpha.span()), "alpha must be finite"),
        None => None,
    };

    let init = raw.initial.get_ref();
    let sources = [
        init.state.is_some(),
        init.seed.is_some(),
        init.library.is_some(),
        init.trajectory.is_some(),
    ];
    let init_span = Some(raw.initial.span());
    if sources.iter().filter(|&&s| s).count() != 1 {
        return cx.err(
            init_span,
            "[initial] needs exactly one of state, seed, library, trajectory",
        );
    }
    if init.constraints.is_some() && init.seed.is_none() {
        return cx.err(
            init.constraints.as_ref().map(|c| c.span()),
            "constraints only apply with seed",
        );
    }
    if init.record.is_some() && init.library.is_none() {
        return cx.err(
            init.record.as_ref().map(|c| c.span()),
            "record only applies with library",
        );
    }
    if init.masses.is_some() && init.trajectory.is_none() {
        return cx.err(
            init.masses.as_ref().map(|c| c.span()),
            "masses only apply with trajectory",
        );
    }
    let need_alpha = |what: &str| -> Result<f64, ConfigError> {
        match alpha {
            Some(a) => Ok(a),
            None => cx.err(init_span.clone(), format!("[potential] alpha is required with {what}")),
        }
    };

    let mut seed = None;
    let (potential, initial) = if let Some(lit) = &init.state {
        let (masses, state) =
            parse_state_literal(lit.get_ref()).or_else(|e| cx.err(Some(lit.span()), e.to_string()))?;
        (PotentialSpec::new(need_alpha("state")?, masses), Initial::State(state))
    } else if let Some(s) = &init.seed {
        let flags = match &init.constraints {
            None => ConstraintFlags::TANGENTS,
            Some(list) => {
                let mut flags = ConstraintFlags::default();
                for name in list.get_ref() {
                    match name.as_str() {
                        "linear" => flags.zero_linear = true,
                        "angular" => flags.zero_angular = true,
                        "inertia-rate" => flags.zero_inertia_rate = true,
                        other => {
                            return cx.err(
                                Some(list.span()),
                                format!("unknown constraint '{other}' (expected linear, angular, inertia-rate)"),
                            )
                        }
                    }
                }
                flags
            }
        };
        seed = Some(*s.get_ref());
        let (masses, state) =
            random_constrained_state(*s.get_ref(), flags).or_else(|e| cx.err(Some(s.span()), e.to_string()))?;
        (PotentialSpec::new(need_alpha("seed")?, masses), Initial::State(state))
    } else if let Some(lib) = &init.library {
        let records = read_library(&cx.resolve(lib.get_ref())).or_else(|e| cx.err(Some(lib.span()), e.to_string()))?;
        let index = init.record.as_ref().map_or(0, |r| *r.get_ref());
        let Some(record) = records.into_iter().nth(index) else {
            return cx.err(init_span, format!("library has no record {index}"));
        };
        if let (Some(a), Some(p)) = (alpha, &raw.potential) {
            if a != record.alpha {
                return cx.err(
                    Some(p.alpha.span()),
                    format!("alpha {a} differs from the library record ({})", record.alpha),
                );
            }
        }
        (record.potential(), Initial::Record(Box::new(record)))
    } else {
        let file = init.trajectory.as_ref().expect("one source is set");
        let Some(m) = &init.masses else {
            return cx.err(Some(file.span()), "trajectory input needs masses = [m1, m2, m3]");
        };
        let [m1, m2, m3] = *m.get_ref();
        let masses = Masses::new(m1, m2, m3).or_else(|e| cx.err(Some(m.span()), e.to_string()))?;
        let pot = PotentialSpec::new(need_alpha("trajectory")?, masses);
        let f = fs::File::open(cx.resolve(file.get_ref())).or_else(|e| cx.err(Some(file.span()), e.to_string()))?;
        let traj = read_trajectory_csv(BufReader::new(f), pot, rtol, atol)
            .or_else(|e| cx.err(Some(file.span()), format!("{}: {e}", file.get_ref())))?;
        (pot, Initial::Trajectory(Box::new(traj)))
    };

    let mut samples = 200;
    let t_end = match &raw.span {
        None => match &initial {
            Initial::Trajectory(t) => Some(t.t_end()),
            _ => None,
        },
        Some(span) => {
            let sp = span.get_ref();
            if let Some(n) = &sp.samples {
                if *n.get_ref() < 2 {
                    return cx.err(Some(n.span()), "samples must be at least 2");
                }
                samples = *n.get_ref();
            }
            let set = [
                sp.t_end.is_some(),
                sp.periods.is_some(),
                sp.characteristic_times.is_some(),
            ];
            if set.iter().filter(|&&s| s).count() != 1 {
                return cx.err(
                    Some(span.span()),
                    "[span] needs exactly one of t_end, periods, characteristic_times",
                );
            }
            if matches!(initial, Initial::Trajectory(_)) {
                return cx.err(Some(span.span()), "[span] cannot be combined with a trajectory input");
            }
            let t0 = match &initial {
                Initial::State(s) => s.t,
                Initial::Record(r) => r.initial.t,
                Initial::Trajectory(_) => unreachable!(),
            };
            if let Some(t) = &sp.t_end {
                if !(t.get_ref().is_finite() && *t.get_ref() > t0) {
                    return cx.err(
                        Some(t.span()),
                        format!("t_end must be finite and after the initial time {t0}"),
                    );
                }
                Some(*t.get_ref())
            } else if let Some(p) = &sp.periods {
                let n = cx.positive(&Some(p.clone()), "periods", 1.0)?;
                match &initial {
                    Initial::Record(r) => Some(t0 + n * r.period),
                    _ => return cx.err(Some(p.span()), "periods needs a library record"),
                }
            } else {
                let c = sp.characteristic_times.clone();
                let n = cx.positive(&c, "characteristic_times", 1.0)?;
                let state = match &initial {
                    Initial::State(s) => *s,
                    Initial::Record(r) => r.initial,
                    Initial::Trajectory(_) => unreachable!(),
                };
                Some(t0 + n * potential.characteristic_time(&state))
            }
        }
    };

    Ok(RunConfig {
        potential,
        initial,
        t_end,
        samples,
        integrator,
        tolerances,
        conservation_tol,
        drift_tol,
        output_dir: raw.output.dir.map(|d| cx.resolve(&d)),
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_str(text: &str) -> Result<RunConfig, ConfigError> {
        parse(Path::new("test.toml"), text)
    }

    const ST1: &str = "1 1 1 / 1 0 0 1 -1 -1 / 1 1 -0.2 -1.4 -0.8 0.4";

    #[test]
    fn minimal_snapshot() {
        let cfg = parse_str(&format!("[potential]\nalpha = -1\n[initial]\nstate = \"{ST1}\"\n")).unwrap();
        assert_eq!(cfg.t_end, None);
        assert_eq!(cfg.potential.alpha, -1.0);
        assert_eq!(cfg.tolerances, Tolerances::default());
    }

    #[test]
    fn negative_mass_reports_its_line() {
        let text =
            "[potential]\nalpha = -1\n\n[initial]\nstate = \"1 -1 1 / 1 0 0 1 -1 -1 / 1 1 -0.2 -1.4 -0.8 0.4\"\n";
        let err = parse_str(text).err().unwrap();
        assert_eq!(err.line, Some(5));
        assert!(err.message.contains("mass"), "{}", err.message);
    }

    #[test]
    fn unknown_key_rejected() {
        let text = format!("[potential]\nalpha = -1\nbeta = 2\n[initial]\nstate = \"{ST1}\"\n");
        let err = parse_str(&text).err().unwrap();
        assert_eq!(err.line, Some(3));
        assert!(err.message.contains("beta"));
    }

    #[test]
    fn span_needs_a_single_end() {
        let text = format!("[potential]\nalpha = -1\n[initial]\nstate = \"{ST1}\"\n[span]\nt_end = 2\nperiods = 1\n");
        assert!(parse_str(&text).is_err());
        let text = format!("[potential]\nalpha = -1\n[initial]\nstate = \"{ST1}\"\n[span]\nt_end = -2\n");
        assert_eq!(parse_str(&text).err().unwrap().line, Some(6));
    }

    #[test]
    fn seeded_state_is_reproducible() {
        let text = "[potential]\nalpha = 1\n[initial]\nseed = 11\nconstraints = [\"linear\", \"angular\"]\n";
        let a = parse_str(text).unwrap();
        let b = parse_str(text).unwrap();
        assert_eq!(a.initial_state(), b.initial_state());
        assert_eq!(a.seed, Some(11));
        assert!(a.initial_state().angular_momentum().abs() < 1e-12);
    }

    #[test]
    fn bad_constraint_name() {
        let text = "[potential]\nalpha = 1\n[initial]\nseed = 11\nconstraints = [\"spin\"]\n";
        assert!(parse_str(text).err().unwrap().message.contains("spin"));
    }

    #[test]
    fn tolerances_must_be_positive() {
        let text = format!("[potential]\nalpha = -1\n[initial]\nstate = \"{ST1}\"\n[integrator]\nrtol = 0\n");
        assert_eq!(parse_str(&text).err().unwrap().line, Some(6));
    }
}
