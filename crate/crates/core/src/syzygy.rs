//! Oriented-area dynamics, the lower bound on its oscillation frequency,
//! zero-crossing detection and the certificate that consecutive zeros are
//! closer than `π/ω₀`.

use std::fmt;

use crate::dynamics::{Kinematics, PotentialSpec, Termination, Trajectory};
use crate::error::{Error, Result};
use crate::state::{Masses, PhaseState, CYCLIC};
use crate::vec2::Vec2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeltaSample {
    pub t: f64,
    pub delta: f64,
    /// `S = Δ/√I`.
    pub scaled: f64,
}

fn delta_sample(s: &PhaseState, masses: &Masses) -> DeltaSample {
    let delta = s.oriented_area();
    DeltaSample {
        t: s.t,
        delta,
        scaled: delta / s.inertia(masses).sqrt(),
    }
}

/// States at every accepted step, with extra points from the dense output
/// wherever consecutive samples are further apart than `max_step`.
fn resampled_states(traj: &Trajectory, max_step: Option<f64>) -> Result<Vec<PhaseState>> {
    let samples = traj.samples();
    let mut out = Vec::with_capacity(samples.len());
    out.push(samples[0]);
    for w in samples.windows(2) {
        let gap = w[1].t - w[0].t;
        let pieces = match max_step {
            Some(h) if h > 0.0 => (gap / h).ceil().max(1.0) as usize,
            _ => 1,
        };
        for n in 1..pieces {
            out.push(traj.state_at(w[0].t + gap * n as f64 / pieces as f64)?);
        }
        out.push(w[1]);
    }
    Ok(out)
}

/// `(t, Δ, S)` along the trajectory; `max_step` bounds the spacing.
pub fn delta_series(traj: &Trajectory, max_step: Option<f64>) -> Result<Vec<DeltaSample>> {
    let masses = traj.masses();
    Ok(resampled_states(traj, max_step)?
        .iter()
        .map(|s| delta_sample(s, masses))
        .collect())
}

/// Terms of `Δ̈ + (2K/I + Σ_pairs (m_i+m_j) r_ij^(α−2)) Δ − (İ/I) Δ̇ = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeltaOdeTerms {
    pub delta: f64,
    pub delta_rate: f64,
    pub delta_accel: f64,
    pub stiffness: f64,
    /// `İ/I`.
    pub damping: f64,
}

impl DeltaOdeTerms {
    pub fn residual(&self) -> f64 {
        self.delta_accel + self.stiffness * self.delta - self.damping * self.delta_rate
    }

    pub fn scale(&self) -> f64 {
        self.delta_accel.abs() + (self.stiffness * self.delta).abs() + (self.damping * self.delta_rate).abs()
    }

    pub fn relative_residual(&self) -> f64 {
        let s = self.scale();
        if s > 0.0 {
            self.residual() / s
        } else {
            self.residual()
        }
    }
}

fn require_zero_angular_momentum(s: &PhaseState) -> Result<()> {
    let scale: f64 = (0..3).map(|k| s.q[k].norm() * s.p[k].norm()).sum();
    let l = s.angular_momentum();
    if l.abs() > 1e-12 + 1e-10 * scale {
        return Err(Error::NonZeroAngularMomentum(l));
    }
    Ok(())
}

pub fn delta_ode_terms(state: &PhaseState, potential: &PotentialSpec) -> Result<DeltaOdeTerms> {
    require_zero_angular_momentum(state)?;
    let kin = Kinematics::new(state, potential)?;
    let inertia = kin.inertia();
    if inertia <= 0.0 {
        return Err(Error::TripleCollision);
    }
    let w = potential.pair_weights(&state.q)?;
    let m = potential.masses.as_array();
    let pair_sum: f64 = CYCLIC.iter().zip(w).map(|(&(i, j, _), wij)| (m[i] + m[j]) * wij).sum();
    Ok(DeltaOdeTerms {
        delta: kin.delta(),
        delta_rate: kin.delta_rate(),
        delta_accel: kin.delta_second_derivative(),
        stiffness: 2.0 * kin.twice_kinetic() / inertia + pair_sum,
        damping: kin.inertia_rate() / inertia,
    })
}

/// Relative residual of the oriented-area equation at time `t`.
pub fn delta_ode_residual(traj: &Trajectory, t: f64) -> Result<f64> {
    let s = traj.state_at(t)?;
    Ok(delta_ode_terms(&s, traj.potential())?.relative_residual())
}

/// `ω² = (M/I) Σ_cyc m_k q_k² r_ij^(α−2) + 3K/I − 3İ²/(4I²)`.
pub fn omega_sq(state: &PhaseState, potential: &PotentialSpec) -> Result<f64> {
    let masses = &potential.masses;
    let w = potential.pair_weights(&state.q)?;
    let inertia = state.inertia(masses);
    if inertia <= 0.0 {
        return Err(Error::TripleCollision);
    }
    let rate = 2.0 * state.virial();
    let weighted: f64 = CYCLIC
        .iter()
        .zip(w)
        .map(|(&(_, _, k), wij)| masses.get(k) * state.q[k].norm_sq() * wij)
        .sum();
    Ok(
        masses.total() / inertia * weighted + 3.0 * state.twice_kinetic(masses) / inertia
            - 0.75 * rate * rate / (inertia * inertia),
    )
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OscillationBound {
    pub omega0_sq: f64,
    /// `π/ω₀`, the longest possible gap between zeros of `Δ`.
    pub t0: f64,
    pub i_max: f64,
    pub m_min: f64,
    pub alpha: f64,
    /// Smallest `ω²(t)` over the samples it was evaluated on.
    pub min_omega_sq: f64,
}

impl OscillationBound {
    pub fn new(masses: &Masses, alpha: f64, i_max: f64) -> Result<Self> {
        if alpha > 2.0 {
            return Err(Error::AlphaTooLarge(alpha));
        }
        if !(i_max > 0.0 && i_max.is_finite()) {
            return Err(Error::InvalidInput(format!("I_max must be positive, got {i_max}")));
        }
        let total = masses.total();
        let m_min = masses.min();
        let omega0_sq = total * (m_min * m_min / (total * i_max)).powf((2.0 - alpha) / 2.0);
        Ok(Self {
            omega0_sq,
            t0: std::f64::consts::PI / omega0_sq.sqrt(),
            i_max,
            m_min,
            alpha,
            min_omega_sq: f64::INFINITY,
        })
    }

    pub fn holds(&self) -> bool {
        self.min_omega_sq >= self.omega0_sq
    }
}

/// Bound from the observed `I_max`, with `ω²(t)` evaluated at every accepted step.
pub fn omega_bound(traj: &Trajectory, alpha: f64) -> Result<OscillationBound> {
    let mut b = OscillationBound::new(traj.masses(), alpha, traj.meta().i_max)?;
    let pot = PotentialSpec::new(alpha, *traj.masses());
    for s in traj.samples() {
        b.min_omega_sq = b.min_omega_sq.min(omega_sq(s, &pot)?);
    }
    Ok(b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventKind {
    /// Collinear without collision; `middle` lies between the other two.
    Syzygy {
        middle: usize,
    },
    PairCollision {
        pair: (usize, usize),
    },
    TripleCollision,
}

impl EventKind {
    pub fn label(&self) -> &'static str {
        match self {
            EventKind::Syzygy { .. } => "syzygy",
            EventKind::PairCollision { .. } => "pair_collision",
            EventKind::TripleCollision => "triple_collision",
        }
    }

    pub fn detail(&self) -> String {
        match self {
            EventKind::Syzygy { middle } => format!("{}", middle + 1),
            EventKind::PairCollision { pair } => format!("{}{}", pair.0 + 1, pair.1 + 1),
            EventKind::TripleCollision => "123".to_string(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SyzygyEvent {
    pub t: f64,
    pub kind: EventKind,
    pub delta: f64,
    /// `S = Δ/√I` at the refined root.
    pub scaled: f64,
}

impl fmt::Display for SyzygyEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.16e},{},{}", self.t, self.kind.label(), self.kind.detail())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EventOptions {
    /// Largest spacing of the bracketing grid; `T₀/8` is a safe choice.
    pub max_step: Option<f64>,
    pub time_tol: f64,
    /// Pair collision when `min r < collision_ratio ×` initial largest distance.
    pub collision_ratio: f64,
    /// Triple collision when `I < triple_ratio × I(t_start)`.
    pub triple_ratio: f64,
}

impl Default for EventOptions {
    fn default() -> Self {
        Self {
            max_step: None,
            time_tol: 1e-12,
            collision_ratio: 1e-6,
            triple_ratio: 1e-12,
        }
    }
}

/// Index of the median projection on the line through the farthest pair.
fn middle_body(q: &[Vec2; 3]) -> usize {
    let pairs = [(0, 1), (1, 2), (2, 0)];
    let &(i, j) = pairs
        .iter()
        .max_by(|a, b| (q[a.0] - q[a.1]).norm_sq().total_cmp(&(q[b.0] - q[b.1]).norm_sq()))
        .unwrap_or(&(0, 1));
    let u = q[j] - q[i];
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| q[a].dot(u).total_cmp(&q[b].dot(u)));
    idx[1]
}

fn classify(s: &PhaseState, masses: &Masses, opts: &EventOptions, length0: f64, inertia0: f64) -> EventKind {
    if s.inertia(masses) < opts.triple_ratio * inertia0 {
        return EventKind::TripleCollision;
    }
    let r = s.distances();
    let n = (0..3).min_by(|&a, &b| r[a].total_cmp(&r[b])).unwrap_or(0);
    if r[n] < opts.collision_ratio * length0 {
        let (i, j, _) = CYCLIC[n];
        return EventKind::PairCollision {
            pair: (i.min(j), i.max(j)),
        };
    }
    EventKind::Syzygy {
        middle: middle_body(&s.q),
    }
}

/// Refines a sign change of `Δ` on `[a, b]` by Illinois false position with
/// a bisection step whenever the bracket stops shrinking fast enough.
fn refine_root(traj: &Trajectory, mut a: f64, mut fa: f64, mut b: f64, mut fb: f64, tol: f64) -> Result<PhaseState> {
    let eval = |t: f64| -> Result<(f64, PhaseState)> {
        let s = traj.state_at(t)?;
        Ok((s.oriented_area(), s))
    };
    let mut best = traj.state_at(if fa.abs() < fb.abs() { a } else { b })?;
    let mut side = 0i8;
    for _ in 0..200 {
        let width = b - a;
        if width <= tol * a.abs().max(1.0) {
            break;
        }
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !(c > a && c < b) {
            c = 0.5 * (a + b);
        }
        let (fc, sc) = eval(c)?;
        best = sc;
        if fc == 0.0 {
            break;
        }
        if fc.signum() == fa.signum() {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        } else {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        }
        if b - a > 0.5 * width {
            // Poor progress: bisect once.
            let m = 0.5 * (a + b);
            let (fm, sm) = eval(m)?;
            best = sm;
            if fm == 0.0 {
                break;
            }
            if fm.signum() == fa.signum() {
                a = m;
                fa = fm;
            } else {
                b = m;
                fb = fm;
            }
            side = 0;
        }
    }
    Ok(best)
}

/// Every zero of `Δ` along the trajectory, refined and classified, plus a
/// terminal collision event when the integration stopped at one.
pub fn detect_events(traj: &Trajectory, opts: &EventOptions) -> Result<Vec<SyzygyEvent>> {
    let masses = *traj.masses();
    let first = traj.samples()[0];
    require_zero_angular_momentum(&first)?;
    let length0 = first.length_scale();
    let inertia0 = first.inertia(&masses);
    let states = resampled_states(traj, opts.max_step)?;
    let mut events = Vec::new();
    let push = |s: &PhaseState, events: &mut Vec<SyzygyEvent>| {
        let d = delta_sample(s, &masses);
        events.push(SyzygyEvent {
            t: s.t,
            kind: classify(s, &masses, opts, length0, inertia0),
            delta: d.delta,
            scaled: d.scaled,
        });
    };
    if first.oriented_area() == 0.0 {
        push(&first, &mut events);
    }
    for w in states.windows(2) {
        let (fa, fb) = (w[0].oriented_area(), w[1].oriented_area());
        if fb == 0.0 {
            push(&w[1], &mut events);
        } else if fa != 0.0 && fa.signum() != fb.signum() {
            let root = refine_root(traj, w[0].t, fa, w[1].t, fb, opts.time_tol)?;
            push(&root, &mut events);
        }
    }
    if let Termination::CollisionApproach { pair, .. } = traj.meta().termination {
        let last = traj.last();
        let near_last = events
            .last()
            .is_some_and(|e| (last.t - e.t).abs() <= opts.time_tol * last.t.abs().max(1.0));
        if !near_last {
            let d = delta_sample(last, &masses);
            let kind = if last.inertia(&masses) < opts.triple_ratio * inertia0 {
                EventKind::TripleCollision
            } else {
                EventKind::PairCollision { pair }
            };
            events.push(SyzygyEvent {
                t: last.t,
                kind,
                delta: d.delta,
                scaled: d.scaled,
            });
        }
    }
    Ok(events)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GapKind {
    /// From the start of the span to the first zero.
    Leading,
    Between,
    /// From the last zero to the end of the span.
    Trailing,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapCheck {
    pub kind: GapKind,
    pub start: f64,
    pub end: f64,
    pub pass: bool,
}

impl GapCheck {
    pub fn length(&self) -> f64 {
        self.end - self.start
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GapCertificate {
    pub t0: f64,
    pub checks: Vec<GapCheck>,
}

impl GapCertificate {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn max_gap(&self) -> f64 {
        self.checks
            .iter()
            .filter(|c| c.kind == GapKind::Between)
            .map(GapCheck::length)
            .fold(0.0, f64::max)
    }
}

/// Every zero-free stretch of `[t_start, t_end]` must be shorter than `T₀`.
/// The trailing stretch is only judged when the span did not end in a collision.
pub fn gap_certificate(events: &[SyzygyEvent], bound: &OscillationBound, span: (f64, f64)) -> GapCertificate {
    let t0 = bound.t0;
    let eps = 1e-9 * t0;
    let mut checks = Vec::new();
    let mk = |kind, start: f64, end: f64| GapCheck {
        kind,
        start,
        end,
        pass: end - start < t0 + eps,
    };
    match events.first() {
        None => checks.push(mk(GapKind::Leading, span.0, span.1)),
        Some(e) => {
            checks.push(mk(GapKind::Leading, span.0, e.t));
            for w in events.windows(2) {
                checks.push(mk(GapKind::Between, w[0].t, w[1].t));
            }
            let last = events[events.len() - 1];
            if matches!(last.kind, EventKind::Syzygy { .. }) {
                checks.push(mk(GapKind::Trailing, last.t, span.1));
            }
        }
    }
    GapCertificate { t0, checks }
}
