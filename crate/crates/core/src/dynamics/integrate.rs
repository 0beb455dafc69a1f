use super::tableau::{A, B_HIGH, B_LOW, STAGES};
use super::PotentialSpec;
use crate::error::{Error, Result};
use crate::state::{Masses, PhaseState};
use crate::vec2::Vec2;

type Y = [f64; 12];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegrateOptions {
    pub rtol: f64,
    pub atol: f64,
    pub stop_on_close_approach: bool,
    /// Stop radius as a fraction of the initial largest mutual distance.
    pub close_approach_ratio: f64,
    pub max_steps: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            stop_on_close_approach: true,
            close_approach_ratio: 1e-6,
            max_steps: 5_000_000,
        }
    }
}

impl IntegrateOptions {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Termination {
    SpanEnd,
    /// A pair came closer than the stop radius, or the step size underflowed
    /// while approaching a singularity.
    CollisionApproach {
        pair: (usize, usize),
        distance: f64,
        underflow: bool,
    },
    StepLimit,
}

impl Termination {
    pub fn is_collision(&self) -> bool {
        matches!(self, Termination::CollisionApproach { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Termination::SpanEnd => "span end",
            Termination::CollisionApproach { .. } => "collision approach",
            Termination::StepLimit => "step limit",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryMeta {
    pub alpha: f64,
    pub rtol: f64,
    pub atol: f64,
    pub termination: Termination,
    /// Largest moment of inertia over the dense output, including interior maxima.
    pub i_max: f64,
    pub min_distance: f64,
    pub initial_energy: f64,
    /// `K/2 + |V|` at the start, the yardstick for near-zero energies.
    pub energy_magnitude: f64,
    pub initial_angular_momentum: f64,
    pub max_energy_error: f64,
    pub max_angular_momentum_error: f64,
    /// Largest `Σ |q_k| |p_k|` seen, the yardstick for angular momentum drift.
    pub angular_momentum_scale: f64,
    pub length_scale: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl TrajectoryMeta {
    /// Energy error relative to `|E(0)|`, or to `K/2 + |V|` when the total
    /// energy is below a thousandth of that (zero-energy orbits).
    pub fn relative_energy_drift(&self) -> f64 {
        let scale = if self.initial_energy.abs() >= 1e-3 * self.energy_magnitude {
            self.initial_energy.abs()
        } else {
            self.energy_magnitude
        };
        if scale == 0.0 {
            self.max_energy_error
        } else {
            self.max_energy_error / scale
        }
    }

    pub fn relative_angular_momentum_drift(&self) -> f64 {
        if self.angular_momentum_scale == 0.0 {
            self.max_angular_momentum_error
        } else {
            self.max_angular_momentum_error / self.angular_momentum_scale
        }
    }
}

/// Accepted integrator states plus a continuous extension that re-integrates
/// from the nearest preceding sample, so off-grid evaluations carry the same
/// error control as the grid itself.
#[derive(Clone, Debug)]
pub struct Trajectory {
    potential: PotentialSpec,
    samples: Vec<PhaseState>,
    meta: TrajectoryMeta,
}

struct Rhs<'a> {
    potential: &'a PotentialSpec,
}

impl Rhs<'_> {
    fn eval(&self, y: &Y) -> Result<Y> {
        let q = [Vec2::new(y[0], y[1]), Vec2::new(y[2], y[3]), Vec2::new(y[4], y[5])];
        let a = self.potential.accelerations(&q)?;
        let mut out = [0.0; 12];
        out[..6].copy_from_slice(&y[6..]);
        for k in 0..3 {
            out[6 + 2 * k] = a[k].x;
            out[7 + 2 * k] = a[k].y;
        }
        Ok(out)
    }
}

fn pack(state: &PhaseState, masses: &Masses) -> Y {
    let v = state.velocities(masses);
    let mut y = [0.0; 12];
    for k in 0..3 {
        y[2 * k] = state.q[k].x;
        y[2 * k + 1] = state.q[k].y;
        y[6 + 2 * k] = v[k].x;
        y[7 + 2 * k] = v[k].y;
    }
    y
}

fn unpack(t: f64, y: &Y, masses: &Masses) -> PhaseState {
    let q = std::array::from_fn(|k| Vec2::new(y[2 * k], y[2 * k + 1]));
    let v = std::array::from_fn(|k| Vec2::new(y[6 + 2 * k], y[7 + 2 * k]));
    PhaseState::from_velocities(t, q, v, masses)
}

struct Stepper<'a> {
    rhs: Rhs<'a>,
    rtol: f64,
    atol: f64,
}

impl Stepper<'_> {
    /// One step of size `h`; returns the ninth-order update and the scaled
    /// error norm of the embedded estimate.
    fn step(&self, y: &Y, h: f64) -> Result<(Y, f64)> {
        let mut k = [[0.0; 12]; STAGES];
        for s in 0..STAGES {
            let mut ys = *y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    for n in 0..12 {
                        ys[n] += h * a * kj[n];
                    }
                }
            }
            k[s] = self.rhs.eval(&ys)?;
        }
        let mut y_new = *y;
        let mut err = 0.0f64;
        for n in 0..12 {
            let mut hi = 0.0;
            let mut diff = 0.0;
            for s in 0..STAGES {
                hi += B_HIGH[s] * k[s][n];
                diff += (B_HIGH[s] - B_LOW[s]) * k[s][n];
            }
            y_new[n] += h * hi;
            let sc = self.atol + self.rtol * y[n].abs().max(y_new[n].abs());
            err = err.max((h * diff).abs() / sc);
        }
        if !y_new.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("integrator state"));
        }
        Ok((y_new, err))
    }

    fn initial_step(&self, y: &Y, span: f64) -> Result<f64> {
        let f0 = self.rhs.eval(y)?;
        let sc: Vec<f64> = y.iter().map(|x| self.atol + self.rtol * x.abs()).collect();
        let norm = |v: &Y| v.iter().zip(&sc).map(|(a, s)| (a / s).abs()).fold(0.0, f64::max);
        let d0 = norm(y);
        let d1 = norm(&f0);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span);
        let mut y1 = *y;
        for n in 0..12 {
            y1[n] += h0 * f0[n];
        }
        let f1 = self.rhs.eval(&y1)?;
        let mut diff = [0.0; 12];
        for n in 0..12 {
            diff[n] = f1[n] - f0[n];
        }
        let d2 = norm(&diff) / h0;
        let dm = d1.max(d2);
        let h1 = if dm <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / dm).powf(1.0 / 9.0)
        };
        Ok((100.0 * h0).min(h1).min(span))
    }

    /// Adaptive advance from `(t0, y0)` to exactly `t1`, starting with a
    /// single step when the tolerance allows it.
    fn advance(&self, t0: f64, y0: &Y, t1: f64) -> Result<Y> {
        let mut t = t0;
        let mut y = *y0;
        let mut h = t1 - t0;
        let mut guard = 0usize;
        while t < t1 {
            let last = t + h >= t1;
            let step = if last { t1 - t } else { h };
            match self.step(&y, step) {
                Ok((y_new, err)) if err <= 1.0 => {
                    t = if last { t1 } else { t + step };
                    y = y_new;
                    h = step * (0.9 * err.max(1e-10).powf(-1.0 / 9.0)).min(5.0);
                }
                Ok((_, err)) => h = step * (0.9 * err.powf(-1.0 / 9.0)).clamp(0.1, 0.9),
                Err(_) => h = step * 0.25,
            }
            guard += 1;
            if t < t1 && (guard > 1_000_000 || !(h > 8.0 * f64::EPSILON * t.abs())) {
                return Err(Error::NonFinite("dense output step underflow"));
            }
        }
        Ok(y)
    }
}

struct Monitor {
    masses: Masses,
    potential: PotentialSpec,
    e0: f64,
    e_mag: f64,
    l0: f64,
    max_de: f64,
    max_dl: f64,
    l_scale: f64,
    i_max: f64,
    min_r: f64,
}

impl Monitor {
    fn new(state: &PhaseState, potential: &PotentialSpec) -> Result<Self> {
        let masses = potential.masses;
        let k = 0.5 * state.twice_kinetic(&masses);
        let v = potential.potential_energy(&state.q)?;
        let l0 = state.angular_momentum();
        Ok(Self {
            masses,
            potential: *potential,
            e0: k + v,
            e_mag: k + v.abs(),
            l0,
            max_de: 0.0,
            max_dl: 0.0,
            l_scale: angular_scale(state),
            i_max: state.recentred(&masses).inertia(&masses),
            min_r: state.distances().into_iter().fold(f64::INFINITY, f64::min),
        })
    }

    fn observe(&mut self, state: &PhaseState) {
        if let Ok(v) = self.potential.potential_energy(&state.q) {
            let e = 0.5 * state.twice_kinetic(&self.masses) + v;
            self.max_de = self.max_de.max((e - self.e0).abs());
        }
        self.max_dl = self.max_dl.max((state.angular_momentum() - self.l0).abs());
        self.l_scale = self.l_scale.max(angular_scale(state));
        self.i_max = self.i_max.max(state.recentred(&self.masses).inertia(&self.masses));
        self.min_r = state.distances().into_iter().fold(self.min_r, f64::min);
    }

    fn finish(
        self,
        rtol: f64,
        atol: f64,
        termination: Termination,
        length_scale: f64,
        steps: (usize, usize),
    ) -> TrajectoryMeta {
        TrajectoryMeta {
            alpha: self.potential.alpha,
            rtol,
            atol,
            termination,
            i_max: self.i_max,
            min_distance: self.min_r,
            initial_energy: self.e0,
            energy_magnitude: self.e_mag,
            initial_angular_momentum: self.l0,
            max_energy_error: self.max_de,
            max_angular_momentum_error: self.max_dl,
            angular_momentum_scale: self.l_scale,
            length_scale,
            accepted_steps: steps.0,
            rejected_steps: steps.1,
        }
    }
}

fn angular_scale(state: &PhaseState) -> f64 {
    (0..3).map(|k| state.q[k].norm() * state.p[k].norm()).sum()
}

fn inertia_rate(y: &Y, masses: &Masses) -> f64 {
    2.0 * (0..3)
        .map(|k| masses.get(k) * (y[2 * k] * y[6 + 2 * k] + y[2 * k + 1] * y[7 + 2 * k]))
        .sum::<f64>()
}

fn closest_pair(state: &PhaseState) -> ((usize, usize), f64) {
    let r = state.distances();
    let n = (0..3).min_by(|&a, &b| r[a].total_cmp(&r[b])).unwrap_or(0);
    let (i, j, _) = crate::state::CYCLIC[n];
    ((i.min(j), i.max(j)), r[n])
}

/// Integrates the equations of motion over `span = (t_start, t_end)` with an
/// embedded 9(8) Runge–Kutta pair under local error control.
pub fn integrate(
    initial: &PhaseState,
    potential: &PotentialSpec,
    span: (f64, f64),
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    initial.ensure_finite()?;
    let (t0, t1) = span;
    if !(t0.is_finite() && t1.is_finite()) || t1 < t0 {
        return Err(Error::InvalidInput(format!("invalid time span [{t0}, {t1}]")));
    }
    if !(opts.rtol > 0.0 && opts.atol > 0.0) {
        return Err(Error::InvalidInput("tolerances must be positive".into()));
    }
    potential.accelerations(&initial.q)?;
    let masses = potential.masses;
    let start = PhaseState { t: t0, ..*initial };
    let length_scale = start.length_scale();
    let stop_radius = opts.close_approach_ratio * length_scale;
    let stepper = Stepper {
        rhs: Rhs { potential },
        rtol: opts.rtol,
        atol: opts.atol,
    };
    let mut monitor = Monitor::new(&start, potential)?;
    let mut samples = vec![start];
    let mut y = pack(&start, &masses);
    let mut t = t0;
    let mut accepted = 0usize;
    let mut rejected = 0usize;
    let t_char = potential.characteristic_time(&start);
    let mut h = if t1 > t0 {
        stepper.initial_step(&y, t1 - t0)?
    } else {
        0.0
    };

    let termination = loop {
        if t >= t1 {
            break Termination::SpanEnd;
        }
        if accepted >= opts.max_steps {
            break Termination::StepLimit;
        }
        let h_min = 8.0 * f64::EPSILON * t.abs().max(t_char);
        if h < h_min {
            let last = unpack(t, &y, &masses);
            let (pair, distance) = closest_pair(&last);
            break Termination::CollisionApproach {
                pair,
                distance,
                underflow: true,
            };
        }
        let last_step = t + h >= t1;
        let step = if last_step { t1 - t } else { h };
        match stepper.step(&y, step) {
            Ok((y_new, err)) if err <= 1.0 => {
                let t_new = if last_step { t1 } else { t + step };
                let i_rate_old = inertia_rate(&y, &masses);
                let i_rate_new = inertia_rate(&y_new, &masses);
                if i_rate_old > 0.0 && i_rate_new < 0.0 {
                    if let Some(i_peak) = interior_inertia_peak(&stepper, &y, step, &masses) {
                        monitor.i_max = monitor.i_max.max(i_peak);
                    }
                }
                y = y_new;
                t = t_new;
                accepted += 1;
                let state = unpack(t, &y, &masses);
                monitor.observe(&state);
                samples.push(state);
                h = step * (0.9 * err.max(1e-10).powf(-1.0 / 9.0)).min(5.0);
                if opts.stop_on_close_approach {
                    let (pair, distance) = closest_pair(&state);
                    if distance < stop_radius {
                        break Termination::CollisionApproach {
                            pair,
                            distance,
                            underflow: false,
                        };
                    }
                }
            }
            Ok((_, err)) => {
                rejected += 1;
                h = step * (0.9 * err.powf(-1.0 / 9.0)).clamp(0.1, 0.9);
            }
            Err(_) => {
                rejected += 1;
                h = step * 0.25;
            }
        }
    };

    let meta = monitor.finish(opts.rtol, opts.atol, termination, length_scale, (accepted, rejected));
    Ok(Trajectory {
        potential: *potential,
        samples,
        meta,
    })
}

/// Locates the zero of `dI/dt` inside an accepted step by regula falsi on
/// sub-steps from the step origin, and returns `I` there.
fn interior_inertia_peak(stepper: &Stepper<'_>, y0: &Y, h: f64, masses: &Masses) -> Option<f64> {
    let rate_at = |s: f64| -> Option<(f64, Y)> {
        let (y, _) = stepper.step(y0, s).ok()?;
        Some((inertia_rate(&y, masses), y))
    };
    let (mut a, mut fa) = (0.0, inertia_rate(y0, masses));
    let (mut b, mut fb) = (h, rate_at(h)?.0);
    let mut y_best = *y0;
    let mut side = 0i8;
    for _ in 0..80 {
        let c = (a * fb - b * fa) / (fb - fa);
        let (fc, yc) = rate_at(c)?;
        y_best = yc;
        if fc == 0.0 || (b - a).abs() <= 1e-14 * h.abs() {
            break;
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        if fc.abs() < 1e-15 * (fa.abs() + fb.abs()) {
            break;
        }
    }
    Some(
        (0..3)
            .map(|k| masses.get(k) * (y_best[2 * k].powi(2) + y_best[2 * k + 1].powi(2)))
            .sum(),
    )
}

impl Trajectory {
    /// Wraps externally produced samples (for example a CSV export); the
    /// continuous extension re-integrates between them at the given tolerances.
    pub fn from_samples(potential: PotentialSpec, samples: Vec<PhaseState>, rtol: f64, atol: f64) -> Result<Self> {
        let first = samples
            .first()
            .ok_or_else(|| Error::InvalidInput("trajectory has no samples".into()))?;
        if samples.windows(2).any(|w| w[1].t <= w[0].t) {
            return Err(Error::InvalidInput("sample times must be strictly increasing".into()));
        }
        for s in &samples {
            s.ensure_finite()?;
        }
        let mut monitor = Monitor::new(first, &potential)?;
        for s in &samples[1..] {
            monitor.observe(s);
        }
        let length_scale = first.length_scale();
        let steps = samples.len() - 1;
        let meta = monitor.finish(rtol, atol, Termination::SpanEnd, length_scale, (steps, 0));
        Ok(Self {
            potential,
            samples,
            meta,
        })
    }

    pub fn samples(&self) -> &[PhaseState] {
        &self.samples
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }

    pub fn masses(&self) -> &Masses {
        &self.potential.masses
    }

    pub fn meta(&self) -> &TrajectoryMeta {
        &self.meta
    }

    pub fn t_start(&self) -> f64 {
        self.samples[0].t
    }

    pub fn t_end(&self) -> f64 {
        self.samples[self.samples.len() - 1].t
    }

    pub fn last(&self) -> &PhaseState {
        &self.samples[self.samples.len() - 1]
    }

    /// State at any `t` inside the span.
    pub fn state_at(&self, t: f64) -> Result<PhaseState> {
        if !(t >= self.t_start() && t <= self.t_end()) {
            return Err(Error::InvalidInput(format!(
                "t = {t} outside trajectory span [{}, {}]",
                self.t_start(),
                self.t_end()
            )));
        }
        let idx = self.samples.partition_point(|s| s.t <= t) - 1;
        let base = &self.samples[idx];
        if base.t == t {
            return Ok(*base);
        }
        let stepper = Stepper {
            rhs: Rhs {
                potential: &self.potential,
            },
            rtol: self.meta.rtol,
            atol: self.meta.atol,
        };
        let y = stepper.advance(base.t, &pack(base, self.masses()), t)?;
        Ok(unpack(t, &y, self.masses()))
    }

    /// `n` states evenly spaced in time over the span, endpoints included.
    pub fn uniform_states(&self, n: usize) -> Result<Vec<PhaseState>> {
        let (a, b) = (self.t_start(), self.t_end());
        match n {
            0 => Ok(Vec::new()),
            1 => Ok(vec![self.samples[0]]),
            _ => (0..n)
                .map(|i| {
                    let t = if i == n - 1 {
                        b
                    } else {
                        a + (b - a) * i as f64 / (n - 1) as f64
                    };
                    self.state_at(t)
                })
                .collect(),
        }
    }
}
