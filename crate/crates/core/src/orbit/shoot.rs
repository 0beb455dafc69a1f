use nalgebra::{DMatrix, DVector};

use super::{measure, OrbitRecord, Provenance};
use crate::dynamics::{integrate, IntegrateOptions, PotentialSpec};
use crate::error::{Error, Result};
use crate::state::PhaseState;
use crate::vec2::Vec2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShootOptions {
    pub max_iterations: usize,
    /// Convergence threshold on the scaled quarter-period symmetry residual.
    pub tolerance: f64,
    pub fd_step: f64,
    /// Extra iterations allowed after reaching `tolerance`.
    pub polish_steps: usize,
    pub integrator: IntegrateOptions,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self {
            max_iterations: 60,
            tolerance: 1e-9,
            fd_step: 1e-7,
            polish_steps: 6,
            integrator: IntegrateOptions::with_tolerances(1e-13, 1e-15),
        }
    }
}

/// Quarter-period map in the frame where body 1 starts on the positive x axis.
///
/// At `t = 0` the bodies are in the Euler configuration `q1 = −q2 = (x1, 0)`,
/// `q3 = 0`, `v1 = v2 = −v3/2`. A quarter period later the triangle is
/// isosceles about the axis through body 3: with `S` the reflection in that
/// axis, `v3 ⟂ axis`, `q1 = S q2` and `v1 = −S v2`.
struct QuarterMap<'a> {
    potential: &'a PotentialSpec,
    x1: f64,
    /// For `α = −2` the unknowns are `(θ, τ)` with `|v3|` fixed by `E = 0`.
    zero_energy: bool,
    opts: IntegrateOptions,
}

impl QuarterMap<'_> {
    fn state(&self, w: Vec2) -> PhaseState {
        let m = self.potential.masses.get(0);
        let q1 = Vec2::new(self.x1, 0.0);
        let v1 = w * -0.5;
        PhaseState::new(0.0, [q1, -q1, Vec2::ZERO], [v1 * m, v1 * m, w * m])
    }

    /// `|w|` that makes the total energy vanish.
    fn zero_energy_speed(&self) -> Result<f64> {
        let v = self.potential.potential_energy(&self.state(Vec2::ZERO).q)?;
        let m = self.potential.masses.get(0);
        if v >= 0.0 {
            return Err(Error::InvalidInput("zero energy needs negative potential".into()));
        }
        Ok((-4.0 * v / (3.0 * m)).sqrt())
    }

    fn unpack(&self, x: &[f64]) -> Result<(Vec2, f64)> {
        if self.zero_energy {
            Ok((Vec2::from_polar(self.zero_energy_speed()?, x[0]), x[1]))
        } else {
            Ok((Vec2::new(x[0], x[1]), x[2]))
        }
    }

    fn pack(&self, w: Vec2, tau: f64) -> Vec<f64> {
        if self.zero_energy {
            vec![w.angle(), tau]
        } else {
            vec![w.x, w.y, tau]
        }
    }

    fn residual(&self, x: &[f64]) -> Result<DVector<f64>> {
        let (w, tau) = self.unpack(x)?;
        if !(tau > 0.0) || w.norm() == 0.0 {
            return Err(Error::InvalidInput("degenerate shooting parameters".into()));
        }
        let start = self.state(w);
        let traj = integrate(&start, self.potential, (0.0, tau), &self.opts)?;
        if traj.meta().termination.is_collision() {
            return Err(Error::ShootingCollision(traj.t_end()));
        }
        let end = traj.last();
        let masses = &self.potential.masses;
        let v = end.velocities(masses);
        let u = end.q[2]
            .unit()
            .ok_or_else(|| Error::InvalidInput("body 3 at the origin at the quarter period".into()))?;
        let (qs, vs) = (self.x1, w.norm());
        let dq = end.q[0] - end.q[1].reflect(u);
        let dv = v[0] + v[1].reflect(u);
        Ok(DVector::from_vec(vec![
            v[2].dot(u) / vs,
            dq.x / qs,
            dq.y / qs,
            dv.x / vs,
            dv.y / vs,
        ]))
    }

    fn jacobian(&self, x: &[f64], r0: &DVector<f64>, step: f64) -> Result<DMatrix<f64>> {
        let n = x.len();
        let mut jac = DMatrix::zeros(r0.len(), n);
        for j in 0..n {
            let h = step * x[j].abs().max(1.0);
            let mut xp = x.to_vec();
            xp[j] += h;
            let rp = self.residual(&xp)?;
            jac.set_column(j, &((rp - r0) / h));
        }
        Ok(jac)
    }
}

fn max_abs(r: &DVector<f64>) -> f64 {
    r.amax()
}

/// One Levenberg–Marquardt step with Marquardt scaling; `None` when no
/// damping level reduces the residual norm.
fn lm_step(
    map: &QuarterMap<'_>,
    x: &[f64],
    r: &DVector<f64>,
    lambda: &mut f64,
    fd_step: f64,
) -> Option<(Vec<f64>, DVector<f64>)> {
    let jac = map.jacobian(x, r, fd_step).ok()?;
    let jtj = jac.transpose() * &jac;
    let g = jac.transpose() * r;
    for _ in 0..12 {
        let mut a = jtj.clone();
        for d in 0..a.nrows() {
            a[(d, d)] += *lambda * jtj[(d, d)].max(1e-12);
        }
        let Some(delta) = a.cholesky().map(|c| c.solve(&(-&g))) else {
            *lambda *= 4.0;
            continue;
        };
        let trial: Vec<f64> = x.iter().zip(delta.iter()).map(|(a, b)| a + b).collect();
        match map.residual(&trial) {
            Ok(rt) if rt.norm() < r.norm() => {
                *lambda = (*lambda / 3.0).max(1e-12);
                return Some((trial, rt));
            }
            _ => *lambda *= 4.0,
        }
    }
    None
}

/// Refines a figure-eight guess by damped least squares on the quarter-period
/// symmetry map. Only `q1`, `p3` and the period of `guess` are used; the
/// result is rotated back into the frame of the guess.
pub fn shoot_periodic(
    guess: &PhaseState,
    period: f64,
    potential: &PotentialSpec,
    source: &str,
    opts: &ShootOptions,
) -> Result<OrbitRecord> {
    guess.ensure_finite()?;
    let masses = potential.masses;
    if !masses.is_equal() {
        return Err(Error::InvalidInput("symmetric shooting requires equal masses".into()));
    }
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::InvalidInput(format!("period must be positive, got {period}")));
    }
    let frame = guess.q[0].angle();
    let x1 = guess.q[0].norm();
    if x1 == 0.0 {
        return Err(Error::InvalidInput("body 1 at the origin in the guess".into()));
    }
    let map = QuarterMap {
        potential,
        x1,
        zero_energy: potential.alpha == -2.0,
        opts: opts.integrator,
    };
    let w0 = (guess.p[2] / masses.get(2)).rotate(-frame);
    let mut x = map.pack(w0, 0.25 * period);
    let mut r = map.residual(&x)?;
    let mut lambda = 1e-3;
    let mut iterations = 0;
    // Once below tolerance keep polishing while each step at least halves the
    // residual: closure over a full period amplifies what is left.
    let mut polishing = 0;
    while polishing < opts.polish_steps {
        let converged = max_abs(&r) < opts.tolerance;
        if converged {
            polishing += 1;
        } else if iterations >= opts.max_iterations {
            return Err(Error::NoConvergence {
                iterations,
                best_residual: max_abs(&r),
            });
        }
        iterations += 1;
        match lm_step(&map, &x, &r, &mut lambda, opts.fd_step) {
            Some((xn, rn)) if !converged || max_abs(&rn) < 0.5 * max_abs(&r) => {
                x = xn;
                r = rn;
            }
            Some(_) | None if converged => break,
            _ => {
                return Err(Error::NoConvergence {
                    iterations,
                    best_residual: max_abs(&r),
                })
            }
        }
    }

    let (w, tau) = map.unpack(&x)?;
    let initial = map.state(w).rotated(frame);
    let period = 4.0 * tau;
    let residuals = measure(&initial, potential, period, max_abs(&r), &opts.integrator)?;
    Ok(OrbitRecord {
        alpha: potential.alpha,
        masses,
        initial,
        period,
        residuals,
        provenance: Provenance {
            guess: source.to_string(),
            iterations,
            rtol: opts.integrator.rtol,
            atol: opts.integrator.atol,
        },
    })
}
