use super::{require, Hypothesis, Residual, ResidualSet};
use crate::error::{Error, Result};
use crate::state::{Masses, PhaseState, Tolerances, CYCLIC};
use crate::vec2::Vec2;

/// Relative distance of the third line from the intersection of the other two.
pub const CONCURRENCY_TOL: f64 = 1e-9;
const PARALLEL_WEDGE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ConcurrencyKind {
    Point(Vec2),
    /// Common unit direction, oriented with positive x (or positive y when vertical).
    Parallel(Vec2),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Concurrency {
    pub kind: ConcurrencyKind,
    /// Point kind: distance of the remaining line from the point.
    /// Parallel kind: largest pairwise wedge of the unit directions.
    pub residual: f64,
    /// Length scale that makes `residual` relative (1 for parallel).
    pub scale: f64,
    /// The pair of lines used for the intersection.
    pub pair: (usize, usize),
}

impl Concurrency {
    pub fn point(&self) -> Option<Vec2> {
        match self.kind {
            ConcurrencyKind::Point(p) => Some(p),
            ConcurrencyKind::Parallel(_) => None,
        }
    }

    pub fn direction(&self) -> Option<Vec2> {
        match self.kind {
            ConcurrencyKind::Parallel(d) => Some(d),
            ConcurrencyKind::Point(_) => None,
        }
    }

    pub fn is_parallel(&self) -> bool {
        matches!(self.kind, ConcurrencyKind::Parallel(_))
    }

    pub fn relative_residual(&self) -> f64 {
        self.residual / self.scale
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Circumdata {
    pub center: Vec2,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CircumcircleReport {
    pub circ: Circumdata,
    pub ct: Vec2,
    pub cn: Vec2,
    pub residuals: ResidualSet,
}

fn momentum_directions(state: &PhaseState, masses: &Masses) -> Result<[Vec2; 3]> {
    let m_bar = masses.total() / 3.0;
    let eps = 1e-12 * (state.twice_kinetic(masses) * m_bar).sqrt();
    let mut d = [Vec2::ZERO; 3];
    for k in 0..3 {
        let n = state.p[k].norm();
        if n <= eps || n == 0.0 {
            return Err(Error::StationaryBody(k));
        }
        d[k] = state.p[k] / n;
    }
    Ok(d)
}

fn canonical_direction(d: Vec2) -> Vec2 {
    if d.x > 0.0 || (d.x == 0.0 && d.y > 0.0) {
        d
    } else {
        -d
    }
}

fn concurrency(points: &[Vec2; 3], dirs: &[Vec2; 3]) -> Concurrency {
    let pairs = [(0, 1), (1, 2), (2, 0)];
    let (best, wedge) = pairs
        .iter()
        .map(|&(i, j)| ((i, j), dirs[i].wedge(dirs[j])))
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .unwrap_or(((0, 1), 0.0));
    if wedge.abs() < PARALLEL_WEDGE {
        return Concurrency {
            kind: ConcurrencyKind::Parallel(canonical_direction(dirs[0])),
            residual: wedge.abs(),
            scale: 1.0,
            pair: best,
        };
    }
    let (i, j) = best;
    let k = 3 - i - j;
    let s = (points[j] - points[i]).wedge(dirs[j]) / wedge;
    let x = points[i] + dirs[i] * s;
    let residual = (x - points[k]).wedge(dirs[k]).abs();
    let spread = points.iter().map(|p| p.norm()).fold(0.0, f64::max);
    Concurrency {
        kind: ConcurrencyKind::Point(x),
        residual,
        scale: x.norm().max(spread).max(f64::MIN_POSITIVE),
        pair: (i.min(j), i.max(j)),
    }
}

/// Common point (or direction) of the three lines through `q_k` along `p_k`.
pub fn centre_of_tangents(state: &PhaseState, masses: &Masses) -> Result<Concurrency> {
    centre_of_tangents_with(state, masses, &Tolerances::default())
}

pub fn centre_of_tangents_with(state: &PhaseState, masses: &Masses, tol: &Tolerances) -> Result<Concurrency> {
    require(
        state,
        masses,
        &[
            Hypothesis::Centroid,
            Hypothesis::LinearMomentum,
            Hypothesis::AngularMomentum,
        ],
        tol,
    )?;
    let d = momentum_directions(state, masses)?;
    Ok(concurrency(&state.q, &d))
}

/// Common point (or direction) of the three lines through `q_k` normal to `p_k`.
pub fn centre_of_normals(state: &PhaseState, masses: &Masses) -> Result<Concurrency> {
    centre_of_normals_with(state, masses, &Tolerances::default())
}

pub fn centre_of_normals_with(state: &PhaseState, masses: &Masses, tol: &Tolerances) -> Result<Concurrency> {
    require(
        state,
        masses,
        &[
            Hypothesis::Centroid,
            Hypothesis::LinearMomentum,
            Hypothesis::ConstantInertia,
        ],
        tol,
    )?;
    let d = momentum_directions(state, masses)?.map(Vec2::perp);
    Ok(concurrency(&state.q, &d))
}

fn is_collinear(q: &[Vec2; 3]) -> bool {
    let r_max = (0..3).map(|n| (q[n] - q[(n + 1) % 3]).norm()).fold(0.0, f64::max);
    let twice_area = (q[1] - q[0]).wedge(q[2] - q[0]);
    twice_area.abs() <= 1e-12 * r_max * r_max
}

/// Circumscribed circle of the position triangle.
pub fn circumcircle(q: &[Vec2; 3]) -> Result<Circumdata> {
    if is_collinear(q) {
        return Err(Error::DegenerateCircumcircle);
    }
    // Perpendicular bisectors of the two longest sides.
    let mut sides = [(0, 1), (1, 2), (2, 0)];
    sides.sort_by(|a, b| (q[b.0] - q[b.1]).norm().total_cmp(&(q[a.0] - q[a.1]).norm()));
    let bisector = |(i, j): (usize, usize)| ((q[i] + q[j]) * 0.5, (q[j] - q[i]).perp());
    let (p1, d1) = bisector(sides[0]);
    let (p2, d2) = bisector(sides[1]);
    let s = (p2 - p1).wedge(d2) / d1.wedge(d2);
    let center = p1 + d1 * s;
    let radius = (0..3).map(|k| (q[k] - center).norm()).sum::<f64>() / 3.0;
    Ok(Circumdata { center, radius })
}

/// Checks that the centres of tangents and normals are the ends of a
/// diameter of the circumcircle.
pub fn circumcircle_check(state: &PhaseState, masses: &Masses) -> Result<CircumcircleReport> {
    circumcircle_check_with(state, masses, &Tolerances::default())
}

pub fn circumcircle_check_with(state: &PhaseState, masses: &Masses, tol: &Tolerances) -> Result<CircumcircleReport> {
    state.ensure_finite()?;
    let circ = circumcircle(&state.q)?;
    let ct = centre_of_tangents_with(state, masses, tol)?;
    let cn = centre_of_normals_with(state, masses, tol)?;
    let (ct_pt, cn_pt) = match (ct.point(), cn.point()) {
        (Some(a), Some(b)) => (a, b),
        (None, _) => return Err(Error::DiameterUndefined("tangent")),
        (_, None) => return Err(Error::DiameterUndefined("normal")),
    };
    let r = circ.radius;
    let mut residuals = ResidualSet::new();
    residuals.push(Residual::new("tangents", None, ct.relative_residual(), CONCURRENCY_TOL));
    residuals.push(Residual::new("normals", None, cn.relative_residual(), CONCURRENCY_TOL));
    for k in 0..3 {
        let v = ((state.q[k] - circ.center).norm() - r) / r;
        residuals.push(Residual::new("circumradius", Some((k, k)), v, tol.rel));
    }
    let mid = (ct_pt + cn_pt) * 0.5;
    residuals.push(Residual::new(
        "diameter-midpoint",
        None,
        (mid - circ.center).norm() / r,
        CONCURRENCY_TOL,
    ));
    residuals.push(Residual::new(
        "diameter-tangents",
        None,
        ((ct_pt - circ.center).norm() - r) / r,
        CONCURRENCY_TOL,
    ));
    residuals.push(Residual::new(
        "diameter-normals",
        None,
        ((cn_pt - circ.center).norm() - r) / r,
        CONCURRENCY_TOL,
    ));
    Ok(CircumcircleReport {
        circ,
        ct: ct_pt,
        cn: cn_pt,
        residuals,
    })
}

/// Residuals of the synchronised similarity between the position triangle
/// and the momentum triangle, one group per cyclic pair.
pub fn similarity_report(state: &PhaseState, masses: &Masses) -> Result<ResidualSet> {
    similarity_report_with(state, masses, &Tolerances::default())
}

pub fn similarity_report_with(state: &PhaseState, masses: &Masses, tol: &Tolerances) -> Result<ResidualSet> {
    require(
        state,
        masses,
        &[
            Hypothesis::Centroid,
            Hypothesis::LinearMomentum,
            Hypothesis::AngularMomentum,
            Hypothesis::ConstantInertia,
        ],
        tol,
    )?;
    let r = state.distances();
    for (n, &(i, j, _)) in CYCLIC.iter().enumerate() {
        if r[n] == 0.0 {
            return Err(Error::CollisionSingularity(i.min(j), i.max(j)));
        }
    }
    let m = masses.as_array();
    let total = masses.total();
    let inertia = state.inertia(masses);
    let k2 = state.twice_kinetic(masses);
    if k2 == 0.0 {
        return Err(Error::NotSimilarityInstance("kinetic energy vanishes".into()));
    }
    let kappa = (masses.product() * k2 / (total * inertia)).sqrt();
    let v = state.velocities(masses);
    let mut out = ResidualSet::new();
    for (n, &(i, j, k)) in CYCLIC.iter().enumerate() {
        let pair = Some((i, j));
        out.push(Residual::new(
            "kappa",
            pair,
            (state.p[k].norm() / r[n] - kappa) / kappa,
            tol.rel,
        ));
        out.push(Residual::new(
            "side-kinetic",
            pair,
            m[i] * m[j] * r[n] * r[n] / (total * inertia) - m[k] * v[k].norm_sq() / k2,
            tol.rel,
        ));
        out.push(Residual::new(
            "moment-split",
            pair,
            m[k] * state.q[k].norm_sq() / inertia + m[k] * v[k].norm_sq() / k2 - (m[i] + m[j]) / total,
            tol.rel,
        ));
        out.push(Residual::new(
            "area",
            pair,
            state.q[i].wedge(state.q[j]) / inertia + v[i].wedge(v[j]) / k2,
            tol.rel,
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::fixtures::st1;
    use crate::state::{project_constraints, ConstraintFlags};
    use approx::assert_abs_diff_eq;

    #[test]
    fn st1_centre_of_tangents() {
        let (s, m) = st1();
        let c = centre_of_tangents(&s, &m).unwrap();
        let p = c.point().unwrap();
        assert_abs_diff_eq!(p.x, -1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.y, -4.0 / 3.0, epsilon = 1e-12);
        assert!(c.relative_residual() < 1e-12);
    }

    #[test]
    fn st1_centre_of_normals() {
        let (s, m) = st1();
        let p = centre_of_normals(&s, &m).unwrap().point().unwrap();
        assert_abs_diff_eq!(p.x, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.y, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn st2_tangents_parallel() {
        let (mut s, m) = st1();
        s.p = [Vec2::new(1.0, 1.0), Vec2::new(1.0, 1.0), Vec2::new(-2.0, -2.0)];
        let c = centre_of_tangents(&s, &m).unwrap();
        let d = c.direction().unwrap();
        let h = 0.5f64.sqrt();
        assert_abs_diff_eq!(d.x, h, epsilon = 1e-15);
        assert_abs_diff_eq!(d.y, h, epsilon = 1e-15);
    }

    #[test]
    fn rotated_st2_normals_parallel() {
        let (mut s, m) = st1();
        s.p = [Vec2::new(1.0, 1.0), Vec2::new(1.0, 1.0), Vec2::new(-2.0, -2.0)].map(Vec2::perp);
        let s = project_constraints(
            &s,
            &m,
            ConstraintFlags {
                zero_linear: true,
                zero_angular: false,
                zero_inertia_rate: true,
            },
        )
        .unwrap();
        assert!(centre_of_normals(&s, &m).unwrap().is_parallel());
    }

    #[test]
    fn stationary_body_rejected() {
        let m = Masses::equal(1.0).unwrap();
        let s = PhaseState::new(
            0.0,
            [Vec2::new(1.0, 1.0), Vec2::new(-1.0, -1.0), Vec2::ZERO],
            [Vec2::new(1.0, 1.0), Vec2::new(-1.0, -1.0), Vec2::ZERO],
        );
        assert_eq!(centre_of_tangents(&s, &m), Err(Error::StationaryBody(2)));
    }

    #[test]
    fn normals_require_constant_inertia() {
        let (mut s, m) = st1();
        s.p = [Vec2::new(1.2, 1.0), Vec2::new(-0.4, -1.4), Vec2::new(-0.8, 0.4)];
        match centre_of_normals(&s, &m) {
            Err(Error::HypothesisViolated { constraint, .. }) => assert_eq!(constraint, "I=const"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn st1_diameter() {
        let (s, m) = st1();
        let rep = circumcircle_check(&s, &m).unwrap();
        assert_abs_diff_eq!(rep.circ.center.x, -1.0 / 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rep.circ.center.y, -1.0 / 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rep.circ.radius * rep.circ.radius, 50.0 / 36.0, epsilon = 1e-12);
        assert!(rep.residuals.all_pass(), "{:?}", rep.residuals);
    }

    #[test]
    fn collinear_circumcircle_rejected() {
        let m = Masses::equal(1.0).unwrap();
        let s = PhaseState::new(
            0.0,
            [Vec2::new(-1.0, 0.0), Vec2::ZERO, Vec2::new(1.0, 0.0)],
            [Vec2::new(0.0, 1.0), Vec2::new(0.0, -2.0), Vec2::new(0.0, 1.0)],
        );
        assert_eq!(circumcircle_check(&s, &m), Err(Error::DegenerateCircumcircle));
    }

    #[test]
    fn st1_similarity() {
        let (s, m) = st1();
        let rep = similarity_report(&s, &m).unwrap();
        assert_eq!(rep.len(), 12);
        assert!(rep.max_abs() < 1e-14, "{rep:?}");
        let a12 = rep.get("area", Some((0, 1))).unwrap();
        assert_abs_diff_eq!(a12.value, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn coincident_bodies_rejected() {
        let m = Masses::equal(1.0).unwrap();
        let s = PhaseState::new(
            0.0,
            [Vec2::new(1.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(-2.0, 0.0)],
            [Vec2::new(0.0, 1.0), Vec2::new(0.0, -1.0), Vec2::ZERO],
        );
        assert_eq!(similarity_report(&s, &m), Err(Error::CollisionSingularity(0, 1)));
    }
}
