use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("collision singularity: bodies {} and {} coincide", .0 + 1, .1 + 1)]
    CollisionSingularity(usize, usize),

    #[error("triple collision: moment of inertia vanishes")]
    TripleCollision,

    #[error("rank deficient constraint system")]
    RankDeficient,

    #[error("centroid not removed (residual {0:e})")]
    CentroidNotRemoved(f64),

    #[error("undefined tangent: body {} is stationary", .0 + 1)]
    StationaryBody(usize),

    #[error("hypothesis {constraint} violated: residual {residual:e} exceeds {tolerance:e}")]
    HypothesisViolated {
        constraint: &'static str,
        residual: f64,
        tolerance: f64,
    },

    #[error("degenerate circumcircle: bodies are collinear")]
    DegenerateCircumcircle,

    #[error("diameter undefined: {0} lines are parallel")]
    DiameterUndefined(&'static str),

    #[error("not an algebraic similarity instance: {0}")]
    NotSimilarityInstance(String),

    #[error("zero angular momentum required (L = {0:e})")]
    NonZeroAngularMomentum(f64),

    #[error("stationary body {}, constant undefined for alpha <= 0", .0 + 1)]
    ConstantUndefined(usize),

    #[error("bound requires alpha <= 2 (got {0})")]
    AlphaTooLarge(f64),

    #[error("shooting did not converge after {iterations} iterations (best residual {best_residual:e})")]
    NoConvergence { iterations: usize, best_residual: f64 },

    #[error("collision during shooting at t = {0}")]
    ShootingCollision(f64),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
