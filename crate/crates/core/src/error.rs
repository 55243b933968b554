use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid machine spec: {0}")]
    InvalidSpec(String),

    #[error("invalid input string: {0}")]
    InvalidInput(String),

    #[error("work head left the tape window at position {position} (half-width {half_width})")]
    WindowOverflow { position: i64, half_width: usize },

    #[error("code out of chart: {0}")]
    OutOfChart(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("smoothing parameter must lie in (0,1), got {0}")]
    InvalidMu(f64),

    #[error("weight {requested} exceeds the degree budget {k_max}")]
    Budget { requested: usize, k_max: usize },

    #[error("resource guard: {0}")]
    ResourceGuard(String),

    #[error("invalid error syndrome: {0}")]
    InvalidSyndrome(String),

    #[error("coordinate {0} is outside 1..={1}")]
    InvalidCoordinate(usize, usize),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("degenerate region: {0}")]
    DegenerateRegion(String),

    #[error("infinite likelihood: observation has zero model probability")]
    InfiniteLikelihood,

    #[error("empty support: no Newton bound")]
    EmptySupport,

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
