use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid space: {0}")]
    InvalidSpace(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("pole of {what} at {at}")]
    Pole { what: &'static str, at: String },
    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },
    #[error("tail estimate {tail:e} exceeds tolerance {tol:e}")]
    TailTooLarge { tail: f64, tol: f64 },
    #[error("|Im lambda| = {im} is outside the analyticity strip of half-width {bound}")]
    StripViolation { im: f64, bound: f64 },
    #[error("contour of radius {radius} around {center} leaves the strip of half-width {bound}")]
    ContourExitsStrip { center: String, radius: f64, bound: f64 },
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("reduced word count {count} exceeds the cap {cap}")]
    WordCountExplosion { count: u128, cap: u128 },
    #[error("group looks non-discrete: {0}")]
    NonDiscrete(String),
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("orbit tail is unbounded: {0}")]
    TailUnbounded(String),
    #[error("endpoint singularity sigma^{exponent} not resolvable by the sigma quadrature")]
    EndpointSingularity { exponent: f64 },
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
