use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported derivative order {0} (maximum 5)")]
    UnsupportedOrder(usize),
    #[error("grid with {nodes} nodes cannot resolve {what}")]
    Resolution { nodes: usize, what: String },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degenerate domain: half-angle {0} leaves the Biot-Savart problem singular")]
    DegenerateDomain(f64),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parity error: {0}")]
    Parity(String),
    #[error("grid functions live on different grids")]
    GridMismatch,
    #[error("fixed-point iteration failed to contract after {shrinks} radius reductions (last radius {radius})")]
    NoConvergence { shrinks: usize, radius: f64 },
    #[error("no root of G before pi/2 (integration stopped at theta = {theta})")]
    NoRoot { theta: f64 },
    #[error("monotonicity violated: M became negative at theta = {theta}")]
    MonotonicityViolation { theta: f64 },
    #[error("integration failed at theta = {theta}: {reason}")]
    Integration { theta: f64, reason: String },
    #[error("impossible target L = {0}: roots satisfy L < pi/2")]
    ImpossibleTarget(f64),
    #[error("bracket [{lo}, {hi}] does not straddle the target (L(lo) = {l_lo}, L(hi) = {l_hi})")]
    Bracket { lo: f64, hi: f64, l_lo: f64, l_hi: f64 },
    #[error("time step {dt} exceeds the transport stability bound {limit}")]
    StepSize { dt: f64, limit: f64 },
    #[error("blow-up reached at time {time}")]
    BlowUp { time: f64 },
    #[error("dense matrix with {0} rows exceeds the memory guard")]
    MemoryGuard(usize),
    #[error("eigensolver failure: {0}")]
    Eigen(String),
}

pub type Result<T> = std::result::Result<T, Error>;
