use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid weight: {0}")]
    InvalidWeight(String),
    #[error("exponent budget exceeded: q*3*L_v^2 = {value:.1} > {budget} (e^(q|v|^2) would amplify truncation error)")]
    ExponentBudget { value: f64, budget: f64 },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("non-finite value in {context} at node {node:?} (v = {coords:?})")]
    NonFinite {
        context: String,
        node: [usize; 3],
        coords: [f64; 3],
    },
    #[error("degenerate Gram matrix while orthonormalising invariant {index} (residual norm {residual:.3e})")]
    DegenerateGram { index: usize, residual: f64 },
    #[error("FFT size {size}^3 exceeds the supported limit")]
    FftTooLarge { size: usize },
    #[error("linear solve did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("penrose margin {margin:.4} below the guard {required:.4}")]
    MarginGuard { margin: f64, required: f64 },
    #[error("resolvent inversion: |G~(i tau_max)| = {value:.3e} exceeds 1e-4; raise tau_max")]
    TauRangeTooShort { value: f64 },
    #[error("kernel imaginary residue {ratio:.3e} of max|K| exceeds 1e-6")]
    KernelNotReal { ratio: f64 },
    #[error("degenerate series: {0}")]
    DegenerateSeries(String),
    #[error(
        "derivative budget exceeded: {used} velocity derivatives requested, at most {allowed}"
    )]
    BudgetExceeded { used: usize, allowed: usize },
    #[error("energy form indefinite (value {value:.3e}); increase A0 (currently {a0})")]
    Indefinite { value: f64, a0: f64 },
    #[error("hypothesis violated: {what} (residual {residual:.3e})")]
    HypothesisViolated { what: String, residual: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("time grids do not match")]
    TimeGridMismatch,
    #[error("config error: {0}")]
    Config(String),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
