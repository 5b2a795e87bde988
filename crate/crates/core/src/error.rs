use thiserror::Error;

/// Failures surfaced by the transport, dynamics and oracle layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unstable characteristic root s = {re:+.6e} {im:+.6e}i (Re s >= 0)")]
    UnstableRoot { re: f64, im: f64 },

    #[error(
        "near-degenerate characteristic roots (separation {separation:.3e}, scale {scale:.3e})"
    )]
    DegenerateRoots { separation: f64, scale: f64 },

    #[error("root polishing failed: residual {residual:.3e} exceeds {tolerance:.3e}")]
    RootResidual { residual: f64, tolerance: f64 },

    #[error("singular kernel |A|^p + eps|B|^2 at t = {t}")]
    SingularKernel { t: f64 },

    #[error(
        "quadrature did not converge: estimated error {estimate:.3e} > tolerance {tolerance:.3e}"
    )]
    Quadrature { estimate: f64, tolerance: f64 },

    #[error(
        "denominator of the stationarity condition vanishes (1 - 2 I_f/p = {denominator:.3e})"
    )]
    Pole { denominator: f64 },

    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("dimension {dimension} exceeds cap {cap}")]
    DimensionCap { dimension: usize, cap: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
