use thiserror::Error;

/// Errors raised by group, kernel, image and solver operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Evaluation closer than the exclusion radius to a pole of the kernel.
    #[error("evaluation at a pole (gauge distance {distance:e})")]
    Pole { distance: f64 },

    /// A pole that sits on or outside a reflecting hyperplane.
    #[error("invalid pole: {0}")]
    InvalidPole(String),

    #[error("point outside domain: {0}")]
    OutsideDomain(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    /// The strip series did not reach the requested tolerance before the cutoff cap.
    #[error("strip series not converged at J = {cutoff}: tail bound {bound:e} > {target:e}")]
    Truncation { cutoff: usize, bound: f64, target: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
