use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// `n - delta` is not positive, so the effective quantum number is unphysical.
    #[error("quantum defect {delta} too large for n = {n}")]
    DefectTooLarge { n: f64, delta: f64 },

    #[error(
        "adaptive quadrature did not converge after {panels} panels \
         (error estimate {estimate:e}, requested {requested:e})"
    )]
    QuadratureNonConvergence {
        panels: usize,
        estimate: f64,
        requested: f64,
    },

    #[error("no sign change found while scanning bracket [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("root finder stopped after {iterations} iterations near x = {last_x}")]
    RootNotConverged { iterations: usize, last_x: f64 },

    #[error("condition residual {residual:e} exceeds tolerance {tol:e} ({what})")]
    ResidualTooLarge {
        what: &'static str,
        residual: f64,
        tol: f64,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for failures of the numerical machinery rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::QuadratureNonConvergence { .. }
                | Error::NoSignChange { .. }
                | Error::RootNotConverged { .. }
                | Error::ResidualTooLarge { .. }
        )
    }
}
