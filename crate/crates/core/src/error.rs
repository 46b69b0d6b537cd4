use thiserror::Error;

/// Which junction of a parallel bundle a vertex quantity belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    /// The splitting vertex on the left lead.
    In,
    /// The merging vertex on the right lead.
    Out,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Side::In => f.write_str("in"),
            Side::Out => f.write_str("out"),
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// `|m22|` fell below the singularity tolerance; the scattering amplitudes diverge.
    #[error("spectral singularity: |m22| = {m22_abs:e}")]
    SpectralSingularity { m22_abs: f64 },

    #[error("degenerate S matrix: a = m22 vanishes")]
    DegenerateSMatrix,

    #[error("degenerate {side} vertex (denominator {denominator:e})")]
    DegenerateVertex { side: Side, denominator: f64 },

    #[error("degenerate link on branch {branch} (denominator {denominator:e})")]
    DegenerateLink { branch: usize, denominator: f64 },

    #[error("matrix is not unimodular: |det - 1| = {deviation:e}")]
    NotUnimodular { deviation: f64 },

    #[error("vertex system has no unique solution (relative pivot {pivot:e})")]
    NoUniqueSolution { pivot: f64 },

    /// Transmission vanishes, so no finite transfer matrix exists.
    #[error("transmission vanishes (|t| = {t_abs:e}); transfer matrix undefined")]
    ZeroTransmission { t_abs: f64 },

    #[error("at {}: {source}", if path.is_empty() { "/" } else { path.as_str() })]
    AtNode { path: String, source: Box<Error> },
}

impl Error {
    pub(crate) fn at(self, path: &str) -> Error {
        match self {
            Error::AtNode { path: inner, source } => Error::AtNode {
                path: format!("{path}{inner}"),
                source,
            },
            other => Error::AtNode {
                path: path.to_string(),
                source: Box::new(other),
            },
        }
    }

    /// The innermost error, with node-path context stripped.
    pub fn root_cause(&self) -> &Error {
        match self {
            Error::AtNode { source, .. } => source.root_cause(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
