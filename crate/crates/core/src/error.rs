use thiserror::Error;

/// Errors produced by model construction, density evaluation, and sampling.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: &'static str,
    },

    #[error("simplex constraint violated: {0}")]
    InvalidSimplex(String),

    #[error("nonpositive concentration parameter at index {index}: {value}")]
    NonpositiveConcentration { index: usize, value: f64 },

    #[error("nonpositive value for {name}: {value}")]
    NonpositiveValue { name: &'static str, value: f64 },

    #[error("pixel {flat_index} has zero norm and cannot be normalized")]
    ZeroNormPixel { flat_index: usize },

    #[error("segmentation label {label} out of range (expected 0..{count})")]
    LabelOutOfRange { label: usize, count: usize },

    #[error("segmentation has a label gap: label {missing} in 0..{count} is unused")]
    LabelGap { missing: usize, count: usize },

    #[error("segmentation dimensions {seg_rows}x{seg_cols} do not match cube {rows}x{cols}")]
    SegmentationShape {
        seg_rows: usize,
        seg_cols: usize,
        rows: usize,
        cols: usize,
    },

    #[error("requested {requested} endmembers but only {available} pixels are available")]
    TooFewPixels { requested: usize, available: usize },

    #[error("data covariance is not positive semi-definite")]
    CovarianceNotPsd,

    #[error(
        "variance proposal bound is nonpositive (all pixels equidistant from the data mean); \
         supply a manual sigma2 bound"
    )]
    DegenerateVarianceBound,

    #[error("zero mixed variance for pixel {pixel}")]
    ZeroMixedVariance { pixel: usize },

    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparameters(String),

    #[error("empty posterior window: burn-in {burn_in} leaves no recorded samples")]
    EmptyPosteriorWindow { burn_in: usize },

    #[error("invalid cube: {0}")]
    InvalidCube(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed {what} in {path}: {detail}")]
    Format {
        what: &'static str,
        path: String,
        detail: String,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(
        what: &'static str,
        path: impl Into<String>,
        detail: impl Into<String>,
    ) -> Self {
        Error::Format {
            what,
            path: path.into(),
            detail: detail.into(),
        }
    }

    /// True for errors caused by unreadable or unwritable files rather than
    /// invalid content.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
