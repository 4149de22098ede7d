use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Evaluation too close to a pole of the scattering function or of a
    /// form factor.
    #[error("pole: {0}")]
    Pole(String),

    /// A tensor or truncation does not fit the requested operation.
    #[error("dimension: {0}")]
    Dimension(String),

    /// Boosts are only representable as whole multiples of the grid spacing.
    #[error("boost of {steps} grid steps is not commensurate with the rapidity grid")]
    BoostCommensurability { steps: f64 },

    /// Two objects live on different grids, truncations or models.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// The operation is only defined for a specific model.
    #[error("model: {0}")]
    Model(String),

    /// Another declared pole lies too close to the residue contour.
    #[error("contour: {0}")]
    Contour(String),

    /// A form factor could not be evaluated at a sample point.
    #[error("evaluation: {0}")]
    Evaluation(String),

    /// Invalid parameters.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Malformed serialized data or expression text.
    #[error("parse: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
