use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("exponent {exponent} exceeds the weight bound {bound}")]
    WeightOverflow { exponent: f64, bound: f64 },
    #[error("point is {distance} from the domain boundary, stencil needs {required}")]
    BoundaryMargin { distance: f64, required: f64 },
    #[error("invalid stencil: {0}")]
    InvalidStencil(&'static str),
    #[error("kernel evaluated at coincident points")]
    CoincidentPoints,
    #[error("evaluation point lies within {distance} of the surface, node spacing is {spacing}")]
    NearSurface { distance: f64, spacing: f64 },
    #[error("excision radius {epsilon} leaves no quadrature nodes")]
    EmptyRule { epsilon: f64 },
    #[error("invalid rule parameters: {0}")]
    InvalidRule(&'static str),
    #[error("node index {index} out of range for rule with {len} nodes")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid Moebius coefficients: {0}")]
    InvalidMoebius(&'static str),
    #[error("point lies within {distance} of the pole, margin is {margin}")]
    PoleProximity { distance: f64, margin: f64 },
    #[error("Gram matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("Gram condition number {cond:e} exceeds the guard {limit:e}")]
    IllConditioned { cond: f64, limit: f64 },
    #[error("kernel bases are not aligned (mismatch {mismatch:e})")]
    MisalignedBases { mismatch: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(&'static str),
}
