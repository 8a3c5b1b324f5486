use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("form degree {degree} is out of range for dimension {dim}")]
    DegreeOutOfRange { dim: usize, degree: usize },
    #[error("affine map is singular")]
    SingularMap,
    #[error("degenerate cell: {0}")]
    DegenerateCell(String),
    #[error("bump weight is not normalized")]
    UnnormalizedWeight,
    #[error("mesh parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("nonconforming mesh: {0}")]
    Nonconforming(String),
    #[error("cell {0} is inverted")]
    InvertedCell(usize),
    #[error("cell {0} is not an affine image of the reference cube")]
    NonAffineCell(usize),
    #[error("cell {0} is not star-shaped")]
    NotStarShaped(usize),
    #[error("unknown built-in mesh `{0}`")]
    UnknownMesh(String),
    #[error("refinement level {0} exceeds the guard of 5")]
    RefineGuard(usize),
    #[error("invalid family spec: {0}")]
    InvalidSpec(String),
    #[error("facet {facet} (dimension {dim}) is not incident to cell {cell}")]
    NotIncident { cell: usize, dim: usize, facet: usize },
    #[error("singular facet system on cell {cell}: {msg}")]
    SingularFacetSystem { cell: usize, msg: String },
    #[error("incompatible family pairing: {0}")]
    IncompatiblePairing(String),
    #[error("material tensor on cell {0} is not symmetric positive definite")]
    NonSpdMaterial(usize),
    #[error("mass matrix is not positive definite")]
    MassNotPositiveDefinite,
    #[error("dense size guard: N = {n} exceeds {limit}")]
    SizeGuard { n: usize, limit: usize },
    #[error("empty space: {0}")]
    EmptySpace(String),
    #[error("invalid window ({a}, {b})")]
    InvalidWindow { a: f64, b: f64 },
    #[error("target form is not closed")]
    NotClosed,
    #[error("empty sample set")]
    EmptySamples,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
