use thiserror::Error;

/// Errors produced by structural validation and precondition checks.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("tower dims must be non-empty and non-decreasing, got {0:?}")]
    BadTower(Vec<usize>),

    #[error("level {level} out of range 1..={levels}")]
    LevelOutOfRange { level: usize, levels: usize },

    #[error("vector has {got} coordinates, level {level} requires {want}")]
    CoordLength { level: usize, want: usize, got: usize },

    #[error("operands live on different towers")]
    TowerMismatch,

    #[error("cannot promote a level-{from} vector down to level {to}")]
    InvalidPromotion { from: usize, to: usize },

    #[error("cannot project a level-{from} vector up to level {to}")]
    InvalidProjection { from: usize, to: usize },

    #[error("level-{level} matrix has shape {rows}x{cols}, expected {want_rows}x{want_cols}")]
    LevelShape {
        level: usize,
        rows: usize,
        cols: usize,
        want_rows: usize,
        want_cols: usize,
    },

    #[error(
        "level system violates nesting between levels {low} and {high}: \
         off-block norm {defect:.3e} exceeds {tol:.3e}"
    )]
    IncompatibleLevels {
        low: usize,
        high: usize,
        defect: f64,
        tol: f64,
    },

    #[error("expected {want} increment blocks, got {got}")]
    BlockCount { want: usize, got: usize },

    #[error("block {block} has shape {rows}x{cols}, expected {want_rows}x{want_cols}")]
    BlockShape {
        block: usize,
        rows: usize,
        cols: usize,
        want_rows: usize,
        want_cols: usize,
    },

    #[error("classification `{flag}` requires equal source and target towers")]
    NotSquare { flag: &'static str },

    #[error("operator is not locally positive: eigenvalue {eigenvalue:.3e} at level {level}")]
    NotPositive { level: usize, eigenvalue: f64 },

    #[error("commutation transfer requires locally normal operands")]
    NotNormal,

    #[error("semigroup table is malformed: {0}")]
    SemigroupShape(String),

    #[error("semigroup law violated: {0}")]
    SemigroupLaw(crate::semigroup::Violation),

    #[error("unsupported builtin semigroup: {0}")]
    UnknownBuiltin(String),

    #[error("kernel must assign a value to every pair of points")]
    KernelIncomplete,

    #[error("kernel entry ({s},{t}) is not the adjoint of entry ({t},{s}): defect {defect:.3e}")]
    KernelNotHermitian { s: usize, t: usize, defect: f64 },

    #[error("kernel is not locally positive definite: min eigenvalue {min_eig:.3e} at level {level}")]
    NotPositiveDefinite { level: usize, min_eig: f64 },

    #[error(
        "boundedness constant unavailable for u={u} at level {level}: \
         shifted form leaves the range of the base form (defect {defect:.3e})"
    )]
    BoundednessRange { u: usize, level: usize, defect: f64 },

    #[error("function is not unital: |phi(e) - I| = {defect:.3e}")]
    NotUnital { defect: f64 },

    #[error(
        "shift by u={u} is inconsistent on the factor span at increment {increment}: \
         residual {residual:.3e}"
    )]
    ShiftInconsistent {
        u: usize,
        increment: usize,
        residual: f64,
    },

    #[error("rho must be positive, got {0}")]
    BadRho(f64),

    #[error("effect {atom} is not positive: eigenvalue {eigenvalue:.3e} at level {level}")]
    EffectNotPositive {
        atom: usize,
        level: usize,
        eigenvalue: f64,
    },

    #[error("effect {atom} exceeds the identity: eigenvalue of I - E is {eigenvalue:.3e} at level {level}")]
    EffectTooLarge {
        atom: usize,
        level: usize,
        eigenvalue: f64,
    },

    #[error("effects do not sum to the identity: defect {defect:.3e} (consider the defect-atom option)")]
    EffectSum { defect: f64 },

    #[error("a measure needs at least one effect")]
    EmptyPovm,

    #[error("not a locally contraction: eigenvalue of I - T*T is {eigenvalue:.3e} at level {level}")]
    NotContraction { level: usize, eigenvalue: f64 },

    #[error("dilation horizon must be at least 1")]
    BadHorizon,

    #[error("{0}")]
    Schema(String),
}

pub type Result<T> = std::result::Result<T, Error>;
