use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("basis label component out of range: path={path}, spin={spin}, energy={energy}")]
    InvalidLabel { path: u8, spin: u8, energy: u8 },
    #[error("invalid basis index {0}, expected 0..12")]
    InvalidIndex(usize),
    #[error("invalid subsystem set: {0}")]
    InvalidSubsystemSet(String),
    #[error("state is not normalized: squared norm {0}")]
    NotNormalized(f64),
    #[error("matrix is not Hermitian: max asymmetry {0:.3e}")]
    NotHermitian(f64),
    #[error("matrix trace is {0}, expected 1")]
    BadTrace(f64),
    #[error("matrix is not positive semidefinite: smallest eigenvalue {0:.3e}")]
    NotPositive(f64),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("parameter out of range: {0}")]
    InvalidParameter(String),
    #[error("separability order must be 2 or 3, got {0}")]
    InvalidSeparabilityOrder(usize),
    #[error("state is not a product across all three subsystems")]
    NotProduct,
    #[error("missing matrix element |{bra}><{ket}|")]
    MissingElement { bra: String, ket: String },
    #[error("missing measurement run: {0}")]
    MissingRun(String),
    #[error("reference contrast for {0} is zero, cannot normalize")]
    ZeroReferenceContrast(String),
    #[error("invalid beamline config: {0}")]
    InvalidConfig(String),
    #[error("flipper would drive population out of the 3-level energy range: {0}")]
    EnergyTruncation(String),
    #[error("beamline output is degenerate: survival probability is zero")]
    DegenerateOutput,
    #[error("degenerate least-squares fit: {0}")]
    DegenerateFit(String),
    #[error("calibration target {target} unreachable in bracket [{lo}, {hi}]")]
    CalibrationBracket { target: f64, lo: f64, hi: f64 },
    #[error("fidelity is not monotone over the calibration bracket")]
    CalibrationNotMonotone,
}
