use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid discretization: {0}")]
    InvalidDiscretization(String),

    #[error("length mismatch: expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("input is not normalized: norm^2 = {0}")]
    NotNormalized(f64),

    #[error("Hartree iteration did not converge after {iterations} iterations (residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("condensate lost positivity at node {node}; the grid is too coarse")]
    PositivityLost { node: usize },

    #[error("Hartree ground state is degenerate: eps1 - eps0 = {0:.3e}")]
    DegenerateGroundState(f64),

    #[error("matrix is indefinite: min eigenvalue {min:.3e} vs norm {norm:.3e}")]
    Indefinite { min: f64, norm: f64 },

    #[error("excited Hartree gap {0:.3e} too small to invert D on Q")]
    IllConditioned(f64),

    #[error("BdG spectrum has complex eigenvalue {re:.6e} + {im:.3e}i")]
    ComplexSpectrum { re: f64, im: f64 },

    #[error("negative Fourier coefficient {0:.3e}")]
    NegativeFourier(f64),

    #[error("excitation enumeration exceeds {0} entries")]
    EnumerationTooLarge(usize),

    #[error("Fock basis size {size} exceeds cap {cap}")]
    BasisTooLarge { size: u128, cap: usize },

    #[error("Hartree stationarity violated for mode {mode}: h_i0 + v_i000 = {value:.3e}")]
    StationarityViolated { mode: usize, value: f64 },

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("matrix exponential did not converge: {0}")]
    Exponential(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
