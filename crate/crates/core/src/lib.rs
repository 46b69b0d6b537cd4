//! Transfer-matrix composition of one-dimensional scattering cells.
//!
//! Cells are described by 2×2 transfer matrices ([`transfer`]), built from
//! concrete models ([`cells`]), combined in series, in parallel and
//! recursively ([`network`]), and scanned over a control parameter for
//! spectral singularities, exceptional points and anisotropic transmission
//! resonances ([`analysis`]).

pub mod analysis;
pub mod cells;
mod error;
pub mod network;
pub mod presets;
pub mod selfcheck;
pub mod transfer;

pub use error::{Error, Result, Side};
pub use network::{compose, NetworkNode};
pub use transfer::{
    pt_params, s_eigenvalues, transfer_to_scattering, Mat2, PTParams, ScatteringAmplitudes,
    SEigenvalues, TransferMatrix,
};

pub use num_complex::Complex64;
