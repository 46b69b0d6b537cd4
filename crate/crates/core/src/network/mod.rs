//! Composition of cells into networks.
//!
//! A parallel bundle joins `N` branches at a splitting junction on the left
//! lead and a merging junction on the right lead. The bundle matrix is
//! obtained by reducing every branch onto a reference branch `s`:
//!
//! ```text
//! [u, v]   = T_s  [u_s, v_s]        T_s  = Σ_j Q_j  L_{j,s}
//! [u', v'] = T'_s [u'_s, v'_s]      T'_s = Σ_j Q'_j L'_{j,s}
//! G = T'_s G_s T_s⁻¹
//! ```
//!
//! where `G_s` is the left-to-right matrix of the reference branch. The
//! dense solver in [`oracle`] assembles the same junction conditions as one
//! linear system and serves as an independent check and as a fallback when a
//! link denominator vanishes.

use num_complex::Complex64;

use crate::transfer::TransferMatrix;

mod compose;
pub mod oracle;
mod parallel;
pub(crate) mod serial;
pub mod vertex;

pub use compose::{compose, Composition, NetworkNode, ParallelBranch, ParallelNode};
pub use oracle::{
    oracle_transfer_matrix, solve_bruteforce, solve_bruteforce_incidence, BranchAmplitudes,
    Incidence, OracleSolution,
};
pub use parallel::{
    identical_junction, parallel_compose, parallel_compose_pipeline, parallel_identical,
    ParallelOutcome, ParallelRoute,
};
pub use serial::{serial_compose, serial_identical, serial_identical_via, SerialPath};
pub use vertex::{link_in, link_matrix, link_out, reference_reduction, vertex_q, VertexParams};

/// Wavevectors and masses of one branch where it meets the two junctions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchChannel {
    /// Forward wavevector `k_j` at the left junction.
    pub k_in: Complex64,
    /// Backward wavevector `k'_j` at the left junction.
    pub k_in_back: Complex64,
    pub mass_in: f64,
    /// Forward wavevector `q_j` at the right junction.
    pub k_out: Complex64,
    /// Backward wavevector `q'_j` at the right junction.
    pub k_out_back: Complex64,
    pub mass_out: f64,
}

impl BranchChannel {
    pub fn uniform(k: Complex64) -> Self {
        Self { k_in: k, k_in_back: k, mass_in: 1.0, k_out: k, k_out_back: k, mass_out: 1.0 }
    }

    /// Forward `k_f`, backward `k_b` on both ends, as for a flux-threaded arm.
    pub fn directional(k_forward: Complex64, k_backward: Complex64) -> Self {
        Self {
            k_in: k_forward,
            k_in_back: k_backward,
            mass_in: 1.0,
            k_out: k_forward,
            k_out_back: k_backward,
            mass_out: 1.0,
        }
    }

    pub fn alpha_in(&self) -> Complex64 {
        self.k_in / self.mass_in
    }
    pub fn beta_in(&self) -> Complex64 {
        self.k_in_back / self.mass_in
    }
    pub fn alpha_out(&self) -> Complex64 {
        self.k_out / self.mass_out
    }
    pub fn beta_out(&self) -> Complex64 {
        self.k_out_back / self.mass_out
    }
}

/// A branch whose cell matrix is already evaluated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchSpec {
    pub cell: TransferMatrix,
    pub channel: BranchChannel,
}

impl BranchSpec {
    pub fn new(cell: TransferMatrix, channel: BranchChannel) -> Self {
        Self { cell, channel }
    }
}

/// A parallel bundle with evaluated branches; `reference` is a 0-based branch index.
#[derive(Clone, Debug, PartialEq)]
pub struct ParallelBundle {
    pub branches: Vec<BranchSpec>,
    pub vertex_in: VertexParams,
    pub vertex_out: VertexParams,
    pub reference: usize,
}

impl ParallelBundle {
    /// Contact-free junctions, every lead and branch at wavevector `k`.
    pub fn uniform(cells: &[TransferMatrix], k: Complex64) -> Self {
        Self {
            branches: cells.iter().map(|&c| BranchSpec::new(c, BranchChannel::uniform(k))).collect(),
            vertex_in: VertexParams::free(k),
            vertex_out: VertexParams::free(k),
            reference: 0,
        }
    }

    pub fn with_reference(mut self, s: usize) -> Self {
        self.reference = s;
        self
    }
}
