//! Ready-made networks.

use num_complex::Complex64;

use crate::cells::{ab_ring_wavevectors, free_segment_matrix, ABRingSpec, FreeSegment, PhysicalConstants};
use crate::error::Result;
use crate::network::{BranchChannel, NetworkNode, ParallelNode, ParallelBranch, VertexParams};

/// Two free arms between contact-free junctions, threaded by the ring flux.
/// The upper arm carries `k1` forward and `k2` backward; the lower arm the reverse.
pub fn ab_ring(spec: &ABRingSpec, consts: &PhysicalConstants) -> Result<NetworkNode> {
    let (k1, k2) = ab_ring_wavevectors(spec, consts)?;
    let (k1, k2) = (Complex64::new(k1, 0.0), Complex64::new(k2, 0.0));
    let arm = |len: f64, kf: Complex64, kb: Complex64| -> Result<ParallelBranch> {
        let seg = FreeSegment { length: len, k_forward: kf, k_backward: kb, mass: consts.default_mass };
        Ok(ParallelBranch {
            node: NetworkNode::Leaf(free_segment_matrix(&seg)?),
            channel: BranchChannel {
                mass_in: consts.default_mass,
                mass_out: consts.default_mass,
                ..BranchChannel::directional(kf, kb)
            },
        })
    };
    let lead = VertexParams {
        mass: consts.default_mass,
        hbar: consts.hbar,
        ..VertexParams::free(Complex64::new(spec.k, 0.0))
    };
    Ok(NetworkNode::Parallel(ParallelNode {
        branches: vec![arm(spec.arm1, k1, k2)?, arm(spec.arm2, k2, k1)?],
        vertex_in: lead,
        vertex_out: lead,
        reference: 0,
    }))
}
