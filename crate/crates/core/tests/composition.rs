//! End-to-end composition through the public API, checked against products
//! and dense solves written out in this file.

use num_complex::Complex64;
use proptest::prelude::*;
use scatternet::cells::{free_segment_matrix, pt_cell, FreeSegment};
use scatternet::network::{solve_bruteforce, BranchChannel, ParallelBranch, ParallelBundle, ParallelNode, VertexParams};
use scatternet::{compose, transfer_to_scattering, NetworkNode, PTParams, TransferMatrix};

fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn unimodular(a: Complex64, b: Complex64, c: Complex64) -> TransferMatrix {
    TransferMatrix::from_entries(a, b, c, (1.0 + b * c) / a).unwrap()
}

/// Left-to-right product, spelled out entry by entry.
fn product(ms: &[TransferMatrix]) -> [Complex64; 4] {
    let mut acc = [cx(1.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0), cx(1.0, 0.0)];
    for m in ms {
        let [a, b, c, d] = acc;
        acc = [
            m.m11() * a + m.m12() * c,
            m.m11() * b + m.m12() * d,
            m.m21() * a + m.m22() * c,
            m.m21() * b + m.m22() * d,
        ];
    }
    acc
}

fn close(m: &TransferMatrix, e: [Complex64; 4], tol: f64) -> bool {
    let got = [m.m11(), m.m12(), m.m21(), m.m22()];
    let scale = e.iter().fold(1.0f64, |s, z| s.max(z.norm()));
    got.iter().zip(e).all(|(g, e)| (g - e).norm() <= tol * scale)
}

#[test]
fn nested_serial_network_matches_flat_product() {
    let a = unimodular(cx(0.9, 0.2), cx(0.1, -0.4), cx(0.3, 0.3));
    let b = pt_cell(&PTParams::real_bc(Complex64::from_polar(0.8f64.sqrt(), 0.6), 0.5, -0.4)).unwrap();
    let seg = free_segment_matrix(&FreeSegment::new(0.7, cx(1.2, 0.0))).unwrap();
    let net = NetworkNode::Serial(vec![
        NetworkNode::Leaf(a),
        NetworkNode::repeat(NetworkNode::Serial(vec![NetworkNode::Leaf(seg), NetworkNode::Leaf(b)]), 3),
        NetworkNode::Leaf(a),
    ]);
    let got = compose(&net).unwrap();
    assert_eq!(got.fallbacks, 0);
    let expected = product(&[a, seg, b, seg, b, seg, b, a]);
    assert!(close(&got.matrix, expected, 1e-12));
}

#[test]
fn parallel_node_in_a_chain_matches_dense_solve() {
    let k = cx(1.1, 0.0);
    let arm1 = unimodular(cx(0.7, -0.3), cx(0.2, 0.5), cx(-0.1, 0.4));
    let arm2 = free_segment_matrix(&FreeSegment::new(1.9, k)).unwrap();
    let node = ParallelNode {
        branches: vec![
            ParallelBranch { node: NetworkNode::Leaf(arm1), channel: BranchChannel::uniform(k) },
            ParallelBranch { node: NetworkNode::Leaf(arm2), channel: BranchChannel::uniform(k) },
        ],
        vertex_in: VertexParams::free(k),
        vertex_out: VertexParams::free(k).with_contact(cx(0.3, 0.0)),
        reference: 1,
    };
    let bundle = ParallelBundle {
        branches: vec![
            scatternet::network::BranchSpec::new(arm1, BranchChannel::uniform(k)),
            scatternet::network::BranchSpec::new(arm2, BranchChannel::uniform(k)),
        ],
        vertex_in: node.vertex_in,
        vertex_out: node.vertex_out,
        reference: 1,
    };
    let m = compose(&NetworkNode::Parallel(node)).unwrap().matrix;
    let sol = solve_bruteforce(&bundle).unwrap();
    // Left incidence through the composed matrix.
    assert!((m.det() / m.m22() - sol.t()).norm() < 1e-12);
    assert!((-m.m21() / m.m22() - sol.r()).norm() < 1e-12);
}

#[test]
fn free_segment_transmits_with_phase() {
    let (l, k) = (2.3, 0.9);
    let m = free_segment_matrix(&FreeSegment::new(l, cx(k, 0.0))).unwrap();
    let s = transfer_to_scattering(&m).unwrap();
    assert!((s.t - cx(0.0, k * l).exp()).norm() < 1e-15);
    assert_eq!(s.reflectance_left, 0.0);
}

proptest! {
    #[test]
    fn serial_chains_compose_associatively(
        re in proptest::collection::vec(0.5f64..1.5, 6),
        im in proptest::collection::vec(-0.5f64..0.5, 6),
        n in 1usize..5,
    ) {
        let cells: Vec<TransferMatrix> = (0..3)
            .map(|i| unimodular(cx(re[2 * i], im[2 * i]), cx(im[2 * i + 1], re[2 * i + 1] - 1.0), cx(0.2, im[i])))
            .collect();
        let net = NetworkNode::repeat(
            NetworkNode::Serial(cells.iter().map(|&m| NetworkNode::Leaf(m)).collect()),
            n,
        );
        let flat: Vec<TransferMatrix> = (0..n).flat_map(|_| cells.iter().copied()).collect();
        let got = compose(&net).unwrap().matrix;
        prop_assert!(close(&got, product(&flat), 1e-10));
        prop_assert!((got.det() - 1.0).norm() < 1e-10);
    }
}
