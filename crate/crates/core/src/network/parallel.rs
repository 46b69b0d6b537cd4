use num_complex::Complex64;

use super::oracle::oracle_transfer_matrix;
use super::vertex::reference_reduction;
use super::ParallelBundle;
use crate::error::{Error, Result, Side};
use crate::transfer::{Mat2, TransferMatrix};

/// How a bundle matrix was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParallelRoute {
    Pipeline,
    /// A link or junction reduction was degenerate; the matrix was rebuilt
    /// from the dense solver's amplitudes for both incidence directions.
    OracleFallback,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParallelOutcome {
    pub matrix: TransferMatrix,
    pub route: ParallelRoute,
}

fn validate(bundle: &ParallelBundle) -> Result<()> {
    if bundle.branches.is_empty() {
        return Err(Error::InvalidParameter("parallel bundle needs at least one branch".into()));
    }
    if bundle.reference >= bundle.branches.len() {
        return Err(Error::InvalidParameter(format!(
            "reference branch {} out of range for {} branches",
            bundle.reference,
            bundle.branches.len()
        )));
    }
    bundle.vertex_in.validate()?;
    bundle.vertex_out.validate()
}

/// Reference-channel reduction without fallback: `G = T'_s G_s T_s⁻¹`.
pub fn parallel_compose_pipeline(bundle: &ParallelBundle) -> Result<TransferMatrix> {
    validate(bundle)?;
    let s = bundle.reference;
    let t_in = reference_reduction(&bundle.vertex_in, &bundle.branches, s, Side::In)?;
    let t_out = reference_reduction(&bundle.vertex_out, &bundle.branches, s, Side::Out)?;
    let det = t_in.det();
    if det.norm() < 1e-12 * t_in.norm().powi(2) {
        return Err(Error::DegenerateVertex { side: Side::In, denominator: det.norm() });
    }
    let g = t_out * *bundle.branches[s].cell.mat() * (t_in.adjugate() * (1.0 / det));
    TransferMatrix::new(g)
}

/// Bundle matrix, falling back to the dense solver when the reduction is degenerate.
pub fn parallel_compose(bundle: &ParallelBundle) -> Result<ParallelOutcome> {
    match parallel_compose_pipeline(bundle) {
        Ok(matrix) => Ok(ParallelOutcome { matrix, route: ParallelRoute::Pipeline }),
        Err(Error::DegenerateLink { .. }) | Err(Error::DegenerateVertex { side: Side::In, .. }) => {
            let matrix = oracle_transfer_matrix(bundle)?;
            Ok(ParallelOutcome { matrix, route: ParallelRoute::OracleFallback })
        }
        Err(e) => Err(e),
    }
}

/// Junction matrix of `n` identical contact-free channels,
/// `½ [[n+1, −(n−1)], [−(n−1), n+1]]`.
pub fn identical_junction(n: usize) -> Mat2 {
    let nf = n as f64;
    Mat2::real(nf + 1.0, 1.0 - nf, 1.0 - nf, nf + 1.0) * 0.5
}

/// Closed form for `n` identical branches behind contact-free junctions.
///
/// In `(a, b, c)` notation with `m11` standing in for `a*`:
///
/// ```text
/// M11 = [(n+1)² m11 + i(n²−1)(b+c) − (n−1)² a] / 4n
/// M12 = [(n²−1) m11 + i((n+1)² b + (n−1)² c) − (n²−1) a] / 4n
/// M21 = [−(n²−1) m11 − i((n−1)² b + (n+1)² c) + (n²−1) a] / 4n
/// M22 = [−(n−1)² m11 − i(n²−1)(b+c) + (n+1)² a] / 4n
/// ```
pub fn parallel_identical(m: &TransferMatrix, n: usize) -> Result<TransferMatrix> {
    if n == 0 {
        return Err(Error::InvalidParameter("parallel count must be at least 1".into()));
    }
    let nf = n as f64;
    let (p2, q2, pq) = ((nf + 1.0).powi(2), (nf - 1.0).powi(2), nf * nf - 1.0);
    let i = Complex64::new(0.0, 1.0);
    let (a_conj, a) = (m.m11(), m.m22());
    let b = -i * m.m12();
    let c = i * m.m21();
    let f = 1.0 / (4.0 * nf);
    TransferMatrix::from_entries(
        (p2 * a_conj + i * pq * (b + c) - q2 * a) * f,
        (pq * a_conj + i * (p2 * b + q2 * c) - pq * a) * f,
        (-pq * a_conj - i * (q2 * b + p2 * c) + pq * a) * f,
        (-q2 * a_conj - i * pq * (b + c) + p2 * a) * f,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cells::{pt_cell, FreeSegment, free_segment_matrix};
    use crate::network::{solve_bruteforce, BranchChannel, BranchSpec, VertexParams};
    use crate::transfer::{pt_params, PTParams};

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unimodular(a: Complex64, b: Complex64, c: Complex64) -> TransferMatrix {
        TransferMatrix::from_entries(a, b, c, (1.0 + b * c) / a).unwrap()
    }

    #[test]
    fn single_branch_passes_through() {
        let m = unimodular(cx(0.8, 0.4), cx(0.3, -0.2), cx(-0.5, 0.1));
        let out = parallel_compose(&ParallelBundle::uniform(&[m], cx(1.0, 0.0))).unwrap();
        assert_eq!(out.route, ParallelRoute::Pipeline);
        assert!(out.matrix.mat().max_abs_diff(m.mat()) < 1e-14);
        assert!(parallel_identical(&m, 1).unwrap().mat().max_abs_diff(m.mat()) < 1e-15);
    }

    #[test]
    fn closed_form_is_similarity_transform() {
        let m = unimodular(cx(0.8, 0.4), cx(0.3, -0.2), cx(-0.5, 0.1));
        for n in 1..7 {
            let t = identical_junction(n);
            let sim = t * *m.mat() * t.inverse().unwrap();
            assert!(parallel_identical(&m, n).unwrap().mat().max_abs_diff(&sim) < 1e-13);
        }
    }

    #[test]
    fn closed_form_matches_pipeline_for_identical_branches() {
        let m = unimodular(cx(0.8, 0.4), cx(0.3, -0.2), cx(-0.5, 0.1));
        for n in 2..6 {
            for s in 0..n {
                let bundle = ParallelBundle::uniform(&vec![m; n], cx(1.3, 0.0)).with_reference(s);
                let pipe = parallel_compose_pipeline(&bundle).unwrap();
                let closed = parallel_identical(&m, n).unwrap();
                assert!(pipe.mat().max_abs_diff(closed.mat()) < 1e-12);
            }
        }
    }

    #[test]
    fn parallel_pt_cells_keep_unit_determinant() {
        let m = pt_cell(&PTParams::real_bc(Complex64::from_polar(1.3f64.sqrt(), 0.7), 0.6, 0.5)).unwrap();
        let big = parallel_identical(&m, 4).unwrap();
        assert!((big.det() - 1.0).norm() < 1e-12);
        let (p, q) = (pt_params(&m), pt_params(&big));
        assert!(((q.b - q.c) - (p.b - p.c)).norm() < 1e-12);
    }

    #[test]
    fn identity_branches_are_degenerate() {
        let id = TransferMatrix::identity();
        let bundle = ParallelBundle::uniform(&[id, id, id], cx(1.0, 0.0));
        assert!(matches!(parallel_compose_pipeline(&bundle), Err(Error::DegenerateLink { .. })));
        // Zero-length loops carry circulating currents that never reach the
        // leads: the oracle reports them as bound states and the bundle is a
        // pass-through.
        let out = parallel_compose(&bundle).unwrap();
        assert!(out.matrix.mat().max_abs_diff(TransferMatrix::identity().mat()) < 1e-12);
        assert_eq!(solve_bruteforce(&bundle).unwrap().bound_states, 2);
    }

    #[test]
    fn resonant_free_arms_fall_back() {
        // kL = π makes the free-segment link denominator vanish.
        let seg = free_segment_matrix(&FreeSegment::new(std::f64::consts::PI, cx(1.0, 0.0))).unwrap();
        let other = free_segment_matrix(&FreeSegment::new(1.0, cx(1.0, 0.0))).unwrap();
        let bundle = ParallelBundle::uniform(&[other, seg], cx(1.0, 0.0));
        let oracle = crate::network::oracle_transfer_matrix(&bundle).unwrap();
        let sol = solve_bruteforce(&bundle).unwrap();
        // The resonant arm as reference needs no link of its own.
        let direct = parallel_compose(&bundle.clone().with_reference(1)).unwrap();
        assert_eq!(direct.route, ParallelRoute::Pipeline);
        assert!(direct.matrix.mat().max_abs_diff(oracle.mat()) < 1e-10 * oracle.mat().norm());
        let out = parallel_compose(&bundle).unwrap();
        assert_eq!(out.route, ParallelRoute::OracleFallback);
        let t_left = out.matrix.det() / out.matrix.m22();
        assert!((t_left - sol.t()).norm() < 1e-10);
    }

    #[test]
    fn contact_potential_pipeline_agrees_with_oracle() {
        let cells = [
            unimodular(cx(0.8, 0.4), cx(0.3, -0.2), cx(-0.5, 0.1)),
            unimodular(cx(-0.6, 0.9), cx(0.1, 0.7), cx(0.4, -0.3)),
        ];
        let bundle = ParallelBundle {
            branches: vec![
                BranchSpec::new(cells[0], BranchChannel::uniform(cx(1.1, 0.0))),
                BranchSpec::new(cells[1], BranchChannel::uniform(cx(0.8, 0.0))),
            ],
            vertex_in: VertexParams::free(cx(1.0, 0.0)).with_contact(cx(0.35, 0.0)),
            vertex_out: VertexParams::free(cx(1.2, 0.0)).with_contact(cx(-0.2, 0.1)),
            reference: 1,
        };
        let pipe = parallel_compose_pipeline(&bundle).unwrap();
        let oracle = crate::network::oracle_transfer_matrix(&bundle).unwrap();
        assert!(pipe.mat().max_abs_diff(oracle.mat()) < 1e-10 * oracle.mat().norm());
    }
}
