//! Anisotropic transmission resonances: unit transmission with zero
//! reflection from exactly one side.

use super::SweepRecord;

pub const DEFAULT_ATR_TOL: f64 = 1e-6;

/// The side from which incidence is reflectionless.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ReflectionlessSide {
    Left,
    Right,
}

impl ReflectionlessSide {
    pub fn name(self) -> &'static str {
        match self {
            ReflectionlessSide::Left => "left",
            ReflectionlessSide::Right => "right",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AtrRecord {
    pub omega: f64,
    pub direction: ReflectionlessSide,
    pub transmittance: f64,
    /// Reflectance on the reflectionless side (below the tolerance).
    pub dead_side_reflectance: f64,
    /// Reflectance on the opposite side (at or above the tolerance).
    pub live_side_reflectance: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AtrScan {
    pub resonances: Vec<AtrRecord>,
    /// Points transparent from both sides; not anisotropic.
    pub bidirectional: Vec<f64>,
}

/// Picks the records with `|T − 1| < tol` and exactly one reflectance below
/// `tol`. Records with undefined amplitudes are ignored.
pub fn detect_atr(records: &[SweepRecord], tol: f64) -> AtrScan {
    let mut out = AtrScan::default();
    for r in records {
        if !((r.transmittance - 1.0).abs() < tol) {
            continue;
        }
        let (left, right) = (r.reflectance_left < tol, r.reflectance_right < tol);
        let (direction, dead, live) = match (left, right) {
            (true, true) => {
                out.bidirectional.push(r.omega);
                continue;
            }
            (true, false) => (ReflectionlessSide::Left, r.reflectance_left, r.reflectance_right),
            (false, true) => (ReflectionlessSide::Right, r.reflectance_right, r.reflectance_left),
            (false, false) => continue,
        };
        out.resonances.push(AtrRecord {
            omega: r.omega,
            direction,
            transmittance: r.transmittance,
            dead_side_reflectance: dead,
            live_side_reflectance: live,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{sweep_matrices, SweepGrid};
    use crate::cells::{bragg_matrix, free_segment_matrix, BraggParams, FreeSegment};
    use crate::network::serial_compose;
    use crate::transfer::{Mat2, TransferMatrix};
    use num_complex::Complex64;

    #[test]
    fn free_segment_is_bidirectional() {
        let fam = |k: f64| free_segment_matrix(&FreeSegment::new(1.0, Complex64::new(k, 0.0)));
        let recs = sweep_matrices(&fam, &SweepGrid::new(0.5, 2.0, 21).unwrap()).unwrap();
        let scan = detect_atr(&recs, DEFAULT_ATR_TOL);
        assert!(scan.resonances.is_empty());
        assert_eq!(scan.bidirectional.len(), 21);
    }

    #[test]
    fn bragg_equal_modulation_is_left_invisible() {
        let p = BraggParams { n0: 1.5, n1: 0.01, n2: 0.01, grating: 10.0, length: 5.0 };
        let fam = move |k: f64| bragg_matrix(&p, k);
        let recs = sweep_matrices(&fam, &SweepGrid::new(9.9, 10.1, 21).unwrap()).unwrap();
        let scan = detect_atr(&recs, DEFAULT_ATR_TOL);
        assert_eq!(scan.resonances.len(), 21);
        for a in &scan.resonances {
            assert_eq!(a.direction, ReflectionlessSide::Left);
            assert_eq!(a.dead_side_reflectance, 0.0);
        }
    }

    #[test]
    fn hermitian_chain_reflects_symmetrically() {
        // Two unequal real-potential steps modelled by unitary-compatible cells.
        let cell = |k: f64, q: f64, l: f64| {
            let (c, s) = ((q * l).cos(), (q * l).sin());
            let (p, m) = ((k / q + q / k) / 2.0, (k / q - q / k) / 2.0);
            let i = Complex64::new(0.0, 1.0);
            let e = (i * k * l).exp();
            TransferMatrix::new(Mat2::new(
                (c + i * p * s) * e.conj(),
                i * m * s * e.conj(),
                -i * m * s * e,
                (c - i * p * s) * e,
            ))
        };
        let fam = |k: f64| serial_compose(&[cell(k, 1.3 * k, 0.7)?, cell(k, 0.8 * k, 1.9)?]);
        let recs = sweep_matrices(&fam, &SweepGrid::new(0.5, 3.0, 200).unwrap()).unwrap();
        for r in &recs {
            assert!((r.reflectance_left - r.reflectance_right).abs() < 1e-12);
            assert!((r.transmittance + r.reflectance_left - 1.0).abs() < 1e-12);
        }
        assert!(detect_atr(&recs, DEFAULT_ATR_TOL).resonances.is_empty());
    }
}
