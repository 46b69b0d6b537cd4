//! Spectral singularities: real parameter values where `M22` (lasing
//! threshold) or `M11` (coherent perfect absorption) vanishes.

use num_complex::Complex64;

use super::roots::{refine_roots, scan};
use super::ScanOptions;
use crate::error::Result;
use crate::transfer::TransferMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SingularityKind {
    /// `M22 = 0`: self-oscillation threshold.
    Lasing,
    /// `M11 = 0`: coherent perfect absorber.
    Cpa,
}

impl SingularityKind {
    pub fn entry(self, m: &TransferMatrix) -> Complex64 {
        match self {
            SingularityKind::Lasing => m.m22(),
            SingularityKind::Cpa => m.m11(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SingularityKind::Lasing => "lasing",
            SingularityKind::Cpa => "cpa",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingularityReport {
    pub kind: SingularityKind,
    pub omega_c: f64,
    /// `|M_entry(omega_c)|`.
    pub residual: f64,
    /// Scan interval the root was refined in; contains `omega_c`.
    pub bracket: (f64, f64),
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SingularityScan {
    /// Roots with residual below the tolerance.
    pub reports: Vec<SingularityReport>,
    /// Local minima with residual between the tolerance and the near-miss bound.
    pub near_misses: Vec<SingularityReport>,
}

/// Scans `|M22|` (or `|M11|`) over `range`, refines every local minimum and
/// sign change, and keeps those whose residual re-evaluates below `opts.tol`.
///
/// Points where the family fails are skipped.
pub fn find_spectral_singularities<F>(
    family: &F,
    range: (f64, f64),
    kind: SingularityKind,
    opts: &ScanOptions,
) -> Result<SingularityScan>
where
    F: Fn(f64) -> Result<TransferMatrix> + Sync,
{
    let xs = opts.grid(range)?.points();
    let g = |w: f64| family(w).ok().map(|m| kind.entry(&m));
    let vals = scan(&g, &xs);
    let mut out = SingularityScan::default();
    for r in refine_roots(&g, &xs, &vals) {
        let report = SingularityReport { kind, omega_c: r.x, residual: r.residual, bracket: r.bracket };
        if r.residual < opts.tol {
            out.reports.push(report);
        } else if r.residual < opts.near_miss {
            out.near_misses.push(report);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cells::{free_segment_matrix, FreeSegment};
    use crate::network::{serial_identical, SerialPath};
    use crate::transfer::Mat2;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Unimodular matrix with the given diagonal and `m12 = 1`.
    fn with_diagonal(m11: Complex64, m22: Complex64) -> Result<TransferMatrix> {
        TransferMatrix::new(Mat2::new(m11, cx(1.0, 0.0), m11 * m22 - 1.0, m22))
    }

    #[test]
    fn hermitian_family_has_none() {
        let fam = |k: f64| free_segment_matrix(&FreeSegment::new(1.7, cx(k, 0.0)));
        let scan = find_spectral_singularities(&fam, (0.1, 10.0), SingularityKind::Lasing, &ScanOptions::default())
            .unwrap();
        assert!(scan.reports.is_empty());
        assert!(scan.near_misses.is_empty());
    }

    #[test]
    fn constructed_zero() {
        let fam = |w: f64| with_diagonal(cx(1.3, 0.2), cx(w - 2.0, 0.0));
        let scan = find_spectral_singularities(&fam, (0.0, 5.0), SingularityKind::Lasing, &ScanOptions::default())
            .unwrap();
        assert_eq!(scan.reports.len(), 1);
        let r = scan.reports[0];
        assert!((r.omega_c - 2.0).abs() < 1e-12);
        assert!(r.bracket.0 <= r.omega_c && r.omega_c <= r.bracket.1);
        assert!(fam(r.omega_c).unwrap().m22().norm() < 1e-9);
    }

    #[test]
    fn cpa_reads_m11() {
        let fam = |w: f64| with_diagonal(cx(0.5, 0.0) * (w - 1.5) * cx(1.0, -2.0), cx(0.9, 0.1));
        let opts = ScanOptions::default();
        let cpa = find_spectral_singularities(&fam, (0.0, 3.0), SingularityKind::Cpa, &opts).unwrap();
        assert_eq!(cpa.reports.len(), 1);
        assert!((cpa.reports[0].omega_c - 1.5).abs() < 1e-12);
        let las = find_spectral_singularities(&fam, (0.0, 3.0), SingularityKind::Lasing, &opts).unwrap();
        assert!(las.reports.is_empty());
    }

    #[test]
    fn tangential_miss_is_flagged() {
        let fam = |w: f64| with_diagonal(cx(1.0, 0.0), cx(w - 1.0, 5e-6));
        let scan = find_spectral_singularities(&fam, (0.0, 2.0), SingularityKind::Lasing, &ScanOptions::default())
            .unwrap();
        assert!(scan.reports.is_empty());
        assert_eq!(scan.near_misses.len(), 1);
        assert!((scan.near_misses[0].residual - 5e-6).abs() < 1e-12);
    }

    #[test]
    fn roots_are_stable_under_finer_scan() {
        let fam = |w: f64| with_diagonal(cx(1.1, 0.0), cx(w.sin() - 0.3, (w.sin() - 0.3) * 0.4));
        let coarse = ScanOptions::default();
        let fine = coarse.with_scan_points(2 * coarse.scan_points - 1);
        let a = find_spectral_singularities(&fam, (0.0, 6.0), SingularityKind::Lasing, &coarse).unwrap();
        let b = find_spectral_singularities(&fam, (0.0, 6.0), SingularityKind::Lasing, &fine).unwrap();
        assert_eq!(a.reports.len(), 2);
        assert_eq!(a.reports.len(), b.reports.len());
        for (p, q) in a.reports.iter().zip(&b.reports) {
            assert!((p.omega_c - q.omega_c).abs() < coarse.tol / 10.0);
        }
    }

    #[test]
    fn serial_threshold_matches_chebyshev_ratio() {
        // Cell with fixed Bloch phase; m22 sweeps through sin((N−1)φ)/sin(Nφ).
        let (n, phi) = (4usize, 0.7f64);
        let target = ((n - 1) as f64 * phi).sin() / (n as f64 * phi).sin();
        let trace = 2.0 * phi.cos();
        let cell = move |w: f64| {
            let m22 = cx(target, 0.0) + cx(1.0, 0.6) * (w - 0.4);
            with_diagonal(cx(trace, 0.0) - m22, m22)
        };
        let fam = move |w: f64| serial_identical(&cell(w)?, n);
        let scan = find_spectral_singularities(&fam, (0.0, 1.0), SingularityKind::Lasing, &ScanOptions::default())
            .unwrap();
        assert_eq!(scan.reports.len(), 1);
        let r = scan.reports[0];
        assert!((r.omega_c - 0.4).abs() < 1e-9);
        let direct = crate::network::serial_identical_via(&cell(r.omega_c).unwrap(), n, SerialPath::Chebyshev).unwrap();
        assert!(direct.m22().norm() < 1e-9);
    }

    #[test]
    fn reduced_condition_at_special_bloch_phase() {
        // At φ = π/(N−1) the N-cell M22 is −m22, so the threshold is the cell's own.
        for n in [3usize, 4, 6] {
            let phi = std::f64::consts::PI / (n - 1) as f64;
            let m22 = cx(0.37, -0.81);
            let m = with_diagonal(cx(2.0 * phi.cos(), 0.0) - m22, m22).unwrap();
            let big = serial_identical(&m, n).unwrap();
            assert!((big.m22() + m22).norm() < 1e-12);
            assert!((big.m12() + m.m12()).norm() < 1e-12);
            assert!((big.m21() + m.m21()).norm() < 1e-12);
        }
    }
}
