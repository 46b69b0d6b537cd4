//! Parameter sweeps and the finders that run over them.
//!
//! A *family* maps a real control parameter `ω` (frequency, wavenumber, gain
//! strength — whatever the caller binds) to a network or a matrix. [`sweep`]
//! evaluates a family on a uniform grid; the finders locate spectral
//! singularities ([`find_spectral_singularities`]), exceptional points
//! ([`find_exceptional_points`]) and anisotropic transmission resonances
//! ([`detect_atr`]).
//!
//! Grid evaluation runs on the current rayon pool; use [`with_threads`] to pin
//! the worker count. Results are always returned in grid order, so output
//! does not depend on the number of threads.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::network::{compose, Composition, NetworkNode};
use crate::transfer::{pt_params, s_eigenvalues, transfer_to_scattering, TransferMatrix};

mod atr;
mod bragg;
mod exceptional;
mod roots;
mod singularity;

pub use atr::{detect_atr, AtrRecord, AtrScan, ReflectionlessSide, DEFAULT_ATR_TOL};
pub use bragg::bragg_parallel_ep;
pub use exceptional::{
    ep_residual, find_exceptional_points, BranchSign, EpMode, EpScan, ExceptionalPointReport,
    PhaseCrossing,
};
pub use singularity::{
    find_spectral_singularities, SingularityKind, SingularityReport, SingularityScan,
};

/// Uniform grid `lo, …, hi` with `steps` points, both ends included.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepGrid {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl SweepGrid {
    pub fn new(lo: f64, hi: f64, steps: usize) -> Result<Self> {
        let grid = Self { lo, hi, steps };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite()) {
            return Err(Error::NonFinite("sweep range"));
        }
        if !(self.lo < self.hi) {
            return Err(Error::InvalidParameter(format!(
                "sweep range needs lo < hi, got [{}, {}]",
                self.lo, self.hi
            )));
        }
        if self.steps < 2 {
            return Err(Error::InvalidParameter(format!(
                "sweep needs at least 2 steps, got {}",
                self.steps
            )));
        }
        Ok(())
    }

    /// Spacing between neighbouring points.
    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.steps - 1) as f64
    }

    /// The `i`-th grid point; the last point is exactly `hi`.
    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.steps {
            self.hi
        } else {
            self.lo + (self.hi - self.lo) * (i as f64 / (self.steps - 1) as f64)
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.steps).map(|i| self.point(i)).collect()
    }
}

/// Per-point diagnostics: the point is kept either way.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointFlags {
    /// Parallel bundles rebuilt by the dense solver at this point.
    pub fallbacks: usize,
    /// Composition or amplitude failure; the numeric fields are NaN where undefined.
    pub issue: Option<String>,
}

impl PointFlags {
    /// Compact `;`-separated label, empty when the point is clean.
    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if self.fallbacks > 0 {
            parts.push(format!("oracle_fallback={}", self.fallbacks));
        }
        if let Some(issue) = &self.issue {
            parts.push(format!("error={issue}"));
        }
        parts.join(";")
    }

    pub fn is_clean(&self) -> bool {
        self.fallbacks == 0 && self.issue.is_none()
    }
}

/// One evaluated grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub omega: f64,
    pub t: Complex64,
    pub r_left: Complex64,
    pub r_right: Complex64,
    pub transmittance: f64,
    pub reflectance_left: f64,
    pub reflectance_right: f64,
    /// `|λ₊| / |λ₋|` of the S matrix.
    pub eig_ratio: f64,
    /// `|det M − 1|`.
    pub det_residual: f64,
    pub flags: PointFlags,
    pub matrix: Option<TransferMatrix>,
}

impl SweepRecord {
    fn failed(omega: f64, matrix: Option<TransferMatrix>, flags: PointFlags) -> Self {
        let nan = Complex64::new(f64::NAN, f64::NAN);
        let (eig_ratio, det_residual) = matrix.map_or((f64::NAN, f64::NAN), |m| measures(&m));
        Self {
            omega,
            t: nan,
            r_left: nan,
            r_right: nan,
            transmittance: f64::NAN,
            reflectance_left: f64::NAN,
            reflectance_right: f64::NAN,
            eig_ratio,
            det_residual,
            flags,
            matrix,
        }
    }

    /// Builds the record for one evaluated composition (or its failure).
    pub fn from_composition(omega: f64, composed: Result<Composition>) -> Self {
        let c = match composed {
            Ok(c) => c,
            Err(e) => {
                return Self::failed(omega, None, PointFlags { fallbacks: 0, issue: Some(e.to_string()) })
            }
        };
        let mut flags = PointFlags { fallbacks: c.fallbacks, issue: None };
        let m = c.matrix;
        match transfer_to_scattering(&m) {
            Ok(s) => {
                let (eig_ratio, det_residual) = measures(&m);
                Self {
                    omega,
                    t: s.t,
                    r_left: s.r_left,
                    r_right: s.r_right,
                    transmittance: s.transmittance,
                    reflectance_left: s.reflectance_left,
                    reflectance_right: s.reflectance_right,
                    eig_ratio,
                    det_residual,
                    flags,
                    matrix: Some(m),
                }
            }
            Err(e) => {
                flags.issue = Some(e.to_string());
                Self::failed(omega, Some(m), flags)
            }
        }
    }

    pub fn from_matrix(omega: f64, m: Result<TransferMatrix>) -> Self {
        Self::from_composition(omega, m.map(|matrix| Composition { matrix, fallbacks: 0 }))
    }
}

fn measures(m: &TransferMatrix) -> (f64, f64) {
    let ratio = s_eigenvalues(&pt_params(m)).map_or(f64::NAN, |e| e.ratio);
    (ratio, (m.det() - 1.0).norm())
}

/// Evaluates a network family on every grid point.
///
/// Failing points are recorded with their error and the sweep continues.
pub fn sweep<F>(family: &F, grid: &SweepGrid) -> Result<Vec<SweepRecord>>
where
    F: Fn(f64) -> Result<NetworkNode> + Sync,
{
    grid.validate()?;
    Ok(grid
        .points()
        .into_par_iter()
        .map(|w| SweepRecord::from_composition(w, family(w).and_then(|node| compose(&node))))
        .collect())
}

/// As [`sweep`] for a family that yields matrices directly.
pub fn sweep_matrices<F>(family: &F, grid: &SweepGrid) -> Result<Vec<SweepRecord>>
where
    F: Fn(f64) -> Result<TransferMatrix> + Sync,
{
    grid.validate()?;
    Ok(grid
        .points()
        .into_par_iter()
        .map(|w| SweepRecord::from_matrix(w, family(w)))
        .collect())
}

/// Runs `f` on a dedicated pool of `threads` workers (0 = one per core).
pub fn with_threads<R, F>(threads: usize, f: F) -> Result<R>
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Options shared by the root finders.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanOptions {
    /// Points of the bracketing scan.
    pub scan_points: usize,
    /// Residual below which a root is reported.
    pub tol: f64,
    /// Residual below which an unconfirmed minimum is kept as a near miss.
    pub near_miss: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { scan_points: 2001, tol: 1e-9, near_miss: 1e-3 }
    }
}

impl ScanOptions {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_scan_points(mut self, n: usize) -> Self {
        self.scan_points = n;
        self
    }

    pub(crate) fn grid(&self, range: (f64, f64)) -> Result<SweepGrid> {
        if self.scan_points < 3 {
            return Err(Error::InvalidParameter("root scan needs at least 3 points".into()));
        }
        if !(self.tol > 0.0 && self.near_miss >= self.tol) {
            return Err(Error::InvalidParameter(
                "root tolerances need 0 < tol <= near_miss".into(),
            ));
        }
        SweepGrid::new(range.0, range.1, self.scan_points)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cells::{bragg_matrix, free_segment_matrix, BraggParams, FreeSegment};

    #[test]
    fn grid_hits_both_ends() {
        let g = SweepGrid::new(-1.0, 0.3, 7).unwrap();
        let p = g.points();
        assert_eq!(p[0], -1.0);
        assert_eq!(p[6], 0.3);
        assert!(SweepGrid::new(1.0, 1.0, 5).is_err());
        assert!(SweepGrid::new(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn identity_family() {
        let fam = |_: f64| Ok(NetworkNode::leaf(TransferMatrix::identity()));
        let recs = sweep(&fam, &SweepGrid::new(0.0, 1.0, 11).unwrap()).unwrap();
        assert_eq!(recs.len(), 11);
        for r in recs {
            assert_eq!(r.t, Complex64::new(1.0, 0.0));
            assert_eq!(r.r_left.norm(), 0.0);
            assert_eq!(r.eig_ratio, 1.0);
            assert!(r.flags.is_clean());
        }
    }

    #[test]
    fn free_segment_is_transparent() {
        let fam = |k: f64| free_segment_matrix(&FreeSegment::new(2.3, Complex64::new(k, 0.0)));
        for r in sweep_matrices(&fam, &SweepGrid::new(0.1, 5.0, 50).unwrap()).unwrap() {
            assert!((r.transmittance - 1.0).abs() < 1e-14);
            assert!((r.t - Complex64::new(0.0, 2.3 * r.omega).exp()).norm() < 1e-14);
        }
    }

    #[test]
    fn bragg_sweep_matches_direct_path() {
        let p = BraggParams { n0: 1.5, n1: 0.01, n2: 0.004, grating: 10.0, length: 4.0 };
        let fam = move |k: f64| Ok(NetworkNode::leaf(bragg_matrix(&p, k)?));
        let recs = sweep(&fam, &SweepGrid::new(9.0, 11.0, 41).unwrap()).unwrap();
        for r in recs {
            let s = transfer_to_scattering(&bragg_matrix(&p, r.omega).unwrap()).unwrap();
            assert_eq!(r.t, s.t);
            assert_eq!(r.r_left, s.r_left);
            assert_eq!(r.reflectance_right, s.reflectance_right);
            assert!((r.transmittance - r.t.norm_sqr()).abs() < 1e-12);
        }
    }

    #[test]
    fn failures_are_recorded_not_dropped() {
        let fam = |w: f64| {
            if w > 0.5 {
                Err(Error::InvalidParameter("boom".into()))
            } else {
                Ok(NetworkNode::leaf(TransferMatrix::identity()))
            }
        };
        let recs = sweep(&fam, &SweepGrid::new(0.0, 1.0, 5).unwrap()).unwrap();
        assert_eq!(recs.len(), 5);
        assert!(recs[4].transmittance.is_nan());
        assert!(recs[4].flags.label().starts_with("error="));
        assert!(recs[0].flags.is_clean());
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let p = BraggParams { n0: 1.5, n1: 0.02, n2: 0.01, grating: 10.0, length: 3.0 };
        let fam = move |k: f64| bragg_matrix(&p, k);
        let g = SweepGrid::new(8.0, 12.0, 301).unwrap();
        let one = with_threads(1, || sweep_matrices(&fam, &g)).unwrap().unwrap();
        let four = with_threads(4, || sweep_matrices(&fam, &g)).unwrap().unwrap();
        assert_eq!(one, four);
    }
}
