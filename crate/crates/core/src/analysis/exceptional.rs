//! Exceptional points: parameter values where the two S-matrix eigenvalues
//! coalesce, for a single cell, `N` cells in series, or `N` identical cells
//! in parallel.

use num_complex::Complex64;

use super::roots::{refine_roots, scan};
use super::ScanOptions;
use crate::error::{Error, Result};
use crate::network::serial::chebyshev_u_pair;
use crate::network::{parallel_identical, serial_identical};
use crate::transfer::{pt_params, s_eigenvalues, s_eigenvalues_unordered, TransferMatrix};

/// `|U_{N−1}| = |sin Nφ / sin φ|` below which the serial condition is not evaluated.
const SERIAL_SKIP: f64 = 1e-10;

/// Ratio margin separating the broken from the unbroken phase when classifying crossings.
const PHASE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EpMode {
    /// `b − c = ±2`.
    Single,
    /// `b − c = ±2 sin φ / sin(Nφ)` with `Tr m = 2 cos φ`.
    Serial(usize),
    /// `(N+1)/(N−1) = i/(2a) [(b+c) ± √((b−c)² − 4)]`.
    Parallel(usize),
}

impl EpMode {
    pub fn name(self) -> &'static str {
        match self {
            EpMode::Single => "single",
            EpMode::Serial(_) => "serial",
            EpMode::Parallel(_) => "parallel",
        }
    }

    pub fn count(self) -> usize {
        match self {
            EpMode::Single => 1,
            EpMode::Serial(n) | EpMode::Parallel(n) => n,
        }
    }

    fn validate(self) -> Result<()> {
        match self {
            EpMode::Serial(0) => Err(Error::InvalidParameter("serial count must be at least 1".into())),
            EpMode::Parallel(n) if n < 2 => {
                Err(Error::InvalidParameter("parallel exceptional points need N >= 2".into()))
            }
            _ => Ok(()),
        }
    }

    /// The matrix of the composed system built from one cell.
    pub fn composed(self, m: &TransferMatrix) -> Result<TransferMatrix> {
        match self {
            EpMode::Single => Ok(*m),
            EpMode::Serial(n) => serial_identical(m, n),
            EpMode::Parallel(n) => parallel_identical(m, n),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BranchSign {
    Plus,
    Minus,
}

impl BranchSign {
    pub fn value(self) -> f64 {
        match self {
            BranchSign::Plus => 1.0,
            BranchSign::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BranchSign::Plus => "+",
            BranchSign::Minus => "-",
        }
    }
}

/// How `|λ₊|/|λ₋|` of the composed system changes across a root, scanning upward.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PhaseCrossing {
    IntoBroken,
    IntoUnbroken,
    /// Same phase on both sides.
    Touch,
}

impl PhaseCrossing {
    pub fn name(self) -> &'static str {
        match self {
            PhaseCrossing::IntoBroken => "into_broken",
            PhaseCrossing::IntoUnbroken => "into_unbroken",
            PhaseCrossing::Touch => "touch",
        }
    }

    fn classify(below: f64, above: f64) -> Self {
        match (below > 1.0 + PHASE_TOL, above > 1.0 + PHASE_TOL) {
            (false, true) => PhaseCrossing::IntoBroken,
            (true, false) => PhaseCrossing::IntoUnbroken,
            _ => PhaseCrossing::Touch,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExceptionalPointReport {
    pub mode: EpMode,
    pub omega: f64,
    pub condition_residual: f64,
    pub branch_sign: BranchSign,
    /// `|λ₊|/|λ₋|` of the composed system half a scan step below and above.
    pub ratio_below: f64,
    pub ratio_above: f64,
    pub crossing: PhaseCrossing,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EpScan {
    pub reports: Vec<ExceptionalPointReport>,
    /// Scan points where the condition could not be evaluated (family
    /// failure, or `sin Nφ = 0` in serial mode).
    pub skipped: Vec<f64>,
}

/// The mode's condition residual for cell `m` on branch `sign`; `None` where
/// it is undefined.
pub fn ep_residual(mode: EpMode, sign: BranchSign, m: &TransferMatrix) -> Option<Complex64> {
    let p = pt_params(m);
    let s = sign.value();
    match mode {
        EpMode::Single => Some(p.asymmetry() - 2.0 * s),
        EpMode::Serial(n) => {
            let (u, _) = chebyshev_u_pair(n, m.trace() / 2.0);
            if u.norm() < SERIAL_SKIP {
                return None;
            }
            Some(p.asymmetry() - 2.0 * s / u)
        }
        EpMode::Parallel(n) => {
            let (plus, minus) = s_eigenvalues_unordered(&p).ok()?;
            let lambda = if s > 0.0 { plus } else { minus };
            let nf = n as f64;
            Some(lambda - (nf + 1.0) / (nf - 1.0))
        }
    }
}

/// Locates roots of the mode's condition over `range` on both branches.
///
/// `family` yields the single-cell matrix; the serial and parallel systems
/// are composed from it. Each report carries the eigenvalue ratio of the
/// composed system on both sides of the root.
pub fn find_exceptional_points<F>(
    family: &F,
    range: (f64, f64),
    mode: EpMode,
    opts: &ScanOptions,
) -> Result<EpScan>
where
    F: Fn(f64) -> Result<TransferMatrix> + Sync,
{
    mode.validate()?;
    let grid = opts.grid(range)?;
    let xs = grid.points();
    let half = 0.5 * grid.spacing();
    let ratio = |w: f64| {
        family(w)
            .and_then(|m| mode.composed(&m))
            .and_then(|m| s_eigenvalues(&pt_params(&m)))
            .map_or(f64::NAN, |e| e.ratio)
    };
    let mut out = EpScan::default();
    let mut skipped = vec![false; xs.len()];
    for sign in [BranchSign::Plus, BranchSign::Minus] {
        let g = |w: f64| family(w).ok().and_then(|m| ep_residual(mode, sign, &m));
        let vals = scan(&g, &xs);
        for (flag, v) in skipped.iter_mut().zip(&vals) {
            *flag |= v.is_none();
        }
        for r in refine_roots(&g, &xs, &vals) {
            if r.residual >= opts.tol {
                continue;
            }
            let (ratio_below, ratio_above) =
                (ratio((r.x - half).max(range.0)), ratio((r.x + half).min(range.1)));
            out.reports.push(ExceptionalPointReport {
                mode,
                omega: r.x,
                condition_residual: r.residual,
                branch_sign: sign,
                ratio_below,
                ratio_above,
                crossing: PhaseCrossing::classify(ratio_below, ratio_above),
            });
        }
    }
    out.reports.sort_by(|p, q| p.omega.total_cmp(&q.omega));
    out.skipped = xs.iter().zip(&skipped).filter(|(_, &s)| s).map(|(&x, _)| x).collect();
    Ok(out)
}
