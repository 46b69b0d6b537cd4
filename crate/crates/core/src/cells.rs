//! Concrete scattering cells.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::transfer::{CellModel, Mat2, PTParams, TransferMatrix, I};

/// Natural units by default; every field must be strictly positive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub e_charge: f64,
    pub c_light: f64,
    pub default_mass: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self { hbar: 1.0, e_charge: 1.0, c_light: 1.0, default_mass: 1.0 }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("hbar", self.hbar),
            ("e_charge", self.e_charge),
            ("c_light", self.c_light),
            ("default_mass", self.default_mass),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Uniform segment with separate forward and backward wavevectors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FreeSegment {
    pub length: f64,
    pub k_forward: Complex64,
    pub k_backward: Complex64,
    pub mass: f64,
}

impl FreeSegment {
    pub fn new(length: f64, k: Complex64) -> Self {
        Self { length, k_forward: k, k_backward: k, mass: 1.0 }
    }

    pub fn directional(length: f64, k_forward: Complex64, k_backward: Complex64) -> Self {
        Self { length, k_forward, k_backward, mass: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length >= 0.0 && self.length.is_finite()) {
            return Err(Error::InvalidParameter(format!("segment length {} < 0", self.length)));
        }
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::InvalidParameter(format!("segment mass {} <= 0", self.mass)));
        }
        Ok(())
    }
}

/// `diag(exp(i k_f L), exp(−i k_b L))`.
pub fn free_segment_matrix(seg: &FreeSegment) -> Result<TransferMatrix> {
    seg.validate()?;
    TransferMatrix::new(Mat2::diag(
        (I * seg.k_forward * seg.length).exp(),
        (-I * seg.k_backward * seg.length).exp(),
    ))
}

/// Builds `[[a*, i b], [−i c, a]]`; the determinant is `|a|² − b c`.
pub fn pt_cell(p: &PTParams) -> Result<TransferMatrix> {
    TransferMatrix::from_entries(p.a.conj(), I * p.b, -I * p.c, p.a)
}

/// Index profile `n0 + n1 cos(2βz) + i n2 sin(2βz)` over a grating of length `L`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BraggParams {
    pub n0: f64,
    pub n1: f64,
    pub n2: f64,
    /// Grating number β.
    pub grating: f64,
    pub length: f64,
}

impl BraggParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.n0 > 0.0) {
            return Err(Error::InvalidParameter(format!("n0 = {} must be positive", self.n0)));
        }
        if !(self.length > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "grating length {} must be positive",
                self.length
            )));
        }
        if ![self.n1, self.n2, self.grating].iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("Bragg parameters"));
        }
        Ok(())
    }

    pub fn detuning(&self, k: f64) -> f64 {
        self.grating - k
    }

    /// `λ² = δ² − k²(n1² − n2²)/(4 n0²)`.
    pub fn lambda_squared(&self, k: Complex64) -> Complex64 {
        let delta = self.grating - k;
        delta * delta - k * k * (self.n1 * self.n1 - self.n2 * self.n2) / (4.0 * self.n0 * self.n0)
    }
}

/// `sin(z)/z`, with a Taylor series close to the origin.
pub(crate) fn sinc(z: Complex64) -> Complex64 {
    if z.norm() < 1e-3 {
        let z2 = z * z;
        1.0 - z2 / 6.0 * (1.0 - z2 / 20.0 * (1.0 - z2 / 42.0))
    } else {
        z.sin() / z
    }
}

pub fn bragg_matrix(p: &BraggParams, k: f64) -> Result<TransferMatrix> {
    if !(k > 0.0) {
        return Err(Error::InvalidParameter(format!("wavenumber k = {k} must be positive")));
    }
    bragg_matrix_complex(p, Complex64::new(k, 0.0))
}

/// Near-Bragg grating matrix at a complex wavenumber; λ enters only through
/// `cos(λL)` and `sin(λL)/λ`, so no branch choice is needed.
pub fn bragg_matrix_complex(p: &BraggParams, k: Complex64) -> Result<TransferMatrix> {
    p.validate()?;
    let delta = p.grating - k;
    let lambda = p.lambda_squared(k).sqrt();
    let arg = lambda * p.length;
    let cos = arg.cos();
    let s = sinc(arg) * p.length;
    let coupling = k * s / (2.0 * p.n0);
    TransferMatrix::from_entries(
        cos - I * delta * s,
        I * (p.n1 + p.n2) * coupling,
        -I * (p.n1 - p.n2) * coupling,
        cos + I * delta * s,
    )
}

/// Aharonov–Bohm ring: two arms of lengths `L1 + L2 = L` threaded by flux Φ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ABRingSpec {
    pub k: f64,
    pub flux: f64,
    pub circumference: f64,
    pub arm1: f64,
    pub arm2: f64,
}

impl ABRingSpec {
    pub fn new(k: f64, flux: f64, arm1: f64, arm2: f64) -> Result<Self> {
        let spec = Self { k, flux, circumference: arm1 + arm2, arm1, arm2 };
        spec.validate()?;
        Ok(spec)
    }

    /// Symmetric ring from the flux phase `ψ = −eΦ/(ħc)`.
    pub fn symmetric_from_phase(
        k: f64,
        circumference: f64,
        flux_phase: f64,
        consts: &PhysicalConstants,
    ) -> Result<Self> {
        let flux = -flux_phase * consts.hbar * consts.c_light / consts.e_charge;
        Self::new(k, flux, circumference / 2.0, circumference / 2.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.arm1 > 0.0 && self.arm2 > 0.0) {
            return Err(Error::InvalidParameter("ring arm lengths must be positive".into()));
        }
        if (self.arm1 + self.arm2 - self.circumference).abs() > 1e-12 * self.circumference.max(1.0)
        {
            return Err(Error::InvalidParameter("arm lengths must sum to the circumference".into()));
        }
        Ok(())
    }

    pub fn flux_phase(&self, consts: &PhysicalConstants) -> f64 {
        -consts.e_charge * self.flux / (consts.hbar * consts.c_light)
    }
}

/// Arm wavevectors `k ± eΦ/(ħcL)`. On each arm the backward wavevector is
/// the other arm's forward one.
pub fn ab_ring_wavevectors(spec: &ABRingSpec, consts: &PhysicalConstants) -> Result<(f64, f64)> {
    spec.validate()?;
    let shift = consts.e_charge * spec.flux / (consts.hbar * consts.c_light * spec.circumference);
    Ok((spec.k + shift, spec.k - shift))
}

/// PT cell whose `(a, b, c)` are tabulated on an increasing real grid and
/// linearly interpolated.
#[derive(Clone, Debug, PartialEq)]
pub struct PtTable {
    omega: Vec<f64>,
    a: Vec<Complex64>,
    b: Vec<Complex64>,
    c: Vec<Complex64>,
}

impl PtTable {
    pub fn new(
        omega: Vec<f64>,
        a: Vec<Complex64>,
        b: Vec<Complex64>,
        c: Vec<Complex64>,
    ) -> Result<Self> {
        let n = omega.len();
        if n < 2 || a.len() != n || b.len() != n || c.len() != n {
            return Err(Error::InvalidParameter(
                "PT table needs at least two rows and equal column lengths".into(),
            ));
        }
        if omega.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("PT table grid must be strictly increasing".into()));
        }
        Ok(Self { omega, a, b, c })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.omega[0], self.omega[self.omega.len() - 1])
    }

    pub fn params_at(&self, omega: f64) -> Result<PTParams> {
        let (lo, hi) = self.range();
        if !(omega >= lo && omega <= hi) {
            return Err(Error::InvalidParameter(format!(
                "omega = {omega} outside table range [{lo}, {hi}]"
            )));
        }
        let j = match self.omega.partition_point(|&w| w <= omega) {
            0 => 0,
            p if p >= self.omega.len() => self.omega.len() - 2,
            p => p - 1,
        };
        let w = (omega - self.omega[j]) / (self.omega[j + 1] - self.omega[j]);
        let lerp = |v: &[Complex64]| v[j] * (1.0 - w) + v[j + 1] * w;
        Ok(PTParams::new(lerp(&self.a), lerp(&self.b), lerp(&self.c)))
    }
}

impl CellModel for PtTable {
    fn transfer_matrix(&self, omega: Complex64) -> Result<TransferMatrix> {
        if omega.im != 0.0 {
            return Err(Error::InvalidParameter("PT tables are sampled on real omega only".into()));
        }
        pt_cell(&self.params_at(omega.re)?)
    }
}
