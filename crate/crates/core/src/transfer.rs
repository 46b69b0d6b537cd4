//! 2×2 complex matrix algebra, transfer ↔ scattering conversion and the
//! `(a, b, c)` parameterisation of PT-symmetric cells.
//!
//! All matrices use one amplitude convention: a transfer matrix maps the
//! (forward, backward) amplitude pair on the left lead to the pair on the
//! right lead. With that orientation
//!
//! ```text
//! t = 1 / m22,   r_left = -m21 / m22,   r_right = m12 / m22
//! ```
//!
//! and a cell parameterised as `[[a*, i b], [-i c, a]]` has the scattering
//! matrix `(1/a) [[i c, 1], [1, i b]]`.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default threshold on `|m22| / ‖M‖` below which a point counts as a spectral singularity.
pub const SINGULARITY_TOL: f64 = 1e-9;

/// Relative tolerance used to decide that two eigenvalue moduli tie.
const MODULUS_TIE_TOL: f64 = 1e-12;

pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Plain 2×2 complex matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2 {
    pub m11: Complex64,
    pub m12: Complex64,
    pub m21: Complex64,
    pub m22: Complex64,
}

impl Mat2 {
    pub const fn new(m11: Complex64, m12: Complex64, m21: Complex64, m22: Complex64) -> Self {
        Self { m11, m12, m21, m22 }
    }

    pub const fn identity() -> Self {
        Self::new(
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        )
    }

    pub const fn zero() -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self::new(z, z, z, z)
    }

    pub fn diag(d1: Complex64, d2: Complex64) -> Self {
        Self::new(d1, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), d2)
    }

    /// Real-valued constructor, row major.
    pub fn real(m11: f64, m12: f64, m21: f64, m22: f64) -> Self {
        Self::new(c(m11), c(m12), c(m21), c(m22))
    }

    pub fn det(&self) -> Complex64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn trace(&self) -> Complex64 {
        self.m11 + self.m22
    }

    pub fn adjugate(&self) -> Self {
        Self::new(self.m22, -self.m12, -self.m21, self.m11)
    }

    /// Inverse, or `None` when `|det|` is below `1e-300` of the squared norm.
    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        let scale = self.norm().powi(2);
        if !(det.norm() > 1e-300 * scale.max(f64::MIN_POSITIVE)) {
            return None;
        }
        Some(self.adjugate() * (1.0 / det))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.m11 * s, self.m12 * s, self.m21 * s, self.m22 * s)
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        (self.m11.norm_sqr() + self.m12.norm_sqr() + self.m21.norm_sqr() + self.m22.norm_sqr())
            .sqrt()
    }

    pub fn entries(&self) -> [Complex64; 4] {
        [self.m11, self.m12, self.m21, self.m22]
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        self.entries()
            .iter()
            .zip(other.entries().iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2::new(self.m11 + o.m11, self.m12 + o.m12, self.m21 + o.m21, self.m22 + o.m22)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        Mat2::new(self.m11 - o.m11, self.m12 - o.m12, self.m21 - o.m21, self.m22 - o.m22)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        Mat2::new(-self.m11, -self.m12, -self.m21, -self.m22)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.m11 * o.m11 + self.m12 * o.m21,
            self.m11 * o.m12 + self.m12 * o.m22,
            self.m21 * o.m11 + self.m22 * o.m21,
            self.m21 * o.m12 + self.m22 * o.m22,
        )
    }
}

impl Mul<Complex64> for Mat2 {
    type Output = Mat2;
    fn mul(self, s: Complex64) -> Mat2 {
        self.scale(s)
    }
}

impl Mul<f64> for Mat2 {
    type Output = Mat2;
    fn mul(self, s: f64) -> Mat2 {
        self.scale(c(s))
    }
}

/// A finite 2×2 transfer matrix in the left-to-right convention, with its determinant cached.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferMatrix {
    mat: Mat2,
    det: Complex64,
}

impl TransferMatrix {
    pub fn new(mat: Mat2) -> Result<Self> {
        if !mat.is_finite() {
            return Err(Error::NonFinite("transfer matrix"));
        }
        Ok(Self { mat, det: mat.det() })
    }

    pub fn from_entries(
        m11: Complex64,
        m12: Complex64,
        m21: Complex64,
        m22: Complex64,
    ) -> Result<Self> {
        Self::new(Mat2::new(m11, m12, m21, m22))
    }

    pub fn identity() -> Self {
        Self { mat: Mat2::identity(), det: c(1.0) }
    }

    pub fn mat(&self) -> &Mat2 {
        &self.mat
    }

    pub fn det(&self) -> Complex64 {
        self.det
    }

    pub fn m11(&self) -> Complex64 {
        self.mat.m11
    }
    pub fn m12(&self) -> Complex64 {
        self.mat.m12
    }
    pub fn m21(&self) -> Complex64 {
        self.mat.m21
    }
    pub fn m22(&self) -> Complex64 {
        self.mat.m22
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

    pub fn is_unimodular(&self, tol: f64) -> bool {
        (self.det - 1.0).norm() <= tol
    }

    /// Inverse transfer matrix (the right-to-left map).
    pub fn inverse(&self) -> Result<Self> {
        let inv = self
            .mat
            .inverse()
            .ok_or(Error::NonFinite("inverse of singular transfer matrix"))?;
        Self::new(inv)
    }

    /// The matrix of `self` followed spatially by `next`, i.e. `next · self`.
    pub fn then(&self, next: &TransferMatrix) -> Result<Self> {
        Self::new(next.mat * self.mat)
    }
}

impl From<TransferMatrix> for Mat2 {
    fn from(t: TransferMatrix) -> Mat2 {
        t.mat
    }
}

/// Scattering amplitudes of a transfer matrix and their squared moduli.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScatteringAmplitudes {
    /// Transmission amplitude `1/m22`; for unimodular matrices it is the same from both sides.
    pub t: Complex64,
    pub r_left: Complex64,
    pub r_right: Complex64,
    pub transmittance: f64,
    pub reflectance_left: f64,
    pub reflectance_right: f64,
}

impl ScatteringAmplitudes {
    fn from_amplitudes(t: Complex64, r_left: Complex64, r_right: Complex64) -> Self {
        Self {
            t,
            r_left,
            r_right,
            transmittance: t.norm_sqr(),
            reflectance_left: r_left.norm_sqr(),
            reflectance_right: r_right.norm_sqr(),
        }
    }
}

pub fn transfer_to_scattering(m: &TransferMatrix) -> Result<ScatteringAmplitudes> {
    transfer_to_scattering_with(m, SINGULARITY_TOL)
}

/// As [`transfer_to_scattering`] with an explicit singularity tolerance on `|m22| / ‖M‖`.
pub fn transfer_to_scattering_with(m: &TransferMatrix, tol: f64) -> Result<ScatteringAmplitudes> {
    let m22 = m.m22();
    let scale = m.mat().norm().max(f64::MIN_POSITIVE);
    if m22.norm() < tol * scale {
        return Err(Error::SpectralSingularity { m22_abs: m22.norm() });
    }
    let t = 1.0 / m22;
    Ok(ScatteringAmplitudes::from_amplitudes(t, -m.m21() * t, m.m12() * t))
}

/// The `(a, b, c)` parameters of a cell `[[a*, i b], [-i c, a]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PTParams {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
}

impl PTParams {
    pub fn new(a: Complex64, b: Complex64, c: Complex64) -> Self {
        Self { a, b, c }
    }

    pub fn real_bc(a: Complex64, b: f64, c: f64) -> Self {
        Self::new(a, Complex64::new(b, 0.0), Complex64::new(c, 0.0))
    }

    /// `|a|² − b·c`, the determinant of the matrix built from these parameters.
    pub fn det(&self) -> Complex64 {
        self.a.norm_sqr() - self.b * self.c
    }

    /// `b − c`; exceptional points sit where this reaches `±2`.
    pub fn asymmetry(&self) -> Complex64 {
        self.b - self.c
    }
}

/// Reads `a = m22`, `b = −i·m12`, `c = i·m21` off a matrix.
pub fn pt_params(m: &TransferMatrix) -> PTParams {
    PTParams::new(m.m22(), -I * m.m12(), I * m.m21())
}

/// Eigenvalues of the S matrix, ordered so `|lambda_plus| ≥ |lambda_minus|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SEigenvalues {
    pub lambda_plus: Complex64,
    pub lambda_minus: Complex64,
    /// `|λ₊| / |λ₋|`, at least 1 (infinite when `λ₋ = 0`).
    pub ratio: f64,
}

impl SEigenvalues {
    /// A ratio above `1 + tol` marks the broken phase.
    pub fn is_broken(&self, tol: f64) -> bool {
        self.ratio > 1.0 + tol
    }
}

/// The two S-matrix eigenvalues in formula order (`+` then `−` sign on the root).
pub(crate) fn s_eigenvalues_unordered(p: &PTParams) -> Result<(Complex64, Complex64)> {
    if p.a.norm() == 0.0 || !p.a.re.is_finite() || !p.a.im.is_finite() {
        return Err(Error::DegenerateSMatrix);
    }
    let d = p.b - p.c;
    let disc = (d - 2.0) * (d + 2.0);
    let root = disc.sqrt();
    let pre = I / (2.0 * p.a);
    let sum = p.b + p.c;
    Ok((pre * (sum + root), pre * (sum - root)))
}

pub fn s_eigenvalues(p: &PTParams) -> Result<SEigenvalues> {
    let (mut plus, mut minus) = s_eigenvalues_unordered(p)?;
    let (np, nm) = (plus.norm(), minus.norm());
    let tie = (np - nm).abs() <= MODULUS_TIE_TOL * np.max(nm);
    if (!tie && nm > np) || (tie && minus.im > plus.im) {
        std::mem::swap(&mut plus, &mut minus);
    }
    let ratio = if minus.norm() == 0.0 {
        f64::INFINITY
    } else {
        plus.norm() / minus.norm()
    };
    Ok(SEigenvalues { lambda_plus: plus, lambda_minus: minus, ratio: ratio.max(1.0) })
}

/// A cell whose transfer matrix depends on a (possibly complex) control parameter.
///
/// Implementations must be safe to call concurrently.
pub trait CellModel: Send + Sync {
    fn transfer_matrix(&self, omega: Complex64) -> Result<TransferMatrix>;
}

impl<F> CellModel for F
where
    F: Fn(Complex64) -> Result<TransferMatrix> + Send + Sync,
{
    fn transfer_matrix(&self, omega: Complex64) -> Result<TransferMatrix> {
        self(omega)
    }
}

/// Residuals of the three PT constraints at one control-parameter value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PtSymmetryReport {
    /// `|m22(ω) − m11*(ω*)|`
    pub diagonal: f64,
    /// `|m12(ω) + m12*(ω*)|`
    pub upper: f64,
    /// `|m21(ω) + m21*(ω*)|`
    pub lower: f64,
    pub tol: f64,
}

impl PtSymmetryReport {
    pub fn diagonal_ok(&self) -> bool {
        self.diagonal <= self.tol
    }
    pub fn upper_ok(&self) -> bool {
        self.upper <= self.tol
    }
    pub fn lower_ok(&self) -> bool {
        self.lower <= self.tol
    }
    pub fn passes(&self) -> bool {
        self.diagonal_ok() && self.upper_ok() && self.lower_ok()
    }
}

/// Evaluates the PT constraints relating `M(ω)` to `M(ω*)`.
///
/// Residuals are absolute; `tol` is scaled by `max(1, ‖M(ω)‖)`.
pub fn check_pt_symmetry(
    cell: &dyn CellModel,
    omega: Complex64,
    tol: f64,
) -> Result<PtSymmetryReport> {
    let m = cell.transfer_matrix(omega)?;
    let mc = cell.transfer_matrix(omega.conj())?;
    let scale = m.mat().norm().max(1.0);
    Ok(PtSymmetryReport {
        diagonal: (m.m22() - mc.m11().conj()).norm(),
        upper: (m.m12() + mc.m12().conj()).norm(),
        lower: (m.m21() + mc.m21().conj()).norm(),
        tol: tol * scale,
    })
}
