//! Junction matrices of a parallel bundle.
//!
//! Everything here is written in the right-to-left orientation
//! `[u_j, v_j] = M_j [u'_j, v'_j]`, where `M_j` is the inverse of the
//! public left-to-right branch matrix.

use num_complex::Complex64;

use super::{BranchChannel, BranchSpec};
use crate::error::{Error, Result, Side};
use crate::transfer::{Mat2, I};

/// Relative threshold on link and vertex denominators.
pub const LINK_TOL: f64 = 1e-10;

/// Lead data at one junction: contact potential `V0`, lead mass and the
/// lead wavevectors `k` (forward) and `k'` (backward).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VertexParams {
    pub contact_potential: Complex64,
    pub mass: f64,
    pub k: Complex64,
    pub k_back: Complex64,
    pub hbar: f64,
}

impl VertexParams {
    /// Contact-free junction with unit mass and equal lead wavevectors.
    pub fn free(k: Complex64) -> Self {
        Self { contact_potential: Complex64::new(0.0, 0.0), mass: 1.0, k, k_back: k, hbar: 1.0 }
    }

    pub fn with_contact(mut self, v0: Complex64) -> Self {
        self.contact_potential = v0;
        self
    }

    pub fn alpha(&self) -> Complex64 {
        self.k / self.mass
    }

    pub fn beta(&self) -> Complex64 {
        self.k_back / self.mass
    }

    /// `γ = −2i V0 / ħ²`.
    pub fn gamma(&self) -> Complex64 {
        -2.0 * I * self.contact_potential / (self.hbar * self.hbar)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::InvalidParameter(format!("lead mass {} must be positive", self.mass)));
        }
        if !(self.hbar > 0.0) {
            return Err(Error::InvalidParameter("hbar must be positive".into()));
        }
        Ok(())
    }
}

/// The junction matrix `Q_j` (side `In`) or `Q'_j` (side `Out`) of branch `j`
/// in a bundle of `n` branches.
pub fn vertex_q(vp: &VertexParams, ch: &BranchChannel, n: usize, side: Side) -> Result<Mat2> {
    let nf = n as f64;
    let (alpha, beta, gamma) = (vp.alpha(), vp.beta(), vp.gamma());
    let denom = nf * (alpha + beta);
    if denom.norm() <= LINK_TOL * (alpha.norm() + beta.norm()).max(1.0) * nf {
        return Err(Error::DegenerateVertex { side, denominator: denom.norm() });
    }
    let q = match side {
        Side::In => {
            let (aj, bj) = (ch.alpha_in(), ch.beta_in());
            Mat2::new(
                beta - gamma + nf * aj,
                beta - gamma - nf * bj,
                alpha + gamma - nf * aj,
                alpha + gamma + nf * bj,
            )
        }
        Side::Out => {
            let (aj, bj) = (ch.alpha_out(), ch.beta_out());
            Mat2::new(
                beta + gamma + nf * aj,
                beta + gamma - nf * bj,
                alpha - gamma - nf * aj,
                alpha - gamma + nf * bj,
            )
        }
    };
    Ok(q * (1.0 / denom))
}

/// Channel link `L_{i,j}` in the printed form, with `d_i = det(M_i)` applied
/// as an overall `1/d_i`. Exact only for unimodular branch matrices; the
/// bundle pipeline uses [`link_in`], which carries the determinant ratio.
pub fn link_matrix(mi: &Mat2, mj: &Mat2, di: Complex64) -> Result<Mat2> {
    let den = mi.m11 - mi.m12 + mi.m21 - mi.m22;
    let scale = (mi.m11.norm() + mi.m12.norm() + mi.m21.norm() + mi.m22.norm()).max(1.0);
    if den.norm() < LINK_TOL * scale || di.norm() == 0.0 {
        return Err(Error::DegenerateLink { branch: 0, denominator: den.norm() });
    }
    let l = Mat2::new(
        mi.m11 - mi.m12 + mj.m21 - mj.m22,
        mi.m11 - mi.m12 - mj.m11 + mj.m12,
        -mi.m22 + mi.m21 + mj.m22 - mj.m21,
        -mi.m22 + mi.m21 + mj.m11 - mj.m12,
    );
    Ok(l * (1.0 / (di * den)))
}

/// Shared solve behind both links: branch `i` and `j` amplitudes `(x, y)`
/// obey `x_i + y_i = x_j + y_j` and `p_i x_i + r_i y_i = p_j x_j + r_j y_j`.
fn continuity_link(
    (pi, ri): (Complex64, Complex64),
    (pj, rj): (Complex64, Complex64),
    branch: usize,
) -> Result<Mat2> {
    let den = ri - pi;
    if den.norm() < LINK_TOL * (pi.norm() + ri.norm()).max(1.0) {
        return Err(Error::DegenerateLink { branch, denominator: den.norm() });
    }
    Ok(Mat2::new(ri - pj, ri - rj, pj - pi, rj - pi) * (1.0 / den))
}

/// Link between the left-junction amplitudes of branches `i` and `j`, given
/// their left-to-right matrices. Continuity at the far junction reads
/// `u' + v' = (g11 + g21) u + (g12 + g22) v`.
pub fn link_in(gi: &Mat2, gj: &Mat2, branch: usize) -> Result<Mat2> {
    let pr = |g: &Mat2| (g.m11 + g.m21, g.m12 + g.m22);
    continuity_link(pr(gi), pr(gj), branch)
}

/// Link between the right-junction amplitudes. Continuity at the near
/// junction reads `u + v = (m11 + m21) u' + (m12 + m22) v'` with `M = G⁻¹`;
/// the common `1/det G` is kept per branch.
pub fn link_out(gi: &Mat2, gj: &Mat2, branch: usize) -> Result<Mat2> {
    let pr = |g: &Mat2| {
        let d = g.det();
        ((g.m22 - g.m21) / d, (g.m11 - g.m12) / d)
    };
    continuity_link(pr(gi), pr(gj), branch)
}

/// `T_s = Σ_j Q_j L_{j,s}` (side `In`) or `T'_s = Σ_j Q'_j L'_{j,s}` (side `Out`).
pub fn reference_reduction(
    vp: &VertexParams,
    branches: &[BranchSpec],
    s: usize,
    side: Side,
) -> Result<Mat2> {
    let n = branches.len();
    if n == 0 || s >= n {
        return Err(Error::InvalidParameter(format!(
            "reference index {s} out of range for {n} branches"
        )));
    }
    let gs = branches[s].cell.mat();
    let mut acc = Mat2::zero();
    for (j, br) in branches.iter().enumerate() {
        let q = vertex_q(vp, &br.channel, n, side)?;
        let l = if j == s {
            Mat2::identity()
        } else {
            match side {
                Side::In => link_in(br.cell.mat(), gs, j)?,
                Side::Out => link_out(br.cell.mat(), gs, j)?,
            }
        };
        acc = acc + q * l;
    }
    Ok(acc)
}
