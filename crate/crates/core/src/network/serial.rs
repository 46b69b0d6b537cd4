use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::transfer::{Mat2, TransferMatrix};

/// Below this `|sin φ|` the Bloch-phase quotient is replaced by the polynomial form.
pub const SIN_PHI_SWITCH: f64 = 1e-6;

/// Unimodularity tolerance required by the N-cell identity.
pub const UNIMODULAR_TOL: f64 = 1e-10;

/// Evaluation route for [`serial_identical_via`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SerialPath {
    /// `M = [m sin(Nφ) − I sin((N−1)φ)] / sin φ` with `cos φ = Tr(m)/2`.
    Bloch,
    /// `M = m U_{N−1}(x) − I U_{N−2}(x)`, `x = Tr(m)/2`, by the three-term
    /// recurrence. Finite at `sin φ = 0`, where it reduces to
    /// `±(N m ∓ (N−1) I)`.
    Chebyshev,
}

/// Ordered chain, leftmost cell first: `[m1, m2, m3] ↦ m3 · m2 · m1`.
pub fn serial_compose(cells: &[TransferMatrix]) -> Result<TransferMatrix> {
    cells
        .iter()
        .try_fold(TransferMatrix::identity(), |acc, m| acc.then(m))
}

/// `(U_{n−1}(x), U_{n−2}(x))` with `U_{−1} = 0`.
pub(crate) fn chebyshev_u_pair(n: usize, x: Complex64) -> (Complex64, Complex64) {
    let (mut prev, mut cur) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    for _ in 1..n {
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// `n` identical unimodular cells in series.
pub fn serial_identical(m: &TransferMatrix, n: usize) -> Result<TransferMatrix> {
    let x = m.trace() / 2.0;
    let sin_phi = (1.0 - x * x).sqrt();
    let path = if sin_phi.norm() < SIN_PHI_SWITCH { SerialPath::Chebyshev } else { SerialPath::Bloch };
    serial_identical_via(m, n, path)
}

pub fn serial_identical_via(m: &TransferMatrix, n: usize, path: SerialPath) -> Result<TransferMatrix> {
    if n == 0 {
        return Err(Error::InvalidParameter("serial count must be at least 1".into()));
    }
    let deviation = (m.det() - 1.0).norm();
    if deviation > UNIMODULAR_TOL {
        return Err(Error::NotUnimodular { deviation });
    }
    let id = Mat2::identity();
    let x = m.trace() / 2.0;
    let out = match path {
        SerialPath::Bloch => {
            let phi = x.acos();
            let s = phi.sin();
            if s.norm() == 0.0 {
                return serial_identical_via(m, n, SerialPath::Chebyshev);
            }
            let nf = n as f64;
            (*m.mat() * (phi * nf).sin() - id * (phi * (nf - 1.0)).sin()) * (1.0 / s)
        }
        SerialPath::Chebyshev => {
            let (u1, u2) = chebyshev_u_pair(n, x);
            *m.mat() * u1 - id * u2
        }
    };
    TransferMatrix::new(out)
}
