//! Dense linear solve of a parallel bundle's junction conditions.
//!
//! Unknowns per branch `j` are `u_j, v_j` at the left junction and
//! `u'_j, v'_j` at the right junction, plus the two outgoing lead amplitudes
//! `v` (left lead) and `u'` (right lead): `4N + 2` in total. The equations
//! are
//!
//! - continuity at both junctions: `u_j + v_j = u + v`, `u'_j + v'_j = u' + v'`;
//! - current balance with contact terms,
//!   `Σ_j (α_j u_j − β_j v_j) = α u − β v + γ (u + v)` on the left and
//!   `Σ_j (α'_j u'_j − β'_j v'_j) = α' u' − β' v' − γ' (u' + v')` on the right;
//! - each branch cell, `[u'_j, v'_j] = G_j [u_j, v_j]`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::ParallelBundle;
use crate::error::{Error, Result};
use crate::transfer::{Mat2, TransferMatrix};

/// Relative pivot below which the system counts as singular.
const PIVOT_TOL: f64 = 1e-13;

/// Relative singular value below which a direction counts as null.
const NULL_TOL: f64 = 1e-12;

/// Largest lead component a null vector may carry.
const LEAD_NULL_TOL: f64 = 1e-8;

/// Relative residual a rank-deficient system must reach to count as consistent.
const CONSISTENCY_TOL: f64 = 1e-10;

/// Which lead carries the unit incoming wave.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Incidence {
    /// `u = 1`, `v' = 0`.
    Left,
    /// `u = 0`, `v' = 1`.
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchAmplitudes {
    pub u: Complex64,
    pub v: Complex64,
    pub u_out: Complex64,
    pub v_out: Complex64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleSolution {
    pub incidence: Incidence,
    pub branches: Vec<BranchAmplitudes>,
    /// Outgoing amplitude on the left lead.
    pub lead_v: Complex64,
    /// Outgoing amplitude on the right lead.
    pub lead_u_out: Complex64,
    /// `‖A x − b‖∞ / (‖A‖∞ ‖x‖∞ + ‖b‖∞)`.
    pub residual: f64,
    /// Dimension of the null space of the vertex system. Nonzero only for
    /// states confined to the branches, which leave the lead amplitudes
    /// unique; branch amplitudes are then the minimum-norm solution.
    pub bound_states: usize,
}

impl OracleSolution {
    pub fn t(&self) -> Complex64 {
        match self.incidence {
            Incidence::Left => self.lead_u_out,
            Incidence::Right => self.lead_v,
        }
    }

    pub fn r(&self) -> Complex64 {
        match self.incidence {
            Incidence::Left => self.lead_v,
            Incidence::Right => self.lead_u_out,
        }
    }
}

fn assemble(bundle: &ParallelBundle) -> Result<DMatrix<Complex64>> {
    let n = bundle.branches.len();
    if n == 0 {
        return Err(Error::InvalidParameter("parallel bundle needs at least one branch".into()));
    }
    let dim = 4 * n + 2;
    let (lead_v, lead_u_out) = (4 * n, 4 * n + 1);
    let one = Complex64::new(1.0, 0.0);
    let mut a = DMatrix::<Complex64>::zeros(dim, dim);
    let vin = &bundle.vertex_in;
    let vout = &bundle.vertex_out;

    let mut row = 0;
    for j in 0..n {
        a[(row, 4 * j)] = one;
        a[(row, 4 * j + 1)] = one;
        a[(row, lead_v)] = -one;
        row += 1;
    }
    for (j, br) in bundle.branches.iter().enumerate() {
        a[(row, 4 * j)] = br.channel.alpha_in();
        a[(row, 4 * j + 1)] = -br.channel.beta_in();
    }
    a[(row, lead_v)] = vin.beta() - vin.gamma();
    row += 1;

    for j in 0..n {
        a[(row, 4 * j + 2)] = one;
        a[(row, 4 * j + 3)] = one;
        a[(row, lead_u_out)] = -one;
        row += 1;
    }
    for (j, br) in bundle.branches.iter().enumerate() {
        a[(row, 4 * j + 2)] = br.channel.alpha_out();
        a[(row, 4 * j + 3)] = -br.channel.beta_out();
    }
    a[(row, lead_u_out)] = -(vout.alpha() - vout.gamma());
    row += 1;

    for (j, br) in bundle.branches.iter().enumerate() {
        let g = br.cell.mat();
        a[(row, 4 * j + 2)] = one;
        a[(row, 4 * j)] = -g.m11;
        a[(row, 4 * j + 1)] = -g.m12;
        row += 1;
        a[(row, 4 * j + 3)] = one;
        a[(row, 4 * j)] = -g.m21;
        a[(row, 4 * j + 1)] = -g.m22;
        row += 1;
    }
    debug_assert_eq!(row, dim);
    Ok(a)
}

fn rhs(bundle: &ParallelBundle, incidence: Incidence) -> DVector<Complex64> {
    let n = bundle.branches.len();
    let (u, v_out) = match incidence {
        Incidence::Left => (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
        Incidence::Right => (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)),
    };
    let vin = &bundle.vertex_in;
    let vout = &bundle.vertex_out;
    let mut b = DVector::<Complex64>::zeros(4 * n + 2);
    for j in 0..n {
        b[j] = u;
    }
    b[n] = (vin.alpha() + vin.gamma()) * u;
    for j in 0..n {
        b[n + 1 + j] = v_out;
    }
    b[2 * n + 1] = -(vout.beta() + vout.gamma()) * v_out;
    b
}

fn inf_norm_mat(a: &DMatrix<Complex64>) -> f64 {
    a.row_iter()
        .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn inf_norm_vec(v: &DVector<Complex64>) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn solve_many(bundle: &ParallelBundle, incidences: &[Incidence]) -> Result<Vec<OracleSolution>> {
    for br in &bundle.branches {
        if !br.cell.mat().is_finite() {
            return Err(Error::NonFinite("branch matrix"));
        }
    }
    let a = assemble(bundle)?;
    let n = bundle.branches.len();
    let a_norm = inf_norm_mat(&a);
    let solver = Solver::new(&a, n)?;
    incidences
        .iter()
        .map(|&inc| {
            let b = rhs(bundle, inc);
            let x = solver.solve(&b)?;
            let res = inf_norm_vec(&(&a * &x - &b)) / (a_norm * inf_norm_vec(&x) + inf_norm_vec(&b));
            if solver.bound_states > 0 && !(res < CONSISTENCY_TOL) {
                return Err(Error::NoUniqueSolution { pivot: solver.pivot });
            }
            if !res.is_finite() {
                return Err(Error::NonFinite("oracle solution"));
            }
            Ok(OracleSolution {
                incidence: inc,
                branches: (0..n)
                    .map(|j| BranchAmplitudes {
                        u: x[4 * j],
                        v: x[4 * j + 1],
                        u_out: x[4 * j + 2],
                        v_out: x[4 * j + 3],
                    })
                    .collect(),
                lead_v: x[4 * n],
                lead_u_out: x[4 * n + 1],
                residual: res,
                bound_states: solver.bound_states,
            })
        })
        .collect()
}

/// LU when the vertex system is regular; otherwise a minimum-norm SVD solve,
/// accepted only if no null vector reaches the leads.
enum Factor {
    Lu(nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>),
    Svd(nalgebra::SVD<Complex64, nalgebra::Dyn, nalgebra::Dyn>, f64),
}

struct Solver {
    factor: Factor,
    pivot: f64,
    bound_states: usize,
}

impl Solver {
    fn new(a: &DMatrix<Complex64>, n: usize) -> Result<Self> {
        let lu = a.clone().lu();
        let (lo, hi) = lu
            .u()
            .diagonal()
            .iter()
            .map(|z| z.norm())
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), x| (lo.min(x), hi.max(x)));
        let pivot = if hi > 0.0 { lo / hi } else { 0.0 };
        if pivot > PIVOT_TOL {
            return Ok(Self { factor: Factor::Lu(lu), pivot, bound_states: 0 });
        }
        let svd = a.clone().svd(true, true);
        let v_t = svd.v_t.as_ref().ok_or(Error::NoUniqueSolution { pivot })?;
        let s_max = svd.singular_values.max();
        if !(s_max > 0.0) {
            return Err(Error::NoUniqueSolution { pivot });
        }
        let cutoff = NULL_TOL * s_max;
        let mut bound_states = 0;
        for (i, &s) in svd.singular_values.iter().enumerate() {
            if s <= cutoff {
                bound_states += 1;
                let lead = v_t[(i, 4 * n)].norm().max(v_t[(i, 4 * n + 1)].norm());
                if lead > LEAD_NULL_TOL {
                    return Err(Error::NoUniqueSolution { pivot });
                }
            }
        }
        if bound_states == 0 {
            return Err(Error::NoUniqueSolution { pivot });
        }
        Ok(Self { factor: Factor::Svd(svd, cutoff), pivot, bound_states })
    }

    fn solve(&self, b: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        let x = match &self.factor {
            Factor::Lu(lu) => lu.solve(b),
            Factor::Svd(svd, cutoff) => svd.solve(b, *cutoff).ok(),
        };
        x.ok_or(Error::NoUniqueSolution { pivot: self.pivot })
    }
}

/// Solves the bundle for a unit wave incident from the left.
pub fn solve_bruteforce(bundle: &ParallelBundle) -> Result<OracleSolution> {
    solve_bruteforce_incidence(bundle, Incidence::Left)
}

pub fn solve_bruteforce_incidence(
    bundle: &ParallelBundle,
    incidence: Incidence,
) -> Result<OracleSolution> {
    Ok(solve_many(bundle, &[incidence])?.remove(0))
}

/// Rebuilds the left-to-right matrix from both incidence directions:
/// `G = (1/t_R) [[t_L t_R − r_R r_L, r_R], [−r_L, 1]]`.
pub fn oracle_transfer_matrix(bundle: &ParallelBundle) -> Result<TransferMatrix> {
    let sols = solve_many(bundle, &[Incidence::Left, Incidence::Right])?;
    let (left, right) = (&sols[0], &sols[1]);
    let (t_l, r_l, t_r, r_r) = (left.t(), left.r(), right.t(), right.r());
    let scale = 1.0 + r_l.norm().max(r_r.norm());
    if t_r.norm() < 1e-14 * scale {
        return Err(Error::ZeroTransmission { t_abs: t_r.norm() });
    }
    TransferMatrix::new(Mat2::new(t_l * t_r - r_r * r_l, r_r, -r_l, Complex64::new(1.0, 0.0)) * (1.0 / t_r))
}
