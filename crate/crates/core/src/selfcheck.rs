//! Seeded randomized consistency suites.
//!
//! Each suite draws its cases from a ChaCha stream seeded by the caller, so a
//! run is reproducible bit for bit. The suites compare independent
//! evaluation paths (reference reduction against the dense solver, Bloch
//! formula against repeated products, closed forms against similarity
//! transforms) and check conservation laws.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cells::{bragg_matrix, free_segment_matrix, pt_cell, BraggParams, FreeSegment};
use crate::network::{
    identical_junction, parallel_compose, parallel_compose_pipeline, parallel_identical,
    serial_compose, serial_identical, serial_identical_via, solve_bruteforce, BranchChannel,
    BranchSpec, ParallelBundle, ParallelRoute, SerialPath, VertexParams,
};
use crate::transfer::{
    pt_params, s_eigenvalues, transfer_to_scattering, Mat2, PTParams, TransferMatrix,
};

/// Outcome of one suite.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub checks: usize,
    pub failures: usize,
    /// Largest observed `error / tolerance`; at most 1 when the suite passes.
    pub worst: f64,
    /// Cases routed through the dense-solver fallback.
    pub fallbacks: usize,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

struct Tally {
    name: &'static str,
    checks: usize,
    failures: usize,
    worst: f64,
    fallbacks: usize,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Self { name, checks: 0, failures: 0, worst: 0.0, fallbacks: 0 }
    }

    /// Records one check against `tol`; `None` means it could not be evaluated.
    fn record(&mut self, err: Option<f64>, tol: f64) {
        self.checks += 1;
        let ratio = err.map_or(f64::INFINITY, |e| if e.is_nan() { f64::INFINITY } else { e / tol });
        if ratio > 1.0 {
            self.failures += 1;
        }
        self.worst = self.worst.max(ratio);
    }

    fn finish(self) -> SuiteOutcome {
        SuiteOutcome {
            name: self.name,
            checks: self.checks,
            failures: self.failures,
            worst: self.worst,
            fallbacks: self.fallbacks,
        }
    }
}

fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    cx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Unimodular matrix with `|m11| ≥ 0.5` and the other entries of order one.
pub fn random_unimodular(rng: &mut ChaCha8Rng) -> TransferMatrix {
    loop {
        let (a, b, c) = (random_complex(rng), random_complex(rng), random_complex(rng));
        if a.norm() >= 0.5 {
            if let Ok(m) = TransferMatrix::from_entries(a, b, c, (1.0 + b * c) / a) {
                return m;
            }
        }
    }
}

/// Unimodular matrix with real Bloch phase `φ`: `P diag(e^{iφ}, e^{−iφ}) P⁻¹`.
pub fn random_passband(rng: &mut ChaCha8Rng) -> TransferMatrix {
    loop {
        let p = Mat2::new(random_complex(rng), random_complex(rng), random_complex(rng), random_complex(rng));
        let det = p.det();
        if det.norm() < 0.3 {
            continue;
        }
        let phi: f64 = rng.gen_range(0.05..std::f64::consts::PI - 0.05);
        let d = Mat2::diag(Complex64::from_polar(1.0, phi), Complex64::from_polar(1.0, -phi));
        let m = p * d * p.adjugate() * (1.0 / det);
        if let Ok(m) = TransferMatrix::new(m) {
            return m;
        }
    }
}

/// Unimodular PT cell with real `b, c`.
pub fn random_pt_cell(rng: &mut ChaCha8Rng) -> TransferMatrix {
    loop {
        let (b, c): (f64, f64) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let mod2 = 1.0 + b * c;
        if mod2 > 0.05 {
            let a = Complex64::from_polar(mod2.sqrt(), rng.gen_range(-3.0..3.0));
            return pt_cell(&PTParams::real_bc(a, b, c)).expect("finite");
        }
    }
}

fn rel_diff(x: Complex64, y: Complex64, scale: f64) -> f64 {
    (x - y).norm() / scale.max(f64::MIN_POSITIVE)
}

/// Random contact-free bundles: amplitudes of [`parallel_compose`] against the dense solver.
pub fn oracle_equivalence(seed: u64, cases: usize) -> SuiteOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new("oracle_equivalence");
    for _ in 0..cases {
        let n = rng.gen_range(2..=5);
        let k_lead = cx(rng.gen_range(0.5..2.0), 0.0);
        let branches = (0..n)
            .map(|_| {
                BranchSpec::new(random_unimodular(&mut rng), BranchChannel::uniform(cx(rng.gen_range(0.5..2.0), 0.0)))
            })
            .collect();
        let bundle = ParallelBundle {
            branches,
            vertex_in: VertexParams::free(k_lead),
            vertex_out: VertexParams::free(k_lead),
            reference: rng.gen_range(0..n),
        };
        let err = (|| {
            let out = parallel_compose(&bundle).ok()?;
            if out.route == ParallelRoute::OracleFallback {
                tally.fallbacks += 1;
            }
            let sol = solve_bruteforce(&bundle).ok()?;
            let m = out.matrix;
            let (t, r) = (m.det() / m.m22(), -m.m21() / m.m22());
            let scale = sol.t().norm().max(sol.r().norm());
            Some(rel_diff(t, sol.t(), scale).max(rel_diff(r, sol.r(), scale)))
        })();
        tally.record(err, 1e-9);
    }
    tally.finish()
}

/// Bloch-phase formula against repeated products, and the polynomial limit near `sin φ = 0`.
pub fn chebyshev_identity(seed: u64, cases: usize) -> SuiteOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new("chebyshev_identity");
    for _ in 0..cases {
        let m = random_passband(&mut rng);
        for n in [2usize, 3, 10, 50] {
            let err = serial_identical(&m, n).ok().and_then(|fast| {
                let direct = serial_compose(&vec![m; n]).ok()?;
                Some(fast.mat().max_abs_diff(direct.mat()) / direct.mat().norm().max(1.0))
            });
            tally.record(err, 1e-9);
        }
        // Near the band edge: Tr m / 2 = 1 + 1e-8.
        let m11 = cx(1.0 + 1e-8, 0.0) + random_complex(&mut rng) * 1e-3;
        let m22 = cx(2.0 + 2e-8, 0.0) - m11;
        let m12 = cx(0.5, 0.0) + random_complex(&mut rng) * 0.25;
        let edge = TransferMatrix::from_entries(m11, m12, (m11 * m22 - 1.0) / m12, m22);
        let err = edge.ok().and_then(|m| {
            let direct = serial_compose(&vec![m; 10]).ok()?;
            let limit = serial_identical_via(&m, 10, SerialPath::Chebyshev).ok()?;
            Some(limit.mat().max_abs_diff(direct.mat()) / direct.mat().norm().max(1.0))
        });
        tally.record(err, 1e-9);
    }
    tally.finish()
}

/// Closed form for identical parallel cells against the reduction pipeline
/// and the similarity transform; determinant and asymmetry invariants.
pub fn parallel_identical_suite(seed: u64, cases: usize) -> SuiteOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new("parallel_identical");
    for _ in 0..cases {
        let m = random_pt_cell(&mut rng);
        let n = rng.gen_range(2..=6);
        let Ok(closed) = parallel_identical(&m, n) else {
            tally.record(None, 1e-12);
            continue;
        };
        let scale = m.mat().norm().max(1.0);
        let k = cx(rng.gen_range(0.5..2.0), 0.0);
        let pipe = parallel_compose_pipeline(&ParallelBundle::uniform(&vec![m; n], k));
        tally.record(pipe.ok().map(|p| closed.mat().max_abs_diff(p.mat()) / scale), 1e-12);
        let t = identical_junction(n);
        let sim = t.inverse().map(|ti| t * *m.mat() * ti);
        tally.record(sim.map(|s| closed.mat().max_abs_diff(&s) / scale), 1e-12);
        tally.record(Some((closed.det() - 1.0).norm()), 1e-10);
        // Bundle parameters read as M12 = −i b_N, M21 = i c_N.
        let i = cx(0.0, 1.0);
        let p = pt_params(&m);
        let asym_n = i * closed.m12() + i * closed.m21();
        tally.record(Some((asym_n + (p.b - p.c)).norm()), 1e-12);
    }
    tally.finish()
}

/// S-matrix eigenvalues of PT cells: equal moduli in the unbroken phase,
/// product `−|a|²/a²`, coalescence at `b − c = ±2`.
pub fn pt_eigenvalues(seed: u64, cases: usize) -> SuiteOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new("pt_eigenvalues");
    for _ in 0..cases {
        // Unimodular: |a|² = 1 + b c.
        let (b, c, a) = loop {
            let c: f64 = rng.gen_range(-2.0..2.0);
            let b = c + rng.gen_range(-1.99..1.99);
            if 1.0 + b * c > 0.05 {
                break (b, c, Complex64::from_polar((1.0 + b * c).sqrt(), rng.gen_range(-3.0..3.0)));
            }
        };
        let e = s_eigenvalues(&PTParams::real_bc(a, b, c)).ok();
        tally.record(e.map(|e| (e.lambda_plus.norm() - e.lambda_minus.norm()).abs()), 1e-12);
        tally.record(e.map(|e| (e.lambda_plus * e.lambda_minus + a.norm_sqr() / (a * a)).norm()), 1e-12);
        let sign = if rng.gen_bool(0.5) { 2.0 } else { -2.0 };
        let err = s_eigenvalues(&PTParams::real_bc(a, c + sign, c))
            .ok()
            .map(|e| (e.lambda_plus - e.lambda_minus).norm());
        tally.record(err, 1e-10);
    }
    tally.finish()
}

/// Unit determinant of the grating cell, and one-sided invisibility at `n1 = n2`.
pub fn bragg_cell(seed: u64, cases: usize) -> SuiteOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new("bragg_cell");
    for _ in 0..cases {
        let k: f64 = rng.gen_range(5.0..15.0);
        let n1 = rng.gen_range(-0.05..0.05);
        let p = BraggParams {
            n0: rng.gen_range(1.0..3.0),
            n1,
            n2: rng.gen_range(-0.05..0.05),
            grating: k + rng.gen_range(-0.5..0.5),
            length: rng.gen_range(0.1..5.0),
        };
        tally.record(bragg_matrix(&p, k).ok().map(|m| (m.det() - 1.0).norm()), 1e-10);
        let inv = BraggParams { n2: n1, ..p };
        let err = bragg_matrix(&inv, k).ok().and_then(|m| {
            let s = transfer_to_scattering(&m).ok()?;
            Some(m.m21().norm().max((s.t.norm() - 1.0).abs()))
        });
        tally.record(err, 1e-10);
    }
    tally.finish()
}

/// `T + R = 1` for Hermitian bundles of free segments and real delta barriers,
/// through the reduction pipeline and through the dense solver.
pub fn flux_conservation(seed: u64, cases: usize) -> SuiteOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new("flux_conservation");
    for _ in 0..cases {
        let n = rng.gen_range(1..=4);
        let k_lead = cx(rng.gen_range(0.5..2.0), 0.0);
        let branches: Option<Vec<BranchSpec>> = (0..n)
            .map(|_| {
                let k = cx(rng.gen_range(0.5..2.0), 0.0);
                let g: f64 = rng.gen_range(-1.0..1.0);
                let barrier = TransferMatrix::from_entries(cx(1.0, -g), cx(0.0, -g), cx(0.0, g), cx(1.0, g)).ok()?;
                let s1 = free_segment_matrix(&FreeSegment::new(rng.gen_range(0.1..3.0), k)).ok()?;
                let s2 = free_segment_matrix(&FreeSegment::new(rng.gen_range(0.1..3.0), k)).ok()?;
                Some(BranchSpec::new(serial_compose(&[s1, barrier, s2]).ok()?, BranchChannel::uniform(k)))
            })
            .collect();
        let err = branches.and_then(|branches| {
            let bundle = ParallelBundle {
                branches,
                vertex_in: VertexParams::free(k_lead),
                vertex_out: VertexParams::free(k_lead),
                reference: 0,
            };
            let out = parallel_compose(&bundle).ok()?;
            if out.route == ParallelRoute::OracleFallback {
                tally.fallbacks += 1;
            }
            let s = transfer_to_scattering(&out.matrix).ok()?;
            let sol = solve_bruteforce(&bundle).ok()?;
            let pipe = (s.transmittance + s.reflectance_left - 1.0).abs();
            let dense = (sol.t().norm_sqr() + sol.r().norm_sqr() - 1.0).abs();
            Some(pipe.max(dense))
        });
        tally.record(err, 1e-10);
    }
    tally.finish()
}

/// All suites at their default sizes.
pub fn run_all(seed: u64) -> Vec<SuiteOutcome> {
    vec![
        oracle_equivalence(seed, 200),
        chebyshev_identity(seed.wrapping_add(1), 100),
        parallel_identical_suite(seed.wrapping_add(2), 100),
        pt_eigenvalues(seed.wrapping_add(3), 100),
        bragg_cell(seed.wrapping_add(4), 100),
        flux_conservation(seed.wrapping_add(5), 100),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass_for_several_seeds() {
        for seed in [0u64, 1, 2024] {
            for s in run_all(seed) {
                assert!(s.passed(), "{s:?}");
                assert!(s.checks > 0);
            }
        }
    }

    #[test]
    fn runs_are_reproducible() {
        assert_eq!(run_all(7), run_all(7));
    }
}
