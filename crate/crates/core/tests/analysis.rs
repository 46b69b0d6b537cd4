//! Sweeps and finders through the public API on families whose answers are
//! known in closed form.

use std::f64::consts::PI;

use num_complex::Complex64;
use scatternet::analysis::{
    detect_atr, find_exceptional_points, find_spectral_singularities, sweep, with_threads, EpMode,
    ReflectionlessSide, ScanOptions, SingularityKind, SweepGrid,
};
use scatternet::cells::{bragg_matrix, pt_cell, BraggParams};
use scatternet::{NetworkNode, PTParams, TransferMatrix};

fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// PT cell with real `b = w`, `c = 0.3` and `|a|² = 1 + b c`.
fn pt_family(w: f64) -> scatternet::Result<TransferMatrix> {
    let c = 0.3;
    let a = Complex64::from_polar((1.0 + w * c).abs().sqrt(), 0.4);
    pt_cell(&PTParams::real_bc(a, w, c))
}

#[test]
fn single_cell_exceptional_points_sit_at_asymmetry_two() {
    let scan = find_exceptional_points(&pt_family, (-2.0, 3.0), EpMode::Single, &ScanOptions::default()).unwrap();
    let mut found: Vec<f64> = scan.reports.iter().map(|r| r.omega).collect();
    found.sort_by(f64::total_cmp);
    // b − c = ±2 at w = 0.3 ± 2.
    assert_eq!(found.len(), 2, "{found:?}");
    assert!((found[0] - (0.3 - 2.0)).abs() < 1e-9);
    assert!((found[1] - (0.3 + 2.0)).abs() < 1e-9);
    for r in &scan.reports {
        assert!(r.condition_residual < 1e-9);
    }
}

#[test]
fn lasing_threshold_of_a_gain_loss_scaling() {
    // m22 = 1 − w/2 along a unimodular family; zero at w = 2.
    let fam = |w: f64| {
        let (m11, m12, m22) = (cx(1.0, 0.0), cx(0.0, 1.0), cx(1.0 - 0.5 * w, 0.0));
        TransferMatrix::from_entries(m11, m12, (m11 * m22 - 1.0) / m12, m22)
    };
    let scan =
        find_spectral_singularities(&fam, (0.0, 5.0), SingularityKind::Lasing, &ScanOptions::default()).unwrap();
    assert_eq!(scan.reports.len(), 1);
    assert!((scan.reports[0].omega_c - 2.0).abs() < 1e-9);
}

#[test]
fn bragg_sweep_is_left_reflectionless_at_equal_modulation() {
    let p = BraggParams { n0: 1.5, n1: 0.02, n2: 0.02, grating: 10.0, length: 3.0 };
    let fam = move |k: f64| bragg_matrix(&p, k).map(NetworkNode::Leaf);
    let recs = sweep(&fam, &SweepGrid::new(9.5, 10.5, 41).unwrap()).unwrap();
    let scan = detect_atr(&recs, 1e-6);
    assert_eq!(scan.resonances.len(), 41);
    assert!(scan.resonances.iter().all(|a| a.direction == ReflectionlessSide::Left));
}

#[test]
fn sweep_order_does_not_depend_on_thread_count() {
    let fam = |w: f64| pt_family(w).map(NetworkNode::Leaf);
    let grid = SweepGrid::new(-PI, PI, 301).unwrap();
    let one = with_threads(1, || sweep(&fam, &grid)).unwrap().unwrap();
    let four = with_threads(4, || sweep(&fam, &grid)).unwrap().unwrap();
    assert_eq!(one.len(), 301);
    for (a, b) in one.iter().zip(&four) {
        assert_eq!(a.omega.to_bits(), b.omega.to_bits());
        assert_eq!(a.t.re.to_bits(), b.t.re.to_bits());
        assert_eq!(a.eig_ratio.to_bits(), b.eig_ratio.to_bits());
    }
}
