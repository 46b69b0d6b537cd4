//! Bracketing and refinement of roots of a complex residual along a real axis.

use num_complex::Complex64;
use rayon::prelude::*;

/// A refined candidate root.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Refined {
    pub x: f64,
    pub bracket: (f64, f64),
    pub residual: f64,
}

const MAX_ITER: usize = 300;

/// Bisection on a sign change of `f` over `[a, b]`, down to adjacent floats.
pub(crate) fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> Option<f64> {
    let (mut fa, mut fb) = (f(a), f(b));
    if !(fa.is_finite() && fb.is_finite()) || fa * fb > 0.0 {
        return None;
    }
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    for _ in 0..MAX_ITER {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if !fm.is_finite() {
            return None;
        }
        if fm == 0.0 {
            return Some(m);
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
    }
    Some(if fa.abs() <= fb.abs() { a } else { b })
}

/// Golden-section minimisation of `f` over `[a, b]`; non-finite values count as `+∞`.
pub(crate) fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let g = |x: f64| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (g(c), g(d));
    let (mut best, mut fbest) = if fc <= fd { (c, fc) } else { (d, fd) };
    for (x, fx) in [(a, g(a)), (b, g(b))] {
        if fx < fbest {
            best = x;
            fbest = fx;
        }
    }
    for _ in 0..MAX_ITER {
        if b - a <= 4.0 * f64::EPSILON * a.abs().max(b.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = g(c);
            if fc < fbest {
                best = c;
                fbest = fc;
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = g(d);
            if fd < fbest {
                best = d;
                fbest = fd;
            }
        }
    }
    best
}

/// Secant steps on the complex residual along the real axis; each step is
/// kept only if it lowers `|g|` and stays inside `[lo, hi]`.
pub(crate) fn secant_polish<G>(g: &G, x: f64, lo: f64, hi: f64) -> f64
where
    G: Fn(f64) -> Option<Complex64>,
{
    let Some(mut gx) = g(x) else { return x };
    let mut x = x;
    let h = 1e-7 * (hi - lo).max(f64::MIN_POSITIVE);
    let mut prev = if x + h <= hi { x + h } else { x - h };
    let Some(mut gprev) = g(prev) else { return x };
    for _ in 0..12 {
        if gx.norm() == 0.0 {
            break;
        }
        let slope = (gx - gprev) / (x - prev);
        if slope.norm() == 0.0 || !slope.re.is_finite() {
            break;
        }
        let step = (gx / slope).re;
        let next = x - step;
        if !(next >= lo && next <= hi) || next == x {
            break;
        }
        match g(next) {
            Some(gn) if gn.norm() < gx.norm() => {
                prev = x;
                gprev = gx;
                x = next;
                gx = gn;
            }
            _ => break,
        }
    }
    x
}

/// Scans `g` on `xs` and refines every sign change of `Re g` (bisection)
/// and every local minimum of `|g|` (golden section plus secant polish).
/// Candidates closer than half a grid step are merged, keeping the smaller
/// residual. Output is sorted by `x`.
pub(crate) fn refine_roots<G>(g: &G, xs: &[f64], vals: &[Option<Complex64>]) -> Vec<Refined>
where
    G: Fn(f64) -> Option<Complex64> + Sync,
{
    let n = xs.len();
    let mut brackets: Vec<(usize, usize, bool)> = Vec::new();
    for i in 0..n {
        match (vals[i], vals.get(i + 1).copied().flatten()) {
            (Some(a), _) if a.norm() == 0.0 => brackets.push((i, i, true)),
            (Some(a), Some(b)) if a.re * b.re < 0.0 => brackets.push((i, i + 1, true)),
            _ => {}
        }
    }
    let modulus: Vec<f64> = vals.iter().map(|v| v.map_or(f64::INFINITY, |v| v.norm())).collect();
    for i in 0..n {
        let left = if i > 0 { modulus[i - 1] } else { f64::INFINITY };
        let right = if i + 1 < n { modulus[i + 1] } else { f64::INFINITY };
        if modulus[i].is_finite() && modulus[i] < left && modulus[i] <= right {
            brackets.push((i.saturating_sub(1), (i + 1).min(n - 1), false));
        }
    }
    let residual = |x: f64| g(x).map_or(f64::INFINITY, |v| v.norm());
    let mut found: Vec<Refined> = brackets
        .par_iter()
        .filter_map(|&(i, j, by_sign)| {
            let (a, b) = (xs[i], xs[j]);
            let x = if by_sign {
                bisect(|x| g(x).map_or(f64::NAN, |v| v.re), a, b)?
            } else {
                let x = golden_min(residual, a, b);
                secant_polish(g, x, a, b)
            };
            Some(Refined { x, bracket: (a, b), residual: residual(x) })
        })
        .collect();
    found.sort_by(|p, q| p.x.total_cmp(&q.x));
    let merge = if n > 1 { 0.5 * (xs[n - 1] - xs[0]) / (n - 1) as f64 } else { 0.0 };
    let mut out: Vec<Refined> = Vec::with_capacity(found.len());
    for r in found {
        match out.last_mut() {
            Some(last) if r.x - last.x <= merge => {
                if r.residual < last.residual {
                    *last = r;
                }
            }
            _ => out.push(r),
        }
    }
    out
}

/// Evaluates `g` on `xs` in parallel, preserving order.
pub(crate) fn scan<G>(g: &G, xs: &[f64]) -> Vec<Option<Complex64>>
where
    G: Fn(f64) -> Option<Complex64> + Sync,
{
    xs.par_iter().map(|&x| g(x).filter(|v| v.re.is_finite() && v.im.is_finite())).collect()
}
