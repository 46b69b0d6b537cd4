use crate::error::{Error, Result};

/// Modulation `n2` at which `N` identical Bragg cells in parallel have
/// `M21 = 0`:
///
/// ```text
/// n2 = ((N² + 1) / 2N) n1 − ((N² − 1) / N) (n0 δ / k)
/// ```
///
/// `N = 1` gives back `n2 = n1`; with `n1 = n2` it reduces to
/// `n2 = 2 n0 δ (N+1) / (k (N−1))`.
pub fn bragg_parallel_ep(n0: f64, n1: f64, delta: f64, k: f64, n: usize) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::InvalidParameter(format!("wavenumber k = {k} must be positive")));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("parallel count must be at least 1".into()));
    }
    let nf = n as f64;
    Ok((nf * nf + 1.0) / (2.0 * nf) * n1 - (nf * nf - 1.0) / nf * (n0 * delta / k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cells::{bragg_matrix, BraggParams};
    use crate::network::parallel_identical;

    #[test]
    fn single_cell_is_symmetric_modulation() {
        assert_eq!(bragg_parallel_ep(1.5, 0.013, 0.2, 10.0, 1).unwrap(), 0.013);
    }

    #[test]
    fn equal_modulation_fixed_point() {
        let (n0, delta, k) = (1.5, 0.02, 10.0);
        for n in [2usize, 3, 5] {
            let nf = n as f64;
            let n12 = 2.0 * n0 * delta * (nf + 1.0) / (k * (nf - 1.0));
            assert!((bragg_parallel_ep(n0, n12, delta, k, n).unwrap() - n12).abs() < 1e-15);
        }
    }

    #[test]
    fn closes_through_composer() {
        let (n0, n1, k) = (1.5, 0.01, 10.0);
        for n in [2usize, 3, 5] {
            for delta in [-0.05, 0.0, 0.03] {
                let n2 = bragg_parallel_ep(n0, n1, delta, k, n).unwrap();
                let p = BraggParams { n0, n1, n2, grating: k + delta, length: 2.0 };
                let big = parallel_identical(&bragg_matrix(&p, k).unwrap(), n).unwrap();
                assert!(big.m21().norm() < 1e-8, "N={n} δ={delta}: {}", big.m21().norm());
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(bragg_parallel_ep(1.0, 0.1, 0.0, 0.0, 2).is_err());
        assert!(bragg_parallel_ep(1.0, 0.1, 0.0, 1.0, 0).is_err());
    }
}
