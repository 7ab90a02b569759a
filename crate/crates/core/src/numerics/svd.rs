use super::Matrix;
use crate::{Error, Result};

/// Default relative cutoff on singular values for pseudoinverse solves.
pub const DEFAULT_PINV_TOL: f64 = 1e-10;

const MAX_SWEEPS: usize = 80;

/// Thin SVD `A = U diag(s) Vᵀ` with `r = min(m, n)` components, singular
/// values sorted in decreasing order.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

/// One-sided (Hestenes) Jacobi SVD.
///
/// For `m < n` the factorization is computed on `Aᵀ` and swapped back.
pub fn svd_thin(a: &Matrix) -> ThinSvd {
    if a.rows() >= a.cols() {
        jacobi_tall(a)
    } else {
        let t = jacobi_tall(&a.transpose());
        ThinSvd {
            u: t.v,
            s: t.s,
            v: t.u,
        }
    }
}

fn jacobi_tall(a: &Matrix) -> ThinSvd {
    let (m, n) = (a.rows(), a.cols());
    let mut w: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();
    let eps = f64::EPSILON;

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (alpha, beta, gamma) = w[p]
                    .iter()
                    .zip(&w[q])
                    .fold((0.0, 0.0, 0.0), |(a, b, g), (x, y)| {
                        (a + x * x, b + y * y, g + x * y)
                    });
                if alpha == 0.0 || beta == 0.0 || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut w, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<(usize, f64)> = w
        .iter()
        .enumerate()
        .map(|(j, col)| (j, col.iter().map(|x| x * x).sum::<f64>().sqrt()))
        .collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut u = Matrix::zeros(m, n);
    let mut vm = Matrix::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    for (k, &(j, sigma)) in order.iter().enumerate() {
        s.push(sigma);
        for i in 0..m {
            u.set(i, k, if sigma > 0.0 { w[j][i] / sigma } else { 0.0 });
        }
        for i in 0..n {
            vm.set(i, k, v[j][i]);
        }
    }
    ThinSvd { u, s, v: vm }
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = cols.split_at_mut(q);
    for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
        let (xp, yq) = (*x, *y);
        *x = c * xp - s * yq;
        *y = s * xp + c * yq;
    }
}

/// Minimum-norm least-squares solution `A⁺ y`.
///
/// Singular values below `tol * s_max` are treated as zero.
pub fn min_norm_least_squares(a: &Matrix, y: &[f64], tol: f64) -> Result<Vec<f64>> {
    if y.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side of length {} for a {}-row matrix",
            y.len(),
            a.rows()
        )));
    }
    let svd = svd_thin(a);
    let cutoff = tol * svd.s.first().copied().unwrap_or(0.0);
    let uty = svd.u.tr_matvec(y)?;
    let coeffs: Vec<f64> = uty
        .iter()
        .zip(&svd.s)
        .map(|(c, &sigma)| if sigma > cutoff && sigma > 0.0 { c / sigma } else { 0.0 })
        .collect();
    svd.v.matvec(&coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((*seed >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    }

    #[test]
    fn reconstructs_tall_and_wide() {
        let mut seed = 7;
        for &(m, n) in &[(6, 4), (4, 6), (5, 5), (1, 3)] {
            let a = Matrix::from_fn(m, n, |_, _| lcg(&mut seed));
            let svd = svd_thin(&a);
            let r = svd.s.len();
            let us = Matrix::from_fn(m, r, |i, k| svd.u.get(i, k) * svd.s[k]);
            let back = us.matmul(&svd.v.transpose()).unwrap();
            assert!(back.max_abs_diff(&a) < 1e-12, "{m}x{n}");
            assert!(svd.s.windows(2).all(|w| w[0] >= w[1]));
            let vtv = svd.v.transpose().matmul(&svd.v).unwrap();
            assert!(vtv.max_abs_diff(&Matrix::identity(r)) < 1e-12);
        }
    }

    #[test]
    fn identity_system() {
        let x = min_norm_least_squares(&Matrix::identity(2), &[3.0, 4.0], DEFAULT_PINV_TOL).unwrap();
        assert!((x[0] - 3.0).abs() < 1e-15 && (x[1] - 4.0).abs() < 1e-15);
    }

    #[test]
    fn single_row_minimal_norm() {
        // minimize a² + b² subject to a + b = 2 ⇒ a = b = 1.
        let a = Matrix::from_rows(&[&[1.0, 1.0]]);
        let x = min_norm_least_squares(&a, &[2.0], DEFAULT_PINV_TOL).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rank_deficient_tall_system() {
        // duplicate columns: min-norm splits the weight evenly.
        let a = Matrix::from_rows(&[&[1.0, 1.0], &[2.0, 2.0], &[0.0, 0.0]]);
        let x = min_norm_least_squares(&a, &[1.0, 2.0, 5.0], DEFAULT_PINV_TOL).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-12 && (x[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn length_mismatch() {
        assert!(min_norm_least_squares(&Matrix::identity(2), &[1.0], 1e-10).is_err());
    }
}
