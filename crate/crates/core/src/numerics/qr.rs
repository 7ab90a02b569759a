use super::Matrix;
use crate::{Error, Result};

/// Relative threshold on `|R_jj|` below which a column is treated as dependent.
const RANK_TOL: f64 = 1e-12;

/// Thin QR factors: `Q` is `m x n` with orthonormal columns, `R` is `n x n`
/// upper triangular with a strictly positive diagonal.
#[derive(Debug, Clone)]
pub struct ThinQr {
    pub q: Matrix,
    pub r: Matrix,
}

impl ThinQr {
    /// Solves `R x = b` by back substitution.
    pub fn solve_r(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.r.cols();
        if b.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side of length {} for {n}x{n} triangular system",
                b.len()
            )));
        }
        let mut x = b.to_vec();
        for i in (0..n).rev() {
            let mut acc = x[i];
            for k in i + 1..n {
                acc -= self.r.get(i, k) * x[k];
            }
            x[i] = acc / self.r.get(i, i);
        }
        Ok(x)
    }

    /// Solves `xᵀ R = bᵀ`, i.e. `Rᵀ x = b`, by forward substitution.
    pub fn solve_rt(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.r.cols();
        if b.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side of length {} for {n}x{n} triangular system",
                b.len()
            )));
        }
        let mut x = b.to_vec();
        for i in 0..n {
            let mut acc = x[i];
            for k in 0..i {
                acc -= self.r.get(k, i) * x[k];
            }
            x[i] = acc / self.r.get(i, i);
        }
        Ok(x)
    }
}

/// Householder thin QR with the sign of each `R_jj` forced positive.
///
/// Fails with [`Error::RankDeficient`] when the smallest `|R_jj|` is not
/// above `1e-12` times the largest.
pub fn qr_thin(a: &Matrix) -> Result<ThinQr> {
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        return Err(Error::DimensionMismatch(format!(
            "thin QR needs rows >= cols, got {m}x{n}"
        )));
    }

    // Column-major working copy; reflectors are stored in place below the diagonal.
    let mut w: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let mut betas = vec![0.0; n];
    let mut r = Matrix::zeros(n, n);

    for k in 0..n {
        let norm = w[k][k..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            betas[k] = 0.0;
            r.set(k, k, 0.0);
            continue;
        }
        let alpha = if w[k][k] >= 0.0 { -norm } else { norm };
        let v0 = w[k][k] - alpha;
        w[k][k] = v0;
        let vnorm2: f64 = w[k][k..].iter().map(|v| v * v).sum();
        let beta = if vnorm2 == 0.0 { 0.0 } else { 2.0 / vnorm2 };
        betas[k] = beta;
        let (head, tail) = w.split_at_mut(k + 1);
        let v = &head[k][k..];
        for col in tail.iter_mut() {
            let s: f64 = v.iter().zip(&col[k..]).map(|(a, b)| a * b).sum::<f64>() * beta;
            for (c, vi) in col[k..].iter_mut().zip(v) {
                *c -= s * vi;
            }
        }
        r.set(k, k, alpha);
        for j in k + 1..n {
            r.set(k, j, w[j][k]);
        }
    }

    // Q = H_0 H_1 ... H_{n-1} applied to the first n columns of the identity.
    let mut q_cols: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; m];
            e[j] = 1.0;
            e
        })
        .collect();
    for k in (0..n).rev() {
        let beta = betas[k];
        if beta == 0.0 {
            continue;
        }
        let v = &w[k][k..];
        for col in q_cols.iter_mut() {
            let s: f64 = v.iter().zip(&col[k..]).map(|(a, b)| a * b).sum::<f64>() * beta;
            for (c, vi) in col[k..].iter_mut().zip(v) {
                *c -= s * vi;
            }
        }
    }

    let mut q = Matrix::from_fn(m, n, |i, j| q_cols[j][i]);
    for k in 0..n {
        if r.get(k, k) < 0.0 {
            for j in k..n {
                r.set(k, j, -r.get(k, j));
            }
            for i in 0..m {
                q.set(i, k, -q.get(i, k));
            }
        }
    }

    let diag: Vec<f64> = (0..n).map(|k| r.get(k, k).abs()).collect();
    let largest = diag.iter().cloned().fold(0.0, f64::max);
    let (smallest_at, smallest) = diag
        .iter()
        .cloned()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    if largest == 0.0 || smallest <= RANK_TOL * largest {
        return Err(Error::RankDeficient(format!(
            "R[{smallest_at}][{smallest_at}] = {smallest:e} vs largest diagonal {largest:e}"
        )));
    }
    Ok(ThinQr { q, r })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_factorization(a: &Matrix, qr: &ThinQr) {
        let qtq = qr.q.transpose().matmul(&qr.q).unwrap();
        assert!(qtq.max_abs_diff(&Matrix::identity(a.cols())) < 1e-10);
        let back = qr.q.matmul(&qr.r).unwrap();
        assert!(back.sub(a).unwrap().frobenius_norm() < 1e-10 * a.frobenius_norm());
        for i in 0..a.cols() {
            assert!(qr.r.get(i, i) > 0.0);
            for j in 0..i {
                assert_eq!(qr.r.get(i, j), 0.0);
            }
        }
    }

    #[test]
    fn identity_factors_to_identity() {
        let a = Matrix::identity(3);
        let qr = qr_thin(&a).unwrap();
        assert!(qr.q.max_abs_diff(&a) < 1e-15);
        assert!(qr.r.max_abs_diff(&a) < 1e-15);
    }

    #[test]
    fn two_by_two_hand_gram_schmidt() {
        // columns (3,4) and (0,5): q1 = (0.6, 0.8), r11 = 5, r12 = 4,
        // residual (-2.4, 1.8) has norm 3.
        let a = Matrix::from_rows(&[&[3.0, 0.0], &[4.0, 5.0]]);
        let qr = qr_thin(&a).unwrap();
        check_factorization(&a, &qr);
        assert!((qr.r.get(0, 0) - 5.0).abs() < 1e-14);
        assert!((qr.r.get(0, 1) - 4.0).abs() < 1e-14);
        assert!((qr.r.get(1, 1) - 3.0).abs() < 1e-14);
        assert!((qr.q.get(0, 0) - 0.6).abs() < 1e-15);
        assert!((qr.q.get(1, 1) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn vandermonde_degree_one() {
        let a = Matrix::from_rows(&[&[1.0, -1.0], &[1.0, 0.0], &[1.0, 1.0]]);
        let qr = qr_thin(&a).unwrap();
        let qtq = qr.q.transpose().matmul(&qr.q).unwrap();
        assert!(qtq.max_abs_diff(&Matrix::identity(2)) < 1e-12);
        check_factorization(&a, &qr);
    }

    #[test]
    fn rank_deficient_columns_are_rejected() {
        let a = Matrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0], &[3.0, 6.0]]);
        assert!(matches!(qr_thin(&a), Err(Error::RankDeficient(_))));
    }

    #[test]
    fn triangular_solves_invert_r() {
        let a = Matrix::from_rows(&[&[2.0, 1.0], &[0.0, 3.0], &[1.0, 1.0]]);
        let qr = qr_thin(&a).unwrap();
        let b = [1.0, -2.0];
        let x = qr.solve_r(&b).unwrap();
        let rx = qr.r.matvec(&x).unwrap();
        assert!((rx[0] - b[0]).abs() < 1e-14 && (rx[1] - b[1]).abs() < 1e-14);
        let z = qr.solve_rt(&b).unwrap();
        let rtz = qr.r.tr_matvec(&z).unwrap();
        assert!((rtz[0] - b[0]).abs() < 1e-14 && (rtz[1] - b[1]).abs() < 1e-14);
    }
}
