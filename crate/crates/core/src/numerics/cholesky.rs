use super::Matrix;
use crate::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;

/// Lower-triangular Cholesky factor `L` of an SPD matrix `S = L Lᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdFactor {
    lower: Matrix,
}

impl SpdFactor {
    pub fn dim(&self) -> usize {
        self.lower.rows()
    }

    pub fn lower(&self) -> &Matrix {
        &self.lower
    }

    /// `L Lᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        self.lower
            .matmul(&self.lower.transpose())
            .expect("square factor")
    }

    /// Solves `L x = b`.
    pub fn forward(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.check_len(b.len())?;
        let n = self.dim();
        let mut x = b.to_vec();
        for i in 0..n {
            let row = self.lower.row(i);
            let acc = x[i] - row[..i].iter().zip(&x[..i]).map(|(l, v)| l * v).sum::<f64>();
            x[i] = acc / row[i];
        }
        Ok(x)
    }

    /// Solves `Lᵀ x = b`.
    pub fn backward(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.check_len(b.len())?;
        let n = self.dim();
        let mut x = b.to_vec();
        for i in (0..n).rev() {
            let mut acc = x[i];
            for k in i + 1..n {
                acc -= self.lower.get(k, i) * x[k];
            }
            x[i] = acc / self.lower.get(i, i);
        }
        Ok(x)
    }

    /// `xᵀ S⁻¹ x`, computed as `‖L⁻¹x‖²`.
    pub fn inv_quad_form(&self, x: &[f64]) -> Result<f64> {
        let z = self.forward(x)?;
        Ok(z.iter().map(|v| v * v).sum())
    }

    /// Explicit `S⁻¹`, symmetrized.
    pub fn inverse(&self) -> Matrix {
        let n = self.dim();
        let mut inv = Matrix::zeros(n, n);
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let col = solve_spd(self, &e).expect("matching dimension");
            for (i, v) in col.into_iter().enumerate() {
                inv.set(i, j, v);
            }
        }
        Matrix::from_fn(n, n, |i, j| 0.5 * (inv.get(i, j) + inv.get(j, i)))
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {len} against factor of dimension {}",
                self.dim()
            )));
        }
        Ok(())
    }
}

/// Cholesky factorization of a symmetric positive definite matrix.
///
/// Symmetry is checked to `1e-12` relative to the largest entry (absolute for
/// entries below one). A non-positive pivot reports its index.
pub fn cholesky(s: &Matrix) -> Result<SpdFactor> {
    if !s.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "cholesky needs a square matrix, got {}x{}",
            s.rows(),
            s.cols()
        )));
    }
    let n = s.rows();
    let tol = SYMMETRY_TOL * s.max_abs().max(1.0);
    for i in 0..n {
        for j in 0..i {
            let diff = (s.get(i, j) - s.get(j, i)).abs();
            if diff > tol {
                return Err(Error::NotSymmetric { row: i, col: j, diff });
            }
        }
    }

    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let lj = l.row(j)[..j].to_vec();
        let pivot = s.get(j, j) - lj.iter().map(|v| v * v).sum::<f64>();
        if !(pivot > 0.0) || !pivot.is_finite() {
            return Err(Error::NotPositiveDefinite { pivot: j, value: pivot });
        }
        let d = pivot.sqrt();
        l.set(j, j, d);
        for i in j + 1..n {
            let li = &l.row(i)[..j];
            let v = (s.get(i, j) - li.iter().zip(&lj).map(|(a, b)| a * b).sum::<f64>()) / d;
            l.set(i, j, v);
        }
    }
    Ok(SpdFactor { lower: l })
}

/// Solves `S x = b` given `S = L Lᵀ`.
pub fn solve_spd(factor: &SpdFactor, b: &[f64]) -> Result<Vec<f64>> {
    let z = factor.forward(b)?;
    factor.backward(&z)
}

/// `log det S = 2 Σ log L_ii`.
pub fn logdet_spd(factor: &SpdFactor) -> f64 {
    2.0 * (0..factor.dim())
        .map(|i| factor.lower.get(i, i).ln())
        .sum::<f64>()
}
