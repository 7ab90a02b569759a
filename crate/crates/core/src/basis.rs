//! Polynomial and random-feature design matrices.
//!
//! Column `j` of a Legendre design is `√((2j+1)/2) · P_j(t)` where `t` is the
//! input mapped affinely from the domain `[a, b]` onto `[-1, 1]`; these are
//! orthonormal in `L²[-1, 1]`. A data-orthonormal design is the `Q` factor of
//! the Legendre design, so its columns span the same polynomials while being
//! orthonormal over the observed inputs (`QᵀQ = I`).

use serde::{Deserialize, Serialize};

use crate::numerics::{qr_thin, Matrix, ThinQr};
use crate::rng;
use crate::{Error, Result};

/// Closed interval `[low, high]` with `low < high`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub low: f64,
    pub high: f64,
}

impl Interval {
    pub fn new(low: f64, high: f64) -> Result<Self> {
        if !(low < high) || !low.is_finite() || !high.is_finite() {
            return Err(Error::Domain(format!("interval needs finite low < high, got [{low}, {high}]")));
        }
        Ok(Self { low, high })
    }

    pub fn symmetric_unit() -> Self {
        Self { low: -1.0, high: 1.0 }
    }

    pub fn width(&self) -> f64 {
        self.high - self.low
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.low && x <= self.high
    }

    /// Affine map onto `[-1, 1]`.
    #[inline]
    pub fn to_unit(&self, x: f64) -> f64 {
        (2.0 * x - (self.low + self.high)) / (self.high - self.low)
    }

    /// `n` equispaced points including both endpoints (the midpoint when `n == 1`).
    pub fn linspace(&self, n: usize) -> Vec<f64> {
        match n {
            0 => Vec::new(),
            1 => vec![0.5 * (self.low + self.high)],
            _ => {
                let step = self.width() / (n - 1) as f64;
                (0..n)
                    .map(|i| if i == n - 1 { self.high } else { self.low + step * i as f64 })
                    .collect()
            }
        }
    }

    fn hull(points: &[f64]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("no points given".into()));
        }
        let lo = points.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = points.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if lo < hi {
            Interval::new(lo, hi)
        } else {
            Interval::new(lo - 1.0, hi + 1.0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    Legendre,
    DataOrthonormal,
    RandomRelu,
    RandomFourier,
}

impl BasisKind {
    pub fn is_random(self) -> bool {
        matches!(self, BasisKind::RandomRelu | BasisKind::RandomFourier)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasisSpec {
    pub kind: BasisKind,
    /// Polynomial degree for polynomial kinds, feature count for random kinds.
    pub degree_or_width: usize,
    pub domain: Interval,
    pub seed: Option<u64>,
}

impl BasisSpec {
    pub fn new(kind: BasisKind, degree_or_width: usize, domain: Interval, seed: Option<u64>) -> Result<Self> {
        if kind.is_random() && seed.is_none() {
            return Err(Error::InvalidArgument(format!("{kind:?} basis requires a seed")));
        }
        if kind.is_random() && degree_or_width == 0 {
            return Err(Error::InvalidArgument("random feature width must be at least 1".into()));
        }
        Ok(Self {
            kind,
            degree_or_width,
            domain,
            seed: if kind.is_random() { seed } else { None },
        })
    }

    /// Number of design columns.
    pub fn columns(&self) -> usize {
        if self.kind.is_random() {
            self.degree_or_width
        } else {
            self.degree_or_width + 1
        }
    }
}

/// Random ReLU or Fourier features `x ↦ g(w_j x + b_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomFeatures {
    kind: BasisKind,
    weights: Vec<f64>,
    biases: Vec<f64>,
}

impl RandomFeatures {
    /// Draws `width` features from the seeded stream.
    ///
    /// ReLU: `w_j, b_j ~ N(0, 1)`. Fourier: `w_j ~ N(0, 1)`, `b_j ~ U[0, 2π)`.
    /// The weights are multiplied by `frequency_scale` (1 gives the unscaled family).
    pub fn draw(kind: BasisKind, width: usize, seed: u64, frequency_scale: f64) -> Result<Self> {
        if width == 0 {
            return Err(Error::InvalidArgument("random feature width must be at least 1".into()));
        }
        if !(frequency_scale > 0.0) || !frequency_scale.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "frequency scale must be positive, got {frequency_scale}"
            )));
        }
        let mut stream = rng::stream(seed);
        let mut weights = Vec::with_capacity(width);
        let mut biases = Vec::with_capacity(width);
        for _ in 0..width {
            let w = rng::standard_normal(&mut stream) * frequency_scale;
            let b = match kind {
                BasisKind::RandomRelu => rng::standard_normal(&mut stream),
                BasisKind::RandomFourier => rng::uniform(&mut stream, 0.0, 2.0 * std::f64::consts::PI),
                _ => {
                    return Err(Error::InvalidArgument(format!("{kind:?} is not a random feature kind")))
                }
            };
            weights.push(w);
            biases.push(b);
        }
        Ok(Self { kind, weights, biases })
    }

    /// Features with explicitly chosen parameters.
    pub fn from_parameters(kind: BasisKind, weights: Vec<f64>, biases: Vec<f64>) -> Result<Self> {
        if !kind.is_random() {
            return Err(Error::InvalidArgument(format!("{kind:?} is not a random feature kind")));
        }
        if weights.is_empty() || weights.len() != biases.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} weights and {} biases",
                weights.len(),
                biases.len()
            )));
        }
        Ok(Self { kind, weights, biases })
    }

    pub fn width(&self) -> usize {
        self.weights.len()
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    fn eval_row(&self, x: f64, out: &mut [f64]) {
        let width = self.width() as f64;
        match self.kind {
            BasisKind::RandomRelu => {
                let norm = width.sqrt();
                for ((o, w), b) in out.iter_mut().zip(&self.weights).zip(&self.biases) {
                    *o = (w * x + b).max(0.0) / norm;
                }
            }
            _ => {
                let norm = (2.0 / width).sqrt();
                for ((o, w), b) in out.iter_mut().zip(&self.weights).zip(&self.biases) {
                    *o = norm * (w * x + b).cos();
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
enum FeatureMap {
    Legendre { degree: usize, domain: Interval },
    DataOrthonormal { degree: usize, domain: Interval, qr: ThinQr },
    Random(RandomFeatures),
}

impl FeatureMap {
    fn columns(&self) -> usize {
        match self {
            FeatureMap::Legendre { degree, .. } | FeatureMap::DataOrthonormal { degree, .. } => degree + 1,
            FeatureMap::Random(f) => f.width(),
        }
    }

    fn evaluate(&self, points: &[f64]) -> Result<Matrix> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("no points to evaluate".into()));
        }
        match self {
            FeatureMap::Legendre { degree, domain } => legendre_matrix(points, *degree, domain),
            FeatureMap::DataOrthonormal { degree, domain, qr } => {
                let raw = legendre_matrix(points, *degree, domain)?;
                let k = degree + 1;
                let mut data = Vec::with_capacity(points.len() * k);
                for i in 0..points.len() {
                    data.extend(qr.solve_rt(raw.row(i))?);
                }
                Matrix::new(points.len(), k, data)
            }
            FeatureMap::Random(f) => {
                let k = f.width();
                let mut data = vec![0.0; points.len() * k];
                for (row, &x) in data.chunks_mut(k).zip(points) {
                    f.eval_row(x, row);
                }
                Matrix::new(points.len(), k, data)
            }
        }
    }
}

/// A basis evaluated at a set of inputs; can be re-evaluated at new inputs.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    spec: BasisSpec,
    points: Vec<f64>,
    matrix: Matrix,
    map: FeatureMap,
}

impl DesignMatrix {
    pub fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }

    /// Evaluates the same feature map at other inputs. Polynomial kinds
    /// reject inputs outside their domain.
    pub fn evaluate(&self, points: &[f64]) -> Result<Matrix> {
        debug_assert_eq!(self.map.columns(), self.matrix.cols());
        self.map.evaluate(points)
    }

    /// Design whose matrix is the given one, for callers that already hold a
    /// feature matrix (tests, externally supplied designs). Evaluation at new
    /// points reuses the Legendre map of `spec`.
    pub fn from_matrix(spec: BasisSpec, points: Vec<f64>, matrix: Matrix) -> Result<Self> {
        if matrix.rows() != points.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} points for a {}-row matrix",
                points.len(),
                matrix.rows()
            )));
        }
        let map = FeatureMap::Legendre {
            degree: matrix.cols() - 1,
            domain: spec.domain,
        };
        Ok(Self { spec, points, matrix, map })
    }
}

fn legendre_matrix(points: &[f64], degree: usize, domain: &Interval) -> Result<Matrix> {
    let k = degree + 1;
    let norms: Vec<f64> = (0..k).map(|j| ((2 * j + 1) as f64 / 2.0).sqrt()).collect();
    let mut data = Vec::with_capacity(points.len() * k);
    for &x in points {
        if !domain.contains(x) {
            return Err(Error::Domain(format!(
                "point {x} outside domain [{}, {}]",
                domain.low, domain.high
            )));
        }
        let t = domain.to_unit(x);
        let (mut prev, mut cur) = (0.0, 1.0);
        for (j, norm) in norms.iter().enumerate() {
            data.push(norm * cur);
            let jf = j as f64;
            let next = ((2.0 * jf + 1.0) * t * cur - jf * prev) / (jf + 1.0);
            prev = cur;
            cur = next;
        }
    }
    Matrix::new(points.len(), k, data)
}

/// Normalized Legendre design on `domain`.
pub fn legendre_design(points: &[f64], degree: usize, domain: Interval) -> Result<DesignMatrix> {
    let matrix = legendre_matrix(points, degree, &domain)?;
    Ok(DesignMatrix {
        spec: BasisSpec::new(BasisKind::Legendre, degree, domain, None)?,
        points: points.to_vec(),
        matrix,
        map: FeatureMap::Legendre { degree, domain },
    })
}

/// Data-orthonormal polynomial design over the hull of `points`.
pub fn data_orthonormal_design(points: &[f64], degree: usize) -> Result<DesignMatrix> {
    data_orthonormal_design_on(points, degree, Interval::hull(points)?)
}

/// Data-orthonormal polynomial design whose Legendre parameterization lives on `domain`.
pub fn data_orthonormal_design_on(points: &[f64], degree: usize, domain: Interval) -> Result<DesignMatrix> {
    let mut distinct = points.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < degree + 1 {
        return Err(Error::RankDeficient(format!(
            "{} distinct points cannot support degree {degree}",
            distinct.len()
        )));
    }
    let raw = legendre_matrix(points, degree, &domain)?;
    let qr = qr_thin(&raw)?;
    Ok(DesignMatrix {
        spec: BasisSpec::new(BasisKind::DataOrthonormal, degree, domain, None)?,
        points: points.to_vec(),
        matrix: qr.q.clone(),
        map: FeatureMap::DataOrthonormal { degree, domain, qr },
    })
}

/// Random-feature design with unit frequency scale.
pub fn random_feature_design(points: &[f64], width: usize, kind: BasisKind, seed: u64) -> Result<DesignMatrix> {
    let features = RandomFeatures::draw(kind, width, seed, 1.0)?;
    random_feature_design_with(points, features, Interval::hull(points)?, Some(seed))
}

/// Design from already-drawn (or hand-specified) random features.
pub fn random_feature_design_with(
    points: &[f64],
    features: RandomFeatures,
    domain: Interval,
    seed: Option<u64>,
) -> Result<DesignMatrix> {
    let map = FeatureMap::Random(features);
    let matrix = map.evaluate(points)?;
    let (kind, width) = match &map {
        FeatureMap::Random(f) => (f.kind(), f.width()),
        _ => unreachable!(),
    };
    Ok(DesignMatrix {
        spec: BasisSpec::new(kind, width, domain, Some(seed.unwrap_or(0)))?,
        points: points.to_vec(),
        matrix,
        map,
    })
}
