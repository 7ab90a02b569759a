//! Evidence of hypotheses with a finite, uniformly weighted parameter grid:
//! the fraction of grid points whose generated sequence reproduces the data.

use num_rational::Ratio;

/// Exact rationals used for generated and observed sequences.
pub type Rational = Ratio<i128>;

/// A hypothesis indexed by a finite parameter grid.
pub trait DiscreteHypothesis: Sync {
    fn name(&self) -> &str;

    fn grid_size(&self) -> u64;

    /// Sequence `y_1, …, y_len` produced by grid point `index`.
    fn generate(&self, index: u64, len: usize) -> Vec<Rational>;

    /// Number of grid points generating `data` exactly. The default walks the
    /// whole grid; implementations may override it with a closed form.
    fn count_matches(&self, data: &[Rational]) -> u64 {
        (0..self.grid_size())
            .filter(|&i| self.generate(i, data.len()) == data)
            .count() as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiscreteEvidence {
    pub count: u64,
    pub grid_size: u64,
}

impl DiscreteEvidence {
    pub fn value(&self) -> f64 {
        self.count as f64 / self.grid_size as f64
    }

    pub fn log_value(&self) -> f64 {
        (self.count as f64).ln() - (self.grid_size as f64).ln()
    }
}

pub fn discrete_evidence(h: &dyn DiscreteHypothesis, data: &[Rational]) -> DiscreteEvidence {
    DiscreteEvidence {
        count: h.count_matches(data),
        grid_size: h.grid_size(),
    }
}

/// `y_x = n0 + (x − 1)·n` for integers `n0, n` in `[-bound, bound]`.
#[derive(Debug, Clone)]
pub struct ArithmeticHypothesis {
    name: String,
    bound: i64,
}

impl ArithmeticHypothesis {
    pub fn new(bound: i64) -> Self {
        Self {
            name: "arithmetic".into(),
            bound: bound.abs(),
        }
    }

    fn side(&self) -> u64 {
        2 * self.bound as u64 + 1
    }

    fn in_range(&self, r: &Rational) -> bool {
        r.is_integer() && r.to_integer().abs() <= self.bound as i128
    }
}

impl Default for ArithmeticHypothesis {
    fn default() -> Self {
        Self::new(50)
    }
}

impl DiscreteHypothesis for ArithmeticHypothesis {
    fn name(&self) -> &str {
        &self.name
    }

    fn grid_size(&self) -> u64 {
        self.side() * self.side()
    }

    fn generate(&self, index: u64, len: usize) -> Vec<Rational> {
        let n0 = (index / self.side()) as i128 - self.bound as i128;
        let n = (index % self.side()) as i128 - self.bound as i128;
        (0..len as i128).map(|x| Rational::from_integer(n0 + x * n)).collect()
    }

    fn count_matches(&self, data: &[Rational]) -> u64 {
        match data {
            [] => self.grid_size(),
            [first] => {
                if self.in_range(first) {
                    self.side()
                } else {
                    0
                }
            }
            [first, second, ..] => {
                let step = second - first;
                let fits = self.in_range(first)
                    && self.in_range(&step)
                    && data.iter().enumerate().all(|(x, y)| *y == first + step * Rational::from_integer(x as i128));
                u64::from(fits)
            }
        }
    }
}

/// `y_x = c x³ + d x² + e x + f` at `x = 1, 2, …`, each coefficient a reduced
/// fraction `p/q` with `|p| ≤ max_numerator` and `1 ≤ q ≤ max_denominator`,
/// every distinct value counted once.
#[derive(Debug, Clone)]
pub struct CubicHypothesis {
    name: String,
    values: Vec<Rational>,
}

impl CubicHypothesis {
    pub fn new(max_numerator: i64, max_denominator: i64) -> Self {
        let mut values: Vec<Rational> = (1..=max_denominator.max(1) as i128)
            .flat_map(|q| (-(max_numerator.abs() as i128)..=max_numerator.abs() as i128).map(move |p| Rational::new(p, q)))
            .collect();
        values.sort();
        values.dedup();
        Self {
            name: "cubic".into(),
            values,
        }
    }

    /// Distinct admissible coefficient values, ascending.
    pub fn coefficient_values(&self) -> &[Rational] {
        &self.values
    }

    fn contains(&self, r: &Rational) -> bool {
        self.values.binary_search(r).is_ok()
    }

    fn coefficients(&self, index: u64) -> [Rational; 4] {
        let m = self.values.len() as u64;
        let mut out = [Rational::from_integer(0); 4];
        let mut rest = index;
        for slot in out.iter_mut().rev() {
            *slot = self.values[(rest % m) as usize];
            rest /= m;
        }
        out
    }

    /// Counts matches with the top `free` coefficients fixed to `fixed`; the
    /// remaining low-order coefficients are pinned by interpolation.
    fn count_with_prefix(&self, data: &[Rational], fixed: &mut Vec<Rational>, free: usize) -> u64 {
        if fixed.len() < free {
            let mut total = 0;
            for v in &self.values {
                fixed.push(*v);
                total += self.count_with_prefix(data, fixed, free);
                fixed.pop();
            }
            return total;
        }
        // Residual after removing the fixed high-order terms, fitted by a
        // polynomial of degree 3 − free through the first 4 − free points.
        let low = 4 - free;
        let residual: Vec<Rational> = data
            .iter()
            .enumerate()
            .map(|(i, y)| {
                let x = Rational::from_integer(i as i128 + 1);
                let mut acc = *y;
                for (j, c) in fixed.iter().enumerate() {
                    acc -= c * pow(x, 3 - j as u32);
                }
                acc
            })
            .collect();
        let coeffs = interpolate(&residual[..low]);
        if !coeffs.iter().all(|c| self.contains(c)) {
            return 0;
        }
        let fits = residual.iter().enumerate().skip(low).all(|(i, r)| {
            let x = Rational::from_integer(i as i128 + 1);
            horner(&coeffs, x) == *r
        });
        u64::from(fits)
    }
}

impl Default for CubicHypothesis {
    fn default() -> Self {
        Self::new(50, 4)
    }
}

fn pow(x: Rational, e: u32) -> Rational {
    (0..e).fold(Rational::from_integer(1), |acc, _| acc * x)
}

/// Coefficients, highest degree first.
fn horner(coeffs: &[Rational], x: Rational) -> Rational {
    coeffs.iter().fold(Rational::from_integer(0), |acc, c| acc * x + c)
}

/// Coefficients (highest degree first) of the unique polynomial of degree
/// `< ys.len()` through `(1, ys[0]), (2, ys[1]), …`, via Newton divided differences.
fn interpolate(ys: &[Rational]) -> Vec<Rational> {
    let n = ys.len();
    let mut dd = ys.to_vec();
    for level in 1..n {
        for i in (level..n).rev() {
            dd[i] = (dd[i] - dd[i - 1]) / Rational::from_integer(level as i128);
        }
    }
    // Expand the Newton form into monomial coefficients, lowest degree first.
    let mut poly = vec![Rational::from_integer(0); n];
    for k in (0..n).rev() {
        // poly = poly·(x − (k + 1)) + dd[k]
        let node = Rational::from_integer(k as i128 + 1);
        let mut next = vec![Rational::from_integer(0); n];
        for (d, c) in poly.iter().enumerate() {
            if d + 1 < n {
                next[d + 1] += c;
            }
            next[d] -= c * node;
        }
        next[0] += dd[k];
        poly = next;
    }
    poly.reverse();
    poly
}

impl DiscreteHypothesis for CubicHypothesis {
    fn name(&self) -> &str {
        &self.name
    }

    fn grid_size(&self) -> u64 {
        (self.values.len() as u64).pow(4)
    }

    fn generate(&self, index: u64, len: usize) -> Vec<Rational> {
        let c = self.coefficients(index);
        (1..=len as i128).map(|x| horner(&c, Rational::from_integer(x))).collect()
    }

    fn count_matches(&self, data: &[Rational]) -> u64 {
        let free = 4usize.saturating_sub(data.len());
        self.count_with_prefix(data, &mut Vec::with_capacity(4), free)
    }
}

/// Integer data as exact rationals.
pub fn integers(data: &[i64]) -> Vec<Rational> {
    data.iter().map(|v| Rational::from_integer(*v as i128)).collect()
}
