use std::ops::Range;

use crate::{Error, Result};

/// Weighted least-squares projection onto nondecreasing sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct Isotonic {
    pub fitted: Vec<f64>,
    /// Runs of pooled indices in order, singletons included. Adjacent blocks
    /// whose averages tie are left separate.
    pub blocks: Vec<Range<usize>>,
}

/// Pool-adjacent-violators: a stack of blocks, merging the top two while
/// their averages decrease.
pub fn pava(values: &[f64], weights: &[f64]) -> Result<Isotonic> {
    if values.len() != weights.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} values with {} weights",
            values.len(),
            weights.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
        return Err(Error::InvalidArgument(format!("PAVA weights must be positive, got {w}")));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("PAVA value {v}")));
    }

    struct Block {
        start: usize,
        end: usize,
        weight: f64,
        mean: f64,
    }
    let mut stack: Vec<Block> = Vec::with_capacity(values.len());
    for (i, (&v, &w)) in values.iter().zip(weights).enumerate() {
        let mut top = Block {
            start: i,
            end: i + 1,
            weight: w,
            mean: v,
        };
        while let Some(prev) = stack.last() {
            if prev.mean <= top.mean {
                break;
            }
            let prev = stack.pop().expect("non-empty");
            let weight = prev.weight + top.weight;
            top = Block {
                start: prev.start,
                end: top.end,
                weight,
                mean: (prev.mean * prev.weight + top.mean * top.weight) / weight,
            };
        }
        stack.push(top);
    }

    let mut fitted = vec![0.0; values.len()];
    let mut blocks = Vec::with_capacity(stack.len());
    for b in &stack {
        fitted[b.start..b.end].fill(b.mean);
        blocks.push(b.start..b.end);
    }
    Ok(Isotonic { fitted, blocks })
}
