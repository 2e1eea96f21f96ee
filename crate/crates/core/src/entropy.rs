//! Two-class information measure.

use crate::error::{Error, Result};

const SUM_TOLERANCE: f64 = 1e-12;

/// Bits needed to encode a two-class mixture with the given class
/// probabilities, `-p log2 p - n log2 n`, taking `0 log2 0 = 0`.
pub fn binary_info(p_frac: f64, n_frac: f64) -> Result<f64> {
    let in_unit = |x: f64| (0.0..=1.0).contains(&x);
    if !in_unit(p_frac) || !in_unit(n_frac) || (p_frac + n_frac - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::InvalidProbabilities(p_frac, n_frac));
    }
    Ok(plogp(p_frac) + plogp(n_frac))
}

fn plogp(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        -x * x.log2()
    }
}

/// Info of a mixture given as positive and negative counts. An empty
/// mixture carries no information.
pub fn count_info(positives: usize, negatives: usize) -> f64 {
    let total = positives + negatives;
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    plogp(positives as f64 / t) + plogp(negatives as f64 / t)
}
