//! Pairwise (balanced tree) summation for the long contour sums.

use num_complex::Complex64;

const BLOCK: usize = 16;

/// Sums `terms` by recursive halving. Rounding error grows like `O(log n)`
/// instead of `O(n)` for the naive left-to-right loop.
pub fn pairwise_sum(terms: &[Complex64]) -> Complex64 {
    if terms.len() <= BLOCK {
        return terms
            .iter()
            .fold(Complex64::new(0.0, 0.0), |acc, t| acc + t);
    }
    let (left, right) = terms.split_at(terms.len() / 2);
    pairwise_sum(left) + pairwise_sum(right)
}

/// Real-valued counterpart of [`pairwise_sum`].
pub fn pairwise_sum_real(terms: &[f64]) -> f64 {
    if terms.len() <= BLOCK {
        return terms.iter().sum();
    }
    let (left, right) = terms.split_at(terms.len() / 2);
    pairwise_sum_real(left) + pairwise_sum_real(right)
}
