//! Small dense helpers shared by the policies and environments.

/// Inner product, accumulated left to right.
///
/// Every projection in the crate goes through this function so that ranks
/// computed along different code paths compare bit-for-bit.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
