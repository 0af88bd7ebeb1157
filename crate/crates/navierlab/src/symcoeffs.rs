//! Elementary symmetric coefficients of shifted-Laplacian products.
//!
//! Expanding the characteristic product
//!
//! ```text
//! prod_{i=1..m} (alpha_i + t) = sum_{k=0..m} s_k(alpha) t^k
//! ```
//!
//! in ascending powers of t gives the coefficients s_0, ..., s_m with
//! s_m = 1 identically; s_k is the sum over all (m-k)-element subsets of
//! the product of the selected shifts (the empty product is 1). These are
//! the weights under which a superposition of iterated Laplacians
//! `sum_k s_k (-Delta)^k` factors into the operator cascade
//! `prod_i (-Delta + alpha_i)`.
//!
//! The sign equivalence used by the verification layer is:
//! all alpha_i >= 0 if and only if all s_k >= 0. The forward direction is
//! immediate (sums of products of nonnegative numbers); the converse is
//! exercised by brute force over random shift vectors in the tests.

use crate::error::Error;

/// Shift parameters (alpha_1, ..., alpha_m) of the operator product.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaVector {
    values: Vec<f64>,
}

impl AlphaVector {
    /// Requires at least one entry; every entry must be finite.
    pub fn new(values: Vec<f64>) -> Result<Self, Error> {
        if values.is_empty() {
            return Err(Error::EmptyAlpha);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteAlpha { index });
        }
        Ok(Self { values })
    }

    /// Number of shifts m (always >= 1).
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// True when every shift is nonnegative.
    pub fn all_nonnegative(&self) -> bool {
        self.values.iter().all(|&a| a >= 0.0)
    }
}

/// Coefficients s_0..s_m of the characteristic product, ascending powers.
#[derive(Debug, Clone, PartialEq)]
pub struct SymCoeffs {
    coeffs: Vec<f64>,
}

impl SymCoeffs {
    /// Coefficient slice; index k holds s_k. Length is m + 1.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Degree m of the expanded product.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Leading coefficient s_m (1 by construction).
    pub fn leading(&self) -> f64 {
        *self.coeffs.last().expect("coefficients never empty")
    }
}

/// Expands prod (alpha_i + t) by repeated in-place convolution with the
/// linear factors; O(m^2) multiply-adds, no allocation beyond the output.
pub fn expand_characteristic(alpha: &AlphaVector) -> SymCoeffs {
    let m = alpha.len();
    let mut coeffs = vec![0.0; m + 1];
    coeffs[0] = 1.0;
    let mut degree = 0;
    for &a in alpha.values() {
        // multiply the running polynomial by (a + t), highest power first
        degree += 1;
        coeffs[degree] = coeffs[degree - 1];
        for k in (1..degree).rev() {
            coeffs[k] = coeffs[k - 1] + a * coeffs[k];
        }
        coeffs[0] *= a;
    }
    SymCoeffs { coeffs }
}

/// Single coefficient s_k(alpha), computed by direct subset summation for
/// m <= 20 and by the expansion recurrence beyond that. The two routes are
/// compared against each other (and against an independent enumerator) in
/// the tests.
pub fn symmetric_coefficient(alpha: &AlphaVector, k: usize) -> Result<f64, Error> {
    let m = alpha.len();
    if k > m {
        return Err(Error::IndexOutOfRange { index: k, max: m });
    }
    if m <= 20 {
        Ok(subset_sum(alpha.values(), m - k))
    } else {
        Ok(expand_characteristic(alpha).coeffs[k])
    }
}

/// Sum over all `take`-element subsets of the product of the chosen
/// entries. The empty subset contributes the product 1.
fn subset_sum(values: &[f64], take: usize) -> f64 {
    fn recurse(values: &[f64], take: usize, start: usize, acc: f64) -> f64 {
        if take == 0 {
            return acc;
        }
        let mut total = 0.0;
        // leave enough entries after position i to complete the subset
        for i in start..=(values.len() - take) {
            total += recurse(values, take - 1, i + 1, acc * values[i]);
        }
        total
    }
    recurse(values, take, 0, 1.0)
}

/// True when every coefficient s_0..s_m is nonnegative (exact comparison,
/// no tolerance). Combined with [`AlphaVector::all_nonnegative`] this gives
/// both sides of the sign equivalence.
pub fn all_nonnegative_signs(alpha: &AlphaVector) -> bool {
    expand_characteristic(alpha)
        .coeffs
        .iter()
        .all(|&s| s >= 0.0)
}
