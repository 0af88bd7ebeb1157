//! Barrier inequality at the puncture.
//!
//! The maximum principle on a punctured ball rests on the barrier
//! h(x) = (-ln |x|)^a with a in (0, 1), which blows up at the origin while
//! satisfying Delta h + K h <= 0 on a small enough punctured ball. With
//! rho = |x| the left-hand side evaluates in closed form (planar case,
//! where the (n - 2) gradient term drops out) to
//!
//! ```text
//! E(rho) = -a (-ln rho)^(a-1) (n - 2) / rho^2
//!        +  a (a - 1) (-ln rho)^(a-2) / rho^2
//!        +  K (-ln rho)^a ,            n = 2
//! ```
//!
//! The second term is negative (a (a - 1) < 0) and dominates as rho -> 0,
//! so a positive working radius always exists; for K = 0 the whole
//! expression is nonpositive on all of (0, 1). This module samples E on a
//! logarithmic radius ladder and reports the largest sampled radius below
//! which every sample is nonpositive.

use crate::error::Error;

/// Planar case: the first-derivative term of the expression carries the
/// factor (n - 2) and vanishes identically.
const DIMENSION: f64 = 2.0;

/// Smallest sampled radius; below this the expression is astronomically
/// negative and floating point adds nothing.
const INNER_RADIUS: f64 = 1e-8;

/// Closed-form value of Delta h + K h at radius rho for h = (-ln rho)^a.
pub fn barrier_expression(a: f64, k: f64, rho: f64) -> f64 {
    let t = -rho.ln();
    -a * t.powf(a - 1.0) * (DIMENSION - 2.0) / (rho * rho)
        + a * (a - 1.0) * t.powf(a - 2.0) / (rho * rho)
        + k * t.powf(a)
}

/// Outcome of sampling the barrier expression on (INNER_RADIUS, r].
#[derive(Debug, Clone)]
pub struct BarrierReport {
    pub exponent: f64,
    pub radius: f64,
    pub zero_order: f64,
    /// Sampled (radius, expression value) pairs in ascending radius order.
    pub samples: Vec<(f64, f64)>,
    /// Largest sampled radius such that every sample at or below it is
    /// nonpositive; 0 when even the innermost sample fails.
    pub r_star: f64,
    /// Smallest sampled radius with a positive expression value, if any.
    pub first_violation: Option<f64>,
}

impl BarrierReport {
    /// The inequality holds on the whole requested ball.
    pub fn holds_everywhere(&self) -> bool {
        self.first_violation.is_none()
    }

    pub fn summary_lines(&self) -> Vec<String> {
        let mut lines = vec![
            format!("barrier_exponent = {}", self.exponent),
            format!("barrier_radius = {}", self.radius),
            format!("barrier_zero_order = {}", self.zero_order),
            format!("barrier_samples = {}", self.samples.len()),
            format!("barrier_r_star = {}", self.r_star),
        ];
        match self.first_violation {
            Some(rho) => lines.push(format!("barrier_first_violation = {}", rho)),
            None => lines.push("barrier_first_violation = none".to_string()),
        }
        lines
    }

    /// Two-column plot data: radius and expression value.
    pub fn write_plotdata<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        for (rho, value) in &self.samples {
            writeln!(w, "{} {}", rho, value)?;
        }
        Ok(())
    }
}

/// Samples Delta h + K h on n_samples log-spaced radii in (1e-8, r] (the
/// outermost sample is exactly r) and locates the working radius r_star.
pub fn barrier_check(a: f64, r: f64, k: f64, n_samples: usize) -> Result<BarrierReport, Error> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::InvalidParameter {
            name: "a",
            value: a,
            constraint: "in (0, 1)",
        });
    }
    if !(r > INNER_RADIUS && r < 1.0) {
        return Err(Error::InvalidParameter {
            name: "r",
            value: r,
            constraint: "in (1e-8, 1)",
        });
    }
    if !(k >= 0.0) || !k.is_finite() {
        return Err(Error::InvalidParameter {
            name: "k",
            value: k,
            constraint: "finite and nonnegative",
        });
    }
    if n_samples < 2 {
        return Err(Error::InvalidParameter {
            name: "n_samples",
            value: n_samples as f64,
            constraint: "at least 2",
        });
    }

    let log_lo = INNER_RADIUS.ln();
    let log_hi = r.ln();
    let mut samples = Vec::with_capacity(n_samples);
    for q in 0..n_samples {
        let rho = if q + 1 == n_samples {
            r
        } else {
            (log_lo + (log_hi - log_lo) * q as f64 / (n_samples - 1) as f64).exp()
        };
        samples.push((rho, barrier_expression(a, k, rho)));
    }

    let mut r_star = 0.0;
    let mut first_violation = None;
    for &(rho, value) in &samples {
        if value <= 0.0 {
            if first_violation.is_none() {
                r_star = rho;
            }
        } else if first_violation.is_none() {
            first_violation = Some(rho);
        }
    }

    Ok(BarrierReport {
        exponent: a,
        radius: r,
        zero_order: k,
        samples,
        r_star,
        first_violation,
    })
}
