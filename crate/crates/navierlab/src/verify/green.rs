//! Green function of the Laplacian on a planar disc, and the injected
//! singular-profile experiment built on it.
//!
//! The disc of radius R admits the image-point formula
//!
//! ```text
//! G(p, x) = (1 / 2 pi) ln( |x - p*| |p| / (R |x - p|) ),   p* = R^2 p / |p|^2
//! ```
//!
//! which this module evaluates through the equivalent single expression
//!
//! ```text
//! G(p, x) = ln( (|x|^2 |p|^2 - 2 R^2 <x, p> + R^4) / (R^2 |x - p|^2) ) / (4 pi)
//! ```
//!
//! valid for every pole inside the disc including the center (where the
//! image point escapes to infinity but the expression reduces to
//! ln(R^2 / |x|^2) / (4 pi) without any branching). G is positive inside,
//! vanishes on the circle, is symmetric in its two arguments, and is
//! harmonic away from the pole.
//!
//! The singular-profile experiment injects G as the first component over
//! a disc grid — a genuinely singular positive profile vanishing on the
//! boundary — and runs the plane descent on it. The node at the pole
//! carries a placeholder zero; every cap evaluation skips that node and
//! its reflected image, so the placeholder is never read.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::Error;
use crate::geometry::{Grid, Point, Shape};
use crate::solver::FieldStack;
use crate::symcoeffs::AlphaVector;
use crate::verify::{sweep_lambdas, MovingPlaneReport};

/// Pass tolerance of the injected-profile descent: the profile is exact
/// up to floating-point evaluation, so only rounding noise is admitted.
pub const PROFILE_SWEEP_TOL: f64 = 1e-12;

/// Green function of the disc of the given radius centered at the origin,
/// with pole strictly inside and evaluation point in the closed disc.
pub fn green_ball(pole: Point, x: Point, radius: f64) -> Result<f64, Error> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidParameter {
            name: "radius",
            value: radius,
            constraint: "positive and finite",
        });
    }
    let r2 = radius * radius;
    let p2 = pole.x1 * pole.x1 + pole.x2 * pole.x2;
    if !(p2 < r2) {
        return Err(Error::InvalidParameter {
            name: "pole",
            value: p2.sqrt(),
            constraint: "strictly inside the disc",
        });
    }
    let x2 = x.x1 * x.x1 + x.x2 * x.x2;
    if !(x2 <= r2) {
        return Err(Error::InvalidParameter {
            name: "x",
            value: x2.sqrt(),
            constraint: "inside the closed disc",
        });
    }
    let dx1 = x.x1 - pole.x1;
    let dx2 = x.x2 - pole.x2;
    let d2 = dx1 * dx1 + dx2 * dx2;
    if d2 == 0.0 {
        return Err(Error::InvalidParameter {
            name: "x",
            value: 0.0,
            constraint: "distinct from the pole",
        });
    }
    let dot = x.x1 * pole.x1 + x.x2 * pole.x2;
    let numerator = x2 * p2 - 2.0 * r2 * dot + r2 * r2;
    Ok((numerator / (r2 * d2)).ln() / (4.0 * PI))
}

/// Wraps the disc Green function with pole at the grid's singular point as
/// a single-component stack over the grid's interior nodes. The node at
/// the pole (when on-lattice) stores 0; cap evaluations exclude it.
pub fn green_profile_stack(grid: &Arc<Grid>) -> Result<FieldStack, Error> {
    let spec = grid.domain().ok_or_else(|| Error::UnsupportedDomain {
        reason: "synthetic grids carry no analytic domain".to_string(),
    })?;
    let radius = match spec.shape {
        Shape::Disc { radius } => radius,
        other => {
            return Err(Error::UnsupportedDomain {
                reason: format!(
                    "the singular profile needs the origin-centered disc, got {}",
                    other.name()
                ),
            })
        }
    };
    let pole = spec.singular_point;
    let mut values = Vec::with_capacity(grid.n_interior());
    for &(i, j) in grid.interior_nodes() {
        if grid.puncture_node() == Some((i, j)) {
            values.push(0.0);
        } else {
            values.push(green_ball(pole, grid.node_point(i, j), radius)?);
        }
    }
    let alpha = AlphaVector::new(vec![0.0]).expect("static shift vector");
    FieldStack::from_fields(grid.clone(), alpha, vec![values])
}

/// Injects the disc Green function as the first component and runs the
/// plane descent over the supplied offsets. The profile is radial about
/// the pole, so for the origin pole the descent must pass at every
/// positive offset and vanish identically at offset zero.
pub fn singular_profile_experiment(
    grid: &Arc<Grid>,
    lambdas: &[f64],
) -> Result<MovingPlaneReport, Error> {
    let stack = green_profile_stack(grid)?;
    sweep_lambdas(&stack, lambdas, PROFILE_SWEEP_TOL)
}
