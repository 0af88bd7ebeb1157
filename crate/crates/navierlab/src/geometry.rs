//! Planar domain catalog, uniform grids with node classification, and the
//! reflection primitives behind the moving-plane sweep.
//!
//! Every conforming shape is mirror symmetric about the line {x1 = 0},
//! convex in the x1 direction (each horizontal slice is an interval), and
//! normalized so that sup over the domain of x1 equals 1. The reflection
//! about the vertical plane at offset lambda is
//!
//! ```text
//! x = (x1, x2)  ->  x_lambda = (2 lambda - x1, x2)
//! ```
//!
//! and the cap at offset lambda is the set of interior nodes with
//! x1 > lambda. For a conforming domain and lambda >= 0 the reflection of
//! the cap stays inside the domain; the shifted disc deliberately breaks
//! this and serves as the negative control of the verification suite.
//!
//! Grids are uniform with spacing h = 1/n_cells, nodes at integer index
//! pairs (i, j) with coordinates (i h, j h). Plane offsets are restricted
//! to integer multiples of h/2 so that reflections map nodes to nodes
//! exactly; all reflection arithmetic is done on indices, never on floats.

use crate::error::Error;

/// Point in the plane. Coordinates are named to match the distinguished
/// symmetry direction x1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x1: f64,
    pub x2: f64,
}

impl Point {
    pub fn new(x1: f64, x2: f64) -> Self {
        Self { x1, x2 }
    }

    pub fn norm(&self) -> f64 {
        (self.x1 * self.x1 + self.x2 * self.x2).sqrt()
    }

    pub fn mirror(&self) -> Self {
        Self {
            x1: -self.x1,
            x2: self.x2,
        }
    }
}

/// Reflection about the vertical plane {x1 = lambda}.
pub fn reflect(p: Point, lambda: f64) -> Point {
    Point {
        x1: 2.0 * lambda - p.x1,
        x2: p.x2,
    }
}

/// Shape catalog. All membership tests are strict (open domains).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    /// Disc of the given radius centered at the origin.
    Disc { radius: f64 },
    /// Axis-aligned ellipse centered at the origin.
    Ellipse { semi_x1: f64, semi_x2: f64 },
    /// Rectangle [-half_length, half_length] x (-cap_radius, cap_radius)
    /// with semicircular caps of cap_radius at both ends.
    Stadium { half_length: f64, cap_radius: f64 },
    /// Intersection of two discs of disc_radius centered at
    /// (+-center_offset, 0); requires center_offset < disc_radius.
    Lens { disc_radius: f64, center_offset: f64 },
    /// Disc centered at (center_x1, 0): the negative control. Breaks both
    /// mirror symmetry and the sup x1 = 1 normalization whenever
    /// center_x1 != 0.
    ShiftedDisc { radius: f64, center_x1: f64 },
}

impl Shape {
    pub fn contains(&self, p: Point) -> bool {
        match *self {
            Shape::Disc { radius } => p.x1 * p.x1 + p.x2 * p.x2 < radius * radius,
            Shape::Ellipse { semi_x1, semi_x2 } => {
                let u = p.x1 / semi_x1;
                let v = p.x2 / semi_x2;
                u * u + v * v < 1.0
            }
            Shape::Stadium {
                half_length,
                cap_radius,
            } => {
                let dx = (p.x1.abs() - half_length).max(0.0);
                dx * dx + p.x2 * p.x2 < cap_radius * cap_radius
            }
            Shape::Lens {
                disc_radius,
                center_offset,
            } => {
                let r2 = disc_radius * disc_radius;
                let a = p.x1 - center_offset;
                let b = p.x1 + center_offset;
                a * a + p.x2 * p.x2 < r2 && b * b + p.x2 * p.x2 < r2
            }
            Shape::ShiftedDisc { radius, center_x1 } => {
                let d = p.x1 - center_x1;
                d * d + p.x2 * p.x2 < radius * radius
            }
        }
    }

    /// Supremum of x1 over the shape, in closed form.
    pub fn sup_x1(&self) -> f64 {
        match *self {
            Shape::Disc { radius } => radius,
            Shape::Ellipse { semi_x1, .. } => semi_x1,
            Shape::Stadium {
                half_length,
                cap_radius,
            } => half_length + cap_radius,
            Shape::Lens {
                disc_radius,
                center_offset,
            } => disc_radius - center_offset,
            Shape::ShiftedDisc { radius, center_x1 } => center_x1 + radius,
        }
    }

    /// Closed bounding box (min corner, max corner).
    pub fn bounding_box(&self) -> (Point, Point) {
        match *self {
            Shape::Disc { radius } => (Point::new(-radius, -radius), Point::new(radius, radius)),
            Shape::Ellipse { semi_x1, semi_x2 } => {
                (Point::new(-semi_x1, -semi_x2), Point::new(semi_x1, semi_x2))
            }
            Shape::Stadium {
                half_length,
                cap_radius,
            } => (
                Point::new(-half_length - cap_radius, -cap_radius),
                Point::new(half_length + cap_radius, cap_radius),
            ),
            Shape::Lens {
                disc_radius,
                center_offset,
            } => {
                let half_width = disc_radius - center_offset;
                let half_height =
                    (disc_radius * disc_radius - center_offset * center_offset).max(0.0).sqrt();
                (
                    Point::new(-half_width, -half_height),
                    Point::new(half_width, half_height),
                )
            }
            Shape::ShiftedDisc { radius, center_x1 } => (
                Point::new(center_x1 - radius, -radius),
                Point::new(center_x1 + radius, radius),
            ),
        }
    }

    /// The shifted disc is the deliberate symmetry-breaking control.
    pub fn is_negative_control(&self) -> bool {
        matches!(self, Shape::ShiftedDisc { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Shape::Disc { .. } => "disc",
            Shape::Ellipse { .. } => "ellipse",
            Shape::Stadium { .. } => "stadium",
            Shape::Lens { .. } => "lens",
            Shape::ShiftedDisc { .. } => "shifted-disc",
        }
    }

    /// Name plus parameters, for reports and logs.
    pub fn describe(&self) -> String {
        match *self {
            Shape::Disc { radius } => format!("disc radius={}", radius),
            Shape::Ellipse { semi_x1, semi_x2 } => {
                format!("ellipse semi_x1={} semi_x2={}", semi_x1, semi_x2)
            }
            Shape::Stadium {
                half_length,
                cap_radius,
            } => format!("stadium half_length={} cap_radius={}", half_length, cap_radius),
            Shape::Lens {
                disc_radius,
                center_offset,
            } => format!("lens disc_radius={} center_offset={}", disc_radius, center_offset),
            Shape::ShiftedDisc { radius, center_x1 } => {
                format!("shifted-disc radius={} center_x1={}", radius, center_x1)
            }
        }
    }
}

/// Domain specification: a shape plus the distinguished singular point
/// (the pole of Green-function experiments; the origin by default).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainSpec {
    pub shape: Shape,
    pub singular_point: Point,
}

impl DomainSpec {
    pub fn new(shape: Shape) -> Self {
        Self {
            shape,
            singular_point: Point::new(0.0, 0.0),
        }
    }

    pub fn with_singular_point(mut self, p: Point) -> Self {
        self.singular_point = p;
        self
    }
}

/// One structural check with a human-readable witness on failure.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Per-assumption validation record.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub checks: Vec<CheckOutcome>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failure_summary(&self) -> String {
        let mut parts = Vec::new();
        for c in self.checks.iter().filter(|c| !c.passed) {
            parts.push(format!("{} ({})", c.name, c.detail));
        }
        parts.join("; ")
    }
}

/// Samples per axis for the structural checks. Witness points are reported
/// at this resolution; the analytic sup check needs no sampling.
const VALIDATION_SAMPLES: usize = 801;

/// Checks mirror symmetry, x1-convexity of every horizontal slice,
/// interiority of the singular point, and the sup x1 = 1 normalization.
/// Failures carry witness points; callers decide whether a failing domain
/// is acceptable (the negative control is).
pub fn validate_domain(spec: &DomainSpec) -> ValidationReport {
    let shape = &spec.shape;
    let (lo, hi) = shape.bounding_box();
    // symmetric sampling box so a sample's mirror is itself a sample
    let half_w = lo.x1.abs().max(hi.x1.abs()) * 1.02 + 1e-6;
    let half_h = lo.x2.abs().max(hi.x2.abs()) * 1.02 + 1e-6;
    let n = VALIDATION_SAMPLES;
    let coord = |idx: usize, half: f64| -half + 2.0 * half * idx as f64 / (n - 1) as f64;

    let mut symmetry = CheckOutcome {
        name: "mirror symmetry about {x1 = 0}",
        passed: true,
        detail: "holds at all sampled points".to_string(),
    };
    let mut convexity = CheckOutcome {
        name: "x1-convexity of horizontal slices",
        passed: true,
        detail: "every sampled slice is a single interval".to_string(),
    };
    'rows: for jj in 0..n {
        let x2 = coord(jj, half_h);
        let mut seen_inside = false;
        let mut seen_gap_after_inside = false;
        for ii in 0..n {
            let p = Point::new(coord(ii, half_w), x2);
            let inside = shape.contains(p);
            if symmetry.passed && inside != shape.contains(p.mirror()) {
                symmetry.passed = false;
                symmetry.detail = format!(
                    "witness ({:.4}, {:.4}): inside={} but mirror inside={}",
                    p.x1,
                    p.x2,
                    inside,
                    shape.contains(p.mirror())
                );
            }
            if inside {
                if seen_gap_after_inside {
                    convexity.passed = false;
                    convexity.detail = format!(
                        "slice x2 = {:.4} re-enters the domain at x1 = {:.4}",
                        x2, p.x1
                    );
                    if !symmetry.passed {
                        break 'rows;
                    }
                }
                seen_inside = true;
            } else if seen_inside {
                seen_gap_after_inside = true;
            }
        }
    }

    let singular_inside = shape.contains(spec.singular_point);
    let singular = CheckOutcome {
        name: "singular point interior",
        passed: singular_inside,
        detail: format!(
            "({}, {}) is {}",
            spec.singular_point.x1,
            spec.singular_point.x2,
            if singular_inside { "inside" } else { "not inside" }
        ),
    };

    let sup = shape.sup_x1();
    let normalized = (sup - 1.0).abs() <= 1e-12;
    let normalization = CheckOutcome {
        name: "sup x1 = 1 normalization",
        passed: normalized,
        detail: format!("sup x1 = {}", sup),
    };

    ValidationReport {
        checks: vec![symmetry, convexity, singular, normalization],
    }
}

/// Node classification on the uniform grid. Boundary nodes are the
/// exterior nodes with at least one interior stencil neighbor; they carry
/// the homogeneous Dirichlet value 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeClass {
    Interior,
    Boundary,
    Exterior,
}

impl NodeClass {
    pub fn name(&self) -> &'static str {
        match self {
            NodeClass::Interior => "interior",
            NodeClass::Boundary => "boundary",
            NodeClass::Exterior => "exterior",
        }
    }
}

/// Uniform grid with staircase (classification-based) boundary.
/// Immutable after construction; interior nodes are numbered in
/// lexicographic (j, i) order so the mirror permutation is a plain index
/// lookup.
#[derive(Debug, Clone)]
pub struct Grid {
    spec: Option<DomainSpec>,
    h: f64,
    n_cells: u32,
    i_min: i32,
    i_max: i32,
    j_min: i32,
    j_max: i32,
    class: Vec<NodeClass>,
    /// Unknown index per map slot; u32::MAX marks non-interior nodes.
    unknown: Vec<u32>,
    interior: Vec<(i32, i32)>,
    conforming: bool,
    puncture_node: Option<(i32, i32)>,
    puncture_excluded: bool,
}

const NO_UNKNOWN: u32 = u32::MAX;

impl Grid {
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn n_cells(&self) -> u32 {
        self.n_cells
    }

    /// The domain this grid was built from; custom grids have none.
    pub fn domain(&self) -> Option<&DomainSpec> {
        self.spec.as_ref()
    }

    /// True when the source domain passed every structural check.
    pub fn is_conforming(&self) -> bool {
        self.conforming
    }

    /// Grid node coinciding with the singular point, when on-lattice.
    pub fn puncture_node(&self) -> Option<(i32, i32)> {
        self.puncture_node
    }

    pub fn puncture_excluded(&self) -> bool {
        self.puncture_excluded
    }

    pub fn interior_nodes(&self) -> &[(i32, i32)] {
        &self.interior
    }

    pub fn n_interior(&self) -> usize {
        self.interior.len()
    }

    /// Coordinates of the node at index pair (i, j).
    pub fn node_point(&self, i: i32, j: i32) -> Point {
        Point::new(i as f64 * self.h, j as f64 * self.h)
    }

    fn slot(&self, i: i32, j: i32) -> Option<usize> {
        if i < self.i_min || i > self.i_max || j < self.j_min || j > self.j_max {
            return None;
        }
        let width = (self.i_max - self.i_min + 1) as usize;
        let col = (i - self.i_min) as usize;
        let row = (j - self.j_min) as usize;
        Some(row * width + col)
    }

    /// Classification at (i, j); anything off the stored map is exterior.
    pub fn class_at(&self, i: i32, j: i32) -> NodeClass {
        match self.slot(i, j) {
            Some(s) => self.class[s],
            None => NodeClass::Exterior,
        }
    }

    /// Unknown index of the interior node at (i, j), if any.
    pub fn unknown_index(&self, i: i32, j: i32) -> Option<usize> {
        let s = self.slot(i, j)?;
        let u = self.unknown[s];
        if u == NO_UNKNOWN {
            None
        } else {
            Some(u as usize)
        }
    }

    /// Unknown index of the mirrored node (-i, j) of unknown k, when that
    /// node is interior. Always `Some` on conforming grids.
    pub fn mirror_unknown(&self, k: usize) -> Option<usize> {
        let (i, j) = self.interior[k];
        self.unknown_index(-i, j)
    }

    /// Writes the classification as CSV rows (i, j, x1, x2, class).
    pub fn write_classification_csv<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "i,j,x1,x2,class")?;
        for j in self.j_min..=self.j_max {
            for i in self.i_min..=self.i_max {
                let p = self.node_point(i, j);
                writeln!(w, "{},{},{},{},{}", i, j, p.x1, p.x2, self.class_at(i, j).name())?;
            }
        }
        Ok(())
    }

    /// Builds a grid directly from an interior node list; spacing is taken
    /// as given and neighbors of the listed nodes become boundary nodes.
    /// Intended for operator unit tests and synthetic experiments.
    pub fn from_interior_nodes(h: f64, nodes: &[(i32, i32)]) -> Result<Self, Error> {
        if nodes.is_empty() {
            return Err(Error::GridTooCoarse { interior: 0 });
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidParameter {
                name: "h",
                value: h,
                constraint: "h > 0",
            });
        }
        let i_min = nodes.iter().map(|n| n.0).min().unwrap() - 1;
        let i_max = nodes.iter().map(|n| n.0).max().unwrap() + 1;
        let j_min = nodes.iter().map(|n| n.1).min().unwrap() - 1;
        let j_max = nodes.iter().map(|n| n.1).max().unwrap() + 1;
        let mut grid = Grid {
            spec: None,
            h,
            n_cells: (1.0 / h).round().max(1.0) as u32,
            i_min,
            i_max,
            j_min,
            j_max,
            class: vec![
                NodeClass::Exterior;
                ((i_max - i_min + 1) * (j_max - j_min + 1)) as usize
            ],
            unknown: vec![
                NO_UNKNOWN;
                ((i_max - i_min + 1) * (j_max - j_min + 1)) as usize
            ],
            interior: Vec::new(),
            conforming: false,
            puncture_node: None,
            puncture_excluded: false,
        };
        for &(i, j) in nodes {
            let s = grid.slot(i, j).expect("node inside padded range");
            grid.class[s] = NodeClass::Interior;
        }
        grid.finish_classification();
        Ok(grid)
    }

    /// Marks exterior nodes adjacent to interior ones as boundary and
    /// numbers the interior nodes in (j, i) order.
    fn finish_classification(&mut self) {
        let mut interior = Vec::new();
        for j in self.j_min..=self.j_max {
            for i in self.i_min..=self.i_max {
                if self.class_at(i, j) == NodeClass::Interior {
                    interior.push((i, j));
                }
            }
        }
        for &(i, j) in &interior {
            for (di, dj) in [(-1, 0), (1, 0), (0, -1), (0, 1)] {
                let (ni, nj) = (i + di, j + dj);
                if let Some(s) = self.slot(ni, nj) {
                    if self.class[s] == NodeClass::Exterior {
                        self.class[s] = NodeClass::Boundary;
                    }
                }
            }
        }
        for (k, &(i, j)) in interior.iter().enumerate() {
            let s = self.slot(i, j).expect("interior node on map");
            self.unknown[s] = k as u32;
        }
        self.interior = interior;
    }
}

/// Builds the staircase grid with spacing h = 1/n_cells. The domain must
/// pass validation unless it is the flagged negative control; grids with
/// fewer than 4 interior nodes are rejected.
pub fn build_grid(spec: &DomainSpec, n_cells: u32) -> Result<Grid, Error> {
    build_grid_with_options(spec, n_cells, false)
}

/// As [`build_grid`], optionally excluding the node at the singular point
/// from the unknowns (it is then treated as a Dirichlet-0 boundary node).
pub fn build_grid_with_options(
    spec: &DomainSpec,
    n_cells: u32,
    exclude_puncture: bool,
) -> Result<Grid, Error> {
    if n_cells < 1 {
        return Err(Error::GridTooCoarse { interior: 0 });
    }
    let report = validate_domain(spec);
    let conforming = report.all_passed();
    if !conforming && !spec.shape.is_negative_control() {
        return Err(Error::InvalidDomain {
            failures: report.failure_summary(),
        });
    }
    let h = 1.0 / n_cells as f64;
    let (lo, hi) = spec.shape.bounding_box();
    // pad by one so every interior node has its four neighbors on the map
    let i_min = (lo.x1 / h).floor() as i32 - 1;
    let i_max = (hi.x1 / h).ceil() as i32 + 1;
    let j_min = (lo.x2 / h).floor() as i32 - 1;
    let j_max = (hi.x2 / h).ceil() as i32 + 1;
    let slots = ((i_max - i_min + 1) * (j_max - j_min + 1)) as usize;

    let mut grid = Grid {
        spec: Some(*spec),
        h,
        n_cells,
        i_min,
        i_max,
        j_min,
        j_max,
        class: vec![NodeClass::Exterior; slots],
        unknown: vec![NO_UNKNOWN; slots],
        interior: Vec::new(),
        conforming,
        puncture_node: None,
        puncture_excluded: false,
    };

    for j in j_min..=j_max {
        for i in i_min..=i_max {
            if spec.shape.contains(grid.node_point(i, j)) {
                let s = grid.slot(i, j).expect("in range by construction");
                grid.class[s] = NodeClass::Interior;
            }
        }
    }

    // locate the singular point on the lattice, if it sits there
    let pi = (spec.singular_point.x1 / h).round() as i32;
    let pj = (spec.singular_point.x2 / h).round() as i32;
    let on_lattice = (spec.singular_point.x1 - pi as f64 * h).abs() <= 1e-12
        && (spec.singular_point.x2 - pj as f64 * h).abs() <= 1e-12;
    if on_lattice {
        grid.puncture_node = Some((pi, pj));
        if exclude_puncture {
            if let Some(s) = grid.slot(pi, pj) {
                if grid.class[s] == NodeClass::Interior {
                    grid.class[s] = NodeClass::Boundary;
                    grid.puncture_excluded = true;
                }
            }
        }
    }

    grid.finish_classification();
    if grid.interior.len() < 4 {
        return Err(Error::GridTooCoarse {
            interior: grid.interior.len(),
        });
    }
    Ok(grid)
}

/// Integer k with lambda = k h / 2, rejecting off-lattice offsets and
/// offsets outside [0, 1). All reflection arithmetic goes through this so
/// node lookups stay exact.
pub fn half_lattice_index(grid: &Grid, lambda: f64) -> Result<i64, Error> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::LambdaOutOfRange { lambda });
    }
    let t = 2.0 * lambda / grid.h();
    let k = t.round();
    if (t - k).abs() > 1e-9 {
        return Err(Error::LambdaOffLattice {
            lambda,
            spacing: grid.h(),
        });
    }
    Ok(k as i64)
}

/// Interior nodes strictly right of the plane {x1 = lambda}, in unknown
/// order. On conforming grids the reflection of every returned node is
/// checked to be an interior or boundary node; an exterior reflection is
/// a contract violation and raises an error.
pub fn cap_nodes(grid: &Grid, lambda: f64) -> Result<Vec<(i32, i32)>, Error> {
    let k = half_lattice_index(grid, lambda)?;
    let mut nodes = Vec::new();
    for &(i, j) in grid.interior_nodes() {
        if 2 * i as i64 > k {
            nodes.push((i, j));
        }
    }
    if grid.is_conforming() {
        for &(i, j) in &nodes {
            let ri = (k - i as i64) as i32;
            if grid.class_at(ri, j) == NodeClass::Exterior {
                return Err(Error::ReflectionOutsideDomain { node: (i, j), lambda });
            }
        }
    }
    Ok(nodes)
}
