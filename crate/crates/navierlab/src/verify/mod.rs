//! Moving-plane laboratory.
//!
//! Given a solved component stack U = (u_1, ..., u_m), the plane
//! {x1 = lambda} defines the reflected difference
//!
//! ```text
//! v_i(x) = u_i(2 lambda - x1, x2) - u_i(x)   on the cap {x in Omega : x1 > lambda}
//! ```
//!
//! Symmetry and monotonicity of u_1 in x1 are equivalent to nonnegativity
//! of every v_i on every cap as the plane descends from the rightmost
//! extent of the domain (offset 1 after normalization) to 0. This module
//! runs that descent on the half-grid offsets, estimates the critical
//! plane as the smallest offset of the initial all-pass streak, and
//! measures the symmetry and monotonicity defects directly.
//!
//! It also evaluates the coupling coefficient c(x, lambda) that closes the
//! reflected system, f(u_1 reflected) - f(u_1) = c v_1, whose range must
//! stay inside [0, L] for a nondecreasing L-Lipschitz source; builds the
//! cooperativity matrix whose nonnegative off-diagonal entries justify the
//! vector maximum principle; and hosts the barrier and Green-function
//! experiments in the submodules.
//!
//! Differences are evaluated only at exact node pairs: plane offsets are
//! restricted to half-grid multiples and all reflection arithmetic is done
//! on integer indices. A node whose reflection lands on the distinguished
//! singular node (or which is that node itself) is skipped — the problem
//! is posed on the punctured domain, where that single comparison point is
//! exempt from the sign conditions.

pub mod barrier;
pub mod green;

use std::io::Write;

use crate::error::Error;
use crate::geometry::{cap_nodes, half_lattice_index, reflect, Grid, NodeClass};
use crate::solver::{FieldStack, Nonlinearity};
use crate::symcoeffs::{all_nonnegative_signs, AlphaVector};

/// Field value at (i, j) under the homogeneous Dirichlet extension:
/// interior nodes read the unknown, everything else is 0.
fn field_value_at(grid: &Grid, field: &[f64], i: i32, j: i32) -> f64 {
    match grid.unknown_index(i, j) {
        Some(u) => field[u],
        None => 0.0,
    }
}

/// Per-component reflected differences on one cap.
#[derive(Debug, Clone)]
pub struct ReflectionDiff {
    lambda: f64,
    nodes: Vec<(i32, i32)>,
    excluded: Vec<(i32, i32)>,
    /// values[c][p] = u_c(reflection of nodes[p]) - u_c(nodes[p])
    values: Vec<Vec<f64>>,
    minima: Vec<Option<(f64, (i32, i32))>>,
}

impl ReflectionDiff {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Cap nodes actually evaluated, aligned with [`Self::values`].
    pub fn nodes(&self) -> &[(i32, i32)] {
        &self.nodes
    }

    /// Cap nodes skipped because they are the singular node or reflect
    /// onto it.
    pub fn excluded_nodes(&self) -> &[(i32, i32)] {
        &self.excluded
    }

    pub fn values(&self, component: usize) -> &[f64] {
        &self.values[component]
    }

    pub fn n_evaluated(&self) -> usize {
        self.nodes.len()
    }

    /// Minimum and argmin of component `c`; `None` on an empty cap.
    pub fn component_min(&self, component: usize) -> Option<(f64, (i32, i32))> {
        self.minima[component]
    }

    /// Smallest difference across all components.
    pub fn min_over_components(&self) -> Option<f64> {
        self.minima
            .iter()
            .filter_map(|m| m.map(|(v, _)| v))
            .fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.min(v))))
    }
}

/// Evaluates every component difference on the cap at `lambda`. The offset
/// must be a half-grid multiple in [0, 1); on conforming grids every
/// reflected node is guaranteed classified (interior or boundary), while
/// the negative control reads exterior reflections as Dirichlet zeros.
pub fn reflection_diff(stack: &FieldStack, lambda: f64) -> Result<ReflectionDiff, Error> {
    let grid = stack.grid();
    let k = half_lattice_index(grid, lambda)?;
    let cap = cap_nodes(grid, lambda)?;
    let puncture = grid.puncture_node();

    let mut nodes = Vec::with_capacity(cap.len());
    let mut excluded = Vec::new();
    for &(i, j) in &cap {
        let ri = (k - i as i64) as i32;
        if puncture == Some((i, j)) || puncture == Some((ri, j)) {
            excluded.push((i, j));
        } else {
            nodes.push((i, j));
        }
    }

    let m = stack.order();
    let mut values = vec![Vec::with_capacity(nodes.len()); m];
    let mut minima: Vec<Option<(f64, (i32, i32))>> = vec![None; m];
    for c in 0..m {
        let field = stack.field(c);
        for &(i, j) in &nodes {
            let ri = (k - i as i64) as i32;
            let here = field[grid.unknown_index(i, j).expect("cap nodes are interior")];
            let v = field_value_at(grid, field, ri, j) - here;
            values[c].push(v);
            if minima[c].is_none_or(|(mv, _)| v < mv) {
                minima[c] = Some((v, (i, j)));
            }
        }
    }

    Ok(ReflectionDiff {
        lambda,
        nodes,
        excluded,
        values,
        minima,
    })
}

/// Maximum over components and node pairs of |u_c(x) - u_c(mirror x)|,
/// reading missing mirrors (negative control only) as Dirichlet zeros.
pub fn symmetry_defect(stack: &FieldStack) -> f64 {
    let grid = stack.grid();
    let mut defect = 0.0f64;
    for c in 0..stack.order() {
        let field = stack.field(c);
        for (k, &(i, j)) in grid.interior_nodes().iter().enumerate() {
            let mirrored = field_value_at(grid, field, -i, j);
            defect = defect.max((field[k] - mirrored).abs());
        }
    }
    defect
}

/// Largest positive forward difference (u_1(i+1, j) - u_1(i, j)) / h over
/// interior pairs with i >= 0; zero means u_1 is nonincreasing in x1 on
/// the right half. Pairs touching the singular node are skipped (the
/// problem lives on the punctured domain).
pub fn monotonicity_defect(stack: &FieldStack) -> f64 {
    monotonicity_defect_from_index(stack, 0)
}

/// As [`monotonicity_defect`] but only over pairs whose left node has
/// index i >= min_index (e.g. 1 to start strictly right of the plane of
/// symmetry).
pub fn monotonicity_defect_from_index(stack: &FieldStack, min_index: i32) -> f64 {
    let grid = stack.grid();
    let field = stack.field(0);
    let h = grid.h();
    let puncture = grid.puncture_node();
    let mut defect = 0.0f64;
    for (k, &(i, j)) in grid.interior_nodes().iter().enumerate() {
        if i < min_index {
            continue;
        }
        if puncture == Some((i, j)) || puncture == Some((i + 1, j)) {
            continue;
        }
        if let Some(right) = grid.unknown_index(i + 1, j) {
            let slope = (field[right] - field[k]) / h;
            defect = defect.max(slope.max(0.0));
        }
    }
    defect
}

/// Coupling coefficient c(x, lambda) on one cap, aligned with `nodes`.
#[derive(Debug, Clone)]
pub struct CouplingField {
    lambda: f64,
    nodes: Vec<(i32, i32)>,
    values: Vec<f64>,
}

impl CouplingField {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn nodes(&self) -> &[(i32, i32)] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn range(&self) -> Option<(f64, f64)> {
        self.values
            .iter()
            .fold(None, |acc: Option<(f64, f64)>, &v| match acc {
                None => Some((v, v)),
                Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
            })
    }
}

/// Evaluates c(x, lambda) = (f(u_1 at reflection) - f(u_1 at x)) / v_1
/// through the cancellation-free difference quotients of the source
/// catalog; nearly coincident values fall back to the one-sided slope.
/// Every value is checked against the band [-1e-9, L + 1e-9].
pub fn compute_c(
    stack: &FieldStack,
    lambda: f64,
    f: &Nonlinearity,
) -> Result<CouplingField, Error> {
    let grid = stack.grid();
    let k = half_lattice_index(grid, lambda)?;
    let cap = cap_nodes(grid, lambda)?;
    let puncture = grid.puncture_node();
    let field = stack.field(0);
    let bound = f.lipschitz();

    let mut nodes = Vec::with_capacity(cap.len());
    let mut values = Vec::with_capacity(cap.len());
    for &(i, j) in &cap {
        let ri = (k - i as i64) as i32;
        if puncture == Some((i, j)) || puncture == Some((ri, j)) {
            continue;
        }
        let here = field[grid.unknown_index(i, j).expect("cap nodes are interior")];
        let there = field_value_at(grid, field, ri, j);
        let c = f.slope_between(here, there);
        if !(c >= -1e-9 && c <= bound + 1e-9) {
            return Err(Error::CouplingOutOfBounds {
                value: c,
                lipschitz: bound,
            });
        }
        nodes.push((i, j));
        values.push(c);
    }

    Ok(CouplingField {
        lambda,
        nodes,
        values,
    })
}

/// Coupling matrix of the reflected first-order system written in
/// components: -alpha_i on the diagonal, 1 on the superdiagonal, and the
/// coupling value in the bottom-left corner. For m = 1 the superdiagonal
/// and the corner coincide, collapsing to the single entry c - alpha_1.
/// Off-diagonal entries must be nonnegative (the cooperativity hypothesis
/// behind the vector maximum principle); a negative coupling is rejected.
pub fn cooperativity_matrix(alpha: &AlphaVector, c_value: f64) -> Result<Vec<Vec<f64>>, Error> {
    if !c_value.is_finite() {
        return Err(Error::InvalidParameter {
            name: "c",
            value: c_value,
            constraint: "finite",
        });
    }
    let m = alpha.len();
    let a = alpha.values();
    if m == 1 {
        return Ok(vec![vec![c_value - a[0]]]);
    }
    if c_value < -1e-9 {
        return Err(Error::HypothesisViolated {
            clause: format!(
                "cooperative off-diagonal entries must be nonnegative, corner value {}",
                c_value
            ),
        });
    }
    let mut matrix = vec![vec![0.0; m]; m];
    for (row, matrix_row) in matrix.iter_mut().enumerate() {
        matrix_row[row] = -a[row];
        if row + 1 < m {
            matrix_row[row + 1] = 1.0;
        }
    }
    matrix[m - 1][0] = c_value;
    Ok(matrix)
}

/// Two equivalent sign criteria on the shifts: direct nonnegativity of
/// every alpha_i, and nonnegativity of every elementary symmetric
/// coefficient of prod (alpha_i + t). The two predicates must agree; both
/// are recorded so reports can show the equivalence at work.
#[derive(Debug, Clone, Copy)]
pub struct ShiftSignCheck {
    pub shifts_nonnegative: bool,
    pub coefficients_nonnegative: bool,
}

impl ShiftSignCheck {
    pub fn run(alpha: &AlphaVector) -> Self {
        Self {
            shifts_nonnegative: alpha.all_nonnegative(),
            coefficients_nonnegative: all_nonnegative_signs(alpha),
        }
    }

    /// The two criteria are provably equivalent; disagreement would signal
    /// a broken coefficient expansion.
    pub fn consistent(&self) -> bool {
        self.shifts_nonnegative == self.coefficients_nonnegative
    }

    pub fn hypothesis_holds(&self) -> bool {
        self.shifts_nonnegative && self.coefficients_nonnegative
    }
}

/// One plane offset of the sweep.
#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub lambda: f64,
    /// Cap nodes evaluated (after puncture exclusions).
    pub n_cap: usize,
    /// Where the reflected singular point lands: inside the domain, on the
    /// staircase boundary band, or outside.
    pub origin_image: NodeClass,
    /// Per-component minimum and argmin; `None` on an empty cap.
    pub minima: Vec<Option<(f64, (i32, i32))>>,
    /// All component minima clear -tolerance (empty caps pass trivially).
    pub passed: bool,
}

impl SweepEntry {
    pub fn min_over_components(&self) -> Option<f64> {
        self.minima
            .iter()
            .filter_map(|m| m.map(|(v, _)| v))
            .fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.min(v))))
    }
}

/// Full record of a plane descent plus the derived defects and checks.
#[derive(Debug, Clone)]
pub struct MovingPlaneReport {
    /// Entries in descending offset order.
    pub entries: Vec<SweepEntry>,
    pub tolerance: f64,
    /// Smallest offset of the initial all-pass streak of the descent;
    /// `None` when the very first plane already fails.
    pub mu_hat: Option<f64>,
    /// Largest offset whose entry failed, if any.
    pub first_violation: Option<f64>,
    pub symmetry_defect: f64,
    pub monotonicity_defect: f64,
    pub shift_check: ShiftSignCheck,
    /// Observed range of c(x, lambda) across every swept offset, when a
    /// source was supplied.
    pub coupling_range: Option<(f64, f64)>,
    /// Lipschitz bound the coupling range is checked against.
    pub coupling_bound: Option<f64>,
}

impl MovingPlaneReport {
    /// The sweep confirms symmetry when the passing streak reaches the
    /// plane through the origin.
    pub fn symmetric(&self) -> bool {
        self.mu_hat == Some(0.0)
    }

    /// CSV rows (lambda, component, min_v, argmin_i, argmin_j); components
    /// are 1-based, empty caps contribute no rows.
    pub fn write_sweep_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "lambda,component,min_v,argmin_i,argmin_j")?;
        for entry in &self.entries {
            for (c, minimum) in entry.minima.iter().enumerate() {
                if let Some((v, (i, j))) = minimum {
                    writeln!(w, "{},{},{},{},{}", entry.lambda, c + 1, v, i, j)?;
                }
            }
        }
        Ok(())
    }

    /// Two-column plot data: offset and the minimum difference across
    /// components; empty caps are omitted.
    pub fn write_plotdata<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        for entry in &self.entries {
            if let Some(v) = entry.min_over_components() {
                writeln!(w, "{} {}", entry.lambda, v)?;
            }
        }
        Ok(())
    }

    /// Key-value summary lines for the run report.
    pub fn summary_lines(&self) -> Vec<String> {
        let mut lines = Vec::new();
        lines.push(format!("sweep_tolerance = {}", self.tolerance));
        match self.mu_hat {
            Some(mu) => lines.push(format!("mu_hat = {}", mu)),
            None => lines.push("mu_hat = none (first plane already fails)".to_string()),
        }
        match self.first_violation {
            Some(lambda) => lines.push(format!("first_violation = {}", lambda)),
            None => lines.push("first_violation = none".to_string()),
        }
        lines.push(format!("symmetry_defect = {}", self.symmetry_defect));
        lines.push(format!("monotonicity_defect = {}", self.monotonicity_defect));
        lines.push(format!(
            "shifts_nonnegative = {}",
            self.shift_check.shifts_nonnegative
        ));
        lines.push(format!(
            "coefficient_signs_nonnegative = {}",
            self.shift_check.coefficients_nonnegative
        ));
        lines.push(format!(
            "sign_criteria_agree = {}",
            self.shift_check.consistent()
        ));
        if let Some((lo, hi)) = self.coupling_range {
            lines.push(format!("coupling_range = [{}, {}]", lo, hi));
        }
        if let Some(bound) = self.coupling_bound {
            lines.push(format!("coupling_bound = {}", bound));
        }
        lines
    }
}

/// Where the reflection of the singular point lands for the plane with
/// half-grid index k. On-lattice punctures use the node classification;
/// otherwise the analytic membership test decides inside/outside.
fn origin_image_class(grid: &Grid, k: i64) -> NodeClass {
    if let Some((pi, pj)) = grid.puncture_node() {
        return grid.class_at((k - pi as i64) as i32, pj);
    }
    match grid.domain() {
        Some(spec) => {
            let image = reflect(spec.singular_point, k as f64 * grid.h() / 2.0);
            if spec.shape.contains(image) {
                NodeClass::Interior
            } else {
                NodeClass::Exterior
            }
        }
        None => NodeClass::Exterior,
    }
}

/// The descent schedule: every half-grid offset from 1 - h/2 down to 0.
pub fn descending_half_lattice_offsets(grid: &Grid) -> Vec<f64> {
    let h = grid.h();
    let top = 2 * grid.n_cells() as i64 - 1;
    (0..=top).rev().map(|k| k as f64 * h / 2.0).collect()
}

/// Smallest offset of the initial passing streak and the first (largest)
/// failing offset of a descent-ordered entry list.
fn passing_streak(entries: &[SweepEntry]) -> (Option<f64>, Option<f64>) {
    let mut mu = None;
    for entry in entries {
        if entry.passed {
            mu = Some(entry.lambda);
        } else {
            break;
        }
    }
    let first_violation = entries.iter().find(|e| !e.passed).map(|e| e.lambda);
    (mu, first_violation)
}

fn sweep_core(
    stack: &FieldStack,
    lambdas: &[f64],
    tol: f64,
    f: Option<&Nonlinearity>,
) -> Result<MovingPlaneReport, Error> {
    let grid = stack.grid();
    let mut entries = Vec::with_capacity(lambdas.len());
    let mut coupling_range: Option<(f64, f64)> = None;
    for &lambda in lambdas {
        let diff = reflection_diff(stack, lambda)?;
        let minima: Vec<Option<(f64, (i32, i32))>> =
            (0..stack.order()).map(|c| diff.component_min(c)).collect();
        let passed = minima
            .iter()
            .all(|m| m.is_none_or(|(v, _)| v >= -tol));
        let k = half_lattice_index(grid, lambda)?;
        entries.push(SweepEntry {
            lambda,
            n_cap: diff.n_evaluated(),
            origin_image: origin_image_class(grid, k),
            minima,
            passed,
        });
        if let Some(f) = f {
            if let Some((lo, hi)) = compute_c(stack, lambda, f)?.range() {
                coupling_range = Some(match coupling_range {
                    None => (lo, hi),
                    Some((l, h)) => (l.min(lo), h.max(hi)),
                });
            }
        }
    }
    let (mu_hat, first_violation) = passing_streak(&entries);
    Ok(MovingPlaneReport {
        entries,
        tolerance: tol,
        mu_hat,
        first_violation,
        symmetry_defect: symmetry_defect(stack),
        monotonicity_defect: monotonicity_defect(stack),
        shift_check: ShiftSignCheck::run(stack.alpha()),
        coupling_range,
        coupling_bound: f.map(|f| f.lipschitz()),
    })
}

/// Sweeps an explicit offset list (descending order expected; the streak
/// logic reads the list as given).
pub fn sweep_lambdas(
    stack: &FieldStack,
    lambdas: &[f64],
    tol: f64,
) -> Result<MovingPlaneReport, Error> {
    sweep_core(stack, lambdas, tol, None)
}

/// Full descent over every half-grid offset.
pub fn sweep_mu(stack: &FieldStack, tol: f64) -> Result<MovingPlaneReport, Error> {
    let lambdas = descending_half_lattice_offsets(stack.grid());
    sweep_core(stack, &lambdas, tol, None)
}

/// Full descent that additionally evaluates and range-checks the coupling
/// coefficient at every offset.
pub fn sweep_mu_with_coupling(
    stack: &FieldStack,
    f: &Nonlinearity,
    tol: f64,
) -> Result<MovingPlaneReport, Error> {
    let lambdas = descending_half_lattice_offsets(stack.grid());
    sweep_core(stack, &lambdas, tol, Some(f))
}
