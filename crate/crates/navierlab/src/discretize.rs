//! Five-point discretization of (-Delta + alpha) with homogeneous
//! Dirichlet data on the staircase grid.
//!
//! At an interior node with spacing h the stencil reads
//!
//! ```text
//! (-Delta_h u)(i,j) = (4 u(i,j) - u(i-1,j) - u(i+1,j) - u(i,j-1) - u(i,j+1)) / h^2
//! ```
//!
//! Stencil legs reaching boundary or exterior nodes are dropped, which is
//! exactly the homogeneous Dirichlet condition on the staircase band. With
//! alpha >= 0 the matrix is symmetric, weakly diagonally dominant with
//! positive diagonal and nonpositive off-diagonal entries, so it is an
//! M-matrix and the discrete comparison principle applies: this structure
//! is what the moving-plane sweep leans on, and it is asserted at assembly.

use crate::error::Error;
use crate::geometry::{Grid, NodeClass};

/// Symmetric sparse operator in compressed-row storage over the interior
/// unknowns of a grid. Column indices are strictly increasing within each
/// row.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    shift: f64,
    spacing: f64,
}

impl SparseOperator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The zero-order shift alpha baked into the diagonal.
    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Entry (row, col), zero when not stored.
    pub fn entry(&self, row: usize, col: usize) -> f64 {
        let lo = self.row_ptr[row];
        let hi = self.row_ptr[row + 1];
        match self.col_idx[lo..hi].binary_search(&col) {
            Ok(pos) => self.values[lo + pos],
            Err(_) => 0.0,
        }
    }

    /// True when the stored pattern and values are symmetric.
    pub fn is_symmetric(&self) -> bool {
        for row in 0..self.dim {
            for idx in self.row_ptr[row]..self.row_ptr[row + 1] {
                let col = self.col_idx[idx];
                if self.entry(col, row) != self.values[idx] {
                    return false;
                }
            }
        }
        true
    }

    /// Row iteration as (col, value) pairs.
    pub fn row(&self, row: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.row_ptr[row];
        let hi = self.row_ptr[row + 1];
        self.col_idx[lo..hi]
            .iter()
            .copied()
            .zip(self.values[lo..hi].iter().copied())
    }

    /// Coordinate-format text dump: one "row col value" line per entry.
    pub fn write_coo<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        for row in 0..self.dim {
            for idx in self.row_ptr[row]..self.row_ptr[row + 1] {
                writeln!(w, "{} {} {}", row, self.col_idx[idx], self.values[idx])?;
            }
        }
        Ok(())
    }
}

/// Assembles (-Delta_h + shift) over the interior unknowns of the grid.
/// Rejects negative shifts; the M-matrix structure is asserted.
pub fn assemble(grid: &Grid, shift: f64) -> Result<SparseOperator, Error> {
    if shift < 0.0 {
        return Err(Error::NegativeShift { value: shift });
    }
    if !shift.is_finite() {
        return Err(Error::InvalidParameter {
            name: "shift",
            value: shift,
            constraint: "finite",
        });
    }
    let h = grid.h();
    let inv_h2 = 1.0 / (h * h);
    let dim = grid.n_interior();
    let mut row_ptr = Vec::with_capacity(dim + 1);
    let mut col_idx = Vec::with_capacity(dim * 5);
    let mut values = Vec::with_capacity(dim * 5);
    row_ptr.push(0);

    for (row, &(i, j)) in grid.interior_nodes().iter().enumerate() {
        // neighbors in unknown order: the (j, i) numbering makes the
        // south, west, diagonal, east, north columns strictly increasing
        let push_neighbor = |col_idx: &mut Vec<usize>, values: &mut Vec<f64>, ni, nj| {
            match grid.class_at(ni, nj) {
                NodeClass::Interior => {
                    let col = grid
                        .unknown_index(ni, nj)
                        .expect("interior node has an unknown");
                    col_idx.push(col);
                    values.push(-inv_h2);
                }
                NodeClass::Boundary => {} // Dirichlet value 0: leg dropped
                NodeClass::Exterior => {
                    unreachable!("interior node with unclassified neighbor")
                }
            }
        };
        push_neighbor(&mut col_idx, &mut values, i, j - 1);
        push_neighbor(&mut col_idx, &mut values, i - 1, j);
        col_idx.push(row);
        values.push(4.0 * inv_h2 + shift);
        push_neighbor(&mut col_idx, &mut values, i + 1, j);
        push_neighbor(&mut col_idx, &mut values, i, j + 1);

        // M-matrix structure: positive diagonal, nonpositive off-diagonal,
        // weak diagonal dominance (up to 4 legs of inv_h2 each)
        let start = row_ptr[row];
        let mut offdiag_sum = 0.0;
        for (c, v) in col_idx[start..].iter().zip(&values[start..]) {
            if *c == row {
                assert!(*v > 0.0, "diagonal must be positive");
            } else {
                assert!(*v <= 0.0, "off-diagonal must be nonpositive");
                offdiag_sum += v.abs();
            }
        }
        assert!(
            4.0 * inv_h2 + shift >= offdiag_sum - 1e-9,
            "row must be diagonally dominant"
        );
        debug_assert!(col_idx[start..].windows(2).all(|w| w[0] < w[1]));
        row_ptr.push(col_idx.len());
    }

    Ok(SparseOperator {
        dim,
        row_ptr,
        col_idx,
        values,
        shift,
        spacing: h,
    })
}

/// Matrix-vector product.
pub fn apply(op: &SparseOperator, field: &[f64]) -> Result<Vec<f64>, Error> {
    if field.len() != op.dim {
        return Err(Error::DimensionMismatch {
            expected: op.dim,
            got: field.len(),
        });
    }
    let mut out = vec![0.0; op.dim];
    for (row, slot) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for idx in op.row_ptr[row]..op.row_ptr[row + 1] {
            acc += op.values[idx] * field[op.col_idx[idx]];
        }
        *slot = acc;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_grid, DomainSpec, Shape};

    #[test]
    fn single_node_operator_is_the_scalar_stencil_weight() {
        let grid = Grid::from_interior_nodes(1.0, &[(0, 0)]).unwrap();
        let op = assemble(&grid, 0.0).unwrap();
        assert_eq!(op.dim(), 1);
        assert_eq!(op.entry(0, 0), 4.0, "4/h^2 with h = 1 and no neighbors");
        let out = apply(&op, &[2.0]).unwrap();
        assert_eq!(out, vec![8.0]);
    }

    #[test]
    fn two_node_strip_matches_hand_assembly() {
        let grid = Grid::from_interior_nodes(1.0, &[(0, 0), (1, 0)]).unwrap();
        let op = assemble(&grid, 0.0).unwrap();
        assert_eq!(op.dim(), 2);
        assert_eq!(op.entry(0, 0), 4.0);
        assert_eq!(op.entry(1, 1), 4.0);
        assert_eq!(op.entry(0, 1), -1.0);
        assert_eq!(op.entry(1, 0), -1.0);
        assert!(op.is_symmetric());
    }

    #[test]
    fn shift_moves_only_the_diagonal() {
        let grid = Grid::from_interior_nodes(0.5, &[(0, 0), (1, 0)]).unwrap();
        let base = assemble(&grid, 0.0).unwrap();
        let shifted = assemble(&grid, 3.0).unwrap();
        assert_eq!(shifted.entry(0, 0), base.entry(0, 0) + 3.0);
        assert_eq!(shifted.entry(0, 1), base.entry(0, 1));
        assert_eq!(shifted.shift(), 3.0);
    }

    #[test]
    fn negative_shift_is_rejected() {
        let grid = Grid::from_interior_nodes(1.0, &[(0, 0)]).unwrap();
        assert!(matches!(
            assemble(&grid, -0.5),
            Err(Error::NegativeShift { .. })
        ));
    }

    #[test]
    fn operator_on_disc_is_symmetric_with_expected_pattern() {
        let grid = build_grid(&DomainSpec::new(Shape::Disc { radius: 1.0 }), 8).unwrap();
        let op = assemble(&grid, 1.5).unwrap();
        assert!(op.is_symmetric());
        let h2 = grid.h() * grid.h();
        for row in 0..op.dim() {
            assert_eq!(op.entry(row, row), 4.0 / h2 + 1.5);
            for (col, v) in op.row(row) {
                if col != row {
                    assert_eq!(v, -1.0 / h2);
                }
            }
        }
    }

    #[test]
    fn stencil_is_exact_on_quadratics() {
        // q(x) = c0 + c1 x1 + c2 x2 + c3 x1^2 + c4 x1 x2 + c5 x2^2 has
        // -Delta q + alpha q = -(2 c3 + 2 c5) + alpha q, and second central
        // differences reproduce that exactly (cross terms cancel)
        let grid = build_grid(&DomainSpec::new(Shape::Disc { radius: 1.0 }), 16).unwrap();
        let alpha = 2.0;
        let op = assemble(&grid, alpha).unwrap();
        let (c0, c1, c2, c3, c4, c5) = (1.0, 2.0, -1.0, 3.0, 1.5, 0.5);
        let q = |x: f64, y: f64| c0 + c1 * x + c2 * y + c3 * x * x + c4 * x * y + c5 * y * y;
        let field: Vec<f64> = grid
            .interior_nodes()
            .iter()
            .map(|&(i, j)| {
                let p = grid.node_point(i, j);
                q(p.x1, p.x2)
            })
            .collect();
        let image = apply(&op, &field).unwrap();
        let mut checked = 0;
        for (k, &(i, j)) in grid.interior_nodes().iter().enumerate() {
            let all_interior = [(i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)]
                .iter()
                .all(|&(a, b)| grid.unknown_index(a, b).is_some());
            if !all_interior {
                continue; // dropped legs see the true boundary data, not 0
            }
            let p = grid.node_point(i, j);
            let exact = -(2.0 * c3 + 2.0 * c5) + alpha * q(p.x1, p.x2);
            assert!(
                (image[k] - exact).abs() <= 1e-10,
                "stencil not exact on quadratic at ({}, {}): {} vs {}",
                i,
                j,
                image[k],
                exact
            );
            checked += 1;
        }
        assert!(checked > 100, "need a meaningful interior sample");
    }

    #[test]
    fn operator_commutes_with_the_mirror_permutation() {
        let grid = build_grid(&DomainSpec::new(Shape::Disc { radius: 1.0 }), 8).unwrap();
        let op = assemble(&grid, 0.7).unwrap();
        let perm: Vec<usize> = (0..op.dim())
            .map(|k| grid.mirror_unknown(k).expect("conforming grid"))
            .collect();
        for row in 0..op.dim() {
            for (col, v) in op.row(row) {
                assert_eq!(
                    op.entry(perm[row], perm[col]),
                    v,
                    "entry ({}, {}) must survive mirroring",
                    row,
                    col
                );
            }
        }
    }

    #[test]
    fn apply_checks_dimensions() {
        let grid = Grid::from_interior_nodes(1.0, &[(0, 0)]).unwrap();
        let op = assemble(&grid, 0.0).unwrap();
        assert!(matches!(
            apply(&op, &[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn coo_dump_lists_every_entry() {
        let grid = Grid::from_interior_nodes(1.0, &[(0, 0), (1, 0)]).unwrap();
        let op = assemble(&grid, 0.0).unwrap();
        let mut buf = Vec::new();
        op.write_coo(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), op.nnz());
        assert!(lines.contains(&"0 0 4"));
        assert!(lines.contains(&"0 1 -1"));
    }
}
