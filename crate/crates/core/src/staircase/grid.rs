//! Breakpoint grids and their common refinements.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rat;

/// Per-axis strictly increasing rational breakpoints cutting `R^n` into
/// cells. An axis with breakpoints `t_1 < ... < t_k` has `2k + 1` atoms,
/// indexed left to right:
///
/// ```text
/// 0: (-inf, t_1)   1: {t_1}   2: (t_1, t_2)   ...   2k-1: {t_k}   2k: (t_k, inf)
/// ```
///
/// so even indices are open intervals and odd indices are breakpoints. An
/// axis may have no breakpoints at all (a single atom covering the line).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Grid {
    axes: Vec<Vec<Rat>>,
}

impl Grid {
    pub fn new(axes: Vec<Vec<Rat>>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::Invalid("a grid needs at least one axis".into()));
        }
        for (i, bp) in axes.iter().enumerate() {
            if bp.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Invalid(format!(
                    "axis {i} breakpoints are not strictly increasing"
                )));
            }
        }
        Ok(Grid { axes })
    }

    /// Grid with no breakpoints: one cell covering all of `R^dim`.
    pub fn trivial(dim: usize) -> Result<Self> {
        Grid::new(vec![Vec::new(); dim])
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Vec<Rat>] {
        &self.axes
    }

    pub fn breakpoints(&self, axis: usize) -> &[Rat] {
        &self.axes[axis]
    }

    pub fn atoms(&self, axis: usize) -> usize {
        2 * self.axes[axis].len() + 1
    }

    pub fn cell_count(&self) -> usize {
        (0..self.dim()).map(|a| self.atoms(a)).product()
    }

    /// Row-major strides: the last axis varies fastest.
    pub fn strides(&self) -> Vec<usize> {
        let n = self.dim();
        let mut s = vec![1; n];
        for a in (0..n.saturating_sub(1)).rev() {
            s[a] = s[a + 1] * self.atoms(a + 1);
        }
        s
    }

    pub fn flat(&self, cell: &[usize]) -> usize {
        debug_assert_eq!(cell.len(), self.dim());
        let strides = self.strides();
        cell.iter().zip(&strides).map(|(&c, &s)| c * s).sum()
    }

    pub fn cell(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        for a in (0..self.dim()).rev() {
            let m = self.atoms(a);
            out[a] = flat % m;
            flat /= m;
        }
        out
    }

    /// Atom index containing the coordinate `x` on `axis`.
    pub fn atom_containing(&self, axis: usize, x: Rat) -> usize {
        match self.axes[axis].binary_search(&x) {
            Ok(i) => 2 * i + 1,
            Err(i) => 2 * i,
        }
    }

    /// Cell containing a point of `R^n`.
    pub fn locate(&self, point: &[Rat]) -> Result<Vec<usize>> {
        if point.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "point of dimension {} in a grid of dimension {}",
                point.len(),
                self.dim()
            )));
        }
        Ok((0..self.dim()).map(|a| self.atom_containing(a, point[a])).collect())
    }

    /// Least common refinement, with the atom maps that send the merged
    /// grid's cells onto each input's cells. Each map is monotone along every
    /// axis and its fibers are boxes of consecutive atoms.
    pub fn merge(&self, other: &Grid) -> Result<(Grid, GridRefinement, GridRefinement)> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "grids of dimension {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        let mut axes = Vec::with_capacity(self.dim());
        for a in 0..self.dim() {
            let mut bp: Vec<Rat> = self.axes[a].iter().chain(&other.axes[a]).copied().collect();
            bp.sort_unstable();
            bp.dedup();
            axes.push(bp);
        }
        let merged = Grid::new(axes)?;
        let to_self = merged.refinement_onto(self);
        let to_other = merged.refinement_onto(other);
        Ok((merged, to_self, to_other))
    }

    /// Atom map from `self` (which must refine `coarse` axis-wise) onto
    /// `coarse`: every fine atom lands in the unique coarse atom containing it.
    pub fn refinement_onto(&self, coarse: &Grid) -> GridRefinement {
        assert_eq!(self.dim(), coarse.dim());
        let mut per_axis = Vec::with_capacity(self.dim());
        for a in 0..self.dim() {
            let fine_bp = &self.axes[a];
            debug_assert!(coarse.axes[a].iter().all(|t| fine_bp.contains(t)));
            let mut map = Vec::with_capacity(self.atoms(a));
            for atom in 0..self.atoms(a) {
                if atom % 2 == 1 {
                    map.push(coarse.atom_containing(a, fine_bp[atom / 2]));
                } else if atom == 0 {
                    map.push(0);
                } else {
                    // open interval with lower endpoint fine_bp[atom/2 - 1];
                    // no coarse breakpoint lies strictly inside, so the count
                    // of coarse breakpoints at or below the endpoint places it
                    let lower = fine_bp[atom / 2 - 1];
                    let m = coarse.axes[a].partition_point(|t| *t <= lower);
                    map.push(2 * m);
                }
            }
            per_axis.push(map);
        }
        GridRefinement { per_axis }
    }

    pub fn to_json(&self) -> GridJson {
        GridJson { breakpoints: self.axes.clone() }
    }

    pub fn from_json(json: &GridJson) -> Result<Self> {
        Grid::new(json.breakpoints.clone())
    }
}

/// Cellwise projection from a finer grid onto a coarser one, stored per axis.
#[derive(Clone, Debug)]
pub struct GridRefinement {
    per_axis: Vec<Vec<usize>>,
}

impl GridRefinement {
    pub fn map_atom(&self, axis: usize, atom: usize) -> usize {
        self.per_axis[axis][atom]
    }

    pub fn map_cell(&self, cell: &[usize]) -> Vec<usize> {
        cell.iter().enumerate().map(|(a, &c)| self.per_axis[a][c]).collect()
    }

    pub fn axis_maps(&self) -> &[Vec<usize>] {
        &self.per_axis
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridJson {
    pub breakpoints: Vec<Vec<Rat>>,
}
