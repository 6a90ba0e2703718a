//! Cell sets: staircase subsets of `R^n` as bit masks over grid cells.
//!
//! The cell decomposition is fine enough that every operation here is exact
//! and cellwise. Boolean operations between sets on different grids align
//! both operands on the merged grid first.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rat;

use super::grid::{Grid, GridJson, GridRefinement};

/// One coordinate of a principal upset corner: a rational or negative
/// infinity (no constraint on that axis).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Corner {
    NegInf,
    At(Rat),
}

#[derive(Clone, Debug)]
pub struct CellSet {
    grid: Grid,
    members: Vec<bool>,
}

impl CellSet {
    pub fn empty(grid: Grid) -> Self {
        let members = vec![false; grid.cell_count()];
        CellSet { grid, members }
    }

    pub fn all(grid: Grid) -> Self {
        let members = vec![true; grid.cell_count()];
        CellSet { grid, members }
    }

    pub fn from_flags(grid: Grid, members: Vec<bool>) -> Self {
        assert_eq!(members.len(), grid.cell_count());
        CellSet { grid, members }
    }

    pub fn from_cells(grid: Grid, cells: &[Vec<usize>]) -> Result<Self> {
        let mut set = CellSet::empty(grid);
        for cell in cells {
            if cell.len() != set.grid.dim() {
                return Err(Error::DimensionMismatch(format!(
                    "cell {cell:?} in a grid of dimension {}",
                    set.grid.dim()
                )));
            }
            for (a, &atom) in cell.iter().enumerate() {
                if atom >= set.grid.atoms(a) {
                    return Err(Error::Invalid(format!(
                        "cell {cell:?} is out of range on axis {a}"
                    )));
                }
            }
            let flat = set.grid.flat(cell);
            set.members[flat] = true;
        }
        Ok(set)
    }

    /// The set `[p, inf)` (componentwise), on the minimal grid containing the
    /// finite coordinates of the corner. Axes at `NegInf` are unconstrained.
    pub fn principal_upset(corner: &[Corner]) -> Result<Self> {
        Self::principal_upset_strict(corner, &vec![false; corner.len()])
    }

    /// Like [`CellSet::principal_upset`], but axes flagged strict exclude the
    /// face at the corner coordinate, i.e. use `(p_i, inf)` there. Strict
    /// axes produce sets that are no longer topologically closed.
    pub fn principal_upset_strict(corner: &[Corner], strict: &[bool]) -> Result<Self> {
        if corner.is_empty() {
            return Err(Error::Invalid("a corner needs at least one coordinate".into()));
        }
        if corner.len() != strict.len() {
            return Err(Error::DimensionMismatch("corner and strict flags differ in length".into()));
        }
        let axes: Vec<Vec<Rat>> = corner
            .iter()
            .map(|c| match c {
                Corner::NegInf => Vec::new(),
                Corner::At(r) => vec![*r],
            })
            .collect();
        let grid = Grid::new(axes)?;
        let thresholds: Vec<usize> = corner
            .iter()
            .zip(strict)
            .map(|(c, &s)| match c {
                Corner::NegInf => 0,
                Corner::At(_) => {
                    if s {
                        2
                    } else {
                        1
                    }
                }
            })
            .collect();
        let mut set = CellSet::empty(grid);
        for flat in 0..set.members.len() {
            let cell = set.grid.cell(flat);
            set.members[flat] = cell.iter().zip(&thresholds).all(|(&a, &t)| a >= t);
        }
        Ok(set)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn flags(&self) -> &[bool] {
        &self.members
    }

    pub fn contains_flat(&self, flat: usize) -> bool {
        self.members[flat]
    }

    pub fn contains_cell(&self, cell: &[usize]) -> bool {
        self.members[self.grid.flat(cell)]
    }

    pub fn contains_point(&self, point: &[Rat]) -> Result<bool> {
        let cell = self.grid.locate(point)?;
        Ok(self.contains_cell(&cell))
    }

    /// Member cells in flat order.
    pub fn cells(&self) -> Vec<Vec<usize>> {
        (0..self.members.len())
            .filter(|&f| self.members[f])
            .map(|f| self.grid.cell(f))
            .collect()
    }

    pub fn cell_count(&self) -> usize {
        self.members.iter().filter(|&&b| b).count()
    }

    pub fn is_empty_set(&self) -> bool {
        self.members.iter().all(|&b| !b)
    }

    /// Re-express this set on a finer grid.
    pub fn refine_to(&self, fine: &Grid, refinement: &GridRefinement) -> CellSet {
        let mut out = CellSet::empty(fine.clone());
        for flat in 0..out.members.len() {
            let coarse_cell = refinement.map_cell(&fine.cell(flat));
            out.members[flat] = self.contains_cell(&coarse_cell);
        }
        out
    }

    /// Both sets re-expressed on their merged grid.
    pub fn aligned_with(&self, other: &CellSet) -> Result<(CellSet, CellSet)> {
        if self.grid == other.grid {
            return Ok((self.clone(), other.clone()));
        }
        let (merged, r1, r2) = self.grid.merge(&other.grid)?;
        Ok((self.refine_to(&merged, &r1), other.refine_to(&merged, &r2)))
    }

    pub fn union(&self, other: &CellSet) -> Result<CellSet> {
        let (mut a, b) = self.aligned_with(other)?;
        for (x, y) in a.members.iter_mut().zip(&b.members) {
            *x |= y;
        }
        Ok(a)
    }

    pub fn intersect(&self, other: &CellSet) -> Result<CellSet> {
        let (mut a, b) = self.aligned_with(other)?;
        for (x, y) in a.members.iter_mut().zip(&b.members) {
            *x &= y;
        }
        Ok(a)
    }

    pub fn minus(&self, other: &CellSet) -> Result<CellSet> {
        let (mut a, b) = self.aligned_with(other)?;
        for (x, y) in a.members.iter_mut().zip(&b.members) {
            *x &= !y;
        }
        Ok(a)
    }

    pub fn complement(&self) -> CellSet {
        let members = self.members.iter().map(|&b| !b).collect();
        CellSet { grid: self.grid.clone(), members }
    }

    pub fn equal_as_sets(&self, other: &CellSet) -> Result<bool> {
        let (a, b) = self.aligned_with(other)?;
        Ok(a.members == b.members)
    }

    pub fn subset_of(&self, other: &CellSet) -> Result<bool> {
        let (a, b) = self.aligned_with(other)?;
        Ok(a.members.iter().zip(&b.members).all(|(&x, &y)| !x || y))
    }

    /// Componentwise order on cells; matches the coordinatewise order of the
    /// points they contain.
    pub fn cell_leq(a: &[usize], b: &[usize]) -> bool {
        a.iter().zip(b).all(|(&x, &y)| x <= y)
    }

    /// All cells above a member. Single ascending sweep: every predecessor
    /// along an axis has a smaller flat index.
    pub fn up_closure(&self) -> CellSet {
        let mut out = self.clone();
        let strides = self.grid.strides();
        for flat in 0..out.members.len() {
            if out.members[flat] {
                continue;
            }
            let cell = self.grid.cell(flat);
            for a in 0..self.grid.dim() {
                if cell[a] > 0 && out.members[flat - strides[a]] {
                    out.members[flat] = true;
                    break;
                }
            }
        }
        out
    }

    pub fn down_closure(&self) -> CellSet {
        let mut out = self.clone();
        let strides = self.grid.strides();
        for flat in (0..out.members.len()).rev() {
            if out.members[flat] {
                continue;
            }
            let cell = self.grid.cell(flat);
            for a in 0..self.grid.dim() {
                if cell[a] + 1 < self.grid.atoms(a) && out.members[flat + strides[a]] {
                    out.members[flat] = true;
                    break;
                }
            }
        }
        out
    }

    pub fn is_upset(&self) -> bool {
        self.up_closure().members == self.members
    }

    pub fn is_downset(&self) -> bool {
        self.down_closure().members == self.members
    }

    /// Interval: intersection of an upset and a downset, equivalently a set
    /// containing everything between two of its points.
    pub fn is_interval(&self) -> bool {
        let up = self.up_closure();
        let down = self.down_closure();
        self.members
            .iter()
            .zip(up.members.iter().zip(&down.members))
            .all(|(&m, (&u, &d))| m == (u && d))
    }

    /// Points approachable from above by sequences inside the set: per axis,
    /// a breakpoint atom contributes itself, an open interval `(a, b)`
    /// contributes `{a}` as well (nothing extra when `a = -inf`). Cellwise
    /// products of those contributions, over all member cells.
    pub fn closure_above(&self) -> CellSet {
        self.cellwise_expand(|atom| {
            if atom % 2 == 1 || atom == 0 {
                vec![atom]
            } else {
                vec![atom - 1, atom]
            }
        })
    }

    /// Dual of [`CellSet::closure_above`] through complements.
    pub fn interior_above(&self) -> CellSet {
        self.complement().closure_above().complement()
    }

    /// Ordinary topological closure: open intervals contribute both of their
    /// endpoints, breakpoint singletons are already closed.
    pub fn topological_closure(&self) -> CellSet {
        self.cellwise_expand(|atom| {
            if atom % 2 == 1 {
                vec![atom]
            } else {
                let mut out = Vec::new();
                if atom > 0 {
                    out.push(atom - 1);
                }
                out.push(atom);
                out.push(atom + 1); // filtered when out of range
                out
            }
        })
    }

    fn cellwise_expand(&self, per_axis: impl Fn(usize) -> Vec<usize>) -> CellSet {
        let mut out = CellSet::empty(self.grid.clone());
        let dim = self.grid.dim();
        for flat in 0..self.members.len() {
            if !self.members[flat] {
                continue;
            }
            let cell = self.grid.cell(flat);
            let options: Vec<Vec<usize>> = (0..dim)
                .map(|a| {
                    per_axis(cell[a])
                        .into_iter()
                        .filter(|&x| x < self.grid.atoms(a))
                        .collect()
                })
                .collect();
            let mut choice = vec![0usize; dim];
            loop {
                let target: Vec<usize> = (0..dim).map(|a| options[a][choice[a]]).collect();
                out.members[self.grid.flat(&target)] = true;
                let mut a = 0;
                loop {
                    if a == dim {
                        break;
                    }
                    choice[a] += 1;
                    if choice[a] < options[a].len() {
                        break;
                    }
                    choice[a] = 0;
                    a += 1;
                }
                if a == dim {
                    break;
                }
            }
        }
        out
    }

    /// Zigzag-connected components: components of the comparability graph on
    /// member cells. Ordered by least flat member index.
    pub fn order_components(&self) -> Vec<CellSet> {
        let members: Vec<usize> = (0..self.members.len()).filter(|&f| self.members[f]).collect();
        let cells: Vec<Vec<usize>> = members.iter().map(|&f| self.grid.cell(f)).collect();
        self.group_components(&members, |i, j| {
            CellSet::cell_leq(&cells[i], &cells[j]) || CellSet::cell_leq(&cells[j], &cells[i])
        })
    }

    /// Topologically connected components: two member cells are adjacent when
    /// the closure of one meets the other. Per axis that means equal atoms,
    /// or an open interval next to one of its endpoints; the same side of the
    /// closure must work on every axis simultaneously.
    pub fn topological_components(&self) -> Vec<CellSet> {
        fn closure_meets(a: usize, b: usize) -> bool {
            a == b || (a % 2 == 0 && (a == b + 1 || b == a + 1))
        }
        let members: Vec<usize> = (0..self.members.len()).filter(|&f| self.members[f]).collect();
        let cells: Vec<Vec<usize>> = members.iter().map(|&f| self.grid.cell(f)).collect();
        self.group_components(&members, |i, j| {
            let fwd = cells[i].iter().zip(&cells[j]).all(|(&a, &b)| closure_meets(a, b));
            let bwd = cells[i].iter().zip(&cells[j]).all(|(&a, &b)| closure_meets(b, a));
            fwd || bwd
        })
    }

    fn group_components(&self, members: &[usize], adjacent: impl Fn(usize, usize) -> bool) -> Vec<CellSet> {
        let m = members.len();
        let mut dsu: Vec<usize> = (0..m).collect();
        fn find(dsu: &mut [usize], mut i: usize) -> usize {
            while dsu[i] != i {
                dsu[i] = dsu[dsu[i]];
                i = dsu[i];
            }
            i
        }
        for i in 0..m {
            for j in i + 1..m {
                if adjacent(i, j) {
                    let (ri, rj) = (find(&mut dsu, i), find(&mut dsu, j));
                    if ri != rj {
                        dsu[rj.max(ri)] = rj.min(ri);
                    }
                }
            }
        }
        let mut by_root: std::collections::BTreeMap<usize, Vec<usize>> = std::collections::BTreeMap::new();
        for i in 0..m {
            let r = find(&mut dsu, i);
            by_root.entry(members[r]).or_default().push(members[i]);
        }
        by_root
            .into_values()
            .map(|flats| {
                let mut comp = CellSet::empty(self.grid.clone());
                for f in flats {
                    comp.members[f] = true;
                }
                comp
            })
            .collect()
    }

    /// Fixed-point test characterizing finite unions of differences of
    /// closed staircase upsets: the set equals both its closure-from-above
    /// and its interior-from-above.
    pub fn is_closed_class(&self) -> bool {
        self.closure_above().members == self.members && self.interior_above().members == self.members
    }

    pub fn is_closed_class_interval(&self) -> Result<bool> {
        if !self.is_interval() {
            return Err(Error::NotInterval(self.describe()));
        }
        Ok(self.is_closed_class())
    }

    /// Write an interval in the closed class as `U \ V` for closed staircase
    /// upsets `U = closure(up-closure)` and `V = closure(complement of
    /// down-closure)`. The reconstruction `U \ V == self` is verified.
    pub fn closed_interval_decompose(&self) -> Result<(CellSet, CellSet)> {
        if !self.is_interval() {
            return Err(Error::NotInterval(self.describe()));
        }
        if !self.is_closed_class() {
            return Err(Error::NotClosedClass(self.closed_class_witness()));
        }
        let u = self.up_closure().closure_above();
        let v = self.down_closure().complement().closure_above();
        let reconstructed = u.minus(&v)?;
        assert!(
            reconstructed.equal_as_sets(self)?,
            "decomposition failed to reconstruct a closed-class interval"
        );
        Ok((u, v))
    }

    fn describe(&self) -> String {
        format!("set of {} cells in dimension {}", self.cell_count(), self.dim())
    }

    fn closed_class_witness(&self) -> String {
        let cl = self.closure_above();
        for f in 0..self.members.len() {
            if cl.members[f] != self.members[f] {
                return format!(
                    "cell {:?} is a limit from above of the set but not in it",
                    self.grid.cell(f)
                );
            }
        }
        let int = self.interior_above();
        for f in 0..self.members.len() {
            if int.members[f] != self.members[f] {
                return format!(
                    "cell {:?} is a limit from above of the complement",
                    self.grid.cell(f)
                );
            }
        }
        self.describe()
    }

    /// Two-dimensional sketch: rows are the second axis top-down, columns the
    /// first axis left-right; `#` marks member cells.
    pub fn render_ascii(&self) -> Result<String> {
        if self.dim() != 2 {
            return Err(Error::Invalid(format!(
                "ascii rendering needs dimension 2, got {}",
                self.dim()
            )));
        }
        let mut s = String::new();
        for y in (0..self.grid.atoms(1)).rev() {
            for x in 0..self.grid.atoms(0) {
                s.push(if self.contains_cell(&[x, y]) { '#' } else { '.' });
            }
            s.push('\n');
        }
        let bp = |axis: usize| {
            self.grid
                .breakpoints(axis)
                .iter()
                .map(|r| r.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        };
        s.push_str(&format!("x: [{}]  y: [{}]\n", bp(0), bp(1)));
        Ok(s)
    }

    pub fn to_json(&self) -> CellSetJson {
        CellSetJson {
            grid: self.grid.to_json(),
            cells: self.cells(),
        }
    }

    pub fn from_json(json: &CellSetJson) -> Result<Self> {
        CellSet::from_cells(Grid::from_json(&json.grid)?, &json.cells)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CellSetJson {
    pub grid: GridJson,
    pub cells: Vec<Vec<usize>>,
}
