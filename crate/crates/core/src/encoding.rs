//! Encodings: monotone maps from `R^n` onto a finite poset, constant on the
//! cells of a staircase grid.
//!
//! An encoding is stored as one target index per grid cell. Everything a
//! module pulled back along the encoding can see happens on the target poset,
//! so the cell grid only has to be fine enough to make the fibers unions of
//! cells.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poset::{FinitePoset, MonotoneMap, PosetJson};
use crate::rational::Rat;
use crate::staircase::{CellSet, Grid, GridJson};

#[derive(Clone, Debug)]
pub struct Encoding {
    grid: Grid,
    target: FinitePoset,
    labels: Vec<usize>,
}

/// Two encodings re-expressed through a single one: `encoding` composed with
/// `to_first` recovers the first input, with `to_second` the second.
#[derive(Clone, Debug)]
pub struct CommonEncoding {
    pub encoding: Encoding,
    pub to_first: MonotoneMap,
    pub to_second: MonotoneMap,
}

/// An encoding whose fibers are order-connected and whose target order is
/// generated by cell adjacencies, together with the projection back onto the
/// original target.
#[derive(Clone, Debug)]
pub struct EncodingRefinement {
    pub refined: Encoding,
    pub proj: MonotoneMap,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FiberClassReport {
    pub element: String,
    pub cells: usize,
    pub interval: bool,
    pub closed_class: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClosedClassReport {
    pub all_in_class: bool,
    pub fibers: Vec<FiberClassReport>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EncodingJson {
    pub grid: GridJson,
    pub target: PosetJson,
    pub labels: Vec<usize>,
}

impl Encoding {
    /// Build an encoding from per-cell target indices. The map must be
    /// monotone across adjacent cells; target elements with empty fibers are
    /// dropped and their names returned.
    pub fn new(grid: Grid, target: FinitePoset, labels: Vec<usize>) -> Result<(Self, Vec<String>)> {
        if labels.len() != grid.cell_count() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} cells",
                labels.len(),
                grid.cell_count()
            )));
        }
        for (flat, &l) in labels.iter().enumerate() {
            if l >= target.len() {
                return Err(Error::UnknownElement(format!(
                    "cell {:?} is labeled {l}, but the target has {} elements",
                    grid.cell(flat),
                    target.len()
                )));
            }
        }
        let strides = grid.strides();
        for flat in 0..labels.len() {
            let cell = grid.cell(flat);
            for a in 0..grid.dim() {
                if cell[a] + 1 >= grid.atoms(a) {
                    continue;
                }
                let above = flat + strides[a];
                if !target.leq(labels[flat], labels[above]) {
                    return Err(Error::NotMonotone {
                        lower: format!("cell {cell:?}"),
                        upper: format!("cell {:?}", grid.cell(above)),
                        lower_image: target.id(labels[flat]).to_string(),
                        upper_image: target.id(labels[above]).to_string(),
                    });
                }
            }
        }
        let mut used = vec![false; target.len()];
        for &l in &labels {
            used[l] = true;
        }
        if used.iter().all(|&u| u) {
            return Ok((Encoding { grid, target, labels }, Vec::new()));
        }
        let keep: Vec<usize> = (0..target.len()).filter(|&i| used[i]).collect();
        let pruned: Vec<String> = (0..target.len())
            .filter(|&i| !used[i])
            .map(|i| target.id(i).to_string())
            .collect();
        let mut reindex = vec![usize::MAX; target.len()];
        for (new, &old) in keep.iter().enumerate() {
            reindex[old] = new;
        }
        let target = target.restrict(&keep);
        let labels = labels.into_iter().map(|l| reindex[l]).collect();
        Ok((Encoding { grid, target, labels }, pruned))
    }

    /// Build an encoding from one fiber per target element. The fibers must
    /// partition the ambient space; they are aligned on a merged grid first.
    pub fn from_fibers(target: FinitePoset, fibers: &[CellSet]) -> Result<(Self, Vec<String>)> {
        if fibers.len() != target.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} fibers for a target of {} elements",
                fibers.len(),
                target.len()
            )));
        }
        if fibers.is_empty() {
            return Err(Error::Invalid("an encoding needs at least one fiber".into()));
        }
        let mut grid = fibers[0].grid().clone();
        for f in &fibers[1..] {
            grid = grid.merge(f.grid())?.0;
        }
        let aligned: Vec<CellSet> = fibers
            .iter()
            .map(|f| f.refine_to(&grid, &grid.refinement_onto(f.grid())))
            .collect();
        let mut labels = vec![usize::MAX; grid.cell_count()];
        for (t, f) in aligned.iter().enumerate() {
            for flat in 0..grid.cell_count() {
                if !f.contains_flat(flat) {
                    continue;
                }
                if labels[flat] != usize::MAX {
                    return Err(Error::Invalid(format!(
                        "fibers of {:?} and {:?} overlap at cell {:?}",
                        target.id(labels[flat]),
                        target.id(t),
                        grid.cell(flat)
                    )));
                }
                labels[flat] = t;
            }
        }
        if let Some(flat) = labels.iter().position(|&l| l == usize::MAX) {
            return Err(Error::Invalid(format!(
                "no fiber covers cell {:?}",
                grid.cell(flat)
            )));
        }
        Encoding::new(grid, target, labels)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn target(&self) -> &FinitePoset {
        &self.target
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label_of_flat(&self, flat: usize) -> usize {
        self.labels[flat]
    }

    pub fn element_at_point(&self, point: &[Rat]) -> Result<&str> {
        let cell = self.grid.locate(point)?;
        Ok(self.target.id(self.labels[self.grid.flat(&cell)]))
    }

    pub fn fiber(&self, t: usize) -> CellSet {
        let flags = self.labels.iter().map(|&l| l == t).collect();
        CellSet::from_flags(self.grid.clone(), flags)
    }

    pub fn all_fibers(&self) -> Vec<CellSet> {
        (0..self.target.len()).map(|t| self.fiber(t)).collect()
    }

    /// Preimage of the down-set of `t`, as a cell set.
    pub fn sublevel(&self, t: usize) -> CellSet {
        let flags = self.labels.iter().map(|&l| self.target.leq(l, t)).collect();
        CellSet::from_flags(self.grid.clone(), flags)
    }

    /// Re-express this encoding on a finer grid without changing the map.
    pub fn refine_grid(&self, fine: &Grid) -> Result<Encoding> {
        let refinement = fine.refinement_onto(&self.grid);
        let labels: Vec<usize> = (0..fine.cell_count())
            .map(|f| self.labels[self.grid.flat(&refinement.map_cell(&fine.cell(f)))])
            .collect();
        Ok(Encoding {
            grid: fine.clone(),
            target: self.target.clone(),
            labels,
        })
    }

    /// Factor two encodings through one: cells are labeled by the realized
    /// pairs of their labels, ordered as in the product poset.
    pub fn common_encoding(&self, other: &Encoding) -> Result<CommonEncoding> {
        let (grid, _, _) = self.grid.merge(other.grid())?;
        let a = self.refine_grid(&grid)?;
        let b = other.refine_grid(&grid)?;
        let n2 = other.target.len();
        let product = self.target.product(&other.target);
        let realized: BTreeSet<usize> = a
            .labels
            .iter()
            .zip(&b.labels)
            .map(|(&x, &y)| x * n2 + y)
            .collect();
        let keep: Vec<usize> = realized.into_iter().collect();
        let common = product.restrict(&keep);
        let position = |pair: usize| keep.binary_search(&pair).expect("realized pair");
        let labels: Vec<usize> = a
            .labels
            .iter()
            .zip(&b.labels)
            .map(|(&x, &y)| position(x * n2 + y))
            .collect();
        let to_first = MonotoneMap::new(
            common.clone(),
            self.target.clone(),
            keep.iter().map(|&p| p / n2).collect(),
        )?;
        let to_second = MonotoneMap::new(
            common.clone(),
            other.target.clone(),
            keep.iter().map(|&p| p % n2).collect(),
        )?;
        let (encoding, pruned) = Encoding::new(grid, common, labels)?;
        assert!(pruned.is_empty(), "realized pairs all have nonempty fibers");
        Ok(CommonEncoding { encoding, to_first, to_second })
    }

    /// Split every fiber into its order-connected pieces and regenerate the
    /// target order from cell adjacencies. The result always satisfies
    /// [`Encoding::satisfies_ff_cell_conditions`]; `proj` maps each piece
    /// back to the element it came from.
    pub fn connective_refinement(&self) -> Result<EncodingRefinement> {
        let mut ids = Vec::new();
        let mut back = Vec::new();
        let mut comp_label = vec![usize::MAX; self.labels.len()];
        for t in 0..self.target.len() {
            for (k, comp) in self.fiber(t).order_components().into_iter().enumerate() {
                let idx = ids.len();
                ids.push(format!("{}#{k}", self.target.id(t)));
                back.push(t);
                for flat in 0..comp_label.len() {
                    if comp.contains_flat(flat) {
                        comp_label[flat] = idx;
                    }
                }
            }
        }
        let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
        let strides = self.grid.strides();
        for flat in 0..comp_label.len() {
            let cell = self.grid.cell(flat);
            for a in 0..self.grid.dim() {
                if cell[a] + 1 < self.grid.atoms(a) {
                    edges.insert((comp_label[flat], comp_label[flat + strides[a]]));
                }
            }
        }
        let relations: Vec<(String, String)> = edges
            .into_iter()
            .map(|(u, v)| (ids[u].clone(), ids[v].clone()))
            .collect();
        let refined_target = FinitePoset::from_relations(ids, &relations)?;
        let proj = MonotoneMap::new(refined_target.clone(), self.target.clone(), back)?;
        let (refined, pruned) = Encoding::new(self.grid.clone(), refined_target, comp_label)?;
        assert!(pruned.is_empty(), "every component is a nonempty fiber");
        Ok(EncodingRefinement { refined, proj })
    }

    /// Whether restriction along this encoding is full and faithful onto
    /// modules over the target: every fiber is nonempty and order-connected,
    /// and the target order is exactly the one generated by cell adjacencies.
    pub fn satisfies_ff_cell_conditions(&self) -> bool {
        let n = self.target.len();
        let mut used = vec![false; n];
        for &l in &self.labels {
            used[l] = true;
        }
        if !used.iter().all(|&u| u) {
            return false;
        }
        for t in 0..n {
            if self.fiber(t).order_components().len() != 1 {
                return false;
            }
        }
        let mut generated = vec![false; n * n];
        for i in 0..n {
            generated[i * n + i] = true;
        }
        let strides = self.grid.strides();
        for flat in 0..self.labels.len() {
            let cell = self.grid.cell(flat);
            for a in 0..self.grid.dim() {
                if cell[a] + 1 < self.grid.atoms(a) {
                    generated[self.labels[flat] * n + self.labels[flat + strides[a]]] = true;
                }
            }
        }
        for k in 0..n {
            for i in 0..n {
                if generated[i * n + k] {
                    for j in 0..n {
                        if generated[k * n + j] {
                            generated[i * n + j] = true;
                        }
                    }
                }
            }
        }
        (0..n).all(|i| (0..n).all(|j| generated[i * n + j] == self.target.leq(i, j)))
    }

    /// Classify every fiber: is it an interval, and is it a fixed point of
    /// both closure-from-above operators.
    pub fn fibers_in_closed_class(&self) -> ClosedClassReport {
        let fibers: Vec<FiberClassReport> = (0..self.target.len())
            .map(|t| {
                let f = self.fiber(t);
                FiberClassReport {
                    element: self.target.id(t).to_string(),
                    cells: f.cell_count(),
                    interval: f.is_interval(),
                    closed_class: f.is_closed_class(),
                }
            })
            .collect();
        ClosedClassReport {
            all_in_class: fibers.iter().all(|f| f.interval && f.closed_class),
            fibers,
        }
    }

    /// The poset of all grid cells under the componentwise order. Quadratic
    /// in the cell count; meant for small grids and tests.
    pub fn cell_poset(&self) -> FinitePoset {
        cell_poset(&self.grid)
    }

    /// The encoding as a monotone map out of the cell poset.
    pub fn cell_map(&self) -> Result<MonotoneMap> {
        MonotoneMap::new(self.cell_poset(), self.target.clone(), self.labels.clone())
    }

    /// Target poset in DOT format, nodes annotated with fiber sizes.
    pub fn to_dot(&self) -> String {
        let mut counts = vec![0usize; self.target.len()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        let mut s = String::from("digraph encoding {\n  rankdir=\"BT\";\n");
        for (i, id) in self.target.ids().iter().enumerate() {
            let escaped = id.replace('\\', "\\\\").replace('"', "\\\"");
            s.push_str(&format!(
                "  n{i} [label=\"{escaped} ({} cell{})\"];\n",
                counts[i],
                if counts[i] == 1 { "" } else { "s" }
            ));
        }
        for &(a, b) in self.target.covers() {
            s.push_str(&format!("  n{a} -> n{b};\n"));
        }
        s.push_str("}\n");
        s
    }

    pub fn to_json(&self) -> EncodingJson {
        EncodingJson {
            grid: self.grid.to_json(),
            target: self.target.to_json(),
            labels: self.labels.clone(),
        }
    }

    pub fn from_json(json: &EncodingJson) -> Result<(Self, Vec<String>)> {
        Encoding::new(
            Grid::from_json(&json.grid)?,
            FinitePoset::from_json(&json.target)?,
            json.labels.clone(),
        )
    }
}

/// Poset of all cells of a grid under the componentwise order, with ids like
/// `"(0,2)"` listing atom indices. Quadratic in the cell count.
pub fn cell_poset(grid: &Grid) -> FinitePoset {
    let n = grid.cell_count();
    let cells: Vec<Vec<usize>> = (0..n).map(|f| grid.cell(f)).collect();
    let ids: Vec<String> = cells
        .iter()
        .map(|c| {
            let inner: Vec<String> = c.iter().map(|a| a.to_string()).collect();
            format!("({})", inner.join(","))
        })
        .collect();
    let mut leq = vec![false; n * n];
    for i in 0..n {
        for j in 0..n {
            leq[i * n + j] = CellSet::cell_leq(&cells[i], &cells[j]);
        }
    }
    FinitePoset::from_leq(ids, leq).expect("componentwise order is a partial order")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::staircase::Corner;

    fn quadrant_encoding(x: i64, y: i64) -> Encoding {
        let up = CellSet::principal_upset(&[Corner::At(Rat::int(x)), Corner::At(Rat::int(y))]).unwrap();
        let target = FinitePoset::chain(vec!["lo".into(), "hi".into()]);
        let (e, pruned) = Encoding::from_fibers(target, &[up.complement(), up]).unwrap();
        assert!(pruned.is_empty());
        e
    }

    #[test]
    fn quadrant_fibers_partition_the_plane() {
        let e = quadrant_encoding(0, 0);
        assert_eq!(e.grid().cell_count(), 9);
        assert_eq!(e.fiber(0).cell_count(), 5);
        assert_eq!(e.fiber(1).cell_count(), 4);
        assert_eq!(e.element_at_point(&[Rat::int(2), Rat::int(3)]).unwrap(), "hi");
        assert_eq!(e.element_at_point(&[Rat::int(-1), Rat::int(3)]).unwrap(), "lo");
        assert!(e.satisfies_ff_cell_conditions());
    }

    #[test]
    fn sublevels_are_downsets() {
        let e = quadrant_encoding(0, 0);
        let lo = e.target().index_of("lo").unwrap();
        assert!(e.sublevel(lo).is_downset());
        assert_eq!(e.sublevel(e.target().index_of("hi").unwrap()).cell_count(), 9);
    }

    #[test]
    fn empty_fibers_are_pruned_with_their_names() {
        let target = FinitePoset::chain(vec!["a".into(), "b".into(), "c".into()]);
        let grid = Grid::new(vec![vec![Rat::int(0)]]).unwrap();
        // only a and c are hit
        let (e, pruned) = Encoding::new(grid, target, vec![0, 0, 2]).unwrap();
        assert_eq!(pruned, vec!["b".to_string()]);
        assert_eq!(e.target().ids(), ["a", "c"]);
        assert_eq!(e.labels(), [0, 0, 1]);
    }

    #[test]
    fn non_monotone_labelings_are_rejected() {
        let target = FinitePoset::chain(vec!["lo".into(), "hi".into()]);
        let grid = Grid::new(vec![vec![Rat::int(0)]]).unwrap();
        let err = Encoding::new(grid, target, vec![1, 0, 0]).unwrap_err();
        match err {
            Error::NotMonotone { lower_image, upper_image, .. } => {
                assert_eq!(lower_image, "hi");
                assert_eq!(upper_image, "lo");
            }
            other => panic!("expected a monotonicity error, got {other:?}"),
        }
    }

    #[test]
    fn fiber_partition_violations_are_reported() {
        let target = FinitePoset::chain(vec!["lo".into(), "hi".into()]);
        let up = CellSet::principal_upset(&[Corner::At(Rat::int(0))]).unwrap();
        let overlap = Encoding::from_fibers(target.clone(), &[up.clone(), up.clone()]);
        match overlap {
            Err(Error::Invalid(msg)) => assert!(msg.contains("overlap")),
            other => panic!("expected an overlap error, got {other:?}"),
        }
        let strict = CellSet::principal_upset_strict(&[Corner::At(Rat::int(0))], &[true]).unwrap();
        let with_gap = Encoding::from_fibers(target, &[up.complement(), strict]);
        match with_gap {
            Err(Error::Invalid(msg)) => assert!(msg.contains("no fiber covers")),
            other => panic!("expected a coverage error, got {other:?}"),
        }
    }

    #[test]
    fn common_encoding_of_nested_quadrants_is_a_chain() {
        let e1 = quadrant_encoding(0, 0);
        let e2 = quadrant_encoding(1, 1);
        let c = e1.common_encoding(&e2).unwrap();
        assert_eq!(c.encoding.target().ids(), ["(lo,lo)", "(hi,lo)", "(hi,hi)"]);
        let hi_lo = c.encoding.target().index_of("(hi,lo)").unwrap();
        assert_eq!(c.to_first.target().id(c.to_first.apply(hi_lo)), "hi");
        assert_eq!(c.to_second.target().id(c.to_second.apply(hi_lo)), "lo");
        // factorization: composing labels with the projections recovers the inputs
        let e1r = e1.refine_grid(c.encoding.grid()).unwrap();
        let e2r = e2.refine_grid(c.encoding.grid()).unwrap();
        for flat in 0..c.encoding.grid().cell_count() {
            assert_eq!(c.to_first.apply(c.encoding.label_of_flat(flat)), e1r.label_of_flat(flat));
            assert_eq!(c.to_second.apply(c.encoding.label_of_flat(flat)), e2r.label_of_flat(flat));
        }
    }

    #[test]
    fn refinement_splits_disconnected_fibers() {
        // two incomparable points on the antidiagonal as the middle fiber
        let grid = Grid::new(vec![
            vec![Rat::int(0), Rat::int(1)],
            vec![Rat::int(0), Rat::int(1)],
        ])
        .unwrap();
        let mid = CellSet::from_cells(grid.clone(), &[vec![1, 3], vec![3, 1]]).unwrap();
        let hi = mid.up_closure().minus(&mid).unwrap();
        let lo = mid.up_closure().complement();
        let target = FinitePoset::chain(vec!["lo".into(), "mid".into(), "hi".into()]);
        let (e, pruned) = Encoding::from_fibers(target, &[lo, mid, hi]).unwrap();
        assert!(pruned.is_empty());
        assert!(!e.satisfies_ff_cell_conditions());
        let r = e.connective_refinement().unwrap();
        assert!(r.refined.satisfies_ff_cell_conditions());
        assert_eq!(
            r.refined.target().ids(),
            ["lo#0", "mid#0", "mid#1", "hi#0"]
        );
        let mid0 = r.refined.target().index_of("mid#0").unwrap();
        let mid1 = r.refined.target().index_of("mid#1").unwrap();
        assert!(!r.refined.target().comparable(mid0, mid1));
        assert_eq!(r.proj.target().id(r.proj.apply(mid0)), "mid");
        assert_eq!(r.proj.target().id(r.proj.apply(mid1)), "mid");
        // already-connective encodings refine to themselves up to renaming
        let r2 = r.refined.connective_refinement().unwrap();
        assert_eq!(r2.refined.target().len(), r.refined.target().len());
        assert_eq!(r2.refined.labels(), r.refined.labels());
    }

    #[test]
    fn closed_class_report_flags_bad_fibers() {
        let e = quadrant_encoding(0, 0);
        let report = e.fibers_in_closed_class();
        assert!(report.all_in_class);
        // a fiber with a topological defect: the open quadrant
        let strict = CellSet::principal_upset_strict(
            &[Corner::At(Rat::int(0)), Corner::At(Rat::int(0))],
            &[true, true],
        )
        .unwrap();
        let target = FinitePoset::chain(vec!["lo".into(), "hi".into()]);
        let (e2, _) = Encoding::from_fibers(target, &[strict.complement(), strict]).unwrap();
        let report2 = e2.fibers_in_closed_class();
        assert!(!report2.all_in_class);
        let hi = report2.fibers.iter().find(|f| f.element == "hi").unwrap();
        assert!(hi.interval && !hi.closed_class);
    }

    #[test]
    fn cell_map_realizes_the_encoding_on_the_cell_poset() {
        let e = quadrant_encoding(0, 0);
        let m = e.cell_map().unwrap();
        assert_eq!(m.source().len(), 9);
        assert!(m.satisfies_ff_conditions());
        let idx = m.source().index_of("(1,1)").unwrap();
        assert_eq!(m.target().id(m.apply(idx)), "hi");
    }

    #[test]
    fn dot_output_annotates_fiber_sizes() {
        let e = quadrant_encoding(0, 0);
        let dot = e.to_dot();
        assert!(dot.contains("lo (5 cells)"));
        assert!(dot.contains("hi (4 cells)"));
        assert!(dot.contains("n0 -> n1"));
    }

    #[test]
    fn json_round_trip() {
        let e = quadrant_encoding(0, 0);
        let text = serde_json::to_string(&e.to_json()).unwrap();
        let back: EncodingJson = serde_json::from_str(&text).unwrap();
        let (e2, pruned) = Encoding::from_json(&back).unwrap();
        assert!(pruned.is_empty());
        assert_eq!(e2.labels(), e.labels());
        assert_eq!(e2.target().ids(), e.target().ids());
    }
}
