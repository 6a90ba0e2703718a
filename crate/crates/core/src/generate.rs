//! Seeded random generators for posets, monotone maps, modules, staircase
//! sets, and encodings. Every draw goes through one ChaCha stream, so a seed
//! pins down the entire scenario.

use std::collections::BTreeSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::encoding::Encoding;
use crate::linalg::{solve_in_span, Fp, Matrix};
use crate::persistence::{EncodedModule, PfdModule};
use crate::poset::{FinitePoset, MonotoneMap};
use crate::rational::Rat;
use crate::staircase::{CellSet, Corner};

pub struct Gen {
    rng: ChaCha8Rng,
}

impl Gen {
    pub fn new(seed: u64) -> Gen {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.rng.gen_range(0..items.len())]
    }

    /// A uniform index below `n`.
    pub fn index(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    pub fn poset(&mut self, max_elements: usize) -> FinitePoset {
        let n = self.rng.gen_range(1..=max_elements);
        let ids: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
        let mut relations = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if self.rng.gen_bool(0.3) {
                    relations.push((ids[i].clone(), ids[j].clone()));
                }
            }
        }
        FinitePoset::from_relations(ids, &relations).expect("edges only go forward")
    }

    /// A random monotone map, assigned along a linear extension so earlier
    /// choices constrain later ones; falls back to a constant map when the
    /// random walk corners itself.
    pub fn monotone_map(&mut self, source: &FinitePoset, target: &FinitePoset) -> MonotoneMap {
        'restart: for _ in 0..20 {
            let mut assign = vec![usize::MAX; source.len()];
            for &x in &source.linear_extension() {
                let below: Vec<usize> = source
                    .covers()
                    .iter()
                    .filter(|&&(_, b)| b == x)
                    .map(|&(a, _)| assign[a])
                    .collect();
                let candidates: Vec<usize> = (0..target.len())
                    .filter(|&t| below.iter().all(|&img| target.leq(img, t)))
                    .collect();
                if candidates.is_empty() {
                    continue 'restart;
                }
                assign[x] = *self.pick(&candidates);
            }
            return MonotoneMap::new(source.clone(), target.clone(), assign)
                .expect("assignment respects covers");
        }
        let c = self.rng.gen_range(0..target.len());
        MonotoneMap::new(source.clone(), target.clone(), vec![c; source.len()])
            .expect("constant maps are monotone")
    }

    /// A random order-convex subset, as the part of a principal upset lying
    /// under a chosen top.
    pub fn interval_in(&mut self, p: &FinitePoset) -> Vec<usize> {
        let x = self.rng.gen_range(0..p.len());
        let up = p.upset_of(&[x]);
        let y = *self.pick(&up);
        let down = p.downset_of(&[y]);
        up.into_iter().filter(|i| down.binary_search(i).is_ok()).collect()
    }

    /// A random invertible matrix with its inverse.
    pub fn invertible(&mut self, field: Fp, n: usize) -> (Matrix, Matrix) {
        loop {
            let m = Matrix::from_fn(field, n, n, |_, _| self.rng.gen_range(0..field.modulus()));
            if m.rank() == n {
                let inv = solve_in_span(&m, &Matrix::identity(field, n))
                    .expect("full-rank square matrices are invertible");
                return (m, inv);
            }
        }
    }

    /// A random module: a direct sum of interval modules twisted by a random
    /// change of basis at every element, so structure maps are not plain 0/1
    /// matrices. Pointwise dimension is at most `max_summands`.
    pub fn module(&mut self, base: &FinitePoset, field: Fp, max_summands: usize) -> PfdModule {
        let k = self.rng.gen_range(0..=max_summands);
        let mut m = PfdModule::zero_module(base.clone(), field);
        for _ in 0..k {
            let interval = self.interval_in(base);
            let summand = PfdModule::interval_module(base, field, &interval)
                .expect("generated subsets are order-convex");
            m = m.direct_sum(&summand).expect("same base and field");
        }
        self.base_change(&m)
    }

    fn base_change(&mut self, m: &PfdModule) -> PfdModule {
        let field = m.field();
        let changes: Vec<(Matrix, Matrix)> = m
            .dims()
            .iter()
            .map(|&d| self.invertible(field, d))
            .collect();
        let mut maps = std::collections::BTreeMap::new();
        for (&(a, b), g) in m.cover_maps() {
            maps.insert((a, b), changes[b].0.mul(g).mul(&changes[a].1));
        }
        PfdModule::new(m.base().clone(), field, m.dims().to_vec(), maps)
            .expect("conjugation preserves commutativity")
    }

    /// A small rational with denominator 1 or 2.
    pub fn rational(&mut self) -> Rat {
        let num = self.rng.gen_range(-6..=6);
        let den = if self.rng.gen_bool(0.3) { 2 } else { 1 };
        Rat::new(num, den).expect("nonzero denominator")
    }

    /// Distinct sorted coordinate values for one axis.
    pub fn axis_pool(&mut self, max_values: usize) -> Vec<Rat> {
        let want = self.rng.gen_range(1..=max_values);
        let mut vals = BTreeSet::new();
        while vals.len() < want {
            vals.insert(self.rational());
        }
        vals.into_iter().collect()
    }

    /// One coordinate pool per axis; every staircase set in a scenario draws
    /// corners from these, which caps the merged grid's breakpoint count.
    pub fn pools(&mut self, dim: usize, max_values: usize) -> Vec<Vec<Rat>> {
        (0..dim).map(|_| self.axis_pool(max_values)).collect()
    }

    fn corner_from(&mut self, pools: &[Vec<Rat>]) -> Vec<Corner> {
        pools
            .iter()
            .map(|pool| {
                if self.rng.gen_bool(0.15) {
                    Corner::NegInf
                } else {
                    Corner::At(*self.pick(pool))
                }
            })
            .collect()
    }

    /// A finite union of closed principal upsets.
    pub fn closed_upset(&mut self, pools: &[Vec<Rat>], max_corners: usize) -> CellSet {
        let k = self.rng.gen_range(1..=max_corners);
        let mut set: Option<CellSet> = None;
        for _ in 0..k {
            let u = CellSet::principal_upset(&self.corner_from(pools)).expect("corner fits");
            set = Some(match set {
                None => u,
                Some(s) => s.union(&u).expect("compatible grids"),
            });
        }
        set.expect("at least one corner")
    }

    /// A finite union of principal upsets with independently strict axes.
    pub fn upset(&mut self, pools: &[Vec<Rat>], max_corners: usize) -> CellSet {
        let k = self.rng.gen_range(1..=max_corners);
        let mut set: Option<CellSet> = None;
        for _ in 0..k {
            let corner = self.corner_from(pools);
            let strict: Vec<bool> = corner
                .iter()
                .map(|c| matches!(c, Corner::At(_)) && self.rng.gen_bool(0.4))
                .collect();
            let u = CellSet::principal_upset_strict(&corner, &strict).expect("corner fits");
            set = Some(match set {
                None => u,
                Some(s) => s.union(&u).expect("compatible grids"),
            });
        }
        set.expect("at least one corner")
    }

    pub fn downset(&mut self, pools: &[Vec<Rat>], max_corners: usize) -> CellSet {
        self.upset(pools, max_corners).complement()
    }

    /// A difference of closed upsets: one random member of the closed class.
    pub fn closed_class_interval(&mut self, pools: &[Vec<Rat>]) -> CellSet {
        let u = self.closed_upset(pools, 2);
        let v = self.closed_upset(pools, 2);
        u.minus(&v).expect("compatible grids")
    }

    /// A union of differences of closed upsets.
    pub fn closed_class_set(&mut self, pools: &[Vec<Rat>], pieces: usize) -> CellSet {
        let k = self.rng.gen_range(1..=pieces);
        let mut set: Option<CellSet> = None;
        for _ in 0..k {
            let piece = self.closed_class_interval(pools);
            set = Some(match set {
                None => piece,
                Some(s) => s.union(&piece).expect("compatible grids"),
            });
        }
        set.expect("at least one piece")
    }

    /// An encoding whose fibers are the membership signatures of a few random
    /// closed upsets: cells sharing a signature share a fiber, and signatures
    /// are ordered by inclusion.
    pub fn staircase_encoding(&mut self, pools: &[Vec<Rat>], max_upsets: usize) -> Encoding {
        let k = self.rng.gen_range(1..=max_upsets);
        let mut upsets: Vec<CellSet> = (0..k).map(|_| self.closed_upset(pools, 2)).collect();
        // align everything onto one merged grid
        let whole = upsets
            .iter()
            .skip(1)
            .fold(upsets[0].clone(), |acc, u| acc.union(u).expect("compatible grids"));
        let grid = whole.grid().clone();
        for u in &mut upsets {
            let refinement = grid.refinement_onto(u.grid());
            *u = u.refine_to(&grid, &refinement);
        }
        let masks: Vec<u32> = (0..grid.cell_count())
            .map(|flat| {
                upsets
                    .iter()
                    .enumerate()
                    .filter(|(_, u)| u.contains_flat(flat))
                    .fold(0u32, |m, (i, _)| m | (1 << i))
            })
            .collect();
        let realized: Vec<u32> = masks.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        let ids: Vec<String> = realized.iter().map(|m| format!("m{m}")).collect();
        let n = realized.len();
        let mut leq = vec![false; n * n];
        for (i, &a) in realized.iter().enumerate() {
            for (j, &b) in realized.iter().enumerate() {
                leq[i * n + j] = a & b == a;
            }
        }
        let target = FinitePoset::from_leq(ids, leq).expect("inclusion orders signatures");
        let labels: Vec<usize> = masks
            .iter()
            .map(|m| realized.binary_search(m).expect("mask is realized"))
            .collect();
        let (encoding, pruned) =
            Encoding::new(grid, target, labels).expect("signatures are monotone on cells");
        assert!(pruned.is_empty(), "every realized signature has a cell");
        encoding
    }

    pub fn encoded_module(
        &mut self,
        encoding: &Encoding,
        field: Fp,
        max_summands: usize,
    ) -> EncodedModule {
        let module = self.module(encoding.target(), field, max_summands);
        EncodedModule::new(encoding.clone(), module).expect("module is over the target")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_reproduce_everything() {
        let mut a = Gen::new(7);
        let mut b = Gen::new(7);
        let (pa, pb) = (a.poset(10), b.poset(10));
        assert_eq!(pa.ids(), pb.ids());
        assert_eq!(pa.covers(), pb.covers());
        let f = Fp::new(101).unwrap();
        let (ma, mb) = (a.module(&pa, f, 4), b.module(&pb, f, 4));
        assert_eq!(ma, mb);
        let pools_a = a.pools(2, 4);
        let pools_b = b.pools(2, 4);
        assert_eq!(pools_a, pools_b);
        assert!(a
            .closed_upset(&pools_a, 3)
            .equal_as_sets(&b.closed_upset(&pools_b, 3))
            .unwrap());
    }

    #[test]
    fn generated_maps_and_modules_validate() {
        let f = Fp::new(101).unwrap();
        for seed in 0..30 {
            let mut g = Gen::new(seed);
            let source = g.poset(8);
            let target = g.poset(6);
            let e = g.monotone_map(&source, &target);
            assert_eq!(e.source().len(), source.len());
            let m = g.module(&target, f, 4);
            assert!(m.dims().iter().all(|&d| d <= 4));
            let interval = g.interval_in(&target);
            assert!(target.is_interval(&interval));
        }
    }

    #[test]
    fn generated_staircase_sets_have_the_advertised_shapes() {
        for seed in 0..30 {
            let mut g = Gen::new(seed);
            let dim = 1 + (seed as usize) % 3;
            let pools = g.pools(dim, 4);
            assert!(g.closed_upset(&pools, 3).is_upset());
            let u = g.upset(&pools, 3);
            assert!(u.is_upset());
            assert!(g.downset(&pools, 2).is_downset());
            let i = g.closed_class_interval(&pools);
            assert!(i.is_interval());
            assert!(i.is_closed_class());
        }
    }

    #[test]
    fn generated_encodings_bound_their_grids() {
        for seed in 0..20 {
            let mut g = Gen::new(seed);
            let dim = 1 + (seed as usize) % 3;
            let pools = g.pools(dim, 4);
            let enc = g.staircase_encoding(&pools, 3);
            for axis in 0..dim {
                assert!(enc.grid().breakpoints(axis).len() <= 4);
            }
            assert!(enc.target().len() <= 8);
            let f = Fp::new(101).unwrap();
            let m = g.encoded_module(&enc, f, 3);
            assert!(m.module.dims().iter().all(|&d| d <= 3));
        }
    }

    #[test]
    fn invertible_pairs_multiply_to_identity() {
        let f = Fp::new(101).unwrap();
        let mut g = Gen::new(3);
        for n in 0..5 {
            let (s, sinv) = g.invertible(f, n);
            assert_eq!(s.mul(&sinv), Matrix::identity(f, n));
        }
    }
}
