//! Pointwise finite-dimensional persistence modules over finite posets:
//! functors into vector spaces, natural transformations between them, hom
//! spaces, kernels, images, cokernels, downset colimits, and the pipeline
//! combining all of it over staircase encodings.

mod colimit;
mod hom;
mod morphism;
mod pipeline;

pub use colimit::{colimit_over_downset, counit_check, ColimitPresentation, CounitVerdict};
pub use hom::{hom_space, HomBasis};
pub use morphism::{InducedModule, Morphism, MorphismJson};
pub use pipeline::{abelian_pipeline, pulled_back_hom, AbelianOp, MorphismSpec, PipelineOutput};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::encoding::{Encoding, EncodingJson};
use crate::error::{Error, Result};
use crate::linalg::{Fp, Matrix};
use crate::poset::{FinitePoset, MonotoneMap, PosetJson};
use crate::rational::Rat;

/// A functor from a finite poset to finite-dimensional vector spaces: one
/// dimension per element and one matrix per cover edge, composites agreeing
/// along every path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PfdModule {
    base: FinitePoset,
    field: Fp,
    dims: Vec<usize>,
    cover_maps: BTreeMap<(usize, usize), Matrix>,
}

impl PfdModule {
    /// A cover edge may omit its matrix only when one end has dimension zero.
    pub fn new(
        base: FinitePoset,
        field: Fp,
        dims: Vec<usize>,
        cover_maps: BTreeMap<(usize, usize), Matrix>,
    ) -> Result<Self> {
        if dims.len() != base.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} dimensions for a poset of {} elements",
                dims.len(),
                base.len()
            )));
        }
        let cover_set: BTreeMap<(usize, usize), ()> =
            base.covers().iter().map(|&c| (c, ())).collect();
        for (&(a, b), m) in &cover_maps {
            if !cover_set.contains_key(&(a, b)) {
                return Err(Error::Invalid(format!(
                    "({}, {}) is not a cover edge of the base poset",
                    base.id(a),
                    base.id(b)
                )));
            }
            if m.rows() != dims[b] || m.cols() != dims[a] {
                return Err(Error::DimensionMismatch(format!(
                    "map for cover ({}, {}) is {}x{}, expected {}x{}",
                    base.id(a),
                    base.id(b),
                    m.rows(),
                    m.cols(),
                    dims[b],
                    dims[a]
                )));
            }
            if m.field() != field {
                return Err(Error::Invalid(format!(
                    "map for cover ({}, {}) is over F_{}, module over F_{}",
                    base.id(a),
                    base.id(b),
                    m.field().modulus(),
                    field.modulus()
                )));
            }
        }
        for &(a, b) in base.covers() {
            if !cover_maps.contains_key(&(a, b)) && dims[a] != 0 && dims[b] != 0 {
                return Err(Error::Invalid(format!(
                    "cover ({}, {}) joins nonzero spaces and needs an explicit matrix",
                    base.id(a),
                    base.id(b)
                )));
            }
        }
        let module = PfdModule { base, field, dims, cover_maps };
        module.validate()?;
        Ok(module)
    }

    pub fn zero_module(base: FinitePoset, field: Fp) -> Self {
        let dims = vec![0; base.len()];
        PfdModule { base, field, dims, cover_maps: BTreeMap::new() }
    }

    /// One-dimensional spaces on an interval, identities inside, zero
    /// elsewhere.
    pub fn interval_module(base: &FinitePoset, field: Fp, subset: &[usize]) -> Result<Self> {
        if !base.is_interval(subset) {
            let names: Vec<&str> = subset.iter().map(|&i| base.id(i)).collect();
            return Err(Error::NotInterval(format!("{{{}}}", names.join(", "))));
        }
        let mut dims = vec![0; base.len()];
        for &i in subset {
            dims[i] = 1;
        }
        let mut cover_maps = BTreeMap::new();
        for &(a, b) in base.covers() {
            if dims[a] == 1 && dims[b] == 1 {
                cover_maps.insert((a, b), Matrix::identity(field, 1));
            }
        }
        PfdModule::new(base.clone(), field, dims, cover_maps)
    }

    /// Check that all cover-path composites agree: walk each element's upset
    /// in topological order, composing along incoming covers; two routes to
    /// the same element must produce the same matrix.
    pub fn validate(&self) -> Result<()> {
        let order = self.base.linear_extension();
        let covers = self.base.covers();
        for a in 0..self.base.len() {
            let mut composite: BTreeMap<usize, Matrix> = BTreeMap::new();
            composite.insert(a, Matrix::identity(self.field, self.dims[a]));
            for &b in &order {
                if b == a || !self.base.lt(a, b) {
                    continue;
                }
                for &(u, v) in covers {
                    if v != b {
                        continue;
                    }
                    let Some(known) = composite.get(&u) else { continue };
                    let candidate = self.map_for_cover(u, v).mul(known);
                    match composite.get(&b) {
                        None => {
                            composite.insert(b, candidate);
                        }
                        Some(existing) if *existing != candidate => {
                            return Err(Error::NotCommutative {
                                from: self.base.id(a).to_string(),
                                to: self.base.id(b).to_string(),
                                left: Box::new(existing.clone()),
                                right: Box::new(candidate),
                            });
                        }
                        Some(_) => {}
                    }
                }
            }
        }
        Ok(())
    }

    pub fn base(&self) -> &FinitePoset {
        &self.base
    }

    pub fn field(&self) -> Fp {
        self.field
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim_at(&self, i: usize) -> usize {
        self.dims[i]
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.dims.iter().all(|&d| d == 0)
    }

    /// The matrix stored for a cover edge, or zero when omitted.
    pub fn map_for_cover(&self, a: usize, b: usize) -> Matrix {
        match self.cover_maps.get(&(a, b)) {
            Some(m) => m.clone(),
            None => Matrix::zero(self.field, self.dims[b], self.dims[a]),
        }
    }

    pub fn cover_maps(&self) -> &BTreeMap<(usize, usize), Matrix> {
        &self.cover_maps
    }

    /// Structure map for any comparable pair, composed along a cover path.
    pub fn composite(&self, a: usize, b: usize) -> Result<Matrix> {
        if !self.base.leq(a, b) {
            return Err(Error::Invalid(format!(
                "{} is not below {} in the base poset",
                self.base.id(a),
                self.base.id(b)
            )));
        }
        let mut cur = a;
        let mut m = Matrix::identity(self.field, self.dims[a]);
        while cur != b {
            let step = self
                .base
                .covers()
                .iter()
                .find(|&&(u, v)| u == cur && self.base.leq(v, b))
                .map(|&(_, v)| v)
                .expect("a cover path exists between comparable elements");
            m = self.map_for_cover(cur, step).mul(&m);
            cur = step;
        }
        Ok(m)
    }

    /// Precomposition with a monotone map into this module's base.
    pub fn pullback(&self, f: &MonotoneMap) -> Result<PfdModule> {
        if f.target() != &self.base {
            return Err(Error::Mismatch(
                "pullback needs a map into the module's base poset".into(),
            ));
        }
        let source = f.source().clone();
        let dims: Vec<usize> = (0..source.len()).map(|i| self.dims[f.apply(i)]).collect();
        let mut cover_maps = BTreeMap::new();
        for &(a, b) in source.covers() {
            if dims[a] == 0 || dims[b] == 0 {
                continue;
            }
            cover_maps.insert((a, b), self.composite(f.apply(a), f.apply(b))?);
        }
        PfdModule::new(source, self.field, dims, cover_maps)
    }

    pub fn direct_sum(&self, other: &PfdModule) -> Result<PfdModule> {
        if self.base != other.base {
            return Err(Error::Mismatch("direct sum needs a common base poset".into()));
        }
        if self.field != other.field {
            return Err(Error::Mismatch("direct sum needs a common field".into()));
        }
        let dims: Vec<usize> = self
            .dims
            .iter()
            .zip(&other.dims)
            .map(|(&x, &y)| x + y)
            .collect();
        let mut cover_maps = BTreeMap::new();
        for &(a, b) in self.base.covers() {
            if dims[a] == 0 || dims[b] == 0 {
                continue;
            }
            let left = self.map_for_cover(a, b);
            let right = other.map_for_cover(a, b);
            let block = Matrix::from_fn(self.field, dims[b], dims[a], |i, j| {
                if i < left.rows() && j < left.cols() {
                    left.get(i, j)
                } else if i >= left.rows() && j >= left.cols() {
                    right.get(i - left.rows(), j - left.cols())
                } else {
                    0
                }
            });
            cover_maps.insert((a, b), block);
        }
        PfdModule::new(self.base.clone(), self.field, dims, cover_maps)
    }

    /// Restriction to an induced sub-poset; structure maps become composites.
    pub fn restrict(&self, keep: &[usize]) -> Result<PfdModule> {
        let sub = self.base.restrict(keep);
        let dims: Vec<usize> = keep.iter().map(|&i| self.dims[i]).collect();
        let mut cover_maps = BTreeMap::new();
        for &(a, b) in sub.covers() {
            if dims[a] == 0 || dims[b] == 0 {
                continue;
            }
            cover_maps.insert((a, b), self.composite(keep[a], keep[b])?);
        }
        PfdModule::new(sub, self.field, dims, cover_maps)
    }

    pub fn to_json(&self) -> PfdModuleJson {
        let mut dims = BTreeMap::new();
        for (i, &d) in self.dims.iter().enumerate() {
            dims.insert(self.base.id(i).to_string(), d);
        }
        let covers = self
            .cover_maps
            .iter()
            .map(|(&(a, b), m)| CoverMapJson {
                from: self.base.id(a).to_string(),
                to: self.base.id(b).to_string(),
                matrix: m.to_rows(),
            })
            .collect();
        PfdModuleJson {
            field_char: self.field.modulus(),
            base: self.base.to_json(),
            dims,
            covers,
        }
    }

    pub fn from_json(json: &PfdModuleJson) -> Result<Self> {
        let base = FinitePoset::from_json(&json.base)?;
        let field = Fp::new(json.field_char)?;
        let mut dims = vec![0usize; base.len()];
        for (id, &d) in &json.dims {
            dims[base.index_of(id)?] = d;
        }
        let mut cover_maps = BTreeMap::new();
        for cover in &json.covers {
            let a = base.index_of(&cover.from)?;
            let b = base.index_of(&cover.to)?;
            cover_maps.insert((a, b), Matrix::from_residue_rows(field, &cover.matrix)?);
        }
        PfdModule::new(base, field, dims, cover_maps)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoverMapJson {
    pub from: String,
    pub to: String,
    pub matrix: Vec<Vec<u64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PfdModuleJson {
    pub field_char: u64,
    pub base: PosetJson,
    pub dims: BTreeMap<String, usize>,
    pub covers: Vec<CoverMapJson>,
}

/// A module presented over the target of a staircase encoding; together they
/// describe a persistence module on all of `R^n`.
#[derive(Clone, Debug)]
pub struct EncodedModule {
    pub encoding: Encoding,
    pub module: PfdModule,
}

impl EncodedModule {
    pub fn new(encoding: Encoding, module: PfdModule) -> Result<Self> {
        if encoding.target() != module.base() {
            return Err(Error::Mismatch(
                "module base must equal the encoding target".into(),
            ));
        }
        Ok(EncodedModule { encoding, module })
    }

    pub fn dim_at_point(&self, point: &[Rat]) -> Result<usize> {
        let cell = self.encoding.grid().locate(point)?;
        Ok(self.module.dim_at(self.encoding.label_of_flat(self.encoding.grid().flat(&cell))))
    }

    /// Structure map between two comparable points of `R^n`.
    pub fn map_between_points(&self, from: &[Rat], to: &[Rat]) -> Result<Matrix> {
        if !from.iter().zip(to).all(|(a, b)| a <= b) {
            return Err(Error::Invalid(
                "points must be comparable componentwise, from below to above".into(),
            ));
        }
        let a = self.encoding.label_of_flat(self.encoding.grid().flat(&self.encoding.grid().locate(from)?));
        let b = self.encoding.label_of_flat(self.encoding.grid().flat(&self.encoding.grid().locate(to)?));
        self.module.composite(a, b)
    }

    pub fn to_json(&self) -> EncodedModuleJson {
        EncodedModuleJson {
            encoding: self.encoding.to_json(),
            module: self.module.to_json(),
        }
    }

    pub fn from_json(json: &EncodedModuleJson) -> Result<Self> {
        let (encoding, pruned) = Encoding::from_json(&json.encoding)?;
        if !pruned.is_empty() {
            return Err(Error::Invalid(format!(
                "encoding has empty fibers for {:?}; prune them before attaching a module",
                pruned
            )));
        }
        EncodedModule::new(encoding, PfdModule::from_json(&json.module)?)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EncodedModuleJson {
    pub encoding: EncodingJson,
    pub module: PfdModuleJson,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f101() -> Fp {
        Fp::new(101).unwrap()
    }

    fn diamond() -> FinitePoset {
        FinitePoset::from_relations(
            vec!["a".into(), "b".into(), "c".into(), "d".into()],
            &[
                ("a".into(), "b".into()),
                ("a".into(), "c".into()),
                ("b".into(), "d".into()),
                ("c".into(), "d".into()),
            ],
        )
        .unwrap()
    }

    #[test]
    fn interval_module_on_diamond_validates() {
        let p = diamond();
        let m = PfdModule::interval_module(&p, f101(), &[1, 2]).unwrap();
        assert_eq!(m.dims(), [0, 1, 1, 0]);
        // both composites a -> d are 0x0
        let c = m.composite(0, 3).unwrap();
        assert_eq!((c.rows(), c.cols()), (0, 0));
    }

    #[test]
    fn non_commuting_square_is_rejected() {
        let p = diamond();
        let f = f101();
        let mut maps = BTreeMap::new();
        maps.insert((0, 1), Matrix::identity(f, 1));
        maps.insert((0, 2), Matrix::identity(f, 1));
        maps.insert((1, 3), Matrix::identity(f, 1));
        maps.insert((2, 3), Matrix::from_rows(f, &[vec![-1]]).unwrap());
        let err = PfdModule::new(p, f, vec![1; 4], maps).unwrap_err();
        match err {
            Error::NotCommutative { from, to, left, right } => {
                assert_eq!((from.as_str(), to.as_str()), ("a", "d"));
                assert_ne!(left, right);
            }
            other => panic!("expected a commutativity error, got {other:?}"),
        }
    }

    #[test]
    fn modules_over_chains_always_commute() {
        let p = FinitePoset::chain(vec!["x".into(), "y".into(), "z".into()]);
        let f = f101();
        let mut maps = BTreeMap::new();
        maps.insert((0, 1), Matrix::from_rows(f, &[vec![2], vec![3]]).unwrap());
        maps.insert((1, 2), Matrix::from_rows(f, &[vec![5, 7]]).unwrap());
        let m = PfdModule::new(p, f, vec![1, 2, 1], maps).unwrap();
        assert_eq!(m.composite(0, 2).unwrap().get(0, 0), (2 * 5 + 3 * 7) % 101);
    }

    #[test]
    fn missing_cover_maps_need_a_zero_end() {
        let p = FinitePoset::chain(vec!["x".into(), "y".into()]);
        let err = PfdModule::new(p.clone(), f101(), vec![1, 1], BTreeMap::new()).unwrap_err();
        assert!(matches!(err, Error::Invalid(_)));
        let ok = PfdModule::new(p, f101(), vec![1, 0], BTreeMap::new()).unwrap();
        assert_eq!(ok.map_for_cover(0, 1).rows(), 0);
    }

    #[test]
    fn pullback_duplicates_along_a_collapse() {
        // chain(3) -> chain(2) collapsing the top two elements
        let src = FinitePoset::chain(vec!["0".into(), "1".into(), "2".into()]);
        let tgt = FinitePoset::chain(vec!["lo".into(), "hi".into()]);
        let e = MonotoneMap::new(src, tgt.clone(), vec![0, 1, 1]).unwrap();
        let f = f101();
        let mut maps = BTreeMap::new();
        maps.insert((0, 1), Matrix::from_rows(f, &[vec![4]]).unwrap());
        let m = PfdModule::new(tgt, f, vec![1, 1], maps).unwrap();
        let pulled = m.pullback(&e).unwrap();
        assert_eq!(pulled.dims(), [1, 1, 1]);
        assert_eq!(pulled.map_for_cover(0, 1).get(0, 0), 4);
        assert_eq!(pulled.map_for_cover(1, 2).get(0, 0), 1);
    }

    #[test]
    fn pullback_is_functorial() {
        let a = FinitePoset::chain(vec!["x".into(), "y".into()]);
        let b = FinitePoset::chain(vec!["0".into(), "1".into(), "2".into()]);
        let c = FinitePoset::chain(vec!["lo".into(), "hi".into()]);
        let f = MonotoneMap::new(a.clone(), b.clone(), vec![0, 2]).unwrap();
        let g = MonotoneMap::new(b, c.clone(), vec![0, 0, 1]).unwrap();
        let field = f101();
        let mut maps = BTreeMap::new();
        maps.insert((0, 1), Matrix::from_rows(field, &[vec![3, 1], vec![0, 2]]).unwrap());
        let m = PfdModule::new(c, field, vec![2, 2], maps).unwrap();
        let two_step = m.pullback(&g).unwrap().pullback(&f).unwrap();
        let one_step = m.pullback(&f.then(&g).unwrap()).unwrap();
        assert_eq!(two_step, one_step);
    }

    #[test]
    fn direct_sum_is_blockwise() {
        let p = FinitePoset::chain(vec!["x".into(), "y".into()]);
        let f = f101();
        let m1 = PfdModule::interval_module(&p, f, &[0, 1]).unwrap();
        let m2 = PfdModule::interval_module(&p, f, &[1]).unwrap();
        let s = m1.direct_sum(&m2).unwrap();
        assert_eq!(s.dims(), [1, 2]);
        let map = s.map_for_cover(0, 1);
        assert_eq!(map.to_rows(), vec![vec![1], vec![0]]);
    }

    #[test]
    fn restriction_composes_across_removed_elements() {
        let p = FinitePoset::chain(vec!["0".into(), "1".into(), "2".into()]);
        let f = f101();
        let mut maps = BTreeMap::new();
        maps.insert((0, 1), Matrix::from_rows(f, &[vec![2]]).unwrap());
        maps.insert((1, 2), Matrix::from_rows(f, &[vec![3]]).unwrap());
        let m = PfdModule::new(p, f, vec![1, 1, 1], maps).unwrap();
        let r = m.restrict(&[0, 2]).unwrap();
        assert_eq!(r.base().ids(), ["0", "2"]);
        assert_eq!(r.map_for_cover(0, 1).get(0, 0), 6);
    }

    #[test]
    fn module_json_round_trip() {
        let p = diamond();
        let m = PfdModule::interval_module(&p, f101(), &[0, 1, 2, 3]).unwrap();
        let text = serde_json::to_string(&m.to_json()).unwrap();
        let back = PfdModule::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn encoded_module_evaluates_points() {
        use crate::staircase::{CellSet, Corner};
        let up = CellSet::principal_upset(&[Corner::At(Rat::int(0)), Corner::At(Rat::int(0))]).unwrap();
        let target = FinitePoset::chain(vec!["lo".into(), "hi".into()]);
        let (enc, _) = crate::encoding::Encoding::from_fibers(target, &[up.complement(), up]).unwrap();
        let m = PfdModule::interval_module(enc.target(), f101(), &[1]).unwrap();
        let em = EncodedModule::new(enc, m).unwrap();
        assert_eq!(em.dim_at_point(&[Rat::int(1), Rat::int(1)]).unwrap(), 1);
        assert_eq!(em.dim_at_point(&[Rat::int(-1), Rat::int(1)]).unwrap(), 0);
        let t = em
            .map_between_points(&[Rat::int(-1), Rat::int(1)], &[Rat::int(1), Rat::int(1)])
            .unwrap();
        assert_eq!((t.rows(), t.cols()), (1, 0));
        assert!(em
            .map_between_points(&[Rat::int(1), Rat::int(1)], &[Rat::int(0), Rat::int(0)])
            .is_err());
    }
}
