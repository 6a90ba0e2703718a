//! Natural transformations between modules over a shared base poset, and the
//! pointwise abelian operations on them. Kernel, image, and cokernel bases
//! are pivot-canonical so repeated runs produce identical matrices.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{solve_in_span, Matrix};

use super::PfdModule;

#[derive(Clone, Debug)]
pub struct Morphism {
    source: PfdModule,
    target: PfdModule,
    components: Vec<Matrix>,
}

/// A module produced by an abelian operation, with its canonical structure
/// morphism: the inclusion into the source (kernel), the inclusion into the
/// target (image), or the projection out of the target (cokernel).
#[derive(Clone, Debug)]
pub struct InducedModule {
    pub module: PfdModule,
    pub map: Morphism,
}

impl Morphism {
    pub fn new(source: PfdModule, target: PfdModule, components: Vec<Matrix>) -> Result<Self> {
        if source.base() != target.base() {
            return Err(Error::Mismatch(
                "a morphism needs source and target over the same base poset".into(),
            ));
        }
        if source.field() != target.field() {
            return Err(Error::Mismatch("a morphism needs a common field".into()));
        }
        let n = source.base().len();
        if components.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} components for a base of {n} elements",
                components.len()
            )));
        }
        for (i, c) in components.iter().enumerate() {
            if c.rows() != target.dim_at(i) || c.cols() != source.dim_at(i) {
                return Err(Error::DimensionMismatch(format!(
                    "component at {} is {}x{}, expected {}x{}",
                    source.base().id(i),
                    c.rows(),
                    c.cols(),
                    target.dim_at(i),
                    source.dim_at(i)
                )));
            }
        }
        for &(a, b) in source.base().covers() {
            let left = target.map_for_cover(a, b).mul(&components[a]);
            let right = components[b].mul(&source.map_for_cover(a, b));
            if left != right {
                return Err(Error::NotCommutative {
                    from: source.base().id(a).to_string(),
                    to: source.base().id(b).to_string(),
                    left: Box::new(left),
                    right: Box::new(right),
                });
            }
        }
        Ok(Morphism { source, target, components })
    }

    pub fn zero(source: PfdModule, target: PfdModule) -> Result<Self> {
        let field = source.field();
        let components = (0..source.base().len())
            .map(|i| Matrix::zero(field, target.dim_at(i), source.dim_at(i)))
            .collect();
        Morphism::new(source, target, components)
    }

    pub fn identity(module: &PfdModule) -> Self {
        let components = (0..module.base().len())
            .map(|i| Matrix::identity(module.field(), module.dim_at(i)))
            .collect();
        Morphism {
            source: module.clone(),
            target: module.clone(),
            components,
        }
    }

    pub fn source(&self) -> &PfdModule {
        &self.source
    }

    pub fn target(&self) -> &PfdModule {
        &self.target
    }

    pub fn component(&self, i: usize) -> &Matrix {
        &self.components[i]
    }

    pub fn components(&self) -> &[Matrix] {
        &self.components
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.is_zero())
    }

    /// `next` after `self`: the composite source -> middle -> far target.
    pub fn then(&self, next: &Morphism) -> Result<Morphism> {
        if next.source.base() != self.target.base() || next.source.dims() != self.target.dims() {
            return Err(Error::Mismatch(
                "composition needs the middle module to agree".into(),
            ));
        }
        let components = (0..self.components.len())
            .map(|i| next.components[i].mul(&self.components[i]))
            .collect();
        Morphism::new(self.source.clone(), next.target.clone(), components)
    }

    pub fn add(&self, other: &Morphism) -> Result<Morphism> {
        if self.source.dims() != other.source.dims() || self.target.dims() != other.target.dims() {
            return Err(Error::Mismatch("sum needs morphisms of the same shape".into()));
        }
        let components = (0..self.components.len())
            .map(|i| self.components[i].add(&other.components[i]))
            .collect();
        Morphism::new(self.source.clone(), self.target.clone(), components)
    }

    pub fn scale(&self, c: i64) -> Morphism {
        let c = self.source.field().reduce_i64(c);
        let components = self.components.iter().map(|m| m.scale(c)).collect();
        Morphism {
            source: self.source.clone(),
            target: self.target.clone(),
            components,
        }
    }

    /// Pointwise kernel with its inclusion. Each space gets the canonical
    /// kernel basis of the component; structure maps are solved inside those
    /// bases.
    pub fn kernel(&self) -> Result<InducedModule> {
        let bases: Vec<Matrix> = self.components.iter().map(|c| c.kernel_basis()).collect();
        self.subobject_from_bases(bases, &self.source)
    }

    /// Pointwise image with its inclusion into the target. Bases are the
    /// pivot columns of each component.
    pub fn image(&self) -> Result<InducedModule> {
        let bases: Vec<Matrix> = self
            .components
            .iter()
            .map(|c| {
                let (_, pivots) = c.rref();
                c.take_columns(&pivots)
            })
            .collect();
        self.subobject_from_bases(bases, &self.target)
    }

    /// A submodule of `ambient` spanned pointwise by `bases`, with its
    /// inclusion. The spans must be preserved by the ambient structure maps.
    fn subobject_from_bases(&self, bases: Vec<Matrix>, ambient: &PfdModule) -> Result<InducedModule> {
        let field = self.source.field();
        let dims: Vec<usize> = bases.iter().map(|b| b.cols()).collect();
        let mut cover_maps = BTreeMap::new();
        for &(a, b) in ambient.base().covers() {
            if dims[a] == 0 || dims[b] == 0 {
                continue;
            }
            let pushed = ambient.map_for_cover(a, b).mul(&bases[a]);
            cover_maps.insert((a, b), solve_in_span(&bases[b], &pushed)?);
        }
        let module = PfdModule::new(ambient.base().clone(), field, dims, cover_maps)?;
        let map = Morphism::new(module.clone(), ambient.clone(), bases)?;
        Ok(InducedModule { module, map })
    }

    /// Pointwise cokernel with the projection from the target. Projections
    /// are the canonical complements of the component column spans.
    pub fn cokernel(&self) -> Result<InducedModule> {
        let projections: Vec<Matrix> = self
            .components
            .iter()
            .map(|c| c.cokernel_projection())
            .collect();
        let field = self.source.field();
        let dims: Vec<usize> = projections.iter().map(|q| q.rows()).collect();
        let mut cover_maps = BTreeMap::new();
        for &(a, b) in self.target.base().covers() {
            if dims[a] == 0 || dims[b] == 0 {
                continue;
            }
            // X Q_a = Q_b G_ab, solved through transposes
            let rhs = projections[b].mul(&self.target.map_for_cover(a, b));
            let x = solve_in_span(&projections[a].transpose(), &rhs.transpose())?;
            cover_maps.insert((a, b), x.transpose());
        }
        let module = PfdModule::new(self.target.base().clone(), field, dims, cover_maps)?;
        let map = Morphism::new(self.target.clone(), module.clone(), projections)?;
        Ok(InducedModule { module, map })
    }

    pub fn to_json(&self) -> MorphismJson {
        let mut components = BTreeMap::new();
        for (i, c) in self.components.iter().enumerate() {
            components.insert(self.source.base().id(i).to_string(), c.to_rows());
        }
        MorphismJson { components }
    }

    pub fn from_json(source: &PfdModule, target: &PfdModule, json: &MorphismJson) -> Result<Morphism> {
        let field = source.field();
        let mut components: Vec<Matrix> = (0..source.base().len())
            .map(|i| Matrix::zero(field, target.dim_at(i), source.dim_at(i)))
            .collect();
        for (id, rows) in &json.components {
            let i = source.base().index_of(id)?;
            components[i] = Matrix::from_residue_rows(field, rows)?;
        }
        Morphism::new(source.clone(), target.clone(), components)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MorphismJson {
    pub components: BTreeMap<String, Vec<Vec<u64>>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Fp;
    use crate::poset::FinitePoset;

    fn f101() -> Fp {
        Fp::new(101).unwrap()
    }

    fn chain2() -> FinitePoset {
        FinitePoset::chain(vec!["a".into(), "b".into()])
    }

    #[test]
    fn non_natural_components_are_rejected() {
        let p = chain2();
        let f = f101();
        let m = PfdModule::interval_module(&p, f, &[0, 1]).unwrap();
        // phi: M -> M with 1 at a and 2 at b breaks the square
        let comps = vec![
            Matrix::from_rows(f, &[vec![1]]).unwrap(),
            Matrix::from_rows(f, &[vec![2]]).unwrap(),
        ];
        let err = Morphism::new(m.clone(), m, comps).unwrap_err();
        assert!(matches!(err, Error::NotCommutative { .. }));
    }

    #[test]
    fn identity_has_zero_kernel_full_image_zero_cokernel() {
        let p = chain2();
        let m = PfdModule::interval_module(&p, f101(), &[0, 1]).unwrap();
        let id = Morphism::identity(&m);
        let k = id.kernel().unwrap();
        assert!(k.module.is_zero());
        let im = id.image().unwrap();
        assert_eq!(im.module.dims(), m.dims());
        let c = id.cokernel().unwrap();
        assert!(c.module.is_zero());
    }

    #[test]
    fn kernel_of_a_collapse_on_a_chain() {
        // phi: F[{a,b}] -> F[{a}], identity at a; kernel = F[{b}]
        let p = chain2();
        let f = f101();
        let whole = PfdModule::interval_module(&p, f, &[0, 1]).unwrap();
        let bottom = PfdModule::interval_module(&p, f, &[0]).unwrap();
        let phi = Morphism::new(
            whole.clone(),
            bottom,
            vec![Matrix::identity(f, 1), Matrix::zero(f, 0, 1)],
        )
        .unwrap();
        let k = phi.kernel().unwrap();
        assert_eq!(k.module.dims(), [0, 1]);
        // inclusion followed by phi is zero
        let through = k.map.then(&phi).unwrap();
        assert!(through.is_zero());
        // and the kernel equals the interval module on {b}
        let expected = PfdModule::interval_module(&p, f, &[1]).unwrap();
        assert_eq!(k.module, expected);
    }

    #[test]
    fn cokernel_of_the_bottom_inclusion() {
        // F[{b}] -> F[{a,b}] includes the top; cokernel = F[{a}]
        let p = chain2();
        let f = f101();
        let top = PfdModule::interval_module(&p, f, &[1]).unwrap();
        let whole = PfdModule::interval_module(&p, f, &[0, 1]).unwrap();
        let iota = Morphism::new(
            top,
            whole.clone(),
            vec![Matrix::zero(f, 1, 0), Matrix::identity(f, 1)],
        )
        .unwrap();
        let c = iota.cokernel().unwrap();
        assert_eq!(c.module.dims(), [1, 0]);
        assert!(iota.then(&c.map).unwrap().is_zero());
        assert_eq!(c.module, PfdModule::interval_module(&p, f, &[0]).unwrap());
    }

    #[test]
    fn rank_identities_hold_pointwise() {
        let p = chain2();
        let f = f101();
        let mut maps = BTreeMap::new();
        maps.insert((0, 1), Matrix::from_rows(f, &[vec![1, 0], vec![0, 0]]).unwrap());
        let m = PfdModule::new(p.clone(), f, vec![2, 2], maps).unwrap();
        // phi: M -> M given by the same matrix at both points
        let c = Matrix::from_rows(f, &[vec![1, 0], vec![0, 0]]).unwrap();
        let phi = Morphism::new(m.clone(), m, vec![c.clone(), c]).unwrap();
        let k = phi.kernel().unwrap();
        let im = phi.image().unwrap();
        let coker = phi.cokernel().unwrap();
        for i in 0..2 {
            assert_eq!(k.module.dim_at(i) + im.module.dim_at(i), 2);
            assert_eq!(coker.module.dim_at(i), 2 - im.module.dim_at(i));
        }
        assert!(im.map.then(&coker.map).unwrap().is_zero());
    }

    #[test]
    fn morphism_linear_structure() {
        let p = chain2();
        let m = PfdModule::interval_module(&p, f101(), &[0, 1]).unwrap();
        let id = Morphism::identity(&m);
        let doubled = id.add(&id).unwrap();
        assert_eq!(doubled.component(0).get(0, 0), 2);
        let cancelled = doubled.add(&id.scale(-2)).unwrap();
        assert!(cancelled.is_zero());
    }

    #[test]
    fn morphism_json_round_trip() {
        let p = chain2();
        let m = PfdModule::interval_module(&p, f101(), &[0, 1]).unwrap();
        let id = Morphism::identity(&m);
        let text = serde_json::to_string(&id.to_json()).unwrap();
        let back = Morphism::from_json(&m, &m, &serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back.components(), id.components());
    }
}
