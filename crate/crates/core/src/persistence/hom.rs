//! Hom spaces between modules: the kernel of the naturality constraints,
//! assembled as one linear system over all cover edges.

use crate::error::{Error, Result};
use crate::linalg::Matrix;

use super::{Morphism, PfdModule};

/// A basis of the vector space of morphisms from one module to another.
/// Unknowns are ordered element by element, row-major inside each component,
/// and the basis is the canonical kernel basis of the constraint system, so
/// it is deterministic.
#[derive(Clone, Debug)]
pub struct HomBasis {
    basis: Vec<Morphism>,
}

impl HomBasis {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Morphism] {
        &self.basis
    }

    pub fn member(&self, i: usize) -> Result<&Morphism> {
        self.basis.get(i).ok_or_else(|| {
            Error::Invalid(format!(
                "basis index {i} out of range, the hom space has dimension {}",
                self.basis.len()
            ))
        })
    }

    /// The morphism with the given coordinates in this basis; the zero
    /// morphism when the space is trivial and no coordinates are given.
    pub fn combination(&self, source: &PfdModule, target: &PfdModule, coeffs: &[i64]) -> Result<Morphism> {
        if coeffs.len() != self.basis.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for a hom space of dimension {}",
                coeffs.len(),
                self.basis.len()
            )));
        }
        let mut acc = Morphism::zero(source.clone(), target.clone())?;
        for (c, m) in coeffs.iter().zip(&self.basis) {
            acc = acc.add(&m.scale(*c))?;
        }
        Ok(acc)
    }
}

/// Solve for all natural transformations source -> target over their common
/// base poset.
pub fn hom_space(source: &PfdModule, target: &PfdModule) -> Result<HomBasis> {
    if source.base() != target.base() {
        return Err(Error::Mismatch(
            "hom spaces need modules over the same base poset".into(),
        ));
    }
    if source.field() != target.field() {
        return Err(Error::Mismatch("hom spaces need a common field".into()));
    }
    let field = source.field();
    let base = source.base();
    let n = base.len();
    let mut offsets = Vec::with_capacity(n);
    let mut unknowns = 0usize;
    for i in 0..n {
        offsets.push(unknowns);
        unknowns += target.dim_at(i) * source.dim_at(i);
    }
    let mut rows = 0usize;
    for &(a, b) in base.covers() {
        rows += target.dim_at(b) * source.dim_at(a);
    }
    // naturality at cover (a, b): G_ab phi_a - phi_b F_ab = 0
    let mut system = Matrix::zero(field, rows, unknowns);
    let mut row = 0usize;
    for &(a, b) in base.covers() {
        let g = target.map_for_cover(a, b);
        let f = source.map_for_cover(a, b);
        for r in 0..target.dim_at(b) {
            for c in 0..source.dim_at(a) {
                for k in 0..target.dim_at(a) {
                    let col = offsets[a] + k * source.dim_at(a) + c;
                    system.set(row, col, field.add(system.get(row, col), g.get(r, k)));
                }
                for k in 0..source.dim_at(b) {
                    let col = offsets[b] + r * source.dim_at(b) + k;
                    system.set(row, col, field.sub(system.get(row, col), f.get(k, c)));
                }
                row += 1;
            }
        }
    }
    let kernel = system.kernel_basis();
    let mut basis = Vec::with_capacity(kernel.cols());
    for j in 0..kernel.cols() {
        let components: Vec<Matrix> = (0..n)
            .map(|i| {
                Matrix::from_fn(field, target.dim_at(i), source.dim_at(i), |r, c| {
                    kernel.get(offsets[i] + r * source.dim_at(i) + c, j)
                })
            })
            .collect();
        basis.push(Morphism::new(source.clone(), target.clone(), components)?);
    }
    Ok(HomBasis { basis })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Fp;
    use crate::poset::FinitePoset;

    fn f101() -> Fp {
        Fp::new(101).unwrap()
    }

    #[test]
    fn endomorphisms_of_a_point_module() {
        let p = FinitePoset::antichain(vec!["x".into()]);
        let m = PfdModule::interval_module(&p, f101(), &[0]).unwrap();
        let h = hom_space(&m, &m).unwrap();
        assert_eq!(h.dim(), 1);
        assert_eq!(h.member(0).unwrap().component(0).get(0, 0), 1);
    }

    #[test]
    fn hom_on_a_chain_distinguishes_directions() {
        let p = FinitePoset::chain(vec!["a".into(), "b".into()]);
        let f = f101();
        let top = PfdModule::interval_module(&p, f, &[1]).unwrap();
        let whole = PfdModule::interval_module(&p, f, &[0, 1]).unwrap();
        let bottom = PfdModule::interval_module(&p, f, &[0]).unwrap();
        // the smaller upset maps into the larger; downsets receive quotients
        assert_eq!(hom_space(&top, &whole).unwrap().dim(), 1);
        assert_eq!(hom_space(&bottom, &whole).unwrap().dim(), 0);
        assert_eq!(hom_space(&whole, &bottom).unwrap().dim(), 1);
        assert_eq!(hom_space(&whole, &top).unwrap().dim(), 0);
    }

    #[test]
    fn hom_over_an_antichain_is_componentwise() {
        let p = FinitePoset::antichain(vec!["x".into(), "y".into()]);
        let m = PfdModule::interval_module(&p, f101(), &[0, 1]).unwrap();
        assert_eq!(hom_space(&m, &m).unwrap().dim(), 2);
    }

    #[test]
    fn combinations_are_linear() {
        let p = FinitePoset::antichain(vec!["x".into(), "y".into()]);
        let m = PfdModule::interval_module(&p, f101(), &[0, 1]).unwrap();
        let h = hom_space(&m, &m).unwrap();
        let phi = h.combination(&m, &m, &[3, 5]).unwrap();
        let total: u64 = (0..2).map(|i| phi.component(i).get(0, 0)).sum();
        assert_eq!(total, 8);
        assert!(h.combination(&m, &m, &[1]).is_err());
    }

    #[test]
    fn hom_dimension_of_upset_modules_reflects_containment() {
        // diamond a < b, c < d; upsets {d} subset {b,d} subset {a,b,c,d}
        let p = FinitePoset::from_relations(
            vec!["a".into(), "b".into(), "c".into(), "d".into()],
            &[
                ("a".into(), "b".into()),
                ("a".into(), "c".into()),
                ("b".into(), "d".into()),
                ("c".into(), "d".into()),
            ],
        )
        .unwrap();
        let f = f101();
        let big = PfdModule::interval_module(&p, f, &[0, 1, 2, 3]).unwrap();
        let mid = PfdModule::interval_module(&p, f, &[1, 3]).unwrap();
        let small = PfdModule::interval_module(&p, f, &[3]).unwrap();
        // maps go from smaller upsets into larger ones
        assert_eq!(hom_space(&small, &mid).unwrap().dim(), 1);
        assert_eq!(hom_space(&mid, &big).unwrap().dim(), 1);
        assert_eq!(hom_space(&small, &big).unwrap().dim(), 1);
        assert_eq!(hom_space(&big, &small).unwrap().dim(), 0);
        assert_eq!(hom_space(&mid, &small).unwrap().dim(), 0);
    }
}
