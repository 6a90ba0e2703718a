//! Colimits of pulled-back modules over downsets, and the counit test: the
//! canonical comparison between such a colimit and the module's value.
//!
//! The colimit is presented as the direct sum of the spaces over the downset
//! modulo one relation block per cover edge; its projection matrix is the
//! canonical cokernel of the relation matrix, so presentations are
//! deterministic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{solve_in_span, Matrix};
use crate::poset::MonotoneMap;

use super::PfdModule;

#[derive(Clone, Debug)]
pub struct ColimitPresentation {
    /// Source elements the colimit ranges over, ascending.
    downset: Vec<usize>,
    /// Generator offset per downset position.
    offsets: Vec<usize>,
    total_generators: usize,
    /// Canonical surjection from the generators onto the colimit.
    projection: Matrix,
}

impl ColimitPresentation {
    pub fn dim(&self) -> usize {
        self.projection.rows()
    }

    pub fn total_generators(&self) -> usize {
        self.total_generators
    }

    pub fn downset(&self) -> &[usize] {
        &self.downset
    }

    pub fn projection(&self) -> &Matrix {
        &self.projection
    }

    /// The structure map from the space at a downset member into the colimit.
    pub fn insertion(&self, x: usize) -> Result<Matrix> {
        let pos = self
            .downset
            .binary_search(&x)
            .map_err(|_| Error::UnknownElement(format!("element {x} is not in the downset")))?;
        let width = if pos + 1 < self.downset.len() {
            self.offsets[pos + 1] - self.offsets[pos]
        } else {
            self.total_generators - self.offsets[pos]
        };
        let cols: Vec<usize> = (self.offsets[pos]..self.offsets[pos] + width).collect();
        Ok(self.projection.take_columns(&cols))
    }
}

/// Colimit of `pullback(e, m)` over a downset of `e`'s source.
pub fn colimit_over_downset(
    e: &MonotoneMap,
    m: &PfdModule,
    downset: &[usize],
) -> Result<ColimitPresentation> {
    if e.target() != m.base() {
        return Err(Error::Mismatch(
            "the module must live over the map's target poset".into(),
        ));
    }
    let mut downset: Vec<usize> = downset.to_vec();
    downset.sort_unstable();
    downset.dedup();
    if !e.source().is_downset(&downset) {
        return Err(Error::Invalid("the colimit index set must be a downset".into()));
    }
    let field = m.field();
    let mut offsets = Vec::with_capacity(downset.len());
    let mut total = 0usize;
    for &x in &downset {
        offsets.push(total);
        total += m.dim_at(e.apply(x));
    }
    let pos_of = |x: usize| downset.binary_search(&x).ok();
    // one relation column per cover edge and source basis vector:
    // the generator at the lower end minus its image at the upper end
    let mut columns: Vec<(usize, usize, Matrix)> = Vec::new();
    let mut relation_count = 0usize;
    for &(a, b) in e.source().covers() {
        let (Some(pa), Some(pb)) = (pos_of(a), pos_of(b)) else { continue };
        let step = m.composite(e.apply(a), e.apply(b))?;
        relation_count += step.cols();
        columns.push((pa, pb, step));
    }
    let mut relations = Matrix::zero(field, total, relation_count);
    let mut col = 0usize;
    for (pa, pb, step) in columns {
        for j in 0..step.cols() {
            relations.set(offsets[pa] + j, col, 1);
            for i in 0..step.rows() {
                relations.set(offsets[pb] + i, col, field.neg(step.get(i, j)));
            }
            col += 1;
        }
    }
    let projection = relations.cokernel_projection();
    Ok(ColimitPresentation {
        downset,
        offsets,
        total_generators: total,
        projection,
    })
}

/// Isomorphism status of the canonical map from the colimit over
/// `e^{-1}(target downset of q)` to the value at `q`, for one target element.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CounitVerdict {
    pub element: String,
    pub colimit_dim: usize,
    pub target_dim: usize,
    pub rank: usize,
    pub injective: bool,
    pub surjective: bool,
    pub iso: bool,
}

/// For every target element `q`, compare the colimit of the pullback over
/// the preimage of `q`'s downset with the module's value at `q`.
pub fn counit_check(e: &MonotoneMap, m: &PfdModule) -> Result<Vec<CounitVerdict>> {
    if e.target() != m.base() {
        return Err(Error::Mismatch(
            "the module must live over the map's target poset".into(),
        ));
    }
    let field = m.field();
    let mut verdicts = Vec::with_capacity(m.base().len());
    for q in 0..m.base().len() {
        let preimage: Vec<usize> = (0..e.source().len())
            .filter(|&x| m.base().leq(e.apply(x), q))
            .collect();
        let pres = colimit_over_downset(e, m, &preimage)?;
        // generatorwise canonical map into the value at q
        let mut canonical = Matrix::zero(field, m.dim_at(q), pres.total_generators());
        for (pos, &x) in pres.downset().iter().enumerate() {
            let step = m.composite(e.apply(x), q)?;
            for i in 0..step.rows() {
                for j in 0..step.cols() {
                    canonical.set(i, pres.offsets[pos] + j, step.get(i, j));
                }
            }
        }
        // the canonical map kills every relation, so it factors through the
        // projection; the factor is the counit component at q
        let counit = solve_in_span(&pres.projection().transpose(), &canonical.transpose())?.transpose();
        let rank = counit.rank();
        let colimit_dim = pres.dim();
        let target_dim = m.dim_at(q);
        verdicts.push(CounitVerdict {
            element: m.base().id(q).to_string(),
            colimit_dim,
            target_dim,
            rank,
            injective: rank == colimit_dim,
            surjective: rank == target_dim,
            iso: rank == colimit_dim && rank == target_dim,
        });
    }
    Ok(verdicts)
}
