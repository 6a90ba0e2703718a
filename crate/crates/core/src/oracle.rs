//! Brute-force validation of the encoded pipeline: evaluate modules at
//! rational sample points, rebuild the operation pointwise from scratch, and
//! compare dimensions and transition ranks. Comparison sticks to basis-free
//! invariants because kernels and cokernels are only defined up to
//! isomorphism.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::persistence::{abelian_pipeline, AbelianOp, EncodedModule, MorphismSpec, PfdModule};
use crate::poset::FinitePoset;
use crate::rational::Rat;

/// A finite list of rational sample points, kept lexicographically sorted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SamplePlan {
    points: Vec<Vec<Rat>>,
}

impl SamplePlan {
    pub fn new(mut points: Vec<Vec<Rat>>) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::Invalid("a sample plan needs at least one point".into()));
        };
        let dim = first.len();
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch(
                "sample points must share one ambient dimension".into(),
            ));
        }
        points.sort();
        points.dedup();
        Ok(SamplePlan { points })
    }

    /// Every coordinate combination drawn from the per-axis values.
    pub fn grid(axes: &[Vec<Rat>]) -> Result<Self> {
        if axes.iter().any(|a| a.is_empty()) {
            return Err(Error::Invalid("each sample axis needs a value".into()));
        }
        let mut points = vec![Vec::new()];
        for axis in axes {
            let mut next = Vec::with_capacity(points.len() * axis.len());
            for p in &points {
                for &v in axis {
                    let mut q = p.clone();
                    q.push(v);
                    next.push(q);
                }
            }
            points = next;
        }
        SamplePlan::new(points)
    }

    pub fn points(&self) -> &[Vec<Rat>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn is_closed_under_suprema(&self) -> bool {
        for a in &self.points {
            for b in &self.points {
                let sup: Vec<Rat> = a.iter().zip(b).map(|(&x, &y)| Rat::sup(x, y)).collect();
                if self.points.binary_search(&sup).is_err() {
                    return false;
                }
            }
        }
        true
    }

    /// Smallest superset closed under pairwise coordinatewise suprema.
    pub fn close_under_suprema(&self) -> SamplePlan {
        let mut points = self.points.clone();
        loop {
            let mut added = Vec::new();
            for a in &points {
                for b in &points {
                    let sup: Vec<Rat> = a.iter().zip(b).map(|(&x, &y)| Rat::sup(x, y)).collect();
                    if points.binary_search(&sup).is_err() {
                        added.push(sup);
                    }
                }
            }
            if added.is_empty() {
                return SamplePlan { points };
            }
            points.extend(added);
            points.sort();
            points.dedup();
        }
    }
}

fn point_label(point: &[Rat]) -> String {
    let mut s = String::from("(");
    for (i, c) in point.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        let _ = write!(s, "{c}");
    }
    s.push(')');
    s
}

/// The value of an encoded module at one sample point.
pub fn evaluate(module: &EncodedModule, point: &[Rat]) -> Result<usize> {
    module.dim_at_point(point)
}

/// An encoded module restricted to a sample plan: a finite module over the
/// product order on the sample points, with `s{i}` naming the i-th point.
#[derive(Clone, Debug)]
pub struct SampledModule {
    pub points: Vec<Vec<Rat>>,
    pub module: PfdModule,
}

fn sample_poset(plan: &SamplePlan) -> Result<FinitePoset> {
    let n = plan.len();
    let ids: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let mut leq = vec![false; n * n];
    for (i, a) in plan.points().iter().enumerate() {
        for (j, b) in plan.points().iter().enumerate() {
            leq[i * n + j] = a.iter().zip(b).all(|(x, y)| x <= y);
        }
    }
    FinitePoset::from_leq(ids, leq)
}

pub fn restrict_to_samples(module: &EncodedModule, plan: &SamplePlan) -> Result<SampledModule> {
    let base = sample_poset(plan)?;
    let dims: Vec<usize> = plan
        .points()
        .iter()
        .map(|p| module.dim_at_point(p))
        .collect::<Result<_>>()?;
    let mut cover_maps = BTreeMap::new();
    for &(i, j) in base.covers() {
        cover_maps.insert(
            (i, j),
            module.map_between_points(&plan.points()[i], &plan.points()[j])?,
        );
    }
    let module = PfdModule::new(base, module.module.field(), dims, cover_maps)?;
    Ok(SampledModule {
        points: plan.points().to_vec(),
        module,
    })
}

/// Outcome of one cross-check: how much was compared, and the first
/// discrepancy if there was one.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CrosscheckReport {
    pub op: String,
    pub checked_points: usize,
    pub checked_pairs: usize,
    pub mismatch: Option<String>,
}

impl CrosscheckReport {
    pub fn passed(&self) -> bool {
        self.mismatch.is_none()
    }
}

/// Dimension and transition-rank comparison between a sampled module and
/// independently expected values, keyed by sample index.
fn compare_invariants(
    sampled: &SampledModule,
    expected_dims: &[usize],
    expected_ranks: &BTreeMap<(usize, usize), usize>,
) -> (usize, usize, Option<String>) {
    for (i, (&got, &want)) in sampled
        .module
        .dims()
        .iter()
        .zip(expected_dims)
        .enumerate()
    {
        if got != want {
            return (
                i,
                0,
                Some(format!(
                    "dimension mismatch at {}: pipeline {got}, direct {want}",
                    point_label(&sampled.points[i])
                )),
            );
        }
    }
    let mut pairs = 0usize;
    for (&(i, j), &want) in expected_ranks {
        let got = match sampled.module.composite(i, j) {
            Ok(m) => m.rank(),
            Err(e) => {
                return (
                    expected_dims.len(),
                    pairs,
                    Some(format!(
                        "no transition {} <= {}: {e}",
                        point_label(&sampled.points[i]),
                        point_label(&sampled.points[j])
                    )),
                );
            }
        };
        if got != want {
            return (
                expected_dims.len(),
                pairs,
                Some(format!(
                    "rank mismatch for {} <= {}: pipeline {got}, direct {want}",
                    point_label(&sampled.points[i]),
                    point_label(&sampled.points[j])
                )),
            );
        }
        pairs += 1;
    }
    (expected_dims.len(), pairs, None)
}

/// Run the pipeline for `op`, then recompute the operation pointwise at every
/// sample from the raw inputs and compare dimensions and transition ranks.
pub fn crosscheck_operation(
    op: AbelianOp,
    a: &EncodedModule,
    b: &EncodedModule,
    spec: &MorphismSpec,
    plan: &SamplePlan,
) -> Result<CrosscheckReport> {
    if plan.is_empty() {
        return Err(Error::Invalid("the sample plan is empty".into()));
    }
    let out = abelian_pipeline(op, a, b, spec)?;
    let sampled = restrict_to_samples(&out.result, plan)?;

    // pointwise morphism data straight from the pipeline's chosen morphism
    let refined = &out.refinement.refined;
    let phi: Vec<&Matrix> = plan
        .points()
        .iter()
        .map(|p| {
            let id = refined.element_at_point(p)?;
            let idx = refined.target().index_of(id).expect("own id");
            Ok(out.morphism.component(idx))
        })
        .collect::<Result<_>>()?;
    let ranks: Vec<usize> = phi.iter().map(|m| m.rank()).collect();

    let mut expected_dims = Vec::with_capacity(plan.len());
    for (i, p) in plan.points().iter().enumerate() {
        let dim = match op {
            AbelianOp::Kernel => a.dim_at_point(p)? - ranks[i],
            AbelianOp::Image => ranks[i],
            AbelianOp::Cokernel => b.dim_at_point(p)? - ranks[i],
        };
        expected_dims.push(dim);
    }

    let mut expected_ranks = BTreeMap::new();
    for (i, p) in plan.points().iter().enumerate() {
        for (j, q) in plan.points().iter().enumerate() {
            if i == j || !p.iter().zip(q).all(|(x, y)| x <= y) {
                continue;
            }
            let rank = match op {
                AbelianOp::Kernel => {
                    let step = a.map_between_points(p, q)?;
                    step.mul(&phi[i].kernel_basis()).rank()
                }
                AbelianOp::Image => b.map_between_points(p, q)?.mul(phi[i]).rank(),
                AbelianOp::Cokernel => {
                    let step = b.map_between_points(p, q)?;
                    phi[j].cokernel_projection().mul(&step).rank()
                }
            };
            expected_ranks.insert((i, j), rank);
        }
    }

    let (checked_points, checked_pairs, mismatch) =
        compare_invariants(&sampled, &expected_dims, &expected_ranks);
    Ok(CrosscheckReport {
        op: op.name().to_string(),
        checked_points,
        checked_pairs,
        mismatch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::Encoding;
    use crate::linalg::Fp;
    use crate::staircase::{CellSet, Corner};

    fn f101() -> Fp {
        Fp::new(101).unwrap()
    }

    fn q(n: i64) -> Rat {
        Rat::int(n)
    }

    fn quadrant(x: i64, y: i64) -> CellSet {
        CellSet::principal_upset(&[Corner::At(q(x)), Corner::At(q(y))]).unwrap()
    }

    fn indicator(upset: &CellSet) -> EncodedModule {
        let target = FinitePoset::chain(vec!["out".into(), "in".into()]);
        let (encoding, _) =
            Encoding::from_fibers(target, &[upset.complement(), upset.clone()]).unwrap();
        let inside = encoding.target().index_of("in").unwrap();
        let module =
            PfdModule::interval_module(encoding.target(), f101(), &[inside]).unwrap();
        EncodedModule::new(encoding, module).unwrap()
    }

    fn five_by_five() -> SamplePlan {
        let axis: Vec<Rat> = (-2..=2).map(q).collect();
        SamplePlan::grid(&[axis.clone(), axis]).unwrap()
    }

    #[test]
    fn plans_sort_dedupe_and_close() {
        let plan = SamplePlan::new(vec![vec![q(1), q(0)], vec![q(0), q(1)], vec![q(1), q(0)]])
            .unwrap();
        assert_eq!(plan.len(), 2);
        assert!(!plan.is_closed_under_suprema());
        let closed = plan.close_under_suprema();
        assert_eq!(closed.len(), 3);
        assert!(closed.is_closed_under_suprema());
        assert!(closed.points().contains(&vec![q(1), q(1)]));
        assert!(SamplePlan::new(vec![]).is_err());
    }

    #[test]
    fn evaluation_matches_cell_membership() {
        let m = indicator(&quadrant(0, 0));
        assert_eq!(evaluate(&m, &[q(-1), q(-1)]).unwrap(), 0);
        assert_eq!(evaluate(&m, &[q(1), q(1)]).unwrap(), 1);
        let step = m
            .map_between_points(&[q(-1), q(-1)], &[q(1), q(1)])
            .unwrap();
        assert_eq!((step.rows(), step.cols()), (1, 0));
    }

    #[test]
    fn restriction_to_a_square_of_samples() {
        let m = indicator(&quadrant(0, 0));
        let plan = SamplePlan::grid(&[vec![q(-1), q(1)], vec![q(-1), q(1)]]).unwrap();
        let sampled = restrict_to_samples(&m, &plan).unwrap();
        assert_eq!(sampled.module.dims(), [0, 0, 0, 1]);
        let constant = SamplePlan::grid(&[vec![q(1), q(2)], vec![q(1), q(2)]]).unwrap();
        let sampled = restrict_to_samples(&m, &constant).unwrap();
        assert_eq!(sampled.module.dims(), [1, 1, 1, 1]);
        for &(i, j) in sampled.module.base().covers() {
            assert_eq!(sampled.module.map_for_cover(i, j).rank(), 1);
        }
    }

    #[test]
    fn kernel_of_identity_checks_clean() {
        let m = indicator(&quadrant(0, 0));
        let report = crosscheck_operation(
            AbelianOp::Kernel,
            &m,
            &m,
            &MorphismSpec::HomIndex(0),
            &five_by_five(),
        )
        .unwrap();
        assert!(report.passed(), "{:?}", report.mismatch);
        assert_eq!(report.checked_points, 25);
        assert!(report.checked_pairs > 0);
    }

    #[test]
    fn band_quotient_kernel_matches_on_a_grid() {
        // kernel of the quotient onto the band equals the inner quadrant
        let outer = quadrant(0, 0);
        let inner = quadrant(1, 1);
        let band = outer.minus(&inner).unwrap();
        let whole = indicator(&outer);
        let target = FinitePoset::chain(vec!["lo".into(), "mid".into(), "hi".into()]);
        let (encoding, _) =
            Encoding::from_fibers(target, &[outer.complement(), band, inner]).unwrap();
        let mid = encoding.target().index_of("mid").unwrap();
        let band_module = EncodedModule::new(
            encoding.clone(),
            PfdModule::interval_module(encoding.target(), f101(), &[mid]).unwrap(),
        )
        .unwrap();
        for op in [AbelianOp::Kernel, AbelianOp::Image, AbelianOp::Cokernel] {
            let report = crosscheck_operation(
                op,
                &whole,
                &band_module,
                &MorphismSpec::HomIndex(0),
                &five_by_five(),
            )
            .unwrap();
            assert!(report.passed(), "{}: {:?}", op.name(), report.mismatch);
        }
    }

    #[test]
    fn corrupted_transition_is_reported() {
        let m = indicator(&quadrant(0, 0));
        let plan = SamplePlan::new(vec![vec![q(1), q(1)], vec![q(2), q(2)]]).unwrap();
        let out = abelian_pipeline(
            AbelianOp::Image,
            &m,
            &m,
            &MorphismSpec::HomIndex(0),
        )
        .unwrap();
        let mut sampled = restrict_to_samples(&out.result, &plan).unwrap();
        // the identity transition on a chain can be corrupted freely because
        // a chain has no commuting squares to violate
        let mut maps = sampled.module.cover_maps().clone();
        maps.insert((0, 1), Matrix::zero(f101(), 1, 1));
        sampled.module =
            PfdModule::new(sampled.module.base().clone(), f101(), vec![1, 1], maps).unwrap();
        let expected_dims = vec![1, 1];
        let mut expected_ranks = BTreeMap::new();
        expected_ranks.insert((0, 1), 1usize);
        let (_, _, mismatch) = compare_invariants(&sampled, &expected_dims, &expected_ranks);
        let msg = mismatch.expect("the corruption must be caught");
        assert!(msg.contains("rank mismatch"), "{msg}");
        // dimension corruption is caught first
        let (_, _, mismatch) = compare_invariants(&sampled, &[1, 2], &expected_ranks);
        assert!(mismatch.unwrap().contains("dimension mismatch"));
    }
}
