//! Seeded property suites over randomized posets, modules, and staircase
//! geometry, plus the deterministic control cases. Each suite returns a
//! serializable report listing every violated case, so a clean run is an
//! empty failure list rather than a bare boolean.

use serde::{Deserialize, Serialize};

use crate::encoding::Encoding;
use crate::generate::Gen;
use crate::linalg::Fp;
use crate::oracle::{crosscheck_operation, CrosscheckReport, SamplePlan};
use crate::persistence::{
    abelian_pipeline, counit_check, hom_space, pulled_back_hom, AbelianOp, EncodedModule,
    MorphismSpec, PfdModule,
};
use crate::poset::{FinitePoset, MonotoneMap};
use crate::rational::Rat;
use crate::staircase::{CellSet, Grid};

fn field() -> Fp {
    Fp::new(Fp::DEFAULT_CHARACTERISTIC).expect("the default characteristic is prime")
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub name: String,
    pub cases: usize,
    pub failures: Vec<String>,
}

impl SuiteOutcome {
    fn new(name: &str) -> SuiteOutcome {
        SuiteOutcome {
            name: name.to_string(),
            cases: 0,
            failures: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Criterion: after component refinement, the counit comparison map is an
/// isomorphism at every target element, for arbitrary modules.
pub fn counit_suite(seed: u64, cases: usize) -> SuiteOutcome {
    let mut out = SuiteOutcome::new("counit isomorphism after refinement");
    let mut g = Gen::new(seed);
    let f = field();
    for case in 0..cases {
        out.cases += 1;
        let source = g.poset(10);
        let target = g.poset(10);
        let e = g.monotone_map(&source, &target);
        let refinement = match e.component_refinement() {
            Ok(r) => r,
            Err(err) => {
                out.failures.push(format!("case {case}: refinement failed: {err}"));
                continue;
            }
        };
        let ehat = &refinement.to_refined;
        if !ehat.satisfies_ff_conditions() {
            out.failures
                .push(format!("case {case}: refined map misses the fiber conditions"));
            continue;
        }
        let m = g.module(ehat.target(), f, 4);
        match counit_check(ehat, &m) {
            Ok(verdicts) => {
                for v in verdicts {
                    if !v.iso {
                        out.failures.push(format!(
                            "case {case}: counit not an isomorphism at {} (colimit {}, value {}, rank {})",
                            v.element, v.colimit_dim, v.target_dim, v.rank
                        ));
                    }
                }
            }
            Err(err) => out.failures.push(format!("case {case}: counit check failed: {err}")),
        }
    }
    out
}

/// Criterion: pulling back along a refined map preserves hom-space dimension.
pub fn hom_dimension_suite(seed: u64, cases: usize) -> SuiteOutcome {
    let mut out = SuiteOutcome::new("hom dimension under pullback");
    let mut g = Gen::new(seed);
    let f = field();
    for case in 0..cases {
        out.cases += 1;
        let source = g.poset(10);
        let target = g.poset(10);
        let e = g.monotone_map(&source, &target);
        let refinement = match e.component_refinement() {
            Ok(r) => r,
            Err(err) => {
                out.failures.push(format!("case {case}: refinement failed: {err}"));
                continue;
            }
        };
        let ehat = &refinement.to_refined;
        let m = g.module(ehat.target(), f, 4);
        let n = g.module(ehat.target(), f, 4);
        let over_target = match hom_space(&m, &n) {
            Ok(h) => h.dim(),
            Err(err) => {
                out.failures.push(format!("case {case}: hom failed: {err}"));
                continue;
            }
        };
        let pulled = match (m.pullback(ehat), n.pullback(ehat)) {
            (Ok(pm), Ok(pn)) => hom_space(&pm, &pn).map(|h| h.dim()),
            (Err(err), _) | (_, Err(err)) => Err(err),
        };
        match pulled {
            Ok(over_source) => {
                if over_source != over_target {
                    out.failures.push(format!(
                        "case {case}: hom dimension {over_target} over the target became {over_source} after pullback"
                    ));
                }
            }
            Err(err) => out.failures.push(format!("case {case}: pullback failed: {err}")),
        }
    }
    out
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AntidiagonalCase {
    pub k: usize,
    pub order_components: usize,
    pub topological_components: usize,
    pub refined_target_size: usize,
}

/// The two ways an unrefined collapse fails, plus the antidiagonal family
/// showing refined targets must grow with the number of components.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NegativeControlReport {
    pub counit_colimit_dim: usize,
    pub counit_target_dim: usize,
    pub counit_injective: bool,
    pub hom_dim_over_target: usize,
    pub hom_dim_pulled_back: usize,
    pub antidiagonal: Vec<AntidiagonalCase>,
}

impl NegativeControlReport {
    pub fn passed(&self) -> bool {
        self.counit_colimit_dim == 2
            && self.counit_target_dim == 1
            && !self.counit_injective
            && self.hom_dim_over_target == 1
            && self.hom_dim_pulled_back == 2
            && self.antidiagonal.len() == 9
            && self.antidiagonal.iter().all(|c| {
                c.order_components == c.k
                    && c.topological_components == c.k
                    && c.refined_target_size == c.k + 2
            })
    }
}

/// Exactly `k` pairwise incomparable singleton cells on a shared grid.
fn antidiagonal_cells(k: usize) -> CellSet {
    let axis: Vec<Rat> = (0..k as i64).map(Rat::int).collect();
    let grid = Grid::new(vec![axis.clone(), axis]).expect("increasing breakpoints");
    let cells: Vec<Vec<usize>> = (0..k)
        .map(|i| vec![2 * i + 1, 2 * (k - 1 - i) + 1])
        .collect();
    CellSet::from_cells(grid, &cells).expect("cells are in range")
}

pub fn negative_controls() -> NegativeControlReport {
    let f = field();
    let point = FinitePoset::antichain(vec!["*".into()]);
    let anti = FinitePoset::antichain(vec!["x".into(), "y".into()]);
    let collapse = MonotoneMap::new(anti, point.clone(), vec![0, 0])
        .expect("all maps out of an antichain are monotone");
    let m = PfdModule::interval_module(&point, f, &[0]).expect("a point is an interval");
    let verdict = counit_check(&collapse, &m).expect("the collapse is well formed");
    let v = &verdict[0];
    let hom_dim_over_target = hom_space(&m, &m).expect("same base").dim();
    let pm = m.pullback(&collapse).expect("collapse targets the base");
    let hom_dim_pulled_back = hom_space(&pm, &pm).expect("same base").dim();
    let mut antidiagonal = Vec::new();
    for k in 2..=10 {
        let s = antidiagonal_cells(k);
        let order = s.order_components().len();
        let topological = s.topological_components().len();
        let above = s.up_closure();
        let fibers = [
            above.complement(),
            s.clone(),
            above.minus(&s).expect("same grid"),
        ];
        let chain = FinitePoset::chain(vec!["lo".into(), "mid".into(), "hi".into()]);
        let (encoding, pruned) =
            Encoding::from_fibers(chain, &fibers).expect("fibers partition the grid");
        assert!(pruned.is_empty(), "all three fibers are inhabited for k >= 2");
        let refined = encoding
            .connective_refinement()
            .expect("refinement of a valid encoding");
        antidiagonal.push(AntidiagonalCase {
            k,
            order_components: order,
            topological_components: topological,
            refined_target_size: refined.refined.target().len(),
        });
    }
    NegativeControlReport {
        counit_colimit_dim: v.colimit_dim,
        counit_target_dim: v.target_dim,
        counit_injective: v.injective,
        hom_dim_over_target,
        hom_dim_pulled_back,
        antidiagonal,
    }
}

fn sample_plan(g: &mut Gen, dim: usize) -> SamplePlan {
    let axes: Vec<Vec<Rat>> = (0..dim)
        .map(|_| {
            let want = 2 + g.index(2);
            let mut vals = std::collections::BTreeSet::new();
            while vals.len() < want {
                vals.insert(g.rational());
            }
            vals.into_iter().collect()
        })
        .collect();
    SamplePlan::grid(&axes).expect("axes are nonempty")
}

/// Criterion: the pipeline's kernel, image, and cokernel agree with the
/// pointwise operation at every sample of a grid closed under suprema.
pub fn crosscheck_suite(seed: u64, scenarios: usize) -> SuiteOutcome {
    let mut out = SuiteOutcome::new("pipeline agrees with pointwise operations");
    let mut g = Gen::new(seed);
    let f = field();
    for case in 0..scenarios {
        out.cases += 1;
        let dim = case % 3 + 1;
        let pools = g.pools(dim, 4);
        let enc_a = g.staircase_encoding(&pools, 3);
        let a = g.encoded_module(&enc_a, f, 3);
        let enc_b = g.staircase_encoding(&pools, 3);
        let b = g.encoded_module(&enc_b, f, 3);
        let hom = match pulled_back_hom(&a, &b) {
            Ok(h) => h,
            Err(err) => {
                out.failures.push(format!("scenario {case}: hom setup failed: {err}"));
                continue;
            }
        };
        let spec = if hom.dim() == 0 {
            MorphismSpec::HomCombination(Vec::new())
        } else {
            MorphismSpec::HomIndex(g.index(hom.dim()))
        };
        let plan = sample_plan(&mut g, dim);
        debug_assert!(plan.is_closed_under_suprema());
        for op in [AbelianOp::Kernel, AbelianOp::Image, AbelianOp::Cokernel] {
            match crosscheck_operation(op, &a, &b, &spec, &plan) {
                Ok(report) => {
                    if let Some(m) = report.mismatch {
                        out.failures.push(format!("scenario {case} {}: {m}", op.name()));
                    }
                }
                Err(err) => out
                    .failures
                    .push(format!("scenario {case} {}: {err}", op.name())),
            }
        }
    }
    out
}

/// The deterministic quadrant pair: the inclusion's cokernel and the
/// quotient's kernel both land exactly on interval modules, and both
/// operations survive a pointwise cross-check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BandCaseReport {
    pub inclusion_hom_dim: usize,
    pub quotient_hom_dim: usize,
    pub cokernel_matches_interval: bool,
    pub kernel_matches_interval: bool,
    pub certified_closed_class: bool,
    pub crosscheck_cokernel: CrosscheckReport,
    pub crosscheck_kernel: CrosscheckReport,
}

impl BandCaseReport {
    pub fn passed(&self) -> bool {
        self.inclusion_hom_dim == 1
            && self.quotient_hom_dim == 1
            && self.cokernel_matches_interval
            && self.kernel_matches_interval
            && self.certified_closed_class
            && self.crosscheck_cokernel.passed()
            && self.crosscheck_kernel.passed()
    }
}

fn indicator_module(upset: &CellSet) -> EncodedModule {
    let target = FinitePoset::chain(vec!["out".into(), "in".into()]);
    let (encoding, pruned) =
        Encoding::from_fibers(target, &[upset.complement(), upset.clone()])
            .expect("an upset and its complement partition the grid");
    assert!(pruned.is_empty());
    let inside = encoding.target().index_of("in").expect("kept fiber");
    let module = PfdModule::interval_module(encoding.target(), field(), &[inside])
        .expect("the top of a chain is an interval");
    EncodedModule::new(encoding, module).expect("module over the target")
}

fn fiber_index(result: &crate::persistence::PipelineOutput, cells: &CellSet) -> Option<usize> {
    let enc = &result.refinement.refined;
    (0..enc.target().len()).find(|&i| {
        enc.fiber(i)
            .equal_as_sets(cells)
            .expect("fibers share the ambient dimension")
    })
}

pub fn band_case() -> BandCaseReport {
    let f = field();
    let at = |n: i64| crate::staircase::Corner::At(Rat::int(n));
    let outer = CellSet::principal_upset(&[at(0), at(0)]).expect("corner");
    let inner = CellSet::principal_upset(&[at(1), at(1)]).expect("corner");
    let band = outer.minus(&inner).expect("same ambient dimension");
    let whole = indicator_module(&outer);
    let small = indicator_module(&inner);
    let target = FinitePoset::chain(vec!["lo".into(), "mid".into(), "hi".into()]);
    let (band_encoding, pruned) = Encoding::from_fibers(
        target,
        &[outer.complement(), band.clone(), inner.clone()],
    )
    .expect("the three regions partition the plane");
    assert!(pruned.is_empty());
    let mid = band_encoding.target().index_of("mid").expect("kept fiber");
    let band_module = EncodedModule::new(
        band_encoding.clone(),
        PfdModule::interval_module(band_encoding.target(), f, &[mid])
            .expect("a chain element is an interval"),
    )
    .expect("module over the target");

    let inclusion_hom_dim = pulled_back_hom(&small, &whole).map(|h| h.dim()).unwrap_or(0);
    let quotient_hom_dim = pulled_back_hom(&whole, &band_module)
        .map(|h| h.dim())
        .unwrap_or(0);

    let spec = MorphismSpec::HomIndex(0);
    let cok = abelian_pipeline(AbelianOp::Cokernel, &small, &whole, &spec)
        .expect("the inclusion pipeline runs");
    let cokernel_matches_interval = fiber_index(&cok, &band)
        .map(|idx| {
            let expected =
                PfdModule::interval_module(cok.refinement.refined.target(), f, &[idx])
                    .expect("one element is an interval");
            cok.result.module == expected
        })
        .unwrap_or(false);
    let ker = abelian_pipeline(AbelianOp::Kernel, &whole, &band_module, &spec)
        .expect("the quotient pipeline runs");
    let kernel_matches_interval = fiber_index(&ker, &inner)
        .map(|idx| {
            let expected =
                PfdModule::interval_module(ker.refinement.refined.target(), f, &[idx])
                    .expect("one element is an interval");
            ker.result.module == expected
        })
        .unwrap_or(false);
    let certified_closed_class =
        cok.certification.all_in_class && ker.certification.all_in_class;

    let half = Rat::new(1, 2).expect("nonzero denominator");
    let axis = vec![Rat::int(-1), Rat::int(0), half, Rat::int(1), Rat::int(2)];
    let plan = SamplePlan::grid(&[axis.clone(), axis]).expect("five values per axis");
    let crosscheck_cokernel =
        crosscheck_operation(AbelianOp::Cokernel, &small, &whole, &spec, &plan)
            .expect("cross-check runs");
    let crosscheck_kernel =
        crosscheck_operation(AbelianOp::Kernel, &whole, &band_module, &spec, &plan)
            .expect("cross-check runs");

    BandCaseReport {
        inclusion_hom_dim,
        quotient_hom_dim,
        cokernel_matches_interval,
        kernel_matches_interval,
        certified_closed_class,
        crosscheck_cokernel,
        crosscheck_kernel,
    }
}

/// Criterion: the four pointwise laws tying the order closure operators to
/// topology, plus invariance of unions of closed differences, per set shape.
pub fn closure_law_suite(seed: u64, cases_per_law: usize) -> SuiteOutcome {
    let mut out = SuiteOutcome::new("closure operator laws");
    let mut g = Gen::new(seed);
    fn check(ok: Result<bool, crate::Error>, label: String, out: &mut SuiteOutcome) {
        match ok {
            Ok(true) => {}
            Ok(false) => out.failures.push(label),
            Err(err) => out.failures.push(format!("{label}: {err}")),
        }
    }
    for case in 0..cases_per_law {
        let dim = case % 3 + 1;
        let pools = g.pools(dim, 4);

        out.cases += 1;
        let u = g.upset(&pools, 3);
        check(
            u.closure_above().equal_as_sets(&u.topological_closure()),
            format!("case {case}: closure of an upset is not its topological closure"),
            &mut out,
        );

        out.cases += 1;
        let d = g.downset(&pools, 3);
        let interior = d.complement().topological_closure().complement();
        check(
            d.interior_above().equal_as_sets(&interior),
            format!("case {case}: dual closure of a downset is not its interior"),
            &mut out,
        );

        out.cases += 1;
        let u = g.upset(&pools, 2);
        let v = g.closed_upset(&pools, 2);
        let lhs = u.minus(&v).and_then(|s| {
            s.closure_above().equal_as_sets(&u.closure_above().minus(&v)?)
        });
        check(
            lhs,
            format!("case {case}: closure does not slide past a closed complement"),
            &mut out,
        );

        out.cases += 1;
        let u = g.upset(&pools, 2);
        let v = g.upset(&pools, 2);
        let lhs = u.minus(&v).and_then(|s| {
            s.interior_above()
                .equal_as_sets(&u.intersect(&v.complement().interior_above())?)
        });
        check(
            lhs,
            format!("case {case}: dual closure does not localize to the complement"),
            &mut out,
        );

        out.cases += 1;
        let s = g.closed_class_set(&pools, 3);
        let invariant = s
            .closure_above()
            .equal_as_sets(&s)
            .and_then(|a| Ok(a && s.interior_above().equal_as_sets(&s)?));
        check(
            invariant,
            format!("case {case}: a union of closed differences moved under closure"),
            &mut out,
        );

        out.cases += 1;
        let componentwise = s.order_components().into_iter().try_fold(true, |acc, c| {
            Ok(acc
                && c.closure_above().equal_as_sets(&c)?
                && c.interior_above().equal_as_sets(&c)?)
        });
        check(
            componentwise,
            format!("case {case}: a component of a closed difference moved under closure"),
            &mut out,
        );
    }
    out
}

/// Criterion: on a closed upset minus an open-complement region, the order
/// components and the topological components give the same partition, and
/// components of intervals are intervals.
pub fn component_agreement_suite(seed: u64, cases: usize) -> SuiteOutcome {
    let mut out = SuiteOutcome::new("order and topological components agree");
    let mut g = Gen::new(seed);
    for case in 0..cases {
        out.cases += 1;
        let dim = case % 3 + 1;
        let pools = g.pools(dim, 4);
        let u = g.closed_upset(&pools, 2);
        let open_down = g.closed_upset(&pools, 2).complement();
        let i = match u.intersect(&open_down) {
            Ok(i) => i,
            Err(err) => {
                out.failures.push(format!("case {case}: intersection failed: {err}"));
                continue;
            }
        };
        let order = i.order_components();
        let topological = i.topological_components();
        if order.len() != topological.len() {
            out.failures.push(format!(
                "case {case}: {} order components vs {} topological",
                order.len(),
                topological.len()
            ));
            continue;
        }
        for (a, b) in order.iter().zip(&topological) {
            match a.equal_as_sets(b) {
                Ok(true) => {}
                _ => {
                    out.failures
                        .push(format!("case {case}: the partitions differ"));
                    break;
                }
            }
        }
        // components of any interval are again intervals
        let interval = match g.upset(&pools, 2).minus(&g.upset(&pools, 2)) {
            Ok(i) => i,
            Err(err) => {
                out.failures.push(format!("case {case}: difference failed: {err}"));
                continue;
            }
        };
        for c in interval.order_components() {
            if !c.is_interval() {
                out.failures
                    .push(format!("case {case}: a component is not an interval"));
            }
        }
    }
    out
}

/// Criterion: closed differences of closed upsets pass the fixed-point test
/// and decompose back into the pair that cuts them out, while the closed box
/// is rejected.
pub fn interval_characterization_suite(seed: u64, cases: usize) -> SuiteOutcome {
    let mut out = SuiteOutcome::new("interval characterization and decomposition");
    let mut g = Gen::new(seed);
    for case in 0..cases {
        out.cases += 1;
        let dim = case % 3 + 1;
        let pools = g.pools(dim, 4);
        let i = g.closed_class_interval(&pools);
        match i.is_closed_class_interval() {
            Ok(true) => {}
            Ok(false) => {
                out.failures
                    .push(format!("case {case}: a closed difference failed the fixed-point test"));
                continue;
            }
            Err(err) => {
                out.failures.push(format!("case {case}: {err}"));
                continue;
            }
        }
        match i.closed_interval_decompose() {
            Ok((u, v)) => {
                let reconstructed = u
                    .minus(&v)
                    .and_then(|s| s.equal_as_sets(&i))
                    .unwrap_or(false);
                if !reconstructed {
                    out.failures
                        .push(format!("case {case}: decomposition does not reconstruct"));
                }
                if !(u.is_upset() && u.is_closed_class() && v.is_upset() && v.is_closed_class()) {
                    out.failures
                        .push(format!("case {case}: decomposition pieces are not closed upsets"));
                }
            }
            Err(err) => out.failures.push(format!("case {case}: {err}")),
        }
    }
    // the closed unit box is an interval but not in the closed class
    out.cases += 1;
    let one = Rat::int(1);
    let two = Rat::int(2);
    let grid = Grid::new(vec![vec![one, two], vec![one, two]]).expect("increasing breakpoints");
    let cells: Vec<Vec<usize>> = (1..=3)
        .flat_map(|x| (1..=3).map(move |y| vec![x, y]))
        .collect();
    let boxed = CellSet::from_cells(grid, &cells).expect("cells are in range");
    match boxed.closed_interval_decompose() {
        Err(crate::Error::NotClosedClass(_)) => {}
        other => out.failures.push(format!(
            "the closed box was not rejected as expected: {other:?}"
        )),
    }
    out
}

/// Everything the release gate checks, in one serializable report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FullReport {
    pub seed: u64,
    pub field_characteristic: u64,
    pub counit: SuiteOutcome,
    pub hom_dimension: SuiteOutcome,
    pub negative_controls: NegativeControlReport,
    pub crosscheck: SuiteOutcome,
    pub band_case: BandCaseReport,
    pub closure_laws: SuiteOutcome,
    pub component_agreement: SuiteOutcome,
    pub interval_characterization: SuiteOutcome,
}

impl FullReport {
    pub fn passed(&self) -> bool {
        self.counit.passed()
            && self.hom_dimension.passed()
            && self.negative_controls.passed()
            && self.crosscheck.passed()
            && self.band_case.passed()
            && self.closure_laws.passed()
            && self.component_agreement.passed()
            && self.interval_characterization.passed()
    }
}

pub fn run_all(seed: u64) -> FullReport {
    FullReport {
        seed,
        field_characteristic: field().modulus(),
        counit: counit_suite(seed, 200),
        hom_dimension: hom_dimension_suite(seed.wrapping_add(1), 200),
        negative_controls: negative_controls(),
        crosscheck: crosscheck_suite(seed.wrapping_add(2), 50),
        band_case: band_case(),
        closure_laws: closure_law_suite(seed.wrapping_add(3), 200),
        component_agreement: component_agreement_suite(seed.wrapping_add(4), 100),
        interval_characterization: interval_characterization_suite(seed.wrapping_add(5), 100),
    }
}
