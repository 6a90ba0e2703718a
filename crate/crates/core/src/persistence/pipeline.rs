//! End-to-end kernel, image, and cokernel computation for encoded modules:
//! merge the two encodings, refine the merged one until fibers are connected,
//! pull both modules back, take the operation pointwise over the refined
//! target, and certify that every refined fiber sits in the closed class.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::encoding::{ClosedClassReport, CommonEncoding, EncodingRefinement};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::poset::MonotoneMap;

use super::hom::{hom_space, HomBasis};
use super::morphism::Morphism;
use super::EncodedModule;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AbelianOp {
    Kernel,
    Image,
    Cokernel,
}

impl AbelianOp {
    pub fn name(self) -> &'static str {
        match self {
            AbelianOp::Kernel => "kernel",
            AbelianOp::Image => "image",
            AbelianOp::Cokernel => "cokernel",
        }
    }
}

impl FromStr for AbelianOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kernel" => Ok(AbelianOp::Kernel),
            "image" => Ok(AbelianOp::Image),
            "cokernel" => Ok(AbelianOp::Cokernel),
            other => Err(Error::Invalid(format!("unknown operation {other:?}"))),
        }
    }
}

/// How to pick the morphism the operation is applied to.
#[derive(Clone, Debug)]
pub enum MorphismSpec {
    /// Components over the modules' shared base poset, keyed by element id;
    /// missing components are zero. Requires both inputs over one encoding.
    Direct(BTreeMap<String, Matrix>),
    /// One member of the canonical basis of the pulled-back hom space.
    HomIndex(usize),
    /// An integer combination of the canonical hom basis.
    HomCombination(Vec<i64>),
}

/// Everything the pipeline produced, kept so callers can report each stage.
#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub op: AbelianOp,
    pub common: CommonEncoding,
    pub refinement: EncodingRefinement,
    /// Composite reindexings from the refined target into each input's target.
    pub to_source_base: MonotoneMap,
    pub to_target_base: MonotoneMap,
    /// The inputs pulled back over the refined encoding.
    pub source: EncodedModule,
    pub target: EncodedModule,
    pub hom: HomBasis,
    pub morphism: Morphism,
    /// The operation's value, encoded over the refined encoding.
    pub result: EncodedModule,
    /// Kernel and image come with their inclusion, cokernel with its
    /// projection.
    pub witness: Morphism,
    pub certification: ClosedClassReport,
}

impl PipelineOutput {
    pub fn hom_dim(&self) -> usize {
        self.hom.dim()
    }
}

struct PipelineSetup {
    common: CommonEncoding,
    refinement: EncodingRefinement,
    to_source_base: MonotoneMap,
    to_target_base: MonotoneMap,
    pulled_source: super::PfdModule,
    pulled_target: super::PfdModule,
}

fn setup(a: &EncodedModule, b: &EncodedModule) -> Result<PipelineSetup> {
    let common = a.encoding.common_encoding(&b.encoding)?;
    let refinement = common.encoding.connective_refinement()?;
    let to_source_base = refinement.proj.then(&common.to_first)?;
    let to_target_base = refinement.proj.then(&common.to_second)?;
    let pulled_source = a.module.pullback(&to_source_base)?;
    let pulled_target = b.module.pullback(&to_target_base)?;
    Ok(PipelineSetup {
        common,
        refinement,
        to_source_base,
        to_target_base,
        pulled_source,
        pulled_target,
    })
}

/// The hom space the pipeline draws its morphisms from: between the two
/// inputs after encoding merge, refinement, and pullback.
pub fn pulled_back_hom(a: &EncodedModule, b: &EncodedModule) -> Result<HomBasis> {
    let s = setup(a, b)?;
    hom_space(&s.pulled_source, &s.pulled_target)
}

/// Run the whole pipeline for one operation on a chosen morphism `a -> b`.
pub fn abelian_pipeline(
    op: AbelianOp,
    a: &EncodedModule,
    b: &EncodedModule,
    spec: &MorphismSpec,
) -> Result<PipelineOutput> {
    let PipelineSetup {
        common,
        refinement,
        to_source_base,
        to_target_base,
        pulled_source,
        pulled_target,
    } = setup(a, b)?;
    let hom = hom_space(&pulled_source, &pulled_target)?;
    let morphism = match spec {
        MorphismSpec::Direct(components) => {
            if a.module.base() != b.module.base()
                || to_source_base.assignment() != to_target_base.assignment()
            {
                return Err(Error::Invalid(
                    "explicit components need both modules over one encoding".into(),
                ));
            }
            let base = a.module.base();
            let mut named = Vec::with_capacity(base.len());
            for i in 0..base.len() {
                named.push(match components.get(base.id(i)) {
                    Some(m) => m.clone(),
                    None => Matrix::zero(
                        a.module.field(),
                        b.module.dim_at(i),
                        a.module.dim_at(i),
                    ),
                });
            }
            let direct = Morphism::new(a.module.clone(), b.module.clone(), named)?;
            let lifted: Vec<Matrix> = (0..refinement.refined.target().len())
                .map(|z| direct.component(to_source_base.apply(z)).clone())
                .collect();
            Morphism::new(pulled_source.clone(), pulled_target.clone(), lifted)?
        }
        MorphismSpec::HomIndex(i) => hom.member(*i)?.clone(),
        MorphismSpec::HomCombination(coeffs) => {
            hom.combination(&pulled_source, &pulled_target, coeffs)?
        }
    };
    let induced = match op {
        AbelianOp::Kernel => morphism.kernel()?,
        AbelianOp::Image => morphism.image()?,
        AbelianOp::Cokernel => morphism.cokernel()?,
    };
    let result = EncodedModule::new(refinement.refined.clone(), induced.module)?;
    let certification = refinement.refined.fibers_in_closed_class();
    let source = EncodedModule::new(refinement.refined.clone(), pulled_source)?;
    let target = EncodedModule::new(refinement.refined.clone(), pulled_target)?;
    Ok(PipelineOutput {
        op,
        common,
        refinement,
        to_source_base,
        to_target_base,
        source,
        target,
        hom,
        morphism,
        result,
        witness: induced.map,
        certification,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use super::super::PfdModule;
    use crate::encoding::Encoding;
    use crate::linalg::Fp;
    use crate::poset::FinitePoset;
    use crate::rational::Rat;
    use crate::staircase::{CellSet, Corner};

    fn f101() -> Fp {
        Fp::new(101).unwrap()
    }

    fn q(n: i64) -> Corner {
        Corner::At(Rat::int(n))
    }

    /// F at every cell of the upset, zero elsewhere, over a two-chain target.
    fn indicator(upset: &CellSet) -> EncodedModule {
        let target = FinitePoset::chain(vec!["out".into(), "in".into()]);
        let (encoding, pruned) =
            Encoding::from_fibers(target, &[upset.complement(), upset.clone()]).unwrap();
        assert!(pruned.is_empty());
        let inside = encoding.target().index_of("in").unwrap();
        let whole: Vec<usize> = vec![inside];
        let module =
            PfdModule::interval_module(encoding.target(), f101(), &whole).unwrap();
        EncodedModule::new(encoding, module).unwrap()
    }

    fn find_fiber(output: &PipelineOutput, cells: &CellSet) -> usize {
        let enc = &output.refinement.refined;
        (0..enc.target().len())
            .find(|&i| enc.fiber(i).equal_as_sets(cells).unwrap())
            .expect("no refined element has the requested fiber")
    }

    #[test]
    fn identity_has_zero_kernel_and_full_image() {
        let u = CellSet::principal_upset(&[q(0), q(0)]).unwrap();
        let m = indicator(&u);
        let mut comps = BTreeMap::new();
        comps.insert(
            "in".to_string(),
            Matrix::identity(f101(), 1),
        );
        let spec = MorphismSpec::Direct(comps);
        let kernel = abelian_pipeline(AbelianOp::Kernel, &m, &m, &spec).unwrap();
        assert!(kernel.result.module.is_zero());
        assert!(kernel.certification.all_in_class);
        let image = abelian_pipeline(AbelianOp::Image, &m, &m, &spec).unwrap();
        assert_eq!(
            image.result.module.total_dim(),
            image.target.module.total_dim()
        );
        let cokernel = abelian_pipeline(AbelianOp::Cokernel, &m, &m, &spec).unwrap();
        assert!(cokernel.result.module.is_zero());
    }

    #[test]
    fn quadrant_inclusion_has_staircase_cokernel() {
        let outer = CellSet::principal_upset(&[q(0), q(0)]).unwrap();
        let inner = CellSet::principal_upset(&[q(1), q(1)]).unwrap();
        let band = outer.minus(&inner).unwrap();
        let a = indicator(&inner);
        let b = indicator(&outer);
        let out = abelian_pipeline(AbelianOp::Kernel, &a, &b, &MorphismSpec::HomIndex(0)).unwrap();
        // the inclusion of the smaller quadrant is the only basis morphism
        assert_eq!(out.hom_dim(), 1);
        assert!(out.result.module.is_zero(), "an inclusion has zero kernel");
        let out = abelian_pipeline(AbelianOp::Image, &a, &b, &MorphismSpec::HomIndex(0)).unwrap();
        let inner_idx = find_fiber(&out, &inner);
        assert_eq!(out.result.module.dim_at(inner_idx), 1);
        assert_eq!(out.result.module.total_dim(), 1);
        let out =
            abelian_pipeline(AbelianOp::Cokernel, &a, &b, &MorphismSpec::HomIndex(0)).unwrap();
        let band_idx = find_fiber(&out, &band);
        let expected =
            PfdModule::interval_module(out.refinement.refined.target(), f101(), &[band_idx])
                .unwrap();
        assert_eq!(out.result.module, expected);
        assert!(out.certification.all_in_class);
    }

    #[test]
    fn quotient_onto_the_band_has_quadrant_kernel() {
        let outer = CellSet::principal_upset(&[q(0), q(0)]).unwrap();
        let inner = CellSet::principal_upset(&[q(1), q(1)]).unwrap();
        let band = outer.minus(&inner).unwrap();
        let whole = indicator(&outer);
        // the band module: F on the difference, over a three-element target
        let lo = outer.complement();
        let target = FinitePoset::chain(vec!["lo".into(), "mid".into(), "hi".into()]);
        let (encoding, pruned) =
            Encoding::from_fibers(target, &[lo, band.clone(), inner.clone()]).unwrap();
        assert!(pruned.is_empty());
        let mid = encoding.target().index_of("mid").unwrap();
        let band_module = EncodedModule::new(
            encoding.clone(),
            PfdModule::interval_module(encoding.target(), f101(), &[mid]).unwrap(),
        )
        .unwrap();
        let out = abelian_pipeline(
            AbelianOp::Kernel,
            &whole,
            &band_module,
            &MorphismSpec::HomIndex(0),
        )
        .unwrap();
        assert_eq!(out.hom_dim(), 1);
        let inner_idx = find_fiber(&out, &inner);
        let expected =
            PfdModule::interval_module(out.refinement.refined.target(), f101(), &[inner_idx])
                .unwrap();
        assert_eq!(out.result.module, expected);
        // exactness across the pair: image of the inclusion equals this kernel
        let a = indicator(&inner);
        let img = abelian_pipeline(AbelianOp::Image, &a, &whole, &MorphismSpec::HomIndex(0))
            .unwrap();
        assert_eq!(img.result.module.total_dim(), 1);
        assert_eq!(
            img.result.module.dim_at(find_fiber(&img, &inner)),
            1
        );
    }

    #[test]
    fn hom_combination_scales_the_witness() {
        let u = CellSet::principal_upset(&[q(0)]).unwrap();
        let m = indicator(&u);
        let out = abelian_pipeline(
            AbelianOp::Image,
            &m,
            &m,
            &MorphismSpec::HomCombination(vec![7]),
        )
        .unwrap();
        assert_eq!(out.result.module.total_dim(), 1);
        assert!(!out.morphism.is_zero());
        let zero = abelian_pipeline(
            AbelianOp::Image,
            &m,
            &m,
            &MorphismSpec::HomCombination(vec![0]),
        )
        .unwrap();
        assert!(zero.result.module.is_zero());
        assert_eq!(
            zero.source.module.total_dim(),
            zero.target.module.total_dim()
        );
    }

    #[test]
    fn direct_spec_rejects_mismatched_encodings() {
        let a = indicator(&CellSet::principal_upset(&[q(0), q(0)]).unwrap());
        let b = indicator(&CellSet::principal_upset(&[q(1), q(1)]).unwrap());
        let err = abelian_pipeline(
            AbelianOp::Kernel,
            &a,
            &b,
            &MorphismSpec::Direct(BTreeMap::new()),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Invalid(_)));
    }

    #[test]
    fn operation_names_round_trip() {
        for op in [AbelianOp::Kernel, AbelianOp::Image, AbelianOp::Cokernel] {
            assert_eq!(op.name().parse::<AbelianOp>().unwrap(), op);
        }
        assert!("homology".parse::<AbelianOp>().is_err());
    }
}
