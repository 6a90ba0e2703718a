//! Manifest files name every object a command can operate on: posets,
//! monotone maps, staircase sets, encodings, modules, morphisms and sample
//! plans. Later sections refer to earlier ones by name, and loading resolves
//! all references and validates each object, so a command that receives a
//! [`Manifest`] only ever sees well-formed data.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use permod::encoding::Encoding;
use permod::linalg::{Fp, Matrix};
use permod::oracle::SamplePlan;
use permod::persistence::{EncodedModule, Morphism, PfdModule};
use permod::poset::{FinitePoset, MonotoneMap, PosetJson};
use permod::rational::Rat;
use permod::staircase::{eval, CellSet, SetExpr};

use crate::CliError;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestDoc {
    /// Prime characteristic for every module in the file; 101 when absent.
    #[serde(default)]
    pub field_characteristic: Option<u64>,
    #[serde(default)]
    pub posets: BTreeMap<String, PosetJson>,
    #[serde(default)]
    pub maps: BTreeMap<String, MapDoc>,
    #[serde(default)]
    pub sets: BTreeMap<String, SetExpr>,
    #[serde(default)]
    pub encodings: BTreeMap<String, EncodingDoc>,
    #[serde(default)]
    pub modules: BTreeMap<String, ModuleDoc>,
    #[serde(default)]
    pub morphisms: BTreeMap<String, MorphismDoc>,
    #[serde(default)]
    pub plans: BTreeMap<String, PlanDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDoc {
    pub source: String,
    pub target: String,
    /// Source element id to target element id; every source element needs one.
    pub assignment: BTreeMap<String, String>,
}

/// A staircase set in place: either the name of an entry in `sets` or an
/// inline expression.
#[derive(Deserialize)]
#[serde(untagged)]
pub enum SetRef {
    Name(String),
    Inline(SetExpr),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncodingDoc {
    pub target: String,
    /// One staircase set per target element; together they must partition the
    /// ambient space.
    pub fibers: BTreeMap<String, SetRef>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleDoc {
    /// Base poset by name; exactly one of `poset` and `encoding` is set.
    #[serde(default)]
    pub poset: Option<String>,
    /// Encoding by name; the module then lives over the encoding's target.
    #[serde(default)]
    pub encoding: Option<String>,
    /// Shorthand for the interval module supported on these elements.
    #[serde(default)]
    pub interval: Option<Vec<String>>,
    /// Pointwise dimensions; omitted elements get zero.
    #[serde(default)]
    pub dims: BTreeMap<String, usize>,
    /// Cover maps keyed `"from->to"`, row-major residue matrices.
    #[serde(default)]
    pub covers: BTreeMap<String, Vec<Vec<u64>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismDoc {
    pub source: String,
    pub target: String,
    /// Component matrices keyed by base element id; missing components are
    /// zero.
    #[serde(default)]
    pub components: BTreeMap<String, Vec<Vec<u64>>>,
}

/// Sample points for cross-checking: either an explicit point list or per-axis
/// values whose product grid is taken.
#[derive(Deserialize)]
#[serde(untagged)]
pub enum PlanDoc {
    Points(Vec<Vec<String>>),
    Axes { axes: Vec<Vec<String>> },
}

pub enum ModuleEntry {
    Plain(PfdModule),
    Encoded(EncodedModule),
}

impl ModuleEntry {
    /// The underlying module over its finite base poset.
    pub fn plain(&self) -> &PfdModule {
        match self {
            ModuleEntry::Plain(m) => m,
            ModuleEntry::Encoded(e) => &e.module,
        }
    }

    pub fn encoded(&self, name: &str) -> Result<&EncodedModule, CliError> {
        match self {
            ModuleEntry::Encoded(e) => Ok(e),
            ModuleEntry::Plain(_) => Err(CliError::Parse(format!(
                "module {name:?} has no encoding attached; declare it over an encoding"
            ))),
        }
    }
}

pub struct MorphismEntry {
    pub source: String,
    pub target: String,
    pub components: BTreeMap<String, Matrix>,
}

pub struct Manifest {
    pub field: Fp,
    pub posets: BTreeMap<String, FinitePoset>,
    pub maps: BTreeMap<String, MonotoneMap>,
    pub sets: BTreeMap<String, CellSet>,
    pub encodings: BTreeMap<String, Encoding>,
    pub modules: BTreeMap<String, ModuleEntry>,
    pub morphisms: BTreeMap<String, MorphismEntry>,
    pub plans: BTreeMap<String, SamplePlan>,
}

pub fn lookup<'a, T>(
    map: &'a BTreeMap<String, T>,
    kind: &'static str,
    name: &str,
) -> Result<&'a T, CliError> {
    map.get(name).ok_or_else(|| CliError::UnresolvedReference {
        kind,
        name: name.to_string(),
    })
}

pub fn load(path: &Path, field_override: Option<u64>) -> Result<Manifest, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let doc: ManifestDoc =
        serde_json::from_str(&text).map_err(|e| CliError::Parse(e.to_string()))?;
    resolve(doc, field_override)
}

pub fn resolve(doc: ManifestDoc, field_override: Option<u64>) -> Result<Manifest, CliError> {
    let characteristic = field_override
        .or(doc.field_characteristic)
        .unwrap_or(Fp::DEFAULT_CHARACTERISTIC);
    let field = Fp::new(characteristic)?;

    let mut posets = BTreeMap::new();
    for (name, json) in &doc.posets {
        posets.insert(name.clone(), FinitePoset::from_json(json)?);
    }

    let mut maps = BTreeMap::new();
    for (name, map) in &doc.maps {
        let source = lookup(&posets, "poset", &map.source)?;
        let target = lookup(&posets, "poset", &map.target)?;
        for key in map.assignment.keys() {
            source.index_of(key)?;
        }
        let mut assignment = Vec::with_capacity(source.len());
        for id in source.ids() {
            let image = map.assignment.get(id).ok_or_else(|| {
                CliError::Parse(format!("map {name:?} does not assign {id:?}"))
            })?;
            assignment.push(target.index_of(image)?);
        }
        maps.insert(
            name.clone(),
            MonotoneMap::new(source.clone(), target.clone(), assignment)?,
        );
    }

    let mut sets = BTreeMap::new();
    for (name, expr) in &doc.sets {
        sets.insert(name.clone(), eval(expr)?);
    }

    let mut encodings = BTreeMap::new();
    for (name, enc) in &doc.encodings {
        let target = lookup(&posets, "poset", &enc.target)?;
        for key in enc.fibers.keys() {
            target.index_of(key)?;
        }
        let mut fibers = Vec::with_capacity(target.len());
        for id in target.ids() {
            let fiber = match enc.fibers.get(id) {
                Some(SetRef::Name(set_name)) => lookup(&sets, "set", set_name)?.clone(),
                Some(SetRef::Inline(expr)) => eval(expr)?,
                None => {
                    return Err(CliError::Parse(format!(
                        "encoding {name:?} gives no fiber for {id:?}"
                    )))
                }
            };
            fibers.push(fiber);
        }
        let (encoding, pruned) = Encoding::from_fibers(target.clone(), &fibers)?;
        if !pruned.is_empty() {
            return Err(CliError::Parse(format!(
                "encoding {name:?} has empty fibers for {pruned:?}"
            )));
        }
        encodings.insert(name.clone(), encoding);
    }

    let mut modules = BTreeMap::new();
    for (name, m) in &doc.modules {
        let entry = match (&m.poset, &m.encoding) {
            (Some(p), None) => {
                let base = lookup(&posets, "poset", p)?.clone();
                ModuleEntry::Plain(build_module(base, field, m, name)?)
            }
            (None, Some(e)) => {
                let encoding = lookup(&encodings, "encoding", e)?.clone();
                let module = build_module(encoding.target().clone(), field, m, name)?;
                ModuleEntry::Encoded(EncodedModule::new(encoding, module)?)
            }
            _ => {
                return Err(CliError::Parse(format!(
                    "module {name:?} must name exactly one of \"poset\" or \"encoding\""
                )))
            }
        };
        modules.insert(name.clone(), entry);
    }

    let mut morphisms = BTreeMap::new();
    for (name, mor) in &doc.morphisms {
        let source = lookup(&modules, "module", &mor.source)?.plain();
        let target = lookup(&modules, "module", &mor.target)?.plain();
        if source.base() != target.base() {
            return Err(CliError::Parse(format!(
                "morphism {name:?} connects modules over different base posets"
            )));
        }
        let mut components = BTreeMap::new();
        for (id, rows) in &mor.components {
            source.base().index_of(id)?;
            components.insert(id.clone(), Matrix::from_residue_rows(field, rows)?);
        }
        build_morphism(source, target, &components)?;
        morphisms.insert(
            name.clone(),
            MorphismEntry {
                source: mor.source.clone(),
                target: mor.target.clone(),
                components,
            },
        );
    }

    let mut plans = BTreeMap::new();
    for (name, plan) in &doc.plans {
        let plan = match plan {
            PlanDoc::Points(points) => SamplePlan::new(parse_points(points)?)?,
            PlanDoc::Axes { axes } => SamplePlan::grid(&parse_points(axes)?)?,
        };
        plans.insert(name.clone(), plan);
    }

    Ok(Manifest {
        field,
        posets,
        maps,
        sets,
        encodings,
        modules,
        morphisms,
        plans,
    })
}

fn build_module(
    base: FinitePoset,
    field: Fp,
    doc: &ModuleDoc,
    name: &str,
) -> Result<PfdModule, CliError> {
    if let Some(subset) = &doc.interval {
        if !doc.dims.is_empty() || !doc.covers.is_empty() {
            return Err(CliError::Parse(format!(
                "module {name:?} mixes \"interval\" with explicit dims or covers"
            )));
        }
        let indices: Vec<usize> = subset
            .iter()
            .map(|id| base.index_of(id))
            .collect::<permod::Result<_>>()?;
        return Ok(PfdModule::interval_module(&base, field, &indices)?);
    }
    let mut dims = vec![0usize; base.len()];
    for (id, &d) in &doc.dims {
        dims[base.index_of(id)?] = d;
    }
    let mut cover_maps = BTreeMap::new();
    for (key, rows) in &doc.covers {
        let (from, to) = key.split_once("->").ok_or_else(|| {
            CliError::Parse(format!(
                "cover key {key:?} in module {name:?} is not of the form \"from->to\""
            ))
        })?;
        let a = base.index_of(from.trim())?;
        let b = base.index_of(to.trim())?;
        cover_maps.insert((a, b), Matrix::from_residue_rows(field, rows)?);
    }
    Ok(PfdModule::new(base, field, dims, cover_maps)?)
}

/// Fill the missing components with zero matrices and validate naturality.
pub fn build_morphism(
    source: &PfdModule,
    target: &PfdModule,
    components: &BTreeMap<String, Matrix>,
) -> Result<Morphism, CliError> {
    let field = source.field();
    let full: Vec<Matrix> = (0..source.base().len())
        .map(|i| match components.get(source.base().id(i)) {
            Some(m) => m.clone(),
            None => Matrix::zero(field, target.dim_at(i), source.dim_at(i)),
        })
        .collect();
    Ok(Morphism::new(source.clone(), target.clone(), full)?)
}

fn parse_points(rows: &[Vec<String>]) -> Result<Vec<Vec<Rat>>, CliError> {
    rows.iter()
        .map(|row| row.iter().map(|s| parse_rat(s)).collect())
        .collect()
}

fn parse_rat(s: &str) -> Result<Rat, CliError> {
    s.parse()
        .map_err(|_| CliError::Parse(format!("{s:?} is not a rational number")))
}
