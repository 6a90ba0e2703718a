//! One function per subcommand. Each returns a rendered report plus a pass
//! flag; `main` prints the report and turns a failed check into exit code 1.

use serde_json::{json, Map, Value};

use permod::oracle::crosscheck_operation;
use permod::persistence::{
    abelian_pipeline, counit_check, hom_space, pulled_back_hom, AbelianOp, HomBasis,
    MorphismSpec, PipelineOutput,
};
use permod::staircase::CellSet;
use permod::suites::run_all;

use crate::manifest::{lookup, Manifest, ModuleEntry};
use crate::{CliError, OpArgs};

pub enum Rendered {
    Json(Value),
    Text(String),
}

pub struct Outcome {
    pub body: Rendered,
    pub passed: bool,
}

fn report(value: Value) -> Outcome {
    Outcome {
        body: Rendered::Json(value),
        passed: true,
    }
}

fn verdict(value: Value, passed: bool) -> Outcome {
    Outcome {
        body: Rendered::Json(value),
        passed,
    }
}

/// Loading already resolved every reference and validated every object, so
/// this reports what the manifest contains.
pub fn validate(m: &Manifest) -> Outcome {
    let modules: Map<String, Value> = m
        .modules
        .iter()
        .map(|(name, entry)| {
            let module = entry.plain();
            let detail = json!({
                "encoded": matches!(entry, ModuleEntry::Encoded(_)),
                "total_dim": module.total_dim(),
            });
            (name.clone(), detail)
        })
        .collect();
    report(json!({
        "valid": true,
        "field_characteristic": m.field.modulus(),
        "counts": {
            "posets": m.posets.len(),
            "maps": m.maps.len(),
            "sets": m.sets.len(),
            "encodings": m.encodings.len(),
            "modules": m.modules.len(),
            "morphisms": m.morphisms.len(),
            "plans": m.plans.len(),
        },
        "modules": modules,
    }))
}

pub fn common(m: &Manifest, first: &str, second: &str) -> Result<Outcome, CliError> {
    let a = lookup(&m.encodings, "encoding", first)?;
    let b = lookup(&m.encodings, "encoding", second)?;
    let merged = a.common_encoding(b)?;
    let target = merged.encoding.target();
    let ids = target.ids();
    let mut to_first = Map::new();
    let mut to_second = Map::new();
    let mut fiber_cells = Map::new();
    for (i, id) in ids.iter().enumerate() {
        let fa = merged.to_first.target().id(merged.to_first.apply(i));
        let fb = merged.to_second.target().id(merged.to_second.apply(i));
        to_first.insert(id.clone(), fa.into());
        to_second.insert(id.clone(), fb.into());
        fiber_cells.insert(id.clone(), merged.encoding.fiber(i).cell_count().into());
    }
    Ok(report(json!({
        "first": first,
        "second": second,
        "elements": ids,
        "to_first": to_first,
        "to_second": to_second,
        "fiber_cells": fiber_cells,
    })))
}

pub fn refine(m: &Manifest, name: &str) -> Result<Outcome, CliError> {
    let encoding = lookup(&m.encodings, "encoding", name)?;
    let refinement = encoding.connective_refinement()?;
    let refined = refinement.refined.target();
    let mut projection = Map::new();
    let mut fiber_cells = Map::new();
    for (i, id) in refined.ids().iter().enumerate() {
        let down = refinement.proj.target().id(refinement.proj.apply(i));
        projection.insert(id.clone(), down.into());
        fiber_cells.insert(id.clone(), refinement.refined.fiber(i).cell_count().into());
    }
    Ok(report(json!({
        "encoding": name,
        "original_elements": encoding.target().ids(),
        "refined_elements": refined.ids(),
        "projection": projection,
        "fiber_cells": fiber_cells,
        "cell_conditions": refinement.refined.satisfies_ff_cell_conditions(),
    })))
}

pub fn check_ff_map(m: &Manifest, name: &str) -> Result<Outcome, CliError> {
    let map = lookup(&m.maps, "map", name)?;
    let satisfied = map.satisfies_ff_conditions();
    Ok(verdict(
        json!({ "kind": "map", "name": name, "satisfied": satisfied }),
        satisfied,
    ))
}

pub fn check_ff_encoding(m: &Manifest, name: &str) -> Result<Outcome, CliError> {
    let encoding = lookup(&m.encodings, "encoding", name)?;
    let satisfied = encoding.satisfies_ff_cell_conditions();
    let closed_class = encoding.fibers_in_closed_class();
    Ok(verdict(
        json!({
            "kind": "encoding",
            "name": name,
            "satisfied": satisfied,
            "closed_class": closed_class,
        }),
        satisfied,
    ))
}

pub fn counit(m: &Manifest, map_name: &str, module_name: &str) -> Result<Outcome, CliError> {
    let map = lookup(&m.maps, "map", map_name)?;
    let module = lookup(&m.modules, "module", module_name)?.plain();
    let verdicts = counit_check(map, module)?;
    let all_iso = verdicts.iter().all(|v| v.iso);
    Ok(verdict(
        json!({
            "map": map_name,
            "module": module_name,
            "verdicts": verdicts,
            "all_isomorphisms": all_iso,
        }),
        all_iso,
    ))
}

fn basis_json(basis: &HomBasis) -> Vec<Value> {
    basis
        .basis()
        .iter()
        .map(|f| serde_json::to_value(f.to_json()).expect("morphisms serialize"))
        .collect()
}

pub fn hom(m: &Manifest, source: &str, target: &str) -> Result<Outcome, CliError> {
    let a = lookup(&m.modules, "module", source)?;
    let b = lookup(&m.modules, "module", target)?;
    let (basis, over) = match (a, b) {
        (ModuleEntry::Encoded(a), ModuleEntry::Encoded(b)) => {
            (pulled_back_hom(a, b)?, "refined common encoding")
        }
        (ModuleEntry::Plain(a), ModuleEntry::Plain(b)) => {
            if a.base() != b.base() {
                return Err(CliError::Parse(format!(
                    "modules {source:?} and {target:?} live over different posets"
                )));
            }
            (hom_space(a, b)?, "shared base poset")
        }
        _ => {
            return Err(CliError::Parse(format!(
                "modules {source:?} and {target:?} mix encoded and plain; hom needs both alike"
            )))
        }
    };
    Ok(report(json!({
        "source": source,
        "target": target,
        "over": over,
        "dim": basis.dim(),
        "basis": basis_json(&basis),
    })))
}

fn morphism_spec(m: &Manifest, args: &OpArgs) -> Result<MorphismSpec, CliError> {
    if let Some(name) = &args.morphism {
        let entry = lookup(&m.morphisms, "morphism", name)?;
        if entry.source != args.source || entry.target != args.target {
            return Err(CliError::Parse(format!(
                "morphism {name:?} maps {:?} to {:?}, not {:?} to {:?}",
                entry.source, entry.target, args.source, args.target
            )));
        }
        return Ok(MorphismSpec::Direct(entry.components.clone()));
    }
    if let Some(coeffs) = &args.coeffs {
        return Ok(MorphismSpec::HomCombination(coeffs.clone()));
    }
    Ok(MorphismSpec::HomIndex(args.hom_index.unwrap_or(0)))
}

fn pipeline_report(out: &PipelineOutput) -> Value {
    let refined = out.refinement.refined.target();
    let mut dims = Map::new();
    let mut projection = Map::new();
    for (i, id) in refined.ids().iter().enumerate() {
        dims.insert(id.clone(), out.result.module.dim_at(i).into());
        let down = out.refinement.proj.target().id(out.refinement.proj.apply(i));
        projection.insert(id.clone(), down.into());
    }
    json!({
        "operation": out.op.name(),
        "hom_dim": out.hom.dim(),
        "common_elements": out.common.encoding.target().ids(),
        "refined_elements": refined.ids(),
        "projection": projection,
        "morphism": out.morphism.to_json(),
        "dims": dims,
        "result": out.result.to_json(),
        "witness": out.witness.to_json(),
        "certification": out.certification,
    })
}

pub fn abelian(m: &Manifest, op: AbelianOp, args: &OpArgs) -> Result<Outcome, CliError> {
    let a = lookup(&m.modules, "module", &args.source)?.encoded(&args.source)?;
    let b = lookup(&m.modules, "module", &args.target)?.encoded(&args.target)?;
    let spec = morphism_spec(m, args)?;
    let out = abelian_pipeline(op, a, b, &spec)?;
    Ok(report(pipeline_report(&out)))
}

fn cells_json(set: &CellSet) -> Value {
    json!({ "count": set.cell_count(), "cells": set.cells() })
}

pub fn components(m: &Manifest, name: &str) -> Result<Outcome, CliError> {
    let set = lookup(&m.sets, "set", name)?;
    let order: Vec<Value> = set.order_components().iter().map(cells_json).collect();
    let topological: Vec<Value> = set
        .topological_components()
        .iter()
        .map(cells_json)
        .collect();
    Ok(report(json!({
        "set": name,
        "counts": { "order": order.len(), "topological": topological.len() },
        "order_components": order,
        "topological_components": topological,
    })))
}

pub fn closure(m: &Manifest, name: &str) -> Result<Outcome, CliError> {
    let set = lookup(&m.sets, "set", name)?;
    Ok(report(json!({
        "set": name,
        "cells": cells_json(set),
        "closure_above": cells_json(&set.closure_above()),
        "interior_above": cells_json(&set.interior_above()),
        "topological_closure": cells_json(&set.topological_closure()),
        "up_closure": cells_json(&set.up_closure()),
        "down_closure": cells_json(&set.down_closure()),
        "is_upset": set.is_upset(),
        "is_downset": set.is_downset(),
        "is_closed_class": set.is_closed_class(),
    })))
}

pub fn decompose(m: &Manifest, name: &str) -> Result<Outcome, CliError> {
    let set = lookup(&m.sets, "set", name)?;
    let (u, v) = set.closed_interval_decompose()?;
    let reconstructs = u.minus(&v)?.equal_as_sets(set)?;
    Ok(report(json!({
        "set": name,
        "upper": cells_json(&u),
        "removed": cells_json(&v),
        "reconstructs": reconstructs,
    })))
}

pub fn crosscheck(
    m: &Manifest,
    op: AbelianOp,
    args: &OpArgs,
    plan_name: &str,
) -> Result<Outcome, CliError> {
    let a = lookup(&m.modules, "module", &args.source)?.encoded(&args.source)?;
    let b = lookup(&m.modules, "module", &args.target)?.encoded(&args.target)?;
    let spec = morphism_spec(m, args)?;
    let plan = lookup(&m.plans, "plan", plan_name)?;
    let result = crosscheck_operation(op, a, b, &spec, plan)?;
    let passed = result.passed();
    Ok(verdict(
        serde_json::to_value(result).expect("crosscheck reports serialize"),
        passed,
    ))
}

pub fn export_dot(m: &Manifest, name: &str) -> Result<String, CliError> {
    if let Some(poset) = m.posets.get(name) {
        return Ok(poset.to_dot());
    }
    if let Some(encoding) = m.encodings.get(name) {
        return Ok(encoding.to_dot());
    }
    Err(CliError::UnresolvedReference {
        kind: "poset or encoding",
        name: name.to_string(),
    })
}

pub fn suite(seed: u64) -> Outcome {
    let full = run_all(seed);
    let passed = full.passed();
    verdict(
        serde_json::to_value(full).expect("suite reports serialize"),
        passed,
    )
}
