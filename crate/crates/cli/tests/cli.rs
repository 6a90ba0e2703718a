//! End-to-end runs of the compiled binary against the shipped manifests.

use std::path::PathBuf;
use std::process::{Command, Output};

fn manifest(name: &str) -> String {
    let mut path = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    path.push("manifests");
    path.push(name);
    path.to_str().expect("manifest paths are utf-8").to_string()
}

fn permod(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_permod"))
        .args(args)
        .output()
        .expect("the binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

fn stderr_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stderr).expect("stderr is a JSON error")
}

#[test]
fn validate_accepts_the_quadrant_manifest() {
    let out = permod(&["validate", &manifest("quadrant.json")]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = stdout_json(&out);
    assert_eq!(report["valid"], true);
    assert_eq!(report["field_characteristic"], 101);
    assert_eq!(report["modules"]["free"]["total_dim"], 1);
}

#[test]
fn kernel_of_the_band_quotient_is_an_interval_module() {
    let out = permod(&["kernel", &manifest("lshape.json"), "Outer", "Band"]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = stdout_json(&out);
    assert_eq!(report["hom_dim"], 1);
    assert_eq!(report["certification"]["all_in_class"], true);

    let dims = report["dims"].as_object().expect("dims is an object");
    let mut values: Vec<u64> = dims.values().map(|v| v.as_u64().unwrap()).collect();
    values.sort();
    assert_eq!(values, [0, 0, 1], "one refined fiber carries the kernel");

    // the supported fiber is the inner quadrant: a 2 x 2 block of cells
    let supported: Vec<&str> = dims
        .iter()
        .filter(|(_, v)| v.as_u64() == Some(1))
        .map(|(k, _)| k.as_str())
        .collect();
    assert_eq!(supported.len(), 1);
    let fibers = report["certification"]["fibers"]
        .as_array()
        .expect("per-fiber reports");
    let fiber = fibers
        .iter()
        .find(|f| f["element"].as_str() == Some(supported[0]))
        .expect("the supported element is certified");
    assert_eq!(fiber["cells"], 4);
    assert_eq!(fiber["interval"], true);
    assert_eq!(fiber["closed_class"], true);
}

#[test]
fn cokernel_of_the_inclusion_is_supported_on_the_band() {
    let out = permod(&["cokernel", &manifest("lshape.json"), "Inner", "Outer"]);
    assert!(out.status.success());
    let report = stdout_json(&out);
    let dims = report["dims"].as_object().unwrap();
    let mut values: Vec<u64> = dims.values().map(|v| v.as_u64().unwrap()).collect();
    values.sort();
    assert_eq!(values, [0, 0, 1]);
}

#[test]
fn counit_reports_the_antichain_collapse_and_exits_nonzero() {
    let out = permod(&[
        "counit",
        &manifest("antichain.json"),
        "--map",
        "collapse",
        "--module",
        "line",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let report = stdout_json(&out);
    assert_eq!(report["all_isomorphisms"], false);
    let verdict = &report["verdicts"][0];
    assert_eq!(verdict["colimit_dim"], 2);
    assert_eq!(verdict["target_dim"], 1);
    assert_eq!(verdict["injective"], false);
    assert_eq!(verdict["surjective"], true);
}

#[test]
fn check_ff_rejects_the_collapse_map() {
    let out = permod(&[
        "check-ff",
        &manifest("antichain.json"),
        "--map",
        "collapse",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["satisfied"], false);
}

#[test]
fn decompose_rejects_the_box() {
    let out = permod(&["decompose", &manifest("quadrant.json"), "box"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_json(&out);
    assert_eq!(err["error"]["kind"], "core");
    assert!(err["error"]["message"]
        .as_str()
        .unwrap()
        .contains("closed staircase class"));
}

#[test]
fn decompose_presents_the_quadrant_exactly() {
    let out = permod(&["decompose", &manifest("quadrant.json"), "quadrant"]);
    assert!(out.status.success());
    let report = stdout_json(&out);
    assert_eq!(report["reconstructs"], true);
    assert_eq!(report["removed"]["count"], 0);
}

#[test]
fn unknown_names_exit_with_a_reference_error() {
    let out = permod(&["hom", &manifest("quadrant.json"), "free", "missing"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"]["kind"], "unresolved-reference");
}

#[test]
fn crosscheck_passes_on_the_lshape_window() {
    let out = permod(&[
        "crosscheck",
        &manifest("lshape.json"),
        "cokernel",
        "Inner",
        "Outer",
        "--plan",
        "window",
    ]);
    assert!(out.status.success());
    let report = stdout_json(&out);
    assert_eq!(report["mismatch"], serde_json::Value::Null);
    assert_eq!(report["checked_points"], 25);
}

#[test]
fn export_dot_renders_the_band_poset() {
    let out = permod(&[
        "export-dot",
        &manifest("lshape.json"),
        "bands",
        "--format",
        "dot",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("digraph"));
    assert!(text.contains("\"lo\" -> \"mid\""));
}

#[test]
fn a_named_morphism_drives_the_pipeline() {
    let out = permod(&[
        "cokernel",
        &manifest("quadrant.json"),
        "free",
        "free",
        "--morphism",
        "identity",
    ]);
    assert!(out.status.success());
    let report = stdout_json(&out);
    let dims = report["dims"].as_object().unwrap();
    assert!(
        dims.values().all(|v| v.as_u64() == Some(0)),
        "the identity has zero cokernel"
    );
}
