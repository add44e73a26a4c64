use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn mhcy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mhcy"))
        .args(args)
        .env_remove("MHC_REPORT_DIR")
        .output()
        .expect("run mhcy")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn f(name: &str) -> String {
    fixture(name).display().to_string()
}

#[test]
fn verify_trivial_table() {
    let o = mhcy(&["verify", &f("t_on_line.scn")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("LHS           (1 + y)*[O_pt]"), "{out}");
    assert!(out.contains("RHS           (1 + y)*[O_pt]"), "{out}");
    assert!(out.contains("result        PASS"));
}

#[test]
fn verify_node_json_is_stable() {
    let a = mhcy(&["verify", &f("node.scn"), "--json"]);
    assert_eq!(a.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(doc["scenarios"][0]["defect"], "0");
    assert_eq!(doc["convention"], "shifted");
    assert_eq!(
        doc["scenarios"][0]["completeness"],
        "built-in presentation (sound)"
    );
    let b = mhcy(&["verify", &f("node.scn"), "--json"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn wrong_conventions_give_a_defect() {
    let o = mhcy(&[
        "verify",
        &f("node.scn"),
        "--json",
        "--conventions",
        &f("conventions_naive.toml"),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["scenarios"][0]["defect"], "(2*y + 2*y^2)*[O_pt]");
}

#[test]
fn three_planes_exit_one() {
    let o = mhcy(&["verify", &f("xyz.scn")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("defect        (-y - y^2)*[O_pt]"));
}

#[test]
fn multi_scenario_order_and_summary() {
    let o = mhcy(&[
        "verify",
        &f("t3_on_line.scn"),
        &f("node.scn"),
        &f("product_P2.scn"),
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let ids: Vec<&str> = doc["scenarios"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["scenario"].as_str().unwrap())
        .collect();
    assert_eq!(ids, ["t3_on_line", "node", "product_P2"]);
    assert_eq!(doc["summary"]["passed"], 3);
    assert_eq!(doc["scenarios"][2]["smooth_case"], true);
    assert_eq!(doc["scenarios"][2]["homology"]["normalized_denominator"], 0);
    assert!(doc["summary"].get("duration_ms").is_none());
}

#[test]
fn timings_and_y_eval() {
    let o = mhcy(&[
        "verify",
        &f("product_P1.scn"),
        "--json",
        "--timings",
        "--y-eval=-1/3",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(doc["summary"]["duration_ms"].is_string());
    assert_eq!(doc["scenarios"][0]["evaluation"]["y"], "-1/3");
    assert_eq!(
        doc["scenarios"][0]["evaluation"]["lhs"][0],
        serde_json::json!(["L1", "4/9"])
    );
    let bad = mhcy(&["verify", &f("product_P1.scn"), "--y-eval=half"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let node = std::fs::read_to_string(fixture("node.scn")).unwrap();
    let zero = dir.path().join("zero.scn");
    std::fs::write(
        &zero,
        node.replace("multiplicities = [1, 1]", "multiplicities = [1, 0]"),
    )
    .unwrap();
    let undeclared = dir.path().join("undeclared.scn");
    std::fs::write(
        &undeclared,
        node.replace(
            "components = [\"E1\", \"E2\"]\nvariety",
            "components = [\"E1\", \"E7\"]\nvariety",
        ),
    )
    .unwrap();
    let garbled = dir.path().join("garbled.scn");
    std::fs::write(&garbled, "id = ").unwrap();
    std::fs::copy(
        fixture("conventions.toml"),
        dir.path().join("conventions.toml"),
    )
    .unwrap();
    let cases = [
        (
            zero,
            "invariant violation: component `E2`: multiplicity must be positive",
        ),
        (
            undeclared,
            "cross-reference error: strata[2]: undeclared component `E7`",
        ),
        (garbled, "schema error"),
        (dir.path().join("missing.scn"), "io error"),
    ];
    for (path, msg) in cases {
        let o = mhcy(&["verify", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{}", path.display());
        assert!(stderr(&o).contains(msg), "{}", stderr(&o));
    }
    let usage = mhcy(&["frobnicate"]);
    assert_eq!(usage.status.code(), Some(2));
}

#[test]
fn missing_conventions_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.scn");
    std::fs::copy(fixture("t_on_line.scn"), &p).unwrap();
    let o = mhcy(&["verify", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("run `mhcy calibrate` first"));
}

#[test]
fn calibrate_reproduces_the_shipped_conventions() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("conv.toml");
    let o = mhcy(&["calibrate", &f("node.scn"), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("naive defect    (2*y + 2*y^2)*[O_pt]"));
    assert_eq!(
        std::fs::read_to_string(out).unwrap(),
        std::fs::read_to_string(fixture("conventions.toml")).unwrap()
    );
}

#[test]
fn class_and_nearby_verbs() {
    let o = mhcy(&["class", &f("t2_on_line.scn"), "--side", "lhs"]);
    assert_eq!(stdout(&o), "(2 + 2*y)*[O_pt]\n");
    let o = mhcy(&["class", &f("node.scn"), "--side=rhs"]);
    assert_eq!(
        stdout(&o),
        "(1 + 2*y + y^2)*[O_E1] + (1 + 2*y + y^2)*[O_E2] + (-1 - 2*y - y^2)*[O_pt]\n"
    );
    let o = mhcy(&["nearby", &f("node.scn")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(
        out.contains("Psi'     [E1] + [E2] - [pt] - L*[pt]"),
        "{out}"
    );
    assert!(out.contains("Phi'     -L*[pt]"));
    assert!(out.contains("A'Campo  0 = 0"));
}

#[test]
fn report_directory_override() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_mhcy"))
        .args(["verify", &f("t_on_line.scn"), "--json"])
        .env("MHC_REPORT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let written = std::fs::read(dir.path().join("verify-report.json")).unwrap();
    assert_eq!(written, o.stdout);
}

#[test]
fn user_presentation_flag() {
    let o = mhcy(&["verify", &f("node_user.scn"), "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(
        doc["scenarios"][0]["completeness"],
        "user presentation (equality modulo declared relations)"
    );
}
