use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cartan_nf::cli::FamilyInput;
use cartan_nf::families::{integrable_pair, two_variable_example};
use cartan_nf::io::series_to_json;
use cartan_nf::{Arith, LieMorphism};
use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cartan-nf"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn write(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
    p
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn two_variable_file(dir: &Path) -> PathBuf {
    let fam = FamilyInput {
        lambda: None,
        fields: vec![two_variable_example(13).to_json()],
    };
    write(dir, "two.json", &serde_json::to_value(fam).unwrap())
}

fn ito_family(dir: &Path, x2: Value) -> PathBuf {
    let s = LieMorphism::from_ints(&[&[1, 0, -1, 0], &[0, 1, 0, -1]], Arith::Exact).unwrap();
    let x1 = s.field_of(&[Arith::Exact.int(1), Arith::Exact.ratio(1, 11)], 6).to_json();
    let v = json!({
        "lambda": [["1", "0", "-1", "0"], ["0", "1", "0", "-1"]],
        "fields": [x1, x2],
    });
    write(dir, "family.json", &v)
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn two_variable_example_normalizes_and_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let input = two_variable_file(dir.path());
    let out = dir.path().join("out");
    let o = run(&["normalize", p(&input), "--order", "13", "--mode", "stepwise", "--out", p(&out), "--emit", "nf"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let nf = &stdout_json(&o)["nf"]["fields"][0]["components"];
    assert_eq!(nf[0]["terms"], json!([{"q": [2, 0], "re": "1/1"}]));
    assert_eq!(nf[1]["terms"], json!([{"q": [0, 1], "re": "1/1"}]));

    let nf_path = out.join("nf.json");
    let diffeo = out.join("diffeo.json");
    let v = run(&["verify", p(&input), "--nf", p(&nf_path), "--diffeo", p(&diffeo)]);
    assert_eq!(v.status.code(), Some(0));
    assert_eq!(stdout_json(&v)["pass"], json!(true));

    // tamper with one coefficient of degree 2
    let mut bad: Value = serde_json::from_str(&fs::read_to_string(&nf_path).unwrap()).unwrap();
    bad["fields"][0]["components"][0]["terms"][0]["re"] = json!("2");
    let bad_path = write(dir.path(), "bad_nf.json", &bad);
    let v = run(&["verify", p(&input), "--nf", p(&bad_path), "--diffeo", p(&diffeo)]);
    assert_eq!(v.status.code(), Some(1));
    assert_eq!(stdout_json(&v)["fields"][0]["conjugation_first_failure"], json!(2));
}

#[test]
fn identity_diffeo_on_non_normal_input_fails() {
    let dir = tempfile::tempdir().unwrap();
    let input = two_variable_file(dir.path());
    let id = cartan_nf::JetDiffeo::identity(2, 13, Arith::Exact).to_json();
    let id_path = write(dir.path(), "id.json", &serde_json::to_value(id).unwrap());
    let v = run(&["verify", p(&input), "--nf", p(&input), "--diffeo", p(&id_path)]);
    assert_eq!(v.status.code(), Some(1));
    let f = &stdout_json(&v)["fields"][0];
    assert_eq!(f["conjugation_first_failure"], Value::Null);
    assert_eq!(f["nonnormal_degree"], json!(1));
}

#[test]
fn linear_family_gives_identity() {
    let dir = tempfile::tempdir().unwrap();
    let s = LieMorphism::from_ints(&[&[1, 0, -1, 0], &[0, 1, 0, -1]], Arith::Exact).unwrap();
    let input = ito_family(dir.path(), serde_json::to_value(s.basis_field(1, 6).to_json()).unwrap());
    let o = run(&["normalize", p(&input), "--order", "6", "--emit", "diffeo,report"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    let comps = v["diffeo"]["components"].as_array().unwrap();
    for (i, c) in comps.iter().enumerate() {
        let mut q = vec![0; 4];
        q[i] = 1;
        assert_eq!(c["terms"], json!([{"q": q, "re": "1/1"}]));
    }
    assert_eq!(v["report"]["checks"]["conjugation"], json!(true));
}

#[test]
fn typed_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // corrupted JSON
    let broken = dir.path().join("broken.json");
    fs::write(&broken, "{\"fields\": [").unwrap();
    let o = run(&["normalize", p(&broken)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("EOF"));

    // the two-variable example is outside the module of the single action
    let input = two_variable_file(dir.path());
    assert_eq!(run(&["normalize", p(&input), "--order", "6"]).status.code(), Some(4));

    // dependent junior parts
    let s = LieMorphism::from_ints(&[&[1, 0, -1, 0], &[0, 1, 0, -1]], Arith::Exact).unwrap();
    let x1 = s.field_of(&[Arith::Exact.int(1), Arith::Exact.ratio(1, 11)], 6);
    let dep = ito_family(dir.path(), serde_json::to_value(x1.scale(&Arith::Exact.int(2)).to_json()).unwrap());
    assert_eq!(run(&["check", p(&dep), "--order", "6"]).status.code(), Some(3));

    // x1² ∂x1 does not commute with the linear field
    let mut bump = serde_json::to_value(s.basis_field(1, 6).to_json()).unwrap();
    bump["components"][0]["terms"].as_array_mut().unwrap().push(json!({"q": [2, 0, 0, 0], "re": "1"}));
    let nc = ito_family(dir.path(), bump);
    assert_eq!(run(&["normalize", p(&nc), "--order", "6"]).status.code(), Some(5));

    // rank-deficient action
    let rd = write(dir.path(), "rd.json", &json!({"lambda": [["1", "-1"], ["2", "-2"]]}));
    let o = run(&["diagnose", p(&rd)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not injective"));

    // unknown flag value
    assert_eq!(run(&["normalize", p(&input), "--mode", "fast"]).status.code(), Some(2));
}

#[test]
fn diagnose_reports() {
    let dir = tempfile::tempdir().unwrap();
    let ito = write(dir.path(), "ito.json", &json!({"lambda": [["1", "0", "-1", "0"], ["0", "1", "0", "-1"]]}));
    let o = run(&["diagnose", p(&ito), "--kmax", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["diophantine"]["bruno_partial"], json!(0.0));
    assert_eq!(v["seed"], json!(0));
    let o = run(&["diagnose", p(&ito), "--kmax", "1"]);
    assert_eq!(stdout_json(&o)["diophantine"]["omega"].as_array().unwrap().len(), 2);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let s = LieMorphism::from_ints(&[&[1, 0, -1, 0], &[0, 1, 0, -1]], Arith::Exact).unwrap();
    let cfg = cartan_nf::families::FamilyConfig {
        cap: 8,
        orders: vec![1, 3],
        jet_lo: 2,
        jet_hi: 3,
        jet_terms: 3,
    };
    let fam = cartan_nf::families::conjugated_family(&s, &cfg, 9).unwrap();
    let v = json!({
        "lambda": [["1", "0", "-1", "0"], ["0", "1", "0", "-1"]],
        "fields": fam.x.iter().map(|f| f.to_json()).collect::<Vec<_>>(),
    });
    let input = write(dir.path(), "fam.json", &v);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = run(&["normalize", p(&input), "--order", "8", "--seed", "3", "--out", p(out)]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for name in ["nf.json", "diffeo.json", "report.json"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    let report: Value = serde_json::from_str(&fs::read_to_string(a.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], json!(3));
}

#[test]
fn ito_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let a = Arith::Exact;
    let hs = integrable_pair(&[a.one(), a.imag_unit()], 9, a, 2).unwrap();
    let v = json!({
        "pairs": 2,
        "hamiltonians": hs.iter().map(|h| series_to_json(h.series())).collect::<Vec<_>>(),
    });
    let input = write(dir.path(), "ito.json", &v);
    let o = run(&["ito", p(&input), "--order", "8"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = &stdout_json(&o)["report"];
    assert_eq!(r["star"]["holds"], json!(true));
    assert_eq!(r["action_normal_form"], json!(true));
    assert_eq!(r["symplectic"], json!(false));
}
