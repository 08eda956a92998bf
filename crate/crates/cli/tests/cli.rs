use std::path::Path;
use std::process::{Command, Output};

use qhyp_core::classify::{in_d2, normal_form, RealTrace};
use qhyp_core::sample::{random_element, random_of_type, rng, TypeRequest};
use qhyp_core::{Group, QMatrix, Tolerances};
use serde_json::{json, Value};
use tempfile::TempDir;

fn qhyp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qhyp")).args(args).output().expect("spawn qhyp")
}

fn json_of(args: &[&str]) -> Value {
    let o = qhyp(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).expect("json");
    assert_eq!(v["schema"], "qhyp/1");
    v
}

fn write(dir: &TempDir, name: &str, v: &Value) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
    p.to_str().unwrap().to_string()
}

fn conj(s: &QMatrix, m: &QMatrix, g: Group) -> QMatrix {
    &(s * m) * &s.form_inverse(&g.form().unwrap())
}

#[test]
fn gen_is_deterministic_and_reclassifies() {
    let dir = TempDir::new().unwrap();
    let (p1, p2) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for p in [&p1, &p2] {
        let o = qhyp(&["gen", "strictly-hyperbolic", "5", "--seed", "11", "--out", p.to_str().unwrap()]);
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    let v = json_of(&["classify", p1.to_str().unwrap()]);
    let results = v["results"].as_array().unwrap();
    assert_eq!(results.len(), 5);
    for r in results {
        assert_eq!(r["member"], true);
        assert_eq!(r["type"]["tag"], "strictly-hyperbolic");
    }
}

#[test]
fn unsatisfiable_gen_fails() {
    let o = qhyp(&["--group", "sp11", "gen", "two-real-eig", "1"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("not available"));
}

#[test]
fn tolerance_flags_take_effect() {
    let dir = TempDir::new().unwrap();
    let gen = json_of(&["gen", "loxodromic", "1", "--seed", "2"]);
    let p = write(&dir, "g.json", &gen);
    assert_eq!(json_of(&["classify", &p])["results"][0]["member"], true);
    assert_eq!(json_of(&["classify", &p, "--tol.eps-grp", "1e-30"])["results"][0]["member"], false);
}

#[test]
fn conj_decides_both_ways() {
    let dir = TempDir::new().unwrap();
    let g = Group::Sp21;
    let mut r = rng(8);
    let a = random_of_type(&mut r, g, TypeRequest::Loxodromic);
    let b = random_of_type(&mut r, g, TypeRequest::Loxodromic);
    let s = random_element(&mut r, g);
    let c = random_of_type(&mut r, g, TypeRequest::Loxodromic);
    let input = json!({ "pairs": [
        { "first": { "A": a, "B": b }, "second": { "A": conj(&s, &a, g), "B": conj(&s, &b, g) } },
        { "first": { "A": a, "B": b }, "second": { "A": a, "B": c } },
    ]});
    let v = json_of(&["conj", &write(&dir, "p.json", &input)]);
    assert_eq!(v["results"][0]["verdict"], "conjugate");
    assert!(v["results"][0]["residual"].as_f64().unwrap() <= 1e-6);
    assert_eq!(v["results"][1]["verdict"], "not_conjugate");
}

#[test]
fn invariants_report_each_pair() {
    let dir = TempDir::new().unwrap();
    let mut r = rng(3);
    let a = random_of_type(&mut r, Group::Sp21, TypeRequest::Loxodromic);
    let b = random_of_type(&mut r, Group::Sp21, TypeRequest::Loxodromic);
    let v = json_of(&["invariants", &write(&dir, "i.json", &json!({ "A": a, "B": b }))]);
    let inv = &v["results"][0];
    assert_eq!(inv["traces"].as_array().unwrap().len(), 2);
    assert_eq!(inv["angular"].as_array().unwrap().len(), 3);
}

#[test]
fn quadmap_recovers_a_group_element() {
    let dir = TempDir::new().unwrap();
    let (g, tol) = (Group::Sp11, Tolerances::default());
    let mut r = rng(5);
    let mut z = Vec::new();
    for _ in 0..2 {
        let nf = normal_form(&random_of_type(&mut r, g, TypeRequest::Loxodromic), &tol).unwrap();
        z.push(nf.fixed_points.attracting);
        z.push(nf.fixed_points.repelling);
    }
    let h = random_element(&mut r, g);
    let w: Vec<_> = z.iter().map(|p| h.mul_vec(p)).collect();
    let v = json_of(&["quadmap", &write(&dir, "q.json", &json!({ "z": z, "w": w }))]);
    assert!(v["h"].is_array(), "{v}");
    assert!(v["residual"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn surface_spec_round_trips() {
    let dir = TempDir::new().unwrap();
    let v = json_of(&["surface", "--genus", "2", "--seed", "4"]);
    assert_eq!(v["ledger"].as_array().unwrap().len(), 42);
    assert!(v["relator_residual"].as_f64().unwrap() <= 1e-6);
    assert_eq!(v["generators"]["a"].as_array().unwrap().len(), 2);
    let again = json_of(&["surface", &write(&dir, "s.json", &v["spec"])]);
    assert_eq!(again["ledger"], v["ledger"]);
}

#[test]
fn sample_d2_keeps_only_members() {
    let v = json_of(&["sample-d2", "50", "--seed", "9"]);
    let tol = Tolerances::default();
    let triples = v["triples"].as_array().unwrap();
    assert_eq!(triples.len(), 50);
    for t in triples {
        let coeffs: Vec<f64> = serde_json::from_value(t.clone()).unwrap();
        assert!(in_d2(&RealTrace { group: Group::Sp21, coeffs, det: None }, &tol));
    }
    let rate = v["acceptance_rate"].as_f64().unwrap();
    assert!(rate > 0.0 && rate <= 1.0);
}

#[test]
fn selftest_passes_and_catches_fault() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("report.json");
    let o = qhyp(&["selftest", "--large", "100", "--small", "20", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_slice(&std::fs::read(Path::new(&out)).unwrap()).unwrap();
    assert_eq!(report["criteria"].as_array().unwrap().len(), 12);

    let o = qhyp(&["selftest", "--large", "100", "--small", "20", "--inject-angular-fault"]);
    assert_eq!(o.status.code(), Some(1));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    let failed: Vec<u64> = report["criteria"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["id"].as_u64().unwrap())
        .collect();
    assert_eq!(failed, vec![7]);
}
