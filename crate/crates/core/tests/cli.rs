use std::process::Command;

use plocal::catalog;
use plocal::cli::run;
use plocal::spec::SpecDocument;
use serde_json::Value;

fn plocal(args: &[&str]) -> plocal::cli::Outcome {
    run(std::iter::once("plocal").chain(args.iter().copied()))
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut a = args.to_vec();
    a.extend(["--output", "json"]);
    let out = plocal(&a);
    assert!(out.stderr.is_empty(), "{}", out.stderr);
    (out.code, serde_json::from_str(&out.stdout).unwrap())
}

#[test]
fn saturation_of_s4() {
    let out = plocal(&["check-saturation", "examples/s4-d8.json"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.lines().any(|l| l == "saturated: true"), "{}", out.stdout);
}

#[test]
fn approximation_stages() {
    let out = plocal(&["approximate", "examples/dihedral-so3.json", "--zeta", "5", "--steps", "3"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let lines: Vec<&str> = out.stdout.lines().filter(|l| l.starts_with("stage ")).collect();
    assert_eq!(lines.len(), 3);
    for (l, name) in lines.iter().zip(["D_8", "D_16", "D_32"]) {
        assert!(l.contains(&format!(": {name},")), "{l}");
        assert!(l.contains("PGL2-type"), "{l}");
    }
}

#[test]
fn stable_elements_match_the_group() {
    let (code, v) = json(&["stable", "examples/s4-d8.json", "--degree", "2", "--coeff", "Z/2"]);
    assert_eq!(code, 0);
    assert_eq!(v["dimension"], 2);
    assert_eq!(v["matches_group"], true);
    assert_eq!(v["group_cohomology"]["dimension"], 2);
    // --spec form
    assert_eq!(plocal(&["stable", "--spec", "s4-d8", "--degree", "1"]).code, 0);
}

#[test]
fn exit_codes() {
    assert_eq!(plocal(&["check-saturation"]).code, 2);
    assert_eq!(plocal(&["check-saturation", "no-such-spec"]).code, 2);
    assert_eq!(plocal(&["frobnicate"]).code, 2);
    assert_eq!(plocal(&["bullet", "s4-d8"]).code, 2);
    // not normal
    assert_eq!(plocal(&["quotient", "s4-d8", "--subgroup", "Z"]).code, 1);
    // the negative stage family
    assert_eq!(plocal(&["verify-approximation", "dihedral-so3", "--family", "negative"]).code, 1);
    assert_eq!(plocal(&["verify-approximation", "dihedral-so3", "--family", "psl2"]).code, 0);
    // |S| = 3^5 exceeds the bar-complex cap
    assert_eq!(plocal(&["stable", "trivial-torus", "--degree", "1", "--coeff", "Z/3"]).code, 3);
    assert_eq!(plocal(&["--help"]).code, 0);
}

#[test]
fn errors_are_reported_as_json() {
    let out = plocal(&["stable", "no-such-spec", "--degree", "1", "--output", "json"]);
    assert_eq!(out.code, 2);
    let v: Value = serde_json::from_str(&out.stderr).unwrap();
    assert_eq!(v["exit_code"], 2);
}

#[test]
fn reports_are_deterministic() {
    let cases: &[&[&str]] = &[
        &["check-saturation", "a4-v4"],
        &["check-transporter", "s4-d8", "--linking"],
        &["bullet", "dihedral-so3", "--truncation", "5"],
        &["components", "dihedral-so3", "--truncation", "5"],
        &["e2page", "s4-d8", "--n", "1", "--m", "1"],
        &["stable", "d16-inner", "--degree", "1", "--truncation", "4"],
    ];
    for args in cases {
        for fmt in ["json", "text"] {
            let mut a = args.to_vec();
            a.extend(["--output", fmt]);
            let first = plocal(&a);
            assert!(first.stderr.is_empty(), "{args:?}: {}", first.stderr);
            assert_eq!(first, plocal(&a), "{args:?}");
        }
    }
}

#[test]
fn examples_round_trip() {
    let (code, v) = json(&["examples", "--list"]);
    assert_eq!(code, 0);
    assert!(v.as_array().unwrap().len() >= 5);
    for e in catalog::ENTRIES {
        let doc = catalog::load(e.name).unwrap();
        assert_eq!(SpecDocument::parse(&doc.to_json()).unwrap(), doc, "{}", e.name);
        let (code, shown) = json(&["examples", "--show", e.name]);
        assert_eq!(code, 0);
        let back: SpecDocument = serde_json::from_value(shown).unwrap();
        assert_eq!(back, doc);
    }
    let so3 = catalog::load("dihedral-so3").unwrap();
    assert_eq!(so3.rank, 1);
    assert_eq!(so3.pi.unwrap().table.len(), 2);
    assert_eq!(catalog::load("trivial-torus").unwrap().pi.unwrap().table.len(), 1);
}

#[test]
fn spec_files_on_disk() {
    let dir = std::env::temp_dir().join(format!("plocal-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("c2xs3.json");
    // Σ3 × C2 on five points
    std::fs::write(&path, r#"{"p": 2, "group": {"permutations": [[1,0,2,3,4],[0,2,1,3,4],[0,1,2,4,3]]}}"#).unwrap();
    let (code, v) = json(&["check-saturation", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["sylow_order"], 4);
    let (code, v) = json(&["normalizer", path.to_str().unwrap(), "--subgroup", "[[0,1,2,4,3]]"]);
    assert_eq!(code, 0);
    assert_eq!(v["fully_normalized"], true);
    std::fs::write(&path, "{\"p\": 2").unwrap();
    assert_eq!(plocal(&["check-saturation", path.to_str().unwrap()]).code, 2);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn binary_exit_status() {
    let bin = env!("CARGO_BIN_EXE_plocal");
    let ok = Command::new(bin).args(["check-saturation", "examples/s4-d8.json"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("saturated: true"));
    let bad = Command::new(bin).args(["check-saturation", "--output", "yaml", "s4-d8"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
