mod common;

use std::fs;
use std::process::Command;

use common::{args, data, examples, golden_dir, invoke, DIAG, ROT};
use psl2trop::lines::LineK;
use psl2trop::surfaces::SurfaceFamily;
use psl2trop::valuation::val_point;
use serde_json::Value;

#[test]
fn golden_outputs() {
    let update = std::env::var_os("PSL2TROP_UPDATE_GOLDEN").is_some();
    let mut mismatched = Vec::new();
    for (name, argv, code) in examples() {
        let r = invoke(&argv);
        assert_eq!(r.code, code, "{name}: stderr {}", r.err);
        let path = golden_dir().join(format!("{name}.out"));
        if update {
            fs::write(&path, &r.out).unwrap();
            continue;
        }
        let want = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        if want != r.out {
            mismatched.push(name);
        }
    }
    assert!(mismatched.is_empty(), "golden mismatch: {mismatched:?}");
}

#[test]
fn repeated_runs_and_worker_counts_agree() {
    for (name, argv, _) in examples() {
        let first = invoke(&argv).out;
        assert_eq!(first, invoke(&argv).out, "{name} differs between runs");
        let mut parallel = argv.clone();
        parallel.extend(args(&["--workers", "4"]));
        assert_eq!(first, invoke(&parallel).out, "{name} differs with 4 workers");
    }
}

#[test]
fn env_seed_fallback() {
    let quadric = data("quadric.json");
    let flagged = invoke(&args(&["surface", "sample", "--family", &quadric, "--count", "4", "--seed", "5"]));
    let bin = env!("CARGO_BIN_EXE_psl2trop");
    let out = Command::new(bin)
        .args(["surface", "sample", "--family", &quadric, "--count", "4"])
        .env("PSL2TROP_SEED", "5")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), flagged.out);
    let other = invoke(&args(&["surface", "sample", "--family", &quadric, "--count", "4", "--seed", "6"]));
    assert_ne!(other.out, flagged.out);
}

#[test]
fn outputs_match_library_calls() {
    let r = invoke(&args(&["val", "point", "-m", DIAG]));
    let v: Value = serde_json::from_str(&r.out).unwrap();
    let m = serde_json::from_str(DIAG).map(|j: Value| psl2trop::mat2::PuiseuxMat2::from_json(&j).unwrap()).unwrap();
    let p = val_point(&m).unwrap();
    assert_eq!(r.out, format!("{}\n", p.to_json()));
    assert_eq!(v["height"], 1.0);
    assert_eq!(v["layer"], "mid");

    let rot = psl2trop::mat2::PuiseuxMat2::from_json(&serde_json::from_str(ROT).unwrap()).unwrap();
    let line = LineK::new(m, rot).unwrap();
    let mut img = psl2trop::lines::val_image(&line, 8).unwrap().to_json();
    img["profile"] = psl2trop::lines::quadric_intersections(&line, 8).unwrap().kind.as_str().into();
    // Compared as text: parsing back would round the last digit.
    assert_eq!(invoke(&args(&["val", "line", "--p1", DIAG, "--p2", ROT])).out, format!("{img}\n"));

    let quartic = data("quartic.json");
    let s = SurfaceFamily::from_json(&serde_json::from_str(&fs::read_to_string(&quartic).unwrap()).unwrap()).unwrap();
    let cert = psl2trop::certifier::certify_no_lines(&s).unwrap();
    let out = invoke(&args(&["lines", "certify", "--family", &quartic])).out;
    assert!(out.contains(&format!("\"ledger\":{}", cert.to_json()["ledger"])));
    assert!(out.contains("\"certified\":true"));
}

#[test]
fn scaling_distances_decrease_on_diagonal() {
    let r = invoke(&args(&["verify", "scaling", "-m", DIAG, "--t-grid", "e^10,e^20,e^30"]));
    let v: Value = serde_json::from_str(&r.out).unwrap();
    let grid = v["grid"].as_array().unwrap();
    assert_eq!(grid.len(), 3);
    assert_eq!(v["nonincreasing"], true);
    for row in grid {
        assert!(row["distance"].as_f64().unwrap() < 1e-9);
    }
}

#[test]
fn certify_writes_out_file() {
    let dir = std::env::temp_dir().join(format!("psl2trop-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join("cert.json");
    let quartic = data("quartic.json");
    let bin = env!("CARGO_BIN_EXE_psl2trop");
    let out = Command::new(bin)
        .args(["lines", "certify", "--family", &quartic, "--out"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let cert: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(cert["certified"], true);
    assert_eq!(cert["degree"], 4);
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn error_exit_codes() {
    let r = invoke(&args(&["val", "point", "-m", "{not json"]));
    assert_eq!(r.code, 2);
    let e: Value = serde_json::from_str(r.err.trim()).unwrap();
    assert_eq!(e["exit_code"], 2);
    assert!(e["error"].is_string() && e["message"].is_string());

    assert_eq!(invoke(&args(&["val", "point", "-m", DIAG, "--depth", "1"])).code, 2);
    assert_eq!(invoke(&args(&["verify", "scaling", "-m", DIAG, "--t-grid", "2"])).code, 2);
    assert_eq!(invoke(&args(&["nonsense"])).code, 2);
    assert_eq!(invoke(&args(&["lines", "certify", "--family", &data("cubic.json")])).code, 2);
    assert_eq!(invoke(&args(&["lines", "certify", "--family", &data("quartic.json"), "--degree", "5"])).code, 2);
    // A hidden slope: the constant term is unknown at every order.
    let hidden = r#"{"entries":[["O(t^2)","1"],["1","1"]]}"#;
    let r = invoke(&args(&["val", "point", "-m", hidden]));
    assert!(r.code == 2 || r.code == 3, "{}", r.err);
    assert_eq!(invoke(&args(&["--help"])).code, 0);
}
