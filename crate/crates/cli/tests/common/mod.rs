#![allow(dead_code)]

use std::path::{Path, PathBuf};

use psl2trop_cli::run;

pub const DIAG: &str = r#"{"entries":[["t","0"],["0","t^(-1)"]]}"#;
pub const MIXED: &str = r#"{"entries":[["t + 2","t^(1/2)"],["1","t^-1"]]}"#;
pub const ROT: &str = r#"{"entries":[["0","1"],["-1","0"]]}"#;

/// The cli crate's directory; this module is also compiled into other test crates.
fn cli_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../cli").canonicalize().unwrap()
}

pub fn data(name: &str) -> String {
    cli_dir().join("data").join(name).display().to_string()
}

pub fn golden_dir() -> PathBuf {
    cli_dir().join("tests").join("golden")
}

pub struct Run {
    pub code: i32,
    pub out: String,
    pub err: String,
}

pub fn invoke(args: &[String]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("psl2trop".to_string()).chain(args.iter().cloned());
    let code = run(argv, &mut out, &mut err);
    Run { code, out: String::from_utf8(out).unwrap(), err: String::from_utf8(err).unwrap() }
}

pub fn args(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

/// Bundled example commands with their golden file and expected exit code.
pub fn examples() -> Vec<(&'static str, Vec<String>, i32)> {
    let quartic = data("quartic.json");
    let quintic = data("quintic.json");
    let quadric = data("quadric.json");
    let cubic = data("cubic.json");
    vec![
        ("val_point_diag", args(&["val", "point", "-m", DIAG]), 0),
        ("val_point_mixed", args(&["val", "point", "-m", MIXED]), 0),
        ("val_line", args(&["val", "line", "--p1", DIAG, "--p2", ROT]), 0),
        ("verify_scaling_diag", args(&["verify", "scaling", "-m", DIAG, "--t-grid", "e^10,e^20,e^30"]), 0),
        ("verify_scaling_mixed", args(&["verify", "scaling", "-m", MIXED]), 0),
        ("strata_quartic", args(&["surface", "strata", "--family", &quartic]), 0),
        ("strata_cubic", args(&["surface", "strata", "--family", &cubic]), 0),
        ("check_quadric", args(&["surface", "check", "--family", &quadric, "-m", DIAG]), 0),
        ("sample_quadric", args(&["surface", "sample", "--family", &quadric, "--count", "12", "--seed", "7"]), 0),
        ("sample_quintic", args(&["surface", "sample", "--family", &quintic, "--count", "20", "--seed", "11"]), 0),
        ("cloud_quartic", args(&["export", "cloud", "--family", &quartic, "--count", "24", "--seed", "3"]), 0),
        ("certify_quartic", args(&["lines", "certify", "--family", &quartic, "--degree", "4"]), 0),
        ("certify_quintic", args(&["lines", "certify", "--family", &quintic]), 0),
    ]
}

