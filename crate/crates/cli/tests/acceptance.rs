//! Runs every acceptance criterion and prints one line per criterion.
//!
//! Criteria 1 to 12 run the full verification suite in-process; criterion 13
//! re-runs each CLI command and compares outputs byte for byte, including
//! single-threaded against multi-threaded runs.

use std::path::Path;
use std::process::{Command, ExitCode, Output};
use std::time::Instant;

use fracdim::verify::{run_check, Plan, Suite, CHECKS};

const SEED: u64 = 2024;

/// Wall-clock limits in seconds, where a criterion states one.
fn time_limit(id: u32) -> Option<f64> {
    match id {
        2 => Some(30.0),
        9 => Some(180.0),
        _ => None,
    }
}

fn fracdim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracdim"))
        .args(args)
        .env_remove("FRACDIM_SEED")
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

/// Runs `args` (with `{out}` replaced by a file path) and returns the exit
/// status, stdout and the written file, if any.
fn capture(dir: &Path, tag: &str, args: &[&str]) -> (bool, Vec<u8>, Vec<u8>) {
    let out_path = dir.join(format!("{tag}.out"));
    let _ = std::fs::remove_file(&out_path);
    let path = out_path.to_str().unwrap();
    let args: Vec<&str> = args.iter().map(|a| if *a == "{out}" { path } else { a }).collect();
    let out = fracdim(&args);
    let file = std::fs::read(&out_path).unwrap_or_default();
    (out.status.success(), out.stdout, file)
}

fn determinism() -> (bool, String) {
    let dir = tempfile::tempdir().unwrap();
    let commands: Vec<(&str, Vec<&str>)> = vec![
        ("solve-alpha", vec!["solve-alpha", "--model", "example2"]),
        (
            "boxdim",
            vec!["boxdim", "--model", "cantor", "--ratio", "0.3333333333", "--arity", "2", "--depth", "12", "--csv", "{out}"],
        ),
        ("boxdim-orbit", vec!["boxdim", "--model", "orbit_set", "--p", "1", "--rmin", "1e-6", "--rmax", "1e-2"]),
        (
            "orbit-dim",
            vec!["orbit-dim", "--model", "example1", "--p", "1", "--depth", "1", "--log10-eps", "-1800", "--rmin", "1e-6", "--rmax", "1e-2"],
        ),
        ("generate", vec!["generate", "--model", "homogeneous", "--lo", "0.2", "--hi", "0.3", "--depth", "6", "--seed", "3", "-o", "{out}"]),
        (
            "experiment",
            vec![
                "experiment", "--model", "homogeneous", "--lo", "0.2", "--hi", "0.3", "--depth", "9", "--replicas", "8",
                "--rmin", "1e-4", "--rmax", "1e-1", "--seed", "11",
            ],
        ),
        ("verify", vec!["verify", "--suite", "quick", "--seed", "7", "--json", "--check", "5", "--check", "10", "--check", "12"]),
    ];
    let mut bad = Vec::new();
    for (tag, args) in &commands {
        let first = capture(dir.path(), tag, args);
        let again = capture(dir.path(), tag, args);
        let threads = |n: &str| {
            let mut a = vec!["--threads", n];
            a.extend(args.iter().copied());
            capture(dir.path(), tag, &a)
        };
        let (one, four) = (threads("1"), threads("4"));
        if !first.0 {
            bad.push(format!("{tag} failed"));
        } else if first != again {
            bad.push(format!("{tag} differs between runs"));
        } else if first != one || first != four {
            bad.push(format!("{tag} depends on the thread count"));
        }
    }
    let summary = if bad.is_empty() {
        format!("{} commands identical across reruns and --threads 1/4", commands.len())
    } else {
        bad.join("; ")
    };
    (bad.is_empty(), summary)
}

fn main() -> ExitCode {
    // Under `cargo test -- --list` and similar, run nothing.
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let plan = Plan::new(Suite::Full, SEED);
    let start = Instant::now();
    let mut failed = Vec::new();
    for &(id, _) in &CHECKS {
        let r = run_check(id, &plan);
        let mut pass = r.pass;
        let mut note = String::new();
        if let Some(limit) = time_limit(id) {
            pass &= r.seconds < limit;
            note = format!(" [{:.1} s, limit {limit} s]", r.seconds);
        }
        println!(
            "criterion {:>2} {}: {}: {} (tolerance: {}){note}",
            id,
            if pass { "PASS" } else { "FAIL" },
            r.name,
            r.measured,
            r.tolerance
        );
        if !pass {
            failed.push(id);
        }
    }
    let suite_seconds = start.elapsed().as_secs_f64();
    let (pass, summary) = determinism();
    println!("criterion 13 {}: determinism: {summary}", if pass { "PASS" } else { "FAIL" });
    if !pass {
        failed.push(13);
    }
    println!("full suite took {suite_seconds:.1} s (limit 900 s)");
    if suite_seconds >= 900.0 {
        failed.push(0);
    }
    if failed.is_empty() {
        println!("all 13 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("failed: {failed:?}");
        ExitCode::FAILURE
    }
}
