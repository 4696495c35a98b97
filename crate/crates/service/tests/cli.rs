//! Command-line behavior, in-process and through the built binary.

use std::path::PathBuf;
use std::process::Command;

use kbdebug_service::cli::run;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn cli(args: &[&str], stdin: &str) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("kbdebug").chain(args.iter().copied());
    let code = run(argv, &mut stdin.as_bytes(), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn lead(out: &str) -> Vec<String> {
    out.lines().map(|l| l.split("  ").next().unwrap().trim().to_string()).collect()
}

#[test]
fn debug_all_prints_every_minimal_diagnosis() {
    let t2 = fixture("table2.dpi");
    let (code, out, _) = cli(&["debug", &t2, "--uniform", "--all"], "");
    assert_eq!(code, 0);
    assert_eq!(lead(&out), ["[1]", "[2]", "[5 7]"]);
}

#[test]
fn debug_with_element_probabilities_is_best_first() {
    let (t2, pr) = (fixture("table2.dpi"), fixture("table2.probs"));
    let (code, out, _) = cli(&["debug", &t2, "--probs", &pr, "--c", "0.49", "--nmin", "2"], "");
    assert_eq!(code, 0);
    assert_eq!(lead(&out), ["[2]", "[5 7]"]);
    let (_, out, _) = cli(&["debug", &t2, "--auto"], "");
    assert_eq!(lead(&out), ["[1]"]);
}

#[test]
fn simulate_prints_a_reproducible_trace() {
    let t2 = fixture("table2.dpi");
    let args = ["simulate", &t2, "--mode", "dynamic", "--sigma", "0", "--true-diag", "5,7"];
    let (code, out, _) = cli(&args, "");
    assert_eq!(code, 0);
    assert!(out.contains("query 3: {E -> Z}"), "{out}");
    assert!(out.contains("diagnosis [5 7] with probability 1.000000"));
    assert!(out.lines().any(|l| l.trim() == "E -> Z"));
    assert_eq!(cli(&args, "").1, out);
    let (_, out, _) = cli(&["simulate", &t2, "--mode", "static", "--true-diag", "5,7"], "");
    assert!(out.contains("2 queries"), "{out}");
}

#[test]
fn interactive_loop_reads_answers() {
    let t2 = fixture("table2.dpi");
    let (code, out, _) = cli(&["interactive", &t2, "--mode", "static"], "n\nmaybe\nn\n");
    assert_eq!(code, 0);
    assert!(out.contains("Is {E -> ~A} true"));
    assert!(out.contains("diagnosis [5 7]"));
    let (code, out, _) = cli(&["interactive", &t2], "q\n");
    assert_eq!(code, 0);
    assert!(out.contains("stopped"));
}

#[test]
fn exit_codes() {
    let t2 = fixture("table2.dpi");
    let dir = std::env::temp_dir().join(format!("kbdebug-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.dpi");
    std::fs::write(&bad, "[O]\nA ->\n").unwrap();
    let inadmissible = dir.join("inadmissible.dpi");
    std::fs::write(&inadmissible, "[O]\nB\n[B]\nA\n[N]\nA\n").unwrap();

    let (code, _, err) = cli(&["debug", bad.to_str().unwrap()], "");
    assert_eq!(code, 1);
    assert!(err.contains("line 2"), "{err}");
    assert_eq!(cli(&["debug", inadmissible.to_str().unwrap()], "").0, 1);
    assert_eq!(cli(&["debug", "/no/such/file.dpi"], "").0, 1);
    assert_eq!(cli(&["debug", &t2, "--bogus"], "").0, 2);
    assert_eq!(cli(&["simulate", &t2, "--mode", "sideways", "--true-diag", "5,7"], "").0, 2);
    assert_eq!(cli(&["simulate", &t2, "--sigma", "2", "--true-diag", "5,7"], "").0, 2);
    assert_eq!(cli(&["simulate", &t2, "--true-diag", "3"], "").0, 2);
    let (code, out, _) = cli(&["debug", "--help"], "");
    assert_eq!(code, 0);
    assert!(out.contains("Usage"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn binary_reports_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_kbdebug");
    let t2 = fixture("table2.dpi");
    let ok = Command::new(bin).args(["debug", &t2, "--uniform", "--all"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("[5 7]"));
    let bad = Command::new(bin).args(["debug", &t2, "--measure"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
