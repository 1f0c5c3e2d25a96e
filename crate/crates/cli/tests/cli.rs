use std::fs;
use std::process::{Command, Output};

use butson_cli::report::{ResultPayload, RunReport};

fn butson(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_butson")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> (RunReport, String, i32) {
    let mut all = args.to_vec();
    all.extend(["--json", "--no-timing"]);
    let out = butson(&all);
    let text = String::from_utf8(out.stdout).unwrap();
    let report: RunReport = serde_json::from_str(&text).unwrap_or_else(|e| panic!("{e}: {text}"));
    (report, text, out.status.code().unwrap())
}

#[test]
fn verify_builtins() {
    for name in ["ex1", "ex2", "ex3"] {
        let (report, _, code) = json(&["verify", "--builtin", name]);
        assert_eq!(code, 0);
        let ResultPayload::Verify(v) = report.result else { panic!("wrong payload") };
        assert!(v.bh.is_bh);
        if name == "ex2" {
            assert!(v.circulant && v.symmetric && v.unreal);
        }
    }
}

#[test]
fn verify_exit_codes_for_files() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("short.txt");
    fs::write(&bad, "bh 2 4\n0 0\n1\n").unwrap();
    let out = butson(&["verify", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let diag = String::from_utf8(out.stderr).unwrap();
    assert!(diag.contains("short.txt:3:"), "{diag}");

    let ones = dir.path().join("ones.txt");
    fs::write(&ones, "bh 2 2\n0 0\n0 0\n").unwrap();
    let (report, _, code) = json(&["verify", ones.to_str().unwrap()]);
    assert_eq!(code, 1);
    let ResultPayload::Verify(v) = report.result else { panic!("wrong payload") };
    let failure = v.bh.failure.expect("gram failure");
    assert_eq!((failure.row, failure.col), (0, 1));
    assert!(failure.value.equals_integer(&2.into()));

    let circ = dir.path().join("ex2.txt");
    fs::write(&circ, "circ 5 5\n1 3 4 4 3\n").unwrap();
    let (from_file, _, code) = json(&["verify", circ.to_str().unwrap()]);
    let (from_builtin, _, _) = json(&["verify", "--builtin", "ex2"]);
    assert_eq!(code, 0);
    assert_eq!(from_file.input.hash, from_builtin.input.hash);

    assert_eq!(butson(&["verify", dir.path().join("missing").to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn spectrum_builtins() {
    let expect = [("ex1", 24, vec![(1, 24), (17, 24)]), ("ex2", 10, vec![(1, 10), (1, 10), (3, 10), (3, 10), (7, 10)])];
    for (name, k, turns) in expect {
        let (report, _, code) = json(&["spectrum", "--builtin", name]);
        assert_eq!(code, 0);
        let ResultPayload::Spectrum(s) = report.result else { panic!("wrong payload") };
        assert_eq!(s.common_k, Some(k));
        let mut got: Vec<(u64, u64)> = s.findings.iter().map(|f| f.angle.map(|a| (a.num, a.den)).unwrap()).collect();
        got.sort();
        assert_eq!(got, turns);
    }
    let (report, _, _) = json(&["spectrum", "--builtin", "ex3"]);
    let ResultPayload::Spectrum(s) = report.result else { panic!("wrong payload") };
    assert_eq!(s.common_k, Some(3));
}

#[test]
fn angles_are_fraction_objects() {
    let (_, text, _) = json(&["spectrum", "--builtin", "ex1"]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let angle = &v["result"]["findings"][0]["angle"];
    assert!(angle["num"].is_u64() && angle["den"].is_u64(), "{angle}");
    assert_eq!(v["command"], "spectrum");
    assert_eq!(v["elapsed_ms"], 0);
}

#[test]
fn non_bh_input_stops_before_eigensolving() {
    let dir = tempfile::tempdir().unwrap();
    let ones = dir.path().join("ones.txt");
    fs::write(&ones, "bh 2 2\n0 0\n0 0\n").unwrap();
    for cmd in ["spectrum", "conjecture"] {
        let (report, _, code) = json(&[cmd, ones.to_str().unwrap()]);
        assert_eq!(code, 1);
        assert!(matches!(report.result, ResultPayload::Verify(_)));
    }
}

#[test]
fn conjecture_builtins() {
    let (report, _, code) = json(&["conjecture", "--builtin", "ex2"]);
    assert_eq!(code, 3);
    let ResultPayload::Conjecture(c) = report.result else { panic!("wrong payload") };
    let v = c.verdict.unwrap();
    assert_eq!(v.counterexample_i, Some(3));
    let at3 = v.per_i.iter().find(|p| p.i == 3).unwrap();
    let shown: Vec<String> = at3.distinct_values.iter().map(ToString::to_string).collect();
    assert_eq!(shown, ["z10^1", "z10^3", "z10^9"]);
    assert!(at3.distinct_values.iter().all(|r| !r.in_mu(5)));

    assert_eq!(json(&["conjecture", "--builtin", "ex1"]).2, 0);
    let (report, _, code) = json(&["conjecture", "--builtin", "ex3"]);
    assert_eq!(code, 0);
    let ResultPayload::Conjecture(c) = report.result else { panic!("wrong payload") };
    let at2 = c.verdict.unwrap().per_i.into_iter().find(|p| p.i == 2).unwrap();
    assert!(at2.all_in_mu_l && !at2.all_in_mu_k);

    let text = String::from_utf8(butson(&["conjecture", "--builtin", "ex2"]).stdout).unwrap();
    assert!(text.contains("z10^1 z10^3 z10^9"), "{text}");
}

#[test]
fn conjecture_without_common_order_exits_four() {
    // A (5,5) circulant whose eigenvalues have mixed orders.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mixed.txt");
    let row = find_mixed_order_row();
    fs::write(&path, format!("circ 5 5\n{row}\n")).unwrap();
    let (report, _, code) = json(&["conjecture", path.to_str().unwrap()]);
    assert_eq!(code, 4);
    let ResultPayload::Conjecture(c) = report.result else { panic!("wrong payload") };
    assert!(c.verdict.is_none() && c.spectrum.failure.is_some());
    assert_eq!(json(&["spectrum", path.to_str().unwrap()]).2, 4);
}

fn find_mixed_order_row() -> String {
    use butson_core::conjecture::conjecture_test;
    use butson_core::matrices::circulant;
    use butson_core::search::autocorrelation_is_bh;
    for rank in 0..3125u32 {
        let row: Vec<u32> = (0..5).rev().map(|p| (rank / 5u32.pow(p)) % 5).collect();
        if autocorrelation_is_bh(5, &row) && conjecture_test(&circulant(5, &row).unwrap()).is_err() {
            return row.iter().map(u32::to_string).collect::<Vec<_>>().join(" ");
        }
    }
    panic!("no mixed-order circulant at (5,5)");
}

#[test]
fn search_commands() {
    let (report, _, code) = json(&["search", "5", "5"]);
    assert_eq!(code, 0);
    let ResultPayload::Search(s) = report.result else { panic!("wrong payload") };
    assert!(s.counterexamples.iter().any(|c| c.first_row == [1, 3, 4, 4, 3]));

    let (report, _, _) = json(&["search", "5", "5", "--range", "0..0"]);
    let ResultPayload::Search(s) = report.result else { panic!("wrong payload") };
    assert_eq!((s.scanned, s.bh_count, s.tested, s.counterexample_count), (0, 0, 0, 0));

    // All four 2×2 circulants over ±1 by hand: [[a,b],[b,a]] has Gram off-diagonal 2ab ≠ 0.
    let (report, _, _) = json(&["search", "2", "2"]);
    let ResultPayload::Search(s) = report.result else { panic!("wrong payload") };
    assert_eq!((s.scanned, s.bh_count), (4, 0));

    let (_, one, _) = json(&["search", "4", "4", "--workers", "1"]);
    let (_, many, _) = json(&["search", "4", "4", "--workers", "4", "--checkpoint-every", "7"]);
    assert_eq!(one, many);
}

#[test]
fn search_errors_exit_two() {
    assert_eq!(butson(&["search", "3", "3", "--range", "5..1"]).status.code(), Some(2));
    assert_eq!(butson(&["search", "3", "3", "--range", "nonsense"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("c.ckpt");
    let c = ckpt.to_str().unwrap();
    assert_eq!(butson(&["search", "3", "3", "--checkpoint", c]).status.code(), Some(0));
    // Same checkpoint, different configuration.
    assert_eq!(butson(&["search", "3", "3", "--dedup", "--checkpoint", c]).status.code(), Some(2));
    fs::write(&ckpt, "garbage\n").unwrap();
    assert_eq!(butson(&["search", "3", "3", "--checkpoint", c]).status.code(), Some(2));
}

#[test]
fn search_resumes_from_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("scan.ckpt");
    let c = ckpt.to_str().unwrap();
    let (_, first, _) = json(&["search", "4", "4", "--checkpoint", c, "--checkpoint-every", "16", "--workers", "2"]);
    let (_, again, _) = json(&["search", "4", "4", "--checkpoint", c, "--workers", "2"]);
    let (_, plain, _) = json(&["search", "4", "4"]);
    assert_eq!(first, plain);
    assert_eq!(again, plain);
}

#[test]
fn json_is_byte_stable_and_round_trips() {
    for cmd in ["verify", "spectrum", "conjecture"] {
        for name in ["ex1", "ex2", "ex3"] {
            let (report, text, code) = json(&[cmd, "--builtin", name]);
            let (_, again, _) = json(&[cmd, "--builtin", name]);
            assert_eq!(text, again);
            let reserialized = serde_json::to_string_pretty(&report).unwrap() + "\n";
            assert_eq!(reserialized, text);
            assert_eq!(i32::from(report.exit_code()), code);
        }
    }
}

#[test]
fn source_is_required_and_exclusive() {
    assert_eq!(butson(&["verify"]).status.code(), Some(2));
    assert_eq!(butson(&["verify", "x.txt", "--builtin", "ex1"]).status.code(), Some(2));
    assert_eq!(butson(&["verify", "--builtin", "ex9"]).status.code(), Some(2));
}

#[test]
fn human_output_mentions_timing_unless_disabled() {
    let timed = String::from_utf8(butson(&["verify", "--builtin", "ex1"]).stdout).unwrap();
    let untimed = String::from_utf8(butson(&["verify", "--builtin", "ex1", "--no-timing"]).stdout).unwrap();
    assert!(timed.contains("elapsed:"));
    assert!(!untimed.contains("elapsed:"));
    assert!(untimed.contains("Butson-Hadamard: yes"));
}
