use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sanction-sim"))
}

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/pizza.kv")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sanction-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn bounds_prints_report() {
    let f = fixture();
    let o = run(&["bounds", "--params", f.to_str().unwrap(), "--mu-star", "0.2", "--format", "kv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("delta_threshold=0.840336134"), "{text}");
    assert!(text.contains("k_p=3"));
    assert!(text.contains("n_interleave_max=43"));
}

#[test]
fn missing_params_file_is_a_validation_error() {
    let o = run(&["bounds", "--params", "/definitely/not/here.kv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/definitely/not/here.kv"));
}

#[test]
fn unknown_subcommand_prints_usage() {
    let o = run(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn unknown_profile_lists_known_names() {
    let f = fixture();
    let o = run(&["simulate", "--params", f.to_str().unwrap(), "--profile", "nope"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("grim-cooperative"));
}

#[test]
fn simulate_is_deterministic() {
    let f = fixture();
    let dir = scratch("sim");
    let outs: Vec<(String, Vec<u8>)> = (0..2)
        .map(|i| {
            let path = dir.join(format!("trace{i}.csv"));
            let o = run(&[
                "simulate",
                "--params",
                f.to_str().unwrap(),
                "--delta",
                "0.9",
                "--seeds",
                "0..3",
                "--out",
                path.to_str().unwrap(),
            ]);
            assert_eq!(o.status.code(), Some(0));
            (stdout(&o), std::fs::read(&path).unwrap())
        })
        .collect();
    assert_eq!(outs[0], outs[1]);
    let trace = String::from_utf8(outs[0].1.clone()).unwrap();
    assert!(trace.starts_with("seed,round,client_action,provider_action,outcome,g_client,g_provider\n"));
}

#[test]
fn deviation_check_reports_threshold_side() {
    let f = fixture();
    let pass = stdout(&run(&["deviation-check", "--params", f.to_str().unwrap(), "--delta", "0.9", "--format", "kv"]));
    let fail = stdout(&run(&["deviation-check", "--params", f.to_str().unwrap(), "--delta", "0.83", "--format", "kv"]));
    assert!(pass.contains("passed=true"), "{pass}");
    assert!(fail.contains("passed=false"), "{fail}");
}

#[test]
fn reputation_sim_stays_within_bound() {
    let f = fixture();
    let o = run(&[
        "reputation-sim",
        "--params",
        f.to_str().unwrap(),
        "--mu-star",
        "0.2",
        "--seeds",
        "0..50",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("seed,test_count,phase,settled_round,exposed_round"));
    for line in lines {
        let count: u64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(count <= 3, "{line}");
    }
}

#[test]
fn ppe_set_writes_partial_set_on_non_convergence() {
    let f = fixture();
    let dir = scratch("ppe");
    let path = dir.join("set.csv");
    let o = run(&[
        "ppe-set",
        "--params",
        f.to_str().unwrap(),
        "--delta",
        "0.9",
        "--max-iters",
        "1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let csv = std::fs::read_to_string(&path).unwrap();
    assert!(csv.starts_with("v_client,v_provider,enforcing_profile,"));
    assert!(csv.lines().count() > 1);
}

#[test]
fn reproduce_pizza_writes_three_files() {
    let dir = scratch("repro");
    let o = run(&["reproduce-pizza", "--out-dir", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let table = std::fs::read_to_string(dir.join("pizza-table.csv")).unwrap();
    assert!(table.contains("delta_threshold,0.840336134"));
    let fig3 = std::fs::read_to_string(dir.join("figure3.csv")).unwrap();
    assert!(fig3.contains("\n0.2,3\n") && fig3.contains("\n0.4,1\n"));
    assert!(dir.join("figure4.csv").exists());
}
