use std::path::Path;
use std::process::Command;

use rendezvous_cli::{run_cli, EXIT_CONFIG, EXIT_NEGATIVE, EXIT_OK};

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run_cli(
        std::iter::once("rendezvous").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn seeded_run_writes_trace_files() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("t.json");
    let csv = dir.path().join("t.csv");
    let (code, out, _) = cli(&[
        "run",
        "--n",
        "10",
        "--d",
        "50",
        "--r",
        "1.28",
        "--seed",
        "7",
        "--json",
        path_str(&json),
        "--csv",
        path_str(&csv),
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("rendezvous n=10 d=50 "), "{out}");
    let trace: rendezvous_core::Trace =
        serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert!(trace.rendezvous_achieved);
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 11);
}

#[test]
fn identical_coins_exit_censored() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("all_same.txt");
    std::fs::write(&script, "RRRRRR\nRRRRRR\nRRRRRR\n").unwrap();
    let (code, out, _) = cli(&["run", "--script", path_str(&script), "--d", "1"]);
    assert_eq!(code, EXIT_NEGATIVE);
    assert!(out.starts_with("censored"), "{out}");
}

#[test]
fn span_is_inferred_from_positions() {
    let (code, out, _) = cli(&["run", "--positions", "0,0.5,1", "--seed", "1"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains(" d=1 "), "{out}");
    let (code, _, err) = cli(&["run", "--positions", "0,0.5,1", "--d", "3"]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("disagrees"), "{err}");
}

#[test]
fn negative_positions_parse() {
    let (code, out, _) = cli(&["run", "--positions", "-2,0,3", "--seed", "4"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains(" d=5 "), "{out}");
}

#[test]
fn config_errors_exit_one() {
    assert_eq!(cli(&["run", "--n", "3"]).0, EXIT_CONFIG);
    assert_eq!(cli(&["run", "--n", "2", "--d", "5"]).0, EXIT_CONFIG);
    assert_eq!(
        cli(&["run", "--n", "3", "--d", "5", "--r", "0.9"]).0,
        EXIT_CONFIG
    );
    assert_eq!(cli(&["run", "--nonsense"]).0, EXIT_CONFIG);
    assert_eq!(cli(&["bounds", "--r", "2.5"]).0, EXIT_CONFIG);
    assert_eq!(
        cli(&["sweep", "--n", "4", "--d", "10", "--placement", "grid"]).0,
        EXIT_CONFIG
    );
    assert_eq!(
        cli(&["sweep", "--n", "4", "--d", "10", "--workers", "0"]).0,
        EXIT_CONFIG
    );
    assert_eq!(
        cli(&["oracle", "--n", "8", "--horizon", "4", "--budget", "1000"]).0,
        EXIT_CONFIG
    );
}

#[test]
fn help_documents_every_subcommand() {
    for sub in ["run", "sweep", "bounds", "optimize", "oracle"] {
        let (code, out, _) = cli(&[sub, "--help"]);
        assert_eq!(code, EXIT_OK, "{sub}");
        assert!(out.contains("--json"), "{sub}: {out}");
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "positions = [0.0, 0.5, 1.0]\nr = 1.28\nseed = 3\njson = \"trace.json\"\n",
    )
    .unwrap();
    let (code, _, err) = cli(&["run", "--config", path_str(&cfg)]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(dir.path().join("trace.json").exists());

    std::fs::write(&cfg, "positions = [0.0, 0.5, 1.0]\nseed = 3\n").unwrap();
    let (code, out, _) = cli(&["run", "--config", path_str(&cfg), "--r", "1.5"]);
    assert_eq!(code, EXIT_OK);
    let (_, base, _) = cli(&["run", "--config", path_str(&cfg)]);
    assert_ne!(out, base);

    std::fs::write(&cfg, "positions = [0.0, 1.0, 2.0]\ncolour = \"red\"\n").unwrap();
    assert_eq!(cli(&["run", "--config", path_str(&cfg)]).0, EXIT_CONFIG);
}

#[test]
fn sweep_is_reproducible_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let base = [
        "sweep", "--n", "4,8", "--d", "20,40", "--trials", "12", "--seed", "9",
    ];
    let mut one: Vec<&str> = base.to_vec();
    one.extend(["--workers", "1", "--csv", path_str(&a)]);
    let mut three: Vec<&str> = base.to_vec();
    three.extend(["--workers", "3", "--csv", path_str(&b)]);
    assert_eq!(cli(&one).0, EXIT_OK);
    assert_eq!(cli(&three).0, EXIT_OK);
    let csv = std::fs::read(&a).unwrap();
    assert_eq!(csv, std::fs::read(&b).unwrap());
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("n,d,r,placement,trials,censored,mean_dist_ratio,max_dist_ratio,sd_dist_ratio,mean_time_ratio,mean_rounds,mean_total_time,mean_max_distance\n"));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn sweep_writes_figure_datasets() {
    let dir = tempfile::tempdir().unwrap();
    let figs = dir.path().join("figs");
    let (code, _, err) = cli(&[
        "sweep",
        "--n",
        "4,6",
        "--d",
        "30",
        "--trials",
        "5",
        "--figures",
        path_str(&figs),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    for name in [
        "mean_dist_ratio",
        "mean_rounds",
        "mean_total_time",
        "mean_time_ratio",
        "mean_max_distance",
    ] {
        let text = std::fs::read_to_string(figs.join(format!("{name}.csv"))).unwrap();
        assert_eq!(text.lines().count(), 3, "{name}");
    }
    assert!(figs.join("figures.json").exists());
}

#[test]
fn bounds_and_optimize_report() {
    let (code, out, _) = cli(&["bounds", "--r", "1.28", "--n", "3"]);
    assert_eq!(code, EXIT_OK);
    let line = out
        .lines()
        .find(|l| l.starts_with("competitive_ratio"))
        .unwrap();
    let v: f64 = line.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!((v - 54.732).abs() < 0.05);

    let (code, out, _) = cli(&["bounds", "--r", "1.28", "--n", "inf"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("n                  inf"), "{out}");

    let (code, out, _) = cli(&[
        "optimize", "--lo", "1.05", "--hi", "1.95", "--step", "0.005",
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("probe r=1.28"), "{out}");
}

#[test]
fn oracle_reports_and_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("v.txt");
    let (code, out, _) = cli(&[
        "oracle",
        "--n",
        "3",
        "--horizon",
        "5",
        "--d",
        "1",
        "--dump-violations",
        path_str(&dump),
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("followup_violations: 0"), "{out}");
    assert_eq!(std::fs::read_to_string(&dump).unwrap(), "");

    // An uneven four-robot start where a second pair forms one round late.
    let (code, out, _) = cli(&[
        "oracle",
        "--positions",
        "0,0.1,0.9,1",
        "--horizon",
        "4",
        "--dump-violations",
        path_str(&dump),
    ]);
    assert_eq!(code, EXIT_NEGATIVE);
    assert!(out.contains("followup_violations: 16"), "{out}");
    assert!(std::fs::read_to_string(&dump)
        .unwrap()
        .contains("LLRR\nLLRL\nLLRL\nLLLL"));

    let (code, out, _) = cli(&[
        "oracle",
        "--n",
        "3",
        "--horizon",
        "4",
        "--mc-trials",
        "4000",
        "--mc-seed",
        "2",
    ]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.contains("within_3se true"), "{out}");
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_rendezvous");
    let ok = Command::new(bin).args(["bounds"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    let bad = Command::new(bin)
        .args(["run", "--d", "-1", "--n", "3"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_CONFIG));
    assert!(!bad.stderr.is_empty());
}
