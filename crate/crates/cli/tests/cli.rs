use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_auction-design"))
        .args(args)
        .env_remove("AUCTION_DESIGN_SEED")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

#[test]
fn solve_seller_worst_revenue() {
    let v = stdout_json(&run(&["solve", "--objective", "seller-worst", "-n", "2", "-p", "0.5"]));
    let rev = v["revenue"].as_f64().unwrap();
    assert!((rev - 0.3385).abs() < 5e-4, "{rev}");
    assert_eq!(v["objective"], "seller-worst");
}

#[test]
fn buyer_optimal_single_buyer_has_no_zero_atom() {
    let v = stdout_json(&run(&["solve", "--objective", "buyer-optimal", "-n", "1", "-p", "0.4"]));
    assert_eq!(v["k"].as_f64(), Some(0.0));
    assert_eq!(v["theta0"].as_f64(), Some(0.0));
}

#[test]
fn invalid_mean_exits_2() {
    let out = run(&["solve", "-n", "2", "-p", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["solve", "-n", "0", "-p", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["sweep", "--p-grid", "0.1:0.2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_exit_codes() {
    let ok = run(&["verify", "--claim", "irexample"]);
    assert_eq!(ok.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(v[0]["status"], "confirmed");

    let bad = run(&["verify", "--claim", "irexample", "--corrupt-constants"]);
    assert_eq!(bad.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&bad.stdout).unwrap();
    assert_eq!(v[0]["status"], "violated");

    let unknown = run(&["verify", "--claim", "no-such-claim"]);
    assert_eq!(unknown.status.code(), Some(2));
}

#[test]
fn sweep_csv_header_and_order() {
    let out = run(&["sweep", "--format", "csv", "--n-grid", "1:3", "--p-grid", "0.1:0.5:0.2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "schema_version,objective,n,p,case,theta0,k,theta,x_scale,revenue,total_surplus,buyer_surplus,sale_probability"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2 * 3 * 3);
    assert_eq!(&rows[0][1..4], ["seller-worst", "1", "0.1"]);
    assert_eq!(&rows[4][1..4], ["seller-worst", "2", "0.3"]);
    assert_eq!(&rows[17][1..4], ["buyer-optimal", "3", "0.5"]);
}

#[test]
fn output_is_deterministic() {
    let args = ["simulate", "-n", "2", "-p", "0.5", "--trials", "20000", "--seed", "11"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
    let a = run(&["sweep", "--n-grid", "1:4"]).stdout;
    let b = run(&["sweep", "--n-grid", "1:4"]).stdout;
    assert_eq!(a, b);
}

#[test]
fn seed_flag_overrides_env() {
    let base = ["simulate", "-n", "2", "-p", "0.5", "--trials", "20000"];
    let with_env = |seed: &str, extra: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_auction-design"))
            .args(base)
            .args(extra)
            .env("AUCTION_DESIGN_SEED", seed)
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(with_env("5", &[]), run(&[&base[..], &["--seed", "5"]].concat()).stdout);
    assert_eq!(with_env("99", &["--seed", "5"]), with_env("5", &[]));
    assert_ne!(with_env("6", &[]), with_env("5", &[]));
}

#[test]
fn out_file_and_eval() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("design.json");
    let out = run(&["solve", "-n", "3", "-p", "0.3", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let dist_path = dir.path().join("dist.json");
    std::fs::write(&dist_path, serde_json::to_string(&v["distribution"]).unwrap()).unwrap();
    let e = stdout_json(&run(&["eval", "--dist", dist_path.to_str().unwrap(), "-n", "3"]));
    let rev = e["stats"]["revenue"].as_f64().unwrap();
    assert!((rev - v["revenue"].as_f64().unwrap()).abs() < 1e-9);
}

#[test]
fn asym_limit_matches_reported_surplus() {
    let v = stdout_json(&run(&["asym", "limit", "-p", "0.4", "--theta0", "0.4751", "--theta", "0.8661", "-n", "10"]));
    let s = v["stats"]["buyer_surplus"].as_f64().unwrap();
    assert!((s - 0.1097).abs() < 1e-3, "{s}");
}
