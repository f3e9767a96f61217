use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hrcn_core::learner::write_model;
use hrcn_core::synthetic::random_problem;
use hrcn_core::{Halfspace, Seed};
use tempfile::TempDir;

fn hrcn() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_hrcn"));
    for (k, _) in std::env::vars() {
        if k.starts_with("HRCN_") {
            c.env_remove(k);
        }
    }
    c
}

fn run(args: &[&str]) -> Output {
    hrcn().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn p(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Value of `key=` in `key=value` output lines.
fn field(text: &str, key: &str) -> f64 {
    let prefix = format!("{key}=");
    let line = text
        .lines()
        .find(|l| l.starts_with(&prefix))
        .unwrap_or_else(|| panic!("no {key} in {text}"));
    line[prefix.len()..].split_whitespace().next().unwrap().parse().unwrap()
}

const QUICK: &[&str] = &[
    "--scale-init-final",
    "0.002",
    "--scale-optimize",
    "5",
    "--scale-test",
    "5",
    "--iteration-cap",
    "30",
];

#[test]
fn gen_is_byte_identical_and_has_manifest() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (p(&dir, "a.csv"), p(&dir, "b.csv"));
    for out in [&a, &b] {
        let o = run(&[
            "gen",
            "--d",
            "5",
            "--n",
            "1000",
            "--t",
            "1.0",
            "--eta",
            "0.2",
            "--seed",
            "7",
            "--out",
            s(out),
        ]);
        assert_eq!(code(&o), 0, "{o:?}");
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let text = std::fs::read_to_string(&a).unwrap();
    assert!(text.starts_with("# halfspace-rcn v1 d=5 n=1000 seed=7 "));
    assert_eq!(text.lines().count(), 1001);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "gen");
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["samples_used"], 1000);
    assert!(manifest["args"].as_array().unwrap().iter().any(|v| v == "--seed"));
}

#[test]
fn bias_and_threshold_give_matching_labels() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (p(&dir, "t.csv"), p(&dir, "b.csv"));
    let base = ["gen", "--d", "4", "--n", "20000", "--eta", "0", "--seed", "3"];
    assert_eq!(
        code(&hrcn().args(base).args(["--t", "1.0", "--out", s(&a)]).output().unwrap()),
        0
    );
    assert_eq!(
        code(
            &hrcn()
                .args(base)
                .args(["--bias", "0.1587", "--out", s(&b)])
                .output()
                .unwrap()
        ),
        0
    );
    let labels = |path: &Path| -> Vec<String> {
        std::fs::read_to_string(path)
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| l.split(',').next().unwrap().to_string())
            .collect()
    };
    let (la, lb) = (labels(&a), labels(&b));
    let differ = la.iter().zip(&lb).filter(|(x, y)| x != y).count();
    // The thresholds differ by about 5e-5, so only samples in that sliver
    // of the margin (density ≤ 0.4) can change label.
    assert!(differ <= 5, "{differ} labels differ");
}

#[test]
fn gen_validation_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let out = p(&dir, "x.csv");
    let o = run(&[
        "gen",
        "--d",
        "5",
        "--n",
        "10",
        "--t",
        "1",
        "--eta",
        "0.6",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("noise rate"));
    let o = run(&[
        "gen",
        "--d",
        "5",
        "--n",
        "10",
        "--t",
        "1",
        "--bias",
        "0.2",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 2);
    let o = run(&["gen", "--d", "5", "--n", "10", "--out", s(&out)]);
    assert_eq!(code(&o), 2);
    let o = run(&["bogus"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn env_fills_missing_flags_and_flags_win() {
    let dir = TempDir::new().unwrap();
    let (a, b, c) = (p(&dir, "a.csv"), p(&dir, "b.csv"), p(&dir, "c.csv"));
    let args = ["gen", "--d", "3", "--n", "50", "--t", "0.5"];
    let o = hrcn()
        .args(args)
        .args(["--seed", "7", "--out", s(&a)])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let o = hrcn()
        .args(args)
        .env("HRCN_SEED", "7")
        .args(["--out", s(&b)])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let o = hrcn()
        .args(args)
        .env("HRCN_SEED", "8")
        .args(["--seed", "7", "--out", s(&c)])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    assert_eq!(bytes, std::fs::read(&c).unwrap());
}

fn learn_stream(dir: &TempDir, tag: &str, extra: &[&str]) -> (Output, PathBuf, PathBuf) {
    let model = p(dir, &format!("{tag}.model"));
    let report = p(dir, &format!("{tag}.json"));
    let o = hrcn()
        .args([
            "learn",
            "--stream",
            "d=5,t=0.5,eta=0.1,seed=11",
            "--eps",
            "0.2",
            "--fresh-test",
            "20000",
        ])
        .args(QUICK)
        .args(extra)
        .args(["--out-model", s(&model), "--out-report", s(&report)])
        .output()
        .unwrap();
    (o, model, report)
}

#[test]
fn learn_stream_is_deterministic_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    let (o1, m1, r1) = learn_stream(&dir, "one", &["--eta", "0.1", "--threads", "1"]);
    assert_eq!(code(&o1), 0, "{o1:?}");
    let (o2, m2, r2) = learn_stream(&dir, "two", &["--eta", "0.1", "--threads", "2"]);
    assert_eq!(code(&o2), 0);
    assert_eq!(std::fs::read(&m1).unwrap(), std::fs::read(&m2).unwrap());
    assert_eq!(std::fs::read(&r1).unwrap(), std::fs::read(&r2).unwrap());
    assert!(dir.path().join("one.model.manifest.json").exists());
    assert!(dir.path().join("one.json.manifest.json").exists());

    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&r1).unwrap()).unwrap();
    assert_eq!(report["format"], "halfspace-rcn-report v1");
    let fresh = report["fresh_error"].as_f64().unwrap();
    assert!(fresh <= 0.1 + 0.2 + 0.01, "fresh error {fresh}");
    assert!((field(&stdout(&o1), "fresh_error") - fresh).abs() < 1e-5);
    assert!(report["samples_used"].as_u64().unwrap() > 0);
    assert!(!report["per_threshold_errors"].as_array().unwrap().is_empty());
}

#[test]
fn unknown_eta_grid_contains_truth() {
    let dir = TempDir::new().unwrap();
    let (o, _, r) = learn_stream(&dir, "u", &["--unknown-eta"]);
    assert_eq!(code(&o), 0, "{o:?}");
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&r).unwrap()).unwrap();
    let grid: Vec<f64> = report["eta_grid"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert!(grid.iter().any(|g| (g - 0.1).abs() <= 0.2), "{grid:?}");
    assert!(report["eta_estimate"]["eta_hat"].is_number());
}

#[test]
fn learn_needs_noise_mode_and_input() {
    let o = run(&["learn", "--stream", "d=5", "--eps", "0.2"]);
    assert_eq!(code(&o), 2);
    let o = run(&["learn", "--eta", "0.1"]);
    assert_eq!(code(&o), 2);
    let o = run(&["learn", "--stream", "d=5,t=1,bias=0.3", "--eta", "0.1"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn learn_on_small_file_exits_3() {
    let dir = TempDir::new().unwrap();
    let data = p(&dir, "small.csv");
    let o = run(&[
        "gen",
        "--d",
        "5",
        "--n",
        "2000",
        "--t",
        "0.5",
        "--eta",
        "0.1",
        "--seed",
        "1",
        "--out",
        s(&data),
    ]);
    assert_eq!(code(&o), 0);
    let o = run(&["learn", "--data", s(&data), "--eta", "0.1", "--eps", "0.2"]);
    assert_eq!(code(&o), 3, "{o:?}");
    assert!(String::from_utf8_lossy(&o.stderr).contains("short by"));
}

fn write_target_model(dir: &TempDir, d: usize, t: f64, seed: u64) -> PathBuf {
    let spec = random_problem(d, t, 0.0, Seed(seed)).unwrap();
    let path = p(dir, "target.model");
    write_model(std::fs::File::create(&path).unwrap(), &spec.target).unwrap();
    path
}

#[test]
fn eval_target_on_noiseless_data_is_exact() {
    let dir = TempDir::new().unwrap();
    let data = p(&dir, "clean.csv");
    let o = run(&[
        "gen",
        "--d",
        "6",
        "--n",
        "5000",
        "--t",
        "0.7",
        "--eta",
        "0",
        "--seed",
        "5",
        "--out",
        s(&data),
    ]);
    assert_eq!(code(&o), 0);
    let model = write_target_model(&dir, 6, 0.7, 5);
    let csv = p(&dir, "eval.csv");
    let o = run(&["eval", "--model", s(&model), "--data", s(&data), "--csv", s(&csv)]);
    assert_eq!(code(&o), 0);
    assert_eq!(field(&stdout(&o), "error"), 0.0);
    let rows = std::fs::read_to_string(&csv).unwrap();
    assert!(rows.starts_with("model,data,n,error\n"));
    assert!(rows.lines().nth(1).unwrap().ends_with(",5000,0.0000000000000000e0"));
}

#[test]
fn eval_constant_model_on_balanced_data() {
    let dir = TempDir::new().unwrap();
    let data = p(&dir, "bal.csv");
    let o = run(&[
        "gen",
        "--d",
        "3",
        "--n",
        "100000",
        "--t",
        "0",
        "--eta",
        "0",
        "--seed",
        "9",
        "--out",
        s(&data),
    ]);
    assert_eq!(code(&o), 0);
    let model = p(&dir, "const.model");
    write_model(std::fs::File::create(&model).unwrap(), &Halfspace::constant_plus(3)).unwrap();
    let o = run(&["eval", "--model", s(&model), "--data", s(&data)]);
    assert_eq!(code(&o), 0);
    assert!((field(&stdout(&o), "error") - 0.5).abs() <= 0.01);
}

#[test]
fn eval_dimension_mismatch_exits_2() {
    let dir = TempDir::new().unwrap();
    let data = p(&dir, "d4.csv");
    assert_eq!(
        code(&run(&["gen", "--d", "4", "--n", "10", "--t", "0", "--out", s(&data)])),
        0
    );
    let model = write_target_model(&dir, 6, 0.0, 1);
    let o = run(&["eval", "--model", s(&model), "--data", s(&data)]);
    assert_eq!(code(&o), 2);
    let o = run(&["eval", "--model", s(&dir.path().join("missing")), "--data", s(&data)]);
    assert_eq!(code(&o), 2);
}

fn sweep_samples(dir: &TempDir, name: &str, args: &[&str]) -> Vec<f64> {
    let out = p(dir, name);
    let o = hrcn()
        .args(["sweep", "--formula-only", "--out", s(&out)])
        .args(args)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{o:?}");
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "setting_id,d,t,eta,eps,trial,seed,samples_used,test_error,wall_ms"
    );
    lines.map(|l| l.split(',').nth(7).unwrap().parse().unwrap()).collect()
}

#[test]
fn sweep_formula_scales_like_d_over_eps_when_bias_is_large() {
    let dir = TempDir::new().unwrap();
    // Balanced target, ε far below p = 1/2 and small enough that the
    // ε-dependent stages outweigh initialization.
    let n = sweep_samples(
        &dir,
        "a.csv",
        &[
            "--preset",
            "full",
            "--eps-list",
            "2e-6,1e-6",
            "--t-list",
            "0",
            "--eta-list",
            "0",
        ],
    );
    assert!(n[1] / n[0] >= 1.8, "{n:?}");
    let n = sweep_samples(
        &dir,
        "b.csv",
        &["--eps-list", "2e-4,1e-4", "--t-list", "0", "--eta-list", "0.1"],
    );
    assert!(n[1] / n[0] >= 1.8, "{n:?}");
}

#[test]
fn sweep_formula_scales_like_inverse_square_when_bias_tracks_eps() {
    let dir = TempDir::new().unwrap();
    // t = Φ^{-1}(1 − ε) puts the target bias at ε.
    let mut totals = Vec::new();
    for (eps, t) in [("0.02", "2.0537489"), ("0.01", "2.3263479")] {
        let n = sweep_samples(&dir, "c.csv", &["--eps-list", eps, "--t-list", t, "--eta-list", "0"]);
        totals.push(n[0]);
    }
    assert!(totals[1] / totals[0] >= 3.0, "{totals:?}");
}

#[test]
fn sweep_without_timing_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (p(&dir, "a.csv"), p(&dir, "b.csv"));
    for out in [&a, &b] {
        let o = hrcn()
            .args([
                "sweep",
                "--d",
                "4",
                "--eps-list",
                "0.2",
                "--t-list",
                "0.5",
                "--eta-list",
                "0.1",
            ])
            .args([
                "--trials",
                "2",
                "--seed",
                "3",
                "--no-timing",
                "--fresh-test",
                "5000",
                "--out",
                s(out),
            ])
            .args(QUICK)
            .output()
            .unwrap();
        assert_eq!(code(&o), 0, "{o:?}");
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols.len(), 10);
        assert_eq!(cols[9], "");
        let err: f64 = cols[8].parse().unwrap();
        assert!(err < 0.5);
    }
}

#[test]
fn sweep_rejects_bad_grids() {
    let dir = TempDir::new().unwrap();
    let out = p(&dir, "x.csv");
    let base = [
        "sweep",
        "--eps-list",
        "0.2",
        "--t-list",
        "1",
        "--eta-list",
        "0.2",
        "--out",
        s(&out),
    ];
    assert_eq!(code(&hrcn().args(base).args(["--trials", "0"]).output().unwrap()), 2);
    let o = run(&[
        "sweep",
        "--eps-list",
        "",
        "--t-list",
        "1",
        "--eta-list",
        "0.2",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 2);
    let o = run(&["sweep", "--t-list", "1", "--eta-list", "0.2", "--out", s(&out)]);
    assert_eq!(code(&o), 2);
}

#[test]
fn sq_corr_reports_series_within_bound() {
    let o = run(&[
        "sq", "corr", "--theta", "1.0472", "--t", "1", "--kmax", "200", "--mc", "20000",
    ]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "theta,t,series_value,bound_value,mc_estimate,mc_stderr,truncation"
    );
    let cols: Vec<f64> = lines.next().unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    assert!(cols[2].abs() <= cols[3]);
    assert!((cols[2] - cols[4]).abs() <= 4.0 * cols[5]);
}

#[test]
fn sq_packing_certificate_and_budget() {
    let o = run(&["sq", "packing", "--d", "400", "--c", "0.3", "--m", "50", "--seed", "1"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let line = text.lines().find(|l| l.starts_with("certificate:")).unwrap();
    assert!(line.ends_with("< threshold=0.301709"), "{line}");
    let inner: f64 = line
        .split("max_abs_inner=")
        .nth(1)
        .unwrap()
        .split(' ')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!(inner < 0.302);
    let o = run(&[
        "sq",
        "packing",
        "--d",
        "2",
        "--c",
        "0.01",
        "--m",
        "100",
        "--max-tries",
        "500",
    ]);
    assert_eq!(code(&o), 3);
}

#[test]
fn sq_domain_and_numeric_errors() {
    assert_eq!(code(&run(&["sq", "bound", "--theta", "0", "--t", "1"])), 2);
    assert_eq!(code(&run(&["sq", "mehler", "--rho", "1.0", "--x", "0"])), 2);
    assert_eq!(code(&run(&["sq", "mehler", "--rho", "0.5", "--x", "1000"])), 4);
    assert_eq!(
        code(&run(&["sq", "chi", "--theta", "1", "--t", "1", "--eta", "0.5"])),
        2
    );
    let o = run(&["sq", "mehler", "--rho", "-0.5", "--x", "1", "--kmax", "400"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let gap: f64 = text
        .lines()
        .nth(1)
        .unwrap()
        .rsplit(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!(gap <= 1e-8);
}

#[test]
fn sq_distinguish_planted_success_rate() {
    let o = run(&[
        "sq",
        "distinguish",
        "--d",
        "400",
        "--eps",
        "0.2",
        "--trials",
        "100",
        "--planted",
        "--seed",
        "2",
    ]);
    assert_eq!(code(&o), 0, "{o:?}");
    let text = stdout(&o);
    assert!(!text.contains("null_accuracy"));
    assert!(field(&text, "planted_accuracy") >= 2.0 / 3.0, "{text}");
}

#[test]
fn sq_calibrate_and_chi_print_fields() {
    let o = run(&[
        "sq",
        "calibrate",
        "--d",
        "50",
        "--eps",
        "0.2",
        "--trials",
        "30",
        "--seed",
        "4",
    ]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(field(&text, "c").is_finite());
    assert!(field(&text, "null_error") <= 0.5);
    let o = run(&["sq", "chi", "--theta", "1.0472", "--t", "1", "--eta", "0.3333"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("pair_within_bound=true"));
}
