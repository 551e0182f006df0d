use std::fs;
use std::path::Path;

use glp_cli::{run, CliError, Outcome};

fn glp(out_dir: &Path, args: &[&str]) -> (Result<Outcome, CliError>, String) {
    let mut argv = vec!["glp".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    argv.push("--out".into());
    argv.push(out_dir.display().to_string());
    let mut buf = Vec::new();
    let result = run(argv, &mut buf);
    (result, String::from_utf8(buf).unwrap())
}

fn ok(out_dir: &Path, args: &[&str]) -> String {
    let (result, text) = glp(out_dir, args);
    assert_eq!(result.unwrap(), Outcome::Success, "{text}");
    text
}

fn line<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find(|l| l.starts_with(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no `{key}` in {text}"))
}

fn only_file(dir: &Path, prefix: &str) -> String {
    let mut hits: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().into_string().unwrap())
        .filter(|n| n.starts_with(prefix))
        .collect();
    assert_eq!(hits.len(), 1, "{hits:?}");
    fs::read_to_string(dir.join(hits.pop().unwrap())).unwrap()
}

#[test]
fn solve_constant_law() {
    let dir = tempfile::tempdir().unwrap();
    let text = ok(dir.path(), &["solve", "--dist", "constant:2", "--d", "2", "--n", "7", "--seed", "1"]);
    assert_eq!(line(&text, "value"), "value = 14");
    assert_eq!(line(&text, "exact"), "exact = true");
    let csv = fs::read_to_string(dir.path().join("results/solve.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    // identical config again: no new row
    ok(dir.path(), &["solve", "--dist", "constant:2", "--d", "2", "--n", "7", "--seed", "1"]);
    let csv = fs::read_to_string(dir.path().join("results/solve.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn truncation_inactive_for_nonnegative_law() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["solve", "--dist", "bernoulli:0.5", "--d", "2", "--n", "8", "--seed", "7"];
    let plain = ok(dir.path(), &base);
    let mut with_m = base.to_vec();
    with_m.extend(["--m", "0"]);
    let truncated = ok(dir.path(), &with_m);
    for key in ["value", "path", "exact"] {
        assert_eq!(line(&plain, key), line(&truncated, key));
    }
}

#[test]
fn solve_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["solve", "--dist", "gaussian:0,1", "--d", "2", "--n", "8", "--seed", "3"];
    assert_eq!(ok(dir.path(), &args), ok(dir.path(), &args));
}

#[test]
fn config_file_with_flag_override_and_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# solve settings\ndist = constant:3\nd = 2\nn = 4\nseed = 1\n").unwrap();
    let cfg_s = cfg.display().to_string();
    let text = ok(dir.path(), &["solve", "--config", &cfg_s]);
    assert_eq!(line(&text, "value"), "value = 12");
    let text = ok(dir.path(), &["solve", "--config", &cfg_s, "--n", "5"]);
    assert_eq!(line(&text, "value"), "value = 15");

    fs::write(&cfg, "dist = constant:3\nn = four\nseed = 1\n").unwrap();
    let err = glp(dir.path(), &["solve", "--config", &cfg_s]).0.unwrap_err().to_string();
    assert!(err.contains("run.cfg:2") && err.contains("`n`"), "{err}");
    fs::write(&cfg, "dist = constant:3\nlength = 4\n").unwrap();
    let err = glp(dir.path(), &["solve", "--config", &cfg_s]).0.unwrap_err().to_string();
    assert!(err.contains("run.cfg:2") && err.contains("length"), "{err}");
    let err = glp(dir.path(), &["solve", "--dist", "constant:3", "--n", "4"]).0.unwrap_err().to_string();
    assert!(err.contains("seed"), "{err}");
}

#[test]
fn estimate_constant_law_single_row() {
    let dir = tempfile::tempdir().unwrap();
    let text = ok(
        dir.path(),
        &["estimate", "--dist", "constant:2", "--d", "2", "--n", "5", "--seed", "1", "--replicas", "10"],
    );
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(
        lines[0],
        "experiment_id,d,family,params,n,m,replicas,mean,stderr,ci_low,ci_high,exact_fraction"
    );
    let fields: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(fields[6], "10");
    assert_eq!(fields[7].parse::<f64>().unwrap(), 2.0);
    assert_eq!(fields[8].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn estimate_grid_emits_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let text = ok(
        dir.path(),
        &[
            "estimate", "--dist", "two_point:1,10,0.3", "--n-grid", "3,4,5", "--m-grid", "0,2,inf", "--seed", "2",
            "--replicas", "20",
        ],
    );
    assert_eq!(text.lines().count(), 1 + 9);
}

fn estimate_args(replicas: &str) -> Vec<&str> {
    vec![
        "estimate", "--dist", "two_point:1,10,0.3", "--n-grid", "4,6", "--m-grid", "2,inf", "--seed", "11",
        "--replicas", replicas,
    ]
}

#[test]
fn resume_with_more_replicas() {
    let dir = tempfile::tempdir().unwrap();
    let first = ok(dir.path(), &estimate_args("200"));
    let samples_path = dir.path().join("results");
    let samples_before = only_file(&samples_path, "samples-");
    let second = ok(dir.path(), &estimate_args("400"));
    let samples_after = only_file(&samples_path, "samples-");
    // append-only: old rows are an untouched prefix
    assert!(samples_after.starts_with(&samples_before));
    assert!(samples_after.len() > samples_before.len());
    for (old, new) in first.lines().skip(1).zip(second.lines().skip(1)) {
        let o: Vec<&str> = old.split(',').collect();
        let n: Vec<&str> = new.split(',').collect();
        assert_eq!((o[6], n[6]), ("200", "400"));
        let mean: f64 = n[7].parse().unwrap();
        let (lo, hi): (f64, f64) = (o[9].parse().unwrap(), o[10].parse().unwrap());
        assert!(lo <= mean && mean <= hi, "{mean} outside [{lo}, {hi}]");
    }
    // the resumed table equals a fresh run with the larger count
    let fresh = tempfile::tempdir().unwrap();
    assert_eq!(ok(fresh.path(), &estimate_args("400")), second);
    // rerunning the completed config is a no-op for the samples
    ok(dir.path(), &estimate_args("400"));
    assert_eq!(only_file(&samples_path, "samples-"), samples_after);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    let entry = manifest["experiments"].as_object().unwrap().values().next().unwrap();
    assert_eq!(entry["replicas_done"], 400);
    assert_eq!(manifest["files"].as_object().unwrap().len(), 2);
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let runs: Vec<(String, String)> = ["1", "8"]
        .iter()
        .map(|t| {
            let dir = tempfile::tempdir().unwrap();
            let mut args = estimate_args("100");
            args.extend(["--threads", t]);
            let table = ok(dir.path(), &args);
            ok(dir.path(), &["verify", "--check", "tail-bound,key-lemma", "--replicas", "300", "--threads", t]);
            let reports = dir.path().join("reports");
            let json = only_file(&reports, "tail-bound-") + &only_file(&reports, "key-lemma-");
            (table, json)
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn verify_exact_checks() {
    let dir = tempfile::tempdir().unwrap();
    let text = ok(dir.path(), &["verify", "--check", "stirling", "--nmax", "10"]);
    assert!(text.starts_with("PASS stirling (exact)"), "{text}");
    let report: serde_json::Value =
        serde_json::from_str(&only_file(&dir.path().join("reports"), "stirling-")).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["mode"], "exact");

    let text = ok(dir.path(), &["verify", "--check", "key-lemma-exact", "--q", "0.5", "--n", "3"]);
    assert!(text.contains("k=1") && text.contains("k=2") && text.starts_with("PASS"), "{text}");
}

#[test]
fn verify_failures_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let err = glp(dir.path(), &["verify", "--check", "stirlingg"]).0.unwrap_err();
    assert!(matches!(err, CliError::UnknownCheck(_)));
    // E xi^4 = inf: the check fails and the exit status says so
    let (result, text) = glp(
        dir.path(),
        &["verify", "--check", "fourth-moment", "--dist", "pareto:3,negative,1", "--batches", "300"],
    );
    assert_eq!(result.unwrap(), Outcome::ChecksFailed);
    assert!(text.contains("infinite_moment"), "{text}");
}

#[test]
fn verify_all_quick() {
    let dir = tempfile::tempdir().unwrap();
    let start = std::time::Instant::now();
    let text = ok(dir.path(), &["verify", "--check", "all", "--profile", "quick"]);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 11, "{text}");
    assert!(start.elapsed().as_secs() < 120);
}

#[test]
fn plot_empty_store_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("store");
    let err = glp(&out, &["plot"]).0.unwrap_err();
    assert!(matches!(err, CliError::EmptyStore(_)));
    assert!(!out.exists());
}

#[test]
fn plot_constant_store_is_flat() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &["estimate", "--dist", "constant:2", "--n-grid", "3,5,7", "--seed", "1", "--replicas", "5"],
    );
    let text = ok(dir.path(), &["plot"]);
    assert!(text.contains("-growth.svg"));
    let plots = dir.path().join("plots");
    let names: Vec<String> = fs::read_dir(&plots)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    // only m = inf was sampled, so there is no truncation figure
    assert_eq!(names.len(), 2, "{names:?}");
    let data = fs::read_to_string(plots.join(names.iter().find(|n| n.ends_with("-data.csv")).unwrap())).unwrap();
    let ys: Vec<f64> = data
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(4).unwrap().parse().unwrap())
        .collect();
    assert_eq!(ys.len(), 3);
    assert!(ys.iter().all(|&y| y == 2.0));
}

#[test]
fn plot_two_point_nonincreasing_in_m() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "estimate", "--dist", "two_point:1,10,0.3", "--n-grid", "6", "--m-grid", "0,1,2,4,8", "--seed", "4",
            "--replicas", "300",
        ],
    );
    ok(dir.path(), &["plot"]);
    let plots = dir.path().join("plots");
    let names: Vec<String> = fs::read_dir(&plots)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert!(names.iter().any(|n| n.ends_with("-truncation.svg")));
    let data = fs::read_to_string(plots.join(names.iter().find(|n| n.ends_with("-data.csv")).unwrap())).unwrap();
    let pts: Vec<(f64, f64)> = data
        .lines()
        .skip(1)
        .filter(|l| l.contains(",truncation,"))
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[4].parse().unwrap(), f[5].parse().unwrap())
        })
        .collect();
    assert_eq!(pts.len(), 5);
    for w in pts.windows(2) {
        assert!(w[1].0 <= w[0].0 + w[0].1 + w[1].1, "{pts:?}");
    }
}
