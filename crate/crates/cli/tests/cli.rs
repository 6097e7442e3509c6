use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nasirt::irt::simulate_responses;
use nasirt::report::write_response_matrix;

fn nasirt(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nasirt"))
        .args(args)
        .env("NASIRT_OUT_DIR", out)
        .output()
        .unwrap()
}

fn last_line(o: &Output) -> PathBuf {
    let text = String::from_utf8_lossy(&o.stdout);
    PathBuf::from(text.lines().last().unwrap().trim())
}

fn tiny_config(dir: &Path) -> PathBuf {
    let path = dir.join("tiny.toml");
    fs::write(
        &path,
        "folds = [0.5]\nbootstrap_runs = 2\nrank_size = 3\nsingle_cnn_epochs = 1\n\n\
         [synthetic]\nn_classes = 3\ninstances_per_class = 20\nfeature_count = 64\n\
         peaks_per_class = 2\npeak_width = 4.0\nnoise_sigma = 1.0\nseed = 3\n\n[train]\nepochs = 2\n",
    )
    .unwrap();
    path
}

fn is_empty_dir(p: &Path) -> bool {
    !p.exists() || fs::read_dir(p).unwrap().next().is_none()
}

#[test]
fn synth_is_loadable_and_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a.csv");
    let b = tmp.path().join("b.csv");
    for p in [&a, &b] {
        let o = nasirt(
            &[
                "synth",
                "--out",
                p.to_str().unwrap(),
                "--classes",
                "4",
                "--per-class",
                "5",
                "--features",
                "40",
            ],
            tmp.path(),
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let ds = nasirt::data::load_csv(&a).unwrap();
    assert_eq!((ds.len(), ds.feature_count(), ds.n_classes()), (20, 40, 4));

    let bad = tmp.path().join("bad.csv");
    let o = nasirt(
        &["synth", "--out", bad.to_str().unwrap(), "--classes", "1"],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(!bad.exists());
}

#[test]
fn run_writes_reports_and_report_renders_them() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = tiny_config(tmp.path());
    let o = nasirt(&["run", "--config", cfg.to_str().unwrap()], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let dir = last_line(&o);
    assert!(dir.starts_with(&out));
    assert!(dir
        .file_name()
        .unwrap()
        .to_str()
        .unwrap()
        .starts_with("run-"));
    for f in [
        "config.toml",
        "report.json",
        "summary.csv",
        "complexity.csv",
    ] {
        assert!(dir.join(f).is_file(), "{f}");
    }
    let runs: Vec<_> = fs::read_dir(dir.join("runs"))
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    assert_eq!(runs.len(), 2);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["format_version"], 1);
    assert_eq!(report["runs"].as_array().unwrap().len(), 2);

    let summary = fs::read_to_string(dir.join("summary.csv")).unwrap();
    let header = summary.lines().nth(1).unwrap();
    assert_eq!(
        header,
        "fold,irt_difficulty,irt_discrimination,voting_irt_rank,single_cnn,voting_all"
    );
    assert!(summary.lines().any(|l| l.starts_with("50/50,")));
    assert!(summary.lines().any(|l| l.starts_with("Average,")));

    let o = nasirt(&["report", dir.to_str().unwrap(), "--format", "csv"], &out);
    assert!(o.status.success());
    assert_eq!(String::from_utf8(o.stdout).unwrap(), summary);
    let o = nasirt(&["report", dir.to_str().unwrap()], &out);
    let table = String::from_utf8(o.stdout).unwrap();
    assert!(table.contains("IRT difficulty") && table.contains("parameters"));

    let run0 = dir.join("runs").join(&runs[0]);
    let preds = run0.join("predictions.csv");
    let o = nasirt(
        &[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--predictions",
            preds.to_str().unwrap(),
        ],
        &out,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let ext = last_line(&o);
    assert_ne!(ext, dir);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(ext.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["runs"].as_array().unwrap().len(), 1);
    assert!(report["runs"][0]["single_cnn"].is_number());
}

#[test]
fn baseline_keeps_table_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tiny_config(tmp.path());
    let o = nasirt(
        &[
            "baseline",
            "--config",
            cfg.to_str().unwrap(),
            "--scope",
            "vote",
        ],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let dir = last_line(&o);
    let summary = fs::read_to_string(dir.join("summary.csv")).unwrap();
    let rows: Vec<Vec<&str>> = summary
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(
        rows[0],
        [
            "fold",
            "irt_difficulty",
            "irt_discrimination",
            "voting_irt_rank",
            "single_cnn",
            "voting_all"
        ]
    );
    for r in &rows[1..] {
        assert!(r[1].is_empty() && r[2].is_empty() && r[3].is_empty() && r[4].is_empty());
        assert!(r[5].parse::<f64>().is_ok());
    }
}

#[test]
fn irt_fit_recovers_simulated_items() {
    let tmp = tempfile::tempdir().unwrap();
    let sim = simulate_responses(300, 30, (0.5, 2.5), (-2.0, 2.0), (0.0, 0.2), 41).unwrap();
    let matrix = tmp.path().join("m.csv");
    write_response_matrix(&sim.matrix, &matrix).unwrap();
    let o = nasirt(&["irt-fit", matrix.to_str().unwrap()], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let dir = last_line(&o);
    let text = fs::read_to_string(dir.join("items.csv")).unwrap();
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let b: Vec<f64> = rdr
        .records()
        .map(|r| r.unwrap()[2].parse().unwrap())
        .collect();
    let truth: Vec<f64> = sim.params.iter().map(|p| p.b).collect();
    let n = b.len() as f64;
    let (mx, my) = (b.iter().sum::<f64>() / n, truth.iter().sum::<f64>() / n);
    let cov: f64 = b.iter().zip(&truth).map(|(x, y)| (x - mx) * (y - my)).sum();
    let vx: f64 = b.iter().map(|x| (x - mx).powi(2)).sum();
    let vy: f64 = truth.iter().map(|y| (y - my).powi(2)).sum();
    assert!(cov / (vx * vy).sqrt() > 0.9);
    assert!(dir.join("respondents.csv").is_file() && dir.join("fit.json").is_file());
}

#[test]
fn irt_fit_guards_singular_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let matrix = tmp.path().join("m.csv");
    fs::write(
        &matrix,
        "# format_version=1\nrespondent,kind,x,y\nr0,trained,1,0\nr1,trained,1,1\nr2,trained,1,0\n",
    )
    .unwrap();
    let o = nasirt(&["irt-fit", matrix.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains('x'));
    assert!(is_empty_dir(&out));
    let o = nasirt(
        &[
            "irt-fit",
            matrix.to_str().unwrap(),
            "--waive-singularity-guard",
        ],
        &out,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let o = nasirt(
        &["irt-fit", tmp.path().join("missing.csv").to_str().unwrap()],
        &out,
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_leave_no_output() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = tiny_config(tmp.path());
    let c = cfg.to_str().unwrap();
    for args in [
        vec!["run", "--config", c, "--folds", "1.5"],
        vec!["run", "--config", c, "--rank", "0"],
        vec!["run", "--data", "/nonexistent/data.csv"],
        vec!["run", "--config", c, "--preset", "/nonexistent/grid.toml"],
    ] {
        let o = nasirt(&args, &out);
        assert_eq!(
            o.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(is_empty_dir(&out), "{args:?}");
    }
    let bad = tmp.path().join("bad.toml");
    fs::write(&bad, "no_such_key = 1\n").unwrap();
    let o = nasirt(&["run", "--config", bad.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(is_empty_dir(&out));
}
