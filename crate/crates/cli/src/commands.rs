use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context};
use serde::Serialize;

use crate::config::{out_root, sha256_hex, ExperimentArgs, FileConfig};
use crate::{Format, IrtFitArgs, ReportArgs, SynthArgs};
use nasirt::data::{generate_synthetic, write_csv, SyntheticSpec};
use nasirt::irt::{fit_3pl, FitResult};
use nasirt::pipeline::{
    complexity_summary, run_baselines, run_from_predictions, run_nasirt, summarize,
    summarize_baselines, verify_run, BaselineReport, BaselineScope, ComplexitySummary, RunConfig,
    SummaryRow,
};
use nasirt::report::{
    emit_ability_accuracy, emit_item_scatter, read_predictions, read_response_matrix, report_json,
    write_complexity_to, write_fit, write_run_dir, write_summary_to, ReportFile, FORMAT_VERSION,
};

pub enum Failure {
    Usage(anyhow::Error),
    Run(anyhow::Error),
}

type Outcome = std::result::Result<(), Failure>;

trait Classify<T> {
    fn usage(self) -> std::result::Result<T, Failure>;
    fn run(self) -> std::result::Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for std::result::Result<T, E> {
    fn usage(self) -> std::result::Result<T, Failure> {
        self.map_err(|e| Failure::Usage(e.into()))
    }

    fn run(self) -> std::result::Result<T, Failure> {
        self.map_err(|e| Failure::Run(e.into()))
    }
}

fn write(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> nasirt::Result<()>) -> anyhow::Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

pub fn synth(a: &SynthArgs) -> Outcome {
    let spec = SyntheticSpec {
        n_classes: a.classes,
        instances_per_class: a.per_class,
        feature_count: a.features,
        peaks_per_class: a.peaks,
        peak_width: a.width,
        noise_sigma: a.noise,
        seed: a.seed,
    };
    spec.validate().usage()?;
    let ds = generate_synthetic(&spec).run()?;
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)
            .with_context(|| format!("cannot create {}", dir.display()))
            .run()?;
    }
    write_csv(&ds, &a.out).run()?;
    println!("{}", a.out.display());
    Ok(())
}

fn fmt_cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"))
}

/// Accuracy table in the column order IRT difficulty, IRT discrimination,
/// voting over the rank, single CNN, voting over the zoo.
pub fn render_table(rows: &[SummaryRow], complexity: Option<&ComplexitySummary>) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<10}{:>16}{:>20}{:>19}{:>12}{:>14}",
        "fold",
        "IRT difficulty",
        "IRT discrimination",
        "Voting (IRT rank)",
        "Single CNN",
        "Voting (all)"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:<10}{:>16}{:>20}{:>19}{:>12}{:>14}",
            r.label,
            fmt_cell(r.difficulty),
            fmt_cell(r.discrimination),
            fmt_cell(r.vote_rank),
            fmt_cell(r.single_cnn),
            fmt_cell(r.vote_all)
        );
    }
    if let Some(c) = complexity {
        let _ = writeln!(
            s,
            "\nparameters (max over folds): IRT rank ({} of {}) {}, single CNN {}, voting (all) {}",
            c.rank_size, c.zoo_size, c.rank_total, c.single, c.vote_all
        );
    }
    s
}

pub fn run(a: &ExperimentArgs) -> Outcome {
    let exp = a.resolve().usage()?;
    let cfg = &exp.resolved.run;
    let predictions = exp
        .predictions
        .as_ref()
        .map(|p| {
            read_predictions(p).with_context(|| format!("cannot load predictions {}", p.display()))
        })
        .transpose()
        .usage()?;
    let dir = exp.out_root.join(exp.resolved.dir_name("run").usage()?);

    let arts = match predictions {
        Some(set) => {
            vec![run_from_predictions(&exp.dataset, &set.instance_ids, set.vectors, cfg).run()?]
        }
        None => run_nasirt(&exp.dataset, cfg).run()?,
    };
    for art in &arts {
        verify_run(art).run()?;
    }
    let reports: Vec<_> = arts.iter().map(|a| a.report.clone()).collect();
    let summary = summarize(&reports);
    let complexity = complexity_summary(&reports);
    let file = ReportFile::new(
        &exp.dataset_name,
        cfg.clone(),
        reports,
        summary.clone(),
        complexity,
    );

    let write_all = || -> anyhow::Result<()> {
        write(&dir.join("config.toml"), exp.resolved.to_toml()?.as_bytes())?;
        write(&dir.join("report.json"), report_json(&file)?.as_bytes())?;
        write(
            &dir.join("summary.csv"),
            &csv_bytes(|b| write_summary_to(&summary, b))?,
        )?;
        if let Some(c) = &complexity {
            write(
                &dir.join("complexity.csv"),
                &csv_bytes(|b| write_complexity_to(&exp.dataset_name, c, b))?,
            )?;
        }
        for art in &arts {
            write_run_dir(&dir, art)?;
        }
        Ok(())
    };
    write_all().run()?;
    print!("{}", render_table(&summary, complexity.as_ref()));
    println!("{}", dir.display());
    Ok(())
}

#[derive(Serialize)]
struct FitFile<'a> {
    format_version: u32,
    matrix_sha256: &'a str,
    config: &'a nasirt::irt::FitConfig,
    converged: bool,
    iterations: usize,
    loglik: f64,
    loglik_history: &'a [f64],
    objective_history: &'a [f64],
}

pub fn irt_fit(a: &IrtFitArgs) -> Outcome {
    let file = match &a.config {
        Some(p) => FileConfig::load(p).usage()?,
        None => FileConfig::default(),
    };
    let mut cfg = file.fit.clone().unwrap_or_default();
    if a.no_guess_prior {
        cfg.c_prior = None;
    }
    if a.no_discrimination_prior {
        cfg.a_prior = None;
    }
    if a.waive_singularity_guard {
        cfg.waive_singularity_guard = true;
    }
    cfg.validate().usage()?;
    let bytes = fs::read(&a.matrix)
        .with_context(|| format!("cannot read {}", a.matrix.display()))
        .usage()?;
    let rm = read_response_matrix(&a.matrix)
        .with_context(|| format!("invalid response matrix {}", a.matrix.display()))
        .usage()?;
    let sha = sha256_hex(&bytes);
    let cfg_text = toml::to_string(&cfg)
        .context("cannot serialize fit config")
        .run()?;
    let hash = sha256_hex(format!("{sha}\n{cfg_text}").as_bytes());
    let dir = out_root(a.out_dir.clone(), file.out_dir).join(format!("irt-fit-{}", &hash[..16]));

    let fit: FitResult = fit_3pl(&rm, &cfg).run()?;
    let write_all = || -> anyhow::Result<()> {
        write_fit(&rm, &fit, &dir)?;
        let meta = FitFile {
            format_version: FORMAT_VERSION,
            matrix_sha256: &sha,
            config: &cfg,
            converged: fit.converged,
            iterations: fit.iterations,
            loglik: fit.final_loglik(),
            loglik_history: &fit.loglik_history,
            objective_history: &fit.objective_history,
        };
        write(&dir.join("fit.json"), report_json(&meta)?.as_bytes())?;
        for series in [emit_item_scatter(&fit), emit_ability_accuracy(&rm, &fit)] {
            let bytes = csv_bytes(|b| series.write_csv(b))?;
            write(&dir.join(format!("plot_{}.csv", series.kind())), &bytes)?;
        }
        Ok(())
    };
    write_all().run()?;
    println!(
        "{} items, {} respondents, {} iterations, converged: {}",
        rm.n_items(),
        rm.n_respondents(),
        fit.iterations,
        fit.converged
    );
    println!("{}", dir.display());
    Ok(())
}

#[derive(Serialize)]
struct BaselineFile<'a> {
    format_version: u32,
    dataset: &'a str,
    scope: BaselineScope,
    config: &'a RunConfig,
    runs: &'a [BaselineReport],
    summary: &'a [SummaryRow],
}

pub fn baseline(a: &ExperimentArgs, scope: BaselineScope) -> Outcome {
    if a.predictions.is_some() {
        return Err(Failure::Usage(anyhow!(
            "baseline trains its own models; --predictions is not accepted"
        )));
    }
    let exp = a.resolve().usage()?;
    let cfg = &exp.resolved.run;
    let tag = match scope {
        BaselineScope::Single => "baseline-single",
        BaselineScope::Vote => "baseline-vote",
        BaselineScope::Both => "baseline",
    };
    let dir = exp.out_root.join(exp.resolved.dir_name(tag).usage()?);
    let runs = run_baselines(&exp.dataset, cfg, scope).run()?;
    let summary = summarize_baselines(&runs);
    let file = BaselineFile {
        format_version: FORMAT_VERSION,
        dataset: &exp.dataset_name,
        scope,
        config: cfg,
        runs: &runs,
        summary: &summary,
    };
    let write_all = || -> anyhow::Result<()> {
        write(&dir.join("config.toml"), exp.resolved.to_toml()?.as_bytes())?;
        write(&dir.join("baseline.json"), report_json(&file)?.as_bytes())?;
        write(
            &dir.join("summary.csv"),
            &csv_bytes(|b| write_summary_to(&summary, b))?,
        )?;
        Ok(())
    };
    write_all().run()?;
    print!("{}", render_table(&summary, None));
    println!("{}", dir.display());
    Ok(())
}

pub fn report(a: &ReportArgs) -> Outcome {
    let path = if a.path.is_dir() {
        ["report.json", "baseline.json"]
            .iter()
            .map(|f| a.path.join(f))
            .find(|p| p.exists())
            .ok_or_else(|| anyhow!("{} holds no report.json or baseline.json", a.path.display()))
            .usage()?
    } else {
        a.path.clone()
    };
    let text = fs::read_to_string(&path)
        .with_context(|| format!("cannot read {}", path.display()))
        .usage()?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .with_context(|| format!("{} is not JSON", path.display()))
        .usage()?;
    let version = value.get("format_version").and_then(|v| v.as_u64());
    if version != Some(u64::from(FORMAT_VERSION)) {
        return Err(Failure::Usage(anyhow!(
            "{} has format_version {version:?}, expected {FORMAT_VERSION}",
            path.display()
        )));
    }
    let summary: Vec<SummaryRow> = serde_json::from_value(value["summary"].clone())
        .context("report has no summary table")
        .usage()?;
    let complexity: Option<ComplexitySummary> = match value.get("complexity") {
        Some(v) if !v.is_null() => Some(
            serde_json::from_value(v.clone())
                .context("bad complexity table")
                .usage()?,
        ),
        _ => None,
    };
    match a.format {
        Format::Table => print!("{}", render_table(&summary, complexity.as_ref())),
        Format::Csv => {
            let bytes = csv_bytes(|b| write_summary_to(&summary, b)).run()?;
            print!("{}", String::from_utf8_lossy(&bytes));
        }
    }
    Ok(())
}
