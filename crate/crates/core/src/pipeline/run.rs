//! Full experiment: zoo training, calibration, routing and baselines for
//! every fold and bootstrap run.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::respond::{build_response_matrix, inject_artificials};
use super::route::{
    bin_sizes, route_classify, select_rank, separate_bins, ModelRank, Routed, RoutingKind,
};
use super::vote::vote_accuracy;
use crate::data::{bootstrap_runs, FoldSplit, SpectralDataset};
use crate::error::{Error, Result};
use crate::irt::{fit_3pl, FitConfig, FitResult, RespondentKind, ResponseMatrix};
use crate::seed::derive_seed;
use crate::zoo::{
    expand_grid, train, train_zoo, GridDomains, NetworkModel, PredictionVector, TrainConfig,
    ZooManifest,
};

pub const REPORT_FORMAT_VERSION: u32 = 1;
/// Respondent id that marks the single-CNN baseline in external predictions.
pub const SINGLE_CNN_ID: &str = "single_cnn";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub folds: Vec<f64>,
    pub bootstrap_runs: usize,
    pub rank_size: usize,
    pub routing: Vec<RoutingKind>,
    pub grid: GridDomains,
    pub train: TrainConfig,
    /// Epoch budget for the single-CNN baseline; the zoo budget when unset.
    pub single_cnn_epochs: Option<usize>,
    pub fit: FitConfig,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            folds: vec![0.9, 0.75, 0.5],
            bootstrap_runs: 3,
            rank_size: 5,
            routing: RoutingKind::ALL.to_vec(),
            grid: GridDomains::reduced(),
            train: TrainConfig::default(),
            single_cnn_epochs: None,
            fit: FitConfig::default(),
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.folds.is_empty() || self.folds.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
            return Err(Error::Pipeline(
                "fold ratios must lie strictly between 0 and 1".into(),
            ));
        }
        if self.bootstrap_runs == 0 {
            return Err(Error::Pipeline("bootstrap_runs must be at least 1".into()));
        }
        if self.rank_size == 0 {
            return Err(Error::Pipeline("rank size must be at least 1".into()));
        }
        if self.routing.is_empty() {
            return Err(Error::Pipeline(
                "at least one routing kind is required".into(),
            ));
        }
        let m = self.grid.cardinality();
        if self.rank_size > m {
            return Err(Error::Pipeline(format!(
                "rank size {} exceeds the {m} grid models",
                self.rank_size
            )));
        }
        if self.single_cnn_epochs == Some(0) {
            return Err(Error::Pipeline(
                "single_cnn_epochs must be at least 1".into(),
            ));
        }
        self.train.validate()?;
        self.fit.validate()
    }

    fn single_cnn_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: self.single_cnn_epochs.unwrap_or(self.train.epochs),
            seed,
            ..self.train.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamTotals {
    pub rank: usize,
    pub single: usize,
    pub vote_all: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrtSummary {
    pub converged: bool,
    pub iterations: usize,
    pub loglik: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// Training share of the split; absent for external predictions.
    pub fold_ratio: Option<f64>,
    pub run: usize,
    pub seed: u64,
    pub n_test: usize,
    pub zoo_size: usize,
    pub rank_size: usize,
    pub rank: ModelRank,
    pub routes: Vec<Routed>,
    pub vote_rank: f64,
    pub vote_all: f64,
    pub single_cnn: Option<f64>,
    /// Test accuracy of the strongest trained model.
    pub best_trained: f64,
    pub params: Option<ParamTotals>,
    pub irt: IrtSummary,
}

impl RunReport {
    pub fn route(&self, kind: RoutingKind) -> Option<&Routed> {
        self.routes.iter().find(|r| r.kind == kind)
    }
}

/// A report together with everything it was computed from.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub report: RunReport,
    pub matrix: ResponseMatrix,
    pub fit: FitResult,
    /// One class vector per matrix row.
    pub predicted: Vec<Vec<usize>>,
    /// Zoo predictions followed by the artificial respondents.
    pub predictions: Vec<PredictionVector>,
    pub single: Option<PredictionVector>,
    pub truth: Vec<usize>,
    pub n_classes: usize,
    pub instance_ids: Vec<String>,
    /// Trained zoo, absent for external predictions.
    pub manifest: Option<ZooManifest>,
}

impl RunArtifacts {
    /// Raw accuracy of every respondent.
    pub fn accuracies(&self) -> Vec<f64> {
        self.matrix.row_accuracy()
    }
}

/// Inputs to Steps 2 to 9 for one test set.
pub struct Calibration<'a> {
    pub predictions: Vec<PredictionVector>,
    pub truth: Vec<usize>,
    pub instance_ids: Vec<String>,
    pub n_classes: usize,
    pub single: Option<PredictionVector>,
    /// Parameter counts of the zoo members, then the single CNN.
    pub param_counts: Option<(Vec<usize>, usize)>,
    pub fold_ratio: Option<f64>,
    pub run: usize,
    pub seed: u64,
    pub cfg: &'a RunConfig,
}

/// Steps 2 to 9 plus the voting baselines on one set of zoo predictions.
pub fn calibrate_and_route(c: Calibration<'_>) -> Result<RunArtifacts> {
    let cfg = c.cfg;
    let m = c.predictions.len();
    if cfg.rank_size > m {
        return Err(Error::Pipeline(format!(
            "rank size {} exceeds the {m} models",
            cfg.rank_size
        )));
    }
    let rm = build_response_matrix(&c.predictions, &c.truth, &c.instance_ids)?;
    let single_cnn = match &c.single {
        Some(p) if p.len() == c.truth.len() => Some(crate::zoo::accuracy(&p.predicted, &c.truth)),
        Some(p) => {
            return Err(Error::MissingPrediction {
                model: p.model_id.clone(),
                instance: c.instance_ids[p.len().min(c.truth.len().saturating_sub(1))].clone(),
            })
        }
        None => None,
    };
    let (full, arts) =
        inject_artificials(&rm, &c.truth, c.n_classes, derive_seed(c.seed, &[0xa7]))?;
    let fit = fit_3pl(&full, &cfg.fit)?;
    let rank = select_rank(&full, &fit, cfg.rank_size)?;
    let predicted: Vec<Vec<usize>> = c
        .predictions
        .iter()
        .chain(&arts)
        .map(|p| p.predicted.clone())
        .collect();
    let routes = cfg
        .routing
        .iter()
        .map(|&kind| {
            let bins = separate_bins(&fit.items, kind, cfg.rank_size)?;
            route_classify(&rank, &bins, &predicted, &c.truth)
        })
        .collect::<Result<Vec<_>>>()?;
    let rank_voters: Vec<&[usize]> = rank
        .entries
        .iter()
        .map(|e| predicted[e.respondent].as_slice())
        .collect();
    let all_voters: Vec<&[usize]> = predicted[..m].iter().map(|p| p.as_slice()).collect();
    let vote_rank = vote_accuracy(&rank_voters, &c.truth, c.n_classes)?;
    let vote_all = vote_accuracy(&all_voters, &c.truth, c.n_classes)?;
    let acc = full.row_accuracy();
    let best_trained = acc[..m].iter().copied().fold(0.0, f64::max);
    let params = c.param_counts.map(|(zoo, single)| ParamTotals {
        rank: rank.entries.iter().map(|e| zoo[e.respondent]).sum(),
        single,
        vote_all: zoo.iter().sum(),
    });
    let report = RunReport {
        fold_ratio: c.fold_ratio,
        run: c.run,
        seed: c.seed,
        n_test: c.truth.len(),
        zoo_size: m,
        rank_size: cfg.rank_size,
        rank,
        routes,
        vote_rank,
        vote_all,
        single_cnn,
        best_trained,
        params,
        irt: IrtSummary {
            converged: fit.converged,
            iterations: fit.iterations,
            loglik: fit.final_loglik(),
        },
    };
    let mut predictions = c.predictions;
    predictions.extend(arts);
    Ok(RunArtifacts {
        report,
        matrix: full,
        fit,
        predicted,
        predictions,
        single: c.single,
        truth: c.truth,
        n_classes: c.n_classes,
        instance_ids: c.instance_ids,
        manifest: None,
    })
}

/// Trains the zoo and the single CNN on one split and evaluates everything on
/// its test part.
pub fn run_split(
    ds: &SpectralDataset,
    split: &FoldSplit,
    run: usize,
    cfg: &RunConfig,
) -> Result<RunArtifacts> {
    let grid = expand_grid(&cfg.grid)?;
    let train_set = ds.subset(&split.train_indices);
    let test_set = ds.subset(&split.test_indices);
    let (xtr, ytr) = (train_set.spectra().view(), train_set.labels());
    let xte = test_set.spectra().view();
    let k = ds.n_classes();

    let zoo_cfg = TrainConfig {
        seed: derive_seed(split.seed, &[0x200]),
        ..cfg.train.clone()
    };
    let zoo = train_zoo(&grid, xtr, ytr, k, &zoo_cfg)?;
    let predictions = zoo
        .iter()
        .map(|m| PredictionVector::from_model(m.id(), &m.model, xte))
        .collect::<Result<Vec<_>>>()?;

    let mut single =
        NetworkModel::benchmark_cnn(ds.feature_count(), k, derive_seed(split.seed, &[0x5193]))?;
    train(
        &mut single,
        xtr,
        ytr,
        &cfg.single_cnn_config(derive_seed(split.seed, &[0x5194])),
    )?;
    let single_pred = PredictionVector::from_model(SINGLE_CNN_ID, &single, xte)?;

    let mut art = calibrate_and_route(Calibration {
        predictions,
        truth: test_set.labels().to_vec(),
        instance_ids: test_set.instance_ids().to_vec(),
        n_classes: k,
        single: Some(single_pred),
        param_counts: Some((
            zoo.iter().map(|m| m.model.param_count()).collect(),
            single.param_count(),
        )),
        fold_ratio: Some(split.train_ratio),
        run,
        seed: split.seed,
        cfg,
    })?;
    art.manifest = Some(ZooManifest::from_members(&zoo));
    Ok(art)
}

pub fn fold_seed(seed: u64, fold: usize) -> u64 {
    derive_seed(seed, &[0xf01d, fold as u64])
}

/// Every fold and bootstrap run, in (fold, run) order.
pub fn run_nasirt(ds: &SpectralDataset, cfg: &RunConfig) -> Result<Vec<RunArtifacts>> {
    cfg.validate()?;
    let mut jobs = Vec::new();
    for (f, &ratio) in cfg.folds.iter().enumerate() {
        for (r, split) in bootstrap_runs(ds, ratio, cfg.bootstrap_runs, fold_seed(cfg.seed, f))?
            .into_iter()
            .enumerate()
        {
            if split.n_test() < cfg.rank_size {
                return Err(Error::Pipeline(format!(
                    "fold {ratio} leaves {} test instances for {} bins",
                    split.n_test(),
                    cfg.rank_size
                )));
            }
            jobs.push((r, split));
        }
    }
    jobs.par_iter()
        .map(|(r, split)| run_split(ds, split, *r, cfg))
        .collect()
}

/// Steps 2 to 9 on predictions made elsewhere. A vector with id
/// [`SINGLE_CNN_ID`] is taken as the single-CNN baseline.
pub fn run_from_predictions(
    ds: &SpectralDataset,
    instance_ids: &[String],
    predictions: Vec<PredictionVector>,
    cfg: &RunConfig,
) -> Result<RunArtifacts> {
    let truth = instance_ids
        .iter()
        .map(|id| {
            ds.index_of(id)
                .map(|i| ds.labels()[i])
                .ok_or_else(|| Error::Pipeline(format!("instance {id} is not in the dataset")))
        })
        .collect::<Result<Vec<_>>>()?;
    let (single, zoo): (Vec<_>, Vec<_>) = predictions
        .into_iter()
        .partition(|p| p.model_id == SINGLE_CNN_ID);
    calibrate_and_route(Calibration {
        predictions: zoo,
        truth,
        instance_ids: instance_ids.to_vec(),
        n_classes: ds.n_classes(),
        single: single.into_iter().next(),
        param_counts: None,
        fold_ratio: None,
        run: 0,
        seed: cfg.seed,
        cfg,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineScope {
    Single,
    Vote,
    Both,
}

impl BaselineScope {
    fn single(self) -> bool {
        self != BaselineScope::Vote
    }

    fn vote(self) -> bool {
        self != BaselineScope::Single
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub fold_ratio: f64,
    pub run: usize,
    pub seed: u64,
    pub single_cnn: Option<f64>,
    pub vote_all: Option<f64>,
    pub single_params: Option<usize>,
    pub vote_all_params: Option<usize>,
}

/// The single CNN and/or the vote over the whole zoo on the same splits and
/// seeds as [`run_nasirt`], without calibration or routing.
pub fn run_baselines(
    ds: &SpectralDataset,
    cfg: &RunConfig,
    scope: BaselineScope,
) -> Result<Vec<BaselineReport>> {
    cfg.validate()?;
    let mut jobs = Vec::new();
    for (f, &ratio) in cfg.folds.iter().enumerate() {
        for (r, split) in bootstrap_runs(ds, ratio, cfg.bootstrap_runs, fold_seed(cfg.seed, f))?
            .into_iter()
            .enumerate()
        {
            jobs.push((r, split));
        }
    }
    let k = ds.n_classes();
    jobs.par_iter()
        .map(|(r, split)| {
            let train_set = ds.subset(&split.train_indices);
            let test_set = ds.subset(&split.test_indices);
            let (xtr, ytr) = (train_set.spectra().view(), train_set.labels());
            let (xte, yte) = (test_set.spectra().view(), test_set.labels());
            let mut out = BaselineReport {
                fold_ratio: split.train_ratio,
                run: *r,
                seed: split.seed,
                single_cnn: None,
                vote_all: None,
                single_params: None,
                vote_all_params: None,
            };
            if scope.single() {
                let mut single = NetworkModel::benchmark_cnn(
                    ds.feature_count(),
                    k,
                    derive_seed(split.seed, &[0x5193]),
                )?;
                train(
                    &mut single,
                    xtr,
                    ytr,
                    &cfg.single_cnn_config(derive_seed(split.seed, &[0x5194])),
                )?;
                out.single_cnn = Some(single.accuracy(xte, yte)?);
                out.single_params = Some(single.param_count());
            }
            if scope.vote() {
                let zoo_cfg = TrainConfig {
                    seed: derive_seed(split.seed, &[0x200]),
                    ..cfg.train.clone()
                };
                let zoo = train_zoo(&expand_grid(&cfg.grid)?, xtr, ytr, k, &zoo_cfg)?;
                let preds = zoo
                    .iter()
                    .map(|m| m.model.predict(xte))
                    .collect::<Result<Vec<_>>>()?;
                let voters: Vec<&[usize]> = preds.iter().map(|p| p.as_slice()).collect();
                out.vote_all = Some(vote_accuracy(&voters, yte, k)?);
                out.vote_all_params = Some(zoo.iter().map(|m| m.model.param_count()).sum());
            }
            Ok(out)
        })
        .collect()
}

/// Baseline rows in accuracy-table form, with an "Average" row.
pub fn summarize_baselines(reports: &[BaselineReport]) -> Vec<SummaryRow> {
    let mut labels: Vec<String> = Vec::new();
    for r in reports {
        let l = fold_label(Some(r.fold_ratio));
        if !labels.contains(&l) {
            labels.push(l);
        }
    }
    let mut rows: Vec<SummaryRow> = labels
        .into_iter()
        .map(|label| {
            let runs: Vec<&BaselineReport> = reports
                .iter()
                .filter(|r| fold_label(Some(r.fold_ratio)) == label)
                .collect();
            SummaryRow {
                difficulty: None,
                discrimination: None,
                vote_rank: None,
                single_cnn: mean_opt(&runs, |r| r.single_cnn),
                vote_all: mean_opt(&runs, |r| r.vote_all),
                label,
            }
        })
        .collect();
    if !rows.is_empty() {
        let average = SummaryRow {
            label: "Average".to_string(),
            difficulty: None,
            discrimination: None,
            vote_rank: None,
            single_cnn: mean_opt(&rows, |r| r.single_cnn),
            vote_all: mean_opt(&rows, |r| r.vote_all),
        };
        rows.push(average);
    }
    rows
}

/// One row of the accuracy table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub label: String,
    pub difficulty: Option<f64>,
    pub discrimination: Option<f64>,
    pub vote_rank: Option<f64>,
    pub single_cnn: Option<f64>,
    pub vote_all: Option<f64>,
}

pub fn fold_label(ratio: Option<f64>) -> String {
    match ratio {
        Some(r) => {
            let train = (r * 100.0).round() as i64;
            format!("{}/{}", train, 100 - train)
        }
        None => "external".to_string(),
    }
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

fn mean_opt<'a, T: 'a>(rows: &'a [T], f: impl Fn(&T) -> Option<f64>) -> Option<f64> {
    let vals: Option<Vec<f64>> = rows.iter().map(f).collect();
    vals.filter(|v| !v.is_empty()).map(|v| mean(v.into_iter()))
}

/// Per-fold means over bootstrap runs followed by an "Average" row holding
/// the mean of the fold rows.
pub fn summarize(reports: &[RunReport]) -> Vec<SummaryRow> {
    let mut labels: Vec<String> = Vec::new();
    for r in reports {
        let l = fold_label(r.fold_ratio);
        if !labels.contains(&l) {
            labels.push(l);
        }
    }
    let mut rows: Vec<SummaryRow> = labels
        .into_iter()
        .map(|label| {
            let runs: Vec<&RunReport> = reports
                .iter()
                .filter(|r| fold_label(r.fold_ratio) == label)
                .collect();
            let routed = |kind| mean_opt(&runs, |r| r.route(kind).map(|x| x.consolidated));
            SummaryRow {
                difficulty: routed(RoutingKind::Difficulty),
                discrimination: routed(RoutingKind::Discrimination),
                vote_rank: Some(mean(runs.iter().map(|r| r.vote_rank))),
                single_cnn: mean_opt(&runs, |r| r.single_cnn),
                vote_all: Some(mean(runs.iter().map(|r| r.vote_all))),
                label,
            }
        })
        .collect();
    if !rows.is_empty() {
        let average = SummaryRow {
            label: "Average".to_string(),
            difficulty: mean_opt(&rows, |r| r.difficulty),
            discrimination: mean_opt(&rows, |r| r.discrimination),
            vote_rank: mean_opt(&rows, |r| r.vote_rank),
            single_cnn: mean_opt(&rows, |r| r.single_cnn),
            vote_all: mean_opt(&rows, |r| r.vote_all),
        };
        rows.push(average);
    }
    rows
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexitySummary {
    pub zoo_size: usize,
    pub rank_size: usize,
    /// Largest totals seen over all folds and runs.
    pub rank_total: usize,
    pub single: usize,
    pub vote_all: usize,
}

pub fn complexity_summary(reports: &[RunReport]) -> Option<ComplexitySummary> {
    let with: Vec<(&RunReport, ParamTotals)> = reports
        .iter()
        .filter_map(|r| r.params.map(|p| (r, p)))
        .collect();
    let first = with.first()?;
    Some(ComplexitySummary {
        zoo_size: first.0.zoo_size,
        rank_size: first.0.rank_size,
        rank_total: with.iter().map(|(_, p)| p.rank).max()?,
        single: with.iter().map(|(_, p)| p.single).max()?,
        vote_all: with.iter().map(|(_, p)| p.vote_all).max()?,
    })
}

/// Checks the structural identities every run must satisfy.
pub fn verify_run(art: &RunArtifacts) -> Result<()> {
    let fail = |m: String| Err(Error::Pipeline(m));
    let rep = &art.report;
    let n = art.truth.len();
    let scores: Vec<f64> = rep.rank.entries.iter().map(|e| e.true_score).collect();
    if scores.windows(2).any(|w| w[0] > w[1]) {
        return fail("rank is not in ascending true-score order".into());
    }
    let ts = &art.fit.true_scores;
    for (i, r) in art.matrix.respondents().iter().enumerate() {
        let bad = match r.kind {
            RespondentKind::Optimistic => ts.iter().any(|&s| s > ts[i]),
            RespondentKind::Pessimistic => ts.iter().any(|&s| s < ts[i]),
            _ => false,
        };
        if bad {
            return fail(format!(
                "{} respondent is not at the extreme true score",
                r.kind
            ));
        }
    }
    for routed in &rep.routes {
        let sizes: Vec<usize> = routed.bins.iter().map(|b| b.size).collect();
        if sizes != bin_sizes(n, rep.rank_size) {
            return fail(format!("{} bins have sizes {sizes:?}", routed.kind));
        }
        if routed
            .bins
            .windows(2)
            .any(|w| w[0].hi > w[1].lo || w[0].lo > w[0].hi)
        {
            return fail(format!("{} bin ranges are not ascending", routed.kind));
        }
        let recount = routed
            .stitched
            .iter()
            .zip(&art.truth)
            .filter(|(p, t)| p == t)
            .count();
        if routed.stitched.len() != n || recount as f64 / n as f64 != routed.consolidated {
            return fail(format!(
                "{} consolidated accuracy disagrees with recount",
                routed.kind
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fold_labels() {
        assert_eq!(fold_label(Some(0.9)), "90/10");
        assert_eq!(fold_label(Some(0.75)), "75/25");
        assert_eq!(fold_label(Some(0.5)), "50/50");
    }

    fn report(ratio: f64, d: f64, single: f64, rank: usize) -> RunReport {
        RunReport {
            fold_ratio: Some(ratio),
            run: 0,
            seed: 0,
            n_test: 10,
            zoo_size: 8,
            rank_size: 5,
            rank: ModelRank { entries: vec![] },
            routes: vec![Routed {
                kind: RoutingKind::Difficulty,
                bins: vec![],
                stitched: vec![],
                consolidated: d,
            }],
            vote_rank: 0.5,
            vote_all: 0.25,
            single_cnn: Some(single),
            best_trained: 0.0,
            params: Some(ParamTotals {
                rank,
                single: 7,
                vote_all: 100,
            }),
            irt: IrtSummary {
                converged: true,
                iterations: 1,
                loglik: 0.0,
            },
        }
    }

    #[test]
    fn average_row_is_mean_of_fold_rows() {
        let reports = vec![
            report(0.9, 1.0, 0.5, 10),
            report(0.9, 0.5, 0.5, 30),
            report(0.5, 0.25, 1.0, 20),
        ];
        let rows = summarize(&reports);
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].difficulty, Some(0.75));
        assert_eq!(rows[1].difficulty, Some(0.25));
        assert_eq!(rows[2].label, "Average");
        assert_eq!(rows[2].difficulty, Some(0.5));
        assert_eq!(rows[2].single_cnn, Some(0.75));
        assert_eq!(rows[2].discrimination, None);
        let c = complexity_summary(&reports).unwrap();
        assert_eq!(c.rank_total, 30);
        assert_eq!(c.vote_all, 100);
    }

    #[test]
    fn config_checks() {
        assert!(RunConfig::default().validate().is_ok());
        let cfg = RunConfig {
            rank_size: 9,
            ..RunConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = RunConfig {
            folds: vec![1.0],
            ..RunConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
