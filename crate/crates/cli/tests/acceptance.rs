//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nasirt::data::{generate_synthetic, SyntheticSpec};
use nasirt::irt::{
    fit_3pl, simulate_responses, FitConfig, Respondent, RespondentKind, ResponseMatrix,
};
use nasirt::pipeline::{
    complexity_summary, run_nasirt, summarize, verify_run, RoutingKind, RunArtifacts, RunConfig,
};
use nasirt::zoo::{
    expand_grid, gradient_check, Activation, GridDomains, HyperParams, NetworkModel, TrainConfig,
};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn irt_recovery() -> Outcome {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let sim = simulate_responses(400, 60, (0.5, 2.5), (-2.0, 2.0), (0.0, 0.25), 2024).unwrap();
    let start = Instant::now();
    let fit = pool
        .install(|| fit_3pl(&sim.matrix, &FitConfig::default()))
        .unwrap();
    let secs = start.elapsed().as_secs_f64();
    let true_b: Vec<f64> = sim.params.iter().map(|p| p.b).collect();
    let true_a: Vec<f64> = sim.params.iter().map(|p| p.a).collect();
    let fit_b: Vec<f64> = fit.items.params.iter().map(|p| p.b).collect();
    let fit_a: Vec<f64> = fit.items.params.iter().map(|p| p.a).collect();
    let rb = pearson(&true_b, &fit_b);
    let ra = pearson(&true_a, &fit_a);
    let detail = format!("r(b)={rb:.4} r(a)={ra:.4} {secs:.2}s single-threaded");
    ensure(rb >= 0.90 && ra >= 0.75 && secs < 60.0, || detail.clone())?;
    Ok(detail)
}

fn em_ascent() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let cfg = FitConfig {
        c_prior: None,
        a_prior: None,
        waive_singularity_guard: true,
        ..FitConfig::default()
    };
    let mut worst = 0.0f64;
    for m in 0..20 {
        let rows = rng.gen_range(5..60);
        let cols = rng.gen_range(3..40);
        let density = rng.gen_range(0.2..0.8);
        let correct = Array2::from_shape_fn((rows, cols), |_| u8::from(rng.gen::<f64>() < density));
        let rm = ResponseMatrix::new(
            (0..rows)
                .map(|r| Respondent::new(format!("r{r}"), RespondentKind::Trained))
                .collect(),
            (0..cols).map(|j| format!("i{j}")).collect(),
            correct,
        )
        .unwrap();
        let fit = fit_3pl(&rm, &cfg).unwrap();
        for w in fit.loglik_history.windows(2) {
            worst = worst.max(w[0] - w[1]);
        }
        ensure(worst <= 1e-8, || {
            format!("matrix {m}: log-likelihood fell by {worst:e}")
        })?;
    }
    Ok(format!("20 matrices, largest drop {worst:e}"))
}

fn bracketing(arts: &[RunArtifacts]) -> Outcome {
    let mut randoms = 0;
    for (i, art) in arts.iter().enumerate() {
        let rm = &art.matrix;
        let scores = &art.fit.true_scores;
        let kind_of = |r: usize| rm.respondents()[r].kind;
        let max_row = (0..scores.len())
            .max_by(|&a, &b| scores[a].total_cmp(&scores[b]))
            .unwrap();
        let min_row = (0..scores.len())
            .min_by(|&a, &b| scores[a].total_cmp(&scores[b]))
            .unwrap();
        let opt = (0..scores.len())
            .find(|&r| kind_of(r) == RespondentKind::Optimistic)
            .unwrap();
        let pes = (0..scores.len())
            .find(|&r| kind_of(r) == RespondentKind::Pessimistic)
            .unwrap();
        ensure(
            scores[opt] >= scores[max_row] && scores[pes] <= scores[min_row],
            || format!("run {i}: optimistic or pessimistic respondent not at the extreme"),
        )?;
        let k = art.n_classes as f64;
        let n = art.truth.len() as f64;
        let sigma = ((1.0 / k) * (1.0 - 1.0 / k) / n).sqrt();
        for (r, pv) in art.predictions.iter().enumerate() {
            if kind_of(r) != RespondentKind::Random {
                continue;
            }
            let hits = pv
                .predicted
                .iter()
                .zip(&art.truth)
                .filter(|(p, t)| p == t)
                .count();
            let acc = hits as f64 / n;
            randoms += 1;
            ensure((acc - 1.0 / k).abs() <= 3.0 * sigma, || {
                format!(
                    "run {i}: random respondent accuracy {acc:.3} vs 1/K={:.3} (3 sigma {:.3})",
                    1.0 / k,
                    3.0 * sigma
                )
            })?;
        }
    }
    Ok(format!(
        "{} fits, {randoms} random respondents within 3 sigma",
        arts.len()
    ))
}

fn grid_cardinality() -> Outcome {
    let n = expand_grid(&GridDomains::full())
        .map_err(|e| e.to_string())?
        .len();
    ensure(n == 384, || format!("{n} combinations"))?;
    Ok("384 combinations".into())
}

fn gradients() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    let mut count = 0;
    for t in 0..24 {
        let activation = if t % 2 == 0 {
            Activation::LeakyRelu
        } else {
            Activation::Tanh
        };
        let maxpool_size = if (t / 2) % 2 == 0 { 0 } else { 2 };
        let hp = HyperParams {
            conv_layers: rng.gen_range(1..=2),
            conv_filters: rng.gen_range(1..=4),
            kernel_size: rng.gen_range(2..=4),
            dense_layers: rng.gen_range(0..=2),
            dense_size: rng.gen_range(2..=6),
            dropout_rate: 0.0,
            maxpool_size,
            activation,
        };
        let width = rng.gen_range(16..=28);
        let classes = rng.gen_range(2..=4);
        let model = NetworkModel::build(&hp, width, classes, rng.gen())
            .map_err(|e| format!("{hp}: {e}"))?;
        let phase: f64 = rng.gen_range(0.0..3.0);
        let x = Array2::from_shape_fn((1, width), |(_, j)| {
            (j as f64 * 0.61 + phase).sin() + 0.3 * (j as f64 * 1.7).cos()
        });
        let label = rng.gen_range(0..classes);
        let check = gradient_check(&model, x.row(0), label, 1e-5).map_err(|e| e.to_string())?;
        worst = worst.max(check.max_relative_error);
        ensure(check.max_relative_error < 1e-4, || {
            format!("{hp}: relative error {:e}", check.max_relative_error)
        })?;
        count += 1;
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 120.0, || format!("{secs:.1}s"))?;
    Ok(format!(
        "{count} architectures, max relative error {worst:e}, {secs:.1}s"
    ))
}

fn identities(arts: &[RunArtifacts]) -> Outcome {
    for (i, art) in arts.iter().enumerate() {
        verify_run(art).map_err(|e| format!("run {i}: {e}"))?;
        let rank = &art.report.rank.entries;
        ensure(
            rank.windows(2).all(|w| w[0].true_score <= w[1].true_score),
            || format!("run {i}: rank not ascending"),
        )?;
        let n_items = art.truth.len();
        for kind in RoutingKind::ALL {
            let route = art.report.route(kind).unwrap();
            let values = kind.values(&art.fit.items);
            let mut order: Vec<usize> = (0..n_items).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
            let n = rank.len();
            let mut start = 0;
            let mut hits = 0usize;
            let mut prev_hi = f64::NEG_INFINITY;
            for (k, rec) in route.bins.iter().enumerate() {
                let size = n_items / n + usize::from(k < n_items % n);
                let chunk = &order[start..start + size];
                start += size;
                ensure(rec.size == size, || {
                    format!("run {i} {kind}: bin {k} has {} not {size}", rec.size)
                })?;
                let row = &art.predicted[rank[k].respondent];
                let correct = chunk.iter().filter(|&&j| row[j] == art.truth[j]).count();
                ensure(rec.correct == correct, || {
                    format!("run {i} {kind}: bin {k} recount differs")
                })?;
                ensure(rec.lo >= prev_hi && rec.lo <= rec.hi, || {
                    format!("run {i} {kind}: bin ranges not ascending")
                })?;
                prev_hi = rec.hi;
                hits += correct;
            }
            ensure(start == n_items, || {
                format!("run {i} {kind}: bins do not cover the test set")
            })?;
            let recount = hits as f64 / n_items as f64;
            ensure(route.consolidated == recount, || {
                format!(
                    "run {i} {kind}: consolidated {} vs recount {recount}",
                    route.consolidated
                )
            })?;
        }
    }
    Ok(format!("{} runs, both routings", arts.len()))
}

fn end_to_end(arts: &[RunArtifacts], secs: f64) -> Outcome {
    let n = arts.len() as f64;
    let mean = |f: &dyn Fn(&RunArtifacts) -> f64| arts.iter().map(f).sum::<f64>() / n;
    let routed = mean(&|a| {
        a.report
            .route(RoutingKind::Difficulty)
            .unwrap()
            .consolidated
    });
    let vote_all = mean(&|a| a.report.vote_all);
    let best = mean(&|a| a.report.best_trained);
    let detail = format!(
        "{} runs, difficulty-routed {routed:.4}, vote-all {vote_all:.4}, best trained {best:.4}, {secs:.0}s",
        arts.len()
    );
    ensure(
        arts.len() == 9 && routed >= vote_all - 0.02 && routed >= best - 0.05 && secs < 600.0,
        || detail.clone(),
    )?;
    Ok(detail)
}

fn hard_bin(arts: &[RunArtifacts]) -> Outcome {
    let gaps: Vec<f64> = arts
        .iter()
        .map(|a| {
            let bins = &a.report.route(RoutingKind::Difficulty).unwrap().bins;
            bins[0].accuracy - bins[bins.len() - 1].accuracy
        })
        .collect();
    let m = median(gaps);
    ensure(m >= 0.0, || format!("median gap {m:.4}"))?;
    Ok(format!("median easiest-minus-hardest gap {m:.4}"))
}

fn complexity(arts: &[RunArtifacts]) -> Outcome {
    let mut max_rank = 0;
    let mut max_all = 0;
    let mut max_single = 0;
    for (i, art) in arts.iter().enumerate() {
        let manifest = art.manifest.as_ref().ok_or("no zoo manifest")?;
        let count = |id: &str| {
            manifest
                .models
                .iter()
                .find(|m| m.model_id == id)
                .map(|m| m.param_count)
                .unwrap()
        };
        let rank_total: usize = art
            .report
            .rank
            .entries
            .iter()
            .map(|e| count(&e.model_id))
            .sum();
        let all_total: usize = manifest.models.iter().map(|m| m.param_count).sum();
        let p = art.report.params.as_ref().ok_or("no parameter totals")?;
        ensure(p.rank == rank_total && p.vote_all == all_total, || {
            format!("run {i}: totals differ from recount")
        })?;
        if art.report.rank_size < art.report.zoo_size {
            ensure(rank_total < all_total, || {
                format!("run {i}: rank {rank_total} >= all {all_total}")
            })?;
        }
        max_rank = max_rank.max(rank_total);
        max_all = max_all.max(all_total);
        max_single = max_single.max(p.single);
    }
    let reports: Vec<_> = arts.iter().map(|a| a.report.clone()).collect();
    let c = complexity_summary(&reports).ok_or("no complexity summary")?;
    ensure(
        c.rank_total == max_rank && c.vote_all == max_all && c.single == max_single,
        || "complexity summary is not the max over folds".into(),
    )?;
    let labels: Vec<String> = summarize(&reports).into_iter().map(|r| r.label).collect();
    ensure(labels == ["90/10", "75/25", "50/50", "Average"], || {
        format!("summary rows {labels:?}")
    })?;
    Ok(format!(
        "rank {max_rank} < all {max_all} params, single {max_single}"
    ))
}

fn files_under(root: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push(path.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = tmp.path().join("small.toml");
    std::fs::write(
        &config,
        "folds = [0.5]\nbootstrap_runs = 2\nrank_size = 3\nsingle_cnn_epochs = 1\n\n\
         [synthetic]\nn_classes = 3\ninstances_per_class = 20\nfeature_count = 64\npeaks_per_class = 2\n\
         peak_width = 4.0\nnoise_sigma = 1.0\nseed = 3\n\n[train]\nepochs = 2\n",
    )
    .map_err(|e| e.to_string())?;
    let mut trees = Vec::new();
    for name in ["a", "b"] {
        let out = tmp.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_nasirt"))
            .args(["run", "--config"])
            .arg(&config)
            .arg("--out-dir")
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(status.status.success(), || {
            String::from_utf8_lossy(&status.stderr).into_owned()
        })?;
        trees.push(out);
    }
    let files = files_under(&trees[0]);
    ensure(files == files_under(&trees[1]), || {
        "output trees differ in file names".into()
    })?;
    ensure(files.iter().any(|f| f.ends_with("report.json")), || {
        "no report.json written".into()
    })?;
    for f in &files {
        let a = std::fs::read(trees[0].join(f)).unwrap();
        let b = std::fs::read(trees[1].join(f)).unwrap();
        ensure(a == b, || format!("{} differs", f.display()))?;
    }
    Ok(format!("{} files byte-identical", files.len()))
}

fn report(id: usize, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        Err(msg)
    });
    match outcome {
        Ok(detail) => {
            println!("PASS {id:>2} {name}: {detail}");
            true
        }
        Err(detail) => {
            println!("FAIL {id:>2} {name}: {detail}");
            false
        }
    }
}

fn main() -> ExitCode {
    let mut ok = true;
    ok &= report(1, "irt recovery", irt_recovery);
    ok &= report(2, "em ascent", em_ascent);

    let start = Instant::now();
    let arts = catch_unwind(|| {
        let ds = generate_synthetic(&SyntheticSpec::default()).unwrap();
        let cfg = RunConfig {
            train: TrainConfig {
                epochs: 3,
                ..TrainConfig::default()
            },
            single_cnn_epochs: Some(2),
            ..RunConfig::default()
        };
        run_nasirt(&ds, &cfg).unwrap()
    });
    let secs = start.elapsed().as_secs_f64();
    match arts {
        Ok(arts) => {
            ok &= report(3, "artificial bracketing", || bracketing(&arts));
            ok &= report(4, "grid cardinality", grid_cardinality);
            ok &= report(5, "gradient check", gradients);
            ok &= report(6, "pipeline identities", || identities(&arts));
            ok &= report(7, "end to end", || end_to_end(&arts, secs));
            ok &= report(8, "hard bin", || hard_bin(&arts));
            ok &= report(9, "complexity", || complexity(&arts));
        }
        Err(_) => {
            println!("FAIL  3 artificial bracketing: suite run failed");
            report(4, "grid cardinality", grid_cardinality);
            report(5, "gradient check", gradients);
            for (id, name) in [
                (6, "pipeline identities"),
                (7, "end to end"),
                (8, "hard bin"),
                (9, "complexity"),
            ] {
                println!("FAIL {id:>2} {name}: suite run failed");
            }
            ok = false;
        }
    }
    ok &= report(10, "determinism", determinism);
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
