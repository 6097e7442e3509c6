use ndarray::Array2;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::irt::{Respondent, RespondentKind, ResponseMatrix};
use crate::seed::derive_seed;
use crate::zoo::PredictionVector;

pub const N_RANDOM: usize = 3;

/// Scores every model's predictions against the ground truth. Rows follow the
/// order of `predictions`, columns the order of `instance_ids`.
pub fn build_response_matrix(
    predictions: &[PredictionVector],
    truth: &[usize],
    instance_ids: &[String],
) -> Result<ResponseMatrix> {
    if truth.len() != instance_ids.len() {
        return Err(Error::Pipeline(format!(
            "{} labels for {} instances",
            truth.len(),
            instance_ids.len()
        )));
    }
    let n = truth.len();
    for p in predictions {
        if p.len() < n {
            return Err(Error::MissingPrediction {
                model: p.model_id.clone(),
                instance: instance_ids[p.len()].clone(),
            });
        }
        if p.len() > n {
            return Err(Error::Pipeline(format!(
                "model {} has {} predictions for {n} instances",
                p.model_id,
                p.len()
            )));
        }
    }
    let correct = Array2::from_shape_fn((predictions.len(), n), |(r, j)| {
        u8::from(predictions[r].predicted[j] == truth[j])
    });
    ResponseMatrix::new(
        predictions
            .iter()
            .map(|p| Respondent::new(p.model_id.clone(), RespondentKind::Trained))
            .collect(),
        instance_ids.to_vec(),
        correct,
    )
}

/// Three uniform random classifiers, one that is always right and one that is
/// always wrong.
pub fn artificial_predictions(
    truth: &[usize],
    n_classes: usize,
    seed: u64,
) -> Result<Vec<(RespondentKind, PredictionVector)>> {
    if n_classes < 2 {
        return Err(Error::Pipeline(format!(
            "artificial classifiers need at least 2 classes, got {n_classes}"
        )));
    }
    let mut out = Vec::with_capacity(N_RANDOM + 2);
    for k in 0..N_RANDOM {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0xa271, k as u64]));
        let predicted = (0..truth.len())
            .map(|_| rng.gen_range(0..n_classes))
            .collect();
        let mut pv =
            PredictionVector::from_classes(format!("random{}", k + 1), predicted, n_classes);
        pv.probabilities.fill(1.0 / n_classes as f64);
        out.push((RespondentKind::Random, pv));
    }
    out.push((
        RespondentKind::Optimistic,
        PredictionVector::from_classes("optimistic", truth.to_vec(), n_classes),
    ));
    out.push((
        RespondentKind::Pessimistic,
        PredictionVector::from_classes(
            "pessimistic",
            truth.iter().map(|&t| (t + 1) % n_classes).collect(),
            n_classes,
        ),
    ));
    Ok(out)
}

/// Appends the five artificial respondents to a response matrix.
pub fn inject_artificials(
    rm: &ResponseMatrix,
    truth: &[usize],
    n_classes: usize,
    seed: u64,
) -> Result<(ResponseMatrix, Vec<PredictionVector>)> {
    if truth.len() != rm.n_items() {
        return Err(Error::Pipeline(format!(
            "{} labels for {} items",
            truth.len(),
            rm.n_items()
        )));
    }
    let arts = artificial_predictions(truth, n_classes, seed)?;
    let rows = Array2::from_shape_fn((arts.len(), truth.len()), |(r, j)| {
        u8::from(arts[r].1.predicted[j] == truth[j])
    });
    let respondents = arts
        .iter()
        .map(|(kind, pv)| Respondent::new(pv.model_id.clone(), *kind))
        .collect();
    let rm = rm.with_rows(respondents, rows)?;
    Ok((rm, arts.into_iter().map(|(_, pv)| pv).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| i.to_string()).collect()
    }

    #[test]
    fn rows_mark_correct_predictions() {
        let truth = vec![0, 1, 2];
        let preds = vec![
            PredictionVector::from_classes("A", vec![0, 1, 2], 3),
            PredictionVector::from_classes("B", vec![1, 1, 0], 3),
        ];
        let rm = build_response_matrix(&preds, &truth, &ids(3)).unwrap();
        assert_eq!(rm.row(0).to_vec(), vec![1, 1, 1]);
        assert_eq!(rm.row(1).to_vec(), vec![0, 1, 0]);
    }

    #[test]
    fn short_prediction_names_model_and_instance() {
        let preds = vec![
            PredictionVector::from_classes("A", vec![0, 1, 2], 3),
            PredictionVector::from_classes("B", vec![1, 1], 3),
        ];
        match build_response_matrix(&preds, &[0, 1, 2], &ids(3)) {
            Err(Error::MissingPrediction { model, instance }) => {
                assert_eq!(model, "B");
                assert_eq!(instance, "2");
            }
            other => panic!("expected missing prediction, got {other:?}"),
        }
    }

    #[test]
    fn injects_five_rows() {
        let truth: Vec<usize> = (0..40).map(|i| i % 4).collect();
        let preds = vec![
            PredictionVector::from_classes("A", truth.clone(), 4),
            PredictionVector::from_classes("B", vec![0; 40], 4),
        ];
        let rm = build_response_matrix(&preds, &truth, &ids(40)).unwrap();
        let (full, arts) = inject_artificials(&rm, &truth, 4, 3).unwrap();
        assert_eq!(full.n_respondents(), 7);
        assert_eq!(arts.len(), 5);
        assert!(full.row(5).iter().all(|&v| v == 1));
        assert!(full.row(6).iter().all(|&v| v == 0));
        let kinds: Vec<_> = full.respondents().iter().map(|r| r.kind).collect();
        assert_eq!(kinds[2..5], [RespondentKind::Random; 3]);
        assert!(full.constant_item().is_none());
        let again = inject_artificials(&rm, &truth, 4, 3).unwrap().0;
        assert_eq!(full, again);
        assert!(inject_artificials(&rm, &truth, 1, 3).is_err());
    }
}
