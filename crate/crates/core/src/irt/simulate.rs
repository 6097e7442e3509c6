use ndarray::Array2;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::model::ItemParams;
use super::response::{Respondent, RespondentKind, ResponseMatrix};
use crate::error::Result;

/// Responses drawn from known item parameters and standard-normal abilities.
#[derive(Debug, Clone)]
pub struct SimulatedTest {
    pub params: Vec<ItemParams>,
    pub theta: Vec<f64>,
    pub matrix: ResponseMatrix,
}

pub fn simulate_responses(
    n_respondents: usize,
    n_items: usize,
    a_range: (f64, f64),
    b_range: (f64, f64),
    c_range: (f64, f64),
    seed: u64,
) -> Result<SimulatedTest> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let uniform = |lo: f64, hi: f64, rng: &mut ChaCha8Rng| {
        if hi > lo {
            rng.gen_range(lo..hi)
        } else {
            lo
        }
    };
    let params: Vec<ItemParams> = (0..n_items)
        .map(|_| ItemParams {
            a: uniform(a_range.0, a_range.1, &mut rng),
            b: uniform(b_range.0, b_range.1, &mut rng),
            c: uniform(c_range.0, c_range.1, &mut rng),
        })
        .collect();
    let theta: Vec<f64> = (0..n_respondents)
        .map(|_| rng.sample(StandardNormal))
        .collect();
    let correct = Array2::from_shape_fn((n_respondents, n_items), |(r, j)| {
        u8::from(rng.gen::<f64>() < params[j].prob(theta[r]))
    });
    let matrix = ResponseMatrix::new(
        (0..n_respondents)
            .map(|r| Respondent::new(format!("r{r}"), RespondentKind::Trained))
            .collect(),
        (0..n_items).map(|j| format!("i{j}")).collect(),
        correct,
    )?;
    Ok(SimulatedTest {
        params,
        theta,
        matrix,
    })
}
