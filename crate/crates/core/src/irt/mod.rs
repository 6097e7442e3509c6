//! 3PL item response calibration, ability estimation and true scores.

pub mod fit;
pub mod model;
pub mod quadrature;
pub mod response;
pub mod simulate;

pub use fit::{
    eap_ability, fit_3pl, AbilityEstimates, BetaPrior, FitConfig, FitResult, LogNormalPrior,
};
pub use model::{logistic, min_max, p3pl, true_score, ItemParameterSet, ItemParams};
pub use quadrature::Quadrature;
pub use response::{Respondent, RespondentKind, ResponseMatrix};
pub use simulate::{simulate_responses, SimulatedTest};
