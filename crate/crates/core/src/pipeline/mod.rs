//! Response matrices, artificial respondents, ranking, binning, routing,
//! consolidation and the voting baselines.

pub mod respond;
pub mod route;
pub mod run;
pub mod vote;

pub use respond::{artificial_predictions, build_response_matrix, inject_artificials};
pub use route::{
    bin_sizes, consolidate, route_classify, select_rank, separate_bins, Bin, BinAssignment,
    BinRecord, ModelRank, RankEntry, Routed, RoutingKind,
};
pub use run::{
    calibrate_and_route, complexity_summary, fold_label, run_baselines, run_from_predictions,
    run_nasirt, run_split, summarize, summarize_baselines, verify_run, BaselineReport,
    BaselineScope, Calibration, ComplexitySummary, ParamTotals, RunArtifacts, RunConfig, RunReport,
    SummaryRow, REPORT_FORMAT_VERSION, SINGLE_CNN_ID,
};
pub use vote::{majority_vote, vote_accuracy};
