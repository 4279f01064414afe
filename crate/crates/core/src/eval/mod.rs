//! Classifier training and the augmentation-strategy × subset-size
//! experiment matrix, with F1 metrics and report emission.

mod classifier;
mod matrix;
mod metrics;
mod plot;
mod report;
mod strategy;

pub use classifier::{predict, train_classifier, ClassifierConfig, ClassifierOutcome, EpochRecord};
pub use matrix::{
    evaluate_strategy, prepare_repetition, run_matrix, DataPools, ExperimentMatrixConfig, MatrixRun,
    RepetitionContext,
};
pub use metrics::{confusion_from_predictions, f1_score, ConfusionCounts, MetricsRecord, Scores};
pub use plot::render_f1_plot;
pub use report::{
    emit_report, read_results_csv, summarize, write_results_csv, write_summary_csv, ReportFiles,
    SummaryRow, PLOT_FILE, RESULTS_FILE, SUMMARY_FILE,
};
pub use strategy::StrategyId;
