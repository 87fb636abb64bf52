//! Data ingestion, synthetic streams and prequential evaluation.

pub mod csv_source;
pub mod data;
pub mod generators;
pub mod perceptron;
pub mod prequential;

pub use csv_source::{load_csv, load_csv_stream, LabelColumn, LoadedCsv};
pub use data::{Dataset, Label, StreamBatch};
pub use generators::{
    gen_rbf_stream, gen_tree_stream, RbfGenerator, TreeGenerator, TreeStreamConfig,
};
pub use perceptron::Perceptron;
pub use prequential::{
    grid_run, prequential_run, selected_count, write_grid_jsonl, write_run_jsonl, GridCell,
    GridResult, GridSummary, RunMetrics, RunSummary, StepRecord, DEFAULT_WINDOW,
};
