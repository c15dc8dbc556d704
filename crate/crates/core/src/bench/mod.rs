//! Benchmark plumbing: dataset files, ground truth, metrics and sweeps.

mod metrics;
mod sweep;
mod synthetic;
mod vecs;

pub use metrics::{
    ground_truth, linear_scan, overall_ratio, prepare_points, recall_at_k, GroundTruth, Ratio,
    RATIO_CAP,
};
pub use sweep::{
    read_csv, recall_bin, recall_frontier, run_cell, run_linear_scan, run_sweep, time_queries,
    write_csv, write_frontier_csv, DataSpec, Dataset, FrontierRow, Grid, RunRecord, SweepConfig,
    SweepReport, SweepRow, CSV_COLUMNS,
};
pub use synthetic::{gaussian_clusters, ClusterSpec};
pub use vecs::{
    load_fvecs, load_ivecs, parse_fvecs, parse_ivecs, write_fvecs, write_fvecs_to, write_ivecs,
    write_ivecs_to,
};
