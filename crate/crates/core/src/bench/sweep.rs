//! Parameter sweeps: a TOML grid in, one CSV row per cell out.
//!
//! ```toml
//! k = 10
//! metric = "euclidean"
//! repetitions = 5
//!
//! [data]
//! source = "synthetic"
//! n = 10000
//! queries = 100
//! dim = 32
//!
//! [grid]
//! m = [16, 64]
//! w = [1.0, 2.0]
//! lambda = [10, 100]
//! probe_multipliers = [0, 1, 2]   # probes = f*m + 1
//! ```

use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::metrics::{ground_truth, linear_scan, overall_ratio, prepare_points, recall_at_k, GroundTruth};
use super::synthetic::{gaussian_clusters, ClusterSpec};
use super::vecs::load_fvecs;
use crate::lsh::{LshFamily, Metric};
use crate::multiprobe::{mp_query, DEFAULT_MAX_GAP};
use crate::points::PointSet;
use crate::{Error, IndexConfig, LccsIndex, QueryResult, Result};

/// CSV header, in order.
pub const CSV_COLUMNS: [&str; 11] = [
    "method",
    "m",
    "w",
    "lambda",
    "probes",
    "k",
    "recall",
    "ratio",
    "qtime_ms",
    "build_s",
    "index_bytes",
];

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub data: DataSpec,
    #[serde(default = "default_metric")]
    pub metric: Metric,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    pub grid: Grid,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase", deny_unknown_fields)]
pub enum DataSpec {
    Synthetic {
        n: usize,
        queries: usize,
        dim: usize,
        #[serde(default = "default_clusters")]
        clusters: usize,
        #[serde(default = "default_spread")]
        spread: f64,
        #[serde(default)]
        seed: u64,
    },
    Fvecs {
        points: PathBuf,
        queries: PathBuf,
        /// Keep only the first `limit` points.
        #[serde(default)]
        limit: Option<usize>,
        #[serde(default)]
        query_limit: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub m: Vec<usize>,
    /// Bucket widths; required for the Euclidean metric, ignored otherwise.
    #[serde(default)]
    pub w: Vec<f64>,
    pub lambda: Vec<usize>,
    /// Absolute probe counts.
    #[serde(default)]
    pub probes: Vec<usize>,
    /// Probe counts relative to `m`: each `f` adds `f*m + 1`.
    #[serde(default)]
    pub probe_multipliers: Vec<usize>,
    #[serde(default = "default_max_gap")]
    pub max_gap: usize,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_true")]
    pub linear_scan: bool,
}

fn default_metric() -> Metric {
    Metric::Euclidean
}
fn default_k() -> usize {
    10
}
fn default_repetitions() -> usize {
    5
}
fn default_clusters() -> usize {
    10
}
fn default_spread() -> f64 {
    0.25
}
fn default_max_gap() -> usize {
    DEFAULT_MAX_GAP
}
fn default_seeds() -> Vec<u64> {
    vec![0]
}
fn default_true() -> bool {
    true
}

impl Grid {
    /// Distinct probe counts for hash length `m`, ascending; `[1]` when
    /// neither list is given.
    pub fn probe_counts(&self, m: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .probes
            .iter()
            .copied()
            .chain(self.probe_multipliers.iter().map(|f| f.saturating_mul(m).saturating_add(1)))
            .collect();
        if out.is_empty() {
            out.push(1);
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Bucket widths to sweep; a single `None` for families without one.
    fn widths(&self, metric: Metric) -> Vec<Option<f64>> {
        match metric {
            Metric::Euclidean => self.w.iter().map(|&w| Some(w)).collect(),
            Metric::Angular => vec![None],
        }
    }
}

impl SweepConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: SweepConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a config file; relative dataset paths resolve against the
    /// file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut config = SweepConfig::from_toml_str(&std::fs::read_to_string(path)?)?;
        if let DataSpec::Fvecs { points, queries, .. } = &mut config.data {
            let base = path.parent().unwrap_or(Path::new("."));
            for p in [points, queries] {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Config(msg.to_string()));
        let g = &self.grid;
        if self.k == 0 {
            return fail("k must be at least 1");
        }
        if self.repetitions == 0 {
            return fail("repetitions must be at least 1");
        }
        if g.m.is_empty() || g.m.contains(&0) {
            return fail("grid.m must be a non-empty list of positive lengths");
        }
        if g.lambda.is_empty() || g.lambda.contains(&0) {
            return fail("grid.lambda must be a non-empty list of positive counts");
        }
        if g.probes.contains(&0) {
            return fail("grid.probes entries must be at least 1");
        }
        if g.max_gap == 0 {
            return fail("grid.max_gap must be at least 1");
        }
        if g.seeds.is_empty() {
            return fail("grid.seeds must not be empty");
        }
        if self.metric == Metric::Euclidean
            && (g.w.is_empty() || g.w.iter().any(|w| !(*w > 0.0 && w.is_finite())))
        {
            return fail("grid.w must be a non-empty list of positive widths for the euclidean metric");
        }
        if let DataSpec::Synthetic {
            n,
            queries,
            dim,
            clusters,
            spread,
            ..
        } = self.data
        {
            if n == 0 || queries == 0 || dim == 0 || clusters == 0 || !(spread > 0.0) {
                return fail("synthetic data needs positive n, queries, dim, clusters and spread");
            }
            if self.k > n {
                return fail("k exceeds the number of points");
            }
        }
        Ok(())
    }
}

/// Points, queries and their exact neighbors.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub points: Arc<PointSet>,
    pub queries: PointSet,
    pub metric: Metric,
    pub truth: GroundTruth,
}

impl Dataset {
    pub fn new(points: PointSet, queries: PointSet, metric: Metric, k: usize) -> Result<Self> {
        let truth = ground_truth(&points, &queries, k, metric)?;
        Ok(Dataset {
            points: Arc::new(points),
            queries,
            metric,
            truth,
        })
    }

    pub fn from_config(config: &SweepConfig) -> Result<Self> {
        let (points, queries) = match &config.data {
            DataSpec::Synthetic {
                n,
                queries,
                dim,
                clusters,
                spread,
                seed,
            } => {
                let spec = ClusterSpec {
                    spread: *spread,
                    ..ClusterSpec::new(*dim, *clusters)
                };
                gaussian_clusters(&spec, *n, *queries, *seed)?
            }
            DataSpec::Fvecs {
                points,
                queries,
                limit,
                query_limit,
            } => {
                let p = load_fvecs(points)?;
                let q = load_fvecs(queries)?;
                (
                    limit.map_or(p.clone(), |l| p.truncated(l)),
                    query_limit.map_or(q.clone(), |l| q.truncated(l)),
                )
            }
        };
        Dataset::new(points, queries, config.metric, config.k)
    }
}

/// One measured cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub method: String,
    pub m: Option<usize>,
    pub w: Option<f64>,
    pub lambda: Option<usize>,
    pub probes: Option<usize>,
    pub k: usize,
    pub seed: Option<u64>,
    /// Mean recall@k over queries.
    pub recall: Option<f64>,
    /// Mean overall ratio over queries.
    pub ratio: Option<f64>,
    /// Some query's ratio hit the zero-distance cap.
    pub ratio_capped: bool,
    /// Mean over queries of each query's median time across repetitions.
    pub qtime_ms: Option<f64>,
    /// Median over queries of the same per-query times.
    pub qtime_median_ms: Option<f64>,
    pub candidates_mean: Option<f64>,
    pub build_s: Option<f64>,
    pub index_bytes: Option<usize>,
    pub error: Option<String>,
}

impl RunRecord {
    fn cell(method: &str, k: usize) -> Self {
        RunRecord {
            method: method.to_string(),
            m: None,
            w: None,
            lambda: None,
            probes: None,
            k,
            seed: None,
            recall: None,
            ratio: None,
            ratio_capped: false,
            qtime_ms: None,
            qtime_median_ms: None,
            candidates_mean: None,
            build_s: None,
            index_bytes: None,
            error: None,
        }
    }

    pub fn to_row(&self) -> SweepRow {
        SweepRow {
            method: self.method.clone(),
            m: self.m,
            w: self.w,
            lambda: self.lambda,
            probes: self.probes,
            k: self.k,
            recall: self.recall,
            ratio: self.ratio,
            qtime_ms: self.qtime_ms,
            build_s: self.build_s,
            index_bytes: self.index_bytes,
        }
    }
}

/// One CSV row, columns as in [`CSV_COLUMNS`]. Empty fields mean "not
/// applicable" or, for a failed cell, "not measured".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub method: String,
    pub m: Option<usize>,
    pub w: Option<f64>,
    pub lambda: Option<usize>,
    pub probes: Option<usize>,
    pub k: usize,
    pub recall: Option<f64>,
    pub ratio: Option<f64>,
    pub qtime_ms: Option<f64>,
    pub build_s: Option<f64>,
    pub index_bytes: Option<usize>,
}

impl SweepRow {
    fn sort_key_cmp(&self, other: &Self) -> std::cmp::Ordering {
        let w = |r: &SweepRow| r.w.unwrap_or(f64::NEG_INFINITY);
        self.method
            .cmp(&other.method)
            .then(self.m.cmp(&other.m))
            .then(w(self).total_cmp(&w(other)))
            .then(self.lambda.cmp(&other.lambda))
            .then(self.probes.cmp(&other.probes))
            .then(self.k.cmp(&other.k))
    }
}

/// Writes `rows` sorted by (method, m, w, lambda, probes, k). The sort is
/// stable, so rows differing only in seed keep their order.
pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut sorted = rows.to_vec();
    sorted.sort_by(SweepRow::sort_key_cmp);
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    writer.write_record(CSV_COLUMNS)?;
    for row in &sorted {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers()?.clone();
    if headers.iter().ne(CSV_COLUMNS) {
        return Err(Error::Config(format!(
            "unexpected CSV header {:?}",
            headers.iter().collect::<Vec<_>>()
        )));
    }
    Ok(reader.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// Fastest configuration per method and 5-point recall bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierRow {
    pub method: String,
    /// Lower edge of the bin in percent: 0, 5, ..., 95, or 100 for exact
    /// recall 1.
    pub recall_bin: u32,
    pub recall: f64,
    pub qtime_ms: f64,
    pub m: Option<usize>,
    pub w: Option<f64>,
    pub lambda: Option<usize>,
    pub probes: Option<usize>,
}

/// Bucket of `recall` in 5-point steps; an epsilon keeps values such as
/// 0.15 that round just below an edge in the intended bin.
pub fn recall_bin(recall: f64) -> u32 {
    let pct = (recall * 100.0 + 1e-9).clamp(0.0, 100.0);
    5 * (pct / 5.0).floor() as u32
}

/// Per method and recall bin, the row with the lowest query time (ties by
/// input order). Rows lacking recall or time are ignored.
pub fn recall_frontier(rows: &[SweepRow]) -> Vec<FrontierRow> {
    let mut best: Vec<FrontierRow> = Vec::new();
    for row in rows {
        let (Some(recall), Some(qtime)) = (row.recall, row.qtime_ms) else {
            continue;
        };
        let candidate = FrontierRow {
            method: row.method.clone(),
            recall_bin: recall_bin(recall),
            recall,
            qtime_ms: qtime,
            m: row.m,
            w: row.w,
            lambda: row.lambda,
            probes: row.probes,
        };
        match best
            .iter_mut()
            .find(|b| b.method == candidate.method && b.recall_bin == candidate.recall_bin)
        {
            Some(b) if candidate.qtime_ms < b.qtime_ms => *b = candidate,
            Some(_) => {}
            None => best.push(candidate),
        }
    }
    best.sort_by(|a, b| a.method.cmp(&b.method).then(a.recall_bin.cmp(&b.recall_bin)));
    best
}

pub fn write_frontier_csv<W: Write>(rows: &[FrontierRow], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Times `run` on every query `repetitions` times. Returns the mean and the
/// median over queries of each query's median time, in milliseconds, and
/// the result of the first repetition for every query.
pub fn time_queries<T>(
    queries: &PointSet,
    repetitions: usize,
    mut run: impl FnMut(&[f32]) -> Result<T>,
) -> Result<(f64, f64, Vec<T>)> {
    let reps = repetitions.max(1);
    let mut times = vec![Vec::with_capacity(reps); queries.len()];
    let mut first = Vec::with_capacity(queries.len());
    for rep in 0..reps {
        for (qi, q) in queries.rows().enumerate() {
            let start = Instant::now();
            let out = run(q)?;
            times[qi].push(start.elapsed().as_secs_f64() * 1e3);
            if rep == 0 {
                first.push(out);
            }
        }
    }
    let mut per_query: Vec<f64> = times.into_iter().map(|mut t| median(&mut t)).collect();
    let mean = per_query.iter().sum::<f64>() / per_query.len().max(1) as f64;
    Ok((mean, median(&mut per_query), first))
}

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    }
}

/// Fills recall, ratio and candidate statistics from per-query answers.
fn score(record: &mut RunRecord, truth: &GroundTruth, answers: &[(Vec<u32>, Vec<f64>, usize)]) {
    let k = record.k;
    let (mut recall, mut ratio, mut examined) = (0.0, 0.0, 0.0);
    for (qi, (ids, dists, cand)) in answers.iter().enumerate() {
        recall += recall_at_k(ids, &truth.ids[qi], k);
        let r = overall_ratio(dists, &truth.distances[qi], k);
        if r.ranks > 0 {
            ratio += r.value;
        }
        record.ratio_capped |= r.capped;
        examined += *cand as f64;
    }
    let q = answers.len().max(1) as f64;
    record.recall = Some(recall / q);
    record.ratio = Some(ratio / q);
    record.candidates_mean = Some(examined / q);
}

/// Linear-scan baseline over the dataset.
pub fn run_linear_scan(data: &Dataset, k: usize, repetitions: usize) -> Result<RunRecord> {
    let points = prepare_points(&data.points, data.metric)?;
    let queries = prepare_points(&data.queries, data.metric)?;
    let mut record = RunRecord::cell("linear", k);
    let (mean, med, answers) = time_queries(&queries, repetitions, |q| {
        let (ids, d) = linear_scan(&points, q, k);
        Ok((ids, d, points.len()))
    })?;
    score(&mut record, &data.truth, &answers);
    record.qtime_ms = Some(mean);
    record.qtime_median_ms = Some(med);
    record.build_s = Some(0.0);
    record.index_bytes = Some(0);
    Ok(record)
}

/// Queries `index` for every query of `data` and fills a record.
pub fn run_cell(
    index: &LccsIndex,
    data: &Dataset,
    k: usize,
    lambda: usize,
    probes: usize,
    max_gap: usize,
    repetitions: usize,
) -> Result<RunRecord> {
    let mut record = RunRecord::cell(if probes > 1 { "mp-lccs" } else { "lccs" }, k);
    record.m = Some(index.hash_len());
    record.w = index.family().bucket_width();
    record.lambda = Some(lambda);
    record.probes = Some(probes);
    record.seed = Some(index.seed());
    let (mean, med, answers) = time_queries(&data.queries, repetitions, |q| {
        let r: QueryResult = if probes > 1 {
            mp_query(index, q, k, lambda, probes, max_gap)?.0
        } else {
            index.query(q, k, lambda)?
        };
        let examined = r.candidates_examined();
        Ok((r.ids, r.distances, examined))
    })?;
    score(&mut record, &data.truth, &answers);
    record.qtime_ms = Some(mean);
    record.qtime_median_ms = Some(med);
    record.index_bytes = Some(index.size_bytes());
    Ok(record)
}

/// Result of [`run_sweep`]: every cell, including failed ones.
#[derive(Debug, Clone)]
pub struct SweepReport {
    pub records: Vec<RunRecord>,
}

impl SweepReport {
    pub fn rows(&self) -> Vec<SweepRow> {
        self.records.iter().map(RunRecord::to_row).collect()
    }

    pub fn failures(&self) -> impl Iterator<Item = &RunRecord> {
        self.records.iter().filter(|r| r.error.is_some())
    }
}

/// Builds one index per (seed, m, w) and measures every (lambda, probes)
/// on it. A failing build or cell is recorded with its error and the sweep
/// moves on.
pub fn run_sweep(config: &SweepConfig, data: &Dataset) -> Result<SweepReport> {
    config.validate()?;
    let g = &config.grid;
    let k = config.k;
    let mut records = Vec::new();
    if g.linear_scan {
        records.push(run_linear_scan(data, k, config.repetitions)?);
    }
    for &seed in &g.seeds {
        for &m in &g.m {
            for w in g.widths(data.metric) {
                let family = match w {
                    Some(w) => LshFamily::random_projection(w),
                    None => Ok(LshFamily::CrossPolytope),
                };
                let start = Instant::now();
                let built = family
                    .and_then(|f| LccsIndex::build(data.points.clone(), &IndexConfig::new(f, m, seed)));
                let build_s = start.elapsed().as_secs_f64();
                for &lambda in &g.lambda {
                    for probes in g.probe_counts(m) {
                        let mut record = match &built {
                            Ok(index) => run_cell(index, data, k, lambda, probes, g.max_gap, config.repetitions)
                                .unwrap_or_else(|e| failed(m, w, lambda, probes, k, seed, e)),
                            Err(e) => failed(m, w, lambda, probes, k, seed, e.to_string()),
                        };
                        if built.is_ok() {
                            record.build_s = Some(build_s);
                        }
                        records.push(record);
                    }
                }
            }
        }
    }
    Ok(SweepReport { records })
}

fn failed(
    m: usize,
    w: Option<f64>,
    lambda: usize,
    probes: usize,
    k: usize,
    seed: u64,
    error: impl ToString,
) -> RunRecord {
    RunRecord {
        m: Some(m),
        w,
        lambda: Some(lambda),
        probes: Some(probes),
        seed: Some(seed),
        error: Some(error.to_string()),
        ..RunRecord::cell(if probes > 1 { "mp-lccs" } else { "lccs" }, k)
    }
}
