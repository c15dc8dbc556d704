//! `lccs`: build, query and benchmark LCCS-LSH indexes from the shell.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use lccs_lsh::bench::{
    gaussian_clusters, ground_truth, load_fvecs, load_ivecs, overall_ratio, recall_at_k,
    recall_frontier, run_sweep, time_queries, write_csv, write_frontier_csv, write_fvecs,
    write_ivecs, ClusterSpec, Dataset, SweepConfig,
};
use lccs_lsh::index::HashLength;
use lccs_lsh::lsh::Metric;
use lccs_lsh::multiprobe::{mp_query, DEFAULT_MAX_GAP};
use lccs_lsh::points::l2;
use lccs_lsh::{Error, IndexConfig, LccsIndex, LshFamily, PointSet, Result};

#[derive(Parser)]
#[command(
    name = "lccs",
    version,
    about = "Approximate nearest-neighbor search with LCCS-LSH"
)]
struct Cli {
    /// Worker threads for building, ground truth and sweeps (0 = all cores).
    #[arg(long, env = "LCCS_THREADS", default_value_t = 0, global = true)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Hash a dataset and write the index file.
    Build(BuildArgs),
    /// Answer k-NN queries against a saved index.
    Query(QueryArgs),
    /// Exact k nearest neighbors by linear scan, written as ivecs.
    Truth(TruthArgs),
    /// Run a parameter grid and write one CSV row per cell.
    Sweep(SweepArgs),
    /// Write a synthetic Gaussian-cluster dataset as fvecs.
    Synth(SynthArgs),
}

#[derive(Args)]
struct BuildArgs {
    /// Data points (.fvecs).
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "euclidean")]
    metric: Metric,
    /// Hash-string length.
    #[arg(long, conflicts_with = "alpha", required_unless_present = "alpha")]
    m: Option<usize>,
    /// Bucket width of the random-projection family (Euclidean only).
    #[arg(long)]
    w: Option<f64>,
    /// Derive m as max(8, round(n^(alpha·rho))) instead of giving it.
    #[arg(long)]
    alpha: Option<f64>,
    /// Near radius used to evaluate rho for --alpha; angular data needs
    /// c·radius < 2.
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Approximation ratio used to evaluate rho for --alpha.
    #[arg(long, default_value_t = 2.0)]
    c: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    index: PathBuf,
    /// The points the index was built from; the index file stores only hashes.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    queries: PathBuf,
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Candidates per probe (lambda); the first probe verifies lambda + k - 1.
    #[arg(long, default_value_t = 100)]
    candidates: usize,
    #[arg(long, default_value_t = 1)]
    probes: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_GAP)]
    max_gap: usize,
    /// Exact neighbor ids (.ivecs) for recall and ratio.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Returned ids per query (.ivecs).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TruthArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    queries: PathBuf,
    #[arg(long, default_value_t = 100)]
    k: usize,
    #[arg(long, default_value = "euclidean")]
    metric: Metric,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Grid description (.toml).
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Also write the best query time per recall bin.
    #[arg(long)]
    frontier: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    queries: usize,
    #[arg(long)]
    dim: usize,
    #[arg(long, default_value_t = 10)]
    clusters: usize,
    #[arg(long, default_value_t = 0.25)]
    spread: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_data: PathBuf,
    #[arg(long)]
    out_queries: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
    {
        eprintln!("error: cannot start {} worker threads: {e}", cli.threads);
        return ExitCode::FAILURE;
    }
    let result = match cli.command {
        Command::Build(a) => build(a),
        Command::Query(a) => query(a),
        Command::Truth(a) => truth(a),
        Command::Sweep(a) => sweep(a),
        Command::Synth(a) => synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn family_for(metric: Metric, w: Option<f64>) -> Result<LshFamily> {
    match (metric, w) {
        (Metric::Euclidean, Some(w)) => LshFamily::random_projection(w),
        (Metric::Euclidean, None) => Err(Error::Config(
            "--w is required for the euclidean metric".into(),
        )),
        (Metric::Angular, None) => Ok(LshFamily::CrossPolytope),
        (Metric::Angular, Some(_)) => Err(Error::Config(
            "--w applies only to the euclidean metric".into(),
        )),
    }
}

fn build(a: BuildArgs) -> Result<()> {
    let points = load_fvecs(&a.data)?;
    let family = family_for(a.metric, a.w)?;
    let hash_len = match (a.m, a.alpha) {
        (Some(m), _) => HashLength::Fixed(m),
        (None, Some(alpha)) => HashLength::Alpha {
            alpha,
            radius: a.radius,
            c: a.c,
        },
        (None, None) => unreachable!("clap requires one of --m and --alpha"),
    };
    let config = IndexConfig {
        family,
        hash_len,
        seed: a.seed,
    };
    let start = Instant::now();
    let index = LccsIndex::build(points, &config)?;
    let build_s = start.elapsed().as_secs_f64();
    index.save(&a.out)?;
    println!(
        "n={} d={} m={} build_s={build_s:.3} index_bytes={} file_bytes={}",
        index.len(),
        index.dim(),
        index.hash_len(),
        index.size_bytes(),
        index.file_len()
    );
    Ok(())
}

fn query(a: QueryArgs) -> Result<()> {
    let points = Arc::new(load_fvecs(&a.data)?);
    let index = LccsIndex::load(&a.index, points.clone())?;
    let queries = load_fvecs(&a.queries)?;
    let (qtime_ms, _, answers) = time_queries(&queries, 1, |q| {
        let r = if a.probes > 1 {
            mp_query(&index, q, a.k, a.candidates, a.probes, a.max_gap)?.0
        } else {
            index.query(q, a.k, a.candidates)?
        };
        let examined = r.candidates_examined();
        Ok((r.ids, r.distances, examined))
    })?;
    let examined = answers.iter().map(|r| r.2 as f64).sum::<f64>() / answers.len().max(1) as f64;
    let mut summary = format!(
        "queries={} k={} candidates_mean={examined:.1} qtime_ms={qtime_ms:.4}",
        queries.len(),
        a.k
    );
    if let Some(path) = &a.truth {
        let (recall, ratio) = score_against(&load_ivecs(path)?, &answers, &index, &queries, a.k)?;
        summary.push_str(&format!(" recall={recall:.4} ratio={ratio:.4}"));
    }
    if let Some(path) = &a.out {
        let rows: Vec<Vec<i32>> = answers
            .iter()
            .map(|(ids, _, _)| ids.iter().map(|&i| i as i32).collect())
            .collect();
        write_ivecs(path, &rows)?;
    }
    println!("{summary}");
    Ok(())
}

/// Mean recall@k and overall ratio against stored neighbor ids; exact
/// distances for the truth ids are recomputed from the index's points.
fn score_against(
    truth: &[Vec<i32>],
    answers: &[(Vec<u32>, Vec<f64>, usize)],
    index: &LccsIndex,
    queries: &PointSet,
    k: usize,
) -> Result<(f64, f64)> {
    if truth.len() != answers.len() {
        return Err(Error::Config(format!(
            "truth has {} rows but there are {} queries",
            truth.len(),
            answers.len()
        )));
    }
    let points = index.points();
    let (mut recall, mut ratio) = (0.0, 0.0);
    for (qi, (ids, dists, _)) in answers.iter().enumerate() {
        let row = &truth[qi];
        if row.len() < k {
            return Err(Error::Config(format!(
                "truth row {qi} has {} ids, need k = {k}",
                row.len()
            )));
        }
        let truth_ids: Vec<u32> = row[..k]
            .iter()
            .map(|&id| {
                u32::try_from(id)
                    .ok()
                    .filter(|&id| (id as usize) < points.len())
                    .ok_or_else(|| Error::Config(format!("truth id {id} out of range")))
            })
            .collect::<Result<_>>()?;
        let q = index.prepare_query(queries.row(qi))?;
        let truth_dists: Vec<f64> = truth_ids
            .iter()
            .map(|&id| l2(points.row(id as usize), &q))
            .collect();
        recall += recall_at_k(ids, &truth_ids, k);
        ratio += overall_ratio(dists, &truth_dists, k).value;
    }
    let q = answers.len().max(1) as f64;
    Ok((recall / q, ratio / q))
}

fn truth(a: TruthArgs) -> Result<()> {
    let points = load_fvecs(&a.data)?;
    let queries = load_fvecs(&a.queries)?;
    let gt = ground_truth(&points, &queries, a.k, a.metric)?;
    write_ivecs(&a.out, &gt.to_ivecs_rows())?;
    println!("queries={} k={}", gt.len(), gt.k);
    Ok(())
}

fn sweep(a: SweepArgs) -> Result<()> {
    let config = SweepConfig::load(&a.config)?;
    let data = Dataset::from_config(&config)?;
    let report = run_sweep(&config, &data)?;
    for failed in report.failures() {
        eprintln!(
            "warning: cell m={:?} w={:?} lambda={:?} probes={:?} failed: {}",
            failed.m,
            failed.w,
            failed.lambda,
            failed.probes,
            failed.error.as_deref().unwrap_or("")
        );
    }
    let rows = report.rows();
    write_csv(&rows, create(&a.out)?)?;
    if let Some(path) = &a.frontier {
        write_frontier_csv(&recall_frontier(&rows), create(path)?)?;
    }
    println!("cells={} failed={}", rows.len(), report.failures().count());
    Ok(())
}

fn synth(a: SynthArgs) -> Result<()> {
    let spec = ClusterSpec {
        spread: a.spread,
        ..ClusterSpec::new(a.dim, a.clusters)
    };
    let (points, queries) = gaussian_clusters(&spec, a.n, a.queries, a.seed)?;
    write_fvecs(&a.out_data, &points)?;
    write_fvecs(&a.out_queries, &queries)?;
    println!(
        "n={} queries={} d={}",
        points.len(),
        queries.len(),
        points.dim()
    );
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}
