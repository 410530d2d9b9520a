//! Command line for the furthest-neighbor toolkit: dataset generation,
//! index build/search, benchmarking, sweeps, and rank analysis.
//!
//! All randomness flows from explicit `--seed` flags, so every subcommand is
//! reproducible byte for byte in its non-timing outputs. Output files are
//! written to a temporary sibling and renamed into place, so a failing run
//! never leaves a partial file behind.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use farhash::{
    bench, drusilla_build_with_threshold, error_runtime_sweep, fmt_real, gen_anisotropic_gaussian,
    gen_gaussian_mixture, gen_uniform_ball, gen_uniform_cube, guaranteed_build, load_points,
    mean_center_refs, qdafn_build, rank_analysis, read_any_index, save_points, write_rows_csv,
    AlgorithmSpec, AnyIndex, BenchOptions, NeighborList, PointSet, DEFAULT_ANGLE_THRESHOLD,
};

#[derive(Parser)]
#[command(
    name = "farhash",
    version,
    about = "Furthest-neighbor search: data-dependent projection hashing, baselines, benchmarks"
)]
struct Cli {
    /// Process queries on a single worker thread (stable timings).
    #[arg(long, global = true)]
    single_threaded: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Algo {
    Drusilla,
    Guaranteed,
    Qdafn,
    Brute,
}

impl Algo {
    fn name(self) -> &'static str {
        match self {
            Algo::Drusilla => "drusilla",
            Algo::Guaranteed => "guaranteed",
            Algo::Qdafn => "qdafn",
            Algo::Brute => "brute",
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum Dist {
    /// Uniform in the unit ball.
    Ball,
    /// Uniform in the unit cube.
    Cube,
    /// Anisotropic zero-mean Gaussian.
    Gaussian,
    /// Mixture of separated anisotropic Gaussians.
    Mixture,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset and write it as CSV.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Dist::Ball)]
        dist: Dist,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build an index from a reference CSV and serialize it.
    Build {
        #[arg(long, value_enum)]
        algo: Algo,
        #[arg(long)]
        refs: PathBuf,
        #[arg(long)]
        has_header: bool,
        #[arg(long)]
        l: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        epsilon: Option<f64>,
        /// Seed for QDAFN's random projection directions.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_ANGLE_THRESHOLD)]
        angle_threshold: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Search an index file against a query CSV.
    Search {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        queries: PathBuf,
        #[arg(long)]
        has_header: bool,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Distance-evaluation budget (QDAFN indexes only; default l + m).
        #[arg(long)]
        budget: Option<usize>,
        /// Cross-check that the index file holds this algorithm's format.
        #[arg(long, value_enum)]
        algo: Option<Algo>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Benchmark algorithms over random 70/30 reference/query splits.
    Bench {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        has_header: bool,
        /// Comma-separated list from {brute, drusilla, guaranteed, qdafn}.
        #[arg(long)]
        algos: String,
        #[arg(long)]
        l: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_ANGLE_THRESHOLD)]
        angle_threshold: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Average rank vs. centered norm over a reference set.
    RankAnalysis {
        #[arg(long)]
        refs: PathBuf,
        #[arg(long)]
        has_header: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Error/runtime sweep over parameter points (zipped --l/--m lists).
    Sweep {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        has_header: bool,
        #[arg(long, value_enum)]
        algo: Algo,
        /// Comma-separated table counts, zipped with --m.
        #[arg(long)]
        l: String,
        /// Comma-separated table sizes, zipped with --l.
        #[arg(long)]
        m: String,
        /// Optional comma-separated budgets (QDAFN only), zipped with --l.
        #[arg(long)]
        budget: Option<String>,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    init_threads(cli.single_threaded)?;
    match cli.command {
        Command::Gen { n, d, seed, dist, out } => cmd_gen(n, d, seed, dist, &out),
        Command::Build {
            algo,
            refs,
            has_header,
            l,
            m,
            epsilon,
            seed,
            angle_threshold,
            out,
        } => cmd_build(algo, &refs, has_header, l, m, epsilon, seed, angle_threshold, &out),
        Command::Search {
            index,
            queries,
            has_header,
            k,
            budget,
            algo,
            out,
        } => cmd_search(&index, &queries, has_header, k, budget, algo, &out),
        Command::Bench {
            data,
            has_header,
            algos,
            l,
            m,
            epsilon,
            budget,
            k,
            seed,
            trials,
            angle_threshold,
            out,
        } => cmd_bench(
            &data, has_header, &algos, l, m, epsilon, budget, k, seed, trials, angle_threshold,
            &out,
        ),
        Command::RankAnalysis { refs, has_header, out } => cmd_rank_analysis(&refs, has_header, &out),
        Command::Sweep {
            data,
            has_header,
            algo,
            l,
            m,
            budget,
            k,
            seed,
            out,
        } => cmd_sweep(&data, has_header, algo, &l, &m, budget.as_deref(), k, seed, &out),
    }
}

fn init_threads(single_threaded: bool) -> Result<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if single_threaded {
        builder = builder.num_threads(1);
    } else if let Ok(value) = std::env::var("FARHASH_THREADS") {
        let n: usize = value
            .parse()
            .context("FARHASH_THREADS must be a positive integer")?;
        if n == 0 {
            bail!("FARHASH_THREADS must be positive");
        }
        builder = builder.num_threads(n);
    }
    builder.build_global().context("initializing thread pool")?;
    Ok(())
}

/// Writes through a temporary sibling file and renames on success.
fn write_atomic(path: &Path, write: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let tmp = PathBuf::from(format!("{}.tmp", path.display()));
    let result = (|| {
        let file = File::create(&tmp)
            .with_context(|| format!("creating output file {}", tmp.display()))?;
        let mut writer = BufWriter::new(file);
        write(&mut writer)?;
        writer.flush()?;
        Ok(())
    })();
    match result {
        Ok(()) => {
            std::fs::rename(&tmp, path)
                .with_context(|| format!("moving output into place at {}", path.display()))?;
            Ok(())
        }
        Err(err) => {
            let _ = std::fs::remove_file(&tmp);
            Err(err)
        }
    }
}

fn load_csv(path: &Path, has_header: bool) -> Result<PointSet> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    load_points(BufReader::new(file), has_header)
        .with_context(|| format!("loading points from {}", path.display()))
}

fn require(value: Option<usize>, flag: &str, algo: &str) -> Result<usize> {
    let v = value.with_context(|| format!("--{flag} is required for --algo {algo}"))?;
    if v == 0 {
        bail!("--{flag} must be positive");
    }
    Ok(v)
}

fn reject(value: Option<usize>, flag: &str, algo: &str) -> Result<()> {
    if value.is_some() {
        bail!("--{flag} does not apply to --algo {algo}");
    }
    Ok(())
}

fn cmd_gen(n: usize, d: usize, seed: u64, dist: Dist, out: &Path) -> Result<()> {
    if n == 0 || d == 0 {
        bail!("--n and --d must be positive");
    }
    let points = match dist {
        Dist::Ball => gen_uniform_ball(n, d, seed),
        Dist::Cube => gen_uniform_cube(n, d, seed),
        Dist::Gaussian => gen_anisotropic_gaussian(n, d, seed),
        Dist::Mixture => gen_gaussian_mixture(n, d, 4, seed),
    };
    write_atomic(out, |w| Ok(save_points(&points, w)?))
}

#[allow(clippy::too_many_arguments)]
fn cmd_build(
    algo: Algo,
    refs: &Path,
    has_header: bool,
    l: Option<usize>,
    m: Option<usize>,
    epsilon: Option<f64>,
    seed: u64,
    angle_threshold: f64,
    out: &Path,
) -> Result<()> {
    if algo != Algo::Guaranteed && epsilon.is_some() {
        bail!("--epsilon only applies to --algo guaranteed");
    }
    let points = load_csv(refs, has_header)?;
    let centered = mean_center_refs(&points)?;
    match algo {
        Algo::Drusilla => {
            let (l, m) = (require(l, "l", "drusilla")?, require(m, "m", "drusilla")?);
            let index = drusilla_build_with_threshold(&centered, l, m, angle_threshold)?;
            write_atomic(out, |w| Ok(index.write_to(w)?))
        }
        Algo::Guaranteed => {
            reject(l, "l", "guaranteed")?;
            let m = require(m, "m", "guaranteed")?;
            let epsilon = epsilon.context("--epsilon is required for --algo guaranteed")?;
            let index = guaranteed_build(&centered, epsilon, m)?;
            write_atomic(out, |w| Ok(index.write_to(w)?))
        }
        Algo::Qdafn => {
            let (l, m) = (require(l, "l", "qdafn")?, require(m, "m", "qdafn")?);
            let index = qdafn_build(&centered, l, m, seed)?;
            write_atomic(out, |w| Ok(index.write_to(w)?))
        }
        Algo::Brute => bail!("brute force uses no index; run `farhash bench` instead"),
    }
}

fn cmd_search(
    index_path: &Path,
    queries_path: &Path,
    has_header: bool,
    k: usize,
    budget: Option<usize>,
    algo: Option<Algo>,
    out: &Path,
) -> Result<()> {
    if k == 0 {
        bail!("--k must be positive");
    }
    let file = File::open(index_path)
        .with_context(|| format!("opening index {}", index_path.display()))?;
    let index = read_any_index(BufReader::new(file))
        .with_context(|| format!("reading index {}", index_path.display()))?;
    if let Some(requested) = algo {
        if requested.name() != index.kind() {
            bail!(
                "index file {} holds a {} index, but --algo {} was requested",
                index_path.display(),
                index.kind(),
                requested.name()
            );
        }
    }
    if budget.is_some() && !matches!(index, AnyIndex::Qdafn(_)) {
        bail!("--budget only applies to QDAFN indexes");
    }
    let queries = load_csv(queries_path, has_header)?;
    let results = match &index {
        AnyIndex::Drusilla(idx) => idx.search(&queries, k)?,
        AnyIndex::Guaranteed(idx) => idx.search(&queries, k)?,
        AnyIndex::Qdafn(idx) => {
            let budget = budget.unwrap_or_else(|| idx.default_budget());
            idx.search(&queries, k, budget)?
        }
    };
    write_atomic(out, |w| write_results_csv(&results, w))
}

fn write_results_csv(results: &[NeighborList], w: &mut impl Write) -> Result<()> {
    writeln!(w, "query_id,rank,ref_id,distance")?;
    for list in results {
        for (rank, entry) in list.entries().iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{}",
                list.query_id(),
                rank + 1,
                entry.ref_id,
                fmt_real(entry.distance)
            )?;
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    data: &Path,
    has_header: bool,
    algos: &str,
    l: Option<usize>,
    m: Option<usize>,
    epsilon: Option<f64>,
    budget: Option<usize>,
    k: usize,
    seed: u64,
    trials: usize,
    angle_threshold: f64,
    out: &Path,
) -> Result<()> {
    if k == 0 || trials == 0 {
        bail!("--k and --trials must be positive");
    }
    let mut specs = Vec::new();
    for name in algos.split(',') {
        let spec = match name.trim() {
            "brute" => AlgorithmSpec::Brute,
            "drusilla" => AlgorithmSpec::Drusilla {
                l: require(l, "l", "drusilla")?,
                m: require(m, "m", "drusilla")?,
            },
            "guaranteed" => AlgorithmSpec::Guaranteed {
                epsilon: epsilon.context("--epsilon is required when benchmarking guaranteed")?,
                m: require(m, "m", "guaranteed")?,
            },
            "qdafn" => AlgorithmSpec::Qdafn {
                l: require(l, "l", "qdafn")?,
                m: require(m, "m", "qdafn")?,
                budget,
            },
            other => bail!("unknown algorithm {other:?} in --algos"),
        };
        specs.push(spec);
    }
    let points = load_csv(data, has_header)?;
    let report = bench(
        &points,
        &specs,
        &BenchOptions {
            k,
            seed,
            trials,
            angle_threshold,
        },
    )?;
    write_atomic(out, |w| Ok(report.write_csv(w)?))
}

fn cmd_rank_analysis(refs: &Path, has_header: bool, out: &Path) -> Result<()> {
    let points = load_csv(refs, has_header)?;
    let records = rank_analysis(&points)?;
    write_atomic(out, |w| {
        writeln!(w, "ref_id,norm,avg_rank")?;
        for r in &records {
            writeln!(
                w,
                "{},{},{}",
                r.ref_id,
                fmt_real(r.centered_norm),
                fmt_real(r.average_rank)
            )?;
        }
        Ok(())
    })
}

fn parse_list(text: &str, flag: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|tok| {
            let v: usize = tok
                .trim()
                .parse()
                .with_context(|| format!("--{flag} has a non-integer entry {tok:?}"))?;
            if v == 0 {
                bail!("--{flag} entries must be positive");
            }
            Ok(v)
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    data: &Path,
    has_header: bool,
    algo: Algo,
    l: &str,
    m: &str,
    budget: Option<&str>,
    k: usize,
    seed: u64,
    out: &Path,
) -> Result<()> {
    if k == 0 {
        bail!("--k must be positive");
    }
    let ls = parse_list(l, "l")?;
    let ms = parse_list(m, "m")?;
    if ls.len() != ms.len() {
        bail!("--l and --m must list the same number of points");
    }
    let budgets = match budget {
        Some(text) => {
            let b = parse_list(text, "budget")?;
            if b.len() != ls.len() {
                bail!("--budget must list the same number of points as --l");
            }
            b.into_iter().map(Some).collect()
        }
        None => vec![None; ls.len()],
    };
    let specs: Vec<AlgorithmSpec> = ls
        .iter()
        .zip(&ms)
        .zip(&budgets)
        .map(|((&l, &m), &budget)| match algo {
            Algo::Drusilla => Ok(AlgorithmSpec::Drusilla { l, m }),
            Algo::Qdafn => Ok(AlgorithmSpec::Qdafn { l, m, budget }),
            other => bail!("sweep supports drusilla and qdafn, not {}", other.name()),
        })
        .collect::<Result<_>>()?;
    let points = load_csv(data, has_header)?;
    let rows = error_runtime_sweep(
        &points,
        &specs,
        &BenchOptions {
            k,
            seed,
            trials: 1,
            angle_threshold: DEFAULT_ANGLE_THRESHOLD,
        },
    )?;
    write_atomic(out, |w| Ok(write_rows_csv(&rows, w)?))
}
