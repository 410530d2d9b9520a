//! Split/measure benchmark protocol: shuffle the dataset, split 70/30 into
//! references and queries, run each algorithm, and score it against the
//! brute-force oracle. Setup and search wall times are measured separately
//! and never include I/O.

use std::io::Write;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::baselines::{brute_force_search, qdafn_build};
use crate::drusilla::{drusilla_build_with_threshold, DEFAULT_ANGLE_THRESHOLD};
use crate::error::{Error, Result};
use crate::eval::approx_stats;
use crate::guaranteed::guaranteed_build;
use crate::neighbors::NeighborList;
use crate::points::{mean_center_refs, PointSet};

/// An algorithm selection with its parameters, as benchmarked.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlgorithmSpec {
    Brute,
    Drusilla { l: usize, m: usize },
    Guaranteed { epsilon: f64, m: usize },
    Qdafn { l: usize, m: usize, budget: Option<usize> },
}

impl AlgorithmSpec {
    pub fn label(&self) -> &'static str {
        match self {
            AlgorithmSpec::Brute => "brute",
            AlgorithmSpec::Drusilla { .. } => "drusilla",
            AlgorithmSpec::Guaranteed { .. } => "guaranteed",
            AlgorithmSpec::Qdafn { .. } => "qdafn",
        }
    }
}

/// Knobs shared by every benchmark run.
#[derive(Debug, Clone, Copy)]
pub struct BenchOptions {
    pub k: usize,
    /// Base seed; trial t shuffles with seed + t and also seeds QDAFN builds.
    pub seed: u64,
    pub trials: usize,
    pub angle_threshold: f64,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            k: 1,
            seed: 0,
            trials: 1,
            angle_threshold: DEFAULT_ANGLE_THRESHOLD,
        }
    }
}

/// One aggregated result row; maps onto the fixed CSV header.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgoReport {
    pub algorithm: String,
    pub l: Option<usize>,
    pub m: Option<usize>,
    pub budget: Option<usize>,
    pub setup_seconds: f64,
    pub search_seconds: f64,
    /// Mean number of candidates whose distance was evaluated per query.
    pub candidates_scanned: f64,
    pub mean_epsilon: f64,
    pub max_epsilon: f64,
    pub infinite_count: usize,
}

/// Benchmark results over all trials.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub dataset: String,
    pub count: usize,
    pub dim: usize,
    pub seed: u64,
    pub trials: usize,
    pub k: usize,
    pub rows: Vec<AlgoReport>,
}

pub const CSV_HEADER: &str = "algorithm,l,m,budget,setup_s,search_s,candidates,mean_eps,max_eps";

fn opt_column(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes rows under the fixed header. Timing columns vary run to run;
/// everything else is deterministic for fixed seeds.
pub fn write_rows_csv(rows: &[AlgoReport], mut w: impl Write) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{:.6},{:.6},{:.3},{:.9},{:.9}",
            r.algorithm,
            opt_column(r.l),
            opt_column(r.m),
            opt_column(r.budget),
            r.setup_seconds,
            r.search_seconds,
            r.candidates_scanned,
            r.mean_epsilon,
            r.max_epsilon,
        )?;
    }
    Ok(())
}

impl BenchReport {
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        write_rows_csv(&self.rows, w)
    }
}

struct TrialRow {
    setup_seconds: f64,
    search_seconds: f64,
    candidates_scanned: f64,
    mean_epsilon: f64,
    max_epsilon: f64,
    infinite_count: usize,
}

fn split(data: &PointSet, seed: u64) -> Result<(PointSet, PointSet)> {
    let n = data.count();
    let n_ref = n * 7 / 10;
    let n_query = n - n_ref;
    if n_ref == 0 || n_query == 0 {
        return Err(Error::InvalidParameter(format!(
            "dataset with {n} points is too small for a 70/30 split"
        )));
    }
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let rows =
        |slice: &[usize]| PointSet::from_rows(&slice.iter().map(|&i| data.point(i).to_vec()).collect::<Vec<_>>());
    Ok((rows(&ids[..n_ref])?, rows(&ids[n_ref..])?))
}

fn run_algorithm(
    spec: &AlgorithmSpec,
    refs: &PointSet,
    queries: &PointSet,
    oracle: &[NeighborList],
    oracle_seconds: f64,
    trial_seed: u64,
    opts: &BenchOptions,
) -> Result<TrialRow> {
    let k = opts.k;
    let (setup_seconds, search_seconds, candidates, results) = match *spec {
        AlgorithmSpec::Brute => (0.0, oracle_seconds, refs.count() as f64, oracle.to_vec()),
        AlgorithmSpec::Drusilla { l, m } => {
            let t0 = Instant::now();
            let centered = mean_center_refs(refs)?;
            let index = drusilla_build_with_threshold(&centered, l, m, opts.angle_threshold)?;
            let setup = t0.elapsed().as_secs_f64();
            let t1 = Instant::now();
            let results = index.search(queries, k)?;
            let search = t1.elapsed().as_secs_f64();
            (setup, search, index.candidate_count() as f64, results)
        }
        AlgorithmSpec::Guaranteed { epsilon, m } => {
            let t0 = Instant::now();
            let centered = mean_center_refs(refs)?;
            let index = guaranteed_build(&centered, epsilon, m)?;
            let setup = t0.elapsed().as_secs_f64();
            let t1 = Instant::now();
            let results = index.search(queries, k)?;
            let search = t1.elapsed().as_secs_f64();
            (setup, search, index.candidate_count() as f64, results)
        }
        AlgorithmSpec::Qdafn { l, m, budget } => {
            let t0 = Instant::now();
            let centered = mean_center_refs(refs)?;
            let index = qdafn_build(&centered, l, m, trial_seed)?;
            let setup = t0.elapsed().as_secs_f64();
            let budget = budget.unwrap_or_else(|| index.default_budget());
            let t1 = Instant::now();
            let (results, evals) = index.search_with_stats(queries, k, budget)?;
            let search = t1.elapsed().as_secs_f64();
            (setup, search, evals, results)
        }
    };
    let stats = approx_stats(oracle, &results)?;
    Ok(TrialRow {
        setup_seconds,
        search_seconds,
        candidates_scanned: candidates,
        mean_epsilon: stats.mean_epsilon,
        max_epsilon: stats.max_epsilon,
        infinite_count: stats.infinite_count,
    })
}

/// Runs every algorithm over `trials` random 70/30 splits and reports
/// per-algorithm means across trials.
pub fn bench(
    data: &PointSet,
    algorithms: &[AlgorithmSpec],
    opts: &BenchOptions,
) -> Result<BenchReport> {
    if algorithms.is_empty() {
        return Err(Error::InvalidParameter("no algorithms selected".into()));
    }
    if opts.trials == 0 || opts.k == 0 {
        return Err(Error::InvalidParameter(
            "trials and k must be positive".into(),
        ));
    }

    let mut sums: Vec<TrialRow> = algorithms
        .iter()
        .map(|_| TrialRow {
            setup_seconds: 0.0,
            search_seconds: 0.0,
            candidates_scanned: 0.0,
            mean_epsilon: 0.0,
            max_epsilon: 0.0,
            infinite_count: 0,
        })
        .collect();

    for trial in 0..opts.trials {
        let trial_seed = opts.seed + trial as u64;
        let (refs, queries) = split(data, trial_seed)?;
        let t0 = Instant::now();
        let oracle = brute_force_search(&refs, &queries, opts.k)?;
        let oracle_seconds = t0.elapsed().as_secs_f64();
        for (spec, sum) in algorithms.iter().zip(&mut sums) {
            let row = run_algorithm(spec, &refs, &queries, &oracle, oracle_seconds, trial_seed, opts)?;
            sum.setup_seconds += row.setup_seconds;
            sum.search_seconds += row.search_seconds;
            sum.candidates_scanned += row.candidates_scanned;
            sum.mean_epsilon += row.mean_epsilon;
            sum.max_epsilon += row.max_epsilon;
            sum.infinite_count += row.infinite_count;
        }
    }

    let t = opts.trials as f64;
    let rows = algorithms
        .iter()
        .zip(sums)
        .map(|(spec, sum)| {
            let (l, m, budget) = match *spec {
                AlgorithmSpec::Brute => (None, None, None),
                AlgorithmSpec::Drusilla { l, m } => (Some(l), Some(m), None),
                AlgorithmSpec::Guaranteed { m, .. } => (None, Some(m), None),
                AlgorithmSpec::Qdafn { l, m, budget } => {
                    (Some(l), Some(m), Some(budget.unwrap_or(l + m)))
                }
            };
            AlgoReport {
                algorithm: spec.label().to_string(),
                l,
                m,
                budget,
                setup_seconds: sum.setup_seconds / t,
                search_seconds: sum.search_seconds / t,
                candidates_scanned: sum.candidates_scanned / t,
                mean_epsilon: sum.mean_epsilon / t,
                max_epsilon: sum.max_epsilon / t,
                infinite_count: sum.infinite_count,
            }
        })
        .collect();

    Ok(BenchReport {
        dataset: format!("{}x{}", data.count(), data.dim()),
        count: data.count(),
        dim: data.dim(),
        seed: opts.seed,
        trials: opts.trials,
        k: opts.k,
        rows,
    })
}

/// One single-trial bench per sweep point, rows sorted by search time.
pub fn error_runtime_sweep(
    data: &PointSet,
    points: &[AlgorithmSpec],
    opts: &BenchOptions,
) -> Result<Vec<AlgoReport>> {
    if points.is_empty() {
        return Err(Error::InvalidParameter("empty sweep".into()));
    }
    let single = BenchOptions {
        trials: 1,
        ..*opts
    };
    let mut rows = Vec::with_capacity(points.len());
    for point in points {
        let report = bench(data, std::slice::from_ref(point), &single)?;
        rows.extend(report.rows);
    }
    rows.sort_by(|a, b| a.search_seconds.total_cmp(&b.search_seconds));
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::gen_uniform_ball;

    #[test]
    fn brute_rows_report_zero_error() {
        let data = gen_uniform_ball(100, 4, 1);
        let report = bench(
            &data,
            &[AlgorithmSpec::Brute, AlgorithmSpec::Drusilla { l: 3, m: 2 }],
            &BenchOptions {
                trials: 2,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(report.rows.len(), 2);
        assert_eq!(report.rows[0].algorithm, "brute");
        assert_eq!(report.rows[0].mean_epsilon, 0.0);
        assert_eq!(report.rows[0].max_epsilon, 0.0);
        assert_eq!(report.rows[0].candidates_scanned, 70.0);
        assert!(report.rows[1].mean_epsilon >= 0.0);
    }

    #[test]
    fn non_timing_fields_are_deterministic() {
        let data = gen_uniform_ball(200, 5, 3);
        let opts = BenchOptions {
            k: 2,
            seed: 9,
            trials: 2,
            ..Default::default()
        };
        let specs = [
            AlgorithmSpec::Drusilla { l: 4, m: 2 },
            AlgorithmSpec::Qdafn { l: 4, m: 4, budget: None },
            AlgorithmSpec::Guaranteed { epsilon: 0.5, m: 2 },
        ];
        let a = bench(&data, &specs, &opts).unwrap();
        let b = bench(&data, &specs, &opts).unwrap();
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert_eq!(x.candidates_scanned, y.candidates_scanned);
            assert_eq!(x.mean_epsilon, y.mean_epsilon);
            assert_eq!(x.max_epsilon, y.max_epsilon);
            assert_eq!(x.infinite_count, y.infinite_count);
        }
    }

    // At the classic uniform-data settings, the data-dependent index scans
    // exactly l*m = 10 points per query while QDAFN at l = m = 15 stores 225.
    #[test]
    fn candidate_counts_at_reference_parameters() {
        let data = gen_uniform_ball(2_000, 10, 17);
        let report = bench(
            &data,
            &[
                AlgorithmSpec::Drusilla { l: 5, m: 2 },
                AlgorithmSpec::Qdafn { l: 15, m: 15, budget: Some(225) },
            ],
            &BenchOptions::default(),
        )
        .unwrap();
        assert_eq!(report.rows[0].candidates_scanned, 10.0);
        let stored = 15.0 * 15.0;
        assert!(report.rows[1].candidates_scanned <= stored);
        assert!(
            report.rows[0].candidates_scanned < stored,
            "the data-dependent index should inspect far fewer points"
        );
    }

    #[test]
    fn dataset_too_small_to_split_is_rejected() {
        let data = gen_uniform_ball(1, 3, 0);
        assert!(bench(&data, &[AlgorithmSpec::Brute], &BenchOptions::default()).is_err());
    }

    #[test]
    fn empty_algorithm_list_is_rejected() {
        let data = gen_uniform_ball(10, 3, 0);
        assert!(bench(&data, &[], &BenchOptions::default()).is_err());
    }

    #[test]
    fn sweep_with_one_point_equals_a_single_bench_row() {
        let data = gen_uniform_ball(120, 4, 7);
        let opts = BenchOptions::default();
        let spec = AlgorithmSpec::Drusilla { l: 2, m: 2 };
        let sweep = error_runtime_sweep(&data, &[spec], &opts).unwrap();
        assert_eq!(sweep.len(), 1);
        let single = bench(&data, &[spec], &opts).unwrap();
        assert_eq!(sweep[0].mean_epsilon, single.rows[0].mean_epsilon);
        assert_eq!(sweep[0].candidates_scanned, single.rows[0].candidates_scanned);
    }

    #[test]
    fn sweep_row_count_matches_points_and_rejects_empty() {
        let data = gen_uniform_ball(120, 4, 7);
        let opts = BenchOptions::default();
        let specs = [
            AlgorithmSpec::Drusilla { l: 1, m: 1 },
            AlgorithmSpec::Drusilla { l: 2, m: 1 },
            AlgorithmSpec::Drusilla { l: 4, m: 1 },
        ];
        let rows = error_runtime_sweep(&data, &specs, &opts).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(error_runtime_sweep(&data, &[], &opts).is_err());
    }

    #[test]
    fn csv_has_fixed_header_and_one_line_per_row() {
        let data = gen_uniform_ball(50, 3, 2);
        let report = bench(
            &data,
            &[AlgorithmSpec::Brute, AlgorithmSpec::Qdafn { l: 2, m: 3, budget: None }],
            &BenchOptions::default(),
        )
        .unwrap();
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 3);
        assert!(lines[2].starts_with("qdafn,2,3,5,"), "unexpected row: {}", lines[2]);
    }
}
