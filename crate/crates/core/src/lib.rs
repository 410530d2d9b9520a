//! Furthest-neighbor search with data-dependent projection hashing.
//!
//! The main index picks projection bases from the data itself: the
//! mean-centered point of largest norm anchors each table, nearby-in-angle
//! high-norm points fill it, and queries scan only the few stored candidates.
//! A guaranteed variant keeps collecting tables until a provable
//! approximation ratio holds. Exact brute force and a random-projection
//! baseline (QDAFN) are included for comparison, along with a benchmark
//! harness and a rank-vs-norm analysis.
//!
//! ```
//! use farhash::{drusilla_build, gen_uniform_ball, mean_center};
//!
//! let data = gen_uniform_ball(1000, 10, 7);
//! let queries = gen_uniform_ball(10, 10, 8);
//! let (refs, _) = mean_center(&data, &queries).unwrap();
//! let index = drusilla_build(&refs, 5, 2).unwrap();
//! let results = index.search(&queries, 1).unwrap();
//! assert_eq!(results.len(), 10);
//! ```

pub mod baselines;
pub mod bench;
pub mod drusilla;
pub mod error;
pub mod eval;
pub mod gen;
pub mod io;
pub mod neighbors;
pub mod points;
pub mod projection;

pub mod guaranteed;

pub use baselines::{brute_force_search, qdafn_build, QdafnEntry, QdafnIndex};
pub use bench::{
    bench, error_runtime_sweep, write_rows_csv, AlgoReport, AlgorithmSpec, BenchOptions,
    BenchReport, CSV_HEADER,
};
pub use drusilla::{
    drusilla_build, drusilla_build_with_threshold, DrusillaIndex, DEFAULT_ANGLE_THRESHOLD,
};
pub use error::{Error, Result};
pub use eval::{approx_stats, rank_analysis, spearman, ApproxStats, RankRecord};
pub use gen::{gen_anisotropic_gaussian, gen_gaussian_mixture, gen_uniform_ball, gen_uniform_cube};
pub use guaranteed::{guaranteed_build, GuaranteedIndex};
pub use io::{fmt_real, read_any_index, AnyIndex};
pub use neighbors::{Neighbor, NeighborList};
pub use points::{
    euclidean, euclidean_unchecked, load_points, mean_center, mean_center_refs, norm, save_points,
    CenteredPointSet, PointSet,
};
pub use projection::{projection_stats, ProjectionStats, ProjectionTable, TableMember};
