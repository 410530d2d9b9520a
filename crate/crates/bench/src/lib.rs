//! Benchmark-only crate; see the `benches/` directory.
//!
//! Shared fixtures for the criterion targets live here.

use farhash::{gen_uniform_cube, mean_center, CenteredPointSet, PointSet};

/// Standard fixture: uniform-cube data with a held-out query set.
pub fn fixture(n: usize, d: usize, queries: usize) -> (PointSet, PointSet, CenteredPointSet) {
    let refs = gen_uniform_cube(n, d, 42);
    let query_set = gen_uniform_cube(queries, d, 43);
    let (centered_refs, _) = mean_center(&refs, &query_set).expect("matching dimensions");
    (refs, query_set, centered_refs)
}
