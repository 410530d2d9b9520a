//! Data-dependent projection hashing for approximate furthest neighbors.
//!
//! Tables are built greedily: the largest-norm point still in play becomes a
//! table's basis direction, the top-m points by score join that table, and
//! points nearly collinear with the basis (angle below the threshold) are
//! dropped from future rounds so later bases cannot be too similar. Search is
//! a plain scan over everything the tables stored.

use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io::{join_reals, parse_count, parse_real_vec, LineReader};
use crate::neighbors::NeighborList;
use crate::points::{euclidean_unchecked, CenteredPointSet, PointSet};
use crate::projection::{build_table, ProjectionTable, TableMember};

/// Angle threshold below which an uncollected point is considered
/// well-represented by the current basis and retired.
pub const DEFAULT_ANGLE_THRESHOLD: f64 = std::f64::consts::FRAC_PI_8;

pub(crate) const MAGIC: &str = "DRUSILLA-INDEX 1";

/// Projection tables over a mean-centered reference set.
#[derive(Debug, Clone, PartialEq)]
pub struct DrusillaIndex {
    mean: Vec<f64>,
    tables: Vec<ProjectionTable>,
    l: usize,
    m: usize,
    dim: usize,
}

/// Builds an index with the default angle threshold.
pub fn drusilla_build(refs: &CenteredPointSet, l: usize, m: usize) -> Result<DrusillaIndex> {
    drusilla_build_with_threshold(refs, l, m, DEFAULT_ANGLE_THRESHOLD)
}

/// Builds up to `l` tables of `m` candidates each from a centered reference
/// set. Construction is deterministic; it stops early once every point has
/// been collected or retired.
pub fn drusilla_build_with_threshold(
    refs: &CenteredPointSet,
    l: usize,
    m: usize,
    angle_threshold: f64,
) -> Result<DrusillaIndex> {
    if l == 0 || m == 0 {
        return Err(Error::InvalidParameter(
            "table count l and table size m must be positive".into(),
        ));
    }
    let points = refs.base();
    let mut norms: Vec<f64> = points.iter().map(|(_, p)| crate::points::norm(p)).collect();

    let mut tables = Vec::new();
    for _ in 0..l {
        let Some(round) = build_table(points, &mut norms, m) else {
            break;
        };
        // Points well-represented by this basis but not collected are out of
        // play for every later table.
        for &(id, stats) in &round.scored {
            if norms[id] > 0.0 && stats.angle() < angle_threshold {
                norms[id] = 0.0;
            }
        }
        tables.push(round.table);
    }

    Ok(DrusillaIndex {
        mean: refs.mean().to_vec(),
        tables,
        l,
        m,
        dim: points.dim(),
    })
}

impl DrusillaIndex {
    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn tables(&self) -> &[ProjectionTable] {
        &self.tables
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Requested table count.
    pub fn l(&self) -> usize {
        self.l
    }

    /// Requested table size.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Total number of stored candidates across all tables.
    pub fn candidate_count(&self) -> usize {
        self.tables.iter().map(|t| t.len()).sum()
    }

    /// Stored candidates flattened and ordered by ref id, so distance ties
    /// resolve to the smaller id during the scan.
    pub(crate) fn sorted_candidates(&self) -> Vec<&TableMember> {
        let mut all: Vec<&TableMember> = self
            .tables
            .iter()
            .flat_map(|t| t.members().iter())
            .collect();
        all.sort_by_key(|m| m.ref_id);
        all
    }

    /// Top-k furthest neighbors for each query over the stored candidates.
    ///
    /// Queries are given in the original space; the index's mean is subtracted
    /// before distances are taken, which leaves distances unchanged.
    pub fn search(&self, queries: &PointSet, k: usize) -> Result<Vec<NeighborList>> {
        if queries.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: queries.dim(),
            });
        }
        if k == 0 {
            return Err(Error::InvalidParameter("k must be positive".into()));
        }
        if self.tables.is_empty() {
            return Err(Error::EmptyIndex);
        }
        let candidates = self.sorted_candidates();
        let results = (0..queries.count())
            .into_par_iter()
            .map(|qid| {
                let centered: Vec<f64> = queries
                    .point(qid)
                    .iter()
                    .zip(&self.mean)
                    .map(|(&x, &m)| x - m)
                    .collect();
                let mut list = NeighborList::new(qid, k);
                for member in &candidates {
                    let d = euclidean_unchecked(&centered, &member.coords);
                    list.offer(member.ref_id, d);
                }
                list
            })
            .collect();
        Ok(results)
    }

    /// Writes the index in its versioned text format.
    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "{MAGIC}")?;
        writeln!(w, "{} {} {} {}", self.dim, self.l, self.m, self.tables.len())?;
        writeln!(w, "{}", join_reals(&self.mean))?;
        for table in &self.tables {
            table.write_to(&mut w)?;
        }
        Ok(())
    }

    /// Reads an index written by [`DrusillaIndex::write_to`].
    pub fn read_from(reader: impl BufRead) -> Result<DrusillaIndex> {
        let mut r = LineReader::new(reader);
        let magic = r.next_line()?;
        if magic != MAGIC {
            return Err(Error::BadIndexFile(format!(
                "expected magic {MAGIC:?}, got {magic:?}"
            )));
        }
        let header = r.next_line()?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(r.parse_error("expected `dim l m table_count`"));
        }
        let dim = parse_count(fields[0], r.line_number())?;
        let l = parse_count(fields[1], r.line_number())?;
        let m = parse_count(fields[2], r.line_number())?;
        let table_count = parse_count(fields[3], r.line_number())?;
        if dim == 0 {
            return Err(r.parse_error("dimension must be positive"));
        }
        let mean = parse_real_vec(&r.next_line()?, dim, r.line_number())?;
        let mut tables = Vec::with_capacity(table_count);
        for _ in 0..table_count {
            tables.push(ProjectionTable::read_from(&mut r, dim)?);
        }
        Ok(DrusillaIndex {
            mean,
            tables,
            l,
            m,
            dim,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::brute_force_search;
    use crate::points::{mean_center, norm, PointSet};
    use crate::projection::ProjectionStats;

    /// The worked 4-point set: mean is already zero.
    fn four_points() -> PointSet {
        PointSet::from_rows(&[
            vec![6.0, 0.0],
            vec![-2.0, 1.0],
            vec![-2.0, -1.0],
            vec![-2.0, 0.0],
        ])
        .unwrap()
    }

    fn centered(points: &PointSet) -> CenteredPointSet {
        crate::points::mean_center_refs(points).unwrap()
    }

    /// Exhaustive oracle for a single round: scores every active point by
    /// definition and picks the top-m by (score desc, id asc).
    fn score_oracle(points: &PointSet, active: &[bool], m: usize) -> Vec<usize> {
        let pivot = (0..points.count())
            .filter(|&i| active[i] && norm(points.point(i)) > 0.0)
            .min_by(|&a, &b| {
                norm(points.point(b))
                    .partial_cmp(&norm(points.point(a)))
                    .unwrap()
                    .then(a.cmp(&b))
            })
            .unwrap();
        let pn = norm(points.point(pivot));
        let basis: Vec<f64> = points.point(pivot).iter().map(|&x| x / pn).collect();
        let mut scored: Vec<(usize, f64)> = (0..points.count())
            .filter(|&i| active[i] && norm(points.point(i)) > 0.0)
            .map(|i| (i, ProjectionStats::compute(points.point(i), &basis).score))
            .collect();
        scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        scored.into_iter().take(m).map(|(i, _)| i).collect()
    }

    fn member_ids(table: &ProjectionTable) -> Vec<usize> {
        table.members().iter().map(|m| m.ref_id).collect()
    }

    #[test]
    fn single_table_build_matches_hand_trace() {
        let refs = centered(&four_points());
        let index = drusilla_build(&refs, 1, 2).unwrap();
        assert_eq!(index.tables().len(), 1);
        assert_eq!(index.tables()[0].basis(), &[1.0, 0.0]);
        assert_eq!(member_ids(&index.tables()[0]), vec![0, 3]);
        assert_eq!(
            member_ids(&index.tables()[0]),
            score_oracle(refs.base(), &[true; 4], 2)
        );
    }

    #[test]
    fn second_table_picks_next_pivot_by_norm_then_id() {
        let refs = centered(&four_points());
        let index = drusilla_build(&refs, 2, 2).unwrap();
        assert_eq!(index.tables().len(), 2);
        // p1 and p2 both have norm sqrt(5); the tie goes to p1. Their angles
        // against the first basis are atan(1/2), above pi/8, so both stayed
        // eligible.
        assert_eq!(member_ids(&index.tables()[1]), vec![1, 2]);
        let active = [false, true, true, false];
        assert_eq!(
            member_ids(&index.tables()[1]),
            score_oracle(refs.base(), &active, 2)
        );
    }

    #[test]
    fn search_returns_worked_example_distances() {
        let refs = centered(&four_points());
        let index = drusilla_build(&refs, 1, 2).unwrap();

        let q1 = PointSet::from_rows(&[vec![0.0, 10.0]]).unwrap();
        let r1 = index.search(&q1, 1).unwrap();
        assert_eq!(r1[0].entries()[0].ref_id, 0);
        assert!((r1[0].entries()[0].distance - 136.0_f64.sqrt()).abs() < 1e-12);

        // Candidates are p0 (distance 0) and p3 (distance 8); the true
        // furthest neighbor p1 sits at sqrt(65).
        let q2 = PointSet::from_rows(&[vec![6.0, 0.0]]).unwrap();
        let r2 = index.search(&q2, 1).unwrap();
        assert_eq!(r2[0].entries()[0].ref_id, 3);
        assert_eq!(r2[0].entries()[0].distance, 8.0);
        let truth = brute_force_search(&four_points(), &q2, 1).unwrap();
        assert!((truth[0].entries()[0].distance - 65.0_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn full_coverage_search_equals_brute_force() {
        let points = crate::gen::gen_uniform_ball(80, 4, 11);
        let queries = crate::gen::gen_uniform_ball(12, 4, 12);
        let (refs, _) = mean_center(&points, &queries).unwrap();
        // m = n in a single table collects every scored point.
        let index = drusilla_build(&refs, 1, points.count()).unwrap();
        assert_eq!(index.candidate_count(), points.count());
        for k in [1, 3] {
            let approx = index.search(&queries, k).unwrap();
            let exact = brute_force_search(&points, &queries, k).unwrap();
            for (a, e) in approx.iter().zip(&exact) {
                assert_eq!(a.len(), e.len());
                for (an, en) in a.entries().iter().zip(e.entries()) {
                    assert_eq!(an.ref_id, en.ref_id);
                    assert!((an.distance - en.distance).abs() <= 1e-9 * en.distance.max(1.0));
                }
            }
        }
    }

    #[test]
    fn oversized_k_returns_every_stored_candidate() {
        let refs = centered(&four_points());
        let index = drusilla_build(&refs, 1, 2).unwrap();
        let queries = PointSet::from_rows(&[vec![0.0, 10.0]]).unwrap();
        let out = index.search(&queries, 100).unwrap();
        assert_eq!(out[0].len(), index.candidate_count());
        assert!(index.search(&PointSet::from_rows(&[vec![1.0]]).unwrap(), 1).is_err());
    }

    #[test]
    fn zero_norm_reference_set_builds_no_tables() {
        let points = PointSet::from_rows(&[vec![2.0, 2.0], vec![2.0, 2.0]]).unwrap();
        let refs = centered(&points);
        let index = drusilla_build(&refs, 3, 2).unwrap();
        assert_eq!(index.tables().len(), 0);
        let queries = PointSet::from_rows(&[vec![0.0, 0.0]]).unwrap();
        assert!(matches!(index.search(&queries, 1), Err(Error::EmptyIndex)));
    }

    #[test]
    fn zero_parameters_are_rejected() {
        let refs = centered(&four_points());
        assert!(drusilla_build(&refs, 0, 2).is_err());
        assert!(drusilla_build(&refs, 2, 0).is_err());
    }

    #[test]
    fn angle_discard_retires_collinear_points() {
        // Round 1 pivots on p0 = (8,0). The other axis points p1, p2, p3 are
        // collinear with it (angle 0) and m = 1 only collects the pivot, so
        // they are retired and can never appear in a later table. The
        // orthogonal points p4, p5 (angle pi/2) stay eligible.
        let points = PointSet::from_rows(&[
            vec![8.0, 0.0],
            vec![4.0, 0.0],
            vec![-4.0, 0.0],
            vec![-8.0, 0.0],
            vec![0.0, 5.0],
            vec![0.0, -5.0],
        ])
        .unwrap();
        let refs = centered(&points);
        let index = drusilla_build(&refs, 6, 1).unwrap();
        let stored: Vec<usize> = index
            .tables()
            .iter()
            .flat_map(|t| t.members().iter().map(|m| m.ref_id))
            .collect();
        assert_eq!(stored, vec![0, 4], "expected only the two pivots stored");
    }

    #[test]
    fn tables_never_share_members() {
        let points = crate::gen::gen_uniform_ball(200, 6, 5);
        let refs = centered(&points);
        let index = drusilla_build(&refs, 10, 4).unwrap();
        let mut seen = std::collections::HashSet::new();
        for table in index.tables() {
            for m in table.members() {
                assert!(seen.insert(m.ref_id), "id {} stored twice", m.ref_id);
            }
        }
    }

    #[test]
    fn pivot_attains_maximal_score_in_its_table() {
        let points = crate::gen::gen_uniform_ball(150, 5, 9);
        let refs = centered(&points);
        let index = drusilla_build(&refs, 8, 5).unwrap();
        for table in index.tables() {
            let best = table
                .members()
                .iter()
                .map(|m| ProjectionStats::compute(&m.coords, table.basis()).score)
                .fold(f64::NEG_INFINITY, f64::max);
            let first = ProjectionStats::compute(&table.members()[0].coords, table.basis());
            assert!(first.score >= best - 1e-12);
            assert!(first.distortion.abs() < 1e-9, "pivot is not on the basis line");
        }
    }

    #[test]
    fn candidate_count_is_monotone_in_l() {
        let points = crate::gen::gen_uniform_ball(120, 4, 21);
        let refs = centered(&points);
        let mut last = 0;
        for l in 1..12 {
            let count = drusilla_build(&refs, l, 3).unwrap().candidate_count();
            assert!(count >= last, "candidate count dropped at l={l}");
            last = count;
        }
    }

    #[test]
    fn build_is_deterministic() {
        let points = crate::gen::gen_uniform_ball(100, 5, 77);
        let refs = centered(&points);
        let a = drusilla_build(&refs, 6, 3).unwrap();
        let b = drusilla_build(&refs, 6, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn serialization_round_trips() {
        let points = crate::gen::gen_uniform_ball(60, 3, 8);
        let refs = centered(&points);
        let index = drusilla_build(&refs, 4, 2).unwrap();
        let mut buf = Vec::new();
        index.write_to(&mut buf).unwrap();
        let back = DrusillaIndex::read_from(buf.as_slice()).unwrap();
        assert_eq!(back, index);
    }

    #[test]
    fn loader_rejects_unknown_magic() {
        let err = DrusillaIndex::read_from("NOT-AN-INDEX 9\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::BadIndexFile(_)));
    }
}
