//! Exact brute-force search and the QDAFN random-projection baseline.
//!
//! Brute force is the ground-truth oracle: every reference point is examined
//! for every query. QDAFN stores, per random unit direction, the m reference
//! points with the largest signed projections; a query drains a priority
//! queue keyed by (stored projection - direction . query), evaluating true
//! distances until a budget of evaluations is spent.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};
use std::io::{BufRead, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gen::unit_direction;
use crate::io::{fmt_real, join_reals, parse_count, parse_real, parse_real_vec, LineReader};
use crate::neighbors::NeighborList;
use crate::points::{dot, euclidean_unchecked, norm, CenteredPointSet, PointSet};

pub(crate) const QDAFN_MAGIC: &str = "QDAFN-INDEX 1";

/// Exact top-k furthest neighbors of every query by full scan.
pub fn brute_force_search(
    refs: &PointSet,
    queries: &PointSet,
    k: usize,
) -> Result<Vec<NeighborList>> {
    if refs.is_empty() {
        return Err(Error::EmptyInput("reference set has no points".into()));
    }
    if refs.dim() != queries.dim() {
        return Err(Error::DimensionMismatch {
            expected: refs.dim(),
            actual: queries.dim(),
        });
    }
    if k == 0 {
        return Err(Error::InvalidParameter("k must be positive".into()));
    }
    let results = (0..queries.count())
        .into_par_iter()
        .map(|qid| {
            let q = queries.point(qid);
            let mut list = NeighborList::new(qid, k);
            for (rid, r) in refs.iter() {
                list.offer(rid, euclidean_unchecked(q, r));
            }
            list
        })
        .collect();
    Ok(results)
}

/// One stored candidate of a QDAFN projection list.
#[derive(Debug, Clone, PartialEq)]
pub struct QdafnEntry {
    pub ref_id: usize,
    pub coords: Vec<f64>,
    pub projection: f64,
}

/// Random-projection index: per direction, the points with the largest
/// signed projections, kept in descending projection order.
#[derive(Debug, Clone, PartialEq)]
pub struct QdafnIndex {
    mean: Vec<f64>,
    directions: Vec<Vec<f64>>,
    stored: Vec<Vec<QdafnEntry>>,
    l: usize,
    m: usize,
    seed: u64,
    dim: usize,
}

/// Builds a QDAFN index with `l` directions drawn uniformly on the unit
/// sphere (deterministic per seed) and `m` stored points per direction.
pub fn qdafn_build(
    refs: &CenteredPointSet,
    l: usize,
    m: usize,
    seed: u64,
) -> Result<QdafnIndex> {
    if l == 0 || m == 0 {
        return Err(Error::InvalidParameter(
            "direction count l and list size m must be positive".into(),
        ));
    }
    let points = refs.base();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let directions: Vec<Vec<f64>> = (0..l).map(|_| unit_direction(&mut rng, points.dim())).collect();
    let stored = directions
        .iter()
        .map(|v| {
            let mut projected: Vec<(usize, f64)> = points
                .iter()
                .map(|(id, p)| (id, dot(p, v)))
                .collect();
            projected.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
            projected
                .into_iter()
                .take(m)
                .map(|(id, projection)| QdafnEntry {
                    ref_id: id,
                    coords: points.point(id).to_vec(),
                    projection,
                })
                .collect()
        })
        .collect();
    Ok(QdafnIndex {
        mean: refs.mean().to_vec(),
        directions,
        stored,
        l,
        m,
        seed,
        dim: points.dim(),
    })
}

/// Priority-queue entry: max-heap on the key, ties popped in ascending
/// `tie` order, then by direction and position for a total order.
struct QueueItem {
    key: f64,
    tie: u64,
    dir: usize,
    idx: usize,
}

impl PartialEq for QueueItem {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for QueueItem {}

impl PartialOrd for QueueItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QueueItem {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key
            .total_cmp(&other.key)
            .then_with(|| other.tie.cmp(&self.tie))
            .then_with(|| other.dir.cmp(&self.dir))
            .then_with(|| other.idx.cmp(&self.idx))
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

#[derive(Clone, Copy)]
enum TieOrder {
    ByDirection,
    Seeded(u64),
}

impl TieOrder {
    fn tie(self, dir: usize) -> u64 {
        match self {
            TieOrder::ByDirection => dir as u64,
            TieOrder::Seeded(seed) => splitmix64(seed ^ dir as u64),
        }
    }
}

impl QdafnIndex {
    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn directions(&self) -> &[Vec<f64>] {
        &self.directions
    }

    pub fn stored(&self) -> &[Vec<QdafnEntry>] {
        &self.stored
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Default evaluation budget, matching the l + m cost shape.
    pub fn default_budget(&self) -> usize {
        self.l + self.m
    }

    /// Top-k furthest neighbors per query within `budget` distance
    /// evaluations. A point popped from several directions is evaluated and
    /// charged against the budget only once.
    pub fn search(&self, queries: &PointSet, k: usize, budget: usize) -> Result<Vec<NeighborList>> {
        Ok(self
            .search_driver(queries, k, budget, TieOrder::ByDirection)?
            .0)
    }

    /// Like [`QdafnIndex::search`] but also reports the mean number of
    /// distance evaluations per query.
    pub fn search_with_stats(
        &self,
        queries: &PointSet,
        k: usize,
        budget: usize,
    ) -> Result<(Vec<NeighborList>, f64)> {
        self.search_driver(queries, k, budget, TieOrder::ByDirection)
    }

    /// Search with a seeded permutation of equal-key pops. With a budget of
    /// at least l*m every stored candidate is evaluated, so the returned
    /// distances do not depend on the seed.
    pub fn search_with_queue_seed(
        &self,
        queries: &PointSet,
        k: usize,
        budget: usize,
        queue_seed: u64,
    ) -> Result<Vec<NeighborList>> {
        Ok(self
            .search_driver(queries, k, budget, TieOrder::Seeded(queue_seed))?
            .0)
    }

    fn search_driver(
        &self,
        queries: &PointSet,
        k: usize,
        budget: usize,
        order: TieOrder,
    ) -> Result<(Vec<NeighborList>, f64)> {
        if queries.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: queries.dim(),
            });
        }
        if k == 0 || budget == 0 {
            return Err(Error::InvalidParameter(
                "k and budget must be positive".into(),
            ));
        }
        if self.stored.iter().all(|s| s.is_empty()) {
            return Err(Error::EmptyIndex);
        }
        let per_query: Vec<(NeighborList, usize)> = (0..queries.count())
            .into_par_iter()
            .map(|qid| self.search_one(qid, queries.point(qid), k, budget, order))
            .collect();
        let total_evals: usize = per_query.iter().map(|(_, e)| e).sum();
        let mean_evals = total_evals as f64 / queries.count().max(1) as f64;
        Ok((per_query.into_iter().map(|(l, _)| l).collect(), mean_evals))
    }

    fn search_one(
        &self,
        qid: usize,
        query: &[f64],
        k: usize,
        budget: usize,
        order: TieOrder,
    ) -> (NeighborList, usize) {
        let centered: Vec<f64> = query.iter().zip(&self.mean).map(|(&x, &m)| x - m).collect();
        let query_projections: Vec<f64> =
            self.directions.iter().map(|v| dot(v, &centered)).collect();

        let mut heap = BinaryHeap::with_capacity(self.l);
        for (dir, entries) in self.stored.iter().enumerate() {
            if !entries.is_empty() {
                heap.push(QueueItem {
                    key: entries[0].projection - query_projections[dir],
                    tie: order.tie(dir),
                    dir,
                    idx: 0,
                });
            }
        }

        let mut list = NeighborList::new(qid, k);
        let mut seen = HashSet::new();
        let mut evals = 0usize;
        while evals < budget {
            let Some(item) = heap.pop() else {
                break;
            };
            let entries = &self.stored[item.dir];
            if item.idx + 1 < entries.len() {
                heap.push(QueueItem {
                    key: entries[item.idx + 1].projection - query_projections[item.dir],
                    tie: order.tie(item.dir),
                    dir: item.dir,
                    idx: item.idx + 1,
                });
            }
            let entry = &entries[item.idx];
            if seen.insert(entry.ref_id) {
                let d = euclidean_unchecked(&centered, &entry.coords);
                evals += 1;
                list.offer(entry.ref_id, d);
            }
        }
        (list, evals)
    }

    /// Writes the index in its versioned text format.
    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "{QDAFN_MAGIC}")?;
        writeln!(w, "{} {} {} {}", self.dim, self.l, self.m, self.seed)?;
        writeln!(w, "{}", join_reals(&self.mean))?;
        for (direction, entries) in self.directions.iter().zip(&self.stored) {
            writeln!(w, "{}", join_reals(direction))?;
            writeln!(w, "{}", entries.len())?;
            for e in entries {
                writeln!(
                    w,
                    "{} {} {}",
                    e.ref_id,
                    fmt_real(e.projection),
                    join_reals(&e.coords)
                )?;
            }
        }
        Ok(())
    }

    /// Reads an index written by [`QdafnIndex::write_to`].
    pub fn read_from(reader: impl BufRead) -> Result<QdafnIndex> {
        let mut r = LineReader::new(reader);
        let magic = r.next_line()?;
        if magic != QDAFN_MAGIC {
            return Err(Error::BadIndexFile(format!(
                "expected magic {QDAFN_MAGIC:?}, got {magic:?}"
            )));
        }
        let header = r.next_line()?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(r.parse_error("expected `dim l m seed`"));
        }
        let dim = parse_count(fields[0], r.line_number())?;
        let l = parse_count(fields[1], r.line_number())?;
        let m = parse_count(fields[2], r.line_number())?;
        let seed: u64 = fields[3]
            .parse()
            .map_err(|_| r.parse_error("seed must be a non-negative integer"))?;
        if dim == 0 {
            return Err(r.parse_error("dimension must be positive"));
        }
        let mean = parse_real_vec(&r.next_line()?, dim, r.line_number())?;
        let mut directions = Vec::with_capacity(l);
        let mut stored = Vec::with_capacity(l);
        for _ in 0..l {
            let direction = parse_real_vec(&r.next_line()?, dim, r.line_number())?;
            if (norm(&direction) - 1.0).abs() > 1e-9 {
                return Err(Error::BadIndexFile(format!(
                    "direction at line {} is not a unit vector",
                    r.line_number()
                )));
            }
            let count = parse_count(r.next_line()?.trim(), r.line_number())?;
            let mut entries = Vec::with_capacity(count);
            for _ in 0..count {
                let line = r.next_line()?;
                let mut parts = line.splitn(3, ' ');
                let ref_id = parse_count(parts.next().unwrap_or(""), r.line_number())?;
                let projection = parse_real(parts.next().unwrap_or(""), r.line_number())?;
                let coords =
                    parse_real_vec(parts.next().unwrap_or(""), dim, r.line_number())?;
                entries.push(QdafnEntry {
                    ref_id,
                    coords,
                    projection,
                });
            }
            directions.push(direction);
            stored.push(entries);
        }
        Ok(QdafnIndex {
            mean,
            directions,
            stored,
            l,
            m,
            seed,
            dim,
        })
    }
}
