//! Approximation-guaranteed variant of the projection-table index.
//!
//! Instead of a fixed table count, construction keeps collecting tables until
//! every uncollected point has centered norm at most (epsilon/15) times the
//! largest centered norm. No angle-based retirement happens here: the
//! coverage condition is what makes the ratio bound hold. A single low-norm
//! "shrug" point is kept as a fallback candidate for queries that sit close
//! to everything stored.

use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io::{fmt_real, join_reals, parse_count, parse_real, parse_real_vec, LineReader};
use crate::neighbors::NeighborList;
use crate::points::{euclidean_unchecked, norm, CenteredPointSet, PointSet};
use crate::projection::{build_table, ProjectionTable, TableMember};

pub(crate) const MAGIC: &str = "DRUSILLA-GUARANTEED 1";

/// Projection tables with a norm-coverage guarantee and an optional shrug
/// point.
#[derive(Debug, Clone, PartialEq)]
pub struct GuaranteedIndex {
    mean: Vec<f64>,
    tables: Vec<ProjectionTable>,
    epsilon: f64,
    delta: f64,
    max_norm: f64,
    shrug: Option<TableMember>,
    m: usize,
    dim: usize,
}

/// Builds tables until every uncollected point has norm at most
/// `(epsilon / 15) * max_norm`.
///
/// Requires `0 < epsilon < 1`. The shrug point, when any point is left
/// uncollected, is the uncollected point of largest norm (ties to the
/// smaller id).
pub fn guaranteed_build(
    refs: &CenteredPointSet,
    epsilon: f64,
    m: usize,
) -> Result<GuaranteedIndex> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie strictly between 0 and 1, got {epsilon}"
        )));
    }
    if m == 0 {
        return Err(Error::InvalidParameter("table size m must be positive".into()));
    }
    let points = refs.base();
    let delta = epsilon / 15.0;
    let original_norms: Vec<f64> = points.iter().map(|(_, p)| norm(p)).collect();
    let max_norm = original_norms.iter().cloned().fold(0.0, f64::max);
    let cutoff = delta * max_norm;

    let mut norms = original_norms.clone();
    let mut tables = Vec::new();
    while norms.iter().any(|&n| n > cutoff) {
        let round = build_table(points, &mut norms, m).expect("an active point exists");
        tables.push(round.table);
    }

    // Collected points have had their norm entry zeroed; everything else is
    // uncollected (including points whose norm was zero all along).
    let collected: std::collections::HashSet<usize> = tables
        .iter()
        .flat_map(|t| t.members().iter().map(|m| m.ref_id))
        .collect();
    let shrug = (0..points.count())
        .filter(|i| !collected.contains(i))
        .max_by(|&a, &b| {
            original_norms[a]
                .partial_cmp(&original_norms[b])
                .unwrap()
                .then(b.cmp(&a))
        })
        .map(|id| TableMember {
            ref_id: id,
            coords: points.point(id).to_vec(),
        });

    Ok(GuaranteedIndex {
        mean: refs.mean().to_vec(),
        tables,
        epsilon,
        delta,
        max_norm,
        shrug,
        m,
        dim: points.dim(),
    })
}

impl GuaranteedIndex {
    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn tables(&self) -> &[ProjectionTable] {
        &self.tables
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn max_norm(&self) -> f64 {
        self.max_norm
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shrug(&self) -> Option<&TableMember> {
        self.shrug.as_ref()
    }

    /// Stored candidates including the shrug point.
    pub fn candidate_count(&self) -> usize {
        self.tables.iter().map(|t| t.len()).sum::<usize>() + usize::from(self.shrug.is_some())
    }

    /// Top-k furthest neighbors over the stored candidates, with the shrug
    /// point offered last as one extra candidate.
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
        let mut candidates: Vec<&TableMember> = self
            .tables
            .iter()
            .flat_map(|t| t.members().iter())
            .collect();
        candidates.sort_by_key(|m| m.ref_id);
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
                if let Some(shrug) = &self.shrug {
                    let d = euclidean_unchecked(&centered, &shrug.coords);
                    list.offer(shrug.ref_id, d);
                }
                list
            })
            .collect();
        Ok(results)
    }

    /// Writes the index in its versioned text format.
    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "{MAGIC}")?;
        writeln!(w, "{} {} {}", self.dim, self.m, self.tables.len())?;
        writeln!(
            w,
            "{} {} {}",
            fmt_real(self.epsilon),
            fmt_real(self.delta),
            fmt_real(self.max_norm)
        )?;
        writeln!(w, "{}", join_reals(&self.mean))?;
        match &self.shrug {
            Some(s) => writeln!(w, "shrug {} {}", s.ref_id, join_reals(&s.coords))?,
            None => writeln!(w, "shrug none")?,
        }
        for table in &self.tables {
            table.write_to(&mut w)?;
        }
        Ok(())
    }

    /// Reads an index written by [`GuaranteedIndex::write_to`].
    pub fn read_from(reader: impl BufRead) -> Result<GuaranteedIndex> {
        let mut r = LineReader::new(reader);
        let magic = r.next_line()?;
        if magic != MAGIC {
            return Err(Error::BadIndexFile(format!(
                "expected magic {MAGIC:?}, got {magic:?}"
            )));
        }
        let header = r.next_line()?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(r.parse_error("expected `dim m table_count`"));
        }
        let dim = parse_count(fields[0], r.line_number())?;
        let m = parse_count(fields[1], r.line_number())?;
        let table_count = parse_count(fields[2], r.line_number())?;
        if dim == 0 {
            return Err(r.parse_error("dimension must be positive"));
        }
        let params = r.next_line()?;
        let fields: Vec<&str> = params.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(r.parse_error("expected `epsilon delta max_norm`"));
        }
        let epsilon = parse_real(fields[0], r.line_number())?;
        let delta = parse_real(fields[1], r.line_number())?;
        let max_norm = parse_real(fields[2], r.line_number())?;
        let mean = parse_real_vec(&r.next_line()?, dim, r.line_number())?;
        let shrug_line = r.next_line()?;
        let shrug = match shrug_line
            .strip_prefix("shrug ")
            .map(str::trim)
        {
            Some("none") => None,
            Some(rest) => {
                let mut parts = rest.splitn(2, ' ');
                let ref_id = parse_count(parts.next().unwrap_or(""), r.line_number())?;
                let coords =
                    parse_real_vec(parts.next().unwrap_or(""), dim, r.line_number())?;
                Some(TableMember { ref_id, coords })
            }
            None => return Err(r.parse_error("expected a shrug line")),
        };
        let mut tables = Vec::with_capacity(table_count);
        for _ in 0..table_count {
            tables.push(ProjectionTable::read_from(&mut r, dim)?);
        }
        Ok(GuaranteedIndex {
            mean,
            tables,
            epsilon,
            delta,
            max_norm,
            shrug,
            m,
            dim,
        })
    }
}
