//! Offset/distortion scoring against a unit basis, and the shared
//! pivot-selection step that turns scores into a candidate table.

use std::io::Write;

use crate::error::{Error, Result};
use crate::io::{join_reals, parse_count, parse_real_vec, LineReader};
use crate::points::{norm, PointSet};

/// Decomposition of a point against a unit basis vector.
///
/// `offset` is the signed length of the projection onto the basis,
/// `distortion` the distance from the point to that projection, and
/// `score = |offset| - distortion` trades a large norm against good
/// alignment with the basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionStats {
    pub offset: f64,
    pub distortion: f64,
    pub score: f64,
}

impl ProjectionStats {
    pub(crate) fn compute(p: &[f64], v: &[f64]) -> ProjectionStats {
        debug_assert_eq!(p.len(), v.len());
        let offset: f64 = p.iter().zip(v).map(|(&x, &b)| x * b).sum();
        let distortion = p
            .iter()
            .zip(v)
            .map(|(&x, &b)| {
                let r = x - offset * b;
                r * r
            })
            .sum::<f64>()
            .sqrt();
        ProjectionStats {
            offset,
            distortion,
            score: offset.abs() - distortion,
        }
    }

    /// Angle between the point and the basis line, in [0, pi/2].
    ///
    /// A zero offset yields pi/2, so points orthogonal to the basis are never
    /// treated as well-represented.
    pub fn angle(&self) -> f64 {
        self.distortion.atan2(self.offset.abs())
    }
}

/// Computes offset, distortion, and score of `p` against the unit vector `v`.
pub fn projection_stats(p: &[f64], v: &[f64]) -> Result<ProjectionStats> {
    if p.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: v.len(),
            actual: p.len(),
        });
    }
    if (norm(v) - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "basis vector has norm {}, expected 1",
            norm(v)
        )));
    }
    Ok(ProjectionStats::compute(p, v))
}

/// A stored candidate: reference id plus its centered coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct TableMember {
    pub ref_id: usize,
    pub coords: Vec<f64>,
}

/// One projection basis and the candidate points collected for it.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionTable {
    basis: Vec<f64>,
    members: Vec<TableMember>,
}

impl ProjectionTable {
    pub fn basis(&self) -> &[f64] {
        &self.basis
    }

    pub fn members(&self) -> &[TableMember] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub(crate) fn write_to(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "{}", join_reals(&self.basis))?;
        writeln!(w, "{}", self.members.len())?;
        for m in &self.members {
            writeln!(w, "{} {}", m.ref_id, join_reals(&m.coords))?;
        }
        Ok(())
    }

    pub(crate) fn read_from<R: std::io::BufRead>(
        reader: &mut LineReader<R>,
        dim: usize,
    ) -> Result<ProjectionTable> {
        let basis = parse_real_vec(&reader.next_line()?, dim, reader.line_number())?;
        if (norm(&basis) - 1.0).abs() > 1e-9 {
            return Err(Error::BadIndexFile(format!(
                "basis at line {} is not a unit vector",
                reader.line_number()
            )));
        }
        let count_line = reader.next_line()?;
        let count = parse_count(count_line.trim(), reader.line_number())?;
        let mut members = Vec::with_capacity(count);
        for _ in 0..count {
            let line = reader.next_line()?;
            let mut parts = line.splitn(2, ' ');
            let id_tok = parts.next().unwrap_or("");
            let ref_id = parse_count(id_tok, reader.line_number())?;
            let coords = parse_real_vec(parts.next().unwrap_or(""), dim, reader.line_number())?;
            members.push(TableMember { ref_id, coords });
        }
        Ok(ProjectionTable { basis, members })
    }
}

/// Result of one pivot-selection round.
pub(crate) struct TableRound {
    pub table: ProjectionTable,
    /// Stats for every point that was scored this round (active points),
    /// including the ones just collected.
    pub scored: Vec<(usize, ProjectionStats)>,
}

/// Runs one round of the shared table-construction step.
///
/// `norms[i]` doubles as the active marker: points are scored while their
/// entry is nonzero and are retired by zeroing it. The pivot is the active
/// point of largest norm (ties to the smaller id); the table takes the top-m
/// active points by (score desc, id asc) and retires them. Returns `None`
/// when no active point remains.
pub(crate) fn build_table(refs: &PointSet, norms: &mut [f64], m: usize) -> Option<TableRound> {
    let mut pivot: Option<(usize, f64)> = None;
    for (i, &n) in norms.iter().enumerate() {
        if n > 0.0 && pivot.is_none_or(|(_, best)| n > best) {
            pivot = Some((i, n));
        }
    }
    let (pivot_id, pivot_norm) = pivot?;

    let basis: Vec<f64> = refs
        .point(pivot_id)
        .iter()
        .map(|&x| x / pivot_norm)
        .collect();

    let mut scored: Vec<(usize, ProjectionStats)> = norms
        .iter()
        .enumerate()
        .filter(|&(_, &n)| n > 0.0)
        .map(|(i, _)| (i, ProjectionStats::compute(refs.point(i), &basis)))
        .collect();

    // Top-m by (score desc, id asc). The pivot scores exactly its norm, which
    // is maximal among active points, and it has the smallest id among points
    // attaining that score, so it always lands in the table.
    scored.sort_by(|a, b| {
        b.1.score
            .partial_cmp(&a.1.score)
            .unwrap()
            .then(a.0.cmp(&b.0))
    });
    let members: Vec<TableMember> = scored
        .iter()
        .take(m)
        .map(|&(id, _)| TableMember {
            ref_id: id,
            coords: refs.point(id).to_vec(),
        })
        .collect();
    for member in &members {
        norms[member.ref_id] = 0.0;
    }

    Some(TableRound {
        table: ProjectionTable { basis, members },
        scored,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collinear_point_has_zero_distortion() {
        let s = projection_stats(&[5.0, 0.0], &[1.0, 0.0]).unwrap();
        assert_eq!(s.offset, 5.0);
        assert_eq!(s.distortion, 0.0);
        assert_eq!(s.score, 5.0);
    }

    #[test]
    fn axis_aligned_components_split() {
        let s = projection_stats(&[3.0, 4.0], &[1.0, 0.0]).unwrap();
        assert_eq!(s.offset, 3.0);
        assert_eq!(s.distortion, 4.0);
        assert_eq!(s.score, -1.0);
    }

    #[test]
    fn orthogonal_point_scores_negative_norm() {
        let s = projection_stats(&[0.0, 2.0], &[1.0, 0.0]).unwrap();
        assert_eq!(s.offset, 0.0);
        assert_eq!(s.distortion, 2.0);
        assert_eq!(s.score, -2.0);
        assert_eq!(s.angle(), std::f64::consts::FRAC_PI_2);
    }

    #[test]
    fn non_unit_basis_is_rejected() {
        assert!(projection_stats(&[1.0, 0.0], &[2.0, 0.0]).is_err());
        assert!(projection_stats(&[1.0], &[1.0, 0.0]).is_err());
    }
}
