//! Dense point sets, CSV ingestion, mean-centering, and the Euclidean metric.
//!
//! Points are stored row-major; a point's id is its row position, so ids are
//! dense in `[0, count)` and stable for the lifetime of the set.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::io::{fmt_real, parse_real};

/// A dense collection of points sharing one dimensionality.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    values: Vec<f64>,
}

impl PointSet {
    /// Builds a set from row-major coordinates.
    pub fn new(dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if !values.len().is_multiple_of(dim) {
            return Err(Error::InvalidParameter(format!(
                "{} coordinates do not form whole points of dimension {}",
                values.len(),
                dim
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite coordinate {bad}"
            )));
        }
        Ok(PointSet { dim, values })
    }

    /// Convenience constructor from per-point rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map(|r| r.len()).unwrap_or(0);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::InvalidParameter(format!(
                    "row {i} has {} coordinates, expected {dim}",
                    row.len()
                )));
            }
        }
        PointSet::new(dim, rows.concat())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Coordinates of the point with the given id.
    pub fn point(&self, id: usize) -> &[f64] {
        &self.values[id * self.dim..(id + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &[f64])> {
        self.values.chunks_exact(self.dim).enumerate()
    }

    /// Column-wise mean of the set.
    pub fn centroid(&self) -> Vec<f64> {
        let n = self.count();
        let mut mean = vec![0.0; self.dim];
        for (_, p) in self.iter() {
            for (m, &x) in mean.iter_mut().zip(p) {
                *m += x;
            }
        }
        for m in &mut mean {
            *m /= n as f64;
        }
        mean
    }

    /// Copy of the set with `mean` subtracted from every point.
    pub fn shifted_by(&self, mean: &[f64]) -> Result<PointSet> {
        if mean.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: mean.len(),
            });
        }
        let values = self
            .values
            .chunks_exact(self.dim)
            .flat_map(|p| p.iter().zip(mean).map(|(&x, &m)| x - m))
            .collect();
        Ok(PointSet {
            dim: self.dim,
            values,
        })
    }
}

/// A point set shifted by a reference centroid, kept alongside that centroid.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredPointSet {
    base: PointSet,
    mean: Vec<f64>,
}

impl CenteredPointSet {
    pub fn base(&self) -> &PointSet {
        &self.base
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn count(&self) -> usize {
        self.base.count()
    }
}

/// Shifts both sets by the centroid of `refs`.
///
/// The centroid comes from the reference set only; queries keep whatever
/// offset they have relative to it. Pairwise distances are unchanged.
pub fn mean_center(
    refs: &PointSet,
    queries: &PointSet,
) -> Result<(CenteredPointSet, CenteredPointSet)> {
    if refs.is_empty() {
        return Err(Error::EmptyInput("reference set has no points".into()));
    }
    if refs.dim() != queries.dim() {
        return Err(Error::DimensionMismatch {
            expected: refs.dim(),
            actual: queries.dim(),
        });
    }
    let mean = refs.centroid();
    let centered_refs = refs.shifted_by(&mean)?;
    let centered_queries = queries.shifted_by(&mean)?;
    Ok((
        CenteredPointSet {
            base: centered_refs,
            mean: mean.clone(),
        },
        CenteredPointSet {
            base: centered_queries,
            mean,
        },
    ))
}

/// Centers a reference set by its own centroid.
pub fn mean_center_refs(refs: &PointSet) -> Result<CenteredPointSet> {
    if refs.is_empty() {
        return Err(Error::EmptyInput("reference set has no points".into()));
    }
    let mean = refs.centroid();
    Ok(CenteredPointSet {
        base: refs.shifted_by(&mean)?,
        mean,
    })
}

/// Euclidean distance between two points of equal dimension.
pub fn euclidean(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    Ok(euclidean_unchecked(a, b))
}

/// Euclidean distance assuming equal dimensions (checked only in debug builds).
#[inline]
pub fn euclidean_unchecked(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x - y;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// L2 norm of a point.
#[inline]
pub fn norm(p: &[f64]) -> f64 {
    p.iter().map(|&x| x * x).sum::<f64>().sqrt()
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Parses a CSV point file: one point per line, comma-separated reals.
///
/// With `has_header` the first line is skipped. Ragged rows and non-numeric
/// fields are reported with their 1-based physical line number.
pub fn load_points(reader: impl BufRead, has_header: bool) -> Result<PointSet> {
    let mut dim = None;
    let mut values = Vec::new();
    let mut count = 0usize;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        if has_header && idx == 0 {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        match dim {
            None => dim = Some(fields.len()),
            Some(d) if d != fields.len() => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected {} fields, got {}", d, fields.len()),
                });
            }
            Some(_) => {}
        }
        for field in fields {
            values.push(parse_real(field.trim(), line_no)?);
        }
        count += 1;
    }
    if count == 0 {
        return Err(Error::EmptyInput("no data lines in point file".into()));
    }
    PointSet::new(dim.unwrap(), values)
}

/// Writes a point set in the CSV format accepted by [`load_points`].
///
/// Every coordinate is emitted with 17 significant digits, so a load of the
/// written file reproduces the set exactly.
pub fn save_points(points: &PointSet, mut writer: impl Write) -> Result<()> {
    for (_, p) in points.iter() {
        let row: Vec<String> = p.iter().map(|&x| fmt_real(x)).collect();
        writeln!(writer, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn load_parses_simple_file() {
        let set = load_points("1.0,2.0\n3.0,4.0".as_bytes(), false).unwrap();
        assert_eq!(set.dim(), 2);
        assert_eq!(set.count(), 2);
        assert_eq!(set.point(0), &[1.0, 2.0]);
        assert_eq!(set.point(1), &[3.0, 4.0]);
    }

    #[test]
    fn load_rejects_ragged_row() {
        let err = load_points("1.0,2.0\n3.0".as_bytes(), false).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn load_rejects_non_numeric_field() {
        let err = load_points("1.0,x\n".as_bytes(), false).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn load_rejects_empty_input() {
        assert!(matches!(
            load_points("".as_bytes(), false),
            Err(Error::EmptyInput(_))
        ));
        // A lone header line leaves zero data lines.
        assert!(matches!(
            load_points("a,b\n".as_bytes(), true),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn header_line_is_skipped_on_request() {
        let set = load_points("x,y\n1.0,2.0".as_bytes(), true).unwrap();
        assert_eq!(set.count(), 1);
        assert_eq!(set.point(0), &[1.0, 2.0]);
    }

    #[test]
    fn save_load_round_trip_is_identity() {
        let set = PointSet::from_rows(&[
            vec![0.1, 1.0 / 3.0, -2.5e-17],
            vec![1e300, -1e-300, 42.0],
        ])
        .unwrap();
        let mut buf = Vec::new();
        save_points(&set, &mut buf).unwrap();
        let back = load_points(buf.as_slice(), false).unwrap();
        assert_eq!(back, set);
    }

    #[test]
    fn euclidean_matches_three_four_five() {
        assert_eq!(euclidean(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(euclidean(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!(euclidean(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn mean_center_uses_reference_centroid_only() {
        let refs = PointSet::from_rows(&[vec![1.0, 1.0], vec![3.0, 3.0]]).unwrap();
        let queries = PointSet::from_rows(&[vec![2.0, 2.0]]).unwrap();
        let (cr, cq) = mean_center(&refs, &queries).unwrap();
        assert_eq!(cr.mean(), &[2.0, 2.0]);
        assert_eq!(cr.base().point(0), &[-1.0, -1.0]);
        assert_eq!(cr.base().point(1), &[1.0, 1.0]);
        assert_eq!(cq.base().point(0), &[0.0, 0.0]);
    }

    #[test]
    fn mean_center_of_centered_set_is_identity() {
        let refs = PointSet::from_rows(&[vec![-1.0, 2.0], vec![1.0, -2.0]]).unwrap();
        let queries = PointSet::from_rows(&[vec![0.5, 0.5]]).unwrap();
        let (cr, cq) = mean_center(&refs, &queries).unwrap();
        assert_eq!(cr.mean(), &[0.0, 0.0]);
        assert_eq!(cr.base(), &refs);
        assert_eq!(cq.base(), &queries);
    }

    #[test]
    fn mean_center_rejects_dimension_mismatch() {
        let refs = PointSet::from_rows(&[vec![1.0, 1.0]]).unwrap();
        let queries = PointSet::from_rows(&[vec![1.0]]).unwrap();
        assert!(matches!(
            mean_center(&refs, &queries),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn reference_centroid_is_zero_after_centering() {
        let refs = PointSet::from_rows(&[
            vec![0.3, -1.7, 9.2],
            vec![4.1, 0.02, -3.3],
            vec![-2.6, 5.5, 0.7],
        ])
        .unwrap();
        let queries = PointSet::from_rows(&[vec![1.0, 1.0, 1.0]]).unwrap();
        let (cr, _) = mean_center(&refs, &queries).unwrap();
        for m in cr.base().centroid() {
            assert!(m.abs() < 1e-9, "residual centroid coordinate {m}");
        }
    }
}
