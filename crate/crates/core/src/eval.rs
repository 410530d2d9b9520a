//! Approximation measurement and the rank-vs-norm study.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::neighbors::NeighborList;
use crate::points::{euclidean_unchecked, norm, mean_center_refs, PointSet};

/// Approximation quality of a result set against the exact oracle.
///
/// Each (query, slot) pair contributes one ratio
/// `exact distance / returned distance`; those are always at least 1 because
/// the exact distances are slot-wise maximal. Ratios whose denominator is
/// zero while the exact distance is not (including slots the approximate
/// search could not fill) are tallied in `infinite_count` instead of being
/// folded into the aggregates; 0/0 counts as ratio 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxStats {
    pub per_query_ratio: Vec<f64>,
    pub mean_epsilon: f64,
    pub max_epsilon: f64,
    pub infinite_count: usize,
}

/// Scores approximate results slot-by-slot against exact ones.
pub fn approx_stats(exact: &[NeighborList], approx: &[NeighborList]) -> Result<ApproxStats> {
    if exact.len() != approx.len() {
        return Err(Error::InvalidParameter(format!(
            "result sets cover {} vs {} queries",
            exact.len(),
            approx.len()
        )));
    }
    let mut ratios = Vec::new();
    let mut infinite_count = 0usize;
    for (e, a) in exact.iter().zip(approx) {
        if e.query_id() != a.query_id() {
            return Err(Error::InvalidParameter(format!(
                "query id mismatch: {} vs {}",
                e.query_id(),
                a.query_id()
            )));
        }
        for (slot, exact_entry) in e.entries().iter().enumerate() {
            let returned = a.entries().get(slot).map(|n| n.distance).unwrap_or(0.0);
            if returned > 0.0 {
                ratios.push(exact_entry.distance / returned);
            } else if exact_entry.distance == 0.0 {
                ratios.push(1.0);
            } else {
                infinite_count += 1;
            }
        }
    }
    let mean_epsilon = if ratios.is_empty() {
        0.0
    } else {
        ratios.iter().sum::<f64>() / ratios.len() as f64 - 1.0
    };
    let max_epsilon = ratios.iter().cloned().fold(0.0f64, f64::max).max(1.0) - 1.0;
    Ok(ApproxStats {
        per_query_ratio: ratios,
        mean_epsilon,
        max_epsilon,
        infinite_count,
    })
}

/// Average rank of one reference point over the all-furthest-neighbors
/// protocol, reported next to its mean-centered norm.
#[derive(Debug, Clone, PartialEq)]
pub struct RankRecord {
    pub ref_id: usize,
    pub centered_norm: f64,
    pub average_rank: f64,
}

/// Uses every reference point as a query, ranks all points by distance to it
/// (furthest first, ties to the smaller id, the query ranking itself too),
/// and averages each point's rank over all queries.
///
/// Quadratic in the number of points; intended for a few thousand points.
pub fn rank_analysis(refs: &PointSet) -> Result<Vec<RankRecord>> {
    let n = refs.count();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "rank analysis needs at least two points".into(),
        ));
    }
    let centered = mean_center_refs(refs)?;
    let points = centered.base();

    let rank_sums: Vec<u64> = (0..n)
        .into_par_iter()
        .map(|qid| {
            let q = points.point(qid);
            let mut order: Vec<(usize, f64)> = points
                .iter()
                .map(|(id, p)| (id, euclidean_unchecked(q, p)))
                .collect();
            order.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
            let mut ranks = vec![0u64; n];
            for (position, &(id, _)) in order.iter().enumerate() {
                ranks[id] = position as u64 + 1;
            }
            ranks
        })
        .reduce(
            || vec![0u64; n],
            |mut acc, ranks| {
                for (a, r) in acc.iter_mut().zip(&ranks) {
                    *a += r;
                }
                acc
            },
        );

    Ok((0..n)
        .map(|id| RankRecord {
            ref_id: id,
            centered_norm: norm(points.point(id)),
            average_rank: rank_sums[id] as f64 / n as f64,
        })
        .collect())
}

/// Spearman rank correlation with midranks for ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let rx = fractional_ranks(xs);
    let ry = fractional_ranks(ys);
    pearson(&rx, &ry)
}

fn fractional_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let midrank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = midrank;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        cov += (x - mx) * (y - my);
        vx += (x - mx) * (x - mx);
        vy += (y - my) * (y - my);
    }
    if vx == 0.0 || vy == 0.0 {
        return 0.0;
    }
    cov / (vx * vy).sqrt()
}
