//! Per-query top-k accumulation of furthest-neighbor candidates.

/// One candidate result: a reference point id and its distance to the query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub ref_id: usize,
    pub distance: f64,
}

/// Top-k furthest neighbors of a single query, ordered by
/// (distance descending, id ascending).
///
/// Offering a candidate whose id is already present is a no-op, so scanning
/// candidate lists that overlap cannot produce duplicates. At capacity a
/// candidate only displaces the current k-th entry when its distance is
/// strictly larger.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborList {
    query_id: usize,
    k: usize,
    entries: Vec<Neighbor>,
}

impl NeighborList {
    pub fn new(query_id: usize, k: usize) -> Self {
        assert!(k >= 1, "k must be positive");
        NeighborList {
            query_id,
            k,
            entries: Vec::with_capacity(k.min(64)),
        }
    }

    pub fn query_id(&self) -> usize {
        self.query_id
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn entries(&self) -> &[Neighbor] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Distance of the k-th entry when full, 0 otherwise.
    pub fn kth_distance(&self) -> f64 {
        if self.entries.len() == self.k {
            self.entries[self.k - 1].distance
        } else {
            0.0
        }
    }

    /// Offers a candidate, keeping the list sorted and at most k long.
    pub fn offer(&mut self, ref_id: usize, distance: f64) {
        if self.entries.iter().any(|e| e.ref_id == ref_id) {
            return;
        }
        if self.entries.len() == self.k {
            if distance <= self.kth_distance() {
                return;
            }
            self.entries.pop();
        }
        let pos = self.entries.partition_point(|e| {
            e.distance > distance || (e.distance == distance && e.ref_id < ref_id)
        });
        self.entries.insert(pos, Neighbor { ref_id, distance });
    }
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    /// Independent oracle: full sort under (distance desc, id asc), truncated
    /// to k. Candidates are offered in id-ascending order, mirroring how the
    /// search loops scan reference points.
    fn sort_oracle(items: &[(usize, f64)], k: usize) -> Vec<Neighbor> {
        let mut all: Vec<Neighbor> = items
            .iter()
            .map(|&(ref_id, distance)| Neighbor { ref_id, distance })
            .collect();
        all.sort_by(|a, b| {
            b.distance
                .partial_cmp(&a.distance)
                .unwrap()
                .then(a.ref_id.cmp(&b.ref_id))
        });
        all.truncate(k);
        all
    }

    proptest! {
        #[test]
        fn matches_full_sort_truncation(
            distances in prop::collection::vec(0.0..1e3f64, 1..100),
            k in 1usize..20,
        ) {
            let items: Vec<(usize, f64)> =
                distances.into_iter().enumerate().collect();
            let mut list = NeighborList::new(0, k);
            for &(id, d) in &items {
                list.offer(id, d);
            }
            let expected = sort_oracle(&items, k);
            prop_assert_eq!(list.entries(), expected.as_slice());
        }

        #[test]
        fn order_invariant_holds_for_any_stream(
            items in prop::collection::vec((0usize..50, 0.0..100.0f64), 0..200),
            k in 1usize..10,
        ) {
            let mut list = NeighborList::new(0, k);
            for &(id, d) in &items {
                list.offer(id, d);
            }
            let entries = list.entries();
            prop_assert!(entries.len() <= k);
            for pair in entries.windows(2) {
                prop_assert!(
                    pair[0].distance > pair[1].distance
                        || (pair[0].distance == pair[1].distance
                            && pair[0].ref_id < pair[1].ref_id),
                    "entries out of order: {pair:?}"
                );
            }
        }
    }
}
