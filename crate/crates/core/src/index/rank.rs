use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, BinaryHeap};

use super::{CitationIndex, IndexError};
use crate::PageId;

/// The top of a ranking, best first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedList {
    pub k: usize,
    /// `(page_id, citation_count)`, count descending then page id ascending.
    pub entries: Vec<(PageId, u64)>,
    /// `k - entries.len()` when fewer than `k` pages were eligible.
    pub shortfall: usize,
}

impl RankedList {
    pub fn page_ids(&self) -> impl Iterator<Item = PageId> + '_ {
        self.entries.iter().map(|(p, _)| *p)
    }
}

/// Heap key where "greater" means "ranks lower".
#[derive(PartialEq, Eq)]
struct Worse((Reverse<u64>, PageId));

impl Ord for Worse {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp(&other.0)
    }
}

impl PartialOrd for Worse {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// The `k` most cited pages of `eligible`, using a bounded heap so memory is
/// O(k) regardless of pool size.
pub fn top_k_citations(index: &CitationIndex, k: usize, eligible: &BTreeSet<PageId>) -> Result<RankedList, IndexError> {
    if k == 0 {
        return Err(IndexError::ZeroK);
    }
    let mut heap: BinaryHeap<Worse> = BinaryHeap::with_capacity(k.min(eligible.len()) + 1);
    for &page in eligible {
        let count = index.count(page).ok_or(IndexError::NotIndexed(page))?;
        let key = Worse((Reverse(count), page));
        if heap.len() < k {
            heap.push(key);
        } else if heap.peek().is_some_and(|worst| key < *worst) {
            heap.pop();
            heap.push(key);
        }
    }
    let entries: Vec<_> = heap
        .into_sorted_vec()
        .into_iter()
        .map(|Worse((Reverse(c), p))| (p, c))
        .collect();
    Ok(RankedList {
        k,
        shortfall: k - entries.len(),
        entries,
    })
}
