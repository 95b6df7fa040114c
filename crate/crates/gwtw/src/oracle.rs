//! Brute-force LRU reference used by the property suite and `gwtw validate`.
//!
//! Instead of maintaining incremental cache state, the reference keeps the
//! full access history and rederives the cache contents on every call: an
//! LRU cache of capacity k holds exactly the k most recently accessed
//! distinct items. Any divergence from the incremental implementation is a
//! bug in one of the two.

use crate::cache::{AccessOutcome, ContentId};

#[derive(Debug, Clone)]
pub struct NaiveLru {
    capacity: usize,
    history: Vec<ContentId>,
}

impl NaiveLru {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1);
        NaiveLru {
            capacity,
            history: Vec::new(),
        }
    }

    /// Cache contents implied by the history, most-recent first.
    pub fn entries(&self) -> Vec<ContentId> {
        let mut entries = Vec::new();
        for &item in self.history.iter().rev() {
            if !entries.contains(&item) {
                entries.push(item);
                if entries.len() == self.capacity {
                    break;
                }
            }
        }
        entries
    }

    pub fn access(&mut self, item: ContentId) -> AccessOutcome {
        let before = self.entries();
        let hit = before.contains(&item);
        let evicted = if !hit && before.len() == self.capacity {
            before.last().copied()
        } else {
            None
        };
        self.history.push(item);
        AccessOutcome { hit, evicted }
    }
}
