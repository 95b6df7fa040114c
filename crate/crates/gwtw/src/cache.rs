//! LRU cache model used by every server in the web model.

use crate::error::Error;

pub type ContentId = u32;

/// Result of a single cache access.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AccessOutcome {
    pub hit: bool,
    /// Victim evicted to make room; only set on a miss at capacity.
    pub evicted: Option<ContentId>,
}

/// Bounded recency-ordered set of content ids, most-recent first.
///
/// Capacities in this model are small (a handful of unit-sized slots per
/// server), so a plain vector with linear scan beats pointer-chasing
/// structures.
#[derive(Debug, Clone)]
pub struct LruCache {
    capacity: usize,
    entries: Vec<ContentId>,
}

impl LruCache {
    pub fn new(capacity: usize) -> Result<Self, Error> {
        if capacity == 0 {
            return Err(Error::domain("LruCache: capacity must be >= 1"));
        }
        Ok(LruCache {
            capacity,
            entries: Vec::with_capacity(capacity),
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in recency order, most-recent first.
    pub fn entries(&self) -> &[ContentId] {
        &self.entries
    }

    pub fn contains(&self, item: ContentId) -> bool {
        self.entries.contains(&item)
    }

    /// Accesses `item`: a hit moves it to the most-recent position, a miss
    /// inserts it there, evicting the least-recently-used entry if full.
    pub fn access(&mut self, item: ContentId) -> AccessOutcome {
        if let Some(pos) = self.entries.iter().position(|&e| e == item) {
            self.entries.remove(pos);
            self.entries.insert(0, item);
            return AccessOutcome {
                hit: true,
                evicted: None,
            };
        }
        let evicted = if self.entries.len() == self.capacity {
            self.entries.pop()
        } else {
            None
        };
        self.entries.insert(0, item);
        AccessOutcome {
            hit: false,
            evicted,
        }
    }
}
