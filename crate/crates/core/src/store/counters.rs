//! Access counters.
//!
//! Every read transaction owns its own counters; on drop they fold into the
//! store-global totals under atomic update. DbHits are charged by the public
//! read operations according to one fixed rule:
//!
//! - 1 hit per node-record access (labels, record lookups, expand source),
//! - 1 hit per property read (properties are co-located with the record, so
//!   the combined access is a single hit),
//! - 1 hit per traversed (yielded) edge,
//! - 2 hits per index-seek match (index probe + record fetch).
//!
//! Page-cache hits and misses are counted independently of DbHits: a DbHit is
//! charged whether or not the backing page was cached.

use std::cell::Cell;
use std::sync::atomic::{AtomicU64, Ordering};

/// Snapshot of counter values.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AccessCounters {
    pub db_hits: u64,
    pub page_cache_hits: u64,
    pub page_cache_misses: u64,
}

/// Per-transaction counters. Monotone within a transaction; a fresh
/// transaction starts at zero.
#[derive(Debug, Default)]
pub struct TxnCounters {
    db_hits: Cell<u64>,
    page_hits: Cell<u64>,
    page_misses: Cell<u64>,
}

impl TxnCounters {
    pub fn add_db_hits(&self, n: u64) {
        self.db_hits.set(self.db_hits.get() + n);
    }

    pub fn add_page_hit(&self) {
        self.page_hits.set(self.page_hits.get() + 1);
    }

    pub fn add_page_miss(&self) {
        self.page_misses.set(self.page_misses.get() + 1);
    }

    pub fn db_hits(&self) -> u64 {
        self.db_hits.get()
    }

    pub fn snapshot(&self) -> AccessCounters {
        AccessCounters {
            db_hits: self.db_hits.get(),
            page_cache_hits: self.page_hits.get(),
            page_cache_misses: self.page_misses.get(),
        }
    }
}

/// Store-global totals, aggregated from transactions as they close.
#[derive(Debug, Default)]
pub struct GlobalCounters {
    db_hits: AtomicU64,
    page_hits: AtomicU64,
    page_misses: AtomicU64,
}

impl GlobalCounters {
    pub fn absorb(&self, c: &TxnCounters) {
        let s = c.snapshot();
        self.db_hits.fetch_add(s.db_hits, Ordering::Relaxed);
        self.page_hits.fetch_add(s.page_cache_hits, Ordering::Relaxed);
        self.page_misses.fetch_add(s.page_cache_misses, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> AccessCounters {
        AccessCounters {
            db_hits: self.db_hits.load(Ordering::Relaxed),
            page_cache_hits: self.page_hits.load(Ordering::Relaxed),
            page_cache_misses: self.page_misses.load(Ordering::Relaxed),
        }
    }
}
