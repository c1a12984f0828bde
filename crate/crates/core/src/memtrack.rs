//! Allocation accounting for graph-data buffers.
//!
//! Desk-scale RSS is dominated by runtime overheads, so memory claims are
//! checked against explicit byte accounting of the buffers that hold graph
//! data: operator row buffers, decoded subgraphs, retained metadata. Code
//! paths register the bytes they hold and release them when dropped; the
//! tracker keeps the running total and the high-water mark.

use std::sync::atomic::{AtomicI64, Ordering};
use std::sync::Arc;

#[derive(Debug, Default)]
pub struct MemTracker {
    current: AtomicI64,
    peak: AtomicI64,
}

impl MemTracker {
    pub fn new() -> Arc<MemTracker> {
        Arc::new(MemTracker::default())
    }

    pub fn add(&self, bytes: usize) {
        let now = self.current.fetch_add(bytes as i64, Ordering::Relaxed) + bytes as i64;
        self.peak.fetch_max(now, Ordering::Relaxed);
    }

    pub fn sub(&self, bytes: usize) {
        self.current.fetch_sub(bytes as i64, Ordering::Relaxed);
    }

    pub fn current(&self) -> i64 {
        self.current.load(Ordering::Relaxed)
    }

    pub fn peak_bytes(&self) -> u64 {
        self.peak.load(Ordering::Relaxed).max(0) as u64
    }

    /// Resets the high-water mark to the current level.
    pub fn reset_peak(&self) {
        self.peak.store(self.current.load(Ordering::Relaxed), Ordering::Relaxed);
    }
}

/// RAII registration of a byte amount against a tracker.
pub struct Tracked {
    tracker: Arc<MemTracker>,
    bytes: usize,
}

impl Tracked {
    pub fn register(tracker: &Arc<MemTracker>, bytes: usize) -> Tracked {
        tracker.add(bytes);
        Tracked { tracker: tracker.clone(), bytes }
    }

    pub fn bytes(&self) -> usize {
        self.bytes
    }

    /// Adjusts the registration to a new size (buffers that grow).
    pub fn resize(&mut self, bytes: usize) {
        if bytes >= self.bytes {
            self.tracker.add(bytes - self.bytes);
        } else {
            self.tracker.sub(self.bytes - bytes);
        }
        self.bytes = bytes;
    }
}

impl Drop for Tracked {
    fn drop(&mut self) {
        self.tracker.sub(self.bytes);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tracks_peak_across_register_and_drop() {
        let t = MemTracker::new();
        {
            let _a = Tracked::register(&t, 100);
            {
                let mut b = Tracked::register(&t, 50);
                b.resize(250);
                assert_eq!(t.current(), 350);
            }
            assert_eq!(t.current(), 100);
        }
        assert_eq!(t.current(), 0);
        assert_eq!(t.peak_bytes(), 350);
        t.reset_peak();
        assert_eq!(t.peak_bytes(), 0);
    }
}
