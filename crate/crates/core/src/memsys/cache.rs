//! Set-associative cache bookkeeping: hit/miss classification and line
//! replacement. Values never live here; only tags and replacement state do.

use super::{AccessKind, CacheAttrs, ReplacementPolicy};

#[derive(Debug, Clone, Copy, Default)]
struct Line {
    valid: bool,
    dirty: bool,
    tag: u64,
    /// Replacement stamp: touch time for LRU, insertion time for FIFO.
    stamp: u64,
}

/// Classification result for one access.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CacheAccess {
    pub hit: bool,
    /// Slot occupancy in cycles: hit_latency on a hit, miss + hit on a miss.
    pub cycles: u64,
    /// Line index (word address of line start) of an evicted dirty line.
    pub evicted_dirty: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct CacheState {
    attrs: CacheAttrs,
    sets: Vec<Vec<Line>>,
    tick: u64,
}

impl CacheState {
    pub fn new(attrs: CacheAttrs) -> CacheState {
        let sets = vec![vec![Line::default(); attrs.ways as usize]; attrs.sets as usize];
        CacheState { attrs, sets, tick: 0 }
    }

    pub fn attrs(&self) -> &CacheAttrs {
        &self.attrs
    }

    fn line_id(&self, addr: u64) -> u64 {
        addr / self.attrs.cache_line_size
    }

    fn set_index(&self, addr: u64) -> usize {
        (self.line_id(addr) % self.attrs.sets) as usize
    }

    /// Classify an access and update replacement state for hits. The returned
    /// `cycles` already folds the post-miss hit phase in.
    pub fn classify(&mut self, kind: AccessKind, addr: u64) -> CacheAccess {
        self.tick += 1;
        let tag = self.line_id(addr);
        let set = self.set_index(addr);
        for line in &mut self.sets[set] {
            if line.valid && line.tag == tag {
                if self.attrs.replacement_policy == ReplacementPolicy::Lru {
                    line.stamp = self.tick;
                }
                if kind == AccessKind::Write && self.attrs.write_back {
                    line.dirty = true;
                }
                return CacheAccess {
                    hit: true,
                    cycles: self.attrs.hit_latency,
                    evicted_dirty: None,
                };
            }
        }
        CacheAccess {
            hit: false,
            cycles: self.attrs.miss_latency + self.attrs.hit_latency,
            evicted_dirty: None,
        }
    }

    /// Install the line for a missed access; called when the miss countdown
    /// expires. Write misses allocate only when `write_allocate` is set.
    /// Returns the word address of an evicted dirty line, if any.
    pub fn fill(&mut self, kind: AccessKind, addr: u64) -> Option<u64> {
        if kind == AccessKind::Write && !self.attrs.write_allocate {
            return None;
        }
        self.tick += 1;
        let tag = self.line_id(addr);
        let set = self.set_index(addr);
        if self.sets[set].iter().any(|l| l.valid && l.tag == tag) {
            // Concurrent miss to the same line already filled it.
            return None;
        }
        let victim = self.sets[set]
            .iter()
            .enumerate()
            .min_by_key(|(i, l)| (l.valid, l.stamp, *i))
            .map(|(i, _)| i)
            .expect("cache has at least one way");
        let old = self.sets[set][victim];
        let evicted = (old.valid && old.dirty).then(|| old.tag * self.attrs.cache_line_size);
        self.sets[set][victim] = Line {
            valid: true,
            dirty: kind == AccessKind::Write && self.attrs.write_back,
            tag,
            stamp: self.tick,
        };
        evicted
    }

    /// Classification plus immediate fill, for direct model-level use where
    /// the miss completion is not being staged by an engine.
    pub fn access(&mut self, kind: AccessKind, addr: u64) -> CacheAccess {
        let mut out = self.classify(kind, addr);
        if !out.hit {
            out.evicted_dirty = self.fill(kind, addr);
        }
        out
    }

    pub fn contains_line(&self, addr: u64) -> bool {
        let tag = self.line_id(addr);
        let set = self.set_index(addr);
        self.sets[set].iter().any(|l| l.valid && l.tag == tag)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::memsys::DataStorageAttrs;

    fn cache(sets: u64, ways: u64, line: u64, policy: ReplacementPolicy) -> CacheState {
        CacheState::new(CacheAttrs {
            storage: DataStorageAttrs {
                data_width: 32,
                max_concurrent_requests: 1,
                read_write_ports: 1,
                port_width: 1,
            },
            write_allocate: true,
            write_back: true,
            miss_latency: 10,
            hit_latency: 1,
            cache_line_size: line,
            replacement_policy: policy,
            sets,
            ways,
        })
    }

    #[test]
    fn cold_miss_then_hit() {
        let mut c = cache(2, 2, 1, ReplacementPolicy::Lru);
        let a = c.access(AccessKind::Read, 0);
        assert!(!a.hit);
        assert_eq!(a.cycles, 11);
        let b = c.access(AccessKind::Read, 0);
        assert!(b.hit);
        assert_eq!(b.cycles, 1);
    }

    #[test]
    fn lru_eviction_sequence() {
        // 2 sets, 2 ways, 1-word lines: even addresses all land in set 0.
        // 0,2,4,0,6,2 thrash the set; every access misses.
        let mut c = cache(2, 2, 1, ReplacementPolicy::Lru);
        let pattern: Vec<bool> = [0u64, 2, 4, 0, 6, 2]
            .iter()
            .map(|&a| c.access(AccessKind::Read, a).hit)
            .collect();
        assert_eq!(pattern, vec![false; 6]);
        // After the sequence, set 0 holds lines 6 and 2.
        assert!(c.contains_line(6));
        assert!(c.contains_line(2));
        assert!(!c.contains_line(0));
        assert!(!c.contains_line(4));
    }

    #[test]
    fn lru_sanity_k_way() {
        // Cycling through k lines of one set then retouching them: all hits.
        let mut c = cache(1, 4, 1, ReplacementPolicy::Lru);
        for a in 0..4u64 {
            assert!(!c.access(AccessKind::Read, a).hit);
        }
        for a in 0..4u64 {
            assert!(c.access(AccessKind::Read, a).hit);
        }
        // Touching a (k+1)-th line evicts the least recently used (0).
        assert!(!c.access(AccessKind::Read, 4).hit);
        assert!(!c.access(AccessKind::Read, 0).hit);
    }

    #[test]
    fn fifo_ignores_touches() {
        let mut c = cache(1, 2, 1, ReplacementPolicy::Fifo);
        c.access(AccessKind::Read, 0);
        c.access(AccessKind::Read, 1);
        // Re-touch 0; FIFO still evicts it first.
        assert!(c.access(AccessKind::Read, 0).hit);
        c.access(AccessKind::Read, 2);
        assert!(!c.contains_line(0));
        assert!(c.contains_line(1));
    }

    #[test]
    fn write_miss_without_allocate_leaves_line_out() {
        let mut c = CacheState::new(CacheAttrs {
            write_allocate: false,
            ..cache(1, 2, 1, ReplacementPolicy::Lru).attrs.clone()
        });
        let a = c.access(AccessKind::Write, 0);
        assert!(!a.hit);
        assert!(!c.contains_line(0));
        // A later read still misses.
        assert!(!c.access(AccessKind::Read, 0).hit);
    }

    #[test]
    fn dirty_eviction_reports_line_address() {
        let mut c = cache(1, 1, 2, ReplacementPolicy::Lru);
        c.access(AccessKind::Write, 4); // line [4,5], dirty
        let a = c.access(AccessKind::Read, 8); // evicts it
        assert_eq!(a.evicted_dirty, Some(4));
    }
}
