//! Request slots with FIFO overflow, shared by every storage kind.
//!
//! A request started in cycle `c` with latency `L` completes at the end of
//! cycle `c + L - 1`; its effects are visible from cycle `c + L`. Queued
//! requests start the cycle after a slot frees.

use super::dram::DramCase;
use super::{AddressRange, CacheState, DramState, MemError, MemoryAttrs};
use crate::metamodel::latency::EvalContext;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum AccessKind {
    Read,
    Write,
}

/// Opaque requester identity; the engine maps tags back to instructions.
pub type RequestTag = u64;

#[derive(Debug, Clone)]
pub enum StorageTiming {
    Memory(MemoryAttrs),
    Dram(DramState),
    /// A cache fronts exactly one backing memory and serves its ranges.
    Cache {
        state: CacheState,
        ranges: Vec<AddressRange>,
    },
}

#[derive(Debug, Clone, Copy)]
struct Active {
    tag: RequestTag,
    completes_at: u64,
}

#[derive(Debug, Clone, Copy)]
struct Pending {
    tag: RequestTag,
    kind: AccessKind,
    addr: u64,
    width: u64,
}

/// A request that has claimed a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RequestStart {
    pub tag: RequestTag,
    pub completes_at: u64,
    /// Hit/miss classification when the storage is a cache.
    pub cache_hit: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccessOutcome {
    Started(RequestStart),
    Queued,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StorageStats {
    pub reads: u64,
    pub writes: u64,
    pub hits: u64,
    pub misses: u64,
    pub row_hits: u64,
    pub row_conflicts: u64,
    pub queue_max_depth: u64,
}

#[derive(Debug, Clone)]
pub struct StorageModel {
    name: String,
    timing: StorageTiming,
    max_concurrent_requests: u64,
    port_width: u64,
    data_width: u64,
    slots: Vec<Option<Active>>,
    queue: VecDeque<Pending>,
    /// Cache fills due at (cycle, kind, addr); applied during `step`.
    pending_fills: Vec<(u64, AccessKind, u64)>,
    stats: StorageStats,
}

impl StorageModel {
    pub fn new(name: impl Into<String>, timing: StorageTiming) -> StorageModel {
        let (mcr, pw, dw) = match &timing {
            StorageTiming::Memory(m) => (
                m.storage.max_concurrent_requests,
                m.storage.port_width,
                m.storage.data_width,
            ),
            StorageTiming::Dram(d) => {
                let s = &d.attrs().memory.storage;
                (s.max_concurrent_requests, s.port_width, s.data_width)
            }
            StorageTiming::Cache { state, .. } => {
                let s = &state.attrs().storage;
                (s.max_concurrent_requests, s.port_width, s.data_width)
            }
        };
        StorageModel {
            name: name.into(),
            timing,
            max_concurrent_requests: mcr.max(1),
            port_width: pw.max(1),
            data_width: dw,
            slots: vec![None; mcr.max(1) as usize],
            queue: VecDeque::new(),
            pending_fills: Vec::new(),
            stats: StorageStats::default(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn stats(&self) -> &StorageStats {
        &self.stats
    }

    pub fn data_width(&self) -> u64 {
        self.data_width
    }

    pub fn port_width(&self) -> u64 {
        self.port_width
    }

    pub fn contains(&self, addr: u64) -> bool {
        match &self.timing {
            StorageTiming::Memory(m) => m.contains(addr),
            StorageTiming::Dram(d) => d.attrs().memory.contains(addr),
            StorageTiming::Cache { ranges, .. } => ranges.iter().any(|r| r.contains(addr)),
        }
    }

    pub fn address_ranges(&self) -> Vec<AddressRange> {
        match &self.timing {
            StorageTiming::Memory(m) => m.address_ranges.clone(),
            StorageTiming::Dram(d) => d.attrs().memory.address_ranges.clone(),
            StorageTiming::Cache { ranges, .. } => ranges.clone(),
        }
    }

    pub fn is_cache(&self) -> bool {
        matches!(self.timing, StorageTiming::Cache { .. })
    }

    pub fn busy_slots(&self) -> u64 {
        self.slots.iter().filter(|s| s.is_some()).count() as u64
    }

    pub fn is_idle(&self) -> bool {
        self.busy_slots() == 0 && self.queue.is_empty()
    }

    /// Issue an access in cycle `now`. Claims a free slot immediately or
    /// queues FIFO behind earlier overflow.
    pub fn access(
        &mut self,
        kind: AccessKind,
        addr: u64,
        width: u64,
        now: u64,
        tag: RequestTag,
    ) -> Result<AccessOutcome, MemError> {
        if width > self.port_width {
            return Err(MemError::WidthExceedsPort {
                width,
                port_width: self.port_width,
            });
        }
        let last = addr + width.saturating_sub(1);
        if !self.contains(addr) || !self.contains(last) {
            return Err(MemError::UnmappedAddress(if self.contains(addr) {
                last
            } else {
                addr
            }));
        }
        match kind {
            AccessKind::Read => self.stats.reads += 1,
            AccessKind::Write => self.stats.writes += 1,
        }
        let pending = Pending {
            tag,
            kind,
            addr,
            width,
        };
        if self.queue.is_empty() && self.free_slot().is_some() {
            let start = self.start(pending, now);
            Ok(AccessOutcome::Started(start))
        } else {
            self.queue.push_back(pending);
            self.stats.queue_max_depth = self.stats.queue_max_depth.max(self.queue.len() as u64);
            Ok(AccessOutcome::Queued)
        }
    }

    /// Advance to cycle `now`: free slots whose requests completed earlier,
    /// apply due cache fills, and start queued requests on freed slots.
    /// Returns the requests that started this cycle.
    pub fn step(&mut self, now: u64) -> Vec<RequestStart> {
        for slot in &mut self.slots {
            if slot.is_some_and(|a| a.completes_at < now) {
                *slot = None;
            }
        }
        let due: Vec<_> = self
            .pending_fills
            .iter()
            .filter(|(c, _, _)| *c <= now)
            .cloned()
            .collect();
        self.pending_fills.retain(|(c, _, _)| *c > now);
        if let StorageTiming::Cache { state, .. } = &mut self.timing {
            for (_, kind, addr) in due {
                state.fill(kind, addr);
            }
        }
        let mut started = Vec::new();
        while !self.queue.is_empty() && self.free_slot().is_some() {
            let pending = self.queue.pop_front().expect("queue nonempty");
            started.push(self.start(pending, now));
        }
        started
    }

    fn free_slot(&self) -> Option<usize> {
        self.slots.iter().position(|s| s.is_none())
    }

    fn start(&mut self, p: Pending, now: u64) -> RequestStart {
        let (latency, cache_hit) = self.latency_for(p.kind, p.addr, p.width, now);
        let completes_at = now + latency.max(1) - 1;
        let idx = self.free_slot().expect("caller checked for a free slot");
        self.slots[idx] = Some(Active {
            tag: p.tag,
            completes_at,
        });
        RequestStart {
            tag: p.tag,
            completes_at,
            cache_hit,
        }
    }

    fn latency_for(
        &mut self,
        kind: AccessKind,
        addr: u64,
        width: u64,
        now: u64,
    ) -> (u64, Option<bool>) {
        match &mut self.timing {
            StorageTiming::Memory(m) => {
                let spec = match kind {
                    AccessKind::Read => &m.read_latency,
                    AccessKind::Write => &m.write_latency,
                };
                let ctx = EvalContext {
                    immediates: vec![],
                    num_reads: (kind == AccessKind::Read) as i64,
                    num_writes: (kind == AccessKind::Write) as i64,
                    data_size: (width * m.storage.data_width) as i64,
                };
                let l = spec
                    .eval(&ctx)
                    .unwrap_or_else(|e| panic!("latency expression rejected at build time: {e}"));
                (l, None)
            }
            StorageTiming::Dram(d) => {
                let acc = d
                    .access(kind, addr, width, now)
                    .expect("address mapping checked before start");
                match acc.case {
                    DramCase::RowHit => self.stats.row_hits += 1,
                    DramCase::RowConflict => self.stats.row_conflicts += 1,
                    DramCase::ClosedBank => {}
                }
                (acc.cycles, None)
            }
            StorageTiming::Cache { state, .. } => {
                let acc = state.classify(kind, addr);
                if acc.hit {
                    self.stats.hits += 1;
                } else {
                    self.stats.misses += 1;
                    let fill_at = now + state.attrs().miss_latency;
                    self.pending_fills.push((fill_at, kind, addr));
                }
                (acc.cycles, Some(acc.hit))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::memsys::{CacheAttrs, DataStorageAttrs, ReplacementPolicy};
    use crate::metamodel::latency::LatencySpec;

    fn sram(latency: u64, slots: u64, port_width: u64) -> StorageModel {
        StorageModel::new(
            "mem0",
            StorageTiming::Memory(MemoryAttrs {
                storage: DataStorageAttrs {
                    data_width: 32,
                    max_concurrent_requests: slots,
                    read_write_ports: 1,
                    port_width,
                },
                read_latency: LatencySpec::fixed(latency),
                write_latency: LatencySpec::fixed(latency),
                address_ranges: vec![AddressRange::new(0, 0xfff)],
            }),
        )
    }

    #[test]
    fn single_read_completes_in_issue_cycle_window() {
        let mut m = sram(1, 1, 1);
        let out = m.access(AccessKind::Read, 0x10, 1, 5, 1).unwrap();
        assert_eq!(
            out,
            AccessOutcome::Started(RequestStart {
                tag: 1,
                completes_at: 5,
                cache_hit: None
            })
        );
    }

    #[test]
    fn overflow_queues_fifo_and_starts_after_free() {
        let mut m = sram(1, 1, 1);
        let first = m.access(AccessKind::Read, 0x10, 1, 5, 1).unwrap();
        assert!(matches!(first, AccessOutcome::Started(_)));
        let second = m.access(AccessKind::Read, 0x14, 1, 5, 2).unwrap();
        assert_eq!(second, AccessOutcome::Queued);
        // Nothing frees in cycle 5; the slot frees at the start of 6.
        let started = m.step(6);
        assert_eq!(started.len(), 1);
        assert_eq!(started[0].tag, 2);
        assert_eq!(started[0].completes_at, 6);
    }

    #[test]
    fn width_and_mapping_are_validated() {
        let mut m = sram(1, 1, 1);
        assert!(matches!(
            m.access(AccessKind::Write, 0x10, 2, 0, 1),
            Err(MemError::WidthExceedsPort { .. })
        ));
        assert!(matches!(
            m.access(AccessKind::Read, 0x4000, 1, 0, 1),
            Err(MemError::UnmappedAddress(0x4000))
        ));
    }

    #[test]
    fn latency_expression_sees_data_size() {
        let mut m = StorageModel::new(
            "mem0",
            StorageTiming::Memory(MemoryAttrs {
                storage: DataStorageAttrs {
                    data_width: 32,
                    max_concurrent_requests: 1,
                    read_write_ports: 1,
                    port_width: 4,
                },
                read_latency: LatencySpec::parse("2 + data_size / 32").unwrap(),
                write_latency: LatencySpec::fixed(3),
                address_ranges: vec![AddressRange::new(0, 0xfff)],
            }),
        );
        // width 2 words of 32 bits: 2 + 64/32 = 4 cycles, so 0..=3.
        let out = m.access(AccessKind::Read, 0, 2, 0, 1).unwrap();
        assert_eq!(
            out,
            AccessOutcome::Started(RequestStart {
                tag: 1,
                completes_at: 3,
                cache_hit: None
            })
        );
    }

    fn cache_model(miss: u64, hit: u64) -> StorageModel {
        StorageModel::new(
            "dcache0",
            StorageTiming::Cache {
                state: CacheState::new(CacheAttrs {
                    storage: DataStorageAttrs {
                        data_width: 32,
                        max_concurrent_requests: 1,
                        read_write_ports: 1,
                        port_width: 1,
                    },
                    write_allocate: true,
                    write_back: true,
                    miss_latency: miss,
                    hit_latency: hit,
                    cache_line_size: 1,
                    replacement_policy: ReplacementPolicy::Lru,
                    sets: 2,
                    ways: 2,
                }),
                ranges: vec![AddressRange::new(0, 0xfff)],
            },
        )
    }

    #[test]
    fn miss_occupies_miss_plus_hit_and_fills_line() {
        let mut c = cache_model(10, 1);
        let out = c.access(AccessKind::Read, 0x20, 1, 0, 1).unwrap();
        let AccessOutcome::Started(start) = out else {
            panic!("expected start");
        };
        assert_eq!(start.cache_hit, Some(false));
        assert_eq!(start.completes_at, 10); // 11 cycles: 0..=10
        // Fill applies at cycle 10; a request started afterwards hits.
        for t in 1..=11 {
            c.step(t);
        }
        let out = c.access(AccessKind::Read, 0x20, 1, 11, 2).unwrap();
        let AccessOutcome::Started(start) = out else {
            panic!("expected start");
        };
        assert_eq!(start.cache_hit, Some(true));
        assert_eq!(start.completes_at, 11);
        assert_eq!(c.stats().hits, 1);
        assert_eq!(c.stats().misses, 1);
    }
}
