//! Storage timing and bookkeeping: request slots with a FIFO overflow queue,
//! flat memory latencies, DRAM bank/row state, and a set-associative cache.
//!
//! Contents are deliberately kept out of these models; the simulation engine
//! owns value state so timing and functional behavior stay decoupled.

mod cache;
mod dram;
mod storage;

pub use cache::{CacheAccess, CacheState};
pub use dram::{DramAccess, DramCase, DramState};
pub use storage::{
    AccessKind, AccessOutcome, RequestStart, RequestTag, StorageModel, StorageStats, StorageTiming,
};

use crate::metamodel::latency::LatencySpec;
use std::collections::BTreeMap;
use std::fmt;

/// Inclusive address interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct AddressRange {
    pub lo: u64,
    pub hi: u64,
}

impl AddressRange {
    pub fn new(lo: u64, hi: u64) -> AddressRange {
        AddressRange { lo, hi }
    }

    pub fn contains(&self, addr: u64) -> bool {
        addr >= self.lo && addr <= self.hi
    }

    pub fn overlaps(&self, other: &AddressRange) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }
}

impl fmt::Display for AddressRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:#x}:{:#x}]", self.lo, self.hi)
    }
}

/// Attributes shared by every storage kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataStorageAttrs {
    pub data_width: u64,
    pub max_concurrent_requests: u64,
    pub read_write_ports: u64,
    pub port_width: u64,
}

/// SRAM and other flat memories.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemoryAttrs {
    pub storage: DataStorageAttrs,
    pub read_latency: LatencySpec,
    pub write_latency: LatencySpec,
    pub address_ranges: Vec<AddressRange>,
}

impl MemoryAttrs {
    pub fn contains(&self, addr: u64) -> bool {
        self.address_ranges.iter().any(|r| r.contains(addr))
    }
}

/// DRAM adds per-bank row-buffer timing on top of the flat latencies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DramAttrs {
    pub memory: MemoryAttrs,
    /// Bank id to the address interval it serves; banks partition the ranges.
    pub bank_address_ranges: BTreeMap<u64, AddressRange>,
    pub t_rcd: u64,
    pub t_rp: u64,
    pub t_ras: u64,
    /// Words per DRAM row; row id = address / row_size.
    pub row_size: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ReplacementPolicy {
    Lru,
    Fifo,
}

impl ReplacementPolicy {
    pub fn name(self) -> &'static str {
        match self {
            ReplacementPolicy::Lru => "LRU",
            ReplacementPolicy::Fifo => "FIFO",
        }
    }

    pub fn parse(s: &str) -> Option<ReplacementPolicy> {
        match s {
            "LRU" => Some(ReplacementPolicy::Lru),
            "FIFO" => Some(ReplacementPolicy::Fifo),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheAttrs {
    pub storage: DataStorageAttrs,
    pub write_allocate: bool,
    pub write_back: bool,
    pub miss_latency: u64,
    pub hit_latency: u64,
    /// Line size in words; addresses are word-granular.
    pub cache_line_size: u64,
    pub replacement_policy: ReplacementPolicy,
    pub sets: u64,
    pub ways: u64,
}

impl CacheAttrs {
    pub fn capacity_words(&self) -> u64 {
        self.sets * self.ways * self.cache_line_size
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MemError {
    UnmappedAddress(u64),
    WidthExceedsPort { width: u64, port_width: u64 },
}

impl fmt::Display for MemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MemError::UnmappedAddress(a) => write!(f, "address {a:#x} is not mapped"),
            MemError::WidthExceedsPort { width, port_width } => {
                write!(f, "transaction width {width} exceeds port width {port_width}")
            }
        }
    }
}

impl std::error::Error for MemError {}
