//! DRAM bank and row-buffer timing.

use super::{AccessKind, DramAttrs, MemError};
use crate::metamodel::latency::EvalContext;
use std::collections::BTreeMap;

/// Row-buffer outcome of one DRAM access.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DramCase {
    RowHit,
    ClosedBank,
    RowConflict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DramAccess {
    pub cycles: u64,
    pub case: DramCase,
}

#[derive(Debug, Clone, Copy, Default)]
struct Bank {
    open_row: Option<u64>,
    /// Cycle the open row was activated; gates precharge through t_RAS.
    activated_at: u64,
}

#[derive(Debug, Clone)]
pub struct DramState {
    attrs: DramAttrs,
    banks: BTreeMap<u64, Bank>,
}

impl DramState {
    pub fn new(attrs: DramAttrs) -> DramState {
        let banks = attrs
            .bank_address_ranges
            .keys()
            .map(|&id| (id, Bank::default()))
            .collect();
        DramState { attrs, banks }
    }

    pub fn attrs(&self) -> &DramAttrs {
        &self.attrs
    }

    fn bank_of(&self, addr: u64) -> Result<u64, MemError> {
        self.attrs
            .bank_address_ranges
            .iter()
            .find(|(_, r)| r.contains(addr))
            .map(|(&id, _)| id)
            .ok_or(MemError::UnmappedAddress(addr))
    }

    /// Access latency including row-buffer management, updating bank state.
    ///
    /// Row hit: base. Closed bank: t_RCD + base. Row conflict: wait out the
    /// remaining t_RAS of the open row, then t_RP + t_RCD + base.
    pub fn access(
        &mut self,
        kind: AccessKind,
        addr: u64,
        width: u64,
        now: u64,
    ) -> Result<DramAccess, MemError> {
        let base_spec = match kind {
            AccessKind::Read => &self.attrs.memory.read_latency,
            AccessKind::Write => &self.attrs.memory.write_latency,
        };
        let ctx = EvalContext {
            immediates: vec![],
            num_reads: (kind == AccessKind::Read) as i64,
            num_writes: (kind == AccessKind::Write) as i64,
            data_size: (width * self.attrs.memory.storage.data_width) as i64,
        };
        let base = base_spec
            .eval(&ctx)
            .unwrap_or_else(|e| panic!("latency expression rejected at build time: {e}"));
        let bank_id = self.bank_of(addr)?;
        let row = addr / self.attrs.row_size;
        let bank = self.banks.get_mut(&bank_id).expect("bank exists");
        let access = match bank.open_row {
            Some(open) if open == row => DramAccess {
                cycles: base,
                case: DramCase::RowHit,
            },
            None => {
                bank.open_row = Some(row);
                bank.activated_at = now;
                DramAccess {
                    cycles: self.attrs.t_rcd + base,
                    case: DramCase::ClosedBank,
                }
            }
            Some(_) => {
                let elapsed = now.saturating_sub(bank.activated_at);
                let wait = self.attrs.t_ras.saturating_sub(elapsed);
                bank.open_row = Some(row);
                bank.activated_at = now + wait + self.attrs.t_rp;
                DramAccess {
                    cycles: wait + self.attrs.t_rp + self.attrs.t_rcd + base,
                    case: DramCase::RowConflict,
                }
            }
        };
        Ok(access)
    }

    pub fn is_row_hit(&self, addr: u64) -> Result<bool, MemError> {
        let bank_id = self.bank_of(addr)?;
        let row = addr / self.attrs.row_size;
        Ok(self.banks[&bank_id].open_row == Some(row))
    }
}
