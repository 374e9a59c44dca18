//! Process-wide cap on dense table sizes.
//!
//! Every routine that materializes a table over `F_p^k` asks this module
//! first. The default admits `2^26` entries; the CLI lowers it from
//! `POLYLAB_BUDGET_MB` or `--budget`.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};

pub const DEFAULT_TABLE_BUDGET: u64 = 1 << 26;

static TABLE_BUDGET: AtomicU64 = AtomicU64::new(DEFAULT_TABLE_BUDGET);

pub fn table_budget() -> u64 {
    TABLE_BUDGET.load(Ordering::Relaxed)
}

pub fn set_table_budget(entries: u64) {
    TABLE_BUDGET.store(entries.max(1), Ordering::Relaxed);
}

/// `p^k`, saturating at `u64::MAX`.
pub fn saturating_pow(p: u64, k: usize) -> u64 {
    let mut acc: u64 = 1;
    for _ in 0..k {
        acc = acc.saturating_mul(p);
    }
    acc
}

/// Checks that a table of `p^k` entries fits the current budget and returns its size.
pub fn check_table(p: u64, k: usize) -> Result<usize> {
    check_entries(saturating_pow(p, k))
}

pub fn check_entries(requested: u64) -> Result<usize> {
    let limit = table_budget();
    if requested > limit {
        return Err(Error::Budget { requested, limit });
    }
    Ok(requested as usize)
}
