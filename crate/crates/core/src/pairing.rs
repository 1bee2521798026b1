//! Who is served with whom inside one frame.
//!
//! A frame is served in three steps:
//! 1. cross-cell co-channel pairs until the lighter cell is exhausted;
//! 2. if the lighter cell's UAV flies high, it pairs up with the heavier
//!    cell's UAV to serve the heavier cell's surplus two at a time;
//! 3. whatever is left is served individually by its own UAV.
//!
//! Each service unit occupies two slots (one per direction).

use crate::error::{Error, Result};
use crate::sinr::{Altitude, Configuration};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AccountingMode {
    /// Same-cell pair count equal to the full surplus |k| (as originally written).
    PaperLiteral,
    /// Same-cell pair count floor(|k|/2), so every active user is served once.
    Consistent,
}

impl AccountingMode {
    pub fn label(self) -> &'static str {
        match self {
            AccountingMode::PaperLiteral => "paper",
            AccountingMode::Consistent => "consistent",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PairCounts {
    /// Co-channel pairs across the two cells.
    pub a_d: u32,
    /// Co-channel pairs inside one cell.
    pub a_s: u32,
    /// Individually served users.
    pub b: u32,
}

impl PairCounts {
    pub fn units(&self) -> u32 {
        self.a_d + self.a_s + self.b
    }

    pub fn slots(&self) -> u32 {
        2 * self.units()
    }

    pub fn served_users(&self) -> u32 {
        2 * self.a_d + 2 * self.a_s + self.b
    }
}

/// Whether the lighter cell's UAV is high enough to help the heavier cell.
/// For k > 0 cell 1 is heavier and UAV2 helps; for k <= 0 the roles swap.
pub fn partner_helps(k: i64, h1: Altitude, h2: Altitude) -> bool {
    if k > 0 {
        h2 == Altitude::High
    } else {
        h1 == Altitude::High
    }
}

pub(crate) fn counts_with_helper(k: i64, k2: u32, helper_high: bool, mode: AccountingMode) -> PairCounts {
    let surplus = k.unsigned_abs() as u32;
    let a_d = if k > 0 { k2 } else { (i64::from(k2) + k) as u32 };
    if !helper_high {
        return PairCounts { a_d, a_s: 0, b: surplus };
    }
    let a_s = match mode {
        AccountingMode::PaperLiteral => surplus,
        AccountingMode::Consistent => surplus / 2,
    };
    PairCounts { a_d, a_s, b: surplus % 2 }
}

/// Pair counts (a_d, a_s, b) for load difference `k = K1 - K2` and `k2 = K2`.
pub fn pair_counts(k: i64, k2: u32, h1: Altitude, h2: Altitude, mode: AccountingMode) -> Result<PairCounts> {
    if h1 == Altitude::High && h2 == Altitude::High {
        return Err(Error::InvalidAltitudePair);
    }
    if i64::from(k2) + k < 0 {
        return Err(Error::InvalidValue {
            key: "k".into(),
            reason: format!("K1 = K2 + k = {} + {} is negative", k2, k),
        });
    }
    Ok(counts_with_helper(k, k2, partner_helps(k, h1, h2), mode))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    One,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateClass {
    CochannelDiff,
    CochannelSame,
    Individual,
}

/// Two slots serving one pair or one individual user in both directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ServiceUnit<T> {
    /// `user1` (cell 1) by UAV1 and `user2` (cell 2) by UAV2.
    CrossCell { user1: T, user2: T },
    /// Two users of `cell`: `own` by the cell's UAV, `helped` by the other UAV.
    SameCell { cell: Cell, own: T, helped: T },
    /// One user served alone by its cell's UAV.
    Individual { cell: Cell, user: T },
}

impl<T> ServiceUnit<T> {
    pub fn rate_class(&self) -> RateClass {
        match self {
            ServiceUnit::CrossCell { .. } => RateClass::CochannelDiff,
            ServiceUnit::SameCell { .. } => RateClass::CochannelSame,
            ServiceUnit::Individual { .. } => RateClass::Individual,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotPlan<T> {
    pub units: Vec<ServiceUnit<T>>,
}

impl<T> SlotPlan<T> {
    pub fn slot_count(&self) -> usize {
        2 * self.units.len()
    }

    pub fn counts(&self) -> PairCounts {
        let mut c = PairCounts::default();
        for u in &self.units {
            match u.rate_class() {
                RateClass::CochannelDiff => c.a_d += 1,
                RateClass::CochannelSame => c.a_s += 1,
                RateClass::Individual => c.b += 1,
            }
        }
        c
    }
}

/// Build the frame's service order. Users are matched in list order.
pub fn schedule_frame<T: Copy>(cell1: &[T], cell2: &[T], cfg: &Configuration) -> SlotPlan<T> {
    let paired = cell1.len().min(cell2.len());
    let mut units: Vec<ServiceUnit<T>> = cell1[..paired]
        .iter()
        .zip(&cell2[..paired])
        .map(|(&user1, &user2)| ServiceUnit::CrossCell { user1, user2 })
        .collect();

    let (cell, rest) = if cell1.len() > cell2.len() {
        (Cell::One, &cell1[paired..])
    } else {
        (Cell::Two, &cell2[paired..])
    };
    let k = cell1.len() as i64 - cell2.len() as i64;
    let mut leftovers = rest;
    if partner_helps(k, cfg.h1, cfg.h2) {
        let mut chunks = rest.chunks_exact(2);
        for pair in chunks.by_ref() {
            units.push(ServiceUnit::SameCell { cell, own: pair[0], helped: pair[1] });
        }
        leftovers = chunks.remainder();
    }
    units.extend(leftovers.iter().map(|&user| ServiceUnit::Individual { cell, user }));
    SlotPlan { units }
}
