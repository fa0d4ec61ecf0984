//! Per-thread operation counters.
//!
//! With the `op-counters` feature enabled every group operation performed
//! through the backbone wrappers bumps a thread-local counter, which lets
//! tests assert exact operation counts for an algorithm. Without the feature
//! the hooks compile to nothing.

use serde::Serialize;

/// Snapshot of the operations performed on the current thread.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct OpCounts {
    /// Hash-to-G evaluations.
    pub hash: u64,
    /// Scalar multiplications in G.
    pub g_mul: u64,
    /// Scalar multiplications in H.
    pub h_mul: u64,
    /// Point additions/subtractions in G.
    pub g_add: u64,
    /// Point additions/subtractions in H.
    pub h_add: u64,
    /// Pairings (each term of a multi-pairing counts once).
    pub pairing: u64,
    /// Multiplications in G_T, including products of Miller-loop outputs.
    pub gt_mul: u64,
    /// Exponentiations in G_T.
    pub gt_exp: u64,
}

impl OpCounts {
    pub fn scalar_muls(&self) -> u64 {
        self.g_mul + self.h_mul
    }

    pub fn additions(&self) -> u64 {
        self.g_add + self.h_add
    }
}

impl std::ops::Add for OpCounts {
    type Output = OpCounts;

    fn add(self, o: OpCounts) -> OpCounts {
        OpCounts {
            hash: self.hash + o.hash,
            g_mul: self.g_mul + o.g_mul,
            h_mul: self.h_mul + o.h_mul,
            g_add: self.g_add + o.g_add,
            h_add: self.h_add + o.h_add,
            pairing: self.pairing + o.pairing,
            gt_mul: self.gt_mul + o.gt_mul,
            gt_exp: self.gt_exp + o.gt_exp,
        }
    }
}

impl std::ops::Sub for OpCounts {
    type Output = OpCounts;

    fn sub(self, o: OpCounts) -> OpCounts {
        OpCounts {
            hash: self.hash - o.hash,
            g_mul: self.g_mul - o.g_mul,
            h_mul: self.h_mul - o.h_mul,
            g_add: self.g_add - o.g_add,
            h_add: self.h_add - o.h_add,
            pairing: self.pairing - o.pairing,
            gt_mul: self.gt_mul - o.gt_mul,
            gt_exp: self.gt_exp - o.gt_exp,
        }
    }
}

#[derive(Clone, Copy)]
pub(crate) enum Op {
    Hash,
    GMul,
    HMul,
    GAdd,
    HAdd,
    Pairing,
    GtMul,
    GtExp,
}

#[cfg(feature = "op-counters")]
mod imp {
    use super::{Op, OpCounts};
    use std::cell::Cell;

    thread_local! {
        static COUNTS: Cell<OpCounts> = Cell::new(OpCounts::default());
    }

    #[inline]
    pub(crate) fn record(op: Op, k: u64) {
        COUNTS.with(|c| {
            let mut v = c.get();
            match op {
                Op::Hash => v.hash += k,
                Op::GMul => v.g_mul += k,
                Op::HMul => v.h_mul += k,
                Op::GAdd => v.g_add += k,
                Op::HAdd => v.h_add += k,
                Op::Pairing => v.pairing += k,
                Op::GtMul => v.gt_mul += k,
                Op::GtExp => v.gt_exp += k,
            }
            c.set(v);
        });
    }

    pub fn snapshot() -> OpCounts {
        COUNTS.with(|c| c.get())
    }

    pub fn reset() {
        COUNTS.with(|c| c.set(OpCounts::default()));
    }
}

#[cfg(not(feature = "op-counters"))]
mod imp {
    use super::{Op, OpCounts};

    #[inline(always)]
    pub(crate) fn record(_op: Op, _k: u64) {}

    pub fn snapshot() -> OpCounts {
        OpCounts::default()
    }

    pub fn reset() {}
}

pub(crate) use imp::record;
pub use imp::{reset, snapshot};

/// True when the crate was built with operation counting.
pub const ENABLED: bool = cfg!(feature = "op-counters");

/// Runs `f` and returns its result with the operations it performed on this
/// thread. Counts are all zero unless `op-counters` is enabled.
pub fn measure<R>(f: impl FnOnce() -> R) -> (R, OpCounts) {
    let before = snapshot();
    let out = f();
    (out, snapshot() - before)
}
