use std::sync::atomic::{AtomicU64, Ordering};

use super::{PolyParams, RingError};
use crate::word::Word;

/// Twiddle factors with `psi` folded in, shared by forward and inverse transforms.
///
/// For a stage whose butterflies span `h` positions, entry `h + j` holds
/// `psi^((n / 2h) * (2j + 1))` for `j < h`; entry 0 is 1. The forward
/// transform reads `h + j`, the inverse reads `2h - 1 - j` (see
/// [`forward_index`] / [`inverse_index`]).
///
/// The table also counts how many transforms have read it.
#[derive(Debug)]
pub struct TwiddleTable<W: Word> {
    forward: Vec<W>,
    q: W,
    forward_uses: AtomicU64,
    inverse_uses: AtomicU64,
}

#[inline]
pub fn forward_index(half: usize, j: usize) -> usize {
    half + j
}

#[inline]
pub fn inverse_index(half: usize, j: usize) -> usize {
    2 * half - 1 - j
}

impl<W: Word> TwiddleTable<W> {
    pub fn new(params: &PolyParams<W>) -> Self {
        let ctx = params.ctx();
        let n = params.n;
        let mut forward = vec![W::zero(); n];
        forward[0] = W::one();
        let mut half = 1;
        while half < n {
            let base = ctx.pow(params.psi, (n / (2 * half)) as u128);
            let step = ctx.mul(base, base);
            let mut cur = base;
            for j in 0..half {
                forward[half + j] = cur;
                cur = ctx.mul(cur, step);
            }
            half *= 2;
        }
        TwiddleTable {
            forward,
            q: params.q,
            forward_uses: AtomicU64::new(0),
            inverse_uses: AtomicU64::new(0),
        }
    }

    /// Wrap an existing table, e.g. one read back from device memory.
    pub fn from_entries(entries: Vec<W>, q: W) -> Self {
        TwiddleTable {
            forward: entries,
            q,
            forward_uses: AtomicU64::new(0),
            inverse_uses: AtomicU64::new(0),
        }
    }

    #[inline]
    pub fn entries(&self) -> &[W] {
        &self.forward
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn forward_uses(&self) -> u64 {
        self.forward_uses.load(Ordering::Relaxed)
    }

    pub fn inverse_uses(&self) -> u64 {
        self.inverse_uses.load(Ordering::Relaxed)
    }

    pub fn reset_counters(&self) {
        self.forward_uses.store(0, Ordering::Relaxed);
        self.inverse_uses.store(0, Ordering::Relaxed);
    }

    pub(crate) fn note_forward(&self) {
        self.forward_uses.fetch_add(1, Ordering::Relaxed);
    }

    pub(crate) fn note_inverse(&self) {
        self.inverse_uses.fetch_add(1, Ordering::Relaxed);
    }

    pub(crate) fn check(&self, params: &PolyParams<W>) -> Result<(), RingError> {
        if self.forward.len() != params.n || self.q != params.q {
            return Err(RingError::TwiddleMismatch {
                table_len: self.forward.len(),
                n: params.n,
            });
        }
        Ok(())
    }
}

impl<W: Word> Clone for TwiddleTable<W> {
    /// Copies entries; counters start at zero on the clone.
    fn clone(&self) -> Self {
        TwiddleTable::from_entries(self.forward.clone(), self.q)
    }
}

impl<W: Word> PartialEq for TwiddleTable<W> {
    fn eq(&self, other: &Self) -> bool {
        self.q == other.q && self.forward == other.forward
    }
}

impl<W: Word> Eq for TwiddleTable<W> {}
