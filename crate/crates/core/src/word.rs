//! Unsigned machine words used as residues.
//!
//! All ring arithmetic is generic over [`Word`]. The device datapath is fixed
//! at 128 bits ([`crate::Coefficient`]), but `u32` and `u64` instantiations are
//! useful for small towers and as a cross-check of the wide path.

use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{PrimInt, Unsigned, WrappingAdd, WrappingMul, WrappingSub};

/// An unsigned integer type that can hold a residue.
pub trait Word:
    PrimInt
    + Unsigned
    + WrappingAdd
    + WrappingSub
    + WrappingMul
    + Hash
    + Debug
    + Display
    + FromStr
    + Default
    + Send
    + Sync
    + 'static
{
    const BITS: u32;

    /// Full double-width product as `(hi, lo)`.
    fn mul_wide(self, rhs: Self) -> (Self, Self);

    fn as_u128(self) -> u128;

    /// Truncating conversion from `u128`.
    fn from_u128_truncate(v: u128) -> Self;

    /// Number of significant bits; `0` for zero.
    fn bit_len(self) -> u32 {
        <Self as Word>::BITS - self.leading_zeros()
    }

    fn to_biguint(self) -> BigUint {
        BigUint::from(self.as_u128())
    }

    /// Checked conversion from a `u128`.
    fn from_u128(v: u128) -> Option<Self> {
        let w = Self::from_u128_truncate(v);
        (w.as_u128() == v).then_some(w)
    }

    fn from_biguint(v: &BigUint) -> Option<Self> {
        u128::try_from(v).ok().and_then(Self::from_u128)
    }
}

macro_rules! impl_word_native {
    ($t:ty, $wide:ty) => {
        impl Word for $t {
            const BITS: u32 = <$t>::BITS;

            #[inline]
            fn mul_wide(self, rhs: Self) -> (Self, Self) {
                let p = (self as $wide) * (rhs as $wide);
                ((p >> <$t>::BITS) as $t, p as $t)
            }

            #[inline]
            fn as_u128(self) -> u128 {
                self as u128
            }

            #[inline]
            fn from_u128_truncate(v: u128) -> Self {
                v as $t
            }
        }
    };
}

impl_word_native!(u32, u64);
impl_word_native!(u64, u128);

impl Word for u128 {
    const BITS: u32 = 128;

    #[inline]
    fn mul_wide(self, rhs: Self) -> (Self, Self) {
        const MASK: u128 = u64::MAX as u128;
        let (a0, a1) = (self & MASK, self >> 64);
        let (b0, b1) = (rhs & MASK, rhs >> 64);
        let p00 = a0 * b0;
        let p01 = a0 * b1;
        let p10 = a1 * b0;
        let p11 = a1 * b1;
        // middle column cannot overflow: three terms each < 2^64
        let mid = (p00 >> 64) + (p01 & MASK) + (p10 & MASK);
        let lo = (p00 & MASK) | (mid << 64);
        let hi = p11 + (p01 >> 64) + (p10 >> 64) + (mid >> 64);
        (hi, lo)
    }

    #[inline]
    fn as_u128(self) -> u128 {
        self
    }

    #[inline]
    fn from_u128_truncate(v: u128) -> Self {
        v
    }
}

/// Fixed 384-bit little-endian limb buffer for Barrett intermediates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub(crate) struct Limbs(pub(crate) [u64; 6]);

impl Limbs {
    pub(crate) fn from_u128(v: u128) -> Self {
        let mut l = [0u64; 6];
        l[0] = v as u64;
        l[1] = (v >> 64) as u64;
        Limbs(l)
    }

    pub(crate) fn from_wide(hi: u128, lo: u128) -> Self {
        Limbs([
            lo as u64,
            (lo >> 64) as u64,
            hi as u64,
            (hi >> 64) as u64,
            0,
            0,
        ])
    }

    /// Truncating product; callers guarantee the true product fits in 384 bits.
    pub(crate) fn mul(&self, rhs: &Self) -> Self {
        let mut out = [0u64; 6];
        for i in 0..6 {
            if self.0[i] == 0 {
                continue;
            }
            let mut carry: u128 = 0;
            for j in 0..(6 - i) {
                let t = self.0[i] as u128 * rhs.0[j] as u128 + out[i + j] as u128 + carry;
                out[i + j] = t as u64;
                carry = t >> 64;
            }
        }
        Limbs(out)
    }

    pub(crate) fn shr(&self, s: u32) -> Self {
        let words = (s / 64) as usize;
        let bits = s % 64;
        let mut out = [0u64; 6];
        for (i, o) in out.iter_mut().enumerate() {
            let src = i + words;
            if src >= 6 {
                break;
            }
            let mut v = self.0[src] >> bits;
            if bits != 0 && src + 1 < 6 {
                v |= self.0[src + 1] << (64 - bits);
            }
            *o = v;
        }
        Limbs(out)
    }

    /// `self - rhs`; requires `self >= rhs`.
    pub(crate) fn sub(&self, rhs: &Self) -> Self {
        let mut out = [0u64; 6];
        let mut borrow = false;
        for (i, o) in out.iter_mut().enumerate() {
            let (d1, b1) = self.0[i].overflowing_sub(rhs.0[i]);
            let (d2, b2) = d1.overflowing_sub(borrow as u64);
            *o = d2;
            borrow = b1 | b2;
        }
        debug_assert!(!borrow, "limb subtraction underflow");
        Limbs(out)
    }

    pub(crate) fn ge(&self, rhs: &Self) -> bool {
        for i in (0..6).rev() {
            if self.0[i] != rhs.0[i] {
                return self.0[i] > rhs.0[i];
            }
        }
        true
    }

    pub(crate) fn low_u128(&self) -> u128 {
        self.0[0] as u128 | ((self.0[1] as u128) << 64)
    }

    pub(crate) fn bit_len(&self) -> u32 {
        for i in (0..6).rev() {
            if self.0[i] != 0 {
                return 64 * i as u32 + (64 - self.0[i].leading_zeros());
            }
        }
        0
    }
}
