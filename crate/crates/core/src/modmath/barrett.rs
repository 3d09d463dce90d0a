use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::ModMathError;
use crate::word::{Limbs, Word};

/// Widest Barrett constant the configuration register can hold.
pub const BARRETT_CONSTANT_BITS: u32 = 160;

/// Double-width product of two residues, `hi * 2^BITS + lo`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct WideProduct<W: Word> {
    pub hi: W,
    pub lo: W,
}

impl<W: Word> WideProduct<W> {
    pub fn new(hi: W, lo: W) -> Self {
        WideProduct { hi, lo }
    }

    pub fn of(a: W, b: W) -> Self {
        let (hi, lo) = a.mul_wide(b);
        WideProduct { hi, lo }
    }

    pub fn from_biguint(v: &BigUint) -> Option<Self> {
        if v.bits() > 2 * <W as Word>::BITS as u64 {
            return None;
        }
        let mask = (BigUint::one() << <W as Word>::BITS) - 1u32;
        let lo = W::from_biguint(&(v & &mask))?;
        let hi = W::from_biguint(&(v >> <W as Word>::BITS))?;
        Some(WideProduct { hi, lo })
    }

    pub fn to_biguint(&self) -> BigUint {
        (self.hi.to_biguint() << <W as Word>::BITS) + self.lo.to_biguint()
    }

    fn limbs(&self) -> Limbs {
        if <W as Word>::BITS == 128 {
            Limbs::from_wide(self.hi.as_u128(), self.lo.as_u128())
        } else {
            Limbs::from_u128((self.hi.as_u128() << <W as Word>::BITS) | self.lo.as_u128())
        }
    }
}

/// The precomputed estimate `floor(2^k / q)`, up to 160 bits wide.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct BarrettConstant([u64; 3]);

impl BarrettConstant {
    pub fn from_biguint(v: &BigUint) -> Result<Self, ModMathError> {
        if v.bits() > BARRETT_CONSTANT_BITS as u64 {
            return Err(ModMathError::ConstantTooWide {
                bits: v.bits() as u32,
            });
        }
        let digits = v.to_u64_digits();
        let mut limbs = [0u64; 3];
        limbs[..digits.len()].copy_from_slice(&digits);
        Ok(BarrettConstant(limbs))
    }

    pub fn to_biguint(&self) -> BigUint {
        let mut out = BigUint::zero();
        for &l in self.0.iter().rev() {
            out = (out << 64u32) + BigUint::from(l);
        }
        out
    }

    /// Five little-endian 32-bit words, the BARRETTCTL2 register layout.
    pub fn to_register_words(&self) -> [u32; 5] {
        let mut out = [0u32; 5];
        for (i, w) in out.iter_mut().enumerate() {
            *w = (self.0[i / 2] >> (32 * (i % 2))) as u32;
        }
        out
    }

    pub fn from_register_words(words: [u32; 5]) -> Self {
        let mut limbs = [0u64; 3];
        for (i, &w) in words.iter().enumerate() {
            limbs[i / 2] |= (w as u64) << (32 * (i % 2));
        }
        BarrettConstant(limbs)
    }

    fn limbs(&self) -> Limbs {
        Limbs([self.0[0], self.0[1], self.0[2], 0, 0, 0])
    }
}

impl fmt::Display for BarrettConstant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_biguint())
    }
}

/// Modulus plus the Barrett shift `k` and constant `mu = floor(2^k / q)`.
///
/// Reduction follows the classical estimate
/// `q3 = ((x >> (b-1)) * mu) >> (k-b+1)` with `b = bitlen(q)`, which is at
/// most two below the true quotient for any `x < 2^k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BarrettContext<W: Word> {
    q: W,
    k: u32,
    mu: BarrettConstant,
    q_bits: u32,
    q_limbs: Limbs,
    mu_limbs: Limbs,
}

impl<W: Word> BarrettContext<W> {
    /// Context with the default shift `k = 2 * bitlen(q)`.
    pub fn new(q: W) -> Result<Self, ModMathError> {
        Self::with_shift(q, 2 * q.bit_len())
    }

    pub fn with_shift(q: W, k: u32) -> Result<Self, ModMathError> {
        if q <= W::one() {
            return Err(ModMathError::InvalidModulus(q.as_u128()));
        }
        let q_bits = q.bit_len();
        let max = 2 * <W as Word>::BITS;
        if k < 2 * q_bits || k > max {
            return Err(ModMathError::InvalidShift { k, q_bits, max });
        }
        let mu = (BigUint::one() << k) / q.to_biguint();
        let mu = BarrettConstant::from_biguint(&mu)?;
        Ok(Self::assemble(q, k, mu))
    }

    /// Rebuild a context from raw register values, validating `mu`.
    pub fn from_parts(q: W, k: u32, mu: BarrettConstant) -> Result<Self, ModMathError> {
        let ctx = Self::with_shift(q, k)?;
        if ctx.mu != mu {
            return Err(ModMathError::ConstantMismatch {
                expected: ctx.mu.to_biguint().to_string(),
                got: mu.to_biguint().to_string(),
            });
        }
        Ok(ctx)
    }

    fn assemble(q: W, k: u32, mu: BarrettConstant) -> Self {
        BarrettContext {
            q,
            k,
            mu,
            q_bits: q.bit_len(),
            q_limbs: Limbs::from_u128(q.as_u128()),
            mu_limbs: mu.limbs(),
        }
    }

    #[inline]
    pub fn modulus(&self) -> W {
        self.q
    }

    #[inline]
    pub fn shift(&self) -> u32 {
        self.k
    }

    #[inline]
    pub fn constant(&self) -> BarrettConstant {
        self.mu
    }

    /// `x mod q` for `x < 2^k`. The precondition is only debug-checked.
    #[inline]
    pub fn reduce(&self, x: WideProduct<W>) -> W {
        let x = x.limbs();
        debug_assert!(x.bit_len() <= self.k, "Barrett input wider than 2^k");
        let q1 = x.shr(self.q_bits - 1);
        let q3 = q1.mul(&self.mu_limbs).shr(self.k - self.q_bits + 1);
        let mut r = x.sub(&q3.mul(&self.q_limbs));
        let mut corrections = 0;
        while r.ge(&self.q_limbs) {
            r = r.sub(&self.q_limbs);
            corrections += 1;
        }
        debug_assert!(corrections <= 2, "Barrett estimate off by {corrections}");
        W::from_u128_truncate(r.low_u128())
    }

    /// Like [`reduce`](Self::reduce) but rejects inputs `>= 2^k`.
    pub fn reduce_checked(&self, x: WideProduct<W>) -> Result<W, ModMathError> {
        let bits = x.limbs().bit_len();
        if bits > self.k {
            return Err(ModMathError::ProductTooWide { bits, k: self.k });
        }
        Ok(self.reduce(x))
    }

    /// Reduce an arbitrary word (single-width, so always below `2^k`).
    #[inline]
    pub fn reduce_word(&self, x: W) -> W {
        if x < self.q {
            x
        } else {
            x % self.q
        }
    }

    #[inline]
    pub fn add(&self, a: W, b: W) -> W {
        debug_assert!(a < self.q && b < self.q);
        let gap = self.q - b;
        if a >= gap {
            a - gap
        } else {
            a + b
        }
    }

    #[inline]
    pub fn sub(&self, a: W, b: W) -> W {
        debug_assert!(a < self.q && b < self.q);
        if a >= b {
            a - b
        } else {
            self.q - b + a
        }
    }

    #[inline]
    pub fn neg(&self, a: W) -> W {
        if a.is_zero() {
            a
        } else {
            self.q - a
        }
    }

    #[inline]
    pub fn mul(&self, a: W, b: W) -> W {
        debug_assert!(a < self.q && b < self.q);
        self.reduce(WideProduct::of(a, b))
    }

    /// Square-and-multiply; `a` need not be reduced.
    pub fn pow(&self, a: W, mut e: u128) -> W {
        let mut base = self.reduce_word(a);
        let mut acc = self.reduce_word(W::one());
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(base, base);
            }
        }
        acc
    }

    /// Multiplicative inverse by the extended Euclidean algorithm.
    pub fn inv(&self, a: W) -> Result<W, ModMathError> {
        let a = self.reduce_word(a);
        let (mut r0, mut r1) = (self.q, a);
        let (mut s0, mut s1) = (W::zero(), self.reduce_word(W::one()));
        while !r1.is_zero() {
            let quot = r0 / r1;
            let rem = r0 % r1;
            let s2 = self.sub(s0, self.mul(self.reduce_word(quot), s1));
            r0 = r1;
            r1 = rem;
            s0 = s1;
            s1 = s2;
        }
        if r0 != W::one() {
            return Err(ModMathError::NotInvertible {
                value: a.as_u128(),
                modulus: self.q.as_u128(),
            });
        }
        Ok(s0)
    }
}

/// Reduce a double-width value with a prepared context.
pub fn barrett_reduce<W: Word>(
    x: WideProduct<W>,
    ctx: &BarrettContext<W>,
) -> Result<W, ModMathError> {
    ctx.reduce_checked(x)
}

impl<W: Word> fmt::Display for BarrettContext<W> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q={} k={} mu={}", self.q, self.k, self.mu)
    }
}
