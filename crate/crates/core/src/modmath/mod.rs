//! Exact modular arithmetic on residues up to 128 bits.
//!
//! Multiplication forms the full double-width product and reduces it with
//! a Barrett context. The shift defaults to `k = 2 * bitlen(q)`; the
//! configuration register description reads "barrettk = 2 * log n", which
//! is recorded here verbatim but not followed.

mod barrett;
mod prime;
mod root;

pub use barrett::{
    barrett_reduce, BarrettConstant, BarrettContext, WideProduct, BARRETT_CONSTANT_BITS,
};
pub use prime::{gen_ntt_prime, gen_ntt_primes, is_prime, MAX_DEGREE, MIN_DEGREE};
pub use root::find_primitive_root;

use thiserror::Error;

use crate::word::Word;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModMathError {
    #[error("operand {value} is not reduced modulo {modulus}")]
    NotReduced { value: u128, modulus: u128 },
    #[error("invalid modulus {0}: must be greater than 1")]
    InvalidModulus(u128),
    #[error("Barrett shift k={k} out of range for a {q_bits}-bit modulus (need 2*{q_bits} <= k <= {max})")]
    InvalidShift { k: u32, q_bits: u32, max: u32 },
    #[error("Barrett constant needs {bits} bits, register holds 160")]
    ConstantTooWide { bits: u32 },
    #[error("Barrett constant mismatch: expected {expected}, got {got}")]
    ConstantMismatch { expected: String, got: String },
    #[error("Barrett input has {bits} bits, must be below 2^{k}")]
    ProductTooWide { bits: u32, k: u32 },
    #[error("degree {0} must be a power of two in [4, 16384]")]
    InvalidDegree(usize),
    #[error("bit size {bits} out of range for a {word_bits}-bit word")]
    InvalidBitSize { bits: u32, word_bits: u32 },
    #[error("no prime q = 1 mod {modulus_step} with exactly {bits} bits")]
    PrimeSearchExhausted { modulus_step: u128, bits: u32 },
    #[error("order {order} does not divide q-1 for q={q}")]
    OrderNotDivisor { q: u128, order: u64 },
    #[error("no element of order {order} found modulo {q}")]
    NoRootFound { q: u128, order: u64 },
    #[error("{value} has no inverse modulo {modulus}")]
    NotInvertible { value: u128, modulus: u128 },
}

fn check_reduced<W: Word>(v: W, q: W) -> Result<(), ModMathError> {
    if v >= q {
        Err(ModMathError::NotReduced {
            value: v.as_u128(),
            modulus: q.as_u128(),
        })
    } else {
        Ok(())
    }
}

/// `(a + b) mod q` without overflow, for any `q` up to the word width.
pub fn mod_add<W: Word>(a: W, b: W, q: W) -> Result<W, ModMathError> {
    check_reduced(a, q)?;
    check_reduced(b, q)?;
    let gap = q - b;
    Ok(if a >= gap { a - gap } else { a + b })
}

/// `(a - b) mod q`, wrapping into `[0, q)`.
pub fn mod_sub<W: Word>(a: W, b: W, q: W) -> Result<W, ModMathError> {
    check_reduced(a, q)?;
    check_reduced(b, q)?;
    Ok(if a >= b { a - b } else { q - b + a })
}

/// `(a * b) mod q` through the full product and Barrett reduction.
pub fn mod_mul<W: Word>(a: W, b: W, ctx: &BarrettContext<W>) -> Result<W, ModMathError> {
    check_reduced(a, ctx.modulus())?;
    check_reduced(b, ctx.modulus())?;
    Ok(ctx.mul(a, b))
}

pub fn mod_pow<W: Word>(a: W, e: u128, ctx: &BarrettContext<W>) -> W {
    ctx.pow(a, e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn small_examples() {
        assert_eq!(mod_add(5u32, 9, 13).unwrap(), 1);
        assert_eq!(mod_add(0u32, 0, 13).unwrap(), 0);
        assert_eq!(mod_sub(3u32, 5, 13).unwrap(), 11);
        assert_eq!(mod_sub(7u32, 7, 13).unwrap(), 0);
        let ctx = BarrettContext::<u32>::new(13).unwrap();
        assert_eq!(mod_mul(3, 4, &ctx).unwrap(), 12);
        assert_eq!(mod_pow(2, 0, &ctx), 1);
        assert_eq!(mod_pow(2, 4, &ctx), 3);
        let ctx257 = BarrettContext::<u64>::new(257).unwrap();
        assert_eq!(mod_pow(4, 8, &ctx257), 1);
        assert_eq!(mod_pow(4, 4, &ctx257), 256);
    }

    #[test]
    fn contract_errors() {
        assert_eq!(
            mod_add(13u32, 0, 13),
            Err(ModMathError::NotReduced {
                value: 13,
                modulus: 13
            })
        );
        assert!(mod_sub(0u64, 20, 13).is_err());
        let ctx = BarrettContext::<u32>::new(13).unwrap();
        assert!(mod_mul(14, 1, &ctx).is_err());
    }

    #[test]
    fn wide_add_near_top() {
        let q = (1u128 << 127) + 45;
        let a = 1u128 << 127;
        let b = (1u128 << 127) - 1;
        let expect = (BigUint::from(a) + BigUint::from(b)) % BigUint::from(q);
        assert_eq!(BigUint::from(mod_add(a, b, q).unwrap()), expect);
        let q = u128::MAX;
        let expect = (BigUint::from(q - 1) * 2u32) % BigUint::from(q);
        assert_eq!(BigUint::from(mod_add(q - 1, q - 1, q).unwrap()), expect);
    }

    #[test]
    fn identity_multiplication() {
        let ctx = BarrettContext::<u128>::new((1u128 << 109) - 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let x = rng.gen_range(0..ctx.modulus());
            assert_eq!(mod_mul(1, x, &ctx).unwrap(), x);
        }
    }

    #[test]
    fn random_120_bit_products_match_bigint() {
        let q: u128 = (1 << 120) - 119;
        let ctx = BarrettContext::new(q).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5000 {
            let a = rng.gen_range(0..q);
            let b = rng.gen_range(0..q);
            let expect = BigUint::from(a) * BigUint::from(b) % BigUint::from(q);
            assert_eq!(BigUint::from(mod_mul(a, b, &ctx).unwrap()), expect);
            let expect =
                (BigUint::from(a) + BigUint::from(q) - BigUint::from(b)) % BigUint::from(q);
            assert_eq!(BigUint::from(mod_sub(a, b, q).unwrap()), expect);
        }
    }

    #[test]
    fn word_widths_agree() {
        let q: u64 = 0xffff_ffff_0000_0001;
        let c64 = BarrettContext::<u64>::new(q).unwrap();
        let c128 = BarrettContext::<u128>::new(q as u128).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2000 {
            let a = rng.gen_range(0..q);
            let b = rng.gen_range(0..q);
            assert_eq!(c64.mul(a, b) as u128, c128.mul(a as u128, b as u128));
        }
    }
}
