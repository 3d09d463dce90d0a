use super::{BarrettContext, ModMathError};
use crate::word::Word;

pub const MIN_DEGREE: usize = 4;
pub const MAX_DEGREE: usize = 1 << 14;

const SMALL_PRIMES: [u32; 25] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
];

// The first 13 prime bases are a proven deterministic set below this bound.
const PROVEN_BOUND: u128 = 3_317_044_064_679_887_385_961_981;

/// Deterministic Miller-Rabin with fixed prime bases.
///
/// Below `3.3 * 10^24` the first 13 prime bases are exact. Above that the
/// test uses the first 25 prime bases: still a fixed, reproducible witness
/// set, with no known counterexample below `2^128`.
pub fn is_prime<W: Word>(n: W) -> bool {
    let n = n.as_u128();
    if n < 2 {
        return false;
    }
    for &p in SMALL_PRIMES.iter() {
        let p = p as u128;
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    if n < 97 * 97 {
        return true;
    }
    let ctx = BarrettContext::<u128>::new(n).expect("n > 1");
    let d_full = n - 1;
    let s = d_full.trailing_zeros();
    let d = d_full >> s;
    let bases = if n < PROVEN_BOUND {
        &SMALL_PRIMES[..13]
    } else {
        &SMALL_PRIMES[..]
    };
    'witness: for &a in bases {
        let mut x = ctx.pow(a as u128, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = ctx.mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn check_degree(n: usize) -> Result<(), ModMathError> {
    if !n.is_power_of_two() || !(MIN_DEGREE..=MAX_DEGREE).contains(&n) {
        return Err(ModMathError::InvalidDegree(n));
    }
    Ok(())
}

/// The smallest prime `q = 2kn + 1` (k >= 1) with exactly `bits` bits.
pub fn gen_ntt_prime<W: Word>(n: usize, bits: u32) -> Result<W, ModMathError> {
    Ok(gen_ntt_primes(n, bits, 1)?[0])
}

/// The `count` smallest primes `q = 1 mod 2n` with exactly `bits` bits, ascending.
pub fn gen_ntt_primes<W: Word>(n: usize, bits: u32, count: usize) -> Result<Vec<W>, ModMathError> {
    check_degree(n)?;
    let word_bits = <W as Word>::BITS;
    if !(2..=word_bits).contains(&bits) {
        return Err(ModMathError::InvalidBitSize { bits, word_bits });
    }
    let step = 2 * n as u128;
    let lo = 1u128 << (bits - 1);
    let hi = if bits == 128 {
        u128::MAX
    } else {
        (1u128 << bits) - 1
    };
    // first candidate >= max(lo, step + 1) with candidate = 1 mod step
    let floor = lo.max(step + 1);
    let mut cand = match (floor - 1) % step {
        0 => floor,
        r => match (floor - 1 - r).checked_add(step + 1) {
            Some(c) => c,
            None => {
                return Err(ModMathError::PrimeSearchExhausted {
                    modulus_step: step,
                    bits,
                })
            }
        },
    };
    let mut found = Vec::with_capacity(count);
    while cand <= hi && found.len() < count {
        if is_prime(cand) {
            found.push(W::from_u128(cand).expect("candidate fits the word"));
        }
        cand = match cand.checked_add(step) {
            Some(c) => c,
            None => break,
        };
    }
    if found.len() < count {
        return Err(ModMathError::PrimeSearchExhausted {
            modulus_step: step,
            bits,
        });
    }
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_primes_by_sieve() {
        let limit = 20_000usize;
        let mut sieve = vec![true; limit];
        sieve[0] = false;
        sieve[1] = false;
        for i in 2..limit {
            if sieve[i] {
                for j in (i * i..limit).step_by(i) {
                    sieve[j] = false;
                }
            }
        }
        for (i, &p) in sieve.iter().enumerate() {
            assert_eq!(is_prime(i as u64), p, "{i}");
        }
    }

    #[test]
    fn known_large_values() {
        assert!(is_prime((1u128 << 127) - 1));
        assert!(is_prime(u64::MAX as u128 - 58)); // 2^64 - 59
        assert!(is_prime((1u128 << 61) - 1));
        assert!(!is_prime((1u128 << 127) + 1));
        // strong pseudoprime to bases 2..37
        assert!(!is_prime(3_825_123_056_546_413_051u128));
        // Carmichael number
        assert!(!is_prime(561u32));
        // product of two 64-bit primes
        let p = u64::MAX as u128 - 58;
        let q = (1u128 << 61) - 1;
        assert!(!is_prime(p * q));
    }

    #[test]
    fn ntt_prime_examples() {
        assert_eq!(gen_ntt_prime::<u64>(4, 9).unwrap(), 257);
        assert_eq!(gen_ntt_prime::<u64>(8, 5).unwrap(), 17);
        let q: u128 = gen_ntt_prime(1 << 13, 60).unwrap();
        assert!(is_prime(q));
        assert_eq!(q % (1 << 14), 1);
        assert_eq!(q.bit_len(), 60);
    }

    #[test]
    fn exhausted_range_errors() {
        // [4, 8) holds no value that is 1 mod 8
        assert!(matches!(
            gen_ntt_prime::<u32>(4, 3),
            Err(ModMathError::PrimeSearchExhausted { .. })
        ));
        assert!(gen_ntt_prime::<u32>(4, 40).is_err());
        assert!(gen_ntt_prime::<u64>(6, 20).is_err());
        assert!(gen_ntt_prime::<u64>(1 << 15, 40).is_err());
    }

    #[test]
    fn distinct_ascending_towers() {
        let qs: Vec<u128> = gen_ntt_primes(1 << 13, 109, 2).unwrap();
        assert!(qs[0] < qs[1]);
        for q in qs {
            assert_eq!(q.bit_len(), 109);
            assert_eq!(q % (1 << 14), 1);
        }
        let top: u128 = gen_ntt_prime(16, 128).unwrap();
        assert_eq!(top.bit_len(), 128);
    }
}
