use num_integer::Integer;

use super::{BarrettContext, ModMathError};
use crate::word::Word;

const MAX_GENERATOR_TRIES: u128 = 1 << 20;

fn prime_factors(mut m: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= m {
        if m.is_multiple_of(p) {
            out.push(p);
            while m.is_multiple_of(p) {
                m /= p;
            }
        }
        p += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

fn has_exact_order<W: Word>(ctx: &BarrettContext<W>, x: W, order: u64, factors: &[u64]) -> bool {
    ctx.pow(x, order as u128) == W::one()
        && factors
            .iter()
            .all(|&p| ctx.pow(x, (order / p) as u128) != W::one())
}

/// The smallest residue of exact multiplicative order `order` modulo `q`.
///
/// One element of that order is found as `g^((q-1)/order)` for the first
/// suitable `g >= 2`; every other one is a power `c^j` with `gcd(j, order) = 1`,
/// so the minimum is taken over those `O(order)` powers.
pub fn find_primitive_root<W: Word>(q: W, order: u64) -> Result<W, ModMathError> {
    let ctx = BarrettContext::new(q)?;
    let q128 = q.as_u128();
    if order == 0 || !(q128 - 1).is_multiple_of(order as u128) {
        return Err(ModMathError::OrderNotDivisor { q: q128, order });
    }
    if order == 1 {
        return Ok(W::one());
    }
    let factors = prime_factors(order);
    let cofactor = (q128 - 1) / order as u128;
    let mut seed = None;
    let limit = q128.min(MAX_GENERATOR_TRIES);
    for g in 2..limit {
        let c = ctx.pow(W::from_u128_truncate(g), cofactor);
        if has_exact_order(&ctx, c, order, &factors) {
            seed = Some(c);
            break;
        }
    }
    let c = seed.ok_or(ModMathError::NoRootFound { q: q128, order })?;
    let mut best = c;
    let mut power = c;
    for j in 2..order {
        power = ctx.mul(power, c);
        if j.gcd(&order) == 1 && power < best {
            best = power;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modmath::{gen_ntt_prime, mod_pow};

    fn brute_force_min_root(q: u64, order: u64) -> u64 {
        (2..q)
            .find(|&x| {
                let mut acc = 1u64;
                let mut k = 0;
                loop {
                    acc = acc * x % q;
                    k += 1;
                    if acc == 1 {
                        break k == order;
                    }
                }
            })
            .unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(find_primitive_root(257u64, 8).unwrap(), 4);
        assert_eq!(find_primitive_root(17u64, 16).unwrap(), 3);
        assert_eq!(find_primitive_root(13u32, 2).unwrap(), 12);
        assert_eq!(find_primitive_root(13u32, 1).unwrap(), 1);
    }

    #[test]
    fn matches_brute_force_on_small_primes() {
        for (q, order) in [
            (97u64, 32u64),
            (193, 64),
            (257, 256),
            (7681, 512),
            (12289, 2048),
            (13, 12),
            (31, 15),
        ] {
            assert_eq!(
                find_primitive_root(q, order).unwrap(),
                brute_force_min_root(q, order),
                "q={q} order={order}"
            );
        }
    }

    #[test]
    fn order_must_divide() {
        assert!(matches!(
            find_primitive_root(13u32, 8),
            Err(ModMathError::OrderNotDivisor { .. })
        ));
    }

    #[test]
    fn half_order_is_minus_one() {
        for n in [4usize, 64, 1 << 13] {
            let q: u128 = gen_ntt_prime(n, 109).unwrap();
            let psi = find_primitive_root(q, 2 * n as u64).unwrap();
            let ctx = BarrettContext::new(q).unwrap();
            assert_eq!(mod_pow(psi, n as u128, &ctx), q - 1);
            assert_eq!(mod_pow(psi, 2 * n as u128, &ctx), 1);
        }
    }
}
