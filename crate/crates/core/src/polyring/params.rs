use super::RingError;
use crate::modmath::{
    find_primitive_root, is_prime, BarrettContext, ModMathError, MAX_DEGREE, MIN_DEGREE,
};
use crate::word::Word;

/// Ring description for `Z_q[x]/(x^n + 1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyParams<W: Word> {
    pub n: usize,
    pub log_n: u32,
    pub q: W,
    /// Primitive `2n`-th root of unity.
    pub psi: W,
    pub psi_inv: W,
    /// `psi^2`, a primitive `n`-th root of unity.
    pub omega: W,
    pub n_inv: W,
    pub barrett: BarrettContext<W>,
}

impl<W: Word> PolyParams<W> {
    /// Derive `psi`, `omega` and `n^-1` for prime `q = 1 mod 2n`.
    pub fn new(n: usize, q: W) -> Result<Self, RingError> {
        if !n.is_power_of_two() || !(MIN_DEGREE..=MAX_DEGREE).contains(&n) {
            return Err(ModMathError::InvalidDegree(n).into());
        }
        let two_n = 2 * n as u128;
        if q.as_u128() % two_n != 1 {
            return Err(RingError::NotNttFriendly { q: q.as_u128(), n });
        }
        if !is_prime(q) {
            return Err(RingError::NotPrime(q.as_u128()));
        }
        let barrett = BarrettContext::new(q)?;
        let psi = find_primitive_root(q, 2 * n as u64)?;
        let psi_inv = barrett.inv(psi)?;
        let omega = barrett.mul(psi, psi);
        let n_inv = barrett.inv(W::from_u128_truncate(n as u128))?;
        Ok(PolyParams {
            n,
            log_n: n.trailing_zeros(),
            q,
            psi,
            psi_inv,
            omega,
            n_inv,
            barrett,
        })
    }

    #[inline]
    pub fn ctx(&self) -> &BarrettContext<W> {
        &self.barrett
    }
}

/// Build the ring parameters for degree `n` and modulus `q`.
pub fn make_params<W: Word>(n: usize, q: W) -> Result<PolyParams<W>, RingError> {
    PolyParams::new(n, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modmath::{gen_ntt_prime, mod_pow};

    #[test]
    fn small_example() {
        let p = make_params(4, 257u64).unwrap();
        assert_eq!((p.psi, p.omega, p.n_inv), (4, 16, 193));
        assert_eq!(p.barrett.mul(p.psi, p.psi_inv), 1);
        assert_eq!(p.log_n, 2);
    }

    #[test]
    fn rejects_unfriendly_moduli() {
        assert!(matches!(
            make_params(4, 13u32),
            Err(RingError::NotNttFriendly { .. })
        ));
        // 289 = 17^2 = 1 mod 8 but composite
        assert!(matches!(
            make_params(4, 289u32),
            Err(RingError::NotPrime(289))
        ));
        assert!(make_params(2, 13u32).is_err());
        assert!(make_params(12, 97u32).is_err());
    }

    #[test]
    fn invariants_hold_at_8192() {
        let n = 1 << 13;
        let q: u128 = gen_ntt_prime(n, 60).unwrap();
        let p = make_params(n, q).unwrap();
        let ctx = &p.barrett;
        assert_eq!(mod_pow(p.psi, 2 * n as u128, ctx), 1);
        assert_eq!(mod_pow(p.psi, n as u128, ctx), q - 1);
        assert_eq!(p.omega, ctx.mul(p.psi, p.psi));
        assert_eq!(ctx.mul(p.n_inv, n as u128), 1);
    }
}
