use super::{PolyParams, Polynomial, RingError};
use crate::modmath::{BarrettContext, ModMathError};
use crate::word::Word;

fn binary_operands<W: Word>(
    a: &Polynomial<W>,
    b: &Polynomial<W>,
    params: &PolyParams<W>,
) -> Result<(), RingError> {
    a.validate(params)?;
    b.validate(params)?;
    b.expect_domain(a.domain())
}

fn zip_with<W: Word>(a: &Polynomial<W>, b: &Polynomial<W>, f: impl Fn(W, W) -> W) -> Polynomial<W> {
    let out = a
        .coeffs()
        .iter()
        .zip(b.coeffs())
        .map(|(&x, &y)| f(x, y))
        .collect();
    Polynomial::with_domain(out, a.domain())
}

pub(crate) fn const_mul_slice<W: Word>(a: &mut [W], c: W, ctx: &BarrettContext<W>) {
    for x in a.iter_mut() {
        *x = ctx.mul(*x, c);
    }
}

/// Pointwise modular product.
pub fn hadamard<W: Word>(
    a: &Polynomial<W>,
    b: &Polynomial<W>,
    params: &PolyParams<W>,
) -> Result<Polynomial<W>, RingError> {
    binary_operands(a, b, params)?;
    let ctx = params.ctx();
    Ok(zip_with(a, b, |x, y| ctx.mul(x, y)))
}

pub fn pointwise_add<W: Word>(
    a: &Polynomial<W>,
    b: &Polynomial<W>,
    params: &PolyParams<W>,
) -> Result<Polynomial<W>, RingError> {
    binary_operands(a, b, params)?;
    let ctx = params.ctx();
    Ok(zip_with(a, b, |x, y| ctx.add(x, y)))
}

pub fn pointwise_sub<W: Word>(
    a: &Polynomial<W>,
    b: &Polynomial<W>,
    params: &PolyParams<W>,
) -> Result<Polynomial<W>, RingError> {
    binary_operands(a, b, params)?;
    let ctx = params.ctx();
    Ok(zip_with(a, b, |x, y| ctx.sub(x, y)))
}

pub fn pointwise_sqr<W: Word>(
    a: &Polynomial<W>,
    params: &PolyParams<W>,
) -> Result<Polynomial<W>, RingError> {
    a.validate(params)?;
    let ctx = params.ctx();
    Ok(zip_with(a, a, |x, _| ctx.mul(x, x)))
}

/// Multiply every coefficient by the residue `c`.
pub fn const_mul<W: Word>(
    a: &Polynomial<W>,
    c: W,
    params: &PolyParams<W>,
) -> Result<Polynomial<W>, RingError> {
    a.validate(params)?;
    if c >= params.q {
        return Err(ModMathError::NotReduced {
            value: c.as_u128(),
            modulus: params.q.as_u128(),
        }
        .into());
    }
    let mut out = a.coeffs().to_vec();
    const_mul_slice(&mut out, c, params.ctx());
    Ok(Polynomial::with_domain(out, a.domain()))
}

/// Non-modular pointwise product keeping the low word of each product.
///
/// Operands are arbitrary words; only the lengths are checked.
pub fn pointwise_mul_wrapping<W: Word>(
    a: &Polynomial<W>,
    b: &Polynomial<W>,
    params: &PolyParams<W>,
) -> Result<Polynomial<W>, RingError> {
    a.check_len(params.n)?;
    b.check_len(params.n)?;
    b.expect_domain(a.domain())?;
    Ok(zip_with(a, b, |x, y| x.wrapping_mul(&y)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modmath::gen_ntt_prime;
    use crate::polyring::{make_params, Domain};
    use num_bigint::BigUint;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_poly(rng: &mut ChaCha8Rng, p: &PolyParams<u128>) -> Polynomial<u128> {
        Polynomial::new((0..p.n).map(|_| rng.gen_range(0..p.q)).collect())
    }

    fn setup() -> (PolyParams<u128>, ChaCha8Rng) {
        let q: u128 = gen_ntt_prime(64, 127).unwrap();
        (make_params(64, q).unwrap(), ChaCha8Rng::seed_from_u64(9))
    }

    #[test]
    fn identities() {
        let (p, mut rng) = setup();
        let a = random_poly(&mut rng, &p);
        let ones = Polynomial::new(vec![1u128; p.n]);
        let zero = Polynomial::zero(p.n);
        assert_eq!(hadamard(&a, &ones, &p).unwrap(), a);
        assert!(hadamard(&a, &zero, &p).unwrap().is_zero());
        assert_eq!(pointwise_add(&a, &zero, &p).unwrap(), a);
        assert!(pointwise_sub(&a, &a, &p).unwrap().is_zero());
        assert_eq!(
            pointwise_sqr(&a, &p).unwrap(),
            hadamard(&a, &a, &p).unwrap()
        );
    }

    #[test]
    fn elementwise_bigint_oracle() {
        let (p, mut rng) = setup();
        let a = random_poly(&mut rng, &p);
        let b = random_poly(&mut rng, &p);
        let q = BigUint::from(p.q);
        let h = hadamard(&a, &b, &p).unwrap();
        let s = pointwise_sub(&a, &b, &p).unwrap();
        let c = const_mul(&a, p.n_inv, &p).unwrap();
        for i in 0..p.n {
            let (x, y) = (BigUint::from(a.coeffs()[i]), BigUint::from(b.coeffs()[i]));
            assert_eq!(BigUint::from(h.coeffs()[i]), &x * &y % &q);
            assert_eq!(BigUint::from(s.coeffs()[i]), (&x + &q - &y) % &q);
            assert_eq!(c.coeffs()[i], p.barrett.mul(a.coeffs()[i], p.n_inv));
        }
    }

    #[test]
    fn wrapping_product_keeps_low_bits() {
        let (p, _) = setup();
        let mut a = vec![0u128; p.n];
        let mut b = vec![0u128; p.n];
        a[0] = u128::MAX;
        b[0] = 3;
        a[1] = 1 << 100;
        b[1] = 1 << 100;
        let r = pointwise_mul_wrapping(&Polynomial::new(a), &Polynomial::new(b), &p).unwrap();
        assert_eq!(r.coeffs()[0], u128::MAX - 2);
        assert_eq!(r.coeffs()[1], 0);
    }

    #[test]
    fn operand_checks() {
        let (p, mut rng) = setup();
        let a = random_poly(&mut rng, &p);
        let short = Polynomial::new(vec![0u128; 8]);
        assert!(matches!(
            hadamard(&a, &short, &p),
            Err(RingError::LengthMismatch { .. })
        ));
        let ntt = Polynomial::with_domain(a.coeffs().to_vec(), Domain::Ntt);
        assert!(matches!(
            pointwise_add(&a, &ntt, &p),
            Err(RingError::DomainMismatch { .. })
        ));
        let mut big = a.coeffs().to_vec();
        big[3] = p.q;
        assert!(matches!(
            pointwise_sqr(&Polynomial::new(big), &p),
            Err(RingError::CoefficientOutOfRange { index: 3, .. })
        ));
        assert!(const_mul(&a, p.q, &p).is_err());
    }
}
