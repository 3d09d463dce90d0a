use super::{Domain, Polynomial, RingError};
use crate::modmath::BarrettContext;
use crate::word::Word;

/// Quadratic-time product in `Z_q[x]/(x^n + 1)`.
///
/// Works for any length and any modulus above 1; this is the reference the
/// transform-based multiply is checked against.
pub fn negacyclic_schoolbook<W: Word>(
    a: &Polynomial<W>,
    b: &Polynomial<W>,
    ctx: &BarrettContext<W>,
) -> Result<Polynomial<W>, RingError> {
    a.expect_domain(Domain::Coefficient)?;
    b.expect_domain(Domain::Coefficient)?;
    let n = a.len();
    b.check_len(n)?;
    super::poly::check_reduced(a.coeffs(), ctx.modulus())?;
    super::poly::check_reduced(b.coeffs(), ctx.modulus())?;
    let mut out = vec![W::zero(); n];
    for (i, &x) in a.coeffs().iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, &y) in b.coeffs().iter().enumerate() {
            let t = ctx.mul(x, y);
            let k = i + j;
            if k < n {
                out[k] = ctx.add(out[k], t);
            } else {
                // x^n = -1
                out[k - n] = ctx.sub(out[k - n], t);
            }
        }
    }
    Ok(Polynomial::new(out))
}
