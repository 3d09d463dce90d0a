//! Negacyclic NTT.
//!
//! The forward transform is decimation-in-time Cooley-Tukey: bit-reversed
//! input, natural-order output `X[k] = sum_j x[j] * psi^((2k+1) j)`. The
//! inverse runs Gentleman-Sande stages over the same table, bit-reverses,
//! then scales by `n^-1` in a separate constant-multiply pass.

use super::ops::const_mul_slice;
use super::twiddle::{forward_index, inverse_index};
use super::{Domain, PolyParams, Polynomial, RingError, TwiddleTable};
use crate::modmath::BarrettContext;
use crate::word::Word;

#[inline]
pub fn bit_reverse_index(i: usize, log_n: u32) -> usize {
    if log_n == 0 {
        return 0;
    }
    i.reverse_bits() >> (usize::BITS - log_n)
}

pub fn bit_reverse_in_place<T>(data: &mut [T]) {
    let n = data.len();
    debug_assert!(n.is_power_of_two());
    let log_n = n.trailing_zeros();
    for i in 0..n {
        let j = bit_reverse_index(i, log_n);
        if i < j {
            data.swap(i, j);
        }
    }
}

/// `out[rev(i)] = x[i]`; an involution.
pub fn bit_reverse_permute<W: Word>(x: &Polynomial<W>) -> Result<Polynomial<W>, RingError> {
    if !x.len().is_power_of_two() {
        return Err(RingError::NotPowerOfTwo(x.len()));
    }
    let mut out = x.coeffs().to_vec();
    bit_reverse_in_place(&mut out);
    Ok(Polynomial::with_domain(out, x.domain()))
}

/// Cooley-Tukey butterfly: one multiply, one add, one subtract.
#[inline]
pub fn ct_butterfly<W: Word>(u: W, v: W, w: W, ctx: &BarrettContext<W>) -> (W, W) {
    let t = ctx.mul(v, w);
    (ctx.add(u, t), ctx.sub(u, t))
}

/// Gentleman-Sande butterfly undoing [`ct_butterfly`] up to a factor of 2,
/// given the mirrored twiddle.
#[inline]
pub fn gs_butterfly<W: Word>(u: W, v: W, w: W, ctx: &BarrettContext<W>) -> (W, W) {
    (ctx.add(u, v), ctx.mul(ctx.sub(v, u), w))
}

/// In-place forward stages over an already bit-reversed buffer.
pub(crate) fn forward_stages<W: Word>(a: &mut [W], tw: &[W], ctx: &BarrettContext<W>) {
    let n = a.len();
    let mut half = 1;
    while half < n {
        for block in (0..n).step_by(2 * half) {
            for j in 0..half {
                let w = tw[forward_index(half, j)];
                let (x, y) = ct_butterfly(a[block + j], a[block + j + half], w, ctx);
                a[block + j] = x;
                a[block + j + half] = y;
            }
        }
        half *= 2;
    }
}

/// In-place inverse stages; leaves `n * bitrev(x)` in the buffer.
pub(crate) fn inverse_stages<W: Word>(a: &mut [W], tw: &[W], ctx: &BarrettContext<W>) {
    let n = a.len();
    let mut half = n / 2;
    while half >= 1 {
        for block in (0..n).step_by(2 * half) {
            for j in 0..half {
                let w = tw[inverse_index(half, j)];
                let (x, y) = gs_butterfly(a[block + j], a[block + j + half], w, ctx);
                a[block + j] = x;
                a[block + j + half] = y;
            }
        }
        half /= 2;
    }
}

pub fn ntt_forward<W: Word>(
    x: &Polynomial<W>,
    params: &PolyParams<W>,
    tw: &TwiddleTable<W>,
) -> Result<Polynomial<W>, RingError> {
    x.expect_domain(Domain::Coefficient)?;
    x.validate(params)?;
    tw.check(params)?;
    tw.note_forward();
    let mut a = x.coeffs().to_vec();
    bit_reverse_in_place(&mut a);
    forward_stages(&mut a, tw.entries(), params.ctx());
    Ok(Polynomial::with_domain(a, Domain::Ntt))
}

pub fn ntt_inverse<W: Word>(
    x: &Polynomial<W>,
    params: &PolyParams<W>,
    tw: &TwiddleTable<W>,
) -> Result<Polynomial<W>, RingError> {
    x.expect_domain(Domain::Ntt)?;
    x.validate(params)?;
    tw.check(params)?;
    tw.note_inverse();
    let mut a = x.coeffs().to_vec();
    inverse_stages(&mut a, tw.entries(), params.ctx());
    bit_reverse_in_place(&mut a);
    const_mul_slice(&mut a, params.n_inv, params.ctx());
    Ok(Polynomial::with_domain(a, Domain::Coefficient))
}
