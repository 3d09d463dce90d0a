//! Polynomial arithmetic in `Z_q[x]/(x^n + 1)`.

mod ciphertext;
mod ntt;
mod ops;
mod params;
mod poly;
mod schoolbook;
mod twiddle;

pub use ciphertext::{ct_mul, poly_mul, Ciphertext, CiphertextProduct};
pub use ntt::{
    bit_reverse_in_place, bit_reverse_index, bit_reverse_permute, ct_butterfly, gs_butterfly,
    ntt_forward, ntt_inverse,
};
pub use ops::{
    const_mul, hadamard, pointwise_add, pointwise_mul_wrapping, pointwise_sqr, pointwise_sub,
};
pub use params::{make_params, PolyParams};
pub use poly::{Domain, Polynomial};
pub use schoolbook::negacyclic_schoolbook;
pub use twiddle::{forward_index, inverse_index, TwiddleTable};

use thiserror::Error;

use crate::modmath::ModMathError;
use crate::word::Word;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RingError {
    #[error(transparent)]
    ModMath(#[from] ModMathError),
    #[error("modulus {q} is not 1 mod 2*{n}")]
    NotNttFriendly { q: u128, n: usize },
    #[error("modulus {0} is not prime")]
    NotPrime(u128),
    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("expected {expected} coefficients, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("coefficient {index} = {value} is not reduced modulo {modulus}")]
    CoefficientOutOfRange {
        index: usize,
        value: u128,
        modulus: u128,
    },
    #[error("expected a {expected}-domain polynomial, got {got}-domain")]
    DomainMismatch { expected: Domain, got: Domain },
    #[error("twiddle table of length {table_len} does not belong to a degree-{n} ring")]
    TwiddleMismatch { table_len: usize, n: usize },
}

/// Parameters bundled with their twiddle table.
#[derive(Clone, Debug)]
pub struct RingContext<W: Word> {
    pub params: PolyParams<W>,
    pub twiddles: TwiddleTable<W>,
}

impl<W: Word> RingContext<W> {
    pub fn new(n: usize, q: W) -> Result<Self, RingError> {
        let params = make_params(n, q)?;
        let twiddles = TwiddleTable::new(&params);
        Ok(RingContext { params, twiddles })
    }

    pub fn ntt(&self, x: &Polynomial<W>) -> Result<Polynomial<W>, RingError> {
        ntt_forward(x, &self.params, &self.twiddles)
    }

    pub fn intt(&self, x: &Polynomial<W>) -> Result<Polynomial<W>, RingError> {
        ntt_inverse(x, &self.params, &self.twiddles)
    }

    pub fn mul(&self, a: &Polynomial<W>, b: &Polynomial<W>) -> Result<Polynomial<W>, RingError> {
        poly_mul(a, b, &self.params, &self.twiddles)
    }

    pub fn ct_mul(
        &self,
        a: &Ciphertext<W>,
        b: &Ciphertext<W>,
    ) -> Result<CiphertextProduct<W>, RingError> {
        ct_mul(a, b, &self.params, &self.twiddles)
    }
}
