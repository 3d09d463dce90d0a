use super::{
    hadamard, ntt_forward, ntt_inverse, pointwise_add, PolyParams, Polynomial, RingError,
    TwiddleTable,
};
use crate::word::Word;

/// A ciphertext: a pair of ring elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ciphertext<W: Word> {
    pub c1: Polynomial<W>,
    pub c2: Polynomial<W>,
}

impl<W: Word> Ciphertext<W> {
    pub fn new(c1: Polynomial<W>, c2: Polynomial<W>) -> Result<Self, RingError> {
        c2.check_len(c1.len())?;
        Ok(Ciphertext { c1, c2 })
    }

    pub fn validate(&self, params: &PolyParams<W>) -> Result<(), RingError> {
        self.c1.validate(params)?;
        self.c2.validate(params)
    }
}

/// The tensor of two ciphertexts: `(a1 b1, a1 b2 + a2 b1, a2 b2)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CiphertextProduct<W: Word> {
    pub d1: Polynomial<W>,
    pub d2: Polynomial<W>,
    pub d3: Polynomial<W>,
}

/// `iNTT(NTT(a) * NTT(b))`.
pub fn poly_mul<W: Word>(
    a: &Polynomial<W>,
    b: &Polynomial<W>,
    params: &PolyParams<W>,
    tw: &TwiddleTable<W>,
) -> Result<Polynomial<W>, RingError> {
    let ah = ntt_forward(a, params, tw)?;
    let bh = ntt_forward(b, params, tw)?;
    ntt_inverse(&hadamard(&ah, &bh, params)?, params, tw)
}

/// Ciphertext multiplication without rescaling.
///
/// Each input polynomial is transformed once and stays in the NTT domain:
/// 4 forward transforms, 4 Hadamard products, 1 addition, 3 inverse transforms.
pub fn ct_mul<W: Word>(
    ca: &Ciphertext<W>,
    cb: &Ciphertext<W>,
    params: &PolyParams<W>,
    tw: &TwiddleTable<W>,
) -> Result<CiphertextProduct<W>, RingError> {
    let a1 = ntt_forward(&ca.c1, params, tw)?;
    let a2 = ntt_forward(&ca.c2, params, tw)?;
    let b1 = ntt_forward(&cb.c1, params, tw)?;
    let b2 = ntt_forward(&cb.c2, params, tw)?;

    let d1 = hadamard(&a1, &b1, params)?;
    let cross = pointwise_add(
        &hadamard(&a1, &b2, params)?,
        &hadamard(&a2, &b1, params)?,
        params,
    )?;
    let d3 = hadamard(&a2, &b2, params)?;

    Ok(CiphertextProduct {
        d1: ntt_inverse(&d1, params, tw)?,
        d2: ntt_inverse(&cross, params, tw)?,
        d3: ntt_inverse(&d3, params, tw)?,
    })
}
