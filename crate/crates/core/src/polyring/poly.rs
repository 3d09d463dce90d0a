use std::fmt;

use super::{PolyParams, RingError};
use crate::word::Word;

/// Which representation a coefficient vector is in. Software-only guard.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Domain {
    Coefficient,
    Ntt,
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Coefficient => f.write_str("coefficient"),
            Domain::Ntt => f.write_str("ntt"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Polynomial<W: Word> {
    coeffs: Vec<W>,
    domain: Domain,
}

impl<W: Word> Polynomial<W> {
    pub fn new(coeffs: Vec<W>) -> Self {
        Polynomial {
            coeffs,
            domain: Domain::Coefficient,
        }
    }

    pub fn with_domain(coeffs: Vec<W>, domain: Domain) -> Self {
        Polynomial { coeffs, domain }
    }

    pub fn zero(n: usize) -> Self {
        Self::new(vec![W::zero(); n])
    }

    /// `x^k` in a ring of degree `n`.
    pub fn monomial(n: usize, k: usize) -> Self {
        let mut coeffs = vec![W::zero(); n];
        coeffs[k] = W::one();
        Self::new(coeffs)
    }

    pub fn one(n: usize) -> Self {
        Self::monomial(n, 0)
    }

    #[inline]
    pub fn coeffs(&self) -> &[W] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<W> {
        self.coeffs
    }

    #[inline]
    pub fn domain(&self) -> Domain {
        self.domain
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn check_len(&self, n: usize) -> Result<(), RingError> {
        if self.coeffs.len() != n {
            return Err(RingError::LengthMismatch {
                expected: n,
                got: self.coeffs.len(),
            });
        }
        Ok(())
    }

    /// Length matches `params.n` and every coefficient is below `q`.
    pub fn validate(&self, params: &PolyParams<W>) -> Result<(), RingError> {
        self.check_len(params.n)?;
        check_reduced(&self.coeffs, params.q)
    }

    pub fn expect_domain(&self, domain: Domain) -> Result<(), RingError> {
        if self.domain != domain {
            return Err(RingError::DomainMismatch {
                expected: domain,
                got: self.domain,
            });
        }
        Ok(())
    }
}

pub(crate) fn check_reduced<W: Word>(coeffs: &[W], q: W) -> Result<(), RingError> {
    match coeffs.iter().position(|&c| c >= q) {
        Some(index) => Err(RingError::CoefficientOutOfRange {
            index,
            value: coeffs[index].as_u128(),
            modulus: q.as_u128(),
        }),
        None => Ok(()),
    }
}

impl<W: Word> From<Vec<W>> for Polynomial<W> {
    fn from(coeffs: Vec<W>) -> Self {
        Polynomial::new(coeffs)
    }
}
