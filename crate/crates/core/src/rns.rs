//! Residue number system: wide moduli split into coprime word-sized towers.
//!
//! Values wider than a word exist only here, as `BigUint`. Reconstruction
//! uses direct CRT weights `w_i = (Q/q_i) * ((Q/q_i)^-1 mod q_i)`.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::modmath::BarrettContext;
use crate::polyring::{Ciphertext, CiphertextProduct, Polynomial, RingContext, RingError};
use crate::word::Word;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RnsError {
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error("RNS basis is empty")]
    EmptyBasis,
    #[error("moduli {0} and {1} are not coprime")]
    NotCoprime(u128, u128),
    #[error("modulus {0} must be greater than 1")]
    InvalidModulus(u128),
    #[error("value {value} is not below the basis modulus {modulus}")]
    OutOfRange { value: String, modulus: String },
    #[error("residue {value} at tower {index} is not below {modulus}")]
    ResidueOutOfRange {
        index: usize,
        value: u128,
        modulus: u128,
    },
    #[error("expected {expected} towers, got {got}")]
    TowerCountMismatch { expected: usize, got: usize },
    #[error("expected {expected} coefficients, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("tower order must be a permutation of 0..{0}")]
    BadOrder(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RnsBasis<W: Word> {
    moduli: Vec<W>,
    big_modulus: BigUint,
    crt_weights: Vec<BigUint>,
}

impl<W: Word> RnsBasis<W> {
    pub fn new(moduli: Vec<W>) -> Result<Self, RnsError> {
        if moduli.is_empty() {
            return Err(RnsError::EmptyBasis);
        }
        for (i, &a) in moduli.iter().enumerate() {
            if a <= W::one() {
                return Err(RnsError::InvalidModulus(a.as_u128()));
            }
            for &b in &moduli[i + 1..] {
                if !a.as_u128().gcd(&b.as_u128()).is_one() {
                    return Err(RnsError::NotCoprime(a.as_u128(), b.as_u128()));
                }
            }
        }
        let big_modulus = moduli
            .iter()
            .fold(BigUint::one(), |acc, q| acc * q.to_biguint());
        let crt_weights = moduli
            .iter()
            .map(|&q| {
                let cofactor = &big_modulus / q.to_biguint();
                let ctx = BarrettContext::new(q).expect("modulus > 1");
                let reduced = W::from_biguint(&(&cofactor % q.to_biguint())).expect("fits word");
                let inv = ctx.inv(reduced).expect("coprime moduli");
                cofactor * inv.to_biguint()
            })
            .collect();
        Ok(RnsBasis {
            moduli,
            big_modulus,
            crt_weights,
        })
    }

    pub fn moduli(&self) -> &[W] {
        &self.moduli
    }

    pub fn big_modulus(&self) -> &BigUint {
        &self.big_modulus
    }

    pub fn crt_weights(&self) -> &[BigUint] {
        &self.crt_weights
    }

    pub fn len(&self) -> usize {
        self.moduli.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moduli.is_empty()
    }
}

/// `x mod q_i` for every tower.
pub fn decompose<W: Word>(x: &BigUint, basis: &RnsBasis<W>) -> Result<Vec<W>, RnsError> {
    if x >= basis.big_modulus() {
        return Err(RnsError::OutOfRange {
            value: x.to_string(),
            modulus: basis.big_modulus().to_string(),
        });
    }
    Ok(basis
        .moduli
        .iter()
        .map(|q| W::from_biguint(&(x % q.to_biguint())).expect("residue fits word"))
        .collect())
}

/// The unique `x < Q` with `x = r_i mod q_i`.
pub fn recombine<W: Word>(residues: &[W], basis: &RnsBasis<W>) -> Result<BigUint, RnsError> {
    if residues.len() != basis.len() {
        return Err(RnsError::TowerCountMismatch {
            expected: basis.len(),
            got: residues.len(),
        });
    }
    let mut acc = BigUint::zero();
    for (i, ((&r, &q), w)) in residues
        .iter()
        .zip(&basis.moduli)
        .zip(&basis.crt_weights)
        .enumerate()
    {
        if r >= q {
            return Err(RnsError::ResidueOutOfRange {
                index: i,
                value: r.as_u128(),
                modulus: q.as_u128(),
            });
        }
        acc += w * r.to_biguint();
    }
    Ok(acc % basis.big_modulus())
}

/// Per-tower images of some value, indexed like the basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TowerSet<T> {
    pub images: Vec<T>,
}

/// A ciphertext with coefficients modulo the full basis product.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WideCiphertext {
    pub c1: Vec<BigUint>,
    pub c2: Vec<BigUint>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WideCiphertextProduct {
    pub d1: Vec<BigUint>,
    pub d2: Vec<BigUint>,
    pub d3: Vec<BigUint>,
}

/// A basis together with one NTT ring per tower.
#[derive(Clone, Debug)]
pub struct RnsRing<W: Word> {
    pub basis: RnsBasis<W>,
    pub towers: Vec<RingContext<W>>,
}

impl<W: Word> RnsRing<W> {
    pub fn new(n: usize, moduli: Vec<W>) -> Result<Self, RnsError> {
        let basis = RnsBasis::new(moduli)?;
        let towers = basis
            .moduli()
            .iter()
            .map(|&q| RingContext::new(n, q))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(RnsRing { basis, towers })
    }

    pub fn degree(&self) -> usize {
        self.towers[0].params.n
    }

    pub fn decompose_poly(&self, coeffs: &[BigUint]) -> Result<TowerSet<Polynomial<W>>, RnsError> {
        let n = self.degree();
        if coeffs.len() != n {
            return Err(RnsError::LengthMismatch {
                expected: n,
                got: coeffs.len(),
            });
        }
        let mut images = vec![Vec::with_capacity(n); self.basis.len()];
        for c in coeffs {
            for (img, r) in images.iter_mut().zip(decompose(c, &self.basis)?) {
                img.push(r);
            }
        }
        Ok(TowerSet {
            images: images.into_iter().map(Polynomial::new).collect(),
        })
    }

    pub fn recombine_poly(
        &self,
        towers: &TowerSet<Polynomial<W>>,
    ) -> Result<Vec<BigUint>, RnsError> {
        if towers.images.len() != self.basis.len() {
            return Err(RnsError::TowerCountMismatch {
                expected: self.basis.len(),
                got: towers.images.len(),
            });
        }
        let n = self.degree();
        for img in &towers.images {
            if img.len() != n {
                return Err(RnsError::LengthMismatch {
                    expected: n,
                    got: img.len(),
                });
            }
        }
        (0..n)
            .map(|k| {
                let residues: Vec<W> = towers.images.iter().map(|p| p.coeffs()[k]).collect();
                recombine(&residues, &self.basis)
            })
            .collect()
    }

    pub fn decompose_ct(&self, ct: &WideCiphertext) -> Result<TowerSet<Ciphertext<W>>, RnsError> {
        let c1 = self.decompose_poly(&ct.c1)?;
        let c2 = self.decompose_poly(&ct.c2)?;
        let images = c1
            .images
            .into_iter()
            .zip(c2.images)
            .map(|(a, b)| Ciphertext::new(a, b))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(TowerSet { images })
    }

    /// Run the tower products in the given execution order; results are
    /// stored by tower index, so any permutation yields the same set.
    pub fn ct_mul_towers(
        &self,
        ta: &TowerSet<Ciphertext<W>>,
        tb: &TowerSet<Ciphertext<W>>,
        order: &[usize],
    ) -> Result<TowerSet<CiphertextProduct<W>>, RnsError> {
        let t = self.basis.len();
        for set in [ta.images.len(), tb.images.len()] {
            if set != t {
                return Err(RnsError::TowerCountMismatch {
                    expected: t,
                    got: set,
                });
            }
        }
        let mut seen = vec![false; t];
        if order.len() != t
            || order
                .iter()
                .any(|&i| i >= t || std::mem::replace(&mut seen[i], true))
        {
            return Err(RnsError::BadOrder(t));
        }
        let mut slots: Vec<Option<CiphertextProduct<W>>> = vec![None; t];
        for &i in order {
            slots[i] = Some(self.towers[i].ct_mul(&ta.images[i], &tb.images[i])?);
        }
        Ok(TowerSet {
            images: slots
                .into_iter()
                .map(|s| s.expect("every tower ran"))
                .collect(),
        })
    }

    pub fn recombine_product(
        &self,
        prod: &TowerSet<CiphertextProduct<W>>,
    ) -> Result<WideCiphertextProduct, RnsError> {
        let pick = |f: fn(&CiphertextProduct<W>) -> &Polynomial<W>| TowerSet {
            images: prod.images.iter().map(|p| f(p).clone()).collect(),
        };
        Ok(WideCiphertextProduct {
            d1: self.recombine_poly(&pick(|p| &p.d1))?,
            d2: self.recombine_poly(&pick(|p| &p.d2))?,
            d3: self.recombine_poly(&pick(|p| &p.d3))?,
        })
    }
}

/// Ciphertext tensor modulo the basis product, computed tower by tower.
pub fn ct_mul_rns<W: Word>(
    ca: &WideCiphertext,
    cb: &WideCiphertext,
    ring: &RnsRing<W>,
) -> Result<WideCiphertextProduct, RnsError> {
    let ta = ring.decompose_ct(ca)?;
    let tb = ring.decompose_ct(cb)?;
    let order: Vec<usize> = (0..ring.basis.len()).collect();
    ring.recombine_product(&ring.ct_mul_towers(&ta, &tb, &order)?)
}
