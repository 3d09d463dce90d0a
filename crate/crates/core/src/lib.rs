//! Modular arithmetic, negacyclic polynomial rings, RNS towers and a
//! cycle-approximate model of a ciphertext-multiplication co-processor.
//!
//! The arithmetic is generic over [`Word`] (`u32`, `u64`, `u128`). The
//! aliases below fix the 128-bit coefficient width the device uses.

pub mod device;
pub mod modmath;
pub mod polyring;
pub mod rns;
pub mod word;

pub use word::Word;

/// Coefficient word of the device datapath.
pub type Coefficient = u128;
pub type Barrett = modmath::BarrettContext<Coefficient>;
pub type Params = polyring::PolyParams<Coefficient>;
pub type Poly = polyring::Polynomial<Coefficient>;
pub type Ring = polyring::RingContext<Coefficient>;
pub type Twiddles = polyring::TwiddleTable<Coefficient>;
pub type Ct = polyring::Ciphertext<Coefficient>;
pub type CtProduct = polyring::CiphertextProduct<Coefficient>;
