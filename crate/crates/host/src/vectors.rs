//! Test-vector generation and the line-oriented vector file format.
//!
//! A file is a list of `key = value` lines; `#` starts a comment. Scalars
//! and coefficient lists are decimal, lists space-separated. Inputs are
//! `input.a1`, `input.a2`, `input.b1`, `input.b2`; expected results are
//! `expect.<op>` (or `expect.ct_mul.d1` and so on).
//!
//! Coefficients come from ChaCha20 seeded with `seed` through
//! `seed_from_u64`: each draw takes two `next_u64` words (high then low),
//! masks them to the bit length of `q` and rejects values `>= q`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use fheaccel_core::modmath::{gen_ntt_prime, ModMathError, MAX_DEGREE, MIN_DEGREE};
use fheaccel_core::polyring::{
    self, bit_reverse_permute, negacyclic_schoolbook, Domain, RingError,
};
use fheaccel_core::{Coefficient, Params, Poly, Ring};
use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

pub const FORMAT_HEADER: &str = "# fheaccel test vectors, format 1";
pub const RNG_NAME: &str = "chacha20";
pub const INPUTS: [&str; 4] = ["input.a1", "input.a2", "input.b1", "input.b2"];

#[derive(Debug, Error)]
pub enum VectorError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("missing key `{0}`")]
    Missing(String),
    #[error("degree {0} is not a power of two in {MIN_DEGREE}..={MAX_DEGREE}")]
    BadDegree(usize),
    #[error("unknown operation `{0}`")]
    UnknownOp(String),
    #[error("inconsistent vector set: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    ModMath(#[from] ModMathError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// Operations a vector set can carry expectations for. Single-input ops
/// act on `a1`; two-input ops on `a1` and `b1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VectorOp {
    Ntt,
    Intt,
    Add,
    Sub,
    Mul,
    Sqr,
    CMul,
    PMul,
    BitRev,
    PolyMul,
    CtMul,
}

impl VectorOp {
    pub const ALL: [VectorOp; 11] = [
        VectorOp::Ntt,
        VectorOp::Intt,
        VectorOp::Add,
        VectorOp::Sub,
        VectorOp::Mul,
        VectorOp::Sqr,
        VectorOp::CMul,
        VectorOp::PMul,
        VectorOp::BitRev,
        VectorOp::PolyMul,
        VectorOp::CtMul,
    ];

    pub fn name(self) -> &'static str {
        match self {
            VectorOp::Ntt => "ntt",
            VectorOp::Intt => "intt",
            VectorOp::Add => "add",
            VectorOp::Sub => "sub",
            VectorOp::Mul => "mul",
            VectorOp::Sqr => "sqr",
            VectorOp::CMul => "cmul",
            VectorOp::PMul => "pmul",
            VectorOp::BitRev => "bitrev",
            VectorOp::PolyMul => "poly_mul",
            VectorOp::CtMul => "ct_mul",
        }
    }

    /// Keys of the expected outputs this op adds.
    pub fn expect_keys(self) -> Vec<String> {
        match self {
            VectorOp::CtMul => ["d1", "d2", "d3"]
                .iter()
                .map(|d| format!("expect.ct_mul.{d}"))
                .collect(),
            op => vec![format!("expect.{}", op.name())],
        }
    }
}

impl FromStr for VectorOp {
    type Err = VectorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        VectorOp::ALL
            .into_iter()
            .find(|op| op.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| VectorError::UnknownOp(s.to_string()))
    }
}

pub fn parse_ops(list: &str) -> Result<Vec<VectorOp>, VectorError> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestVectorSet {
    pub n: usize,
    pub min_bits: u32,
    pub seed: u64,
    pub q: Coefficient,
    pub psi: Coefficient,
    pub omega: Coefficient,
    pub n_inv: Coefficient,
    pub ops: Vec<VectorOp>,
    /// Inputs and expected outputs by key.
    pub entries: BTreeMap<String, Vec<Coefficient>>,
}

pub fn sample_below(rng: &mut ChaCha20Rng, q: Coefficient) -> Coefficient {
    let bits = 128 - q.leading_zeros();
    let mask = if bits == 128 {
        u128::MAX
    } else {
        (1u128 << bits) - 1
    };
    loop {
        let hi = rng.next_u64() as u128;
        let lo = rng.next_u64() as u128;
        let v = (hi << 64 | lo) & mask;
        if v < q {
            return v;
        }
    }
}

pub fn sample_poly(rng: &mut ChaCha20Rng, n: usize, q: Coefficient) -> Vec<Coefficient> {
    (0..n).map(|_| sample_below(rng, q)).collect()
}

pub fn check_degree(n: usize) -> Result<(), VectorError> {
    if !n.is_power_of_two() || !(MIN_DEGREE..=MAX_DEGREE).contains(&n) {
        return Err(VectorError::BadDegree(n));
    }
    Ok(())
}

/// Builds a vector set deterministically from `(n, min_bits, seed, ops)`.
pub fn gen_vectors(
    n: usize,
    min_bits: u32,
    seed: u64,
    ops: &[VectorOp],
) -> Result<TestVectorSet, VectorError> {
    check_degree(n)?;
    let q = gen_ntt_prime::<u128>(n, min_bits)?;
    let ring = Ring::new(n, q)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut entries = BTreeMap::new();
    for key in INPUTS {
        entries.insert(key.to_string(), sample_poly(&mut rng, n, q));
    }
    let mut ops = ops.to_vec();
    ops.sort();
    ops.dedup();
    let p = &ring.params;
    let a1 = Poly::new(entries["input.a1"].clone());
    let a2 = Poly::new(entries["input.a2"].clone());
    let b1 = Poly::new(entries["input.b1"].clone());
    let b2 = Poly::new(entries["input.b2"].clone());
    let sb = |x: &Poly, y: &Poly| negacyclic_schoolbook(x, y, p.ctx());
    for &op in &ops {
        let out: Vec<Vec<Coefficient>> = match op {
            VectorOp::Ntt => vec![ring.ntt(&a1)?.into_coeffs()],
            VectorOp::Intt => {
                let a1h = Poly::with_domain(a1.coeffs().to_vec(), Domain::Ntt);
                vec![ring.intt(&a1h)?.into_coeffs()]
            }
            VectorOp::Add => vec![polyring::pointwise_add(&a1, &b1, p)?.into_coeffs()],
            VectorOp::Sub => vec![polyring::pointwise_sub(&a1, &b1, p)?.into_coeffs()],
            VectorOp::Mul => vec![polyring::hadamard(&a1, &b1, p)?.into_coeffs()],
            VectorOp::Sqr => vec![polyring::pointwise_sqr(&a1, p)?.into_coeffs()],
            VectorOp::CMul => vec![polyring::const_mul(&a1, p.n_inv, p)?.into_coeffs()],
            VectorOp::PMul => vec![polyring::pointwise_mul_wrapping(&a1, &b1, p)?.into_coeffs()],
            VectorOp::BitRev => vec![bit_reverse_permute(&a1)?.into_coeffs()],
            VectorOp::PolyMul => vec![sb(&a1, &b1)?.into_coeffs()],
            VectorOp::CtMul => {
                let cross = polyring::pointwise_add(&sb(&a1, &b2)?, &sb(&a2, &b1)?, p)?;
                vec![
                    sb(&a1, &b1)?.into_coeffs(),
                    cross.into_coeffs(),
                    sb(&a2, &b2)?.into_coeffs(),
                ]
            }
        };
        for (key, v) in op.expect_keys().into_iter().zip(out) {
            entries.insert(key, v);
        }
    }
    Ok(TestVectorSet {
        n,
        min_bits,
        seed,
        q,
        psi: p.psi,
        omega: p.omega,
        n_inv: p.n_inv,
        ops,
        entries,
    })
}

impl TestVectorSet {
    pub fn params(&self) -> Result<Params, VectorError> {
        Ok(polyring::make_params(self.n, self.q)?)
    }

    pub fn ring(&self) -> Result<Ring, VectorError> {
        Ok(Ring::new(self.n, self.q)?)
    }

    pub fn get(&self, key: &str) -> Option<&[Coefficient]> {
        self.entries.get(key).map(Vec::as_slice)
    }

    pub fn log_n(&self) -> u8 {
        self.n.trailing_zeros() as u8
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{FORMAT_HEADER}");
        let _ = writeln!(s, "rng = {RNG_NAME}");
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "n = {}", self.n);
        let _ = writeln!(s, "min_bits = {}", self.min_bits);
        let _ = writeln!(s, "q = {}", self.q);
        let _ = writeln!(s, "psi = {}", self.psi);
        let _ = writeln!(s, "omega = {}", self.omega);
        let _ = writeln!(s, "n_inv = {}", self.n_inv);
        let ops: Vec<&str> = self.ops.iter().map(|o| o.name()).collect();
        let _ = writeln!(s, "ops = {}", ops.join(","));
        for (k, v) in &self.entries {
            let words: Vec<String> = v.iter().map(u128::to_string).collect();
            let _ = writeln!(s, "{k} = {}", words.join(" "));
        }
        s
    }

    /// Parses [`TestVectorSet::to_text`] output and checks it against the
    /// parameters it names.
    pub fn parse(text: &str) -> Result<TestVectorSet, VectorError> {
        let mut scalars: BTreeMap<String, (usize, String)> = BTreeMap::new();
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap().trim();
            if body.is_empty() {
                continue;
            }
            let (k, v) = body.split_once('=').ok_or_else(|| VectorError::Parse {
                line,
                msg: "expected `key = value`".into(),
            })?;
            let (k, v) = (k.trim().to_string(), v.trim());
            if k.starts_with("input.") || k.starts_with("expect.") {
                let words = v
                    .split_whitespace()
                    .map(|w| w.parse::<u128>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| VectorError::Parse {
                        line,
                        msg: format!("{k}: {e}"),
                    })?;
                if entries.insert(k.clone(), words).is_some() {
                    return Err(VectorError::Parse {
                        line,
                        msg: format!("duplicate key {k}"),
                    });
                }
            } else if scalars.insert(k.clone(), (line, v.to_string())).is_some() {
                return Err(VectorError::Parse {
                    line,
                    msg: format!("duplicate key {k}"),
                });
            }
        }
        fn scalar<T: FromStr>(
            s: &BTreeMap<String, (usize, String)>,
            key: &str,
        ) -> Result<T, VectorError>
        where
            T::Err: std::fmt::Display,
        {
            let (line, v) = s.get(key).ok_or_else(|| VectorError::Missing(key.into()))?;
            v.parse().map_err(|e: T::Err| VectorError::Parse {
                line: *line,
                msg: format!("{key}: {e}"),
            })
        }
        let rng: String = scalar(&scalars, "rng")?;
        if rng != RNG_NAME {
            return Err(VectorError::Inconsistent(format!(
                "unsupported rng `{rng}`"
            )));
        }
        let set = TestVectorSet {
            n: scalar(&scalars, "n")?,
            min_bits: scalar(&scalars, "min_bits")?,
            seed: scalar(&scalars, "seed")?,
            q: scalar(&scalars, "q")?,
            psi: scalar(&scalars, "psi")?,
            omega: scalar(&scalars, "omega")?,
            n_inv: scalar(&scalars, "n_inv")?,
            ops: parse_ops(&scalar::<String>(&scalars, "ops")?)?,
            entries,
        };
        for key in scalars.keys() {
            if ![
                "rng", "seed", "n", "min_bits", "q", "psi", "omega", "n_inv", "ops",
            ]
            .contains(&key.as_str())
            {
                return Err(VectorError::Inconsistent(format!("unknown key `{key}`")));
            }
        }
        set.validate()?;
        Ok(set)
    }

    fn validate(&self) -> Result<(), VectorError> {
        check_degree(self.n)?;
        if self.q % (2 * self.n as u128) != 1 {
            return Err(VectorError::Inconsistent(format!(
                "q = {} is not 1 mod 2n",
                self.q
            )));
        }
        let p = self.params()?;
        if (p.psi, p.omega, p.n_inv) != (self.psi, self.omega, self.n_inv) {
            return Err(VectorError::Inconsistent(
                "psi, omega or n_inv disagree with q".into(),
            ));
        }
        for key in INPUTS {
            self.get(key)
                .ok_or_else(|| VectorError::Missing(key.into()))?;
        }
        for op in &self.ops {
            for key in op.expect_keys() {
                self.get(&key).ok_or(VectorError::Missing(key))?;
            }
        }
        for (k, v) in &self.entries {
            if v.len() != self.n {
                return Err(VectorError::Inconsistent(format!(
                    "{k} has {} values, expected {}",
                    v.len(),
                    self.n
                )));
            }
        }
        Ok(())
    }
}
