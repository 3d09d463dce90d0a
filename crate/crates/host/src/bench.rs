//! Ciphertext-product benchmarks against published wall-clock figures.

use fheaccel_core::device::{run_ct_mul_program, CycleModel, Device, DeviceError, DeviceStats};
use fheaccel_core::modmath::{gen_ntt_primes, ModMathError};
use fheaccel_core::polyring::{Ciphertext, RingError};
use fheaccel_core::{Poly, Ring};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::report::BenchReport;
use crate::vectors::sample_poly;

/// Allowed relative deviation from the reference time.
pub const TOLERANCE: f64 = 0.10;
/// Tower modulus width; below the 128-bit word with headroom.
pub const TOWER_BITS: u32 = 109;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BenchConfig {
    pub name: &'static str,
    pub log_n: u8,
    pub towers: usize,
    pub reference_ms: f64,
}

pub const CONFIGS: [BenchConfig; 2] = [
    BenchConfig {
        name: "n4096x1",
        log_n: 12,
        towers: 1,
        reference_ms: 0.84,
    },
    BenchConfig {
        name: "n8192x2",
        log_n: 13,
        towers: 2,
        reference_ms: 3.58,
    },
];

pub fn config(name: &str) -> Option<BenchConfig> {
    CONFIGS.into_iter().find(|c| c.name == name)
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Device(#[from] DeviceError),
    #[error(transparent)]
    ModMath(#[from] ModMathError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

#[derive(Clone, Debug)]
pub struct BenchResult {
    pub config: BenchConfig,
    pub moduli: Vec<u128>,
    pub tower_cycles: Vec<u64>,
    pub tower_stats: Vec<DeviceStats>,
    /// Every tower's device output equals the host-side product.
    pub verified: bool,
    pub report: BenchReport,
}

impl BenchResult {
    pub fn passed(&self) -> bool {
        self.verified && self.report.within(TOLERANCE) == Some(true)
    }
}

/// Runs the ciphertext product once per tower on a fresh device, towers
/// back to back, and checks each against the ring implementation.
pub fn run_bench(
    cfg: &BenchConfig,
    seed: u64,
    model: CycleModel,
) -> Result<BenchResult, BenchError> {
    let n = 1usize << cfg.log_n;
    let moduli = gen_ntt_primes::<u128>(n, TOWER_BITS, cfg.towers)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut report = BenchReport::new(cfg.name, model.clock_hz).with_reference(cfg.reference_ms);
    let mut tower_cycles = Vec::new();
    let mut tower_stats = Vec::new();
    let mut verified = true;
    for (i, &q) in moduli.iter().enumerate() {
        let ring = Ring::new(n, q)?;
        let mut poly = || Poly::new(sample_poly(&mut rng, n, q));
        let ca = Ciphertext::new(poly(), poly())?;
        let cb = Ciphertext::new(poly(), poly())?;
        let mut dev = Device::new(model)?;
        let (got, cycles) = run_ct_mul_program(&mut dev, &ca, &cb, &ring.params, &ring.twiddles)?;
        verified &= got == ring.ct_mul(&ca, &cb)?;
        report.add_run(&format!("tower{i}"), dev.log(), cycles);
        tower_cycles.push(cycles);
        tower_stats.push(dev.stats().clone());
    }
    Ok(BenchResult {
        config: *cfg,
        moduli,
        tower_cycles,
        tower_stats,
        verified,
        report,
    })
}
