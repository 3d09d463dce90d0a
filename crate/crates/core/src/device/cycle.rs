//! Throughput-level timing: initiation interval, pipeline fill, stage
//! bubbles and dispatch latency.

use super::DeviceError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CycleModel {
    pub clock_hz: u64,
    pub add_sub_latency: u64,
    pub mul_latency: u64,
    /// Bubble between transform stages.
    pub stage_overhead: u64,
    /// Cycles from the head of the queue to the engine starting.
    pub dispatch_latency: u64,
    pub memcpy_words_per_cycle: u64,
}

impl Default for CycleModel {
    fn default() -> Self {
        CycleModel {
            clock_hz: 250_000_000,
            add_sub_latency: 1,
            mul_latency: 5,
            stage_overhead: 8,
            dispatch_latency: 1,
            memcpy_words_per_cycle: 1,
        }
    }
}

/// Largest initiation interval the datapath supports.
pub const MAX_II: u32 = 2;

/// Cost breakdown of one command.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CommandCost {
    /// Initiation interval of the main phase.
    pub ii: u32,
    /// Butterfly issue cycles, `(n/2) log n II`; zero for other commands.
    pub butterfly_issue: u64,
    /// All issue cycles, including scaling and copy-out passes.
    pub issue: u64,
    /// Pipeline fill and stage bubbles.
    pub overhead: u64,
    pub dispatch: u64,
}

impl CommandCost {
    pub fn total(&self) -> u64 {
        self.issue + self.overhead + self.dispatch
    }
}

impl CycleModel {
    pub fn validate(&self) -> Result<(), DeviceError> {
        if self.clock_hz == 0
            || self.add_sub_latency == 0
            || self.mul_latency == 0
            || self.memcpy_words_per_cycle == 0
        {
            return Err(DeviceError::Config(
                "clock and latencies must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Nominal II for a transform placed on the best banks available.
    pub fn nominal_butterfly_ii(n: usize) -> u32 {
        if n <= 1 << 13 {
            1
        } else {
            2
        }
    }

    pub fn butterfly_issue(n: usize, ii: u32) -> u64 {
        (n as u64 / 2) * n.trailing_zeros() as u64 * ii as u64
    }

    /// Forward transform without dispatch: issue + stage bubbles + fill.
    pub fn ntt_cycles(&self, n: usize, ii: u32) -> u64 {
        Self::butterfly_issue(n, ii)
            + n.trailing_zeros() as u64 * self.stage_overhead
            + self.mul_latency
    }

    /// Inverse transform: forward cost plus an `n`-word scaling pass.
    pub fn intt_cycles(&self, n: usize, ii: u32, scale_ii: u32) -> u64 {
        self.ntt_cycles(n, ii) + n as u64 * scale_ii as u64 + self.mul_latency
    }

    pub fn pointwise_cycles(&self, n: usize, ii: u32, multiply: bool) -> u64 {
        n as u64 * ii as u64
            + if multiply {
                self.mul_latency
            } else {
                self.add_sub_latency
            }
    }

    pub fn memcpy_cycles(&self, len: usize, ii: u32) -> u64 {
        (len as u64).div_ceil(self.memcpy_words_per_cycle) * ii as u64
    }

    /// Issue cycles of a single-tower ciphertext product: 4 forward, 3
    /// inverse transforms and 5 pointwise passes, all at the nominal II.
    pub fn ct_mul_issue_cycles(n: usize) -> u64 {
        let ii = Self::nominal_butterfly_ii(n);
        let fwd = Self::butterfly_issue(n, ii);
        4 * fwd + 3 * (fwd + n as u64) + 5 * n as u64
    }

    pub fn seconds(&self, cycles: u64) -> f64 {
        cycles as f64 / self.clock_hz as f64
    }

    pub fn millis(&self, cycles: u64) -> f64 {
        self.seconds(cycles) * 1e3
    }
}
