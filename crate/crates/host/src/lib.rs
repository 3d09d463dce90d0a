//! Host side of the accelerator: test vectors, an assembler for command
//! programs, a runner that verifies device results, and benchmarks.

pub mod asm;
pub mod bench;
pub mod programs;
pub mod report;
pub mod runner;
pub mod vectors;
