//! Loads a program's buffers, executes it and checks the results.

use std::fmt;
use std::str::FromStr;

use fheaccel_core::device::{
    CommandRecord, CycleModel, Device, DeviceError, DeviceStats, Operand, FIFO_DEPTH,
};
use fheaccel_core::{Coefficient, Twiddles};
use thiserror::Error;

use crate::asm::{format_operand, Program};
use crate::vectors::{TestVectorSet, VectorError};

pub const TWIDDLES: &str = "twiddles";

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Device(#[from] DeviceError),
    #[error(transparent)]
    Vectors(#[from] VectorError),
    #[error("no buffer named `{0}` in the vector set")]
    UnknownBuffer(String),
    #[error("snapshot point {at} is past the end of a {len}-command program")]
    SnapshotPoint { at: usize, len: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Each command through DIRECT_CMD and an FHECTL2 trigger, one at a time.
    Direct,
    /// Commands pushed into COMMANDFIFO and dispatched by the scheduler.
    Fifo,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "direct" => Ok(Mode::Direct),
            "fifo" => Ok(Mode::Fifo),
            _ => Err(format!("unknown mode `{s}` (direct or fifo)")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Direct => "direct",
            Mode::Fifo => "fifo",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mismatch {
    pub buffer: String,
    pub at: Operand,
    pub index: usize,
    pub expected: Coefficient,
    pub actual: Coefficient,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} at {} index {}: expected {}, got {}",
            self.buffer,
            format_operand(self.at),
            self.index,
            self.expected,
            self.actual
        )
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub mode: Mode,
    pub cycles: u64,
    pub stats: DeviceStats,
    pub log: Vec<CommandRecord>,
    pub checks: usize,
    pub mismatches: Vec<Mismatch>,
    pub device: Device,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

fn buffer(vectors: &TestVectorSet, name: &str) -> Result<Vec<Coefficient>, RunError> {
    if name == TWIDDLES {
        return Ok(Twiddles::new(&vectors.params()?).entries().to_vec());
    }
    vectors
        .get(name)
        .map(<[_]>::to_vec)
        .ok_or_else(|| RunError::UnknownBuffer(name.into()))
}

/// Writes the ring registers, CMODCONST and every `.load` buffer.
pub fn prepare(dev: &mut Device, prog: &Program, vectors: &TestVectorSet) -> Result<(), RunError> {
    dev.configure(&vectors.params()?)?;
    dev.set_constant(prog.constant.unwrap_or(vectors.n_inv) % vectors.q)?;
    for t in &prog.loads {
        dev.load(t.at, &buffer(vectors, &t.name)?)?;
    }
    Ok(())
}

/// Runs `prog.commands[range]` and returns the cycles taken. In FIFO mode
/// the queue is topped up whenever it has room.
pub fn execute(
    dev: &mut Device,
    prog: &Program,
    range: std::ops::Range<usize>,
    mode: Mode,
) -> Result<u64, RunError> {
    let cmds = &prog.commands[range];
    let start = dev.cycle();
    match mode {
        Mode::Direct => {
            for c in cmds {
                dev.execute(c)?;
            }
        }
        Mode::Fifo => {
            let mut next = 0;
            loop {
                while next < cmds.len() && dev.fifo().len() < FIFO_DEPTH {
                    dev.push_command(&cmds[next])?;
                    next += 1;
                }
                let advanced = dev.step()?;
                if next == cmds.len() && advanced == 0 && dev.is_idle() {
                    break;
                }
            }
        }
    }
    Ok(dev.cycle() - start)
}

/// Compares every `.check` buffer against device memory.
pub fn verify(
    dev: &Device,
    prog: &Program,
    vectors: &TestVectorSet,
) -> Result<Vec<Mismatch>, RunError> {
    let mut out = Vec::new();
    for t in &prog.checks {
        let expected = buffer(vectors, &t.name)?;
        let actual = dev.read(t.at, expected.len())?;
        for (index, (&e, &a)) in expected.iter().zip(&actual).enumerate() {
            if e != a {
                out.push(Mismatch {
                    buffer: t.name.clone(),
                    at: t.at,
                    index,
                    expected: e,
                    actual: a,
                });
            }
        }
    }
    Ok(out)
}

fn outcome(
    dev: Device,
    mode: Mode,
    cycles: u64,
    prog: &Program,
    vectors: &TestVectorSet,
) -> Result<RunOutcome, RunError> {
    let mismatches = verify(&dev, prog, vectors)?;
    Ok(RunOutcome {
        mode,
        cycles,
        stats: dev.stats().clone(),
        log: dev.log().to_vec(),
        checks: prog.checks.len(),
        mismatches,
        device: dev,
    })
}

pub fn run(
    prog: &Program,
    vectors: &TestVectorSet,
    mode: Mode,
    model: CycleModel,
) -> Result<RunOutcome, RunError> {
    let mut dev = Device::new(model)?;
    prepare(&mut dev, prog, vectors)?;
    let cycles = execute(&mut dev, prog, 0..prog.commands.len(), mode)?;
    outcome(dev, mode, cycles, prog, vectors)
}

/// Runs the first `at` commands, snapshots the idle device, restores the
/// snapshot into a fresh device and finishes the program there.
pub fn run_resumed(
    prog: &Program,
    vectors: &TestVectorSet,
    mode: Mode,
    model: CycleModel,
    at: usize,
) -> Result<RunOutcome, RunError> {
    let len = prog.commands.len();
    if at > len {
        return Err(RunError::SnapshotPoint { at, len });
    }
    let mut first = Device::new(model)?;
    prepare(&mut first, prog, vectors)?;
    let head = execute(&mut first, prog, 0..at, mode)?;
    let bytes = first.snapshot()?;
    let mut second = Device::restore(&bytes, model)?;
    let tail = execute(&mut second, prog, at..len, mode)?;
    outcome(second, mode, head + tail, prog, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asm::assemble;
    use crate::programs;
    use crate::vectors::{gen_vectors, VectorOp};

    #[test]
    fn roundtrip_passes_in_both_modes() {
        let v = gen_vectors(256, 60, 5, &[VectorOp::Ntt]).unwrap();
        let prog = assemble(&programs::roundtrip(8)).unwrap();
        let d = run(&prog, &v, Mode::Direct, CycleModel::default()).unwrap();
        let f = run(&prog, &v, Mode::Fifo, CycleModel::default()).unwrap();
        assert!(d.passed() && f.passed(), "{:?}", d.mismatches);
        assert_eq!(d.device.memory(), f.device.memory());
        assert!(f.cycles <= d.cycles);
    }

    #[test]
    fn mismatches_name_the_index() {
        let v = gen_vectors(16, 30, 5, &[VectorOp::Ntt]).unwrap();
        let mut prog = assemble(&programs::roundtrip(4)).unwrap();
        prog.commands.pop();
        let out = run(&prog, &v, Mode::Fifo, CycleModel::default()).unwrap();
        assert!(!out.passed());
        assert!(out.mismatches.iter().all(|m| m.buffer == "input.a1"));
        assert_eq!(out.mismatches[0].at, Operand::bank(2));
    }

    #[test]
    fn unknown_buffer() {
        let v = gen_vectors(16, 30, 5, &[]).unwrap();
        let prog = assemble(".load bank0 expect.ntt").unwrap();
        assert!(matches!(
            run(&prog, &v, Mode::Direct, CycleModel::default()),
            Err(RunError::UnknownBuffer(_))
        ));
    }
}
