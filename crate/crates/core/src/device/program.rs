//! The ciphertext-multiplication command sequence.
//!
//! Transforms run on the three dual-port banks so every butterfly issues at
//! II = 1. While one transform runs, the DMA engine moves the previous
//! result out to a single-port bank and the next input in, so copies hide
//! behind compute. Pointwise products read from separate single-port banks.

use super::command::{BinaryArgs, Command, CopyArgs, TransformArgs};
use super::memory::{Operand, BANK_WORDS};
use super::{Device, DeviceError, FIFO_DEPTH};
use crate::polyring::{Ciphertext, CiphertextProduct, Polynomial};
use crate::{Coefficient, Params, Twiddles};

/// Where the program expects its inputs and leaves its outputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CtMulProgram {
    pub log_n: u8,
    /// `a1, a2, b1, b2` in coefficient form.
    pub inputs: [Operand; 4],
    pub twiddles: Operand,
    /// `d1, d2, d3` in coefficient form.
    pub outputs: [Operand; 3],
    pub commands: Vec<Command>,
}

const TWIDDLE_BANK: u8 = 7;

pub fn ct_mul_program(log_n: u8) -> Result<CtMulProgram, DeviceError> {
    let n = 1usize << log_n;
    if n > BANK_WORDS {
        return Err(DeviceError::BankConflict(format!(
            "ciphertext product needs one bank per polynomial; degree {n} exceeds {BANK_WORDS} words"
        )));
    }
    if !(super::command::MIN_LOG_N..=super::command::MAX_LOG_N).contains(&log_n) {
        return Err(DeviceError::malformed(format!(
            "log2 n = {log_n} out of range"
        )));
    }
    let b = Operand::bank;
    let w = b(TWIDDLE_BANK);
    let other = |pair: [u8; 2], r: u8| if pair[0] == r { pair[1] } else { pair[0] };
    let dual_free = |used: [u8; 2]| (0..3).find(|d| !used.contains(d)).unwrap();
    let copy = |src: u8, dst: u8| {
        Command::MemCpy(CopyArgs {
            src: b(src),
            dst: b(dst),
            len: n as u16,
        })
    };
    let ntt = |x: u8, t: u8| {
        let mut a = TransformArgs {
            x: b(x),
            t: b(t),
            w,
            out: b(x),
            log_n,
        };
        a.out = a.forward_result();
        (Command::Ntt(a), a.out.bank)
    };
    let intt = |x: u8, t: u8| {
        let mut a = TransformArgs {
            x: b(x),
            t: b(t),
            w,
            out: b(x),
            log_n,
        };
        a.out = a.inverse_result();
        (Command::Intt(a), a.out.bank)
    };
    let bin = |x: u8, y: u8, out: u8| BinaryArgs {
        x: b(x),
        y: b(y),
        out: b(out),
        log_n,
    };

    let mut cmds = Vec::new();
    // a1 in 0, a2 in 3, b1 in 4, b2 in 5.
    cmds.push(copy(3, 2));
    let (c, r1) = ntt(0, 1);
    cmds.push(c);
    let s1 = other([0, 1], r1);
    cmds.push(copy(r1, 3));
    let (c, r2) = ntt(2, s1);
    cmds.push(c);
    let s2 = other([2, s1], r2);
    cmds.push(copy(4, r1));
    cmds.push(copy(r2, 4));
    let (c, r3) = ntt(r1, s2);
    cmds.push(c);
    let s3 = other([r1, s2], r3);
    cmds.push(copy(5, r2));
    cmds.push(copy(r3, 5));
    let (c, r4) = ntt(r2, s3);
    cmds.push(c);
    let s4 = other([r2, s3], r4);
    let f = dual_free([r4, s4]);
    // A1 in 3, A2 in 4, B1 in 5, B2 in r4.
    cmds.push(Command::PModMul(bin(3, r4, s4)));
    cmds.push(Command::PModMul(bin(4, r4, 6)));
    cmds.push(Command::PModMul(bin(3, 5, r4)));
    cmds.push(Command::PModMul(bin(4, 5, f)));
    cmds.push(Command::PModAdd(bin(s4, f, s4)));
    // d1 in r4, d2 in s4, d3 in 6.
    let (c, i1) = intt(r4, f);
    cmds.push(c);
    let j1 = other([r4, f], i1);
    cmds.push(copy(i1, 3));
    let (c, i2) = intt(s4, j1);
    cmds.push(c);
    let j2 = other([s4, j1], i2);
    cmds.push(copy(6, i1));
    cmds.push(copy(i2, 4));
    let (c, i3) = intt(i1, j2);
    cmds.push(c);
    debug_assert!(cmds.len() <= FIFO_DEPTH);

    Ok(CtMulProgram {
        log_n,
        inputs: [b(0), b(3), b(4), b(5)],
        twiddles: w,
        outputs: [b(3), b(4), b(i3)],
        commands: cmds,
    })
}

/// Loads both ciphertexts and the twiddles, runs the program through the
/// FIFO and reads back the product. Returns the product and elapsed cycles.
pub fn run_ct_mul_program(
    dev: &mut Device,
    ca: &Ciphertext<Coefficient>,
    cb: &Ciphertext<Coefficient>,
    params: &Params,
    twiddles: &Twiddles,
) -> Result<(CiphertextProduct<Coefficient>, u64), DeviceError> {
    let prog = ct_mul_program(params.log_n as u8)?;
    dev.configure(params)?;
    dev.load(prog.twiddles, twiddles.entries())?;
    for (at, p) in prog.inputs.iter().zip([&ca.c1, &ca.c2, &cb.c1, &cb.c2]) {
        if p.len() != params.n {
            return Err(DeviceError::malformed(format!(
                "input has {} coefficients, expected {}",
                p.len(),
                params.n
            )));
        }
        dev.load(*at, p.coeffs())?;
    }
    for cmd in &prog.commands {
        dev.push_command(cmd)?;
    }
    let cycles = dev.run_until_idle()?;
    let read = |at: Operand| dev.read(at, params.n).map(Polynomial::new);
    let product = CiphertextProduct {
        d1: read(prog.outputs[0])?,
        d2: read(prog.outputs[1])?,
        d3: read(prog.outputs[2])?,
    };
    Ok((product, cycles))
}
