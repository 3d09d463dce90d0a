//! Built-in device programs.

use std::fmt::Write as _;

use fheaccel_core::device::{
    ct_mul_program, BinaryArgs, Command, ConstSource, CopyArgs, DeviceError, Operand,
    TransformArgs, UnaryArgs,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::asm::{disassemble, Program, Transfer};

pub const TWIDDLE_BANK: u8 = 7;
pub const MAX_TOUR_LOG_N: u8 = 11;

/// Loads `a1, a2, b1, b2` and the twiddles, runs the scheduled ciphertext
/// product and checks `d1, d2, d3`. Needs `n <= 8192`.
pub fn ct_mul(log_n: u8) -> Result<Program, DeviceError> {
    let p = ct_mul_program(log_n)?;
    let t = |at, name: &str| Transfer {
        at,
        name: name.to_string(),
    };
    let mut loads: Vec<Transfer> = p
        .inputs
        .iter()
        .zip(["input.a1", "input.a2", "input.b1", "input.b2"])
        .map(|(&a, n)| t(a, n))
        .collect();
    loads.push(t(p.twiddles, "twiddles"));
    let checks = p
        .outputs
        .iter()
        .zip(["expect.ct_mul.d1", "expect.ct_mul.d2", "expect.ct_mul.d3"])
        .map(|(&a, n)| t(a, n))
        .collect();
    Ok(Program {
        constant: None,
        loads,
        commands: p.commands,
        checks,
    })
}

/// Forward transform of `a1`, a copy of the spectrum, then the inverse.
/// Checks the spectrum against `expect.ntt` and the final result against
/// the input.
pub fn roundtrip(log_n: u8) -> String {
    let n = 1u32 << log_n;
    let mut s = String::new();
    let _ = writeln!(s, "# forward and inverse transform of a1");
    let _ = writeln!(s, ".degree {n}");
    let _ = writeln!(s, ".load bank0 input.a1");
    let _ = writeln!(s, ".load bank{TWIDDLE_BANK} twiddles");
    let _ = writeln!(s, "NTT x=bank0 t=bank1 w=bank{TWIDDLE_BANK} out=bank3");
    let _ = writeln!(s, "MEMCPY src=bank3 dst=bank5");
    let _ = writeln!(s, "INTT x=bank3 t=bank1 w=bank{TWIDDLE_BANK} out=bank2");
    let _ = writeln!(s, ".check bank5 expect.ntt");
    let _ = writeln!(s, ".check bank2 input.a1");
    s
}

/// Every compute opcode once plus both copies, checked against the
/// single-op expectations of a vector set generated with all ops. Four
/// results share bank 6, so `n <= 2048`.
pub fn opcode_tour(log_n: u8) -> String {
    let n = 1u32 << log_n;
    let w = TWIDDLE_BANK;
    format!(
        "\
.degree {n}
.load bank0 input.a1
.load bank1 input.b1
.load bank{w} twiddles
MEMCPY  src=bank0 dst=bank2
NTT     x=bank2 t=bank3 w=bank{w} out=bank4
MEMCPY  src=bank0 dst=bank2
INTT    x=bank2 t=bank3 w=bank{w} out=bank5
PMODADD x=bank0 y=bank1 out=bank2
MEMCPY  src=bank2 dst=bank6
PMODSUB x=bank0 y=bank1 out=bank2
MEMCPY  src=bank2 dst=bank6+{n}
PMODMUL x=bank0 y=bank1 out=bank2
MEMCPY  src=bank2 dst=bank6+{n2}
PMODSQR x=bank0 out=bank2
MEMCPY  src=bank2 dst=bank6+{n3}
CMODMUL x=bank0 out=bank3 c=inv
PMUL    x=bank0 y=bank1 out=bank2
MEMCPYR src=bank0 dst=bank1
.check bank4 expect.ntt
.check bank5 expect.intt
.check bank6 expect.add
.check bank6+{n} expect.sub
.check bank6+{n2} expect.mul
.check bank6+{n3} expect.sqr
.check bank3 expect.cmul
.check bank2 expect.pmul
.check bank1 expect.bitrev
",
        n2 = 2 * n,
        n3 = 3 * n
    )
}

/// A random program of `len` commands over banks 0-6 with the twiddles in
/// bank 7. Every command keeps memory reduced, so any prefix can run on
/// reduced data. `PMUL` is left out for the same reason, and no pointwise
/// command reads and writes one bank three times per issue.
pub fn random_program(seed: u64, log_n: u8, len: usize) -> Program {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = Operand::bank;
    let n = 1u16 << log_n;
    let mut commands = Vec::with_capacity(len);
    let pick = |rng: &mut ChaCha8Rng, not: &[u8]| loop {
        let v = rng.gen_range(0..TWIDDLE_BANK);
        if !not.contains(&v) {
            break v;
        }
    };
    for _ in 0..len {
        let cmd = match rng.gen_range(0..9) {
            k @ (0 | 1) => {
                let x = pick(&mut rng, &[]);
                let t = pick(&mut rng, &[x]);
                let mut a = TransformArgs {
                    x: b(x),
                    t: b(t),
                    w: b(TWIDDLE_BANK),
                    out: b(x),
                    log_n,
                };
                a.out = if rng.gen_bool(0.5) {
                    b(pick(&mut rng, &[x, t]))
                } else if k == 0 {
                    a.forward_result()
                } else {
                    a.inverse_result()
                };
                if k == 0 {
                    Command::Ntt(a)
                } else {
                    Command::Intt(a)
                }
            }
            k @ (2..=4) => {
                let x = pick(&mut rng, &[]);
                let y = pick(&mut rng, &[]);
                let out = if x != y && rng.gen_bool(0.3) {
                    x
                } else {
                    pick(&mut rng, &[x, y])
                };
                let a = BinaryArgs {
                    x: b(x),
                    y: b(y),
                    out: b(out),
                    log_n,
                };
                match k {
                    2 => Command::PModAdd(a),
                    3 => Command::PModSub(a),
                    _ => Command::PModMul(a),
                }
            }
            k @ (5 | 6) => {
                let x = pick(&mut rng, &[]);
                let out = pick(&mut rng, &[]);
                let a = UnaryArgs {
                    x: b(x),
                    out: b(out),
                    log_n,
                };
                if k == 5 {
                    Command::PModSqr(a)
                } else if rng.gen_bool(0.5) {
                    Command::CModMul(a, ConstSource::Register)
                } else {
                    Command::CModMul(a, ConstSource::InvPolyDeg)
                }
            }
            k => {
                let src = pick(&mut rng, &[]);
                let dst = pick(&mut rng, &[src]);
                let a = CopyArgs {
                    src: b(src),
                    dst: b(dst),
                    len: n,
                };
                if k == 7 {
                    Command::MemCpy(a)
                } else {
                    Command::MemCpyR(a)
                }
            }
        };
        commands.push(cmd);
    }
    let mut loads: Vec<Transfer> = ["input.a1", "input.a2", "input.b1", "input.b2"]
        .iter()
        .enumerate()
        .map(|(i, name)| Transfer {
            at: b(i as u8),
            name: name.to_string(),
        })
        .collect();
    loads.push(Transfer {
        at: b(TWIDDLE_BANK),
        name: "twiddles".into(),
    });
    Program {
        constant: Some(3),
        loads,
        commands,
        checks: Vec::new(),
    }
}

pub fn builtin_names() -> &'static [&'static str] {
    &["roundtrip", "ct_mul", "tour"]
}

/// Program text for a built-in by name.
pub fn builtin(name: &str, log_n: u8) -> Result<String, DeviceError> {
    match name {
        "roundtrip" => Ok(roundtrip(log_n)),
        "tour" if log_n <= MAX_TOUR_LOG_N => Ok(opcode_tour(log_n)),
        "tour" => Err(DeviceError::MalformedCommand(format!(
            "the opcode tour needs n <= {}",
            1 << MAX_TOUR_LOG_N
        ))),
        "ct_mul" => {
            let p = ct_mul(log_n)?;
            Ok(format!(
                "# ciphertext product, n = {}\n.degree {}\n{}",
                1u32 << log_n,
                1u32 << log_n,
                disassemble(&p)
            ))
        }
        other => Err(DeviceError::MalformedCommand(format!(
            "no built-in program `{other}` (have {})",
            builtin_names().join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asm::assemble;

    #[test]
    fn builtins_assemble() {
        for log_n in [2u8, 8, 11, 12, 13] {
            for name in builtin_names() {
                if *name == "tour" && log_n > MAX_TOUR_LOG_N {
                    assert!(builtin(name, log_n).is_err());
                    continue;
                }
                let text = builtin(name, log_n).unwrap();
                assemble(&text).unwrap_or_else(|e| panic!("{name} {log_n}: {e}"));
            }
        }
        assert_eq!(
            assemble(&builtin("ct_mul", 8).unwrap()).unwrap(),
            ct_mul(8).unwrap()
        );
    }

    #[test]
    fn random_programs_are_valid_and_seeded() {
        for seed in 0..50 {
            let p = random_program(seed, 5, 40);
            for c in &p.commands {
                c.validate().unwrap();
                if let Command::PModAdd(a) | Command::PModSub(a) | Command::PModMul(a) = c {
                    assert!(!(a.x == a.y && a.out == a.x));
                }
            }
            assert_eq!(p, random_program(seed, 5, 40));
        }
    }
}
