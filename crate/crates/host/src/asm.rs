//! Text assembler for device command programs.
//!
//! One statement per line, `#` to end of line is a comment:
//!
//! ```text
//! .degree 4096
//! .load  bank0 input.a1
//! .load  bank7 twiddles
//! NTT    x=bank0 t=bank1 w=bank7 out=bank1
//! PMODMUL x=bank3 y=bank4+16 out=bank5
//! CMODMUL x=bank2 c=inv
//! MEMCPY src=bank1 dst=bank6 len=4096
//! .check bank6 expect.ntt
//! ```
//!
//! Operands are `bankK` or `bankK+OFFSET` (offset in words, decimal or
//! `0x` hex). `n` is the polynomial degree and defaults to the last
//! `.degree`; `len` defaults to the degree as well. `out` defaults to `x`,
//! or for transforms to the bank the result lands in naturally. `c` is
//! `const` (CMODCONST, the default) or `inv` (INV_POLYDEG). `.const V`
//! sets CMODCONST before the run.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use fheaccel_core::device::command::{MAX_LOG_N, MIN_LOG_N};
use fheaccel_core::device::{
    BinaryArgs, Command, ConstSource, CopyArgs, DeviceError, Opcode, Operand, TransformArgs,
    UnaryArgs, BANK_WORDS, NUM_BANKS,
};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {col}: {kind}")]
pub struct AsmError {
    pub line: usize,
    pub col: usize,
    pub kind: AsmErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AsmErrorKind {
    #[error("unknown mnemonic `{0}`")]
    UnknownMnemonic(String),
    #[error("unknown directive `{0}`")]
    UnknownDirective(String),
    #[error("missing operand `{0}`")]
    MissingOperand(&'static str),
    #[error("unexpected operand `{0}`")]
    UnexpectedOperand(String),
    #[error("duplicate operand `{0}`")]
    DuplicateOperand(String),
    #[error("bad bank reference `{0}`")]
    BadBank(String),
    #[error("bad value `{value}` for `{key}`")]
    BadValue { key: String, value: String },
    #[error("expected `key=value`, found `{0}`")]
    Syntax(String),
    #[error(transparent)]
    Invalid(#[from] DeviceError),
}

/// A named host buffer moved to or from device memory around the commands.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transfer {
    pub at: Operand,
    pub name: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    /// CMODCONST value, from `.const`.
    pub constant: Option<u128>,
    pub loads: Vec<Transfer>,
    pub commands: Vec<Command>,
    pub checks: Vec<Transfer>,
}

impl Program {
    pub fn from_commands(commands: Vec<Command>) -> Self {
        Program {
            commands,
            ..Default::default()
        }
    }
}

pub fn parse_operand(s: &str) -> Option<Operand> {
    let rest = s.strip_prefix("bank")?;
    let (bank, off) = match rest.split_once('+') {
        Some((b, o)) => (b, parse_int(o)?),
        None => (rest, 0),
    };
    let bank: u8 = bank.parse().ok()?;
    if bank as usize >= NUM_BANKS || off >= BANK_WORDS as u64 {
        return None;
    }
    Some(Operand::new(bank, off as u16))
}

fn parse_int(s: &str) -> Option<u64> {
    match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(h) => u64::from_str_radix(h, 16).ok(),
        None => s.parse().ok(),
    }
}

pub fn format_operand(op: Operand) -> String {
    if op.offset == 0 {
        format!("bank{}", op.bank)
    } else {
        format!("bank{}+{}", op.bank, op.offset)
    }
}

/// Tokens of a line with their 1-based starting columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

struct Fields<'a> {
    line: usize,
    mnemonic_col: usize,
    map: BTreeMap<&'a str, (usize, &'a str)>,
}

impl<'a> Fields<'a> {
    fn err(&self, col: usize, kind: AsmErrorKind) -> AsmError {
        AsmError {
            line: self.line,
            col,
            kind,
        }
    }

    fn take(&mut self, key: &'static str) -> Option<(usize, &'a str)> {
        self.map.remove(key)
    }

    fn operand(&mut self, key: &'static str) -> Result<Option<Operand>, AsmError> {
        match self.take(key) {
            None => Ok(None),
            Some((col, v)) => parse_operand(v)
                .map(Some)
                .ok_or_else(|| self.err(col, AsmErrorKind::BadBank(v.to_string()))),
        }
    }

    fn required(&mut self, key: &'static str) -> Result<Operand, AsmError> {
        self.operand(key)?
            .ok_or_else(|| self.err(self.mnemonic_col, AsmErrorKind::MissingOperand(key)))
    }

    fn number(&mut self, key: &'static str, default: Option<u64>) -> Result<u64, AsmError> {
        match self.take(key) {
            Some((col, v)) => parse_int(v).ok_or_else(|| {
                self.err(
                    col,
                    AsmErrorKind::BadValue {
                        key: key.to_string(),
                        value: v.to_string(),
                    },
                )
            }),
            None => default
                .ok_or_else(|| self.err(self.mnemonic_col, AsmErrorKind::MissingOperand(key))),
        }
    }

    fn log_n(&mut self, degree: Option<u64>) -> Result<u8, AsmError> {
        let col = self.map.get("n").map_or(self.mnemonic_col, |f| f.0);
        let n = self.number("n", degree)?;
        let ok =
            n.is_power_of_two() && (MIN_LOG_N..=MAX_LOG_N).contains(&(n.trailing_zeros() as u8));
        if !ok {
            return Err(self.err(
                col,
                AsmErrorKind::BadValue {
                    key: "n".into(),
                    value: n.to_string(),
                },
            ));
        }
        Ok(n.trailing_zeros() as u8)
    }

    fn finish(self) -> Result<(), AsmError> {
        match self.map.into_iter().next() {
            Some((k, (col, _))) => Err(AsmError {
                line: self.line,
                col,
                kind: AsmErrorKind::UnexpectedOperand(k.into()),
            }),
            None => Ok(()),
        }
    }
}

fn parse_command(
    line: usize,
    toks: &[(usize, &str)],
    degree: Option<u64>,
) -> Result<Command, AsmError> {
    let (mcol, mnemonic) = toks[0];
    let op = Opcode::from_mnemonic(mnemonic).ok_or(AsmError {
        line,
        col: mcol,
        kind: AsmErrorKind::UnknownMnemonic(mnemonic.into()),
    })?;
    let mut f = Fields {
        line,
        mnemonic_col: mcol,
        map: BTreeMap::new(),
    };
    for &(col, tok) in &toks[1..] {
        let (k, v) = tok
            .split_once('=')
            .ok_or(f.err(col, AsmErrorKind::Syntax(tok.into())))?;
        if f.map.insert(k, (col, v)).is_some() {
            return Err(f.err(col, AsmErrorKind::DuplicateOperand(k.into())));
        }
    }
    let cmd = match op {
        Opcode::Ntt | Opcode::Intt => {
            let (x, w, t) = (f.required("x")?, f.required("w")?, f.required("t")?);
            let out = f.operand("out")?;
            let log_n = f.log_n(degree)?;
            let mut a = TransformArgs {
                x,
                t,
                w,
                out: x,
                log_n,
            };
            if op == Opcode::Ntt {
                a.out = out.unwrap_or(a.forward_result());
                Command::Ntt(a)
            } else {
                a.out = out.unwrap_or(a.inverse_result());
                Command::Intt(a)
            }
        }
        Opcode::PModAdd | Opcode::PModMul | Opcode::PModSub | Opcode::PMul => {
            let (x, y) = (f.required("x")?, f.required("y")?);
            let out = f.operand("out")?.unwrap_or(x);
            let a = BinaryArgs {
                x,
                y,
                out,
                log_n: f.log_n(degree)?,
            };
            match op {
                Opcode::PModAdd => Command::PModAdd(a),
                Opcode::PModMul => Command::PModMul(a),
                Opcode::PModSub => Command::PModSub(a),
                _ => Command::PMul(a),
            }
        }
        Opcode::PModSqr | Opcode::CModMul => {
            let x = f.required("x")?;
            let out = f.operand("out")?.unwrap_or(x);
            let a = UnaryArgs {
                x,
                out,
                log_n: f.log_n(degree)?,
            };
            if op == Opcode::PModSqr {
                Command::PModSqr(a)
            } else {
                let src = match f.take("c") {
                    None | Some((_, "const")) => ConstSource::Register,
                    Some((_, "inv")) => ConstSource::InvPolyDeg,
                    Some((col, v)) => {
                        return Err(f.err(
                            col,
                            AsmErrorKind::BadValue {
                                key: "c".into(),
                                value: v.into(),
                            },
                        ))
                    }
                };
                Command::CModMul(a, src)
            }
        }
        Opcode::MemCpy | Opcode::MemCpyR => {
            let (src, dst) = (f.required("src")?, f.required("dst")?);
            let col = f.map.get("len").map_or(mcol, |x| x.0);
            let len = f.number("len", degree)?;
            let len = u16::try_from(len).map_err(|_| {
                f.err(
                    col,
                    AsmErrorKind::BadValue {
                        key: "len".into(),
                        value: len.to_string(),
                    },
                )
            })?;
            let a = CopyArgs { src, dst, len };
            if op == Opcode::MemCpy {
                Command::MemCpy(a)
            } else {
                Command::MemCpyR(a)
            }
        }
    };
    f.finish()?;
    cmd.validate().map_err(|e| AsmError {
        line,
        col: mcol,
        kind: e.into(),
    })?;
    Ok(cmd)
}

pub fn assemble(src: &str) -> Result<Program, AsmError> {
    let mut prog = Program::default();
    let mut degree = None;
    for (i, raw) in src.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap();
        let toks = tokens(body);
        let Some(&(col, head)) = toks.first() else {
            continue;
        };
        let err = |col, kind| AsmError { line, col, kind };
        if let Some(dir) = head.strip_prefix('.') {
            match dir {
                "degree" => {
                    let &(c, v) = toks
                        .get(1)
                        .ok_or(err(col, AsmErrorKind::MissingOperand("degree")))?;
                    let n = parse_int(v).ok_or(err(
                        c,
                        AsmErrorKind::BadValue {
                            key: "degree".into(),
                            value: v.into(),
                        },
                    ))?;
                    degree = Some(n);
                    if let Some(&(c, extra)) = toks.get(2) {
                        return Err(err(c, AsmErrorKind::UnexpectedOperand(extra.into())));
                    }
                }
                "const" => {
                    let &(c, v) = toks
                        .get(1)
                        .ok_or(err(col, AsmErrorKind::MissingOperand("const")))?;
                    let value = v
                        .parse::<u128>()
                        .ok()
                        .or_else(|| {
                            v.strip_prefix("0x")
                                .and_then(|h| u128::from_str_radix(h, 16).ok())
                        })
                        .ok_or(err(
                            c,
                            AsmErrorKind::BadValue {
                                key: "const".into(),
                                value: v.into(),
                            },
                        ))?;
                    prog.constant = Some(value);
                    if let Some(&(c, extra)) = toks.get(2) {
                        return Err(err(c, AsmErrorKind::UnexpectedOperand(extra.into())));
                    }
                }
                "load" | "check" => {
                    let &(c, at) = toks
                        .get(1)
                        .ok_or(err(col, AsmErrorKind::MissingOperand("operand")))?;
                    let at = parse_operand(at).ok_or(err(c, AsmErrorKind::BadBank(at.into())))?;
                    let &(_, name) = toks
                        .get(2)
                        .ok_or(err(col, AsmErrorKind::MissingOperand("name")))?;
                    if let Some(&(c, extra)) = toks.get(3) {
                        return Err(err(c, AsmErrorKind::UnexpectedOperand(extra.into())));
                    }
                    let t = Transfer {
                        at,
                        name: name.to_string(),
                    };
                    if dir == "load" {
                        prog.loads.push(t);
                    } else {
                        prog.checks.push(t);
                    }
                }
                _ => return Err(err(col, AsmErrorKind::UnknownDirective(head.into()))),
            }
            continue;
        }
        prog.commands.push(parse_command(line, &toks, degree)?);
    }
    Ok(prog)
}

pub fn disassemble_command(cmd: &Command) -> String {
    let o = |op: Operand| format_operand(op);
    let n = |log_n: u8| 1u32 << log_n;
    let m = cmd.opcode().mnemonic();
    match cmd {
        Command::Ntt(a) | Command::Intt(a) => {
            format!(
                "{m} x={} t={} w={} out={} n={}",
                o(a.x),
                o(a.t),
                o(a.w),
                o(a.out),
                n(a.log_n)
            )
        }
        Command::PModAdd(a) | Command::PModMul(a) | Command::PModSub(a) | Command::PMul(a) => {
            format!(
                "{m} x={} y={} out={} n={}",
                o(a.x),
                o(a.y),
                o(a.out),
                n(a.log_n)
            )
        }
        Command::PModSqr(a) => format!("{m} x={} out={} n={}", o(a.x), o(a.out), n(a.log_n)),
        Command::CModMul(a, c) => {
            let c = match c {
                ConstSource::Register => "const",
                ConstSource::InvPolyDeg => "inv",
            };
            format!("{m} x={} out={} n={} c={c}", o(a.x), o(a.out), n(a.log_n))
        }
        Command::MemCpy(a) | Command::MemCpyR(a) => {
            format!("{m} src={} dst={} len={}", o(a.src), o(a.dst), a.len)
        }
    }
}

/// Canonical text for `prog`; assembling it gives `prog` back.
pub fn disassemble(prog: &Program) -> String {
    let mut s = String::new();
    if let Some(c) = prog.constant {
        let _ = writeln!(s, ".const {c}");
    }
    for t in &prog.loads {
        let _ = writeln!(s, ".load {} {}", format_operand(t.at), t.name);
    }
    for c in &prog.commands {
        let _ = writeln!(s, "{}", disassemble_command(c));
    }
    for t in &prog.checks {
        let _ = writeln!(s, ".check {} {}", format_operand(t.at), t.name);
    }
    s
}

/// The 3-word encodings of every command, in order.
pub fn encode(prog: &Program) -> Vec<u32> {
    prog.commands.iter().flat_map(Command::encode).collect()
}
