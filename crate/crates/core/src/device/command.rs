//! ISA commands and their three-word encoding.
//!
//! Word 0: `[31:24]` opcode, `[23:20]` bank A, `[19:16]` bank B,
//! `[15:12]` bank C, `[11:8]` bank D, `[7:4]` log2 n, `[3:0]` flags.
//! Word 1: offset A in `[15:0]`, offset B in `[31:16]`.
//! Word 2: offset C in `[15:0]`, offset D in `[31:16]`; copies put the
//! length in `[15:0]` instead.
//!
//! Slot use per opcode:
//!
//! | opcode                  | A   | B   | C   | D   |
//! |-------------------------|-----|-----|-----|-----|
//! | NTT, INTT               | x   | t   | w   | out |
//! | PMODADD/MUL/SUB, PMUL   | x   | y   | out | -   |
//! | PMODSQR, CMODMUL        | x   | -   | out | -   |
//! | MEMCPY, MEMCPYR         | src | dst | -   | -   |
//!
//! Unused fields must be zero.

use std::fmt;

use super::memory::{Operand, Region, BANK_WORDS, NUM_BANKS};
use super::DeviceError;

pub const COMMAND_WORDS: usize = 3;
pub const MIN_LOG_N: u8 = 2;
pub const MAX_LOG_N: u8 = 14;

/// CMODMUL flag: take the constant from INV_POLYDEG instead of CMODCONST.
pub const FLAG_INV_POLYDEG: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Opcode {
    Ntt = 0x01,
    Intt = 0x02,
    PModAdd = 0x03,
    PModMul = 0x04,
    PModSqr = 0x05,
    PModSub = 0x06,
    CModMul = 0x07,
    PMul = 0x08,
    MemCpy = 0x09,
    MemCpyR = 0x0A,
}

impl Opcode {
    pub const ALL: [Opcode; 10] = [
        Opcode::Ntt,
        Opcode::Intt,
        Opcode::PModAdd,
        Opcode::PModMul,
        Opcode::PModSqr,
        Opcode::PModSub,
        Opcode::CModMul,
        Opcode::PMul,
        Opcode::MemCpy,
        Opcode::MemCpyR,
    ];

    pub fn from_byte(b: u8) -> Result<Self, DeviceError> {
        Opcode::ALL
            .into_iter()
            .find(|op| *op as u8 == b)
            .ok_or(DeviceError::IllegalOpcode(b))
    }

    pub fn mnemonic(self) -> &'static str {
        match self {
            Opcode::Ntt => "NTT",
            Opcode::Intt => "INTT",
            Opcode::PModAdd => "PMODADD",
            Opcode::PModMul => "PMODMUL",
            Opcode::PModSqr => "PMODSQR",
            Opcode::PModSub => "PMODSUB",
            Opcode::CModMul => "CMODMUL",
            Opcode::PMul => "PMUL",
            Opcode::MemCpy => "MEMCPY",
            Opcode::MemCpyR => "MEMCPYR",
        }
    }

    pub fn from_mnemonic(s: &str) -> Option<Self> {
        Opcode::ALL
            .into_iter()
            .find(|op| op.mnemonic().eq_ignore_ascii_case(s))
    }

    /// Position in [`Opcode::ALL`]; also the FHECTL2 trigger bit.
    pub fn index(self) -> usize {
        Opcode::ALL.iter().position(|&o| o == self).unwrap()
    }

    pub fn engine(self) -> Engine {
        match self {
            Opcode::MemCpy | Opcode::MemCpyR => Engine::Dma,
            _ => Engine::Compute,
        }
    }
}

impl fmt::Display for Opcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.mnemonic())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Engine {
    Compute,
    Dma,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Engine::Compute => f.write_str("compute"),
            Engine::Dma => f.write_str("dma"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConstSource {
    /// The CMODCONST register.
    Register,
    /// INV_POLYDEG, for the `n^-1` scaling case.
    InvPolyDeg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TransformArgs {
    pub x: Operand,
    pub t: Operand,
    pub w: Operand,
    pub out: Operand,
    pub log_n: u8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BinaryArgs {
    pub x: Operand,
    pub y: Operand,
    pub out: Operand,
    pub log_n: u8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct UnaryArgs {
    pub x: Operand,
    pub out: Operand,
    pub log_n: u8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CopyArgs {
    pub src: Operand,
    pub dst: Operand,
    pub len: u16,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Command {
    Ntt(TransformArgs),
    Intt(TransformArgs),
    PModAdd(BinaryArgs),
    PModMul(BinaryArgs),
    PModSqr(UnaryArgs),
    PModSub(BinaryArgs),
    CModMul(UnaryArgs, ConstSource),
    PMul(BinaryArgs),
    MemCpy(CopyArgs),
    MemCpyR(CopyArgs),
}

impl TransformArgs {
    pub fn n(&self) -> usize {
        1 << self.log_n
    }

    /// Where a forward transform ends without a copy: `log n` ping-pong
    /// writes starting with `t`.
    pub fn forward_result(&self) -> Operand {
        if self.log_n % 2 == 1 {
            self.t
        } else {
            self.x
        }
    }

    /// The inverse adds a scaling pass, so one more write than forward.
    pub fn inverse_result(&self) -> Operand {
        if self.log_n % 2 == 1 {
            self.x
        } else {
            self.t
        }
    }
}

impl Command {
    pub fn opcode(&self) -> Opcode {
        match self {
            Command::Ntt(_) => Opcode::Ntt,
            Command::Intt(_) => Opcode::Intt,
            Command::PModAdd(_) => Opcode::PModAdd,
            Command::PModMul(_) => Opcode::PModMul,
            Command::PModSqr(_) => Opcode::PModSqr,
            Command::PModSub(_) => Opcode::PModSub,
            Command::CModMul(..) => Opcode::CModMul,
            Command::PMul(_) => Opcode::PMul,
            Command::MemCpy(_) => Opcode::MemCpy,
            Command::MemCpyR(_) => Opcode::MemCpyR,
        }
    }

    pub fn engine(&self) -> Engine {
        self.opcode().engine()
    }

    /// Transform size for compute commands, copy length for DMA.
    pub fn len(&self) -> usize {
        match self {
            Command::Ntt(a) | Command::Intt(a) => a.n(),
            Command::PModAdd(a) | Command::PModMul(a) | Command::PModSub(a) | Command::PMul(a) => {
                1 << a.log_n
            }
            Command::PModSqr(a) | Command::CModMul(a, _) => 1 << a.log_n,
            Command::MemCpy(a) | Command::MemCpyR(a) => a.len as usize,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn encode(&self) -> [u32; COMMAND_WORDS] {
        let z = Operand::default();
        let (a, b, c, d, log_n, flags, len) = match *self {
            Command::Ntt(t) | Command::Intt(t) => (t.x, t.t, t.w, t.out, t.log_n, 0, None),
            Command::PModAdd(p) | Command::PModMul(p) | Command::PModSub(p) | Command::PMul(p) => {
                (p.x, p.y, p.out, z, p.log_n, 0, None)
            }
            Command::PModSqr(u) => (u.x, z, u.out, z, u.log_n, 0, None),
            Command::CModMul(u, src) => {
                let flags = if src == ConstSource::InvPolyDeg {
                    FLAG_INV_POLYDEG
                } else {
                    0
                };
                (u.x, z, u.out, z, u.log_n, flags, None)
            }
            Command::MemCpy(m) | Command::MemCpyR(m) => (m.src, m.dst, z, z, 0, 0, Some(m.len)),
        };
        let w0 = (self.opcode() as u32) << 24
            | (a.bank as u32) << 20
            | (b.bank as u32) << 16
            | (c.bank as u32) << 12
            | (d.bank as u32) << 8
            | (log_n as u32) << 4
            | flags;
        let w1 = a.offset as u32 | (b.offset as u32) << 16;
        let w2 = match len {
            Some(len) => len as u32,
            None => c.offset as u32 | (d.offset as u32) << 16,
        };
        [w0, w1, w2]
    }

    pub fn decode(words: &[u32]) -> Result<Command, DeviceError> {
        let [w0, w1, w2]: [u32; COMMAND_WORDS] = words.try_into().map_err(|_| {
            DeviceError::malformed(format!(
                "expected {COMMAND_WORDS} words, got {}",
                words.len()
            ))
        })?;
        let opcode = Opcode::from_byte((w0 >> 24) as u8)?;
        let bank = |shift: u32| ((w0 >> shift) & 0xF) as u8;
        let lo = |w: u32| (w & 0xFFFF) as u16;
        let hi = |w: u32| (w >> 16) as u16;
        let a = Operand::new(bank(20), lo(w1));
        let b = Operand::new(bank(16), hi(w1));
        let c = Operand::new(bank(12), lo(w2));
        let d = Operand::new(bank(8), hi(w2));
        let log_n = ((w0 >> 4) & 0xF) as u8;
        let flags = w0 & 0xF;
        let unused = |ops: &[Operand]| -> Result<(), DeviceError> {
            if ops.iter().any(|o| *o != Operand::default()) {
                return Err(DeviceError::malformed(format!(
                    "{opcode}: unused operand fields must be zero"
                )));
            }
            Ok(())
        };
        if flags != 0 && opcode != Opcode::CModMul || flags & !FLAG_INV_POLYDEG != 0 {
            return Err(DeviceError::malformed(format!(
                "{opcode}: unsupported flags {flags:#x}"
            )));
        }
        let cmd = match opcode {
            Opcode::Ntt | Opcode::Intt => {
                let t = TransformArgs {
                    x: a,
                    t: b,
                    w: c,
                    out: d,
                    log_n,
                };
                if opcode == Opcode::Ntt {
                    Command::Ntt(t)
                } else {
                    Command::Intt(t)
                }
            }
            Opcode::PModAdd | Opcode::PModMul | Opcode::PModSub | Opcode::PMul => {
                unused(&[d])?;
                let p = BinaryArgs {
                    x: a,
                    y: b,
                    out: c,
                    log_n,
                };
                match opcode {
                    Opcode::PModAdd => Command::PModAdd(p),
                    Opcode::PModMul => Command::PModMul(p),
                    Opcode::PModSub => Command::PModSub(p),
                    _ => Command::PMul(p),
                }
            }
            Opcode::PModSqr | Opcode::CModMul => {
                unused(&[b, d])?;
                let u = UnaryArgs {
                    x: a,
                    out: c,
                    log_n,
                };
                if opcode == Opcode::PModSqr {
                    Command::PModSqr(u)
                } else {
                    let src = if flags & FLAG_INV_POLYDEG != 0 {
                        ConstSource::InvPolyDeg
                    } else {
                        ConstSource::Register
                    };
                    Command::CModMul(u, src)
                }
            }
            Opcode::MemCpy | Opcode::MemCpyR => {
                if bank(12) != 0 || bank(8) != 0 || hi(w2) != 0 || log_n != 0 {
                    return Err(DeviceError::malformed(format!(
                        "{opcode}: unused operand fields must be zero"
                    )));
                }
                let m = CopyArgs {
                    src: a,
                    dst: b,
                    len: lo(w2),
                };
                if opcode == Opcode::MemCpy {
                    Command::MemCpy(m)
                } else {
                    Command::MemCpyR(m)
                }
            }
        };
        cmd.validate()?;
        Ok(cmd)
    }

    /// Operands that this command reads, writes, or both, with their lengths.
    pub fn operands(&self) -> Vec<(&'static str, Operand, usize)> {
        let n = self.len();
        match *self {
            Command::Ntt(t) | Command::Intt(t) => vec![
                ("x", t.x, n),
                ("t", t.t, n),
                ("w", t.w, n),
                ("out", t.out, n),
            ],
            Command::PModAdd(p) | Command::PModMul(p) | Command::PModSub(p) | Command::PMul(p) => {
                vec![("x", p.x, n), ("y", p.y, n), ("out", p.out, n)]
            }
            Command::PModSqr(u) | Command::CModMul(u, _) => vec![("x", u.x, n), ("out", u.out, n)],
            Command::MemCpy(m) | Command::MemCpyR(m) => vec![("src", m.src, n), ("dst", m.dst, n)],
        }
    }

    /// Static checks that do not depend on device state.
    pub fn validate(&self) -> Result<(), DeviceError> {
        let op = self.opcode();
        match self {
            Command::MemCpy(m) | Command::MemCpyR(m) => {
                if m.len == 0 {
                    return Err(DeviceError::malformed(format!("{op}: zero length")));
                }
                if op == Opcode::MemCpyR && !m.len.is_power_of_two() {
                    return Err(DeviceError::malformed(format!(
                        "{op}: length {} is not a power of two",
                        m.len
                    )));
                }
            }
            _ => {
                let log_n = self.len().trailing_zeros() as u8;
                if !(MIN_LOG_N..=MAX_LOG_N).contains(&log_n) {
                    return Err(DeviceError::malformed(format!(
                        "{op}: log2 n = {log_n} outside {MIN_LOG_N}..={MAX_LOG_N}"
                    )));
                }
            }
        }
        for (name, o, len) in self.operands() {
            if o.bank as usize >= NUM_BANKS || o.offset as usize >= BANK_WORDS {
                return Err(DeviceError::malformed(format!(
                    "{op}: operand {name} names bank {} offset {}",
                    o.bank, o.offset
                )));
            }
            if !o.region(len).fits() {
                return Err(DeviceError::malformed(format!(
                    "{op}: operand {name} runs past the end of memory"
                )));
            }
        }
        let regions: Vec<(&str, Region)> = self
            .operands()
            .into_iter()
            .map(|(n, o, l)| (n, o.region(l)))
            .collect();
        let same_or_disjoint = |a: &str, b: &str| -> Result<(), DeviceError> {
            let ra = regions.iter().find(|r| r.0 == a).unwrap().1;
            let rb = regions.iter().find(|r| r.0 == b).unwrap().1;
            if ra != rb && ra.overlaps(&rb) {
                return Err(DeviceError::malformed(format!(
                    "{op}: operands {a} and {b} partially overlap"
                )));
            }
            Ok(())
        };
        match self {
            Command::Ntt(_) | Command::Intt(_) => {
                for (a, b) in [("x", "t"), ("x", "w"), ("t", "w"), ("out", "w")] {
                    let ra = regions.iter().find(|r| r.0 == a).unwrap().1;
                    let rb = regions.iter().find(|r| r.0 == b).unwrap().1;
                    if ra.overlaps(&rb) {
                        return Err(DeviceError::malformed(format!(
                            "{op}: operands {a} and {b} overlap"
                        )));
                    }
                }
                let out = regions[3].1;
                if out != regions[0].1
                    && out != regions[1].1
                    && (out.overlaps(&regions[0].1) || out.overlaps(&regions[1].1))
                {
                    return Err(DeviceError::malformed(format!(
                        "{op}: out partially overlaps x or t"
                    )));
                }
            }
            Command::MemCpy(_) | Command::MemCpyR(_) => {
                if regions[0].1.overlaps(&regions[1].1) {
                    return Err(DeviceError::malformed(format!(
                        "{op}: source and destination overlap"
                    )));
                }
            }
            Command::PModSqr(_) | Command::CModMul(..) => same_or_disjoint("x", "out")?,
            _ => {
                same_or_disjoint("x", "out")?;
                same_or_disjoint("y", "out")?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.opcode())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn sample(op: Opcode, log_n: u8) -> Command {
        let o = Operand::new;
        let t = TransformArgs {
            x: o(0, 0),
            t: o(1, 0),
            w: o(7, 0),
            out: o(1, 0),
            log_n,
        };
        let p = BinaryArgs {
            x: o(0, 16),
            y: o(1, 0),
            out: o(3, 4),
            log_n,
        };
        let u = UnaryArgs {
            x: o(2, 0),
            out: o(2, 0),
            log_n,
        };
        let m = CopyArgs {
            src: o(3, 5),
            dst: o(6, 9),
            len: 1 << log_n,
        };
        match op {
            Opcode::Ntt => Command::Ntt(t),
            Opcode::Intt => Command::Intt(t),
            Opcode::PModAdd => Command::PModAdd(p),
            Opcode::PModMul => Command::PModMul(p),
            Opcode::PModSqr => Command::PModSqr(u),
            Opcode::PModSub => Command::PModSub(p),
            Opcode::CModMul => Command::CModMul(u, ConstSource::InvPolyDeg),
            Opcode::PMul => Command::PMul(p),
            Opcode::MemCpy => Command::MemCpy(m),
            Opcode::MemCpyR => Command::MemCpyR(m),
        }
    }

    #[test]
    fn roundtrip_every_opcode() {
        let mut headers = std::collections::HashSet::new();
        for op in Opcode::ALL {
            let cmd = sample(op, 5);
            let words = cmd.encode();
            assert_eq!(Command::decode(&words).unwrap(), cmd, "{op}");
            assert!(headers.insert(words[0] >> 24), "{op} shares an opcode byte");
            assert_eq!(Opcode::from_mnemonic(op.mnemonic()), Some(op));
        }
        assert_eq!(headers.len(), 10);
    }

    #[test]
    fn pmodadd_example() {
        let cmd = Command::PModAdd(BinaryArgs {
            x: Operand::bank(0),
            y: Operand::bank(1),
            out: Operand::bank(3),
            log_n: 12,
        });
        let w = cmd.encode();
        assert_eq!(w[0], 0x0301_30C0);
        assert_eq!(Command::decode(&w).unwrap(), cmd);
    }

    #[test]
    fn rejects_bad_encodings() {
        assert_eq!(
            Command::decode(&[0xFF00_0000, 0, 0]),
            Err(DeviceError::IllegalOpcode(0xFF))
        );
        assert_eq!(
            Command::decode(&[0, 0, 0]),
            Err(DeviceError::IllegalOpcode(0))
        );
        assert!(Command::decode(&[0x0301_30C0, 0]).is_err());
        // bank 9
        assert!(Command::decode(&[0x0391_30C0, 0, 0]).is_err());
        // log n = 15
        assert!(Command::decode(&[0x0301_30F0, 0, 0]).is_err());
        // nonzero unused D
        assert!(Command::decode(&[0x0301_31C0, 0, 0]).is_err());
        // flags on PMODADD
        assert!(Command::decode(&[0x0301_30C1, 0, 0]).is_err());
        // offset past the bank
        assert!(Command::decode(&[0x0301_30C0, 8192, 0]).is_err());
        // 2^14 from bank 7 runs off the end
        assert!(Command::decode(&[0x0371_30E0, 0, 0]).is_err());
        // MEMCPYR length 6
        assert!(Command::decode(&[0x0A01_0000, 0, 6]).is_err());
        // overlapping copy
        assert!(Command::decode(&[0x0900_0000, 4 << 16, 8]).is_err());
        // x and t overlap
        assert!(Command::decode(&[0x0100_7040, 0, 0]).is_err());
    }

    #[test]
    fn ping_pong_parity() {
        let t = TransformArgs {
            x: Operand::bank(0),
            t: Operand::bank(1),
            w: Operand::bank(7),
            out: Operand::bank(0),
            log_n: 13,
        };
        assert_eq!(t.forward_result(), t.t);
        assert_eq!(t.inverse_result(), t.x);
        let t = TransformArgs { log_n: 12, ..t };
        assert_eq!(t.forward_result(), t.x);
        assert_eq!(t.inverse_result(), t.t);
    }
}
