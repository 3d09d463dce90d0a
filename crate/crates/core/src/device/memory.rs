//! Data memory: eight 8192 x 128-bit SRAM banks.
//!
//! Banks 0-2 are dual-port, 3-7 single-port. Banks are mapped contiguously
//! from [`DATA_BASE`] at 128 KiB strides, so a region longer than one bank
//! (degree 2^14) continues into the next bank.

use std::ops::Range;

use super::DeviceError;
use crate::Coefficient;

pub const NUM_BANKS: usize = 8;
pub const BANK_WORDS: usize = 8192;
pub const DUAL_PORT_BANKS: usize = 3;
pub const TOTAL_WORDS: usize = NUM_BANKS * BANK_WORDS;
pub const WORD_BYTES: u32 = 16;
pub const DATA_BASE: u32 = 0x2000_0000;
pub const BANK_STRIDE: u32 = BANK_WORDS as u32 * WORD_BYTES;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PortKind {
    Dual,
    Single,
}

impl PortKind {
    pub fn ports(self) -> u32 {
        match self {
            PortKind::Dual => 2,
            PortKind::Single => 1,
        }
    }

    pub fn of_bank(bank: usize) -> PortKind {
        if bank < DUAL_PORT_BANKS {
            PortKind::Dual
        } else {
            PortKind::Single
        }
    }
}

/// A bank id plus a word offset within it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Operand {
    pub bank: u8,
    pub offset: u16,
}

impl Operand {
    pub const fn new(bank: u8, offset: u16) -> Self {
        Operand { bank, offset }
    }

    pub const fn bank(bank: u8) -> Self {
        Operand { bank, offset: 0 }
    }

    /// Global word index across all banks.
    pub fn word_index(self) -> usize {
        self.bank as usize * BANK_WORDS + self.offset as usize
    }

    pub fn byte_address(self) -> u32 {
        DATA_BASE + self.bank as u32 * BANK_STRIDE + self.offset as u32 * WORD_BYTES
    }

    pub fn from_byte_address(addr: u32) -> Result<Self, DeviceError> {
        let rel = addr
            .checked_sub(DATA_BASE)
            .filter(|r| r % WORD_BYTES == 0 && (*r as usize) < TOTAL_WORDS * WORD_BYTES as usize)
            .ok_or(DeviceError::AddressOutOfRange { addr })?;
        let word = (rel / WORD_BYTES) as usize;
        Ok(Operand::new(
            (word / BANK_WORDS) as u8,
            (word % BANK_WORDS) as u16,
        ))
    }

    pub fn region(self, len: usize) -> Region {
        Region {
            start: self.word_index(),
            len,
        }
    }
}

/// A contiguous run of words in the global address space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Region {
    pub start: usize,
    pub len: usize,
}

impl Region {
    pub fn end(&self) -> usize {
        self.start + self.len
    }

    pub fn range(&self) -> Range<usize> {
        self.start..self.end()
    }

    pub fn overlaps(&self, other: &Region) -> bool {
        self.start < other.end() && other.start < self.end()
    }

    pub fn banks(&self) -> Range<usize> {
        if self.len == 0 {
            return 0..0;
        }
        self.start / BANK_WORDS..(self.end() - 1) / BANK_WORDS + 1
    }

    pub fn fits(&self) -> bool {
        self.end() <= TOTAL_WORDS
    }

    /// Ports available to a region: the minimum over the banks it spans.
    pub fn ports(&self) -> u32 {
        self.banks()
            .map(|b| PortKind::of_bank(b).ports())
            .min()
            .unwrap_or(2)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MemoryBank {
    pub id: u8,
    pub kind: PortKind,
    pub words: Vec<Coefficient>,
}

impl MemoryBank {
    pub fn new(id: u8) -> Self {
        MemoryBank {
            id,
            kind: PortKind::of_bank(id as usize),
            words: vec![0; BANK_WORDS],
        }
    }

    pub fn base_address(&self) -> u32 {
        Operand::bank(self.id).byte_address()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Memory {
    banks: Vec<MemoryBank>,
}

impl Default for Memory {
    fn default() -> Self {
        Memory {
            banks: (0..NUM_BANKS as u8).map(MemoryBank::new).collect(),
        }
    }
}

impl Memory {
    pub fn banks(&self) -> &[MemoryBank] {
        &self.banks
    }

    pub fn bank(&self, id: usize) -> &MemoryBank {
        &self.banks[id]
    }

    pub fn read(&self, region: Region) -> Result<Vec<Coefficient>, DeviceError> {
        check_region(region)?;
        let mut out = Vec::with_capacity(region.len);
        let mut idx = region.start;
        while idx < region.end() {
            let bank = idx / BANK_WORDS;
            let off = idx % BANK_WORDS;
            let take = (BANK_WORDS - off).min(region.end() - idx);
            out.extend_from_slice(&self.banks[bank].words[off..off + take]);
            idx += take;
        }
        Ok(out)
    }

    pub fn write(&mut self, at: usize, data: &[Coefficient]) -> Result<(), DeviceError> {
        check_region(Region {
            start: at,
            len: data.len(),
        })?;
        for (i, &w) in data.iter().enumerate() {
            let idx = at + i;
            self.banks[idx / BANK_WORDS].words[idx % BANK_WORDS] = w;
        }
        Ok(())
    }

    pub(crate) fn bank_words_mut(&mut self, id: usize) -> &mut Vec<Coefficient> {
        &mut self.banks[id].words
    }
}

fn check_region(region: Region) -> Result<(), DeviceError> {
    if !region.fits() {
        return Err(DeviceError::AddressOutOfRange {
            addr: Operand::new(0, 0)
                .byte_address()
                .wrapping_add((region.end() as u32).wrapping_mul(WORD_BYTES)),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let m = Memory::default();
        assert_eq!(m.banks().len(), 8);
        let dual = m
            .banks()
            .iter()
            .filter(|b| b.kind == PortKind::Dual)
            .count();
        assert_eq!(dual, 3);
        let bytes: usize = m.banks().iter().map(|b| b.words.len() * 16).sum();
        assert_eq!(bytes, 1 << 20);
        assert_eq!(m.bank(3).base_address(), 0x2006_0000);
    }

    #[test]
    fn addresses_roundtrip() {
        let op = Operand::new(5, 77);
        assert_eq!(Operand::from_byte_address(op.byte_address()).unwrap(), op);
        assert!(Operand::from_byte_address(0x1000_0000).is_err());
        assert!(Operand::from_byte_address(DATA_BASE + 8).is_err());
        assert!(Operand::from_byte_address(DATA_BASE + (1 << 20)).is_err());
    }

    #[test]
    fn regions_span_banks() {
        let r = Operand::bank(3).region(16384);
        assert_eq!(r.banks(), 3..5);
        assert_eq!(r.ports(), 1);
        assert_eq!(Operand::bank(0).region(16).ports(), 2);
        assert_eq!(Operand::bank(2).region(8193).ports(), 1);
        assert!(!Operand::bank(7).region(8193).fits());
        assert!(r.overlaps(&Operand::new(4, 100).region(1)));
        assert!(!r.overlaps(&Operand::bank(5).region(1)));
    }

    #[test]
    fn cross_bank_read_write() {
        let mut m = Memory::default();
        let data: Vec<u128> = (0..10).collect();
        let at = Operand::new(1, 8190).word_index();
        m.write(at, &data).unwrap();
        assert_eq!(m.read(Region { start: at, len: 10 }).unwrap(), data);
        assert_eq!(m.bank(2).words[7], 9);
        assert!(m.write(TOTAL_WORDS - 1, &[1, 2]).is_err());
    }
}
