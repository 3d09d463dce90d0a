//! Configuration register file at `0x4002_0000..=0x4002_FFFF`.
//!
//! Offsets are byte offsets into the window. Registers wider than 32 bits
//! occupy consecutive word offsets, least significant word first.

use std::collections::BTreeMap;

use super::DeviceError;
use crate::Coefficient;

pub const REG_BASE: u32 = 0x4002_0000;
pub const REG_WINDOW: u32 = 0x1_0000;

/// Value returned by SIGNATURE after reset.
pub const CHIP_SIGNATURE: u32 = 0xC0FE_E001;

pub const SIGNATURE: u32 = 0x000;
pub const Q: u32 = 0x010;
pub const N: u32 = 0x020;
pub const INV_POLYDEG: u32 = 0x030;
pub const BARRETTCTL1: u32 = 0x040;
pub const BARRETTCTL2: u32 = 0x044;
pub const FHECTL1: u32 = 0x060;
pub const FHECTL2: u32 = 0x064;
pub const FHECTL3: u32 = 0x068;
pub const PLLCTL: u32 = 0x06C;
pub const COMMANDFIFO: u32 = 0x070;
pub const DBG_REG: u32 = 0x074;
pub const STATUS: u32 = 0x078;
pub const CMODCONST: u32 = 0x080;
pub const DIRECT_CMD: u32 = 0x090;
pub const PAD_CTL_BASE: u32 = 0x100;
pub const PAD_CTL_COUNT: u32 = 12;

/// FHECTL1 bit 0: commands are taken from the FIFO when set.
pub const FHECTL1_FIFO_MODE: u32 = 1 << 0;

pub const STATUS_DRAIN_IRQ: u32 = 1 << 0;
pub const STATUS_COMPUTE_BUSY: u32 = 1 << 1;
pub const STATUS_DMA_BUSY: u32 = 1 << 2;
pub const STATUS_DIRECT_PENDING: u32 = 1 << 3;
pub const STATUS_DEPTH_SHIFT: u32 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Access {
    ReadWrite,
    ReadOnly,
    /// Writes have side effects; the stored value is not kept.
    Action,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RegisterDef {
    pub name: &'static str,
    pub offset: u32,
    pub bits: u32,
    pub access: Access,
    pub description: &'static str,
}

impl RegisterDef {
    pub fn words(&self) -> u32 {
        self.bits.div_ceil(32)
    }

    pub fn contains(&self, offset: u32) -> bool {
        offset >= self.offset && offset < self.offset + 4 * self.words()
    }
}

const fn reg(
    name: &'static str,
    offset: u32,
    bits: u32,
    access: Access,
    description: &'static str,
) -> RegisterDef {
    RegisterDef {
        name,
        offset,
        bits,
        access,
        description,
    }
}

pub const REGISTERS: &[RegisterDef] = &[
    reg("SIGNATURE", SIGNATURE, 32, Access::ReadOnly, "chip id"),
    reg("Q", Q, 128, Access::ReadWrite, "coefficient modulus"),
    reg("N", N, 128, Access::ReadWrite, "polynomial degree"),
    reg(
        "INV_POLYDEG",
        INV_POLYDEG,
        128,
        Access::ReadWrite,
        "n^-1 mod q",
    ),
    reg(
        "BARRETTCTL1",
        BARRETTCTL1,
        32,
        Access::ReadWrite,
        "Barrett shift k",
    ),
    reg(
        "BARRETTCTL2",
        BARRETTCTL2,
        160,
        Access::ReadWrite,
        "Barrett constant floor(2^k / q)",
    ),
    reg(
        "FHECTL1",
        FHECTL1,
        32,
        Access::ReadWrite,
        "bit 0: fifo mode",
    ),
    reg(
        "FHECTL2",
        FHECTL2,
        32,
        Access::Action,
        "bit i: issue DIRECT_CMD as opcode index i",
    ),
    reg("FHECTL3", FHECTL3, 32, Access::ReadWrite, "inert"),
    reg("PLLCTL", PLLCTL, 32, Access::ReadWrite, "inert"),
    reg(
        "COMMANDFIFO",
        COMMANDFIFO,
        32,
        Access::Action,
        "write: push command word; read: queued commands",
    ),
    reg("DBG_REG", DBG_REG, 32, Access::ReadWrite, "scratch"),
    reg(
        "STATUS",
        STATUS,
        32,
        Access::ReadOnly,
        "bit 0 drain irq (w1c), 1 compute busy, 2 dma busy, 3 direct pending, 15:8 depth",
    ),
    reg(
        "CMODCONST",
        CMODCONST,
        128,
        Access::ReadWrite,
        "CMODMUL constant",
    ),
    reg(
        "DIRECT_CMD",
        DIRECT_CMD,
        96,
        Access::ReadWrite,
        "command words for direct issue",
    ),
    reg("UARTM_TX_PAD", PAD_CTL_BASE, 32, Access::ReadWrite, "inert"),
    reg(
        "UARTM_RX_PAD",
        PAD_CTL_BASE + 0x04,
        32,
        Access::ReadWrite,
        "inert",
    ),
    reg(
        "UARTS_TX_PAD",
        PAD_CTL_BASE + 0x08,
        32,
        Access::ReadWrite,
        "inert",
    ),
    reg(
        "UARTS_RX_PAD",
        PAD_CTL_BASE + 0x0C,
        32,
        Access::ReadWrite,
        "inert",
    ),
    reg(
        "SPI_CLK_PAD",
        PAD_CTL_BASE + 0x10,
        32,
        Access::ReadWrite,
        "inert",
    ),
    reg(
        "SPI_CS_PAD",
        PAD_CTL_BASE + 0x14,
        32,
        Access::ReadWrite,
        "inert",
    ),
    reg(
        "SPI_MOSI_PAD",
        PAD_CTL_BASE + 0x18,
        32,
        Access::ReadWrite,
        "inert",
    ),
    reg(
        "SPI_MISO_PAD",
        PAD_CTL_BASE + 0x1C,
        32,
        Access::ReadWrite,
        "inert",
    ),
    reg(
        "UARTM_CTL",
        PAD_CTL_BASE + 0x20,
        32,
        Access::ReadWrite,
        "inert",
    ),
    reg(
        "UARTS_CTL",
        PAD_CTL_BASE + 0x24,
        32,
        Access::ReadWrite,
        "inert",
    ),
    reg(
        "SPI_CTL",
        PAD_CTL_BASE + 0x28,
        32,
        Access::ReadWrite,
        "inert",
    ),
    reg(
        "GPIO_CTL",
        PAD_CTL_BASE + 0x2C,
        32,
        Access::ReadWrite,
        "inert",
    ),
];

pub fn lookup(offset: u32) -> Option<&'static RegisterDef> {
    if !offset.is_multiple_of(4) {
        return None;
    }
    REGISTERS.iter().find(|r| r.contains(offset))
}

pub fn by_name(name: &str) -> Option<&'static RegisterDef> {
    REGISTERS.iter().find(|r| r.name.eq_ignore_ascii_case(name))
}

/// Plain storage for every mapped word. Side effects live in the device.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigRegisters {
    words: BTreeMap<u32, u32>,
}

impl Default for ConfigRegisters {
    fn default() -> Self {
        let mut words = BTreeMap::new();
        for r in REGISTERS {
            for i in 0..r.words() {
                words.insert(r.offset + 4 * i, 0);
            }
        }
        words.insert(SIGNATURE, CHIP_SIGNATURE);
        ConfigRegisters { words }
    }
}

impl ConfigRegisters {
    pub fn get(&self, offset: u32) -> Result<u32, DeviceError> {
        self.words
            .get(&offset)
            .copied()
            .ok_or(DeviceError::UnmappedRegister { offset })
    }

    pub(crate) fn set(&mut self, offset: u32, value: u32) -> Result<(), DeviceError> {
        match self.words.get_mut(&offset) {
            Some(w) => {
                *w = value;
                Ok(())
            }
            None => Err(DeviceError::UnmappedRegister { offset }),
        }
    }

    pub fn get_u128(&self, offset: u32) -> Result<Coefficient, DeviceError> {
        let mut v: u128 = 0;
        for i in (0..4).rev() {
            v = (v << 32) | self.get(offset + 4 * i)? as u128;
        }
        Ok(v)
    }

    #[cfg(test)]
    pub(crate) fn set_u128(&mut self, offset: u32, value: Coefficient) -> Result<(), DeviceError> {
        for i in 0..4 {
            self.set(offset + 4 * i, (value >> (32 * i)) as u32)?;
        }
        Ok(())
    }

    pub fn get_words<const K: usize>(&self, offset: u32) -> Result<[u32; K], DeviceError> {
        let mut out = [0; K];
        for (i, w) in out.iter_mut().enumerate() {
            *w = self.get(offset + 4 * i as u32)?;
        }
        Ok(out)
    }

    pub(crate) fn entries(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.words.iter().map(|(&k, &v)| (k, v))
    }
}
