//! Versioned binary snapshot of an idle device.
//!
//! Layout, all integers little-endian:
//! magic (8 bytes), version u32, cycle u64, flags u8 (bit 0 irq, bit 1 fifo
//! active), register count u32 then (offset u32, value u32) pairs, bank
//! count u32 then per bank a word count u32 and 16-byte words, queued
//! command count u32 then 3 words each, partial word count u32 then words.

use super::command::{Command, COMMAND_WORDS};
use super::fifo::CommandFifo;
use super::memory::{BANK_WORDS, NUM_BANKS};
use super::{CycleModel, Device, DeviceError};

pub const SNAPSHOT_MAGIC: [u8; 8] = *b"FHEASNAP";
pub const SNAPSHOT_VERSION: u32 = 1;

struct Reader<'a> {
    bytes: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], DeviceError> {
        if self.bytes.len() < n {
            return Err(DeviceError::Snapshot("truncated".into()));
        }
        let (head, tail) = self.bytes.split_at(n);
        self.bytes = tail;
        Ok(head)
    }

    fn u8(&mut self) -> Result<u8, DeviceError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, DeviceError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, DeviceError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn u128(&mut self) -> Result<u128, DeviceError> {
        Ok(u128::from_le_bytes(self.take(16)?.try_into().unwrap()))
    }
}

impl Device {
    /// Serializes registers, memory and queued commands. Fails while a
    /// command is in flight or a direct command is pending.
    pub fn snapshot(&self) -> Result<Vec<u8>, DeviceError> {
        if self.compute.is_some() || self.dma.is_some() || self.direct.is_some() {
            return Err(DeviceError::Snapshot("device is busy".into()));
        }
        let mut out = Vec::with_capacity(NUM_BANKS * BANK_WORDS * 16 + 4096);
        out.extend_from_slice(&SNAPSHOT_MAGIC);
        out.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
        out.extend_from_slice(&self.cycle.to_le_bytes());
        out.push(self.irq as u8 | (self.fifo_active as u8) << 1);
        let regs: Vec<(u32, u32)> = self.regs.entries().collect();
        out.extend_from_slice(&(regs.len() as u32).to_le_bytes());
        for (k, v) in regs {
            out.extend_from_slice(&k.to_le_bytes());
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&(NUM_BANKS as u32).to_le_bytes());
        for bank in self.memory.banks() {
            out.extend_from_slice(&(bank.words.len() as u32).to_le_bytes());
            for w in &bank.words {
                out.extend_from_slice(&w.to_le_bytes());
            }
        }
        out.extend_from_slice(&(self.fifo.len() as u32).to_le_bytes());
        for cmd in self.fifo.commands() {
            for w in cmd.encode() {
                out.extend_from_slice(&w.to_le_bytes());
            }
        }
        let partial = self.fifo.partial_words();
        out.extend_from_slice(&(partial.len() as u32).to_le_bytes());
        for w in partial {
            out.extend_from_slice(&w.to_le_bytes());
        }
        Ok(out)
    }

    /// Rebuilds a device from [`Device::snapshot`] output. Statistics and
    /// the command log start empty.
    pub fn restore(bytes: &[u8], model: CycleModel) -> Result<Device, DeviceError> {
        let mut r = Reader { bytes };
        if r.take(8)? != SNAPSHOT_MAGIC {
            return Err(DeviceError::Snapshot("bad magic".into()));
        }
        let version = r.u32()?;
        if version != SNAPSHOT_VERSION {
            return Err(DeviceError::Snapshot(format!(
                "unsupported version {version}"
            )));
        }
        let mut dev = Device::new(model)?;
        dev.cycle = r.u64()?;
        let flags = r.u8()?;
        dev.irq = flags & 1 != 0;
        dev.fifo_active = flags & 2 != 0;
        for _ in 0..r.u32()? {
            let (k, v) = (r.u32()?, r.u32()?);
            dev.regs
                .set(k, v)
                .map_err(|_| DeviceError::Snapshot(format!("unknown register offset {k:#x}")))?;
        }
        if r.u32()? as usize != NUM_BANKS {
            return Err(DeviceError::Snapshot("bank count mismatch".into()));
        }
        for b in 0..NUM_BANKS {
            if r.u32()? as usize != BANK_WORDS {
                return Err(DeviceError::Snapshot("bank size mismatch".into()));
            }
            let words = dev.memory.bank_words_mut(b);
            for w in words.iter_mut() {
                *w = r.u128()?;
            }
        }
        let mut queue = Vec::new();
        for _ in 0..r.u32()? {
            let mut words = [0u32; COMMAND_WORDS];
            for w in &mut words {
                *w = r.u32()?;
            }
            queue.push(Command::decode(&words)?);
        }
        let mut partial = Vec::new();
        for _ in 0..r.u32()? {
            partial.push(r.u32()?);
        }
        if partial.len() >= COMMAND_WORDS || queue.len() > super::FIFO_DEPTH {
            return Err(DeviceError::Snapshot("inconsistent fifo".into()));
        }
        if !r.bytes.is_empty() {
            return Err(DeviceError::Snapshot("trailing bytes".into()));
        }
        dev.fifo = CommandFifo::restore(queue, partial);
        Ok(dev)
    }
}
