//! Cycle-approximate model of the co-processor.
//!
//! Two engines share eight memory banks: a compute engine for transforms
//! and pointwise ops, and a DMA engine for copies. Commands arrive either
//! through the 32-deep FIFO or one at a time through FHECTL2. FIFO commands
//! dispatch strictly in order; the head waits while its engine is busy, its
//! banks conflict with the other engine's command, or the two together
//! would exceed a bank's ports. Writes land when a command completes.

pub mod command;
pub mod cycle;
mod exec;
pub mod fifo;
pub mod memory;
pub mod program;
pub mod regs;
mod snapshot;

pub use command::{
    BinaryArgs, Command, ConstSource, CopyArgs, Engine, Opcode, TransformArgs, UnaryArgs,
};
pub use cycle::{CommandCost, CycleModel};
pub use exec::Footprint;
pub use fifo::{CommandFifo, FIFO_DEPTH};
pub use memory::{Memory, MemoryBank, Operand, PortKind, Region, BANK_WORDS, NUM_BANKS};
pub use program::{ct_mul_program, run_ct_mul_program, CtMulProgram};
pub use regs::ConfigRegisters;
pub use snapshot::{SNAPSHOT_MAGIC, SNAPSHOT_VERSION};

use thiserror::Error;

use crate::{Coefficient, Params};
use exec::Plan;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeviceError {
    #[error("no register at offset {offset:#06x}")]
    UnmappedRegister { offset: u32 },
    #[error("register {0} is read-only")]
    ReadOnlyRegister(&'static str),
    #[error("command fifo is full ({FIFO_DEPTH} commands)")]
    FifoFull,
    #[error("illegal opcode {0:#04x}")]
    IllegalOpcode(u8),
    #[error("malformed command: {0}")]
    MalformedCommand(String),
    #[error("bank misconfiguration: {0}")]
    BankConflict(String),
    #[error("device not configured: {0}")]
    Config(String),
    #[error("word {value} at {addr:#010x} is not reduced modulo {modulus}")]
    OperandOutOfRange {
        addr: u32,
        value: Coefficient,
        modulus: Coefficient,
    },
    #[error("address {addr:#010x} is outside data memory")]
    AddressOutOfRange { addr: u32 },
    #[error("a direct command is already pending")]
    Busy,
    #[error("snapshot: {0}")]
    Snapshot(String),
}

impl DeviceError {
    pub(crate) fn malformed(msg: impl Into<String>) -> Self {
        DeviceError::MalformedCommand(msg.into())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DeviceStats {
    pub butterflies: u64,
    pub ntt_invocations: u64,
    pub intt_invocations: u64,
    pub commands_completed: u64,
    pub compute_busy_cycles: u64,
    pub dma_busy_cycles: u64,
    /// Highest number of accesses in one cycle seen on each bank.
    pub peak_port_load: [u32; NUM_BANKS],
    pub drain_interrupts: u64,
    /// Times the FIFO head waited on the other engine.
    pub stalls: u64,
}

/// One executed command, for reports.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommandRecord {
    pub seq: u64,
    pub command: Command,
    pub engine: Engine,
    pub direct: bool,
    pub start: u64,
    pub end: u64,
    pub cost: CommandCost,
}

#[derive(Clone, Debug)]
struct InFlight {
    plan: Plan,
    end: u64,
    direct: bool,
}

#[derive(Clone, Debug)]
pub struct Device {
    regs: ConfigRegisters,
    memory: Memory,
    fifo: CommandFifo,
    model: CycleModel,
    cycle: u64,
    compute: Option<InFlight>,
    dma: Option<InFlight>,
    direct: Option<Command>,
    /// FIFO work has been seen since the last drain interrupt.
    fifo_active: bool,
    irq: bool,
    stats: DeviceStats,
    log: Vec<CommandRecord>,
}

impl Default for Device {
    fn default() -> Self {
        Device::new(CycleModel::default()).expect("default cycle model is valid")
    }
}

impl Device {
    pub fn new(model: CycleModel) -> Result<Self, DeviceError> {
        model.validate()?;
        let mut regs = ConfigRegisters::default();
        regs.set(regs::FHECTL1, regs::FHECTL1_FIFO_MODE)?;
        Ok(Device {
            regs,
            memory: Memory::default(),
            fifo: CommandFifo::default(),
            model,
            cycle: 0,
            compute: None,
            dma: None,
            direct: None,
            fifo_active: false,
            irq: false,
            stats: DeviceStats::default(),
            log: Vec::new(),
        })
    }

    pub fn model(&self) -> &CycleModel {
        &self.model
    }

    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    pub fn stats(&self) -> &DeviceStats {
        &self.stats
    }

    pub fn reset_stats(&mut self) {
        self.stats = DeviceStats::default();
        self.log.clear();
    }

    pub fn log(&self) -> &[CommandRecord] {
        &self.log
    }

    pub fn memory(&self) -> &Memory {
        &self.memory
    }

    pub fn registers(&self) -> &ConfigRegisters {
        &self.regs
    }

    pub fn fifo(&self) -> &CommandFifo {
        &self.fifo
    }

    pub fn irq_pending(&self) -> bool {
        self.irq
    }

    pub fn busy(&self, engine: Engine) -> bool {
        match engine {
            Engine::Compute => self.compute.is_some(),
            Engine::Dma => self.dma.is_some(),
        }
    }

    /// Nothing in flight and nothing that could dispatch.
    pub fn is_idle(&self) -> bool {
        self.compute.is_none()
            && self.dma.is_none()
            && self.direct.is_none()
            && (self.fifo.is_empty() || !self.fifo_enabled())
    }

    fn fifo_enabled(&self) -> bool {
        self.regs.get(regs::FHECTL1).unwrap_or(0) & regs::FHECTL1_FIFO_MODE != 0
    }

    pub fn reg_read(&self, offset: u32) -> Result<u32, DeviceError> {
        regs::lookup(offset).ok_or(DeviceError::UnmappedRegister { offset })?;
        match offset {
            regs::STATUS => Ok(self.status()),
            regs::COMMANDFIFO => Ok(self.fifo.len() as u32),
            regs::FHECTL2 => Ok(0),
            _ => self.regs.get(offset),
        }
    }

    fn status(&self) -> u32 {
        let mut s = (self.fifo.len() as u32) << regs::STATUS_DEPTH_SHIFT;
        if self.irq {
            s |= regs::STATUS_DRAIN_IRQ;
        }
        if self.compute.is_some() {
            s |= regs::STATUS_COMPUTE_BUSY;
        }
        if self.dma.is_some() {
            s |= regs::STATUS_DMA_BUSY;
        }
        if self.direct.is_some() {
            s |= regs::STATUS_DIRECT_PENDING;
        }
        s
    }

    pub fn reg_write(&mut self, offset: u32, value: u32) -> Result<(), DeviceError> {
        let def = regs::lookup(offset).ok_or(DeviceError::UnmappedRegister { offset })?;
        match offset {
            regs::SIGNATURE => Err(DeviceError::ReadOnlyRegister(def.name)),
            regs::STATUS => {
                if value & regs::STATUS_DRAIN_IRQ != 0 {
                    self.irq = false;
                }
                Ok(())
            }
            regs::FHECTL2 => self.trigger(value),
            regs::COMMANDFIFO => {
                if self.fifo.push_word(value)?.is_some() {
                    self.fifo_active = true;
                }
                Ok(())
            }
            _ => self.regs.set(offset, value),
        }
    }

    fn trigger(&mut self, value: u32) -> Result<(), DeviceError> {
        if value == 0 {
            return Ok(());
        }
        let index = value.trailing_zeros() as usize;
        if !value.is_power_of_two() || index >= Opcode::ALL.len() {
            return Err(DeviceError::malformed(format!(
                "FHECTL2 trigger {value:#x} is not a single opcode bit"
            )));
        }
        if self.direct.is_some() || self.direct_in_flight() {
            return Err(DeviceError::Busy);
        }
        let mut words = self.regs.get_words::<3>(regs::DIRECT_CMD)?;
        words[0] = (words[0] & 0x00FF_FFFF) | (Opcode::ALL[index] as u32) << 24;
        self.direct = Some(Command::decode(&words)?);
        Ok(())
    }

    fn direct_in_flight(&self) -> bool {
        [&self.compute, &self.dma]
            .iter()
            .any(|s| s.as_ref().is_some_and(|f| f.direct))
    }

    pub fn reg_write_u128(&mut self, offset: u32, value: Coefficient) -> Result<(), DeviceError> {
        for i in 0..4 {
            self.reg_write(offset + 4 * i, (value >> (32 * i)) as u32)?;
        }
        Ok(())
    }

    pub fn reg_read_u128(&self, offset: u32) -> Result<Coefficient, DeviceError> {
        self.regs.get_u128(offset)
    }

    /// Loads Q, N, INV_POLYDEG and the Barrett registers for `params`.
    pub fn configure(&mut self, params: &Params) -> Result<(), DeviceError> {
        let ctx = params.ctx();
        self.reg_write_u128(regs::Q, params.q)?;
        self.reg_write_u128(regs::N, params.n as u128)?;
        self.reg_write_u128(regs::INV_POLYDEG, params.n_inv)?;
        self.reg_write(regs::BARRETTCTL1, ctx.shift())?;
        for (i, w) in ctx.constant().to_register_words().into_iter().enumerate() {
            self.reg_write(regs::BARRETTCTL2 + 4 * i as u32, w)?;
        }
        Ok(())
    }

    pub fn set_constant(&mut self, c: Coefficient) -> Result<(), DeviceError> {
        self.reg_write_u128(regs::CMODCONST, c)
    }

    /// Host-side write into data memory; not timed.
    pub fn load(&mut self, at: Operand, data: &[Coefficient]) -> Result<(), DeviceError> {
        self.memory.write(at.word_index(), data)
    }

    pub fn read(&self, at: Operand, len: usize) -> Result<Vec<Coefficient>, DeviceError> {
        self.memory.read(at.region(len))
    }

    pub fn push_command(&mut self, cmd: &Command) -> Result<(), DeviceError> {
        for w in cmd.encode() {
            self.reg_write(regs::COMMANDFIFO, w)?;
        }
        Ok(())
    }

    /// Writes DIRECT_CMD and sets the opcode's FHECTL2 trigger bit.
    pub fn issue_direct(&mut self, cmd: &Command) -> Result<(), DeviceError> {
        for (i, w) in cmd.encode().into_iter().enumerate() {
            self.reg_write(regs::DIRECT_CMD + 4 * i as u32, w)?;
        }
        self.reg_write(regs::FHECTL2, 1 << cmd.opcode().index())
    }

    /// Retires finished commands, dispatches what can start, then advances
    /// to the next completion. Returns the cycles advanced.
    pub fn step(&mut self) -> Result<u64, DeviceError> {
        self.retire();
        self.dispatch()?;
        if self.fifo_active && self.fifo.is_empty() && self.compute.is_none() && self.dma.is_none()
        {
            self.fifo_active = false;
            self.irq = true;
            self.stats.drain_interrupts += 1;
        }
        let next = [&self.compute, &self.dma]
            .iter()
            .filter_map(|s| s.as_ref().map(|f| f.end))
            .min();
        match next {
            Some(end) => {
                let advanced = end - self.cycle;
                self.cycle = end;
                Ok(advanced)
            }
            None => Ok(0),
        }
    }

    pub fn run_until_idle(&mut self) -> Result<u64, DeviceError> {
        let start = self.cycle;
        loop {
            let advanced = self.step()?;
            if advanced == 0 && self.compute.is_none() && self.dma.is_none() {
                return Ok(self.cycle - start);
            }
        }
    }

    /// Issues `cmd` directly and runs it to completion.
    pub fn execute(&mut self, cmd: &Command) -> Result<u64, DeviceError> {
        self.issue_direct(cmd)?;
        self.run_until_idle()
    }

    fn retire(&mut self) {
        for engine in [Engine::Compute, Engine::Dma] {
            let slot = match engine {
                Engine::Compute => &mut self.compute,
                Engine::Dma => &mut self.dma,
            };
            if slot.as_ref().is_some_and(|f| f.end <= self.cycle) {
                let done = slot.take().unwrap();
                for (at, data) in &done.plan.writes {
                    self.memory
                        .write(*at, data)
                        .expect("planned writes are in range");
                }
                let e = &done.plan.effects;
                self.stats.butterflies += e.butterflies;
                self.stats.ntt_invocations += e.ntt;
                self.stats.intt_invocations += e.intt;
                self.stats.commands_completed += 1;
            }
        }
    }

    fn dispatch(&mut self) -> Result<(), DeviceError> {
        if let Some(cmd) = self.direct {
            if self.compute.is_none() && self.dma.is_none() {
                self.direct = None;
                let plan = exec::plan(&cmd, &self.memory, &self.regs, &self.model)?;
                self.start(cmd, plan, true);
            }
            return Ok(());
        }
        if self.direct_in_flight() || !self.fifo_enabled() {
            return Ok(());
        }
        while let Some(cmd) = self.fifo.front().copied() {
            let (mine, other) = match cmd.engine() {
                Engine::Compute => (&self.compute, &self.dma),
                Engine::Dma => (&self.dma, &self.compute),
            };
            if mine.is_some() {
                break;
            }
            let plan = match exec::plan(&cmd, &self.memory, &self.regs, &self.model) {
                Ok(p) => p,
                Err(e) => {
                    self.fifo.pop();
                    return Err(e);
                }
            };
            if let Some(o) = other {
                let f = &o.plan.footprint;
                if f.hazards(&plan.footprint) || !f.fits_with(&plan.footprint) {
                    self.stats.stalls += 1;
                    break;
                }
            }
            self.fifo.pop();
            self.start(cmd, plan, false);
        }
        Ok(())
    }

    fn start(&mut self, cmd: Command, plan: Plan, direct: bool) {
        let total = plan.cost.total();
        let engine = cmd.engine();
        self.log.push(CommandRecord {
            seq: self.log.len() as u64,
            command: cmd,
            engine,
            direct,
            start: self.cycle,
            end: self.cycle + total,
            cost: plan.cost,
        });
        match engine {
            Engine::Compute => self.stats.compute_busy_cycles += total,
            Engine::Dma => self.stats.dma_busy_cycles += total,
        }
        let flight = InFlight {
            plan,
            end: self.cycle + total,
            direct,
        };
        match engine {
            Engine::Compute => self.compute = Some(flight),
            Engine::Dma => self.dma = Some(flight),
        }
        for b in 0..NUM_BANKS {
            let load: u32 = [&self.compute, &self.dma]
                .iter()
                .filter_map(|s| s.as_ref().map(|f| f.plan.footprint.load[b]))
                .sum();
            assert!(
                load <= PortKind::of_bank(b).ports(),
                "bank {b} oversubscribed"
            );
            self.stats.peak_port_load[b] = self.stats.peak_port_load[b].max(load);
        }
    }
}

#[cfg(test)]
mod tests;
