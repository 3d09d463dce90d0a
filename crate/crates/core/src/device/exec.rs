//! Functional execution and port accounting for a single command.
//!
//! A command is planned against the memory and registers at dispatch time.
//! The plan carries its cost, its bank footprint and the words it will
//! write; the scheduler commits the writes when the command completes.

use super::command::{BinaryArgs, Command, ConstSource, CopyArgs, TransformArgs, UnaryArgs};
use super::cycle::{CommandCost, CycleModel, MAX_II};
use super::memory::{Memory, Operand, PortKind, Region, NUM_BANKS};
use super::regs::{self, ConfigRegisters};
use super::DeviceError;
use crate::modmath::{BarrettConstant, BarrettContext};
use crate::polyring::{
    bit_reverse_index, ct_butterfly, forward_index, gs_butterfly, inverse_index,
};
use crate::Coefficient;

/// Banks a command touches and how hard it drives each one.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Footprint {
    pub reads: Vec<Region>,
    pub writes: Vec<Region>,
    /// Peak accesses per cycle on each bank.
    pub load: [u32; NUM_BANKS],
}

impl Footprint {
    /// True when the two commands touch overlapping words and at least one writes.
    pub fn hazards(&self, other: &Footprint) -> bool {
        let hit =
            |ws: &[Region], rs: &[Region]| ws.iter().any(|w| rs.iter().any(|r| w.overlaps(r)));
        hit(&self.writes, &other.reads)
            || hit(&self.writes, &other.writes)
            || hit(&other.writes, &self.reads)
    }

    /// True when running both together stays within every bank's ports.
    pub fn fits_with(&self, other: &Footprint) -> bool {
        (0..NUM_BANKS).all(|b| self.load[b] + other.load[b] <= PortKind::of_bank(b).ports())
    }

    fn merge_phase(&mut self, phase: &Phase) {
        for b in 0..NUM_BANKS {
            self.load[b] = self.load[b].max(phase.load[b]);
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub(crate) struct Effects {
    pub butterflies: u64,
    pub ntt: u64,
    pub intt: u64,
}

#[derive(Clone, Debug)]
pub(crate) struct Plan {
    pub cost: CommandCost,
    pub footprint: Footprint,
    pub writes: Vec<(usize, Vec<Coefficient>)>,
    pub effects: Effects,
}

/// Per-bank accesses of one pipelined phase.
struct Phase {
    ii: u32,
    load: [u32; NUM_BANKS],
}

fn phase(op: &str, accesses: &[(Region, u32)]) -> Result<Phase, DeviceError> {
    let mut acc = [0u32; NUM_BANKS];
    for (region, count) in accesses {
        for b in region.banks() {
            acc[b] += count;
        }
    }
    let ii = (0..NUM_BANKS)
        .map(|b| acc[b].div_ceil(PortKind::of_bank(b).ports()))
        .max()
        .unwrap_or(1)
        .max(1);
    if ii > MAX_II {
        let b = (0..NUM_BANKS)
            .find(|&b| acc[b].div_ceil(PortKind::of_bank(b).ports()) == ii)
            .unwrap();
        return Err(DeviceError::BankConflict(format!(
            "{op}: bank {b} ({:?}-port) needs {} accesses per issue, II would be {ii}",
            PortKind::of_bank(b),
            acc[b]
        )));
    }
    let mut load = [0u32; NUM_BANKS];
    for b in 0..NUM_BANKS {
        load[b] = acc[b].div_ceil(ii);
    }
    Ok(Phase { ii, load })
}

fn barrett(regs: &ConfigRegisters) -> Result<BarrettContext<Coefficient>, DeviceError> {
    let q = regs.get_u128(regs::Q)?;
    let k = regs.get(regs::BARRETTCTL1)?;
    let mu = BarrettConstant::from_register_words(regs.get_words::<5>(regs::BARRETTCTL2)?);
    BarrettContext::from_parts(q, k, mu)
        .map_err(|e| DeviceError::Config(format!("Q/BARRETTCTL: {e}")))
}

fn read_reduced(
    mem: &Memory,
    at: Operand,
    len: usize,
    q: Coefficient,
) -> Result<Vec<Coefficient>, DeviceError> {
    let words = mem.read(at.region(len))?;
    if let Some(i) = words.iter().position(|&w| w >= q) {
        return Err(DeviceError::OperandOutOfRange {
            addr: at.byte_address() + 16 * i as u32,
            value: words[i],
            modulus: q,
        });
    }
    Ok(words)
}

fn reg_constant(
    regs: &ConfigRegisters,
    offset: u32,
    q: Coefficient,
) -> Result<Coefficient, DeviceError> {
    let c = regs.get_u128(offset)?;
    if c >= q {
        return Err(DeviceError::Config(format!(
            "constant register {:#05x} holds {c}, not below q = {q}",
            offset
        )));
    }
    Ok(c)
}

pub(crate) fn plan(
    cmd: &Command,
    mem: &Memory,
    regs: &ConfigRegisters,
    model: &CycleModel,
) -> Result<Plan, DeviceError> {
    cmd.validate()?;
    let mut plan = match cmd {
        Command::Ntt(t) => transform(cmd, t, false, mem, regs, model)?,
        Command::Intt(t) => transform(cmd, t, true, mem, regs, model)?,
        Command::PModAdd(p) | Command::PModMul(p) | Command::PModSub(p) | Command::PMul(p) => {
            binary(cmd, p, mem, regs, model)?
        }
        Command::PModSqr(u) => unary(cmd, u, None, mem, regs, model)?,
        Command::CModMul(u, src) => unary(cmd, u, Some(*src), mem, regs, model)?,
        Command::MemCpy(m) => copy(cmd, m, false, mem, model)?,
        Command::MemCpyR(m) => copy(cmd, m, true, mem, model)?,
    };
    plan.cost.dispatch = model.dispatch_latency;
    Ok(plan)
}

fn transform(
    cmd: &Command,
    args: &TransformArgs,
    inverse: bool,
    mem: &Memory,
    regs: &ConfigRegisters,
    model: &CycleModel,
) -> Result<Plan, DeviceError> {
    let op = cmd.opcode().mnemonic();
    let n = args.n();
    let log_n = args.log_n as u32;
    let ctx = barrett(regs)?;
    let q = ctx.modulus();
    let rx = args.x.region(n);
    let rt = args.t.region(n);
    let rw = args.w.region(n);
    let rout = args.out.region(n);

    let stages = phase(op, &[(rx, 2), (rt, 2), (rw, 1)])?;
    let mut footprint = Footprint {
        reads: vec![rx, rw],
        writes: vec![rx, rt],
        load: [0; NUM_BANKS],
    };
    footprint.merge_phase(&stages);
    let mut cost = CommandCost {
        ii: stages.ii,
        butterfly_issue: CycleModel::butterfly_issue(n, stages.ii),
        ..Default::default()
    };
    cost.issue = cost.butterfly_issue;
    cost.overhead = log_n as u64 * model.stage_overhead + model.mul_latency;

    let input = read_reduced(mem, args.x, n, q)?;
    let tw = read_reduced(mem, args.w, n, q)?;

    // bufs[0] is x, bufs[1] is t; stage s reads bufs[s % 2] and writes the other.
    let mut bufs = [input, vec![0; n]];
    let mut src = 0;
    let mut half = if inverse { n / 2 } else { 1 };
    for s in 0..log_n {
        let (lo, hi) = bufs.split_at_mut(1);
        let (from, to) = if src == 0 {
            (&lo[0], &mut hi[0])
        } else {
            (&hi[0], &mut lo[0])
        };
        for block in (0..n).step_by(2 * half) {
            for j in 0..half {
                let (i0, i1) = (block + j, block + j + half);
                let (u, v) = if inverse {
                    gs_butterfly(from[i0], from[i1], tw[inverse_index(half, j)], &ctx)
                } else if s == 0 {
                    let (r0, r1) = (bit_reverse_index(i0, log_n), bit_reverse_index(i1, log_n));
                    ct_butterfly(from[r0], from[r1], tw[forward_index(half, j)], &ctx)
                } else {
                    ct_butterfly(from[i0], from[i1], tw[forward_index(half, j)], &ctx)
                };
                to[i0] = u;
                to[i1] = v;
            }
        }
        src ^= 1;
        half = if inverse { half / 2 } else { half * 2 };
    }

    if inverse {
        let n_inv = reg_constant(regs, regs::INV_POLYDEG, q)?;
        let deg = regs.get_u128(regs::N)?;
        if deg != n as u128 {
            return Err(DeviceError::Config(format!(
                "{op}: N register holds {deg}, command degree is {n}"
            )));
        }
        let last = if src == 0 { rx } else { rt };
        let other = if src == 0 { rt } else { rx };
        let scale = phase(op, &[(last, 1), (other, 1)])?;
        footprint.merge_phase(&scale);
        cost.issue += n as u64 * scale.ii as u64;
        cost.overhead += model.mul_latency;
        let (lo, hi) = bufs.split_at_mut(1);
        let (from, to) = if src == 0 {
            (&lo[0], &mut hi[0])
        } else {
            (&hi[0], &mut lo[0])
        };
        for i in 0..n {
            to[i] = ctx.mul(from[bit_reverse_index(i, log_n)], n_inv);
        }
        src ^= 1;
    }

    let result = if src == 0 { rx } else { rt };
    let mut writes = vec![(rx.start, bufs[0].clone()), (rt.start, bufs[1].clone())];
    if rout != result {
        let copy = phase(op, &[(result, 1), (rout, 1)])?;
        footprint.merge_phase(&copy);
        footprint.writes.push(rout);
        cost.issue += n as u64 * copy.ii as u64;
        cost.overhead += model.add_sub_latency;
        writes.push((rout.start, bufs[src].clone()));
    }

    let effects = Effects {
        butterflies: (n as u64 / 2) * log_n as u64,
        ntt: !inverse as u64,
        intt: inverse as u64,
    };
    Ok(Plan {
        cost,
        footprint,
        writes,
        effects,
    })
}

fn pointwise_plan(
    op: &str,
    inputs: &[Region],
    out: Region,
    multiply: bool,
    model: &CycleModel,
) -> Result<(CommandCost, Footprint), DeviceError> {
    let mut accesses: Vec<(Region, u32)> = inputs.iter().map(|r| (*r, 1)).collect();
    accesses.push((out, 1));
    let p = phase(op, &accesses)?;
    let mut footprint = Footprint {
        reads: inputs.to_vec(),
        writes: vec![out],
        load: [0; NUM_BANKS],
    };
    footprint.merge_phase(&p);
    let n = out.len;
    let cost = CommandCost {
        ii: p.ii,
        issue: n as u64 * p.ii as u64,
        overhead: model.pointwise_cycles(n, p.ii, multiply) - n as u64 * p.ii as u64,
        ..Default::default()
    };
    Ok((cost, footprint))
}

fn binary(
    cmd: &Command,
    args: &BinaryArgs,
    mem: &Memory,
    regs: &ConfigRegisters,
    model: &CycleModel,
) -> Result<Plan, DeviceError> {
    let n = cmd.len();
    let multiply = !matches!(cmd, Command::PModAdd(_) | Command::PModSub(_));
    let (rx, ry, rout) = (args.x.region(n), args.y.region(n), args.out.region(n));
    let (cost, footprint) =
        pointwise_plan(cmd.opcode().mnemonic(), &[rx, ry], rout, multiply, model)?;
    let out: Vec<Coefficient> = if let Command::PMul(_) = cmd {
        let x = mem.read(rx)?;
        let y = mem.read(ry)?;
        x.iter().zip(&y).map(|(a, b)| a.wrapping_mul(*b)).collect()
    } else {
        let ctx = barrett(regs)?;
        let q = ctx.modulus();
        let x = read_reduced(mem, args.x, n, q)?;
        let y = read_reduced(mem, args.y, n, q)?;
        let f = |a: Coefficient, b: Coefficient| match cmd {
            Command::PModAdd(_) => ctx.add(a, b),
            Command::PModSub(_) => ctx.sub(a, b),
            _ => ctx.mul(a, b),
        };
        x.iter().zip(&y).map(|(&a, &b)| f(a, b)).collect()
    };
    Ok(Plan {
        cost,
        footprint,
        writes: vec![(rout.start, out)],
        effects: Effects::default(),
    })
}

fn unary(
    cmd: &Command,
    args: &UnaryArgs,
    constant: Option<ConstSource>,
    mem: &Memory,
    regs: &ConfigRegisters,
    model: &CycleModel,
) -> Result<Plan, DeviceError> {
    let n = cmd.len();
    let (rx, rout) = (args.x.region(n), args.out.region(n));
    let (cost, footprint) = pointwise_plan(cmd.opcode().mnemonic(), &[rx], rout, true, model)?;
    let ctx = barrett(regs)?;
    let q = ctx.modulus();
    let x = read_reduced(mem, args.x, n, q)?;
    let out = match constant {
        None => x.iter().map(|&a| ctx.mul(a, a)).collect(),
        Some(src) => {
            let offset = match src {
                ConstSource::Register => regs::CMODCONST,
                ConstSource::InvPolyDeg => regs::INV_POLYDEG,
            };
            let c = reg_constant(regs, offset, q)?;
            x.iter().map(|&a| ctx.mul(a, c)).collect()
        }
    };
    Ok(Plan {
        cost,
        footprint,
        writes: vec![(rout.start, out)],
        effects: Effects::default(),
    })
}

fn copy(
    cmd: &Command,
    args: &CopyArgs,
    reversed: bool,
    mem: &Memory,
    model: &CycleModel,
) -> Result<Plan, DeviceError> {
    let len = args.len as usize;
    let (rs, rd) = (args.src.region(len), args.dst.region(len));
    let p = phase(cmd.opcode().mnemonic(), &[(rs, 1), (rd, 1)])?;
    let mut footprint = Footprint {
        reads: vec![rs],
        writes: vec![rd],
        load: [0; NUM_BANKS],
    };
    footprint.merge_phase(&p);
    let cost = CommandCost {
        ii: p.ii,
        issue: model.memcpy_cycles(len, p.ii),
        ..Default::default()
    };
    let src = mem.read(rs)?;
    let out = if reversed {
        let log = len.trailing_zeros();
        let mut out = vec![0; len];
        for (j, w) in src.into_iter().enumerate() {
            out[bit_reverse_index(j, log)] = w;
        }
        out
    } else {
        src
    };
    Ok(Plan {
        cost,
        footprint,
        writes: vec![(rd.start, out)],
        effects: Effects::default(),
    })
}
