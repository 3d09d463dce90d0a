use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::modmath::gen_ntt_prime;
use crate::polyring::{self, bit_reverse_index, Domain};
use crate::{Poly, Ring};

fn ring(log_n: u32) -> Ring {
    let n = 1usize << log_n;
    Ring::new(n, gen_ntt_prime::<u128>(n, 60).unwrap()).unwrap()
}

fn random(rng: &mut ChaCha8Rng, n: usize, q: u128) -> Vec<u128> {
    (0..n).map(|_| rng.gen_range(0..q)).collect()
}

fn device_for(r: &Ring) -> Device {
    let mut dev = Device::default();
    dev.configure(&r.params).unwrap();
    dev
}

fn transform(x: u8, t: u8, w: u8, out: u8, log_n: u8) -> TransformArgs {
    TransformArgs {
        x: Operand::bank(x),
        t: Operand::bank(t),
        w: Operand::bank(w),
        out: Operand::bank(out),
        log_n,
    }
}

#[test]
fn register_storage() {
    let mut dev = Device::default();
    assert_eq!(dev.reg_read(regs::SIGNATURE).unwrap(), regs::CHIP_SIGNATURE);
    assert_eq!(
        dev.reg_write(regs::SIGNATURE, 1),
        Err(DeviceError::ReadOnlyRegister("SIGNATURE"))
    );
    dev.reg_write(regs::DBG_REG, 0xDEAD_BEEF).unwrap();
    assert_eq!(dev.reg_read(regs::DBG_REG).unwrap(), 0xDEAD_BEEF);
    dev.reg_write(regs::PAD_CTL_BASE + 8, 7).unwrap();
    assert_eq!(dev.reg_read(regs::PAD_CTL_BASE + 8).unwrap(), 7);
    assert_eq!(
        dev.reg_write(0x0FF0, 1),
        Err(DeviceError::UnmappedRegister { offset: 0x0FF0 })
    );
    assert!(dev.reg_read(0x0002).is_err());
    dev.reg_write_u128(regs::CMODCONST, u128::MAX - 5).unwrap();
    assert_eq!(dev.reg_read_u128(regs::CMODCONST).unwrap(), u128::MAX - 5);
}

#[test]
fn fifo_full_on_33rd_push() {
    let mut dev = Device::default();
    let cmd = Command::MemCpy(CopyArgs {
        src: Operand::bank(3),
        dst: Operand::bank(4),
        len: 4,
    });
    for _ in 0..FIFO_DEPTH {
        dev.push_command(&cmd).unwrap();
    }
    assert_eq!(dev.reg_read(regs::COMMANDFIFO).unwrap(), 32);
    assert_eq!(dev.push_command(&cmd), Err(DeviceError::FifoFull));
    assert_eq!(
        dev.reg_read(regs::STATUS).unwrap() >> regs::STATUS_DEPTH_SHIFT & 0xFF,
        32
    );
}

#[test]
fn empty_run_is_free() {
    let mut dev = Device::default();
    assert_eq!(dev.run_until_idle().unwrap(), 0);
    assert_eq!(dev.stats().drain_interrupts, 0);
}

#[test]
fn pmodadd_matches_ring_and_cost() {
    let r = ring(12);
    let mut dev = device_for(&r);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (a, b) = (
        random(&mut rng, 4096, r.params.q),
        random(&mut rng, 4096, r.params.q),
    );
    dev.load(Operand::bank(0), &a).unwrap();
    dev.load(Operand::bank(1), &b).unwrap();
    let cmd = Command::PModAdd(BinaryArgs {
        x: Operand::bank(0),
        y: Operand::bank(1),
        out: Operand::bank(3),
        log_n: 12,
    });
    let cycles = dev.execute(&cmd).unwrap();
    let expect = polyring::pointwise_add(&Poly::new(a), &Poly::new(b), &r.params).unwrap();
    assert_eq!(dev.read(Operand::bank(3), 4096).unwrap(), expect.coeffs());
    assert_eq!(cycles, 4096 + 1 + 1);
}

#[test]
fn ntt_ping_pong_matches_ring() {
    for log_n in 2..=10u32 {
        let r = ring(log_n);
        let n = 1 << log_n;
        let mut dev = device_for(&r);
        let mut rng = ChaCha8Rng::seed_from_u64(log_n as u64);
        let x = random(&mut rng, n, r.params.q);
        dev.load(Operand::bank(0), &x).unwrap();
        dev.load(Operand::bank(7), r.twiddles.entries()).unwrap();
        let args = transform(0, 1, 7, 2, log_n as u8);
        dev.execute(&Command::Ntt(args)).unwrap();
        let expect = r.ntt(&Poly::new(x.clone())).unwrap();
        assert_eq!(
            dev.read(Operand::bank(2), n).unwrap(),
            expect.coeffs(),
            "n = {n}"
        );
        assert_eq!(dev.read(args.forward_result(), n).unwrap(), expect.coeffs());

        let back = transform(2, 3, 7, 4, log_n as u8);
        dev.execute(&Command::Intt(back)).unwrap();
        assert_eq!(dev.read(Operand::bank(4), n).unwrap(), x);
        let inv = r
            .intt(&Poly::with_domain(expect.into_coeffs(), Domain::Ntt))
            .unwrap();
        assert_eq!(inv.coeffs(), &x[..]);
        assert_eq!(dev.stats().butterflies, 2 * (n as u64 / 2) * log_n as u64);
    }
}

#[test]
fn ntt_cost_by_placement() {
    let r = ring(12);
    let mut dev = device_for(&r);
    dev.load(Operand::bank(7), r.twiddles.entries()).unwrap();
    let m = *dev.model();
    let args = transform(0, 1, 7, 0, 12);
    dev.execute(&Command::Ntt(args)).unwrap();
    let rec = dev.log().last().unwrap().cost;
    assert_eq!((rec.ii, rec.butterfly_issue), (1, 24576));
    assert_eq!(rec.total(), m.ntt_cycles(4096, 1) + m.dispatch_latency);

    let inv = TransformArgs {
        out: args.inverse_result(),
        ..args
    };
    dev.execute(&Command::Intt(inv)).unwrap();
    let rec = dev.log().last().unwrap().cost;
    assert_eq!(rec.issue, 28672);
    assert_eq!(rec.total(), m.intt_cycles(4096, 1, 1) + m.dispatch_latency);

    // Single-port operands halve the butterfly rate.
    dev.execute(&Command::Ntt(transform(3, 4, 7, 3, 12)))
        .unwrap();
    assert_eq!(dev.log().last().unwrap().cost.ii, 2);

    // Twiddles sharing a single-port bank with x would need II = 3.
    let bad = TransformArgs {
        w: Operand::new(3, 4096),
        ..transform(3, 4, 7, 3, 12)
    };
    assert!(matches!(
        dev.execute(&Command::Ntt(bad)),
        Err(DeviceError::BankConflict(_))
    ));
}

#[test]
fn largest_ring_runs_at_ii_two() {
    let n = 1 << 14;
    let r = Ring::new(n, gen_ntt_prime::<u128>(n, 40).unwrap()).unwrap();
    let mut dev = device_for(&r);
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let x = random(&mut rng, n, r.params.q);
    dev.load(Operand::bank(0), &x).unwrap();
    dev.load(Operand::bank(6), r.twiddles.entries()).unwrap();
    let args = transform(0, 2, 6, 4, 14);
    dev.execute(&Command::Ntt(args)).unwrap();
    let rec = dev.log().last().unwrap().cost;
    assert_eq!((rec.ii, rec.butterfly_issue), (2, 229376));
    assert_eq!(
        dev.read(Operand::bank(4), n).unwrap(),
        r.ntt(&Poly::new(x)).unwrap().coeffs()
    );
}

#[test]
fn pointwise_family() {
    let r = ring(6);
    let n = 64;
    let q = r.params.q;
    let mut dev = device_for(&r);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (a, b) = (random(&mut rng, n, q), random(&mut rng, n, q));
    let (pa, pb) = (Poly::new(a.clone()), Poly::new(b.clone()));
    dev.load(Operand::bank(0), &a).unwrap();
    dev.load(Operand::bank(1), &b).unwrap();
    let bin = BinaryArgs {
        x: Operand::bank(0),
        y: Operand::bank(1),
        out: Operand::bank(3),
        log_n: 6,
    };
    let un = UnaryArgs {
        x: Operand::bank(0),
        out: Operand::bank(3),
        log_n: 6,
    };
    let p = &r.params;
    let cases: Vec<(Command, Vec<u128>)> = vec![
        (
            Command::PModMul(bin),
            polyring::hadamard(&pa, &pb, p).unwrap().into_coeffs(),
        ),
        (
            Command::PModSub(bin),
            polyring::pointwise_sub(&pa, &pb, p).unwrap().into_coeffs(),
        ),
        (
            Command::PModSqr(un),
            polyring::pointwise_sqr(&pa, p).unwrap().into_coeffs(),
        ),
        (
            Command::CModMul(un, ConstSource::InvPolyDeg),
            polyring::const_mul(&pa, p.n_inv, p).unwrap().into_coeffs(),
        ),
        (
            Command::PMul(bin),
            polyring::pointwise_mul_wrapping(&pa, &pb, p)
                .unwrap()
                .into_coeffs(),
        ),
    ];
    for (cmd, expect) in cases {
        let cycles = dev.execute(&cmd).unwrap();
        assert_eq!(dev.read(Operand::bank(3), n).unwrap(), expect, "{cmd}");
        let fill = if cmd.opcode() == Opcode::PModSub {
            1
        } else {
            5
        };
        assert_eq!(cycles, n as u64 + fill + 1);
    }
    dev.set_constant(12345).unwrap();
    dev.execute(&Command::CModMul(un, ConstSource::Register))
        .unwrap();
    assert_eq!(
        dev.read(Operand::bank(3), n).unwrap(),
        polyring::const_mul(&pa, 12345, p).unwrap().into_coeffs()
    );
    let same = BinaryArgs {
        y: Operand::bank(0),
        ..bin
    };
    dev.execute(&Command::PModSub(same)).unwrap();
    assert!(dev
        .read(Operand::bank(3), n)
        .unwrap()
        .iter()
        .all(|&c| c == 0));
}

#[test]
fn unreduced_operand_rejected() {
    let r = ring(2);
    let mut dev = device_for(&r);
    dev.load(Operand::bank(0), &[0, 1, r.params.q, 2]).unwrap();
    let cmd = Command::PModSqr(UnaryArgs {
        x: Operand::bank(0),
        out: Operand::bank(3),
        log_n: 2,
    });
    assert!(matches!(
        dev.execute(&cmd),
        Err(DeviceError::OperandOutOfRange { .. })
    ));
    assert!(dev.is_idle());
}

#[test]
fn memcpy_and_reversed() {
    let mut dev = Device::default();
    let data: Vec<u128> = (100..108).collect();
    dev.load(Operand::new(3, 10), &data).unwrap();
    let m = CopyArgs {
        src: Operand::new(3, 10),
        dst: Operand::new(5, 0),
        len: 8,
    };
    assert_eq!(dev.execute(&Command::MemCpyR(m)).unwrap(), 8 + 1);
    let out = dev.read(Operand::new(5, 0), 8).unwrap();
    assert_eq!(out[6], 103);
    for (j, &w) in data.iter().enumerate() {
        assert_eq!(out[bit_reverse_index(j, 3)], w);
    }
    let back = CopyArgs {
        src: Operand::new(5, 0),
        dst: Operand::new(6, 0),
        len: 8,
    };
    dev.execute(&Command::MemCpyR(back)).unwrap();
    assert_eq!(dev.read(Operand::new(6, 0), 8).unwrap(), data);
    dev.execute(&Command::MemCpy(m)).unwrap();
    assert_eq!(dev.read(Operand::new(5, 0), 8).unwrap(), data);
}

#[test]
fn copy_overlaps_transform() {
    let r = ring(12);
    let mut dev = device_for(&r);
    dev.load(Operand::bank(7), r.twiddles.entries()).unwrap();
    let ntt = Command::Ntt(transform(0, 1, 7, 0, 12));
    let copy = Command::MemCpy(CopyArgs {
        src: Operand::bank(3),
        dst: Operand::bank(4),
        len: 4096,
    });
    dev.push_command(&ntt).unwrap();
    dev.push_command(&copy).unwrap();
    let total = dev.run_until_idle().unwrap();
    let m = *dev.model();
    let ntt_alone = m.ntt_cycles(4096, 1) + m.dispatch_latency;
    let copy_alone = 4096 + m.dispatch_latency;
    assert_eq!(total, ntt_alone.max(copy_alone));
    assert!(total < ntt_alone + copy_alone);
    assert_eq!(dev.stats().drain_interrupts, 1);
    assert!(dev.irq_pending());
    dev.reg_write(regs::STATUS, regs::STATUS_DRAIN_IRQ).unwrap();
    assert!(!dev.irq_pending());
}

#[test]
fn conflicting_copy_waits() {
    let r = ring(8);
    let mut dev = device_for(&r);
    dev.load(Operand::bank(7), r.twiddles.entries()).unwrap();
    dev.push_command(&Command::Ntt(transform(0, 1, 7, 0, 8)))
        .unwrap();
    // Reads the twiddle bank, which the transform keeps busy.
    dev.push_command(&Command::MemCpy(CopyArgs {
        src: Operand::bank(7),
        dst: Operand::bank(4),
        len: 256,
    }))
    .unwrap();
    let total = dev.run_until_idle().unwrap();
    let log = dev.log();
    assert_eq!(log[1].start, log[0].end);
    assert_eq!(total, log[0].cost.total() + log[1].cost.total());
    assert!(dev.stats().stalls > 0);
    assert!(dev.stats().peak_port_load[7] <= 1);
}

#[test]
fn direct_trigger_uses_opcode_bit() {
    let r = ring(3);
    let mut dev = device_for(&r);
    dev.load(Operand::bank(0), &[1, 2, 3, 4, 5, 6, 7, 8])
        .unwrap();
    let cmd = Command::PModSqr(UnaryArgs {
        x: Operand::bank(0),
        out: Operand::bank(4),
        log_n: 3,
    });
    let words = cmd.encode();
    for (i, w) in words.into_iter().enumerate() {
        dev.reg_write(
            regs::DIRECT_CMD + 4 * i as u32,
            w & if i == 0 { 0x00FF_FFFF } else { !0 },
        )
        .unwrap();
    }
    assert!(dev.reg_write(regs::FHECTL2, 0b11).is_err());
    dev.reg_write(regs::FHECTL2, 1 << Opcode::PModSqr.index())
        .unwrap();
    assert_eq!(
        dev.reg_write(regs::FHECTL2, 1 << Opcode::PModSqr.index()),
        Err(DeviceError::Busy)
    );
    assert_ne!(
        dev.reg_read(regs::STATUS).unwrap() & regs::STATUS_DIRECT_PENDING,
        0
    );
    dev.run_until_idle().unwrap();
    assert_eq!(
        dev.read(Operand::bank(4), 8).unwrap(),
        vec![1, 4, 9, 16, 25, 36, 49, 64]
    );
    assert_eq!(dev.stats().drain_interrupts, 0);
}

#[test]
fn ct_mul_program_matches_ring() {
    for log_n in [2u32, 3, 6, 9] {
        let r = ring(log_n);
        let n = 1 << log_n;
        let mut rng = ChaCha8Rng::seed_from_u64(40 + log_n as u64);
        let mut poly = || Poly::new(random(&mut rng, n, r.params.q));
        let ca = polyring::Ciphertext::new(poly(), poly()).unwrap();
        let cb = polyring::Ciphertext::new(poly(), poly()).unwrap();
        let mut dev = Device::default();
        let (got, _) = run_ct_mul_program(&mut dev, &ca, &cb, &r.params, &r.twiddles).unwrap();
        assert_eq!(got, r.ct_mul(&ca, &cb).unwrap(), "n = {n}");
        assert_eq!(
            (dev.stats().ntt_invocations, dev.stats().intt_invocations),
            (4, 3)
        );
    }
    assert!(ct_mul_program(14).is_err());
}

#[test]
fn snapshot_roundtrip() {
    let r = ring(4);
    let mut dev = device_for(&r);
    dev.load(Operand::new(5, 3), &[9, 8, 7]).unwrap();
    dev.reg_write(regs::DBG_REG, 77).unwrap();
    let cmd = Command::MemCpy(CopyArgs {
        src: Operand::new(5, 3),
        dst: Operand::bank(6),
        len: 3,
    });
    dev.execute(&cmd).unwrap();
    dev.push_command(&cmd).unwrap();
    let bytes = dev.snapshot().unwrap();
    assert_eq!(&bytes[..8], &SNAPSHOT_MAGIC);
    let mut back = Device::restore(&bytes, CycleModel::default()).unwrap();
    assert_eq!(back.memory(), dev.memory());
    assert_eq!(back.registers(), dev.registers());
    assert_eq!(back.cycle(), dev.cycle());
    assert_eq!(back.fifo().len(), 1);
    assert_eq!(
        back.run_until_idle().unwrap(),
        dev.run_until_idle().unwrap()
    );
    assert_eq!(back.memory(), dev.memory());

    let mut bad = bytes.clone();
    bad[8] = 9;
    assert!(Device::restore(&bad, CycleModel::default()).is_err());
    assert!(Device::restore(&bytes[..bytes.len() - 1], CycleModel::default()).is_err());
    dev.issue_direct(&cmd).unwrap();
    assert!(dev.snapshot().is_err());
}
