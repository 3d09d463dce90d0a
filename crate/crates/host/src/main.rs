use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use fheaccel_core::device::CycleModel;
use fheaccel_host::asm::{self, Program};
use fheaccel_host::bench::{self, BenchResult, CONFIGS};
use fheaccel_host::programs;
use fheaccel_host::report::BenchReport;
use fheaccel_host::runner::{self, Mode, RunOutcome};
use fheaccel_host::vectors::{gen_vectors, parse_ops, TestVectorSet, VectorOp};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "fheaccel",
    version,
    about = "Host tools for the polynomial-arithmetic accelerator model"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a deterministic test-vector file.
    GenVectors {
        #[command(flatten)]
        vec: VectorArgs,
        /// Output path; stdout if omitted.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Assemble a program and print its canonical text or encoded words.
    Asm {
        #[command(flatten)]
        src: ProgramArgs,
        /// Print the 3-word encoding of each command in hex instead.
        #[arg(long)]
        hex: bool,
    },
    /// Load, execute and verify a program against a vector set.
    Run {
        #[command(flatten)]
        src: ProgramArgs,
        /// Vector file; generated from --n/--min-bits/--seed if omitted.
        #[arg(long)]
        vectors: Option<PathBuf>,
        #[command(flatten)]
        vec: VectorArgs,
        #[arg(long, default_value = "fifo")]
        mode: Mode,
        /// Snapshot and restore the device after this many commands.
        #[arg(long)]
        snapshot_at: Option<usize>,
        /// Per-command CSV report path.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Time the ciphertext product against the reference figures.
    Bench {
        /// n4096x1, n8192x2 or all.
        #[arg(long, default_value = "all")]
        config: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Per-command CSV report path.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Quick end-to-end check of vectors, assembler, runner and benchmarks.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args)]
struct VectorArgs {
    /// Polynomial degree.
    #[arg(short, long, default_value_t = 4096)]
    n: usize,
    /// Exact bit width of the generated prime modulus.
    #[arg(long, default_value_t = 109)]
    min_bits: u32,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Comma-separated ops to compute expectations for.
    #[arg(long, default_value = "ntt,intt,add,sub,mul,sqr,cmul,pmul,bitrev")]
    ops: String,
}

impl VectorArgs {
    fn generate(&self) -> Result<TestVectorSet> {
        Ok(gen_vectors(
            self.n,
            self.min_bits,
            self.seed,
            &parse_ops(&self.ops)?,
        )?)
    }
}

#[derive(Args)]
struct ProgramArgs {
    /// Program source file.
    #[arg(long, conflicts_with = "builtin")]
    program: Option<PathBuf>,
    /// Built-in program: roundtrip, ct_mul or tour.
    #[arg(long)]
    builtin: Option<String>,
    /// Degree for built-in programs; defaults to --n.
    #[arg(long)]
    program_n: Option<usize>,
}

impl ProgramArgs {
    fn load(&self, default_n: usize) -> Result<Program> {
        let text = match (&self.program, &self.builtin) {
            (Some(path), _) => {
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
            }
            (None, Some(name)) => {
                let n = self.program_n.unwrap_or(default_n);
                if !n.is_power_of_two() {
                    bail!("program degree {n} is not a power of two");
                }
                programs::builtin(name, n.trailing_zeros() as u8)?
            }
            (None, None) => bail!("give --program FILE or --builtin NAME"),
        };
        Ok(asm::assemble(&text)?)
    }
}

/// Pass/fail plus a JSON summary for stdout.
struct Verdict {
    pass: bool,
    summary: serde_json::Value,
}

fn write_report(path: &Option<PathBuf>, report: &BenchReport) -> Result<()> {
    if let Some(p) = path {
        let f = fs::File::create(p).with_context(|| format!("creating {}", p.display()))?;
        report.write_csv(f)?;
    }
    Ok(())
}

fn run_summary(out: &RunOutcome) -> serde_json::Value {
    let first: Vec<String> = out
        .mismatches
        .iter()
        .take(16)
        .map(ToString::to_string)
        .collect();
    json!({
        "mode": out.mode.to_string(),
        "commands": out.log.len(),
        "cycles": out.cycles,
        "checks": out.checks,
        "mismatches": out.mismatches.len(),
        "first_mismatches": first,
        "butterflies": out.stats.butterflies,
        "drain_interrupts": out.stats.drain_interrupts,
    })
}

fn bench_summary(r: &BenchResult) -> serde_json::Value {
    let mut v = r.report.to_json();
    v["tower_cycles"] = json!(r.tower_cycles);
    v["moduli"] = json!(r.moduli.iter().map(u128::to_string).collect::<Vec<_>>());
    v["verified"] = json!(r.verified);
    v["pass"] = json!(r.passed());
    v
}

fn cmd_run(
    src: &ProgramArgs,
    vectors: &Option<PathBuf>,
    vec: &VectorArgs,
    mode: Mode,
    snapshot_at: Option<usize>,
    report_path: &Option<PathBuf>,
) -> Result<Verdict> {
    let set = match vectors {
        Some(p) => TestVectorSet::parse(
            &fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        )?,
        None => vec.generate()?,
    };
    let prog = src.load(set.n)?;
    let model = CycleModel::default();
    let out = match snapshot_at {
        Some(at) => runner::run_resumed(&prog, &set, mode, model, at)?,
        None => runner::run(&prog, &set, mode, model)?,
    };
    let mut report = BenchReport::new(format!("run ({mode})"), model.clock_hz);
    report.add_run(&mode.to_string(), &out.log, out.cycles);
    write_report(report_path, &report)?;
    eprintln!("{}", report.summary());
    Ok(Verdict {
        pass: out.passed(),
        summary: run_summary(&out),
    })
}

fn cmd_bench(config: &str, seed: u64, report_path: &Option<PathBuf>) -> Result<Verdict> {
    let configs: Vec<_> = match config {
        "all" => CONFIGS.to_vec(),
        name => {
            vec![bench::config(name).with_context(|| format!("unknown bench config `{name}`"))?]
        }
    };
    let mut all = BenchReport::new("bench", CycleModel::default().clock_hz);
    let mut results = Vec::new();
    let mut pass = true;
    for cfg in &configs {
        let r = bench::run_bench(cfg, seed, CycleModel::default())?;
        eprintln!("{}", r.report.summary());
        for row in &r.report.rows {
            let mut row = row.clone();
            row.run = format!("{}/{}", cfg.name, row.run);
            all.rows.push(row);
        }
        pass &= r.passed();
        results.push(bench_summary(&r));
    }
    write_report(report_path, &all)?;
    Ok(Verdict {
        pass,
        summary: json!({ "bench": results }),
    })
}

fn cmd_selftest(seed: u64) -> Result<Verdict> {
    let model = CycleModel::default();
    let mut checks = Vec::new();
    let mut pass = true;
    let mut record = |name: &str, ok: bool, detail: serde_json::Value| {
        eprintln!("{} {name}", if ok { "PASS" } else { "FAIL" });
        pass &= ok;
        checks.push(json!({ "name": name, "pass": ok, "detail": detail }));
    };

    let text_a = gen_vectors(4, 9, seed, &VectorOp::ALL)?.to_text();
    let text_b = gen_vectors(4, 9, seed, &VectorOp::ALL)?.to_text();
    record(
        "vectors deterministic",
        text_a == text_b,
        json!({ "bytes": text_a.len() }),
    );

    let tour_set = gen_vectors(256, 60, seed, &VectorOp::ALL)?;
    let tour = asm::assemble(&programs::opcode_tour(8))?;
    record(
        "assembler roundtrip",
        asm::assemble(&asm::disassemble(&tour))? == tour,
        json!(null),
    );
    let direct = runner::run(&tour, &tour_set, Mode::Direct, model)?;
    let fifo = runner::run(&tour, &tour_set, Mode::Fifo, model)?;
    record("opcode tour direct", direct.passed(), run_summary(&direct));
    record("opcode tour fifo", fifo.passed(), run_summary(&fifo));
    record(
        "direct and fifo agree",
        direct.device.memory() == fifo.device.memory() && fifo.cycles < direct.cycles,
        json!({ "direct_cycles": direct.cycles, "fifo_cycles": fifo.cycles }),
    );

    let ct_set = gen_vectors(256, 109, seed, &[VectorOp::CtMul])?;
    let ct = programs::ct_mul(8)?;
    let out = runner::run(&ct, &ct_set, Mode::Fifo, model)?;
    record("ct_mul program", out.passed(), run_summary(&out));
    let resumed = runner::run_resumed(&ct, &ct_set, Mode::Fifo, model, ct.commands.len() / 2)?;
    record("snapshot resume", resumed.passed(), run_summary(&resumed));

    for cfg in &CONFIGS {
        let r = bench::run_bench(cfg, seed, model)?;
        record(
            &format!("bench {}", cfg.name),
            r.passed(),
            bench_summary(&r),
        );
    }
    Ok(Verdict {
        pass,
        summary: json!({ "checks": checks }),
    })
}

fn dispatch(cli: Cli) -> Result<Verdict> {
    match cli.cmd {
        Cmd::GenVectors { vec, out } => {
            let text = vec.generate()?.to_text();
            match out {
                Some(p) => {
                    fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?
                }
                None => io::stdout().write_all(text.as_bytes())?,
            }
            Ok(Verdict {
                pass: true,
                summary: serde_json::Value::Null,
            })
        }
        Cmd::Asm { src, hex } => {
            let prog = src.load(4096)?;
            let mut stdout = io::stdout().lock();
            if hex {
                for (c, words) in prog.commands.iter().zip(asm::encode(&prog).chunks(3)) {
                    writeln!(
                        stdout,
                        "{:08x} {:08x} {:08x}  # {c}",
                        words[0], words[1], words[2]
                    )?;
                }
            } else {
                stdout.write_all(asm::disassemble(&prog).as_bytes())?;
            }
            Ok(Verdict {
                pass: true,
                summary: serde_json::Value::Null,
            })
        }
        Cmd::Run {
            src,
            vectors,
            vec,
            mode,
            snapshot_at,
            report,
        } => cmd_run(&src, &vectors, &vec, mode, snapshot_at, &report),
        Cmd::Bench {
            config,
            seed,
            report,
        } => cmd_bench(&config, seed, &report),
        Cmd::Selftest { seed } => cmd_selftest(seed),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(v) if v.summary.is_null() => ExitCode::SUCCESS,
        Ok(v) => {
            let status = if v.pass { "pass" } else { "fail" };
            println!("{}", json!({ "status": status, "result": v.summary }));
            if v.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            println!(
                "{}",
                json!({ "status": "error", "error": format!("{e:#}") })
            );
            ExitCode::from(2)
        }
    }
}
