//! Per-command cycle reports, CSV output and summaries.

use std::io;

use fheaccel_core::device::CommandRecord;
use serde::Serialize;

/// One executed command.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommandRow {
    pub run: String,
    pub seq: u64,
    pub mnemonic: String,
    pub engine: String,
    pub direct: bool,
    pub start: u64,
    pub end: u64,
    pub cycles: u64,
    pub ii: u32,
    pub butterfly_issue: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub title: String,
    pub clock_hz: u64,
    pub rows: Vec<CommandRow>,
    /// Elapsed cycles summed over runs. Overlapped commands count once.
    pub total_cycles: u64,
    pub reference_ms: Option<f64>,
}

impl BenchReport {
    pub fn new(title: impl Into<String>, clock_hz: u64) -> Self {
        BenchReport {
            title: title.into(),
            clock_hz,
            rows: Vec::new(),
            total_cycles: 0,
            reference_ms: None,
        }
    }

    pub fn with_reference(mut self, ms: f64) -> Self {
        self.reference_ms = Some(ms);
        self
    }

    /// Appends the records of one run that took `elapsed` cycles.
    pub fn add_run(&mut self, label: &str, log: &[CommandRecord], elapsed: u64) {
        self.total_cycles += elapsed;
        self.rows.extend(log.iter().map(|r| CommandRow {
            run: label.to_string(),
            seq: r.seq,
            mnemonic: r.command.opcode().mnemonic().to_string(),
            engine: r.engine.to_string(),
            direct: r.direct,
            start: r.start,
            end: r.end,
            cycles: r.end - r.start,
            ii: r.cost.ii,
            butterfly_issue: r.cost.butterfly_issue,
        }));
    }

    pub fn seconds(&self) -> f64 {
        self.total_cycles as f64 / self.clock_hz as f64
    }

    pub fn millis(&self) -> f64 {
        self.seconds() * 1e3
    }

    /// Signed relative difference from the reference, in percent.
    pub fn delta_percent(&self) -> Option<f64> {
        self.reference_ms.map(|r| (self.millis() - r) / r * 100.0)
    }

    pub fn within(&self, tolerance: f64) -> Option<bool> {
        self.delta_percent().map(|d| d.abs() <= tolerance * 100.0)
    }

    /// Sum of per-command busy cycles, as if nothing overlapped.
    pub fn serial_cycles(&self) -> u64 {
        self.rows.iter().map(|r| r.cycles).sum()
    }

    pub fn write_csv<W: io::Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for row in &self.rows {
            out.serialize(row)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "{}: {} cycles ({} serial) = {:.4} ms at {} MHz",
            self.title,
            self.total_cycles,
            self.serial_cycles(),
            self.millis(),
            self.clock_hz as f64 / 1e6
        );
        if let (Some(r), Some(d)) = (self.reference_ms, self.delta_percent()) {
            s.push_str(&format!(", reference {r} ms, delta {d:+.2}%"));
        }
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "title": self.title,
            "clock_hz": self.clock_hz,
            "commands": self.rows.len(),
            "total_cycles": self.total_cycles,
            "serial_cycles": self.serial_cycles(),
            "millis": self.millis(),
            "reference_ms": self.reference_ms,
            "delta_percent": self.delta_percent(),
        })
    }
}
