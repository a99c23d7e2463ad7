//! Versioned JSON run reports.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Serialize)]
pub struct Report<C: Serialize, R: Serialize> {
    pub schema: u32,
    pub command: &'static str,
    pub config: C,
    /// Arguments that reproduce this run exactly.
    pub replay: Vec<String>,
    pub results: R,
    pub worst_margin: Option<f64>,
    /// Bit pattern of `worst_margin`, for exact comparison between runs.
    pub worst_margin_bits: Option<String>,
    pub holds: bool,
    pub wall_time: f64,
}

impl<C: Serialize, R: Serialize> Report<C, R> {
    pub fn new(command: &'static str, config: C, replay: Vec<String>, results: R) -> Self {
        Self {
            schema: SCHEMA,
            command,
            config,
            replay,
            results,
            worst_margin: None,
            worst_margin_bits: None,
            holds: true,
            wall_time: 0.0,
        }
    }

    pub fn with_margin(mut self, worst: Option<f64>, holds: bool) -> Self {
        // non-finite margins (nothing evaluated) serialize as null
        self.worst_margin = worst.filter(|m| m.is_finite());
        self.worst_margin_bits = worst.map(|m| format!("{:#018x}", m.to_bits()));
        self.holds = holds;
        self
    }

    pub fn emit(&self, out: Option<&Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(self)? + "\n";
        match out {
            Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
            None => print_out(&text),
        }
    }
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
pub fn print_out(text: &str) -> Result<()> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}
