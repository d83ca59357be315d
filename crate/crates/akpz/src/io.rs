//! State files (`{"n": N, "levels": [[...], ...]}`) and the NDJSON event
//! trace of the continuous-time chain (one `{"t", "k", "m", "c"}` per line).

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use akpz_core::dynamics::CtmcEvent;
use akpz_core::InterlacingArray;

use serde::Deserialize;

use crate::error::invalid;
use crate::Result;

pub fn state_to_string(a: &InterlacingArray) -> Result<String> {
    let mut s = serde_json::to_string(a)?;
    s.push('\n');
    Ok(s)
}

#[derive(Deserialize)]
struct StateFile {
    n: usize,
    levels: Vec<Vec<i64>>,
}

/// Parses and validates a state file.
pub fn state_from_str(s: &str) -> Result<InterlacingArray> {
    let f: StateFile = serde_json::from_str(s)?;
    if f.levels.len() != f.n {
        return Err(invalid(format!("state has n = {} but {} levels", f.n, f.levels.len())));
    }
    let a = InterlacingArray::from_levels(f.levels)?;
    a.validate().map_err(|v| invalid(format!("invalid state: {v}")))?;
    Ok(a)
}

pub fn write_state(path: &Path, a: &InterlacingArray) -> Result<()> {
    std::fs::write(path, state_to_string(a)?)?;
    Ok(())
}

pub fn read_state(path: &Path) -> Result<InterlacingArray> {
    let mut s = String::new();
    File::open(path)?.read_to_string(&mut s)?;
    state_from_str(&s)
}

pub struct TraceWriter<W: Write> {
    out: BufWriter<W>,
}

impl TraceWriter<File> {
    pub fn create(path: &Path) -> Result<Self> {
        Ok(TraceWriter::new(File::create(path)?))
    }
}

impl<W: Write> TraceWriter<W> {
    pub fn new(w: W) -> Self {
        TraceWriter { out: BufWriter::new(w) }
    }

    pub fn event(&mut self, e: &CtmcEvent) -> Result<()> {
        serde_json::to_writer(&mut self.out, e)?;
        self.out.write_all(b"\n")?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

pub fn read_trace(path: &Path) -> Result<Vec<CtmcEvent>> {
    let s = std::fs::read_to_string(path)?;
    s.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| Ok(serde_json::from_str(l)?))
        .collect()
}
