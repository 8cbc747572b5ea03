use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use crate::arith::RNG_ALGORITHM_ID;
use crate::error::Result;

pub const SHELL_COUNT_MODE: &str = "enumerated-8q";

pub const PSI_NORMALIZATION_NOTE: &str = "|shell(q)| = 8q by enumeration, so psi_exact = sum of 2*psi(|q|) over 0 < |q| <= Q \
= 16*sum q*psi(q); psi_paper uses 8q+4 per shell and exceeds psi_exact by 8*sum psi(q); err_norm is normalized by psi_exact";

pub const ZERO_VECTOR_NOTE: &str = "q = 0 is excluded from N and from every sum";

/// Metadata object written ahead of every output body.
pub fn metadata(command: &str, config: Value, config_hash: Option<&str>, scale_bits: Option<u32>) -> Value {
    json!({
        "tool": "kglab",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
        "config_hash": config_hash,
        "rng": RNG_ALGORITHM_ID,
        "scale_bits": scale_bits,
        "shell_count_mode": SHELL_COUNT_MODE,
        "psi_normalization": PSI_NORMALIZATION_NOTE,
        "zero_vector": ZERO_VECTOR_NOTE,
    })
}

pub fn open(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// CSV with a `# meta: {...}` first line.
pub struct CsvOut {
    inner: csv::Writer<Box<dyn Write>>,
}

impl CsvOut {
    pub fn new(mut w: Box<dyn Write>, meta: &Value, header: &[&str]) -> Result<Self> {
        writeln!(w, "# meta: {meta}")?;
        let mut inner = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(w);
        inner.write_record(header)?;
        Ok(CsvOut { inner })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.inner.write_record(fields)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

/// JSON lines with `{"meta": {...}}` first.
pub struct JsonLines {
    inner: Box<dyn Write>,
}

impl JsonLines {
    pub fn new(mut w: Box<dyn Write>, meta: &Value) -> Result<Self> {
        writeln!(w, "{}", json!({ "meta": meta }))?;
        Ok(JsonLines { inner: w })
    }

    pub fn record<T: Serialize>(&mut self, value: &T) -> Result<()> {
        serde_json::to_writer(&mut self.inner, value)?;
        writeln!(self.inner)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}
