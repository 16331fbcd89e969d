use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use toroidsim::RunConfig;

use crate::error::CliError;

/// Opens `path` for writing, or stdout when absent or `-`.
pub fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        Some(p) if p != Path::new("-") => {
            let f = File::create(p).map_err(|e| CliError::io(p, e))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        _ => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

/// `#`-prefixed provenance lines: tool version, command and every effective
/// config value.
pub fn write_metadata(w: &mut dyn Write, command: &str, config: &RunConfig) -> io::Result<()> {
    writeln!(w, "# toroidsim {}", toroidsim::VERSION)?;
    writeln!(w, "# command = {command}")?;
    for line in config.echo() {
        writeln!(w, "# {line}")?;
    }
    Ok(())
}

/// Fixed-precision rendering so outputs are byte-stable.
pub fn fmt(x: f64, digits: usize) -> String {
    let s = format!("{x:.digits$}");
    // Values that round to zero print without a sign.
    match s.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
        _ => s,
    }
}

pub fn fmt_opt(x: Option<f64>, digits: usize) -> String {
    x.map_or_else(|| "none".to_string(), |v| fmt(v, digits))
}
