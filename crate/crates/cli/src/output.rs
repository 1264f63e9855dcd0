use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::CliError;

/// A named output file.
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

/// The primary output plus any side files a command produces.
pub struct Outcome {
    pub primary: Artifact,
    pub extra: Vec<Artifact>,
}

impl Outcome {
    pub fn single(primary: Artifact) -> Self {
        Outcome { primary, extra: Vec::new() }
    }
}

pub fn json<T: Serialize>(name: &str, value: &T) -> Result<Artifact, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(Artifact {
        name: format!("{name}.json"),
        bytes,
    })
}

/// CSV with an explicit header; cells are already formatted.
pub fn csv_table(name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<Artifact, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::computation(format!("csv: {e}")))?;
    Ok(Artifact {
        name: format!("{name}.csv"),
        bytes,
    })
}

/// Shortest representation that round-trips, so files are byte-stable.
pub fn num(v: f64) -> String {
    format!("{v}")
}

/// Writes everything under `dir`, or the primary output to stdout.
pub fn emit(out: &Outcome, dir: Option<&Path>) -> Result<(), CliError> {
    match dir {
        Some(d) => {
            std::fs::create_dir_all(d)
                .map_err(|e| CliError::validation(format!("output directory {} is not writable: {e}", d.display())))?;
            for a in std::iter::once(&out.primary).chain(&out.extra) {
                let path = d.join(&a.name);
                std::fs::write(&path, &a.bytes)
                    .map_err(|e| CliError::validation(format!("cannot write {}: {e}", path.display())))?;
                log::info!("wrote {}", path.display());
            }
        }
        None => {
            if !out.extra.is_empty() {
                return Err(CliError::validation("this command writes several files; give --out DIR"));
            }
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(&out.primary.bytes).and_then(|()| stdout.flush()) {
                // a closed pipe (`| head`) is the reader's choice, not a failure
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                r => r?,
            }
        }
    }
    Ok(())
}
