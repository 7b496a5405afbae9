//! JSON and CSV writers. Floats use the shortest round-trip decimal form in
//! both, so reruns are byte-identical.

use std::fs::File;
use std::io::{self, BufWriter, Write};

use serde::Serialize;

use crate::error::CliError;
use crate::manifest::RunManifest;

#[derive(Serialize)]
struct Document<'a, R, D> {
    manifest: &'a RunManifest,
    result: R,
    diagnostics: D,
}

pub struct Sink {
    out: Box<dyn Write>,
}

impl Sink {
    /// Opens the destination up front so a bad path fails before any work.
    pub fn open(manifest: &RunManifest) -> Result<Self, CliError> {
        let out: Box<dyn Write> = match manifest.output() {
            Some(path) => {
                let file = File::create(&path)
                    .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
                Box::new(BufWriter::new(file))
            }
            None => Box::new(BufWriter::new(io::stdout())),
        };
        Ok(Self { out })
    }

    pub fn json<R: Serialize, D: Serialize>(
        mut self,
        manifest: &RunManifest,
        result: R,
        diagnostics: D,
    ) -> Result<(), CliError> {
        let doc = Document {
            manifest,
            result,
            diagnostics,
        };
        serde_json::to_writer_pretty(&mut self.out, &doc)
            .map_err(|e| CliError::Io(e.to_string()))?;
        writeln!(self.out)?;
        self.out.flush()?;
        Ok(())
    }

    /// The manifest goes on a leading `#` line, then the header and rows.
    pub fn csv<I>(
        mut self,
        manifest: &RunManifest,
        header: &[&str],
        rows: I,
    ) -> Result<(), CliError>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let echo = serde_json::to_string(manifest).map_err(|e| CliError::Io(e.to_string()))?;
        writeln!(self.out, "# {echo}")?;
        writeln!(self.out, "{}", header.join(","))?;
        for row in rows {
            writeln!(self.out, "{}", row.join(","))?;
        }
        self.out.flush()?;
        Ok(())
    }
}

pub fn num(v: f64) -> String {
    format!("{v:?}")
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}
