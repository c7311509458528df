//! Where results go: `<prefix>.json` / `<prefix>.csv` when an output prefix
//! is set, standard output otherwise. On standard output a CSV table is
//! preceded by its JSON header on a `#` comment line.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};

pub struct Sink {
    prefix: Option<PathBuf>,
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn lib_io(path: &Path, e: christoffel::Error) -> CliError {
    match e {
        christoffel::Error::Io { source, .. } => CliError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => other.into(),
    }
}

impl Sink {
    pub fn new(prefix: Option<PathBuf>) -> Self {
        Sink { prefix }
    }

    pub fn path(&self, suffix: &str) -> Option<PathBuf> {
        self.prefix.as_deref().map(|p| with_suffix(p, suffix))
    }

    fn write_file<F>(path: &Path, f: F) -> CliResult<()>
    where
        F: FnOnce(&mut dyn Write) -> CliResult<()>,
    {
        let file = File::create(path).map_err(io_err(path))?;
        let mut w = BufWriter::new(file);
        f(&mut w)?;
        w.flush().map_err(io_err(path))
    }

    /// Writes a JSON document.
    pub fn json<T: Serialize>(&self, doc: &T) -> CliResult<()> {
        let text = serde_json::to_string_pretty(doc).map_err(christoffel::Error::from)?;
        match self.path(".json") {
            Some(path) => Self::write_file(&path, |w| writeln!(w, "{text}").map_err(io_err(&path))),
            None => {
                println!("{text}");
                Ok(())
            }
        }
    }

    /// Writes a JSON header and a CSV table produced by `table`.
    pub fn table<T, F>(&self, header: &T, table: F) -> CliResult<()>
    where
        T: Serialize,
        F: FnOnce(&mut dyn Write) -> christoffel::Result<()>,
    {
        match self.path(".csv") {
            Some(csv_path) => {
                self.json(header)?;
                Self::write_file(&csv_path, |w| table(w).map_err(|e| lib_io(&csv_path, e)))
            }
            None => {
                let text = serde_json::to_string(header).map_err(christoffel::Error::from)?;
                let stdout = std::io::stdout();
                let mut w = stdout.lock();
                let p = Path::new("<stdout>");
                writeln!(w, "# {text}").map_err(io_err(p))?;
                table(&mut w).map_err(|e| lib_io(p, e))?;
                w.flush().map_err(io_err(p))
            }
        }
    }

    /// Writes an extra CSV file next to the main outputs.
    pub fn extra_csv<F>(&self, suffix: &str, table: F) -> CliResult<PathBuf>
    where
        F: FnOnce(&mut dyn Write) -> christoffel::Result<()>,
    {
        let path = self
            .path(suffix)
            .ok_or_else(|| CliError::usage("this command needs --output to write its extra files"))?;
        Self::write_file(&path, |w| table(w).map_err(|e| lib_io(&path, e)))?;
        Ok(path)
    }
}

/// Writes rows of numbers under a header.
pub fn write_rows<W: Write + ?Sized>(out: &mut W, header: &[String], rows: impl Iterator<Item = Vec<String>>) -> christoffel::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let wrap = |e: csv::Error| christoffel::Error::Io {
        path: "<output>".into(),
        source: std::io::Error::other(e),
    };
    w.write_record(header).map_err(wrap)?;
    for r in rows {
        w.write_record(&r).map_err(wrap)?;
    }
    w.flush().map_err(|source| christoffel::Error::Io {
        path: "<output>".into(),
        source,
    })
}
