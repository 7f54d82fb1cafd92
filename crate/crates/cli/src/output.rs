use serde::Serialize;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::CliError;

/// Output directory plus the list of files written so far.
pub struct Run {
    pub dir: PathBuf,
    pub files: Vec<String>,
}

impl Run {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Usage(format!("{}: {e}", dir.display())))?;
        Ok(Run { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<File>, CliError> {
        let path = self.dir.join(name);
        let f = File::create(&path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        self.files.push(name.to_string());
        Ok(BufWriter::new(f))
    }

    /// CSV with `# ` comment lines (one per column unit, then notes) above the header row.
    pub fn table(&mut self, name: &str, notes: &[&str], columns: &[(&str, &str)], rows: &[Vec<String>]) -> Result<(), CliError> {
        let mut w = self.create(name)?;
        let io = |e: std::io::Error| CliError::Usage(format!("{name}: {e}"));
        for (col, unit) in columns {
            writeln!(w, "# {col}: {unit}").map_err(io)?;
        }
        for n in notes {
            writeln!(w, "# {n}").map_err(io)?;
        }
        let mut c = csv::Writer::from_writer(w);
        let csv_err = |e: csv::Error| CliError::Usage(format!("{name}: {e}"));
        c.write_record(columns.iter().map(|(n, _)| *n)).map_err(csv_err)?;
        for r in rows {
            c.write_record(r).map_err(csv_err)?;
        }
        c.flush().map_err(io)?;
        Ok(())
    }
}

/// Shortest round-trip formatting, so identical values give identical bytes.
pub fn nums(v: &[f64]) -> Vec<String> {
    v.iter().map(|x| format!("{x:?}")).collect()
}

impl Run {
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Usage(format!("{name}: {e}")))?;
        writeln!(w).and_then(|_| w.flush()).map_err(|e| CliError::Usage(format!("{name}: {e}")))
    }

    pub fn manifest(&mut self, command: &str, cfg: &RunConfig, threads: Option<usize>, seed: u64, status: &str) -> Result<(), CliError> {
        #[derive(Serialize)]
        struct Manifest<'a> {
            command: &'a str,
            version: &'a str,
            config_sha256: String,
            config: &'a RunConfig,
            config_text: String,
            threads: Option<usize>,
            seed: u64,
            status: &'a str,
            files: &'a [String],
        }
        let files = self.files.clone();
        let m = Manifest {
            command,
            version: env!("CARGO_PKG_VERSION"),
            config_sha256: cfg.hash(),
            config: cfg,
            config_text: cfg.canonical(),
            threads,
            seed,
            status,
            files: &files,
        };
        self.json("manifest.json", &m)
    }
}
