//! Files written by a run: `<stem>.config.json` (the echo), `<stem>.csv`,
//! `<stem>.jsonl` (detail records), `<stem>.summary.json` and optionally
//! `<stem>.gp`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::Cli;
use crate::error::CliResult;
use crate::records::SCHEMA_VERSION;

pub struct Outputs {
    dir: PathBuf,
    stem: String,
    pub files: Vec<PathBuf>,
}

impl Outputs {
    pub fn new(dir: &Path, stem: &str) -> CliResult<Self> {
        fs::create_dir_all(dir)?;
        Ok(Outputs { dir: dir.to_path_buf(), stem: stem.to_string(), files: Vec::new() })
    }

    pub fn path(&self, suffix: &str) -> PathBuf {
        self.dir.join(format!("{}{suffix}", self.stem))
    }

    fn create(&mut self, suffix: &str) -> CliResult<(PathBuf, fs::File)> {
        let p = self.path(suffix);
        let f = fs::File::create(&p)?;
        self.files.push(p.clone());
        Ok((p, f))
    }

    pub fn echo(&mut self, cli: &Cli) -> CliResult<()> {
        let text = cli.to_echo()?;
        let (_, mut f) = self.create(".config.json")?;
        writeln!(f, "{text}")?;
        Ok(())
    }

    /// CSV with a leading `schema_version` column.
    pub fn csv(&mut self, header: &[String], rows: &[Vec<String>]) -> CliResult<()> {
        let (_, f) = self.create(".csv")?;
        let mut w = csv::Writer::from_writer(f);
        let mut h = vec!["schema_version".to_string()];
        h.extend(header.iter().cloned());
        w.write_record(&h)?;
        let v = SCHEMA_VERSION.to_string();
        for r in rows {
            w.write_record(std::iter::once(&v).chain(r.iter()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn jsonl<T: Serialize>(&mut self, records: &[T]) -> CliResult<()> {
        let (_, mut f) = self.create(".jsonl")?;
        for r in records {
            writeln!(f, "{}", serde_json::to_string(r)?)?;
        }
        Ok(())
    }

    pub fn summary(&mut self, value: &serde_json::Value) -> CliResult<()> {
        let (_, mut f) = self.create(".summary.json")?;
        writeln!(f, "{}", serde_json::to_string_pretty(value)?)?;
        Ok(())
    }

    /// Gnuplot script plotting columns `ys` against `x` of the CSV.
    pub fn gnuplot(&mut self, title: &str, x: &str, ys: &[&str], log_x: bool, log_y: bool) -> CliResult<()> {
        let csv_name = format!("{}.csv", self.stem);
        let (_, mut f) = self.create(".gp")?;
        writeln!(f, "set datafile separator ','")?;
        writeln!(f, "set key autotitle columnhead")?;
        writeln!(f, "set title '{title}'")?;
        writeln!(f, "set xlabel '{x}'")?;
        if log_x {
            writeln!(f, "set logscale x")?;
        }
        if log_y {
            writeln!(f, "set logscale y")?;
        }
        let plots: Vec<String> =
            ys.iter().map(|y| format!("'{csv_name}' using '{x}':'{y}' with linespoints")).collect();
        writeln!(f, "plot {}", plots.join(", \\\n     "))?;
        Ok(())
    }
}
