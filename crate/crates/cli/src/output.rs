//! Versioned CSV output with a comment block of the resolved configuration.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;

pub const VERSION_LINE: &str = "# msbem-csv v1";

/// Collects the configuration block and rows, then writes everything at once.
pub struct CsvReport {
    config: Vec<(String, String)>,
    rows: csv::Writer<Vec<u8>>,
}

impl CsvReport {
    pub fn new(header: &[String]) -> anyhow::Result<Self> {
        let mut rows = csv::Writer::from_writer(Vec::new());
        rows.write_record(header)?;
        Ok(CsvReport { config: Vec::new(), rows })
    }

    pub fn config(&mut self, key: &str, value: impl ToString) {
        self.config.push((key.to_string(), value.to_string()));
    }

    pub fn row(&mut self, fields: &[String]) -> anyhow::Result<()> {
        self.rows.write_record(fields)?;
        Ok(())
    }

    pub fn render(self) -> anyhow::Result<String> {
        let mut out = String::new();
        out.push_str(VERSION_LINE);
        out.push('\n');
        for (k, v) in &self.config {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        let body = self.rows.into_inner().context("flushing CSV rows")?;
        out.push_str(&String::from_utf8(body)?);
        Ok(out)
    }

    /// To `path`, or standard output when absent.
    pub fn write(self, path: Option<&Path>) -> anyhow::Result<()> {
        let text = self.render()?;
        match path {
            Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
            None => {
                std::io::stdout().write_all(text.as_bytes())?;
                Ok(())
            }
        }
    }
}

/// Shortest round-trip decimal form, so reruns are byte-identical.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn list<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}

/// Directory for exported matrices, created on demand.
pub fn ensure_dir(p: &Path) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(p).with_context(|| format!("creating {}", p.display()))?;
    Ok(p.to_path_buf())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let mut r = CsvReport::new(&["a".into(), "b".into()]).unwrap();
        r.config("tol", 2e-5);
        r.row(&["1".into(), "fixed-overlap:0.25".into()]).unwrap();
        let text = r.render().unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines, ["# msbem-csv v1", "# tol = 0.00002", "a,b", "1,fixed-overlap:0.25"]);
        assert_eq!(opt_num(None), "");
        assert_eq!(list(&[0.4, 0.2]), "0.4 0.2");
    }
}
