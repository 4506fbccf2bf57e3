//! CSV output with a `#` metadata header.

use std::fmt::Write as _;
use std::path::Path;

use sffm_core::simulate::{SampleBatch, StopReason};

use crate::CliError;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub metadata: Vec<(String, String)>,
}

/// 17 significant digits, enough to recover every `f64`.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

impl ResultTable {
    pub fn new(command: &str, model_hash: &str, seed: Option<u64>, columns: Vec<String>) -> Self {
        let mut t = Self {
            columns,
            rows: Vec::new(),
            metadata: Vec::new(),
        };
        t.meta("command", command);
        t.meta("model_hash", model_hash);
        t.meta("tool_version", TOOL_VERSION);
        t.meta("seed", seed.map_or_else(|| "none".to_string(), |s| s.to_string()));
        t
    }

    pub fn meta(&mut self, key: &str, value: impl Into<String>) {
        self.metadata.push((key.to_string(), value.into()));
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width differs from header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.metadata {
            // one line per entry even if the value has line breaks
            for line in v.lines() {
                let _ = writeln!(s, "# {k}: {line}");
            }
            if v.is_empty() {
                let _ = writeln!(s, "# {k}:");
            }
        }
        let _ = writeln!(s, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| fmt_num(x)).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        write_file(path, &self.to_csv())
    }
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Write {
        path: path.display().to_string(),
        source,
    })
}

pub fn stop_name(s: StopReason) -> &'static str {
    match s {
        StopReason::Reached => "reached",
        StopReason::NoReturn => "no_return",
        StopReason::Capped => "capped",
    }
}

/// One line per replication: index, stop reason, 1-based phase, `x`, `t`.
pub fn raw_dump(batch: &SampleBatch) -> String {
    let mut s = String::from("replication_index,stop_reason,phase,x,t\n");
    for r in &batch.records {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.replication,
            stop_name(r.stop),
            r.phase + 1,
            fmt_num(r.x),
            fmt_num(r.t)
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 1e300, 0.0, f64::MIN_POSITIVE] {
            assert_eq!(fmt_num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_num(f64::INFINITY), "inf");
        assert_eq!(fmt_num(f64::NAN), "nan");
        assert_eq!(fmt_num(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn csv_layout() {
        let mut t = ResultTable::new("transient", "abc", Some(7), vec!["v".into(), "mu_1".into()]);
        t.push(vec![0.5, 0.25]);
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# command: transient");
        assert_eq!(lines[1], "# model_hash: abc");
        assert_eq!(lines[3], "# seed: 7");
        assert_eq!(lines[4], "v,mu_1");
        assert_eq!(lines[5], "5.0000000000000000e-1,2.5000000000000000e-1");
        assert_eq!(t.column("mu_1"), Some(vec![0.25]));
    }

    #[test]
    #[should_panic]
    fn ragged_row_rejected() {
        let mut t = ResultTable::new("x", "h", None, vec!["a".into()]);
        t.push(vec![1.0, 2.0]);
    }
}
