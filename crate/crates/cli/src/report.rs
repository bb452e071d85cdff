//! Rendering helpers shared by the subcommands.

use std::fmt::Write as _;
use std::path::Path;

use disclosure_core::{DecisionReport64, Verdict};

/// Up to six decimals, trailing zeros trimmed.
pub fn num(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let s = format!("{v:.6}");
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        &s
    };
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_else(|| "n/a (explicit x)".into())
}

pub fn vector(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|&x| num(x)).collect();
    format!("({})", parts.join(", "))
}

pub fn banner(verdict: Verdict) -> &'static str {
    match verdict {
        Verdict::Share => "SHARE",
        Verdict::Withhold => "WITHHOLD",
    }
}

/// The self-describing header every report starts with.
pub fn digest(out: &mut String, source: &str, producer: &str, consumer: &str, delta: Option<f64>) {
    let _ = writeln!(out, "scenario: {source}");
    let _ = writeln!(
        out,
        "producer: {producer}  consumer: {consumer}  effective δ: {}",
        opt_num(delta)
    );
}

pub fn decision_block(out: &mut String, r: &DecisionReport64, message: Option<&str>) {
    if let Some(m) = message {
        let _ = writeln!(out, "  delivered message: {m}");
    }
    let _ = writeln!(out, "  benefit distribution: {}", vector(&r.benefit_distribution));
    let _ = writeln!(out, "  risk distribution:    {}", vector(&r.risk_distribution));
    let _ = writeln!(out, "  E[B] = {}", num(r.expected_benefit));
    let _ = writeln!(out, "  E[R] = {}", num(r.expected_risk));
    let _ = writeln!(out, "  E[C] = {}", num(r.expected_net));
    let _ = writeln!(out, "  verdict: {}", banner(r.verdict));
}

/// Collects CSV records in memory; nothing touches the disk until `save`.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header).expect("in-memory write");
        Self { writer }
    }

    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).expect("in-memory write");
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.writer.into_inner().expect("in-memory flush")
    }

    pub fn save(self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.into_bytes())
    }
}

/// Full precision for CSV: shortest string that parses back to the same value.
pub fn cell(v: f64) -> String {
    v.to_string()
}

pub fn opt_cell(v: Option<f64>) -> String {
    v.map(cell).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn human_numbers() {
        assert_eq!(num(53200.0), "53200");
        assert_eq!(num(-28200.0), "-28200");
        assert_eq!(num(0.1 + 0.2), "0.3");
        assert_eq!(num(75.0 / 90.0), "0.833333");
        assert_eq!(num(-1e-9), "0");
        assert_eq!(num(0.5), "0.5");
    }

    #[test]
    fn csv_cells_round_trip() {
        for v in [0.1 + 0.2, 53200.0, 1.0 / 3.0, -2.5e-17] {
            assert_eq!(cell(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(cell(53200.0), "53200");
    }

    #[test]
    fn table_bytes() {
        let mut t = Table::new(&["a", "b"]);
        t.row(["x", "1"]);
        assert_eq!(String::from_utf8(t.into_bytes()).unwrap(), "a,b\nx,1\n");
    }
}
