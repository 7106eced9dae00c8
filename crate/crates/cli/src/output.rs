//! Rendering: one formatter for every number, three output shapes.
//!
//! Every numeric value is formatted once, to six significant digits, and the
//! same string is emitted in table, CSV, and key-value form, so the formats
//! can never disagree and CSV output is byte-stable across runs.

use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    Table,
    Csv,
    Keyvalue,
}

/// Fixed six-significant-digit rendering. Values outside a readable decimal
/// range switch to scientific notation.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..=5).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.5e}")
    }
}

/// Integer counts are printed as-is, not through the significand formatter.
pub fn count(n: u64) -> String {
    n.to_string()
}

/// A metric/value/unit listing (the shape of most command outputs).
#[derive(Debug, Default)]
pub struct MetricList {
    rows: Vec<(String, String, &'static str)>,
}

impl MetricList {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, metric: impl Into<String>, value: impl Into<String>, unit: &'static str) {
        self.rows.push((metric.into(), value.into(), unit));
    }

    pub fn number(&mut self, metric: impl Into<String>, value: f64, unit: &'static str) {
        self.push(metric, sig6(value), unit);
    }

    pub fn render(&self, format: ReportFormat) -> String {
        let mut out = String::new();
        match format {
            ReportFormat::Csv => {
                out.push_str("metric,value,unit\n");
                for (metric, value, unit) in &self.rows {
                    let _ = writeln!(out, "{metric},{value},{unit}");
                }
            }
            ReportFormat::Keyvalue => {
                for (metric, value, _) in &self.rows {
                    let _ = writeln!(out, "{metric}={value}");
                }
            }
            ReportFormat::Table => {
                let metric_width = self
                    .rows
                    .iter()
                    .map(|(m, _, _)| m.len())
                    .max()
                    .unwrap_or(0);
                let value_width = self
                    .rows
                    .iter()
                    .map(|(_, v, _)| v.len())
                    .max()
                    .unwrap_or(0);
                for (metric, value, unit) in &self.rows {
                    let _ = writeln!(out, "{metric:<metric_width$}  {value:>value_width$}  {unit}");
                }
            }
        }
        out
    }
}

/// A rectangular table (comparison and sweep outputs).
#[derive(Debug)]
pub struct Grid {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Grid {
    pub fn render(&self, format: ReportFormat) -> String {
        let mut out = String::new();
        match format {
            ReportFormat::Csv => {
                let _ = writeln!(out, "{}", self.headers.join(","));
                for row in &self.rows {
                    let _ = writeln!(out, "{}", row.join(","));
                }
            }
            ReportFormat::Keyvalue => {
                for row in &self.rows {
                    let key = &row[0];
                    for (header, cell) in self.headers.iter().zip(row).skip(1) {
                        let _ = writeln!(out, "{key}.{header}={cell}");
                    }
                }
            }
            ReportFormat::Table => {
                let mut widths: Vec<usize> = self.headers.iter().map(String::len).collect();
                for row in &self.rows {
                    for (i, cell) in row.iter().enumerate() {
                        widths[i] = widths[i].max(cell.len());
                    }
                }
                let mut line = String::new();
                for (i, header) in self.headers.iter().enumerate() {
                    if i > 0 {
                        line.push_str("  ");
                    }
                    let _ = write!(line, "{header:<width$}", width = widths[i]);
                }
                let _ = writeln!(out, "{}", line.trim_end());
                for row in &self.rows {
                    let mut line = String::new();
                    for (i, cell) in row.iter().enumerate() {
                        if i > 0 {
                            line.push_str("  ");
                        }
                        let _ = write!(line, "{cell:<width$}", width = widths[i]);
                    }
                    let _ = writeln!(out, "{}", line.trim_end());
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig6_reference_values() {
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(0.9048374180359595), "0.904837");
        assert_eq!(sig6(0.9801986733067553), "0.980199");
        assert_eq!(sig6(149.7), "149.700");
        assert_eq!(sig6(15070.0), "15070.0");
        assert_eq!(sig6(678.8667565142183), "678.867");
        assert_eq!(sig6(0.22051455394378947), "0.220515");
        assert_eq!(sig6(1.0e6), "1.00000e6");
        assert_eq!(sig6(6.341958396752917e-7), "6.34196e-7");
        assert_eq!(sig6(-2560.5438), "-2560.54");
        assert_eq!(sig6(0.0024444), "0.00244440");
    }

    #[test]
    fn formats_share_values() {
        let mut list = MetricList::new();
        list.number("a_metric", 0.123456789, "g");
        list.number("b_metric", 42.0, "kWh");
        let csv = list.render(ReportFormat::Csv);
        let table = list.render(ReportFormat::Table);
        let kv = list.render(ReportFormat::Keyvalue);
        for value in ["0.123457", "42.0000"] {
            assert!(csv.contains(value));
            assert!(table.contains(value));
            assert!(kv.contains(value));
        }
        assert!(csv.starts_with("metric,value,unit\n"));
    }
}
