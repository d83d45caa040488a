//! CSV artifacts: comma-separated, `\n` line endings, shortest round-trip
//! float formatting, one header row, and a trailing
//! `# config_hash=<hex>` comment binding the file to its inputs.

use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        CsvTable {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self, config_hash: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{}", self.header.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{}", v)).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        let _ = writeln!(s, "# config_hash={}", config_hash);
        s
    }

    pub fn write(&self, path: &Path, config_hash: &str) -> std::io::Result<()> {
        std::fs::write(path, self.render(config_hash))
    }
}

/// Reads back a CSV artifact (header + numeric rows), skipping `#` comment
/// lines.
pub fn read_csv(path: &Path) -> std::io::Result<CsvTable> {
    let text = std::fs::read_to_string(path)?;
    parse_csv(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
}

pub fn parse_csv(text: &str) -> Result<CsvTable, String> {
    let mut lines = text.lines().filter(|l| !l.trim_start().starts_with('#'));
    let header_line = lines.next().ok_or("empty CSV")?;
    let header: Vec<String> = header_line
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Result<Vec<f64>, _> = line.split(',').map(|c| c.trim().parse::<f64>()).collect();
        let row = row.map_err(|e| format!("row {}: {}", i + 2, e))?;
        if row.len() != header.len() {
            return Err(format!(
                "row {} has {} cells, header has {}",
                i + 2,
                row.len(),
                header.len()
            ));
        }
        rows.push(row);
    }
    Ok(CsvTable { header, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_with_full_precision() {
        let mut t = CsvTable::new(&["gamma", "mse"]);
        t.push(vec![0.1, 0.013157894736842105]);
        t.push(vec![1e-3, 2.5e-300]);
        let text = t.render("abc123");
        assert!(text.ends_with("# config_hash=abc123\n"));
        let back = parse_csv(&text).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn rejects_ragged_rows() {
        assert!(parse_csv("a,b\n1.0\n").is_err());
    }
}
