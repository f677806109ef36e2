//! CSV and JSON artifacts with a provenance header.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{LabError, Result};

/// 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// A CSV table; the first line is `# <header>`.
#[derive(Debug, Clone)]
pub struct Csv {
    header: String,
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new(header: String, columns: &[&'static str]) -> Self {
        Self { header, columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut s = format!("# {}\n{}\n", self.header, self.columns.join(","));
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| LabError::Io { path: path.display().to_string(), source })
}

/// Data rows of a CSV written by [`Csv`], keyed by column name.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let text = std::fs::read_to_string(path).map_err(|source| LabError::Io { path: path.display().to_string(), source })?;
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let cols: Vec<String> = lines
        .next()
        .ok_or_else(|| LabError::argument("resonances", "empty file"))?
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    Ok((cols, rows))
}

/// JSON object with numbers at 17 significant digits.
#[derive(Debug, Default)]
pub struct JsonObject {
    fields: Vec<(String, String)>,
}

impl JsonObject {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn number(mut self, key: &str, v: f64) -> Self {
        self.fields.push((key.to_string(), json_number(v)));
        self
    }

    pub fn integer(mut self, key: &str, v: i64) -> Self {
        self.fields.push((key.to_string(), v.to_string()));
        self
    }

    pub fn string(mut self, key: &str, v: &str) -> Self {
        self.fields.push((key.to_string(), serde_json::Value::from(v).to_string()));
        self
    }

    pub fn array(mut self, key: &str, items: Vec<JsonObject>) -> Self {
        let inner: Vec<String> = items.iter().map(|o| o.render(2)).collect();
        let body = if inner.is_empty() { "[]".to_string() } else { format!("[\n    {}\n  ]", inner.join(",\n    ")) };
        self.fields.push((key.to_string(), body));
        self
    }

    pub fn render(&self, depth: usize) -> String {
        if depth > 0 {
            let parts: Vec<String> = self.fields.iter().map(|(k, v)| format!("\"{k}\": {v}")).collect();
            return format!("{{{}}}", parts.join(", "));
        }
        let mut s = String::from("{\n");
        for (i, (k, v)) in self.fields.iter().enumerate() {
            let sep = if i + 1 < self.fields.len() { "," } else { "" };
            let _ = writeln!(s, "  \"{k}\": {v}{sep}");
        }
        s.push_str("}\n");
        s
    }
}

/// JSON has no NaN or infinity; those become null.
fn json_number(v: f64) -> String {
    if v.is_finite() {
        fmt17(v)
    } else {
        "null".to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt17(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt17(-2.5), "-2.5000000000000000e0");
        let back: f64 = fmt17(std::f64::consts::PI).parse().unwrap();
        assert_eq!(back, std::f64::consts::PI);
    }

    #[test]
    fn json_is_valid() {
        let o = JsonObject::new()
            .string("header", "h")
            .number("x", 0.25)
            .number("bad", f64::NAN)
            .array("pairs", vec![JsonObject::new().integer("i", 1).number("c", -3.0)]);
        let v: serde_json::Value = serde_json::from_str(&o.render(0)).unwrap();
        assert_eq!(v["x"], 0.25);
        assert!(v["bad"].is_null());
        assert_eq!(v["pairs"][0]["c"], -3.0);
    }
}
