//! Tabular output as CSV or JSON with a fixed 12-significant-digit format.

use serde_json::{Map, Number, Value};

use crate::CliError;

pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Empty, Into::into)
    }
}

/// `x` rounded to 12 significant digits, printed without locale, in fixed
/// notation for moderate exponents and scientific notation otherwise.
/// Non-finite values print as `nan`, `inf`, `-inf`.
pub fn format_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').unwrap_or((&sci, "0"));
    let exp: i32 = exp.parse().unwrap_or(0);
    if (-5..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_string()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Num(x) => format_sig(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => format_sig(*x)
                .parse::<f64>()
                .ok()
                .and_then(Number::from_f64)
                .map_or(Value::Null, Value::Number),
            Cell::Int(n) => Value::Number((*n).into()),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Empty => Value::Null,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(Vec::new());
        w.write_record(&self.columns).map_err(CliError::output)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::text))
                .map_err(CliError::output)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| CliError::output(e.into_error()))?;
        String::from_utf8(bytes).map_err(CliError::output)
    }

    pub fn to_json_value(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self
                        .columns
                        .iter()
                        .zip(row)
                        .map(|(c, v)| (c.to_string(), v.json()))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }

    /// Column values parsed back from their printed form; `None` for
    /// non-numeric cells.
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let idx = self.columns.iter().position(|c| *c == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| match &r[idx] {
                    Cell::Num(x) => format_sig(*x).parse().ok(),
                    Cell::Int(n) => Some(*n as f64),
                    _ => None,
                })
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(0.0703125), "0.0703125");
        assert_eq!(format_sig(-0.859375), "-0.859375");
        assert_eq!(format_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_sig(516.796875), "516.796875");
        assert_eq!(format_sig(7350.0), "7350");
        assert_eq!(format_sig(2.0f64.sqrt() * 1e-9), "1.41421356237e-9");
        assert_eq!(format_sig(6.02214076e23), "6.02214076e23");
        assert_eq!(format_sig(123456789012345.0), "1.23456789012e14");
        assert_eq!(format_sig(1e-5), "0.00001");
        assert_eq!(format_sig(f64::NAN), "nan");
        assert_eq!(format_sig(-f64::INFINITY), "-inf");
    }

    #[test]
    fn csv_and_json() {
        let mut t = Table::new(vec!["name", "value", "note"]);
        t.push(vec!["a,b".into(), 0.25.into(), Cell::Empty]);
        t.push(vec!["c".into(), 3u64.into(), Cell::Num(f64::NAN)]);
        assert_eq!(
            t.to_csv().unwrap(),
            "name,value,note\r\n\"a,b\",0.25,\r\nc,3,nan\r\n"
        );
        let j = t.to_json_value();
        assert_eq!(j[0]["value"], serde_json::json!(0.25));
        assert_eq!(j[0]["note"], Value::Null);
        assert_eq!(j[1]["note"], Value::Null);
        assert_eq!(t.column("value").unwrap(), vec![Some(0.25), Some(3.0)]);
    }
}
