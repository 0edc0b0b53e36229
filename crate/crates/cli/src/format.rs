//! Output formats shared by the subcommands.

use std::fmt::Write;

use serde_json::{Map, Value};

/// Round to 15 significant digits. Non-finite values become `null`.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let rounded: f64 = format!("{x:.14e}").parse().expect("formatted float parses");
    serde_json::Number::from_f64(rounded).map_or(Value::Null, Value::Number)
}

/// The same rounding for CSV cells.
pub fn cell(x: f64) -> String {
    match num(x) {
        Value::Number(n) => n.to_string(),
        _ => "NaN".into(),
    }
}

/// JSON object that always starts with the anchor of the computed quantity.
pub fn report(anchor: &str) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("anchor".into(), Value::String(anchor.into()));
    m
}

pub fn to_json(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

/// CSV with a fixed header and pre-formatted cells.
pub struct Csv {
    out: String,
    width: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Csv { out: format!("{}\n", header.join(",")), width: header.len() }
    }

    pub fn row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.width);
        let _ = writeln!(self.out, "{}", cells.join(","));
    }

    pub fn finish(self) -> String {
        self.out
    }
}
