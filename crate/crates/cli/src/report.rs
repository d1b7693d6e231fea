use serde::Serialize;
use serde_json::{json, Value};

/// How a reported number came about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Estimated from the run.
    Measured,
    /// Exact or certified computation (rational arithmetic, enumeration).
    Exact,
    /// Closed-form reference value.
    ClosedForm,
    /// Follows from the definitions alone.
    Identity,
    /// Copied from the configuration.
    Input,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}
impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}
impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}
impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}
impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}
impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}
impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

/// `%.12g`: twelve significant digits, trailing zeros trimmed.
pub fn fmt_g(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let fixed = format!("{:.*}", (11 - exp) as usize, x);
        trim_zeros(&fixed).to_string()
    } else {
        format!("{}e{}{:02}", trim_zeros(mant), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// The value printed, read back; JSON output carries exactly what CSV shows.
pub fn round12(x: f64) -> Value {
    if x.is_finite() {
        json!(fmt_g(x).parse::<f64>().expect("formatted float parses"))
    } else {
        Value::Null
    }
}

fn cell_json(c: &Cell) -> Value {
    match c {
        Cell::Int(i) => json!(i),
        Cell::Float(x) => round12(*x),
        Cell::Bool(b) => json!(b),
        Cell::Text(s) => json!(s),
    }
}

fn cell_csv(c: &Cell) -> String {
    match c {
        Cell::Int(i) => i.to_string(),
        Cell::Float(x) => fmt_g(*x),
        Cell::Bool(b) => b.to_string(),
        Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Cell::Text(s) => s.clone(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }
}

/// A named scalar in the summary, with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Derived {
    pub name: String,
    pub value: Cell,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Outcome {
    pub table: Option<Table>,
    pub derived: Vec<Derived>,
    pub warnings: Vec<String>,
    /// Verdict used by `--assert`; `None` when the experiment has no criterion.
    pub pass: Option<bool>,
    /// Set when some requested quantity could not be certified.
    pub shortfall: Option<String>,
}

impl Outcome {
    pub fn with_table(table: Table) -> Self {
        Self { table: Some(table), ..Default::default() }
    }

    pub fn derive(&mut self, name: &str, value: impl Into<Cell>, provenance: Provenance) {
        self.derived.push(Derived { name: name.to_string(), value: value.into(), provenance });
    }

    fn table(&self) -> Table {
        self.table.clone().unwrap_or_else(|| Table::new(&[]))
    }

    pub fn empty_warning(&mut self) {
        if self.table().rows.is_empty() {
            self.warnings.push("empty series".into());
        }
    }

    pub fn summary_json(&self) -> Value {
        Value::Array(
            self.derived
                .iter()
                .map(|d| json!({ "name": d.name, "value": cell_json(&d.value), "provenance": d.provenance }))
                .collect(),
        )
    }

    /// Stable-column CSV. An empty table keeps its header and gains a `warning` column.
    pub fn to_csv(&self) -> String {
        let t = self.table();
        let mut out = String::new();
        if t.rows.is_empty() {
            let mut head: Vec<&str> = t.columns.clone();
            head.push("warning");
            out.push_str(&head.join(","));
            out.push('\n');
            return out;
        }
        out.push_str(&t.columns.join(","));
        out.push('\n');
        for r in &t.rows {
            out.push_str(&r.iter().map(cell_csv).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self, experiment: &str) -> Value {
        let t = self.table();
        json!({
            "experiment": experiment,
            "columns": t.columns,
            "rows": t.rows.iter().map(|r| r.iter().map(cell_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "summary": self.summary_json(),
            "pass": self.pass,
            "warnings": self.warnings,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_g(0.415037499278844), "0.415037499279");
        assert_eq!(fmt_g(1.0), "1");
        assert_eq!(fmt_g(-2.5e-9), "-2.5e-09");
        assert_eq!(fmt_g(123456789012345.0), "1.23456789012e+14");
        assert_eq!(fmt_g(1e-5), "0.00001");
        assert_eq!(fmt_g(0.0), "0");
        assert_eq!(fmt_g(f64::NAN), "nan");
        assert_eq!(round12(1.0 / 3.0), json!(0.333333333333));
    }

    #[test]
    fn empty_table_keeps_header() {
        let mut o = Outcome::with_table(Table::new(&["k", "height"]));
        o.empty_warning();
        assert_eq!(o.to_csv(), "k,height,warning\n");
        assert_eq!(o.warnings, vec!["empty series".to_string()]);
    }

    #[test]
    fn csv_quotes_text() {
        let mut t = Table::new(&["label", "x"]);
        t.push(vec!["a,b".into(), 0.5.into()]);
        assert_eq!(Outcome::with_table(t).to_csv(), "label,x\n\"a,b\",0.5\n");
    }
}
