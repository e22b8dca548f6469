//! File formats: JSON matrices, tabular CSV/JSON artifacts and function
//! specifications. Every artifact carries [`SCHEMA_VERSION`]; floating
//! point numbers are written with 17 significant digits.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::circlefn::{CircleFunction, TrigPolyJson};
use crate::error::{Error, Result};
use crate::spectra::{c, ComplexMatrix, HermitianMatrix, UnitaryMatrix};

pub const SCHEMA_VERSION: &str = "krein/1";

/// `x` in scientific notation with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

struct Sig17;

impl serde_json::ser::Formatter for Sig17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        writer.write_all(fmt17(value).as_bytes())
    }
}

/// Compact JSON with every float at 17 significant digits, newline
/// terminated.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json_string(value)?)?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let (r, k) = m.shape();
        Self {
            schema: Some(SCHEMA_VERSION.to_string()),
            rows: r,
            cols: k,
            re: (0..r).map(|i| (0..k).map(|j| m[(i, j)].re).collect()).collect(),
            im: (0..r).map(|i| (0..k).map(|j| m[(i, j)].im).collect()).collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let shape_ok = |a: &Vec<Vec<f64>>| a.len() == self.rows && a.iter().all(|r| r.len() == self.cols);
        if !shape_ok(&self.re) || !shape_ok(&self.im) {
            return Err(Error::Parse(format!(
                "\"re\" and \"im\" must both be {}x{} nested arrays",
                self.rows, self.cols
            )));
        }
        Ok(ComplexMatrix::from_fn(self.rows, self.cols, |i, j| c(self.re[i][j], self.im[i][j])))
    }
}

pub fn parse_matrix(text: &str) -> Result<ComplexMatrix> {
    let j: MatrixJson = serde_json::from_str(text).map_err(|e| Error::Parse(format!("matrix JSON: {e}")))?;
    j.to_matrix()
}

pub fn read_matrix(path: &Path) -> Result<ComplexMatrix> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
    parse_matrix(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn write_matrix(path: &Path, m: &ComplexMatrix) -> Result<()> {
    write_json(path, &MatrixJson::from_matrix(m))
}

pub fn read_unitary(path: &Path) -> Result<UnitaryMatrix> {
    UnitaryMatrix::new(read_matrix(path)?)
}

pub fn read_hermitian(path: &Path) -> Result<HermitianMatrix> {
    HermitianMatrix::new(read_matrix(path)?)
}

/// A built-in name (`z^n`, `abs-theta`, `cos`, `sawtooth[:m]`) or the path
/// of a TrigPoly JSON file.
pub fn read_function(spec: &str) -> Result<CircleFunction> {
    let path = Path::new(spec);
    if spec.ends_with(".json") || path.is_file() {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read function file {spec}: {e}")))?;
        let j: TrigPolyJson =
            serde_json::from_str(&text).map_err(|e| Error::Parse(format!("TrigPoly JSON {spec}: {e}")))?;
        return CircleFunction::try_from(j);
    }
    CircleFunction::builtin(spec)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Real(x) => fmt17(*x),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(i) => Value::from(*i),
            Cell::Real(x) => Value::from(*x),
            Cell::Text(s) => Value::from(s.as_str()),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Named columns of numbers; rendered as CSV with a `# schema:` comment
/// line or as JSON with a `schema` field.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub kind: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(kind: &str, columns: &[&str]) -> Self {
        Self {
            kind: kind.to_string(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut out = format!("# schema: {SCHEMA_VERSION} {}\n", self.kind).into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(&self.columns).map_err(csv_err)?;
            for row in &self.rows {
                w.write_record(row.iter().map(Cell::render)).map_err(csv_err)?;
            }
            w.flush()?;
        }
        Ok(String::from_utf8(out).expect("CSV of UTF-8 fields"))
    }

    pub fn to_json_value(&self) -> Value {
        serde_json::json!({
            "schema": SCHEMA_VERSION,
            "kind": self.kind,
            "columns": self.columns,
            "rows": self.rows.iter().map(|r| r.iter().map(Cell::json).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => to_json_string(&self.to_json_value()),
        }
    }

    /// Writes `dir/stem.{csv,json}` and returns the path.
    pub fn write(&self, dir: &Path, stem: &str, format: Format) -> Result<std::path::PathBuf> {
        let path = dir.join(format!("{stem}.{}", format.extension()));
        fs::write(&path, self.render(format)?)?;
        Ok(path)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

/// Parses the CSV produced by [`Table::to_csv`] back into header and rows.
pub fn parse_csv(text: &str) -> Result<(String, Vec<String>, Vec<Vec<String>>)> {
    let mut lines = text.splitn(2, '\n');
    let first = lines.next().unwrap_or_default();
    let schema = first
        .strip_prefix("# schema: ")
        .ok_or_else(|| Error::Parse("CSV artifact must start with a '# schema:' line".into()))?
        .to_string();
    let mut r = csv::Reader::from_reader(lines.next().unwrap_or_default().as_bytes());
    let header = r.headers().map_err(|e| Error::Parse(e.to_string()))?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(String::from).collect()))
        .collect::<std::result::Result<Vec<Vec<String>>, _>>()
        .map_err(|e| Error::Parse(e.to_string()))?;
    Ok((schema, header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::random_complex;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [1.0, -0.1, std::f64::consts::PI, 1e-300, 6.02214076e23, -0.0] {
            let s = fmt17(x);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-').replace('.', "");
            assert_eq!(mantissa.len(), 17, "{s}");
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn matrix_json_round_trip_is_exact() {
        let m = random_complex(3, 4, 9);
        let text = to_json_string(&MatrixJson::from_matrix(&m)).unwrap();
        assert!(text.contains("\"schema\":\"krein/1\""));
        assert_eq!(parse_matrix(&text).unwrap(), m);
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["re"].as_array().unwrap().len(), 3);
        assert_eq!(v["re"][0].as_array().unwrap().len(), 4);
    }

    #[test]
    fn matrix_json_rejects_bad_shapes() {
        let bad = r#"{"rows":2,"cols":2,"re":[[1,0],[0]],"im":[[0,0],[0,0]]}"#;
        assert!(matches!(parse_matrix(bad), Err(Error::Parse(_))));
        assert!(matches!(parse_matrix("{"), Err(Error::Parse(_))));
        let ok = r#"{"rows":1,"cols":2,"re":[[1,2]],"im":[[0,-1]]}"#;
        assert_eq!(parse_matrix(ok).unwrap()[(0, 1)], c(2.0, -1.0));
    }

    #[test]
    fn table_renders_both_formats() {
        let mut t = Table::new("demo", &["n", "value"]);
        t.push(vec![Cell::from(3usize), Cell::from(0.5)]);
        let csv = t.to_csv().unwrap();
        assert_eq!(csv, "# schema: krein/1 demo\nn,value\n3,5.0000000000000000e-1\n");
        let (schema, header, rows) = parse_csv(&csv).unwrap();
        assert_eq!(schema, "krein/1 demo");
        assert_eq!(header, vec!["n", "value"]);
        assert_eq!(rows[0][1].parse::<f64>().unwrap(), 0.5);
        let json = t.render(Format::Json).unwrap();
        assert!(json.contains("\"schema\":\"krein/1\"") && json.contains("5.0000000000000000e-1"));
    }

    #[test]
    fn function_specs() {
        assert!(read_function("z^3").is_ok());
        assert!(read_function("abs-theta").is_ok());
        assert!(read_function("no-such-function").is_err());
        let dir = std::env::temp_dir().join(format!("krein-io-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let p = dir.join("f.json");
        fs::write(&p, r#"{"degree":1,"coeffs_re":[0,0,1],"coeffs_im":[0,0,0]}"#).unwrap();
        let f = read_function(p.to_str().unwrap()).unwrap();
        assert!((f.eval_angle(0.3) - crate::spectra::cis(0.3)).norm() < 1e-15);
        fs::remove_dir_all(&dir).unwrap();
    }
}
