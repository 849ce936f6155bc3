use std::fs;
use std::path::{Path, PathBuf};

use latwave_core::report::{fmt_f64, to_json_string};
use serde::Serialize;
use serde_json::Value;

use crate::args::Format;
use crate::CliError;

/// Output directory plus the format selector. Reports honor `--format`;
/// data tables (profiles, trajectories, fronts, sweeps) are always CSV.
pub struct Out {
    dir: PathBuf,
    format: Format,
    pub written: Vec<PathBuf>,
}

impl Out {
    /// The directory is created on first write, so runs that fail validation
    /// leave nothing behind.
    pub fn new(dir: &Path, format: Format) -> Self {
        Out {
            dir: dir.to_path_buf(),
            format,
            written: Vec::new(),
        }
    }

    /// Creates the output directory and returns the path of `name` inside it.
    pub fn path(&self, name: &str) -> Result<PathBuf, CliError> {
        fs::create_dir_all(&self.dir).map_err(|e| CliError::io(format!("{}: {e}", self.dir.display())))?;
        Ok(self.dir.join(name))
    }

    fn write(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.path(name)?;
        fs::write(&path, text).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
        self.written.push(path);
        Ok(())
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        if self.format.json() {
            self.write(name, &to_json_string(value))?;
        }
        Ok(())
    }

    pub fn report_csv(&mut self, name: &str, table: &Csv) -> Result<(), CliError> {
        if self.format.csv() {
            self.write(name, &table.buf)?;
        }
        Ok(())
    }

    pub fn data_csv(&mut self, name: &str, table: &Csv) -> Result<(), CliError> {
        self.write(name, &table.buf)
    }

    /// Records a file written by someone else (the core profile writer).
    pub fn note(&mut self, path: PathBuf) {
        self.written.push(path);
    }

    pub fn print_written(&self) {
        for p in &self.written {
            println!("wrote {}", p.display());
        }
    }
}

pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut buf = header.join(",");
        buf.push('\n');
        Csv { buf }
    }

    pub fn row<I: IntoIterator<Item = String>>(&mut self, fields: I) {
        let line: Vec<String> = fields.into_iter().collect();
        self.buf.push_str(&line.join(","));
        self.buf.push('\n');
    }
}

pub fn num(x: f64) -> String {
    fmt_f64(x)
}

pub fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// Free text as a CSV field, quoted when it contains separators.
pub fn text(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\"").replace('\n', " "))
    } else {
        s.to_string()
    }
}

/// Two-column `key,value` table of a report, nested keys joined by `.`.
pub fn key_values<T: Serialize + ?Sized>(value: &T) -> Csv {
    fn walk(prefix: &str, v: &Value, t: &mut Csv) {
        let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
        match v {
            Value::Object(map) => map.iter().for_each(|(k, v)| walk(&key(k), v, t)),
            Value::Array(items) => items.iter().enumerate().for_each(|(k, v)| walk(&key(&k.to_string()), v, t)),
            Value::Null => t.row([text(prefix), String::new()]),
            Value::Bool(b) => t.row([text(prefix), b.to_string()]),
            Value::Number(n) if n.is_f64() => t.row([text(prefix), num(n.as_f64().unwrap())]),
            Value::Number(n) => t.row([text(prefix), n.to_string()]),
            Value::String(s) => t.row([text(prefix), text(s)]),
        }
    }
    let mut t = Csv::new(&["key", "value"]);
    let v = serde_json::to_value(value).expect("reports serialize to JSON values");
    walk("", &v, &mut t);
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_fields() {
        let mut t = Csv::new(&["a", "b", "c"]);
        t.row([num(0.5), opt(None), text("x, \"y\"")]);
        assert_eq!(t.buf, "a,b,c\n5.0000000000000000e-1,,\"x, \"\"y\"\"\"\n");
    }

    #[test]
    fn key_value_flattening() {
        #[derive(Serialize)]
        struct Inner {
            x: f64,
        }
        #[derive(Serialize)]
        struct R {
            n: usize,
            ok: bool,
            v: Vec<f64>,
            inner: Inner,
            missing: Option<f64>,
        }
        let t = key_values(&R {
            n: 3,
            ok: true,
            v: vec![1.0, f64::NAN],
            inner: Inner { x: 0.25 },
            missing: None,
        });
        assert_eq!(
            t.buf,
            "key,value\nn,3\nok,true\nv.0,1.0000000000000000e0\nv.1,\ninner.x,2.5000000000000000e-1\nmissing,\n"
        );
    }
}
