use std::io::Write;
use std::path::Path;

use serde::Serialize;

/// A command's result, rendered once the command has finished so that a
/// failed run never leaves a half-written file behind.
#[derive(Debug)]
pub enum Output {
    /// Pretty-printed JSON, fields in declaration order.
    Json(String),
    Table(Table),
}

#[derive(Debug)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Output {
    pub fn json<T: Serialize>(value: &T) -> Self {
        Output::Json(serde_json::to_string_pretty(value).expect("records serialize to JSON"))
    }

    fn render(&self) -> std::io::Result<Vec<u8>> {
        match self {
            Output::Json(s) => Ok(format!("{s}\n").into_bytes()),
            Output::Table(t) => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&t.header)?;
                for row in &t.rows {
                    w.write_record(row)?;
                }
                w.into_inner().map_err(|e| e.into_error())
            }
        }
    }

    /// Write to `path`, or to standard output when `None`.
    pub fn write(&self, path: Option<&Path>) -> std::io::Result<()> {
        let bytes = self.render()?;
        match path {
            Some(p) => std::fs::write(p, bytes),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(&bytes)?;
                out.flush()
            }
        }
    }
}
