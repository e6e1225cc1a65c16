//! Capture CSV: `index,ch0[,ch1]` header then 128 rows of decimal counts.

use miniscope_core::acquisition::SAMPLES_PER_PROBE;
use miniscope_core::SysState;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CsvError {
    #[error("no completed acquisition")]
    NoCapture,
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// Probe columns of one capture, in probe order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsvCapture {
    pub columns: Vec<(usize, Vec<u16>)>,
}

impl CsvCapture {
    pub fn from_sys(sys: &SysState) -> Result<Self, CsvError> {
        let columns: Vec<_> = sys.probe_arrays().into_iter().map(|(p, s)| (p, s.to_vec())).collect();
        if columns.is_empty() {
            return Err(CsvError::NoCapture);
        }
        Ok(Self { columns })
    }

    pub fn probe(&self, probe: usize) -> Option<&[u16]> {
        self.columns.iter().find(|(p, _)| *p == probe).map(|(_, v)| &v[..])
    }
}

pub fn export_csv(cap: &CsvCapture) -> Vec<u8> {
    let mut out = String::from("index");
    for (p, _) in &cap.columns {
        out.push_str(&format!(",ch{p}"));
    }
    out.push('\n');
    let rows = cap.columns.iter().map(|(_, v)| v.len()).min().unwrap_or(0);
    for i in 0..rows {
        out.push_str(&i.to_string());
        for (_, v) in &cap.columns {
            out.push(',');
            out.push_str(&v[i].to_string());
        }
        out.push('\n');
    }
    out.into_bytes()
}

pub fn parse_csv(text: &str) -> Result<CsvCapture, CsvError> {
    let err = |line: usize, reason: &str| CsvError::Parse { line, reason: reason.to_string() };
    let mut lines = text.split_terminator('\n');
    let header = lines.next().ok_or_else(|| err(1, "empty"))?;
    let mut fields = header.split(',');
    if fields.next() != Some("index") {
        return Err(err(1, "header must start with `index`"));
    }
    let mut columns = Vec::new();
    for f in fields {
        let probe = match f {
            "ch0" => 0,
            "ch1" => 1,
            _ => return Err(err(1, "unknown column")),
        };
        columns.push((probe, Vec::with_capacity(SAMPLES_PER_PROBE)));
    }
    if columns.is_empty() {
        return Err(err(1, "no probe columns"));
    }
    for (i, row) in lines.enumerate() {
        let line = i + 2;
        let mut cells = row.split(',');
        if cells.next() != Some(i.to_string().as_str()) {
            return Err(err(line, "bad index"));
        }
        for (_, col) in columns.iter_mut() {
            let v = cells.next().and_then(|c| c.parse::<u16>().ok()).ok_or_else(|| err(line, "bad count"))?;
            col.push(v);
        }
        if cells.next().is_some() {
            return Err(err(line, "extra cells"));
        }
    }
    if columns[0].1.len() != SAMPLES_PER_PROBE {
        return Err(err(columns[0].1.len() + 2, "expected 128 rows"));
    }
    Ok(CsvCapture { columns })
}
