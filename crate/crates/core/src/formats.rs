//! Trace and ground-truth file formats.
//!
//! Text files are CSV with a header: traces use `t,r,g,b` (seconds, mean
//! channel intensities) and ground truth uses `t,ppg[,resp]`. A framed binary
//! variant holds the same columns for large runs: the magic `PSTRACE\0`, a
//! little-endian `u16` version, `u16` column count, `u64` row count, then the
//! columns one after another as little-endian `f64`.
//!
//! Readers resample every signal onto the canonical 30 Hz grid.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::hrv::{IbiSeries, PeakTrain};
use crate::signal::{resample_timestamps, RgbTrace, TimeSeries, CANONICAL_FS};

pub const BINARY_MAGIC: &[u8; 8] = b"PSTRACE\0";
pub const BINARY_VERSION: u16 = 1;

pub const TRACE_HEADER: [&str; 4] = ["t", "r", "g", "b"];

/// Reference waveforms for one chunk.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub ppg: TimeSeries,
    pub resp: Option<TimeSeries>,
}

/// Raw columns as read from disk, before resampling.
#[derive(Debug, Clone, PartialEq)]
pub struct Columns {
    pub names: Vec<String>,
    pub data: Vec<Vec<f64>>,
}

fn parse_err(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut buf))
        .map_err(|e| Error::io(path, e))?;
    Ok(buf)
}

/// Reads a CSV or framed binary file into named columns. Binary files carry
/// no names; they get `expected` names by position.
pub fn read_columns(path: &Path, expected: &[&str]) -> Result<Columns> {
    let bytes = read_bytes(path)?;
    if bytes.starts_with(BINARY_MAGIC) {
        let data = decode_binary(path, &bytes)?;
        let names = expected.iter().take(data.len()).map(|s| s.to_string()).collect();
        return Ok(Columns { names, data });
    }
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(bytes.as_slice());
    let names: Vec<String> = reader
        .headers()
        .map_err(|e| parse_err(path, 1, e.to_string()))?
        .iter()
        .map(|h| h.to_ascii_lowercase())
        .collect();
    let mut data = vec![Vec::new(); names.len()];
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        for (col, field) in data.iter_mut().zip(record.iter()) {
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(path, line, format!("`{field}` is not a number")))?;
            if !v.is_finite() {
                return Err(parse_err(path, line, format!("non-finite value `{field}`")));
            }
            col.push(v);
        }
    }
    Ok(Columns { names, data })
}

fn decode_binary(path: &Path, bytes: &[u8]) -> Result<Vec<Vec<f64>>> {
    let header = BINARY_MAGIC.len() + 2 + 2 + 8;
    if bytes.len() < header {
        return Err(parse_err(path, 0, "truncated binary header"));
    }
    let version = u16::from_le_bytes([bytes[8], bytes[9]]);
    if version != BINARY_VERSION {
        return Err(parse_err(path, 0, format!("unsupported binary version {version}")));
    }
    let ncols = u16::from_le_bytes([bytes[10], bytes[11]]) as usize;
    let nrows = u64::from_le_bytes(bytes[12..20].try_into().expect("8 bytes")) as usize;
    let body = &bytes[header..];
    if ncols.checked_mul(nrows).and_then(|c| c.checked_mul(8)) != Some(body.len()) {
        return Err(parse_err(
            path,
            0,
            format!("binary body of {} bytes does not hold {ncols} x {nrows} f64", body.len()),
        ));
    }
    Ok((0..ncols)
        .map(|c| {
            body[c * nrows * 8..(c + 1) * nrows * 8]
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
                .collect()
        })
        .collect())
}

pub fn write_binary(path: &Path, columns: &[&[f64]]) -> Result<()> {
    let nrows = columns.first().map_or(0, |c| c.len());
    if columns.iter().any(|c| c.len() != nrows) {
        return Err(Error::param("binary columns must have equal length"));
    }
    let ncols = u16::try_from(columns.len()).map_err(|_| Error::param("too many columns"))?;
    let mut out = Vec::with_capacity(20 + columns.len() * nrows * 8);
    out.extend_from_slice(BINARY_MAGIC);
    out.extend_from_slice(&BINARY_VERSION.to_le_bytes());
    out.extend_from_slice(&ncols.to_le_bytes());
    out.extend_from_slice(&(nrows as u64).to_le_bytes());
    for col in columns {
        for v in *col {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn column<'a>(path: &Path, cols: &'a Columns, name: &str) -> Result<&'a [f64]> {
    cols.names
        .iter()
        .position(|n| n == name)
        .map(|i| cols.data[i].as_slice())
        .ok_or_else(|| parse_err(path, 1, format!("missing column `{name}`")))
}

fn check_times(path: &Path, t: &[f64]) -> Result<()> {
    if t.len() < 2 {
        return Err(parse_err(path, 0, "need at least two samples"));
    }
    if let Some(i) = t.windows(2).position(|w| w[1] <= w[0]) {
        // header is line 1, first sample line 2
        return Err(parse_err(path, i as u64 + 3, "timestamps must be strictly increasing"));
    }
    Ok(())
}

/// Samples already on the canonical grid are kept bit-exact.
fn to_canonical(t: &[f64], v: &[f64]) -> Result<TimeSeries> {
    let dt = 1.0 / CANONICAL_FS;
    let on_grid = t
        .iter()
        .enumerate()
        .all(|(i, ti)| (ti - t[0] - i as f64 * dt).abs() < 1e-6);
    if on_grid {
        TimeSeries::new(v.to_vec(), CANONICAL_FS, t[0])
    } else {
        resample_timestamps(t, v, CANONICAL_FS)
    }
}

pub fn read_trace(path: &Path) -> Result<RgbTrace> {
    let cols = read_columns(path, &TRACE_HEADER)?;
    let t = column(path, &cols, "t")?;
    check_times(path, t)?;
    let r = to_canonical(t, column(path, &cols, "r")?)?;
    let g = to_canonical(t, column(path, &cols, "g")?)?;
    let b = to_canonical(t, column(path, &cols, "b")?)?;
    RgbTrace::new(r.into_values(), g.into_values(), b.into_values(), CANONICAL_FS, t[0])
        .map_err(|e| parse_err(path, 0, e.to_string()))
}

pub fn read_ground_truth(path: &Path) -> Result<GroundTruth> {
    let cols = read_columns(path, &["t", "ppg", "resp"])?;
    let t = column(path, &cols, "t")?;
    check_times(path, t)?;
    let ppg = to_canonical(t, column(path, &cols, "ppg")?)?;
    let resp = match column(path, &cols, "resp") {
        Ok(r) => Some(to_canonical(t, r)?),
        Err(_) => None,
    };
    Ok(GroundTruth { ppg, resp })
}

/// Writes a CSV with the given header; every row is produced by `row(i)`.
pub fn write_csv(path: &Path, header: &[&str], n: usize, row: impl Fn(usize) -> Vec<String>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "{}", header.join(",")).map_err(io)?;
    for i in 0..n {
        writeln!(w, "{}", row(i).join(",")).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn write_trace(path: &Path, trace: &RgbTrace) -> Result<()> {
    let dt = 1.0 / trace.fs();
    write_csv(path, &TRACE_HEADER, trace.len(), |i| {
        vec![
            format!("{}", trace.t0() + i as f64 * dt),
            format!("{}", trace.r()[i]),
            format!("{}", trace.g()[i]),
            format!("{}", trace.b()[i]),
        ]
    })
}

pub fn write_ground_truth(path: &Path, ppg: &TimeSeries, resp: Option<&TimeSeries>) -> Result<()> {
    let n = resp.map_or(ppg.len(), |r| r.len().min(ppg.len()));
    let header: &[&str] = if resp.is_some() { &["t", "ppg", "resp"] } else { &["t", "ppg"] };
    write_csv(path, header, n, |i| {
        let mut row = vec![format!("{}", ppg.time_at(i)), format!("{}", ppg.values()[i])];
        if let Some(r) = resp {
            row.push(format!("{}", r.values()[i]));
        }
        row
    })
}

pub fn write_peaks(path: &Path, peaks: &PeakTrain) -> Result<()> {
    write_csv(path, &["t"], peaks.len(), |i| vec![format!("{}", peaks.times_s[i])])
}

pub fn write_ibis(path: &Path, ibis: &IbiSeries) -> Result<()> {
    write_csv(path, &["onset_s", "ibi_ms"], ibis.len(), |i| {
        vec![format!("{}", ibis.onset_times_s[i]), format!("{}", ibis.ibis_ms[i])]
    })
}

pub fn read_ibis(path: &Path) -> Result<IbiSeries> {
    let cols = read_columns(path, &["onset_s", "ibi_ms"])?;
    let onsets = column(path, &cols, "onset_s")?.to_vec();
    let ibis = column(path, &cols, "ibi_ms")?.to_vec();
    IbiSeries::new(ibis, onsets).map_err(|e| parse_err(path, 0, e.to_string()))
}
