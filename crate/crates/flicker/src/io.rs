//! CSV sample files and atomic report output.

use std::io::Write;
use std::path::Path;

use flicker_core::SampleSeries;

use crate::error::{Error, Result};

pub const SERIES_HEADER: [&str; 2] = ["time_s", "voltage_pu"];

/// Relative tolerance on the spacing between consecutive timestamps.
pub const SPACING_TOLERANCE: f64 = 1e-6;

/// Reads a `time_s,voltage_pu` file. The sample rate is inferred from the
/// timestamps, which must be strictly increasing and uniformly spaced.
pub fn read_series(path: &Path) -> Result<SampleSeries> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_series(file, path)
}

pub fn parse_series<R: std::io::Read>(reader: R, path: &Path) -> Result<SampleSeries> {
    let parse_err = |line: u64, message: String| Error::Parse {
        path: path.to_owned(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != SERIES_HEADER {
        return Err(parse_err(
            1,
            format!(
                "expected header `time_s,voltage_pu`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }

    let mut times = Vec::new();
    let mut samples = Vec::new();
    let mut lines = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize, name: &str| -> Result<f64> {
            let raw = record.get(i).unwrap_or("");
            let v: f64 = raw
                .parse()
                .map_err(|_| parse_err(line, format!("{name} `{raw}` is not a number")))?;
            if !v.is_finite() {
                return Err(parse_err(line, format!("{name} is not finite")));
            }
            Ok(v)
        };
        times.push(field(0, "time_s")?);
        samples.push(field(1, "voltage_pu")?);
        lines.push(line);
    }
    if times.len() < 2 {
        return Err(Error::Data(format!(
            "{}: need at least 2 samples to infer the sample rate, found {}",
            path.display(),
            times.len()
        )));
    }

    let dt = times[1] - times[0];
    if !(dt > 0.0) {
        return Err(parse_err(
            lines[1],
            "timestamps must be strictly increasing".into(),
        ));
    }
    for i in 2..times.len() {
        let step = times[i] - times[i - 1];
        if (step - dt).abs() > SPACING_TOLERANCE * dt {
            return Err(parse_err(
                lines[i],
                format!("non-uniform spacing: step {step} s, expected {dt} s"),
            ));
        }
    }
    let period = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    let rate = 1.0 / period;
    let start_index = (times[0] * rate).round() as i64;
    Ok(SampleSeries::new(start_index, rate, samples)?)
}

pub fn format_series(series: &SampleSeries) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SERIES_HEADER).map_err(csv_err)?;
    for (i, v) in series.samples.iter().enumerate() {
        w.write_record([series.time(i).to_string(), v.to_string()])
            .map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Data(e.to_string()))
}

pub fn write_series(path: &Path, series: &SampleSeries) -> Result<()> {
    write_atomic(path, &format_series(series)?)
}

/// Writes `time_s,envelope_1..envelope_N` rows.
pub fn format_trace(rate: f64, frames: &[(i64, Vec<f64>)]) -> Result<Vec<u8>> {
    let n = frames.first().map_or(0, |(_, e)| e.len());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["time_s".to_string()];
    header.extend((1..=n).map(|i| format!("envelope_{i}")));
    w.write_record(&header).map_err(csv_err)?;
    for (k, envelopes) in frames {
        let mut row = vec![(*k as f64 / rate).to_string()];
        row.extend(envelopes.iter().map(|v| v.to_string()));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Data(e.to_string()))
}

/// Writes through a temporary file in the same directory, then renames it
/// over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Data(e.to_string())
}
