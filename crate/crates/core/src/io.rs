//! Text formats: CSV tables, tab-separated event files and flat
//! `key=value` records.
//!
//! Floating-point fields are written in the shortest form that parses back
//! to the same `f64`, so values survive a write/read cycle bit for bit. The
//! correlation CSV is the exception: it carries 12 significant digits, and a
//! read/write cycle reproduces the file byte for byte.

use std::collections::BTreeMap;
use std::io::{BufRead, Read, Write};

use num_complex::Complex64;

use crate::analysis::CoincidenceHistogram;
use crate::counting::{ChannelId, EventStream};
use crate::error::{Error, Result};
use crate::filter::SpectralFunction;
use crate::scaling::OdScanPoint;
use crate::waveform::{CorrelationFunction, TimeGrid};

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Parse { line: 0, msg: e.to_string() }
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse { line, msg: e.to_string() }
}

fn f(v: f64) -> String {
    format!("{v:e}")
}

fn f12(v: f64) -> String {
    format!("{v:.11e}")
}

/// Reads a headed CSV, checks the header, and returns numeric rows with their
/// line numbers.
fn read_table<R: Read>(reader: R, header: &[&str]) -> Result<Vec<(usize, Vec<f64>)>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let found: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(|s| s.trim().to_string()).collect();
    if found != header {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected header {}, found {}", header.join(","), found.join(",")),
        });
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let vals = rec
            .iter()
            .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Parse { line, msg: format!("{s:?}: {e}") }))
            .collect::<Result<Vec<f64>>>()?;
        rows.push((line, vals));
    }
    Ok(rows)
}

fn write_table<W: Write>(writer: W, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(io_err)
}

/// Uniform grid recovered from a column of sample positions.
fn grid_from(line: usize, xs: &[f64], scale: f64) -> Result<TimeGrid> {
    if xs.len() < 2 {
        return Err(Error::Parse { line, msg: "need at least 2 rows".into() });
    }
    let dt = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
    for (j, x) in xs.iter().enumerate() {
        if (x - (xs[0] + j as f64 * dt)).abs() > 1e-6 * dt.abs() {
            return Err(Error::Parse { line: line + j, msg: "sample positions are not uniformly spaced".into() });
        }
    }
    TimeGrid::new(xs[0] * scale, dt * scale, xs.len())
}

pub const CORRELATION_HEADER: [&str; 2] = ["tau_s", "value"];

pub fn write_correlation_csv<W: Write>(writer: W, corr: &CorrelationFunction) -> Result<()> {
    // rounding residue of the τ = 0 sample is printed as an exact zero
    let dt = corr.grid().dt();
    let snap = move |t: f64| if t.abs() < 1e-6 * dt { 0.0 } else { t };
    write_table(writer, &CORRELATION_HEADER, corr.iter().map(|(t, v)| vec![f12(snap(t)), f12(v)]))
}

pub fn read_correlation_csv<R: Read>(reader: R) -> Result<CorrelationFunction> {
    let rows = read_table(reader, &CORRELATION_HEADER)?;
    let tau: Vec<f64> = rows.iter().map(|r| r.1[0]).collect();
    let grid = grid_from(2, &tau, 1.0)?;
    CorrelationFunction::new(grid, rows.into_iter().map(|r| r.1[1]).collect())
}

pub const SPECTRAL_HEADER: [&str; 3] = ["omega_rad_s", "re", "im"];

pub fn write_spectral_csv<W: Write>(writer: W, spec: &SpectralFunction) -> Result<()> {
    write_table(
        writer,
        &SPECTRAL_HEADER,
        spec.values().iter().enumerate().map(|(k, v)| vec![f(spec.omega(k)), f(v.re), f(v.im)]),
    )
}

pub fn read_spectral_csv<R: Read>(reader: R) -> Result<SpectralFunction> {
    let rows = read_table(reader, &SPECTRAL_HEADER)?;
    let omega: Vec<f64> = rows.iter().map(|r| r.1[0]).collect();
    let grid = grid_from(2, &omega, 1.0)?;
    SpectralFunction::new(grid.t_start(), grid.dt(), rows.into_iter().map(|r| Complex64::new(r.1[1], r.1[2])).collect())
}

pub const OD_SCAN_HEADER: [&str; 4] = ["od", "n_s", "n_i", "n_c"];

pub fn write_od_scan_csv<W: Write>(writer: W, points: &[OdScanPoint]) -> Result<()> {
    write_table(
        writer,
        &OD_SCAN_HEADER,
        points.iter().map(|p| vec![f(p.od), f(p.n_signal), f(p.n_idler), f(p.n_coincidence)]),
    )
}

pub fn read_od_scan_csv<R: Read>(reader: R) -> Result<Vec<OdScanPoint>> {
    read_table(reader, &OD_SCAN_HEADER)?
        .into_iter()
        .map(|(line, r)| {
            let p = OdScanPoint { od: r[0], n_signal: r[1], n_idler: r[2], n_coincidence: r[3] };
            p.validate().map_err(|e| Error::Parse { line, msg: e.to_string() })?;
            Ok(p)
        })
        .collect()
}

pub const HISTOGRAM_HEADER: [&str; 3] = ["tau_ns", "counts", "g2"];

/// One row per bin: bin centre in ns, raw count, normalised value. Bin
/// centres sit on the picosecond tick grid and are written with 3 decimals.
pub fn write_histogram_csv<W: Write>(writer: W, hist: &CoincidenceHistogram, g2: &[f64]) -> Result<()> {
    if g2.len() != hist.len() {
        return Err(Error::Config(format!("{} g2 values for {} bins", g2.len(), hist.len())));
    }
    write_table(
        writer,
        &HISTOGRAM_HEADER,
        hist.counts()
            .iter()
            .zip(g2)
            .enumerate()
            .map(|(k, (c, g))| vec![format!("{:.3}", hist.bin_center(k) * 1e9), c.to_string(), f(*g)]),
    )
}

pub fn read_histogram_csv<R: Read>(reader: R) -> Result<(CoincidenceHistogram, Vec<f64>)> {
    let rows = read_table(reader, &HISTOGRAM_HEADER)?;
    let tau: Vec<f64> = rows.iter().map(|r| r.1[0]).collect();
    let grid = grid_from(2, &tau, 1e-9)?;
    let mut counts = Vec::with_capacity(rows.len());
    let mut g2 = Vec::with_capacity(rows.len());
    for (line, r) in rows {
        if !(r[1] >= 0.0 && r[1].fract() == 0.0) {
            return Err(Error::Parse { line, msg: format!("count {} is not a nonnegative integer", r[1]) });
        }
        counts.push(r[1] as u64);
        g2.push(r[2]);
    }
    let hist = CoincidenceHistogram::new(grid.dt(), grid.t_start() - 0.5 * grid.dt(), counts)?;
    Ok((hist, g2))
}

/// `channel_id<TAB>timestamp_ns` per click, streams written one after another.
pub fn write_events<W: Write>(mut writer: W, streams: &[EventStream]) -> Result<()> {
    let mut sorted: Vec<&EventStream> = streams.iter().collect();
    sorted.sort_by_key(|s| s.channel());
    for s in sorted {
        for &t in s.timestamps() {
            writeln!(writer, "{}\t{}.{:03}", s.channel().0, t / 1000, t % 1000).map_err(io_err)?;
        }
    }
    writer.flush().map_err(io_err)
}

fn parse_ticks(line: usize, s: &str) -> Result<i64> {
    let bad = || Error::Parse {
        line,
        msg: format!("timestamp {s:?} is not a nonnegative decimal ns value with 3 fractional digits"),
    };
    let (whole, frac) = s.split_once('.').ok_or_else(bad)?;
    if frac.len() != 3
        || !frac.bytes().all(|b| b.is_ascii_digit())
        || whole.is_empty()
        || !whole.bytes().all(|b| b.is_ascii_digit())
    {
        return Err(bad());
    }
    let w: i64 = whole.parse().map_err(|_| bad())?;
    let f: i64 = frac.parse().map_err(|_| bad())?;
    Ok(w * 1000 + f)
}

/// Reads an event file into one stream per channel id, in channel order.
pub fn read_events<R: BufRead>(reader: R, duration: f64) -> Result<Vec<EventStream>> {
    let mut by_channel: BTreeMap<u32, Vec<i64>> = BTreeMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        let (ch, ts) = line
            .split_once('\t')
            .ok_or_else(|| Error::Parse { line: line_no, msg: "expected channel_id<TAB>timestamp_ns".into() })?;
        let ch: u32 = ch.trim().parse().map_err(|e| Error::Parse { line: line_no, msg: format!("channel id: {e}") })?;
        let t = parse_ticks(line_no, ts.trim())?;
        let stream = by_channel.entry(ch).or_default();
        if stream.last().is_some_and(|&last| t <= last) {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("channel {ch} timestamps are not strictly increasing"),
            });
        }
        stream.push(t);
    }
    by_channel.into_iter().map(|(ch, ts)| EventStream::new(ChannelId(ch), ts, duration)).collect()
}

/// Writes `key=value` lines in the given order.
pub fn write_key_values<W: Write>(mut writer: W, pairs: &[(String, String)]) -> Result<()> {
    for (k, v) in pairs {
        if k.contains('=') || k.contains('\n') || v.contains('\n') {
            return Err(Error::Config(format!("key {k:?} or its value cannot be written as key=value")));
        }
        writeln!(writer, "{k}={v}").map_err(io_err)?;
    }
    writer.flush().map_err(io_err)
}

/// Parses `key=value` lines. `#` starts a comment, blank lines are skipped and
/// a `[section]` line prefixes the following keys with `section.`.
pub fn read_key_values<R: BufRead>(reader: R) -> Result<Vec<(String, String)>> {
    let mut section = String::new();
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(io_err)?;
        let text = line.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        if let Some(name) = text.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            section = name.trim().to_string();
            continue;
        }
        let (k, v) = text
            .split_once('=')
            .ok_or_else(|| Error::Parse { line: line_no, msg: format!("expected key=value, found {text:?}") })?;
        let k = k.trim();
        if k.is_empty() {
            return Err(Error::Parse { line: line_no, msg: "empty key".into() });
        }
        let key = if section.is_empty() { k.to_string() } else { format!("{section}.{k}") };
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}
