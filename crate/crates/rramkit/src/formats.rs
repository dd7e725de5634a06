//! Text and CSV formats.
//!
//! Numbers are written as the shortest decimal that parses back to the same
//! `f64`, so every writer here round-trips exactly through its reader.

use std::io::{Read, Write};

use rram_core::designflow::UncertaintyReport;
use rram_core::primitives::OrientationRow;
use rram_core::stimulus::{ReadMark, SamplePolicy};
use rram_core::transient::TraceRow;
use rram_core::{Segment, Waveform};

use crate::error::{CliError, CliResult};

pub const TRACE_HEADER: [&str; 4] = ["t_s", "v_V", "i_A", "R_ohm"];
pub const READS_HEADER: [&str; 2] = ["pulse_index", "RS_ohm"];
pub const WAVEFORM_HEADER: &str = "voltage_V,duration_s";
pub const ARRAY_HEADER: [&str; 2] = ["rows", "cols"];
pub const DCOP_HEADER: [&str; 5] = ["orientation", "polarity", "i_A", "v_mem_V", "v_fet_V"];

/// Shortest round-trip decimal; exponent form outside `[1e-4, 1e16)`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn parse_f64(s: &str, what: &str) -> CliResult<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| CliError::config(format!("{what}: '{s}' is not a number")))
}

fn parse_usize(s: &str, what: &str) -> CliResult<usize> {
    s.trim()
        .parse::<usize>()
        .map_err(|_| CliError::config(format!("{what}: '{s}' is not a non-negative integer")))
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::config(format!("malformed CSV: {e}"))
}

fn write_err(e: impl std::fmt::Display) -> CliError {
    CliError::Output {
        path: "<stream>".into(),
        source: std::io::Error::other(e.to_string()),
    }
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

fn reader<R: Read>(input: R, header: &[&str]) -> CliResult<csv::Reader<R>> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(input);
    let got = rd.headers().map_err(csv_err)?.clone();
    if got.iter().ne(header.iter().copied()) {
        return Err(CliError::config(format!(
            "expected header '{}', found '{}'",
            header.join(","),
            got.iter().collect::<Vec<_>>().join(",")
        )));
    }
    Ok(rd)
}

pub fn write_trace<W: Write>(out: W, rows: &[TraceRow]) -> CliResult<()> {
    let mut w = writer(out);
    w.write_record(TRACE_HEADER).map_err(write_err)?;
    for r in rows {
        w.write_record([fmt_f64(r.t), fmt_f64(r.v), fmt_f64(r.i), fmt_f64(r.r)])
            .map_err(write_err)?;
    }
    w.flush().map_err(write_err)
}

pub fn read_trace<R: Read>(input: R) -> CliResult<Vec<TraceRow>> {
    let mut rd = reader(input, &TRACE_HEADER)?;
    rd.records()
        .map(|rec| {
            let rec = rec.map_err(csv_err)?;
            Ok(TraceRow {
                t: parse_f64(&rec[0], "t_s")?,
                v: parse_f64(&rec[1], "v_V")?,
                i: parse_f64(&rec[2], "i_A")?,
                r: parse_f64(&rec[3], "R_ohm")?,
            })
        })
        .collect()
}

pub fn write_reads<W: Write>(out: W, reads: &[(usize, f64)]) -> CliResult<()> {
    let mut w = writer(out);
    w.write_record(READS_HEADER).map_err(write_err)?;
    for (k, rs) in reads {
        w.write_record([k.to_string(), fmt_f64(*rs)]).map_err(write_err)?;
    }
    w.flush().map_err(write_err)
}

pub fn read_reads<R: Read>(input: R) -> CliResult<Vec<(usize, f64)>> {
    let mut rd = reader(input, &READS_HEADER)?;
    rd.records()
        .map(|rec| {
            let rec = rec.map_err(csv_err)?;
            Ok((parse_usize(&rec[0], "pulse_index")?, parse_f64(&rec[1], "RS_ohm")?))
        })
        .collect()
}

/// Resistance matrix: `rows,cols` header, the dimensions, then one line per row.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayMatrix {
    pub rows: usize,
    pub cols: usize,
    /// Row-major resistances (Ohm).
    pub r: Vec<f64>,
}

pub fn write_array<W: Write>(out: W, m: &ArrayMatrix) -> CliResult<()> {
    if m.r.len() != m.rows * m.cols {
        return Err(CliError::config("array matrix size does not match its dimensions"));
    }
    let mut w = csv::WriterBuilder::new()
        .flexible(true)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(ARRAY_HEADER).map_err(write_err)?;
    w.write_record([m.rows.to_string(), m.cols.to_string()]).map_err(write_err)?;
    for row in m.r.chunks(m.cols.max(1)) {
        w.write_record(row.iter().map(|x| fmt_f64(*x))).map_err(write_err)?;
    }
    w.flush().map_err(write_err)
}

pub fn read_array<R: Read>(input: R) -> CliResult<ArrayMatrix> {
    let mut rd = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let head = rd.headers().map_err(csv_err)?.clone();
    if head.iter().ne(ARRAY_HEADER.iter().copied()) {
        return Err(CliError::config("array CSV must start with 'rows,cols'"));
    }
    let mut recs = rd.records();
    let dims = recs
        .next()
        .ok_or_else(|| CliError::config("array CSV is missing its dimensions"))?
        .map_err(csv_err)?;
    if dims.len() != 2 {
        return Err(CliError::config("array dimensions line needs two fields"));
    }
    let rows = parse_usize(&dims[0], "rows")?;
    let cols = parse_usize(&dims[1], "cols")?;
    let mut r = Vec::with_capacity(rows * cols);
    for rec in recs {
        let rec = rec.map_err(csv_err)?;
        if rec.len() != cols {
            return Err(CliError::config(format!("array row has {} entries, expected {cols}", rec.len())));
        }
        for x in rec.iter() {
            r.push(parse_f64(x, "resistance")?);
        }
    }
    if r.len() != rows * cols {
        return Err(CliError::config(format!(
            "array CSV holds {} rows, expected {rows}",
            r.len() / cols.max(1)
        )));
    }
    Ok(ArrayMatrix { rows, cols, r })
}

/// Waveform text: header line, then `voltage,duration` lines. A `#read <k>`
/// line marks the following segment as the sample point of a read taken
/// after `k` programming pulses. Other `#` lines and blank lines are ignored.
pub fn write_waveform<W: Write>(mut out: W, w: &Waveform) -> CliResult<()> {
    let mut marks = w.read_marks.iter().peekable();
    let mut s = String::new();
    s.push_str(WAVEFORM_HEADER);
    s.push('\n');
    for (k, seg) in w.segments.iter().enumerate() {
        while let Some(m) = marks.next_if(|m| m.segment == k) {
            s.push_str(&format!("#read {}\n", m.pulse_index));
        }
        s.push_str(&format!("{},{}\n", fmt_f64(seg.voltage), fmt_f64(seg.duration)));
    }
    if marks.next().is_some() {
        return Err(CliError::config("read mark points past the last segment"));
    }
    out.write_all(s.as_bytes()).map_err(write_err)
}

pub fn parse_waveform(text: &str) -> CliResult<Waveform> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, l)) if l.trim() == WAVEFORM_HEADER => {}
        _ => return Err(CliError::config(format!("waveform must start with '{WAVEFORM_HEADER}'"))),
    }
    let mut w = Waveform::new();
    let mut pending = Vec::new();
    for (n, line) in lines {
        let line = line.trim();
        let at = |msg: String| CliError::config(format!("waveform line {}: {msg}", n + 1));
        if let Some(rest) = line.strip_prefix("#read") {
            let k = rest.trim().parse::<usize>().map_err(|_| at(format!("bad read marker '{line}'")))?;
            pending.push(k);
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let (v, d) = line.split_once(',').ok_or_else(|| at("expected 'voltage,duration'".into()))?;
        let seg = Segment::new(parse_f64(v, "voltage_V")?, parse_f64(d, "duration_s")?)
            .map_err(|e| at(e.to_string()))?;
        for k in pending.drain(..) {
            w.read_marks.push(ReadMark {
                segment: w.segments.len(),
                pulse_index: k,
                policy: SamplePolicy::AtPeak,
            });
        }
        w.push(seg);
    }
    if !pending.is_empty() {
        return Err(CliError::config("waveform ends with a read marker and no segment"));
    }
    Ok(w)
}

pub fn write_dcop<W: Write>(out: W, rows: &[OrientationRow]) -> CliResult<()> {
    let mut w = writer(out);
    w.write_record(DCOP_HEADER).map_err(write_err)?;
    for r in rows {
        w.write_record([
            r.orientation.name().to_string(),
            r.polarity.name().to_string(),
            fmt_f64(r.i),
            fmt_f64(r.v_mem),
            fmt_f64(r.v_fet),
        ])
        .map_err(write_err)?;
    }
    w.flush().map_err(write_err)
}

/// `(label, pulse_index, RS)` rows of a characterization run.
pub fn write_series<W: Write>(out: W, rows: &[(String, usize, f64)]) -> CliResult<()> {
    let mut w = writer(out);
    w.write_record(["series", "pulse_index", "RS_ohm"]).map_err(write_err)?;
    for (label, k, rs) in rows {
        w.write_record([label.clone(), k.to_string(), fmt_f64(*rs)]).map_err(write_err)?;
    }
    w.flush().map_err(write_err)
}

/// Per-device uncertainty margins of a workflow run.
pub fn write_margins<W: Write>(out: W, rows: &[(String, (f64, f64), Option<UncertaintyReport>)]) -> CliResult<()> {
    let mut w = writer(out);
    w.write_record([
        "device",
        "required_lo_ohm",
        "required_hi_ohm",
        "margin_low_ohm",
        "margin_high_ohm",
        "yield_bound",
        "pass",
    ])
    .map_err(write_err)?;
    for (name, (lo, hi), u) in rows {
        let rec = match u {
            Some(u) => [
                name.clone(),
                fmt_f64(*lo),
                fmt_f64(*hi),
                fmt_f64(u.margin_low),
                fmt_f64(u.margin_high),
                fmt_f64(u.yield_bound),
                u.pass.to_string(),
            ],
            None => [
                name.clone(),
                fmt_f64(*lo),
                fmt_f64(*hi),
                String::new(),
                String::new(),
                String::new(),
                "false".into(),
            ],
        };
        w.write_record(rec).map_err(write_err)?;
    }
    w.flush().map_err(write_err)
}
