//! Command implementations. Each returns the text for stdout and the files it
//! wrote; the binary maps the result to an exit code.

use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rram_core::crossbar::{ir_drop_report, program_cell, read_cell, CellDevice, CellTemplate};
use rram_core::designflow::{run_workflow, CornerDemand, CornerExecutor, DEVICE_NAMES};
use rram_core::primitives::{compare_orientations, worst_case_linearize, Orientation};
use rram_core::stimulus::{build_characterization, CharacterizationMode};
use rram_core::transient::{extract_rs_series, run_device, RunOptions};

use crate::config::{
    characterization_plan, simulate_waveform, ArrayConfig, CellConfig, ConfigFile, ModelConfig, RunConfig,
};
use crate::error::{CliError, CliResult};
use crate::formats::{self, fmt_f64, ArrayMatrix};
use crate::Outcome;

#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub outcome: Outcome,
    pub stdout: String,
    /// Human-readable remarks for stderr.
    pub notes: Vec<String>,
    pub files: Vec<PathBuf>,
}

impl CommandOutput {
    fn new() -> Self {
        CommandOutput {
            outcome: Outcome::Pass,
            stdout: String::new(),
            notes: Vec::new(),
            files: Vec::new(),
        }
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.stdout.push_str(s.as_ref());
        self.stdout.push('\n');
    }

    /// Create `out/name`, hand a buffered writer to `f`, and record the path.
    fn write(&mut self, out: &Path, name: &str, f: impl FnOnce(BufWriter<File>) -> CliResult<()>) -> CliResult<()> {
        std::fs::create_dir_all(out).map_err(|source| CliError::Output {
            path: out.to_path_buf(),
            source,
        })?;
        let path = out.join(name);
        let file = File::create(&path).map_err(|source| CliError::Output {
            path: path.clone(),
            source,
        })?;
        f(BufWriter::new(file)).map_err(|e| match e {
            CliError::Output { source, .. } => CliError::Output {
                path: path.clone(),
                source,
            },
            other => other,
        })?;
        self.files.push(path);
        Ok(())
    }
}

/// Transient run of one device: `trace.csv` and `reads.csv`.
pub fn simulate(config: &Path, out: &Path) -> CliResult<CommandOutput> {
    let cfg = ConfigFile::load(config)?;
    let model = ModelConfig::from_config(&cfg)?;
    let run = RunConfig::from_config(&cfg)?;
    let w = simulate_waveform(&cfg, model.params.v_guard)?;
    let opts = RunOptions {
        t_s: run.timestep,
        decimate: run.decimate,
    };
    let trace = run_device(&model.params, model.state, &w, opts)?;
    let reads = extract_rs_series(&trace);
    let mut o = CommandOutput::new();
    o.write(out, "trace.csv", |f| formats::write_trace(f, &trace.rows))?;
    o.write(out, "reads.csv", |f| formats::write_reads(f, &reads))?;
    o.line(format!("model: {}", model.name));
    o.line(format!("steps: {}", trace.rows.len()));
    o.line(format!("reads: {}", reads.len()));
    o.line(format!("initial_R_ohm: {}", fmt_f64(model.state.r)));
    o.line(format!("final_R_ohm: {}", fmt_f64(trace.final_r)));
    if let Some((_, rs)) = reads.last() {
        o.line(format!("last_RS_ohm: {}", fmt_f64(*rs)));
    }
    Ok(o)
}

/// One series per bias or width, all starting from the configured state.
pub fn characterize<E: CornerExecutor>(
    config: &Path,
    mode: Option<CharacterizationMode>,
    out: &Path,
    exec: &E,
) -> CliResult<CommandOutput> {
    let cfg = ConfigFile::load(config)?;
    let model = ModelConfig::from_config(&cfg)?;
    let run = RunConfig::from_config(&cfg)?;
    let plan = characterization_plan(&cfg, mode, model.params.v_guard)?;
    let series = build_characterization(&plan)?;
    let opts = RunOptions {
        t_s: run.timestep,
        decimate: usize::MAX,
    };
    let runs = exec.map(series.len(), |k| {
        run_device(&model.params, model.state, &series[k].waveform, opts).map(|tr| extract_rs_series(&tr))
    });
    let mut rows = Vec::new();
    let mut o = CommandOutput::new();
    o.line(format!("mode: {}", plan.mode.name()));
    for (s, reads) in series.iter().zip(runs) {
        let reads = reads?;
        let first = reads.first().map_or(f64::NAN, |r| r.1);
        let last = reads.last().map_or(f64::NAN, |r| r.1);
        o.line(format!("{}: RS {} -> {} ohm", s.label, fmt_f64(first), fmt_f64(last)));
        rows.extend(reads.into_iter().map(|(k, rs)| (s.label.clone(), k, rs)));
    }
    let name = format!("characterize_{}.csv", plan.mode.name());
    o.write(out, &name, |f| formats::write_series(f, &rows))?;
    Ok(o)
}

/// Which orientations `dcop` reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrientationChoice {
    Both,
    One(Orientation),
}

/// 1T1R operating points into the configured load: `dcop.csv` and the same
/// CSV on stdout.
pub fn dcop(config: &Path, which: OrientationChoice, out: &Path) -> CliResult<CommandOutput> {
    let cfg = ConfigFile::load(config)?;
    let cell = CellConfig::from_config(&cfg)?;
    let rep = compare_orientations(&cell.fet, cell.load, cell.vdd)?;
    let rows: Vec<_> = rep
        .rows
        .iter()
        .filter(|r| match which {
            OrientationChoice::Both => true,
            OrientationChoice::One(o) => r.orientation == o,
        })
        .copied()
        .collect();
    let mut o = CommandOutput::new();
    let mut buf = Vec::new();
    formats::write_dcop(&mut buf, &rows)?;
    o.stdout = String::from_utf8(buf).expect("CSV output is UTF-8");
    o.write(out, "dcop.csv", |f| formats::write_dcop(f, &rows))?;
    o.notes.push(format!(
        "min(fwd,rev) winner: {}; max(fwd,rev) winner: {}; recommended: {}",
        rep.min_winner.name(),
        rep.max_winner.name(),
        rep.recommended().name()
    ));
    Ok(o)
}

/// What `crossbar` should do after building the array.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CrossbarArgs {
    pub rows: Option<usize>,
    pub cols: Option<usize>,
    pub read: Option<(usize, usize)>,
    pub program: Option<(usize, usize)>,
    pub ir_drop: bool,
}

const DEFAULT_ARRAY: &str = "[array]\ntemplate = passive\nrho_ohm_sq = 0\ncell_ohm = 1000\nread_v = 0.2\n";

/// Crossbar read, program and IR-drop reports. Without a config file the
/// array is passive with 1 kOhm linear cells and ideal lines.
pub fn crossbar(config: Option<&Path>, args: &CrossbarArgs, out: &Path) -> CliResult<CommandOutput> {
    let cfg = match config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::parse(DEFAULT_ARRAY, PathBuf::new(), "built-in array".into())?,
    };
    let mut ac = ArrayConfig::from_config(&cfg, (args.rows, args.cols))?;
    let spec = ac.spec;
    let mut o = CommandOutput::new();
    o.line(format!("array: {}x{} {}", spec.rows, spec.cols, template_name(&spec.template)));
    o.line(format!("word_line_ohm: {}", fmt_f64(spec.word_line_total())));
    o.line(format!("bit_line_ohm: {}", fmt_f64(spec.bit_line_total())));
    o.line(format!("terminals: {}", spec.terminal_count()));
    if args.read.is_none() && args.program.is_none() && !args.ir_drop {
        return Err(CliError::config("crossbar needs --read, --program or --ir-drop"));
    }
    if let Some((r, c)) = args.read {
        check_cell(&ac, r, c)?;
        let rep = read_cell(&spec, &ac.state, r, c, ac.v_read)?;
        o.line(format!("read ({r},{c}) at {} V", fmt_f64(ac.v_read)));
        o.line(format!("RS_estimate_ohm: {}", fmt_f64(rep.rs_estimate)));
        o.line(format!("R_true_ohm: {}", fmt_f64(rep.r_true)));
        o.line(format!("error_pct: {}", fmt_f64(rep.error_pct)));
        let v_read = ac.v_read;
        o.write(out, "crossbar_read.csv", |f| {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(f);
            let rec = |w: &mut csv::Writer<_>, fields: &[String]| w.write_record(fields).map_err(io_err);
            rec(
                &mut w,
                &[
                    "row", "col", "v_read_V", "i_read_A", "RS_estimate_ohm", "R_true_ohm", "error_pct", "v_device_V",
                ]
                .map(String::from),
            )?;
            rec(
                &mut w,
                &[
                    r.to_string(),
                    c.to_string(),
                    fmt_f64(v_read),
                    fmt_f64(rep.i_read),
                    fmt_f64(rep.rs_estimate),
                    fmt_f64(rep.r_true),
                    fmt_f64(rep.error_pct),
                    fmt_f64(rep.v_device),
                ],
            )?;
            w.flush().map_err(|e| io_err(e.into()))
        })?;
    }
    if args.ir_drop {
        let r_wc = match ac.r_wc {
            Some(r) => r,
            None => derived_r_wc(&ac)?,
        };
        let rep = ir_drop_report(&spec, r_wc, ac.v_drive)?;
        o.line(format!("ir_drop r_wc_ohm: {}", fmt_f64(r_wc)));
        o.line(format!("delivered_V: {}", fmt_f64(rep.delivered)));
        o.line(format!("hand_formula_V: {}", fmt_f64(rep.hand_formula)));
        let v_drive = ac.v_drive;
        o.write(out, "ir_drop.csv", |f| {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(f);
            w.write_record(["rows", "cols", "word_line_ohm", "bit_line_ohm", "r_wc_ohm", "drive_V", "delivered_V", "hand_formula_V"])
                .map_err(io_err)?;
            w.write_record([
                spec.rows.to_string(),
                spec.cols.to_string(),
                fmt_f64(spec.word_line_total()),
                fmt_f64(spec.bit_line_total()),
                fmt_f64(r_wc),
                fmt_f64(v_drive),
                fmt_f64(rep.delivered),
                fmt_f64(rep.hand_formula),
            ])
            .map_err(io_err)?;
            w.flush().map_err(|e| io_err(e.into()))
        })?;
    }
    if let Some((r, c)) = args.program {
        check_cell(&ac, r, c)?;
        let run = RunConfig::from_config(&cfg)?;
        let v_guard = match ac.state.get(r, c).device {
            CellDevice::Memristor(p) => p.v_guard,
            _ => return Err(CliError::config("--program needs memristor cells (set [array] device)")),
        };
        let pulse = simulate_waveform(&cfg, v_guard)?;
        let rep = program_cell(&spec, &mut ac.state, r, c, &pulse, run.timestep)?;
        o.line(format!("program ({r},{c}): {} steps", rep.steps));
        o.line(format!(
            "target_ohm: {} -> {}",
            fmt_f64(rep.target_before),
            fmt_f64(rep.target_after)
        ));
        o.line(format!("peak_device_V: {}", fmt_f64(rep.peak_device_voltage)));
        if let Some((dr, dc)) = rep.disturb_cell {
            o.line(format!("max_disturb_ohm: {} at ({dr},{dc})", fmt_f64(rep.disturb)));
        }
        for v in &rep.violations {
            o.line(format!(
                "SOAC violation: {} {:?} |{}| V > {} V",
                v.device,
                v.pair,
                fmt_f64(v.value),
                fmt_f64(v.rating)
            ));
        }
        if rep.aborted() {
            o.line("programming aborted before the violating step");
            o.outcome = Outcome::Fail;
        }
        let m = ArrayMatrix {
            rows: ac.state.rows,
            cols: ac.state.cols,
            r: ac.state.resistances(),
        };
        o.write(out, "state_after.csv", |f| formats::write_array(f, &m))?;
    }
    Ok(o)
}

fn io_err(e: csv::Error) -> CliError {
    CliError::Output {
        path: PathBuf::new(),
        source: std::io::Error::other(e.to_string()),
    }
}

fn check_cell(ac: &ArrayConfig, r: usize, c: usize) -> CliResult<()> {
    if r >= ac.spec.rows || c >= ac.spec.cols {
        return Err(CliError::config(format!(
            "cell ({r},{c}) outside a {}x{} array",
            ac.spec.rows, ac.spec.cols
        )));
    }
    Ok(())
}

/// Worst-case line of the lowest-resistance device over `[-drive, drive]`.
fn derived_r_wc(ac: &ArrayConfig) -> CliResult<f64> {
    let v = ac.v_drive.abs();
    let mut best = f64::INFINITY;
    for cell in &ac.state.cells {
        let r = match cell.device {
            CellDevice::Memristor(p) => {
                let samples: Vec<(f64, f64)> = (-200..=200)
                    .map(|k| {
                        let x = match k {
                            -200 => -v,
                            200 => v,
                            _ => v * k as f64 / 200.0,
                        };
                        p.current(cell.state.r_floor, x).map(|i| (x, i))
                    })
                    .collect::<Result<_, _>>()?;
                worst_case_linearize(&samples, (-v, v))?
            }
            CellDevice::Linear => cell.state.r,
            CellDevice::Open => continue,
        };
        best = best.min(r);
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(CliError::config("IR-drop report needs r_wc_ohm or at least one device"))
    }
}

/// Design-flow verification: stdout report plus `verify_margins.csv`.
pub fn verify<E: CornerExecutor>(config: &Path, out: &Path, exec: &E) -> CliResult<CommandOutput> {
    let cfg = ConfigFile::load(config)?;
    let wf = crate::config::workflow_from(&cfg)?;
    let rep = run_workflow(&wf, exec)?;
    let mut o = CommandOutput::new();
    o.line(format!("stage: {}", rep.stage.name()));
    o.line(format!("pass: {}", rep.pass));
    o.line(format!("corner_iterations: {}", rep.iterations));
    let outs: Vec<String> = rep.nominal_outputs.iter().map(|v| fmt_f64(*v)).collect();
    o.line(format!("nominal_outputs_V: {}", outs.join(", ")));
    let mut margins = Vec::new();
    for (d, name) in DEVICE_NAMES.iter().enumerate() {
        let (lo, hi) = rep.windows[d];
        o.line(format!("{name} window_ohm: [{}, {}]", fmt_f64(lo), fmt_f64(hi)));
        let req = match rep.demanded.get(d) {
            Some(CornerDemand::Interval(a, b)) => {
                o.line(format!("{name} required_ohm: [{}, {}]", fmt_f64(*a), fmt_f64(*b)));
                (*a, *b)
            }
            Some(CornerDemand::Empty) => {
                o.line(format!("{name} required_ohm: none"));
                (f64::NAN, f64::NAN)
            }
            None => (f64::NAN, f64::NAN),
        };
        if let Some(u) = rep.uncertainty[d] {
            o.line(format!(
                "{name} margin_low_ohm: {} margin_high_ohm: {} yield_bound: {}{}",
                fmt_f64(u.margin_low),
                fmt_f64(u.margin_high),
                fmt_f64(u.yield_bound),
                u.reason.map(|r| format!(" ({r})")).unwrap_or_default()
            ));
        }
        margins.push((name.to_string(), req, rep.uncertainty[d]));
    }
    if !rep.failing_corners.is_empty() {
        let mut s = String::from("failing (corner, device):");
        for (k, d) in &rep.failing_corners {
            let _ = write!(s, " ({k},{})", DEVICE_NAMES[*d]);
        }
        o.line(s);
    }
    if rep.manual_intervention {
        o.line("corner windows still infeasible after max_iters: manual intervention needed");
    }
    o.write(out, "verify_margins.csv", |f| formats::write_margins(f, &margins))?;
    if !rep.pass {
        o.outcome = Outcome::Fail;
    }
    Ok(o)
}

fn template_name(t: &CellTemplate) -> &'static str {
    match t {
        CellTemplate::Passive => "passive",
        CellTemplate::OneT1R { .. } => "1t1r",
    }
}
