//! INI-style configuration.
//!
//! Sections: `[model]`, `[waveform]`, `[cell]`, `[array]`, `[ranges]`,
//! `[run]`. Unknown sections and keys are rejected. Physical quantities carry
//! a unit suffix in the key name (`_v`, `_s`, `_ohm`, `_um`, ...). Relative
//! file paths resolve against the directory of the file that names them.
//! The full schema is in `docs/config.md`.

use std::path::{Path, PathBuf};

use rram_core::crossbar::{ArrayCell, ArrayState, BulkMode, CellDevice, CellTemplate, CrossbarSpec, PassiveScheme, Wire};
use rram_core::designflow::{GateConfig, RangeSpec, WorkflowConfig, DEVICE_NAMES};
use rram_core::primitives::{Channel, Load, MosfetParams, Orientation, Ratings};
use rram_core::stimulus::{
    build_characterization, pulse_train, read_event, CharacterizationMode, CharacterizationPlan,
};
use rram_core::transient::DEFAULT_TIMESTEP;
use rram_core::{DeviceState, ModelParams, Waveform, WindowKind};

use crate::error::{CliError, CliResult};
use crate::formats::{parse_waveform, read_array};

const SECTIONS: [&str; 6] = ["model", "waveform", "cell", "array", "ranges", "run"];

type Properties = Vec<(String, String)>;

/// Flat INI text: `[section]` headers, `key = value` lines, `#` or `;`
/// comment lines. Keys and sections must be unique.
fn parse_ini(text: &str) -> Result<Vec<(String, Properties)>, String> {
    let mut out: Vec<(String, Properties)> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| format!("line {}: unterminated section header", n + 1))?
                .trim();
            if out.iter().any(|(s, _)| s == name) {
                return Err(format!("line {}: section [{name}] repeated", n + 1));
            }
            out.push((name.to_string(), Vec::new()));
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected 'key = value'", n + 1))?;
        let (k, v) = (k.trim(), v.trim());
        let Some((sec, props)) = out.last_mut() else {
            return Err(format!("line {}: key '{k}' outside any section", n + 1));
        };
        if props.iter().any(|(x, _)| x == k) {
            return Err(format!("line {}: key '{k}' repeated in [{sec}]", n + 1));
        }
        props.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

/// A parsed config file.
#[derive(Debug, Clone)]
pub struct ConfigFile {
    ini: Vec<(String, Properties)>,
    base: PathBuf,
    origin: String,
}

/// One section; absent sections behave as empty.
#[derive(Clone, Copy)]
pub struct Section<'a> {
    name: &'a str,
    props: Option<&'a Properties>,
    origin: &'a str,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Input {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, base, path.display().to_string())
    }

    pub fn parse(text: &str, base: PathBuf, origin: String) -> CliResult<Self> {
        let ini = parse_ini(text).map_err(|e| CliError::config(format!("{origin}: {e}")))?;
        if let Some((s, _)) = ini.iter().find(|(s, _)| !SECTIONS.contains(&s.as_str())) {
            return Err(CliError::config(format!("{origin}: unknown section [{s}]")));
        }
        Ok(ConfigFile { ini, base, origin })
    }

    pub fn section<'a>(&'a self, name: &'a str) -> Section<'a> {
        Section {
            name,
            props: self.props(name),
            origin: &self.origin,
        }
    }

    fn props(&self, name: &str) -> Option<&Properties> {
        self.ini.iter().find(|(s, _)| s == name).map(|(_, p)| p)
    }

    pub fn has_section(&self, name: &str) -> bool {
        self.props(name).is_some()
    }

    pub fn resolve(&self, p: &str) -> PathBuf {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }
}

impl<'a> Section<'a> {
    fn err(&self, msg: impl std::fmt::Display) -> CliError {
        CliError::config(format!("{}: [{}] {msg}", self.origin, self.name))
    }

    /// Reject keys outside `allowed`.
    pub fn only(&self, allowed: &[&str]) -> CliResult<()> {
        if let Some(p) = self.props {
            for (k, _) in p {
                if !allowed.contains(&k.as_str()) {
                    return Err(self.err(format!("unknown key '{k}'")));
                }
            }
        }
        Ok(())
    }

    pub fn str(&self, key: &str) -> Option<&'a str> {
        self.props?.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn f64(&self, key: &str) -> CliResult<Option<f64>> {
        self.str(key)
            .map(|s| {
                s.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| self.err(format!("{key} = '{s}' is not a finite number")))
            })
            .transpose()
    }

    pub fn f64_or(&self, key: &str, default: f64) -> CliResult<f64> {
        Ok(self.f64(key)?.unwrap_or(default))
    }

    pub fn req_f64(&self, key: &str) -> CliResult<f64> {
        self.f64(key)?.ok_or_else(|| self.err(format!("missing {key}")))
    }

    pub fn usize(&self, key: &str) -> CliResult<Option<usize>> {
        self.str(key)
            .map(|s| {
                s.parse::<usize>()
                    .map_err(|_| self.err(format!("{key} = '{s}' is not a non-negative integer")))
            })
            .transpose()
    }

    pub fn bool(&self, key: &str) -> CliResult<Option<bool>> {
        self.str(key)
            .map(|s| match s {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                _ => Err(self.err(format!("{key} = '{s}' is not a boolean"))),
            })
            .transpose()
    }

    /// Comma-separated list of numbers.
    pub fn list(&self, key: &str) -> CliResult<Option<Vec<f64>>> {
        self.str(key)
            .map(|s| {
                s.split(',')
                    .map(|x| {
                        x.trim()
                            .parse::<f64>()
                            .ok()
                            .filter(|x| x.is_finite())
                            .ok_or_else(|| self.err(format!("{key}: '{x}' is not a finite number")))
                    })
                    .collect()
            })
            .transpose()
    }

    /// Two-element list `lo, hi`.
    pub fn pair(&self, key: &str) -> CliResult<Option<(f64, f64)>> {
        match self.list(key)? {
            None => Ok(None),
            Some(v) if v.len() == 2 => Ok(Some((v[0], v[1]))),
            Some(_) => Err(self.err(format!("{key} needs exactly two values"))),
        }
    }
}

/// Device model and initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub name: String,
    pub params: ModelParams,
    pub state: DeviceState,
}

const PARAM_KEYS: [&str; 21] = [
    "window",
    "a_p",
    "a_n",
    "b_p_per_v",
    "b_n_per_v",
    "sens_p",
    "sens_n",
    "t_p_per_v",
    "t_n_per_v",
    "r_p0_ohm",
    "r_p1_ohm_per_v",
    "r_p2_ohm_per_v2",
    "r_n0_ohm",
    "r_n1_ohm_per_v",
    "r_n2_ohm_per_v2",
    "k_p_per_ohm",
    "k_n_per_ohm",
    "eta",
    "v_guard_v",
    "r_floor_ohm",
    "r_ceil_ohm",
];

/// Load a parameter file: a `[model]` section with every fitted coefficient.
pub fn load_param_file(path: &Path) -> CliResult<(ModelParams, Option<(f64, f64)>)> {
    let cfg = ConfigFile::load(path)?;
    let s = cfg.section("model");
    s.only(&PARAM_KEYS)?;
    let window = match s.str("window") {
        Some("exponential") => WindowKind::Exponential,
        Some("quadratic") => WindowKind::Quadratic,
        Some(w) => return Err(s.err(format!("window must be 'exponential' or 'quadratic', got '{w}'"))),
        None => return Err(s.err("missing window")),
    };
    let exp = window == WindowKind::Exponential;
    let p = ModelParams {
        window,
        a_p: s.req_f64("a_p")?,
        a_n: s.req_f64("a_n")?,
        b_p: s.req_f64("b_p_per_v")?,
        b_n: s.req_f64("b_n_per_v")?,
        sens_p: s.req_f64("sens_p")?,
        sens_n: s.req_f64("sens_n")?,
        t_p: s.req_f64("t_p_per_v")?,
        t_n: s.req_f64("t_n_per_v")?,
        r_p: [
            s.req_f64("r_p0_ohm")?,
            s.f64_or("r_p1_ohm_per_v", 0.0)?,
            s.f64_or("r_p2_ohm_per_v2", 0.0)?,
        ],
        r_n: [
            s.req_f64("r_n0_ohm")?,
            s.f64_or("r_n1_ohm_per_v", 0.0)?,
            s.f64_or("r_n2_ohm_per_v2", 0.0)?,
        ],
        k_p: if exp { s.req_f64("k_p_per_ohm")? } else { s.f64_or("k_p_per_ohm", 0.0)? },
        k_n: if exp { s.req_f64("k_n_per_ohm")? } else { s.f64_or("k_n_per_ohm", 0.0)? },
        eta: s.f64_or("eta", 1.0)?,
        v_guard: s.f64_or("v_guard_v", rram_core::model::DEFAULT_V_GUARD)?,
    };
    p.validate()?;
    let bounds = match (s.f64("r_floor_ohm")?, s.f64("r_ceil_ohm")?) {
        (Some(a), Some(b)) => Some((a, b)),
        (None, None) => None,
        _ => return Err(s.err("give both r_floor_ohm and r_ceil_ohm or neither")),
    };
    Ok((p, bounds))
}

/// Resolve a model by built-in name or parameter file path.
fn resolve_model(cfg: &ConfigFile, builtin: Option<&str>, file: Option<&str>) -> CliResult<(String, ModelParams, Option<(f64, f64)>)> {
    match (builtin, file) {
        (Some(name), None) => {
            let p = ModelParams::builtin(name).ok_or_else(|| {
                CliError::config(format!(
                    "unknown built-in model '{name}' (known: {})",
                    rram_core::model::BUILTIN_NAMES.join(", ")
                ))
            })?;
            Ok((name.to_string(), p, ModelParams::builtin_bounds(name)))
        }
        (None, Some(f)) => {
            let path = cfg.resolve(f);
            let (p, b) = load_param_file(&path)?;
            Ok((path.display().to_string(), p, b))
        }
        (Some(_), Some(_)) => Err(CliError::config("give either a built-in model or a parameter file, not both")),
        (None, None) => Err(CliError::config("[model] needs 'builtin' or 'param_file'")),
    }
}

impl ModelConfig {
    pub fn from_config(cfg: &ConfigFile) -> CliResult<Self> {
        let s = cfg.section("model");
        s.only(&["builtin", "param_file", "r0_ohm", "r_floor_ohm", "r_ceil_ohm", "v_guard_v"])?;
        let (name, mut params, bounds) = resolve_model(cfg, s.str("builtin"), s.str("param_file"))?;
        if let Some(g) = s.f64("v_guard_v")? {
            params.v_guard = g;
        }
        params.validate()?;
        let (lo, hi) = match (s.f64("r_floor_ohm")?, s.f64("r_ceil_ohm")?, bounds) {
            (Some(a), Some(b), _) => (a, b),
            (None, None, Some(b)) => b,
            _ => return Err(s.err("state bounds need both r_floor_ohm and r_ceil_ohm")),
        };
        let state = DeviceState::new(s.req_f64("r0_ohm")?, lo, hi)?;
        Ok(ModelConfig { name, params, state })
    }
}

/// Timestep, decimation and workflow knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub timestep: f64,
    pub decimate: usize,
    pub sweep_points: Option<usize>,
    pub max_iters: Option<usize>,
}

impl RunConfig {
    pub fn from_config(cfg: &ConfigFile) -> CliResult<Self> {
        let s = cfg.section("run");
        s.only(&["timestep_s", "decimate", "sweep_points", "max_iters"])?;
        let timestep = s.f64_or("timestep_s", DEFAULT_TIMESTEP)?;
        if !(timestep > 0.0) {
            return Err(s.err("timestep_s must be positive"));
        }
        Ok(RunConfig {
            timestep,
            decimate: s.usize("decimate")?.unwrap_or(1).max(1),
            sweep_points: s.usize("sweep_points")?,
            max_iters: s.usize("max_iters")?,
        })
    }
}

const WAVEFORM_KEYS: [&str; 13] = [
    "file",
    "mode",
    "n_pulses",
    "amp_v",
    "v_bias_v",
    "width_s",
    "widths_s",
    "gap_s",
    "period_s",
    "read_v",
    "read_s",
    "read_step_s",
    "reads_per_pulse",
];

/// Read-out settings shared by simulation and characterization.
fn read_settings(s: &Section, plan: &mut CharacterizationPlan) -> CliResult<()> {
    plan.v_read = s.f64_or("read_v", plan.v_read)?;
    plan.t_read = s.f64_or("read_s", plan.t_read)?;
    plan.read_step = s.f64_or("read_step_s", plan.read_step)?;
    plan.reads_per_pulse = s.usize("reads_per_pulse")?.unwrap_or(1);
    plan.period = s.f64("period_s")?;
    Ok(())
}

/// Waveform for `simulate`.
///
/// Either a waveform text file, or a pulse train. A train with `read_v` set
/// gets an initial read and `reads_per_pulse` reads after every pulse; with
/// `n_pulses = 0` it is the initial read alone.
pub fn simulate_waveform(cfg: &ConfigFile, v_guard: f64) -> CliResult<Waveform> {
    let s = cfg.section("waveform");
    s.only(&WAVEFORM_KEYS)?;
    if let Some(f) = s.str("file") {
        let path = cfg.resolve(f);
        let text = std::fs::read_to_string(&path).map_err(|source| CliError::Input { path, source })?;
        return parse_waveform(&text);
    }
    let n = s.usize("n_pulses")?.ok_or_else(|| s.err("missing n_pulses"))?;
    if s.str("read_v").is_none() {
        if n == 0 {
            return Err(s.err("n_pulses = 0 needs read_v"));
        }
        return Ok(pulse_train(n, s.req_f64("amp_v")?, s.req_f64("width_s")?, s.f64_or("gap_s", 0.0)?)?);
    }
    if s.str("gap_s").is_some() {
        return Err(s.err("gap_s applies to trains without reads; use period_s"));
    }
    let mut plan = CharacterizationPlan::new(CharacterizationMode::PulseCount, vec![1.0], vec![1.0], 1);
    read_settings(&s, &mut plan)?;
    plan.check_guard(v_guard)?;
    if n == 0 {
        let mut w = Waveform::new();
        w.append(&read_event(plan.v_read, plan.t_read, plan.read_step)?, Some(0));
        return Ok(w);
    }
    plan.n_pulses = n;
    plan.v_bias = vec![s.req_f64("amp_v")?];
    plan.widths = vec![s.req_f64("width_s")?];
    let mut series = build_characterization(&plan)?;
    Ok(series.remove(0).waveform)
}

pub fn parse_mode(s: &str) -> CliResult<CharacterizationMode> {
    match s {
        "pulses" | "pulse_count" => Ok(CharacterizationMode::PulseCount),
        "width" | "pulse_width" => Ok(CharacterizationMode::PulseWidth),
        "amplitude" => Ok(CharacterizationMode::Amplitude),
        _ => Err(CliError::config(format!(
            "unknown characterization mode '{s}' (pulses, width, amplitude)"
        ))),
    }
}

/// Characterization plan from `[waveform]`; `mode` overrides the file.
pub fn characterization_plan(cfg: &ConfigFile, mode: Option<CharacterizationMode>, v_guard: f64) -> CliResult<CharacterizationPlan> {
    let s = cfg.section("waveform");
    s.only(&WAVEFORM_KEYS)?;
    let mode = match (mode, s.str("mode")) {
        (Some(m), _) => m,
        (None, Some(m)) => parse_mode(m)?,
        (None, None) => return Err(s.err("missing mode")),
    };
    let v_bias = s
        .list("v_bias_v")?
        .or(s.f64("amp_v")?.map(|v| vec![v]))
        .ok_or_else(|| s.err("missing v_bias_v"))?;
    let widths = s
        .list("widths_s")?
        .or(s.f64("width_s")?.map(|w| vec![w]))
        .ok_or_else(|| s.err("missing widths_s"))?;
    let n = s.usize("n_pulses")?.ok_or_else(|| s.err("missing n_pulses"))?;
    let mut plan = CharacterizationPlan::new(mode, v_bias, widths, n);
    read_settings(&s, &mut plan)?;
    plan.validate()?;
    plan.check_guard(v_guard)?;
    Ok(plan)
}

const FET_KEYS: [&str; 11] = [
    "fet",
    "channel",
    "v_th_v",
    "v_th_rev_v",
    "k_a_per_v2",
    "lambda_per_v",
    "rating_v",
    "v_gs_max_v",
    "v_ds_max_v",
    "v_gd_max_v",
    "v_db_max_v",
];

/// Access transistor from `[cell]`: a named example or explicit square-law values.
pub fn fet_from(cfg: &ConfigFile) -> CliResult<MosfetParams> {
    let s = cfg.section("cell");
    let fet = match s.str("fet").unwrap_or("custom") {
        "example-nmos-5v" => MosfetParams::example_nmos_5v(),
        "example-pmos-5v" => MosfetParams::example_pmos_5v(),
        "custom" => {
            let channel = match s.str("channel") {
                Some("n") => Channel::N,
                Some("p") => Channel::P,
                _ => return Err(s.err("channel must be 'n' or 'p'")),
            };
            let base = s.f64_or("rating_v", f64::INFINITY)?;
            let ratings = Ratings {
                v_gs_max: s.f64_or("v_gs_max_v", base)?,
                v_ds_max: s.f64_or("v_ds_max_v", base)?,
                v_gd_max: s.f64_or("v_gd_max_v", base)?,
                v_db_max: s.f64_or("v_db_max_v", base)?,
            };
            let v_th = s.req_f64("v_th_v")?;
            let args = (
                v_th,
                s.f64_or("v_th_rev_v", v_th)?,
                s.req_f64("k_a_per_v2")?,
                s.f64_or("lambda_per_v", 0.0)?,
            );
            match channel {
                Channel::N => MosfetParams::nmos(args.0, args.1, args.2, args.3, ratings),
                Channel::P => MosfetParams::pmos(args.0, args.1, args.2, args.3, ratings),
            }
        }
        other => {
            return Err(s.err(format!(
                "fet must be example-nmos-5v, example-pmos-5v or custom, got '{other}'"
            )))
        }
    };
    fet.validate()?;
    Ok(fet)
}

/// 1T1R cell for `dcop`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellConfig {
    pub fet: MosfetParams,
    pub load: Load,
    pub vdd: f64,
}

fn load_from(cfg: &ConfigFile, s: &Section) -> CliResult<Load> {
    let load = match (s.f64("load_ohm")?, s.str("load_model"), s.str("load_param_file")) {
        (Some(r), None, None) => Load::Linear(r),
        (None, m, f) if m.is_some() || f.is_some() => {
            let (_, params, _) = resolve_model(cfg, m, f)?;
            Load::Memristor {
                params,
                r: s.req_f64("load_r_ohm")?,
            }
        }
        _ => return Err(s.err("give load_ohm, or load_model / load_param_file with load_r_ohm")),
    };
    load.validate()?;
    Ok(load)
}

impl CellConfig {
    pub fn from_config(cfg: &ConfigFile) -> CliResult<Self> {
        let s = cfg.section("cell");
        let mut keys = FET_KEYS.to_vec();
        keys.extend(["load_ohm", "load_model", "load_param_file", "load_r_ohm", "vdd_v"]);
        s.only(&keys)?;
        let vdd = s.f64_or("vdd_v", 5.0)?;
        if !(vdd > 0.0) {
            return Err(s.err("vdd_v must be positive"));
        }
        Ok(CellConfig {
            fet: fet_from(cfg)?,
            load: load_from(cfg, &s)?,
            vdd,
        })
    }
}

/// Crossbar geometry, bias scheme and device states.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayConfig {
    pub spec: CrossbarSpec,
    pub state: ArrayState,
    pub v_read: f64,
    /// Worst-case linear resistance for the IR-drop report.
    pub r_wc: Option<f64>,
    pub v_drive: f64,
}

impl ArrayConfig {
    /// `dims` overrides `rows` / `cols` from the file.
    pub fn from_config(cfg: &ConfigFile, dims: (Option<usize>, Option<usize>)) -> CliResult<Self> {
        let s = cfg.section("array");
        s.only(&[
            "rows",
            "cols",
            "template",
            "rho_ohm_sq",
            "width_um",
            "pitch_um",
            "word_width_um",
            "word_pitch_um",
            "bit_width_um",
            "bit_pitch_um",
            "bulk",
            "driver_segments",
            "scheme",
            "sel_on_v",
            "sel_off_v",
            "v_bulk_v",
            "orientation",
            "device",
            "cell_ohm",
            "r_floor_ohm",
            "r_ceil_ohm",
            "state_csv",
            "read_v",
            "r_wc_ohm",
            "drive_v",
        ])?;
        let rows = dims.0.or(s.usize("rows")?).ok_or_else(|| s.err("missing rows"))?;
        let cols = dims.1.or(s.usize("cols")?).ok_or_else(|| s.err("missing cols"))?;
        let wire = |prefix: &str| -> CliResult<Wire> {
            Ok(Wire {
                width_um: match s.f64(&format!("{prefix}_width_um"))? {
                    Some(w) => w,
                    None => s.f64_or("width_um", 1.0)?,
                },
                pitch_um: match s.f64(&format!("{prefix}_pitch_um"))? {
                    Some(p) => p,
                    None => s.f64_or("pitch_um", 1.0)?,
                },
            })
        };
        let template = match s.str("template").unwrap_or("passive") {
            "passive" => CellTemplate::Passive,
            "1t1r" => CellTemplate::OneT1R {
                fet: fet_from(cfg)?,
                orientation: match s.str("orientation").unwrap_or("source_to_rram") {
                    "source_to_rram" | "s2r" => Orientation::SourceToRram,
                    "drain_to_rram" | "d2r" => Orientation::DrainToRram,
                    o => return Err(s.err(format!("unknown orientation '{o}'"))),
                },
                sel_on: s.req_f64("sel_on_v")?,
                sel_off: s.f64_or("sel_off_v", 0.0)?,
                v_bulk: s.f64_or("v_bulk_v", 0.0)?,
            },
            t => return Err(s.err(format!("template must be passive or 1t1r, got '{t}'"))),
        };
        let bulk_default = match template {
            CellTemplate::Passive => "common",
            CellTemplate::OneT1R { .. } => "column",
        };
        let spec = CrossbarSpec {
            rows,
            cols,
            template,
            rho_sq: s.f64_or("rho_ohm_sq", 0.0)?,
            word_wire: wire("word")?,
            bit_wire: wire("bit")?,
            bulk_mode: match s.str("bulk").unwrap_or(bulk_default) {
                "column" => BulkMode::Column,
                "row" => BulkMode::Row,
                "common" => BulkMode::Common,
                b => return Err(s.err(format!("bulk must be column, row or common, got '{b}'"))),
            },
            driver_segments: s.bool("driver_segments")?.unwrap_or(true),
            passive_scheme: match s.str("scheme").unwrap_or("floating") {
                "floating" => PassiveScheme::Floating,
                "half_select" => PassiveScheme::HalfSelect,
                p => return Err(s.err(format!("scheme must be floating or half_select, got '{p}'"))),
            },
        };
        spec.validate()?;

        let (device, bounds) = match s.str("device").unwrap_or("linear") {
            "linear" => (CellDevice::Linear, None),
            name => {
                let p = ModelParams::builtin(name)
                    .ok_or_else(|| s.err(format!("device must be linear or a built-in model, got '{name}'")))?;
                (CellDevice::Memristor(p), ModelParams::builtin_bounds(name))
            }
        };
        let resistances = match (s.str("state_csv"), s.f64("cell_ohm")?) {
            (Some(f), None) => {
                let path = cfg.resolve(f);
                let file = std::fs::File::open(&path).map_err(|source| CliError::Input { path, source })?;
                let m = read_array(file)?;
                if (m.rows, m.cols) != (rows, cols) {
                    return Err(s.err(format!(
                        "state_csv is {}x{}, array is {rows}x{cols}",
                        m.rows, m.cols
                    )));
                }
                m.r
            }
            (None, Some(r)) => vec![r; rows * cols],
            _ => return Err(s.err("give exactly one of cell_ohm or state_csv")),
        };
        let cells = resistances
            .iter()
            .map(|&r| {
                let (lo, hi) = match (s.f64("r_floor_ohm")?, s.f64("r_ceil_ohm")?, bounds) {
                    (Some(a), Some(b), _) => (a, b),
                    (None, None, Some(b)) => b,
                    (None, None, None) => (r, r),
                    _ => return Err(s.err("state bounds need both r_floor_ohm and r_ceil_ohm")),
                };
                Ok(ArrayCell {
                    device,
                    state: DeviceState::new(r, lo, hi)?,
                })
            })
            .collect::<CliResult<Vec<_>>>()?;
        Ok(ArrayConfig {
            spec,
            state: ArrayState { rows, cols, cells },
            v_read: s.f64_or("read_v", 0.2)?,
            r_wc: s.f64("r_wc_ohm")?,
            v_drive: s.f64_or("drive_v", 1.0)?,
        })
    }
}

/// Gate, per-device ranges and workflow settings from `[ranges]` and `[run]`.
pub fn workflow_from(cfg: &ConfigFile) -> CliResult<WorkflowConfig> {
    let s = cfg.section("ranges");
    let mut keys = vec!["gate", "vdd_v", "q_ohm", "q_high_ohm", "alpha", "high_fraction", "low_fraction"];
    let per_device: Vec<String> = DEVICE_NAMES
        .iter()
        .flat_map(|d| {
            let d = d.to_lowercase();
            ["desired_ohm", "nominal_ohm", "q_ohm", "q_high_ohm"].map(|k| format!("{d}_{k}"))
        })
        .collect();
    keys.extend(per_device.iter().map(String::as_str));
    s.only(&keys)?;
    let mut gate = match s.str("gate").unwrap_or("example") {
        "example" => GateConfig::example(),
        g => return Err(s.err(format!("unknown gate '{g}' (only 'example' is built in)"))),
    };
    if let Some(v) = s.f64("vdd_v")? {
        gate.vdd = v;
    }
    let alpha = s.f64_or("alpha", 0.9)?;
    let q = s.f64("q_ohm")?;
    let q_high = s.f64("q_high_ohm")?;
    let mut ranges = Vec::new();
    for d in DEVICE_NAMES {
        let d = d.to_lowercase();
        let key = |k: &str| format!("{d}_{k}");
        let desired = s.pair(&key("desired_ohm"))?.ok_or_else(|| s.err(format!("missing {}", key("desired_ohm"))))?;
        let nominal = s.pair(&key("nominal_ohm"))?.ok_or_else(|| s.err(format!("missing {}", key("nominal_ohm"))))?;
        let q_d = s.f64(&key("q_ohm"))?.or(q).ok_or_else(|| s.err("missing q_ohm"))?;
        let mut r = RangeSpec::new(desired, nominal, q_d, alpha);
        r.q_high = s.f64(&key("q_high_ohm"))?.or(q_high);
        r.validate()?;
        ranges.push(r);
    }
    let ranges: [RangeSpec; 3] = ranges.try_into().expect("three devices");
    let mut wf = WorkflowConfig::new(gate, ranges);
    let (hi, lo) = (s.f64_or("high_fraction", 0.9)?, s.f64_or("low_fraction", 0.1)?);
    wf.nominal_checks = rram_core::designflow::logic_checks(wf.gate.vdd, hi, lo);
    wf.corner_checks = wf.nominal_checks.clone();
    let run = RunConfig::from_config(cfg)?;
    if let Some(n) = run.sweep_points {
        wf.sweep_points = n;
    }
    if let Some(n) = run.max_iters {
        wf.max_iters = n;
    }
    Ok(wf)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> CliResult<ConfigFile> {
        ConfigFile::parse(text, PathBuf::new(), "test".into())
    }

    #[test]
    fn ini_syntax() {
        let c = cfg("# top\n[run]\n; note\ntimestep_s = 2e-6\n\n[model]\nbuiltin=exp-4k5-6k\n").unwrap();
        assert_eq!(c.section("model").str("builtin"), Some("exp-4k5-6k"));
        assert_eq!(c.section("run").f64("timestep_s").unwrap(), Some(2e-6));
        assert!(!c.has_section("array"));
        assert!(cfg("x = 1\n").is_err());
        assert!(cfg("[run]\nx\n").is_err());
        assert!(cfg("[run\n").is_err());
        assert!(cfg("[run]\na = 1\na = 2\n").is_err());
        assert!(cfg("[run]\n[run]\n").is_err());
    }

    #[test]
    fn builtin_model() {
        let c = cfg("[model]\nbuiltin = exp-10k17k\nr0_ohm = 16250\n").unwrap();
        let m = ModelConfig::from_config(&c).unwrap();
        assert_eq!(m.params, ModelParams::exp_10k17k());
        assert_eq!((m.state.r, m.state.r_floor, m.state.r_ceil), (16250.0, 10e3, 17e3));
    }

    #[test]
    fn rejects_unknown_keys_and_sections() {
        assert!(cfg("[modle]\n").is_err());
        let c = cfg("[model]\nbuiltin = exp-10k17k\nr0 = 16250\n").unwrap();
        assert!(ModelConfig::from_config(&c).is_err());
        let c = cfg("[model]\nbuiltin = nope\nr0_ohm = 1\n").unwrap();
        assert!(ModelConfig::from_config(&c).is_err());
    }

    #[test]
    fn missing_param_file_is_an_input_error() {
        let c = cfg("[model]\nparam_file = /nonexistent/params.ini\nr0_ohm = 1\n").unwrap();
        let e = ModelConfig::from_config(&c).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn pulse_train_with_reads() {
        let c = cfg("[waveform]\nn_pulses = 3\namp_v = 0.8\nwidth_s = 100e-6\nread_v = 0.5\nread_s = 1e-3\n").unwrap();
        let w = simulate_waveform(&c, 0.5).unwrap();
        assert_eq!(w.read_marks.len(), 4);
        let c = cfg("[waveform]\nn_pulses = 0\nread_v = 0.5\n").unwrap();
        assert_eq!(simulate_waveform(&c, 0.5).unwrap().read_marks.len(), 1);
        let c = cfg("[waveform]\nn_pulses = 2\namp_v = 0.8\nwidth_s = 1e-6\n").unwrap();
        assert!(simulate_waveform(&c, 0.5).unwrap().read_marks.is_empty());
        let c = cfg("[waveform]\nn_pulses = 2\namp_v = 0.8\nwidth_s = 1e-6\nread_v = 0.9\n").unwrap();
        assert!(simulate_waveform(&c, 0.5).is_err());
    }

    #[test]
    fn characterization_mode_override() {
        let c = cfg("[waveform]\nmode = amplitude\nv_bias_v = 0.6, 0.7, -0.8\nwidth_s = 1e-4\nn_pulses = 5\n").unwrap();
        let p = characterization_plan(&c, None, 0.5).unwrap();
        assert_eq!(p.v_bias, vec![0.6, 0.7, -0.8]);
        let p = characterization_plan(&c, Some(CharacterizationMode::PulseWidth), 0.5).unwrap();
        assert_eq!(p.mode, CharacterizationMode::PulseWidth);
    }

    #[test]
    fn cell_and_array() {
        let c = cfg("[cell]\nfet = example-pmos-5v\nload_ohm = 1000\n").unwrap();
        let cell = CellConfig::from_config(&c).unwrap();
        assert_eq!(cell.load, Load::Linear(1000.0));
        assert_eq!(cell.vdd, 5.0);
        let c = cfg("[cell]\nchannel = n\nv_th_v = 0.7\nk_a_per_v2 = 1e-3\nload_model = exp-10k17k\nload_r_ohm = 12000\n").unwrap();
        let cell = CellConfig::from_config(&c).unwrap();
        assert!(cell.fet.symmetric);

        let c = cfg("[array]\nrows = 2\ncols = 3\nrho_ohm_sq = 0.1\nwidth_um = 0.5\npitch_um = 50\ncell_ohm = 1000\n").unwrap();
        let a = ArrayConfig::from_config(&c, (None, Some(4))).unwrap();
        assert_eq!((a.spec.rows, a.spec.cols), (2, 4));
        assert!((a.spec.word_segment() - 10.0).abs() < 1e-12);
        assert_eq!(a.state.cells.len(), 8);
    }

    #[test]
    fn ranges() {
        let c = cfg(
            "[ranges]\nq_ohm = 50\nalpha = 0.9\n\
             r_a_desired_ohm = 4600, 5900\nr_a_nominal_ohm = 4500, 6000\n\
             r_b_desired_ohm = 4600, 5900\nr_b_nominal_ohm = 4500, 6000\n\
             r_c_desired_ohm = 4600, 5900\nr_c_nominal_ohm = 4500, 6000\nr_c_q_ohm = 10\n\
             [run]\nsweep_points = 9\n",
        )
        .unwrap();
        let wf = workflow_from(&c).unwrap();
        assert_eq!(wf.ranges[0].q, 50.0);
        assert_eq!(wf.ranges[2].q, 10.0);
        assert_eq!(wf.sweep_points, 9);
    }
}
