//! Command-line front end: JSON run configs, flag overrides, CSV output.
//!
//! Every subcommand accepts `--config <path>` pointing at a flat JSON object
//! whose keys mirror the flags. Flags always win over the file. Phases are in
//! radians, HWP rotation in degrees, delays and coherence times in
//! femtoseconds.
//!
//! Exit codes: 0 on success, 2 for invalid input, 1 for anything else.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{Map, Value};
use thiserror::Error;

use crate::distinguish::Overlap;
use crate::elements::{beam_splitter, embed_into, Reflectivity};
use crate::error::Error;
use crate::evolve::{
    ns_amplitude, ns_amplitude_pol, ns_pipeline, ns_pipeline_amplitude, ns_pipeline_amplitude_single, transform,
    transform_oracle, PHOTON_CAP,
};
use crate::experiments::{
    dip_visibility, fit_phase_shift, linspace, sweep_delay, sweep_hom, sweep_phase, visibility, ExperimentConfig,
    PhaseSetting, SweepTable,
};
use crate::fock::{ModeLabel, ModeRegistry, PureState};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid '{key}': {message}")]
    Validation { key: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Simulation(#[from] Error),
}

impl CliError {
    fn invalid(key: &str, message: impl Into<String>) -> Self {
        CliError::Validation {
            key: key.to_string(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Validation { .. } => 2,
            CliError::Io { .. } | CliError::Simulation(_) => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    NsAmplitude,
    SweepDelay,
    SweepPhase,
    Hom,
    Transform,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::NsAmplitude,
        ExperimentKind::SweepDelay,
        ExperimentKind::SweepPhase,
        ExperimentKind::Hom,
        ExperimentKind::Transform,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::NsAmplitude => "ns-amplitude",
            ExperimentKind::SweepDelay => "sweep-delay",
            ExperimentKind::SweepPhase => "sweep-phase",
            ExperimentKind::Hom => "hom",
            ExperimentKind::Transform => "transform",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    fn allowed_keys(self) -> &'static [&'static str] {
        match self {
            ExperimentKind::NsAmplitude => &["n", "m", "r", "r_v", "r_h"],
            ExperimentKind::Transform => &["n", "m", "r", "out_path"],
            ExperimentKind::SweepDelay => &[
                "theta",
                "points",
                "range_fs",
                "tau_coh_fs",
                "background",
                "r_v",
                "r_h",
                "hwp_deg",
                "out_path",
            ],
            ExperimentKind::SweepPhase => &["points", "eta", "background", "r_v", "r_h", "hwp_deg", "out_path"],
            ExperimentKind::Hom => &[
                "eta",
                "points",
                "range_fs",
                "tau_coh_fs",
                "background",
                "r_v",
                "r_h",
                "hwp_deg",
                "out_path",
            ],
        }
    }
}

/// One run: which experiment and its parameters. Absent keys take the
/// experiment's defaults.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub experiment: ExperimentKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_v: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_coh_fs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub range_fs: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub background: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hwp_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_path: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        Self {
            experiment,
            theta: None,
            n: None,
            m: None,
            r: None,
            r_v: None,
            r_h: None,
            tau_coh_fs: None,
            eta: None,
            points: None,
            range_fs: None,
            background: None,
            hwp_deg: None,
            out_path: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Reads keys and types from a JSON object without checking that the
    /// experiment's required keys are present.
    pub fn from_json(text: &str, source: &Path) -> Result<Self, CliError> {
        let value: Value = serde_json::from_str(text).map_err(|e| CliError::Parse {
            path: source.to_path_buf(),
            message: e.to_string(),
        })?;
        let Value::Object(obj) = value else {
            return Err(CliError::Parse {
                path: source.to_path_buf(),
                message: "top level must be a JSON object".into(),
            });
        };
        Self::from_object(&obj)
    }

    fn from_object(obj: &Map<String, Value>) -> Result<Self, CliError> {
        let experiment = match obj.get("experiment") {
            Some(Value::String(s)) => ExperimentKind::parse(s).ok_or_else(|| {
                CliError::invalid(
                    "experiment",
                    format!(
                        "unknown experiment '{s}' (expected one of {})",
                        ExperimentKind::ALL.map(|k| k.name()).join(", ")
                    ),
                )
            })?,
            Some(_) => return Err(CliError::invalid("experiment", "must be a string")),
            None => return Err(CliError::invalid("experiment", "missing")),
        };
        let mut cfg = RunConfig::new(experiment);
        for (key, value) in obj {
            match key.as_str() {
                "experiment" => {}
                "theta" => cfg.theta = Some(float(key, value)?),
                "n" => cfg.n = Some(count(key, value)?),
                "m" => cfg.m = Some(count(key, value)?),
                "r" => cfg.r = Some(float(key, value)?),
                "r_v" => cfg.r_v = Some(float(key, value)?),
                "r_h" => cfg.r_h = Some(float(key, value)?),
                "tau_coh_fs" => cfg.tau_coh_fs = Some(float(key, value)?),
                "eta" => cfg.eta = Some(float(key, value)?),
                "points" => cfg.points = Some(count(key, value)?),
                "background" => cfg.background = Some(float(key, value)?),
                "hwp_deg" => cfg.hwp_deg = Some(float(key, value)?),
                "range_fs" => {
                    let pair = value
                        .as_array()
                        .filter(|a| a.len() == 2)
                        .ok_or_else(|| CliError::invalid(key, "must be [from, to]"))?;
                    cfg.range_fs = Some([float(key, &pair[0])?, float(key, &pair[1])?]);
                }
                "out_path" => {
                    let s = value
                        .as_str()
                        .ok_or_else(|| CliError::invalid(key, "must be a string"))?;
                    cfg.out_path = Some(PathBuf::from(s));
                }
                other => return Err(CliError::invalid(other, "unknown key")),
            }
        }
        Ok(cfg)
    }

    fn present_keys(&self) -> Vec<&'static str> {
        let mut keys = Vec::new();
        let mut mark = |present: bool, key: &'static str| {
            if present {
                keys.push(key);
            }
        };
        mark(self.theta.is_some(), "theta");
        mark(self.n.is_some(), "n");
        mark(self.m.is_some(), "m");
        mark(self.r.is_some(), "r");
        mark(self.r_v.is_some(), "r_v");
        mark(self.r_h.is_some(), "r_h");
        mark(self.tau_coh_fs.is_some(), "tau_coh_fs");
        mark(self.eta.is_some(), "eta");
        mark(self.points.is_some(), "points");
        mark(self.range_fs.is_some(), "range_fs");
        mark(self.background.is_some(), "background");
        mark(self.hwp_deg.is_some(), "hwp_deg");
        mark(self.out_path.is_some(), "out_path");
        keys
    }

    /// Checks that every key applies to the experiment, required keys are
    /// present, and values are in range.
    pub fn validate(&self) -> Result<(), CliError> {
        let allowed = self.experiment.allowed_keys();
        for key in self.present_keys() {
            if !allowed.contains(&key) {
                return Err(CliError::invalid(
                    key,
                    format!("does not apply to experiment '{}'", self.experiment.name()),
                ));
            }
        }
        let required = |key: &str, present: bool| {
            if present {
                Ok(())
            } else {
                Err(CliError::invalid(
                    key,
                    format!("required by '{}'", self.experiment.name()),
                ))
            }
        };
        match self.experiment {
            ExperimentKind::NsAmplitude => {
                required("n", self.n.is_some())?;
                if self.polarized() {
                    required("r_v", self.r_v.is_some())?;
                    required("r_h", self.r_h.is_some())?;
                } else {
                    required("r", self.r.is_some())?;
                }
            }
            ExperimentKind::Transform => {
                required("n", self.n.is_some())?;
                required("r", self.r.is_some())?;
            }
            ExperimentKind::SweepDelay => {
                required("theta", self.theta.is_some())?;
                required("points", self.points.is_some())?;
                required("range_fs", self.range_fs.is_some())?;
                required("out_path", self.out_path.is_some())?;
            }
            ExperimentKind::SweepPhase => {
                required("points", self.points.is_some())?;
                required("out_path", self.out_path.is_some())?;
            }
            ExperimentKind::Hom => {
                required("points", self.points.is_some())?;
                required("range_fs", self.range_fs.is_some())?;
                required("out_path", self.out_path.is_some())?;
            }
        }

        for (key, v) in [("r", self.r), ("r_v", self.r_v), ("r_h", self.r_h), ("eta", self.eta)] {
            if let Some(v) = v {
                if !(0.0..=1.0).contains(&v) {
                    return Err(CliError::invalid(key, format!("{v} outside [0, 1]")));
                }
            }
        }
        if let Some(t) = self.tau_coh_fs {
            if !(t > 0.0) || !t.is_finite() {
                return Err(CliError::invalid("tau_coh_fs", format!("{t} must be positive")));
            }
        }
        if let Some(b) = self.background {
            if !(b >= 0.0) || !b.is_finite() {
                return Err(CliError::invalid("background", format!("{b} must be >= 0")));
            }
        }
        for (key, v) in [("theta", self.theta), ("hwp_deg", self.hwp_deg)] {
            if let Some(v) = v {
                if !v.is_finite() {
                    return Err(CliError::invalid(key, "must be finite"));
                }
            }
        }
        let photons =
            self.n.unwrap_or(0) + self.m.unwrap_or(0) + u32::from(self.experiment == ExperimentKind::NsAmplitude);
        if photons > PHOTON_CAP {
            return Err(CliError::invalid(
                "n",
                format!("{photons} photons exceed the cap of {PHOTON_CAP}"),
            ));
        }
        if let Some(p) = self.points {
            let min = if self.experiment == ExperimentKind::SweepPhase {
                4
            } else {
                1
            };
            if (p as usize) < min {
                return Err(CliError::invalid("points", format!("need at least {min}")));
            }
        }
        if let Some([from, to]) = self.range_fs {
            if !from.is_finite() || !to.is_finite() {
                return Err(CliError::invalid("range_fs", "must be finite"));
            }
            let points = self.points.unwrap_or(1);
            if points > 1 && !(to > from) {
                return Err(CliError::invalid(
                    "range_fs",
                    format!("need from < to, got [{from}, {to}]"),
                ));
            }
        }
        Ok(())
    }

    fn polarized(&self) -> bool {
        self.m.is_some() || self.r_v.is_some() || self.r_h.is_some()
    }

    fn experiment_config(&self, default: ExperimentConfig) -> Result<ExperimentConfig, CliError> {
        let reflect = |key: &str, v: Option<f64>, d: Reflectivity| match v {
            Some(x) => Reflectivity::new(x).map_err(|e| CliError::invalid(key, e.to_string())),
            None => Ok(d),
        };
        Ok(ExperimentConfig {
            r_v: reflect("r_v", self.r_v, default.r_v)?,
            r_h: reflect("r_h", self.r_h, default.r_h)?,
            hwp_rotation: self.hwp_deg.unwrap_or(default.hwp_rotation),
            tau_coh: self.tau_coh_fs.unwrap_or(default.tau_coh),
            background: self.background.unwrap_or(default.background),
        })
    }
}

fn float(key: &str, v: &Value) -> Result<f64, CliError> {
    v.as_f64().ok_or_else(|| CliError::invalid(key, "must be a number"))
}

fn count(key: &str, v: &Value) -> Result<u32, CliError> {
    v.as_u64()
        .and_then(|x| u32::try_from(x).ok())
        .ok_or_else(|| CliError::invalid(key, "must be a non-negative integer"))
}

/// Reads a config file and checks its keys without requiring completeness.
pub fn parse_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    RunConfig::from_json(&text, path)
}

/// Reads and fully validates a config file.
pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let cfg = parse_config(path)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Formats with nine significant digits in plain decimal notation.
pub fn format_sig9(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    if x == 0.0 {
        return "0.00000000".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    let decimals = (8 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Writes `table` as CSV: header line, then one row per line, LF endings.
/// The file is written to a temporary sibling and renamed into place.
pub fn write_csv(table: &SweepTable, path: &Path) -> Result<(), CliError> {
    if table.is_empty() {
        return Err(Error::EmptySweep.into());
    }
    let mut text = String::new();
    text.push_str(table.x_name());
    for c in table.columns() {
        text.push(',');
        text.push_str(c);
    }
    text.push('\n');
    for row in table.rows() {
        text.push_str(&format_sig9(row.x));
        for v in &row.values {
            text.push(',');
            text.push_str(&format_sig9(*v));
        }
        text.push('\n');
    }
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(text.as_bytes()).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

#[derive(Debug, Parser)]
#[command(
    name = "nsgate",
    about = "Heralded nonlinear sign-shift simulator",
    long_about = "Heralded nonlinear sign-shift simulator.\n\n\
        Phases (--theta) are in radians, HWP rotation (--hwp) in degrees of \
        polarization rotation, delays and coherence times in femtoseconds. \
        Flags override values from --config."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form and simulated heralded NS amplitude.
    NsAmplitude(Flags),
    /// Two-mode beam splitter evolution of |n, m>, with the expansion oracle.
    Transform(Flags),
    /// Four-fold probability against pump delay.
    SweepDelay(Flags),
    /// Two-fold and four-fold probabilities against input phase, with fringe fits.
    SweepPhase(Flags),
    /// Two-photon interference dip for the |1V;1H> input against pump delay.
    Hom(Flags),
}

#[derive(Debug, Args, Default)]
struct Flags {
    /// JSON run config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Additive four-fold background.
    #[arg(long)]
    background: Option<f64>,
    /// Vertical reflectivity of the NS beam splitter.
    #[arg(long = "r-v")]
    r_v: Option<f64>,
    /// Horizontal reflectivity of the NS beam splitter.
    #[arg(long = "r-h")]
    r_h: Option<f64>,
    /// Reflectivity (single polarization).
    #[arg(long)]
    r: Option<f64>,
    /// Photon number (horizontal photons for polarized runs).
    #[arg(long)]
    n: Option<u32>,
    /// Vertical photon number, or photons in the second port for `transform`.
    #[arg(long)]
    m: Option<u32>,
    /// Input phase in radians.
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    /// Overlap (maximum overlap for `hom`).
    #[arg(long)]
    eta: Option<f64>,
    /// Number of sweep points.
    #[arg(long)]
    points: Option<u32>,
    /// First delay in fs.
    #[arg(long, allow_hyphen_values = true)]
    from: Option<f64>,
    /// Last delay in fs.
    #[arg(long, allow_hyphen_values = true)]
    to: Option<f64>,
    /// Coherence time in fs.
    #[arg(long = "tau-coh")]
    tau_coh: Option<f64>,
    /// HWP2 polarization rotation in degrees.
    #[arg(long, allow_hyphen_values = true)]
    hwp: Option<f64>,
}

impl Flags {
    fn apply(&self, cfg: &mut RunConfig) -> Result<(), CliError> {
        macro_rules! over {
            ($($flag:ident => $key:ident),*) => {
                $(if let Some(v) = self.$flag.clone() { cfg.$key = Some(v); })*
            };
        }
        over!(out => out_path, background => background, r_v => r_v, r_h => r_h, r => r, n => n, m => m,
              theta => theta, eta => eta, points => points, tau_coh => tau_coh_fs, hwp => hwp_deg);
        match (self.from, self.to, cfg.range_fs) {
            (None, None, _) => {}
            (Some(f), Some(t), _) => cfg.range_fs = Some([f, t]),
            (Some(f), None, Some([_, t])) => cfg.range_fs = Some([f, t]),
            (None, Some(t), Some([f, _])) => cfg.range_fs = Some([f, t]),
            _ => return Err(CliError::invalid("range_fs", "both --from and --to are needed")),
        }
        Ok(())
    }
}

/// Builds the run config for a subcommand from an optional config file and flags.
fn resolve(kind: ExperimentKind, flags: &Flags) -> Result<RunConfig, CliError> {
    let mut cfg = match &flags.config {
        Some(path) => {
            let cfg = parse_config(path)?;
            if cfg.experiment != kind {
                return Err(CliError::invalid(
                    "experiment",
                    format!(
                        "config is for '{}', command is '{}'",
                        cfg.experiment.name(),
                        kind.name()
                    ),
                ));
            }
            cfg
        }
        None => RunConfig::new(kind),
    };
    flags.apply(&mut cfg)?;
    cfg.validate()?;
    Ok(cfg)
}

fn fixed(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.9}")
}

/// Runs a validated config and returns the one-line summary.
pub fn run(cfg: &RunConfig) -> Result<String, CliError> {
    cfg.validate()?;
    match cfg.experiment {
        ExperimentKind::NsAmplitude => run_ns_amplitude(cfg),
        ExperimentKind::Transform => run_transform(cfg),
        ExperimentKind::SweepDelay => run_sweep_delay(cfg),
        ExperimentKind::SweepPhase => run_sweep_phase(cfg),
        ExperimentKind::Hom => run_hom(cfg),
    }
}

fn reflectivity(key: &str, v: Option<f64>) -> Result<Reflectivity, CliError> {
    let v = v.ok_or_else(|| CliError::invalid(key, "missing"))?;
    Reflectivity::new(v).map_err(|e| CliError::invalid(key, e.to_string()))
}

fn run_ns_amplitude(cfg: &RunConfig) -> Result<String, CliError> {
    let n = cfg.n.unwrap_or(0);
    let (closed, pipeline, success) = if cfg.polarized() {
        let m = cfg.m.unwrap_or(0);
        let r_v = reflectivity("r_v", cfg.r_v)?;
        let r_h = reflectivity("r_h", cfg.r_h)?;
        let success = ns_pipeline(m, n, r_v, r_h)?.probability;
        (
            ns_amplitude_pol(m, n, r_v, r_h),
            ns_pipeline_amplitude(m, n, r_v, r_h)?,
            success,
        )
    } else {
        let r = reflectivity("r", cfg.r)?;
        let amp = ns_pipeline_amplitude_single(n, r)?;
        (ns_amplitude(n, r), amp, amp.norm_sqr())
    };
    Ok(format!(
        "amplitude={} pipeline_amplitude={} success_probability={}",
        fixed(closed),
        fixed(pipeline.re),
        fixed(success)
    ))
}

fn run_transform(cfg: &RunConfig) -> Result<String, CliError> {
    let n = cfg.n.unwrap_or(0);
    let m = cfg.m.unwrap_or(0);
    let r = reflectivity("r", cfg.r)?;
    let ports = [ModeLabel::h(1), ModeLabel::h(2)];
    let registry = ModeRegistry::new(ports)?.shared();
    let input = PureState::basis(registry.clone(), &[(ports[0], n), (ports[1], m)])?;
    let u = embed_into(&beam_splitter(r), &ports, &registry)?;
    let out = transform(&u, &input)?;
    let oracle = transform_oracle(&u, &input)?;

    let mut table = SweepTable::new("k", ["re", "im", "probability"]);
    let mut deviation: f64 = 0.0;
    for k in 0..=(n + m) {
        let counts = [(ports[0], k), (ports[1], n + m - k)];
        let a = out.amplitude_of(&counts)?;
        deviation = deviation.max((a - oracle.amplitude_of(&counts)?).norm());
        table.push_row(f64::from(k), vec![a.re, a.im, a.norm_sqr()])?;
    }
    if let Some(path) = &cfg.out_path {
        write_csv(&table, path)?;
    }
    Ok(format!(
        "outputs={} total_probability={} max_oracle_deviation={:.3e}",
        out.support_size(),
        fixed(out.norm_sqr()),
        deviation
    ))
}

fn delays(cfg: &RunConfig) -> Result<Vec<f64>, CliError> {
    let [from, to] = cfg.range_fs.ok_or_else(|| CliError::invalid("range_fs", "missing"))?;
    let points = cfg.points.ok_or_else(|| CliError::invalid("points", "missing"))? as usize;
    Ok(linspace(from, to, points))
}

fn out_path(cfg: &RunConfig) -> Result<&Path, CliError> {
    cfg.out_path
        .as_deref()
        .ok_or_else(|| CliError::invalid("out_path", "missing"))
}

fn run_sweep_delay(cfg: &RunConfig) -> Result<String, CliError> {
    let theta = PhaseSetting::new(cfg.theta.unwrap_or(0.0))?;
    let exp = cfg.experiment_config(ExperimentConfig::default())?;
    let table = sweep_delay(theta, &delays(cfg)?, &exp)?;
    write_csv(&table, out_path(cfg)?)?;
    let values = table.column("fourfold").expect("column exists");
    let (imin, min) = values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(format!(
        "points={} min={} min_delay_fs={} max={}",
        table.len(),
        fixed(min),
        fixed(table.rows()[imin].x),
        fixed(max)
    ))
}

fn run_sweep_phase(cfg: &RunConfig) -> Result<String, CliError> {
    let exp = cfg.experiment_config(ExperimentConfig::default())?;
    let eta = Overlap::new(cfg.eta.unwrap_or(1.0))?;
    let points = cfg.points.ok_or_else(|| CliError::invalid("points", "missing"))? as usize;
    let thetas = linspace(0.0, std::f64::consts::TAU, points);
    let table = sweep_phase(&thetas, eta, &exp)?;
    write_csv(&table, out_path(cfg)?)?;
    let fit = fit_phase_shift(&table)?;
    let mut line = format!(
        "phase_shift={} twofold_phase={} fourfold_phase={}",
        fixed(fit.shift),
        fixed(fit.twofold.phase),
        fixed(fit.fourfold.phase)
    );
    if let Ok(v) = visibility(&fit.fourfold) {
        let _ = write!(line, " fourfold_visibility={}", fixed(v));
    }
    Ok(line)
}

fn run_hom(cfg: &RunConfig) -> Result<String, CliError> {
    let exp = cfg.experiment_config(ExperimentConfig::hom())?;
    let eta_max = Overlap::new(cfg.eta.unwrap_or(1.0))?;
    let table = sweep_hom(&delays(cfg)?, eta_max, &exp)?;
    write_csv(&table, out_path(cfg)?)?;
    let values = table.column("fourfold").expect("column exists");
    let v = dip_visibility(&values)?;
    Ok(format!("points={} visibility={}", table.len(), fixed(v)))
}

fn kind_of(cmd: &Command) -> (ExperimentKind, &Flags) {
    match cmd {
        Command::NsAmplitude(f) => (ExperimentKind::NsAmplitude, f),
        Command::Transform(f) => (ExperimentKind::Transform, f),
        Command::SweepDelay(f) => (ExperimentKind::SweepDelay, f),
        Command::SweepPhase(f) => (ExperimentKind::SweepPhase, f),
        Command::Hom(f) => (ExperimentKind::Hom, f),
    }
}

/// Merges the config file and flags in `argv` (program name first) into a
/// validated run config without running it.
pub fn resolve_args<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| CliError::invalid("argv", e.kind().to_string()))?;
    let (kind, flags) = kind_of(&cli.command);
    resolve(kind, flags)
}

/// Parses `argv` (program name first), runs the command, and returns the
/// process exit code. The summary goes to `stdout`, diagnostics to `stderr`.
pub fn execute_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let (kind, flags) = kind_of(&cli.command);
    let outcome = resolve(kind, flags).and_then(|cfg| run(&cfg));
    match outcome {
        Ok(summary) => {
            let _ = writeln!(stdout, "{summary}");
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    execute_with(argv, &mut std::io::stdout(), &mut std::io::stderr())
}
