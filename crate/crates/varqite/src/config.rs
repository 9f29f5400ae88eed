//! Run configuration: a single key-value text format with nested sections,
//! dotted-path overrides, and a canonical echo that reproduces the parsed
//! configuration bit-for-bit.
//!
//! ```text
//! seed = 42
//!
//! [maxwell]
//! n_grid = 16
//! boundary = periodic
//!
//! [ansatz]
//! family = rycry-linear
//! layers = 4
//! ```
//!
//! Keys are case-sensitive (`[state_prep]` has both `a` and `A`). Unknown
//! keys are rejected with a line-anchored error. `#` starts a comment,
//! either on its own line or after at least one space following a value.

use std::fmt::Write as _;

use crate::ansatz::{AnsatzFamily, AnsatzSpec};
use crate::evolver::{EvolutionConfig, Regularization, DEFAULT_SVD_CUTOFF};
use crate::maxwell::{
    Boundary, MaxwellConfig, DEFAULT_CENTER_FRACTION, DEFAULT_DT_FRACTION, DEFAULT_WIDTH_FRACTION,
};
use crate::mclachlan::EvalMode;
use crate::state_prep::SpsaConfig;
use crate::{Error, Result};

/// Which trajectory formats a run writes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OutputFormats {
    pub csv: bool,
    pub json: bool,
}

impl OutputFormats {
    fn describe(&self) -> String {
        let mut parts = Vec::new();
        if self.csv {
            parts.push("csv");
        }
        if self.json {
            parts.push("json");
        }
        parts.join(",")
    }
}

/// The full effective configuration of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    // [maxwell]
    pub n_grid: usize,
    pub domain_length: f64,
    pub c: f64,
    pub maxwell_dt: Option<f64>,
    pub boundary: Boundary,
    pub ic_center: Option<f64>,
    pub ic_width: Option<f64>,
    // [ansatz]
    pub family: AnsatzFamily,
    pub n_qubits: Option<usize>,
    pub layers: usize,
    // [evolution]
    pub evolution_dt: Option<f64>,
    pub t_final: f64,
    pub regularization: Regularization,
    pub mode_text: ModeText,
    pub snapshot_stride: usize,
    pub norm_correction: bool,
    // [state_prep]
    pub spsa_iterations: usize,
    pub spsa_a: f64,
    pub spsa_c: f64,
    pub spsa_big_a: f64,
    pub spsa_alpha: f64,
    pub spsa_gamma: f64,
    pub spsa_restarts: usize,
    pub epsilon_init: f64,
    pub epsilon_discretization: f64,
    // [output]
    pub output_directory: String,
    pub output_formats: OutputFormats,
}

/// Evaluation mode before the seed is attached.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeText {
    Exact,
    Shots(u64),
}

impl ModeText {
    pub fn parse(s: &str) -> Result<Self> {
        if s == "exact" {
            return Ok(ModeText::Exact);
        }
        if let Some(m) = s.strip_prefix("shots:") {
            let m: u64 = m
                .parse()
                .map_err(|_| Error::Config(format!("bad shot count in mode {s:?}")))?;
            if m == 0 {
                return Err(Error::ZeroShots);
            }
            return Ok(ModeText::Shots(m));
        }
        Err(Error::Config(format!(
            "unknown mode {s:?}; expected exact or shots:M"
        )))
    }

    pub fn describe(&self) -> String {
        match self {
            ModeText::Exact => "exact".into(),
            ModeText::Shots(m) => format!("shots:{m}"),
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 1,
            n_grid: 16,
            domain_length: 1.0,
            c: 1.0,
            maxwell_dt: None,
            boundary: Boundary::Periodic,
            ic_center: None,
            ic_width: None,
            family: AnsatzFamily::RyCRyLinear,
            n_qubits: None,
            layers: 4,
            evolution_dt: None,
            t_final: 0.5,
            regularization: Regularization::SvdCutoff(DEFAULT_SVD_CUTOFF),
            mode_text: ModeText::Exact,
            snapshot_stride: 1,
            norm_correction: false,
            spsa_iterations: 2000,
            spsa_a: 0.2,
            spsa_c: 0.1,
            spsa_big_a: 100.0,
            spsa_alpha: 0.602,
            spsa_gamma: 0.101,
            spsa_restarts: 3,
            epsilon_init: 0.01,
            epsilon_discretization: 0.001,
            output_directory: "out".into(),
            output_formats: OutputFormats { csv: true, json: true },
        }
    }
}

impl RunConfig {
    /// Parse a config file body on top of the defaults.
    pub fn parse(text: &str, path_label: &str) -> Result<Self> {
        let mut config = RunConfig::default();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse {
                path: path_label.to_string(),
                line: idx + 1,
                message,
            };
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| err("unterminated section header".into()))?
                    .trim();
                if !matches!(
                    name,
                    "maxwell" | "ansatz" | "evolution" | "state_prep" | "output"
                ) {
                    return Err(err(format!("unknown section [{name}]")));
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err("expected key = value".into()))?;
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() || value.is_empty() {
                return Err(err("empty key or value".into()));
            }
            let dotted = if section.is_empty() {
                key.to_string()
            } else {
                format!("{section}.{key}")
            };
            config
                .set(&dotted, value)
                .map_err(|e| err(e.to_string()))?;
        }
        Ok(config)
    }

    /// Load from disk.
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Apply one `section.key=value` override (top-level keys have no dot).
    pub fn set(&mut self, dotted_key: &str, value: &str) -> Result<()> {
        let parse_f64 = |v: &str| -> Result<f64> {
            v.parse()
                .map_err(|_| Error::Config(format!("expected a number, got {v:?}")))
        };
        let parse_usize = |v: &str| -> Result<usize> {
            v.parse()
                .map_err(|_| Error::Config(format!("expected an integer, got {v:?}")))
        };
        let parse_bool = |v: &str| -> Result<bool> {
            match v {
                "true" => Ok(true),
                "false" => Ok(false),
                _ => Err(Error::Config(format!("expected true or false, got {v:?}"))),
            }
        };
        match dotted_key {
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| Error::Config(format!("bad seed {value:?}")))?
            }
            "maxwell.n_grid" => self.n_grid = parse_usize(value)?,
            "maxwell.domain_length" => self.domain_length = parse_f64(value)?,
            "maxwell.c" => self.c = parse_f64(value)?,
            "maxwell.dt" => self.maxwell_dt = Some(parse_f64(value)?),
            "maxwell.boundary" => self.boundary = Boundary::parse(value)?,
            "maxwell.ic_center" => self.ic_center = Some(parse_f64(value)?),
            "maxwell.ic_width" => self.ic_width = Some(parse_f64(value)?),
            "ansatz.family" => self.family = AnsatzFamily::parse(value)?,
            "ansatz.n_qubits" => self.n_qubits = Some(parse_usize(value)?),
            "ansatz.layers" => self.layers = parse_usize(value)?,
            "evolution.dt" => self.evolution_dt = Some(parse_f64(value)?),
            "evolution.t_final" => self.t_final = parse_f64(value)?,
            "evolution.regularization" => {
                self.regularization = parse_regularization(value)?;
            }
            "evolution.mode" => self.mode_text = ModeText::parse(value)?,
            "evolution.snapshot_stride" => self.snapshot_stride = parse_usize(value)?,
            "evolution.norm_correction" => self.norm_correction = parse_bool(value)?,
            "state_prep.iterations" => self.spsa_iterations = parse_usize(value)?,
            "state_prep.a" => self.spsa_a = parse_f64(value)?,
            "state_prep.c" => self.spsa_c = parse_f64(value)?,
            "state_prep.A" => self.spsa_big_a = parse_f64(value)?,
            "state_prep.alpha" => self.spsa_alpha = parse_f64(value)?,
            "state_prep.gamma" => self.spsa_gamma = parse_f64(value)?,
            "state_prep.restarts" => self.spsa_restarts = parse_usize(value)?,
            "state_prep.epsilon_init" => self.epsilon_init = parse_f64(value)?,
            "state_prep.epsilon_discretization" => {
                self.epsilon_discretization = parse_f64(value)?
            }
            "output.directory" => self.output_directory = value.to_string(),
            "output.formats" => {
                let mut formats = OutputFormats { csv: false, json: false };
                for part in value.split(',') {
                    match part.trim() {
                        "csv" => formats.csv = true,
                        "json" => formats.json = true,
                        other => {
                            return Err(Error::Config(format!(
                                "unknown output format {other:?}"
                            )))
                        }
                    }
                }
                if !formats.csv && !formats.json {
                    return Err(Error::Config("no output formats selected".into()));
                }
                self.output_formats = formats;
            }
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Effective Maxwell-grid configuration with defaults applied.
    pub fn maxwell(&self) -> MaxwellConfig {
        let domain_length = self.domain_length;
        let dx = domain_length / self.n_grid as f64;
        MaxwellConfig {
            n_grid: self.n_grid,
            domain_length,
            dt: self.maxwell_dt.unwrap_or(DEFAULT_DT_FRACTION * dx / self.c),
            c: self.c,
            boundary: self.boundary,
        }
    }

    pub fn center(&self) -> f64 {
        self.ic_center
            .unwrap_or(DEFAULT_CENTER_FRACTION * self.domain_length)
    }

    pub fn width(&self) -> f64 {
        self.ic_width
            .unwrap_or(DEFAULT_WIDTH_FRACTION * self.domain_length)
    }

    /// Qubit count implied by the grid.
    pub fn derived_n_qubits(&self) -> usize {
        (4 * self.n_grid).trailing_zeros() as usize
    }

    pub fn ansatz_spec(&self) -> Result<AnsatzSpec> {
        AnsatzSpec::new(
            self.family,
            self.n_qubits.unwrap_or_else(|| self.derived_n_qubits()),
            self.layers,
        )
    }

    pub fn eval_mode(&self) -> EvalMode {
        match self.mode_text {
            ModeText::Exact => EvalMode::Exact,
            ModeText::Shots(m) => EvalMode::Shots { m, seed: self.seed },
        }
    }

    pub fn evolution(&self) -> EvolutionConfig {
        EvolutionConfig {
            dt: self.evolution_dt.unwrap_or_else(|| self.maxwell().dt),
            t_final: self.t_final,
            regularization: self.regularization,
            mode: self.eval_mode(),
            snapshot_stride: self.snapshot_stride,
            norm_correction: self.norm_correction,
        }
    }

    pub fn spsa(&self) -> SpsaConfig {
        SpsaConfig {
            iterations: self.spsa_iterations,
            a: self.spsa_a,
            c: self.spsa_c,
            big_a: self.spsa_big_a,
            alpha: self.spsa_alpha,
            gamma: self.spsa_gamma,
            restarts: self.spsa_restarts,
            seed: self.seed,
        }
    }

    /// Cross-field validation; returns warnings (CFL) on success.
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut warnings = self.maxwell().validate()?;
        let spec = self.ansatz_spec()?;
        if 1usize << spec.n_qubits != 4 * self.n_grid {
            return Err(Error::Config(format!(
                "ansatz has {} qubits but the grid needs 2^n = 4·n_grid = {}",
                spec.n_qubits,
                4 * self.n_grid
            )));
        }
        let evolution = self.evolution();
        evolution.validate()?;
        self.spsa().validate()?;
        if !(self.epsilon_init > 0.0 && self.epsilon_init < 1.0) {
            return Err(Error::Config("epsilon_init must lie in (0, 1)".into()));
        }
        if !(self.epsilon_discretization > 0.0) {
            return Err(Error::Config(
                "epsilon_discretization must be positive".into(),
            ));
        }
        let center = self.center();
        if !(center > 0.0 && center < self.domain_length) {
            return Err(Error::Config("ic_center must lie inside the domain".into()));
        }
        if !(self.width() > 0.0) {
            return Err(Error::Config("ic_width must be positive".into()));
        }
        let cfl_c = self.c * evolution.dt / self.maxwell().dx();
        if cfl_c > 0.5 && cfl_c <= 1.0 {
            warnings.push(format!("evolution CFL number {cfl_c:.4} exceeds 0.5"));
        }
        Ok(warnings)
    }

    /// Canonical text form: parsing it reproduces this configuration
    /// exactly, which is what run outputs embed in their headers.
    pub fn canonical_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s);
        let _ = writeln!(s, "[maxwell]");
        let _ = writeln!(s, "n_grid = {}", self.n_grid);
        let _ = writeln!(s, "domain_length = {}", self.domain_length);
        let _ = writeln!(s, "c = {}", self.c);
        let _ = writeln!(s, "dt = {}", self.maxwell().dt);
        let _ = writeln!(s, "boundary = {}", self.boundary.as_str());
        let _ = writeln!(s, "ic_center = {}", self.center());
        let _ = writeln!(s, "ic_width = {}", self.width());
        let _ = writeln!(s);
        let _ = writeln!(s, "[ansatz]");
        let _ = writeln!(s, "family = {}", family_token(self.family));
        let _ = writeln!(
            s,
            "n_qubits = {}",
            self.n_qubits.unwrap_or_else(|| self.derived_n_qubits())
        );
        let _ = writeln!(s, "layers = {}", self.layers);
        let _ = writeln!(s);
        let _ = writeln!(s, "[evolution]");
        let _ = writeln!(s, "dt = {}", self.evolution().dt);
        let _ = writeln!(s, "t_final = {}", self.t_final);
        let _ = writeln!(s, "regularization = {}", self.regularization.describe());
        let _ = writeln!(s, "mode = {}", self.mode_text.describe());
        let _ = writeln!(s, "snapshot_stride = {}", self.snapshot_stride);
        let _ = writeln!(s, "norm_correction = {}", self.norm_correction);
        let _ = writeln!(s);
        let _ = writeln!(s, "[state_prep]");
        let _ = writeln!(s, "iterations = {}", self.spsa_iterations);
        let _ = writeln!(s, "a = {}", self.spsa_a);
        let _ = writeln!(s, "c = {}", self.spsa_c);
        let _ = writeln!(s, "A = {}", self.spsa_big_a);
        let _ = writeln!(s, "alpha = {}", self.spsa_alpha);
        let _ = writeln!(s, "gamma = {}", self.spsa_gamma);
        let _ = writeln!(s, "restarts = {}", self.spsa_restarts);
        let _ = writeln!(s, "epsilon_init = {}", self.epsilon_init);
        let _ = writeln!(s, "epsilon_discretization = {}", self.epsilon_discretization);
        let _ = writeln!(s);
        let _ = writeln!(s, "[output]");
        let _ = writeln!(s, "directory = {}", self.output_directory);
        let _ = writeln!(s, "formats = {}", self.output_formats.describe());
        s
    }
}

fn family_token(family: AnsatzFamily) -> &'static str {
    match family {
        AnsatzFamily::RyLinear => "ry-linear",
        AnsatzFamily::RyFull => "ry-full",
        AnsatzFamily::RyCRyLinear => "rycry-linear",
        AnsatzFamily::RyCRyFull => "rycry-full",
    }
}

fn parse_regularization(s: &str) -> Result<Regularization> {
    if let Some(v) = s.strip_prefix("svd:") {
        let rho: f64 = v
            .parse()
            .map_err(|_| Error::Config(format!("bad svd cutoff {v:?}")))?;
        let reg = Regularization::SvdCutoff(rho);
        reg.validate()?;
        return Ok(reg);
    }
    if let Some(v) = s.strip_prefix("ridge:") {
        let lambda: f64 = v
            .parse()
            .map_err(|_| Error::Config(format!("bad ridge parameter {v:?}")))?;
        let reg = Regularization::Ridge(lambda);
        reg.validate()?;
        return Ok(reg);
    }
    Err(Error::Config(format!(
        "unknown regularization {s:?}; expected svd:RHO or ridge:LAMBDA"
    )))
}

fn strip_comment(line: &str) -> &str {
    if let Some(stripped) = line.trim_start().strip_prefix('#') {
        let _ = stripped;
        return "";
    }
    match line.find(" #") {
        Some(pos) => &line[..pos],
        None => line,
    }
}
