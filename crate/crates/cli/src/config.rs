//! Run configuration: defaults, then a flat JSON file, then command-line flags.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde_json::{Map, Value};
use spinbath_core::dynamics::{BathType, CouplingScaling, ModelParams, TwoQubitState};
use spinbath_core::series::{Grid, InitialState};

use crate::{CliError, ModelArgs, OutputFormat};

#[derive(Clone, Debug)]
pub enum Initial {
    Preset(InitialState),
    Custom(Box<TwoQubitState>),
}

impl Initial {
    pub fn state(&self) -> TwoQubitState {
        match self {
            Initial::Preset(p) => p.state(),
            Initial::Custom(s) => (**s).clone(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub params: ModelParams,
    pub grid: Grid,
    pub initial: Initial,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: ModelParams::default(),
            grid: Grid { start: 0.0, stop: 10.0, steps: 400 },
            initial: Initial::Preset(InitialState::BellInner),
            out: None,
            format: OutputFormat::Csv,
        }
    }
}

const KEYS: &[&str] = &[
    "lambda", "delta", "gamma", "mu", "h", "beta", "hbeta", "n", "n_bath", "bath", "scaling", "t_start", "t_stop",
    "steps", "initial", "rho", "out", "format",
];

fn bad(msg: impl Into<String>) -> CliError {
    CliError::bad_args(msg)
}

fn number(key: &str, v: &Value) -> Result<f64, CliError> {
    v.as_f64().ok_or_else(|| bad(format!("config key {key:?} must be a number")))
}

fn unsigned(key: &str, v: &Value) -> Result<u64, CliError> {
    v.as_u64().ok_or_else(|| bad(format!("config key {key:?} must be a nonnegative integer")))
}

fn text<'a>(key: &str, v: &'a Value) -> Result<&'a str, CliError> {
    v.as_str().ok_or_else(|| bad(format!("config key {key:?} must be a string")))
}

fn parse_bath(s: &str) -> Result<BathType, CliError> {
    match s {
        "deltaz" => Ok(BathType::DeltaZ),
        "sigmaz" => Ok(BathType::SigmaZ),
        other => Err(bad(format!("unknown bath {other:?}, expected deltaz or sigmaz"))),
    }
}

fn parse_scaling(s: &str) -> Result<CouplingScaling, CliError> {
    match s {
        "sqrtn" => Ok(CouplingScaling::SqrtN),
        "linearn" => Ok(CouplingScaling::LinearN),
        other => Err(bad(format!("unknown scaling {other:?}, expected sqrtn or linearn"))),
    }
}

fn parse_initial(s: &str) -> Result<InitialState, CliError> {
    match s {
        "bell-outer" => Ok(InitialState::BellOuter),
        "bell-inner" => Ok(InitialState::BellInner),
        other => Err(bad(format!("unknown initial state {other:?}, expected bell-outer or bell-inner"))),
    }
}

/// A 4×4 matrix given as rows of entries, each a real number or `[re, im]`.
fn parse_rho(v: &Value) -> Result<TwoQubitState, CliError> {
    let rows = v.as_array().filter(|r| r.len() == 4).ok_or_else(|| bad("rho must be a 4×4 array"))?;
    let mut m = [[Complex64::new(0.0, 0.0); 4]; 4];
    for (i, row) in rows.iter().enumerate() {
        let cells = row.as_array().filter(|r| r.len() == 4).ok_or_else(|| bad("rho must be a 4×4 array"))?;
        for (j, cell) in cells.iter().enumerate() {
            m[i][j] = match cell {
                Value::Number(x) => Complex64::new(x.as_f64().unwrap_or(f64::NAN), 0.0),
                Value::Array(pair) if pair.len() == 2 => match (pair[0].as_f64(), pair[1].as_f64()) {
                    (Some(re), Some(im)) => Complex64::new(re, im),
                    _ => return Err(bad(format!("rho[{i}][{j}] must be a number or [re, im]"))),
                },
                _ => return Err(bad(format!("rho[{i}][{j}] must be a number or [re, im]"))),
            };
        }
    }
    TwoQubitState::from_rows(m).map_err(|e| bad(e.to_string()))
}

impl RunConfig {
    /// Applies every key of a flat JSON object.
    pub fn apply_json(&mut self, doc: &Map<String, Value>) -> Result<(), CliError> {
        for (key, v) in doc {
            let p = &mut self.params;
            match key.as_str() {
                "lambda" => p.lambda = number(key, v)?,
                "delta" => p.delta = number(key, v)?,
                "gamma" => p.gamma = number(key, v)?,
                "mu" => p.mu = number(key, v)?,
                "h" => p.h = number(key, v)?,
                "beta" => p.beta = number(key, v)?,
                "hbeta" => {
                    p.h = number(key, v)?;
                    p.beta = 1.0;
                }
                "n" | "n_bath" => {
                    p.n_bath = u32::try_from(unsigned(key, v)?).map_err(|_| bad("n out of range"))?;
                }
                "bath" => p.bath = parse_bath(text(key, v)?)?,
                "scaling" => p.scaling = parse_scaling(text(key, v)?)?,
                "t_start" => self.grid.start = number(key, v)?,
                "t_stop" => self.grid.stop = number(key, v)?,
                "steps" => self.grid.steps = unsigned(key, v)? as usize,
                "initial" => self.initial = Initial::Preset(parse_initial(text(key, v)?)?),
                "rho" => self.initial = Initial::Custom(Box::new(parse_rho(v)?)),
                "out" => self.out = Some(PathBuf::from(text(key, v)?)),
                "format" => {
                    self.format = match text(key, v)? {
                        "csv" => OutputFormat::Csv,
                        "json" => OutputFormat::Json,
                        other => return Err(bad(format!("unknown format {other:?}"))),
                    }
                }
                other => {
                    return Err(bad(format!("unknown config key {other:?}; known keys: {}", KEYS.join(", "))));
                }
            }
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("cannot read config {}: {e}", path.display())))?;
        let doc: Value = serde_json::from_str(&text)
            .map_err(|e| bad(format!("config {} is not valid JSON: {e}", path.display())))?;
        let obj = doc.as_object().ok_or_else(|| bad("config must be a JSON object"))?;
        self.apply_json(obj)
    }

    /// Flag values override anything set before.
    pub fn apply_flags(&mut self, m: &ModelArgs) {
        let p = &mut self.params;
        if let Some(v) = m.lambda {
            p.lambda = v;
        }
        if let Some(v) = m.delta {
            p.delta = v;
        }
        if let Some(v) = m.gamma {
            p.gamma = v;
        }
        if let Some(v) = m.mu {
            p.mu = v;
        }
        if let Some(v) = m.hbeta {
            p.h = v;
            p.beta = 1.0;
        }
        if let Some(v) = m.n {
            p.n_bath = v;
        }
        if let Some(v) = m.bath {
            p.bath = v.into();
        }
        if let Some(v) = m.scaling {
            p.scaling = v.into();
        }
        if let Some(v) = m.t_start {
            self.grid.start = v;
        }
        if let Some(v) = m.t_stop {
            self.grid.stop = v;
        }
        if let Some(v) = m.steps {
            self.grid.steps = v;
        }
        if let Some(v) = m.initial {
            self.initial = Initial::Preset(v.into());
        }
        if let Some(v) = &m.out {
            self.out = Some(v.clone());
        }
        if let Some(v) = m.format {
            self.format = v;
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.params.validate().map_err(|e| bad(e.to_string()))?;
        self.grid.validate().map_err(|e| bad(e.to_string()))
    }
}
