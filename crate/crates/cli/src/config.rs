use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use smx::{GridKind, Options, Pot, Precondition};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Solve,
    Multiplicity,
    Minimax,
    Verify,
    Hydrogen,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "solve" => Ok(Self::Solve),
            "multiplicity" => Ok(Self::Multiplicity),
            "minimax" => Ok(Self::Minimax),
            "verify" => Ok(Self::Verify),
            "hydrogen" => Ok(Self::Hydrogen),
            other => Err(format!("unknown mode '{other}'")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Solve => "solve",
            Self::Multiplicity => "multiplicity",
            Self::Minimax => "minimax",
            Self::Verify => "verify",
            Self::Hydrogen => "hydrogen",
        })
    }
}

/// Flat run configuration. Field names double as config keys and as the
/// keys of the JSON echo, so an echo can be fed back as a config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub omega: Option<f64>,
    pub potential: String,
    #[serde(rename = "Z")]
    pub z: f64,
    pub alpha: f64,
    pub mu: f64,
    pub k_max: usize,
    pub grid_kind: String,
    pub grid_n: usize,
    pub r_max: f64,
    pub r_min: f64,
    pub seed: u64,
    pub out: PathBuf,
    pub formats: Vec<String>,
    pub threads: usize,
    /// Sphere samples per subspace dimension in minimax mode.
    pub samples_per_k: usize,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub precondition: String,
    pub coupling: bool,
    pub deflation_strength: f64,
    pub newton: bool,
    pub newton_switch: f64,
    pub dist_tol: f64,
    pub safety_factor: f64,
    pub seed_perturbation: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let o = Options::default();
        Self {
            mode: Mode::Solve,
            omega: None,
            potential: "coulomb".into(),
            z: 1.0,
            alpha: 1.0,
            mu: 1.0,
            k_max: 3,
            grid_kind: "log".into(),
            grid_n: 4000,
            r_max: 60.0,
            r_min: 1e-6,
            seed: 0,
            out: PathBuf::from("smx_out"),
            formats: vec!["csv".into(), "json".into()],
            threads: 1,
            samples_per_k: 300,
            max_iters: o.max_iters,
            grad_tol: o.grad_tol,
            precondition: "sobolev".into(),
            coupling: o.coupling_enabled,
            deflation_strength: o.deflation_strength,
            newton: o.newton,
            newton_switch: o.newton_switch,
            dist_tol: o.dist_tol,
            safety_factor: o.safety_factor,
            seed_perturbation: o.seed_perturbation,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Config(format!("bad value '{value}' for key '{key}'")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, CliError> {
    match value {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(CliError::Config(format!(
            "bad boolean '{value}' for key '{key}'"
        ))),
    }
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let value = value.trim();
        match key {
            "mode" => self.mode = value.parse().map_err(CliError::Config)?,
            "omega" => {
                self.omega = if value == "null" {
                    None
                } else {
                    Some(parse(key, value)?)
                }
            }
            "potential" => self.potential = value.to_string(),
            "Z" | "z" => self.z = parse(key, value)?,
            "alpha" => self.alpha = parse(key, value)?,
            "mu" => self.mu = parse(key, value)?,
            "k_max" | "k-max" => self.k_max = parse(key, value)?,
            "grid_kind" => self.grid_kind = value.to_string(),
            "grid_n" | "grid-n" => self.grid_n = parse(key, value)?,
            "r_max" | "r-max" => self.r_max = parse(key, value)?,
            "r_min" => self.r_min = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "formats" => {
                self.formats = value
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect()
            }
            "threads" => self.threads = parse(key, value)?,
            "samples_per_k" => self.samples_per_k = parse(key, value)?,
            "max_iters" => self.max_iters = parse(key, value)?,
            "grad_tol" => self.grad_tol = parse(key, value)?,
            "precondition" => self.precondition = value.to_string(),
            "coupling" => self.coupling = parse_bool(key, value)?,
            "deflation_strength" => self.deflation_strength = parse(key, value)?,
            "newton" => self.newton = parse_bool(key, value)?,
            "newton_switch" => self.newton_switch = parse(key, value)?,
            "dist_tol" => self.dist_tol = parse(key, value)?,
            "safety_factor" => self.safety_factor = parse(key, value)?,
            "seed_perturbation" => self.seed_perturbation = parse(key, value)?,
            other => return Err(CliError::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected key = value", no + 1))
            })?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    /// Applies a JSON object of config keys, or a summary whose `config`
    /// field holds one.
    pub fn apply_json(&mut self, text: &str) -> Result<(), CliError> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("bad JSON config: {e}")))?;
        let obj = value
            .get("config")
            .unwrap_or(&value)
            .as_object()
            .ok_or_else(|| CliError::Config("JSON config must be an object".into()))?;
        for (key, v) in obj {
            let s = match v {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Array(items) => items
                    .iter()
                    .map(|x| {
                        x.as_str()
                            .map(str::to_string)
                            .unwrap_or_else(|| x.to_string())
                    })
                    .collect::<Vec<_>>()
                    .join(","),
                other => other.to_string(),
            };
            self.set(key, &s)?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::default();
        if text.trim_start().starts_with('{') {
            cfg.apply_json(&text)?;
        } else {
            cfg.apply_text(&text)?;
        }
        Ok(cfg)
    }

    pub fn wants(&self, format: &str) -> bool {
        self.formats.iter().any(|f| f == format)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        for f in &self.formats {
            if f != "csv" && f != "json" {
                return Err(CliError::Config(format!("unknown output format '{f}'")));
            }
        }
        if self.threads == 0 {
            return Err(CliError::Config("threads must be >= 1".into()));
        }
        if self.k_max == 0 {
            return Err(CliError::Config("k_max must be >= 1".into()));
        }
        match self.mode {
            Mode::Solve => match self.omega {
                None => return Err(CliError::Config("solve mode needs omega".into())),
                Some(w) if !(w < 0.0) => {
                    return Err(CliError::Config(format!(
                        "solve mode needs omega < 0, got {w}"
                    )))
                }
                _ => {}
            },
            Mode::Multiplicity | Mode::Minimax => match self.omega {
                None => return Err(CliError::Config(format!("{} mode needs omega", self.mode))),
                Some(w) if !(w < 0.0) => {
                    return Err(CliError::Hypothesis(format!(
                        "{} mode requires omega < 0, got {w}",
                        self.mode
                    )))
                }
                _ => {}
            },
            Mode::Verify | Mode::Hydrogen => {}
        }
        if self.mode == Mode::Hydrogen && self.potential != "coulomb" {
            return Err(CliError::Config(
                "hydrogen mode needs potential = coulomb".into(),
            ));
        }
        self.grid()?;
        self.potential()?;
        self.solve_options()?;
        Ok(())
    }

    pub fn grid(&self) -> Result<smx::Grid, CliError> {
        let kind: GridKind = self
            .grid_kind
            .parse()
            .map_err(|e: smx::Error| CliError::Config(e.to_string()))?;
        smx::Grid::new(kind, self.grid_n, self.r_max, self.r_min)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn potential(&self) -> Result<Pot, CliError> {
        let v = match self.potential.as_str() {
            "coulomb" => Pot::coulomb(self.z),
            "power_law" => Pot::power_law(self.z, self.alpha),
            "yukawa" => Pot::yukawa(self.z, self.mu),
            "zero" => Ok(Pot::zero()),
            other => return Err(CliError::Config(format!("unknown potential '{other}'"))),
        };
        v.map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn solve_options(&self) -> Result<Options, CliError> {
        let o = Options {
            max_iters: self.max_iters,
            grad_tol: self.grad_tol,
            precondition: self
                .precondition
                .parse::<Precondition>()
                .map_err(|e| CliError::Config(e.to_string()))?,
            coupling_enabled: self.coupling,
            deflation_strength: self.deflation_strength,
            newton: self.newton,
            newton_switch: self.newton_switch,
            dist_tol: self.dist_tol,
            safety_factor: self.safety_factor,
            seed_perturbation: self.seed_perturbation,
            seed: self.seed,
            ..Options::default()
        };
        o.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(o)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_and_comments() {
        let mut c = RunConfig::default();
        c.apply_text(
            "# header\nmode = minimax\nomega=-0.1 # trailing\n\nk_max = 2\nformats = json\n",
        )
        .unwrap();
        assert_eq!(c.mode, Mode::Minimax);
        assert_eq!(c.omega, Some(-0.1));
        assert_eq!(c.k_max, 2);
        assert!(c.wants("json") && !c.wants("csv"));
        assert!(c.apply_text("bogus = 1").is_err());
        assert!(c.apply_text("omega").is_err());
        assert!(c.apply_text("omega = x").is_err());
    }

    #[test]
    fn echo_round_trips() {
        let mut c = RunConfig::default();
        c.apply_text(
            "mode = multiplicity\nomega = -0.1\npotential = yukawa\nmu = 2\nnewton = false",
        )
        .unwrap();
        let echo = serde_json::to_string(&c).unwrap();
        let mut back = RunConfig::default();
        back.apply_json(&echo).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn omega_rules() {
        let mut c = RunConfig::default();
        assert!(matches!(c.validate(), Err(CliError::Config(_))));
        c.omega = Some(0.1);
        assert!(matches!(c.validate(), Err(CliError::Config(_))));
        c.mode = Mode::Minimax;
        assert!(matches!(c.validate(), Err(CliError::Hypothesis(_))));
        c.omega = Some(-0.1);
        assert!(c.validate().is_ok());
        c.mode = Mode::Hydrogen;
        c.omega = None;
        assert!(c.validate().is_ok());
    }
}
