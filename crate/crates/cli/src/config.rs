//! Structured plain-text run configuration: `[section]` headers and
//! `key = value` lines, `#` comments. Errors carry the offending line
//! number so a bad config is easy to fix.

use std::collections::HashMap;
use std::fmt;

#[derive(Debug)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError {
        line,
        message: message.into(),
    })
}

/// A parsed key with its value text and source line.
#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

#[derive(Debug, Default)]
pub struct RawConfig {
    sections: HashMap<String, HashMap<String, Entry>>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut sections: HashMap<String, HashMap<String, Entry>> = HashMap::new();
        let mut current: Option<String> = None;
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let Some(name) = rest.strip_suffix(']') else {
                    return err(line_no, "unterminated section header");
                };
                let name = name.trim().to_string();
                if name.is_empty() {
                    return err(line_no, "empty section name");
                }
                sections.entry(name.clone()).or_default();
                current = Some(name);
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return err(line_no, format!("expected `key = value`, found `{line}`"));
            };
            let Some(section) = &current else {
                return err(line_no, "key outside any [section]");
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() {
                return err(line_no, "empty key");
            }
            let table = sections.get_mut(section).expect("section exists");
            if table.contains_key(&key) {
                return err(line_no, format!("duplicate key `{key}` in [{section}]"));
            }
            table.insert(
                key,
                Entry {
                    value,
                    line: line_no,
                },
            );
        }
        Ok(Self { sections })
    }

    fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.sections.get(section).and_then(|t| t.get(key))
    }

    fn require(&self, section: &str, key: &str) -> Result<&Entry, ConfigError> {
        self.get(section, key).ok_or(ConfigError {
            line: 0,
            message: format!("missing required key `{key}` in [{section}]"),
        })
    }

    fn f64_of(&self, section: &str, key: &str) -> Result<(f64, usize), ConfigError> {
        let e = self.require(section, key)?;
        match e.value.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok((v, e.line)),
            _ => err(e.line, format!("`{key}` must be a finite number")),
        }
    }

    fn usize_of(&self, section: &str, key: &str) -> Result<(usize, usize), ConfigError> {
        let e = self.require(section, key)?;
        match e.value.parse::<usize>() {
            Ok(v) => Ok((v, e.line)),
            _ => err(e.line, format!("`{key}` must be a non-negative integer")),
        }
    }

    fn opt_f64(&self, section: &str, key: &str) -> Result<Option<(f64, usize)>, ConfigError> {
        match self.get(section, key) {
            None => Ok(None),
            Some(_) => self.f64_of(section, key).map(Some),
        }
    }

    fn opt_bool(&self, section: &str, key: &str) -> Result<Option<bool>, ConfigError> {
        match self.get(section, key) {
            None => Ok(None),
            Some(e) => match e.value.as_str() {
                "true" => Ok(Some(true)),
                "false" => Ok(Some(false)),
                _ => err(e.line, format!("`{key}` must be true or false")),
            },
        }
    }

    fn opt_string(&self, section: &str, key: &str) -> Option<String> {
        self.get(section, key).map(|e| e.value.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoreChoice {
    Plane,
    Wedge { bend_angle: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RunMode {
    Sweep,
    Continue,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub core: CoreChoice,
    pub rho_min: f64,
    pub rho_max: f64,
    pub n_rho: usize,
    pub n_theta: usize,
    pub mode: RunMode,
    pub k_start: f64,
    pub k_end: f64,
    pub k_step: f64,
    pub dt: f64,
    pub paper_literal: bool,
    pub track_det_law: bool,
    pub perturb_amplitude: f64,
    pub perturb_frequency: u32,
    pub csv: Option<String>,
    pub mesh_prefix: Option<String>,
    pub report: Option<String>,
}

impl RunConfig {
    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let raw = RawConfig::parse(text)?;

        let core = match raw.get("core", "kind") {
            None => CoreChoice::Plane,
            Some(e) => match e.value.as_str() {
                "plane" => CoreChoice::Plane,
                "wedge" => {
                    let (bend, line) = raw.f64_of("core", "bend_angle")?;
                    if !(bend > 0.0 && bend < std::f64::consts::PI) {
                        return err(line, "`bend_angle` must lie in (0, pi)");
                    }
                    CoreChoice::Wedge { bend_angle: bend }
                }
                other => return err(e.line, format!("unknown core kind `{other}`")),
            },
        };

        let (rho_min, l_rho_min) = raw.f64_of("chart", "rho_min")?;
        let (rho_max, l_rho_max) = raw.f64_of("chart", "rho_max")?;
        let (n_rho, l_n_rho) = raw.usize_of("chart", "n_rho")?;
        let (n_theta, l_n_theta) = raw.usize_of("chart", "n_theta")?;
        if !(rho_min > 0.0) {
            return err(l_rho_min, "`rho_min` must be positive");
        }
        if !(rho_max > rho_min) {
            return err(l_rho_max, "`rho_max` must exceed `rho_min`");
        }
        if n_rho < 5 {
            return err(l_n_rho, "`n_rho` must be at least 5");
        }
        if n_theta < 8 {
            return err(l_n_theta, "`n_theta` must be at least 8");
        }

        let mode_entry = raw.require("run", "mode")?;
        let mode = match mode_entry.value.as_str() {
            "sweep" => RunMode::Sweep,
            "continue" => RunMode::Continue,
            other => return err(mode_entry.line, format!("unknown run mode `{other}`")),
        };
        let (k_start, l_k_start) = raw.f64_of("run", "k_start")?;
        let (k_end, l_k_end) = raw.f64_of("run", "k_end")?;
        if !(k_start > 0.0 && k_start < 1.0) {
            return err(l_k_start, "`k_start` must lie in (0, 1)");
        }
        if !(k_end > 0.0 && k_end < 1.0) {
            return err(l_k_end, "`k_end` must lie in (0, 1)");
        }
        if k_end <= k_start {
            return err(l_k_end, "`k_end` must exceed `k_start`");
        }
        let k_step = match raw.opt_f64("run", "k_step")? {
            Some((v, line)) => {
                if !(v > 0.0) {
                    return err(line, "`k_step` must be positive");
                }
                v
            }
            None => 0.1,
        };
        let dt = match raw.opt_f64("run", "dt")? {
            Some((v, line)) => {
                if !(v > 0.0) {
                    return err(line, "`dt` must be positive");
                }
                v
            }
            None => 1e-2,
        };
        let paper_literal = match raw.get("run", "forcing") {
            None => false,
            Some(e) => match e.value.as_str() {
                "det-normalized" => false,
                "paper-literal" => true,
                other => return err(e.line, format!("unknown forcing `{other}`")),
            },
        };
        let track_det_law = raw.opt_bool("run", "track_det_law")?.unwrap_or(false);

        let perturb_amplitude = raw
            .opt_f64("perturbation", "amplitude")?
            .map(|(v, _)| v)
            .unwrap_or(0.0);
        let perturb_frequency = match raw.get("perturbation", "angular_frequency") {
            None => 0,
            Some(e) => match e.value.parse::<u32>() {
                Ok(v) => v,
                Err(_) => {
                    return err(e.line, "`angular_frequency` must be a non-negative integer")
                }
            },
        };

        Ok(Self {
            core,
            rho_min,
            rho_max,
            n_rho,
            n_theta,
            mode,
            k_start,
            k_end,
            k_step,
            dt,
            paper_literal,
            track_det_law,
            perturb_amplitude,
            perturb_frequency,
            csv: raw.opt_string("outputs", "csv"),
            mesh_prefix: raw.opt_string("outputs", "mesh_prefix"),
            report: raw.opt_string("outputs", "report"),
        })
    }
}
