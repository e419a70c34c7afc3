//! Sectioned key = value experiment configuration.
//!
//! Grammar: `[section]` headers, `key = value` lines, `#` comments (full
//! line or trailing), blank lines ignored. Unknown sections or keys are
//! rejected with the offending line number. `to_config_text` renders the
//! resolved configuration back out so a run can be reproduced from its
//! output directory alone.

use crate::error::{Error, Result};
use crate::field::SpectralVectorField;
use crate::grid::{make_grid, Grid};
use num_complex::Complex64;
use serde::Serialize;
use std::fmt::Write as _;

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub nu: f64,
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    pub record_every: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            nu: 1.0,
            n: 32,
            dt: 1e-3,
            t_end: 5.0,
            record_every: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Shear,
    TaylorGreen,
    Random,
    Modes,
}

#[derive(Debug, Clone, Serialize)]
pub struct DataConfig {
    pub preset: Preset,
    pub seed: u64,
    pub slope: f64,
    pub amplitude: f64,
    pub k_max: usize,
    /// Rescale the datum so its X^{-1} norm hits this value.
    pub target_x_m1: Option<f64>,
    /// Explicit modes for `preset = modes`: (xi, coefficient).
    pub modes: Vec<([i64; 3], [Complex64; 3])>,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            preset: Preset::TaylorGreen,
            seed: 7,
            slope: 2.0,
            amplitude: 1.0,
            k_max: 4,
            target_x_m1: None,
            modes: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SplitConfig {
    /// Target radius; defaults to nu / 2 when absent.
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityConfig {
    /// Perturbation size as a fraction of the admissible threshold.
    pub delta_fraction: f64,
    pub seed: u64,
    pub slope: f64,
    pub amplitude: f64,
    pub k_max: usize,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        StabilityConfig {
            delta_fraction: 0.9,
            seed: 101,
            slope: 2.0,
            amplitude: 1.0,
            k_max: 4,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PicardConfig {
    pub t_end: f64,
    pub n_time: usize,
    pub substeps: usize,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for PicardConfig {
    fn default() -> Self {
        PicardConfig {
            t_end: 0.1,
            n_time: 20,
            substeps: 5,
            max_iter: 30,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ExperimentConfig {
    pub run: RunConfig,
    pub data: DataConfig,
    pub splitting: SplitConfig,
    pub stability: StabilityConfig,
    pub picard: PicardConfig,
}

fn parse_num<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::ConfigParse {
        line,
        message: format!("cannot parse value {value:?} for key {key}"),
    })
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut section = String::from("run");
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = match raw.split_once('#') {
                Some((head, _)) => head,
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or(Error::ConfigParse {
                    line: line_no,
                    message: "unterminated section header".into(),
                })?;
                match name {
                    "run" | "data" | "splitting" | "stability" | "picard" => {
                        section = name.to_string();
                    }
                    other => {
                        return Err(Error::ConfigParse {
                            line: line_no,
                            message: format!("unknown section [{other}]"),
                        })
                    }
                }
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(Error::ConfigParse {
                line: line_no,
                message: "expected key = value".into(),
            })?;
            let (key, value) = (key.trim(), value.trim());
            cfg.set(&section, key, value, line_no)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, section: &str, key: &str, value: &str, line: usize) -> Result<()> {
        match (section, key) {
            ("run", "nu") => self.run.nu = parse_num(line, key, value)?,
            ("run", "n") => self.run.n = parse_num(line, key, value)?,
            ("run", "dt") => self.run.dt = parse_num(line, key, value)?,
            ("run", "t_end") => self.run.t_end = parse_num(line, key, value)?,
            ("run", "record_every") => self.run.record_every = parse_num(line, key, value)?,
            ("data", "preset") => {
                self.data.preset = match value {
                    "shear" => Preset::Shear,
                    "taylor_green" => Preset::TaylorGreen,
                    "random" => Preset::Random,
                    "modes" => Preset::Modes,
                    other => {
                        return Err(Error::ConfigParse {
                            line,
                            message: format!("unknown preset {other:?}"),
                        })
                    }
                }
            }
            ("data", "seed") => self.data.seed = parse_num(line, key, value)?,
            ("data", "slope") => self.data.slope = parse_num(line, key, value)?,
            ("data", "amplitude") => self.data.amplitude = parse_num(line, key, value)?,
            ("data", "k_max") => self.data.k_max = parse_num(line, key, value)?,
            ("data", "target_x_m1") => {
                self.data.target_x_m1 = Some(parse_num(line, key, value)?)
            }
            ("data", "mode") => {
                let nums: Vec<f64> = value
                    .split_whitespace()
                    .map(|v| parse_num(line, key, v))
                    .collect::<Result<_>>()?;
                if nums.len() != 9 {
                    return Err(Error::ConfigParse {
                        line,
                        message: "mode needs 9 numbers: xi1 xi2 xi3 then re im per component"
                            .into(),
                    });
                }
                let xi = [nums[0] as i64, nums[1] as i64, nums[2] as i64];
                let c = [
                    Complex64::new(nums[3], nums[4]),
                    Complex64::new(nums[5], nums[6]),
                    Complex64::new(nums[7], nums[8]),
                ];
                self.data.modes.push((xi, c));
            }
            ("splitting", "epsilon") => {
                self.splitting.epsilon = Some(parse_num(line, key, value)?)
            }
            ("stability", "delta_fraction") => {
                self.stability.delta_fraction = parse_num(line, key, value)?
            }
            ("stability", "seed") => self.stability.seed = parse_num(line, key, value)?,
            ("stability", "slope") => self.stability.slope = parse_num(line, key, value)?,
            ("stability", "amplitude") => {
                self.stability.amplitude = parse_num(line, key, value)?
            }
            ("stability", "k_max") => self.stability.k_max = parse_num(line, key, value)?,
            ("picard", "t_end") => self.picard.t_end = parse_num(line, key, value)?,
            ("picard", "n_time") => self.picard.n_time = parse_num(line, key, value)?,
            ("picard", "substeps") => self.picard.substeps = parse_num(line, key, value)?,
            ("picard", "max_iter") => self.picard.max_iter = parse_num(line, key, value)?,
            ("picard", "tol") => self.picard.tol = parse_num(line, key, value)?,
            _ => {
                return Err(Error::ConfigParse {
                    line,
                    message: format!("unknown key {key:?} in section [{section}]"),
                })
            }
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        let invalid = |key: &str, message: String| Error::ConfigInvalid {
            key: key.to_string(),
            message,
        };
        if !(self.run.nu > 0.0) {
            return Err(invalid("nu", format!("must be positive, got {}", self.run.nu)));
        }
        if !(self.run.dt > 0.0) || !(self.run.t_end > 0.0) {
            return Err(invalid("dt", "dt and t_end must be positive".into()));
        }
        if self.run.record_every == 0 {
            return Err(invalid("record_every", "must be at least 1".into()));
        }
        if let Some(eps) = self.splitting.epsilon {
            if !(eps > 0.0) {
                return Err(invalid("epsilon", format!("must be positive, got {eps}")));
            }
        }
        if !(self.stability.delta_fraction > 0.0) {
            return Err(invalid(
                "delta_fraction",
                "must be positive".into(),
            ));
        }
        if self.data.preset == Preset::Modes && self.data.modes.is_empty() {
            return Err(invalid("mode", "preset = modes needs at least one mode".into()));
        }
        if self.picard.n_time == 0 || self.picard.substeps == 0 {
            return Err(invalid("n_time", "picard grid sizes must be positive".into()));
        }
        Ok(())
    }

    pub fn epsilon(&self) -> f64 {
        self.splitting.epsilon.unwrap_or(self.run.nu / 2.0)
    }

    pub fn grid(&self) -> Result<Grid> {
        make_grid(self.run.n)
    }

    /// Realize the configured initial datum on the configured grid.
    pub fn build_datum(&self) -> Result<SpectralVectorField> {
        let grid = self.grid()?;
        let mut u0 = match self.data.preset {
            Preset::Shear => SpectralVectorField::shear(grid).scaled(self.data.amplitude),
            Preset::TaylorGreen => {
                SpectralVectorField::taylor_green(grid).scaled(self.data.amplitude)
            }
            Preset::Random => SpectralVectorField::random_divfree(
                grid,
                self.data.seed,
                self.data.slope,
                self.data.amplitude,
                self.data.k_max,
            )?,
            Preset::Modes => {
                SpectralVectorField::from_modes(grid, &self.data.modes)?.leray_project()
            }
        };
        if let Some(target) = self.data.target_x_m1 {
            let current = crate::norms::x_norm(&u0, -1)?;
            if current == 0.0 {
                return Err(Error::ConfigInvalid {
                    key: "target_x_m1".into(),
                    message: "cannot rescale a zero datum".into(),
                });
            }
            u0 = u0.scaled(target / current);
        }
        Ok(u0)
    }

    /// Build the perturbation used by the stability experiment, scaled so
    /// its X^{-1} norm equals `delta`.
    pub fn build_perturbation(&self, delta: f64) -> Result<SpectralVectorField> {
        let grid = self.grid()?;
        let raw = SpectralVectorField::random_divfree(
            grid,
            self.stability.seed,
            self.stability.slope,
            self.stability.amplitude,
            self.stability.k_max,
        )?;
        let norm = crate::norms::x_norm(&raw, -1)?;
        Ok(raw.scaled(delta / norm))
    }

    /// Render the fully resolved configuration; `parse` round-trips it.
    pub fn to_config_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[run]");
        let _ = writeln!(s, "nu = {}", self.run.nu);
        let _ = writeln!(s, "n = {}", self.run.n);
        let _ = writeln!(s, "dt = {}", self.run.dt);
        let _ = writeln!(s, "t_end = {}", self.run.t_end);
        let _ = writeln!(s, "record_every = {}", self.run.record_every);
        let _ = writeln!(s, "\n[data]");
        let preset = match self.data.preset {
            Preset::Shear => "shear",
            Preset::TaylorGreen => "taylor_green",
            Preset::Random => "random",
            Preset::Modes => "modes",
        };
        let _ = writeln!(s, "preset = {preset}");
        let _ = writeln!(s, "seed = {}", self.data.seed);
        let _ = writeln!(s, "slope = {}", self.data.slope);
        let _ = writeln!(s, "amplitude = {}", self.data.amplitude);
        let _ = writeln!(s, "k_max = {}", self.data.k_max);
        if let Some(t) = self.data.target_x_m1 {
            let _ = writeln!(s, "target_x_m1 = {t}");
        }
        for (xi, c) in &self.data.modes {
            let _ = writeln!(
                s,
                "mode = {} {} {} {} {} {} {} {} {}",
                xi[0], xi[1], xi[2], c[0].re, c[0].im, c[1].re, c[1].im, c[2].re, c[2].im
            );
        }
        let _ = writeln!(s, "\n[splitting]");
        let _ = writeln!(s, "epsilon = {}", self.epsilon());
        let _ = writeln!(s, "\n[stability]");
        let _ = writeln!(s, "delta_fraction = {}", self.stability.delta_fraction);
        let _ = writeln!(s, "seed = {}", self.stability.seed);
        let _ = writeln!(s, "slope = {}", self.stability.slope);
        let _ = writeln!(s, "amplitude = {}", self.stability.amplitude);
        let _ = writeln!(s, "k_max = {}", self.stability.k_max);
        let _ = writeln!(s, "\n[picard]");
        let _ = writeln!(s, "t_end = {}", self.picard.t_end);
        let _ = writeln!(s, "n_time = {}", self.picard.n_time);
        let _ = writeln!(s, "substeps = {}", self.picard.substeps);
        let _ = writeln!(s, "max_iter = {}", self.picard.max_iter);
        let _ = writeln!(s, "tol = {}", self.picard.tol);
        s
    }

    pub fn solver(&self) -> crate::dynamics::SolverConfig {
        crate::dynamics::SolverConfig {
            nu: self.run.nu,
            dt: self.run.dt,
            t_end: self.run.t_end,
            record_every: self.run.record_every,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_from_empty_text() {
        let cfg = ExperimentConfig::parse("").unwrap();
        assert_eq!(cfg.run.n, 32);
        assert_eq!(cfg.run.nu, 1.0);
        assert_eq!(cfg.epsilon(), 0.5);
    }

    #[test]
    fn full_round_trip() {
        let text = "\
[run]
nu = 0.5
n = 16
dt = 0.002
t_end = 8 # comment
record_every = 25

[data]
preset = random
seed = 42
slope = 2.5
amplitude = 0.1
k_max = 5
target_x_m1 = 1.0

[splitting]
epsilon = 0.25

[stability]
delta_fraction = 0.9
seed = 3

[picard]
n_time = 40
";
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.run.nu, 0.5);
        assert_eq!(cfg.data.preset, Preset::Random);
        assert_eq!(cfg.data.target_x_m1, Some(1.0));
        assert_eq!(cfg.picard.n_time, 40);
        let rendered = cfg.to_config_text();
        let again = ExperimentConfig::parse(&rendered).unwrap();
        assert_eq!(rendered, again.to_config_text());
    }

    #[test]
    fn unknown_key_reports_line() {
        let err = ExperimentConfig::parse("[run]\nnu = 1\nbogus = 2\n").unwrap_err();
        match err {
            Error::ConfigParse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn unknown_section_rejected() {
        assert!(ExperimentConfig::parse("[nope]\n").is_err());
    }

    #[test]
    fn bad_value_rejected() {
        assert!(ExperimentConfig::parse("[run]\nnu = fast\n").is_err());
        assert!(ExperimentConfig::parse("[run]\nnu = -1\n").is_err());
    }

    #[test]
    fn modes_preset_needs_modes() {
        assert!(ExperimentConfig::parse("[data]\npreset = modes\n").is_err());
    }

    #[test]
    fn mode_lines_build_a_datum() {
        let text = "\
[run]
n = 8

[data]
preset = modes
mode = 1 0 0  0 0 0.5 0 0 0
";
        let cfg = ExperimentConfig::parse(text).unwrap();
        let u0 = cfg.build_datum().unwrap();
        let shear = SpectralVectorField::shear(cfg.grid().unwrap());
        assert!(u0.sub(&shear).max_magnitude() < 1e-15);
    }

    #[test]
    fn target_rescale_hits_norm() {
        let text = "[data]\npreset = taylor_green\ntarget_x_m1 = 0.37\n";
        let cfg = ExperimentConfig::parse(text).unwrap();
        let u0 = cfg.build_datum().unwrap();
        let norm = crate::norms::x_norm(&u0, -1).unwrap();
        assert!((norm - 0.37).abs() < 1e-12);
    }
}
