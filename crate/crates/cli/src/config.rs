use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{io, CliError, Result};

pub const OUT_DIR_ENV: &str = "LCSIM_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "lcsim-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subcommand {
    Free,
    Conformal,
    Largeq,
    Sd,
    Quench,
    Oracle,
    Cell,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Free => "free",
            Subcommand::Conformal => "conformal",
            Subcommand::Largeq => "largeq",
            Subcommand::Sd => "sd",
            Subcommand::Quench => "quench",
            Subcommand::Oracle => "oracle",
            Subcommand::Cell => "cell",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// divide by `N + M`
    #[default]
    Total,
    /// divide by `N`
    Chain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FreeSection {
    #[serde(rename = "N")]
    pub n: usize,
    pub w: f64,
    pub beta: f64,
    #[serde(rename = "T_list")]
    pub t_list: Vec<f64>,
    /// site separation
    pub r: i64,
}

impl Default for FreeSection {
    fn default() -> Self {
        Self { n: 64, w: 1.0, beta: 10.0, t_list: (0..=20).map(|i| 0.5 * i as f64).collect(), r: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConformalSection {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub q: u32,
    pub p: u32,
    pub w: f64,
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "V")]
    pub v: f64,
    pub beta: f64,
    #[serde(rename = "alpha_S")]
    pub alpha_s: f64,
    #[serde(rename = "T_list")]
    pub t_list: Vec<f64>,
    pub r: f64,
}

impl Default for ConformalSection {
    fn default() -> Self {
        Self {
            n: 64,
            m: 1000,
            q: 4,
            p: 1,
            w: 1.0,
            j: 1.0,
            v: 0.1,
            beta: 50.0,
            alpha_s: lcsim_core::params::DEFAULT_ALPHA_S,
            t_list: (0..=20).map(|i| i as f64).collect(),
            r: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LargeqSection {
    #[serde(rename = "Jcal")]
    pub jcal: f64,
    #[serde(rename = "Vcal")]
    pub vcal: f64,
    pub beta: f64,
    pub kappa: f64,
    pub w: f64,
}

impl Default for LargeqSection {
    fn default() -> Self {
        Self { jcal: 1.0, vcal: 0.0, beta: 5.0, kappa: 1.0, w: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SdSection {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub q: u32,
    pub p: u32,
    pub w: f64,
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "V")]
    pub v: f64,
    pub beta: f64,
}

impl Default for SdSection {
    fn default() -> Self {
        Self { n: 18, m: 18, q: 4, p: 1, w: 1.0, j: 1.0, v: 0.0, beta: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuenchSection {
    #[serde(rename = "N_list")]
    pub n_list: Vec<usize>,
    /// cluster size; `M = N` for every chain length when absent
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    pub q: u32,
    pub p: u32,
    pub w: f64,
    #[serde(rename = "w_list", skip_serializing_if = "Vec::is_empty")]
    pub w_list: Vec<f64>,
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "V")]
    pub v: f64,
    pub beta: f64,
    #[serde(rename = "T_list")]
    pub t_list: Vec<f64>,
    pub per_majorana: Normalization,
    /// `[T_min, T_max]` for slope fits; the whole list when absent
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_window: Option<[f64; 2]>,
}

impl Default for QuenchSection {
    fn default() -> Self {
        Self {
            n_list: vec![18],
            m: None,
            q: 4,
            p: 1,
            w: 10.0,
            w_list: Vec::new(),
            j: 1.0,
            v: 0.0,
            beta: 0.0,
            t_list: vec![0.1, 0.2, 0.3],
            per_majorana: Normalization::Total,
            fit_window: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSection {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub q: u32,
    pub p: u32,
    pub w: f64,
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "V")]
    pub v: f64,
    pub beta: f64,
    pub realizations: usize,
    /// evenly spaced `τ ∈ [0, β]`
    pub tau_points: usize,
    /// add the large-N solution at the same `τ`
    pub compare_sd: bool,
}

impl Default for OracleSection {
    fn default() -> Self {
        Self { n: 8, m: 8, q: 4, p: 3, w: 0.5, j: 1.0, v: 0.5, beta: 2.0, realizations: 50, tau_points: 17, compare_sd: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CellSection {
    pub l: f64,
    pub r_plus: f64,
    pub l_pl: f64,
    /// emit the layer inventory instead of the summary row
    pub layers: bool,
}

impl Default for CellSection {
    fn default() -> Self {
        Self { l: 1.0, r_plus: 1.0, l_pl: 0.01, layers: false }
    }
}

/// Complete run description: general keys at the top level, one table per subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subcommand: Option<Subcommand>,
    pub seed: u64,
    pub tol: f64,
    pub max_iter: usize,
    pub mix: f64,
    pub n_tau: usize,
    pub n_seg: usize,
    /// worker threads, 0 for all available cores
    pub threads: usize,
    pub format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub free: Option<FreeSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conformal: Option<ConformalSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub largeq: Option<LargeqSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sd: Option<SdSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quench: Option<QuenchSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cell: Option<CellSection>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let solver = lcsim_core::SolverOptions::default();
        Self {
            subcommand: None,
            seed: 0,
            tol: solver.tol,
            max_iter: solver.max_iter,
            mix: solver.mixing,
            n_tau: 4096,
            n_seg: lcsim_core::quench_renyi::DEFAULT_SEGMENT_POINTS,
            threads: 0,
            format: Format::Csv,
            out: None,
            free: None,
            conformal: None,
            largeq: None,
            sd: None,
            quench: None,
            oracle: None,
            cell: None,
        }
    }
}

impl RunConfig {
    /// Reads TOML, or JSON when the extension is `.json`.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io(path.to_path_buf()))?;
        if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        } else {
            Self::from_toml(&text).map_err(|e| match e {
                CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
                other => other,
            })
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Fixes the subcommand, fills its section with defaults and drops the others.
    pub fn select(mut self, cmd: Subcommand) -> Result<Self> {
        if let Some(s) = self.subcommand {
            if s != cmd {
                return Err(CliError::range("subcommand", format!("config is for `{}`, invoked as `{}`", s.name(), cmd.name())));
            }
        }
        let active = RunConfig {
            subcommand: Some(cmd),
            free: (cmd == Subcommand::Free).then(|| self.free.take().unwrap_or_default()),
            conformal: (cmd == Subcommand::Conformal).then(|| self.conformal.take().unwrap_or_default()),
            largeq: (cmd == Subcommand::Largeq).then(|| self.largeq.take().unwrap_or_default()),
            sd: (cmd == Subcommand::Sd).then(|| self.sd.take().unwrap_or_default()),
            quench: (cmd == Subcommand::Quench).then(|| self.quench.take().unwrap_or_default()),
            oracle: (cmd == Subcommand::Oracle).then(|| self.oracle.take().unwrap_or_default()),
            cell: (cmd == Subcommand::Cell).then(|| self.cell.take().unwrap_or_default()),
            ..self
        };
        Ok(active)
    }

    pub fn subcommand(&self) -> Result<Subcommand> {
        self.subcommand.ok_or(CliError::Missing("subcommand"))
    }

    pub fn solver(&self) -> lcsim_core::SolverOptions {
        lcsim_core::SolverOptions { tol: self.tol, max_iter: self.max_iter, mixing: self.mix }
    }

    /// Output directory: the config, then the environment, then `./lcsim-out`.
    pub fn out_dir(&self) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
    }

    /// Range checks on the general keys and the active section.
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(CliError::range("tol", format!("must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(CliError::range("max_iter", "must be at least 1"));
        }
        if !(self.mix > 0.0 && self.mix <= 1.0) {
            return Err(CliError::range("mix", format!("must lie in (0, 1], got {}", self.mix)));
        }
        if self.n_tau < 256 || !self.n_tau.is_power_of_two() {
            return Err(CliError::range("n_tau", format!("must be a power of two >= 256, got {}", self.n_tau)));
        }
        if self.n_seg < lcsim_core::quench_renyi::DEFAULT_SEGMENT_POINTS {
            return Err(CliError::range("n_seg", format!("must be at least 10, got {}", self.n_seg)));
        }
        match self.subcommand()? {
            Subcommand::Free => {
                let s = self.free.as_ref().ok_or(CliError::Missing("free"))?;
                times("T_list", &s.t_list)?;
                non_negative("w", s.w)?;
                if !(s.beta > 0.0) {
                    return Err(CliError::range("beta", format!("must be positive (inf allowed), got {}", s.beta)));
                }
            }
            Subcommand::Conformal => {
                let s = self.conformal.as_ref().ok_or(CliError::Missing("conformal"))?;
                times("T_list", &s.t_list)?;
                couplings(s.w, s.j, s.v)?;
            }
            Subcommand::Largeq => {
                let s = self.largeq.as_ref().ok_or(CliError::Missing("largeq"))?;
                non_negative("Vcal", s.vcal)?;
            }
            Subcommand::Sd => {
                let s = self.sd.as_ref().ok_or(CliError::Missing("sd"))?;
                couplings(s.w, s.j, s.v)?;
            }
            Subcommand::Quench => {
                let s = self.quench.as_ref().ok_or(CliError::Missing("quench"))?;
                couplings(s.w, s.j, s.v)?;
                if s.beta != 0.0 {
                    return Err(CliError::range("beta", format!("the quench starts at infinite temperature, need 0, got {}", s.beta)));
                }
                if s.n_list.is_empty() {
                    return Err(CliError::range("N_list", "must not be empty"));
                }
                if let Some(&n) = s.n_list.iter().find(|n| **n % 2 != 0 || **n < 2) {
                    return Err(CliError::range("N_list", format!("chain lengths must be even and >= 2, got {n}")));
                }
                if s.t_list.is_empty() {
                    return Err(CliError::range("T_list", "must not be empty"));
                }
                times("T_list", &s.t_list)?;
                for &w in &s.w_list {
                    non_negative("w_list", w)?;
                }
                if let Some([a, b]) = s.fit_window {
                    if !(a <= b) {
                        return Err(CliError::range("fit_window", format!("need T_min <= T_max, got [{a}, {b}]")));
                    }
                }
            }
            Subcommand::Oracle => {
                let s = self.oracle.as_ref().ok_or(CliError::Missing("oracle"))?;
                couplings(s.w, s.j, s.v)?;
                if s.realizations == 0 {
                    return Err(CliError::range("realizations", "must be at least 1"));
                }
                if s.tau_points < 2 {
                    return Err(CliError::range("tau_points", format!("must be at least 2, got {}", s.tau_points)));
                }
            }
            Subcommand::Cell => {
                let s = self.cell.as_ref().ok_or(CliError::Missing("cell"))?;
                for (key, x) in [("l", s.l), ("r_plus", s.r_plus), ("l_pl", s.l_pl)] {
                    if !(x > 0.0 && x.is_finite()) {
                        return Err(CliError::range(key, format!("must be positive, got {x}")));
                    }
                }
            }
        }
        Ok(())
    }
}

fn non_negative(key: &'static str, x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(CliError::range(key, format!("must be finite and non-negative, got {x}")))
    }
}

fn couplings(w: f64, j: f64, v: f64) -> Result<()> {
    non_negative("w", w)?;
    non_negative("J", j)?;
    non_negative("V", v)
}

fn times(key: &'static str, ts: &[f64]) -> Result<()> {
    match ts.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
        Some(t) => Err(CliError::range(key, format!("times must be finite and non-negative, got {t}"))),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_all_defaults() {
        let cfg = RunConfig::from_toml("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        let cfg = cfg.select(Subcommand::Quench).unwrap();
        assert_eq!(cfg.quench, Some(QuenchSection::default()));
        assert!(cfg.free.is_none());
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = RunConfig::from_toml("sed = 3").unwrap_err().to_string();
        assert!(err.contains("sed"), "{err}");
        let err = RunConfig::from_toml("[quench]\nbogus = 1").unwrap_err().to_string();
        assert!(err.contains("bogus"), "{err}");
        let err = RunConfig::from_toml("[nonsense]\nx = 1").unwrap_err().to_string();
        assert!(err.contains("nonsense"), "{err}");
    }

    #[test]
    fn range_errors_name_the_key() {
        let cfg = RunConfig::from_toml("[sd]\nV = -1.0").unwrap().select(Subcommand::Sd).unwrap();
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("`V`"), "{err}");
        let cfg = RunConfig::from_toml("mix = 1.5").unwrap().select(Subcommand::Cell).unwrap();
        assert!(cfg.validate().unwrap_err().to_string().contains("`mix`"));
        let cfg = RunConfig::from_toml("[quench]\nbeta = 1.0").unwrap().select(Subcommand::Quench).unwrap();
        assert!(cfg.validate().unwrap_err().to_string().contains("`beta`"));
        let cfg = RunConfig::from_toml("[quench]\nN_list = [18, 19]").unwrap().select(Subcommand::Quench).unwrap();
        assert!(cfg.validate().unwrap_err().to_string().contains("`N_list`"));
    }

    #[test]
    fn mismatched_subcommand_is_rejected() {
        let cfg = RunConfig::from_toml("subcommand = \"cell\"").unwrap();
        assert!(cfg.select(Subcommand::Free).unwrap_err().to_string().contains("subcommand"));
    }

    #[test]
    fn echo_round_trips_through_json_and_toml() {
        let cfg = RunConfig::from_toml("seed = 7\n[quench]\nN_list = [18, 20, 22]\nfit_window = [0.1, 0.3]")
            .unwrap()
            .select(Subcommand::Quench)
            .unwrap();
        let json = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&json).unwrap(), cfg);
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg);
    }
}
