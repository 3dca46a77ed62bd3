use std::path::PathBuf;

use clap::{Args, Parser};

use crate::config::{Format, Normalization, RunConfig, Subcommand};
use crate::error::Result;

#[derive(Debug, Parser)]
#[command(name = "lcsim", version, about = "Free Majorana chain coupled to an SYK cluster")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Subcommand)]
pub enum Command {
    /// Free-chain OTOC on a time grid
    #[command(allow_negative_numbers = true)]
    Free(FreeArgs),
    /// Conformal-bath OTOC and scrambling times
    #[command(allow_negative_numbers = true)]
    Conformal(ConformalArgs),
    /// Large-q saddle and Lyapunov exponent
    #[command(allow_negative_numbers = true)]
    Largeq(LargeqArgs),
    /// Imaginary-time Schwinger-Dyson solution of the cluster
    #[command(allow_negative_numbers = true)]
    Sd(SdArgs),
    /// Second Renyi entropy after the thermofield quench
    #[command(allow_negative_numbers = true)]
    Quench(QuenchArgs),
    /// Disorder-averaged exact two-point functions
    #[command(allow_negative_numbers = true)]
    Oracle(OracleArgs),
    /// Black-hole cell model
    #[command(allow_negative_numbers = true)]
    Cell(CellArgs),
}

#[derive(Debug, Default, Args)]
pub struct CommonArgs {
    /// TOML config, or JSON when the extension is .json
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// output directory [env: LCSIM_OUT_DIR, default ./lcsim-out]
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub mix: Option<f64>,
    #[arg(long = "n-tau")]
    pub n_tau: Option<usize>,
    #[arg(long = "n-seg")]
    pub n_seg: Option<usize>,
    /// worker threads, 0 for all cores
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Default, Args)]
pub struct CouplingArgs {
    #[arg(long = "q")]
    pub q: Option<u32>,
    #[arg(long = "p")]
    pub p: Option<u32>,
    #[arg(long = "w")]
    pub w: Option<f64>,
    #[arg(long = "J")]
    pub j: Option<f64>,
    #[arg(long = "V")]
    pub v: Option<f64>,
    #[arg(long = "beta")]
    pub beta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FreeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long = "w")]
    pub w: Option<f64>,
    #[arg(long = "beta")]
    pub beta: Option<f64>,
    #[arg(long = "T-list", value_delimiter = ',')]
    pub t_list: Option<Vec<f64>>,
    #[arg(long = "r")]
    pub r: Option<i64>,
}

#[derive(Debug, Args)]
pub struct ConformalArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long = "M")]
    pub m: Option<usize>,
    #[command(flatten)]
    pub couplings: CouplingArgs,
    #[arg(long = "alpha-S")]
    pub alpha_s: Option<f64>,
    #[arg(long = "T-list", value_delimiter = ',')]
    pub t_list: Option<Vec<f64>>,
    #[arg(long = "r")]
    pub r: Option<f64>,
}

#[derive(Debug, Args)]
pub struct LargeqArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long = "Jcal")]
    pub jcal: Option<f64>,
    #[arg(long = "Vcal")]
    pub vcal: Option<f64>,
    #[arg(long = "beta")]
    pub beta: Option<f64>,
    #[arg(long = "kappa")]
    pub kappa: Option<f64>,
    #[arg(long = "w")]
    pub w: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SdArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long = "M")]
    pub m: Option<usize>,
    #[command(flatten)]
    pub couplings: CouplingArgs,
}

#[derive(Debug, Args)]
pub struct QuenchArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long = "N-list", value_delimiter = ',')]
    pub n_list: Option<Vec<usize>>,
    /// fixed cluster size instead of M = N
    #[arg(long = "M")]
    pub m: Option<usize>,
    #[command(flatten)]
    pub couplings: CouplingArgs,
    #[arg(long = "w-list", value_delimiter = ',')]
    pub w_list: Option<Vec<f64>>,
    #[arg(long = "T-list", value_delimiter = ',')]
    pub t_list: Option<Vec<f64>>,
    #[arg(long = "per-majorana", value_enum)]
    pub per_majorana: Option<Normalization>,
    /// T_min,T_max
    #[arg(long = "fit-window", value_delimiter = ',', num_args = 2)]
    pub fit_window: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long = "M")]
    pub m: Option<usize>,
    #[command(flatten)]
    pub couplings: CouplingArgs,
    #[arg(long)]
    pub realizations: Option<usize>,
    #[arg(long = "tau-points")]
    pub tau_points: Option<usize>,
    #[arg(long = "compare-sd")]
    pub compare_sd: Option<bool>,
}

#[derive(Debug, Args)]
pub struct CellArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long = "l")]
    pub l: Option<f64>,
    #[arg(long = "r-plus")]
    pub r_plus: Option<f64>,
    #[arg(long = "l-pl")]
    pub l_pl: Option<f64>,
    /// print the layer inventory instead of the summary
    #[arg(long)]
    pub layers: bool,
}

macro_rules! set {
    ($($dst:expr => $src:expr),* $(,)?) => {
        $(if let Some(x) = $src { $dst = x; })*
    };
}

impl CommonArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        set!(
            cfg.format => self.format,
            cfg.seed => self.seed,
            cfg.tol => self.tol,
            cfg.max_iter => self.max_iter,
            cfg.mix => self.mix,
            cfg.n_tau => self.n_tau,
            cfg.n_seg => self.n_seg,
            cfg.threads => self.threads,
        );
        if let Some(out) = &self.out {
            cfg.out = Some(out.clone());
        }
    }
}

impl Command {
    fn parts(&self) -> (Subcommand, &CommonArgs) {
        match self {
            Command::Free(a) => (Subcommand::Free, &a.common),
            Command::Conformal(a) => (Subcommand::Conformal, &a.common),
            Command::Largeq(a) => (Subcommand::Largeq, &a.common),
            Command::Sd(a) => (Subcommand::Sd, &a.common),
            Command::Quench(a) => (Subcommand::Quench, &a.common),
            Command::Oracle(a) => (Subcommand::Oracle, &a.common),
            Command::Cell(a) => (Subcommand::Cell, &a.common),
        }
    }

    /// Config file first, flags on top, then validation.
    pub fn resolve(&self) -> Result<RunConfig> {
        let (sub, common) = self.parts();
        let file = match &common.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        let mut cfg = file.select(sub)?;
        common.apply(&mut cfg);
        match self {
            Command::Free(a) => {
                let s = cfg.free.as_mut().expect("selected");
                set!(s.n => a.n, s.w => a.w, s.beta => a.beta, s.t_list => a.t_list.clone(), s.r => a.r);
            }
            Command::Conformal(a) => {
                let s = cfg.conformal.as_mut().expect("selected");
                let c = &a.couplings;
                set!(
                    s.n => a.n, s.m => a.m, s.q => c.q, s.p => c.p, s.w => c.w, s.j => c.j, s.v => c.v,
                    s.beta => c.beta, s.alpha_s => a.alpha_s, s.t_list => a.t_list.clone(), s.r => a.r,
                );
            }
            Command::Largeq(a) => {
                let s = cfg.largeq.as_mut().expect("selected");
                set!(s.jcal => a.jcal, s.vcal => a.vcal, s.beta => a.beta, s.kappa => a.kappa, s.w => a.w);
            }
            Command::Sd(a) => {
                let s = cfg.sd.as_mut().expect("selected");
                let c = &a.couplings;
                set!(
                    s.n => a.n, s.m => a.m, s.q => c.q, s.p => c.p, s.w => c.w, s.j => c.j, s.v => c.v,
                    s.beta => c.beta,
                );
            }
            Command::Quench(a) => {
                let s = cfg.quench.as_mut().expect("selected");
                let c = &a.couplings;
                set!(
                    s.n_list => a.n_list.clone(), s.q => c.q, s.p => c.p, s.w => c.w, s.j => c.j, s.v => c.v,
                    s.beta => c.beta, s.w_list => a.w_list.clone(), s.t_list => a.t_list.clone(),
                    s.per_majorana => a.per_majorana,
                );
                if a.m.is_some() {
                    s.m = a.m;
                }
                if let Some(w) = &a.fit_window {
                    s.fit_window = Some([w[0], w[1]]);
                }
            }
            Command::Oracle(a) => {
                let s = cfg.oracle.as_mut().expect("selected");
                let c = &a.couplings;
                set!(
                    s.n => a.n, s.m => a.m, s.q => c.q, s.p => c.p, s.w => c.w, s.j => c.j, s.v => c.v,
                    s.beta => c.beta, s.realizations => a.realizations, s.tau_points => a.tau_points,
                    s.compare_sd => a.compare_sd,
                );
            }
            Command::Cell(a) => {
                let s = cfg.cell.as_mut().expect("selected");
                set!(s.l => a.l, s.r_plus => a.r_plus, s.l_pl => a.l_pl);
                if a.layers {
                    s.layers = true;
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
