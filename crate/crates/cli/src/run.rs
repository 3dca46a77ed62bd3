use std::f64::consts::PI;
use std::time::Instant;

use lcsim_core::cell_model::{cell_inventory, scrambling_times, stretched_horizon, AdsParams};
use lcsim_core::conformal_bath::{combined_otoc, otoc_correction, otoc_growth_rate, scrambling_time};
use lcsim_core::ed_oracle::averaged_two_point;
use lcsim_core::free_chain::{free_otoc, free_otoc_lattice};
use lcsim_core::large_q::{lyapunov_conformal, lyapunov_hamiltonian, lyapunov_perturbed, solve_alpha, DampingVariant, ModeGrid};
use lcsim_core::quench_renyi::{renyi_sweep, PerMajorana, SweepOptions};
use lcsim_core::sd_equilibrium::{solve_sd, ImagGrid};
use lcsim_core::{ChainParams, ConformalBath, LargeQParams, ModelParams};

use crate::config::{
    CellSection, ConformalSection, FreeSection, LargeqSection, Normalization, OracleSection, QuenchSection, RunConfig,
    SdSection, Subcommand,
};
use crate::error::{CliError, Result};
use crate::output::{Diagnostics, ResultRecord, Table, Written};

/// Computes the record for a validated config.
pub fn compute(cfg: &RunConfig) -> Result<ResultRecord> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::range("threads", e.to_string()))?;
    let start = Instant::now();
    let mut diag = Diagnostics { version: env!("CARGO_PKG_VERSION").to_string(), ..Default::default() };
    let section = |name| CliError::Missing(name);
    let payload = pool.install(|| match cfg.subcommand()? {
        Subcommand::Free => free(cfg.free.as_ref().ok_or(section("free"))?, &mut diag),
        Subcommand::Conformal => conformal(cfg.conformal.as_ref().ok_or(section("conformal"))?, &mut diag),
        Subcommand::Largeq => largeq(cfg.largeq.as_ref().ok_or(section("largeq"))?, &mut diag),
        Subcommand::Sd => sd(cfg, cfg.sd.as_ref().ok_or(section("sd"))?, &mut diag),
        Subcommand::Quench => quench(cfg, cfg.quench.as_ref().ok_or(section("quench"))?, &mut diag),
        Subcommand::Oracle => oracle(cfg, cfg.oracle.as_ref().ok_or(section("oracle"))?, &mut diag),
        Subcommand::Cell => cell(cfg.cell.as_ref().ok_or(section("cell"))?, &mut diag),
    })?;
    diag.elapsed_seconds = start.elapsed().as_secs_f64();
    Ok(ResultRecord { config: cfg.clone(), payload, diagnostics: diag })
}

/// Computes and writes the record under [`RunConfig::out_dir`].
pub fn run(cfg: &RunConfig) -> Result<(ResultRecord, Written)> {
    let record = compute(cfg)?;
    let written = record.write(&cfg.out_dir())?;
    Ok((record, written))
}

macro_rules! model {
    ($s:expr) => {
        ModelParams { n_sites: $s.n, n_bath: $s.m, q: $s.q, p: $s.p, hopping: $s.w, j: $s.j, v: $s.v, beta: $s.beta }
    };
}

fn free(s: &FreeSection, _diag: &mut Diagnostics) -> Result<Table> {
    let chain = ChainParams::new(s.n, s.w, s.beta)?;
    let mut t = Table::new(&["t", "r", "otoc", "otoc_lattice"]);
    for &time in &s.t_list {
        t.push(vec![
            time.into(),
            s.r.into(),
            free_otoc(time, s.r as f64, &chain).into(),
            free_otoc_lattice(time, s.r, &chain).into(),
        ]);
    }
    Ok(t)
}

fn conformal(s: &ConformalSection, diag: &mut Diagnostics) -> Result<Table> {
    let params = model!(s);
    let bath = ConformalBath::new(&params, s.alpha_s)?;
    diag.detail("bath", bath)?;
    diag.detail("growth_rate", otoc_growth_rate(&params))?;
    diag.detail("scrambling_time", scrambling_time(&params, &bath)?)?;
    let mut t = Table::new(&["t", "r", "otoc", "cluster_correction"]);
    for &time in &s.t_list {
        t.push(vec![
            time.into(),
            s.r.into(),
            combined_otoc(time, s.r, &params, &bath)?.into(),
            otoc_correction(time, &params, &bath).into(),
        ]);
    }
    Ok(t)
}

fn largeq(s: &LargeqSection, diag: &mut Diagnostics) -> Result<Table> {
    let params = LargeQParams::new(s.jcal, s.vcal, s.beta, s.kappa, 2.0 * s.w)?;
    let sp = solve_alpha(&params)?;
    diag.residual = Some(sp.residual().abs());
    let ham = lyapunov_hamiltonian(&ModeGrid::for_alpha(sp.alpha), &params, &sp, DampingVariant::default())?;
    let e0 = ham.ground_energy();
    let lambda = 2.0 * (-e0).max(0.0).sqrt();
    let pert = lyapunov_perturbed(&params)?;
    let bound = 2.0 * PI / s.beta;
    if lambda > bound {
        diag.warnings.push(format!("lambda = {lambda} exceeds 2 pi / beta = {bound}"));
    }
    let mut t = Table::new(&[
        "alpha",
        "gamma",
        "ground_energy",
        "lambda",
        "lambda_perturbed",
        "dlambda_dVcal2",
        "overlap_c",
        "lambda_conformal",
        "chaos_bound",
    ]);
    t.push(vec![
        sp.alpha.into(),
        sp.gamma.into(),
        e0.into(),
        lambda.into(),
        pert.lambda.into(),
        pert.slope.into(),
        pert.c.into(),
        lyapunov_conformal(&params).into(),
        bound.into(),
    ]);
    Ok(t)
}

fn sd(cfg: &RunConfig, s: &SdSection, diag: &mut Diagnostics) -> Result<Table> {
    let params = model!(s);
    let sol = solve_sd(&params, ImagGrid::new(cfg.n_tau, s.beta)?, &cfg.solver())?;
    diag.residual = Some(sol.residual);
    diag.iterations = Some(sol.iterations);
    diag.detail("final_mixing", sol.mixing)?;
    let mut t = Table::new(&["tau", "g_chi", "sigma_chi"]);
    for ((&tau, &g), &sigma) in sol.tau.iter().zip(&sol.g_chi).zip(&sol.sigma_chi) {
        t.push(vec![tau.into(), g.into(), sigma.into()]);
    }
    Ok(t)
}

fn quench(cfg: &RunConfig, s: &QuenchSection, diag: &mut Diagnostics) -> Result<Table> {
    let opts = SweepOptions {
        solver: cfg.solver(),
        n_seg: cfg.n_seg,
        per_majorana: match s.per_majorana {
            Normalization::Total => PerMajorana::Total,
            Normalization::Chain => PerMajorana::Chain,
        },
        bath_follows_chain: s.m.is_none(),
        fit_window: s.fit_window.map_or((0.0, f64::INFINITY), |[a, b]| (a, b)),
    };
    let ws = if s.w_list.is_empty() { vec![s.w] } else { s.w_list.clone() };
    let mut t = Table::new(&["w", "N", "M", "T", "s2", "s2_per_majorana", "residual", "iterations"]);
    let mut summaries = Vec::new();
    for &w in &ws {
        let n = s.n_list[0];
        let base = ModelParams { n_sites: n, n_bath: s.m.unwrap_or(n), q: s.q, p: s.p, hopping: w, j: s.j, v: s.v, beta: s.beta };
        let curve = renyi_sweep(&base, &s.n_list, &s.t_list, &opts)?;
        for p in &curve.points {
            t.push(vec![
                w.into(),
                p.n.into(),
                p.m.into(),
                p.t.into(),
                p.s2.into(),
                p.s2_per_majorana.into(),
                p.residual.into(),
                p.iterations.into(),
            ]);
        }
        diag.warnings.extend(curve.warnings.iter().map(|msg| format!("w = {w}: {msg}")));
        summaries.push(serde_json::json!({
            "w": w,
            "slopes": curve.slopes,
            "extrapolated": curve.extrapolated,
            "extrapolated_slope": curve.extrapolated_slope,
        }));
    }
    let residuals = t.column("residual").unwrap_or_default();
    diag.residual = residuals.into_iter().reduce(f64::max);
    diag.iterations = t.column("iterations").and_then(|v| v.into_iter().map(|x| x as usize).max());
    diag.detail("fits", summaries)?;
    Ok(t)
}

fn oracle(cfg: &RunConfig, s: &OracleSection, diag: &mut Diagnostics) -> Result<Table> {
    let params = model!(s);
    let last = (s.tau_points - 1) as f64;
    let taus: Vec<f64> = (0..s.tau_points).map(|i| s.beta * i as f64 / last).collect();
    let (chi, psi) = averaged_two_point(&params, &taus, cfg.seed, s.realizations)?;
    diag.detail("realizations", chi.samples)?;
    let sd = if s.compare_sd {
        let sol = solve_sd(&params, ImagGrid::new(cfg.n_tau, s.beta)?, &cfg.solver())?;
        diag.residual = Some(sol.residual);
        diag.iterations = Some(sol.iterations);
        Some(sol)
    } else {
        None
    };
    let mut cols = vec!["tau", "g_chi", "g_chi_se", "g_psi", "g_psi_se"];
    if sd.is_some() {
        cols.push("g_chi_sd");
    }
    let mut t = Table::new(&cols);
    for (i, &tau) in taus.iter().enumerate() {
        let mut row = vec![tau.into(), chi.mean[i].into(), chi.std_err[i].into(), psi.mean[i].into(), psi.std_err[i].into()];
        if let Some(sol) = &sd {
            row.push(sol.value_at(tau).into());
        }
        t.push(row);
    }
    Ok(t)
}

fn cell(s: &CellSection, diag: &mut Diagnostics) -> Result<Table> {
    let params = AdsParams::new(s.l, s.r_plus, s.l_pl)?;
    if s.layers {
        let mut t = Table::new(&["layer", "r", "dx", "n_cells", "ds_cell", "t_loc"]);
        for row in cell_inventory(&params)? {
            t.push(vec![row.layer.into(), row.r.into(), row.dx.into(), row.n_cells.into(), row.ds_cell.into(), row.t_loc.into()]);
        }
        return Ok(t);
    }
    let sh = stretched_horizon(&params)?;
    let times = scrambling_times(&params)?;
    diag.residual = Some(sh.relative_difference);
    let mut t = Table::new(&[
        "l",
        "r_plus",
        "l_pl",
        "beta",
        "entropy",
        "h",
        "h_exact",
        "t_weak",
        "t_weak_scaling",
        "t_outer_strong",
        "t_strong",
    ]);
    t.push(vec![
        s.l.into(),
        s.r_plus.into(),
        s.l_pl.into(),
        params.beta().into(),
        params.entropy().into(),
        sh.closed_form.into(),
        sh.exact.into(),
        times.t_weak.into(),
        times.t_weak_scaling.into(),
        times.t_outer_strong.into(),
        times.t_strong.into(),
    ]);
    Ok(t)
}
