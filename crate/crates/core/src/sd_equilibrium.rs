//! Imaginary-time Schwinger–Dyson equations of the cluster with the chain
//! integrated out, solved by damped iteration on the Matsubara axis.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LcError, Result};
use crate::free_chain::{grid_energy, mode_weight};
use crate::params::{ModelParams, Momentum, SolverOptions};
use crate::Complex64;

/// Midpoint grid `τ_j = (j + 1/2) β / n_tau` on `(0, β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImagGrid {
    pub n_tau: usize,
    pub beta: f64,
}

impl ImagGrid {
    pub fn new(n_tau: usize, beta: f64) -> Result<Self> {
        if n_tau < 256 || !n_tau.is_power_of_two() {
            return Err(invalid("n_tau", format!("must be a power of two >= 256, got {n_tau}")));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(invalid("beta", format!("must be positive and finite, got {beta}")));
        }
        Ok(Self { n_tau, beta })
    }

    pub fn spacing(&self) -> f64 {
        self.beta / self.n_tau as f64
    }

    pub fn taus(&self) -> Vec<f64> {
        let d = self.spacing();
        (0..self.n_tau).map(|j| (j as f64 + 0.5) * d).collect()
    }

    /// Signed Matsubara index stored at FFT slot `m`.
    fn index(&self, m: usize) -> i64 {
        let n = self.n_tau as i64;
        let m = m as i64;
        if m < n / 2 {
            m
        } else {
            m - n
        }
    }

    /// Fermionic frequencies in FFT order.
    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.n_tau).map(|m| (2 * self.index(m) + 1) as f64 * PI / self.beta).collect()
    }
}

/// Antiperiodic transforms between the midpoint grid and the Matsubara axis.
struct Fourier {
    grid: ImagGrid,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Fourier {
    fn new(grid: ImagGrid) -> Self {
        let mut planner = FftPlanner::new();
        Self { grid, fwd: planner.plan_fft_forward(grid.n_tau), inv: planner.plan_fft_inverse(grid.n_tau) }
    }

    /// `f(iω_n) = ∫₀^β e^{iω_n τ} f(τ) dτ` by the midpoint rule.
    fn to_freq(&self, f: &[f64]) -> Vec<Complex64> {
        let n = self.grid.n_tau as f64;
        let mut buf: Vec<Complex64> = f
            .iter()
            .enumerate()
            .map(|(j, &x)| x * Complex64::from_polar(1.0, PI * (j as f64 + 0.5) / n))
            .collect();
        self.inv.process(&mut buf);
        let d = self.grid.spacing();
        for (m, b) in buf.iter_mut().enumerate() {
            *b *= d * Complex64::from_polar(1.0, PI * self.grid.index(m) as f64 / n);
        }
        buf
    }

    /// `f(τ_j) = (1/β) Σ_n e^{-iω_n τ_j} f(iω_n)`, real part.
    fn to_time(&self, x: &[Complex64]) -> Vec<f64> {
        let n = self.grid.n_tau as f64;
        let mut buf: Vec<Complex64> = x
            .iter()
            .enumerate()
            .map(|(m, &v)| v * Complex64::from_polar(1.0, -PI * self.grid.index(m) as f64 / n))
            .collect();
        self.fwd.process(&mut buf);
        let b = self.grid.beta;
        buf.iter()
            .enumerate()
            .map(|(j, v)| (v * Complex64::from_polar(1.0, -PI * (j as f64 + 0.5) / n)).re / b)
            .collect()
    }
}

/// `1/(-iω)`, the transform of `1/2` on `(0, β)`.
fn free_inverse(omega: f64) -> Complex64 {
    Complex64::new(0.0, 1.0 / omega)
}

/// Converged cluster two-point function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSolution {
    pub grid: ImagGrid,
    pub tau: Vec<f64>,
    pub g_chi: Vec<f64>,
    pub sigma_chi: Vec<f64>,
    /// `G_χ(iω_n)` in FFT order
    pub g_chi_freq: Vec<Complex64>,
    pub residual: f64,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    /// mixing weight in force when the loop stopped
    pub mixing: f64,
}

impl EquilibriumSolution {
    /// Band-limited interpolant of `G_χ` at any real `τ`. Positive multiples
    /// of `β` are reached from below, `τ = 0` from above.
    pub fn value_at(&self, tau: f64) -> f64 {
        let beta = self.grid.beta;
        let mut m = (tau / beta).floor();
        if tau > 0.0 && tau == m * beta {
            m -= 1.0;
        }
        let sign = if (m as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let t = tau - m * beta;
        let omegas = self.grid.frequencies();
        let corr: f64 = omegas
            .iter()
            .zip(&self.g_chi_freq)
            .map(|(&w, &g)| (Complex64::from_polar(1.0, -w * t) * (g - free_inverse(w))).re)
            .sum::<f64>()
            / beta;
        sign * (0.5 + corr)
    }
}

/// Chain channels `ε_k` of the periodic ring.
fn channel_energies(params: &ModelParams) -> Vec<f64> {
    Momentum::grid(params.n_sites).into_iter().map(|k| grid_energy(k, params.hopping)).collect()
}

/// `(V²/p) ∫ e^{iωτ} G_χ(τ)^p dτ` on the Matsubara grid.
fn chain_self_energy_freq(g: &[f64], params: &ModelParams, fourier: &Fourier) -> Vec<Complex64> {
    let gp: Vec<f64> = g.iter().map(|x| x.powi(params.p as i32)).collect();
    let coef = params.v * params.v / params.p as f64;
    fourier.to_freq(&gp).into_iter().map(|x| coef * x).collect()
}

/// `Σ_k G_ψ,k(τ)` for the chain dressed by `G_χ`.
fn chain_trace(g: &[f64], params: &ModelParams, fourier: &Fourier, eps: &[f64], free_trace: &[f64]) -> Vec<f64> {
    let sigma = chain_self_energy_freq(g, params, fourier);
    let omegas = fourier.grid.frequencies();
    let dressed: Vec<Complex64> = omegas
        .par_iter()
        .zip(sigma.par_iter())
        .map(|(&w, &s)| {
            let iw = Complex64::new(0.0, -w);
            eps.iter().map(|&e| 1.0 / (iw + e - s) - 1.0 / (iw + e)).sum()
        })
        .collect();
    fourier.to_time(&dressed).into_iter().zip(free_trace).map(|(a, b)| a + b).collect()
}

/// Solve `G_χ⁻¹ = ∂ - Σ_χ`,
/// `Σ_χ = J² G_χ^{q-1} + (V²/M) Tr[G_ψ] G_χ^{p-1}`.
pub fn solve_sd(params: &ModelParams, grid: ImagGrid, opts: &SolverOptions) -> Result<EquilibriumSolution> {
    params.validate()?;
    opts.validate()?;
    if (params.beta - grid.beta).abs() > 1e-12 * grid.beta {
        return Err(invalid("beta", "grid and model temperatures differ"));
    }
    let fourier = Fourier::new(grid);
    let tau = grid.taus();
    let omegas = grid.frequencies();
    let backreaction = params.v != 0.0;
    let eps = if backreaction { channel_energies(params) } else { Vec::new() };
    let free_trace: Vec<f64> = if backreaction {
        tau.iter().map(|&t| eps.iter().map(|&e| mode_weight(e, Complex64::new(t, 0.0), grid.beta).re).sum()).collect()
    } else {
        Vec::new()
    };
    let j2 = params.j * params.j;
    let v2_m = params.v * params.v / params.n_bath as f64;
    let self_energy = |g: &[f64]| -> Vec<f64> {
        let mut s: Vec<f64> = g.iter().map(|x| j2 * x.powi(params.q as i32 - 1)).collect();
        if backreaction {
            let tr = chain_trace(g, params, &fourier, &eps, &free_trace);
            for ((si, &gi), t) in s.iter_mut().zip(g).zip(tr) {
                *si += v2_m * t * gi.powi(params.p as i32 - 1);
            }
        }
        s
    };
    let dyson = |sigma: &[f64]| -> (Vec<f64>, Vec<Complex64>) {
        let sw = fourier.to_freq(sigma);
        // the ring spectrum comes in ±ε pairs, so G_χ(τ) = G_χ(β-τ) and G_χ(iω) is
        // purely imaginary; dropping the roundoff real part keeps that exact
        let gw: Vec<Complex64> = omegas
            .iter()
            .zip(&sw)
            .map(|(&w, &s)| Complex64::new(0.0, (1.0 / (Complex64::new(0.0, -w) - s)).im))
            .collect();
        let diff: Vec<Complex64> = gw.iter().zip(&omegas).map(|(&g, &w)| g - free_inverse(w)).collect();
        let g: Vec<f64> = fourier.to_time(&diff).into_iter().map(|x| 0.5 + x).collect();
        (g, gw)
    };

    let mut g = vec![0.5; grid.n_tau];
    let mut mixing = opts.mixing;
    let mut history = Vec::new();
    let mut halvings = 0;
    for it in 1..=opts.max_iter {
        let sigma = self_energy(&g);
        let (g_new, gw) = dyson(&sigma);
        debug_assert!(is_particle_hole_symmetric(&g_new, 1e-8), "G_chi lost τ -> β-τ symmetry at iteration {it}: {}", g_new.iter().zip(g_new.iter().rev()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        let residual = g_new.iter().zip(&g).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let previous = history.last().copied();
        history.push(residual);
        if residual < opts.tol {
            let sigma_chi = self_energy(&g_new);
            return Ok(EquilibriumSolution {
                grid,
                tau,
                g_chi: g_new,
                sigma_chi,
                g_chi_freq: gw,
                residual,
                iterations: it,
                residual_history: history,
                mixing,
            });
        }
        if previous.is_some_and(|p| residual > p) && mixing > 1.0 / 1024.0 {
            mixing *= 0.5;
            halvings += 1;
        }
        for (a, b) in g.iter_mut().zip(&g_new) {
            *a = (1.0 - mixing) * *a + mixing * b;
        }
    }
    Err(LcError::NoConvergence {
        iterations: opts.max_iter,
        residual: history.last().copied().unwrap_or(f64::NAN),
        oscillating: halvings > 0,
    })
}

fn is_particle_hole_symmetric(g: &[f64], tol: f64) -> bool {
    g.iter().zip(g.iter().rev()).all(|(a, b)| (a - b).abs() <= tol)
}

/// Values on the fermionic Matsubara axis, FFT order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatsubaraSeries {
    pub omega: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl MatsubaraSeries {
    /// Non-negative frequencies in ascending order.
    pub fn positive(&self) -> Vec<(f64, Complex64)> {
        let mut out: Vec<(f64, Complex64)> =
            self.omega.iter().zip(&self.values).filter(|(w, _)| **w > 0.0).map(|(&w, &v)| (w, v)).collect();
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }
}

/// `(V²/p) FT[G_χ^p](iω_n)` from a converged cluster solution.
pub fn chain_self_energy(solution: &EquilibriumSolution, params: &ModelParams) -> MatsubaraSeries {
    let fourier = Fourier::new(solution.grid);
    MatsubaraSeries {
        omega: solution.grid.frequencies(),
        values: chain_self_energy_freq(&solution.g_chi, params, &fourier),
    }
}

/// `1/(-iω_n - (V²/p) FT[G_χ^p](iω_n) + ε_k)`.
pub fn chain_propagator_from_bath(solution: &EquilibriumSolution, params: &ModelParams, k: Momentum) -> MatsubaraSeries {
    let sigma = chain_self_energy(solution, params);
    let e = grid_energy(k, params.hopping);
    let values = sigma.omega.iter().zip(&sigma.values).map(|(&w, &s)| 1.0 / (Complex64::new(e, -w) - s)).collect();
    MatsubaraSeries { omega: sigma.omega, values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal_bath::gchi_conformal;
    use crate::numerics::power_law_fit;
    use crate::params::ConformalBath;
    use approx::assert_relative_eq;

    fn opts() -> SolverOptions {
        SolverOptions { tol: 1e-10, max_iter: 5000, mixing: 0.5 }
    }

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(ImagGrid::new(100, 1.0).is_err());
        assert!(ImagGrid::new(128, 1.0).is_err());
        assert!(ImagGrid::new(256, f64::INFINITY).is_err());
    }

    #[test]
    fn transforms_are_inverse() {
        let grid = ImagGrid::new(256, 3.0).unwrap();
        let f = Fourier::new(grid);
        // exp(-τ) - exp(τ - β) ∝ free fermion mode, antiperiodic continuation is smooth inside
        let x: Vec<f64> = grid.taus().iter().map(|t| (-t).exp() + 0.3 * (2.0 * PI * t / 3.0).cos()).collect();
        let back = f.to_time(&f.to_freq(&x));
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn free_mode_transform() {
        // e^{-ετ}/(1+e^{-βε}) ↔ 1/(-iω+ε); midpoint rule error O(Δ²)
        let grid = ImagGrid::new(4096, 2.0).unwrap();
        let f = Fourier::new(grid);
        let e = 1.3;
        let x: Vec<f64> = grid.taus().iter().map(|&t| (-e * t).exp() / (1.0 + (-grid.beta * e).exp())).collect();
        let xw = f.to_freq(&x);
        for (m, w) in grid.frequencies().iter().enumerate().take(5) {
            let exact = 1.0 / Complex64::new(e, -w);
            assert!((xw[m] - exact).norm() < 1e-6, "{} vs {}", xw[m], exact);
        }
    }

    #[test]
    fn free_majorana() {
        let p = ModelParams { j: 0.0, v: 0.0, beta: 3.0, ..Default::default() };
        let sol = solve_sd(&p, ImagGrid::new(256, 3.0).unwrap(), &opts()).unwrap();
        assert!(sol.g_chi.iter().all(|g| (g - 0.5).abs() < 1e-12));
    }

    #[test]
    fn syk_solution_invariants() {
        let p = ModelParams { j: 1.0, v: 0.0, beta: 10.0, ..Default::default() };
        let sol = solve_sd(&p, ImagGrid::new(1024, 10.0).unwrap(), &opts()).unwrap();
        assert!(sol.residual < 1e-10);
        assert!(is_particle_hole_symmetric(&sol.g_chi, 1e-9));
        assert!((sol.value_at(1e-9) - 0.5).abs() < 1e-5, "{}", sol.value_at(1e-9));
        assert!((sol.value_at(0.0) - 0.5).abs() < 1e-5);
        assert!((sol.value_at(10.0) - 0.5).abs() < 1e-5, "{}", sol.value_at(10.0));
        assert_relative_eq!(sol.value_at(-2.0), -sol.value_at(8.0), max_relative = 1e-9);
        assert_relative_eq!(sol.value_at(12.0), -sol.value_at(2.0), max_relative = 1e-9);
        // grid interpolant reproduces the stored profile
        assert!((sol.value_at(sol.tau[37]) - sol.g_chi[37]).abs() < 1e-9);
        let burn = sol.residual_history.len().min(50);
        assert!(sol.residual_history[burn..].windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn conformal_window() {
        let beta = 400.0;
        let p = ModelParams { j: 1.0, v: 0.0, beta, ..Default::default() };
        let sol = solve_sd(&p, ImagGrid::new(1 << 15, beta).unwrap(), &SolverOptions { tol: 1e-9, ..opts() }).unwrap();
        let bath = ConformalBath::with_default_alpha(&p).unwrap();
        for t in [10.0, 15.0, 20.0, 30.0, 40.0] {
            let g = sol.value_at(t);
            let c = gchi_conformal(t, &bath, 4).unwrap();
            assert!(((g - c) / c).abs() < 0.05, "tau={t}: {g} vs {c}");
        }
    }

    #[test]
    fn large_bath_suppresses_backreaction() {
        let base = ModelParams { n_sites: 8, n_bath: 8, j: 1.0, v: 0.5, p: 3, hopping: 0.5, beta: 2.0, ..Default::default() };
        let grid = ImagGrid::new(512, 2.0).unwrap();
        let reference = solve_sd(&ModelParams { v: 0.0, ..base }, grid, &opts()).unwrap();
        let coupled = solve_sd(&base, grid, &opts()).unwrap();
        let heavy = solve_sd(&ModelParams { n_bath: 8_000_000, ..base }, grid, &opts()).unwrap();
        let dev = |s: &EquilibriumSolution| {
            s.g_chi.iter().zip(&reference.g_chi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        };
        assert!(dev(&coupled) > 1e-4);
        assert!(dev(&heavy) < 1e-6);
    }

    #[test]
    fn chain_propagator_free_limit() {
        let p = ModelParams { v: 0.0, beta: 5.0, ..Default::default() };
        let sol = solve_sd(&p, ImagGrid::new(256, 5.0).unwrap(), &opts()).unwrap();
        let k = Momentum(0.4);
        let series = chain_propagator_from_bath(&sol, &p, k);
        for (w, g) in series.omega.iter().zip(&series.values).take(20) {
            let free = crate::free_chain::propagator_momentum(*w, k, p.hopping);
            assert!((g - free).norm() < 1e-14);
        }
    }

    #[test]
    fn chain_self_energy_scaling() {
        let beta = 200.0;
        let p = ModelParams { j: 1.0, v: 0.1, p: 1, beta, n_bath: 1 << 40, ..Default::default() };
        let grid = ImagGrid::new(1 << 14, beta).unwrap();
        let sol = solve_sd(&p, grid, &SolverOptions { tol: 1e-9, ..opts() }).unwrap();
        let s1 = chain_self_energy(&sol, &p).positive();
        let s2 = chain_self_energy(&sol, &ModelParams { v: 0.2, ..p }).positive();
        assert_relative_eq!(s2[3].1.im / s1[3].1.im, 4.0, max_relative = 1e-12);
        // lowest decade of Matsubara frequencies
        let low: Vec<(f64, Complex64)> = s1.iter().copied().take_while(|(w, _)| *w <= 10.0 * PI / beta).collect();
        let (x, y): (Vec<f64>, Vec<f64>) = low.iter().map(|(w, s)| (*w, s.im)).unzip();
        let (exponent, _) = power_law_fit(&x, &y);
        let target = 2.0 * p.kappa() - 1.0;
        assert!((exponent - target).abs() < 0.1 * target.abs(), "exponent {exponent}");
    }

    #[test]
    fn reports_non_convergence() {
        let p = ModelParams { j: 1.0, beta: 10.0, ..Default::default() };
        let err = solve_sd(&p, ImagGrid::new(256, 10.0).unwrap(), &SolverOptions { tol: 1e-14, max_iter: 3, mixing: 0.5 });
        assert!(matches!(err, Err(LcError::NoConvergence { iterations: 3, .. })));
    }
}
