//! Large-q saddle of the cluster with the chain integrated out, and the
//! chaos mode built on it.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, LcError, Result};
use crate::numerics::{brent_root, gamma, integrate};
use crate::params::{ConformalBath, LargeQParams, ModelParams};

/// `(1/3) log(16/e)`, the first-order shift from the damped sech² well.
pub const WELL_SHIFT: f64 = (4.0 * std::f64::consts::LN_2 - 1.0) / 3.0;

fn log_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

fn sech(x: f64) -> f64 {
    let a = x.abs();
    let e = (-a).exp();
    2.0 * e / (1.0 + e * e)
}

/// Real-time saddle without the chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddlePoint {
    pub alpha: f64,
    /// `π/2 - αβ/2`
    pub gamma: f64,
    pub jcal: f64,
}

/// Root of `α = 𝒥 cos(αβ/2)` in `(0, min(𝒥, π/β)]`.
pub fn solve_alpha(params: &LargeQParams) -> Result<SaddlePoint> {
    let (j, beta) = (params.jcal, params.beta);
    let f = |a: f64| a - j * (a * beta / 2.0).cos();
    let hi = j.min(PI / beta);
    let mut alpha = brent_root(f, 0.0, hi, 1e-12 * hi)?;
    // polish with Newton; f' = 1 + (𝒥β/2) sin(αβ/2) ≥ 1
    for _ in 0..3 {
        let d = 1.0 + j * beta / 2.0 * (alpha * beta / 2.0).sin();
        alpha -= f(alpha) / d;
    }
    Ok(SaddlePoint { alpha, gamma: PI / 2.0 - alpha * beta / 2.0, jcal: j })
}

impl SaddlePoint {
    /// Residual of the defining equation.
    pub fn residual(&self) -> f64 {
        self.alpha - self.jcal * self.gamma.sin()
    }

    /// `ψ(t) = √(α/2) sech(αt)`, the bound state of the unperturbed well.
    pub fn bound_state(&self, t: f64) -> f64 {
        (self.alpha / 2.0).sqrt() * sech(self.alpha * t)
    }
}

/// `g(t) = log(α² / (𝒥² cosh² αt))`.
pub fn saddle_g(t: f64, sp: &SaddlePoint) -> f64 {
    2.0 * ((sp.alpha / sp.jcal).ln() - log_cosh(sp.alpha * t))
}

/// Imaginary-time saddle `log(α² / (𝒥² sin²(α|τ| + γ)))`, `0 < |τ| < β`.
pub fn saddle_g_euclidean(tau: f64, sp: &SaddlePoint) -> f64 {
    2.0 * (sp.alpha / (sp.jcal * (sp.alpha * tau.abs() + sp.gamma).sin())).ln()
}

/// `(α/𝒥)^{2κ} 𝒱² / (κ^n v)`; `n = 2` in the saddle, `n = 1` is the
/// variant appearing in the printed chaos-mode well.
fn damping_rate(params: &LargeQParams, sp: &SaddlePoint, kappa_power: i32) -> f64 {
    (sp.alpha / sp.jcal).powf(2.0 * params.kappa) * params.damping_scale() * params.kappa.powi(2 - kappa_power)
}

/// Saddle with the chain kernel replaced by `β δ(t)`.
pub fn saddle_g_brownian(t: f64, params: &LargeQParams, sp: &SaddlePoint) -> f64 {
    saddle_g(t, sp) - damping_rate(params, sp, 2) * t.abs()
}

/// Which damping exponent the second term of the chaos-mode well uses.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum DampingVariant {
    /// `κ²` in both exponentials, matching the Brownian saddle
    #[default]
    Consistent,
    /// `κ` in the second exponential
    AsPrinted,
}

/// Uniform grid for the chaos-mode problem, hard walls at `±half_extent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeGrid {
    pub half_extent: f64,
    pub spacing: f64,
}

impl ModeGrid {
    pub fn for_alpha(alpha: f64) -> Self {
        Self { half_extent: 20.0 / alpha, spacing: 0.002 / alpha }
    }

    pub fn check(&self, alpha: f64) -> Result<()> {
        if self.half_extent * alpha < 20.0 - 1e-9 {
            return Err(LcError::Grid(format!("half extent {} below 20/alpha = {}", self.half_extent, 20.0 / alpha)));
        }
        if self.spacing * alpha > 0.01 + 1e-12 {
            return Err(LcError::Grid(format!("spacing {} above 0.01/alpha = {}", self.spacing, 0.01 / alpha)));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let n = (2.0 * self.half_extent / self.spacing).round() as usize;
        let h = 2.0 * self.half_extent / n as f64;
        (1..n).map(|i| -self.half_extent + i as f64 * h).collect()
    }
}

/// `-∂² + V(t)` on a uniform grid, stored as a symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeHamiltonian {
    pub t: Vec<f64>,
    pub diag: Vec<f64>,
    pub off: f64,
}

/// Chaos-mode well with the Brownian saddle.
pub fn mode_potential(t: f64, params: &LargeQParams, sp: &SaddlePoint, variant: DampingVariant) -> f64 {
    let a = sp.alpha;
    let well = -2.0 * a * a * sech(a * t).powi(2) * (-damping_rate(params, sp, 2) * t.abs()).exp();
    if params.vcal == 0.0 {
        return well;
    }
    let second_rate = match variant {
        DampingVariant::Consistent => damping_rate(params, sp, 2),
        DampingVariant::AsPrinted => damping_rate(params, sp, 1),
    };
    let beta = params.beta;
    let kernel = sech(PI * t / beta) / beta;
    let conf = ((a / sp.jcal).ln() - log_cosh(a * t)) * 2.0 * params.kappa;
    well - 2.0 * params.damping_scale() * kernel * (conf - second_rate * t.abs()).exp()
}

pub fn lyapunov_hamiltonian(
    grid: &ModeGrid,
    params: &LargeQParams,
    sp: &SaddlePoint,
    variant: DampingVariant,
) -> Result<ModeHamiltonian> {
    grid.check(sp.alpha)?;
    let t = grid.points();
    let h = t[1] - t[0];
    let inv = 1.0 / (h * h);
    let diag = t.iter().map(|&x| 2.0 * inv + mode_potential(x, params, sp, variant)).collect();
    Ok(ModeHamiltonian { t, diag, off: -inv })
}

impl ModeHamiltonian {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Number of eigenvalues below `x` (Sturm sequence).
    pub fn count_below(&self, x: f64) -> usize {
        let e2 = self.off * self.off;
        let mut q = 1.0;
        let mut count = 0;
        for (i, &d) in self.diag.iter().enumerate() {
            q = d - x - if i == 0 { 0.0 } else { e2 / q };
            if q == 0.0 {
                q = f64::EPSILON * (d.abs() + self.off.abs());
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Lowest eigenvalue by bisection.
    pub fn ground_energy(&self) -> f64 {
        let lo0 = self.diag.iter().cloned().fold(f64::INFINITY, f64::min) - 2.0 * self.off.abs();
        let hi0 = self.diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 2.0 * self.off.abs();
        let (mut lo, mut hi) = (lo0, hi0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) >= 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Normalized ground state by inverse iteration (positive at the centre).
    pub fn ground_state(&self) -> (f64, Vec<f64>) {
        let e0 = self.ground_energy();
        let n = self.len();
        let h = self.t[1] - self.t[0];
        let shift = e0 - 1e-10 * (1.0 + e0.abs());
        let mut v = vec![1.0; n];
        for _ in 0..4 {
            v = self.solve_shifted(shift, &v);
            let norm = (v.iter().map(|x| x * x).sum::<f64>() * h).sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
        }
        if v[n / 2] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        (e0, v)
    }

    /// Thomas solve of `(H - s) x = b`.
    fn solve_shifted(&self, s: f64, b: &[f64]) -> Vec<f64> {
        let n = self.len();
        let e = self.off;
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut m = self.diag[0] - s;
        c[0] = e / m;
        d[0] = b[0] / m;
        for i in 1..n {
            m = self.diag[i] - s - e * c[i - 1];
            c[i] = e / m;
            d[i] = (b[i] - e * d[i - 1]) / m;
        }
        let mut x = vec![0.0; n];
        x[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = d[i] - c[i] * x[i + 1];
        }
        x
    }

    /// `λ = 2 √(-E₀)`, zero when no bound state survives.
    pub fn lyapunov(&self) -> f64 {
        2.0 * (-self.ground_energy()).max(0.0).sqrt()
    }
}

/// `C = -∫ dt/β sech(πt/β) sech^{2κ+2}(αt)`.
pub fn overlap_c(params: &LargeQParams, sp: &SaddlePoint) -> f64 {
    let beta = params.beta;
    let pw = 2.0 * params.kappa + 2.0;
    let decay = pw * sp.alpha + PI / beta;
    let f = |t: f64| sech(PI * t / beta) * sech(sp.alpha * t).powf(pw) / beta;
    -2.0 * integrate(f, 0.0, 45.0 / decay, 1e-13)
}

/// `C` in the conformal limit `α → π/β`.
pub fn overlap_c_conformal(kappa: f64) -> f64 {
    -gamma(1.5 + kappa) / (PI.sqrt() * gamma(2.0 + kappa))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbedLyapunov {
    pub alpha: f64,
    pub c: f64,
    /// `dλ/d𝒱²`
    pub slope: f64,
    pub lambda: f64,
}

/// First-order correction to `λ = 2α`.
pub fn lyapunov_perturbed(params: &LargeQParams) -> Result<PerturbedLyapunov> {
    let sp = solve_alpha(params)?;
    let c = overlap_c(params, &sp);
    let k = params.kappa;
    let slope = -(sp.alpha / sp.jcal).powf(2.0 * k) / (k * k * params.velocity) * (WELL_SHIFT + c);
    let lambda = 2.0 * sp.alpha + slope * params.vcal * params.vcal;
    Ok(PerturbedLyapunov { alpha: sp.alpha, c, slope, lambda })
}

/// Closed form of [`lyapunov_perturbed`] at `α = π/β`.
pub fn lyapunov_conformal(params: &LargeQParams) -> f64 {
    let (b, k) = (params.beta, params.kappa);
    let corr = params.damping_scale() * (PI / (b * params.jcal)).powf(2.0 * k) * (WELL_SHIFT + overlap_c_conformal(k));
    2.0 * PI / b * (1.0 - corr)
}

/// `⟨δg(t₁,t₂) δg(t₃,t₄)⟩` of the growing mode.
pub fn chaos_mode_propagator(t1: f64, t2: f64, t3: f64, t4: f64, sp: &SaddlePoint, q: u32) -> f64 {
    let a = sp.alpha;
    let centre = 0.5 * (t1 + t2) - 0.5 * (t3 + t4);
    let qf = q as f64;
    -8.0 * qf * qf * (2.0 * a * centre).cosh() * sech(a * (t1 - t2)) * sech(a * (t3 - t4))
}

/// Connected cluster OTOC `-(1/2) cosh(2α Δt̄) / (cosh αt₁₂ cosh αt₃₄)`.
/// Note `⟨δg δg⟩ / 4q²` is four times this.
pub fn chaos_mode_otoc(t1: f64, t2: f64, t3: f64, t4: f64, sp: &SaddlePoint) -> f64 {
    chaos_mode_propagator(t1, t2, t3, t4, sp, 1) / 16.0
}

/// Prefactor `(V²/(p² v)) b^p / (2π J)` of the Liouville perturbation, `β = 2π`.
pub fn liouville_coupling(params: &ModelParams, bath: &ConformalBath) -> f64 {
    let p = params.p as f64;
    params.v * params.v / (p * p * params.velocity()) * bath.b.powi(params.p as i32) / (2.0 * PI * params.j)
}

/// `K_{ik}(x) = ∫₀^∞ e^{-x cosh t} cos(kt) dt`.
pub fn bessel_k_imag(k: f64, x: f64) -> f64 {
    let top = (60.0 / x).max(1.0 + 1e-12).acosh().max(1.0);
    integrate(|t| (-x * t.cosh()).exp() * (k * t).cos(), 0.0, top, 1e-14)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleCorrection {
    /// `∫ dφ |ψ_k|² e^{2κφ}` by quadrature
    pub matrix_element: f64,
    /// the printed small-k form `Γ(1-κ)⁴ k² / (2^{2κ} Γ(2-2κ))`
    pub printed_small_k: f64,
    /// `coupling × matrix_element`
    pub energy: f64,
}

/// First-order shift of the Liouville level `k` by `coupling · e^{2κφ}`.
pub fn liouville_energy_correction(k: f64, p_over_q: f64, coupling: f64) -> Result<LiouvilleCorrection> {
    if !(p_over_q > 0.0 && p_over_q < 1.0) {
        return Err(LcError::Domain(format!("p/q must lie in (0, 1) for the Liouville correction, got {p_over_q}")));
    }
    if !(k > 0.0 && k.is_finite()) {
        return Err(invalid("k", format!("must be positive, got {k}")));
    }
    // |N_k|² = 2 / |Γ(ik)|² = 2 k sinh(πk) / π
    let norm = 2.0 * k * (PI * k).sinh() / PI;
    let f = |phi: f64| {
        let kb = bessel_k_imag(k, phi.exp());
        kb * kb * (2.0 * p_over_q * phi).exp()
    };
    let pieces = [-40.0, -20.0, -10.0, -5.0, -2.0, 0.0, 2.0, 5.0];
    let raw: f64 = pieces.windows(2).map(|w| integrate(f, w[0], w[1], 1e-12)).sum();
    let matrix_element = norm * raw;
    let printed_small_k = gamma(1.0 - p_over_q).powi(4) / (2f64.powf(2.0 * p_over_q) * gamma(2.0 * (1.0 - p_over_q))) * k * k;
    Ok(LiouvilleCorrection { matrix_element, printed_small_k, energy: coupling * matrix_element })
}
