//! Chain coupled to a cluster held at its conformal saddle.
//!
//! Imaginary times in the Schwarzian formulas are measured in units where
//! `β = 2π`; the `*_at_beta` variants restore physical time.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, LcError, Result};
use crate::free_chain::{dispersion, free_otoc_form, OtocForm};
use crate::numerics::{gamma, sgn};
use crate::params::{ConformalBath, ModelParams, Momentum, DEFAULT_ALPHA_S};
use crate::Complex64;

/// Positive root of `b^q = (1/2 - 1/q) tan(π/q) / (π J²)`.
pub fn conformal_b(q: u32, j: f64) -> Result<f64> {
    if q < 4 || !q.is_multiple_of(2) {
        return Err(invalid("q", format!("conformal limit needs even q >= 4, got {q}")));
    }
    if !(j > 0.0 && j.is_finite()) {
        return Err(invalid("J", format!("must be positive, got {j}")));
    }
    let qf = q as f64;
    let bq = (0.5 - 1.0 / qf) * (PI / qf).tan() / (PI * j * j);
    Ok(bq.powf(1.0 / qf))
}

/// Returns `Err(GammaPole)` when `Γ(1 - 2p/q)` is singular.
fn check_gamma_pole(p: u32, q: u32) -> Result<()> {
    if (2 * p).is_multiple_of(q) {
        return Err(LcError::GammaPole(1.0 - 2.0 * p as f64 / q as f64));
    }
    Ok(())
}

impl ConformalBath {
    pub fn new(params: &ModelParams, alpha_s: f64) -> Result<Self> {
        params.validate()?;
        if !(alpha_s > 0.0 && alpha_s.is_finite()) {
            return Err(invalid("alpha_S", format!("must be positive, got {alpha_s}")));
        }
        check_gamma_pole(params.p, params.q)?;
        let b = conformal_b(params.q, params.j)?;
        let kappa = params.kappa();
        let tilde_b = b.powi(params.p as i32) * 2.0 * (kappa * PI).cos() * gamma(1.0 - 2.0 * kappa);
        Ok(Self { b, tilde_b, alpha_s })
    }

    pub fn with_default_alpha(params: &ModelParams) -> Result<Self> {
        Self::new(params, DEFAULT_ALPHA_S)
    }
}

/// `G_χ(τ) = sgn(τ) b / |τ|^{2/q}`.
pub fn gchi_conformal(tau: f64, bath: &ConformalBath, q: u32) -> Result<f64> {
    if tau == 0.0 {
        return Err(LcError::Coincident("conformal G_chi at tau = 0"));
    }
    Ok(sgn(tau) * bath.b / tau.abs().powf(2.0 / q as f64))
}

/// Bath term `(V²/p) b̃ i sgn(ω) |ω|^{2p/q-1}` of the Matsubara self-energy.
fn bath_self_energy(omega: f64, params: &ModelParams, bath: &ConformalBath) -> Complex64 {
    let a = 2.0 * params.kappa() - 1.0;
    let mag = params.v * params.v / params.p as f64 * bath.tilde_b * omega.abs().powf(a);
    Complex64::new(0.0, sgn(omega) * mag)
}

/// `G_ψ⁻¹(ω, k) = -iω - Σ_bath(ω) + ε_k`.
pub fn dressed_inverse_propagator(
    omega: f64,
    k: Momentum,
    params: &ModelParams,
    bath: &ConformalBath,
) -> Complex64 {
    let free = Complex64::new(dispersion(k, params.hopping), -omega);
    if params.v == 0.0 {
        return free;
    }
    free - bath_self_energy(omega, params, bath)
}

/// Bath self-energy continued to `z` in the upper half plane: `ω → -i z`.
pub fn retarded_self_energy(z: Complex64, params: &ModelParams, bath: &ConformalBath) -> Complex64 {
    let a = 2.0 * params.kappa() - 1.0;
    let omega = Complex64::new(0.0, -1.0) * z;
    Complex64::new(0.0, 1.0) * omega.powf(a) * (params.v * params.v / params.p as f64 * bath.tilde_b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QpLifetime {
    /// `-Im` of the first-order pole shift at energy ε
    pub rate: f64,
    /// the closed form carrying `b^q` in place of `b^p`
    pub printed_rate: f64,
    /// `printed_rate / rate`; equals `b^{q-p}`
    pub ratio: f64,
}

/// Decay rate of a quasiparticle of energy `epsilon`.
pub fn qp_lifetime(epsilon: f64, params: &ModelParams, bath: &ConformalBath) -> Result<QpLifetime> {
    if epsilon == 0.0 {
        return Err(invalid("epsilon", "on-shell energy must be non-zero"));
    }
    check_gamma_pole(params.p, params.q)?;
    // pole of G_R⁻¹(E) = -E + ε - Σ_R(E), to first order in V²
    let z = Complex64::new(epsilon, 1e-300);
    let shift = retarded_self_energy(z, params, bath);
    let rate = shift.im;
    let kappa = params.kappa();
    let printed_rate = 2.0 * params.v * params.v / params.p as f64
        * bath.b.powi(params.q as i32)
        * (kappa * PI).cos()
        * (kappa * PI).sin()
        * gamma(1.0 - 2.0 * kappa)
        * epsilon.abs().powf(2.0 * kappa - 1.0);
    Ok(QpLifetime { rate, printed_rate, ratio: printed_rate / rate })
}

/// `D(τ) = ⟨ε(τ)ε(0)⟩` of the quadratic Schwarzian, `β = 2π`.
///
/// Carries the amplitude `𝒥/(Mα_S)`; the Gaussian integral over the
/// quadratic action gives this divided by `2π`.
pub fn schwarzian_propagator(tau: f64, params: &ModelParams, bath: &ConformalBath) -> f64 {
    let x = tau.abs();
    let shape = -(x - PI).powi(2) / 2.0 + (x - PI) * x.sin() + 2.5 * tau.cos() + 1.0 + PI * PI / 6.0;
    params.j_scaled() / (params.n_bath as f64 * bath.alpha_s) * shape
}

/// Schwarzian contribution `F⁽¹⁾(t)` to the OTOC.
pub fn otoc_correction(t: f64, params: &ModelParams, bath: &ConformalBath) -> f64 {
    let beta = params.beta;
    let jcal = params.j_scaled();
    let kappa2 = 2.0 * params.kappa();
    let p = params.p as f64;
    let lead = params.v.powi(4) / (4.0 * p * p) * (PI / (beta * jcal)).powf(kappa2);
    let growth = kappa2 * kappa2 * beta * jcal / (params.n_bath as f64 * bath.alpha_s);
    lead * (1.0 - growth * (2.0 * PI * t / beta).cosh())
}

/// Exponent of the Schwarzian-mediated growth: `2π/β`.
pub fn otoc_growth_rate(params: &ModelParams) -> f64 {
    2.0 * PI / params.beta
}

/// Coefficient `c` of the `-c cosh(2πt/β)` term in [`combined_otoc`].
pub fn chaotic_channel_amplitude(params: &ModelParams, bath: &ConformalBath) -> f64 {
    let kappa2 = 2.0 * params.kappa();
    let bj = params.beta * params.j_scaled();
    let q = params.q as f64;
    params.v.powi(4) / params.n_bath as f64 * PI.powf(kappa2) * bj.powf(1.0 - kappa2)
        / (bath.alpha_s * q * q)
}

/// Quasiparticle OTOC plus the cluster-mediated exponential term.
pub fn combined_otoc(t: f64, dr: f64, params: &ModelParams, bath: &ConformalBath) -> Result<f64> {
    let chain = params.chain()?;
    if chain.is_zero_temperature() {
        return Err(invalid("beta", "OTOC needs finite temperature"));
    }
    let qp = free_otoc_form(t, dr.abs(), &chain, OtocForm::MainText);
    Ok(qp - chaotic_channel_amplitude(params, bath) * (2.0 * PI * t / params.beta).cosh())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScramblingTime {
    /// `N/(2v)`
    pub ballistic: f64,
    /// logarithmic cluster channel; infinite at V = 0
    pub chaotic: f64,
    pub t_star: f64,
}

/// Time for information to cross half the chain.
pub fn scrambling_time(params: &ModelParams, bath: &ConformalBath) -> Result<ScramblingTime> {
    params.validate()?;
    let beta = params.beta;
    let v = params.velocity();
    let ballistic = params.n_sites as f64 / (2.0 * v);
    let chaotic = if params.v == 0.0 {
        f64::INFINITY
    } else {
        let arg = chaotic_channel_amplitude(params, bath).recip() / (4.0 * (beta * v).powi(2));
        if !(arg > 0.0 && arg.is_finite()) {
            return Err(LcError::NonPositiveLog(arg));
        }
        beta / (2.0 * PI) * arg.ln()
    };
    Ok(ScramblingTime { ballistic, chaotic, t_star: ballistic.min(chaotic) })
}

/// `1/M` self-energy from quadratic reparametrization fluctuations,
/// `0 < θ < 2π` in `β = 2π` units.
pub fn reparam_self_energy(theta: f64, params: &ModelParams, bath: &ConformalBath) -> Result<f64> {
    if !(theta > 0.0 && theta < 2.0 * PI) {
        return Err(invalid("tau12", format!("must lie in (0, 2π), got {theta}")));
    }
    let k2 = 2.0 * params.kappa();
    let s = 2.0 * (theta / 2.0).sin();
    let cot = 1.0 / (theta / 2.0).tan();
    let first = k2 * (theta * theta - 2.0 * PI * theta + 2.0 - 2.0 * theta.cos() + 2.0 * (PI - theta) * theta.sin())
        / (s * s);
    let second = 0.5 * k2 * k2 * (-2.0 + theta * cot) * (-2.0 + (theta - 2.0 * PI) * cot);
    let pref = params.j_scaled() / (params.n_bath as f64 * bath.alpha_s);
    Ok(pref * s.recip().powf(k2) * (first + second))
}

/// [`reparam_self_energy`] at physical `0 < τ < β`, with the conformal
/// weight `(2π/β)^{2p/q}` restored.
pub fn reparam_self_energy_at_beta(tau: f64, params: &ModelParams, bath: &ConformalBath) -> Result<f64> {
    let beta = params.beta;
    if !beta.is_finite() {
        return Err(invalid("beta", "needs finite temperature"));
    }
    let theta = 2.0 * PI * tau / beta;
    Ok((2.0 * PI / beta).powf(2.0 * params.kappa()) * reparam_self_energy(theta, params, bath)?)
}
