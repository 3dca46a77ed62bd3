//! Correlators of the decoupled Majorana chain `H = -i w Σ ψ_r ψ_{r+1}`.
//!
//! Normalization `{ψ_a, ψ_b} = δ_ab`, so the equal-time propagator is 1/2.
//! Lattice functions sum the exact finite Brillouin grid; continuum functions
//! use the linearized dispersion around the two Fermi points.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{LcError, Result};
use crate::params::{ChainParams, Momentum};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub fn dispersion(k: Momentum, w: f64) -> f64 {
    2.0 * w * k.0.sin()
}

/// Fermionic Matsubara frequency `(2n+1)π/β`.
pub fn matsubara(n: i64, beta: f64) -> f64 {
    (2 * n + 1) as f64 * PI / beta
}

pub fn propagator_momentum(omega: f64, k: Momentum, w: f64) -> Complex64 {
    1.0 / (-I * omega + dispersion(k, w))
}

/// Dispersion with the roundoff of `sin(±π)` snapped to an exact zero mode.
pub(crate) fn grid_energy(k: Momentum, w: f64) -> f64 {
    let e = dispersion(k, w);
    if e.abs() < 1e-12 * w {
        0.0
    } else {
        e
    }
}

/// `e^{-ε τ} / (1 + e^{-β ε})` for complex `τ` with `0 ≤ Re τ ≤ β`,
/// evaluated without overflow; a step function at `β = ∞`.
pub(crate) fn mode_weight(eps: f64, tau: Complex64, beta: f64) -> Complex64 {
    if beta.is_infinite() {
        return if eps > 0.0 {
            (-eps * tau).exp()
        } else if eps < 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.5, 0.0)
        };
    }
    if eps >= 0.0 {
        (-eps * tau).exp() / (1.0 + (-beta * eps).exp())
    } else {
        (eps * (beta - tau)).exp() / (1.0 + (beta * eps).exp())
    }
}

/// Lattice propagator `⟨ψ_r(τ) ψ_0(0)⟩` at complex imaginary time, with the
/// real part of `τ` folded into `[0, β)` by antiperiodicity.
pub fn propagator_lattice_complex(tau: Complex64, r: i64, params: &ChainParams) -> Complex64 {
    let beta = params.beta;
    let (tau, sign) = fold_antiperiodic(tau, beta);
    let n = params.n_sites;
    let sum: Complex64 = Momentum::grid(n)
        .par_iter()
        .map(|&k| (I * k.0 * r as f64).exp() * mode_weight(grid_energy(k, params.hopping), tau, beta))
        .sum();
    sign * sum / n as f64
}

fn fold_antiperiodic(tau: Complex64, beta: f64) -> (Complex64, f64) {
    if beta.is_infinite() {
        return (tau, 1.0);
    }
    let m = (tau.re / beta).floor();
    let sign = if (m as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    (tau - m * beta, sign)
}

/// Exact finite-ring propagator. Even separations are real; odd separations
/// are purely imaginary because the two Fermi points interfere with opposite sign.
pub fn propagator_lattice(tau: f64, r: i64, params: &ChainParams) -> Complex64 {
    propagator_lattice_complex(Complex64::new(tau, 0.0), r, params)
}

fn continuum_complex(tau: Complex64, r: f64, params: &ChainParams) -> Complex64 {
    let v = params.velocity();
    let beta = params.beta;
    let mut acc = Complex64::new(0.0, 0.0);
    for s in [1.0, -1.0] {
        let z = tau - I * s * r / v;
        acc += if beta.is_infinite() { 1.0 / z } else { PI / (beta * (PI * z / beta).sin()) };
    }
    acc / (2.0 * PI * v)
}

/// Continuum propagator for linear dispersion with velocity `v = 2w`.
pub fn propagator_real_space(tau: f64, r: f64, params: &ChainParams) -> Result<f64> {
    if tau == 0.0 && r == 0.0 {
        return Err(LcError::Coincident("continuum propagator diverges at τ = 0, r = 0"));
    }
    Ok(continuum_complex(Complex64::new(tau, 0.0), r, params).re)
}

/// Retarded function for a Majorana to travel a distance `dr` in time `t`.
pub fn retarded_gf(t: f64, dr: f64, params: &ChainParams) -> Complex64 {
    let v = params.velocity();
    let beta = params.beta;
    let mut acc = 0.0;
    for s in [1.0, -1.0] {
        let x = t - s * dr / v;
        acc += if beta.is_infinite() { 1.0 / x } else { PI / (beta * (PI * x / beta).sinh()) };
    }
    -I * acc / (PI * v)
}

/// Which closed form of the free OTOC to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OtocForm {
    /// includes the `1/(cosh(2πt/β) cosh(2π(t - s dr/v)/β))` cross term
    #[default]
    Full,
    /// drops the cross term
    MainText,
}

pub fn free_otoc(t: f64, dr: f64, params: &ChainParams) -> f64 {
    free_otoc_form(t, dr, params, OtocForm::Full)
}

pub fn free_otoc_form(t: f64, dr: f64, params: &ChainParams, form: OtocForm) -> f64 {
    let v = params.velocity();
    let beta = params.beta;
    let scale = 2.0 * PI / beta;
    let ct = (scale * t).cosh();
    let mut bracket = 1.0;
    for s in [1.0, -1.0] {
        let c = (scale * (t - s * dr / v)).cosh();
        bracket -= 1.0 / (c * c);
        if form == OtocForm::Full {
            bracket -= 1.0 / (ct * c);
        }
    }
    bracket / (v * beta).powi(2)
}

/// Wick-theorem OTOC built from a propagator evaluated at the regularized
/// points `τ = β/4 + it, 3β/4 + it, 0, β/2`.
fn wick_otoc(t: f64, g: impl Fn(Complex64, bool) -> Complex64, beta: f64) -> f64 {
    let it = I * t;
    let t1 = 0.25 * beta + it;
    let t2 = 0.75 * beta + it;
    let t3 = Complex64::new(0.0, 0.0);
    let t4 = Complex64::new(0.5 * beta, 0.0);
    let val = g(t1 - t2, false) * g(t3 - t4, false) - g(t1 - t3, true) * g(t2 - t4, true)
        + g(t1 - t4, true) * g(t2 - t3, true);
    val.re
}

/// Free OTOC from the continuum Wick expansion; reproduces [`free_otoc`].
pub fn free_otoc_wick(t: f64, dr: f64, params: &ChainParams) -> f64 {
    wick_otoc(t, |tau, sep| continuum_complex(tau, if sep { dr } else { 0.0 }, params), params.beta)
}

/// Free OTOC from the exact finite-ring propagator, periodic in `dr → dr + N`.
pub fn free_otoc_lattice(t: f64, dr: i64, params: &ChainParams) -> f64 {
    wick_otoc(t, |tau, sep| propagator_lattice_complex(tau, if sep { dr } else { 0 }, params), params.beta)
}
