use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Free chain: `n_sites` Majoranas on a periodic ring with hopping `hopping`.
/// `beta` may be `f64::INFINITY` for the ground state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    pub n_sites: usize,
    pub hopping: f64,
    pub beta: f64,
}

impl ChainParams {
    pub fn new(n_sites: usize, hopping: f64, beta: f64) -> Result<Self> {
        if n_sites < 2 {
            return Err(invalid("N", "need at least 2 sites"));
        }
        if !(hopping > 0.0 && hopping.is_finite()) {
            return Err(invalid("w", format!("hopping must be positive, got {hopping}")));
        }
        if !(beta > 0.0) {
            return Err(invalid("beta", format!("must be positive, got {beta}")));
        }
        Ok(Self { n_sites, hopping, beta })
    }

    /// Quasiparticle velocity at the band centre.
    pub fn velocity(&self) -> f64 {
        2.0 * self.hopping
    }

    pub fn is_zero_temperature(&self) -> bool {
        self.beta.is_infinite()
    }
}

/// Lattice momentum on the ring's Brillouin grid.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Momentum(pub f64);

impl Momentum {
    /// The `n`-point grid `k = -π + 2πj/n`, `j = 1..=n`.
    pub fn grid(n: usize) -> Vec<Momentum> {
        (1..=n).map(|j| Momentum(-PI + 2.0 * PI * j as f64 / n as f64)).collect()
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// One instance of the coupled chain + cluster model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// chain sites
    pub n_sites: usize,
    /// cluster Majoranas
    pub n_bath: usize,
    /// cluster interaction order (even)
    pub q: u32,
    /// chain-cluster coupling order (odd)
    pub p: u32,
    pub hopping: f64,
    pub j: f64,
    pub v: f64,
    pub beta: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self { n_sites: 18, n_bath: 18, q: 4, p: 1, hopping: 10.0, j: 1.0, v: 0.0, beta: 10.0 }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 2 {
            return Err(invalid("N", "need at least 2 sites"));
        }
        if self.n_bath < 1 {
            return Err(invalid("M", "need at least 1 cluster Majorana"));
        }
        if self.q < 2 || !self.q.is_multiple_of(2) {
            return Err(invalid("q", format!("must be even, got {}", self.q)));
        }
        if self.p % 2 != 1 {
            return Err(invalid("p", format!("must be odd, got {}", self.p)));
        }
        for (key, x) in [("w", self.hopping), ("J", self.j), ("V", self.v)] {
            if !(x >= 0.0 && x.is_finite()) {
                return Err(invalid(key, format!("must be finite and non-negative, got {x}")));
            }
        }
        if !(self.beta > 0.0) {
            return Err(invalid("beta", format!("must be positive, got {}", self.beta)));
        }
        Ok(())
    }

    /// As [`validate`](Self::validate) without the temperature, for the
    /// infinite-temperature quench and disorder sampling.
    pub fn validate_couplings(&self) -> Result<()> {
        Self { beta: 1.0, ..*self }.validate()
    }

    pub fn chain(&self) -> Result<ChainParams> {
        ChainParams::new(self.n_sites, self.hopping, self.beta)
    }

    pub fn velocity(&self) -> f64 {
        2.0 * self.hopping
    }

    /// κ = p/q
    pub fn kappa(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    /// Scaled cluster coupling with `J² = 2^{q-1} 𝒥² / q`.
    pub fn j_scaled(&self) -> f64 {
        j_to_scaled(self.j, self.q)
    }

    /// Scaled chain-cluster coupling with `V² = 2^{p-1} 𝒱² / p`.
    pub fn v_scaled(&self) -> f64 {
        v_to_scaled(self.v, self.p)
    }

    pub fn with_scaled_couplings(mut self, j_scaled: f64, v_scaled: f64) -> Self {
        self.j = j_from_scaled(j_scaled, self.q);
        self.v = v_from_scaled(v_scaled, self.p);
        self
    }

    /// Variance of each cluster coupling, `(q-1)! J² / M^{q-1}`.
    pub fn j_variance(&self) -> f64 {
        factorial(self.q - 1) * self.j * self.j / (self.n_bath as f64).powi(self.q as i32 - 1)
    }

    /// Variance of each chain-cluster coupling, `(p-1)! V² / M^p`.
    pub fn v_variance(&self) -> f64 {
        factorial(self.p - 1) * self.v * self.v / (self.n_bath as f64).powi(self.p as i32)
    }
}

pub(crate) fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

pub fn j_to_scaled(j: f64, q: u32) -> f64 {
    j * (q as f64 / 2f64.powi(q as i32 - 1)).sqrt()
}

pub fn j_from_scaled(j_scaled: f64, q: u32) -> f64 {
    j_scaled * (2f64.powi(q as i32 - 1) / q as f64).sqrt()
}

pub fn v_to_scaled(v: f64, p: u32) -> f64 {
    v * (p as f64 / 2f64.powi(p as i32 - 1)).sqrt()
}

pub fn v_from_scaled(v_scaled: f64, p: u32) -> f64 {
    v_scaled * (2f64.powi(p as i32 - 1) / p as f64).sqrt()
}

/// Conformal data of the cluster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConformalBath {
    /// prefactor of `G_χ(τ) = sgn(τ) b / |τ|^{2/q}`
    pub b: f64,
    /// Fourier prefactor of `G_χ^p`
    pub tilde_b: f64,
    /// Schwarzian coefficient
    pub alpha_s: f64,
}

pub const DEFAULT_ALPHA_S: f64 = 0.01;

/// Couplings of the large-q analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LargeQParams {
    pub jcal: f64,
    pub vcal: f64,
    pub beta: f64,
    pub kappa: f64,
    /// chain velocity `2w`
    pub velocity: f64,
}

impl LargeQParams {
    pub fn new(jcal: f64, vcal: f64, beta: f64, kappa: f64, velocity: f64) -> Result<Self> {
        if !(jcal > 0.0 && jcal.is_finite()) {
            return Err(invalid("Jcal", format!("must be positive, got {jcal}")));
        }
        if !(vcal >= 0.0 && vcal.is_finite()) {
            return Err(invalid("Vcal", format!("must be non-negative, got {vcal}")));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(invalid("beta", format!("must be positive and finite, got {beta}")));
        }
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(invalid("kappa", format!("must be positive, got {kappa}")));
        }
        if !(velocity > 0.0 && velocity.is_finite()) {
            return Err(invalid("v", format!("must be positive, got {velocity}")));
        }
        Ok(Self { jcal, vcal, beta, kappa, velocity })
    }

    pub fn with_vcal(mut self, vcal: f64) -> Self {
        self.vcal = vcal;
        self
    }

    /// `(𝒱²/(κ² v))`, the Brownian damping scale before the `(α/𝒥)^{2κ}` factor.
    pub(crate) fn damping_scale(&self) -> f64 {
        self.vcal * self.vcal / (self.kappa * self.kappa * self.velocity)
    }
}

/// Fixed-point iteration controls shared by the solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// weight of the new iterate in `G ← (1-x) G_old + x G_new`
    pub mixing: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 10_000, mixing: 0.5 }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(invalid("tol", format!("must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(invalid("max_iter", "must be at least 1"));
        }
        if !(self.mixing > 0.0 && self.mixing <= 1.0) {
            return Err(invalid("mix", format!("must lie in (0, 1], got {}", self.mixing)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn grid_is_symmetric_mod_2pi() {
        let g = Momentum::grid(8);
        assert_eq!(g.len(), 8);
        assert!((g[7].0 - PI).abs() < 1e-15);
        assert!(g.iter().any(|k| k.0.abs() < 1e-15));
    }

    #[test]
    fn rejects_bad_couplings() {
        let p = ModelParams { v: -1.0, ..Default::default() };
        match p.validate() {
            Err(crate::LcError::InvalidParam { key, .. }) => assert_eq!(key, "V"),
            other => panic!("{other:?}"),
        }
        assert!(ModelParams { q: 3, ..Default::default() }.validate().is_err());
        assert!(ModelParams { p: 2, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn variances_match_definition() {
        let p = ModelParams { n_bath: 8, q: 4, j: 1.0, ..Default::default() };
        assert!((p.j_variance() - 6.0 / 512.0).abs() < 1e-16);
        let p = ModelParams { n_bath: 8, p: 3, v: 0.5, ..Default::default() };
        assert!((p.v_variance() - 2.0 * 0.25 / 512.0).abs() < 1e-16);
    }

    proptest! {
        #[test]
        fn scaled_couplings_round_trip(j in 0.0f64..10.0, v in 0.0f64..10.0, qh in 1u32..6, ph in 0u32..4) {
            let q = 2 * qh;
            let p = 2 * ph + 1;
            let base = ModelParams { q, p, j, v, ..Default::default() };
            let back = base.with_scaled_couplings(base.j_scaled(), base.v_scaled());
            prop_assert!((back.j - j).abs() <= 4.0 * f64::EPSILON * j.max(1e-300));
            prop_assert!((back.v - v).abs() <= 4.0 * f64::EPSILON * v.max(1e-300));
        }
    }
}
