//! Replica-contour saddle for the purity and second Rényi entropy of half the
//! chain after the EPR-product quench at infinite temperature.
//!
//! Bilocal fields live on a closed contour of four length-T segments sampled at
//! segment midpoints. The free kernels are `(1/2)sgn` over the contour loops, and
//! the twisted configuration reconnects the loops of the chain sites in region A.

use crate::error::{invalid, LcError, Result};
use crate::numerics::{inverse, linear_fit, log_det, LinearFit};
use crate::params::{ModelParams, Momentum, SolverOptions};
use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

type CMat = Mat<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

pub const MIN_SEGMENT_POINTS: usize = 10;
pub const DEFAULT_SEGMENT_POINTS: usize = 10;

/// Discretized replica contour.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourSpec {
    t: f64,
    n_seg: usize,
    f: Vec<Complex64>,
}

impl ContourSpec {
    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn n_seg(&self) -> usize {
        self.n_seg
    }

    pub fn len(&self) -> usize {
        4 * self.n_seg
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Spacing, equal to the quadrature weight of every midpoint.
    pub fn spacing(&self) -> f64 {
        self.t / self.n_seg as f64
    }

    pub fn f(&self) -> &[Complex64] {
        &self.f
    }

    /// Contour coordinate of point `a`, in `(0, 4T)`.
    pub fn point(&self, a: usize) -> f64 {
        (a as f64 + 0.5) * self.spacing()
    }
}

pub fn build_contour(t: f64, n_seg: usize) -> Result<ContourSpec> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid("T", format!("must be finite and non-negative, got {t}")));
    }
    if n_seg < MIN_SEGMENT_POINTS {
        return Err(invalid("n_seg", format!("need at least {MIN_SEGMENT_POINTS} points per segment, got {n_seg}")));
    }
    let f = (0..4 * n_seg).map(|a| if (a / n_seg).is_multiple_of(2) { -I } else { I }).collect();
    Ok(ContourSpec { t, n_seg, f })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelVariant {
    /// loops (0, 2T) and (2T, 4T)
    F0,
    /// loops (T, 3T) and (3T, 4T) ∪ (0, T)
    F1,
}

/// Free contour propagator `(1/2)sgn` over the variant's loops and its inverse.
#[derive(Debug, Clone)]
pub struct ContourKernel {
    pub variant: KernelVariant,
    pub propagator: Mat<f64>,
    pub inverse: Mat<f64>,
}

impl ContourKernel {
    pub fn new(variant: KernelVariant, n_seg: usize) -> Self {
        let n = n_seg;
        let loops: [Vec<usize>; 2] = match variant {
            KernelVariant::F0 => [(0..2 * n).collect(), (2 * n..4 * n).collect()],
            KernelVariant::F1 => [(n..3 * n).collect(), (0..n).chain(3 * n..4 * n).collect()],
        };
        let mut prop = Mat::<f64>::zeros(4 * n, 4 * n);
        for lp in &loops {
            for (x, &a) in lp.iter().enumerate() {
                for (y, &b) in lp.iter().enumerate() {
                    prop[(a, b)] = 0.5 * (x as f64 - y as f64).signum() * f64::from(x != y);
                }
            }
        }
        let inverse = {
            use faer::linalg::solvers::DenseSolveCore;
            prop.partial_piv_lu().inverse()
        };
        Self { variant, propagator: prop, inverse }
    }
}

/// Which chain half carries the swap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Twist {
    None,
    /// sites `0..N/2` (region A)
    Lower,
    /// sites `N/2..N`
    Upper,
}

impl From<bool> for Twist {
    fn from(b: bool) -> Self {
        if b {
            Twist::Lower
        } else {
            Twist::None
        }
    }
}

impl Twist {
    fn twisted(self, site: usize, n: usize) -> bool {
        match self {
            Twist::None => false,
            Twist::Lower => site < n / 2,
            Twist::Upper => site >= n / 2,
        }
    }
}

/// Converged saddle-point fields. `g_psi_a` and `g_psi_b` average the diagonal
/// site blocks over sites `0..N/2` and `N/2..N`.
#[derive(Debug, Clone)]
pub struct QuenchFields {
    pub twist: Twist,
    pub g_psi_a: CMat,
    pub g_psi_b: CMat,
    pub g_chi: CMat,
    pub sigma_psi: CMat,
    pub sigma_chi: CMat,
    pub iterations: usize,
    pub residual: f64,
    pub residual_history: Vec<f64>,
}

struct Setup<'a> {
    params: &'a ModelParams,
    contour: &'a ContourSpec,
    k0: ContourKernel,
    k1: ContourKernel,
    ff: CMat,
    /// drop the cluster sector, exact for the entropy when V = 0
    chain_only: bool,
}

impl<'a> Setup<'a> {
    fn new(params: &'a ModelParams, contour: &'a ContourSpec) -> Result<Self> {
        params.validate_couplings()?;
        if !params.n_sites.is_multiple_of(2) {
            return Err(invalid("N", format!("must be even, got {}", params.n_sites)));
        }
        let n = contour.n_seg();
        let f = contour.f();
        Ok(Self {
            params,
            contour,
            k0: ContourKernel::new(KernelVariant::F0, n),
            k1: ContourKernel::new(KernelVariant::F1, n),
            ff: Mat::from_fn(4 * n, 4 * n, |a, b| f[a] * f[b]),
            chain_only: false,
        })
    }

    fn m(&self) -> usize {
        self.contour.len()
    }

    fn dt(&self) -> f64 {
        self.contour.spacing()
    }

    fn kernel(&self, twisted: bool) -> &ContourKernel {
        if twisted {
            &self.k1
        } else {
            &self.k0
        }
    }

    fn self_energies(&self, g_a: &CMat, g_b: &CMat, g_chi: &CMat) -> (CMat, CMat) {
        let p = self.params;
        let (q, pp) = (p.q as i32, p.p as i32);
        let ratio = p.n_sites as f64 / p.n_bath as f64;
        let vv = p.v * p.v;
        let m = self.m();
        let sigma_psi = Mat::from_fn(m, m, |a, b| self.ff[(a, b)] * g_chi[(a, b)].powi(pp) * (vv / pp as f64));
        let sigma_chi = Mat::from_fn(m, m, |a, b| {
            let g = g_chi[(a, b)];
            self.ff[(a, b)]
                * (p.j * p.j * g.powi(q - 1) + ratio * vv * g.powi(pp - 1) * (g_a[(a, b)] + g_b[(a, b)]) * 0.5)
        });
        (sigma_psi, sigma_chi)
    }

    /// Diagonal of `-i w dt h ⊗ diag(f)` on the plane wave `k`, i.e. `2w sin k dt f`.
    fn hopping_k(&self, k: f64) -> Vec<Complex64> {
        let c = 2.0 * self.params.hopping * k.sin() * self.dt();
        self.contour.f().iter().map(|f| c * f).collect()
    }

    /// Local chain propagator of the untwisted ring, `(1/N) Σ_k (F0⁻¹ - dt²Σ_ψ + 2w sin k dt diag f)⁻¹`.
    fn chain_untwisted(&self, sigma_psi: &CMat) -> Result<CMat> {
        let m = self.m();
        let dt2 = self.dt() * self.dt();
        let n = self.params.n_sites;
        let base = Mat::from_fn(m, m, |a, b| Complex64::from(self.k0.inverse[(a, b)]) - dt2 * sigma_psi[(a, b)]);
        let sum = Momentum::grid(n)
            .into_par_iter()
            .map(|k| {
                let d = self.hopping_k(k.value());
                let mut kk = base.clone();
                for a in 0..m {
                    kk[(a, a)] += d[a];
                }
                checked_inverse(&kk, self.contour.time())
            })
            .try_reduce(|| Mat::zeros(m, m), |a, b| Ok(a + b))?;
        Ok(scale(&sum, 1.0 / n as f64))
    }

    fn full_chain_kernel(&self, sigma_psi: &CMat, twist: Twist) -> CMat {
        let m = self.m();
        let n = self.params.n_sites;
        let dt = self.dt();
        let dt2 = dt * dt;
        let hop = -I * self.params.hopping * dt;
        let f = self.contour.f();
        let mut k = Mat::<Complex64>::zeros(n * m, n * m);
        for r in 0..n {
            let kin = &self.kernel(twist.twisted(r, n)).inverse;
            for a in 0..m {
                for b in 0..m {
                    k[(r * m + a, r * m + b)] = Complex64::from(kin[(a, b)]) - dt2 * sigma_psi[(a, b)];
                }
            }
            // h_{r,r+1} = 1, h_{r+1,r} = -1
            let s = (r + 1) % n;
            for a in 0..m {
                k[(r * m + a, s * m + a)] += hop * f[a];
                k[(s * m + a, r * m + a)] -= hop * f[a];
            }
        }
        k
    }

    fn chain_twisted(&self, sigma_psi: &CMat, twist: Twist) -> Result<(CMat, CMat)> {
        let m = self.m();
        let n = self.params.n_sites;
        let g = checked_inverse(&self.full_chain_kernel(sigma_psi, twist), self.contour.time())?;
        let half = |sites: std::ops::Range<usize>| -> CMat {
            let count = sites.len() as f64;
            let mut acc = Mat::<Complex64>::zeros(m, m);
            for r in sites {
                for a in 0..m {
                    for b in 0..m {
                        acc[(a, b)] += g[(r * m + a, r * m + b)];
                    }
                }
            }
            scale(&acc, 1.0 / count)
        };
        Ok((half(0..n / 2), half(n / 2..n)))
    }

    fn chain(&self, sigma_psi: &CMat, twist: Twist) -> Result<(CMat, CMat)> {
        if twist == Twist::None {
            let g = self.chain_untwisted(sigma_psi)?;
            Ok((g.clone(), g))
        } else {
            self.chain_twisted(sigma_psi, twist)
        }
    }

    fn chi(&self, sigma_chi: &CMat) -> Result<CMat> {
        let m = self.m();
        let dt2 = self.dt() * self.dt();
        let k = Mat::from_fn(m, m, |a, b| Complex64::from(self.k0.inverse[(a, b)]) - dt2 * sigma_chi[(a, b)]);
        checked_inverse(&k, self.contour.time())
    }
}

fn checked_inverse(k: &CMat, t: f64) -> Result<CMat> {
    let g = inverse(k.as_ref());
    let big = g.norm_max();
    if !big.is_finite() || big > 1e12 {
        return Err(LcError::SingularKernel(t));
    }
    Ok(g)
}

fn max_diff(a: &CMat, b: &CMat) -> f64 {
    (a - b).norm_max()
}

fn mix(old: &CMat, new: &CMat, x: f64) -> CMat {
    Mat::from_fn(old.nrows(), old.ncols(), |a, b| old[(a, b)] * (1.0 - x) + new[(a, b)] * x)
}

fn scale(m: &CMat, c: f64) -> CMat {
    Mat::from_fn(m.nrows(), m.ncols(), |a, b| m[(a, b)] * c)
}

fn to_complex(m: &Mat<f64>) -> CMat {
    Mat::from_fn(m.nrows(), m.ncols(), |a, b| Complex64::from(m[(a, b)]))
}

pub fn solve_quench(params: &ModelParams, contour: &ContourSpec, twist: impl Into<Twist>, opts: &SolverOptions) -> Result<QuenchFields> {
    opts.validate()?;
    let twist = twist.into();
    let setup = Setup::new(params, contour)?;
    solve_with(&setup, twist, opts)
}

fn solve_with(setup: &Setup<'_>, twist: Twist, opts: &SolverOptions) -> Result<QuenchFields> {
    let mut g_chi = to_complex(&setup.k0.propagator);
    if setup.chain_only {
        let m = setup.m();
        let (g_a, g_b) = setup.chain(&Mat::zeros(m, m), twist)?;
        return Ok(QuenchFields {
            twist,
            g_psi_a: g_a,
            g_psi_b: g_b,
            g_chi,
            sigma_psi: Mat::zeros(m, m),
            sigma_chi: Mat::zeros(m, m),
            iterations: 1,
            residual: 0.0,
            residual_history: vec![0.0],
        });
    }
    let (mut g_a, mut g_b) = {
        let (s, _) = setup.self_energies(&g_chi, &g_chi, &g_chi);
        setup.chain(&s, twist)?
    };
    let mut x = opts.mixing;
    let mut history = Vec::new();
    let mut halvings = 0usize;
    for it in 1..=opts.max_iter {
        let (sigma_psi, sigma_chi) = setup.self_energies(&g_a, &g_b, &g_chi);
        let (na, nb) = setup.chain(&sigma_psi, twist)?;
        let nchi = setup.chi(&sigma_chi)?;
        let res = max_diff(&na, &g_a).max(max_diff(&nb, &g_b)).max(max_diff(&nchi, &g_chi));
        if let Some(&last) = history.last() {
            if res > last && x > 1.0 / 1024.0 {
                x *= 0.5;
                halvings += 1;
            }
        }
        history.push(res);
        g_a = mix(&g_a, &na, x);
        g_b = mix(&g_b, &nb, x);
        g_chi = mix(&g_chi, &nchi, x);
        if res < opts.tol {
            let (sigma_psi, sigma_chi) = setup.self_energies(&g_a, &g_b, &g_chi);
            return Ok(QuenchFields {
                twist,
                g_psi_a: g_a,
                g_psi_b: g_b,
                g_chi,
                sigma_psi,
                sigma_chi,
                iterations: it,
                residual: res,
                residual_history: history,
            });
        }
    }
    Err(LcError::NoConvergence {
        iterations: opts.max_iter,
        residual: history.last().copied().unwrap_or(f64::NAN),
        oscillating: halvings > 0,
    })
}

/// `log det(I - Y)` continued from `Y = 0` along `I - sY`, `s ∈ [0, 1]`, with every
/// accepted step changing the phase by less than π/2.
pub fn continued_log_det(y: &CMat, t: f64) -> Result<Complex64> {
    let n = y.nrows();
    let eval = |s: f64| log_det(Mat::from_fn(n, n, |a, b| if a == b { ONE } else { ZERO } - y[(a, b)] * s).as_ref());
    let mut s_prev: f64 = 0.0;
    let mut prev = ZERO;
    let mut h: f64 = 0.25;
    while s_prev < 1.0 {
        let s = (s_prev + h).min(1.0);
        let raw = eval(s);
        let turns = ((prev.im - raw.im) / (2.0 * PI)).round();
        let next = Complex64::new(raw.re, raw.im + 2.0 * PI * turns);
        let jump = next.im - prev.im;
        if !raw.re.is_finite() || jump.abs() >= 0.5 * PI {
            h *= 0.5;
            if h < 1.0 / 4096.0 {
                return Err(LcError::BranchTracking { t, jump });
            }
            continue;
        }
        prev = next;
        s_prev = s;
        if jump.abs() < PI / 8.0 {
            h = (2.0 * h).min(0.5);
        }
    }
    Ok(prev)
}

fn elementwise_sum(a: &CMat, b: &CMat) -> Complex64 {
    let mut acc = ZERO;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            acc += a[(i, j)] * b[(i, j)];
        }
    }
    acc
}

/// `-I` at the saddle with all five terms.
pub fn evaluate_action(fields: &QuenchFields, params: &ModelParams, contour: &ContourSpec) -> Result<Complex64> {
    let setup = Setup::new(params, contour)?;
    action_with(&setup, fields)
}

fn action_with(setup: &Setup<'_>, fields: &QuenchFields) -> Result<Complex64> {
    let p = setup.params;
    let m = setup.m();
    let n = p.n_sites;
    let nf = n as f64;
    let mf = if setup.chain_only { 0.0 } else { p.n_bath as f64 };
    let t = setup.contour.time();
    let dt = setup.dt();
    let dt2 = dt * dt;
    let sigma_psi = &fields.sigma_psi;
    let sigma_chi = &fields.sigma_chi;
    let s0 = to_complex(&setup.k0.propagator);

    let chain_logdet = if fields.twist == Twist::None {
        Momentum::grid(n)
            .into_par_iter()
            .map(|k| {
                let d = setup.hopping_k(k.value());
                // Y = F0 (dt²Σ_ψ - 2w sin k dt diag f)
                let x = Mat::from_fn(m, m, |a, b| dt2 * sigma_psi[(a, b)] - if a == b { d[a] } else { ZERO });
                continued_log_det(&(&s0 * &x), t)
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .sum::<Complex64>()
    } else {
        let k = setup.full_chain_kernel(sigma_psi, fields.twist);
        // Y = I - S_ref K with S_ref the block-diagonal free propagator
        let mut y = Mat::<Complex64>::zeros(n * m, n * m);
        for r in 0..n {
            let sref = &setup.kernel(fields.twist.twisted(r, n)).propagator;
            for a in 0..m {
                for c in 0..n * m {
                    let mut acc = ZERO;
                    for b in 0..m {
                        acc += sref[(a, b)] * k[(r * m + b, c)];
                    }
                    y[(r * m + a, c)] = if r * m + a == c { ONE } else { ZERO } - acc;
                }
            }
        }
        continued_log_det(&y, t)?
    };
    let chi_logdet = if setup.chain_only {
        ZERO
    } else {
        let y = &s0 * scale(sigma_chi, dt2);
        continued_log_det(&y, t)?
    };
    let q = p.q as i32;
    let pp = p.p as i32;
    let g_avg = scale(&(&fields.g_psi_a + &fields.g_psi_b), 0.5);
    let ff_gq = Mat::from_fn(m, m, |a, b| setup.ff[(a, b)] * fields.g_chi[(a, b)].powi(q));
    let ff_gp = Mat::from_fn(m, m, |a, b| setup.ff[(a, b)] * fields.g_chi[(a, b)].powi(pp));
    let ones = Mat::from_fn(m, m, |_, _| ONE);

    let mut minus_i = 0.5 * chain_logdet + 0.5 * mf * chi_logdet;
    minus_i -= 0.25 * nf * dt2 * (elementwise_sum(sigma_psi, &fields.g_psi_a) + elementwise_sum(sigma_psi, &fields.g_psi_b));
    minus_i -= 0.5 * mf * dt2 * elementwise_sum(sigma_chi, &fields.g_chi);
    minus_i += (mf * p.j * p.j / (2.0 * q as f64)) * dt2 * elementwise_sum(&ff_gq, &ones);
    minus_i += (nf * p.v * p.v / (2.0 * pp as f64)) * dt2 * elementwise_sum(&ff_gp, &g_avg);
    // Equal-time pairs of the averaged interaction: every field equals 1/2 there,
    // and the zero diagonal of the antisymmetric matrices drops them.
    let diag: Complex64 = setup.contour.f().iter().map(|f| f * f).sum();
    minus_i += (mf * p.j * p.j / (2.0 * q as f64)) * dt2 * 0.5f64.powi(q) * diag;
    minus_i += (nf * p.v * p.v / (2.0 * pp as f64)) * dt2 * 0.5f64.powi(pp + 1) * diag;
    Ok(minus_i)
}

/// `-I` of the free untwisted chain at the same resolution. Unitarity fixes its
/// continuum value to zero; the discrete value is subtracted from both actions.
fn free_reference(setup: &Setup<'_>) -> Result<Complex64> {
    let m = setup.m();
    let s0 = to_complex(&setup.k0.propagator);
    let t = setup.contour.time();
    let parts = Momentum::grid(setup.params.n_sites)
        .into_par_iter()
        .map(|k| {
            let d = setup.hopping_k(k.value());
            let y = Mat::from_fn(m, m, |a, b| -s0[(a, b)] * d[b]);
            continued_log_det(&y, t)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(0.5 * parts.into_iter().sum::<Complex64>())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PurityResult {
    pub t: f64,
    pub purity: f64,
    pub s2: f64,
    /// `-I₀ - (-I_free)`, zero for exactly unitary evolution
    pub log_norm: f64,
    /// `Im(I₂ - I₀)`
    pub imag_part: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// `P = exp(I₀ - I₂)` and `S₂ = -log P` from the untwisted and twisted saddles.
pub fn purity_and_entropy(params: &ModelParams, contour: &ContourSpec, opts: &SolverOptions) -> Result<PurityResult> {
    purity_with_twist(params, contour, Twist::Lower, opts)
}

/// As [`purity_and_entropy`] with a chosen twisted half.
pub fn purity_with_twist(params: &ModelParams, contour: &ContourSpec, twist: Twist, opts: &SolverOptions) -> Result<PurityResult> {
    opts.validate()?;
    let mut setup = Setup::new(params, contour)?;
    // At V = 0 the cluster enters both saddles identically and cancels in P.
    setup.chain_only = params.v == 0.0;
    let untwisted = solve_with(&setup, Twist::None, opts)?;
    let twisted = solve_with(&setup, twist, opts)?;
    let reference = free_reference(&setup)?;
    let a0 = action_with(&setup, &untwisted)? - reference;
    let a2 = action_with(&setup, &twisted)? - reference;
    let log_p = a2 - a0;
    Ok(PurityResult {
        t: contour.time(),
        purity: log_p.re.exp(),
        s2: -log_p.re,
        log_norm: a0.re,
        imag_part: log_p.im,
        residual: untwisted.residual.max(twisted.residual),
        iterations: untwisted.iterations.max(twisted.iterations),
    })
}

/// Denominator of the per-Majorana entropy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PerMajorana {
    /// `N + M`
    #[default]
    Total,
    /// chain Majoranas only
    Chain,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub solver: SolverOptions,
    pub n_seg: usize,
    pub per_majorana: PerMajorana,
    /// use `M = N` for every chain length
    pub bath_follows_chain: bool,
    /// `[T_min, T_max]` for slope fits
    pub fit_window: (f64, f64),
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            n_seg: DEFAULT_SEGMENT_POINTS,
            per_majorana: PerMajorana::Total,
            bath_follows_chain: true,
            fit_window: (0.0, f64::INFINITY),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenyiPoint {
    pub n: usize,
    pub m: usize,
    pub t: f64,
    pub s2: f64,
    pub s2_per_majorana: f64,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extrapolated {
    pub t: f64,
    /// per-Majorana value at `1/N → 0`
    pub value: f64,
    pub std_err: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub slope_se: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

impl From<LinearFit> for SlopeFit {
    fn from(f: LinearFit) -> Self {
        Self { slope: f.slope, slope_se: f.slope_se, intercept: f.intercept, r_squared: f.r_squared }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenyiCurve {
    pub points: Vec<RenyiPoint>,
    pub extrapolated: Vec<Extrapolated>,
    /// `(N, fit of S₂ against T)` over the window
    pub slopes: Vec<(usize, SlopeFit)>,
    /// fit of the extrapolated per-Majorana curve over the window; its standard
    /// error includes the extrapolation errors of the fitted points
    pub extrapolated_slope: Option<SlopeFit>,
    pub fit_window: (f64, f64),
    pub warnings: Vec<String>,
}

impl RenyiCurve {
    pub fn curve(&self, n: usize) -> Vec<&RenyiPoint> {
        self.points.iter().filter(|p| p.n == n).collect()
    }
}

const R2_WARN: f64 = 0.95;

fn window_fit(ts: &[f64], ys: &[f64], window: (f64, f64)) -> Option<LinearFit> {
    let (x, y): (Vec<f64>, Vec<f64>) =
        ts.iter().zip(ys).filter(|(t, _)| **t >= window.0 && **t <= window.1).map(|(t, y)| (*t, *y)).unzip();
    (x.len() >= 2).then(|| linear_fit(&x, &y))
}

pub fn renyi_sweep(base: &ModelParams, n_list: &[usize], t_list: &[f64], opts: &SweepOptions) -> Result<RenyiCurve> {
    if n_list.is_empty() || t_list.is_empty() {
        return Err(invalid("N_list", "need at least one chain length and one time"));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("N_list", "must be strictly ascending"));
    }
    if let Some(n) = n_list.iter().find(|n| *n % 2 != 0) {
        return Err(invalid("N_list", format!("entries must be even, got {n}")));
    }
    let cells: Vec<(usize, f64)> = n_list.iter().flat_map(|&n| t_list.iter().map(move |&t| (n, t))).collect();
    let points = cells
        .par_iter()
        .map(|&(n, t)| {
            let mut p = *base;
            p.n_sites = n;
            if opts.bath_follows_chain {
                p.n_bath = n;
            }
            let contour = build_contour(t, opts.n_seg)?;
            let r = purity_and_entropy(&p, &contour, &opts.solver)?;
            let denom = match opts.per_majorana {
                PerMajorana::Total => (p.n_sites + p.n_bath) as f64,
                PerMajorana::Chain => p.n_sites as f64,
            };
            Ok(RenyiPoint {
                n,
                m: p.n_bath,
                t,
                s2: r.s2,
                s2_per_majorana: r.s2 / denom,
                residual: r.residual,
                iterations: r.iterations,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut warnings = Vec::new();
    let mut extrapolated = Vec::new();
    if n_list.len() >= 2 {
        for &t in t_list {
            let (x, y): (Vec<f64>, Vec<f64>) =
                points.iter().filter(|p| p.t == t).map(|p| (1.0 / p.n as f64, p.s2_per_majorana)).unzip();
            let fit = linear_fit(&x, &y);
            if fit.r_squared < R2_WARN && n_list.len() > 2 {
                warnings.push(format!("1/N extrapolation at T = {t}: R² = {:.3}", fit.r_squared));
            }
            extrapolated.push(Extrapolated { t, value: fit.intercept, std_err: fit.intercept_se, r_squared: fit.r_squared });
        }
    }
    let mut slopes = Vec::new();
    for &n in n_list {
        let (ts, ys): (Vec<f64>, Vec<f64>) = points.iter().filter(|p| p.n == n).map(|p| (p.t, p.s2)).unzip();
        if let Some(fit) = window_fit(&ts, &ys, opts.fit_window) {
            if fit.r_squared < R2_WARN {
                warnings.push(format!("slope fit at N = {n}: R² = {:.3}", fit.r_squared));
            }
            slopes.push((n, fit.into()));
        }
    }
    let extrapolated_slope = {
        let window = opts.fit_window;
        let sel: Vec<&Extrapolated> = extrapolated.iter().filter(|e| e.t >= window.0 && e.t <= window.1).collect();
        (sel.len() >= 2).then(|| {
            let ts: Vec<f64> = sel.iter().map(|e| e.t).collect();
            let ys: Vec<f64> = sel.iter().map(|e| e.value).collect();
            let fit = linear_fit(&ts, &ys);
            // add the scatter of the extrapolated points themselves
            let mean = ts.iter().sum::<f64>() / ts.len() as f64;
            let sxx: f64 = ts.iter().map(|t| (t - mean).powi(2)).sum();
            let propagated: f64 = sel.iter().map(|e| ((e.t - mean) / sxx * e.std_err).powi(2)).sum();
            SlopeFit { slope_se: (fit.slope_se.powi(2) + propagated).sqrt(), ..fit.into() }
        })
    };
    Ok(RenyiCurve { points, extrapolated, slopes, extrapolated_slope, fit_window: opts.fit_window, warnings })
}
