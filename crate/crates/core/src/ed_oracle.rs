//! Exact small-system oracles: disorder-sampled exact diagonalization of the
//! coupled model and covariance-matrix entanglement of the free chain.
//!
//! Majoranas are built by the Jordan-Wigner string on qubits, normalized to
//! `γ² = 1/2`. For the doubled (quench) system the left and right copies of each
//! mode share a qubit, which makes the EPR pairing a product state and region A a
//! qubit prefix.

use crate::error::{invalid, LcError, Result};
use crate::free_chain::grid_energy;
use crate::params::{ModelParams, Momentum};
use faer::{Mat, Side};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

pub const MAX_BATH: usize = 16;
pub const MAX_THERMAL_MAJORANAS: usize = 26;
pub const MAX_QUENCH_MAJORANAS: usize = 28;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Increasing index tuples of length `k` drawn from `0..n`, lexicographic.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(pos) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return out;
        };
        idx[pos] += 1;
        for j in pos + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// One draw of the random couplings.
#[derive(Debug, Clone, PartialEq)]
pub struct DisorderRealization {
    pub seed: u64,
    /// cluster index tuples `i1 < ... < iq`, shared by every realization of a size
    pub j_indices: Vec<Vec<usize>>,
    pub j_values: Vec<f64>,
    /// cluster index tuples `i1 < ... < ip`
    pub v_indices: Vec<Vec<usize>>,
    /// `v_values[r * v_indices.len() + c]` couples site `r` to tuple `c`
    pub v_values: Vec<f64>,
}

impl DisorderRealization {
    pub fn v(&self, site: usize, tuple: usize) -> f64 {
        self.v_values[site * self.v_indices.len() + tuple]
    }
}

pub fn sample_disorder(params: &ModelParams, seed: u64) -> Result<DisorderRealization> {
    params.validate_couplings()?;
    if params.n_bath > MAX_BATH {
        return Err(LcError::TooLarge { what: "M", got: params.n_bath, max: MAX_BATH });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let j_indices = combinations(params.n_bath, params.q as usize);
    let v_indices = combinations(params.n_bath, params.p as usize);
    let mut draw = |var: f64, n: usize| -> Vec<f64> {
        if var == 0.0 {
            return vec![0.0; n];
        }
        let dist = Normal::new(0.0, var.sqrt()).expect("positive variance");
        (0..n).map(|_| dist.sample(&mut rng)).collect()
    };
    let j_values = draw(params.j_variance(), j_indices.len());
    let v_values = draw(params.v_variance(), params.n_sites * v_indices.len());
    Ok(DisorderRealization { seed, j_indices, j_values, v_indices, v_values })
}

/// Jordan-Wigner Majoranas on `n/2` qubits. Majorana `2j` is `X_j`, `2j+1` is
/// `Y_j`, each with the parity string of the lower qubits and a factor `1/√2`.
#[derive(Debug, Clone, Copy)]
pub struct MajoranaAlgebra {
    n_majorana: usize,
}

impl MajoranaAlgebra {
    pub fn new(n_majorana: usize) -> Result<Self> {
        if n_majorana == 0 || !n_majorana.is_multiple_of(2) {
            return Err(invalid("majoranas", format!("need a positive even count, got {n_majorana}")));
        }
        if n_majorana > MAX_QUENCH_MAJORANAS {
            return Err(LcError::TooLarge { what: "Majorana count", got: n_majorana, max: MAX_QUENCH_MAJORANAS });
        }
        let alg = Self { n_majorana };
        // Clifford relations checked on the bit rules themselves (cheap at any size).
        for a in 0..n_majorana {
            for b in 0..n_majorana {
                for s in [0usize, alg.dim() - 1, 0x5555 & (alg.dim() - 1)] {
                    let (s1, p1) = alg.apply(b, s);
                    let (s2, p2) = alg.apply(a, s1);
                    let (t1, q1) = alg.apply(a, s);
                    let (t2, q2) = alg.apply(b, t1);
                    assert_eq!(s2, t2);
                    let anti = p1 * p2 + q1 * q2;
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert!((anti - want).norm() < 1e-14, "Majorana algebra broken at ({a},{b})");
                }
            }
        }
        Ok(alg)
    }

    pub fn n_majorana(&self) -> usize {
        self.n_majorana
    }

    pub fn n_qubits(&self) -> usize {
        self.n_majorana / 2
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits()
    }

    /// `γ_a |s⟩ = phase |s'⟩`
    #[inline]
    pub fn apply(&self, a: usize, s: usize) -> (usize, Complex64) {
        let j = a / 2;
        let string = (s & ((1 << j) - 1)).count_ones() % 2 == 1;
        let mut ph = Complex64::new(if string { -FRAC_1_SQRT_2 } else { FRAC_1_SQRT_2 }, 0.0);
        if a % 2 == 1 {
            ph *= if (s >> j) & 1 == 0 { I } else { -I };
        }
        (s ^ (1 << j), ph)
    }

    /// `γ_{a1} γ_{a2} ... γ_{ak} |s⟩`, rightmost factor applied first.
    pub fn apply_string(&self, ops: &[usize], s: usize) -> (usize, Complex64) {
        ops.iter().rev().fold((s, Complex64::new(1.0, 0.0)), |(s, ph), &a| {
            let (t, p) = self.apply(a, s);
            (t, ph * p)
        })
    }

    pub fn dense(&self, a: usize) -> Mat<Complex64> {
        let mut m = Mat::zeros(self.dim(), self.dim());
        for s in 0..self.dim() {
            let (t, ph) = self.apply(a, s);
            m[(t, s)] = ph;
        }
        m
    }
}

/// A weighted sum of Majorana strings stored as one phase table per bit-flip mask.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    dim: usize,
    blocks: Vec<(usize, Vec<Complex64>)>,
}

impl SparseOperator {
    pub fn from_terms(alg: &MajoranaAlgebra, terms: &[(Complex64, Vec<usize>)]) -> Self {
        let dim = alg.dim();
        let mut by_mask: BTreeMap<usize, Vec<Complex64>> = BTreeMap::new();
        for (coef, ops) in terms {
            if *coef == Complex64::new(0.0, 0.0) {
                continue;
            }
            let mask = ops.iter().fold(0usize, |m, &a| m ^ (1 << (a / 2)));
            let table = by_mask.entry(mask).or_insert_with(|| vec![Complex64::new(0.0, 0.0); dim]);
            for (s, slot) in table.iter_mut().enumerate() {
                *slot += coef * alg.apply_string(ops, s).1;
            }
        }
        Self { dim, blocks: by_mask.into_iter().collect() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        y.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for (mask, table) in &self.blocks {
            for (s, (&xs, &ph)) in x.iter().zip(table).enumerate() {
                y[s ^ mask] += ph * xs;
            }
        }
    }

    pub fn dense(&self) -> Mat<Complex64> {
        let mut m = Mat::zeros(self.dim, self.dim);
        for (mask, table) in &self.blocks {
            for (s, &ph) in table.iter().enumerate() {
                m[(s ^ mask, s)] += ph;
            }
        }
        m
    }

    /// Upper bound on the operator norm (max absolute column sum).
    pub fn norm_bound(&self) -> f64 {
        (0..self.dim)
            .map(|s| self.blocks.iter().map(|(_, t)| t[s].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn expectation(&self, v: &[Complex64]) -> Complex64 {
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim];
        self.apply(v, &mut y);
        v.iter().zip(&y).map(|(a, b)| a.conj() * b).sum()
    }
}

/// Hamiltonian terms with the chain Majorana `r` at `site(r)` and the cluster
/// Majorana `i` at `bath(i)`.
fn hamiltonian_terms(
    params: &ModelParams,
    dis: &DisorderRealization,
    site: impl Fn(usize) -> usize,
    bath: impl Fn(usize) -> usize,
) -> Vec<(Complex64, Vec<usize>)> {
    let n = params.n_sites;
    let mut terms = Vec::new();
    for r in 0..n {
        terms.push((-I * params.hopping, vec![site(r), site((r + 1) % n)]));
    }
    let jphase = I.powi(params.q as i32 / 2);
    for (idx, &j) in dis.j_indices.iter().zip(&dis.j_values) {
        terms.push((jphase * j, idx.iter().map(|&i| bath(i)).collect()));
    }
    let vphase = I.powi((params.p as i32 + 1) / 2);
    for r in 0..n {
        for (c, idx) in dis.v_indices.iter().enumerate() {
            let mut ops = vec![site(r)];
            ops.extend(idx.iter().map(|&i| bath(i)));
            terms.push((vphase * dis.v(r, c), ops));
        }
    }
    terms
}

fn check_realization(params: &ModelParams, dis: &DisorderRealization) -> Result<()> {
    params.validate_couplings()?;
    let nj = combinations(params.n_bath, params.q as usize).len();
    let nv = combinations(params.n_bath, params.p as usize).len() * params.n_sites;
    if dis.j_values.len() != nj || dis.v_values.len() != nv {
        return Err(invalid("realization", "coupling tensors do not match the model size"));
    }
    Ok(())
}

/// Dense single-copy Hamiltonian, chain Majoranas first, then the cluster.
pub fn hamiltonian(params: &ModelParams, dis: &DisorderRealization) -> Result<(MajoranaAlgebra, Mat<Complex64>)> {
    check_realization(params, dis)?;
    let total = params.n_sites + params.n_bath;
    if total > MAX_THERMAL_MAJORANAS {
        return Err(LcError::TooLarge { what: "Majorana count", got: total, max: MAX_THERMAL_MAJORANAS });
    }
    if !total.is_multiple_of(2) {
        return Err(invalid("N", "N + M must be even for exact diagonalization"));
    }
    let alg = MajoranaAlgebra::new(total)?;
    let n = params.n_sites;
    let h = SparseOperator::from_terms(&alg, &hamiltonian_terms(params, dis, |r| r, |i| n + i)).dense();
    let herm = (0..h.nrows())
        .flat_map(|a| (0..h.ncols()).map(move |b| (a, b)))
        .map(|(a, b)| (h[(a, b)] - h[(b, a)].conj()).norm())
        .fold(0.0, f64::max);
    assert!(herm < 1e-12, "Hamiltonian not hermitian: {herm}");
    Ok((alg, h))
}

struct Spectrum {
    energies: Vec<f64>,
    vectors: Mat<Complex64>,
}

fn diagonalize(h: &Mat<Complex64>) -> Result<Spectrum> {
    let eig = h.self_adjoint_eigen(Side::Lower).map_err(|_| LcError::Domain("eigendecomposition failed".into()))?;
    let energies = (0..h.nrows()).map(|i| eig.S()[i].re).collect();
    Ok(Spectrum { energies, vectors: eig.U().to_owned() })
}

/// `U† γ U` in the energy eigenbasis.
fn in_eigenbasis(alg: &MajoranaAlgebra, a: usize, spec: &Spectrum) -> Mat<Complex64> {
    let u = &spec.vectors;
    let g = alg.dense(a);
    u.adjoint() * (&g * u)
}

/// Thermal weights `e^{-β(E-E0)}/Z`.
fn boltzmann(energies: &[f64], beta: f64) -> Vec<f64> {
    let e0 = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = energies.iter().map(|e| (-beta * (e - e0)).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoPointProfile {
    pub tau: Vec<f64>,
    /// `(1/M) Σ_i ⟨χ_i(τ)χ_i(0)⟩`
    pub g_chi: Vec<f64>,
    /// `(1/N) Σ_r ⟨ψ_r(τ)ψ_r(0)⟩`
    pub g_psi: Vec<f64>,
}

/// Euclidean autocorrelations on `0 ≤ τ ≤ β` by full spectral decomposition.
pub fn exact_two_point(params: &ModelParams, dis: &DisorderRealization, taus: &[f64]) -> Result<TwoPointProfile> {
    params.validate()?;
    let (alg, h) = hamiltonian(params, dis)?;
    let spec = diagonalize(&h)?;
    let beta = params.beta;
    if let Some(&t) = taus.iter().find(|t| !(**t >= 0.0 && **t <= beta)) {
        return Err(invalid("tau", format!("{t} outside [0, beta]")));
    }
    let e0 = spec.energies.iter().copied().fold(f64::INFINITY, f64::min);
    let shifted: Vec<f64> = spec.energies.iter().map(|e| e - e0).collect();
    let z: f64 = shifted.iter().map(|e| (-beta * e).exp()).sum();
    let dim = alg.dim();
    let correlator = |a: usize| -> Vec<f64> {
        let g = in_eigenbasis(&alg, a, &spec);
        let mut weights = vec![0.0; dim * dim];
        for m in 0..dim {
            for n in 0..dim {
                weights[m * dim + n] = g[(m, n)].norm_sqr();
            }
        }
        taus.iter()
            .map(|&tau| {
                // Tr e^{-βH} e^{τH} γ e^{-τH} γ / Z
                let mut acc = 0.0;
                for m in 0..dim {
                    let fm = (-(beta - tau) * shifted[m]).exp();
                    for n in 0..dim {
                        acc += fm * (-tau * shifted[n]).exp() * weights[m * dim + n];
                    }
                }
                acc / z
            })
            .collect()
    };
    let average = |range: std::ops::Range<usize>| -> Vec<f64> {
        let count = range.len() as f64;
        let sums = range.into_par_iter().map(correlator).reduce(
            || vec![0.0; taus.len()],
            |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect(),
        );
        sums.into_iter().map(|s| s / count).collect()
    };
    let n = params.n_sites;
    Ok(TwoPointProfile {
        tau: taus.to_vec(),
        g_chi: average(n..n + params.n_bath),
        g_psi: average(0..n),
    })
}

/// `⟨{ψ_r(t), ψ_{r'}(0)}²⟩_β` by exact evolution.
pub fn exact_otoc(params: &ModelParams, dis: &DisorderRealization, t: f64, r: usize, r_prime: usize) -> Result<f64> {
    params.validate()?;
    if r >= params.n_sites || r_prime >= params.n_sites {
        return Err(invalid("r", "site index outside the chain"));
    }
    let (alg, h) = hamiltonian(params, dis)?;
    let spec = diagonalize(&h)?;
    let dim = alg.dim();
    let a = in_eigenbasis(&alg, r, &spec);
    let b = in_eigenbasis(&alg, r_prime, &spec);
    let e = &spec.energies;
    let at = Mat::<Complex64>::from_fn(dim, dim, |m, n| a[(m, n)] * Complex64::from_polar(1.0, (e[m] - e[n]) * t));
    let anti = &at * &b + &b * &at;
    let c = anti.adjoint() * &anti;
    let rho = boltzmann(e, params.beta);
    Ok((0..dim).map(|m| rho[m] * c[(m, m)].re).sum())
}

/// Entropy data of region A after the doubled-system quench.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuenchEntropy {
    pub purity: f64,
    pub s2: f64,
}

/// The doubled quench system: every mode (chain sites, then cluster) owns one
/// qubit carrying its left Majorana `2m` and right Majorana `2m+1`.
pub struct QuenchSystem {
    alg: MajoranaAlgebra,
    h: SparseOperator,
    n_sites: usize,
}

impl QuenchSystem {
    pub fn new(params: &ModelParams, dis: &DisorderRealization) -> Result<Self> {
        check_realization(params, dis)?;
        let total = 2 * (params.n_sites + params.n_bath);
        if total > MAX_QUENCH_MAJORANAS {
            return Err(LcError::TooLarge { what: "doubled Majorana count", got: total, max: MAX_QUENCH_MAJORANAS });
        }
        let alg = MajoranaAlgebra::new(total)?;
        let n = params.n_sites;
        // Only the left copy evolves; the right copy is the reference of the Choi state.
        let h = SparseOperator::from_terms(&alg, &hamiltonian_terms(params, dis, |r| 2 * r, |i| 2 * (n + i)));
        Ok(Self { alg, h, n_sites: n })
    }

    pub fn hamiltonian(&self) -> &SparseOperator {
        &self.h
    }

    /// The state annihilated by every `ψ^L + iψ^R`: all qubits in |0⟩.
    pub fn epr_state(&self) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); self.alg.dim()];
        v[0] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn algebra(&self) -> &MajoranaAlgebra {
        &self.alg
    }

    /// `e^{-iHt} v` by Taylor steps with `dt·‖H‖ ≤ 1/2`.
    pub fn evolve(&self, v: &[Complex64], t: f64) -> Vec<Complex64> {
        let norm = self.h.norm_bound();
        let steps = ((t.abs() * norm / 0.5).ceil() as usize).max(1);
        let dt = t / steps as f64;
        let mut state = v.to_vec();
        let mut term = vec![Complex64::new(0.0, 0.0); v.len()];
        let mut next = term.clone();
        for _ in 0..steps {
            term.copy_from_slice(&state);
            for k in 1..60 {
                self.h.apply(&term, &mut next);
                let scale = -I * dt / k as f64;
                let mut size = 0.0f64;
                for (tk, nk) in term.iter_mut().zip(&next) {
                    *tk = scale * nk;
                    size = size.max(tk.norm());
                }
                state.iter_mut().zip(&term).for_each(|(s, x)| *s += x);
                if size < 1e-17 {
                    break;
                }
            }
        }
        state
    }

    /// Purity and S₂ of chain sites `0..n_a` (both copies).
    pub fn region_entropy(&self, state: &[Complex64], n_a: usize) -> Result<QuenchEntropy> {
        if n_a > self.n_sites {
            return Err(invalid("region_A_sites", "region exceeds the chain"));
        }
        let da = 1usize << n_a;
        let db = state.len() / da;
        // ψ[a + da·b] as a da × db matrix, ρ_A = ψψ†
        let psi = Mat::<Complex64>::from_fn(da, db, |a, b| state[a + da * b]);
        let rho = &psi * psi.adjoint();
        let purity: f64 = (0..da).flat_map(|a| (0..da).map(move |b| (a, b))).map(|(a, b)| rho[(a, b)].norm_sqr()).sum();
        Ok(QuenchEntropy { purity, s2: -purity.ln() })
    }
}

/// Exact S₂ of chain sites `0..n_a` (left and right copies) at time `t` after the
/// EPR quench.
pub fn exact_quench_entropy(params: &ModelParams, dis: &DisorderRealization, t: f64, n_a: usize) -> Result<QuenchEntropy> {
    let sys = QuenchSystem::new(params, dis)?;
    let state = sys.evolve(&sys.epr_state(), t);
    sys.region_entropy(&state, n_a)
}

/// S₂ of chain sites `0..n_a` after the EPR quench of the free ring, from the
/// Majorana covariance `Γ_ab = 2i⟨c_a c_b⟩ (a ≠ b)`. Only the left copy evolves.
pub fn gaussian_free_entropy(n_sites: usize, hopping: f64, t: f64, n_a: usize) -> Result<f64> {
    if n_sites < 2 {
        return Err(invalid("N", "need at least 2 sites"));
    }
    if n_a > n_sites {
        return Err(invalid("region_A_sites", "region exceeds the chain"));
    }
    if n_a == 0 {
        return Ok(0.0);
    }
    let n = n_sites;
    // ψ_r(t) = Σ_s O_rs ψ_s with O = e^{At}, A_{r,r+1} = -w, A_{r+1,r} = +w (periodic),
    // obtained in momentum space: A is diagonalized by plane waves with eigenvalues -iε_k.
    let o = Mat::<f64>::from_fn(n, n, |r, s| {
        let d = (r as isize - s as isize).rem_euclid(n as isize) as f64;
        (0..n)
            .map(|m| {
                let k = 2.0 * std::f64::consts::PI * m as f64 / n as f64;
                let eps = grid_energy(Momentum(k), hopping);
                (Complex64::new(0.0, -eps * t) - Complex64::new(0.0, k * d)).exp().re
            })
            .sum::<f64>()
            / n as f64
    });
    // Region A: left copies then right copies of sites 0..n_a.
    // Γ(L_r, L_s) = Σ_u O_ru O_su Γ0(L_u, L_u)... = 0 for r ≠ s by orthogonality,
    // Γ(L_r, R_s) = O_rs Γ0(L_s, R_s) = -O_rs.
    let m = 2 * n_a;
    let herm = Mat::<Complex64>::from_fn(m, m, |a, b| {
        let g = match (a < n_a, b < n_a) {
            (true, false) => -o[(a, b - n_a)],
            (false, true) => o[(b, a - n_a)],
            _ => 0.0,
        };
        Complex64::new(0.0, g)
    });
    let eig = herm.self_adjoint_eigen(Side::Lower).map_err(|_| LcError::Domain("eigendecomposition failed".into()))?;
    let s2: f64 = (0..m).map(|i| -0.5 * ((1.0 + eig.S()[i].re.powi(2)) / 2.0).ln()).sum();
    Ok(s2.max(0.0))
}

/// Pointwise mean and standard error over realizations.
#[derive(Debug, Clone, PartialEq)]
pub struct DisorderAverage {
    pub mean: Vec<f64>,
    pub std_err: Vec<f64>,
    pub samples: usize,
}

pub fn disorder_average(samples: &[Vec<f64>]) -> DisorderAverage {
    let n = samples.len();
    let len = samples.first().map_or(0, Vec::len);
    let mean: Vec<f64> = (0..len).map(|i| samples.iter().map(|s| s[i]).sum::<f64>() / n as f64).collect();
    let std_err = (0..len)
        .map(|i| {
            if n < 2 {
                return 0.0;
            }
            let var = samples.iter().map(|s| (s[i] - mean[i]).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        })
        .collect();
    DisorderAverage { mean, std_err, samples: n }
}

/// Cluster autocorrelation averaged over realizations with seeds `seed0..seed0+count`.
pub fn averaged_two_point(params: &ModelParams, taus: &[f64], seed0: u64, count: usize) -> Result<(DisorderAverage, DisorderAverage)> {
    let profiles = (0..count as u64)
        .into_par_iter()
        .map(|i| sample_disorder(params, seed0 + i).and_then(|d| exact_two_point(params, &d, taus)))
        .collect::<Result<Vec<_>>>()?;
    let chi: Vec<Vec<f64>> = profiles.iter().map(|p| p.g_chi.clone()).collect();
    let psi: Vec<Vec<f64>> = profiles.iter().map(|p| p.g_psi.clone()).collect();
    Ok((disorder_average(&chi), disorder_average(&psi)))
}
