//! Small numerical helpers shared across modules.

use faer::{Mat, MatRef};
use num_complex::Complex64;
use roots::SimpleConvergency;

use crate::error::{LcError, Result};

/// Sign with `sgn(0) = 0`.
pub fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// Brent root in `[a, b]`, converged to `|f| < tol` or bracket width `< tol`.
pub fn brent_root(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    let mut conv = SimpleConvergency { eps: tol, max_iter: 500 };
    roots::find_root_brent(a, b, &f, &mut conv).map_err(|e| LcError::Bracket(format!("{e:?} on [{a}, {b}]")))
}

/// Double-exponential quadrature on a finite interval.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    quadrature::double_exponential::integrate(f, a, b, tol).integral
}

/// Least-squares straight line with standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub intercept_se: f64,
    pub r_squared: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2, "need two points for a line");
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let dof = (x.len() as f64 - 2.0).max(1.0);
    let s2 = sse / dof;
    let slope_se = (s2 / sxx).sqrt();
    let intercept_se = (s2 * (1.0 / n + mx * mx / sxx)).sqrt();
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    LinearFit { slope, intercept, slope_se, intercept_se, r_squared }
}

/// Fit `y = A x^s` in log-log space, returning `(s, A)`.
pub fn power_law_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let lx: Vec<f64> = x.iter().map(|a| a.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|a| a.abs().ln()).collect();
    let fit = linear_fit(&lx, &ly);
    (fit.slope, fit.intercept.exp())
}

/// Complex `log det` via partial-pivot LU. The imaginary part is the principal
/// branch summed factor by factor, so callers that need continuity must unwrap it.
pub fn log_det(m: MatRef<'_, Complex64>) -> Complex64 {
    let lu = m.partial_piv_lu();
    let u = lu.U();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..u.nrows() {
        acc += u[(i, i)].ln();
    }
    if permutation_is_odd(lu.P().arrays().0) {
        acc += Complex64::new(0.0, std::f64::consts::PI);
    }
    acc
}

fn permutation_is_odd(fwd: &[usize]) -> bool {
    let mut seen = vec![false; fwd.len()];
    let mut transpositions = 0usize;
    for start in 0..fwd.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0usize;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = fwd[i];
            len += 1;
        }
        transpositions += len - 1;
    }
    transpositions % 2 == 1
}

pub fn inverse(m: MatRef<'_, Complex64>) -> Mat<Complex64> {
    use faer::linalg::solvers::DenseSolveCore;
    m.partial_piv_lu().inverse()
}

/// Wrap a phase difference into `(-π, π]`.
pub fn wrap_phase(x: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut y = x % two_pi;
    if y > std::f64::consts::PI {
        y -= two_pi;
    } else if y <= -std::f64::consts::PI {
        y += two_pi;
    }
    y
}
