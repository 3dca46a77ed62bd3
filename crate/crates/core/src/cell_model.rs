//! Cell-model estimates for Schwarzschild and AdS black holes.
//!
//! Order-one constants are set to 1 unless a formula keeps them explicitly;
//! each struct records which convention produced it.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, LcError, Result};
use crate::numerics::brent_root;

/// Black-body entropy prefactor in `S = (4π²/45) V T³`.
pub const BLACKBODY_PREFACTOR: f64 = 4.0 * PI * PI / 45.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchwarzschildParams {
    pub mbh: f64,
    pub h0: f64,
    /// outer cutoff as a fraction of the mass, `h ≤ alpha_cut · M`
    pub alpha_cut: f64,
}

impl SchwarzschildParams {
    pub fn new(mbh: f64, h0: f64, alpha_cut: f64) -> Result<Self> {
        if !(mbh > 0.0) {
            return Err(invalid("Mbh", "must be positive"));
        }
        if !(h0 > 0.0 && h0 < alpha_cut * mbh) {
            return Err(invalid("h0", format!("need 0 < h0 < alpha_cut·M, got {h0}")));
        }
        Ok(Self { mbh, h0, alpha_cut })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchwCell {
    pub dx: f64,
    pub dr: f64,
    pub n_cells: f64,
}

/// Cell of height `h` above the horizon: width `√(M h)`, height `h`, `M/h` cells.
pub fn schw_cell(params: &SchwarzschildParams, h: f64) -> Result<SchwCell> {
    if !(h >= params.h0 && h <= params.alpha_cut * params.mbh) {
        return Err(invalid("h", format!("need h0 ≤ h ≤ alpha_cut·M, got {h}")));
    }
    Ok(SchwCell { dx: (params.mbh * h).sqrt(), dr: h, n_cells: params.mbh / h })
}

/// Number of doubling layers between heights `h0` and `h1`.
pub fn schw_layers(h0: f64, h1: f64) -> Result<f64> {
    if !(h0 > 0.0 && h1 >= h0) {
        return Err(invalid("h1", format!("need 0 < h0 ≤ h1, got h0 = {h0}, h1 = {h1}")));
    }
    Ok((h1 / h0).log2())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdsParams {
    pub l: f64,
    pub r_plus: f64,
    pub l_pl: f64,
}

impl AdsParams {
    pub fn new(l: f64, r_plus: f64, l_pl: f64) -> Result<Self> {
        if !(l > 0.0 && l.is_finite()) {
            return Err(invalid("l", "must be positive"));
        }
        if !(r_plus > 0.0 && r_plus < PI.sqrt() * l) {
            return Err(invalid("r_plus", format!("need 0 < r+ < √π l, got {r_plus}")));
        }
        if !(l_pl > 0.0 && l_pl < l) {
            return Err(invalid("l_pl", format!("need 0 < l_pl < l, got {l_pl}")));
        }
        Ok(Self { l, r_plus, l_pl })
    }

    pub fn beta(&self) -> f64 {
        2.0 * PI * self.l * self.l / self.r_plus
    }

    /// Bekenstein–Hawking entropy `r+²/l_pl²`.
    pub fn entropy(&self) -> f64 {
        (self.r_plus / self.l_pl).powi(2)
    }

    /// Radius of the outermost layer, which holds a single cell.
    pub fn r_max(&self) -> f64 {
        let x = self.r_plus / self.l;
        (PI / (PI - x * x)).sqrt() * self.r_plus
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdsCell {
    pub dx: f64,
    pub dr: f64,
    pub n_cells: f64,
    pub t_loc: f64,
    /// `r³/l³`, the per-cell entropy with the black-body constant dropped
    pub ds_cell: f64,
    /// `(4π²/45) Δx³ T_loc³`
    pub ds_blackbody: f64,
}

pub fn ads_cell(params: &AdsParams, r: f64) -> Result<AdsCell> {
    if !(r > params.r_plus) {
        return Err(invalid("r", format!("need r > r+, got {r}")));
    }
    Ok(ads_cell_at_height(params, r - params.r_plus))
}

/// Same as [`ads_cell`] at `r = r+ + h`, keeping precision for `h ≪ r+`.
pub fn ads_cell_at_height(params: &AdsParams, h: f64) -> AdsCell {
    let (l, rp) = (params.l, params.r_plus);
    let r = rp + h;
    let gap = h * (2.0 * rp + h);
    let stretch = gap / (rp * rp);
    let dx = 2.0 * PI * l * stretch.sqrt();
    let t_loc = rp / (2.0 * PI * l * l) * r / gap.sqrt();
    AdsCell {
        dx,
        dr: 2.0 * PI * gap / rp,
        n_cells: r * r / (PI * l * l) / stretch,
        t_loc,
        ds_cell: (r / l).powi(3),
        ds_blackbody: BLACKBODY_PREFACTOR * (dx * t_loc).powi(3),
    }
}

/// Layers of cells between radii `r0 ≤ r`.
pub fn ads_layers(r0: f64, r: f64, params: &AdsParams) -> Result<f64> {
    let rp = params.r_plus;
    if !(r0 > rp && r >= r0) {
        return Err(invalid("r0", format!("need r+ < r0 ≤ r, got r0 = {r0}, r = {r}")));
    }
    Ok(((r - rp) / (r + rp) * (r0 + rp) / (r0 - rp)).ln() / (4.0 * PI))
}

/// [`ads_layers`] from the height `h0 = r0 - r+`, exact for `h0` below the ulp of `r+`.
fn layers_from_height(h0: f64, r: f64, params: &AdsParams) -> f64 {
    let rp = params.r_plus;
    ((r - rp) / (r + rp) * (2.0 * rp + h0) / h0).ln() / (4.0 * PI)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StretchedHorizon {
    /// `(2π/45) l_pl² r+⁴ / l⁵`
    pub closed_form: f64,
    /// root of `N(r+ + h) ΔS(r+ + h) = r+²/l_pl²` with the black-body ΔS
    pub exact: f64,
    pub relative_difference: f64,
}

fn total_cell_entropy(params: &AdsParams, h: f64) -> f64 {
    let cell = ads_cell_at_height(params, h);
    cell.n_cells * cell.ds_blackbody
}

pub fn stretched_horizon(params: &AdsParams) -> Result<StretchedHorizon> {
    let closed_form = 2.0 * PI / 45.0 * params.l_pl.powi(2) * params.r_plus.powi(4) / params.l.powi(5);
    let target = params.entropy().ln();
    let f = |log_h: f64| total_cell_entropy(params, log_h.exp()).ln() - target;
    let lo = (closed_form * 1e-6).ln();
    let hi = (params.r_max() - params.r_plus).min(closed_form * 1e6).ln();
    if f(lo) * f(hi) > 0.0 {
        return Err(LcError::Bracket(format!("no sign change for h in [{:e}, {:e}]", lo.exp(), hi.exp())));
    }
    let exact = brent_root(f, lo, hi, 1e-13)?.exp();
    Ok(StretchedHorizon { closed_form, exact, relative_difference: (exact - closed_form).abs() / closed_form })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScramblingTimes {
    /// `β L(r0, r_max)` with the exact layer count
    pub t_weak: f64,
    /// `β log(l⁵/(l_pl² r+³))`, the layer count with order-one factors dropped
    pub t_weak_scaling: f64,
    /// `(r+²/l_pl²) t_weak`, routing every qubit through the outermost layer
    pub t_outer_strong: f64,
    /// `β r+/l_pl = 2π l²/l_pl`
    pub t_strong: f64,
}

pub fn scrambling_times(params: &AdsParams) -> Result<ScramblingTimes> {
    let sh = stretched_horizon(params)?;
    let beta = params.beta();
    let layers = layers_from_height(sh.exact, params.r_max(), params);
    let t_weak = beta * layers;
    let scaling_layers = (params.l.powi(5) / (params.l_pl.powi(2) * params.r_plus.powi(3))).ln();
    Ok(ScramblingTimes {
        t_weak,
        t_weak_scaling: beta * scaling_layers,
        t_outer_strong: params.entropy() * t_weak,
        t_strong: beta * params.r_plus / params.l_pl,
    })
}

/// One layer of the cell inventory, from the stretched horizon outward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerRow {
    pub layer: usize,
    pub r: f64,
    pub dx: f64,
    pub n_cells: f64,
    pub ds_cell: f64,
    pub t_loc: f64,
}

/// Layer radii where `L(r0, r)` takes integer values, up to `r_max`.
pub fn cell_inventory(params: &AdsParams) -> Result<Vec<LayerRow>> {
    let sh = stretched_horizon(params)?;
    let rp = params.r_plus;
    let x0 = sh.exact / (2.0 * rp + sh.exact);
    let r_max = params.r_max();
    let mut rows = Vec::new();
    for layer in 0.. {
        let x = x0 * (4.0 * PI * layer as f64).exp();
        if x >= 1.0 {
            break;
        }
        let r = rp * (1.0 + x) / (1.0 - x);
        if r > r_max {
            break;
        }
        let c = ads_cell(params, r)?;
        rows.push(LayerRow { layer, r, dx: c.dx, n_cells: c.n_cells, ds_cell: c.ds_cell, t_loc: c.t_loc });
    }
    if rows.last().is_some_and(|row| row.r < r_max) {
        let c = ads_cell(params, r_max)?;
        let layer = layers_from_height(sh.exact, r_max, params).ceil() as usize;
        rows.push(LayerRow { layer, r: r_max, dx: c.dx, n_cells: c.n_cells, ds_cell: c.ds_cell, t_loc: c.t_loc });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn schwarzschild_examples() {
        let m = 100.0;
        let p = SchwarzschildParams::new(m, 1.0 / m, 1.0).unwrap();
        let top = schw_cell(&p, m).unwrap();
        assert_relative_eq!(top.dx, m);
        assert_relative_eq!(top.n_cells, 1.0);
        let bottom = schw_cell(&p, 1.0 / m).unwrap();
        assert_relative_eq!(bottom.n_cells, m * m, max_relative = 1e-12);
        assert_eq!(bottom.dr, 1.0 / m);
        assert!(schw_cell(&p, 2.0 * m).is_err());
    }

    #[test]
    fn schwarzschild_layers() {
        assert_eq!(schw_layers(0.3, 0.3).unwrap(), 0.0);
        assert_relative_eq!(schw_layers(0.3, 0.6).unwrap(), 1.0);
        let m: f64 = 1e3;
        assert_relative_eq!(schw_layers(1.0 / m, m).unwrap(), 2.0 * m.log2(), max_relative = 1e-14);
    }

    #[test]
    fn ads_cell_examples() {
        let p = AdsParams::new(1.0, 1.0, 0.01).unwrap();
        assert_relative_eq!(ads_cell(&p, 1.0 + 1e-3).unwrap().ds_cell, (1.0f64 + 1e-3).powi(3));
        let near = ads_cell(&p, 1.0 + 1e-12).unwrap().n_cells;
        assert!(near > 1e10);
        assert_relative_eq!(p.r_max(), (PI / (PI - 1.0)).sqrt(), max_relative = 1e-15);
        assert!((p.r_max() - 1.2114).abs() < 5e-4);
        let edge = ads_cell(&p, p.r_max()).unwrap();
        assert_relative_eq!(edge.n_cells, 1.0, max_relative = 1e-12);
        let q = AdsParams::new(2.0, 1.5, 0.01).unwrap();
        assert_relative_eq!(ads_cell(&q, 2.0).unwrap().ds_cell, 1.0);
    }

    #[test]
    fn blackbody_entropy_ratio_is_constant() {
        let p = AdsParams::new(1.3, 1.1, 0.01).unwrap();
        for r in [1.2, 1.5, 2.0] {
            let c = ads_cell(&p, r).unwrap();
            assert_relative_eq!(c.ds_blackbody / c.ds_cell, BLACKBODY_PREFACTOR, max_relative = 1e-12);
        }
    }

    #[test]
    fn layer_counts() {
        let p = AdsParams::new(1.0, 1.0, 0.01).unwrap();
        assert_eq!(ads_layers(1.1, 1.1, &p).unwrap(), 0.0);
        assert!(ads_layers(1.1, 1.2, &p).unwrap() < ads_layers(1.1, 1.21, &p).unwrap());
        // the integral ∫ dr/Δr by quadrature
        let quad = crate::numerics::integrate(|r| 1.0 / ads_cell(&p, r).unwrap().dr, 1.05, 1.2, 1e-13);
        assert_relative_eq!(ads_layers(1.05, 1.2, &p).unwrap(), quad, max_relative = 1e-10);
    }

    #[test]
    fn stretched_horizon_value_and_root() {
        let p = AdsParams::new(1.0, 1.0, 0.01).unwrap();
        let sh = stretched_horizon(&p).unwrap();
        assert!((sh.closed_form - 1.396e-5).abs() < 1e-8);
        let resid = total_cell_entropy(&p, sh.exact) / p.entropy() - 1.0;
        assert!(resid.abs() < 1e-8);
        assert!(sh.relative_difference < 1e-3);
    }

    #[test]
    fn stretched_horizon_converges_as_planck_length_shrinks() {
        let diffs: Vec<f64> = [1e-1, 1e-2, 1e-3]
            .iter()
            .map(|&lp| stretched_horizon(&AdsParams::new(1.0, 1.0, lp).unwrap()).unwrap().relative_difference)
            .collect();
        assert!(diffs[0] > diffs[1] && diffs[1] > diffs[2], "{diffs:?}");
        assert!(diffs[2] < 1e-2);
    }

    #[test]
    fn strong_time_exact_form() {
        let p = AdsParams::new(1.7, 1.2, 1e-3).unwrap();
        let t = scrambling_times(&p).unwrap();
        assert_relative_eq!(t.t_strong, 2.0 * PI * 1.7 * 1.7 / 1e-3, max_relative = 1e-14);
    }

    #[test]
    fn inventory_runs_from_horizon_to_single_cell() {
        let p = AdsParams::new(1.0, 1.0, 0.01).unwrap();
        let rows = cell_inventory(&p).unwrap();
        assert!(rows.len() >= 2);
        assert_relative_eq!(rows.last().unwrap().n_cells, 1.0, max_relative = 1e-9);
        assert!(rows.windows(2).all(|w| w[1].r > w[0].r && w[1].n_cells < w[0].n_cells));
        assert!(rows.last().unwrap().r <= p.r_max());
    }

    proptest! {
        #[test]
        fn weak_before_strong_before_outer(ratio in 2.0f64..8.0, rp in 0.5f64..1.5) {
            let l = 1.0;
            let p = AdsParams::new(l, rp, l * 10f64.powf(-ratio)).unwrap();
            let t = scrambling_times(&p).unwrap();
            prop_assert!(t.t_weak < t.t_strong);
            prop_assert!(t.t_strong < t.t_outer_strong);
            prop_assert!(t.t_weak_scaling < t.t_strong);
        }

        #[test]
        fn stretched_horizon_scales_with_planck_area(lp in 1e-5f64..1e-3) {
            let a = stretched_horizon(&AdsParams::new(1.0, 1.0, lp).unwrap()).unwrap();
            let b = stretched_horizon(&AdsParams::new(1.0, 1.0, 2.0 * lp).unwrap()).unwrap();
            prop_assert!((b.closed_form / a.closed_form - 4.0).abs() < 1e-12);
            prop_assert!((b.exact / a.exact - 4.0).abs() < 1e-2);
        }
    }
}
