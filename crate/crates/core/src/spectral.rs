//! Weyl-sequence test functions `u = η(r)ψ(r)` on catalog entries, their
//! Rayleigh defects, the `Q(t,s)` diagnostic and the Cheeger floor.
//!
//! Here `ψ(s) = e^{iβs}/√v_k(s)` with `β = √(λ - (m-1)²k/4)` and `η` is a
//! quintic-smoothstep window equal to 1 on `[t, s]` and vanishing outside
//! `(t-1, S)`.

use crate::catalog::CatalogEntry;
use crate::comparison::ComparisonSolution;
use crate::error::{Error, Result};
use crate::model::{
    sn_log_derivative, sphere_volume_unchecked, spectral_weight_a_unchecked,
    volume_growth_ratio, Grid, SpaceFormParams,
};
use crate::numerics::quad::Quadrature;
use crate::profiles::{build_profile, RadialProfile};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// `sup |P'|` for the quintic smoothstep `P(x) = 6x⁵ - 15x⁴ + 10x³` on `[0, 1]`.
pub const SMOOTHSTEP_D1: f64 = 15.0 / 8.0;
/// `sup |P''|`, attained at `x = (3 - √3)/6`.
pub const SMOOTHSTEP_D2: f64 = 5.773_502_691_896_258;
/// Certified `C₀` with `|η'| + |η''| ≤ C₀` on `[t-1, s]` and `≤ C₀/(S-s)` on `[s, S]`.
pub const CERTIFIED_CUTOFF_CONSTANT: f64 = SMOOTHSTEP_D1 + SMOOTHSTEP_D2;

/// `β = √(λ - (m-1)²k/4)`.
pub fn beta(lambda: f64, p: &SpaceFormParams) -> Result<f64> {
    let floor = p.spectral_floor();
    if !(lambda >= floor) {
        return Err(Error::SpectralFloor { lambda, floor });
    }
    Ok((lambda - floor).sqrt())
}

fn smoothstep(x: f64) -> (f64, f64, f64) {
    let x = x.clamp(0.0, 1.0);
    let x2 = x * x;
    (
        x2 * x * (10.0 + x * (6.0 * x - 15.0)),
        30.0 * x2 * (1.0 - x) * (1.0 - x),
        60.0 * x * (1.0 - x) * (1.0 - 2.0 * x),
    )
}

/// Certified derivative suprema on one ramp.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RampBounds {
    pub d1: f64,
    pub d2: f64,
}

/// C² window: 0 outside `(t-1, S)`, 1 on `[t, s]`, quintic ramps in between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    pub t: f64,
    pub s: f64,
    pub outer: f64,
}

impl Cutoff {
    pub fn new(t: f64, s: f64, outer: f64) -> Result<Self> {
        if !(t.is_finite() && outer.is_finite() && t < s && outer - s >= 1.0) {
            return Err(Error::Config(format!(
                "window needs t < s and S - s >= 1, got t = {t}, s = {s}, S = {outer}"
            )));
        }
        Ok(Cutoff { t, s, outer })
    }

    /// `(η, η', η'')` at `x`.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        if x <= self.t - 1.0 || x >= self.outer {
            (0.0, 0.0, 0.0)
        } else if x < self.t {
            smoothstep(x - (self.t - 1.0))
        } else if x <= self.s {
            (1.0, 0.0, 0.0)
        } else {
            let l = self.outer - self.s;
            let (p, d1, d2) = smoothstep((x - self.s) / l);
            (1.0 - p, -d1 / l, -d2 / (l * l))
        }
    }

    pub fn inner_bounds(&self) -> RampBounds {
        RampBounds { d1: SMOOTHSTEP_D1, d2: SMOOTHSTEP_D2 }
    }

    pub fn outer_bounds(&self) -> RampBounds {
        let l = self.outer - self.s;
        RampBounds { d1: SMOOTHSTEP_D1 / l, d2: SMOOTHSTEP_D2 / (l * l) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub lambda: f64,
    pub t: f64,
    pub s: f64,
    /// The outer window edge `S`.
    pub outer: f64,
    /// Derivative bound constant `C₀` the window must respect.
    pub cutoff_constant: f64,
}

impl ProbeConfig {
    pub fn new(lambda: f64, t: f64, s: f64, outer: f64) -> Self {
        ProbeConfig { lambda, t, s, outer, cutoff_constant: CERTIFIED_CUTOFF_CONSTANT }
    }

    /// Check `λ` against the floor and the window ordering; returns `β`.
    pub fn validate(&self, p: &SpaceFormParams) -> Result<f64> {
        let b = beta(self.lambda, p)?;
        // t - 1 > 1 keeps the window inside {r ≥ 1}
        if !(self.t > 2.0) {
            return Err(Error::Config(format!("window start t = {} must exceed 2", self.t)));
        }
        Cutoff::new(self.t, self.s, self.outer)?;
        if self.cutoff_constant < CERTIFIED_CUTOFF_CONSTANT {
            return Err(Error::Config(format!(
                "cutoff constant {} is below the certified smoothstep bound {CERTIFIED_CUTOFF_CONSTANT}",
                self.cutoff_constant
            )));
        }
        Ok(b)
    }

    pub fn cutoff(&self) -> Cutoff {
        Cutoff { t: self.t, s: self.s, outer: self.outer }
    }
}

/// Windows `t = t0·2^j`, `s = 2t`, with `S = s + √s` for `k = 0` and
/// `S = s + 1` for `k > 0`.
pub fn window_family(lambda: f64, t0: f64, count: usize, p: &SpaceFormParams) -> Vec<ProbeConfig> {
    (0..count)
        .map(|j| {
            let t = t0 * 2f64.powi(j as i32);
            let s = 2.0 * t;
            let outer = if p.k == 0.0 { s + s.sqrt() } else { s + 1.0 };
            ProbeConfig::new(lambda, t, s, outer)
        })
        .collect()
}

/// `ψ'' + ψ' v'/v + λψ - aψ` at `s`, from the closed-form derivatives of `ψ`.
pub fn psi_ode_residual(s: f64, lambda: f64, p: &SpaceFormParams) -> Result<Complex64> {
    let b = beta(lambda, p)?;
    let m1 = p.mf() - 1.0;
    let c = sn_log_derivative(s, p.k);
    let l = m1 * c;
    // (sn'/sn)' = k - (sn'/sn)²
    let dl = m1 * (p.k - c * c);
    let psi = Complex64::from_polar(1.0, b * s) / sphere_volume_unchecked(s, p).sqrt();
    let e = Complex64::new(-0.5 * l, b);
    let d1 = psi * e;
    let d2 = psi * (e * e - 0.5 * dl);
    let a = spectral_weight_a_unchecked(s, p);
    Ok(d2 + d1 * l + psi * (lambda - a))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefectEstimate {
    /// `‖Δu + λu‖₂/‖u‖₂`.
    pub defect: f64,
    pub defect_error: f64,
    /// `‖u‖₂`.
    pub norm_u: f64,
    pub residual_norm: f64,
    pub evaluations: usize,
}

fn max_resolvable_radius(entry: &CatalogEntry, from: f64) -> f64 {
    let ok = |r: f64| -> bool {
        let Some(q) = entry.orbit_of_radius(r) else { return false };
        match entry.orbit(q) {
            Ok(o) => {
                let v = sphere_volume_unchecked(r, &entry.params);
                o.measure.is_finite() && v.is_finite() && v > 0.0 && (o.measure / v).is_finite()
            }
            Err(_) => false,
        }
    };
    if !ok(from) {
        return from;
    }
    let mut lo = from;
    let mut hi = from.max(1.0) * 2.0;
    while ok(hi) {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return f64::INFINITY;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    lo
}

/// Rayleigh defect of `u = η(r)ψ(r)` over the window of `config`.
///
/// The phase `e^{iβr}` has unit modulus, so `Δu + λu = ψ·B` with `B` built
/// from `η, η', η''`, `|∇r|²`, `Δr` and `a(r)`; both norms are integrated
/// over the orbit parameter with breakpoints at the window edges.
pub fn defect(entry: &CatalogEntry, config: &ProbeConfig) -> Result<DefectEstimate> {
    let p = entry.params;
    let b = config.validate(&p)?;
    let cut = config.cutoff();
    let max_outer = max_resolvable_radius(entry, (config.t - 1.0).max(entry.min_radius()));
    if !(config.outer <= max_outer) {
        return Err(Error::WindowTooWide { max_outer });
    }
    let edges = [config.t - 1.0, config.t, config.s, config.outer];
    let mut qs = Vec::with_capacity(4);
    for r in edges {
        if let Some(q) = entry.orbit_of_radius(r.max(entry.min_radius())) {
            qs.push(q);
        } else {
            return Err(Error::Domain(format!("radius {r} is not attained on {}", entry.id)));
        }
    }
    let lambda = config.lambda;
    let m1 = p.mf() - 1.0;
    // integrands carry the factor measure/v_k(r) = |ψ|² dvol/dq
    let pieces = |q: f64| -> (f64, f64) {
        let o = match entry.orbit(q) {
            Ok(o) => o,
            Err(_) => return (f64::NAN, f64::NAN),
        };
        let r = o.point.r;
        let (eta, d1, d2) = cut.eval(r);
        if eta == 0.0 && d1 == 0.0 && d2 == 0.0 {
            return (0.0, 0.0);
        }
        let w = o.measure / sphere_volume_unchecked(r, &p);
        let g2 = o.point.gradr_norm * o.point.gradr_norm;
        let l = m1 * sn_log_derivative(r, p.k);
        let a = spectral_weight_a_unchecked(r, &p);
        let e = Complex64::new(-0.5 * l, b);
        let bb = (e * (2.0 * d1) + d2 + (e * (-l) + (a - lambda)) * eta) * g2
            + (e * eta + d1) * o.point.lap_r
            + lambda * eta;
        (bb.norm_sqr() * w, eta * eta * w)
    };
    let quad = Quadrature { abs_tol: 0.0, rel_tol: 1e-10, max_subdivisions: 4000 };
    let num = quad.integrate_points(|q| pieces(q).0, &qs);
    let den = quad.integrate_points(|q| pieces(q).1, &qs);
    if !(num.value.is_finite() && den.value > 0.0) {
        return Err(Error::Domain(format!(
            "defect quadrature failed on {} for window [{}, {}]",
            entry.id, config.t, config.outer
        )));
    }
    let ratio = num.value / den.value;
    let defect = ratio.sqrt();
    let rel = num.error / num.value.max(f64::MIN_POSITIVE) + den.error / den.value;
    Ok(DefectEstimate {
        defect,
        defect_error: 0.5 * defect * rel,
        norm_u: den.value.sqrt(),
        residual_norm: num.value.sqrt(),
        evaluations: num.evaluations + den.evaluations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QBound {
    pub q_value: f64,
    /// `F(t) = sup_{σ ≥ t-1} (a² + ζ²)`.
    pub f_sup: f64,
    /// `sup_{σ ≥ t-1} (V_k v_k' - v_k²)/v_k²`.
    pub omega: f64,
    /// `ĉ F(t) + ω(t)`.
    pub chi: f64,
    /// Extremal value of `V_k v_k'/v_k²` on `[1, S]`.
    pub c_hat: f64,
    pub c_k: f64,
    pub delta: f64,
    /// Whether `δ/ĉ - χ(t) ≥ c_k` holds at this `t`.
    pub defck_holds: bool,
    /// `∫_t^s J(1+T)`.
    pub mu_inner: f64,
    /// `∫_{t-1}^S JT`.
    pub tilt_integral: f64,
}

// cumulative trapezoid evaluated at an arbitrary x inside the grid
fn cumulative_at(x: &[f64], y: &[f64], cum: &[f64], at: f64) -> f64 {
    let i = x.partition_point(|v| *v <= at).clamp(1, x.len() - 1) - 1;
    let h = x[i + 1] - x[i];
    let f = if h > 0.0 { (at - x[i]) / h } else { 0.0 };
    let ya = y[i] + f * (y[i + 1] - y[i]);
    cum[i] + 0.5 * (at - x[i]) * (y[i] + ya)
}

fn interp(x: &[f64], y: &[f64], at: f64) -> f64 {
    let i = x.partition_point(|v| *v <= at).clamp(1, x.len() - 1) - 1;
    let h = x[i + 1] - x[i];
    let f = if h > 0.0 { ((at - x[i]) / h).clamp(0.0, 1.0) } else { 0.0 };
    y[i] + f * (y[i + 1] - y[i])
}

/// `(ĉ, ω(t))` for the model space.
pub fn growth_constants(t: f64, outer: f64, p: &SpaceFormParams) -> (f64, f64) {
    let n = 2001;
    let sample = |a: f64, b: f64| -> Vec<f64> {
        (0..n)
            .map(|i| volume_growth_ratio(a * (b / a).powf(i as f64 / (n - 1) as f64), p))
            .collect()
    };
    let on_range = sample(1.0, outer.max(1.0 + 1e-9));
    let hi = on_range.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = on_range.iter().cloned().fold(f64::INFINITY, f64::min);
    let c_hat = hi.max(1.0 / lo);
    // the ratio tends to (m-1)/m for k = 0 and to 1 for k > 0
    let asymptote = if p.k == 0.0 { -1.0 / p.mf() } else { 0.0 };
    let tail = sample((t - 1.0).max(1e-9), outer.max(t));
    let omega = tail.iter().map(|v| v - 1.0).fold(asymptote, f64::max);
    (c_hat, omega)
}

/// The bracket of the defect estimate with its absolute constant set to 1.
///
/// `F(t)` is the envelope of `a² + ζ²` over the grid samples at or beyond
/// `t - 1`: `a²` decreases monotonically in `σ`, so its supremum sits at
/// `t - 1`; `ζ` beyond the comparison grid is assumed not to exceed its
/// last sampled envelope.
pub fn q_bound(
    profile: &RadialProfile,
    config: &ProbeConfig,
    delta: f64,
    comparison: Option<&ComparisonSolution>,
) -> Result<QBound> {
    let p = *profile.params();
    config.validate(&p)?;
    if !(delta > 0.0) {
        return Err(Error::Config(format!("delta must be positive, got {delta}")));
    }
    let x = profile.samples();
    let lo = config.t - 1.0;
    let slack = 1e-12 * config.outer;
    if x.len() < 2 || x[0] > lo + slack || x[x.len() - 1] < config.outer - slack {
        return Err(Error::Domain(format!(
            "profile grid [{}, {}] does not cover the window [{lo}, {}]",
            x[0],
            x[x.len() - 1],
            config.outer
        )));
    }
    let a_at = |s: f64| spectral_weight_a_unchecked(s, &p);
    let mut f_sup = a_at(lo).powi(2);
    if let Some(sol) = comparison {
        if sol.k != p.k {
            return Err(Error::Config(format!(
                "comparison solution has k = {}, profile has k = {}",
                sol.k, p.k
            )));
        }
        let gs = sol.grid.samples();
        if gs[gs.len() - 1] < lo {
            return Err(Error::Domain(format!(
                "comparison grid ends at {} before the window start {lo}",
                gs[gs.len() - 1]
            )));
        }
        let z0 = interp(gs, &sol.zeta, lo.max(gs[0]));
        f_sup = f_sup.max(a_at(lo).powi(2) + z0 * z0);
        for (s, z) in gs.iter().zip(&sol.zeta) {
            if *s >= lo {
                f_sup = f_sup.max(a_at(*s).powi(2) + z * z);
            }
        }
    }
    let n = x.len();
    let mass: Vec<f64> = (0..n).map(|i| profile.flux_j[i] * (1.0 + profile.tilt_t[i])).collect();
    let tilt: Vec<f64> = (0..n).map(|i| profile.flux_j[i] * profile.tilt_t[i]).collect();
    let cm = crate::numerics::quad::cumulative_trapezoid(x, &mass);
    let ct = crate::numerics::quad::cumulative_trapezoid(x, &tilt);
    let at = |c: &[f64], y: &[f64], s: f64| cumulative_at(x, y, c, s);
    let mu = |a: f64, b: f64| at(&cm, &mass, b) - at(&cm, &mass, a);
    let mu_inner = mu(config.t, config.s);
    let mu_all = mu(lo, config.outer);
    let mu_outer = mu(config.s, config.outer);
    let mu_ramp = mu(lo, config.t);
    let tilt_integral = if tilt.iter().all(|v| *v == 0.0) {
        0.0
    } else {
        at(&ct, &tilt, config.outer) - at(&ct, &tilt, lo)
    };
    let l = config.outer - config.s;
    let q_value = (f_sup * mu_all + tilt_integral) / mu_inner
        + mu_outer / (l * l * mu_inner)
        + mu_ramp / mu_inner;

    let (c_hat, omega) = growth_constants(config.t, config.outer, &p);
    let chi = c_hat * f_sup + omega;
    let c_k = if p.k == 0.0 { 1.0 / p.mf() + delta / (2.0 * c_hat) } else { delta / (2.0 * c_hat) };
    Ok(QBound {
        q_value,
        f_sup,
        omega,
        chi,
        c_hat,
        c_k,
        delta,
        defck_holds: delta / c_hat - chi >= c_k,
        mu_inner,
        tilt_integral,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub config: ProbeConfig,
    pub defect: f64,
    pub defect_error: f64,
    pub norm_u: f64,
    pub q_value: f64,
    pub f_sup: f64,
    pub omega: f64,
    pub chi: f64,
    pub c_hat: f64,
    pub c_k: f64,
}

/// Grid over `[t-1, S]` with exact hits at `t` and `s` and spacing at most `h`.
pub fn window_grid(config: &ProbeConfig, h: f64) -> Result<Grid> {
    let edges = [config.t - 1.0, config.t, config.s, config.outer];
    let mut samples = vec![edges[0]];
    for w in edges.windows(2) {
        let n = ((w[1] - w[0]) / h).ceil().max(1.0) as usize;
        for i in 1..=n {
            samples.push(if i == n { w[1] } else { w[0] + (w[1] - w[0]) * i as f64 / n as f64 });
        }
    }
    Grid::new(samples)
}

/// Defect and `Q` for one window; the profile for `Q` is built on
/// [`window_grid`] with spacing 1/4.
pub fn probe(
    entry: &CatalogEntry,
    config: &ProbeConfig,
    delta: f64,
    comparison: Option<&ComparisonSolution>,
) -> Result<ProbeResult> {
    let d = defect(entry, config)?;
    let profile = build_profile(entry, &window_grid(config, 0.25)?)?;
    let q = q_bound(&profile, config, delta, comparison)?;
    Ok(ProbeResult {
        config: *config,
        defect: d.defect,
        defect_error: d.defect_error,
        norm_u: d.norm_u,
        q_value: q.q_value,
        f_sup: q.f_sup,
        omega: q.omega,
        chi: q.chi,
        c_hat: q.c_hat,
        c_k: q.c_k,
    })
}

/// [`probe`] over several windows in parallel; results keep the input order.
pub fn probe_family(
    entry: &CatalogEntry,
    configs: &[ProbeConfig],
    delta: f64,
    comparison: Option<&ComparisonSolution>,
) -> Result<Vec<ProbeResult>> {
    configs.par_iter().map(|c| probe(entry, c, delta, comparison)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheegerSample {
    pub s: f64,
    pub lap_r: f64,
    /// `(m-1) sn'/sn (s)`.
    pub comparison: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheegerReport {
    /// `(m-1)√k`, the isoperimetric rate.
    pub rate: f64,
    /// `(m-1)²k/4`.
    pub floor: f64,
    pub samples: Vec<CheegerSample>,
    /// Radii below the entry's minimal radius.
    pub skipped: Vec<f64>,
    pub pass: bool,
}

/// Check `Δr ≥ (m-1) sn'/sn ≥ (m-1)√k` on the level sets `r = s`.
pub fn cheeger_bound(entry: &CatalogEntry, radii: &[f64]) -> CheegerReport {
    let p = entry.params;
    let rate = (p.mf() - 1.0) * p.k.sqrt();
    let tol = 1e-12;
    let mut samples = Vec::new();
    let mut skipped = Vec::new();
    for &s in radii {
        let Some(q) = entry.orbit_of_radius(s) else {
            skipped.push(s);
            continue;
        };
        let Ok(o) = entry.orbit(q) else {
            skipped.push(s);
            continue;
        };
        let comparison = (p.mf() - 1.0) * sn_log_derivative(o.point.r, p.k);
        let pass = o.point.lap_r >= comparison * (1.0 - tol) - tol && comparison >= rate * (1.0 - tol);
        samples.push(CheegerSample { s, lap_r: o.point.lap_r, comparison, pass });
    }
    let pass = samples.iter().all(|c| c.pass);
    CheegerReport { rate, floor: p.spectral_floor(), samples, skipped, pass }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{gauss_legendre, make_entry, CatalogId};
    use crate::comparison::{solve_g, CurvatureProfile};

    fn params(m: usize, n: usize, k: f64) -> SpaceFormParams {
        SpaceFormParams::new(m, n, k).unwrap()
    }

    fn tg(k: f64) -> CatalogEntry {
        make_entry(CatalogId::TotallyGeodesic, params(2, 3, k), 0.0).unwrap()
    }

    #[test]
    fn beta_values() {
        assert_eq!(beta(0.25, &params(2, 3, 1.0)).unwrap(), 0.0);
        assert_eq!(beta(1.0, &params(2, 3, 0.0)).unwrap(), 1.0);
        assert!((beta(2.0, &params(3, 4, 1.0)).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(beta(0.2, &params(2, 3, 1.0)), Err(Error::SpectralFloor { .. })));
    }

    #[test]
    fn cutoff_shape_and_bounds() {
        let c = Cutoff::new(10.0, 20.0, 29.0).unwrap();
        assert_eq!(c.eval(9.0).0, 0.0);
        assert!((c.eval(9.5).0 - 0.5).abs() < 1e-15);
        assert_eq!(c.eval(10.0).0, 1.0);
        assert_eq!(c.eval(29.0).0, 0.0);
        // second derivative vanishes at both ends of each ramp
        assert!(c.eval(10.0 - 1e-9).2.abs() < 1e-6);
        assert!(c.eval(20.0 + 1e-9).2.abs() < 1e-6);
        let ob = c.outer_bounds();
        assert!((ob.d1 - SMOOTHSTEP_D1 / 9.0).abs() < 1e-15);
        // sampled suprema stay under the certified ones
        let (mut s1, mut s2) = (0.0f64, 0.0f64);
        for i in 0..=90_000 {
            let x = 20.0 + 9.0 * i as f64 / 90_000.0;
            let (_, d1, d2) = c.eval(x);
            s1 = s1.max(d1.abs());
            s2 = s2.max(d2.abs());
        }
        assert!(s1 <= ob.d1 && s1 > 0.999 * ob.d1);
        assert!(s2 <= ob.d2 * (1.0 + 1e-12) && s2 > 0.999 * ob.d2);
        assert!(ob.d1 + ob.d2 <= CERTIFIED_CUTOFF_CONSTANT / 9.0);
    }

    #[test]
    fn psi_solves_its_ode() {
        for (m, k) in [(2, 0.0), (2, 1.0), (3, 1.0), (5, 0.5)] {
            let p = params(m, m + 1, k);
            let lam = p.spectral_floor() + 0.7;
            for s in [1.0, 3.0, 10.0, 40.0] {
                let r = psi_ode_residual(s, lam, &p).unwrap();
                let scale = 1.0 / sphere_volume_unchecked(s, &p).sqrt();
                assert!(r.norm() <= 1e-12 * scale, "m={m} k={k} s={s}: {}", r.norm() / scale);
            }
        }
    }

    // independent 1-D oracle for the flat totally geodesic plane:
    // |B|² = (η'' + aη)² + 4β²η'², weight dr
    fn flat_oracle(cfg: &ProbeConfig) -> f64 {
        let cut = cfg.cutoff();
        let (x, w) = gauss_legendre(40);
        let b2 = cfg.lambda;
        let mut num = 0.0;
        let mut den = 0.0;
        let edges = [cfg.t - 1.0, cfg.t, cfg.s, cfg.outer];
        for e in edges.windows(2) {
            let pieces = 64;
            for j in 0..pieces {
                let a = e[0] + (e[1] - e[0]) * j as f64 / pieces as f64;
                let b = e[0] + (e[1] - e[0]) * (j + 1) as f64 / pieces as f64;
                for (xi, wi) in x.iter().zip(&w) {
                    let r = 0.5 * (a + b) + 0.5 * (b - a) * xi;
                    let (eta, d1, d2) = cut.eval(r);
                    let av = 1.0 / (4.0 * r * r);
                    num += 0.5 * (b - a) * wi * ((d2 + av * eta).powi(2) + 4.0 * b2 * d1 * d1);
                    den += 0.5 * (b - a) * wi * eta * eta;
                }
            }
        }
        (num / den).sqrt()
    }

    #[test]
    fn flat_defect_matches_oracle() {
        let p = params(2, 3, 0.0);
        for cfg in window_family(1.0, 10.0, 3, &p) {
            let d = defect(&tg(0.0), &cfg).unwrap();
            let o = flat_oracle(&cfg);
            assert!((d.defect - o).abs() <= 1e-8 * o, "{} vs {o}", d.defect);
        }
    }

    #[test]
    fn defects_decrease_over_family() {
        for (k, lam) in [(0.0, 1.0), (1.0, 0.5), (1.0, 0.25)] {
            let e = tg(k);
            let fam = window_family(lam, 10.0, 4, &e.params);
            let ds: Vec<f64> = fam.iter().map(|c| defect(&e, c).unwrap().defect).collect();
            assert!(ds.windows(2).all(|w| w[1] < w[0]), "k={k} λ={lam}: {ds:?}");
            assert!(ds.iter().all(|d| d.is_finite()));
        }
    }

    #[test]
    fn catenoid_defect_is_finite() {
        let e = make_entry(CatalogId::EuclideanCatenoid, params(2, 3, 0.0), 0.0).unwrap();
        let fam = window_family(1.0, 10.0, 2, &e.params);
        let ds: Vec<f64> = fam.iter().map(|c| defect(&e, c).unwrap().defect).collect();
        assert!(ds[1] < ds[0]);
    }

    #[test]
    fn window_past_chart_is_reported() {
        let e = tg(1.0);
        let cfg = ProbeConfig::new(0.5, 10.0, 20.0, 5000.0);
        match defect(&e, &cfg) {
            Err(Error::WindowTooWide { max_outer }) => assert!(max_outer > 100.0 && max_outer < 5000.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn invalid_windows_rejected() {
        let p = params(2, 3, 0.0);
        assert!(ProbeConfig::new(1.0, 10.0, 9.0, 12.0).validate(&p).is_err());
        assert!(ProbeConfig::new(1.0, 10.0, 20.0, 20.5).validate(&p).is_err());
        assert!(ProbeConfig::new(1.0, 1.5, 20.0, 25.0).validate(&p).is_err());
        let mut c = ProbeConfig::new(1.0, 10.0, 20.0, 25.0);
        c.cutoff_constant = 1.0;
        assert!(c.validate(&p).is_err());
    }

    #[test]
    fn q_flat_closed_form() {
        let e = tg(0.0);
        let cfg = ProbeConfig::new(1.0, 20.0, 40.0, 46.3);
        let prof = build_profile(&e, &window_grid(&cfg, 0.25).unwrap()).unwrap();
        let q = q_bound(&prof, &cfg, 0.1, None).unwrap();
        let f = (1.0 / (4.0 * 361.0f64)).powi(2);
        assert!((q.f_sup - f).abs() <= 1e-15 * f);
        assert_eq!(q.tilt_integral, 0.0);
        let l = 6.3;
        let expect = f * 27.3 / 20.0 + l / (l * l * 20.0) + 1.0 / 20.0;
        assert!((q.q_value - expect).abs() < 1e-12, "{} vs {expect}", q.q_value);
        assert!((q.c_hat - 2.0).abs() < 1e-12);
        assert!((q.omega + 0.5).abs() < 1e-12);
        assert!((q.c_k - (0.5 + 0.1 / 4.0)).abs() < 1e-12);
    }

    #[test]
    fn q_decreases_over_family() {
        for k in [0.0, 1.0] {
            let e = tg(k);
            let fam = window_family(0.5 + 0.25 * k, 10.0, 4, &e.params);
            let res = probe_family(&e, &fam, 0.1, None).unwrap();
            assert!(res.windows(2).all(|w| w[1].q_value < w[0].q_value));
            assert!(res.windows(2).all(|w| w[1].config.t > w[0].config.t));
        }
    }

    #[test]
    fn q_uses_zeta_envelope() {
        let e = tg(1.0);
        let cfg = ProbeConfig::new(0.5, 10.0, 20.0, 21.0);
        let prof = build_profile(&e, &window_grid(&cfg, 0.25).unwrap()).unwrap();
        let grid = Grid::linspace(0.1, 30.0, 300).unwrap();
        let sol = solve_g(&CurvatureProfile::exp_tail(1.0, 1.0, 1.0).unwrap(), &grid).unwrap();
        let with = q_bound(&prof, &cfg, 0.1, Some(&sol)).unwrap();
        let without = q_bound(&prof, &cfg, 0.1, None).unwrap();
        assert!(with.f_sup > without.f_sup);
        assert!(with.q_value > without.q_value);
        let short = Grid::linspace(0.1, 5.0, 50).unwrap();
        let sol = solve_g(&CurvatureProfile::constant(1.0), &short).unwrap();
        assert!(q_bound(&prof, &cfg, 0.1, Some(&sol)).is_err());
    }

    #[test]
    fn q_requires_covering_grid() {
        let e = tg(0.0);
        let cfg = ProbeConfig::new(1.0, 20.0, 40.0, 46.3);
        let prof = build_profile(&e, &Grid::linspace(19.0, 40.0, 50).unwrap()).unwrap();
        assert!(matches!(q_bound(&prof, &cfg, 0.1, None), Err(Error::Domain(_))));
    }

    #[test]
    fn cheeger_floors() {
        let radii = [0.5, 1.0, 2.0, 5.0, 20.0];
        let h = cheeger_bound(&tg(1.0), &radii);
        assert_eq!(h.floor, 0.25);
        assert!(h.pass);
        for c in &h.samples {
            assert!((c.lap_r - 1.0 / c.s.tanh()).abs() < 1e-12);
        }
        let flat = cheeger_bound(&tg(0.0), &radii);
        assert_eq!(flat.floor, 0.0);
        let cone = make_entry(CatalogId::EuclideanConeClifford, params(3, 4, 0.0), 0.0).unwrap();
        let c = cheeger_bound(&cone, &radii);
        assert!(c.pass);
        assert!(c.samples.iter().all(|x| (x.lap_r - 2.0 / x.s).abs() < 1e-12));
        let cat = make_entry(CatalogId::EuclideanCatenoid, params(2, 3, 0.0), 0.0).unwrap();
        let c = cheeger_bound(&cat, &radii);
        assert_eq!(c.skipped, vec![0.5]);
        assert!(c.pass);
    }
}
