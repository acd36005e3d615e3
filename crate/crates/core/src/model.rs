//! Model-space functions of the space form of curvature `-k <= 0`.
//!
//! Everything here is a pure function of `(s, m, k)`. `sn` is the warping
//! function of the model metric `dρ² + sn(ρ)² dθ²`, `v`/`V` are the volumes
//! of geodesic spheres and balls of the `m`-dimensional model, and the
//! remaining helpers are the comparison functions built from them.

use crate::error::{domain, Error, Result};
use crate::numerics::Quadrature;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Below this value of `√k·s` closed forms switch to their Taylor series.
const SERIES_CUTOFF: f64 = 1e-4;

/// Dimensions and curvature of the comparison space form `N^n_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceFormParams {
    /// Intrinsic dimension of the submanifold.
    pub m: usize,
    /// Ambient dimension.
    pub n: usize,
    /// The ambient sectional curvature is `-k`.
    pub k: f64,
}

impl SpaceFormParams {
    pub fn new(m: usize, n: usize, k: f64) -> Result<Self> {
        if m < 2 {
            return Err(Error::Config(format!("intrinsic dimension m = {m} must be >= 2")));
        }
        if n <= m {
            return Err(Error::Config(format!("ambient dimension n = {n} must exceed m = {m}")));
        }
        if !(k >= 0.0) || !k.is_finite() {
            return Err(Error::Config(format!("curvature parameter k = {k} must be finite and >= 0")));
        }
        Ok(SpaceFormParams { m, n, k })
    }

    pub fn mf(&self) -> f64 {
        self.m as f64
    }

    /// Bottom of the spectrum of the `m`-dimensional model, `(m-1)^2 k / 4`.
    pub fn spectral_floor(&self) -> f64 {
        let d = self.mf() - 1.0;
        d * d * self.k / 4.0
    }
}

/// Strictly increasing sequence of positive samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Grid {
    samples: Vec<f64>,
}

impl TryFrom<Vec<f64>> for Grid {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Grid::new(v)
    }
}

impl From<Grid> for Vec<f64> {
    fn from(g: Grid) -> Self {
        g.samples
    }
}

impl Grid {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return domain("grid must contain at least one sample");
        }
        if let Some(bad) = samples.iter().find(|s| !(**s > 0.0) || !s.is_finite()) {
            return domain(format!("grid sample {bad} is not a positive finite number"));
        }
        if let Some(w) = samples.windows(2).find(|w| w[1] <= w[0]) {
            return domain(format!(
                "grid is not strictly increasing ({} followed by {})",
                w[0], w[1]
            ));
        }
        Ok(Grid { samples })
    }

    /// `count` evenly spaced samples on `[start, end]`.
    pub fn linspace(start: f64, end: f64, count: usize) -> Result<Self> {
        match count {
            0 => domain("grid needs at least one sample"),
            1 => Grid::new(vec![start]),
            _ => {
                let h = (end - start) / (count - 1) as f64;
                let mut v: Vec<f64> = (0..count).map(|i| start + h * i as f64).collect();
                v[count - 1] = end;
                Grid::new(v)
            }
        }
    }

    /// `count` geometrically spaced samples on `[start, end]`.
    pub fn geomspace(start: f64, end: f64, count: usize) -> Result<Self> {
        if !(start > 0.0) {
            return domain("geometric grid needs a positive start");
        }
        match count {
            0 => domain("grid needs at least one sample"),
            1 => Grid::new(vec![start]),
            _ => {
                let ratio = (end / start).ln() / (count - 1) as f64;
                let mut v: Vec<f64> = (0..count)
                    .map(|i| start * (ratio * i as f64).exp())
                    .collect();
                v[0] = start;
                v[count - 1] = end;
                Grid::new(v)
            }
        }
    }

    /// Parse `start:end:count` (linear spacing).
    pub fn parse_spec(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!(
                "grid spec '{spec}' must look like start:end:count"
            )));
        }
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number '{s}' in grid spec")))
        };
        let count = parts[2]
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::Parse(format!("bad count '{}' in grid spec", parts[2])))?;
        Grid::linspace(num(parts[0])?, num(parts[1])?, count)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.samples[0]
    }

    pub fn last(&self) -> f64 {
        self.samples[self.samples.len() - 1]
    }
}

fn check_k(k: f64) -> Result<()> {
    if !(k >= 0.0) || !k.is_finite() {
        return domain(format!("curvature parameter k = {k} must be >= 0"));
    }
    Ok(())
}

fn check_positive(s: f64) -> Result<()> {
    if !(s > 0.0) || !s.is_finite() {
        return domain(format!("radius s = {s} must be positive"));
    }
    Ok(())
}

/// `sn_k(t)`: `t` for `k = 0`, `sinh(√k t)/√k` otherwise.
pub fn sn(t: f64, k: f64) -> Result<f64> {
    check_k(k)?;
    if !(t >= 0.0) {
        return domain(format!("sn is defined for t >= 0, got {t}"));
    }
    Ok(sn_unchecked(t, k))
}

pub(crate) fn sn_unchecked(t: f64, k: f64) -> f64 {
    if k == 0.0 {
        t
    } else {
        let rk = k.sqrt();
        (rk * t).sinh() / rk
    }
}

/// `sn_k'(t)`: `1` for `k = 0`, `cosh(√k t)` otherwise.
pub fn sn_prime(t: f64, k: f64) -> Result<f64> {
    check_k(k)?;
    if !(t >= 0.0) {
        return domain(format!("sn' is defined for t >= 0, got {t}"));
    }
    Ok(sn_prime_unchecked(t, k))
}

pub(crate) fn sn_prime_unchecked(t: f64, k: f64) -> f64 {
    if k == 0.0 {
        1.0
    } else {
        (k.sqrt() * t).cosh()
    }
}

/// `sn_k'/sn_k`, the mean curvature of the model geodesic sphere divided by `m-1`.
pub fn sn_log_derivative(t: f64, k: f64) -> f64 {
    if k == 0.0 {
        1.0 / t
    } else {
        let rk = k.sqrt();
        rk / (rk * t).tanh()
    }
}

/// `sn_k(a)/sn_k(b)` without overflow for large arguments.
pub fn sn_ratio(a: f64, b: f64, k: f64) -> f64 {
    if k == 0.0 {
        return a / b;
    }
    let rk = k.sqrt();
    let (x, y) = (rk * a, rk * b);
    if y < 20.0 {
        x.sinh() / y.sinh()
    } else {
        // sinh(x)/sinh(y) = e^{x-y} (1 - e^{-2x}) / (1 - e^{-2y})
        (x - y).exp() * (-(-2.0 * x).exp_m1()) / (-(-2.0 * y).exp_m1())
    }
}

/// Volume of the unit sphere `S^{d}` embedded in `R^{d+1}`: `2π^{(d+1)/2}/Γ((d+1)/2)`.
pub fn unit_sphere_volume(d: usize) -> f64 {
    let h = (d as f64 + 1.0) / 2.0;
    2.0 * PI.powf(h) / statrs::function::gamma::gamma(h)
}

/// `v_k(s) = ω_{m-1} sn_k(s)^{m-1}`, the volume of the model geodesic sphere.
pub fn sphere_volume(s: f64, p: &SpaceFormParams) -> Result<f64> {
    check_positive(s)?;
    Ok(sphere_volume_unchecked(s, p))
}

pub(crate) fn sphere_volume_unchecked(s: f64, p: &SpaceFormParams) -> f64 {
    unit_sphere_volume(p.m - 1) * sn_unchecked(s, p.k).powi(p.m as i32 - 1)
}

/// `v_k'/v_k = (m-1) sn'/sn`.
pub fn sphere_log_derivative(s: f64, p: &SpaceFormParams) -> f64 {
    (p.mf() - 1.0) * sn_log_derivative(s, p.k)
}

/// `v_k''/v_k = (m-1)[(m-2)(sn'/sn)^2 + k]`.
pub fn sphere_second_log_ratio(s: f64, p: &SpaceFormParams) -> f64 {
    let c = sn_log_derivative(s, p.k);
    (p.mf() - 1.0) * ((p.mf() - 2.0) * c * c + p.k)
}

// sinh(y) - y without cancellation.
fn sinh_minus_id(y: f64) -> f64 {
    if y.abs() < 1.0 {
        let y2 = y * y;
        let mut term = y * y2 / 6.0;
        let mut sum = term;
        let mut j = 3.0;
        while term.abs() > 1e-18 * sum.abs() {
            term *= y2 / ((j + 1.0) * (j + 2.0));
            sum += term;
            j += 2.0;
        }
        sum
    } else {
        y.sinh() - y
    }
}

// ∫_0^x sinh^p(u) du for p in {1, 2, 3}.
fn sinh_power_integral(p: usize, x: f64) -> f64 {
    let half = (0.5 * x).sinh();
    match p {
        1 => 2.0 * half * half,
        2 => sinh_minus_id(2.0 * x) / 4.0,
        3 => {
            let cm1 = 2.0 * half * half;
            cm1 * cm1 * (cm1 + 3.0) / 3.0
        }
        _ => unreachable!("closed form only for p <= 3"),
    }
}

/// `V_k(s) = ∫_0^s v_k`, the volume of the model geodesic ball.
///
/// Closed forms for `k = 0` and for `m <= 4`; for larger `m` the ratio
/// `V_k/v_k = ∫_0^s (sn(σ)/sn(s))^{m-1} dσ` is integrated with adaptive
/// Gauss–Kronrod at relative tolerance `1e-13`.
pub fn ball_volume(s: f64, p: &SpaceFormParams) -> Result<f64> {
    check_positive(s)?;
    Ok(ball_volume_unchecked(s, p))
}

pub(crate) fn ball_volume_unchecked(s: f64, p: &SpaceFormParams) -> f64 {
    let omega = unit_sphere_volume(p.m - 1);
    let mf = p.mf();
    if p.k == 0.0 {
        return omega * s.powi(p.m as i32) / mf;
    }
    let x = p.k.sqrt() * s;
    if x < SERIES_CUTOFF {
        return omega * s.powi(p.m as i32) / mf * (1.0 + mf * (mf - 1.0) * x * x / (6.0 * (mf + 2.0)));
    }
    if p.m <= 4 {
        omega * sinh_power_integral(p.m - 1, x) / p.k.powf(mf / 2.0)
    } else {
        ball_sphere_ratio_unchecked(s, p) * sphere_volume_unchecked(s, p)
    }
}

/// `V_k(s)/v_k(s)`, computed without forming either factor when that could overflow.
pub fn ball_sphere_ratio(s: f64, p: &SpaceFormParams) -> Result<f64> {
    check_positive(s)?;
    Ok(ball_sphere_ratio_unchecked(s, p))
}

pub(crate) fn ball_sphere_ratio_unchecked(s: f64, p: &SpaceFormParams) -> f64 {
    let mf = p.mf();
    if p.k == 0.0 {
        return s / mf;
    }
    let x = p.k.sqrt() * s;
    if x < SERIES_CUTOFF {
        return s / mf * (1.0 - (mf - 1.0) * x * x / (3.0 * (mf + 2.0)));
    }
    if p.m <= 4 && x < 300.0 {
        let omega = unit_sphere_volume(p.m - 1);
        return ball_volume_unchecked(s, p) / (omega * sn_unchecked(s, p.k).powi(p.m as i32 - 1));
    }
    let e = p.m as i32 - 1;
    let quad = Quadrature {
        abs_tol: 0.0,
        rel_tol: 1e-13,
        max_subdivisions: 4000,
    };
    quad.integrate(|sigma| sn_ratio(sigma, s, p.k).powi(e), 0.0, s)
        .value
}

/// `f(s) = ∫_0^s V_k/v_k`, the radial solution of `f'' + (m-1)(sn'/sn) f' = 1`.
pub fn comparison_f(s: f64, p: &SpaceFormParams) -> Result<f64> {
    check_positive(s)?;
    if p.k == 0.0 {
        return Ok(s * s / (2.0 * p.mf()));
    }
    let quad = Quadrature::with_rel_tol(1e-12);
    Ok(quad
        .integrate(
            |sigma| {
                if sigma <= 0.0 {
                    0.0
                } else {
                    ball_sphere_ratio_unchecked(sigma, p)
                }
            },
            0.0,
            s,
        )
        .value)
}

/// `z(s) = (m/(m-1)) V_k v_k'/v_k^2 - 1`, non-negative and non-decreasing.
pub fn comparison_z(s: f64, p: &SpaceFormParams) -> Result<f64> {
    check_positive(s)?;
    Ok(comparison_z_unchecked(s, p))
}

pub(crate) fn comparison_z_unchecked(s: f64, p: &SpaceFormParams) -> f64 {
    if p.k == 0.0 {
        return 0.0;
    }
    let x = p.k.sqrt() * s;
    if x < SERIES_CUTOFF {
        return x * x / (p.mf() + 2.0);
    }
    p.mf() * ball_sphere_ratio_unchecked(s, p) * sn_log_derivative(s, p.k) - 1.0
}

/// `V_k v_k'/v_k^2`, the quantity bounded above and below by `ĉ` on `[1, ∞)`.
pub fn volume_growth_ratio(s: f64, p: &SpaceFormParams) -> f64 {
    ball_sphere_ratio_unchecked(s, p) * sphere_log_derivative(s, p)
}

/// `a(s) = (m-1)^2 k/4 + (v'/v)^2/4 - (v''/v)/2`.
///
/// Since `sn'^2 - k sn^2 = 1` this collapses to `-(m-1)(m-3)/(4 sn_k(s)^2)`,
/// which is evaluated directly.
pub fn spectral_weight_a(s: f64, p: &SpaceFormParams) -> Result<f64> {
    check_positive(s)?;
    Ok(spectral_weight_a_unchecked(s, p))
}

pub(crate) fn spectral_weight_a_unchecked(s: f64, p: &SpaceFormParams) -> f64 {
    let mf = p.mf();
    let sn = sn_unchecked(s, p.k);
    (mf - 1.0) * (3.0 - mf) / (4.0 * sn * sn)
}

/// Outcome of [`check_ratio_monotone`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub samples: Vec<f64>,
    pub ratio: Vec<f64>,
    pub differences: Vec<f64>,
    pub worst_difference: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Check that `V_k/v_k` is non-decreasing over `grid`.
pub fn check_ratio_monotone(grid: &Grid, p: &SpaceFormParams) -> RatioReport {
    let samples = grid.samples().to_vec();
    let ratio: Vec<f64> = samples
        .iter()
        .map(|&s| ball_sphere_ratio_unchecked(s, p))
        .collect();
    let differences: Vec<f64> = ratio.windows(2).map(|w| w[1] - w[0]).collect();
    let scale = ratio.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let tolerance = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let worst_difference = differences.iter().cloned().fold(f64::INFINITY, f64::min);
    let pass = differences.iter().all(|d| *d >= -tolerance);
    RatioReport {
        samples,
        ratio,
        differences,
        worst_difference: if worst_difference.is_finite() { worst_difference } else { 0.0 },
        tolerance,
        pass,
    }
}
