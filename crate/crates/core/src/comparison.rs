//! The radial comparison ODE `g'' = G g`, `g(0) = 0`, `g'(0) = 1`, and the
//! pinching calculus built on `ζ = g'/g - sn'/sn`.

use crate::error::{Error, Result};
use crate::model::{sn_log_derivative, sn_unchecked, Grid};
use crate::numerics::{DormandPrince, OdeSettings, Quadrature};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;

/// Shape of the curvature bound `G(s)` above its asymptotic value `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum ProfileForm {
    /// `G ≡ k + c`.
    Constant { c: f64 },
    /// `G(s) = k + c (1+s)^{-p}`.
    PowerTail { c: f64, p: f64 },
    /// `G(s) = k + c e^{-a s}`.
    ExpTail { c: f64, a: f64 },
    /// Piecewise linear through `(s_i, G_i)`, held constant outside the table.
    Tabulated { s: Vec<f64>, values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureProfile {
    pub k: f64,
    pub form: ProfileForm,
}

impl CurvatureProfile {
    pub fn new(k: f64, form: ProfileForm) -> Result<Self> {
        if !(k >= 0.0) || !k.is_finite() {
            return Err(Error::Config(format!("k = {k} must be finite and >= 0")));
        }
        let bad = |what: &str| Err(Error::Config(what.to_string()));
        match &form {
            ProfileForm::Constant { c } if !(*c >= 0.0) => return bad("constant excess c must be >= 0"),
            ProfileForm::PowerTail { c, p } => {
                if !(*c >= 0.0) {
                    return bad("power_tail needs c >= 0");
                }
                if !(*p > 0.0) {
                    return bad("power_tail needs p > 0");
                }
            }
            ProfileForm::ExpTail { c, a } => {
                if !(*c >= 0.0) {
                    return bad("exp_tail needs c >= 0");
                }
                if !(*a > 0.0) {
                    return bad("exp_tail needs a > 0");
                }
            }
            ProfileForm::Tabulated { s, values } => {
                if s.len() != values.len() || s.len() < 2 {
                    return bad("tabulated profile needs at least two (s, G) pairs");
                }
                if s[0] < 0.0 || s.windows(2).any(|w| w[1] <= w[0]) {
                    return bad("tabulated abscissae must be non-negative and strictly increasing");
                }
                let slack = 1e-12 * k.max(1.0);
                if let Some((si, gi)) = s.iter().zip(values).find(|(_, g)| !(**g >= k - slack)) {
                    return Err(Error::Config(format!(
                        "tabulated G({si}) = {gi} lies below k = {k}"
                    )));
                }
            }
            _ => {}
        }
        Ok(CurvatureProfile { k, form })
    }

    pub fn constant(k: f64) -> Self {
        CurvatureProfile { k, form: ProfileForm::Constant { c: 0.0 } }
    }

    pub fn power_tail(k: f64, c: f64, p: f64) -> Result<Self> {
        Self::new(k, ProfileForm::PowerTail { c, p })
    }

    pub fn exp_tail(k: f64, c: f64, a: f64) -> Result<Self> {
        Self::new(k, ProfileForm::ExpTail { c, a })
    }

    /// Parse a two-column `s G(s)` table. Blank lines and `#` comments are skipped.
    pub fn parse_table(text: &str, k: f64) -> Result<Self> {
        let mut s = Vec::new();
        let mut values = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .collect();
            if cols.len() != 2 {
                return Err(Error::Parse(format!(
                    "line {}: expected two columns, found {}",
                    lineno + 1,
                    cols.len()
                )));
            }
            let num = |t: &str| {
                t.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("line {}: bad number '{t}'", lineno + 1)))
            };
            s.push(num(cols[0])?);
            values.push(num(cols[1])?);
        }
        Self::new(k, ProfileForm::Tabulated { s, values })
    }

    pub fn from_table_file(path: &Path, k: f64) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_table(&text, k)
    }

    /// `G(s)`.
    pub fn eval(&self, s: f64) -> f64 {
        self.k + self.excess(s)
    }

    /// `G(s) - k`.
    pub fn excess(&self, s: f64) -> f64 {
        match &self.form {
            ProfileForm::Constant { c } => *c,
            ProfileForm::PowerTail { c, p } => c * (1.0 + s).powf(-p),
            ProfileForm::ExpTail { c, a } => c * (-a * s).exp(),
            ProfileForm::Tabulated { s: xs, values } => interpolate(xs, values, s) - self.k,
        }
    }
}

impl fmt::Display for CurvatureProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.form {
            ProfileForm::Constant { c } => write!(f, "constant(k={}, c={c})", self.k),
            ProfileForm::PowerTail { c, p } => write!(f, "power_tail(k={}, c={c}, p={p})", self.k),
            ProfileForm::ExpTail { c, a } => write!(f, "exp_tail(k={}, c={c}, a={a})", self.k),
            ProfileForm::Tabulated { s, .. } => {
                write!(f, "tabulated(k={}, {} samples)", self.k, s.len())
            }
        }
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    let last = xs.len() - 1;
    if x >= xs[last] {
        return ys[last];
    }
    let i = xs.partition_point(|v| *v <= x) - 1;
    let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] + t * (ys[i + 1] - ys[i])
}

/// Solver controls. The singular start at `s = 0` is replaced by a series launch at `launch`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub launch: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { rel_tol: 1e-10, abs_tol: 1e-14, launch: 1e-3 }
    }
}

/// Sampled solution of the comparison ODE.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSolution {
    pub grid: Grid,
    pub k: f64,
    pub g: Vec<f64>,
    pub g_prime: Vec<f64>,
    pub zeta: Vec<f64>,
    /// `g/sn_k`, which equals `exp ∫_0^s ζ`.
    pub g_over_sn: Vec<f64>,
}

impl ComparisonSolution {
    /// `∫_0^s ζ` at each sample, i.e. `log(g/sn_k)`.
    pub fn zeta_integral(&self) -> Vec<f64> {
        self.g_over_sn.iter().map(|h| h.ln()).collect()
    }
}

// Leading Taylor data of G at 0: G(0) and a one-sided slope.
fn taylor_at_zero(profile: &CurvatureProfile) -> (f64, f64) {
    let g0 = profile.eval(0.0);
    let d = 1e-6;
    (g0, (profile.eval(d) - g0) / d)
}

fn settings(opts: &SolveOptions) -> OdeSettings {
    OdeSettings {
        rel_tol: opts.rel_tol,
        abs_tol: opts.abs_tol,
        initial_step: opts.launch * 0.1,
        ..OdeSettings::default()
    }
}

/// Solve `g'' = G g` on `grid`.
///
/// The state actually integrated is `h = g/sn_k`, which satisfies
/// `h'' + 2 (sn'/sn) h' = (G - k) h`, `h(0) = 1`, `h'(0) = 0`. Then
/// `ζ = h'/h` exactly, so ζ keeps full relative accuracy even when it is
/// many orders of magnitude below `g'/g`.
pub fn solve_g(profile: &CurvatureProfile, grid: &Grid) -> Result<ComparisonSolution> {
    solve_g_with(profile, grid, &SolveOptions::default())
}

pub fn solve_g_with(
    profile: &CurvatureProfile,
    grid: &Grid,
    opts: &SolveOptions,
) -> Result<ComparisonSolution> {
    let k = profile.k;
    let (g0, g1) = taylor_at_zero(profile);
    let series = |s: f64| -> [f64; 2] {
        let e = g0 - k;
        [1.0 + e * s * s / 6.0 + g1 * s * s * s / 12.0, e * s / 3.0 + g1 * s * s / 4.0]
    };
    let s0 = opts.launch.min(grid.first());
    let rhs = |s: f64, y: &[f64; 2]| -> [f64; 2] {
        [y[1], profile.excess(s) * y[0] - 2.0 * sn_log_derivative(s, k) * y[1]]
    };
    let targets: Vec<f64> = grid.samples().to_vec();
    let states = DormandPrince::new(settings(opts)).solve(rhs, s0, series(s0), &targets)?;

    let n = grid.len();
    let mut sol = ComparisonSolution {
        grid: grid.clone(),
        k,
        g: Vec::with_capacity(n),
        g_prime: Vec::with_capacity(n),
        zeta: Vec::with_capacity(n),
        g_over_sn: Vec::with_capacity(n),
    };
    for (&s, y) in targets.iter().zip(&states) {
        let (h, hp) = (y[0], y[1]);
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::IntegrationFailure {
                last_s: s,
                reason: format!("g/sn left the positive reals ({h})"),
            });
        }
        let sn = sn_unchecked(s, k);
        let snp = crate::model::sn_prime_unchecked(s, k);
        sol.g.push(sn * h);
        sol.g_prime.push(snp * h + sn * hp);
        sol.zeta.push(hp / h);
        sol.g_over_sn.push(h);
    }
    Ok(sol)
}

/// Solve `g'' = G g` as the raw first-order system `(g, g')` and take
/// `ζ = g'/g - sn'/sn`. Kept as a cross-check of [`solve_g`]; ζ here carries
/// absolute rounding error of order `1e-16 · g'/g`.
pub fn solve_g_direct(profile: &CurvatureProfile, grid: &Grid) -> Result<ComparisonSolution> {
    let opts = SolveOptions::default();
    let k = profile.k;
    let (g0, g1) = taylor_at_zero(profile);
    let s0 = opts.launch.min(grid.first());
    let start = [
        s0 + g0 * s0.powi(3) / 6.0 + g1 * s0.powi(4) / 12.0,
        1.0 + g0 * s0 * s0 / 2.0 + g1 * s0.powi(3) / 3.0,
    ];
    let rhs = |s: f64, y: &[f64; 2]| -> [f64; 2] { [y[1], profile.eval(s) * y[0]] };
    let targets: Vec<f64> = grid.samples().to_vec();
    let states = DormandPrince::new(settings(&opts)).solve(rhs, s0, start, &targets)?;
    let mut sol = ComparisonSolution {
        grid: grid.clone(),
        k,
        g: vec![],
        g_prime: vec![],
        zeta: vec![],
        g_over_sn: vec![],
    };
    for (&s, y) in targets.iter().zip(&states) {
        if !(y[0] > 0.0) {
            return Err(Error::IntegrationFailure {
                last_s: s,
                reason: "g reached zero".into(),
            });
        }
        sol.g.push(y[0]);
        sol.g_prime.push(y[1]);
        sol.zeta.push(y[1] / y[0] - sn_log_derivative(s, k));
        sol.g_over_sn.push(y[0] / sn_unchecked(s, k));
    }
    Ok(sol)
}

/// Pinching class of a curvature profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pinching {
    Pointwise,
    Integral,
    Both,
    Neither,
    Inconclusive,
}

impl Pinching {
    fn from_flags(pointwise: bool, integral: bool) -> Self {
        match (pointwise, integral) {
            (true, true) => Pinching::Both,
            (true, false) => Pinching::Pointwise,
            (false, true) => Pinching::Integral,
            (false, false) => Pinching::Neither,
        }
    }

    /// True for the classes under which `ζ ∈ L¹` and `g/sn_k` converges.
    pub fn is_integral(self) -> bool {
        matches!(self, Pinching::Integral | Pinching::Both)
    }
}

impl fmt::Display for Pinching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Pinching::Pointwise => "pointwise",
            Pinching::Integral => "integral",
            Pinching::Both => "both",
            Pinching::Neither => "neither",
            Pinching::Inconclusive => "inconclusive",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailModel {
    /// `q ~ s^{-rate}`
    Power,
    /// `q ~ e^{-rate s}`
    Exponential,
}

/// Least-squares fit of the tail quantity used for tabulated profiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub model: TailModel,
    pub rate: f64,
    pub r_squared: f64,
    pub samples: usize,
}

// slope and R² of y against x
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, r2)
}

const MIN_TAIL_SAMPLES: usize = 5;
const MIN_R_SQUARED: f64 = 0.95;
// exponents this close to a threshold are not decided from data
const EXPONENT_MARGIN: f64 = 0.1;

/// Fit the pinching quantity (`sG` for `k = 0`, `G - k` otherwise) over the
/// last decade of a tabulated profile. `None` when the tail is too short or
/// vanishes identically.
pub fn tail_fit(profile: &CurvatureProfile) -> Option<TailFit> {
    let ProfileForm::Tabulated { s, values } = &profile.form else {
        return None;
    };
    let s_max = *s.last()?;
    let pts: Vec<(f64, f64)> = s
        .iter()
        .zip(values)
        .filter(|(x, _)| **x >= s_max / 10.0 && **x > 0.0)
        .map(|(x, g)| {
            let q = if profile.k == 0.0 { x * g } else { g - profile.k };
            (*x, q)
        })
        .collect();
    // an excess that rounded to zero carries no rate information
    let pts: Vec<(f64, f64)> = pts.into_iter().filter(|(_, q)| *q > 0.0).collect();
    if pts.len() < MIN_TAIL_SAMPLES {
        return None;
    }
    let logq: Vec<f64> = pts.iter().map(|(_, q)| q.ln()).collect();
    let logs: Vec<f64> = pts.iter().map(|(x, _)| x.ln()).collect();
    let xs: Vec<f64> = pts.iter().map(|(x, _)| *x).collect();
    let (ps, pr) = linear_fit(&logs, &logq);
    let (es, er) = linear_fit(&xs, &logq);
    Some(if er > pr && es < 0.0 {
        TailFit { model: TailModel::Exponential, rate: -es, r_squared: er, samples: pts.len() }
    } else {
        TailFit { model: TailModel::Power, rate: -ps, r_squared: pr, samples: pts.len() }
    })
}

/// Decide pointwise and integral pinching.
///
/// Pointwise: `sG → 0` (k = 0) or `G - k → 0` (k > 0). Integral: the same
/// quantity is integrable at infinity. Analytic forms are decided exactly;
/// tabulated forms from a tail fit, returning `Inconclusive` when the fit is
/// poor, too short, or its exponent sits near a threshold.
pub fn classify_pinching(profile: &CurvatureProfile) -> Pinching {
    let flat = profile.k == 0.0;
    match &profile.form {
        ProfileForm::Constant { c } => Pinching::from_flags(*c == 0.0, *c == 0.0),
        ProfileForm::PowerTail { c, p } => {
            if *c == 0.0 {
                Pinching::Both
            } else if flat {
                Pinching::from_flags(*p > 1.0, *p > 2.0)
            } else {
                Pinching::from_flags(true, *p > 1.0)
            }
        }
        ProfileForm::ExpTail { .. } => Pinching::Both,
        ProfileForm::Tabulated { s, values } => {
            let tail_start = s.last().copied().unwrap_or(0.0) / 10.0;
            let vanishing = s
                .iter()
                .zip(values)
                .filter(|(x, _)| **x >= tail_start)
                .all(|(_, g)| (g - profile.k).abs() <= 1e-14 * profile.k.max(1.0));
            if vanishing && s.iter().filter(|x| **x >= tail_start).count() >= MIN_TAIL_SAMPLES {
                return Pinching::Both;
            }
            let Some(fit) = tail_fit(profile) else {
                return Pinching::Inconclusive;
            };
            if fit.r_squared < MIN_R_SQUARED {
                return Pinching::Inconclusive;
            }
            if fit.model == TailModel::Exponential {
                return Pinching::Both;
            }
            // q ~ s^{-rate}; q → 0 iff rate > 0, q ∈ L¹ iff rate > 1
            let near = |t: f64| (fit.rate - t).abs() < EXPONENT_MARGIN;
            if near(0.0) || near(1.0) {
                return Pinching::Inconclusive;
            }
            Pinching::from_flags(fit.rate > 0.0, fit.rate > 1.0)
        }
    }
}

/// Tolerances for [`verify_pinching_limits`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitTolerances {
    /// Where the tail window starts.
    pub tail_start: f64,
    /// ζ may dip to `-zeta_floor` before the sign check fails.
    pub zeta_floor: f64,
    /// Bound on `∫ζ` over the tail window.
    pub tail_increment: f64,
    /// Bound on `ζ sn/sn'` at the last sample.
    pub scaled_tail: f64,
    /// Bound on the relative drift of `g/sn` over the tail window.
    pub ratio_drift: f64,
}

impl Default for LimitTolerances {
    fn default() -> Self {
        LimitTolerances {
            tail_start: 30.0,
            zeta_floor: 1e-10,
            tail_increment: 1e-6,
            scaled_tail: 1e-4,
            ratio_drift: 5e-5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitCheck {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Measured counterparts of the limits that integral pinching guarantees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PinchingLimitsReport {
    pub zeta_min: f64,
    pub zeta_nonnegative: bool,
    pub zeta_tail: f64,
    pub zeta_integral: f64,
    /// `∫ζ` from the tail start to the last sample.
    pub tail_increment: f64,
    /// Quadrature (trapezoid vs exact `log h`) discrepancy, a proxy for grid resolution.
    pub integral_error: f64,
    pub zeta_scaled_tail: f64,
    pub g_over_sn_limit: f64,
    pub g_over_sn_monotone: bool,
    /// Relative change of `g/sn` over the tail window.
    pub g_over_sn_drift: f64,
    /// The grid does not reach the tail start, so tail checks are vacuous.
    pub under_resolved: bool,
    pub checks: Vec<LimitCheck>,
}

impl PinchingLimitsReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

pub fn verify_pinching_limits(sol: &ComparisonSolution) -> PinchingLimitsReport {
    verify_pinching_limits_with(sol, &LimitTolerances::default())
}

pub fn verify_pinching_limits_with(
    sol: &ComparisonSolution,
    tol: &LimitTolerances,
) -> PinchingLimitsReport {
    let s = sol.grid.samples();
    let n = s.len();
    let last = n - 1;
    let logh = sol.zeta_integral();
    let zeta_min = sol.zeta.iter().cloned().fold(f64::INFINITY, f64::min);
    let floor = |z: f64| tol.zeta_floor * (1.0 + z.abs());
    let zeta_nonnegative = sol.zeta.iter().all(|z| *z >= -floor(*z));

    let i_tail = s.partition_point(|x| *x < tol.tail_start).min(last);
    let under_resolved = s[last] < tol.tail_start;
    let tail_increment = logh[last] - logh[i_tail];
    let drift = (sol.g_over_sn[last] - sol.g_over_sn[i_tail]).abs() / sol.g_over_sn[last];

    // trapezoid of ζ against the exact primitive log h
    let mut integral_error: f64 = 0.0;
    for i in 1..n {
        let trap = 0.5 * (sol.zeta[i] + sol.zeta[i - 1]) * (s[i] - s[i - 1]);
        integral_error += (trap - (logh[i] - logh[i - 1])).abs();
    }

    let zeta_scaled_tail =
        sol.zeta[last] / sn_log_derivative(s[last], sol.k);
    let g_over_sn_monotone = sol
        .g_over_sn
        .windows(2)
        .all(|w| w[1] >= w[0] * (1.0 - 1e-12));

    let checks = vec![
        LimitCheck {
            name: "zeta_nonnegative".into(),
            value: zeta_min,
            tolerance: -tol.zeta_floor,
            pass: zeta_nonnegative,
        },
        LimitCheck {
            name: "zeta_integral_tail".into(),
            value: tail_increment,
            tolerance: tol.tail_increment,
            pass: !under_resolved && tail_increment.abs() < tol.tail_increment,
        },
        LimitCheck {
            name: "zeta_scaled_tail".into(),
            value: zeta_scaled_tail,
            tolerance: tol.scaled_tail,
            pass: zeta_scaled_tail.abs() < tol.scaled_tail,
        },
        LimitCheck {
            name: "g_over_sn_drift".into(),
            value: drift,
            tolerance: tol.ratio_drift,
            pass: !under_resolved && drift < tol.ratio_drift,
        },
        LimitCheck {
            name: "g_over_sn_monotone".into(),
            value: if g_over_sn_monotone { 1.0 } else { 0.0 },
            tolerance: 0.0,
            pass: g_over_sn_monotone,
        },
    ];

    PinchingLimitsReport {
        zeta_min,
        zeta_nonnegative,
        zeta_tail: sol.zeta[last],
        zeta_integral: logh[last],
        tail_increment,
        integral_error,
        zeta_scaled_tail,
        g_over_sn_limit: sol.g_over_sn[last],
        g_over_sn_monotone,
        g_over_sn_drift: drift,
        under_resolved,
        checks,
    }
}

/// `∫_0^s ζ` by quadrature of the sampled-free ζ along a fresh solve, used to
/// check the identity `log(g/sn) = ∫ζ` independently of the grid.
pub fn zeta_integral_by_quadrature(profile: &CurvatureProfile, s: f64) -> Result<f64> {
    let grid = Grid::linspace(1e-3, s, 2001)?;
    let sol = solve_g(profile, &grid)?;
    let xs = grid.samples();
    let quad = Quadrature::default();
    // cubic Hermite through the samples using ζ' = (G - k) - 2(sn'/sn) ζ - ζ²
    let dz = |x: f64, z: f64| profile.excess(x) - 2.0 * sn_log_derivative(x, profile.k) * z - z * z;
    let mut total = crate::numerics::quad::trapezoid(&[0.0, xs[0]], &[0.0, sol.zeta[0]]);
    for i in 1..xs.len() {
        let (a, b) = (xs[i - 1], xs[i]);
        let (za, zb) = (sol.zeta[i - 1], sol.zeta[i]);
        let (da, db) = (dz(a, za), dz(b, zb));
        let h = b - a;
        let herm = |x: f64| {
            let t = (x - a) / h;
            let (t2, t3) = (t * t, t * t * t);
            (2.0 * t3 - 3.0 * t2 + 1.0) * za
                + (t3 - 2.0 * t2 + t) * h * da
                + (-2.0 * t3 + 3.0 * t2) * zb
                + (t3 - t2) * h * db
        };
        total += quad.integrate(herm, a, b).value;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::sn;
    use approx::assert_relative_eq;

    #[test]
    fn constant_profile_reproduces_sn() {
        let grid = Grid::linspace(0.01, 20.0, 400).unwrap();
        for k in [0.0, 1.0, 0.3] {
            let sol = solve_g(&CurvatureProfile::constant(k), &grid).unwrap();
            for (i, &s) in grid.samples().iter().enumerate() {
                let exact = sn(s, k).unwrap();
                assert!(((sol.g[i] - exact) / exact).abs() <= 1e-8);
                assert_eq!(sol.zeta[i], 0.0);
            }
            let direct = solve_g_direct(&CurvatureProfile::constant(k), &grid).unwrap();
            for (i, &s) in grid.samples().iter().enumerate() {
                let exact = sn(s, k).unwrap();
                assert!(((direct.g[i] - exact) / exact).abs() <= 1e-8, "k={k} s={s}");
            }
        }
    }

    #[test]
    fn constant_excess_matches_closed_form() {
        // G ≡ 4 with k = 0: g = sinh(2s)/2
        let prof = CurvatureProfile::new(0.0, ProfileForm::Constant { c: 4.0 }).unwrap();
        let grid = Grid::linspace(0.05, 8.0, 50).unwrap();
        let sol = solve_g(&prof, &grid).unwrap();
        for (i, &s) in grid.samples().iter().enumerate() {
            assert_relative_eq!(sol.g[i], (2.0 * s).sinh() / 2.0, max_relative = 1e-8);
            assert_relative_eq!(sol.g_prime[i], (2.0 * s).cosh(), max_relative = 1e-8);
        }
    }

    #[test]
    fn exp_tail_zeta_positive() {
        let prof = CurvatureProfile::exp_tail(1.0, 1.0, 1.0).unwrap();
        let grid = Grid::linspace(0.01, 40.0, 800).unwrap();
        let sol = solve_g(&prof, &grid).unwrap();
        assert!(sol.zeta.iter().all(|z| *z > 0.0));
        assert!(sol.g.iter().all(|g| *g > 0.0));
    }

    #[test]
    fn factored_and_direct_routes_agree() {
        let prof = CurvatureProfile::exp_tail(1.0, 1.0, 1.0).unwrap();
        let grid = Grid::linspace(0.01, 10.0, 100).unwrap();
        let a = solve_g(&prof, &grid).unwrap();
        let b = solve_g_direct(&prof, &grid).unwrap();
        for i in 0..grid.len() {
            assert_relative_eq!(a.g[i], b.g[i], max_relative = 1e-8);
            assert!((a.zeta[i] - b.zeta[i]).abs() < 1e-7);
        }
    }

    #[test]
    fn flat_power_tail_grows_faster_than_linear() {
        // sG = s/(1+s)^2 is pointwise-only; g ~ s^{(1+√5)/2} asymptotically
        let prof = CurvatureProfile::power_tail(0.0, 1.0, 2.0).unwrap();
        let grid = Grid::geomspace(0.01, 1e6, 300).unwrap();
        let sol = solve_g(&prof, &grid).unwrap();
        let n = grid.len();
        let (s1, s2) = (grid.samples()[n - 30], grid.samples()[n - 1]);
        let slope = (sol.g_over_sn[n - 1] / sol.g_over_sn[n - 30]).ln() / (s2 / s1).ln();
        let golden = (5.0f64.sqrt() - 1.0) / 2.0;
        assert!((slope - golden).abs() < 0.02, "slope {slope}");
        let report = verify_pinching_limits(&sol);
        assert!(report.zeta_nonnegative);
        assert!(!report.checks.iter().find(|c| c.name == "g_over_sn_drift").unwrap().pass);
    }

    #[test]
    fn log_ratio_equals_zeta_integral() {
        let prof = CurvatureProfile::power_tail(1.0, 2.0, 1.5).unwrap();
        let direct = zeta_integral_by_quadrature(&prof, 12.0).unwrap();
        let grid = Grid::new(vec![12.0]).unwrap();
        let sol = solve_g(&prof, &grid).unwrap();
        assert_relative_eq!(sol.zeta_integral()[0], direct, max_relative = 1e-7);
    }

    #[test]
    fn classification_examples() {
        let flat_p2 = CurvatureProfile::power_tail(0.0, 1.0, 2.0).unwrap();
        assert_eq!(classify_pinching(&flat_p2), Pinching::Pointwise);
        let flat_p3 = CurvatureProfile::power_tail(0.0, 1.0, 3.0).unwrap();
        assert_eq!(classify_pinching(&flat_p3), Pinching::Both);
        let flat_p1 = CurvatureProfile::power_tail(0.0, 1.0, 1.0).unwrap();
        assert_eq!(classify_pinching(&flat_p1), Pinching::Neither);
        let hyp_p1 = CurvatureProfile::power_tail(1.0, 1.0, 1.0).unwrap();
        assert_eq!(classify_pinching(&hyp_p1), Pinching::Pointwise);
        let exp = CurvatureProfile::exp_tail(1.0, 1.0, 1.0).unwrap();
        assert_eq!(classify_pinching(&exp), Pinching::Both);
        assert_eq!(classify_pinching(&CurvatureProfile::constant(0.0)), Pinching::Both);
        let c = CurvatureProfile::new(1.0, ProfileForm::Constant { c: 0.5 }).unwrap();
        assert_eq!(classify_pinching(&c), Pinching::Neither);
    }

    fn tabulate(k: f64, f: impl Fn(f64) -> f64, s_max: f64, n: usize) -> CurvatureProfile {
        let s: Vec<f64> = (0..n).map(|i| s_max * i as f64 / (n - 1) as f64).collect();
        let values = s.iter().map(|x| f(*x)).collect();
        CurvatureProfile::new(k, ProfileForm::Tabulated { s, values }).unwrap()
    }

    #[test]
    fn tabulated_classification_follows_the_tail() {
        let p3 = tabulate(0.0, |s| (1.0 + s).powf(-3.0), 1000.0, 400);
        assert_eq!(classify_pinching(&p3), Pinching::Both);
        let p2 = tabulate(0.0, |s| (1.0 + s).powf(-2.0), 1000.0, 400);
        // sG ~ 1/s sits at the integrability threshold
        assert_eq!(classify_pinching(&p2), Pinching::Inconclusive);
        let p15 = tabulate(0.0, |s| (1.0 + s).powf(-1.5), 1000.0, 400);
        assert_eq!(classify_pinching(&p15), Pinching::Pointwise);
        let e = tabulate(1.0, |s| 1.0 + (-0.5 * s).exp(), 100.0, 400);
        assert_eq!(classify_pinching(&e), Pinching::Both);
        let short = tabulate(1.0, |s| 1.0 + (-s).exp(), 10.0, 4);
        assert_eq!(classify_pinching(&short), Pinching::Inconclusive);
    }

    #[test]
    fn tabulated_interpolation_matches_analytic() {
        let t = tabulate(1.0, |s| 1.0 + (-s).exp(), 40.0, 4001);
        let a = CurvatureProfile::exp_tail(1.0, 1.0, 1.0).unwrap();
        let grid = Grid::linspace(0.1, 30.0, 30).unwrap();
        let st = solve_g(&t, &grid).unwrap();
        let sa = solve_g(&a, &grid).unwrap();
        for i in 0..grid.len() {
            assert_relative_eq!(st.g[i], sa.g[i], max_relative = 1e-5);
        }
    }

    #[test]
    fn table_parsing() {
        let text = "# s G\n0 1.5\n1.0, 1.25  # comment\n\n2 1.1\n";
        let p = CurvatureProfile::parse_table(text, 1.0).unwrap();
        assert_relative_eq!(p.eval(0.5), 1.375);
        assert_eq!(p.eval(10.0), 1.1);
        assert!(matches!(CurvatureProfile::parse_table("0 1 2\n", 0.0), Err(Error::Parse(_))));
        assert!(matches!(CurvatureProfile::parse_table("0 x\n1 2\n", 0.0), Err(Error::Parse(_))));
        assert!(matches!(
            CurvatureProfile::parse_table("0 0.5\n1 0.5\n", 1.0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn invalid_profiles_rejected() {
        assert!(CurvatureProfile::power_tail(0.0, -1.0, 2.0).is_err());
        assert!(CurvatureProfile::power_tail(0.0, 1.0, 0.0).is_err());
        assert!(CurvatureProfile::exp_tail(-1.0, 1.0, 1.0).is_err());
        assert!(CurvatureProfile::exp_tail(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn limits_for_space_form() {
        let grid = Grid::linspace(0.01, 40.0, 400).unwrap();
        let sol = solve_g(&CurvatureProfile::constant(1.0), &grid).unwrap();
        let r = verify_pinching_limits(&sol);
        assert!(r.all_pass());
        assert_eq!(r.zeta_integral, 0.0);
        assert_eq!(r.g_over_sn_limit, 1.0);
    }

    #[test]
    fn limits_for_exp_tail() {
        let grid = Grid::linspace(0.01, 40.0, 800).unwrap();
        let prof = CurvatureProfile::exp_tail(1.0, 1.0, 1.0).unwrap();
        let r = verify_pinching_limits(&solve_g(&prof, &grid).unwrap());
        assert!(r.all_pass(), "{r:?}");
        assert!(r.tail_increment < 1e-6);
        assert!(r.zeta_scaled_tail < 1e-4);
        assert!(r.g_over_sn_limit > 1.0);
    }

    #[test]
    fn short_grid_is_flagged() {
        let grid = Grid::linspace(0.01, 5.0, 50).unwrap();
        let prof = CurvatureProfile::exp_tail(1.0, 1.0, 1.0).unwrap();
        let r = verify_pinching_limits(&solve_g(&prof, &grid).unwrap());
        assert!(r.under_resolved);
        assert!(!r.all_pass());
    }
}
