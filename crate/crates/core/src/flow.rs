//! Scalar bound along flow lines of `∇r/|∇r|²` under prescribed decay of the
//! second fundamental form, and the finite-density criterion it feeds.
//!
//! Along a flow line `d/ds(sn_k(r)√(1-|∇r|²)) ≤ sn_k(r)|II|`, so starting from
//! the worst case `√(1-|∇r|²) = 1` at `R`,
//!
//! ```text
//! 1 - |∇r|² ≤ w(s) = min(1, [(sn_k(R) + ∫_R^s sn_k |II|) / sn_k(s)]²).
//! ```

use crate::error::{Error, Result};
use crate::model::{sn_log_derivative, sn_ratio, Grid, SpaceFormParams};
use crate::numerics::quad::Quadrature;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Euclidean,
    Hyperbolic,
}

impl std::str::FromStr for Regime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Regime::Euclidean),
            "hyperbolic" => Ok(Regime::Hyperbolic),
            _ => Err(Error::Config(format!(
                "unknown regime '{s}' (expected euclidean or hyperbolic)"
            ))),
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Euclidean => "euclidean",
            Regime::Hyperbolic => "hyperbolic",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum DecayLaw {
    /// `|II|² ≤ c/(s² logᵅ s)` (euclidean) or `c/(s logᵅ s)` (hyperbolic).
    LogPower { c: f64, alpha: f64 },
    /// `|II| ≡ ii`.
    Constant { ii: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IIDecayProfile {
    pub regime: Regime,
    pub k: f64,
    /// Start radius `R > 1`.
    pub start: f64,
    pub law: DecayLaw,
}

impl IIDecayProfile {
    pub fn new(regime: Regime, k: f64, start: f64, law: DecayLaw) -> Result<Self> {
        match regime {
            Regime::Euclidean if k != 0.0 => {
                return Err(Error::Config(format!("euclidean regime needs k = 0, got {k}")))
            }
            Regime::Hyperbolic if !(k > 0.0 && k.is_finite()) => {
                return Err(Error::Config(format!("hyperbolic regime needs k > 0, got {k}")))
            }
            _ => {}
        }
        if !(start > 1.0 && start.is_finite()) {
            return Err(Error::Config(format!("start radius must exceed 1, got {start}")));
        }
        match law {
            DecayLaw::LogPower { c, alpha } => {
                if !(c >= 0.0 && c.is_finite()) {
                    return Err(Error::Config(format!("decay constant c must be >= 0, got {c}")));
                }
                if !(alpha > 0.0 && alpha.is_finite()) {
                    return Err(Error::Config(format!("decay exponent alpha must be > 0, got {alpha}")));
                }
            }
            DecayLaw::Constant { ii } => {
                if !(ii >= 0.0 && ii.is_finite()) {
                    return Err(Error::Config(format!("|II| must be >= 0, got {ii}")));
                }
            }
        }
        Ok(IIDecayProfile { regime, k, start, law })
    }

    pub fn euclidean(c: f64, alpha: f64, start: f64) -> Result<Self> {
        Self::new(Regime::Euclidean, 0.0, start, DecayLaw::LogPower { c, alpha })
    }

    pub fn hyperbolic(k: f64, c: f64, alpha: f64, start: f64) -> Result<Self> {
        Self::new(Regime::Hyperbolic, k, start, DecayLaw::LogPower { c, alpha })
    }

    /// `‖II‖` at extrinsic radius `s > 1`.
    pub fn ii_norm(&self, s: f64) -> f64 {
        match self.law {
            DecayLaw::LogPower { c, alpha } => {
                let base = match self.regime {
                    Regime::Euclidean => s * s,
                    Regime::Hyperbolic => s,
                };
                (c / (base * s.ln().powf(alpha))).sqrt()
            }
            DecayLaw::Constant { ii } => ii,
        }
    }

    /// The analytic decay weight: `1/logᵅ s` for `k = 0`, `1/(s logᵅ s)` for `k > 0`.
    pub fn decay_weight(&self, s: f64) -> Option<f64> {
        match self.law {
            DecayLaw::LogPower { alpha, .. } => Some(match self.regime {
                Regime::Euclidean => 1.0 / s.ln().powf(alpha),
                Regime::Hyperbolic => 1.0 / (s * s.ln().powf(alpha)),
            }),
            DecayLaw::Constant { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropernessGate {
    /// `limsup s‖II‖` (k = 0) or `limsup ‖II‖` (k > 0).
    pub limsup: f64,
    /// 1 for k = 0, `√k` for k > 0.
    pub threshold: f64,
    pub pass: bool,
}

/// Closed-form limsup of the properness condition on the decay law.
pub fn properness_gate(profile: &IIDecayProfile) -> PropernessGate {
    let (limsup, threshold) = match (profile.regime, profile.law) {
        // s·√(c/(s² logᵅ s)) = √c/log^{α/2} s and √(c/(s logᵅ s)) both tend to 0
        (Regime::Euclidean, DecayLaw::LogPower { .. }) => (0.0, 1.0),
        (Regime::Hyperbolic, DecayLaw::LogPower { .. }) => (0.0, profile.k.sqrt()),
        (Regime::Euclidean, DecayLaw::Constant { ii }) => {
            (if ii > 0.0 { f64::INFINITY } else { 0.0 }, 1.0)
        }
        (Regime::Hyperbolic, DecayLaw::Constant { ii }) => (ii, profile.k.sqrt()),
    };
    PropernessGate { limsup, threshold, pass: limsup < threshold }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecadeFit {
    pub lo: f64,
    pub hi: f64,
    /// `max w/envelope` over samples in `[lo, hi]` with `s > 2R`.
    pub c_hat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowBound {
    pub profile: IIDecayProfile,
    pub grid: Grid,
    /// Upper bound for `1 - |∇r|²`, in `[0, 1]`.
    pub w: Vec<f64>,
    /// `1/logᵅ s` or `1/(s logᵅ s)`; absent for the constant law.
    pub envelope: Option<Vec<f64>>,
    pub decade_fits: Vec<DecadeFit>,
    /// Relative change of `Ĉ` between the last two decades.
    pub c_hat_variation: Option<f64>,
    /// Cumulative `∫_R^s (sn'/sn) w`.
    pub criterion_partials: Vec<f64>,
    pub quadrature_rel_tol: f64,
}

/// Samples per decade of the flow grid.
pub const SAMPLES_PER_DECADE: usize = 40;

/// Integrate the flow-line bound on a geometric grid over `[R, s_max]`.
///
/// The running quantity is kept as `Y(s) = (sn_k(R) + ∫_R^s sn_k|II|)/sn_k(s)`
/// and advanced interval by interval with `sn_k(a)/sn_k(b)` ratios, so
/// nothing overflows for large `s` when `k > 0`.
pub fn integrate_flow_bound(profile: &IIDecayProfile, s_max: f64) -> Result<FlowBound> {
    let r0 = profile.start;
    if !(s_max > 2.0 * r0 && s_max.is_finite()) {
        return Err(Error::Config(format!("s_max = {s_max} must exceed 2R = {}", 2.0 * r0)));
    }
    let decades = (s_max / r0).log10();
    let n = ((decades * SAMPLES_PER_DECADE as f64).ceil() as usize + 1).max(3);
    let grid = Grid::geomspace(r0, s_max, n)?;
    let s = grid.samples();
    let k = profile.k;
    let quad = Quadrature::with_rel_tol(1e-12);
    let mut y = 1.0;
    let mut w = Vec::with_capacity(n);
    w.push(1.0);
    for i in 1..n {
        let (a, b) = (s[i - 1], s[i]);
        let f = |x: f64| sn_ratio(x, b, k) * profile.ii_norm(x);
        // for k > 0 the integrand is concentrated within a few 1/√k of b
        let points: Vec<f64> = if k > 0.0 && b - a > 50.0 / k.sqrt() {
            vec![a, b - 50.0 / k.sqrt(), b]
        } else {
            vec![a, b]
        };
        let forcing = quad.integrate_points(f, &points).value;
        y = y * sn_ratio(a, b, k) + forcing;
        w.push((y * y).min(1.0));
    }
    let envelope: Option<Vec<f64>> = profile
        .decay_weight(r0)
        .map(|_| s.iter().map(|x| profile.decay_weight(*x).unwrap()).collect());

    // decades are anchored at s_max so the last two are full decades
    let mut decade_fits = Vec::new();
    if let Some(env) = &envelope {
        let mut hi = s_max;
        while hi > 2.0 * r0 * (1.0 + 1e-12) {
            let lo = (hi / 10.0).max(2.0 * r0);
            let c_hat = (0..n)
                .filter(|&i| s[i] > 2.0 * r0 && s[i] >= lo && s[i] <= hi)
                .map(|i| w[i] / env[i])
                .fold(0.0, f64::max);
            decade_fits.push(DecadeFit { lo, hi, c_hat });
            hi = lo;
        }
        decade_fits.reverse();
    }
    let c_hat_variation = if decade_fits.len() >= 2 {
        let a = decade_fits[decade_fits.len() - 2].c_hat;
        let b = decade_fits[decade_fits.len() - 1].c_hat;
        Some((b - a).abs() / a.max(f64::MIN_POSITIVE))
    } else {
        None
    };

    // trapezoid in log s: ∫ (sn'/sn) w ds = ∫ (sn'/sn) w s d(log s)
    let logs: Vec<f64> = s.iter().map(|x| x.ln()).collect();
    let integrand: Vec<f64> = (0..n).map(|i| sn_log_derivative(s[i], k) * w[i] * s[i]).collect();
    let criterion_partials = crate::numerics::quad::cumulative_trapezoid(&logs, &integrand);

    Ok(FlowBound {
        profile: *profile,
        grid,
        w,
        envelope,
        decade_fits,
        c_hat_variation,
        criterion_partials,
        quadrature_rel_tol: quad.rel_tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionVerdict {
    Finite,
    Divergent,
    Inconclusive,
}

impl fmt::Display for CriterionVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CriterionVerdict::Finite => "finite",
            CriterionVerdict::Divergent => "divergent",
            CriterionVerdict::Inconclusive => "inconclusive",
        })
    }
}

/// Relative last-decade increment below which the integral is taken as converged.
pub const RELATIVE_INCREMENT_TOL: f64 = 1e-3;
/// Allowed growth of `sup w/η` from one decade to the next for `w` to count as dominated by `η`.
pub const DOMINANCE_SLACK: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub verdict: CriterionVerdict,
    pub accumulated: f64,
    pub last_decade_increment: f64,
    pub relative_increment: f64,
    /// `sup w/η` over the last two decades, oldest first.
    pub dominance: Option<(f64, f64)>,
    /// Whether `(sn'/sn) η ∈ L¹(+∞)`, i.e. `α > 1`.
    pub weight_integrable: Option<bool>,
    pub rule: String,
}

/// Decide whether `∫ (sn'/sn) w` converges.
///
/// A last-decade increment below `10⁻³` of the accumulated value gives
/// `finite`. Otherwise, when `w/η` stays bounded across the last two decades
/// the analytic integrability of `(sn'/sn) η` decides; an unbounded ratio is
/// inconclusive.
pub fn finite_density_criterion(bound: &FlowBound, p: &SpaceFormParams) -> Result<CriterionReport> {
    if p.k != bound.profile.k {
        return Err(Error::Config(format!(
            "space form has k = {}, decay profile has k = {}",
            p.k, bound.profile.k
        )));
    }
    let s = bound.grid.samples();
    let n = s.len();
    let last = s[n - 1];
    let accumulated = bound.criterion_partials[n - 1];
    let i_dec = s.partition_point(|x| *x < last / 10.0).min(n - 1);
    let last_decade_increment = accumulated - bound.criterion_partials[i_dec];
    let relative_increment = if accumulated > 0.0 { last_decade_increment / accumulated } else { 0.0 };

    let dominance = bound.envelope.as_ref().and_then(|env| {
        let i_prev = s.partition_point(|x| *x < last / 100.0);
        if i_prev >= i_dec || s[0] > last / 100.0 {
            return None;
        }
        let sup = |a: usize, b: usize| (a..=b).map(|i| bound.w[i] / env[i]).fold(0.0, f64::max);
        Some((sup(i_prev, i_dec), sup(i_dec, n - 1)))
    });
    let weight_integrable = match bound.profile.law {
        DecayLaw::LogPower { alpha, .. } => Some(alpha > 1.0),
        DecayLaw::Constant { .. } => None,
    };

    let (verdict, rule) = if relative_increment < RELATIVE_INCREMENT_TOL {
        (CriterionVerdict::Finite, "relative last-decade increment below tolerance")
    } else {
        match (dominance, weight_integrable) {
            (Some((prev, cur)), Some(integrable)) if cur <= (1.0 + DOMINANCE_SLACK) * prev => {
                if integrable {
                    (CriterionVerdict::Finite, "w dominated by an integrable decay weight")
                } else {
                    (CriterionVerdict::Divergent, "w dominated by a non-integrable decay weight")
                }
            }
            _ => (CriterionVerdict::Inconclusive, "increments above tolerance and w not dominated"),
        }
    };
    Ok(CriterionReport {
        verdict,
        accumulated,
        last_decade_increment,
        relative_increment,
        dominance,
        weight_integrable,
        rule: rule.to_string(),
    })
}
