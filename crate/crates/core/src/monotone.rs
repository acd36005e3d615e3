//! Checks of the monotonicity formulae and of the finite-density equivalence
//! on sampled radial profiles.
//!
//! Every check compares a measured violation with an error bound propagated
//! from the per-sample quadrature estimates of the profile, so rounding and
//! quadrature noise never produce a failure on their own.

use crate::comparison::{verify_pinching_limits, ComparisonSolution};
use crate::model::{ball_volume_unchecked, sn_log_derivative, SpaceFormParams};
use crate::profiles::RadialProfile;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotoneOptions {
    /// Error bounds above this relative size mark the report low-confidence.
    pub rel_tol: f64,
}

impl Default for MonotoneOptions {
    fn default() -> Self {
        MonotoneOptions { rel_tol: 1e-6 }
    }
}

/// Verdict for one monotone quantity or inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantityVerdict {
    pub name: String,
    pub pass: bool,
    /// Number of intervals or samples examined.
    pub checked: usize,
    /// Largest violation found (0 when none).
    pub worst_violation: f64,
    /// The error bound the worst violation was compared against.
    pub bound_at_worst: f64,
    /// Sample index of the worst violation.
    pub worst_index: Option<usize>,
    pub worst_s: Option<f64>,
    /// Largest error bound relative to the quantity's scale.
    pub max_relative_bound: f64,
}

impl QuantityVerdict {
    fn new(name: &str) -> Self {
        QuantityVerdict {
            name: name.to_string(),
            pass: true,
            checked: 0,
            worst_violation: 0.0,
            bound_at_worst: 0.0,
            worst_index: None,
            worst_s: None,
            max_relative_bound: 0.0,
        }
    }

    // record one comparison: a shortfall `violation >= 0` against `bound`
    fn record(&mut self, index: usize, s: f64, violation: f64, bound: f64, scale: f64) {
        self.checked += 1;
        let scale = scale.abs().max(f64::MIN_POSITIVE);
        self.max_relative_bound = self.max_relative_bound.max(bound / scale);
        let excess = violation - bound;
        let prev_excess = self.worst_violation - self.bound_at_worst;
        if violation > 0.0 && (self.worst_index.is_none() || excess > prev_excess) {
            self.worst_violation = violation;
            self.bound_at_worst = bound;
            self.worst_index = Some(index);
            self.worst_s = Some(s);
        }
        if !(violation <= bound) {
            self.pass = false;
        }
    }

    fn skipped(name: &str) -> Self {
        QuantityVerdict::new(name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneReport {
    pub theta: QuantityVerdict,
    pub energy: QuantityVerdict,
    pub barj: QuantityVerdict,
    /// `V_k (J̄ - Θ)` non-decreasing.
    pub volume_gap: QuantityVerdict,
    /// `J ≥ Θ` at every sample.
    pub j_ge_theta: QuantityVerdict,
    /// `J̄' ≥ m (sn'/sn) T J̄`.
    pub diff_lower: QuantityVerdict,
    /// `(v_k J̄/v_g)' ≤ m (g'/g) T (v_k J̄/v_g)`; `None` without a comparison solution.
    pub diff_upper: Option<QuantityVerdict>,
    pub low_confidence: bool,
    pub notes: Vec<String>,
    pub pass: bool,
}

impl MonotoneReport {
    pub fn verdicts(&self) -> Vec<&QuantityVerdict> {
        let mut v = vec![
            &self.theta,
            &self.energy,
            &self.barj,
            &self.volume_gap,
            &self.j_ge_theta,
            &self.diff_lower,
        ];
        if let Some(u) = &self.diff_upper {
            v.push(u);
        }
        v
    }
}

impl fmt::Display for MonotoneReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<14} {:>5} {:>8} {:>12} {:>12} {:>12}",
            "quantity", "pass", "checked", "worst", "bound", "at s"
        )?;
        for v in self.verdicts() {
            writeln!(
                f,
                "{:<14} {:>5} {:>8} {:>12.3e} {:>12.3e} {:>12}",
                v.name,
                if v.pass { "yes" } else { "NO" },
                v.checked,
                v.worst_violation,
                v.bound_at_worst,
                v.worst_s.map(|s| format!("{s:.6}")).unwrap_or_else(|| "-".into())
            )?;
        }
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        write!(f, "overall: {}", if self.pass { "pass" } else { "FAIL" })
    }
}

fn nondecreasing(name: &str, s: &[f64], y: &[f64], err: &[f64]) -> QuantityVerdict {
    let mut v = QuantityVerdict::new(name);
    for i in 1..y.len() {
        let drop = y[i - 1] - y[i];
        let bound = err[i - 1] + err[i];
        v.record(i, s[i], drop.max(0.0), bound, y[i].abs().max(y[i - 1].abs()));
    }
    v
}

// centered first differences on spacing h and 2h at interior index i
fn centered(s: &[f64], y: &[f64], i: usize) -> (f64, f64) {
    let d1 = (y[i + 1] - y[i - 1]) / (s[i + 1] - s[i - 1]);
    let d2 = (y[i + 2] - y[i - 2]) / (s[i + 2] - s[i - 2]);
    (d1, d2)
}

/// Check the four monotone quantities, `J ≥ Θ`, and the differential
/// inequalities on `profile`.
///
/// The differential inequalities are evaluated with centered differences at
/// samples at least two steps from either end. The bound there is the
/// difference between the `h` and `2h` centered differences plus the
/// propagated data error; both inequalities are equalities in space forms,
/// so the truncation term is what keeps a tight case from failing.
pub fn verify_monotonicity(
    profile: &RadialProfile,
    p: &SpaceFormParams,
    comparison: Option<&ComparisonSolution>,
) -> MonotoneReport {
    verify_monotonicity_with(profile, p, comparison, &MonotoneOptions::default())
}

pub fn verify_monotonicity_with(
    profile: &RadialProfile,
    p: &SpaceFormParams,
    comparison: Option<&ComparisonSolution>,
    opts: &MonotoneOptions,
) -> MonotoneReport {
    let s = profile.samples();
    let n = s.len();
    let m = p.mf();
    let mut notes = Vec::new();

    let theta = nondecreasing("theta", s, &profile.theta, &profile.err_theta);
    let energy = nondecreasing("energy", s, &profile.energy_e, &profile.err_energy_e);
    let barj = nondecreasing("barj", s, &profile.barj, &profile.err_barj);
    let vol: Vec<f64> = s.iter().map(|&x| ball_volume_unchecked(x, p)).collect();
    let gap: Vec<f64> = (0..n).map(|i| vol[i] * (profile.barj[i] - profile.theta[i])).collect();
    let gap_err: Vec<f64> = (0..n)
        .map(|i| vol[i] * (profile.err_barj[i] + profile.err_theta[i]))
        .collect();
    let mut volume_gap = nondecreasing("volume_gap", s, &gap, &gap_err);
    // the gap is a small difference of large terms; scale its bound by the terms
    volume_gap.max_relative_bound = (0..n)
        .map(|i| gap_err[i] / (vol[i] * profile.barj[i].abs().max(profile.theta[i].abs())).max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);

    let mut j_ge_theta = QuantityVerdict::new("j_ge_theta");
    for i in 0..n {
        let short = profile.theta[i] - profile.flux_j[i];
        let bound = profile.err_theta[i] + profile.err_flux_j[i];
        j_ge_theta.record(i, s[i], short.max(0.0), bound, profile.theta[i]);
    }

    let mut diff_lower = QuantityVerdict::new("diff_lower");
    if n >= 5 {
        for i in 2..n - 2 {
            let (d1, d2) = centered(s, &profile.barj, i);
            let c = sn_log_derivative(s[i], p.k);
            let rhs = m * c * profile.tilt_t[i] * profile.barj[i];
            let h = s[i + 1] - s[i - 1];
            let data = (profile.err_barj[i + 1] + profile.err_barj[i - 1]) / h
                + m * c * (profile.tilt_t[i] * profile.err_barj[i] + profile.barj[i] * profile.err_tilt_t[i]);
            let bound = (d1 - d2).abs() + data;
            diff_lower.record(i, s[i], (rhs - d1).max(0.0), bound, d1.abs().max(rhs.abs()));
        }
    } else {
        notes.push("fewer than 5 samples: differential inequalities not checked".into());
    }

    let diff_upper = comparison.and_then(|sol| {
        let gs = sol.grid.samples();
        let same = gs.len() == n && gs.iter().zip(s).all(|(a, b)| (a - b).abs() <= 1e-12 * b.abs());
        if !same {
            notes.push("comparison solution grid differs from the profile grid: upper inequality skipped".into());
            return None;
        }
        if n < 5 {
            return Some(QuantityVerdict::skipped("diff_upper"));
        }
        // v_k/v_g = (sn/g)^{m-1} = (g/sn)^{-(m-1)}
        let y: Vec<f64> = (0..n)
            .map(|i| sol.g_over_sn[i].powf(-(m - 1.0)) * profile.barj[i])
            .collect();
        let yerr: Vec<f64> = (0..n)
            .map(|i| sol.g_over_sn[i].powf(-(m - 1.0)) * profile.err_barj[i])
            .collect();
        let mut v = QuantityVerdict::new("diff_upper");
        for i in 2..n - 2 {
            let (d1, d2) = centered(s, &y, i);
            let c = sol.g_prime[i] / sol.g[i];
            let rhs = m * c * profile.tilt_t[i] * y[i];
            let h = s[i + 1] - s[i - 1];
            let data = (yerr[i + 1] + yerr[i - 1]) / h
                + m * c * (profile.tilt_t[i] * yerr[i] + y[i] * profile.err_tilt_t[i]);
            let bound = (d1 - d2).abs() + data;
            v.record(i, s[i], (d1 - rhs).max(0.0), bound, d1.abs().max(rhs.abs()));
        }
        Some(v)
    });

    let mut report = MonotoneReport {
        theta,
        energy,
        barj,
        volume_gap,
        j_ge_theta,
        diff_lower,
        diff_upper,
        low_confidence: false,
        notes,
        pass: true,
    };
    let checked_monotone = [&report.theta, &report.energy, &report.barj, &report.volume_gap];
    let loose = checked_monotone
        .iter()
        .filter(|v| v.max_relative_bound > opts.rel_tol)
        .map(|v| v.name.clone())
        .collect::<Vec<_>>();
    if !loose.is_empty() {
        report.low_confidence = true;
        report
            .notes
            .push(format!("error bounds exceed relative {} for: {}", opts.rel_tol, loose.join(", ")));
    }
    if n < 5 {
        report.low_confidence = true;
    }
    if !profile.notes.is_empty() {
        report
            .notes
            .push(format!("profile carries {} sample annotation(s)", profile.notes.len()));
    }
    report.pass = report.verdicts().iter().all(|v| v.pass);
    report
}

/// Verdict on whether a quantity stays bounded as `s → ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Finiteness {
    Finite,
    Infinite,
    Inconclusive,
}

impl fmt::Display for Finiteness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Finiteness::Finite => "finite",
            Finiteness::Infinite => "infinite",
            Finiteness::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitForm {
    /// The tail is constant to rounding.
    Constant,
    /// `L - A s^{-p}`.
    Power,
    /// `L - A e^{-p s}`.
    Exponential,
}

/// Tail extrapolation `y(s) ≈ L - A·φ_p(s)` over the last decade of samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitFit {
    pub form: FitForm,
    pub limit: f64,
    pub amplitude: f64,
    pub rate: f64,
    /// Root-mean-square fit residual relative to `|limit|`.
    pub rel_residual: f64,
    pub samples: usize,
    pub verdict: Finiteness,
}

// rates below this are indistinguishable from logarithmic growth
const MIN_RATE: f64 = 0.2;
const MAX_FIT_RESIDUAL: f64 = 1e-3;

fn tail_indices(s: &[f64]) -> Vec<usize> {
    let last = s[s.len() - 1];
    let from = (last / 10.0).max(s[0]);
    let idx: Vec<usize> = (0..s.len()).filter(|&i| s[i] >= from).collect();
    if idx.len() >= 4 {
        idx
    } else {
        (s.len().saturating_sub(4)..s.len()).collect()
    }
}

// least squares of y ≈ L + B x; returns (L, B, rms)
fn fit_affine(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let l = my - b * mx;
    let rms = (x.iter().zip(y).map(|(a, c)| (c - l - b * a).powi(2)).sum::<f64>() / n).sqrt();
    (l, b, rms)
}

/// Fit the tail of `y(s)` by `L - A s^{-p}` and `L - A e^{-ps}` (rate by grid
/// search, `L` and `A` by linear least squares) and keep the better one.
pub fn fit_limit(s: &[f64], y: &[f64]) -> LimitFit {
    let idx = tail_indices(s);
    let xs: Vec<f64> = idx.iter().map(|&i| s[i]).collect();
    let ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    let scale = ys.iter().fold(0.0f64, |a, b| a.max(b.abs())).max(f64::MIN_POSITIVE);
    let spread = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - ys.iter().cloned().fold(f64::INFINITY, f64::min);
    if spread <= 1e-12 * scale {
        return LimitFit {
            form: FitForm::Constant,
            limit: *ys.last().unwrap(),
            amplitude: 0.0,
            rate: 0.0,
            rel_residual: 0.0,
            samples: idx.len(),
            verdict: Finiteness::Finite,
        };
    }
    let span = xs[xs.len() - 1];
    // exponential rates are expressed per tail length so one rate grid serves both forms
    let fit_at = |form: FitForm, p: f64| -> (f64, f64, f64, f64) {
        let basis: Vec<f64> = match form {
            FitForm::Power => xs.iter().map(|x| x.powf(-p)).collect(),
            _ => xs.iter().map(|x| (-p * 10.0 * (x - span) / span).exp()).collect(),
        };
        let (l, b, rms) = fit_affine(&basis, &ys);
        match form {
            FitForm::Power => (l, -b, p, rms),
            _ => (l, -b * (p * 10.0).exp(), p * 10.0 / span, rms),
        }
    };
    let rate_at = |j: f64| 0.01 * (800.0f64).powf(j / 400.0);
    let mut best: Option<(FitForm, f64, f64, f64, f64)> = None;
    for form in [FitForm::Power, FitForm::Exponential] {
        let mut jbest = 0usize;
        let mut rbest = f64::INFINITY;
        for j in 0..=400 {
            let r = fit_at(form, rate_at(j as f64)).3;
            if r < rbest {
                rbest = r;
                jbest = j;
            }
        }
        // golden-section refinement between the neighbouring grid rates
        let (mut a, mut b) = ((jbest as f64 - 1.0).max(0.0), (jbest as f64 + 1.0).min(400.0));
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..60 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if fit_at(form, rate_at(c)).3 < fit_at(form, rate_at(d)).3 {
                b = d;
            } else {
                a = c;
            }
        }
        let (l, amp, rate, rms) = fit_at(form, rate_at(0.5 * (a + b)));
        let (l, amp, rate, rms) = if rms <= rbest { (l, amp, rate, rms) } else { fit_at(form, rate_at(jbest as f64)) };
        if best.map_or(true, |bb| rms < bb.4) {
            best = Some((form, l, amp, rate, rms));
        }
    }
    let (form, limit, amplitude, rate, rms) = best.unwrap();
    let rel_residual = rms / limit.abs().max(f64::MIN_POSITIVE);
    let growing = ys[ys.len() - 1] > ys[0];
    let verdict = if !limit.is_finite() {
        Finiteness::Inconclusive
    } else if form == FitForm::Power && rate <= MIN_RATE * 1.0001 {
        if growing && spread > 1e-3 * scale {
            Finiteness::Infinite
        } else {
            Finiteness::Inconclusive
        }
    } else if rel_residual <= MAX_FIT_RESIDUAL {
        Finiteness::Finite
    } else {
        Finiteness::Inconclusive
    };
    LimitFit { form, limit, amplitude, rate, rel_residual, samples: idx.len(), verdict }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub theta_fit: LimitFit,
    pub barj_fit: LimitFit,
    pub theta_limit_estimate: f64,
    pub barj_limit_estimate: f64,
    /// Relative disagreement of the two limits.
    pub limit_gap: f64,
    /// Cumulative `∫ (sn'/sn) T` from the first sample, per sample.
    pub tilt_partials: Vec<f64>,
    pub tilt_integral: f64,
    /// Trapezoid error estimate (difference with the rule on every other sample).
    pub tilt_integral_error: f64,
    /// `∫ (sn'/sn) T` from `tail_start` to the last sample.
    pub tilt_tail_increment: f64,
    pub tail_start: f64,
    /// Fitted decay exponent of `(sn'/sn) T` over the last decade.
    pub tilt_decay: Option<f64>,
    pub verdict_theta: Finiteness,
    pub verdict_barj: Finiteness,
    pub verdict_tilt: Finiteness,
    /// Whether a finite tilt integral may be used to conclude a finite limit (needs integral pinching on the supplied comparison).
    pub converse_applicable: bool,
    pub consistent: bool,
}

/// Tail start used for the tilt-integral increment.
pub const TILT_TAIL_START: f64 = 20.0;

pub fn equivalence_report(
    profile: &RadialProfile,
    p: &SpaceFormParams,
    comparison: Option<&ComparisonSolution>,
) -> EquivalenceReport {
    let s = profile.samples();
    let n = s.len();
    let theta_fit = fit_limit(s, &profile.theta);
    let barj_fit = fit_limit(s, &profile.barj);

    let q: Vec<f64> = (0..n)
        .map(|i| sn_log_derivative(s[i], p.k) * profile.tilt_t[i])
        .collect();
    let partials = crate::numerics::quad::cumulative_trapezoid(s, &q);
    let integral = *partials.last().unwrap_or(&0.0);
    // coarse rule on every other sample for an error estimate
    let coarse_idx: Vec<usize> = (0..n).step_by(2).chain(std::iter::once(n - 1)).collect();
    let mut coarse_idx = coarse_idx;
    coarse_idx.dedup();
    let cx: Vec<f64> = coarse_idx.iter().map(|&i| s[i]).collect();
    let cy: Vec<f64> = coarse_idx.iter().map(|&i| q[i]).collect();
    let coarse = crate::numerics::quad::trapezoid(&cx, &cy);
    let tilt_integral_error = (coarse - integral).abs() / 3.0;

    let i_tail = s.partition_point(|x| *x < TILT_TAIL_START).min(n - 1);
    let tail_increment = integral - partials[i_tail];

    // decay of the criterion integrand over the last decade
    let idx = tail_indices(s);
    let pos: Vec<(f64, f64)> = idx
        .iter()
        .filter(|&&i| q[i] > 0.0)
        .map(|&i| (s[i].ln(), q[i].ln()))
        .collect();
    let all_zero = idx.iter().all(|&i| q[i].abs() <= 1e-300);
    let tilt_decay = if pos.len() >= 4 {
        let (x, y): (Vec<f64>, Vec<f64>) = pos.into_iter().unzip();
        let (_, b, _) = fit_affine(&x, &y);
        Some(-b)
    } else {
        None
    };
    let verdict_tilt = if all_zero {
        Finiteness::Finite
    } else {
        match tilt_decay {
            Some(d) if d > 1.1 => Finiteness::Finite,
            Some(d) if d < 0.9 => Finiteness::Infinite,
            _ => Finiteness::Inconclusive,
        }
    };

    let converse_applicable = comparison
        .map(|sol| {
            let r = verify_pinching_limits(sol);
            r.zeta_nonnegative && r.checks.iter().all(|c| c.pass)
        })
        .unwrap_or(false);

    let (vt, vb) = (theta_fit.verdict, barj_fit.verdict);
    let mut consistent = match (vt, vb) {
        (Finiteness::Inconclusive, _) | (_, Finiteness::Inconclusive) => true,
        (a, b) => a == b,
    };
    if vt == Finiteness::Finite && vb == Finiteness::Finite && verdict_tilt == Finiteness::Infinite {
        consistent = false;
    }
    if converse_applicable && verdict_tilt == Finiteness::Finite && vb == Finiteness::Infinite {
        consistent = false;
    }
    let theta_limit_estimate = theta_fit.limit;
    let barj_limit_estimate = barj_fit.limit;
    EquivalenceReport {
        theta_fit,
        barj_fit,
        theta_limit_estimate,
        barj_limit_estimate,
        limit_gap: (theta_limit_estimate - barj_limit_estimate).abs()
            / theta_limit_estimate.abs().max(f64::MIN_POSITIVE),
        tilt_partials: partials,
        tilt_integral: integral,
        tilt_integral_error,
        tilt_tail_increment: tail_increment,
        tail_start: TILT_TAIL_START,
        tilt_decay,
        verdict_theta: vt,
        verdict_barj: vb,
        verdict_tilt,
        converse_applicable,
        consistent,
    }
}
