//! Globally adaptive Gauss–Kronrod (10/21 point) quadrature.
//!
//! The error model follows QUADPACK's `qk21`/`qag`: the raw Kronrod–Gauss
//! difference is rescaled and floored by a round-off term proportional to
//! the integral of `|f|`.

use serde::{Deserialize, Serialize};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_73,
    0.054_755_896_574_352,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_5,
    0.149_445_554_002_916_9,
];

// Gauss weights for the odd-indexed Kronrod abscissae XGK[1], XGK[3], ...
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

/// Result of a quadrature: value, absolute error estimate and bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl Estimate {
    pub fn zero() -> Self {
        Estimate {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
            converged: true,
        }
    }

    pub fn add(self, other: Estimate) -> Estimate {
        Estimate {
            value: self.value + other.value,
            error: self.error + other.error,
            evaluations: self.evaluations + other.evaluations,
            converged: self.converged && other.converged,
        }
    }

    pub fn scale(self, factor: f64) -> Estimate {
        Estimate {
            value: self.value * factor,
            error: self.error * factor.abs(),
            ..self
        }
    }
}

/// Tolerances for [`Quadrature::integrate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            abs_tol: 0.0,
            rel_tol: 1e-12,
            max_subdivisions: 2000,
        }
    }
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let min_err = 50.0 * f64::EPSILON * res_abs;
        if min_err > scaled {
            scaled = min_err;
        }
    }
    scaled
}

/// Single 21-point Kronrod rule on `[a, b]`; returns (value, error).
pub fn kronrod21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);
    let mut res_g = 0.0;
    let mut res_k = f_center * WGK[10];
    let mut res_abs = f_center.abs() * WGK[10];
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (f_center - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let err = (res_k - res_g) * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    (value, rescale_error(err, res_abs, res_asc))
}

impl Quadrature {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Quadrature {
            rel_tol,
            ..Default::default()
        }
    }

    /// Integrate `f` over `[a, b]` (`a > b` flips the sign).
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Estimate {
        if a == b {
            return Estimate::zero();
        }
        if a > b {
            return self.integrate(f, b, a).scale(-1.0);
        }
        let (v, e) = kronrod21(&f, a, b);
        let mut pieces = vec![Piece {
            a,
            b,
            value: v,
            error: e,
        }];
        let mut evaluations = 21;
        loop {
            let total: f64 = pieces.iter().map(|p| p.value).sum();
            let err: f64 = pieces.iter().map(|p| p.error).sum();
            let target = self.abs_tol.max(self.rel_tol * total.abs());
            if err <= target {
                return Estimate {
                    value: total,
                    error: err,
                    evaluations,
                    converged: true,
                };
            }
            if pieces.len() >= self.max_subdivisions {
                return Estimate {
                    value: total,
                    error: err,
                    evaluations,
                    converged: false,
                };
            }
            let (worst, _) = pieces
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (i, p)| {
                    if p.error > acc.1 {
                        (i, p.error)
                    } else {
                        acc
                    }
                });
            let p = pieces.swap_remove(worst);
            let mid = 0.5 * (p.a + p.b);
            if mid <= p.a || mid >= p.b {
                // interval can no longer be split in floating point
                return Estimate {
                    value: total,
                    error: err,
                    evaluations,
                    converged: false,
                };
            }
            let (v1, e1) = kronrod21(&f, p.a, mid);
            let (v2, e2) = kronrod21(&f, mid, p.b);
            evaluations += 42;
            pieces.push(Piece {
                a: p.a,
                b: mid,
                value: v1,
                error: e1,
            });
            pieces.push(Piece {
                a: mid,
                b: p.b,
                value: v2,
                error: e2,
            });
        }
    }

    /// Integrate over consecutive breakpoints, summing in order.
    pub fn integrate_points<F: Fn(f64) -> f64>(&self, f: F, points: &[f64]) -> Estimate {
        points
            .windows(2)
            .map(|w| self.integrate(&f, w[0], w[1]))
            .fold(Estimate::zero(), Estimate::add)
    }
}

/// Composite trapezoid rule on sampled data.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

/// Running trapezoid integral; first entry is zero.
pub fn cumulative_trapezoid(x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    if !x.is_empty() {
        out.push(0.0);
    }
    for i in 1..x.len() {
        acc += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
        out.push(acc);
    }
    out
}
