//! Dormand–Prince 5(4) with PI step-size control and exact output hits.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub initial_step: f64,
    pub max_steps: usize,
}

impl Default for OdeSettings {
    fn default() -> Self {
        OdeSettings {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            initial_step: 1e-4,
            max_steps: 2_000_000,
        }
    }
}

pub struct DormandPrince {
    pub settings: OdeSettings,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

impl DormandPrince {
    pub fn new(settings: OdeSettings) -> Self {
        DormandPrince { settings }
    }

    /// Integrate `y' = rhs(s, y)` from `(s0, y0)` and return the state at
    /// every entry of `outputs` (which must be non-decreasing and `>= s0`).
    pub fn solve<const N: usize, F>(
        &self,
        rhs: F,
        s0: f64,
        y0: [f64; N],
        outputs: &[f64],
    ) -> Result<Vec<[f64; N]>>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        let cfg = &self.settings;
        let mut s = s0;
        let mut y = y0;
        let mut h = cfg.initial_step;
        let mut err_prev: f64 = 1e-4;
        let mut steps = 0usize;
        let mut out = Vec::with_capacity(outputs.len());
        let mut k = [[0.0; N]; 7];
        k[0] = rhs(s, &y);
        for &target in outputs {
            if target < s {
                if (s - target) <= 1e-14 * s.abs().max(1.0) {
                    out.push(y);
                    continue;
                }
                return Err(Error::IntegrationFailure {
                    last_s: s,
                    reason: format!("output point {target} precedes the current state"),
                });
            }
            while s < target {
                steps += 1;
                if steps > cfg.max_steps {
                    return Err(Error::IntegrationFailure {
                        last_s: s,
                        reason: "step budget exhausted".into(),
                    });
                }
                let mut last = false;
                let h_free = h;
                if s + h >= target {
                    h = target - s;
                    last = true;
                }
                if h <= 1e-14 * s.abs().max(1e-300) {
                    return Err(Error::IntegrationFailure {
                        last_s: s,
                        reason: "step size underflow".into(),
                    });
                }
                for stage in 1..7 {
                    let mut ys = y;
                    for (i, yi) in ys.iter_mut().enumerate() {
                        let mut acc = 0.0;
                        for j in 0..stage {
                            acc += A[stage][j] * k[j][i];
                        }
                        *yi += h * acc;
                    }
                    k[stage] = rhs(s + C[stage] * h, &ys);
                }
                let mut y_new = y;
                let mut err = 0.0;
                for i in 0..N {
                    let mut acc = 0.0;
                    let mut eacc = 0.0;
                    for j in 0..7 {
                        acc += B[j] * k[j][i];
                        eacc += E[j] * k[j][i];
                    }
                    y_new[i] = y[i] + h * acc;
                    let sc = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y_new[i].abs());
                    let r = h * eacc / sc;
                    err += r * r;
                }
                let err = (err / N as f64).sqrt();
                if !err.is_finite() {
                    h *= 0.1;
                    continue;
                }
                if err <= 1.0 {
                    s = if last { target } else { s + h };
                    y = y_new;
                    k[0] = k[6];
                    let fac = 0.9 * err.max(1e-10).powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0);
                    err_prev = err.max(1e-4);
                    // a step clipped to hit an output keeps the controller's step
                    h = if last { h_free } else { h * fac.clamp(0.2, 5.0) };
                } else {
                    let fac = 0.9 * err.powf(-1.0 / 5.0);
                    h *= fac.clamp(0.1, 1.0);
                }
            }
            out.push(y);
        }
        Ok(out)
    }
}
