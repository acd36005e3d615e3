//! Analytic proper minimal immersions with closed-form chart data.
//!
//! Chart coordinates per entry:
//!
//! | id | chart | area element |
//! |----|-------|--------------|
//! | `totally_geodesic` | `(ρ, θ_1..θ_{m-1})`, geodesic polar about the foot point | `sn(ρ)^{m-1} Π sin^{m-1-j} θ_j` |
//! | `euclidean_cone_clifford` | `(t, a, b)`, `x = t(cos a, sin a, cos b, sin b)/√2` | `t²/2` |
//! | `euclidean_catenoid` | `(v, φ)`, `x = (cosh v cos φ, cosh v sin φ, v)` | `cosh² v` |
//! | `hyperbolic_plane_poincare` | `(ρ, θ)` as for `totally_geodesic`, position in the Poincaré ball | `sinh ρ` |
//!
//! Angles `θ_1..θ_{m-2}` range over `[0, π]`; the last angle and `a, b, φ`
//! over `[0, 2π]`. The foot point is the point of the submanifold closest to
//! the pole; `pole_offset` is its distance from the pole.
//!
//! Every entry is invariant under a group acting with codimension-one orbits
//! that preserve `r`, so surface integrals of functions of the point data
//! reduce to one-dimensional integrals over an orbit parameter `q`
//! ([`CatalogEntry::orbit`]).

use crate::error::{domain, Error, Result};
use crate::model::{sn_log_derivative, sn_unchecked, unit_sphere_volume, SpaceFormParams};
use crate::numerics::brent;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CatalogId {
    TotallyGeodesic,
    EuclideanConeClifford,
    EuclideanCatenoid,
    HyperbolicPlanePoincare,
}

impl CatalogId {
    pub const ALL: [CatalogId; 4] = [
        CatalogId::TotallyGeodesic,
        CatalogId::EuclideanConeClifford,
        CatalogId::EuclideanCatenoid,
        CatalogId::HyperbolicPlanePoincare,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CatalogId::TotallyGeodesic => "totally_geodesic",
            CatalogId::EuclideanConeClifford => "euclidean_cone_clifford",
            CatalogId::EuclideanCatenoid => "euclidean_catenoid",
            CatalogId::HyperbolicPlanePoincare => "hyperbolic_plane_poincare",
        }
    }
}

impl fmt::Display for CatalogId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CatalogId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CatalogId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown catalog id '{s}' (expected one of totally_geodesic, \
                     euclidean_cone_clifford, euclidean_catenoid, hyperbolic_plane_poincare)"
                ))
            })
    }
}

/// Closed interval of one chart coordinate (`hi` may be infinite).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoordRange {
    pub name: &'static str,
    pub lo: f64,
    pub hi: f64,
}

/// Pointwise data at a chart point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointData {
    /// Ambient coordinates: Cartesian for `k = 0`, Poincaré ball of radius `1/√k` otherwise.
    pub position: Vec<f64>,
    pub r: f64,
    pub gradr_norm: f64,
    pub lap_r: f64,
    pub ii_norm: f64,
    pub area_density: f64,
}

/// One orbit of the symmetry group, labelled by `q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitSample {
    pub q: f64,
    /// Data at any point of the orbit.
    pub point: PointData,
    /// `dr/dq` along the orbit parameter.
    pub dr_dq: f64,
    /// Area per unit `q`, so that `∫_M f = ∫ f(q) measure(q) dq`.
    pub measure: f64,
    /// `(m-1)`-volume of the orbit.
    pub level_volume: f64,
    /// `1 - |∇r|²`, computed without cancellation.
    pub tilt_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub id: CatalogId,
    pub params: SpaceFormParams,
    pub pole_offset: f64,
}

/// Instantiate a catalog entry after checking that `(id, params)` is supported.
pub fn make_entry(id: CatalogId, params: SpaceFormParams, pole_offset: f64) -> Result<CatalogEntry> {
    let SpaceFormParams { m, n, k } = params;
    let need = |ok: bool, what: &str| {
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("{id} requires {what}, got m={m}, n={n}, k={k}")))
        }
    };
    match id {
        CatalogId::TotallyGeodesic => {}
        CatalogId::EuclideanConeClifford => need(m == 3 && n == 4 && k == 0.0, "m=3, n=4, k=0")?,
        CatalogId::EuclideanCatenoid => need(m == 2 && n == 3 && k == 0.0, "m=2, n=3, k=0")?,
        CatalogId::HyperbolicPlanePoincare => need(m == 2 && n == 3 && k == 1.0, "m=2, n=3, k=1")?,
    }
    if !(pole_offset >= 0.0) || !pole_offset.is_finite() {
        return Err(Error::Config(format!("pole offset {pole_offset} must be finite and >= 0")));
    }
    let supports_offset = matches!(id, CatalogId::TotallyGeodesic | CatalogId::HyperbolicPlanePoincare);
    if pole_offset > 0.0 && !supports_offset {
        return Err(Error::Config(format!("{id} places the pole at its center; offsets are not supported")));
    }
    let entry = CatalogEntry { id, params, pole_offset };
    entry.self_check()?;
    Ok(entry)
}

impl CatalogEntry {
    pub fn m(&self) -> usize {
        self.params.m
    }

    /// Coordinate ranges of the chart.
    pub fn chart(&self) -> Vec<CoordRange> {
        let angle = |name, hi| CoordRange { name, lo: 0.0, hi };
        match self.id {
            CatalogId::TotallyGeodesic | CatalogId::HyperbolicPlanePoincare => {
                let m = self.m();
                let mut c = vec![CoordRange { name: "rho", lo: 0.0, hi: f64::INFINITY }];
                for _ in 0..m.saturating_sub(2) {
                    c.push(angle("theta", PI));
                }
                c.push(angle("theta", 2.0 * PI));
                c
            }
            CatalogId::EuclideanConeClifford => vec![
                CoordRange { name: "t", lo: 0.0, hi: f64::INFINITY },
                angle("a", 2.0 * PI),
                angle("b", 2.0 * PI),
            ],
            CatalogId::EuclideanCatenoid => vec![
                CoordRange { name: "v", lo: f64::NEG_INFINITY, hi: f64::INFINITY },
                angle("phi", 2.0 * PI),
            ],
        }
    }

    fn check_chart(&self, u: &[f64]) -> Result<()> {
        let chart = self.chart();
        if u.len() != chart.len() {
            return domain(format!(
                "{} chart points have {} coordinates, got {}",
                self.id,
                chart.len(),
                u.len()
            ));
        }
        for (x, c) in u.iter().zip(&chart) {
            if !(*x >= c.lo && *x <= c.hi) || x.is_nan() {
                return domain(format!("{} = {x} lies outside [{}, {}]", c.name, c.lo, c.hi));
            }
        }
        Ok(())
    }

    /// Radii where `∇r` vanishes somewhere on the level set.
    pub fn critical_levels(&self) -> Vec<f64> {
        match self.id {
            CatalogId::EuclideanCatenoid => vec![1.0],
            CatalogId::TotallyGeodesic | CatalogId::HyperbolicPlanePoincare if self.pole_offset > 0.0 => {
                vec![self.pole_offset]
            }
            _ => vec![],
        }
    }

    /// Smallest value of `r` on the submanifold.
    pub fn min_radius(&self) -> f64 {
        match self.id {
            CatalogId::EuclideanCatenoid => 1.0,
            _ => self.pole_offset,
        }
    }

    /// True when every level set is a single orbit on which `|∇r| ≡ 1`.
    pub fn is_cone_like(&self) -> bool {
        match self.id {
            CatalogId::EuclideanConeClifford => true,
            CatalogId::TotallyGeodesic | CatalogId::HyperbolicPlanePoincare => self.pole_offset == 0.0,
            CatalogId::EuclideanCatenoid => false,
        }
    }

    /// Pointwise data at chart point `u`.
    pub fn evaluate(&self, u: &[f64]) -> Result<PointData> {
        self.check_chart(u)?;
        match self.id {
            CatalogId::TotallyGeodesic | CatalogId::HyperbolicPlanePoincare => {
                let mut p = self.geodesic_radial(u[0])?;
                p.position = self.geodesic_position(u);
                p.area_density *= angular_density(&u[1..]);
                Ok(p)
            }
            CatalogId::EuclideanConeClifford => {
                let mut p = self.cone_radial(u[0])?;
                let t = u[0] / SQRT_2;
                p.position = vec![t * u[1].cos(), t * u[1].sin(), t * u[2].cos(), t * u[2].sin()];
                Ok(p)
            }
            CatalogId::EuclideanCatenoid => {
                let mut p = catenoid_radial(u[0]);
                let c = u[0].cosh();
                p.position = vec![c * u[1].cos(), c * u[1].sin(), u[0]];
                Ok(p)
            }
        }
    }

    // Data for the totally geodesic slice, as a function of ρ.
    fn geodesic_radial(&self, rho: f64) -> Result<PointData> {
        let m = self.params.mf();
        let k = self.params.k;
        let d = self.pole_offset;
        let r = geodesic_distance(rho, d, k);
        let area_density = sn_unchecked(rho, k).powi(self.m() as i32 - 1);
        if r == 0.0 {
            // pole on the submanifold: |∇r| → 1 along rays, Δr ~ (m-1)/r
            return Ok(PointData {
                position: vec![],
                r,
                gradr_norm: 1.0,
                lap_r: f64::INFINITY,
                ii_norm: 0.0,
                area_density,
            });
        }
        let grad = geodesic_gradient(rho, d, k, r);
        let lap_r = if rho == 0.0 {
            // foot point with d > 0: Hess r restricted to the slice is (sn'/sn)(d) g
            m * sn_log_derivative(d, k)
        } else {
            let r2 = sn_log_derivative(r, k) * (1.0 - grad * grad);
            r2 + (m - 1.0) * sn_log_derivative(rho, k) * grad
        };
        Ok(PointData {
            position: vec![],
            r,
            gradr_norm: grad,
            lap_r,
            ii_norm: 0.0,
            area_density,
        })
    }

    fn geodesic_position(&self, u: &[f64]) -> Vec<f64> {
        let n = self.params.n;
        let m = self.m();
        let k = self.params.k;
        let d = self.pole_offset;
        let dir = sphere_point(&u[1..]);
        let mut x = vec![0.0; n];
        if k == 0.0 {
            for i in 0..m {
                x[i] = u[0] * dir[i];
            }
            x[m] = d;
        } else {
            // hyperboloid (cosh d cosh ρ, sinh ρ ω, sinh d cosh ρ)/K projected to the ball
            let kk = k.sqrt();
            let (sr, cr) = ((kk * u[0]).sinh(), (kk * u[0]).cosh());
            let denom = kk * (1.0 + (kk * d).cosh() * cr);
            for i in 0..m {
                x[i] = sr * dir[i] / denom;
            }
            x[m] = (kk * d).sinh() * cr / denom;
        }
        x
    }

    fn cone_radial(&self, t: f64) -> Result<PointData> {
        if t == 0.0 {
            return Err(Error::PoleSingularity("the cone vertex is the pole".into()));
        }
        Ok(PointData {
            position: vec![],
            r: t,
            gradr_norm: 1.0,
            lap_r: 2.0 / t,
            ii_norm: SQRT_2 / t,
            area_density: t * t / 2.0,
        })
    }

    /// Range of the orbit parameter `q`.
    ///
    /// For the catenoid the two halves `v ≷ 0` are exchanged by a reflection
    /// fixing the pole, so `q = |v|` and the measure counts both halves.
    pub fn orbit_range(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }

    /// The orbit labelled `q`.
    pub fn orbit(&self, q: f64) -> Result<OrbitSample> {
        if !(q >= 0.0) {
            return domain(format!("orbit parameter {q} must be >= 0"));
        }
        let k = self.params.k;
        let mut point = match self.id {
            CatalogId::TotallyGeodesic | CatalogId::HyperbolicPlanePoincare => {
                self.geodesic_radial(q)?
            }
            CatalogId::EuclideanConeClifford => self.cone_radial(q)?,
            CatalogId::EuclideanCatenoid => catenoid_radial(q),
        };
        let (measure, level_volume, dr_dq) = match self.id {
            CatalogId::TotallyGeodesic | CatalogId::HyperbolicPlanePoincare => {
                let v = unit_sphere_volume(self.m() - 1) * sn_unchecked(q, k).powi(self.m() as i32 - 1);
                (v, v, point.gradr_norm)
            }
            CatalogId::EuclideanConeClifford => {
                let v = 2.0 * PI * PI * q * q;
                (v, v, 1.0)
            }
            CatalogId::EuclideanCatenoid => {
                let c = q.cosh();
                let r = point.r;
                (4.0 * PI * c * c, 4.0 * PI * c, (c * q.sinh() + q) / r)
            }
        };
        point.position = match self.id {
            CatalogId::EuclideanConeClifford => {
                let t = q / SQRT_2;
                vec![t, 0.0, t, 0.0]
            }
            CatalogId::EuclideanCatenoid => vec![q.cosh(), 0.0, q],
            _ => {
                let mut u = vec![q];
                u.extend(std::iter::repeat(0.0).take(self.m() - 1));
                if self.m() >= 3 {
                    // θ_1 = π/2 keeps the sample off the polar axis
                    u[1] = PI / 2.0;
                }
                self.geodesic_position(&u)
            }
        };
        let tilt_defect = match self.id {
            CatalogId::TotallyGeodesic | CatalogId::HyperbolicPlanePoincare => {
                let (d, r) = (self.pole_offset, point.r);
                if r == 0.0 {
                    0.0
                } else {
                    // 1 - r'² = sn(d)²/sn(r)²
                    crate::model::sn_ratio(d, r, k).powi(2).min(1.0)
                }
            }
            CatalogId::EuclideanConeClifford => 0.0,
            CatalogId::EuclideanCatenoid => catenoid_tilt_defect(q),
        };
        Ok(OrbitSample { q, point, dr_dq, measure, level_volume, tilt_defect })
    }

    /// Orbit parameter of the level set `r = s` (`None` below the minimal radius).
    pub fn orbit_of_radius(&self, s: f64) -> Option<f64> {
        let lo = self.min_radius();
        if !(s >= lo) {
            return None;
        }
        let k = self.params.k;
        let d = self.pole_offset;
        Some(match self.id {
            CatalogId::TotallyGeodesic | CatalogId::HyperbolicPlanePoincare => {
                if k == 0.0 {
                    ((s - d) * (s + d)).sqrt()
                } else {
                    // cosh(Kρ) - 1 = 2 sinh(K(s+d)/2) sinh(K(s-d)/2)/cosh(Kd)
                    let kk = k.sqrt();
                    let e = 2.0 * (kk * (s + d) / 2.0).sinh() * (kk * (s - d) / 2.0).sinh()
                        / (kk * d).cosh();
                    acosh1p(e) / kk
                }
            }
            CatalogId::EuclideanConeClifford => s,
            CatalogId::EuclideanCatenoid => {
                if s == 1.0 {
                    0.0
                } else {
                    // cosh² v + v² - s², with cosh² v - 1 = sinh² v
                    let f = |v: f64| v.sinh().powi(2) + v * v - (s - 1.0) * (s + 1.0);
                    brent(f, 0.0, s.acosh().max(1e-300), 1e-15 * s.acosh().max(1.0)).ok()?
                }
            }
        })
    }

    /// Relative residual of the minimality identity for `Δr`.
    ///
    /// Euclidean entries compare against `(m - |∇r|²)/r`; totally geodesic
    /// entries against `(sn'/sn)(r)(m - |∇r|²)`, the Hessian comparison
    /// bound which they attain.
    pub fn minimality_residual(&self, u: &[f64]) -> Result<f64> {
        let p = self.evaluate(u)?;
        let target = self.hessian_comparison_bound(&p);
        if p.lap_r.is_infinite() && target.is_infinite() {
            return Ok(0.0);
        }
        Ok((p.lap_r - target).abs() / p.lap_r.abs().max(target.abs()).max(1e-300))
    }

    /// `(sn'/sn)(r)(m - |∇r|²)`, the lower bound for `Δr`.
    pub fn hessian_comparison_bound(&self, p: &PointData) -> f64 {
        if p.r == 0.0 {
            return f64::INFINITY;
        }
        sn_log_derivative(p.r, self.params.k) * (self.params.mf() - p.gradr_norm * p.gradr_norm)
    }

    // chart samples used to validate a fresh entry
    fn self_check(&self) -> Result<()> {
        let q_samples = [0.3, 1.0, 2.5, 7.0];
        for q in q_samples {
            let u = self.sample_point(q);
            let p = self.evaluate(&u)?;
            let res = self.minimality_residual(&u)?;
            if !(p.gradr_norm >= -1e-12 && p.gradr_norm <= 1.0 + 1e-12) || res > 1e-8 {
                return Err(Error::Config(format!(
                    "{} failed its consistency check at {u:?}: |∇r| = {}, residual = {res}",
                    self.id, p.gradr_norm
                )));
            }
        }
        Ok(())
    }

    /// A chart point with radial coordinate `q` and generic angles.
    pub fn sample_point(&self, q: f64) -> Vec<f64> {
        let mut u = vec![q];
        for c in self.chart().iter().skip(1) {
            u.push(0.37 * c.hi);
        }
        u
    }
}

// acosh(1 + e) without cancellation for small e
fn acosh1p(e: f64) -> f64 {
    (e + (e * (e + 2.0)).sqrt()).ln_1p()
}

/// Ambient distance from the pole to the slice point at intrinsic distance
/// `rho` from the foot point, which is itself at distance `d` from the pole.
pub fn geodesic_distance(rho: f64, d: f64, k: f64) -> f64 {
    if k == 0.0 {
        return rho.hypot(d);
    }
    let kk = k.sqrt();
    let (a, b) = (kk * rho, kk * d);
    let sa = (a / 2.0).sinh();
    let sb = (b / 2.0).sinh();
    // cosh a cosh b - 1
    let e = 2.0 * sa * sa * b.cosh() + 2.0 * sb * sb;
    acosh1p(e) / kk
}

fn geodesic_gradient(rho: f64, d: f64, k: f64, r: f64) -> f64 {
    let g = if k == 0.0 {
        rho / r
    } else {
        let kk = k.sqrt();
        (kk * d).cosh() * crate::model::sn_ratio(rho, r, k)
    };
    g.clamp(0.0, 1.0)
}

fn catenoid_radial(v: f64) -> PointData {
    let c = v.cosh();
    let sh = v.sinh();
    let r = (c * c + v * v).sqrt();
    let rv = (c * sh + v) / r;
    let grad = (rv / c).abs().min(1.0);
    // conformal chart: Δr = r_vv / cosh² v
    let rvv = (2.0 * c * c - rv * rv) / r;
    PointData {
        position: vec![],
        r,
        gradr_norm: grad,
        lap_r: rvv / (c * c),
        ii_norm: SQRT_2 / (c * c),
        area_density: c * c,
    }
}

/// `1 - |∇r|²` on the catenoid without cancellation.
pub fn catenoid_tilt_defect(v: f64) -> f64 {
    let c = v.cosh();
    let r2 = c * c + v * v;
    let num = c - v * v.sinh();
    num * num / (c * c * r2)
}

// unit vector in R^m from hyperspherical angles (θ_1..θ_{m-2} ∈ [0,π], θ_{m-1} ∈ [0,2π])
fn sphere_point(angles: &[f64]) -> Vec<f64> {
    let m = angles.len() + 1;
    let mut x = vec![0.0; m];
    let mut prod = 1.0;
    for (i, a) in angles.iter().enumerate() {
        if i + 1 == angles.len() {
            x[i] = prod * a.cos();
            x[i + 1] = prod * a.sin();
        } else {
            x[i] = prod * a.cos();
            prod *= a.sin();
        }
    }
    x
}

// angular part of the polar area element
fn angular_density(angles: &[f64]) -> f64 {
    let m = angles.len() + 1;
    angles
        .iter()
        .take(angles.len().saturating_sub(1))
        .enumerate()
        .map(|(j, a)| a.sin().powi((m - 2 - j) as i32))
        .product()
}

/// Euclidean and hyperbolic data at a point of the Poincaré-ball entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformalData {
    pub position: [f64; 3],
    /// `λ = (1 - |x|²)/2`.
    pub lambda: f64,
    /// Euclidean unit normal.
    pub normal: [f64; 3],
    /// `|ĪI|²` of the Euclidean cap.
    pub euclidean_ii_sq: f64,
    /// `λ^{-2}|II|²` with `II` the hyperbolic second fundamental form.
    pub hyperbolic_term: f64,
    /// `m (N·∇ log λ)²`.
    pub normal_gradient_term: f64,
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Both sides of the conformal second-fundamental-form identity at `u = (ρ, θ)`.
///
/// The Euclidean side uses the fact that the slice is a round cap of radius
/// `(1/e - e)/2`, `e = tanh(d/2)`, orthogonal to the unit sphere (a flat disc
/// when `d = 0`). The normal side is computed from chart derivatives.
pub fn conformal_data(entry: &CatalogEntry, u: &[f64]) -> Result<ConformalData> {
    if entry.id != CatalogId::HyperbolicPlanePoincare {
        return Err(Error::Capability(format!(
            "{} does not live in the Poincaré ball",
            entry.id
        )));
    }
    entry.check_chart(u)?;
    let (rho, theta) = (u[0], u[1]);
    let d = entry.pole_offset;
    let (s, c) = (d.sinh(), d.cosh());
    let (sr, cr) = (rho.sinh(), rho.cosh());
    let (st, ct) = (theta.sin(), theta.cos());
    let den = 1.0 + c * cr;
    let x = [sr * ct / den, sr * st / den, s * cr / den];
    let norm2 = dot(x, x);
    if !(norm2 < 1.0) {
        return domain(format!("|x|² = {norm2} is not inside the open unit ball"));
    }
    // den² - |den x|² = 2 den, so λ = 1/den exactly
    let lambda = 1.0 / den;
    let dden = c * sr;
    let x_rho = [
        (cr * ct * den - sr * ct * dden) / (den * den),
        (cr * st * den - sr * st * dden) / (den * den),
        (s * sr * den - s * cr * dden) / (den * den),
    ];
    let x_theta_unit = [-st / den, ct / den, 0.0];
    let nvec = cross(x_rho, x_theta_unit);
    let nn = dot(nvec, nvec).sqrt();
    let normal = [nvec[0] / nn, nvec[1] / nn, nvec[2] / nn];

    let euclidean_ii_sq = if d == 0.0 {
        0.0
    } else {
        let e = (d / 2.0).tanh();
        let radius = (1.0 / e - e) / 2.0;
        2.0 / (radius * radius)
    };
    let p = entry.evaluate(u)?;
    let hyperbolic_term = p.ii_norm * p.ii_norm / (lambda * lambda);
    // ∇_E log λ = -x/λ
    let ndot = dot(normal, x) / lambda;
    let normal_gradient_term = 2.0 * ndot * ndot;
    Ok(ConformalData {
        position: x,
        lambda,
        normal,
        euclidean_ii_sq,
        hyperbolic_term,
        normal_gradient_term,
    })
}

/// `|ĪI|² - λ^{-2}|II|² - m|∇^⊥ log λ|²` at `u`.
pub fn conformal_identity_residual(entry: &CatalogEntry, u: &[f64]) -> Result<f64> {
    let c = conformal_data(entry, u)?;
    Ok(c.euclidean_ii_sq - c.hyperbolic_term - c.normal_gradient_term)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            let dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                let dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
                x[i] = z;
                w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
                break;
            }
        }
    }
    (x, w)
}

/// Integrate `f(point)` over the full chart with `q` in `[q_lo, q_hi]`,
/// using a tensor rule: Gauss–Legendre in `q` and in polar angles, the
/// trapezoid rule in periodic angles. Independent of the orbit reduction.
pub fn chart_integral<F: Fn(&PointData) -> f64>(
    entry: &CatalogEntry,
    f: F,
    q_lo: f64,
    q_hi: f64,
    radial_nodes: usize,
    angular_nodes: usize,
) -> Result<f64> {
    let chart = entry.chart();
    let (gx, gw) = gauss_legendre(radial_nodes);
    let (ax, aw) = gauss_legendre(angular_nodes);
    let mut axes: Vec<Vec<(f64, f64)>> = Vec::new();
    for c in chart.iter().skip(1) {
        if (c.hi - 2.0 * PI).abs() < 1e-15 {
            let h = 2.0 * PI / angular_nodes as f64;
            axes.push((0..angular_nodes).map(|i| ((i as f64 + 0.5) * h, h)).collect());
        } else {
            axes.push(
                ax.iter()
                    .zip(&aw)
                    .map(|(x, w)| ((x + 1.0) * c.hi / 2.0, w * c.hi / 2.0))
                    .collect(),
            );
        }
    }
    let mut total = 0.0;
    let half = (q_hi - q_lo) / 2.0;
    let mid = (q_hi + q_lo) / 2.0;
    let both_halves = entry.id == CatalogId::EuclideanCatenoid;
    for (gxi, gwi) in gx.iter().zip(&gw) {
        let q = mid + half * gxi;
        let signs: &[f64] = if both_halves { &[1.0, -1.0] } else { &[1.0] };
        for sign in signs {
            let mut idx = vec![0usize; axes.len()];
            loop {
                let mut u = vec![sign * q];
                let mut weight = gwi * half;
                for (a, i) in axes.iter().zip(&idx) {
                    u.push(a[*i].0);
                    weight *= a[*i].1;
                }
                let p = entry.evaluate(&u)?;
                total += weight * p.area_density * f(&p);
                // odometer increment
                let mut j = 0;
                while j < idx.len() {
                    idx[j] += 1;
                    if idx[j] < axes[j].len() {
                        break;
                    }
                    idx[j] = 0;
                    j += 1;
                }
                if j == idx.len() {
                    break;
                }
            }
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn entry(id: CatalogId, m: usize, n: usize, k: f64, d: f64) -> CatalogEntry {
        make_entry(id, SpaceFormParams::new(m, n, k).unwrap(), d).unwrap()
    }

    #[test]
    fn ids_round_trip() {
        for id in CatalogId::ALL {
            assert_eq!(id.as_str().parse::<CatalogId>().unwrap(), id);
        }
        assert!(matches!("sphere".parse::<CatalogId>(), Err(Error::Config(_))));
    }

    #[test]
    fn unsupported_combinations_rejected() {
        let p = SpaceFormParams::new(2, 3, 1.0).unwrap();
        assert!(matches!(make_entry(CatalogId::EuclideanCatenoid, p, 0.0), Err(Error::Config(_))));
        assert!(matches!(
            make_entry(CatalogId::EuclideanConeClifford, p, 0.0),
            Err(Error::Config(_))
        ));
        let e = SpaceFormParams::new(2, 3, 0.0).unwrap();
        assert!(make_entry(CatalogId::HyperbolicPlanePoincare, e, 0.0).is_err());
        assert!(make_entry(CatalogId::EuclideanCatenoid, e, 0.5).is_err());
        assert!(make_entry(CatalogId::TotallyGeodesic, e, -1.0).is_err());
    }

    #[test]
    fn flat_plane_through_pole() {
        let e = entry(CatalogId::TotallyGeodesic, 2, 3, 0.0, 0.0);
        let p = e.evaluate(&[3.0, 1.0]).unwrap();
        assert_relative_eq!(p.r, 3.0);
        assert_relative_eq!(p.gradr_norm, 1.0);
        assert_relative_eq!(p.lap_r, 1.0 / 3.0, max_relative = 1e-15);
        assert_eq!(p.position[2], 0.0);
        assert!(e.critical_levels().is_empty());
    }

    #[test]
    fn pole_on_plane_reports_infinite_laplacian() {
        let e = entry(CatalogId::TotallyGeodesic, 2, 3, 1.0, 0.0);
        let p = e.evaluate(&[0.0, 0.0]).unwrap();
        assert_eq!(p.r, 0.0);
        assert!(p.lap_r.is_infinite());
    }

    #[test]
    fn hyperbolic_slice_through_pole() {
        for m in [2, 3, 4] {
            let e = entry(CatalogId::TotallyGeodesic, m, m + 1, 1.0, 0.0);
            for rho in [0.1, 1.0, 5.0, 30.0] {
                let p = e.evaluate(&e.sample_point(rho)).unwrap();
                assert_relative_eq!(p.r, rho, max_relative = 1e-14);
                assert_relative_eq!(p.gradr_norm, 1.0);
                let expect = (m as f64 - 1.0) / rho.tanh();
                assert_relative_eq!(p.lap_r, expect, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn offset_slice_matches_finite_differences() {
        for k in [0.0, 1.0, 0.25] {
            let e = entry(CatalogId::TotallyGeodesic, 3, 5, k, 0.8);
            let r = |rho: f64| geodesic_distance(rho, 0.8, k);
            for rho in [0.2, 1.3, 4.0] {
                let h = 1e-4;
                let d1 = (r(rho + h) - r(rho - h)) / (2.0 * h);
                let d2 = (r(rho + h) - 2.0 * r(rho) + r(rho - h)) / (h * h);
                let lap = d2 + 2.0 * sn_log_derivative(rho, k) * d1;
                let p = e.evaluate(&e.sample_point(rho)).unwrap();
                assert_relative_eq!(p.gradr_norm, d1, max_relative = 1e-8);
                assert_relative_eq!(p.lap_r, lap, max_relative = 1e-5);
            }
            assert_eq!(e.critical_levels(), vec![0.8]);
            // ambient distance of the position from the pole
            let p = e.evaluate(&[2.0, 1.0, 4.0]).unwrap();
            let x2: f64 = p.position.iter().map(|v| v * v).sum();
            let dist = if k == 0.0 {
                x2.sqrt()
            } else {
                let kk = k.sqrt();
                2.0 * (kk * x2.sqrt()).atanh() / kk
            };
            assert_relative_eq!(dist, p.r, max_relative = 1e-12);
        }
    }

    #[test]
    fn poincare_offset_closest_point() {
        let e = entry(CatalogId::HyperbolicPlanePoincare, 2, 3, 1.0, 0.5);
        let p = e.evaluate(&[0.0, 0.0]).unwrap();
        let x = p.position[2];
        assert_relative_eq!(2.0 * x.atanh(), 0.5, max_relative = 1e-14);
        assert_relative_eq!(p.r, 0.5, max_relative = 1e-14);
        assert_eq!(p.gradr_norm, 0.0);
        // every other point is farther and lies on the orthogonal cap
        let ee = (0.25f64).tanh();
        let (c, rs) = ((ee + 1.0 / ee) / 2.0, (1.0 / ee - ee) / 2.0);
        for rho in [0.3, 2.0, 6.0] {
            let q = e.evaluate(&[rho, 2.0]).unwrap();
            assert!(q.r > 0.5);
            let dz = q.position[2] - c;
            let dist = (q.position[0].powi(2) + q.position[1].powi(2) + dz * dz).sqrt();
            assert_relative_eq!(dist, rs, max_relative = 1e-12);
        }
    }

    #[test]
    fn clifford_cone_data() {
        let e = entry(CatalogId::EuclideanConeClifford, 3, 4, 0.0, 0.0);
        for s in [0.5, 2.0, 10.0] {
            let p = e.evaluate(&[s, 0.3, 1.9]).unwrap();
            assert_relative_eq!(p.gradr_norm, 1.0);
            assert_relative_eq!(p.ii_norm, SQRT_2 / s, max_relative = 1e-15);
            let norm: f64 = p.position.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert_relative_eq!(norm, s, max_relative = 1e-15);
            assert!(e.minimality_residual(&[s, 0.3, 1.9]).unwrap() < 1e-14);
        }
        assert!(matches!(e.evaluate(&[0.0, 0.0, 0.0]), Err(Error::PoleSingularity(_))));
    }

    #[test]
    fn clifford_cone_second_fundamental_form_from_link() {
        // torus x = (cos a, sin a, cos b, sin b)/√2 in S³ has principal curvatures ±1
        let e = entry(CatalogId::EuclideanConeClifford, 3, 4, 0.0, 0.0);
        let s = 3.0;
        let (a, b): (f64, f64) = (0.4, 1.1);
        let h = 1e-3;
        let x = |t: f64, a: f64, b: f64| {
            let c = t / SQRT_2;
            [c * a.cos(), c * a.sin(), c * b.cos(), c * b.sin()]
        };
        // unit normal of the cone: (cos a, sin a, -cos b, -sin b)/√2
        let nrm = [a.cos() / SQRT_2, a.sin() / SQRT_2, -b.cos() / SQRT_2, -b.sin() / SQRT_2];
        let second = |da: f64, db: f64| {
            let p = x(s, a + da, b + db);
            let q = x(s, a - da, b - db);
            let o = x(s, a, b);
            (0..4).map(|i| (p[i] - 2.0 * o[i] + q[i]) * nrm[i]).sum::<f64>() / (h * h)
        };
        // metric on the link directions: |x_a|² = |x_b|² = s²/2
        let haa = second(h, 0.0) / (s * s / 2.0);
        let hbb = second(0.0, h) / (s * s / 2.0);
        let norm = (haa * haa + hbb * hbb).sqrt();
        let p = e.evaluate(&[s, a, b]).unwrap();
        assert_relative_eq!(norm, p.ii_norm, max_relative = 1e-6);
    }

    #[test]
    fn catenoid_neck_is_critical() {
        let e = entry(CatalogId::EuclideanCatenoid, 2, 3, 0.0, 0.0);
        let p = e.evaluate(&[0.0, 0.7]).unwrap();
        assert_relative_eq!(p.r, 1.0);
        assert_eq!(p.gradr_norm, 0.0);
        assert_eq!(e.critical_levels(), vec![1.0]);
        // symbolic derivative of r(v) = √(cosh² v + v²) against finite differences
        let r = |v: f64| (v.cosh().powi(2) + v * v).sqrt();
        for v in [-2.0, 0.3, 1.5, 4.0] {
            let h = 1e-5;
            let rv = (r(v + h) - r(v - h)) / (2.0 * h);
            let p = e.evaluate(&[v, 0.0]).unwrap();
            assert_relative_eq!(p.gradr_norm, rv.abs() / v.cosh(), max_relative = 1e-8);
            assert_relative_eq!(1.0 - p.gradr_norm.powi(2), catenoid_tilt_defect(v), max_relative = 1e-8);
        }
    }

    #[test]
    fn minimality_residuals_small() {
        let entries = [
            entry(CatalogId::TotallyGeodesic, 2, 3, 0.0, 0.0),
            entry(CatalogId::TotallyGeodesic, 3, 5, 0.0, 1.5),
            entry(CatalogId::TotallyGeodesic, 4, 5, 1.0, 0.7),
            entry(CatalogId::EuclideanConeClifford, 3, 4, 0.0, 0.0),
            entry(CatalogId::EuclideanCatenoid, 2, 3, 0.0, 0.0),
            entry(CatalogId::HyperbolicPlanePoincare, 2, 3, 1.0, 0.5),
        ];
        for e in &entries {
            for q in [0.01, 0.5, 1.0, 3.0, 12.0] {
                let u = e.sample_point(q);
                let res = e.minimality_residual(&u).unwrap();
                assert!(res <= 1e-8, "{} q={q}: {res}", e.id);
                let p = e.evaluate(&u).unwrap();
                assert!((0.0..=1.0).contains(&p.gradr_norm));
                assert!(p.area_density > 0.0);
                assert!(p.lap_r >= e.hessian_comparison_bound(&p) * (1.0 - 1e-10));
            }
        }
    }

    #[test]
    fn chart_bounds_enforced() {
        let e = entry(CatalogId::EuclideanCatenoid, 2, 3, 0.0, 0.0);
        assert!(e.evaluate(&[0.0, 7.0]).is_err());
        assert!(e.evaluate(&[0.0]).is_err());
        let t = entry(CatalogId::TotallyGeodesic, 3, 4, 0.0, 0.0);
        assert!(t.evaluate(&[-1.0, 0.0, 0.0]).is_err());
        assert!(t.evaluate(&[1.0, 4.0, 0.0]).is_err());
    }

    #[test]
    fn conformal_identity_on_equatorial_disc() {
        let e = entry(CatalogId::HyperbolicPlanePoincare, 2, 3, 1.0, 0.0);
        for rho in [0.1, 2.0, 8.0] {
            let c = conformal_data(&e, &[rho, 1.0]).unwrap();
            assert_eq!(c.euclidean_ii_sq, 0.0);
            assert!(c.normal_gradient_term.abs() < 1e-24);
            assert!(conformal_identity_residual(&e, &[rho, 1.0]).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn conformal_identity_on_offset_cap() {
        let e = entry(CatalogId::HyperbolicPlanePoincare, 2, 3, 1.0, 0.5);
        for rho in [0.0, 0.4, 1.5, 3.0, 6.0] {
            for theta in [0.0, 1.0, 4.0] {
                let res = conformal_identity_residual(&e, &[rho, theta]).unwrap();
                assert!(res.abs() <= 1e-6, "rho={rho}: {res}");
            }
        }
    }

    #[test]
    fn conformal_identity_near_boundary() {
        let e = entry(CatalogId::HyperbolicPlanePoincare, 2, 3, 1.0, 0.5);
        let target = 1.0 - 1e-3;
        let rho = brent(
            |r| {
                let c = conformal_data(&e, &[r, 0.5]).unwrap();
                dot(c.position, c.position).sqrt() - target
            },
            1.0,
            20.0,
            1e-14,
        )
        .unwrap();
        let c = conformal_data(&e, &[rho, 0.5]).unwrap();
        assert!(c.lambda < 1.1e-3);
        let res = conformal_identity_residual(&e, &[rho, 0.5]).unwrap();
        assert!(res.abs() <= 1e-6, "{res}");
    }

    #[test]
    fn conformal_check_rejects_other_entries() {
        let e = entry(CatalogId::TotallyGeodesic, 2, 3, 1.0, 0.0);
        assert!(matches!(conformal_identity_residual(&e, &[1.0, 0.0]), Err(Error::Capability(_))));
    }

    #[test]
    fn orbit_inversion() {
        let entries = [
            entry(CatalogId::TotallyGeodesic, 2, 3, 0.0, 0.7),
            entry(CatalogId::TotallyGeodesic, 3, 4, 1.0, 0.7),
            entry(CatalogId::EuclideanConeClifford, 3, 4, 0.0, 0.0),
            entry(CatalogId::EuclideanCatenoid, 2, 3, 0.0, 0.0),
        ];
        for e in &entries {
            for s in [1.0 + 1e-9, 1.2, 3.0, 40.0] {
                let q = e.orbit_of_radius(s).unwrap();
                let o = e.orbit(q).unwrap();
                assert_relative_eq!(o.point.r, s, max_relative = 1e-12);
                let g = o.point.gradr_norm;
                assert!((1.0 - g * g - o.tilt_defect).abs() < 1e-12);
            }
            assert!(e.orbit_of_radius(e.min_radius() * 0.5).is_none() || e.min_radius() == 0.0);
        }
    }

    #[test]
    fn orbit_measure_matches_chart_integral() {
        // area of {q ∈ [a, b]} by orbit reduction vs tensor quadrature over the chart
        let entries = [
            entry(CatalogId::TotallyGeodesic, 2, 3, 1.0, 0.3),
            entry(CatalogId::TotallyGeodesic, 3, 4, 0.0, 0.0),
            entry(CatalogId::EuclideanConeClifford, 3, 4, 0.0, 0.0),
            entry(CatalogId::EuclideanCatenoid, 2, 3, 0.0, 0.0),
        ];
        let quad = crate::numerics::Quadrature::default();
        for e in &entries {
            let f = |p: &PointData| p.gradr_norm * p.r;
            let reduced = quad
                .integrate(|q| {
                    let o = e.orbit(q).unwrap();
                    f(&o.point) * o.measure
                }, 0.2, 2.0)
                .value;
            let chart = chart_integral(e, f, 0.2, 2.0, 40, 24).unwrap();
            assert_relative_eq!(reduced, chart, max_relative = 1e-10);
        }
    }

    #[test]
    fn gauss_legendre_exactness() {
        let (x, w) = gauss_legendre(6);
        let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
        assert_relative_eq!(integral, 2.0 / 11.0, max_relative = 1e-14);
    }
}
