//! Radial profiles Θ, J, J̄, T, E of catalog entries and the level-set
//! quadrature behind them.
//!
//! All integrals go through the orbit reduction of
//! [`CatalogEntry::orbit`]: a volume integral over `{r ≤ s}` becomes an
//! integral over the orbit parameter `q`, and a level-set integral over
//! `Γ_s` becomes a single orbit evaluation. Volume integrals are smooth in
//! `q` even across critical levels, which is why Θ, J̄ and E use them.

use crate::catalog::{CatalogEntry, CatalogId, OrbitSample, PointData};
use crate::error::{Error, Result};
use crate::model::{ball_volume_unchecked, sphere_volume_unchecked, Grid, SpaceFormParams};
use crate::numerics::{Estimate, Quadrature};
use crate::table::CsvTable;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const PROFILE_SCHEMA: &str = "densitylab.profile";
pub const PROFILE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileOptions {
    /// Level integrals closer than this to a critical level are refused.
    pub exclusion_radius: f64,
    /// Relative tolerance of the adaptive quadrature.
    pub rel_tol: f64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions { exclusion_radius: 1e-3, rel_tol: 1e-12 }
    }
}

impl ProfileOptions {
    fn quadrature(&self) -> Quadrature {
        Quadrature { abs_tol: 0.0, rel_tol: self.rel_tol, max_subdivisions: 2000 }
    }
}

/// Integrand of a level-set integral over `Γ_s`.
#[derive(Clone, Copy)]
pub enum LevelIntegrand<'a> {
    One,
    Gradr,
    OneOverGradr,
    LapROverGradr,
    Custom(&'a (dyn Fn(&PointData) -> f64 + Sync)),
}

impl LevelIntegrand<'_> {
    fn eval(&self, p: &PointData) -> f64 {
        match self {
            LevelIntegrand::One => 1.0,
            LevelIntegrand::Gradr => p.gradr_norm,
            LevelIntegrand::OneOverGradr => 1.0 / p.gradr_norm,
            LevelIntegrand::LapROverGradr => p.lap_r / p.gradr_norm,
            LevelIntegrand::Custom(f) => f(p),
        }
    }
}

fn check_radius(s: f64) -> Result<()> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Domain(format!("radius s = {s} must be positive")));
    }
    Ok(())
}

fn guard_critical(entry: &CatalogEntry, s: f64, radius: f64) -> Result<()> {
    for level in entry.critical_levels() {
        if (s - level).abs() < radius {
            return Err(Error::CriticalLevel { s, level, radius });
        }
    }
    Ok(())
}

// rounding-level error attached to closed-form orbit evaluations
const ORBIT_REL_ERR: f64 = 1e-14;

/// `∫_{Γ_s} integrand` with the default options.
pub fn level_integral(entry: &CatalogEntry, s: f64, integrand: LevelIntegrand) -> Result<Estimate> {
    level_integral_with(entry, s, integrand, &ProfileOptions::default())
}

pub fn level_integral_with(
    entry: &CatalogEntry,
    s: f64,
    integrand: LevelIntegrand,
    opts: &ProfileOptions,
) -> Result<Estimate> {
    check_radius(s)?;
    guard_critical(entry, s, opts.exclusion_radius)?;
    let Some(q) = entry.orbit_of_radius(s) else {
        return Ok(Estimate::zero());
    };
    let o = entry.orbit(q)?;
    let value = integrand.eval(&o.point) * o.level_volume;
    Ok(Estimate { value, error: ORBIT_REL_ERR * value.abs(), evaluations: 1, converged: true })
}

/// `∫_{Γ_σ} f/|∇r|`, the coarea density of `∫ f` at `σ`.
fn coarea_density(entry: &CatalogEntry, f: &(dyn Fn(&PointData) -> f64 + Sync), sigma: f64) -> f64 {
    let Some(q) = entry.orbit_of_radius(sigma) else {
        return 0.0;
    };
    let Ok(o) = entry.orbit(q) else {
        return 0.0;
    };
    if o.point.gradr_norm == 0.0 {
        return 0.0;
    }
    f(&o.point) * o.level_volume / o.point.gradr_norm
}

/// `∫_t^s [∫_{Γ_σ} f/|∇r|] dσ`, removing the inverse-square-root singularity
/// at critical levels with `σ = c ± w²`.
pub fn coarea_integral(
    entry: &CatalogEntry,
    f: &(dyn Fn(&PointData) -> f64 + Sync),
    t: f64,
    s: f64,
    opts: &ProfileOptions,
) -> Estimate {
    let lo = t.max(entry.min_radius());
    if lo >= s {
        return Estimate::zero();
    }
    let crit = entry.critical_levels();
    let mut cuts = vec![lo];
    for &c in &crit {
        if c > lo && c < s {
            cuts.push(c);
        }
    }
    cuts.push(s);
    let is_crit = |x: f64| crit.iter().any(|c| (c - x).abs() <= 1e-15 * c.abs().max(1.0));
    let quad = opts.quadrature();
    let mut total = Estimate::zero();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let piece = match (is_crit(a), is_crit(b)) {
            (true, false) => quad.integrate(
                |w| 2.0 * w * coarea_density(entry, f, a + w * w),
                0.0,
                (b - a).sqrt(),
            ),
            (false, true) => quad.integrate(
                |w| 2.0 * w * coarea_density(entry, f, b - w * w),
                0.0,
                (b - a).sqrt(),
            ),
            (true, true) => {
                let m = 0.5 * (a + b);
                let left = quad.integrate(
                    |w| 2.0 * w * coarea_density(entry, f, a + w * w),
                    0.0,
                    (m - a).sqrt(),
                );
                let right = quad.integrate(
                    |w| 2.0 * w * coarea_density(entry, f, b - w * w),
                    0.0,
                    (b - m).sqrt(),
                );
                left.add(right)
            }
            (false, false) => quad.integrate(|x| coarea_density(entry, f, x), a, b),
        };
        total = total.add(piece);
    }
    total
}

/// `∫_{t ≤ r ≤ s} f` by direct quadrature over the orbit parameter.
pub fn volume_integral(
    entry: &CatalogEntry,
    f: &(dyn Fn(&OrbitSample) -> f64 + Sync),
    t: f64,
    s: f64,
    opts: &ProfileOptions,
) -> Estimate {
    let q_of = |x: f64| {
        if x <= entry.min_radius() {
            Some(0.0)
        } else {
            entry.orbit_of_radius(x)
        }
    };
    match (q_of(t), q_of(s)) {
        (Some(qa), Some(qb)) if qb > qa => opts.quadrature().integrate(
            |q| match entry.orbit(q) {
                Ok(o) => f(&o) * o.measure,
                Err(_) => f64::NAN,
            },
            qa,
            qb,
        ),
        _ => Estimate::zero(),
    }
}

/// Volume of `{t ≤ r ≤ s}` computed two independent ways.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnulusVolume {
    pub direct: Estimate,
    pub coarea: Estimate,
}

impl AnnulusVolume {
    pub fn relative_gap(&self) -> f64 {
        (self.direct.value - self.coarea.value).abs() / self.direct.value.abs()
    }
}

pub fn annulus_volume(entry: &CatalogEntry, t: f64, s: f64) -> Result<AnnulusVolume> {
    annulus_volume_with(entry, t, s, &ProfileOptions::default())
}

pub fn annulus_volume_with(
    entry: &CatalogEntry,
    t: f64,
    s: f64,
    opts: &ProfileOptions,
) -> Result<AnnulusVolume> {
    check_radius(t)?;
    if !(s > t) {
        return Err(Error::Domain(format!("annulus needs t < s, got t = {t}, s = {s}")));
    }
    Ok(AnnulusVolume {
        direct: volume_integral(entry, &|_| 1.0, t, s, opts),
        coarea: coarea_integral(entry, &|_| 1.0, t, s, opts),
    })
}

/// A grid sample moved off a critical level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nudge {
    pub index: usize,
    pub from: f64,
    pub to: f64,
}

/// A per-sample annotation, e.g. an unconverged quadrature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleNote {
    pub index: usize,
    pub message: String,
}

/// Sampled radial profile of a catalog entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub schema_version: u32,
    pub entry: CatalogEntry,
    pub grid: Grid,
    /// `vol(M ∩ B_s)/V_k(s)`.
    pub theta: Vec<f64>,
    /// `(1/v_k) ∫_{Γ_s} |∇r|`.
    pub flux_j: Vec<f64>,
    /// `(1/v_k) ∫_{r ≤ s} Δr`.
    pub barj: Vec<f64>,
    /// `∫_{Γ_s}|∇r|^{-1} / ∫_{Γ_s}|∇r| - 1`.
    pub tilt_t: Vec<f64>,
    /// `(1/V_k) ∫_{r ≤ s} |∇r|²`.
    pub energy_e: Vec<f64>,
    pub err_theta: Vec<f64>,
    pub err_flux_j: Vec<f64>,
    pub err_barj: Vec<f64>,
    pub err_tilt_t: Vec<f64>,
    pub err_energy_e: Vec<f64>,
    pub options: ProfileOptions,
    pub nudges: Vec<Nudge>,
    pub notes: Vec<SampleNote>,
}

impl RadialProfile {
    pub fn params(&self) -> &SpaceFormParams {
        &self.entry.params
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        self.grid.samples()
    }
}

/// Move samples off critical levels by `10 × exclusion_radius`.
pub fn nudge_grid(entry: &CatalogEntry, grid: &Grid, exclusion_radius: f64) -> Result<(Grid, Vec<Nudge>)> {
    let crit = entry.critical_levels();
    let mut samples = grid.samples().to_vec();
    let mut nudges = Vec::new();
    for (i, s) in samples.iter_mut().enumerate() {
        if crit.iter().any(|c| (*s - c).abs() < exclusion_radius) {
            let level = crit.iter().cloned().find(|c| (*s - c).abs() < exclusion_radius).unwrap();
            let to = level + 10.0 * exclusion_radius;
            nudges.push(Nudge { index: i, from: *s, to });
            *s = to;
        }
    }
    let grid = Grid::new(samples).map_err(|e| {
        Error::Domain(format!("nudging samples off critical levels broke the grid: {e}"))
    })?;
    Ok((grid, nudges))
}

pub fn build_profile(entry: &CatalogEntry, grid: &Grid) -> Result<RadialProfile> {
    build_profile_with(entry, grid, &ProfileOptions::default())
}

pub fn build_profile_with(
    entry: &CatalogEntry,
    grid: &Grid,
    opts: &ProfileOptions,
) -> Result<RadialProfile> {
    let (grid, nudges) = nudge_grid(entry, grid, opts.exclusion_radius)?;
    let s = grid.samples();
    let n = s.len();
    let p = entry.params;
    let mut notes = Vec::new();

    // three volume integrals per interval [s_{i-1}, s_i], the first from the bottom of M
    let pieces: Vec<[Estimate; 3]> = (0..n)
        .into_par_iter()
        .map(|i| {
            let a = if i == 0 { 0.0 } else { s[i - 1] };
            let b = s[i];
            [
                volume_integral(entry, &|_| 1.0, a, b, opts),
                volume_integral(entry, &|o| o.point.lap_r, a, b, opts),
                volume_integral(entry, &|o| 1.0 - o.tilt_defect, a, b, opts),
            ]
        })
        .collect();

    let mut acc = [Estimate::zero(); 3];
    let mut prof = RadialProfile {
        schema_version: PROFILE_SCHEMA_VERSION,
        entry: entry.clone(),
        grid: grid.clone(),
        theta: Vec::with_capacity(n),
        flux_j: Vec::with_capacity(n),
        barj: Vec::with_capacity(n),
        tilt_t: Vec::with_capacity(n),
        energy_e: Vec::with_capacity(n),
        err_theta: Vec::with_capacity(n),
        err_flux_j: Vec::with_capacity(n),
        err_barj: Vec::with_capacity(n),
        err_tilt_t: Vec::with_capacity(n),
        err_energy_e: Vec::with_capacity(n),
        options: *opts,
        nudges,
        notes: vec![],
    };
    let eps = 4.0 * f64::EPSILON;
    for (i, piece) in pieces.iter().enumerate() {
        for (a, pc) in acc.iter_mut().zip(piece) {
            *a = a.add(*pc);
        }
        if piece.iter().any(|e| !e.converged || !e.value.is_finite()) {
            notes.push(SampleNote {
                index: i,
                message: "volume quadrature did not reach its tolerance".into(),
            });
        }
        let si = s[i];
        let vol = ball_volume_unchecked(si, &p);
        let sph = sphere_volume_unchecked(si, &p);
        let theta = acc[0].value / vol;
        let barj = acc[1].value / sph;
        let energy = acc[2].value / vol;
        prof.theta.push(theta);
        prof.err_theta.push(acc[0].error / vol + eps * theta.abs());
        prof.barj.push(barj);
        prof.err_barj.push(acc[1].error / sph + eps * barj.abs());
        prof.energy_e.push(energy);
        prof.err_energy_e.push(acc[2].error / vol + eps * energy.abs());

        match entry.orbit_of_radius(si) {
            Some(q) => {
                let o = entry.orbit(q)?;
                let j = o.point.gradr_norm * o.level_volume / sph;
                prof.flux_j.push(j);
                prof.err_flux_j.push(ORBIT_REL_ERR * j.abs());
                // one orbit per level, so the level-integral ratio is 1/|∇r|² - 1
                let g2 = 1.0 - o.tilt_defect;
                let t = o.tilt_defect / g2;
                prof.tilt_t.push(t);
                prof.err_tilt_t.push(ORBIT_REL_ERR * (1.0 + t));
            }
            None => {
                notes.push(SampleNote {
                    index: i,
                    message: format!("level set r = {si} is empty"),
                });
                prof.flux_j.push(0.0);
                prof.err_flux_j.push(0.0);
                prof.tilt_t.push(0.0);
                prof.err_tilt_t.push(0.0);
            }
        }
    }
    prof.notes = notes;
    Ok(prof)
}

/// `vol(B^int_s)/V_k(s)` for intrinsic geodesic balls about the natural center.
pub fn intrinsic_density(entry: &CatalogEntry, s: f64) -> Result<f64> {
    check_radius(s)?;
    let supported = match entry.id {
        CatalogId::EuclideanConeClifford => true,
        CatalogId::TotallyGeodesic | CatalogId::HyperbolicPlanePoincare => entry.pole_offset == 0.0,
        CatalogId::EuclideanCatenoid => false,
    };
    if !supported {
        return Err(Error::Capability(format!(
            "{} (pole offset {}) has no intrinsic-distance oracle",
            entry.id, entry.pole_offset
        )));
    }
    // for these entries the orbit parameter is the intrinsic distance to the center
    let opts = ProfileOptions::default();
    let vol = opts
        .quadrature()
        .integrate(|q| entry.orbit(q).map(|o| o.measure).unwrap_or(f64::NAN), 0.0, s)
        .value;
    Ok(vol / ball_volume_unchecked(s, &entry.params))
}

const PROFILE_COLUMNS: [&str; 12] = [
    "s", "theta", "flux_j", "barj", "tilt_t", "energy_e", "err_theta", "err_flux_j", "err_barj",
    "err_tilt_t", "err_energy_e", "tol",
];

impl RadialProfile {
    /// CSV form. Each row carries the quadrature tolerance in `tol`.
    pub fn to_table(&self) -> CsvTable {
        let mut t = CsvTable::new(PROFILE_COLUMNS);
        let p = &self.entry.params;
        t.meta("schema", PROFILE_SCHEMA)
            .meta("schema_version", self.schema_version)
            .meta("entry", self.entry.id)
            .meta("m", p.m)
            .meta("n", p.n)
            .meta("k", crate::table::format_f64(p.k))
            .meta("pole_offset", crate::table::format_f64(self.entry.pole_offset))
            .meta("exclusion_radius", crate::table::format_f64(self.options.exclusion_radius))
            .meta("quadrature_rel_tol", crate::table::format_f64(self.options.rel_tol));
        for nd in &self.nudges {
            t.meta(
                "nudge",
                format!(
                    "{} {} {}",
                    nd.index,
                    crate::table::format_f64(nd.from),
                    crate::table::format_f64(nd.to)
                ),
            );
        }
        for note in &self.notes {
            t.meta("note", format!("{} {}", note.index, note.message));
        }
        for i in 0..self.len() {
            t.push_row(vec![
                self.grid.samples()[i],
                self.theta[i],
                self.flux_j[i],
                self.barj[i],
                self.tilt_t[i],
                self.energy_e[i],
                self.err_theta[i],
                self.err_flux_j[i],
                self.err_barj[i],
                self.err_tilt_t[i],
                self.err_energy_e[i],
                self.options.rel_tol,
            ]);
        }
        t
    }

    pub fn from_table(t: &CsvTable) -> Result<Self> {
        let parse = |key: &str| -> Result<f64> {
            let v = t.require_meta(key)?;
            v.parse::<f64>()
                .map_err(|_| Error::Parse(format!("metadata '{key}' = '{v}' is not a number")))
        };
        if t.get_meta("schema") != Some(PROFILE_SCHEMA) {
            return Err(Error::Parse("not a radial profile table".into()));
        }
        let version = parse("schema_version")? as u32;
        if version != PROFILE_SCHEMA_VERSION {
            return Err(Error::Parse(format!("unsupported profile schema version {version}")));
        }
        let id: CatalogId = t.require_meta("entry")?.parse()?;
        let params = SpaceFormParams::new(parse("m")? as usize, parse("n")? as usize, parse("k")?)?;
        let entry = crate::catalog::make_entry(id, params, parse("pole_offset")?)?;
        let options = ProfileOptions {
            exclusion_radius: parse("exclusion_radius")?,
            rel_tol: parse("quadrature_rel_tol")?,
        };
        let mut nudges = Vec::new();
        let mut notes = Vec::new();
        for (k, v) in &t.metadata {
            if k == "nudge" {
                let f: Vec<&str> = v.split_whitespace().collect();
                let bad = || Error::Parse(format!("malformed nudge line '{v}'"));
                if f.len() != 3 {
                    return Err(bad());
                }
                nudges.push(Nudge {
                    index: f[0].parse().map_err(|_| bad())?,
                    from: f[1].parse().map_err(|_| bad())?,
                    to: f[2].parse().map_err(|_| bad())?,
                });
            } else if k == "note" {
                let (i, msg) = v.split_once(' ').unwrap_or((v, ""));
                notes.push(SampleNote {
                    index: i.parse().map_err(|_| Error::Parse(format!("malformed note '{v}'")))?,
                    message: msg.to_string(),
                });
            }
        }
        Ok(RadialProfile {
            schema_version: version,
            entry,
            grid: Grid::new(t.column("s")?)?,
            theta: t.column("theta")?,
            flux_j: t.column("flux_j")?,
            barj: t.column("barj")?,
            tilt_t: t.column("tilt_t")?,
            energy_e: t.column("energy_e")?,
            err_theta: t.column("err_theta")?,
            err_flux_j: t.column("err_flux_j")?,
            err_barj: t.column("err_barj")?,
            err_tilt_t: t.column("err_tilt_t")?,
            err_energy_e: t.column("err_energy_e")?,
            options,
            nudges,
            notes,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("profiles serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: RadialProfile =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if p.schema_version != PROFILE_SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "unsupported profile schema version {}",
                p.schema_version
            )));
        }
        Ok(p)
    }
}
