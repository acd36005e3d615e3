//! Command-line front end.
//!
//! ```text
//! densitylab [--config run.toml] <models|ode|density|monotone|spectrum|flow|all> [flags]
//! ```
//!
//! Every subcommand reads an optional section of the same name from the
//! TOML config file; flags override file values. CSV artifacts carry the
//! resolved configuration as `# config.<key>: <value>` lines and JSON
//! artifacts under a `config` key. Exit status: 0 when every verdict passes,
//! 2 when a verdict fails, 1 on usage or configuration errors.

use crate::catalog::{make_entry, CatalogEntry, CatalogId};
use crate::comparison::{
    classify_pinching, solve_g, tail_fit, verify_pinching_limits, CurvatureProfile,
};
use crate::error::{Error, Result};
use crate::flow::{
    finite_density_criterion, integrate_flow_bound, properness_gate, CriterionVerdict, DecayLaw,
    IIDecayProfile, Regime,
};
use crate::model::{self, Grid, SpaceFormParams};
use crate::monotone::{equivalence_report, verify_monotonicity};
use crate::profiles::{build_profile_with, ProfileOptions, RadialProfile};
use crate::spectral::{cheeger_bound, probe_family, window_family};
use crate::table::CsvTable;
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::io::Write;
use std::path::{Path, PathBuf};

pub const VERSION_TAG: &str = concat!("densitylab ", env!("CARGO_PKG_VERSION"));

#[derive(Parser, Debug)]
#[command(name = "densitylab", version, about = "Density, monotonicity and spectral diagnostics for minimal submanifolds")]
struct Cli {
    /// TOML file with one optional table per subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate model-space functions.
    Models(ModelsArgs),
    /// Solve the comparison ODE for a curvature profile.
    Ode(OdeArgs),
    /// Build a radial profile for a catalog entry.
    Density(DensityArgs),
    /// Check monotonicity and the finite-density equivalence on a profile.
    Monotone(MonotoneArgs),
    /// Weyl defects and Q diagnostics over a window family.
    Spectrum(SpectrumArgs),
    /// Flow-line bound and finite-density criterion for a decay law.
    Flow(FlowArgs),
    /// Run a standard suite of every subcommand into a directory.
    All(AllArgs),
}

#[derive(Deserialize, Default, Debug)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    models: Option<ModelsArgs>,
    ode: Option<OdeArgs>,
    density: Option<DensityArgs>,
    monotone: Option<MonotoneArgs>,
    spectrum: Option<SpectrumArgs>,
    flow: Option<FlowArgs>,
    all: Option<AllArgs>,
}

macro_rules! mergeable {
    ($t:ident { $($f:ident),* $(,)? }) => {
        impl $t {
            fn merge(self, file: Option<Self>) -> Self {
                let file = file.unwrap_or_default();
                $t { $($f: self.$f.or(file.$f)),* }
            }
        }
    };
}

#[derive(Args, Serialize, Deserialize, Default, Debug, Clone)]
#[serde(default, deny_unknown_fields)]
pub struct ModelsArgs {
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<f64>,
    /// Radii as `start:end:count`.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}
mergeable!(ModelsArgs { m, n, k, grid, out, json });

#[derive(Args, Serialize, Deserialize, Default, Debug, Clone)]
#[serde(default, deny_unknown_fields)]
pub struct OdeArgs {
    #[arg(long)]
    pub k: Option<f64>,
    /// constant, power_tail, exp_tail or table.
    #[arg(long)]
    pub form: Option<String>,
    #[arg(long)]
    pub c: Option<f64>,
    /// Exponent of power_tail.
    #[arg(long)]
    pub p: Option<f64>,
    /// Rate of exp_tail.
    #[arg(long)]
    pub a: Option<f64>,
    /// Two-column `s G(s)` file for form = table.
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}
mergeable!(OdeArgs { k, form, c, p, a, table, grid, out, json });

#[derive(Args, Serialize, Deserialize, Default, Debug, Clone)]
#[serde(default, deny_unknown_fields)]
pub struct EntryArgs {
    /// Catalog id.
    #[arg(long)]
    pub entry: Option<String>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<f64>,
    /// Distance of the pole from the submanifold.
    #[arg(long)]
    pub offset: Option<f64>,
}
mergeable!(EntryArgs { entry, m, n, k, offset });

impl EntryArgs {
    fn resolve(self, default_entry: CatalogId) -> Result<Self> {
        let id: CatalogId = match &self.entry {
            Some(s) => s.parse()?,
            None => default_entry,
        };
        let (m, n, k) = match id {
            CatalogId::TotallyGeodesic | CatalogId::EuclideanCatenoid => (2, 3, 0.0),
            CatalogId::EuclideanConeClifford => (3, 4, 0.0),
            CatalogId::HyperbolicPlanePoincare => (2, 3, 1.0),
        };
        Ok(EntryArgs {
            entry: Some(id.as_str().to_string()),
            m: Some(self.m.unwrap_or(m)),
            n: Some(self.n.unwrap_or(n)),
            k: Some(self.k.unwrap_or(k)),
            offset: Some(self.offset.unwrap_or(0.0)),
        })
    }

    fn build(&self) -> Result<CatalogEntry> {
        let id: CatalogId = self.entry.as_deref().unwrap_or_default().parse()?;
        let p = SpaceFormParams::new(self.m.unwrap(), self.n.unwrap(), self.k.unwrap())?;
        make_entry(id, p, self.offset.unwrap())
    }
}

#[derive(Args, Serialize, Deserialize, Default, Debug, Clone)]
#[serde(default, deny_unknown_fields)]
pub struct DensityArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub entry: EntryArgs,
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub exclusion_radius: Option<f64>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// CSV profile output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON profile output.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

impl DensityArgs {
    fn merge(self, file: Option<Self>) -> Self {
        let file = file.unwrap_or_default();
        DensityArgs {
            entry: self.entry.merge(Some(file.entry)),
            grid: self.grid.or(file.grid),
            exclusion_radius: self.exclusion_radius.or(file.exclusion_radius),
            rel_tol: self.rel_tol.or(file.rel_tol),
            out: self.out.or(file.out),
            json: self.json.or(file.json),
        }
    }
}

#[derive(Args, Serialize, Deserialize, Default, Debug, Clone)]
#[serde(default, deny_unknown_fields)]
pub struct MonotoneArgs {
    /// Profile written by `density` (CSV, or JSON by extension).
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Also check the upper differential inequality against g = sn_k.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub with_comparison: Option<bool>,
    /// Print a human-readable table instead of JSON on stdout.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub table: Option<bool>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
mergeable!(MonotoneArgs { profile, with_comparison, table, out });

#[derive(Args, Serialize, Deserialize, Default, Debug, Clone)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub entry: EntryArgs,
    /// Comma-separated trial values λ.
    #[arg(long, value_delimiter = ',')]
    pub lambda: Option<Vec<f64>>,
    /// First window start t.
    #[arg(long)]
    pub t0: Option<f64>,
    /// Number of windows (t doubles each time).
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Fail when the last defect exceeds this value.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

impl SpectrumArgs {
    fn merge(self, file: Option<Self>) -> Self {
        let file = file.unwrap_or_default();
        SpectrumArgs {
            entry: self.entry.merge(Some(file.entry)),
            lambda: self.lambda.or(file.lambda),
            t0: self.t0.or(file.t0),
            count: self.count.or(file.count),
            delta: self.delta.or(file.delta),
            threshold: self.threshold.or(file.threshold),
            out: self.out.or(file.out),
            json: self.json.or(file.json),
        }
    }
}

#[derive(Args, Serialize, Deserialize, Default, Debug, Clone)]
#[serde(default, deny_unknown_fields)]
pub struct FlowArgs {
    /// euclidean or hyperbolic.
    #[arg(long)]
    pub regime: Option<String>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Start radius R.
    #[arg(long = "start", alias = "R")]
    pub start: Option<f64>,
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long)]
    pub s_max: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}
mergeable!(FlowArgs { regime, c, alpha, start, k, s_max, out, json });

#[derive(Args, Serialize, Deserialize, Default, Debug, Clone)]
#[serde(default, deny_unknown_fields)]
pub struct AllArgs {
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}
mergeable!(AllArgs { out_dir });

/// Parse `argv` (including the program name), run, and return the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match dispatch(cli) {
        Ok(true) => 0,
        Ok(false) => 2,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<ConfigFile> {
    let Some(path) = path else { return Ok(ConfigFile::default()) };
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| Error::Config(format!("malformed config {}: {e}", path.display())))
}

fn dispatch(cli: Cli) -> Result<bool> {
    let file = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Models(a) => run_models(a.merge(file.models)),
        Command::Ode(a) => run_ode(a.merge(file.ode)),
        Command::Density(a) => run_density(a.merge(file.density)),
        Command::Monotone(a) => run_monotone(a.merge(file.monotone)),
        Command::Spectrum(a) => run_spectrum(a.merge(file.spectrum)),
        Command::Flow(a) => run_flow(a.merge(file.flow)),
        Command::All(a) => run_all(a.merge(file.all)),
    }
}

fn config_value<T: Serialize>(args: &T) -> Value {
    let mut v = serde_json::to_value(args).expect("configs serialize");
    if let Value::Object(map) = &mut v {
        map.retain(|_, x| !x.is_null());
    }
    v
}

fn annotate(table: &mut CsvTable, config: &Value) {
    table.meta("version", VERSION_TAG);
    if let Value::Object(map) = config {
        for (k, v) in map {
            let text = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            table.meta(&format!("config.{k}"), text);
        }
    }
}

fn emit_text(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes())?;
            so.flush()?;
            Ok(())
        }
    }
}

fn emit_table(table: &CsvTable, out: Option<&Path>) -> Result<()> {
    emit_text(&table.to_string_lossless(), out)
}

fn emit_json(value: &Value, out: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    emit_text(&text, out)
}

fn parse_grid(spec: &str) -> Result<Grid> {
    Grid::parse_spec(spec)
}

pub fn run_models(a: ModelsArgs) -> Result<bool> {
    let m = a.m.unwrap_or(2);
    let a = ModelsArgs {
        m: Some(m),
        n: Some(a.n.unwrap_or(m + 1)),
        k: Some(a.k.unwrap_or(0.0)),
        grid: Some(a.grid.unwrap_or_else(|| "0.01:20:200".into())),
        ..a
    };
    let p = SpaceFormParams::new(a.m.unwrap(), a.n.unwrap(), a.k.unwrap())?;
    let grid = parse_grid(a.grid.as_deref().unwrap())?;
    let config = config_value(&a);
    let mut t = CsvTable::new(["s", "sn", "sn_prime", "v", "big_v", "ratio", "f", "z", "a", "growth", "tol"]);
    annotate(&mut t, &config);
    let tol = crate::numerics::quad::Quadrature::default().rel_tol;
    for &s in grid.samples() {
        t.push_row(vec![
            s,
            model::sn(s, p.k)?,
            model::sn_prime(s, p.k)?,
            model::sphere_volume(s, &p)?,
            model::ball_volume(s, &p)?,
            model::ball_sphere_ratio(s, &p)?,
            model::comparison_f(s, &p)?,
            model::comparison_z(s, &p)?,
            model::spectral_weight_a(s, &p)?,
            model::volume_growth_ratio(s, &p),
            tol,
        ]);
    }
    emit_table(&t, a.out.as_deref())?;
    let report = model::check_ratio_monotone(&grid, &p);
    if a.json.is_some() {
        emit_json(&json!({ "version": VERSION_TAG, "config": config, "ratio_monotone": report }), a.json.as_deref())?;
    }
    eprintln!("V/v non-decreasing: {}", if report.pass { "pass" } else { "FAIL" });
    Ok(report.pass)
}

fn curvature_profile(a: &OdeArgs) -> Result<CurvatureProfile> {
    let k = a.k.unwrap();
    let c = a.c.unwrap_or(1.0);
    match a.form.as_deref().unwrap() {
        "constant" => Ok(CurvatureProfile::constant(k)),
        "power_tail" => CurvatureProfile::power_tail(k, c, a.p.unwrap_or(2.0)),
        "exp_tail" => CurvatureProfile::exp_tail(k, c, a.a.unwrap_or(1.0)),
        "table" => {
            let path = a
                .table
                .as_deref()
                .ok_or_else(|| Error::Config("form = table needs --table <file>".into()))?;
            CurvatureProfile::from_table_file(path, k)
        }
        other => Err(Error::Config(format!(
            "unknown profile form '{other}' (expected constant, power_tail, exp_tail or table)"
        ))),
    }
}

pub fn run_ode(a: OdeArgs) -> Result<bool> {
    let a = OdeArgs {
        k: Some(a.k.unwrap_or(0.0)),
        form: Some(a.form.unwrap_or_else(|| "constant".into())),
        grid: Some(a.grid.unwrap_or_else(|| "0.01:40:400".into())),
        ..a
    };
    let profile = curvature_profile(&a)?;
    let grid = parse_grid(a.grid.as_deref().unwrap())?;
    let sol = solve_g(&profile, &grid)?;
    let config = config_value(&a);
    let tol = crate::comparison::SolveOptions::default().rel_tol;
    let mut t = CsvTable::new(["s", "g", "g_prime", "zeta", "g_over_sn", "zeta_integral", "tol"]);
    annotate(&mut t, &config);
    t.meta("profile", &profile);
    let zi = sol.zeta_integral();
    for i in 0..grid.len() {
        t.push_row(vec![
            grid.samples()[i],
            sol.g[i],
            sol.g_prime[i],
            sol.zeta[i],
            sol.g_over_sn[i],
            zi[i],
            tol,
        ]);
    }
    emit_table(&t, a.out.as_deref())?;
    let pinching = classify_pinching(&profile);
    let limits = verify_pinching_limits(&sol);
    // limit conclusions are only claimed under integral pinching
    let pass = !pinching.is_integral() || limits.all_pass();
    if a.json.is_some() {
        emit_json(
            &json!({
                "version": VERSION_TAG,
                "config": config,
                "profile": profile.to_string(),
                "pinching": pinching,
                "tail_fit": tail_fit(&profile),
                "limits": limits,
                "pass": pass,
            }),
            a.json.as_deref(),
        )?;
    }
    eprintln!("pinching: {pinching}; limit checks: {}", if limits.all_pass() { "pass" } else { "fail" });
    Ok(pass)
}

pub fn run_density(a: DensityArgs) -> Result<bool> {
    let a = DensityArgs {
        entry: a.entry.resolve(CatalogId::EuclideanCatenoid)?,
        grid: Some(a.grid.unwrap_or_else(|| "1.05:50:200".into())),
        exclusion_radius: Some(a.exclusion_radius.unwrap_or(ProfileOptions::default().exclusion_radius)),
        rel_tol: Some(a.rel_tol.unwrap_or(ProfileOptions::default().rel_tol)),
        ..a
    };
    let entry = a.entry.build()?;
    let grid = parse_grid(a.grid.as_deref().unwrap())?;
    let opts = ProfileOptions { exclusion_radius: a.exclusion_radius.unwrap(), rel_tol: a.rel_tol.unwrap() };
    let profile = build_profile_with(&entry, &grid, &opts)?;
    let config = config_value(&a);
    let mut t = profile.to_table();
    annotate(&mut t, &config);
    emit_table(&t, a.out.as_deref())?;
    if a.json.is_some() {
        let mut v = serde_json::to_value(&profile).expect("profiles serialize");
        v["config"] = config;
        v["version"] = json!(VERSION_TAG);
        emit_json(&v, a.json.as_deref())?;
    }
    Ok(true)
}

fn read_profile(path: &Path) -> Result<RadialProfile> {
    if path.extension().and_then(|e| e.to_str()) == Some("json") {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
        RadialProfile::from_json(&text)
    } else {
        RadialProfile::from_table(&CsvTable::read_file(path)?)
    }
}

pub fn run_monotone(a: MonotoneArgs) -> Result<bool> {
    let a = MonotoneArgs {
        with_comparison: Some(a.with_comparison.unwrap_or(false)),
        table: Some(a.table.unwrap_or(false)),
        ..a
    };
    let path = a
        .profile
        .as_deref()
        .ok_or_else(|| Error::Config("monotone needs --profile <file>".into()))?;
    let profile = read_profile(path)?;
    let p = *profile.params();
    let sol = if a.with_comparison.unwrap() {
        Some(solve_g(&CurvatureProfile::constant(p.k), &profile.grid)?)
    } else {
        None
    };
    let report = verify_monotonicity(&profile, &p, sol.as_ref());
    let eq = equivalence_report(&profile, &p, sol.as_ref());
    let pass = report.pass && eq.consistent;
    if a.table.unwrap() {
        let text = format!(
            "{report}\ntheta limit {:.6} ({:?}), barj limit {:.6} ({:?}), criterion integral {:.3e}, consistent: {}\n",
            eq.theta_limit_estimate,
            eq.theta_fit.form,
            eq.barj_limit_estimate,
            eq.barj_fit.form,
            eq.tilt_integral,
            eq.consistent
        );
        emit_text(&text, a.out.as_deref())?;
    } else {
        emit_json(
            &json!({
                "version": VERSION_TAG,
                "config": config_value(&a),
                "monotone": report,
                "equivalence": eq,
                "pass": pass,
            }),
            a.out.as_deref(),
        )?;
    }
    Ok(pass)
}

pub fn run_spectrum(a: SpectrumArgs) -> Result<bool> {
    let entry_args = a.entry.clone().resolve(CatalogId::TotallyGeodesic)?;
    let k = entry_args.k.unwrap();
    let a = SpectrumArgs {
        entry: entry_args,
        lambda: Some(a.lambda.unwrap_or_else(|| vec![if k == 0.0 { 1.0 } else { 0.5 }])),
        t0: Some(a.t0.unwrap_or(10.0)),
        count: Some(a.count.unwrap_or(4)),
        delta: Some(a.delta.unwrap_or(0.1)),
        ..a
    };
    let entry = a.entry.build()?;
    let p = entry.params;
    let config = config_value(&a);
    let mut t = CsvTable::new(["lambda", "t", "s", "S", "defect", "defect_error", "Q", "f_sup", "chi", "c_k", "tol"]);
    annotate(&mut t, &config);
    let mut pass = true;
    let mut families = Vec::new();
    for &lambda in a.lambda.as_ref().unwrap() {
        let fam = window_family(lambda, a.t0.unwrap(), a.count.unwrap(), &p);
        let res = probe_family(&entry, &fam, a.delta.unwrap(), None)?;
        let defect_decreasing = res.windows(2).all(|w| w[1].defect < w[0].defect);
        let q_decreasing = res.windows(2).all(|w| w[1].q_value < w[0].q_value);
        let below = match (a.threshold, res.last()) {
            (Some(th), Some(r)) => r.defect <= th,
            _ => true,
        };
        pass &= defect_decreasing && q_decreasing && below;
        for r in &res {
            t.push_row(vec![
                lambda,
                r.config.t,
                r.config.s,
                r.config.outer,
                r.defect,
                r.defect_error,
                r.q_value,
                r.f_sup,
                r.chi,
                r.c_k,
                1e-10,
            ]);
        }
        families.push(json!({
            "lambda": lambda,
            "results": res,
            "defect_decreasing": defect_decreasing,
            "q_decreasing": q_decreasing,
            "below_threshold": below,
        }));
    }
    emit_table(&t, a.out.as_deref())?;
    let radii: Vec<f64> = (1..=40).map(|i| i as f64 * 0.5).collect();
    let cheeger = cheeger_bound(&entry, &radii);
    if a.json.is_some() {
        emit_json(
            &json!({
                "version": VERSION_TAG,
                "config": config,
                "families": families,
                "cheeger": cheeger,
                "pass": pass && cheeger.pass,
            }),
            a.json.as_deref(),
        )?;
    }
    eprintln!("spectral floor (m-1)^2 k/4 = {}", cheeger.floor);
    Ok(pass && cheeger.pass)
}

pub fn run_flow(a: FlowArgs) -> Result<bool> {
    let regime: Regime = a.regime.as_deref().unwrap_or("euclidean").parse()?;
    let start = a.start.unwrap_or(10.0);
    let a = FlowArgs {
        regime: Some(regime.to_string()),
        c: Some(a.c.unwrap_or(1.0)),
        alpha: Some(a.alpha.unwrap_or(2.0)),
        start: Some(start),
        k: Some(a.k.unwrap_or(if regime == Regime::Euclidean { 0.0 } else { 1.0 })),
        s_max: Some(a.s_max.unwrap_or(1e4 * start)),
        ..a
    };
    let profile = IIDecayProfile::new(
        regime,
        a.k.unwrap(),
        start,
        DecayLaw::LogPower { c: a.c.unwrap(), alpha: a.alpha.unwrap() },
    )?;
    let gate = properness_gate(&profile);
    let bound = integrate_flow_bound(&profile, a.s_max.unwrap())?;
    let p = SpaceFormParams::new(2, 3, a.k.unwrap())?;
    let criterion = finite_density_criterion(&bound, &p)?;
    let config = config_value(&a);
    let mut t = CsvTable::new(["s", "w", "envelope", "criterion_partial", "tol"]);
    annotate(&mut t, &config);
    let env = bound.envelope.as_ref();
    for (i, &s) in bound.grid.samples().iter().enumerate() {
        t.push_row(vec![
            s,
            bound.w[i],
            env.map_or(f64::NAN, |e| e[i]),
            bound.criterion_partials[i],
            bound.quadrature_rel_tol,
        ]);
    }
    emit_table(&t, a.out.as_deref())?;
    let pass = gate.pass && criterion.verdict == CriterionVerdict::Finite;
    let verdict = json!({
        "version": VERSION_TAG,
        "config": config,
        "properness": gate,
        "criterion": criterion,
        "decade_fits": bound.decade_fits,
        "c_hat_variation": bound.c_hat_variation,
        "pass": pass,
    });
    if a.json.is_some() {
        emit_json(&verdict, a.json.as_deref())?;
    }
    eprintln!("criterion verdict: {}", criterion.verdict);
    Ok(pass)
}

pub fn run_all(a: AllArgs) -> Result<bool> {
    let dir = a.out_dir.unwrap_or_else(|| PathBuf::from("densitylab-out"));
    std::fs::create_dir_all(&dir)
        .map_err(|e| Error::Io(format!("cannot create {}: {e}", dir.display())))?;
    let path = |name: &str| Some(dir.join(name));
    let mut verdicts = Vec::new();
    let mut record = |name: &str, pass: bool| verdicts.push((name.to_string(), pass));

    for (m, k) in [(2, 0.0), (3, 0.0), (6, 0.0), (2, 1.0), (3, 1.0), (6, 1.0)] {
        let tag = format!("models_m{m}_k{k}");
        let pass = run_models(ModelsArgs {
            m: Some(m),
            n: Some(m + 1),
            k: Some(k),
            grid: Some("0.01:20:200".into()),
            out: path(&format!("{tag}.csv")),
            json: path(&format!("{tag}.json")),
        })?;
        record(&tag, pass);
    }
    for (tag, k, form) in [("ode_flat", 0.0, "constant"), ("ode_hyperbolic", 1.0, "constant"), ("ode_exp_tail", 1.0, "exp_tail")] {
        let pass = run_ode(OdeArgs {
            k: Some(k),
            form: Some(form.into()),
            c: Some(1.0),
            a: Some(1.0),
            out: path(&format!("{tag}.csv")),
            json: path(&format!("{tag}.json")),
            ..Default::default()
        })?;
        record(tag, pass);
    }
    for (id, grid) in [
        (CatalogId::EuclideanCatenoid, "1.05:30:200"),
        (CatalogId::EuclideanConeClifford, "0.5:30:60"),
        (CatalogId::TotallyGeodesic, "0.5:30:60"),
    ] {
        let tag = format!("density_{id}");
        let csv = dir.join(format!("{tag}.csv"));
        let pass = run_density(DensityArgs {
            entry: EntryArgs { entry: Some(id.as_str().into()), ..Default::default() },
            grid: Some(grid.into()),
            out: Some(csv.clone()),
            ..Default::default()
        })?;
        record(&tag, pass);
        let pass = run_monotone(MonotoneArgs {
            profile: Some(csv),
            with_comparison: Some(true),
            table: Some(false),
            out: path(&format!("monotone_{id}.json")),
        })?;
        record(&format!("monotone_{id}"), pass);
    }
    for (tag, k, lambda) in [("spectrum_flat", 0.0, 1.0), ("spectrum_hyperbolic", 1.0, 0.5)] {
        let pass = run_spectrum(SpectrumArgs {
            entry: EntryArgs {
                entry: Some(CatalogId::TotallyGeodesic.as_str().into()),
                k: Some(k),
                ..Default::default()
            },
            lambda: Some(vec![lambda]),
            out: path(&format!("{tag}.csv")),
            json: path(&format!("{tag}.json")),
            ..Default::default()
        })?;
        record(tag, pass);
    }
    for (tag, regime) in [("flow_euclidean", "euclidean"), ("flow_hyperbolic", "hyperbolic")] {
        let pass = run_flow(FlowArgs {
            regime: Some(regime.into()),
            out: path(&format!("{tag}.csv")),
            json: path(&format!("{tag}.json")),
            ..Default::default()
        })?;
        record(tag, pass);
    }
    let all_pass = verdicts.iter().all(|(_, p)| *p);
    let summary = json!({
        "version": VERSION_TAG,
        "verdicts": verdicts.iter().map(|(n, p)| json!({ "name": n, "pass": p })).collect::<Vec<_>>(),
        "pass": all_pass,
    });
    emit_json(&summary, Some(&dir.join("summary.json")))?;
    for (n, p) in &verdicts {
        eprintln!("{:<40} {}", n, if *p { "pass" } else { "FAIL" });
    }
    Ok(all_pass)
}
