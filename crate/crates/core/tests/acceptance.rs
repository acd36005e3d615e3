use densitylab::catalog::{conformal_identity_residual, make_entry, CatalogEntry, CatalogId};
use densitylab::comparison::{solve_g, solve_g_direct, verify_pinching_limits, CurvatureProfile};
use densitylab::flow::{finite_density_criterion, integrate_flow_bound, CriterionVerdict, IIDecayProfile};
use densitylab::model::{check_ratio_monotone, Grid, SpaceFormParams};
use densitylab::monotone::{equivalence_report, verify_monotonicity};
use densitylab::profiles::{annulus_volume, build_profile, intrinsic_density};
use densitylab::spectral::{cheeger_bound, probe, window_family, ProbeResult};
use std::f64::consts::FRAC_PI_2;
use std::time::{Duration, Instant};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn params(m: usize, n: usize, k: f64) -> SpaceFormParams {
    SpaceFormParams::new(m, n, k).unwrap()
}

fn entry(id: CatalogId, m: usize, n: usize, k: f64, offset: f64) -> CatalogEntry {
    make_entry(id, params(m, n, k), offset).unwrap()
}

fn exact_sn(s: f64, k: f64) -> f64 {
    if k == 0.0 {
        s
    } else {
        (k.sqrt() * s).sinh() / k.sqrt()
    }
}

fn ode_fidelity() -> Outcome {
    let grid = Grid::linspace(0.01, 20.0, 2000).unwrap();
    let mut worst: f64 = 0.0;
    let mut slowest = Duration::ZERO;
    for k in [0.0, 1.0] {
        for solver in [solve_g, solve_g_direct] {
            let start = Instant::now();
            let sol = solver(&CurvatureProfile::constant(k), &grid).unwrap();
            slowest = slowest.max(start.elapsed());
            for (s, g) in grid.samples().iter().zip(&sol.g) {
                let exact = exact_sn(*s, k);
                worst = worst.max((g - exact).abs() / exact);
            }
        }
    }
    outcome(
        worst <= 1e-8 && slowest < Duration::from_secs(1),
        format!("max rel |g - sn| = {worst:.3e} (tol 1e-8), slowest solve {:.3} s (limit 1 s)", slowest.as_secs_f64()),
    )
}

fn pinching_calculus() -> Outcome {
    let profile = CurvatureProfile::exp_tail(1.0, 1.0, 1.0).unwrap();
    let grid = Grid::linspace(0.01, 40.0, 4000).unwrap();
    let sol = solve_g(&profile, &grid).unwrap();
    let r = verify_pinching_limits(&sol);
    let zeta_min = sol.zeta.iter().cloned().fold(f64::INFINITY, f64::min);
    // independent tail: log h(40) - log h(30) from the trapezoid rule on ζ
    let s = grid.samples();
    let i30 = s.partition_point(|x| *x < 30.0);
    let tail: f64 = (i30 + 1..s.len())
        .map(|i| 0.5 * (sol.zeta[i] + sol.zeta[i - 1]) * (s[i] - s[i - 1]))
        .sum();
    let last = s.len() - 1;
    let scaled = sol.zeta[last] * exact_sn(s[last], 1.0) / s[last].cosh();
    let h = &sol.g_over_sn;
    let drift = (h[last] - h[i30]).abs() / h[last];
    let pass = zeta_min >= -1e-12 && tail < 1e-6 && scaled < 1e-4 && drift < 5e-5 && r.all_pass();
    outcome(
        pass,
        format!(
            "min ζ = {zeta_min:.2e}, ∫ζ over [30,40] = {tail:.2e} (tol 1e-6), ζ sn/sn' at 40 = {scaled:.2e} (tol 1e-4), g/sn drift = {drift:.2e} (tol 5e-5)"
        ),
    )
}

fn coarea_consistency() -> Outcome {
    let e = entry(CatalogId::EuclideanCatenoid, 2, 3, 0.0, 0.0);
    let a = annulus_volume(&e, 0.5, 2.0).unwrap();
    let gap = a.relative_gap();
    outcome(
        gap <= 1e-5,
        format!("direct {:.12}, coarea {:.12}, relative gap {gap:.3e} (tol 1e-5)", a.direct.value, a.coarea.value),
    )
}

fn monotonicity_suite() -> Outcome {
    let e = entry(CatalogId::EuclideanCatenoid, 2, 3, 0.0, 0.0);
    let p = e.params;
    let prof = build_profile(&e, &Grid::linspace(1.05, 30.0, 200).unwrap()).unwrap();
    let report = verify_monotonicity(&prof, &p, None);
    let worst_bound = [&report.theta, &report.energy, &report.barj, &report.volume_gap]
        .iter()
        .map(|v| v.max_relative_bound)
        .fold(0.0, f64::max);
    let j_ge = prof.flux_j.iter().zip(&prof.theta).zip(prof.err_flux_j.iter().zip(&prof.err_theta))
        .all(|((j, t), (ej, et))| j - t >= -(ej + et));

    let cone = entry(CatalogId::EuclideanConeClifford, 3, 4, 0.0, 0.0);
    let cp = build_profile(&cone, &Grid::linspace(0.5, 30.0, 60).unwrap()).unwrap();
    let cone_dev = cp.theta.iter().map(|t| (t - FRAC_PI_2).abs()).fold(0.0, f64::max);

    let pass = report.pass && !report.low_confidence && worst_bound <= 1e-6 && j_ge && cone_dev <= 1e-6;
    outcome(
        pass,
        format!(
            "catenoid monotone: {}, worst relative error bound {worst_bound:.2e} (tol 1e-6), J >= Θ: {j_ge}, cone |Θ - π/2| = {cone_dev:.2e} (tol 1e-6)",
            report.pass
        ),
    )
}

fn equivalence_suite() -> Outcome {
    let e = entry(CatalogId::EuclideanCatenoid, 2, 3, 0.0, 0.0);
    let p = e.params;
    let prof = build_profile(&e, &Grid::linspace(1.05, 200.0, 400).unwrap()).unwrap();
    let eq = equivalence_report(&prof, &p, None);
    let gap = (eq.theta_limit_estimate - eq.barj_limit_estimate).abs() / eq.theta_limit_estimate.abs();
    let tail = eq.tilt_tail_increment;
    outcome(
        gap <= 0.01 && tail < 1e-4,
        format!(
            "Θ(∞) ≈ {:.6}, J̄(∞) ≈ {:.6}, gap {gap:.2e} (tol 1e-2), criterion tail beyond s=20 = {tail:.3e} (tol 1e-4)",
            eq.theta_limit_estimate, eq.barj_limit_estimate
        ),
    )
}

fn spectral_floor() -> Outcome {
    let radii: Vec<f64> = (1..=20).map(|i| i as f64).collect();
    let hyp = cheeger_bound(&entry(CatalogId::TotallyGeodesic, 2, 3, 1.0, 0.0), &radii);
    let flat = [
        entry(CatalogId::TotallyGeodesic, 2, 3, 0.0, 0.0),
        entry(CatalogId::EuclideanCatenoid, 2, 3, 0.0, 0.0),
        entry(CatalogId::EuclideanConeClifford, 3, 4, 0.0, 0.0),
    ];
    let flat_floors: Vec<f64> = flat.iter().map(|e| cheeger_bound(e, &radii).floor).collect();
    let pass = hyp.floor == 0.25 && hyp.pass && flat_floors.iter().all(|f| *f == 0.0);
    outcome(pass, format!("H² ⊂ H³ floor {} (expected 0.25), flat floors {flat_floors:?}", hyp.floor))
}

struct Family {
    results: Vec<ProbeResult>,
    slowest: Duration,
}

fn run_family(e: &CatalogEntry, lambda: f64) -> Family {
    let mut slowest = Duration::ZERO;
    let results = window_family(lambda, 10.0, 4, &e.params)
        .iter()
        .map(|c| {
            let start = Instant::now();
            let r = probe(e, c, 0.1, None).unwrap();
            slowest = slowest.max(start.elapsed());
            r
        })
        .collect();
    Family { results, slowest }
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn defect_decay(flat: &Family, hyp: &Family) -> Outcome {
    let df: Vec<f64> = flat.results.iter().map(|r| r.defect).collect();
    let dh: Vec<f64> = hyp.results.iter().map(|r| r.defect).collect();
    let slowest = flat.slowest.max(hyp.slowest);
    let pass = strictly_decreasing(&df)
        && strictly_decreasing(&dh)
        && df[3] <= 1e-2
        && dh[3] <= 5e-2
        && slowest < Duration::from_secs(5);
    outcome(
        pass,
        format!(
            "R² defects {} (final tol 1e-2); H² defects {} (final tol 5e-2); slowest window {:.3} s",
            fmt_list(&df),
            fmt_list(&dh),
            slowest.as_secs_f64()
        ),
    )
}

fn q_codecay(flat: &Family, hyp: &Family) -> Outcome {
    let qf: Vec<f64> = flat.results.iter().map(|r| r.q_value).collect();
    let qh: Vec<f64> = hyp.results.iter().map(|r| r.q_value).collect();
    outcome(
        strictly_decreasing(&qf) && strictly_decreasing(&qh),
        format!("R² Q {}; H² Q {}", fmt_list(&qf), fmt_list(&qh)),
    )
}

fn flow_boundary() -> Outcome {
    let flat = params(2, 3, 0.0);
    let hyp = params(2, 3, 1.0);
    let e2 = integrate_flow_bound(&IIDecayProfile::euclidean(1.0, 2.0, 10.0).unwrap(), 1e5).unwrap();
    let e1 = integrate_flow_bound(&IIDecayProfile::euclidean(1.0, 1.0, 10.0).unwrap(), 1e5).unwrap();
    let h2 = integrate_flow_bound(&IIDecayProfile::hyperbolic(1.0, 1.0, 2.0, 10.0).unwrap(), 1e5).unwrap();
    let v_e2 = finite_density_criterion(&e2, &flat).unwrap().verdict;
    let v_e1 = finite_density_criterion(&e1, &flat).unwrap().verdict;
    let v_h2 = finite_density_criterion(&h2, &hyp).unwrap().verdict;
    let var_e = e2.c_hat_variation.unwrap_or(f64::INFINITY);
    let var_h = h2.c_hat_variation.unwrap_or(f64::INFINITY);
    let pass = v_e2 == CriterionVerdict::Finite
        && v_e1 == CriterionVerdict::Divergent
        && v_h2 == CriterionVerdict::Finite
        && var_e < 0.2
        && var_h < 0.2;
    outcome(
        pass,
        format!("k=0 α=2: {v_e2}, k=0 α=1: {v_e1}, k=1 α=2: {v_h2}; Ĉ variation {var_e:.3} / {var_h:.3} (tol 0.2)"),
    )
}

fn conformal_and_model_checks() -> Outcome {
    let cap = entry(CatalogId::HyperbolicPlanePoincare, 2, 3, 1.0, 0.5);
    let mut worst: f64 = 0.0;
    for i in 0..=24 {
        for j in 0..8 {
            let u = [0.25 * i as f64, j as f64 * std::f64::consts::TAU / 8.0];
            worst = worst.max(conformal_identity_residual(&cap, &u).unwrap().abs());
        }
    }
    let grid = Grid::geomspace(0.01, 30.0, 300).unwrap();
    let mut ratio_ok = true;
    for m in [2, 3, 6] {
        for k in [0.0, 1.0] {
            ratio_ok &= check_ratio_monotone(&grid, &params(m, m + 1, k)).pass;
        }
    }
    let cone = entry(CatalogId::EuclideanConeClifford, 3, 4, 0.0, 0.0);
    let tg = [
        entry(CatalogId::TotallyGeodesic, 2, 3, 0.0, 0.0),
        entry(CatalogId::TotallyGeodesic, 3, 4, 1.0, 0.0),
        entry(CatalogId::HyperbolicPlanePoincare, 2, 3, 1.0, 0.0),
    ];
    let radii = [0.3, 1.0, 4.0, 12.0];
    let cone_dev = radii.iter().map(|s| (intrinsic_density(&cone, *s).unwrap() - FRAC_PI_2).abs()).fold(0.0, f64::max);
    let tg_dev = tg
        .iter()
        .flat_map(|e| radii.iter().map(move |s| (intrinsic_density(e, *s).unwrap() - 1.0).abs()))
        .fold(0.0, f64::max);
    let pass = worst <= 1e-6 && ratio_ok && cone_dev <= 1e-6 && tg_dev <= 1e-6;
    outcome(
        pass,
        format!(
            "conformal residual {worst:.2e} (tol 1e-6), V/v monotone: {ratio_ok}, cone |Θ_int - π/2| = {cone_dev:.2e}, totally geodesic |Θ_int - 1| = {tg_dev:.2e}"
        ),
    )
}

fn fmt_list(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn main() {
    let flat_tg = entry(CatalogId::TotallyGeodesic, 2, 3, 0.0, 0.0);
    let hyp_tg = entry(CatalogId::TotallyGeodesic, 2, 3, 1.0, 0.0);
    let flat_family = run_family(&flat_tg, 1.0);
    let hyp_family = run_family(&hyp_tg, 0.5);

    let results = [
        ("1 ode fidelity", ode_fidelity()),
        ("2 pinching calculus", pinching_calculus()),
        ("3 coarea consistency", coarea_consistency()),
        ("4 monotonicity suite", monotonicity_suite()),
        ("5 equivalence suite", equivalence_suite()),
        ("6 spectral floor", spectral_floor()),
        ("7 weyl defect decay", defect_decay(&flat_family, &hyp_family)),
        ("8 q co-decay", q_codecay(&flat_family, &hyp_family)),
        ("9 flow criterion boundary", flow_boundary()),
        ("10 conformal and model checks", conformal_and_model_checks()),
    ];
    let mut failures = 0;
    for (name, o) in &results {
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failures += usize::from(!o.pass);
    }
    println!("{} of {} criteria pass", results.len() - failures, results.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
