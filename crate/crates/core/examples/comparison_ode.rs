//! Solve the comparison equation for a pinched curvature profile and check its limits.

use densitylab::comparison::{classify_pinching, solve_g, verify_pinching_limits, CurvatureProfile};
use densitylab::model::Grid;

fn main() -> densitylab::Result<()> {
    let profile = CurvatureProfile::exp_tail(1.0, 1.0, 1.0)?;
    let grid = Grid::linspace(0.01, 40.0, 4000)?;
    let sol = solve_g(&profile, &grid)?;
    println!("profile: {profile}");
    println!("pinching: {}", classify_pinching(&profile));
    for i in (0..grid.len()).step_by(500).chain([grid.len() - 1]) {
        println!("s = {:>6.2}  g/sn = {:.12}  ζ = {:.3e}", grid.samples()[i], sol.g_over_sn[i], sol.zeta[i]);
    }
    let report = verify_pinching_limits(&sol);
    for c in &report.checks {
        println!("{:<20} {:>12.3e}  tol {:>9.1e}  {}", c.name, c.value, c.tolerance, if c.pass { "ok" } else { "FAIL" });
    }
    Ok(())
}
