//! Verify the monotone quantities and estimate the limits at infinity.

use densitylab::catalog::{make_entry, CatalogId};
use densitylab::model::{Grid, SpaceFormParams};
use densitylab::monotone::{equivalence_report, verify_monotonicity};
use densitylab::profiles::build_profile;

fn main() -> densitylab::Result<()> {
    let p = SpaceFormParams::new(2, 3, 0.0)?;
    let e = make_entry(CatalogId::EuclideanCatenoid, p, 0.0)?;
    let prof = build_profile(&e, &Grid::linspace(1.05, 200.0, 400)?)?;
    println!("{}", verify_monotonicity(&prof, &p, None));
    let eq = equivalence_report(&prof, &p, None);
    println!("Θ(∞) ≈ {:.6} ({:?} fit)", eq.theta_limit_estimate, eq.theta_fit.form);
    println!("J̄(∞) ≈ {:.6} ({:?} fit)", eq.barj_limit_estimate, eq.barj_fit.form);
    println!(
        "∫(sn'/sn)T = {:.4e}, tail beyond {} = {:.3e}, verdicts {:?}/{:?}/{:?}",
        eq.tilt_integral, eq.tail_start, eq.tilt_tail_increment,
        eq.verdict_theta, eq.verdict_barj, eq.verdict_tilt
    );
    Ok(())
}
