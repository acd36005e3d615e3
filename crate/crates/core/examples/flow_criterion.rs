//! Finite-density verdicts for second fundamental forms decaying like c/(s log^α s).

use densitylab::flow::{finite_density_criterion, integrate_flow_bound, properness_gate, IIDecayProfile};
use densitylab::model::SpaceFormParams;

fn main() -> densitylab::Result<()> {
    let flat = SpaceFormParams::new(2, 3, 0.0)?;
    for alpha in [0.5, 1.0, 1.5, 2.0, 3.0] {
        let profile = IIDecayProfile::euclidean(1.0, alpha, 10.0)?;
        let bound = integrate_flow_bound(&profile, 1e5)?;
        let report = finite_density_criterion(&bound, &flat)?;
        println!(
            "α = {alpha}: {} (proper: {}, accumulated {:.4e}, relative last-decade increment {:.2e})",
            report.verdict,
            properness_gate(&profile).pass,
            report.accumulated,
            report.relative_increment
        );
    }
    Ok(())
}
