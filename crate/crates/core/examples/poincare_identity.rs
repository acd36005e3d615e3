//! Conformal change of the second fundamental form on a cap in the Poincaré ball.

use densitylab::catalog::{conformal_data, conformal_identity_residual, make_entry, CatalogId};
use densitylab::model::SpaceFormParams;

fn main() -> densitylab::Result<()> {
    let e = make_entry(CatalogId::HyperbolicPlanePoincare, SpaceFormParams::new(2, 3, 1.0)?, 0.5)?;
    for rho in [0.0, 1.0, 3.0, 6.0, 9.0] {
        let u = [rho, 0.8];
        let c = conformal_data(&e, &u)?;
        println!(
            "ρ = {rho}: |ĪI|² = {:.6e}, λ = {:.3e}, residual {:.2e}",
            c.euclidean_ii_sq,
            c.lambda,
            conformal_identity_residual(&e, &u)?
        );
    }
    Ok(())
}
