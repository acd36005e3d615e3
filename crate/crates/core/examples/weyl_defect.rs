//! Weyl defects and Q diagnostics of windowed radial waves on flat and hyperbolic planes.

use densitylab::catalog::{make_entry, CatalogId};
use densitylab::model::SpaceFormParams;
use densitylab::spectral::{cheeger_bound, probe_family, window_family};

fn main() -> densitylab::Result<()> {
    for (k, lambda) in [(0.0, 1.0), (1.0, 0.5)] {
        let e = make_entry(CatalogId::TotallyGeodesic, SpaceFormParams::new(2, 3, k)?, 0.0)?;
        let floor = cheeger_bound(&e, &[1.0, 5.0, 10.0]).floor;
        println!("k = {k}, λ = {lambda}, spectral floor {floor}");
        let family = window_family(lambda, 10.0, 4, &e.params);
        for r in probe_family(&e, &family, 0.1, None)? {
            println!(
                "  t = {:>4}, s = {:>4}, S = {:>8.3}: defect {:.4e}, Q {:.4e}",
                r.config.t, r.config.s, r.config.outer, r.defect, r.q_value
            );
        }
    }
    Ok(())
}
