//! Density, flux, tilt and energy profiles of the catenoid.

use densitylab::catalog::{make_entry, CatalogId};
use densitylab::model::{Grid, SpaceFormParams};
use densitylab::profiles::{annulus_volume, build_profile};

fn main() -> densitylab::Result<()> {
    let e = make_entry(CatalogId::EuclideanCatenoid, SpaceFormParams::new(2, 3, 0.0)?, 0.0)?;
    let prof = build_profile(&e, &Grid::geomspace(1.05, 100.0, 12)?)?;
    println!("{:>9} {:>10} {:>10} {:>10} {:>10} {:>10}", "s", "Θ", "J", "J̄", "T", "E");
    for (i, s) in prof.samples().iter().enumerate() {
        println!(
            "{s:>9.3} {:>10.6} {:>10.6} {:>10.6} {:>10.3e} {:>10.6}",
            prof.theta[i], prof.flux_j[i], prof.barj[i], prof.tilt_t[i], prof.energy_e[i]
        );
    }
    let a = annulus_volume(&e, 0.5, 2.0)?;
    println!("annulus (0.5, 2): direct {:.12}, coarea {:.12}", a.direct.value, a.coarea.value);
    Ok(())
}
