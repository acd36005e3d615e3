//! Sample each catalog entry along its orbit parameter.

use densitylab::catalog::{make_entry, CatalogId};
use densitylab::model::SpaceFormParams;

fn main() -> densitylab::Result<()> {
    let entries = [
        (CatalogId::TotallyGeodesic, SpaceFormParams::new(2, 3, 0.0)?, 0.7),
        (CatalogId::EuclideanConeClifford, SpaceFormParams::new(3, 4, 0.0)?, 0.0),
        (CatalogId::EuclideanCatenoid, SpaceFormParams::new(2, 3, 0.0)?, 0.0),
        (CatalogId::HyperbolicPlanePoincare, SpaceFormParams::new(2, 3, 1.0)?, 0.5),
    ];
    for (id, p, offset) in entries {
        let e = make_entry(id, p, offset)?;
        println!("{id} (offset {offset}), min r = {}, critical levels {:?}", e.min_radius(), e.critical_levels());
        for s in [1.5, 3.0, 10.0] {
            let Some(q) = e.orbit_of_radius(s) else { continue };
            let o = e.orbit(q)?;
            println!(
                "  r = {s:>5}: |∇r| = {:.6}, Δr = {:.6}, |II| = {:.3e}, level volume = {:.6}",
                o.point.gradr_norm, o.point.lap_r, o.point.ii_norm, o.level_volume
            );
        }
    }
    Ok(())
}
