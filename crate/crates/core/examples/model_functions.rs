//! Model-space functions and the volume-ratio check.

use densitylab::model::{self, check_ratio_monotone, Grid, SpaceFormParams};

fn main() -> densitylab::Result<()> {
    let grid = Grid::geomspace(0.1, 10.0, 6)?;
    for k in [0.0, 1.0] {
        let p = SpaceFormParams::new(3, 4, k)?;
        println!("m = 3, k = {k}");
        println!("{:>8} {:>14} {:>14} {:>10} {:>10}", "s", "v", "V", "V/v", "Vv'/v²");
        for &s in grid.samples() {
            println!(
                "{s:>8.3} {:>14.6e} {:>14.6e} {:>10.6} {:>10.6}",
                model::sphere_volume(s, &p)?,
                model::ball_volume(s, &p)?,
                model::ball_sphere_ratio(s, &p)?,
                model::volume_growth_ratio(s, &p),
            );
        }
        println!("V/v non-decreasing: {}\n", check_ratio_monotone(&grid, &p).pass);
    }
    Ok(())
}
