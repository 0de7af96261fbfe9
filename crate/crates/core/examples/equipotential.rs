//! Energies of the equipotentials of the square as r decreases to 1.

use grunsky::conformal::build_regular_polygon;
use grunsky::fredholm::{logdet_truncated, pommerenke_value};
use grunsky::grunsky::{dvector_from_grunsky, grunsky_psi_contour_with, scale_equipotential, GridOptions};

fn main() -> grunsky::Result<()> {
    let (rows, cols) = (512, 2048);
    let map = build_regular_polygon(4, rows + cols - 1)?;
    let b = grunsky_psi_contour_with(&map, &GridOptions::rectangular(rows, cols).without_self_check())?;
    let d = dvector_from_grunsky(&b, rows)?;
    for q in [4.0, 8.0, 16.0, 32.0, 64.0] {
        let r = 1.0 + 1.0 / q;
        let br = scale_equipotential(&b, r)?;
        let il = -12.0 * logdet_truncated(&br, rows)?;
        let i_f = pommerenke_value(&br, &d.equipotential(r)?, rows)?;
        println!("r - 1 = 1/{q:<3}  I^L = {il:.6}  I^F = {i_f:.6}");
    }
    Ok(())
}
