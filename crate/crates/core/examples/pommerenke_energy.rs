//! Fekete-Pommerenke energy from the Grunsky block and the log-derivative vector.

use grunsky::conformal::build_joukowski;
use grunsky::fredholm::pommerenke_energy;
use grunsky::grunsky::{dvector_from_grunsky, dvector_from_map, grunsky_psi_contour};

fn main() -> grunsky::Result<()> {
    for c in [0.1, 0.3, 0.5] {
        let map = build_joukowski(c)?;
        let n = 128;
        let b = grunsky_psi_contour(&map, n)?;
        let d = dvector_from_grunsky(&b, n)?;
        let direct = dvector_from_map(&map, n)?;
        let e = pommerenke_energy(&b, &d, n)?;
        println!(
            "joukowski {c}: I^F = {:.12} (converged {}), d-vector routes differ by {:.1e}",
            e.value,
            e.converged,
            d.max_abs_diff(&direct)
        );
    }
    Ok(())
}
