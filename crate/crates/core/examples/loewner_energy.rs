//! Loewner energy from the Fredholm determinant of the Grunsky operator.

use grunsky::conformal::{build_joukowski, build_regular_polygon};
use grunsky::fredholm::loewner_energy;
use grunsky::grunsky::grunsky_psi_contour;

fn main() -> grunsky::Result<()> {
    let c: f64 = 0.5;
    let b = grunsky_psi_contour(&build_joukowski(c)?, 64)?;
    let e = loewner_energy(&b)?;
    let exact: f64 = -12.0 * (1..=64).map(|k| (1.0 - c.powi(2 * k)).ln()).sum::<f64>();
    println!("ellipse c = {c}: I^L = {:.12}, closed form {exact:.12}", e.value);

    // the square has infinite energy: partial sums keep growing like (4/3)... log n
    let b = grunsky_psi_contour(&build_regular_polygon(4, 2048)?, 256)?;
    let e = loewner_energy(&b)?;
    for (n, v) in &e.truncations {
        println!("square n = {n:>4}: partial I^L = {v:.6}");
    }
    Ok(())
}
