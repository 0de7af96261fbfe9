//! Coulomb-gas partition functions by direct moments and through the Grunsky determinant.

use grunsky::conformal::{build_interior_polynomial, build_joukowski};
use grunsky::coulomb::{exterior_identity, interior_identity, log_z_disk};
use num_complex::Complex64 as c64;

fn main() -> grunsky::Result<()> {
    let ns: Vec<usize> = (1..=10).collect();
    println!("log Z_3(disk) = {:.12}", log_z_disk(3));

    println!("interior of the ellipse, joukowski 0.5");
    for r in interior_identity(&build_joukowski(0.5)?, &ns)? {
        println!("  n = {:>2}  direct {:>14.9}  grunsky {:>14.9}  diff {:.1e}", r.n, r.direct, r.grunsky, r.abs_diff);
    }

    println!("exterior of f(D), f(z) = z + 0.2 z^2");
    let f = build_interior_polynomial(&[c64::new(1.0, 0.0), c64::new(0.2, 0.0)])?;
    for r in exterior_identity(&f, &ns)? {
        println!("  n = {:>2}  direct {:>14.9}  grunsky {:>14.9}  diff {:.1e}", r.n, r.direct, r.grunsky, r.abs_diff);
    }
    Ok(())
}
