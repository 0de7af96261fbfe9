//! Grunsky coefficients from both engines, checked against the ellipse closed form.

use grunsky::conformal::{build_joukowski, build_regular_polygon};
use grunsky::fredholm::operator_norm;
use grunsky::grunsky::{grunsky_log_fft, grunsky_psi_contour};

fn main() -> grunsky::Result<()> {
    let n = 32;
    let ellipse = build_joukowski(0.5)?;
    let a = grunsky_log_fft(&ellipse, n)?;
    let b = grunsky_psi_contour(&ellipse, n)?;
    println!("ellipse: engines differ by {:.2e}", a.max_abs_diff(&b));
    for k in 1..=4 {
        println!("  b_{k}{k} = {:.12} (c^k = {:.12})", b.b(k, k).re, 0.5f64.powi(k as i32));
    }

    let square = grunsky_psi_contour(&build_regular_polygon(4, 16 * n)?, n)?;
    println!("square: symmetry residual {:.2e}, operator norm {:.6}", square.symmetry_residual(), operator_norm(&square, n)?);
    // only k, l = 3 mod 4 survive the fourfold symmetry
    for (k, l) in [(3, 3), (3, 7), (7, 7), (1, 1), (2, 6)] {
        println!("  b_{k},{l} = {:.3e}", square.b(k, l).norm());
    }
    Ok(())
}
