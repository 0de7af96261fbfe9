//! Corner kernels, their Fourier transforms and the trace comparison for the square.

use grunsky::conformal::build_regular_polygon;
use grunsky::corners::{hp_hat, hp_hat_numeric, predicted_trace_constant, trace_compare};
use grunsky::grunsky::{grunsky_psi_contour_with, GridOptions};

fn main() -> grunsky::Result<()> {
    for xi in [0.0, 0.5, 2.0] {
        println!("H^(xi = {xi}) at gamma = 3/2: {:.12} (numeric {:.12})", hp_hat(xi, 1.5)?, hp_hat_numeric(xi, 1.5)?);
    }
    let map = build_regular_polygon(4, 256 + 1024 - 1)?;
    for i in 1..=3 {
        println!("c_{i} = {:.10}", predicted_trace_constant(i, map.corners())?);
    }
    let b = grunsky_psi_contour_with(&map, &GridOptions::rectangular(256, 1024).without_self_check())?;
    let t = trace_compare(&b, map.corners(), 256, 3)?;
    t.write_csv(std::io::stdout().lock())?;
    Ok(())
}
