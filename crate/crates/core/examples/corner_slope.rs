//! Logarithmic growth of -log det(I - C_n) for the square.

use grunsky::conformal::build_regular_polygon;
use grunsky::corners::{corner_sum, fit_log_slope, AngleMode, FitMethod};
use grunsky::fredholm::logdet_profile;
use grunsky::grunsky::{grunsky_psi_contour_with, GridOptions};

fn main() -> grunsky::Result<()> {
    let (rows, cols) = (512, 2048);
    let map = build_regular_polygon(4, rows + cols - 1)?;
    let b = grunsky_psi_contour_with(&map, &GridOptions::rectangular(rows, cols).without_self_check())?;
    let profile = logdet_profile(&b, rows)?;
    let ns = [32usize, 64, 128, 256, 512];
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = ns.iter().map(|&n| -profile[n - 1]).collect();
    let fit = fit_log_slope(&xs, &ys, FitMethod::SuccessiveDifferences)?;
    let target = corner_sum(map.corners(), AngleMode::Interior) / 6.0;
    println!("successive slopes {:?}", fit.successive);
    println!("slope {:.4} (least squares {:.4}), predicted {target:.4}", fit.slope, fit.ls_slope);
    Ok(())
}
