use std::f64::consts::PI;

use num_complex::Complex64 as c64;

use super::{Engine, Grid, GridOptions, GrunskyMatrix};
use crate::conformal::{ExteriorMapSeries, InteriorMapSeries};
use crate::error::{Error, Result};
use crate::fft::{self, PowerSign};

/// Largest phase step between neighbouring samples accepted by the unwrapper.
const MAX_PHASE_STEP: f64 = 0.5 * PI;
/// Kernel denominators below this are treated as a radii collision.
const COLLISION: f64 = 1e-13;

/// Grunsky matrix by the log-kernel FFT engine, `N x N`.
pub fn grunsky_log_fft(map: &ExteriorMapSeries, n: usize) -> Result<GrunskyMatrix> {
    grunsky_log_fft_with(map, &GridOptions::square(n))
}

/// Grunsky matrix by the Psi-kernel FFT engine, `N x N`.
pub fn grunsky_psi_contour(map: &ExteriorMapSeries, n: usize) -> Result<GrunskyMatrix> {
    grunsky_psi_contour_with(map, &GridOptions::square(n))
}

/// Interior block `B_1` of a polynomial map, `N x N`.
pub fn grunsky_interior(f: &InteriorMapSeries, n: usize) -> Result<GrunskyMatrix> {
    grunsky_interior_with(f, &GridOptions::square(n))
}

fn check_series(map: &ExteriorMapSeries, opts: &GridOptions) -> Result<()> {
    opts.validate()?;
    // a_{kl} of the truncated map is exact for k + l <= N + 1
    let required = opts.rows + opts.cols - 1;
    if !map.is_exact() && map.truncation() < required {
        return Err(Error::SeriesTooShort {
            available: map.truncation(),
            required,
        });
    }
    Ok(())
}

fn with_self_check<F>(opts: &GridOptions, run: F) -> Result<GrunskyMatrix>
where
    F: Fn(&GridOptions) -> Result<GrunskyMatrix>,
{
    let mut full = run(opts)?;
    if opts.self_check {
        if let Some(half) = opts.halved() {
            let coarse = run(&half)?;
            full.accuracy = full.max_abs_diff(&coarse);
        }
    }
    Ok(full)
}

pub fn grunsky_log_fft_with(map: &ExteriorMapSeries, opts: &GridOptions) -> Result<GrunskyMatrix> {
    check_series(map, opts)?;
    with_self_check(opts, |o| {
        let grid = o.exterior_grid()?;
        log_kernel(
            &grid,
            o,
            Engine::LogFft,
            |r, m| map.on_circle(r, m).0,
            map.capacity(),
            PowerSign::Negative,
        )
    })
}

pub fn grunsky_interior_with(f: &InteriorMapSeries, opts: &GridOptions) -> Result<GrunskyMatrix> {
    opts.validate()?;
    with_self_check(opts, |o| {
        let grid = o.interior_grid()?;
        log_kernel(&grid, o, Engine::Interior, |r, m| f.on_circle(r, m).0, 1.0, PowerSign::Positive)
    })
}

/// Unwraps the imaginary parts (phases) starting at `start_phase`; fails on a
/// large step or a nonzero winding around the closed loop.
fn unwrap_in_place(vals: &mut [c64], start_phase: f64, context: &'static str) -> Result<()> {
    let first_arg = vals[0].im;
    let mut prev_raw = first_arg;
    let mut phase = start_phase;
    vals[0].im = phase;
    for v in vals.iter_mut().skip(1) {
        let step = fft::wrap_angle(v.im - prev_raw);
        if step.abs() > MAX_PHASE_STEP {
            return Err(Error::BranchUnwrap { context, winding: step });
        }
        prev_raw = v.im;
        phase += step;
        v.im = phase;
    }
    let closing = fft::wrap_angle(first_arg - prev_raw);
    let winding = phase + closing - start_phase;
    if winding.abs() > PI {
        return Err(Error::BranchUnwrap { context, winding });
    }
    Ok(())
}

fn log_kernel<E>(
    grid: &Grid,
    opts: &GridOptions,
    engine: Engine,
    eval: E,
    scale: f64,
    sign: PowerSign,
) -> Result<GrunskyMatrix>
where
    E: Fn(f64, usize) -> Vec<c64>,
{
    let zeta = fft::circle_points(grid.r1, grid.m1);
    let z = fft::circle_points(grid.r2, grid.m2);
    let g1 = eval(grid.r1, grid.m1);
    let g2 = eval(grid.r2, grid.m2);
    let kernel = |j: usize, q: usize| -> c64 { (g1[j] - g2[q]) / ((zeta[j] - z[q]) * scale) };

    // phases along the first column anchor every row
    let mut anchor: Vec<c64> = (0..grid.m1).map(|j| kernel(j, 0).ln()).collect();
    let start = anchor[0].im;
    unwrap_in_place(&mut anchor, start, "anchor column")?;

    let coeffs = fft::torus_coefficients(grid.m1, grid.m2, opts.rows, opts.cols, sign, |j, row| {
        for (q, v) in row.iter_mut().enumerate() {
            let k = kernel(j, q);
            if k.norm() == 0.0 {
                return Err(Error::RadiiCollision(0.0));
            }
            *v = k.ln();
        }
        let start = anchor[j].im;
        unwrap_in_place(row, start, "kernel row")
    })?;
    Ok(GrunskyMatrix::new(
        opts.rows,
        opts.cols,
        finish(coeffs, grid, opts, sign, |_, _| -1.0),
        engine,
        Some(*grid),
    ))
}

/// Converts raw torus coefficients `c` into `b_{kl}`: undo the radius weights,
/// apply `factor(k, l)` and multiply by `sqrt(kl)`.
fn finish<F>(mut coeffs: Vec<c64>, grid: &Grid, opts: &GridOptions, sign: PowerSign, factor: F) -> Vec<c64>
where
    F: Fn(usize, usize) -> f64,
{
    let (w1, w2) = match sign {
        PowerSign::Negative => (grid.r1, grid.r2),
        PowerSign::Positive => (1.0 / grid.r1, 1.0 / grid.r2),
    };
    let rw: Vec<f64> = (1..=opts.rows).map(|k| w1.powi(k as i32)).collect();
    let cw: Vec<f64> = (1..=opts.cols).map(|l| w2.powi(l as i32)).collect();
    for (k, row) in coeffs.chunks_mut(opts.cols).enumerate() {
        for (l, v) in row.iter_mut().enumerate() {
            let (kk, ll) = (k + 1, l + 1);
            *v *= rw[k] * cw[l] * factor(kk, ll) * ((kk * ll) as f64).sqrt();
        }
    }
    coeffs
}

pub fn grunsky_psi_contour_with(map: &ExteriorMapSeries, opts: &GridOptions) -> Result<GrunskyMatrix> {
    check_series(map, opts)?;
    with_self_check(opts, |o| {
        let grid = o.exterior_grid()?;
        match psi_kernel(map, &grid, o) {
            Err(Error::RadiiCollision(_)) => {
                // widen the gap between the circles and retry once
                let r2 = grid.r1 + 2.0 * (grid.r2 - grid.r1);
                let wider = o.grid(grid.r1, r2)?;
                psi_kernel(map, &wider, o)
            }
            other => other,
        }
    })
}

fn psi_kernel(map: &ExteriorMapSeries, grid: &Grid, opts: &GridOptions) -> Result<GrunskyMatrix> {
    let zeta = fft::circle_points(grid.r1, grid.m1);
    let z = fft::circle_points(grid.r2, grid.m2);
    let (g1, d1) = map.on_circle(grid.r1, grid.m1);
    let (g2, d2) = map.on_circle(grid.r2, grid.m2);
    let zd1: Vec<c64> = zeta.iter().zip(&d1).map(|(a, b)| a * b).collect();
    let zd2: Vec<c64> = z.iter().zip(&d2).map(|(a, b)| a * b).collect();
    let coeffs = fft::torus_coefficients(grid.m1, grid.m2, opts.rows, opts.cols, PowerSign::Negative, |j, row| {
        for (q, v) in row.iter_mut().enumerate() {
            let den = g1[j] - g2[q];
            if den.norm() < COLLISION {
                return Err(Error::RadiiCollision(den.norm()));
            }
            *v = (zd1[j] - zd2[q]) / den;
        }
        Ok(())
    })?;
    Ok(GrunskyMatrix::new(
        opts.rows,
        opts.cols,
        finish(coeffs, grid, opts, PowerSign::Negative, |k, l| 1.0 / (k + l) as f64),
        Engine::PsiContour,
        Some(*grid),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::{build_disk, build_interior_polynomial, build_joukowski, build_regular_polygon};

    #[test]
    fn disk_gives_zero_matrix() {
        let d = build_disk();
        for b in [grunsky_log_fft(&d, 16).unwrap(), grunsky_psi_contour(&d, 16).unwrap()] {
            assert!(b.entries().iter().all(|v| v.norm() < 1e-15));
        }
    }

    #[test]
    fn joukowski_diagonal_both_engines() {
        let c: f64 = 0.5;
        let j = build_joukowski(c).unwrap();
        for b in [grunsky_log_fft(&j, 32).unwrap(), grunsky_psi_contour(&j, 32).unwrap()] {
            for k in 1..=32 {
                for l in 1..=32 {
                    let want = if k == l { c.powi(k as i32) } else { 0.0 };
                    assert!((b.b(k, l) - want).norm() < 1e-10, "{} ({k},{l}) {}", b.engine(), b.b(k, l));
                }
            }
            assert!(b.accuracy() < 1e-10);
        }
    }

    #[test]
    fn series_length_is_enforced() {
        let sq = build_regular_polygon(4, 32).unwrap();
        assert!(matches!(grunsky_log_fft(&sq, 32), Err(Error::SeriesTooShort { .. })));
        assert!(grunsky_log_fft(&sq, 16).is_ok());
    }

    #[test]
    fn interior_quadratic_first_entry() {
        // log(1 + c(zeta + z)) has zeta z coefficient -c^2
        let c = 0.05;
        let f = build_interior_polynomial(&[c64::new(1.0, 0.0), c64::new(c, 0.0)]).unwrap();
        let b = grunsky_interior(&f, 8).unwrap();
        assert!((b.b(1, 1) - c * c).norm() < 1e-14);
        // zeta z^2 coefficient is c^3, from c^3 (zeta+z)^3 / 3
        assert!((b.b(1, 2) + 2.0f64.sqrt() * c * c * c).norm() < 1e-14);
        assert!(b.symmetry_residual() < 1e-12, "{}", b.symmetry_residual());
        let id = build_interior_polynomial(&[c64::new(1.0, 0.0)]).unwrap();
        assert!(grunsky_interior(&id, 8).unwrap().entries().iter().all(|v| v.norm() < 1e-11));
    }
}
