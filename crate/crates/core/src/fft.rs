//! Laurent/Taylor series evaluation on circles and 2D coefficient extraction
//! on a torus of two circles.

use std::f64::consts::PI;

use num_complex::Complex64 as c64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Sample points `r e^{2 pi i j / m}`, `j = 0..m`.
pub fn circle_points(radius: f64, m: usize) -> Vec<c64> {
    (0..m)
        .map(|j| c64::from_polar(radius, 2.0 * PI * j as f64 / m as f64))
        .collect()
}

/// Evaluates `sum_k coeffs[k] z^{-k}` at the `m` equispaced points of `|z| = radius`.
///
/// Coefficients beyond `m` are folded onto their alias class, which is exact
/// for the DFT grid.
pub fn negative_powers_on_circle(coeffs: &[c64], radius: f64, m: usize) -> Vec<c64> {
    let mut buf = vec![c64::new(0.0, 0.0); m];
    let inv = 1.0 / radius;
    let mut scale = 1.0;
    for (k, c) in coeffs.iter().enumerate() {
        buf[k % m] += c * scale;
        scale *= inv;
        if scale == 0.0 {
            break;
        }
    }
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(m).process(&mut buf);
    buf
}

/// Evaluates `sum_k coeffs[k] z^{k}` at the `m` equispaced points of `|z| = radius`.
pub fn positive_powers_on_circle(coeffs: &[c64], radius: f64, m: usize) -> Vec<c64> {
    let mut buf = vec![c64::new(0.0, 0.0); m];
    let mut scale = 1.0;
    for (k, c) in coeffs.iter().enumerate() {
        buf[k % m] += c * scale;
        scale *= radius;
    }
    let mut planner = FftPlanner::new();
    planner.plan_fft_inverse(m).process(&mut buf);
    buf
}

/// Direction of the coefficients read off a torus transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerSign {
    /// Coefficients of `zeta^{-k} z^{-l}`.
    Negative,
    /// Coefficients of `zeta^{k} z^{l}`.
    Positive,
}

/// Two-dimensional Fourier coefficients of a kernel sampled on an `m1 x m2` torus grid.
///
/// `fill_row(j, row)` must write the kernel values `h(zeta_j, z_0..z_{m2})` for
/// the j-th point of the first circle. The result is `rows x cols` row-major and holds
/// the unscaled coefficients `c[k-1][l-1]` of `e^{-+ i k phi} e^{-+ i l psi}`
/// for `1 <= k <= rows`, `1 <= l <= cols` (sign per [`PowerSign`]).
///
/// Rows are transformed one at a time and only the first `cols` retained, so
/// peak memory is `O(m1 * cols)` rather than `O(m1 * m2)`.
pub fn torus_coefficients<F, E>(
    m1: usize,
    m2: usize,
    rows: usize,
    cols: usize,
    sign: PowerSign,
    fill_row: F,
) -> Result<Vec<c64>, E>
where
    F: Fn(usize, &mut [c64]) -> Result<(), E> + Sync,
    E: Send,
{
    assert!(rows < m1 && cols < m2);
    let mut planner = FftPlanner::new();
    let (row_fft, col_fft): (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) = match sign {
        PowerSign::Negative => (planner.plan_fft_inverse(m2), planner.plan_fft_inverse(m1)),
        PowerSign::Positive => (planner.plan_fft_forward(m2), planner.plan_fft_forward(m1)),
    };

    // Stage 1: transform each row, keep modes 1..=cols.
    let mut partial = vec![c64::new(0.0, 0.0); m1 * cols];
    partial
        .par_chunks_mut(cols)
        .enumerate()
        .try_for_each_init(
            || {
                (
                    vec![c64::new(0.0, 0.0); m2],
                    vec![c64::new(0.0, 0.0); row_fft.get_inplace_scratch_len()],
                )
            },
            |(row, scratch), (j, out)| {
                fill_row(j, row)?;
                row_fft.process_with_scratch(row, scratch);
                out.copy_from_slice(&row[1..=cols]);
                Ok(())
            },
        )?;

    // Stage 2: transform the retained columns, keep modes 1..=rows.
    let norm = 1.0 / (m1 as f64 * m2 as f64);
    let columns: Vec<Vec<c64>> = (0..cols)
        .into_par_iter()
        .map_init(
            || {
                (
                    vec![c64::new(0.0, 0.0); m1],
                    vec![c64::new(0.0, 0.0); col_fft.get_inplace_scratch_len()],
                )
            },
            |(col, scratch), l| {
                for j in 0..m1 {
                    col[j] = partial[j * cols + l];
                }
                col_fft.process_with_scratch(col, scratch);
                col[1..=rows].iter().map(|v| v * norm).collect()
            },
        )
        .collect();

    let mut out = vec![c64::new(0.0, 0.0); rows * cols];
    for (l, column) in columns.iter().enumerate() {
        for (k, v) in column.iter().enumerate() {
            out[k * cols + l] = *v;
        }
    }
    Ok(out)
}

/// Fourier coefficients `c_k`, `1 <= k <= count`, of samples on an equispaced grid.
pub fn circle_coefficients(samples: &[c64], count: usize, sign: PowerSign) -> Vec<c64> {
    let m = samples.len();
    let mut buf = samples.to_vec();
    let mut planner = FftPlanner::new();
    match sign {
        PowerSign::Negative => planner.plan_fft_inverse(m).process(&mut buf),
        PowerSign::Positive => planner.plan_fft_forward(m).process(&mut buf),
    }
    buf[1..=count].iter().map(|v| v / m as f64).collect()
}

/// Wraps an angle difference into `(-pi, pi]`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y == -PI {
        PI
    } else {
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_powers_match_direct_sum() {
        let coeffs: Vec<c64> = (0..40).map(|k| c64::new(0.5f64.powi(k), 0.1 * k as f64)).collect();
        let vals = negative_powers_on_circle(&coeffs, 1.3, 16);
        for (j, z) in circle_points(1.3, 16).iter().enumerate() {
            let direct: c64 = coeffs.iter().enumerate().map(|(k, c)| c * z.powi(-(k as i32))).sum();
            assert!((direct - vals[j]).norm() < 1e-12);
        }
    }

    #[test]
    fn positive_powers_match_direct_sum() {
        let coeffs: Vec<c64> = (0..10).map(|k| c64::new(1.0 / (k + 1) as f64, -0.2)).collect();
        let vals = positive_powers_on_circle(&coeffs, 0.7, 32);
        for (j, z) in circle_points(0.7, 32).iter().enumerate() {
            let direct: c64 = coeffs.iter().enumerate().map(|(k, c)| c * z.powi(k as i32)).sum();
            assert!((direct - vals[j]).norm() < 1e-13);
        }
    }

    #[test]
    fn torus_recovers_separable_product() {
        // h = zeta^{-2} z^{-3}
        let (m1, m2) = (16, 32);
        let zs = circle_points(1.0, m1);
        let ws = circle_points(1.0, m2);
        let c = torus_coefficients::<_, ()>(m1, m2, 4, 5, PowerSign::Negative, |j, row| {
            for (k, w) in ws.iter().enumerate() {
                row[k] = zs[j].powi(-2) * w.powi(-3);
            }
            Ok(())
        })
        .unwrap();
        for k in 0..4 {
            for l in 0..5 {
                let expect = if k == 1 && l == 2 { 1.0 } else { 0.0 };
                assert!((c[k * 5 + l] - expect).norm() < 1e-14, "{k} {l}");
            }
        }
    }

    #[test]
    fn wrap_angle_range() {
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(-0.5) + 0.5).abs() < 1e-15);
        assert!((wrap_angle(2.0 * PI + 0.1) - 0.1).abs() < 1e-14);
    }
}
