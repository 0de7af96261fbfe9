//! Coulomb-gas partition functions at `beta = 2`: direct moment determinants
//! and the Grunsky-determinant formulas.
//!
//! `Z_n(D) = (1/n!) int_{D^n} prod |z_k - z_l|^2 = det(int_D z^{k-1} conj(z)^{l-1} d^2 z)`.

use std::f64::consts::PI;
use std::io::Write;

use faer::{Mat, Side};
use num_complex::Complex64 as c64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conformal::{ExteriorMapSeries, InteriorMapSeries};
use crate::error::{invalid, Error, Result};
use crate::fft;
use crate::fredholm;
use crate::grunsky::{grunsky_interior_with, grunsky_psi_contour_with, GridOptions, GrunskyMatrix};
use crate::quadrature;

/// Largest `n` for the direct route in double precision.
pub const DIRECT_MAX_N: usize = 24;
/// Resolution doubling stops once `log det` moves by less than this.
const LOGDET_TOL: f64 = 1e-9;
const MAX_SAMPLES: usize = 1 << 17;

/// Which formula computes `log Z_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    Direct,
    Grunsky,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentRule {
    /// Trapezoid rule on a smooth parametrization.
    Trapezoid,
    /// Gauss-Legendre per straight edge (exact for the polynomial integrand).
    EdgeGauss,
}

/// Moment matrix `M_kl`, `1 <= k, l <= n`.
#[derive(Debug, Clone)]
pub struct MomentMatrix {
    n: usize,
    entries: Vec<c64>,
    pub rule: MomentRule,
    /// Samples (trapezoid) or nodes per edge (Gauss) at the final resolution.
    pub samples: usize,
    /// `|log det|` change over the last resolution doubling.
    pub error: f64,
}

impl MomentMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `M_kl`, 1-based.
    pub fn get(&self, k: usize, l: usize) -> c64 {
        self.entries[(k - 1) * self.n + (l - 1)]
    }

    pub fn hermitian_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for k in 1..=self.n {
            for l in 1..=self.n {
                worst = worst.max((self.get(k, l) - self.get(l, k).conj()).norm());
            }
        }
        worst
    }

    /// `log det M` from a Cholesky factorization of the diagonally scaled matrix.
    pub fn log_det(&self) -> Result<f64> {
        let n = self.n;
        let scale: Vec<f64> = (1..=n).map(|k| self.get(k, k).re).collect();
        if let Some(k) = scale.iter().position(|&d| !(d > 0.0)) {
            return Err(Error::NotPositiveDefinite(format!("moment diagonal entry {} is {}", k + 1, scale[k])));
        }
        let s = Mat::from_fn(n, n, |i, j| self.entries[i * n + j] / (scale[i] * scale[j]).sqrt());
        let llt = s
            .llt(Side::Lower)
            .map_err(|e| Error::NotPositiveDefinite(format!("moment matrix at n = {n}: {e:?}")))?;
        let l = llt.L();
        let logdet: f64 = (0..n).map(|i| 2.0 * l[(i, i)].re.ln()).sum();
        Ok(logdet + scale.iter().map(|d| d.ln()).sum::<f64>())
    }

    fn symmetrize(n: usize, mut entries: Vec<c64>) -> Vec<c64> {
        for k in 0..n {
            entries[k * n + k].im = 0.0;
            for l in k + 1..n {
                let avg = 0.5 * (entries[k * n + l] + entries[l * n + k].conj());
                entries[k * n + l] = avg;
                entries[l * n + k] = avg.conj();
            }
        }
        entries
    }
}

/// `M_kl = (1 / 2 i l) sum over a closed ccw boundary of z^{k-1} conj(z)^l dz`,
/// from boundary points and `dz/dtheta` on an equispaced parameter grid.
fn interior_entries(n: usize, pts: &[c64], dz: &[c64], weight: f64) -> Vec<c64> {
    (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (k, l) = (idx / n + 1, idx % n + 1);
            let s: c64 = pts
                .iter()
                .zip(dz)
                .map(|(z, d)| z.powu(k as u32 - 1) * z.conj().powu(l as u32) * d)
                .sum();
            s * weight / (c64::new(0.0, 2.0) * l as f64)
        })
        .collect()
}

/// Moments `int_D z^{k-1} conj(z)^{l-1} d^2 z` of the bounded domain enclosed by `g(T)`.
///
/// Polygon maps integrate each edge between the computed vertices; other maps
/// use the trapezoid rule on the unit circle, doubled until `log det` settles.
pub fn moments_interior(map: &ExteriorMapSeries, n: usize) -> Result<MomentMatrix> {
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    if !map.corners().is_empty() {
        return polygon_moments(map, n);
    }
    if !map.is_exact() && map.tail_bound() > 1e-13 {
        return Err(invalid(format!(
            "series tail {:.2e} on the unit circle is too large for boundary moments",
            map.tail_bound()
        )));
    }
    refine(n, |m| {
        let z = fft::circle_points(1.0, m);
        let (g, dg) = map.on_circle(1.0, m);
        let dz: Vec<c64> = z.iter().zip(&dg).map(|(z, d)| c64::i() * z * d).collect();
        interior_entries(n, &g, &dz, 2.0 * PI / m as f64)
    })
    .map(|(entries, samples, error)| MomentMatrix {
        n,
        entries,
        rule: MomentRule::Trapezoid,
        samples,
        error,
    })
}

fn refine<F>(n: usize, assemble: F) -> Result<(Vec<c64>, usize, f64)>
where
    F: Fn(usize) -> Vec<c64>,
{
    let mut m = (8 * n).max(64).next_power_of_two();
    let mut prev = MomentMatrix {
        n,
        entries: MomentMatrix::symmetrize(n, assemble(m)),
        rule: MomentRule::Trapezoid,
        samples: m,
        error: f64::INFINITY,
    };
    let mut prev_det = prev.log_det().ok();
    while m < MAX_SAMPLES {
        m *= 2;
        let next = MomentMatrix {
            entries: MomentMatrix::symmetrize(n, assemble(m)),
            samples: m,
            ..prev.clone()
        };
        let det = next.log_det().ok();
        if let (Some(a), Some(b)) = (prev_det, det) {
            if (a - b).abs() < LOGDET_TOL {
                return Ok((next.entries, m, (a - b).abs()));
            }
        }
        prev = next;
        prev_det = det;
    }
    Err(Error::Quadrature(format!("moment determinant not settled at {m} samples")))
}

fn polygon_moments(map: &ExteriorMapSeries, n: usize) -> Result<MomentMatrix> {
    let mut order: Vec<usize> = (0..map.corners().len()).collect();
    order.sort_by(|&a, &b| map.corners()[a].theta().total_cmp(&map.corners()[b].theta()));
    let verts = map.polygon_vertices()?;
    let verts: Vec<c64> = order.iter().map(|&i| verts[i]).collect();
    // integrand degree along an edge is k - 1 + l <= 2n - 1
    let assemble = |nodes: usize| {
        let (x, w) = quadrature::gauss_legendre(nodes);
        let mut pts = Vec::with_capacity(verts.len() * nodes);
        let mut dz = Vec::with_capacity(verts.len() * nodes);
        for (p, a) in verts.iter().enumerate() {
            let b = verts[(p + 1) % verts.len()];
            let half = 0.5 * (b - a);
            for (xi, wi) in x.iter().zip(&w) {
                pts.push(a + half * (1.0 + xi));
                dz.push(half * *wi);
            }
        }
        MomentMatrix::symmetrize(n, interior_entries(n, &pts, &dz, 1.0))
    };
    let nodes = n + 2;
    let coarse = MomentMatrix {
        n,
        entries: assemble(nodes),
        rule: MomentRule::EdgeGauss,
        samples: nodes,
        error: 0.0,
    };
    let fine = MomentMatrix {
        entries: assemble(2 * nodes),
        samples: 2 * nodes,
        ..coarse.clone()
    };
    let error = (fine.log_det()? - coarse.log_det()?).abs();
    Ok(MomentMatrix { error, ..fine })
}

/// Moments `int_{D*} z^{-k-1} conj(z)^{-l-1} d^2 z` of the exterior of `f(D)`,
/// reduced to `(1 / 2 i l) sum z^{-k-1} conj(z)^{-l} dz` over the boundary.
pub fn moments_exterior(f: &InteriorMapSeries, n: usize) -> Result<MomentMatrix> {
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    refine(n, |m| {
        let z = fft::circle_points(1.0, m);
        let (w, dw) = f.on_circle(1.0, m);
        let inv: Vec<c64> = w.iter().map(|w| 1.0 / w).collect();
        let dz: Vec<c64> = z.iter().zip(&dw).map(|(z, d)| c64::i() * z * d).collect();
        (0..n * n)
            .into_par_iter()
            .map(|idx| {
                let (k, l) = (idx / n + 1, idx % n + 1);
                let s: c64 = inv
                    .iter()
                    .zip(&dz)
                    .map(|(q, d)| q.powu(k as u32 + 1) * q.conj().powu(l as u32) * d)
                    .sum();
                s * (2.0 * PI / m as f64) / (c64::new(0.0, 2.0) * l as f64)
            })
            .collect()
    })
    .map(|(entries, samples, error)| MomentMatrix {
        n,
        entries,
        rule: MomentRule::Trapezoid,
        samples,
        error,
    })
}

/// `log(pi^n / n!) = log Z_n(unit disk)`.
pub fn log_z_disk(n: usize) -> f64 {
    n as f64 * PI.ln() - (1..=n).map(|k| (k as f64).ln()).sum::<f64>()
}

/// Column count used for the Grunsky route at truncation `n`.
fn grunsky_columns(map: &ExteriorMapSeries, n: usize) -> Result<usize> {
    if map.is_exact() {
        return Ok((8 * n).max(64));
    }
    let avail = (map.truncation() + 1).saturating_sub(n);
    if avail < n {
        return Err(Error::SeriesTooShort {
            available: map.truncation(),
            required: 2 * n - 1,
        });
    }
    Ok(avail.min(8192))
}

/// Grunsky matrix with `n` rows and as many columns as the series supports.
pub fn grunsky_for_logdet(map: &ExteriorMapSeries, n: usize) -> Result<GrunskyMatrix> {
    let cols = grunsky_columns(map, n)?;
    grunsky_psi_contour_with(map, &GridOptions::rectangular(n, cols).without_self_check())
}

/// `log Z_n(D)` for the bounded domain enclosed by `g(T)`.
pub fn log_z_interior(map: &ExteriorMapSeries, n: usize, route: Route) -> Result<f64> {
    match route {
        Route::Direct => {
            check_direct(n)?;
            moments_interior(map, n)?.log_det()
        }
        Route::Grunsky => {
            let b = grunsky_for_logdet(map, n)?;
            let r = map.capacity();
            Ok(log_z_disk(n) + (n * (n + 1)) as f64 * r.ln() + fredholm::logdet_truncated(&b, n)?)
        }
    }
}

const EXTERIOR_MAX_COLS: usize = 8192;

/// `log Z*_n(D*)` for the exterior of `f(D)`.
pub fn log_z_exterior(f: &InteriorMapSeries, n: usize, route: Route) -> Result<f64> {
    match route {
        Route::Direct => {
            check_direct(n)?;
            moments_exterior(f, n)?.log_det()
        }
        Route::Grunsky => {
            // B_1 columns decay at the rate set by the nearest zero of f', so double until settled
            let logdet = |cols: usize| {
                let b = grunsky_interior_with(f, &GridOptions::rectangular(n, cols).without_self_check())?;
                fredholm::logdet_truncated(&b, n)
            };
            let mut cols = (8 * n).max(64);
            let mut value = logdet(cols)?;
            while cols < EXTERIOR_MAX_COLS {
                cols *= 2;
                let next = logdet(cols)?;
                let settled = (next - value).abs() < 1e-13 * next.abs().max(1.0);
                value = next;
                if settled {
                    break;
                }
            }
            let r0 = f.conformal_radius();
            Ok(log_z_disk(n) - (n * (n + 1)) as f64 * r0.ln() + value)
        }
    }
}

fn check_direct(n: usize) -> Result<()> {
    if n == 0 || n > DIRECT_MAX_N {
        return Err(invalid(format!(
            "direct route supports 1 <= n <= {DIRECT_MAX_N} in double precision, got {n}"
        )));
    }
    Ok(())
}

/// `log(Zbar_n(D) / Zbar_n(unit disk)) = log det(I - P_n B B^* P_n)`.
pub fn normalized_ratio(b: &GrunskyMatrix, n: usize) -> Result<f64> {
    fredholm::logdet_truncated(b, n)
}

/// One row of a direct-vs-Grunsky comparison.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IdentityRow {
    pub n: usize,
    pub direct: f64,
    pub grunsky: f64,
    pub abs_diff: f64,
    pub quad_err: f64,
}

/// Both routes for `n` in `ns` on the interior problem.
pub fn interior_identity(map: &ExteriorMapSeries, ns: &[usize]) -> Result<Vec<IdentityRow>> {
    let big = ns.iter().copied().max().ok_or(Error::Empty("n list"))?;
    let b = grunsky_for_logdet(map, big)?;
    let profile = fredholm::logdet_profile(&b, big)?;
    ns.iter()
        .map(|&n| {
            check_direct(n)?;
            let m = moments_interior(map, n)?;
            let direct = m.log_det()?;
            let grunsky = log_z_disk(n) + (n * (n + 1)) as f64 * map.capacity().ln() + profile[n - 1];
            Ok(IdentityRow {
                n,
                direct,
                grunsky,
                abs_diff: (direct - grunsky).abs(),
                quad_err: m.error,
            })
        })
        .collect()
}

/// Both routes for `n` in `ns` on the exterior problem.
pub fn exterior_identity(f: &InteriorMapSeries, ns: &[usize]) -> Result<Vec<IdentityRow>> {
    ns.iter()
        .map(|&n| {
            let m = moments_exterior(f, n)?;
            let direct = m.log_det()?;
            let grunsky = log_z_exterior(f, n, Route::Grunsky)?;
            Ok(IdentityRow {
                n,
                direct,
                grunsky,
                abs_diff: (direct - grunsky).abs(),
                quad_err: m.error,
            })
        })
        .collect()
}

pub fn write_identity_csv<W: Write>(rows: &[IdentityRow], mut w: W) -> Result<()> {
    writeln!(w, "n,logZ_direct,logZ_grunsky,abs_diff,quad_err")?;
    for r in rows {
        writeln!(w, "{},{:.16e},{:.16e},{:.3e},{:.3e}", r.n, r.direct, r.grunsky, r.abs_diff, r.quad_err)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::{build_disk, build_interior_polynomial, build_joukowski};

    #[test]
    fn disk_moments_are_diagonal() {
        let m = moments_interior(&build_disk(), 6).unwrap();
        for k in 1..=6 {
            for l in 1..=6 {
                let want = if k == l { PI / k as f64 } else { 0.0 };
                assert!((m.get(k, l) - want).norm() < 1e-14);
            }
        }
        assert!((m.log_det().unwrap() - log_z_disk(6)).abs() < 1e-13);
        assert!((log_z_disk(3) - (PI.powi(3) / 6.0).ln()).abs() < 1e-15);
    }

    #[test]
    fn joukowski_routes_agree() {
        let j = build_joukowski(0.5).unwrap();
        let m = moments_interior(&j, 8).unwrap();
        assert!(m.hermitian_residual() < 1e-12);
        let d = log_z_interior(&j, 8, Route::Direct).unwrap();
        let g = log_z_interior(&j, 8, Route::Grunsky).unwrap();
        assert!((d - g).abs() < 1e-6 * d.abs().max(1.0), "{d} {g}");
    }

    #[test]
    fn scaling_law() {
        let j = build_joukowski(0.3).unwrap();
        let lam: f64 = 1.7;
        let a = log_z_interior(&j, 5, Route::Direct).unwrap();
        let b = log_z_interior(&j.transformed(lam, 0.0, c64::new(0.0, 0.0)), 5, Route::Direct).unwrap();
        assert!((b - a - 30.0 * lam.ln()).abs() < 1e-9);
    }

    #[test]
    fn exterior_identity_map() {
        let id = build_interior_polynomial(&[c64::new(1.0, 0.0)]).unwrap();
        let d = log_z_exterior(&id, 5, Route::Direct).unwrap();
        assert!((d - log_z_disk(5)).abs() < 1e-12);
        // inversion maps the exterior disk to the disk
        let z = log_z_interior(&build_disk(), 5, Route::Direct).unwrap();
        assert!((d - z).abs() < 1e-12);
    }

    #[test]
    fn direct_route_is_capped() {
        assert!(log_z_interior(&build_disk(), DIRECT_MAX_N + 1, Route::Direct).is_err());
    }
}
