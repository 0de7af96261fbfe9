//! Comparison of `tr(P_n B B^* P_n)^i` with the model traces built from the
//! corner kernels, and the entrywise residual `b_kl - K(k, l)`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::Write;

use faer::linalg::matmul::triangular::{self, BlockStructure};
use faer::{Accum, Mat, Side};
use num_complex::Complex64 as c64;
use rayon::prelude::*;

use super::kernels::{hp_unchecked, kernel_k, predicted_trace_constant, trace_constant_single};
use crate::conformal::{rho, CornerSpec};
use crate::error::{invalid, Error, Result};
use crate::fredholm;
use crate::grunsky::{GrunskyMatrix, LogDerivVector};

/// Traces at one power `i`.
#[derive(Debug, Clone, Copy)]
pub struct TraceRow {
    pub i: usize,
    /// `tr(P_n B B^* P_n)^i`.
    pub grunsky: f64,
    /// `sum_p tr(P_n K_p^2 P_n)^i`.
    pub kernel: f64,
    /// `|grunsky - kernel|`.
    pub difference: f64,
    /// `sum_p (1/2pi) int H_p^^{2i}`.
    pub constant: f64,
    /// `kernel - constant * H_n`, with `H_n` the harmonic number.
    pub kernel_minus_predicted: f64,
}

#[derive(Debug, Clone)]
pub struct TraceComparison {
    pub n: usize,
    /// Columns used for the products `B B^*` and `K_p^2`.
    pub columns: usize,
    pub rows: Vec<TraceRow>,
}

impl TraceComparison {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n,i,tr_grunsky,tr_kernel,difference,constant,kernel_minus_predicted")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                self.n, r.i, r.grunsky, r.kernel, r.difference, r.constant, r.kernel_minus_predicted
            )?;
        }
        Ok(())
    }
}

pub fn harmonic(n: usize) -> f64 {
    (1..=n).rev().map(|l| 1.0 / l as f64).sum()
}

/// Lower triangle of `P_n K_p^2 P_n` for one exterior angle.
///
/// The product runs over `columns` inner indices, plus the leading-order tail
/// `sum_{j > columns} c^2 (kl)^{gamma - 1/2} j^{-2 gamma - 1}` with
/// `c = -gamma sin(pi gamma) / pi`, so it approximates the infinite product.
fn kernel_square_gram(gamma: f64, n: usize, columns: usize) -> Result<Mat<f64>> {
    if n == 0 || columns < n {
        return Err(invalid(format!("need 0 < n <= columns, got n = {n}, columns = {columns}")));
    }
    if !(gamma > 0.0 && gamma < 2.0) {
        return Err(invalid(format!("exterior angle fraction {gamma} outside (0, 2)")));
    }
    let mut g = Mat::<f64>::zeros(n, n);
    if gamma == 1.0 {
        return Ok(g);
    }
    let k = Mat::from_fn(n, columns, |a, b| {
        let (u, v) = ((a + 1) as f64, (b + 1) as f64);
        hp_unchecked((u / v).ln(), gamma) / (u * v).sqrt()
    });
    triangular::matmul(
        g.as_mut(),
        BlockStructure::TriangularLower,
        Accum::Replace,
        k.as_ref(),
        BlockStructure::Rectangular,
        k.transpose(),
        BlockStructure::Rectangular,
        1.0,
        faer::get_global_parallelism(),
    );
    let c = -gamma * (PI * gamma).sin() / PI;
    // sum_{j > L} j^{-2g-1} ~ int_{L+1/2}^inf x^{-2g-1} dx
    let tail = c * c * (columns as f64 + 0.5).powf(-2.0 * gamma) / (2.0 * gamma);
    let w: Vec<f64> = (1..=n).map(|k| (k as f64).powf(gamma - 0.5)).collect();
    for j in 0..n {
        for i in j..n {
            g[(i, j)] += tail * w[i] * w[j];
        }
    }
    Ok(g)
}

fn leading_eigenvalues(g: &Mat<f64>, n: usize) -> Result<Vec<f64>> {
    g.as_ref()
        .submatrix(0, 0, n, n)
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::LinearAlgebra(format!("eigenvalues of K_p^2: {e:?}")))
}

/// Eigenvalues of `P_n K_p^2 P_n` (see [`trace_compare`] for the column treatment).
pub fn kernel_square_eigenvalues(gamma: f64, n: usize, columns: usize) -> Result<Vec<f64>> {
    leading_eigenvalues(&kernel_square_gram(gamma, n, columns)?, n)
}

/// Traces `tr(P_n B B^* P_n)^i` and `sum_p tr(P_n K_p^2 P_n)^i` for `i = 1..=i_max`.
///
/// Both products use the `B.cols()` stored columns; the kernel product adds
/// its analytic column tail. Corners with equal angles share one `K_p`.
pub fn trace_compare(b: &GrunskyMatrix, corners: &[CornerSpec], n: usize, i_max: usize) -> Result<TraceComparison> {
    Ok(trace_compare_many(b, corners, &[n], i_max)?.remove(0))
}

/// [`trace_compare`] at several truncations, sharing one product per kernel.
pub fn trace_compare_many(
    b: &GrunskyMatrix,
    corners: &[CornerSpec],
    ns: &[usize],
    i_max: usize,
) -> Result<Vec<TraceComparison>> {
    let columns = b.cols();
    let big = ns.iter().copied().max().ok_or(Error::Empty("truncation list"))?;
    let tr_b = fredholm::trace_powers_many(b, ns, i_max)?;

    let mut by_gamma: HashMap<u64, (f64, usize)> = HashMap::new();
    for c in corners {
        by_gamma.entry(c.gamma().to_bits()).or_insert((c.gamma(), 0)).1 += 1;
    }
    let mut groups: Vec<(f64, usize)> = by_gamma.into_values().collect();
    groups.sort_by(|a, b| a.0.total_cmp(&b.0));
    // per group, per n: traces
    let per_group: Vec<Vec<Vec<f64>>> = groups
        .par_iter()
        .map(|&(gamma, _)| {
            let g = kernel_square_gram(gamma, big, columns)?;
            ns.iter()
                .map(|&n| leading_eigenvalues(&g, n).map(|ev| fredholm::traces_from_eigenvalues(&ev, i_max)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let constants = (1..=i_max)
        .into_par_iter()
        .map(|i| predicted_trace_constant(i, corners))
        .collect::<Result<Vec<_>>>()?;
    Ok(ns
        .iter()
        .enumerate()
        .map(|(t, &n)| {
            let hn = harmonic(n);
            let rows = (1..=i_max)
                .map(|i| {
                    let kernel: f64 = groups.iter().zip(&per_group).map(|(g, tr)| g.1 as f64 * tr[t][i - 1]).sum();
                    let grunsky = tr_b[t][i - 1];
                    TraceRow {
                        i,
                        grunsky,
                        kernel,
                        difference: (grunsky - kernel).abs(),
                        constant: constants[i - 1],
                        kernel_minus_predicted: kernel - constants[i - 1] * hn,
                    }
                })
                .collect();
            TraceComparison { n, columns, rows }
        })
        .collect())
}

/// `tr(P_n K_p^2 P_n)^i - c_i H_n` for one exterior angle.
pub fn kernel_trace_excess(gamma: f64, n: usize, columns: usize, i: usize) -> Result<f64> {
    let ev = kernel_square_eigenvalues(gamma, n, columns)?;
    let tr = fredholm::traces_from_eigenvalues(&ev, i)[i - 1];
    Ok(tr - trace_constant_single(i, gamma)? * harmonic(n))
}

/// One sampled residual `r_kl = b_kl - K(k, l)`.
#[derive(Debug, Clone, Copy)]
pub struct ResidualEntry {
    pub k: usize,
    pub l: usize,
    pub residual: c64,
    /// `sqrt(kl)/(k+l) (k^{-rho} l^{-1} + k^{-1} l^{-rho})`.
    pub bound: f64,
    pub ratio: f64,
    /// `|r_kl|` exceeds ten times the matrix accuracy.
    pub resolved: bool,
}

#[derive(Debug, Clone)]
pub struct ResidualReport {
    pub rho: f64,
    pub accuracy: f64,
    pub entries: Vec<ResidualEntry>,
    pub sup_ratio: f64,
    /// Number of sampled entries not resolved by the matrix accuracy.
    pub unresolved: usize,
}

impl ResidualReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "k,l,re_r,im_r,bound,ratio,resolved")?;
        for e in &self.entries {
            writeln!(
                w,
                "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{}",
                e.k, e.l, e.residual.re, e.residual.im, e.bound, e.ratio, e.resolved
            )?;
        }
        writeln!(w, "# rho={} accuracy={:e} sup_ratio={:.6e} unresolved={}", self.rho, self.accuracy, self.sup_ratio, self.unresolved)?;
        Ok(())
    }
}

pub fn residual_bound(k: usize, l: usize, rho: f64) -> f64 {
    let (u, v) = (k as f64, l as f64);
    (u * v).sqrt() / (u + v) * (u.powf(-rho) / v + v.powf(-rho) / u)
}

/// Residuals `b_kl - K(k, l)` and their ratios to the decay bound on `indices` (1-based).
pub fn residual_bkl_as(b: &GrunskyMatrix, corners: &[CornerSpec], indices: &[(usize, usize)]) -> Result<ResidualReport> {
    if corners.is_empty() {
        return Err(Error::Empty("corner list; the residual needs a corner kernel"));
    }
    if indices.is_empty() {
        return Err(Error::Empty("index set"));
    }
    let rho = rho(corners);
    let mut entries = Vec::with_capacity(indices.len());
    for &(k, l) in indices {
        if k == 0 || l == 0 || k > b.rows() || l > b.cols() {
            return Err(invalid(format!("index ({k}, {l}) outside the {}x{} matrix", b.rows(), b.cols())));
        }
        let residual = b.b(k, l) - kernel_k(k, l, corners)?;
        let bound = residual_bound(k, l, rho);
        entries.push(ResidualEntry {
            k,
            l,
            residual,
            bound,
            ratio: residual.norm() / bound,
            resolved: residual.norm() > 10.0 * b.accuracy(),
        });
    }
    let sup_ratio = entries.iter().map(|e| e.ratio).fold(0.0, f64::max);
    let unresolved = entries.iter().filter(|e| !e.resolved).count();
    Ok(ResidualReport {
        rho,
        accuracy: b.accuracy(),
        entries,
        sup_ratio,
        unresolved,
    })
}

/// `sup |b_kl| / f_rho(k, l)` over `indices`.
pub fn f_rho_ratio(b: &GrunskyMatrix, rho: f64, indices: &[(usize, usize)]) -> f64 {
    indices
        .iter()
        .map(|&(k, l)| b.b(k, l).norm() / super::kernels::f_rho(k as f64, l as f64, rho))
        .fold(0.0, f64::max)
}

/// Scaled deviations `r^k k^{(1+rho)/2} |sqrt(k) d_k(r) - (xi_r)_k|`, `k = 1..=n`,
/// with `(xi_r)_k = r^{-k} k^{-1/2} sum_p z_p^k (gamma_p - 1)`.
///
/// `d_r` holds the unscaled coefficients of the capacity-one equipotential `g(rz)/r`.
pub fn xi_approx_check(d_r: &LogDerivVector, corners: &[CornerSpec], r: f64) -> Result<Vec<f64>> {
    if !(r > 1.0) {
        return Err(invalid(format!("equipotential radius {r} must exceed 1")));
    }
    let rho = rho(corners);
    Ok(d_r
        .scaled()
        .iter()
        .enumerate()
        .map(|(i, dk)| {
            let k = (i + 1) as f64;
            let s: c64 = corners
                .iter()
                .map(|c| c64::from_polar(1.0, c.theta() * k) * (c.gamma() - 1.0))
                .sum();
            // r^k (d_k - r^{-k} s / sqrt k) = r^k d_k - s / sqrt k
            let dev = dk * r.powf(k) - s / k.sqrt();
            dev.norm() * k.powf(0.5 * (1.0 + rho))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::build_disk;
    use crate::grunsky::grunsky_psi_contour;

    #[test]
    fn disk_traces_vanish() {
        let b = grunsky_psi_contour(&build_disk(), 16).unwrap();
        let t = trace_compare(&b, &[], 16, 3).unwrap();
        for r in &t.rows {
            assert!(r.grunsky.abs() < 1e-28 && r.kernel == 0.0 && r.constant == 0.0);
        }
    }

    #[test]
    fn kernel_tail_correction_is_consistent() {
        // enlarging the inner range should barely move the corrected traces
        let a = kernel_square_eigenvalues(1.5, 32, 256).unwrap();
        let b = kernel_square_eigenvalues(1.5, 32, 2048).unwrap();
        let ta: f64 = a.iter().sum();
        let tb: f64 = b.iter().sum();
        assert!((ta - tb).abs() < 1e-6 * tb, "{ta} {tb}");
    }

    #[test]
    fn residual_rejects_smooth_input() {
        let b = grunsky_psi_contour(&build_disk(), 8).unwrap();
        assert!(matches!(residual_bkl_as(&b, &[], &[(1, 1)]), Err(Error::Empty(_))));
    }

    #[test]
    fn bound_is_positive() {
        assert!(residual_bound(3, 7, 1.0) > 0.0);
        assert!((residual_bound(2, 2, 1.0) - 0.25).abs() < 1e-15);
    }
}
