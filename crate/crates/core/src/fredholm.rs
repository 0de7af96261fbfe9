//! Truncated Fredholm determinants, traces, norms and the Loewner and
//! Fekete-Pommerenke energies computed from Grunsky data.

use std::io::Write;

use faer::linalg::matmul::triangular::{self, BlockStructure};
use faer::linalg::solvers::Solve;
use faer::{Accum, Mat, Side};
use num_complex::Complex64 as c64;

use crate::error::{invalid, Error, Result};
use crate::grunsky::{GrunskyMatrix, LogDerivVector};

/// Energy with the truncation sequence that produced it.
#[derive(Debug, Clone)]
pub struct EnergyReport {
    /// Last partial value.
    pub value: f64,
    /// `(n, partial value)` at increasing truncations.
    pub truncations: Vec<(usize, f64)>,
    pub converged: bool,
    pub tolerance: f64,
}

impl EnergyReport {
    fn from_partials(truncations: Vec<(usize, f64)>, tolerance: impl Fn(f64) -> f64) -> Self {
        let value = truncations.last().map_or(0.0, |p| p.1);
        let converged = match truncations.as_slice() {
            [.., (_, a), (_, b)] => (b - a).abs() < tolerance(*b),
            _ => false,
        };
        Self {
            value,
            truncations,
            converged,
            tolerance: tolerance(value),
        }
    }

    /// CSV rows `n,partial` followed by a summary comment.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n,partial")?;
        for (n, v) in &self.truncations {
            writeln!(w, "{n},{v:.16e}")?;
        }
        writeln!(w, "# value={:.16e} converged={} tol={:e}", self.value, self.converged, self.tolerance)?;
        Ok(())
    }
}

/// Dyadic truncations `1, 2, 4, ...` up to and including `n`.
pub fn dyadic_upto(n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut k = 1;
    while k < n {
        out.push(k);
        k *= 2;
    }
    if n > 0 {
        out.push(n);
    }
    out
}

/// Lower triangle of `A = I - C_n` with `C_n = P_n B B^* P_n`, using all stored columns.
fn identity_minus_gram(b: &GrunskyMatrix, n: usize) -> Mat<c64> {
    let bn = b.to_mat(n, b.cols());
    let mut a = Mat::<c64>::zeros(n, n);
    triangular::matmul(
        a.as_mut(),
        BlockStructure::TriangularLower,
        Accum::Replace,
        bn.as_ref(),
        BlockStructure::Rectangular,
        bn.adjoint(),
        BlockStructure::Rectangular,
        c64::new(-1.0, 0.0),
        faer::get_global_parallelism(),
    );
    for i in 0..n {
        a[(i, i)] += 1.0;
    }
    a
}

fn check_n(b: &GrunskyMatrix, n: usize) -> Result<()> {
    if n == 0 || n > b.rows() {
        return Err(invalid(format!("truncation {n} outside 1..={}", b.rows())));
    }
    Ok(())
}

/// `log det(I - P_k B B^* P_k)` for every `k = 1..=n`, from one Cholesky factorization.
///
/// Leading minors of `I - P_n B B^* P_n` are the smaller truncations, and each
/// pivot satisfies `L_kk^2 <= 1 - sum_l |b_kl|^2 <= 1`, so the profile is
/// non-increasing.
pub fn logdet_profile(b: &GrunskyMatrix, n: usize) -> Result<Vec<f64>> {
    check_n(b, n)?;
    let a = identity_minus_gram(b, n);
    let llt = a
        .llt(Side::Lower)
        .map_err(|e| Error::NotPositiveDefinite(format!("I - P_n B B* P_n at n = {n}: {e:?}")))?;
    let l = llt.L();
    let mut acc = 0.0;
    Ok((0..n)
        .map(|i| {
            // a pivot can only exceed 1 through rounding
            acc += (2.0 * l[(i, i)].re.ln()).min(0.0);
            acc
        })
        .collect())
}

/// `log det(I - P_n B B^* P_n)`; always `<= 0`.
pub fn logdet_truncated(b: &GrunskyMatrix, n: usize) -> Result<f64> {
    Ok(*logdet_profile(b, n)?.last().expect("n >= 1"))
}

/// `-12 log det(I - P_n B B^*P_n)` at dyadic `n` up to `B.N`.
///
/// Converged when the last two partials differ by less than `tol`.
pub fn loewner_energy(b: &GrunskyMatrix) -> Result<EnergyReport> {
    loewner_energy_with(b, 1e-10)
}

pub fn loewner_energy_with(b: &GrunskyMatrix, tol: f64) -> Result<EnergyReport> {
    let profile = logdet_profile(b, b.rows())?;
    let partials = dyadic_upto(b.rows()).into_iter().map(|n| (n, -12.0 * profile[n - 1])).collect();
    Ok(EnergyReport::from_partials(partials, |_| tol))
}

/// Eigenvalues of `C_n = P_n B B^* P_n` in ascending order; all must lie in `[0, 1)`.
pub fn gram_eigenvalues(b: &GrunskyMatrix, n: usize) -> Result<Vec<f64>> {
    check_n(b, n)?;
    leading_gram_eigenvalues(&identity_minus_gram(b, n), n)
}

/// Eigenvalues of `C_n` from the leading `n x n` block of a stored `I - C_N`, `n <= N`.
fn leading_gram_eigenvalues(a: &Mat<c64>, n: usize) -> Result<Vec<f64>> {
    // back to C_n = I - A on the lower triangle
    let c = Mat::from_fn(n, n, |i, j| {
        if i < j {
            c64::new(0.0, 0.0)
        } else if i == j {
            1.0 - a[(i, j)]
        } else {
            -a[(i, j)]
        }
    });
    let ev = c
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::LinearAlgebra(format!("eigenvalues of C_n: {e:?}")))?;
    const SLACK: f64 = 1e-12;
    let mut out = Vec::with_capacity(n);
    for v in ev {
        if v < -SLACK || v >= 1.0 {
            return Err(Error::SpectrumOutOfRange { value: v });
        }
        out.push(v.max(0.0));
    }
    Ok(out)
}

/// `tr C_n^i`, `i = 1..=i_max`, for every `n` in `ns` from a single Gram product.
pub fn trace_powers_many(b: &GrunskyMatrix, ns: &[usize], i_max: usize) -> Result<Vec<Vec<f64>>> {
    if i_max == 0 {
        return Err(invalid("i_max must be at least 1"));
    }
    let big = ns.iter().copied().max().ok_or(Error::Empty("truncation list"))?;
    check_n(b, big)?;
    if ns.contains(&0) {
        return Err(invalid("truncations start at 1"));
    }
    let a = identity_minus_gram(b, big);
    ns.iter()
        .map(|&n| leading_gram_eigenvalues(&a, n).map(|ev| traces_from_eigenvalues(&ev, i_max)))
        .collect()
}

/// `tr C_n^i` for `i = 1..=i_max`.
pub fn trace_powers(b: &GrunskyMatrix, n: usize, i_max: usize) -> Result<Vec<f64>> {
    if i_max == 0 {
        return Err(invalid("i_max must be at least 1"));
    }
    let ev = gram_eigenvalues(b, n)?;
    Ok(traces_from_eigenvalues(&ev, i_max))
}

pub fn traces_from_eigenvalues(ev: &[f64], i_max: usize) -> Vec<f64> {
    (1..=i_max).map(|i| ev.iter().map(|l| l.powi(i as i32)).sum()).collect()
}

/// Largest singular value of `P_n B`, i.e. `sqrt(lambda_max(C_n))`.
pub fn operator_norm(b: &GrunskyMatrix, n: usize) -> Result<f64> {
    let ev = gram_eigenvalues(b, n)?;
    Ok(ev.last().copied().unwrap_or(0.0).sqrt())
}

/// Largest singular value of the stored `n x cols` block by SVD (debug route).
pub fn operator_norm_svd(b: &GrunskyMatrix, n: usize) -> Result<f64> {
    check_n(b, n)?;
    let sv = b
        .to_mat(n, b.cols())
        .singular_values()
        .map_err(|e| Error::LinearAlgebra(format!("svd: {e:?}")))?;
    Ok(sv.first().copied().unwrap_or(0.0))
}

fn pommerenke_inputs(b: &GrunskyMatrix, d: &LogDerivVector, n: usize) -> Result<(Mat<c64>, Vec<c64>)> {
    if n == 0 || n > b.rows() || n > b.cols() || n > d.n() {
        return Err(invalid(format!(
            "truncation {n} exceeds available data (B {}x{}, d {})",
            b.rows(),
            b.cols(),
            d.n()
        )));
    }
    Ok((b.to_mat(n, n), d.scaled()[..n].to_vec()))
}

/// `2 Re d^*(I - B_n B_n^*)^{-1}(d - B_n conj(d))` with the `n x n` block `B_n`.
pub fn pommerenke_value(b: &GrunskyMatrix, d: &LogDerivVector, n: usize) -> Result<f64> {
    let (bn, dv) = pommerenke_inputs(b, d, n)?;
    let mut a = &bn * bn.adjoint();
    for j in 0..n {
        for i in 0..n {
            a[(i, j)] = -a[(i, j)];
        }
        a[(j, j)] += 1.0;
    }
    let llt = a
        .llt(Side::Lower)
        .map_err(|e| Error::NotPositiveDefinite(format!("I - B_n B_n* at n = {n}: {e:?}")))?;
    let dcol = Mat::from_fn(n, 1, |i, _| dv[i]);
    let dbar = Mat::from_fn(n, 1, |i, _| dv[i].conj());
    let bd = &bn * &dbar;
    let rhs = Mat::from_fn(n, 1, |i, _| dcol[(i, 0)] - bd[(i, 0)]);
    let x = llt.solve(&rhs);
    let s: c64 = (0..n).map(|i| dv[i].conj() * x[(i, 0)]).sum();
    Ok(2.0 * s.re)
}

/// Same quantity through the real `2n x 2n` system
/// `2 [Re d; Im d]^t (I + K)^{-1} [Re d; Im d]`, `K = [[B1, B2], [B2, -B1]]`.
pub fn pommerenke_value_real_block(b: &GrunskyMatrix, d: &LogDerivVector, n: usize) -> Result<f64> {
    let (bn, dv) = pommerenke_inputs(b, d, n)?;
    let m = Mat::<f64>::from_fn(2 * n, 2 * n, |i, j| {
        let (bi, bj) = (i % n, j % n);
        let v = bn[(bi, bj)];
        let k = match (i < n, j < n) {
            (true, true) => v.re,
            (true, false) | (false, true) => v.im,
            (false, false) => -v.re,
        };
        if i == j {
            1.0 + k
        } else {
            k
        }
    });
    let rhs = Mat::<f64>::from_fn(2 * n, 1, |i, _| if i < n { dv[i].re } else { dv[i - n].im });
    let x = m.partial_piv_lu().solve(&rhs);
    let s: f64 = (0..2 * n).map(|i| rhs[(i, 0)] * x[(i, 0)]).sum();
    if !s.is_finite() {
        return Err(Error::LinearAlgebra("singular I + K".into()));
    }
    Ok(2.0 * s)
}

/// Fekete-Pommerenke energy at dyadic truncations up to `n`.
///
/// Converged when the last change is below `max(1e-10, 1e-6 |value|)`.
pub fn pommerenke_energy(b: &GrunskyMatrix, d: &LogDerivVector, n: usize) -> Result<EnergyReport> {
    let partials = dyadic_upto(n)
        .into_iter()
        .map(|k| pommerenke_value(b, d, k).map(|v| (k, v)))
        .collect::<Result<Vec<_>>>()?;
    Ok(EnergyReport::from_partials(partials, |v| (1e-6 * v.abs()).max(1e-10)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::build_joukowski;
    use crate::grunsky::{dvector_from_map, grunsky_log_fft};

    fn diag(c: f64, n: usize) -> GrunskyMatrix {
        GrunskyMatrix::from_fn(n, n, |k, l| if k == l { c64::new(c.powi(k as i32), 0.0) } else { c64::new(0.0, 0.0) })
    }

    #[test]
    fn diagonal_oracles() {
        let b = diag(0.5, 10);
        assert!((logdet_truncated(&b, 1).unwrap() - 0.75f64.ln()).abs() < 1e-15);
        let want: f64 = (1..=10).map(|k| (1.0 - 0.25f64.powi(k)).ln()).sum();
        assert!((logdet_truncated(&b, 10).unwrap() - want).abs() < 1e-14);
        let tr = trace_powers(&b, 10, 3).unwrap();
        for (i, t) in tr.iter().enumerate() {
            let w: f64 = (1..=10).map(|k| 0.5f64.powi(2 * k * (i as i32 + 1))).sum();
            assert!((t - w).abs() < 1e-14);
        }
        assert!((operator_norm(&b, 10).unwrap() - 0.5).abs() < 1e-14);
        assert!((operator_norm_svd(&b, 10).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn zero_matrix() {
        let z = GrunskyMatrix::from_fn(8, 8, |_, _| c64::new(0.0, 0.0));
        assert_eq!(logdet_truncated(&z, 8).unwrap(), 0.0);
        assert_eq!(loewner_energy(&z).unwrap().value, 0.0);
        assert_eq!(operator_norm(&z, 8).unwrap(), 0.0);
        let d = LogDerivVector::from_values(vec![c64::new(0.0, 0.0); 8]);
        assert_eq!(pommerenke_value(&z, &d, 8).unwrap(), 0.0);
    }

    #[test]
    fn joukowski_energies() {
        let c = 0.3;
        let j = build_joukowski(c).unwrap();
        let b = grunsky_log_fft(&j, 64).unwrap();
        let d = dvector_from_map(&j, 64).unwrap();
        let x = pommerenke_value(&b, &d, 64).unwrap();
        let y = pommerenke_value_real_block(&b, &d, 64).unwrap();
        assert!((x - y).abs() < 1e-10, "{x} {y}");
        // closed form 4 sum_j c^{2j} / (j (1 + c^{2j}))
        let want: f64 = (1..200).map(|j| 4.0 * c.powi(2 * j) / (j as f64 * (1.0 + c.powi(2 * j)))).sum();
        assert!((x - want).abs() < 1e-10, "{x} {want}");
        let e = pommerenke_energy(&b, &d, 64).unwrap();
        assert!(e.converged);
    }

    #[test]
    fn profile_is_monotone() {
        let b = diag(0.9, 40);
        let p = logdet_profile(&b, 40).unwrap();
        assert!(p.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(dyadic_upto(10), vec![1, 2, 4, 8, 10]);
    }
}
