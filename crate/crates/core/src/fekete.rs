//! Fekete points on analytic Jordan curves and Pommerenke's expansion
//! `log Z_{n,inf} = n(n-1) log r_inf + n log n + I^F / 8 + o(1)`.

use std::f64::consts::PI;
use std::io::Write;

use faer::{Mat, Side};
use num_complex::Complex64 as c64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conformal::ExteriorMapSeries;
use crate::error::{invalid, Error, Result};
use crate::fredholm;
use crate::grunsky::{GrunskyMatrix, LogDerivVector};

/// Smallest allowed gap between neighbouring parameter angles.
const MIN_GAP: f64 = 1e-9;
const ARMIJO: f64 = 1e-4;
const MAX_GRADIENT_STEPS: usize = 400;
const MAX_NEWTON_STEPS: usize = 60;
/// Largest point count accepted by the optimizer.
pub const MAX_POINTS: usize = 64;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeketeSolution {
    pub n: usize,
    /// Sorted parameter angles in `[0, 2 pi)`.
    pub thetas: Vec<f64>,
    /// `log Z_{n,inf} = sum_{k<l} 2 log |w_k - w_l|`.
    pub value: f64,
    /// Sup norm of the gradient at `thetas`.
    pub grad_norm: f64,
    pub restarts: usize,
}

struct Samples {
    w: Vec<c64>,
    dw: Vec<c64>,
    d2w: Vec<c64>,
}

/// `w(theta) = g(rho e^{i theta})` and its first two theta-derivatives.
fn sample(map: &ExteriorMapSeries, thetas: &[f64]) -> Samples {
    let rho = map.boundary_radius();
    let mut s = Samples {
        w: Vec::with_capacity(thetas.len()),
        dw: Vec::with_capacity(thetas.len()),
        d2w: Vec::with_capacity(thetas.len()),
    };
    for &t in thetas {
        let z = c64::from_polar(rho, t);
        let g1 = map.derivative(z);
        let g2 = map.second_derivative(z);
        s.w.push(map.eval(z));
        s.dw.push(c64::i() * z * g1);
        s.d2w.push(-(z * g1 + z * z * g2));
    }
    s
}

fn objective(s: &Samples) -> f64 {
    let n = s.w.len();
    (0..n)
        .into_par_iter()
        .map(|k| (k + 1..n).map(|l| 2.0 * (s.w[k] - s.w[l]).norm().ln()).sum::<f64>())
        .sum()
}

fn gradient(s: &Samples) -> Vec<f64> {
    let n = s.w.len();
    (0..n)
        .into_par_iter()
        .map(|k| {
            (0..n)
                .filter(|&l| l != k)
                .map(|l| 2.0 * (s.dw[k] / (s.w[k] - s.w[l])).re)
                .sum()
        })
        .collect()
}

fn hessian(s: &Samples) -> Mat<f64> {
    let n = s.w.len();
    let mut h = Mat::<f64>::zeros(n, n);
    for k in 0..n {
        let mut diag = 0.0;
        for l in 0..n {
            if l == k {
                continue;
            }
            let inv = 1.0 / (s.w[k] - s.w[l]);
            h[(k, l)] = 2.0 * (s.dw[k] * s.dw[l] * inv * inv).re;
            diag += 2.0 * (s.d2w[k] * inv - s.dw[k] * s.dw[k] * inv * inv).re;
        }
        h[(k, k)] = diag;
    }
    h
}

/// `F(theta) = sum_{k<l} 2 log |w(theta_k) - w(theta_l)|` and its gradient.
pub fn objective_and_gradient(map: &ExteriorMapSeries, thetas: &[f64]) -> (f64, Vec<f64>) {
    let s = sample(map, thetas);
    (objective(&s), gradient(&s))
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Sorted angles mod `2 pi`, or `None` when two of them come closer than the guard.
fn normalized(thetas: &[f64]) -> Option<Vec<f64>> {
    let mut t: Vec<f64> = thetas.iter().map(|x| x.rem_euclid(2.0 * PI)).collect();
    t.sort_by(f64::total_cmp);
    let n = t.len();
    let wrap = t[0] + 2.0 * PI - t[n - 1];
    if wrap < MIN_GAP || t.windows(2).any(|w| w[1] - w[0] < MIN_GAP) {
        return None;
    }
    Some(t)
}

struct State {
    thetas: Vec<f64>,
    value: f64,
    grad: Vec<f64>,
}

impl State {
    fn at(map: &ExteriorMapSeries, thetas: Vec<f64>) -> Option<Self> {
        let s = sample(map, &thetas);
        let value = objective(&s);
        if !value.is_finite() {
            return None;
        }
        Some(Self { grad: gradient(&s), thetas, value })
    }
}

/// Backtracking along `dir`, accepting only steps that increase `F` by the Armijo margin.
fn line_search(map: &ExteriorMapSeries, cur: &State, dir: &[f64], mut step: f64) -> Option<State> {
    let slope: f64 = cur.grad.iter().zip(dir).map(|(g, d)| g * d).sum();
    if !(slope > 0.0) {
        return None;
    }
    for _ in 0..60 {
        let trial: Vec<f64> = cur.thetas.iter().zip(dir).map(|(t, d)| t + step * d).collect();
        if let Some(next) = normalized(&trial).and_then(|t| State::at(map, t)) {
            if next.value >= cur.value + ARMIJO * step * slope {
                return Some(next);
            }
        }
        step *= 0.5;
    }
    None
}

/// Newton direction from the eigendecomposition of `-H`, dropping near-null modes.
fn newton_direction(map: &ExteriorMapSeries, st: &State) -> Option<Vec<f64>> {
    let h = hessian(&sample(map, &st.thetas));
    let neg = Mat::from_fn(h.nrows(), h.ncols(), |i, j| -h[(i, j)]);
    let eig = neg.self_adjoint_eigen(Side::Lower).ok()?;
    let (u, s) = (eig.U(), eig.S().column_vector());
    let n = st.thetas.len();
    let top = (0..n).map(|i| s[i].abs()).fold(0.0, f64::max);
    let mut dir = vec![0.0; n];
    for i in 0..n {
        let lam = s[i].abs();
        if lam <= 1e-10 * top {
            continue;
        }
        let c: f64 = (0..n).map(|k| u[(k, i)] * st.grad[k]).sum::<f64>() / lam;
        for k in 0..n {
            dir[k] += c * u[(k, i)];
        }
    }
    Some(dir)
}

fn ascend(map: &ExteriorMapSeries, start: Vec<f64>, tol: f64) -> Result<State> {
    let mut st = State::at(map, normalized(&start).ok_or_else(|| Error::Optimizer("degenerate start".into()))?)
        .ok_or_else(|| Error::Optimizer("non-finite objective at start".into()))?;
    // Barzilai-Borwein gradient ascent to get near the optimum
    let mut step = 1e-3;
    for _ in 0..MAX_GRADIENT_STEPS {
        if sup(&st.grad) < tol.max(1e-6) {
            break;
        }
        let dir = st.grad.clone();
        let Some(next) = line_search(map, &st, &dir, step) else { break };
        let s: Vec<f64> = next.thetas.iter().zip(&st.thetas).map(|(a, b)| wrap(a - b)).collect();
        let y: Vec<f64> = next.grad.iter().zip(&st.grad).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        let ss: f64 = s.iter().map(|a| a * a).sum();
        // ascent on a concave-near-optimum function: s.y < 0
        step = if sy < 0.0 { (ss / -sy).clamp(1e-8, 1.0) } else { (2.0 * step).min(1.0) };
        st = next;
    }
    // Newton polish for the last digits
    for _ in 0..MAX_NEWTON_STEPS {
        if sup(&st.grad) < tol {
            return Ok(st);
        }
        let dir = newton_direction(map, &st).ok_or_else(|| Error::Optimizer("Hessian eigendecomposition failed".into()))?;
        match line_search(map, &st, &dir, 1.0) {
            Some(next) => st = next,
            None => break,
        }
    }
    if sup(&st.grad) < tol {
        Ok(st)
    } else {
        Err(Error::Optimizer(format!(
            "gradient {:.3e} above tolerance {tol:e} after line search stalled",
            sup(&st.grad)
        )))
    }
}

fn wrap(x: f64) -> f64 {
    crate::fft::wrap_angle(x)
}

fn check_map(map: &ExteriorMapSeries, n: usize) -> Result<()> {
    if n < 2 || n > MAX_POINTS {
        return Err(invalid(format!("point count {n} outside 2..={MAX_POINTS}")));
    }
    if !map.corners().is_empty() {
        return Err(invalid("Fekete optimization needs an analytic curve; use an equipotential"));
    }
    Ok(())
}

/// Maximizes `F` over `n` boundary points from `restarts` rotated equispaced starts.
pub fn fekete_optimize(map: &ExteriorMapSeries, n: usize, restarts: usize, tol: f64) -> Result<FeketeSolution> {
    check_map(map, n)?;
    let restarts = restarts.max(1);
    let results: Vec<Result<State>> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let offset = 2.0 * PI * r as f64 / (n * restarts) as f64;
            let start = (0..n).map(|j| offset + 2.0 * PI * j as f64 / n as f64).collect();
            ascend(map, start, tol)
        })
        .collect();
    let mut best: Option<State> = None;
    let mut last_err = None;
    for res in results {
        match res {
            Ok(st) => {
                if best.as_ref().map_or(true, |b| st.value > b.value) {
                    best = Some(st);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    let st = best.ok_or_else(|| last_err.unwrap_or_else(|| Error::Optimizer("no restart ran".into())))?;
    Ok(FeketeSolution {
        n,
        grad_norm: sup(&st.grad),
        thetas: st.thetas,
        value: st.value,
        restarts,
    })
}

/// `exp(value / (n(n-1)))` per solution and whether the sequence decreases.
#[derive(Debug, Clone)]
pub struct TransfiniteEstimate {
    pub estimates: Vec<(usize, f64)>,
    pub decreasing: bool,
}

pub fn transfinite_diameter_estimate(solutions: &[FeketeSolution]) -> Result<TransfiniteEstimate> {
    if solutions.len() < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: solutions.len() });
    }
    if solutions.windows(2).any(|w| w[1].n <= w[0].n) {
        return Err(invalid("solutions must have increasing n"));
    }
    let estimates: Vec<(usize, f64)> = solutions
        .iter()
        .map(|s| (s.n, (s.value / (s.n * (s.n - 1)) as f64).exp()))
        .collect();
    let decreasing = estimates.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-12));
    Ok(TransfiniteEstimate { estimates, decreasing })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PommerenkeRow {
    pub n: usize,
    pub value: f64,
    /// `value - n(n-1) log r_inf - n log n - I^F / 8`.
    pub residual: f64,
    pub grad_norm: f64,
    pub restarts: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PommerenkeCheck {
    pub energy: f64,
    pub rows: Vec<PommerenkeRow>,
    /// `|residual|` decreases over the last three `n`.
    pub decreasing: bool,
}

impl PommerenkeCheck {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n,value,residual,grad_norm,restarts")?;
        for r in &self.rows {
            writeln!(w, "{},{:.16e},{:.6e},{:.3e},{}", r.n, r.value, r.residual, r.grad_norm, r.restarts)?;
        }
        writeln!(w, "# I_F={:.12e} decreasing={}", self.energy, self.decreasing)?;
        Ok(())
    }
}

/// Residuals of Pommerenke's expansion with `I^F` computed from `(B, d)` at `B.rows()`.
pub fn verify_pommerenke(
    map: &ExteriorMapSeries,
    b: &GrunskyMatrix,
    d: &LogDerivVector,
    n_list: &[usize],
) -> Result<PommerenkeCheck> {
    let energy = fredholm::pommerenke_energy(b, d, b.rows().min(b.cols()).min(d.n()))?.value;
    verify_pommerenke_with_energy(map, energy, n_list, 8, 1e-10)
}

/// As [`verify_pommerenke`] with a known `I^F`.
pub fn verify_pommerenke_with_energy(
    map: &ExteriorMapSeries,
    energy: f64,
    n_list: &[usize],
    restarts: usize,
    tol: f64,
) -> Result<PommerenkeCheck> {
    if n_list.is_empty() {
        return Err(Error::Empty("n list"));
    }
    if !energy.is_finite() {
        return Err(invalid("Fekete-Pommerenke energy is not finite"));
    }
    let r = map.capacity();
    let rows = n_list
        .iter()
        .map(|&n| {
            let s = fekete_optimize(map, n, restarts, tol)?;
            let nf = n as f64;
            Ok(PommerenkeRow {
                n,
                value: s.value,
                residual: s.value - nf * (nf - 1.0) * r.ln() - nf * nf.ln() - energy / 8.0,
                grad_norm: s.grad_norm,
                restarts: s.restarts,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let tail: Vec<f64> = rows.iter().rev().take(3).map(|r| r.residual.abs()).collect();
    let decreasing = tail.len() >= 2 && tail.windows(2).all(|w| w[0] <= w[1]);
    Ok(PommerenkeCheck { energy, rows, decreasing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::{build_disk, build_joukowski};

    #[test]
    fn circle_is_equispaced() {
        let d = build_disk();
        for n in [2, 5, 12] {
            let s = fekete_optimize(&d, n, 3, 1e-10).unwrap();
            let nf = n as f64;
            assert!((s.value - nf * nf.ln()).abs() < 1e-9, "{n} {}", s.value);
        }
        let s = fekete_optimize(&d, 2, 1, 1e-10).unwrap();
        assert!((s.value - 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let j = build_joukowski(0.4).unwrap();
        let t: Vec<f64> = (0..7).map(|k| 0.3 + 0.9 * k as f64 + 0.05 * (k * k) as f64).collect();
        let (_, g) = objective_and_gradient(&j, &t);
        for k in 0..7 {
            let mut p = t.clone();
            let mut m = t.clone();
            p[k] += 1e-6;
            m[k] -= 1e-6;
            let fd = (objective_and_gradient(&j, &p).0 - objective_and_gradient(&j, &m).0) / 2e-6;
            assert!((fd - g[k]).abs() < 1e-5 * g[k].abs().max(1.0), "{k}: {fd} {}", g[k]);
        }
    }

    #[test]
    fn single_point_moves_do_not_improve() {
        let j = build_joukowski(0.3).unwrap();
        let s = fekete_optimize(&j, 10, 4, 1e-10).unwrap();
        for k in 0..10 {
            for h in [1e-3, -1e-3] {
                let mut t = s.thetas.clone();
                t[k] += h;
                assert!(objective_and_gradient(&j, &t).0 <= s.value);
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fekete_optimize(&build_disk(), 1, 1, 1e-10).is_err());
        assert!(fekete_optimize(&build_disk(), 65, 1, 1e-10).is_err());
    }
}
