//! Quadrature rules: Gauss-Legendre nodes, adaptive Gauss-Kronrod (7/15) and
//! a tanh-sinh rule for integrands with an algebraic endpoint singularity.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = ((4 * i + 3) as f64 * PI / (4 * n + 2) as f64).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// A single Gauss-Kronrod 7/15 panel: (kronrod estimate, |kronrod - gauss|).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        resk += WGK[j] * s;
        if j % 2 == 1 {
            resg += WG[j / 2] * s;
        }
    }
    (resk * h, ((resk - resg) * h).abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

/// Globally adaptive Gauss-Kronrod integration of `f` over `[a, b]`.
///
/// Bisects the panel with the largest error estimate until the summed estimate
/// is below `max(abs_tol, rel_tol * |I|)`.
pub fn adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<Integral> {
    const MAX_PANELS: usize = 20_000;
    let mut heap = BinaryHeap::new();
    let (v, e) = gk15(&f, a, b);
    heap.push(Panel { a, b, value: v, error: e });
    let mut total = v;
    let mut total_err = e;
    let mut panels = 1;
    while total_err > abs_tol.max(rel_tol * total.abs()) {
        if panels >= MAX_PANELS {
            return Err(Error::Quadrature(format!(
                "adaptive GK15 on [{a}, {b}]: error {total_err:.3e} after {panels} panels"
            )));
        }
        let p = heap.pop().expect("heap is never empty");
        let m = 0.5 * (p.a + p.b);
        let (v1, e1) = gk15(&f, p.a, m);
        let (v2, e2) = gk15(&f, m, p.b);
        total += v1 + v2 - p.value;
        total_err += e1 + e2 - p.error;
        heap.push(Panel { a: p.a, b: m, value: v1, error: e1 });
        heap.push(Panel { a: m, b: p.b, value: v2, error: e2 });
        panels += 1;
    }
    // re-sum to shed accumulated cancellation in the running totals
    let value: f64 = heap.iter().map(|p| p.value).sum();
    let error: f64 = heap.iter().map(|p| p.error).sum();
    if !value.is_finite() {
        return Err(Error::Quadrature("non-finite integrand".into()));
    }
    Ok(Integral { value, error })
}

/// `int_0^inf f(x) dx` for an integrand decaying like `exp(-rate x)`.
///
/// The cutoff starts where the tail is below 1e-18 and is doubled until the
/// value changes by less than `tol`.
pub fn semi_infinite<F: Fn(f64) -> f64>(f: F, rate: f64, tol: f64) -> Result<Integral> {
    if !(rate > 0.0) {
        return Err(Error::Quadrature(format!("non-positive decay rate {rate}")));
    }
    let mut x = 42.0 / rate;
    let mut prev = adaptive(&f, 0.0, x, tol * 0.1, 1e-15)?;
    for _ in 0..8 {
        x *= 2.0;
        let next = adaptive(&f, 0.0, x, tol * 0.1, 1e-15)?;
        if (next.value - prev.value).abs() < tol {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Quadrature(format!("tail did not settle up to x = {x}")))
}

/// Tanh-sinh integration over `[0, length]` of `f(s)`, where `s` is passed as
/// the distance from the left endpoint (accurate down to subnormal scale).
///
/// Suited to integrands with an algebraic singularity at `s = 0`.
pub fn tanh_sinh_left<F: Fn(f64) -> f64>(f: F, length: f64, tol: f64) -> Result<f64> {
    let node = |t: f64| -> (f64, f64) {
        let u = 0.5 * PI * t.sinh();
        // s = L (1 + tanh u) / 2 = L / (1 + e^{-2u})
        let s = length / (1.0 + (-2.0 * u).exp());
        let ch = u.cosh();
        let w = 0.5 * length * 0.5 * PI * t.cosh() / (ch * ch);
        (s, w)
    };
    let eval = |t: f64| -> f64 {
        let (s, w) = node(t);
        if w == 0.0 || s <= 0.0 || s >= length {
            0.0
        } else {
            w * f(s)
        }
    };
    let tmax = 6.5;
    let mut h = 0.5;
    let mut sum = eval(0.0);
    let mut k = 1;
    while k as f64 * h <= tmax {
        sum += eval(k as f64 * h) + eval(-(k as f64) * h);
        k += 1;
    }
    let mut estimate = sum * h;
    for _ in 0..12 {
        h *= 0.5;
        let mut add = 0.0;
        let mut k = 1;
        while k as f64 * h <= tmax {
            let t = k as f64 * h;
            add += eval(t) + eval(-t);
            k += 2;
        }
        sum += add;
        let next = sum * h;
        if (next - estimate).abs() <= tol * (1.0 + next.abs()) {
            return Ok(next);
        }
        estimate = next;
    }
    Err(Error::Quadrature("tanh-sinh did not converge".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(6);
        // degree 11 is exact for 6 points
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
        assert!((s - 2.0 / 11.0).abs() < 1e-14);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let v = adaptive(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-12, 1e-14).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((v.value - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn semi_infinite_sech_squared() {
        let v = semi_infinite(|x| 1.0 / x.cosh().powi(2), 2.0, 1e-13).unwrap();
        assert!((v.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tanh_sinh_endpoint_singularity() {
        // int_0^1 s^{-1/2} ds = 2
        let v = tanh_sinh_left(|s| s.powf(-0.5), 1.0, 1e-14).unwrap();
        assert!((v - 2.0).abs() < 1e-12, "{v}");
    }
}
