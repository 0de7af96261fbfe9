//! Corner kernels `K_p`, `H_p`, the Fourier transform `H_p^` and the
//! constants built from them.

use std::f64::consts::PI;

use num_complex::Complex64 as c64;

use crate::conformal::CornerSpec;
use crate::error::{invalid, Error, Result};
use crate::quadrature;

const QUAD_TOL: f64 = 1e-13;

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma < 2.0) {
        return Err(invalid(format!("exterior angle fraction {gamma} outside (0, 2)")));
    }
    Ok(())
}

/// `K_p(u, v) = -(gamma sin(pi gamma) / (pi sqrt(uv))) / ((u/v)^gamma + (v/u)^gamma - 2 cos(pi gamma))`.
pub fn kernel_kp(u: f64, v: f64, gamma: f64) -> Result<f64> {
    if !(u > 0.0 && v > 0.0) {
        return Err(invalid(format!("kernel arguments must be positive, got ({u}, {v})")));
    }
    check_gamma(gamma)?;
    Ok(hp_unchecked((u / v).ln(), gamma) / (u * v).sqrt())
}

/// `H_p(t) = (gamma sin(pi gamma) / 2 pi) / (cos(pi gamma) - cosh(gamma t))`.
pub fn hp(t: f64, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(hp_unchecked(t, gamma))
}

pub(crate) fn hp_unchecked(t: f64, gamma: f64) -> f64 {
    if gamma == 1.0 {
        return 0.0;
    }
    let pre = gamma * (PI * gamma).sin() / (2.0 * PI);
    let x = gamma * t.abs();
    if x < 20.0 {
        pre / ((PI * gamma).cos() - x.cosh())
    } else {
        // 1/(cos - cosh x) = -2 e^{-x} / (1 - 2 cos e^{-x} + e^{-2x}), free of overflow
        let e = (-x).exp();
        -2.0 * pre * e / (1.0 - 2.0 * (PI * gamma).cos() * e + e * e)
    }
}

/// `sinh(a x) / sinh(b x)` for `b > 0`, stable for large `|x|`, with limit `a/b` at 0.
fn sinh_ratio(a: f64, b: f64, x: f64) -> f64 {
    let ax = (a * x).abs();
    let bx = (b * x).abs();
    if bx < 1e-8 {
        return a / b;
    }
    if bx < 20.0 {
        return (a * x).sinh() / (b * x).sinh();
    }
    let sign = (a * x).signum() * (b * x).signum();
    sign * (ax - bx).exp() * (1.0 - (-2.0 * ax).exp()) / (1.0 - (-2.0 * bx).exp())
}

/// `H_p^(xi) = sinh((1 - 1/gamma) pi xi) / sinh(pi xi / gamma)`, equal to `gamma - 1` at 0.
pub fn hp_hat(xi: f64, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(hp_hat_unchecked(xi, gamma))
}

pub(crate) fn hp_hat_unchecked(xi: f64, gamma: f64) -> f64 {
    sinh_ratio((1.0 - 1.0 / gamma) * PI, PI / gamma, xi)
}

/// `int e^{-i xi x} H_p(x) dx` by quadrature (`H_p` is even, so this is a cosine transform).
pub fn hp_hat_numeric(xi: f64, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if gamma == 1.0 {
        return Ok(0.0);
    }
    let v = quadrature::semi_infinite(|x| (xi * x).cos() * hp_unchecked(x, gamma), gamma, QUAD_TOL)?;
    Ok(2.0 * v.value)
}

/// Exponential decay rate of `|H_p^(xi)|`.
pub fn hp_hat_decay(gamma: f64) -> f64 {
    PI * (2.0 / gamma - 1.0).min(1.0)
}

/// `K(k, l) = sum_p z_p^{k+l} K_p(k, l)`.
pub fn kernel_k(k: usize, l: usize, corners: &[CornerSpec]) -> Result<c64> {
    if corners.is_empty() {
        return Err(Error::Empty("corner list"));
    }
    if k == 0 || l == 0 {
        return Err(invalid("indices start at 1"));
    }
    let mut acc = c64::new(0.0, 0.0);
    for c in corners {
        let kp = kernel_kp(k as f64, l as f64, c.gamma())?;
        acc += c64::from_polar(1.0, c.theta() * (k + l) as f64) * kp;
    }
    Ok(acc)
}

/// `(1 / 2 pi) int H_p^(xi)^{2i} d xi` for a single exterior angle.
pub fn trace_constant_single(i: usize, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if i == 0 {
        return Err(invalid("power i must be at least 1"));
    }
    if gamma == 1.0 {
        return Ok(0.0);
    }
    let p = 2 * i as i32;
    let rate = 2.0 * i as f64 * hp_hat_decay(gamma);
    let v = quadrature::semi_infinite(|x| hp_hat_unchecked(x, gamma).powi(p), rate, QUAD_TOL)?;
    Ok(v.value / PI)
}

/// `sum_p (1 / 2 pi) int H_p^(xi)^{2i} d xi`.
pub fn predicted_trace_constant(i: usize, corners: &[CornerSpec]) -> Result<f64> {
    corners.iter().map(|c| trace_constant_single(i, c.gamma())).sum()
}

/// `sum_{i=1}^{i_max} (1/i) * predicted_trace_constant(i)`, which tends to the
/// corner anomaly `(1/6) sum (alpha + 1/alpha - 2)`.
pub fn trace_constant_series(corners: &[CornerSpec], i_max: usize) -> Result<f64> {
    (1..=i_max).map(|i| predicted_trace_constant(i, corners).map(|c| c / i as f64)).sum()
}

/// Which angle a corner sum runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngleMode {
    Interior,
    Exterior,
}

/// `sum (a + 1/a - 2)` over the given angle fractions.
pub fn corner_sum_values(angles: &[f64]) -> Result<f64> {
    angles
        .iter()
        .map(|&a| {
            if !(a > 0.0 && a < 2.0) {
                Err(invalid(format!("angle fraction {a} outside (0, 2)")))
            } else {
                Ok(a + 1.0 / a - 2.0)
            }
        })
        .sum()
}

/// `sum (alpha + 1/alpha - 2)` or `sum (gamma + 1/gamma - 2)`.
pub fn corner_sum(corners: &[CornerSpec], mode: AngleMode) -> f64 {
    let angles: Vec<f64> = corners
        .iter()
        .map(|c| match mode {
            AngleMode::Interior => c.alpha(),
            AngleMode::Exterior => c.gamma(),
        })
        .collect();
    corner_sum_values(&angles).expect("corner angles are validated on construction")
}

/// `log(1 - sinh^2(beta x) / sinh^2 x)`, with the limit `log(1 - beta^2)` at 0.
fn final_integrand(beta: f64, x: f64) -> f64 {
    let s = sinh_ratio(beta, 1.0, x);
    (-s * s).ln_1p()
}

/// Closed form `beta^2 / (6 (1 - beta^2))` and the quadrature of
/// `-(1 / 2 pi^2) int_R log(1 - sinh^2(beta x) / sinh^2 x) dx`.
pub fn finalintegral(beta: f64) -> Result<(f64, f64)> {
    if !(beta.abs() < 1.0) {
        return Err(invalid(format!("|beta| = {} must be below 1", beta.abs())));
    }
    let closed = beta * beta / (6.0 * (1.0 - beta * beta));
    if beta == 0.0 {
        return Ok((0.0, 0.0));
    }
    let rate = 2.0 * (1.0 - beta.abs());
    let v = quadrature::semi_infinite(|x| final_integrand(beta, x), rate, 1e-14)?;
    Ok((closed, -v.value / (PI * PI)))
}

/// `-(1 / 2 pi^2) sum_p gamma_p int_R log(1 - sinh^2((1 - gamma_p) x) / sinh^2 x) dx`.
pub fn corner_anomaly_by_quadrature(corners: &[CornerSpec]) -> Result<f64> {
    corners
        .iter()
        .map(|c| finalintegral(1.0 - c.gamma()).map(|(_, q)| c.gamma() * q))
        .sum()
}

/// `f_rho(u, v) = (uv)^{rho - 1/2} (u^2 + v^2)^{-rho}`.
pub fn f_rho(u: f64, v: f64, rho: f64) -> f64 {
    (u * v).powf(rho - 0.5) * (u * u + v * v).powf(-rho)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_point_kernel_vanishes() {
        for (u, v) in [(1.0, 1.0), (2.0, 7.0), (0.3, 40.0)] {
            assert_eq!(kernel_kp(u, v, 1.0).unwrap(), 0.0);
        }
        assert!(kernel_kp(0.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn kernel_symmetry_and_hardy_form() {
        let a = kernel_kp(2.0, 3.0, 1.5).unwrap();
        let b = kernel_kp(3.0, 2.0, 1.5).unwrap();
        assert_eq!(a, b);
        let direct = {
            let (u, v, g) = (2.0f64, 3.0f64, 1.5f64);
            -(g * (PI * g).sin() / (PI * (u * v).sqrt())) / ((u / v).powf(g) + (v / u).powf(g) - 2.0 * (PI * g).cos())
        };
        assert!((a - direct).abs() < 1e-15);
        let h = hp((2.0f64 / 3.0).ln(), 1.5).unwrap() / 6.0f64.sqrt();
        assert!((a - h).abs() < 1e-14);
    }

    #[test]
    fn hp_is_even_and_overflow_safe() {
        for t in [0.1, 1.0, 5.0, 30.0, 800.0] {
            assert_eq!(hp(t, 1.3).unwrap(), hp(-t, 1.3).unwrap());
        }
        assert!(hp(800.0, 1.5).unwrap().is_finite());
        let near = hp(13.0, 1.5).unwrap();
        let far = hp(13.4, 1.5).unwrap();
        assert!(far.abs() < near.abs());
    }

    #[test]
    fn hp_hat_values() {
        assert!((hp_hat(0.0, 1.5).unwrap() - 0.5).abs() < 1e-15);
        assert!((hp_hat(0.0, 0.7).unwrap() + 0.3).abs() < 1e-15);
        let x = hp_hat(1.0, 1.5).unwrap();
        assert!((x - 0.5 / (PI / 3.0).cosh()).abs() < 1e-15);
        assert!((hp_hat_numeric(1.0, 1.5).unwrap() - x).abs() < 1e-10);
        assert!(hp_hat(400.0, 1.2).unwrap().is_finite());
    }

    #[test]
    fn square_trace_constant() {
        // (1/2pi) int (1/(2 cosh(pi xi/3)))^2 = 3/(4 pi^2)
        let c = trace_constant_single(1, 1.5).unwrap();
        assert!((c - 3.0 / (4.0 * PI * PI)).abs() < 1e-13);
        assert_eq!(trace_constant_single(3, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn corner_sums() {
        assert!((corner_sum_values(&[0.5; 4]).unwrap() - 2.0).abs() < 1e-15);
        assert!((corner_sum_values(&[1.0 / 3.0; 3]).unwrap() - 4.0).abs() < 1e-14);
        assert_eq!(corner_sum_values(&[1.0; 5]).unwrap(), 0.0);
        assert!((corner_sum_values(&[0.1, 0.4, 0.5]).unwrap() - 9.5).abs() < 1e-14);
        assert!(corner_sum_values(&[2.0]).is_err());
    }

    #[test]
    fn final_integral_values() {
        assert_eq!(finalintegral(0.0).unwrap(), (0.0, 0.0));
        let (c, q) = finalintegral(0.5).unwrap();
        assert!((c - 1.0 / 18.0).abs() < 1e-16);
        assert!((c - q).abs() < 1e-10);
        let (c, q) = finalintegral(0.9).unwrap();
        assert!((c - q).abs() < 1e-10, "{c} {q}");
        assert!(finalintegral(1.0).is_err());
    }
}
