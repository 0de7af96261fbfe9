use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use super::{BoundarySamples, Curve};
use crate::error::{invalid, Error, Result};
use crate::fft;
use crate::geometry;

/// Polynomial interior map `f(z) = sum_{k=1}^{M} f_k z^k` with `f_1 = r_0 > 0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InteriorMapSeries {
    coeffs: Vec<c64>,
    min_boundary_derivative: f64,
}

/// Validates univalence of `f(z) = sum_k coeffs[k-1] z^k` on the closed disk by
/// a boundary simplicity scan.
pub fn build_interior_polynomial(coeffs: &[c64]) -> Result<InteriorMapSeries> {
    let f1 = *coeffs.first().ok_or(Error::Empty("interior coefficient list"))?;
    if !(f1.re > 0.0) || f1.im.abs() > 1e-15 * f1.re {
        return Err(invalid(format!("leading coefficient {f1} must be real and positive")));
    }
    let mut coeffs = coeffs.to_vec();
    coeffs[0] = c64::new(f1.re, 0.0);
    while coeffs.len() > 1 && coeffs.last().map_or(false, |c| c.norm() == 0.0) {
        coeffs.pop();
    }
    let mut map = InteriorMapSeries {
        coeffs,
        min_boundary_derivative: 0.0,
    };
    let m = (8 * map.degree()).max(256);
    let poly = map.on_circle(1.0, m).0;
    if let Some((first, second)) = geometry::first_self_intersection(&poly) {
        return Err(Error::NotSimple { first, second, points: m });
    }
    if geometry::winding_number(&poly, c64::new(0.0, 0.0)) != 1 {
        return Err(invalid("boundary does not wind once around f(0) = 0"));
    }
    map.min_boundary_derivative = map.on_circle(1.0, m).1.iter().map(|d| d.norm()).fold(f64::INFINITY, f64::min);
    Ok(map)
}

impl InteriorMapSeries {
    /// Conformal radius `r_0 = f'(0)`.
    pub fn conformal_radius(&self) -> f64 {
        self.coeffs[0].re
    }

    /// Coefficients `f_1, ..., f_M`.
    pub fn coeffs(&self) -> &[c64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    /// `min |f'|` over the boundary samples used in the univalence scan.
    pub fn min_boundary_derivative(&self) -> f64 {
        self.min_boundary_derivative
    }

    pub fn eval(&self, z: c64) -> c64 {
        let mut acc = c64::new(0.0, 0.0);
        for f in self.coeffs.iter().rev() {
            acc = (acc + f) * z;
        }
        acc
    }

    pub fn derivative(&self, z: c64) -> c64 {
        let mut acc = c64::new(0.0, 0.0);
        for (k, f) in self.coeffs.iter().enumerate().rev() {
            acc = acc * z + f * (k + 1) as f64;
        }
        acc
    }

    /// `f` and `f'` at `m` equispaced points of `|z| = radius`.
    pub fn on_circle(&self, radius: f64, m: usize) -> (Vec<c64>, Vec<c64>) {
        let mut shifted = vec![c64::new(0.0, 0.0)];
        shifted.extend_from_slice(&self.coeffs);
        let vals = fft::positive_powers_on_circle(&shifted, radius, m);
        let dcoeffs: Vec<c64> = self.coeffs.iter().enumerate().map(|(k, f)| f * (k + 1) as f64).collect();
        let dvals = fft::positive_powers_on_circle(&dcoeffs, radius, m);
        (vals, dvals)
    }

    pub fn eval_boundary(&self, thetas: &[f64]) -> Result<BoundarySamples> {
        Curve::boundary(self, thetas)
    }

    /// Series of `lambda f`.
    pub fn scaled(&self, lambda: f64) -> Self {
        assert!(lambda > 0.0);
        Self {
            coeffs: self.coeffs.iter().map(|f| f * lambda).collect(),
            min_boundary_derivative: self.min_boundary_derivative * lambda,
        }
    }
}

impl Curve for InteriorMapSeries {
    fn point_and_tangent(&self, theta: f64) -> (c64, c64) {
        let z = c64::from_polar(1.0, theta);
        (self.eval(z), c64::i() * z * self.derivative(z))
    }

    fn radius(&self) -> f64 {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_map() {
        let f = build_interior_polynomial(&[c64::new(1.0, 0.0)]).unwrap();
        assert_eq!(f.conformal_radius(), 1.0);
        assert_eq!(f.eval(c64::new(0.0, 0.0)), c64::new(0.0, 0.0));
        assert!((f.min_boundary_derivative() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn quadratic_maps() {
        let f = build_interior_polynomial(&[c64::new(1.0, 0.0), c64::new(0.2, 0.0)]).unwrap();
        assert!((f.min_boundary_derivative() - 0.6).abs() < 1e-12);
        let z = c64::new(0.3, -0.4);
        assert!((f.derivative(z) - (1.0 + 0.4 * z)).norm() < 1e-15);
        assert!(matches!(
            build_interior_polynomial(&[c64::new(1.0, 0.0), c64::new(0.6, 0.0)]),
            Err(Error::NotSimple { .. })
        ));
        assert!(build_interior_polynomial(&[c64::new(-1.0, 0.0)]).is_err());
        assert!(build_interior_polynomial(&[c64::new(1.0, 0.1)]).is_err());
    }

    #[test]
    fn circle_values_match_horner() {
        let f = build_interior_polynomial(&[c64::new(1.0, 0.0), c64::new(0.1, 0.05), c64::new(-0.02, 0.0)]).unwrap();
        let (v, d) = f.on_circle(0.8, 16);
        for (j, z) in fft::circle_points(0.8, 16).iter().enumerate() {
            assert!((v[j] - f.eval(*z)).norm() < 1e-14);
            assert!((d[j] - f.derivative(*z)).norm() < 1e-14);
        }
    }
}
