//! Exterior Schwarz-Christoffel maps `g'(z) = prod_p (1 - z_p/z)^{1 - alpha_p}`.

use std::f64::consts::PI;

use num_complex::Complex64 as c64;

use super::{CornerSpec, ExteriorMapSeries, Family, TailModel};
use crate::error::{invalid, Error, Result};
use crate::quadrature;

const ANGLE_SUM_TOL: f64 = 1e-12;
const RESIDUE_TOL: f64 = 1e-10;

/// Coefficients `c_j` of `(1 - w)^a = sum_j c_j w^j`, `j < len`.
fn binomial_series(a: f64, len: usize) -> Vec<f64> {
    let mut c = Vec::with_capacity(len);
    let mut v = 1.0;
    for j in 0..len {
        c.push(v);
        v *= (j as f64 - a) / (j + 1) as f64;
    }
    c
}

/// Integrates `g'(z) = sum_j e_j z^{-j}` (with `e_0 = 1`, `e_1 = 0`) into `g_0 = 0, g_1, ..., g_N`.
fn integrate_derivative(e: &[c64], n: usize) -> Vec<c64> {
    let mut g = vec![c64::new(0.0, 0.0); n + 1];
    for k in 1..=n {
        g[k] = -e[k + 1] / k as f64;
    }
    g
}

/// Series of the exterior map onto the polygon with the given corners, normalized
/// to capacity 1 and `g_0 = 0`, truncated after `z^{-N}`.
pub fn build_sc_exterior(corners: &[CornerSpec], n: usize) -> Result<ExteriorMapSeries> {
    if n < 1 {
        return Err(invalid("truncation N must be at least 1"));
    }
    if corners.len() < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: corners.len() });
    }
    for (i, a) in corners.iter().enumerate() {
        for b in &corners[i + 1..] {
            let d = (a.theta() - b.theta()).abs();
            if d.min(2.0 * PI - d) < 1e-12 {
                return Err(invalid(format!("coincident prevertices at theta = {}", a.theta())));
            }
        }
    }
    let sum: f64 = corners.iter().map(|c| 1.0 - c.alpha()).sum();
    if (sum - 2.0).abs() > ANGLE_SUM_TOL {
        return Err(Error::AngleSum { sum });
    }
    let residue: c64 = corners.iter().map(|c| c.prevertex() * (1.0 - c.alpha())).sum();
    if residue.norm() > RESIDUE_TOL {
        return Err(Error::Residue { residue: residue.norm() });
    }

    let len = n + 2;
    let mut e = vec![c64::new(0.0, 0.0); len];
    e[0] = c64::new(1.0, 0.0);
    for c in corners {
        let bin = binomial_series(1.0 - c.alpha(), len);
        let z = c.prevertex();
        let mut factor = Vec::with_capacity(len);
        let mut zp = c64::new(1.0, 0.0);
        for b in &bin {
            factor.push(zp * b);
            zp *= z;
        }
        let mut next = vec![c64::new(0.0, 0.0); len];
        for (i, ei) in e.iter().enumerate() {
            if *ei == c64::new(0.0, 0.0) {
                continue;
            }
            for (j, fj) in factor[..len - i].iter().enumerate() {
                next[i + j] += ei * fj;
            }
        }
        e = next;
    }
    // the residue condition makes this vanish up to rounding
    e[1] = c64::new(0.0, 0.0);
    let coeffs = integrate_derivative(&e, n);
    let map = ExteriorMapSeries::assemble(1.0, coeffs, corners.to_vec(), Family::SchwarzChristoffel, TailModel::PowerLaw);
    map.check_simple()?;
    Ok(map)
}

/// Regular `m`-gon, `g'(z) = (1 - z^{-m})^{2/m}`, truncated after `z^{-N}`.
pub fn build_regular_polygon(m: usize, n: usize) -> Result<ExteriorMapSeries> {
    if m < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: m });
    }
    if n < 1 {
        return Err(invalid("truncation N must be at least 1"));
    }
    let alpha = (m as f64 - 2.0) / m as f64;
    let corners: Vec<CornerSpec> = (0..m)
        .map(|p| CornerSpec::new(2.0 * PI * p as f64 / m as f64, alpha))
        .collect::<Result<_>>()?;
    let bin = binomial_series(2.0 / m as f64, (n + 1) / m + 2);
    let mut e = vec![c64::new(0.0, 0.0); n + 2];
    for (j, b) in bin.iter().enumerate() {
        if j * m < e.len() {
            e[j * m] = c64::new(*b, 0.0);
        }
    }
    let coeffs = integrate_derivative(&e, n);
    let map = ExteriorMapSeries::assemble(1.0, coeffs, corners, Family::RegularPolygon { m }, TailModel::PowerLaw);
    map.check_simple()?;
    Ok(map)
}

/// Prevertices for a triangle with interior angle fractions `alphas`.
///
/// For three corners the residue condition `sum (1 - alpha_p) z_p = 0` says the
/// weighted prevertices close up into a triangle with side lengths
/// `1 - alpha_p`, which fixes the prevertex angles up to rotation (`theta_1 = 0`).
pub fn triangle_corners(alphas: [f64; 3]) -> Result<Vec<CornerSpec>> {
    let sum: f64 = alphas.iter().sum();
    if (sum - 1.0).abs() > ANGLE_SUM_TOL {
        return Err(Error::AngleSum { sum: 3.0 - sum });
    }
    let a: Vec<f64> = alphas.iter().map(|x| 1.0 - x).collect();
    if a.iter().any(|&x| x <= 0.0) {
        return Err(invalid("triangle angles must each be below pi"));
    }
    let cos2 = (a[2] * a[2] - a[0] * a[0] - a[1] * a[1]) / (2.0 * a[0] * a[1]);
    if cos2.abs() >= 1.0 {
        return Err(invalid("angle weights violate the triangle inequality"));
    }
    let theta2 = cos2.acos();
    let s = a[0] + a[1] * c64::from_polar(1.0, theta2);
    let theta3 = (-s).arg().rem_euclid(2.0 * PI);
    Ok(vec![
        CornerSpec::new(0.0, alphas[0])?,
        CornerSpec::new(theta2, alphas[1])?,
        CornerSpec::new(theta3, alphas[2])?,
    ])
}

pub(super) fn polygon_vertices(map: &ExteriorMapSeries) -> Result<Vec<c64>> {
    if map.corners.is_empty() {
        return Err(Error::Empty("corner list"));
    }
    let n = map.truncation().max(1) as f64;
    // start far enough out that the truncated series is exact to rounding
    let radius = 2.0f64.max((37.0 / n).exp());
    map.corners
        .iter()
        .map(|c| {
            let zp = c.prevertex();
            let deriv = |s: f64| -> c64 {
                let t = 1.0 + s;
                let mut acc = c64::new(map.r_inf, 0.0) * (s / t).powf(1.0 - c.alpha());
                for q in &map.corners {
                    if q.theta != c.theta {
                        acc *= (1.0 - q.prevertex() / (zp * t)).powf(1.0 - q.alpha());
                    }
                }
                acc
            };
            let re = quadrature::tanh_sinh_left(|s| deriv(s).re, radius - 1.0, 1e-14)?;
            let im = quadrature::tanh_sinh_left(|s| deriv(s).im, radius - 1.0, 1e-14)?;
            Ok(map.eval(zp * radius) - zp * c64::new(re, im))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::rho;
    use crate::geometry::winding_number;

    #[test]
    fn square_leading_coefficient() {
        let sq = build_regular_polygon(4, 8).unwrap();
        assert!((sq.coeff(3) - 1.0 / 6.0).norm() < 1e-15);
        assert_eq!(sq.coeff(1), c64::new(0.0, 0.0));
        assert_eq!(sq.coeff(2), c64::new(0.0, 0.0));
        // (1 - w)^{1/2}: -w^2/8 integrates to z^{-7}/56
        assert!((sq.coeff(7) - 1.0 / 56.0).norm() < 1e-15);
    }

    #[test]
    fn general_product_matches_regular_closed_form() {
        for m in [3, 4, 5, 7] {
            let alpha = (m as f64 - 2.0) / m as f64;
            let corners: Vec<CornerSpec> =
                (0..m).map(|p| CornerSpec::new(2.0 * PI * p as f64 / m as f64, alpha).unwrap()).collect();
            let a = build_sc_exterior(&corners, 64).unwrap();
            let b = build_regular_polygon(m, 64).unwrap();
            for k in 0..=64 {
                assert!((a.coeff(k) - b.coeff(k)).norm() < 1e-14, "m={m} k={k}");
            }
        }
    }

    #[test]
    fn regular_polygon_leading_term_formula() {
        for m in 3..9 {
            let g = build_regular_polygon(m, 2 * m).unwrap();
            let expect = (2.0 / m as f64) / (m as f64 - 1.0);
            assert!((g.coeff(m - 1).re - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn triangle_corner_data() {
        let tri = build_regular_polygon(3, 16).unwrap();
        assert!(tri.corners().iter().all(|c| (c.alpha() - 1.0 / 3.0).abs() < 1e-15));
        assert!((tri.corners()[0].gamma() - 5.0 / 3.0).abs() < 1e-15);
        assert_eq!(rho(tri.corners()), 1.0);
    }

    #[test]
    fn angle_sum_and_residue_rejections() {
        let bad: Vec<CornerSpec> = (0..4).map(|p| CornerSpec::new(p as f64, 0.6).unwrap()).collect();
        assert!(matches!(build_sc_exterior(&bad, 8), Err(Error::AngleSum { .. })));
        let alphas = [0.1, 0.4, 0.5];
        let cube: Vec<CornerSpec> =
            (0..3).map(|p| CornerSpec::new(2.0 * PI * p as f64 / 3.0, alphas[p]).unwrap()).collect();
        let sum: f64 = cube.iter().map(|c| 1.0 - c.alpha()).sum();
        assert!((sum - 2.0).abs() < 1e-15);
        assert!(matches!(build_sc_exterior(&cube, 8), Err(Error::Residue { .. })));
    }

    #[test]
    fn closing_triangle_prevertices() {
        let cs = triangle_corners([0.1, 0.4, 0.5]).unwrap();
        let res: c64 = cs.iter().map(|c| c.prevertex() * (1.0 - c.alpha())).sum();
        assert!(res.norm() < 1e-15);
        assert!(cs[0].theta() < cs[1].theta() && cs[1].theta() < cs[2].theta());
        let eq = triangle_corners([1.0 / 3.0; 3]).unwrap();
        assert!((eq[1].theta() - 2.0 * PI / 3.0).abs() < 1e-14);
        assert!((eq[2].theta() - 4.0 * PI / 3.0).abs() < 1e-14);
        let g = build_sc_exterior(&cs, 256).unwrap();
        assert_eq!(g.corners().len(), 3);
    }

    #[test]
    fn vertices_of_square_and_triangle() {
        let sq = build_regular_polygon(4, 64).unwrap();
        let v = sq.polygon_vertices().unwrap();
        // vertices sit on the rays through the prevertices at a common distance
        let r0 = v[0].norm();
        for (p, w) in v.iter().enumerate() {
            assert!((w.norm() - r0).abs() < 1e-12);
            assert!((w.arg().rem_euclid(2.0 * PI) - PI / 2.0 * p as f64).abs() < 1e-12);
        }
        // interior angle pi/2 at each vertex
        let e1 = v[1] - v[0];
        let e0 = v[3] - v[0];
        assert!((e1.re * e0.re + e1.im * e0.im).abs() < 1e-12);

        let tri = build_sc_exterior(&triangle_corners([0.1, 0.4, 0.5]).unwrap(), 128).unwrap();
        let w = tri.polygon_vertices().unwrap();
        let angle = |a: c64, b: c64, c: c64| ((c - b) / (a - b)).arg().abs() / PI;
        let got = [angle(w[2], w[0], w[1]), angle(w[0], w[1], w[2]), angle(w[1], w[2], w[0])];
        for (g, want) in got.iter().zip([0.1, 0.4, 0.5]) {
            assert!((g - want).abs() < 1e-10, "{got:?}");
        }
    }

    #[test]
    fn square_polyline_winds_once_about_origin() {
        let sq = build_regular_polygon(4, 256).unwrap();
        let pts = sq.boundary_polyline(4096);
        assert_eq!(winding_number(&pts, c64::new(0.0, 0.0)), 1);
        assert!(sq.tail_bound() > 0.0 && sq.tail_bound() < 1e-3);
    }

    #[test]
    fn derivative_closed_form_agrees_with_series() {
        let cs = triangle_corners([0.1, 0.4, 0.5]).unwrap();
        let g = build_sc_exterior(&cs, 400).unwrap();
        let z = c64::from_polar(1.3, 0.7);
        assert!((g.derivative(z) - g.polygon_derivative(z).unwrap()).norm() < 1e-12);
        let rot = g.transformed(2.0, 0.4, c64::new(0.3, 0.1));
        let zr = c64::from_polar(1.3, 1.1);
        assert!((rot.derivative(zr) - rot.polygon_derivative(zr).unwrap()).norm() < 1e-11);
    }
}
