//! Truncated series for exterior conformal maps `g: |z| > 1 -> D*` and
//! polynomial interior maps `f: |z| < 1 -> D`.

mod interior;
mod sc;

use std::f64::consts::PI;

use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fft;
use crate::geometry;

pub use interior::{build_interior_polynomial, InteriorMapSeries};
pub use sc::{build_regular_polygon, build_sc_exterior, triangle_corners};

/// A corner of a piecewise smooth boundary, described through its prevertex on
/// the unit circle and its interior opening angle `pi * alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CornerSpec {
    theta: f64,
    alpha: f64,
}

impl CornerSpec {
    pub fn new(theta: f64, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(invalid(format!("interior angle fraction {alpha} outside (0, 2)")));
        }
        if !theta.is_finite() {
            return Err(invalid("non-finite prevertex angle"));
        }
        Ok(Self {
            theta: theta.rem_euclid(2.0 * PI),
            alpha,
        })
    }

    /// Prevertex angle in `[0, 2 pi)`.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Interior angle fraction.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Exterior angle fraction `2 - alpha`.
    pub fn gamma(&self) -> f64 {
        2.0 - self.alpha
    }

    /// Prevertex `e^{i theta}`.
    pub fn prevertex(&self) -> c64 {
        c64::from_polar(1.0, self.theta)
    }

    pub(crate) fn rotated(&self, phi: f64) -> Self {
        Self {
            theta: (self.theta + phi).rem_euclid(2.0 * PI),
            alpha: self.alpha,
        }
    }
}

/// `min(1, gamma_1, ..., gamma_m)`.
pub fn rho(corners: &[CornerSpec]) -> f64 {
    corners.iter().map(CornerSpec::gamma).fold(1.0, f64::min)
}

/// Where a series came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Disk,
    Joukowski { c: f64 },
    RegularPolygon { m: usize },
    SchwarzChristoffel,
    /// Raw user-supplied coefficients.
    Series,
    Equipotential { parent: Box<Family>, r: f64 },
    Transformed { parent: Box<Family>, scale: f64, rotation: f64, shift: [f64; 2] },
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Family::Disk => write!(f, "disk"),
            Family::Joukowski { c } => write!(f, "joukowski(c={c})"),
            Family::RegularPolygon { m } => write!(f, "regular-{m}-gon"),
            Family::SchwarzChristoffel => write!(f, "schwarz-christoffel"),
            Family::Series => write!(f, "series"),
            Family::Equipotential { parent, r } => write!(f, "equipotential({parent}, r={r})"),
            Family::Transformed { parent, scale, rotation, shift } => write!(
                f,
                "{scale}*e^(i{rotation})*{parent}+({}, {})",
                shift[0], shift[1]
            ),
        }
    }
}

/// Model used for the truncation tail estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TailModel {
    /// The stored coefficients are the whole series.
    Exact,
    /// `|g_k| <= A q^k`.
    Geometric,
    /// `|g_k| <= A k^{-p}`, used for corner maps.
    PowerLaw,
}

/// Truncated Laurent series `g(z) = r_inf z + sum_{k=0}^{N} g_k z^{-k}` of an
/// exterior conformal map.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExteriorMapSeries {
    r_inf: f64,
    coeffs: Vec<c64>,
    corners: Vec<CornerSpec>,
    family: Family,
    tail_model: TailModel,
    tail_bound: f64,
}

/// Boundary samples `w(theta) = g(rho e^{i theta})` and `w'(theta)`.
#[derive(Debug, Clone)]
pub struct BoundarySamples {
    pub radius: f64,
    pub thetas: Vec<f64>,
    pub points: Vec<c64>,
    pub tangents: Vec<c64>,
}

/// A closed curve parametrized by an angle.
pub trait Curve: Sync {
    /// `w(theta)` and `w'(theta)`.
    fn point_and_tangent(&self, theta: f64) -> (c64, c64);

    /// Radius of the circle whose image is sampled.
    fn radius(&self) -> f64;

    fn boundary(&self, thetas: &[f64]) -> Result<BoundarySamples> {
        if thetas.is_empty() {
            return Err(Error::Empty("theta grid"));
        }
        let (points, tangents) = thetas.iter().map(|&t| self.point_and_tangent(t)).unzip();
        Ok(BoundarySamples {
            radius: self.radius(),
            thetas: thetas.to_vec(),
            points,
            tangents,
        })
    }
}

impl Curve for ExteriorMapSeries {
    fn point_and_tangent(&self, theta: f64) -> (c64, c64) {
        let z = c64::from_polar(self.boundary_radius(), theta);
        (self.eval(z), c64::i() * z * self.derivative(z))
    }

    fn radius(&self) -> f64 {
        self.boundary_radius()
    }
}

/// Identity map of the exterior disk.
pub fn build_disk() -> ExteriorMapSeries {
    ExteriorMapSeries {
        r_inf: 1.0,
        coeffs: vec![c64::new(0.0, 0.0); 2],
        corners: Vec::new(),
        family: Family::Disk,
        tail_model: TailModel::Exact,
        tail_bound: 0.0,
    }
}

/// `g(z) = z + c/z`, whose boundary is the ellipse with semi-axes `1 + c`, `1 - c`.
pub fn build_joukowski(c: f64) -> Result<ExteriorMapSeries> {
    if !(0.0..1.0).contains(&c) {
        return Err(invalid(format!("joukowski parameter {c} outside [0, 1)")));
    }
    Ok(ExteriorMapSeries {
        r_inf: 1.0,
        coeffs: vec![c64::new(0.0, 0.0), c64::new(c, 0.0)],
        corners: Vec::new(),
        family: Family::Joukowski { c },
        tail_model: TailModel::Exact,
        tail_bound: 0.0,
    })
}

/// Series of the equipotential map `g_r(z) = g(r z) / r`.
pub fn build_equipotential(map: &ExteriorMapSeries, r: f64) -> Result<ExteriorMapSeries> {
    if !(r > 1.0) || !r.is_finite() {
        return Err(invalid(format!("equipotential radius {r} must exceed 1")));
    }
    let coeffs: Vec<c64> = map
        .coeffs
        .iter()
        .enumerate()
        .map(|(k, g)| g * r.powi(-(k as i32 + 1)))
        .collect();
    // The equipotentials of an equipotential compose: g_{r,s} = g_{rs}.
    let family = match &map.family {
        Family::Equipotential { parent, r: r0 } => Family::Equipotential { parent: parent.clone(), r: r0 * r },
        other => Family::Equipotential { parent: Box::new(other.clone()), r },
    };
    let tail_model = if map.tail_model == TailModel::Exact { TailModel::Exact } else { TailModel::Geometric };
    Ok(ExteriorMapSeries::assemble(map.r_inf, coeffs, Vec::new(), family, tail_model))
}

impl ExteriorMapSeries {
    pub(crate) fn assemble(
        r_inf: f64,
        coeffs: Vec<c64>,
        corners: Vec<CornerSpec>,
        family: Family,
        tail_model: TailModel,
    ) -> Self {
        let mut s = Self {
            r_inf,
            coeffs,
            corners,
            family,
            tail_model,
            tail_bound: 0.0,
        };
        s.tail_bound = s.estimate_tail();
        s
    }

    /// Builds a series from raw coefficients `g_0..g_N`. The tail is modelled
    /// as geometric, or as exact when `exact` is set.
    pub fn from_coefficients(r_inf: f64, coeffs: Vec<c64>, exact: bool) -> Result<Self> {
        if !(r_inf > 0.0) {
            return Err(invalid("capacity must be positive"));
        }
        if coeffs.is_empty() {
            return Err(Error::Empty("coefficient list"));
        }
        let model = if exact { TailModel::Exact } else { TailModel::Geometric };
        Ok(Self::assemble(r_inf, coeffs, Vec::new(), Family::Series, model))
    }

    /// Capacity `r_inf`.
    pub fn capacity(&self) -> f64 {
        self.r_inf
    }

    /// Coefficients `g_0, g_1, ..., g_N`.
    pub fn coeffs(&self) -> &[c64] {
        &self.coeffs
    }

    /// Coefficient of `z^{-k}` (zero past the truncation).
    pub fn coeff(&self, k: usize) -> c64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    /// Truncation order `N` (index of the last stored coefficient).
    pub fn truncation(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn corners(&self) -> &[CornerSpec] {
        &self.corners
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn tail_model(&self) -> TailModel {
        self.tail_model
    }

    /// Estimated truncation error on the boundary evaluation circle.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// Whether the stored coefficients represent the map exactly.
    pub fn is_exact(&self) -> bool {
        self.tail_model == TailModel::Exact
    }

    /// Radius used for boundary evaluation: the unit circle where the series
    /// converges there, otherwise `1 + 1/(4N)`.
    pub fn boundary_radius(&self) -> f64 {
        match self.tail_model {
            TailModel::PowerLaw => 1.0 + 1.0 / (4.0 * self.truncation().max(1) as f64),
            _ => 1.0,
        }
    }

    /// `g(z)`.
    pub fn eval(&self, z: c64) -> c64 {
        let w = z.inv();
        let mut acc = c64::new(0.0, 0.0);
        for g in self.coeffs.iter().rev() {
            acc = acc * w + g;
        }
        self.r_inf * z + acc
    }

    /// `g'(z)`.
    pub fn derivative(&self, z: c64) -> c64 {
        let w = z.inv();
        let mut acc = c64::new(0.0, 0.0);
        for (k, g) in self.coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * w + g * k as f64;
        }
        // acc = sum_{k>=1} k g_k w^{k-1}
        self.r_inf - acc * w * w
    }

    /// `g''(z)`.
    pub fn second_derivative(&self, z: c64) -> c64 {
        let w = z.inv();
        let mut acc = c64::new(0.0, 0.0);
        for (k, g) in self.coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * w + g * (k * (k + 1)) as f64;
        }
        acc * w * w * w
    }

    /// `g` and `g'` at `m` equispaced points of `|z| = radius`.
    pub fn on_circle(&self, radius: f64, m: usize) -> (Vec<c64>, Vec<c64>) {
        let zs = fft::circle_points(radius, m);
        let vals = fft::negative_powers_on_circle(&self.coeffs, radius, m);
        let weighted: Vec<c64> = self.coeffs.iter().enumerate().map(|(k, g)| g * k as f64).collect();
        let dvals = fft::negative_powers_on_circle(&weighted, radius, m);
        let g = zs.iter().zip(&vals).map(|(z, v)| self.r_inf * z + v).collect();
        let dg = zs.iter().zip(&dvals).map(|(z, v)| self.r_inf - v / z).collect();
        (g, dg)
    }

    /// `w(theta) = g(rho e^{i theta})` and `w'(theta) = i rho e^{i theta} g'(rho e^{i theta})`
    /// with `rho` = [`Self::boundary_radius`].
    pub fn eval_boundary(&self, thetas: &[f64]) -> Result<BoundarySamples> {
        Curve::boundary(self, thetas)
    }

    /// Closed polyline of `m` boundary samples at the evaluation radius.
    pub fn boundary_polyline(&self, m: usize) -> Vec<c64> {
        self.on_circle(self.boundary_radius(), m).0
    }

    /// Checks that the boundary polyline with `8N` (at least 256) samples is simple.
    pub fn check_simple(&self) -> Result<()> {
        let m = (8 * self.truncation()).max(256);
        let poly = self.boundary_polyline(m);
        match geometry::first_self_intersection(&poly) {
            None => Ok(()),
            Some((first, second)) => Err(Error::NotSimple { first, second, points: m }),
        }
    }

    /// The map divided by its capacity, so that `r_inf = 1`.
    pub fn normalized(&self) -> Self {
        self.transformed(1.0 / self.r_inf, 0.0, c64::new(0.0, 0.0))
    }

    /// Series of `lambda e^{i phi} g(e^{-i phi} z) + shift`, whose image is the
    /// domain rotated by `phi`, scaled by `lambda` and translated.
    pub fn transformed(&self, scale: f64, rotation: f64, shift: c64) -> Self {
        assert!(scale > 0.0);
        let rot = c64::from_polar(1.0, rotation);
        let mut coeffs: Vec<c64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, g)| g * scale * rot * c64::from_polar(1.0, k as f64 * rotation))
            .collect();
        coeffs[0] += shift;
        Self {
            r_inf: self.r_inf * scale,
            coeffs,
            corners: self.corners.iter().map(|c| c.rotated(rotation)).collect(),
            family: Family::Transformed {
                parent: Box::new(self.family.clone()),
                scale,
                rotation,
                shift: [shift.re, shift.im],
            },
            tail_model: self.tail_model,
            tail_bound: self.tail_bound * scale,
        }
    }

    /// Closed-form `g'(z) = r_inf prod_p (1 - z_p / z)^{1 - alpha_p}` for polygon maps.
    pub fn polygon_derivative(&self, z: c64) -> Option<c64> {
        if self.corners.is_empty() {
            return None;
        }
        let mut acc = c64::new(self.r_inf, 0.0);
        for c in &self.corners {
            acc *= (1.0 - c.prevertex() / z).powf(1.0 - c.alpha());
        }
        Some(acc)
    }

    /// Vertices `g(z_p)` of a polygon map, computed by integrating the closed
    /// form of `g'` along the ray from `2 z_p` to `z_p`.
    pub fn polygon_vertices(&self) -> Result<Vec<c64>> {
        sc::polygon_vertices(self)
    }

    fn estimate_tail(&self) -> f64 {
        let n = self.truncation();
        let radius = self.boundary_radius();
        match self.tail_model {
            TailModel::Exact => 0.0,
            TailModel::Geometric => tail_geometric(&self.coeffs, radius),
            TailModel::PowerLaw => tail_power_law(&self.coeffs, radius, n),
        }
    }
}

fn last_quartile(coeffs: &[c64]) -> Vec<(f64, f64)> {
    let n = coeffs.len();
    let start = (3 * n / 4).max(1);
    coeffs[start..]
        .iter()
        .enumerate()
        .filter(|(_, g)| g.norm() > 0.0)
        .map(|(i, g)| ((start + i) as f64, g.norm()))
        .collect()
}

fn line_fit(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

fn tail_geometric(coeffs: &[c64], radius: f64) -> f64 {
    let pts = last_quartile(coeffs);
    let n = coeffs.len() as f64;
    if pts.len() < 2 {
        return pts.first().map_or(0.0, |p| p.1);
    }
    let logs: Vec<(f64, f64)> = pts.iter().map(|&(k, a)| (k, a.ln())).collect();
    let (slope, icept) = line_fit(&logs);
    // envelope: shift the intercept so the fit bounds every sample
    let lift = logs.iter().map(|&(k, l)| l - (icept + slope * k)).fold(0.0, f64::max);
    let q = (slope.exp()) / radius;
    if q >= 1.0 {
        return tail_power_law(coeffs, radius, coeffs.len() - 1);
    }
    (icept + lift).exp() * (slope.exp() / radius).powf(n) / (1.0 - q)
}

fn tail_power_law(coeffs: &[c64], radius: f64, n: usize) -> f64 {
    let pts = last_quartile(coeffs);
    if pts.len() < 2 {
        return pts.first().map_or(0.0, |p| p.1);
    }
    let logs: Vec<(f64, f64)> = pts.iter().map(|&(k, a)| (k.ln(), a.ln())).collect();
    let (slope, icept) = line_fit(&logs);
    let lift = logs.iter().map(|&(k, l)| l - (icept + slope * k)).fold(0.0, f64::max);
    let a = (icept + lift).exp();
    let p = -slope;
    let n = n as f64;
    let damp = radius.powf(-n);
    if p > 1.0 {
        a * n.powf(1.0 - p) / (p - 1.0) * damp
    } else {
        a * n.powf(-p) * damp / (1.0 - 1.0 / radius)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_boundary_and_capacity() {
        let d = build_disk();
        assert_eq!(d.capacity(), 1.0);
        assert!(d.coeffs().iter().all(|g| g.norm() == 0.0));
        let s = d.eval_boundary(&[0.0, PI]).unwrap();
        assert!((s.points[0] - 1.0).norm() < 1e-15);
        assert!((s.points[1] + 1.0).norm() < 1e-15);
        assert!((s.tangents[1] - c64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn joukowski_boundary_values() {
        let j = build_joukowski(0.5).unwrap();
        let s = j.eval_boundary(&[0.0, PI / 2.0]).unwrap();
        assert!((s.points[0] - 1.5).norm() < 1e-15);
        assert!((s.points[1] - c64::new(0.0, 0.5)).norm() < 1e-15);
        let j3 = build_joukowski(0.3).unwrap();
        let s3 = j3.eval_boundary(&[0.0]).unwrap();
        assert!((s3.points[0] - 1.3).norm() < 1e-15);
        assert!((s3.tangents[0] - c64::new(0.0, 0.7)).norm() < 1e-15);
        assert_eq!(build_joukowski(0.0).unwrap().coeffs(), build_disk().coeffs());
    }

    #[test]
    fn joukowski_rejects_degenerate() {
        assert!(build_joukowski(1.0).is_err());
        assert!(build_joukowski(-0.1).is_err());
    }

    #[test]
    fn equipotential_coefficient_rule() {
        let j = build_joukowski(0.5).unwrap();
        let e = build_equipotential(&j, 2.0).unwrap();
        assert!((e.coeff(1) - 0.125).norm() < 1e-15);
        assert_eq!(e.capacity(), 1.0);
        assert!(build_equipotential(&j, 1.0).is_err());
        let d = build_equipotential(&build_disk(), 2.0).unwrap();
        assert!(d.coeffs().iter().all(|g| g.norm() == 0.0));
        match e.family() {
            Family::Equipotential { r, .. } => assert_eq!(*r, 2.0),
            f => panic!("unexpected family {f}"),
        }
    }

    #[test]
    fn circle_evaluation_matches_horner() {
        let j = build_joukowski(0.4).unwrap().transformed(1.7, 0.3, c64::new(0.1, -0.2));
        let (g, dg) = j.on_circle(1.1, 12);
        for (i, z) in fft::circle_points(1.1, 12).iter().enumerate() {
            assert!((g[i] - j.eval(*z)).norm() < 1e-13);
            assert!((dg[i] - j.derivative(*z)).norm() < 1e-13);
        }
    }

    #[test]
    fn second_derivative_matches_finite_difference() {
        let j = build_joukowski(0.4).unwrap();
        let z = c64::new(1.1, 0.4);
        let h = 1e-5;
        let fd = (j.derivative(z + h) - j.derivative(z - h)) / (2.0 * h);
        assert!((fd - j.second_derivative(z)).norm() < 1e-8);
    }

    #[test]
    fn rho_of_corner_lists() {
        let cs = [CornerSpec::new(0.0, 0.5).unwrap(), CornerSpec::new(1.0, 1.5).unwrap()];
        assert_eq!(rho(&cs), 0.5);
        assert_eq!(rho(&[]), 1.0);
        assert!(CornerSpec::new(0.0, 2.0).is_err());
        assert!(CornerSpec::new(0.0, 0.0).is_err());
        assert!((CornerSpec::new(-0.5, 1.0).unwrap().theta() - (2.0 * PI - 0.5)).abs() < 1e-15);
    }
}
