use num_complex::Complex64 as c64;

use super::{next_smooth, GrunskyMatrix};
use crate::conformal::ExteriorMapSeries;
use crate::error::{invalid, Error, Result};
use crate::fft::{self, PowerSign};

/// How a log-derivative vector was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DRoute {
    /// `d_k = sum_{j<k} a_{j,k-j}`.
    Convolution,
    /// Fourier coefficients of `log g'` on a circle.
    LogDerivativeFft,
    /// Entries supplied by the caller.
    Supplied,
}

/// Coefficients `d_k` of `log g'(z) = -sum_k d_k z^{-k}`, `1 <= k <= n`.
#[derive(Debug, Clone)]
pub struct LogDerivVector {
    d: Vec<c64>,
    route: DRoute,
}

impl LogDerivVector {
    pub fn from_values(d: Vec<c64>) -> Self {
        Self { d, route: DRoute::Supplied }
    }

    pub fn n(&self) -> usize {
        self.d.len()
    }

    pub fn route(&self) -> DRoute {
        self.route
    }

    /// `d_k`, 1-based.
    pub fn d(&self, k: usize) -> c64 {
        self.d[k - 1]
    }

    pub fn values(&self) -> &[c64] {
        &self.d
    }

    /// The scaled vector `(sqrt(k) d_k)`.
    pub fn scaled(&self) -> Vec<c64> {
        self.d.iter().enumerate().map(|(i, d)| d * ((i + 1) as f64).sqrt()).collect()
    }

    /// `sum_k k |d_k|^2`.
    pub fn dirichlet_sum(&self) -> f64 {
        self.d.iter().enumerate().map(|(i, d)| (i + 1) as f64 * d.norm_sqr()).sum()
    }

    /// Vector of the equipotential `g(rz)/r`: `d_k r^{-k}`.
    pub fn equipotential(&self, r: f64) -> Result<Self> {
        if !(r > 1.0) {
            return Err(invalid(format!("equipotential radius {r} must exceed 1")));
        }
        let d = self.d.iter().enumerate().map(|(i, d)| d * r.powi(-((i + 1) as i32))).collect();
        Ok(Self { d, route: self.route })
    }

    pub fn truncated(&self, n: usize) -> Self {
        Self {
            d: self.d[..n.min(self.d.len())].to_vec(),
            route: self.route,
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.d.iter().zip(&other.d).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// `d_k = sum_{j=1}^{k-1} b_{j,k-j} / sqrt(j (k-j))`.
pub fn dvector_from_grunsky(b: &GrunskyMatrix, n: usize) -> Result<LogDerivVector> {
    let need = n.saturating_sub(1);
    if b.rows() < need || b.cols() < need {
        return Err(Error::SeriesTooShort {
            available: b.rows().min(b.cols()),
            required: need,
        });
    }
    let d = (1..=n)
        .map(|k| (1..k).map(|j| b.a(j, k - j)).sum())
        .collect();
    Ok(LogDerivVector { d, route: DRoute::Convolution })
}

/// Reads `-d_k` off the Fourier coefficients of `log g'` on `|z| = 1 + 4/n`.
///
/// The map must have capacity 1.
pub fn dvector_from_map(map: &ExteriorMapSeries, n: usize) -> Result<LogDerivVector> {
    if (map.capacity() - 1.0).abs() > 1e-12 {
        return Err(Error::CapacityNotNormalized(map.capacity()));
    }
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    if !map.is_exact() && map.truncation() + 1 < n {
        return Err(Error::SeriesTooShort {
            available: map.truncation(),
            required: n - 1,
        });
    }
    let r = 1.0 + 4.0 / n as f64;
    let m = next_smooth(((32.0 / r.ln()).ceil() as usize).max(8 * n));
    let (_, dg) = map.on_circle(r, m);
    let mut logs: Vec<c64> = dg.iter().map(|v| v.ln()).collect();
    let mut prev = logs[0].im;
    let mut phase = prev;
    for v in logs.iter_mut().skip(1) {
        let step = fft::wrap_angle(v.im - prev);
        if step.abs() > 0.5 * std::f64::consts::PI {
            return Err(Error::BranchUnwrap { context: "log g'", winding: step });
        }
        prev = v.im;
        phase += step;
        v.im = phase;
    }
    let winding = phase + fft::wrap_angle(logs[0].im - prev) - logs[0].im;
    if winding.abs() > std::f64::consts::PI {
        return Err(Error::BranchUnwrap { context: "log g'", winding });
    }
    let c = fft::circle_coefficients(&logs, n, PowerSign::Negative);
    let d = c.iter().enumerate().map(|(i, v)| -v * r.powi((i + 1) as i32)).collect();
    Ok(LogDerivVector { d, route: DRoute::LogDerivativeFft })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::{build_disk, build_joukowski};
    use crate::grunsky::grunsky_log_fft;

    #[test]
    fn joukowski_log_derivative() {
        let c = 0.4;
        let j = build_joukowski(c).unwrap();
        let a = dvector_from_map(&j, 12).unwrap();
        let b = dvector_from_grunsky(&grunsky_log_fft(&j, 12).unwrap(), 12).unwrap();
        for v in [&a, &b] {
            assert!((v.d(2) - c).norm() < 1e-13);
            assert!((v.d(4) - c * c / 2.0).norm() < 1e-13);
            assert!((v.d(6) - c * c * c / 3.0).norm() < 1e-13);
            for k in (1..=12).step_by(2) {
                assert!(v.d(k).norm() < 1e-13);
            }
        }
        assert!(a.max_abs_diff(&b) < 1e-13);
    }

    #[test]
    fn disk_and_capacity_guard() {
        assert!(dvector_from_map(&build_disk(), 8).unwrap().values().iter().all(|v| v.norm() < 1e-15));
        let big = build_joukowski(0.2).unwrap().transformed(2.0, 0.0, c64::new(0.0, 0.0));
        assert!(matches!(dvector_from_map(&big, 8), Err(Error::CapacityNotNormalized(_))));
        assert!(dvector_from_map(&big.normalized(), 8).is_ok());
    }
}
