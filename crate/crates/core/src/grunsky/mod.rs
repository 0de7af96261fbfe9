//! Truncated Grunsky matrices `b_{kl} = sqrt(kl) a_{kl}` and log-derivative vectors.

mod dvec;
mod engine;

use std::fmt;
use std::io::Write;

use faer::Mat;
use num_complex::Complex64 as c64;

use crate::error::{invalid, Error, Result};

pub use dvec::{dvector_from_grunsky, dvector_from_map, DRoute, LogDerivVector};
pub use engine::{grunsky_interior, grunsky_interior_with, grunsky_log_fft, grunsky_log_fft_with, grunsky_psi_contour, grunsky_psi_contour_with};

/// Which computation produced a matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    /// Double FFT of `log[(g(zeta) - g(z)) / (r_inf (zeta - z))]`.
    LogFft,
    /// Double FFT of `(z g'(z) - w g'(w)) / (g(z) - g(w))`.
    PsiContour,
    /// Double FFT of `log[(f(zeta) - f(z)) / (zeta - z)]` inside the disk.
    Interior,
    /// Entries supplied by the caller.
    Supplied,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::LogFft => "log-fft",
            Engine::PsiContour => "psi-contour",
            Engine::Interior => "interior",
            Engine::Supplied => "supplied",
        })
    }
}

/// Sampling torus `|zeta| = r1` (`m1` points) times `|z| = r2` (`m2` points).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub m1: usize,
    pub m2: usize,
    pub r1: f64,
    pub r2: f64,
}

/// Shape and sampling parameters for the FFT engines.
///
/// The matrix has `rows` rows and `cols` columns. Radii follow
/// `1 + a/rows`, `1 + 2a/cols` (the two offsets are swapped when `cols > rows` so
/// that the circles never coincide); interior radii are the reciprocals. With
/// the default `a = 4` the circle with offset `a/count` gets `8 * count` points
/// and the one with offset `2a/count` gets `4 * count`, so aliasing stays near
/// `e^{-32}` on both.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptions {
    pub rows: usize,
    pub cols: usize,
    pub a: f64,
    pub m1: Option<usize>,
    pub m2: Option<usize>,
    /// Re-run at half size and record the discrepancy as the accuracy estimate.
    pub self_check: bool,
}

impl GridOptions {
    pub fn square(n: usize) -> Self {
        Self::rectangular(n, n)
    }

    pub fn rectangular(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            a: 4.0,
            m1: None,
            m2: None,
            self_check: true,
        }
    }

    pub fn without_self_check(mut self) -> Self {
        self.self_check = false;
        self
    }

    pub fn with_grid_sizes(mut self, m1: usize, m2: usize) -> Self {
        self.m1 = Some(m1);
        self.m2 = Some(m2);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(invalid("matrix dimensions must be positive"));
        }
        if !(self.a > 0.0) {
            return Err(invalid("radius offset must be positive"));
        }
        Ok(())
    }

    /// Offsets `(d1, d2)` so that the radii are `1 + d_i` (exterior).
    fn offsets(&self) -> (f64, f64) {
        let (r, l) = (self.rows as f64, self.cols as f64);
        if self.cols <= self.rows {
            (self.a / r, 2.0 * self.a / l)
        } else {
            (2.0 * self.a / r, self.a / l)
        }
    }

    pub(crate) fn exterior_grid(&self) -> Result<Grid> {
        let (d1, d2) = self.offsets();
        self.grid(1.0 + d1, 1.0 + d2)
    }

    pub(crate) fn interior_grid(&self) -> Result<Grid> {
        let (d1, d2) = self.offsets();
        self.grid(1.0 / (1.0 + d1), 1.0 / (1.0 + d2))
    }

    pub(crate) fn grid(&self, r1: f64, r2: f64) -> Result<Grid> {
        let size = |count: usize, r: f64, forced: Option<usize>| -> Result<usize> {
            match forced {
                Some(m) if m < 4 * count => Err(Error::GridTooSmall { m, min: 4 * count }),
                Some(m) => Ok(m),
                None => {
                    // points per mode so that r^{-M} <= e^{-32}
                    let per_mode = (32.0 / (count as f64 * r.ln().abs())).ceil().max(4.0) as usize;
                    Ok(next_smooth(per_mode * count))
                }
            }
        };
        Ok(Grid {
            m1: size(self.rows, r1, self.m1)?,
            m2: size(self.cols, r2, self.m2)?,
            r1,
            r2,
        })
    }

    pub(crate) fn halved(&self) -> Option<Self> {
        if self.rows < 8 || self.cols < 8 {
            return None;
        }
        Some(Self {
            rows: self.rows / 2,
            cols: self.cols / 2,
            m1: None,
            m2: None,
            self_check: false,
            ..*self
        })
    }
}

/// Smallest integer `>= n` of the form `2^a 3^b 5^c`.
pub(crate) fn next_smooth(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut x = m;
        for p in [2, 3, 5] {
            while x % p == 0 {
                x /= p;
            }
        }
        if x == 1 {
            return m;
        }
        m += 1;
    }
}

/// Truncated Grunsky matrix `(b_{kl})`, `1 <= k <= rows`, `1 <= l <= cols`.
#[derive(Debug, Clone)]
pub struct GrunskyMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<c64>,
    engine: Engine,
    grid: Option<Grid>,
    accuracy: f64,
    equipotential: Option<f64>,
}

impl GrunskyMatrix {
    pub(crate) fn new(rows: usize, cols: usize, entries: Vec<c64>, engine: Engine, grid: Option<Grid>) -> Self {
        assert_eq!(entries.len(), rows * cols);
        Self {
            rows,
            cols,
            entries,
            engine,
            grid,
            accuracy: f64::NAN,
            equipotential: None,
        }
    }

    /// Matrix with entries `f(k, l)` (1-based), e.g. from a closed form.
    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> c64) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for k in 1..=rows {
            for l in 1..=cols {
                entries.push(f(k, l));
            }
        }
        let mut m = Self::new(rows, cols, entries, Engine::Supplied, None);
        m.accuracy = 0.0;
        m
    }

    /// Truncation order `N` (number of rows).
    pub fn n(&self) -> usize {
        self.rows
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn engine(&self) -> Engine {
        self.engine
    }

    pub fn grid(&self) -> Option<Grid> {
        self.grid
    }

    /// Estimated max entrywise error (NaN when no estimate was made).
    pub fn accuracy(&self) -> f64 {
        self.accuracy
    }

    pub fn set_accuracy(&mut self, accuracy: f64) {
        self.accuracy = accuracy;
    }

    /// Equipotential radius if the matrix was rescaled.
    pub fn equipotential_radius(&self) -> Option<f64> {
        self.equipotential
    }

    /// `b_{kl}`, 1-based.
    pub fn b(&self, k: usize, l: usize) -> c64 {
        assert!(k >= 1 && k <= self.rows && l >= 1 && l <= self.cols, "index ({k}, {l}) out of range");
        self.entries[(k - 1) * self.cols + (l - 1)]
    }

    /// `a_{kl} = b_{kl} / sqrt(kl)`, 1-based.
    pub fn a(&self, k: usize, l: usize) -> c64 {
        self.b(k, l) / ((k * l) as f64).sqrt()
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[c64] {
        &self.entries
    }

    /// Leading `rows x cols` block as a dense matrix.
    pub fn to_mat(&self, rows: usize, cols: usize) -> Mat<c64> {
        assert!(rows <= self.rows && cols <= self.cols);
        Mat::from_fn(rows, cols, |i, j| self.entries[i * self.cols + j])
    }

    /// Leading block as a new matrix.
    pub fn truncated(&self, rows: usize, cols: usize) -> Self {
        assert!(rows <= self.rows && cols <= self.cols);
        let mut entries = Vec::with_capacity(rows * cols);
        for k in 0..rows {
            entries.extend_from_slice(&self.entries[k * self.cols..k * self.cols + cols]);
        }
        Self {
            rows,
            cols,
            entries,
            ..self.clone_meta()
        }
    }

    fn clone_meta(&self) -> Self {
        Self {
            rows: 0,
            cols: 0,
            entries: Vec::new(),
            engine: self.engine,
            grid: self.grid,
            accuracy: self.accuracy,
            equipotential: self.equipotential,
        }
    }

    /// `max |b_{kl} - b_{lk}|` over the leading square block.
    pub fn symmetry_residual(&self) -> f64 {
        let n = self.rows.min(self.cols);
        let mut worst: f64 = 0.0;
        for k in 1..=n {
            for l in k + 1..=n {
                worst = worst.max((self.b(k, l) - self.b(l, k)).norm());
            }
        }
        worst
    }

    /// Max entrywise difference over the common leading block.
    pub fn max_abs_diff(&self, other: &GrunskyMatrix) -> f64 {
        let (r, c) = (self.rows.min(other.rows), self.cols.min(other.cols));
        let mut worst: f64 = 0.0;
        for k in 1..=r {
            for l in 1..=c {
                worst = worst.max((self.b(k, l) - other.b(k, l)).norm());
            }
        }
        worst
    }

    /// Writes the matrix as CSV with a commented header.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let (m1, m2, r1, r2) = self.grid.map_or((0, 0, f64::NAN, f64::NAN), |g| (g.m1, g.m2, g.r1, g.r2));
        writeln!(
            w,
            "# N={} cols={} engine={} r1={r1} r2={r2} M1={m1} M2={m2} accuracy={:e}",
            self.rows, self.cols, self.engine, self.accuracy
        )?;
        writeln!(w, "k,l,re_b,im_b")?;
        for k in 1..=self.rows {
            for l in 1..=self.cols {
                let b = self.b(k, l);
                writeln!(w, "{k},{l},{:e},{:e}", b.re, b.im)?;
            }
        }
        Ok(())
    }
}

/// Sets the accuracy of both matrices to their entrywise disagreement.
pub fn cross_check(a: &mut GrunskyMatrix, b: &mut GrunskyMatrix) -> f64 {
    let d = a.max_abs_diff(b);
    a.accuracy = d;
    b.accuracy = d;
    d
}

/// Grunsky matrix of the equipotential `g(rz)/r`: entries `r^{-(k+l)} b_{kl}`.
pub fn scale_equipotential(b: &GrunskyMatrix, r: f64) -> Result<GrunskyMatrix> {
    if !(r > 1.0) || !r.is_finite() {
        return Err(invalid(format!("equipotential radius {r} must exceed 1")));
    }
    let inv = 1.0 / r;
    let row_scale: Vec<f64> = (1..=b.rows).map(|k| inv.powi(k as i32)).collect();
    let col_scale: Vec<f64> = (1..=b.cols).map(|l| inv.powi(l as i32)).collect();
    let mut entries = b.entries.clone();
    for (k, row) in entries.chunks_mut(b.cols).enumerate() {
        for (l, v) in row.iter_mut().enumerate() {
            *v *= row_scale[k] * col_scale[l];
        }
    }
    Ok(GrunskyMatrix {
        rows: b.rows,
        cols: b.cols,
        entries,
        equipotential: Some(b.equipotential.unwrap_or(1.0) * r),
        ..b.clone_meta()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_sizes() {
        assert_eq!(next_smooth(7), 8);
        assert_eq!(next_smooth(8208), 8640);
        assert_eq!(next_smooth(1024), 1024);
    }

    #[test]
    fn radii_never_coincide() {
        for (r, c) in [(4, 4), (4, 8), (8, 4), (2048, 8192), (3, 5)] {
            let g = GridOptions::rectangular(r, c).exterior_grid().unwrap();
            assert!(g.r1 != g.r2 && g.r1 > 1.0 && g.r2 > 1.0);
            assert!(g.m1 >= 4 * r && g.m2 >= 4 * c);
            let gi = GridOptions::rectangular(r, c).interior_grid().unwrap();
            assert!(gi.r1 < 1.0 && gi.r2 < 1.0 && gi.r1 != gi.r2);
        }
        let sq = GridOptions::square(64).exterior_grid().unwrap();
        assert_eq!((sq.m1, sq.m2), (576, 320));
        assert!((sq.r1 - 1.0625).abs() < 1e-15 && (sq.r2 - 1.125).abs() < 1e-15);
    }

    #[test]
    fn forced_grid_too_small() {
        let o = GridOptions::square(16).with_grid_sizes(32, 64);
        assert!(matches!(o.exterior_grid(), Err(Error::GridTooSmall { m: 32, min: 64 })));
    }

    #[test]
    fn equipotential_scaling_of_diagonal() {
        let c: f64 = 0.5;
        let b = GrunskyMatrix::from_fn(6, 6, |k, l| if k == l { c64::new(c.powi(k as i32), 0.0) } else { c64::new(0.0, 0.0) });
        let s = scale_equipotential(&b, 1.5).unwrap();
        for k in 1..=6 {
            assert!((s.b(k, k).re - (c / 2.25).powi(k as i32)).abs() < 1e-15);
        }
        assert!(scale_equipotential(&b, 1.0).is_err());
        let s2 = scale_equipotential(&s, 2.0).unwrap();
        assert_eq!(s2.equipotential_radius(), Some(3.0));
    }

    #[test]
    fn csv_dump_has_header() {
        let b = GrunskyMatrix::from_fn(2, 2, |k, l| c64::new((k + l) as f64, 0.0));
        let mut out = Vec::new();
        b.write_csv(&mut out).unwrap();
        let s = String::from_utf8(out).unwrap();
        assert!(s.starts_with("# N=2"));
        assert_eq!(s.lines().count(), 6);
        assert_eq!(b.truncated(1, 2).entries().len(), 2);
    }
}
