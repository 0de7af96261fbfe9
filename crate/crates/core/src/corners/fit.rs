//! Slopes of `y` against `log n` and their CSV/SVG artifacts.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMethod {
    LeastSquares,
    SuccessiveDifferences,
}

/// Line fit `y ~ slope x + intercept`.
///
/// For successive differences the slope is the last `dy/dx` and
/// `stderr_slope` is its change from the previous difference.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AsymptoticFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr_slope: f64,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub method: FitMethod,
    pub ls_slope: f64,
    /// `dy/dx` between neighbouring points.
    pub successive: Vec<f64>,
}

pub fn fit_log_slope(xs: &[f64], ys: &[f64], method: FitMethod) -> Result<AsymptoticFit> {
    if xs.len() != ys.len() {
        return Err(invalid(format!("{} abscissae but {} ordinates", xs.len(), ys.len())));
    }
    if xs.len() < 4 {
        return Err(Error::TooFewPoints { needed: 4, got: xs.len() });
    }
    if xs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("abscissae must be strictly increasing"));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(invalid("non-finite data"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let ls_slope = sxy / sxx;
    let ls_intercept = my - ls_slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - ls_slope * x - ls_intercept).powi(2)).sum();
    let ls_stderr = (rss / (n - 2.0) / sxx).sqrt();
    let successive: Vec<f64> = xs.windows(2).zip(ys.windows(2)).map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0])).collect();

    let (slope, intercept, stderr_slope) = match method {
        FitMethod::LeastSquares => (ls_slope, ls_intercept, ls_stderr),
        FitMethod::SuccessiveDifferences => {
            let s = successive[successive.len() - 1];
            let prev = successive[successive.len() - 2];
            (s, ys[ys.len() - 1] - s * xs[xs.len() - 1], (s - prev).abs())
        }
    };
    Ok(AsymptoticFit {
        slope,
        intercept,
        stderr_slope,
        xs: xs.to_vec(),
        ys: ys.to_vec(),
        method,
        ls_slope,
        successive,
    })
}

impl AsymptoticFit {
    /// Rows `x,y` then `# slope=.. stderr=.. predicted=.. ratio=..`.
    pub fn write_csv<W: Write>(&self, mut w: W, predicted: f64) -> Result<()> {
        writeln!(w, "x,y")?;
        for (x, y) in self.xs.iter().zip(&self.ys) {
            writeln!(w, "{x:.16e},{y:.16e}")?;
        }
        writeln!(
            w,
            "# slope={:.10} stderr={:.3e} predicted={:.10} ratio={:.8}",
            self.slope,
            self.stderr_slope,
            predicted,
            self.slope / predicted
        )?;
        Ok(())
    }

    /// Scatter of the data with the fitted line.
    pub fn write_svg<W: Write>(&self, mut w: W, title: &str) -> Result<()> {
        let (width, height, pad) = (640.0, 420.0, 50.0);
        let (x0, x1) = (self.xs[0], self.xs[self.xs.len() - 1]);
        let line = |x: f64| self.slope * x + self.intercept;
        let mut lo = self.ys.iter().copied().fold(f64::INFINITY, f64::min).min(line(x0)).min(line(x1));
        let mut hi = self.ys.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(line(x0)).max(line(x1));
        if hi - lo < 1e-300 {
            lo -= 1.0;
            hi += 1.0;
        }
        let px = |x: f64| pad + (x - x0) / (x1 - x0) * (width - 2.0 * pad);
        let py = |y: f64| height - pad - (y - lo) / (hi - lo) * (height - 2.0 * pad);
        writeln!(w, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">"#)?;
        writeln!(w, r#"<rect width="100%" height="100%" fill="white"/>"#)?;
        writeln!(w, r#"<text x="{pad}" y="24" font-family="sans-serif" font-size="14">{title} (slope {:.6})</text>"#, self.slope)?;
        writeln!(
            w,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="steelblue" stroke-width="1.5"/>"#,
            px(x0),
            py(line(x0)),
            px(x1),
            py(line(x1))
        )?;
        for (x, y) in self.xs.iter().zip(&self.ys) {
            writeln!(w, r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="firebrick"/>"#, px(*x), py(*y))?;
        }
        writeln!(w, "</svg>")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        for m in [FitMethod::LeastSquares, FitMethod::SuccessiveDifferences] {
            let f = fit_log_slope(&xs, &ys, m).unwrap();
            assert!((f.slope - 2.0).abs() < 1e-14);
            assert!((f.intercept - 1.0).abs() < 1e-13);
            assert!(f.stderr_slope < 1e-12);
        }
    }

    #[test]
    fn rejects_short_or_unsorted() {
        assert!(matches!(fit_log_slope(&[1.0, 2.0, 3.0], &[1.0; 3], FitMethod::LeastSquares), Err(Error::TooFewPoints { .. })));
        assert!(fit_log_slope(&[1.0, 3.0, 2.0, 4.0], &[1.0; 4], FitMethod::LeastSquares).is_err());
    }

    #[test]
    fn successive_differences_beat_least_squares_on_curved_data() {
        let xs: Vec<f64> = (3..12).map(|e| (2f64.powi(e)).ln()).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x / 3.0 + 0.7 + 2.0 / x).collect();
        let ls = fit_log_slope(&xs, &ys, FitMethod::LeastSquares).unwrap();
        let sd = fit_log_slope(&xs, &ys, FitMethod::SuccessiveDifferences).unwrap();
        assert!((sd.slope - 1.0 / 3.0).abs() < (ls.slope - 1.0 / 3.0).abs());
    }

    #[test]
    fn svg_renders() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let f = fit_log_slope(&xs, &[1.0, 2.0, 3.1, 3.9], FitMethod::LeastSquares).unwrap();
        let mut out = Vec::new();
        f.write_svg(&mut out, "test").unwrap();
        let s = String::from_utf8(out).unwrap();
        assert!(s.starts_with("<svg") && s.contains("circle"));
    }
}
