use std::collections::HashMap;
use std::f64::consts::PI;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use super::{DomainSpec, ExperimentConfig, Report, Verdict, PRESETS};
use crate::conformal::{build_disk, build_interior_polynomial, CornerSpec};
use crate::corners::{self, AngleMode, FitMethod};
use crate::coulomb;
use crate::error::{invalid, Error, Result};
use crate::fekete;
use crate::fredholm;
use crate::grunsky::{
    dvector_from_grunsky, grunsky_log_fft, grunsky_psi_contour, grunsky_psi_contour_with, scale_equipotential, GridOptions,
    GrunskyMatrix, LogDerivVector,
};

const DEFAULT_MEMORY_MB: usize = 4096;
/// `e^{-41.5} < 1e-18`: rows and columns past this weight are dropped from equipotential blocks.
const NEGLIGIBLE_LOG: f64 = 41.5;

/// Results shared between presets in one session.
#[derive(Default)]
pub struct Workspace {
    matrices: HashMap<String, Arc<GrunskyMatrix>>,
    dvectors: HashMap<String, Arc<LogDerivVector>>,
    traces: HashMap<String, Arc<Vec<corners::TraceComparison>>>,
}

impl Workspace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Psi-engine Grunsky block of at least `rows x cols` for a corner family.
    pub fn corner_matrix(&mut self, spec: &DomainSpec, rows: usize, cols: usize) -> Result<Arc<GrunskyMatrix>> {
        let key = spec.to_string();
        if let Some(b) = self.matrices.get(&key) {
            if b.rows() >= rows && b.cols() >= cols {
                return Ok(b.clone());
            }
        }
        // a larger replacement supersedes any cached vector and traces
        self.dvectors.remove(&key);
        self.traces.retain(|k, _| !k.starts_with(&format!("{key}|")));
        self.matrices.remove(&key);
        let map = spec.exterior(rows + cols - 1)?;
        let b = Arc::new(grunsky_psi_contour_with(&map, &GridOptions::rectangular(rows, cols).without_self_check())?);
        self.matrices.insert(key, b.clone());
        Ok(b)
    }

    fn dvector(&mut self, spec: &DomainSpec, b: &Arc<GrunskyMatrix>) -> Result<Arc<LogDerivVector>> {
        let key = spec.to_string();
        if let Some(d) = self.dvectors.get(&key) {
            if d.n() >= b.rows() {
                return Ok(d.clone());
            }
        }
        let d = Arc::new(dvector_from_grunsky(b, b.rows())?);
        self.dvectors.insert(key, d.clone());
        Ok(d)
    }

    fn trace_comparisons(
        &mut self,
        spec: &DomainSpec,
        ns: &[usize],
        cols_factor: usize,
    ) -> Result<Arc<Vec<corners::TraceComparison>>> {
        let key = format!("{spec}|{ns:?}|{cols_factor}");
        if let Some(t) = self.traces.get(&key) {
            return Ok(t.clone());
        }
        let big = *ns.last().ok_or(Error::Empty("n schedule"))?;
        let b = self.corner_matrix(spec, big, cols_factor * big)?;
        let t = Arc::new(corners::trace_compare_many(&b, &spec.corners()?, ns, 2)?);
        self.traces.insert(key, t.clone());
        Ok(t)
    }
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    verdicts: Vec<Verdict>,
    files: Vec<PathBuf>,
}

impl Ctx<'_> {
    fn id(&self) -> &str {
        &self.cfg.id
    }

    fn verdict(&mut self, check: impl Into<String>, measured: f64, target: f64, tolerance: f64, rule: &str, pass: bool) {
        let v = Verdict::new(&self.cfg.id, check, measured, target, tolerance, rule, pass);
        self.verdicts.push(v);
    }

    /// `|measured - target| <= tol`.
    fn absolute(&mut self, check: impl Into<String>, measured: f64, target: f64, tol: f64) {
        let pass = (measured - target).abs() <= tol;
        self.verdict(check, measured, target, tol, "|measured - target| <= tol", pass);
    }

    /// `|measured / target - 1| <= tol`.
    fn relative(&mut self, check: impl Into<String>, measured: f64, target: f64, tol: f64) {
        let pass = (measured / target - 1.0).abs() <= tol;
        self.verdict(check, measured, target, tol, "|measured / target - 1| <= tol", pass);
    }

    fn write<F>(&mut self, name: &str, body: F) -> Result<()>
    where
        F: FnOnce(&mut dyn Write) -> Result<()>,
    {
        let Some(dir) = &self.cfg.out_dir else { return Ok(()) };
        fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}-{}", self.cfg.id, name));
        let mut w = BufWriter::new(File::create(&path)?);
        body(&mut w)?;
        w.flush()?;
        self.files.push(path);
        Ok(())
    }

    fn write_fit(&mut self, tag: &str, fit: &corners::AsymptoticFit, predicted: f64) -> Result<()> {
        self.write(&format!("{tag}.csv"), |w| fit.write_csv(w, predicted))?;
        if self.cfg.svg {
            let title = format!("{} {tag}", self.cfg.id);
            self.write(&format!("{tag}.svg"), |w| fit.write_svg(w, &title))?;
        }
        Ok(())
    }
}

fn file_tag(spec: &DomainSpec) -> String {
    spec.to_string().replace([':', ','], "_")
}

/// Runs one preset in a fresh workspace.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    run_experiment_in(&mut Workspace::new(), cfg)
}

/// Runs one preset, reusing matrices already held by `ws`.
pub fn run_experiment_in(ws: &mut Workspace, cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let budget = cfg.memory_budget_mb.unwrap_or(DEFAULT_MEMORY_MB);
    let needed = cfg.estimated_memory_mb();
    if needed > budget {
        return Err(Error::MemoryBudget { needed_mb: needed, budget_mb: budget });
    }
    let start = Instant::now();
    let mut ctx = Ctx {
        cfg,
        verdicts: Vec::new(),
        files: Vec::new(),
    };
    match cfg.id.as_str() {
        "lemma44-integral" => lemma44(&mut ctx)?,
        "thm12-wp-limit" => thm12(&mut ctx)?,
        "prop11-partition-identity" => prop11(&mut ctx)?,
        "prop31-exterior-identity" => prop31(&mut ctx)?,
        "thm15-fekete" => thm15(&mut ctx)?,
        "thm17-grunsky-asymptotics" => thm17(ws, &mut ctx)?,
        "prop41-trace-compare" => prop41(ws, &mut ctx)?,
        "prop42-trace-constant" => prop42(ws, &mut ctx)?,
        "thm13-corner-slope" => thm13(ws, &mut ctx)?,
        "thm14-equipotential-loewner" => equipotential_slopes(ws, &mut ctx, false)?,
        "thm16-pommerenke-slope" => equipotential_slopes(ws, &mut ctx, true)?,
        other => return Err(Error::UnknownExperiment(other.to_string())),
    }
    Ok(Report {
        id: cfg.id.clone(),
        verdicts: ctx.verdicts,
        files: ctx.files,
        elapsed: start.elapsed(),
    })
}

fn lemma44(ctx: &mut Ctx) -> Result<()> {
    let tol = ctx.cfg.tolerance();
    let mut rows = Vec::new();
    for j in 1..=9 {
        let beta = j as f64 / 10.0;
        let (closed, quad) = corners::finalintegral(beta)?;
        rows.push((beta, closed, quad));
    }
    let worst = rows.iter().map(|r| (r.1 - r.2).abs()).fold(0.0, f64::max);
    ctx.absolute("closed form vs quadrature, beta = 0.1..0.9 (max deviation)", worst, 0.0, tol);
    ctx.write("integral.csv", |w| {
        writeln!(w, "beta,closed,quadrature,abs_diff")?;
        for (b, c, q) in &rows {
            writeln!(w, "{b},{c:.17e},{q:.17e},{:.3e}", (c - q).abs())?;
        }
        Ok(())
    })?;
    for spec in [DomainSpec::Polygon(3), DomainSpec::square(), DomainSpec::mixed()] {
        let c = spec.corners()?;
        let closed = corners::corner_sum(&c, AngleMode::Interior) / 6.0;
        let quad = corners::corner_anomaly_by_quadrature(&c)?;
        ctx.absolute(format!("{spec}: corner sum / 6 vs integral closure"), quad, closed, 1e-8);
    }
    let sq = DomainSpec::square().corners()?;
    let series = corners::trace_constant_series(&sq, 40)?;
    ctx.absolute("square: sum_i c_i / i (40 terms) vs corner sum / 6", series, 1.0 / 3.0, 1e-8);
    Ok(())
}

fn thm12(ctx: &mut Ctx) -> Result<()> {
    let tol = ctx.cfg.tolerance();
    let n = ctx.cfg.max_n().max(1);
    for spec in ctx.cfg.families.clone() {
        let DomainSpec::Joukowski(c) = spec else {
            return Err(invalid("thm12-wp-limit compares against the ellipse closed form; use joukowski:C"));
        };
        let map = spec.exterior(n)?;
        let mut last = None;
        for b in [grunsky_log_fft(&map, n)?, grunsky_psi_contour(&map, n)?] {
            let mut worst = 0.0f64;
            for k in 1..=n {
                for l in 1..=n {
                    let want = if k == l { c.powi(k as i32) } else { 0.0 };
                    worst = worst.max((b.b(k, l) - want).norm());
                }
            }
            ctx.absolute(format!("{spec}: max |b_kl - c^k delta_kl| ({} engine, N = {n})", b.engine()), worst, 0.0, tol);
            last = Some(b);
        }
        let b = last.expect("two engines ran");
        let energy = fredholm::loewner_energy(&b)?;
        let oracle: f64 = -12.0 * (1..=n).map(|k| (1.0 - c.powi(2 * k as i32)).ln()).sum::<f64>();
        ctx.absolute(format!("{spec}: Loewner energy vs -12 sum log(1 - c^2k)"), energy.value, oracle, tol);
        ctx.write(&format!("{}-energy.csv", file_tag(&spec)), |w| energy.write_csv(w))?;
    }
    Ok(())
}

fn prop11(ctx: &mut Ctx) -> Result<()> {
    let tol = ctx.cfg.tolerance();
    let ns = ctx.cfg.n_schedule.clone();
    let big = ctx.cfg.max_n();
    for spec in ctx.cfg.families.clone() {
        let map = spec.exterior(big * (1 + ctx.cfg.columns_factor()) - 1)?;
        let rows = coulomb::interior_identity(&map, &ns)?;
        let worst = rows.iter().map(|r| r.abs_diff / r.direct.abs().max(1.0)).fold(0.0, f64::max);
        ctx.absolute(format!("{spec}: direct vs Grunsky log Z_n, n <= {big} (max relative)"), worst, 0.0, tol);
        ctx.write(&format!("{}.csv", file_tag(&spec)), |w| coulomb::write_identity_csv(&rows, w))?;
    }
    Ok(())
}

fn prop31(ctx: &mut Ctx) -> Result<()> {
    let tol = ctx.cfg.tolerance();
    let ns = ctx.cfg.n_schedule.clone();
    for spec in ctx.cfg.families.clone() {
        let f = spec.interior()?;
        let rows = coulomb::exterior_identity(&f, &ns)?;
        let worst = rows.iter().map(|r| r.abs_diff).fold(0.0, f64::max);
        ctx.absolute(format!("{spec}: direct vs Grunsky log Z*_n, n <= {}", ctx.cfg.max_n()), worst, 0.0, tol);
        ctx.write(&format!("{}.csv", file_tag(&spec)), |w| coulomb::write_identity_csv(&rows, w))?;
    }
    // exterior of the unit disk: Z*_n = pi^n / n! = Z_n of its inversion
    let id = build_interior_polynomial(&[num_complex::Complex64::new(1.0, 0.0)])?;
    let mut worst = 0.0f64;
    for n in 1..=ctx.cfg.max_n().min(coulomb::DIRECT_MAX_N) {
        let ext = coulomb::log_z_exterior(&id, n, coulomb::Route::Direct)?;
        let inv = coulomb::log_z_interior(&build_disk(), n, coulomb::Route::Direct)?;
        worst = worst.max((ext - coulomb::log_z_disk(n)).abs()).max((ext - inv).abs());
    }
    ctx.absolute("identity map: log Z*_n = log(pi^n / n!) = log Z_n(inverted domain)", worst, 0.0, tol);
    Ok(())
}

fn thm15(ctx: &mut Ctx) -> Result<()> {
    let band = ctx.cfg.tolerance();
    let disk = build_disk();
    let mut worst = 0.0f64;
    let mut circle = Vec::new();
    for n in [2usize, 4, 8, 16, 32] {
        let s = fekete::fekete_optimize(&disk, n, 8, 1e-10)?;
        let nf = n as f64;
        worst = worst.max((s.value - nf * nf.ln()).abs());
        circle.push(s);
    }
    ctx.absolute("circle: |log Z_n,inf - n log n| (residual), n <= 32", worst, 0.0, 1e-9);
    let td = fekete::transfinite_diameter_estimate(&circle)?;
    ctx.verdict("circle: n^(1/(n-1)) estimates decrease", td.decreasing as u8 as f64, 1.0, 0.0, "decreasing", td.decreasing);

    let ns = ctx.cfg.n_schedule.clone();
    for spec in ctx.cfg.families.clone() {
        let map = spec.exterior(256)?;
        let nb = 256;
        let b = grunsky_psi_contour(&map, nb)?;
        let d = dvector_from_grunsky(&b, nb)?;
        let check = fekete::verify_pommerenke(&map, &b, &d, &ns)?;
        let first = check.rows.first().expect("n list").residual.abs();
        let last = check.rows.last().expect("n list").residual.abs();
        let (n0, n1) = (ns[0], ns[ns.len() - 1]);
        ctx.verdict(
            format!("{spec}: |residual({n1})| < |residual({n0})|"),
            last,
            first,
            0.0,
            "measured < target",
            last < first,
        );
        let bound = band * (check.energy / 8.0).abs() + 1e-3;
        ctx.verdict(
            format!("{spec}: |residual({n1})| within band of I^F/8"),
            last,
            bound,
            band,
            "measured < tol |I^F/8| + 1e-3",
            last < bound,
        );
        ctx.write(&format!("{}.csv", file_tag(&spec)), |w| check.write_csv(w))?;
        let sols = ns
            .iter()
            .zip(&check.rows)
            .map(|(&n, r)| fekete::FeketeSolution {
                n,
                thetas: Vec::new(),
                value: r.value,
                grad_norm: r.grad_norm,
                restarts: r.restarts,
            })
            .collect::<Vec<_>>();
        if sols.len() >= 3 {
            let td = fekete::transfinite_diameter_estimate(&sols)?;
            ctx.verdict(
                format!("{spec}: transfinite diameter estimates decrease"),
                td.estimates.last().map_or(f64::NAN, |e| e.1),
                map.capacity(),
                0.0,
                "decreasing",
                td.decreasing,
            );
        }
    }
    Ok(())
}

fn corner_spec(ctx: &Ctx) -> Result<DomainSpec> {
    let spec = ctx.cfg.families.first().cloned().ok_or(Error::Empty("family list"))?;
    if !spec.has_corners() {
        return Err(invalid(format!("{} needs a domain with corners, got {spec}", ctx.id())));
    }
    Ok(spec)
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    if s.len() % 2 == 1 {
        s[m]
    } else {
        0.5 * (s[m - 1] + s[m])
    }
}

fn thm17(ws: &mut Workspace, ctx: &mut Ctx) -> Result<()> {
    let spec = corner_spec(ctx)?;
    let c = spec.corners()?;
    let rho = crate::conformal::rho(&c);
    let ks = ctx.cfg.n_schedule.clone();
    let big = ctx.cfg.max_n();
    let b = ws.corner_matrix(&spec, big, ctx.cfg.columns_factor() * big)?;
    let diag: Vec<(usize, usize)> = ks.iter().map(|&k| (k, k)).collect();
    let report = corners::residual_bkl_as(&b, &c, &diag)?;
    let scaled: Vec<f64> = report
        .entries
        .iter()
        .map(|e| (e.k as f64).powf(1.0 + rho) * e.residual.norm())
        .collect();
    let med = median(&scaled);
    let last = *scaled.last().expect("k list");
    ctx.verdict(
        format!("{spec}: k^(1+rho) |b_kk - K(k,k)|, last vs median over k = {:?}", ks),
        last,
        med,
        ctx.cfg.tolerance(),
        "measured <= tol * target",
        last <= ctx.cfg.tolerance() * med,
    );
    let grid: Vec<(usize, usize)> = ks.iter().flat_map(|&k| ks.iter().map(move |&l| (k, l))).collect();
    let off = corners::residual_bkl_as(&b, &c, &grid)?;
    let sup_f = corners::f_rho_ratio(&b, rho, &grid);
    ctx.verdict(format!("{spec}: sup |b_kl| / f_rho(k,l) finite"), sup_f, f64::INFINITY, 0.0, "finite", sup_f.is_finite());
    ctx.write(&format!("{}-diagonal.csv", file_tag(&spec)), |w| report.write_csv(w))?;
    ctx.write(&format!("{}-grid.csv", file_tag(&spec)), |w| off.write_csv(w))?;
    Ok(())
}

/// `max_n |value(n)| <= tol * |value(first n)|`.
fn bounded(ctx: &mut Ctx, check: String, values: &[f64]) {
    let first = values[0].abs();
    let worst = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let tol = ctx.cfg.tolerance();
    ctx.verdict(check, worst, first, tol, "max over n <= tol * value at first n", worst <= tol * first);
}

fn prop41(ws: &mut Workspace, ctx: &mut Ctx) -> Result<()> {
    let spec = corner_spec(ctx)?;
    let ns = ctx.cfg.n_schedule.clone();
    let traces = ws.trace_comparisons(&spec, &ns, ctx.cfg.columns_factor())?;
    for i in 1..=2 {
        let diffs: Vec<f64> = traces.iter().map(|t| t.rows[i - 1].difference).collect();
        bounded(ctx, format!("{spec}: |tr C_n^{i} - sum_p tr(P_n K_p^2 P_n)^{i}| bounded over n = {ns:?}"), &diffs);
    }
    ctx.write(&format!("{}.csv", file_tag(&spec)), |w| {
        for (j, t) in traces.iter().enumerate() {
            let mut buf = Vec::new();
            t.write_csv(&mut buf)?;
            let text = String::from_utf8_lossy(&buf);
            // keep one header
            for line in text.lines().skip(if j == 0 { 0 } else { 1 }) {
                writeln!(w, "{line}")?;
            }
        }
        Ok(())
    })?;
    Ok(())
}

fn prop42(ws: &mut Workspace, ctx: &mut Ctx) -> Result<()> {
    // closed-form transform against quadrature
    let mut worst = 0.0f64;
    let mut count = 0;
    for gamma in [0.3, 0.7, 1.2, 1.5, 1.8] {
        for xi in [0.0, 0.5, 1.0, 2.5] {
            let diff = (corners::hp_hat(xi, gamma)? - corners::hp_hat_numeric(xi, gamma)?).abs();
            worst = worst.max(diff);
            count += 1;
        }
    }
    ctx.absolute(format!("H_p^ closed form vs numeric transform ({count} samples)"), worst, 0.0, 1e-8);
    let one = corners::trace_constant_single(1, 1.5)?;
    ctx.absolute("gamma = 3/2: (1/2pi) int H_p^2 = 3/(4 pi^2)", one, 3.0 / (4.0 * PI * PI), 1e-10);

    let spec = corner_spec(ctx)?;
    let ns = ctx.cfg.n_schedule.clone();
    let traces = ws.trace_comparisons(&spec, &ns, ctx.cfg.columns_factor())?;
    for i in 1..=2 {
        let ex: Vec<f64> = traces.iter().map(|t| t.rows[i - 1].kernel_minus_predicted).collect();
        bounded(ctx, format!("{spec}: sum_p tr(P_n K_p^2 P_n)^{i} - c_{i} H_n bounded over n = {ns:?}"), &ex);
    }
    ctx.write(&format!("{}.csv", file_tag(&spec)), |w| {
        writeln!(w, "n,i,tr_kernel,constant,harmonic,kernel_minus_predicted")?;
        for t in traces.iter() {
            for r in &t.rows {
                writeln!(w, "{},{},{:.16e},{:.16e},{:.16e},{:.16e}", t.n, r.i, r.kernel, r.constant, corners::harmonic(t.n), r.kernel_minus_predicted)?;
            }
        }
        Ok(())
    })?;
    Ok(())
}

fn log_abscissae(ns: &[usize]) -> Vec<f64> {
    ns.iter().map(|&n| (n as f64).ln()).collect()
}

fn thm13(ws: &mut Workspace, ctx: &mut Ctx) -> Result<()> {
    let ns = ctx.cfg.n_schedule.clone();
    let big = ctx.cfg.max_n();
    let tol = ctx.cfg.tolerance();
    for spec in ctx.cfg.families.clone() {
        if !spec.has_corners() {
            return Err(invalid(format!("thm13-corner-slope needs corner domains, got {spec}")));
        }
        let c = spec.corners()?;
        let b = ws.corner_matrix(&spec, big, ctx.cfg.columns_factor() * big)?;
        let profile = fredholm::logdet_profile(&b, big)?;
        let ys: Vec<f64> = ns.iter().map(|&n| -profile[n - 1]).collect();
        let fit = corners::fit_log_slope(&log_abscissae(&ns), &ys, FitMethod::SuccessiveDifferences)?;
        let target = corners::corner_sum(&c, AngleMode::Interior) / 6.0;
        ctx.relative(format!("{spec}: slope of -log det(I - C_n) vs log n (successive differences)"), fit.slope, target, tol);
        ctx.write_fit(&file_tag(&spec), &fit, target)?;
    }
    Ok(())
}

/// Rows (and columns) of an equipotential block that carry weight above `e^{-41.5}`.
fn effective_size(r: f64, cap: usize) -> usize {
    ((NEGLIGIBLE_LOG / r.ln()).ceil() as usize).clamp(1, cap)
}

fn equipotential_slopes(ws: &mut Workspace, ctx: &mut Ctx, pommerenke: bool) -> Result<()> {
    let spec = corner_spec(ctx)?;
    let c: Vec<CornerSpec> = spec.corners()?;
    let rows = ctx.cfg.max_n();
    let b = ws.corner_matrix(&spec, rows, ctx.cfg.columns_factor() * rows)?;
    let d = if pommerenke { Some(ws.dvector(&spec, &b)?) } else { None };
    let qs = ctx.cfg.inverse_offsets.clone();
    let mut ys = Vec::with_capacity(qs.len());
    let mut partial_gap = Vec::with_capacity(qs.len());
    for &q in &qs {
        let r = 1.0 + 1.0 / q;
        let nr = effective_size(r, b.rows());
        let nc = effective_size(r, b.cols()).max(nr);
        let br = scale_equipotential(&b.truncated(nr, nc), r)?;
        let value = match &d {
            None => {
                let profile = fredholm::logdet_profile(&br, nr)?;
                partial_gap.push(-12.0 * (profile[nr - 1] - profile[nr / 2 - 1].min(0.0)).abs().max(0.0));
                -12.0 * profile[nr - 1]
            }
            Some(d) => {
                let dr = d.truncated(nr).equipotential(r)?;
                let full = fredholm::pommerenke_value(&br, &dr, nr)?;
                let half = fredholm::pommerenke_value(&br, &dr, (nr / 2).max(1))?;
                partial_gap.push((full - half).abs());
                full
            }
        };
        ys.push(value);
    }
    let xs: Vec<f64> = qs.iter().map(|q| q.ln()).collect();
    let fit = corners::fit_log_slope(&xs, &ys, FitMethod::SuccessiveDifferences)?;
    let (mode, label) = if pommerenke {
        (AngleMode::Exterior, "I^F")
    } else {
        (AngleMode::Interior, "I^L")
    };
    let target = 2.0 * corners::corner_sum(&c, mode);
    ctx.relative(format!("{spec}: slope of {label}(eta_r) vs log 1/(r-1) (successive differences)"), fit.slope, target, ctx.cfg.tolerance());
    let tag = format!("{}-{}", file_tag(&spec), if pommerenke { "pommerenke" } else { "loewner" });
    ctx.write_fit(&tag, &fit, target)?;
    ctx.write(&format!("{tag}-truncation.csv"), |w| {
        writeln!(w, "inverse_offset,value,change_from_half_truncation")?;
        for ((q, y), g) in qs.iter().zip(&ys).zip(&partial_gap) {
            writeln!(w, "{q},{y:.16e},{g:.3e}")?;
        }
        Ok(())
    })?;
    Ok(())
}

/// Outcome of [`reproduce_all`].
#[derive(Debug, Clone)]
pub struct Summary {
    pub reports: Vec<Report>,
    /// Presets left out by the time budget, with their estimated minutes.
    pub skipped: Vec<(String, f64)>,
    /// Presets that failed to run.
    pub errors: Vec<(String, String)>,
}

impl Summary {
    pub fn passed(&self) -> bool {
        self.errors.is_empty() && self.reports.iter().all(Report::passed)
    }

    pub fn write_table<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{:<30} {:>8} {:>10}", "preset", "verdict", "seconds")?;
        for r in &self.reports {
            let verdict = if r.passed() { "pass" } else { "FAIL" };
            writeln!(w, "{:<30} {:>8} {:>10.1}", r.id, verdict, r.elapsed.as_secs_f64())?;
        }
        for (id, e) in &self.errors {
            writeln!(w, "{id:<30} {:>8} {e}", "error")?;
        }
        for (id, m) in &self.skipped {
            writeln!(w, "{id:<30} {:>8} (~{m:.1} min over budget)", "skipped")?;
        }
        Ok(())
    }
}

/// Runs every preset whose estimated cost fits in `budget_minutes`, cheapest first.
pub fn reproduce_all(budget_minutes: f64, out_dir: Option<&Path>) -> Summary {
    let mut ws = Workspace::new();
    let mut spent = 0.0;
    let mut summary = Summary {
        reports: Vec::new(),
        skipped: Vec::new(),
        errors: Vec::new(),
    };
    for id in PRESETS {
        let mut cfg = ExperimentConfig::preset(id).expect("preset ids are known");
        cfg.out_dir = out_dir.map(Path::to_path_buf);
        let cost = cfg.estimated_minutes();
        if spent + cost > budget_minutes {
            summary.skipped.push((id.to_string(), cost));
            continue;
        }
        spent += cost;
        match run_experiment_in(&mut ws, &cfg) {
            Ok(r) => summary.reports.push(r),
            Err(e) => summary.errors.push((id.to_string(), e.to_string())),
        }
    }
    summary
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemma_preset_passes() {
        let r = run_experiment(&ExperimentConfig::preset("lemma44-integral").unwrap()).unwrap();
        assert!(r.passed(), "{:#?}", r.verdicts);
    }

    #[test]
    fn small_corner_slope_runs() {
        let mut cfg = ExperimentConfig::preset("thm13-corner-slope").unwrap();
        cfg.families = vec![DomainSpec::square()];
        cfg.n_schedule = vec![16, 32, 64, 128];
        let r = run_experiment(&cfg).unwrap();
        assert_eq!(r.verdicts.len(), 1);
        assert!(r.verdicts[0].measured > 0.2 && r.verdicts[0].measured < 0.4);
    }

    #[test]
    fn memory_budget_is_enforced() {
        let mut cfg = ExperimentConfig::preset("thm13-corner-slope").unwrap();
        cfg.memory_budget_mb = Some(10);
        assert!(matches!(run_experiment(&cfg), Err(Error::MemoryBudget { .. })));
    }

    #[test]
    fn tiny_budget_runs_only_cheap_presets() {
        let s = reproduce_all(0.05, None);
        assert!(s.reports.iter().all(|r| r.id == "lemma44-integral" || r.id == "thm12-wp-limit" || r.id.starts_with("prop")));
        assert!(s.skipped.iter().any(|(id, _)| id == "thm13-corner-slope"));
    }
}
