//! Runs every acceptance criterion at its stated tolerance and prints one
//! pass/fail line per criterion. Exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use grunsky::corners::{hp_hat, hp_hat_numeric};
use grunsky::coulomb::moments_interior;
use grunsky::experiment::{run_experiment_in, DomainSpec, ExperimentConfig, Report, Verdict, Workspace};
use grunsky::fekete::objective_and_gradient;
use grunsky::fredholm::{logdet_profile, operator_norm};
use grunsky::grunsky::grunsky_psi_contour;

struct Line {
    number: usize,
    title: &'static str,
    verdicts: Vec<Verdict>,
    elapsed: Duration,
    limit: Option<Duration>,
}

impl Line {
    fn pass(&self) -> bool {
        !self.verdicts.is_empty() && self.verdicts.iter().all(|v| v.pass) && self.limit.is_none_or(|l| self.elapsed <= l)
    }
}

fn preset(ws: &mut Workspace, id: &str) -> Report {
    let cfg = ExperimentConfig::preset(id).expect("known preset");
    match run_experiment_in(ws, &cfg) {
        Ok(r) => r,
        Err(e) => Report {
            id: id.to_string(),
            verdicts: vec![Verdict::new(id, format!("run failed: {e}"), f64::NAN, 0.0, 0.0, "runs", false)],
            files: Vec::new(),
            elapsed: Duration::ZERO,
        },
    }
}

fn from_preset(number: usize, title: &'static str, r: &Report, limit: Option<Duration>, keep: impl Fn(&Verdict) -> bool) -> Line {
    Line {
        number,
        title,
        verdicts: r.verdicts.iter().filter(|v| keep(v)).cloned().collect(),
        elapsed: r.elapsed,
        limit,
    }
}

fn transform_check() -> Line {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for gamma in [0.25, 0.6, 0.9, 1.3, 1.75] {
        for xi in [0.0, 0.3, 1.0, 3.0] {
            let d = match (hp_hat(xi, gamma), hp_hat_numeric(xi, gamma)) {
                (Ok(a), Ok(b)) => (a - b).abs(),
                _ => f64::NAN,
            };
            worst = worst.max(d);
        }
    }
    Line {
        number: 10,
        title: "H_p transform: closed form vs numeric, 20 samples, 1e-8",
        verdicts: vec![Verdict::new("acceptance", "max deviation", worst, 0.0, 1e-8, "measured <= tol", worst <= 1e-8)],
        elapsed: start.elapsed(),
        limit: Some(Duration::from_secs(1)),
    }
}

fn structural_suite() -> Line {
    let start = Instant::now();
    let families = ["disk", "joukowski:0.5", "joukowski:0.9", "polygon:3", "square", "polygon:6", "triangle", "equipotential:1.1:square"];
    let n = 64;
    let mut verdicts = Vec::new();
    for name in families {
        let spec: DomainSpec = name.parse().expect("family parses");
        let mut v = |check: &str, measured: f64, tol: f64, rule: &str, pass: bool| {
            verdicts.push(Verdict::new("structural", format!("{spec}: {check}"), measured, 0.0, tol, rule, pass));
        };
        let map = match spec.exterior(16 * n) {
            Ok(m) => m,
            Err(e) => {
                v(&format!("build failed: {e}"), f64::NAN, 0.0, "builds", false);
                continue;
            }
        };
        let b = grunsky_psi_contour(&map, n).expect("Grunsky block");
        let sym = b.symmetry_residual();
        v("symmetry max |b_kl - b_lk|", sym, 1e-10, "measured <= tol", sym <= 1e-10);
        let norm = operator_norm(&b, n).expect("norm");
        v("operator norm", norm, 1.0, "measured < 1", norm < 1.0);
        let profile = logdet_profile(&b, n).expect("profile");
        let rise = profile.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
        v("log det(I - C_n) non-increasing (max step)", rise, 1e-12, "measured <= tol", rise <= 1e-12);
        let m = moments_interior(&map, 8).expect("moments");
        let herm = m.hermitian_residual();
        v("moment matrix Hermitian", herm, 1e-10, "measured <= tol", herm <= 1e-10);
        let pd = m.log_det();
        v("moment matrix positive definite (Cholesky)", pd.as_ref().map_or(f64::NAN, |x| *x), 0.0, "factorizes", pd.is_ok());
        if !spec.has_corners() {
            let thetas: Vec<f64> = (0..9).map(|j| 0.7 * j as f64 + 0.05 * (j * j) as f64).collect();
            let (_, g) = objective_and_gradient(&map, &thetas);
            let h = 1e-6;
            let mut worst = 0.0f64;
            for j in 0..thetas.len() {
                let mut p = thetas.clone();
                let mut q = thetas.clone();
                p[j] += h;
                q[j] -= h;
                let fd = (objective_and_gradient(&map, &p).0 - objective_and_gradient(&map, &q).0) / (2.0 * h);
                worst = worst.max((fd - g[j]).abs() / g[j].abs().max(1.0));
            }
            v("Fekete gradient vs central differences", worst, 1e-6, "measured <= tol", worst <= 1e-6);
        }
    }
    Line {
        number: 12,
        title: "structural invariants on every family",
        verdicts,
        elapsed: start.elapsed(),
        limit: None,
    }
}

fn main() -> ExitCode {
    let mut ws = Workspace::new();
    let sec = Duration::from_secs;
    let all = |_: &Verdict| true;
    let mut lines = Vec::new();

    let r = preset(&mut ws, "thm12-wp-limit");
    lines.push(from_preset(1, "ellipse closed form at N = 64, both engines, 1e-8", &r, Some(sec(1)), all));
    let r = preset(&mut ws, "prop11-partition-identity");
    lines.push(from_preset(2, "partition identity, disk / joukowski 0.5 / square, n <= 16, 1e-6 rel", &r, None, all));
    let r = preset(&mut ws, "prop31-exterior-identity");
    lines.push(from_preset(3, "exterior identity, z + 0.2 z^2, n <= 12, 1e-6", &r, None, all));
    let r = preset(&mut ws, "prop42-trace-constant");
    let p42 = r.clone();
    let r = preset(&mut ws, "thm13-corner-slope");
    lines.push(from_preset(4, "corner slope over n in [128, 2048], 15%", &r, None, all));
    let r = preset(&mut ws, "thm14-equipotential-loewner");
    lines.push(from_preset(5, "equipotential Loewner slope, square, target 4, 15%", &r, None, all));
    let r = preset(&mut ws, "thm16-pommerenke-slope");
    lines.push(from_preset(6, "equipotential Pommerenke slope, square, target 4/3, 20%", &r, None, all));
    let r = preset(&mut ws, "thm17-grunsky-asymptotics");
    lines.push(from_preset(7, "square k^(1+rho)|b_kk - K(k,k)|: last <= 2 x median", &r, Some(sec(60)), all));
    let r = preset(&mut ws, "prop41-trace-compare");
    let mut line = from_preset(8, "trace comparisons, i = 1, 2: max <= 3 x value at n = 128", &r, None, all);
    line.verdicts.extend(p42.verdicts.iter().filter(|v| v.check.contains("bounded over n")).cloned());
    line.elapsed += p42.elapsed;
    lines.push(line);
    let r = preset(&mut ws, "lemma44-integral");
    lines.push(from_preset(9, "closed-form integral, beta = 0.1..0.9, 1e-10", &r, Some(sec(1)), |v| v.check.starts_with("closed form")));
    lines.push(transform_check());
    let r = preset(&mut ws, "thm15-fekete");
    lines.push(from_preset(11, "Fekete: circle exact, joukowski 0.3 residual trend and band", &r, Some(sec(60)), all));
    lines.push(structural_suite());
    lines.sort_by_key(|l| l.number);

    for l in &lines {
        for v in l.verdicts.iter().filter(|v| !v.pass) {
            eprintln!("    {v}");
        }
    }
    let mut ok = true;
    for l in &lines {
        let over = l.limit.is_some_and(|lim| l.elapsed > lim);
        println!(
            "criterion {:>2}: {} {} ({} checks, {:.1} s{})",
            l.number,
            if l.pass() { "PASS" } else { "FAIL" },
            l.title,
            l.verdicts.len(),
            l.elapsed.as_secs_f64(),
            if over { ", over time limit" } else { "" }
        );
        ok &= l.pass();
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
