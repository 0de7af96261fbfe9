use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use grunsky::experiment::{self, DomainSpec, ExperimentConfig, Precision, Verdict};
use grunsky::grunsky::{dvector_from_grunsky, grunsky_psi_contour, scale_equipotential};
use grunsky::{coulomb, fekete, fredholm, Error, Result};

#[derive(Parser)]
#[command(name = "grunsky", version, about = "Grunsky operators, Coulomb gases and Loewner energies of planar domains")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Arithmetic precision: f64 or dd.
    #[arg(long, global = true, default_value = "f64")]
    precision: Precision,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Domain, e.g. disk, joukowski:0.5, square, polygon:5, triangle:0.5,0.5,1, equipotential:1.1:square.
    #[arg(long, default_value = "square")]
    family: DomainSpec,
    /// Truncation size.
    #[arg(long, default_value_t = 64)]
    n: usize,
    /// Equipotential radius r > 1 applied to the family.
    #[arg(long)]
    r: Option<f64>,
    /// Output file (CSV).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Describe a domain and check that its boundary is simple.
    Domain(Common),
    /// Compute the Grunsky block and report symmetry and norm.
    Grunsky(Common),
    /// Loewner and Fekete-Pommerenke energies from the Fredholm determinant.
    Energy(Common),
    /// Slope of -log det(I - C_n) against log n for a corner domain.
    Corners(Common),
    /// Direct and Grunsky routes to the Coulomb partition function for n = 1..=N.
    Coulomb(Common),
    /// Fekete points on the boundary and the Pommerenke residual.
    Fekete(Common),
    /// Run an experiment preset, a TOML config, or `all`.
    Experiment {
        /// Preset id or `all`.
        id: Option<String>,
        /// TOML config file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Minutes available for `all`.
        #[arg(long, default_value_t = 60.0)]
        budget: f64,
        /// Directory for CSV and SVG output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// List presets and exit.
        #[arg(long)]
        list: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    if cli.precision != Precision::F64 {
        eprintln!("error: precision {} is not supported; all kernels run in f64", cli.precision);
        return ExitCode::from(2);
    }
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn report(verdicts: &[Verdict]) -> bool {
    for v in verdicts {
        println!("{v}");
    }
    verdicts.iter().all(|v| v.pass)
}

fn write_to(path: &Path, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    body(&mut w)?;
    w.flush()?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn family(c: &Common) -> DomainSpec {
    match c.r {
        Some(r) => DomainSpec::Equipotential(r, Box::new(c.family.clone())),
        None => c.family.clone(),
    }
}

fn run(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Domain(c) => domain(&c),
        Command::Grunsky(c) => grunsky_cmd(&c),
        Command::Energy(c) => energy(&c),
        Command::Corners(c) => corners(&c),
        Command::Coulomb(c) => coulomb_cmd(&c),
        Command::Fekete(c) => fekete_cmd(&c),
        Command::Experiment { id, config, budget, out, list } => experiment_cmd(id, config, budget, out, list),
    }
}

fn domain(c: &Common) -> Result<bool> {
    let spec = family(c);
    let map = spec.exterior(c.n.max(1))?;
    println!("family      {spec}");
    println!("capacity    {}", map.capacity());
    println!("truncation  {} (tail bound {:.3e})", map.truncation(), map.tail_bound());
    for (i, k) in map.corners().iter().enumerate() {
        println!("corner {i}    theta={:.6} alpha={:.6} gamma={:.6}", k.theta(), k.alpha(), k.gamma());
    }
    let simple = map.check_simple();
    if let Err(e) = &simple {
        eprintln!("{e}");
    }
    let ok = simple.is_ok();
    if let Some(p) = &c.out {
        write_to(p, |w| {
            writeln!(w, "x,y")?;
            for z in map.boundary_polyline(4 * c.n.max(256)) {
                writeln!(w, "{},{}", z.re, z.im)?;
            }
            Ok(())
        })?;
    }
    Ok(report(&[Verdict::new("domain", format!("{spec}: boundary is simple"), ok as u8 as f64, 1.0, 0.0, "simple", ok)]))
}

fn grunsky_cmd(c: &Common) -> Result<bool> {
    let spec = family(c);
    let b = grunsky_psi_contour(&c.family.exterior(4 * c.n)?, c.n)?;
    let b = match c.r {
        Some(r) => scale_equipotential(&b, r)?,
        None => b,
    };
    let sym = b.symmetry_residual();
    let norm = fredholm::operator_norm(&b, c.n)?;
    println!("accuracy    {:.3e}", b.accuracy());
    if let Some(p) = &c.out {
        write_to(p, |w| b.write_csv(w))?;
    }
    let tol = 1e-10f64.max(10.0 * b.accuracy());
    Ok(report(&[
        Verdict::new("grunsky", format!("{spec}: max |b_kl - b_lk|"), sym, 0.0, tol, "measured <= tol", sym <= tol),
        Verdict::new("grunsky", format!("{spec}: operator norm of B_{}", c.n), norm, 1.0, 0.0, "measured < target", norm < 1.0),
    ]))
}

fn energy(c: &Common) -> Result<bool> {
    let spec = family(c);
    let map = spec.exterior(4 * c.n)?;
    let b = grunsky_psi_contour(&map, c.n)?;
    let d = dvector_from_grunsky(&b, c.n)?;
    let il = fredholm::loewner_energy(&b)?;
    let ip = fredholm::pommerenke_energy(&b, &d, c.n)?;
    println!("I^L = {:.12} (converged: {})", il.value, il.converged);
    println!("I^F = {:.12} (converged: {})", ip.value, ip.converged);
    if let Some(p) = &c.out {
        write_to(p, |w| {
            writeln!(w, "energy,n,partial")?;
            for (n, v) in &il.truncations {
                writeln!(w, "loewner,{n},{v:.16e}")?;
            }
            for (n, v) in &ip.truncations {
                writeln!(w, "pommerenke,{n},{v:.16e}")?;
            }
            Ok(())
        })?;
    }
    Ok(report(&[
        Verdict::new("energy", format!("{spec}: I^L >= 0"), il.value, 0.0, 1e-10, "measured >= -tol", il.value >= -1e-10),
        Verdict::new("energy", format!("{spec}: I^F >= 0"), ip.value, 0.0, 1e-10, "measured >= -tol", ip.value >= -1e-10),
    ]))
}

fn corners(c: &Common) -> Result<bool> {
    let mut cfg = ExperimentConfig::preset("thm13-corner-slope")?;
    cfg.families = vec![family(c)];
    cfg.n_schedule = fredholm::dyadic_upto(c.n).into_iter().filter(|&n| n >= 16).collect();
    cfg.out_dir = c.out.clone();
    let r = experiment::run_experiment(&cfg)?;
    Ok(report(&r.verdicts))
}

fn coulomb_cmd(c: &Common) -> Result<bool> {
    let spec = family(c);
    let ns: Vec<usize> = (1..=c.n.min(coulomb::DIRECT_MAX_N)).collect();
    let rows = match &spec {
        DomainSpec::Interior(_) => coulomb::exterior_identity(&spec.interior()?, &ns)?,
        _ => coulomb::interior_identity(&spec.exterior(c.n * 257)?, &ns)?,
    };
    let mut out = io::stdout().lock();
    coulomb::write_identity_csv(&rows, &mut out)?;
    if let Some(p) = &c.out {
        write_to(p, |w| coulomb::write_identity_csv(&rows, w))?;
    }
    let worst = rows.iter().map(|r| r.abs_diff / r.direct.abs().max(1.0)).fold(0.0, f64::max);
    Ok(report(&[Verdict::new(
        "coulomb",
        format!("{spec}: direct vs Grunsky log Z_n (max relative)"),
        worst,
        0.0,
        1e-6,
        "measured <= tol",
        worst <= 1e-6,
    )]))
}

fn fekete_cmd(c: &Common) -> Result<bool> {
    let spec = family(c);
    let map = spec.exterior(256)?;
    let s = fekete::fekete_optimize(&map, c.n, 8, 1e-10)?;
    println!("log Z_n,inf = {:.12} (gradient norm {:.2e}, {} restarts)", s.value, s.grad_norm, s.restarts);
    if let Some(p) = &c.out {
        write_to(p, |w| {
            writeln!(w, "theta,x,y")?;
            for &t in &s.thetas {
                let z = map.eval(num_complex::Complex64::from_polar(1.0, t));
                writeln!(w, "{t},{},{}", z.re, z.im)?;
            }
            Ok(())
        })?;
    }
    let mut v = vec![Verdict::new("fekete", format!("{spec}: gradient norm at optimum"), s.grad_norm, 0.0, 1e-6, "measured <= tol", s.grad_norm <= 1e-6)];
    if !spec.has_corners() {
        let b = grunsky_psi_contour(&map, 256)?;
        let d = dvector_from_grunsky(&b, 256)?;
        let ip = fredholm::pommerenke_energy(&b, &d, 256)?.value;
        let nf = c.n as f64;
        let residual = s.value - nf * (nf - 1.0) * map.capacity().ln() - nf * nf.ln() - ip / 8.0;
        println!("residual = {residual:.6e}, I^F/8 = {:.6e}", ip / 8.0);
        let band = 0.05 * (ip / 8.0).abs() + 1e-3;
        v.push(Verdict::new(
            "fekete",
            format!("{spec}: |log Z_n,inf - n log n - I^F/8| (n = {})", c.n),
            residual.abs(),
            0.0,
            band,
            "measured <= 0.05 |I^F/8| + 1e-3",
            residual.abs() <= band,
        ));
    }
    Ok(report(&v))
}

fn experiment_cmd(id: Option<String>, config: Option<PathBuf>, budget: f64, out: Option<PathBuf>, list: bool) -> Result<bool> {
    if list {
        for id in experiment::PRESETS {
            let cfg = ExperimentConfig::preset(id)?;
            println!("{id:<30} ~{:.1} min, ~{} MB", cfg.estimated_minutes(), cfg.estimated_memory_mb());
        }
        return Ok(true);
    }
    let mut cfg = match (id.as_deref(), &config) {
        (_, Some(path)) => ExperimentConfig::from_file(path)?,
        (Some("all"), None) => {
            let summary = experiment::reproduce_all(budget, out.as_deref());
            for r in &summary.reports {
                report(&r.verdicts);
            }
            summary.write_table(io::stdout().lock())?;
            return Ok(summary.passed());
        }
        (Some(id), None) => ExperimentConfig::preset(id)?,
        (None, None) => return Err(Error::InvalidParameter("give a preset id, `all`, or --config".into())),
    };
    if out.is_some() {
        cfg.out_dir = out;
    }
    let r = experiment::run_experiment(&cfg)?;
    let ok = report(&r.verdicts);
    for f in &r.files {
        eprintln!("wrote {}", f.display());
    }
    eprintln!("{} finished in {:.1} s", r.id, r.elapsed.as_secs_f64());
    Ok(ok)
}
