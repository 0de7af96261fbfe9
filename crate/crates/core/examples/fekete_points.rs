//! Fekete points on an analytic boundary and the Pommerenke expansion.

use grunsky::conformal::build_joukowski;
use grunsky::fekete::{fekete_optimize, verify_pommerenke};
use grunsky::grunsky::{dvector_from_grunsky, grunsky_psi_contour};

fn main() -> grunsky::Result<()> {
    let map = build_joukowski(0.3)?;
    let s = fekete_optimize(&map, 12, 4, 1e-10)?;
    println!("n = 12: log Z = {:.10}, gradient {:.1e}", s.value, s.grad_norm);
    for t in &s.thetas {
        println!("  theta {t:.6}");
    }
    let b = grunsky_psi_contour(&map, 128)?;
    let d = dvector_from_grunsky(&b, 128)?;
    let check = verify_pommerenke(&map, &b, &d, &[8, 16, 24])?;
    check.write_csv(std::io::stdout().lock())?;
    Ok(())
}
