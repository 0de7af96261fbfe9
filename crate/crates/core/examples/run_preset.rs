//! Runs an experiment preset by id and prints its verdicts.
//!
//! `cargo run --example run_preset -- thm13-corner-slope /tmp/out`

use grunsky::experiment::{run_experiment, ExperimentConfig, PRESETS};

fn main() -> grunsky::Result<()> {
    let mut args = std::env::args().skip(1);
    let id = args.next().unwrap_or_else(|| "lemma44-integral".into());
    if id == "list" {
        PRESETS.iter().for_each(|p| println!("{p}"));
        return Ok(());
    }
    let mut cfg = ExperimentConfig::preset(&id)?;
    cfg.out_dir = args.next().map(Into::into);
    print!("{}", cfg.to_toml_string()?);
    let report = run_experiment(&cfg)?;
    for v in &report.verdicts {
        println!("{v}");
    }
    println!("{} in {:.1} s", if report.passed() { "passed" } else { "failed" }, report.elapsed.as_secs_f64());
    Ok(())
}
