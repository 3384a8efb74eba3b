//! The JSON pipeline used by the binary: load a spec, check it, verify it
//! and print the consolidated verdict.

use std::path::Path;

use viscodecay::commands::{check, verify, Available};
use viscodecay::config::load_spec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("specs/stable_set.json");
    let spec = load_spec(&path, &["time.t_end=10".into()])?;

    let report = check(&spec)?;
    if let Available::Value(c) = &report.constants {
        println!(
            "E(0) = {:.6}, lambda(0) = {:.6}, lambda2 = {:?}",
            report.initial.e, report.initial.lambda_t, c.lambda2
        );
    }
    println!("decay conditions hold: {}", report.decay_conditions_hold);

    let (_, v) = verify(&spec)?;
    println!("verdict: {:?} (exit code {})", v.verdict, v.exit_code);
    if let Some(env) = v.envelope_verdict {
        println!("largest E/envelope - 1: {:.4}", env.max_violation);
    }
    if let Some(Available::Value(fit)) = v.fit {
        println!("fitted class: {:?}", fit.class);
    }
    Ok(())
}
