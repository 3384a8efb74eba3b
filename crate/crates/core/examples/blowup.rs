//! Initial data above the potential well: the blow-up conditions hold and
//! the run stops at a finite time.

use std::f64::consts::PI;

use viscodecay::analysis::{check_blowup_conditions, StableSetConstants};
use viscodecay::domain::embedding_constant;
use viscodecay::solver::run;
use viscodecay::{DomainSpec, ExponentField, Field, RelaxationKernel, SimConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dom = DomainSpec::interval(1.0, 101)?;
    let n = dom.len();
    let kernel = RelaxationKernel::exponential(0.5, 1.0)?;
    let m = ExponentField::constant(2.0, n)?;
    let p = ExponentField::constant(4.0, n)?;
    let cfg = SimConfig::new(1.0, 1.0, 0.002, 5.0);
    for amp in [0.2475, 6.0] {
        let u0 = dom.sample_dirichlet(|x| amp * (PI * x[0]).sin());
        let traj = run(&cfg, &kernel, &m, &p, &dom, u0, Field::zeros(n))?;
        let first = traj.records[0];
        let c = StableSetConstants::new(embedding_constant(&dom, &p)?, kernel.l().unwrap(), 1.0, 4.0, 4.0)?
            .with_initial_data(first.e, first.lambda_t);
        let report = check_blowup_conditions(&c, &kernel, 2.0);
        println!(
            "amplitude {amp}: E(0) = {:.6}, lambda(0) = {:.6}",
            first.e, first.lambda_t
        );
        for cond in &report.conditions {
            println!("  [{}] {}", if cond.ok { "ok" } else { "--" }, cond.name);
        }
        println!("  outcome: {:?}", traj.outcome);
    }
    Ok(())
}
