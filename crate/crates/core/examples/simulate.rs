//! Simulate a stable-set trajectory and print its energy budget.

use std::f64::consts::PI;

use viscodecay::energy::{energy_identity_residual, max_energy_increase};
use viscodecay::solver::run;
use viscodecay::{DomainSpec, ExponentField, Field, RelaxationKernel, SimConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dom = DomainSpec::interval(1.0, 101)?;
    let n = dom.len();
    let u0 = dom.sample_dirichlet(|x| 0.2475 * (PI * x[0]).sin());
    let kernel = RelaxationKernel::exponential(0.5, 1.0)?;
    let m = ExponentField::constant(2.0, n)?;
    let p = ExponentField::constant(4.0, n)?;
    let cfg = SimConfig::new(1.0, 1.0, 0.004, 10.0);

    let traj = run(&cfg, &kernel, &m, &p, &dom, u0, Field::zeros(n))?;
    println!("outcome: {:?}", traj.outcome);
    println!(
        "{:>6} {:>14} {:>14} {:>14} {:>14}",
        "t", "E", "kinetic", "memory", "dissipation"
    );
    for r in traj.records.iter().step_by(250) {
        println!(
            "{:>6.2} {:>14.6e} {:>14.6e} {:>14.6e} {:>14.6e}",
            r.t, r.e, r.kinetic, r.memory, r.dissipation
        );
    }
    let (inc, t) = max_energy_increase(&traj);
    println!("largest energy increase over one step: {inc:.3e} at t = {t}");
    println!(
        "energy identity residual (max): {:.3e}",
        energy_identity_residual(&traj).max_abs
    );
    Ok(())
}
