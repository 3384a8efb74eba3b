//! First-order convergence of the discrete energy identity: the residual
//! `ΔE/Δt − mean(D)` halves with the time step.

use std::f64::consts::PI;

use viscodecay::energy::energy_identity_residual;
use viscodecay::solver::run;
use viscodecay::{DomainSpec, ExponentField, Field, RelaxationKernel, SimConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dom = DomainSpec::interval(1.0, 101)?;
    let n = dom.len();
    let kernel = RelaxationKernel::exponential(0.5, 1.0)?;
    let m = ExponentField::constant(2.0, n)?;
    let p = ExponentField::constant(4.0, n)?;
    let mut prev: Option<f64> = None;
    for dt in [0.004, 0.002, 0.001, 0.0005] {
        let cfg = SimConfig::new(1.0, 1.0, dt, 5.0);
        let u0 = dom.sample_dirichlet(|x| 0.2475 * (PI * x[0]).sin());
        let traj = run(&cfg, &kernel, &m, &p, &dom, u0, Field::zeros(n))?;
        let res = energy_identity_residual(&traj).max_abs;
        match prev {
            Some(r) => println!("dt = {dt:<7} max residual = {res:.4e}  ratio = {:.3}", r / res),
            None => println!("dt = {dt:<7} max residual = {res:.4e}"),
        }
        prev = Some(res);
    }
    Ok(())
}
