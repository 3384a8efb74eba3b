//! Simulated energies under the exponential-kernel and power-law-kernel
//! decay envelopes.

use std::f64::consts::PI;

use viscodecay::analysis::{
    compute_k, compute_k_alpha_sigma, envelope, verify_envelope, DecayEnvelope, StableSetConstants,
};
use viscodecay::domain::{embedding_constant, first_eigenvalue};
use viscodecay::solver::run;
use viscodecay::{DomainSpec, ExponentField, Field, RelaxationKernel, SimConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dom = DomainSpec::interval(1.0, 101)?;
    let n = dom.len();
    let m = ExponentField::constant(2.0, n)?;
    let p = ExponentField::constant(4.0, n)?;
    let b = embedding_constant(&dom, &p)?;
    let omega1 = first_eigenvalue(&dom);
    let mut cfg = SimConfig::new(1.0, 1.0, 0.004, 20.0);
    cfg.output_stride = 5;

    for kernel in [
        RelaxationKernel::exponential(0.5, 1.0)?,
        RelaxationKernel::power_law(0.5, 4.0, 1.4)?,
    ] {
        let u0 = dom.sample_dirichlet(|x| 0.2475 * (PI * x[0]).sin());
        let traj = run(&cfg, &kernel, &m, &p, &dom, u0, Field::zeros(n))?;
        let first = traj.records[0];
        let c =
            StableSetConstants::new(b, kernel.l().unwrap(), 1.0, 4.0, 4.0)?.with_initial_data(first.e, first.lambda_t);
        let env = match kernel.kind() {
            viscodecay::KernelKind::PowerLaw { c: c_ode, alpha, .. } => {
                let bound = kernel.power_law_envelope_constant().unwrap();
                let k = compute_k_alpha_sigma(&c, 2.0, 2.0, 1.0, 1.0, omega1, *alpha, 0.1, *c_ode, bound)
                    .map_err(|u| u.to_string())?;
                DecayEnvelope::type_two(k.k, *alpha, 0.1, first.e, 2.0)
            }
            _ => {
                let k = compute_k(&c, 2.0, 2.0, 1.0, 1.0, omega1, 1.0).map_err(|u| u.to_string())?;
                DecayEnvelope::type_one(k.k, kernel.xi().unwrap(), first.e, 2.0)
            }
        };
        let verdict = verify_envelope(&traj, &env);
        println!("{:?}: K = {:.6e}, envelope holds = {}", env.kind, env.k, verdict.ok);
        for r in traj.records.iter().step_by(200) {
            println!(
                "  t = {:>5.1}  E = {:.6e}  bound = {:.6e}",
                r.t,
                r.e,
                envelope(r.t, &env)
            );
        }
    }
    Ok(())
}
