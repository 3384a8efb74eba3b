//! Potential-well constants, the decay and blow-up condition sets, and the
//! decay constants for the pinned example (b = 1, B₁ = 1, p ≡ 4, E(0) = 0.15).

use std::f64::consts::PI;

use viscodecay::analysis::{
    check_blowup_conditions, check_decay_conditions, compute_k, compute_k_alpha_sigma, StableSetConstants,
};
use viscodecay::RelaxationKernel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let kernel = RelaxationKernel::exponential(0.5, 1.0)?;
    let l = kernel.l().unwrap();
    let c = StableSetConstants::new(0.3, l, 1.0, 4.0, 4.0)?.with_initial_data(0.15, 0.5);
    println!("B1 = {}, lambda1 = {}, E1 = {}", c.b1, c.lambda1, c.e1);
    println!(
        "lambda2 = {:.12}, C~ = {:.12}, omega = {:.12}",
        c.lambda2.unwrap(),
        c.ctilde.unwrap(),
        c.omega.unwrap()
    );

    for cond in check_decay_conditions(&c, &kernel).conditions {
        println!(
            "  [{}] {}  (margin {:.4e})",
            if cond.ok { "ok" } else { "--" },
            cond.name,
            cond.margin
        );
    }

    let omega1 = PI * PI;
    let k = compute_k(&c, 2.0, 2.0, 1.0, 1.0, omega1, 1.0).map_err(|u| u.to_string())?;
    println!("K (m ≡ 2)          = {:?}", k.k);
    let k = compute_k(&c, 3.0, 4.0, 1.0, 1.0, omega1, 1.0).map_err(|u| u.to_string())?;
    println!(
        "K (m in [3, 4])    = {:?}  eps = {:.4}, vareps = {:.4}, delta = {:.4}",
        k.k, k.epsilon_young, k.epsilon_cauchy, k.delta
    );
    let k = compute_k_alpha_sigma(&c, 2.0, 2.0, 1.0, 1.0, omega1, 1.4, 0.1, 4.0, 0.5).map_err(|u| u.to_string())?;
    println!("K(1.4, 0.1)        = {:?}", k.k);
    match compute_k_alpha_sigma(&c, 2.0, 2.0, 1.0, 1.0, omega1, 1.5, 0.2, 4.0, 0.5) {
        Ok(k) => println!("K(1.5, 0.2) = {}", k.k),
        Err(u) => println!("K(1.5, 0.2) unavailable: {u}"),
    }

    let above = StableSetConstants::new(0.3, l, 1.0, 4.0, 4.0)?.with_initial_data(-32.7, 4.7);
    let r = check_blowup_conditions(&above, &kernel, 2.0);
    println!("blow-up conditions for E(0) = -32.7, lambda(0) = 4.7: {}", r.ok);
    Ok(())
}
