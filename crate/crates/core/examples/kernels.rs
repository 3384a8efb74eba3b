//! Relaxation kernels: masses, `l`, decay-class checks and the blow-up mass
//! bound.

use viscodecay::kernel::{blowup_mass_bound, decay_class_check, DecayClass, TailModel};
use viscodecay::{RelaxationKernel, XiFunction};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // fine enough that the three-point derivative error stays below 1e-8 g(0)
    let grid: Vec<f64> = (0..=1_000_000).map(|i| i as f64 * 1e-5).collect();

    let exp = RelaxationKernel::exponential(0.5, 1.0)?;
    println!(
        "exponential 0.5 e^(-t): mass = {:.15}, l = {:.15}",
        exp.kernel_mass(f64::INFINITY)?,
        exp.l().unwrap()
    );
    let r = decay_class_check(&exp, &DecayClass::TypeI(XiFunction::Constant(1.0)), &grid)?;
    println!(
        "  g' <= -g on [0,10]: {} (worst residual {:.3e})",
        r.ok, r.worst_residual
    );

    let pow = RelaxationKernel::power_law(0.5, 4.0, 1.4)?;
    println!("power law g0 = 0.5, C = 4, alpha = 1.4: l = {:.15}", pow.l().unwrap());
    let r = decay_class_check(&pow, &DecayClass::TypeII { c: 4.0, alpha: 1.4 }, &grid)?;
    println!(
        "  g' + 4 g^1.4 <= 0 on [0,10]: {} (worst residual {:.3e})",
        r.ok, r.worst_residual
    );
    println!(
        "  g(t) <= {:.6} (1+t)^(-2.5)",
        pow.power_law_envelope_constant().unwrap()
    );

    // sampled copy of the exponential kernel with an exponential tail
    let t: Vec<f64> = (0..=200).map(|i| i as f64 * 0.05).collect();
    let g: Vec<f64> = t.iter().map(|s| 0.5 * (-s).exp()).collect();
    let xi = vec![1.0; t.len()];
    let sampled = RelaxationKernel::sampled(t, g, xi, Some(TailModel::Exponential { rate: 1.0 }))?;
    println!("sampled exponential: l = {:.12} (exact 0.5)", sampled.l().unwrap());

    let heavy = RelaxationKernel::exponential(2.0, 1.0)?;
    println!("exponential 2 e^(-t) admissible: {}", heavy.admissibility().ok);

    for p1 in [3.0, 4.0, 6.0] {
        println!(
            "blow-up needs kernel mass below {:.6} when p1 = {p1}",
            blowup_mass_bound(p1)?
        );
    }
    Ok(())
}
