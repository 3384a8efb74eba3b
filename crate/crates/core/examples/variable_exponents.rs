//! Modular, Luxemburg norm and the norm/modular sandwich for a variable
//! exponent on the unit interval.

use viscodecay::varexp::{check_modular_norm_bounds, log_holder_check, luxemburg_norm, modular, ExponentProfile};
use viscodecay::DomainSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dom = DomainSpec::interval(1.0, 201)?;
    let q = ExponentProfile::Linear { from: 2.5, to: 4.0 }.build(&dom)?;
    println!("q ranges over [{}, {}]", q.q1(), q.q2());

    let lh = log_holder_check(&q, &dom, 0.5, 0.1)?;
    println!(
        "log-Hölder with A = 0.5: ok = {}, smallest admissible A = {:.4}",
        lh.ok, lh.a_required
    );

    for amp in [0.2, 1.0, 3.0] {
        let f = dom
            .sample_dirichlet(|x| amp * (std::f64::consts::PI * x[0]).sin())
            .into_vec();
        let rho = modular(&f, &q, &dom)?;
        let norm = luxemburg_norm(&f, &q, &dom)?;
        let sandwich = check_modular_norm_bounds(&f, &q, &dom)?;
        println!("amplitude {amp:>4}: modular = {rho:.6e}, norm = {norm:.6e}, sandwich holds = {sandwich}");
    }

    // constant exponent: the norm is the ordinary L^q norm
    let q4 = ExponentProfile::Const { value: 4.0 }.build(&dom)?;
    let f = dom.sample_dirichlet(|x| x[0] * (1.0 - x[0])).into_vec();
    let direct = modular(&f, &q4, &dom)?.powf(0.25);
    println!(
        "L^4 norm: Luxemburg {:.15}, direct {:.15}",
        luxemburg_norm(&f, &q4, &dom)?,
        direct
    );
    Ok(())
}
