//! Discrete Laplacian, summation by parts, Dirichlet eigenvalues and the
//! embedding bound on an interval and a rectangle.

use viscodecay::domain::{
    constant_exponent_bound, discrete_first_eigenvalue, first_eigenvalue, grad_sq_norm, inner, laplacian,
};
use viscodecay::DomainSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let line = DomainSpec::interval(1.0, 201)?;
    let rect = DomainSpec::rectangle([1.0, 2.0], [51, 101])?;
    for (name, dom) in [("interval", &line), ("rectangle", &rect)] {
        let u = dom.sample_dirichlet(|x| x[0] * (1.0 - x[0]).powi(2) * (3.0 * x[1] + 1.0).cos());
        let lap = laplacian(&u, dom)?;
        let lhs = -inner(&lap, &u, dom);
        let rhs = grad_sq_norm(&u, dom)?;
        println!("{name}: <-Δu, u> = {lhs:.15}, ‖∇u‖² = {rhs:.15}");
        println!(
            "  ω₁ = {:.10} (grid {:.10}), B for q = 4: {:.6}",
            first_eigenvalue(dom),
            discrete_first_eigenvalue(dom),
            constant_exponent_bound(dom, 4.0)?
        );
    }
    Ok(())
}
