//! Decay-class fits on synthetic exponential and polynomial energies.

use viscodecay::analysis::fit_decay_series;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let t: Vec<f64> = (0..=2000).map(|i| i as f64 * 0.01).collect();
    let exp: Vec<f64> = t.iter().map(|s| 2.0 * (-0.7 * s).exp()).collect();
    let poly: Vec<f64> = t.iter().map(|s| 3.0 * (1.0 + s).powf(-1.5)).collect();
    for (name, e) in [("2 e^(-0.7 t)", exp), ("3 (1+t)^(-1.5)", poly)] {
        let fit = fit_decay_series(&t, &e).map_err(|u| u.to_string())?;
        println!(
            "{name:<16} -> {:?}   (R² exp {:.6}, R² poly {:.6})",
            fit.class, fit.r2_exp, fit.r2_poly
        );
    }
    Ok(())
}
