//! The integral decay inequality on closed-form energy families.

use viscodecay::analysis::{komornik_check, EnergyTail, KomornikInput};

fn family(e: impl Fn(f64) -> f64, horizon: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let t: Vec<f64> = (0..n).map(|i| horizon * i as f64 / (n - 1) as f64).collect();
    let e = t.iter().map(|s| e(*s)).collect();
    (t, e)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cases = [
        (
            "E0 e^(-wt), sigma = 0",
            0.0,
            0.5,
            EnergyTail::Exponential { rate: 0.5 },
            family(|s| 2.0 * (-0.5 * s).exp(), 20.0, 4001),
        ),
        (
            "E0/(1+wt), sigma = 1",
            1.0,
            0.8,
            EnergyTail::Power {
                exponent: 1.0,
                scale: 0.8,
            },
            family(|s| 1.5 / (1.0 + 0.8 * s), 40.0, 4001),
        ),
        ("constant E", 0.0, 1.0, EnergyTail::Constant, family(|_| 1.0, 10.0, 101)),
    ];
    for (name, sigma, omega, tail, (t, e)) in cases {
        let input = KomornikInput {
            phi: t.clone(),
            t,
            e,
            sigma,
            omega,
            tail: Some(tail),
        };
        let r = komornik_check(&input).map_err(|u| u.to_string())?;
        println!(
            "{name:<24} hypothesis {:?} (worst {:.2e})  conclusion ok = {} (worst {:.2e})",
            r.hypothesis, r.hypothesis_worst, r.conclusion_ok, r.conclusion_worst
        );
    }
    Ok(())
}
