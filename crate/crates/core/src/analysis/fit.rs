//! Empirical decay-class fitting of an energy series.

use serde::Serialize;

use super::Unmet;
use crate::solver::Trajectory;

/// Fraction of the records, counted from the end, that enter the fit.
pub const FIT_WINDOW_FRACTION: f64 = 0.9;

/// Minimum number of records with `E > 0` inside the window.
pub const FIT_MIN_RECORDS: usize = 50;

/// Required `R²` advantage of the winning model.
pub const FIT_R2_GAP: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "kebab-case")]
pub enum DecayClassFit {
    /// `E ≈ A·e^{−ct}`
    Exponential {
        c: f64,
    },
    /// `E ≈ A·(1+t)^{−β}`
    Polynomial {
        beta: f64,
    },
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    pub class: DecayClassFit,
    /// Slope of `log E` against `t`, sign flipped.
    pub exp_rate: f64,
    pub r2_exp: f64,
    /// Slope of `log E` against `log(1+t)`, sign flipped.
    pub poly_exponent: f64,
    pub r2_poly: f64,
    pub n_used: usize,
}

/// Least-squares slope and `R²` of `y` against `x`.
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, r2)
}

/// Fit `log E` against `t` and against `log(1+t)` over the trailing window
/// and pick the model whose `R²` is higher by more than [`FIT_R2_GAP`].
pub fn fit_decay_series(t: &[f64], e: &[f64]) -> Result<DecayFit, Unmet> {
    if t.len() != e.len() {
        return Err(Unmet::new(
            "rejected input",
            format!("{} times but {} energies", t.len(), e.len()),
        ));
    }
    let skip = t.len() - (FIT_WINDOW_FRACTION * t.len() as f64).round() as usize;
    let (mut ts, mut logs, mut ys) = (Vec::new(), Vec::new(), Vec::new());
    for (ti, ei) in t.iter().zip(e).skip(skip) {
        if *ei > 0.0 && ei.is_finite() && ti.is_finite() {
            ts.push(*ti);
            logs.push((1.0 + ti).ln());
            ys.push(ei.ln());
        }
    }
    if ts.len() < FIT_MIN_RECORDS {
        return Err(Unmet::new(
            "too few records",
            format!(
                "{} positive energies in the fit window, need {FIT_MIN_RECORDS}",
                ts.len()
            ),
        ));
    }
    let (s_exp, r2_exp) = linear_fit(&ts, &ys);
    let (s_poly, r2_poly) = linear_fit(&logs, &ys);
    let class = if r2_exp - r2_poly > FIT_R2_GAP {
        DecayClassFit::Exponential { c: -s_exp }
    } else if r2_poly - r2_exp > FIT_R2_GAP {
        DecayClassFit::Polynomial { beta: -s_poly }
    } else {
        DecayClassFit::Undetermined
    };
    Ok(DecayFit {
        class,
        exp_rate: -s_exp,
        r2_exp,
        poly_exponent: -s_poly,
        r2_poly,
        n_used: ts.len(),
    })
}

/// [`fit_decay_series`] on the records of a trajectory.
pub fn fit_decay(traj: &Trajectory) -> Result<DecayFit, Unmet> {
    let t: Vec<f64> = traj.records.iter().map(|r| r.t).collect();
    let e: Vec<f64> = traj.records.iter().map(|r| r.e).collect();
    fit_decay_series(&t, &e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, t_end: f64) -> Vec<f64> {
        (0..n).map(|i| t_end * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn recovers_exponential_rate() {
        let t = grid(400, 20.0);
        let e: Vec<f64> = t.iter().map(|s| 0.3 * (-0.7 * s).exp()).collect();
        let f = fit_decay_series(&t, &e).unwrap();
        match f.class {
            DecayClassFit::Exponential { c } => assert!((c - 0.7).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        assert!((f.r2_exp - 1.0).abs() < 1e-12);
    }

    #[test]
    fn recovers_power_exponent() {
        let t = grid(400, 200.0);
        let e: Vec<f64> = t.iter().map(|s| 2.0 * (1.0 + s).powf(-1.5)).collect();
        let f = fit_decay_series(&t, &e).unwrap();
        match f.class {
            DecayClassFit::Polynomial { beta } => assert!((beta - 1.5).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn short_or_flat_series() {
        let t = grid(40, 1.0);
        let e = vec![1.0; 40];
        assert_eq!(fit_decay_series(&t, &e).unwrap_err().condition, "too few records");
        let t = grid(100, 1.0);
        let e = vec![1.0; 100];
        assert_eq!(fit_decay_series(&t, &e).unwrap().class, DecayClassFit::Undetermined);
    }
}
