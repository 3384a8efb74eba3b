//! Numerical oracle for the integral decay inequality
//!
//! ```text
//! ∫_t^∞ E(s)^{1+σ} φ'(s) ds ≤ (1/ω)·E(0)^σ·E(t)   for all t ≥ 0
//! ```
//!
//! and its conclusion: `E(t) ≤ E(0)e^{1−ωφ(t)}` for `σ = 0`,
//! `E(t) ≤ E(0)((1+σ)/(1+ωσφ(t)))^{1/σ}` for `σ > 0`.
//!
//! The integral up to the horizon uses a third-order rule per interval on a
//! uniform grid. Beyond the horizon `φ` is continued linearly with slope
//! `φ'(H)` and `E` follows its declared tail model.

use serde::Serialize;

use super::Unmet;
use crate::kernel::three_point_derivative;

/// Relative tolerance of both checks.
pub const KOMORNIK_REL_TOL: f64 = 1e-6;

/// Analytic continuation of `E` past the horizon `H`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EnergyTail {
    /// `E(s) = E(H)e^{−rate(s−H)}`
    Exponential { rate: f64 },
    /// `E(s) = E(H)((1+c s)/(1+c H))^{−exponent}`
    Power { exponent: f64, scale: f64 },
    /// `E(s) = E(H)`
    Constant,
}

impl EnergyTail {
    /// `∫_H^∞ E(s)^{1+σ} ds`; infinite when the integral diverges.
    fn integral(&self, e_h: f64, horizon: f64, sigma: f64) -> f64 {
        if e_h == 0.0 {
            return 0.0;
        }
        let head = e_h.powf(1.0 + sigma);
        match *self {
            EnergyTail::Exponential { rate } if rate > 0.0 => head / ((1.0 + sigma) * rate),
            EnergyTail::Power { exponent, scale } if scale > 0.0 && exponent * (1.0 + sigma) > 1.0 => {
                head * (1.0 + scale * horizon) / (scale * (exponent * (1.0 + sigma) - 1.0))
            }
            _ => f64::INFINITY,
        }
    }
}

/// Sampled `E` and `φ` on a uniform grid starting at `t = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KomornikInput {
    pub t: Vec<f64>,
    pub e: Vec<f64>,
    pub phi: Vec<f64>,
    pub sigma: f64,
    pub omega: f64,
    pub tail: Option<EnergyTail>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Hypothesis {
    Holds,
    Fails,
    /// The horizon integral cannot be bounded without a tail model.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KomornikReport {
    pub hypothesis: Hypothesis,
    pub hypothesis_ok: bool,
    /// Largest `lhs/rhs − 1` of the hypothesis over the grid.
    pub hypothesis_worst: f64,
    pub hypothesis_worst_t: f64,
    pub conclusion_ok: bool,
    /// Largest `E/bound − 1` of the conclusion over the grid.
    pub conclusion_worst: f64,
    pub conclusion_worst_t: f64,
    pub tolerance: f64,
}

/// `∫_{tᵢ}^{t_N} f` for every `i`, with `h/12·(5f₀ + 8f₁ − f₂)` per interval.
fn backward_cumulative(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    for i in (0..n - 1).rev() {
        let piece = if i + 2 < n {
            h / 12.0 * (5.0 * f[i] + 8.0 * f[i + 1] - f[i + 2])
        } else {
            h / 12.0 * (-f[i - 1] + 8.0 * f[i] + 5.0 * f[i + 1])
        };
        out[i] = out[i + 1] + piece;
    }
    out
}

fn validate(input: &KomornikInput) -> Result<f64, Unmet> {
    let n = input.t.len();
    if n < 3 || input.e.len() != n || input.phi.len() != n {
        return Err(Unmet::new(
            "rejected input",
            "t, E and phi need equal lengths of at least 3",
        ));
    }
    if input.t[0] != 0.0 {
        return Err(Unmet::new("rejected input", "the grid must start at t = 0"));
    }
    let h = input.t[1] - input.t[0];
    if !(h > 0.0) || input.t.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h) {
        return Err(Unmet::new("rejected input", "the grid must be uniform and increasing"));
    }
    if !(input.sigma >= 0.0 && input.omega > 0.0) {
        return Err(Unmet::new("rejected input", "need sigma >= 0 and omega > 0"));
    }
    if input.phi[0] != 0.0 || input.phi.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Unmet::new("rejected input", "phi must start at 0 and increase"));
    }
    if input.e.iter().any(|e| !(*e >= 0.0)) || input.e.windows(2).any(|w| w[1] > w[0]) {
        return Err(Unmet::new("rejected input", "E must be nonnegative and nonincreasing"));
    }
    Ok(h)
}

/// Check the hypothesis and the conclusion at every grid time.
pub fn komornik_check(input: &KomornikInput) -> Result<KomornikReport, Unmet> {
    let h = validate(input)?;
    let (sigma, omega) = (input.sigma, input.omega);
    let n = input.t.len();
    let dphi = three_point_derivative(&input.t, &input.phi);
    let f: Vec<f64> = input
        .e
        .iter()
        .zip(&dphi)
        .map(|(e, d)| e.powf(1.0 + sigma) * d)
        .collect();
    let head = backward_cumulative(&f, h);
    let e0 = input.e[0];
    let e_h = input.e[n - 1];
    let tail = match (input.tail, e_h == 0.0) {
        (_, true) => Some(0.0),
        (Some(model), false) => Some(model.integral(e_h, input.t[n - 1], sigma) * dphi[n - 1]),
        (None, false) => None,
    };

    let tol = KOMORNIK_REL_TOL;
    let mut hyp = (f64::NEG_INFINITY, 0.0);
    if let Some(tail) = tail {
        for i in 0..n {
            let lhs = head[i] + tail;
            let rhs = e0.powf(sigma) * input.e[i] / omega;
            let ratio = if rhs > 0.0 {
                lhs / rhs - 1.0
            } else if lhs > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            if ratio > hyp.0 || ratio.is_nan() {
                hyp = (ratio, input.t[i]);
            }
        }
    }
    let hypothesis = match tail {
        None => Hypothesis::Inconclusive,
        Some(_) if hyp.0 <= tol => Hypothesis::Holds,
        Some(_) => Hypothesis::Fails,
    };

    let mut con = (f64::NEG_INFINITY, 0.0);
    for i in 0..n {
        let phi = input.phi[i];
        let bound = if sigma == 0.0 {
            e0 * (1.0 - omega * phi).exp()
        } else {
            e0 * ((1.0 + sigma) / (1.0 + omega * sigma * phi)).powf(1.0 / sigma)
        };
        let ratio = if bound > 0.0 { input.e[i] / bound - 1.0 } else { 0.0 };
        if ratio > con.0 || ratio.is_nan() {
            con = (ratio, input.t[i]);
        }
    }

    Ok(KomornikReport {
        hypothesis,
        hypothesis_ok: hypothesis == Hypothesis::Holds,
        hypothesis_worst: hyp.0,
        hypothesis_worst_t: hyp.1,
        conclusion_ok: con.0 <= tol,
        conclusion_worst: con.0,
        conclusion_worst_t: con.1,
        tolerance: tol,
    })
}
