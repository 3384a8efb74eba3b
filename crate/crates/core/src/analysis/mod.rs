//! Potential-well constants and the verdicts built on them.
//!
//! Condition failures are values, not errors: every check returns a
//! [`ConditionReport`] listing each inequality with both sides and its
//! margin, and operations whose premises fail return [`Unmet`].

mod decay;
mod fit;
mod komornik;

pub use decay::{
    compute_k, compute_k_alpha_sigma, envelope, scheme_allowance, verify_envelope, BalanceCase, DecayConstant,
    DecayEnvelope, EnvelopeKind, EnvelopeVerdict, ENVELOPE_BASE_TOL, SCHEME_ALLOWANCE_C,
};
pub use fit::{fit_decay, fit_decay_series, DecayClassFit, DecayFit, FIT_MIN_RECORDS, FIT_R2_GAP, FIT_WINDOW_FRACTION};
pub use komornik::{komornik_check, EnergyTail, Hypothesis, KomornikInput, KomornikReport, KOMORNIK_REL_TOL};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{blowup_mass_bound, RelaxationKernel};
use crate::solver::Trajectory;

/// Bisection tolerance for `λ₂`.
pub const LAMBDA2_TOL: f64 = 1e-12;

/// Base tolerance of [`check_invariant_set`], before the scheme allowance.
pub const INVARIANT_BASE_TOL: f64 = 1e-6;

/// Why a result is unavailable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Unmet {
    pub condition: &'static str,
    pub detail: String,
}

impl Unmet {
    fn new(condition: &'static str, detail: impl Into<String>) -> Self {
        Unmet {
            condition,
            detail: detail.into(),
        }
    }
}

impl std::fmt::Display for Unmet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.condition, self.detail)
    }
}

/// Potential-well constants for a given embedding bound, kernel and source.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StableSetConstants {
    /// Embedding bound `‖u‖_{q(x)} ≤ B‖∇u‖₂`.
    #[serde(rename = "B")]
    pub b_embed: f64,
    /// `max{1, B/√l, 1/√b}`
    #[serde(rename = "B1")]
    pub b1: f64,
    /// `(1/(b·B₁^{p₁}))^{1/(p₁−2)}`
    pub lambda1: f64,
    /// `(½ − 1/p₁)·λ₁²`
    #[serde(rename = "E1")]
    pub e1: f64,
    pub l: f64,
    pub b: f64,
    pub p1: f64,
    pub p2: f64,
    /// `√l‖∇u₀‖₂`
    pub lambda0: Option<f64>,
    #[serde(rename = "E0")]
    pub e0: Option<f64>,
    /// Root of `f(λ) = E(0)` in `(0, λ₁)`.
    pub lambda2: Option<f64>,
    #[serde(rename = "Ctilde")]
    pub ctilde: Option<f64>,
    /// `(1 − 2/p₂)·C̃·p₂`
    pub omega: Option<f64>,
}

impl StableSetConstants {
    pub fn new(b_embed: f64, l: f64, b: f64, p1: f64, p2: f64) -> Result<Self> {
        if !(b_embed > 0.0 && b_embed.is_finite()) {
            return Err(Error::invalid(format!(
                "embedding bound must be positive, got {b_embed}"
            )));
        }
        if !(l > 0.0 && l <= 1.0) {
            return Err(Error::invalid(format!("l must lie in (0, 1], got {l}")));
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::invalid(format!(
                "source coefficient b must be positive, got {b}"
            )));
        }
        if !(p1 > 2.0 && p2 >= p1 && p2.is_finite()) {
            return Err(Error::invalid(format!("need 2 < p1 <= p2, got p1 = {p1}, p2 = {p2}")));
        }
        let b1 = 1.0_f64.max(b_embed / l.sqrt()).max(1.0 / b.sqrt());
        let lambda1 = (1.0 / (b * b1.powf(p1))).powf(1.0 / (p1 - 2.0));
        let e1 = (0.5 - 1.0 / p1) * lambda1 * lambda1;
        Ok(StableSetConstants {
            b_embed,
            b1,
            lambda1,
            e1,
            l,
            b,
            p1,
            p2,
            lambda0: None,
            e0: None,
            lambda2: None,
            ctilde: None,
            omega: None,
        })
    }

    /// Attach the initial energy and `λ(0)`, and fill `λ₂`, `C̃` and `ω`
    /// where their premises hold.
    pub fn with_initial_data(mut self, e0: f64, lambda0: f64) -> Self {
        self.e0 = Some(e0);
        self.lambda0 = Some(lambda0);
        self.lambda2 = solve_lambda2(e0, &self).ok();
        self.ctilde = self.lambda2.and_then(|l2| compute_ctilde(l2, &self).ok());
        self.omega = self.ctilde.map(|c| (1.0 - 2.0 / self.p2) * c * self.p2);
        self
    }

    /// Energy threshold `(p₁/p₂)^{1/(p₁−2)}·λ₁²·(½ − 1/p₂)` of the decay result.
    pub fn decay_threshold(&self) -> f64 {
        (self.p1 / self.p2).powf(1.0 / (self.p1 - 2.0)) * self.lambda1 * self.lambda1 * (0.5 - 1.0 / self.p2)
    }

    /// Energy factor `1 − (1−l)/(p₁(p₁−2)l)` of the blow-up result.
    pub fn blowup_energy_factor(&self) -> f64 {
        1.0 - (1.0 - self.l) / (self.p1 * (self.p1 - 2.0) * self.l)
    }
}

/// `f(λ) = ½λ² − (b/p₁)·B₁^{p₁}·max{λ^{p₁}, λ^{p₂}}`.
pub fn f_lambda(lambda: f64, c: &StableSetConstants) -> Result<f64> {
    if !(lambda >= 0.0) {
        return Err(Error::invalid(format!("f(lambda) needs lambda >= 0, got {lambda}")));
    }
    Ok(f_unchecked(lambda, c))
}

fn f_unchecked(lambda: f64, c: &StableSetConstants) -> f64 {
    let pw = lambda.powf(c.p1).max(lambda.powf(c.p2));
    0.5 * lambda * lambda - c.b / c.p1 * c.b1.powf(c.p1) * pw
}

/// Root of `f(λ) = E0` on `(0, λ₁]` by bisection.
pub fn solve_lambda2(e0: f64, c: &StableSetConstants) -> std::result::Result<f64, Unmet> {
    if !(e0 > 0.0 && e0 < c.e1) {
        return Err(Unmet::new(
            "0 < E(0) < E1",
            format!("E(0) = {e0} outside (0, E1 = {})", c.e1),
        ));
    }
    let (mut lo, mut hi) = (0.0, c.lambda1);
    while hi - lo > LAMBDA2_TOL {
        let mid = 0.5 * (lo + hi);
        if f_unchecked(mid, c) < e0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `C̃ = κ/(1 − κ)` with `κ = (2bB₁^{p₂}/p₁)·λ₂^{p₁−2}`.
pub fn compute_ctilde(lambda2: f64, c: &StableSetConstants) -> std::result::Result<f64, Unmet> {
    let kappa = 2.0 * c.b * c.b1.powf(c.p2) / c.p1 * lambda2.powf(c.p1 - 2.0);
    if !(kappa < 1.0) {
        return Err(Unmet::new(
            "source bound inapplicable",
            format!("(2bB1^p2/p1)*lambda2^(p1-2) = {kappa} is not below 1"),
        ));
    }
    Ok(kappa / (1.0 - kappa))
}

/// One inequality `lhs < rhs` with `margin = rhs − lhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub ok: bool,
}

impl Condition {
    fn less(name: &str, lhs: f64, rhs: f64) -> Self {
        Condition {
            name: name.to_string(),
            lhs,
            rhs,
            margin: rhs - lhs,
            ok: lhs < rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub ok: bool,
    pub conditions: Vec<Condition>,
}

impl ConditionReport {
    fn from(conditions: Vec<Condition>) -> Self {
        ConditionReport {
            ok: conditions.iter().all(|c| c.ok),
            conditions,
        }
    }

    pub fn get(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name)
    }

    pub fn failed(&self) -> Vec<&Condition> {
        self.conditions.iter().filter(|c| !c.ok).collect()
    }
}

/// Global existence and decay premises: `0 < E(0) < threshold`,
/// `λ(0) < λ₁`, `l > 0`, and the consequence `ω < 2`.
pub fn check_decay_conditions(c: &StableSetConstants, kernel: &RelaxationKernel) -> ConditionReport {
    let e0 = c.e0.unwrap_or(f64::NAN);
    let lambda0 = c.lambda0.unwrap_or(f64::NAN);
    let l = kernel.l().unwrap_or(f64::NAN);
    ConditionReport::from(vec![
        Condition::less("E(0) > 0", 0.0, e0),
        Condition::less(
            "E(0) < (p1/p2)^(1/(p1-2)) lambda1^2 (1/2 - 1/p2)",
            e0,
            c.decay_threshold(),
        ),
        Condition::less("lambda(0) < lambda1", lambda0, c.lambda1),
        Condition::less("l > 0", 0.0, l),
        Condition::less("omega < 2", c.omega.unwrap_or(f64::NAN), 2.0),
    ])
}

/// Finite-time blow-up premises: `m₂ < p₁`, kernel mass below
/// [`blowup_mass_bound`], `E(0) < (1 − (1−l)/(p₁(p₁−2)l))·E₁`, `λ₁ < λ(0)`.
pub fn check_blowup_conditions(c: &StableSetConstants, kernel: &RelaxationKernel, m2: f64) -> ConditionReport {
    let e0 = c.e0.unwrap_or(f64::NAN);
    let lambda0 = c.lambda0.unwrap_or(f64::NAN);
    let mass = kernel.kernel_mass(f64::INFINITY).unwrap_or(f64::NAN);
    let bound = blowup_mass_bound(c.p1).unwrap_or(f64::NAN);
    ConditionReport::from(vec![
        Condition::less("m2 < p1", m2, c.p1),
        Condition::less("kernel mass < (p1/2-1)/(p1/2-1+1/(2p1))", mass, bound),
        Condition::less("E(0) < (1 - (1-l)/(p1(p1-2)l)) E1", e0, c.blowup_energy_factor() * c.e1),
        Condition::less("lambda1 < lambda(0)", c.lambda1, lambda0),
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvariantSetVerdict {
    pub ok: bool,
    pub worst_t: f64,
    /// Largest `λ(t)² − λ₂²` over the records.
    pub worst_excess: f64,
    pub tolerance: f64,
}

/// Audit `λ(t)² ≤ λ₂² + tol` with `tol = 1e-6 + scheme_allowance(dt, h)`.
pub fn check_invariant_set(traj: &Trajectory, lambda2: f64) -> InvariantSetVerdict {
    let tolerance = INVARIANT_BASE_TOL + scheme_allowance(traj.dt, traj.h);
    let mut worst_t = traj.records.first().map_or(0.0, |r| r.t);
    let mut worst_excess = f64::NEG_INFINITY;
    for r in &traj.records {
        let excess = r.lambda_t * r.lambda_t - lambda2 * lambda2;
        if excess > worst_excess || excess.is_nan() {
            worst_excess = excess;
            worst_t = r.t;
        }
    }
    if traj.records.is_empty() {
        worst_excess = 0.0;
    }
    InvariantSetVerdict {
        ok: worst_excess <= tolerance,
        worst_t,
        worst_excess,
        tolerance,
    }
}
