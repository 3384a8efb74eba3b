//! Decay constants `K`, `K(α,σ)` and the envelopes they define.
//!
//! Both constants come from a balance in which the Young/Cauchy parameters
//! `ϵ, ε, δ ∈ (0,1)` absorb the `∫ξE^{γ+1}` terms:
//!
//! ```text
//! c_ϵ·ϵ^{m₂/(m₂−2)} + c_ε·ε + c_δ·δ^{m₁} = (2−ω)/2
//! c_ϵ = 2(1+|Ω|)²·max{E(0)^{(m₂−m₁)/(m₁−2)}, 1}
//! c_ε = (1+C̃)(1−l)/l
//! c_δ = a·2B₁^{m₂}/l^{m₂/2}·(1+C̃)
//! ```
//!
//! Each present term is set to the same share of `(2−ω)/2` and inverted in
//! closed form. If a parameter lands outside `(0,1)` the shared target is
//! halved until all fit; a smaller left side only strengthens the estimate.
//!
//! Damping cases:
//! * `m₁ > 2`: all three terms, three-way split.
//! * `m₂ > m₁ = 2`: `c_ϵ = 2(1+|Ω|)²` without the `max` factor, and the
//!   bracket gains `2(1+|Ω|)²/((γ+1)a)` from the `m = 2` part of the
//!   velocity bound. The `ϵ^{−m₂/2}` bracket term keeps its `1/a`, which
//!   comes from `∫|u_t|^{m(x)} ≤ −E'/a`.
//! * `m ≡ 2`: `γ = 0`, no `ϵ` term; the `ε` and `δ` terms share the target
//!   two ways and the damping contribution to the bracket is `2/((γ+1)a)`.

use serde::Serialize;

use super::{StableSetConstants, Unmet};
use crate::kernel::XiFunction;
use crate::solver::Trajectory;

/// Fixed part of the envelope tolerance.
pub const ENVELOPE_BASE_TOL: f64 = 1e-3;

/// Constant `c` of the scheme allowance `c·(dt + h²)`, calibrated on the
/// refinement studies in `tests/convergence.rs`.
pub const SCHEME_ALLOWANCE_C: f64 = 1.0;

/// Allowance for discrete-versus-continuum energy differences.
pub fn scheme_allowance(dt: f64, h: f64) -> f64 {
    SCHEME_ALLOWANCE_C * (dt + h * h)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BalanceCase {
    /// `m₁ > 2`
    Superlinear,
    /// `m₂ > m₁ = 2`
    Mixed,
    /// `m ≡ 2`
    Linear,
}

/// A decay constant with the balance parameters that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayConstant {
    #[serde(rename = "K")]
    pub k: f64,
    pub case: BalanceCase,
    pub gamma: f64,
    /// Young parameter on the velocity term (`NaN` when absent).
    pub epsilon_young: f64,
    /// Cauchy parameter on the memory cross term.
    pub epsilon_cauchy: f64,
    pub delta: f64,
    /// Value assigned to each balance term.
    pub share: f64,
    /// Sum of the bracketed coefficients.
    pub bracket: f64,
}

struct Balance {
    case: BalanceCase,
    gamma: f64,
    epsilon_young: f64,
    epsilon_cauchy: f64,
    delta: f64,
    share: f64,
    /// `2(1+|Ω|)²`
    omega_factor: f64,
    e0: f64,
    one_c: f64,
    omega: f64,
}

fn positive(name: &'static str, v: f64) -> Result<(), Unmet> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Unmet::new(
            "rejected input",
            format!("{name} must be positive and finite, got {v}"),
        ))
    }
}

fn balance(c: &StableSetConstants, m1: f64, m2: f64, a: f64, measure: f64) -> Result<Balance, Unmet> {
    let (Some(ctilde), Some(omega), Some(e0)) = (c.ctilde, c.omega, c.e0) else {
        return Err(Unmet::new(
            "decay constants unavailable",
            "C~ and omega need 0 < E(0) < E1 and a valid source bound",
        ));
    };
    if !(omega < 2.0) {
        return Err(Unmet::new(
            "decay constants unavailable",
            format!("omega = {omega} is not below 2"),
        ));
    }
    if !(m1 >= 2.0 && m2 >= m1) {
        return Err(Unmet::new(
            "rejected input",
            format!("need 2 <= m1 <= m2, got m1 = {m1}, m2 = {m2}"),
        ));
    }
    positive("damping coefficient a", a)?;
    positive("domain measure", measure)?;
    positive("E(0)", e0)?;
    let case = if m1 > 2.0 {
        BalanceCase::Superlinear
    } else if m2 > 2.0 {
        BalanceCase::Mixed
    } else {
        BalanceCase::Linear
    };
    let gamma = (m2 - 2.0) / 2.0;
    let one_c = 1.0 + ctilde;
    let l = c.l;
    let omega_factor = 2.0 * (1.0 + measure).powi(2);

    // (coefficient, exponent) of each present term
    let young = match case {
        BalanceCase::Superlinear => {
            let mx = e0.powf((m2 - m1) / (m1 - 2.0)).max(1.0);
            Some((omega_factor * mx, m2 / (m2 - 2.0)))
        }
        BalanceCase::Mixed => Some((omega_factor, m2 / (m2 - 2.0))),
        BalanceCase::Linear => None,
    };
    let cauchy = (one_c * (1.0 - l) / l, 1.0);
    let damping = (a * 2.0 * c.b1.powf(m2) / l.powf(m2 / 2.0) * one_c, m1);
    for (name, (coef, _)) in [("memory cross-term", cauchy), ("damping", damping)]
        .into_iter()
        .chain(young.map(|y| ("velocity", y)))
    {
        if !(coef > 0.0 && coef.is_finite()) {
            return Err(Unmet::new(
                "balance coefficient vanishes",
                format!("{name} coefficient is {coef}; its parameter is undetermined"),
            ));
        }
    }
    let terms = if young.is_some() { 3.0 } else { 2.0 };
    let invert = |share: f64, (coef, expo): (f64, f64)| (share / coef).powf(1.0 / expo);
    let mut share = (2.0 - omega) / 2.0 / terms;
    for _ in 0..1100 {
        let ey = young.map_or(f64::NAN, |y| invert(share, y));
        let ec = invert(share, cauchy);
        let de = invert(share, damping);
        let inside = |v: f64| v > 0.0 && v < 1.0;
        if (young.is_none() || inside(ey)) && inside(ec) && inside(de) {
            return Ok(Balance {
                case,
                gamma,
                epsilon_young: ey,
                epsilon_cauchy: ec,
                delta: de,
                share,
                omega_factor,
                e0,
                one_c,
                omega,
            });
        }
        share *= 0.5;
    }
    Err(Unmet::new(
        "balance parameters",
        "no admissible (epsilon, varepsilon, delta) found",
    ))
}

/// Velocity-term bracket contribution for each damping case.
fn damping_bracket(bal: &Balance, a: f64, m2: f64) -> f64 {
    let g1 = bal.gamma + 1.0;
    match bal.case {
        BalanceCase::Superlinear => bal.omega_factor * bal.epsilon_young.powf(-m2 / 2.0) / (a * bal.e0.powf(bal.gamma)),
        BalanceCase::Mixed => {
            bal.omega_factor * bal.epsilon_young.powf(-m2 / 2.0) / (a * bal.e0.powf(bal.gamma))
                + bal.omega_factor / (g1 * a)
        }
        BalanceCase::Linear => 2.0 / (g1 * a),
    }
}

fn gamma_bracket(bal: &Balance, l: f64, omega1: f64) -> f64 {
    let g = bal.gamma;
    g * bal.one_c / (omega1 * l * (g + 1.0)) + g * bal.one_c / (g + 1.0)
}

fn delta_bracket(bal: &Balance, m1: f64) -> f64 {
    bal.delta.powf(-m1 / (m1 - 1.0)) / (bal.gamma + 1.0)
}

/// Decay constant `K` for kernels with `g' ≤ −ξ(t)g`.
///
/// `omega1` is the first Dirichlet eigenvalue and `xi0 = ξ(0)`.
pub fn compute_k(
    c: &StableSetConstants,
    m1: f64,
    m2: f64,
    a: f64,
    measure: f64,
    omega1: f64,
    xi0: f64,
) -> Result<DecayConstant, Unmet> {
    positive("omega1", omega1)?;
    positive("xi(0)", xi0)?;
    let bal = balance(c, m1, m2, a, measure)?;
    let l = c.l;
    let g1 = bal.gamma + 1.0;
    let bracket = (3.0 * bal.one_c / (omega1 * l) + 3.0 * bal.one_c)
        + gamma_bracket(&bal, l, omega1)
        + damping_bracket(&bal, a, m2)
        + (1.0 + 1.0 / (2.0 * bal.epsilon_cauchy)) * 2.0 / (xi0 * g1)
        + delta_bracket(&bal, m1);
    let k = (2.0 - bal.omega) / 2.0 / (bracket * xi0);
    Ok(DecayConstant {
        k,
        case: bal.case,
        gamma: bal.gamma,
        epsilon_young: bal.epsilon_young,
        epsilon_cauchy: bal.epsilon_cauchy,
        delta: bal.delta,
        share: bal.share,
        bracket,
    })
}

/// Decay constant `K(α,σ)` for kernels with `g' + C g^α ≤ 0`, with `ξ ≡ 1`.
///
/// `c_ode` is the `C` of the differential inequality; `c_bound` is the
/// constant in `g(t) ≤ c_bound·(1+t)^{−1/(α−1)}`. Needs `1 < α < 2`,
/// `0 < σ < 1` and `2α + σ < 3`, the last making `r = (1−σ)/(α−1) > 2` so
/// that `∫∫ g^{1−σ}` stays bounded.
#[allow(clippy::too_many_arguments)]
pub fn compute_k_alpha_sigma(
    c: &StableSetConstants,
    m1: f64,
    m2: f64,
    a: f64,
    measure: f64,
    omega1: f64,
    alpha: f64,
    sigma: f64,
    c_ode: f64,
    c_bound: f64,
) -> Result<DecayConstant, Unmet> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(Unmet::new(
            "rejected input",
            format!("1 < alpha < 2 required, got {alpha}"),
        ));
    }
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Unmet::new(
            "rejected input",
            format!("0 < sigma < 1 required, got {sigma}"),
        ));
    }
    if !(2.0 * alpha + sigma < 3.0) {
        return Err(Unmet::new(
            "rejected input",
            format!("2*alpha + sigma < 3 required, got {}", 2.0 * alpha + sigma),
        ));
    }
    positive("omega1", omega1)?;
    positive("C", c_ode)?;
    positive("kernel bound constant", c_bound)?;
    let bal = balance(c, m1, m2, a, measure)?;
    let l = c.l;
    let g = bal.gamma;
    let g1 = g + 1.0;
    let sa = sigma + alpha - 1.0;
    let r = (1.0 - sigma) / (alpha - 1.0);
    let growth = (alpha - 1.0) / sa * (4.0 * bal.one_c / l) / bal.e0.powf(g) * c_bound.powf(1.0 - sigma)
        / ((1.0 - r) * (2.0 - r));
    let rate = sigma / (c_ode * sa) / (g * sa / sigma + 1.0) * bal.e0.powf(g * sa / sigma - g);
    let bracket = (2.0 * bal.one_c / (omega1 * l) + 2.0 * bal.one_c)
        + gamma_bracket(&bal, l, omega1)
        + damping_bracket(&bal, a, m2)
        + 2.0 / (c_ode * g1)
        + (1.0 + 1.0 / (2.0 * bal.epsilon_cauchy)) * (growth + rate)
        + delta_bracket(&bal, m1);
    let k = (2.0 - bal.omega) / 2.0 / bracket;
    Ok(DecayConstant {
        k,
        case: bal.case,
        gamma: g,
        epsilon_young: bal.epsilon_young,
        epsilon_cauchy: bal.epsilon_cauchy,
        delta: bal.delta,
        share: bal.share,
        bracket,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnvelopeKind {
    /// `g' ≤ −ξg`, `m₂ > 2`
    TypeIPoly,
    /// `g' ≤ −ξg`, `m ≡ 2`
    TypeIExp,
    /// `g' + Cg^α ≤ 0`, `m₂ > 2`
    #[serde(rename = "type-ii-poly")]
    TypeIIPoly,
    /// `g' + Cg^α ≤ 0`, `m ≡ 2`
    #[serde(rename = "type-ii-exp")]
    TypeIIExp,
}

/// Explicit bound `E(t) ≤ E(0)·shape(t)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayEnvelope {
    pub kind: EnvelopeKind,
    pub gamma: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub alpha: Option<f64>,
    pub sigma: Option<f64>,
    #[serde(rename = "E0")]
    pub e0: f64,
    pub m2: f64,
    #[serde(skip)]
    pub xi: Option<XiFunction>,
}

impl DecayEnvelope {
    pub fn type_one(k: f64, xi: XiFunction, e0: f64, m2: f64) -> Self {
        DecayEnvelope {
            kind: if m2 > 2.0 {
                EnvelopeKind::TypeIPoly
            } else {
                EnvelopeKind::TypeIExp
            },
            gamma: (m2 - 2.0) / 2.0,
            k,
            alpha: None,
            sigma: None,
            e0,
            m2,
            xi: Some(xi),
        }
    }

    pub fn type_two(k: f64, alpha: f64, sigma: f64, e0: f64, m2: f64) -> Self {
        DecayEnvelope {
            kind: if m2 > 2.0 {
                EnvelopeKind::TypeIIPoly
            } else {
                EnvelopeKind::TypeIIExp
            },
            gamma: (m2 - 2.0) / 2.0,
            k,
            alpha: Some(alpha),
            sigma: Some(sigma),
            e0,
            m2,
            xi: None,
        }
    }

    /// `∫₀ᵗ ξ` for Type I, `t` for Type II.
    pub fn phi(&self, t: f64) -> f64 {
        match &self.xi {
            Some(xi) => xi.cumulative(t),
            None => t,
        }
    }
}

/// Envelope value at `t`:
/// `E(0)(m₂/(2 + K(m₂−2)Φ(t)))^{2/(m₂−2)}` for `m₂ > 2`, `E(0)e^{1−KΦ(t)}`
/// for `m ≡ 2`.
pub fn envelope(t: f64, env: &DecayEnvelope) -> f64 {
    let phi = env.phi(t);
    match env.kind {
        EnvelopeKind::TypeIPoly | EnvelopeKind::TypeIIPoly => {
            let m2 = env.m2;
            env.e0 * (m2 / (2.0 + env.k * (m2 - 2.0) * phi)).powf(2.0 / (m2 - 2.0))
        }
        EnvelopeKind::TypeIExp | EnvelopeKind::TypeIIExp => env.e0 * (1.0 - env.k * phi).exp(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeVerdict {
    pub ok: bool,
    /// Largest `E(tᵢ)/envelope(tᵢ) − 1`.
    pub max_violation: f64,
    pub worst_t: f64,
    pub tolerance: f64,
    /// `envelope(tᵢ) − E(tᵢ)` per record.
    pub margins: Vec<f64>,
}

/// Check `E(tᵢ) ≤ envelope(tᵢ)·(1 + tol)` at every record, with
/// `tol = 1e-3 + scheme_allowance(dt, h)`.
pub fn verify_envelope(traj: &Trajectory, env: &DecayEnvelope) -> EnvelopeVerdict {
    let tolerance = ENVELOPE_BASE_TOL + scheme_allowance(traj.dt, traj.h);
    let mut max_violation = f64::NEG_INFINITY;
    let mut worst_t = 0.0;
    let mut margins = Vec::with_capacity(traj.records.len());
    for r in &traj.records {
        let bound = envelope(r.t, env);
        margins.push(bound - r.e);
        let v = r.e / bound - 1.0;
        if v > max_violation || v.is_nan() {
            max_violation = v;
            worst_t = r.t;
        }
    }
    EnvelopeVerdict {
        ok: traj.records.is_empty() || max_violation <= tolerance,
        max_violation,
        worst_t,
        tolerance,
        margins,
    }
}

#[cfg(test)]
#[allow(clippy::excessive_precision)] // oracle digits are kept as computed
mod tests {
    use super::*;

    fn pinned(e0: f64) -> StableSetConstants {
        StableSetConstants::new(0.3, 0.5, 1.0, 4.0, 4.0)
            .unwrap()
            .with_initial_data(e0, 0.5)
    }

    #[test]
    fn linear_case_uses_two_way_split() {
        let c = pinned(0.15);
        let k = compute_k(&c, 2.0, 2.0, 1.0, 1.0, std::f64::consts::PI.powi(2), 1.0).unwrap();
        assert_eq!(k.case, BalanceCase::Linear);
        assert_eq!(k.gamma, 0.0);
        assert!(k.epsilon_young.is_nan());
        let omega = c.omega.unwrap();
        assert!((k.share - (2.0 - omega) / 4.0).abs() < 1e-15);
        assert!(k.k > 0.0);
        // ε term equals its share
        let one_c = 1.0 + c.ctilde.unwrap();
        assert!((k.epsilon_cauchy * one_c - k.share).abs() < 1e-15);
    }

    #[test]
    fn superlinear_case_three_way_split() {
        let c = pinned(0.15);
        let k = compute_k(&c, 3.0, 4.0, 1.0, 1.0, std::f64::consts::PI.powi(2), 1.0).unwrap();
        assert_eq!(k.case, BalanceCase::Superlinear);
        assert!((k.share - (2.0 - c.omega.unwrap()) / 6.0).abs() < 1e-15 || k.share < (2.0 - c.omega.unwrap()) / 6.0);
        for v in [k.epsilon_young, k.epsilon_cauchy, k.delta] {
            assert!(v > 0.0 && v < 1.0);
        }
        let mixed = compute_k(&c, 2.0, 4.0, 1.0, 1.0, std::f64::consts::PI.powi(2), 1.0).unwrap();
        assert_eq!(mixed.case, BalanceCase::Mixed);
        assert!(mixed.k > 0.0);
    }

    #[test]
    fn k_rejects_bad_premises() {
        let outside = pinned(0.3);
        assert!(compute_k(&outside, 2.0, 2.0, 1.0, 1.0, 9.87, 1.0).is_err());
        let c = pinned(0.15);
        assert!(compute_k(&c, 2.0, 2.0, 0.0, 1.0, 9.87, 1.0).is_err());
        let no_memory = StableSetConstants::new(0.3, 1.0, 1.0, 4.0, 4.0)
            .unwrap()
            .with_initial_data(0.15, 0.5);
        let r = compute_k(&no_memory, 2.0, 2.0, 1.0, 1.0, 9.87, 1.0).unwrap_err();
        assert_eq!(r.condition, "balance coefficient vanishes");
    }

    #[test]
    fn k_alpha_sigma_constraints() {
        let c = pinned(0.15);
        let om = std::f64::consts::PI.powi(2);
        assert!(
            compute_k_alpha_sigma(&c, 2.0, 2.0, 1.0, 1.0, om, 1.4, 0.1, 2.2, 1.4)
                .unwrap()
                .k
                > 0.0
        );
        let e = compute_k_alpha_sigma(&c, 2.0, 2.0, 1.0, 1.0, om, 1.5, 0.2, 2.2, 1.4).unwrap_err();
        assert!(e.detail.contains("2*alpha + sigma < 3"));
    }

    #[test]
    fn constants_match_high_precision_evaluation() {
        // 40-digit evaluation of the same balance, independent of this crate
        let c = pinned(0.15);
        let om = std::f64::consts::PI.powi(2);
        let rel = |a: f64, b: f64| ((a - b) / b).abs();
        let cases = [
            (compute_k(&c, 2.0, 2.0, 1.0, 1.0, om, 1.0), 0.031976868754366542691),
            (compute_k(&c, 3.0, 4.0, 1.0, 1.0, om, 1.0), 0.00046578555328683435844),
            (compute_k(&c, 2.0, 4.0, 1.0, 1.0, om, 1.0), 0.00046028122998245961068),
            (
                compute_k_alpha_sigma(&c, 2.0, 2.0, 1.0, 1.0, om, 1.4, 0.1, 4.0, 0.5),
                0.014638939054789056872,
            ),
        ];
        for (k, want) in cases {
            // λ₂ is bisected to 1e-12
            assert!(rel(k.unwrap().k, want) < 1e-10);
        }
    }

    #[test]
    fn envelope_shapes() {
        let exp = DecayEnvelope::type_one(0.5, XiFunction::Constant(1.0), 2.0, 2.0);
        assert!((envelope(0.0, &exp) - 2.0 * std::f64::consts::E).abs() < 1e-14);
        assert!((envelope(3.0, &exp) - 2.0 * (1.0f64 - 1.5).exp()).abs() < 1e-14);
        let poly = DecayEnvelope::type_one(1.0, XiFunction::Constant(1.0), 1.0, 4.0);
        assert!((envelope(0.0, &poly) - 2.0).abs() < 1e-15);
        assert!((envelope(1.0, &poly) - 1.0).abs() < 1e-15);
        assert!((envelope(3.0, &poly) - 0.5).abs() < 1e-15);
        let t2 = DecayEnvelope::type_two(0.2, 1.4, 0.1, 1.0, 2.0);
        assert!((envelope(5.0, &t2) - 1.0f64.exp() * (-1.0f64).exp()).abs() < 1e-15);
    }
}
