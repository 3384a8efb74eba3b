//! Variable-exponent Lebesgue machinery on the nodal grid.
//!
//! Exponents live on the same nodes as the fields they act on and are never
//! interpolated: the modular `∫ |f|^{q(x)} dx` is the trapezoidal sum of
//! nodal values, so the energy and the norm code see the same discrete
//! object.

use serde::{Deserialize, Serialize};

use crate::domain::DomainSpec;
use crate::error::{Error, Result};

/// Default cap on exponents. Replaces `2n/(n−2)`, which has no content on
/// one- and two-dimensional domains.
pub const DEFAULT_Q_MAX: f64 = 6.0;

/// Relative tolerance of [`check_modular_norm_bounds`].
pub const SANDWICH_REL_TOL: f64 = 1e-8;

/// Absolute tolerance on `modular(f/λ) − 1` in the Luxemburg bisection.
pub const LUXEMBURG_RESIDUAL_TOL: f64 = 1e-12;

/// Log-Hölder modulus `|q(x)−q(y)| ≤ −A / log|x−y|` for `|x−y| < δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogHolderCertificate {
    pub a: f64,
    pub delta: f64,
}

/// Nodal exponent function with its essential bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentField {
    values: Vec<f64>,
    q1: f64,
    q2: f64,
    log_holder: Option<LogHolderCertificate>,
}

impl ExponentField {
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("exponent field is empty"));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "exponent field has non-finite value {v} at node {i}"
            )));
        }
        let q1 = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let q2 = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Ok(ExponentField {
            values,
            q1,
            q2,
            log_holder: None,
        })
    }

    pub fn constant(q: f64, len: usize) -> Result<Self> {
        Self::from_values(vec![q; len])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Essential infimum (grid minimum).
    pub fn q1(&self) -> f64 {
        self.q1
    }

    /// Essential supremum (grid maximum).
    pub fn q2(&self) -> f64 {
        self.q2
    }

    pub fn is_constant(&self) -> bool {
        self.q1 == self.q2
    }

    pub fn log_holder(&self) -> Option<LogHolderCertificate> {
        self.log_holder
    }

    /// Run [`log_holder_check`] and attach the certificate when it passes.
    pub fn certify_log_holder(&mut self, dom: &DomainSpec, a: f64, delta: f64) -> Result<bool> {
        let report = log_holder_check(self, dom, a, delta)?;
        self.log_holder = if report.ok && !report.vacuous {
            Some(LogHolderCertificate { a, delta })
        } else {
            None
        };
        Ok(self.log_holder.is_some())
    }
}

/// Named exponent profiles accepted by the run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "kebab-case")]
pub enum ExponentProfile {
    /// `q(x) ≡ value`.
    Const { value: f64 },
    /// Linear ramp along the first axis from `from` at `x = 0` to `to` at `x = L₁`.
    Linear { from: f64, to: f64 },
    /// `base + amplitude · Πᵢ sin²(π xᵢ / Lᵢ)`.
    SineBump { base: f64, amplitude: f64 },
    /// Explicit nodal values, length equal to the node count.
    Nodal { values: Vec<f64> },
}

impl ExponentProfile {
    pub fn build(&self, dom: &DomainSpec) -> Result<ExponentField> {
        let lengths = dom.lengths().to_vec();
        let dim = dom.dim();
        let values = match self {
            ExponentProfile::Const { value } => vec![*value; dom.len()],
            ExponentProfile::Linear { from, to } => dom.sample(|x| from + (to - from) * x[0] / lengths[0]).into_vec(),
            ExponentProfile::SineBump { base, amplitude } => dom
                .sample(|x| {
                    let bump: f64 = (0..dim)
                        .map(|k| (std::f64::consts::PI * x[k] / lengths[k]).sin().powi(2))
                        .product();
                    base + amplitude * bump
                })
                .into_vec(),
            ExponentProfile::Nodal { values } => {
                dom.check_len(values.len(), "nodal exponent profile")?;
                values.clone()
            }
        };
        ExponentField::from_values(values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Offender {
    pub node: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub q1: f64,
    pub q2: f64,
    pub q_max: f64,
    /// Node farthest outside `[2, q_max]`, if any.
    pub worst: Option<Offender>,
}

/// Check `2 ≤ q(x) ≤ q_max` at every node.
pub fn validate_exponent_bounds(field: &ExponentField, q_max: f64) -> ValidationReport {
    let mut worst: Option<(f64, Offender)> = None;
    for (node, &value) in field.values.iter().enumerate() {
        let excess = (2.0 - value).max(value - q_max);
        if excess > 0.0 && worst.is_none_or(|(e, _)| excess > e) {
            worst = Some((excess, Offender { node, value }));
        }
    }
    ValidationReport {
        ok: worst.is_none(),
        q1: field.q1,
        q2: field.q2,
        q_max,
        worst: worst.map(|(_, o)| o),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogHolderReport {
    pub ok: bool,
    /// No node pair lies closer than `delta`; nothing was tested.
    pub vacuous: bool,
    pub worst_pair: Option<(usize, usize)>,
    /// `max |q(x)−q(y)|·(−log|x−y|)` over tested pairs.
    pub a_required: f64,
}

/// Sweep all node pairs with `0 < |x−y| < delta`.
pub fn log_holder_check(field: &ExponentField, dom: &DomainSpec, a: f64, delta: f64) -> Result<LogHolderReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta must lie in (0,1), got {delta}")));
    }
    if !(a > 0.0) {
        return Err(Error::invalid(format!("A must be positive, got {a}")));
    }
    dom.check_len(field.values.len(), "exponent field")?;
    if delta <= dom.min_spacing() {
        return Ok(LogHolderReport {
            ok: true,
            vacuous: true,
            worst_pair: None,
            a_required: 0.0,
        });
    }

    let q = &field.values;
    let nx = dom.nodes()[0];
    let ny = if dom.dim() == 2 { dom.nodes()[1] } else { 1 };
    let hx = dom.spacing(0);
    let hy = if dom.dim() == 2 { dom.spacing(1) } else { 1.0 };
    let kx = (delta / hx).ceil() as isize;
    let ky = if dom.dim() == 2 {
        (delta / hy).ceil() as isize
    } else {
        0
    };

    let mut a_required = 0.0_f64;
    let mut worst_pair = None;
    for j in 0..ny as isize {
        for i in 0..nx as isize {
            let k = (j as usize) * nx + i as usize;
            for dj in 0..=ky {
                let j2 = j + dj;
                if j2 >= ny as isize {
                    break;
                }
                let di_start = if dj == 0 { 1 } else { -kx };
                for di in di_start..=kx {
                    let i2 = i + di;
                    if i2 < 0 || i2 >= nx as isize {
                        continue;
                    }
                    let dist = ((di as f64 * hx).powi(2) + (dj as f64 * hy).powi(2)).sqrt();
                    if dist >= delta {
                        continue;
                    }
                    let k2 = (j2 as usize) * nx + i2 as usize;
                    let lhs = (q[k] - q[k2]).abs() * (-dist.ln());
                    if lhs > a_required {
                        a_required = lhs;
                        worst_pair = Some((k.min(k2), k.max(k2)));
                    }
                }
            }
        }
    }
    Ok(LogHolderReport {
        ok: a_required <= a,
        vacuous: false,
        worst_pair,
        a_required,
    })
}

fn check_pair(f: &[f64], q: &ExponentField, dom: &DomainSpec) -> Result<()> {
    dom.check_len(f.len(), "field")?;
    dom.check_len(q.values.len(), "exponent field")
}

fn modular_scaled(f: &[f64], q: &[f64], dom: &DomainSpec, inv_scale: f64) -> f64 {
    f.iter()
        .zip(q)
        .zip(dom.weights())
        .map(|((v, e), w)| {
            let a = (v * inv_scale).abs();
            if a == 0.0 {
                0.0
            } else {
                w * a.powf(*e)
            }
        })
        .sum()
}

/// Trapezoidal `∫_Ω |f(x)|^{q(x)} dx`.
pub fn modular(f: &[f64], q: &ExponentField, dom: &DomainSpec) -> Result<f64> {
    check_pair(f, q, dom)?;
    Ok(modular_scaled(f, &q.values, dom, 1.0))
}

/// Luxemburg norm: the `λ` with `modular(f/λ) = 1`, by bisection.
pub fn luxemburg_norm(f: &[f64], q: &ExponentField, dom: &DomainSpec) -> Result<f64> {
    check_pair(f, q, dom)?;
    let m = modular_scaled(f, &q.values, dom, 1.0);
    if m == 0.0 {
        return Ok(0.0);
    }
    if !m.is_finite() {
        return Err(Error::numerical("luxemburg_norm", format!("modular is {m}")));
    }
    let rho = |lambda: f64| modular_scaled(f, &q.values, dom, 1.0 / lambda) - 1.0;

    // modular(f/λ) is decreasing in λ; the sandwich puts the root between
    // m^{1/q₂} and m^{1/q₁} (in some order).
    let (e1, e2) = (m.powf(1.0 / q.q1), m.powf(1.0 / q.q2));
    let mut lo = e1.min(e2) / 2.0;
    let mut hi = e1.max(e2) * 2.0;
    let mut expansions = 0;
    while !(rho(lo) >= 0.0 && rho(hi) <= 0.0) {
        expansions += 1;
        if expansions > 200 {
            return Err(Error::numerical(
                "luxemburg_norm",
                format!(
                    "no sign change in [{lo:e}, {hi:e}] after {expansions} expansions (modular {m:e}, q1 {}, q2 {})",
                    q.q1, q.q2
                ),
            ));
        }
        lo /= 2.0;
        hi *= 2.0;
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        let r = rho(mid);
        if r.abs() <= LUXEMBURG_RESIDUAL_TOL || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if r > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Check `min{‖f‖^{q₁},‖f‖^{q₂}} ≤ ∫|f|^{q(x)} ≤ max{‖f‖^{q₁},‖f‖^{q₂}}`.
pub fn check_modular_norm_bounds(f: &[f64], q: &ExponentField, dom: &DomainSpec) -> Result<bool> {
    let m = modular(f, q, dom)?;
    let n = luxemburg_norm(f, q, dom)?;
    let (a, b) = (n.powf(q.q1), n.powf(q.q2));
    let (lo, hi) = (a.min(b), a.max(b));
    Ok(m >= lo * (1.0 - SANDWICH_REL_TOL) && m <= hi * (1.0 + SANDWICH_REL_TOL))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn unit(n: usize) -> DomainSpec {
        DomainSpec::interval(1.0, n).unwrap()
    }

    #[test]
    fn bounds_validation() {
        let d = unit(11);
        let two = ExponentField::constant(2.0, d.len()).unwrap();
        assert!(validate_exponent_bounds(&two, 6.0).ok);

        let low = ExponentField::constant(1.5, d.len()).unwrap();
        let r = validate_exponent_bounds(&low, 6.0);
        assert!(!r.ok);
        assert_eq!(r.worst.unwrap().value, 1.5);

        let d = unit(101);
        let bump = ExponentProfile::SineBump {
            base: 2.0,
            amplitude: 1.0,
        }
        .build(&d)
        .unwrap();
        let r = validate_exponent_bounds(&bump, 3.0);
        assert!(r.ok);
        assert_eq!(r.q1, 2.0);
        assert!((r.q2 - 3.0).abs() < 1e-15);
    }

    #[test]
    fn empty_or_non_finite_exponent_rejected() {
        assert!(ExponentField::from_values(vec![]).is_err());
        assert!(ExponentField::from_values(vec![2.0, f64::NAN]).is_err());
    }

    #[test]
    fn worst_offender_is_farthest_outside() {
        let q = ExponentField::from_values(vec![2.0, 1.9, 7.5, 1.0, 6.5]).unwrap();
        let r = validate_exponent_bounds(&q, 6.0);
        assert_eq!(r.worst.unwrap().node, 2);
    }

    #[test]
    fn log_holder_constant_and_step() {
        let d = unit(101);
        let c = ExponentField::constant(3.0, d.len()).unwrap();
        let r = log_holder_check(&c, &d, 0.1, 0.5).unwrap();
        assert!(r.ok && !r.vacuous);
        assert_eq!(r.a_required, 0.0);

        let step: Vec<f64> = (0..101).map(|i| if i < 50 { 2.0 } else { 3.0 }).collect();
        let s = ExponentField::from_values(step).unwrap();
        let r = log_holder_check(&s, &d, 1.0, 0.5).unwrap();
        assert!((r.a_required - (-(0.01f64).ln())).abs() < 1e-9, "{}", r.a_required);
        assert_eq!(r.worst_pair, Some((49, 50)));
        assert!(!r.ok);
    }

    #[test]
    fn log_holder_linear_ramp() {
        // max over grid distances d of d·(−ln d), near d = 1/e
        let d = unit(101);
        let q = ExponentProfile::Linear { from: 2.0, to: 3.0 }.build(&d).unwrap();
        let r = log_holder_check(&q, &d, 1.0, 0.5).unwrap();
        let brute = (1..50)
            .map(|k| {
                let t = k as f64 * 0.01;
                t * -t.ln()
            })
            .fold(0.0, f64::max);
        assert!((r.a_required - brute).abs() < 1e-12);
        assert!((r.a_required - 0.3679).abs() < 1e-4);
    }

    #[test]
    fn log_holder_vacuous_and_errors() {
        let d = unit(11);
        let q = ExponentField::constant(2.0, d.len()).unwrap();
        let r = log_holder_check(&q, &d, 1.0, 0.05).unwrap();
        assert!(r.vacuous);
        assert!(log_holder_check(&q, &d, 1.0, 1.5).is_err());
        assert!(log_holder_check(&q, &d, 0.0, 0.5).is_err());
    }

    #[test]
    fn log_holder_two_dimensional_matches_brute_force() {
        let d = DomainSpec::rectangle([1.0, 1.0], [9, 7]).unwrap();
        let q = d.sample(|[x, y]| 2.0 + x * x + 0.5 * y);
        let field = ExponentField::from_values(q.into_vec()).unwrap();
        let r = log_holder_check(&field, &d, 1.0, 0.4).unwrap();
        let mut brute = 0.0_f64;
        for a in 0..d.len() {
            for b in a + 1..d.len() {
                let (pa, pb) = (d.coords(a), d.coords(b));
                let dist = ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2)).sqrt();
                if dist < 0.4 {
                    brute = brute.max((field.values[a] - field.values[b]).abs() * -dist.ln());
                }
            }
        }
        assert!((r.a_required - brute).abs() < 1e-14);
    }

    #[test]
    fn modular_examples() {
        let d = DomainSpec::interval(2.0, 21).unwrap();
        let q = ExponentProfile::Linear { from: 2.0, to: 5.0 }.build(&d).unwrap();
        let ones = vec![1.0; d.len()];
        assert!((modular(&ones, &q, &d).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(modular(&vec![0.0; d.len()], &q, &d).unwrap(), 0.0);

        let u = unit(11);
        let q3 = ExponentField::constant(3.0, u.len()).unwrap();
        assert!((modular(&[2.0; 11], &q3, &u).unwrap() - 8.0).abs() < 1e-13);
        assert!(modular(&[2.0; 10], &q3, &u).is_err());
    }

    #[test]
    fn luxemburg_examples() {
        let u = unit(11);
        let q = ExponentField::constant(3.5, u.len()).unwrap();
        let n = luxemburg_norm(&[0.7; 11], &q, &u).unwrap();
        assert!((n - 0.7).abs() < 1e-12);
        assert_eq!(luxemburg_norm(&[0.0; 11], &q, &u).unwrap(), 0.0);

        let d4 = DomainSpec::interval(4.0, 41).unwrap();
        let q2 = ExponentField::constant(2.0, d4.len()).unwrap();
        let n = luxemburg_norm(&[1.0; 41], &q2, &d4).unwrap();
        assert!((n - 2.0).abs() < 1e-12);
    }

    #[test]
    fn luxemburg_residual_is_unit() {
        let d = unit(101);
        let q = ExponentProfile::Linear { from: 2.0, to: 3.0 }.build(&d).unwrap();
        let f = d.sample(|[x, _]| 3.0 * (PI * x).sin() + 0.2);
        let n = luxemburg_norm(&f, &q, &d).unwrap();
        let scaled: Vec<f64> = f.iter().map(|v| v / n).collect();
        assert!((modular(&scaled, &q, &d).unwrap() - 1.0).abs() < 1e-10);
        assert!(check_modular_norm_bounds(&f, &q, &d).unwrap());
    }

    #[test]
    fn sandwich_trivial_cases() {
        let d = unit(21);
        let q = ExponentField::constant(4.0, d.len()).unwrap();
        assert!(check_modular_norm_bounds(&[0.0; 21], &q, &d).unwrap());
        let f = d.sample(|[x, _]| 1.0 + x);
        assert!(check_modular_norm_bounds(&f, &q, &d).unwrap());
    }

    #[test]
    fn modular_converges_at_second_order() {
        // ∫₀¹ (1+x)^{2+x} dx, smooth integrand; errors shrink ~4× per halving
        let err_at = |n: usize| {
            let fine = unit(20001);
            let qf = ExponentProfile::Linear { from: 2.0, to: 3.0 }.build(&fine).unwrap();
            let reference = modular(&fine.sample(|[x, _]| 1.0 + x), &qf, &fine).unwrap();
            let d = unit(n);
            let q = ExponentProfile::Linear { from: 2.0, to: 3.0 }.build(&d).unwrap();
            (modular(&d.sample(|[x, _]| 1.0 + x), &q, &d).unwrap() - reference).abs()
        };
        let (e1, e2) = (err_at(21), err_at(41));
        let order = (e1 / e2).log2();
        assert!(order > 1.9 && order < 2.1, "observed order {order}");
    }

    #[test]
    fn profiles_build() {
        let d = DomainSpec::rectangle([2.0, 1.0], [5, 3]).unwrap();
        let q = ExponentProfile::Linear { from: 2.0, to: 4.0 }.build(&d).unwrap();
        assert_eq!(q.q1(), 2.0);
        assert_eq!(q.q2(), 4.0);
        let bad = ExponentProfile::Nodal { values: vec![2.0; 3] }.build(&d);
        assert!(bad.is_err());
    }

    #[test]
    fn certificate_attached_only_when_check_passes() {
        let d = unit(101);
        let mut q = ExponentProfile::Linear { from: 2.0, to: 3.0 }.build(&d).unwrap();
        assert!(q.certify_log_holder(&d, 0.5, 0.5).unwrap());
        assert_eq!(q.log_holder().unwrap().a, 0.5);
        assert!(!q.certify_log_holder(&d, 0.3, 0.5).unwrap());
        assert!(q.log_holder().is_none());
    }
}
