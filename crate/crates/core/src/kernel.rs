//! Relaxation kernels `g(t)` of the memory term and their decay classes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance of [`decay_class_check`], relative to `g(0)`.
pub const DECAY_CLASS_REL_TOL: f64 = 1e-8;

/// Analytic continuation of a sampled kernel beyond its last sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TailModel {
    /// `g(t) = g_N e^{−rate (t − t_N)}`.
    Exponential { rate: f64 },
    /// `g(t) = g_N ((1+t)/(1+t_N))^{−exponent}`, `exponent > 1`.
    Power { exponent: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelKind {
    /// `g ≡ 0`: no memory. Not admissible; used to isolate the wave part.
    Zero,
    /// `g(t) = g0 e^{−k t}`, so `g' = −k g` and `ξ ≡ k`.
    ExponentialXi { g0: f64, k: f64 },
    /// `g(t) = (g0^{1−α} + C(α−1)t)^{−1/(α−1)}`, the exact solution of
    /// `g' + C g^α = 0`.
    PowerLaw { g0: f64, c: f64, alpha: f64 },
    /// User-sampled `g` and `ξ` on a uniform time grid starting at 0.
    GeneralXi {
        t: Vec<f64>,
        g: Vec<f64>,
        xi: Vec<f64>,
        tail: Option<TailModel>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelaxationKernel {
    kind: KernelKind,
    total_mass: Option<f64>,
}

/// Rate function `ξ(t)` of a Type I kernel.
#[derive(Debug, Clone, PartialEq)]
pub enum XiFunction {
    Constant(f64),
    /// `ξ(t) = C g(t)^{α−1}` for a power-law kernel: nonincreasing with a
    /// logarithmically divergent integral.
    PowerLawRate {
        g0: f64,
        c: f64,
        alpha: f64,
    },
    /// Linear interpolation of samples, held constant past the last one.
    Sampled {
        t: Vec<f64>,
        xi: Vec<f64>,
    },
}

impl XiFunction {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            XiFunction::Constant(k) => *k,
            XiFunction::PowerLawRate { g0, c, alpha } => c * power_law_g(*g0, *c, *alpha, t).powf(alpha - 1.0),
            XiFunction::Sampled { t: ts, xi } => interp(ts, xi, t),
        }
    }

    /// `ξ(0)`.
    pub fn xi0(&self) -> f64 {
        self.eval(0.0)
    }

    /// `∫₀ᵗ ξ(s) ds`.
    pub fn cumulative(&self, t: f64) -> f64 {
        match self {
            XiFunction::Constant(k) => k * t,
            XiFunction::PowerLawRate { g0, c, alpha } => {
                let rate = c * (alpha - 1.0);
                (1.0 + rate * t / g0.powf(1.0 - alpha)).ln() / (alpha - 1.0)
            }
            XiFunction::Sampled { t: ts, xi } => {
                let mut acc = 0.0;
                for i in 0..ts.len() - 1 {
                    if t <= ts[i] {
                        return acc;
                    }
                    let right = t.min(ts[i + 1]);
                    let xr = interp(ts, xi, right);
                    acc += 0.5 * (xi[i] + xr) * (right - ts[i]);
                    if t <= ts[i + 1] {
                        return acc;
                    }
                }
                acc + xi[xi.len() - 1] * (t - ts[ts.len() - 1])
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            XiFunction::Constant(k) if !(*k > 0.0 && k.is_finite()) => {
                Err(Error::invalid(format!("constant xi must be positive, got {k}")))
            }
            XiFunction::Sampled { t, xi } => {
                if t.len() != xi.len() || t.len() < 2 {
                    return Err(Error::invalid("sampled xi needs matching t/xi arrays of length >= 2"));
                }
                if !(xi[0] > 0.0) {
                    return Err(Error::invalid("xi(0) must be positive"));
                }
                if xi.windows(2).any(|w| w[1] > w[0]) || xi.iter().any(|v| *v < 0.0) {
                    return Err(Error::invalid("sampled xi must be nonnegative and nonincreasing"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

fn interp(ts: &[f64], vs: &[f64], t: f64) -> f64 {
    if t <= ts[0] {
        return vs[0];
    }
    let n = ts.len();
    if t >= ts[n - 1] {
        return vs[n - 1];
    }
    let h = ts[1] - ts[0];
    let i = (((t - ts[0]) / h).floor() as usize).min(n - 2);
    let s = (t - ts[i]) / (ts[i + 1] - ts[i]);
    vs[i] + s * (vs[i + 1] - vs[i])
}

fn power_law_g(g0: f64, c: f64, alpha: f64, t: f64) -> f64 {
    (g0.powf(1.0 - alpha) + c * (alpha - 1.0) * t).powf(-1.0 / (alpha - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Admissibility {
    /// `1 − ∫₀^∞ g`; `None` when the infinite mass is unavailable.
    pub l: Option<f64>,
    pub g0_positive: bool,
    pub nonincreasing: bool,
    pub ok: bool,
}

impl RelaxationKernel {
    pub fn new(kind: KernelKind) -> Result<Self> {
        let pos = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be positive and finite, got {v}")))
            }
        };
        match &kind {
            KernelKind::Zero => {}
            KernelKind::ExponentialXi { g0, k } => {
                pos("g0", *g0)?;
                pos("k", *k)?;
            }
            KernelKind::PowerLaw { g0, c, alpha } => {
                pos("g0", *g0)?;
                pos("C", *c)?;
                if !(*alpha > 1.0 && *alpha < 2.0) {
                    return Err(Error::invalid(format!("alpha must lie in (1,2), got {alpha}")));
                }
            }
            KernelKind::GeneralXi { t, g, xi, tail } => {
                if t.len() < 2 || g.len() != t.len() || xi.len() != t.len() {
                    return Err(Error::invalid(
                        "sampled kernel needs t, g and xi arrays of equal length >= 2",
                    ));
                }
                if t[0] != 0.0 {
                    return Err(Error::invalid("sampled kernel must start at t = 0"));
                }
                let h = t[1] - t[0];
                if !(h > 0.0) || t.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h) {
                    return Err(Error::invalid(
                        "sampled kernel times must be uniformly spaced and increasing",
                    ));
                }
                if g.iter().chain(xi.iter()).any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(Error::invalid("sampled kernel values must be finite and nonnegative"));
                }
                match tail {
                    Some(TailModel::Exponential { rate }) => pos("tail rate", *rate)?,
                    Some(TailModel::Power { exponent }) if !(*exponent > 1.0) => {
                        return Err(Error::invalid(format!(
                            "power tail exponent must exceed 1 for a finite mass, got {exponent}"
                        )))
                    }
                    _ => {}
                }
                XiFunction::Sampled {
                    t: t.clone(),
                    xi: xi.clone(),
                }
                .validate()?;
            }
        }
        let mut kernel = RelaxationKernel { kind, total_mass: None };
        kernel.total_mass = kernel.mass_to(f64::INFINITY).ok();
        Ok(kernel)
    }

    pub fn zero() -> Self {
        RelaxationKernel {
            kind: KernelKind::Zero,
            total_mass: Some(0.0),
        }
    }

    pub fn exponential(g0: f64, k: f64) -> Result<Self> {
        Self::new(KernelKind::ExponentialXi { g0, k })
    }

    pub fn power_law(g0: f64, c: f64, alpha: f64) -> Result<Self> {
        Self::new(KernelKind::PowerLaw { g0, c, alpha })
    }

    pub fn sampled(t: Vec<f64>, g: Vec<f64>, xi: Vec<f64>, tail: Option<TailModel>) -> Result<Self> {
        Self::new(KernelKind::GeneralXi { t, g, xi, tail })
    }

    pub fn kind(&self) -> &KernelKind {
        &self.kind
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, KernelKind::Zero)
    }

    /// `g(t)` for `t ≥ 0` (no argument check).
    pub(crate) fn g(&self, t: f64) -> f64 {
        match &self.kind {
            KernelKind::Zero => 0.0,
            KernelKind::ExponentialXi { g0, k } => g0 * (-k * t).exp(),
            KernelKind::PowerLaw { g0, c, alpha } => power_law_g(*g0, *c, *alpha, t),
            KernelKind::GeneralXi { t: ts, g, tail, .. } => {
                let n = ts.len();
                let t_last = ts[n - 1];
                if t <= t_last {
                    return interp(ts, g, t);
                }
                let g_last = g[n - 1];
                match tail {
                    Some(TailModel::Exponential { rate }) => g_last * (-rate * (t - t_last)).exp(),
                    Some(TailModel::Power { exponent }) => g_last * ((1.0 + t) / (1.0 + t_last)).powf(-exponent),
                    None => g_last,
                }
            }
        }
    }

    /// Evaluate `g(t)`.
    pub fn eval_g(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::invalid(format!("kernel evaluated at negative time {t}")));
        }
        Ok(self.g(t))
    }

    pub fn g0(&self) -> f64 {
        self.g(0.0)
    }

    /// `g'(t)`: analytic for closed-form kinds, central difference with
    /// spacing `fd_step` for sampled kernels (one-sided at `t = 0`).
    pub fn g_prime(&self, t: f64, fd_step: f64) -> f64 {
        match &self.kind {
            KernelKind::Zero => 0.0,
            KernelKind::ExponentialXi { k, .. } => -k * self.g(t),
            KernelKind::PowerLaw { c, alpha, .. } => -c * self.g(t).powf(*alpha),
            KernelKind::GeneralXi { .. } => {
                let h = fd_step;
                if t >= h {
                    (self.g(t + h) - self.g(t - h)) / (2.0 * h)
                } else {
                    (-3.0 * self.g(t) + 4.0 * self.g(t + h) - self.g(t + 2.0 * h)) / (2.0 * h)
                }
            }
        }
    }

    /// `∫₀ᵗ g(s) ds`; `t` may be `f64::INFINITY`.
    pub fn kernel_mass(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::invalid(format!("kernel mass requested up to negative time {t}")));
        }
        if t.is_infinite() {
            if let Some(m) = self.total_mass {
                return Ok(m);
            }
        }
        self.mass_to(t)
    }

    fn mass_to(&self, t: f64) -> Result<f64> {
        match &self.kind {
            KernelKind::Zero => Ok(0.0),
            KernelKind::ExponentialXi { g0, k } => {
                if t.is_infinite() {
                    Ok(g0 / k)
                } else {
                    Ok(g0 / k * (-(-k * t).exp_m1()))
                }
            }
            KernelKind::PowerLaw { g0, c, alpha } => {
                // ∫₀ᵗ A(s)^{−β} ds with A(s) = g0^{1−α} + C(α−1)s, β = 1/(α−1);
                // (β−1)·C(α−1) = C(2−α).
                let beta = 1.0 / (alpha - 1.0);
                let a0 = g0.powf(1.0 - alpha);
                let denom = c * (2.0 - alpha);
                let head = a0.powf(1.0 - beta);
                if t.is_infinite() {
                    Ok(head / denom)
                } else {
                    let at = a0 + c * (alpha - 1.0) * t;
                    Ok((head - at.powf(1.0 - beta)) / denom)
                }
            }
            KernelKind::GeneralXi { t: ts, g, tail, .. } => sampled_mass(ts, g, tail.as_ref(), t),
        }
    }

    /// Check `g(0) > 0`, monotonicity of samples and `l > 0`.
    pub fn admissibility(&self) -> Admissibility {
        let g0_positive = self.g0() > 0.0;
        let nonincreasing = match &self.kind {
            KernelKind::GeneralXi { g, .. } => g.windows(2).all(|w| w[1] <= w[0]),
            _ => true,
        };
        let l = self.total_mass.map(|m| 1.0 - m);
        Admissibility {
            l,
            g0_positive,
            nonincreasing,
            ok: g0_positive && nonincreasing && l.is_some_and(|l| l > 0.0),
        }
    }

    /// `l = 1 − ∫₀^∞ g`, if the total mass is known.
    pub fn l(&self) -> Option<f64> {
        self.total_mass.map(|m| 1.0 - m)
    }

    /// Natural Type I rate: `k` for exponential kernels, `C g^{α−1}` for
    /// power laws, the supplied samples for sampled kernels.
    pub fn xi(&self) -> Option<XiFunction> {
        match &self.kind {
            KernelKind::Zero => None,
            KernelKind::ExponentialXi { k, .. } => Some(XiFunction::Constant(*k)),
            KernelKind::PowerLaw { g0, c, alpha } => Some(XiFunction::PowerLawRate {
                g0: *g0,
                c: *c,
                alpha: *alpha,
            }),
            KernelKind::GeneralXi { t, xi, .. } => Some(XiFunction::Sampled {
                t: t.clone(),
                xi: xi.clone(),
            }),
        }
    }

    /// For a power-law kernel, the smallest `C'` with
    /// `g(t) ≤ C'(1+t)^{−1/(α−1)}` for all `t ≥ 0`:
    /// `(1+t)/A(t)` is monotone, so the supremum sits at `t = 0` or `t → ∞`.
    pub fn power_law_envelope_constant(&self) -> Option<f64> {
        match self.kind {
            KernelKind::PowerLaw { g0, c, alpha } => {
                let beta = 1.0 / (alpha - 1.0);
                Some(g0.max((c * (alpha - 1.0)).powf(-beta)))
            }
            _ => None,
        }
    }
}

/// Mass of a sampled kernel: exact integral of the piecewise quadratic
/// through consecutive sample triples (composite Simpson at even nodes, a
/// trapezoid on a trailing odd interval) plus the closed-form tail.
fn sampled_mass(ts: &[f64], g: &[f64], tail: Option<&TailModel>, t: f64) -> Result<f64> {
    let n = ts.len();
    let h = ts[1] - ts[0];
    let t_last = ts[n - 1];
    let upto = t.min(t_last);
    let mut acc = 0.0;
    let mut i = 0;
    while i < n - 1 {
        if i + 2 < n {
            let (a, b, c) = (g[i], g[i + 1], g[i + 2]);
            if upto >= ts[i + 2] {
                acc += h / 3.0 * (a + 4.0 * b + c);
                i += 2;
                continue;
            }
            // ∫₀^{x} of the quadratic through (0,a),(h,b),(2h,c), x = upto − tᵢ
            let x = upto - ts[i];
            let s = x / h;
            let d1 = b - a;
            let d2 = c - 2.0 * b + a;
            acc += h * (a * s + d1 * s * s / 2.0 + d2 * (s * s * s / 6.0 - s * s / 4.0));
            break;
        }
        let x = upto - ts[i];
        let gx = g[i] + (g[i + 1] - g[i]) * x / h;
        acc += 0.5 * (g[i] + gx) * x;
        break;
    }
    if t <= t_last {
        return Ok(acc);
    }
    let g_last = g[n - 1];
    let tail_mass = match tail {
        Some(TailModel::Exponential { rate }) => {
            if t.is_infinite() {
                g_last / rate
            } else {
                g_last / rate * (-(-rate * (t - t_last)).exp_m1())
            }
        }
        Some(TailModel::Power { exponent }) => {
            let scale = g_last * (1.0 + t_last) / (exponent - 1.0);
            if t.is_infinite() {
                scale
            } else {
                scale * (1.0 - ((1.0 + t) / (1.0 + t_last)).powf(1.0 - exponent))
            }
        }
        None => {
            return Err(Error::invalid(format!(
                "sampled kernel has no tail model; mass beyond t = {t_last} needs one"
            )))
        }
    };
    Ok(acc + tail_mass)
}

/// Parse a two- or three-column sample table `t, g[, ξ]`, separated by
/// commas or whitespace. Lines starting with `#` and a non-numeric header
/// line are skipped.
#[allow(clippy::type_complexity)]
pub fn parse_samples(text: &str) -> Result<(Vec<f64>, Vec<f64>, Option<Vec<f64>>)> {
    let mut t = Vec::new();
    let mut g = Vec::new();
    let mut xi = Vec::new();
    let mut columns = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        let nums: std::result::Result<Vec<f64>, _> = parts.iter().map(|s| s.parse::<f64>()).collect();
        let nums = match nums {
            Ok(v) => v,
            Err(_) if t.is_empty() && columns.is_none() => continue,
            Err(e) => return Err(Error::invalid(format!("sample line {}: {e}", lineno + 1))),
        };
        if !(nums.len() == 2 || nums.len() == 3) {
            return Err(Error::invalid(format!(
                "sample line {}: expected 2 or 3 columns, got {}",
                lineno + 1,
                nums.len()
            )));
        }
        if *columns.get_or_insert(nums.len()) != nums.len() {
            return Err(Error::invalid(format!(
                "sample line {}: inconsistent column count",
                lineno + 1
            )));
        }
        t.push(nums[0]);
        g.push(nums[1]);
        if nums.len() == 3 {
            xi.push(nums[2]);
        }
    }
    if t.is_empty() {
        return Err(Error::invalid("sample table is empty"));
    }
    Ok((t, g, if xi.is_empty() { None } else { Some(xi) }))
}

/// Decay hypothesis tested by [`decay_class_check`].
#[derive(Debug, Clone, PartialEq)]
pub enum DecayClass {
    /// `g'(t) ≤ −ξ(t) g(t)`.
    TypeI(XiFunction),
    /// `g'(t) + C g^α(t) ≤ 0`, `1 < α < 2`.
    TypeII { c: f64, alpha: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayClassReport {
    pub ok: bool,
    pub worst_t: f64,
    /// Largest value of the left-hand side (`g' + ξg` or `g' + Cg^α`).
    pub worst_residual: f64,
    pub tolerance: f64,
}

/// Three-point derivative of samples on an arbitrary increasing grid:
/// central in the interior, second-order one-sided at both ends.
pub(crate) fn three_point_derivative(t: &[f64], g: &[f64]) -> Vec<f64> {
    let n = t.len();
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        let (h1, h2) = (t[i] - t[i - 1], t[i + 1] - t[i]);
        d[i] = -h2 / (h1 * (h1 + h2)) * g[i - 1] + (h2 - h1) / (h1 * h2) * g[i] + h1 / (h2 * (h1 + h2)) * g[i + 1];
    }
    let (h1, h2) = (t[1] - t[0], t[2] - t[1]);
    d[0] = -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * g[0] + (h1 + h2) / (h1 * h2) * g[1] - h1 / (h2 * (h1 + h2)) * g[2];
    let (h1, h2) = (t[n - 2] - t[n - 3], t[n - 1] - t[n - 2]);
    d[n - 1] = h2 / (h1 * (h1 + h2)) * g[n - 3] - (h1 + h2) / (h1 * h2) * g[n - 2]
        + (2.0 * h2 + h1) / (h2 * (h1 + h2)) * g[n - 1];
    d
}

/// Check a decay hypothesis at every grid time, with `g'` from finite
/// differences of `g` on the grid itself.
pub fn decay_class_check(kernel: &RelaxationKernel, class: &DecayClass, grid: &[f64]) -> Result<DecayClassReport> {
    if grid.len() < 3 {
        return Err(Error::invalid("decay class check needs at least 3 grid times"));
    }
    if grid[0] < 0.0 || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid(
            "decay class grid must be nonnegative and strictly increasing",
        ));
    }
    if let DecayClass::TypeII { alpha, c } = class {
        if !(*alpha > 1.0 && *alpha < 2.0) {
            return Err(Error::invalid(format!("Type II alpha must lie in (1,2), got {alpha}")));
        }
        if !(*c > 0.0) {
            return Err(Error::invalid(format!("Type II constant C must be positive, got {c}")));
        }
    }
    let g: Vec<f64> = grid.iter().map(|&t| kernel.g(t)).collect();
    let dg = three_point_derivative(grid, &g);
    let tolerance = DECAY_CLASS_REL_TOL * kernel.g0();
    let mut worst_t = grid[0];
    let mut worst_residual = f64::NEG_INFINITY;
    for ((&t, &gv), &d) in grid.iter().zip(&g).zip(&dg) {
        let r = match class {
            DecayClass::TypeI(xi) => d + xi.eval(t) * gv,
            DecayClass::TypeII { c, alpha } => d + c * gv.powf(*alpha),
        };
        if r > worst_residual {
            worst_residual = r;
            worst_t = t;
        }
    }
    Ok(DecayClassReport {
        ok: worst_residual <= tolerance,
        worst_t,
        worst_residual,
        tolerance,
    })
}

/// Largest kernel mass compatible with the finite-time blow-up result:
/// `(p₁/2 − 1) / (p₁/2 − 1 + 1/(2p₁))`.
pub fn blowup_mass_bound(p1: f64) -> Result<f64> {
    if !(p1 > 2.0) || !p1.is_finite() {
        return Err(Error::invalid(format!("blow-up mass bound needs p1 > 2, got {p1}")));
    }
    let a = p1 / 2.0 - 1.0;
    Ok(a / (a + 1.0 / (2.0 * p1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(t_end: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| t_end * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn evaluation() {
        let e = RelaxationKernel::exponential(0.5, 1.0).unwrap();
        assert_eq!(e.eval_g(0.0).unwrap(), 0.5);
        assert!((e.eval_g(2f64.ln()).unwrap() - 0.25).abs() < 1e-15);
        assert!(e.eval_g(-1.0).is_err());

        let p = RelaxationKernel::power_law(0.5, 2.0 * 2f64.sqrt(), 1.5).unwrap();
        assert!((p.eval_g(1.0).unwrap() - 0.125).abs() < 1e-15);
        assert!((p.eval_g(3.0).unwrap() - 0.5 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn masses_and_admissibility() {
        let e = RelaxationKernel::exponential(0.5, 1.0).unwrap();
        assert_eq!(e.kernel_mass(f64::INFINITY).unwrap(), 0.5);
        assert!((e.kernel_mass(2f64.ln()).unwrap() - 0.25).abs() < 1e-15);
        let a = e.admissibility();
        assert!(a.ok);
        assert_eq!(a.l, Some(0.5));

        let heavy = RelaxationKernel::exponential(2.0, 1.0).unwrap();
        let a = heavy.admissibility();
        assert!(!a.ok);
        assert_eq!(a.l, Some(-1.0));

        let p = RelaxationKernel::power_law(0.5, 2.0 * 2f64.sqrt(), 1.5).unwrap();
        assert!((p.kernel_mass(f64::INFINITY).unwrap() - 0.5).abs() < 1e-15);
        // ∫₀¹ 0.5(1+s)^{-2} ds = 0.25
        assert!((p.kernel_mass(1.0).unwrap() - 0.25).abs() < 1e-15);
        let a = p.admissibility();
        assert!(a.ok && (a.l.unwrap() - 0.5).abs() < 1e-15);

        let z = RelaxationKernel::zero();
        assert_eq!(z.l(), Some(1.0));
        assert!(!z.admissibility().ok);
    }

    #[test]
    fn constructor_rejects_bad_parameters() {
        assert!(RelaxationKernel::exponential(0.0, 1.0).is_err());
        assert!(RelaxationKernel::exponential(1.0, -1.0).is_err());
        assert!(RelaxationKernel::power_law(0.5, 1.0, 2.0).is_err());
        assert!(RelaxationKernel::power_law(0.5, 1.0, 1.0).is_err());
        assert!(RelaxationKernel::sampled(vec![0.0, 1.0, 3.0], vec![1.0; 3], vec![1.0; 3], None).is_err());
        assert!(RelaxationKernel::sampled(vec![0.0, 1.0], vec![1.0, 0.5], vec![1.0, 2.0], None).is_err());
    }

    #[test]
    fn sampled_kernel_mass_matches_exponential() {
        let t = uniform(5.0, 5001);
        let g: Vec<f64> = t.iter().map(|s| 0.5 * (-s).exp()).collect();
        let xi = vec![1.0; t.len()];
        let k = RelaxationKernel::sampled(t.clone(), g, xi, Some(TailModel::Exponential { rate: 1.0 })).unwrap();
        let m = k.kernel_mass(f64::INFINITY).unwrap();
        assert!((m - 0.5).abs() < 1e-10 * 0.5, "{m}");
        // partial masses agree with the closed form between and at samples
        for &s in &[0.0_f64, 0.0007, 1.0, 2.5005, 4.9999] {
            let exact = 0.5 * (1.0 - (-s).exp());
            assert!((k.kernel_mass(s).unwrap() - exact).abs() < 1e-9, "t = {s}");
        }
        let beyond = k.kernel_mass(7.0).unwrap();
        assert!((beyond - 0.5 * (1.0 - (-7.0f64).exp())).abs() < 1e-10);
    }

    #[test]
    fn sampled_kernel_without_tail() {
        let t = uniform(1.0, 11);
        let g: Vec<f64> = t.iter().map(|s| 1.0 - 0.5 * s).collect();
        let k = RelaxationKernel::sampled(t, g, vec![0.5; 11], None).unwrap();
        assert!(k.kernel_mass(f64::INFINITY).is_err());
        assert!(k.kernel_mass(2.0).is_err());
        assert!((k.kernel_mass(1.0).unwrap() - 0.75).abs() < 1e-14);
        let a = k.admissibility();
        assert!(!a.ok && a.l.is_none());
    }

    #[test]
    fn power_tail_mass() {
        // g = (1+t)^{-2} sampled on [0, 2], tail exponent 2: total mass 1
        let t = uniform(2.0, 2001);
        let g: Vec<f64> = t.iter().map(|s| (1.0 + s).powi(-2)).collect();
        let k = RelaxationKernel::sampled(t, g, vec![1.0; 2001], Some(TailModel::Power { exponent: 2.0 })).unwrap();
        assert!((k.kernel_mass(f64::INFINITY).unwrap() - 1.0).abs() < 1e-10);
        assert!((k.kernel_mass(5.0).unwrap() - (1.0 - 1.0 / 6.0)).abs() < 1e-10);
    }

    #[test]
    fn odd_interval_count_uses_trailing_trapezoid() {
        let t = uniform(3.0, 4);
        let g = vec![3.0, 2.0, 1.0, 0.0];
        let k = RelaxationKernel::sampled(t, g, vec![1.0; 4], Some(TailModel::Exponential { rate: 1.0 })).unwrap();
        assert!((k.kernel_mass(3.0).unwrap() - 4.5).abs() < 1e-14);
    }

    #[test]
    fn decay_classes() {
        let e = RelaxationKernel::exponential(0.5, 1.0).unwrap();
        let grid = uniform(10.0, 100_001);
        let r = decay_class_check(&e, &DecayClass::TypeI(XiFunction::Constant(1.0)), &grid).unwrap();
        assert!(r.ok, "{r:?}");
        let r = decay_class_check(&e, &DecayClass::TypeI(XiFunction::Constant(2.0)), &grid).unwrap();
        assert!(!r.ok);

        let c = 2.0 * 2f64.sqrt();
        let p = RelaxationKernel::power_law(0.5, c, 1.5).unwrap();
        let fine = uniform(10.0, 400_001);
        let r = decay_class_check(&p, &DecayClass::TypeII { c, alpha: 1.5 }, &fine).unwrap();
        assert!(r.ok, "{r:?}");
        assert!(decay_class_check(&p, &DecayClass::TypeII { c, alpha: 2.5 }, &fine).is_err());
        assert!(decay_class_check(&p, &DecayClass::TypeII { c, alpha: 1.5 }, &[0.0, 1.0]).is_err());
    }

    #[test]
    fn power_law_is_also_type_one() {
        let p = RelaxationKernel::power_law(0.5, 2.2, 1.4).unwrap();
        let xi = p.xi().unwrap();
        let grid = uniform(10.0, 200_001);
        let r = decay_class_check(&p, &DecayClass::TypeI(xi.clone()), &grid).unwrap();
        assert!(r.ok, "{r:?}");
        // closed-form cumulative agrees with quadrature of ξ
        let n = 20_000;
        let h = 5.0 / n as f64;
        let quad: f64 = (0..n)
            .map(|i| {
                let a = i as f64 * h;
                h / 6.0 * (xi.eval(a) + 4.0 * xi.eval(a + h / 2.0) + xi.eval(a + h))
            })
            .sum();
        assert!((xi.cumulative(5.0) - quad).abs() < 1e-10);
    }

    #[test]
    fn power_law_polynomial_bound() {
        let p = RelaxationKernel::power_law(0.5, 2.2, 1.4).unwrap();
        let cp = p.power_law_envelope_constant().unwrap();
        for i in 0..=2000 {
            let t = i as f64 * 0.05;
            let g = p.eval_g(t).unwrap();
            assert!(g > 0.0 && g <= cp * (1.0 + t).powf(-1.0 / 0.4) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn blowup_bound_values() {
        assert!((blowup_mass_bound(3.0).unwrap() - 0.75).abs() < 1e-15);
        assert!((blowup_mass_bound(4.0).unwrap() - 8.0 / 9.0).abs() < 1e-15);
        let b100 = blowup_mass_bound(100.0).unwrap();
        assert!((b100 - 0.99990).abs() < 1e-5 && b100 < 1.0);
        assert!(blowup_mass_bound(2.0).is_err());
        assert!(blowup_mass_bound(4.5).unwrap() > blowup_mass_bound(4.0).unwrap());
    }

    #[test]
    fn sampled_xi_cumulative() {
        let xi = XiFunction::Sampled {
            t: vec![0.0, 1.0, 2.0],
            xi: vec![2.0, 1.0, 1.0],
        };
        assert!((xi.cumulative(1.0) - 1.5).abs() < 1e-15);
        assert!((xi.cumulative(0.5) - (0.5 * (2.0 + 1.5) * 0.5)).abs() < 1e-15);
        assert!((xi.cumulative(4.0) - 4.5).abs() < 1e-15);
        assert_eq!(xi.xi0(), 2.0);
    }

    #[test]
    fn parse_sample_tables() {
        let (t, g, xi) = parse_samples("t,g\n0,1\n0.5, 0.8\n1 0.7\n").unwrap();
        assert_eq!(t, vec![0.0, 0.5, 1.0]);
        assert_eq!(g, vec![1.0, 0.8, 0.7]);
        assert!(xi.is_none());
        let (_, _, xi) = parse_samples("# comment\n0 1 2\n1 0.5 1\n").unwrap();
        assert_eq!(xi.unwrap(), vec![2.0, 1.0]);
        assert!(parse_samples("0 1\n1 2 3\n").is_err());
        assert!(parse_samples("").is_err());
    }
}
