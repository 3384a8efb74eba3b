//! Uniform grids on intervals and rectangles with homogeneous Dirichlet data.
//!
//! Nodes include the boundary. In 2D the node index is `j * nx + i` with `i`
//! running along the first axis. All integrals use the tensor trapezoidal
//! rule, and the gradient form uses face-centred forward differences so that
//! the summation-by-parts identity `⟨−Δu, u⟩ = ‖∇u‖²` holds exactly for
//! fields that vanish on the boundary.

use std::f64::consts::PI;
use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::varexp::ExponentField;

/// Grid description: dimension, side lengths and node counts per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    dim: usize,
    lengths: Vec<f64>,
    nodes: Vec<usize>,
    spacing: Vec<f64>,
    weights: Vec<f64>,
}

/// Nodal values on a [`DomainSpec`] grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Field {
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(len: usize) -> Self {
        Field { values: vec![0.0; len] }
    }

    pub fn from_vec(values: Vec<f64>) -> Self {
        Field { values }
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn scaled(&self, factor: f64) -> Field {
        Field::from_vec(self.values.iter().map(|v| v * factor).collect())
    }
}

impl Deref for Field {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.values
    }
}

impl DerefMut for Field {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
}

impl From<Vec<f64>> for Field {
    fn from(values: Vec<f64>) -> Self {
        Field { values }
    }
}

fn trapezoid_weights_1d(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; n];
    w[0] = 0.5 * h;
    w[n - 1] = 0.5 * h;
    w
}

impl DomainSpec {
    /// Build a 1D (`lengths.len() == 1`) or 2D grid. Every axis needs at least
    /// three nodes so that there is an interior.
    pub fn new(lengths: &[f64], nodes: &[usize]) -> Result<Self> {
        let dim = lengths.len();
        if !(dim == 1 || dim == 2) {
            return Err(Error::invalid(format!("domain dimension must be 1 or 2, got {dim}")));
        }
        if nodes.len() != dim {
            return Err(Error::invalid(format!(
                "{} node counts given for a {dim}D domain",
                nodes.len()
            )));
        }
        for (axis, (&l, &n)) in lengths.iter().zip(nodes).enumerate() {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::invalid(format!(
                    "axis {axis}: length must be positive and finite, got {l}"
                )));
            }
            if n < 3 {
                return Err(Error::invalid(format!("axis {axis}: need at least 3 nodes, got {n}")));
            }
        }
        let spacing: Vec<f64> = lengths.iter().zip(nodes).map(|(&l, &n)| l / (n - 1) as f64).collect();
        let wx = trapezoid_weights_1d(nodes[0], spacing[0]);
        let weights = if dim == 1 {
            wx
        } else {
            let wy = trapezoid_weights_1d(nodes[1], spacing[1]);
            let mut w = Vec::with_capacity(nodes[0] * nodes[1]);
            for wyj in &wy {
                for wxi in &wx {
                    w.push(wxi * wyj);
                }
            }
            w
        };
        Ok(DomainSpec {
            dim,
            lengths: lengths.to_vec(),
            nodes: nodes.to_vec(),
            spacing,
            weights,
        })
    }

    pub fn interval(length: f64, nodes: usize) -> Result<Self> {
        Self::new(&[length], &[nodes])
    }

    pub fn rectangle(lengths: [f64; 2], nodes: [usize; 2]) -> Result<Self> {
        Self::new(&lengths, &nodes)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.spacing[axis]
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacing.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_spacing(&self) -> f64 {
        self.spacing.iter().cloned().fold(0.0, f64::max)
    }

    /// Total number of nodes.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Lebesgue measure `|Ω|`.
    pub fn measure(&self) -> f64 {
        self.lengths.iter().product()
    }

    /// Trapezoidal quadrature weights, one per node.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Physical coordinates of a node; the second entry is 0 in 1D.
    pub fn coords(&self, idx: usize) -> [f64; 2] {
        let nx = self.nodes[0];
        let i = idx % nx;
        let j = idx / nx;
        let x = i as f64 * self.spacing[0];
        let y = if self.dim == 2 { j as f64 * self.spacing[1] } else { 0.0 };
        [x, y]
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        let nx = self.nodes[0];
        let i = idx % nx;
        if i == 0 || i == nx - 1 {
            return true;
        }
        if self.dim == 2 {
            let j = idx / nx;
            return j == 0 || j == self.nodes[1] - 1;
        }
        false
    }

    /// Sample `f` at every node.
    pub fn sample(&self, f: impl Fn([f64; 2]) -> f64) -> Field {
        Field::from_vec((0..self.len()).map(|i| f(self.coords(i))).collect())
    }

    /// Sample `f` at interior nodes and set boundary nodes to zero.
    pub fn sample_dirichlet(&self, f: impl Fn([f64; 2]) -> f64) -> Field {
        Field::from_vec(
            (0..self.len())
                .map(|i| if self.is_boundary(i) { 0.0 } else { f(self.coords(i)) })
                .collect(),
        )
    }

    pub fn zero_boundary(&self, u: &mut [f64]) {
        for (i, v) in u.iter_mut().enumerate() {
            if self.is_boundary(i) {
                *v = 0.0;
            }
        }
    }

    pub(crate) fn check_len(&self, len: usize, what: &str) -> Result<()> {
        if len != self.len() {
            return Err(Error::invalid(format!(
                "{what} has {len} nodal values but the grid has {}",
                self.len()
            )));
        }
        Ok(())
    }

    /// Trapezoidal `∫_Ω f dx` of nodal values.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }
}

/// Discrete `L²` inner product `Σ wᵢ uᵢ vᵢ`.
pub fn inner(u: &[f64], v: &[f64], dom: &DomainSpec) -> f64 {
    u.iter().zip(v).zip(dom.weights()).map(|((a, b), w)| a * b * w).sum()
}

/// Discrete `‖u‖₂²`.
pub fn l2_sq(u: &[f64], dom: &DomainSpec) -> f64 {
    inner(u, u, dom)
}

/// Second-order central-difference Laplacian; boundary rows are zero.
pub fn laplacian(u: &Field, dom: &DomainSpec) -> Result<Field> {
    dom.check_len(u.len(), "field")?;
    let mut out = Field::zeros(u.len());
    laplacian_into(u, dom, &mut out);
    Ok(out)
}

pub(crate) fn laplacian_into(u: &[f64], dom: &DomainSpec, out: &mut [f64]) {
    let nx = dom.nodes[0];
    let hx2 = dom.spacing[0] * dom.spacing[0];
    if dom.dim == 1 {
        out[0] = 0.0;
        out[nx - 1] = 0.0;
        for i in 1..nx - 1 {
            out[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / hx2;
        }
        return;
    }
    let ny = dom.nodes[1];
    let hy2 = dom.spacing[1] * dom.spacing[1];
    for j in 0..ny {
        for i in 0..nx {
            let k = j * nx + i;
            out[k] = if i == 0 || i == nx - 1 || j == 0 || j == ny - 1 {
                0.0
            } else {
                (u[k + 1] - 2.0 * u[k] + u[k - 1]) / hx2 + (u[k + nx] - 2.0 * u[k] + u[k - nx]) / hy2
            };
        }
    }
}

/// Discrete gradient inner product `⟨∇a, ∇b⟩` with forward differences on
/// cell faces.
pub fn grad_inner(a: &[f64], b: &[f64], dom: &DomainSpec) -> f64 {
    let nx = dom.nodes[0];
    let hx = dom.spacing[0];
    if dom.dim == 1 {
        let mut s = 0.0;
        for i in 0..nx - 1 {
            s += (a[i + 1] - a[i]) * (b[i + 1] - b[i]);
        }
        return s / hx;
    }
    let ny = dom.nodes[1];
    let hy = dom.spacing[1];
    let wy = |j: usize| if j == 0 || j == ny - 1 { 0.5 * hy } else { hy };
    let wx = |i: usize| if i == 0 || i == nx - 1 { 0.5 * hx } else { hx };
    let mut s = 0.0;
    for j in 0..ny {
        let row = j * nx;
        let mut acc = 0.0;
        for i in 0..nx - 1 {
            acc += (a[row + i + 1] - a[row + i]) * (b[row + i + 1] - b[row + i]);
        }
        s += acc * wy(j) / hx;
    }
    for j in 0..ny - 1 {
        let row = j * nx;
        let mut acc = 0.0;
        for i in 0..nx {
            acc += (a[row + nx + i] - a[row + i]) * (b[row + nx + i] - b[row + i]) * wx(i);
        }
        s += acc / hy;
    }
    s
}

/// `‖∇u‖₂²` by forward differences and face-midpoint quadrature.
pub fn grad_sq_norm(u: &Field, dom: &DomainSpec) -> Result<f64> {
    dom.check_len(u.len(), "field")?;
    Ok(grad_inner(u, u, dom))
}

/// `‖∇(a − b)‖₂²` without allocating the difference.
pub(crate) fn grad_sq_diff(a: &[f64], b: &[f64], dom: &DomainSpec) -> f64 {
    let nx = dom.nodes[0];
    let hx = dom.spacing[0];
    let d = |k: usize| a[k] - b[k];
    if dom.dim == 1 {
        let mut s = 0.0;
        for i in 0..nx - 1 {
            let g = d(i + 1) - d(i);
            s += g * g;
        }
        return s / hx;
    }
    let ny = dom.nodes[1];
    let hy = dom.spacing[1];
    let wy = |j: usize| if j == 0 || j == ny - 1 { 0.5 * hy } else { hy };
    let wx = |i: usize| if i == 0 || i == nx - 1 { 0.5 * hx } else { hx };
    let mut s = 0.0;
    for j in 0..ny {
        let row = j * nx;
        let mut acc = 0.0;
        for i in 0..nx - 1 {
            let g = d(row + i + 1) - d(row + i);
            acc += g * g;
        }
        s += acc * wy(j) / hx;
    }
    for j in 0..ny - 1 {
        let row = j * nx;
        let mut acc = 0.0;
        for i in 0..nx {
            let g = d(row + nx + i) - d(row + i);
            acc += g * g * wx(i);
        }
        s += acc / hy;
    }
    s
}

/// First Dirichlet eigenvalue `ω₁` of `−Δ`, continuum value.
pub fn first_eigenvalue(dom: &DomainSpec) -> f64 {
    dom.lengths.iter().map(|l| (PI / l).powi(2)).sum()
}

/// Smallest eigenvalue of the discrete Dirichlet Laplacian on this grid.
/// Differs from [`first_eigenvalue`] by `O(h²)`; reported as a diagnostic.
pub fn discrete_first_eigenvalue(dom: &DomainSpec) -> f64 {
    dom.lengths
        .iter()
        .zip(&dom.spacing)
        .map(|(l, h)| {
            let s = (PI * h / (2.0 * l)).sin();
            4.0 * s * s / (h * h)
        })
        .sum()
}

/// Bound on `‖u‖_s ≤ B_s ‖∇u‖₂` for a constant exponent `s ≥ 2` and every
/// `u ∈ H¹₀(Ω)`.
///
/// 1D, `Ω = (0, L)`: `|u(x)|² ≤ x(L−x)/L ‖u'‖²` gives `‖u‖_∞ ≤ (√L/2)‖u'‖`,
/// Poincaré gives `‖u‖₂ ≤ ω₁^{-1/2}‖u'‖`, and `‖u‖_s ≤ ‖u‖_∞^{1−2/s}‖u‖₂^{2/s}`
/// combines them into `B_s = (√L/2)^{1−2/s} ω₁^{-1/s}`.
///
/// 2D rectangle: with `w = |u|^r` extended by zero, `‖w‖₂² ≤ ¼‖∂ₓw‖₁‖∂ᵧw‖₁`
/// and Cauchy–Schwarz give `‖u‖_{2r}^{2r} ≤ (r²/8)‖u‖_{2r−2}^{2r−2}‖∇u‖²`.
/// Starting from Poincaré at `r = 1` this bounds every even exponent; other
/// exponents use Lyapunov interpolation between the neighbouring even ones.
pub fn constant_exponent_bound(dom: &DomainSpec, s: f64) -> Result<f64> {
    if !(s.is_finite() && s >= 2.0) {
        return Err(Error::invalid(format!(
            "embedding exponent must be finite and >= 2, got {s}"
        )));
    }
    let omega1 = first_eigenvalue(dom);
    if dom.dim == 1 {
        let sup = dom.lengths[0].sqrt() / 2.0;
        return Ok(sup.powf(1.0 - 2.0 / s) * omega1.powf(-1.0 / s));
    }
    // a[r-1] bounds ‖u‖_{2r} / ‖∇u‖ for r = 1, 2, ...
    let r_hi = (s / 2.0).ceil().max(1.0) as usize;
    let mut a = Vec::with_capacity(r_hi);
    a.push(omega1.powf(-0.5));
    for r in 2..=r_hi {
        let rf = r as f64;
        let prev = a[r - 2];
        let pow = (rf * rf / 8.0) * prev.powf(2.0 * rf - 2.0);
        a.push(pow.powf(1.0 / (2.0 * rf)));
    }
    let k_hi = r_hi as f64;
    if (s - 2.0 * k_hi).abs() < 1e-14 || r_hi == 1 {
        return Ok(a[r_hi - 1]);
    }
    let (s0, s1) = (2.0 * (k_hi - 1.0), 2.0 * k_hi);
    // 1/s = θ/s0 + (1−θ)/s1
    let theta = (1.0 / s - 1.0 / s1) / (1.0 / s0 - 1.0 / s1);
    Ok(a[r_hi - 2].powf(theta) * a[r_hi - 1].powf(1.0 - theta))
}

/// Upper bound for the embedding constant `B` in `‖u‖_{q(x)} ≤ B‖∇u‖₂`.
///
/// A constant exponent uses [`constant_exponent_bound`] directly. A variable
/// exponent uses `‖u‖_{q(x)} ≤ (1+|Ω|)‖u‖_{q₂}` (from `|v|^{q(x)} ≤ |v|^{q₂} + 1`
/// and convexity of the modular) and takes the larger of the `q₁` and `q₂`
/// constant-exponent bounds.
pub fn embedding_constant(dom: &DomainSpec, q: &ExponentField) -> Result<f64> {
    dom.check_len(q.values().len(), "exponent field")?;
    let (q1, q2) = (q.q1(), q.q2());
    if q1 == q2 {
        return constant_exponent_bound(dom, q1);
    }
    let b1 = constant_exponent_bound(dom, q1)?;
    let b2 = constant_exponent_bound(dom, q2)?;
    Ok((1.0 + dom.measure()) * b1.max(b2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(n: usize) -> DomainSpec {
        DomainSpec::interval(1.0, n).unwrap()
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(DomainSpec::new(&[1.0, 1.0, 1.0], &[3, 3, 3]).is_err());
        assert!(DomainSpec::interval(1.0, 2).is_err());
        assert!(DomainSpec::interval(-1.0, 10).is_err());
        assert!(DomainSpec::new(&[1.0], &[5, 5]).is_err());
    }

    #[test]
    fn weights_sum_to_measure() {
        let d = DomainSpec::rectangle([2.0, 0.5], [11, 7]).unwrap();
        let s: f64 = d.weights().iter().sum();
        assert!((s - 1.0).abs() < 1e-14);
        assert_eq!(d.len(), 77);
    }

    #[test]
    fn laplacian_of_zero_is_zero() {
        let d = unit(11);
        let lap = laplacian(&Field::zeros(11), &d).unwrap();
        assert!(lap.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn laplacian_exact_on_quadratics() {
        let d = unit(21);
        let u = d.sample(|[x, _]| x * (1.0 - x));
        let lap = laplacian(&u, &d).unwrap();
        for i in 1..20 {
            assert!((lap[i] + 2.0).abs() < 1e-10, "node {i}: {}", lap[i]);
        }
        assert_eq!(lap[0], 0.0);
        assert_eq!(lap[20], 0.0);
    }

    #[test]
    fn laplacian_of_sine_mode() {
        let d = unit(101);
        let u = d.sample(|[x, _]| (PI * x).sin());
        let lap = laplacian(&u, &d).unwrap();
        let err = (1..100).map(|i| (lap[i] + PI * PI * u[i]).abs()).fold(0.0, f64::max);
        assert!(err <= 1e-2 * PI * PI, "max error {err}");
    }

    #[test]
    fn laplacian_grid_mismatch() {
        let d = unit(11);
        assert!(laplacian(&Field::zeros(10), &d).is_err());
    }

    #[test]
    fn grad_norm_of_sine_and_quadratic() {
        let d = unit(201);
        let u = d.sample(|[x, _]| (PI * x).sin());
        let g = grad_sq_norm(&u, &d).unwrap();
        assert!((g - PI * PI / 2.0).abs() <= 1e-3, "{g}");
        let q = d.sample(|[x, _]| x * (1.0 - x));
        let gq = grad_sq_norm(&q, &d).unwrap();
        assert!((gq - 1.0 / 3.0).abs() <= 1e-4, "{gq}");
        assert_eq!(grad_sq_norm(&Field::zeros(201), &d).unwrap(), 0.0);
    }

    #[test]
    fn eigenvalues() {
        assert!((first_eigenvalue(&unit(11)) - PI * PI).abs() < 1e-14);
        let sq = DomainSpec::rectangle([1.0, 1.0], [5, 5]).unwrap();
        assert!((first_eigenvalue(&sq) - 2.0 * PI * PI).abs() < 1e-13);
        let two = DomainSpec::interval(2.0, 11).unwrap();
        assert!((first_eigenvalue(&two) - PI * PI / 4.0).abs() < 1e-14);
        let disc = discrete_first_eigenvalue(&unit(201));
        assert!(disc < PI * PI && (PI * PI - disc) < 1e-3);
    }

    #[test]
    fn embedding_constant_for_l2_is_poincare() {
        let d = unit(51);
        let q = ExponentField::constant(2.0, d.len()).unwrap();
        assert!((embedding_constant(&d, &q).unwrap() - 1.0 / PI).abs() < 1e-15);
        let sq = DomainSpec::rectangle([1.0, 1.0], [9, 9]).unwrap();
        let q = ExponentField::constant(2.0, sq.len()).unwrap();
        let b = embedding_constant(&sq, &q).unwrap();
        assert!((b - 1.0 / (2f64.sqrt() * PI)).abs() < 1e-15);
    }

    #[test]
    fn two_dimensional_chain_is_continuous_in_exponent() {
        let sq = DomainSpec::rectangle([1.0, 1.0], [9, 9]).unwrap();
        let b4 = constant_exponent_bound(&sq, 4.0).unwrap();
        let b4m = constant_exponent_bound(&sq, 4.0 - 1e-9).unwrap();
        let b4p = constant_exponent_bound(&sq, 4.0 + 1e-9).unwrap();
        assert!((b4 - b4m).abs() < 1e-7 && (b4 - b4p).abs() < 1e-7);
        // Ladyzhenskaya step: a₂⁴ = a₁²/2
        let a1 = 1.0 / (2f64.sqrt() * PI);
        assert!((b4.powi(4) - a1 * a1 / 2.0).abs() < 1e-15);
    }

    #[test]
    fn variable_exponent_bound_inflates_by_measure_plus_one() {
        let d = unit(101);
        let q = ExponentField::from_values(d.sample(|[x, _]| 2.0 + x).into_vec()).unwrap();
        let b = embedding_constant(&d, &q).unwrap();
        let b2 = constant_exponent_bound(&d, 2.0).unwrap();
        let b3 = constant_exponent_bound(&d, 3.0).unwrap();
        assert!((b - 2.0 * b2.max(b3)).abs() < 1e-15);
    }
}
