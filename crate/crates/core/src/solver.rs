//! Time integration of the damped viscoelastic wave equation.
//!
//! Each step is a kick-drift-kick leapfrog for the conservative part, with
//! the nonlinear damping applied implicitly node by node inside both half
//! kicks:
//!
//! ```text
//! v* = D(v + dt/2 · F(uⁿ))        D(r) solves  v + (dt/2)·a·|v|^{m−2}v = r
//! uⁿ⁺¹ = uⁿ + dt · v*
//! vⁿ⁺¹ = D(v* + dt/2 · F(uⁿ⁺¹))
//! F(u) = Δu − Δ∫₀ᵗ g(t−s)u(s)ds + b|u|^{p−2}u
//! ```
//!
//! The memory integral is the trapezoidal rule over stored snapshots plus the
//! current state. Without damping, memory and source the scheme is Störmer–
//! Verlet. The damping split is first order in `dt`.

use serde::Serialize;

use crate::domain::{grad_inner, grad_sq_diff, laplacian_into, DomainSpec, Field};
use crate::energy::{self, EnergyRecord};
use crate::error::{Error, Result};
use crate::kernel::{KernelKind, RelaxationKernel};
use crate::report::fmt_f64;
use crate::varexp::ExponentField;

pub const DEFAULT_BLOWUP_THRESHOLD: f64 = 1e6;

/// Relative tolerance for `t_end / dt` to count as an integer.
const STEP_COUNT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MemoryMode {
    /// Recursive for exponential kernels, full history otherwise.
    #[default]
    Auto,
    /// Trapezoidal sum over every stored snapshot.
    Full,
    /// O(1) running sums; exponential kernels at stride 1 only.
    Recursive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub a: f64,
    pub b: f64,
    pub dt: f64,
    pub t_end: f64,
    pub blowup_threshold: f64,
    pub history_stride: usize,
    pub output_stride: usize,
    pub memory: MemoryMode,
}

impl SimConfig {
    pub fn new(a: f64, b: f64, dt: f64, t_end: f64) -> Self {
        SimConfig {
            a,
            b,
            dt,
            t_end,
            blowup_threshold: DEFAULT_BLOWUP_THRESHOLD,
            history_stride: 1,
            output_stride: 1,
            memory: MemoryMode::Auto,
        }
    }

    /// Largest step allowed on `dom`: `0.5 · h_min / √dim`.
    pub fn cfl_bound(dom: &DomainSpec) -> f64 {
        0.5 * dom.min_spacing() / (dom.dim() as f64).sqrt()
    }

    /// Every violated constraint, as human-readable messages.
    pub fn violations(&self, dom: &DomainSpec) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.a >= 0.0 && self.a.is_finite()) {
            v.push(format!("damping coefficient a must be finite and >= 0, got {}", self.a));
        }
        if !(self.b >= 0.0 && self.b.is_finite()) {
            v.push(format!("source coefficient b must be finite and >= 0, got {}", self.b));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            v.push(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            v.push(format!("t_end must be positive, got {}", self.t_end));
        }
        if !(self.blowup_threshold > 0.0) {
            v.push(format!(
                "blowup_threshold must be positive, got {}",
                self.blowup_threshold
            ));
        }
        if self.history_stride == 0 {
            v.push("history_stride must be at least 1".to_string());
        }
        if self.output_stride == 0 {
            v.push("output_stride must be at least 1".to_string());
        }
        if !v.is_empty() {
            return v;
        }
        let bound = Self::cfl_bound(dom);
        if self.dt > bound {
            v.push(format!(
                "dt = {} violates the CFL guard dt <= 0.5*h/sqrt(dim) = {} (h = {}, dim = {})",
                self.dt,
                bound,
                dom.min_spacing(),
                dom.dim()
            ));
        }
        let ratio = self.t_end / self.dt;
        let steps = ratio.round();
        if steps < 1.0 || (ratio - steps).abs() > STEP_COUNT_TOL * ratio {
            v.push(format!("t_end / dt = {ratio} is not an integer step count"));
        } else if !(steps as usize).is_multiple_of(self.output_stride) {
            v.push(format!(
                "step count {} is not a multiple of output_stride {}",
                steps, self.output_stride
            ));
        }
        v
    }

    /// Validate against `dom` and return the number of steps.
    pub fn validate(&self, dom: &DomainSpec) -> Result<usize> {
        let v = self.violations(dom);
        if !v.is_empty() {
            return Err(Error::Config(v));
        }
        Ok((self.t_end / self.dt).round() as usize)
    }

    fn resolve_memory(&self, kernel: &RelaxationKernel) -> Result<MemoryMode> {
        let exponential = matches!(kernel.kind(), KernelKind::ExponentialXi { .. });
        match self.memory {
            MemoryMode::Auto if exponential && self.history_stride == 1 => Ok(MemoryMode::Recursive),
            MemoryMode::Auto => Ok(MemoryMode::Full),
            MemoryMode::Recursive if !exponential => {
                Err(Error::invalid("recursive memory is only valid for exponential kernels"))
            }
            MemoryMode::Recursive if self.history_stride != 1 => {
                Err(Error::invalid("recursive memory requires history_stride = 1"))
            }
            mode => Ok(mode),
        }
    }
}

/// Solve `v + dt·a·|v|^{m−2}v = r` for `v`.
///
/// The left side is odd and strictly increasing in `v`, so the root has the
/// sign of `r` and `|v| ∈ [0, |r|]`. Newton on `s = |v|` from `s = |r|`
/// decreases monotonically because the map is convex in `s`; bisection is
/// the fallback if an iterate leaves the bracket.
pub fn damping_solve(r: f64, dt: f64, a: f64, m: f64) -> f64 {
    let c = dt * a;
    if c == 0.0 || r == 0.0 {
        return r;
    }
    if m == 2.0 {
        return r / (1.0 + c);
    }
    let target = r.abs();
    let tol = 1e-13 * target.max(1.0);
    let e = m - 2.0;
    let (mut lo, mut hi) = (0.0_f64, target);
    let mut s = target;
    for _ in 0..200 {
        let pw = s.powf(e);
        let phi = s + c * pw * s - target;
        if phi.abs() <= tol {
            break;
        }
        if phi > 0.0 {
            hi = s;
        } else {
            lo = s;
        }
        let dphi = 1.0 + c * (m - 1.0) * pw;
        let mut next = s - phi / dphi;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if next == s {
            break;
        }
        s = next;
    }
    s.copysign(r)
}

/// Outcome of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Outcome {
    Completed,
    BlewUpAt { t: f64 },
}

#[derive(Debug, Clone)]
struct Snapshot {
    step: usize,
    u: Vec<f64>,
}

#[derive(Debug, Clone)]
enum MemoryStore {
    Empty,
    Full {
        snaps: Vec<Snapshot>,
        stride: usize,
        g_lag: Vec<f64>,
        gp_lag: Vec<f64>,
    },
    /// `S = Σ cⱼ e^{−k(tₙ−tⱼ)} uⱼ` with `c₀ = ½`, `cⱼ = 1` otherwise, and the
    /// same recursion for the scalar weights and gradient norms; the
    /// trapezoidal sum is `g0·dt·(S − ½uₙ)`.
    Recursive {
        g0: f64,
        k: f64,
        decay: f64,
        s: Vec<f64>,
        s_unit: f64,
        s_grad: f64,
    },
}

/// Trapezoidal memory sums at the current step:
/// `H = Σ wⱼ g(t−sⱼ) uⱼ`, `G = Σ wⱼ g(t−sⱼ)`, `Q = Σ wⱼ g(t−sⱼ) ‖∇uⱼ‖²`.
#[derive(Debug, Clone)]
struct MemorySums {
    h: Vec<f64>,
    g_mass: f64,
}

/// Nodal state of the simulation together with the memory history.
#[derive(Debug, Clone)]
pub struct SimState {
    step: usize,
    dt: f64,
    u: Field,
    v: Field,
    force: Vec<f64>,
    store: MemoryStore,
    sums: MemorySums,
}

impl SimState {
    /// Initial state; `u0` and `u1` must vanish on the boundary.
    pub fn new(
        cfg: &SimConfig,
        kernel: &RelaxationKernel,
        p: &ExponentField,
        dom: &DomainSpec,
        u0: Field,
        u1: Field,
    ) -> Result<Self> {
        dom.check_len(u0.len(), "u0")?;
        dom.check_len(u1.len(), "u1")?;
        dom.check_len(p.values().len(), "source exponent")?;
        for (name, f) in [("u0", &u0), ("u1", &u1)] {
            if !f.is_finite() {
                return Err(Error::invalid(format!("{name} has non-finite values")));
            }
            if (0..dom.len()).any(|i| dom.is_boundary(i) && f[i] != 0.0) {
                return Err(Error::invalid(format!("{name} does not vanish on the boundary")));
            }
        }
        let mode = cfg.resolve_memory(kernel)?;
        let store = match (kernel.kind(), mode) {
            (KernelKind::Zero, _) => MemoryStore::Empty,
            (KernelKind::ExponentialXi { g0, k }, MemoryMode::Recursive) => MemoryStore::Recursive {
                g0: *g0,
                k: *k,
                decay: (-k * cfg.dt).exp(),
                s: u0.iter().map(|x| 0.5 * x).collect(),
                s_unit: 0.5,
                s_grad: 0.5 * grad_inner(&u0, &u0, dom),
            },
            _ => MemoryStore::Full {
                snaps: vec![Snapshot {
                    step: 0,
                    u: u0.to_vec(),
                }],
                stride: cfg.history_stride,
                g_lag: vec![kernel.g0()],
                gp_lag: vec![kernel.g_prime(0.0, cfg.dt)],
            },
        };
        let n = u0.len();
        let mut state = SimState {
            step: 0,
            dt: cfg.dt,
            u: u0,
            v: u1,
            force: vec![0.0; n],
            store,
            sums: MemorySums {
                h: vec![0.0; n],
                g_mass: 0.0,
            },
        };
        state.update_force(cfg, p, dom);
        Ok(state)
    }

    pub fn t(&self) -> f64 {
        self.step as f64 * self.dt
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn u(&self) -> &Field {
        &self.u
    }

    pub fn v(&self) -> &Field {
        &self.v
    }

    /// Times of the stored history snapshots (empty for recursive memory).
    pub fn history_times(&self) -> Vec<f64> {
        match &self.store {
            MemoryStore::Full { snaps, .. } => snaps.iter().map(|s| s.step as f64 * self.dt).collect(),
            _ => Vec::new(),
        }
    }

    /// `∫₀ᵗ g(t−s) ds` by the same trapezoidal rule as the memory term.
    pub fn discrete_kernel_mass(&self) -> f64 {
        self.sums.g_mass
    }

    /// `H = ∫₀ᵗ g(t−s) u(s) ds` by the trapezoidal rule.
    pub(crate) fn memory_integral(&self) -> &[f64] {
        &self.sums.h
    }

    fn extend_lags(store: &mut MemoryStore, kernel: &RelaxationKernel, dt: f64, upto: usize) {
        if let MemoryStore::Full { g_lag, gp_lag, .. } = store {
            while g_lag.len() <= upto {
                let t = g_lag.len() as f64 * dt;
                g_lag.push(kernel.g(t));
                gp_lag.push(kernel.g_prime(t, dt));
            }
        }
    }

    /// Trapezoid weights for stored snapshots followed by the current state.
    fn full_weights(snaps: &[Snapshot], step: usize, stride: usize, dt: f64) -> Result<Vec<(usize, f64)>> {
        let mut nodes: Vec<usize> = snaps.iter().map(|s| s.step).filter(|&s| s < step).collect();
        nodes.push(step);
        for w in nodes.windows(2) {
            if w[1] - w[0] > 2 * stride {
                return Err(Error::Consistency(format!(
                    "memory history gap of {} steps between t = {} and t = {} exceeds 2*history_stride",
                    w[1] - w[0],
                    w[0] as f64 * dt,
                    w[1] as f64 * dt
                )));
            }
        }
        let k = nodes.len();
        if k == 1 {
            return Ok(vec![(step, 0.0)]);
        }
        Ok((0..k)
            .map(|j| {
                let left = if j > 0 { nodes[j] - nodes[j - 1] } else { 0 };
                let right = if j + 1 < k { nodes[j + 1] - nodes[j] } else { 0 };
                (nodes[j], 0.5 * (left + right) as f64 * dt)
            })
            .collect())
    }

    fn refresh_sums(&mut self, kernel: &RelaxationKernel) -> Result<()> {
        let n = self.u.len();
        let step = self.step;
        let dt = self.dt;
        Self::extend_lags(&mut self.store, kernel, dt, step);
        match &self.store {
            MemoryStore::Empty => {}
            MemoryStore::Recursive { g0, s, s_unit, .. } => {
                let h = &mut self.sums.h;
                for i in 0..n {
                    h[i] = g0 * dt * (s[i] - 0.5 * self.u[i]);
                }
                self.sums.g_mass = g0 * dt * (s_unit - 0.5);
            }
            MemoryStore::Full {
                snaps, stride, g_lag, ..
            } => {
                let weights = Self::full_weights(snaps, step, *stride, dt)?;
                let h = &mut self.sums.h;
                h.iter_mut().for_each(|x| *x = 0.0);
                let mut g_mass = 0.0;
                let mut si = 0;
                for &(sj, w) in &weights {
                    let c = w * g_lag[step - sj];
                    g_mass += c;
                    if c == 0.0 {
                        continue;
                    }
                    let uj: &[f64] = if sj == step {
                        &self.u
                    } else {
                        while snaps[si].step != sj {
                            si += 1;
                        }
                        &snaps[si].u
                    };
                    for i in 0..n {
                        h[i] += c * uj[i];
                    }
                }
                self.sums.g_mass = g_mass;
            }
        }
        Ok(())
    }

    fn update_force(&mut self, cfg: &SimConfig, p: &ExponentField, dom: &DomainSpec) {
        let n = self.u.len();
        let mut w = vec![0.0; n];
        for i in 0..n {
            w[i] = self.u[i] - self.sums.h[i];
        }
        laplacian_into(&w, dom, &mut self.force);
        if cfg.b != 0.0 {
            for (i, f) in self.force.iter_mut().enumerate() {
                if !dom.is_boundary(i) {
                    let u = self.u[i];
                    *f += cfg.b * u.abs().powf(p.values()[i] - 2.0) * u;
                }
            }
        }
    }

    /// Record the current state into the memory store.
    fn push_history(&mut self, dom: &DomainSpec) {
        let step = self.step;
        match &mut self.store {
            MemoryStore::Empty => {}
            MemoryStore::Full { snaps, stride, .. } => {
                if step.is_multiple_of(*stride) {
                    snaps.push(Snapshot {
                        step,
                        u: self.u.to_vec(),
                    });
                }
            }
            MemoryStore::Recursive {
                decay,
                s,
                s_unit,
                s_grad,
                ..
            } => {
                for (si, ui) in s.iter_mut().zip(self.u.iter()) {
                    *si = *decay * *si + ui;
                }
                *s_unit = *decay * *s_unit + 1.0;
                *s_grad = *decay * *s_grad + grad_inner(&self.u, &self.u, dom);
            }
        }
    }

    /// `(½∫₀ᵗ g(t−s)‖∇u(t)−∇u(s)‖² ds, ½∫₀ᵗ g'(t−s)‖∇u(t)−∇u(s)‖² ds)` with
    /// the solver's trapezoidal weights.
    pub(crate) fn memory_energy_parts(&self, dom: &DomainSpec) -> Result<(f64, f64)> {
        match &self.store {
            MemoryStore::Empty => Ok((0.0, 0.0)),
            MemoryStore::Recursive {
                g0, k, s_unit, s_grad, ..
            } => {
                if self.step == 0 {
                    return Ok((0.0, 0.0));
                }
                // Σ wⱼgⱼ‖∇(u−uⱼ)‖² = G‖∇u‖² − 2⟨∇u,∇H⟩ + Q
                let grad_u = grad_inner(&self.u, &self.u, dom);
                let g_mass = g0 * self.dt * (s_unit - 0.5);
                let q = g0 * self.dt * (s_grad - 0.5 * grad_u);
                let cross = grad_inner(&self.u, &self.sums.h, dom);
                let memory = (0.5 * (g_mass * grad_u - 2.0 * cross + q)).max(0.0);
                Ok((memory, -k * memory))
            }
            MemoryStore::Full {
                snaps,
                stride,
                g_lag,
                gp_lag,
            } => {
                let weights = Self::full_weights(snaps, self.step, *stride, self.dt)?;
                let mut memory = 0.0;
                let mut diss = 0.0;
                let mut si = 0;
                for &(sj, w) in &weights {
                    if sj == self.step {
                        continue;
                    }
                    while snaps[si].step != sj {
                        si += 1;
                    }
                    let d = grad_sq_diff(&self.u, &snaps[si].u, dom);
                    let lag = self.step - sj;
                    memory += w * g_lag[lag] * d;
                    diss += w * gp_lag[lag] * d;
                }
                Ok((0.5 * memory, 0.5 * diss))
            }
        }
    }
}

/// `∫₀ᵗ g(t−s) Δu(s) ds` at the state's current time by the trapezoidal
/// rule over stored snapshots; exactly zero at `t = 0`.
pub fn memory_term(state: &SimState, dom: &DomainSpec) -> Result<Field> {
    dom.check_len(state.u.len(), "state")?;
    let mut out = Field::zeros(state.u.len());
    laplacian_into(state.memory_integral(), dom, &mut out);
    Ok(out)
}

/// Advance `state` by one step. Returns `Err` only on invalid input or
/// broken bookkeeping; non-finite values are left for the caller to detect.
pub fn step(
    state: &mut SimState,
    cfg: &SimConfig,
    kernel: &RelaxationKernel,
    m: &ExponentField,
    p: &ExponentField,
    dom: &DomainSpec,
) -> Result<()> {
    let n = state.u.len();
    let half = 0.5 * cfg.dt;
    let mv = m.values();
    for i in 0..n {
        let r = state.v[i] + half * state.force[i];
        state.v[i] = damping_solve(r, half, cfg.a, mv[i]);
    }
    for i in 0..n {
        state.u[i] += cfg.dt * state.v[i];
    }
    dom.zero_boundary(&mut state.u);
    state.step += 1;
    state.push_history(dom);
    state.refresh_sums(kernel)?;
    state.update_force(cfg, p, dom);
    for i in 0..n {
        let r = state.v[i] + half * state.force[i];
        state.v[i] = damping_solve(r, half, cfg.a, mv[i]);
    }
    dom.zero_boundary(&mut state.v);
    Ok(())
}

/// Energy history of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub records: Vec<EnergyRecord>,
    pub outcome: Outcome,
    pub dt: f64,
    pub output_stride: usize,
    /// Largest grid spacing.
    pub h: f64,
}

impl Trajectory {
    /// Spacing between consecutive records.
    pub fn record_dt(&self) -> f64 {
        self.dt * self.output_stride as f64
    }

    pub const CSV_HEADER: &'static str = "t,E,scriptE,kinetic,elastic,memory,source_modular,lambda_t,dissipation";

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(200 * (self.records.len() + 1));
        out.push_str(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let row = [
                r.t,
                r.e,
                r.script_e,
                r.kinetic,
                r.elastic,
                r.memory,
                r.source_modular,
                r.lambda_t,
                r.dissipation,
            ];
            let cells: Vec<String> = row.iter().map(|v| fmt_f64(*v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

fn check_exponents(m: &ExponentField, p: &ExponentField, dom: &DomainSpec) -> Result<()> {
    dom.check_len(m.values().len(), "damping exponent")?;
    dom.check_len(p.values().len(), "source exponent")?;
    if m.q1() < 2.0 || p.q1() < 2.0 {
        return Err(Error::invalid(format!(
            "exponents must be >= 2 (m1 = {}, p1 = {})",
            m.q1(),
            p.q1()
        )));
    }
    Ok(())
}

/// Simulate from `(u0, u1)` to `cfg.t_end`, recording energies every
/// `cfg.output_stride` steps. Stops early with [`Outcome::BlewUpAt`] when
/// `‖u‖_∞` exceeds the threshold or a value becomes non-finite.
pub fn run(
    cfg: &SimConfig,
    kernel: &RelaxationKernel,
    m: &ExponentField,
    p: &ExponentField,
    dom: &DomainSpec,
    u0: Field,
    u1: Field,
) -> Result<Trajectory> {
    let steps = cfg.validate(dom)?;
    check_exponents(m, p, dom)?;
    let mut state = SimState::new(cfg, kernel, p, dom, u0, u1)?;
    let mut records = Vec::with_capacity(steps / cfg.output_stride + 1);
    records.push(energy::total_energy(&state, kernel, m, p, cfg, dom)?);
    let mut outcome = Outcome::Completed;
    for _ in 0..steps {
        step(&mut state, cfg, kernel, m, p, dom)?;
        if !(state.u.is_finite() && state.v.is_finite()) || state.u.max_abs() > cfg.blowup_threshold {
            outcome = Outcome::BlewUpAt { t: state.t() };
            break;
        }
        if state.step % cfg.output_stride == 0 {
            records.push(energy::total_energy(&state, kernel, m, p, cfg, dom)?);
        }
    }
    Ok(Trajectory {
        records,
        outcome,
        dt: cfg.dt,
        output_stride: cfg.output_stride,
        h: dom.max_spacing(),
    })
}
