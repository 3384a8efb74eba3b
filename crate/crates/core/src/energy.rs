//! Discrete energies, the dissipation rate and the energy-identity audit.
//!
//! All components use the solver's quadratures: trapezoidal weights in
//! space, the forward-difference gradient form, and the solver's
//! trapezoidal memory weights in time. The kernel mass in the elastic term
//! is that same discrete sum, so `E` and its dissipation agree with the
//! scheme up to its own truncation error.

use serde::Serialize;

use crate::domain::{grad_inner, DomainSpec};
use crate::error::{Error, Result};
use crate::kernel::RelaxationKernel;
use crate::solver::{SimConfig, SimState, Trajectory};
use crate::varexp::ExponentField;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyRecord {
    pub t: f64,
    /// `½‖u_t‖²`
    pub kinetic: f64,
    /// `½(1 − ∫₀ᵗg)‖∇u‖²`
    pub elastic: f64,
    /// `½∫₀ᵗ g(t−s)‖∇u(t)−∇u(s)‖² ds`
    pub memory: f64,
    /// `b∫|u|^{p(x)}/p(x)`
    pub source_modular: f64,
    /// `kinetic + elastic + memory − source_modular`
    pub e: f64,
    /// `e + source_modular`
    pub script_e: f64,
    /// `√l ‖∇u‖`; NaN when the kernel's total mass is unknown.
    pub lambda_t: f64,
    /// Right-hand side of the energy identity.
    pub dissipation: f64,
}

fn finite(value: f64, component: &'static str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::numerical(
            "energy",
            format!("non-finite {component} component ({value})"),
        ))
    }
}

/// Every energy component of `state`, including the dissipation rate.
pub fn total_energy(
    state: &SimState,
    kernel: &RelaxationKernel,
    m: &ExponentField,
    p: &ExponentField,
    cfg: &SimConfig,
    dom: &DomainSpec,
) -> Result<EnergyRecord> {
    let u = state.u();
    let v = state.v();
    dom.check_len(u.len(), "state")?;
    dom.check_len(p.values().len(), "source exponent")?;
    let w = dom.weights();
    let grad_u = grad_inner(u, u, dom);
    let kinetic = finite(0.5 * weighted_sq(v, w), "kinetic")?;
    let elastic = finite(0.5 * (1.0 - state.discrete_kernel_mass()) * grad_u, "elastic")?;
    let (memory, memory_rate) = state.memory_energy_parts(dom)?;
    let memory = finite(memory, "memory")?;
    let source_modular = finite(
        cfg.b
            * u.iter()
                .zip(p.values())
                .zip(w)
                .map(|((x, q), wi)| wi * x.abs().powf(*q) / q)
                .sum::<f64>(),
        "source",
    )?;
    let e = kinetic + elastic + memory - source_modular;
    let dissipation = finite(
        dissipation_parts(state, kernel, m, cfg, dom, grad_u, memory_rate)?,
        "dissipation",
    )?;
    let lambda_t = kernel.l().map_or(f64::NAN, |l| (l * grad_u).sqrt());
    Ok(EnergyRecord {
        t: state.t(),
        kinetic,
        elastic,
        memory,
        source_modular,
        e,
        script_e: e + source_modular,
        lambda_t,
        dissipation,
    })
}

fn weighted_sq(v: &[f64], w: &[f64]) -> f64 {
    v.iter().zip(w).map(|(x, wi)| wi * x * x).sum()
}

fn dissipation_parts(
    state: &SimState,
    kernel: &RelaxationKernel,
    m: &ExponentField,
    cfg: &SimConfig,
    dom: &DomainSpec,
    grad_u: f64,
    memory_rate: f64,
) -> Result<f64> {
    dom.check_len(m.values().len(), "damping exponent")?;
    let damping: f64 = state
        .v()
        .iter()
        .zip(m.values())
        .zip(dom.weights())
        .map(|((x, q), wi)| wi * x.abs().powf(*q))
        .sum();
    Ok(-cfg.a * damping - 0.5 * kernel.g(state.t()) * grad_u + memory_rate)
}

/// `−a∫|u_t|^{m(x)} − ½g(t)‖∇u‖² + ½∫₀ᵗ g'(t−s)‖∇u(t)−∇u(s)‖² ds`.
pub fn dissipation_rate(
    state: &SimState,
    kernel: &RelaxationKernel,
    m: &ExponentField,
    cfg: &SimConfig,
    dom: &DomainSpec,
) -> Result<f64> {
    dom.check_len(state.u().len(), "state")?;
    let grad_u = grad_inner(state.u(), state.u(), dom);
    let (_, memory_rate) = state.memory_energy_parts(dom)?;
    dissipation_parts(state, kernel, m, cfg, dom, grad_u, memory_rate)
}

/// Per-interval residuals of the energy identity and their summaries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityResidual {
    /// `(E_{i+1} − E_i)/Δt − (D_i + D_{i+1})/2`
    pub residuals: Vec<f64>,
    pub max_abs: f64,
    /// Root mean square over intervals.
    pub l2: f64,
}

/// Compare the discrete energy change over each record interval with the
/// trapezoidal average of the dissipation at its ends.
pub fn energy_identity_residual(traj: &Trajectory) -> IdentityResidual {
    let dt = traj.record_dt();
    let residuals: Vec<f64> = traj
        .records
        .windows(2)
        .map(|w| (w[1].e - w[0].e) / dt - 0.5 * (w[0].dissipation + w[1].dissipation))
        .collect();
    let max_abs = residuals.iter().fold(0.0_f64, |m, r| m.max(r.abs()));
    let l2 = if residuals.is_empty() {
        0.0
    } else {
        (residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64).sqrt()
    };
    IdentityResidual { residuals, max_abs, l2 }
}

/// Largest single-interval energy increase `max(E_{i+1} − E_i, 0)` and the
/// time at which it ends.
pub fn max_energy_increase(traj: &Trajectory) -> (f64, f64) {
    let mut worst = (0.0, traj.records.first().map_or(0.0, |r| r.t));
    for w in traj.records.windows(2) {
        let inc = w[1].e - w[0].e;
        if inc > worst.0 {
            worst = (inc, w[1].t);
        }
    }
    worst
}
