//! Pipelines behind the `check`, `simulate`, `verify`, `fit` and `sweep`
//! subcommands.
//!
//! Each pipeline returns a typed report; [`Artifacts`] renders reports and
//! trajectories to the files the binary writes. Nothing here reads a clock
//! or a random source, so identical specs give byte-identical artifacts.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{
    check_blowup_conditions, check_decay_conditions, check_invariant_set, compute_k, compute_k_alpha_sigma, fit_decay,
    fit_decay_series, verify_envelope, ConditionReport, DecayConstant, DecayEnvelope, DecayFit, EnvelopeVerdict,
    InvariantSetVerdict, StableSetConstants, Unmet,
};
use crate::config::{load_spec, parse_spec, EnvelopeRequest, RunSpec, Setup};
use crate::domain::{discrete_first_eigenvalue, first_eigenvalue};
use crate::energy::{energy_identity_residual, max_energy_increase, total_energy, EnergyRecord};
use crate::error::{Error, Result};
use crate::kernel::{Admissibility, KernelKind};
use crate::report::to_json;
use crate::solver::{run, Outcome, SimState, Trajectory};
use crate::SCHEMA;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_UNMET: i32 = 2;

/// A value or the reason it is unavailable.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Available<T> {
    Value(T),
    Unmet(Unmet),
}

impl<T> Available<T> {
    pub fn value(&self) -> Option<&T> {
        match self {
            Available::Value(v) => Some(v),
            Available::Unmet(_) => None,
        }
    }
}

impl<T> From<std::result::Result<T, Unmet>> for Available<T> {
    fn from(r: std::result::Result<T, Unmet>) -> Self {
        match r {
            Ok(v) => Available::Value(v),
            Err(u) => Available::Unmet(u),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnvelopeChoice {
    TypeI,
    #[serde(rename = "type-ii")]
    TypeII,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub schema: &'static str,
    pub admissibility: Admissibility,
    pub constants: Available<StableSetConstants>,
    /// First Dirichlet eigenvalue, continuum value.
    pub omega1: f64,
    /// Same eigenvalue of the discrete Laplacian, for comparison.
    pub omega1_discrete: f64,
    pub m1: f64,
    pub m2: f64,
    pub p1: f64,
    pub p2: f64,
    pub initial: EnergyRecord,
    pub decay_conditions: Option<ConditionReport>,
    pub blowup_conditions: Option<ConditionReport>,
    pub envelope: Option<EnvelopeChoice>,
    pub decay_constant: Option<Available<DecayConstant>>,
    pub decay_conditions_hold: bool,
    pub exit_code: i32,
}

fn unmet(condition: &'static str, detail: impl Into<String>) -> Unmet {
    Unmet {
        condition,
        detail: detail.into(),
    }
}

fn envelope_choice(spec: &RunSpec, setup: &Setup) -> Option<EnvelopeChoice> {
    let power = matches!(setup.kernel.kind(), KernelKind::PowerLaw { .. });
    match spec.analysis.envelope {
        EnvelopeRequest::None => None,
        EnvelopeRequest::TypeI => Some(EnvelopeChoice::TypeI),
        EnvelopeRequest::TypeII => Some(EnvelopeChoice::TypeII),
        EnvelopeRequest::Auto if setup.kernel.is_zero() => None,
        EnvelopeRequest::Auto if power => Some(EnvelopeChoice::TypeII),
        EnvelopeRequest::Auto => Some(EnvelopeChoice::TypeI),
    }
}

fn decay_constant(
    spec: &RunSpec,
    setup: &Setup,
    c: &StableSetConstants,
    choice: EnvelopeChoice,
) -> std::result::Result<DecayConstant, Unmet> {
    let (m1, m2) = (setup.m.q1(), setup.m.q2());
    let (a, measure, omega1) = (setup.cfg.a, setup.dom.measure(), first_eigenvalue(&setup.dom));
    match choice {
        EnvelopeChoice::TypeI => {
            let xi = setup
                .kernel
                .xi()
                .ok_or_else(|| unmet("decay class", "kernel has no rate function xi"))?;
            compute_k(c, m1, m2, a, measure, omega1, xi.xi0())
        }
        EnvelopeChoice::TypeII => match *setup.kernel.kind() {
            KernelKind::PowerLaw { c: c_ode, alpha, .. } => {
                let bound = setup.kernel.power_law_envelope_constant().expect("power-law kernel");
                compute_k_alpha_sigma(c, m1, m2, a, measure, omega1, alpha, spec.analysis.sigma, c_ode, bound)
            }
            _ => Err(unmet("decay class", "power-law envelope needs a power-law kernel")),
        },
    }
}

/// Energy of the initial data.
pub fn initial_record(setup: &Setup) -> Result<EnergyRecord> {
    let state = SimState::new(
        &setup.cfg,
        &setup.kernel,
        &setup.p,
        &setup.dom,
        setup.u0.clone(),
        setup.u1.clone(),
    )?;
    total_energy(&state, &setup.kernel, &setup.m, &setup.p, &setup.cfg, &setup.dom)
}

/// Constants, condition reports and the decay constant of a spec.
pub fn check(spec: &RunSpec) -> Result<CheckReport> {
    let setup = spec.setup()?;
    check_setup(spec, &setup)
}

fn check_setup(spec: &RunSpec, setup: &Setup) -> Result<CheckReport> {
    let initial = initial_record(setup)?;
    let admissibility = setup.kernel.admissibility();
    let constants: Available<StableSetConstants> = match admissibility.l {
        Some(l) if l > 0.0 => {
            StableSetConstants::new(setup.b_embed, l.min(1.0), setup.cfg.b, setup.p.q1(), setup.p.q2())
                .map(|c| c.with_initial_data(initial.e, initial.lambda_t))
                .map_err(|e| unmet("well constants", e.to_string()))
                .into()
        }
        Some(l) => Available::Unmet(unmet("l > 0", format!("l = {l}"))),
        None => Available::Unmet(unmet("l > 0", "total kernel mass unavailable without a tail model")),
    };
    let choice = envelope_choice(spec, setup);
    let (decay_conditions, blowup_conditions, decay_constant) = match constants.value() {
        Some(c) => (
            Some(check_decay_conditions(c, &setup.kernel)),
            Some(check_blowup_conditions(c, &setup.kernel, setup.m.q2())),
            choice.map(|ch| decay_constant(spec, setup, c, ch).into()),
        ),
        None => (None, None, None),
    };
    let hold = admissibility.ok && decay_conditions.as_ref().is_some_and(|r| r.ok);
    Ok(CheckReport {
        schema: SCHEMA,
        admissibility,
        constants,
        omega1: first_eigenvalue(&setup.dom),
        omega1_discrete: discrete_first_eigenvalue(&setup.dom),
        m1: setup.m.q1(),
        m2: setup.m.q2(),
        p1: setup.p.q1(),
        p2: setup.p.q2(),
        initial,
        decay_conditions,
        blowup_conditions,
        envelope: choice,
        decay_constant,
        decay_conditions_hold: hold,
        exit_code: if hold { EXIT_OK } else { EXIT_UNMET },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extremum {
    pub value: f64,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateReport {
    pub schema: &'static str,
    pub outcome: Outcome,
    pub records: usize,
    pub initial: EnergyRecord,
    #[serde(rename = "final")]
    pub last: EnergyRecord,
    /// Largest increase of `E` between consecutive records.
    pub max_energy_increase: Extremum,
    pub identity_residual_max: f64,
    pub identity_residual_rms: f64,
    pub exit_code: i32,
}

fn summarize(traj: &Trajectory) -> SimulateReport {
    let (inc, t) = max_energy_increase(traj);
    let res = energy_identity_residual(traj);
    SimulateReport {
        schema: SCHEMA,
        outcome: traj.outcome,
        records: traj.records.len(),
        initial: traj.records[0],
        last: *traj.records.last().expect("a run records its initial state"),
        max_energy_increase: Extremum { value: inc, t },
        identity_residual_max: res.max_abs,
        identity_residual_rms: res.l2,
        exit_code: EXIT_OK,
    }
}

fn simulate_setup(setup: &Setup) -> Result<Trajectory> {
    run(
        &setup.cfg,
        &setup.kernel,
        &setup.m,
        &setup.p,
        &setup.dom,
        setup.u0.clone(),
        setup.u1.clone(),
    )
}

/// Run the solver. Blow-up is an outcome, not an error.
pub fn simulate(spec: &RunSpec) -> Result<(Trajectory, SimulateReport)> {
    let setup = spec.setup()?;
    let traj = simulate_setup(&setup)?;
    let report = summarize(&traj);
    Ok((traj, report))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerifyVerdict {
    /// Envelope and invariant set hold at every record.
    Verified,
    /// Simulation completed; no envelope was requested.
    Simulated,
    EnvelopeViolated,
    InvariantSetViolated,
    BlewUp,
    ConditionsUnmet,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub schema: &'static str,
    pub verdict: VerifyVerdict,
    pub check: CheckReport,
    pub simulation: Option<SimulateReport>,
    pub envelope: Option<DecayEnvelope>,
    pub envelope_verdict: Option<EnvelopeVerdict>,
    pub invariant_set: Option<InvariantSetVerdict>,
    pub fit: Option<Available<DecayFit>>,
    pub exit_code: i32,
}

/// `check → simulate → envelope → verify → fit`. Unmet conditions stop the
/// pipeline before the simulation.
pub fn verify(spec: &RunSpec) -> Result<(Option<Trajectory>, VerifyReport)> {
    let setup = spec.setup()?;
    let check = check_setup(spec, &setup)?;
    let short = |check: CheckReport| VerifyReport {
        schema: SCHEMA,
        verdict: VerifyVerdict::ConditionsUnmet,
        check,
        simulation: None,
        envelope: None,
        envelope_verdict: None,
        invariant_set: None,
        fit: None,
        exit_code: EXIT_UNMET,
    };
    if !check.decay_conditions_hold {
        return Ok((None, short(check)));
    }
    let k = match &check.decay_constant {
        Some(Available::Value(k)) => Some(k.k),
        Some(Available::Unmet(_)) => return Ok((None, short(check))),
        None => None,
    };
    let traj = simulate_setup(&setup)?;
    let simulation = summarize(&traj);
    let e0 = traj.records[0].e;
    let m2 = setup.m.q2();
    let envelope = match (check.envelope, k) {
        (Some(EnvelopeChoice::TypeI), Some(k)) => setup.kernel.xi().map(|xi| DecayEnvelope::type_one(k, xi, e0, m2)),
        (Some(EnvelopeChoice::TypeII), Some(k)) => match *setup.kernel.kind() {
            KernelKind::PowerLaw { alpha, .. } => Some(DecayEnvelope::type_two(k, alpha, spec.analysis.sigma, e0, m2)),
            _ => None,
        },
        _ => None,
    };
    let envelope_verdict = envelope.as_ref().map(|env| verify_envelope(&traj, env));
    let invariant_set = check
        .constants
        .value()
        .and_then(|c| c.lambda2)
        .map(|l2| check_invariant_set(&traj, l2));
    let fit = spec.analysis.fit.then(|| fit_decay(&traj).into());
    let verdict = if traj.outcome != Outcome::Completed {
        VerifyVerdict::BlewUp
    } else if envelope_verdict.as_ref().is_some_and(|v| !v.ok) {
        VerifyVerdict::EnvelopeViolated
    } else if invariant_set.as_ref().is_some_and(|v| !v.ok) {
        VerifyVerdict::InvariantSetViolated
    } else if envelope_verdict.is_some() {
        VerifyVerdict::Verified
    } else {
        VerifyVerdict::Simulated
    };
    let exit_code = match verdict {
        VerifyVerdict::Verified | VerifyVerdict::Simulated => EXIT_OK,
        _ => EXIT_UNMET,
    };
    Ok((
        Some(traj),
        VerifyReport {
            schema: SCHEMA,
            verdict,
            check,
            simulation: Some(simulation),
            envelope,
            envelope_verdict,
            invariant_set,
            fit,
            exit_code,
        },
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub schema: &'static str,
    /// Where the energies came from: `simulation` or a CSV path.
    pub source: String,
    pub fit: Available<DecayFit>,
    pub exit_code: i32,
}

fn fit_report(source: String, fit: std::result::Result<DecayFit, Unmet>) -> FitReport {
    let exit_code = if fit.is_ok() { EXIT_OK } else { EXIT_UNMET };
    FitReport {
        schema: SCHEMA,
        source,
        fit: fit.into(),
        exit_code,
    }
}

/// Simulate and fit the energy decay class.
pub fn fit_simulated(spec: &RunSpec) -> Result<(Trajectory, FitReport)> {
    let (traj, _) = simulate(spec)?;
    let report = fit_report("simulation".into(), fit_decay(&traj));
    Ok((traj, report))
}

/// Fit the `t` and `E` columns of a trajectory CSV.
pub fn fit_csv(path: &Path) -> Result<FitReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split(',').map(str::trim).collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| Error::invalid(format!("{} has no '{name}' column", path.display())))
    };
    let (ti, ei) = (col("t")?, col("E")?);
    let (mut t, mut e) = (Vec::new(), Vec::new());
    for (n, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let get = |i: usize| -> Result<f64> {
            cells
                .get(i)
                .and_then(|c| c.parse().ok())
                .ok_or_else(|| Error::invalid(format!("{}: bad value on data line {}", path.display(), n + 1)))
        };
        t.push(get(ti)?);
        e.push(get(ei)?);
    }
    Ok(fit_report(path.display().to_string(), fit_decay_series(&t, &e)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRun {
    pub overrides: Vec<String>,
    pub exit_code: i32,
    pub verdict: Option<VerifyVerdict>,
    pub outcome: Option<Outcome>,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    pub final_energy: Option<f64>,
    pub envelope_max_violation: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub schema: &'static str,
    pub runs: Vec<SweepRun>,
    pub exit_code: i32,
}

/// Cartesian product of `key=v1,v2,...` axes, first axis slowest.
pub fn sweep_grid(axes: &[String]) -> Result<Vec<Vec<String>>> {
    let mut grid: Vec<Vec<String>> = vec![Vec::new()];
    for axis in axes {
        let (key, values) = axis
            .split_once('=')
            .ok_or_else(|| Error::invalid(format!("sweep axis '{axis}' is not of the form key=v1,v2,...")))?;
        let values = split_values(values);
        if values.is_empty() {
            return Err(Error::invalid(format!("sweep axis '{key}' has no values")));
        }
        grid = grid
            .into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |v| {
                    let mut run = prefix.clone();
                    run.push(format!("{key}={v}"));
                    run
                })
            })
            .collect();
    }
    Ok(grid)
}

/// Split on commas outside brackets, so `[1,2],[3,4]` gives two values.
fn split_values(s: &str) -> Vec<String> {
    let (mut out, mut cur, mut depth) = (Vec::new(), String::new(), 0i32);
    for ch in s.chars() {
        match ch {
            '[' | '{' => depth += 1,
            ']' | '}' => depth -= 1,
            ',' if depth == 0 => {
                out.push(std::mem::take(&mut cur));
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Run [`verify`] on every point of the sweep grid in parallel. Results
/// keep grid order.
pub fn sweep(text: &str, base_dir: Option<&Path>, overrides: &[String], axes: &[String]) -> Result<SweepReport> {
    let grid = sweep_grid(axes)?;
    let runs: Vec<SweepRun> = grid
        .par_iter()
        .map(|point| {
            let all: Vec<String> = overrides.iter().chain(point).cloned().collect();
            let result = parse_spec(text, &all, base_dir).and_then(|spec| verify(&spec));
            match result {
                Ok((traj, r)) => SweepRun {
                    overrides: point.clone(),
                    exit_code: r.exit_code,
                    verdict: Some(r.verdict),
                    outcome: r.simulation.as_ref().map(|s| s.outcome),
                    k: r.check.decay_constant.as_ref().and_then(|k| k.value().map(|k| k.k)),
                    final_energy: traj.as_ref().and_then(|t| t.records.last().map(|r| r.e)),
                    envelope_max_violation: r.envelope_verdict.as_ref().map(|v| v.max_violation),
                    error: None,
                },
                Err(e) => SweepRun {
                    overrides: point.clone(),
                    exit_code: EXIT_ERROR,
                    verdict: None,
                    outcome: None,
                    k: None,
                    final_energy: None,
                    envelope_max_violation: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let exit_code = if runs.iter().any(|r| r.exit_code == EXIT_ERROR) {
        EXIT_ERROR
    } else {
        EXIT_OK
    };
    Ok(SweepReport {
        schema: SCHEMA,
        runs,
        exit_code,
    })
}

/// Files produced by a command, written only on [`Artifacts::write`].
#[derive(Debug, Default)]
pub struct Artifacts {
    pub files: Vec<(String, String)>,
}

impl Artifacts {
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.files.push((name.to_string(), to_json(value)?));
        Ok(())
    }

    pub fn csv(&mut self, name: &str, traj: &Trajectory) {
        self.files.push((name.to_string(), traj.to_csv()));
    }

    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
        self.files
            .iter()
            .map(|(name, body)| {
                let path = dir.join(name);
                std::fs::write(&path, body).map_err(|e| Error::io(path.display().to_string(), e))?;
                Ok(path)
            })
            .collect()
    }
}

/// Load a spec file and run one subcommand, returning its exit code and
/// artifacts.
pub fn dispatch(command: &str, spec_path: &Path, overrides: &[String], extra: &[String]) -> Result<(i32, Artifacts)> {
    let mut art = Artifacts::default();
    let code = match command {
        "check" => {
            let r = check(&load_spec(spec_path, overrides)?)?;
            art.json("check.json", &r)?;
            r.exit_code
        }
        "simulate" => {
            let (traj, r) = simulate(&load_spec(spec_path, overrides)?)?;
            art.csv("trajectory.csv", &traj);
            art.json("simulate.json", &r)?;
            r.exit_code
        }
        "verify" => {
            let (traj, r) = verify(&load_spec(spec_path, overrides)?)?;
            if let Some(traj) = traj {
                art.csv("trajectory.csv", &traj);
            }
            art.json("verify.json", &r)?;
            r.exit_code
        }
        "fit" => {
            let (traj, r) = fit_simulated(&load_spec(spec_path, overrides)?)?;
            art.csv("trajectory.csv", &traj);
            art.json("fit.json", &r)?;
            r.exit_code
        }
        "sweep" => {
            let text = std::fs::read_to_string(spec_path).map_err(|e| Error::io(spec_path.display().to_string(), e))?;
            let r = sweep(&text, spec_path.parent(), overrides, extra)?;
            art.json("sweep.json", &r)?;
            r.exit_code
        }
        other => return Err(Error::invalid(format!("unknown command '{other}'"))),
    };
    Ok((code, art))
}
