//! JSON run specification.
//!
//! A document is processed in four passes: dotted-path overrides are applied
//! to the raw JSON, every unknown key is collected, the document is
//! deserialized with defaults filled, and every cross-field constraint is
//! checked. Unknown keys and constraint violations are reported together in
//! one [`Error::Config`].

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::analysis::StableSetConstants;
use crate::domain::{embedding_constant, grad_sq_norm, DomainSpec, Field};
use crate::error::{Error, Result};
use crate::kernel::{parse_samples, KernelKind, RelaxationKernel, TailModel};
use crate::solver::{MemoryMode, SimConfig, DEFAULT_BLOWUP_THRESHOLD};
use crate::varexp::{validate_exponent_bounds, ExponentField, ExponentProfile, DEFAULT_Q_MAX};

/// Default auxiliary exponent `σ` of the power-law envelope.
pub const DEFAULT_SIGMA: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainBlock {
    #[serde(default)]
    pub dim: Option<usize>,
    pub lengths: Vec<f64>,
    pub nodes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentsBlock {
    #[serde(default = "default_m")]
    pub m: ExponentProfile,
    #[serde(default = "default_p")]
    pub p: ExponentProfile,
    #[serde(default = "default_q_max")]
    pub q_max: f64,
}

fn default_m() -> ExponentProfile {
    ExponentProfile::Const { value: 2.0 }
}

fn default_p() -> ExponentProfile {
    ExponentProfile::Const { value: 4.0 }
}

fn default_q_max() -> f64 {
    DEFAULT_Q_MAX
}

impl Default for ExponentsBlock {
    fn default() -> Self {
        ExponentsBlock {
            m: default_m(),
            p: default_p(),
            q_max: default_q_max(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum KernelBlock {
    Zero,
    Exponential {
        g0: f64,
        k: f64,
    },
    PowerLaw {
        g0: f64,
        c: f64,
        alpha: f64,
    },
    /// Samples inline or from a whitespace table `t g xi`, resolved
    /// relative to the spec file.
    Sampled {
        #[serde(default)]
        file: Option<PathBuf>,
        #[serde(default)]
        t: Vec<f64>,
        #[serde(default)]
        g: Vec<f64>,
        #[serde(default)]
        xi: Vec<f64>,
        #[serde(default)]
        tail: Option<TailModel>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coefficients {
    #[serde(default = "one")]
    pub a: f64,
    #[serde(default = "one")]
    pub b: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for Coefficients {
    fn default() -> Self {
        Coefficients { a: 1.0, b: 1.0 }
    }
}

/// Named initial profiles; all vanish on the boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialProfile {
    Zero,
    /// `amplitude · Πᵢ sin(kᵢπxᵢ/Lᵢ)`, `k` defaulting to 1 on every axis.
    SineMode {
        amplitude: f64,
        #[serde(default)]
        mode: Vec<usize>,
    },
    /// `amplitude · exp(1 − 1/(1−r²))` for `r = |x−center|/width < 1`.
    Bump {
        amplitude: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
        #[serde(default)]
        width: Option<f64>,
    },
    /// First Dirichlet mode scaled so that `λ(0) = fraction·λ₁`.
    ScaledEigenmode {
        fraction: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialBlock {
    pub u0: InitialProfile,
    #[serde(default = "zero_profile")]
    pub u1: InitialProfile,
}

fn zero_profile() -> InitialProfile {
    InitialProfile::Zero
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeBlock {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "one_usize")]
    pub output_stride: usize,
    #[serde(default = "one_usize")]
    pub history_stride: usize,
    #[serde(default)]
    pub memory: MemoryMode,
    #[serde(default = "default_threshold")]
    pub blowup_threshold: f64,
}

fn one_usize() -> usize {
    1
}

fn default_threshold() -> f64 {
    DEFAULT_BLOWUP_THRESHOLD
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnvelopeRequest {
    /// Type II for power-law kernels, Type I otherwise.
    #[default]
    Auto,
    TypeI,
    #[serde(rename = "type-ii")]
    TypeII,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisBlock {
    #[serde(default)]
    pub envelope: EnvelopeRequest,
    #[serde(default = "yes")]
    pub fit: bool,
    /// Overrides the computed embedding bound.
    #[serde(default, rename = "B")]
    pub b_override: Option<f64>,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
}

fn yes() -> bool {
    true
}

fn default_sigma() -> f64 {
    DEFAULT_SIGMA
}

impl Default for AnalysisBlock {
    fn default() -> Self {
        AnalysisBlock {
            envelope: EnvelopeRequest::Auto,
            fit: true,
            b_override: None,
            sigma: DEFAULT_SIGMA,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub domain: DomainBlock,
    #[serde(default)]
    pub exponents: ExponentsBlock,
    pub kernel: KernelBlock,
    #[serde(default)]
    pub coefficients: Coefficients,
    pub initial: InitialBlock,
    pub time: TimeBlock,
    #[serde(default)]
    pub analysis: AnalysisBlock,
    /// Directory that relative kernel files are resolved against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

/// Runtime objects built from a validated spec.
#[derive(Debug, Clone)]
pub struct Setup {
    pub dom: DomainSpec,
    pub m: ExponentField,
    pub p: ExponentField,
    pub kernel: RelaxationKernel,
    pub cfg: SimConfig,
    pub u0: Field,
    pub u1: Field,
    /// Embedding bound used for every constant: the override, or the larger
    /// of the bounds for `m` and `p`.
    pub b_embed: f64,
}

const TOP_KEYS: &[&str] = &[
    "domain",
    "exponents",
    "kernel",
    "coefficients",
    "initial",
    "time",
    "analysis",
];

fn allowed_profile_keys(tag: &str) -> &'static [&'static str] {
    match tag {
        "const" => &["profile", "value"],
        "linear" => &["profile", "from", "to"],
        "sine-bump" => &["profile", "base", "amplitude"],
        "nodal" => &["profile", "values"],
        "zero" => &["profile"],
        "sine-mode" => &["profile", "amplitude", "mode"],
        "bump" => &["profile", "amplitude", "center", "width"],
        "scaled-eigenmode" => &["profile", "fraction"],
        _ => &["profile"],
    }
}

fn allowed_kernel_keys(tag: &str) -> &'static [&'static str] {
    match tag {
        "exponential" => &["kind", "g0", "k"],
        "power-law" => &["kind", "g0", "c", "alpha"],
        "sampled" => &["kind", "file", "t", "g", "xi", "tail"],
        _ => &["kind"],
    }
}

fn collect_unknown(obj: &Map<String, Value>, allowed: &[&str], path: &str, out: &mut Vec<String>) {
    for key in obj.keys() {
        if !allowed.contains(&key.as_str()) {
            let full = if path.is_empty() {
                key.clone()
            } else {
                format!("{path}.{key}")
            };
            out.push(format!("unknown key '{full}'"));
        }
    }
}

fn tag_of<'a>(v: &'a Value, tag: &str) -> &'a str {
    v.get(tag).and_then(Value::as_str).unwrap_or("")
}

/// Every key of `doc` that no block accepts.
pub fn unknown_keys(doc: &Value) -> Vec<String> {
    let mut out = Vec::new();
    let Some(top) = doc.as_object() else {
        return out;
    };
    collect_unknown(top, TOP_KEYS, "", &mut out);
    let block = |name: &str| top.get(name).and_then(Value::as_object);
    if let Some(o) = block("domain") {
        collect_unknown(o, &["dim", "lengths", "nodes"], "domain", &mut out);
    }
    if let Some(o) = block("exponents") {
        collect_unknown(o, &["m", "p", "q_max"], "exponents", &mut out);
        for q in ["m", "p"] {
            if let Some(p) = o.get(q).and_then(Value::as_object) {
                let allowed = allowed_profile_keys(tag_of(&o[q], "profile"));
                collect_unknown(p, allowed, &format!("exponents.{q}"), &mut out);
            }
        }
    }
    if let Some(o) = block("kernel") {
        collect_unknown(
            o,
            allowed_kernel_keys(tag_of(&top["kernel"], "kind")),
            "kernel",
            &mut out,
        );
        if let Some(t) = o.get("tail").and_then(Value::as_object) {
            let allowed: &[&str] = match tag_of(&o["tail"], "kind") {
                "exponential" => &["kind", "rate"],
                "power" => &["kind", "exponent"],
                _ => &["kind"],
            };
            collect_unknown(t, allowed, "kernel.tail", &mut out);
        }
    }
    if let Some(o) = block("coefficients") {
        collect_unknown(o, &["a", "b"], "coefficients", &mut out);
    }
    if let Some(o) = block("initial") {
        collect_unknown(o, &["u0", "u1"], "initial", &mut out);
        for u in ["u0", "u1"] {
            if let Some(p) = o.get(u).and_then(Value::as_object) {
                let allowed = allowed_profile_keys(tag_of(&o[u], "profile"));
                collect_unknown(p, allowed, &format!("initial.{u}"), &mut out);
            }
        }
    }
    if let Some(o) = block("time") {
        let allowed = [
            "dt",
            "t_end",
            "output_stride",
            "history_stride",
            "memory",
            "blowup_threshold",
        ];
        collect_unknown(o, &allowed, "time", &mut out);
    }
    if let Some(o) = block("analysis") {
        collect_unknown(o, &["envelope", "fit", "B", "sigma"], "analysis", &mut out);
    }
    out
}

/// Set `path` (dot-separated) to `value`, creating objects on the way. The
/// value is read as JSON when it parses, as a string otherwise.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::invalid(format!("override '{assignment}' is not of the form key=value")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(Error::invalid(format!("override path '{path}' has an empty segment")));
    }
    let mut node = doc;
    for key in &keys[..keys.len() - 1] {
        if !node.is_object() {
            return Err(Error::invalid(format!("override path '{path}' crosses a non-object")));
        }
        node = node
            .as_object_mut()
            .expect("checked above")
            .entry(key.to_string())
            .or_insert_with(|| Value::Object(Map::new()));
    }
    match node.as_object_mut() {
        Some(obj) => {
            obj.insert(keys[keys.len() - 1].to_string(), value);
            Ok(())
        }
        None => Err(Error::invalid(format!("override path '{path}' crosses a non-object"))),
    }
}

/// Parse, override and validate a run specification.
pub fn parse_spec(text: &str, overrides: &[String], base_dir: Option<&Path>) -> Result<RunSpec> {
    let mut doc: Value = serde_json::from_str(text)?;
    if !doc.is_object() {
        return Err(Error::Config(
            vec!["the run specification must be a JSON object".into()],
        ));
    }
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    let unknown = unknown_keys(&doc);
    if !unknown.is_empty() {
        return Err(Error::Config(unknown));
    }
    let mut spec: RunSpec = serde_json::from_value(doc).map_err(|e| Error::Config(vec![e.to_string()]))?;
    spec.base_dir = base_dir.map(Path::to_path_buf);
    let violations = spec.violations();
    if violations.is_empty() {
        Ok(spec)
    } else {
        Err(Error::Config(violations))
    }
}

/// Read and parse a spec file; relative kernel files resolve against its
/// directory.
pub fn load_spec(path: &Path, overrides: &[String]) -> Result<RunSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_spec(&text, overrides, path.parent())
}

impl KernelBlock {
    pub fn build(&self, base_dir: Option<&Path>) -> Result<RelaxationKernel> {
        match self {
            KernelBlock::Zero => Ok(RelaxationKernel::zero()),
            KernelBlock::Exponential { g0, k } => RelaxationKernel::exponential(*g0, *k),
            KernelBlock::PowerLaw { g0, c, alpha } => RelaxationKernel::power_law(*g0, *c, *alpha),
            KernelBlock::Sampled { file, t, g, xi, tail } => {
                let (t, g, xi) = match file {
                    Some(f) => {
                        let path = match base_dir {
                            Some(d) if f.is_relative() => d.join(f),
                            _ => f.clone(),
                        };
                        let text =
                            std::fs::read_to_string(&path).map_err(|e| Error::io(path.display().to_string(), e))?;
                        let (t, g, xi) = parse_samples(&text)?;
                        let xi =
                            xi.ok_or_else(|| Error::invalid("sampled kernel file needs a third column with xi(t)"))?;
                        (t, g, xi)
                    }
                    None => (t.clone(), g.clone(), xi.clone()),
                };
                RelaxationKernel::new(KernelKind::GeneralXi { t, g, xi, tail: *tail })
            }
        }
    }
}

fn profile_field(profile: &InitialProfile, dom: &DomainSpec) -> Result<Field> {
    let lengths = dom.lengths().to_vec();
    let dim = dom.dim();
    match profile {
        InitialProfile::Zero => Ok(Field::zeros(dom.len())),
        InitialProfile::SineMode { amplitude, mode } => {
            if !mode.is_empty() && (mode.len() != dim || mode.contains(&0)) {
                return Err(Error::invalid(format!("sine-mode needs {dim} positive mode numbers")));
            }
            let k: Vec<f64> = (0..dim).map(|i| mode.get(i).copied().unwrap_or(1) as f64).collect();
            Ok(dom.sample_dirichlet(|x| {
                amplitude * (0..dim).map(|i| (k[i] * PI * x[i] / lengths[i]).sin()).product::<f64>()
            }))
        }
        InitialProfile::Bump {
            amplitude,
            center,
            width,
        } => {
            let c: Vec<f64> = center
                .clone()
                .unwrap_or_else(|| lengths.iter().map(|l| 0.5 * l).collect());
            if c.len() != dim {
                return Err(Error::invalid(format!("bump center needs {dim} coordinates")));
            }
            let w = width.unwrap_or(0.25 * lengths.iter().cloned().fold(f64::INFINITY, f64::min));
            if !(w > 0.0) {
                return Err(Error::invalid(format!("bump width must be positive, got {w}")));
            }
            Ok(dom.sample_dirichlet(|x| {
                let r2: f64 = (0..dim).map(|i| ((x[i] - c[i]) / w).powi(2)).sum();
                if r2 < 1.0 {
                    amplitude * (1.0 - 1.0 / (1.0 - r2)).exp()
                } else {
                    0.0
                }
            }))
        }
        InitialProfile::ScaledEigenmode { .. } => Err(Error::invalid(
            "scaled-eigenmode needs the well constants; use RunSpec::setup",
        )),
    }
}

impl RunSpec {
    /// Every constraint violation of an already deserialized spec.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let d = &self.domain;
        if let Some(dim) = d.dim {
            if dim != d.lengths.len() {
                out.push(format!("domain.dim = {dim} but {} lengths given", d.lengths.len()));
            }
        }
        let dom = match DomainSpec::new(&d.lengths, &d.nodes) {
            Ok(dom) => Some(dom),
            Err(e) => {
                out.push(format!("domain: {e}"));
                None
            }
        };
        let kernel = match self.kernel.build(self.base_dir.as_deref()) {
            Ok(k) => Some(k),
            Err(e) => {
                out.push(format!("kernel: {e}"));
                None
            }
        };
        let c = self.coefficients;
        if !(c.a >= 0.0 && c.a.is_finite()) {
            out.push(format!("coefficients.a must be finite and >= 0, got {}", c.a));
        }
        if !(c.b >= 0.0 && c.b.is_finite()) {
            out.push(format!("coefficients.b must be finite and >= 0, got {}", c.b));
        }
        let t = &self.time;
        if !(t.dt > 0.0) || !(t.t_end > 0.0) {
            out.push(format!(
                "time.dt and time.t_end must be positive, got {} and {}",
                t.dt, t.t_end
            ));
        }
        if t.output_stride == 0 || t.history_stride == 0 {
            out.push("time.output_stride and time.history_stride must be >= 1".into());
        }
        if !(t.blowup_threshold > 0.0) {
            out.push(format!(
                "time.blowup_threshold must be positive, got {}",
                t.blowup_threshold
            ));
        }
        if matches!(self.initial.u1, InitialProfile::ScaledEigenmode { .. }) {
            out.push("initial.u1 cannot be scaled-eigenmode".into());
        }
        if let InitialProfile::ScaledEigenmode { fraction } = self.initial.u0 {
            if !(fraction >= 0.0 && fraction.is_finite()) {
                out.push(format!("initial.u0.fraction must be finite and >= 0, got {fraction}"));
            }
        }
        if let Some(b) = self.analysis.b_override {
            if !(b > 0.0 && b.is_finite()) {
                out.push(format!("analysis.B must be positive, got {b}"));
            }
        }
        let power = matches!(self.kernel, KernelBlock::PowerLaw { .. });
        let wants_type_two = match self.analysis.envelope {
            EnvelopeRequest::TypeII => true,
            EnvelopeRequest::Auto => power,
            _ => false,
        };
        if wants_type_two {
            let sigma = self.analysis.sigma;
            if !power {
                out.push("analysis.envelope = type-ii needs a power-law kernel".into());
            }
            if !(sigma > 0.0 && sigma < 1.0) {
                out.push(format!("analysis.sigma must lie in (0,1), got {sigma}"));
            }
            if let KernelBlock::PowerLaw { alpha, .. } = self.kernel {
                if !(2.0 * alpha + sigma < 3.0) {
                    out.push(format!(
                        "2*alpha + sigma < 3 required, got 2*{alpha} + {sigma} = {}",
                        2.0 * alpha + sigma
                    ));
                }
            }
        }
        if self.analysis.envelope == EnvelopeRequest::TypeI && matches!(self.kernel, KernelBlock::Zero) {
            out.push("analysis.envelope = type-i needs a memory kernel".into());
        }
        if let Some(dom) = &dom {
            for (name, profile) in [("m", &self.exponents.m), ("p", &self.exponents.p)] {
                match profile.build(dom) {
                    Ok(field) => {
                        let r = validate_exponent_bounds(&field, self.exponents.q_max);
                        if !r.ok {
                            out.push(format!(
                                "exponents.{name} must lie in [2, {}], got range [{}, {}]",
                                self.exponents.q_max, r.q1, r.q2
                            ));
                        }
                    }
                    Err(e) => out.push(format!("exponents.{name}: {e}")),
                }
            }
            out.extend(
                self.sim_config()
                    .violations(dom)
                    .into_iter()
                    .map(|v| format!("time: {v}")),
            );
            if let (Some(k), true) = (&kernel, t.memory == MemoryMode::Recursive) {
                if !matches!(k.kind(), KernelKind::ExponentialXi { .. } | KernelKind::Zero) {
                    out.push("time.memory = recursive needs an exponential kernel".into());
                }
            }
            for (name, profile) in [("u0", &self.initial.u0), ("u1", &self.initial.u1)] {
                if !matches!(profile, InitialProfile::ScaledEigenmode { .. }) {
                    if let Err(e) = profile_field(profile, dom) {
                        out.push(format!("initial.{name}: {e}"));
                    }
                }
            }
            if matches!(self.initial.u0, InitialProfile::ScaledEigenmode { .. }) {
                if let Some(k) = &kernel {
                    if k.l().is_none_or(|l| l <= 0.0) {
                        out.push("initial.u0 = scaled-eigenmode needs a kernel with l > 0".into());
                    }
                }
                if c.b <= 0.0 {
                    out.push("initial.u0 = scaled-eigenmode needs b > 0".into());
                }
            }
        }
        out
    }

    pub fn sim_config(&self) -> SimConfig {
        let t = &self.time;
        SimConfig {
            a: self.coefficients.a,
            b: self.coefficients.b,
            dt: t.dt,
            t_end: t.t_end,
            blowup_threshold: t.blowup_threshold,
            history_stride: t.history_stride,
            output_stride: t.output_stride,
            memory: t.memory,
        }
    }

    /// Build grid, exponents, kernel, solver settings and initial data.
    pub fn setup(&self) -> Result<Setup> {
        let dom = DomainSpec::new(&self.domain.lengths, &self.domain.nodes)?;
        let m = self.exponents.m.build(&dom)?;
        let p = self.exponents.p.build(&dom)?;
        let kernel = self.kernel.build(self.base_dir.as_deref())?;
        let b_embed = match self.analysis.b_override {
            Some(b) => b,
            None => embedding_constant(&dom, &m)?.max(embedding_constant(&dom, &p)?),
        };
        let u0 = match self.initial.u0 {
            InitialProfile::ScaledEigenmode { fraction } => {
                let l = kernel
                    .l()
                    .filter(|l| *l > 0.0)
                    .ok_or_else(|| Error::invalid("scaled-eigenmode needs a kernel with l > 0"))?;
                let c = StableSetConstants::new(b_embed, l.min(1.0), self.coefficients.b, p.q1(), p.q2())?;
                let mode = profile_field(
                    &InitialProfile::SineMode {
                        amplitude: 1.0,
                        mode: vec![],
                    },
                    &dom,
                )?;
                let lam = (l * grad_sq_norm(&mode, &dom)?).sqrt();
                mode.scaled(fraction * c.lambda1 / lam)
            }
            ref other => profile_field(other, &dom)?,
        };
        let u1 = profile_field(&self.initial.u1, &dom)?;
        Ok(Setup {
            cfg: self.sim_config(),
            dom,
            m,
            p,
            kernel,
            u0,
            u1,
            b_embed,
        })
    }
}
