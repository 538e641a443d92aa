//! Flat `key = value` run configuration with dotted keys.
//!
//! Every key has a default; a config file and `--override` pairs only ever
//! replace entries of the table below. Unknown keys are rejected, and all
//! validation problems are collected before anything is computed.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use hartree_core::evolution::{IntegratorConfig, Scheme, Window};
use hartree_core::ground_state::{GroundStateOptions, InitialGuess};
use hartree_core::ModelParams;
use sha2::{Digest, Sha256};

/// `(key, default, description)`.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("scenario", "ground-state", "ground-state | evolve | blowup | verify | concentrate | sweep"),
    ("seed", "0", "seed for every random draw"),
    ("output.dir", "out", "artifact directory"),
    ("model.d", "3", "dimension, >= 3"),
    ("model.a", "-0.1", "inverse-square coupling, > -((d-2)/2)^2"),
    ("grid.n", "512", "number of radial nodes"),
    ("grid.r_max", "12", "outer radius"),
    ("ground_state.initial", "gaussian", "gaussian | sech"),
    ("ground_state.tol", "1e-9", "Euler-Lagrange residual target"),
    ("ground_state.max_iter", "2000", "iteration budget"),
    ("ground_state.descent_iters", "60", "length of the monotone descent stage"),
    ("ground_state.step", "0.01", "initial descent step"),
    ("integrator.dt", "1e-3", "time step"),
    ("integrator.t_end", "1", "final time"),
    ("integrator.scheme", "strang-split", "strang-split | midpoint-relaxation"),
    ("integrator.stride", "10", "steps between samples"),
    ("integrator.h_max", "1e8", "stop once H exceeds this"),
    ("integrator.min_cells", "4", "stop once sqrt(M/H) spans fewer origin cells"),
    ("integrator.safety", "1e4", "stability guard on dt * k_max^2"),
    ("initial.profile", "gaussian", "gaussian | ground-state | pseudo-conformal | shell | file"),
    ("initial.sigma", "1", "gaussian width"),
    ("initial.amplitude", "1", "peak amplitude of gaussian / shell data"),
    ("initial.mass_fraction", "none", "rescale gaussian / shell data to this multiple of M_gs"),
    ("initial.mu", "1", "ground-state amplitude factor"),
    ("initial.nu_s", "1", "ground-state rate factor"),
    ("initial.t_star", "1", "pseudo-conformal blow-up time"),
    ("initial.theta", "0", "pseudo-conformal phase"),
    ("initial.t0", "0", "pseudo-conformal snapshot time"),
    ("initial.omega", "1", "pseudo-conformal concentration scale"),
    ("initial.s0", "2", "shell radius"),
    ("initial.width", "0.5", "shell width"),
    ("initial.file", "", "ground-state text file (profile = file)"),
    ("concentration.windows", "", "comma list of radii and/or 'sqrt' for sqrt(T* - t)"),
    ("concentration.t_star", "1", "T* used by the sqrt window"),
    ("verify.fields", "50", "number of seeded random fields"),
    ("verify.theta_radius", "4", "support radius of the rotation profile"),
    ("verify.theta_s", "1", "rotation strength s"),
    ("sweep.scenario", "ground-state", "scenario run for each sweep value"),
    ("sweep.key", "model.a", "key varied by the sweep"),
    ("sweep.values", "", "comma list of values"),
    ("sweep.threads", "1", "worker threads"),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    GroundState,
    Evolve,
    Blowup,
    Verify,
    Concentrate,
    Sweep,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::GroundState => "ground-state",
            Scenario::Evolve => "evolve",
            Scenario::Blowup => "blowup",
            Scenario::Verify => "verify",
            Scenario::Concentrate => "concentrate",
            Scenario::Sweep => "sweep",
        }
    }
}

impl FromStr for Scenario {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "ground-state" => Scenario::GroundState,
            "evolve" => Scenario::Evolve,
            "blowup" => Scenario::Blowup,
            "verify" => Scenario::Verify,
            "concentrate" => Scenario::Concentrate,
            "sweep" => Scenario::Sweep,
            _ => return Err(format!("unknown scenario '{s}'")),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Profile {
    Gaussian { sigma: f64 },
    GroundState { mu: f64, nu_s: f64 },
    PseudoConformal { t_star: f64, theta: f64, t0: f64, omega: f64 },
    Shell { s0: f64, width: f64 },
    File(PathBuf),
}

#[derive(Clone, Debug)]
pub struct InitialSpec {
    pub profile: Profile,
    pub amplitude: f64,
    pub mass_fraction: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct VerifySpec {
    pub fields: usize,
    pub theta_radius: f64,
    pub theta_s: f64,
}

#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub scenario: Scenario,
    pub key: String,
    pub values: Vec<String>,
    pub threads: usize,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub seed: u64,
    pub out: PathBuf,
    pub params: ModelParams,
    pub n: usize,
    pub r_max: f64,
    pub ground_state: GroundStateOptions,
    pub integrator: IntegratorConfig,
    pub initial: InitialSpec,
    pub windows: Vec<Window>,
    pub verify: VerifySpec,
    pub sweep: SweepSpec,
    /// Every key with its resolved value, defaults included.
    pub resolved: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} configuration error(s):", self.0.len())?;
        for e in &self.0 {
            writeln!(f, "  {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

pub fn is_known_key(key: &str) -> bool {
    KEYS.iter().any(|(k, _, _)| *k == key)
}

pub fn defaults() -> BTreeMap<String, String> {
    KEYS.iter().map(|(k, v, _)| (k.to_string(), v.to_string())).collect()
}

/// Parse `key = value` lines; `#` starts a comment. Returns the pairs in
/// order, or every syntax / unknown-key error found.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, ConfigErrors> {
    let (pairs, errors) = scan(text);
    if errors.is_empty() {
        Ok(pairs)
    } else {
        Err(ConfigErrors(errors))
    }
}

fn scan(text: &str) -> (Vec<(String, String)>, Vec<ConfigError>) {
    let mut pairs = Vec::new();
    let mut errors = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match split_pair(line) {
            Some((k, v)) => {
                if !is_known_key(&k) {
                    errors.push(ConfigError { key: k, message: format!("unknown key (line {})", lineno + 1) });
                } else {
                    pairs.push((k, v));
                }
            }
            None => errors.push(ConfigError {
                key: format!("line {}", lineno + 1),
                message: format!("expected 'key = value', got '{line}'"),
            }),
        }
    }
    (pairs, errors)
}

pub fn split_pair(s: &str) -> Option<(String, String)> {
    let (k, v) = s.split_once('=')?;
    let k = k.trim();
    if k.is_empty() {
        return None;
    }
    Some((k.to_string(), v.trim().to_string()))
}

/// Layer the config text and `key=value` overrides over the defaults, then
/// validate.
pub fn load(text: Option<&str>, overrides: &[String]) -> Result<RunConfig, ConfigErrors> {
    let mut map = defaults();
    let mut errors = Vec::new();
    if let Some(text) = text {
        let (pairs, e) = scan(text);
        map.extend(pairs);
        errors.extend(e);
    }
    for o in overrides {
        match split_pair(o) {
            Some((k, v)) if is_known_key(&k) => {
                map.insert(k, v);
            }
            Some((k, _)) => errors.push(ConfigError { key: k, message: "unknown key (override)".into() }),
            None => errors.push(ConfigError { key: o.clone(), message: "override must be key=value".into() }),
        }
    }
    match from_map(map) {
        Ok(cfg) if errors.is_empty() => Ok(cfg),
        Ok(_) => Err(ConfigErrors(errors)),
        Err(ConfigErrors(e)) => {
            errors.extend(e);
            Err(ConfigErrors(errors))
        }
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigErrors> {
    load(Some(text), &[])
}

struct Reader<'a> {
    map: &'a BTreeMap<String, String>,
    errors: Vec<ConfigError>,
}

impl Reader<'_> {
    fn raw(&self, key: &str) -> &str {
        self.map.get(key).map(String::as_str).unwrap_or("")
    }

    fn fail(&mut self, key: &str, message: impl Into<String>) {
        self.errors.push(ConfigError { key: key.to_string(), message: message.into() });
    }

    fn parse<T: FromStr>(&mut self, key: &str, fallback: T) -> T
    where
        T::Err: fmt::Display,
    {
        match self.raw(key).parse::<T>() {
            Ok(v) => v,
            Err(e) => {
                let msg = format!("cannot parse '{}': {e}", self.raw(key));
                self.fail(key, msg);
                fallback
            }
        }
    }

    fn real(&mut self, key: &str, check: impl Fn(f64) -> bool, bound: &str) -> f64 {
        let v: f64 = self.parse(key, f64::NAN);
        if v.is_nan() && self.errors.last().is_some_and(|e| e.key == key) {
            return v;
        }
        if !v.is_finite() || !check(v) {
            self.fail(key, format!("value {v} violates {bound}"));
        }
        v
    }

    fn positive(&mut self, key: &str) -> f64 {
        self.real(key, |v| v > 0.0, "> 0")
    }

    fn count(&mut self, key: &str, min: usize) -> usize {
        let v: usize = self.parse(key, min);
        if v < min {
            self.fail(key, format!("value {v} violates >= {min}"));
        }
        v
    }
}

fn parse_windows(spec: &str, t_star: f64) -> Result<Vec<Window>, String> {
    let mut out = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if item == "sqrt" {
            out.push(Window::SqrtToBlowup { t_star });
        } else {
            let l: f64 = item.parse().map_err(|_| format!("window '{item}' is neither a radius nor 'sqrt'"))?;
            if !(l > 0.0 && l.is_finite()) {
                return Err(format!("window radius {l} violates > 0"));
            }
            out.push(Window::Fixed(l));
        }
    }
    Ok(out)
}

pub fn from_map(map: BTreeMap<String, String>) -> Result<RunConfig, ConfigErrors> {
    let mut r = Reader { map: &map, errors: Vec::new() };
    for k in map.keys() {
        if !is_known_key(k) {
            r.errors.push(ConfigError { key: k.clone(), message: "unknown key".into() });
        }
    }

    let scenario: Scenario = r.parse("scenario", Scenario::GroundState);
    let seed: u64 = r.parse("seed", 0);
    let out = PathBuf::from(r.raw("output.dir"));
    if out.as_os_str().is_empty() {
        r.fail("output.dir", "must not be empty");
    }

    let d = r.count("model.d", 3);
    let a: f64 = r.parse("model.a", 0.0);
    let params = match ModelParams::new(d.max(3), a) {
        Ok(p) => p,
        Err(e) => {
            r.fail("model.a", e.to_string());
            ModelParams::new(3, 0.0).unwrap()
        }
    };
    let n = r.count("grid.n", 8);
    let r_max = r.positive("grid.r_max");

    let ground_state = GroundStateOptions {
        initial: r.parse("ground_state.initial", InitialGuess::Gaussian),
        tol: r.positive("ground_state.tol"),
        max_iter: r.count("ground_state.max_iter", 1),
        descent_iters: r.count("ground_state.descent_iters", 0),
        step: r.positive("ground_state.step"),
    };

    let integrator = IntegratorConfig {
        dt: r.positive("integrator.dt"),
        t_end: r.real("integrator.t_end", |v| v >= 0.0, ">= 0"),
        scheme: r.parse("integrator.scheme", Scheme::StrangSplit),
        stride: r.count("integrator.stride", 1),
        h_max: r.positive("integrator.h_max"),
        min_cells: r.positive("integrator.min_cells"),
        safety: r.positive("integrator.safety"),
        windows: Vec::new(),
        snapshots: false,
    };

    let profile = match r.raw("initial.profile") {
        "gaussian" => Profile::Gaussian { sigma: r.positive("initial.sigma") },
        "ground-state" => Profile::GroundState { mu: r.positive("initial.mu"), nu_s: r.positive("initial.nu_s") },
        "pseudo-conformal" => {
            let t_star = r.real("initial.t_star", |_| true, "finite");
            let t0 = r.real("initial.t0", |v| v < t_star, "< initial.t_star");
            Profile::PseudoConformal {
                t_star,
                theta: r.real("initial.theta", |_| true, "finite"),
                t0,
                omega: r.positive("initial.omega"),
            }
        }
        "shell" => Profile::Shell {
            s0: r.real("initial.s0", |v| v >= 0.0, ">= 0"),
            width: r.positive("initial.width"),
        },
        "file" => {
            let p = PathBuf::from(r.raw("initial.file"));
            if !p.is_file() {
                r.fail("initial.file", format!("'{}' does not exist", p.display()));
            }
            Profile::File(p)
        }
        other => {
            r.fail("initial.profile", format!("unknown profile '{other}'"));
            Profile::Gaussian { sigma: 1.0 }
        }
    };
    let amplitude = r.positive("initial.amplitude");
    let mass_fraction = match r.raw("initial.mass_fraction") {
        "none" | "" => None,
        _ => Some(r.positive("initial.mass_fraction")),
    };

    let conc_t_star = r.real("concentration.t_star", |_| true, "finite");
    let windows = match parse_windows(r.raw("concentration.windows"), conc_t_star) {
        Ok(w) => w,
        Err(e) => {
            r.fail("concentration.windows", e);
            Vec::new()
        }
    };

    let verify = VerifySpec {
        fields: r.count("verify.fields", 1),
        theta_radius: r.positive("verify.theta_radius"),
        theta_s: r.real("verify.theta_s", |_| true, "finite"),
    };

    let sweep_scenario: Scenario = r.parse("sweep.scenario", Scenario::GroundState);
    if sweep_scenario == Scenario::Sweep {
        r.fail("sweep.scenario", "a sweep cannot run sweeps");
    }
    let sweep_key = r.raw("sweep.key").to_string();
    if !is_known_key(&sweep_key) || sweep_key.starts_with("sweep.") || sweep_key == "scenario" || sweep_key == "output.dir" {
        r.fail("sweep.key", format!("'{sweep_key}' cannot be swept"));
    }
    let values: Vec<String> =
        r.raw("sweep.values").split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect();
    if scenario == Scenario::Sweep && values.is_empty() {
        r.fail("sweep.values", "a sweep needs at least one value");
    }
    let threads = r.count("sweep.threads", 1);

    let errors = std::mem::take(&mut r.errors);
    if !errors.is_empty() {
        return Err(ConfigErrors(errors));
    }
    Ok(RunConfig {
        scenario,
        seed,
        out,
        params,
        n,
        r_max,
        ground_state,
        integrator,
        initial: InitialSpec { profile, amplitude, mass_fraction },
        windows,
        verify,
        sweep: SweepSpec { scenario: sweep_scenario, key: sweep_key, values, threads },
        resolved: map,
    })
}

impl RunConfig {
    /// Canonical `key = value` rendering of the resolved table.
    pub fn canonical(&self) -> String {
        self.resolved.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// SHA-256 of the canonical rendering without `output.dir`, hex: where
    /// the artifacts go does not change what they contain.
    pub fn hash(&self) -> String {
        let text: String =
            self.resolved.iter().filter(|(k, _)| k.as_str() != "output.dir").map(|(k, v)| format!("{k} = {v}\n")).collect();
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// A copy with some keys replaced (used by sweeps and scenario selection).
    pub fn with(&self, changes: &[(&str, &str)]) -> Result<RunConfig, ConfigErrors> {
        let mut map = self.resolved.clone();
        for (k, v) in changes {
            if !is_known_key(k) {
                return Err(ConfigErrors(vec![ConfigError { key: k.to_string(), message: "unknown key".into() }]));
            }
            map.insert(k.to_string(), v.to_string());
        }
        from_map(map)
    }

    pub fn out_dir(&self) -> &Path {
        &self.out
    }
}
