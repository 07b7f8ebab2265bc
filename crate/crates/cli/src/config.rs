//! Run configuration: a TOML document with one command and the stanzas it needs.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use edgewall_core::asymptotics::default_eps_list;
use edgewall_core::cutoff::CutoffKind;
use edgewall_core::energy::{derive_regime, PhysicalParams, RegimeMesh};
use edgewall_core::minimize::{LineSearch, MinimizeOptions, Start};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "EDGEWALL_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "edgewall-output";

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "configuration error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn fail<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Minimize,
    Bifurcation,
    Converge,
    Bounds,
    Strip2dCheck,
    ElCheck,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Minimize => "minimize",
            Self::Bifurcation => "bifurcation",
            Self::Converge => "converge",
            Self::Bounds => "bounds",
            Self::Strip2dCheck => "strip2d-check",
            Self::ElCheck => "el-check",
        }
    }
}

impl std::str::FromStr for Command {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Command::deserialize(toml::Value::String(s.into()))
            .map_err(|_| ConfigError(format!("unknown command '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
    SvgData,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhysicalStanza {
    pub a: f64,
    pub b: Option<f64>,
    pub delta: Option<f64>,
    pub h: Option<f64>,
    /// Uniform grid size on `[0, b]`.
    pub nodes: usize,
}

impl Default for PhysicalStanza {
    fn default() -> Self {
        Self {
            a: 1.0,
            b: None,
            delta: None,
            h: None,
            nodes: 1025,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegimeStanza {
    pub lambda: Option<f64>,
    pub beta: Option<f64>,
    pub b: f64,
    pub epsilon: Option<f64>,
    pub eps_list: Option<Vec<f64>>,
    pub beta_list: Option<Vec<f64>>,
    pub k_trunc: KTrunc,
}

/// Truncation length of the upper-bound profile: a number, or the default
/// rule `6/sqrt(beta)` clamped to the domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KTrunc {
    Value(f64),
    Rule(String),
}

pub const K_TRUNC_RULE: &str = "6/sqrt(beta)";

impl Default for KTrunc {
    fn default() -> Self {
        Self::Rule(K_TRUNC_RULE.into())
    }
}

impl KTrunc {
    pub fn value(&self) -> Option<f64> {
        match self {
            Self::Value(v) => Some(*v),
            Self::Rule(_) => None,
        }
    }
}

impl Default for RegimeStanza {
    fn default() -> Self {
        Self {
            lambda: None,
            beta: None,
            b: 1.0,
            epsilon: None,
            eps_list: None,
            beta_list: None,
            k_trunc: KTrunc::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct CutoffStanza {
    pub kind: CutoffKind,
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverStanza {
    pub max_iters: usize,
    pub grad_tol: f64,
    /// `monodomain`, `wall_plus`, `wall_minus` or `random_<seed>`.
    pub starts: Vec<String>,
    pub line_search: LineSearch,
    pub symmetrize: bool,
    pub memory: usize,
    pub cells_in_cutoff: usize,
    pub layer_spacing: f64,
    pub layer_extent: f64,
    pub growth: f64,
}

impl Default for SolverStanza {
    fn default() -> Self {
        let m = MinimizeOptions::default();
        let mesh = RegimeMesh::default();
        Self {
            max_iters: m.max_iters,
            grad_tol: m.grad_tol,
            starts: m.starts.iter().map(Start::label).collect(),
            line_search: m.line_search,
            symmetrize: m.symmetrize,
            memory: m.memory,
            cells_in_cutoff: mesh.cells_in_cutoff,
            layer_spacing: mesh.layer_spacing,
            layer_extent: mesh.layer_extent,
            growth: mesh.growth,
        }
    }
}

impl SolverStanza {
    pub fn minimize_options(&self) -> Result<MinimizeOptions, ConfigError> {
        let starts = self
            .starts
            .iter()
            .map(|s| match s.as_str() {
                "monodomain" => Ok(Start::Monodomain),
                "wall_plus" => Ok(Start::WallPlus),
                "wall_minus" => Ok(Start::WallMinus),
                other => other
                    .strip_prefix("random_")
                    .and_then(|seed| seed.parse().ok())
                    .map(Start::Random)
                    .ok_or_else(|| ConfigError(format!("unknown start '{other}'"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let opts = MinimizeOptions {
            max_iters: self.max_iters,
            grad_tol: self.grad_tol,
            starts,
            line_search: self.line_search,
            symmetrize: self.symmetrize,
            memory: self.memory,
        };
        opts.validate().map_err(|e| ConfigError(e.to_string()))?;
        Ok(opts)
    }

    pub fn mesh(&self) -> RegimeMesh {
        RegimeMesh {
            cells_in_cutoff: self.cells_in_cutoff,
            layer_spacing: self.layer_spacing,
            layer_extent: self.layer_extent,
            growth: self.growth,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Strip2dStanza {
    pub cells_x1: usize,
    pub nodes_x2: usize,
    pub random_fields: usize,
    pub modulated_fields: usize,
    pub seed: u64,
}

impl Default for Strip2dStanza {
    fn default() -> Self {
        Self {
            cells_x1: 16,
            nodes_x2: 81,
            random_fields: 25,
            modulated_fields: 5,
            seed: 2024,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ElCheckStanza {
    pub h_list: Vec<f64>,
    pub delta_list: Vec<f64>,
}

impl Default for ElCheckStanza {
    fn default() -> Self {
        Self {
            h_list: vec![0.05, 0.2, 1.0],
            delta_list: vec![0.5, 1.0, 1.5],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
struct RawConfig {
    command: Option<Command>,
    output_dir: Option<PathBuf>,
    formats: Option<Vec<Format>>,
    threads: Option<usize>,
    #[serde(default)]
    physical: PhysicalStanza,
    #[serde(default)]
    regime: RegimeStanza,
    #[serde(default)]
    cutoff: CutoffStanza,
    #[serde(default)]
    solver: SolverStanza,
    #[serde(default)]
    strip2d: Strip2dStanza,
    #[serde(default)]
    el_check: ElCheckStanza,
}

/// Validated configuration with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub output_dir: PathBuf,
    pub formats: Vec<Format>,
    /// Worker threads; 0 lets the runtime choose.
    pub threads: usize,
    pub physical: PhysicalStanza,
    pub regime: RegimeStanza,
    pub cutoff: CutoffStanza,
    pub solver: SolverStanza,
    pub strip2d: Strip2dStanza,
    pub el_check: ElCheckStanza,
}

impl RunConfig {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    pub fn physical_params(&self) -> Result<PhysicalParams, ConfigError> {
        let p = &self.physical;
        let (Some(b), Some(delta), Some(h)) = (p.b, p.delta, p.h) else {
            return fail(format!("command '{}' needs physical.b, physical.delta and physical.h", self.command.as_str()));
        };
        PhysicalParams::new(p.a, b, delta, h).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn lambda(&self) -> Result<f64, ConfigError> {
        self.regime
            .lambda
            .ok_or_else(|| ConfigError(format!("command '{}' needs regime.lambda", self.command.as_str())))
    }

    pub fn beta(&self) -> Result<f64, ConfigError> {
        self.regime
            .beta
            .ok_or_else(|| ConfigError(format!("command '{}' needs regime.beta", self.command.as_str())))
    }

    /// The `ε` values of a regime command: `eps_list`, or the single `epsilon`.
    pub fn eps_values(&self) -> Vec<f64> {
        match (&self.regime.eps_list, self.regime.epsilon) {
            (Some(l), _) => l.clone(),
            (None, Some(e)) => vec![e],
            (None, None) => Vec::new(),
        }
    }
}

/// Parse and validate a TOML document. `command` overrides or supplies the
/// document's command.
pub fn parse_config(text: &str, command: Option<Command>) -> Result<RunConfig, ConfigError> {
    let de = toml::Deserializer::new(text);
    let mut unknown = Vec::new();
    let raw: Result<RawConfig, _> = serde_ignored::deserialize(de, |path| unknown.push(path.to_string()));
    if !unknown.is_empty() {
        return fail(format!("unknown keys: {}", unknown.join(", ")));
    }
    let raw = raw.map_err(|e| ConfigError(e.to_string().trim().to_string()))?;
    let command = match (command, raw.command) {
        (Some(c), Some(d)) if c != d => {
            return fail(format!("command line asks for '{}' but the file says '{}'", c.as_str(), d.as_str()))
        }
        (Some(c), _) | (None, Some(c)) => c,
        (None, None) => return fail("no command given"),
    };
    let output_dir = raw
        .output_dir
        .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
    let mut cfg = RunConfig {
        command,
        output_dir,
        formats: raw.formats.unwrap_or_else(|| vec![Format::Csv, Format::Json, Format::SvgData]),
        threads: raw.threads.unwrap_or(0),
        physical: raw.physical,
        regime: raw.regime,
        cutoff: raw.cutoff,
        solver: raw.solver,
        strip2d: raw.strip2d,
        el_check: raw.el_check,
    };
    validate(&mut cfg)?;
    Ok(cfg)
}

fn check_regime(eps: f64, lambda: f64, beta: f64, b: f64) -> Result<(), ConfigError> {
    derive_regime(eps, lambda, beta, b).map(|_| ()).map_err(|e| ConfigError(e.to_string()))
}

fn validate(cfg: &mut RunConfig) -> Result<(), ConfigError> {
    if cfg.formats.is_empty() {
        return fail("formats must name at least one of csv, json, svg-data");
    }
    if let Some(d) = cfg.cutoff.delta {
        if !(d > 0.0) {
            return fail(format!("cutoff.delta must be positive, got {d}"));
        }
    }
    if let (Some(b), Some(d)) = (cfg.physical.b, cfg.physical.delta) {
        if d >= 0.5 * b {
            return fail(format!("delta must satisfy delta < b/2 (delta = {d}, b = {b})"));
        }
    }
    for &e in cfg.regime.eps_list.iter().flatten().chain(cfg.regime.epsilon.iter()) {
        if !(e > 0.0) || e >= (-1.0f64).exp() {
            return fail(format!("epsilon must satisfy 0 < epsilon < 1/e, got {e}"));
        }
    }
    cfg.solver.minimize_options()?;
    match &cfg.regime.k_trunc {
        KTrunc::Rule(r) if r != K_TRUNC_RULE => return fail(format!("regime.k_trunc must be a number or \"{K_TRUNC_RULE}\"")),
        KTrunc::Value(v) if !(*v > 1.0) => return fail(format!("regime.k_trunc must exceed 1, got {v}")),
        _ => {}
    }
    match cfg.command {
        Command::Minimize => {
            if cfg.physical.b.is_some() {
                physical_checks(cfg)?;
            } else {
                let (lambda, beta) = (cfg.lambda()?, cfg.beta()?);
                let Some(e) = cfg.regime.epsilon else {
                    return fail("minimize needs either a physical stanza or regime.epsilon");
                };
                check_regime(e, lambda, beta, cfg.regime.b)?;
            }
        }
        Command::Converge => {
            let (lambda, beta) = (cfg.lambda()?, cfg.beta()?);
            if cfg.regime.eps_list.is_none() {
                cfg.regime.eps_list = Some(default_eps_list());
            }
            for e in cfg.eps_values() {
                check_regime(e, lambda, beta, cfg.regime.b)?;
            }
        }
        Command::Bounds => {
            let (lambda, beta) = (cfg.lambda()?, cfg.beta()?);
            if cfg.eps_values().is_empty() {
                return fail("bounds needs regime.epsilon or regime.eps_list");
            }
            for e in cfg.eps_values() {
                check_regime(e, lambda, beta, cfg.regime.b)?;
            }
        }
        Command::Bifurcation => {
            let lambda = cfg.lambda()?;
            let Some(list) = &cfg.regime.beta_list else {
                return fail("bifurcation needs regime.beta_list");
            };
            if list.is_empty() || !list.windows(2).all(|w| w[1] > w[0]) || list[0] <= 0.0 {
                return fail("regime.beta_list must be positive and strictly increasing");
            }
            if let Some(e) = cfg.regime.epsilon {
                for &beta in list {
                    check_regime(e, lambda, beta, cfg.regime.b)?;
                }
            }
        }
        Command::Strip2dCheck => {
            physical_checks(cfg)?;
            let s = &cfg.strip2d;
            if s.cells_x1 < 4 || s.nodes_x2 < 3 {
                return fail("strip2d.cells_x1 must be >= 4 and strip2d.nodes_x2 >= 3");
            }
        }
        Command::ElCheck => {
            if cfg.physical.b.is_none() {
                cfg.physical.b = Some(4.0);
            }
            let b = cfg.physical.b.unwrap();
            let el = &cfg.el_check;
            if el.h_list.is_empty() || el.delta_list.is_empty() {
                return fail("el_check.h_list and el_check.delta_list must be nonempty");
            }
            for &d in &el.delta_list {
                PhysicalParams::new(cfg.physical.a, b, d, 0.0).map_err(|e| ConfigError(e.to_string()))?;
            }
            for &h in &el.h_list {
                if !(h >= 0.0) {
                    return fail(format!("el_check.h_list entries must be nonnegative, got {h}"));
                }
            }
            if cfg.physical.nodes < 3 {
                return fail("physical.nodes must be >= 3");
            }
        }
    }
    Ok(())
}

fn physical_checks(cfg: &mut RunConfig) -> Result<(), ConfigError> {
    let p = cfg.physical_params()?;
    match cfg.cutoff.delta {
        None => cfg.cutoff.delta = Some(p.delta),
        Some(d) if (d - p.delta).abs() > 1e-14 * p.delta => {
            return fail(format!("cutoff.delta = {d} must equal physical.delta = {}", p.delta))
        }
        Some(_) => {}
    }
    if cfg.physical.nodes < 3 {
        return fail("physical.nodes must be >= 3");
    }
    Ok(())
}
