//! Batch front end. Exit codes: 0 success, 1 usage or input error,
//! 2 certification failure.

use std::f64::consts::FRAC_PI_4;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dls::{shadow, DlsError, Orbit, ShadowConfig};
use crate::entropy::{optimize_sigma, standard_map_entropy_bound, tmc_entropy, EntropyError};
use crate::hyperbolicity::{
    cone_verify, standard_blocks, variational_blocks, ConeParams, ConeReport,
};
use crate::io::{
    orbit_rows, standard_orbit_rows, write_json, write_orbit_csv, write_sweep_csv, ShadowReport,
    SweepRow,
};
use crate::models::{BuiltModel, ModelError, ModelSpec};
use crate::standard_map::{shadow_code, StandardMapError, StandardOrbit};
use crate::symbolic::{standard_code_check, Code, CodeFile, StandardCode};

/// Length of the random window code used when a general model gets no code file.
const DEFAULT_CODE_LENGTH: usize = 32;

#[derive(Debug, Parser)]
#[command(name = "ailimit", version, about = "Anti-integrable limit shadowing and certificates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Shadow a code; writes the orbit CSV and a report JSON.
    Shadow(RunArgs),
    /// Shadow a code and run the cone criterion.
    Verify(RunArgs),
    /// Entropy lower bound.
    Entropy(RunArgs),
    /// Shadow and verify over a parameter grid.
    Sweep(RunArgs),
    /// Check a configuration without running it.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `standard` or a JSON model spec file.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub code: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Strip width of a billiard model.
    #[arg(long)]
    pub width: Option<f64>,
    /// Output directory; without it artifacts go to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `start:stop:step`, inclusive.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    /// JSON run configuration.
    #[arg(id = "config_path", value_name = "CONFIG")]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub run: RunArgs,
}

/// Model given by name or inline spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelRef {
    Inline(ModelSpec),
    Name(String),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub command: Option<String>,
    #[serde(default)]
    pub model: Option<ModelRef>,
    #[serde(default)]
    pub code: Option<PathBuf>,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub width: Option<f64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub grid: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }
    fn certification(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::NotAntiIntegrable(_) => CliError::certification(e.to_string()),
            ModelError::Dls(d) => d.into(),
            _ => CliError::usage(e.to_string()),
        }
    }
}

impl From<DlsError> for CliError {
    fn from(e: DlsError) -> Self {
        match e {
            DlsError::NotAdmissible(_)
            | DlsError::EmptyCode
            | DlsError::IndexOutOfRange { .. }
            | DlsError::Config(_)
            | DlsError::Shape(_)
            | DlsError::Symbolic(_) => CliError::usage(e.to_string()),
            _ => CliError::certification(e.to_string()),
        }
    }
}

impl From<StandardMapError> for CliError {
    fn from(e: StandardMapError) -> Self {
        match e {
            StandardMapError::ContractionFailure(_)
            | StandardMapError::LeftArcsinDomain { .. }
            | StandardMapError::NotConverged(_) => CliError::certification(e.to_string()),
            _ => CliError::usage(e.to_string()),
        }
    }
}

impl From<EntropyError> for CliError {
    fn from(e: EntropyError) -> Self {
        match e {
            EntropyError::BelowThreshold { .. } | EntropyError::NotConverged => {
                CliError::certification(e.to_string())
            }
            _ => CliError::usage(e.to_string()),
        }
    }
}

impl From<crate::io::IoError> for CliError {
    fn from(e: crate::io::IoError) -> Self {
        CliError::usage(e.to_string())
    }
}

fn read_file(path: &Path, what: &str) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("{what} file not found: {} ({e})", path.display())))
}

impl RunConfig {
    pub fn from_json_str(s: &str) -> Result<Self, CliError> {
        serde_json::from_str(s).map_err(|e| CliError::usage(format!("malformed config: {e}")))
    }

    /// Config file (if any) overridden by flags.
    pub fn from_args(args: &RunArgs) -> Result<Self, CliError> {
        let mut cfg = match &args.config {
            Some(p) => Self::from_json_str(&read_file(p, "config")?)?,
            None => Self::default(),
        };
        cfg.apply_flags(args);
        Ok(cfg)
    }

    fn apply_flags(&mut self, a: &RunArgs) {
        if let Some(m) = &a.model {
            self.model = Some(ModelRef::Name(m.clone()));
        }
        macro_rules! over {
            ($($f:ident),*) => { $( if a.$f.is_some() { self.$f = a.$f.clone(); } )* };
        }
        over!(code, lambda, sigma, width, out, seed, grid);
    }

    /// Model spec with the parameter flags applied.
    pub fn model_spec(&self) -> Result<ModelSpec, CliError> {
        let mut spec = match &self.model {
            None => return Err(CliError::usage("--model is required")),
            Some(ModelRef::Inline(s)) => s.clone(),
            Some(ModelRef::Name(n)) if n == "standard" => {
                let lambda = self
                    .lambda
                    .ok_or_else(|| CliError::usage("--lambda is required for the standard model"))?;
                ModelSpec::Standard {
                    lambda,
                    sigma: self.sigma.unwrap_or(FRAC_PI_4),
                    code_bound: None,
                }
            }
            Some(ModelRef::Name(path)) => {
                let text = read_file(Path::new(path), "model")?;
                ModelSpec::from_json_str(&text).map_err(|e| CliError::usage(format!("{path}: {e}")))?
            }
        };
        match &mut spec {
            ModelSpec::Standard { lambda, sigma, .. } => {
                if let Some(l) = self.lambda {
                    *lambda = l;
                }
                if let Some(s) = self.sigma {
                    *sigma = s;
                }
            }
            ModelSpec::Sepmap(s) => {
                if let Some(l) = self.lambda {
                    s.lambda_s = l;
                }
            }
            ModelSpec::Billiard(s) => {
                if let Some(w) = self.width {
                    s.width = w;
                }
            }
            ModelSpec::Kick(_) => {}
        }
        let kind = model_name(&spec);
        if self.lambda.is_some() && matches!(spec, ModelSpec::Kick(_) | ModelSpec::Billiard(_)) {
            return Err(CliError::usage(format!("--lambda does not apply to the {kind} model")));
        }
        if self.width.is_some() && !matches!(spec, ModelSpec::Billiard(_)) {
            return Err(CliError::usage(format!("--width does not apply to the {kind} model")));
        }
        Ok(spec)
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    /// Shadowing radius for general models (`--sigma`); the standard map
    /// carries it in its parameters.
    fn shadow_config(&self) -> ShadowConfig {
        ShadowConfig { sigma: self.sigma, sample_seed: self.seed(), ..ShadowConfig::default() }
    }
}

fn model_name(spec: &ModelSpec) -> &'static str {
    match spec {
        ModelSpec::Standard { .. } => "standard",
        ModelSpec::Kick(_) => "kick",
        ModelSpec::Billiard(_) => "billiard",
        ModelSpec::Sepmap(_) => "sepmap",
    }
}

pub fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::usage(format!("grid must be start:stop:step, got {s:?}"));
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    let [start, stop, step] = parts[..] else { return Err(bad()) };
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(CliError::usage(format!("grid needs step > 0 and stop >= start, got {s:?}")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > 1_000_000 {
        return Err(CliError::usage("grid has more than 10^6 points"));
    }
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

enum CodeInput {
    Standard(StandardCode),
    File(CodeFile),
    Random { length: usize, seed: u64 },
}

fn load_code(cfg: &RunConfig, spec: &ModelSpec) -> Result<CodeInput, CliError> {
    match (&cfg.code, spec) {
        (None, ModelSpec::Standard { .. }) => {
            Err(CliError::usage("--code is required for the standard model"))
        }
        (None, _) => Ok(CodeInput::Random { length: DEFAULT_CODE_LENGTH, seed: cfg.seed() }),
        (Some(p), ModelSpec::Standard { .. }) => StandardCode::from_json_str(&read_file(p, "code")?)
            .map(CodeInput::Standard)
            .map_err(|e| CliError::usage(format!("{}: {e}", p.display()))),
        (Some(p), _) => serde_json::from_str(&read_file(p, "code")?)
            .map(CodeInput::File)
            .map_err(|e| CliError::usage(format!("{}: malformed code file: {e}", p.display()))),
    }
}

fn graph_code(model: &BuiltModel, input: &CodeInput) -> Result<Code, CliError> {
    let system = model.system().expect("general model");
    match input {
        CodeInput::File(f) => {
            let code = Code::from_json(f, &system.graph).map_err(|e| CliError::usage(e.to_string()))?;
            system.check_code(&code)?;
            Ok(code)
        }
        CodeInput::Random { length, seed } => {
            Ok(model.random_code(*length, &mut ChaCha8Rng::seed_from_u64(*seed))?)
        }
        CodeInput::Standard(_) => Err(CliError::usage("standard code given to a general model")),
    }
}

/// Standard-map code bound from the code when the spec leaves it open.
fn fill_bound(spec: &mut ModelSpec, input: &CodeInput) {
    if let (ModelSpec::Standard { code_bound: b @ None, .. }, CodeInput::Standard(c)) = (spec, input) {
        let need = c.second_differences().iter().map(|&(_, d)| d.abs()).max().unwrap_or(0);
        *b = Some(std::f64::consts::PI * need.max(1) as f64);
    }
}

enum Shadowed {
    Standard(StandardOrbit),
    General(Orbit),
}

impl Shadowed {
    fn report(&self) -> ShadowReport {
        match self {
            Shadowed::Standard(o) => ShadowReport {
                rho: o.rho,
                residual: o.residual,
                iterations: o.iterations,
                contraction_estimate: o.contraction_estimate,
            },
            Shadowed::General(o) => ShadowReport {
                rho: o.rho,
                residual: o.residual,
                iterations: o.iterations,
                contraction_estimate: o.contraction_estimate,
            },
        }
    }
}

fn run_shadow(
    cfg: &RunConfig,
    model: &BuiltModel,
    input: &CodeInput,
) -> Result<Shadowed, CliError> {
    match (model, input) {
        (BuiltModel::Standard(p), CodeInput::Standard(code)) => {
            if !standard_code_check(code, p.code_bound + 1e-12) {
                return Err(CliError::usage(StandardMapError::CodeOutOfBound(p.code_bound).to_string()));
            }
            Ok(Shadowed::Standard(shadow_code(code, p)?))
        }
        (BuiltModel::Standard(_), _) => Err(CliError::usage("the standard model needs a standard code")),
        _ => {
            let code = graph_code(model, input)?;
            Ok(Shadowed::General(shadow(model.system().unwrap(), &code, &cfg.shadow_config())?))
        }
    }
}

fn verify(cfg: &RunConfig, model: &BuiltModel, orbit: &Shadowed) -> Result<ConeReport, CliError> {
    let blocks = match orbit {
        Shadowed::Standard(o) => standard_blocks(o),
        Shadowed::General(o) => variational_blocks(model.system().unwrap(), o),
    }
    .map_err(|e| CliError::certification(e.to_string()))?;
    let params = ConeParams { seed: cfg.seed(), ..ConeParams::default() };
    cone_verify(&blocks, &params).map_err(|e| CliError::certification(e.to_string()))
}

/// Where artifacts go: files under `--out`, otherwise the first artifact to
/// stdout and the rest to stderr.
struct Sink<'a> {
    out: Option<PathBuf>,
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
    first: bool,
}

impl Sink<'_> {
    fn emit(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        let io = |e: std::io::Error| CliError::usage(format!("cannot write {name}: {e}"));
        match &self.out {
            Some(dir) => {
                std::fs::create_dir_all(dir).map_err(io)?;
                std::fs::write(dir.join(name), text).map_err(io)?;
            }
            None if self.first => self.stdout.write_all(text.as_bytes()).map_err(io)?,
            None => self.stderr.write_all(text.as_bytes()).map_err(io)?,
        }
        self.first = false;
        Ok(())
    }
}

fn cmd_shadow(cfg: &RunConfig, sink: &mut Sink) -> Result<(), CliError> {
    let mut spec = cfg.model_spec()?;
    let input = load_code(cfg, &spec)?;
    fill_bound(&mut spec, &input);
    let model = spec.build()?;
    let orbit = run_shadow(cfg, &model, &input)?;
    let rows = match &orbit {
        Shadowed::Standard(o) => standard_orbit_rows(o),
        Shadowed::General(o) => orbit_rows(model.system().unwrap(), o),
    };
    sink.emit("orbit.csv", &write_orbit_csv(&rows)?)?;
    sink.emit("report.json", &write_json(&orbit.report())?)
}

fn cmd_verify(cfg: &RunConfig, sink: &mut Sink) -> Result<(), CliError> {
    let mut spec = cfg.model_spec()?;
    let input = load_code(cfg, &spec)?;
    fill_bound(&mut spec, &input);
    let model = spec.build()?;
    let orbit = run_shadow(cfg, &model, &input)?;
    let report = verify(cfg, &model, &orbit)?;
    sink.emit("verify.json", &write_json(&report)?)?;
    if report.pass {
        Ok(())
    } else {
        Err(CliError::certification("cone criterion failed"))
    }
}

fn cmd_entropy(cfg: &RunConfig, sink: &mut Sink) -> Result<(), CliError> {
    let spec = cfg.model_spec()?;
    let text = match &spec {
        ModelSpec::Standard { lambda, .. } => {
            let bound = match cfg.sigma {
                Some(s) => standard_map_entropy_bound(*lambda, s)?,
                None => optimize_sigma(*lambda)?,
            };
            write_json(&bound)?
        }
        _ => {
            let model = spec.build()?;
            write_json(&tmc_entropy(&model.system().unwrap().graph)?)?
        }
    };
    sink.emit("entropy.json", &text)
}

fn with_param(spec: &ModelSpec, v: f64) -> Result<ModelSpec, CliError> {
    let mut s = spec.clone();
    match &mut s {
        ModelSpec::Standard { lambda, .. } => *lambda = v,
        ModelSpec::Billiard(b) => b.width = v,
        ModelSpec::Sepmap(m) => {
            if v.fract() != 0.0 {
                return Err(CliError::usage(format!("c1 grid values must be integers, got {v}")));
            }
            m.c1 = v as i64;
        }
        ModelSpec::Kick(k) => {
            k.mass = Some(v);
            k.b_matrix = None;
        }
    }
    Ok(s)
}

fn sweep_point(cfg: &RunConfig, spec: &ModelSpec, input: &CodeInput, param: f64) -> Result<SweepRow, CliError> {
    let mut row = SweepRow {
        param,
        converged: false,
        residual: None,
        rho: None,
        contraction: None,
        mu: None,
        entropy_bound: None,
    };
    let spec = with_param(spec, param)?;
    let model = match spec.build() {
        Ok(m) => m,
        Err(e) if CliError::from(e.clone()).code == 2 => return Ok(row),
        Err(e) => return Err(e.into()),
    };
    row.entropy_bound = match &model {
        BuiltModel::Standard(p) => standard_map_entropy_bound(p.coupling, p.sigma).ok().map(|b| b.bound_nats),
        _ => tmc_entropy(&model.system().unwrap().graph).ok().map(|h| h.entropy),
    };
    let orbit = match run_shadow(cfg, &model, input) {
        Ok(o) => o,
        Err(e) if e.code == 2 => return Ok(row),
        Err(e) => return Err(e),
    };
    let r = orbit.report();
    row.converged = true;
    row.residual = Some(r.residual);
    row.rho = Some(r.rho);
    row.contraction = Some(r.contraction_estimate);
    row.mu = verify(cfg, &model, &orbit).ok().filter(|c| c.pass).and_then(|c| c.mu);
    Ok(row)
}

/// The grid supplies λ for the built-in standard model.
fn with_grid_lambda(cfg: &RunConfig, grid: &[f64]) -> RunConfig {
    let mut cfg = cfg.clone();
    if matches!(&cfg.model, Some(ModelRef::Name(n)) if n == "standard") && cfg.lambda.is_none() {
        cfg.lambda = grid.first().copied();
    }
    cfg
}

fn cmd_sweep(cfg: &RunConfig, sink: &mut Sink) -> Result<(), CliError> {
    let grid = parse_grid(cfg.grid.as_deref().ok_or_else(|| CliError::usage("--grid is required"))?)?;
    let cfg = &with_grid_lambda(cfg, &grid);
    let mut spec = cfg.model_spec()?;
    let input = load_code(cfg, &spec)?;
    fill_bound(&mut spec, &input);
    // Grid points are independent; chunks run on scoped threads and are
    // joined in grid order.
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(grid.len()).max(1);
    let chunk = grid.len().div_ceil(workers);
    let rows = std::thread::scope(|scope| {
        let handles: Vec<_> = grid
            .chunks(chunk)
            .map(|part| {
                let (spec, input) = (&spec, &input);
                scope.spawn(move || part.iter().map(|&v| sweep_point(cfg, spec, input, v)).collect::<Vec<_>>())
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("sweep worker panicked")).collect::<Result<Vec<_>, _>>()
    })?;
    sink.emit("sweep.csv", &write_sweep_csv(&rows)?)
}

/// Diagnostics for a configuration; empty when it is runnable.
pub fn validate(cfg: &RunConfig) -> Vec<String> {
    let mut out = Vec::new();
    if let Some(c) = &cfg.command {
        if !["shadow", "verify", "entropy", "sweep"].contains(&c.as_str()) {
            out.push(format!("unknown command {c:?}"));
        }
    }
    let mut filled = cfg.clone();
    if let Some(g) = &cfg.grid {
        match parse_grid(g) {
            Ok(grid) if cfg.command.as_deref() == Some("sweep") => filled = with_grid_lambda(cfg, &grid),
            Ok(_) => {}
            Err(e) => out.push(e.message),
        }
    }
    let cfg = &filled;
    let mut spec = match cfg.model_spec() {
        Ok(s) => s,
        Err(e) => {
            out.push(e.message);
            return out;
        }
    };
    let code = match load_code(cfg, &spec) {
        Ok(c) => Some(c),
        Err(e) => {
            if cfg.code.is_some() || cfg.command.as_deref() != Some("entropy") {
                out.push(e.message);
            }
            None
        }
    };
    if let Some(c) = &code {
        fill_bound(&mut spec, c);
    }
    match (spec.build(), code) {
        (Err(e), _) => {
            let msg = e.to_string();
            if !out.contains(&msg) {
                out.push(msg);
            }
        }
        (Ok(BuiltModel::Standard(p)), Some(CodeInput::Standard(c))) => {
            if c.is_empty() {
                out.push("empty code".into());
            } else if !standard_code_check(&c, p.code_bound + 1e-12) {
                out.push(StandardMapError::CodeOutOfBound(p.code_bound).to_string());
            }
        }
        (Ok(model), Some(input @ CodeInput::File(_))) => {
            if let Err(e) = graph_code(&model, &input) {
                out.push(e.message);
            }
        }
        _ => {}
    }
    out
}

/// Runs the command line and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Validate(v) => {
            let mut args = v.run.clone();
            if args.config.is_none() {
                args.config = v.config.clone();
            }
            let diags = match RunConfig::from_args(&args) {
                Ok(cfg) => validate(&cfg),
                Err(e) => vec![e.message],
            };
            for d in &diags {
                let _ = writeln!(stdout, "{d}");
            }
            return i32::from(!diags.is_empty());
        }
        Command::Shadow(a) | Command::Verify(a) | Command::Entropy(a) | Command::Sweep(a) => {
            RunConfig::from_args(a).and_then(|cfg| {
                let mut sink = Sink { out: cfg.out.clone(), stdout, stderr, first: true };
                match &cli.command {
                    Command::Shadow(_) => cmd_shadow(&cfg, &mut sink),
                    Command::Verify(_) => cmd_verify(&cfg, &mut sink),
                    Command::Entropy(_) => cmd_entropy(&cfg, &mut sink),
                    _ => cmd_sweep(&cfg, &mut sink),
                }
            })
        }
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            e.code
        }
    }
}
