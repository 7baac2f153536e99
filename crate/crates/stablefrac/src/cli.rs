//! Configuration-driven command-line front end.
//!
//! Exit codes: 0 success, 1 check failure or runtime error, 2 usage error,
//! 3 validation error.  Every run prints the SHA-256 digest of the
//! canonical configuration.

use crate::densities::{density_table_csv, moments};
use crate::error::{Error, Result};
use crate::geometry::{self, HeatFlow, Shape};
use crate::optimizer::{minimize_sobolev, OptimizerOptions};
use crate::spectral_engine::{io, Grid, GridField, SpectralEngine};
use crate::stable_model::{ModelSpec, StableModel};
use crate::verifier::{self, AsymptoticKind, CheckInputs, CheckKind, Verdict};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "stablefrac", version, about = "Anisotropic α-stable operators, perimeters and functional inequalities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone)]
struct Common {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overridden by STABLEFRAC_OUT).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed recorded in every output; overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 1 is the reproducibility mode.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a model and print its derived constants.
    Model {
        /// Model or experiment configuration to describe.
        #[arg(long, value_name = "PATH")]
        describe: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// One-dimensional density table and moments.
    Density(Common),
    /// Evolve an initial field under the semigroup.
    Semigroup(Common),
    /// Perimeter study of a shape (𝒫_cl, 𝒫_frac).
    Perimeter(Common),
    /// Heat-content study of a shape.
    HeatContent(Common),
    /// Run an inequality suite.
    Verify {
        /// `core`, `all`, `exploratory` or a comma-separated list.
        #[arg(long)]
        suite: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// BBM / MS limit study.
    Asymptotic(Common),
    /// Estimate the fractional Sobolev constant.
    Optimize(Common),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "N")]
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeSpec {
    Rect {
        half_widths: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
    },
    LqBall {
        q: f64,
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
    },
    SigmaDualBall {
        radius: f64,
    },
    /// Nonzero samples of an SFLD field on the experiment grid.
    Mask {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    Gaussian {
        width: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
    },
    File {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityParams {
    #[serde(default = "default_x_max")]
    pub x_max: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_p_list")]
    pub p_list: Vec<f64>,
}

fn default_x_max() -> f64 {
    10.0
}
fn default_samples() -> usize {
    201
}
fn default_p_list() -> Vec<f64> {
    vec![1.0, 2.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemigroupParams {
    pub initial: FieldSpec,
    pub times: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowKind {
    Stable,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryParams {
    pub shape: ShapeSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    #[serde(default = "default_flow")]
    pub flow: FlowKind,
}

fn default_flow() -> FlowKind {
    FlowKind::Stable
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyParams {
    #[serde(default = "default_suite")]
    pub suite: String,
    #[serde(default)]
    pub inputs: Option<CheckInputs>,
}

fn default_suite() -> String {
    "core".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsymptoticParams {
    pub kind: AsymptoticKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default = "default_field")]
    pub field: FieldSpec,
}

fn default_p() -> f64 {
    2.0
}
fn default_field() -> FieldSpec {
    FieldSpec::Gaussian { width: 1.0, center: None }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeParams {
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default)]
    pub options: Option<OptimizerOptions>,
}

/// Schema of a configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<DensityParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semigroup: Option<SemigroupParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perimeter: Option<GeometryParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heat_content: Option<GeometryParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub asymptotic: Option<AsymptoticParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimize: Option<OptimizeParams>,
}

/// Strict parse with JSON-pointer errors.  A bare model document
/// (`{"alpha": .., "dim": .., "sigma": ..}`) is accepted as
/// `{"model": ..}`.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::schema("", e.to_string()))?;
    let value = match &value {
        serde_json::Value::Object(m) if m.contains_key("alpha") && !m.contains_key("model") => {
            serde_json::json!({ "model": value })
        }
        _ => value,
    };
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(value).map_err(|e| {
        let pointer = pointer_of(e.path());
        Error::schema(pointer, e.into_inner().to_string())
    })?;
    validate(&cfg)?;
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config_str(&text)
}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => out.push_str(&format!("/{key}")),
            Segment::Enum { variant } => out.push_str(&format!("/{variant}")),
            Segment::Unknown => {}
        }
    }
    out
}

fn validate(cfg: &ExperimentConfig) -> Result<()> {
    cfg.model.build("/model")?;
    if let Some(g) = &cfg.grid {
        Grid::new(cfg.model.dim, g.l, g.n).map_err(|e| Error::schema("/grid", e.to_string()))?;
    }
    Ok(())
}

/// Canonical JSON (struct field order, defaults filled in).
pub fn canonical_json(cfg: &ExperimentConfig) -> String {
    serde_json::to_string(cfg).expect("serializable config")
}

pub fn config_digest(cfg: &ExperimentConfig) -> String {
    let h = Sha256::digest(canonical_json(cfg).as_bytes());
    h.iter().map(|b| format!("{b:02x}")).collect()
}

/// Map an error to its exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::SchemaViolation { .. }
        | Error::BadAlpha(_)
        | Error::BadDimension(_)
        | Error::BadSpec(_)
        | Error::BadExponent(_)
        | Error::BadExponents(_)
        | Error::BadTimeSequence(_)
        | Error::ResolutionGuard { .. }
        | Error::ShapeTooLarge
        | Error::UnsupportedShape(_)
        | Error::UnknownCheck(_)
        | Error::BadFieldFile(_)
        | Error::Json(_) => EXIT_VALIDATION,
        _ => EXIT_CHECK_FAILED,
    }
}

/// Entry point: parse `argv`, run, and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

struct Ctx {
    cfg: ExperimentConfig,
    digest: String,
    out: PathBuf,
    command: &'static str,
}

impl Ctx {
    fn new(common: &Common, config: Option<&Path>, command: &'static str) -> Result<Self> {
        let path = config
            .or(common.config.as_deref())
            .ok_or_else(|| Error::schema("", "a configuration is required (--config)"))?;
        let mut cfg = parse_config(path)?;
        if let Some(s) = common.seed {
            cfg.seed = s;
        }
        let out = std::env::var_os("STABLEFRAC_OUT")
            .map(PathBuf::from)
            .or_else(|| common.out.clone())
            .or_else(|| cfg.out.clone())
            .unwrap_or_else(|| PathBuf::from("stablefrac_out"));
        // the output location does not change results
        cfg.out = None;
        let digest = config_digest(&cfg);
        println!("config digest: {digest}");
        if let Some(n) = common.threads {
            // a pool can only be installed once per process
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
        }
        Ok(Ctx { cfg, digest, out, command })
    }

    fn model(&self) -> Result<StableModel> {
        self.cfg.model.build("/model")
    }

    fn grid(&self) -> Result<Grid> {
        let g = self
            .cfg
            .grid
            .as_ref()
            .ok_or_else(|| Error::schema("/grid", "this command needs a grid {\"L\", \"N\"}"))?;
        Grid::new(self.cfg.model.dim, g.l, g.n).map_err(|e| Error::schema("/grid", e.to_string()))
    }

    fn section<'a, T>(&self, v: &'a Option<T>, key: &str) -> Result<&'a T> {
        v.as_ref()
            .ok_or_else(|| Error::schema(format!("/{key}"), format!("section \"{key}\" is required by `{}`", self.command)))
    }

    fn create(&self, name: &str) -> Result<std::io::BufWriter<std::fs::File>> {
        std::fs::create_dir_all(&self.out)?;
        Ok(std::io::BufWriter::new(std::fs::File::create(self.out.join(name))?))
    }

    /// `reports.json`: `{command, config_digest, seed, config, results}`.
    fn emit(&self, results: serde_json::Value) -> Result<()> {
        let doc = serde_json::json!({
            "command": self.command,
            "config_digest": self.digest,
            "seed": self.cfg.seed,
            "config": self.cfg,
            "results": results,
        });
        let mut w = self.create("reports.json")?;
        serde_json::to_writer_pretty(&mut w, &doc)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Model { describe, common } => cmd_model(&Ctx::new(&common, describe.as_deref(), "model")?),
        Command::Density(c) => cmd_density(&Ctx::new(&c, None, "density")?),
        Command::Semigroup(c) => cmd_semigroup(&Ctx::new(&c, None, "semigroup")?),
        Command::Perimeter(c) => cmd_geometry(&Ctx::new(&c, None, "perimeter")?, true),
        Command::HeatContent(c) => cmd_geometry(&Ctx::new(&c, None, "heat-content")?, false),
        Command::Verify { suite, common } => cmd_verify(&Ctx::new(&common, None, "verify")?, suite),
        Command::Asymptotic(c) => cmd_asymptotic(&Ctx::new(&c, None, "asymptotic")?),
        Command::Optimize(c) => cmd_optimize(&Ctx::new(&c, None, "optimize")?),
    }
}

fn cmd_model(ctx: &Ctx) -> Result<i32> {
    let m = ctx.model()?;
    let gc = m.geometry_constants();
    let sigma = m.sigma_matrix();
    let desc = serde_json::json!({
        "alpha": m.alpha(),
        "dim": m.dim(),
        "nondeg_margin": m.nondeg_margin(),
        "sigma_mass": m.sigma().mass(m.dim()),
        "lambda1_mass": m.lambda1_mass(),
        "Sigma": sigma.entries,
        "vol_K_alpha": gc.vol_k_alpha,
        "vol_K_alpha_polar": gc.vol_k_alpha_polar,
        "rotational": m.is_rotational(),
        "product": m.axis_scales().is_some(),
    });
    println!("{}", serde_json::to_string_pretty(&desc)?);
    ctx.emit(desc)?;
    Ok(EXIT_OK)
}

fn cmd_density(ctx: &Ctx) -> Result<i32> {
    let m = ctx.model()?;
    let params = ctx.cfg.density.clone().unwrap_or(DensityParams {
        x_max: default_x_max(),
        samples: default_samples(),
        p_list: default_p_list(),
    });
    if params.samples < 2 || !(params.x_max > 0.0) {
        return Err(Error::schema("/density", "need samples ≥ 2 and x_max > 0"));
    }
    let xs: Vec<f64> = (0..params.samples)
        .map(|i| -params.x_max + 2.0 * params.x_max * i as f64 / (params.samples - 1) as f64)
        .collect();
    let mut w = ctx.create("density.csv")?;
    density_table_csv(m.alpha(), &xs, &mut w)?;
    w.flush()?;
    let mom = moments(&m, &params.p_list)?;
    let value = serde_json::to_value(&mom)?;
    println!("{}", serde_json::to_string(&value)?);
    ctx.emit(value)?;
    Ok(EXIT_OK)
}

fn build_field(spec: &FieldSpec, grid: Grid, pointer: &str) -> Result<GridField> {
    match spec {
        FieldSpec::Gaussian { width, center } => {
            if !(*width > 0.0) {
                return Err(Error::schema(format!("{pointer}/width"), "width must be positive"));
            }
            let c = center.clone().unwrap_or_else(|| vec![0.0; grid.dim()]);
            if c.len() != grid.dim() {
                return Err(Error::schema(format!("{pointer}/center"), "center has the wrong dimension"));
            }
            let s2 = 2.0 * width * width;
            Ok(GridField::from_fn(grid, move |x| {
                (-x.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / s2).exp()
            }))
        }
        FieldSpec::File { path } => {
            let f = io::load_field(path)?;
            if f.grid() != &grid {
                return Err(Error::schema(format!("{pointer}/path"), "field grid differs from the experiment grid"));
            }
            Ok(f)
        }
    }
}

fn cmd_semigroup(ctx: &Ctx) -> Result<i32> {
    let params = ctx.section(&ctx.cfg.semigroup, "semigroup")?;
    let (m, g) = (ctx.model()?, ctx.grid()?);
    let engine = SpectralEngine::new(&m, g)?;
    let f = build_field(&params.initial, g, "/semigroup/initial")?;
    let mut w = csv::Writer::from_writer(ctx.create("semigroup.csv")?);
    w.write_record(["t", "mass", "L2", "sup"])?;
    let mut rows = Vec::new();
    for (i, &t) in params.times.iter().enumerate() {
        let u = engine.semigroup(&f, t).map_err(|e| match e {
            Error::NegativeTime(_) => Error::schema(format!("/semigroup/times/{i}"), e.to_string()),
            other => other,
        })?;
        let l2 = u.inner(&u).sqrt();
        w.write_record([t, u.integral(), l2, u.max_abs()].map(|v| format!("{v:.12e}")))?;
        rows.push(serde_json::json!({"t": t, "mass": u.integral(), "L2": l2, "sup": u.max_abs()}));
        io::save_field(&u, ctx.out.join(format!("semigroup_{i}.sfld")))?;
    }
    w.flush()?;
    ctx.emit(serde_json::Value::Array(rows))?;
    Ok(EXIT_OK)
}

fn build_shape(spec: &ShapeSpec, model: &StableModel, grid: &Grid, pointer: &str) -> Result<Shape> {
    let d = model.dim();
    let with_center = |s: Shape, c: &Option<Vec<f64>>| -> Result<Shape> {
        match (s, c) {
            (s, None) => Ok(s),
            (Shape::Hyperrectangle { half_widths, .. }, Some(c)) if c.len() == d => {
                Ok(Shape::Hyperrectangle { half_widths, center: c.clone() })
            }
            (Shape::LqBall { q, radius, .. }, Some(c)) if c.len() == d => {
                Ok(Shape::LqBall { q, radius, center: c.clone() })
            }
            _ => Err(Error::schema(format!("{pointer}/center"), "center has the wrong dimension")),
        }
    };
    match spec {
        ShapeSpec::Rect { half_widths, center } => {
            if half_widths.len() != d || half_widths.iter().any(|h| !(*h > 0.0)) {
                return Err(Error::schema(format!("{pointer}/half_widths"), format!("need {d} positive half widths")));
            }
            with_center(Shape::rect(half_widths), center)
        }
        ShapeSpec::LqBall { q, radius, center } => {
            if !(*q >= 1.0) || !(*radius > 0.0) {
                return Err(Error::schema(pointer, "need q ≥ 1 and radius > 0"));
            }
            with_center(Shape::lq_ball(d, *q, *radius), center)
        }
        ShapeSpec::SigmaDualBall { radius } => {
            if !(*radius > 0.0) {
                return Err(Error::schema(format!("{pointer}/radius"), "radius must be positive"));
            }
            Ok(Shape::sigma_dual_ball(model, *radius))
        }
        ShapeSpec::Mask { path } => {
            let f = io::load_field(path)?;
            if f.grid() != grid {
                return Err(Error::schema(format!("{pointer}/path"), "mask grid differs from the experiment grid"));
            }
            Ok(Shape::mask(&f))
        }
    }
}

fn cmd_geometry(ctx: &Ctx, perimeter: bool) -> Result<i32> {
    let key = if perimeter { "perimeter" } else { "heat_content" };
    let params = ctx.section(if perimeter { &ctx.cfg.perimeter } else { &ctx.cfg.heat_content }, key)?;
    let (m, g) = (ctx.model()?, ctx.grid()?);
    let shape = build_shape(&params.shape, &m, &g, &format!("/{key}/shape"))?;
    let flow = match params.flow {
        FlowKind::Stable => HeatFlow::stable(&m, g)?,
        FlowKind::Gaussian => HeatFlow::Gaussian(g),
    };
    let ts = params.times.clone().unwrap_or_else(|| geometry::study_times(flow.alpha(), &g));
    let study = geometry::geometry_study(&flow, &shape, &ts)?;
    let name = if perimeter { "perimeter_study.csv" } else { "heat_content.csv" };
    let mut w = ctx.create(name)?;
    study.write_csv(&mut w)?;
    w.flush()?;
    let summary = study.summary();
    println!("{}", serde_json::to_string(&summary)?);
    ctx.emit(serde_json::json!({"summary": summary, "study": study}))?;
    Ok(EXIT_OK)
}

fn cmd_verify(ctx: &Ctx, suite_flag: Option<String>) -> Result<i32> {
    let params = ctx.cfg.verify.clone().unwrap_or(VerifyParams { suite: default_suite(), inputs: None });
    let suite = suite_flag.unwrap_or(params.suite);
    let ids = verifier::suite(&suite)?;
    let mut inputs = params.inputs.unwrap_or_default();
    inputs.seed = ctx.cfg.seed;
    let (m, g) = (ctx.model()?, ctx.grid()?);
    let (reports, skipped) = verifier::run_suite(&ids, &m, &g, &inputs)?;
    let mut w = csv::Writer::from_writer(ctx.create("verify.csv")?);
    w.write_record(["entry", "name", "verdict", "lhs", "rhs", "margin", "relative_margin", "worst_case"])?;
    let mut failed = false;
    for r in &reports {
        let hard = verifier::entry(&r.entry.to_string())?.kind == CheckKind::Hard;
        if hard && r.verdict == Verdict::Fail {
            failed = true;
        }
        println!(
            "{:>2} {:<24} {:<11} margin {:+.3e} ({})",
            r.entry,
            r.name,
            format!("{:?}", r.verdict).to_lowercase(),
            r.margin,
            r.worst_case
        );
        w.write_record([
            r.entry.to_string(),
            r.name.clone(),
            format!("{:?}", r.verdict).to_lowercase(),
            format!("{:.12e}", r.lhs),
            format!("{:.12e}", r.rhs),
            format!("{:.12e}", r.margin),
            format!("{:.12e}", r.relative_margin),
            r.worst_case.clone(),
        ])?;
    }
    w.flush()?;
    for (name, reason) in &skipped {
        println!("   {name:<24} skipped     ({reason})");
    }
    let skipped: Vec<_> = skipped.iter().map(|(n, r)| serde_json::json!({"name": n, "reason": r})).collect();
    ctx.emit(serde_json::json!({"suite": suite, "reports": reports, "skipped": skipped}))?;
    Ok(if failed { EXIT_CHECK_FAILED } else { EXIT_OK })
}

fn cmd_asymptotic(ctx: &Ctx) -> Result<i32> {
    let params = ctx.section(&ctx.cfg.asymptotic, "asymptotic")?;
    let (m, g) = (ctx.model()?, ctx.grid()?);
    let f = build_field(&params.field, g, "/asymptotic/field")?;
    let alphas = params.alphas.clone().unwrap_or_else(|| params.kind.default_alphas());
    let study = verifier::asymptotic_study(params.kind, &m, &g, &f, &alphas, params.p)
        .map_err(|e| match e {
            Error::BadSpec(msg) => Error::schema("/asymptotic/alphas", msg),
            other => other,
        })?;
    let mut w = csv::Writer::from_writer(ctx.create("asymptotic.csv")?);
    w.write_record(["alpha", "error"])?;
    for (a, e) in study.alphas.iter().zip(&study.errors) {
        w.write_record([format!("{a}"), format!("{e:.12e}")])?;
    }
    w.flush()?;
    println!(
        "{:?}: ratio {:.4e}, monotone {}, verdict {:?}",
        study.kind, study.ratio, study.monotone, study.verdict
    );
    ctx.emit(serde_json::to_value(&study)?)?;
    Ok(if study.verdict == Verdict::Pass { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn cmd_optimize(ctx: &Ctx) -> Result<i32> {
    let params = ctx.cfg.optimize.clone().unwrap_or(OptimizeParams { p: 2.0, options: None });
    let opts = params.options.unwrap_or_default();
    let (m, g) = (ctx.model()?, ctx.grid()?);
    let est = minimize_sobolev(&m, &g, params.p, &opts)?;
    for w in &est.warnings {
        eprintln!("warning: {w}");
    }
    let mut w = ctx.create("trace.csv")?;
    est.write_trace_csv(&mut w)?;
    w.flush()?;
    io::save_field(&est.flow.field, ctx.out.join("minimizer.sfld"))?;
    let summary = serde_json::json!({
        "S_estimate": est.s_estimate,
        "bound": if opts.dealias { "upper bound of the torus infimum" } else { "upper bound of the grid infimum" },
        "p": est.p,
        "p_star": est.p_star,
        "start_width": est.start_width,
        "starts": est.starts,
        "iterations": est.flow.iterations,
        "stop": est.flow.stop,
        "euler_lagrange_residual": est.euler_lagrange_residual,
        "warnings": est.warnings,
    });
    println!("{}", serde_json::to_string(&summary)?);
    ctx.emit(summary)?;
    Ok(EXIT_OK)
}
