//! Command-line front end: run configuration, subcommands and their artifacts.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{parse_expression, parse_expression_list, Expression};
use crate::limitset::{
    algebraicity_verdict, certify_newton_bound, estimate_from_samples, ClassifyParams, Decision, EstimateConfig,
    LimitSetEstimate,
};
use crate::geometry::RationalSlope;
use crate::phase::phase_report;
use crate::polyhedra::{Cell, SphericalComplex};
use crate::raster::{
    complement_components, convexity_violations, render_ppm, render_svg, rho_disk_image, Raster, rasterize_points,
};
use crate::sampler::{amoeba_region_points, rho_region_points, sample_schedule, shell_schedule, RegionOptions, SamplerConfig, ShellSample, VarietySpec};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("config JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("parse: {0}")]
    Parse(#[from] crate::expr::ParseError),
    #[error("sampling: {0}")]
    Sampler(#[from] crate::sampler::SamplerError),
    #[error("limit set: {0}")]
    LimitSet(#[from] crate::limitset::LimitSetError),
    #[error("phase: {0}")]
    Phase(#[from] crate::phase::PhaseError),
    #[error("raster: {0}")]
    Raster(#[from] crate::raster::RasterError),
}

/// Source of the variety: implicit equations, a parametrization, or a file
/// holding either.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarietySource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub implicit: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parametrized: Option<String>,
    /// Text file: one equation per nonempty line, or the map when
    /// `file_mode` is `"parametrized"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file_mode: Option<String>,
    /// Ambient variables; inferred from the highest `z` index when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Parameters; inferred from the highest `t` index when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<usize>,
    /// Complex dimension; `n` minus the number of equations by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShellParams {
    pub rmin: f64,
    pub rmax: f64,
    pub count: usize,
}

impl Default for ShellParams {
    fn default() -> Self {
        ShellParams { rmin: 50.0, rmax: 200.0, count: 3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseParams {
    /// Smallest log-norm of the points kept.
    pub cutoff: f64,
    /// Height bound of the circle slopes searched.
    pub q: i64,
    /// Directions whose tentacles are measured; the estimated vertices when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tentacles: Option<Vec<Vec<f64>>>,
    /// Angular radius of a tentacle, in radians.
    pub tentacle_angle: f64,
}

impl Default for PhaseParams {
    fn default() -> Self {
        PhaseParams { cutoff: 0.0, q: 1, tentacles: None, tentacle_angle: 0.05 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderParams {
    /// `[xmin, xmax, ymin, ymax]` of the amoeba figure.
    pub bbox: [f64; 4],
    pub resolution: [usize; 2],
    pub projection: [usize; 2],
    /// Largest `Log` norm of the points mapped into the disk.
    pub rho_reach: f64,
    pub rho_resolution: [usize; 2],
    /// Subdivision depth limit of parametrized fills.
    pub max_depth: usize,
    pub convexity_pairs: usize,
}

impl Default for RenderParams {
    fn default() -> Self {
        RenderParams {
            bbox: [-6.0, 6.0, -6.0, 6.0],
            resolution: [512, 512],
            projection: [0, 1],
            rho_reach: 40.0,
            rho_resolution: [512, 512],
            max_depth: 30,
            convexity_pairs: 10_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertifyParams {
    pub degree: u32,
    /// Vertex slopes to certify against, instead of estimating them. The
    /// zero set is then not sampled and may be empty.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slopes: Option<Vec<Vec<i64>>>,
}

impl Default for CertifyParams {
    fn default() -> Self {
        CertifyParams { degree: 6, slopes: None }
    }
}

fn default_points() -> usize {
    10_000
}

fn default_workers() -> usize {
    1
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

/// Everything a run depends on. The worker count and output directory are
/// not echoed, since they never change the results.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub variety: VarietySource,
    /// Factor of a single implicit equation to sample instead of its whole
    /// zero set; samples are checked against the original equation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub component: Option<String>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub shells: ShellParams,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_workers", skip_serializing)]
    pub workers: usize,
    #[serde(default = "default_out", skip_serializing)]
    pub out: PathBuf,
    /// Fixed clustering radius.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default)]
    pub tolerances: ClassifyParams,
    #[serde(default)]
    pub phase: PhaseParams,
    #[serde(default)]
    pub render: RenderParams,
    #[serde(default)]
    pub certify: CertifyParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            variety: VarietySource::default(),
            component: None,
            seed: None,
            shells: ShellParams::default(),
            points: default_points(),
            workers: default_workers(),
            out: default_out(),
            eps: None,
            tolerances: ClassifyParams::default(),
            phase: PhaseParams::default(),
            render: RenderParams::default(),
            certify: CertifyParams::default(),
        }
    }
}

/// Highest index among identifiers `<letter><digits>`, with a bare letter
/// counting as index 1.
fn max_index(text: &str, letter: char) -> usize {
    let mut best = 0;
    let mut chars = text.char_indices().peekable();
    while let Some((_, c)) = chars.next() {
        if !c.is_ascii_alphanumeric() {
            continue;
        }
        let mut ident = String::from(c);
        while let Some(&(_, d)) = chars.peek() {
            if !d.is_ascii_alphanumeric() {
                break;
            }
            ident.push(d);
            chars.next();
        }
        if let Some(rest) = ident.strip_prefix(letter) {
            if rest.is_empty() {
                best = best.max(1);
            } else if let Ok(i) = rest.parse::<usize>() {
                best = best.max(i);
            }
        }
    }
    best
}

/// The variety after parsing, with the component to sample when one is selected.
pub struct Resolved {
    pub spec: VarietySpec,
    /// Variety of the selected component, sampled in place of `spec`.
    pub component: Option<VarietySpec>,
    /// Text of the variety, for figure metadata.
    pub label: String,
}

impl Resolved {
    pub fn sampled(&self) -> &VarietySpec {
        self.component.as_ref().unwrap_or(&self.spec)
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<u64, CliError> {
        let seed = self.seed.ok_or_else(|| CliError::Config("seed is mandatory".into()))?;
        let s = &self.shells;
        if !(s.rmin > 0.0 && s.rmax > s.rmin && s.count >= 3) {
            return Err(CliError::Config("shells need 0 < rmin < rmax and count >= 3".into()));
        }
        if self.points == 0 || self.workers == 0 {
            return Err(CliError::Config("points and workers must be positive".into()));
        }
        let t = &self.tolerances;
        let positive = [t.eps_point, t.tol_arc, t.vertex_tol, t.endpoint_tol, t.arc_gap, self.eps.unwrap_or(1.0)];
        if positive.iter().any(|v| !(*v > 0.0)) || t.vertex_q < 1 || t.endpoint_q < 1 {
            return Err(CliError::Config("tolerances must be positive".into()));
        }
        if self.variety.k == Some(0) {
            return Err(CliError::Config("k must be at least 1".into()));
        }
        Ok(seed)
    }

    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let v = &self.variety;
        let from_file = match &v.file {
            Some(p) => Some(std::fs::read_to_string(p)?),
            None => None,
        };
        let sources = v.implicit.is_some() as usize + v.parametrized.is_some() as usize + from_file.is_some() as usize;
        if sources != 1 {
            return Err(CliError::Config("give exactly one of variety.implicit, variety.parametrized, variety.file".into()));
        }
        let file_param = match v.file_mode.as_deref() {
            None | Some("implicit") => false,
            Some("parametrized") => true,
            Some(m) => return Err(CliError::Config(format!("unknown file_mode `{m}`"))),
        };
        let (spec, label) = if let Some(map) = v.parametrized.clone().or(from_file.clone().filter(|_| file_param)) {
            let params = v.params.unwrap_or_else(|| max_index(&map, 't'));
            let exprs = parse_expression_list(&map, params)?;
            let spec = VarietySpec::parametrized(exprs, params)?;
            if v.k.is_some_and(|k| k != params) {
                return Err(CliError::Config("k of a parametrization is its parameter count".into()));
            }
            (spec, map.trim().to_string())
        } else {
            let eqs: Vec<String> = match (&v.implicit, &from_file) {
                (Some(e), _) => e.clone(),
                (None, Some(text)) => text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect(),
                _ => unreachable!(),
            };
            if eqs.is_empty() {
                return Err(CliError::Config("no equations".into()));
            }
            let n = v.n.unwrap_or_else(|| eqs.iter().map(|e| max_index(e, 'z')).max().unwrap_or(0));
            let exprs = eqs.iter().map(|e| parse_expression(e, n)).collect::<Result<Vec<_>, _>>()?;
            let k = v.k.unwrap_or(n.saturating_sub(exprs.len()));
            (VarietySpec::implicit(exprs, n, k)?, eqs.join("; "))
        };
        let component = match &self.component {
            None => None,
            Some(text) => {
                let n = spec.ambient_dim();
                if !matches!(&spec.mode, crate::sampler::Mode::Implicit { equations, .. } if equations.len() == 1) {
                    return Err(CliError::Config("component needs a single implicit equation".into()));
                }
                let mut c = VarietySpec::hypersurface(parse_expression(text, n)?);
                c.k = spec.k;
                Some(c)
            }
        };
        Ok(Resolved { spec, component, label })
    }

    fn estimate_config(&self, seed: u64) -> Result<EstimateConfig, CliError> {
        Ok(EstimateConfig {
            radii: shell_schedule(self.shells.rmin, self.shells.rmax, self.shells.count)?,
            points: self.points,
            seed,
            sampler: SamplerConfig { workers: self.workers, ..SamplerConfig::default() },
            classify: self.tolerances.clone(),
            eps: self.eps,
        })
    }
}

/// Largest relative residual of a selected component's samples in the
/// original equation.
pub const COMPONENT_RESIDUAL: f64 = 1e-6;

fn check_component(r: &Resolved, samples: &[ShellSample]) -> Result<(), CliError> {
    let crate::sampler::Mode::Implicit { equations, .. } = &r.spec.mode else { return Ok(()) };
    if r.component.is_none() {
        return Ok(());
    }
    for s in samples {
        for p in &s.points {
            for f in equations {
                let (v, scale) =
                    f.eval_with_scale(&p.z).map_err(|e| CliError::Config(format!("component check: {e}")))?;
                if v.norm() > COMPONENT_RESIDUAL * scale.max(f64::MIN_POSITIVE) {
                    return Err(CliError::Config(format!(
                        "component is not contained in the variety: residual {:.3e} at radius {}",
                        v.norm() / scale,
                        s.radius
                    )));
                }
            }
        }
    }
    Ok(())
}

fn estimate(cfg: &RunConfig, r: &Resolved, seed: u64) -> Result<LimitSetEstimate, CliError> {
    let ec = cfg.estimate_config(seed)?;
    let samples = sample_schedule(r.sampled(), &ec.radii, ec.points, ec.seed, &ec.sampler)?;
    check_component(r, &samples)?;
    Ok(estimate_from_samples(samples, &ec)?)
}

fn write(out: &Path, name: &str, bytes: impl AsRef<[u8]>) -> Result<(), CliError> {
    std::fs::write(out.join(name), bytes)?;
    Ok(())
}

pub fn exit_code(d: Decision) -> i32 {
    match d {
        Decision::AlgebraicConsistent => 0,
        Decision::NotAlgebraic => 10,
        Decision::Inconclusive => 20,
    }
}

#[derive(Serialize)]
struct RegionReport {
    cells: usize,
    unbounded: bool,
    convexity_violations: usize,
}

#[derive(Serialize)]
struct RenderReport {
    bbox: [f64; 4],
    resolution: [usize; 2],
    projection: [usize; 2],
    occupied: usize,
    complement: Vec<RegionReport>,
    rho_occupied: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Classify,
    Limitset,
    Phase,
    Render,
    Certify,
}

/// Runs one subcommand, writing its artifacts under `cfg.out`, and returns
/// the exit code.
pub fn run(command: Command, cfg: &RunConfig) -> Result<i32, CliError> {
    let seed = cfg.validate()?;
    if let (Command::Certify, Some(slopes)) = (command, &cfg.certify.slopes) {
        return certify_given(cfg, slopes);
    }
    let r = cfg.resolve()?;
    std::fs::create_dir_all(&cfg.out)?;
    let out = cfg.out.as_path();
    write(out, "config.json", cfg.to_json())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    pool.install(|| match command {
        Command::Classify => {
            let est = estimate(cfg, &r, seed)?;
            let mut v = algebraicity_verdict(&est, r.spec.k, Some(r.sampled()));
            if let Some(c) = &cfg.component {
                v.diagnostics.warnings.push(format!("sampled the component {c} only"));
            }
            write(out, "verdict.json", v.to_json())?;
            Ok(exit_code(v.decision))
        }
        Command::Limitset => {
            let est = estimate(cfg, &r, seed)?;
            write(out, "complex.json", est.complex.to_json())?;
            Ok(0)
        }
        Command::Phase => {
            let ec = cfg.estimate_config(seed)?;
            let samples = sample_schedule(r.sampled(), &ec.radii, ec.points, ec.seed, &ec.sampler)?;
            check_component(&r, &samples)?;
            let tentacles = match &cfg.phase.tentacles {
                Some(t) => t.clone(),
                None => {
                    let est = estimate_from_samples(samples.clone(), &ec)?;
                    est.complex.vertices().map(|c| c.samples[0].clone()).collect()
                }
            };
            let p = &cfg.phase;
            let rep = phase_report(&samples, p.cutoff, p.q, &tentacles, p.tentacle_angle)?;
            write(out, "phase.json", rep.to_json())?;
            Ok(0)
        }
        Command::Render => {
            let rp = &cfg.render;
            let res = (rp.resolution[0], rp.resolution[1]);
            let projection = (rp.projection[0], rp.projection[1]);
            let opts =
                RegionOptions { projection, workers: cfg.workers, seed, max_depth: rp.max_depth, ..RegionOptions::default() };
            let label = format!("{}; Log coordinates ({}, {})", r.label, projection.0 + 1, projection.1 + 1);
            let pts = amoeba_region_points(r.sampled(), rp.bbox, res, &opts)?;
            let amoeba = rasterize_points(&pts, rp.bbox, res, &label)?;
            let rres = (rp.rho_resolution[0], rp.rho_resolution[1]);
            let far = rho_region_points(r.sampled(), rres, rp.rho_reach, &opts)?;
            let rho = rho_disk_image(&far, rres, &format!("rho image of {label}"))?;
            write(out, "amoeba.svg", render_svg(&amoeba))?;
            write(out, "amoeba.ppm", render_ppm(&amoeba))?;
            write(out, "rho.svg", render_svg(&rho))?;
            write(out, "rho.ppm", render_ppm(&rho))?;
            let report = render_report(&amoeba, &rho, rp, seed);
            write(out, "render.json", serde_json::to_string_pretty(&report)?)?;
            Ok(0)
        }
        Command::Certify => {
            let f = single_equation(&r)?;
            let est = estimate(cfg, &r, seed)?;
            let c = certify_newton_bound(&f, &est.complex, cfg.certify.degree)?;
            write(out, "certificate.json", c.to_json())?;
            Ok(0)
        }
    })
}

fn certify_given(cfg: &RunConfig, slopes: &[Vec<i64>]) -> Result<i32, CliError> {
    let eq = match (&cfg.variety.implicit, &cfg.component) {
        (_, Some(c)) => c.clone(),
        (Some(e), None) if e.len() == 1 => e[0].clone(),
        _ => return Err(CliError::Config("certify needs a single implicit equation".into())),
    };
    let n = slopes.first().map_or(0, Vec::len);
    if n == 0 || slopes.iter().any(|u| u.len() != n) {
        return Err(CliError::Config("certify.slopes must be nonempty and of equal length".into()));
    }
    let f = parse_expression(&eq, cfg.variety.n.unwrap_or(n))?;
    let cells = slopes
        .iter()
        .map(|u| {
            RationalSlope::new(u.clone())
                .map(Cell::vertex)
                .ok_or_else(|| CliError::Config(format!("slope {u:?} is not primitive and nonzero")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let c = certify_newton_bound(&f, &SphericalComplex::new(cells), cfg.certify.degree)?;
    std::fs::create_dir_all(&cfg.out)?;
    write(&cfg.out, "config.json", cfg.to_json())?;
    write(&cfg.out, "certificate.json", c.to_json())?;
    Ok(0)
}

fn single_equation(r: &Resolved) -> Result<Expression, CliError> {
    match &r.sampled().mode {
        crate::sampler::Mode::Implicit { equations, .. } if equations.len() == 1 => Ok(equations[0].clone()),
        _ => Err(CliError::Config("certify needs a single implicit equation".into())),
    }
}

fn render_report(amoeba: &Raster, rho: &Raster, rp: &RenderParams, seed: u64) -> RenderReport {
    let complement = complement_components(amoeba)
        .iter()
        .map(|c| RegionReport {
            cells: c.cells.len(),
            unbounded: c.unbounded,
            convexity_violations: convexity_violations(c, amoeba, rp.convexity_pairs, seed),
        })
        .collect();
    RenderReport {
        bbox: rp.bbox,
        resolution: rp.resolution,
        projection: rp.projection,
        occupied: amoeba.occupied(),
        complement,
        rho_occupied: rho.occupied(),
    }
}

#[derive(Parser, Debug)]
#[command(name = "tropiscope", version, about = "Amoebas, phase sets and logarithmic limit sets of complex varieties")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Decide whether the variety looks algebraic; writes verdict.json.
    Classify(RunArgs),
    /// Estimate the logarithmic limit set; writes complex.json.
    Limitset(RunArgs),
    /// Analyze the phase limit set; writes phase.json.
    Phase(RunArgs),
    /// Draw the amoeba and its disk image; writes SVG, PPM and render.json.
    Render(RunArgs),
    /// Bound the Newton polytope from the estimate; writes certificate.json.
    Certify(RunArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of shells.
    #[arg(long)]
    shells: Option<usize>,
    #[arg(long)]
    rmin: Option<f64>,
    #[arg(long)]
    rmax: Option<f64>,
    /// Points per shell.
    #[arg(long)]
    points: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// Implicit equation; repeat for several.
    #[arg(long = "equation")]
    equations: Vec<String>,
    /// Parametrization, e.g. "(t, exp(t))".
    #[arg(long)]
    map: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    params: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    component: Option<String>,
    /// Truncation degree for `certify`.
    #[arg(long)]
    degree: Option<u32>,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_json(&std::fs::read_to_string(p)?)?,
            None => RunConfig::default(),
        };
        if !self.equations.is_empty() || self.map.is_some() {
            cfg.variety = VarietySource {
                implicit: (!self.equations.is_empty()).then(|| self.equations.clone()),
                parametrized: self.map.clone(),
                ..VarietySource::default()
            };
        }
        let v = &mut cfg.variety;
        v.n = self.n.or(v.n);
        v.params = self.params.or(v.params);
        v.k = self.k.or(v.k);
        cfg.component = self.component.clone().or(cfg.component);
        cfg.seed = self.seed.or(cfg.seed);
        if let Some(s) = self.shells {
            cfg.shells.count = s;
        }
        if let Some(x) = self.rmin {
            cfg.shells.rmin = x;
        }
        if let Some(x) = self.rmax {
            cfg.shells.rmax = x;
        }
        cfg.points = self.points.unwrap_or(cfg.points);
        cfg.workers = self.workers.unwrap_or(cfg.workers);
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        if let Some(d) = self.degree {
            cfg.certify.degree = d;
        }
        Ok(cfg)
    }
}

/// Parses arguments, runs the subcommand and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (command, a) = match &cli.command {
        Sub::Classify(a) => (Command::Classify, a),
        Sub::Limitset(a) => (Command::Limitset, a),
        Sub::Phase(a) => (Command::Phase, a),
        Sub::Render(a) => (Command::Render, a),
        Sub::Certify(a) => (Command::Certify, a),
    };
    match a.config().and_then(|cfg| run(command, &cfg)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("tropiscope: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indices_are_inferred() {
        assert_eq!(max_index("1+z1+z2", 'z'), 2);
        assert_eq!(max_index("sin(pi*z1*z3)", 'z'), 3);
        assert_eq!(max_index("(t, exp(t))", 't'), 1);
        assert_eq!(max_index("(t1, t2, exp(t1))", 't'), 2);
    }

    #[test]
    fn config_round_trip_and_unknown_fields() {
        let cfg = RunConfig::from_json(r#"{"variety": {"implicit": ["1+z1+z2"]}, "seed": 42}"#).unwrap();
        assert_eq!(cfg.seed, Some(42));
        let back = RunConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
        assert!(RunConfig::from_json(r#"{"seed": 1, "colour": 3}"#).is_err());
    }

    #[test]
    fn seed_is_mandatory() {
        let cfg = RunConfig::from_json(r#"{"variety": {"implicit": ["1+z1+z2"]}}"#).unwrap();
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
    }

    #[test]
    fn resolve_modes() {
        let cfg = RunConfig::from_json(r#"{"variety": {"parametrized": "(t, exp(t))"}, "seed": 0}"#).unwrap();
        let r = cfg.resolve().unwrap();
        assert_eq!(r.spec.k, 1);
        assert_eq!(r.spec.ambient_dim(), 2);
        let cfg = RunConfig::from_json(r#"{"variety": {"implicit": ["1+z1+z2+z3"]}, "seed": 0}"#).unwrap();
        assert_eq!(cfg.resolve().unwrap().spec.k, 2);
        let cfg = RunConfig::from_json(r#"{"variety": {}, "seed": 0}"#).unwrap();
        assert!(cfg.resolve().is_err());
    }

    #[test]
    fn unknown_flags_are_errors() {
        assert_eq!(main_with_args(["tropiscope", "classify", "--bogus", "1"]), 1);
        assert_eq!(main_with_args(["tropiscope", "frobnicate"]), 1);
    }
}
