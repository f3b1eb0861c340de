//! Points of a variety on logarithmic shells `‖Log z‖ ≈ R`.

mod hypersurface;
mod param;
mod probe;
mod region;
mod roots;

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::expr::{EvalError, Expression};
use crate::geometry::{log_map, norm2};

pub use hypersurface::{sample_hypersurface, HypersurfaceSolver};
pub use param::sample_parametrized;
pub use probe::{ends_at_direction, genericity_probe, EndsReport, RankReport, END_LINK_FRACTION};
pub use region::{amoeba_region_points, rho_region_points, RegionOptions};
pub use roots::{aberth, LogCoeff, LogPoly, LogSum};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum SamplerError {
    #[error("shell schedule needs 0 < rmin < rmax and at least 2 shells")]
    BadSchedule,
    #[error("no points of the variety found on the shell of radius {0}")]
    ShellUnreachable(f64),
    #[error("root finding budget exceeded on the shell of radius {0}")]
    RootFindingBudgetExceeded(f64),
    #[error("operation needs a variety spec in {0} mode")]
    WrongMode(&'static str),
    #[error("invalid variety spec: {0}")]
    InvalidSpec(String),
    #[error("no sample points near the requested direction")]
    NoPointsNearDirection,
    #[error("{0}")]
    Eval(#[from] EvalError),
    #[error("could not build worker pool: {0}")]
    Pool(String),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Mode {
    /// Zero set of the equations in `n` torus variables.
    Implicit { equations: Vec<Expression>, n: usize },
    /// Image of `C^params` under the coordinate expressions.
    Parametrized { map: Vec<Expression>, params: usize },
}

/// A variety together with its declared complex dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct VarietySpec {
    pub mode: Mode,
    pub k: usize,
}

impl VarietySpec {
    pub fn hypersurface(f: Expression) -> Self {
        let n = f.arity();
        VarietySpec { mode: Mode::Implicit { equations: vec![f], n }, k: n.saturating_sub(1) }
    }

    pub fn implicit(equations: Vec<Expression>, n: usize, k: usize) -> Result<Self, SamplerError> {
        if equations.is_empty() || equations.len() >= n.max(1) {
            return Err(SamplerError::InvalidSpec(format!(
                "{} equations in {n} variables; need between 1 and n-1",
                equations.len()
            )));
        }
        if equations.iter().any(|e| e.arity() != n) {
            return Err(SamplerError::InvalidSpec("equation arity differs from n".into()));
        }
        if k == 0 || k >= n {
            return Err(SamplerError::InvalidSpec(format!("dimension k={k} must lie in [1, n-1]")));
        }
        Ok(VarietySpec { mode: Mode::Implicit { equations, n }, k })
    }

    pub fn parametrized(map: Vec<Expression>, params: usize) -> Result<Self, SamplerError> {
        let n = map.len();
        if params == 0 || params >= n {
            return Err(SamplerError::InvalidSpec(format!("{params} parameters for a map into {n} coordinates")));
        }
        if map.iter().any(|e| e.arity() != params) {
            return Err(SamplerError::InvalidSpec("coordinate arity differs from the parameter count".into()));
        }
        Ok(VarietySpec { mode: Mode::Parametrized { map, params }, k: params })
    }

    pub fn ambient_dim(&self) -> usize {
        match &self.mode {
            Mode::Implicit { n, .. } => *n,
            Mode::Parametrized { map, .. } => map.len(),
        }
    }

    /// The single defining polynomial, if the variety is an implicit
    /// hypersurface given by a Laurent polynomial.
    pub fn polynomial(&self) -> Option<crate::expr::LaurentPolynomial> {
        match &self.mode {
            Mode::Implicit { equations, .. } if equations.len() == 1 => equations[0].to_laurent().ok(),
            _ => None,
        }
    }

    pub fn is_transcendental(&self) -> bool {
        match &self.mode {
            Mode::Implicit { equations, .. } => equations.iter().any(|e| e.root().is_transcendental()),
            Mode::Parametrized { map, .. } => map.iter().any(|e| e.root().is_transcendental()),
        }
    }
}

/// Geometric progression of `m` radii from `rmin` to `rmax`.
pub fn shell_schedule(rmin: f64, rmax: f64, m: usize) -> Result<Vec<f64>, SamplerError> {
    if !(rmin > 0.0 && rmax > rmin && m >= 2 && rmax.is_finite()) {
        return Err(SamplerError::BadSchedule);
    }
    let ratio = (rmax / rmin).ln() / (m - 1) as f64;
    let mut out: Vec<f64> = (0..m).map(|i| rmin * (ratio * i as f64).exp()).collect();
    out[0] = rmin;
    out[m - 1] = rmax;
    Ok(out)
}

/// Half-width of the shell `R - δ ≤ ‖Log z‖ ≤ R + δ`.
pub fn shell_band(radius: f64) -> f64 {
    (0.02 * radius).max(0.5)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SamplePoint {
    pub z: Vec<Complex64>,
    pub residual: f64,
    /// Parameters `t` with `g(t) = z`; empty for implicit specs.
    pub params: Vec<Complex64>,
}

impl SamplePoint {
    pub fn log(&self) -> Vec<f64> {
        log_map(&self.z)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShellSample {
    pub radius: f64,
    pub band: f64,
    pub seed: u64,
    pub points: Vec<SamplePoint>,
}

impl ShellSample {
    /// One line per point: `R re(z1) im(z1) ... re(zn) im(zn) residual`.
    pub fn to_lines(&self) -> String {
        let mut s = String::new();
        for p in &self.points {
            write!(s, "{:?}", self.radius).unwrap();
            for c in &p.z {
                write!(s, " {:?} {:?}", c.re, c.im).unwrap();
            }
            writeln!(s, " {:?}", p.residual).unwrap();
        }
        s
    }

    /// Points violating the band or the residual bound.
    pub fn violations(&self, residual_bound: f64) -> usize {
        self.points
            .iter()
            .filter(|p| {
                let r = norm2(&p.log());
                (r - self.radius).abs() > self.band * (1.0 + 1e-9) || p.residual > residual_bound
            })
            .count()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SamplerConfig {
    /// Worker threads; never affects results.
    pub workers: usize,
    /// Accepted points per task.
    pub chunk: usize,
    pub residual_bound: f64,
    /// Draws allowed per requested point before giving up.
    pub draws_per_point: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig { workers: 1, chunk: 250, residual_bound: 1e-9, draws_per_point: 400 }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of the task `(shell, chunk)` of a run.
pub fn task_seed(seed: u64, shell: u64, chunk: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ shell) ^ chunk.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// Something that produces accepted points one draw at a time.
pub(crate) trait Drawer: Sync {
    /// Appends zero or more accepted points from one draw.
    fn draw(&self, rng: &mut ChaCha8Rng, out: &mut Vec<SamplePoint>);
}

pub(crate) fn run_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T, SamplerError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| SamplerError::Pool(e.to_string()))?;
    Ok(pool.install(f))
}

/// Runs `count` accepted points split into fixed-size chunks, each chunk
/// drawn from its own seeded stream, and concatenates them in chunk order.
pub(crate) fn sample_chunks(
    drawer: &dyn Drawer,
    radius: f64,
    count: usize,
    seed: u64,
    shell_index: u64,
    cfg: &SamplerConfig,
) -> Result<ShellSample, SamplerError> {
    let chunk = cfg.chunk.max(1);
    let tasks: Vec<(u64, usize)> =
        (0..count.div_ceil(chunk)).map(|c| (c as u64, chunk.min(count - c * chunk))).collect();
    let budget = cfg.draws_per_point;
    let run = |&(c, need): &(u64, usize)| -> Result<Vec<SamplePoint>, SamplerError> {
        let mut rng = ChaCha8Rng::seed_from_u64(task_seed(seed, shell_index, c));
        let mut pts = Vec::with_capacity(need);
        let mut draws = 0usize;
        while pts.len() < need {
            drawer.draw(&mut rng, &mut pts);
            draws += 1;
            if draws > budget * need + 1000 {
                return Err(if pts.is_empty() {
                    SamplerError::ShellUnreachable(radius)
                } else {
                    SamplerError::RootFindingBudgetExceeded(radius)
                });
            }
        }
        pts.truncate(need);
        Ok(pts)
    };
    let results: Vec<Result<Vec<SamplePoint>, SamplerError>> =
        run_pool(cfg.workers, || tasks.par_iter().map(run).collect())?;
    let mut points = Vec::with_capacity(count);
    for r in results {
        points.extend(r?);
    }
    Ok(ShellSample { radius, band: shell_band(radius), seed, points })
}

/// Samples one shell of any variety.
pub fn sample_shell(
    spec: &VarietySpec,
    radius: f64,
    count: usize,
    seed: u64,
    shell_index: u64,
    cfg: &SamplerConfig,
) -> Result<ShellSample, SamplerError> {
    match &spec.mode {
        Mode::Implicit { equations, .. } if equations.len() == 1 => {
            hypersurface::sample_hypersurface_indexed(&equations[0], radius, count, seed, shell_index, cfg)
        }
        Mode::Implicit { .. } => Err(SamplerError::InvalidSpec(
            "implicit systems with several equations are not sampled; give a parametrization".into(),
        )),
        Mode::Parametrized { .. } => param::sample_parametrized_indexed(spec, radius, count, seed, shell_index, cfg),
    }
}

/// Samples every shell of a schedule.
pub fn sample_schedule(
    spec: &VarietySpec,
    radii: &[f64],
    count: usize,
    seed: u64,
    cfg: &SamplerConfig,
) -> Result<Vec<ShellSample>, SamplerError> {
    radii.iter().enumerate().map(|(i, &r)| sample_shell(spec, r, count, seed, i as u64, cfg)).collect()
}
