//! Rank of the logarithmic map along a sample, and ends over a direction.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::param::eval_map;
use super::{Mode, SamplePoint, SamplerError, ShellSample, VarietySpec};
use crate::expr::Expression;
use crate::geometry::{angle_between, direction_of, norm2};

#[derive(Clone, Debug, PartialEq)]
pub struct RankReport {
    /// Numerical rank at each sample point; `None` where no tangent space
    /// could be formed.
    pub ranks: Vec<Option<usize>>,
    pub max_rank: usize,
    pub fraction_max: f64,
}

fn numerical_rank(m: &DMatrix<f64>) -> usize {
    if m.ncols() == 0 || m.nrows() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.iter().copied().fold(0.0, f64::max);
    if !(top > 0.0) {
        return 0;
    }
    sv.iter().filter(|&&s| s > 1e-8 * top).count()
}

/// Real image `(Re(v_j / z_j))_j` of a tangent vector under `d Log`.
fn log_image(z: &[Complex64], v: &[Complex64]) -> Vec<f64> {
    z.iter().zip(v).map(|(a, b)| (b / a).re).collect()
}

fn complex_step(c: Complex64) -> f64 {
    1e-6 * c.norm().min(1.0).max(1e-300)
}

fn gradient(f: &Expression, z: &[Complex64]) -> Option<Vec<Complex64>> {
    let mut g = Vec::with_capacity(z.len());
    for j in 0..z.len() {
        let h = complex_step(z[j]);
        let mut zp = z.to_vec();
        let mut zm = z.to_vec();
        zp[j] += h;
        zm[j] -= h;
        let d = (f.eval(&zp).ok()? - f.eval(&zm).ok()?) / (2.0 * h);
        if !d.re.is_finite() || !d.im.is_finite() {
            return None;
        }
        g.push(d);
    }
    Some(g)
}

/// Real tangent basis of a hypersurface at `z`, from the kernel of `df`.
fn implicit_tangent(f: &Expression, z: &[Complex64]) -> Option<Vec<Vec<Complex64>>> {
    let g = gradient(f, z)?;
    let p = (0..g.len()).max_by(|&a, &b| g[a].norm().total_cmp(&g[b].norm()))?;
    if g[p].norm() == 0.0 {
        return None;
    }
    let mut basis = Vec::new();
    for j in (0..g.len()).filter(|&j| j != p) {
        let mut v = vec![Complex64::new(0.0, 0.0); g.len()];
        v[j] = Complex64::new(1.0, 0.0);
        v[p] = -g[j] / g[p];
        basis.push(v.iter().map(|c| c * Complex64::i()).collect());
        basis.push(v);
    }
    Some(basis)
}

/// Real tangent basis of a parametrized variety at `g(t)`.
fn param_tangent(map: &[Expression], t: &[Complex64]) -> Option<Vec<Vec<Complex64>>> {
    let mut basis = Vec::new();
    for i in 0..t.len() {
        let h = complex_step(t[i]);
        let mut tp = t.to_vec();
        let mut tm = t.to_vec();
        tp[i] += h;
        tm[i] -= h;
        let (gp, gm) = (eval_map(map, &tp)?, eval_map(map, &tm)?);
        let d: Vec<Complex64> = gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * h)).collect();
        basis.push(d.iter().map(|c| c * Complex64::i()).collect());
        basis.push(d);
    }
    Some(basis)
}

fn point_rank(spec: &VarietySpec, p: &SamplePoint) -> Option<usize> {
    let basis = match &spec.mode {
        Mode::Implicit { equations, .. } if equations.len() == 1 => implicit_tangent(&equations[0], &p.z)?,
        Mode::Implicit { .. } => return None,
        Mode::Parametrized { map, .. } => {
            if p.params.is_empty() {
                return None;
            }
            param_tangent(map, &p.params)?
        }
    };
    let n = p.z.len();
    let mut m = DMatrix::<f64>::zeros(n, basis.len());
    for (c, v) in basis.iter().enumerate() {
        let col = log_image(&p.z, v);
        if col.iter().any(|x| !x.is_finite()) {
            return None;
        }
        for (r, x) in col.into_iter().enumerate() {
            m[(r, c)] = x;
        }
    }
    Some(numerical_rank(&m))
}

/// Numerical rank of `d Log` restricted to the variety at each point.
pub fn genericity_probe(spec: &VarietySpec, sample: &ShellSample) -> RankReport {
    let max_rank = (2 * spec.k).min(spec.ambient_dim());
    let ranks: Vec<Option<usize>> = sample.points.iter().map(|p| point_rank(spec, p)).collect();
    let hits = ranks.iter().filter(|r| **r == Some(max_rank)).count();
    let fraction_max = if ranks.is_empty() { 0.0 } else { hits as f64 / ranks.len() as f64 };
    RankReport { ranks, max_rank, fraction_max }
}

/// Shell-radius multiple used as the single-linkage threshold.
pub const END_LINK_FRACTION: f64 = 0.002;
/// Clusters smaller than this share of the points near `x` are noise.
const END_MIN_SHARE: f64 = 0.02;

#[derive(Clone, Debug, PartialEq)]
pub struct EndsReport {
    /// Estimated number of ends over the direction.
    pub ends: usize,
    /// Whether the count agreed on each of the last three shells.
    pub stable: bool,
    /// Cluster counts on the last three shells, innermost first.
    pub counts: Vec<usize>,
    /// Cluster centroids on the outermost shell, as offsets across `x`.
    pub representatives: Vec<Vec<f64>>,
}

fn single_linkage(pts: &[Vec<f64>], tau: f64) -> Vec<Vec<usize>> {
    let n = pts.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            let d: Vec<f64> = pts[i].iter().zip(&pts[j]).map(|(a, b)| a - b).collect();
            if norm2(&d) <= tau {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

/// Clusters of one shell's points near `x`, noise removed.
fn shell_clusters(shell: &ShellSample, x: &[f64], eps: f64) -> Vec<Vec<Vec<f64>>> {
    // Ends run asymptotically parallel to `x`, so only the offset across `x`
    // separates them.
    let near: Vec<Vec<f64>> = shell
        .points
        .iter()
        .map(SamplePoint::log)
        .filter(|l| direction_of(l).map(|d| angle_between(d.as_slice(), x) <= eps).unwrap_or(false))
        .map(|l| {
            let along: f64 = l.iter().zip(x).map(|(a, b)| a * b).sum();
            l.iter().zip(x).map(|(a, b)| a - along * b).collect()
        })
        .collect();
    let min_size = ((END_MIN_SHARE * near.len() as f64).ceil() as usize).max(2);
    single_linkage(&near, END_LINK_FRACTION * shell.radius)
        .into_iter()
        .filter(|g| g.len() >= min_size)
        .map(|g| g.into_iter().map(|i| near[i].clone()).collect())
        .collect()
}

/// Number of ends of the variety over the direction `x`, estimated from
/// the last three shells of `samples` (ordered by radius).
pub fn ends_at_direction(samples: &[ShellSample], x: &[f64], eps: f64) -> Result<EndsReport, SamplerError> {
    if samples.len() < 3 {
        return Err(SamplerError::InvalidSpec("ends need at least 3 shells".into()));
    }
    let xd = direction_of(x).map_err(|_| SamplerError::InvalidSpec("zero direction".into()))?;
    let last = &samples[samples.len() - 3..];
    let clusters: Vec<Vec<Vec<Vec<f64>>>> = last.iter().map(|s| shell_clusters(s, xd.as_slice(), eps)).collect();
    let counts: Vec<usize> = clusters.iter().map(Vec::len).collect();
    if counts.iter().all(|&c| c == 0) {
        return Err(SamplerError::NoPointsNearDirection);
    }
    let stable = counts.windows(2).all(|w| w[0] == w[1]);
    let representatives = clusters[2]
        .iter()
        .map(|g| {
            let mut c = vec![0.0; x.len()];
            for p in g {
                for (a, b) in c.iter_mut().zip(p) {
                    *a += b / g.len() as f64;
                }
            }
            c
        })
        .collect();
    Ok(EndsReport { ends: counts[2], stable, counts, representatives })
}
