//! The sampling-to-cells pipeline.

use serde::Serialize;

use crate::geometry::{angle_between, direction_of, norm2};
use crate::polyhedra::{Cell, CellKind, SphericalComplex};
use crate::sampler::{sample_schedule, SamplerConfig, ShellSample, VarietySpec};

use super::classify::{classify_component, vertex_cell, ClassifyParams, ComponentClass, ComponentKind};
use super::cloud::{cluster_points, direction_cloud, median_nn_gap, DirectionCloud};
use super::LimitSetError;

/// Smallest clustering radius, so that dense clouds do not split blobs.
pub const EPS_FLOOR: f64 = 5e-3;
/// Log-space width of an amoeba away from its limit directions; a shell of
/// radius `R` puts it at angular width about `SHELL_WIDTH / R`.
pub const SHELL_WIDTH: f64 = 4.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateConfig {
    /// Shell radii, increasing; at least 3.
    pub radii: Vec<f64>,
    pub points: usize,
    pub seed: u64,
    #[serde(skip)]
    pub sampler: SamplerConfig,
    pub classify: ClassifyParams,
    /// Clustering radius; by default three times the median nearest-neighbor
    /// gap on the largest shell, but at least [`EPS_FLOOR`] and the angular
    /// width `SHELL_WIDTH / R` of that shell.
    pub eps: Option<f64>,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        EstimateConfig {
            radii: vec![50.0, 100.0, 200.0],
            points: 10_000,
            seed: 0,
            sampler: SamplerConfig::default(),
            classify: ClassifyParams::default(),
            eps: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitSetEstimate {
    pub complex: SphericalComplex,
    pub components: Vec<ComponentClass>,
    pub cloud: DirectionCloud,
    pub samples: Vec<ShellSample>,
    pub eps: f64,
    /// Largest dimension among the components.
    pub dim_estimate: f64,
    /// `(vertices, arcs, higher cells)` found on the second-largest shell
    /// and on the largest.
    pub shell_counts: [(usize, usize, usize); 2],
    pub stable: bool,
    /// Vertices without a rational slope on both of the last two shell pairs.
    pub irrational_vertices: usize,
}

/// Clustering radius used for a cloud of directions from a shell of radius `radius`.
pub fn clustering_eps(dirs: &[Vec<f64>], radius: f64, fixed: Option<f64>) -> f64 {
    fixed.unwrap_or_else(|| (3.0 * median_nn_gap(dirs)).max(EPS_FLOOR).max(SHELL_WIDTH / radius))
}

fn classify_shell(dirs: &[Vec<f64>], eps: f64, p: &ClassifyParams) -> Vec<ComponentClass> {
    cluster_points(dirs, eps)
        .iter()
        .map(|c| {
            let pts: Vec<Vec<f64>> = c.iter().map(|&i| dirs[i].clone()).collect();
            classify_component(&pts, p)
        })
        .collect()
}

fn counts(comps: &[ComponentClass]) -> (usize, usize, usize) {
    let mut v = 0;
    let mut a = 0;
    let mut h = 0;
    for c in comps {
        match c.kind {
            ComponentKind::Vertex => v += 1,
            ComponentKind::Arcs => a += c.arcs.len(),
            ComponentKind::Higher => h += 1,
        }
    }
    (v, a, h)
}

/// Mean log-point per vertex on one shell, assigning each point to its
/// nearest vertex direction within `window`.
fn shell_means(shell: &ShellSample, verts: &[Vec<f64>], window: f64) -> Vec<Option<Vec<f64>>> {
    let n = verts.first().map_or(0, Vec::len);
    let mut sums = vec![vec![0.0; n]; verts.len()];
    let mut counts = vec![0usize; verts.len()];
    for p in &shell.points {
        let l = p.log();
        let Ok(d) = direction_of(&l) else { continue };
        let (best, ang) = verts
            .iter()
            .enumerate()
            .map(|(i, v)| (i, angle_between(d.as_slice(), v)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap_or((0, f64::INFINITY));
        if ang <= window {
            counts[best] += 1;
            for (s, x) in sums[best].iter_mut().zip(&l) {
                *s += x;
            }
        }
    }
    sums.into_iter()
        .zip(counts)
        .map(|(s, c)| (c >= 5).then(|| s.iter().map(|x| x / c as f64).collect()))
        .collect()
}

/// Direction of the displacement between two shells' mean points, which
/// cancels the constant offset of a tentacle.
fn displacement(a: &Option<Vec<f64>>, b: &Option<Vec<f64>>) -> Option<Vec<f64>> {
    let (a, b) = (a.as_ref()?, b.as_ref()?);
    let d: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
    (norm2(&d) > 0.0).then(|| direction_of(&d).ok().map(|d| d.into_vec())).flatten()
}

/// Runs the classification on samples that are already drawn.
pub fn estimate_from_samples(samples: Vec<ShellSample>, cfg: &EstimateConfig) -> Result<LimitSetEstimate, LimitSetError> {
    let cloud = direction_cloud(&samples, 0.0)?;
    let radii = cloud.radii();
    let top = *radii.last().expect("nonempty cloud");
    let top_dirs = cloud.shell(top).directions();
    let eps = clustering_eps(&top_dirs, top, cfg.eps);
    let p = &cfg.classify;
    let mut components = classify_shell(&top_dirs, eps, p);

    let second = if radii.len() >= 2 { radii[radii.len() - 2] } else { top };
    let second_dirs = cloud.shell(second).directions();
    let second_counts = counts(&classify_shell(&second_dirs, eps, p));
    let top_counts = counts(&components);

    // Refine vertex directions from the drift of their tentacles across shells.
    let vert_idx: Vec<usize> =
        (0..components.len()).filter(|&i| components[i].kind == ComponentKind::Vertex).collect();
    let verts: Vec<Vec<f64>> = vert_idx.iter().map(|&i| components[i].cells[0].samples[0].clone()).collect();
    let mut irrational_vertices = 0;
    if samples.len() >= 2 && !verts.is_empty() {
        let means: Vec<Vec<Option<Vec<f64>>>> = samples
            .iter()
            .map(|s| shell_means(s, &verts, (3.0 * p.eps_point * top / s.radius).min(0.5)))
            .collect();
        let last = samples.len() - 1;
        for (k, &ci) in vert_idx.iter().enumerate() {
            let c = &verts[k];
            let wide = displacement(&means[0][k], &means[last][k]);
            let near = displacement(&means[last - 1][k], &means[last][k]);
            let refined = match &wide {
                Some(d) if angle_between(d, c) <= 2.0 * p.eps_point => d.clone(),
                _ => c.clone(),
            };
            let cell = vertex_cell(refined, p);
            if cell.slopes.is_empty() {
                let near_rational = near
                    .filter(|d| angle_between(d, c) <= 2.0 * p.eps_point)
                    .map(|d| !vertex_cell(d, p).slopes.is_empty())
                    .unwrap_or(false);
                if !near_rational {
                    irrational_vertices += 1;
                }
            }
            components[ci].cells = vec![cell];
        }
    }

    let cells: Vec<Cell> = components.iter().flat_map(|c| c.cells.iter().cloned()).collect();
    let dim_estimate = components
        .iter()
        .map(|c| match c.kind {
            ComponentKind::Vertex => 0.0,
            ComponentKind::Arcs => 1.0,
            ComponentKind::Higher => c.dim_estimate,
        })
        .fold(0.0, f64::max);
    Ok(LimitSetEstimate {
        complex: SphericalComplex::new(cells),
        components,
        cloud,
        samples,
        eps,
        dim_estimate,
        shell_counts: [second_counts, top_counts],
        stable: second_counts == top_counts,
        irrational_vertices,
    })
}

/// Samples the schedule and classifies the resulting direction cloud.
pub fn estimate_limit_set(spec: &VarietySpec, cfg: &EstimateConfig) -> Result<LimitSetEstimate, LimitSetError> {
    let samples = sample_schedule(spec, &cfg.radii, cfg.points, cfg.seed, &cfg.sampler)?;
    estimate_from_samples(samples, cfg)
}

impl LimitSetEstimate {
    pub fn vertex_count(&self) -> usize {
        self.complex.count(CellKind::Vertex)
    }

    pub fn arc_count(&self) -> usize {
        self.complex.count(CellKind::Arc) + self.complex.count(CellKind::Circle)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;

    fn quick() -> EstimateConfig {
        EstimateConfig { points: 2000, ..Default::default() }
    }

    #[test]
    fn hyperbola_has_two_opposite_vertices() {
        let spec = VarietySpec::hypersurface(parse_expression("z1*z2-1", 2).unwrap());
        let e = estimate_limit_set(&spec, &quick()).unwrap();
        assert_eq!(e.vertex_count(), 2);
        assert_eq!(e.arc_count(), 0);
        let mut s: Vec<Vec<i64>> = e.complex.vertices().map(|c| c.slopes[0].as_slice().to_vec()).collect();
        s.sort();
        assert_eq!(s, vec![vec![-1, 1], vec![1, -1]]);
        assert!(e.stable);
    }

    #[test]
    fn line_has_three_vertices() {
        let spec = VarietySpec::hypersurface(parse_expression("1+z1+z2", 2).unwrap());
        let e = estimate_limit_set(&spec, &quick()).unwrap();
        let mut s: Vec<Vec<i64>> = e.complex.vertices().map(|c| c.slopes[0].as_slice().to_vec()).collect();
        s.sort();
        assert_eq!(s, vec![vec![-1, 0], vec![0, -1], vec![1, 1]]);
        assert_eq!(e.dim_estimate, 0.0);
    }
}
