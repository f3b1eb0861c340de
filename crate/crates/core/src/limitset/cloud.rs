//! Direction clouds on the unit sphere and their neighborhood components.

use std::collections::HashMap;

use crate::geometry::{angle_between, direction_of, norm2};
use crate::sampler::ShellSample;

use super::LimitSetError;

#[derive(Clone, Debug, PartialEq)]
pub struct CloudPoint {
    pub direction: Vec<f64>,
    /// Radius of the shell the point was sampled on.
    pub radius: f64,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct DirectionCloud {
    pub points: Vec<CloudPoint>,
    pub seed: u64,
}

impl DirectionCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn directions(&self) -> Vec<Vec<f64>> {
        self.points.iter().map(|p| p.direction.clone()).collect()
    }

    /// Points from the shell of the given radius.
    pub fn shell(&self, radius: f64) -> DirectionCloud {
        DirectionCloud {
            points: self.points.iter().filter(|p| p.radius == radius).cloned().collect(),
            seed: self.seed,
        }
    }

    /// Distinct shell radii, increasing.
    pub fn radii(&self) -> Vec<f64> {
        let mut r: Vec<f64> = self.points.iter().map(|p| p.radius).collect();
        r.sort_by(f64::total_cmp);
        r.dedup();
        r
    }
}

/// Directions of every sample point with `‖Log z‖ ≥ cutoff`.
pub fn direction_cloud(samples: &[ShellSample], cutoff: f64) -> Result<DirectionCloud, LimitSetError> {
    let mut points = Vec::new();
    for s in samples {
        for p in &s.points {
            let l = p.log();
            if norm2(&l) < cutoff {
                continue;
            }
            if let Ok(d) = direction_of(&l) {
                points.push(CloudPoint { direction: d.into_vec(), radius: s.radius, weight: 1.0 });
            }
        }
    }
    if points.is_empty() {
        return Err(LimitSetError::EmptyAfterCutoff(cutoff));
    }
    Ok(DirectionCloud { points, seed: samples.first().map_or(0, |s| s.seed) })
}

/// Uniform grid over a point set, for fixed-radius neighbor queries.
struct Grid {
    cell: f64,
    cells: HashMap<Vec<i64>, Vec<usize>>,
}

impl Grid {
    fn new(points: &[Vec<f64>], cell: f64) -> Self {
        let mut cells: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            cells.entry(Self::key(p, cell)).or_default().push(i);
        }
        Grid { cell, cells }
    }

    fn key(p: &[f64], cell: f64) -> Vec<i64> {
        p.iter().map(|x| (x / cell).floor() as i64).collect()
    }

    /// Indices in the cells adjacent to the one holding `p`.
    fn neighbors(&self, p: &[f64], visit: &mut impl FnMut(usize)) {
        let base = Self::key(p, self.cell);
        let n = base.len();
        let mut offset = vec![-1i64; n];
        loop {
            let k: Vec<i64> = base.iter().zip(&offset).map(|(a, b)| a + b).collect();
            if let Some(v) = self.cells.get(&k) {
                v.iter().for_each(|&i| visit(i));
            }
            let Some(j) = (0..n).find(|&j| offset[j] < 1) else { break };
            offset[j] += 1;
            offset[..j].iter_mut().for_each(|o| *o = -1);
        }
    }
}

/// Squared chord length of an angle.
fn chord_sq(angle: f64) -> f64 {
    let c = 2.0 * (0.5 * angle.min(std::f64::consts::PI)).sin();
    c * c
}

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Connected components of the graph joining directions at angle `≤ eps`.
///
/// Points are visited in lexicographic order, so the result depends only on
/// the set of directions. Each component lists indices into `dirs`, sorted
/// lexicographically by direction; components are ordered by their first
/// entry.
pub fn cluster_points(dirs: &[Vec<f64>], eps: f64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..dirs.len()).collect();
    order.sort_by(|&a, &b| dirs[a].iter().zip(&dirs[b]).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(a.cmp(&b)));
    if !(eps > 0.0) {
        return order.into_iter().map(|i| vec![i]).collect();
    }
    let sorted: Vec<Vec<f64>> = order.iter().map(|&i| dirs[i].clone()).collect();
    // Chord length never exceeds the angle, so adjacent cells suffice.
    let grid = Grid::new(&sorted, eps);
    let mut parent: Vec<usize> = (0..sorted.len()).collect();
    let chord2 = chord_sq(eps);
    for i in 0..sorted.len() {
        grid.neighbors(&sorted[i], &mut |j| {
            if j > i {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b && dist_sq(&sorted[i], &sorted[j]) <= chord2 {
                    parent[a.max(b)] = a.min(b);
                }
            }
        });
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..sorted.len() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(order[i]);
    }
    groups.into_values().collect()
}

/// Components of the cloud's `eps`-neighborhood graph, as point indices.
pub fn cluster_directions(cloud: &DirectionCloud, eps: f64) -> Vec<Vec<usize>> {
    cluster_points(&cloud.directions(), eps)
}

/// Median over points of the angle to the nearest other point.
pub fn median_nn_gap(dirs: &[Vec<f64>]) -> f64 {
    if dirs.len() < 2 {
        return 0.0;
    }
    let n = dirs[0].len();
    let cell = (4.0 / dirs.len() as f64).powf(1.0 / (n.max(2) - 1) as f64).clamp(1e-6, 0.5);
    let grid = Grid::new(dirs, cell);
    let mut gaps: Vec<f64> = (0..dirs.len())
        .map(|i| {
            let mut best = f64::INFINITY;
            grid.neighbors(&dirs[i], &mut |j| {
                if j != i {
                    best = best.min(dist_sq(&dirs[i], &dirs[j]));
                }
            });
            if best > cell * cell {
                // Nothing guaranteed within the adjacent cells.
                for (j, d) in dirs.iter().enumerate() {
                    if j != i {
                        best = best.min(dist_sq(&dirs[i], d));
                    }
                }
            }
            2.0 * (0.5 * best.sqrt()).min(1.0).asin()
        })
        .collect();
    gaps.sort_by(f64::total_cmp);
    gaps[gaps.len() / 2]
}

/// Largest angle from the farthest point to any other, a 2-approximation of
/// the angular diameter that is exact for arcs and blobs in practice.
pub fn angular_diameter(dirs: &[Vec<f64>]) -> f64 {
    if dirs.len() < 2 {
        return 0.0;
    }
    let mean = mean_direction(dirs);
    let far = dirs
        .iter()
        .max_by(|a, b| angle_between(a, &mean).total_cmp(&angle_between(b, &mean)))
        .expect("nonempty");
    dirs.iter().map(|d| angle_between(d, far)).fold(0.0, f64::max)
}

/// Normalized mean, or the first point when the mean vanishes.
pub fn mean_direction(dirs: &[Vec<f64>]) -> Vec<f64> {
    let n = dirs[0].len();
    let mut m = vec![0.0; n];
    for d in dirs {
        for (a, b) in m.iter_mut().zip(d) {
            *a += b;
        }
    }
    match direction_of(&m) {
        Ok(d) if norm2(&m) > 1e-9 * dirs.len() as f64 => d.into_vec(),
        _ => dirs[0].clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn blob(rng: &mut ChaCha8Rng, c: &[f64], r: f64, k: usize) -> Vec<Vec<f64>> {
        (0..k)
            .map(|_| {
                let v: Vec<f64> = c.iter().map(|x| x + rng.random_range(-r..r)).collect();
                direction_of(&v).unwrap().into_vec()
            })
            .collect()
    }

    #[test]
    fn three_blobs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut pts = blob(&mut rng, &[1.0, 0.0, 0.0], 0.01, 50);
        pts.extend(blob(&mut rng, &[0.0, 1.0, 0.0], 0.01, 50));
        pts.extend(blob(&mut rng, &[0.0, 0.0, -1.0], 0.01, 50));
        let comps = cluster_points(&pts, 0.1);
        assert_eq!(comps.len(), 3);
        assert!(comps.iter().all(|c| c.len() == 50));
    }

    #[test]
    fn arc_is_one_component() {
        let pts: Vec<Vec<f64>> = (0..200).map(|i| {
            let t = i as f64 * 0.01;
            vec![t.cos(), t.sin()]
        }).collect();
        assert_eq!(cluster_points(&pts, 0.02).len(), 1);
        assert!((median_nn_gap(&pts) - 0.01).abs() < 1e-9);
        assert!((angular_diameter(&pts) - 1.99).abs() < 1e-9);
    }

    #[test]
    fn zero_eps_gives_singletons() {
        let pts = vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        assert_eq!(cluster_points(&pts, 0.0).len(), 3);
    }

    #[test]
    fn order_does_not_matter() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pts = blob(&mut rng, &[1.0, 1.0], 0.3, 100);
        let mut rev = pts.clone();
        rev.reverse();
        let a: Vec<Vec<Vec<f64>>> =
            cluster_points(&pts, 0.01).iter().map(|c| c.iter().map(|&i| pts[i].clone()).collect()).collect();
        let b: Vec<Vec<Vec<f64>>> =
            cluster_points(&rev, 0.01).iter().map(|c| c.iter().map(|&i| rev[i].clone()).collect()).collect();
        assert_eq!(a, b);
    }
}
