mod common;

use common::expr;
use tropiscope::expr::Expression;
use tropiscope::limitset::{algebraicity_verdict, estimate_from_samples, estimate_limit_set, EstimateConfig, Verdict};
use tropiscope::phase::phase_cloud;
use tropiscope::polyhedra::tropical_limit_set;
use tropiscope::sampler::{sample_schedule, sample_shell, shell_schedule, SamplerConfig, ShellSample, VarietySpec};

fn config(shells: usize, seed: u64) -> EstimateConfig {
    EstimateConfig { radii: shell_schedule(50.0, 200.0, shells).unwrap(), seed, ..EstimateConfig::default() }
}

fn by_workers(spec: &VarietySpec, workers: usize) -> ShellSample {
    let cfg = SamplerConfig { workers, ..SamplerConfig::default() };
    sample_shell(spec, 60.0, 1500, 11, 2, &cfg).unwrap()
}

fn summary(v: &Verdict) -> (String, Vec<(String, Vec<Vec<i64>>)>) {
    let mut cells: Vec<(String, Vec<Vec<i64>>)> = v
        .cells
        .iter()
        .map(|c| (format!("{:?}", c.kind), c.slopes.iter().map(|s| s.as_slice().to_vec()).collect()))
        .collect();
    cells.sort();
    (format!("{:?}", v.decision), cells)
}

fn verdict(spec: &VarietySpec, shells: usize) -> Verdict {
    let est = estimate_limit_set(spec, &config(shells, 3)).unwrap();
    algebraicity_verdict(&est, spec.k, Some(spec))
}

#[test]
fn worker_count_does_not_change_samples() {
    let line = VarietySpec::hypersurface(expr("1 + z1 + z2", 2));
    let curve = VarietySpec::parametrized(vec![expr("t", 1), expr("exp(t)", 1)], 1).unwrap();
    for spec in [line, curve] {
        let one = by_workers(&spec, 1);
        let many = by_workers(&spec, 4);
        assert_eq!(one.to_lines(), many.to_lines());
    }
}

#[test]
fn emitted_points_pass_an_independent_check() {
    let f = expr("(1.5)*z1^2*z2 + (-0.7)*z2^-1 + 1 + z1^-3", 2);
    let spec = VarietySpec::hypersurface(f.clone());
    let cfg = SamplerConfig::default();
    let s = sample_shell(&spec, 80.0, 800, 5, 0, &cfg).unwrap();
    assert!(!s.points.is_empty());
    for p in &s.points {
        let (v, scale) = f.eval_with_scale(&p.z).unwrap();
        assert!(v.norm() <= 1e-8 * scale, "residual {}", v.norm() / scale);
        let r = p.log().iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((r - s.radius).abs() <= s.band, "radius {r}");
    }
}

#[test]
fn hyperbola_logs_lie_on_the_antidiagonal() {
    let spec = VarietySpec::hypersurface(expr("z1*z2 - 1", 2));
    let s = sample_shell(&spec, 100.0, 1000, 1, 0, &SamplerConfig::default()).unwrap();
    assert!(!s.points.is_empty());
    for p in &s.points {
        let l = p.log();
        assert!((l[0] + l[1]).abs() <= 1e-9);
    }
}

#[test]
fn hyperbola_phases_sum_to_zero() {
    let spec = VarietySpec::hypersurface(expr("z1*z2 - 1", 2));
    let s = sample_shell(&spec, 100.0, 1000, 2, 0, &SamplerConfig::default()).unwrap();
    let cloud = phase_cloud(&[s], 0.0).unwrap();
    assert!(!cloud.is_empty());
    for a in &cloud.angles {
        let t = (a[0] + a[1]).rem_euclid(std::f64::consts::TAU);
        assert!(t.min(std::f64::consts::TAU - t) <= 1e-9);
    }
}

#[test]
fn direction_clouds_converge_to_the_tropical_set() {
    for (text, f) in common::corpus(31, 2, 4) {
        let oracle = tropical_limit_set(&f.to_laurent().unwrap()).unwrap();
        let spec = VarietySpec::hypersurface(f);
        let radii = [20.0, 60.0, 180.0];
        let samples = sample_schedule(&spec, &radii, 2000, 9, &SamplerConfig::default()).unwrap();
        let means: Vec<f64> = samples
            .iter()
            .map(|s| {
                let d: Vec<f64> = s
                    .points
                    .iter()
                    .map(|p| {
                        let l = p.log();
                        let r = l.iter().map(|x| x * x).sum::<f64>().sqrt();
                        oracle.distance_to(&l.iter().map(|x| x / r).collect::<Vec<_>>())
                    })
                    .collect();
                d.iter().sum::<f64>() / d.len() as f64
            })
            .collect();
        for w in means.windows(2) {
            assert!(w[1] <= 1.1 * w[0], "{text}: {means:?}");
        }
    }
}

#[test]
fn verdicts_survive_a_finer_schedule() {
    let mut inputs: Vec<VarietySpec> = vec![
        VarietySpec::hypersurface(expr("1 + z1 + z2", 2)),
        VarietySpec::hypersurface(expr("z1*z2 - 1", 2)),
        VarietySpec::parametrized(vec![expr("t", 1), expr("exp(t)", 1)], 1).unwrap(),
    ];
    inputs.extend(common::corpus(2024, 2, 2).into_iter().map(|(_, f)| VarietySpec::hypersurface(f)));
    for spec in &inputs {
        assert_eq!(summary(&verdict(spec, 3)), summary(&verdict(spec, 5)));
    }
}

#[test]
fn smaller_eps_never_lowers_the_dimension() {
    let spec = VarietySpec::parametrized(vec![expr("t", 1), expr("exp(t)", 1)], 1).unwrap();
    let base = config(3, 4);
    let samples = sample_schedule(&spec, &base.radii, base.points, base.seed, &base.sampler).unwrap();
    let mut last = f64::NEG_INFINITY;
    for eps in [0.2, 0.1, 0.05, 0.025] {
        let cfg = EstimateConfig { eps: Some(eps), ..base.clone() };
        let d = estimate_from_samples(samples.clone(), &cfg).unwrap().dim_estimate;
        assert!(d >= last, "eps {eps}: {d} after {last}");
        last = d;
    }
}

#[test]
fn monomial_factors_do_not_change_verdicts() {
    let plain: Vec<(Expression, Expression)> = vec![
        (expr("1 + z1 + z2", 2), expr("z1^2*z2^-1*(1 + z1 + z2)", 2)),
        (expr("z1*z2 - 1", 2), expr("z2^3*(z1*z2 - 1)", 2)),
    ];
    for (f, g) in plain {
        let a = verdict(&VarietySpec::hypersurface(f), 3);
        let b = verdict(&VarietySpec::hypersurface(g), 3);
        assert_eq!(summary(&a), summary(&b));
    }
}
