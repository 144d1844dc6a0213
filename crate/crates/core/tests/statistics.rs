//! Small Monte Carlo checks of the samplers against exact laws. Seeds are
//! fixed, so these are deterministic; tolerances are four standard errors.

use std::f64::consts::PI;

use hyperc_core::analytic;
use hyperc_core::percolation::{
    point_window, ray_survival, surviving_directions, Model, Realization,
};
use hyperc_core::treecover::build_tree;
use hyperc_core::{dist, Executor, HPoint, Isometry, ModelParams, RngStream};

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

fn fractions(
    model: Model,
    params: ModelParams,
    r: f64,
    n: u32,
    trials: u64,
    seed: u64,
) -> Vec<f64> {
    Executor::default()
        .map(trials, |i| {
            surviving_directions(model, params, r, n, RngStream::new(seed, i)).unwrap()
        })
        .into_iter()
        .map(|s| s.surviving.len() as f64 / n as f64)
        .collect()
}

#[test]
fn single_ray_law_matches_closed_forms() {
    let p = ModelParams::new(0.2, 1.0).unwrap();
    let (m, se) = mean_sd(&fractions(Model::Vacant, p, 3.0, 512, 400, 1));
    let exact = analytic::f_vacant(3.0, p).unwrap();
    assert!((m - exact).abs() < 4.0 * se, "vacant {m} ± {se} vs {exact}");

    let l = ModelParams::lines(0.5).unwrap();
    let (m, se) = mean_sd(&fractions(Model::Lines, l, 2.0, 512, 400, 2));
    let exact = analytic::f_grassmann(2.0, 0.5).unwrap();
    assert!((m - exact).abs() < 4.0 * se, "lines {m} ± {se} vs {exact}");
}

#[test]
fn lazy_sampler_matches_full_window() {
    let cases = [
        (Model::Vacant, ModelParams::new(0.2, 1.0).unwrap(), 4.0),
        (Model::Occupied, ModelParams::new(0.5, 1.0).unwrap(), 3.0),
    ];
    let trials = 300;
    for (model, p, r) in cases {
        let lazy = fractions(model, p, r, 512, trials, 3);
        let full: Vec<f64> = Executor::default().map(trials, |i| {
            let stream = RngStream::new(3, i).derive(11);
            let real =
                Realization::sample(model, p, HPoint::ORIGIN, point_window(r, p.radius), stream)
                    .unwrap();
            let s = ray_survival(model, &real, r, 512).unwrap();
            s.surviving.len() as f64 / 512.0
        });
        let (a, sa) = mean_sd(&lazy);
        let (b, sb) = mean_sd(&full);
        let tol = 4.0 * (sa * sa + sb * sb).sqrt();
        assert!(
            (a - b).abs() < tol,
            "{model}: lazy {a} vs full {b} (tol {tol})"
        );
        let nonempty =
            |xs: &[f64]| xs.iter().filter(|&&x| x > 0.0).count() as f64 / xs.len() as f64;
        let (pa, pb) = (nonempty(&lazy), nonempty(&full));
        let pool = 0.5 * (pa + pb);
        let se = (pool * (1.0 - pool) * 2.0 / trials as f64).sqrt().max(1e-9);
        assert!(
            (pa - pb).abs() < 4.0 * se,
            "{model}: P(nonempty) {pa} vs {pb}"
        );
    }
}

#[test]
fn vacant_rays_straddle_the_threshold() {
    let lgv = analytic::lambda_gv(1.0).unwrap();
    let count = |factor: f64| {
        let p = ModelParams::new(factor * lgv, 1.0).unwrap();
        fractions(Model::Vacant, p, 10.0, 1 << 16, 50, 4)
            .iter()
            .filter(|&&x| x > 0.0)
            .count()
    };
    // infinite rays exist below λ_gv with positive probability, and a.s. not above
    let below = count(0.5);
    let above = count(2.0);
    assert!(below >= 10, "{below} of 50 below the threshold");
    assert_eq!(above, 0, "{above} of 50 above the threshold");
}

#[test]
fn tree_is_invariant_under_its_symmetries() {
    let t = build_tree(1.0, 7).unwrap();
    let vs = t.vertices();
    let inner = &vs[..t.level(6).end];
    let present = |p: HPoint| vs.iter().any(|&v| dist(p, v) < 1e-7);
    let rot = Isometry::rotation(2.0 * PI / 3.0);
    for j in 0..3 {
        let m = t.reflection(j);
        for &p in inner {
            assert!(present(m.apply(p)), "reflection {j} leaves the vertex set");
            assert!(present(rot.apply(p)), "rotation leaves the vertex set");
        }
    }
}
