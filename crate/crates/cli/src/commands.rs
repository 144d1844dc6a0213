use std::fmt::Write as _;

use hyperc_core::analytic::{self, AlphaResult};
use hyperc_core::percolation::{
    detect_line_through_ball, estimate_f, estimate_s_cdf, surviving_directions, ExperimentResult,
    Model,
};
use hyperc_core::quad::Quadrature;
use hyperc_core::render::{self, Scene};
use hyperc_core::sampler::{self, ModelParams};
use hyperc_core::treecover::{
    self, build_tree, check_separation, estimate_r_prime, RPrimeEstimate,
};
use hyperc_core::{dist, Executor, HPoint, RngStream};
use serde::Serialize;

use crate::args::*;
use crate::{resolve_seed, write_file, CliError, Output, Summary, VERSION};

type Res = Result<Output, CliError>;

pub(crate) fn dispatch(cmd: &Command, exec: &Executor) -> Res {
    match cmd {
        Command::Alpha(a) => alpha(a),
        Command::Critical(a) => critical(a),
        Command::SimulateF(a) => simulate_f(a, exec),
        Command::Rays(a) => rays(a, exec),
        Command::DetectLine(a) => detect_line(a, exec),
        Command::SDist(a) => s_dist(a, exec),
        Command::Grassmann(a) => grassmann(a, exec),
        Command::Lrp(a) => lrp(a),
        Command::Tree(a) => tree(a, exec),
        Command::Render(a) => render_cmd(a),
    }
}

fn summary<C: Serialize, R: Serialize>(
    name: &str,
    seed: Option<u64>,
    config: &C,
    results: R,
) -> Output {
    let s = Summary {
        command: name,
        version: VERSION,
        seed,
        config,
        results,
    };
    Output {
        json: serde_json::to_string_pretty(&s).expect("summary is serializable") + "\n",
    }
}

fn usage(cond: bool, msg: impl Into<String>) -> Result<(), CliError> {
    if cond {
        Ok(())
    } else {
        Err(CliError::Usage(msg.into()))
    }
}

fn params(model: Model, lambda: f64, radius: f64) -> Result<ModelParams, CliError> {
    Ok(match model {
        Model::Lines => ModelParams::lines(lambda)?,
        _ => ModelParams::new(lambda, radius)?,
    })
}

fn ci95(k: u64, n: u64) -> f64 {
    let p = k as f64 / n as f64;
    1.96 * (p * (1.0 - p) / n as f64).sqrt()
}

#[derive(Serialize)]
struct AlphaOut {
    alpha: f64,
    formula: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    solver: Option<AlphaResult>,
}

fn alpha_value(model: Model, p: ModelParams) -> Result<AlphaOut, CliError> {
    Ok(match model {
        Model::Vacant => AlphaOut {
            alpha: analytic::alpha_vacant(p),
            formula: "2 lambda sinh R",
            solver: None,
        },
        Model::Lines => AlphaOut {
            alpha: p.lambda,
            formula: "lambda",
            solver: None,
        },
        Model::Occupied => {
            let r = analytic::alpha_occupied(p, &Quadrature::default())?;
            AlphaOut {
                alpha: r.alpha,
                formula: "1 = int_0^{2R} e^{alpha t} G'(t) dt",
                solver: Some(r),
            }
        }
    })
}

fn alpha(a: &AlphaArgs) -> Res {
    let p = params(a.model, a.lambda, a.radius)?;
    let out = alpha_value(a.model, p)?;
    eprintln!("alpha = {} [{}]", out.alpha, out.formula);
    Ok(summary("alpha", None, a, out))
}

#[derive(Serialize)]
struct CriticalOut {
    lambda: f64,
    formula: &'static str,
    /// |α(λ) - 1| at the returned intensity
    residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    solver: Option<analytic::CriticalResult>,
}

fn critical(a: &CriticalArgs) -> Res {
    let out = match a.model {
        Model::Vacant => {
            let l = analytic::lambda_gv(a.radius)?;
            CriticalOut {
                lambda: l,
                formula: "1 / (2 sinh R)",
                residual: (analytic::alpha_vacant(ModelParams::new(l, a.radius)?) - 1.0).abs(),
                solver: None,
            }
        }
        Model::Lines => CriticalOut {
            lambda: 1.0,
            formula: "1",
            residual: 0.0,
            solver: None,
        },
        Model::Occupied => {
            let c = analytic::lambda_gc(a.radius, &Quadrature::default())?;
            CriticalOut {
                lambda: c.lambda,
                formula: "alpha(lambda) = 1",
                residual: (c.alpha.alpha - 1.0).abs(),
                solver: Some(c),
            }
        }
    };
    eprintln!(
        "lambda_c = {} (|alpha - 1| = {:e})",
        out.lambda, out.residual
    );
    Ok(summary("critical", None, a, out))
}

#[derive(Serialize)]
struct SimulateOut {
    experiment: ExperimentResult,
    /// closed form or solver value of α, when available
    alpha_analytic: Option<f64>,
    /// closed-form f(r) on the grid (vacant and lines)
    f_analytic: Option<Vec<f64>>,
}

fn simulate_f(a: &SimulateArgs, exec: &Executor) -> Res {
    let p = params(a.model, a.lambda, a.radius)?;
    let grid = a.grid()?;
    usage(a.trials >= 100, "simulate-f needs --trials >= 100")?;
    let seed = resolve_seed(a.common.seed)?;
    let exp = estimate_f(a.model, p, &grid, a.trials, seed, exec)?;
    let (alpha_analytic, f_analytic) = match a.model {
        Model::Vacant => (
            Some(analytic::alpha_vacant(p)),
            Some(
                grid.iter()
                    .map(|&r| analytic::f_vacant(r, p))
                    .collect::<Result<_, _>>()?,
            ),
        ),
        Model::Lines => (
            Some(p.lambda),
            Some(
                grid.iter()
                    .map(|&r| analytic::f_grassmann(r, p.lambda))
                    .collect::<Result<_, _>>()?,
            ),
        ),
        Model::Occupied => (
            analytic::alpha_occupied(p, &Quadrature::default())
                .ok()
                .map(|r| r.alpha),
            None,
        ),
    };
    if let Some(path) = &a.csv {
        let mut csv = String::from("r,f_hat,ci95,trials\n");
        for k in 0..exp.r_values.len() {
            let _ = writeln!(
                csv,
                "{},{},{},{}",
                exp.r_values[k], exp.estimates[k], exp.half_widths[k], exp.trials
            );
        }
        write_file(path, &csv)?;
    }
    for w in &exp.warnings {
        eprintln!("warning: {w}");
    }
    match (exp.alpha_hat, exp.alpha_stderr) {
        (Some(al), Some(se)) => eprintln!("alpha_hat = {al} ± {se} (analytic {alpha_analytic:?})"),
        _ => eprintln!("no exponent fitted"),
    }
    Ok(summary(
        "simulate-f",
        Some(seed),
        a,
        SimulateOut {
            experiment: exp,
            alpha_analytic,
            f_analytic,
        },
    ))
}

#[derive(Serialize)]
struct RaysRow {
    r: f64,
    /// fraction of samples with a surviving direction
    p_nonempty: f64,
    ci95: f64,
    /// mean fraction of surviving directions
    mean_fraction: f64,
    /// closed-form survival probability of a single ray, when known
    f_analytic: Option<f64>,
}

fn rays(a: &RaysArgs, exec: &Executor) -> Res {
    let p = params(a.model, a.lambda, a.radius)?;
    usage(a.trials >= 1, "rays needs --trials >= 1")?;
    usage(
        !a.r_values.0.is_empty(),
        "rays needs at least one ray length",
    )?;
    let seed = resolve_seed(a.common.seed)?;
    let mut rows = Vec::new();
    for &r in &a.r_values.0 {
        // the same streams for every r couple the samples across lengths
        let res = exec.map(a.trials, |i| {
            surviving_directions(a.model, p, r, a.directions, RngStream::new(seed, i))
        });
        let mut nonempty = 0u64;
        let mut frac = 0.0;
        for s in res {
            let s = s?;
            nonempty += !s.is_empty() as u64;
            frac += s.surviving.len() as f64 / s.n_directions as f64;
        }
        let f_analytic = match a.model {
            Model::Vacant => Some(analytic::f_vacant(r, p)?),
            Model::Lines => Some(analytic::f_grassmann(r, p.lambda)?),
            Model::Occupied => None,
        };
        rows.push(RaysRow {
            r,
            p_nonempty: nonempty as f64 / a.trials as f64,
            ci95: ci95(nonempty, a.trials),
            mean_fraction: frac / a.trials as f64,
            f_analytic,
        });
        eprintln!(
            "r = {r}: P(some ray survives) = {}",
            nonempty as f64 / a.trials as f64
        );
    }
    if let Some(path) = &a.csv {
        let mut csv = String::from("r,p_nonempty,ci95,mean_fraction,trials\n");
        for row in &rows {
            let _ = writeln!(
                csv,
                "{},{},{},{},{}",
                row.r, row.p_nonempty, row.ci95, row.mean_fraction, a.trials
            );
        }
        write_file(path, &csv)?;
    }
    Ok(summary("rays", Some(seed), a, rows))
}

#[derive(Serialize)]
struct DetectOut {
    found: u64,
    trials: u64,
    frequency: f64,
    ci95: f64,
    mean_survivors: f64,
    mean_chords_tested: f64,
}

fn detect_line(a: &DetectArgs, exec: &Executor) -> Res {
    let p = params(a.model, a.lambda, a.radius)?;
    usage(a.trials >= 1, "detect-line needs --trials >= 1")?;
    let seed = resolve_seed(a.common.seed)?;
    let res = exec.map(a.trials, |i| {
        detect_line_through_ball(a.model, p, a.s, a.r, a.directions, RngStream::new(seed, i))
    });
    let (mut found, mut surv, mut chords) = (0u64, 0.0, 0.0);
    for d in res {
        let d = d?;
        found += d.found as u64;
        surv += d.survivors as f64;
        chords += d.chords_tested as f64;
    }
    let n = a.trials as f64;
    let out = DetectOut {
        found,
        trials: a.trials,
        frequency: found as f64 / n,
        ci95: ci95(found, a.trials),
        mean_survivors: surv / n,
        mean_chords_tested: chords / n,
    };
    eprintln!("detected in {found} of {} samples", a.trials);
    Ok(summary("detect-line", Some(seed), a, out))
}

#[derive(Serialize)]
struct SDistOut {
    trials: u64,
    prob_positive: f64,
    prob_positive_analytic: f64,
    /// sup_t |Ĝ(t) - G(t)|
    sup_distance: f64,
    /// max |H(t) + 1 - G(t)| on the grid
    identity_error: f64,
}

fn s_dist(a: &SDistArgs, exec: &Executor) -> Res {
    let p = ModelParams::new(a.lambda, a.radius)?;
    usage(a.trials >= 1, "s-dist needs --trials >= 1")?;
    usage(a.grid >= 1, "s-dist needs --grid >= 1")?;
    let seed = resolve_seed(a.common.seed)?;
    let q = Quadrature::default();
    let dist_s = estimate_s_cdf(p, a.trials, seed, exec)?;
    let sup = dist_s.sup_distance(&q)?;
    let mut csv = String::from("t,G_empirical,G_analytic\n");
    let mut identity: f64 = 0.0;
    for k in 0..=a.grid {
        let t = 2.0 * a.radius * k as f64 / a.grid as f64;
        let g = analytic::hitting_cdf(t, p, &q)?;
        let h = analytic::hitting_h(t, p, &q)?;
        identity = identity.max((h + 1.0 - g).abs());
        let _ = writeln!(csv, "{t},{},{g}", dist_s.cdf(t));
    }
    if let Some(path) = &a.csv {
        write_file(path, &csv)?;
    }
    let out = SDistOut {
        trials: a.trials,
        prob_positive: dist_s.prob_positive(),
        prob_positive_analytic: analytic::prob_start_covered(p),
        sup_distance: sup,
        identity_error: identity,
    };
    eprintln!("sup |G_hat - G| = {sup}; max |H + 1 - G| = {identity:e}");
    Ok(summary("s-dist", Some(seed), a, out))
}

#[derive(Serialize)]
struct MeasureRow {
    x: f64,
    closed_form: f64,
    quadrature: f64,
}

#[derive(Serialize)]
struct FRow {
    r: f64,
    f_hat: f64,
    ci95: f64,
    f_analytic: f64,
    z: f64,
}

#[derive(Serialize)]
struct GrassmannOut {
    segment_measure: Vec<MeasureRow>,
    separating_measure: Vec<MeasureRow>,
    simulation: Option<Vec<FRow>>,
}

fn grassmann(a: &GrassmannArgs, exec: &Executor) -> Res {
    let q = Quadrature::default();
    let mut seg = Vec::new();
    for &r in &a.r_values.0 {
        seg.push(MeasureRow {
            x: r,
            closed_form: sampler::phi_segment(r)?,
            quadrature: sampler::phi_segment_quadrature(r, &q)?,
        });
    }
    let mut sep = Vec::new();
    for &t in &a.thetas.0 {
        sep.push(MeasureRow {
            x: t,
            closed_form: sampler::phi_separating(t)?,
            quadrature: sampler::phi_separating_quadrature(t, &q)?,
        });
    }
    let (seed, simulation) = if a.trials > 0 {
        usage(
            a.trials >= 100,
            "grassmann simulation needs --trials >= 100",
        )?;
        let seed = resolve_seed(a.common.seed)?;
        let exp = estimate_f(
            Model::Lines,
            ModelParams::lines(a.lambda)?,
            &a.r_values.0,
            a.trials,
            seed,
            exec,
        )?;
        let mut rows = Vec::new();
        for k in 0..exp.r_values.len() {
            let r = exp.r_values[k];
            let f = analytic::f_grassmann(r, a.lambda)?;
            let sd = (f * (1.0 - f) / a.trials as f64).sqrt();
            rows.push(FRow {
                r,
                f_hat: exp.estimates[k],
                ci95: exp.half_widths[k],
                f_analytic: f,
                z: if sd > 0.0 {
                    (exp.estimates[k] - f) / sd
                } else {
                    0.0
                },
            });
        }
        (Some(seed), Some(rows))
    } else {
        (None, None)
    };
    for row in &seg {
        eprintln!(
            "Phi(segment {}) = {} (quadrature {})",
            row.x, row.closed_form, row.quadrature
        );
    }
    Ok(summary(
        "grassmann",
        seed,
        a,
        GrassmannOut {
            segment_measure: seg,
            separating_measure: sep,
            simulation,
        },
    ))
}

#[derive(Serialize)]
struct LrpRow {
    n: i64,
    measure: f64,
    prob: f64,
    n2_times_prob: f64,
}

fn lrp(a: &LrpArgs) -> Res {
    usage(
        a.nmin >= 2 && a.nmin <= a.nmax,
        "lrp needs 2 <= nmin <= nmax",
    )?;
    usage(a.nmax - a.nmin <= 10_000_000, "lrp range too large")?;
    let mut rows = Vec::new();
    let mut csv = String::from("n,measure,prob,n2_times_prob\n");
    for n in a.nmin..=a.nmax {
        let m = analytic::lrp_edge_measure(0, n)?;
        let p = analytic::lrp_edge_prob(0, n, a.lambda, a.c)?;
        let scaled = (n as f64) * (n as f64) * p;
        let _ = writeln!(csv, "{n},{m},{p},{scaled}");
        rows.push(LrpRow {
            n,
            measure: m,
            prob: p,
            n2_times_prob: scaled,
        });
    }
    if let Some(path) = &a.csv {
        write_file(path, &csv)?;
    }
    let (lo, hi) = rows
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r.n2_times_prob), hi.max(r.n2_times_prob))
        });
    eprintln!("n^2 * p ranges over [{lo}, {hi}]");
    Ok(summary("lrp", None, a, rows))
}

#[derive(Serialize)]
struct ReductionOut {
    model: Model,
    r_prime: f64,
    trials: u64,
    /// mean fraction of open vertices
    open_fraction: f64,
    /// fraction of samples with `o` open
    root_open: f64,
    /// fraction of samples whose open cluster of `o` reaches the last level
    reaches_depth: f64,
    ci95_reaches_depth: f64,
    mean_cluster_size: f64,
}

#[derive(Serialize)]
struct TreeOut {
    vertices: usize,
    separation_checked: usize,
    separation_failures: usize,
    min_pairwise_distance: f64,
    estimate: Option<RPrimeEstimate>,
    reduction: Option<ReductionOut>,
}

fn tree(a: &TreeArgs, exec: &Executor) -> Res {
    let t = build_tree(a.arc_length, a.depth)?;
    let words = t.words();
    let mut failures = 0;
    for w in &words[1..] {
        if !check_separation(&t, w)? {
            failures += 1;
        }
    }
    let vs = t.vertices();
    let mut min_d = f64::INFINITY;
    for i in 0..vs.len() {
        for j in 0..i {
            min_d = min_d.min(dist(vs[i], vs[j]));
        }
    }
    let needs_seed = a.depth >= 8 || a.model.is_some();
    let seed = if needs_seed {
        Some(resolve_seed(a.common.seed)?)
    } else {
        None
    };
    let estimate = if a.depth >= 8 {
        usage(a.paths >= 1, "tree needs --paths >= 1")?;
        Some(estimate_r_prime(&t, a.paths, seed.expect("seeded"), exec)?)
    } else {
        None
    };
    let reduction = match a.model {
        None => None,
        Some(model) => {
            let r_prime = match (a.r_prime, &estimate) {
                (Some(r), _) => r,
                (None, Some(e)) => e.r_prime(),
                (None, None) => {
                    return Err(CliError::Usage(
                        "tree reduction needs --r-prime when depth < 8 (R' is estimated only from depth 8)".into(),
                    ))
                }
            };
            usage(a.trials >= 1, "tree needs --trials >= 1")?;
            let p = params(model, a.lambda, a.radius)?;
            // reduction samples use streams disjoint from the path streams
            let base = RngStream::new(seed.expect("seeded"), 0).derive(1);
            let mut open_frac = 0.0;
            let (mut root, mut reach, mut size) = (0u64, 0u64, 0usize);
            for i in 0..a.trials {
                let stream = RngStream::new(base.master_seed, i);
                let real = treecover::sample_around_tree(&t, model, p, r_prime, stream)?;
                let open = treecover::tree_site_reduction(&t, &real, model, r_prime, exec)?;
                open_frac += open.iter().filter(|&&o| o).count() as f64 / open.len() as f64;
                root += open[0] as u64;
                let c = treecover::root_cluster(&t, &open);
                reach += (c.size > 0 && c.max_depth == a.depth) as u64;
                size += c.size;
            }
            let n = a.trials as f64;
            Some(ReductionOut {
                model,
                r_prime,
                trials: a.trials,
                open_fraction: open_frac / n,
                root_open: root as f64 / n,
                reaches_depth: reach as f64 / n,
                ci95_reaches_depth: ci95(reach, a.trials),
                mean_cluster_size: size as f64 / n,
            })
        }
    };
    if let Some(path) = &a.svg {
        write_file(path, &render::tree_scene(&t, 800.0).to_svg())?;
    }
    if let Some(e) = &estimate {
        eprintln!("R = {}, R' = {}", e.vertex_to_line, e.line_to_vertices);
    }
    Ok(summary(
        "tree",
        seed,
        a,
        TreeOut {
            vertices: t.len(),
            separation_checked: words.len() - 1,
            separation_failures: failures,
            min_pairwise_distance: min_d,
            estimate,
            reduction,
        },
    ))
}

#[derive(Serialize)]
struct RenderOut {
    items: usize,
    bytes: usize,
}

fn render_cmd(a: &RenderArgs) -> Res {
    usage(
        a.size >= 50.0 && a.size <= 20_000.0,
        "render needs 50 <= --size <= 20000",
    )?;
    usage(a.rho > 0.0 && a.rho <= 12.0, "render needs 0 < --rho <= 12")?;
    let (seed, scene) = match a.scene {
        SceneKind::Lines => {
            let seed = resolve_seed(a.common.seed)?;
            let s = sampler::sample_lines(a.lambda, a.rho, RngStream::new(seed, 0))?;
            let mut scene = Scene::new(a.size);
            for g in s.lines {
                scene.add_geodesic(g, render::LINE_STYLE);
            }
            (Some(seed), scene)
        }
        SceneKind::Balls => {
            let seed = resolve_seed(a.common.seed)?;
            let p = ModelParams::new(a.lambda, a.radius)?;
            let s = sampler::sample_points(p, HPoint::ORIGIN, a.rho, RngStream::new(seed, 0))?;
            let mut scene = Scene::new(a.size);
            for &c in &s.points {
                scene.add_ball(c, a.radius, render::BALL_STYLE);
            }
            for &c in &s.points {
                scene.add_point(c, 1.0, render::POINT_STYLE);
            }
            (Some(seed), scene)
        }
        SceneKind::Tree => (
            None,
            render::tree_scene(&build_tree(a.arc_length, a.depth)?, a.size),
        ),
    };
    let svg = scene.to_svg();
    write_file(&a.svg, &svg)?;
    eprintln!("wrote {} ({} items)", a.svg.display(), scene.len());
    Ok(summary(
        "render",
        seed,
        a,
        RenderOut {
            items: scene.len(),
            bytes: svg.len(),
        },
    ))
}
