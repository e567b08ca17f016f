//! End-to-end acceptance criteria. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::io::Write;
use std::time::{Duration, Instant};

use geonoise_core::geodesic::{geodesic_endpoint, integrate_geodesic};
use geonoise_core::manifold::{numeric, Coord, CoordKind, Domain};
use geonoise_core::noise::{brownian_noise, gaussian3, perturb, pullback_velocity};
use geonoise_core::{
    rng, DeformedChart, FlowField, GeoError, LocalPoint, ManifoldSpec, NoiseConfig, ParamVelocity, Strategy,
    TangentVector,
};
use geonoise_harness::regularizer::mc_regularizer_check;
use geonoise_harness::table::{mean_and_sem, summarize};
use geonoise_harness::{generate_dataset, run_table, train_model, GridConfig, ModelConfig, Preset, TrainConfig};
use nalgebra::{Matrix3, Matrix3x2, Vector2, Vector3};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(id: &str, title: &str, budget: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let t0 = Instant::now();
    let mut out = f();
    let elapsed = t0.elapsed();
    if let Some(b) = budget {
        if elapsed > b {
            out.pass = false;
            out.detail.push_str(&format!("; over the {b:?} budget"));
        }
    }
    let line = format!(
        "criterion {id} [{}] {title}: {} ({elapsed:.1?})\n",
        if out.pass { "PASS" } else { "FAIL" },
        out.detail
    );
    // Bypass output capture so the summary is always visible.
    std::io::stderr().write_all(line.as_bytes()).unwrap();
    out.pass
}

fn families() -> Vec<(&'static str, ManifoldSpec)> {
    vec![
        ("Spheroid", ManifoldSpec::spheroid(1.0, 0.5).unwrap()),
        ("Torus", ManifoldSpec::torus(2.0, 1.0).unwrap()),
        ("SwissRoll", ManifoldSpec::swiss_roll(0.5).unwrap()),
        ("BiconcaveDisc", ManifoldSpec::default_biconcave_disc()),
    ]
}

/// Uniform points, with polar angles at least 0.2 from the poles.
fn interior_points(m: &ManifoldSpec, n: usize, seed: u64) -> Vec<LocalPoint> {
    let mut coords = m.domain.coords;
    for c in coords.iter_mut() {
        if c.kind == CoordKind::Polar {
            *c = Coord::new(0.2, PI - 0.2, CoordKind::Polar);
        }
    }
    let d = Domain::new(coords[0], coords[1]);
    let mut r = rng::seeded(seed);
    (0..n).map(|_| d.sample(&mut r)).collect()
}

fn unit2<R: Rng>(r: &mut R) -> Vector2<f64> {
    let a: f64 = r.random::<f64>() * 2.0 * PI;
    Vector2::new(a.cos(), a.sin())
}

fn sphere_distance(x: &Vector3<f64>, y: &Vector3<f64>) -> f64 {
    x.cross(y).norm().atan2(x.dot(y))
}

fn expm(a: &Matrix3<f64>) -> Matrix3<f64> {
    let mut s = 0;
    while a.abs().max() * 3.0 / 2f64.powi(s) > 0.25 {
        s += 1;
    }
    let b = a / 2f64.powi(s);
    let (mut term, mut acc) = (Matrix3::identity(), Matrix3::identity());
    for k in 1..20 {
        term = term * b / k as f64;
        acc += term;
    }
    for _ in 0..s {
        acc = acc * acc;
    }
    acc
}

fn geometry_oracles() -> Outcome {
    let (mut metric, mut proj, mut chris, mut drift): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for (_, m) in families() {
        for u in interior_points(&m, 100, 1) {
            let j = m.jacobian(&u).unwrap();
            let g = m.metric(&u).unwrap().g;
            metric = metric.max((g - j.transpose() * j).abs().max());
            let p = m.projection_matrix(&u).unwrap();
            let n = m.unit_normal(&u).unwrap();
            proj = proj
                .max((p * p - p).abs().max())
                .max((p * j - j).abs().max())
                .max((p * n).abs().max());
            let fd = numeric::christoffel_from_metric(&m, &u, numeric::default_step(&u)).unwrap();
            chris = chris.max(m.christoffel(&u).unwrap().max_abs_diff(&fd));
            let generic = numeric::drift_from_metric(&m, &u, 1e-6).unwrap();
            drift = drift.max((m.bm_drift(&u).unwrap() - generic).abs().max());
        }
    }
    Outcome {
        pass: metric <= 1e-9 && proj <= 1e-9 && chris <= 1e-5 && drift <= 1e-6,
        detail: format!(
            "max |g-JᵀJ| {metric:.1e}, projector {proj:.1e}, Christoffel vs FD {chris:.1e} (tol 1e-5), drift vs generic {drift:.1e} (tol 1e-6)"
        ),
    }
}

fn great_circles() -> Outcome {
    let m = ManifoldSpec::unit_sphere();
    let mut r = rng::seeded(2);
    let (mut pos, mut speed, mut factors) = (0.0f64, 0.0f64, Vec::new());
    let mut n = 0;
    while n < 20 {
        let u = LocalPoint::new(r.random_range(0.5..PI - 0.5), r.random_range(0.0..2.0 * PI));
        let dir = unit2(&mut r);
        let w = dir / m.metric(&u).unwrap().norm(&dir);
        let x0 = m.chart_embed(&u).unwrap();
        let v0 = m.jacobian(&u).unwrap() * w;
        // Circles through the chart's poles are not representable.
        if x0.cross(&v0).normalize()[2].abs() < 0.3f64.sin() {
            continue;
        }
        n += 1;
        let circle = |t: f64| x0 * t.cos() + v0 * t.sin();
        for s in integrate_geodesic(&m, &u, &w, PI, None).unwrap() {
            pos = pos.max((m.chart_embed(&s.alpha).unwrap() - circle(s.t)).norm());
            speed = speed.max((m.metric(&s.alpha).unwrap().norm(&s.alpha_dot) - 1.0).abs());
        }
        let err = |k| {
            (m.chart_embed(&geodesic_endpoint(&m, &u, &w, 2.0, Some(k)).unwrap().alpha)
                .unwrap()
                - circle(2.0))
            .norm()
        };
        factors.push(err(16) / err(32));
    }
    let (lo, hi) = factors
        .iter()
        .fold((f64::MAX, f64::MIN), |(a, b), f| (a.min(*f), b.max(*f)));
    Outcome {
        pass: pos <= 1e-6 && speed <= 1e-6 && lo >= 8.0 && hi <= 32.0,
        detail: format!("endpoint error {pos:.1e}, speed drift {speed:.1e}, RK4 halving factor in [{lo:.1}, {hi:.1}]"),
    }
}

fn on_manifold() -> Outcome {
    let mut specs = families();
    specs.insert(0, ("Sphere", ManifoldSpec::unit_sphere()));
    let mut worst: f64 = 0.0;
    let (mut rejected, mut singular, mut accepted) = (0, 0, 0);
    for (i, (_, m)) in specs.iter().enumerate() {
        for strategy in [Strategy::Geodesic, Strategy::Brownian] {
            for (k, sigma2) in [1e-4, 1e-2, 0.25].into_iter().enumerate() {
                let cfg = NoiseConfig::new(strategy, sigma2);
                let starts = m.sample_local_uniform(10_000, 3 + i as u64).unwrap();
                let mut r = rng::stream(4 + i as u64, (strategy as u64) << 8 | k as u64);
                for u in &starts {
                    match perturb(m, u, &cfg, &mut r) {
                        Ok(s) => {
                            accepted += 1;
                            worst = worst.max(m.on_manifold_residual(s.local.as_ref(), &s.perturbed).unwrap());
                        }
                        Err(GeoError::Domain { .. }) => rejected += 1,
                        // Paths running into a polar chart singularity.
                        Err(e) if e.is_numerical() => singular += 1,
                        Err(e) => panic!("{e}"),
                    }
                }
            }
        }
    }
    Outcome {
        pass: worst <= 1e-7,
        detail: format!(
            "max residual {worst:.1e} over {accepted} samples ({rejected} left the chart box, {singular} hit a chart singularity)"
        ),
    }
}

fn brownian_moment() -> Outcome {
    let m = ManifoldSpec::unit_sphere();
    let total = 1e-3;
    let starts = interior_points(&m, 100, 5);
    let mut r = rng::seeded(6);
    let mut acc = 0.0;
    for u in &starts {
        for _ in 0..100 {
            let s = brownian_noise(&m, u, total, 100, &mut r).unwrap();
            acc += sphere_distance(&s.original, &s.perturbed).powi(2);
        }
    }
    let ratio = acc / 10_000.0 / (2.0 * total);
    Outcome {
        pass: (0.9..=1.1).contains(&ratio),
        detail: format!("E[d²]/(2T) = {ratio:.4} over 10⁴ paths"),
    }
}

fn pullback_covariance() -> Outcome {
    let sigma2: f64 = 0.5;
    let n = 100_000;
    let (mut worst, mut misses, mut checks) = (0.0f64, Vec::new(), 0);
    for (name, m) in families() {
        for (i, u) in interior_points(&m, 10, 7).iter().enumerate() {
            let p = m.projection_matrix(u).unwrap();
            let x = m.chart_embed(u).unwrap();
            let ginv = m.metric(u).unwrap().inverse().unwrap();
            let mut r = rng::stream(8, i as u64);
            let ws: Vec<_> = (0..n)
                .map(|_| {
                    let v = p * gaussian3(sigma2.sqrt(), &mut r);
                    pullback_velocity(&m, u, &TangentVector { base: x, v }).unwrap()
                })
                .collect();
            for (a, b) in [(0, 0), (0, 1), (1, 1)] {
                let prods: Vec<f64> = ws.iter().map(|w| w[a] * w[b]).collect();
                let (mean, se) = mean_and_sem(&prods);
                let z = (mean - sigma2 * ginv[(a, b)]) / se;
                worst = worst.max(z.abs());
                checks += 1;
                if z.abs() > 3.0 {
                    misses.push(format!("{name} point {i} ({a},{b}) z={z:.2}"));
                }
            }
        }
    }
    Outcome {
        pass: misses.is_empty(),
        detail: format!(
            "{checks} entries, max |z| {worst:.2}{}",
            if misses.is_empty() {
                String::new()
            } else {
                format!("; misses: {}", misses.join(", "))
            }
        ),
    }
}

fn regulariser() -> Outcome {
    let e = Preset::SwissRoll.experiment();
    let data = generate_dataset(&e.manifold, e.target, 20, 1, 0).unwrap();
    let tc = TrainConfig {
        epochs: 5000,
        ..TrainConfig::default()
    };
    let (model, run) = train_model(&data, &ModelConfig::default(), &tc, 0).unwrap();
    let pts: Vec<_> = data.train.iter().map(|&i| data.inputs_local[i]).collect();
    let ys: Vec<_> = data.train.iter().map(|&i| data.targets[i]).collect();
    let mut pass = true;
    let mut parts = vec![format!("train MSE {:.1e}", run.train_mse)];
    for sigma2 in [1e-4, 1e-3] {
        let r = mc_regularizer_check(&model, &e.manifold, &pts, &ys, sigma2, 10_000, 9).unwrap();
        pass &= r.ok();
        parts.push(format!(
            "σ²={sigma2:e}: ambient z={:.2}, tangential z={:.2}, gradient rel err {:.1e}",
            r.ambient.z, r.tangent.z, r.gradient_rel_err
        ));
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn deformation() -> Outcome {
    let base = ManifoldSpec::spheroid(1.0, 0.5).unwrap();
    let zero = ManifoldSpec::deformed(base.clone(), FlowField::zero(), 1.0, 64).unwrap();
    let mut identity = true;
    for u in base.sample_local_uniform(50, 10).unwrap() {
        identity &= zero.chart_embed(&u).unwrap() == base.chart_embed(&u).unwrap()
            && zero.metric(&u).unwrap() == base.metric(&u).unwrap()
            && zero.christoffel(&u).unwrap() == base.christoffel(&u).unwrap();
        let w = ParamVelocity::new(0.05, 0.1);
        identity &= integrate_geodesic(&zero, &u, &w, 1.0, Some(20)).unwrap()
            == integrate_geodesic(&base, &u, &w, 1.0, Some(20)).unwrap();
    }

    let a = Matrix3::new(0.1, -0.4, 0.0, 0.4, 0.1, 0.2, 0.0, -0.2, -0.3);
    let x = Vector3::new(0.3, -0.7, 1.1);
    let j0 = Matrix3x2::new(1.0, 0.0, 0.5, 1.0, 0.0, -2.0);
    let oracle = expm(&(a * 1.5));
    let errs: Vec<(f64, f64)> = [64, 128, 256]
        .iter()
        .map(|&n| {
            let c = DeformedChart::new(base.clone(), FlowField::linear(a), 1.5, n).unwrap();
            let (p, j) = c.flow_with_jacobian(&x, &j0).unwrap();
            ((p - oracle * x).norm(), (j - oracle * j0).abs().max())
        })
        .collect();
    let ratios: Vec<f64> = errs
        .windows(2)
        .flat_map(|w| [w[0].0 / w[1].0, w[0].1 / w[1].1])
        .collect();
    let first_order = ratios.iter().all(|r| (1.8..=2.2).contains(r));

    let chart = DeformedChart::new(ManifoldSpec::unit_sphere(), FlowField::default_bumps(), 1.0, 256).unwrap();
    let sphere = ManifoldSpec::unit_sphere();
    let round_trip = sphere
        .sample_local_uniform(500, 11)
        .unwrap()
        .iter()
        .map(|u| {
            let x = sphere.chart_embed(u).unwrap();
            (chart.flow_invert(&chart.flow_integrate(&x).unwrap()).unwrap() - x).norm()
        })
        .fold(0.0, f64::max);
    Outcome {
        pass: identity && first_order && round_trip <= 1e-3,
        detail: format!(
            "zero field identical: {identity}; error halving ratios {:?}; round trip {round_trip:.1e} at 256 steps",
            ratios.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>()
        ),
    }
}

fn main() {
    let mut ok = true;
    ok &= report("1", "geometry oracles", Some(Duration::from_secs(60)), geometry_oracles);
    ok &= report("2", "great circles", Some(Duration::from_secs(10)), great_circles);
    ok &= report("3", "on-manifold samples", None, on_manifold);
    ok &= report(
        "4",
        "Brownian small-time moment",
        Some(Duration::from_secs(30)),
        brownian_moment,
    );
    ok &= report("5", "pullback covariance", None, pullback_covariance);
    ok &= report(
        "6",
        "regulariser equivalence",
        Some(Duration::from_secs(120)),
        regulariser,
    );
    ok &= report("7", "deformation", None, deformation);

    let grid = GridConfig::default();
    let t0 = Instant::now();
    let experiments: Vec<_> = [Preset::SwissRoll, Preset::Sphere, Preset::Bead]
        .iter()
        .map(|p| p.experiment())
        .collect();
    let table = run_table(&experiments, &grid).expect("table runs");
    let table_time = t0.elapsed();

    // Ungated row at reduced cost: finite-difference geometry of the
    // deformed chart dominates the runtime.
    let deformed_cfg = GridConfig {
        sigma2_grid: vec![1e-3, 1e-2, 1e-1],
        seeds: vec![0, 1],
        noise: NoiseConfig {
            geodesic_steps: Some(10),
            bm_steps: 20,
            ..NoiseConfig::default()
        },
        ..GridConfig::default()
    };
    let deformed = run_table(&[Preset::DeformedSphere.experiment()], &deformed_cfg).expect("deformed row runs");
    eprintln!("{}", table.render_csv());
    eprintln!("{}", deformed.render_csv());

    ok &= report("8", "training table ordering", None, || {
        let rel = |m: &str, s| table.best(m, s).unwrap().relative_mse;
        let (g, bm, t, a) = (
            rel("SwissRoll", Strategy::Geodesic),
            rel("SwissRoll", Strategy::Brownian),
            rel("SwissRoll", Strategy::Tangent),
            rel("SwissRoll", Strategy::Ambient),
        );
        let roll = g < 0.8 && bm < 0.8 && g.max(bm) < t && t < a.min(1.0);
        let mut worst = 0.0f64;
        for m in ["Sphere", "Bead"] {
            for s in Strategy::ALL {
                worst = worst.max(rel(m, s));
            }
        }
        Outcome {
            pass: roll && worst <= 1.15 && table_time <= Duration::from_secs(1800),
            detail: format!(
                "SwissRoll G {g:.2}, BM {bm:.2}, T {t:.2}, A {a:.2}; worst Sphere/Bead {worst:.2}; table took {table_time:.0?}"
            ),
        }
    });

    ok &= report("9", "robustness to σ²", None, || {
        let roll: Vec<_> = table
            .records
            .iter()
            .filter(|r| r.manifold == "SwissRoll")
            .cloned()
            .collect();
        let results = summarize(&roll).unwrap();
        let worst = |s: Strategy| {
            results
                .iter()
                .filter(|r| r.strategy == s)
                .map(|r| r.mean_mse)
                .fold(0.0, f64::max)
        };
        let (wa, wg, wb) = (
            worst(Strategy::Ambient),
            worst(Strategy::Geodesic),
            worst(Strategy::Brownian),
        );
        let smallest = grid.sigma2_grid[0];
        let at = |s: Strategy| {
            results
                .iter()
                .find(|r| r.strategy == s && r.sigma2 == smallest)
                .unwrap()
        };
        let base = at(Strategy::None);
        let mut close = true;
        let mut zs = Vec::new();
        for s in [
            Strategy::Ambient,
            Strategy::Tangent,
            Strategy::Geodesic,
            Strategy::Brownian,
        ] {
            let r = at(s);
            let z = (r.mean_mse - base.mean_mse) / (r.sem.powi(2) + base.sem.powi(2)).sqrt();
            close &= z.abs() <= 2.0;
            zs.push(format!("{} {z:.2}", s.tag()));
        }
        Outcome {
            pass: wg < wa && wb < wa && close,
            detail: format!(
                "worst-case MSE A {wa:.4}, G {wg:.4}, BM {wb:.4}; smallest-σ² z vs baseline: {}",
                zs.join(", ")
            ),
        }
    });

    if !ok {
        std::io::stderr()
            .write_all(b"acceptance: some criteria failed\n")
            .unwrap();
        std::process::exit(1);
    }
    std::io::stderr()
        .write_all(b"acceptance: all criteria passed\n")
        .unwrap();
}
