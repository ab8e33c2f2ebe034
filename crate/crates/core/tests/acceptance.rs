//! Acceptance run: one PASS/FAIL line per criterion with its measured error
//! and wall time against the budget. Failures exit nonzero only when
//! `ACCEPTANCE_STRICT` is set.

mod common;

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::time::{Duration, Instant};

use common::{convolved_box, max_abs_diff, naive_group, naive_lift};
use gspline::layers::*;
use gspline::learning::*;
use gspline::lie_groups::{so3, GroupElement, GroupKind};
use gspline::splines::cardinal::b1;
use gspline::splines::{build_h_grid, build_spatial_centers, GroupGrid, HLayout, SplineKernel};
use gspline::verification::{self, suite, VerificationReport};
use gspline::Result;
use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEEDS: [u64; 3] = [0, 1, 2];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn from_reports(reports: &[VerificationReport]) -> Outcome {
    let worst = reports.iter().max_by(|a, b| (a.error() / a.tolerance.max(1e-300)).total_cmp(&(b.error() / b.tolerance.max(1e-300))));
    let pass = reports.iter().all(|r| r.pass);
    match worst {
        Some(w) => outcome(pass, format!("{} checks, worst {} error {:.3e} (tol {:.1e})", reports.len(), w.check_id, w.error(), w.tolerance)),
        None => outcome(false, "no checks ran"),
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn c1_group_axioms() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let dist = |a: &GroupElement, b: &GroupElement| -> f64 {
        match (a, b) {
            (GroupElement::So3(m), GroupElement::So3(n)) => (m - n).amax(),
            (GroupElement::ScalePos(s), GroupElement::ScalePos(t)) => (s - t).abs() / s.max(*t),
            _ => a.distance(b).unwrap(),
        }
    };
    for kind in [GroupKind::So2, GroupKind::ScalePos, GroupKind::So3] {
        let d = kind.action_dim().unwrap_or(2);
        let draw = |rng: &mut ChaCha8Rng| -> GroupElement {
            match kind {
                GroupKind::So2 => GroupElement::so2(rng.random_range(-PI..PI)),
                GroupKind::ScalePos => GroupElement::ScalePos(rng.random_range(-3.0f64..3.0).exp()),
                _ => {
                    let v = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                    let axis = v.normalize();
                    GroupElement::So3(so3::exp(&(axis * rng.random_range(0.0..PI - 1e-3))))
                }
            }
        };
        for _ in 0..1000 {
            let (a, b, c) = (draw(&mut rng), draw(&mut rng), draw(&mut rng));
            let left = a.product(&b)?.product(&c)?;
            let right = a.product(&b.product(&c)?)?;
            worst = worst.max(dist(&left, &right));
            worst = worst.max(dist(&a.product(&a.inverse()?)?, &kind.identity()));
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
            worst = worst.max(diff(&a.product(&b)?.act_on_rd(&x)?, &a.act_on_rd(&b.act_on_rd(&x)?)?));
            worst = worst.max(dist(&a.log()?.exp(), &a));
        }
    }
    Ok(outcome(worst <= 1e-9, format!("max error {worst:.2e} over 3x1000 elements (tol 1e-9)")))
}

fn c2_partition_of_unity() -> Result<Outcome> {
    let reports: Vec<_> = (1..=3)
        .map(|n| verification::partition_of_unity_deviation(verification::PouCase::So2 { n_centers: 8 }, n, TAU / 8.0, 1000, 0))
        .collect::<Result<_>>()?;
    let worst = reports.iter().map(|r| r.max_abs_error).fold(0.0, f64::max);
    Ok(outcome(worst < 1e-9, format!("max deviation {worst:.2e} for n=1..3 (tol 1e-9)")))
}

fn c3_cardinal_oracle() -> Result<Outcome> {
    let mut worst = 0.0f64;
    for n in 0..=3 {
        for i in 0..=100 {
            let x = -2.5 + 5.0 * i as f64 / 100.0;
            worst = worst.max((b1(n, x) - convolved_box(n, x)).abs());
        }
    }
    Ok(outcome(worst < 1e-6, format!("max |closed form - convolution| {worst:.2e} at 4x101 points (tol 1e-6)")))
}

fn c4_equivariance() -> Result<Outcome> {
    let mut reports = suite::exact_equivariance_checks(0)?;
    reports.extend(suite::convergence_checks(0)?);
    let o = from_reports(&reports);
    let scale = reports.iter().find(|r| r.check_id == "equivariance_convergence" && r.metadata["h"].as_str().is_some_and(|h| h.contains("ScalePos")));
    let detail = match scale {
        Some(r) => format!("{}; scale: fine error {:.2e}, ratio {:.3}", o.detail, r.max_abs_error, r.metadata["ratio"].as_f64().unwrap_or(f64::NAN)),
        None => o.detail,
    };
    Ok(outcome(o.pass, detail))
}

fn random_map(rng: &mut ChaCha8Rng, channels: usize, grid: Option<&GroupGrid>, shape: &[usize]) -> FeatureMap {
    let mut f = match grid {
        Some(g) => FeatureMap::zeros_lifted(channels, g, shape),
        None => FeatureMap::zeros(channels, shape),
    };
    f.data.iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0));
    f
}

fn c5_naive_oracles() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    let setups = [(GroupKind::So2, 4, FRAC_PI_2), (GroupKind::So2, 8, TAU / 8.0), (GroupKind::ScalePos, 4, 0.5 * 2f64.ln())];
    for i in 0..50 {
        let (kind, n_h, s) = setups[i % setups.len()];
        let layout = if i % 2 == 0 { HLayout::GlobalUniform } else { HLayout::Localized { n_k: 3 } };
        let (grid, centers) = build_h_grid(kind, n_h, s, layout)?;
        let k = if i % 5 == 0 { 5 } else { 3 };
        let degree = 1 + i % 3;
        let pad = if i % 4 < 2 { Padding::Valid } else { Padding::Zero };
        let (cin, cout) = (1 + i % 2, 1 + (i / 2) % 2);
        let n = 7 + i % 3;
        let sc = build_spatial_centers(k, 2, None)?;
        let mut lk = SplineKernel::new(degree, kind, 2, sc.clone(), None, 1.0, 1.0, cin, cout)?;
        lk.randomize(&mut rng, 1.0);
        let f = random_map(&mut rng, cin, None, &[n, n]);
        let stack = sample_transformed_kernels(&lk, &grid, &[k, k], StackMode::Lifting)?;
        worst = worst.max(max_abs_diff(&lift_correlate(&f, &stack, pad)?.data, &naive_lift(&lk, &grid, &f, k, pad)));
        let mut gk = SplineKernel::new(degree, kind, 2, sc, Some(centers), 1.0, grid.spacing, cin, cout)?;
        gk.randomize(&mut rng, 1.0);
        let lifted = random_map(&mut rng, cin, Some(&grid), &[n, n]);
        let stack = sample_transformed_kernels(&gk, &grid, &[k, k], StackMode::Group)?;
        worst = worst.max(max_abs_diff(&group_correlate(&lifted, &stack, pad)?.data, &naive_group(&gk, &grid, &lifted, k, pad)));
    }
    Ok(outcome(worst < 1e-10, format!("max difference {worst:.2e} over 50 lift + 50 group instances (tol 1e-10)")))
}

fn c6_gradcheck() -> Result<Outcome> {
    Ok(from_reports(&suite::gradcheck_checks(0)?))
}

fn c7_scale_space() -> Result<Outcome> {
    Ok(from_reports(&suite::scale_space_checks(10, 0)?))
}

fn c8_gauge() -> Result<Outcome> {
    Ok(from_reports(&suite::gauge_checks(0)?))
}

fn c9_sphere() -> Result<Outcome> {
    let (r, fits) = verification::sphere_reconstruction_error(verification::Texture::BandLimited, &[50, 500, 5000], &Default::default(), 0)?;
    let rms: Vec<String> = fits.iter().map(|f| format!("{:.2e}", f.rms)).collect();
    Ok(outcome(r.pass, format!("held-out RMS {} for N = 50, 500, 5000", rms.join(" > "))))
}

fn train_and_score(cfg: &str, task: TaskId, n_train: usize, n_test: usize, opts: TrainOptions, seed: u64) -> Result<f64> {
    let cfg = ArchitectureConfig::preset(cfg).expect("shipped preset");
    let data = make_synthetic_dataset(task, n_train, n_test, seed)?;
    let mut net = Network::new(&cfg, seed)?;
    sgd_train(&mut net, &data.train, cfg.loss_kind(), TrainOptions { seed, ..opts })?;
    match task {
        TaskId::RotPatterns => accuracy(&net, &data.test, 100),
        TaskId::ScaleBlobs => detection_rate(&net, &data.test, 3.0, 50),
    }
}

fn c10_rotation_task() -> Result<Outcome> {
    let run = |cfg: &str, epochs: usize| -> Result<Vec<f64>> {
        SEEDS.iter().map(|&s| train_and_score(cfg, TaskId::RotPatterns, 2000, 1000, TrainOptions { lr: 0.05, epochs, batch: 16, seed: s }, s)).collect()
    };
    let se2 = run("pcam_desk", 2)?;
    let planar = run("pcam_desk_planar", 3)?;
    let (m, b) = (median(se2.clone()), median(planar.clone()));
    Ok(outcome(m >= 0.9 && b <= 0.8, format!("median test accuracy SE(2) {m:.3} {se2:.3?}, planar {b:.3} {planar:.3?}")))
}

fn c11_scale_task() -> Result<Outcome> {
    let opts = TrainOptions { lr: 3.0, epochs: 20, batch: 8, seed: 0 };
    let run = |cfg: &str| -> Result<Vec<f64>> { SEEDS.iter().map(|&s| train_and_score(cfg, TaskId::ScaleBlobs, 500, 400, opts, s)).collect() };
    let scale = run("blobs_desk")?;
    let mut best = ("", 0.0, Vec::new());
    for cfg in ["blobs_desk_planar", "blobs_desk_planar_deep_narrow", "blobs_desk_planar_deep"] {
        let r = run(cfg)?;
        let m = median(r.clone());
        if m >= best.1 {
            best = (cfg, m, r);
        }
    }
    let m = median(scale.clone());
    Ok(outcome(m > best.1, format!("median detection scale net {m:.3} {scale:.3?}, best planar ({}) {:.3} {:.3?}", best.0, best.1, best.2)))
}

type Criterion = (u32, &'static str, u64, fn() -> Result<Outcome>);

fn main() {
    let criteria: [Criterion; 11] = [
        (1, "group axioms", 5, c1_group_axioms),
        (2, "partition of unity", 1, c2_partition_of_unity),
        (3, "cardinal B-spline oracle", 1, c3_cardinal_oracle),
        (4, "equivariance", 30, c4_equivariance),
        (5, "naive correlation oracles", 30, c5_naive_oracles),
        (6, "gradient checks", 60, c6_gradcheck),
        (7, "scale-space identity", 10, c7_scale_space),
        (8, "gauge identity", 5, c8_gauge),
        (9, "sphere reconstruction", 120, c9_sphere),
        (10, "rotation task", 600, c10_rotation_task),
        (11, "scale task", 600, c11_scale_task),
    ];
    let only: Vec<u32> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect())
        .unwrap_or_default();
    let mut failed = 0;
    for (id, name, budget, f) in criteria {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let t = Instant::now();
        let res = f();
        let took = t.elapsed();
        let (pass, detail) = match res {
            Ok(o) => (o.pass && took <= Duration::from_secs(budget), o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!("{} criterion {id:>2} ({name}): {detail}; {:.1}s of {budget}s", if pass { "PASS" } else { "FAIL" }, took.as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        if std::env::var_os("ACCEPTANCE_STRICT").is_some() {
            std::process::exit(1);
        }
    }
}
