use gspline::layers::{ArchitectureConfig, FeatureMap, LossKind, Network, ParamClass, ParamKey};
use gspline::learning::checkpoint::{decode_checkpoint, encode_checkpoint};
use gspline::learning::*;
use gspline::verification::{gradcheck, GradcheckOptions};
use gspline::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_map(rng: &mut ChaCha8Rng, c: usize, shape: &[usize]) -> FeatureMap {
    let n = c * shape.iter().product::<usize>();
    FeatureMap::from_planar(c, shape, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

fn cfg(text: &str) -> ArchitectureConfig {
    ArchitectureConfig::from_json(text).unwrap()
}

const LINEAR: &str = r#"[{"type":"lift","group":"so2","n_h":4,"out_channels":2,"kernel_size":3,"padding":"zero"},
                         {"type":"gconv","out_channels":1,"kernel_size":3,"padding":"zero"},
                         {"type":"project","mode":"integral"}]"#;

#[test]
fn linear_network_adjoint_matches_matrix_transpose() {
    let net = Network::new(&cfg(LINEAR), 1).unwrap();
    let n = 16;
    // explicit matrix of the linear map on 4x4 inputs
    let mut cols = Vec::with_capacity(n);
    for i in 0..n {
        let mut e = FeatureMap::zeros(1, &[4, 4]);
        e.data[i] = 1.0;
        cols.push(net.forward(&[e]).unwrap().remove(0).data);
    }
    let m = cols[0].len();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let x = random_map(&mut rng, 1, &[4, 4]);
    let cache = net.forward_logits(&[x.clone()]).unwrap();
    let y = cache.outputs[0].clone();
    for r in 0..m {
        let ax: f64 = (0..n).map(|i| cols[i][r] * x.data[i]).sum();
        assert!((ax - y.data[r]).abs() < 1e-12);
    }
    let (_, din) = backward(&net, &cache, &[y.clone()]).unwrap();
    for i in 0..n {
        let aty: f64 = (0..m).map(|r| cols[i][r] * y.data[r]).sum();
        assert!((aty - din[0].data[i]).abs() < 1e-12);
    }
}

#[test]
fn zero_output_gradient_gives_zero_gradients() {
    let net = Network::new(&ArchitectureConfig::preset("pcam_desk").unwrap(), 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let batch: Vec<_> = (0..2).map(|_| random_map(&mut rng, 1, &[24, 24])).collect();
    let cache = net.forward_logits(&batch).unwrap();
    let zeros: Vec<_> = cache.outputs.iter().map(|o| o.zeros_like()).collect();
    let (g, din) = backward(&net, &cache, &zeros).unwrap();
    assert_eq!(g.max_abs(), 0.0);
    assert!(din.iter().all(|d| d.data.iter().all(|&v| v == 0.0)));
}

#[test]
fn doubling_output_gradient_doubles_coefficient_gradient() {
    let net = Network::new(&ArchitectureConfig::preset("pcam_desk").unwrap(), 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let batch: Vec<_> = (0..2).map(|_| random_map(&mut rng, 1, &[24, 24])).collect();
    let cache = net.forward_logits(&batch).unwrap();
    let d1: Vec<_> = cache.outputs.iter().map(|o| FeatureMap { data: o.data.iter().map(|_| rng.random_range(-1.0..1.0)).collect(), ..o.clone() }).collect();
    let d2: Vec<_> = d1.iter().map(|d| FeatureMap { data: d.data.iter().map(|v| 2.0 * v).collect(), ..d.clone() }).collect();
    let (g1, _) = backward(&net, &cache, &d1).unwrap();
    let (g2, _) = backward(&net, &cache, &d2).unwrap();
    for ((k, a), (_, b)) in g1.entries.iter().zip(&g2.entries) {
        if k.class == ParamClass::Coefficients {
            for (x, y) in a.iter().zip(b) {
                assert_eq!(2.0 * x, *y);
            }
        }
    }
}

#[test]
fn cache_mismatch_is_reported() {
    let net = Network::new(&cfg(LINEAR), 1).unwrap();
    let other = Network::new(&cfg(r#"[{"type":"relu"}]"#), 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x = random_map(&mut rng, 1, &[4, 4]);
    let cache = net.forward_logits(&[x.clone()]).unwrap();
    let d = cache.outputs.clone();
    assert!(matches!(backward(&other, &cache, &d), Err(Error::CacheMismatch(_))));
    assert!(matches!(backward(&net, &cache, &[]), Err(Error::CacheMismatch(_))));
    let wrong = vec![FeatureMap::zeros(1, &[3, 3])];
    assert!(matches!(backward(&net, &cache, &wrong), Err(Error::CacheMismatch(_))));
}

#[test]
fn every_layer_type_passes_gradcheck() {
    let configs = [
        r#"{"input_shape":[10,10],"layers":[
            {"type":"lift","group":"so2","n_h":8,"out_channels":3,"kernel_size":3,"degree":3},
            {"type":"bias"},{"type":"relu"},
            {"type":"gconv","out_channels":2,"kernel_size":3,"layout":{"kind":"atrous","n_k":3,"stride":2},"degree":3},
            {"type":"norm"},
            {"type":"project","mode":"mean"},
            {"type":"upsample","factor":2},
            {"type":"conv2d","out_channels":2,"kernel_size":3,"degree":3},
            {"type":"conv1x1","out_channels":3},
            {"type":"softmax"}]}"#,
        r#"{"input_shape":[9,9],"input_channels":2,"layers":[
            {"type":"lift","group":"scale","n_h":3,"out_channels":2,"kernel_size":3,"padding":"zero","degree":3},
            {"type":"gconv","out_channels":2,"kernel_size":3,"layout":{"kind":"localized","n_k":2},"padding":"zero","degree":3},
            {"type":"project","mode":"integral"},
            {"type":"maxpool","size":2},
            {"type":"sigmoid"}]}"#,
    ];
    for (i, c) in configs.iter().enumerate() {
        let opts = GradcheckOptions { probes: 60, ..Default::default() };
        let r = gradcheck(&cfg(c), i as u64, &opts).unwrap();
        assert!(r.pass, "{}", r.to_json_line());
    }
}

#[test]
fn deformable_center_on_a_knot_has_finite_gradient() {
    let text = r#"[{"type":"lift","group":"so2","n_h":4,"out_channels":1,"kernel_size":3,"degree":1,"deformable":true},
                   {"type":"project","mode":"integral"}]"#;
    let mut net = Network::new(&cfg(text), 0).unwrap();
    // degree 1 knots sit on integer offsets; shift a center so samples land on them
    let key = ParamKey { layer: 0, class: ParamClass::SpatialCenters };
    let mut centers = net.parameters().into_iter().find(|(k, _)| *k == key).unwrap().1;
    centers[0] += 1.0;
    net.set_parameter(key, &centers).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let x = random_map(&mut rng, 1, &[5, 5]);
    let cache = net.forward_logits(&[x]).unwrap();
    let d = cache.outputs.clone();
    let (g, _) = backward(&net, &cache, &d).unwrap();
    assert!(g.get(key).unwrap().iter().all(|v| v.is_finite()));
}

const TINY: &str = r#"{"input_shape":[8,8],"layers":[
    {"type":"lift","group":"so2","n_h":4,"out_channels":3,"kernel_size":3},
    {"type":"relu"},
    {"type":"project","mode":"max"},
    {"type":"maxpool","size":2},
    {"type":"conv1x1","out_channels":2},
    {"type":"softmax"}]}"#;

#[test]
fn zero_learning_rate_keeps_parameters() {
    let mut net = Network::new(&cfg(TINY), 0).unwrap();
    let data = make_synthetic_dataset(TaskId::RotPatterns, 4, 2, 0).unwrap();
    let mut split = data.train.clone();
    split.inputs = split.inputs.iter().map(|f| crop(f, 8)).collect();
    let before = net.parameters();
    sgd_train(&mut net, &split, LossKind::SoftmaxCe, TrainOptions { lr: 0.0, epochs: 2, batch: 2, seed: 0 }).unwrap();
    assert_eq!(before, net.parameters());
}

fn crop(f: &FeatureMap, n: usize) -> FeatureMap {
    let w = f.spatial_shape[1];
    let o = (w - n) / 2;
    let data = (0..n * n).map(|i| f.data[(o + i / n) * w + o + i % n]).collect();
    FeatureMap::from_planar(1, &[n, n], data).unwrap()
}

#[test]
fn memorizes_a_single_sample() {
    let mut net = Network::new(&cfg(TINY), 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let split = Split { inputs: vec![random_map(&mut rng, 1, &[8, 8])], targets: vec![Target::Class(1)], info: vec![] };
    let curve = sgd_train(&mut net, &split, LossKind::SoftmaxCe, TrainOptions { lr: 0.1, epochs: 200, batch: 1, seed: 0 }).unwrap();
    let final_loss = evaluate_loss(&net, &split, LossKind::SoftmaxCe, 1).unwrap();
    assert!(final_loss < 0.01, "{final_loss} {:?}", &curve[..5]);
}

#[test]
fn training_is_deterministic_and_does_not_increase_loss() {
    let data = make_synthetic_dataset(TaskId::RotPatterns, 16, 2, 1).unwrap();
    let mut split = data.train.clone();
    split.inputs = split.inputs.iter().map(|f| crop(f, 8)).collect();
    let run = || {
        let mut net = Network::new(&cfg(TINY), 2).unwrap();
        let initial = evaluate_loss(&net, &split, LossKind::SoftmaxCe, 16).unwrap();
        sgd_train(&mut net, &split, LossKind::SoftmaxCe, TrainOptions { lr: 0.02, epochs: 3, batch: 4, seed: 5 }).unwrap();
        (initial, evaluate_loss(&net, &split, LossKind::SoftmaxCe, 16).unwrap(), net.parameters())
    };
    let (i1, f1, p1) = run();
    let (_, f2, p2) = run();
    assert_eq!(p1, p2);
    assert_eq!(f1, f2);
    assert!(f1 <= i1, "{f1} > {i1}");
}

#[test]
fn divergence_is_detected() {
    let mut net = Network::new(&cfg(TINY), 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let split = Split { inputs: vec![random_map(&mut rng, 1, &[8, 8])], targets: vec![Target::Class(0)], info: vec![] };
    let r = sgd_train(&mut net, &split, LossKind::SoftmaxCe, TrainOptions { lr: 1e300, epochs: 20, batch: 1, seed: 0 });
    assert!(matches!(r, Err(Error::DivergenceDetected { .. })), "{r:?}");
}

#[test]
fn checkpoint_round_trip() {
    let mut net = Network::new(&ArchitectureConfig::preset("celeba_desk").unwrap(), 9).unwrap();
    net.make_deformable();
    let bytes = encode_checkpoint(&net);
    let back = decode_checkpoint(&bytes).unwrap();
    assert_eq!(back.parameters(), net.parameters());
    assert_eq!(encode_checkpoint(&back), bytes);
    assert!(matches!(decode_checkpoint(b"nope"), Err(Error::BadMagic)));
}

/// Logistic regression on raw pixels, trained on one split and scored on a
/// fresh sample of the training distribution.
#[test]
fn rot_patterns_classes_are_linearly_distinguishable() {
    let a = make_synthetic_dataset(TaskId::RotPatterns, 400, 1, 11).unwrap().train;
    let b = make_synthetic_dataset(TaskId::RotPatterns, 200, 1, 12).unwrap().train;
    let dim = a.inputs[0].data.len();
    let mut w = vec![0.0; dim + 1];
    let label = |t: &Target| if *t == Target::Class(1) { 1.0 } else { 0.0 };
    for _ in 0..200 {
        let mut g = vec![0.0; dim + 1];
        for (x, t) in a.inputs.iter().zip(&a.targets) {
            let z: f64 = w[dim] + x.data.iter().zip(&w).map(|(p, q)| p * q).sum::<f64>();
            let e = 1.0 / (1.0 + (-z).exp()) - label(t);
            g.iter_mut().zip(&x.data).for_each(|(gi, xi)| *gi += e * xi);
            g[dim] += e;
        }
        w.iter_mut().zip(&g).for_each(|(wi, gi)| *wi -= 0.05 * gi / a.len() as f64);
    }
    let hits = b
        .inputs
        .iter()
        .zip(&b.targets)
        .filter(|(x, t)| {
            let z: f64 = w[dim] + x.data.iter().zip(&w).map(|(p, q)| p * q).sum::<f64>();
            (z > 0.0) == (label(t) == 1.0)
        })
        .count();
    assert!(hits as f64 / b.len() as f64 > 0.6, "{hits}");
}
