//! Every layer's backward pass against central finite differences.

#![allow(clippy::needless_range_loop)]

use freqgan_nn::{LayerSpec, Network, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STEP: f64 = 1e-5;
const TOL: f64 = 1e-5;

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt();
    let scale = a
        .iter()
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
        .max(b.iter().map(|x| x * x).sum::<f64>().sqrt());
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

fn random_tensor(shape: Vec<usize>, rng: &mut ChaCha8Rng) -> Tensor {
    let n = shape.iter().product();
    Tensor::new(shape, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

/// Checks d<c, f(x)>/d(params) and d/dx against central differences.
fn check(net: &mut Network, input: &Tensor, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (out, tape) = net.forward(input).unwrap();
    let probe = random_tensor(out.shape().to_vec(), &mut rng);
    let objective = |net: &Network, x: &Tensor| -> f64 {
        let y = net.predict(x).unwrap();
        y.data().iter().zip(probe.data()).map(|(a, b)| a * b).sum()
    };

    net.zero_grad();
    let gx = net.backward(&tape, &probe).unwrap();
    let analytic_params = net.flat_gradients();

    let base = net.flat_parameters();
    let mut numeric_params = Vec::with_capacity(base.len());
    for k in 0..base.len() {
        let mut p = base.clone();
        p[k] = base[k] + STEP;
        net.set_flat_parameters(&p).unwrap();
        let fp = objective(net, input);
        p[k] = base[k] - STEP;
        net.set_flat_parameters(&p).unwrap();
        let fm = objective(net, input);
        numeric_params.push((fp - fm) / (2.0 * STEP));
    }
    net.set_flat_parameters(&base).unwrap();

    let mut numeric_input = Vec::with_capacity(input.len());
    for k in 0..input.len() {
        let mut x = input.clone();
        x.data_mut()[k] += STEP;
        let fp = objective(net, &x);
        x.data_mut()[k] -= 2.0 * STEP;
        let fm = objective(net, &x);
        numeric_input.push((fp - fm) / (2.0 * STEP));
    }

    let e_in = rel_err(gx.data(), &numeric_input);
    assert!(
        e_in < TOL,
        "input grad rel err {e_in} for {:?}",
        net.specs()
    );
    if !base.is_empty() {
        let e_p = rel_err(&analytic_params, &numeric_params);
        assert!(e_p < TOL, "param grad rel err {e_p} for {:?}", net.specs());
    }

    let gx_only = net.input_gradient(&tape, &probe).unwrap();
    assert_eq!(gx_only, gx);
}

fn net(input: &[usize], specs: &[LayerSpec], seed: u64) -> Network {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut n = Network::new(input, specs, &mut rng).unwrap();
    // random non-zero biases so bias paths are exercised
    let mut p = n.flat_parameters();
    for v in p.iter_mut() {
        *v += rng.random_range(-0.1..0.1);
    }
    n.set_flat_parameters(&p).unwrap();
    n
}

#[test]
fn each_layer_individually() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let cases: Vec<(Vec<usize>, LayerSpec)> = vec![
        (
            vec![5],
            LayerSpec::Dense {
                inputs: 5,
                outputs: 3,
            },
        ),
        (
            vec![2, 3, 4],
            LayerSpec::Dense {
                inputs: 24,
                outputs: 2,
            },
        ),
        (
            vec![2, 5, 4],
            LayerSpec::Conv3x3 {
                in_channels: 2,
                out_channels: 3,
            },
        ),
        (
            vec![4, 8, 8],
            LayerSpec::Conv3x3 {
                in_channels: 4,
                out_channels: 2,
            },
        ),
        (
            vec![1, 1, 1],
            LayerSpec::Conv3x3 {
                in_channels: 1,
                out_channels: 2,
            },
        ),
        (
            vec![12],
            LayerSpec::Reshape {
                channels: 3,
                height: 2,
                width: 2,
            },
        ),
        (vec![2, 3, 4], LayerSpec::UpsampleNearest2x),
        (vec![3, 4, 6], LayerSpec::AvgPool2x),
        (vec![2, 4, 4], LayerSpec::LeakyRelu(0.2)),
        (vec![2, 4, 4], LayerSpec::Relu),
        (vec![2, 4, 4], LayerSpec::Tanh),
        (vec![2, 4, 4], LayerSpec::Sigmoid),
    ];
    for (k, (shape, spec)) in cases.into_iter().enumerate() {
        let mut n = net(&shape, &[spec], k as u64);
        let mut full = vec![2];
        full.extend(&shape);
        let x = random_tensor(full, &mut rng);
        check(&mut n, &x, 100 + k as u64);
    }
}

#[test]
fn three_layer_networks_on_6x6() {
    let stacks: Vec<Vec<LayerSpec>> = vec![
        vec![
            LayerSpec::Conv3x3 {
                in_channels: 2,
                out_channels: 3,
            },
            LayerSpec::LeakyRelu(0.2),
            LayerSpec::Dense {
                inputs: 108,
                outputs: 2,
            },
        ],
        vec![
            LayerSpec::AvgPool2x,
            LayerSpec::Conv3x3 {
                in_channels: 2,
                out_channels: 4,
            },
            LayerSpec::Tanh,
        ],
        vec![
            LayerSpec::Conv3x3 {
                in_channels: 2,
                out_channels: 2,
            },
            LayerSpec::UpsampleNearest2x,
            LayerSpec::Sigmoid,
        ],
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for (k, specs) in stacks.iter().enumerate() {
        let mut n = net(&[2, 6, 6], specs, 50 + k as u64);
        let x = random_tensor(vec![3, 2, 6, 6], &mut rng);
        check(&mut n, &x, 200 + k as u64);
    }
}

#[test]
fn random_shapes_up_to_8x8x4() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for trial in 0..12 {
        let c = rng.random_range(1..=4);
        let h = 2 * rng.random_range(1..=4);
        let w = 2 * rng.random_range(1..=4);
        let oc = rng.random_range(1..=4);
        let specs = vec![
            LayerSpec::Conv3x3 {
                in_channels: c,
                out_channels: oc,
            },
            LayerSpec::LeakyRelu(0.1),
            LayerSpec::AvgPool2x,
            LayerSpec::Dense {
                inputs: oc * h * w / 4,
                outputs: 1,
            },
        ];
        let mut n = net(&[c, h, w], &specs, trial);
        let x = random_tensor(vec![2, c, h, w], &mut rng);
        check(&mut n, &x, 300 + trial);
    }
}

#[test]
fn generator_and_discriminator_templates() {
    let g_specs = vec![
        LayerSpec::Dense {
            inputs: 4,
            outputs: 2 * 2 * 2,
        },
        LayerSpec::Reshape {
            channels: 2,
            height: 2,
            width: 2,
        },
        LayerSpec::UpsampleNearest2x,
        LayerSpec::Conv3x3 {
            in_channels: 2,
            out_channels: 2,
        },
        LayerSpec::LeakyRelu(0.2),
        LayerSpec::Conv3x3 {
            in_channels: 2,
            out_channels: 1,
        },
        LayerSpec::Tanh,
    ];
    let mut g = net(&[4], &g_specs, 5);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    check(&mut g, &random_tensor(vec![2, 4], &mut rng), 7);
}

#[test]
fn spectral_norm_backward_with_frozen_vectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let specs = vec![
        LayerSpec::Conv3x3 {
            in_channels: 1,
            out_channels: 3,
        },
        LayerSpec::LeakyRelu(0.2),
        LayerSpec::Dense {
            inputs: 48,
            outputs: 1,
        },
    ];
    let mut n = net(&[1, 4, 4], &specs, 11).with_spectral_norm(&mut rng);
    n.power_iterate(2);
    let x = random_tensor(vec![2, 1, 4, 4], &mut rng);
    check(&mut n, &x, 12);
}

/// Dense(3->3) -> LeakyReLU -> Dense(3->3), gradients written out by hand.
#[test]
fn composition_matches_hand_chain_rule() {
    let slope = 0.2;
    let mut n = net(
        &[3],
        &[
            LayerSpec::Dense {
                inputs: 3,
                outputs: 3,
            },
            LayerSpec::LeakyRelu(slope),
            LayerSpec::Dense {
                inputs: 3,
                outputs: 3,
            },
        ],
        21,
    );
    let p = n.flat_parameters();
    let (w1, rest) = p.split_at(9);
    let (b1, rest) = rest.split_at(3);
    let (w2, b2) = rest.split_at(9);
    let x = [0.7, -1.1, 0.4];
    let up = [0.3, -0.8, 1.5];

    let a: Vec<f64> = (0..3)
        .map(|o| b1[o] + (0..3).map(|i| w1[o * 3 + i] * x[i]).sum::<f64>())
        .collect();
    let hgate: Vec<f64> = a
        .iter()
        .map(|&v| if v > 0.0 { 1.0 } else { slope })
        .collect();
    let hval: Vec<f64> = a.iter().zip(&hgate).map(|(v, g)| v * g).collect();
    let _ = b2;
    // dL/dh = W2^T up; dL/da = gate * dL/dh
    let dh: Vec<f64> = (0..3)
        .map(|i| (0..3).map(|o| w2[o * 3 + i] * up[o]).sum())
        .collect();
    let da: Vec<f64> = dh.iter().zip(&hgate).map(|(d, g)| d * g).collect();
    let mut expected = Vec::new();
    for o in 0..3 {
        for i in 0..3 {
            expected.push(da[o] * x[i]);
        }
    }
    expected.extend(&da);
    for o in 0..3 {
        for i in 0..3 {
            expected.push(up[o] * hval[i]);
        }
    }
    expected.extend(&up);
    let dx: Vec<f64> = (0..3)
        .map(|i| (0..3).map(|o| w1[o * 3 + i] * da[o]).sum())
        .collect();

    let input = Tensor::new(vec![1, 3], x.to_vec()).unwrap();
    let (_, tape) = n.forward(&input).unwrap();
    n.zero_grad();
    let gx = n
        .backward(&tape, &Tensor::new(vec![1, 3], up.to_vec()).unwrap())
        .unwrap();
    for (a, b) in n.flat_gradients().iter().zip(&expected) {
        assert!((a - b).abs() < 1e-14);
    }
    for (a, b) in gx.data().iter().zip(&dx) {
        assert!((a - b).abs() < 1e-14);
    }
}

#[test]
fn forward_is_deterministic() {
    let specs = vec![
        LayerSpec::Conv3x3 {
            in_channels: 1,
            out_channels: 2,
        },
        LayerSpec::Tanh,
    ];
    let n = net(&[1, 5, 5], &specs, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let x = random_tensor(vec![2, 1, 5, 5], &mut rng);
    let a = n.predict(&x).unwrap();
    let b = n.forward(&x).unwrap().0;
    assert_eq!(a, b);
}
