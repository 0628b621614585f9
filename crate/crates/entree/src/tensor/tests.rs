use super::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn randn(rng: &mut ChaCha8Rng, shape: Vec<usize>) -> Tensor {
    let n: usize = shape.iter().product();
    let data = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Tensor::new(shape, data).unwrap()
}

#[test]
fn matmul_identity_leaves_operand_unchanged() {
    let mut tape = Tape::new();
    let eye = tape.leaf(Tensor::matrix(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]));
    let b = tape.leaf(Tensor::matrix(&[&[1.5, -2.0], &[0.25, 3.0], &[-1.0, 0.5]]));
    let c = tape.matmul(eye, b).unwrap();
    assert_eq!(tape.value(c).data(), tape.value(b).data());
}

#[test]
fn matmul_scalar_case() {
    let mut tape = Tape::new();
    let a = tape.leaf(Tensor::matrix(&[&[2.0]]));
    let b = tape.leaf(Tensor::matrix(&[&[3.0]]));
    let c = tape.matmul(a, b).unwrap();
    assert_eq!(tape.value(c).data(), &[6.0]);
}

#[test]
fn matmul_matches_triple_loop_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let a = randn(&mut rng, vec![4, 5]);
    let b = randn(&mut rng, vec![5, 3]);
    // independent triple-loop reference
    let mut expect = vec![0.0; 4 * 3];
    for i in 0..4 {
        for j in 0..3 {
            for t in 0..5 {
                expect[i * 3 + j] += a.data()[i * 5 + t] * b.data()[t * 3 + j];
            }
        }
    }
    let mut tape = Tape::new();
    let (ia, ib) = (tape.leaf(a), tape.leaf(b));
    let c = tape.matmul(ia, ib).unwrap();
    for (x, y) in tape.value(c).data().iter().zip(&expect) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn matmul_shape_mismatch_errors() {
    let mut tape = Tape::new();
    let a = tape.leaf(Tensor::zeros(vec![2, 3]));
    let b = tape.leaf(Tensor::zeros(vec![4, 2]));
    assert!(matches!(tape.matmul(a, b), Err(TensorError::Shape { .. })));
}

#[test]
fn softmax_uniform_on_zero_row() {
    let mut tape = Tape::new();
    let x = tape.leaf(Tensor::matrix(&[&[0.0, 0.0, 0.0, 0.0]]));
    let y = tape.softmax_rows(x).unwrap();
    for &v in tape.value(y).data() {
        assert!((v - 0.25).abs() < 1e-15);
    }
}

#[test]
fn softmax_shift_invariance_and_row_sums() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let x = randn(&mut rng, vec![3, 5]);
        let shifted = Tensor::new(
            vec![3, 5],
            x.data().iter().map(|v| v + 17.25).collect(),
        )
        .unwrap();
        let mut tape = Tape::new();
        let (ix, is) = (tape.leaf(x), tape.leaf(shifted));
        let y1 = tape.softmax_rows(ix).unwrap();
        let y2 = tape.softmax_rows(is).unwrap();
        for (a, b) in tape.value(y1).data().iter().zip(tape.value(y2).data()) {
            assert!((a - b).abs() < 1e-12);
        }
        for row in tape.value(y1).data().chunks(5) {
            let s: f64 = row.iter().sum();
            assert!((s - 1.0).abs() < 1e-6);
            assert!(row.iter().all(|&v| v >= 0.0));
        }
    }
}

#[test]
fn softmax_peaked_row_value() {
    let mut tape = Tape::new();
    let x = tape.leaf(Tensor::matrix(&[&[10.0, 0.0, 0.0]]));
    let y = tape.softmax_rows(x).unwrap();
    // direct exp-normalize evaluation
    let expect = (10.0f64).exp() / ((10.0f64).exp() + 2.0);
    assert!((tape.value(y).data()[0] - expect).abs() < 1e-12);
    assert!((expect - 0.99990).abs() < 1e-4);
}

#[test]
fn layer_norm_constant_row_is_zero() {
    let mut tape = Tape::new();
    let x = tape.leaf(Tensor::matrix(&[&[3.5, 3.5, 3.5, 3.5]]));
    let g = tape.leaf(Tensor::vector(vec![1.0; 4]));
    let b = tape.leaf(Tensor::vector(vec![0.0; 4]));
    let y = tape.layer_norm(x, g, b).unwrap();
    assert!(tape.value(y).data().iter().all(|&v| v == 0.0));
}

#[test]
fn layer_norm_centers_rows() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = randn(&mut rng, vec![4, 8]);
    let mut tape = Tape::new();
    let ix = tape.leaf(x);
    let g = tape.leaf(Tensor::vector(vec![1.0; 8]));
    let b = tape.leaf(Tensor::vector(vec![0.0; 8]));
    let y = tape.layer_norm(ix, g, b).unwrap();
    for row in tape.value(y).data().chunks(8) {
        let mean = row.iter().sum::<f64>() / 8.0;
        assert!(mean.abs() < 1e-6);
    }
}

#[test]
fn layer_norm_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let x = randn(&mut rng, vec![3, 6]);
    let g = randn(&mut rng, vec![6]);
    let b = randn(&mut rng, vec![6]);
    let err = grad_check(
        |tape, ids| {
            let y = tape.layer_norm(ids[0], ids[1], ids[2])?;
            tape.sum(y)
        },
        &[x, g, b],
        1e-5,
    )
    .unwrap();
    assert!(err < 1e-4, "layer_norm rel err {}", err);
}

#[test]
fn cosine_basic_values() {
    let mut tape = Tape::new();
    let u = tape.leaf(Tensor::vector(vec![0.3, -0.7, 2.0]));
    let c = tape.cosine_similarity(u, u).unwrap();
    assert!((tape.value(c).item() - 1.0).abs() < 1e-12);

    let a = tape.leaf(Tensor::vector(vec![1.0, 0.0]));
    let b = tape.leaf(Tensor::vector(vec![0.0, 2.0]));
    let c = tape.cosine_similarity(a, b).unwrap();
    assert_eq!(tape.value(c).item(), 0.0);

    let a = tape.leaf(Tensor::vector(vec![1.0, 0.0]));
    let b = tape.leaf(Tensor::vector(vec![1.0, 1.0]));
    let c = tape.cosine_similarity(a, b).unwrap();
    assert!((tape.value(c).item() - 1.0 / 2.0f64.sqrt()).abs() < 1e-12);
    assert!((tape.value(c).item() - 0.70711).abs() < 1e-5);
}

#[test]
fn cosine_zero_vector_is_zero_with_zero_gradient() {
    let mut tape = Tape::new();
    let u = tape.leaf(Tensor::vector(vec![0.0, 0.0]).with_grad());
    let v = tape.leaf(Tensor::vector(vec![1.0, 2.0]).with_grad());
    let c = tape.cosine_similarity(u, v).unwrap();
    assert_eq!(tape.value(c).item(), 0.0);
    tape.backward(c).unwrap();
    assert_eq!(tape.grad(u).unwrap(), &[0.0, 0.0]);
    assert_eq!(tape.grad(v).unwrap(), &[0.0, 0.0]);
}

#[test]
fn cross_entropy_uniform_logits() {
    let mut tape = Tape::new();
    let logits = tape.leaf(Tensor::zeros(vec![3, 8]));
    let loss = tape.cross_entropy(logits, &[1, 5, 2], usize::MAX).unwrap();
    assert!((tape.value(loss).item() - (8.0f64).ln()).abs() < 1e-12);
    assert!((tape.value(loss).item() - 2.0794).abs() < 1e-4);
}

#[test]
fn cross_entropy_saturated_logits_near_zero() {
    let mut data = vec![0.0; 2 * 6];
    data[0 * 6 + 3] = 30.0;
    data[1 * 6 + 1] = 30.0;
    let mut tape = Tape::new();
    let logits = tape.leaf(Tensor::new(vec![2, 6], data).unwrap());
    let loss = tape.cross_entropy(logits, &[3, 1], usize::MAX).unwrap();
    assert!(tape.value(loss).item() < 1e-9);
}

#[test]
fn cross_entropy_matches_hand_computed_two_step_case() {
    // logits [[1, 0], [0, 2]], targets [0, 1]
    let mut tape = Tape::new();
    let logits = tape.leaf(Tensor::matrix(&[&[1.0, 0.0], &[0.0, 2.0]]));
    let loss = tape.cross_entropy(logits, &[0, 1], usize::MAX).unwrap();
    let p0 = 1.0f64.exp() / (1.0f64.exp() + 1.0);
    let p1 = 2.0f64.exp() / (2.0f64.exp() + 1.0);
    let expect = -(p0.ln() + p1.ln()) / 2.0;
    assert!((tape.value(loss).item() - expect).abs() < 1e-12);
}

#[test]
fn cross_entropy_pad_exclusion_and_all_pad_error() {
    let mut tape = Tape::new();
    let logits = tape.leaf(Tensor::zeros(vec![2, 4]));
    let loss = tape.cross_entropy(logits, &[1, 0], 0).unwrap();
    assert!((tape.value(loss).item() - (4.0f64).ln()).abs() < 1e-12);
    assert!(tape.cross_entropy(logits, &[0, 0], 0).is_err());
}

#[test]
fn backward_sum_of_product_gives_other_factor() {
    let mut tape = Tape::new();
    let w = tape.leaf(Tensor::vector(vec![1.0, 2.0, 3.0]).with_grad());
    let x = tape.leaf(Tensor::vector(vec![4.0, 5.0, 6.0]));
    let p = tape.mul(w, x).unwrap();
    let s = tape.sum(p).unwrap();
    tape.backward(s).unwrap();
    assert_eq!(tape.grad(w).unwrap(), &[4.0, 5.0, 6.0]);
}

#[test]
fn backward_skips_constants() {
    let mut tape = Tape::new();
    let w = tape.leaf(Tensor::vector(vec![1.0, 2.0]).with_grad());
    let c = tape.constant(Tensor::vector(vec![3.0, 4.0]));
    let p = tape.mul(w, c).unwrap();
    let s = tape.sum(p).unwrap();
    tape.backward(s).unwrap();
    assert!(tape.grad(c).is_none());
    assert!(tape.grad(w).is_some());
}

#[test]
fn backward_two_stacked_linear_layers_matches_chain_rule() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x = randn(&mut rng, vec![1, 4]);
    let w1 = randn(&mut rng, vec![4, 3]);
    let w2 = randn(&mut rng, vec![3, 2]);

    let mut tape = Tape::new();
    let ix = tape.leaf(x.clone().with_grad());
    let i1 = tape.leaf(w1.clone());
    let i2 = tape.leaf(w2.clone());
    let h = tape.matmul(ix, i1).unwrap();
    let y = tape.matmul(h, i2).unwrap();
    let s = tape.sum(y).unwrap();
    tape.backward(s).unwrap();

    // closed form: d/dx sum(x·W1·W2) = (W1·W2)·1
    let mut w12 = vec![0.0; 4 * 2];
    kernels::mm_nn(&mut w12, w1.data(), w2.data(), 4, 3, 2);
    let expect: Vec<f64> = (0..4).map(|i| w12[i * 2] + w12[i * 2 + 1]).collect();
    for (g, e) in tape.grad(ix).unwrap().iter().zip(&expect) {
        assert!((g - e).abs() < 1e-10);
    }
}

#[test]
fn backward_rejects_non_scalar_root_and_double_replay() {
    let mut tape = Tape::new();
    let x = tape.leaf(Tensor::vector(vec![1.0, 2.0]).with_grad());
    assert!(tape.backward(x).is_err());

    let mut tape = Tape::new();
    let x = tape.leaf(Tensor::vector(vec![1.0, 2.0]).with_grad());
    let s = tape.sum(x).unwrap();
    tape.backward(s).unwrap();
    assert!(tape.backward(s).is_err());
}

#[test]
fn backward_is_linear_in_the_root() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let x = randn(&mut rng, vec![5]);
    let (a, b) = (2.5, -1.25);

    // grad of a*f + b*g
    let mut tape = Tape::new();
    let ix = tape.leaf(x.clone().with_grad());
    let f = tape.sum(ix).unwrap();
    let sq = tape.mul(ix, ix).unwrap();
    let g = tape.sum(sq).unwrap();
    let fa = tape.scale(f, a).unwrap();
    let gb = tape.scale(g, b).unwrap();
    let root = tape.add(fa, gb).unwrap();
    tape.backward(root).unwrap();
    let combined = tape.grad(ix).unwrap().to_vec();

    // a*grad(f) + b*grad(g) from separate tapes
    let mut t1 = Tape::new();
    let i1 = t1.leaf(x.clone().with_grad());
    let f1 = t1.sum(i1).unwrap();
    t1.backward(f1).unwrap();
    let gf = t1.grad(i1).unwrap().to_vec();

    let mut t2 = Tape::new();
    let i2 = t2.leaf(x.clone().with_grad());
    let sq2 = t2.mul(i2, i2).unwrap();
    let g2 = t2.sum(sq2).unwrap();
    t2.backward(g2).unwrap();
    let gg = t2.grad(i2).unwrap().to_vec();

    for i in 0..combined.len() {
        assert!((combined[i] - (a * gf[i] + b * gg[i])).abs() < 1e-10);
    }
}

#[test]
fn adam_zero_gradient_is_identity() {
    let mut params = vec![Tensor::vector(vec![1.0, -2.0, 3.0])];
    let before = params[0].clone();
    let mut state = AdamState::for_params(&params);
    let grads = vec![vec![0.0; 3]];
    adam_step(&mut params, &grads, &mut state, &AdamHyper::with_lr(0.1)).unwrap();
    assert_eq!(params[0].data(), before.data());
    assert_eq!(state.step, 1);
}

#[test]
fn adam_first_step_magnitude_is_lr() {
    // bias-corrected: mhat = 1, vhat = 1 → delta = lr / (1 + eps)
    let hyper = AdamHyper::with_lr(0.05);
    let mut params = vec![Tensor::scalar(0.0)];
    let mut state = AdamState::for_params(&params);
    adam_step(&mut params, &[vec![1.0]], &mut state, &hyper).unwrap();
    let delta = params[0].item().abs();
    assert!((delta - hyper.lr).abs() < 1e-9);
}

#[test]
fn adam_converges_on_quadratic_and_matches_reference() {
    let hyper = AdamHyper::with_lr(0.1);
    let mut params = vec![Tensor::scalar(0.0)];
    let mut state = AdamState::for_params(&params);

    // independent reference implementation of the same update
    let (mut w_ref, mut m_ref, mut v_ref) = (0.0f64, 0.0f64, 0.0f64);

    for t in 1..=200 {
        let w = params[0].item();
        let grad = 2.0 * (w - 3.0);
        adam_step(&mut params, &[vec![grad]], &mut state, &hyper).unwrap();

        let grad_ref = 2.0 * (w_ref - 3.0);
        m_ref = 0.9 * m_ref + 0.1 * grad_ref;
        v_ref = 0.999 * v_ref + 0.001 * grad_ref * grad_ref;
        let mhat = m_ref / (1.0 - 0.9f64.powi(t));
        let vhat = v_ref / (1.0 - 0.999f64.powi(t));
        w_ref -= 0.1 * mhat / (vhat.sqrt() + 1e-8);

        assert!((params[0].item() - w_ref).abs() < 1e-9);
    }
    assert!((params[0].item() - 3.0).abs() < 0.1);
}

#[test]
fn adam_rejects_nan_gradient() {
    let mut params = vec![Tensor::scalar(1.0)];
    let mut state = AdamState::for_params(&params);
    let err = adam_step(&mut params, &[vec![f64::NAN]], &mut state, &AdamHyper::with_lr(0.1));
    assert!(err.is_err());
    assert_eq!(params[0].item(), 1.0);
    assert_eq!(state.step, 0);
}

#[test]
fn grad_check_linear_map_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let x = randn(&mut rng, vec![1, 5]);
    let w = randn(&mut rng, vec![5, 3]);
    let err = grad_check(
        |tape, ids| {
            let y = tape.matmul(ids[0], ids[1])?;
            tape.sum(y)
        },
        &[x, w],
        1e-5,
    )
    .unwrap();
    assert!(err < 1e-9, "linear map rel err {}", err);
}

#[test]
fn grad_check_softmax_cross_entropy_composite() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let logits = randn(&mut rng, vec![4, 6]);
    let err = grad_check(
        |tape, ids| tape.cross_entropy(ids[0], &[2, 0, 5, 1], usize::MAX),
        &[logits],
        1e-5,
    )
    .unwrap();
    assert!(err < 1e-6, "composite rel err {}", err);
}

#[test]
fn every_primitive_passes_grad_check_on_20_seeds() {
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let max = primitive_suite_max_err(&mut rng);
        assert!(max < 1e-4, "seed {} max rel err {}", seed, max);
    }
}

/// Runs a finite-difference check over each differentiable primitive with
/// fresh random inputs; returns the worst relative error observed.
pub(crate) fn primitive_suite_max_err(rng: &mut ChaCha8Rng) -> f64 {
    let mut worst = 0.0f64;
    let mut track = |e: f64| worst = worst.max(e);

    let x = randn(rng, vec![3, 4]);
    let y = randn(rng, vec![3, 4]);
    track(
        grad_check(
            |t, ids| {
                let s = t.add(ids[0], ids[1])?;
                let m = t.mul(s, ids[0])?;
                t.sum(m)
            },
            &[x, y],
            1e-5,
        )
        .unwrap(),
    );

    let a = randn(rng, vec![3, 4]);
    let b = randn(rng, vec![4, 2]);
    track(
        grad_check(
            |t, ids| {
                let c = t.matmul(ids[0], ids[1])?;
                t.sum(c)
            },
            &[a, b],
            1e-5,
        )
        .unwrap(),
    );

    let a = randn(rng, vec![3, 4]);
    let b = randn(rng, vec![2, 4]);
    track(
        grad_check(
            |t, ids| {
                let c = t.matmul_nt(ids[0], ids[1])?;
                let sq = t.mul(c, c)?;
                t.sum(sq)
            },
            &[a, b],
            1e-5,
        )
        .unwrap(),
    );

    let x = randn(rng, vec![4, 3]);
    let s = randn(rng, vec![4]);
    track(
        grad_check(
            |t, ids| {
                let y = t.row_scale(ids[0], ids[1])?;
                let sq = t.mul(y, y)?;
                t.sum(sq)
            },
            &[x, s],
            1e-5,
        )
        .unwrap(),
    );

    let x = randn(rng, vec![3, 5]);
    track(
        grad_check(
            |t, ids| {
                let y = t.softmax_rows(ids[0])?;
                let sq = t.mul(y, y)?;
                t.sum(sq)
            },
            &[x],
            1e-5,
        )
        .unwrap(),
    );

    let x = randn(rng, vec![3, 3]);
    let allowed: Vec<bool> = (0..9).map(|i| i / 3 >= i % 3).collect(); // causal
    track(
        grad_check(
            move |t, ids| {
                let y = t.masked_softmax_rows(ids[0], allowed.clone())?;
                let sq = t.mul(y, y)?;
                t.sum(sq)
            },
            &[x],
            1e-5,
        )
        .unwrap(),
    );

    let x = randn(rng, vec![2, 6]);
    let g = randn(rng, vec![6]);
    let b = randn(rng, vec![6]);
    track(
        grad_check(
            |t, ids| {
                let y = t.layer_norm(ids[0], ids[1], ids[2])?;
                let sq = t.mul(y, y)?;
                t.sum(sq)
            },
            &[x, g, b],
            1e-5,
        )
        .unwrap(),
    );

    let u = randn(rng, vec![5]);
    let v = randn(rng, vec![5]);
    track(grad_check(|t, ids| t.cosine_similarity(ids[0], ids[1]), &[u, v], 1e-5).unwrap());

    let rep = randn(rng, vec![4]);
    let f = randn(rng, vec![3, 4]);
    track(
        grad_check(
            |t, ids| {
                let c = t.cosine_rows(ids[0], ids[1])?;
                let sq = t.mul(c, c)?;
                t.sum(sq)
            },
            &[rep, f],
            1e-5,
        )
        .unwrap(),
    );

    // mask gate: keep cosines away from the threshold so the finite
    // difference never crosses the selection boundary
    let rep = Tensor::vector(vec![1.0, 0.2, -0.3, 0.5]);
    let f = randn(rng, vec![3, 4]);
    track(
        grad_check(
            |t, ids| {
                let c = t.cosine_rows(ids[0], ids[1])?;
                let m = t.mask_gate(c, -2.0, false)?; // everything selected
                let sq = t.mul(m, m)?;
                t.sum(sq)
            },
            &[rep, f],
            1e-5,
        )
        .unwrap(),
    );

    let table = randn(rng, vec![5, 3]);
    track(
        grad_check(
            |t, ids| {
                let e = t.embedding(ids[0], &[0, 2, 2, 4])?;
                let sq = t.mul(e, e)?;
                t.sum(sq)
            },
            &[table],
            1e-5,
        )
        .unwrap(),
    );

    let x = randn(rng, vec![3, 4]);
    // nudge values away from the relu kink
    let x = Tensor::new(
        vec![3, 4],
        x.data().iter().map(|v| if v.abs() < 0.05 { v + 0.1 } else { *v }).collect(),
    )
    .unwrap();
    track(
        grad_check(
            |t, ids| {
                let y = t.relu(ids[0])?;
                t.sum(y)
            },
            &[x],
            1e-5,
        )
        .unwrap(),
    );

    let a = randn(rng, vec![2, 3]);
    let b = randn(rng, vec![2, 2]);
    track(
        grad_check(
            |t, ids| {
                let c = t.concat_cols(&[ids[0], ids[1]])?;
                let sq = t.mul(c, c)?;
                t.sum(sq)
            },
            &[a, b],
            1e-5,
        )
        .unwrap(),
    );

    let logits = randn(rng, vec![3, 5]);
    track(grad_check(|t, ids| t.cross_entropy(ids[0], &[1, 4, 0], usize::MAX), &[logits], 1e-5).unwrap());

    let x = randn(rng, vec![4, 3]);
    let bias = randn(rng, vec![3]);
    track(
        grad_check(
            |t, ids| {
                let y = t.add_row(ids[0], ids[1])?;
                let sq = t.mul(y, y)?;
                t.sum(sq)
            },
            &[x, bias],
            1e-5,
        )
        .unwrap(),
    );

    let x = randn(rng, vec![4]);
    track(
        grad_check(
            |t, ids| {
                let m = t.mean(ids[0])?;
                t.scale(m, 3.0)
            },
            &[x],
            1e-5,
        )
        .unwrap(),
    );

    worst
}

#[test]
fn mask_gate_boundary_semantics() {
    let mut tape = Tape::new();
    // cos values: exactly 1, exactly tau, above tau, below tau
    let cos = tape.leaf(Tensor::vector(vec![1.0, 0.1, 0.5, -0.2]));
    let m = tape.mask_gate(cos, 0.1, false).unwrap();
    let got = tape.value(m).data();
    assert_eq!(got[0], 1.0); // exp(1-1) = 1
    assert_eq!(got[1], 0.0); // strict inequality: cos == tau is excluded
    assert!((got[2] - 0.5f64.exp()).abs() < 1e-12);
    assert!((got[2] - 1.64872).abs() < 1e-5);
    assert_eq!(got[3], 0.0);
}

#[test]
fn mask_gate_binary_mode_is_indicator() {
    let mut tape = Tape::new();
    let cos = tape.leaf(Tensor::vector(vec![0.9, 0.05]).with_grad());
    let m = tape.mask_gate(cos, 0.1, true).unwrap();
    assert_eq!(tape.value(m).data(), &[1.0, 0.0]);
    let s = tape.sum(m).unwrap();
    tape.backward(s).unwrap();
    assert_eq!(tape.grad(cos).unwrap(), &[0.0, 0.0]); // indicator has no gradient
}

#[test]
fn embedding_rejects_out_of_range_id() {
    let mut tape = Tape::new();
    let table = tape.leaf(Tensor::zeros(vec![4, 2]));
    assert!(tape.embedding(table, &[0, 4]).is_err());
}

#[test]
fn finite_check_catches_overflow() {
    let mut tape = Tape::new();
    let x = tape.leaf(Tensor::vector(vec![1e308, 1e308]));
    assert!(matches!(tape.add(x, x), Err(TensorError::NonFinite { .. })));
}
