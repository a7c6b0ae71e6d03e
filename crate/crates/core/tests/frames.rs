use equiaffine::blaschke::{full_invariants, BlaschkeData};
use equiaffine::charts::{make_chart, ChartSpec};
use equiaffine::frames::{maximize_cubic, split_frame, MaximizeOptions};
use equiaffine::tensor::Tensor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;
use common::{grid_maximum, orthonormalize};

fn cubic_value(c: &Tensor<f64>, u: &[f64]) -> f64 {
    let n = u.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                s += c[[i, j, k]] * u[i] * u[j] * u[k];
            }
        }
    }
    s
}

fn metric_rows(h: &Tensor<f64>) -> Vec<Vec<f64>> {
    let n = h.dim();
    (0..n).map(|i| (0..n).map(|j| h[[i, j]]).collect()).collect()
}

fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

/// `K_X Y` in coordinates.
fn k_apply(b: &BlaschkeData<f64>, x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = b.dim;
    (0..n)
        .map(|l| (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| x[i] * y[j] * b.k[[i, j, l]]).sum())
        .collect()
}

fn data(spec: &str, u: &[f64]) -> (BlaschkeData<f64>, Vec<Vec<usize>>) {
    let chart = make_chart(spec.parse().unwrap()).unwrap();
    let b = full_invariants(&chart, u, 5).unwrap();
    (b, chart.blocks().unwrap().to_vec())
}

#[test]
fn diagonal_toy_cubic() {
    let c = Tensor::from_fn(2, 3, |ix| match ix {
        [0, 0, 0] => 2.0,
        [1, 1, 1] => 1.0,
        _ => 0.0,
    });
    let h = Tensor::from_fn(2, 2, |ix| if ix[0] == ix[1] { 1.0 } else { 0.0 });
    let m = maximize_cubic(&c, &h, &[unit(2, 0), unit(2, 1)], &MaximizeOptions::default()).unwrap();
    let grid = grid_maximum(&|u| cubic_value(&c, u), &[unit(2, 0), unit(2, 1)]);
    assert!((m.value - 2.0).abs() < 1e-12);
    assert!((grid - 2.0).abs() < 1e-4);
    assert!((m.vector[0] - 1.0).abs() < 1e-6 && m.vector[1].abs() < 1e-6);
    assert!(!m.vanishing);
}

#[test]
fn quadric_cubic_form_vanishes() {
    let chart = make_chart(ChartSpec::Ellipsoid { n: 3 }).unwrap();
    let b = full_invariants(&chart, &[0.1f64, 0.2, -0.1], 5).unwrap();
    let basis: Vec<Vec<f64>> = (0..3).map(|i| unit(3, i)).collect();
    let m = maximize_cubic(&b.cubic, &b.metric.h, &basis, &MaximizeOptions::default()).unwrap();
    assert!(m.vanishing);
    assert_eq!(m.value, 0.0);
}

#[test]
fn maximizer_values_match_grid_search() {
    let cases: [(&str, &[f64]); 4] = [
        ("calabi(2,2)", &[0.3, -0.2, 0.7, 1.1]),
        ("calabi(2,3)", &[0.1, 0.4, 0.9, 1.2, -0.5]),
        ("q1n(3)", &[0.2, -0.4, 0.1]),
        ("thm12(4)", &[0.5, 0.6, 1.0, 2.0]),
    ];
    for (spec, u) in cases {
        let chart = make_chart(spec.parse().unwrap()).unwrap();
        let b = full_invariants(&chart, u, 5).unwrap();
        let g = metric_rows(&b.metric.h);
        let n = b.dim;
        let mut spaces: Vec<Vec<Vec<f64>>> = Vec::new();
        if let Some(blocks) = chart.blocks() {
            for blk in blocks {
                spaces.push(blk.iter().map(|&i| unit(n, i)).collect());
            }
        } else {
            spaces.push((0..n).map(|i| unit(n, i)).collect());
        }
        for space in spaces {
            let m = maximize_cubic(&b.cubic, &b.metric.h, &space, &MaximizeOptions::default()).unwrap();
            let grid = grid_maximum(&|v| cubic_value(&b.cubic, v), &orthonormalize(&g, &space));
            assert!(m.value >= grid - 1e-12, "{spec}: solver {} below grid {grid}", m.value);
            assert!((m.value - grid).abs() < 1e-4, "{spec}: solver {} grid {grid}", m.value);
        }
    }
}

#[test]
fn maximizer_value_is_gauge_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (spec, u) in [("calabi(2,2)", vec![0.3, -0.2, 0.7, 1.1]), ("q1n(3)", vec![0.2, -0.4, 0.1])] {
        let chart = make_chart(spec.parse().unwrap()).unwrap();
        let b = full_invariants(&chart, &u, 5).unwrap();
        let n = b.dim;
        let g = metric_rows(&b.metric.h);
        let space: Vec<Vec<f64>> = match chart.blocks() {
            Some(blocks) => blocks[0].iter().map(|&i| unit(n, i)).collect(),
            None => (0..n).map(|i| unit(n, i)).collect(),
        };
        let base = orthonormalize(&g, &space);
        let k = base.len();
        let mut values = Vec::new();
        for _ in 0..5 {
            // random orthogonal mix of an h-orthonormal basis
            let raw: Vec<Vec<f64>> = (0..k).map(|_| (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
            let identity: Vec<Vec<f64>> = (0..k).map(|i| unit(k, i)).collect();
            let q = orthonormalize(&identity, &raw);
            let rotated: Vec<Vec<f64>> = q
                .iter()
                .map(|row| (0..n).map(|i| row.iter().zip(&base).map(|(a, e)| a * e[i]).sum()).collect())
                .collect();
            let opts = MaximizeOptions { seed: rng.gen(), ..MaximizeOptions::default() };
            values.push(maximize_cubic(&b.cubic, &b.metric.h, &rotated, &opts).unwrap().value);
        }
        let spread = values.iter().cloned().fold(f64::MIN, f64::max) - values.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread < 1e-8, "{spec}: {values:?}");
    }
}

#[test]
fn calabi_ladder() {
    let (b, blocks) = data("calabi(2,2)", &[0.3, -0.2, 0.7, 1.1]);
    let f = split_frame(&b, &blocks, &MaximizeOptions::default()).unwrap();
    let h = b.h_mean;
    let n = 4.0;
    assert!(((f.lambdas[0] - (n - 1.0) * (-h / n).sqrt()) / f.lambdas[0]).abs() < 1e-6);
    assert!(((f.sum_mu_sq() + 2.0 * h / 3.0) / h).abs() < 1e-6);
    for (i, (l, m)) in f.lambdas.iter().zip(&f.mus).enumerate() {
        assert!((l + (n - 1.0 - i as f64) * m).abs() < 1e-6);
    }
    assert!(f.lambdas[0] > 0.0 && f.lambdas[1] >= -1e-9);
    assert!(f.gram_residual < 1e-9 && f.stationarity < 1e-7);
    assert!(f.isotropy_residual < 1e-7 && f.second_block_residual < 1e-7);
}

#[test]
fn thm12_eigenstructure() {
    for (spec, u) in [("thm12(3)", vec![0.5, 0.3, 1.0]), ("thm12(4)", vec![-0.3, 0.8, 1.1, 0.4])] {
        let (b, blocks) = data(spec, &u);
        let n = b.dim as f64;
        let scale = (-b.h_mean / n).sqrt();
        let f = split_frame(&b, &blocks, &MaximizeOptions::default()).unwrap();
        assert!((f.maximizer_values[0] - (n - 1.0) * scale).abs() < 1e-6, "{spec}");
        let x1 = &f.basis[0];
        let kx = k_apply(&b, x1, x1);
        for (a, e) in kx.iter().zip(x1) {
            assert!((a - (n - 1.0) * scale * e).abs() < 1e-6, "{spec}: K_X1 X1");
        }
        for y in &f.basis[1..] {
            for (a, e) in k_apply(&b, x1, y).iter().zip(y) {
                assert!((a + scale * e).abs() < 1e-6, "{spec}: K_X1 Y");
            }
        }
    }
}

#[test]
fn frames_need_blocks() {
    let (b, _) = data("calabi(2,2)", &[0.3, -0.2, 0.7, 1.1]);
    assert!(split_frame(&b, &[vec![0, 1, 2, 3]], &MaximizeOptions::default()).is_err());
}
