#![allow(dead_code)]

use cdadt::engine::default_init;
use cdadt::network::{erdos_renyi, metropolis_weights, ring};
use cdadt::numerics::{project_gstiefel, Mat};
use cdadt::problem::{build_cca, synth_factor, CcaData, Problem};
use cdadt::MixingMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub struct Instance {
    pub data: CcaData<f64>,
    pub problem: Problem<f64>,
}

/// Synthetic CCA data split uniformly over `d` agents; `B` uses `seed + 1`.
pub fn cca(n: usize, m: usize, q: usize, p: usize, d: usize, seed: u64) -> Instance {
    let a = synth_factor::<f64>(n, q, 0.99, seed).unwrap();
    let b = synth_factor::<f64>(m, q, 0.98, seed + 1).unwrap();
    let data = CcaData::uniform(a, b, d).unwrap();
    let problem = build_cca(&data, p, None).unwrap();
    Instance { data, problem }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Mat<f64> {
    Mat::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// `GGᵀ + shift·I`, symmetric to the last bit.
pub fn spd(rng: &mut ChaCha8Rng, n: usize, shift: f64) -> Mat<f64> {
    let g = gaussian(rng, n, n);
    let s = g.matmul_tr(&g);
    Mat::from_fn(n, n, |i, j| {
        let v = 0.5 * (s[(i, j)] + s[(j, i)]);
        if i == j {
            v + shift
        } else {
            v
        }
    })
}

pub fn feasible_point(problem: &Problem<f64>, seed: u64) -> Mat<f64> {
    default_init(problem, seed).unwrap()
}

/// A point at distance `radius` (in `‖XᵀMX − I‖`) from the manifold or less.
pub fn point_near_manifold(problem: &Problem<f64>, rng: &mut ChaCha8Rng, radius: f64) -> Mat<f64> {
    let base = project_gstiefel(&gaussian(rng, problem.n(), problem.p()), problem.constraint()).unwrap();
    let dir = gaussian(rng, problem.n(), problem.p());
    let mut t = 0.1 / dir.fro_norm();
    loop {
        let mut x = base.clone();
        x.axpy(t, &dir);
        if feas(&x, problem.constraint()) <= radius {
            return x;
        }
        t *= 0.5;
    }
}

pub fn feas(x: &Mat<f64>, m: &Mat<f64>) -> f64 {
    let mut r = x.tr_matmul(&m.matmul(x));
    for i in 0..x.cols() {
        r[(i, i)] -= 1.0;
    }
    r.fro_norm()
}

pub fn rel_err(a: &Mat<f64>, b: &Mat<f64>) -> f64 {
    (a - b).fro_norm() / b.fro_norm().max(f64::MIN_POSITIVE)
}

pub fn ring_weights(d: usize) -> MixingMatrix<f64> {
    metropolis_weights(&ring(d).unwrap()).unwrap()
}

pub fn er_weights(d: usize, seed: u64) -> MixingMatrix<f64> {
    metropolis_weights(&erdos_renyi(d, 0.5, seed).unwrap()).unwrap()
}

/// `‖B‖₂` by power iteration on `BᵀB`, independent of the eigensolver.
pub fn power_norm(b: &Mat<f64>) -> f64 {
    let btb = b.tr_matmul(b);
    let mut v = Mat::from_fn(b.cols(), 1, |i, _| 1.0 + 0.1 * i as f64);
    let mut est = 0.0;
    for _ in 0..5000 {
        let w = btb.matmul(&v);
        let norm = w.fro_norm();
        if norm == 0.0 {
            return 0.0;
        }
        v = w.scale(1.0 / norm);
        if (norm - est).abs() <= 1e-15 * norm {
            est = norm;
            break;
        }
        est = norm;
    }
    est.sqrt()
}
