#![allow(dead_code)]

use brex::datagen::gen_design;
use brex::objective::{gamma_for_exactness, quadratic_components};
use brex::{Bounds, BrexComponent, FidelityKind, ProblemInstance};
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kind {
    Ls,
    Lr,
    Kl,
}

/// Small random instance with `lambda0 = factor * F_y(0)`.
pub fn instance(kind: Kind, seed: u64, m: usize, n: usize, factor: f64, lambda2: f64) -> ProblemInstance {
    let mut r = rng(seed);
    let (a, y, fid, bounds) = match kind {
        Kind::Ls => {
            let a = gen_design(m, n, 0.5, seed).unwrap();
            let x: Array1<f64> = (0..n)
                .map(|_| if r.gen_bool(0.3) { r.gen_range(-1.5..1.5) } else { 0.0 })
                .collect();
            let y = a.dot(&x) + Array1::from_shape_fn(m, |_| 0.1 * r.gen_range(-1.0..1.0));
            (a, y, FidelityKind::LeastSquares, Bounds::symmetric(1.5).unwrap())
        }
        Kind::Lr => {
            let a = gen_design(m, n, 0.5, seed).unwrap();
            let y = Array1::from_shape_fn(m, |_| if r.gen_bool(0.5) { 1.0 } else { -1.0 });
            (a, y, FidelityKind::Logistic, Bounds::symmetric(1.0).unwrap())
        }
        Kind::Kl => {
            let a = Array2::from_shape_fn((m, n), |_| r.gen_range(0.0..1.0));
            let y = Array1::from_shape_fn(m, |_| r.gen_range(0.0..4.0f64).floor());
            (
                a,
                y,
                FidelityKind::KullbackLeibler { background: 1.0 },
                Bounds::new(0.0, 2.0).unwrap(),
            )
        }
    };
    let inst = ProblemInstance::new(a, y, fid, 1.0, lambda2, bounds).unwrap();
    let f0 = inst.zero_fit();
    inst.with_regularization(factor * f0, lambda2).unwrap()
}

pub fn exact_components(inst: &ProblemInstance) -> Vec<BrexComponent> {
    let gamma = gamma_for_exactness(inst, 0.0).unwrap();
    quadratic_components(inst, gamma.view()).unwrap()
}

pub fn box_point<R: Rng>(r: &mut R, bounds: Bounds, n: usize) -> Array1<f64> {
    Array1::from_shape_fn(n, |_| r.gen_range(bounds.lower()..=bounds.upper()))
}

pub fn in_box(x: &Array1<f64>, bounds: Bounds) -> bool {
    x.iter().all(|&v| bounds.contains(v))
}

pub fn nonincreasing(trace: &[f64], slack: f64) -> Option<usize> {
    trace.windows(2).position(|w| w[1] > w[0] + slack)
}
