use ndarray::{Array1, ArrayView1};

use crate::brex::BrexComponent;
use crate::error::Result;
use crate::objective::ProblemInstance;

/// Moves every coordinate lying strictly inside `(eta-, 0) U (0, eta+)` to the
/// better of `0` and the adjacent breakpoint, judged on `J_psi`.
///
/// On the output `beta_n(x_n)` equals `lambda0 |x_n|_0` for every `n`, so the
/// relaxed and original objectives coincide there.
pub fn polish(inst: &ProblemInstance, comps: &[BrexComponent], x: ArrayView1<f64>) -> Result<Array1<f64>> {
    super::fbs::check_components(inst, comps)?;
    inst.check_x(x)?;
    let a = inst.a();
    let lambda2 = inst.lambda2();
    let mut x = x.to_owned();
    let mut z = a.dot(&x);
    let mut trial = z.clone();

    loop {
        let mut changed = false;
        for (n, comp) in comps.iter().enumerate() {
            let cur = x[n];
            if !comp.in_concave_region(cur) {
                continue;
            }
            let edge = if cur > 0.0 { comp.eta_plus() } else { comp.eta_minus() };
            let col = a.column(n);
            let mut best: Option<(f64, f64)> = None;
            for cand in [0.0, edge] {
                trial.assign(&z);
                trial.scaled_add(cand - cur, &col);
                let value = inst.fit_value(&trial)? + comp.value_unchecked(cand) + 0.5 * lambda2 * cand * cand;
                if best.is_none_or(|(v, _)| value < v) {
                    best = Some((value, cand));
                }
            }
            let (_, cand) = best.expect("two candidates");
            z.scaled_add(cand - cur, &col);
            x[n] = cand;
            changed = true;
        }
        if !changed {
            break;
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brex::Bounds;
    use crate::objective::{objective_jpsi, FidelityKind};
    use ndarray::array;

    fn one_dim(y: f64) -> (ProblemInstance, Vec<BrexComponent>) {
        let b = Bounds::symmetric(2.0).unwrap();
        let inst = ProblemInstance::new(array![[1.0]], array![y], FidelityKind::LeastSquares, 0.5, 0.0, b).unwrap();
        let comps = vec![BrexComponent::quadratic(1.0, 0.5, b).unwrap()];
        (inst, comps)
    }

    #[test]
    fn leaves_points_outside_concave_regions() {
        let (inst, comps) = one_dim(0.95);
        for &v in &[0.0, 1.0, 1.7, -2.0] {
            assert_eq!(polish(&inst, &comps, array![v].view()).unwrap(), array![v]);
        }
    }

    #[test]
    fn moves_to_zero() {
        let (inst, comps) = one_dim(0.95);
        let j = |v: f64| objective_jpsi(&inst, &comps, array![v].view()).unwrap();
        assert!((j(0.5) - 0.47625).abs() < 1e-12);
        assert!((j(0.0) - 0.45125).abs() < 1e-12);
        assert!((j(1.0) - 0.50125).abs() < 1e-12);
        assert_eq!(polish(&inst, &comps, array![0.5].view()).unwrap(), array![0.0]);
    }

    #[test]
    fn moves_to_breakpoint() {
        let (inst, comps) = one_dim(1.4);
        let j = |v: f64| objective_jpsi(&inst, &comps, array![v].view()).unwrap();
        assert!((j(0.0) - 0.98).abs() < 1e-12);
        assert!((j(1.0) - 0.58).abs() < 1e-12);
        assert_eq!(polish(&inst, &comps, array![0.5].view()).unwrap(), array![1.0]);
    }
}
