use crate::error::{Error, Result};
use crate::phase_space::field::inner;
use crate::C64;

#[derive(Clone, Debug)]
pub struct CgOutcome {
    pub solution: Vec<C64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Conjugate gradients for `(I + a A) x = b` with `A` Hermitian positive
/// semidefinite, given only `A`'s action. Stops at `|r| <= tol |b|`.
pub fn conjugate_gradient(
    apply: impl Fn(&[C64]) -> Vec<C64>,
    a: f64,
    b: &[C64],
    guess: Vec<C64>,
    tol: f64,
    max_iter: usize,
) -> Result<CgOutcome> {
    let op = |x: &[C64]| -> Vec<C64> {
        let ax = apply(x);
        x.iter().zip(ax).map(|(x, y)| x + y * a).collect()
    };
    let bnorm = inner(b, b).re.sqrt();
    if bnorm == 0.0 {
        return Ok(CgOutcome { solution: vec![C64::new(0.0, 0.0); b.len()], iterations: 0, residual: 0.0 });
    }
    let mut x = guess;
    let ax = op(&x);
    let mut r: Vec<C64> = b.iter().zip(&ax).map(|(b, y)| b - y).collect();
    let mut p = r.clone();
    let mut rr = inner(&r, &r).re;
    for it in 0..=max_iter {
        let res = rr.sqrt() / bnorm;
        if res <= tol {
            return Ok(CgOutcome { solution: x, iterations: it, residual: res });
        }
        if it == max_iter {
            return Err(Error::NonConvergence { iterations: it, residual: res });
        }
        let ap = op(&p);
        let alpha = rr / inner(&p, &ap).re;
        for ((xi, pi), (ri, api)) in x.iter_mut().zip(&p).zip(r.iter_mut().zip(&ap)) {
            *xi += pi * alpha;
            *ri -= api * alpha;
        }
        let rr_new = inner(&r, &r).re;
        let beta = rr_new / rr;
        rr = rr_new;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + *pi * beta;
        }
    }
    unreachable!()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_diagonal_system() {
        let d: Vec<f64> = (0..50).map(|i| i as f64 * 0.7).collect();
        let b: Vec<C64> = (0..50).map(|i| C64::new(1.0, i as f64)).collect();
        let apply = |x: &[C64]| x.iter().zip(&d).map(|(x, d)| x * d).collect::<Vec<_>>();
        let out = conjugate_gradient(apply, 0.3, &b, b.clone(), 1e-12, 200).unwrap();
        for ((x, b), d) in out.solution.iter().zip(&b).zip(&d) {
            assert!((x * (1.0 + 0.3 * d) - b).norm() < 1e-10 * b.norm());
        }
    }

    #[test]
    fn reports_non_convergence() {
        let d: Vec<f64> = (0..50).map(|i| (i * i) as f64).collect();
        let b = vec![C64::new(1.0, 0.0); 50];
        let apply = |x: &[C64]| x.iter().zip(&d).map(|(x, d)| x * d).collect::<Vec<_>>();
        let err = conjugate_gradient(apply, 1.0, &b, b.clone(), 1e-14, 2).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { iterations: 2, .. }));
    }
}
