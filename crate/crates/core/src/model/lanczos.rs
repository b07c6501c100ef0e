//! Lowest eigenpair of a real symmetric operator by Lanczos iteration with
//! full reorthogonalization.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};

use crate::linalg::symmetric_eigh;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct LanczosConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for LanczosConfig {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 500, seed: 0x5eed }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Returns `(energy, vector, residual)` where residual is `||Hx - Ex||`.
pub fn lowest_eigenpair<F>(dim: usize, apply: F, cfg: &LanczosConfig) -> Result<(f64, Vec<f64>, f64)>
where
    F: Fn(&[f64], &mut [f64]),
{
    if dim == 0 {
        return Err(Error::InvalidParameter("empty operator".into()));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let n0 = norm(&v);
    v.iter_mut().for_each(|x| *x /= n0);

    let mut basis: Vec<Vec<f64>> = vec![v];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; dim];
    let max_iter = cfg.max_iter.min(dim);
    let mut last_residual = f64::INFINITY;

    for m in 0..max_iter {
        apply(&basis[m], &mut w);
        let a = dot(&basis[m], &w);
        alpha.push(a);
        // two passes of Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let b = norm(&w);

        let k = alpha.len();
        let check = b < 1e-14 || k == max_iter || k % 5 == 0;
        if check {
            let t = DMatrix::from_fn(k, k, |i, j| {
                if i == j {
                    alpha[i]
                } else if i + 1 == j {
                    beta[i]
                } else if j + 1 == i {
                    beta[j]
                } else {
                    0.0
                }
            });
            let (values, vectors) = symmetric_eigh(t);
            let ritz_residual = (b * vectors[(k - 1, 0)]).abs();
            if ritz_residual < cfg.tol || b < 1e-14 {
                let mut x = vec![0.0; dim];
                for (j, q) in basis.iter().enumerate() {
                    let c = vectors[(j, 0)];
                    x.iter_mut().zip(q).for_each(|(xi, qi)| *xi += c * qi);
                }
                let nx = norm(&x);
                x.iter_mut().for_each(|xi| *xi /= nx);
                let e = values[0];
                let mut hx = vec![0.0; dim];
                apply(&x, &mut hx);
                let residual = hx.iter().zip(&x).map(|(h, xi)| (h - e * xi).powi(2)).sum::<f64>().sqrt();
                last_residual = residual;
                if residual < 1e-8 {
                    return Ok((e, x, residual));
                }
            } else {
                last_residual = ritz_residual;
            }
        }
        if b < 1e-14 {
            break;
        }
        beta.push(b);
        let next: Vec<f64> = w.iter().map(|x| x / b).collect();
        basis.push(next);
    }
    Err(Error::NotConverged { what: "Lanczos ground state", iterations: alpha.len(), residual: last_residual })
}
