//! Short-time Lanczos propagation `exp(-iHt) x` for a real symmetric sector
//! block.

use nalgebra::DMatrix;

use crate::linalg::symmetric_eigh;
use crate::model::SectorOperator;
use crate::{Error, Result, C64};

fn cdot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn cnorm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `exp(-iHt) x`, split into restarts with `norm * dt <= dim / 2`.
///
/// Each restart grows a Krylov basis until the last-element estimate of the
/// projected exponential falls below `tol`; a restart that needs more than
/// `dim` vectors is retried with half the step, up to a fixed depth.
pub fn krylov_expm(op: &SectorOperator, norm: f64, x: &[C64], t: f64, dim: usize, tol: f64) -> Result<Vec<C64>> {
    let n = x.len();
    if n == 0 || t == 0.0 {
        return Ok(x.to_vec());
    }
    let dim = dim.min(n).max(1);
    let max_dt = if norm > 0.0 { dim as f64 / (2.0 * norm) } else { t.abs() };
    let mut steps = (t.abs() / max_dt).ceil().max(1.0) as usize;
    let mut state = x.to_vec();
    let mut done = 0.0;
    let mut halvings = 0;
    while steps > 0 {
        let dt = (t - done) / steps as f64;
        match step(op, &state, dt, dim, tol) {
            Ok(next) => {
                state = next;
                done += dt;
                steps -= 1;
            }
            Err(e) => {
                halvings += 1;
                if halvings > 12 {
                    return Err(e);
                }
                steps *= 2;
            }
        }
    }
    Ok(state)
}

fn step(op: &SectorOperator, x: &[C64], dt: f64, dim: usize, tol: f64) -> Result<Vec<C64>> {
    let n = x.len();
    let beta0 = cnorm(x);
    if beta0 == 0.0 {
        return Ok(x.to_vec());
    }
    let mut basis: Vec<Vec<C64>> = vec![x.iter().map(|z| z / beta0).collect()];
    let mut alpha: Vec<f64> = Vec::with_capacity(dim);
    let mut beta: Vec<f64> = Vec::with_capacity(dim);
    let mut w = vec![C64::new(0.0, 0.0); n];
    let mut estimate = f64::INFINITY;

    for j in 0..dim {
        op.apply_into(&basis[j], &mut w);
        alpha.push(cdot(&basis[j], &w).re);
        for _ in 0..2 {
            for q in &basis {
                let c = cdot(q, &w);
                w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= c * qi);
            }
        }
        let b = cnorm(&w);
        let m = j + 1;
        let coeffs = projected_exp(&alpha, &beta, dt);
        estimate = beta0 * b * coeffs[m - 1].norm();
        if b < 1e-13 || estimate < tol {
            let mut out = vec![C64::new(0.0, 0.0); n];
            for (q, c) in basis.iter().zip(&coeffs) {
                let c = c * beta0;
                out.iter_mut().zip(q).for_each(|(o, qi)| *o += c * qi);
            }
            return Ok(out);
        }
        if m == dim {
            break;
        }
        beta.push(b);
        basis.push(w.iter().map(|z| z / b).collect());
    }
    Err(Error::NotConverged { what: "Krylov step", iterations: dim, residual: estimate })
}

/// First column of `exp(-i T dt)` for the tridiagonal `T`.
fn projected_exp(alpha: &[f64], beta: &[f64], dt: f64) -> Vec<C64> {
    let m = alpha.len();
    let t = DMatrix::from_fn(m, m, |i, j| {
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
    (0..m)
        .map(|i| {
            (0..m)
                .map(|k| C64::from_polar(vectors[(i, k)] * vectors[(0, k)], -values[k] * dt))
                .sum()
        })
        .collect()
}
