//! Master equation with isotropic single-site depolarizing noise:
//!
//! `d rho/dt = -i[H, rho] - (gamma/3) sum_i sum_a (rho - sigma_a^i rho sigma_a^i)`
//!
//! with the site sum running over every site, the uncoupled spectator
//! included. Integrated with fixed-step classical RK4 on the dense matrix.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::hilbert::{DensityMatrix, EIGEN_FLOOR, MAX_DENSE_SITES};
use crate::model::HamiltonianSpec;
use crate::{Error, Result, C64};

/// Largest register integrated by the dense master-equation path.
pub const MAX_LINDBLAD_SITES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LindbladConfig {
    /// Depolarizing rate in units of |J|.
    pub gamma: f64,
    pub dt: f64,
    /// Largest tolerated deviation of the trace from 1.
    pub renorm_check: f64,
}

impl Default for LindbladConfig {
    fn default() -> Self {
        Self { gamma: 0.0, dt: 1e-3, renorm_check: 1e-8 }
    }
}

impl LindbladConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma must be >= 0, got {}", self.gamma)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.renorm_check > 0.0) {
            return Err(Error::InvalidParameter("renorm_check must be > 0".into()));
        }
        Ok(())
    }
}

/// `H M` for a dense square `M`, column by column.
fn h_times(h: &HamiltonianSpec, m: &DMatrix<C64>, out: &mut DMatrix<C64>) {
    let n = m.nrows();
    let src = m.as_slice();
    let dst = out.as_mut_slice();
    for j in 0..n {
        h.apply_into(&src[j * n..(j + 1) * n], &mut dst[j * n..(j + 1) * n])
            .expect("dimensions checked by caller");
    }
}

fn rhs_into(h: &HamiltonianSpec, gamma: f64, rho: &DMatrix<C64>, scratch: &mut DMatrix<C64>, out: &mut DMatrix<C64>) {
    let n = rho.nrows();
    // -i (H rho - rho H); rho H = (H rho^T)^T since H is real symmetric
    h_times(h, rho, out);
    let rho_t = rho.transpose();
    h_times(h, &rho_t, scratch);
    let minus_i = C64::new(0.0, -1.0);
    for j in 0..n {
        for i in 0..n {
            out[(i, j)] = minus_i * (out[(i, j)] - scratch[(j, i)]);
        }
    }
    if gamma == 0.0 {
        return;
    }
    // sum_a sigma_a rho sigma_a on site m: bits of (a, b) equal -> 2 rho[a^m, b^m] + rho[a, b],
    // bits differ -> -rho[a, b]
    let g = gamma / 3.0;
    for site in 0..h.n_sites() {
        let mask = 1usize << site;
        for b in 0..n {
            for a in 0..n {
                let same = (a & mask) == (b & mask);
                let twirl = if same {
                    rho[(a ^ mask, b ^ mask)] * 2.0 + rho[(a, b)]
                } else {
                    -rho[(a, b)]
                };
                out[(a, b)] -= (rho[(a, b)] * 3.0 - twirl) * g;
            }
        }
    }
}

/// `-i[H, rho] + l(rho)`; the result is traceless.
pub fn lindblad_rhs(h: &HamiltonianSpec, rho: &DensityMatrix, gamma: f64) -> Result<DMatrix<C64>> {
    if rho.n_sites() != h.n_sites() {
        return Err(Error::SizeMismatch { expected: h.n_sites(), found: rho.n_sites() });
    }
    let n = rho.dim();
    let mut out = DMatrix::zeros(n, n);
    let mut scratch = DMatrix::zeros(n, n);
    rhs_into(h, gamma, rho.matrix(), &mut scratch, &mut out);
    Ok(out)
}

/// Fixed-step RK4 integrator holding the current state.
pub struct LindbladIntegrator {
    h: HamiltonianSpec,
    cfg: LindbladConfig,
    rho: DMatrix<C64>,
    time: f64,
    k: [DMatrix<C64>; 4],
    stage: DMatrix<C64>,
    scratch: DMatrix<C64>,
}

impl LindbladIntegrator {
    pub fn new(h: &HamiltonianSpec, rho0: &DensityMatrix, cfg: &LindbladConfig) -> Result<Self> {
        cfg.validate()?;
        if h.n_sites() > MAX_LINDBLAD_SITES.min(MAX_DENSE_SITES) {
            return Err(Error::TooLarge { n_sites: h.n_sites(), limit: MAX_LINDBLAD_SITES });
        }
        if rho0.n_sites() != h.n_sites() {
            return Err(Error::SizeMismatch { expected: h.n_sites(), found: rho0.n_sites() });
        }
        let n = rho0.dim();
        let z = || DMatrix::zeros(n, n);
        Ok(Self {
            h: h.clone(),
            cfg: *cfg,
            rho: rho0.matrix().clone(),
            time: 0.0,
            k: [z(), z(), z(), z()],
            stage: z(),
            scratch: z(),
        })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    fn rk4(&mut self, dt: f64) {
        fn axpy(y: &mut DMatrix<C64>, a: f64, x: &DMatrix<C64>) {
            y.iter_mut().zip(x.iter()).for_each(|(yi, xi)| *yi += xi * a);
        }
        let g = self.cfg.gamma;
        let [k1, k2, k3, k4] = &mut self.k;
        rhs_into(&self.h, g, &self.rho, &mut self.scratch, k1);
        self.stage.copy_from(&self.rho);
        axpy(&mut self.stage, dt / 2.0, k1);
        rhs_into(&self.h, g, &self.stage, &mut self.scratch, k2);
        self.stage.copy_from(&self.rho);
        axpy(&mut self.stage, dt / 2.0, k2);
        rhs_into(&self.h, g, &self.stage, &mut self.scratch, k3);
        self.stage.copy_from(&self.rho);
        axpy(&mut self.stage, dt, k3);
        rhs_into(&self.h, g, &self.stage, &mut self.scratch, k4);
        let w = dt / 6.0;
        axpy(&mut self.rho, w, k1);
        axpy(&mut self.rho, 2.0 * w, k2);
        axpy(&mut self.rho, 2.0 * w, k3);
        axpy(&mut self.rho, w, k4);
    }

    /// Integrates forward by `duration` with steps no longer than `cfg.dt`,
    /// then checks the trace.
    pub fn advance(&mut self, duration: f64) -> Result<()> {
        if duration < 0.0 {
            return Err(Error::InvalidParameter(format!("negative duration {duration}")));
        }
        let steps = (duration / self.cfg.dt - 1e-9).ceil().max(0.0) as usize;
        if steps > 0 {
            let dt = duration / steps as f64;
            for _ in 0..steps {
                self.rk4(dt);
            }
        }
        self.time += duration;
        let trace = self.rho.trace();
        if (trace - C64::new(1.0, 0.0)).norm() > self.cfg.renorm_check || !trace.re.is_finite() {
            return Err(Error::TraceDrift { t: self.time, trace: trace.re });
        }
        Ok(())
    }

    /// Current state, Hermitized. Does not check positivity.
    pub fn state(&self) -> DensityMatrix {
        DensityMatrix::from_raw(self.h.n_sites(), self.rho.clone()).hermitized()
    }

    /// Current state, Hermitized, with the eigenvalue floor enforced.
    pub fn checked_state(&self) -> Result<DensityMatrix> {
        let rho = self.state();
        let min = rho.eigenvalues().first().copied().unwrap_or(0.0);
        if min < EIGEN_FLOOR {
            return Err(Error::Negativity { t: self.time, value: min });
        }
        Ok(rho)
    }
}

pub fn lindblad_evolve(h: &HamiltonianSpec, rho0: &DensityMatrix, t: f64, cfg: &LindbladConfig) -> Result<DensityMatrix> {
    let mut integ = LindbladIntegrator::new(h, rho0, cfg)?;
    integ.advance(t)?;
    integ.checked_state()
}
