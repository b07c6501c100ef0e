//! Time evolution: unitary propagation of pure states and ensembles, and the
//! site-local depolarizing master equation.

mod krylov;
mod lindblad;

pub use krylov::krylov_expm;
pub use lindblad::{lindblad_evolve, lindblad_rhs, LindbladConfig, LindbladIntegrator, MAX_LINDBLAD_SITES};

use std::sync::OnceLock;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::hilbert::{PureState, SzSector};
use crate::linalg::symmetric_eigh;
use crate::model::{HamiltonianSpec, MixedEnsemble, SectorOperator, DENSE_SECTOR_LIMIT};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    DenseEig,
    Krylov,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropagatorConfig {
    pub method: Method,
    pub krylov_dim: usize,
    pub krylov_tol: f64,
    /// Sampling interval of time series, in 1/|J|.
    pub dt_sample: f64,
}

impl Default for PropagatorConfig {
    fn default() -> Self {
        Self { method: Method::Krylov, krylov_dim: 30, krylov_tol: 1e-10, dt_sample: 0.01 }
    }
}

impl PropagatorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.krylov_dim < 2 {
            return Err(Error::InvalidParameter(format!("krylov_dim must be >= 2, got {}", self.krylov_dim)));
        }
        if !(self.krylov_tol > 0.0) {
            return Err(Error::InvalidParameter("krylov_tol must be > 0".into()));
        }
        if !(self.dt_sample > 0.0 && self.dt_sample.is_finite()) {
            return Err(Error::InvalidParameter("dt_sample must be > 0".into()));
        }
        Ok(())
    }
}

enum Block {
    Dense { energies: Vec<f64>, vectors: DMatrix<f64> },
    Krylov { op: SectorOperator, norm: f64 },
}

/// `exp(-iHt)` applied sector by sector. Sector data is built on first use
/// and shared between threads.
pub struct Propagator {
    h: HamiltonianSpec,
    cfg: PropagatorConfig,
    sectors: Vec<OnceLock<(SzSector, Block)>>,
}

impl Propagator {
    pub fn new(h: &HamiltonianSpec, cfg: &PropagatorConfig) -> Result<Self> {
        cfg.validate()?;
        let sectors = (0..=h.n_sites()).map(|_| OnceLock::new()).collect();
        Ok(Self { h: h.clone(), cfg: *cfg, sectors })
    }

    pub fn hamiltonian(&self) -> &HamiltonianSpec {
        &self.h
    }

    fn block(&self, ones: usize) -> Result<&(SzSector, Block)> {
        if let Some(b) = self.sectors[ones].get() {
            return Ok(b);
        }
        let sector = SzSector::new(self.h.n_sites(), ones)?;
        let op = self.h.sector_operator(&sector)?;
        let block = match self.cfg.method {
            Method::DenseEig => {
                if sector.len() > DENSE_SECTOR_LIMIT {
                    return Err(Error::TooLarge { n_sites: self.h.n_sites(), limit: DENSE_SECTOR_LIMIT });
                }
                let (energies, vectors) = symmetric_eigh(op.dense());
                Block::Dense { energies, vectors }
            }
            Method::Krylov => Block::Krylov { op, norm: self.h.norm_bound() },
        };
        Ok(self.sectors[ones].get_or_init(|| (sector, block)))
    }

    /// Evolves a full-register amplitude vector in place by time `t`.
    pub fn apply_in_place(&self, amps: &mut [C64], t: f64) -> Result<()> {
        if amps.len() != self.h.dim() {
            return Err(Error::SizeMismatch { expected: self.h.dim(), found: amps.len() });
        }
        if t == 0.0 {
            return Ok(());
        }
        let mut occupied = vec![false; self.h.n_sites() + 1];
        for (i, a) in amps.iter().enumerate() {
            if *a != C64::new(0.0, 0.0) {
                occupied[i.count_ones() as usize] = true;
            }
        }
        for (ones, _) in occupied.iter().enumerate().filter(|(_, o)| **o) {
            let (sector, block) = self.block(ones)?;
            let x = sector.project(amps);
            let y = match block {
                Block::Dense { energies, vectors } => dense_expm(energies, vectors, &x, t),
                Block::Krylov { op, norm } => krylov_expm(op, *norm, &x, t, self.cfg.krylov_dim, self.cfg.krylov_tol)?,
            };
            sector.embed(&y, amps);
        }
        Ok(())
    }

    pub fn evolve(&self, s: &PureState, t: f64) -> Result<PureState> {
        if s.n_sites() != self.h.n_sites() {
            return Err(Error::SizeMismatch { expected: self.h.n_sites(), found: s.n_sites() });
        }
        if t < 0.0 {
            return Err(Error::InvalidParameter(format!("negative time {t}")));
        }
        let mut amps = s.amplitudes().to_vec();
        self.apply_in_place(&mut amps, t)?;
        Ok(PureState::from_raw(s.n_sites(), amps))
    }
}

fn dense_expm(energies: &[f64], vectors: &DMatrix<f64>, x: &[C64], t: f64) -> Vec<C64> {
    let n = x.len();
    let coeffs: Vec<C64> = (0..n)
        .map(|k| {
            let c: C64 = (0..n).map(|i| x[i] * vectors[(i, k)]).sum();
            c * C64::from_polar(1.0, -energies[k] * t)
        })
        .collect();
    (0..n)
        .map(|i| (0..n).map(|k| coeffs[k] * vectors[(i, k)]).sum())
        .collect()
}

/// `exp(-iHt)|s>`.
pub fn evolve_pure(h: &HamiltonianSpec, s: &PureState, t: f64, cfg: &PropagatorConfig) -> Result<PureState> {
    Propagator::new(h, cfg)?.evolve(s, t)
}

/// Evolves every member; weights are unchanged.
pub fn evolve_ensemble(h: &HamiltonianSpec, e: &MixedEnsemble, t: f64, cfg: &PropagatorConfig) -> Result<MixedEnsemble> {
    let prop = Propagator::new(h, cfg)?;
    let states = e
        .states
        .par_iter()
        .map(|s| prop.evolve(s, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(MixedEnsemble { states, weights: e.weights.clone(), dropped_weight: e.dropped_weight })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::werner_parameter;
    use crate::model::{initial_state, initial_thermal, total_hamiltonian, ChainSpec};
    use crate::hilbert::DensityMatrix;
    use rand::{Rng, SeedableRng};

    fn random_state(n: usize, seed: u64) -> PureState {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let amps = (0..1 << n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        PureState::normalize(n, amps).unwrap()
    }

    fn chain(n: usize) -> HamiltonianSpec {
        let spec = ChainSpec::antiferro(n - 2).unwrap();
        total_hamiltonian(&spec).unwrap()
    }

    fn cfg(method: Method) -> PropagatorConfig {
        PropagatorConfig { method, ..Default::default() }
    }

    #[test]
    fn zero_time_is_identity() {
        let s = random_state(5, 1);
        for m in [Method::Krylov, Method::DenseEig] {
            assert_eq!(evolve_pure(&chain(5), &s, 0.0, &cfg(m)).unwrap(), s);
        }
    }

    #[test]
    fn four_site_singlet_fraction_follows_sin_squared() {
        let spec = ChainSpec::antiferro(2).unwrap();
        let h = total_hamiltonian(&spec).unwrap();
        let s0 = initial_state(&spec).unwrap();
        for m in [Method::Krylov, Method::DenseEig] {
            for t in [0.1, 0.5, 1.3, 2.9] {
                let s = evolve_pure(&h, &s0, t, &cfg(m)).unwrap();
                let rho = s.partial_trace(&[0, spec.far_end()]).unwrap();
                let (p, _) = werner_parameter(&rho).unwrap();
                assert!((p - (2.0 * t).sin().powi(2)).abs() < 1e-9, "t = {t}");
            }
        }
    }

    #[test]
    fn krylov_matches_dense_on_random_state() {
        let h = chain(10);
        let s = random_state(10, 7);
        let a = evolve_pure(&h, &s, 5.0, &cfg(Method::Krylov)).unwrap();
        let b = evolve_pure(&h, &s, 5.0, &cfg(Method::DenseEig)).unwrap();
        assert!(a.distance(&b) < 1e-8);
    }

    #[test]
    fn unitarity_energy_and_sz_are_conserved() {
        let h = chain(8);
        let s = random_state(8, 3);
        let e0 = h.expectation(&s).unwrap();
        let sz0 = s.total_sz();
        let prop = Propagator::new(&h, &cfg(Method::Krylov)).unwrap();
        for t in [0.3, 1.7, 6.0] {
            let st = prop.evolve(&s, t).unwrap();
            assert!((st.norm() - 1.0).abs() < 1e-9);
            assert!((h.expectation(&st).unwrap() - e0).abs() < 1e-8);
            assert!((st.total_sz() - sz0).abs() < 1e-10);
        }
    }

    #[test]
    fn evolution_composes() {
        let h = chain(7);
        let s = random_state(7, 11);
        for m in [Method::Krylov, Method::DenseEig] {
            let prop = Propagator::new(&h, &cfg(m)).unwrap();
            let two = prop.evolve(&prop.evolve(&s, 0.8).unwrap(), 1.9).unwrap();
            let one = prop.evolve(&s, 2.7).unwrap();
            assert!(two.distance(&one) < 1e-8);
        }
    }

    #[test]
    fn ensemble_evolution_matches_dense_density_matrix() {
        let spec = ChainSpec::antiferro(4).unwrap();
        let h = total_hamiltonian(&spec).unwrap();
        let ens = initial_thermal(&spec, 1.0, 0.0).unwrap();
        let t = 1.4;
        let evolved = evolve_ensemble(&h, &ens, t, &PropagatorConfig::default()).unwrap();
        let keep = [0, spec.far_end()];
        let via_members = evolved.partial_trace(&keep).unwrap();

        // dense oracle: U rho(0) U^dagger from the full eigendecomposition
        let (e, v) = symmetric_eigh(h.dense().unwrap());
        let vc = v.map(|x| C64::new(x, 0.0));
        let phases = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(e.len(), e.iter().map(|x| C64::from_polar(1.0, -x * t))));
        let u = &vc * phases * vc.adjoint();
        let dms: Vec<DensityMatrix> = ens.states.iter().map(|s| s.to_density().unwrap()).collect();
        let rho0 = DensityMatrix::mixture(ens.weights.iter().copied().zip(dms.iter())).unwrap();
        let rho_t = &u * rho0.matrix() * u.adjoint();
        let reduced = DensityMatrix::new(6, rho_t).unwrap().partial_trace(&keep).unwrap();
        assert!(via_members.distance(&reduced) < 1e-8);
        assert!((via_members.trace().re - 1.0).abs() < 1e-8);
    }

    #[test]
    fn single_member_ensemble_equals_pure_evolution() {
        let spec = ChainSpec::antiferro(3).unwrap();
        let h = total_hamiltonian(&spec).unwrap();
        let s0 = initial_state(&spec).unwrap();
        let ens = evolve_ensemble(&h, &MixedEnsemble::pure(s0.clone()), 2.0, &PropagatorConfig::default()).unwrap();
        let direct = evolve_pure(&h, &s0, 2.0, &PropagatorConfig::default()).unwrap();
        assert!(ens.states[0].distance(&direct) < 1e-14);
    }

    #[test]
    fn config_validation() {
        assert!(PropagatorConfig { krylov_dim: 1, ..Default::default() }.validate().is_err());
        assert!(PropagatorConfig { dt_sample: 0.0, ..Default::default() }.validate().is_err());
    }
}
