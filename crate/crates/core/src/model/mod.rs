//! Chain and protocol Hamiltonians, ground and thermal states, and the
//! initial states of the transfer protocol.

mod hamiltonian;
pub mod lanczos;

pub use hamiltonian::{Bond, HamiltonianSpec, SectorOperator};

use serde::{Deserialize, Serialize};

use crate::hilbert::{PureState, SzSector, MAX_PURE_SITES};
use crate::linalg::symmetric_eigh;
use crate::{Error, Result, C64};
use lanczos::{lowest_eigenpair, LanczosConfig};

/// Sector dimension above which the ground state is found by Lanczos.
pub const DENSE_SECTOR_LIMIT: usize = 4096;

/// Largest channel handled by full diagonalization for thermal states.
pub const MAX_THERMAL_CHANNEL: usize = 12;

pub const DEFAULT_WEIGHT_CUT: f64 = 1e-8;

/// Default strength of the field used to split degenerate levels when a
/// thermal ensemble is prepared, in units of |J|.
pub const DEFAULT_TIE_BREAK_FIELD: f64 = 0.1;

/// Which member of a degenerate ground manifold is returned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    /// The fully polarized state `|11...1>`, selected by an infinitesimal
    /// field `+eps sum sigma_z`. Used for ferromagnetic chains.
    Polarized,
    /// Lowest state of the sector with this many set bits.
    Sector(usize),
    /// Lowest state over all sectors, earliest sector on ties.
    Lowest,
}

impl TieBreak {
    /// Default convention: polarized for FM, the `floor(n/2)`-ones sector for
    /// AFM (the unique singlet for even `n`, total Sz = +1/2 for odd `n`).
    pub fn default_for(n_channel: usize, coupling: f64) -> Self {
        if coupling < 0.0 {
            TieBreak::Polarized
        } else {
            TieBreak::Sector(n_channel / 2)
        }
    }

    /// Human-readable label recorded in run metadata.
    pub fn describe(&self, n_sites: usize) -> String {
        match self {
            TieBreak::Polarized => format!("polarized |1...1> on {n_sites} sites (total sigma_z = -{n_sites})"),
            TieBreak::Sector(k) => format!(
                "lowest state with {k} down spins (total sigma_z = {})",
                n_sites as i64 - 2 * *k as i64
            ),
            TieBreak::Lowest => "lowest state over all sectors".to_string(),
        }
    }

    /// Uniform field `h sum sigma_z` whose sign favours the selected state.
    fn field_sign(&self, n_sites: usize) -> f64 {
        match self {
            TieBreak::Polarized => 1.0,
            TieBreak::Sector(k) if 2 * k > n_sites => 1.0,
            TieBreak::Sector(k) if 2 * k < n_sites => -1.0,
            _ => 0.0,
        }
    }
}

/// An open Heisenberg channel of `n_channel` spins with uniform coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub n_channel: usize,
    /// `J > 0` antiferromagnetic, `J < 0` ferromagnetic.
    pub coupling: f64,
    pub tie_break: TieBreak,
    /// Magnitude of the degeneracy-splitting field applied when preparing
    /// thermal states. Commutes with the Hamiltonian, so eigenvectors are
    /// unchanged.
    pub tie_break_field: f64,
}

impl ChainSpec {
    pub fn new(n_channel: usize, coupling: f64) -> Result<Self> {
        let spec = Self {
            n_channel,
            coupling,
            tie_break: TieBreak::default_for(n_channel, coupling),
            tie_break_field: DEFAULT_TIE_BREAK_FIELD,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn antiferro(n_channel: usize) -> Result<Self> {
        Self::new(n_channel, 1.0)
    }

    pub fn ferro(n_channel: usize) -> Result<Self> {
        Self::new(n_channel, -1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_channel == 0 {
            return Err(Error::InvalidParameter("channel needs at least one spin".into()));
        }
        if self.n_channel + 2 > MAX_PURE_SITES {
            return Err(Error::TooLarge { n_sites: self.n_channel + 2, limit: MAX_PURE_SITES });
        }
        if self.coupling == 0.0 || !self.coupling.is_finite() {
            return Err(Error::InvalidParameter(format!("coupling must be finite and non-zero, got {}", self.coupling)));
        }
        if !(self.tie_break_field >= 0.0 && self.tie_break_field.is_finite()) {
            return Err(Error::InvalidParameter("tie-break field must be finite and >= 0".into()));
        }
        if let TieBreak::Sector(k) = self.tie_break {
            if k > self.n_channel {
                return Err(Error::InvalidSector { ones: k, n_sites: self.n_channel });
            }
        }
        Ok(())
    }

    /// Total number of sites, spectator and injected spin included.
    pub fn n_total(&self) -> usize {
        self.n_channel + 2
    }

    pub fn is_antiferro(&self) -> bool {
        self.coupling > 0.0
    }

    /// Logical index of the spectator spin 0'.
    pub const SPECTATOR: usize = 0;
    /// Logical index of the injected spin 0.
    pub const INJECTED: usize = 1;

    /// Logical index of channel site `j` (1-based channel label).
    pub fn channel_site(&self, j: usize) -> usize {
        j + 1
    }

    /// Logical index of the far end of the channel.
    pub fn far_end(&self) -> usize {
        self.n_channel + 1
    }
}

/// `J sum_i sigma_i . sigma_{i+1}` on the channel alone, sites `0..n_channel`.
pub fn channel_hamiltonian(spec: &ChainSpec) -> Result<HamiltonianSpec> {
    spec.validate()?;
    let bonds = (0..spec.n_channel.saturating_sub(1))
        .map(|i| Bond { a: i, b: i + 1, strength: spec.coupling })
        .collect();
    HamiltonianSpec::new(spec.n_channel, bonds)
}

/// Protocol Hamiltonian on `0', 0, 1, ..., N_ch`: the channel bonds plus the
/// bond between the injected spin and channel site 1. No bond touches the
/// spectator.
pub fn total_hamiltonian(spec: &ChainSpec) -> Result<HamiltonianSpec> {
    spec.validate()?;
    let bonds = (1..=spec.n_channel)
        .map(|i| Bond { a: i, b: i + 1, strength: spec.coupling })
        .collect();
    HamiltonianSpec::new(spec.n_total(), bonds)
}

/// Channel Hamiltonian plus the uniform field that realises the tie-break
/// at finite temperature.
pub fn channel_hamiltonian_with_field(spec: &ChainSpec) -> Result<HamiltonianSpec> {
    let sign = spec.tie_break.field_sign(spec.n_channel);
    Ok(channel_hamiltonian(spec)?.with_uniform_field(sign * spec.tie_break_field))
}

fn sector_ground(h: &HamiltonianSpec, ones: usize) -> Result<(f64, PureState)> {
    let sector = SzSector::new(h.n_sites(), ones)?;
    let op = h.sector_operator(&sector)?;
    let (energy, coeffs) = if sector.len() <= DENSE_SECTOR_LIMIT {
        let (values, vectors) = symmetric_eigh(op.dense());
        (values[0], vectors.column(0).iter().copied().collect())
    } else {
        let (e, v, _) = lowest_eigenpair(sector.len(), |x, y| op.apply_into(x, y), &LanczosConfig::default())?;
        (e, v)
    };
    finish_ground(h, &sector, energy, coeffs)
}

fn finish_ground(h: &HamiltonianSpec, sector: &SzSector, energy: f64, mut coeffs: Vec<f64>) -> Result<(f64, PureState)> {
    fix_sign(&mut coeffs);
    let mut full = vec![C64::new(0.0, 0.0); h.dim()];
    for (&m, &c) in sector.masks().iter().zip(&coeffs) {
        full[m] = C64::new(c, 0.0);
    }
    let state = PureState::normalize(h.n_sites(), full)?;
    check_residual(h, &state, energy)?;
    Ok((energy, state))
}

/// First component of non-negligible weight is made positive.
fn fix_sign(v: &mut [f64]) {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-8 * scale) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

fn check_residual(h: &HamiltonianSpec, state: &PureState, energy: f64) -> Result<()> {
    let hs = h.apply_state(state)?;
    let residual = hs
        .iter()
        .zip(state.amplitudes())
        .map(|(a, b)| (a - b * energy).norm_sqr())
        .sum::<f64>()
        .sqrt();
    if residual >= 1e-8 {
        return Err(Error::NotConverged { what: "ground state", iterations: 0, residual });
    }
    Ok(())
}

/// Lowest-energy eigenvector, with degeneracies resolved by `policy`.
pub fn ground_state(h: &HamiltonianSpec, policy: TieBreak) -> Result<(f64, PureState)> {
    match policy {
        TieBreak::Polarized => {
            let index = h.dim() - 1;
            let state = PureState::from_index(h.n_sites(), index)?;
            let energy = h.diagonal(index);
            check_residual(h, &state, energy)?;
            Ok((energy, state))
        }
        TieBreak::Sector(ones) => sector_ground(h, ones),
        TieBreak::Lowest => {
            let mut best: Option<(f64, PureState)> = None;
            for ones in 0..=h.n_sites() {
                let (e, s) = sector_ground(h, ones)?;
                if best.as_ref().is_none_or(|(b, _)| e < b - 1e-10) {
                    best = Some((e, s));
                }
            }
            Ok(best.expect("at least one sector"))
        }
    }
}

/// Ground state of the channel under the spec's tie-break convention.
pub fn channel_ground_state(spec: &ChainSpec) -> Result<(f64, PureState)> {
    ground_state(&channel_hamiltonian(spec)?, spec.tie_break)
}

/// Eigenvector in compact sector form.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorVector {
    pub ones: usize,
    pub coeffs: Vec<f64>,
}

/// Complete eigendecomposition of a Hamiltonian, sector by sector.
#[derive(Debug, Clone)]
pub struct Spectrum {
    n_sites: usize,
    pub energies: Vec<f64>,
    pub vectors: Vec<SectorVector>,
}

impl Spectrum {
    /// Dense diagonalization of every sigma-z sector.
    pub fn of(h: &HamiltonianSpec) -> Result<Self> {
        if h.n_sites() > MAX_THERMAL_CHANNEL {
            return Err(Error::TooLarge { n_sites: h.n_sites(), limit: MAX_THERMAL_CHANNEL });
        }
        let mut energies = Vec::with_capacity(h.dim());
        let mut vectors = Vec::with_capacity(h.dim());
        for sector in SzSector::all(h.n_sites())? {
            let op = h.sector_operator(&sector)?;
            let (values, vecs) = symmetric_eigh(op.dense());
            for (k, e) in values.into_iter().enumerate() {
                let mut coeffs: Vec<f64> = vecs.column(k).iter().copied().collect();
                fix_sign(&mut coeffs);
                energies.push(e);
                vectors.push(SectorVector { ones: sector.ones(), coeffs });
            }
        }
        Ok(Self { n_sites: h.n_sites(), energies, vectors })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// Full-register state of eigenvector `k`.
    pub fn state(&self, k: usize) -> Result<PureState> {
        let v = &self.vectors[k];
        let sector = SzSector::new(self.n_sites, v.ones)?;
        let mut full = vec![C64::new(0.0, 0.0); 1 << self.n_sites];
        for (&m, &c) in sector.masks().iter().zip(&v.coeffs) {
            full[m] = C64::new(c, 0.0);
        }
        Ok(PureState::from_raw(self.n_sites, full))
    }

    /// Boltzmann weights `exp(-beta E_k) / Z`, untruncated.
    pub fn boltzmann(&self, beta: f64) -> Result<Vec<f64>> {
        if !(beta >= 0.0) {
            return Err(Error::InvalidParameter(format!("beta must be >= 0, got {beta}")));
        }
        let e0 = self.energies.iter().copied().fold(f64::INFINITY, f64::min);
        let raw: Vec<f64> = self
            .energies
            .iter()
            .map(|e| if beta.is_infinite() { if *e - e0 < 1e-10 { 1.0 } else { 0.0 } } else { (-(beta * (e - e0))).exp() })
            .collect();
        let z: f64 = raw.iter().sum();
        Ok(raw.into_iter().map(|w| w / z).collect())
    }

    /// Thermal ensemble with members below `weight_cut` dropped.
    pub fn thermal(&self, beta: f64, weight_cut: f64) -> Result<MixedEnsemble> {
        let weights = self.boltzmann(beta)?;
        let mut states = Vec::new();
        let mut kept = Vec::new();
        let mut dropped = 0.0;
        for (k, w) in weights.into_iter().enumerate() {
            if w < weight_cut {
                dropped += w;
            } else {
                states.push(self.state(k)?);
                kept.push(w);
            }
        }
        let total: f64 = kept.iter().sum();
        kept.iter_mut().for_each(|w| *w /= total);
        Ok(MixedEnsemble { states, weights: kept, dropped_weight: dropped })
    }
}

/// Weighted list of orthonormal pure states.
#[derive(Debug, Clone)]
pub struct MixedEnsemble {
    pub states: Vec<PureState>,
    pub weights: Vec<f64>,
    /// Probability mass removed by truncation before renormalizing.
    pub dropped_weight: f64,
}

impl MixedEnsemble {
    pub fn pure(state: PureState) -> Self {
        Self { states: vec![state], weights: vec![1.0], dropped_weight: 0.0 }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn n_sites(&self) -> usize {
        self.states.first().map_or(0, PureState::n_sites)
    }

    /// Weighted sum of member marginals on `keep`.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<crate::hilbert::DensityMatrix> {
        let parts = self
            .states
            .iter()
            .map(|s| s.partial_trace(keep))
            .collect::<Result<Vec<_>>>()?;
        crate::hilbert::DensityMatrix::mixture(self.weights.iter().copied().zip(parts.iter()))
    }
}

/// Thermal state `exp(-beta H) / Z` of `h` in spectral form.
pub fn thermal_state(h: &HamiltonianSpec, beta: f64, weight_cut: f64) -> Result<MixedEnsemble> {
    Spectrum::of(h)?.thermal(beta, weight_cut)
}

/// `|psi^->_{0'0} (x) |ground>_channel`.
pub fn initial_state(spec: &ChainSpec) -> Result<PureState> {
    let (_, ground) = channel_ground_state(spec)?;
    PureState::singlet().tensor(&ground)
}

/// Members `|psi^->_{0'0} (x) |E_k>` weighted by the channel's thermal
/// distribution, including the tie-break field.
pub fn initial_thermal(spec: &ChainSpec, beta: f64, weight_cut: f64) -> Result<MixedEnsemble> {
    let channel = thermal_state(&channel_hamiltonian_with_field(spec)?, beta, weight_cut)?;
    let singlet = PureState::singlet();
    let states = channel
        .states
        .iter()
        .map(|s| singlet.tensor(s))
        .collect::<Result<Vec<_>>>()?;
    Ok(MixedEnsemble { states, weights: channel.weights, dropped_weight: channel.dropped_weight })
}
