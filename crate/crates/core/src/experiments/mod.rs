//! Protocol runs: end-to-end transfer traces, first-peak scans over length,
//! temperature and dephasing rate, and the hop-by-hop picture of the
//! antiferromagnetic dynamics.

mod series;

pub use series::{flat_zero_intervals, time_grid, TimeSeries};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::evolve::{LindbladConfig, LindbladIntegrator, Propagator, PropagatorConfig};
use crate::hilbert::{DensityMatrix, PureState};
use crate::measures::{average_fidelity, concurrence, first_maximum, purity, werner_parameter, PeakResult, PEAK_FLOOR};
use crate::model::{channel_hamiltonian_with_field, initial_state, total_hamiltonian, ChainSpec, Spectrum, DEFAULT_WEIGHT_CUT};
use crate::{Error, Result, C64};

/// Column names of [`run_transfer`], in output order.
pub const TRANSFER_CHANNELS: [&str; 4] = ["concurrence_end", "purity_end", "werner_p", "avg_fidelity"];

/// Concurrence above which a pair is drawn as a bond in [`hopping_map`].
pub const BOND_THRESHOLD: f64 = 0.1;

/// Largest register accepted by the pure-state runners.
pub const MAX_RUN_SITES: usize = 20;

/// Default run length, `4 N / |J|`.
pub fn default_t_max(spec: &ChainSpec) -> f64 {
    4.0 * spec.n_total() as f64 / spec.coupling.abs()
}

/// `"AFM"` or `"FM"`.
pub fn sign_label(coupling: f64) -> &'static str {
    if coupling > 0.0 {
        "AFM"
    } else {
        "FM"
    }
}

/// Printable name of a logical site: `0p` for the spectator, then the chain
/// labels `0, 1, ..., N_ch`.
pub fn site_label(site: usize) -> String {
    match site {
        0 => "0p".to_string(),
        s => (s - 1).to_string(),
    }
}

/// First concurrence maximum of one scan point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    /// Scan variable: total length N, temperature, or dephasing rate.
    pub key: f64,
    pub coupling: f64,
    /// `None` when no maximum was found before `t_max`.
    pub t_first_max: Option<f64>,
    /// Peak concurrence, or the largest sampled value when no peak was found.
    pub c_first_max: f64,
    pub purity_at_max: Option<f64>,
}

impl ScanRow {
    pub fn peak_found(&self) -> bool {
        self.t_first_max.is_some()
    }
}

/// End-pair quantities at one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndSample {
    pub concurrence: f64,
    pub purity: f64,
    pub werner_p: f64,
    pub werner_distance: f64,
    pub avg_fidelity: f64,
}

impl EndSample {
    pub fn of(pair: &DensityMatrix) -> Result<Self> {
        let (werner_p, werner_distance) = werner_parameter(pair)?;
        Ok(Self {
            concurrence: concurrence(pair)?,
            purity: purity(pair),
            werner_p,
            werner_distance,
            avg_fidelity: average_fidelity(|s| steered_output(pair, s))?,
        })
    }
}

/// Output of the single-qubit channel from spin 0 to the far end for the
/// input `chi`, read off the spectator/far-end state.
///
/// The spectator starts in a singlet with spin 0 and never evolves, so
/// finding it in `phi = (chi_1^*, -chi_0^*)` leaves spin 0 in `chi`; the
/// output is `2 <phi| rho |phi>` on the spectator.
pub fn steered_output(pair: &DensityMatrix, chi: &PureState) -> Result<DensityMatrix> {
    if pair.n_sites() != 2 {
        return Err(Error::SizeMismatch { expected: 2, found: pair.n_sites() });
    }
    if chi.n_sites() != 1 {
        return Err(Error::SizeMismatch { expected: 1, found: chi.n_sites() });
    }
    let c = chi.amplitudes();
    let phi = [c[1].conj(), -c[0].conj()];
    let m = pair.matrix();
    let out = DMatrix::from_fn(2, 2, |x, y| {
        let mut acc = C64::new(0.0, 0.0);
        for u in 0..2 {
            for v in 0..2 {
                acc += phi[u].conj() * m[(u + 2 * x, v + 2 * y)] * phi[v];
            }
        }
        acc * 2.0
    });
    Ok(DensityMatrix::from_raw(1, out))
}

/// Marginal of sites `a` and `b` (`a` in the low bit) as a row-major 4x4.
fn pair_marginal(amps: &[C64], a: usize, b: usize) -> [C64; 16] {
    let mut out = [C64::new(0.0, 0.0); 16];
    let mask = 1 << a | 1 << b;
    let offs = [0, 1 << a, 1 << b, 1 << a | 1 << b];
    for rest in (0..amps.len()).filter(|i| i & mask == 0) {
        let v = [amps[rest], amps[rest | offs[1]], amps[rest | offs[2]], amps[rest | offs[3]]];
        if v.iter().all(|z| *z == C64::new(0.0, 0.0)) {
            continue;
        }
        for u in 0..4 {
            for w in 0..4 {
                out[4 * u + w] += v[u] * v[w].conj();
            }
        }
    }
    out
}

fn to_density(m: &[C64; 16]) -> DensityMatrix {
    DensityMatrix::from_raw(2, DMatrix::from_row_slice(4, 4, m))
}

fn check_run_size(spec: &ChainSpec) -> Result<()> {
    spec.validate()?;
    if spec.n_total() > MAX_RUN_SITES {
        return Err(Error::TooLarge { n_sites: spec.n_total(), limit: MAX_RUN_SITES });
    }
    Ok(())
}

fn check_even(spec: &ChainSpec) -> Result<()> {
    if spec.n_channel % 2 != 0 {
        return Err(Error::InvalidParameter(format!("needs an even channel, got N_ch = {}", spec.n_channel)));
    }
    Ok(())
}

/// Steps every member along `grid` and hands the members to `visit` at each
/// sample; `visit` returns `false` to stop early.
fn drive<F>(prop: &Propagator, members: &mut [Vec<C64>], grid: &[f64], mut visit: F) -> Result<()>
where
    F: FnMut(usize, &[Vec<C64>]) -> Result<bool>,
{
    for (k, &t) in grid.iter().enumerate() {
        if k > 0 {
            let dt = t - grid[k - 1];
            members.par_iter_mut().try_for_each(|m| prop.apply_in_place(m, dt))?;
        }
        if !visit(k, members)? {
            break;
        }
    }
    Ok(())
}

/// Streaming first-maximum search over a concurrence trace.
struct PeakTracker {
    conc: Vec<f64>,
    purity: Vec<f64>,
    peak: Option<PeakResult>,
}

impl PeakTracker {
    fn new() -> Self {
        Self { conc: Vec::new(), purity: Vec::new(), peak: None }
    }

    /// Records a sample; returns `true` once the first maximum is confirmed.
    fn push(&mut self, times: &[f64], c: f64, p: f64) -> bool {
        self.conc.push(c);
        self.purity.push(p);
        let n = self.conc.len();
        if self.peak.is_none() && n >= 3 {
            let i = n - 2;
            let v = &self.conc;
            if v[i] > v[i - 1] && v[i] > v[i + 1] && v[i] > PEAK_FLOOR {
                self.peak = first_maximum(&times[..n], v);
            }
        }
        self.peak.is_some()
    }

    fn row(&self, times: &[f64], key: f64, coupling: f64) -> ScanRow {
        match self.peak {
            Some(pk) => {
                let i = pk.index;
                let purity = quadratic_at(&times[i - 1..=i + 1], &self.purity[i - 1..=i + 1], pk.t_peak);
                ScanRow {
                    key,
                    coupling,
                    t_first_max: Some(pk.t_peak),
                    c_first_max: pk.value.clamp(0.0, 1.0),
                    purity_at_max: Some(purity.clamp(0.0, 1.0)),
                }
            }
            None => ScanRow {
                key,
                coupling,
                t_first_max: None,
                c_first_max: self.conc.iter().copied().fold(0.0, f64::max).clamp(0.0, 1.0),
                purity_at_max: None,
            },
        }
    }
}

/// Value at `t` of the parabola through three samples.
fn quadratic_at(x: &[f64], y: &[f64], t: f64) -> f64 {
    (0..3)
        .map(|i| {
            let mut l = y[i];
            for j in (0..3).filter(|&j| j != i) {
                l *= (t - x[j]) / (x[i] - x[j]);
            }
            l
        })
        .sum()
}

/// Evolves `initial` under `h` and records the end-pair quantities of
/// sites `(0, far)` on the sampling grid.
pub fn transfer_series(
    h: &crate::model::HamiltonianSpec,
    initial: &PureState,
    far: usize,
    t_max: f64,
    cfg: &PropagatorConfig,
) -> Result<TimeSeries> {
    let grid = time_grid(t_max, cfg.dt_sample)?;
    let prop = Propagator::new(h, cfg)?;
    let mut members = vec![initial.amplitudes().to_vec()];
    let mut cols: [Vec<f64>; 4] = Default::default();
    drive(&prop, &mut members, &grid, |_, m| {
        let s = EndSample::of(&to_density(&pair_marginal(&m[0], 0, far)))?;
        for (col, v) in cols.iter_mut().zip([s.concurrence, s.purity, s.werner_p, s.avg_fidelity]) {
            col.push(v);
        }
        Ok(true)
    })?;
    let mut series = TimeSeries::new(grid)?;
    for (name, col) in TRANSFER_CHANNELS.iter().zip(cols) {
        series.push_channel(*name, col)?;
    }
    Ok(series)
}

/// End-pair density matrices `rho_{0', N_ch}(t)` on the sampling grid.
pub fn end_pair_states(spec: &ChainSpec, t_max: f64, cfg: &PropagatorConfig) -> Result<(Vec<f64>, Vec<DensityMatrix>)> {
    check_run_size(spec)?;
    let grid = time_grid(t_max, cfg.dt_sample)?;
    let prop = Propagator::new(&total_hamiltonian(spec)?, cfg)?;
    let mut members = vec![initial_state(spec)?.into_amplitudes()];
    let mut out = Vec::with_capacity(grid.len());
    drive(&prop, &mut members, &grid, |_, m| {
        out.push(to_density(&pair_marginal(&m[0], 0, spec.far_end())));
        Ok(true)
    })?;
    Ok((grid, out))
}

/// Concurrence, purity, Werner parameter and average transfer fidelity of
/// the end pair `(0', N_ch)` from the ground-state protocol.
pub fn run_transfer(spec: &ChainSpec, t_max: f64, cfg: &PropagatorConfig) -> Result<TimeSeries> {
    check_run_size(spec)?;
    transfer_series(&total_hamiltonian(spec)?, &initial_state(spec)?, spec.far_end(), t_max, cfg)
}

fn first_peak_row(spec: &ChainSpec, key: f64, t_max: f64, cfg: &PropagatorConfig) -> Result<ScanRow> {
    check_run_size(spec)?;
    let grid = time_grid(t_max, cfg.dt_sample)?;
    let prop = Propagator::new(&total_hamiltonian(spec)?, cfg)?;
    let mut members = vec![initial_state(spec)?.into_amplitudes()];
    let mut tracker = PeakTracker::new();
    drive(&prop, &mut members, &grid, |_, m| {
        let rho = to_density(&pair_marginal(&m[0], 0, spec.far_end()));
        Ok(!tracker.push(&grid, concurrence(&rho)?, purity(&rho)))
    })?;
    Ok(tracker.row(&grid, key, spec.coupling))
}

/// First concurrence maximum for each total length `N = N_ch + 2`, rows in
/// input order. `t_max` defaults to `4 N / |J|`.
pub fn scan_length(lengths: &[usize], coupling: f64, t_max: Option<f64>, cfg: &PropagatorConfig) -> Result<Vec<ScanRow>> {
    cfg.validate()?;
    for &n in lengths {
        if n % 2 != 0 || !(4..=MAX_RUN_SITES).contains(&n) {
            return Err(Error::InvalidParameter(format!("lengths must be even and in 4..={MAX_RUN_SITES}, got {n}")));
        }
    }
    let specs = lengths.iter().map(|&n| ChainSpec::new(n - 2, coupling)).collect::<Result<Vec<_>>>()?;
    specs
        .par_iter()
        .map(|spec| first_peak_row(spec, spec.n_total() as f64, t_max.unwrap_or_else(|| default_t_max(spec)), cfg))
        .collect()
}

/// First concurrence maximum at each temperature (units of |J|/k_B) for the
/// thermal channel. All temperatures share one sweep over the channel
/// eigenstates; members below `weight_cut` at every temperature are skipped.
pub fn scan_temperature(
    spec: &ChainSpec,
    temperatures: &[f64],
    t_max: Option<f64>,
    cfg: &PropagatorConfig,
    weight_cut: Option<f64>,
) -> Result<Vec<ScanRow>> {
    check_run_size(spec)?;
    cfg.validate()?;
    let cut = weight_cut.unwrap_or(DEFAULT_WEIGHT_CUT);
    if !(0.0..1.0).contains(&cut) {
        return Err(Error::InvalidParameter(format!("weight cut must be in [0, 1), got {cut}")));
    }
    if let Some(t) = temperatures.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(Error::InvalidParameter(format!("temperatures must be > 0, got {t}")));
    }
    let spectrum = Spectrum::of(&channel_hamiltonian_with_field(spec)?)?;
    let boltzmann = temperatures
        .iter()
        .map(|t| spectrum.boltzmann(spec.coupling.abs() / t))
        .collect::<Result<Vec<_>>>()?;
    let kept: Vec<usize> = (0..spectrum.len()).filter(|&k| boltzmann.iter().any(|w| w[k] >= cut)).collect();
    let weights: Vec<Vec<f64>> = boltzmann
        .iter()
        .map(|w| {
            let mut v: Vec<f64> = kept.iter().map(|&k| if w[k] >= cut { w[k] } else { 0.0 }).collect();
            let total: f64 = v.iter().sum();
            v.iter_mut().for_each(|x| *x /= total);
            v
        })
        .collect();
    let singlet = PureState::singlet();
    let mut members = kept
        .iter()
        .map(|&k| Ok(singlet.tensor(&spectrum.state(k)?)?.into_amplitudes()))
        .collect::<Result<Vec<_>>>()?;

    let t_max = t_max.unwrap_or_else(|| default_t_max(spec));
    let grid = time_grid(t_max, cfg.dt_sample)?;
    let prop = Propagator::new(&total_hamiltonian(spec)?, cfg)?;
    let far = spec.far_end();
    let mut trackers: Vec<PeakTracker> = temperatures.iter().map(|_| PeakTracker::new()).collect();
    drive(&prop, &mut members, &grid, |_, m| {
        let marginals: Vec<[C64; 16]> = m.par_iter().map(|a| pair_marginal(a, 0, far)).collect();
        let mut all_done = true;
        for (tracker, w) in trackers.iter_mut().zip(&weights) {
            if tracker.peak.is_some() {
                continue;
            }
            let mut acc = [C64::new(0.0, 0.0); 16];
            for (mk, wk) in marginals.iter().zip(w).filter(|(_, w)| **w > 0.0) {
                acc.iter_mut().zip(mk).for_each(|(a, x)| *a += x * *wk);
            }
            let rho = to_density(&acc);
            all_done &= tracker.push(&grid, concurrence(&rho)?, purity(&rho));
        }
        Ok(!all_done)
    })?;
    Ok(trackers.iter().zip(temperatures).map(|(tr, &t)| tr.row(&grid, t, spec.coupling)).collect())
}

/// First concurrence maximum under site-local depolarizing noise at each
/// rate `gamma` (units of |J|). Dense master-equation path, `N <= 8`.
pub fn scan_gamma(
    spec: &ChainSpec,
    gammas: &[f64],
    t_max: Option<f64>,
    dt_sample: f64,
    lindblad: &LindbladConfig,
) -> Result<Vec<ScanRow>> {
    spec.validate()?;
    lindblad.validate()?;
    let h = total_hamiltonian(spec)?;
    let rho0 = initial_state(spec)?.to_density()?;
    let grid = time_grid(t_max.unwrap_or_else(|| default_t_max(spec)), dt_sample)?;
    gammas
        .par_iter()
        .map(|&gamma| {
            let cfg = LindbladConfig { gamma, ..*lindblad };
            let mut integ = LindbladIntegrator::new(&h, &rho0, &cfg)?;
            let mut tracker = PeakTracker::new();
            for (k, &t) in grid.iter().enumerate() {
                if k > 0 {
                    integ.advance(t - grid[k - 1])?;
                }
                let rho = integ.state().partial_trace(&[0, spec.far_end()])?;
                if tracker.push(&grid, concurrence(&rho)?, purity(&rho)) {
                    break;
                }
            }
            Ok(tracker.row(&grid, gamma, spec.coupling))
        })
        .collect()
}

/// Pair concurrences over time and the pairs above [`BOND_THRESHOLD`] at
/// each sample.
#[derive(Debug, Clone, PartialEq)]
pub struct HoppingMap {
    pub series: TimeSeries,
    /// Logical site pairs, in channel order, whose concurrence exceeds the
    /// threshold.
    pub bonds: Vec<Vec<(usize, usize)>>,
}

/// Pairs tracked by [`hopping_map`]: the spectator with every other site,
/// then nearest neighbours along `0, 1, ..., N_ch`.
pub fn hopping_pairs(spec: &ChainSpec) -> Vec<(usize, usize)> {
    let n = spec.n_total();
    (1..n).map(|j| (0, j)).chain((1..n - 1).map(|i| (i, i + 1))).collect()
}

/// Concurrence between the spectator and each chain site plus the nearest
/// neighbour concurrences, channels named `c_<a>_<b>` by site label.
pub fn hopping_map(spec: &ChainSpec, t_max: f64, cfg: &PropagatorConfig) -> Result<HoppingMap> {
    check_run_size(spec)?;
    check_even(spec)?;
    let pairs = hopping_pairs(spec);
    let grid = time_grid(t_max, cfg.dt_sample)?;
    let prop = Propagator::new(&total_hamiltonian(spec)?, cfg)?;
    let mut members = vec![initial_state(spec)?.into_amplitudes()];
    let mut cols = vec![Vec::with_capacity(grid.len()); pairs.len()];
    let mut bonds = Vec::with_capacity(grid.len());
    drive(&prop, &mut members, &grid, |_, m| {
        let values = pairs
            .par_iter()
            .map(|&(a, b)| concurrence(&to_density(&pair_marginal(&m[0], a, b))))
            .collect::<Result<Vec<_>>>()?;
        bonds.push(pairs.iter().zip(&values).filter(|(_, c)| **c > BOND_THRESHOLD).map(|(p, _)| *p).collect());
        cols.iter_mut().zip(values).for_each(|(c, v)| c.push(v));
        Ok(true)
    })?;
    let mut series = TimeSeries::new(grid)?;
    for (&(a, b), col) in pairs.iter().zip(cols) {
        series.push_channel(format!("c_{}_{}", site_label(a), site_label(b)), col)?;
    }
    Ok(HoppingMap { series, bonds })
}

/// Singlet pairings of the hop picture for an even channel, as logical
/// sites. Step `k` pairs the spectator with chain site `2(k-1)` and the
/// remaining sites consecutively.
pub fn ansatz_steps(spec: &ChainSpec) -> Result<Vec<Vec<(usize, usize)>>> {
    check_even(spec)?;
    let n = spec.n_total();
    Ok((1..n)
        .step_by(2)
        .map(|partner| {
            let rest: Vec<usize> = (1..n).filter(|&s| s != partner).collect();
            std::iter::once((0, partner)).chain(rest.chunks(2).map(|c| (c[0], c[1]))).collect()
        })
        .collect())
}

/// Squared overlaps `|<step_k|psi(t)>|^2` with the hop-picture states,
/// channels `step_1, step_2, ...`.
pub fn ansatz_overlap(spec: &ChainSpec, t_max: f64, cfg: &PropagatorConfig) -> Result<TimeSeries> {
    check_run_size(spec)?;
    let steps = ansatz_steps(spec)?
        .iter()
        .map(|pairs| PureState::singlet_product(spec.n_total(), pairs))
        .collect::<Result<Vec<_>>>()?;
    let grid = time_grid(t_max, cfg.dt_sample)?;
    let prop = Propagator::new(&total_hamiltonian(spec)?, cfg)?;
    let mut members = vec![initial_state(spec)?.into_amplitudes()];
    let mut cols = vec![Vec::with_capacity(grid.len()); steps.len()];
    drive(&prop, &mut members, &grid, |_, m| {
        for (col, step) in cols.iter_mut().zip(&steps) {
            let ov: C64 = step.amplitudes().iter().zip(&m[0]).map(|(a, b)| a.conj() * b).sum();
            col.push(ov.norm_sqr());
        }
        Ok(true)
    })?;
    let mut series = TimeSeries::new(grid)?;
    for (k, col) in cols.into_iter().enumerate() {
        series.push_channel(format!("step_{}", k + 1), col)?;
    }
    Ok(series)
}
