//! Entanglement and fidelity functionals on one- and two-qubit states, and
//! peak/onset detection on sampled traces.
//!
//! Two-qubit matrices are indexed by `b0 + 2 b1`, where `b0` is the bit of
//! the first kept site. In that basis the singlet is `(|2> - |1>)/sqrt(2)`.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;

use crate::hilbert::{DensityMatrix, PureState, EIGEN_FLOOR};
use crate::linalg::{hermitian_eigenvalues, hermitian_eigh};
use crate::{Error, Result, C64};

/// Local maxima at or below this value are treated as round-off and skipped.
pub const PEAK_FLOOR: f64 = 1e-6;

/// Werner entanglement threshold on the singlet weight `p`.
pub const WERNER_THRESHOLD: f64 = 1.0 / 3.0;

fn check_two_qubit(rho: &DensityMatrix) -> Result<()> {
    if rho.n_sites() != 2 {
        return Err(Error::SizeMismatch { expected: 2, found: rho.n_sites() });
    }
    Ok(())
}

fn is_x_shaped(m: &DMatrix<C64>) -> bool {
    (0..4).all(|i| (0..4).all(|j| i == j || i + j == 3 || m[(i, j)] == C64::new(0.0, 0.0)))
}

/// Wootters concurrence `max(0, l1 - l2 - l3 - l4)`, with `l_i` the
/// decreasing square roots of the eigenvalues of `rho (sy sy) rho* (sy sy)`.
///
/// States whose only non-zero entries lie on the diagonal and anti-diagonal
/// (every state of a sigma-z conserving evolution) use the exact closed
/// form, which avoids square roots of round-off-sized eigenvalues.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    check_two_qubit(rho)?;
    let m = rho.matrix();
    let min = hermitian_eigenvalues(m)[0];
    if min < EIGEN_FLOOR {
        return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
    }
    if is_x_shaped(m) {
        let d = |i: usize| m[(i, i)].re.max(0.0);
        let a = m[(1, 2)].norm() - (d(0) * d(3)).sqrt();
        let b = m[(0, 3)].norm() - (d(1) * d(2)).sqrt();
        return Ok((2.0 * a.max(b)).max(0.0));
    }
    // rho = W W^dagger; the l_i are the singular values of tau = W^T (sy sy) W,
    // which avoids square roots of round-off-sized eigenvalues
    let (values, vectors) = hermitian_eigh(m);
    let w = DMatrix::from_fn(4, 4, |i, k| vectors[(i, k)] * values[k].max(0.0).sqrt());
    let s = [-1.0, 1.0, 1.0, -1.0];
    let flip = DMatrix::from_fn(4, 4, |a, b| if a + b == 3 { C64::new(s[a], 0.0) } else { C64::new(0.0, 0.0) });
    let tau = w.transpose() * flip * &w;
    let mut lambdas: Vec<f64> = tau.singular_values().iter().copied().collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}

/// `tr(rho^2)`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.purity()
}

/// The singlet as a two-site state.
pub fn singlet() -> PureState {
    PureState::singlet()
}

/// `p |psi^-><psi^-| + (1 - p) I/4`.
pub fn werner_state(p: f64) -> DensityMatrix {
    let mut m = DMatrix::from_diagonal_element(4, 4, C64::new((1.0 - p) / 4.0, 0.0));
    let h = p / 2.0;
    m[(1, 1)] += h;
    m[(2, 2)] += h;
    m[(1, 2)] -= h;
    m[(2, 1)] -= h;
    DensityMatrix::new(2, m).expect("Werner states are valid for p in [-1/3, 1]")
}

/// Singlet weight `p = (4 F_s - 1)/3` of the closest Werner state, with
/// `F_s = <psi^-|rho|psi^->`, and the Frobenius distance to that state.
pub fn werner_parameter(rho: &DensityMatrix) -> Result<(f64, f64)> {
    check_two_qubit(rho)?;
    let m = rho.matrix();
    let fs = 0.5 * (m[(1, 1)] + m[(2, 2)] - m[(1, 2)] - m[(2, 1)]).re;
    let p = (4.0 * fs - 1.0) / 3.0;
    let mut w = DMatrix::from_diagonal_element(4, 4, C64::new((1.0 - p) / 4.0, 0.0));
    w[(1, 1)] += p / 2.0;
    w[(2, 2)] += p / 2.0;
    w[(1, 2)] -= p / 2.0;
    w[(2, 1)] -= p / 2.0;
    Ok((p, crate::linalg::frobenius(&(m - w))))
}

/// The six sigma-x, sigma-y, sigma-z eigenstates.
pub fn axial_states() -> [PureState; 6] {
    let r = FRAC_1_SQRT_2;
    let mk = |a: C64, b: C64| PureState::new(1, vec![a, b]).expect("normalized");
    [
        mk(C64::new(1.0, 0.0), C64::new(0.0, 0.0)),
        mk(C64::new(0.0, 0.0), C64::new(1.0, 0.0)),
        mk(C64::new(r, 0.0), C64::new(r, 0.0)),
        mk(C64::new(r, 0.0), C64::new(-r, 0.0)),
        mk(C64::new(r, 0.0), C64::new(0.0, r)),
        mk(C64::new(r, 0.0), C64::new(0.0, -r)),
    ]
}

/// `<psi|rho|psi>` for a single qubit.
pub fn state_fidelity(input: &PureState, rho: &DensityMatrix) -> Result<f64> {
    if rho.n_sites() != input.n_sites() {
        return Err(Error::SizeMismatch { expected: input.n_sites(), found: rho.n_sites() });
    }
    let a = input.amplitudes();
    let m = rho.matrix();
    let mut f = C64::new(0.0, 0.0);
    for i in 0..a.len() {
        for j in 0..a.len() {
            f += a[i].conj() * m[(i, j)] * a[j];
        }
    }
    Ok(f.re)
}

/// Bloch-sphere average of the transfer fidelity of a single-qubit channel.
///
/// The six axial states form a spherical 2-design, and the fidelity is a
/// quadratic function on the sphere, so their mean equals the uniform average.
pub fn average_fidelity<F>(mut channel: F) -> Result<f64>
where
    F: FnMut(&PureState) -> Result<DensityMatrix>,
{
    let mut total = 0.0;
    for input in axial_states() {
        let out = channel(&input)?;
        if out.n_sites() != 1 {
            return Err(Error::SizeMismatch { expected: 1, found: out.n_sites() });
        }
        total += state_fidelity(&input, &out)?;
    }
    Ok(total / 6.0)
}

/// Average fidelity of the depolarizing channel whose Choi state is the
/// Werner state with singlet weight `p`: the Bloch vector shrinks by `p`.
pub fn werner_average_fidelity(p: f64) -> f64 {
    (1.0 + p) / 2.0
}

/// `<psi-|rho_W(p)|psi->`.
pub fn werner_singlet_fraction(p: f64) -> f64 {
    (3.0 * p + 1.0) / 4.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakResult {
    pub t_peak: f64,
    pub value: f64,
    /// Index of the sample at the local maximum.
    pub index: usize,
    /// Whether the parabolic refinement was applied.
    pub refined: bool,
}

/// First interior sample strictly above both neighbours and above
/// [`PEAK_FLOOR`], refined by the parabola through the three samples.
pub fn first_maximum(times: &[f64], values: &[f64]) -> Option<PeakResult> {
    if times.len() != values.len() || values.len() < 3 {
        return None;
    }
    (1..values.len() - 1)
        .find(|&i| values[i] > values[i - 1] && values[i] > values[i + 1] && values[i] > PEAK_FLOOR)
        .map(|i| refine(times, values, i))
}

fn refine(times: &[f64], values: &[f64], i: usize) -> PeakResult {
    let (x0, x1, x2) = (times[i - 1], times[i], times[i + 1]);
    let (y0, y1, y2) = (values[i - 1], values[i], values[i + 1]);
    // vertex of the interpolating parabola
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let a = (d12 - d01) / (x2 - x0);
    if a >= 0.0 || !a.is_finite() {
        return PeakResult { t_peak: x1, value: y1, index: i, refined: false };
    }
    let b = d01 - a * (x0 + x1);
    let t = -b / (2.0 * a);
    let value = y1 + d01 * (t - x1) + a * (t - x0) * (t - x1);
    PeakResult { t_peak: t, value, index: i, refined: true }
}

/// First time `p` rises above `threshold`, linearly interpolated.
pub fn onset_time(times: &[f64], p: &[f64], threshold: f64) -> Option<f64> {
    let first = *p.first()?;
    if first > threshold {
        return times.first().copied();
    }
    (1..p.len().min(times.len()))
        .find(|&i| p[i] > threshold && p[i - 1] <= threshold)
        .map(|i| {
            let f = (threshold - p[i - 1]) / (p[i] - p[i - 1]);
            times[i - 1] + f * (times[i] - times[i - 1])
        })
}
