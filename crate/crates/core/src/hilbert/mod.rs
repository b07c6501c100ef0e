//! State algebra over the computational basis of `n` spin-1/2 sites.
//!
//! Basis index `i` stores the spin of site `k` in bit `k`; bit value 1 is the
//! state `|1>`, the sigma-z eigenvector with eigenvalue -1.

mod density;
mod sector;
mod state;

pub use density::{DensityMatrix, EIGEN_FLOOR, HERMITIAN_TOL, TRACE_TOL};
pub use sector::{binomial, SzSector};
pub use state::{Pauli, PureState};

/// Largest register handled by the pure-state path.
pub const MAX_PURE_SITES: usize = 24;

/// Largest register for which full density matrices are formed.
pub const MAX_DENSE_SITES: usize = 14;

/// Scatter tables mapping a compact index over `sites` onto the full index.
/// Entry `k` sets bit `sites[j]` whenever bit `j` of `k` is set.
pub(crate) fn scatter_offsets(sites: &[usize]) -> Vec<usize> {
    let len = 1usize << sites.len();
    let mut out = vec![0usize; len];
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = sites
            .iter()
            .enumerate()
            .filter(|(j, _)| k >> j & 1 == 1)
            .fold(0, |acc, (_, &s)| acc | 1 << s);
    }
    out
}

/// Validates a site selection and returns the traced-out complement, ascending.
pub(crate) fn complement(keep: &[usize], n_sites: usize) -> crate::Result<Vec<usize>> {
    let mut seen = vec![false; n_sites];
    for &s in keep {
        if s >= n_sites {
            return Err(crate::Error::SiteOutOfRange { site: s, n_sites });
        }
        if seen[s] {
            return Err(crate::Error::DuplicateSite(s));
        }
        seen[s] = true;
    }
    Ok((0..n_sites).filter(|&s| !seen[s]).collect())
}
