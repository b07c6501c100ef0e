use nalgebra::DMatrix;

use super::{complement, scatter_offsets, PureState, MAX_DENSE_SITES};
use crate::linalg::hermitian_eigenvalues;
use crate::{Error, Result, C64};

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-8;
pub const EIGEN_FLOOR: f64 = -1e-8;

/// Hermitian, positive-semidefinite, unit-trace matrix over `n_sites` sites.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_sites: usize,
    matrix: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity before wrapping.
    pub fn new(n_sites: usize, matrix: DMatrix<C64>) -> Result<Self> {
        if n_sites == 0 || n_sites > MAX_DENSE_SITES {
            return Err(Error::TooLarge { n_sites, limit: MAX_DENSE_SITES });
        }
        let dim = 1 << n_sites;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::SizeMismatch { expected: dim, found: matrix.nrows() });
        }
        let rho = Self { n_sites, matrix };
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn from_raw(n_sites: usize, matrix: DMatrix<C64>) -> Self {
        debug_assert_eq!(matrix.nrows(), 1 << n_sites);
        Self { n_sites, matrix }
    }

    pub fn from_pure(state: &PureState) -> Result<Self> {
        if state.n_sites() > MAX_DENSE_SITES {
            return Err(Error::TooLarge { n_sites: state.n_sites(), limit: MAX_DENSE_SITES });
        }
        let a = state.amplitudes();
        let dim = a.len();
        let matrix = DMatrix::from_fn(dim, dim, |i, j| a[i] * a[j].conj());
        Ok(Self { n_sites: state.n_sites(), matrix })
    }

    pub fn maximally_mixed(n_sites: usize) -> Result<Self> {
        if n_sites == 0 || n_sites > MAX_DENSE_SITES {
            return Err(Error::TooLarge { n_sites, limit: MAX_DENSE_SITES });
        }
        let dim = 1 << n_sites;
        Ok(Self {
            n_sites,
            matrix: DMatrix::from_diagonal_element(dim, dim, C64::new(1.0 / dim as f64, 0.0)),
        })
    }

    /// Weighted mixture of density matrices over the same sites.
    pub fn mixture<'a>(parts: impl IntoIterator<Item = (f64, &'a DensityMatrix)>) -> Result<Self> {
        let mut acc: Option<DMatrix<C64>> = None;
        let mut n_sites = 0;
        for (w, rho) in parts {
            match acc.as_mut() {
                None => {
                    n_sites = rho.n_sites;
                    acc = Some(rho.matrix.map(|z| z * w));
                }
                Some(m) => {
                    if rho.n_sites != n_sites {
                        return Err(Error::SizeMismatch { expected: n_sites, found: rho.n_sites });
                    }
                    m.zip_apply(&rho.matrix, |a, b| *a += b * w);
                }
            }
        }
        let matrix = acc.ok_or_else(|| Error::InvalidParameter("empty mixture".into()))?;
        Ok(Self { n_sites, matrix })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// Largest elementwise deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in j..n {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    pub fn purity(&self) -> f64 {
        // tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:.3e})")));
        }
        let tr = self.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = self.eigenvalues().first().copied().unwrap_or(0.0);
        if min < EIGEN_FLOOR {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    /// `(rho + rho^dagger) / 2`.
    pub fn hermitized(&self) -> Self {
        let m = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        Self { n_sites: self.n_sites, matrix: m }
    }

    /// Frobenius distance between two matrices on the same sites.
    pub fn distance(&self, other: &Self) -> f64 {
        crate::linalg::frobenius(&(&self.matrix - &other.matrix))
    }

    /// Reduced matrix on `keep`, in the order given.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let rest = complement(keep, self.n_sites)?;
        let kept = scatter_offsets(keep);
        let traced = scatter_offsets(&rest);
        let k = kept.len();
        let matrix = DMatrix::from_fn(k, k, |a, b| {
            traced
                .iter()
                .map(|&r| self.matrix[(kept[a] | r, kept[b] | r)])
                .sum()
        });
        Ok(Self { n_sites: keep.len(), matrix })
    }
}
