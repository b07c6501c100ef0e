use std::ops::{AddAssign, Mul};

use nalgebra::DMatrix;

use crate::hilbert::{PureState, SzSector, MAX_PURE_SITES};
use crate::{Error, Result, C64};

/// Exchange term `strength * sigma_a . sigma_b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub strength: f64,
}

/// Heisenberg Hamiltonian `sum_bonds J sigma_a . sigma_b + sum_k h_k sigma_z^k`.
///
/// In the computational basis an aligned bond contributes `+J` on the
/// diagonal; an anti-aligned bond contributes `-J` on the diagonal and `2J`
/// to the state with both bits swapped.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpec {
    n_sites: usize,
    bonds: Vec<Bond>,
    field_z: Vec<f64>,
}

impl HamiltonianSpec {
    pub fn new(n_sites: usize, bonds: Vec<Bond>) -> Result<Self> {
        if n_sites == 0 || n_sites > MAX_PURE_SITES {
            return Err(Error::InvalidParameter(format!("hamiltonian over {n_sites} sites")));
        }
        for bond in &bonds {
            if bond.a >= n_sites || bond.b >= n_sites {
                return Err(Error::SiteOutOfRange { site: bond.a.max(bond.b), n_sites });
            }
            if bond.a == bond.b {
                return Err(Error::InvalidParameter(format!("bond couples site {} to itself", bond.a)));
            }
            if !bond.strength.is_finite() {
                return Err(Error::InvalidParameter("non-finite bond strength".into()));
            }
        }
        Ok(Self { n_sites, bonds, field_z: vec![0.0; n_sites] })
    }

    /// Adds `eps * sigma_z` on every site.
    pub fn with_uniform_field(mut self, eps: f64) -> Self {
        self.field_z.iter_mut().for_each(|h| *h = eps);
        self
    }

    pub fn with_field(mut self, field_z: Vec<f64>) -> Result<Self> {
        if field_z.len() != self.n_sites {
            return Err(Error::SizeMismatch { expected: self.n_sites, found: field_z.len() });
        }
        self.field_z = field_z;
        Ok(self)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn field_z(&self) -> &[f64] {
        &self.field_z
    }

    /// Same bonds and field with every coefficient multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n_sites: self.n_sites,
            bonds: self
                .bonds
                .iter()
                .map(|b| Bond { strength: b.strength * factor, ..*b })
                .collect(),
            field_z: self.field_z.iter().map(|h| h * factor).collect(),
        }
    }

    /// Diagonal matrix element of basis state `mask`.
    #[inline]
    pub fn diagonal(&self, mask: usize) -> f64 {
        let mut d = 0.0;
        for bond in &self.bonds {
            let aligned = (mask >> bond.a & 1) == (mask >> bond.b & 1);
            d += if aligned { bond.strength } else { -bond.strength };
        }
        for (k, h) in self.field_z.iter().enumerate() {
            if *h != 0.0 {
                d += if mask >> k & 1 == 0 { *h } else { -*h };
            }
        }
        d
    }

    /// Upper bound on the spectral norm.
    pub fn norm_bound(&self) -> f64 {
        self.bonds.iter().map(|b| 3.0 * b.strength.abs()).sum::<f64>()
            + self.field_z.iter().map(|h| h.abs()).sum::<f64>()
    }

    /// `y = H x` over the full register.
    pub fn apply_into(&self, x: &[C64], y: &mut [C64]) -> Result<()> {
        let dim = self.dim();
        if x.len() != dim || y.len() != dim {
            return Err(Error::SizeMismatch { expected: dim, found: x.len().min(y.len()) });
        }
        y.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for (i, &xi) in x.iter().enumerate() {
            if xi == C64::new(0.0, 0.0) {
                continue;
            }
            y[i] += xi * self.diagonal(i);
            for bond in &self.bonds {
                if (i >> bond.a & 1) != (i >> bond.b & 1) {
                    let j = i ^ (1 << bond.a | 1 << bond.b);
                    y[j] += xi * (2.0 * bond.strength);
                }
            }
        }
        Ok(())
    }

    pub fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        let mut y = vec![C64::new(0.0, 0.0); x.len()];
        self.apply_into(x, &mut y)?;
        Ok(y)
    }

    pub fn apply_state(&self, s: &PureState) -> Result<Vec<C64>> {
        if s.n_sites() != self.n_sites {
            return Err(Error::SizeMismatch { expected: self.n_sites, found: s.n_sites() });
        }
        self.apply(s.amplitudes())
    }

    /// `<s|H|s>`.
    pub fn expectation(&self, s: &PureState) -> Result<f64> {
        let hs = self.apply_state(s)?;
        Ok(s.amplitudes().iter().zip(&hs).map(|(a, b)| (a.conj() * b).re).sum())
    }

    /// Dense real matrix over the full register. Limited to 14 sites.
    pub fn dense(&self) -> Result<DMatrix<f64>> {
        if self.n_sites > 14 {
            return Err(Error::TooLarge { n_sites: self.n_sites, limit: 14 });
        }
        let dim = self.dim();
        let mut m = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = self.diagonal(i);
            for bond in &self.bonds {
                if (i >> bond.a & 1) != (i >> bond.b & 1) {
                    let j = i ^ (1 << bond.a | 1 << bond.b);
                    m[(j, i)] += 2.0 * bond.strength;
                }
            }
        }
        Ok(m)
    }

    /// Sparse restriction to one sigma-z sector.
    pub fn sector_operator(&self, sector: &SzSector) -> Result<SectorOperator> {
        if sector.n_sites() != self.n_sites {
            return Err(Error::SizeMismatch { expected: self.n_sites, found: sector.n_sites() });
        }
        let n = sector.len();
        let mut diag = Vec::with_capacity(n);
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for &mask in sector.masks() {
            diag.push(self.diagonal(mask));
            for bond in &self.bonds {
                if (mask >> bond.a & 1) != (mask >> bond.b & 1) {
                    let j = mask ^ (1 << bond.a | 1 << bond.b);
                    cols.push(sector.rank(j) as u32);
                    vals.push(2.0 * bond.strength);
                }
            }
            row_ptr.push(cols.len());
        }
        Ok(SectorOperator { ones: sector.ones(), diag, row_ptr, cols, vals })
    }
}

/// Real symmetric sector block in compressed-row form.
#[derive(Debug, Clone)]
pub struct SectorOperator {
    ones: usize,
    diag: Vec<f64>,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl SectorOperator {
    pub fn ones(&self) -> usize {
        self.ones
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// `y = H x`; works for real and complex vectors.
    pub fn apply_into<T>(&self, x: &[T], y: &mut [T])
    where
        T: Copy + Default + AddAssign + Mul<f64, Output = T>,
    {
        debug_assert_eq!(x.len(), self.dim());
        for (row, out) in y.iter_mut().enumerate() {
            let mut acc = x[row] * self.diag[row];
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                acc += x[self.cols[k] as usize] * self.vals[k];
            }
            *out = acc;
        }
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for row in 0..n {
            m[(row, row)] = self.diag[row];
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                m[(row, self.cols[k] as usize)] += self.vals[k];
            }
        }
        m
    }
}
