use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;

use super::{complement, scatter_offsets, DensityMatrix, MAX_PURE_SITES};
use crate::{Error, Result, C64};

const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];
}

/// Normalized amplitude vector over `2^n_sites` basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n_sites: usize,
    amplitudes: Vec<C64>,
}

fn check_sites(n_sites: usize) -> Result<()> {
    if n_sites == 0 || n_sites > MAX_PURE_SITES {
        return Err(Error::InvalidParameter(format!(
            "number of sites must be in 1..={MAX_PURE_SITES}, got {n_sites}"
        )));
    }
    Ok(())
}

impl PureState {
    /// Wraps an amplitude vector that must already be normalized.
    pub fn new(n_sites: usize, amplitudes: Vec<C64>) -> Result<Self> {
        check_sites(n_sites)?;
        if amplitudes.len() != 1 << n_sites {
            return Err(Error::SizeMismatch { expected: 1 << n_sites, found: amplitudes.len() });
        }
        let state = Self { n_sites, amplitudes };
        let norm = state.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(state)
    }

    /// Normalizes an arbitrary non-zero amplitude vector.
    pub fn normalize(n_sites: usize, mut amplitudes: Vec<C64>) -> Result<Self> {
        check_sites(n_sites)?;
        if amplitudes.len() != 1 << n_sites {
            return Err(Error::SizeMismatch { expected: 1 << n_sites, found: amplitudes.len() });
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized(norm));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(Self { n_sites, amplitudes })
    }

    pub(crate) fn from_raw(n_sites: usize, amplitudes: Vec<C64>) -> Self {
        debug_assert_eq!(amplitudes.len(), 1 << n_sites);
        Self { n_sites, amplitudes }
    }

    /// Computational basis state; character `k` of `bits` is the spin of site `k`.
    pub fn basis_state(n_sites: usize, bits: &str) -> Result<Self> {
        check_sites(n_sites)?;
        if bits.chars().count() != n_sites {
            return Err(Error::SizeMismatch { expected: n_sites, found: bits.chars().count() });
        }
        let mut index = 0usize;
        for (k, c) in bits.chars().enumerate() {
            match c {
                '0' => {}
                '1' => index |= 1 << k,
                _ => return Err(Error::InvalidBits(bits.to_string())),
            }
        }
        Self::from_index(n_sites, index)
    }

    pub fn from_index(n_sites: usize, index: usize) -> Result<Self> {
        check_sites(n_sites)?;
        if index >> n_sites != 0 {
            return Err(Error::InvalidParameter(format!("basis index {index} exceeds {n_sites} sites")));
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); 1 << n_sites];
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(Self { n_sites, amplitudes })
    }

    /// `(|01> - |10>)/sqrt(2)` on two sites.
    pub fn singlet() -> Self {
        let mut amplitudes = vec![C64::new(0.0, 0.0); 4];
        amplitudes[0b10] = C64::new(FRAC_1_SQRT_2, 0.0);
        amplitudes[0b01] = C64::new(-FRAC_1_SQRT_2, 0.0);
        Self { n_sites: 2, amplitudes }
    }

    /// Product of singlets on the given disjoint site pairs; every site must
    /// be covered exactly once.
    pub fn singlet_product(n_sites: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        check_sites(n_sites)?;
        let mut order = Vec::with_capacity(n_sites);
        for &(a, b) in pairs {
            order.push(a);
            order.push(b);
        }
        let rest = complement(&order, n_sites)?;
        if !rest.is_empty() {
            return Err(Error::InvalidParameter(format!("sites {rest:?} are not paired")));
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); 1 << n_sites];
        let amp = FRAC_1_SQRT_2.powi(pairs.len() as i32);
        // each pair contributes |01> (+) or |10> (-) in (first, second) order
        for choice in 0usize..1 << pairs.len() {
            let mut index = 0usize;
            let mut sign = 1.0;
            for (p, &(a, b)) in pairs.iter().enumerate() {
                if choice >> p & 1 == 0 {
                    index |= 1 << b;
                } else {
                    index |= 1 << a;
                    sign = -sign;
                }
            }
            amplitudes[index] = C64::new(sign * amp, 0.0);
        }
        Ok(Self { n_sites, amplitudes })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn apply_pauli(&self, site: usize, axis: Pauli) -> Result<Self> {
        if site >= self.n_sites {
            return Err(Error::SiteOutOfRange { site, n_sites: self.n_sites });
        }
        let mask = 1usize << site;
        let mut out = vec![C64::new(0.0, 0.0); self.dim()];
        for (i, &a) in self.amplitudes.iter().enumerate() {
            let down = i & mask != 0;
            match axis {
                Pauli::X => out[i ^ mask] = a,
                Pauli::Y => out[i ^ mask] = if down { C64::new(0.0, -1.0) } else { C64::new(0.0, 1.0) } * a,
                Pauli::Z => out[i] = if down { -a } else { a },
            }
        }
        Ok(Self { n_sites: self.n_sites, amplitudes: out })
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.n_sites != other.n_sites {
            return Err(Error::SizeMismatch { expected: self.n_sites, found: other.n_sites });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `self (x) other`, with `self` on the lower-indexed sites.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let n_sites = self.n_sites + other.n_sites;
        check_sites(n_sites)?;
        let mut amplitudes = Vec::with_capacity(1 << n_sites);
        for b in &other.amplitudes {
            amplitudes.extend(self.amplitudes.iter().map(|a| a * b));
        }
        Ok(Self { n_sites, amplitudes })
    }

    /// Euclidean distance between amplitude vectors.
    pub fn distance(&self, other: &Self) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Expectation of the total `sum_k sigma_z^k`.
    pub fn total_sz(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| a.norm_sqr() * (self.n_sites as f64 - 2.0 * i.count_ones() as f64))
            .sum()
    }

    /// Reduced density matrix on `keep`, in the order given. Bit `j` of the
    /// reduced index holds site `keep[j]`.
    ///
    /// Works from the amplitudes directly, so memory is `4^|keep|`.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let rest = complement(keep, self.n_sites)?;
        let kept = scatter_offsets(keep);
        let traced = scatter_offsets(&rest);
        let k = kept.len();
        let mut rho = DMatrix::<C64>::zeros(k, k);
        let mut buf = vec![C64::new(0.0, 0.0); k];
        for &r in &traced {
            let mut any = false;
            for (slot, &o) in buf.iter_mut().zip(&kept) {
                *slot = self.amplitudes[o | r];
                any |= *slot != C64::new(0.0, 0.0);
            }
            if !any {
                continue;
            }
            for col in 0..k {
                let c = buf[col].conj();
                if c == C64::new(0.0, 0.0) {
                    continue;
                }
                for row in col..k {
                    rho[(row, col)] += buf[row] * c;
                }
            }
        }
        for col in 0..k {
            rho[(col, col)].im = 0.0;
            for row in col + 1..k {
                rho[(col, row)] = rho[(row, col)].conj();
            }
        }
        Ok(DensityMatrix::from_raw(keep.len(), rho))
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        DensityMatrix::from_pure(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_state(n: usize, seed: u64) -> PureState {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let amps = (0..1 << n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        PureState::normalize(n, amps).unwrap()
    }

    #[test]
    fn basis_state_encodes_bits_little_endian() {
        assert_eq!(PureState::basis_state(1, "0").unwrap().amplitudes(), &[c(1.0, 0.0), c(0.0, 0.0)]);
        let s = PureState::basis_state(2, "01").unwrap();
        assert_eq!(s.amplitudes()[0b10], c(1.0, 0.0));
        assert_eq!(s.amplitudes().iter().filter(|a| a.norm() > 0.0).count(), 1);
        assert_eq!(PureState::basis_state(3, "111").unwrap().amplitudes()[7], c(1.0, 0.0));
    }

    #[test]
    fn basis_state_rejects_bad_input() {
        assert!(matches!(PureState::basis_state(2, "0"), Err(Error::SizeMismatch { .. })));
        assert!(matches!(PureState::basis_state(2, "0x"), Err(Error::InvalidBits(_))));
    }

    #[test]
    fn pauli_actions() {
        let zero = PureState::basis_state(1, "0").unwrap();
        let one = PureState::basis_state(1, "1").unwrap();
        assert_eq!(zero.apply_pauli(0, Pauli::X).unwrap(), one);
        assert_eq!(zero.apply_pauli(0, Pauli::Y).unwrap().amplitudes(), &[c(0.0, 0.0), c(0.0, 1.0)]);
        let s = PureState::basis_state(2, "01").unwrap();
        let z = s.apply_pauli(1, Pauli::Z).unwrap();
        assert_eq!(z.amplitudes()[0b10], c(-1.0, 0.0));
        assert!(matches!(s.apply_pauli(2, Pauli::X), Err(Error::SiteOutOfRange { .. })));
    }

    #[test]
    fn pauli_is_an_involution() {
        let s = random_state(5, 3);
        for site in 0..5 {
            for axis in Pauli::ALL {
                let back = s.apply_pauli(site, axis).unwrap().apply_pauli(site, axis).unwrap();
                assert!(back.distance(&s) < 1e-12);
            }
        }
    }

    #[test]
    fn inner_products() {
        let zero = PureState::basis_state(1, "0").unwrap();
        let one = PureState::basis_state(1, "1").unwrap();
        assert_eq!(zero.inner(&zero).unwrap(), c(1.0, 0.0));
        assert_eq!(zero.inner(&one).unwrap(), c(0.0, 0.0));
        let s = PureState::singlet();
        assert!((s.inner(&s).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        assert!(zero.inner(&s).is_err());
    }

    #[test]
    fn tensor_places_left_factor_on_low_sites() {
        let zero = PureState::basis_state(1, "0").unwrap();
        let one = PureState::basis_state(1, "1").unwrap();
        assert_eq!(zero.tensor(&one).unwrap(), PureState::basis_state(2, "01").unwrap());
        let t = PureState::singlet().tensor(&zero).unwrap();
        assert_eq!(t.n_sites(), 3);
        // "010" and "100" in logical order
        assert!((t.amplitudes()[0b010] - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((t.amplitudes()[0b001] + c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        let a = random_state(3, 1);
        let b = random_state(2, 2);
        assert!((a.tensor(&b).unwrap().norm() - a.norm() * b.norm()).abs() < 1e-12);
    }

    #[test]
    fn singlet_product_matches_tensor_of_singlets() {
        let direct = PureState::singlet().tensor(&PureState::singlet()).unwrap();
        let built = PureState::singlet_product(4, &[(0, 1), (2, 3)]).unwrap();
        assert!(direct.distance(&built) < 1e-15);
        assert!(PureState::singlet_product(3, &[(0, 1)]).is_err());
    }

    #[test]
    fn partial_trace_examples() {
        let half = PureState::singlet().partial_trace(&[0]).unwrap();
        let expected = DMatrix::from_diagonal_element(2, 2, c(0.5, 0.0));
        assert!((half.matrix() - expected).norm() < 1e-15);

        let product = PureState::basis_state(2, "01").unwrap().partial_trace(&[0]).unwrap();
        assert_eq!(product.matrix()[(0, 0)], c(1.0, 0.0));
        assert_eq!(product.matrix()[(1, 1)], c(0.0, 0.0));
    }

    #[test]
    fn partial_trace_rejects_bad_selection() {
        let s = random_state(3, 5);
        assert!(matches!(s.partial_trace(&[0, 0]), Err(Error::DuplicateSite(0))));
        assert!(matches!(s.partial_trace(&[3]), Err(Error::SiteOutOfRange { .. })));
    }

    #[test]
    fn partial_trace_reorders_sites() {
        // |0>_0 |1>_1: keeping [1, 0] puts site 1 in bit 0
        let s = PureState::basis_state(2, "01").unwrap();
        let rho = s.partial_trace(&[1, 0]).unwrap();
        assert_eq!(rho.matrix()[(0b01, 0b01)], c(1.0, 0.0));
    }

    #[test]
    fn schmidt_spectra_agree_on_complementary_marginals() {
        for seed in 0..4 {
            let s = random_state(6, 100 + seed);
            let a = s.partial_trace(&[0, 2]).unwrap().eigenvalues();
            let b = s.partial_trace(&[1, 3, 4, 5]).unwrap().eigenvalues();
            let mut nonzero_b: Vec<f64> = b.into_iter().filter(|v| *v > 1e-10).collect();
            nonzero_b.sort_by(f64::total_cmp);
            let nonzero_a: Vec<f64> = a.into_iter().filter(|v| *v > 1e-10).collect();
            assert_eq!(nonzero_a.len(), nonzero_b.len());
            for (x, y) in nonzero_a.iter().zip(&nonzero_b) {
                assert!((x - y).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn partial_trace_composes() {
        let s = random_state(5, 9);
        let direct = s.partial_trace(&[3, 1]).unwrap();
        let staged = s.partial_trace(&[1, 3, 4]).unwrap().partial_trace(&[1, 0]).unwrap();
        assert!((direct.matrix() - staged.matrix()).norm() < 1e-10);
        let all = s.partial_trace(&[0, 1, 2, 3, 4]).unwrap();
        let full = s.to_density().unwrap();
        assert!((all.matrix() - full.matrix()).norm() < 1e-12);
    }

    #[test]
    fn total_sz_counts_ones_as_down() {
        assert_eq!(PureState::basis_state(3, "011").unwrap().total_sz(), -1.0);
        assert!(PureState::singlet().total_sz().abs() < 1e-15);
    }
}
