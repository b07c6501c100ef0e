use super::MAX_PURE_SITES;
use crate::{Error, Result, C64};

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Basis states with a fixed number of set bits (a fixed total sigma-z).
///
/// `ones` counts bits equal to 1, i.e. down spins; total sigma-z is
/// `n_sites - 2 * ones`. Masks are stored in increasing order, which is the
/// colexicographic order, so positions follow from the combinatorial number
/// system without a lookup table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SzSector {
    n_sites: usize,
    ones: usize,
    masks: Vec<usize>,
    // choose[p][j] = C(p, j)
    choose: Vec<Vec<usize>>,
}

impl SzSector {
    pub fn new(n_sites: usize, ones: usize) -> Result<Self> {
        if n_sites == 0 || n_sites > MAX_PURE_SITES {
            return Err(Error::InvalidParameter(format!("sector over {n_sites} sites")));
        }
        if ones > n_sites {
            return Err(Error::InvalidSector { ones, n_sites });
        }
        let len = binomial(n_sites, ones);
        let mut masks = Vec::with_capacity(len);
        if ones == 0 {
            masks.push(0);
        } else {
            // Gosper's hack: next larger integer with the same popcount
            let mut m: usize = (1 << ones) - 1;
            while m < 1 << n_sites {
                masks.push(m);
                let c = m & m.wrapping_neg();
                let r = m + c;
                m = (((r ^ m) >> 2) / c) | r;
            }
        }
        debug_assert_eq!(masks.len(), len);
        let choose = (0..=n_sites)
            .map(|p| (0..=ones + 1).map(|j| binomial(p, j)).collect())
            .collect();
        Ok(Self { n_sites, ones, masks, choose })
    }

    /// Every sector of an `n_sites` register, by increasing number of ones.
    pub fn all(n_sites: usize) -> Result<Vec<Self>> {
        (0..=n_sites).map(|k| Self::new(n_sites, k)).collect()
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn ones(&self) -> usize {
        self.ones
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn masks(&self) -> &[usize] {
        &self.masks
    }

    /// Position of `mask` within the sector.
    pub fn index_of(&self, mask: usize) -> Option<usize> {
        if mask >> self.n_sites != 0 || mask.count_ones() as usize != self.ones {
            return None;
        }
        Some(self.rank(mask))
    }

    /// Position of a mask known to belong to the sector.
    #[inline]
    pub(crate) fn rank(&self, mut mask: usize) -> usize {
        let mut r = 0;
        let mut j = 1;
        while mask != 0 {
            let p = mask.trailing_zeros() as usize;
            r += self.choose[p][j];
            j += 1;
            mask &= mask - 1;
        }
        r
    }

    /// Components of a full-register vector that lie in this sector.
    pub fn project(&self, full: &[C64]) -> Vec<C64> {
        self.masks.iter().map(|&m| full[m]).collect()
    }

    /// Writes sector components back into a full-register vector.
    pub fn embed(&self, part: &[C64], full: &mut [C64]) {
        for (&m, &a) in self.masks.iter().zip(part) {
            full[m] = a;
        }
    }
}
