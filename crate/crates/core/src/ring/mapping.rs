use rand::seq::SliceRandom;
use rand::Rng;

use super::{validate_shape, MultiPoly};
use crate::error::{param_err, structure_err, Result};

/// A coefficient reordering between two ring shapes of equal total degree.
///
/// Output coefficient `j` (flat, row-major) is input coefficient `perm[j]`.
/// It reindexes coefficients; it is not a ring homomorphism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingMapping {
    source: Vec<usize>,
    target: Vec<usize>,
    perm: Vec<usize>,
}

impl RingMapping {
    pub fn new(source: Vec<usize>, target: Vec<usize>, perm: Vec<usize>) -> Result<Self> {
        validate_shape(&source)?;
        validate_shape(&target)?;
        let n: usize = source.iter().product();
        if target.iter().product::<usize>() != n {
            return Err(structure_err!(
                "shapes {source:?} and {target:?} have different total degree"
            ));
        }
        if perm.len() != n {
            return Err(param_err!("permutation has {} entries, expected {n}", perm.len()));
        }
        let mut seen = vec![false; n];
        for &p in &perm {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(param_err!("not a permutation of 0..{n}"));
            }
        }
        Ok(Self { source, target, perm })
    }

    /// Keeps the flat coefficient order. Splitting `(n)` into `(n / b, b)`
    /// this way sends `z^{b*i + j}` to `x_1^i x_2^j`: blocks of length `b`
    /// become the rows indexed by `x_1`.
    pub fn row_major(source: Vec<usize>, target: Vec<usize>) -> Result<Self> {
        let n = source.iter().product();
        Self::new(source, target, (0..n).collect())
    }

    pub fn random<R: Rng + ?Sized>(source: Vec<usize>, target: Vec<usize>, rng: &mut R) -> Result<Self> {
        let n = source.iter().product();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        Self::new(source, target, perm)
    }

    pub fn source(&self) -> &[usize] {
        &self.source
    }

    pub fn target(&self) -> &[usize] {
        &self.target
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn inverse(&self) -> RingMapping {
        let mut inv = vec![0; self.perm.len()];
        for (j, &p) in self.perm.iter().enumerate() {
            inv[p] = j;
        }
        RingMapping {
            source: self.target.clone(),
            target: self.source.clone(),
            perm: inv,
        }
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &RingMapping) -> Result<RingMapping> {
        if next.source != self.target {
            return Err(structure_err!(
                "cannot chain {:?} -> {:?} with {:?} -> {:?}",
                self.source,
                self.target,
                next.source,
                next.target
            ));
        }
        let perm = next.perm.iter().map(|&p| self.perm[p]).collect();
        Ok(RingMapping {
            source: self.source.clone(),
            target: next.target.clone(),
            perm,
        })
    }
}

pub fn remap(p: &MultiPoly, map: &RingMapping) -> Result<MultiPoly> {
    if p.shape() != map.source.as_slice() {
        return Err(structure_err!(
            "polynomial shape {:?} does not match mapping source {:?}",
            p.shape(),
            map.source
        ));
    }
    let c = p.coeffs();
    let coeffs = map.perm.iter().map(|&i| c[i]).collect();
    MultiPoly::from_coeffs(&map.target, p.modulus(), coeffs)
}
