//! Multivariate negacyclic polynomial rings `Z_M[x_1..x_m] / (x_i^{n_i} + 1)`.
//!
//! Coefficients are stored flat in row-major order with `x_1` varying
//! slowest, so a polynomial over degrees `(n_1, .., n_m)` is an
//! `n_1 x .. x n_m` tensor. Residues are canonical, in `[0, modulus)`.

mod decompose;
mod mapping;
mod ntt;

pub use decompose::{base_decompose, digit_count, BaseDecomposition};
pub use mapping::{remap, RingMapping};
pub use ntt::{axis_ntt, find_root, NttDirection, RootKind};
pub(crate) use ntt::{forward_all as ntt_forward_all, inverse_all as ntt_inverse_all};

use crate::arith::{self, MODULUS_CEILING};
use crate::error::{param_err, structure_err, Result};

/// Ring parameters: per-variable degrees plus coefficient and plaintext moduli.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RingParams {
    degrees: Vec<usize>,
    q: u64,
    t: u64,
}

impl RingParams {
    pub fn new(degrees: Vec<usize>, q: u64, t: u64) -> Result<Self> {
        validate_shape(&degrees)?;
        if q >= MODULUS_CEILING {
            return Err(param_err!("q = {q} exceeds the 2^62 arithmetic ceiling"));
        }
        if q < 3 || !arith::is_prime(q) {
            return Err(param_err!("q = {q} is not an odd prime"));
        }
        let max = *degrees.iter().max().unwrap() as u64;
        if (q - 1) % (2 * max) != 0 {
            return Err(param_err!("q = {q} is not 1 mod 2*{max}"));
        }
        if t < 2 || t >= q {
            return Err(param_err!("plaintext modulus t = {t} must satisfy 2 <= t < q"));
        }
        if arith::gcd(t, q) != 1 {
            return Err(param_err!("t = {t} and q = {q} are not coprime"));
        }
        Ok(Self { degrees, q, t })
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn vars(&self) -> usize {
        self.degrees.len()
    }

    /// Total degree `n = prod n_i`.
    pub fn n(&self) -> usize {
        self.degrees.iter().product()
    }

    pub fn max_degree(&self) -> usize {
        *self.degrees.iter().max().unwrap()
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    /// Same moduli over a different variable structure.
    pub fn with_degrees(&self, degrees: Vec<usize>) -> Result<Self> {
        Self::new(degrees, self.q, self.t)
    }
}

pub(crate) fn validate_shape(shape: &[usize]) -> Result<()> {
    if shape.is_empty() {
        return Err(param_err!("a ring needs at least one variable"));
    }
    for (i, &d) in shape.iter().enumerate() {
        if d == 0 || !d.is_power_of_two() {
            return Err(param_err!("degree n_{} = {d} is not a power of two", i + 1));
        }
    }
    Ok(())
}

/// Row-major strides for `shape`.
pub(crate) fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for i in (0..shape.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * shape[i + 1];
    }
    s
}

/// How a ring product is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MulPath {
    /// Per-axis negacyclic NTTs; requires `2 n_i | M - 1` for a prime `M`.
    Ntt,
    /// Quadratic reference product, valid for any modulus.
    Schoolbook,
    /// NTT when the modulus supports it, schoolbook otherwise.
    Auto,
}

/// A multivariate polynomial with residues modulo `modulus`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiPoly {
    shape: Vec<usize>,
    modulus: u64,
    coeffs: Vec<u64>,
}

impl MultiPoly {
    pub fn zero(shape: &[usize], modulus: u64) -> Self {
        let n = shape.iter().product();
        Self {
            shape: shape.to_vec(),
            modulus,
            coeffs: vec![0; n],
        }
    }

    pub fn from_coeffs(shape: &[usize], modulus: u64, coeffs: Vec<u64>) -> Result<Self> {
        validate_shape(shape)?;
        if modulus < 2 || modulus >= MODULUS_CEILING {
            return Err(param_err!("modulus {modulus} out of range"));
        }
        let n: usize = shape.iter().product();
        if coeffs.len() != n {
            return Err(structure_err!(
                "{} coefficients for shape {shape:?} (expected {n})",
                coeffs.len()
            ));
        }
        if let Some(c) = coeffs.iter().find(|&&c| c >= modulus) {
            return Err(param_err!("residue {c} not reduced modulo {modulus}"));
        }
        Ok(Self {
            shape: shape.to_vec(),
            modulus,
            coeffs,
        })
    }

    /// Reduce signed integers into `[0, modulus)`.
    pub fn from_signed(shape: &[usize], modulus: u64, values: &[i64]) -> Result<Self> {
        let coeffs = values.iter().map(|&v| arith::reduce_i64(v, modulus)).collect();
        Self::from_coeffs(shape, modulus, coeffs)
    }

    pub fn constant(shape: &[usize], modulus: u64, value: u64) -> Self {
        let mut p = Self::zero(shape, modulus);
        p.coeffs[0] = value % modulus;
        p
    }

    /// `coeff * x_1^{e_1} .. x_m^{e_m}` with exponents inside the degrees.
    pub fn monomial(shape: &[usize], modulus: u64, exponents: &[usize], coeff: u64) -> Result<Self> {
        if exponents.len() != shape.len() || exponents.iter().zip(shape).any(|(e, d)| e >= d) {
            return Err(structure_err!("exponents {exponents:?} do not fit shape {shape:?}"));
        }
        let mut p = Self::zero(shape, modulus);
        let flat: usize = exponents.iter().zip(strides(shape)).map(|(e, s)| e * s).sum();
        p.coeffs[flat] = coeff % modulus;
        Ok(p)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<u64> {
        self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Coefficients lifted to `(-M/2, M/2]`.
    pub fn centered(&self) -> Vec<i64> {
        self.coeffs.iter().map(|&c| arith::center(c, self.modulus)).collect()
    }

    /// Infinity norm of the centered lift.
    pub fn inf_norm(&self) -> u64 {
        self.centered().iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
    }

    /// Reinterpret through the centered lift under another modulus.
    pub fn lift_centered(&self, modulus: u64) -> MultiPoly {
        let coeffs = self
            .coeffs
            .iter()
            .map(|&c| arith::reduce_i64(arith::center(c, self.modulus), modulus))
            .collect();
        MultiPoly {
            shape: self.shape.clone(),
            modulus,
            coeffs,
        }
    }

    fn check_compatible(&self, other: &MultiPoly) -> Result<()> {
        if self.shape != other.shape {
            return Err(structure_err!("shape {:?} vs {:?}", self.shape, other.shape));
        }
        if self.modulus != other.modulus {
            return Err(structure_err!("modulus {} vs {}", self.modulus, other.modulus));
        }
        Ok(())
    }

    pub fn add(&self, other: &MultiPoly) -> Result<MultiPoly> {
        let mut out = self.clone();
        out.add_assign(other)?;
        Ok(out)
    }

    pub fn add_assign(&mut self, other: &MultiPoly) -> Result<()> {
        self.check_compatible(other)?;
        let q = self.modulus;
        for (a, &b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a = arith::add_mod(*a, b, q);
        }
        Ok(())
    }

    pub fn sub(&self, other: &MultiPoly) -> Result<MultiPoly> {
        self.check_compatible(other)?;
        let q = self.modulus;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| arith::sub_mod(a, b, q))
            .collect();
        Ok(MultiPoly {
            shape: self.shape.clone(),
            modulus: q,
            coeffs,
        })
    }

    pub fn neg(&self) -> MultiPoly {
        let q = self.modulus;
        MultiPoly {
            shape: self.shape.clone(),
            modulus: q,
            coeffs: self.coeffs.iter().map(|&a| arith::neg_mod(a, q)).collect(),
        }
    }

    pub fn scalar_mul(&self, k: u64) -> MultiPoly {
        let q = self.modulus;
        let k = k % q;
        MultiPoly {
            shape: self.shape.clone(),
            modulus: q,
            coeffs: self.coeffs.iter().map(|&a| arith::mul_mod(a, k, q)).collect(),
        }
    }

    /// Negacyclic product through the NTT; fails if the modulus lacks roots.
    pub fn negacyclic_mul(&self, other: &MultiPoly) -> Result<MultiPoly> {
        self.negacyclic_mul_with(other, MulPath::Ntt)
    }

    pub fn negacyclic_mul_with(&self, other: &MultiPoly, path: MulPath) -> Result<MultiPoly> {
        self.check_compatible(other)?;
        match path {
            MulPath::Schoolbook => Ok(schoolbook_mul(self, other)),
            MulPath::Ntt => ntt::ntt_mul(self, other),
            MulPath::Auto => {
                if ntt::supports_ntt(self.modulus, &self.shape) {
                    ntt::ntt_mul(self, other)
                } else {
                    Ok(schoolbook_mul(self, other))
                }
            }
        }
    }

    /// Multiply by the monomial `x^e`, i.e. a signed cyclic shift per axis.
    pub fn mul_monomial(&self, exponents: &[usize]) -> Result<MultiPoly> {
        if exponents.len() != self.shape.len()
            || exponents.iter().zip(&self.shape).any(|(e, d)| e >= d)
        {
            return Err(structure_err!(
                "exponents {exponents:?} do not fit shape {:?}",
                self.shape
            ));
        }
        let q = self.modulus;
        let st = strides(&self.shape);
        let mut out = vec![0u64; self.coeffs.len()];
        let mut idx = vec![0usize; self.shape.len()];
        for &c in &self.coeffs {
            if c != 0 {
                let mut flat = 0;
                let mut negate = false;
                for a in 0..idx.len() {
                    let mut k = idx[a] + exponents[a];
                    if k >= self.shape[a] {
                        k -= self.shape[a];
                        negate = !negate;
                    }
                    flat += k * st[a];
                }
                out[flat] = if negate { arith::neg_mod(c, q) } else { c };
            }
            increment(&mut idx, &self.shape);
        }
        Ok(MultiPoly {
            shape: self.shape.clone(),
            modulus: q,
            coeffs: out,
        })
    }
}

/// Advance a row-major multi-index by one position.
pub(crate) fn increment(idx: &mut [usize], shape: &[usize]) {
    for a in (0..idx.len()).rev() {
        idx[a] += 1;
        if idx[a] < shape[a] {
            return;
        }
        idx[a] = 0;
    }
}

/// Quadratic negacyclic product, independent of the transform code.
fn schoolbook_mul(a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
    let shape = &a.shape;
    let q = a.modulus;
    let n = a.coeffs.len();
    let st = strides(shape);
    let mut digits = Vec::with_capacity(n);
    let mut idx = vec![0usize; shape.len()];
    for _ in 0..n {
        digits.push(idx.clone());
        increment(&mut idx, shape);
    }
    let mut out = vec![0u64; n];
    for (i, &ai) in a.coeffs.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.coeffs.iter().enumerate() {
            if bj == 0 {
                continue;
            }
            let mut flat = 0;
            let mut negate = false;
            for ax in 0..shape.len() {
                let mut k = digits[i][ax] + digits[j][ax];
                if k >= shape[ax] {
                    k -= shape[ax];
                    negate = !negate;
                }
                flat += k * st[ax];
            }
            let p = arith::mul_mod(ai, bj, q);
            out[flat] = if negate {
                arith::sub_mod(out[flat], p, q)
            } else {
                arith::add_mod(out[flat], p, q)
            };
        }
    }
    MultiPoly {
        shape: shape.clone(),
        modulus: q,
        coeffs: out,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_validation() {
        assert!(RingParams::new(vec![8, 8], 257, 17).is_ok());
        assert!(RingParams::new(vec![6], 257, 17).is_err());
        assert!(RingParams::new(vec![256], 257, 17).is_err()); // 512 does not divide 256
        assert!(RingParams::new(vec![4], 255, 17).is_err());
        assert!(RingParams::new(vec![4], 257, 257).is_err());
        assert!(RingParams::new(vec![], 257, 2).is_err());
        let p = RingParams::new(vec![4, 2, 8], 12289, 257).unwrap();
        assert_eq!(p.n(), 64);
        assert_eq!(p.vars(), 3);
    }

    #[test]
    fn add_identity_and_wraparound() {
        let shape = [4, 2];
        let q = 257;
        let a = MultiPoly::from_coeffs(&shape, q, (0..8).map(|i| i * 31 % q).collect()).unwrap();
        assert_eq!(a.add(&MultiPoly::zero(&shape, q)).unwrap(), a);
        let top = MultiPoly::from_coeffs(&shape, q, vec![q - 1; 8]).unwrap();
        let one = MultiPoly::from_coeffs(&shape, q, vec![1; 8]).unwrap();
        assert!(top.add(&one).unwrap().is_zero());
    }

    #[test]
    fn mismatched_operands_are_rejected() {
        let a = MultiPoly::zero(&[4], 257);
        assert!(matches!(a.add(&MultiPoly::zero(&[2, 2], 257)), Err(crate::Error::Structure(_))));
        assert!(matches!(a.add(&MultiPoly::zero(&[4], 17)), Err(crate::Error::Structure(_))));
        assert!(MultiPoly::from_coeffs(&[4], 257, vec![0, 1, 2]).is_err());
        assert!(MultiPoly::from_coeffs(&[4], 257, vec![0, 1, 2, 257]).is_err());
    }

    #[test]
    fn negacyclic_wrap() {
        let q = 257;
        let shape = [8];
        let top = MultiPoly::monomial(&shape, q, &[7], 1).unwrap();
        let x = MultiPoly::monomial(&shape, q, &[1], 1).unwrap();
        let want = MultiPoly::constant(&shape, q, q - 1);
        assert_eq!(top.negacyclic_mul(&x).unwrap(), want);
        assert_eq!(top.negacyclic_mul_with(&x, MulPath::Schoolbook).unwrap(), want);
        assert_eq!(top.mul_monomial(&[1]).unwrap(), want);
    }

    #[test]
    fn multiplicative_identity() {
        let q = 12289;
        let shape = [4, 8];
        let a = MultiPoly::from_coeffs(&shape, q, (0..32).map(|i| (i * i * 97) % q).collect()).unwrap();
        let one = MultiPoly::constant(&shape, q, 1);
        assert_eq!(a.negacyclic_mul(&one).unwrap(), a);
    }

    #[test]
    fn ntt_path_requires_roots() {
        // 7 - 1 = 6 is not divisible by 2 * 4
        let a = MultiPoly::constant(&[4], 7, 3);
        assert!(matches!(a.negacyclic_mul(&a), Err(crate::Error::Existence(_))));
        assert_eq!(
            a.negacyclic_mul_with(&a, MulPath::Auto).unwrap(),
            MultiPoly::constant(&[4], 7, 2)
        );
    }

    #[test]
    fn monomial_shift_matches_product() {
        let q = 257;
        let shape = [4, 4, 2];
        let a = MultiPoly::from_coeffs(&shape, q, (0..32).map(|i| (i * 13 + 5) % q).collect()).unwrap();
        let e = [3, 1, 1];
        let m = MultiPoly::monomial(&shape, q, &e, 1).unwrap();
        assert_eq!(a.mul_monomial(&e).unwrap(), a.negacyclic_mul(&m).unwrap());
    }
}
