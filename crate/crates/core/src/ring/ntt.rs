//! Negacyclic number theoretic transforms applied one axis at a time.
//!
//! Each axis of length `n` uses the merged (weighted) transform: a
//! Cooley-Tukey pass driven by powers of a primitive `2n`-th root `psi`,
//! which folds the `psi^i` pre-weighting into the butterflies. Forward
//! output is in bit-reversed order; the Gentleman-Sande inverse consumes
//! that order, so pointwise products never need a permutation.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::{strides, MultiPoly};
use crate::arith::{self, ShoupMul};
use crate::error::{param_err, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NttDirection {
    Forward,
    Inverse,
}

/// Which root `find_root` looks for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootKind {
    /// Primitive `order`-th root of unity.
    Unity,
    /// Root `eta` with `eta^order = -1`, primitive of order `2 * order`.
    NegOne,
}

/// Smallest residue of the requested kind modulo a prime.
///
/// For a prime modulus the gcd conditions on `alpha` reduce to `alpha`
/// being a primitive root of the stated order, so the candidates are the
/// powers `w^k` with `gcd(k, order) = 1` of any one primitive root `w`.
pub fn find_root(modulus: u64, order: u64, kind: RootKind) -> Result<u64> {
    if modulus < 2 || !arith::is_prime(modulus) {
        return Err(param_err!("root search needs a prime modulus, got {modulus}"));
    }
    if order == 0 {
        return Err(param_err!("root order must be positive"));
    }
    let full = match kind {
        RootKind::Unity => order,
        RootKind::NegOne => order
            .checked_mul(2)
            .ok_or_else(|| param_err!("order {order} too large"))?,
    };
    if (modulus - 1) % full != 0 {
        return Err(Error::Existence(format!(
            "{full} does not divide {modulus} - 1, so no primitive {full}-th root exists"
        )));
    }
    if order >= modulus {
        return Err(Error::Existence(format!(
            "gcd({order}, {modulus}) != 1"
        )));
    }
    let generator = primitive_root_of_order(modulus, full);
    let mut best = u64::MAX;
    let mut cur = 1u64;
    for k in 1..=full {
        cur = arith::mul_mod(cur, generator, modulus);
        if arith::gcd(k, full) == 1 && cur < best {
            best = cur;
        }
    }
    Ok(best)
}

/// Some primitive root of the given order; `order` must divide `p - 1`.
fn primitive_root_of_order(p: u64, order: u64) -> u64 {
    if order == 1 {
        return 1;
    }
    let factors = arith::prime_factors(order);
    let cofactor = (p - 1) / order;
    (2..p)
        .map(|x| arith::pow_mod(x, cofactor, p))
        .find(|&w| factors.iter().all(|&f| arith::pow_mod(w, order / f, p) != 1))
        .expect("cyclic group of order p - 1 contains an element of every dividing order")
}

pub(crate) fn supports_ntt(modulus: u64, shape: &[usize]) -> bool {
    arith::is_prime(modulus)
        && shape
            .iter()
            .all(|&n| (modulus - 1) % (2 * n as u64) == 0)
}

/// Precomputed twiddles for one `(modulus, length)` pair.
pub(crate) struct NttTable {
    q: u64,
    n: usize,
    psi_rev: Vec<ShoupMul>,
    psi_inv_rev: Vec<ShoupMul>,
    n_inv: ShoupMul,
}

fn bit_reverse(mut x: usize, bits: u32) -> usize {
    let mut r = 0;
    for _ in 0..bits {
        r = (r << 1) | (x & 1);
        x >>= 1;
    }
    r
}

impl NttTable {
    fn new(q: u64, n: usize) -> Result<Self> {
        let psi = find_root(q, n as u64, RootKind::NegOne)?;
        let psi_inv = arith::inv_mod(psi, q).expect("root is a unit");
        let bits = n.trailing_zeros();
        let mut psi_rev = vec![ShoupMul::new(1, q); n];
        let mut psi_inv_rev = vec![ShoupMul::new(1, q); n];
        let (mut p, mut pi) = (1u64, 1u64);
        for i in 0..n {
            let r = bit_reverse(i, bits);
            psi_rev[r] = ShoupMul::new(p, q);
            psi_inv_rev[r] = ShoupMul::new(pi, q);
            p = arith::mul_mod(p, psi, q);
            pi = arith::mul_mod(pi, psi_inv, q);
        }
        let n_inv = arith::inv_mod(n as u64 % q, q).expect("n < q");
        Ok(Self {
            q,
            n,
            psi_rev,
            psi_inv_rev,
            n_inv: ShoupMul::new(n_inv, q),
        })
    }

    fn forward(&self, a: &mut [u64]) {
        let q = self.q;
        let mut t = self.n;
        let mut m = 1;
        while m < self.n {
            t /= 2;
            for i in 0..m {
                let j1 = 2 * i * t;
                let s = &self.psi_rev[m + i];
                for j in j1..j1 + t {
                    let u = a[j];
                    let v = s.mul(a[j + t], q);
                    a[j] = arith::add_mod(u, v, q);
                    a[j + t] = arith::sub_mod(u, v, q);
                }
            }
            m *= 2;
        }
    }

    fn inverse(&self, a: &mut [u64]) {
        let q = self.q;
        let mut t = 1;
        let mut m = self.n;
        while m > 1 {
            let h = m / 2;
            let mut j1 = 0;
            for i in 0..h {
                let s = &self.psi_inv_rev[h + i];
                for j in j1..j1 + t {
                    let u = a[j];
                    let v = a[j + t];
                    a[j] = arith::add_mod(u, v, q);
                    a[j + t] = s.mul(arith::sub_mod(u, v, q), q);
                }
                j1 += 2 * t;
            }
            t *= 2;
            m = h;
        }
        for x in a.iter_mut() {
            *x = self.n_inv.mul(*x, q);
        }
    }
}

type TableCache = Mutex<HashMap<(u64, usize), Arc<NttTable>>>;

pub(crate) fn table(q: u64, n: usize) -> Result<Arc<NttTable>> {
    static CACHE: OnceLock<TableCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().unwrap().get(&(q, n)) {
        return Ok(t.clone());
    }
    let t = Arc::new(NttTable::new(q, n)?);
    cache.lock().unwrap().insert((q, n), t.clone());
    Ok(t)
}

fn transform_axis(coeffs: &mut [u64], shape: &[usize], axis: usize, tab: &NttTable, dir: NttDirection) {
    let len = shape[axis];
    if len == 1 {
        return;
    }
    let stride = strides(shape)[axis];
    let block = len * stride;
    let run = |line: &mut [u64]| match dir {
        NttDirection::Forward => tab.forward(line),
        NttDirection::Inverse => tab.inverse(line),
    };
    if stride == 1 {
        coeffs.chunks_exact_mut(len).for_each(run);
        return;
    }
    let mut line = vec![0u64; len];
    for outer in coeffs.chunks_exact_mut(block) {
        for r in 0..stride {
            for (i, x) in line.iter_mut().enumerate() {
                *x = outer[i * stride + r];
            }
            run(&mut line);
            for (i, &x) in line.iter().enumerate() {
                outer[i * stride + r] = x;
            }
        }
    }
}

/// Negacyclic NTT along one variable; other axes are untouched.
///
/// Forward output is bit-reversed along the axis. `Inverse` undoes
/// `Forward` exactly, and pointwise products of forward images on every
/// axis realise the negacyclic ring product.
pub fn axis_ntt(p: &MultiPoly, axis: usize, direction: NttDirection) -> Result<MultiPoly> {
    if axis >= p.shape.len() {
        return Err(crate::error::structure_err!(
            "axis {axis} out of range for {} variables",
            p.shape.len()
        ));
    }
    let mut out = p.clone();
    let tab = table(p.modulus, p.shape[axis])?;
    transform_axis(&mut out.coeffs, &p.shape, axis, &tab, direction);
    Ok(out)
}

pub(crate) fn forward_all(coeffs: &mut [u64], shape: &[usize], q: u64) -> Result<()> {
    for axis in 0..shape.len() {
        let tab = table(q, shape[axis])?;
        transform_axis(coeffs, shape, axis, &tab, NttDirection::Forward);
    }
    Ok(())
}

pub(crate) fn inverse_all(coeffs: &mut [u64], shape: &[usize], q: u64) -> Result<()> {
    for axis in 0..shape.len() {
        let tab = table(q, shape[axis])?;
        transform_axis(coeffs, shape, axis, &tab, NttDirection::Inverse);
    }
    Ok(())
}

pub(crate) fn ntt_mul(a: &MultiPoly, b: &MultiPoly) -> Result<MultiPoly> {
    let q = a.modulus;
    let mut fa = a.coeffs.clone();
    let mut fb = b.coeffs.clone();
    forward_all(&mut fa, &a.shape, q)?;
    forward_all(&mut fb, &a.shape, q)?;
    for (x, &y) in fa.iter_mut().zip(&fb) {
        *x = arith::mul_mod(*x, y, q);
    }
    inverse_all(&mut fa, &a.shape, q)?;
    Ok(MultiPoly {
        shape: a.shape.clone(),
        modulus: q,
        coeffs: fa,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::MulPath;

    /// Exhaustive scan over the whole residue ring.
    fn brute_root(p: u64, order: u64, kind: RootKind) -> Option<u64> {
        let full = match kind {
            RootKind::Unity => order,
            RootKind::NegOne => 2 * order,
        };
        (1..p).find(|&x| {
            let hits = match kind {
                RootKind::Unity => arith::pow_mod(x, order, p) == 1,
                RootKind::NegOne => arith::pow_mod(x, order, p) == p - 1,
            };
            hits && (1..full).all(|i| arith::pow_mod(x, i, p) != 1)
        })
    }

    #[test]
    fn root_examples() {
        assert_eq!(find_root(257, 1, RootKind::Unity).unwrap(), 1);
        assert!(matches!(find_root(257, 3, RootKind::Unity), Err(Error::Existence(_))));
        let eta = find_root(12289, 8, RootKind::NegOne).unwrap();
        assert_eq!(Some(eta), brute_root(12289, 8, RootKind::NegOne));
        assert_eq!(arith::pow_mod(eta, 8, 12289), 12288);
        assert!(find_root(256, 2, RootKind::Unity).is_err());
    }

    #[test]
    fn roots_match_exhaustive_scan() {
        for &p in &[17u64, 97, 257, 7681, 12289] {
            for order in 1..=32u64 {
                for kind in [RootKind::Unity, RootKind::NegOne] {
                    let fast = find_root(p, order, kind).ok();
                    assert_eq!(fast, brute_root(p, order, kind), "p={p} order={order} {kind:?}");
                }
            }
        }
    }

    #[test]
    fn degenerate_axis_is_identity() {
        let p = MultiPoly::from_coeffs(&[1, 4], 257, vec![5, 6, 7, 8]).unwrap();
        assert_eq!(axis_ntt(&p, 0, NttDirection::Forward).unwrap(), p);
    }

    #[test]
    fn axis_roundtrip() {
        let q = 12289;
        let shape = [4, 8, 2];
        let p = MultiPoly::from_coeffs(&shape, q, (0..64).map(|i| (i * 7919) % q).collect()).unwrap();
        for axis in 0..3 {
            let f = axis_ntt(&p, axis, NttDirection::Forward).unwrap();
            assert_ne!(f, p);
            assert_eq!(axis_ntt(&f, axis, NttDirection::Inverse).unwrap(), p);
        }
    }

    #[test]
    fn pointwise_path_matches_schoolbook_8x8_q257() {
        let q = 257;
        let shape = [8, 8];
        let a = MultiPoly::from_coeffs(&shape, q, (0..64).map(|i| (i * i * 31 + 7) % q).collect()).unwrap();
        let b = MultiPoly::from_coeffs(&shape, q, (0..64).map(|i| (i * 101 + 3) % q).collect()).unwrap();
        let mut fa = a.clone();
        let mut fb = b.clone();
        for axis in 0..2 {
            fa = axis_ntt(&fa, axis, NttDirection::Forward).unwrap();
            fb = axis_ntt(&fb, axis, NttDirection::Forward).unwrap();
        }
        let prod: Vec<u64> = fa
            .coeffs()
            .iter()
            .zip(fb.coeffs())
            .map(|(&x, &y)| arith::mul_mod(x, y, q))
            .collect();
        let mut c = MultiPoly::from_coeffs(&shape, q, prod).unwrap();
        for axis in 0..2 {
            c = axis_ntt(&c, axis, NttDirection::Inverse).unwrap();
        }
        assert_eq!(c, a.negacyclic_mul_with(&b, MulPath::Schoolbook).unwrap());
    }
}
