//! Key homomorphisms ("pseudo-encryptions" of key material).
//!
//! A homomorphism from a polynomial `z` to a target key `s'` is a list of
//! pairs `(a_i, b_i = -(s' a_i + t e_i) + T^i z)`. Multiplying the base-`T`
//! digits of some `c` into these pairs yields a two-component ciphertext
//! under `s'` that decrypts to `c z` plus a multiple of `t`.
//!
//! The error term is scaled by `t` rather than `T`. With the default
//! `T = t` the two agree; for other bases this keeps the error invisible
//! after the mod-t reduction.

use rand::Rng;

use crate::error::{structure_err, Result};
use crate::ring::{base_decompose, digit_count, remap, MultiPoly, RingMapping, RingParams};
use crate::she::{sample_noise, sample_uniform, Ciphertext, SecretKey};

/// Pseudo-encryptions of `T^i z` under a target key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelinKey {
    base: u64,
    hom: Vec<(MultiPoly, MultiPoly)>,
    params: RingParams,
}

impl RelinKey {
    pub fn from_parts(base: u64, hom: Vec<(MultiPoly, MultiPoly)>, params: RingParams) -> Result<Self> {
        check_base(base, params.q())?;
        if hom.len() != digit_count(params.q(), base) {
            return Err(structure_err!(
                "{} homomorphisms, expected {}",
                hom.len(),
                digit_count(params.q(), base)
            ));
        }
        for (a, b) in &hom {
            check_in_ring(a, &params)?;
            check_in_ring(b, &params)?;
        }
        Ok(Self { base, hom, params })
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn hom(&self) -> &[(MultiPoly, MultiPoly)] {
        &self.hom
    }

    pub fn params(&self) -> &RingParams {
        &self.params
    }
}

fn check_base(base: u64, q: u64) -> Result<()> {
    if base < 2 || base >= q {
        return Err(crate::error::param_err!("decomposition base {base} outside [2, {q})"));
    }
    Ok(())
}

fn check_in_ring(p: &MultiPoly, params: &RingParams) -> Result<()> {
    if p.shape() != params.degrees() || p.modulus() != params.q() {
        return Err(structure_err!("key polynomial outside R_q of {:?}", params.degrees()));
    }
    Ok(())
}

fn hom_pairs<R: Rng + ?Sized>(
    z: &MultiPoly,
    dst: &SecretKey,
    base: u64,
    rng: &mut R,
) -> Result<Vec<(MultiPoly, MultiPoly)>> {
    let ring = dst.params();
    let (shape, q, t) = (ring.degrees(), ring.q(), ring.t());
    check_base(base, q)?;
    let np = &dst.scheme().noise;
    let mut pow = z.clone();
    let mut out = Vec::new();
    for _ in 0..digit_count(q, base) {
        let a = sample_uniform(shape, q, rng);
        let e = sample_noise(np, shape, q, rng);
        let b = pow.sub(&a.negacyclic_mul(dst.poly())?.add(&e.scalar_mul(t))?)?;
        out.push((a, b));
        pow = pow.scalar_mul(base);
    }
    Ok(out)
}

/// Homomorphism from `src` to `dst`; both keys must share ring parameters.
pub fn gen_key_switch<R: Rng + ?Sized>(
    src: &SecretKey,
    dst: &SecretKey,
    base: u64,
    rng: &mut R,
) -> Result<RelinKey> {
    if src.params() != dst.params() {
        return Err(structure_err!("source and target keys use different ring parameters"));
    }
    gen_hom_for_poly(src.poly(), dst, base, rng)
}

/// Homomorphism pseudo-encrypting an arbitrary polynomial of `R_q` under `dst`.
pub fn gen_hom_for_poly<R: Rng + ?Sized>(
    z: &MultiPoly,
    dst: &SecretKey,
    base: u64,
    rng: &mut R,
) -> Result<RelinKey> {
    check_in_ring(z, dst.params())?;
    Ok(RelinKey {
        base,
        hom: hom_pairs(z, dst, base, rng)?,
        params: dst.params().clone(),
    })
}

/// The `s^2 -> s` key used after a ciphertext product.
pub fn gen_relin_key<R: Rng + ?Sized>(sk: &SecretKey, base: u64, rng: &mut R) -> Result<RelinKey> {
    let sq = sk.poly().negacyclic_mul(sk.poly())?;
    gen_hom_for_poly(&sq, sk, base, rng)
}

/// `(sum_i d_i b_i, sum_i d_i a_i)` for the base-`T` digits `d_i` of `c`.
fn apply_hom(c: &MultiPoly, hom: &[(MultiPoly, MultiPoly)], base: u64) -> Result<(MultiPoly, MultiPoly)> {
    let digits = base_decompose(c, base)?.digits;
    let (shape, q) = (c.shape(), c.modulus());
    let mut acc0 = MultiPoly::zero(shape, q);
    let mut acc1 = MultiPoly::zero(shape, q);
    for (d, (a, b)) in digits.iter().zip(hom) {
        if d.is_zero() {
            continue;
        }
        acc0.add_assign(&d.negacyclic_mul(b)?)?;
        acc1.add_assign(&d.negacyclic_mul(a)?)?;
    }
    Ok((acc0, acc1))
}

/// Three components under `s` to two, via an `s^2 -> s` key.
pub fn relinearize(ct: &Ciphertext, rk: &RelinKey) -> Result<Ciphertext> {
    if ct.gamma() != 3 {
        return Err(structure_err!("relinearize expects 3 components, got {}", ct.gamma()));
    }
    if ct.params() != rk.params() {
        return Err(structure_err!("relinearization key and ciphertext use different rings"));
    }
    let c = ct.comps();
    let (h0, h1) = apply_hom(&c[2], &rk.hom, rk.base)?;
    Ciphertext::new(
        vec![c[0].add(&h0)?, c[1].add(&h1)?],
        ct.params().clone(),
        ct.depth(),
        ct.max_depth(),
    )
}

/// Two components under the key pseudo-encrypted in `ks` to two under its target.
pub fn key_switch(ct: &Ciphertext, ks: &RelinKey) -> Result<Ciphertext> {
    if ct.gamma() != 2 {
        return Err(structure_err!("key switching expects 2 components, got {}", ct.gamma()));
    }
    if ct.params() != ks.params() {
        return Err(structure_err!("switching key and ciphertext use different rings"));
    }
    let c = ct.comps();
    let (h0, h1) = apply_hom(&c[1], &ks.hom, ks.base)?;
    Ciphertext::new(vec![c[0].add(&h0)?, h1], ct.params().clone(), ct.depth(), ct.max_depth())
}

/// Key material for changing the ring structure of a ciphertext.
///
/// Entry `(j, i)` pseudo-encrypts `T^i s_j` (the `j`-th coefficient of the
/// source key, as a constant) under the remapped key. Stored `j` outer,
/// `i` inner.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureKey {
    base: u64,
    mapping: RingMapping,
    source: RingParams,
    target: RingParams,
    grid: Vec<(MultiPoly, MultiPoly)>,
}

impl StructureKey {
    pub fn from_parts(
        base: u64,
        mapping: RingMapping,
        source: RingParams,
        grid: Vec<(MultiPoly, MultiPoly)>,
    ) -> Result<Self> {
        let target = check_mapping(&mapping, &source)?;
        check_base(base, source.q())?;
        let want = mapping.n() * digit_count(source.q(), base);
        if grid.len() != want {
            return Err(structure_err!("{} grid entries, expected {want}", grid.len()));
        }
        for (a, b) in &grid {
            check_in_ring(a, &target)?;
            check_in_ring(b, &target)?;
        }
        Ok(Self {
            base,
            mapping,
            source,
            target,
            grid,
        })
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn mapping(&self) -> &RingMapping {
        &self.mapping
    }

    pub fn source(&self) -> &RingParams {
        &self.source
    }

    pub fn target(&self) -> &RingParams {
        &self.target
    }

    pub fn grid(&self) -> &[(MultiPoly, MultiPoly)] {
        &self.grid
    }

    pub fn digits(&self) -> usize {
        digit_count(self.source.q(), self.base)
    }

    /// Entry `(j, i)`.
    pub fn entry(&self, j: usize, i: usize) -> &(MultiPoly, MultiPoly) {
        &self.grid[j * self.digits() + i]
    }

    /// Number of residues mod `q` stored: `2 n ceil(log_T q) n_target`.
    pub fn coefficient_count(&self) -> usize {
        2 * self.grid.len() * self.target.n()
    }
}

fn check_mapping(mapping: &RingMapping, source: &RingParams) -> Result<RingParams> {
    if mapping.source() != source.degrees() {
        return Err(structure_err!(
            "mapping source {:?} vs ring {:?}",
            mapping.source(),
            source.degrees()
        ));
    }
    source.with_degrees(mapping.target().to_vec())
}

/// Exponents of flat index `j` in `shape` (row-major).
fn exponents(mut j: usize, shape: &[usize]) -> Vec<usize> {
    let mut e = vec![0; shape.len()];
    for k in (0..shape.len()).rev() {
        e[k] = j % shape[k];
        j /= shape[k];
    }
    e
}

/// The polynomials `c x^{e_j}`: column `j` of the skew-circulant matrix of
/// `c`, so that `c s = sum_j s_j c^{(j)}` for any `s`.
pub fn column_polys(c: &MultiPoly) -> Result<Vec<MultiPoly>> {
    let shape = c.shape();
    (0..c.len()).map(|j| c.mul_monomial(&exponents(j, shape))).collect()
}

pub fn gen_structure_key<R: Rng + ?Sized>(
    sk_src: &SecretKey,
    sk_dst: &SecretKey,
    mapping: &RingMapping,
    base: u64,
    rng: &mut R,
) -> Result<StructureKey> {
    let target = check_mapping(mapping, sk_src.params())?;
    if sk_dst.params() != &target {
        return Err(structure_err!("target key does not live in the mapped ring"));
    }
    if remap(sk_src.poly(), mapping)? != *sk_dst.poly() {
        return Err(structure_err!("target key is not the remapped source key"));
    }
    let (shape, q) = (target.degrees(), target.q());
    let mut grid = Vec::with_capacity(mapping.n() * digit_count(q, base));
    for &s_j in sk_src.poly().coeffs() {
        let constant = MultiPoly::constant(shape, q, s_j);
        grid.extend(hom_pairs(&constant, sk_dst, base, rng)?);
    }
    Ok(StructureKey {
        base,
        mapping: mapping.clone(),
        source: sk_src.params().clone(),
        target,
        grid,
    })
}

/// Re-encrypts `ct` over the target ring; the result decrypts under the
/// remapped key to the remapped plaintext.
pub fn switch_structure(ct: &Ciphertext, stk: &StructureKey) -> Result<Ciphertext> {
    if ct.gamma() != 2 {
        return Err(structure_err!(
            "structure switching expects 2 components (relinearize first), got {}",
            ct.gamma()
        ));
    }
    if ct.params() != &stk.source {
        return Err(structure_err!("ciphertext ring does not match the structure key source"));
    }
    let c = ct.comps();
    let ell = stk.digits();
    let mut c0 = remap(&c[0], &stk.mapping)?;
    let mut c1 = MultiPoly::zero(stk.target.degrees(), stk.target.q());
    for (j, col) in column_polys(&c[1])?.iter().enumerate() {
        let d = remap(col, &stk.mapping)?;
        let (h0, h1) = apply_hom(&d, &stk.grid[j * ell..(j + 1) * ell], stk.base)?;
        c0.add_assign(&h0)?;
        c1.add_assign(&h1)?;
    }
    Ciphertext::new(vec![c0, c1], stk.target.clone(), ct.depth(), ct.max_depth())
}

/// Remaps a secret key into the target ring of `mapping`.
pub fn remap_secret_key(sk: &SecretKey, mapping: &RingMapping) -> Result<SecretKey> {
    let target = check_mapping(mapping, sk.params())?;
    let mut scheme = sk.scheme().clone();
    scheme.ring = target;
    SecretKey::from_poly(remap(sk.poly(), mapping)?, scheme)
}
