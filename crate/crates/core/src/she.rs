//! The somewhat-homomorphic cryptosystem over `R_q[x_1..x_m]`.
//!
//! Key generation, encryption and decryption, with noise scaled by `t`:
//! `pk = (a0 = -(a1 s + t e), a1)`, a fresh ciphertext is
//! `(a0 u + t g + m, a1 u + t f)`, and a ciphertext with `gamma` components
//! decrypts as `((sum_i c_i s^i) mod q) mod t` after a centered lift.
//! Products grow the component count; `relin` brings it back down.

use std::cell::Cell;

use rand::Rng;

use crate::arith;
use crate::error::{param_err, structure_err, Error, Result};
use crate::ring::{ntt_forward_all, ntt_inverse_all, MultiPoly, RingParams};

/// Default truncation bound, in units of sigma.
pub const DEFAULT_TRUNCATION: f64 = 6.0;

/// Truncated discrete Gaussian noise parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    sigma: f64,
    truncation: f64,
}

impl NoiseParams {
    pub fn new(sigma: f64, truncation: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(param_err!("sigma must be positive, got {sigma}"));
        }
        if !(truncation.is_finite() && truncation > 0.0) {
            return Err(param_err!("truncation bound must be positive, got {truncation}"));
        }
        Ok(Self { sigma, truncation })
    }

    pub fn with_sigma(sigma: f64) -> Result<Self> {
        Self::new(sigma, DEFAULT_TRUNCATION)
    }

    /// From the Gaussian parameter `s = sigma * sqrt(2 pi)`.
    pub fn from_gaussian_parameter(s: f64) -> Result<Self> {
        Self::with_sigma(s / (2.0 * std::f64::consts::PI).sqrt())
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    pub fn gaussian_parameter(&self) -> f64 {
        self.sigma * (2.0 * std::f64::consts::PI).sqrt()
    }

    /// Largest magnitude a sample can take.
    pub fn bound(&self) -> i64 {
        (self.truncation * self.sigma).floor() as i64
    }

    /// One sample with weight `exp(-x^2 / 2 sigma^2)` on the integers in
    /// `[-bound, bound]`, by rejection from the uniform distribution.
    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        let b = self.bound();
        let scale = -0.5 / (self.sigma * self.sigma);
        loop {
            let x = rng.gen_range(-b..=b);
            if rng.gen::<f64>() < (scale * (x * x) as f64).exp() {
                return x;
            }
        }
    }
}

/// `n` i.i.d. truncated Gaussian coefficients, reduced into `[0, modulus)`.
pub fn sample_noise<R: Rng + ?Sized>(
    np: &NoiseParams,
    shape: &[usize],
    modulus: u64,
    rng: &mut R,
) -> MultiPoly {
    let n: usize = shape.iter().product();
    let values: Vec<i64> = (0..n).map(|_| np.sample_one(rng)).collect();
    MultiPoly::from_signed(shape, modulus, &values).expect("shape validated by caller")
}

pub(crate) fn sample_uniform<R: Rng + ?Sized>(shape: &[usize], q: u64, rng: &mut R) -> MultiPoly {
    let n: usize = shape.iter().product();
    let coeffs = (0..n).map(|_| rng.gen_range(0..q)).collect();
    MultiPoly::from_coeffs(shape, q, coeffs).expect("shape validated by caller")
}

/// Everything key generation needs: ring, noise and the depth budget `D`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeParams {
    pub ring: RingParams,
    pub noise: NoiseParams,
    pub max_depth: u32,
}

impl SchemeParams {
    pub fn new(ring: RingParams, noise: NoiseParams, max_depth: u32) -> Self {
        Self { ring, noise, max_depth }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecretKey {
    s: MultiPoly,
    scheme: SchemeParams,
}

impl SecretKey {
    /// Wrap an existing key polynomial (mod q, shaped like the ring).
    pub fn from_poly(s: MultiPoly, scheme: SchemeParams) -> Result<Self> {
        if s.shape() != scheme.ring.degrees() || s.modulus() != scheme.ring.q() {
            return Err(structure_err!("key polynomial does not live in R_q of the scheme"));
        }
        Ok(Self { s, scheme })
    }

    pub fn poly(&self) -> &MultiPoly {
        &self.s
    }

    pub fn scheme(&self) -> &SchemeParams {
        &self.scheme
    }

    pub fn params(&self) -> &RingParams {
        &self.scheme.ring
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PublicKey {
    a0: MultiPoly,
    a1: MultiPoly,
    scheme: SchemeParams,
}

impl PublicKey {
    pub fn from_parts(a0: MultiPoly, a1: MultiPoly, scheme: SchemeParams) -> Result<Self> {
        for p in [&a0, &a1] {
            if p.shape() != scheme.ring.degrees() || p.modulus() != scheme.ring.q() {
                return Err(structure_err!("public key component does not live in R_q"));
            }
        }
        Ok(Self { a0, a1, scheme })
    }

    pub fn a0(&self) -> &MultiPoly {
        &self.a0
    }

    pub fn a1(&self) -> &MultiPoly {
        &self.a1
    }

    pub fn scheme(&self) -> &SchemeParams {
        &self.scheme
    }

    pub fn params(&self) -> &RingParams {
        &self.scheme.ring
    }
}

/// `gamma >= 2` ring elements plus the multiplicative depth consumed so far.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ciphertext {
    comps: Vec<MultiPoly>,
    params: RingParams,
    depth: u32,
    max_depth: u32,
}

impl Ciphertext {
    pub fn new(comps: Vec<MultiPoly>, params: RingParams, depth: u32, max_depth: u32) -> Result<Self> {
        if comps.len() < 2 {
            return Err(structure_err!("a ciphertext needs at least two components"));
        }
        for c in &comps {
            if c.shape() != params.degrees() || c.modulus() != params.q() {
                return Err(structure_err!("ciphertext component outside R_q"));
            }
        }
        if depth > max_depth {
            return Err(Error::Depth { depth, max: max_depth });
        }
        Ok(Self {
            comps,
            params,
            depth,
            max_depth,
        })
    }

    pub fn comps(&self) -> &[MultiPoly] {
        &self.comps
    }

    pub fn gamma(&self) -> usize {
        self.comps.len()
    }

    pub fn params(&self) -> &RingParams {
        &self.params
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn max_depth(&self) -> u32 {
        self.max_depth
    }
}

pub fn keygen<R: Rng + ?Sized>(scheme: &SchemeParams, rng: &mut R) -> (SecretKey, PublicKey) {
    let ring = &scheme.ring;
    let (shape, q, t) = (ring.degrees(), ring.q(), ring.t());
    let s = sample_noise(&scheme.noise, shape, q, rng);
    let e = sample_noise(&scheme.noise, shape, q, rng);
    let a1 = sample_uniform(shape, q, rng);
    let a0 = a1
        .negacyclic_mul(&s)
        .and_then(|p| p.add(&e.scalar_mul(t)))
        .expect("ring params guarantee NTT roots")
        .neg();
    (
        SecretKey {
            s,
            scheme: scheme.clone(),
        },
        PublicKey {
            a0,
            a1,
            scheme: scheme.clone(),
        },
    )
}

pub fn encrypt<R: Rng + ?Sized>(pk: &PublicKey, msg: &MultiPoly, rng: &mut R) -> Result<Ciphertext> {
    let ring = &pk.scheme.ring;
    if msg.shape() != ring.degrees() {
        return Err(structure_err!(
            "message shape {:?} vs ring {:?}",
            msg.shape(),
            ring.degrees()
        ));
    }
    if msg.modulus() != ring.t() {
        return Err(structure_err!("message modulus {} is not t = {}", msg.modulus(), ring.t()));
    }
    let (shape, q, t) = (ring.degrees(), ring.q(), ring.t());
    let np = &pk.scheme.noise;
    let u = sample_noise(np, shape, q, rng);
    let f = sample_noise(np, shape, q, rng);
    let g = sample_noise(np, shape, q, rng);
    let c0 = pk
        .a0
        .negacyclic_mul(&u)?
        .add(&g.scalar_mul(t))?
        .add(&msg.lift_centered(q))?;
    let c1 = pk.a1.negacyclic_mul(&u)?.add(&f.scalar_mul(t))?;
    Ok(Ciphertext {
        comps: vec![c0, c1],
        params: ring.clone(),
        depth: 0,
        max_depth: pk.scheme.max_depth,
    })
}

fn check_key(sk: &SecretKey, ct: &Ciphertext) -> Result<()> {
    if sk.scheme.ring != ct.params {
        return Err(structure_err!("ciphertext and secret key live in different rings"));
    }
    Ok(())
}

/// `sum_i c_i s^i mod q`, evaluated by Horner's rule.
pub fn decryption_poly(sk: &SecretKey, ct: &Ciphertext) -> Result<MultiPoly> {
    check_key(sk, ct)?;
    let mut acc = ct.comps.last().unwrap().clone();
    for c in ct.comps.iter().rev().skip(1) {
        acc = acc.negacyclic_mul(&sk.s)?.add(c)?;
    }
    Ok(acc)
}

pub fn decrypt(sk: &SecretKey, ct: &Ciphertext) -> Result<MultiPoly> {
    let t = ct.params.t();
    Ok(decryption_poly(sk, ct)?.lift_centered(t))
}

/// Infinity norm of the centered decryption polynomial before the mod-t
/// step. This is the noise magnitude (plaintext included) whenever it has
/// not wrapped; decryption is correct exactly while it stays below q/2.
pub fn noise_norm(sk: &SecretKey, ct: &Ciphertext) -> Result<u64> {
    Ok(decryption_poly(sk, ct)?.inf_norm())
}

fn check_same_ring(a: &Ciphertext, b: &Ciphertext) -> Result<()> {
    if a.params != b.params {
        return Err(structure_err!("ciphertexts live in different rings"));
    }
    Ok(())
}

/// Componentwise sum; the shorter ciphertext is zero-padded.
pub fn he_add(a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext> {
    check_same_ring(a, b)?;
    let (long, short) = if a.gamma() >= b.gamma() { (a, b) } else { (b, a) };
    let mut comps = long.comps.clone();
    for (c, s) in comps.iter_mut().zip(&short.comps) {
        c.add_assign(s)?;
    }
    Ok(Ciphertext {
        comps,
        params: a.params.clone(),
        depth: a.depth.max(b.depth),
        max_depth: a.max_depth.min(b.max_depth),
    })
}

/// Product in the symbolic variable `v`: `gamma_out = gamma_a + gamma_b - 1`.
pub fn he_mul(a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext> {
    check_same_ring(a, b)?;
    let depth = a.depth.max(b.depth) + 1;
    let max_depth = a.max_depth.min(b.max_depth);
    if depth > max_depth {
        return Err(Error::Depth {
            depth,
            max: max_depth,
        });
    }
    let shape = a.params.degrees();
    let q = a.params.q();
    let to_ntt = |ct: &Ciphertext| -> Result<Vec<Vec<u64>>> {
        ct.comps
            .iter()
            .map(|c| {
                let mut v = c.coeffs().to_vec();
                ntt_forward_all(&mut v, shape, q)?;
                Ok(v)
            })
            .collect()
    };
    let fa = to_ntt(a)?;
    let fb = to_ntt(b)?;
    let n = a.params.n();
    let mut out = vec![vec![0u64; n]; fa.len() + fb.len() - 1];
    for (i, x) in fa.iter().enumerate() {
        for (j, y) in fb.iter().enumerate() {
            let acc = &mut out[i + j];
            for k in 0..n {
                acc[k] = arith::add_mod(acc[k], arith::mul_mod(x[k], y[k], q), q);
            }
        }
    }
    let comps = out
        .into_iter()
        .map(|mut v| {
            ntt_inverse_all(&mut v, shape, q)?;
            MultiPoly::from_coeffs(shape, q, v)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Ciphertext {
        comps,
        params: a.params.clone(),
        depth,
        max_depth,
    })
}

/// Multiply by a public plaintext (mod t, centered lift into R_q).
///
/// Depth is not consumed; the noise grows by the plaintext's l1 norm.
pub fn mul_plain(ct: &Ciphertext, p: &MultiPoly) -> Result<Ciphertext> {
    if p.shape() != ct.params.degrees() || p.modulus() != ct.params.t() {
        return Err(structure_err!("plaintext does not live in R_t of the ciphertext"));
    }
    let lifted = p.lift_centered(ct.params.q());
    let comps = ct
        .comps
        .iter()
        .map(|c| c.negacyclic_mul(&lifted))
        .collect::<Result<Vec<_>>>()?;
    Ok(Ciphertext {
        comps,
        ..ct.clone()
    })
}

/// Counts homomorphic operations as they are executed.
#[derive(Debug, Default)]
pub struct OpCounter {
    products: Cell<u64>,
    plain_products: Cell<u64>,
    additions: Cell<u64>,
}

impl OpCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn mul(&self, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext> {
        let out = he_mul(a, b)?;
        self.products.set(self.products.get() + 1);
        Ok(out)
    }

    pub fn mul_plain(&self, a: &Ciphertext, p: &MultiPoly) -> Result<Ciphertext> {
        let out = mul_plain(a, p)?;
        self.plain_products.set(self.plain_products.get() + 1);
        Ok(out)
    }

    pub fn add(&self, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext> {
        let out = he_add(a, b)?;
        self.additions.set(self.additions.get() + 1);
        Ok(out)
    }

    /// Ciphertext-ciphertext products.
    pub fn products(&self) -> u64 {
        self.products.get()
    }

    pub fn plain_products(&self) -> u64 {
        self.plain_products.get()
    }

    pub fn additions(&self) -> u64 {
        self.additions.get()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{choose_prime, min_q_bound};
    use crate::ring::MulPath;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn scheme(degrees: Vec<usize>, t: u64, depth: u32, adds: u64) -> SchemeParams {
        let n: usize = degrees.iter().product();
        let bound = min_q_bound(t, 1.0, n as u64, depth, adds);
        let q = choose_prime(&bound.ceil, &degrees).unwrap();
        let ring = RingParams::new(degrees, q, t).unwrap();
        SchemeParams::new(ring, NoiseParams::with_sigma(1.0).unwrap(), depth)
    }

    fn random_msg<R: Rng>(shape: &[usize], t: u64, rng: &mut R) -> MultiPoly {
        sample_uniform(shape, t, rng)
    }

    #[test]
    fn sigma_must_be_positive() {
        assert!(NoiseParams::with_sigma(0.0).is_err());
        assert!(NoiseParams::with_sigma(-1.0).is_err());
        assert!(NoiseParams::new(1.0, 0.0).is_err());
        let np = NoiseParams::from_gaussian_parameter((2.0 * std::f64::consts::PI).sqrt()).unwrap();
        assert!((np.sigma() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noise_moments_and_truncation() {
        let np = NoiseParams::with_sigma(1.0).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let samples: Vec<i64> = (0..100_000).map(|_| np.sample_one(&mut rng)).collect();
        let mean = samples.iter().sum::<i64>() as f64 / samples.len() as f64;
        let var = samples.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / samples.len() as f64;
        // rounding adds 1/12 to the continuous variance
        assert!((var - 1.0).abs() < 0.1, "variance {var}");
        assert!(samples.iter().all(|x| x.abs() <= np.bound()));
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let np = NoiseParams::with_sigma(3.2).unwrap();
        let a = sample_noise(&np, &[16, 4], 12289, &mut ChaCha20Rng::seed_from_u64(1));
        let b = sample_noise(&np, &[16, 4], 12289, &mut ChaCha20Rng::seed_from_u64(1));
        assert_eq!(a, b);
    }

    #[test]
    fn public_key_relation() {
        let sch = scheme(vec![16, 4], 257, 1, 1);
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let (sk, pk) = keygen(&sch, &mut rng);
        // a0 + a1 s = -t e with e bounded by the truncation
        let v = pk.a0().add(&pk.a1().negacyclic_mul(sk.poly()).unwrap()).unwrap();
        let bound = sch.noise.bound();
        for c in v.centered() {
            assert_eq!(c % 257, 0);
            assert!((c / 257).abs() <= bound);
        }
        assert!(sk.poly().centered().iter().all(|c| c.abs() <= bound));
        let (_, pk2) = keygen(&sch, &mut ChaCha20Rng::seed_from_u64(4));
        assert_ne!(pk.a1(), pk2.a1());
    }

    #[test]
    fn encrypt_decrypt_roundtrip() {
        let sch = scheme(vec![8, 8], 257, 1, 1);
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let (sk, pk) = keygen(&sch, &mut rng);
        let shape = sch.ring.degrees().to_vec();
        for _ in 0..100 {
            let m = random_msg(&shape, 257, &mut rng);
            let ct = encrypt(&pk, &m, &mut rng).unwrap();
            assert_eq!(ct.gamma(), 2);
            assert_eq!(ct.depth(), 0);
            assert_eq!(decrypt(&sk, &ct).unwrap(), m);
        }
        let zero = MultiPoly::zero(&shape, 257);
        assert_eq!(decrypt(&sk, &encrypt(&pk, &zero, &mut rng).unwrap()).unwrap(), zero);
        let top = MultiPoly::constant(&shape, 257, 256);
        let c1 = encrypt(&pk, &top, &mut rng).unwrap();
        let c2 = encrypt(&pk, &top, &mut rng).unwrap();
        assert_ne!(c1, c2);
        assert_eq!(decrypt(&sk, &c1).unwrap(), top);
    }

    #[test]
    fn encrypt_rejects_foreign_messages() {
        let sch = scheme(vec![8], 257, 1, 1);
        let (_, pk) = keygen(&sch, &mut ChaCha20Rng::seed_from_u64(0));
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        assert!(encrypt(&pk, &MultiPoly::zero(&[4, 2], 257), &mut rng).is_err());
        assert!(encrypt(&pk, &MultiPoly::zero(&[8], 17), &mut rng).is_err());
    }

    #[test]
    fn fresh_noise_within_analytic_bound() {
        let sch = scheme(vec![16, 16], 257, 1, 1);
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let (sk, pk) = keygen(&sch, &mut rng);
        let b = sch.noise.bound() as u64;
        let n = sch.ring.n() as u64;
        // m + t (g + f s - e u)
        let limit = 257 / 2 + 257 * (b + 2 * n * b * b);
        for _ in 0..20 {
            let m = random_msg(sch.ring.degrees(), 257, &mut rng);
            let ct = encrypt(&pk, &m, &mut rng).unwrap();
            let norm = noise_norm(&sk, &ct).unwrap();
            assert!(norm <= limit && norm < sch.ring.q() / 2);
        }
    }

    #[test]
    fn homomorphic_add_and_mul() {
        // the product is later summed with a fresh ciphertext
        let sch = scheme(vec![8, 4], 257, 1, 2);
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let (sk, pk) = keygen(&sch, &mut rng);
        let shape = sch.ring.degrees().to_vec();
        for _ in 0..100 {
            let m1 = random_msg(&shape, 257, &mut rng);
            let m2 = random_msg(&shape, 257, &mut rng);
            let c1 = encrypt(&pk, &m1, &mut rng).unwrap();
            let c2 = encrypt(&pk, &m2, &mut rng).unwrap();
            assert_eq!(decrypt(&sk, &he_add(&c1, &c2).unwrap()).unwrap(), m1.add(&m2).unwrap());
            let prod = he_mul(&c1, &c2).unwrap();
            assert_eq!(prod.gamma(), 3);
            assert_eq!(prod.depth(), 1);
            let want = m1.negacyclic_mul_with(&m2, MulPath::Schoolbook).unwrap();
            assert_eq!(decrypt(&sk, &prod).unwrap(), want);
            // gamma 3 plus gamma 2
            let sum = he_add(&prod, &c1).unwrap();
            assert_eq!(sum.gamma(), 3);
            assert_eq!(decrypt(&sk, &sum).unwrap(), want.add(&m1).unwrap());
        }
    }

    #[test]
    fn identity_plaintexts() {
        let sch = scheme(vec![16], 257, 1, 1);
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let (sk, pk) = keygen(&sch, &mut rng);
        let m = random_msg(&[16], 257, &mut rng);
        let c = encrypt(&pk, &m, &mut rng).unwrap();
        let one = encrypt(&pk, &MultiPoly::constant(&[16], 257, 1), &mut rng).unwrap();
        let zero = encrypt(&pk, &MultiPoly::zero(&[16], 257), &mut rng).unwrap();
        assert_eq!(decrypt(&sk, &he_mul(&c, &one).unwrap()).unwrap(), m);
        assert_eq!(decrypt(&sk, &he_add(&c, &zero).unwrap()).unwrap(), m);
    }

    #[test]
    fn depth_budget_enforced() {
        let sch = scheme(vec![8], 257, 1, 1);
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let (_, pk) = keygen(&sch, &mut rng);
        let m = MultiPoly::constant(&[8], 257, 3);
        let c = encrypt(&pk, &m, &mut rng).unwrap();
        let c2 = he_mul(&c, &c).unwrap();
        assert_eq!(he_mul(&c2, &c), Err(Error::Depth { depth: 2, max: 1 }));
    }

    #[test]
    fn many_additions_within_sized_modulus() {
        let sch = scheme(vec![16, 4], 257, 1, 50);
        let mut rng = ChaCha20Rng::seed_from_u64(21);
        let (sk, pk) = keygen(&sch, &mut rng);
        let shape = sch.ring.degrees().to_vec();
        let mut want = MultiPoly::zero(&shape, 257);
        let mut acc: Option<Ciphertext> = None;
        for _ in 0..50 {
            let m = random_msg(&shape, 257, &mut rng);
            let c = encrypt(&pk, &m, &mut rng).unwrap();
            want = want.add(&m).unwrap();
            acc = Some(match acc {
                None => c,
                Some(a) => he_add(&a, &c).unwrap(),
            });
        }
        assert_eq!(decrypt(&sk, &acc.unwrap()).unwrap(), want);
    }

    #[test]
    fn plaintext_multiplication() {
        let sch = scheme(vec![8, 8], 257, 1, 1);
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let (sk, pk) = keygen(&sch, &mut rng);
        let m = random_msg(&[8, 8], 257, &mut rng);
        let k = MultiPoly::from_signed(&[8, 8], 257, &[1, -2, 0, 0, 0, 0, 0, 0, 1, 1]
            .iter()
            .copied()
            .chain(std::iter::repeat(0).take(54))
            .collect::<Vec<_>>())
        .unwrap();
        let ct = mul_plain(&encrypt(&pk, &m, &mut rng).unwrap(), &k).unwrap();
        assert_eq!(ct.depth(), 0);
        assert_eq!(decrypt(&sk, &ct).unwrap(), m.negacyclic_mul_with(&k, MulPath::Schoolbook).unwrap());
    }

    #[test]
    fn counter_tracks_products() {
        let sch = scheme(vec![8], 257, 1, 1);
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let (_, pk) = keygen(&sch, &mut rng);
        let c = encrypt(&pk, &MultiPoly::constant(&[8], 257, 1), &mut rng).unwrap();
        let ops = OpCounter::new();
        let p = ops.mul(&c, &c).unwrap();
        ops.add(&p, &c).unwrap();
        assert_eq!((ops.products(), ops.additions(), ops.plain_products()), (1, 1, 0));
    }
}
