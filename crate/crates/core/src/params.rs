//! Parameter selection and lattice security estimation.
//!
//! The correctness bound on `q` is evaluated exactly (big integers, with
//! sigma taken as the exact binary fraction it is stored as). The root
//! Hermite factor and bit-security formulas are generic over any
//! `num_traits::Float`; the crate root re-exports the `f64` instances.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{Float, FromPrimitive, One, ToPrimitive, Zero};

use crate::arith::{self, MODULUS_CEILING};
use crate::error::{param_err, Result};

/// Attacker advantage assumed when none is configured.
pub const DEFAULT_EPSILON: f64 = 1.0 / 4_294_967_296.0; // 2^-32

/// Lower bound on `q` for `D` products between fresh ciphertexts and `A` sums:
/// `q >= 4 (2 t sigma^2 sqrt(n))^{D+1} (2n)^{D/2} sqrt(A)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QBound {
    /// Smallest integer not below the bound.
    pub ceil: BigUint,
    /// `ceil(log2(bound))`.
    pub bits: u32,
    /// `log2(bound)` as a float, for reporting.
    pub log2: f64,
}

pub fn min_q_bound(t: u64, sigma: f64, n: u64, depth: u32, adds: u64) -> QBound {
    try_min_q_bound(t, sigma, n, depth, adds).expect("min_q_bound needs positive inputs")
}

pub fn try_min_q_bound(t: u64, sigma: f64, n: u64, depth: u32, adds: u64) -> Result<QBound> {
    if t == 0 || n == 0 || adds == 0 {
        return Err(param_err!("t, n and A must be positive"));
    }
    let sigma_q = BigRational::from_float(sigma)
        .filter(|s| *s > BigRational::zero())
        .ok_or_else(|| param_err!("sigma must be positive and finite, got {sigma}"))?;
    let d = depth as usize;
    let big = |v: u64| BigRational::from_integer(BigUint::from(v).into());
    // bound^2 = 16 (2t)^{2(D+1)} sigma^{4(D+1)} n^{D+1} (2n)^D A
    let squared = big(16)
        * num_traits::pow(big(2 * t), 2 * (d + 1))
        * num_traits::pow(sigma_q, 4 * (d + 1))
        * num_traits::pow(big(n), d + 1)
        * num_traits::pow(big(2 * n), d)
        * big(adds);
    let squared_ceil = squared.ceil().to_integer().to_biguint().expect("positive");
    let mut ceil = squared_ceil.sqrt();
    if &ceil * &ceil < squared_ceil {
        ceil += 1u32;
    }
    let bits = if ceil <= BigUint::one() {
        0
    } else {
        (&ceil - 1u32).bits() as u32
    };
    let log2 = 2.0
        + (depth as f64 + 1.0) * (1.0 + (t as f64).log2() + 2.0 * sigma.log2() + 0.5 * (n as f64).log2())
        + depth as f64 / 2.0 * (2.0 * n as f64).log2()
        + 0.5 * (adds as f64).log2();
    Ok(QBound { ceil, bits, log2 })
}

/// Smallest prime `q >= bound` with `q = 1 mod 2 max(degrees)`.
pub fn choose_prime(bound: &BigUint, degrees: &[usize]) -> Result<u64> {
    let max = *degrees
        .iter()
        .max()
        .ok_or_else(|| param_err!("no ring degrees given"))? as u64;
    let step = 2 * max;
    let start = bound
        .to_u64()
        .filter(|&b| b < MODULUS_CEILING)
        .ok_or_else(|| param_err!("bound {bound} exceeds the 2^62 arithmetic ceiling"))?
        .max(2);
    let mut q = start + (step - (start - 1) % step) % step;
    while q < MODULUS_CEILING {
        if arith::is_prime(q) {
            return Ok(q);
        }
        q += step;
    }
    Err(param_err!(
        "no prime = 1 mod {step} between {start} and the 2^62 ceiling"
    ))
}

/// Root Hermite factor and the derived attack cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecurityEstimate<T> {
    pub delta: T,
    pub bit_sec: T,
    pub epsilon: T,
    /// `c = sqrt(ln(1/eps) / pi)`.
    pub c: T,
}

fn lit<T: FromPrimitive>(v: f64) -> T {
    T::from_f64(v).expect("float literal")
}

pub fn attacker_constant<T: Float + FromPrimitive>(epsilon: T) -> T {
    ((T::one() / epsilon).ln() / lit(std::f64::consts::PI)).sqrt()
}

/// `log2(delta) = log2(c q / s)^2 / (4 n log2 q)`.
pub fn hermite_factor<T: Float + FromPrimitive>(n: u64, q: u64, s: T, epsilon: T) -> Result<T> {
    let qf: T = lit(q as f64);
    if !(s > T::zero() && qf > s) {
        return Err(param_err!("need q > s > 0"));
    }
    if !(epsilon > T::zero() && epsilon < T::one()) {
        return Err(param_err!("attacker advantage must lie in (0, 1)"));
    }
    if n == 0 {
        return Err(param_err!("n must be positive"));
    }
    let c = attacker_constant(epsilon);
    let num = (c * qf / s).log2();
    let log_delta = num * num / (lit::<T>(4.0) * lit(n as f64) * qf.log2());
    Ok(lit::<T>(2.0).powf(log_delta))
}

/// `t_BKZ(delta) = 1.8 / log2(delta) - 110`.
pub fn bit_security<T: Float + FromPrimitive>(delta: T) -> Result<T> {
    if !(delta > T::one()) {
        return Err(param_err!("root Hermite factor must exceed 1"));
    }
    Ok(lit::<T>(1.8) / delta.log2() - lit(110.0))
}

pub fn estimate<T: Float + FromPrimitive>(n: u64, q: u64, s: T, epsilon: T) -> Result<SecurityEstimate<T>> {
    let delta = hermite_factor(n, q, s, epsilon)?;
    Ok(SecurityEstimate {
        delta,
        bit_sec: bit_security(delta)?,
        epsilon,
        c: attacker_constant(epsilon),
    })
}

/// The full selection pipeline for one ring shape.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterChoice {
    pub degrees: Vec<usize>,
    pub n: u64,
    pub bound: QBound,
    pub q: u64,
    /// `ceil(log2 q)` of the chosen prime.
    pub log2_q: u32,
    pub security: SecurityEstimate<f64>,
}

pub fn select_parameters(
    t: u64,
    sigma: f64,
    degrees: &[usize],
    depth: u32,
    adds: u64,
    epsilon: f64,
) -> Result<ParameterChoice> {
    let n: u64 = degrees.iter().map(|&d| d as u64).product();
    let bound = try_min_q_bound(t, sigma, n, depth, adds)?;
    let q = choose_prime(&bound.ceil, degrees)?;
    let s = sigma * (2.0 * std::f64::consts::PI).sqrt();
    let security = estimate(n, q, s, epsilon)?;
    Ok(ParameterChoice {
        degrees: degrees.to_vec(),
        n,
        bound,
        q,
        log2_q: 64 - (q - 1).leading_zeros(),
        security,
    })
}

/// Which ring family handles a 2-D workload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variate {
    /// RLWE: one variable, rows handled as separate polynomials.
    Uni,
    /// 2-RLWE: one ciphertext per image.
    Bi,
    /// 3-RLWE: a third variable indexes the packed images.
    Tri,
}

impl Variate {
    pub const ALL: [Variate; 3] = [Variate::Uni, Variate::Bi, Variate::Tri];

    pub fn vars(self) -> usize {
        match self {
            Variate::Uni => 1,
            Variate::Bi => 2,
            Variate::Tri => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Variate::Uni => "RLWE",
            Variate::Bi => "2-RLWE",
            Variate::Tri => "3-RLWE",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Correlation,
    Filtering,
}

/// Slack factors `h` (security degree over minimal result degree) per scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slack {
    pub uni: u64,
    pub bi: u64,
    pub tri: u64,
}

impl Slack {
    pub fn get(&self, v: Variate) -> u64 {
        match v {
            Variate::Uni => self.uni,
            Variate::Bi => self.bi,
            Variate::Tri => self.tri,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchemeCost {
    pub n: u64,
    pub ciphertexts: u64,
    pub products: u64,
}

/// Closed-form size and product counts for `I` image pairs of side `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostModel {
    pub scenario: Scenario,
    pub uni: SchemeCost,
    pub bi: SchemeCost,
    pub tri: SchemeCost,
}

impl CostModel {
    pub fn get(&self, v: Variate) -> SchemeCost {
        match v {
            Variate::Uni => self.uni,
            Variate::Bi => self.bi,
            Variate::Tri => self.tri,
        }
    }
}

pub fn cost_model(scenario: Scenario, n_img: u64, filter: u64, images: u64, slack: Slack) -> Result<CostModel> {
    if n_img == 0 || images == 0 {
        return Err(param_err!("image side and count must be positive"));
    }
    let (span, uni_ct, uni_prod) = match scenario {
        Scenario::Correlation => (2 * n_img - 1, 2 * n_img * images, n_img * n_img * images),
        Scenario::Filtering => {
            if filter == 0 || filter >= n_img {
                return Err(param_err!("filtering needs 0 < F < N"));
            }
            (n_img + filter - 1, (n_img + filter) * images, n_img * filter * images)
        }
    };
    Ok(CostModel {
        scenario,
        uni: SchemeCost {
            n: span * slack.uni,
            ciphertexts: uni_ct,
            products: uni_prod,
        },
        bi: SchemeCost {
            n: span * span * slack.bi,
            ciphertexts: 2 * images,
            products: images,
        },
        tri: SchemeCost {
            n: span * span * slack.tri * images,
            ciphertexts: 2,
            products: 1,
        },
    })
}
