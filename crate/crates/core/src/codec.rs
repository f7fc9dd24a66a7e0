//! Encoding signals and fixed-point reals into plaintext polynomials.
//!
//! Signals take one sample per coefficient, so a ring product of two
//! encodings is their multidimensional linear convolution as long as the
//! output support fits inside the ring degrees on every axis.
//!
//! Fixed-point numbers use a dedicated variable `v` with `v^{n_v} = -1`:
//! integer digits sit at ascending powers and the fractional digit
//! `b_{-k}` is stored negated at `v^{n_v - k}`, where the wrap gives it
//! weight `b^{-k}`.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{FromPrimitive, Signed, ToPrimitive};

use crate::arith;
use crate::error::{param_err, structure_err, Error, Result};
use crate::ring::{MultiPoly, RingParams};
use crate::tensor::{reversed, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Layout {
    /// Samples in natural order.
    Convolution,
    /// Samples index-reversed per axis, so a ring product correlates.
    Correlation,
}

/// Placement of a tensor inside a ring shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignalEncoding {
    pub dims: Vec<usize>,
    pub offsets: Vec<usize>,
    pub layout: Layout,
}

impl SignalEncoding {
    pub fn at_origin(dims: &[usize], layout: Layout) -> Self {
        Self {
            dims: dims.to_vec(),
            offsets: vec![0; dims.len()],
            layout,
        }
    }
}

fn fits(degrees: &[usize], needed: impl Iterator<Item = usize>) -> Result<()> {
    for (axis, (need, &avail)) in needed.zip(degrees).enumerate() {
        if need > avail {
            return Err(Error::Sizing {
                axis,
                needed: need,
                available: avail,
            });
        }
    }
    Ok(())
}

fn check_rank(degrees: &[usize], dims: &[usize]) -> Result<()> {
    if degrees.len() != dims.len() {
        return Err(structure_err!("tensor of rank {} for a ring with {} variables", dims.len(), degrees.len()));
    }
    Ok(())
}

/// Output dims of the linear convolution of two supports; a sizing error
/// names the first axis where `s_i + k_i - 1` exceeds `n_i`.
pub fn check_support(degrees: &[usize], signal: &[usize], kernel: &[usize]) -> Result<Vec<usize>> {
    check_rank(degrees, signal)?;
    check_rank(degrees, kernel)?;
    let out: Vec<usize> = signal.iter().zip(kernel).map(|(s, k)| s + k - 1).collect();
    fits(degrees, out.iter().copied())?;
    Ok(out)
}

/// One sample per coefficient at the origin. Samples must satisfy `|v| < t`;
/// negative values are stored as their residues.
pub fn encode_signal(x: &Tensor<i64>, ring: &RingParams, layout: Layout) -> Result<MultiPoly> {
    encode_with(x, ring.degrees(), ring.t(), &SignalEncoding::at_origin(x.dims(), layout))
}

pub fn encode_with(x: &Tensor<i64>, degrees: &[usize], t: u64, enc: &SignalEncoding) -> Result<MultiPoly> {
    if x.dims() != enc.dims.as_slice() || enc.offsets.len() != enc.dims.len() {
        return Err(structure_err!("tensor dims {:?} do not match the encoding", x.dims()));
    }
    check_rank(degrees, x.dims())?;
    fits(degrees, x.dims().iter().zip(&enc.offsets).map(|(d, o)| d + o))?;
    if let Some(v) = x.data().iter().find(|v| v.unsigned_abs() >= t) {
        return Err(param_err!("sample {v} is not below t = {t} in magnitude"));
    }
    let placed = match enc.layout {
        Layout::Convolution => x.clone(),
        Layout::Correlation => reversed(x),
    };
    let strides = crate::ring::strides(degrees);
    let mut coeffs = vec![0u64; degrees.iter().product()];
    let mut idx = vec![0; x.dims().len()];
    for &v in placed.data() {
        let flat: usize = idx
            .iter()
            .zip(&enc.offsets)
            .zip(&strides)
            .map(|((i, o), s)| (i + o) * s)
            .sum();
        coeffs[flat] = arith::reduce_i64(v, t);
        crate::ring::increment(&mut idx, x.dims());
    }
    MultiPoly::from_coeffs(degrees, t, coeffs)
}

/// Reads the leading `dims` region; `signed` applies the centered lift.
pub fn decode_signal(p: &MultiPoly, dims: &[usize], signed: bool) -> Result<Tensor<i64>> {
    check_rank(p.shape(), dims)?;
    fits(p.shape(), dims.iter().copied())?;
    let strides = crate::ring::strides(p.shape());
    let t = p.modulus();
    let c = p.coeffs();
    Ok(Tensor::from_fn(dims, |idx| {
        let v = c[idx.iter().zip(&strides).map(|(i, s)| i * s).sum::<usize>()];
        if signed {
            arith::center(v, t)
        } else {
            v as i64
        }
    }))
}

/// Horizontal-gradient Sobel kernel.
pub fn sobel_x() -> Tensor<i64> {
    Tensor::new(vec![3, 3], vec![-1, 0, 1, -2, 0, 2, -1, 0, 1]).unwrap()
}

/// Vertical-gradient Sobel kernel.
pub fn sobel_y() -> Tensor<i64> {
    Tensor::new(vec![3, 3], vec![-1, -2, -1, 0, 0, 0, 1, 2, 1]).unwrap()
}

/// Base-`b` fixed point in a variable of degree `n_v`, with `N_plus`
/// integer digit positions above the units digit and `N_minus` fractional
/// digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedPointEncoding {
    base: u64,
    n_v: usize,
    n_plus: usize,
    n_minus: usize,
}

impl FixedPointEncoding {
    /// Requires `2 N_plus + 2 N_minus < n_v` so that the integer and
    /// fractional digits of a single product never share a position.
    pub fn new(base: u64, n_v: usize, n_plus: usize, n_minus: usize) -> Result<Self> {
        if base < 2 {
            return Err(param_err!("fixed-point base must be at least 2"));
        }
        if n_v == 0 || !n_v.is_power_of_two() {
            return Err(param_err!("n_v = {n_v} is not a power of two"));
        }
        if 2 * (n_plus + n_minus) >= n_v {
            return Err(param_err!(
                "digit budgets N+ = {n_plus}, N- = {n_minus} collide after one product in n_v = {n_v}"
            ));
        }
        Ok(Self {
            base,
            n_v,
            n_plus,
            n_minus,
        })
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn n_v(&self) -> usize {
        self.n_v
    }

    pub fn n_plus(&self) -> usize {
        self.n_plus
    }

    pub fn n_minus(&self) -> usize {
        self.n_minus
    }

    /// Whether a product's coefficients, at most `(N+ + N- + 1)(b-1)^2` in
    /// magnitude, stay inside the centered range of `t`.
    pub fn product_fits(&self, t: u64) -> bool {
        let digits = (self.n_plus + self.n_minus + 1) as u128;
        let top = (self.base as u128 - 1).pow(2);
        digits * top <= (t as u128 - 1) / 2
    }
}

fn int<I: FromPrimitive>(v: u64) -> I {
    I::from_u64(v).expect("integer type too narrow")
}

/// Digits of `x` placed as described on [`FixedPointEncoding`].
pub fn encode_fixed<I>(x: &Ratio<I>, enc: &FixedPointEncoding, t: u64) -> Result<MultiPoly>
where
    I: Integer + Signed + Clone + FromPrimitive + ToPrimitive,
{
    if !enc.product_fits(t) {
        return Err(param_err!("t = {t} is too small for one product of these digit budgets"));
    }
    let b: I = int(enc.base);
    let scale = num_traits::pow(b.clone(), enc.n_minus);
    let scaled = x.abs() * Ratio::from_integer(scale);
    if !scaled.is_integer() {
        return Err(param_err!("value needs more than {} fractional digits", enc.n_minus));
    }
    let mut rest = scaled.to_integer();
    let mut coeffs = vec![0u64; enc.n_v];
    let mut i = 0;
    while !rest.is_zero() {
        let (q, r) = rest.div_rem(&b);
        let d = r.to_u64().expect("digit below base");
        if i < enc.n_minus {
            coeffs[enc.n_v - (enc.n_minus - i)] = arith::neg_mod(d % t, t);
        } else if i - enc.n_minus <= enc.n_plus {
            coeffs[i - enc.n_minus] = d % t;
        } else {
            return Err(param_err!("value needs more than {} integer digits", enc.n_plus + 1));
        }
        rest = q;
        i += 1;
    }
    let p = MultiPoly::from_coeffs(&[enc.n_v], t, coeffs)?;
    Ok(if x.is_negative() { p.neg() } else { p })
}

/// Positions up to `2 N_plus` are integer digits; every higher position
/// `p` is a negated fractional digit of weight `b^{-(n_v - p)}`.
pub fn decode_fixed<I>(p: &MultiPoly, enc: &FixedPointEncoding) -> Result<Ratio<I>>
where
    I: Integer + Signed + Clone + FromPrimitive,
{
    if p.shape() != [enc.n_v] {
        return Err(structure_err!("fixed-point polynomial must have shape [{}]", enc.n_v));
    }
    let b: I = int(enc.base);
    let mut acc = Ratio::from_integer(I::zero());
    for (pos, c) in p.centered().into_iter().enumerate() {
        if c == 0 {
            continue;
        }
        let c = I::from_i64(c).expect("integer type too narrow");
        acc = if pos <= 2 * enc.n_plus {
            acc + Ratio::from_integer(c * num_traits::pow(b.clone(), pos))
        } else {
            acc - Ratio::new(c, num_traits::pow(b.clone(), enc.n_v - pos))
        };
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::MulPath;
    use crate::tensor::{linear_convolution, linear_correlation};
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn ring(degrees: &[usize], t: u64) -> RingParams {
        let q = crate::params::choose_prime(&num_bigint::BigUint::from(1u64 << 40), degrees).unwrap();
        RingParams::new(degrees.to_vec(), q, t).unwrap()
    }

    fn random(dims: &[usize], lo: i64, hi: i64, rng: &mut ChaCha20Rng) -> Tensor<i64> {
        Tensor::from_fn(dims, |_| rng.gen_range(lo..=hi))
    }

    #[test]
    fn impulse_is_constant_one() {
        let r = ring(&[8, 8], 257);
        let one = Tensor::new(vec![1, 1], vec![1i64]).unwrap();
        assert_eq!(encode_signal(&one, &r, Layout::Convolution).unwrap(), MultiPoly::constant(&[8, 8], 257, 1));
    }

    #[test]
    fn sobel_layout() {
        let t = 257;
        let p = encode_signal(&sobel_x(), &ring(&[4, 4], t), Layout::Convolution).unwrap();
        let c = p.coeffs();
        assert_eq!(&c[0..4], &[t - 1, 0, 1, 0]);
        assert_eq!(&c[4..8], &[t - 2, 0, 2, 0]);
        assert_eq!(&c[8..12], &[t - 1, 0, 1, 0]);
        assert!(c[12..].iter().all(|&v| v == 0));
    }

    #[test]
    fn signal_roundtrips() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let t = 12289;
        let r = ring(&[32, 32], t);
        let x = random(&[32, 32], -6144, 6144, &mut rng);
        let p = encode_signal(&x, &r, Layout::Convolution).unwrap();
        assert_eq!(decode_signal(&p, &[32, 32], true).unwrap(), x);
        let u = random(&[32, 32], 0, 12288, &mut rng);
        let p = encode_signal(&u, &r, Layout::Convolution).unwrap();
        assert_eq!(decode_signal(&p, &[32, 32], false).unwrap(), u);
        let edge = Tensor::new(vec![1, 4], vec![-3i64, 6144, -6144, 1]).unwrap();
        let p = encode_signal(&edge, &r, Layout::Convolution).unwrap();
        assert_eq!(decode_signal(&p, &[1, 4], true).unwrap(), edge);
        assert!(decode_signal(&p, &[33, 1], true).is_err());
    }

    #[test]
    fn product_is_linear_convolution() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let t = 12289;
        let r = ring(&[8, 8], t);
        let x = random(&[4, 4], -20, 20, &mut rng);
        let h = random(&[2, 2], -5, 5, &mut rng);
        let px = encode_signal(&x, &r, Layout::Convolution).unwrap();
        let ph = encode_signal(&h, &r, Layout::Convolution).unwrap();
        let y = px.negacyclic_mul_with(&ph, MulPath::Schoolbook).unwrap();
        assert_eq!(decode_signal(&y, &[5, 5], true).unwrap(), linear_convolution(&x, &h).unwrap());
        let hc = encode_signal(&h, &r, Layout::Correlation).unwrap();
        let yc = px.negacyclic_mul_with(&hc, MulPath::Schoolbook).unwrap();
        assert_eq!(decode_signal(&yc, &[5, 5], true).unwrap(), linear_correlation(&x, &h).unwrap());
    }

    #[test]
    fn sizing_errors_name_the_axis() {
        assert_eq!(
            check_support(&[16, 8], &[10, 6], &[3, 4]),
            Err(Error::Sizing {
                axis: 1,
                needed: 9,
                available: 8
            })
        );
        assert_eq!(check_support(&[16, 8], &[10, 5], &[3, 4]).unwrap(), vec![12, 8]);
        let r = ring(&[4, 4], 257);
        let big = Tensor::<i64>::zeros(&[5, 2]);
        assert!(matches!(
            encode_signal(&big, &r, Layout::Convolution),
            Err(Error::Sizing { axis: 0, .. })
        ));
        let loud = Tensor::new(vec![1, 1], vec![257i64]).unwrap();
        assert!(encode_signal(&loud, &r, Layout::Convolution).is_err());
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn fixed_point_examples() {
        let t = 257;
        let enc = FixedPointEncoding::new(2, 8, 1, 1).unwrap();
        assert!(encode_fixed(&q(0, 1), &enc, t).unwrap().is_zero());
        let p = encode_fixed(&q(5, 2), &enc, t).unwrap();
        assert_eq!(p.coeffs(), &[0, 1, 0, 0, 0, 0, 0, t - 1]);
        assert_eq!(decode_fixed::<BigInt>(&p, &enc).unwrap(), q(5, 2));
        let y = encode_fixed(&q(3, 2), &enc, t).unwrap();
        let prod = p.negacyclic_mul_with(&y, MulPath::Schoolbook).unwrap();
        assert_eq!(decode_fixed::<BigInt>(&prod, &enc).unwrap(), q(15, 4));
        // the integer type behind the rational is generic
        assert_eq!(decode_fixed::<i64>(&prod, &enc).unwrap(), Ratio::new(15i64, 4));
    }

    #[test]
    fn fixed_point_budgets() {
        assert!(FixedPointEncoding::new(2, 8, 2, 2).is_err());
        let enc = FixedPointEncoding::new(2, 8, 1, 1).unwrap();
        assert!(encode_fixed(&q(1, 4), &enc, 257).is_err());
        assert!(encode_fixed(&q(4, 1), &enc, 257).is_err());
        assert!(encode_fixed(&q(-7, 2), &enc, 257).is_ok());
        let wide = FixedPointEncoding::new(16, 16, 3, 3).unwrap();
        assert!(encode_fixed(&q(1, 1), &wide, 257).is_err());
    }

    #[test]
    fn fixed_point_products_are_exact() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let t = 65537;
        for (base, n_v, np, nm) in [(2u64, 16usize, 3usize, 3usize), (16, 16, 3, 3), (10, 32, 5, 4)] {
            let enc = FixedPointEncoding::new(base, n_v, np, nm).unwrap();
            let span = (base as i64).pow((np + nm + 1) as u32);
            let den = (base as i64).pow(nm as u32);
            for _ in 0..50 {
                let x = q(rng.gen_range(-span + 1..span), den);
                let y = q(rng.gen_range(-span + 1..span), den);
                let px = encode_fixed(&x, &enc, t).unwrap();
                let py = encode_fixed(&y, &enc, t).unwrap();
                assert_eq!(decode_fixed::<BigInt>(&px, &enc).unwrap(), x);
                let prod = px.negacyclic_mul_with(&py, MulPath::Schoolbook).unwrap();
                assert_eq!(decode_fixed::<BigInt>(&prod, &enc).unwrap(), &x * &y);
            }
        }
    }
}
