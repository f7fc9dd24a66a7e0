use super::MultiPoly;
use crate::error::{param_err, Result};

/// Base-`T` digits of a polynomial: `p = sum_i digits[i] * T^i` coefficientwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseDecomposition {
    pub base: u64,
    pub digits: Vec<MultiPoly>,
}

/// `ceil(log_T q)`, the number of base-`T` digits covering `[0, q)`.
pub fn digit_count(q: u64, base: u64) -> usize {
    let mut count = 0;
    let mut reach: u128 = 1;
    while reach < q as u128 {
        reach *= base as u128;
        count += 1;
    }
    count
}

pub fn base_decompose(p: &MultiPoly, base: u64) -> Result<BaseDecomposition> {
    let q = p.modulus();
    if base < 2 || base >= q {
        return Err(param_err!("decomposition base {base} outside [2, {q})"));
    }
    let count = digit_count(q, base);
    let mut rest = p.coeffs().to_vec();
    let mut digits = Vec::with_capacity(count);
    for _ in 0..count {
        let d = rest
            .iter_mut()
            .map(|c| {
                let r = *c % base;
                *c /= base;
                r
            })
            .collect();
        digits.push(MultiPoly::from_coeffs(p.shape(), q, d)?);
    }
    debug_assert!(rest.iter().all(|&c| c == 0));
    Ok(BaseDecomposition { base, digits })
}

impl BaseDecomposition {
    /// `sum_i digits[i] * base^i mod q`.
    pub fn recompose(&self) -> Result<MultiPoly> {
        let first = &self.digits[0];
        let q = first.modulus();
        let mut acc = MultiPoly::zero(first.shape(), q);
        let mut weight = 1u64;
        for d in &self.digits {
            acc.add_assign(&d.scalar_mul(weight))?;
            weight = crate::arith::mul_mod(weight, self.base % q, q);
        }
        Ok(acc)
    }
}
