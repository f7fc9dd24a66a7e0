//! Word-sized modular arithmetic for moduli below 2^62.
//!
//! Products go through `u128`; the NTT butterflies use Shoup's precomputed
//! quotients so the hot loop avoids 128-bit division.

/// Largest modulus accepted anywhere in the crate (exclusive).
pub const MODULUS_CEILING: u64 = 1 << 62;

#[inline]
pub fn add_mod(a: u64, b: u64, q: u64) -> u64 {
    let s = a + b;
    if s >= q {
        s - q
    } else {
        s
    }
}

#[inline]
pub fn sub_mod(a: u64, b: u64, q: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + q - b
    }
}

#[inline]
pub fn neg_mod(a: u64, q: u64) -> u64 {
    if a == 0 {
        0
    } else {
        q - a
    }
}

#[inline]
pub fn mul_mod(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 * b as u128) % q as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, q: u64) -> u64 {
    if q == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= q;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, q);
        }
        base = mul_mod(base, base, q);
        exp >>= 1;
    }
    acc
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Modular inverse via extended Euclid; `None` when `gcd(a, q) != 1`.
pub fn inv_mod(a: u64, q: u64) -> Option<u64> {
    let (mut r0, mut r1) = (q as i128, (a % q) as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let k = r0 / r1;
        (r0, r1) = (r1, r0 - k * r1);
        (s0, s1) = (s1, s0 - k * s1);
    }
    if r0 != 1 {
        return None;
    }
    Some(s0.rem_euclid(q as i128) as u64)
}

/// Reduce a signed integer into `[0, q)`.
#[inline]
pub fn reduce_i64(v: i64, q: u64) -> u64 {
    (v as i128).rem_euclid(q as i128) as u64
}

/// Centered representative in `(-q/2, q/2]`.
#[inline]
pub fn center(v: u64, q: u64) -> i64 {
    if v > q / 2 {
        v as i64 - q as i64
    } else {
        v as i64
    }
}

/// Deterministic Miller-Rabin; the witness set is exact for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &WITNESSES {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut r = 0;
    while d % 2 == 0 {
        d /= 2;
        r += 1;
    }
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Distinct prime factors by trial division (used on group orders `p - 1`
/// and on transform sizes, which are small or smooth in practice).
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Precomputed multiplier for Shoup modular multiplication by a fixed `w`.
#[derive(Debug, Clone, Copy)]
pub struct ShoupMul {
    pub value: u64,
    quotient: u64,
}

impl ShoupMul {
    pub fn new(value: u64, q: u64) -> Self {
        let quotient = (((value as u128) << 64) / q as u128) as u64;
        Self { value, quotient }
    }

    /// `x * value mod q` for `x < q`.
    #[inline]
    pub fn mul(&self, x: u64, q: u64) -> u64 {
        let hi = ((x as u128 * self.quotient as u128) >> 64) as u64;
        let r = x
            .wrapping_mul(self.value)
            .wrapping_sub(hi.wrapping_mul(q));
        if r >= q {
            r - q
        } else {
            r
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_division(n: u64) -> bool {
        if n < 2 {
            return false;
        }
        let mut d = 2;
        while d * d <= n {
            if n % d == 0 {
                return false;
            }
            d += 1;
        }
        true
    }

    #[test]
    fn miller_rabin_agrees_with_trial_division() {
        for n in 0..20_000u64 {
            assert_eq!(is_prime(n), trial_division(n), "n = {n}");
        }
        // Carmichael numbers and a strong pseudoprime to base 2
        for n in [561u64, 1105, 1729, 2047, 3215031751, 3825123056546413051] {
            assert!(!is_prime(n), "{n}");
        }
        assert!(is_prime((1 << 61) - 1));
    }

    #[test]
    fn inverse_and_pow() {
        let q = 12289;
        for a in 1..200 {
            let inv = inv_mod(a, q).unwrap();
            assert_eq!(mul_mod(a, inv, q), 1);
        }
        assert_eq!(inv_mod(6, 12), None);
        assert_eq!(pow_mod(3, 0, 7), 1);
        assert_eq!(pow_mod(3, 6, 7), 1);
    }

    #[test]
    fn shoup_matches_u128() {
        let q = (1u64 << 61) - 1;
        let w = 0x1234_5678_9abc_def1 % q;
        let s = ShoupMul::new(w, q);
        let mut x = 1u64;
        for _ in 0..1000 {
            x = mul_mod(x, 6364136223846793005 % q, q).wrapping_add(17) % q;
            assert_eq!(s.mul(x, q), mul_mod(x, w, q));
        }
    }

    #[test]
    fn centering() {
        assert_eq!(center(0, 257), 0);
        assert_eq!(center(128, 257), 128);
        assert_eq!(center(129, 257), -128);
        assert_eq!(center(256, 257), -1);
        assert_eq!(center(2, 4), 2);
        assert_eq!(reduce_i64(-3, 257), 254);
    }
}
