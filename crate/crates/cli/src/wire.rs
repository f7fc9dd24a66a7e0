//! Binary serialization of keys and ciphertexts.
//!
//! Every file starts with `b"MRLW"`, a `u16` version and a `u16` kind tag,
//! followed by the ring block (`m`, the `m` degrees, `q`, `t`) and a
//! kind-specific payload. All integers are little-endian `u64` unless noted;
//! coefficient arrays hold canonical residues in row-major order.
//!
//! | kind | payload |
//! |------|---------|
//! | secret key | sigma bits, truncation bits, max depth, `s` |
//! | public key | sigma bits, truncation bits, max depth, `a0`, `a1` |
//! | ciphertext | depth, max depth, gamma, `gamma` arrays |
//! | relinearization key | base, count, then `(a_i, b_i)` pairs |
//! | structure key | base, target `m` and degrees, permutation, count, then `(a, b)` pairs, `j` outer |

use anyhow::{bail, ensure, Context, Result};

use mrlwe::relin::{RelinKey, StructureKey};
use mrlwe::ring::{MultiPoly, RingMapping, RingParams};
use mrlwe::she::{Ciphertext, NoiseParams, PublicKey, SchemeParams, SecretKey};

pub const MAGIC: &[u8; 4] = b"MRLW";
pub const VERSION: u16 = 1;

/// Upper bound on any decoded length, to fail fast on corrupt headers.
const MAX_LEN: u64 = 1 << 28;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u16)]
pub enum Kind {
    SecretKey = 1,
    PublicKey = 2,
    Ciphertext = 3,
    RelinKey = 4,
    StructureKey = 5,
}

impl Kind {
    fn from_tag(tag: u16) -> Result<Self> {
        Ok(match tag {
            1 => Kind::SecretKey,
            2 => Kind::PublicKey,
            3 => Kind::Ciphertext,
            4 => Kind::RelinKey,
            5 => Kind::StructureKey,
            _ => bail!("unknown object kind {tag}"),
        })
    }
}

/// Any object the wire format can hold.
#[derive(Debug, Clone, PartialEq)]
pub enum WireObject {
    SecretKey(SecretKey),
    PublicKey(PublicKey),
    Ciphertext(Ciphertext),
    RelinKey(RelinKey),
    StructureKey(StructureKey),
}

struct Writer(Vec<u8>);

impl Writer {
    fn new(kind: Kind, ring: &RingParams) -> Self {
        let mut w = Writer(Vec::new());
        w.0.extend_from_slice(MAGIC);
        w.0.extend_from_slice(&VERSION.to_le_bytes());
        w.0.extend_from_slice(&(kind as u16).to_le_bytes());
        w.shape(ring.degrees());
        w.u64(ring.q());
        w.u64(ring.t());
        w
    }

    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    fn shape(&mut self, degrees: &[usize]) {
        self.u64(degrees.len() as u64);
        for &d in degrees {
            self.u64(d as u64);
        }
    }

    fn poly(&mut self, p: &MultiPoly) {
        for &c in p.coeffs() {
            self.u64(c);
        }
    }

    fn scheme(&mut self, s: &SchemeParams) {
        self.u64(s.noise.sigma().to_bits());
        self.u64(s.noise.truncation().to_bits());
        self.u64(s.max_depth as u64);
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn u64(&mut self) -> Result<u64> {
        let end = self.pos + 8;
        ensure!(end <= self.buf.len(), "truncated input at byte {}", self.pos);
        let v = u64::from_le_bytes(self.buf[self.pos..end].try_into().unwrap());
        self.pos = end;
        Ok(v)
    }

    fn len(&mut self, what: &str) -> Result<usize> {
        let v = self.u64()?;
        ensure!(v <= MAX_LEN, "implausible {what} {v}");
        Ok(v as usize)
    }

    fn shape(&mut self) -> Result<Vec<usize>> {
        let m = self.len("variable count")?;
        ensure!((1..=16).contains(&m), "implausible variable count {m}");
        (0..m).map(|_| self.len("degree")).collect()
    }

    fn poly(&mut self, shape: &[usize], q: u64) -> Result<MultiPoly> {
        let n: usize = shape.iter().product();
        ensure!(n as u64 <= MAX_LEN, "implausible ring degree {n}");
        let coeffs = (0..n).map(|_| self.u64()).collect::<Result<Vec<_>>>()?;
        Ok(MultiPoly::from_coeffs(shape, q, coeffs)?)
    }

    fn scheme(&mut self, ring: RingParams) -> Result<SchemeParams> {
        let sigma = f64::from_bits(self.u64()?);
        let trunc = f64::from_bits(self.u64()?);
        let max_depth = u32::try_from(self.u64()?).context("max depth out of range")?;
        Ok(SchemeParams::new(ring, NoiseParams::new(sigma, trunc)?, max_depth))
    }
}

pub fn encode(obj: &WireObject) -> Vec<u8> {
    match obj {
        WireObject::SecretKey(sk) => {
            let mut w = Writer::new(Kind::SecretKey, sk.params());
            w.scheme(sk.scheme());
            w.poly(sk.poly());
            w.0
        }
        WireObject::PublicKey(pk) => {
            let mut w = Writer::new(Kind::PublicKey, pk.params());
            w.scheme(pk.scheme());
            w.poly(pk.a0());
            w.poly(pk.a1());
            w.0
        }
        WireObject::Ciphertext(ct) => {
            let mut w = Writer::new(Kind::Ciphertext, ct.params());
            w.u64(ct.depth() as u64);
            w.u64(ct.max_depth() as u64);
            w.u64(ct.gamma() as u64);
            for c in ct.comps() {
                w.poly(c);
            }
            w.0
        }
        WireObject::RelinKey(rk) => {
            let mut w = Writer::new(Kind::RelinKey, rk.params());
            w.u64(rk.base());
            w.u64(rk.hom().len() as u64);
            for (a, b) in rk.hom() {
                w.poly(a);
                w.poly(b);
            }
            w.0
        }
        WireObject::StructureKey(stk) => {
            let mut w = Writer::new(Kind::StructureKey, stk.source());
            w.u64(stk.base());
            w.shape(stk.target().degrees());
            for &p in stk.mapping().perm() {
                w.u64(p as u64);
            }
            w.u64(stk.grid().len() as u64);
            for (a, b) in stk.grid() {
                w.poly(a);
                w.poly(b);
            }
            w.0
        }
    }
}

pub fn decode(buf: &[u8]) -> Result<WireObject> {
    ensure!(buf.len() >= 8, "truncated header");
    ensure!(&buf[..4] == MAGIC, "bad magic, not an MRLW file");
    let version = u16::from_le_bytes([buf[4], buf[5]]);
    ensure!(version == VERSION, "unsupported format version {version}");
    let kind = Kind::from_tag(u16::from_le_bytes([buf[6], buf[7]]))?;
    let mut r = Reader { buf, pos: 8 };
    let degrees = r.shape()?;
    let q = r.u64()?;
    let t = r.u64()?;
    let ring = RingParams::new(degrees.clone(), q, t)?;
    let obj = match kind {
        Kind::SecretKey => {
            let scheme = r.scheme(ring)?;
            WireObject::SecretKey(SecretKey::from_poly(r.poly(&degrees, q)?, scheme)?)
        }
        Kind::PublicKey => {
            let scheme = r.scheme(ring)?;
            let a0 = r.poly(&degrees, q)?;
            let a1 = r.poly(&degrees, q)?;
            WireObject::PublicKey(PublicKey::from_parts(a0, a1, scheme)?)
        }
        Kind::Ciphertext => {
            let depth = u32::try_from(r.u64()?).context("depth out of range")?;
            let max_depth = u32::try_from(r.u64()?).context("max depth out of range")?;
            let gamma = r.len("component count")?;
            ensure!(gamma <= 64, "implausible component count {gamma}");
            let comps = (0..gamma).map(|_| r.poly(&degrees, q)).collect::<Result<Vec<_>>>()?;
            WireObject::Ciphertext(Ciphertext::new(comps, ring, depth, max_depth)?)
        }
        Kind::RelinKey => {
            let base = r.u64()?;
            let count = r.len("key count")?;
            ensure!(count <= 64, "implausible key count {count}");
            let mut hom = Vec::with_capacity(count);
            for _ in 0..count {
                hom.push((r.poly(&degrees, q)?, r.poly(&degrees, q)?));
            }
            WireObject::RelinKey(RelinKey::from_parts(base, hom, ring)?)
        }
        Kind::StructureKey => {
            let base = r.u64()?;
            let target = r.shape()?;
            let n: usize = degrees.iter().product();
            let perm = (0..n).map(|_| r.len("permutation entry")).collect::<Result<Vec<_>>>()?;
            let mapping = RingMapping::new(degrees.clone(), target.clone(), perm)?;
            let count = r.len("grid size")?;
            ensure!(count <= 64 * n, "implausible grid size {count}");
            let mut grid = Vec::with_capacity(count);
            for _ in 0..count {
                grid.push((r.poly(&target, q)?, r.poly(&target, q)?));
            }
            WireObject::StructureKey(StructureKey::from_parts(base, mapping, ring, grid)?)
        }
    };
    ensure!(r.pos == buf.len(), "{} trailing bytes", buf.len() - r.pos);
    Ok(obj)
}

pub fn write_file(path: &std::path::Path, obj: &WireObject) -> Result<()> {
    std::fs::write(path, encode(obj)).with_context(|| format!("writing {}", path.display()))
}

pub fn read_file(path: &std::path::Path) -> Result<WireObject> {
    let buf = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    decode(&buf).with_context(|| format!("decoding {}", path.display()))
}

macro_rules! expect_kind {
    ($name:ident, $variant:ident, $ty:ty) => {
        pub fn $name(path: &std::path::Path) -> Result<$ty> {
            match read_file(path)? {
                WireObject::$variant(x) => Ok(x),
                other => bail!(
                    "{} holds a {:?}, expected {}",
                    path.display(),
                    kind_of(&other),
                    stringify!($variant)
                ),
            }
        }
    };
}

fn kind_of(obj: &WireObject) -> Kind {
    match obj {
        WireObject::SecretKey(_) => Kind::SecretKey,
        WireObject::PublicKey(_) => Kind::PublicKey,
        WireObject::Ciphertext(_) => Kind::Ciphertext,
        WireObject::RelinKey(_) => Kind::RelinKey,
        WireObject::StructureKey(_) => Kind::StructureKey,
    }
}

expect_kind!(read_secret_key, SecretKey, SecretKey);
expect_kind!(read_public_key, PublicKey, PublicKey);
expect_kind!(read_ciphertext, Ciphertext, Ciphertext);
expect_kind!(read_relin_key, RelinKey, RelinKey);
expect_kind!(read_structure_key, StructureKey, StructureKey);

#[cfg(test)]
mod tests {
    use super::*;
    use mrlwe::relin::{gen_relin_key, gen_structure_key, remap_secret_key};
    use mrlwe::she::{encrypt, he_mul, keygen};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn objects(seed: u64) -> Vec<WireObject> {
        let ring = RingParams::new(vec![4, 4], 1_152_921_504_606_748_673, 257).unwrap();
        let scheme = SchemeParams::new(ring, NoiseParams::with_sigma(1.0).unwrap(), 2);
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let (sk, pk) = keygen(&scheme, &mut rng);
        let m = MultiPoly::constant(&[4, 4], 257, 9);
        let ct = encrypt(&pk, &m, &mut rng).unwrap();
        let prod = he_mul(&ct, &ct).unwrap();
        let rk = gen_relin_key(&sk, 1 << 20, &mut rng).unwrap();
        let mapping = RingMapping::row_major(vec![4, 4], vec![16]).unwrap();
        let dst = remap_secret_key(&sk, &mapping).unwrap();
        let stk = gen_structure_key(&sk, &dst, &mapping, 1 << 20, &mut rng).unwrap();
        vec![
            WireObject::SecretKey(sk),
            WireObject::PublicKey(pk),
            WireObject::Ciphertext(ct),
            WireObject::Ciphertext(prod),
            WireObject::RelinKey(rk),
            WireObject::StructureKey(stk),
        ]
    }

    #[test]
    fn every_kind_roundtrips() {
        for obj in objects(1) {
            let bytes = encode(&obj);
            let back = decode(&bytes).unwrap();
            assert_eq!(back, obj);
            assert_eq!(encode(&back), bytes);
        }
    }

    #[test]
    fn same_seed_same_bytes() {
        let a: Vec<_> = objects(3).iter().map(encode).collect();
        let b: Vec<_> = objects(3).iter().map(encode).collect();
        let c: Vec<_> = objects(4).iter().map(encode).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn corrupt_input_is_rejected() {
        let bytes = encode(&objects(1)[2]);
        assert!(decode(&bytes[..bytes.len() - 1]).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(decode(&extra).is_err());
        let mut magic = bytes.clone();
        magic[0] = b'X';
        assert!(decode(&magic).is_err());
        let mut version = bytes.clone();
        version[4] = 9;
        assert!(decode(&version).is_err());
        let mut kind = bytes.clone();
        kind[6] = 77;
        assert!(decode(&kind).is_err());
        // a coefficient at or above q
        let mut coeff = bytes;
        let last = coeff.len() - 8;
        coeff[last..].copy_from_slice(&u64::MAX.to_le_bytes());
        assert!(decode(&coeff).is_err());
    }
}
