//! Slot packing along one ring variable.
//!
//! With `z^N = -1` on the index variable, a ring product convolves the
//! `z`-coefficients negacyclically. Pre-processing maps `N` blocks to
//! `z`-coefficients through an inverse length-`N` NTT over `Z_t` followed by
//! a twist by `eta^k` (`eta^N = -1`). The twist turns the negacyclic product
//! into a cyclic one and the NTT turns that into slotwise products, so one
//! ring product convolves every block with its own kernel independently.

use crate::arith::{self, gcd, inv_mod, mul_mod, pow_mod};
use crate::error::{param_err, structure_err, Error, Result};
use crate::ring::{find_root, MultiPoly, RootKind};
use crate::tensor::Tensor;

/// Largest composite `t` for which the brute-force root scan runs.
const COMPOSITE_SCAN_LIMIT: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotLayout {
    index_axis: usize,
    slots: usize,
    t: u64,
    eta: u64,
    alpha: u64,
    n_inv: u64,
}

impl SlotLayout {
    pub fn index_axis(&self) -> usize {
        self.index_axis
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    /// Twist root, `eta^N = -1`.
    pub fn eta(&self) -> u64 {
        self.eta
    }

    /// Slot NTT root, `alpha = eta^2`.
    pub fn alpha(&self) -> u64 {
        self.alpha
    }

    pub fn n_inv(&self) -> u64 {
        self.n_inv
    }
}

/// `eta^N = -1` and `gcd(alpha^i - 1, t) = 1` for `0 < i < N`.
fn valid_twist_root(eta: u64, slots: u64, t: u64) -> bool {
    if pow_mod(eta, slots, t) != t - 1 {
        return false;
    }
    let alpha = mul_mod(eta, eta, t);
    let mut a = 1;
    for _ in 1..slots {
        a = mul_mod(a, alpha, t);
        if gcd(arith::sub_mod(a, 1, t), t) != 1 {
            return false;
        }
    }
    true
}

pub fn make_layout(t: u64, slots: usize, index_axis: usize) -> Result<SlotLayout> {
    if slots == 0 || !slots.is_power_of_two() {
        return Err(param_err!("slot count {slots} is not a power of two"));
    }
    if t < 3 || t % 2 == 0 {
        return Err(Error::Existence(format!("no slot layout for even or tiny t = {t}")));
    }
    let n = slots as u64;
    let eta = if arith::is_prime(t) {
        find_root(t, n, RootKind::NegOne).map_err(|_| {
            Error::Existence(format!("2N = {} does not divide t - 1 = {}", 2 * n, t - 1))
        })?
    } else {
        if t > COMPOSITE_SCAN_LIMIT {
            return Err(param_err!("composite t = {t} too large for the root scan"));
        }
        (2..t)
            .find(|&e| valid_twist_root(e, n, t))
            .ok_or_else(|| Error::Existence(format!("no usable 2N-th root of -1 modulo t = {t}")))?
    };
    debug_assert!(valid_twist_root(eta, n, t));
    Ok(SlotLayout {
        index_axis,
        slots,
        t,
        eta,
        alpha: mul_mod(eta, eta, t),
        n_inv: inv_mod(n % t, t).expect("t is odd"),
    })
}

/// Blocks stacked along a trailing slot axis, residues mod `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockTensor {
    data: Tensor<u64>,
    t: u64,
}

impl BlockTensor {
    pub fn new(data: Tensor<i64>, t: u64) -> Self {
        Self {
            data: data.map(|&v| arith::reduce_i64(v, t)),
            t,
        }
    }

    pub fn from_residues(data: Tensor<u64>, t: u64) -> Result<Self> {
        if data.data().iter().any(|&v| v >= t) {
            return Err(param_err!("block values must be reduced mod {t}"));
        }
        Ok(Self { data, t })
    }

    /// The same block in every one of `slots` slots.
    pub fn broadcast(block: &Tensor<i64>, slots: usize, t: u64) -> Self {
        let mut dims = block.dims().to_vec();
        dims.push(slots);
        let data = Tensor::from_fn(&dims, |idx| *block.get(&idx[..idx.len() - 1]));
        Self::new(data, t)
    }

    /// Stack equally shaped blocks.
    pub fn stack(blocks: &[Tensor<i64>], t: u64) -> Result<Self> {
        let first = blocks.first().ok_or_else(|| structure_err!("no blocks to stack"))?;
        if blocks.iter().any(|b| b.dims() != first.dims()) {
            return Err(structure_err!("blocks differ in shape"));
        }
        let mut dims = first.dims().to_vec();
        dims.push(blocks.len());
        let data = Tensor::from_fn(&dims, |idx| {
            let (last, rest) = idx.split_last().unwrap();
            *blocks[*last].get(rest)
        });
        Ok(Self::new(data, t))
    }

    pub fn tensor(&self) -> &Tensor<u64> {
        &self.data
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn slots(&self) -> usize {
        *self.data.dims().last().unwrap()
    }

    pub fn block_dims(&self) -> &[usize] {
        let d = self.data.dims();
        &d[..d.len() - 1]
    }

    /// Block `k` with centered values.
    pub fn block(&self, k: usize) -> Tensor<i64> {
        Tensor::from_fn(self.block_dims(), |idx| {
            let mut full = idx.to_vec();
            full.push(k);
            arith::center(*self.data.get(&full), self.t)
        })
    }
}

/// Ring index for block position `pos` and slot coefficient `k`.
fn ring_index(pos: &[usize], k: usize, axis: usize) -> Vec<usize> {
    let mut idx = pos.to_vec();
    idx.insert(axis, k);
    idx
}

fn check_shape(layout: &SlotLayout, block_dims: &[usize], degrees: &[usize]) -> Result<()> {
    if layout.index_axis >= degrees.len() || degrees.len() != block_dims.len() + 1 {
        return Err(structure_err!(
            "blocks of rank {} do not fit ring {:?} with index axis {}",
            block_dims.len(),
            degrees,
            layout.index_axis
        ));
    }
    if degrees[layout.index_axis] != layout.slots {
        return Err(structure_err!(
            "index variable has degree {}, layout has {} slots",
            degrees[layout.index_axis],
            layout.slots
        ));
    }
    let others = degrees
        .iter()
        .enumerate()
        .filter(|&(a, _)| a != layout.index_axis)
        .map(|(_, &d)| d);
    if block_dims.iter().zip(others).any(|(b, d)| b > &d) {
        return Err(structure_err!("block {block_dims:?} exceeds ring {degrees:?}"));
    }
    Ok(())
}

fn powers(base: u64, count: usize, t: u64) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut p = 1;
    for _ in 0..count {
        out.push(p);
        p = mul_mod(p, base, t);
    }
    out
}

/// Blocks to a plaintext polynomial over `degrees` (mod `t`).
pub fn pre_process(x: &BlockTensor, layout: &SlotLayout, degrees: &[usize]) -> Result<MultiPoly> {
    if x.t != layout.t || x.slots() != layout.slots {
        return Err(structure_err!("block tensor does not match the slot layout"));
    }
    check_shape(layout, x.block_dims(), degrees)?;
    let (n, t) = (layout.slots, layout.t);
    let alpha_inv = powers(inv_mod(layout.alpha, t).unwrap(), n, t);
    let eta = powers(layout.eta, n, t);
    let mut coeffs = vec![0u64; degrees.iter().product()];
    let block_dims = x.block_dims().to_vec();
    let ring_strides = crate::ring::strides(degrees);
    let mut pos = vec![0; block_dims.len()];
    let mut slots = vec![0u64; n];
    for _ in 0..block_dims.iter().product::<usize>() {
        let base = x.data.flat_index(&ring_index(&pos, 0, pos.len()));
        slots.copy_from_slice(&x.data.data()[base..base + n]);
        if slots.iter().any(|&v| v != 0) {
            for k in 0..n {
                let mut acc = 0;
                for (l, &v) in slots.iter().enumerate() {
                    acc = arith::add_mod(acc, mul_mod(v, alpha_inv[(l * k) % n], t), t);
                }
                let v = mul_mod(mul_mod(acc, layout.n_inv, t), eta[k], t);
                let idx = ring_index(&pos, k, layout.index_axis);
                let flat: usize = idx.iter().zip(&ring_strides).map(|(i, s)| i * s).sum();
                coeffs[flat] = v;
            }
        }
        crate::ring::increment(&mut pos, &block_dims);
    }
    MultiPoly::from_coeffs(degrees, t, coeffs)
}

/// Plaintext polynomial back to blocks of `block_dims`, reading the
/// leading region of every non-index axis.
pub fn post_process(p: &MultiPoly, layout: &SlotLayout, block_dims: &[usize]) -> Result<BlockTensor> {
    if p.modulus() != layout.t {
        return Err(structure_err!("polynomial modulus {} is not t = {}", p.modulus(), layout.t));
    }
    check_shape(layout, block_dims, p.shape())?;
    let (n, t) = (layout.slots, layout.t);
    let alpha = powers(layout.alpha, n, t);
    let eta_inv = powers(inv_mod(layout.eta, t).unwrap(), n, t);
    let ring_strides = crate::ring::strides(p.shape());
    let c = p.coeffs();
    let mut dims = block_dims.to_vec();
    dims.push(n);
    let mut data = Vec::with_capacity(dims.iter().product());
    let mut pos = vec![0; block_dims.len()];
    let mut untwisted = vec![0u64; n];
    for _ in 0..block_dims.iter().product::<usize>() {
        for (k, u) in untwisted.iter_mut().enumerate() {
            let idx = ring_index(&pos, k, layout.index_axis);
            let flat: usize = idx.iter().zip(&ring_strides).map(|(i, s)| i * s).sum();
            *u = mul_mod(c[flat], eta_inv[k], t);
        }
        for l in 0..n {
            let mut acc = 0;
            for (k, &u) in untwisted.iter().enumerate() {
                acc = arith::add_mod(acc, mul_mod(u, alpha[(l * k) % n], t), t);
            }
            data.push(acc);
        }
        crate::ring::increment(&mut pos, block_dims);
    }
    Ok(BlockTensor {
        data: Tensor::new(dims, data)?,
        t,
    })
}

/// Non-overlapping tiling of a 2-D image into `(bh, bw, N)`, blocks in
/// raster order. With `pad`, the image is zero-padded to whole blocks.
pub fn pack_blocks(image: &Tensor<i64>, bh: usize, bw: usize, t: u64, pad: bool) -> Result<BlockTensor> {
    let [rows, cols] = image.dims() else {
        return Err(structure_err!("pack_blocks expects a 2-D image, got {:?}", image.dims()));
    };
    let (rows, cols) = (*rows, *cols);
    if bh == 0 || bw == 0 {
        return Err(param_err!("block dims must be positive"));
    }
    if !pad && (rows % bh != 0 || cols % bw != 0) {
        return Err(structure_err!("image {rows}x{cols} is not a multiple of {bh}x{bw} blocks"));
    }
    let grid_w = cols.div_ceil(bw);
    let count = rows.div_ceil(bh) * grid_w;
    let data = Tensor::from_fn(&[bh, bw, count], |idx| {
        let (r, c) = ((idx[2] / grid_w) * bh + idx[0], (idx[2] % grid_w) * bw + idx[1]);
        if r < rows && c < cols {
            *image.get(&[r, c])
        } else {
            0
        }
    });
    Ok(BlockTensor::new(data, t))
}

/// Inverse of [`pack_blocks`]; padding beyond `rows x cols` is dropped.
pub fn unpack_blocks(bt: &BlockTensor, rows: usize, cols: usize) -> Result<Tensor<u64>> {
    let [bh, bw] = bt.block_dims() else {
        return Err(structure_err!("unpack_blocks expects 2-D blocks"));
    };
    let (bh, bw) = (*bh, *bw);
    let grid_w = cols.div_ceil(bw);
    if rows == 0 || cols == 0 || rows.div_ceil(bh) * grid_w != bt.slots() {
        return Err(structure_err!(
            "{} blocks of {bh}x{bw} cannot tile a {rows}x{cols} image",
            bt.slots()
        ));
    }
    Ok(Tensor::from_fn(&[rows, cols], |idx| {
        let k = (idx[0] / bh) * grid_w + idx[1] / bw;
        *bt.data.get(&[idx[0] % bh, idx[1] % bw, k])
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::MulPath;
    use crate::tensor::linear_convolution;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn random_blocks(dims: &[usize], lo: i64, hi: i64, rng: &mut ChaCha20Rng) -> Tensor<i64> {
        Tensor::from_fn(dims, |_| rng.gen_range(lo..=hi))
    }

    #[test]
    fn layout_existence() {
        for (t, n) in [(12289u64, 8usize), (257, 4), (257, 128), (12289, 4)] {
            let l = make_layout(t, n, 2).unwrap();
            // brute force: eta^N = -1 and alpha^i != 1 for 0 < i < N
            assert_eq!(pow_mod(l.eta(), n as u64, t), t - 1);
            assert_eq!(l.alpha(), mul_mod(l.eta(), l.eta(), t));
            assert!((1..n as u64).all(|i| pow_mod(l.alpha(), i, t) != 1));
            assert_eq!(mul_mod(l.n_inv(), n as u64, t), 1);
        }
        assert!(matches!(make_layout(257, 256, 0), Err(Error::Existence(_))));
        assert!(make_layout(257, 3, 0).is_err());
        // composite moduli: 17 * 97 has 8-th roots of -1 modulo both factors
        let l = make_layout(17 * 97, 4, 0).unwrap();
        assert!(valid_twist_root(l.eta(), 4, 17 * 97));
        assert!(matches!(make_layout(15, 2, 0), Err(Error::Existence(_))));
    }

    #[test]
    fn single_slot_is_identity() {
        let l = make_layout(257, 1, 1).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let x = BlockTensor::new(random_blocks(&[4, 1], 0, 256, &mut rng), 257);
        let p = pre_process(&x, &l, &[4, 1]).unwrap();
        assert_eq!(p.coeffs(), x.tensor().data());
        assert_eq!(post_process(&p, &l, &[4]).unwrap(), x);
    }

    #[test]
    fn roundtrip_and_linearity() {
        let t = 12289;
        let l = make_layout(t, 8, 0).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let degrees = [8, 8, 4];
        let xs = random_blocks(&[6, 3, 8], 0, t as i64 - 1, &mut rng);
        let ys = random_blocks(&[6, 3, 8], 0, t as i64 - 1, &mut rng);
        let x = BlockTensor::new(xs.clone(), t);
        let y = BlockTensor::new(ys.clone(), t);
        let px = pre_process(&x, &l, &degrees).unwrap();
        assert_eq!(post_process(&px, &l, &[6, 3]).unwrap(), x);
        let (a, b) = (5u64, 1234u64);
        let combo = BlockTensor::new(
            Tensor::new(
                xs.dims().to_vec(),
                xs.data().iter().zip(ys.data()).map(|(u, v)| a as i64 * u + b as i64 * v).collect(),
            )
            .unwrap(),
            t,
        );
        let py = pre_process(&y, &l, &degrees).unwrap();
        let want = px.scalar_mul(a).add(&py.scalar_mul(b)).unwrap();
        assert_eq!(pre_process(&combo, &l, &degrees).unwrap(), want);
    }

    #[test]
    fn single_slot_impulse_matches_direct_sum() {
        let t = 257;
        let n = 4;
        let l = make_layout(t, n, 1).unwrap();
        let (slot, value) = (2usize, 77u64);
        let mut data = Tensor::zeros(&[3, n]);
        data.set(&[1, slot], value as i64);
        let p = pre_process(&BlockTensor::new(data, t), &l, &[4, n]).unwrap();
        let ainv = inv_mod(l.alpha(), t).unwrap();
        for k in 0..n {
            let direct = mul_mod(
                mul_mod(value, pow_mod(ainv, (slot * k) as u64, t), t),
                mul_mod(l.n_inv(), pow_mod(l.eta(), k as u64, t), t),
                t,
            );
            assert_eq!(p.coeffs()[n + k], direct);
            assert_eq!(p.coeffs()[k], 0);
        }
    }

    fn blockwise(x: &BlockTensor, h: &BlockTensor, l: &SlotLayout, degrees: &[usize], out: &[usize]) -> BlockTensor {
        let px = pre_process(x, l, degrees).unwrap();
        let ph = pre_process(h, l, degrees).unwrap();
        post_process(&px.negacyclic_mul_with(&ph, MulPath::Schoolbook).unwrap(), l, out).unwrap()
    }

    #[test]
    fn one_product_convolves_every_block() {
        let t = 257;
        let l = make_layout(t, 4, 2).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let degrees = [8, 8, 4];
        let xb: Vec<Tensor<i64>> = (0..4).map(|_| random_blocks(&[5, 5], -3, 3, &mut rng)).collect();
        let hb: Vec<Tensor<i64>> = (0..4).map(|_| random_blocks(&[3, 3], -2, 2, &mut rng)).collect();
        let x = BlockTensor::stack(&xb, t).unwrap();
        let h = BlockTensor::stack(&hb, t).unwrap();
        let y = blockwise(&x, &h, &l, &degrees, &[7, 7]);
        for k in 0..4 {
            assert_eq!(y.block(k), linear_convolution(&xb[k], &hb[k]).unwrap());
        }
        // perturb block 1 only
        let mut xb2 = xb.clone();
        let v = *xb2[1].get(&[0, 0]);
        xb2[1].set(&[0, 0], v + 1);
        let y2 = blockwise(&BlockTensor::stack(&xb2, t).unwrap(), &h, &l, &degrees, &[7, 7]);
        for k in 0..4 {
            assert_eq!(y2.block(k) == y.block(k), k != 1);
        }
    }

    #[test]
    fn impulse_kernel_reproduces_blocks() {
        let t = 257;
        let l = make_layout(t, 4, 2).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let block = random_blocks(&[4, 4], 0, 100, &mut rng);
        let x = BlockTensor::broadcast(&block, 4, t);
        let mut imp = Tensor::zeros(&[4, 4, 4]);
        imp.set(&[0, 0, 2], 1);
        let h = BlockTensor::new(imp, t);
        let y = blockwise(&x, &h, &l, &[4, 4, 4], &[4, 4]);
        for k in 0..4 {
            let want = if k == 2 { block.clone() } else { Tensor::zeros(&[4, 4]) };
            assert_eq!(y.block(k), want);
        }
    }

    #[test]
    fn pack_and_unpack() {
        let img = Tensor::from_fn(&[16, 16], |i| ((i[0] / 8 + i[1] / 8 + i[0] + i[1]) % 2) as i64 * (1 + i[0] as i64));
        let bt = pack_blocks(&img, 8, 8, 257, false).unwrap();
        assert_eq!(bt.slots(), 4);
        // block 1 is the top-right quadrant
        for r in 0..8 {
            for c in 0..8 {
                assert_eq!(bt.block(1).get(&[r, c]), img.get(&[r, c + 8]));
                assert_eq!(bt.block(2).get(&[r, c]), img.get(&[r + 8, c]));
            }
        }
        let back = unpack_blocks(&bt, 16, 16).unwrap();
        assert_eq!(back.map(|&v| v as i64), img);
        assert!(pack_blocks(&img, 5, 8, 257, false).is_err());
        let padded = pack_blocks(&img, 5, 8, 257, true).unwrap();
        assert_eq!(padded.slots(), 8);
        assert_eq!(unpack_blocks(&padded, 16, 16).unwrap().map(|&v| v as i64), img);
        assert!(unpack_blocks(&bt, 16, 24).is_err());
    }
}
