//! Dense complex tensors, Haar-random vectors, maximally entangled bonds and
//! exact pairwise contraction.

use std::io::{Read, Write};

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// A dense tensor stored in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<C64>,
}

fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for i in (0..shape.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * shape[i + 1];
    }
    s
}

impl DenseTensor {
    pub fn new(shape: Vec<usize>, data: Vec<C64>) -> Result<Self> {
        if shape.contains(&0) {
            return Err(Error::ShapeMismatch(format!(
                "zero dimension in shape {shape:?}"
            )));
        }
        let len: usize = shape.iter().product();
        if data.len() != len {
            return Err(Error::ShapeMismatch(format!(
                "shape {shape:?} needs {len} entries, got {}",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument(
                "tensor entries must be finite".into(),
            ));
        }
        Ok(DenseTensor { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let len = shape.iter().product();
        DenseTensor {
            shape,
            data: vec![C64::new(0.0, 0.0); len],
        }
    }

    pub fn scalar(z: C64) -> Self {
        DenseTensor {
            shape: Vec::new(),
            data: vec![z],
        }
    }

    pub fn vector(data: Vec<C64>) -> Result<Self> {
        Self::new(vec![data.len()], data)
    }

    /// `n × n` identity as a rank-2 tensor.
    pub fn identity(n: usize) -> Self {
        let mut t = Self::zeros(vec![n, n]);
        for i in 0..n {
            t.data[i * n + i] = C64::new(1.0, 0.0);
        }
        t
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(C64::norm_sqr).sum()
    }

    pub fn scale(&mut self, s: f64) {
        for z in &mut self.data {
            *z *= s;
        }
    }

    pub fn reshape(self, shape: Vec<usize>) -> Result<Self> {
        if shape.iter().product::<usize>() != self.data.len() {
            return Err(Error::ShapeMismatch(format!(
                "cannot reshape {:?} into {shape:?}",
                self.shape
            )));
        }
        Ok(DenseTensor {
            shape,
            data: self.data,
        })
    }

    /// Reorders axes so that output axis `k` is input axis `axes[k]`.
    pub fn permute_axes(&self, axes: &[usize]) -> Result<Self> {
        let r = self.rank();
        let mut seen = vec![false; r];
        if axes.len() != r
            || axes
                .iter()
                .any(|&a| a >= r || std::mem::replace(&mut seen[a], true))
        {
            return Err(Error::ShapeMismatch(format!(
                "{axes:?} is not a permutation of {r} axes"
            )));
        }
        if axes.iter().enumerate().all(|(i, &a)| i == a) {
            return Ok(self.clone());
        }
        let in_strides = strides(&self.shape);
        let shape: Vec<usize> = axes.iter().map(|&a| self.shape[a]).collect();
        let step: Vec<usize> = axes.iter().map(|&a| in_strides[a]).collect();
        let mut data = Vec::with_capacity(self.data.len());
        let mut idx = vec![0usize; r];
        let mut offset = 0usize;
        for _ in 0..self.data.len() {
            data.push(self.data[offset]);
            for k in (0..r).rev() {
                idx[k] += 1;
                offset += step[k];
                if idx[k] < shape[k] {
                    break;
                }
                offset -= step[k] * shape[k];
                idx[k] = 0;
            }
        }
        Ok(DenseTensor { shape, data })
    }

    pub fn max_abs_diff(&self, other: &DenseTensor) -> f64 {
        assert_eq!(self.shape, other.shape);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// `C = A·B` for row-major `A: m×k`, `B: k×n`.
pub(crate) fn matmul(a: &[C64], b: &[C64], m: usize, k: usize, n: usize) -> Vec<C64> {
    let mut c = vec![C64::new(0.0, 0.0); m * n];
    for i in 0..m {
        let row = &mut c[i * n..(i + 1) * n];
        for (l, &x) in a[i * k..(i + 1) * k].iter().enumerate() {
            if x == C64::new(0.0, 0.0) {
                continue;
            }
            for (out, &y) in row.iter_mut().zip(&b[l * n..(l + 1) * n]) {
                *out += x * y;
            }
        }
    }
    c
}

/// Contracts `a` and `b` over the index pairs `(axis of a, axis of b)`.
///
/// The result carries the free axes of `a` followed by the free axes of `b`,
/// each in their original order.
pub fn contract(a: &DenseTensor, b: &DenseTensor, pairs: &[(usize, usize)]) -> Result<DenseTensor> {
    let mut used_a = vec![false; a.rank()];
    let mut used_b = vec![false; b.rank()];
    for &(i, j) in pairs {
        if i >= a.rank() || j >= b.rank() {
            return Err(Error::ShapeMismatch(format!(
                "pair ({i}, {j}) out of range for ranks {} and {}",
                a.rank(),
                b.rank()
            )));
        }
        if a.shape[i] != b.shape[j] {
            return Err(Error::ShapeMismatch(format!(
                "contracted dimensions differ: a[{i}] = {}, b[{j}] = {}",
                a.shape[i], b.shape[j]
            )));
        }
        if std::mem::replace(&mut used_a[i], true) || std::mem::replace(&mut used_b[j], true) {
            return Err(Error::ShapeMismatch(format!(
                "axis repeated in pair ({i}, {j})"
            )));
        }
    }
    let free_a: Vec<usize> = (0..a.rank()).filter(|&i| !used_a[i]).collect();
    let free_b: Vec<usize> = (0..b.rank()).filter(|&j| !used_b[j]).collect();

    let order_a: Vec<usize> = free_a
        .iter()
        .copied()
        .chain(pairs.iter().map(|p| p.0))
        .collect();
    let order_b: Vec<usize> = pairs
        .iter()
        .map(|p| p.1)
        .chain(free_b.iter().copied())
        .collect();
    let pa = a.permute_axes(&order_a)?;
    let pb = b.permute_axes(&order_b)?;

    let m: usize = free_a.iter().map(|&i| a.shape[i]).product();
    let k: usize = pairs.iter().map(|p| a.shape[p.0]).product();
    let n: usize = free_b.iter().map(|&j| b.shape[j]).product();
    let data = matmul(&pa.data, &pb.data, m, k, n);
    let shape = free_a
        .iter()
        .map(|&i| a.shape[i])
        .chain(free_b.iter().map(|&j| b.shape[j]))
        .collect();
    Ok(DenseTensor { shape, data })
}

/// Applies the square matrix `m` to axis `index`: `t'[..i..] = Σ_j m[i, j] t[..j..]`.
pub fn apply_matrix(t: &DenseTensor, m: &DMatrix<C64>, index: usize) -> Result<DenseTensor> {
    if index >= t.rank() {
        return Err(Error::ShapeMismatch(format!(
            "axis {index} out of range for rank {}",
            t.rank()
        )));
    }
    let d = t.shape[index];
    if m.nrows() != d || m.ncols() != d {
        return Err(Error::ShapeMismatch(format!(
            "matrix is {}x{}, axis {index} has dimension {d}",
            m.nrows(),
            m.ncols()
        )));
    }
    let outer: usize = t.shape[..index].iter().product();
    let inner: usize = t.shape[index + 1..].iter().product();
    let mut out = DenseTensor::zeros(t.shape.clone());
    for o in 0..outer {
        for i in 0..d {
            for j in 0..d {
                let mij = m[(i, j)];
                if mij == C64::new(0.0, 0.0) {
                    continue;
                }
                let src = (o * d + j) * inner;
                let dst = (o * d + i) * inner;
                for s in 0..inner {
                    out.data[dst + s] += mij * t.data[src + s];
                }
            }
        }
    }
    Ok(out)
}

/// Real matrix lifted to complex entries.
pub fn complexify(m: &DMatrix<f64>) -> DMatrix<C64> {
    m.map(|x| C64::new(x, 0.0))
}

/// A unit vector drawn from the Haar measure on `C^dim`.
///
/// Independent standard complex Gaussian entries, normalized; the Gaussian
/// vector's law is unitarily invariant so the direction is Haar-distributed.
pub fn haar_random_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<DenseTensor> {
    if dim == 0 {
        return Err(Error::InvalidArgument(
            "Haar state dimension must be positive".into(),
        ));
    }
    let mut data: Vec<C64> = (0..dim)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re, im)
        })
        .collect();
    let norm = data.iter().map(C64::norm_sqr).sum::<f64>().sqrt();
    for z in &mut data {
        *z /= norm;
    }
    Ok(DenseTensor {
        shape: vec![dim],
        data,
    })
}

/// The unnormalized maximally entangled pair `Σ_i |ii⟩` on `C^D ⊗ C^D`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntangledBond {
    dim: usize,
    tensor: DenseTensor,
}

impl EntangledBond {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Amplitudes as a `D × D` tensor.
    pub fn tensor(&self) -> &DenseTensor {
        &self.tensor
    }
}

pub fn make_bond(dim: usize) -> Result<EntangledBond> {
    if dim == 0 {
        return Err(Error::InvalidArgument(
            "bond dimension must be positive".into(),
        ));
    }
    Ok(EntangledBond {
        dim,
        tensor: DenseTensor::identity(dim),
    })
}

const DUMP_MAGIC: &[u8; 4] = b"RTNT";

/// Writes `magic, u32 rank, u64 dims…, interleaved (re, im) f64`, all little-endian.
pub fn write_dump<W: Write>(t: &DenseTensor, mut w: W) -> Result<()> {
    w.write_all(DUMP_MAGIC)?;
    w.write_all(&(t.rank() as u32).to_le_bytes())?;
    for &d in &t.shape {
        w.write_all(&(d as u64).to_le_bytes())?;
    }
    for z in &t.data {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_dump<R: Read>(mut r: R) -> Result<DenseTensor> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != DUMP_MAGIC {
        return Err(Error::InvalidArgument(
            "not a tensor dump (bad magic)".into(),
        ));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let rank = u32::from_le_bytes(b4) as usize;
    let mut b8 = [0u8; 8];
    let mut shape = Vec::with_capacity(rank);
    for _ in 0..rank {
        r.read_exact(&mut b8)?;
        shape.push(u64::from_le_bytes(b8) as usize);
    }
    let len: usize = shape.iter().product();
    let mut data = Vec::with_capacity(len);
    for _ in 0..len {
        r.read_exact(&mut b8)?;
        let re = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        data.push(C64::new(re, f64::from_le_bytes(b8)));
    }
    DenseTensor::new(shape, data)
}
