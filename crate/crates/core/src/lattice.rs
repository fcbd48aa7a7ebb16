//! Multi-indices on `Z_L^d`, finite-support arrays and their Fourier symbols.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::ops::Neg;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sum::{neumaier, Neumaier};

/// Relative tolerance used by [`LocalArray::is_relative`] and
/// [`LocalArray::is_symmetric`] when entries are not exact.
pub const PROPERTY_TOLERANCE: f64 = 1e-12;

/// Canonical representative of `k mod L`.
///
/// Even `L` uses `{-L/2, .., L/2 - 1}`, odd `L` uses `{-(L-1)/2, .., (L-1)/2}`.
pub fn canonical(k: i64, l: usize) -> i64 {
    let l = l as i64;
    let r = k.rem_euclid(l);
    if r >= (l + 1) / 2 {
        r - l
    } else {
        r
    }
}

/// A lattice offset or wavenumber.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<i64>);

impl MultiIndex {
    /// # Panics
    ///
    /// If `coords` is empty.
    pub fn new(coords: impl Into<Vec<i64>>) -> Self {
        let coords = coords.into();
        assert!(!coords.is_empty(), "a multi-index needs at least one coordinate");
        MultiIndex(coords)
    }

    pub fn zero(d: usize) -> Self {
        Self::new(vec![0; d])
    }

    /// `sign * e_axis`.
    pub fn unit(d: usize, axis: usize, sign: i64) -> Self {
        let mut c = vec![0; d];
        c[axis] = sign;
        Self::new(c)
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// Largest absolute coordinate.
    pub fn max_abs(&self) -> u64 {
        self.0.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn reduce(&self, l: usize) -> Self {
        MultiIndex(self.0.iter().map(|&c| canonical(c, l)).collect())
    }

    /// Torus addition.
    pub fn add_mod(&self, other: &Self, l: usize) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        MultiIndex(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(&a, &b)| canonical(a + b, l))
                .collect(),
        )
    }

    pub fn dot(&self, other: &Self) -> i64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn dot_theta(&self, theta: &[f64]) -> f64 {
        self.0.iter().zip(theta).map(|(&k, t)| k as f64 * t).sum()
    }

    /// Position in a state vector over `Z_L^d`; axis 0 varies fastest.
    pub fn linear_index(&self, l: usize) -> usize {
        let li = l as i64;
        self.0
            .iter()
            .rev()
            .fold(0usize, |acc, &c| acc * l + c.rem_euclid(li) as usize)
    }

    /// Inverse of [`linear_index`](Self::linear_index), returning canonical coordinates.
    pub fn from_linear(mut idx: usize, d: usize, l: usize) -> Self {
        let mut c = Vec::with_capacity(d);
        for _ in 0..d {
            c.push(canonical((idx % l) as i64, l));
            idx /= l;
        }
        Self::new(c)
    }

    /// The continuous frequency `2 pi n / L`.
    pub fn to_theta(&self, l: usize) -> Vec<f64> {
        self.0.iter().map(|&n| 2.0 * PI * n as f64 / l as f64).collect()
    }

    /// Strictly positive in the lexicographic sense: first nonzero coordinate > 0.
    fn is_positive(&self) -> bool {
        self.0.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0)
    }
}

impl Neg for &MultiIndex {
    type Output = MultiIndex;
    fn neg(self) -> MultiIndex {
        MultiIndex(self.0.iter().map(|c| -c).collect())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

/// All of `Z_L^d` in storage order.
pub fn torus_indices(d: usize, l: usize) -> impl Iterator<Item = MultiIndex> {
    (0..l.pow(d as u32)).map(move |i| MultiIndex::from_linear(i, d, l))
}

/// A convolution array with finite support on `Z^d`.
///
/// Entries are kept sorted with zeros dropped. Mirror pairs `(k, -k)` are
/// cached so that symbols of symmetric arrays come out exactly real.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalArray {
    dim: usize,
    entries: Vec<(MultiIndex, f64)>,
    relative: bool,
    // (k, a_k, a_{-k}) for lexicographically positive k
    pairs: Vec<(MultiIndex, f64, f64)>,
}

impl LocalArray {
    /// Builds an array, summing duplicate offsets and dropping zeros.
    pub fn new(dim: usize, entries: impl IntoIterator<Item = (MultiIndex, f64)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("array dimension must be at least 1".into()));
        }
        let mut raw: Vec<(MultiIndex, f64)> = Vec::new();
        for (k, v) in entries {
            if k.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: k.dim(),
                });
            }
            if !v.is_finite() {
                return Err(Error::InvalidArgument("array entries must be finite".into()));
            }
            raw.push((k, v));
        }
        raw.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(MultiIndex, f64)> = Vec::with_capacity(raw.len());
        for (k, v) in raw {
            match merged.last_mut() {
                Some((last, acc)) if *last == k => *acc += v,
                _ => merged.push((k, v)),
            }
        }
        merged.retain(|(_, v)| *v != 0.0);
        Ok(Self::from_sorted(dim, merged))
    }

    fn from_sorted(dim: usize, entries: Vec<(MultiIndex, f64)>) -> Self {
        let mut pairs: Vec<(MultiIndex, f64, f64)> = Vec::new();
        for (k, v) in &entries {
            if k.is_zero() {
                continue;
            }
            if k.is_positive() {
                let mirror = lookup(&entries, &-k);
                pairs.push((k.clone(), *v, mirror));
            } else if lookup(&entries, &-k) == 0.0 {
                pairs.push((-k, 0.0, *v));
            }
        }
        let sum = neumaier(entries.iter().map(|e| e.1));
        let max = entries.iter().fold(0.0_f64, |m, e| m.max(e.1.abs()));
        LocalArray {
            dim,
            entries,
            relative: sum == 0.0 || sum.abs() <= PROPERTY_TOLERANCE * max,
            pairs,
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self::from_sorted(dim, Vec::new())
    }

    /// `{0: value}`.
    pub fn scalar(dim: usize, value: f64) -> Self {
        Self::new(dim, [(MultiIndex::zero(dim), value)]).expect("valid scalar array")
    }

    /// One-dimensional array from `(offset, value)` pairs.
    pub fn from_1d(entries: &[(i64, f64)]) -> Result<Self> {
        Self::new(1, entries.iter().map(|&(k, v)| (MultiIndex::new(vec![k]), v)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(MultiIndex, f64)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Smallest `q` with every nonzero entry inside `[-q, q]^d`.
    pub fn support_radius(&self) -> usize {
        self.entries
            .iter()
            .map(|(k, _)| k.max_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn get(&self, k: &MultiIndex) -> f64 {
        lookup(&self.entries, k)
    }

    pub fn sum(&self) -> f64 {
        neumaier(self.entries.iter().map(|e| e.1))
    }

    /// `max_k |a_k|`.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, e| m.max(e.1.abs()))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::new(self.dim, self.entries.iter().map(|(k, v)| (k.clone(), c * v))).expect("scaling preserves validity")
    }

    /// Entrywise sum of two arrays of one dimension.
    ///
    /// # Panics
    ///
    /// On a dimension mismatch.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "arrays must share a dimension");
        Self::new(self.dim, self.entries.iter().chain(other.entries.iter()).cloned())
            .expect("sum of valid arrays is valid")
    }

    /// Entry sum is zero: exactly, or within `1e-12` of the largest entry.
    pub fn is_relative(&self) -> bool {
        self.relative
    }

    /// `a_k == a_{-k}` for every `k`, up to the same relative tolerance.
    pub fn is_symmetric(&self) -> bool {
        let tol = PROPERTY_TOLERANCE * self.max_abs();
        self.pairs.iter().all(|(_, p, m)| (p - m).abs() <= tol)
    }

    fn check_lattice(&self, l: usize) -> Result<()> {
        let q = self.support_radius();
        if l <= 2 * q {
            return Err(Error::LatticeTooSmall { l, q, min: 2 * q + 1 });
        }
        Ok(())
    }

    /// `sum_k a_k exp(-j theta.k)`.
    ///
    /// The real part is accumulated as `sum a - sum a (1 - cos)`, which keeps
    /// relative accuracy near `theta = 0` where the symbol of a relative array
    /// is small. A relative array contributes no `sum a` term at all, so
    /// rounding in its entries cannot shift the symbol off zero at the origin.
    ///
    /// # Panics
    ///
    /// If `theta.len()` differs from the array dimension.
    pub fn z_symbol(&self, theta: &[f64]) -> Complex64 {
        assert_eq!(theta.len(), self.dim, "theta has the wrong dimension");
        self.symbol_with(|k| {
            let phase = k.dot_theta(theta);
            let s = libm::sin(0.5 * phase);
            (2.0 * s * s, libm::sin(phase))
        })
    }

    /// `sum_k a_k exp(-j 2 pi n.k / L)`, reducing `n.k` modulo `L` first.
    pub fn dft_symbol(&self, n: &MultiIndex, l: usize) -> Result<Complex64> {
        if n.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: n.dim(),
            });
        }
        self.check_lattice(l)?;
        let li = l as i64;
        Ok(self.symbol_with(|k| {
            let p = canonical(n.dot(k), l) as f64;
            let s = libm::sin(PI * p / li as f64);
            (2.0 * s * s, libm::sin(2.0 * PI * p / li as f64))
        }))
    }

    // `phase` returns (1 - cos, sin) of theta.k
    fn symbol_with(&self, phase: impl Fn(&MultiIndex) -> (f64, f64)) -> Complex64 {
        let mut re = Neumaier::new();
        if !self.relative {
            for (_, v) in &self.entries {
                re.add(*v);
            }
        }
        let mut im = Neumaier::new();
        for (k, plus, minus) in &self.pairs {
            let (one_minus_cos, sin) = phase(k);
            re.add(-(plus + minus) * one_minus_cos);
            let diff = plus - minus;
            if diff != 0.0 {
                im.add(-diff * sin);
            }
        }
        Complex64::new(re.value(), im.value())
    }

    /// `h_k = sum_l a_{k-l} x_l` on `Z_L^d`, state in [`MultiIndex::linear_index`] order.
    pub fn circular_convolve(&self, state: &[f64], l: usize) -> Result<Vec<f64>> {
        self.check_lattice(l)?;
        let n = l.pow(self.dim as u32);
        if state.len() != n {
            return Err(Error::SizeMismatch {
                expected: n,
                found: state.len(),
            });
        }
        let mut out = vec![0.0; n];
        for (idx, slot) in out.iter_mut().enumerate() {
            let k = MultiIndex::from_linear(idx, self.dim, l);
            let mut acc = 0.0;
            for (off, a) in &self.entries {
                let src = k.add_mod(&-off, l);
                acc += a * state[src.linear_index(l)];
            }
            *slot = acc;
        }
        Ok(out)
    }
}

fn lookup(entries: &[(MultiIndex, f64)], k: &MultiIndex) -> f64 {
    entries
        .binary_search_by(|e| e.0.cmp(k))
        .map(|i| entries[i].1)
        .unwrap_or(0.0)
}

/// Center `-2 d f`, value `f` at each of the `2d` unit offsets.
pub fn standard_consensus_array(d: usize, f_tilde: f64) -> Result<LocalArray> {
    if !(f_tilde > 0.0) {
        return Err(Error::NonPositive {
            name: "f_tilde",
            value: f_tilde,
        });
    }
    nearest_neighbor(d, f_tilde)
}

/// Same stencil as [`standard_consensus_array`] but any sign of gain, zero allowed.
pub(crate) fn nearest_neighbor(d: usize, gain: f64) -> Result<LocalArray> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    let mut entries = vec![(MultiIndex::zero(d), -2.0 * d as f64 * gain)];
    for axis in 0..d {
        entries.push((MultiIndex::unit(d, axis, 1), gain));
        entries.push((MultiIndex::unit(d, axis, -1), gain));
    }
    LocalArray::new(d, entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn canonical_sets() {
        let even: Vec<i64> = (0..4).map(|k| canonical(k, 4)).collect();
        assert_eq!(even, [0, 1, -2, -1]);
        let odd: Vec<i64> = (0..5).map(|k| canonical(k, 5)).collect();
        assert_eq!(odd, [0, 1, 2, -2, -1]);
        assert_eq!(canonical(-7, 4), 1);
    }

    #[test]
    fn linear_index_roundtrip() {
        for i in 0..125 {
            let k = MultiIndex::from_linear(i, 3, 5);
            assert_eq!(k.linear_index(5), i);
        }
    }

    #[test]
    fn dft_examples() {
        let a = standard_consensus_array(1, 1.0).unwrap();
        let v = a.dft_symbol(&MultiIndex::new([1]), 4).unwrap();
        assert!((v - c(-2.0, 0.0)).norm() < 1e-15);
        assert_eq!(a.dft_symbol(&MultiIndex::new([0]), 4).unwrap(), c(0.0, 0.0));

        let a2 = standard_consensus_array(2, 1.0).unwrap();
        let v = a2.dft_symbol(&MultiIndex::new([4, 4]), 8).unwrap();
        assert!((v - c(-8.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn dft_rejects_small_lattice() {
        let a = standard_consensus_array(1, 1.0).unwrap();
        let err = a.dft_symbol(&MultiIndex::new([0]), 2).unwrap_err();
        assert_eq!(err, Error::LatticeTooSmall { l: 2, q: 1, min: 3 });
    }

    #[test]
    fn z_examples() {
        let a = standard_consensus_array(1, 1.0).unwrap();
        assert!((a.z_symbol(&[PI]) - c(-4.0, 0.0)).norm() < 1e-15);
        assert_eq!(LocalArray::zero(2).z_symbol(&[0.3, 1.0]), c(0.0, 0.0));
        let avg = LocalArray::from_1d(&[(-1, 1.0), (0, -2.0), (1, 1.0)]).unwrap();
        assert!((avg.z_symbol(&[PI / 2.0]) - c(-2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn asymmetric_symbol() {
        // a = {-1: 0.3, 0: -1, 1: 0.7}
        let a = LocalArray::from_1d(&[(-1, 0.3), (0, -1.0), (1, 0.7)]).unwrap();
        let t = 0.9_f64;
        let direct = c(-1.0, 0.0) + 0.7 * Complex64::from_polar(1.0, -t) + 0.3 * Complex64::from_polar(1.0, t);
        assert!((a.z_symbol(&[t]) - direct).norm() < 1e-15);
        assert!(!a.is_symmetric());
        // unpaired negative offset
        let b = LocalArray::from_1d(&[(-2, 1.5)]).unwrap();
        let direct = 1.5 * Complex64::from_polar(1.0, 2.0 * t);
        assert!((b.z_symbol(&[t]) - direct).norm() < 1e-15);
    }

    #[test]
    fn predicates() {
        assert!(standard_consensus_array(3, 0.7).unwrap().is_relative());
        assert!(!LocalArray::scalar(1, -2.0).is_relative());
        assert!(LocalArray::zero(1).is_relative());
        assert!(standard_consensus_array(2, 1.0).unwrap().is_symmetric());
        assert!(LocalArray::scalar(1, 3.0).is_symmetric());
        // 0.1 + 0.2 - 0.3 is not exactly zero in binary
        let a = LocalArray::from_1d(&[(-1, 0.1), (1, 0.2), (0, -0.3)]).unwrap();
        assert!(a.is_relative());
    }

    #[test]
    fn convolve_examples() {
        let a = standard_consensus_array(1, 1.0).unwrap();
        let mut e0 = vec![0.0; 5];
        e0[0] = 1.0;
        assert_eq!(a.circular_convolve(&e0, 5).unwrap(), [-2.0, 1.0, 0.0, 0.0, 1.0]);
        let id = LocalArray::scalar(1, 1.0);
        let x = [0.5, -1.0, 2.0];
        assert_eq!(id.circular_convolve(&x, 3).unwrap(), x);
        let ones = vec![3.0; 49];
        let a2 = standard_consensus_array(2, 0.5).unwrap();
        assert!(a2.circular_convolve(&ones, 7).unwrap().iter().all(|v| v.abs() < 1e-15));
        assert_eq!(
            a.circular_convolve(&[1.0; 4], 5).unwrap_err(),
            Error::SizeMismatch { expected: 5, found: 4 }
        );
    }

    #[test]
    fn standard_array_entries() {
        let a = standard_consensus_array(1, 1.0).unwrap();
        assert_eq!(
            a.entries(),
            &[
                (MultiIndex::new([-1]), 1.0),
                (MultiIndex::new([0]), -2.0),
                (MultiIndex::new([1]), 1.0)
            ]
        );
        let b = standard_consensus_array(2, 0.5).unwrap();
        assert_eq!(b.get(&MultiIndex::zero(2)), -2.0);
        assert_eq!(b.entries().len(), 5);
        assert_eq!(b.support_radius(), 1);
        assert!(standard_consensus_array(1, 0.0).is_err());
    }

    #[test]
    fn duplicates_merge_and_cancel() {
        let a = LocalArray::from_1d(&[(1, 1.0), (1, -1.0), (0, 2.0)]).unwrap();
        assert_eq!(a.entries().len(), 1);
        assert_eq!(a.support_radius(), 0);
    }
}
