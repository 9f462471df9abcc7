//! Dense d-dimensional matrices of order n.
//!
//! Storage is a flat row-major array with the last axis varying fastest.
//! Coordinates are 0-based: coordinate `c` corresponds to the 1-based index
//! `c + 1` used in the usual mathematical notation.

use crate::error::{Error, Result};
use crate::exec::CompensatedSum;

/// A d-dimensional matrix of order n with entries in `[0, 1]`.
///
/// Immutable after construction. The `binary` flag is set when every entry is
/// exactly 0 or 1, which switches permanent computations to exact integers.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiMatrix {
    dim: usize,
    order: usize,
    entries: Vec<f64>,
    strides: Vec<usize>,
    binary: bool,
}

/// A cell position, one coordinate per axis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(coords: Vec<usize>) -> Self {
        MultiIndex(coords)
    }

    pub fn coords(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for MultiIndex {
    fn from(v: Vec<usize>) -> Self {
        MultiIndex(v)
    }
}

/// A k-dimensional plane: the cells obtained by fixing `fixed_axes` to
/// `fixed_values` and letting the remaining k axes vary.
///
/// Axes are kept sorted ascending; values follow their axes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PlaneSpec {
    fixed_axes: Vec<usize>,
    fixed_values: Vec<usize>,
}

impl PlaneSpec {
    pub fn new(fixed_axes: Vec<usize>, fixed_values: Vec<usize>) -> Result<Self> {
        if fixed_axes.len() != fixed_values.len() {
            return Err(Error::InvalidPlane(format!(
                "{} fixed axes but {} fixed values",
                fixed_axes.len(),
                fixed_values.len()
            )));
        }
        let mut pairs: Vec<(usize, usize)> = fixed_axes.into_iter().zip(fixed_values).collect();
        pairs.sort_unstable();
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidPlane("repeated fixed axis".into()));
        }
        let (fixed_axes, fixed_values) = pairs.into_iter().unzip();
        Ok(PlaneSpec {
            fixed_axes,
            fixed_values,
        })
    }

    /// Hyperplane `index` of `axis`.
    pub fn hyperplane(axis: usize, index: usize) -> Self {
        PlaneSpec {
            fixed_axes: vec![axis],
            fixed_values: vec![index],
        }
    }

    pub fn fixed_axes(&self) -> &[usize] {
        &self.fixed_axes
    }

    pub fn fixed_values(&self) -> &[usize] {
        &self.fixed_values
    }

    /// Dimension of the plane inside a `dim`-dimensional matrix.
    pub fn plane_dim(&self, dim: usize) -> usize {
        dim.saturating_sub(self.fixed_axes.len())
    }
}

pub(crate) fn checked_volume(dim: usize, order: usize) -> Result<usize> {
    u32::try_from(dim)
        .ok()
        .and_then(|d| order.checked_pow(d))
        .ok_or_else(|| Error::InvalidShape(format!("{order}^{dim} entries overflow")))
}

fn strides_for(dim: usize, order: usize) -> Vec<usize> {
    let mut strides = vec![1usize; dim];
    for axis in (0..dim.saturating_sub(1)).rev() {
        strides[axis] = strides[axis + 1] * order;
    }
    strides
}

impl MultiMatrix {
    /// Builds a matrix from row-major entries, rejecting entries outside `[0, 1]`.
    pub fn from_entries(dim: usize, order: usize, entries: Vec<f64>) -> Result<Self> {
        if let Some((position, &value)) = entries.iter().enumerate().find(|(_, e)| !(0.0..=1.0).contains(*e)) {
            return Err(Error::EntryOutOfRange { position, value });
        }
        Self::build(dim, order, entries)
    }

    /// Builds a nonnegative matrix whose entries may exceed 1.
    ///
    /// Used for derived matrices (such as the Minc-factor reduction) that are
    /// never fed back into the bounds.
    pub fn from_nonnegative_unchecked(dim: usize, order: usize, entries: Vec<f64>) -> Result<Self> {
        if let Some((position, &value)) = entries.iter().enumerate().find(|(_, e)| !(e.is_finite() && **e >= 0.0)) {
            return Err(Error::EntryOutOfRange { position, value });
        }
        Self::build(dim, order, entries)
    }

    fn build(dim: usize, order: usize, mut entries: Vec<f64>) -> Result<Self> {
        if dim == 0 || order == 0 {
            return Err(Error::InvalidShape(format!(
                "dimension and order must be at least 1 (got d={dim}, n={order})"
            )));
        }
        let expected = checked_volume(dim, order)?;
        if entries.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                got: entries.len(),
            });
        }
        for e in entries.iter_mut() {
            // normalize -0.0
            if *e == 0.0 {
                *e = 0.0;
            }
        }
        let binary = entries.iter().all(|&e| e == 0.0 || e == 1.0);
        Ok(MultiMatrix {
            dim,
            order,
            strides: strides_for(dim, order),
            entries,
            binary,
        })
    }

    /// Builds a matrix by evaluating `f` at every cell.
    pub fn from_fn(dim: usize, order: usize, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let len = checked_volume(dim, order)?;
        let mut coords = vec![0usize; dim];
        let mut entries = Vec::with_capacity(len);
        for _ in 0..len {
            entries.push(f(&coords));
            advance(&mut coords, order);
        }
        Self::from_entries(dim, order, entries)
    }

    pub fn zeros(dim: usize, order: usize) -> Result<Self> {
        Self::from_entries(dim, order, vec![0.0; checked_volume(dim, order)?])
    }

    pub fn ones(dim: usize, order: usize) -> Result<Self> {
        Self::from_entries(dim, order, vec![1.0; checked_volume(dim, order)?])
    }

    /// The 2-dimensional identity matrix of order `order`.
    pub fn identity(order: usize) -> Result<Self> {
        Self::from_fn(2, order, |c| if c[0] == c[1] { 1.0 } else { 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    /// True when every entry is exactly 0 or 1.
    pub fn is_binary(&self) -> bool {
        self.binary
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn offset(&self, coords: &[usize]) -> usize {
        coords.iter().zip(&self.strides).map(|(c, s)| c * s).sum()
    }

    pub fn coords_of(&self, mut offset: usize) -> Vec<usize> {
        let mut coords = vec![0; self.dim];
        for axis in (0..self.dim).rev() {
            coords[axis] = offset % self.order;
            offset /= self.order;
        }
        coords
    }

    pub fn get(&self, coords: &[usize]) -> Option<f64> {
        if coords.len() != self.dim || coords.iter().any(|&c| c >= self.order) {
            return None;
        }
        Some(self.entries[self.offset(coords)])
    }

    pub fn total_sum(&self) -> f64 {
        if self.binary {
            self.count_ones() as f64
        } else {
            self.entries.iter().copied().collect::<CompensatedSum>().value()
        }
    }

    pub fn count_ones(&self) -> u64 {
        self.entries.iter().filter(|&&e| e == 1.0).count() as u64
    }

    fn check_axis(&self, axis: usize) -> Result<()> {
        if axis >= self.dim {
            return Err(Error::InvalidArgument(format!(
                "axis {axis} out of range for d={}",
                self.dim
            )));
        }
        Ok(())
    }

    fn check_plane(&self, plane: &PlaneSpec) -> Result<()> {
        for (&axis, &value) in plane.fixed_axes.iter().zip(&plane.fixed_values) {
            if axis >= self.dim {
                return Err(Error::InvalidPlane(format!(
                    "axis {axis} out of range for d={}",
                    self.dim
                )));
            }
            if value >= self.order {
                return Err(Error::InvalidPlane(format!(
                    "value {value} on axis {axis} out of range for n={}",
                    self.order
                )));
            }
        }
        Ok(())
    }

    /// Offsets of every cell in `plane`, in row-major order of the free axes.
    pub fn plane_offsets(&self, plane: &PlaneSpec) -> Result<Vec<usize>> {
        self.check_plane(plane)?;
        let base: usize = plane
            .fixed_axes
            .iter()
            .zip(&plane.fixed_values)
            .map(|(&a, &v)| v * self.strides[a])
            .sum();
        let free: Vec<usize> = (0..self.dim)
            .filter(|a| !plane.fixed_axes.contains(a))
            .map(|a| self.strides[a])
            .collect();
        let count = checked_volume(free.len(), self.order)?;
        let mut coords = vec![0usize; free.len()];
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            out.push(base + coords.iter().zip(&free).map(|(c, s)| c * s).sum::<usize>());
            advance(&mut coords, self.order);
        }
        Ok(out)
    }

    /// Sum of the entries of `plane`. Exact for (0,1) matrices.
    pub fn plane_sum(&self, plane: &PlaneSpec) -> Result<f64> {
        let offsets = self.plane_offsets(plane)?;
        Ok(offsets
            .iter()
            .map(|&o| self.entries[o])
            .collect::<CompensatedSum>()
            .value())
    }

    /// Sums of the `order` hyperplanes orthogonal to `axis`.
    pub fn hyperplane_sums(&self, axis: usize) -> Result<Vec<f64>> {
        self.check_axis(axis)?;
        let mut sums = vec![CompensatedSum::default(); self.order];
        for (offset, &e) in self.entries.iter().enumerate() {
            sums[(offset / self.strides[axis]) % self.order].add(e);
        }
        Ok(sums.into_iter().map(|s| s.value()).collect())
    }

    /// Number of ones in each hyperplane orthogonal to `axis`.
    pub fn hyperplane_counts(&self, axis: usize) -> Result<Vec<u64>> {
        self.check_axis(axis)?;
        let mut counts = vec![0u64; self.order];
        for (offset, &e) in self.entries.iter().enumerate() {
            if e == 1.0 {
                counts[(offset / self.strides[axis]) % self.order] += 1;
            }
        }
        Ok(counts)
    }

    /// The minor `(A|alpha)`: the matrix of order n-1 keeping exactly the cells
    /// that differ from `alpha` in every coordinate.
    pub fn minor(&self, alpha: &MultiIndex) -> Result<MultiMatrix> {
        let a = alpha.coords();
        if a.len() != self.dim || a.iter().any(|&c| c >= self.order) {
            return Err(Error::InvalidIndex(format!(
                "{a:?} is not a cell of a d={} n={} matrix",
                self.dim, self.order
            )));
        }
        if self.order < 2 {
            return Err(Error::InvalidShape("minor of an order-1 matrix is empty".into()));
        }
        let m = self.order - 1;
        let len = checked_volume(self.dim, m)?;
        let mut coords = vec![0usize; self.dim];
        let mut entries = Vec::with_capacity(len);
        for _ in 0..len {
            let offset: usize = coords
                .iter()
                .zip(a)
                .zip(&self.strides)
                .map(|((&c, &skip), s)| (c + usize::from(c >= skip)) * s)
                .sum();
            entries.push(self.entries[offset]);
            advance(&mut coords, m);
        }
        Self::build(self.dim, m, entries)
    }

    /// All planes whose fixed axes are exactly `direction`, in lexicographic
    /// order of their fixed values. `k` is the plane dimension.
    pub fn enumerate_planes(&self, k: usize, direction: &[usize]) -> Result<Vec<PlaneSpec>> {
        let mut axes = direction.to_vec();
        axes.sort_unstable();
        axes.dedup();
        if axes.len() != direction.len() || axes.iter().any(|&a| a >= self.dim) {
            return Err(Error::InvalidPlane(format!(
                "direction {direction:?} is not a set of axes of a d={} matrix",
                self.dim
            )));
        }
        if k > self.dim || axes.len() != self.dim - k {
            return Err(Error::InvalidPlane(format!(
                "a {k}-dimensional plane fixes {} axes, direction has {}",
                self.dim.saturating_sub(k),
                axes.len()
            )));
        }
        let count = checked_volume(axes.len(), self.order)?;
        let mut values = vec![0usize; axes.len()];
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            out.push(PlaneSpec {
                fixed_axes: axes.clone(),
                fixed_values: values.clone(),
            });
            advance(&mut values, self.order);
        }
        Ok(out)
    }

    /// Relabels axes: axis `j` of the result is axis `perm[j]` of `self`.
    pub fn permute_axes(&self, perm: &[usize]) -> Result<MultiMatrix> {
        if !is_permutation(perm, self.dim) {
            return Err(Error::InvalidArgument(format!(
                "{perm:?} is not a permutation of 0..{}",
                self.dim
            )));
        }
        let src_strides: Vec<usize> = perm.iter().map(|&p| self.strides[p]).collect();
        let mut coords = vec![0usize; self.dim];
        let mut entries = Vec::with_capacity(self.entries.len());
        for _ in 0..self.entries.len() {
            let off: usize = coords.iter().zip(&src_strides).map(|(c, s)| c * s).sum();
            entries.push(self.entries[off]);
            advance(&mut coords, self.order);
        }
        Self::build(self.dim, self.order, entries)
    }

    /// Relabels the hyperplanes of `axis`: hyperplane `i` of the result is
    /// hyperplane `sigma[i]` of `self`.
    pub fn permute_hyperplanes(&self, axis: usize, sigma: &[usize]) -> Result<MultiMatrix> {
        self.check_axis(axis)?;
        if !is_permutation(sigma, self.order) {
            return Err(Error::InvalidArgument(format!(
                "{sigma:?} is not a permutation of 0..{}",
                self.order
            )));
        }
        let stride = self.strides[axis];
        let entries = (0..self.entries.len())
            .map(|off| {
                let c = (off / stride) % self.order;
                self.entries[off - c * stride + sigma[c] * stride]
            })
            .collect();
        Self::build(self.dim, self.order, entries)
    }
}

pub(crate) fn is_permutation(perm: &[usize], len: usize) -> bool {
    if perm.len() != len {
        return false;
    }
    let mut seen = vec![false; len];
    perm.iter().all(|&p| p < len && !std::mem::replace(&mut seen[p], true))
}

/// Odometer increment in base `order`, last position fastest.
pub(crate) fn advance(coords: &mut [usize], order: usize) {
    for c in coords.iter_mut().rev() {
        *c += 1;
        if *c < order {
            return;
        }
        *c = 0;
    }
}
