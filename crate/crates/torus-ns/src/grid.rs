//! Discretization of the torus `[0, 2π)^n`: collocation points, the truncated
//! wavenumber lattice, and multiindices for mixed partial derivatives.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Largest spatial dimension handled by grid-based code.
pub const MAX_DIM: usize = 3;

/// Uniform grid on `[0, 2π)^n` with `modes` collocation points per axis.
///
/// The retained wavenumbers per axis are `{-M/2+1, ..., M/2}`: symmetric about
/// zero except for the single Nyquist index `M/2`. Storage is row-major with
/// axis 0 slowest; storage index `i` on an axis carries wavenumber `i` for
/// `i <= M/2` and `i - M` above.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TorusGrid {
    dim: usize,
    modes: usize,
}

impl<'de> Deserialize<'de> for TorusGrid {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            dim: usize,
            modes: usize,
        }
        let raw = Raw::deserialize(d)?;
        TorusGrid::new(raw.dim, raw.modes).map_err(serde::de::Error::custom)
    }
}

impl TorusGrid {
    pub fn new(dim: usize, modes: usize) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&dim) {
            return Err(Error::BadDimension(dim));
        }
        if modes < 8 || modes % 2 != 0 {
            return Err(Error::BadModes(modes));
        }
        Ok(Self { dim, modes })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points (and retained modes) per axis.
    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Total number of collocation points, `M^n`.
    pub fn len(&self) -> usize {
        self.modes.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Nyquist index `M/2`, the one wavenumber without a conjugate partner.
    pub fn nyquist(&self) -> i64 {
        (self.modes / 2) as i64
    }

    /// Wavenumber carried by storage index `i` on any axis.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        debug_assert!(i < self.modes);
        if i <= self.modes / 2 {
            i as i64
        } else {
            i as i64 - self.modes as i64
        }
    }

    /// Storage index carrying wavenumber `k` (must lie in the retained set).
    #[inline]
    pub fn index_of_wavenumber(&self, k: i64) -> usize {
        let half = (self.modes / 2) as i64;
        debug_assert!(k > -half && k <= half);
        if k >= 0 {
            k as usize
        } else {
            (k + self.modes as i64) as usize
        }
    }

    /// Collocation coordinate `x = 2π m / M` for index `m` on any axis.
    #[inline]
    pub fn coordinate(&self, m: usize) -> f64 {
        2.0 * std::f64::consts::PI * m as f64 / self.modes as f64
    }

    /// Row-major strides, axis 0 slowest.
    pub fn strides(&self) -> [usize; MAX_DIM] {
        let mut s = [0usize; MAX_DIM];
        let mut acc = 1usize;
        for axis in (0..self.dim).rev() {
            s[axis] = acc;
            acc *= self.modes;
        }
        s
    }

    /// Decompose a flat storage index into per-axis indices.
    #[inline]
    pub fn unravel(&self, mut flat: usize, out: &mut [usize; MAX_DIM]) {
        for axis in (0..self.dim).rev() {
            out[axis] = flat % self.modes;
            flat /= self.modes;
        }
    }

    /// Visit every retained mode as `(flat_index, wavenumber_vector)`.
    ///
    /// The wavenumber slots beyond `dim` are zero, so `|k|^2` sums over
    /// `MAX_DIM` entries are safe.
    pub fn for_each_mode(&self, mut f: impl FnMut(usize, [i64; MAX_DIM])) {
        let m = self.modes;
        match self.dim {
            2 => {
                let mut flat = 0usize;
                for i0 in 0..m {
                    let k0 = self.wavenumber(i0);
                    for i1 in 0..m {
                        f(flat, [k0, self.wavenumber(i1), 0]);
                        flat += 1;
                    }
                }
            }
            3 => {
                let mut flat = 0usize;
                for i0 in 0..m {
                    let k0 = self.wavenumber(i0);
                    for i1 in 0..m {
                        let k1 = self.wavenumber(i1);
                        for i2 in 0..m {
                            f(flat, [k0, k1, self.wavenumber(i2)]);
                            flat += 1;
                        }
                    }
                }
            }
            _ => unreachable!("dim validated at construction"),
        }
    }

    /// `|k|^2` for the mode at a flat storage index.
    pub fn k_squared(&self, flat: usize) -> f64 {
        let mut idx = [0usize; MAX_DIM];
        self.unravel(flat, &mut idx);
        let mut k2 = 0i64;
        for axis in 0..self.dim {
            let k = self.wavenumber(idx[axis]);
            k2 += k * k;
        }
        k2 as f64
    }
}

/// Multiindex `α = (α_1, ..., α_n)` selecting the mixed partial `D^α`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MultiIndex {
    orders: [u32; MAX_DIM],
    dim: usize,
}

impl MultiIndex {
    pub fn new(dim: usize, orders: &[u32]) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) || orders.len() != dim {
            return Err(Error::InvalidParameter(format!(
                "multiindex needs {dim} orders, got {}",
                orders.len()
            )));
        }
        let mut o = [0u32; MAX_DIM];
        o[..dim].copy_from_slice(orders);
        Ok(Self { orders: o, dim })
    }

    pub fn zero(dim: usize) -> Self {
        Self { orders: [0; MAX_DIM], dim }
    }

    /// Unit multiindex `e_axis` (a single first derivative).
    pub fn unit(dim: usize, axis: usize) -> Self {
        assert!(axis < dim);
        let mut o = [0u32; MAX_DIM];
        o[axis] = 1;
        Self { orders: o, dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn order_on_axis(&self, axis: usize) -> u32 {
        self.orders[axis]
    }

    /// Total order `|α| = Σ α_i`.
    pub fn order(&self) -> u32 {
        self.orders[..self.dim].iter().sum()
    }

    /// Component-wise sum, for the mixed-partial composition law.
    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        assert_eq!(self.dim, other.dim);
        let mut o = [0u32; MAX_DIM];
        for axis in 0..self.dim {
            o[axis] = self.orders[axis] + other.orders[axis];
        }
        MultiIndex { orders: o, dim: self.dim }
    }

    /// All multiindices of total order `j` in `dim` variables, in
    /// lexicographic order. There are `C(j + dim - 1, dim - 1)` of them.
    pub fn all_of_order(dim: usize, j: u32) -> Vec<MultiIndex> {
        assert!((1..=MAX_DIM).contains(&dim));
        let mut out = Vec::new();
        match dim {
            1 => out.push(MultiIndex { orders: [j, 0, 0], dim }),
            2 => {
                for a0 in 0..=j {
                    out.push(MultiIndex { orders: [a0, j - a0, 0], dim });
                }
            }
            3 => {
                for a0 in 0..=j {
                    for a1 in 0..=(j - a0) {
                        out.push(MultiIndex { orders: [a0, a1, j - a0 - a1], dim });
                    }
                }
            }
            _ => unreachable!(),
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_2_8_has_64_points_and_expected_lattice() {
        let g = TorusGrid::new(2, 8).unwrap();
        assert_eq!(g.len(), 64);
        let ks: Vec<i64> = (0..8).map(|i| g.wavenumber(i)).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, 4, -3, -2, -1]);
        let mut sorted = ks.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![-3, -2, -1, 0, 1, 2, 3, 4]);
    }

    #[test]
    fn grid_3_16_has_4096_points() {
        let g = TorusGrid::new(3, 16).unwrap();
        assert_eq!(g.len(), 4096);
    }

    #[test]
    fn odd_or_small_modes_rejected() {
        assert!(matches!(TorusGrid::new(3, 7), Err(Error::BadModes(7))));
        assert!(matches!(TorusGrid::new(3, 6), Err(Error::BadModes(6))));
        assert!(matches!(TorusGrid::new(2, 9), Err(Error::BadModes(9))));
        assert!(matches!(TorusGrid::new(1, 8), Err(Error::BadDimension(1))));
        assert!(matches!(TorusGrid::new(4, 8), Err(Error::BadDimension(4))));
    }

    #[test]
    fn point_count_equals_mode_count() {
        for (dim, m) in [(2usize, 8usize), (2, 12), (3, 8), (3, 10)] {
            let g = TorusGrid::new(dim, m).unwrap();
            let mut modes = 0usize;
            g.for_each_mode(|_, _| modes += 1);
            assert_eq!(modes, g.len());
        }
    }

    #[test]
    fn lattice_symmetric_except_nyquist() {
        let g = TorusGrid::new(2, 8).unwrap();
        let ks: Vec<i64> = (0..8).map(|i| g.wavenumber(i)).collect();
        for &k in &ks {
            if k != g.nyquist() {
                assert!(ks.contains(&-k), "missing partner of {k}");
            }
        }
        assert!(!ks.contains(&-g.nyquist()));
    }

    #[test]
    fn wavenumber_index_roundtrip() {
        let g = TorusGrid::new(3, 12).unwrap();
        for i in 0..12 {
            assert_eq!(g.index_of_wavenumber(g.wavenumber(i)), i);
        }
    }

    #[test]
    fn unravel_matches_strides() {
        let g = TorusGrid::new(3, 8).unwrap();
        let s = g.strides();
        let mut idx = [0usize; MAX_DIM];
        for flat in [0usize, 1, 7, 8, 63, 64, 511] {
            g.unravel(flat, &mut idx);
            let rebuilt: usize = (0..3).map(|a| idx[a] * s[a]).sum();
            assert_eq!(rebuilt, flat);
        }
    }

    #[test]
    fn multiindex_order_is_sum() {
        let a = MultiIndex::new(3, &[2, 0, 1]).unwrap();
        assert_eq!(a.order(), 3);
        let b = MultiIndex::new(3, &[0, 1, 0]).unwrap();
        assert_eq!(a.add(&b).order(), 4);
    }

    #[test]
    fn multiindex_enumeration_count() {
        // C(j + n - 1, n - 1) for n = 3: j=0 -> 1, 1 -> 3, 2 -> 6, 3 -> 10, 4 -> 15.
        for (j, expect) in [(0u32, 1usize), (1, 3), (2, 6), (3, 10), (4, 15)] {
            let all = MultiIndex::all_of_order(3, j);
            assert_eq!(all.len(), expect);
            assert!(all.iter().all(|a| a.order() == j));
        }
        assert_eq!(MultiIndex::all_of_order(2, 3).len(), 4);
    }
}
