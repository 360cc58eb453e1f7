//! Shift-band operators on truncated mode boxes.
//!
//! Operators built from algebra elements acting on ℓ² of a mode box are
//! sums of *shifts with diagonal coefficients*: a term `u^m v^n` moves the
//! mode `(a, b)` to `(a+m, b+n)` and multiplies by a mode-dependent phase.
//! Storing one coefficient diagonal per shift keeps products, adjoints and
//! traces cheap at cutoffs where a dense matrix would not fit: the flat
//! 2-torus box at cutoff 64 has 16 641 modes, so a dense operator is ~4 GB
//! while a 400-band operator is ~100 MB.
//!
//! Conventions:
//! * the box is `[−N, N]` (1d) or `[−N, N]²` (2d) with row-major indexing
//!   `(a + N)·side + (b + N)`, matching the `l2-truncation` representation;
//! * a band entry is indexed by its *source* mode; entries whose target
//!   leaves the box are identically zero (compression of the operator);
//! * products use the exact convolution
//!   `(A·B)_s(i) = Σ_{s_a + s_b = s} A_{s_a}(i + s_b) · B_{s_b}(i)`;
//! * traces accumulate in band order (`BTreeMap` keys), so results are
//!   deterministic; parallelism only distributes independent bands.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{CMat, ZERO};
use crate::nctorus::NcElement;

/// A shift in mode space: `(Δu-exponent, Δv-exponent)`. One-dimensional
/// boxes use the second component and keep the first at zero.
pub(crate) type Shift = (i64, i64);

/// The truncated mode box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct ModeBox {
    /// 1 (circle) or 2 (torus).
    pub dims: u8,
    /// Modes range over `[−cutoff, cutoff]` in each direction.
    pub cutoff: i64,
}

impl ModeBox {
    pub fn new(dims: u8, cutoff: i64) -> Result<Self> {
        if !(dims == 1 || dims == 2) {
            return Err(Error::validation(format!(
                "mode box dimension must be 1 or 2, got {dims}"
            )));
        }
        if cutoff < 1 {
            return Err(Error::validation(format!(
                "mode cutoff must be ≥ 1, got {cutoff}"
            )));
        }
        Ok(Self { dims, cutoff })
    }

    pub fn side(&self) -> i64 {
        2 * self.cutoff + 1
    }

    pub fn base_dim(&self) -> usize {
        let s = self.side() as usize;
        if self.dims == 1 {
            s
        } else {
            s * s
        }
    }

    pub fn contains(&self, m: (i64, i64)) -> bool {
        let ok_b = m.1.abs() <= self.cutoff;
        if self.dims == 1 {
            m.0 == 0 && ok_b
        } else {
            m.0.abs() <= self.cutoff && ok_b
        }
    }

    pub fn index(&self, m: (i64, i64)) -> usize {
        debug_assert!(self.contains(m));
        if self.dims == 1 {
            (m.1 + self.cutoff) as usize
        } else {
            ((m.0 + self.cutoff) * self.side() + (m.1 + self.cutoff)) as usize
        }
    }

    pub fn mode(&self, idx: usize) -> (i64, i64) {
        if self.dims == 1 {
            (0, idx as i64 - self.cutoff)
        } else {
            let side = self.side();
            let a = idx as i64 / side - self.cutoff;
            let b = idx as i64 % side - self.cutoff;
            (a, b)
        }
    }
}

/// A banded operator: one coefficient diagonal per mode shift.
#[derive(Debug, Clone)]
pub(crate) struct BandOp {
    bx: ModeBox,
    bands: BTreeMap<Shift, Vec<Complex64>>,
}

impl BandOp {
    #[cfg_attr(not(test), allow(dead_code))]
    pub fn band_count(&self) -> usize {
        self.bands.len()
    }

    /// Build the compressed action of an algebra element on the box, using
    /// the same phase law as the `l2-truncation` representation:
    /// `u^m v^n : e_{a,b} ↦ exp(iπθ(m(b+n) − an)) e_{a+m, b+n}`, with modes
    /// escaping the box dropped. One-dimensional boxes carry Laurent
    /// polynomials in the second generator only (`u`-degree 0 throughout).
    pub fn from_element(e: &NcElement, bx: ModeBox) -> Result<Self> {
        let theta = e.theta();
        let base = bx.base_dim();
        let mut bands = BTreeMap::new();
        for ((m, n), coef) in e.terms() {
            if bx.dims == 1 && m != 0 {
                return Err(Error::validation(format!(
                    "a circle-box operator needs u-degree 0 terms, found u^{m} v^{n}"
                )));
            }
            let diag = bands.entry((m, n)).or_insert_with(|| vec![ZERO; base]);
            for (src, slot) in diag.iter_mut().enumerate() {
                let (a, b) = bx.mode(src);
                if !bx.contains((a + m, b + n)) {
                    continue;
                }
                let phase = std::f64::consts::PI
                    * theta
                    * (m as f64 * (b + n) as f64 - a as f64 * n as f64);
                *slot += coef * Complex64::from_polar(1.0, phase);
            }
        }
        let mut op = Self { bx, bands };
        op.drop_null_bands(0.0);
        Ok(op)
    }

    /// A diagonal operator as a single shift-(0,0) band.
    pub fn from_diag(bx: ModeBox, diag: Vec<Complex64>) -> Self {
        debug_assert_eq!(diag.len(), bx.base_dim());
        let mut bands = BTreeMap::new();
        bands.insert((0, 0), diag);
        let mut op = Self { bx, bands };
        op.drop_null_bands(0.0);
        op
    }

    /// `Σ_i w(i)·diag(i)` over the shift-(0,0) band: the trace of `W·self`
    /// for a diagonal weight `W`.
    pub fn weighted_trace(&self, w: &[f64]) -> Complex64 {
        self.bands
            .get(&(0, 0))
            .map(|d| d.iter().zip(w.iter()).map(|(z, &x)| z * x).sum())
            .unwrap_or(ZERO)
    }

    /// Largest entry magnitude across all bands.
    pub fn sup_norm(&self) -> f64 {
        self.bands
            .values()
            .flat_map(|d| d.iter().map(|z| z.norm()))
            .fold(0.0, f64::max)
    }

    fn drop_null_bands(&mut self, threshold: f64) {
        self.bands
            .retain(|_, d| d.iter().any(|z| z.norm() > threshold));
    }

    /// Remove bands whose largest entry is ≤ `threshold` (absolute).
    #[cfg_attr(not(test), allow(dead_code))]
    pub fn pruned(mut self, threshold: f64) -> Self {
        self.drop_null_bands(threshold);
        self
    }

    /// Pointwise transform of one band entry: `f(shift, source index, value)`.
    pub fn map_entries(mut self, f: impl Fn(Shift, usize, Complex64) -> Complex64) -> Self {
        for (&s, diag) in self.bands.iter_mut() {
            for (i, z) in diag.iter_mut().enumerate() {
                if *z != ZERO {
                    *z = f(s, i, *z);
                }
            }
        }
        self
    }

    pub fn adjoint(&self) -> Self {
        let base = self.bx.base_dim();
        let mut bands: BTreeMap<Shift, Vec<Complex64>> = BTreeMap::new();
        for (&(sa, sb), diag) in &self.bands {
            let out = bands.entry((-sa, -sb)).or_insert_with(|| vec![ZERO; base]);
            for (src, &z) in diag.iter().enumerate() {
                if z == ZERO {
                    continue;
                }
                let (a, b) = self.bx.mode(src);
                let tgt = self.bx.index((a + sa, b + sb));
                out[tgt] = z.conj();
            }
        }
        Self { bx: self.bx, bands }
    }

    pub fn scale(mut self, c: Complex64) -> Self {
        for diag in self.bands.values_mut() {
            for z in diag.iter_mut() {
                *z *= c;
            }
        }
        self
    }

    pub fn sub(mut self, rhs: &Self) -> Self {
        debug_assert_eq!(self.bx, rhs.bx);
        let base = self.bx.base_dim();
        for (&s, diag) in &rhs.bands {
            let out = self.bands.entry(s).or_insert_with(|| vec![ZERO; base]);
            for (o, &z) in out.iter_mut().zip(diag.iter()) {
                *o -= z;
            }
        }
        self.drop_null_bands(0.0);
        self
    }

    /// Exact band product `self · rhs`, pruning output bands whose largest
    /// entry is ≤ `prune` (pass 0.0 to keep everything).
    pub fn mul(&self, rhs: &Self, prune: f64) -> Self {
        debug_assert_eq!(self.bx, rhs.bx);
        let bx = self.bx;
        let base = bx.base_dim();
        let keys: Vec<Shift> = {
            let mut set = BTreeSet::new();
            for &(aa, ab) in self.bands.keys() {
                for &(ba, bb) in rhs.bands.keys() {
                    set.insert((aa + ba, ab + bb));
                }
            }
            set.into_iter().collect()
        };
        let bands: Vec<(Shift, Vec<Complex64>)> = keys
            .par_iter()
            .map(|&s| {
                let mut diag = vec![ZERO; base];
                for (&(ba, bb), bdiag) in &rhs.bands {
                    let sa = (s.0 - ba, s.1 - bb);
                    let Some(adiag) = self.bands.get(&sa) else {
                        continue;
                    };
                    for (src, &bz) in bdiag.iter().enumerate() {
                        if bz == ZERO {
                            continue;
                        }
                        let (a, b) = bx.mode(src);
                        // bz ≠ 0 guarantees the intermediate mode is inside.
                        let mid = bx.index((a + ba, b + bb));
                        diag[src] += adiag[mid] * bz;
                    }
                }
                (s, diag)
            })
            .collect();
        let mut out = Self {
            bx,
            bands: bands.into_iter().collect(),
        };
        out.drop_null_bands(prune);
        out
    }

    /// Diagonal of `self` as a band operator: the shift-(0,0) band.
    #[cfg_attr(not(test), allow(dead_code))]
    pub fn trace(&self) -> Complex64 {
        self.bands
            .get(&(0, 0))
            .map(|d| d.iter().sum())
            .unwrap_or(ZERO)
    }

    /// Fused `Tr(A·B·C)` without materializing any product.
    pub fn trace_product3(a: &Self, b: &Self, c: &Self) -> Complex64 {
        debug_assert!(a.bx == b.bx && b.bx == c.bx);
        let bx = a.bx;
        let partials: Vec<Complex64> = c
            .bands
            .par_iter()
            .map(|(&(ca, cb), cdiag)| {
                let mut acc = ZERO;
                for (&(ba, bb), bdiag) in &b.bands {
                    let sa = (-ca - ba, -cb - bb);
                    let Some(adiag) = a.bands.get(&sa) else {
                        continue;
                    };
                    for (src, &cz) in cdiag.iter().enumerate() {
                        if cz == ZERO {
                            continue;
                        }
                        let (x, y) = bx.mode(src);
                        let m1 = (x + ca, y + cb);
                        let m2 = (m1.0 + ba, m1.1 + bb);
                        if !bx.contains(m2) {
                            continue;
                        }
                        let bz = bdiag[bx.index(m1)];
                        if bz == ZERO {
                            continue;
                        }
                        acc += adiag[bx.index(m2)] * bz * cz;
                    }
                }
                acc
            })
            .collect();
        partials.into_iter().sum()
    }

    /// `Tr(D^{2n+1})` for `n ≥ 1`: materializes `D^n` (pruned relative to
    /// the entry scale) and closes the trace with one fused triple product.
    pub fn trace_odd_power(&self, n: usize) -> Complex64 {
        debug_assert!(n >= 1);
        if self.bands.is_empty() {
            return ZERO;
        }
        if n == 1 {
            return Self::trace_product3(self, self, self);
        }
        let scale = self.sup_norm();
        let mut pow = self.clone();
        for _ in 1..n {
            let prune = 1e-14 * scale.powi(2).max(scale);
            pow = pow.mul(self, prune);
        }
        Self::trace_product3(&pow, &pow, self)
    }

    /// Dense materialization (small boxes only — tests and oracles).
    pub fn to_dense(&self) -> CMat {
        let base = self.bx.base_dim();
        let mut m = CMat::zeros(base, base);
        for (&(sa, sb), diag) in &self.bands {
            for (src, &z) in diag.iter().enumerate() {
                if z == ZERO {
                    continue;
                }
                let (a, b) = self.bx.mode(src);
                let tgt = self.bx.index((a + sa, b + sb));
                m[(tgt, src)] += z;
            }
        }
        m
    }
}
