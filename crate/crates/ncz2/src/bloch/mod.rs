//! Momentum-space band models over the Brillouin torus and their
//! topological invariants.
//!
//! A [`BlochModel`] is a map `k ↦ H(k)` of Hermitian matrices on
//! `[−π, π)^d`, optionally carrying an anti-unitary time-reversal operator
//! `Θ = U_Θ ∘ conj` with `Θ² = −1` under which
//! `Θ H(k) Θ* = H(−k)`. On top of the model type the module provides:
//!
//! * a registry of canonical models ([`models`]): the honeycomb spin–orbit
//!   (Kane–Mele) lattice, the quantum-spin-Hall quantum-well model, the
//!   square-lattice magnetic-flux model, and atomic limits;
//! * the sewing matrix `w_{mn}(k) = ⟨u_m(−k), Θ u_n(k)⟩` over occupied
//!   eigenframes and the geometric ℤ₂ invariant
//!   `ν = Π_Λ pf[w(Λ)] / √det[w(Λ)]` over the time-reversal invariant
//!   momenta ([`kane_mele_invariant`]);
//! * the first Chern number of a band window by the plaquette
//!   field-strength method ([`chern_number`]);
//! * the 3d winding index `(1/24π²)∫ tr(g⁻¹dg)³` of unitary-valued maps
//!   ([`odd_winding_index`]).

mod chern;
pub mod gauge;
mod kane_mele;
pub mod models;
mod winding;

pub use chern::{chern_number, ChernResult};
pub use kane_mele::{kane_mele_invariant, sewing_matrix, KaneMeleResult, KmOptions};
pub use winding::{hedgehog_map, odd_winding_index, UnitaryGrid3, WindingResult};

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kqcycle::TimeReversalOp;
use crate::linalg::{check_hermitian, eig_hermitian, frob, CMat, EigH};

/// Default grid resolution per axis for 2d invariants.
pub const DEFAULT_GRID_2D: usize = 48;
/// Default grid resolution per axis for 3d invariants.
pub const DEFAULT_GRID_3D: usize = 24;
/// Relative tolerance for the time-reversal covariance of a model.
pub const TOL_TRS: f64 = 1e-10;

/// A Bloch Hamiltonian family over the d-torus.
/// Shared Hamiltonian map `k ↦ H(k)`.
type HamiltonianFn = Arc<dyn Fn(&[f64]) -> CMat + Send + Sync>;

#[derive(Clone)]
pub struct BlochModel {
    name: String,
    dim: usize,
    bands: usize,
    n_occ: usize,
    theta: Option<TimeReversalOp>,
    h: HamiltonianFn,
}

impl std::fmt::Debug for BlochModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BlochModel")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("bands", &self.bands)
            .field("n_occ", &self.n_occ)
            .field("time_reversal", &self.theta.is_some())
            .finish()
    }
}

impl BlochModel {
    /// Wrap a Hamiltonian map. `bands` is the matrix dimension, `n_occ` the
    /// number of occupied bands counted from the bottom of the spectrum.
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        bands: usize,
        n_occ: usize,
        theta: Option<TimeReversalOp>,
        h: impl Fn(&[f64]) -> CMat + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::validation(format!(
                "BlochModel: dimension must be 2 or 3, got {dim}"
            )));
        }
        if n_occ == 0 || n_occ >= bands {
            return Err(Error::validation(format!(
                "BlochModel: occupied count {n_occ} must lie strictly between 0 and {bands}"
            )));
        }
        if let Some(ref t) = theta {
            if t.dim() != bands {
                return Err(Error::validation(format!(
                    "BlochModel: time-reversal dimension {} does not match band count {bands}",
                    t.dim()
                )));
            }
        }
        Ok(Self {
            name: name.into(),
            dim,
            bands,
            n_occ,
            theta,
            h: Arc::new(h),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn n_occ(&self) -> usize {
        self.n_occ
    }

    pub fn theta(&self) -> Option<&TimeReversalOp> {
        self.theta.as_ref()
    }

    /// Evaluate `H(k)`.
    pub fn hamiltonian(&self, k: &[f64]) -> CMat {
        assert_eq!(
            k.len(),
            self.dim,
            "momentum dimension mismatch: expected {}, got {}",
            self.dim,
            k.len()
        );
        (self.h)(k)
    }

    /// Validated eigendecomposition at `k`.
    pub fn eig_at(&self, k: &[f64]) -> Result<EigH> {
        let h = self.hamiltonian(k);
        check_hermitian(&h, &format!("{} at k = {:?}", self.name, k))?;
        eig_hermitian(&h)
    }

    /// Spectral gap between bands `n_occ` and `n_occ + 1` at `k`.
    pub fn gap_at(&self, k: &[f64]) -> Result<f64> {
        let eig = self.eig_at(k)?;
        Ok(eig.values[self.n_occ] - eig.values[self.n_occ - 1])
    }

    /// Residual of the time-reversal covariance `ΘH(k)Θ* − H(−k)` at `k`
    /// (Frobenius norm). Errors if the model carries no time-reversal
    /// operator.
    pub fn trs_residual(&self, k: &[f64]) -> Result<f64> {
        let theta = self.theta.as_ref().ok_or_else(|| {
            Error::validation(format!(
                "model '{}' carries no time-reversal operator",
                self.name
            ))
        })?;
        let minus_k: Vec<f64> = k.iter().map(|x| -x).collect();
        Ok(frob(
            &(theta.twist(&self.hamiltonian(k)) - self.hamiltonian(&minus_k)),
        ))
    }

    /// Minimum spectral gap over a uniform grid, with its location.
    pub fn minimum_gap(&self, grid: usize) -> Result<(f64, Vec<f64>)> {
        if grid < 2 {
            return Err(Error::validation("minimum_gap: grid must be at least 2"));
        }
        let mut best = (f64::INFINITY, vec![0.0; self.dim]);
        let mut idx = vec![0usize; self.dim];
        loop {
            let k: Vec<f64> = idx
                .iter()
                .map(|&i| -std::f64::consts::PI + std::f64::consts::TAU * i as f64 / grid as f64)
                .collect();
            let gap = self.gap_at(&k)?;
            if gap < best.0 {
                best = (gap, k);
            }
            // Odometer increment over the d-dimensional grid.
            let mut axis = 0;
            loop {
                if axis == self.dim {
                    return Ok(best);
                }
                idx[axis] += 1;
                if idx[axis] < grid {
                    break;
                }
                idx[axis] = 0;
                axis += 1;
            }
        }
    }
}

/// The 2^d time-reversal invariant momenta `{0, π}^d` in lexicographic
/// order.
#[derive(Debug, Clone, PartialEq)]
pub struct TrimSet {
    points: Vec<Vec<f64>>,
}

impl TrimSet {
    pub fn new(dim: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::validation(format!(
                "TrimSet: dimension must be 1, 2, or 3, got {dim}"
            )));
        }
        let mut points = Vec::with_capacity(1 << dim);
        for mask in 0..(1u32 << dim) {
            // Lexicographic over {0, π}^d: the first axis varies slowest.
            let point: Vec<f64> = (0..dim)
                .map(|axis| {
                    if mask >> (dim - 1 - axis) & 1 == 1 {
                        std::f64::consts::PI
                    } else {
                        0.0
                    }
                })
                .collect();
            points.push(point);
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}
