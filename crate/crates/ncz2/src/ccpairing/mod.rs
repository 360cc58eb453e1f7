//! Fredholm modules and their character/index pairings.
//!
//! A Fredholm module packages a symmetry operator `F` with `F = F†` and
//! `F² = 1` together with an action of the algebra whose K-theory is being
//! paired. The *negative projection* `P = (1 − F)/2` plays the role of a
//! Fermi sea: odd pairings count spectral flow of `PuP` across it, even
//! pairings count the index of the graded corner `eFe : eH⁺ → eH⁻`.
//!
//! Three module constructions are provided:
//!
//! * [`FredholmModule::circle_hardy`] — odd, on Fourier modes of the
//!   circle truncated to `[−N, N]`. `F` is a mode-sign operator oriented so
//!   that `P` is the classical Hardy projection onto modes `n ≥ 0`; the
//!   mode-`k` monomial then pairs to `−k`.
//! * [`FredholmModule::torus_phase`] — even, on the degenerate-trace mode
//!   lattice of the rotation algebra with a two-component spinor. `F` is
//!   off-diagonal in the grading with the unimodular mode phase
//!   `φ(m) = (m₁ + i m₂)/|m|`; the zero mode (the kernel of the underlying
//!   Dirac operator) is excised by setting `φ(0,0) = 1`, which keeps
//!   `F² = 1` exact and changes indices by nothing (a finite-rank
//!   perturbation). Algebra elements act through the same phase law as the
//!   `l2-truncation` representation, extended diagonally to the spinor.
//! * [`FredholmModule::from_parts`] — any explicitly given `(F, γ)` pair on
//!   a finite-dimensional space, with matrices acting as themselves. All
//!   structure identities are validated on entry.
//!
//! Elements are supplied as [`Element::Symbolic`] rotation-algebra elements
//! (materialized at the module's cutoff) or as [`Element::Matrix`] dense
//! operators. Dense materialization of a whole module is capped at
//! [`DENSE_DIM_LIMIT`]; the index pairings avoid it entirely by working on
//! shift bands, so large cutoffs stay cheap.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{check_hermitian, frob, CMat, ONE, ZERO};
use crate::nctorus::NcElement;

mod band;
mod functional;
mod index;

pub use functional::{
    connes_chern_functional, pair_even_cocycle, pair_odd_cocycle, CharacterCochain, CyclicCochain,
    TraceCochain,
};
pub use index::{index_pairing_even, index_pairing_odd, IndexPairing, Normalization, OracleCounts};

use band::{BandOp, ModeBox};

/// Structure-identity tolerance for module data: `F = F†`, `F² = 1`,
/// `γF = −Fγ`, `γ² = 1` must hold to this accuracy (relative residuals).
pub const TOL_MODULE_STRUCTURE: f64 = 1e-10;

/// Largest total dimension for which a module is materialized densely
/// (character functionals, cocycle pairings, explicit `F` matrices). Index
/// pairings use banded arithmetic instead and are not subject to this cap.
pub const DENSE_DIM_LIMIT: usize = 4500;

/// Defect bound above which a supplied element is rejected instead of being
/// corrected toward the nearest idempotent/unitary.
pub const ELEMENT_DEFECT_TOL: f64 = 1e-6;

/// Grading of the module.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    /// Graded: carries γ with γF = −Fγ; pairs with idempotents.
    Even,
    /// Ungraded; pairs with invertibles through `P = (1 − F)/2`.
    Odd,
}

/// An algebra element to pair with: symbolic (materialized at the module's
/// cutoff through the truncated mode representation) or an explicit matrix
/// on the module's space.
#[derive(Debug, Clone)]
pub enum Element {
    /// A rotation-algebra element; its θ must match the module (tori) or be
    /// a plain Laurent polynomial in the second generator (circle).
    Symbolic(NcElement),
    /// A dense operator on the module's full space (including the spinor
    /// components for even modules).
    Matrix(CMat),
}

impl Element {
    /// Convenience constructor for the circle monomial `z^k`.
    pub fn circle_mode(k: i64) -> Self {
        Element::Symbolic(NcElement::monomial(0.0, 0, k, ONE))
    }
}

#[derive(Debug, Clone)]
enum ModuleKind {
    /// Odd module on circle modes: `F = diag(sign)`, `sign = −1` for
    /// `n ≥ 0` and `+1` for `n < 0`.
    CircleHardy { bx: ModeBox },
    /// Even module on the 2-torus mode lattice with spinor doubling:
    /// per-mode `F`-block `[[0, conj(φ)], [φ, 0]]`, `γ = diag(1, −1)`.
    TorusPhase { theta: f64, bx: ModeBox },
    /// Explicit matrices; elements act as themselves.
    Dense { f: CMat, gamma: Option<CMat> },
}

/// A finitely-summable Fredholm module `(H, F, [γ])`.
#[derive(Debug, Clone)]
pub struct FredholmModule {
    kind: ModuleKind,
    parity: Parity,
    summability: f64,
}

/// Hardy-orientation sign of the circle `F` at mode `n`.
fn circle_sign(n: i64) -> f64 {
    if n >= 0 {
        -1.0
    } else {
        1.0
    }
}

/// Unimodular mode phase of the torus module, kernel mode excised.
fn torus_phase_at(m: (i64, i64)) -> Complex64 {
    if m == (0, 0) {
        ONE
    } else {
        let z = Complex64::new(m.0 as f64, m.1 as f64);
        z / z.norm()
    }
}

impl FredholmModule {
    /// Odd module over circle Laurent polynomials, truncated at `|n| ≤ cutoff`.
    ///
    /// The negative projection `P = (1 − F)/2` is the Hardy projection onto
    /// nonnegative modes. Summability is 1 (commutators with smooth symbols
    /// are trace class; with monomials they are even finite rank, exactly
    /// supported where the symbol crosses the Fermi mode).
    pub fn circle_hardy(cutoff: i64) -> Result<Self> {
        let bx = ModeBox::new(1, cutoff)?;
        Ok(Self {
            kind: ModuleKind::CircleHardy { bx },
            parity: Parity::Odd,
            summability: 1.0,
        })
    }

    /// Even module over the rotation algebra at angle `theta`, truncated at
    /// mode cutoff `cutoff`, with the position-phase symmetry
    /// `F = [[0, conj(φ)], [φ, 0]]`, `φ(m) = (m₁ + i m₂)/|m|`.
    ///
    /// This is the phase of the flat Dirac operator on the
    /// degenerate-trace mode lattice; summability is 2. The orientation of
    /// φ is fixed so that projections of positive curvature (lowest
    /// Hofstadter band, Powers–Rieffel) pair to `+1`.
    pub fn torus_phase(theta: f64, cutoff: i64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::validation(format!(
                "torus_phase: θ must be finite, got {theta}"
            )));
        }
        let bx = ModeBox::new(2, cutoff)?;
        Ok(Self {
            kind: ModuleKind::TorusPhase { theta, bx },
            parity: Parity::Even,
            summability: 2.0,
        })
    }

    /// Assemble a module from explicit matrices, validating all structure
    /// identities: `F = F†`, `F² = 1`, and for even parity a Hermitian
    /// involution γ with `γF = −Fγ`. Odd modules must not carry γ.
    pub fn from_parts(
        f: CMat,
        gamma: Option<CMat>,
        parity: Parity,
        summability: f64,
    ) -> Result<Self> {
        let dim = f.nrows();
        check_hermitian(&f, "FredholmModule F")?;
        let scale = (dim as f64).sqrt().max(1.0);
        let sq_res = frob(&(&f * &f - CMat::identity(dim, dim))) / scale;
        if sq_res > TOL_MODULE_STRUCTURE {
            return Err(Error::Structure {
                identity: "FredholmModule: F² = 1".into(),
                residual: sq_res,
                tolerance: TOL_MODULE_STRUCTURE,
            });
        }
        match (parity, &gamma) {
            (Parity::Even, Some(g)) => {
                check_hermitian(g, "FredholmModule γ")?;
                if g.nrows() != dim {
                    return Err(Error::validation(format!(
                        "FredholmModule: γ is {}x{} but F is {dim}x{dim}",
                        g.nrows(),
                        g.ncols()
                    )));
                }
                let g_sq = frob(&(g * g - CMat::identity(dim, dim))) / scale;
                if g_sq > TOL_MODULE_STRUCTURE {
                    return Err(Error::Structure {
                        identity: "FredholmModule: γ² = 1".into(),
                        residual: g_sq,
                        tolerance: TOL_MODULE_STRUCTURE,
                    });
                }
                let anti = frob(&(g * &f + &f * g)) / scale;
                if anti > TOL_MODULE_STRUCTURE {
                    return Err(Error::Structure {
                        identity: "FredholmModule: γF = −Fγ".into(),
                        residual: anti,
                        tolerance: TOL_MODULE_STRUCTURE,
                    });
                }
            }
            (Parity::Even, None) => {
                return Err(Error::validation(
                    "FredholmModule: even parity requires a grading γ",
                ))
            }
            (Parity::Odd, Some(_)) => {
                return Err(Error::validation(
                    "FredholmModule: odd parity must not carry a grading γ",
                ))
            }
            (Parity::Odd, None) => {}
        }
        if !(summability.is_finite() && summability > 0.0) {
            return Err(Error::validation(format!(
                "FredholmModule: summability must be positive, got {summability}"
            )));
        }
        Ok(Self {
            kind: ModuleKind::Dense { f, gamma },
            parity,
            summability,
        })
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn summability(&self) -> f64 {
        self.summability
    }

    /// Mode cutoff for the built-in lattice modules; `None` for explicit
    /// matrix modules.
    pub fn cutoff(&self) -> Option<i64> {
        match &self.kind {
            ModuleKind::CircleHardy { bx } | ModuleKind::TorusPhase { bx, .. } => Some(bx.cutoff),
            ModuleKind::Dense { .. } => None,
        }
    }

    /// Rotation angle of the torus module, if any.
    pub fn theta(&self) -> Option<f64> {
        match &self.kind {
            ModuleKind::TorusPhase { theta, .. } => Some(*theta),
            _ => None,
        }
    }

    /// Dimension of the module's full Hilbert space (spinor included).
    pub fn dim(&self) -> usize {
        match &self.kind {
            ModuleKind::CircleHardy { bx } => bx.base_dim(),
            ModuleKind::TorusPhase { bx, .. } => 2 * bx.base_dim(),
            ModuleKind::Dense { f, .. } => f.nrows(),
        }
    }

    fn ensure_dense_ok(&self, what: &str) -> Result<()> {
        if self.dim() > DENSE_DIM_LIMIT {
            return Err(Error::validation(format!(
                "{what}: module dimension {} exceeds the dense limit {DENSE_DIM_LIMIT}; \
                 use the banded index pairings or a smaller cutoff",
                self.dim()
            )));
        }
        Ok(())
    }

    /// Dense `F` (capped at [`DENSE_DIM_LIMIT`]).
    pub fn f_matrix(&self) -> Result<CMat> {
        self.ensure_dense_ok("f_matrix")?;
        Ok(match &self.kind {
            ModuleKind::CircleHardy { bx } => {
                CMat::from_fn(bx.base_dim(), bx.base_dim(), |i, j| {
                    if i == j {
                        Complex64::new(circle_sign(bx.mode(i).1), 0.0)
                    } else {
                        ZERO
                    }
                })
            }
            ModuleKind::TorusPhase { bx, .. } => {
                let base = bx.base_dim();
                let mut f = CMat::zeros(2 * base, 2 * base);
                for i in 0..base {
                    let phi = torus_phase_at(bx.mode(i));
                    f[(2 * i, 2 * i + 1)] = phi.conj();
                    f[(2 * i + 1, 2 * i)] = phi;
                }
                f
            }
            ModuleKind::Dense { f, .. } => f.clone(),
        })
    }

    /// Dense γ for even modules (capped at [`DENSE_DIM_LIMIT`]).
    pub fn gamma_matrix(&self) -> Result<CMat> {
        self.ensure_dense_ok("gamma_matrix")?;
        match &self.kind {
            ModuleKind::TorusPhase { bx, .. } => {
                let base = bx.base_dim();
                Ok(CMat::from_fn(2 * base, 2 * base, |i, j| {
                    if i != j {
                        ZERO
                    } else if i.is_multiple_of(2) {
                        ONE
                    } else {
                        -ONE
                    }
                }))
            }
            ModuleKind::Dense { gamma: Some(g), .. } => Ok(g.clone()),
            _ => Err(Error::validation(
                "gamma_matrix: module carries no grading (odd parity)",
            )),
        }
    }

    /// Dense action of an element on the module's full space (capped at
    /// [`DENSE_DIM_LIMIT`]). For even modules γ must commute with every
    /// element action; matrix-supplied elements are checked for this.
    pub fn act(&self, e: &Element) -> Result<CMat> {
        self.ensure_dense_ok("act")?;
        match (&self.kind, e) {
            (ModuleKind::CircleHardy { bx }, Element::Symbolic(a)) => {
                self.check_symbol(a)?;
                Ok(BandOp::from_element(a, *bx)?.to_dense())
            }
            (ModuleKind::TorusPhase { bx, .. }, Element::Symbolic(a)) => {
                self.check_symbol(a)?;
                let base_op = BandOp::from_element(a, *bx)?.to_dense();
                let base = bx.base_dim();
                let mut full = CMat::zeros(2 * base, 2 * base);
                for i in 0..base {
                    for j in 0..base {
                        let z = base_op[(i, j)];
                        if z != ZERO {
                            full[(2 * i, 2 * j)] = z;
                            full[(2 * i + 1, 2 * j + 1)] = z;
                        }
                    }
                }
                Ok(full)
            }
            (ModuleKind::Dense { .. }, Element::Symbolic(_)) => Err(Error::validation(
                "act: explicit-matrix modules take matrix elements \
                 (materialize symbolic elements through a representation first)",
            )),
            (_, Element::Matrix(m)) => {
                if m.nrows() != self.dim() || m.ncols() != self.dim() {
                    return Err(Error::validation(format!(
                        "act: element is {}x{} but the module space has dimension {}",
                        m.nrows(),
                        m.ncols(),
                        self.dim()
                    )));
                }
                if self.parity == Parity::Even {
                    let g = self.gamma_matrix()?;
                    let comm = frob(&(&g * m - m * &g));
                    let tol = TOL_MODULE_STRUCTURE * frob(m).max(1.0) * 10.0;
                    if comm > tol {
                        return Err(Error::Structure {
                            identity: "act: [γ, a] = 0".into(),
                            residual: comm,
                            tolerance: tol,
                        });
                    }
                }
                Ok(m.clone())
            }
        }
    }

    /// Validate that a symbolic element is compatible with this module's
    /// algebra: matching θ on tori, plain Laurent data on the circle.
    pub(crate) fn check_symbol(&self, a: &NcElement) -> Result<()> {
        match &self.kind {
            ModuleKind::CircleHardy { .. } => {
                if a.terms().any(|((m, _), _)| m != 0) {
                    return Err(Error::validation(
                        "circle module elements must be Laurent polynomials in the \
                         second generator (u-degree 0)",
                    ));
                }
                Ok(())
            }
            ModuleKind::TorusPhase { theta, .. } => {
                if a.is_zero() || (a.theta() - theta).abs() <= 1e-12 {
                    Ok(())
                } else {
                    Err(Error::validation(format!(
                        "element angle θ = {} does not match the module's θ = {theta}",
                        a.theta()
                    )))
                }
            }
            ModuleKind::Dense { .. } => Err(Error::validation(
                "explicit-matrix modules take matrix elements",
            )),
        }
    }

    pub(crate) fn circle_box(&self) -> Option<ModeBox> {
        match &self.kind {
            ModuleKind::CircleHardy { bx } => Some(*bx),
            _ => None,
        }
    }

    pub(crate) fn torus_box(&self) -> Option<(f64, ModeBox)> {
        match &self.kind {
            ModuleKind::TorusPhase { theta, bx } => Some((*theta, *bx)),
            _ => None,
        }
    }
}

/// Hardy sign vector over a circle box, in index order.
pub(crate) fn circle_sign_vec(bx: ModeBox) -> Vec<f64> {
    (0..bx.base_dim())
        .map(|i| circle_sign(bx.mode(i).1))
        .collect()
}

/// Torus phase vector over a box, in index order.
pub(crate) fn torus_phase_vec(bx: ModeBox) -> Vec<Complex64> {
    (0..bx.base_dim())
        .map(|i| torus_phase_at(bx.mode(i)))
        .collect()
}
