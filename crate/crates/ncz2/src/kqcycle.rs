//! Quaternionic (time-reversal symmetric) cycles over truncated Hilbert
//! spaces: assembly of the doubled operator with its real structure and
//! grading, the analytic mod-2 index, and mod-2 spectral flow.
//!
//! A time-reversal operator is an anti-unitary `Θ = U_Θ ∘ conj` squaring to
//! −1. From a chiral block `H` two doubled operators are assembled:
//!
//! * **standard**: `D = [[0, ΘHΘ*], [H, 0]]`, odd for the grading
//!   `γ = diag(1, −1)`, with the real structure `J(φ₁, φ₂) = (−Θφ₂, Θφ₁)`
//!   anti-commuting with `D` and `γ`. `D` is skew-adjoint exactly when
//!   `H* = −ΘHΘ*`.
//! * **twisted**: `Ĥ = diag(H, ΘHΘ*)` with the same `J`, which now commutes
//!   with `Ĥ` for every `H`.
//!
//! The mod-2 invariants count zero modes: the analytic index is the parity
//! of the kernel dimension (of the chiral block by default — the doubled
//! kernel is always even), and the mod-2 spectral flow is the parity of
//! eigenvalue sign changes along a path of Hermitian operators, tracked by
//! eigenvector overlap with adaptive bisection.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    check_hermitian, eig_hermitian, frob, singular_values, CMat, CVec, TOL_STRUCTURE,
};
use crate::wire::{matrix_from_wire, matrix_to_wire, WireMatrix};

/// Validation tolerance (relative) for the assembled cycle identities.
pub const TOL_CYCLE_IDENTITY: f64 = 1e-12;

/// An anti-unitary time-reversal operator `Θ = U_Θ ∘ conj` with `Θ² = −1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeReversalOp {
    u: CMat,
}

impl TimeReversalOp {
    /// Wrap a unitary part, validating `U_Θ·conj(U_Θ) = −1` (so `Θ² = −1`)
    /// and unitarity, both to `1e−12` relative.
    pub fn new(u: CMat) -> Result<Self> {
        let n = u.nrows();
        if n != u.ncols() {
            return Err(Error::validation(format!(
                "TimeReversalOp: unitary part must be square, got {}x{}",
                n,
                u.ncols()
            )));
        }
        let scale = frob(&u).max(1.0);
        let unit = frob(&(u.adjoint() * &u - CMat::identity(n, n)));
        if unit > TOL_STRUCTURE * scale {
            return Err(Error::Structure {
                identity: "TimeReversalOp: U† U = 1".into(),
                residual: unit,
                tolerance: TOL_STRUCTURE * scale,
            });
        }
        let square = frob(&(&u * u.map(|z| z.conj()) + CMat::identity(n, n)));
        if square > TOL_STRUCTURE * scale {
            return Err(Error::Structure {
                identity: "TimeReversalOp: U·conj(U) = −1 (Θ² = −1)".into(),
                residual: square,
                tolerance: TOL_STRUCTURE * scale,
            });
        }
        Ok(Self { u })
    }

    /// `Θ = (iσ₂ ⊗ 1_n) ∘ conj` acting on spin-½ ⊗ n-orbital space, the
    /// standard fermionic time reversal (dimension `2n`).
    pub fn spin_half(n_orbitals: usize) -> Self {
        let mut u = CMat::zeros(2 * n_orbitals, 2 * n_orbitals);
        for j in 0..n_orbitals {
            u[(j, n_orbitals + j)] = Complex64::new(1.0, 0.0);
            u[(n_orbitals + j, j)] = Complex64::new(-1.0, 0.0);
        }
        Self { u }
    }

    /// The four-band convention `U_Θ = σ₁ ⊗ iσ₂`.
    pub fn four_band() -> Self {
        let sigma1 = CMat::from_row_slice(
            2,
            2,
            &[
                Complex64::ZERO,
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::ZERO,
            ],
        );
        let isigma2 = CMat::from_row_slice(
            2,
            2,
            &[
                Complex64::ZERO,
                Complex64::new(1.0, 0.0),
                Complex64::new(-1.0, 0.0),
                Complex64::ZERO,
            ],
        );
        Self {
            u: sigma1.kronecker(&isigma2),
        }
    }

    /// The unitary part `U_Θ`.
    pub fn unitary(&self) -> &CMat {
        &self.u
    }

    pub fn dim(&self) -> usize {
        self.u.nrows()
    }

    /// Apply Θ to a vector: `Θφ = U_Θ conj(φ)`.
    pub fn apply(&self, phi: &CVec) -> CVec {
        &self.u * phi.map(|z| z.conj())
    }

    /// Conjugate an operator: `ΘAΘ* = U_Θ conj(A) U_Θ†`.
    pub fn twist(&self, a: &CMat) -> CMat {
        &self.u * a.map(|z| z.conj()) * self.u.adjoint()
    }

    /// Residual of the time-reversal symmetry condition `ΘAΘ* = A`.
    pub fn symmetry_residual(&self, a: &CMat) -> f64 {
        frob(&(self.twist(a) - a))
    }
}

/// Which doubled operator a cycle carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KqVariant {
    /// Block-off-diagonal `D = [[0, ΘHΘ*], [H, 0]]` with `JD = −DJ`.
    Standard,
    /// Block-diagonal `Ĥ = diag(H, ΘHΘ*)` with `JĤ = ĤJ`.
    Twisted,
}

/// A validated quaternionic cycle: the doubled operator, the real structure
/// `J = U_J ∘ conj`, and the grading γ.
#[derive(Debug, Clone)]
pub struct KQCycle {
    variant: KqVariant,
    h: CMat,
    d: CMat,
    u_j: CMat,
    gamma: CMat,
    skew_adjoint: bool,
}

impl KQCycle {
    pub fn variant(&self) -> KqVariant {
        self.variant
    }

    /// The chiral block the cycle was assembled from.
    pub fn chiral_block(&self) -> &CMat {
        &self.h
    }

    /// The assembled doubled operator (`D` or `Ĥ` depending on variant).
    pub fn operator(&self) -> &CMat {
        &self.d
    }

    /// Unitary part of the real structure `J`.
    pub fn j_unitary(&self) -> &CMat {
        &self.u_j
    }

    pub fn gamma(&self) -> &CMat {
        &self.gamma
    }

    /// Whether the doubled operator is skew-adjoint, i.e. whether the
    /// chiral block satisfies `H* = −ΘHΘ*`.
    pub fn is_skew_adjoint(&self) -> bool {
        self.skew_adjoint
    }

    /// Apply `J = U_J ∘ conj` to a vector.
    pub fn apply_j(&self, phi: &CVec) -> CVec {
        &self.u_j * phi.map(|z| z.conj())
    }
}

/// Assemble and validate a cycle from a chiral block and a time-reversal
/// operator.
///
/// All variant identities (`J² = 1`, `Jγ = −γJ`, `γ² = 1`, and `JD = −DJ`
/// for standard / `JĤ = ĤJ` for twisted) are checked to `1e−12` relative;
/// a violation is reported as a structure error naming the identity.
/// Whether the doubled operator is skew-adjoint (`H* = −ΘHΘ*`) is recorded
/// on the result.
pub fn assemble_kq_cycle(h: &CMat, theta: &TimeReversalOp, variant: KqVariant) -> Result<KQCycle> {
    let n = h.nrows();
    if n != h.ncols() {
        return Err(Error::validation(format!(
            "assemble_kq_cycle: chiral block must be square, got {}x{}",
            n,
            h.ncols()
        )));
    }
    if theta.dim() != n {
        return Err(Error::validation(format!(
            "assemble_kq_cycle: time-reversal dimension {} does not match block size {}",
            theta.dim(),
            n
        )));
    }
    let twisted_h = theta.twist(h);
    let zero = CMat::zeros(n, n);
    let d = match variant {
        KqVariant::Standard => block_2x2(&zero, &twisted_h, h, &zero),
        KqVariant::Twisted => block_2x2(h, &zero, &zero, &twisted_h),
    };
    // J(φ₁, φ₂) = (−Θφ₂, Θφ₁): unitary part [[0, −U_Θ], [U_Θ, 0]].
    let u = theta.unitary();
    let u_j = block_2x2(&zero, &(-u), u, &zero);
    let mut gamma = CMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        gamma[(i, i)] = Complex64::new(1.0, 0.0);
        gamma[(n + i, n + i)] = Complex64::new(-1.0, 0.0);
    }

    let scale = frob(&d).max(1.0);
    let tol_abs = TOL_CYCLE_IDENTITY * frob(&u_j).max(1.0);
    let id2 = CMat::identity(2 * n, 2 * n);
    let checks: Vec<(&str, f64, f64)> = {
        let conj_uj = u_j.map(|z| z.conj());
        let j_sq = frob(&(&u_j * &conj_uj - &id2));
        let j_gamma = frob(&(&u_j * gamma.map(|z| z.conj()) + &gamma * &u_j));
        let gamma_sq = frob(&(&gamma * &gamma - &id2));
        let d_identity = match variant {
            // JD = −DJ as anti-linear maps: U_J conj(D) + D U_J = 0.
            KqVariant::Standard => frob(&(&u_j * d.map(|z| z.conj()) + &d * &u_j)),
            // JĤ = ĤJ: U_J conj(Ĥ) − Ĥ U_J = 0.
            KqVariant::Twisted => frob(&(&u_j * d.map(|z| z.conj()) - &d * &u_j)),
        };
        vec![
            ("J² = 1", j_sq, tol_abs),
            ("Jγ = −γJ", j_gamma, tol_abs),
            ("γ² = 1", gamma_sq, tol_abs),
            (
                match variant {
                    KqVariant::Standard => "JD = −DJ",
                    KqVariant::Twisted => "JĤ = ĤJ",
                },
                d_identity,
                TOL_CYCLE_IDENTITY * scale,
            ),
        ]
    };
    for (identity, residual, tolerance) in checks {
        if residual > tolerance {
            return Err(Error::Structure {
                identity: format!("assemble_kq_cycle: {identity}"),
                residual,
                tolerance,
            });
        }
    }

    let skew_adjoint = frob(&(h.adjoint() + &twisted_h)) <= TOL_CYCLE_IDENTITY * frob(h).max(1.0);
    Ok(KQCycle {
        variant,
        h: h.clone(),
        d,
        u_j,
        gamma,
        skew_adjoint,
    })
}

fn block_2x2(a: &CMat, b: &CMat, c: &CMat, d: &CMat) -> CMat {
    let n = a.nrows();
    let mut out = CMat::zeros(2 * n, 2 * n);
    out.view_mut((0, 0), (n, n)).copy_from(a);
    out.view_mut((0, n), (n, n)).copy_from(b);
    out.view_mut((n, 0), (n, n)).copy_from(c);
    out.view_mut((n, n), (n, n)).copy_from(d);
    out
}

/// Which kernel the analytic mod-2 index counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum KernelCounting {
    /// Zero modes of the chiral block `H` (default). For the
    /// block-off-diagonal doubled operator the kernel always doubles, so
    /// the chiral count carries the invariant.
    #[default]
    Chiral,
    /// Zero modes of the assembled doubled operator.
    Total,
}

/// Result of [`analytic_index_mod2`]: the parity together with kernel
/// diagnostics.
#[derive(Debug, Clone)]
pub struct Mod2Index {
    /// Kernel dimension mod 2.
    pub parity: u8,
    /// The counted kernel dimension.
    pub kernel_dim: usize,
    /// The kernel tolerance used on singular values.
    pub tol_used: f64,
    /// Singular values above the tolerance but within 10× of it: the count
    /// is ambiguous at this resolution if any are present.
    pub ambiguous: Vec<f64>,
}

/// The analytic mod-2 index of a cycle: the parity of its zero-mode count.
///
/// `tol_kernel = None` uses `1e−8·σ_max`. Singular values landing in
/// `(tol, 10·tol]` are reported in [`Mod2Index::ambiguous`] rather than
/// silently resolved.
pub fn analytic_index_mod2(
    cycle: &KQCycle,
    counting: KernelCounting,
    tol_kernel: Option<f64>,
) -> Mod2Index {
    let target = match counting {
        KernelCounting::Chiral => cycle.chiral_block(),
        KernelCounting::Total => cycle.operator(),
    };
    let svals = singular_values(target);
    let sigma_max = svals.first().copied().unwrap_or(0.0);
    let tol_used = tol_kernel.unwrap_or(1e-8 * sigma_max.max(f64::MIN_POSITIVE));
    let kernel_dim = svals.iter().filter(|&&s| s <= tol_used).count();
    let ambiguous: Vec<f64> = svals
        .iter()
        .copied()
        .filter(|&s| s > tol_used && s <= 10.0 * tol_used)
        .collect();
    Mod2Index {
        parity: (kernel_dim % 2) as u8,
        kernel_dim,
        tol_used,
        ambiguous,
    }
}

/// A path of Hermitian operators, ingestible from JSON as
/// `{"steps": [matrix, …]}` with row-major `[re, im]` entries.
#[derive(Debug, Clone)]
pub struct OperatorPath {
    pub steps: Vec<CMat>,
}

#[derive(Serialize, Deserialize)]
struct WirePath {
    steps: Vec<WireMatrix>,
}

impl Serialize for OperatorPath {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        WirePath {
            steps: self.steps.iter().map(matrix_to_wire).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for OperatorPath {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let wire = WirePath::deserialize(deserializer)?;
        let steps = wire
            .steps
            .iter()
            .map(matrix_from_wire)
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        Ok(OperatorPath { steps })
    }
}

/// Maximum bisection depth when eigenvector tracking is ambiguous.
const MAX_BISECTIONS: usize = 8;
/// Minimum eigenvector overlap for an unambiguous match.
const OVERLAP_THRESHOLD: f64 = 0.7;

/// Mod-2 spectral flow of a path of Hermitian operators: the parity of
/// eigenvalue sign changes from the first step to the last.
///
/// Eigenvalue curves are tracked by maximal eigenvector overlap between
/// consecutive steps; when the best assignment drops below 0.7 the segment
/// is refined by linear interpolation of the operators, up to 8 bisection
/// levels, after which a resolution error is raised. Endpoints must be
/// invertible. Refining the partition of a continuous path does not change
/// the parity.
pub fn spectral_flow_mod2(path: &[CMat]) -> Result<u8> {
    if path.len() < 2 {
        return Err(Error::validation(
            "spectral_flow_mod2: need at least two path steps",
        ));
    }
    let n = path[0].nrows();
    for (i, h) in path.iter().enumerate() {
        if h.nrows() != n || h.ncols() != n {
            return Err(Error::validation(format!(
                "spectral_flow_mod2: step {i} has shape {}x{}, expected {n}x{n}",
                h.nrows(),
                h.ncols()
            )));
        }
        check_hermitian(h, &format!("spectral_flow_mod2 step {i}"))?;
    }
    let scale = path.iter().map(frob).fold(0.0f64, f64::max).max(1.0);
    let tol_zero = 1e-12 * scale;

    let first = eig_hermitian(&path[0])?;
    let last = eig_hermitian(path.last().unwrap())?;
    for (which, eig) in [("first", &first), ("last", &last)] {
        if eig.values.iter().any(|v| v.abs() <= tol_zero) {
            return Err(Error::Singular(format!(
                "spectral_flow_mod2: {which} path endpoint has a zero mode \
                 (min |eigenvalue| ≤ {tol_zero:.3e})"
            )));
        }
    }

    // Tracked state: eigenvalue curves in a fixed order with their current
    // vectors and last recorded nonzero sign.
    let mut frame = first.vectors.clone();
    let mut last_sign: Vec<i8> = first.values.iter().map(|&v| sign_of(v, tol_zero)).collect();
    let mut flips = 0usize;
    for w in path.windows(2) {
        advance_segment(
            &w[0],
            &w[1],
            &mut frame,
            &mut last_sign,
            &mut flips,
            tol_zero,
            0,
        )?;
    }
    Ok((flips % 2) as u8)
}

fn sign_of(v: f64, tol: f64) -> i8 {
    if v > tol {
        1
    } else if v < -tol {
        -1
    } else {
        0
    }
}

/// Track curves across one segment, bisecting on ambiguity.
fn advance_segment(
    a: &CMat,
    b: &CMat,
    frame: &mut CMat,
    last_sign: &mut [i8],
    flips: &mut usize,
    tol_zero: f64,
    depth: usize,
) -> Result<()> {
    let eig_b = eig_hermitian(b)?;
    let n = frame.ncols();
    // Overlap matrix between current curve vectors and the new eigenbasis.
    let overlap = frame.adjoint() * &eig_b.vectors;
    // Greedy maximal assignment.
    let mut assigned_curve = vec![false; n];
    let mut assigned_new = vec![false; n];
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            pairs.push((overlap[(i, j)].norm(), i, j));
        }
    }
    pairs.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
    let mut matching = vec![usize::MAX; n];
    let mut min_overlap = f64::INFINITY;
    for (ov, i, j) in pairs {
        if !assigned_curve[i] && !assigned_new[j] {
            assigned_curve[i] = true;
            assigned_new[j] = true;
            matching[i] = j;
            min_overlap = min_overlap.min(ov);
        }
    }
    if min_overlap < OVERLAP_THRESHOLD {
        if depth >= MAX_BISECTIONS {
            return Err(Error::Resolution(format!(
                "spectral_flow_mod2: eigenvector tracking stayed ambiguous \
                 (best overlap {min_overlap:.3} < {OVERLAP_THRESHOLD}) after \
                 {MAX_BISECTIONS} bisections"
            )));
        }
        let mid = (a + b).scale(0.5);
        advance_segment(a, &mid, frame, last_sign, flips, tol_zero, depth + 1)?;
        advance_segment(&mid, b, frame, last_sign, flips, tol_zero, depth + 1)?;
        return Ok(());
    }
    // Commit: update each curve's vector and count sign changes.
    for i in 0..n {
        let j = matching[i];
        frame.set_column(i, &eig_b.vectors.column(j));
        let s = sign_of(eig_b.values[j], tol_zero);
        if s != 0 {
            if last_sign[i] != 0 && s != last_sign[i] {
                *flips += 1;
            }
            last_sign[i] = s;
        }
    }
    Ok(())
}
