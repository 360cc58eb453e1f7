//! Dense complex linear algebra kernels used throughout the crate:
//! Hermitian eigendecomposition with validated residuals, Pfaffians of
//! skew-symmetric matrices via tridiagonalization with pivoting, spectral
//! sign operators, numerical kernels, and small seeded random constructors.
//!
//! Matrices are `nalgebra` dynamic matrices over `Complex64` (`CMat`) or
//! `f64` (`RMat`). All tolerance checks in this module use the Frobenius
//! norm; relative tolerances are taken against the Frobenius norm of the
//! input unless stated otherwise.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;
use num_traits::Zero;
use rand::Rng;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;
pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;

/// Relative tolerance for structural matrix checks (Hermitian, skew, unitary).
pub const TOL_STRUCTURE: f64 = 1e-12;
/// Relative tolerance for eigendecomposition residuals.
pub const TOL_EIG_RESIDUAL: f64 = 1e-10;
/// Relative numerical-kernel tolerance: `1e-8 * max |eigenvalue|`.
pub const TOL_KERNEL_REL: f64 = 1e-8;

pub const I: Complex64 = Complex64::new(0.0, 1.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Frobenius norm.
pub fn frob(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// ‖A − A†‖_F.
pub fn hermitian_residual(a: &CMat) -> f64 {
    frob(&(a - a.adjoint()))
}

/// ‖A + Aᵀ‖_F (complex skew-*symmetric*, not skew-adjoint).
pub fn skew_symmetric_residual(a: &CMat) -> f64 {
    frob(&(a + a.transpose()))
}

/// ‖A + A†‖_F (skew-adjoint).
pub fn skew_adjoint_residual(a: &CMat) -> f64 {
    frob(&(a + a.adjoint()))
}

/// ‖A†A − 1‖_F.
pub fn unitary_residual(a: &CMat) -> f64 {
    let n = a.ncols();
    frob(&(a.adjoint() * a - CMat::identity(n, n)))
}

fn rel_scale(a: &CMat) -> f64 {
    frob(a).max(1.0)
}

/// Validate that `a` is square and Hermitian within `TOL_STRUCTURE` (relative).
pub fn check_hermitian(a: &CMat, context: &str) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::validation(format!(
            "{context}: expected a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let res = hermitian_residual(a);
    let tol = TOL_STRUCTURE * rel_scale(a);
    if res > tol {
        return Err(Error::Structure {
            identity: format!("{context}: A = A†"),
            residual: res,
            tolerance: tol,
        });
    }
    Ok(())
}

/// Validate complex skew-symmetry `Aᵀ = −A` within `TOL_STRUCTURE` (relative).
pub fn check_skew_symmetric(a: &CMat, context: &str) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::validation(format!(
            "{context}: expected a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let res = skew_symmetric_residual(a);
    let tol = TOL_STRUCTURE * rel_scale(a);
    if res > tol {
        return Err(Error::Structure {
            identity: format!("{context}: Aᵀ = −A"),
            residual: res,
            tolerance: tol,
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Hermitian eigendecomposition
// ---------------------------------------------------------------------------

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct EigH {
    /// Real eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: CMat,
    /// ‖AV − VΛ‖_F / max(‖A‖_F, 1), checked against `TOL_EIG_RESIDUAL`.
    pub residual: f64,
}

/// Hermitian eigendecomposition with validated reconstruction residual.
///
/// Fails with a structure error if `a` is not Hermitian within tolerance and
/// with a non-convergence error if the residual check fails.
pub fn eig_hermitian(a: &CMat) -> Result<EigH> {
    check_hermitian(a, "eig_hermitian")?;
    let n = a.nrows();
    if n == 0 {
        return Ok(EigH {
            values: vec![],
            vectors: CMat::zeros(0, 0),
            residual: 0.0,
        });
    }
    // Symmetrize first so the decomposition sees an exactly Hermitian input.
    let h = (a + a.adjoint()).scale(0.5);
    let se = h.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].partial_cmp(&se.eigenvalues[j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &se.eigenvectors.column(i));
    }
    let lambda = CMat::from_fn(n, n, |i, j| if i == j { cr(values[i]) } else { ZERO });
    let residual = frob(&(a * &vectors - &vectors * lambda)) / rel_scale(a);
    if residual > TOL_EIG_RESIDUAL {
        return Err(Error::NonConvergence(format!(
            "eig_hermitian: reconstruction residual {residual:.3e} exceeds {TOL_EIG_RESIDUAL:.1e}"
        )));
    }
    Ok(EigH {
        values,
        vectors,
        residual,
    })
}

// ---------------------------------------------------------------------------
// Pfaffian
// ---------------------------------------------------------------------------

/// Pfaffian of a complex skew-symmetric matrix (`Aᵀ = −A`).
///
/// Uses skew-symmetric tridiagonalization by Gauss congruence transforms
/// (Parlett–Reid) with greatest-element column pivoting; the permutation
/// parity is tracked exactly. Conventions: `pf` of the empty `0×0` matrix is
/// `1`, odd dimension gives `0`, `pf([[0,a],[−a,0]]) = a`.
pub fn pfaffian(a: &CMat) -> Result<Complex64> {
    check_skew_symmetric(a, "pfaffian")?;
    Ok(pfaffian_unchecked(a.clone()))
}

/// Pfaffian of a real skew-symmetric matrix in pure real arithmetic.
pub fn pfaffian_real(a: &RMat) -> Result<f64> {
    if a.nrows() != a.ncols() {
        return Err(Error::validation(format!(
            "pfaffian_real: expected a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let res = (a + a.transpose()).norm();
    let tol = TOL_STRUCTURE * a.norm().max(1.0);
    if res > tol {
        return Err(Error::Structure {
            identity: "pfaffian_real: Aᵀ = −A".into(),
            residual: res,
            tolerance: tol,
        });
    }
    Ok(pfaffian_kernel(a.clone()))
}

fn pfaffian_unchecked(a: CMat) -> Complex64 {
    pfaffian_kernel(a)
}

/// Parlett–Reid elimination, generic over real/complex scalars.
fn pfaffian_kernel<T: ComplexField + Copy>(mut a: DMatrix<T>) -> T {
    let n = a.nrows();
    if n == 0 {
        return T::one();
    }
    if n % 2 == 1 {
        return T::zero();
    }
    let mut pf = T::one();
    let mut k = 0;
    while k + 1 < n {
        // Greatest-element pivot in the working column below the diagonal.
        let mut kp = k + 1;
        let mut best = a[(k + 1, k)].modulus();
        for i in (k + 2)..n {
            let m = a[(i, k)].modulus();
            if m > best {
                best = m;
                kp = i;
            }
        }
        if best == T::RealField::zero() {
            // Whole column zero: the matrix is singular, Pfaffian vanishes.
            return T::zero();
        }
        if kp != k + 1 {
            a.swap_rows(kp, k + 1);
            a.swap_columns(kp, k + 1);
            pf = -pf; // congruence by a transposition flips the sign
        }
        let pivot = a[(k + 1, k)];
        pf *= a[(k, k + 1)];
        if k + 2 < n {
            for i in (k + 2)..n {
                let tau = a[(i, k)] / pivot;
                if tau != T::zero() {
                    // Congruence by the Gauss transform G = 1 − τ e_i e_{k+1}ᵀ
                    // (unit determinant, Pfaffian unchanged).
                    for j in k..n {
                        let t = a[(k + 1, j)] * tau;
                        a[(i, j)] -= t;
                    }
                    for j in k..n {
                        let t = a[(j, k + 1)] * tau;
                        a[(j, i)] -= t;
                    }
                }
            }
        }
        k += 2;
    }
    pf
}

// ---------------------------------------------------------------------------
// Sign operator
// ---------------------------------------------------------------------------

/// How to turn a (skew-)self-adjoint operator into its phase `F = D|D|⁻¹`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignMode {
    /// `F = D|D|⁻¹`; errors on a nontrivial kernel unless a tolerance was
    /// passed explicitly, in which case kernel directions map to zero.
    Phase,
    /// `F = D(1 + D†D)^{−1/2}` — bounded smoothing, no kernel error.
    Regularized,
    /// Drop the numerical kernel: returns the phase on its complement
    /// together with the complement basis.
    KernelExcise,
}

/// Result of [`sign_operator`].
#[derive(Debug, Clone)]
pub struct SignOperator {
    /// The sign/phase matrix. For `KernelExcise` it lives on the complement
    /// basis and has reduced dimension.
    pub f: CMat,
    /// Dimension of the numerical kernel of `D` that was hit.
    pub kernel_dim: usize,
    /// Basis of the retained subspace (`KernelExcise` only): columns are the
    /// eigenvectors of `D` kept, so `F` acts in these coordinates.
    pub basis: Option<CMat>,
    /// The kernel tolerance actually used.
    pub tol_used: f64,
}

/// Spectral sign of a self-adjoint or skew-adjoint `D`.
///
/// For self-adjoint `D` the result satisfies `F² = 1` (on the kernel
/// complement); for skew-adjoint `D` it satisfies `F² = −1` there, as the
/// phase of a skew operator is a complex structure rather than a reflection.
///
/// `tol_kernel = None` uses the default `1e-8 · max|eigenvalue|` but makes a
/// nontrivial kernel an error in `Phase` mode; passing `Some(tol)` opts into
/// the zero-on-kernel convention.
pub fn sign_operator(d: &CMat, mode: SignMode, tol_kernel: Option<f64>) -> Result<SignOperator> {
    if d.nrows() != d.ncols() {
        return Err(Error::validation(format!(
            "sign_operator: expected a square matrix, got {}x{}",
            d.nrows(),
            d.ncols()
        )));
    }
    let herm = hermitian_residual(d);
    let skew = skew_adjoint_residual(d);
    let tol = TOL_STRUCTURE * rel_scale(d);
    let is_skew = if herm <= tol {
        false
    } else if skew <= tol {
        true
    } else {
        return Err(Error::Structure {
            identity: "sign_operator: D = ±D†".into(),
            residual: herm.min(skew),
            tolerance: tol,
        });
    };
    // Skew-adjoint D = −iH with H Hermitian shares eigenvectors with H.
    let h = if is_skew { d.map(|z| z * I) } else { d.clone() };
    let eig = eig_hermitian(&h)?;
    let max_abs = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol_used = tol_kernel.unwrap_or(TOL_KERNEL_REL * max_abs.max(f64::MIN_POSITIVE));
    let kernel_dim = eig.values.iter().filter(|v| v.abs() <= tol_used).count();

    // An eigenvalue sitting just above the kernel tolerance is ambiguous;
    // the phase there is numerically meaningless.
    let phase_of = |lam: f64| -> Complex64 {
        let s = if lam.abs() <= tol_used {
            0.0
        } else {
            lam.signum()
        };
        if is_skew {
            c(0.0, -s) // D = −iH: sign picks up the −i
        } else {
            cr(s)
        }
    };

    let n = d.nrows();
    match mode {
        SignMode::Phase => {
            if kernel_dim > 0 && tol_kernel.is_none() {
                return Err(Error::Singular(format!(
                    "sign_operator(phase): {kernel_dim}-dimensional numerical kernel \
                     (|λ| ≤ {tol_used:.3e}); pass an explicit tolerance, or use \
                     kernel-excise/regularized mode"
                )));
            }
            let mut f = CMat::zeros(n, n);
            for (i, &lam) in eig.values.iter().enumerate() {
                let v = eig.vectors.column(i);
                let p = phase_of(lam);
                if p != ZERO {
                    f += (v * v.adjoint()).map(|z| z * p);
                }
            }
            Ok(SignOperator {
                f,
                kernel_dim,
                basis: None,
                tol_used,
            })
        }
        SignMode::Regularized => {
            let mut f = CMat::zeros(n, n);
            for (i, &lam) in eig.values.iter().enumerate() {
                let v = eig.vectors.column(i);
                let scale = lam / (1.0 + lam * lam).sqrt();
                let p = if is_skew { c(0.0, -scale) } else { cr(scale) };
                f += (v * v.adjoint()).map(|z| z * p);
            }
            Ok(SignOperator {
                f,
                kernel_dim,
                basis: None,
                tol_used,
            })
        }
        SignMode::KernelExcise => {
            let keep: Vec<usize> = (0..n).filter(|&i| eig.values[i].abs() > tol_used).collect();
            let m = keep.len();
            let mut basis = CMat::zeros(n, m);
            let mut f = CMat::zeros(m, m);
            for (col, &i) in keep.iter().enumerate() {
                basis.set_column(col, &eig.vectors.column(i));
                f[(col, col)] = phase_of(eig.values[i]);
            }
            Ok(SignOperator {
                f,
                kernel_dim,
                basis: Some(basis),
                tol_used,
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Numerical rank / kernel
// ---------------------------------------------------------------------------

/// Singular values of `a`, descending.
pub fn singular_values(a: &CMat) -> Vec<f64> {
    let svd = a.clone().svd(false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.partial_cmp(x).unwrap());
    s
}

/// Numerical rank with tolerance `tol` (absolute on singular values).
pub fn rank_with_tol(a: &CMat, tol: f64) -> usize {
    singular_values(a).iter().filter(|&&s| s > tol).count()
}

/// Kernel dimension and an orthonormal kernel basis (right null space).
pub fn kernel_basis(a: &CMat, tol: f64) -> (usize, CMat) {
    let svd = a.clone().svd(false, true);
    let vt = svd.v_t.expect("svd with V requested");
    let mut cols: Vec<usize> = Vec::new();
    for i in 0..svd.singular_values.len() {
        if svd.singular_values[i] <= tol {
            cols.push(i);
        }
    }
    // Columns of V beyond the number of computed singular values also span
    // the kernel when a is wide (ncols > nrows).
    let extra = a.ncols().saturating_sub(svd.singular_values.len());
    let dim = cols.len() + extra;
    let mut basis = CMat::zeros(a.ncols(), dim);
    for (j, &i) in cols.iter().enumerate() {
        basis.set_column(j, &vt.row(i).adjoint());
    }
    for j in 0..extra {
        basis.set_column(
            cols.len() + j,
            &vt.row(svd.singular_values.len() + j).adjoint(),
        );
    }
    (dim, basis)
}

/// Determinant via LU.
pub fn det(a: &CMat) -> Complex64 {
    a.clone().lu().determinant()
}

// ---------------------------------------------------------------------------
// Small constructors and utilities
// ---------------------------------------------------------------------------

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Seeded random Hermitian matrix with entries of order one.
pub fn random_hermitian(n: usize, rng: &mut impl Rng) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| {
        c(
            rng.random::<f64>() * 2.0 - 1.0,
            rng.random::<f64>() * 2.0 - 1.0,
        )
    });
    (&g + g.adjoint()).scale(0.5)
}

/// Seeded Haar-like random unitary (QR of a Ginibre matrix with the phase
/// convention fixed from the R diagonal).
pub fn random_unitary(n: usize, rng: &mut impl Rng) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| {
        c(
            rng.random::<f64>() * 2.0 - 1.0,
            rng.random::<f64>() * 2.0 - 1.0,
        )
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let ph = d / d.norm();
            for i in 0..n {
                q[(i, j)] *= ph.conj();
            }
        }
    }
    q
}

/// Unitary polar factor of `a` (via SVD): the unitary closest to `a`.
pub fn polar_unitary(a: &CMat) -> CMat {
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("svd U");
    let vt = svd.v_t.expect("svd Vt");
    u * vt
}

/// Align the orthonormal frame `raw` to `prev` by the unitary Procrustes
/// rotation: returns `raw · polar(raw† · prev)`, the gauge of `raw` closest
/// to `prev`. Both must have the same shape with orthonormal columns.
pub fn align_frame(prev: &CMat, raw: &CMat) -> CMat {
    let overlap = raw.adjoint() * prev;
    raw * polar_unitary(&overlap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn eig_hermitian_sorts_ascending_and_reconstructs() {
        let mut r = rng(7);
        for n in [1usize, 2, 5, 12] {
            let a = random_hermitian(n, &mut r);
            let e = eig_hermitian(&a).unwrap();
            for w in e.values.windows(2) {
                assert!(w[0] <= w[1] + 1e-14);
            }
            assert!(e.residual <= TOL_EIG_RESIDUAL);
            // Orthonormal eigenvectors.
            assert!(unitary_residual(&e.vectors) < 1e-10);
        }
    }

    #[test]
    fn eig_hermitian_rejects_non_hermitian() {
        let a = CMat::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(2.0), cr(0.0)]);
        assert!(matches!(eig_hermitian(&a), Err(Error::Structure { .. })));
    }

    #[test]
    fn pfaffian_closed_forms() {
        // 0x0 convention.
        assert_eq!(pfaffian(&CMat::zeros(0, 0)).unwrap(), ONE);
        // Odd dimension.
        assert_eq!(pfaffian(&CMat::zeros(3, 3)).unwrap(), ZERO);
        // pf [[0, a], [-a, 0]] = a.
        let a = c(1.7, -0.3);
        let m = CMat::from_row_slice(2, 2, &[ZERO, a, -a, ZERO]);
        let pf = pfaffian(&m).unwrap();
        assert!((pf - a).norm() < 1e-14);
        // Canonical symplectic form in dimension 8 has Pfaffian 1.
        let mut j = CMat::zeros(8, 8);
        for b in 0..4 {
            j[(2 * b, 2 * b + 1)] = ONE;
            j[(2 * b + 1, 2 * b)] = -ONE;
        }
        assert!((pfaffian(&j).unwrap() - ONE).norm() < 1e-14);
    }

    /// Oracle: pf(A)² = det(A), determinant computed independently via LU.
    #[test]
    fn pfaffian_squares_to_lu_determinant() {
        let mut r = rng(11);
        for n in [2usize, 4, 6, 8, 12] {
            let g = CMat::from_fn(n, n, |_, _| {
                c(r.random::<f64>() * 2.0 - 1.0, r.random::<f64>() * 2.0 - 1.0)
            });
            let a = &g - g.transpose();
            let pf = pfaffian(&a).unwrap();
            let dt = det(&a);
            let scale = dt.norm().max(1.0);
            assert!(
                (pf * pf - dt).norm() <= 1e-10 * scale,
                "n={n}: pf^2={:?} det={:?}",
                pf * pf,
                dt
            );
        }
    }

    /// Oracle: pf(P A Pᵀ) = det(P) pf(A) for permutations P.
    #[test]
    fn pfaffian_permutation_covariance() {
        let mut r = rng(13);
        let n = 8;
        let g = CMat::from_fn(n, n, |_, _| {
            c(r.random::<f64>() * 2.0 - 1.0, r.random::<f64>() * 2.0 - 1.0)
        });
        let a = &g - g.transpose();
        let pf_a = pfaffian(&a).unwrap();
        for trial in 0..20 {
            // Random permutation via Fisher-Yates; track parity exactly.
            let mut perm: Vec<usize> = (0..n).collect();
            let mut parity = 1.0;
            for i in (1..n).rev() {
                let j = r.random_range(0..=i);
                if i != j {
                    perm.swap(i, j);
                    parity = -parity;
                }
            }
            let mut pap = CMat::zeros(n, n);
            for i in 0..n {
                for jj in 0..n {
                    pap[(i, jj)] = a[(perm[i], perm[jj])];
                }
            }
            let pf_p = pfaffian(&pap).unwrap();
            assert!(
                (pf_p - pf_a * cr(parity)).norm() < 1e-10 * pf_a.norm().max(1.0),
                "trial {trial}"
            );
        }
    }

    #[test]
    fn pfaffian_real_matches_complex_path() {
        let mut r = rng(17);
        let n = 10;
        let g = RMat::from_fn(n, n, |_, _| r.random::<f64>() * 2.0 - 1.0);
        let a = &g - g.transpose();
        let pf_r = pfaffian_real(&a).unwrap();
        let ac = a.map(cr);
        let pf_c = pfaffian(&ac).unwrap();
        assert!((pf_c - cr(pf_r)).norm() < 1e-12 * pf_r.abs().max(1.0));
        // And against the determinant.
        assert!((pf_r * pf_r - a.determinant()).abs() < 1e-10 * a.determinant().abs().max(1.0));
    }

    #[test]
    fn sign_operator_diagonal_phase() {
        let d = CMat::from_row_slice(2, 2, &[cr(2.0), ZERO, ZERO, cr(-3.0)]);
        let s = sign_operator(&d, SignMode::Phase, None).unwrap();
        let expect = CMat::from_row_slice(2, 2, &[cr(1.0), ZERO, ZERO, cr(-1.0)]);
        assert!(frob(&(&s.f - &expect)) < 1e-12);
        assert_eq!(s.kernel_dim, 0);
        // F^2 = 1.
        assert!(frob(&(&s.f * &s.f - CMat::identity(2, 2))) < 1e-12);
    }

    #[test]
    fn sign_operator_offdiagonal_is_own_sign() {
        // σ₁ has eigenvalues ±1, so its phase is itself.
        let d = CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let s = sign_operator(&d, SignMode::Phase, None).unwrap();
        assert!(frob(&(&s.f - &d)) < 1e-12);
    }

    #[test]
    fn sign_operator_kernel_policies() {
        let d = CMat::from_row_slice(2, 2, &[ZERO, ZERO, ZERO, cr(5.0)]);
        // Phase with a kernel and no explicit tolerance is a singularity.
        match sign_operator(&d, SignMode::Phase, None) {
            Err(e @ Error::Singular(_)) => assert_eq!(e.exit_code(), 4),
            other => panic!("expected singularity error, got {other:?}"),
        }
        // Explicit tolerance: kernel maps to zero.
        let s = sign_operator(&d, SignMode::Phase, Some(1e-10)).unwrap();
        assert_eq!(s.kernel_dim, 1);
        assert!((s.f[(1, 1)] - ONE).norm() < 1e-12);
        assert!(s.f[(0, 0)].norm() < 1e-12);
        // Regularized: diag(0, 5/sqrt(26)).
        let s = sign_operator(&d, SignMode::Regularized, None).unwrap();
        assert!(s.f[(0, 0)].norm() < 1e-12);
        assert_abs_diff_eq!(s.f[(1, 1)].re, 5.0 / 26.0f64.sqrt(), epsilon = 1e-12);
        // Kernel-excise: 1x1 survivor.
        let s = sign_operator(&d, SignMode::KernelExcise, None).unwrap();
        assert_eq!(s.kernel_dim, 1);
        assert_eq!(s.f.nrows(), 1);
        assert!((s.f[(0, 0)] - ONE).norm() < 1e-12);
    }

    #[test]
    fn sign_operator_skew_adjoint_is_complex_structure() {
        // D = [[0,1],[-1,0]] is skew-adjoint with eigenvalues ±i.
        let d = CMat::from_row_slice(2, 2, &[ZERO, ONE, -ONE, ZERO]);
        let s = sign_operator(&d, SignMode::Phase, None).unwrap();
        // Phase equals D itself here, and F² = −1.
        assert!(frob(&(&s.f - &d)) < 1e-12);
        assert!(frob(&(&s.f * &s.f + CMat::identity(2, 2))) < 1e-12);
    }

    #[test]
    fn rank_and_kernel_on_projector() {
        let mut r = rng(23);
        let u = random_unitary(5, &mut r);
        // Rank-2 projector.
        let mut p = CMat::zeros(5, 5);
        for i in 0..2 {
            let v = u.column(i);
            p += v * v.adjoint();
        }
        assert_eq!(rank_with_tol(&p, 1e-10), 2);
        let (kdim, basis) = kernel_basis(&p, 1e-10);
        assert_eq!(kdim, 3);
        assert!(frob(&(&p * &basis)) < 1e-10);
    }

    #[test]
    fn random_unitary_is_unitary_and_seeded() {
        let u1 = random_unitary(6, &mut rng(5));
        let u2 = random_unitary(6, &mut rng(5));
        assert!(unitary_residual(&u1) < 1e-12);
        assert_eq!(u1, u2);
    }

    #[test]
    fn align_frame_matches_gauge() {
        let mut r = rng(31);
        let q = random_unitary(4, &mut r);
        let frame = q.columns(0, 2).into_owned();
        // Same subspace, rotated gauge.
        let g = random_unitary(2, &mut r);
        let rotated = &frame * &g;
        let aligned = align_frame(&frame, &rotated);
        assert!(frob(&(&aligned - &frame)) < 1e-10);
    }
}
