//! The Powers–Rieffel projection: a self-adjoint idempotent of trace θ in
//! the rotation algebra, built from smooth circle profiles.
//!
//! The element has the standard form
//!
//! ```text
//! p = f(v) + g(v)·u + u*·g(v)
//! ```
//!
//! with real profiles `f, g` on the circle. Expanding `p² − p` in normal
//! order reduces idempotency to three pointwise conditions (with
//! `(T_s h)(x) = h(x − s)` the circle shift):
//!
//! * `g · T_{−θ}g = 0` — the u² and (u*)² coefficients vanish,
//! * `g · (f + T_{−θ}f − 1) = 0` — the u and u* coefficients vanish,
//! * `f² + g² + T_θ(g²) = f` — the v-only coefficient closes.
//!
//! Here `f` is a heat-kernel smoothed indicator of `[0, θ]`: its Fourier
//! coefficients are the exact closed form
//! `f_k = (1 − e^{−2πikθ})/(2πik) · e^{−2π²ς²k²}` (and `f₀ = θ`, so the
//! trace of `p` is θ on the nose), which makes the rise at 0 and the fall
//! at θ exact mirrors and concentrates the spectrum optimally. `g` is
//! `sqrt(f(1−f))` windowed to the rising edge; the three conditions then
//! hold up to Gaussian tails, far below the Fourier-truncation defect.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::linalg::CMat;

use super::{clock_shift_generators, NcElement, NcTorusAlgebra};

/// Profile parameters for the Powers–Rieffel construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrProfile {
    /// Fourier bandwidth of the returned coefficients: v-exponents are kept
    /// for `|n| ≤ bandwidth`.
    pub bandwidth: i64,
    /// Gaussian smoothing width ς of the profile edges. `None` chooses
    /// `min(θ, 1−θ)/22`, which balances edge-window and truncation defects
    /// at the default bandwidth.
    pub smoothing: Option<f64>,
    /// Grid size for the fast Fourier transforms used to extract the
    /// profile coefficients.
    pub fft_size: usize,
}

impl Default for PrProfile {
    fn default() -> Self {
        Self {
            bandwidth: 64,
            smoothing: None,
            fft_size: 8192,
        }
    }
}

/// Defect tolerance guaranteed by the construction: idempotency,
/// self-adjointness (both in the coefficient ℓ¹ norm), and the trace
/// deviation from θ are all checked against this before returning.
pub const PR_DEFECT_TOL: f64 = 1e-8;

/// Build the Powers–Rieffel projection of trace θ.
///
/// Requires `0 < θ < 1`. The returned element satisfies
/// `‖p² − p‖₁ ≤ 1e−8`, `‖p − p*‖₁ ≤ 1e−8`, and `|trace(p) − θ| ≤ 1e−8`
/// after Fourier truncation at the configured bandwidth; violating profile
/// parameters (edges too wide to keep `g² = f(1−f)` localized on one edge)
/// are a construction error, and a bandwidth too small for the requested
/// smoothness surfaces as a resolution error.
///
/// For θ close to 0 or 1 the profiles sharpen and the default bandwidth may
/// not suffice; raise `bandwidth` (and `fft_size` along with it) in that
/// case.
pub fn powers_rieffel_projection(alg: &NcTorusAlgebra, profile: &PrProfile) -> Result<NcElement> {
    let theta = alg.theta();
    if !(0.0 < theta && theta < 1.0) {
        return Err(Error::validation(format!(
            "powers_rieffel_projection: need 0 < θ < 1, got θ = {theta}"
        )));
    }
    let bw = profile.bandwidth;
    if bw < 1 {
        return Err(Error::validation(format!(
            "powers_rieffel_projection: bandwidth must be ≥ 1, got {bw}"
        )));
    }
    let n = profile.fft_size;
    if n < 512 || (n as i64) < 8 * bw {
        return Err(Error::validation(format!(
            "powers_rieffel_projection: fft_size {n} too small for bandwidth {bw} \
             (need ≥ max(512, 8·bandwidth))"
        )));
    }
    let edge_room = theta.min(1.0 - theta);
    let sigma = profile.smoothing.unwrap_or(edge_room / 22.0);
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(Error::validation(format!(
            "powers_rieffel_projection: smoothing width must be positive, got {sigma}"
        )));
    }
    // The edge bumps of f(1−f) must die off before the window that carves
    // g out of the rising edge ends, otherwise g² = f(1−f) fails on the
    // overlap of the two edges.
    if sigma > edge_room / 21.0 {
        return Err(Error::Construction(format!(
            "powers_rieffel_projection: smoothing width {sigma:.4} too large for θ = {theta:.4}; \
             the rise and fall profiles overlap and g² = f(1−f) cannot hold on a single edge \
             (need ς ≤ min(θ, 1−θ)/21 = {:.4})",
            edge_room / 21.0
        )));
    }

    // Exact Fourier coefficients of the heat-smoothed indicator of [0, θ].
    let half = (n / 2) as i64;
    let f_hat = |k: i64| -> Complex64 {
        if k == 0 {
            return Complex64::new(theta, 0.0);
        }
        let kf = k as f64;
        let damp = (-2.0 * std::f64::consts::PI.powi(2) * sigma * sigma * kf * kf).exp();
        let num = Complex64::new(1.0, 0.0)
            - Complex64::from_polar(1.0, -std::f64::consts::TAU * kf * theta);
        num / Complex64::new(0.0, std::f64::consts::TAU * kf) * damp
    };

    // Synthesize f on the grid (band-limited, so this is exact sampling).
    let mut planner = FftPlanner::<f64>::new();
    let mut f_samples: Vec<Complex64> = vec![Complex64::ZERO; n];
    for k in -(half - 1)..half {
        f_samples[k.rem_euclid(n as i64) as usize] = f_hat(k);
    }
    planner.plan_fft_inverse(n).process(&mut f_samples);

    // g = sqrt(f(1−f)) on the rising edge only: window at half the distance
    // to the falling edge, where the bump has decayed to ~1e−13.
    let window = edge_room / 2.0;
    let mut g_samples: Vec<Complex64> = Vec::with_capacity(n);
    for (j, fs) in f_samples.iter().enumerate() {
        let s = j as f64 / n as f64;
        let dist_to_zero = s.min(1.0 - s);
        let val = if dist_to_zero <= window {
            let f = fs.re;
            (f * (1.0 - f)).max(0.0).sqrt()
        } else {
            0.0
        };
        g_samples.push(Complex64::new(val, 0.0));
    }
    planner.plan_fft_forward(n).process(&mut g_samples);
    let g_hat = |k: i64| -> Complex64 {
        let raw = g_samples[k.rem_euclid(n as i64) as usize] / n as f64;
        let mirror = g_samples[(-k).rem_euclid(n as i64) as usize] / n as f64;
        // Hermitian symmetrization: g is real, so enforce g_{−k} = conj(g_k)
        // exactly and self-adjointness of p becomes exact.
        (raw + mirror.conj()) * 0.5
    };

    // Assemble p = f(v) + g(v)u + u*g(v) in normal order; g(v)u reorders as
    // Σ g_k e^{−2πiθk} u vᵏ.
    let mut terms: Vec<((i64, i64), Complex64)> = Vec::with_capacity(3 * (2 * bw as usize + 1));
    for k in -bw..=bw {
        let fk = f_hat(k);
        if fk != Complex64::ZERO {
            terms.push(((0, k), fk));
        }
        let gk = g_hat(k);
        if gk != Complex64::ZERO {
            let reorder = Complex64::from_polar(
                1.0,
                -std::f64::consts::TAU * (theta * k as f64).rem_euclid(1.0),
            );
            terms.push(((1, k), gk * reorder));
            terms.push(((-1, k), gk));
        }
    }
    let p = NcElement::from_terms(theta, terms).pruned(1e-16);

    let sa = p.self_adjoint_defect();
    if sa > PR_DEFECT_TOL {
        return Err(Error::NonConvergence(format!(
            "powers_rieffel_projection: self-adjointness defect {sa:.3e} exceeds {PR_DEFECT_TOL:.1e}"
        )));
    }
    let idem = p.projection_defect();
    if idem > PR_DEFECT_TOL {
        return Err(Error::Resolution(format!(
            "powers_rieffel_projection: idempotency defect {idem:.3e} exceeds {PR_DEFECT_TOL:.1e} \
             at bandwidth {bw} (θ = {theta:.6})"
        )));
    }
    let tr = (p.trace() - Complex64::new(theta, 0.0)).norm();
    if tr > PR_DEFECT_TOL {
        return Err(Error::Resolution(format!(
            "powers_rieffel_projection: trace deviates from θ by {tr:.3e}"
        )));
    }
    Ok(p)
}

/// Build the spectral projection onto one magnetic band of the Hofstadter
/// operator `u + u* + v + v*` at rational flux θ = p/q, as an element of
/// the rotation algebra.
///
/// The algebra at rational θ fibers over the 2-torus of magnetic Bloch
/// momenta: `π_k(u) = e^{ik₁}U`, `π_k(v) = e^{ik₂}V` with the q×q
/// clock–shift pair. The operator's fiber `h(k)` has q non-degenerate
/// bands wherever the spectrum is gapped; the `band`-th eigenprojection
/// (bands ordered by ascending eigenvalue) is sampled on a `k_grid²`
/// momentum grid and its Fourier coefficients are recovered from the
/// orthonormality of the fibered monomials,
///
/// ```text
/// c_{mn} = (1/(q·K²)) Σ_k e^{−i(mk₁+nk₂)} tr((UᵐVⁿ)†·P(k)),
/// ```
///
/// which is alias-free once `k_grid > 2·bandwidth`. Gapped bands have
/// exponentially decaying coefficients, so moderate bandwidths reach
/// idempotency defects ~1e−9; the result is validated as a projection of
/// trace 1/q before returning.
///
/// Errors: a non-rational algebra, a band index ≥ q, or an aliasing grid
/// are validation errors; a band touching its neighbour on the grid is a
/// gap-closure error; an insufficient bandwidth surfaces as a resolution
/// error.
pub fn hofstadter_band_projection(
    alg: &NcTorusAlgebra,
    band: usize,
    bandwidth: i64,
    k_grid: usize,
) -> Result<NcElement> {
    let Some((p, q)) = alg.rational_theta() else {
        return Err(Error::validation(
            "hofstadter_band_projection: magnetic bands need an exact rational flux θ = p/q \
             (construct the algebra with NcTorusAlgebra::rational)",
        ));
    };
    let qs = q as usize;
    if band >= qs {
        return Err(Error::validation(format!(
            "hofstadter_band_projection: flux {p}/{q} has {q} bands, band index {band} is out \
             of range"
        )));
    }
    if bandwidth < 1 {
        return Err(Error::validation(format!(
            "hofstadter_band_projection: bandwidth must be ≥ 1, got {bandwidth}"
        )));
    }
    if (k_grid as i64) <= 2 * bandwidth {
        return Err(Error::validation(format!(
            "hofstadter_band_projection: k_grid = {k_grid} aliases Fourier modes at bandwidth \
             {bandwidth} (need k_grid > 2·bandwidth)"
        )));
    }
    let (u, v) = clock_shift_generators(p, q)?;

    // Sample the fiber projection over the momentum grid, recording each of
    // its q² entries as a function on the grid.
    let kk = k_grid as f64;
    let mut field: Vec<Vec<Complex64>> = vec![vec![Complex64::ZERO; k_grid * k_grid]; qs * qs];
    let mut min_gap = f64::INFINITY;
    for j1 in 0..k_grid {
        let k1 = std::f64::consts::TAU * j1 as f64 / kk;
        let hu =
            (&u * Complex64::from_polar(1.0, k1)) + (u.adjoint() * Complex64::from_polar(1.0, -k1));
        for j2 in 0..k_grid {
            let k2 = std::f64::consts::TAU * j2 as f64 / kk;
            let h = &hu
                + (&v * Complex64::from_polar(1.0, k2))
                + (v.adjoint() * Complex64::from_polar(1.0, -k2));
            let eig = crate::linalg::eig_hermitian(&h)?;
            if band > 0 {
                min_gap = min_gap.min(eig.values[band] - eig.values[band - 1]);
            }
            if band + 1 < qs {
                min_gap = min_gap.min(eig.values[band + 1] - eig.values[band]);
            }
            if min_gap <= 1e-6 {
                return Err(Error::GapClosure {
                    context: format!(
                        "hofstadter_band_projection: band {band} of flux {p}/{q} touches its \
                         neighbour at k = ({k1:.4}, {k2:.4})"
                    ),
                    gap: min_gap.max(0.0),
                });
            }
            let col = eig.vectors.column(band);
            for r in 0..qs {
                for c in 0..qs {
                    field[r * qs + c][j1 * k_grid + j2] = col[r] * col[c].conj();
                }
            }
        }
    }

    // 2d DFT of every entry: F_{rc}(m, n) = Σ_k e^{−i(mk₁+nk₂)} P(k)_{rc},
    // read off at the (alias-free) frequencies |m|, |n| ≤ bandwidth.
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(k_grid);
    let mut scratch = vec![Complex64::ZERO; k_grid];
    for entry in field.iter_mut() {
        for row in entry.chunks_exact_mut(k_grid) {
            fft.process(row);
        }
        for col_idx in 0..k_grid {
            for (s, chunk) in scratch.iter_mut().zip(entry.chunks_exact(k_grid)) {
                *s = chunk[col_idx];
            }
            fft.process(&mut scratch);
            for (s, chunk) in scratch.iter().zip(entry.chunks_exact_mut(k_grid)) {
                chunk[col_idx] = *s;
            }
        }
    }

    // c_{mn} = (1/(q·K²))·tr((UᵐVⁿ)†·F(m, n)); the monomials are built from
    // cached generator powers, with U^{−j} = (U^j)†.
    let bw = bandwidth as usize;
    let mut u_pow: Vec<CMat> = Vec::with_capacity(bw + 1);
    let mut v_pow: Vec<CMat> = Vec::with_capacity(bw + 1);
    u_pow.push(CMat::identity(qs, qs));
    v_pow.push(CMat::identity(qs, qs));
    for j in 1..=bw {
        u_pow.push(&u_pow[j - 1] * &u);
        v_pow.push(&v_pow[j - 1] * &v);
    }
    let norm = 1.0 / (q as f64 * kk * kk);
    let mut terms: Vec<((i64, i64), Complex64)> = Vec::with_capacity((2 * bw + 1).pow(2));
    for m in -bandwidth..=bandwidth {
        let um = if m >= 0 {
            u_pow[m as usize].clone()
        } else {
            u_pow[(-m) as usize].adjoint()
        };
        for n in -bandwidth..=bandwidth {
            let vn = if n >= 0 {
                v_pow[n as usize].clone()
            } else {
                v_pow[(-n) as usize].adjoint()
            };
            let w = (&um * vn).adjoint();
            let grid_idx = (m.rem_euclid(k_grid as i64) as usize) * k_grid
                + n.rem_euclid(k_grid as i64) as usize;
            // tr(W·F) = Σ_{rc} W_{rc}·F_{cr}
            let mut tr = Complex64::ZERO;
            for r in 0..qs {
                for c in 0..qs {
                    tr += w[(r, c)] * field[c * qs + r][grid_idx];
                }
            }
            terms.push(((m, n), tr * norm));
        }
    }
    let e = NcElement::from_terms(alg.theta(), terms).pruned(1e-14);

    let sa = e.self_adjoint_defect();
    if sa > 1e-8 {
        return Err(Error::Resolution(format!(
            "hofstadter_band_projection: self-adjointness defect {sa:.3e} exceeds 1e-8"
        )));
    }
    let idem = e.projection_defect();
    if idem > 1e-6 {
        return Err(Error::Resolution(format!(
            "hofstadter_band_projection: idempotency defect {idem:.3e} exceeds 1e-6 at bandwidth \
             {bandwidth}; the band coefficients have not decayed yet (min gap {min_gap:.3e})"
        )));
    }
    let tr = (e.trace() - Complex64::from(1.0 / q as f64)).norm();
    if tr > 1e-8 {
        return Err(Error::Resolution(format!(
            "hofstadter_band_projection: trace deviates from 1/{q} by {tr:.3e}"
        )));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::linalg::eig_hermitian;
    use crate::nctorus::{represent, Representation};

    #[test]
    fn defaults_give_a_projection_of_trace_theta() {
        let alg = NcTorusAlgebra::rational(1, 3).unwrap();
        let p = powers_rieffel_projection(&alg, &PrProfile::default()).unwrap();
        assert!((p.trace().re - 1.0 / 3.0).abs() < 1e-12);
        assert!(p.trace().im.abs() < 1e-14);
        assert!(p.projection_defect() <= 1e-8);
        assert!(p.self_adjoint_defect() <= 1e-10);
        assert!(p.bandwidth() <= 64);
        // Only u-degrees −1, 0, 1 appear.
        assert!(p.terms().all(|((m, _), _)| m.abs() <= 1));
    }

    #[test]
    fn works_across_theta_values_including_above_one_half() {
        for (theta, bw) in [
            (2.0 / 5.0, 64),
            (1.0 / std::f64::consts::SQRT_2, 96),
            (0.73, 96),
        ] {
            let alg = NcTorusAlgebra::new(theta).unwrap();
            let profile = PrProfile {
                bandwidth: bw,
                ..Default::default()
            };
            let p = powers_rieffel_projection(&alg, &profile).unwrap();
            assert!(
                (p.trace().re - theta).abs() < 1e-10,
                "theta={theta}: trace {}",
                p.trace().re
            );
            assert!(
                p.projection_defect() <= 1e-8,
                "theta={theta}: defect {}",
                p.projection_defect()
            );
        }
    }

    #[test]
    fn clock_shift_image_is_a_rank_one_spectral_projection() {
        // At θ = 1/3 the exact 3-dimensional representation must send p to
        // a matrix projection; by Poisson summation of the profile its rank
        // is 3·Σ_j f_{3j} = f(0) + f(1/3) + f(2/3) = 1.
        let alg = NcTorusAlgebra::rational(1, 3).unwrap();
        let p = powers_rieffel_projection(&alg, &PrProfile::default()).unwrap();
        let mat = represent(&p, &Representation::ClockShift { q: 3 }).unwrap();
        let eig = eig_hermitian(&mat).unwrap();
        let expected = [0.0, 0.0, 1.0];
        for (got, want) in eig.values.iter().zip(expected) {
            assert!((got - want).abs() < 1e-7, "eigenvalues {:?}", eig.values);
        }
    }

    #[test]
    fn rejects_invalid_parameters() {
        let out_of_range = NcTorusAlgebra::new(1.25).unwrap();
        assert!(matches!(
            powers_rieffel_projection(&out_of_range, &PrProfile::default()),
            Err(Error::Validation(_))
        ));

        let alg = NcTorusAlgebra::rational(1, 3).unwrap();
        let too_wide = PrProfile {
            smoothing: Some(0.1),
            ..Default::default()
        };
        assert!(matches!(
            powers_rieffel_projection(&alg, &too_wide),
            Err(Error::Construction(_))
        ));

        let tiny_fft = PrProfile {
            fft_size: 128,
            ..Default::default()
        };
        assert!(powers_rieffel_projection(&alg, &tiny_fft).is_err());
    }

    #[test]
    fn insufficient_bandwidth_is_a_resolution_error() {
        // A sharp profile at small θ cannot be captured by a tiny bandwidth.
        let alg = NcTorusAlgebra::new(0.04).unwrap();
        let profile = PrProfile {
            bandwidth: 16,
            ..Default::default()
        };
        match powers_rieffel_projection(&alg, &profile) {
            Err(e @ Error::Resolution(_)) => assert_eq!(e.exit_code(), 3),
            other => panic!("expected resolution error, got {other:?}"),
        }
    }

    #[test]
    fn hofstadter_lowest_band_is_a_projection_of_trace_one_third() {
        let alg = NcTorusAlgebra::rational(1, 3).unwrap();
        let e = hofstadter_band_projection(&alg, 0, 40, 84).unwrap();
        assert!((e.trace().re - 1.0 / 3.0).abs() < 1e-9);
        assert!(e.trace().im.abs() < 1e-12);
        assert!(
            e.projection_defect() <= 1e-7,
            "defect {}",
            e.projection_defect()
        );
        assert!(e.self_adjoint_defect() <= 1e-10);
        // The exact 3-dimensional fiber at k = 0 is part of the sampled
        // family, so the clock–shift image must be near a rank-1 projection.
        let mat = represent(&e, &Representation::ClockShift { q: 3 }).unwrap();
        let eig = eig_hermitian(&mat).unwrap();
        assert!(eig.values[2] > 0.9 && eig.values[1] < 0.1);
    }

    #[test]
    fn hofstadter_coefficients_are_stable_under_grid_refinement() {
        // The sampled Fourier sums alias modes separated by the grid period,
        // so once the grid out-resolves the (exponentially decaying) band,
        // refining it must leave the coefficients unchanged.
        let alg = NcTorusAlgebra::rational(1, 3).unwrap();
        let a = hofstadter_band_projection(&alg, 0, 34, 84).unwrap();
        let b = hofstadter_band_projection(&alg, 0, 34, 108).unwrap();
        let diff = (&a - &b).norm_l1();
        assert!(diff < 1e-8, "grid sensitivity {diff:.3e}");
    }

    #[test]
    fn hofstadter_touching_bands_are_a_gap_closure() {
        // Flux 1/2: the two bands touch at k = (π/2, π/2), which the grid
        // hits when k_grid is a multiple of 4.
        let alg = NcTorusAlgebra::rational(1, 2).unwrap();
        match hofstadter_band_projection(&alg, 0, 8, 48) {
            Err(e @ Error::GapClosure { .. }) => assert_eq!(e.exit_code(), 4),
            other => panic!("expected gap closure, got {other:?}"),
        }
    }

    #[test]
    fn hofstadter_rejects_bad_parameters() {
        let irrational = NcTorusAlgebra::new(0.37).unwrap();
        assert!(matches!(
            hofstadter_band_projection(&irrational, 0, 8, 32),
            Err(Error::Validation(_))
        ));
        let alg = NcTorusAlgebra::rational(1, 3).unwrap();
        assert!(matches!(
            hofstadter_band_projection(&alg, 3, 8, 32),
            Err(Error::Validation(_))
        ));
        // Grid must out-resolve the bandwidth.
        assert!(matches!(
            hofstadter_band_projection(&alg, 0, 16, 32),
            Err(Error::Validation(_))
        ));
    }
}
