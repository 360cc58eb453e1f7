//! The sewing-matrix ℤ₂ invariant of a time-reversal symmetric 2d model.
//!
//! With a frame `V(k)` of occupied eigenvectors, the sewing matrix is
//! `w(k) = V(−k)† U_Θ conj(V(k))`, unitary for a gapped time-reversal
//! covariant family, skew-symmetric at the time-reversal invariant momenta
//! `Λ ∈ {0, π}²`. The invariant is
//!
//! `ν = Π_Λ pf[w(Λ)] / √det[w(Λ)] ∈ {+1, −1}`,
//!
//! where the square-root branch is continued from the zone centre along
//! axis-aligned grid paths. The continuation is meaningful only in a frame
//! field that is continuous over the whole torus — in gauges continuous
//! merely along the tracked lines the tracked phase can be rotated
//! arbitrarily (a parallel-transported gauge, for instance, makes `w`
//! covariantly constant and erases the signal entirely). The
//! implementation therefore evaluates `w` in a projected trial-frame gauge
//! (see the gauge module), which is smooth and periodic on all of the
//! torus; under any continuous periodic change of such a gauge the four
//! signs pick up compensating winding parities, so their product is a
//! gauge invariant.
//!
//! The branch is anchored by `√det[w(Γ)] := pf[w(Γ)]`, so the zone centre
//! always reports +1 and the remaining signs are relative to it; the
//! product is independent of that choice (flipping the anchor flips all
//! four factors).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::gauge::{ProjectedGauge, DEFAULT_GAUGE_SEED};
use super::{BlochModel, TrimSet};
use crate::error::{Error, Result};
use crate::linalg::{frob, pfaffian, unitary_residual, CMat};

/// Tolerance for unitarity of the sewing matrix and skewness at the
/// invariant momenta.
pub const TOL_SEWING: f64 = 1e-8;
/// Tolerance for the per-momentum sign `δ_Λ` to be real ±1 after branch
/// continuation.
pub const TOL_TRIM_SIGN: f64 = 1e-6;

/// Options for [`kane_mele_invariant`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KmOptions {
    /// Grid points per axis (even, ≥ 8).
    pub grid: usize,
    /// Minimum admissible spectral gap; below this the computation aborts
    /// with a gap-closure error.
    pub gap_tol: f64,
    /// Optional seed selecting the trial columns of the projected gauge;
    /// the invariant must not depend on it.
    pub gauge_seed: Option<u64>,
}

impl Default for KmOptions {
    fn default() -> Self {
        Self {
            grid: super::DEFAULT_GRID_2D,
            gap_tol: 1e-6,
            gauge_seed: None,
        }
    }
}

/// Result of [`kane_mele_invariant`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KaneMeleResult {
    /// The ℤ₂ invariant, +1 (trivial) or −1 (nontrivial).
    pub nu: i32,
    /// Per-momentum signs `δ_Λ`, in lexicographic order of `Λ ∈ {0, π}²`.
    /// Individually the signs are relative to the zone-centre anchor and to
    /// the chosen gauge (a continuous gauge change can flip pairs of them);
    /// only their product is invariant.
    pub trim_signs: Vec<([f64; 2], f64)>,
    /// Smallest spectral gap seen on the grid.
    pub min_gap: f64,
    /// Grid resolution used.
    pub grid: usize,
}

/// Sewing matrix `w_{mn}(k) = ⟨u_m(−k), Θ u_n(k)⟩` at a single momentum,
/// from the solver's (deterministic) eigenframes at `±k`.
///
/// The matrix depends on the frame choice at `±k`; frame-independent are
/// its unitarity, the identity `w(−k) = −w(k)ᵀ` (for frames held fixed),
/// and its skew-symmetry at momenta with `−k ≡ k`.
pub fn sewing_matrix(model: &BlochModel, k: &[f64]) -> Result<CMat> {
    let theta = model.theta().ok_or_else(|| {
        Error::validation(format!(
            "model '{}' carries no time-reversal operator",
            model.name()
        ))
    })?;
    if k.len() != model.dim() {
        return Err(Error::validation(format!(
            "sewing matrix: momentum dimension {} does not match model dimension {}",
            k.len(),
            model.dim()
        )));
    }
    // Wrap both momenta to the canonical window [−π, π) so that `k` and
    // `−k` become bitwise identical at self-conjugate momenta — otherwise
    // float-level differences between H(k) and H(−k) let the solver rotate
    // degenerate Kramers frames independently on the two sides.
    let wrap = |x: f64| {
        (x + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI
    };
    let k: Vec<f64> = k.iter().map(|&x| wrap(x)).collect();
    let minus_k: Vec<f64> = k.iter().map(|&x| wrap(-x)).collect();
    let k = k.as_slice();
    let n_occ = model.n_occ();
    let frame = |kk: &[f64]| -> Result<CMat> {
        let eig = model.eig_at(kk)?;
        let gap = eig.values[n_occ] - eig.values[n_occ - 1];
        if gap <= 1e-12 {
            return Err(Error::GapClosure {
                context: format!("occupied/empty gap at k = {kk:?}"),
                gap,
            });
        }
        Ok(eig.vectors.columns(0, n_occ).into_owned())
    };
    let v_k = frame(k)?;
    let v_mk = frame(&minus_k)?;
    let w = v_mk.adjoint() * theta.unitary() * v_k.map(|x| x.conj());
    let residual = unitary_residual(&w);
    if residual > TOL_SEWING {
        return Err(Error::Structure {
            identity: "sewing matrix is unitary".into(),
            residual,
            tolerance: TOL_SEWING,
        });
    }
    Ok(w)
}

/// Number of fresh trial subspaces tried when the branch-continuity
/// certificate rejects a gauge.
const GAUGE_REDRAWS: u64 = 4;

/// The ℤ₂ sewing-matrix invariant.
///
/// Builds a globally smooth periodic gauge on the grid and certifies its
/// continuity: the phase increment of `det w` is unwrapped along every
/// grid edge (with midpoint bisection wherever a step is ambiguous), and
/// every grid plaquette must then carry zero net winding. A nonzero
/// winding means the trial subspace of the gauge degenerates somewhere
/// between the samples — the branch continuation would silently lose a
/// full turn there — so the gauge is redrawn from the seed stream.
/// Pfaffians at the four invariant momenta are combined with branch
/// phases obtained by summing the certified edge increments along axis
/// paths from the zone centre; the reported invariant never depends on
/// the draw.
pub fn kane_mele_invariant(model: &BlochModel, opts: &KmOptions) -> Result<KaneMeleResult> {
    if model.dim() != 2 {
        return Err(Error::validation(format!(
            "sewing-matrix invariant requires a 2d model, got dimension {}",
            model.dim()
        )));
    }
    if !model.n_occ().is_multiple_of(2) {
        return Err(Error::validation(format!(
            "sewing-matrix invariant requires an even number of occupied bands \
             (Kramers pairs), got {}",
            model.n_occ()
        )));
    }
    if model.theta().is_none() {
        return Err(Error::validation(format!(
            "model '{}' carries no time-reversal operator",
            model.name()
        )));
    }

    let base = opts.gauge_seed.unwrap_or(DEFAULT_GAUGE_SEED);
    let mut last_rejection = None;
    for attempt in 0..GAUGE_REDRAWS {
        let seed = base ^ attempt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
        let gauge = ProjectedGauge::build(model, opts.grid, opts.gap_tol, Some(seed))?;
        match invariant_in_gauge(model, &gauge) {
            Err(e @ Error::Resolution(_)) => last_rejection = Some(e),
            other => return other,
        }
    }
    Err(last_rejection.expect("at least one gauge attempt runs"))
}

/// Evaluate the invariant in one concrete gauge, failing with a resolution
/// error when the gauge does not pass the branch-continuity certificate.
fn invariant_in_gauge(model: &BlochModel, gauge: &ProjectedGauge) -> Result<KaneMeleResult> {
    let s = gauge.s;
    let theta = model.theta().expect("validated by the caller");
    let u = theta.unitary().clone();
    let w_at = |i: usize, j: usize| -> CMat {
        let neg = gauge.at(ProjectedGauge::neg(s, i), ProjectedGauge::neg(s, j));
        neg.adjoint() * &u * gauge.at(i, j).map(|x| x.conj())
    };

    // Grid indices of the invariant momenta, lexicographic in k-space
    // {0, π}²; momentum 0 sits at index s/2, momentum π at index 0.
    let half = s / 2;
    let trims_idx = [(half, half), (half, 0), (0, half), (0, 0)];
    let trims_k = TrimSet::new(2)?;

    // Pfaffians at the invariant momenta (on the skew-symmetrized part,
    // after validating skewness).
    let mut pfaffians = Vec::with_capacity(4);
    for &(i, j) in &trims_idx {
        let w = w_at(i, j);
        let skew_defect = frob(&(&w + w.transpose()));
        if skew_defect > TOL_SEWING {
            return Err(Error::Structure {
                identity: format!(
                    "sewing matrix skew-symmetric at invariant momentum (grid {i}, {j})"
                ),
                residual: skew_defect,
                tolerance: TOL_SEWING,
            });
        }
        let residual = unitary_residual(&w);
        if residual > TOL_SEWING {
            return Err(Error::Structure {
                identity: "sewing matrix unitary at invariant momentum".into(),
                residual,
                tolerance: TOL_SEWING,
            });
        }
        let skew = (&w - w.transpose()).scale(0.5);
        pfaffians.push(pfaffian(&skew)?);
    }

    // Unit-circle determinants of w on the full grid (row-major i·s + j).
    let mut dets = Vec::with_capacity(s * s);
    for i in 0..s {
        for j in 0..s {
            dets.push(det_on_circle(&w_at(i, j))?);
        }
    }
    let idx = |i: usize, j: usize| (i % s) * s + (j % s);
    // Momentum of grid index `i`, admitting `i = s` for wrap-around edges.
    let mom =
        |i: usize| -> f64 { -std::f64::consts::PI + std::f64::consts::TAU * i as f64 / s as f64 };

    // Certified phase increments of det w along all grid edges:
    // `right[idx(i, j)]` runs from (i, j) to (i+1, j), `up` along the other
    // axis. Ambiguous raw jumps are unwrapped by midpoint bisection;
    // `forced` re-examines an edge with mandatory bisection.
    let edge = |i: usize, j: usize, axis: usize, forced: bool| -> Result<f64> {
        let (i2, j2) = if axis == 0 { (i + 1, j) } else { (i, j + 1) };
        let da = dets[idx(i, j)];
        let db = dets[idx(i2, j2)];
        let raw = (db / da).arg();
        if !forced && raw.abs() <= std::f64::consts::FRAC_PI_2 {
            return Ok(raw);
        }
        let ka = [mom(i), mom(j)];
        let kb = [mom(i2), mom(j2)];
        unwrap_segment(model, gauge, &ka, da, &kb, db, 0)
    };
    let mut right = vec![0.0f64; s * s];
    let mut up = vec![0.0f64; s * s];
    for i in 0..s {
        for j in 0..s {
            right[idx(i, j)] = edge(i, j, 0, false)?;
            up[idx(i, j)] = edge(i, j, 1, false)?;
        }
    }

    // Every plaquette must carry zero net winding: det w then has a
    // continuous global logarithm, which is exactly the hypothesis under
    // which the four per-momentum signs combine to a gauge invariant. A
    // flagged plaquette is first re-examined with forced bisection on its
    // edges (a fast but smooth phase sweep is not a defect); a persistent
    // winding is a genuine degeneracy of the trial subspace between the
    // grid samples.
    let winding = |right: &[f64], up: &[f64], i: usize, j: usize| -> i64 {
        let total = right[idx(i, j)] + up[idx(i + 1, j)] - right[idx(i, j + 1)] - up[idx(i, j)];
        (total / std::f64::consts::TAU).round() as i64
    };
    for pass in 0..=1 {
        let mut flagged = Vec::new();
        for i in 0..s {
            for j in 0..s {
                if winding(&right, &up, i, j) != 0 {
                    flagged.push((i, j));
                }
            }
        }
        if flagged.is_empty() {
            break;
        }
        if pass == 1 {
            let (i, j) = flagged[0];
            return Err(Error::Resolution(format!(
                "the trial subspace of the projected gauge degenerates inside \
                 the grid cell at ({:.3}, {:.3}): det w winds by 2π around it \
                 (conditioning {:.3e})",
                mom(i),
                mom(j),
                gauge.min_singular,
            )));
        }
        for &(i, j) in &flagged {
            right[idx(i, j)] = edge(i, j, 0, true)?;
            right[idx(i, j + 1)] = edge(i, j + 1, 0, true)?;
            up[idx(i, j)] = edge(i, j, 1, true)?;
            up[idx(i + 1, j)] = edge(i + 1, j, 1, true)?;
        }
    }

    // Branch phases at the invariant momenta: anchor the square root at
    // the zone centre by √det[w(Γ)] := pf[w(Γ)], then sum the certified
    // edge increments along axis paths from the centre (the mesh is
    // curl-free, so any grid path gives the same phase).
    let phi_gamma = 2.0 * pfaffians[0].arg();
    let down_sum =
        |i: usize, j_hi: usize, j_lo: usize| -> f64 { (j_lo..j_hi).map(|j| up[idx(i, j)]).sum() };
    let left_sum = |j: usize, i_hi: usize, i_lo: usize| -> f64 {
        (i_lo..i_hi).map(|i| right[idx(i, j)]).sum()
    };
    let phi_0_pi = phi_gamma - down_sum(half, half, 0);
    let phi_pi_0 = phi_gamma - left_sum(half, half, 0);
    let phi_pi_pi = phi_pi_0 - down_sum(0, half, 0);
    let phases = [phi_gamma, phi_0_pi, phi_pi_0, phi_pi_pi];

    let sign_of = |pf: Complex64, phi: f64| -> Result<f64> {
        let delta = pf * Complex64::from_polar(1.0, -phi / 2.0) / pf.norm();
        if delta.im.abs() > TOL_TRIM_SIGN || (delta.re.abs() - 1.0).abs() > TOL_TRIM_SIGN {
            return Err(Error::Resolution(format!(
                "per-momentum sign {delta} is not ±1 within {TOL_TRIM_SIGN}; \
                 increase the grid resolution"
            )));
        }
        Ok(if delta.re > 0.0 { 1.0 } else { -1.0 })
    };

    let mut trim_signs = Vec::with_capacity(4);
    let mut nu = 1i32;
    for idx in 0..4 {
        let sign = sign_of(pfaffians[idx], phases[idx])?;
        nu *= sign as i32;
        let k = &trims_k.points()[idx];
        trim_signs.push(([k[0], k[1]], sign));
    }

    Ok(KaneMeleResult {
        nu,
        trim_signs,
        min_gap: gauge.min_gap,
        grid: s,
    })
}

/// A re-examined (forced) edge is bisected at least this many times, so a
/// full hidden winding cannot alias into a small principal jump.
const MIN_PHASE_BISECTIONS: usize = 2;
/// Bisection depth at which a still-ambiguous segment becomes an error.
const MAX_PHASE_BISECTIONS: usize = 8;

/// Unit-modulus determinant of a sewing matrix.
fn det_on_circle(w: &CMat) -> Result<Complex64> {
    let d = w.determinant();
    if (d.norm() - 1.0).abs() > TOL_SEWING {
        return Err(Error::Structure {
            identity: "sewing matrix determinant lies on the unit circle".into(),
            residual: (d.norm() - 1.0).abs(),
            tolerance: TOL_SEWING,
        });
    }
    Ok(d)
}

/// Unwrapped phase increment of `det w` from `ka` to `kb`, given the two
/// endpoint determinants, certified by midpoint bisection.
fn unwrap_segment(
    model: &BlochModel,
    gauge: &ProjectedGauge,
    ka: &[f64; 2],
    da: Complex64,
    kb: &[f64; 2],
    db: Complex64,
    depth: usize,
) -> Result<f64> {
    let raw = (db / da).arg();
    if depth >= MIN_PHASE_BISECTIONS && raw.abs() <= std::f64::consts::FRAC_PI_2 {
        return Ok(raw);
    }
    if depth >= MAX_PHASE_BISECTIONS {
        return Err(Error::Resolution(format!(
            "determinant phase jumps by {:.3} across a momentum segment of \
             {:.2e} rad even after {MAX_PHASE_BISECTIONS} bisections \
             (projected-gauge conditioning {:.3e}); use a finer grid",
            raw.abs(),
            (kb[0] - ka[0]).hypot(kb[1] - ka[1]),
            gauge.min_singular,
        )));
    }
    let k_mid = [0.5 * (ka[0] + kb[0]), 0.5 * (ka[1] + kb[1])];
    let d_mid = det_on_circle(&midpoint_sewing(model, gauge, &k_mid)?)?;
    Ok(
        unwrap_segment(model, gauge, ka, da, &k_mid, d_mid, depth + 1)?
            + unwrap_segment(model, gauge, &k_mid, d_mid, kb, db, depth + 1)?,
    )
}

/// Sewing matrix at an off-grid momentum, with both frames produced by the
/// gauge's pointwise projection formula.
fn midpoint_sewing(model: &BlochModel, gauge: &ProjectedGauge, k: &[f64; 2]) -> Result<CMat> {
    let theta = model.theta().expect("checked by caller");
    let minus_k = [-k[0], -k[1]];
    let v = gauge.frame_at(model, k)?;
    let v_neg = gauge.frame_at(model, &minus_k)?;
    Ok(v_neg.adjoint() * theta.unitary() * v.map(|x| x.conj()))
}
