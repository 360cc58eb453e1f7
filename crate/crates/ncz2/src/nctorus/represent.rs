//! Concrete matrix representations of noncommutative-torus elements: the
//! exact clock–shift pair for rational θ = p/q and a truncated ℓ²(ℤ²)
//! realization for arbitrary θ.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMat;

use super::NcElement;

/// Which representation to realize an element in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    /// The q-dimensional clock–shift representation, exact for rational
    /// θ = p/q: `U = diag(ω^j)`, `V` the cyclic shift, `UV = ω VU` with
    /// `ω = e^{2πip/q}`. Phases are reduced mod q before exponentiation, so
    /// they are exact roots of unity.
    ClockShift { q: u64 },
    /// Compression to the modes `|m|, |n| ≤ cutoff` of the ℓ²(ℤ²)
    /// realization `uξ(n,m) = e^{πimθ} ξ(n−1,m)`,
    /// `vξ(n,m) = e^{−πinθ} ξ(n,m−1)`.
    ///
    /// The commutation relation `UV = e^{2πiθ}VU` holds exactly even after
    /// truncation (both orders drop the same escaping modes); what the
    /// truncation does break is multiplicativity on the boundary shell,
    /// e.g. `π(u*)π(u)` differs from `π(u*u) = 1` exactly on the modes with
    /// `m = cutoff`. The defect is confined to that shell, a fraction
    /// `O(1/cutoff)` of the space.
    L2Truncation { cutoff: i64 },
}

/// The clock–shift generator pair `(U, V)` on ℂ^q at θ = p/q.
pub fn clock_shift_generators(p: i64, q: u64) -> Result<(CMat, CMat)> {
    if q == 0 {
        return Err(Error::validation(
            "clock_shift_generators: q must be positive",
        ));
    }
    let q_us = q as usize;
    let mut u = CMat::zeros(q_us, q_us);
    let mut v = CMat::zeros(q_us, q_us);
    for j in 0..q_us {
        u[(j, j)] = root_of_unity(p * j as i64, q);
        v[((j + 1) % q_us, j)] = Complex64::new(1.0, 0.0);
    }
    Ok((u, v))
}

/// `e^{2πi·k/q}` with the exponent reduced mod q first (exact phases).
fn root_of_unity(k: i64, q: u64) -> Complex64 {
    let r = k.rem_euclid(q as i64) as f64;
    Complex64::from_polar(1.0, std::f64::consts::TAU * r / q as f64)
}

/// Realize an element as a dense matrix in the chosen representation.
///
/// Clock–shift mode requires θ to be (numerically) rational with the given
/// denominator; the representation is then a *-homomorphism exactly, so
/// products, adjoints, and spectra of symbolic elements can be cross-checked
/// against their matrix images.
pub fn represent(a: &NcElement, rep: &Representation) -> Result<CMat> {
    match *rep {
        Representation::ClockShift { q } => represent_clock_shift(a, q),
        Representation::L2Truncation { cutoff } => represent_l2(a, cutoff),
    }
}

fn represent_clock_shift(a: &NcElement, q: u64) -> Result<CMat> {
    if q == 0 {
        return Err(Error::validation("represent: clock-shift needs q ≥ 1"));
    }
    let theta = a.theta();
    let p = (theta * q as f64).round() as i64;
    if (theta - p as f64 / q as f64).abs() > 1e-9 {
        return Err(Error::validation(format!(
            "represent: clock-shift requires rational θ = p/{q}, got θ = {theta}"
        )));
    }
    let q_us = q as usize;
    let mut out = CMat::zeros(q_us, q_us);
    // π(uᵐvⁿ) = Uᵐ Vⁿ sends e_k ↦ ω^{m·((k+n) mod q)} e_{(k+n) mod q}.
    for ((m, n), coeff) in a.terms() {
        for k in 0..q_us {
            let j = (k as i64 + n).rem_euclid(q as i64) as usize;
            out[(j, k)] += coeff * root_of_unity(p * m * j as i64, q);
        }
    }
    Ok(out)
}

fn represent_l2(a: &NcElement, cutoff: i64) -> Result<CMat> {
    if cutoff < 0 {
        return Err(Error::validation("represent: cutoff must be nonnegative"));
    }
    let side = (2 * cutoff + 1) as usize;
    let dim = side * side;
    let theta = a.theta();
    let idx = |m: i64, n: i64| ((m + cutoff) as usize) * side + (n + cutoff) as usize;
    let mut out = CMat::zeros(dim, dim);
    // π(uᵐvⁿ) e_{a,b} = e^{iπθ(m(b+n) − an)} e_{a+m, b+n}, modes leaving the
    // box dropped.
    for ((m, n), coeff) in a.terms() {
        for src_a in -cutoff..=cutoff {
            let tgt_a = src_a + m;
            if tgt_a.abs() > cutoff {
                continue;
            }
            for src_b in -cutoff..=cutoff {
                let tgt_b = src_b + n;
                if tgt_b.abs() > cutoff {
                    continue;
                }
                let arg = std::f64::consts::PI * theta * ((m * tgt_b) as f64 - (src_a * n) as f64);
                out[(idx(tgt_a, tgt_b), idx(src_a, src_b))] +=
                    coeff * Complex64::from_polar(1.0, arg);
            }
        }
    }
    Ok(out)
}
