//! Registry of canonical Bloch models.
//!
//! All 4-band models use the basis ordering `(A↑, B↑, A↓, B↓)` — spin is
//! the outer (slow) index, orbital/sublattice the inner one — so matrices
//! are assembled as `spin ⊗ orbital` Kronecker products and time reversal
//! acts as `(iσ₂ ⊗ 1) ∘ conj`.
//!
//! Momenta are reduced coordinates on `[−π, π)^d`: `κ_j = k · a_j` for the
//! lattice vectors `a_j`, so every model is exactly 2π-periodic in each
//! component.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::BlochModel;
use crate::error::{Error, Result};
use crate::kqcycle::TimeReversalOp;
use crate::linalg::{c, cr, kron, CMat, I};

fn pauli(i: usize) -> CMat {
    match i {
        0 => CMat::identity(2, 2),
        1 => CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]),
        2 => CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]),
        3 => CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]),
        _ => unreachable!("pauli index"),
    }
}

/// Honeycomb lattice with intrinsic spin–orbit coupling, staggered
/// sublattice potential, and in-plane inversion-breaking (Rashba) coupling.
///
/// * `t` — nearest-neighbour hopping,
/// * `lambda_so` — intrinsic spin–orbit strength (second neighbour),
/// * `lambda_v` — staggered sublattice potential,
/// * `lambda_r` — Rashba coupling on nearest-neighbour bonds.
///
/// Half filling (`n_occ = 2`). At `lambda_r = 0` the bulk gap closes on the
/// line `lambda_v = 3√3·lambda_so`, separating the ν = −1 phase
/// (`lambda_v` below) from the trivial one.
pub fn kane_mele(t: f64, lambda_so: f64, lambda_v: f64, lambda_r: f64) -> BlochModel {
    // Unit vectors of the three nearest-neighbour bonds (A → B) in the
    // plane, paired with their reduced-coordinate hopping phases.
    const BOND_DIRS: [[f64; 2]; 3] = [
        [0.866_025_403_784_438_6, 0.5],
        [-0.866_025_403_784_438_6, 0.5],
        [0.0, -1.0],
    ];
    let theta = TimeReversalOp::spin_half(2);
    let h = move |k: &[f64]| {
        let (k1, k2) = (k[0], k[1]);
        // Nearest-neighbour: I_spin ⊗ [[0, f], [f*, 0]].
        let f =
            c(t, 0.0) * (Complex64::from_polar(1.0, -k1) + Complex64::from_polar(1.0, -k2) + 1.0);
        let nn = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), f, f.conj(), c(0.0, 0.0)]);
        let mut h = kron(&pauli(0), &nn);
        // Second-neighbour spin–orbit: opposite sign on the two sublattices
        // and the two spin species.
        let so = 2.0 * lambda_so * (k1.sin() - k2.sin() - (k1 - k2).sin());
        h += kron(&pauli(3), &pauli(3)).scale(so);
        // Staggered potential.
        h += kron(&pauli(0), &pauli(3)).scale(lambda_v);
        // Rashba: iλ_R (s₁ d_y − s₂ d_x) per bond, on the A→B block.
        if lambda_r != 0.0 {
            let ab =
                CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
            let phases = [
                Complex64::new(1.0, 0.0),
                Complex64::from_polar(1.0, -k1),
                Complex64::from_polar(1.0, -k2),
            ];
            let mut rashba = CMat::zeros(4, 4);
            for (dir, phase) in BOND_DIRS.iter().zip(phases) {
                let spin = (pauli(1).scale(dir[1]) - pauli(2).scale(dir[0])) * (I * lambda_r);
                rashba += kron(&spin, &ab).map(|x| x * phase);
            }
            let rashba_adj = rashba.adjoint();
            h += rashba;
            h += rashba_adj;
        }
        h
    };
    BlochModel::new("kane-mele", 2, 4, 2, Some(theta), h).expect("static shape")
}

/// Quantum-well two-orbital model: `H = diag(h(k), h(−k)*)` with
/// `h(k) = A sin k₁ σ₁ + A sin k₂ σ₂ + M(k) σ₃`,
/// `M(k) = m − 2b(2 − cos k₁ − cos k₂)`.
///
/// Half filling (`n_occ = 2`); ν = −1 for `0 < m/b < 8`.
pub fn bhz(a: f64, b: f64, m: f64) -> BlochModel {
    let theta = TimeReversalOp::spin_half(2);
    let block = move |k1: f64, k2: f64| -> CMat {
        let mass = m - 2.0 * b * (2.0 - k1.cos() - k2.cos());
        pauli(1).scale(a * k1.sin()) + pauli(2).scale(a * k2.sin()) + pauli(3).scale(mass)
    };
    let h = move |k: &[f64]| {
        let up = block(k[0], k[1]);
        let down = block(-k[0], -k[1]).map(|x| x.conj());
        let mut h = CMat::zeros(4, 4);
        h.view_mut((0, 0), (2, 2)).copy_from(&up);
        h.view_mut((2, 2), (2, 2)).copy_from(&down);
        h
    };
    BlochModel::new("bhz", 2, 4, 2, Some(theta), h).expect("static shape")
}

/// Square lattice with rational magnetic flux `p/q` per plaquette, in the
/// `q`-site magnetic unit cell. The Bloch phase of the first momentum sits
/// on the cell-boundary bond, which keeps `H(k)` exactly 2π-periodic in
/// both components. No time-reversal operator; `n_occ = 1` (lowest
/// magnetic subband).
///
/// The flux orientation is fixed so the lowest subband at flux `1/3`
/// carries Chern number +1.
pub fn hofstadter(p: i64, q: u32) -> Result<BlochModel> {
    if q < 2 {
        return Err(Error::validation(format!(
            "flux lattice: denominator q must be ≥ 2, got {q}"
        )));
    }
    if p.rem_euclid(q as i64) == 0 {
        return Err(Error::validation(
            "flux lattice: flux p/q must not be an integer (zero net flux per cell)",
        ));
    }
    let qi = q as usize;
    let flux = p as f64 / q as f64;
    let h = move |k: &[f64]| {
        let (k1, k2) = (k[0], k[1]);
        let mut h = CMat::zeros(qi, qi);
        for j in 0..qi {
            h[(j, j)] = cr(2.0 * (k2 - std::f64::consts::TAU * flux * j as f64).cos());
            let jn = (j + 1) % qi;
            let hop = if jn == 0 {
                Complex64::from_polar(1.0, -k1)
            } else {
                Complex64::new(1.0, 0.0)
            };
            h[(jn, j)] += hop;
            h[(j, jn)] += hop.conj();
        }
        h
    };
    BlochModel::new(format!("hofstadter {p}/{q}"), 2, qi, 1, None, h)
}

/// Dispersionless atomic limit: `H(k) = m·(1 ⊗ σ₃)`, four bands, half
/// filling, time-reversal symmetric. Trivially ν = +1.
pub fn atomic_insulator(m: f64) -> Result<BlochModel> {
    if m == 0.0 {
        return Err(Error::validation("atomic insulator: mass must be nonzero"));
    }
    let theta = TimeReversalOp::spin_half(2);
    let h = move |_: &[f64]| kron(&pauli(0), &pauli(3)).scale(m);
    BlochModel::new("atomic", 2, 4, 2, Some(theta), h)
}

/// Flat two-band model `H(k) = σ₃` with one occupied band; Chern number 0.
pub fn flat_trivial() -> BlochModel {
    BlochModel::new("flat-trivial", 2, 2, 1, None, |_: &[f64]| pauli(3)).expect("static shape")
}

/// Descriptor for a registry entry: parameter names with their defaults.
#[derive(Debug, Clone)]
pub struct ModelDescriptor {
    pub name: &'static str,
    pub summary: &'static str,
    pub params: &'static [(&'static str, f64)],
}

/// All registry entries.
pub fn registry() -> Vec<ModelDescriptor> {
    vec![
        ModelDescriptor {
            name: "kane-mele",
            summary: "honeycomb lattice with spin-orbit, staggered, and Rashba couplings (4 bands, half filling)",
            params: &[("t", 1.0), ("lambda_so", 0.06), ("lambda_v", 0.1), ("lambda_r", 0.05)],
        },
        ModelDescriptor {
            name: "bhz",
            summary: "two-orbital quantum-well model diag(h(k), h(-k)*) (4 bands, half filling)",
            params: &[("a", 1.0), ("b", 1.0), ("m", 1.0)],
        },
        ModelDescriptor {
            name: "hofstadter",
            summary: "square lattice at rational magnetic flux p/q (q bands, lowest occupied)",
            params: &[("p", 1.0), ("q", 3.0)],
        },
        ModelDescriptor {
            name: "atomic",
            summary: "dispersionless time-reversal-symmetric atomic limit (4 bands, half filling)",
            params: &[("m", 1.0)],
        },
        ModelDescriptor {
            name: "flat-trivial",
            summary: "constant two-band model with one occupied band",
            params: &[],
        },
    ]
}

/// Construct a registry model by name, applying parameter overrides on top
/// of the descriptor defaults. Unknown model names and unknown parameter
/// keys are validation errors.
pub fn from_registry(name: &str, overrides: &BTreeMap<String, f64>) -> Result<BlochModel> {
    let descriptor = registry()
        .into_iter()
        .find(|d| d.name == name)
        .ok_or_else(|| {
            let known: Vec<_> = registry().iter().map(|d| d.name).collect();
            Error::validation(format!(
                "unknown model '{name}'; registry contains {known:?}"
            ))
        })?;
    let mut params: BTreeMap<&str, f64> = descriptor.params.iter().map(|&(k, v)| (k, v)).collect();
    for (key, value) in overrides {
        let slot = params.get_mut(key.as_str()).ok_or_else(|| {
            Error::validation(format!(
                "model '{name}' has no parameter '{key}'; expected one of {:?}",
                descriptor.params.iter().map(|p| p.0).collect::<Vec<_>>()
            ))
        })?;
        *slot = *value;
    }
    match name {
        "kane-mele" => Ok(kane_mele(
            params["t"],
            params["lambda_so"],
            params["lambda_v"],
            params["lambda_r"],
        )),
        "bhz" => Ok(bhz(params["a"], params["b"], params["m"])),
        "hofstadter" => {
            let p = params["p"];
            let q = params["q"];
            if p.fract() != 0.0 || q.fract() != 0.0 || q < 2.0 {
                return Err(Error::validation(format!(
                    "flux lattice: p and q must be integers with q ≥ 2, got p = {p}, q = {q}"
                )));
            }
            hofstadter(p as i64, q as u32)
        }
        "atomic" => atomic_insulator(params["m"]),
        "flat-trivial" => Ok(flat_trivial()),
        _ => unreachable!("descriptor matched above"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{check_hermitian, frob};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_k(rng: &mut impl Rng) -> [f64; 2] {
        [
            rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
            rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
        ]
    }

    #[test]
    fn models_are_hermitian_and_time_reversal_covariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let models = [
            kane_mele(1.0, 0.06, 0.1, 0.05),
            kane_mele(1.0, 0.3, 1.2, 0.4),
            bhz(1.0, 1.0, 1.0),
            atomic_insulator(0.7).unwrap(),
        ];
        for model in &models {
            for _ in 0..12 {
                let k = random_k(&mut rng);
                let h = model.hamiltonian(&k);
                check_hermitian(&h, model.name()).unwrap();
                let scale = frob(&h).max(1.0);
                assert!(
                    model.trs_residual(&k).unwrap() <= super::super::TOL_TRS * scale,
                    "{} breaks time-reversal covariance at k = {k:?}",
                    model.name()
                );
            }
        }
    }

    #[test]
    fn flux_lattice_is_hermitian_and_periodic() {
        let model = hofstadter(1, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..8 {
            let k = random_k(&mut rng);
            check_hermitian(&model.hamiltonian(&k), "flux lattice").unwrap();
            let shifted = [k[0] + std::f64::consts::TAU, k[1]];
            assert!(frob(&(model.hamiltonian(&k) - model.hamiltonian(&shifted))) < 1e-12);
            let shifted = [k[0], k[1] + std::f64::consts::TAU];
            assert!(frob(&(model.hamiltonian(&k) - model.hamiltonian(&shifted))) < 1e-12);
        }
    }

    #[test]
    fn honeycomb_gap_closes_on_the_critical_line() {
        // At lambda_r = 0 the staggered and spin-orbit couplings compete;
        // the bulk gap closes exactly at lambda_v = 3√3·lambda_so.
        let lso = 0.06;
        let critical = 3.0 * 3.0_f64.sqrt() * lso;
        let dirac = [-std::f64::consts::TAU / 3.0, std::f64::consts::TAU / 3.0];
        let at = |lv: f64| kane_mele(1.0, lso, lv, 0.0).gap_at(&dirac).unwrap();
        assert!(
            at(critical).abs() < 1e-12,
            "gap {} at critical",
            at(critical)
        );
        assert!(at(0.9 * critical) > 0.05 * critical);
        assert!(at(1.1 * critical) > 0.05 * critical);
    }

    #[test]
    fn registry_round_trip_and_validation() {
        let mut overrides = BTreeMap::new();
        overrides.insert("lambda_v".to_string(), 0.4);
        let model = from_registry("kane-mele", &overrides).unwrap();
        assert_eq!(model.bands(), 4);
        // Unknown model and unknown key both fail fast.
        assert!(from_registry("nonsense", &BTreeMap::new()).is_err());
        let mut bad = BTreeMap::new();
        bad.insert("zeta".to_string(), 1.0);
        assert!(from_registry("kane-mele", &bad).is_err());
        // Non-integer flux denominators are rejected.
        let mut frac = BTreeMap::new();
        frac.insert("q".to_string(), 2.5);
        assert!(from_registry("hofstadter", &frac).is_err());
        assert_eq!(registry().len(), 5);
    }
}
