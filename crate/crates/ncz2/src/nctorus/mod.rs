//! Exact symbolic algebra of the noncommutative 2-torus `𝕋²_θ`.
//!
//! Elements are finite Fourier sums Σ a_{mn} uᵐvⁿ over the generators with
//! `uv = e^{2πiθ}vu`, kept in a fixed normal order (u-powers left of
//! v-powers). On top of the exact coefficient algebra ([`NcElement`]) the
//! module provides:
//!
//! * the anti-linear involution Θ with `Θ(u) = v*`, `Θ(v) = −u*`, and the
//!   distinguished pair of Θ-fixed unitaries generating the fixed-point
//!   subalgebra ([`fixed_point_generators`]);
//! * concrete representations: the exact clock–shift pair for rational
//!   θ = p/q and a truncated ℓ²(ℤ²) realization ([`represent`]);
//! * the Powers–Rieffel projection of trace θ
//!   ([`powers_rieffel_projection`]), the standard K-theory generator used
//!   by the index pairings.
//!
//! Symbolic operations (products, star, Θ, derivations, trace) are exact up
//! to float phase arithmetic; for rational θ the phases are reduced mod 1
//! before exponentiation, so no accuracy is lost at high Fourier modes.

mod element;
mod projection;
mod represent;

pub use element::{commutator, NcElement};
pub use projection::{hofstadter_band_projection, powers_rieffel_projection, PrProfile};
pub use represent::{clock_shift_generators, represent, Representation};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// The rotation algebra `𝕋²_θ`: carries the deformation parameter and
/// constructs its elements.
///
/// θ may be an exact rational p/q (enabling the finite-dimensional
/// clock–shift representation) or any float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NcTorusAlgebra {
    theta: f64,
    rational: Option<(i64, u64)>,
}

impl NcTorusAlgebra {
    /// Algebra at a float deformation parameter.
    pub fn new(theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::validation(format!(
                "NcTorusAlgebra: theta must be finite, got {theta}"
            )));
        }
        Ok(Self {
            theta,
            rational: None,
        })
    }

    /// Algebra at the exact rational θ = p/q (reduced to lowest terms).
    pub fn rational(p: i64, q: i64) -> Result<Self> {
        if q <= 0 {
            return Err(Error::validation(format!(
                "NcTorusAlgebra: denominator must be positive, got {q}"
            )));
        }
        let g = gcd(p.unsigned_abs(), q as u64).max(1);
        let p = p / g as i64;
        let q = q as u64 / g;
        Ok(Self {
            theta: p as f64 / q as f64,
            rational: Some((p, q)),
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `Some((p, q))` when θ was given as an exact rational.
    pub fn rational_theta(&self) -> Option<(i64, u64)> {
        self.rational
    }

    /// The commutation phase λ = e^{2πiθ}.
    pub fn phase(&self) -> Complex64 {
        Complex64::from_polar(1.0, std::f64::consts::TAU * self.theta)
    }

    pub fn zero(&self) -> NcElement {
        NcElement::zero(self.theta)
    }

    pub fn one(&self) -> NcElement {
        NcElement::one(self.theta)
    }

    pub fn u(&self) -> NcElement {
        NcElement::u(self.theta)
    }

    pub fn v(&self) -> NcElement {
        NcElement::v(self.theta)
    }

    pub fn monomial(&self, m: i64, n: i64, coeff: Complex64) -> NcElement {
        NcElement::monomial(self.theta, m, n, coeff)
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// The distinguished Θ-fixed unitaries `x = e^{πiθ}·i·uv*` and
/// `y = e^{−πiθ}·i·vu*`.
///
/// They satisfy, exactly in the symbolic algebra: `xy = yx = −1`,
/// `x* = −y`, `xx* = x*x = 1`, and `Θ(x) = x`, `Θ(y) = y`; together they
/// generate the fixed-point subalgebra of Θ.
#[derive(Debug, Clone)]
pub struct FixedPointPair {
    pub x: NcElement,
    pub y: NcElement,
}

/// Construct the fixed-point generator pair for the given algebra.
pub fn fixed_point_generators(alg: &NcTorusAlgebra) -> FixedPointPair {
    let theta = alg.theta();
    let i = Complex64::new(0.0, 1.0);
    let half_phase = Complex64::from_polar(1.0, std::f64::consts::PI * theta);
    // x = e^{πiθ}·i·u·v*: already normal-ordered as u¹v^{−1}.
    let x = NcElement::monomial(theta, 1, -1, i * half_phase);
    // y = e^{−πiθ}·i·v·u*: normal order picks up vu^{−1} = e^{2πiθ}u^{−1}v.
    let y = NcElement::monomial(theta, -1, 1, i * half_phase);
    FixedPointPair { x, y }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const ONE_C: Complex64 = Complex64::new(1.0, 0.0);

    fn close(a: &NcElement, b: &NcElement, tol: f64) -> bool {
        (a - b).norm_l1() <= tol
    }

    fn random_element(theta: f64, nterms: usize, rng: &mut impl Rng) -> NcElement {
        NcElement::from_terms(
            theta,
            (0..nterms).map(|_| {
                (
                    (rng.random_range(-4..=4), rng.random_range(-4..=4)),
                    Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5),
                )
            }),
        )
    }

    #[test]
    fn commutation_relation_uv() {
        // uv = e^{2πiθ} vu for several θ.
        for theta in [1.0 / 3.0, 2.0 / 5.0, 1.0 / std::f64::consts::SQRT_2] {
            let alg = NcTorusAlgebra::new(theta).unwrap();
            let (u, v) = (alg.u(), alg.v());
            let lhs = &u * &v;
            let rhs = (&v * &u).scale(alg.phase());
            assert!(close(&lhs, &rhs, 1e-14), "theta={theta}");
        }
    }

    #[test]
    fn unit_and_cancellation() {
        let alg = NcTorusAlgebra::rational(1, 3).unwrap();
        let a = NcElement::from_terms(
            alg.theta(),
            [((2, -1), Complex64::new(0.3, 0.1)), ((0, 4), ONE_C)],
        );
        assert!(close(&(&alg.one() * &a), &a, 1e-15));
        // (uv*)(vu*) = 1: the reordering phases cancel exactly.
        let uvs = &alg.u() * &alg.v().star();
        let vus = &alg.v() * &alg.u().star();
        assert!(close(&(&uvs * &vus), &alg.one(), 1e-14));
    }

    #[test]
    fn star_is_an_antilinear_antihomomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let theta = 2.0 / 5.0;
        for _ in 0..10 {
            let a = random_element(theta, 6, &mut rng);
            let b = random_element(theta, 6, &mut rng);
            // (ab)* = b*a*.
            assert!(close(&(&a * &b).star(), &(&b.star() * &a.star()), 1e-13));
            // a** = a.
            assert!(close(&a.star().star(), &a, 1e-13));
            // (λa)* = conj(λ)a*.
            let lam = Complex64::new(0.7, -1.3);
            assert!(close(
                &a.scale(lam).star(),
                &a.star().scale(lam.conj()),
                1e-13
            ));
        }
        // u* is the monomial u^{-1}.
        let us = NcElement::u(theta).star();
        assert_eq!(us.support_len(), 1);
        assert!((us.coeff(-1, 0) - ONE_C).norm() < 1e-15);
        // (uv)* = v*u* = e^{−2πiθ} u*v* in normal order: adjointing
        // uv = λvu gives v*u* = conj(λ)·u*v*.
        let alg = NcTorusAlgebra::new(theta).unwrap();
        let lhs = (&alg.u() * &alg.v()).star();
        let rhs = (&alg.u().star() * &alg.v().star()).scale(alg.phase().conj());
        assert!(close(&lhs, &rhs, 1e-14));
    }

    #[test]
    fn multiplication_is_associative() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for theta in [1.0 / 3.0, 1.0 / std::f64::consts::SQRT_2] {
            for _ in 0..8 {
                let a = random_element(theta, 5, &mut rng);
                let b = random_element(theta, 5, &mut rng);
                let c = random_element(theta, 5, &mut rng);
                let left = &(&a * &b) * &c;
                let right = &a * &(&b * &c);
                let scale = left.norm_l1().max(1.0);
                assert!((&left - &right).norm_l1() <= 1e-13 * scale);
            }
        }
    }

    #[test]
    fn trace_is_tracial_and_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let theta = 1.0 / 3.0;
        assert_eq!(NcElement::one(theta).trace(), ONE_C);
        assert_eq!(NcElement::u(theta).trace(), Complex64::ZERO);
        for _ in 0..10 {
            let a = random_element(theta, 6, &mut rng);
            let b = random_element(theta, 6, &mut rng);
            let tab = (&a * &b).trace();
            let tba = (&b * &a).trace();
            assert!((tab - tba).norm() < 1e-14);
            let pos = (&a.star() * &a).trace();
            assert!(pos.im.abs() < 1e-14);
            assert!(pos.re >= 0.0);
        }
    }

    #[test]
    fn derivations_satisfy_leibniz_and_kill_the_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let theta = 2.0 / 5.0;
        let u = NcElement::u(theta);
        let d1u = u.derivation(1).unwrap();
        assert!(close(
            &d1u,
            &u.scale(Complex64::new(0.0, std::f64::consts::TAU)),
            1e-15
        ));
        assert!(u.derivation(2).unwrap().is_zero());
        for j in [1, 2] {
            for _ in 0..6 {
                let a = random_element(theta, 5, &mut rng);
                let b = random_element(theta, 5, &mut rng);
                let lhs = (&a * &b).derivation(j).unwrap();
                let rhs = &(&a.derivation(j).unwrap() * &b) + &(&a * &b.derivation(j).unwrap());
                assert!(close(&lhs, &rhs, 1e-12));
                assert_eq!(a.derivation(j).unwrap().trace(), Complex64::ZERO);
            }
        }
        assert!(NcElement::u(theta).derivation(3).is_err());
    }

    #[test]
    fn theta_action_on_generators() {
        let theta = 1.0 / 3.0;
        let alg = NcTorusAlgebra::rational(1, 3).unwrap();
        let (u, v) = (alg.u(), alg.v());
        // Θ(u) = v*, Θ(v) = −u*, Θ(u*) = v, Θ(v*) = −u.
        assert!(close(&u.theta_action(), &v.star(), 1e-15));
        assert!(close(&v.theta_action(), &-&u.star(), 1e-15));
        assert!(close(&u.star().theta_action(), &v, 1e-15));
        assert!(close(&v.star().theta_action(), &-&u, 1e-15));
        // Θ²(u) = −u; generally Θ² = (−1)^{m+n} on monomials.
        assert!(close(&u.theta_action().theta_action(), &-&u, 1e-15));
        let mono = NcElement::monomial(theta, 3, 2, Complex64::new(0.4, 0.9));
        assert!(close(&mono.theta_action().theta_action(), &-&mono, 1e-13));
        let even = NcElement::monomial(theta, 1, 1, Complex64::new(0.4, 0.9));
        assert!(close(&even.theta_action().theta_action(), &even, 1e-13));
    }

    #[test]
    fn theta_action_is_multiplicative_and_antilinear() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for theta in [1.0 / 3.0, 2.0 / 5.0, 1.0 / std::f64::consts::SQRT_2] {
            let alg = NcTorusAlgebra::new(theta).unwrap();
            // Θ preserves the commutation relation.
            let uv = &alg.u() * &alg.v();
            let sep = &alg.u().theta_action() * &alg.v().theta_action();
            assert!(close(&uv.theta_action(), &sep, 1e-14));
            for _ in 0..6 {
                let a = random_element(theta, 5, &mut rng);
                let b = random_element(theta, 5, &mut rng);
                let lhs = (&a * &b).theta_action();
                let rhs = &a.theta_action() * &b.theta_action();
                assert!(close(&lhs, &rhs, 1e-12));
                let lam = Complex64::new(-0.2, 1.1);
                assert!(close(
                    &a.scale(lam).theta_action(),
                    &a.theta_action().scale(lam.conj()),
                    1e-12
                ));
            }
        }
    }

    #[test]
    fn fixed_point_pair_relations() {
        for theta in [1.0 / 3.0, 2.0 / 5.0, 1.0 / std::f64::consts::SQRT_2] {
            let alg = NcTorusAlgebra::new(theta).unwrap();
            let FixedPointPair { x, y } = fixed_point_generators(&alg);
            let one = alg.one();
            let minus_one = -&one;
            // xy = yx = −1.
            assert!(close(&(&x * &y), &minus_one, 1e-14), "theta={theta}");
            assert!(close(&(&y * &x), &minus_one, 1e-14));
            // x* = −y and unitarity.
            assert!(close(&x.star(), &-&y, 1e-14));
            assert!(close(&(&x * &x.star()), &one, 1e-14));
            assert!(close(&(&x.star() * &x), &one, 1e-14));
            assert!(x.unitary_defect() < 1e-14);
            // Θ fixes both generators.
            assert!(close(&x.theta_action(), &x, 1e-14));
            assert!(close(&y.theta_action(), &y, 1e-14));
        }
    }

    #[test]
    fn wire_format_round_trips() {
        let alg = NcTorusAlgebra::rational(2, 5).unwrap();
        let a = NcElement::from_terms(
            alg.theta(),
            [
                ((-1, 3), Complex64::new(0.25, -1.5)),
                ((2, 0), Complex64::new(-3.0, 0.0)),
            ],
        );
        let json = serde_json::to_string(&a).unwrap();
        assert!(json.starts_with("{\"theta\":"));
        assert!(json.contains("\"coeffs\":[[-1,3,0.25,-1.5],[2,0,-3.0,0.0]]"));
        let back: NcElement = serde_json::from_str(&json).unwrap();
        assert_eq!(a, back);
    }

    #[test]
    fn rational_constructor_reduces() {
        let alg = NcTorusAlgebra::rational(2, 6).unwrap();
        assert_eq!(alg.rational_theta(), Some((1, 3)));
        assert!(NcTorusAlgebra::rational(1, 0).is_err());
        assert!(NcTorusAlgebra::new(f64::NAN).is_err());
    }
}
