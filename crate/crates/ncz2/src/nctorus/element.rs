//! Finitely supported elements Σ a_{mn} uᵐvⁿ of the rotation algebra, stored
//! as exact Fourier-coefficient maps in the global normal order (u-powers to
//! the left of v-powers).

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::c;

/// Tolerance on the deformation parameter when combining two elements: they
/// must come from the same algebra.
const THETA_MATCH_TOL: f64 = 1e-15;

/// An element of the noncommutative 2-torus algebra with finite support,
/// Σ_{(m,n)} a_{mn} uᵐvⁿ, where `uv = e^{2πiθ}vu`.
///
/// The coefficient map is kept in normal order: every monomial has all
/// u-powers to the left of all v-powers, and products reorder through the
/// phase `vⁿ u^{m'} = e^{−2πiθ·n·m'} u^{m'} vⁿ`. Coefficients that are
/// exactly zero are pruned. Values are immutable; all operations return new
/// elements.
#[derive(Debug, Clone, PartialEq)]
pub struct NcElement {
    theta: f64,
    coeffs: BTreeMap<(i64, i64), Complex64>,
}

impl NcElement {
    /// The zero element.
    pub fn zero(theta: f64) -> Self {
        Self {
            theta,
            coeffs: BTreeMap::new(),
        }
    }

    /// The unit.
    pub fn one(theta: f64) -> Self {
        Self::monomial(theta, 0, 0, Complex64::new(1.0, 0.0))
    }

    /// The generator `u`.
    pub fn u(theta: f64) -> Self {
        Self::monomial(theta, 1, 0, Complex64::new(1.0, 0.0))
    }

    /// The generator `v`.
    pub fn v(theta: f64) -> Self {
        Self::monomial(theta, 0, 1, Complex64::new(1.0, 0.0))
    }

    /// A single monomial `coeff · uᵐvⁿ`.
    pub fn monomial(theta: f64, m: i64, n: i64, coeff: Complex64) -> Self {
        let mut coeffs = BTreeMap::new();
        if coeff != Complex64::ZERO {
            coeffs.insert((m, n), coeff);
        }
        Self { theta, coeffs }
    }

    /// Build from `((m, n), coefficient)` terms; repeated exponents add.
    pub fn from_terms(
        theta: f64,
        terms: impl IntoIterator<Item = ((i64, i64), Complex64)>,
    ) -> Self {
        let mut out = Self::zero(theta);
        for ((m, n), coeff) in terms {
            out.add_term(m, n, coeff);
        }
        out
    }

    /// The deformation parameter θ of the algebra this element lives in.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Coefficient of `uᵐvⁿ` (zero if absent).
    pub fn coeff(&self, m: i64, n: i64) -> Complex64 {
        self.coeffs.get(&(m, n)).copied().unwrap_or(Complex64::ZERO)
    }

    /// Iterate over the support in lexicographic `(m, n)` order.
    pub fn terms(&self) -> impl Iterator<Item = ((i64, i64), Complex64)> + '_ {
        self.coeffs.iter().map(|(&k, &v)| (k, v))
    }

    /// Number of monomials in the support.
    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Max-norm bandwidth of the support: `max |m|, |n|`.
    pub fn bandwidth(&self) -> i64 {
        self.coeffs
            .keys()
            .map(|&(m, n)| m.abs().max(n.abs()))
            .max()
            .unwrap_or(0)
    }

    /// ℓ¹ norm of the coefficients; dominates the operator norm in any
    /// *-representation.
    pub fn norm_l1(&self) -> f64 {
        self.coeffs.values().map(|z| z.norm()).sum()
    }

    /// Drop every coefficient with `|a_{mn}| ≤ tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        Self {
            theta: self.theta,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(_, z)| z.norm() > tol)
                .map(|(&k, &z)| (k, z))
                .collect(),
        }
    }

    /// Scalar multiple.
    pub fn scale(&self, factor: Complex64) -> Self {
        if factor == Complex64::ZERO {
            return Self::zero(self.theta);
        }
        Self {
            theta: self.theta,
            coeffs: self.coeffs.iter().map(|(&k, &z)| (k, z * factor)).collect(),
        }
    }

    /// The *-operation: `(a_{mn} uᵐvⁿ)* = conj(a_{mn}) e^{−2πiθmn} u^{−m}v^{−n}`
    /// (the phase restores normal order in `v^{−n}u^{−m}`).
    pub fn star(&self) -> Self {
        let mut out = Self::zero(self.theta);
        for (&(m, n), &coeff) in &self.coeffs {
            let phase = self.reorder_phase(-n, -m);
            out.add_term(-m, -n, coeff.conj() * phase);
        }
        out
    }

    /// The canonical trace: the coefficient of the identity monomial.
    ///
    /// Tracial (`trace(ab) = trace(ba)`) and positive
    /// (`trace(a*a) = Σ|a_{mn}|² ≥ 0`).
    pub fn trace(&self) -> Complex64 {
        self.coeff(0, 0)
    }

    /// The derivation δⱼ, `j ∈ {1, 2}`: `δ₁(uᵐvⁿ) = 2πi·m·uᵐvⁿ` and
    /// `δ₂(uᵐvⁿ) = 2πi·n·uᵐvⁿ`. Satisfies the Leibniz rule exactly and
    /// kills the trace.
    pub fn derivation(&self, j: usize) -> Result<Self> {
        if j != 1 && j != 2 {
            return Err(Error::validation(format!(
                "derivation: direction must be 1 or 2, got {j}"
            )));
        }
        let two_pi_i = c(0.0, std::f64::consts::TAU);
        let mut out = Self::zero(self.theta);
        for (&(m, n), &coeff) in &self.coeffs {
            let k = if j == 1 { m } else { n };
            if k != 0 {
                out.add_term(m, n, coeff * two_pi_i * k as f64);
            }
        }
        Ok(out)
    }

    /// The anti-linear, multiplicative involution generated by
    /// `Θ(u) = v*, Θ(v) = −u*`.
    ///
    /// On a normal-ordered monomial:
    /// `Θ(a uᵐvⁿ) = conj(a)·(−1)ⁿ·e^{−2πiθmn}·u^{−n}v^{−m}`.
    /// It satisfies `Θ²(uᵐvⁿ) = (−1)^{m+n} uᵐvⁿ`, so Θ² = 1 on even total
    /// degree and −1 on odd — a quaternionic structure on the odd sector.
    pub fn theta_action(&self) -> Self {
        let mut out = Self::zero(self.theta);
        for (&(m, n), &coeff) in &self.coeffs {
            let sign = if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let phase = self.reorder_phase(m, n);
            out.add_term(-n, -m, coeff.conj() * phase * sign);
        }
        out
    }

    /// Integer power (repeated multiplication; `a⁰ = 1`).
    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one(self.theta);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// ‖a² − a‖₁, the ℓ¹ defect from being an idempotent.
    pub fn projection_defect(&self) -> f64 {
        (&(self * self) - self).norm_l1()
    }

    /// ‖a − a*‖₁.
    pub fn self_adjoint_defect(&self) -> f64 {
        (&self.star() - self).norm_l1()
    }

    /// max(‖a·a* − 1‖₁, ‖a*·a − 1‖₁).
    pub fn unitary_defect(&self) -> f64 {
        let star = self.star();
        let one = Self::one(self.theta);
        let left = (&(self * &star) - &one).norm_l1();
        let right = (&(&star * self) - &one).norm_l1();
        left.max(right)
    }

    /// The reordering phase `e^{−2πiθ·n·m'}` arising from `vⁿu^{m'}`.
    ///
    /// The exponent is reduced mod 1 before exponentiating so that large
    /// powers do not lose phase accuracy; for float θ this is accurate to
    /// about `|n·m'|·ε` in the angle.
    fn reorder_phase(&self, n: i64, m_prime: i64) -> Complex64 {
        let k = n as f64 * m_prime as f64;
        let frac = (self.theta * k).rem_euclid(1.0);
        Complex64::from_polar(1.0, -std::f64::consts::TAU * frac)
    }

    fn add_term(&mut self, m: i64, n: i64, coeff: Complex64) {
        if coeff == Complex64::ZERO {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.coeffs.entry((m, n)) {
            Entry::Vacant(e) => {
                e.insert(coeff);
            }
            Entry::Occupied(mut e) => {
                let sum = *e.get() + coeff;
                if sum == Complex64::ZERO {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    fn check_same_algebra(&self, other: &Self, op: &str) -> Result<()> {
        if (self.theta - other.theta).abs() > THETA_MATCH_TOL {
            return Err(Error::validation(format!(
                "{op}: elements live in different algebras (θ = {} vs {})",
                self.theta, other.theta
            )));
        }
        Ok(())
    }

    fn mul_impl(&self, other: &Self) -> Self {
        self.check_same_algebra(other, "nc_mul")
            .expect("nc_mul: mismatched deformation parameters");
        let mut out = Self::zero(self.theta);
        for (&(m1, n1), &c1) in &self.coeffs {
            for (&(m2, n2), &c2) in &other.coeffs {
                let phase = self.reorder_phase(n1, m2);
                out.add_term(m1 + m2, n1 + n2, c1 * c2 * phase);
            }
        }
        out
    }
}

/// Commutator `[a, b] = ab − ba`.
pub fn commutator(a: &NcElement, b: &NcElement) -> NcElement {
    &(a * b) - &(b * a)
}

impl Add for &NcElement {
    type Output = NcElement;
    fn add(self, rhs: &NcElement) -> NcElement {
        self.check_same_algebra(rhs, "add")
            .expect("add: mismatched deformation parameters");
        let mut out = self.clone();
        for (&(m, n), &coeff) in &rhs.coeffs {
            out.add_term(m, n, coeff);
        }
        out
    }
}

impl Sub for &NcElement {
    type Output = NcElement;
    fn sub(self, rhs: &NcElement) -> NcElement {
        self + &(-rhs)
    }
}

impl Neg for &NcElement {
    type Output = NcElement;
    fn neg(self) -> NcElement {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for &NcElement {
    type Output = NcElement;
    fn mul(self, rhs: &NcElement) -> NcElement {
        self.mul_impl(rhs)
    }
}

impl Add for NcElement {
    type Output = NcElement;
    fn add(self, rhs: NcElement) -> NcElement {
        &self + &rhs
    }
}

impl Sub for NcElement {
    type Output = NcElement;
    fn sub(self, rhs: NcElement) -> NcElement {
        &self - &rhs
    }
}

impl Neg for NcElement {
    type Output = NcElement;
    fn neg(self) -> NcElement {
        -&self
    }
}

impl Mul for NcElement {
    type Output = NcElement;
    fn mul(self, rhs: NcElement) -> NcElement {
        &self * &rhs
    }
}

impl fmt::Display for NcElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(m, n), &coeff) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:.6}{:+.6}i)", coeff.re, coeff.im)?;
            if m != 0 {
                write!(f, "·u^{m}")?;
            }
            if n != 0 {
                write!(f, "·v^{n}")?;
            }
        }
        Ok(())
    }
}

/// JSON wire form: `{"theta": …, "coeffs": [[m, n, re, im], …]}`.
#[derive(Serialize, Deserialize)]
struct WireNcElement {
    theta: f64,
    coeffs: Vec<(i64, i64, f64, f64)>,
}

impl Serialize for NcElement {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let wire = WireNcElement {
            theta: self.theta,
            coeffs: self
                .coeffs
                .iter()
                .map(|(&(m, n), z)| (m, n, z.re, z.im))
                .collect(),
        };
        wire.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for NcElement {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let wire = WireNcElement::deserialize(deserializer)?;
        Ok(NcElement::from_terms(
            wire.theta,
            wire.coeffs
                .into_iter()
                .map(|(m, n, re, im)| ((m, n), Complex64::new(re, im))),
        ))
    }
}
