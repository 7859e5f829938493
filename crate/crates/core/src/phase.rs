//! Exact phase and scalar arithmetic.
//!
//! Circle values are stored as rational numbers of *turns* (so `1/4` is `i`)
//! whenever the inputs are roots of unity, and fall back to `Complex64` with a
//! fixed tolerance otherwise. Algebra coefficients extend this to formal
//! rational combinations of `e(turns)·sqrt(d)` terms, which stay exact under
//! sums, products, and conjugation; zero tests reduce modulo cyclotomic
//! polynomials so identities like `1 + e(1/3) + e(2/3) = 0` are recognized.

use num::complex::Complex64;
use num::{BigInt, BigRational, One, Rational64, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;

/// Comparison tolerance used whenever a floating-point value is involved.
pub const TOL: f64 = 1e-12;

/// Normalize a number of turns into `[0, 1)`.
fn norm_turns(t: Rational64) -> Rational64 {
    t - t.floor()
}

/// A unit complex number.
///
/// `Turns(t)` means `exp(2·pi·i·t)` with `t` a rational in `[0, 1)`; `Approx`
/// carries an explicit complex value and infects every computation it touches
/// with tolerance-based comparison.
#[derive(Clone, Copy, Debug)]
pub enum Phase {
    Turns(Rational64),
    Approx(Complex64),
}

impl Phase {
    pub fn one() -> Phase {
        Phase::Turns(Rational64::zero())
    }

    /// Exact phase of `n/d` turns.
    pub fn turns(n: i64, d: i64) -> Phase {
        Phase::Turns(norm_turns(Rational64::new(n, d)))
    }

    pub fn from_turns(t: Rational64) -> Phase {
        Phase::Turns(norm_turns(t))
    }

    pub fn approx(v: Complex64) -> Phase {
        Phase::Approx(v)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Phase::Turns(_))
    }

    pub fn conj(&self) -> Phase {
        match self {
            Phase::Turns(t) => Phase::Turns(norm_turns(-t)),
            Phase::Approx(v) => Phase::Approx(v.conj()),
        }
    }

    pub fn pow(&self, k: i64) -> Phase {
        match self {
            Phase::Turns(t) => Phase::Turns(norm_turns(t * Rational64::from_integer(k))),
            Phase::Approx(v) => Phase::Approx(v.powi(k as i32)),
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        match self {
            Phase::Turns(t) => {
                let a = TAU * t.numer().to_f64().unwrap() / t.denom().to_f64().unwrap();
                Complex64::new(a.cos(), a.sin())
            }
            Phase::Approx(v) => *v,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Phase::Turns(t) => t.is_zero(),
            Phase::Approx(v) => (v - Complex64::new(1.0, 0.0)).norm() <= TOL,
        }
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        match (self, rhs) {
            (Phase::Turns(a), Phase::Turns(b)) => Phase::Turns(norm_turns(a + b)),
            (a, b) => Phase::Approx(a.to_complex() * b.to_complex()),
        }
    }
}

impl PartialEq for Phase {
    fn eq(&self, other: &Phase) -> bool {
        match (self, other) {
            (Phase::Turns(a), Phase::Turns(b)) => a == b,
            (a, b) => (a.to_complex() - b.to_complex()).norm() <= TOL,
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phase::Turns(t) if t.is_zero() => write!(f, "1"),
            Phase::Turns(t) => write!(f, "e({})", t),
            Phase::Approx(v) => write!(f, "{:.12e}{:+.12e}i", v.re, v.im),
        }
    }
}

/// Key of one exact term: (turns in `[0,1)`, squarefree radicand).
type TermKey = (Rational64, u64);

/// A scalar: formal rational combination of `e(turns)·sqrt(d)` terms, or a
/// floating complex number once anything inexact has entered the computation.
#[derive(Clone, Debug)]
pub enum Scalar {
    Exact(BTreeMap<TermKey, BigRational>),
    Approx(Complex64),
}

/// `n = m²·d` with `d` squarefree.
fn squarefree(mut n: u64) -> (u64, u64) {
    let (mut m, mut d) = (1u64, 1u64);
    let mut p = 2u64;
    while p * p <= n {
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        m *= p.pow(e / 2);
        if e % 2 == 1 {
            d *= p;
        }
        p += 1;
    }
    (m, d * n)
}

/// Coefficients of the cyclotomic polynomial `Phi_n`, low degree first.
///
/// Built bottom-up over the divisors of `n` by exact division of `x^d - 1`.
fn cyclotomic_poly(n: usize) -> Vec<BigInt> {
    let mut memo: BTreeMap<usize, Vec<BigInt>> = BTreeMap::new();
    for d in 1..=n {
        if !n.is_multiple_of(d) {
            continue;
        }
        // x^d - 1
        let mut poly = vec![BigInt::zero(); d + 1];
        poly[0] = BigInt::from(-1);
        poly[d] = BigInt::one();
        for (dd, phi) in &memo {
            if d % dd == 0 {
                poly = poly_div_exact(&poly, phi);
            }
        }
        memo.insert(d, poly);
    }
    memo.remove(&n).unwrap()
}

/// Exact division of integer polynomials (divisor monic, remainder known zero).
fn poly_div_exact(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let mut quot = vec![BigInt::zero(); rem.len() - dd];
    for i in (dd..rem.len()).rev() {
        let c = rem[i].clone();
        if c.is_zero() {
            continue;
        }
        quot[i - dd] = c.clone();
        for (j, dc) in den.iter().enumerate() {
            let v = rem[i - dd + j].clone() - &c * dc;
            rem[i - dd + j] = v;
        }
    }
    debug_assert!(rem.iter().all(|c| c.is_zero()));
    quot
}

/// Is the formal sum `Σ coeff·e(turns)` zero as a complex number?
fn cyclo_is_zero(terms: &BTreeMap<Rational64, BigRational>) -> bool {
    if terms.is_empty() {
        return true;
    }
    let mut n: i64 = 1;
    for t in terms.keys() {
        n = num::integer::lcm(n, *t.denom());
    }
    let n = n as usize;
    let mut c = vec![BigRational::zero(); n];
    for (t, q) in terms {
        let idx = (*t.numer() as usize) * (n / *t.denom() as usize) % n;
        c[idx] += q;
    }
    // Remainder of c(x) modulo Phi_n(x); zero iff the sum vanishes at e(1/n).
    let phi: Vec<BigRational> = cyclotomic_poly(n)
        .into_iter()
        .map(BigRational::from_integer)
        .collect();
    let dd = phi.len() - 1;
    for i in (dd..c.len()).rev() {
        let lead = c[i].clone();
        if lead.is_zero() {
            continue;
        }
        for (j, pc) in phi.iter().enumerate() {
            let v = c[i - dd + j].clone() - &lead * pc;
            c[i - dd + j] = v;
        }
    }
    c.iter().all(|x| x.is_zero())
}

impl Scalar {
    pub fn zero() -> Scalar {
        Scalar::Exact(BTreeMap::new())
    }

    pub fn one() -> Scalar {
        Scalar::from_int(1)
    }

    pub fn from_int(k: i64) -> Scalar {
        Scalar::from_rat(Rational64::from_integer(k))
    }

    pub fn from_rat(q: Rational64) -> Scalar {
        if q.is_zero() {
            return Scalar::zero();
        }
        let mut m = BTreeMap::new();
        m.insert(
            (Rational64::zero(), 1),
            BigRational::new(BigInt::from(*q.numer()), BigInt::from(*q.denom())),
        );
        Scalar::Exact(m)
    }

    pub fn from_phase(p: Phase) -> Scalar {
        match p {
            Phase::Turns(t) => {
                let mut m = BTreeMap::new();
                m.insert((norm_turns(t), 1), BigRational::one());
                Scalar::Exact(m)
            }
            Phase::Approx(v) => Scalar::Approx(v),
        }
    }

    /// Exact square root of a non-negative rational, e.g. `sqrt(2) = 1·√2`.
    pub fn sqrt_rat(q: Rational64) -> crate::error::Result<Scalar> {
        if q.is_negative() {
            return Err(crate::error::Error::UnsupportedFunction(format!(
                "sqrt of negative rational {}",
                q
            )));
        }
        if q.is_zero() {
            return Ok(Scalar::zero());
        }
        let (a, b) = (*q.numer() as u64, *q.denom() as u64);
        let (m, d) = squarefree(a * b);
        let mut t = BTreeMap::new();
        t.insert(
            (Rational64::zero(), d),
            BigRational::new(BigInt::from(m), BigInt::from(b)),
        );
        Ok(Scalar::Exact(t))
    }

    /// Square root of a non-negative real scalar: exact for plain rationals,
    /// numeric for approximate values, unsupported otherwise.
    pub fn sqrt(&self) -> crate::error::Result<Scalar> {
        match self {
            Scalar::Approx(v) => {
                if v.im.abs() > TOL || v.re < -TOL {
                    return Err(crate::error::Error::UnsupportedFunction(format!(
                        "sqrt of non-real-nonnegative value {v}"
                    )));
                }
                Ok(Scalar::Approx(Complex64::new(v.re.max(0.0).sqrt(), 0.0)))
            }
            Scalar::Exact(terms) => {
                let live: Vec<_> = terms.iter().filter(|(_, q)| !q.is_zero()).collect();
                if live.is_empty() {
                    return Ok(Scalar::zero());
                }
                if live.len() == 1 {
                    let ((t, d), q) = live[0];
                    if t.is_zero() && *d == 1 && !q.is_negative() {
                        let (n, m) = (q.numer(), q.denom());
                        if let (Some(n), Some(m)) = (n.to_i64(), m.to_i64()) {
                            return Scalar::sqrt_rat(Rational64::new(n, m));
                        }
                    }
                }
                Err(crate::error::Error::UnsupportedFunction(format!(
                    "sqrt of non-rational exact value {self}"
                )))
            }
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn to_complex(&self) -> Complex64 {
        match self {
            Scalar::Approx(v) => *v,
            Scalar::Exact(terms) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for ((t, d), q) in terms {
                    let a = TAU * t.numer().to_f64().unwrap() / t.denom().to_f64().unwrap();
                    let mag = q.to_f64().unwrap() * (*d as f64).sqrt();
                    acc += Complex64::new(a.cos(), a.sin()) * mag;
                }
                acc
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Approx(v) => v.norm() <= TOL,
            Scalar::Exact(terms) => {
                // Distinct squarefree radicands never mix additively in the
                // computations this library performs, so test each class.
                let mut by_rad: BTreeMap<u64, BTreeMap<Rational64, BigRational>> = BTreeMap::new();
                for ((t, d), q) in terms {
                    if !q.is_zero() {
                        *by_rad.entry(*d).or_default().entry(*t).or_insert_with(BigRational::zero) += q;
                    }
                }
                by_rad.values().all(cyclo_is_zero)
            }
        }
    }

    pub fn is_one(&self) -> bool {
        (self - &Scalar::one()).is_zero()
    }

    pub fn conj(&self) -> Scalar {
        match self {
            Scalar::Approx(v) => Scalar::Approx(v.conj()),
            Scalar::Exact(terms) => Scalar::Exact(
                terms
                    .iter()
                    .map(|((t, d), q)| ((norm_turns(-t), *d), q.clone()))
                    .collect(),
            ),
        }
    }

    pub fn mul_phase(&self, p: Phase) -> Scalar {
        self * &Scalar::from_phase(p)
    }

    /// Drop exactness, e.g. to compare against a numeric oracle.
    pub fn approximate(&self) -> Scalar {
        Scalar::Approx(self.to_complex())
    }
}

impl std::ops::Add for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => {
                let mut out = a.clone();
                for (k, q) in b {
                    let e = out.entry(*k).or_insert_with(BigRational::zero);
                    *e += q;
                    if e.is_zero() {
                        out.remove(k);
                    }
                }
                Scalar::Exact(out)
            }
            (a, b) => Scalar::Approx(a.to_complex() + b.to_complex()),
        }
    }
}

impl std::ops::Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        self + &(-rhs)
    }
}

impl std::ops::Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(a) => Scalar::Exact(a.iter().map(|(k, q)| (*k, -q)).collect()),
            Scalar::Approx(v) => Scalar::Approx(-v),
        }
    }
}

impl std::ops::Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => {
                let mut out: BTreeMap<TermKey, BigRational> = BTreeMap::new();
                for ((t1, d1), q1) in a {
                    for ((t2, d2), q2) in b {
                        let (m, d) = squarefree(d1 * d2);
                        let key = (norm_turns(t1 + t2), d);
                        let val = q1 * q2 * BigRational::from_integer(BigInt::from(m));
                        let e = out.entry(key).or_insert_with(BigRational::zero);
                        *e += val;
                        if e.is_zero() {
                            out.remove(&key);
                        }
                    }
                }
                Scalar::Exact(out)
            }
            (a, b) => Scalar::Approx(a.to_complex() * b.to_complex()),
        }
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Scalar) -> bool {
        (self - other).is_zero()
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Approx(v) => write!(f, "{:.12e}{:+.12e}i", v.re, v.im),
            Scalar::Exact(terms) => {
                if self.is_zero() {
                    return write!(f, "0");
                }
                let mut first = true;
                for ((t, d), q) in terms {
                    if q.is_zero() {
                        continue;
                    }
                    if !first {
                        write!(f, " + ")?;
                    }
                    first = false;
                    write!(f, "{}", q)?;
                    if !t.is_zero() {
                        write!(f, "*e({})", t)?;
                    }
                    if *d != 1 {
                        write!(f, "*rt{}", d)?;
                    }
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_arithmetic_wraps_turns() {
        let a = Phase::turns(2, 3);
        let b = Phase::turns(2, 3);
        assert_eq!(a * b, Phase::turns(1, 3));
        assert_eq!(a.conj(), Phase::turns(1, 3));
        assert_eq!(a.pow(3), Phase::one());
        assert!(Phase::turns(5, 1).is_one());
    }

    #[test]
    fn phase_mixed_mode_compares_with_tolerance() {
        let exact = Phase::turns(1, 4);
        let float = Phase::approx(Complex64::new(0.0, 1.0));
        assert_eq!(exact, float);
        assert_ne!(exact, Phase::approx(Complex64::new(0.0, 1.0 + 1e-9)));
    }

    #[test]
    fn cyclotomic_relations_are_recognized() {
        // 1 + e(1/3) + e(2/3) = 0
        let s = &(&Scalar::one() + &Scalar::from_phase(Phase::turns(1, 3)))
            + &Scalar::from_phase(Phase::turns(2, 3));
        assert!(s.is_zero());
        // but 1 + e(1/3) is not
        let t = &Scalar::one() + &Scalar::from_phase(Phase::turns(1, 3));
        assert!(!t.is_zero());
    }

    #[test]
    fn sqrt_terms_multiply_back_to_rationals() {
        let r2 = Scalar::sqrt_rat(Rational64::new(2, 1)).unwrap();
        assert_eq!(&r2 * &r2, Scalar::from_int(2));
        let half = Scalar::sqrt_rat(Rational64::new(1, 2)).unwrap();
        assert_eq!(&half * &half, Scalar::from_rat(Rational64::new(1, 2)));
        assert_eq!(&r2 * &half, Scalar::one());
        assert!(Scalar::sqrt_rat(Rational64::new(-1, 1)).is_err());
    }

    #[test]
    fn squarefree_decomposition() {
        assert_eq!(squarefree(72), (6, 2)); // 72 = 36·2
        assert_eq!(squarefree(1), (1, 1));
        assert_eq!(squarefree(12), (2, 3));
    }

    #[test]
    fn exact_conjugation_inverts_phases() {
        let z = Scalar::from_phase(Phase::turns(3, 8));
        assert!((&z * &z.conj()).is_one());
    }

    #[test]
    fn to_complex_matches_exact_values() {
        let s = &Scalar::from_phase(Phase::turns(1, 8))
            + &Scalar::from_phase(Phase::turns(7, 8));
        // e(1/8) + e(-1/8) = sqrt(2)
        assert!((s.to_complex().re - 2f64.sqrt()).abs() < 1e-12);
        assert!(s.to_complex().im.abs() < 1e-12);
    }
}
