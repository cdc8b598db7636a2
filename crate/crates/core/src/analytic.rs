//! Floating point oracles: shifted zeta values, the constant term of the
//! vector-valued weight-2 Eisenstein series at a cusp, numeric evaluation of
//! q-series on the upper half plane and multiplier estimation.
//!
//! Everything is generic over [`Real`]; `f64` is the working type. Residue
//! arithmetic stays in exact integers and only zeta values are floats.

use std::collections::HashMap;

use num_complex::Complex;
use num_traits::Zero;

use crate::arith::{self, ext_gcd, rem};
use crate::characters::{gauss_sum, DirChar};
use crate::cusps::{enumerate_cusps, Cusp};
use crate::error::{Error, Result};
use crate::eta::{EtaCache, EtaQuotientExpr};
use crate::field::{format_rational, is_integer, rational_to_f64, Real};
use crate::CycSeries;

fn real<F: Real>(x: f64) -> F {
    F::from(x).expect("f64 converts to every Real")
}

/// `B_2, B_4, ..., B_16`.
const BERNOULLI_EVEN: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

/// Hurwitz `zeta(2, x)` for `x > 0`: `cutoff` direct terms, then the
/// Euler-Maclaurin tail
/// `1/y + 1/(2 y^2) + sum_j B_{2j} / y^{2j+1}` at `y = x + cutoff`.
pub fn hurwitz_zeta2<F: Real>(x: F, cutoff: usize) -> F {
    let mut s = F::zero();
    for j in 0..cutoff {
        let y = x + real(j as f64);
        s = s + (y * y).recip();
    }
    let y = x + real(cutoff as f64);
    let inv = y.recip();
    let inv2 = inv * inv;
    let mut tail = inv + inv2 / real(2.0);
    let mut p = inv2 * inv;
    for b in BERNOULLI_EVEN.iter().take(6) {
        tail = tail + real::<F>(*b) * p;
        p = p * inv2;
    }
    s + tail
}

/// Direct-sum cutoff making the first omitted Euler-Maclaurin term
/// (`|B_14| / y^15`) smaller than `target / 10`.
fn em_cutoff(target: f64) -> usize {
    let m = (BERNOULLI_EVEN[6] * 10.0 / target).powf(1.0 / 15.0).ceil() as usize;
    m.max(8)
}

/// `zeta^{d}(2) = sum_{m = d (n), m != 0} 1/m^2`, over positive and negative
/// `m`, to absolute error `target_abs_err` (clamped below at `1e-12`).
pub fn zeta_shifted<F: Real>(d: i64, n: u64, target_abs_err: f64) -> F {
    zeta_shifted_with_cutoff(d, n, em_cutoff(target_abs_err.max(1e-12)))
}

pub fn zeta_shifted_with_cutoff<F: Real>(d: i64, n: u64, cutoff: usize) -> F {
    let nn: F = real(n as f64);
    let r = rem(d, n);
    if r == 0 {
        let pi = F::PI();
        return pi * pi / real(3.0) / (nn * nn);
    }
    let x: F = real::<F>(r as f64) / nn;
    (hurwitz_zeta2(x, cutoff) + hurwitz_zeta2(F::one() - x, cutoff)) / (nn * nn)
}

/// A residue vector `(c_v, d_v)` in `(Z/NZ)^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ResidueVector {
    pub cv: u64,
    pub dv: u64,
    pub modulus: u64,
}

impl ResidueVector {
    pub fn new(c: i64, d: i64, modulus: u64) -> Self {
        ResidueVector {
            cv: rem(c, modulus),
            dv: rem(d, modulus),
            modulus,
        }
    }

    /// Row vector times matrix, `(c, d) g`.
    pub fn act(&self, g: &UnimodularMatrix) -> Self {
        let (c, d) = (self.cv as i64, self.dv as i64);
        ResidueVector::new(c * g.a + d * g.c, c * g.b + d * g.d, self.modulus)
    }

    pub fn delta(&self) -> bool {
        self.cv == 0
    }

    pub fn zeta<F: Real>(&self, target_abs_err: f64) -> F {
        zeta_shifted(self.dv as i64, self.modulus, target_abs_err)
    }

    /// `sigma_1^v(n) = sum_{d | n, n/d = c_v (N)} |d| e^{2 pi i d_v d / N}`
    /// over positive and negative divisors.
    pub fn sigma1<F: Real>(&self, n: u64) -> Complex<F> {
        let big_n = self.modulus as i64;
        let mut acc = Complex::zero();
        for d in arith::divisors(n) {
            for sign in [1i64, -1] {
                let dd = sign * d as i64;
                let cofactor = sign * (n / d) as i64;
                if rem(cofactor - self.cv as i64, self.modulus) == 0 {
                    let phase = real::<F>(2.0) * F::PI() * real(rem(self.dv as i64 * dd, self.modulus) as f64)
                        / real(big_n as f64);
                    acc = acc + Complex::from_polar(real(d as f64), phase);
                }
            }
        }
        acc
    }
}

/// An integer matrix `[[a, b], [c, d]]` of determinant 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct UnimodularMatrix {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl UnimodularMatrix {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        if a * d - b * c != 1 {
            return Err(Error::Precondition(format!(
                "[[{a}, {b}], [{c}, {d}]] has determinant {}",
                a * d - b * c
            )));
        }
        Ok(UnimodularMatrix { a, b, c, d })
    }

    pub fn identity() -> Self {
        UnimodularMatrix { a: 1, b: 0, c: 0, d: 1 }
    }

    pub fn translation(w: i64) -> Self {
        UnimodularMatrix { a: 1, b: w, c: 0, d: 1 }
    }

    /// A matrix `[[k, b], [s, k']]` sending infinity to the cusp `k/s`.
    pub fn to_cusp(s: &Cusp) -> Self {
        if s.is_infinity() {
            return Self::identity();
        }
        let (k, c) = (s.a, s.c as i64);
        let (_, x, y) = ext_gcd(k, c);
        // k x + c y = 1
        UnimodularMatrix { a: k, b: -y, c, d: x }
    }

    /// Generator of the stabilizer of `s` in `Gamma_0(level)`: `A T^w A^-1`.
    pub fn cusp_stabilizer(s: &Cusp) -> Self {
        let a = Self::to_cusp(s);
        a.mul(&Self::translation(s.width as i64)).mul(&a.inverse())
    }

    pub fn mul(&self, o: &Self) -> Self {
        UnimodularMatrix {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn inverse(&self) -> Self {
        UnimodularMatrix {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    pub fn neg(&self) -> Self {
        UnimodularMatrix {
            a: -self.a,
            b: -self.b,
            c: -self.c,
            d: -self.d,
        }
    }

    pub fn trace(&self) -> i64 {
        self.a + self.d
    }

    pub fn in_gamma0(&self, n: u64) -> bool {
        rem(self.c, n) == 0
    }

    /// Moebius action `(a tau + b) / (c tau + d)`.
    pub fn act<F: Real>(&self, tau: Complex<F>) -> Complex<F> {
        let f = |x: i64| Complex::new(real::<F>(x as f64), F::zero());
        (f(self.a) * tau + f(self.b)) / (f(self.c) * tau + f(self.d))
    }
}

fn require_primitive(chi: &DirChar) -> Result<u64> {
    if chi.is_principal() || !chi.is_primitive() {
        return Err(Error::Precondition(format!(
            "{} is not primitive of conductor > 1",
            chi.descriptor()
        )));
    }
    Ok(chi.modulus())
}

/// Constant term at the cusp `gamma(infinity)` of
/// `G_2^{chi, conj chi} = sum chi(c) chi(d) G_2^{(c u, d + e u)}` modulo `u^2`:
///
/// ```text
/// sum_{0 <= c, d, e < u} chi(c) chi(d) delta((c u, d + e u) gamma) zeta^{(c u, d + e u) gamma}(2)
/// ```
///
/// The non-holomorphic correction of the slash action cancels because
/// `sum chi(c) chi(d) = 0`, so it is not evaluated.
pub fn g2_constant_term<F: Real>(
    chi: &DirChar,
    gamma: &UnimodularMatrix,
    target_abs_err: f64,
) -> Result<Complex<F>> {
    let u = require_primitive(chi)?;
    let n = u * u;
    let per_term = target_abs_err / (n * u) as f64;
    let values: Vec<Complex<F>> = (0..u).map(|a| chi.value(a as i64).to_complex()).collect();
    let mut acc = Complex::zero();
    for c in 0..u {
        if values[c as usize].is_zero() {
            continue;
        }
        for d in 0..u {
            let w = values[c as usize] * values[d as usize];
            if w.is_zero() {
                continue;
            }
            for e in 0..u {
                let v = ResidueVector::new((c * u) as i64, (d + e * u) as i64, n).act(gamma);
                if v.delta() {
                    acc = acc + w * v.zeta::<F>(per_term);
                }
            }
        }
    }
    Ok(acc)
}

/// Numeric order of `eta_chi` at a cusp of `Gamma_0(u^2)`, for `chi` real
/// primitive: `w c^2` times the constant term of `theta eta_chi / eta_chi`,
/// which is `(g(conj chi) / g(chi)) (u^2 / 8 pi^2)` times
/// [`g2_constant_term`]. At infinity `c^2` is replaced by 1.
pub fn eta_chi_order_numeric<F: Real>(chi: &DirChar, s: &Cusp) -> Result<F> {
    let u = require_primitive(chi)?;
    if !chi.is_real() {
        return Err(Error::NonRealCharacter(chi.descriptor()));
    }
    if s.level != u * u {
        return Err(Error::Precondition(format!(
            "cusp {s} is not on Gamma_0({})",
            u * u
        )));
    }
    let ct: Complex<F> = g2_constant_term(chi, &UnimodularMatrix::to_cusp(s), 1e-12)?;
    let ratio: Complex<F> = gauss_sum(1, &chi.conj()).to_complex::<F>() / gauss_sum(1, chi).to_complex::<F>();
    let pi = F::PI();
    let uu: F = real((u * u) as f64);
    let c2: F = if s.is_infinity() { F::one() } else { real((s.c * s.c) as f64) };
    let w: F = real(s.width as f64);
    Ok((ratio * ct).re * uu / (real::<F>(8.0) * pi * pi) * w * c2)
}

/// Value of a truncated series at a point together with a tail estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesValue<F: Real> {
    pub value: Complex<F>,
    pub tail: F,
}

/// A q-series with coefficients converted to floating point.
#[derive(Clone, Debug)]
pub struct NumericSeries<F: Real> {
    pub leading: F,
    pub coeffs: Vec<Complex<F>>,
}

impl<F: Real> NumericSeries<F> {
    pub fn from_series(f: &CycSeries) -> Self {
        NumericSeries {
            leading: real(rational_to_f64(f.leading_exponent())),
            coeffs: f.coeffs().iter().map(|c| c.to_complex()).collect(),
        }
    }

    /// `q^r sum_{n < terms} c_n q^n` at `q = e^{2 pi i tau}`. The tail is the
    /// largest of the last few term magnitudes times `1 / (1 - |q|)`.
    pub fn eval(&self, tau: Complex<F>, terms: usize) -> Result<SeriesValue<F>> {
        if terms > self.coeffs.len() {
            return Err(Error::PrecisionTooLow {
                got: self.coeffs.len(),
                need: terms,
            });
        }
        let two_pi_i = Complex::new(F::zero(), real::<F>(2.0) * F::PI());
        let q = (two_pi_i * tau).exp();
        let q_abs = q.norm();
        if tau.im <= F::zero() || q_abs >= F::one() {
            return Err(Error::TailBound {
                bound: f64::INFINITY,
                q_abs: q_abs.to_f64().unwrap_or(f64::NAN),
            });
        }
        let mut sum = Complex::zero();
        let mut qn = Complex::new(F::one(), F::zero());
        let mut last = F::zero();
        for (n, c) in self.coeffs.iter().take(terms).enumerate() {
            let term = *c * qn;
            sum = sum + term;
            if n + 8 >= terms {
                last = last.max(term.norm());
            }
            qn = qn * q;
        }
        let tail = last * q_abs / (F::one() - q_abs);
        let prefactor = (two_pi_i * tau * self.leading).exp();
        Ok(SeriesValue {
            value: prefactor * sum,
            tail: tail * prefactor.norm(),
        })
    }
}

/// Numeric value of `f` at `tau` from its first `terms` coefficients.
pub fn eval_series<F: Real>(f: &CycSeries, tau: Complex<F>, terms: usize) -> Result<SeriesValue<F>> {
    NumericSeries::from_series(f).eval(tau, terms)
}

/// Truncation used for multiplier estimates.
pub const MULTIPLIER_TRUNCATION: usize = 500;
/// Largest `|q|` accepted at either evaluation point.
pub const MULTIPLIER_MAX_Q: f64 = 0.85;

/// Estimates multipliers `f(gamma tau) / f(tau)` of weight-0 eta-quotients,
/// caching the numeric expansions of the factors.
#[derive(Debug)]
pub struct MultiplierEstimator<F: Real> {
    truncation: usize,
    exact: EtaCache,
    numeric: HashMap<String, NumericSeries<F>>,
}

impl<F: Real> Default for MultiplierEstimator<F> {
    fn default() -> Self {
        Self::new(MULTIPLIER_TRUNCATION)
    }
}

impl<F: Real> MultiplierEstimator<F> {
    pub fn new(truncation: usize) -> Self {
        MultiplierEstimator {
            truncation,
            exact: EtaCache::new(),
            numeric: HashMap::new(),
        }
    }

    fn eta_chi_value(&mut self, chi: &str, tau: Complex<F>) -> Result<Complex<F>> {
        if !self.numeric.contains_key(chi) {
            let s = self.exact.eta_chi(chi, self.truncation)?;
            self.numeric.insert(chi.to_string(), NumericSeries::from_series(s));
        }
        let v = self.numeric[chi].eval(tau, self.truncation)?;
        let q_abs = (-real::<F>(2.0) * F::PI() * tau.im).exp();
        if q_abs > real(MULTIPLIER_MAX_Q) || v.tail > real::<F>(1e-10) * v.value.norm() {
            return Err(Error::TailBound {
                bound: v.tail.to_f64().unwrap_or(f64::NAN),
                q_abs: q_abs.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(v.value)
    }

    /// `nu(gamma) = f(gamma tau) / f(tau)`; the constant `c` cancels.
    pub fn estimate(&mut self, e: &EtaQuotientExpr, gamma: &UnimodularMatrix, tau: Complex<F>) -> Result<Complex<F>> {
        let weight2 = e
            .terms
            .iter()
            .filter(|(k, _)| k.is_classical())
            .fold(crate::Rational::zero(), |acc, (_, a)| acc + a);
        if !weight2.is_zero() {
            return Err(Error::Precondition(format!(
                "expression has weight {} / 2, expected 0",
                format_rational(&weight2)
            )));
        }
        let gtau = gamma.act(tau);
        let mut nu = Complex::new(F::one(), F::zero());
        for (key, a) in &e.terms {
            if !is_integer(a) {
                return Err(Error::NonIntegerExponent(format_rational(a)));
            }
            let k = i32::try_from(a.to_integer()).map_err(|_| Error::NonIntegerExponent(format_rational(a)))?;
            let t: F = real(key.t as f64);
            let scale = |z: Complex<F>| Complex::new(z.re * t, z.im * t);
            let num = self.eta_chi_value(&key.chi, scale(gtau))?;
            let den = self.eta_chi_value(&key.chi, scale(tau))?;
            nu = nu * (num / den).powi(k);
        }
        Ok(nu)
    }

    /// Estimate at the point `(-d + i)/c`, where `tau` and `gamma tau` both have
    /// imaginary part `1/c`; translations are evaluated at `tau = i`.
    pub fn estimate_default(&mut self, e: &EtaQuotientExpr, gamma: &UnimodularMatrix) -> Result<Complex<F>> {
        self.estimate(e, gamma, default_point(gamma))
    }
}

/// The point `(-d + i)/c` for `c > 0` (after normalizing the sign), `i` when
/// `c = 0`.
pub fn default_point<F: Real>(gamma: &UnimodularMatrix) -> Complex<F> {
    let g = if gamma.c < 0 { gamma.neg() } else { *gamma };
    if g.c == 0 {
        return Complex::new(F::zero(), F::one());
    }
    let c: F = real(g.c as f64);
    Complex::new(real::<F>(-g.d as f64) / c, c.recip())
}

/// One-shot form of [`MultiplierEstimator::estimate`].
pub fn estimate_multiplier<F: Real>(
    e: &EtaQuotientExpr,
    gamma: &UnimodularMatrix,
    tau: Complex<F>,
) -> Result<Complex<F>> {
    MultiplierEstimator::default().estimate(e, gamma, tau)
}

/// Largest `|c|` for which some `tau` keeps both `tau` and `gamma tau` within
/// `|q| <= MULTIPLIER_MAX_Q` (the best point has `Im = 1/|c|`).
pub fn max_evaluable_lower_left() -> i64 {
    (2.0 * std::f64::consts::PI / -MULTIPLIER_MAX_Q.ln()).floor() as i64
}

/// Elements of `Gamma_0(n)` on which multipliers are checked: the translation,
/// the cusp stabilizers `A T^w A^-1`, the matrices `[[a, b], [n, d]]` for every
/// unit `d` mod `n` and, for `n = 25`, the two elliptic elements of order 4.
///
/// Stabilizers with `|c| = w c^2` beyond [`max_evaluable_lower_left`] are left
/// out; on `Gamma_0(16)` this drops the one of `1/8` (`c = 64`), whose value
/// is fixed by the product relation among the parabolic generators.
pub fn multiplier_fixtures(n: u64) -> Vec<UnimodularMatrix> {
    let mut out = vec![UnimodularMatrix::translation(1)];
    for s in enumerate_cusps(n) {
        let g = UnimodularMatrix::cusp_stabilizer(&s);
        if !s.is_infinity() && g.c.abs() <= max_evaluable_lower_left() {
            out.push(g);
        }
    }
    for d in arith::units(n) {
        if d == n {
            continue;
        }
        let a = arith::mod_inverse(d as i64, n).expect("unit") as i64;
        let b = (a * d as i64 - 1) / n as i64;
        out.push(UnimodularMatrix {
            a,
            b,
            c: n as i64,
            d: d as i64,
        });
    }
    if n == 25 {
        out.push(UnimodularMatrix { a: 7, b: -2, c: 25, d: -7 });
        out.push(UnimodularMatrix { a: -7, b: -2, c: 25, d: 7 });
    }
    out
}
