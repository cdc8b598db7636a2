//! Exact arithmetic in cyclotomic fields `Q(zeta_m)`.
//!
//! An element is stored as an integer coefficient vector over the power basis
//! `1, z, ..., z^(phi(m)-1)` together with one positive common denominator.
//! Vectors are always reduced modulo the m-th cyclotomic polynomial and the
//! fraction is kept in lowest terms, so the representation is canonical for a
//! fixed order. Operands of different orders are embedded into the lcm order.

use std::borrow::Cow;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, lcm_u32};
use crate::error::{Error, Result};
use crate::field::{format_rational, parse_rational, Field, Rational, Real};

fn cyclotomic_poly(m: u32) -> Arc<[i64]> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<[i64]>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().unwrap().get(&m) {
        return p.clone();
    }
    // x^m - 1 divided by every Phi_d with d a proper divisor of m.
    let mut p = vec![0i64; m as usize + 1];
    p[0] = -1;
    p[m as usize] = 1;
    for d in arith::divisors(m as u64) {
        if d == m as u64 {
            continue;
        }
        let q = cyclotomic_poly(d as u32);
        let k = q.len() - 1;
        let n = p.len() - 1;
        let mut quo = vec![0i64; n - k + 1];
        for i in (0..=n - k).rev() {
            let c = p[i + k];
            quo[i] = c;
            if c != 0 {
                for (j, &qj) in q.iter().enumerate() {
                    p[i + j] -= c * qj;
                }
            }
        }
        debug_assert!(p.iter().all(|&x| x == 0));
        p = quo;
    }
    let p: Arc<[i64]> = p.into();
    cache.lock().unwrap().insert(m, p.clone());
    p
}

fn phi(m: u32) -> usize {
    cyclotomic_poly(m).len() - 1
}

/// Reduces a polynomial in `z = zeta_m` to a vector of length `phi(m)`.
fn reduce(mut poly: Vec<BigInt>, m: u32) -> Vec<BigInt> {
    let cyc = cyclotomic_poly(m);
    let deg = cyc.len() - 1;
    if poly.len() <= deg {
        poly.resize(deg, BigInt::zero());
        return poly;
    }
    for k in (deg..poly.len()).rev() {
        if poly[k].is_zero() {
            continue;
        }
        let c = std::mem::take(&mut poly[k]);
        for (j, &pj) in cyc[..deg].iter().enumerate() {
            if pj != 0 {
                poly[k - deg + j] -= &c * pj;
            }
        }
    }
    poly.truncate(deg);
    poly
}

/// An exact element of `Q(zeta_m)`.
#[derive(Clone, Serialize, Deserialize)]
#[serde(try_from = "CycNumJson", into = "CycNumJson")]
pub struct CycNum {
    order: u32,
    num: Vec<BigInt>,
    den: BigInt,
}

impl CycNum {
    fn from_parts(order: u32, num: Vec<BigInt>, den: BigInt) -> Self {
        CycNum { order, num, den }.normalized()
    }

    fn normalized(mut self) -> Self {
        if self.num.iter().all(Zero::is_zero) {
            self.den = BigInt::one();
            return self;
        }
        if self.den.is_negative() {
            self.den = -std::mem::take(&mut self.den);
            for c in &mut self.num {
                *c = -std::mem::take(c);
            }
        }
        if !self.den.is_one() {
            let mut g = self.den.clone();
            for c in &self.num {
                if g.is_one() {
                    break;
                }
                g = g.gcd(c);
            }
            if !g.is_one() {
                self.den /= &g;
                for c in &mut self.num {
                    *c /= &g;
                }
            }
        }
        self
    }

    pub fn zero_of(order: u32) -> Self {
        assert!(order >= 1, "zeta order must be positive");
        CycNum {
            order,
            num: vec![BigInt::zero(); phi(order)],
            den: BigInt::one(),
        }
    }

    pub fn from_rational_in(r: &Rational, order: u32) -> Self {
        let mut x = Self::zero_of(order);
        x.num[0] = r.numer().clone();
        x.den = r.denom().clone();
        x.normalized()
    }

    pub fn from_integer(n: i64) -> Self {
        Self::from_rational_in(&Rational::from_integer(n.into()), 1)
    }

    /// `zeta_m^k` for any integer `k`.
    pub fn zeta(order: u32, k: i64) -> Self {
        assert!(order >= 1, "zeta order must be positive");
        let e = arith::rem(k, order as u64) as usize;
        let mut poly = vec![BigInt::zero(); e + 1];
        poly[e] = BigInt::one();
        CycNum {
            order,
            num: reduce(poly, order),
            den: BigInt::one(),
        }
    }

    /// Builds `sum coeffs[i] * zeta_m^i`; the vector may be longer than
    /// `phi(m)` and is reduced.
    pub fn from_coeffs(order: u32, coeffs: &[Rational]) -> Self {
        assert!(order >= 1, "zeta order must be positive");
        let den = coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let poly = coeffs
            .iter()
            .map(|c| c.numer() * (&den / c.denom()))
            .collect();
        Self::from_parts(order, reduce(poly, order), den)
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Coordinates over `1, z, ..., z^(phi(m)-1)`.
    pub fn coeffs(&self) -> Vec<Rational> {
        self.num
            .iter()
            .map(|c| Rational::new(c.clone(), self.den.clone()))
            .collect()
    }

    pub fn as_rational(&self) -> Option<Rational> {
        self.num[1..]
            .iter()
            .all(Zero::is_zero)
            .then(|| Rational::new(self.num[0].clone(), self.den.clone()))
    }

    pub fn is_rational(&self) -> bool {
        self.num[1..].iter().all(Zero::is_zero)
    }

    /// Image under `zeta_m -> zeta_{m'}^(m'/m)`.
    pub fn embed(&self, target: u32) -> Result<CycNum> {
        if target == 0 || !target.is_multiple_of(self.order) {
            return Err(Error::EmbedOrder {
                from: self.order,
                to: target,
            });
        }
        Ok(self.embed_unchecked(target).into_owned())
    }

    fn embed_unchecked(&self, target: u32) -> Cow<'_, CycNum> {
        if target == self.order {
            return Cow::Borrowed(self);
        }
        let step = (target / self.order) as usize;
        let mut poly = vec![BigInt::zero(); (self.num.len() - 1) * step + 1];
        for (i, c) in self.num.iter().enumerate() {
            poly[i * step] = c.clone();
        }
        Cow::Owned(CycNum {
            order: target,
            num: reduce(poly, target),
            den: self.den.clone(),
        })
    }

    /// Galois action `zeta -> zeta^k`, `gcd(k, m) = 1`.
    pub fn galois(&self, k: i64) -> CycNum {
        let m = self.order as u64;
        debug_assert_eq!(arith::gcd(k, m as i64), 1);
        let mut poly = vec![BigInt::zero(); m as usize];
        for (i, c) in self.num.iter().enumerate() {
            if !c.is_zero() {
                poly[arith::rem(i as i64 * k, m) as usize] += c;
            }
        }
        CycNum::from_parts(self.order, reduce(poly, self.order), self.den.clone())
    }

    /// Complex conjugation, `zeta -> zeta^-1`.
    pub fn conj(&self) -> CycNum {
        self.galois(-1)
    }

    /// Numeric image under `zeta_m -> exp(2 pi i / m)`.
    pub fn to_complex<F: Real>(&self) -> Complex<F> {
        let m = self.order as f64;
        let den = self.den.to_f64().unwrap_or(f64::INFINITY);
        let mut re = 0.0f64;
        let mut im = 0.0f64;
        for (i, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let v = if den.is_finite() {
                c.to_f64().unwrap_or(f64::NAN) / den
            } else {
                crate::field::rational_to_f64(&Rational::new(c.clone(), self.den.clone()))
            };
            let angle = 2.0 * std::f64::consts::PI * i as f64 / m;
            re += v * angle.cos();
            im += v * angle.sin();
        }
        Complex::new(F::from(re).unwrap(), F::from(im).unwrap())
    }

    /// Exact norm down to `Q`.
    pub fn norm(&self) -> Rational {
        let mut prod = self.clone();
        for k in arith::units(self.order as u64) {
            if k != 1 {
                prod = prod.mul_ref(&self.galois(k as i64));
            }
        }
        prod.as_rational().expect("norm lies in Q")
    }

    fn align<'a>(a: &'a CycNum, b: &'a CycNum) -> (Cow<'a, CycNum>, Cow<'a, CycNum>) {
        let m = lcm_u32(a.order, b.order);
        (a.embed_unchecked(m), b.embed_unchecked(m))
    }

    fn add_sub(&self, rhs: &CycNum, negate: bool) -> CycNum {
        let (a, b) = Self::align(self, rhs);
        let (num, den) = if a.den == b.den {
            let num = a
                .num
                .iter()
                .zip(&b.num)
                .map(|(x, y)| if negate { x - y } else { x + y })
                .collect();
            (num, a.den.clone())
        } else {
            let num = a
                .num
                .iter()
                .zip(&b.num)
                .map(|(x, y)| {
                    let l = x * &b.den;
                    let r = y * &a.den;
                    if negate {
                        l - r
                    } else {
                        l + r
                    }
                })
                .collect();
            (num, &a.den * &b.den)
        };
        CycNum::from_parts(a.order, num, den)
    }

    fn mul_impl(&self, rhs: &CycNum) -> CycNum {
        if self.is_zero() || rhs.is_zero() {
            return CycNum::zero_of(lcm_u32(self.order, rhs.order));
        }
        let (a, b) = Self::align(self, rhs);
        let mut poly = vec![BigInt::zero(); a.num.len() + b.num.len() - 1];
        accumulate_product(&mut poly, &a.num, &b.num);
        CycNum::from_parts(a.order, reduce(poly, a.order), &a.den * &b.den)
    }

    fn inv_impl(&self) -> Option<CycNum> {
        if self.is_zero() {
            return None;
        }
        if self.order <= 2 || self.is_rational() {
            let r = Rational::new(self.num[0].clone(), self.den.clone()).recip();
            return Some(CycNum::from_rational_in(&r, self.order));
        }
        // a^-1 = (prod of the other conjugates) / norm(a)
        let mut others = CycNum::from_integer(1).embed_unchecked(self.order).into_owned();
        for k in arith::units(self.order as u64) {
            if k != 1 {
                others = others.mul_impl(&self.galois(k as i64));
            }
        }
        let norm = self.mul_impl(&others).as_rational().expect("norm lies in Q");
        Some(others.scale(&norm.recip()))
    }
}

fn accumulate_product(acc: &mut [BigInt], a: &[BigInt], b: &[BigInt]) {
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if !y.is_zero() {
                acc[i + j] += x * y;
            }
        }
    }
}

impl PartialEq for CycNum {
    fn eq(&self, other: &Self) -> bool {
        if self.order == other.order {
            return self.den == other.den && self.num == other.num;
        }
        let (a, b) = Self::align(self, other);
        a.den == b.den && a.num == b.num
    }
}

impl Eq for CycNum {}

impl Zero for CycNum {
    fn zero() -> Self {
        CycNum::zero_of(1)
    }

    fn is_zero(&self) -> bool {
        self.num.iter().all(Zero::is_zero)
    }
}

impl One for CycNum {
    fn one() -> Self {
        CycNum::from_integer(1)
    }
}

impl Field for CycNum {
    fn from_rational(r: &Rational) -> Self {
        CycNum::from_rational_in(r, 1)
    }

    fn add_ref(&self, rhs: &Self) -> Self {
        self.add_sub(rhs, false)
    }

    fn sub_ref(&self, rhs: &Self) -> Self {
        self.add_sub(rhs, true)
    }

    fn mul_ref(&self, rhs: &Self) -> Self {
        self.mul_impl(rhs)
    }

    fn inv(&self) -> Option<Self> {
        self.inv_impl()
    }

    fn scale(&self, r: &Rational) -> Self {
        let num = self.num.iter().map(|c| c * r.numer()).collect();
        CycNum::from_parts(self.order, num, &self.den * r.denom())
    }

    fn dot<'a, I>(pairs: I) -> Self
    where
        I: Iterator<Item = (&'a Self, &'a Self)>,
    {
        let pairs: Vec<_> = pairs
            .filter(|(a, b)| !a.is_zero() && !b.is_zero())
            .collect();
        let Some(order) = pairs
            .iter()
            .map(|(a, b)| lcm_u32(a.order, b.order))
            .reduce(lcm_u32)
        else {
            return CycNum::zero();
        };
        let n = phi(order);
        let mut acc = vec![BigInt::zero(); 2 * n - 1];
        let mut den = BigInt::one();
        for (a, b) in pairs {
            let a = a.embed_unchecked(order);
            let b = b.embed_unchecked(order);
            let d = &a.den * &b.den;
            if d == den {
                accumulate_product(&mut acc, &a.num, &b.num);
                continue;
            }
            // Bring the running sum and this term to a common denominator.
            let g = d.gcd(&den);
            let up_acc = &d / &g;
            let up_term = &den / &g;
            if !up_acc.is_one() {
                for c in acc.iter_mut() {
                    if !c.is_zero() {
                        *c *= &up_acc;
                    }
                }
                den *= &up_acc;
            }
            if up_term.is_one() {
                accumulate_product(&mut acc, &a.num, &b.num);
            } else {
                let scaled: Vec<BigInt> = a.num.iter().map(|x| x * &up_term).collect();
                accumulate_product(&mut acc, &scaled, &b.num);
            }
        }
        CycNum::from_parts(order, reduce(acc, order), den)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl $tr<&CycNum> for &CycNum {
            type Output = CycNum;
            fn $method(self, rhs: &CycNum) -> CycNum {
                let f: fn(&CycNum, &CycNum) -> CycNum = $body;
                f(self, rhs)
            }
        }
        impl $tr<CycNum> for CycNum {
            type Output = CycNum;
            fn $method(self, rhs: CycNum) -> CycNum {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&CycNum> for CycNum {
            type Output = CycNum;
            fn $method(self, rhs: &CycNum) -> CycNum {
                (&self).$method(rhs)
            }
        }
        impl $tr<CycNum> for &CycNum {
            type Output = CycNum;
            fn $method(self, rhs: CycNum) -> CycNum {
                self.$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, |a, b| a.add_sub(b, false));
forward_binop!(Sub, sub, |a, b| a.add_sub(b, true));
forward_binop!(Mul, mul, |a, b| a.mul_impl(b));
forward_binop!(Div, div, |a, b| a
    .checked_div(b)
    .expect("division by zero in Q(zeta)"));

impl Neg for CycNum {
    type Output = CycNum;
    fn neg(mut self) -> CycNum {
        for c in &mut self.num {
            *c = -std::mem::take(c);
        }
        self
    }
}

impl Neg for &CycNum {
    type Output = CycNum;
    fn neg(self) -> CycNum {
        -self.clone()
    }
}

impl fmt::Debug for CycNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CycNum({}; {})", self.order, self)
    }
}

impl fmt::Display for CycNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let mag_s = crate::field::display_rational(&mag);
            match i {
                0 => write!(f, "{mag_s}")?,
                _ => {
                    if !mag.is_one() {
                        write!(f, "{mag_s}*")?;
                    }
                    write!(f, "z{}", self.order)?;
                    if i > 1 {
                        write!(f, "^{i}")?;
                    }
                }
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Wire form: `{"zeta_order": m, "coeffs": ["p/q", ...]}` with exactly
/// `phi(m)` entries.
#[derive(Serialize, Deserialize)]
pub struct CycNumJson {
    pub zeta_order: u32,
    pub coeffs: Vec<String>,
}

impl From<CycNum> for CycNumJson {
    fn from(x: CycNum) -> Self {
        CycNumJson {
            zeta_order: x.order,
            coeffs: x.coeffs().iter().map(format_rational).collect(),
        }
    }
}

impl TryFrom<CycNumJson> for CycNum {
    type Error = Error;

    fn try_from(j: CycNumJson) -> Result<Self> {
        if j.zeta_order == 0 {
            return Err(Error::Parse("zeta_order must be positive".into()));
        }
        let n = phi(j.zeta_order);
        if j.coeffs.len() != n {
            return Err(Error::Parse(format!(
                "expected {n} coefficients for zeta order {}, got {}",
                j.zeta_order,
                j.coeffs.len()
            )));
        }
        let coeffs = j
            .coeffs
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>>>()?;
        Ok(CycNum::from_coeffs(j.zeta_order, &coeffs))
    }
}

/// Numeric image as an `f64` pair; `precision_bits` above 53 cannot be
/// honored by double precision and is accepted for interface compatibility.
pub fn cyc_to_complex(x: &CycNum, precision_bits: u32) -> (f64, f64) {
    assert!(precision_bits >= 53, "precision_bits must be at least 53");
    let z = x.to_complex::<f64>();
    (z.re, z.im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::rat;

    fn z(m: u32, k: i64) -> CycNum {
        CycNum::zeta(m, k)
    }

    #[test]
    fn cyclotomic_polynomials() {
        assert_eq!(&*cyclotomic_poly(1), &[-1, 1]);
        assert_eq!(&*cyclotomic_poly(3), &[1, 1, 1]);
        assert_eq!(&*cyclotomic_poly(6), &[1, -1, 1]);
        assert_eq!(&*cyclotomic_poly(12), &[1, 0, -1, 0, 1]);
        assert_eq!(phi(20), 8);
    }

    #[test]
    fn embed_examples() {
        assert_eq!(z(3, 1).embed(3).unwrap(), z(3, 1));
        assert_eq!(CycNum::one().embed(4).unwrap(), CycNum::one());
        let e = z(3, 1).embed(6).unwrap();
        assert_eq!(e.order(), 6);
        // zeta_6^2 = zeta_6 - 1 modulo x^2 - x + 1
        assert_eq!(e.coeffs(), vec![rat(-1, 1), rat(1, 1)]);
        assert!(z(3, 1).embed(4).is_err());
    }

    #[test]
    fn arithmetic_examples() {
        assert_eq!(z(3, 1) + z(3, 2), CycNum::from_integer(-1));
        assert_eq!(z(4, 1) * z(4, 1), CycNum::from_integer(-1));
        let d = z(3, 1) - z(3, 2);
        assert_eq!(&d * &d, CycNum::from_integer(-3));
        assert_eq!(z(3, 1).checked_div(&CycNum::zero()), Err(Error::DivisionByZero));
    }

    #[test]
    fn complex_images() {
        let (re, im) = cyc_to_complex(&z(4, 1), 53);
        assert!(re.abs() < 1e-15 && (im - 1.0).abs() < 1e-15);
        let (re, im) = cyc_to_complex(&(z(3, 1) - z(3, 2)), 53);
        assert!(re.abs() < 1e-15 && (im - 3f64.sqrt()).abs() < 1e-15);
        let v = CycNum::from_rational(&rat(-1, 12)).to_complex::<f64>();
        assert!((v.re + 1.0 / 12.0).abs() < 1e-16 && v.im == 0.0);
    }

    #[test]
    fn zeta_to_the_order_is_one() {
        for m in 1..=40 {
            assert_eq!(z(m, m as i64), CycNum::one(), "m = {m}");
            let mut p = CycNum::one();
            for _ in 0..m {
                p = p * z(m, 1);
            }
            assert_eq!(p, CycNum::one(), "m = {m}");
        }
    }

    #[test]
    fn inverse_and_norm() {
        let a = z(5, 1) + CycNum::from_integer(2);
        let inv = a.inv().unwrap();
        assert_eq!(&a * &inv, CycNum::one());
        assert_eq!((z(4, 1) + CycNum::one()).norm(), rat(2, 1));
    }

    #[test]
    fn dot_matches_naive_sum() {
        let a = [z(4, 1), CycNum::from_rational(&rat(1, 3)), z(5, 2)];
        let b = vec![z(5, 1).scale(&rat(2, 7)), z(4, 3), CycNum::from_integer(3)];
        let naive = a
            .iter()
            .zip(&b)
            .fold(CycNum::zero(), |acc, (x, y)| acc + x * y);
        assert_eq!(CycNum::dot(a.iter().zip(&b)), naive);
    }

    #[test]
    fn json_round_trip() {
        let x = z(5, 2).scale(&rat(-3, 4)) + CycNum::from_integer(1);
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(s, r#"{"zeta_order":5,"coeffs":["1/1","0/1","-3/4","0/1"]}"#);
        let back: CycNum = serde_json::from_str(&s).unwrap();
        assert_eq!(back, x);
        assert_eq!(serde_json::to_string(&back).unwrap(), s);
        assert!(serde_json::from_str::<CycNum>(r#"{"zeta_order":5,"coeffs":["1/1"]}"#).is_err());
    }
}
