//! Truncated Puiseux series `q^r * (c_0 + c_1 q + ... + c_{P-1} q^{P-1}) + O(q^{r+P})`
//! over an exact coefficient field.
//!
//! The precision `P` is the number of known coefficients and is carried by
//! every result: binary operations keep the minimum of their operands.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::cyclotomic::{CycNum, CycNumJson};
use crate::error::{Error, Result};
use crate::field::{format_rational, parse_rational, Field, Rational};

#[derive(Clone, Debug, PartialEq)]
pub struct QSeries<C> {
    leading: Rational,
    coeffs: Vec<C>,
}

impl<C: Field> QSeries<C> {
    pub fn new(leading: Rational, coeffs: Vec<C>) -> Self {
        QSeries { leading, coeffs }
    }

    /// A power series (leading exponent 0).
    pub fn from_coeffs(coeffs: Vec<C>) -> Self {
        QSeries::new(Rational::zero(), coeffs)
    }

    pub fn constant(c: C, precision: usize) -> Self {
        let mut coeffs = vec![C::zero(); precision];
        if precision > 0 {
            coeffs[0] = c;
        }
        QSeries::from_coeffs(coeffs)
    }

    pub fn one(precision: usize) -> Self {
        QSeries::constant(C::one(), precision)
    }

    pub fn zero(precision: usize) -> Self {
        QSeries::constant(C::zero(), precision)
    }

    pub fn leading_exponent(&self) -> &Rational {
        &self.leading
    }

    pub fn precision(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C> {
        self.coeffs
    }

    /// Coefficient of `q^(r+n)`; panics beyond the precision.
    pub fn coeff(&self, n: usize) -> &C {
        &self.coeffs[n]
    }

    pub fn with_leading(mut self, leading: Rational) -> Self {
        self.leading = leading;
        self
    }

    pub fn truncate(mut self, precision: usize) -> Self {
        self.coeffs.truncate(precision);
        self
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Index of the first nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    /// Moves leading zero coefficients into the exponent.
    pub fn normalized(self) -> Self {
        match self.valuation() {
            Some(0) | None => self,
            Some(v) => QSeries {
                leading: self.leading + Rational::from_integer(v.into()),
                coeffs: self.coeffs[v..].to_vec(),
            },
        }
    }

    pub fn map<D: Field>(&self, f: impl Fn(&C) -> D) -> QSeries<D> {
        QSeries::new(self.leading.clone(), self.coeffs.iter().map(f).collect())
    }

    pub fn scale(&self, c: &C) -> Self {
        self.map(|x| x.mul_ref(c))
    }

    pub fn neg(&self) -> Self {
        self.map(|x| -x.clone())
    }

    fn aligned<'a>(&'a self, other: &'a Self) -> Result<(Rational, usize, usize, usize)> {
        let diff = &self.leading - &other.leading;
        if !diff.is_integer() {
            return Err(Error::IncompatibleExponents(
                format_rational(&self.leading),
                format_rational(&other.leading),
            ));
        }
        let leading = std::cmp::min(&self.leading, &other.leading).clone();
        let off_a = usize::try_from((&self.leading - &leading).to_integer()).unwrap();
        let off_b = usize::try_from((&other.leading - &leading).to_integer()).unwrap();
        let precision = std::cmp::min(off_a + self.precision(), off_b + other.precision());
        Ok((leading, off_a, off_b, precision))
    }

    fn combine(&self, other: &Self, f: impl Fn(&C, &C) -> C) -> Result<Self> {
        let (leading, off_a, off_b, precision) = self.aligned(other)?;
        let zero = C::zero();
        let coeffs = (0..precision)
            .map(|n| {
                let a = n.checked_sub(off_a).map_or(&zero, |i| &self.coeffs[i]);
                let b = n.checked_sub(off_b).map_or(&zero, |i| &other.coeffs[i]);
                f(a, b)
            })
            .collect();
        Ok(QSeries::new(leading, coeffs))
    }

    /// Sum; the leading exponents must differ by an integer.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a.add_ref(b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a.sub_ref(b))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let precision = self.precision().min(other.precision());
        QSeries::new(
            &self.leading + &other.leading,
            mul_kernel(&self.coeffs, &other.coeffs, precision),
        )
    }

    /// Quotient; the divisor's first coefficient must be nonzero.
    pub fn div(&self, other: &Self) -> Result<Self> {
        let precision = self.precision().min(other.precision());
        let coeffs = div_kernel(&self.coeffs[..precision], &other.coeffs[..precision])?;
        Ok(QSeries::new(&self.leading - &other.leading, coeffs))
    }

    pub fn inverse(&self) -> Result<Self> {
        QSeries::one(self.precision()).div(self)
    }

    /// `a^k` by square-and-multiply; negative `k` inverts first.
    pub fn int_pow(&self, k: i64) -> Result<Self> {
        let precision = self.precision();
        let mut base = if k < 0 { self.inverse()? } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = QSeries::one(precision);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        Ok(acc.with_leading(&self.leading * Rational::from_integer(k.into())))
    }

    fn require_unit_constant(&self, what: &str) -> Result<()> {
        if !self.leading.is_zero() || self.coeffs.first().is_none_or(|c| !c.is_one()) {
            return Err(Error::Precondition(format!(
                "{what} needs leading exponent 0 and constant term 1"
            )));
        }
        Ok(())
    }

    /// Formal `log(1 + x)` of a series with constant term 1.
    pub fn log(&self) -> Result<Self> {
        self.require_unit_constant("log")?;
        let a = &self.coeffs;
        let p = a.len();
        // n g_n = n a_n - sum_{k=1}^{n-1} k g_k a_{n-k}
        let mut kg: Vec<C> = vec![C::zero(); p];
        for n in 1..p {
            let s = C::dot((1..n).map(|k| (&kg[k], &a[n - k])));
            kg[n] = a[n].scale(&Rational::from_integer(n.into())).sub_ref(&s);
        }
        let coeffs = kg
            .into_iter()
            .enumerate()
            .map(|(n, c)| {
                if n == 0 {
                    C::zero()
                } else {
                    c.scale(&Rational::new(1.into(), n.into()))
                }
            })
            .collect();
        Ok(QSeries::from_coeffs(coeffs))
    }

    /// Formal `exp(x)` of a series with zero constant term.
    pub fn exp(&self) -> Result<Self> {
        if !self.leading.is_zero() || self.coeffs.first().is_some_and(|c| !c.is_zero()) {
            return Err(Error::Precondition(
                "exp needs leading exponent 0 and constant term 0".into(),
            ));
        }
        let theta: Vec<C> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| c.scale(&Rational::from_integer(n.into())))
            .collect();
        Ok(QSeries::from_coeffs(exp_from_theta(&theta, self.precision())))
    }

    /// `exp(w log a)`, the principal-branch power with exponent `w`.
    pub fn field_pow(&self, w: &C) -> Result<Self> {
        self.log()?.scale(w).exp()
    }

    /// `theta = q d/dq`: `q^r sum c_n q^n -> q^r sum (n + r) c_n q^n`.
    pub fn theta(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| c.scale(&(&self.leading + Rational::from_integer(n.into()))))
            .collect();
        QSeries::new(self.leading.clone(), coeffs)
    }

    /// `theta f / f = r + theta S / S` for `f = q^r S`.
    pub fn log_derivative(&self) -> Result<Self> {
        let s = QSeries::from_coeffs(self.coeffs.clone());
        let mut out = s.theta().div(&s).map_err(|_| Error::NonUnit)?;
        if let Some(c0) = out.coeffs.first_mut() {
            *c0 = c0.add_ref(&C::from_rational(&self.leading));
        }
        Ok(out)
    }

    /// `(f | V_t)(q) = f(q^t)`; the precision grows to `t P`.
    pub fn v_op(&self, t: usize) -> Self {
        assert!(t >= 1, "V_t needs t >= 1");
        let mut coeffs = vec![C::zero(); self.precision() * t];
        for (n, c) in self.coeffs.iter().enumerate() {
            coeffs[n * t] = c.clone();
        }
        QSeries::new(&self.leading * Rational::from_integer(t.into()), coeffs)
    }
}

/// Schoolbook product of the first `precision` coefficients.
fn mul_kernel<C: Field>(a: &[C], b: &[C], precision: usize) -> Vec<C> {
    let a_nz: Vec<usize> = (0..precision.min(a.len())).filter(|&i| !a[i].is_zero()).collect();
    (0..precision)
        .map(|n| {
            C::dot(
                a_nz.iter()
                    .take_while(|&&i| i <= n)
                    .map(|&i| (&a[i], &b[n - i])),
            )
        })
        .collect()
}

fn div_kernel<C: Field>(a: &[C], b: &[C]) -> Result<Vec<C>> {
    let b0_inv = b.first().and_then(Field::inv).ok_or(Error::NonUnit)?;
    let b_nz: Vec<usize> = (1..b.len()).filter(|&k| !b[k].is_zero()).collect();
    let mut c: Vec<C> = Vec::with_capacity(a.len());
    for n in 0..a.len() {
        let s = C::dot(
            b_nz.iter()
                .take_while(|&&k| k <= n)
                .map(|&k| (&b[k], &c[n - k])),
        );
        c.push(a[n].sub_ref(&s).mul_ref(&b0_inv));
    }
    Ok(c)
}

/// Unit power series `f` with `f_0 = 1` and `theta f / f = h` (where `h_0`
/// is ignored): `n f_n = sum_{k=1}^{n} h_k f_{n-k}`.
pub(crate) fn exp_from_theta<C: Field>(h: &[C], precision: usize) -> Vec<C> {
    let h_nz: Vec<usize> = (1..h.len().min(precision)).filter(|&k| !h[k].is_zero()).collect();
    let mut f: Vec<C> = Vec::with_capacity(precision);
    if precision == 0 {
        return f;
    }
    f.push(C::one());
    for n in 1..precision {
        let s = C::dot(
            h_nz.iter()
                .take_while(|&&k| k <= n)
                .map(|&k| (&h[k], &f[n - k])),
        );
        f.push(s.scale(&Rational::new(1.into(), n.into())));
    }
    f
}

/// Wire form of a cyclotomic series:
/// `{"zeta_order": m, "leading_exponent": "p/q", "precision": P,
///   "coeffs": [[...phi(m) rationals...], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QSeriesJson {
    pub zeta_order: u32,
    pub leading_exponent: String,
    pub precision: usize,
    pub coeffs: Vec<Vec<String>>,
}

impl QSeries<CycNum> {
    /// lcm of the coefficient orders.
    pub fn zeta_order(&self) -> u32 {
        self.coeffs
            .iter()
            .filter(|c| !c.is_zero())
            .map(CycNum::order)
            .fold(1, crate::arith::lcm_u32)
    }

    pub fn to_json(&self) -> QSeriesJson {
        let m = self.zeta_order();
        QSeriesJson {
            zeta_order: m,
            leading_exponent: format_rational(&self.leading),
            precision: self.precision(),
            coeffs: self
                .coeffs
                .iter()
                .map(|c| {
                    let c = if c.is_zero() { CycNum::zero_of(m) } else { c.embed(m).expect("order divides the lcm") };
                    CycNumJson::from(c).coeffs
                })
                .collect(),
        }
    }

    pub fn from_json(j: QSeriesJson) -> Result<Self> {
        if j.coeffs.len() != j.precision {
            return Err(Error::Parse(format!(
                "precision {} but {} coefficients",
                j.precision,
                j.coeffs.len()
            )));
        }
        let leading = parse_rational(&j.leading_exponent)?;
        let coeffs = j
            .coeffs
            .into_iter()
            .map(|c| {
                CycNum::try_from(CycNumJson {
                    zeta_order: j.zeta_order,
                    coeffs: c,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(QSeries::new(leading, coeffs))
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("series serialization")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let j: QSeriesJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        QSeries::from_json(j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::rat;
    use num_traits::One;
    use crate::CycSeries;

    fn int_series(v: &[i64]) -> CycSeries {
        QSeries::from_coeffs(v.iter().map(|&x| CycNum::from_integer(x)).collect())
    }

    fn ints(s: &CycSeries) -> Vec<i64> {
        s.coeffs()
            .iter()
            .map(|c| {
                let r = c.as_rational().unwrap();
                assert!(r.is_integer());
                i64::try_from(r.to_integer()).unwrap()
            })
            .collect()
    }

    #[test]
    fn product_and_quotient_examples() {
        let a = CycSeries::one(5).with_leading(rat(1, 24));
        let p = a.mul(&a);
        assert_eq!(p.leading_exponent(), &rat(1, 12));
        assert_eq!(ints(&p), vec![1, 0, 0, 0, 0]);

        let one_minus_q = int_series(&[1, -1, 0, 0, 0, 0]);
        assert_eq!(ints(&one_minus_q.div(&one_minus_q).unwrap()), vec![1, 0, 0, 0, 0, 0]);
        let geometric = int_series(&[1; 6]);
        assert_eq!(ints(&geometric.mul(&one_minus_q)), vec![1, 0, 0, 0, 0, 0]);
        assert_eq!(int_series(&[0, 1]).inverse(), Err(Error::NonUnit));
    }

    #[test]
    fn integer_powers() {
        let one_minus_q = int_series(&[1, -1, 0, 0]);
        assert_eq!(ints(&one_minus_q.int_pow(2).unwrap()), vec![1, -2, 1, 0]);
        assert_eq!(ints(&one_minus_q.int_pow(0).unwrap()), vec![1, 0, 0, 0]);
        assert_eq!(ints(&one_minus_q.int_pow(-1).unwrap()), vec![1, 1, 1, 1]);
        let eta_like = int_series(&[1, -1, -1, 0]).with_leading(rat(1, 24));
        assert_eq!(eta_like.int_pow(24).unwrap().leading_exponent(), &rat(1, 1));
    }

    #[test]
    fn log_and_exp() {
        let l = int_series(&[1, -1, 0, 0, 0]).log().unwrap();
        let expected: Vec<Rational> = vec![rat(0, 1), rat(-1, 1), rat(-1, 2), rat(-1, 3), rat(-1, 4)];
        let got: Vec<Rational> = l.coeffs().iter().map(|c| c.as_rational().unwrap()).collect();
        assert_eq!(got, expected);
        assert_eq!(CycSeries::zero(4).exp().unwrap(), CycSeries::one(4));

        let mut c = vec![CycNum::zero(); 50];
        c[0] = CycNum::one();
        c[1] = -CycNum::zeta(3, 1);
        let f = CycSeries::from_coeffs(c);
        assert_eq!(f.log().unwrap().exp().unwrap(), f);
        assert!(int_series(&[2, 1]).log().is_err());
        assert!(int_series(&[1, 1]).exp().is_err());
    }

    #[test]
    fn field_powers() {
        let one_minus_q = int_series(&[1, -1, 0, 0, 0]);
        assert_eq!(one_minus_q.field_pow(&CycNum::one()).unwrap(), one_minus_q);
        assert_eq!(
            one_minus_q.field_pow(&CycNum::from_integer(-1)).unwrap(),
            CycSeries::one(5).div(&one_minus_q).unwrap()
        );
        let i = CycNum::zeta(4, 1);
        let base = CycSeries::from_coeffs(vec![CycNum::one(), -i.clone(), CycNum::zero()]);
        assert_eq!(base.field_pow(&i).unwrap().coeff(1), &CycNum::one());
    }

    #[test]
    fn theta_examples() {
        let q3 = int_series(&[0, 0, 0, 1, 0]);
        assert_eq!(ints(&q3.theta()), vec![0, 0, 0, 3, 0]);
        let root = CycSeries::one(3).with_leading(rat(1, 24));
        assert_eq!(root.theta().coeff(0), &CycNum::from_rational(&rat(1, 24)));
        assert!(int_series(&[7, 0, 0]).theta().is_zero());
        assert!(int_series(&[5, 0, 0]).log_derivative().unwrap().is_zero());
    }

    #[test]
    fn v_operator() {
        let f = int_series(&[1, -1, 0]).with_leading(rat(1, 24));
        let g = f.v_op(2);
        assert_eq!(g.leading_exponent(), &rat(1, 12));
        assert_eq!(ints(&g), vec![1, 0, -1, 0, 0, 0]);
        assert_eq!(f.v_op(1), f);
    }

    #[test]
    fn add_with_integer_offset() {
        let a = int_series(&[1, 2, 3]);
        let b = int_series(&[1, 1, 1]).with_leading(rat(1, 1));
        let s = a.add(&b).unwrap();
        assert_eq!(ints(&s), vec![1, 3, 4]);
        let c = int_series(&[1]).with_leading(rat(1, 2));
        assert!(a.add(&c).is_err());
    }

    #[test]
    fn json_round_trip() {
        let mut c = vec![CycNum::zero(); 3];
        c[0] = CycNum::one();
        c[2] = CycNum::zeta(4, 1).scale(&rat(3, 5));
        let s = CycSeries::from_coeffs(c).with_leading(rat(1, 24));
        let text = s.to_json_string();
        assert_eq!(
            text,
            r#"{"zeta_order":4,"leading_exponent":"1/24","precision":3,"coeffs":[["1/1","0/1"],["0/1","0/1"],["0/1","3/5"]]}"#
        );
        let back = CycSeries::from_json_str(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_json_string(), text);
    }
}
