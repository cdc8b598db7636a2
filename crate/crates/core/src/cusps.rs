//! Cusps of `Gamma_0(N)` and exact orders of `eta_chi` at the cusps of
//! `Gamma_0(u^2)`.
//!
//! Widths use `N / gcd(c^2, N)`. Two cusps `a/c`, `a'/c'` are equivalent iff
//! some unit `s` mod `N` and sign `e` give `c' = e s c (mod N)` and
//! `a' = e s^-1 a (mod gcd(c, N))`. Both facts are checked against a direct
//! search over group elements in the tests.

use std::fmt;

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::arith::{self, gcd};
use crate::characters::DirChar;
use crate::eisenstein::l2_real;
use crate::error::{Error, Result};
use crate::field::{format_rational, rat, Rational};

/// A cusp `a/c` of `Gamma_0(level)` in lowest terms; infinity is `1/0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Cusp {
    pub a: i64,
    pub c: u64,
    pub level: u64,
    pub width: u64,
}

impl Cusp {
    /// Reduces `a/c` (any signs) and attaches the width on `Gamma_0(level)`.
    pub fn new(a: i64, c: i64, level: u64) -> Result<Cusp> {
        if a == 0 && c == 0 {
            return Err(Error::Precondition("0/0 is not a cusp".into()));
        }
        let g = gcd(a, c);
        let (mut a, mut c) = (a / g, c / g);
        if c < 0 || (c == 0 && a < 0) {
            a = -a;
            c = -c;
        }
        let c = c as u64;
        Ok(Cusp {
            a,
            c,
            level,
            width: width(c, level),
        })
    }

    pub fn infinity(level: u64) -> Cusp {
        Cusp {
            a: 1,
            c: 0,
            level,
            width: 1,
        }
    }

    pub fn is_infinity(&self) -> bool {
        self.c == 0
    }

    /// Canonical representative of this cusp's class.
    pub fn canonical(&self) -> Cusp {
        enumerate_cusps(self.level)
            .into_iter()
            .find(|s| cusp_equivalent(self, s))
            .expect("every cusp has a representative")
    }
}

impl fmt::Display for Cusp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.a, self.c) {
            (_, 0) => write!(f, "oo"),
            (0, _) => write!(f, "0"),
            (a, 1) => write!(f, "{a}"),
            (a, c) => write!(f, "{a}/{c}"),
        }
    }
}

/// Width of a cusp with denominator `c` on `Gamma_0(n)`.
pub fn width(c: u64, n: u64) -> u64 {
    let c2 = (c % n) * (c % n) % n;
    n / gcd(c2 as i64, n as i64) as u64
}

/// `sum_{d | N} phi(gcd(d, N/d))`.
pub fn cusp_count(n: u64) -> u64 {
    arith::divisors(n)
        .into_iter()
        .map(|d| arith::euler_phi(gcd(d as i64, (n / d) as i64) as u64))
        .sum()
}

/// One representative per class: `oo`, `0`, and `a/d` for `1 < d < N`
/// with `a` the least positive lift of each unit class mod `gcd(d, N/d)`.
pub fn enumerate_cusps(n: u64) -> Vec<Cusp> {
    assert!(n >= 1, "level must be positive");
    let mut out = Vec::new();
    for d in arith::divisors(n) {
        if d == n {
            out.push(Cusp::infinity(n));
            continue;
        }
        if d == 1 {
            out.push(Cusp::new(0, 1, n).unwrap());
            continue;
        }
        let g = gcd(d as i64, (n / d) as i64) as u64;
        for r in arith::units(g) {
            let r = r % g;
            let a = (0..)
                .map(|j| r + j * g)
                .find(|&a| a > 0 && gcd(a as i64, d as i64) == 1)
                .unwrap();
            out.push(Cusp::new(a as i64, d as i64, n).unwrap());
        }
    }
    out
}

/// Whether `s1` and `s2` lie in the same `Gamma_0(N)` orbit.
pub fn cusp_equivalent(s1: &Cusp, s2: &Cusp) -> bool {
    let n = s1.level;
    debug_assert_eq!(n, s2.level);
    let g = gcd(s1.c as i64, n as i64) as u64;
    if g != gcd(s2.c as i64, n as i64) as u64 {
        return false;
    }
    for s in arith::units(n) {
        let s_inv = arith::mod_inverse(s as i64, n).unwrap();
        for sign in [1i64, -1] {
            let c_ok = arith::rem(s2.c as i64 - sign * (s * s1.c % n) as i64, n) == 0;
            let a_ok = arith::rem(s2.a - sign * (s_inv as i64 % g as i64) * (s1.a % g as i64), g) == 0;
            if c_ok && a_ok {
                return true;
            }
        }
    }
    false
}

fn require_real_primitive(chi: &DirChar) -> Result<()> {
    if !chi.is_real() {
        return Err(Error::NonRealCharacter(chi.descriptor()));
    }
    if !chi.is_primitive() || chi.modulus() <= 1 {
        return Err(Error::Precondition(format!(
            "{chi} must be primitive with conductor > 1"
        )));
    }
    Ok(())
}

/// The unit `k` mod `u` with `s ~ k/u` on `Gamma_0(u^2)`, if any.
pub fn cusp_over_conductor(s: &Cusp, u: u64) -> Option<u64> {
    let n = u * u;
    if gcd(s.c as i64, n as i64) as u64 != u {
        return None;
    }
    arith::units(u)
        .into_iter()
        .find(|&k| cusp_equivalent(s, &Cusp::new(k as i64, u as i64, n).unwrap()))
}

/// Exact order `l_s` of `eta_chi` at a cusp of `Gamma_0(u^2)`, for `chi` real
/// primitive of conductor `u > 1`.
///
/// At `s ~ k/u` the constant term of `theta eta_chi / eta_chi` is
/// `chi(-k) (u / 2 pi)^2 L(2, chi^2)` and `l_s = w_s c^2` times it, with
/// `c = u` and `w_s = 1`; every other cusp has order 0. The `t | u`
/// condition behind the vanishing at `k/(t u)` comes from `t u | u^2`.
pub fn eta_chi_cusp_order(chi: &DirChar, s: &Cusp) -> Result<i64> {
    require_real_primitive(chi)?;
    let u = chi.modulus();
    if s.level != u * u {
        return Err(Error::Precondition(format!(
            "cusp {s} is on Gamma_0({}), expected Gamma_0({})",
            s.level,
            u * u
        )));
    }
    let Some(k) = cusp_over_conductor(s, u) else {
        return Ok(0);
    };
    let rep = Cusp::new(k as i64, u as i64, u * u)?;
    // chi(-k) (u / 2 pi)^2 L(2, chi^2), and (u / 2 pi)^2 L(2, chi^2) = u^2 f / 4
    let chi_k = chi.value(-(k as i64)).as_rational().expect("real values");
    let constant_term = chi_k * rat((u * u) as i64, 4) * l2_real(chi)?;
    let order: Rational = constant_term * rat((rep.width * rep.c * rep.c) as i64, 1);
    if !order.denom().is_one() {
        return Err(Error::NonIntegralOrder(format_rational(&order)));
    }
    Ok(i64::try_from(order.to_integer()).expect("order fits in i64"))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CuspOrderRow {
    pub cusp: String,
    pub width: u64,
    pub order: i64,
}

/// `(cusp, width, order)` over all cusps of `Gamma_0(u^2)`.
pub fn eta_chi_order_table(chi: &DirChar) -> Result<Vec<(Cusp, i64)>> {
    require_real_primitive(chi)?;
    let u = chi.modulus();
    enumerate_cusps(u * u)
        .into_iter()
        .map(|s| Ok((s, eta_chi_cusp_order(chi, &s)?)))
        .collect()
}

pub fn order_rows(table: &[(Cusp, i64)]) -> Vec<CuspOrderRow> {
    table
        .iter()
        .map(|(s, l)| CuspOrderRow {
            cusp: s.to_string(),
            width: s.width,
            order: *l,
        })
        .collect()
}

/// Sum of the orders over all cusp classes.
pub fn valence_sum(table: &[(Cusp, i64)]) -> i64 {
    table.iter().map(|(_, l)| l).sum()
}
