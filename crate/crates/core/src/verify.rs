//! Verification batteries behind `etaforge verify`. Each suite returns one
//! [`Check`] per item with observed and expected values.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::analytic::{eta_chi_order_numeric, multiplier_fixtures, MultiplierEstimator};
use crate::arith;
use crate::characters::{enumerate_primitive_chars, gauss_sum, DirChar};
use crate::cusps::{cusp_count, enumerate_cusps, eta_chi_cusp_order, eta_chi_order_table, valence_sum};
use crate::cyclotomic::CycNum;
use crate::decompose::{basis_labels, build_basis, column_rank, sturm_bound};
use crate::eisenstein::e2_series;
use crate::error::{Error, Result};
use crate::eta::{eta_chi_log_derivative, eta_chi_moebius_expand, eta_chi_series, expand_quotient, EtaQuotientExpr};
use crate::field::{rat, Field};
use crate::CycSeries;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Lemma1,
    Lemma2,
    Lemma3,
    Basis,
    Multiplier,
    Valence,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Lemma1,
        Suite::Lemma2,
        Suite::Lemma3,
        Suite::Basis,
        Suite::Multiplier,
        Suite::Valence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Lemma1 => "lemma1",
            Suite::Lemma2 => "lemma2",
            Suite::Lemma3 => "lemma3",
            Suite::Basis => "basis",
            Suite::Multiplier => "multiplier",
            Suite::Valence => "valence",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Suite> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown suite {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub observed: String,
    pub expected: String,
    pub tolerance: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: Suite,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tol = c.tolerance.map(|t| format!(" (tol {t:e})")).unwrap_or_default();
            writeln!(
                f,
                "{} {}: observed {}, expected {}{tol}",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.observed,
                c.expected
            )?;
        }
        write!(
            f,
            "{} {}: {}/{} checks",
            if self.passed() { "PASS" } else { "FAIL" },
            self.suite,
            self.checks.iter().filter(|c| c.pass).count(),
            self.checks.len()
        )
    }
}

pub fn run(suite: Suite) -> Result<Report> {
    let checks = match suite {
        Suite::Lemma1 => lemma1(200)?,
        Suite::Lemma2 => lemma2(100)?,
        Suite::Lemma3 => lemma3()?,
        Suite::Basis => basis()?,
        Suite::Multiplier => multiplier()?,
        Suite::Valence => valence()?,
    };
    Ok(Report { suite, checks })
}

fn exact_check(name: String, observed: &CycSeries, expected: &CycSeries) -> Check {
    let mismatch = observed
        .coeffs()
        .iter()
        .zip(expected.coeffs())
        .position(|(a, b)| a != b);
    let same = mismatch.is_none()
        && observed.precision() == expected.precision()
        && observed.leading_exponent() == expected.leading_exponent();
    Check {
        name,
        observed: match mismatch {
            None => format!("{} coefficients equal", observed.precision()),
            Some(i) => format!("first difference at q^{i}"),
        },
        expected: format!("{} coefficients equal", expected.precision()),
        tolerance: None,
        pass: same,
    }
}

/// Characters of the first battery: `1_1`, `(./3)`, `psi_4`, `(./5)` and the
/// quartic character mod 5 with `chi(2) = i`.
pub fn lemma1_characters() -> Vec<DirChar> {
    vec![
        DirChar::principal(1),
        DirChar::legendre(3).expect("3 is prime"),
        DirChar::psi4(),
        DirChar::legendre(5).expect("5 is prime"),
        DirChar::from_descriptor("chi:5:4:2=1").expect("valid descriptor"),
    ]
}

/// `theta log` of the defining product, summed term by term:
/// `-sum_{n, a, r} conj(chi(a n)) n zeta_u^{a r} q^{n r}` (for `1_1`,
/// `1/24 - sum n q^{n r}`).
pub fn product_log_derivative(chi: &DirChar, precision: usize) -> CycSeries {
    let u = chi.modulus();
    let mut c = vec![CycNum::zero(); precision];
    if u == 1 {
        if precision > 0 {
            c[0] = CycNum::from_rational(&rat(1, 24));
        }
        for n in 1..precision {
            for m in (n..precision).step_by(n) {
                c[m] = c[m].sub_ref(&CycNum::from_integer(n as i64));
            }
        }
        return CycSeries::from_coeffs(c);
    }
    let bar = chi.conj();
    for n in 1..precision {
        let cn = bar.value(n as i64);
        if cn.is_zero() {
            continue;
        }
        for a in arith::units(u) {
            let w = cn.mul_ref(bar.value(a as i64)).scale(&rat(-(n as i64), 1));
            if w.is_zero() {
                continue;
            }
            for (r, m) in (n..precision).step_by(n).enumerate() {
                let z = CycNum::zeta(u as u32, (a as i64) * (r as i64 + 1));
                c[m] = c[m].add_ref(&w.mul_ref(&z));
            }
        }
    }
    CycSeries::from_coeffs(c)
}

/// Log-derivative side against `-(g(conj chi)/2) E_2^{chi, conj chi}`, and the
/// exact `eta_chi` expansion against the product.
pub fn lemma1(precision: usize) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for chi in lemma1_characters() {
        let d = chi.descriptor();
        let product = product_log_derivative(&chi, precision);
        let g = gauss_sum(1, &chi.conj());
        let e2 = e2_series(&chi, &chi.conj(), precision).series;
        let eisenstein = e2.scale(&g.scale(&rat(-1, 2)));
        out.push(exact_check(format!("{d}: product vs Eisenstein"), &product, &eisenstein));
        let expansion = eta_chi_series(&chi, precision)?.log_derivative()?;
        out.push(exact_check(format!("{d}: expansion vs product"), &expansion, &product));
    }
    Ok(out)
}

/// Imprimitive characters checked against the Moebius product.
pub fn lemma2_characters() -> Vec<DirChar> {
    let k3 = DirChar::legendre(3).expect("3 is prime");
    let k5 = DirChar::legendre(5).expect("5 is prime");
    vec![
        k3.induced(6).expect("3 | 6"),
        k3.induced(12).expect("3 | 12"),
        k5.induced(10).expect("5 | 10"),
        DirChar::psi4().induced(12).expect("4 | 12"),
    ]
}

pub fn lemma2(precision: usize) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for chi in lemma2_characters() {
        let lhs = eta_chi_series(&chi, precision)?;
        let e = eta_chi_moebius_expand(&chi)?;
        let rhs = expand_quotient(&e, precision)?;
        out.push(exact_check(
            format!("{}: eta_chi vs Moebius product at level {}", chi.descriptor(), e.level),
            &lhs,
            &rhs,
        ));
        let ld = eta_chi_log_derivative(&chi, precision)?;
        out.push(exact_check(
            format!("{}: log-derivative vs product", chi.descriptor()),
            &ld,
            &lhs.log_derivative()?,
        ));
    }
    Ok(out)
}

pub const LEMMA3_TOLERANCE: f64 = 1e-6;

pub fn lemma3() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for chi in [
        DirChar::legendre(3).expect("3 is prime"),
        DirChar::psi4(),
        DirChar::legendre(5).expect("5 is prime"),
    ] {
        let u = chi.modulus();
        for s in enumerate_cusps(u * u) {
            let x: f64 = eta_chi_order_numeric(&chi, &s)?;
            let l = eta_chi_cusp_order(&chi, &s)?;
            let dev = (x - l as f64).abs();
            out.push(Check {
                name: format!("{} at {s} on Gamma_0({})", chi.descriptor(), u * u),
                observed: format!("{x:.16e}"),
                expected: l.to_string(),
                tolerance: Some(LEMMA3_TOLERANCE),
                pass: dev < LEMMA3_TOLERANCE,
            });
        }
    }
    Ok(out)
}

pub const BASIS_LEVELS: [u64; 6] = [9, 12, 16, 18, 25, 50];

pub fn basis() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for n in BASIS_LEVELS {
        let sb = sturm_bound(n);
        let b = build_basis(n, sb + 1)?;
        let cols: Vec<Vec<CycNum>> = b.iter().map(|(_, s)| s.coeffs().to_vec()).collect();
        let rank = column_rank(&cols, sb + 1);
        out.push(Check {
            name: format!("N = {n}: rank on q^0..q^{sb}"),
            observed: rank.to_string(),
            expected: cols.len().to_string(),
            tolerance: None,
            pass: rank == cols.len(),
        });
        let (nb, nc) = (basis_labels(n).len() as u64, cusp_count(n));
        out.push(Check {
            name: format!("N = {n}: basis size vs cusps"),
            observed: nb.to_string(),
            expected: nc.to_string(),
            tolerance: None,
            pass: nb == nc,
        });
    }
    Ok(out)
}

pub const MULTIPLIER_TOLERANCE: f64 = 1e-4;

pub fn multiplier() -> Result<Vec<Check>> {
    let mut est = MultiplierEstimator::<f64>::default();
    let mut out = Vec::new();
    for chi in [
        DirChar::legendre(3).expect("3 is prime"),
        DirChar::psi4(),
        DirChar::legendre(5).expect("5 is prime"),
    ] {
        let n = chi.modulus() * chi.modulus();
        let e = EtaQuotientExpr::new(n).with_term(1, &chi, 1);
        for g in multiplier_fixtures(n) {
            let nu = est.estimate_default(&e, &g)?;
            let dev = (nu.powi(12) - Complex::new(1.0, 0.0)).norm();
            out.push(Check {
                name: format!(
                    "{} on [[{}, {}], [{}, {}]]",
                    chi.descriptor(),
                    g.a,
                    g.b,
                    g.c,
                    g.d
                ),
                observed: format!("|nu^12 - 1| = {dev:.16e}"),
                expected: "0".into(),
                tolerance: Some(MULTIPLIER_TOLERANCE),
                pass: dev < MULTIPLIER_TOLERANCE,
            });
        }
    }
    Ok(out)
}

pub fn valence() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for u in 3..=12u64 {
        for chi in enumerate_primitive_chars(u).into_iter().filter(DirChar::is_real) {
            let (observed, pass) = match eta_chi_order_table(&chi) {
                Ok(t) => {
                    let s = valence_sum(&t);
                    (format!("integral orders, sum {s}"), s == 0)
                }
                Err(e) => (e.to_string(), false),
            };
            out.push(Check {
                name: format!("{} on Gamma_0({})", chi.descriptor(), u * u),
                observed,
                expected: "integral orders, sum 0".into(),
                tolerance: None,
                pass,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("lemma4".parse::<Suite>().is_err());
    }

    #[test]
    fn small_batteries_pass() {
        for c in lemma1(30).unwrap().into_iter().chain(lemma2(30).unwrap()) {
            assert!(c.pass, "{c:?}");
        }
        assert!(run(Suite::Valence).unwrap().passed());
    }

    #[test]
    fn exact_check_reports_first_difference() {
        let a = CycSeries::one(5);
        let mut c = a.coeffs().to_vec();
        c[3] = CycNum::from_integer(2);
        let b = CycSeries::from_coeffs(c);
        let chk = exact_check("x".into(), &a, &b);
        assert!(!chk.pass);
        assert_eq!(chk.observed, "first difference at q^3");
    }
}
