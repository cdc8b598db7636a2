//! Dedekind eta, the generalized eta functions `eta_chi`, and eta-quotient
//! expressions `c * prod (eta_chi | V_t)^{a_{t,chi}}`.
//!
//! For a non-principal character `chi` mod `N` with conductor `u` and
//! primitive core `chi0`, `eta_chi` is the unit power series
//!
//! ```text
//! prod_{n >= 1} prod_{a in (Z/u)*} (1 - zeta_u^a q^n)^{conj(chi0(a)) conj(chi(n))}
//! ```
//!
//! built as the exponential of the character-weighted logarithm sum. For a
//! primitive character this is the defining product; for an imprimitive real
//! character it agrees with the Moebius product over `t | N`.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith;
use crate::characters::{eta_chi_level, gauss_sum, moebius, DirChar};
use crate::cyclotomic::CycNum;
use crate::error::{Error, Result};
use crate::field::{format_rational, is_integer, parse_rational, rat, Field, Rational};
use crate::qseries::{exp_from_theta, QSeries};
use crate::CycSeries;

/// `eta = q^{1/24} prod_{n >= 1} (1 - q^n)`.
pub fn eta_series(precision: usize) -> CycSeries {
    let mut c = vec![0i64; precision];
    if precision > 0 {
        c[0] = 1;
    }
    for n in 1..precision {
        for k in (n..precision).rev() {
            c[k] -= c[k - n];
        }
    }
    QSeries::new(
        rat(1, 24),
        c.into_iter().map(CycNum::from_integer).collect(),
    )
}

/// `theta eta_chi / eta_chi` computed straight from the logarithm sum:
/// the coefficient of `q^k` is `-sum_{m | k} m conj(chi(m)) g(k/m, conj(chi0))`.
/// For `1_1` this is `1/24 - sum sigma(k) q^k`.
pub fn eta_chi_log_derivative(chi: &DirChar, precision: usize) -> Result<CycSeries> {
    if chi.modulus() == 1 {
        let mut coeffs = Vec::with_capacity(precision);
        for k in 0..precision as u64 {
            coeffs.push(if k == 0 {
                CycNum::from_rational(&rat(1, 24))
            } else {
                let s: u64 = arith::divisors(k).iter().sum();
                CycNum::from_integer(-(s as i64))
            });
        }
        return Ok(QSeries::from_coeffs(coeffs));
    }
    if chi.is_principal() {
        return Err(Error::Precondition(format!(
            "eta_chi for the principal character {chi} is defined through its Moebius product"
        )));
    }
    let core = chi.primitive_core().core;
    let u = core.modulus();
    let core_bar = core.conj();
    let gauss: Vec<CycNum> = (0..u).map(|j| gauss_sum(j as i64, &core_bar)).collect();
    let chi_bar = chi.conj();
    let mut coeffs = vec![CycNum::zero(); precision];
    for (k, slot) in coeffs.iter_mut().enumerate().skip(1) {
        let mut acc = CycNum::zero();
        for m in arith::divisors(k as u64) {
            let w = chi_bar.value(m as i64);
            if w.is_zero() {
                continue;
            }
            let g = &gauss[((k as u64 / m) % u) as usize];
            acc = acc.add_ref(&w.mul_ref(g).scale(&rat(m as i64, 1)));
        }
        *slot = -acc;
    }
    Ok(QSeries::from_coeffs(coeffs))
}

/// `eta_chi` to the given precision; `1_1` gives the classical eta.
pub fn eta_chi_series(chi: &DirChar, precision: usize) -> Result<CycSeries> {
    if chi.modulus() == 1 {
        return Ok(eta_series(precision));
    }
    let h = eta_chi_log_derivative(chi, precision)?;
    Ok(QSeries::from_coeffs(exp_from_theta(h.coeffs(), precision)))
}

/// Key of one factor `(eta_chi | V_t)`; `chi` is a canonical descriptor.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EtaKey {
    pub t: u64,
    pub chi: String,
}

impl EtaKey {
    pub fn new(t: u64, chi: &DirChar) -> Self {
        EtaKey {
            t,
            chi: chi.descriptor(),
        }
    }

    pub fn character(&self) -> DirChar {
        DirChar::from_descriptor(&self.chi).expect("keys hold canonical descriptors")
    }

    pub fn is_classical(&self) -> bool {
        self.chi == "one:1"
    }
}

/// `c * prod (eta_chi | V_t)^{a_{t,chi}}` at a declared level.
#[derive(Clone, Debug, PartialEq)]
pub struct EtaQuotientExpr {
    pub level: u64,
    pub constant: CycNum,
    pub terms: BTreeMap<EtaKey, Rational>,
}

impl EtaQuotientExpr {
    pub fn new(level: u64) -> Self {
        EtaQuotientExpr {
            level,
            constant: CycNum::one(),
            terms: BTreeMap::new(),
        }
    }

    /// Adds `exp` to the exponent of `(eta_chi | V_t)`, dropping zeros.
    pub fn add_term(&mut self, t: u64, chi: &DirChar, exp: Rational) {
        let key = EtaKey::new(t, chi);
        let e = self.terms.remove(&key).unwrap_or_else(Rational::zero) + exp;
        if !e.is_zero() {
            self.terms.insert(key, e);
        }
    }

    pub fn with_term(mut self, t: u64, chi: &DirChar, exp: i64) -> Self {
        self.add_term(t, chi, rat(exp, 1));
        self
    }

    pub fn exponent(&self, t: u64, chi: &DirChar) -> Rational {
        self.terms
            .get(&EtaKey::new(t, chi))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Checks that `t u^2` divides the level for every factor.
    pub fn validate_level(&self) -> Result<()> {
        for key in self.terms.keys() {
            let u = key.character().conductor();
            if !self.level.is_multiple_of(key.t * u * u) {
                return Err(Error::Precondition(format!(
                    "factor (t = {}, {}) does not live at level {}",
                    key.t, key.chi, self.level
                )));
            }
        }
        Ok(())
    }

    pub fn has_integer_exponents(&self) -> bool {
        self.terms.values().all(is_integer)
    }

    /// Leading exponent of the expansion, `sum a_{t,1} t / 24`.
    pub fn leading_exponent(&self) -> Rational {
        self.terms
            .iter()
            .filter(|(k, _)| k.is_classical())
            .map(|(k, a)| a * rat(k.t as i64, 24))
            .fold(Rational::zero(), |acc, x| acc + x)
    }

    pub fn to_json(&self) -> EtaQuotientJson {
        EtaQuotientJson {
            level: self.level,
            constant: self.constant.clone(),
            terms: self
                .terms
                .iter()
                .map(|(k, a)| TermJson {
                    t: k.t,
                    char: k.chi.clone(),
                    exp: format_rational(a),
                })
                .collect(),
        }
    }

    pub fn from_json(j: &EtaQuotientJson) -> Result<Self> {
        let mut e = EtaQuotientExpr::new(j.level);
        e.constant = j.constant.clone();
        for term in &j.terms {
            if term.t == 0 {
                return Err(Error::Parse("term with t = 0".into()));
            }
            let chi = DirChar::from_descriptor(&term.char)?;
            e.add_term(term.t, &chi, parse_rational(&term.exp)?);
        }
        Ok(e)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("quotient serialization")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let j: EtaQuotientJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        EtaQuotientExpr::from_json(&j)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermJson {
    pub t: u64,
    pub char: String,
    pub exp: String,
}

/// Wire form `{"level": N, "constant": CycNum, "terms": [{"t", "char", "exp"}]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EtaQuotientJson {
    pub level: u64,
    pub constant: CycNum,
    pub terms: Vec<TermJson>,
}

/// The Moebius product `eta_chi = prod_{t | N} (eta_{chi0} | V_t)^{chi0(t) mu(t)}`
/// for a real character mod `N`.
pub fn eta_chi_moebius_expand(chi: &DirChar) -> Result<EtaQuotientExpr> {
    if !chi.is_real() {
        return Err(Error::NonRealCharacter(chi.descriptor()));
    }
    let core = chi.primitive_core().core;
    let mut e = EtaQuotientExpr::new(eta_chi_level(chi));
    for t in arith::divisors(chi.modulus()) {
        let mu = moebius(t);
        let c = core.value(t as i64).as_rational().expect("real character values are rational");
        let exp = c * rat(mu, 1);
        if !exp.is_zero() {
            e.add_term(t, &core, exp);
        }
    }
    Ok(e)
}

/// Memoizes `eta_chi` expansions and log-derivatives at one precision.
#[derive(Debug, Default)]
pub struct EtaCache {
    series: HashMap<(String, usize), CycSeries>,
    log_derivs: HashMap<(String, usize), CycSeries>,
}

impl EtaCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn eta_chi(&mut self, chi: &str, precision: usize) -> Result<&CycSeries> {
        let key = (chi.to_string(), precision);
        if !self.series.contains_key(&key) {
            let s = eta_chi_series(&DirChar::from_descriptor(chi)?, precision)?;
            self.series.insert(key.clone(), s);
        }
        Ok(&self.series[&key])
    }

    pub fn log_derivative(&mut self, chi: &str, precision: usize) -> Result<&CycSeries> {
        let key = (chi.to_string(), precision);
        if !self.log_derivs.contains_key(&key) {
            let s = eta_chi_log_derivative(&DirChar::from_descriptor(chi)?, precision)?;
            self.log_derivs.insert(key.clone(), s);
        }
        Ok(&self.log_derivs[&key])
    }

    /// `(eta_chi | V_t)` truncated to `precision`.
    pub fn factor(&mut self, key: &EtaKey, precision: usize) -> Result<CycSeries> {
        let inner = precision.div_ceil(key.t as usize);
        Ok(self
            .eta_chi(&key.chi, inner)?
            .v_op(key.t as usize)
            .truncate(precision))
    }

    pub fn expand(&mut self, e: &EtaQuotientExpr, precision: usize) -> Result<CycSeries> {
        let mut acc = QSeries::constant(e.constant.clone(), precision);
        for (key, a) in &e.terms {
            if !is_integer(a) {
                return Err(Error::NonIntegerExponent(format_rational(a)));
            }
            let k = i64::try_from(a.to_integer())
                .map_err(|_| Error::NonIntegerExponent(format_rational(a)))?;
            let f = self.factor(key, precision)?.int_pow(k)?;
            acc = acc.mul(&f);
        }
        Ok(acc)
    }

    /// `sum a_{t,chi} t (theta eta_chi / eta_chi | V_t)`.
    pub fn scaled_log_derivative(&mut self, key: &EtaKey, precision: usize) -> Result<CycSeries> {
        let inner = precision.div_ceil(key.t as usize);
        let t = key.t as i64;
        Ok(self
            .log_derivative(&key.chi, inner)?
            .v_op(key.t as usize)
            .truncate(precision)
            .scale(&CycNum::from_integer(t)))
    }

    pub fn quotient_log_derivative(&mut self, e: &EtaQuotientExpr, precision: usize) -> Result<CycSeries> {
        let mut acc = CycSeries::zero(precision);
        for (key, a) in &e.terms {
            let b = self.scaled_log_derivative(key, precision)?;
            acc = acc.add(&b.scale(&CycNum::from_rational(a)))?;
        }
        Ok(acc)
    }
}

/// `c * prod series_int_pow((eta_chi | V_t), a)`; all exponents must be integers.
pub fn expand_quotient(e: &EtaQuotientExpr, precision: usize) -> Result<CycSeries> {
    EtaCache::new().expand(e, precision)
}

/// `theta f / f` of the quotient; linear in the exponents, so rational
/// exponents are fine here.
pub fn quotient_log_derivative(e: &EtaQuotientExpr, precision: usize) -> Result<CycSeries> {
    EtaCache::new().quotient_log_derivative(e, precision)
}
