//! Decomposition of a modular function with cuspidal divisor on `Gamma_0(N)`
//! into generalized eta-quotients by matching `theta f / f` against the
//! scaled log-derivatives `B_{t,chi} = t (theta eta_chi / eta_chi) | V_t`.

use std::collections::HashMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, is_squarefree};
use crate::characters::{enumerate_primitive_chars, DirChar};
use crate::cyclotomic::CycNum;
use crate::error::{Error, Result};
use crate::eta::{EtaCache, EtaKey, EtaQuotientExpr, EtaQuotientJson};
use crate::field::{rat, Field, Rational};
use crate::qseries::QSeriesJson;
use crate::CycSeries;

/// Which shape of level the input has, and so whether decomposition of a
/// function with cuspidal divisor is guaranteed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LevelClass {
    SquareFree,
    /// `4M` or `8M`, `M` odd square-free.
    Thm3,
    /// `9M` or `27M`, `M` square-free prime to 3.
    Thm4_3,
    /// `16M` or `32M`, `M` odd square-free.
    Thm4_4,
    /// `25M` or `125M`, `M` square-free prime to 5.
    Thm4_5,
    Unsupported,
}

impl LevelClass {
    pub fn is_supported(self) -> bool {
        self != LevelClass::Unsupported
    }
}

impl fmt::Display for LevelClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

fn split_power(n: u64, p: u64) -> (u32, u64) {
    let (mut k, mut m) = (0, n);
    while m % p == 0 {
        m /= p;
        k += 1;
    }
    (k, m)
}

pub fn supported_level(n: u64) -> LevelClass {
    if is_squarefree(n) {
        return LevelClass::SquareFree;
    }
    for (p, lo, hi, class) in [
        (2, 2, 3, LevelClass::Thm3),
        (3, 2, 3, LevelClass::Thm4_3),
        (2, 4, 5, LevelClass::Thm4_4),
        (5, 2, 3, LevelClass::Thm4_5),
    ] {
        let (k, m) = split_power(n, p);
        if (lo..=hi).contains(&k) && is_squarefree(m) {
            return class;
        }
    }
    LevelClass::Unsupported
}

/// `ceil(N prod_{p | N} (1 + 1/p) / 6) + 1`, the weight-2 Sturm bound plus one.
pub fn sturm_bound(n: u64) -> usize {
    let index = arith::prime_divisors(n)
        .into_iter()
        .fold(n, |acc, p| acc / p * (p + 1));
    index.div_ceil(6) as usize + 1
}

/// Labels `(t, chi)` with `chi` primitive of conductor `u` and `t u^2 | N`:
/// first `(t, 1)` for every `t | N`, then the generalized ones.
pub fn basis_labels(n: u64) -> Vec<EtaKey> {
    let one = DirChar::principal(1);
    let mut out: Vec<EtaKey> = arith::divisors(n).into_iter().map(|t| EtaKey::new(t, &one)).collect();
    for u in 3..=n {
        if !n.is_multiple_of(u * u) {
            if u * u > n {
                break;
            }
            continue;
        }
        for chi in enumerate_primitive_chars(u) {
            for t in arith::divisors(n / (u * u)) {
                out.push(EtaKey::new(t, &chi));
            }
        }
    }
    out
}

/// `(label, B_{t,chi})` for every label of [`basis_labels`].
pub fn build_basis(n: u64, precision: usize) -> Result<Vec<(EtaKey, CycSeries)>> {
    let mut cache = EtaCache::new();
    basis_labels(n)
        .into_iter()
        .map(|k| {
            let b = cache.scaled_log_derivative(&k, precision)?;
            Ok((k, b))
        })
        .collect()
}

/// Which basis columns the solver may use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BasisChoice {
    Full,
    /// Only `(t, 1)` labels: classical eta-quotients.
    Classical,
}

#[derive(Clone, Debug)]
pub struct DecompositionProblem {
    pub level: u64,
    pub weight: i64,
    pub input: CycSeries,
    pub precision: usize,
}

impl DecompositionProblem {
    /// Uses the full precision of `input`, which must reach the Sturm bound
    /// plus 10, and normalizes away leading zero coefficients.
    pub fn new(level: u64, weight: i64, input: CycSeries) -> Result<Self> {
        if level == 0 {
            return Err(Error::Precondition("level must be positive".into()));
        }
        let input = input.normalized();
        let need = sturm_bound(level) + 10;
        if input.precision() < need {
            return Err(Error::PrecisionTooLow {
                got: input.precision(),
                need,
            });
        }
        if input.coeff(0).is_zero() {
            return Err(Error::NonUnit);
        }
        let precision = input.precision();
        Ok(DecompositionProblem {
            level,
            weight,
            input,
            precision,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionResult {
    pub class: LevelClass,
    /// Exponents and constant for the input itself.
    pub expr: EtaQuotientExpr,
    /// Exponents for the weight-0 object `f^12 / Delta^k` (equal to `expr`'s
    /// when `k = 0`).
    pub raw: EtaQuotientExpr,
    /// `theta F / F - sum x B` with `F` the weight-0 object.
    pub residual: CycSeries,
    pub first_nonzero_residual: Option<usize>,
    pub rank: usize,
    pub columns: usize,
    /// Residual identically zero and the re-expanded quotient equal to the
    /// input through the precision.
    pub certified: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecompositionJson {
    pub level: u64,
    pub weight: i64,
    pub class: LevelClass,
    pub certified: bool,
    pub rank: usize,
    pub columns: usize,
    pub expr: EtaQuotientJson,
    pub raw: EtaQuotientJson,
    pub first_nonzero_residual: Option<usize>,
    pub residual: QSeriesJson,
}

impl DecompositionResult {
    pub fn to_json(&self, weight: i64) -> DecompositionJson {
        DecompositionJson {
            level: self.expr.level,
            weight,
            class: self.class,
            certified: self.certified,
            rank: self.rank,
            columns: self.columns,
            expr: self.expr.to_json(),
            raw: self.raw.to_json(),
            first_nonzero_residual: self.first_nonzero_residual,
            residual: self.residual.to_json(),
        }
    }
}

/// Solution of an overdetermined system by exact elimination.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution<C> {
    pub x: Vec<C>,
    pub rank: usize,
    /// Rows used as pivots, in order of selection.
    pub pivot_rows: Vec<usize>,
}

/// Solves `sum_j x_j columns[j][i] = rhs[i]` by scanning rows top-down and
/// keeping each row that raises the rank, until the rank is full. Free
/// variables of a deficient system are set to zero; consistency on the
/// remaining rows is left to the caller.
pub fn solve_columns<C: Field>(columns: &[Vec<C>], rhs: &[C]) -> Solution<C> {
    let m = columns.len();
    let mut pivots: Vec<(usize, Vec<C>)> = Vec::new();
    let mut pivot_rows = Vec::new();
    for (i, b) in rhs.iter().enumerate() {
        if pivots.len() == m {
            break;
        }
        let mut row: Vec<C> = columns.iter().map(|c| c[i].clone()).collect();
        row.push(b.clone());
        for (p, prow) in &pivots {
            let f = row[*p].clone();
            if !f.is_zero() {
                for j in 0..=m {
                    if !prow[j].is_zero() {
                        row[j] = row[j].sub_ref(&f.mul_ref(&prow[j]));
                    }
                }
            }
        }
        if let Some(p) = (0..m).find(|&j| !row[j].is_zero()) {
            let inv = row[p].inv().expect("nonzero pivot");
            for v in row.iter_mut() {
                *v = v.mul_ref(&inv);
            }
            pivots.push((p, row));
            pivot_rows.push(i);
        }
    }
    let mut x = vec![C::zero(); m];
    for (p, row) in pivots.iter().rev() {
        let mut v = row[m].clone();
        for j in 0..m {
            if j != *p && !row[j].is_zero() && !x[j].is_zero() {
                v = v.sub_ref(&row[j].mul_ref(&x[j]));
            }
        }
        x[*p] = v;
    }
    Solution {
        x,
        rank: pivots.len(),
        pivot_rows,
    }
}

/// Rank of the first `rows` coefficient rows of the given columns.
pub fn column_rank<C: Field>(columns: &[Vec<C>], rows: usize) -> usize {
    let cut: Vec<Vec<C>> = columns.iter().map(|c| c[..rows].to_vec()).collect();
    solve_columns(&cut, &vec![C::zero(); rows]).rank
}

/// Common cyclotomic order for a batch of numbers.
fn common_order<'a>(xs: impl Iterator<Item = &'a CycNum>) -> u32 {
    xs.fold(1, |m, x| arith::lcm_u32(m, x.order()))
}

fn embed_all(xs: &[CycNum], order: u32) -> Vec<CycNum> {
    xs.iter()
        .map(|x| x.embed(order).expect("order divides the common order"))
        .collect()
}

struct Basis {
    labels: Vec<EtaKey>,
    series: Vec<CycSeries>,
}

/// Decomposes inputs while reusing basis expansions across problems.
#[derive(Default)]
pub struct Decomposer {
    cache: EtaCache,
    bases: HashMap<(u64, usize, BasisChoice), Basis>,
}

impl Decomposer {
    pub fn new() -> Self {
        Self::default()
    }

    fn basis(&mut self, n: u64, precision: usize, choice: BasisChoice) -> Result<&Basis> {
        let key = (n, precision, choice);
        if !self.bases.contains_key(&key) {
            let labels: Vec<EtaKey> = basis_labels(n)
                .into_iter()
                .filter(|k| choice == BasisChoice::Full || k.is_classical())
                .collect();
            let series = labels
                .iter()
                .map(|k| self.cache.scaled_log_derivative(k, precision))
                .collect::<Result<Vec<_>>>()?;
            self.bases.insert(key, Basis { labels, series });
        }
        Ok(&self.bases[&key])
    }

    pub fn decompose(&mut self, p: &DecompositionProblem) -> Result<DecompositionResult> {
        self.decompose_with(p, BasisChoice::Full)
    }

    pub fn decompose_with(&mut self, p: &DecompositionProblem, choice: BasisChoice) -> Result<DecompositionResult> {
        let prec = p.precision;
        let f = p.input.clone().truncate(prec);
        let k = p.weight;
        let one = DirChar::principal(1);
        let delta_key = EtaKey::new(1, &one);

        // theta F / F for F = f^12 / Delta^k
        let mut target = f.log_derivative()?;
        if k != 0 {
            let b1 = self.cache.scaled_log_derivative(&delta_key, prec)?;
            target = target
                .scale(&CycNum::from_integer(12))
                .sub(&b1.scale(&CycNum::from_integer(24 * k)))?;
        }

        let basis = self.basis(p.level, prec, choice)?;
        let order = common_order(
            basis
                .series
                .iter()
                .flat_map(|s| s.coeffs().iter())
                .chain(target.coeffs().iter()),
        );
        let columns: Vec<Vec<CycNum>> = basis.series.iter().map(|s| embed_all(s.coeffs(), order)).collect();
        let rhs = embed_all(target.coeffs(), order);
        let sol = solve_columns(&columns, &rhs);

        let mut fitted = CycSeries::zero(prec);
        for (x, s) in sol.x.iter().zip(&basis.series) {
            if !x.is_zero() {
                fitted = fitted.add(&s.scale(x))?;
            }
        }
        let residual = target.sub(&fitted)?;
        let first_nonzero_residual = residual.coeffs().iter().position(|c| !c.is_zero());

        let constant = f.coeff(0).clone();
        let mut raw = EtaQuotientExpr::new(p.level);
        let mut expr = EtaQuotientExpr::new(p.level);
        let mut rational = true;
        for (label, x) in basis.labels.iter().zip(&sol.x) {
            let Some(b) = x.as_rational() else {
                rational = false;
                continue;
            };
            let chi = label.character();
            raw.add_term(label.t, &chi, b.clone());
            let shift = if *label == delta_key { rat(24 * k, 1) } else { Rational::zero() };
            expr.add_term(label.t, &chi, (b + shift) / rat(12, 1));
        }
        if k == 0 {
            expr = raw.clone();
        }
        expr.constant = constant.clone();
        raw.constant = constant.pow_i64(12);

        let columns_used = basis.labels.len();
        let mut certified = rational && first_nonzero_residual.is_none();
        if certified {
            certified = if expr.has_integer_exponents() {
                verify_with(&mut self.cache, &expr, &f)?
            } else if raw.has_integer_exponents() {
                let weight0 = weight_zero_object(&mut self.cache, &f, k)?;
                verify_with(&mut self.cache, &raw, &weight0)?
            } else {
                false
            };
        }
        Ok(DecompositionResult {
            class: supported_level(p.level),
            expr,
            raw,
            residual,
            first_nonzero_residual,
            rank: sol.rank,
            columns: columns_used,
            certified,
        })
    }
}

/// `f^12 / Delta^k`.
fn weight_zero_object(cache: &mut EtaCache, f: &CycSeries, k: i64) -> Result<CycSeries> {
    let prec = f.precision();
    let delta = EtaQuotientExpr::new(1).with_term(1, &DirChar::principal(1), 24 * k);
    let d = cache.expand(&delta, prec)?;
    f.int_pow(12)?.div(&d)
}

fn verify_with(cache: &mut EtaCache, e: &EtaQuotientExpr, target: &CycSeries) -> Result<bool> {
    if !e.has_integer_exponents() {
        return Err(Error::NonIntegerExponent(
            "verification needs integer exponents".into(),
        ));
    }
    let prec = target.precision();
    let g = cache.expand(e, prec)?;
    Ok(g.leading_exponent() == target.leading_exponent() && g.coeffs() == target.coeffs())
}

/// Exact equality of the re-expanded quotient with `target` through the
/// precision of `target`.
pub fn verify_quotient(e: &EtaQuotientExpr, target: &CycSeries) -> Result<bool> {
    verify_with(&mut EtaCache::new(), e, target)
}

/// One-shot decomposition with the full basis.
pub fn decompose(p: &DecompositionProblem) -> Result<DecompositionResult> {
    Decomposer::new().decompose(p)
}

trait PowI64 {
    fn pow_i64(&self, k: i64) -> Self;
}

impl PowI64 for CycNum {
    fn pow_i64(&self, k: i64) -> Self {
        let mut acc = CycNum::one();
        for _ in 0..k {
            acc = acc.mul_ref(self);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cusps::cusp_count;
    use crate::eta::{eta_chi_series, expand_quotient};
    use crate::field::Rational;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn one() -> DirChar {
        DirChar::principal(1)
    }

    #[test]
    fn level_classes() {
        use LevelClass::*;
        let cases = [
            (1, SquareFree),
            (6, SquareFree),
            (12, Thm3),
            (24, Thm3),
            (8, Thm3),
            (18, Thm4_3),
            (27, Thm4_3),
            (9, Thm4_3),
            (16, Thm4_4),
            (48, Thm4_4),
            (25, Thm4_5),
            (50, Thm4_5),
            (36, Unsupported),
            (64, Unsupported),
            (81, Unsupported),
            (20, Thm3),
            (100, Unsupported),
        ];
        for (n, c) in cases {
            assert_eq!(supported_level(n), c, "N = {n}");
        }
    }

    #[test]
    fn sturm_bounds() {
        assert_eq!(sturm_bound(9), 3);
        assert_eq!(sturm_bound(1), 2);
        assert_eq!(sturm_bound(25), 6);
        assert_eq!(sturm_bound(50), 16);
    }

    #[test]
    fn basis_sizes_match_cusp_counts() {
        let names: Vec<String> = basis_labels(9).iter().map(|k| format!("{}:{}", k.t, k.chi)).collect();
        assert_eq!(names, ["1:one:1", "3:one:1", "9:one:1", "1:kronecker:3"]);
        assert_eq!(basis_labels(25).len(), 6);
        assert!(basis_labels(30).iter().all(EtaKey::is_classical));
        for n in [9u64, 12, 16, 18, 25, 50] {
            assert_eq!(basis_labels(n).len() as u64, cusp_count(n), "N = {n}");
        }
    }

    #[test]
    fn solver_on_small_systems() {
        let r = |n: i64| rat(n, 1);
        // x + y = 3, x - y = 1, 2x = 4
        let cols = vec![vec![r(1), r(1), r(2)], vec![r(1), r(-1), r(0)]];
        let s = solve_columns(&cols, &[r(3), r(1), r(4)]);
        assert_eq!(s.x, vec![r(2), r(1)]);
        assert_eq!(s.rank, 2);
        assert_eq!(s.pivot_rows, vec![0, 1]);
        // second column dependent
        let cols = vec![vec![r(1), r(2)], vec![r(2), r(4)]];
        assert_eq!(column_rank(&cols, 2), 1);
    }

    #[test]
    fn delta_ratio() {
        let e = EtaQuotientExpr::new(2).with_term(2, &one(), 24).with_term(1, &one(), -24);
        let f = expand_quotient(&e, 30).unwrap();
        let p = DecompositionProblem::new(2, 0, f).unwrap();
        let r = decompose(&p).unwrap();
        assert!(r.certified);
        assert_eq!(r.expr, e);
        assert!(r.residual.is_zero());
    }

    #[test]
    fn constant_input() {
        let f = CycSeries::one(20);
        let r = decompose(&DecompositionProblem::new(1, 0, f).unwrap()).unwrap();
        assert!(r.certified && r.expr.terms.is_empty());
        assert_eq!(r.expr.constant, CycNum::one());
    }

    #[test]
    fn weight_reduction() {
        // eta(tau)^4 eta(3 tau)^2 has weight 3
        let e = EtaQuotientExpr::new(3).with_term(1, &one(), 4).with_term(3, &one(), 2);
        let f = expand_quotient(&e, 30).unwrap().scale(&CycNum::from_integer(5));
        let r = decompose(&DecompositionProblem::new(3, 3, f.clone()).unwrap()).unwrap();
        assert!(r.certified);
        assert_eq!(r.expr.terms, e.terms);
        assert_eq!(r.expr.constant, CycNum::from_integer(5));
        assert_eq!(r.raw.exponent(1, &one()), rat(48 - 72, 1));
        assert_eq!(r.raw.exponent(3, &one()), rat(24, 1));
        let plain = decompose(&DecompositionProblem::new(3, 0, f).unwrap()).unwrap();
        for (key, a) in &plain.expr.terms {
            let b = &r.raw.terms[key];
            let shift = if key.t == 1 { rat(72, 1) } else { Rational::zero() };
            assert_eq!((b + shift) / rat(12, 1), *a);
        }
    }

    #[test]
    fn odd_exponent_sum_still_recovers() {
        // exponents come back through the rescaling whatever k is declared
        let e = EtaQuotientExpr::new(2).with_term(1, &one(), 2).with_term(2, &one(), 1);
        let f = expand_quotient(&e, 30).unwrap();
        let r = decompose(&DecompositionProblem::new(2, 1, f).unwrap()).unwrap();
        assert!(r.certified);
        assert_eq!(r.expr.terms, e.terms);
    }

    #[test]
    fn generalized_eta_needs_generalized_basis() {
        let chi = DirChar::legendre(3).unwrap();
        let f = eta_chi_series(&chi, 30).unwrap().int_pow(12).unwrap();
        let p = DecompositionProblem::new(9, 0, f).unwrap();
        let mut d = Decomposer::new();
        let full = d.decompose(&p).unwrap();
        assert!(full.certified);
        assert_eq!(full.expr, EtaQuotientExpr::new(9).with_term(1, &chi, 12));
        let classical = d.decompose_with(&p, BasisChoice::Classical).unwrap();
        assert!(!classical.certified);
        assert!(classical.first_nonzero_residual.unwrap() <= sturm_bound(9));
    }

    #[test]
    fn round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut d = Decomposer::new();
        for n in [6u64, 9, 16, 25] {
            let labels = basis_labels(n);
            let prec = sturm_bound(n) + 10;
            for _ in 0..5 {
                let mut e = EtaQuotientExpr::new(n);
                for k in &labels {
                    e.add_term(k.t, &k.character(), rat(rng.gen_range(-4..=4), 1));
                }
                e.constant = CycNum::from_integer(rng.gen_range(1..=9));
                let f = expand_quotient(&e, prec).unwrap();
                let r = d.decompose(&DecompositionProblem::new(n, 0, f).unwrap()).unwrap();
                assert!(r.certified, "N = {n}");
                assert_eq!(r.expr, e);
            }
        }
    }

    #[test]
    fn verification_detects_perturbations() {
        let chi = DirChar::legendre(5).unwrap();
        let e = EtaQuotientExpr::new(25).with_term(1, &one(), 2).with_term(5, &one(), -2).with_term(1, &chi, 3);
        let f = expand_quotient(&e, 20).unwrap();
        assert!(verify_quotient(&e, &f).unwrap());
        let mut bumped = e.clone();
        bumped.add_term(1, &chi, rat(1, 1));
        let g = expand_quotient(&bumped, 20).unwrap();
        let first = f.coeffs().iter().zip(g.coeffs()).position(|(a, b)| a != b).unwrap();
        assert!(first <= sturm_bound(25));
        assert!(!verify_quotient(&bumped, &f).unwrap());
        let mut scaled = e.clone();
        scaled.constant = CycNum::from_integer(2);
        assert!(!verify_quotient(&scaled, &f).unwrap());
    }

    #[test]
    fn rejects_bad_problems() {
        assert!(matches!(
            DecompositionProblem::new(25, 0, CycSeries::one(10)),
            Err(Error::PrecisionTooLow { .. })
        ));
        assert!(matches!(
            DecompositionProblem::new(1, 0, CycSeries::zero(20)),
            Err(Error::NonUnit)
        ));
    }
}
