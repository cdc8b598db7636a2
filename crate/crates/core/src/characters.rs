//! Dirichlet characters with exact cyclotomic values.
//!
//! A character mod `N` of order `r` is stored as a table of exponents `k`
//! with `chi(a) = zeta_r^k` for units `a`, together with the matching
//! `CycNum` values for constant-time lookup. Non-units map to the rational
//! zero.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arith::{self, gcd, lcm_u32};
use crate::cyclotomic::CycNum;
use crate::error::{Error, Result};

pub use crate::arith::moebius;

#[derive(Clone)]
pub struct DirChar {
    modulus: u64,
    order: u32,
    exps: Vec<Option<u32>>,
    values: Vec<CycNum>,
    conductor: u64,
}

/// `chi = core * 1_N`, with `core` primitive of modulus `conductor(chi)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimitiveDecomposition {
    pub core: DirChar,
    pub induced_modulus: u64,
}

/// Wire form `{"modulus": N, "order": r, "gens": [[g, k], ...]}`,
/// meaning `chi(g) = zeta_r^k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharJson {
    pub modulus: u64,
    pub order: u32,
    pub gens: Vec<(u64, u32)>,
}

impl DirChar {
    /// Builds from a full exponent table relative to `zeta_base`.
    fn from_table(modulus: u64, base: u32, table: Vec<Option<u32>>) -> DirChar {
        let g = table
            .iter()
            .flatten()
            .fold(base as i64, |acc, &k| gcd(acc, k as i64)) as u32;
        let order = base / g;
        let exps: Vec<Option<u32>> = table.into_iter().map(|e| e.map(|k| k / g)).collect();
        let values = exps
            .iter()
            .map(|e| match e {
                Some(k) => CycNum::zeta(order, *k as i64),
                None => CycNum::from_integer(0),
            })
            .collect();
        let mut chi = DirChar {
            modulus,
            order,
            exps,
            values,
            conductor: modulus,
        };
        chi.conductor = chi.compute_conductor();
        chi
    }

    pub fn principal(modulus: u64) -> DirChar {
        assert!(modulus >= 1, "modulus must be positive");
        let table = (0..modulus)
            .map(|a| (gcd(a as i64, modulus as i64) == 1).then_some(0))
            .collect();
        DirChar::from_table(modulus, 1, table)
    }

    /// The Legendre symbol `(./p)` for an odd prime `p`.
    pub fn legendre(p: u64) -> Result<DirChar> {
        if p < 3 || !arith::is_prime(p) {
            return Err(Error::Descriptor(format!("kronecker:{p}")));
        }
        let table = (0..p)
            .map(|a| match a {
                0 => None,
                _ => Some(if arith::pow_mod(a, (p - 1) / 2, p) == 1 { 0 } else { 1 }),
            })
            .collect();
        Ok(DirChar::from_table(p, 2, table))
    }

    /// The non-principal character mod 4.
    pub fn psi4() -> DirChar {
        DirChar::from_table(4, 2, vec![None, Some(0), None, Some(1)])
    }

    /// Builds the character with `chi(g) = zeta_order^k` for each listed
    /// generator, closing under multiplication.
    pub fn from_generators(modulus: u64, order: u32, gens: &[(u64, u32)]) -> Result<DirChar> {
        if modulus == 0 || order == 0 {
            return Err(Error::InconsistentCharacter(
                "modulus and order must be positive".into(),
            ));
        }
        for &(g, _) in gens {
            if gcd(g as i64, modulus as i64) != 1 {
                return Err(Error::InconsistentCharacter(format!(
                    "generator {g} is not a unit mod {modulus}"
                )));
            }
        }
        let mut table: Vec<Option<u32>> = vec![None; modulus as usize];
        table[(1 % modulus) as usize] = Some(0);
        let mut queue = VecDeque::from([1 % modulus]);
        while let Some(x) = queue.pop_front() {
            let ex = table[x as usize].unwrap();
            for &(g, k) in gens {
                let y = (x * (g % modulus)) % modulus;
                let e = (ex + k % order) % order;
                match table[y as usize] {
                    Some(prev) if prev != e => {
                        return Err(Error::InconsistentCharacter(format!(
                            "generator assignments disagree at residue {y} mod {modulus}"
                        )))
                    }
                    Some(_) => {}
                    None => {
                        table[y as usize] = Some(e);
                        queue.push_back(y);
                    }
                }
            }
        }
        for a in 0..modulus {
            if gcd(a as i64, modulus as i64) == 1 && table[a as usize].is_none() {
                return Err(Error::InconsistentCharacter(format!(
                    "generators do not generate (Z/{modulus})*"
                )));
            }
        }
        Ok(DirChar::from_table(modulus, order, table))
    }

    pub fn from_json(j: &CharJson) -> Result<DirChar> {
        DirChar::from_generators(j.modulus, j.order, &j.gens)
    }

    pub fn to_json(&self) -> CharJson {
        CharJson {
            modulus: self.modulus,
            order: self.order,
            gens: self.generator_values(),
        }
    }

    /// Parses `one:N`, `kronecker:p`, `psi4` or `chi:N:r:g=k,g=k,...`.
    pub fn from_descriptor(s: &str) -> Result<DirChar> {
        let bad = || Error::Descriptor(s.to_string());
        let s = s.trim();
        if s == "psi4" {
            return Ok(DirChar::psi4());
        }
        let (head, rest) = s.split_once(':').ok_or_else(bad)?;
        match head {
            "one" => {
                let n: u64 = rest.parse().map_err(|_| bad())?;
                if n == 0 {
                    return Err(bad());
                }
                Ok(DirChar::principal(n))
            }
            "kronecker" => {
                let p: u64 = rest.parse().map_err(|_| bad())?;
                DirChar::legendre(p).map_err(|_| bad())
            }
            "chi" => {
                let mut parts = rest.splitn(3, ':');
                let n: u64 = parts.next().and_then(|x| x.parse().ok()).ok_or_else(bad)?;
                let r: u32 = parts.next().and_then(|x| x.parse().ok()).ok_or_else(bad)?;
                let gens = parts
                    .next()
                    .unwrap_or("")
                    .split(',')
                    .filter(|x| !x.is_empty())
                    .map(|pair| {
                        let (g, k) = pair.split_once('=').ok_or_else(bad)?;
                        Ok((
                            g.trim().parse().map_err(|_| bad())?,
                            k.trim().parse().map_err(|_| bad())?,
                        ))
                    })
                    .collect::<Result<Vec<(u64, u32)>>>()?;
                DirChar::from_generators(n, r, &gens)
            }
            _ => Err(bad()),
        }
    }

    /// Canonical descriptor, accepted back by [`DirChar::from_descriptor`].
    pub fn descriptor(&self) -> String {
        if self.is_principal() {
            return format!("one:{}", self.modulus);
        }
        if self.modulus == 4 {
            return "psi4".into();
        }
        if self.order == 2 && arith::is_prime(self.modulus) {
            return format!("kronecker:{}", self.modulus);
        }
        let gens: Vec<String> = self
            .generator_values()
            .iter()
            .map(|(g, k)| format!("{g}={k}"))
            .collect();
        format!("chi:{}:{}:{}", self.modulus, self.order, gens.join(","))
    }

    fn generator_values(&self) -> Vec<(u64, u32)> {
        greedy_generators(self.modulus)
            .into_iter()
            .map(|g| (g, self.exps[g as usize].unwrap()))
            .collect()
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Order of the character: all values are powers of `zeta_order`.
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn is_principal(&self) -> bool {
        self.order == 1
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor == self.modulus
    }

    pub fn is_real(&self) -> bool {
        self.order <= 2
    }

    /// `chi(-1)` as `+1` or `-1`.
    pub fn parity(&self) -> i64 {
        match self.exps[(self.modulus - 1) as usize] {
            Some(0) => 1,
            _ => -1,
        }
    }

    /// `chi(n)`, zero when `gcd(n, N) > 1`.
    pub fn value(&self, n: i64) -> &CycNum {
        &self.values[arith::rem(n, self.modulus) as usize]
    }

    /// `k` with `chi(n) = zeta_order^k`, `None` off the unit group.
    pub fn exponent(&self, n: i64) -> Option<u32> {
        self.exps[arith::rem(n, self.modulus) as usize]
    }

    pub fn conj(&self) -> DirChar {
        let table = self
            .exps
            .iter()
            .map(|e| e.map(|k| (self.order - k) % self.order))
            .collect();
        DirChar::from_table(self.modulus, self.order, table)
    }

    /// `chi * 1_M` for a multiple `M` of the modulus.
    pub fn induced(&self, modulus: u64) -> Result<DirChar> {
        if modulus == 0 || !modulus.is_multiple_of(self.modulus) {
            return Err(Error::Precondition(format!(
                "{modulus} is not a multiple of {}",
                self.modulus
            )));
        }
        let table = (0..modulus)
            .map(|a| {
                if gcd(a as i64, modulus as i64) == 1 {
                    self.exponent(a as i64)
                } else {
                    None
                }
            })
            .collect();
        Ok(DirChar::from_table(modulus, self.order, table))
    }

    fn compute_conductor(&self) -> u64 {
        let n = self.modulus;
        for d in arith::divisors(n) {
            let trivial = (0..n).all(|a| {
                a % d != 1 % d || gcd(a as i64, n as i64) != 1 || self.exps[a as usize] == Some(0)
            });
            if trivial {
                return d;
            }
        }
        n
    }

    pub fn primitive_core(&self) -> PrimitiveDecomposition {
        let u = self.conductor;
        let n = self.modulus;
        let table = (0..u)
            .map(|b| {
                if gcd(b as i64, u as i64) != 1 {
                    return None;
                }
                let lift = (0..n)
                    .map(|j| b + j * u)
                    .find(|&a| gcd(a as i64, n as i64) == 1)
                    .expect("every unit mod the conductor lifts to a unit mod N");
                self.exponent(lift as i64)
            })
            .collect();
        PrimitiveDecomposition {
            core: DirChar::from_table(u, self.order, table),
            induced_modulus: n,
        }
    }
}

impl PartialEq for DirChar {
    fn eq(&self, other: &Self) -> bool {
        self.modulus == other.modulus && self.order == other.order && self.exps == other.exps
    }
}

impl Eq for DirChar {}

impl std::hash::Hash for DirChar {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.modulus.hash(state);
        self.order.hash(state);
        self.exps.hash(state);
    }
}

impl fmt::Debug for DirChar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DirChar({})", self.descriptor())
    }
}

impl fmt::Display for DirChar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.descriptor())
    }
}

impl FromStr for DirChar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DirChar::from_descriptor(s)
    }
}

/// Smallest-first generating set of `(Z/N)*`: each residue is kept when it
/// is not already in the subgroup generated by the earlier ones.
pub fn greedy_generators(n: u64) -> Vec<u64> {
    if n <= 2 {
        return Vec::new();
    }
    let mut in_group = vec![false; n as usize];
    in_group[1] = true;
    let mut gens = Vec::new();
    for a in 2..n {
        if gcd(a as i64, n as i64) != 1 || in_group[a as usize] {
            continue;
        }
        gens.push(a);
        // close the subgroup under multiplication by a
        let mut frontier: Vec<u64> = (0..n).filter(|&x| in_group[x as usize]).collect();
        while let Some(x) = frontier.pop() {
            for &g in &gens {
                let y = (x * g) % n;
                if !in_group[y as usize] {
                    in_group[y as usize] = true;
                    frontier.push(y);
                }
            }
        }
    }
    gens
}

/// Exponent of `(Z/N)*` (Carmichael's lambda), by brute force.
fn group_exponent(n: u64) -> u32 {
    arith::units(n)
        .into_iter()
        .map(|a| {
            let mut k = 1u32;
            let mut x = a % n;
            while x != 1 % n {
                x = x * a % n;
                k += 1;
            }
            k
        })
        .fold(1, lcm_u32)
}

/// Every Dirichlet character mod `n`, by trying all generator assignments
/// and keeping the consistent ones.
pub fn enumerate_characters(n: u64) -> Vec<DirChar> {
    let gens = greedy_generators(n);
    let lambda = group_exponent(n);
    let mut out = Vec::new();
    let mut assignment = vec![0u32; gens.len()];
    loop {
        let pairs: Vec<(u64, u32)> = gens.iter().copied().zip(assignment.iter().copied()).collect();
        if let Ok(chi) = DirChar::from_generators(n, lambda, &pairs) {
            out.push(chi);
        }
        // odometer increment
        let mut i = 0;
        loop {
            if i == assignment.len() {
                sort_characters(&mut out);
                return out;
            }
            assignment[i] += 1;
            if assignment[i] < lambda {
                break;
            }
            assignment[i] = 0;
            i += 1;
        }
    }
}

fn sort_characters(chars: &mut [DirChar]) {
    chars.sort_by_key(|c| {
        let gens = c.generator_values();
        (c.order(), gens.into_iter().map(|(_, k)| k).collect::<Vec<_>>())
    });
}

/// All primitive characters of conductor exactly `u`, ordered by character
/// order and then by generator exponents (so mod 5 this is `(./5)`, then
/// `chi(2) = zeta_4`, then `chi(2) = zeta_4^3`).
pub fn enumerate_primitive_chars(u: u64) -> Vec<DirChar> {
    enumerate_characters(u)
        .into_iter()
        .filter(DirChar::is_primitive)
        .collect()
}

/// `g(n, chi) = sum over units a mod u of chi(a) zeta_u^(a n)`, `u` the
/// modulus; the modulus-1 character has Gauss sum 1.
pub fn gauss_sum(n: i64, chi: &DirChar) -> CycNum {
    let u = chi.modulus();
    if u == 1 {
        return CycNum::from_integer(1);
    }
    let big = lcm_u32(u as u32, chi.order());
    let step_char = (big / chi.order()) as i64;
    let step_root = (big / u as u32) as i64;
    let mut counts = vec![0i64; big as usize];
    for a in arith::units(u) {
        let k = chi.exponent(a as i64).unwrap() as i64;
        let e = k * step_char + arith::rem(a as i64 * n, u) as i64 * step_root;
        counts[arith::rem(e, big as u64) as usize] += 1;
    }
    let coeffs: Vec<_> = counts
        .into_iter()
        .map(|c| crate::field::rat(c, 1))
        .collect();
    CycNum::from_coeffs(big, &coeffs)
}

/// Level `u^2 * prod p` over primes `p | N` with `p` not dividing the
/// conductor `u`.
pub fn eta_chi_level(chi: &DirChar) -> u64 {
    let u = chi.conductor();
    arith::prime_divisors(chi.modulus())
        .into_iter()
        .filter(|p| !u.is_multiple_of(*p))
        .fold(u * u, |acc, p| acc * p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use num_traits::{One, Zero};

    fn int(n: i64) -> CycNum {
        CycNum::from_integer(n)
    }

    #[test]
    fn named_characters() {
        let k3 = DirChar::from_descriptor("kronecker:3").unwrap();
        assert_eq!(k3.value(1), &int(1));
        assert_eq!(k3.value(2), &int(-1));
        assert_eq!(k3.value(3), &int(0));
        let psi = DirChar::from_descriptor("psi4").unwrap();
        assert_eq!(psi.value(1), &int(1));
        assert_eq!(psi.value(3), &int(-1));
        assert_eq!(psi.parity(), -1);
    }

    #[test]
    fn explicit_mod5_character() {
        let chi1 = DirChar::from_descriptor("chi:5:4:2=1").unwrap();
        assert_eq!(chi1.order(), 4);
        assert_eq!(chi1.value(4), &int(-1));
        assert_eq!(chi1.value(3), &-CycNum::zeta(4, 1));
        assert_eq!(chi1.descriptor(), "chi:5:4:2=1");
    }

    #[test]
    fn generator_errors() {
        assert!(matches!(
            DirChar::from_generators(5, 4, &[(2, 1), (4, 1)]),
            Err(Error::InconsistentCharacter(_))
        ));
        assert!(matches!(
            DirChar::from_generators(6, 2, &[(3, 1)]),
            Err(Error::InconsistentCharacter(_))
        ));
        assert!(DirChar::from_descriptor("kronecker:9").is_err());
        assert!(DirChar::from_descriptor("frob:3").is_err());
    }

    #[test]
    fn conductors() {
        assert_eq!(DirChar::principal(6).conductor(), 1);
        let k3 = DirChar::legendre(3).unwrap();
        assert_eq!(k3.induced(6).unwrap().conductor(), 3);
        assert_eq!(DirChar::legendre(5).unwrap().conductor(), 5);
    }

    #[test]
    fn primitive_cores() {
        let k3 = DirChar::legendre(3).unwrap();
        let d = k3.induced(6).unwrap().primitive_core();
        assert_eq!(d.core, k3);
        assert_eq!(d.induced_modulus, 6);
        assert_eq!(k3.primitive_core().core, k3);
        assert_eq!(DirChar::principal(12).primitive_core().core, DirChar::principal(1));
    }

    #[test]
    fn gauss_sums() {
        let k3 = DirChar::legendre(3).unwrap();
        assert_eq!(gauss_sum(1, &k3), CycNum::zeta(3, 1) - CycNum::zeta(3, 2));
        assert_eq!(gauss_sum(1, &DirChar::psi4()), CycNum::zeta(4, 1) - CycNum::zeta(4, 3));
        let k5 = DirChar::legendre(5).unwrap();
        let g = gauss_sum(1, &k5.conj());
        for n in 0..10 {
            assert_eq!(gauss_sum(n, &k5.conj()), k5.value(n) * &g, "n = {n}");
        }
    }

    #[test]
    fn gauss_sum_absolute_value_and_parity() {
        for u in [3u64, 4, 5, 7, 8, 9] {
            for chi in enumerate_primitive_chars(u) {
                let g = gauss_sum(1, &chi);
                assert_eq!(g.mul_ref(&g.conj()), int(u as i64), "{chi}");
                let gbar = gauss_sum(1, &chi.conj());
                assert_eq!(gbar, g.conj().scale(&crate::field::rat(chi.parity(), 1)), "{chi}");
            }
        }
    }

    #[test]
    fn levels() {
        assert_eq!(eta_chi_level(&DirChar::legendre(3).unwrap()), 9);
        assert_eq!(eta_chi_level(&DirChar::legendre(3).unwrap().induced(18).unwrap()), 18);
        assert_eq!(eta_chi_level(&DirChar::psi4()), 16);
    }

    #[test]
    fn primitive_enumeration() {
        assert!(enumerate_primitive_chars(2).is_empty());
        assert_eq!(enumerate_primitive_chars(1), vec![DirChar::principal(1)]);
        assert_eq!(enumerate_primitive_chars(3), vec![DirChar::legendre(3).unwrap()]);
        let five: Vec<String> = enumerate_primitive_chars(5).iter().map(|c| c.descriptor()).collect();
        assert_eq!(five, vec!["kronecker:5", "chi:5:4:2=1", "chi:5:4:2=3"]);
        assert_eq!(enumerate_primitive_chars(4), vec![DirChar::psi4()]);
        assert_eq!(enumerate_primitive_chars(8).len(), 2);
    }

    #[test]
    fn multiplicativity_up_to_50() {
        for n in 1..=50u64 {
            for chi in enumerate_characters(n) {
                for a in arith::units(n) {
                    for b in arith::units(n) {
                        let lhs = chi.value((a * b) as i64);
                        assert_eq!(lhs, &(chi.value(a as i64) * chi.value(b as i64)));
                    }
                }
                assert!(chi.value(1).is_one());
                if n > 1 {
                    assert!(chi.value(0).is_zero());
                }
            }
        }
    }

    #[test]
    fn character_counts_match_brute_force() {
        for n in 1..=40u64 {
            let all = enumerate_characters(n);
            assert_eq!(all.len() as u64, arith::euler_phi(n), "n = {n}");
            // primitive count via Moebius inversion of phi over divisors
            let expected: i64 = arith::divisors(n)
                .into_iter()
                .map(|d| moebius(d) * arith::euler_phi(n / d) as i64)
                .sum::<i64>();
            let prim = enumerate_primitive_chars(n);
            assert_eq!(prim.len() as i64, expected, "n = {n}");
            for chi in &prim {
                assert_eq!(chi.primitive_core().core.conductor(), chi.modulus());
            }
        }
    }

    #[test]
    fn descriptor_and_json_round_trip() {
        for n in [5u64, 7, 8, 12, 15, 20] {
            for chi in enumerate_characters(n) {
                assert_eq!(DirChar::from_descriptor(&chi.descriptor()).unwrap(), chi);
                assert_eq!(DirChar::from_json(&chi.to_json()).unwrap(), chi);
            }
        }
    }
}
