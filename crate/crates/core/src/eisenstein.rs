//! Weight-2 Eisenstein series `E_2^{psi,phi}` and the special values they need.

use num_traits::{One, Zero};

use crate::arith;
use crate::characters::DirChar;
use crate::cyclotomic::CycNum;
use crate::error::{Error, Result};
use crate::field::{rat, Field, Rational};
use crate::CycSeries;

/// `E_2^{psi,phi} = delta(psi) L(-1, phi) + 2 sum sigma_1^{psi,phi}(n) q^n`.
#[derive(Clone, Debug)]
pub struct EisensteinE2 {
    pub psi: DirChar,
    pub phi: DirChar,
    pub series: CycSeries,
}

impl EisensteinE2 {
    pub fn level(&self) -> u64 {
        self.psi.modulus() * self.phi.modulus()
    }
}

/// `sigma_1^{psi,phi}(n) = sum_{d | n} psi(n/d) phi(d) d`.
pub fn sigma1(psi: &DirChar, phi: &DirChar, n: u64) -> CycNum {
    assert!(n >= 1, "sigma1 needs n >= 1");
    let mut acc = CycNum::zero();
    for d in arith::divisors(n) {
        let term = psi.value((n / d) as i64).mul_ref(phi.value(d as i64));
        if !term.is_zero() {
            acc = acc.add_ref(&term.scale(&rat(d as i64, 1)));
        }
    }
    acc
}

fn bernoulli2(x: &Rational) -> Rational {
    x * x - x + rat(1, 6)
}

/// `L(-1, phi) = -B_{2,phi} / 2` with
/// `B_{2,phi} = v sum_{a=1}^{v} phi(a) B_2(a/v)`, `v` the modulus.
pub fn l_minus_one(phi: &DirChar) -> CycNum {
    let v = phi.modulus();
    let mut b = CycNum::zero();
    for a in 1..=v {
        let chi_a = phi.value(a as i64);
        if chi_a.is_zero() {
            continue;
        }
        b = b.add_ref(&chi_a.scale(&bernoulli2(&rat(a as i64, v as i64))));
    }
    b.scale(&rat(-(v as i64), 2))
}

pub fn e2_series(psi: &DirChar, phi: &DirChar, precision: usize) -> EisensteinE2 {
    assert!(precision >= 1, "precision must be positive");
    let constant = if psi.is_principal() {
        l_minus_one(phi)
    } else {
        CycNum::zero()
    };
    let mut coeffs = Vec::with_capacity(precision);
    coeffs.push(constant);
    for n in 1..precision as u64 {
        coeffs.push(sigma1(psi, phi, n).scale(&rat(2, 1)));
    }
    EisensteinE2 {
        psi: psi.clone(),
        phi: phi.clone(),
        series: CycSeries::from_coeffs(coeffs),
    }
}

/// The classical `E_2 = E_2^{1,1} = -1/12 + 2 sum sigma(n) q^n`.
pub fn e2_classical(precision: usize) -> CycSeries {
    let one = DirChar::principal(1);
    e2_series(&one, &one, precision).series
}

/// `E_{2,t} = E_2 - t (E_2 | V_t)`.
pub fn e2t_series(t: u64, precision: usize) -> Result<CycSeries> {
    if t <= 1 {
        return Err(Error::Precondition("E_{2,t} needs t > 1".into()));
    }
    let e2 = e2_classical(precision);
    let vt = e2
        .v_op(t as usize)
        .truncate(precision)
        .scale(&CycNum::from_integer(t as i64));
    e2.sub(&vt)
}

/// The rational `f` with `L(2, chi^2) = f pi^2` for a real character of
/// conductor `u > 1`: `f = (1/6) prod_{p | u} (1 - 1/p^2)`.
pub fn l2_real(chi: &DirChar) -> Result<Rational> {
    if !chi.is_real() {
        return Err(Error::NonRealCharacter(chi.descriptor()));
    }
    let u = chi.conductor();
    if u <= 1 {
        return Err(Error::Precondition("L(2, chi^2) factor needs conductor > 1".into()));
    }
    Ok(arith::prime_divisors(u)
        .into_iter()
        .fold(rat(1, 6), |acc, p| {
            acc * (Rational::one() - rat(1, (p * p) as i64))
        }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::enumerate_primitive_chars;

    fn k3() -> DirChar {
        DirChar::legendre(3).unwrap()
    }

    fn as_int(c: &CycNum) -> i64 {
        i64::try_from(c.as_rational().unwrap().to_integer()).unwrap()
    }

    #[test]
    fn sigma1_examples() {
        let one = DirChar::principal(1);
        assert_eq!(as_int(&sigma1(&one, &one, 6)), 12);
        assert_eq!(as_int(&sigma1(&k3(), &k3(), 2)), -3);
        assert_eq!(as_int(&sigma1(&k3(), &k3(), 4)), 7);
    }

    #[test]
    fn l_values() {
        assert_eq!(l_minus_one(&DirChar::principal(1)), CycNum::from_rational(&rat(-1, 12)));
        assert!(l_minus_one(&k3()).is_zero());
        assert!(l_minus_one(&DirChar::psi4()).is_zero());
    }

    #[test]
    fn e2_examples() {
        let one = DirChar::principal(1);
        let e = e2_series(&one, &one, 4).series;
        assert_eq!(e.coeff(0), &CycNum::from_rational(&rat(-1, 12)));
        assert_eq!(e.coeffs()[1..].iter().map(as_int).collect::<Vec<_>>(), vec![2, 6, 8]);
        let e3 = e2_series(&k3(), &k3().conj(), 5).series;
        assert_eq!(e3.coeffs().iter().map(as_int).collect::<Vec<_>>(), vec![0, 2, -6, 0, 14]);
        for u in [4u64, 5, 7] {
            for chi in enumerate_primitive_chars(u) {
                assert!(e2_series(&chi, &chi.conj(), 2).series.coeff(0).is_zero());
            }
        }
    }

    #[test]
    fn e2t_examples() {
        let e = e2t_series(2, 4).unwrap();
        assert_eq!(e.coeff(0), &CycNum::from_rational(&rat(1, 12)));
        assert_eq!(e.coeffs()[1..].iter().map(as_int).collect::<Vec<_>>(), vec![2, 2, 8]);
        for t in 2..8u64 {
            let e = e2t_series(t, 10).unwrap();
            assert_eq!(e.coeff(0), &CycNum::from_rational(&rat(t as i64 - 1, 12)));
            let base = e2_classical(10);
            for n in 1..(t as usize).min(10) {
                assert_eq!(e.coeff(n), base.coeff(n));
            }
        }
        assert!(e2t_series(1, 4).is_err());
    }

    #[test]
    fn l2_factors() {
        assert_eq!(l2_real(&k3()).unwrap(), rat(4, 27));
        assert_eq!(l2_real(&DirChar::psi4()).unwrap(), rat(1, 8));
        assert_eq!(l2_real(&DirChar::legendre(5).unwrap()).unwrap(), rat(4, 25));
        let chi1 = DirChar::from_descriptor("chi:5:4:2=1").unwrap();
        assert!(matches!(l2_real(&chi1), Err(Error::NonRealCharacter(_))));
    }

    #[test]
    fn sigma1_multiplicative_on_coprime_arguments() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let chars = [
            DirChar::principal(1),
            k3(),
            DirChar::psi4(),
            DirChar::from_descriptor("chi:5:4:2=1").unwrap(),
        ];
        for _ in 0..200 {
            let m = rng.gen_range(1..=200u64);
            let n = rng.gen_range(1..=200u64);
            if arith::gcd(m as i64, n as i64) != 1 {
                continue;
            }
            for chi in &chars {
                let (psi, phi) = (chi, chi.conj());
                assert_eq!(
                    sigma1(psi, &phi, m * n),
                    sigma1(psi, &phi, m).mul_ref(&sigma1(psi, &phi, n))
                );
            }
        }
    }
}
