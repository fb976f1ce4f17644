//! S-units `z = ± p_1^{e_1} ... p_l^{e_l}` over a finite prime set.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exactmath::{log_int, Real};

/// Strictly increasing list of distinct primes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PrimeSet {
    primes: Vec<BigUint>,
}

impl PrimeSet {
    /// Sorts the input; rejects duplicates, non-primes and the empty set.
    pub fn new(mut primes: Vec<BigUint>) -> Result<Self> {
        if primes.is_empty() {
            return Err(Error::InvalidPrimeSet("S must contain at least one prime".into()));
        }
        primes.sort();
        if primes.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidPrimeSet("duplicate primes".into()));
        }
        if let Some(p) = primes.iter().find(|p| !is_prime(p)) {
            return Err(Error::InvalidPrimeSet(format!("{p} is not prime")));
        }
        Ok(PrimeSet { primes })
    }

    pub fn from_u64(primes: &[u64]) -> Result<Self> {
        PrimeSet::new(primes.iter().map(|&p| BigUint::from(p)).collect())
    }

    pub fn primes(&self) -> &[BigUint] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// The primes as machine words, when they all fit.
    pub fn as_u64(&self) -> Option<Vec<u64>> {
        self.primes.iter().map(ToPrimitive::to_u64).collect()
    }
}

const MR_BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Miller–Rabin with the first twelve prime bases: deterministic below `3.3e24`,
/// a strong probable-prime test above.
pub fn is_prime(n: &BigUint) -> bool {
    let two = BigUint::from(2u32);
    if n < &two {
        return false;
    }
    for &p in &MR_BASES {
        let p = BigUint::from(p);
        if n == &p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }
    let nm1 = n - 1u32;
    let s = nm1.trailing_zeros().unwrap_or(0);
    let d = &nm1 >> s;
    'witness: for &a in &MR_BASES {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x.is_one() || x == nm1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == nm1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// `sign * prod p_i^{e_i}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SUnit {
    sign: i8,
    exponents: Vec<u32>,
    value: BigInt,
}

impl SUnit {
    pub fn from_exponents(sign: i8, exponents: Vec<u32>, s: &PrimeSet) -> Result<Self> {
        if sign != 1 && sign != -1 {
            return Err(Error::Domain("S-unit sign must be +1 or -1".into()));
        }
        if exponents.len() != s.len() {
            return Err(Error::Domain("exponent vector length differs from |S|".into()));
        }
        let mag = s
            .primes()
            .iter()
            .zip(&exponents)
            .fold(BigUint::one(), |acc, (p, &e)| acc * p.pow(e));
        let value = BigInt::from_biguint(if sign < 0 { Sign::Minus } else { Sign::Plus }, mag);
        Ok(SUnit {
            sign,
            exponents,
            value,
        })
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn value(&self) -> &BigInt {
        &self.value
    }

    pub fn magnitude(&self) -> BigUint {
        self.value.magnitude().clone()
    }

    /// Canonical order: by `|value|`, then negative before positive.
    pub fn key_cmp(&self, other: &SUnit) -> Ordering {
        self.value
            .magnitude()
            .cmp(other.value.magnitude())
            .then(self.sign.cmp(&other.sign))
    }
}

impl fmt::Display for SUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Exponents of `z` over `S`; fails if `z` has a prime factor outside `S`.
pub fn factor_over_s(z: &BigInt, s: &PrimeSet) -> Result<SUnit> {
    if z.is_zero() {
        return Err(Error::Domain("zero is not an S-unit".into()));
    }
    let mut rest = z.magnitude().clone();
    let mut exps = Vec::with_capacity(s.len());
    for p in s.primes() {
        let mut e = 0u32;
        loop {
            let (q, r) = rest.div_rem(p);
            if !r.is_zero() {
                break;
            }
            rest = q;
            e += 1;
        }
        exps.push(e);
    }
    if !rest.is_one() {
        return Err(Error::NotSmooth(z.clone()));
    }
    Ok(SUnit {
        sign: if z.sign() == Sign::Minus { -1 } else { 1 },
        exponents: exps,
        value: z.clone(),
    })
}

/// All S-units with `|value| <= bound`, both signs, in canonical order.
pub fn enumerate_sunits(s: &PrimeSet, bound: &BigUint) -> Vec<SUnit> {
    let mut mags: Vec<(BigUint, Vec<u32>)> = Vec::new();
    let mut exps = vec![0u32; s.len()];
    collect_products(s.primes(), 0, BigUint::one(), bound, &mut exps, &mut mags);
    mags.sort_by(|a, b| a.0.cmp(&b.0));
    let mut out = Vec::with_capacity(2 * mags.len());
    for (m, e) in mags {
        for sign in [-1i8, 1] {
            let value = BigInt::from_biguint(if sign < 0 { Sign::Minus } else { Sign::Plus }, m.clone());
            out.push(SUnit {
                sign,
                exponents: e.clone(),
                value,
            });
        }
    }
    out
}

fn collect_products(
    primes: &[BigUint],
    i: usize,
    acc: BigUint,
    bound: &BigUint,
    exps: &mut Vec<u32>,
    out: &mut Vec<(BigUint, Vec<u32>)>,
) {
    if i == primes.len() {
        out.push((acc, exps.clone()));
        return;
    }
    let mut cur = acc;
    let mut e = 0;
    while &cur <= bound {
        exps[i] = e;
        collect_products(primes, i + 1, cur.clone(), bound, exps, out);
        cur *= &primes[i];
        e += 1;
    }
    exps[i] = 0;
}

/// Dominance parameter `epsilon = num/den > 0`, held exactly.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Epsilon {
    num: BigUint,
    den: BigUint,
}

impl Epsilon {
    pub fn new(num: BigUint, den: BigUint) -> Result<Self> {
        if num.is_zero() || den.is_zero() {
            return Err(Error::Domain("epsilon must be a positive rational".into()));
        }
        let g = num.gcd(&den);
        Ok(Epsilon {
            num: num / &g,
            den: den / g,
        })
    }

    pub fn from_ratio(num: u64, den: u64) -> Result<Self> {
        Epsilon::new(num.into(), den.into())
    }

    pub fn num(&self) -> &BigUint {
        &self.num
    }

    pub fn den(&self) -> &BigUint {
        &self.den
    }

    pub fn to_real(&self, prec: u32) -> Real {
        Real::from_int(&BigInt::from(self.num.clone()), prec)
            .div(&Real::from_int(&BigInt::from(self.den.clone()), prec))
            .expect("positive denominator")
    }

    /// `|z_i|^{1+eps} < |z_r|` (or `<=` when not strict), decided exactly.
    pub fn dominated(&self, zi: &BigUint, zr: &BigUint, strict: bool) -> bool {
        let ord = self.compare_pow(zi, zr);
        match ord {
            Ordering::Less => true,
            Ordering::Equal => !strict,
            Ordering::Greater => false,
        }
    }

    /// Sign of `zi^{num+den} - zr^{den}`.
    fn compare_pow(&self, zi: &BigUint, zr: &BigUint) -> Ordering {
        if zi.is_zero() || zr.is_zero() {
            return zi.cmp(zr);
        }
        if zi.is_one() {
            return BigUint::one().cmp(zr);
        }
        // Logarithms settle everything except near-equality.
        if let (Some(a), Some(b), Some(u), Some(v)) =
            (zi.to_f64(), zr.to_f64(), self.num.to_u64(), self.den.to_u64())
        {
            if u < 1 << 53 && v < 1 << 53 && a.is_finite() && b.is_finite() {
                let lhs = a.ln() * (u as f64 + v as f64);
                let rhs = b.ln() * v as f64;
                if (lhs - rhs).abs() > 1e-9 * lhs.abs().max(rhs.abs()).max(1.0) {
                    return lhs.partial_cmp(&rhs).expect("finite");
                }
            }
        }
        let prec = 128;
        let lhs = log_int(&BigInt::from(zi.clone()), prec)
            .mul(&Real::from_int(&BigInt::from(&self.num + &self.den), prec));
        let rhs = log_int(&BigInt::from(zr.clone()), prec).mul(&Real::from_int(&BigInt::from(self.den.clone()), prec));
        if lhs.lt(&rhs) {
            return Ordering::Less;
        }
        if rhs.lt(&lhs) {
            return Ordering::Greater;
        }
        let e1 = (&self.num + &self.den).to_u32().expect("exponent too large for exact comparison");
        let e2 = self.den.to_u32().expect("exponent too large for exact comparison");
        zi.pow(e1).cmp(&zr.pow(e2))
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Epsilon {
    type Err = Error;

    /// Accepts `u/v` or a bare positive integer.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Domain(format!("epsilon must look like \"u/v\" with u, v > 0: {s:?}"));
        let (u, v) = match s.split_once('/') {
            Some((u, v)) => (u.trim(), v.trim()),
            None => (s.trim(), "1"),
        };
        let u: BigUint = u.parse().map_err(|_| bad())?;
        let v: BigUint = v.parse().map_err(|_| bad())?;
        Epsilon::new(u, v).map_err(|_| bad())
    }
}

/// Stream of canonical tuples `(z_1, ..., z_r)` with `|z_r| <= zmax`,
/// `|z_i|^{1+eps} < |z_r|` for `i < r`, and `z_1 <= ... <= z_{r-1}` canonically.
pub struct AdmissibleTuples {
    units: Vec<SUnit>,
    r: usize,
    eps: Epsilon,
    strict: bool,
    zr: usize,
    allowed: usize,
    idx: Vec<usize>,
    fresh: bool,
}

/// Iterator over admissible `r`-tuples.
pub fn admissible_tuples(
    s: &PrimeSet,
    r: usize,
    eps: &Epsilon,
    zmax: &BigUint,
    strict: bool,
) -> Result<AdmissibleTuples> {
    if r == 0 {
        return Err(Error::Domain("r must be at least 1".into()));
    }
    let mut it = AdmissibleTuples {
        units: enumerate_sunits(s, zmax),
        r,
        eps: eps.clone(),
        strict,
        zr: 0,
        allowed: 0,
        idx: vec![0; r - 1],
        fresh: true,
    };
    it.allowed = it.allowed_prefix(0);
    Ok(it)
}

impl AdmissibleTuples {
    /// Units before this index satisfy the dominance condition against `units[zr]`.
    fn allowed_prefix(&self, zr: usize) -> usize {
        let Some(top) = self.units.get(zr) else {
            return 0;
        };
        let top = top.magnitude();
        self.units
            .partition_point(|u| self.eps.dominated(&u.magnitude(), &top, self.strict))
    }

    fn advance_zr(&mut self) {
        self.zr += 1;
        self.allowed = self.allowed_prefix(self.zr);
        self.idx.iter_mut().for_each(|i| *i = 0);
        self.fresh = true;
    }

    // Next nondecreasing index vector below `allowed`.
    fn bump(&mut self) -> bool {
        let m = self.idx.len();
        for pos in (0..m).rev() {
            if self.idx[pos] + 1 < self.allowed {
                let v = self.idx[pos] + 1;
                for j in pos..m {
                    self.idx[j] = v;
                }
                return true;
            }
        }
        false
    }
}

impl Iterator for AdmissibleTuples {
    type Item = Vec<SUnit>;

    fn next(&mut self) -> Option<Vec<SUnit>> {
        loop {
            if self.zr >= self.units.len() {
                return None;
            }
            let ok = if self.fresh {
                self.fresh = false;
                self.r == 1 || self.allowed > 0
            } else {
                self.bump()
            };
            if ok {
                let mut t: Vec<SUnit> = self.idx.iter().map(|&i| self.units[i].clone()).collect();
                t.push(self.units[self.zr].clone());
                if self.r == 1 {
                    self.advance_zr();
                }
                return Some(t);
            }
            self.advance_zr();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    fn values(v: &[SUnit]) -> Vec<i64> {
        v.iter().map(|u| u.value().to_i64().unwrap()).collect()
    }

    #[test]
    fn primality() {
        let primes: Vec<u64> = (0..200u64).filter(|&n| is_prime(&big(n))).collect();
        assert_eq!(primes.len(), 46);
        assert!(is_prime(&big(18_446_744_073_709_551_557)));
        assert!(!is_prime(&big(3_215_031_751)));
        assert!(PrimeSet::from_u64(&[2, 4]).is_err());
        assert!(PrimeSet::from_u64(&[3, 3]).is_err());
        assert_eq!(PrimeSet::from_u64(&[5, 2]).unwrap().primes(), &[big(2), big(5)]);
    }

    #[test]
    fn factoring() {
        let s = PrimeSet::from_u64(&[2, 3]).unwrap();
        assert_eq!(factor_over_s(&BigInt::from(12), &s).unwrap().exponents(), &[2, 1]);
        let one = factor_over_s(&BigInt::from(1), &s).unwrap();
        assert_eq!((one.sign(), one.exponents()), (1, &[0, 0][..]));
        assert_eq!(factor_over_s(&BigInt::from(-18), &s).unwrap().sign(), -1);
        assert_eq!(
            factor_over_s(&BigInt::from(10), &s),
            Err(Error::NotSmooth(BigInt::from(10)))
        );
        assert!(matches!(factor_over_s(&BigInt::zero(), &s), Err(Error::Domain(_))));
    }

    #[test]
    fn enumeration() {
        let s = PrimeSet::from_u64(&[2, 3]).unwrap();
        let u = enumerate_sunits(&s, &big(10));
        assert_eq!(u.len(), 14);
        assert_eq!(values(&u), vec![-1, 1, -2, 2, -3, 3, -4, 4, -6, 6, -8, 8, -9, 9]);
        let s2 = PrimeSet::from_u64(&[2]).unwrap();
        assert_eq!(values(&enumerate_sunits(&s2, &big(1))), vec![-1, 1]);
        let s235 = PrimeSet::from_u64(&[2, 3, 5]).unwrap();
        let pos: Vec<i64> = values(&enumerate_sunits(&s235, &big(30)))
            .into_iter()
            .filter(|&v| v > 0)
            .collect();
        assert_eq!(pos, vec![1, 2, 3, 4, 5, 6, 8, 9, 10, 12, 15, 16, 18, 20, 24, 25, 27, 30]);
        for u in enumerate_sunits(&s235, &big(1000)) {
            assert_eq!(factor_over_s(u.value(), &s235).unwrap(), u);
        }
    }

    #[test]
    fn epsilon_parsing() {
        assert_eq!("2/4".parse::<Epsilon>().unwrap(), Epsilon::from_ratio(1, 2).unwrap());
        assert_eq!("3".parse::<Epsilon>().unwrap().to_string(), "3/1");
        assert!("0/1".parse::<Epsilon>().is_err());
        assert!("-1/2".parse::<Epsilon>().is_err());
        assert!("x".parse::<Epsilon>().is_err());
    }

    #[test]
    fn dominance_is_exact() {
        let one = Epsilon::from_ratio(1, 1).unwrap();
        assert!(one.dominated(&big(2), &big(5), true));
        assert!(!one.dominated(&big(2), &big(4), true));
        assert!(one.dominated(&big(2), &big(4), false));
        let half = Epsilon::from_ratio(1, 2).unwrap();
        // 4^{3/2} = 8
        assert!(!half.dominated(&big(4), &big(8), true));
        assert!(half.dominated(&big(4), &big(9), true));
    }

    #[test]
    fn tuples_small_case() {
        let s = PrimeSet::from_u64(&[2]).unwrap();
        let eps = Epsilon::from_ratio(1, 1).unwrap();
        let got: Vec<Vec<i64>> = admissible_tuples(&s, 2, &eps, &big(8), true)
            .unwrap()
            .map(|t| values(&t))
            .collect();
        let mut want = Vec::new();
        for zr in [-1i64, 1, -2, 2, -4, 4, -8, 8] {
            for z1 in [-1i64, 1, -2, 2, -4, 4, -8, 8] {
                if z1 * z1 < zr.abs() {
                    want.push(vec![z1, zr]);
                }
            }
        }
        assert_eq!(got, want);
    }

    #[test]
    fn tuples_r1_and_forced() {
        let s = PrimeSet::from_u64(&[2, 3]).unwrap();
        let eps = Epsilon::from_ratio(1, 1).unwrap();
        let r1: Vec<Vec<SUnit>> = admissible_tuples(&s, 1, &eps, &big(50), true).unwrap().collect();
        let all = enumerate_sunits(&s, &big(50));
        assert_eq!(r1.len(), all.len());
        assert!(r1.iter().zip(&all).all(|(t, u)| t == &vec![u.clone()]));
        let e100 = Epsilon::from_ratio(100, 1).unwrap();
        let t: Vec<Vec<SUnit>> = admissible_tuples(&s, 2, &e100, &big(100), true).unwrap().collect();
        assert!(!t.is_empty());
        assert!(t.iter().all(|t| t[0].magnitude().is_one()));
    }

    #[test]
    fn tuples_are_canonical() {
        let s = PrimeSet::from_u64(&[2, 3]).unwrap();
        let eps = Epsilon::from_ratio(1, 3).unwrap();
        let mut seen = std::collections::HashSet::new();
        for t in admissible_tuples(&s, 3, &eps, &big(200), true).unwrap() {
            assert!(t[0].key_cmp(&t[1]) != Ordering::Greater);
            let mut head = values(&t[..2]);
            head.sort();
            assert!(seen.insert((head, t[2].value().clone())));
        }
    }
}
