//! Exact dyadic rationals `m * 2^e` with directed rounding helpers.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Rounding direction for inexact dyadic operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Round {
    Floor,
    Ceil,
    Nearest,
}

/// A dyadic rational `man * 2^exp`, kept normalized (odd mantissa, or zero with `exp == 0`).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    man: BigInt,
    exp: i64,
}

fn bit_len(x: &BigInt) -> u64 {
    x.bits()
}

/// Shift right by `s` bits with the requested rounding.
fn shr_round(m: &BigInt, s: u64, mode: Round) -> BigInt {
    if s == 0 {
        return m.clone();
    }
    match mode {
        // BigInt `>>` rounds toward negative infinity.
        Round::Floor => m >> s,
        Round::Ceil => -((-m) >> s),
        // Ties away from zero, so that rounding commutes with negation.
        Round::Nearest => {
            let half = BigInt::one() << (s - 1);
            if m.is_negative() {
                -((-m + half) >> s)
            } else {
                (m + half) >> s
            }
        }
    }
}

impl Dyadic {
    pub fn new(man: BigInt, exp: i64) -> Self {
        if man.is_zero() {
            return Dyadic { man, exp: 0 };
        }
        let tz = man.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            Dyadic {
                man: man >> tz,
                exp: exp + tz as i64,
            }
        } else {
            Dyadic { man, exp }
        }
    }

    pub fn zero() -> Self {
        Dyadic {
            man: BigInt::zero(),
            exp: 0,
        }
    }

    pub fn one() -> Self {
        Dyadic {
            man: BigInt::one(),
            exp: 0,
        }
    }

    pub fn from_int(n: impl Into<BigInt>) -> Self {
        Dyadic::new(n.into(), 0)
    }

    /// `2^e`.
    pub fn pow2(e: i64) -> Self {
        Dyadic {
            man: BigInt::one(),
            exp: e,
        }
    }

    /// Exact conversion of a finite `f64`.
    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "non-finite f64 {x}");
        if x == 0.0 {
            return Dyadic::zero();
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 1 { -1 } else { 1 };
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if raw_exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), raw_exp - 1075)
        };
        Dyadic::new(BigInt::from(m) * sign, e)
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.man
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.man.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.man.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.man.is_positive()
    }

    pub fn signum(&self) -> i32 {
        match self.man.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn abs(&self) -> Self {
        Dyadic {
            man: self.man.abs(),
            exp: self.exp,
        }
    }

    pub fn neg(&self) -> Self {
        Dyadic {
            man: -&self.man,
            exp: self.exp,
        }
    }

    /// Smallest `b` with `|self| < 2^b`; `i64::MIN` for zero.
    pub fn msb(&self) -> i64 {
        if self.is_zero() {
            i64::MIN
        } else {
            self.exp + bit_len(&self.man) as i64
        }
    }

    pub fn mul_pow2(&self, k: i64) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        Dyadic {
            man: self.man.clone(),
            exp: self.exp + k,
        }
    }

    pub fn add(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let e = self.exp.min(other.exp);
        let a = &self.man << (self.exp - e) as u64;
        let b = &other.man << (other.exp - e) as u64;
        Dyadic::new(a + b, e)
    }

    pub fn sub(&self, other: &Dyadic) -> Dyadic {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() || other.is_zero() {
            return Dyadic::zero();
        }
        Dyadic {
            man: &self.man * &other.man,
            exp: self.exp + other.exp,
        }
    }

    pub fn square(&self) -> Dyadic {
        self.mul(self)
    }

    pub fn max(a: &Dyadic, b: &Dyadic) -> Dyadic {
        if a >= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    pub fn min(a: &Dyadic, b: &Dyadic) -> Dyadic {
        if a <= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    /// Round to at most `prec` significant bits.
    pub fn round(&self, prec: u32, mode: Round) -> Dyadic {
        let bl = bit_len(&self.man);
        if bl <= prec as u64 {
            return self.clone();
        }
        let s = bl - prec as u64;
        Dyadic::new(shr_round(&self.man, s, mode), self.exp + s as i64)
    }

    /// Quotient `a / b` with at least `prec` significant bits, rounded in direction `mode`
    /// (`Nearest` is treated as `Floor`). Returns the quotient and `u` such that the exact
    /// quotient lies within `2^u` of the result.
    pub fn div_round(a: &Dyadic, b: &Dyadic, prec: u32, mode: Round) -> (Dyadic, i64) {
        assert!(!b.is_zero(), "dyadic division by zero");
        if a.is_zero() {
            return (Dyadic::zero(), i64::MIN / 4);
        }
        let la = bit_len(&a.man) as i64;
        let lb = bit_len(&b.man) as i64;
        let s = (prec as i64 + 2 + lb - la).max(0);
        let num = &a.man << s as u64;
        let (q, r) = num.div_mod_floor(&b.man);
        let q = if mode == Round::Ceil && !r.is_zero() {
            q + 1
        } else {
            q
        };
        let e = a.exp - b.exp - s;
        (Dyadic::new(q, e), e)
    }

    /// Square root of a nonnegative dyadic to `prec` bits, rounded `Floor` or `Ceil`.
    pub fn sqrt_round(&self, prec: u32, mode: Round) -> Dyadic {
        assert!(!self.is_negative(), "sqrt of negative dyadic");
        if self.is_zero() {
            return Dyadic::zero();
        }
        let bl = bit_len(&self.man) as i64;
        let mut s = (2 * prec as i64 + 4 - bl).max(0);
        if (self.exp - s).rem_euclid(2) != 0 {
            s += 1;
        }
        let m = &self.man << s as u64;
        let r = m.sqrt();
        let r = if mode == Round::Ceil && &r * &r != m {
            r + 1
        } else {
            r
        };
        Dyadic::new(r, (self.exp - s) / 2)
    }

    pub fn floor_int(&self) -> BigInt {
        if self.exp >= 0 {
            &self.man << self.exp as u64
        } else {
            &self.man >> (-self.exp) as u64
        }
    }

    pub fn ceil_int(&self) -> BigInt {
        -(self.neg().floor_int())
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.man << self.exp as u64)
        } else {
            BigRational::new(self.man.clone(), BigInt::one() << (-self.exp) as u64)
        }
    }

    /// Nearest-ish `f64`; saturates to infinities outside the `f64` range.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bl = bit_len(&self.man) as i64;
        let shift = (bl - 60).max(0);
        let m = (&self.man >> shift as u64).to_f64().unwrap_or(0.0);
        let e = self.exp + shift;
        if e > 2000 {
            return m.signum() * f64::INFINITY;
        }
        if e < -2200 {
            return 0.0;
        }
        m * 2f64.powi(e as i32)
    }

    /// Directed conversion of a rational.
    pub fn from_rational(q: &BigRational, prec: u32, mode: Round) -> Dyadic {
        let n = Dyadic::from_int(q.numer().clone());
        let d = Dyadic::from_int(q.denom().clone());
        if q.denom().is_one() {
            return n;
        }
        Dyadic::div_round(&n, &d, prec, mode).0
    }

    /// Scientific decimal rendering with `digits` significant digits, rounded in
    /// direction `mode` with respect to the value (not the magnitude).
    pub fn to_decimal(&self, digits: u32, mode: Round) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let digits = digits.max(1);
        let neg = self.is_negative();
        // Magnitude rounding direction.
        let mag_mode = match (mode, neg) {
            (Round::Nearest, _) => Round::Nearest,
            (Round::Floor, false) | (Round::Ceil, true) => Round::Floor,
            _ => Round::Ceil,
        };
        let (mut num, mut den) = if self.exp >= 0 {
            (self.man.abs() << self.exp as u64, BigInt::one())
        } else {
            (self.man.abs(), BigInt::one() << (-self.exp) as u64)
        };
        // Estimate the decimal exponent, then correct.
        let mut dexp = ((self.msb() - 1) as f64 * std::f64::consts::LOG10_2).floor() as i64;
        let ten = BigInt::from(10u32);
        let lo = num_traits::pow(ten.clone(), (digits - 1) as usize);
        let hi = &lo * &ten;
        let orig_num = num.clone();
        let orig_den = den.clone();
        let q = loop {
            num = orig_num.clone();
            den = orig_den.clone();
            let scale = digits as i64 - 1 - dexp;
            if scale >= 0 {
                num *= num_traits::pow(ten.clone(), scale as usize);
            } else {
                den *= num_traits::pow(ten.clone(), (-scale) as usize);
            }
            let t = num.div_floor(&den);
            if t < lo {
                dexp -= 1;
                continue;
            }
            if t >= hi {
                dexp += 1;
                continue;
            }
            let rem = &num - &t * &den;
            let q = match mag_mode {
                Round::Floor => t,
                Round::Ceil => {
                    if rem.is_zero() {
                        t
                    } else {
                        t + 1
                    }
                }
                Round::Nearest => {
                    if rem * 2 >= den {
                        t + 1
                    } else {
                        t
                    }
                }
            };
            if q >= hi {
                // 9.99.. rounded up to 10.0..
                dexp += 1;
                break &q / &ten;
            }
            break q;
        };
        let s = q.to_string();
        let (head, tail) = s.split_at(1);
        let tail = tail.trim_end_matches('0');
        let sign = if neg { "-" } else { "" };
        if tail.is_empty() {
            format!("{sign}{head}e{dexp}")
        } else {
            format!("{sign}{head}.{tail}e{dexp}")
        }
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (sa, sb) = (self.signum(), other.signum());
        if sa != sb {
            return sa.cmp(&sb);
        }
        if sa == 0 {
            return Ordering::Equal;
        }
        // Same sign: compare magnitudes by bit position first.
        let (ma, mb) = (self.msb(), other.msb());
        if ma != mb {
            let ord = ma.cmp(&mb);
            return if sa > 0 { ord } else { ord.reverse() };
        }
        self.sub(other).signum().cmp(&0)
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal(20, Round::Nearest))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal(20, Round::Nearest))
    }
}

impl From<i64> for Dyadic {
    fn from(v: i64) -> Self {
        Dyadic::from_int(v)
    }
}

impl From<&BigInt> for Dyadic {
    fn from(v: &BigInt) -> Self {
        Dyadic::from_int(v.clone())
    }
}

impl From<&BigUint> for Dyadic {
    fn from(v: &BigUint) -> Self {
        Dyadic::from_int(BigInt::from(v.clone()))
    }
}

/// Parse a decimal literal such as `-12`, `3.25`, or `1.5e-7` exactly.
pub fn parse_decimal(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().ok()?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int_part, frac_part) = match mant.find('.') {
        Some(i) => (&mant[..i], &mant[i + 1..]),
        None => (mant, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut n: BigInt = digits.parse().ok()?;
    if neg {
        n = -n;
    }
    let e10 = exp - frac_part.len() as i64;
    let ten = BigInt::from(10u32);
    Some(if e10 >= 0 {
        BigRational::from_integer(n * num_traits::pow(ten, e10 as usize))
    } else {
        BigRational::new(n, num_traits::pow(ten, (-e10) as usize))
    })
}
