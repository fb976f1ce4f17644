//! Midpoint–radius arithmetic over dyadic rationals.
//!
//! [`Real`] is a real interval `[mid - rad, mid + rad]`; [`Ball`] is a complex disk.
//! Every operation rounds the midpoint to the working precision and pushes the
//! rounding error into the radius, so results always contain the exact value of
//! any operands drawn from the inputs.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;

use super::dyadic::{Dyadic, Round};
use crate::error::{Error, Result};

/// Mantissa bits kept for radii (always rounded up).
const RAD_BITS: u32 = 30;

fn rad_up(d: &Dyadic) -> Dyadic {
    d.round(RAD_BITS, Round::Ceil)
}

fn ulp(e: i64) -> Dyadic {
    Dyadic::pow2(e)
}

/// Real ball `mid ± rad`.
#[derive(Clone, PartialEq, Eq)]
pub struct Real {
    mid: Dyadic,
    rad: Dyadic,
    prec: u32,
}

impl Real {
    fn normalized(mid_exact: Dyadic, rad: Dyadic, prec: u32) -> Real {
        let mid = mid_exact.round(prec, Round::Nearest);
        let err = mid_exact.sub(&mid).abs();
        let rad = if err.is_zero() { rad_up(&rad) } else { rad_up(&rad.add(&err)) };
        Real { mid, rad, prec }
    }

    /// Exact point ball; the midpoint is kept at full length.
    pub fn exact(d: Dyadic, prec: u32) -> Real {
        Real {
            mid: d,
            rad: Dyadic::zero(),
            prec,
        }
    }

    pub fn zero(prec: u32) -> Real {
        Real::exact(Dyadic::zero(), prec)
    }

    pub fn one(prec: u32) -> Real {
        Real::exact(Dyadic::one(), prec)
    }

    pub fn from_int(n: &BigInt, prec: u32) -> Real {
        Real::normalized(Dyadic::from(n), Dyadic::zero(), prec)
    }

    pub fn from_i64(n: i64, prec: u32) -> Real {
        Real::from_int(&BigInt::from(n), prec)
    }

    pub fn from_rational(q: &BigRational, prec: u32) -> Real {
        Real::from_endpoints(
            Dyadic::from_rational(q, prec + 4, Round::Floor),
            Dyadic::from_rational(q, prec + 4, Round::Ceil),
            prec,
        )
    }

    /// `p / q` for integers.
    pub fn from_ratio(p: i64, q: i64, prec: u32) -> Real {
        Real::from_rational(&BigRational::new(p.into(), q.into()), prec)
    }

    pub fn from_f64(x: f64, prec: u32) -> Real {
        Real::exact(Dyadic::from_f64(x), prec)
    }

    /// Smallest ball containing `[lo, hi]`.
    pub fn from_endpoints(lo: Dyadic, hi: Dyadic, prec: u32) -> Real {
        debug_assert!(lo <= hi, "inverted endpoints");
        let mid = lo.add(&hi).mul_pow2(-1);
        let rad = hi.sub(&lo).mul_pow2(-1);
        Real::normalized(mid, rad, prec)
    }

    pub fn mid(&self) -> &Dyadic {
        &self.mid
    }

    pub fn rad(&self) -> &Dyadic {
        &self.rad
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn with_prec(&self, prec: u32) -> Real {
        Real::normalized(self.mid.clone(), self.rad.clone(), prec)
    }

    pub fn lower(&self) -> Dyadic {
        self.mid.sub(&self.rad)
    }

    pub fn upper(&self) -> Dyadic {
        self.mid.add(&self.rad)
    }

    pub fn to_f64(&self) -> f64 {
        self.mid.to_f64()
    }

    /// Widen by `e ≥ 0`.
    pub fn inflate(&self, e: &Dyadic) -> Real {
        Real {
            mid: self.mid.clone(),
            rad: rad_up(&self.rad.add(&e.abs())),
            prec: self.prec,
        }
    }

    pub fn contains(&self, x: &Dyadic) -> bool {
        self.mid.sub(x).abs() <= self.rad
    }

    pub fn contains_rational(&self, q: &BigRational) -> bool {
        let lo = self.lower().to_rational();
        let hi = self.upper().to_rational();
        &lo <= q && q <= &hi
    }

    pub fn contains_zero(&self) -> bool {
        self.mid.abs() <= self.rad
    }

    pub fn is_positive(&self) -> bool {
        self.lower().is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.upper().is_negative()
    }

    /// Certified `self < other`.
    pub fn lt(&self, other: &Real) -> bool {
        self.upper() < other.lower()
    }

    /// Certified `self <= other`.
    pub fn le(&self, other: &Real) -> bool {
        self.upper() <= other.lower()
    }

    fn p2(&self, other: &Real) -> u32 {
        self.prec.max(other.prec)
    }

    pub fn add(&self, other: &Real) -> Real {
        Real::normalized(self.mid.add(&other.mid), self.rad.add(&other.rad), self.p2(other))
    }

    pub fn sub(&self, other: &Real) -> Real {
        Real::normalized(self.mid.sub(&other.mid), self.rad.add(&other.rad), self.p2(other))
    }

    pub fn neg(&self) -> Real {
        Real {
            mid: self.mid.neg(),
            rad: self.rad.clone(),
            prec: self.prec,
        }
    }

    pub fn mul(&self, other: &Real) -> Real {
        let mid = self.mid.mul(&other.mid);
        let rad = self
            .mid
            .abs()
            .mul(&other.rad)
            .add(&other.mid.abs().mul(&self.rad))
            .add(&self.rad.mul(&other.rad));
        Real::normalized(mid, rad, self.p2(other))
    }

    pub fn mul_int(&self, n: i64) -> Real {
        self.mul(&Real::exact(Dyadic::from(n), self.prec))
    }

    pub fn mul_pow2(&self, k: i64) -> Real {
        Real {
            mid: self.mid.mul_pow2(k),
            rad: self.rad.mul_pow2(k),
            prec: self.prec,
        }
    }

    pub fn sqr(&self) -> Real {
        self.mul(self)
    }

    pub fn inv(&self) -> Result<Real> {
        let m = self.mid.abs();
        let lo = m.sub(&self.rad);
        if !lo.is_positive() {
            return Err(Error::Domain("inverse of a ball containing zero".into()));
        }
        let (q, u) = Dyadic::div_round(&Dyadic::one(), &self.mid, self.prec + 2, Round::Floor);
        let (r, _) = Dyadic::div_round(&self.rad, &m.mul(&lo), RAD_BITS, Round::Ceil);
        Ok(Real::normalized(q, r.add(&ulp(u)), self.prec))
    }

    pub fn div(&self, other: &Real) -> Result<Real> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn div_int(&self, n: i64) -> Real {
        assert!(n != 0, "division by zero");
        self.div(&Real::exact(Dyadic::from(n), self.prec))
            .expect("nonzero integer divisor")
    }

    pub fn abs(&self) -> Real {
        if self.contains_zero() {
            let hi = self.mid.abs().add(&self.rad);
            Real::from_endpoints(Dyadic::zero(), hi, self.prec)
        } else if self.mid.is_negative() {
            self.neg()
        } else {
            self.clone()
        }
    }

    /// Ball enclosing `max(self, other)`.
    pub fn max(&self, other: &Real) -> Real {
        let lo = Dyadic::max(&self.lower(), &other.lower());
        let hi = Dyadic::max(&self.upper(), &other.upper());
        Real::from_endpoints(lo, hi, self.p2(other))
    }

    pub fn min(&self, other: &Real) -> Real {
        let lo = Dyadic::min(&self.lower(), &other.lower());
        let hi = Dyadic::min(&self.upper(), &other.upper());
        Real::from_endpoints(lo, hi, self.p2(other))
    }

    pub fn hull(&self, other: &Real) -> Real {
        let lo = Dyadic::min(&self.lower(), &other.lower());
        let hi = Dyadic::max(&self.upper(), &other.upper());
        Real::from_endpoints(lo, hi, self.p2(other))
    }

    /// Clamp the lower end at zero (for quantities known to be nonnegative).
    pub fn clamp_nonneg(&self) -> Real {
        if self.lower().is_negative() {
            let hi = Dyadic::max(&self.upper(), &Dyadic::zero());
            Real::from_endpoints(Dyadic::zero(), hi, self.prec)
        } else {
            self.clone()
        }
    }

    pub fn pow_u(&self, mut n: u64) -> Real {
        let mut base = self.clone();
        let mut acc = Real::one(self.prec);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.sqr();
            }
        }
        acc
    }

    pub fn sqrt(&self) -> Result<Real> {
        let lo = self.lower();
        if lo.is_negative() {
            if self.contains_zero() && self.upper() >= Dyadic::zero() {
                let hi = self.upper().sqrt_round(self.prec + 2, Round::Ceil);
                return Ok(Real::from_endpoints(Dyadic::zero(), hi, self.prec));
            }
            return Err(Error::Domain("square root of a negative ball".into()));
        }
        Ok(Real::from_endpoints(
            lo.sqrt_round(self.prec + 2, Round::Floor),
            self.upper().sqrt_round(self.prec + 2, Round::Ceil),
            self.prec,
        ))
    }

    pub fn exp(&self) -> Real {
        let lo = exp_point(&self.lower(), self.prec).lower();
        let hi = exp_point(&self.upper(), self.prec).upper();
        Real::from_endpoints(lo, hi, self.prec)
    }

    pub fn log(&self) -> Result<Real> {
        let lo = self.lower();
        if !lo.is_positive() {
            return Err(Error::Domain("logarithm of a ball not bounded away from zero".into()));
        }
        let l = log_point(&lo, self.prec).lower();
        let h = log_point(&self.upper(), self.prec).upper();
        Ok(Real::from_endpoints(l, h, self.prec))
    }

    /// `self^y` for `self > 0`.
    pub fn pow(&self, y: &Real) -> Result<Real> {
        Ok(y.mul(&self.log()?).exp())
    }

    /// Decimal rendering of the upper end, rounded up.
    pub fn upper_decimal(&self, digits: u32) -> String {
        self.upper().to_decimal(digits, Round::Ceil)
    }

    /// Decimal rendering of the lower end, rounded down.
    pub fn lower_decimal(&self, digits: u32) -> String {
        self.lower().to_decimal(digits, Round::Floor)
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{} +/- {}]",
            self.mid.to_decimal(20, Round::Nearest),
            self.rad.to_decimal(3, Round::Ceil)
        )
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// `exp(x)` for an exact dyadic `x`, as a ball of precision `prec`.
pub fn exp_point(x: &Dyadic, prec: u32) -> Real {
    if x.is_zero() {
        return Real::one(prec);
    }
    // Reduce to |y| < 1/2, then square back.
    let s = (x.msb() + 1).max(0) as u32;
    let wp = prec + 32 + s;
    let y = Real::exact(x.mul_pow2(-(s as i64)), wp);
    let eps = Dyadic::pow2(-(wp as i64) - 4);
    let mut sum = Real::one(wp);
    let mut term = Real::one(wp);
    let mut j = 1i64;
    loop {
        term = term.mul(&y).div_int(j);
        sum = sum.add(&term);
        let t = term.mid().abs().add(term.rad());
        if t < eps && j > 2 {
            // Tail terms shrink by at least a factor 4 each.
            sum = sum.inflate(&t);
            break;
        }
        j += 1;
    }
    for _ in 0..s {
        sum = sum.sqr();
    }
    sum.with_prec(prec)
}

fn atanh_series(z: &Real, wp: u32) -> Real {
    // sum_{j>=0} z^{2j+1} / (2j+1), valid for |z| <= 1/3; tail < 2 |next term|.
    let z2 = z.sqr();
    let eps = Dyadic::pow2(-(wp as i64) - 4);
    let mut term = z.clone();
    let mut sum = Real::zero(wp);
    let mut j = 0i64;
    loop {
        sum = sum.add(&term.div_int(2 * j + 1));
        term = term.mul(&z2);
        let t = term.mid().abs().add(term.rad());
        if t < eps {
            sum = sum.inflate(&t.mul_pow2(1));
            break;
        }
        j += 1;
    }
    sum
}

const CONST_CACHE_BITS: u32 = 4096;

fn ln2_uncached(prec: u32) -> Real {
    let wp = prec + 32;
    let third = Real::from_ratio(1, 3, wp);
    atanh_series(&third, wp).mul_pow2(1).with_prec(prec)
}

/// `log 2` as a ball.
pub fn ln2(prec: u32) -> Real {
    static CACHE: std::sync::OnceLock<Real> = std::sync::OnceLock::new();
    if prec <= CONST_CACHE_BITS {
        CACHE.get_or_init(|| ln2_uncached(CONST_CACHE_BITS)).with_prec(prec)
    } else {
        ln2_uncached(prec)
    }
}

fn atan_inv(k: i64, wp: u32) -> Real {
    // atan(1/k) = sum (-1)^j / ((2j+1) k^{2j+1}); alternating, tail below first omitted term.
    let eps = Dyadic::pow2(-(wp as i64) - 4);
    let inv_k = Real::from_ratio(1, k, wp);
    let inv_k2 = inv_k.sqr();
    let mut power = inv_k;
    let mut sum = Real::zero(wp);
    let mut j = 0i64;
    loop {
        let t = power.div_int(2 * j + 1);
        sum = if j % 2 == 0 { sum.add(&t) } else { sum.sub(&t) };
        power = power.mul(&inv_k2);
        let mag = power.mid().abs().add(power.rad());
        if mag < eps {
            sum = sum.inflate(&mag);
            break;
        }
        j += 1;
    }
    sum
}

fn pi_uncached(prec: u32) -> Real {
    let wp = prec + 32;
    atan_inv(5, wp)
        .mul_int(16)
        .sub(&atan_inv(239, wp).mul_int(4))
        .with_prec(prec)
}

/// `pi` as a ball.
pub fn pi(prec: u32) -> Real {
    static CACHE: std::sync::OnceLock<Real> = std::sync::OnceLock::new();
    if prec <= CONST_CACHE_BITS {
        CACHE.get_or_init(|| pi_uncached(CONST_CACHE_BITS)).with_prec(prec)
    } else {
        pi_uncached(prec)
    }
}

/// Euler's number as a ball.
pub fn e_const(prec: u32) -> Real {
    exp_point(&Dyadic::one(), prec)
}

/// `log(x)` for an exact dyadic `x > 0`.
pub fn log_point(x: &Dyadic, prec: u32) -> Real {
    assert!(x.is_positive(), "log of nonpositive dyadic");
    // x = f * 2^e with f in [3/4, 3/2).
    let mut e = x.msb() - 1;
    let mut f = x.mul_pow2(-e);
    if f.mul_pow2(1) > Dyadic::from(3) {
        f = f.mul_pow2(-1);
        e += 1;
    }
    let ebits = 64 - (e.unsigned_abs()).leading_zeros();
    let wp = prec + 32 + ebits;
    let fr = Real::exact(f, wp);
    let one = Real::one(wp);
    let z = fr.sub(&one).div(&fr.add(&one)).expect("f + 1 > 0");
    let mut out = atanh_series(&z, wp).mul_pow2(1);
    if e != 0 {
        out = out.add(&ln2(wp).mul_int(e));
    }
    out.with_prec(prec)
}

/// Natural log of a positive integer.
pub fn log_int(n: &BigInt, prec: u32) -> Real {
    assert!(n.is_positive(), "log of nonpositive integer");
    log_point(&Dyadic::from(n), prec)
}

/// Complex disk `center ± rad`.
#[derive(Clone, PartialEq, Eq)]
pub struct Ball {
    re: Dyadic,
    im: Dyadic,
    rad: Dyadic,
    prec: u32,
}

impl Ball {
    fn normalized(re: Dyadic, im: Dyadic, rad: Dyadic, prec: u32) -> Ball {
        let r = re.round(prec, Round::Nearest);
        let i = im.round(prec, Round::Nearest);
        let err = re.sub(&r).abs().add(&im.sub(&i).abs());
        Ball {
            re: r,
            im: i,
            rad: rad_up(&rad.add(&err)),
            prec,
        }
    }

    pub fn new(re: Dyadic, im: Dyadic, rad: Dyadic, prec: u32) -> Ball {
        assert!(!rad.is_negative(), "negative radius");
        Ball::normalized(re, im, rad, prec)
    }

    pub fn exact(re: Dyadic, im: Dyadic, prec: u32) -> Ball {
        Ball {
            re,
            im,
            rad: Dyadic::zero(),
            prec,
        }
    }

    pub fn from_int(n: &BigInt, prec: u32) -> Ball {
        Ball::normalized(Dyadic::from(n), Dyadic::zero(), Dyadic::zero(), prec)
    }

    pub fn from_real(x: &Real) -> Ball {
        Ball {
            re: x.mid().clone(),
            im: Dyadic::zero(),
            rad: x.rad().clone(),
            prec: x.prec(),
        }
    }

    pub fn zero(prec: u32) -> Ball {
        Ball::exact(Dyadic::zero(), Dyadic::zero(), prec)
    }

    pub fn one(prec: u32) -> Ball {
        Ball::exact(Dyadic::one(), Dyadic::zero(), prec)
    }

    pub fn mid_re(&self) -> &Dyadic {
        &self.re
    }

    pub fn mid_im(&self) -> &Dyadic {
        &self.im
    }

    pub fn radius(&self) -> &Dyadic {
        &self.rad
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn with_prec(&self, prec: u32) -> Ball {
        Ball::normalized(self.re.clone(), self.im.clone(), self.rad.clone(), prec)
    }

    pub fn inflate(&self, e: &Dyadic) -> Ball {
        Ball {
            re: self.re.clone(),
            im: self.im.clone(),
            rad: rad_up(&self.rad.add(&e.abs())),
            prec: self.prec,
        }
    }

    /// `|center|^2`, exact.
    pub fn center_norm_sqr(&self) -> Dyadic {
        self.re.square().add(&self.im.square())
    }

    pub fn center_abs_upper(&self) -> Dyadic {
        self.center_norm_sqr().sqrt_round(RAD_BITS + 8, Round::Ceil)
    }

    pub fn center_abs_lower(&self) -> Dyadic {
        self.center_norm_sqr().sqrt_round(RAD_BITS + 8, Round::Floor)
    }

    /// Enclosure of `|z|` over the disk.
    pub fn abs(&self) -> Real {
        let n = self.center_norm_sqr();
        let hi = n.sqrt_round(self.prec + 4, Round::Ceil).add(&self.rad);
        let lo = n.sqrt_round(self.prec + 4, Round::Floor).sub(&self.rad);
        let lo = if lo.is_negative() { Dyadic::zero() } else { lo };
        Real::from_endpoints(lo, hi, self.prec)
    }

    pub fn real_part(&self) -> Real {
        Real::normalized(self.re.clone(), self.rad.clone(), self.prec)
    }

    pub fn imag_part(&self) -> Real {
        Real::normalized(self.im.clone(), self.rad.clone(), self.prec)
    }

    pub fn conj(&self) -> Ball {
        Ball {
            re: self.re.clone(),
            im: self.im.neg(),
            rad: self.rad.clone(),
            prec: self.prec,
        }
    }

    pub fn contains_zero(&self) -> bool {
        self.center_norm_sqr() <= self.rad.square()
    }

    pub fn contains_point(&self, re: &Dyadic, im: &Dyadic) -> bool {
        let dr = self.re.sub(re);
        let di = self.im.sub(im);
        dr.square().add(&di.square()) <= self.rad.square()
    }

    pub fn contains_int(&self, n: &BigInt) -> bool {
        self.contains_point(&Dyadic::from(n), &Dyadic::zero())
    }

    /// Whether the closed disks intersect.
    pub fn overlaps(&self, other: &Ball) -> bool {
        let dr = self.re.sub(&other.re);
        let di = self.im.sub(&other.im);
        let r = self.rad.add(&other.rad);
        dr.square().add(&di.square()) <= r.square()
    }

    /// Whether the disk meets the real axis.
    pub fn meets_real_axis(&self) -> bool {
        self.im.abs() <= self.rad
    }

    fn p2(&self, other: &Ball) -> u32 {
        self.prec.max(other.prec)
    }

    pub fn add(&self, other: &Ball) -> Ball {
        Ball::normalized(
            self.re.add(&other.re),
            self.im.add(&other.im),
            self.rad.add(&other.rad),
            self.p2(other),
        )
    }

    pub fn sub(&self, other: &Ball) -> Ball {
        Ball::normalized(
            self.re.sub(&other.re),
            self.im.sub(&other.im),
            self.rad.add(&other.rad),
            self.p2(other),
        )
    }

    pub fn neg(&self) -> Ball {
        Ball {
            re: self.re.neg(),
            im: self.im.neg(),
            rad: self.rad.clone(),
            prec: self.prec,
        }
    }

    pub fn mul(&self, other: &Ball) -> Ball {
        let re = self.re.mul(&other.re).sub(&self.im.mul(&other.im));
        let im = self.re.mul(&other.im).add(&self.im.mul(&other.re));
        let rad = if self.rad.is_zero() && other.rad.is_zero() {
            Dyadic::zero()
        } else {
            self.center_abs_upper()
                .mul(&other.rad)
                .add(&other.center_abs_upper().mul(&self.rad))
                .add(&self.rad.mul(&other.rad))
        };
        Ball::normalized(re, im, rad, self.p2(other))
    }

    pub fn mul_real(&self, x: &Real) -> Ball {
        self.mul(&Ball::from_real(x))
    }

    pub fn mul_int(&self, n: &BigInt) -> Ball {
        self.mul(&Ball::exact(Dyadic::from(n), Dyadic::zero(), self.prec))
    }

    pub fn sqr(&self) -> Ball {
        self.mul(self)
    }

    pub fn inv(&self) -> Result<Ball> {
        let n = self.center_norm_sqr();
        let lo = self.center_abs_lower().sub(&self.rad);
        if n.is_zero() || !lo.is_positive() {
            return Err(Error::Domain("inverse of a disk containing zero".into()));
        }
        let p = self.prec + 2;
        let (qr, u1) = Dyadic::div_round(&self.re, &n, p, Round::Floor);
        let (qi, u2) = Dyadic::div_round(&self.im.neg(), &n, p, Round::Floor);
        let (r, _) = Dyadic::div_round(&self.rad, &self.center_abs_lower().mul(&lo), RAD_BITS, Round::Ceil);
        let r = if self.rad.is_zero() { Dyadic::zero() } else { r };
        let mut err = r;
        if !self.re.is_zero() {
            err = err.add(&ulp(u1));
        }
        if !self.im.is_zero() {
            err = err.add(&ulp(u2));
        }
        Ok(Ball::normalized(qr, qi, err, self.prec))
    }

    pub fn div(&self, other: &Ball) -> Result<Ball> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow_u(&self, mut n: u64) -> Ball {
        let mut base = self.clone();
        let mut acc = Ball::one(self.prec);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.sqr();
            }
        }
        acc
    }
}

impl fmt::Debug for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({} {} {}i +/- {})",
            self.re.to_decimal(16, Round::Nearest),
            if self.im.is_negative() { "-" } else { "+" },
            self.im.abs().to_decimal(16, Round::Nearest),
            self.rad.to_decimal(3, Round::Ceil)
        )
    }
}
