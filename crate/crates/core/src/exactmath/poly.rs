//! Dense univariate polynomials over the integers.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::ball::Ball;
use super::dyadic::Dyadic;
use crate::error::{Error, Result};

/// Integer polynomial, coefficients lowest degree first, no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "Vec<String>", try_from = "Vec<String>")]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl From<IntPoly> for Vec<String> {
    fn from(p: IntPoly) -> Self {
        p.coeffs.iter().map(|c| c.to_string()).collect()
    }
}

impl TryFrom<Vec<String>> for IntPoly {
    type Error = String;
    fn try_from(v: Vec<String>) -> std::result::Result<Self, String> {
        let c = v
            .iter()
            .map(|s| s.parse::<BigInt>().map_err(|e| format!("{s}: {e}")))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(IntPoly::new(c))
    }
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn from_i64(c: &[i64]) -> Self {
        IntPoly::new(c.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn zero() -> Self {
        IntPoly { coeffs: vec![] }
    }

    pub fn one() -> Self {
        IntPoly::constant(BigInt::one())
    }

    pub fn constant(c: BigInt) -> Self {
        IntPoly::new(vec![c])
    }

    /// `x^n`.
    pub fn monomial(n: usize) -> Self {
        let mut c = vec![BigInt::zero(); n + 1];
        c[n] = BigInt::one();
        IntPoly { coeffs: c }
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; zero polynomial reports `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree, with the zero polynomial reported as 0.
    pub fn deg(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn lead(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn add(&self, other: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        IntPoly::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        IntPoly::new((0..n).map(|i| self.coeff(i) - other.coeff(i)).collect())
    }

    pub fn neg(&self) -> IntPoly {
        IntPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn mul(&self, other: &IntPoly) -> IntPoly {
        if self.is_zero() || other.is_zero() {
            return IntPoly::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPoly::new(out)
    }

    pub fn scale(&self, c: &BigInt) -> IntPoly {
        IntPoly::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn pow(&self, n: u32) -> IntPoly {
        (0..n).fold(IntPoly::one(), |acc, _| acc.mul(self))
    }

    pub fn derivative(&self) -> IntPoly {
        IntPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    /// `p(-x)`.
    pub fn reflect(&self) -> IntPoly {
        IntPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| if i % 2 == 1 { -c } else { c.clone() })
                .collect(),
        )
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_rational(&self, x: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * x + BigRational::from_integer(c.clone()))
    }

    /// Exact evaluation at a dyadic complex point.
    pub fn eval_dyadic(&self, re: &Dyadic, im: &Dyadic) -> (Dyadic, Dyadic) {
        let mut ar = Dyadic::zero();
        let mut ai = Dyadic::zero();
        for c in self.coeffs.iter().rev() {
            let nr = ar.mul(re).sub(&ai.mul(im)).add(&Dyadic::from(c));
            let ni = ar.mul(im).add(&ai.mul(re));
            ar = nr;
            ai = ni;
        }
        (ar, ai)
    }

    /// Ball evaluation (Horner).
    pub fn eval_ball(&self, z: &Ball) -> Ball {
        let prec = z.prec();
        self.coeffs.iter().rev().fold(Ball::zero(prec), |acc, c| {
            acc.mul(z).add(&Ball::from_int(c, prec))
        })
    }

    /// Greatest common divisor of the coefficients (nonnegative).
    pub fn content(&self) -> BigInt {
        self.coeffs
            .iter()
            .fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Divide out the content and make the leading coefficient positive.
    pub fn primitive_part(&self) -> IntPoly {
        if self.is_zero() {
            return IntPoly::zero();
        }
        let mut g = self.content();
        if self.lead().is_negative() {
            g = -g;
        }
        IntPoly::new(self.coeffs.iter().map(|c| c / &g).collect())
    }

    /// Pseudo-remainder `lc(b)^(deg a - deg b + 1) * a mod b`.
    pub fn prem(&self, b: &IntPoly) -> IntPoly {
        assert!(!b.is_zero(), "pseudo-division by zero polynomial");
        let db = b.deg();
        let lb = b.lead();
        let mut r = self.clone();
        if r.is_zero() || r.deg() < db {
            return r;
        }
        let mut steps = (r.deg() - db + 1) as u32;
        while !r.is_zero() && r.deg() >= db {
            let shift = r.deg() - db;
            let lr = r.lead();
            let t = IntPoly::monomial(shift).mul(b).scale(&lr);
            r = r.scale(&lb).sub(&t);
            steps -= 1;
        }
        if steps > 0 {
            r = r.scale(&num_traits::pow(lb, steps as usize));
        }
        r
    }

    /// Division with remainder when the divisor is monic or divides exactly over Z.
    /// Returns `None` if some quotient coefficient is not an integer.
    pub fn div_rem(&self, b: &IntPoly) -> Option<(IntPoly, IntPoly)> {
        assert!(!b.is_zero(), "division by zero polynomial");
        let db = b.deg();
        let lb = b.lead();
        let mut r = self.coeffs.clone();
        if self.is_zero() || self.deg() < db {
            return Some((IntPoly::zero(), self.clone()));
        }
        let mut q = vec![BigInt::zero(); self.deg() - db + 1];
        for i in (0..q.len()).rev() {
            let top = &r[i + db];
            if top.is_zero() {
                continue;
            }
            let (c, rem) = top.div_rem(&lb);
            if !rem.is_zero() {
                return None;
            }
            for (j, bj) in b.coeffs.iter().enumerate() {
                r[i + j] -= &c * bj;
            }
            q[i] = c;
        }
        Some((IntPoly::new(q), IntPoly::new(r)))
    }

    /// Exact quotient `self / b`, or `None` if `b` does not divide `self` in Z[x].
    pub fn div_exact(&self, b: &IntPoly) -> Option<IntPoly> {
        match self.div_rem(b)? {
            (q, r) if r.is_zero() => Some(q),
            _ => None,
        }
    }

    pub fn divides(&self, other: &IntPoly) -> bool {
        other.div_exact(self).is_some()
    }

    /// Primitive gcd with positive leading coefficient (primitive PRS).
    pub fn gcd(&self, other: &IntPoly) -> IntPoly {
        let mut a = self.primitive_part();
        let mut b = other.primitive_part();
        if a.is_zero() {
            return b;
        }
        if b.is_zero() {
            return a;
        }
        if a.deg() < b.deg() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            let r = a.prem(&b);
            a = b;
            b = r.primitive_part();
        }
        a.primitive_part()
    }

    /// Sylvester-matrix resultant.
    pub fn resultant(&self, other: &IntPoly) -> Result<BigInt> {
        poly_resultant(self, other)
    }
}

impl fmt::Debug for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let show_coeff = i == 0 || !a.is_one();
            if show_coeff {
                write!(f, "{a}")?;
            }
            match i {
                0 => {}
                1 => write!(f, "x")?,
                _ => write!(f, "x^{i}")?,
            }
        }
        Ok(())
    }
}

/// Minimal exact-division ring interface for fraction-free elimination.
trait ExactRing: Clone {
    fn r_zero() -> Self;
    fn r_one() -> Self;
    fn r_is_zero(&self) -> bool;
    fn r_mul(&self, o: &Self) -> Self;
    fn r_sub(&self, o: &Self) -> Self;
    fn r_neg(&self) -> Self;
    fn r_div_exact(&self, o: &Self) -> Self;
}

impl ExactRing for BigInt {
    fn r_zero() -> Self {
        Zero::zero()
    }
    fn r_one() -> Self {
        One::one()
    }
    fn r_is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn r_mul(&self, o: &Self) -> Self {
        self * o
    }
    fn r_sub(&self, o: &Self) -> Self {
        self - o
    }
    fn r_neg(&self) -> Self {
        -self
    }
    fn r_div_exact(&self, o: &Self) -> Self {
        debug_assert!((self % o).r_is_zero());
        self / o
    }
}

impl ExactRing for IntPoly {
    fn r_zero() -> Self {
        IntPoly::zero()
    }
    fn r_one() -> Self {
        IntPoly::one()
    }
    fn r_is_zero(&self) -> bool {
        IntPoly::is_zero(self)
    }
    fn r_mul(&self, o: &Self) -> Self {
        IntPoly::mul(self, o)
    }
    fn r_sub(&self, o: &Self) -> Self {
        IntPoly::sub(self, o)
    }
    fn r_neg(&self) -> Self {
        IntPoly::neg(self)
    }
    fn r_div_exact(&self, o: &Self) -> Self {
        IntPoly::div_exact(self, o).expect("Bareiss step divides exactly")
    }
}

/// Determinant by Bareiss fraction-free elimination.
fn bareiss_det<R: ExactRing>(mut m: Vec<Vec<R>>) -> R {
    let n = m.len();
    if n == 0 {
        return R::r_one();
    }
    let mut sign_neg = false;
    let mut prev = R::r_one();
    for k in 0..n - 1 {
        if m[k][k].r_is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].r_is_zero()) {
                Some(i) => {
                    m.swap(i, k);
                    sign_neg = !sign_neg;
                }
                None => return R::r_zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = m[i][j].r_mul(&m[k][k]).r_sub(&m[i][k].r_mul(&m[k][j]));
                m[i][j] = v.r_div_exact(&prev);
            }
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    if sign_neg {
        d.r_neg()
    } else {
        d
    }
}

fn sylvester<R: ExactRing>(p: &[R], q: &[R]) -> Vec<Vec<R>> {
    // p, q given highest degree first.
    let dp = p.len() - 1;
    let dq = q.len() - 1;
    let n = dp + dq;
    let mut m = vec![vec![R::r_zero(); n]; n];
    for i in 0..dq {
        for (j, c) in p.iter().enumerate() {
            m[i][i + j] = c.clone();
        }
    }
    for i in 0..dp {
        for (j, c) in q.iter().enumerate() {
            m[dq + i][i + j] = c.clone();
        }
    }
    m
}

/// Resultant of two nonzero integer polynomials (Sylvester determinant).
pub fn poly_resultant(p: &IntPoly, q: &IntPoly) -> Result<BigInt> {
    if p.is_zero() || q.is_zero() {
        return Err(Error::Domain("resultant of the zero polynomial".into()));
    }
    if p.deg() == 0 && q.deg() == 0 {
        return Ok(BigInt::one());
    }
    let pc: Vec<BigInt> = p.coeffs().iter().rev().cloned().collect();
    let qc: Vec<BigInt> = q.coeffs().iter().rev().cloned().collect();
    Ok(bareiss_det(sylvester(&pc, &qc)))
}

/// `R(x) = Res_y(p(y), x^d p(y/x))`, whose roots are all ratios of roots of `p`.
pub fn ratio_poly(p: &IntPoly) -> Result<IntPoly> {
    if p.is_zero() {
        return Err(Error::Domain("ratio polynomial of the zero polynomial".into()));
    }
    let d = p.deg();
    if d == 0 {
        return Ok(IntPoly::one());
    }
    // Coefficient of y^i in x^d p(y/x) is c_i x^(d-i).
    let py: Vec<IntPoly> = p
        .coeffs()
        .iter()
        .rev()
        .map(|c| IntPoly::constant(c.clone()))
        .collect();
    let qy: Vec<IntPoly> = (0..=d)
        .rev()
        .map(|i| IntPoly::monomial(d - i).scale(&p.coeff(i)))
        .collect();
    Ok(bareiss_det(sylvester(&py, &qy)))
}

/// The `q`-th cyclotomic polynomial.
pub fn cyclotomic(q: u64) -> Result<IntPoly> {
    if q == 0 {
        return Err(Error::Domain("cyclotomic index must be positive".into()));
    }
    let mut num = IntPoly::monomial(q as usize).sub(&IntPoly::one());
    for d in 1..q {
        if q % d == 0 {
            let phi = cyclotomic(d)?;
            num = num
                .div_exact(&phi)
                .ok_or_else(|| Error::Internal(format!("Phi_{d} does not divide x^{q}-1")))?;
        }
    }
    Ok(num)
}

/// Euler's totient.
pub fn totient(mut n: u64) -> u64 {
    let mut out = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            out -= out / p;
        }
        p += 1;
    }
    if n > 1 {
        out -= out / n;
    }
    out
}

/// `p / gcd(p, p')`, primitive with positive leading coefficient.
pub fn squarefree_part(p: &IntPoly) -> Result<IntPoly> {
    if p.is_zero() {
        return Err(Error::Domain("square-free part of the zero polynomial".into()));
    }
    if p.deg() == 0 {
        return Ok(IntPoly::one());
    }
    let g = p.gcd(&p.derivative());
    let q = p
        .primitive_part()
        .div_exact(&g)
        .ok_or_else(|| Error::Internal("gcd does not divide polynomial".into()))?;
    Ok(q.primitive_part())
}

/// Yun square-free decomposition: `(g, j)` pairs with `p = c * prod g^j`, each `g`
/// square-free, primitive, pairwise coprime, and of positive degree.
pub fn squarefree_decomposition(p: &IntPoly) -> Result<Vec<(IntPoly, u32)>> {
    if p.is_zero() {
        return Err(Error::Domain("decomposition of the zero polynomial".into()));
    }
    let f = p.primitive_part();
    if f.deg() == 0 {
        return Ok(vec![]);
    }
    let div = |a: &IntPoly, b: &IntPoly| {
        a.div_exact(b)
            .ok_or_else(|| Error::Internal("inexact division in square-free decomposition".into()))
    };
    let fp = f.derivative();
    let a0 = f.gcd(&fp);
    let mut b = div(&f, &a0)?;
    let c = div(&fp, &a0)?;
    let mut d = c.sub(&b.derivative());
    let mut out = Vec::new();
    let mut j = 1;
    while b.deg() > 0 {
        let a = b.gcd(&d);
        if a.deg() > 0 {
            out.push((a.clone(), j));
        }
        let nb = div(&b, &a)?;
        let nc = div(&d, &a)?;
        d = nc.sub(&nb.derivative());
        b = nb;
        j += 1;
    }
    Ok(out)
}

/// Number of distinct real roots of a square-free polynomial (Sturm sequence).
pub fn count_real_roots(p: &IntPoly) -> usize {
    if p.deg() == 0 {
        return 0;
    }
    let mut seq = vec![p.primitive_part(), p.derivative().primitive_part()];
    loop {
        let n = seq.len();
        // prem with a positive multiplier keeps the Sturm sign convention.
        let lb = seq[n - 1].lead();
        let mut r = seq[n - 2].prem(&seq[n - 1]);
        let steps = seq[n - 2].deg() as i64 - seq[n - 1].deg() as i64 + 1;
        if lb.is_negative() && steps % 2 == 1 {
            r = r.neg();
        }
        if r.is_zero() {
            break;
        }
        let g = r.content();
        let r = IntPoly::new(r.coeffs().iter().map(|c| -(c / &g)).collect());
        seq.push(r);
    }
    let sign_changes = |signs: Vec<i32>| {
        let s: Vec<i32> = signs.into_iter().filter(|&s| s != 0).collect();
        s.windows(2).filter(|w| w[0] != w[1]).count()
    };
    let sign = |c: &BigInt| if c.is_positive() { 1 } else if c.is_negative() { -1 } else { 0 };
    let at_pos: Vec<i32> = seq.iter().map(|q| sign(&q.lead())).collect();
    let at_neg: Vec<i32> = seq
        .iter()
        .map(|q| {
            let s = sign(&q.lead());
            if q.deg() % 2 == 1 {
                -s
            } else {
                s
            }
        })
        .collect();
    sign_changes(at_neg) - sign_changes(at_pos)
}
