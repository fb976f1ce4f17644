//! Integer linear recurrences: exact terms, characteristic roots, degeneracy
//! and the certified Binet decomposition `U_n = sum_i f_i(n) alpha_i^n`.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactmath::{
    certified_roots_capped, cyclotomic, ratio_poly, squarefree_part, totient, Ball, Dyadic,
    IntPoly, Real, RootCluster, DEFAULT_PRECISION_CAP,
};

/// `U_n = a_1 U_{n-1} + ... + a_k U_{n-k}` with integer data.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RecurrenceRepr", into = "RecurrenceRepr")]
pub struct LinearRecurrence {
    coeffs: Vec<BigInt>,
    initials: Vec<BigInt>,
}

#[derive(Serialize, Deserialize)]
struct RecurrenceRepr {
    coefficients: Vec<String>,
    initials: Vec<String>,
}

impl From<LinearRecurrence> for RecurrenceRepr {
    fn from(r: LinearRecurrence) -> Self {
        RecurrenceRepr {
            coefficients: r.coeffs.iter().map(|c| c.to_string()).collect(),
            initials: r.initials.iter().map(|c| c.to_string()).collect(),
        }
    }
}

impl TryFrom<RecurrenceRepr> for LinearRecurrence {
    type Error = Error;

    fn try_from(r: RecurrenceRepr) -> Result<Self> {
        let parse = |v: &[String]| -> Result<Vec<BigInt>> {
            v.iter()
                .map(|s| {
                    s.trim()
                        .parse::<BigInt>()
                        .map_err(|_| Error::InvalidRecurrence(format!("not an integer: {s:?}")))
                })
                .collect()
        };
        LinearRecurrence::new(parse(&r.coefficients)?, parse(&r.initials)?)
    }
}

impl LinearRecurrence {
    pub fn new(coeffs: Vec<BigInt>, initials: Vec<BigInt>) -> Result<Self> {
        let k = coeffs.len();
        if k < 2 {
            return Err(Error::InvalidRecurrence(format!("order must be at least 2, got {k}")));
        }
        if initials.len() != k {
            return Err(Error::InvalidRecurrence(format!(
                "{k} coefficients but {} initial terms",
                initials.len()
            )));
        }
        if coeffs[k - 1].is_zero() {
            return Err(Error::InvalidRecurrence("a_k must be nonzero".into()));
        }
        if initials.iter().all(Zero::is_zero) {
            return Err(Error::InvalidRecurrence("initial terms are all zero".into()));
        }
        Ok(LinearRecurrence { coeffs, initials })
    }

    pub fn from_i64(coeffs: &[i64], initials: &[i64]) -> Result<Self> {
        LinearRecurrence::new(
            coeffs.iter().map(|&c| BigInt::from(c)).collect(),
            initials.iter().map(|&c| BigInt::from(c)).collect(),
        )
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coefficients(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn initials(&self) -> &[BigInt] {
        &self.initials
    }

    /// `U_n`.
    pub fn term(&self, n: u64) -> BigInt {
        let k = self.order();
        if (n as usize) < k {
            return self.initials[n as usize].clone();
        }
        let mut w = self.initials.clone();
        let mut head = 0;
        for _ in k as u64..=n {
            let next = self.step(&w, head);
            w[head] = next;
            head = (head + 1) % k;
        }
        w[(head + k - 1) % k].clone()
    }

    /// `U_0, ..., U_n`.
    pub fn terms(&self, n: u64) -> Vec<BigInt> {
        let k = self.order();
        let mut out: Vec<BigInt> = self.initials.iter().take(n as usize + 1).cloned().collect();
        while out.len() <= n as usize {
            let len = out.len();
            let next = (0..k).fold(BigInt::zero(), |acc, i| acc + &self.coeffs[i] * &out[len - 1 - i]);
            out.push(next);
        }
        out
    }

    // `w` is a ring buffer whose oldest entry sits at `head`.
    fn step(&self, w: &[BigInt], head: usize) -> BigInt {
        let k = self.order();
        (0..k).fold(BigInt::zero(), |acc, i| {
            let idx = (head + k - 1 - i) % k;
            acc + &self.coeffs[i] * &w[idx]
        })
    }

    /// `max(|a_i|, |U_j|)`.
    pub fn gamma(&self) -> BigInt {
        self.coeffs
            .iter()
            .chain(self.initials.iter())
            .map(|c| c.abs())
            .max()
            .unwrap_or_default()
    }

    /// `x^k - a_1 x^{k-1} - ... - a_k`.
    pub fn char_poly(&self) -> IntPoly {
        let mut c: Vec<BigInt> = self.coeffs.iter().rev().map(|a| -a).collect();
        c.push(BigInt::one());
        IntPoly::new(c)
    }
}

/// Outcome of the dominant-root analysis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Dominance {
    /// Index of the cluster whose modulus strictly exceeds all others.
    Dominant(usize),
    /// Two distinct roots provably share the maximal modulus.
    NoDominantRoot,
    /// Refinement reached the precision cap without a decision.
    Undecided,
}

impl Dominance {
    pub fn label(&self) -> &'static str {
        match self {
            Dominance::Dominant(_) => "dominant",
            Dominance::NoDominantRoot => "no_dominant_root",
            Dominance::Undecided => "undecided",
        }
    }
}

/// Certified characteristic roots and their dominance structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectralData {
    pub char_poly: IntPoly,
    pub roots: Vec<RootCluster>,
    pub dominance: Dominance,
    pub dominant_is_simple: bool,
    pub dominant_is_real: bool,
    /// Enclosure of the largest modulus among non-dominant roots.
    pub second_modulus: Option<Real>,
    pub dominant_is_integer_gt1: bool,
}

impl SpectralData {
    /// Number of distinct roots.
    pub fn t(&self) -> usize {
        self.roots.len()
    }

    pub fn dominant_index(&self) -> Option<usize> {
        match self.dominance {
            Dominance::Dominant(i) => Some(i),
            _ => None,
        }
    }

    pub fn dominant(&self) -> Option<&RootCluster> {
        self.dominant_index().map(|i| &self.roots[i])
    }

    /// Errors unless a dominant root is certified.
    pub fn require_dominant(&self) -> Result<usize> {
        match self.dominance {
            Dominance::Dominant(i) => Ok(i),
            Dominance::NoDominantRoot => Err(Error::NoDominantRoot),
            Dominance::Undecided => Err(Error::DominanceUndecided),
        }
    }
}

const FIRST_BITS: u32 = 64;

/// Spectral data with dominance failures reported as errors.
pub fn spectral_data(rec: &LinearRecurrence) -> Result<SpectralData> {
    let s = spectral_analysis(rec, DEFAULT_PRECISION_CAP)?;
    s.require_dominant()?;
    Ok(s)
}

/// Certified roots plus a dominance verdict; only isolation failures are errors.
pub fn spectral_analysis(rec: &LinearRecurrence, precision_cap: u32) -> Result<SpectralData> {
    let f = rec.char_poly();
    let mut bits = FIRST_BITS;
    let mut roots = certified_roots_capped(&f, &Dyadic::pow2(-(bits as i64)), precision_cap)?;
    let dominance = loop {
        let mods: Vec<Real> = roots.iter().map(|c| c.ball.abs()).collect();
        if let Some(i) = strict_max(&mods) {
            break Dominance::Dominant(i);
        }
        if provably_shared_max(&f, &roots, &mods, bits, precision_cap) {
            break Dominance::NoDominantRoot;
        }
        bits *= 2;
        if bits > precision_cap {
            break Dominance::Undecided;
        }
        match certified_roots_capped(&f, &Dyadic::pow2(-(bits as i64)), precision_cap) {
            Ok(r) => roots = r,
            Err(Error::PrecisionExhausted { .. }) => break Dominance::Undecided,
            Err(e) => return Err(e),
        }
    };

    let mut out = SpectralData {
        char_poly: f.clone(),
        roots,
        dominance: dominance.clone(),
        dominant_is_simple: false,
        dominant_is_real: false,
        second_modulus: None,
        dominant_is_integer_gt1: false,
    };
    if let Dominance::Dominant(d) = dominance {
        let dom = &out.roots[d];
        out.dominant_is_simple = dom.multiplicity == 1;
        out.dominant_is_real = dom.ball.mid_im().is_zero();
        out.second_modulus = out
            .roots
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != d)
            .map(|(_, c)| c.ball.abs())
            .reduce(|a, b| a.max(&b));
        out.dominant_is_integer_gt1 = out.dominant_is_real && integer_root_gt1(&f, &dom.ball);
    }
    Ok(out)
}

fn strict_max(mods: &[Real]) -> Option<usize> {
    (0..mods.len()).find(|&i| (0..mods.len()).all(|j| j == i || mods[j].lt(&mods[i])))
}

/// The root of maximal modulus lies in one of the clusters whose modulus interval
/// reaches the largest lower bound. If each of those is non-real, or is a root
/// `z` with `-z` also a root, the maximum is attained twice.
fn provably_shared_max(
    f: &IntPoly,
    roots: &[RootCluster],
    mods: &[Real],
    bits: u32,
    cap: u32,
) -> bool {
    let top_lo = mods.iter().map(Real::lower).max().expect("nonempty root list");
    let cand: Vec<usize> = (0..roots.len()).filter(|&j| mods[j].upper() >= top_lo).collect();
    let nonreal = |j: usize| !roots[j].ball.mid_im().is_zero();
    if cand.iter().all(|&j| nonreal(j)) {
        return true;
    }
    let fm = IntPoly::new(
        f.coeffs()
            .iter()
            .enumerate()
            .map(|(i, c)| if i % 2 == 1 { -c } else { c.clone() })
            .collect(),
    );
    let h = f.gcd(&fm);
    if h.deg() == 0 {
        return false;
    }
    let Ok(hroots) = certified_roots_capped(&h, &Dyadic::pow2(-(bits as i64) - 4), cap) else {
        return false;
    };
    let symmetric = |j: usize| {
        let b = &roots[j].ball;
        hroots.iter().any(|hr| disk_inside(&hr.ball, b))
    };
    cand.iter().all(|&j| nonreal(j) || symmetric(j))
}

fn disk_inside(inner: &Ball, outer: &Ball) -> bool {
    if inner.radius() > outer.radius() {
        return false;
    }
    let slack = outer.radius().sub(inner.radius());
    outer.contains_point(inner.mid_re(), inner.mid_im()) && {
        let dr = outer.mid_re().sub(inner.mid_re());
        let di = outer.mid_im().sub(inner.mid_im());
        dr.square().add(&di.square()) <= slack.square()
    }
}

/// Exact test for an integer `n >= 2` inside `disk` with `f(n) = 0`.
fn integer_root_gt1(f: &IntPoly, disk: &Ball) -> bool {
    let lo = disk.mid_re().sub(disk.radius()).floor_int();
    let hi = disk.mid_re().add(disk.radius()).ceil_int();
    let two = BigInt::from(2);
    let mut n = lo.max(two);
    while n <= hi {
        if disk.contains_int(&n) && f.eval(&n).is_zero() {
            return true;
        }
        n += 1;
    }
    false
}

/// Whether some ratio of distinct characteristic roots is a root of unity.
///
/// Decided exactly: the ratios are the roots of `R = ratio_poly(sqfree(f))`, and a
/// primitive `q`-th root of unity among them forces `Phi_q | R`. Such a ratio lies
/// in a field of degree at most `k^2`, so `phi(q) <= k^2` and `q <= 2 k^4`.
pub fn is_degenerate(rec: &LinearRecurrence) -> Result<bool> {
    Ok(degeneracy_witness(rec)?.is_some())
}

/// Smallest `q >= 2` with `Phi_q | R`, if any.
pub fn degeneracy_witness(rec: &LinearRecurrence) -> Result<Option<u64>> {
    let g = squarefree_part(&rec.char_poly())?;
    if g.deg() < 2 {
        return Ok(None);
    }
    let r = ratio_poly(&g)?;
    let k = rec.order() as u64;
    let qmax = 2 * k.pow(4);
    for q in 2..=qmax {
        if totient(q) as usize > r.deg() {
            continue;
        }
        if cyclotomic(q)?.divides(&r) {
            return Ok(Some(q));
        }
    }
    Ok(None)
}

/// Binet coefficients `f_i(n) = sum_l beta_{i,l} n^l` as complex balls.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinetForm {
    /// `beta[i][l]`, indexed like the spectral clusters.
    pub coeff_polys: Vec<Vec<Ball>>,
    /// Root enclosures refined to the working precision.
    pub roots: Vec<Ball>,
    pub dominant_index: usize,
    pub eta1: Ball,
    pub precision: u32,
}

/// Terms checked against the recursion before a Binet form is returned.
pub const BINET_SELF_CHECK: u64 = 50;

const BINET_START_PREC: u32 = 128;

impl BinetForm {
    /// `f_i(n)`.
    pub fn f_eval(&self, i: usize, n: u64) -> Ball {
        let prec = self.precision;
        let nb = Ball::from_int(&BigInt::from(n), prec);
        let mut acc = Ball::zero(prec);
        for b in self.coeff_polys[i].iter().rev() {
            acc = acc.mul(&nb).add(b);
        }
        acc
    }

    /// `sum_i f_i(n) alpha_i^n`.
    pub fn eval(&self, n: u64) -> Ball {
        (0..self.roots.len()).fold(Ball::zero(self.precision), |acc, i| {
            acc.add(&self.f_eval(i, n).mul(&self.roots[i].pow_u(n)))
        })
    }

    /// All `beta_{i,l}` with their cluster index and degree.
    pub fn betas(&self) -> impl Iterator<Item = (usize, usize, &Ball)> {
        self.coeff_polys
            .iter()
            .enumerate()
            .flat_map(|(i, v)| v.iter().enumerate().map(move |(l, b)| (i, l, b)))
    }
}

/// Solve the confluent Vandermonde system for the Binet coefficients, raising the
/// precision until `eta_1` is certified nonzero.
pub fn binet_decomposition(rec: &LinearRecurrence, spec: &SpectralData) -> Result<BinetForm> {
    binet_decomposition_capped(rec, spec, DEFAULT_PRECISION_CAP)
}

pub fn binet_decomposition_capped(
    rec: &LinearRecurrence,
    spec: &SpectralData,
    precision_cap: u32,
) -> Result<BinetForm> {
    let d = spec.require_dominant()?;
    if !spec.dominant_is_simple {
        return Err(Error::NotConstantLeadCoefficient);
    }
    let mut prec = BINET_START_PREC;
    loop {
        if prec > precision_cap {
            return Err(Error::Eta1Uncertified);
        }
        let refined = match refine_roots(spec, prec, precision_cap) {
            Ok(r) => r,
            Err(Error::PrecisionExhausted { .. }) => return Err(Error::Eta1Uncertified),
            Err(e) => return Err(e),
        };
        if let Some(coeff_polys) = solve_binet(rec, spec, &refined, prec) {
            let eta1 = coeff_polys[d][0].clone();
            if !eta1.contains_zero() {
                let bf = BinetForm {
                    coeff_polys,
                    roots: refined,
                    dominant_index: d,
                    eta1,
                    precision: prec,
                };
                for (n, u) in rec.terms(BINET_SELF_CHECK).iter().enumerate() {
                    if !bf.eval(n as u64).contains_int(u) {
                        return Err(Error::Internal(format!(
                            "Binet form does not enclose U_{n}"
                        )));
                    }
                }
                return Ok(bf);
            }
        }
        prec *= 2;
    }
}

/// Root disks of radius about `2^-prec`, aligned with `spec.roots`.
fn refine_roots(spec: &SpectralData, prec: u32, cap: u32) -> Result<Vec<Ball>> {
    let fine = certified_roots_capped(&spec.char_poly, &Dyadic::pow2(-(prec as i64)), cap)?;
    let mut out = Vec::with_capacity(spec.roots.len());
    for c in &spec.roots {
        let hits: Vec<&RootCluster> = fine.iter().filter(|f| f.ball.overlaps(&c.ball)).collect();
        match hits.as_slice() {
            [one] if one.multiplicity == c.multiplicity => out.push(one.ball.with_prec(prec)),
            _ => return Err(Error::Internal("refined roots do not match the spectral clusters".into())),
        }
    }
    Ok(out)
}

/// Gaussian elimination with partial pivoting over complex balls. Returns `None`
/// when no pivot can be certified nonzero at this precision.
fn solve_binet(
    rec: &LinearRecurrence,
    spec: &SpectralData,
    roots: &[Ball],
    prec: u32,
) -> Option<Vec<Vec<Ball>>> {
    let k = rec.order();
    let cols: Vec<(usize, usize)> = spec
        .roots
        .iter()
        .enumerate()
        .flat_map(|(i, c)| (0..c.multiplicity as usize).map(move |l| (i, l)))
        .collect();
    debug_assert_eq!(cols.len(), k);
    let mut a: Vec<Vec<Ball>> = (0..k)
        .map(|n| {
            let mut row: Vec<Ball> = cols
                .iter()
                .map(|&(i, l)| {
                    let nl = if l == 0 { BigInt::one() } else { BigInt::from(n).pow(l as u32) };
                    roots[i].pow_u(n as u64).mul_int(&nl)
                })
                .collect();
            row.push(Ball::from_int(&rec.initials()[n], prec));
            row
        })
        .collect();
    for c in 0..k {
        let piv = (c..k)
            .filter(|&r| !a[r][c].contains_zero())
            .max_by(|&x, &y| a[x][c].center_norm_sqr().cmp(&a[y][c].center_norm_sqr()))?;
        a.swap(c, piv);
        let inv = a[c][c].inv().ok()?;
        for r in c + 1..k {
            let factor = a[r][c].mul(&inv);
            for j in c..=k {
                let t = factor.mul(&a[c][j]);
                a[r][j] = a[r][j].sub(&t);
            }
        }
    }
    let mut x = vec![Ball::zero(prec); k];
    for c in (0..k).rev() {
        let mut s = a[c][k].clone();
        for j in c + 1..k {
            s = s.sub(&a[c][j].mul(&x[j]));
        }
        x[c] = s.div(&a[c][c]).ok()?;
    }
    let mut out: Vec<Vec<Ball>> = spec
        .roots
        .iter()
        .map(|c| Vec::with_capacity(c.multiplicity as usize))
        .collect();
    for (&(i, _), v) in cols.iter().zip(x) {
        out[i].push(v);
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fib() -> LinearRecurrence {
        LinearRecurrence::from_i64(&[1, 1], &[0, 1]).unwrap()
    }

    #[test]
    fn validation() {
        assert!(LinearRecurrence::from_i64(&[3, -2], &[0, 1]).is_ok());
        assert!(matches!(
            LinearRecurrence::from_i64(&[1, 0], &[0, 1]),
            Err(Error::InvalidRecurrence(_))
        ));
        assert!(LinearRecurrence::from_i64(&[1, 1], &[0, 0]).is_err());
        assert!(LinearRecurrence::from_i64(&[2], &[1]).is_err());
    }

    #[test]
    fn terms_and_gamma() {
        assert_eq!(fib().term(10), BigInt::from(55));
        let m = LinearRecurrence::from_i64(&[3, -2], &[0, 1]).unwrap();
        assert_eq!(m.term(5), BigInt::from(31));
        for n in 0..=10u64 {
            assert_eq!(m.term(n), BigInt::from((1i64 << n) - 1));
        }
        assert_eq!(m.terms(12).last().unwrap(), &m.term(12));
        assert_eq!(fib().gamma(), BigInt::from(1));
        assert_eq!(m.gamma(), BigInt::from(3));
        assert_eq!(LinearRecurrence::from_i64(&[1, 1], &[2, -5]).unwrap().gamma(), BigInt::from(5));
    }

    #[test]
    fn fibonacci_spectrum() {
        let s = spectral_data(&fib()).unwrap();
        let d = s.dominant().unwrap();
        assert!((d.ball.mid_re().to_f64() - 1.618_033_988_749_895).abs() < 1e-12);
        assert!(s.dominant_is_simple && s.dominant_is_real && !s.dominant_is_integer_gt1);
        let m2 = s.second_modulus.unwrap();
        assert!((m2.to_f64() - 0.618_033_988_749_895).abs() < 1e-12);
    }

    #[test]
    fn integer_dominant_root() {
        let m = LinearRecurrence::from_i64(&[3, -2], &[0, 1]).unwrap();
        assert!(spectral_data(&m).unwrap().dominant_is_integer_gt1);
    }

    #[test]
    fn equal_moduli_detected() {
        for c in [[0, 1], [0, -1]] {
            let r = LinearRecurrence::from_i64(&c, &[0, 1]).unwrap();
            assert_eq!(spectral_data(&r), Err(Error::NoDominantRoot));
        }
    }

    #[test]
    fn degeneracy() {
        let cases: [(&[i64], bool); 6] = [
            (&[0, 1], true),
            (&[0, -1], true),
            (&[1, 1], false),
            (&[2, 1], false),
            (&[1, 1, 1], false),
            (&[3, -2], false),
        ];
        for (c, want) in cases {
            let r = LinearRecurrence::from_i64(c, &vec![1; c.len()]).unwrap();
            assert_eq!(is_degenerate(&r).unwrap(), want, "{c:?}");
        }
        // x^2 - x + 1: roots are primitive sixth roots of unity, ratio of order 3.
        let r = LinearRecurrence::from_i64(&[1, -1], &[0, 1]).unwrap();
        assert_eq!(degeneracy_witness(&r).unwrap(), Some(3));
    }

    #[test]
    fn binet_fibonacci() {
        let r = fib();
        let bf = binet_decomposition(&r, &spectral_data(&r).unwrap()).unwrap();
        let inv_sqrt5 = 0.447_213_595_499_958;
        assert!((bf.eta1.mid_re().to_f64() - inv_sqrt5).abs() < 1e-12);
        assert!((bf.coeff_polys[1][0].mid_re().to_f64() + inv_sqrt5).abs() < 1e-12);
        for (n, u) in r.terms(300).iter().enumerate() {
            assert!(bf.eval(n as u64).contains_int(u));
        }
    }

    #[test]
    fn binet_mersenne() {
        let r = LinearRecurrence::from_i64(&[3, -2], &[0, 1]).unwrap();
        let bf = binet_decomposition(&r, &spectral_data(&r).unwrap()).unwrap();
        assert!(bf.eta1.contains_int(&BigInt::from(1)));
        assert!(bf.coeff_polys[1][0].contains_int(&BigInt::from(-1)));
    }

    #[test]
    fn double_dominant_root_rejected() {
        let r = LinearRecurrence::from_i64(&[2, -1], &[0, 1]).unwrap();
        let s = spectral_data(&r).unwrap();
        assert_eq!(binet_decomposition(&r, &s), Err(Error::NotConstantLeadCoefficient));
    }

    #[test]
    fn binet_with_repeated_subdominant_root() {
        // (x - 3)(x - 1)^2
        let r = LinearRecurrence::from_i64(&[5, -7, 3], &[1, 0, 2]).unwrap();
        let s = spectral_data(&r).unwrap();
        let bf = binet_decomposition(&r, &s).unwrap();
        assert_eq!(bf.coeff_polys[1].len(), 2);
        for (n, u) in r.terms(120).iter().enumerate() {
            assert!(bf.eval(n as u64).contains_int(u));
        }
    }
}
