//! Explicit bound certificate for `a U_n + b U_m = z_1 + ... + z_r`.
//!
//! The chain runs: growth constants, an upper bound `log |z_r| < c7 n + c8`, a gap
//! bound `n - m <= C_gap log n` via a linear form in logarithms, and a final bound
//! `n <= C_fin (log n)^2` resolved to an explicit `N0`. Every constant is carried as
//! a ball and rounded in the sound direction before it is recorded.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exactmath::{e_const, log_int, parse_decimal, pi, Dyadic, Real, Round, DEFAULT_PRECISION_CAP};
use crate::heights::{growth_constants, GrowthConstants, LowerBoundSource};
use crate::recurrence::{
    binet_decomposition_capped, is_degenerate, spectral_analysis, BinetForm, LinearRecurrence,
    SpectralData,
};
use crate::sunits::{Epsilon, PrimeSet};

const PREC: u32 = 192;

/// Data of one equation `a U_n + b U_m = z_1 + ... + z_r` with S-unit `z_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemInstance {
    pub rec: LinearRecurrence,
    pub primes: PrimeSet,
    pub a: BigUint,
    pub b: BigUint,
    pub r: usize,
    pub eps: Epsilon,
    pub strict_dominance: bool,
}

impl ProblemInstance {
    pub fn new(
        rec: LinearRecurrence,
        primes: PrimeSet,
        a: BigUint,
        b: BigUint,
        r: usize,
        eps: Epsilon,
    ) -> Result<Self> {
        if a.is_zero() || b.is_zero() {
            return Err(Error::Domain("a and b must be positive".into()));
        }
        if r == 0 {
            return Err(Error::Domain("r must be positive".into()));
        }
        Ok(ProblemInstance {
            rec,
            primes,
            a,
            b,
            r,
            eps,
            strict_dominance: true,
        })
    }

    pub fn with_strict_dominance(mut self, strict: bool) -> Self {
        self.strict_dominance = strict;
        self
    }
}

fn rint(n: i64) -> Real {
    Real::from_i64(n, PREC)
}

fn rbig(n: &BigUint) -> Real {
    Real::from_int(&BigInt::from(n.clone()), PREC)
}

fn up(x: &Real) -> Real {
    Real::exact(x.upper().round(64, Round::Ceil), PREC)
}

fn down(x: &Real) -> Real {
    Real::exact(x.lower().round(64, Round::Floor), PREC)
}

fn log_r(x: &Real) -> Result<Real> {
    x.log()
}

/// `max(0, log x)`.
fn log_plus(x: &Real) -> Result<Real> {
    if x.upper() <= Dyadic::one() {
        return Ok(Real::zero(PREC));
    }
    if x.lower() >= Dyadic::one() {
        return x.log();
    }
    let hi = Real::exact(x.upper(), PREC).log()?.upper();
    Ok(Real::from_endpoints(Dyadic::zero(), hi, PREC))
}

fn rmax(xs: &[&Real]) -> Real {
    xs.iter()
        .skip(1)
        .fold((*xs[0]).clone(), |acc, x| acc.max(x))
}

/// `C(m, kappa) = min{ (1/kappa) (e m / 2)^kappa 30^{m+3} m^{3.5}, 2^{6m+20} }`.
pub fn matveev_c(m: u32, kappa: u32) -> Result<Real> {
    if m == 0 || !(kappa == 1 || kappa == 2) {
        return Err(Error::InvalidMatveevInput(format!("m = {m}, kappa = {kappa}")));
    }
    let mr = rint(m as i64);
    let em2 = e_const(PREC).mul(&mr).mul_pow2(-1);
    let branch1 = em2
        .pow_u(kappa as u64)
        .div_int(kappa as i64)
        .mul(&rint(30).pow_u(m as u64 + 3))
        .mul(&mr.pow_u(3))
        .mul(&mr.sqrt()?);
    let branch2 = Real::exact(Dyadic::pow2(6 * m as i64 + 20), PREC);
    Ok(branch1.min(&branch2))
}

/// Parameters for the lower bound `log |Lambda| >= -C(m,kappa) D^2 A_1...A_m log(eD) log(eB)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatveevInput {
    pub kappa: u32,
    pub degree: BigUint,
    pub b_bound: Real,
    pub a: Vec<Real>,
}

/// Lower bound for `log |Lambda|` (a ball; use its lower end).
pub fn matveev_lower_bound(input: &MatveevInput) -> Result<Real> {
    let m = input.a.len() as u32;
    let min_a = BigRational::new(4.into(), 25.into());
    if let Some(i) = input.a.iter().position(|a| a.upper().to_rational() < min_a) {
        return Err(Error::InvalidMatveevInput(format!("A_{} < 0.16", i + 1)));
    }
    if input.b_bound.upper() < Dyadic::one() {
        return Err(Error::InvalidMatveevInput("B < 1".into()));
    }
    if input.degree.is_zero() {
        return Err(Error::InvalidMatveevInput("D must be positive".into()));
    }
    let c = matveev_c(m, input.kappa)?;
    let d = rbig(&input.degree);
    let e = e_const(PREC);
    let prod = input.a.iter().fold(Real::one(PREC), |acc, a| acc.mul(a));
    let v = c
        .mul(&d.sqr())
        .mul(&prod)
        .mul(&log_r(&e.mul(&d))?)
        .mul(&log_r(&e.mul(&input.b_bound))?);
    Ok(v.neg())
}

/// Largest integer `n >= 1` with `n <= c log n`, or 2 when there is none.
pub fn solve_n_log_bound(c: &Real) -> Result<BigUint> {
    solve_n_logpow_bound(c, 1)
}

/// An `N` such that every integer `n >= 1` with `n <= c (log n)^p` has `n <= N`;
/// at least 2. Comparisons are made against an upper enclosure of the right side,
/// so borderline integers count as solutions.
pub fn solve_n_logpow_bound(c: &Real, p: u32) -> Result<BigUint> {
    if !c.is_positive() {
        return Err(Error::Domain("the coefficient must be positive".into()));
    }
    if p == 0 {
        return Err(Error::Domain("the power of log n must be positive".into()));
    }
    let c_up = Real::exact(c.upper(), PREC);
    if p == 1 && c_up.lt(&e_const(64)) {
        return Ok(BigUint::from(2u32));
    }
    let sat = |n: &BigUint| -> bool {
        let prec = PREC.max(n.bits() as u32 + 64);
        let l = log_int(&BigInt::from(n.clone()), prec);
        let rhs = c_up.with_prec(prec).mul(&l.pow_u(p as u64));
        Dyadic::from(n) <= rhs.upper()
    };
    // g(n) = n - c (log n)^p is convex for n >= e^{p-1} and increasing once
    // n > c p (log n)^{p-1}.
    let rising = |n: &BigUint| -> bool {
        if p == 1 {
            return Dyadic::from(n) > c_up.upper();
        }
        let prec = PREC.max(n.bits() as u32 + 64);
        let l = log_int(&BigInt::from(n.clone()), prec);
        let rhs = c_up.with_prec(prec).mul_int(p as i64).mul(&l.pow_u(p as u64 - 1));
        Dyadic::from(n) > rhs.upper()
    };
    let start = {
        let e_p = e_const(64).pow_u(p as u64).upper().ceil_int();
        BigUint::try_from(e_p).expect("positive")
    };
    let mut best = BigUint::from(2u32);
    let mut n = BigUint::one();
    while n <= start {
        if sat(&n) && n > best {
            best = n.clone();
        }
        n += 1u32;
    }
    let mut hi = start.clone().max(BigUint::try_from(c_up.upper().ceil_int()).unwrap_or_default());
    while sat(&hi) || !rising(&hi) {
        hi <<= 1;
    }
    // First rising point in [start, hi].
    let (mut lo, mut h) = (start.clone(), hi.clone());
    if rising(&lo) {
        h = lo.clone();
    } else {
        while &h - &lo > BigUint::one() {
            let mid = (&lo + &h) >> 1;
            if rising(&mid) {
                h = mid;
            } else {
                lo = mid;
            }
        }
    }
    let cands = [lo, h];
    if let Some(seed) = cands.iter().find(|x| sat(x)) {
        let (mut lo, mut h) = (seed.clone(), hi);
        while &h - &lo > BigUint::one() {
            let mid = (&lo + &h) >> 1;
            if sat(&mid) {
                lo = mid;
            } else {
                h = mid;
            }
        }
        best = best.max(lo);
    }
    Ok(best)
}

/// Smallest `N >= 2` with every `n >= 1` obeying `mu n <= L + (k-1) log n` bounded by it.
fn solve_affine(l: &Real, k: usize, mu: &Real) -> Result<(Real, BigUint)> {
    // For n >= 3, log n >= 1, so the right side is at most (L^+ + k - 1) log n.
    let l_plus = l.clamp_nonneg();
    let coeff = up(&l_plus.add(&rint(k as i64 - 1)).div(mu)?);
    let n = solve_n_log_bound(&coeff)?;
    Ok((coeff, n))
}

/// One line of the constant trace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub name: String,
    pub value: String,
    pub provenance: String,
}

const CHAIN: &str = "[CHAIN]";
const IMPL: &str = "[IMPL-CHOICE]";

#[derive(Default)]
struct Trace(Vec<TraceEntry>);

impl Trace {
    fn up(&mut self, name: &str, x: &Real, tag: &str, what: &str) {
        self.push(name, x.upper_decimal(15), tag, what);
    }

    fn down(&mut self, name: &str, x: &Real, tag: &str, what: &str) {
        self.push(name, x.lower_decimal(15), tag, what);
    }

    fn push(&mut self, name: &str, value: String, tag: &str, what: &str) {
        self.0.push(TraceEntry {
            name: name.into(),
            value,
            provenance: format!("{tag} {what}"),
        });
    }
}

/// `log |z_r| < c7 n + c8`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZrBound {
    pub c5: Real,
    pub c6: Real,
    pub c7: Real,
    pub c8: Real,
}

/// The bound on `log |z_r|` for solutions with the dominance condition.
///
/// From `|z_r| - sum_{i<r} |z_i| <= |a U_n + b U_m| <= c5 n^{k-1} alpha_1^n` and
/// `sum_{i<r} |z_i| <= (r-1) |z_r|^{1/(1+eps)}`: either `|z_r|^{eps/(1+eps)} <= r`
/// (so `log |z_r| <= c6`) or `|z_r| < r c5 n^{k-1} alpha_1^n`. The factor `n^{k-1}`
/// is absorbed by `log n <= n/e`; `n = 0` is covered by `r (a+b) gamma`.
pub fn zr_log_bound(inst: &ProblemInstance, growth: &GrowthConstants, bf: &BinetForm) -> Result<ZrBound> {
    let k = inst.rec.order() as i64;
    let (a, b) = (rbig(&inst.a), rbig(&inst.b));
    let r = rint(inst.r as i64);
    let gamma = Real::from_int(&inst.rec.gamma(), PREC);
    let eps = inst.eps.to_real(PREC);
    let one_eps = eps.add(&Real::one(PREC));
    let alpha1 = bf.roots[bf.dominant_index].real_part();

    let c5 = up(&a.mul(&growth.c4).add(&b.mul(&growth.c4.max(&gamma))));
    let c6 = up(&one_eps.div(&eps)?.mul(&log_int(&BigInt::from(inst.r), PREC)));
    let k1_over_e = rint(k - 1).div(&e_const(PREC))?;
    let c7 = up(&one_eps.mul(&log_r(&alpha1)?.add(&k1_over_e)));
    let t1 = one_eps.mul(&log_plus(&r.mul(&c5))?);
    let t2 = one_eps.mul(&log_plus(&r.mul(&a.add(&b)).mul(&gamma))?);
    let c8 = up(&rmax(&[&c6, &t1, &t2]).add(&Real::one(PREC)));
    Ok(ZrBound { c5, c6, c7, c8 })
}

/// Quantities shared by the gap and final chains.
struct Setup {
    k: usize,
    t: usize,
    ell: usize,
    a: Real,
    b: Real,
    r: Real,
    alpha1: Real,
    log_alpha1: Real,
    mod2: Real,
    eta_abs: Real,
    s: Real,
    theta: Real,
    lambda: Real,
    d: Real,
}

fn setup(inst: &ProblemInstance, growth: &GrowthConstants, bf: &BinetForm) -> Result<Setup> {
    let d = bf.dominant_index;
    let alpha1 = bf.roots[d].real_part();
    let log_alpha1 = log_r(&alpha1)?;
    let mod2 = bf
        .roots
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != d)
        .map(|(_, z)| z.abs())
        .reduce(|x, y| x.max(&y))
        .ok_or_else(|| Error::Internal("no subdominant root".into()))?;
    let mod2 = up(&mod2);
    let eps = inst.eps.to_real(PREC);
    let s = eps.div(&eps.add(&Real::one(PREC)))?;
    let inv_a1 = alpha1.inv()?;
    let a1_neg_s = s.mul(&log_alpha1).neg().exp();
    let ratio = mod2.div(&alpha1)?;
    let theta = up(&rmax(&[&inv_a1, &a1_neg_s, &ratio]));
    if theta.upper() >= Dyadic::one() {
        return Err(Error::Internal("shrink factor not certified below 1".into()));
    }
    let lambda = down(&log_r(&theta)?.neg());
    Ok(Setup {
        k: inst.rec.order(),
        t: bf.roots.len(),
        ell: inst.primes.len(),
        a: rbig(&inst.a),
        b: rbig(&inst.b),
        r: rint(inst.r as i64),
        alpha1,
        log_alpha1,
        mod2,
        eta_abs: bf.eta1.abs(),
        s,
        theta,
        lambda,
        d: rbig(&growth.degree),
    })
}

/// Constants of the gap bound `n - m <= C_gap log n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GapBound {
    pub theta: Real,
    pub lambda: Real,
    pub c9: Real,
    pub c10: Real,
    pub c11: Real,
    pub c12: Real,
    pub c13: Real,
    pub c14: Real,
    pub c15: Real,
    pub c16: Real,
    pub c17: Real,
    pub c18: Real,
    /// Bound on `n` when `|a U_n + b U_m| <= |eta_1| alpha_1^n / 2`.
    pub n_small: BigUint,
    pub c_gap: Real,
}

fn prime_logs_times_d(inst: &ProblemInstance, d: &Real) -> Vec<Real> {
    inst.primes
        .primes()
        .iter()
        .map(|p| up(&d.mul(&log_int(&BigInt::from(p.clone()), PREC))))
        .collect()
}

/// `max(D h, |log|x|| + pi, 0.16)` for a real algebraic `x` with `h(x) <= h`.
fn a_value(d: &Real, h: &Real, x_abs: &Real) -> Result<Real> {
    let l = log_r(x_abs)?.abs().add(&pi(PREC));
    Ok(up(&rmax(&[&d.mul(h), &l, &Real::from_ratio(4, 25, PREC)])))
}

/// The gap bound, valid for solutions with `|a U_n + b U_m| >= |U_n|` and the
/// dominance condition.
pub fn gap_bound(
    inst: &ProblemInstance,
    growth: &GrowthConstants,
    bf: &BinetForm,
    spec: &SpectralData,
    zr: &ZrBound,
) -> Result<GapBound> {
    if spec.dominant_index() != Some(bf.dominant_index) {
        return Err(Error::Internal("Binet form and spectral data disagree on the dominant root".into()));
    }
    let st = setup(inst, growth, bf)?;
    let k = st.k;
    let t = rint(st.t as i64);
    let two_r = st.r.mul_int(2);
    let c3 = &growth.c3;

    let c9 = up(&two_r.mul(&t).mul(&st.b).mul(c3).div(&st.eta_abs)?);
    let c10 = up(&two_r.mul(&t).mul(&st.a).mul(c3).div(&st.eta_abs)?);
    let c11 = up(&st.r.sub(&Real::one(PREC)).mul(&two_r.div(&st.eta_abs)?.pow(&st.s)?));
    let c12 = up(&c9.add(&c10).add(&c11));
    let log2c12 = log_plus(&c12.mul_int(2))?;
    let km1 = rint(k as i64 - 1);
    let c13 = up(&log2c12.add(&km1).div(&st.lambda)?);

    let log_ratio = down(&log_r(&st.alpha1.div(&st.mod2)?)?);
    let c14 = up(&log_plus(&c3.div(&st.eta_abs)?)?.div(&log_ratio)?);

    let log2 = log_int(&BigInt::from(2), PREC);
    let c15 = up(&rmax(&[
        &Real::one(PREC),
        &rint(st.ell as i64 + 2),
        &zr.c7.add(&zr.c8).div(&log2)?,
    ]));
    let eta1_h = &growth.c1;
    let a_eta = a_value(&st.d, &log_r(&st.a)?.add(eta1_h), &st.a.mul(&st.eta_abs))?;
    let a_alpha = up(&rmax(&[
        &st.d.mul(&growth.h_alpha),
        &st.log_alpha1,
        &Real::from_ratio(4, 25, PREC),
    ]));
    let a_minus1 = up(&pi(PREC));
    let c16 = rmax(&[&a_eta, &a_alpha, &a_minus1]);
    let mut a_all = prime_logs_times_d(inst, &st.d);
    a_all.extend([a_eta, a_alpha, a_minus1]);
    let prod_a = a_all.iter().fold(Real::one(PREC), |acc, x| acc.mul(x));
    let cm = matveev_c(st.ell as u32 + 3, 2)?;
    let e = e_const(PREC);
    let c17 = up(&cm.mul(&st.d.sqr()).mul(&prod_a).mul(&log_r(&e.mul(&st.d))?));
    let c18 = up(&log2c12
        .add(&km1)
        .add(&c17.mul(&rint(2).add(&log_plus(&c15)?)))
        .div(&st.lambda)?);

    let l_small = log_plus(&t.mul(c3).mul_int(2).div(&st.eta_abs)?)?;
    let (_, n_small) = solve_affine(&l_small, k, &log_ratio)?;

    let log3 = log_int(&BigInt::from(3), PREC);
    let c_gap = up(&rmax(&[
        &rint(2),
        &c13,
        &c14.div(&log3)?,
        &c18,
        &rbig(&n_small).div(&log3)?,
    ]));
    Ok(GapBound {
        theta: st.theta,
        lambda: st.lambda,
        c9,
        c10,
        c11,
        c12,
        c13,
        c14,
        c15,
        c16,
        c17,
        c18,
        n_small,
        c_gap,
    })
}

/// Which hypotheses were checked, all of which hold for an issued certificate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub non_degenerate: bool,
    pub dominant_root_simple: bool,
    pub dominant_root_real_gt1: bool,
    pub dominant_root_not_integer_gt1: bool,
    pub eta1_nonzero: bool,
    pub dominance_condition: String,
    pub scope: String,
}

/// Full bound certificate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundCertificate {
    pub hypotheses: HypothesisReport,
    pub growth: GrowthConstants,
    pub zr: ZrBound,
    pub gap: GapBound,
    pub c_fin: Real,
    pub n0: BigUint,
    /// Upper bound for `log max |z_i|`; the integer bound itself is far too large to print.
    pub z0_log: Real,
    pub trace: Vec<TraceEntry>,
}

impl BoundCertificate {
    pub fn bounds(&self) -> CertificateBounds {
        CertificateBounds {
            n0: self.n0.clone(),
            c_gap: self.gap.c_gap.upper().to_rational(),
            c7: self.zr.c7.upper().to_rational(),
            c8: self.zr.c8.upper().to_rational(),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "hypotheses": self.hypotheses,
            "constants_trace": self.trace,
            "zr_linear": {
                "c7": self.zr.c7.upper_decimal(15),
                "c8": self.zr.c8.upper_decimal(15),
            },
            "gap_constant": self.gap.c_gap.upper_decimal(15),
            "final_constant": self.c_fin.upper_decimal(15),
            "N0": self.n0.to_string(),
            "Z0": { "log_upper": self.z0_log.upper_decimal(15) },
        })
    }
}

/// The inequalities a certificate asserts for every solution in its scope.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertificateBounds {
    pub n0: BigUint,
    pub c_gap: BigRational,
    pub c7: BigRational,
    pub c8: BigRational,
}

impl CertificateBounds {
    /// Reads `N0`, the gap constant and `(c7, c8)` back from certificate JSON.
    pub fn from_json(v: &Value) -> Result<Self> {
        let field = |path: &[&str]| -> Result<String> {
            let mut cur = v;
            for p in path {
                cur = cur
                    .get(p)
                    .ok_or_else(|| Error::Domain(format!("certificate lacks {}", path.join("."))))?;
            }
            cur.as_str()
                .map(str::to_owned)
                .ok_or_else(|| Error::Domain(format!("{} is not a string", path.join("."))))
        };
        let dec = |path: &[&str]| -> Result<BigRational> {
            let s = field(path)?;
            parse_decimal(&s).ok_or_else(|| Error::Domain(format!("bad number {s:?}")))
        };
        Ok(CertificateBounds {
            n0: field(&["N0"])?
                .parse()
                .map_err(|_| Error::Domain("N0 is not an integer".into()))?,
            c_gap: dec(&["gap_constant"])?,
            c7: dec(&["zr_linear", "c7"])?,
            c8: dec(&["zr_linear", "c8"])?,
        })
    }

    /// Violated inequalities for a solution `(n, m, z_r)`; empty when all hold.
    pub fn violations(&self, n: u64, m: u64, zr: &BigInt) -> Vec<String> {
        let mut out = Vec::new();
        if BigUint::from(n) > self.n0 {
            out.push(format!("n = {n} exceeds N0"));
        }
        let log_n = log_int(&BigInt::from(n.max(3)), PREC);
        let gap_rhs = Real::from_rational(&self.c_gap, PREC).mul(&log_n);
        if Dyadic::from(n.abs_diff(m) as i64) > gap_rhs.upper() {
            out.push(format!("n - m = {} exceeds C_gap log max(n, 3)", n.abs_diff(m)));
        }
        if !zr.is_zero() {
            let lhs = log_int(&zr.abs(), PREC);
            let rhs = Real::from_rational(&self.c7, PREC)
                .mul(&rint(n as i64))
                .add(&Real::from_rational(&self.c8, PREC));
            if lhs.lower() >= rhs.upper() {
                out.push("log |z_r| is not below c7 n + c8".into());
            }
        }
        out
    }
}

/// Run every hypothesis check and the full constant chain.
pub fn final_bound(inst: &ProblemInstance) -> Result<BoundCertificate> {
    final_bound_capped(inst, DEFAULT_PRECISION_CAP)
}

/// Hypothesis checks in refusal order; returns the spectral data on success.
pub fn check_hypotheses(inst: &ProblemInstance, precision_cap: u32) -> Result<SpectralData> {
    let rec = &inst.rec;
    if is_degenerate(rec)? {
        return Err(Error::DegenerateRecurrence);
    }
    let spec = spectral_analysis(rec, precision_cap)?;
    let d = spec.require_dominant()?;
    if !spec.dominant_is_simple {
        return Err(Error::NotConstantLeadCoefficient);
    }
    let dom = &spec.roots[d].ball;
    if !spec.dominant_is_real {
        return Err(Error::DominantRootNotRealGt1);
    }
    let re = dom.real_part();
    if re.upper() <= Dyadic::one()
        || (re.contains(&Dyadic::one()) && spec.char_poly.eval(&BigInt::one()).is_zero())
    {
        return Err(Error::DominantRootNotRealGt1);
    }
    if re.lower() <= Dyadic::one() {
        return Err(Error::Internal("dominant root not separated from 1".into()));
    }
    if spec.dominant_is_integer_gt1 {
        return Err(Error::DominantRootIntegerGt1);
    }
    Ok(spec)
}

pub fn final_bound_capped(inst: &ProblemInstance, precision_cap: u32) -> Result<BoundCertificate> {
    let spec = check_hypotheses(inst, precision_cap)?;
    let rec = &inst.rec;
    let bf = binet_decomposition_capped(rec, &spec, precision_cap)?;
    let growth = growth_constants(rec, &bf, &spec)?;
    let zr = zr_log_bound(inst, &growth, &bf)?;
    let gap = gap_bound(inst, &growth, &bf, &spec, &zr)?;
    let st = setup(inst, &growth, &bf)?;
    let k = st.k;
    let km1 = rint(k as i64 - 1);
    let c3 = &growth.c3;
    let t = rint(st.t as i64);

    // |Phi_2 - 1| < c19 n^{k-1} theta^n with Phi_2 = eta_1 alpha_1^n (a + b alpha_1^{m-n}) / z_r.
    let c19 = up(&gap.c11.add(
        &st.r
            .mul_int(2)
            .mul(&t)
            .mul(&st.a.add(&st.b))
            .mul(c3)
            .div(&st.eta_abs)?,
    ));
    let log2c19 = log_plus(&c19.mul_int(2))?;
    let (c_g1, n_g1) = solve_affine(&log2c19, k, &st.lambda)?;

    // Phi_2 = 1: conjugating gives alpha_1^n <= 2 A c3 / |eta_1| * max(1, |alpha_2|)^n.
    let big_a = st.a.max(&st.b);
    let m2 = st.mod2.max(&Real::one(PREC));
    let log_ratio2 = down(&log_r(&st.alpha1.div(&m2)?)?);
    let g2 = up(&log_plus(&big_a.mul_int(2).mul(c3).div(&st.eta_abs)?)?.div(&log_ratio2)?);
    let n_g2 = BigUint::try_from(g2.upper().ceil_int()).unwrap_or_default().max(BigUint::from(2u32));

    // Linear form with psi = (p_1..p_l, eta_1, alpha_1, a + b alpha_1^{m-n}, -1).
    let log_ab2 = log_r(&st.a.mul(&st.b).mul_int(2))?;
    let c20 = up(&st
        .d
        .mul(&log_ab2.add(&gap.c_gap.mul(&growth.h_alpha)))
        .add(&log_r(&st.a.add(&st.b))?)
        .add(&Real::from_ratio(4, 25, PREC)));
    let a_eta = a_value(&st.d, &growth.c1, &st.eta_abs)?;
    let a_alpha = up(&rmax(&[
        &st.d.mul(&growth.h_alpha),
        &st.log_alpha1,
        &Real::from_ratio(4, 25, PREC),
    ]));
    let mut a_all = prime_logs_times_d(inst, &st.d);
    a_all.extend([a_eta.clone(), a_alpha.clone(), c20.clone(), up(&pi(PREC))]);
    let prod_a = a_all.iter().fold(Real::one(PREC), |acc, x| acc.mul(x));
    let log2 = log_int(&BigInt::from(2), PREC);
    let c21 = up(&rmax(&[
        &Real::one(PREC),
        &rint(st.ell as i64 + 3),
        &zr.c7.add(&zr.c8).div(&log2)?,
    ]));
    let cm4 = matveev_c(st.ell as u32 + 4, 2)?;
    let e = e_const(PREC);
    let c22 = up(&cm4
        .mul(&st.d.sqr())
        .mul(&prod_a)
        .mul(&log_r(&e.mul(&st.d))?)
        .mul(&rint(2).add(&log_plus(&c21)?)));
    let c_fin = up(&log2c19.add(&km1).add(&c22).div(&st.lambda)?);
    let n_main = solve_n_logpow_bound(&c_fin, 2)?;

    // Integer zeros of nonconstant f_i (Cauchy bound).
    let mut n_f0 = BigUint::zero();
    for coeffs in bf.coeff_polys.iter().filter(|c| c.len() > 1) {
        let top = coeffs.last().expect("nonempty").abs();
        let mx = coeffs[..coeffs.len() - 1]
            .iter()
            .map(|b| b.abs())
            .reduce(|x, y| x.max(&y))
            .expect("nonempty");
        let cb = Real::one(PREC).add(&mx.div(&top)?);
        n_f0 = n_f0.max(BigUint::try_from(cb.upper().ceil_int()).unwrap_or_default());
    }

    let n0 = [&gap.n_small, &n_g1, &n_g2, &n_main, &n_f0]
        .into_iter()
        .fold(BigUint::from(2u32), |acc, x| acc.max(x.clone()));
    let z0_log = up(&zr.c7.mul(&rbig(&n0)).add(&zr.c8));

    let mut tr = Trace::default();
    let g = &growth;
    tr.push("k", k.to_string(), CHAIN, "order of the recurrence");
    tr.push("t", st.t.to_string(), CHAIN, "number of distinct characteristic roots");
    tr.push("l", st.ell.to_string(), CHAIN, "number of primes in S");
    tr.push("gamma", inst.rec.gamma().to_string(), CHAIN, "max |a_i|, |U_j|");
    tr.push("D", g.degree.to_string(), IMPL, "field degree bound min(k^t, k!)");
    tr.up("alpha1", &st.alpha1, CHAIN, "dominant root, upper end of its enclosure");
    tr.up("|alpha2|", &st.mod2, CHAIN, "largest non-dominant modulus, upper bound");
    tr.down("|eta1|", &st.eta_abs, CHAIN, "dominant Binet coefficient, lower bound");
    tr.up("h_alpha", &g.h_alpha, IMPL, "log Mahler measure of the square-free characteristic polynomial");
    tr.up("h_beta", &g.h_beta, IMPL, "Cramer and Hadamard bound for heights of Binet coefficients");
    tr.up("c1", &g.c1, IMPL, "height bound for roots and Binet coefficients");
    let c2_what = match g.c2_source {
        LowerBoundSource::Numeric => "lower bound for nonzero |f_i(n)| from certified evaluation",
        LowerBoundSource::Liouville => "lower bound for nonzero |f_i(n)|, Liouville fallback exp(-2 D h)",
    };
    tr.down("c2", &g.c2, IMPL, c2_what);
    tr.push("n_threshold", g.n_threshold.to_string(), IMPL, "leading-term regime start for nonconstant f_i");
    tr.up("c3", &g.c3, IMPL, "|f_i(n)| <= c3 n^(m_i-1), c3 = max(t, max m_i) max |beta|");
    tr.up("c4", &g.c4, CHAIN, "|U_n| <= c4 n^(k-1) alpha1^n, c4 = t c3");
    tr.up("c5", &zr.c5, IMPL, "|aU_n + bU_m| <= c5 n^(k-1) alpha1^n, c5 = a c4 + b max(c4, gamma)");
    tr.up("c6", &zr.c6, CHAIN, "small-|z_r| regime: log |z_r| <= ((1+eps)/eps) log r");
    tr.up("c7", &zr.c7, CHAIN, "log |z_r| < c7 n + c8, slope (1+eps)(log alpha1 + (k-1)/e)");
    tr.up("c8", &zr.c8, CHAIN, "log |z_r| < c7 n + c8, intercept");
    tr.up("theta", &gap.theta, CHAIN, "max(1/alpha1, alpha1^(-eps/(1+eps)), |alpha2|/alpha1)");
    tr.down("lambda", &gap.lambda, CHAIN, "-log theta");
    tr.up("c9", &gap.c9, CHAIN, "gap chain: 2 r t b c3 / |eta1|");
    tr.up("c10", &gap.c10, CHAIN, "gap chain: 2 r t a c3 / |eta1|");
    tr.up("c11", &gap.c11, CHAIN, "gap chain: (r-1)(2r/|eta1|)^(eps/(1+eps))");
    tr.up("c12", &gap.c12, CHAIN, "|Phi_1 - 1| < c12 n^(k-1) theta^(n-m)");
    tr.up("c13", &gap.c13, CHAIN, "gap when |Phi_1 - 1| > 1/2");
    tr.up("c14", &gap.c14, CHAIN, "bound on n when Phi_1 = 1, by conjugation");
    tr.up("c15", &gap.c15, CHAIN, "B <= c15 n for the gap linear form");
    tr.up("c16", &gap.c16, CHAIN, "largest A_i among eta1, alpha1, -1 in the gap linear form");
    tr.up("c17", &gap.c17, CHAIN, "C(l+3, 2) D^2 prod A_i log(eD), kappa = 2, A_p = D log p");
    tr.up("c18", &gap.c18, CHAIN, "gap when Phi_1 != 1 is close to 1");
    tr.push("N_small", gap.n_small.to_string(), CHAIN, "n bound when |aU_n + bU_m| <= |eta1| alpha1^n / 2");
    tr.up("C_gap", &gap.c_gap, CHAIN, "n - m <= C_gap log max(n, 3)");
    tr.up("c19", &c19, CHAIN, "|Phi_2 - 1| < c19 n^(k-1) theta^n");
    tr.up("G1", &c_g1, CHAIN, "n <= G1 log n when |Phi_2 - 1| > 1/2");
    tr.push("N_G1", n_g1.to_string(), CHAIN, "resolved bound for the previous line");
    tr.up("G2", &g2, CHAIN, "n bound when Phi_2 = 1, by conjugation with A = max(a, b)");
    tr.up("c20", &c20, CHAIN, "A(a + b alpha1^(m-n)) <= c20 log n using the gap bound");
    tr.up("A_eta1", &a_eta, CHAIN, "max(D h(eta1), |log eta1| + pi, 0.16)");
    tr.up("A_alpha1", &a_alpha, CHAIN, "max(D h(alpha1), log alpha1, 0.16)");
    tr.up("c21", &c21, CHAIN, "B <= c21 n for the final linear form");
    tr.up("c22", &c22, CHAIN, "-log |Lambda_4| <= c22 (log n)^2, kappa = 2, m = l + 4");
    tr.up("C_fin", &c_fin, IMPL, "n <= C_fin (log n)^2 after merging all log n terms");
    tr.push("N_main", n_main.to_string(), IMPL, "largest n with n <= C_fin (log n)^2");
    tr.push("N_F0", n_f0.to_string(), CHAIN, "integer zeros of nonconstant f_i (Cauchy bound)");
    tr.push("N0", n0.to_string(), CHAIN, "max(n, m) <= N0");
    tr.up("log_Z0", &z0_log, IMPL, "log max |z_i| <= c7 N0 + c8");

    let hypotheses = HypothesisReport {
        non_degenerate: true,
        dominant_root_simple: true,
        dominant_root_real_gt1: true,
        dominant_root_not_integer_gt1: true,
        eta1_nonzero: true,
        dominance_condition: if inst.strict_dominance {
            "|z_i|^(1+eps) < |z_r| for i < r".into()
        } else {
            "|z_i|^(1+eps) <= |z_r| for i < r".into()
        },
        scope: "solutions with n >= m >= 0 and |aU_n + bU_m| >= |U_n|".into(),
    };
    Ok(BoundCertificate {
        hypotheses,
        growth,
        zr,
        gap,
        c_fin,
        n0,
        z0_log,
        trace: tr.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn n0(c: i64) -> u64 {
        solve_n_log_bound(&rint(c)).unwrap().to_u64().unwrap()
    }

    #[test]
    fn n_log_n_values() {
        assert_eq!(n0(1), 2);
        assert_eq!(n0(10), 35);
        assert_eq!(n0(100), 647);
        assert!(solve_n_log_bound(&rint(0)).is_err());
    }

    #[test]
    fn n_log_squared_matches_scan() {
        for c in [1i64, 3, 10, 57] {
            let got = solve_n_logpow_bound(&rint(c), 2).unwrap().to_u64().unwrap();
            let scan = (1..2_000_000u64)
                .filter(|&n| n as f64 <= c as f64 * (n as f64).ln().powi(2))
                .max()
                .unwrap_or(2)
                .max(2);
            assert_eq!(got, scan, "c = {c}");
        }
    }

    #[test]
    fn matveev_constant() {
        // mpmath at 30 digits
        let cases = [
            (1, 1.100_904_140_525_913_3e6),
            (2, 7.473_185_118_741_323e8),
            (20, 9.155_631_934_408_076e39),
            (25, 6.072_809_494_506_785e47),
        ];
        for (m, want) in cases {
            let got = matveev_c(m, 1).unwrap().to_f64();
            assert!((got / want - 1.0).abs() < 1e-12, "m = {m}: {got}");
        }
        // the power-of-two branch never wins for kappa = 1
        assert!(matveev_c(20, 1).unwrap().to_f64() < 2f64.powi(140));
        assert!(matveev_c(0, 1).is_err());
    }

    #[test]
    fn matveev_input_checks() {
        let ok = MatveevInput {
            kappa: 1,
            degree: BigUint::one(),
            b_bound: Real::one(PREC),
            a: vec![Real::from_ratio(4, 25, PREC)],
        };
        let v = matveev_lower_bound(&ok).unwrap();
        let want = matveev_c(1, 1).unwrap().mul(&Real::from_ratio(4, 25, PREC)).neg();
        assert!((v.to_f64() / want.to_f64() - 1.0).abs() < 1e-12);
        let mut bad = ok.clone();
        bad.a = vec![Real::from_ratio(1, 10, PREC)];
        assert!(matches!(matveev_lower_bound(&bad), Err(Error::InvalidMatveevInput(_))));
        let mut bad = ok;
        bad.b_bound = Real::from_ratio(1, 2, PREC);
        assert!(matveev_lower_bound(&bad).is_err());
    }

    fn instance(c: &[i64], u: &[i64], s: &[u64], r: usize) -> ProblemInstance {
        ProblemInstance::new(
            LinearRecurrence::from_i64(c, u).unwrap(),
            PrimeSet::from_u64(s).unwrap(),
            BigUint::one(),
            BigUint::one(),
            r,
            Epsilon::from_ratio(1, 1).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn refusals() {
        let m = instance(&[3, -2], &[0, 1], &[2], 2);
        assert_eq!(final_bound(&m).unwrap_err(), Error::DominantRootIntegerGt1);
        let d = instance(&[0, 1], &[0, 1], &[2], 1);
        assert_eq!(final_bound(&d).unwrap_err(), Error::DegenerateRecurrence);
        let dd = instance(&[4, -4], &[0, 1], &[2], 1);
        assert_eq!(final_bound(&dd).unwrap_err(), Error::NotConstantLeadCoefficient);
        let neg = instance(&[-1, 1], &[0, 1], &[2], 1);
        assert_eq!(final_bound(&neg).unwrap_err(), Error::DominantRootNotRealGt1);
    }

    #[test]
    fn fibonacci_certificate() {
        let inst = instance(&[1, 1], &[0, 1], &[2, 3, 5], 1);
        let c1 = final_bound(&inst).unwrap();
        let c2 = final_bound(&inst).unwrap();
        assert_eq!(c1.to_json(), c2.to_json());
        assert!(c1.n0 > BigUint::from(1000u32));
        let b = c1.bounds();
        assert!(b.violations(10, 4, &BigInt::from(60)).is_empty());
        assert!(!b.violations(10, 4, &BigInt::from(10).pow(400)).is_empty());
        let back = CertificateBounds::from_json(&c1.to_json()).unwrap();
        assert_eq!(back.n0, c1.n0);
    }

    #[test]
    fn monotone_in_primes_and_r() {
        let base = final_bound(&instance(&[1, 1], &[0, 1], &[2], 1)).unwrap().n0;
        let more_p = final_bound(&instance(&[1, 1], &[0, 1], &[2, 3], 1)).unwrap().n0;
        let more_r = final_bound(&instance(&[1, 1], &[0, 1], &[2], 2)).unwrap().n0;
        assert!(more_p >= base && more_r >= base);
    }
}
