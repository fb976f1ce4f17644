//! Absolute logarithmic heights and explicit growth constants for Binet forms.
//!
//! The constants satisfy, for `n >= 1` and every root index `i`:
//!
//! * `h(alpha_i), h(beta_{i,l}) <= c1`
//! * `c2 <= |f_i(n)| <= c3 n^{m_i - 1}` whenever `f_i(n) != 0`
//! * `|U_n| <= c4 n^{k-1} |alpha_1|^n`
//!
//! Upper bounds are stored rounded up and `c2` rounded down, as exact point balls.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exactmath::{log_int, Dyadic, IntPoly, Real, RootCluster};
use crate::recurrence::{BinetForm, LinearRecurrence, SpectralData};

/// Working precision for constant evaluation.
pub const PREC: u32 = 160;

/// A height, or an upper bound for one, on the natural-log scale.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeightBound {
    pub value: Real,
    pub is_exact: bool,
}

impl HeightBound {
    pub fn upper(&self) -> Dyadic {
        self.value.upper()
    }
}

/// `h(p/q) = log max(|p|, q)` after reducing the fraction.
pub fn height_rational(p: &BigInt, q: &BigInt) -> Result<HeightBound> {
    if !q.is_positive() {
        return Err(Error::Domain("denominator must be positive".into()));
    }
    let g = p.gcd(q);
    let (p, q) = if g.is_zero() { (p.clone(), q.clone()) } else { (p / &g, q / &g) };
    let m = p.abs().max(q);
    let value = if m.is_one() { Real::zero(PREC) } else { log_int(&m, PREC) };
    Ok(HeightBound {
        value,
        is_exact: true,
    })
}

/// Upper bound for `h(alpha_index)` by the Mahler measure of `f`:
/// `log |lead f| + sum_j m_j log max(1, |alpha_j|)`.
pub fn height_upper_from_poly(
    f: &IntPoly,
    roots: &[RootCluster],
    index: usize,
) -> Result<HeightBound> {
    if index >= roots.len() {
        return Err(Error::Domain(format!(
            "root index {index} out of range for {} clusters",
            roots.len()
        )));
    }
    if f.deg() == 1 {
        let (num, den) = (-f.coeff(0), f.coeff(1));
        let (num, den) = if den.is_negative() { (-num, -den) } else { (num, den) };
        return height_rational(&num, &den);
    }
    let value = log_mahler_upper(&f.lead(), roots.iter().map(|c| (c, c.multiplicity)));
    Ok(HeightBound {
        value,
        is_exact: false,
    })
}

fn log_mahler_upper<'a>(lead: &BigInt, roots: impl Iterator<Item = (&'a RootCluster, u32)>) -> Real {
    let mut acc = log_int(&lead.abs(), PREC);
    for (c, m) in roots {
        let up = c.ball.abs().upper();
        if up > Dyadic::one() {
            let l = Real::exact(up, PREC).log().expect("positive");
            acc = acc.add(&l.mul_int(m as i64));
        }
    }
    up_point(&acc)
}

fn up_point(x: &Real) -> Real {
    Real::exact(x.upper().round(64, crate::exactmath::Round::Ceil), PREC)
}

fn down_point(x: &Real) -> Real {
    Real::exact(x.lower().round(64, crate::exactmath::Round::Floor), PREC)
}

/// `min(k^t, k!)`, a bound for the degree of the splitting field.
pub fn degree_bound(k: usize, t: usize) -> BigUint {
    let kt = BigUint::from(k).pow(t as u32);
    let kf = (1..=k).fold(BigUint::one(), |acc, i| acc * BigUint::from(i));
    kt.min(kf)
}

/// How `c2` was obtained.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LowerBoundSource {
    /// Certified numerical lower bounds only.
    Numeric,
    /// At least one Liouville-type bound `exp(-2 D h)` was needed.
    Liouville,
}

/// Explicit growth constants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrowthConstants {
    pub c1: Real,
    pub c2: Real,
    pub c3: Real,
    pub c4: Real,
    /// Beyond this `n`, every `f_i(n)` with `m_i > 1` is at least half its leading term.
    pub n_threshold: u64,
    /// `log M` of the square-free characteristic polynomial; bounds every `h(alpha_i)`.
    pub h_alpha: Real,
    /// Bound for every `h(beta_{i,l})`.
    pub h_beta: Real,
    /// Field-degree bound `D`.
    pub degree: BigUint,
    pub c2_source: LowerBoundSource,
    /// `max_{i,l} |beta_{i,l}|`, rounded up.
    pub beta_max: Real,
}

/// Evaluations of `f_i(n)` for `n < n0` beyond this count use the Liouville bound.
const SMALL_RANGE_CAP: u64 = 1 << 16;

/// Explicit `c1..c4` for a certified Binet form.
pub fn growth_constants(
    rec: &LinearRecurrence,
    bf: &BinetForm,
    spec: &SpectralData,
) -> Result<GrowthConstants> {
    let k = rec.order();
    let t = spec.t();
    let mults: Vec<u32> = spec.roots.iter().map(|c| c.multiplicity).collect();
    let degree = degree_bound(k, t);
    let d_real = Real::from_int(&BigInt::from(degree.clone()), PREC);

    // Square-free part is monic here, so its Mahler measure is a product over roots.
    let h_alpha = log_mahler_upper(&BigInt::one(), spec.roots.iter().map(|c| (c, 1)));

    // Heights of matrix entries n^l alpha_i^n summed over the confluent Vandermonde matrix.
    let sum_l: u64 = mults.iter().map(|&m| (m as u64) * (m as u64 - 1) / 2).sum();
    let mut hv = Real::from_int(&BigInt::from(k), PREC).log()?.mul(&Real::from_ratio(k as i64, 2, PREC));
    for n in 1..k as i64 {
        let ln = log_int(&BigInt::from(n), PREC);
        hv = hv
            .add(&ln.mul_int(sum_l as i64))
            .add(&h_alpha.mul_int(n * k as i64));
    }
    let log_gamma = log_int(&rec.gamma(), PREC);
    let h_beta = up_point(&hv.mul_int(2).add(&log_gamma.mul_int(k as i64)));
    let c1 = up_point(&h_alpha.max(&h_beta));

    let beta_max = up_point(
        &bf.betas()
            .map(|(_, _, b)| b.abs())
            .reduce(|a, b| a.max(&b))
            .expect("at least one coefficient"),
    );
    let mmax = *mults.iter().max().expect("nonempty") as usize;
    let c3 = up_point(&beta_max.mul_int(t.max(mmax) as i64));
    let c4 = up_point(&c3.mul_int(t as i64));

    let liouville = |h: &Real| -> Real {
        let e = d_real.mul(h).mul_int(2).neg().exp();
        down_point(&e)
    };
    let mut c2: Option<Real> = None;
    let take = |x: Real, c2: &mut Option<Real>| {
        *c2 = Some(match c2.take() {
            Some(c) if c.lower() <= x.lower() => c,
            _ => x,
        });
    };
    let mut source = LowerBoundSource::Numeric;
    let mut n_threshold = 1u64;
    for (i, coeffs) in bf.coeff_polys.iter().enumerate() {
        let m = coeffs.len();
        let top = &coeffs[m - 1];
        if m == 1 {
            if top.contains_zero() {
                source = LowerBoundSource::Liouville;
                take(liouville(&h_beta), &mut c2);
            } else {
                take(down_point(&top.abs()), &mut c2);
            }
            continue;
        }
        if top.contains_zero() {
            return Err(Error::GrowthUncertified(format!(
                "leading Binet coefficient of root {i} is not certified nonzero"
            )));
        }
        let top_lo = top.abs();
        let tail = coeffs[..m - 1]
            .iter()
            .fold(Real::zero(PREC), |acc, b| acc.add(&b.abs()));
        let n0 = tail
            .mul_int(2)
            .div(&top_lo)?
            .upper()
            .ceil_int()
            .to_u64()
            .unwrap_or(u64::MAX)
            .max(1);
        n_threshold = n_threshold.max(n0);
        take(down_point(&top_lo.div_int(2)), &mut c2);
        // h(f_i(n)) <= m h_beta + (m(m-1)/2) log n + log m
        let h_f = |log_n: &Real| {
            h_beta
                .mul_int(m as i64)
                .add(&log_n.mul_int((m * (m - 1) / 2) as i64))
                .add(&log_int(&BigInt::from(m), PREC))
        };
        if n0 > SMALL_RANGE_CAP {
            source = LowerBoundSource::Liouville;
            take(liouville(&h_f(&log_int(&BigInt::from(n0), PREC))), &mut c2);
            continue;
        }
        for n in 1..n0 {
            let v = bf.f_eval(i, n);
            if v.contains_zero() {
                source = LowerBoundSource::Liouville;
                take(liouville(&h_f(&log_int(&BigInt::from(n), PREC))), &mut c2);
            } else {
                take(down_point(&v.abs()), &mut c2);
            }
        }
    }
    let c2 = c2.expect("at least one root");
    if !c2.is_positive() || !c3.is_positive() || !c4.is_positive() {
        return Err(Error::GrowthUncertified("a growth constant is not positive".into()));
    }
    Ok(GrowthConstants {
        c1,
        c2,
        c3,
        c4,
        n_threshold,
        h_alpha,
        h_beta,
        degree,
        c2_source: source,
        beta_max,
    })
}

/// Counts of checked and violated inequalities from a sampled validation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GrowthCheck {
    pub checked: usize,
    pub skipped: usize,
    pub violations: Vec<String>,
}

/// Check the growth inequalities for `1 <= n <= nmax` in ball arithmetic.
/// Values of `f_i(n)` whose enclosure contains zero are skipped.
pub fn check_growth_constants(
    rec: &LinearRecurrence,
    bf: &BinetForm,
    gc: &GrowthConstants,
    nmax: u64,
) -> GrowthCheck {
    let mut out = GrowthCheck::default();
    let k = rec.order() as i64;
    let alpha1 = bf.roots[bf.dominant_index].abs();
    let log_a1_lo = Real::exact(alpha1.lower(), PREC).log().expect("dominant root exceeds zero");
    let log_c4 = gc.c4.log().expect("c4 > 0");
    let terms = rec.terms(nmax);
    for n in 1..=nmax {
        let log_n = log_int(&BigInt::from(n), PREC);
        for i in 0..bf.coeff_polys.len() {
            let m = bf.coeff_polys[i].len() as u64;
            let v = bf.f_eval(i, n).abs();
            if v.contains_zero() {
                out.skipped += 1;
                continue;
            }
            out.checked += 1;
            if v.lower() < gc.c2.lower() {
                out.violations.push(format!("c2 > |f_{i}({n})|"));
            }
            let cap = gc.c3.mul(&Real::from_int(&BigInt::from(n).pow(m as u32 - 1), PREC));
            if v.upper() > cap.lower() {
                out.violations.push(format!("|f_{i}({n})| > c3 n^(m-1)"));
            }
        }
        let u = &terms[n as usize];
        out.checked += 1;
        if !u.is_zero() {
            let lhs = log_int(&u.abs(), PREC);
            let rhs = log_c4
                .add(&log_n.mul_int(k - 1))
                .add(&log_a1_lo.mul_int(n as i64));
            if lhs.upper() > rhs.lower() {
                out.violations.push(format!("|U_{n}| > c4 n^(k-1) alpha1^n"));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::certified_roots;
    use crate::recurrence::{binet_decomposition, spectral_data};

    fn h(p: i64, q: i64) -> f64 {
        height_rational(&BigInt::from(p), &BigInt::from(q)).unwrap().value.to_f64()
    }

    #[test]
    fn rational_heights() {
        assert!((h(3, 2) - 3f64.ln()).abs() < 1e-15);
        assert_eq!(h(1, 1), 0.0);
        assert!((h(-7, 1) - 7f64.ln()).abs() < 1e-15);
        assert_eq!(h(6, 4), h(3, 2));
        assert_eq!(h(0, 1), 0.0);
        assert!(height_rational(&BigInt::from(1), &BigInt::from(0)).is_err());
    }

    #[test]
    fn mahler_bounds() {
        let tiny = Dyadic::pow2(-80);
        let lin = IntPoly::from_i64(&[-2, 1]);
        let hb = height_upper_from_poly(&lin, &certified_roots(&lin, &tiny).unwrap(), 0).unwrap();
        assert!(hb.is_exact);
        assert!((hb.value.to_f64() - 2f64.ln()).abs() < 1e-15);

        let golden = IntPoly::from_i64(&[-1, -1, 1]);
        let hb = height_upper_from_poly(&golden, &certified_roots(&golden, &tiny).unwrap(), 0).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!(!hb.is_exact);
        assert!(hb.upper().to_f64() >= 0.5 * phi.ln());
        assert!(hb.upper().to_f64() <= phi.ln() + 1e-9);

        let sqrt2 = IntPoly::from_i64(&[-2, 0, 1]);
        let hb = height_upper_from_poly(&sqrt2, &certified_roots(&sqrt2, &tiny).unwrap(), 0).unwrap();
        assert!((hb.upper().to_f64() - 2f64.ln()).abs() < 1e-9);
        assert!(height_upper_from_poly(&sqrt2, &[], 0).is_err());
    }

    #[test]
    fn degree_bounds() {
        assert_eq!(degree_bound(2, 2), BigUint::from(2u32));
        assert_eq!(degree_bound(3, 3), BigUint::from(6u32));
        assert_eq!(degree_bound(3, 2), BigUint::from(6u32));
        assert_eq!(degree_bound(4, 1), BigUint::from(4u32));
    }

    fn constants(c: &[i64], u: &[i64]) -> (LinearRecurrence, BinetForm, GrowthConstants) {
        let r = LinearRecurrence::from_i64(c, u).unwrap();
        let s = spectral_data(&r).unwrap();
        let bf = binet_decomposition(&r, &s).unwrap();
        let gc = growth_constants(&r, &bf, &s).unwrap();
        (r, bf, gc)
    }

    #[test]
    fn fibonacci_constants() {
        let (r, bf, gc) = constants(&[1, 1], &[0, 1]);
        assert!(gc.c3.to_f64() >= 2.0 * 0.4472);
        assert!((gc.c2.to_f64() - 0.447_213_595).abs() < 1e-6);
        let chk = check_growth_constants(&r, &bf, &gc, 2000);
        assert!(chk.violations.is_empty(), "{:?}", chk.violations);
    }

    #[test]
    fn repeated_root_constants() {
        // (x - 3)(x - 1)^2 with a nonconstant f for the double root.
        let (r, bf, gc) = constants(&[5, -7, 3], &[1, 0, 2]);
        assert!(gc.n_threshold >= 1);
        let chk = check_growth_constants(&r, &bf, &gc, 1000);
        assert!(chk.violations.is_empty(), "{:?}", chk.violations);
    }
}
