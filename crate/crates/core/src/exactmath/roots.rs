//! Certified isolation of the complex roots of an integer polynomial.
//!
//! Roots are approximated with Aberth–Ehrlich iteration on each square-free
//! factor, then certified a posteriori: for a square-free factor `g` of degree
//! `d` the disk `D(z, d |g(z)/g'(z)|)` always contains a root of `g`, so once
//! the `d` disks of a factor are pairwise disjoint each holds exactly one root.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::ball::Ball;
use super::dyadic::{Dyadic, Round};
use super::poly::{count_real_roots, squarefree_decomposition, IntPoly};
use crate::error::{Error, Result};

/// Default working-precision cap in bits.
pub const DEFAULT_PRECISION_CAP: u32 = 1 << 16;

const START_PREC: u32 = 64;

/// One distinct root with its multiplicity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootCluster {
    pub ball: Ball,
    pub multiplicity: u32,
}

/// Serializable snapshot of a cluster.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterJson {
    pub re: String,
    pub im: String,
    pub radius: String,
    pub multiplicity: u32,
}

impl RootCluster {
    pub fn to_json(&self, digits: u32) -> ClusterJson {
        ClusterJson {
            re: self.ball.mid_re().to_decimal(digits, Round::Nearest),
            im: self.ball.mid_im().to_decimal(digits, Round::Nearest),
            radius: self.ball.radius().to_decimal(4, Round::Ceil),
            multiplicity: self.multiplicity,
        }
    }
}

#[derive(Clone, Debug)]
struct Cx {
    re: Dyadic,
    im: Dyadic,
}

impl Cx {
    fn zero() -> Cx {
        Cx {
            re: Dyadic::zero(),
            im: Dyadic::zero(),
        }
    }
    fn rnd(re: Dyadic, im: Dyadic, p: u32) -> Cx {
        Cx {
            re: re.round(p, Round::Nearest),
            im: im.round(p, Round::Nearest),
        }
    }
    fn add(&self, o: &Cx, p: u32) -> Cx {
        Cx::rnd(self.re.add(&o.re), self.im.add(&o.im), p)
    }
    fn sub(&self, o: &Cx, p: u32) -> Cx {
        Cx::rnd(self.re.sub(&o.re), self.im.sub(&o.im), p)
    }
    fn mul(&self, o: &Cx, p: u32) -> Cx {
        Cx::rnd(
            self.re.mul(&o.re).sub(&self.im.mul(&o.im)),
            self.re.mul(&o.im).add(&self.im.mul(&o.re)),
            p,
        )
    }
    fn norm(&self) -> Dyadic {
        self.re.square().add(&self.im.square())
    }
    fn div(&self, o: &Cx, p: u32) -> Option<Cx> {
        let n = o.norm().round(p + 8, Round::Nearest);
        if n.is_zero() {
            return None;
        }
        let num_re = self.re.mul(&o.re).add(&self.im.mul(&o.im));
        let num_im = self.im.mul(&o.re).sub(&self.re.mul(&o.im));
        Some(Cx {
            re: Dyadic::div_round(&num_re, &n, p, Round::Nearest).0,
            im: Dyadic::div_round(&num_im, &n, p, Round::Nearest).0,
        })
    }
    fn approx_abs(&self) -> f64 {
        self.re.to_f64().hypot(self.im.to_f64())
    }
    fn log2_abs(&self) -> i64 {
        self.re.msb().max(self.im.msb())
    }
}

fn approx_log2(c: &BigInt) -> f64 {
    let bits = c.bits() as i64;
    let shift = (bits - 53).max(0);
    let top = (c.abs() >> shift as u64).to_f64().unwrap_or(1.0);
    top.log2() + shift as f64
}

fn horner(g: &IntPoly, z: &Cx, p: u32) -> (Cx, Cx) {
    // value and derivative
    let mut v = Cx::zero();
    let mut d = Cx::zero();
    for c in g.coeffs().iter().rev() {
        d = d.mul(z, p).add(&v, p);
        v = v.mul(z, p);
        v = Cx::rnd(v.re.add(&Dyadic::from(c)), v.im, p);
    }
    (v, d)
}

fn initial_points(g: &IntPoly) -> Vec<Cx> {
    let d = g.deg();
    let ld = approx_log2(&g.lead());
    // Fujiwara-style radius estimate: max |c_{d-i}/c_d|^{1/i}.
    let mut lr = f64::NEG_INFINITY;
    for i in 1..=d {
        let c = g.coeff(d - i);
        if c.is_zero() {
            continue;
        }
        lr = lr.max((approx_log2(&c) - ld) / i as f64);
    }
    if !lr.is_finite() {
        lr = 0.0;
    }
    let int_part = lr.floor();
    let frac = 2f64.powf(lr - int_part);
    (0..d)
        .map(|j| {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / d as f64 + 0.4;
            Cx {
                re: Dyadic::from_f64(frac * theta.cos()).mul_pow2(int_part as i64),
                im: Dyadic::from_f64(frac * theta.sin()).mul_pow2(int_part as i64),
            }
        })
        .collect()
}

/// Aberth–Ehrlich iteration at working precision `p` (Gauss–Seidel updates).
fn aberth(g: &IntPoly, mut z: Vec<Cx>, p: u32, max_iter: usize) -> Vec<Cx> {
    let n = z.len();
    for _ in 0..max_iter {
        let mut converged = true;
        for i in 0..n {
            let (v, dv) = horner(g, &z[i], p);
            if v.re.is_zero() && v.im.is_zero() {
                continue;
            }
            let Some(ratio) = v.div(&dv, p) else {
                // Stationary point: nudge off it.
                z[i] = z[i].add(&Cx { re: Dyadic::pow2(-(p as i64) / 4), im: Dyadic::pow2(-(p as i64) / 3) }, p);
                converged = false;
                continue;
            };
            let mut s = Cx::zero();
            for j in 0..n {
                if j != i {
                    let diff = z[i].sub(&z[j], p);
                    if let Some(inv) = Cx::rnd(Dyadic::one(), Dyadic::zero(), p).div(&diff, p) {
                        s = s.add(&inv, p);
                    }
                }
            }
            let denom = Cx::rnd(Dyadic::one(), Dyadic::zero(), p).sub(&ratio.mul(&s, p), p);
            let w = ratio.div(&denom, p).unwrap_or(ratio);
            let scale = z[i].log2_abs().max(0);
            if w.log2_abs() > scale - p as i64 + 6 {
                converged = false;
            }
            z[i] = z[i].sub(&w, p);
        }
        if converged {
            break;
        }
    }
    z
}

/// Inclusion radius `deg * |g(z)/g'(z)|`, rounded up; `None` if `g'(z) = 0`.
fn inclusion_radius(g: &IntPoly, z: &Cx) -> Option<Dyadic> {
    let (vr, vi) = g.eval_dyadic(&z.re, &z.im);
    let num = vr.square().add(&vi.square());
    if num.is_zero() {
        return Some(Dyadic::zero());
    }
    let (dr, di) = g.derivative().eval_dyadic(&z.re, &z.im);
    let den = dr.square().add(&di.square());
    if den.is_zero() {
        return None;
    }
    let (q, _) = Dyadic::div_round(&num, &den, 40, Round::Ceil);
    let r = q.sqrt_round(40, Round::Ceil);
    Some(r.mul(&Dyadic::from(g.deg() as i64)).round(30, Round::Ceil))
}

/// Enforce conjugate symmetry: real-root disks get real centers, non-real disks are
/// paired as exact mirror images. Returns `None` when the pairing cannot be proven yet.
fn symmetrize(g: &IntPoly, disks: Vec<Ball>) -> Option<Vec<Ball>> {
    let n_real = count_real_roots(g);
    let on_axis: Vec<usize> = (0..disks.len()).filter(|&i| disks[i].meets_real_axis()).collect();
    if on_axis.len() != n_real {
        return None;
    }
    let mut out = disks.clone();
    for &i in &on_axis {
        let b = &disks[i];
        out[i] = Ball::new(b.mid_re().clone(), Dyadic::zero(), b.radius().clone(), b.prec());
    }
    let upper: Vec<usize> = (0..disks.len())
        .filter(|&i| !disks[i].meets_real_axis() && disks[i].mid_im().is_positive())
        .collect();
    let lower: Vec<usize> = (0..disks.len())
        .filter(|&i| !disks[i].meets_real_axis() && disks[i].mid_im().is_negative())
        .collect();
    if upper.len() != lower.len() {
        return None;
    }
    let mut used = vec![false; disks.len()];
    for &i in &upper {
        let mirror = disks[i].conj();
        let hits: Vec<usize> = (0..disks.len()).filter(|&j| mirror.overlaps(&disks[j])).collect();
        if hits.len() != 1 || !lower.contains(&hits[0]) || used[hits[0]] {
            return None;
        }
        let j = hits[0];
        used[j] = true;
        let (ci, cj) = (&disks[i], &disks[j]);
        let re = ci.mid_re().add(cj.mid_re()).mul_pow2(-1);
        let im = ci.mid_im().sub(cj.mid_im()).mul_pow2(-1);
        let dre = ci.mid_re().sub(cj.mid_re());
        let dim = ci.mid_im().add(cj.mid_im());
        let half_gap = dre.square().add(&dim.square()).sqrt_round(40, Round::Ceil).mul_pow2(-1);
        let rad = Dyadic::max(ci.radius(), cj.radius()).add(&half_gap);
        let prec = ci.prec();
        out[i] = Ball::new(re.clone(), im.clone(), rad.clone(), prec);
        out[j] = Ball::new(re, im.neg(), rad, prec);
    }
    Some(out)
}

/// Total order by descending modulus, then ascending principal argument.
pub fn cluster_order(a: &Ball, b: &Ball) -> Ordering {
    let na = a.center_norm_sqr();
    let nb = b.center_norm_sqr();
    nb.cmp(&na).then_with(|| arg_order(a.mid_re(), a.mid_im(), b.mid_re(), b.mid_im()))
}

fn arg_class(re: &Dyadic, im: &Dyadic) -> u8 {
    if im.is_negative() {
        0
    } else if im.is_zero() && !re.is_negative() {
        1
    } else if im.is_positive() {
        2
    } else {
        3
    }
}

fn arg_order(ar: &Dyadic, ai: &Dyadic, br: &Dyadic, bi: &Dyadic) -> Ordering {
    let (ca, cb) = (arg_class(ar, ai), arg_class(br, bi));
    if ca != cb {
        return ca.cmp(&cb);
    }
    if ca == 1 || ca == 3 {
        return Ordering::Equal;
    }
    // Same open half plane: arg a < arg b iff cross(a, b) > 0.
    let cross = ar.mul(bi).sub(&ai.mul(br));
    Dyadic::zero().cmp(&cross)
}

/// Certified roots with the default precision cap.
pub fn certified_roots(p: &IntPoly, target_radius: &Dyadic) -> Result<Vec<RootCluster>> {
    certified_roots_capped(p, target_radius, DEFAULT_PRECISION_CAP)
}

/// Isolate all complex roots of `p` in pairwise disjoint disks of radius at most
/// `target_radius`, ordered by descending modulus then argument.
pub fn certified_roots_capped(
    p: &IntPoly,
    target_radius: &Dyadic,
    precision_cap: u32,
) -> Result<Vec<RootCluster>> {
    if p.is_zero() || p.deg() == 0 {
        return Err(Error::Domain("root isolation needs a polynomial of degree >= 1".into()));
    }
    let factors = squarefree_decomposition(p)?;
    let mut approx: Vec<Vec<Cx>> = factors.iter().map(|(g, _)| initial_points(g)).collect();
    let mut prec = START_PREC;
    let mut first = true;
    loop {
        if prec > precision_cap {
            return Err(Error::PrecisionExhausted { cap: precision_cap });
        }
        for ((g, _), z) in factors.iter().zip(approx.iter_mut()) {
            if g.deg() == 1 {
                let q = num_rational::BigRational::new(-g.coeff(0), g.coeff(1));
                *z = vec![Cx {
                    re: Dyadic::from_rational(&q, prec, Round::Nearest),
                    im: Dyadic::zero(),
                }];
                continue;
            }
            let iters = if first { 500 } else { 60 };
            *z = aberth(g, std::mem::take(z), prec, iters);
        }
        first = false;
        if let Some(clusters) = try_certify(&factors, &approx, prec, target_radius) {
            let mut clusters = clusters;
            clusters.sort_by(|a, b| cluster_order(&a.ball, &b.ball));
            return Ok(clusters);
        }
        prec *= 2;
    }
}

fn try_certify(
    factors: &[(IntPoly, u32)],
    approx: &[Vec<Cx>],
    prec: u32,
    target: &Dyadic,
) -> Option<Vec<RootCluster>> {
    let mut all = Vec::new();
    for ((g, mult), zs) in factors.iter().zip(approx) {
        let mut disks = Vec::with_capacity(zs.len());
        for z in zs {
            let r = inclusion_radius(g, z)?;
            disks.push(Ball::new(z.re.clone(), z.im.clone(), r, prec));
        }
        for i in 0..disks.len() {
            for j in i + 1..disks.len() {
                if disks[i].overlaps(&disks[j]) {
                    return None;
                }
            }
        }
        let disks = symmetrize(g, disks)?;
        all.extend(disks.into_iter().map(|ball| RootCluster {
            ball,
            multiplicity: *mult,
        }));
    }
    for i in 0..all.len() {
        if all[i].ball.radius() > target {
            return None;
        }
        for j in i + 1..all.len() {
            if all[i].ball.overlaps(&all[j].ball) {
                return None;
            }
        }
    }
    Some(all)
}

/// Approximate modulus of a cluster center (diagnostics only).
pub fn approx_modulus(c: &RootCluster) -> f64 {
    Cx {
        re: c.ball.mid_re().clone(),
        im: c.ball.mid_im().clone(),
    }
    .approx_abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> IntPoly {
        IntPoly::from_i64(c)
    }

    fn tgt() -> Dyadic {
        Dyadic::pow2(-60)
    }

    #[test]
    fn golden_ratio_roots() {
        let r = certified_roots(&p(&[-1, -1, 1]), &tgt()).unwrap();
        assert_eq!(r.len(), 2);
        assert!((r[0].ball.mid_re().to_f64() - 1.618033988749895).abs() < 1e-15);
        assert!((r[1].ball.mid_re().to_f64() + 0.6180339887498949).abs() < 1e-15);
        assert!(r.iter().all(|c| c.multiplicity == 1 && c.ball.mid_im().is_zero()));
    }

    #[test]
    fn imaginary_unit() {
        let r = certified_roots(&p(&[1, 0, 1]), &tgt()).unwrap();
        assert_eq!(r.len(), 2);
        // Same modulus; -i sorts before +i by argument.
        assert!(r[0].ball.mid_im().is_negative());
        assert!(r[1].ball.contains_point(&Dyadic::zero(), &Dyadic::one()));
        assert_eq!(r[0].ball, r[1].ball.conj());
    }

    #[test]
    fn double_root() {
        let r = certified_roots(&p(&[4, -4, 1]), &tgt()).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].multiplicity, 2);
        assert!(r[0].ball.contains_int(&BigInt::from(2)));
        assert!(r[0].ball.radius().is_zero());
    }

    #[test]
    fn tribonacci_roots() {
        let r = certified_roots(&p(&[-1, -1, -1, 1]), &tgt()).unwrap();
        assert_eq!(r.len(), 3);
        assert!((r[0].ball.mid_re().to_f64() - 1.839286755214161).abs() < 1e-14);
        assert_eq!(r[1].ball, r[2].ball.conj());
    }

    #[test]
    fn rejects_constants() {
        assert!(certified_roots(&p(&[3]), &tgt()).is_err());
    }

    #[test]
    fn precision_cap_is_enforced() {
        // Roots 1/3 and 1/3 + 2^-200 cannot be separated at 128 bits.
        let a = p(&[-1, 3]);
        let big = BigInt::from(1) << 200u32;
        let b = IntPoly::new(vec![-(&big + BigInt::from(3)), BigInt::from(3) * &big]);
        let f = a.mul(&b);
        assert!(matches!(
            certified_roots_capped(&f, &tgt(), 128),
            Err(Error::PrecisionExhausted { .. })
        ));
        assert!(certified_roots_capped(&f, &Dyadic::pow2(-250), 1024).is_ok());
    }

    #[test]
    fn higher_degree_cyclotomic() {
        let f = super::super::poly::cyclotomic(15).unwrap();
        let r = certified_roots(&f, &tgt()).unwrap();
        assert_eq!(r.len(), 8);
        for c in &r {
            let m = approx_modulus(c);
            assert!((m - 1.0).abs() < 1e-12);
        }
    }
}
