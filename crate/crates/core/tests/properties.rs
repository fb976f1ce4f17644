use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

use recsum_core::exactmath::{cyclotomic, poly_resultant, IntPoly};
use recsum_core::heights::height_rational;
use recsum_core::search::brute_solutions;
use recsum_core::{Epsilon, LinearRecurrence, PrimeSet, ProblemInstance, Real};

fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(d))
}

#[derive(Clone, Debug)]
enum Op {
    Add(i64, i64),
    Sub(i64, i64),
    Mul(i64, i64),
    Div(i64, i64),
}

fn op() -> impl Strategy<Value = Op> {
    let frac = (-1000i64..1000, 1i64..100);
    prop_oneof![
        frac.clone().prop_map(|(p, d)| Op::Add(p, d)),
        frac.clone().prop_map(|(p, d)| Op::Sub(p, d)),
        frac.clone().prop_map(|(p, d)| Op::Mul(p, d)),
        frac.prop_map(|(p, d)| Op::Div(p, d)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    // 100 chains of 100 operations each
    #[test]
    fn ball_ops_contain_exact_result(start in (-1000i64..1000, 1i64..100), ops in prop::collection::vec(op(), 100)) {
        let prec = 64;
        let mut exact = q(start.0, start.1);
        let mut ball = Real::from_ratio(start.0, start.1, prec);
        for o in ops {
            let (x, xb) = match o {
                Op::Add(p, d) | Op::Sub(p, d) | Op::Mul(p, d) | Op::Div(p, d) => (q(p, d), Real::from_ratio(p, d, prec)),
            };
            match o {
                Op::Add(..) => { exact += &x; ball = ball.add(&xb); }
                Op::Sub(..) => { exact -= &x; ball = ball.sub(&xb); }
                Op::Mul(..) => { exact *= &x; ball = ball.mul(&xb); }
                Op::Div(..) => {
                    if x.is_zero() {
                        prop_assert!(ball.div(&xb).is_err());
                        continue;
                    }
                    exact /= &x;
                    ball = ball.div(&xb).unwrap();
                }
            }
            prop_assert!(ball.contains_rational(&exact));
            // keep the exact operand small enough to stay cheap
            if exact.numer().bits() > 4000 || exact.denom().bits() > 4000 {
                exact = q(1, 1);
                ball = Real::one(prec);
            }
        }
    }

    #[test]
    fn resultant_vanishes_iff_common_factor(
        a in prop::collection::vec(-5i64..6, 2..5),
        b in prop::collection::vec(-5i64..6, 2..5),
        c in prop::collection::vec(-3i64..4, 2..4),
    ) {
        let (a, b, c) = (IntPoly::from_i64(&a), IntPoly::from_i64(&b), IntPoly::from_i64(&c));
        prop_assume!(a.deg() >= 1 && b.deg() >= 1 && c.deg() >= 1);
        let res = poly_resultant(&a, &b).unwrap();
        prop_assert_eq!(res.is_zero(), a.gcd(&b).deg() >= 1);
        prop_assert!(poly_resultant(&a.mul(&c), &b.mul(&c)).unwrap().is_zero());
    }

    #[test]
    fn rational_height_identities(p in -100_000i64..100_000, d in 1i64..100_000, g in 1i64..1000) {
        prop_assume!(p != 0);
        let h = height_rational(&BigInt::from(p), &BigInt::from(d)).unwrap();
        let scaled = height_rational(&BigInt::from(p * g), &BigInt::from(d * g)).unwrap();
        prop_assert_eq!(&h, &scaled);
        let (ip, id) = if p < 0 { (-d, -p) } else { (d, p) };
        prop_assert_eq!(&h, &height_rational(&BigInt::from(ip), &BigInt::from(id)).unwrap());
        prop_assert!(!h.value.is_negative());
    }

    #[test]
    fn terms_agree_with_term(c in prop::collection::vec(-3i64..4, 2..5), u0 in -5i64..6) {
        let k = c.len();
        prop_assume!(c[k - 1] != 0);
        let mut init = vec![u0; k];
        init[k - 1] = 1;
        let rec = LinearRecurrence::from_i64(&c, &init).unwrap();
        let all = rec.terms(40);
        for n in [0u64, 1, 7, 23, 40] {
            prop_assert_eq!(&all[n as usize], &rec.term(n));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn enlarging_the_box_keeps_solutions(r in 1usize..3, nmax in 5u64..20, zbits in 3u32..10) {
        let inst = ProblemInstance::new(
            LinearRecurrence::from_i64(&[1, 1], &[0, 1]).unwrap(),
            PrimeSet::from_u64(&[2, 3]).unwrap(),
            BigUint::one(),
            BigUint::one(),
            r,
            Epsilon::from_ratio(1, 2).unwrap(),
        )
        .unwrap();
        let small = brute_solutions(&inst, nmax, &(BigUint::one() << zbits)).unwrap();
        let big = brute_solutions(&inst, nmax + 5, &(BigUint::one() << (zbits + 3))).unwrap();
        prop_assert!(small.iter().all(|s| big.contains(s)));
    }
}

#[test]
fn cyclotomic_products() {
    for n in 1..=200u64 {
        let prod = (1..=n)
            .filter(|d| n % d == 0)
            .fold(IntPoly::one(), |acc, d| acc.mul(&cyclotomic(d).unwrap()));
        let want = IntPoly::monomial(n as usize).sub(&IntPoly::one());
        assert_eq!(prod, want, "n = {n}");
    }
}
