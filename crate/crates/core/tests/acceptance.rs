//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use recsum_core::bounds::{final_bound, matveev_c, matveev_lower_bound, solve_n_log_bound, MatveevInput};
use recsum_core::exactmath::{certified_roots, parse_decimal, Dyadic, IntPoly};
use recsum_core::heights::{check_growth_constants, height_rational, height_upper_from_poly, growth_constants};
use recsum_core::recurrence::{binet_decomposition, is_degenerate, spectral_data};
use recsum_core::search::{brute_solutions, naive_solutions, search, SearchOptions};
use recsum_core::{Epsilon, Error, LinearRecurrence, PrimeSet, ProblemInstance, Real};

const PREC: u32 = 160;

fn fixtures() -> Vec<(&'static str, LinearRecurrence)> {
    vec![
        ("fibonacci", LinearRecurrence::from_i64(&[1, 1], &[0, 1]).unwrap()),
        ("pell", LinearRecurrence::from_i64(&[2, 1], &[0, 1]).unwrap()),
        ("tribonacci", LinearRecurrence::from_i64(&[1, 1, 1], &[0, 0, 1]).unwrap()),
    ]
}

fn instance(rec: &LinearRecurrence, s: &[u64], r: usize) -> ProblemInstance {
    ProblemInstance::new(
        rec.clone(),
        PrimeSet::from_u64(s).unwrap(),
        BigUint::one(),
        BigUint::one(),
        r,
        Epsilon::from_ratio(1, 1).unwrap(),
    )
    .unwrap()
}

fn rat(s: &str) -> BigRational {
    parse_decimal(s).unwrap()
}

/// The ball meets `[x (1 - tol), x (1 + tol)]`.
fn ball_meets(v: &Real, oracle: &str, tol: &str) -> bool {
    let x = rat(oracle);
    let d = x.abs() * rat(tol);
    v.lower().to_rational() <= &x + &d && v.upper().to_rational() >= x - d
}

fn ensure(ok: bool, what: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn binet_containment() -> Result<String, String> {
    let start = Instant::now();
    let mut evals = 0;
    for (name, rec) in fixtures() {
        let spec = spectral_data(&rec).map_err(|e| e.to_string())?;
        let bf = binet_decomposition(&rec, &spec).map_err(|e| e.to_string())?;
        for (n, u) in rec.terms(300).iter().enumerate() {
            ensure(bf.eval(n as u64).contains_int(u), format!("{name}: U_{n} not enclosed"))?;
            evals += 1;
        }
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(10), format!("took {t:?}"))?;
    Ok(format!("{evals} terms enclosed in {t:.2?}"))
}

// Verdicts from a 100-digit numeric root-ratio oracle.
const DEGENERACY_ORACLE: [(&[i64], bool); 20] = [
    (&[0, -2, -1, 1], false),
    (&[-2, 2], false),
    (&[1, 0, 2], false),
    (&[-2, -2, 1], false),
    (&[0, -1, 1, -2], false),
    (&[-1, 2, -2], false),
    (&[2, -2, 2], false),
    (&[2, 0, 2], false),
    (&[0, 0, 2], true),
    (&[-1, 1], false),
    (&[-2, -1, -1], false),
    (&[-1, -2, 2, -1], false),
    (&[2, 1], false),
    (&[-2, 2, 0, -1], false),
    (&[0, 2], true),
    (&[1, -1, 2, -2], false),
    (&[1, 0, 1], false),
    (&[0, -1], true),
    (&[0, -1, -1], false),
    (&[2, -1, -1, -1], false),
];

fn degeneracy() -> Result<String, String> {
    let degenerate = |c: &[i64]| {
        let mut init = vec![0; c.len()];
        init[c.len() - 1] = 1;
        is_degenerate(&LinearRecurrence::from_i64(c, &init).unwrap()).unwrap()
    };
    ensure(degenerate(&[0, 1]), "[0, 1] not degenerate")?;
    ensure(degenerate(&[0, -1]), "[0, -1] not degenerate")?;
    for c in [&[1i64, 1][..], &[2, 1], &[1, 1, 1], &[3, -2]] {
        ensure(!degenerate(c), format!("{c:?} flagged degenerate"))?;
    }
    for (c, want) in DEGENERACY_ORACLE {
        ensure(degenerate(c) == want, format!("{c:?}: oracle says {want}"))?;
    }
    Ok("fixtures and 20 oracle recurrences agree".into())
}

fn heights() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let (p, q): (i64, i64) = loop {
            let p = rng.gen_range(-1_000_000i64..=1_000_000);
            let q = rng.gen_range(1i64..=1_000_000);
            if num_integer::gcd(p, q) == 1 {
                break (p, q);
            }
        };
        let h = height_rational(&BigInt::from(p), &BigInt::from(q)).unwrap();
        let want = (p.abs().max(q) as f64).ln();
        ensure(h.is_exact, "rational height not exact")?;
        ensure((h.value.to_f64() - want).abs() < 1e-12, format!("h({p}/{q})"))?;
        ensure(h.value.rad().is_zero() || h.value.rad() < &Dyadic::pow2(-100), "wide rational height")?;
        if p != 0 {
            let (ip, iq) = if p < 0 { (-q, -p) } else { (q, p) };
            let inv = height_rational(&BigInt::from(ip), &BigInt::from(iq)).unwrap();
            ensure(inv.value == h.value, format!("h({p}/{q}) != h of inverse"))?;
        }
    }
    let target = Dyadic::pow2(-80);
    let golden = IntPoly::from_i64(&[-1, -1, 1]);
    let inverse = IntPoly::from_i64(&[-1, 1, 1]);
    let gr = certified_roots(&golden, &target).unwrap();
    let ir = certified_roots(&inverse, &target).unwrap();
    let phi = gr.iter().position(|c| c.ball.mid_re().to_f64() > 1.0).unwrap();
    let inv_phi = ir.iter().position(|c| (c.ball.mid_re().to_f64() - 0.618).abs() < 0.01).unwrap();
    let h = height_upper_from_poly(&golden, &gr, phi).unwrap().value;
    let hi = height_upper_from_poly(&inverse, &ir, inv_phi).unwrap().value;
    ensure(h == hi, "h(phi) bound differs from h(1/phi) bound")?;
    // 50-digit oracle values of (1/2) log phi and log phi
    let true_h = rat("0.24060591252980172374887945671218421156759216719283");
    let log_phi = rat("0.48121182505960344749775891342436842313518433438566");
    ensure(h.upper().to_rational() >= true_h, "upper bound below h(phi)")?;
    ensure(h.upper().to_rational() <= log_phi + rat("1e-9"), "upper bound above log phi + 1e-9")?;
    Ok(format!("100 fractions exact; h(phi) <= {}", h.upper_decimal(12)))
}

fn matveev() -> Result<String, String> {
    // 30-digit oracle values of both branches
    let c11 = matveev_c(1, 1).unwrap();
    let c21 = matveev_c(2, 1).unwrap();
    ensure(ball_meets(&c11, "1100904.1405259133203209164259", "1e-28"), "C(1,1)")?;
    ensure(ball_meets(&c21, "747318511.874132310753497766316", "1e-28"), "C(2,1)")?;
    ensure(c11.upper() < Dyadic::pow2(26) && c21.upper() < Dyadic::pow2(32), "branch choice")?;
    for kappa in [1, 2] {
        let mut prev = matveev_c(1, kappa).unwrap();
        for m in 2..=30 {
            let cur = matveev_c(m, kappa).unwrap();
            ensure(prev.lower() <= cur.upper(), format!("C({m},{kappa}) decreases"))?;
            prev = cur;
        }
    }
    let unit = MatveevInput {
        kappa: 1,
        degree: BigUint::one(),
        b_bound: Real::one(PREC),
        a: vec![Real::from_ratio(4, 25, PREC)],
    };
    let v = matveev_lower_bound(&unit).unwrap();
    ensure(ball_meets(&v, "-176144.662484146131251346628144", "1e-28"), "-C(1,1) 0.16")?;
    Ok(format!("C(1,1) = {}", c11.upper_decimal(12)))
}

fn growth() -> Result<String, String> {
    let mut checked = 0;
    for (name, rec) in fixtures() {
        let spec = spectral_data(&rec).unwrap();
        let bf = binet_decomposition(&rec, &spec).unwrap();
        let gc = growth_constants(&rec, &bf, &spec).unwrap();
        let report = check_growth_constants(&rec, &bf, &gc, 10_000);
        ensure(
            report.violations.is_empty(),
            format!("{name}: {} violations, first {:?}", report.violations.len(), report.violations.first()),
        )?;
        checked += report.checked;
    }
    Ok(format!("{checked} inequalities hold for n <= 10^4"))
}

fn search_oracle() -> Result<String, String> {
    let start = Instant::now();
    let zmax = BigUint::from(1u64 << 20);
    let mut total = 0;
    for (name, rec) in fixtures() {
        for s in [&[2u64][..], &[2, 3], &[2, 3, 5]] {
            for r in 1..=3 {
                let inst = instance(&rec, s, r);
                let fast = brute_solutions(&inst, 60, &zmax).unwrap();
                let slow = naive_solutions(&inst, 60, &zmax).unwrap();
                ensure(fast == slow, format!("{name} S={s:?} r={r}: engines differ"))?;
                let sieved = search(&inst, &SearchOptions::new(60, zmax.clone()).with_moduli(vec![7, 9, 11, 13, 16]))
                    .unwrap();
                ensure(sieved.solutions == fast, format!("{name} S={s:?} r={r}: pruning changed the set"))?;
                total += fast.len();
            }
        }
    }
    let planted = planted_solutions()?;
    let t = start.elapsed();
    ensure(t < Duration::from_secs(300), format!("took {t:?}"))?;
    Ok(format!("27 grid cells, {total} solutions, {planted} planted found, {t:.1?}"))
}

fn planted_solutions() -> Result<usize, String> {
    let rec = LinearRecurrence::from_i64(&[1, 1], &[0, 1]).unwrap();
    let inst = instance(&rec, &[2, 3, 5, 7, 11, 13], 3);
    let zmax = 1u64 << 11;
    let nmax = 18;
    let units: Vec<i64> = (1..=zmax as i64)
        .filter(|&v| smooth(v))
        .flat_map(|v| [v, -v])
        .collect();
    let terms = rec.terms(nmax);
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let mut planted = Vec::new();
    while planted.len() < 50 {
        let n = rng.gen_range(0..=nmax);
        let m = rng.gen_range(0..=n);
        let lhs = (&terms[n as usize] + &terms[m as usize]).to_i64().unwrap();
        let z1 = units[rng.gen_range(0..units.len())];
        let z2 = units[rng.gen_range(0..units.len())];
        let z3 = lhs - z1 - z2;
        if z3 == 0 || z3.unsigned_abs() > zmax || !smooth(z3.abs()) {
            continue;
        }
        let mut t = vec![z1, z2, z3];
        t.sort_by_key(|v| (v.abs(), v.signum()));
        if !planted.contains(&(n, m, t.clone())) {
            planted.push((n, m, t));
        }
    }
    let found = brute_solutions(&inst, nmax, &BigUint::from(zmax)).unwrap();
    for (n, m, t) in &planted {
        let hit = found.iter().any(|s| {
            s.n == *n && s.m == *m && s.summands.iter().map(|z| z.value().to_i64().unwrap()).eq(t.iter().copied())
        });
        ensure(hit, format!("planted ({n}, {m}, {t:?}) not found"))?;
    }
    Ok(planted.len())
}

fn smooth(mut v: i64) -> bool {
    for p in [2, 3, 5, 7, 11, 13] {
        while v % p == 0 {
            v /= p;
        }
    }
    v == 1
}

fn certificate() -> Result<String, String> {
    let rec = LinearRecurrence::from_i64(&[1, 1], &[0, 1]).unwrap();
    let inst = instance(&rec, &[2, 3, 5], 1);
    let cert = final_bound(&inst).map_err(|e| e.to_string())?;
    let again = final_bound(&inst).map_err(|e| e.to_string())?;
    let bytes = serde_json::to_string_pretty(&cert.to_json()).unwrap();
    ensure(bytes == serde_json::to_string_pretty(&again.to_json()).unwrap(), "certificate bytes differ")?;
    ensure(cert.n0 >= BigUint::one(), "N0 < 1")?;
    let bounds = cert.bounds();
    let sols = brute_solutions(&inst, 90, &(BigUint::one() << 64u32)).unwrap();
    ensure(!sols.is_empty(), "no desk-scale solutions")?;
    for s in &sols {
        let zr = s.summands.last().unwrap().value();
        let v = bounds.violations(s.n, s.m, zr);
        ensure(v.is_empty(), format!("({}, {}): {v:?}", s.n, s.m))?;
    }
    Ok(format!("N0 has {} digits; {} solutions respect it", cert.n0.to_string().len(), sols.len()))
}

fn refusals() -> Result<String, String> {
    let refuse = |c: &[i64], u: &[i64], s: &[u64]| {
        let rec = LinearRecurrence::from_i64(c, u).unwrap();
        final_bound(&instance(&rec, s, 1)).err()
    };
    let e = refuse(&[3, -2], &[0, 1], &[2]);
    ensure(matches!(e, Some(Error::DominantRootIntegerGt1)), format!("2^n - 1: {e:?}"))?;
    ensure(e.unwrap().reason_code() == "dominant_root_integer_gt1", "reason code")?;
    let e = refuse(&[0, 1], &[0, 1], &[2]);
    ensure(matches!(e, Some(Error::DegenerateRecurrence)), format!("[0, 1]: {e:?}"))?;
    let e = refuse(&[4, -4], &[0, 1], &[2]);
    ensure(matches!(e, Some(Error::NotConstantLeadCoefficient)), format!("double root: {e:?}"))?;
    Ok("2^n - 1, [0, 1] and (x - 2)^2 refused".into())
}

fn n_log_solver() -> Result<String, String> {
    let solve = |c: &Real| solve_n_log_bound(c).unwrap().to_u64().unwrap();
    let scan = |c: f64| -> u64 {
        (2..2_000_000u64)
            .filter(|&n| n as f64 <= c * (n as f64).ln() + 1e-9)
            .max()
            .unwrap_or(2)
    };
    for (c, want) in [(1, 2), (10, 35), (100, 647)] {
        let got = solve(&Real::from_i64(c, PREC));
        ensure(got == want, format!("N0({c}) = {got}, expected {want}"))?;
        ensure(scan(c as f64) == want, format!("scan disagrees at c = {c}"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let num = rng.gen_range(1_000i64..=1_000_000);
        let c = num as f64 / 1000.0;
        let got = solve(&Real::from_ratio(num, 1000, PREC));
        // maximality: N0 satisfies the inequality, nothing above it does
        let nf = got as f64;
        ensure(got == 2 || nf <= c * nf.ln() + 1e-9, format!("c = {c}: N0 = {got} violates"))?;
        ensure(
            (got + 1..got.max(10) * 20).all(|n| n as f64 > c * (n as f64).ln() - 1e-9),
            format!("c = {c}: larger n satisfies n <= c log n"),
        )?;
        ensure(scan(c) == got, format!("c = {c}: scan gives {}, solver {got}", scan(c)))?;
    }
    Ok("fixed points and 100 random c confirmed by scan".into())
}

type Criterion = (&'static str, fn() -> Result<String, String>);

fn main() {
    let criteria: [Criterion; 9] = [
        ("binet containment", binet_containment),
        ("degeneracy", degeneracy),
        ("height identities", heights),
        ("matveev evaluator", matveev),
        ("growth constants", growth),
        ("search oracle equivalence", search_oracle),
        ("certificate soundness", certificate),
        ("hypothesis refusals", refusals),
        ("n log n solver", n_log_solver),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let t = start.elapsed();
        match outcome {
            Ok(msg) => println!("criterion {}: PASS {name} ({msg}) [{t:.1?}]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {}: FAIL {name} ({msg}) [{t:.1?}]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
