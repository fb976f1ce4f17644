//! Exhaustive desk-scale search for `a U_n + b U_m = z_1 + ... + z_r`.
//!
//! Two engines produce the same canonical solution set: a meet-in-the-middle
//! engine with a shared sum index, and a nested-loop engine that checks the
//! last summand by trial division over `S`.

use std::cmp::Ordering;
use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::ProblemInstance;
use crate::error::{Error, Result};
use crate::sunits::{enumerate_sunits, factor_over_s, PrimeSet, SUnit};

/// Default cap on the number of entries in the half-sum index.
pub const DEFAULT_INDEX_CAP: usize = 1 << 26;
/// Largest `r * Zmax` the native engines accept.
const MAX_TOTAL_LOG2: u64 = 120;
/// Largest number of S-units the engines accept.
const MAX_UNITS: usize = 1 << 24;
/// Largest accepted residue modulus.
pub const MAX_MODULUS: u64 = 1 << 20;
/// Largest number of distinct states explored while looking for a period.
const MAX_PERIOD_STATES: usize = 1 << 22;

/// One solution `(n, m, z_1, ..., z_r)` with `n >= m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionRecord {
    pub n: u64,
    pub m: u64,
    /// Sorted by `(|z|, sign)`; the last entry plays the role of `z_r`.
    pub summands: Vec<SUnit>,
    pub lhs_value: BigInt,
    pub satisfies_dominance: bool,
    pub satisfies_size_hypothesis: bool,
}

/// Wire form of a [`SolutionRecord`], integers as decimal strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionLine {
    pub n: String,
    pub m: String,
    pub summands: Vec<String>,
    pub lhs_value: String,
    pub satisfies_dominance: bool,
    pub satisfies_size_hypothesis: bool,
}

impl SolutionRecord {
    pub fn to_line(&self) -> SolutionLine {
        SolutionLine {
            n: self.n.to_string(),
            m: self.m.to_string(),
            summands: self.summands.iter().map(|z| z.value().to_string()).collect(),
            lhs_value: self.lhs_value.to_string(),
            satisfies_dominance: self.satisfies_dominance,
            satisfies_size_hypothesis: self.satisfies_size_hypothesis,
        }
    }

    /// Single-line JSON.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(&self.to_line()).expect("plain data serializes")
    }

    /// Parses the wire form; summands must be S-units.
    pub fn from_line(line: &SolutionLine, s: &PrimeSet) -> Result<Self> {
        let int = |what: &str, v: &str| -> Result<BigInt> {
            v.trim()
                .parse::<BigInt>()
                .map_err(|_| Error::Domain(format!("{what} is not an integer: {v:?}")))
        };
        let idx = |what: &str, v: &str| -> Result<u64> {
            v.trim()
                .parse::<u64>()
                .map_err(|_| Error::Domain(format!("{what} is not a nonnegative index: {v:?}")))
        };
        let summands = line
            .summands
            .iter()
            .map(|z| factor_over_s(&int("summand", z)?, s))
            .collect::<Result<Vec<_>>>()?;
        Ok(SolutionRecord {
            n: idx("n", &line.n)?,
            m: idx("m", &line.m)?,
            summands,
            lhs_value: int("lhs_value", &line.lhs_value)?,
            satisfies_dominance: line.satisfies_dominance,
            satisfies_size_hypothesis: line.satisfies_size_hypothesis,
        })
    }

    pub fn parse_json_line(text: &str, s: &PrimeSet) -> Result<Self> {
        let line: SolutionLine =
            serde_json::from_str(text).map_err(|e| Error::Domain(format!("malformed record: {e}")))?;
        Self::from_line(&line, s)
    }
}

/// Which engine answers a query.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    /// Meet in the middle unless the index would exceed its cap.
    Auto,
    MeetInTheMiddle,
    Naive,
}

#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub nmax: u64,
    pub zmax: BigUint,
    /// Pairwise coprime moduli for the residue prefilter.
    pub moduli: Vec<u64>,
    /// Keep only solutions whose last summand dominates the others.
    pub dominance_only: bool,
    pub index_cap: usize,
    pub engine: Engine,
}

impl SearchOptions {
    pub fn new(nmax: u64, zmax: BigUint) -> Self {
        SearchOptions {
            nmax,
            zmax,
            moduli: Vec::new(),
            dominance_only: false,
            index_cap: DEFAULT_INDEX_CAP,
            engine: Engine::Auto,
        }
    }

    pub fn with_moduli(mut self, moduli: Vec<u64>) -> Self {
        self.moduli = moduli;
        self
    }

    pub fn with_engine(mut self, engine: Engine) -> Self {
        self.engine = engine;
        self
    }

    pub fn with_dominance_only(mut self, on: bool) -> Self {
        self.dominance_only = on;
        self
    }

    pub fn with_index_cap(mut self, cap: usize) -> Self {
        self.index_cap = cap;
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub engine: String,
    pub sunits: u64,
    pub index_entries: u64,
    pub pairs_total: u64,
    pub pairs_pruned_size: u64,
    pub pairs_pruned_residue: u64,
    pub pairs_examined: u64,
    pub solutions: u64,
    pub filtered_by_dominance: u64,
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub solutions: Vec<SolutionRecord>,
    pub stats: SearchStats,
}

/// All solutions with `0 <= m <= n <= nmax` and `|z_i| <= zmax`, canonical and sorted.
pub fn brute_solutions(inst: &ProblemInstance, nmax: u64, zmax: &BigUint) -> Result<Vec<SolutionRecord>> {
    Ok(search(inst, &SearchOptions::new(nmax, zmax.clone()))?.solutions)
}

/// Same set as [`brute_solutions`], by nested loops only.
pub fn naive_solutions(inst: &ProblemInstance, nmax: u64, zmax: &BigUint) -> Result<Vec<SolutionRecord>> {
    let opts = SearchOptions::new(nmax, zmax.clone()).with_engine(Engine::Naive);
    Ok(search(inst, &opts)?.solutions)
}

struct Units {
    list: Vec<SUnit>,
    values: Vec<i128>,
}

impl Units {
    fn new(s: &PrimeSet, zmax: &BigUint) -> Result<Self> {
        let list = enumerate_sunits(s, zmax);
        if list.len() > MAX_UNITS {
            return Err(Error::SearchLimits(format!(
                "{} S-units below Zmax exceed the limit {MAX_UNITS}",
                list.len()
            )));
        }
        let values = list
            .iter()
            .map(|u| u.value().to_i128().expect("bounded by Zmax"))
            .collect();
        Ok(Units { list, values })
    }

    fn len(&self) -> usize {
        self.values.len()
    }

    /// Position of `v` in canonical order, if it is a listed unit.
    fn position(&self, v: i128) -> Option<usize> {
        let key = (v.unsigned_abs(), v.signum());
        self.values
            .binary_search_by(|&u| (u.unsigned_abs(), u.signum()).cmp(&key))
            .ok()
    }
}

/// Nondecreasing index tuples of length `h` over `0..n`, in lexicographic order.
fn for_each_multiset(n: usize, h: usize, mut f: impl FnMut(&[usize])) {
    if h == 0 {
        f(&[]);
        return;
    }
    if n == 0 {
        return;
    }
    let mut idx = vec![0usize; h];
    loop {
        f(&idx);
        let mut pos = h;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            if idx[pos] + 1 < n {
                let v = idx[pos] + 1;
                idx[pos..].iter_mut().for_each(|i| *i = v);
                break;
            }
        }
    }
}

fn multiset_count(n: usize, h: usize) -> Option<usize> {
    // C(n + h - 1, h)
    let mut acc: u128 = 1;
    for i in 0..h as u128 {
        acc = acc * (n as u128 + i) / (i + 1);
        if acc > usize::MAX as u128 {
            return None;
        }
    }
    usize::try_from(acc).ok()
}

/// Sums of canonical `h`-tuples sorted by `(sum, first index)`.
struct SumIndex {
    h: usize,
    keys: Vec<(i128, u32)>,
    tuples: Vec<u32>,
}

impl SumIndex {
    fn build(units: &Units, h: usize) -> Self {
        let mut entries: Vec<(i128, u32, u32)> = Vec::new();
        let mut tuples: Vec<u32> = Vec::new();
        for_each_multiset(units.len(), h, |idx| {
            let sum: i128 = idx.iter().map(|&i| units.values[i]).sum();
            let pos = (tuples.len() / h) as u32;
            tuples.extend(idx.iter().map(|&i| i as u32));
            entries.push((sum, idx[0] as u32, pos));
        });
        entries.sort_unstable();
        let mut sorted = Vec::with_capacity(tuples.len());
        let mut keys = Vec::with_capacity(entries.len());
        for (sum, first, pos) in entries {
            let p = pos as usize * h;
            sorted.extend_from_slice(&tuples[p..p + h]);
            keys.push((sum, first));
        }
        SumIndex {
            h,
            keys,
            tuples: sorted,
        }
    }

    /// Entries with the given sum whose first index is at least `min_first`.
    fn lookup(&self, sum: i128, min_first: u32) -> impl Iterator<Item = &[u32]> {
        let lo = self.keys.partition_point(|&k| k < (sum, min_first));
        let hi = self.keys.partition_point(|&k| k.0 <= sum);
        (lo..hi.max(lo)).map(move |i| &self.tuples[i * self.h..(i + 1) * self.h])
    }
}

fn smooth(mut v: u128, primes: &[u128]) -> bool {
    if v == 0 {
        return false;
    }
    for &p in primes {
        while v % p == 0 {
            v /= p;
        }
    }
    v == 1
}

struct Context<'a> {
    inst: &'a ProblemInstance,
    units: Units,
    terms: Vec<BigInt>,
    limit: BigInt,
    zmax: u128,
    primes: Vec<u128>,
    filter: Option<ResiduePrefilter>,
    /// `dominated[j]`: how many leading units are dominated by unit `j`.
    dominated: Vec<usize>,
}

/// Runs the search with explicit options and statistics.
pub fn search(inst: &ProblemInstance, opts: &SearchOptions) -> Result<SearchOutcome> {
    let r = inst.r;
    if r == 0 {
        return Err(Error::Domain("r must be positive".into()));
    }
    if opts.zmax.is_zero() {
        return Err(Error::Domain("Zmax must be at least 1".into()));
    }
    let total = BigUint::from(r) * &opts.zmax;
    if total.bits() > MAX_TOTAL_LOG2 {
        return Err(Error::SearchLimits(format!(
            "r * Zmax has {} bits; at most {MAX_TOTAL_LOG2} are supported",
            total.bits()
        )));
    }
    let units = Units::new(&inst.primes, &opts.zmax)?;
    let filter = if opts.moduli.is_empty() {
        None
    } else {
        Some(residue_prefilter(inst, &opts.moduli)?)
    };
    let primes = inst
        .primes
        .primes()
        .iter()
        .filter_map(|p| p.to_u128())
        .collect();
    let dominated = dominance_prefix(inst, &units);
    let ctx = Context {
        inst,
        dominated,
        terms: inst.rec.terms(opts.nmax),
        limit: BigInt::from(total),
        zmax: opts.zmax.to_u128().expect("checked above"),
        primes,
        units,
        filter,
    };

    let left = r / 2;
    let right = r - left;
    let index_size = multiset_count(ctx.units.len(), right);
    let use_mitm = match opts.engine {
        Engine::Naive => false,
        Engine::MeetInTheMiddle => true,
        Engine::Auto => index_size.is_some_and(|c| c <= opts.index_cap),
    };
    if use_mitm && index_size.map_or(true, |c| c > opts.index_cap) {
        return Err(Error::SearchLimits(format!(
            "sum index would exceed {} entries",
            opts.index_cap
        )));
    }
    let index = use_mitm.then(|| SumIndex::build(&ctx.units, right));

    let mut stats = SearchStats {
        engine: if use_mitm { "meet_in_the_middle" } else { "naive" }.into(),
        sunits: ctx.units.len() as u64,
        index_entries: index.as_ref().map_or(0, |ix| ix.keys.len() as u64),
        ..Default::default()
    };

    let per_n: Vec<(Vec<Vec<usize>>, Vec<(u64, BigInt)>, [u64; 4])> = (0..=opts.nmax)
        .into_par_iter()
        .map(|n| {
            let mut found = Vec::new();
            let mut pairs = Vec::new();
            let mut counts = [0u64; 4];
            for m in 0..=n {
                counts[0] += 1;
                let lhs = BigInt::from(inst.a.clone()) * &ctx.terms[n as usize]
                    + BigInt::from(inst.b.clone()) * &ctx.terms[m as usize];
                if lhs.abs() > ctx.limit {
                    counts[1] += 1;
                    continue;
                }
                if let Some(f) = &ctx.filter {
                    if !f.admits(n, m) {
                        counts[2] += 1;
                        continue;
                    }
                }
                counts[3] += 1;
                let target = lhs.to_i128().expect("bounded by r * Zmax");
                let before = found.len();
                match &index {
                    Some(ix) => ctx.mitm(ix, left, target, &mut found),
                    None => ctx.naive(target, &mut found),
                }
                pairs.extend(std::iter::repeat((m, lhs)).take(found.len() - before));
            }
            (found, pairs, counts)
        })
        .collect();

    let mut solutions = Vec::new();
    for (n, (found, pairs, counts)) in per_n.into_iter().enumerate() {
        stats.pairs_total += counts[0];
        stats.pairs_pruned_size += counts[1];
        stats.pairs_pruned_residue += counts[2];
        stats.pairs_examined += counts[3];
        for (idx, (m, lhs)) in found.into_iter().zip(pairs) {
            let rec = ctx.record(n as u64, m, lhs, &idx);
            if opts.dominance_only && !rec.satisfies_dominance {
                stats.filtered_by_dominance += 1;
                continue;
            }
            solutions.push(rec);
        }
    }
    solutions.sort_by(record_cmp);
    solutions.dedup();
    stats.solutions = solutions.len() as u64;
    Ok(SearchOutcome { solutions, stats })
}

fn record_cmp(x: &SolutionRecord, y: &SolutionRecord) -> Ordering {
    (x.n, x.m).cmp(&(y.n, y.m)).then_with(|| {
        x.summands
            .iter()
            .zip(&y.summands)
            .map(|(u, v)| u.key_cmp(v))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

impl Context<'_> {
    fn mitm(&self, ix: &SumIndex, left: usize, target: i128, out: &mut Vec<Vec<usize>>) {
        let vals = &self.units.values;
        for_each_multiset(self.units.len(), left, |l| {
            let partial: i128 = l.iter().map(|&i| vals[i]).sum();
            let min_first = l.last().copied().unwrap_or(0) as u32;
            for rt in ix.lookup(target - partial, min_first) {
                let mut t: Vec<usize> = l.to_vec();
                t.extend(rt.iter().map(|&i| i as usize));
                out.push(t);
            }
        });
    }

    fn naive(&self, target: i128, out: &mut Vec<Vec<usize>>) {
        let vals = &self.units.values;
        let r = self.inst.r;
        let check = |head: &[usize], out: &mut Vec<Vec<usize>>| {
            let rest = target - head.iter().map(|&i| vals[i]).sum::<i128>();
            let mag = rest.unsigned_abs();
            if mag > self.zmax || !smooth(mag, &self.primes) {
                return;
            }
            if let Some(&last) = head.last() {
                let prev = vals[last];
                let ord = mag.cmp(&prev.unsigned_abs()).then(rest.signum().cmp(&prev.signum()));
                if ord == Ordering::Less {
                    return;
                }
            }
            let pos = self.units.position(rest).expect("smooth and within Zmax");
            let mut t = head.to_vec();
            t.push(pos);
            out.push(t);
        };
        for_each_multiset(self.units.len(), r - 1, |head| check(head, out));
    }

    fn record(&self, n: u64, m: u64, lhs: BigInt, idx: &[usize]) -> SolutionRecord {
        let summands: Vec<SUnit> = idx.iter().map(|&i| self.units.list[i].clone()).collect();
        let (last, head) = idx.split_last().expect("r >= 1");
        let satisfies_dominance = head.last().map_or(true, |&h| h < self.dominated[*last]);
        let satisfies_size_hypothesis = lhs.abs() >= self.terms[n as usize].abs();
        SolutionRecord {
            n,
            m,
            summands,
            lhs_value: lhs,
            satisfies_dominance,
            satisfies_size_hypothesis,
        }
    }
}

fn dominance_prefix(inst: &ProblemInstance, units: &Units) -> Vec<usize> {
    let mags: Vec<BigUint> = units.list.iter().map(|u| u.magnitude()).collect();
    let mut p = 0;
    mags.iter()
        .map(|top| {
            while p < mags.len() && inst.eps.dominated(&mags[p], top, inst.strict_dominance) {
                p += 1;
            }
            p
        })
        .collect()
}

fn dominance_holds(inst: &ProblemInstance, summands: &[SUnit]) -> bool {
    let Some((last, head)) = summands.split_last() else {
        return false;
    };
    let top = last.magnitude();
    head.iter()
        .all(|z| inst.eps.dominated(&z.magnitude(), &top, inst.strict_dominance))
}

/// Exact re-check of a record: both sides, smoothness, order and flags.
pub fn verify_solution(inst: &ProblemInstance, rec: &SolutionRecord) -> bool {
    if rec.n < rec.m || rec.summands.len() != inst.r {
        return false;
    }
    if rec.summands.windows(2).any(|w| w[0].key_cmp(&w[1]) == Ordering::Greater) {
        return false;
    }
    for z in &rec.summands {
        match factor_over_s(z.value(), &inst.primes) {
            Ok(f) if f == *z => {}
            _ => return false,
        }
    }
    let un = inst.rec.term(rec.n);
    let um = inst.rec.term(rec.m);
    let lhs = BigInt::from(inst.a.clone()) * &un + BigInt::from(inst.b.clone()) * &um;
    let rhs: BigInt = rec.summands.iter().map(|z| z.value()).sum();
    lhs == rhs
        && lhs == rec.lhs_value
        && rec.satisfies_dominance == dominance_holds(inst, &rec.summands)
        && rec.satisfies_size_hypothesis == (lhs.abs() >= un.abs())
}

/// Residue tables for one modulus.
#[derive(Clone, Debug)]
struct ModTable {
    modulus: u64,
    preperiod: usize,
    /// `U_n mod M` for `n < preperiod + period`.
    residues: Vec<u64>,
    /// Residues of `a U_n + b U_m` compatible with some `r` S-units.
    reachable: Vec<bool>,
    a: u64,
    b: u64,
}

impl ModTable {
    fn residue(&self, n: u64) -> u64 {
        let n = n as usize;
        if n < self.residues.len() {
            return self.residues[n];
        }
        let period = self.residues.len() - self.preperiod;
        self.residues[self.preperiod + (n - self.preperiod) % period]
    }

    fn admits(&self, n: u64, m: u64) -> bool {
        let v = (self.a as u128 * self.residue(n) as u128 + self.b as u128 * self.residue(m) as u128)
            % self.modulus as u128;
        self.reachable[v as usize]
    }
}

/// Sound modular sieve over `(n, m)`: rejects a pair only when no choice of
/// signs and exponents makes `a U_n + b U_m` a sum of `r` S-units modulo some `M`.
#[derive(Clone, Debug)]
pub struct ResiduePrefilter {
    tables: Vec<ModTable>,
}

impl ResiduePrefilter {
    pub fn admits(&self, n: u64, m: u64) -> bool {
        self.tables.iter().all(|t| t.admits(n, m))
    }

    pub fn moduli(&self) -> Vec<u64> {
        self.tables.iter().map(|t| t.modulus).collect()
    }

    /// Residues mod `M` reachable as a sum of `r` S-units.
    pub fn reachable(&self, modulus: u64) -> Option<Vec<u64>> {
        let t = self.tables.iter().find(|t| t.modulus == modulus)?;
        Some((0..modulus).filter(|&v| t.reachable[v as usize]).collect())
    }

    /// `(preperiod, period)` of `U_n mod M`.
    pub fn period(&self, modulus: u64) -> Option<(usize, usize)> {
        let t = self.tables.iter().find(|t| t.modulus == modulus)?;
        Some((t.preperiod, t.residues.len() - t.preperiod))
    }
}

pub fn residue_prefilter(inst: &ProblemInstance, moduli: &[u64]) -> Result<ResiduePrefilter> {
    for (i, &m) in moduli.iter().enumerate() {
        if m <= 1 {
            return Err(Error::Domain(format!("modulus {m} is useless; use M >= 2")));
        }
        if m > MAX_MODULUS {
            return Err(Error::SearchLimits(format!("modulus {m} exceeds {MAX_MODULUS}")));
        }
        if let Some(&q) = moduli[..i].iter().find(|&&q| q.gcd(&m) != 1) {
            return Err(Error::Domain(format!("moduli {q} and {m} are not coprime")));
        }
    }
    let tables = moduli
        .iter()
        .map(|&m| mod_table(inst, m))
        .collect::<Result<Vec<_>>>()?;
    Ok(ResiduePrefilter { tables })
}

fn reduce(x: &BigInt, m: u64) -> u64 {
    x.mod_floor(&BigInt::from(m)).to_u64().expect("reduced")
}

fn mod_table(inst: &ProblemInstance, modulus: u64) -> Result<ModTable> {
    let k = inst.rec.order();
    let coeffs: Vec<u64> = inst.rec.coefficients().iter().map(|c| reduce(c, modulus)).collect();
    let mut state: Vec<u64> = inst.rec.initials().iter().map(|c| reduce(c, modulus)).collect();
    let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut residues = Vec::new();
    let preperiod = loop {
        if let Some(&start) = seen.get(&state) {
            break start;
        }
        if seen.len() >= MAX_PERIOD_STATES {
            return Err(Error::SearchLimits(format!(
                "no period of U_n mod {modulus} within {MAX_PERIOD_STATES} steps"
            )));
        }
        seen.insert(state.clone(), residues.len());
        residues.push(state[0]);
        let next = (0..k).fold(0u128, |acc, j| {
            (acc + coeffs[j] as u128 * state[k - 1 - j] as u128) % modulus as u128
        }) as u64;
        state.rotate_left(1);
        state[k - 1] = next;
    };

    let units = unit_residues(&inst.primes, modulus);
    let mut reachable = vec![false; modulus as usize];
    reachable[0] = true;
    for _ in 0..inst.r {
        reachable = sumset(&reachable, &units);
    }
    Ok(ModTable {
        modulus,
        preperiod,
        residues,
        reachable,
        a: reduce(&BigInt::from(inst.a.clone()), modulus),
        b: reduce(&BigInt::from(inst.b.clone()), modulus),
    })
}

/// `{± prod p_i^{e_i} mod M : e_i >= 0}`.
fn unit_residues(s: &PrimeSet, modulus: u64) -> Vec<u64> {
    let mut hit = vec![false; modulus as usize];
    let one = 1 % modulus;
    hit[one as usize] = true;
    let mut stack = vec![one];
    let gens: Vec<u64> = s
        .primes()
        .iter()
        .map(|p| (p % BigUint::from(modulus)).to_u64().expect("reduced"))
        .collect();
    while let Some(x) = stack.pop() {
        for &g in &gens {
            let y = ((x as u128 * g as u128) % modulus as u128) as u64;
            if !hit[y as usize] {
                hit[y as usize] = true;
                stack.push(y);
            }
        }
    }
    let mut out: Vec<u64> = Vec::new();
    for x in 0..modulus {
        let neg = (modulus - x) % modulus;
        if hit[x as usize] || hit[neg as usize] {
            out.push(x);
        }
    }
    out
}

fn sumset(set: &[bool], add: &[u64]) -> Vec<bool> {
    let m = set.len();
    let mut out = vec![false; m];
    let mut left = m;
    for (x, _) in set.iter().enumerate().filter(|(_, &b)| b) {
        for &u in add {
            let y = (x + u as usize) % m;
            if !out[y] {
                out[y] = true;
                left -= 1;
                if left == 0 {
                    return out;
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recurrence::LinearRecurrence;
    use crate::sunits::Epsilon;
    use num_traits::One;

    fn inst(c: &[i64], u: &[i64], s: &[u64], a: u64, b: u64, r: usize) -> ProblemInstance {
        ProblemInstance::new(
            LinearRecurrence::from_i64(c, u).unwrap(),
            PrimeSet::from_u64(s).unwrap(),
            BigUint::from(a),
            BigUint::from(b),
            r,
            Epsilon::from_ratio(1, 1).unwrap(),
        )
        .unwrap()
    }

    fn fib(s: &[u64], r: usize) -> ProblemInstance {
        inst(&[1, 1], &[0, 1], s, 1, 1, r)
    }

    fn vals(rec: &SolutionRecord) -> Vec<i64> {
        rec.summands.iter().map(|z| z.value().to_i64().unwrap()).collect()
    }

    #[test]
    fn fibonacci_powers_of_two() {
        let p = fib(&[2], 1);
        let got = brute_solutions(&p, 30, &BigUint::from(1u64 << 30)).unwrap();
        // F_n + F_m = +-2^k
        let f = p.rec.terms(30);
        let mut want = Vec::new();
        for n in 0..=30usize {
            for m in 0..=n {
                let v = (&f[n] + &f[m]).to_i64().unwrap();
                if v > 0 && (v as u64).is_power_of_two() {
                    want.push((n as u64, m as u64, v));
                }
            }
        }
        let got: Vec<(u64, u64, i64)> = got.iter().map(|r| (r.n, r.m, vals(r)[0])).collect();
        assert_eq!(got, want);
        assert!(got.contains(&(1, 1, 2)));
        assert!(got.contains(&(6, 0, 8)));
    }

    #[test]
    fn engines_agree() {
        for (c, u) in [(&[1i64, 1][..], &[0i64, 1][..]), (&[2, 1], &[0, 1]), (&[1, 1, 1], &[0, 0, 1])] {
            for s in [&[2u64][..], &[2, 3], &[2, 3, 5]] {
                for r in 1..=3 {
                    let p = inst(c, u, s, 1, 1, r);
                    let z = BigUint::from(1u64 << 10);
                    let a = brute_solutions(&p, 25, &z).unwrap();
                    let b = naive_solutions(&p, 25, &z).unwrap();
                    assert_eq!(a, b, "{c:?} {s:?} r={r}");
                    assert!(a.iter().all(|x| verify_solution(&p, x)));
                }
            }
        }
    }

    #[test]
    fn zmax_one() {
        let p = fib(&[2, 3], 1);
        let got = brute_solutions(&p, 20, &BigUint::one()).unwrap();
        let f = p.rec.terms(20);
        for rec in &got {
            assert_eq!(vals(rec)[0].abs(), 1);
        }
        let count = (0..=20usize)
            .flat_map(|n| (0..=n).map(move |m| (n, m)))
            .filter(|&(n, m)| (&f[n] + &f[m]).abs().is_one())
            .count();
        assert_eq!(got.len(), count);
    }

    #[test]
    fn mersenne_family() {
        // U_n = 2^n - 1, U_n + U_m = 2^n + 2^m + (-2)
        let p = inst(&[3, -2], &[0, 1], &[2], 1, 1, 3);
        let got = brute_solutions(&p, 20, &BigUint::from(1u64 << 21)).unwrap();
        for n in 1..=20u64 {
            for m in 1..n {
                let mut want = vec![-2i64, 1 << m, 1 << n];
                want.sort_by_key(|v| (v.abs(), v.signum()));
                assert!(
                    got.iter().any(|r| r.n == n && r.m == m && vals(r) == want),
                    "missing ({n}, {m})"
                );
            }
        }
        assert_eq!(got, naive_solutions(&p, 20, &BigUint::from(1u64 << 21)).unwrap());
    }

    #[test]
    fn verify_rejects_tampering() {
        let p = fib(&[2, 3], 2);
        let sols = brute_solutions(&p, 15, &BigUint::from(500u32)).unwrap();
        let rec = sols.iter().find(|r| vals(r)[0] != vals(r)[1] && r.summands[1].exponents().iter().any(|&e| e > 0)).unwrap();
        assert!(verify_solution(&p, rec));
        let mut bumped = rec.clone();
        let z = &rec.summands[1];
        let mut e = z.exponents().to_vec();
        e[0] += 1;
        bumped.summands[1] = SUnit::from_exponents(z.sign(), e, &p.primes).unwrap();
        assert!(!verify_solution(&p, &bumped));
        let mut swapped = rec.clone();
        swapped.summands.swap(0, 1);
        assert!(!verify_solution(&p, &swapped));
        let line = rec.to_json_line();
        assert_eq!(&SolutionRecord::parse_json_line(&line, &p.primes).unwrap(), rec);
    }

    #[test]
    fn residue_sets() {
        let p = fib(&[2], 1);
        let f = residue_prefilter(&p, &[7, 5]).unwrap();
        assert_eq!(f.reachable(7).unwrap(), vec![1, 2, 3, 4, 5, 6]);
        assert_eq!(f.reachable(5).unwrap(), vec![1, 2, 3, 4]);
        // Pisano periods
        assert_eq!(f.period(7), Some((0, 16)));
        assert_eq!(f.period(5), Some((0, 20)));
        // F_5 + F_0 = 5
        assert!(!f.admits(5, 0));
        assert!(residue_prefilter(&p, &[1]).is_err());
        assert!(residue_prefilter(&p, &[6, 4]).is_err());
        let two = residue_prefilter(&fib(&[2], 2), &[5]).unwrap();
        assert_eq!(two.reachable(5).unwrap(), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn prefilter_is_sound() {
        for r in 1..=2 {
            let p = fib(&[2, 3], r);
            let z = BigUint::from(1u64 << 12);
            let plain = search(&p, &SearchOptions::new(40, z.clone())).unwrap();
            let sieved = search(&p, &SearchOptions::new(40, z).with_moduli(vec![5, 7, 11, 13])).unwrap();
            assert_eq!(plain.solutions, sieved.solutions);
            if r == 1 {
                assert!(sieved.stats.pairs_pruned_residue > 0);
            }
        }
    }

    #[test]
    fn dominance_filter_and_monotonicity() {
        let p = fib(&[2, 3], 2);
        let z = BigUint::from(1u64 << 12);
        let all = search(&p, &SearchOptions::new(30, z.clone())).unwrap();
        let dom = search(&p, &SearchOptions::new(30, z.clone()).with_dominance_only(true)).unwrap();
        let kept: Vec<_> = all.solutions.iter().filter(|r| r.satisfies_dominance).cloned().collect();
        assert_eq!(dom.solutions, kept);
        assert!(dom.stats.filtered_by_dominance > 0);
        let bigger = brute_solutions(&p, 35, &(z * 4u32)).unwrap();
        assert!(all.solutions.iter().all(|r| bigger.contains(r)));
    }

    #[test]
    fn limits() {
        let p = fib(&[2, 3], 3);
        let opts = SearchOptions::new(10, BigUint::from(1u64 << 20))
            .with_index_cap(10)
            .with_engine(Engine::MeetInTheMiddle);
        assert!(matches!(search(&p, &opts), Err(Error::SearchLimits(_))));
        let auto = search(&p, &SearchOptions::new(10, BigUint::from(1u64 << 8)).with_index_cap(10)).unwrap();
        assert_eq!(auto.stats.engine, "naive");
        assert!(search(&p, &SearchOptions::new(10, BigUint::one() << 130u32)).is_err());
    }
}
