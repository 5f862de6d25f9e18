//! Exact base-`s` entropies of coordinate tuples of `X` drawn uniformly from
//! `Fix(P)`, and an audit of the entropy inequalities that hold for every
//! non-trivial protocol on a cycle.
//!
//! All quantities are computed from integer multiplicities; floating point
//! only enters at the final logarithm.

use std::cell::RefCell;
use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::colour::{Cycle, ColourSpace};
use crate::error::{Error, Result};
use crate::protocol::{enumerate_fixed_set, FixedSet, Protocol};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Windows are checked exhaustively up to this cycle length, sampled beyond.
pub const EXHAUSTIVE_AUDIT_MAX_N: usize = 9;
pub const SAMPLED_WINDOWS: usize = 1000;

/// Base-`base` entropy of a distribution given by integer counts summing to `total`.
/// Zero counts contribute nothing.
pub fn entropy_from_counts<I>(counts: I, total: u64, base: f64) -> f64
where
    I: IntoIterator<Item = u64>,
{
    if total == 0 {
        return 0.0;
    }
    let total_f = total as f64;
    let weighted: f64 = counts
        .into_iter()
        .filter(|&c| c > 0)
        .map(|c| c as f64 * (c as f64).ln())
        .sum();
    let h = (total_f.ln() - weighted / total_f) / base.ln();
    // exact-zero cases can come out as -1e-17
    if h.abs() < 1e-15 {
        0.0
    } else {
        h
    }
}

/// Base-`base` entropy of a probability vector.
pub fn entropy_of_probabilities(probs: &[f64], base: f64) -> f64 {
    -probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
        / base.ln()
}

/// The uniform distribution over a non-empty fixed set.
#[derive(Debug)]
pub struct EmpiricalDistribution<'a> {
    fixed: &'a FixedSet,
    cycle: Cycle,
    cache: RefCell<HashMap<u64, f64>>,
}

impl<'a> EmpiricalDistribution<'a> {
    pub fn new(fixed: &'a FixedSet) -> Result<Self> {
        if fixed.is_empty() {
            return Err(Error::TrivialProtocol);
        }
        if fixed.n() > 64 {
            return Err(Error::Invalid("entropy bookkeeping supports n <= 64".into()));
        }
        Ok(EmpiricalDistribution {
            fixed,
            cycle: Cycle::new(fixed.n())?,
            cache: RefCell::new(HashMap::new()),
        })
    }

    pub fn n(&self) -> usize {
        self.fixed.n()
    }

    pub fn space(&self) -> ColourSpace {
        self.fixed.space()
    }

    pub fn support_size(&self) -> usize {
        self.fixed.count()
    }

    fn mask_of(&self, indices: &[usize]) -> Result<u64> {
        let n = self.n();
        let mut mask = 0u64;
        for &i in indices {
            if i == 0 || i > n {
                return Err(Error::OutOfRange {
                    what: "vertex index",
                    value: i as u64,
                    bound: n as u64 + 1,
                });
            }
            mask |= 1 << (i - 1);
        }
        Ok(mask)
    }

    /// Mask of 1-based indices taken modulo `n`.
    fn mask_wrapped(&self, indices: impl IntoIterator<Item = i64>) -> u64 {
        indices
            .into_iter()
            .fold(0u64, |m, i| m | 1 << self.cycle.wrap0(i))
    }

    /// `H(X_{i_1}, X_{i_2}, ...)`, 1-based indices, duplicates collapsed.
    pub fn joint_entropy(&self, indices: &[usize]) -> Result<f64> {
        Ok(self.entropy_of_mask(self.mask_of(indices)?))
    }

    pub(crate) fn entropy_of_mask(&self, mask: u64) -> f64 {
        if mask == 0 {
            return 0.0;
        }
        if let Some(&h) = self.cache.borrow().get(&mask) {
            return h;
        }
        let h = self.compute_entropy(mask);
        self.cache.borrow_mut().insert(mask, h);
        h
    }

    fn compute_entropy(&self, mask: u64) -> f64 {
        let s = self.space().s();
        let coords: Vec<usize> = (0..self.n()).filter(|i| mask >> i & 1 == 1).collect();
        // s <= 2^32 and up to 64 coordinates: fold into u128 when it fits, else use vectors
        let bits_per = 32 - (s - 1).leading_zeros();
        let total = self.support_size() as u64;
        let base = s as f64;
        if coords.len() as u32 * bits_per.max(1) <= 128 {
            let mut keys: Vec<u128> = self
                .fixed
                .members()
                .map(|m| coords.iter().fold(0u128, |acc, &i| acc * s as u128 + m[i] as u128))
                .collect();
            keys.sort_unstable();
            entropy_from_counts(run_lengths(&keys), total, base)
        } else {
            let mut keys: Vec<Vec<u32>> = self
                .fixed
                .members()
                .map(|m| coords.iter().map(|&i| m[i]).collect())
                .collect();
            keys.sort_unstable();
            entropy_from_counts(run_lengths(&keys), total, base)
        }
    }

    /// `H(X)`, which equals `log_s fix(P)`.
    pub fn total_entropy(&self) -> f64 {
        self.entropy_of_mask(full_mask(self.n()))
    }

    /// `I(X_I; X_J) = H(I) + H(J) - H(I, J)`.
    pub fn mutual_information(&self, left: &[usize], right: &[usize]) -> Result<f64> {
        let (a, b) = (self.mask_of(left)?, self.mask_of(right)?);
        Ok(self.mi_masks(a, b, 0))
    }

    /// `I(X_I; X_J | X_B) = H(I, B) + H(J, B) - H(I, J, B) - H(B)`.
    pub fn conditional_mutual_information(
        &self,
        left: &[usize],
        right: &[usize],
        given: &[usize],
    ) -> Result<f64> {
        let (a, b, c) = (self.mask_of(left)?, self.mask_of(right)?, self.mask_of(given)?);
        Ok(self.mi_masks(a, b, c))
    }

    fn mi_masks(&self, a: u64, b: u64, given: u64) -> f64 {
        self.entropy_of_mask(a | given) + self.entropy_of_mask(b | given)
            - self.entropy_of_mask(a | b | given)
            - self.entropy_of_mask(given)
    }

    /// `H_j^k = h(j, ..., k-1) + h(j+1, ..., k)` for `1 <= j < k <= n`.
    pub fn h_range(&self, j: usize, k: usize) -> Result<f64> {
        if !(1 <= j && j < k && k <= self.n()) {
            return Err(Error::IndexOrder(format!(
                "1 <= j < k <= {} (got j={j}, k={k})",
                self.n()
            )));
        }
        Ok(self.h_window(j as i64, k as i64))
    }

    /// `H_j^k` with indices taken modulo `n` (so windows may wrap).
    fn h_window(&self, j: i64, k: i64) -> f64 {
        self.entropy_of_mask(self.mask_wrapped(j..k)) + self.entropy_of_mask(self.mask_wrapped(j + 1..=k))
    }

    /// `h` of explicit 1-based indices modulo `n`.
    fn hw(&self, indices: &[i64]) -> f64 {
        self.entropy_of_mask(self.mask_wrapped(indices.iter().copied()))
    }
}

fn run_lengths<T: PartialEq>(sorted: &[T]) -> impl Iterator<Item = u64> + '_ {
    let mut start = 0;
    std::iter::from_fn(move || {
        if start >= sorted.len() {
            return None;
        }
        let mut end = start + 1;
        while end < sorted.len() && sorted[end] == sorted[start] {
            end += 1;
        }
        let len = (end - start) as u64;
        start = end;
        Some(len)
    })
}

fn full_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    /// `lhs <= rhs`
    Le,
    /// `lhs == rhs`
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityRecord {
    pub name: String,
    pub family: &'static str,
    pub relation: Relation,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs` for `<=`, `-|lhs - rhs|` for `==`.
    pub slack: f64,
    pub verdict: Verdict,
}

impl InequalityRecord {
    fn new(name: String, family: &'static str, relation: Relation, lhs: f64, rhs: f64, tol: f64) -> Self {
        let slack = match relation {
            Relation::Le => rhs - lhs,
            Relation::Eq => -(lhs - rhs).abs(),
        };
        let verdict = if slack >= -tol { Verdict::Pass } else { Verdict::Fail };
        InequalityRecord {
            name,
            family,
            relation,
            lhs,
            rhs,
            slack,
            verdict,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilySummary {
    pub family: &'static str,
    pub checked: usize,
    pub failed: usize,
    pub min_slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HRangeValue {
    pub j: usize,
    pub k: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyReport {
    pub n: usize,
    pub s: u32,
    pub fix: usize,
    pub log_fix: f64,
    pub total_entropy: f64,
    pub tolerance: f64,
    pub exhaustive: bool,
    /// `h(i)` for `i = 1..=n`.
    pub per_index: Vec<f64>,
    /// `H_1^k` for every `k`, plus `H_j^n` for every `j`.
    pub h_ranges: Vec<HRangeValue>,
    pub families: Vec<FamilySummary>,
    pub records: Vec<InequalityRecord>,
}

impl EntropyReport {
    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.verdict == Verdict::Pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &InequalityRecord> {
        self.records.iter().filter(|r| r.verdict == Verdict::Fail)
    }

    pub fn min_slack(&self) -> f64 {
        self.records.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min)
    }

    pub fn family(&self, name: &str) -> Option<&FamilySummary> {
        self.families.iter().find(|f| f.family == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditOptions {
    pub tolerance: f64,
    pub enumeration_budget: u64,
    pub seed: u64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions {
            tolerance: DEFAULT_TOLERANCE,
            enumeration_budget: crate::protocol::DEFAULT_ENUMERATION_BUDGET,
            seed: 0,
        }
    }
}

/// Enumerates `Fix(p)` and audits it. See [`audit_fixed_set`].
pub fn audit_lemmas(p: &Protocol, opts: &AuditOptions) -> Result<EntropyReport> {
    let fixed = enumerate_fixed_set(p, opts.enumeration_budget)?;
    audit_fixed_set(&fixed, opts)
}

/// Checks, with recorded slack, the following families on `X` uniform over `fixed`:
///
/// * `determinism`: `h(S) = h(S \ {i})` whenever `S` holds `i - 1, i, i + 1`
/// * `marginal`: `h(i) <= 1`
/// * `uniform-total`: `H(X) = log_s fix(P)`
/// * `split`: `H_i^k <= H_i^j + H_{j+1}^k` for `i < j`, `j + 1 < k`
/// * `marginal-sum`: `H_j^k <= h(j) + ... + h(k)` for `k >= j + 3`
/// * `full-range`: `H_1^n = 2 H(X)`
/// * `partition`: `2 H(X) <= H_{d1}^{d2} + H_{d2+1}^{d3} + ...` over gap-2 partitions of `1..n`
/// * `five-window` plus its six component steps, on every cyclic window of five vertices
pub fn audit_fixed_set(fixed: &FixedSet, opts: &AuditOptions) -> Result<EntropyReport> {
    let d = EmpiricalDistribution::new(fixed)?;
    let n = d.n();
    let tol = opts.tolerance;
    let exhaustive = n <= EXHAUSTIVE_AUDIT_MAX_N;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut records = Vec::new();
    let mut push = |name: String, family: &'static str, rel: Relation, lhs: f64, rhs: f64| {
        records.push(InequalityRecord::new(name, family, rel, lhs, rhs, tol));
    };

    let total = d.total_entropy();
    let log_fix = (fixed.count() as f64).ln() / (d.space().s() as f64).ln();
    push("H(X) = log_s fix".into(), "uniform-total", Relation::Eq, total, log_fix);

    let per_index: Vec<f64> = (1..=n).map(|i| d.hw(&[i as i64])).collect();
    for (k, &h) in per_index.iter().enumerate() {
        push(format!("h({}) <= 1", k + 1), "marginal", Relation::Le, h, 1.0);
    }

    // determinism: dropping a vertex whose two neighbours are present
    for i0 in 0..n {
        let core = 1u64 << i0 | 1 << ((i0 + n - 1) % n) | 1 << ((i0 + 1) % n);
        let others: Vec<usize> = (0..n).filter(|&v| core >> v & 1 == 0).collect();
        let extras: Vec<u64> = if exhaustive {
            (0..1u64 << others.len())
                .map(|bits| spread(bits, &others))
                .collect()
        } else {
            (0..SAMPLED_WINDOWS / n.max(1) + 1)
                .map(|_| spread(rng.gen::<u64>() & full_mask(others.len()), &others))
                .collect()
        };
        for extra in extras {
            let with = core | extra;
            let without = with & !(1 << i0);
            push(
                format!("h({}) = h({})", mask_label(with), mask_label(without)),
                "determinism",
                Relation::Eq,
                d.entropy_of_mask(with),
                d.entropy_of_mask(without),
            );
        }
    }

    // split: H_i^k <= H_i^j + H_{j+1}^k
    let mut triples = Vec::new();
    for i in 1..=n {
        for j in i + 1..=n {
            for k in j + 2..=n {
                triples.push((i, j, k));
            }
        }
    }
    for (i, j, k) in sample(triples, exhaustive, &mut rng) {
        push(
            format!("H_{i}^{k} <= H_{i}^{j} + H_{}^{k}", j + 1),
            "split",
            Relation::Le,
            d.h_window(i as i64, k as i64),
            d.h_window(i as i64, j as i64) + d.h_window(j as i64 + 1, k as i64),
        );
    }

    // marginal-sum: H_j^k <= sum h(i)
    let mut pairs = Vec::new();
    for j in 1..=n {
        for k in j + 3..=n {
            pairs.push((j, k));
        }
    }
    for (j, k) in sample(pairs, exhaustive, &mut rng) {
        push(
            format!("H_{j}^{k} <= sum h({j}..{k})"),
            "marginal-sum",
            Relation::Le,
            d.h_window(j as i64, k as i64),
            per_index[j - 1..k].iter().sum(),
        );
    }

    push(
        format!("H_1^{n} = 2 H(X)"),
        "full-range",
        Relation::Eq,
        d.h_window(1, n as i64),
        2.0 * total,
    );

    // partition: sequences 1 = d1 < d2 < ... < dk = n with gaps of at least 2
    let partitions = gap_two_partitions(n);
    for seq in sample(partitions, exhaustive, &mut rng) {
        let mut sum = d.h_window(seq[0] as i64, seq[1] as i64);
        for w in seq[1..].windows(2) {
            sum += d.h_window(w[0] as i64 + 1, w[1] as i64);
        }
        let label: Vec<String> = seq.iter().map(usize::to_string).collect();
        push(
            format!("2 H(X) <= segments [{}]", label.join(",")),
            "partition",
            Relation::Le,
            2.0 * total,
            sum,
        );
    }

    // five-vertex windows, cyclic
    if n >= 5 {
        let starts: Vec<i64> = (1..=n as i64).collect();
        for j in sample(starts, exhaustive, &mut rng) {
            let v = |o: i64| j + o;
            let (x1, x2, x3, x4, x5) = (v(0), v(1), v(2), v(3), v(4));
            let cmi = d.hw(&[x2, x3]) + d.hw(&[x3, x4]) - d.hw(&[x2, x3, x4]) - d.hw(&[x3]);
            let h_15 = d.h_window(x1, x5);
            let label = |k: i64| (d.cycle.wrap0(k) + 1).to_string();
            let tag = format!("[{}..{}]", label(x1), label(x5));
            push(
                format!("H_j^(j+4) <= 3 + h(j+1,j+3) - I {tag}"),
                "five-window",
                Relation::Le,
                h_15,
                3.0 + d.hw(&[x2, x4]) - cmi,
            );
            push(
                format!("H_j^(j+4) <= h(j)+h(j+2)+h(j+4)+h(j+1,j+3) - I {tag}"),
                "five-window",
                Relation::Le,
                h_15,
                d.hw(&[x1]) + d.hw(&[x3]) + d.hw(&[x5]) + d.hw(&[x2, x4]) - cmi,
            );
            push(
                format!("h(234)+h(3) = h(23)+h(34)-I {tag}"),
                "five-window-steps",
                Relation::Eq,
                d.hw(&[x2, x3, x4]) + d.hw(&[x3]),
                d.hw(&[x2, x3]) + d.hw(&[x3, x4]) - cmi,
            );
            push(
                format!("h(1234)+h(23) <= h(123)+h(234) {tag}"),
                "five-window-steps",
                Relation::Le,
                d.hw(&[x1, x2, x3, x4]) + d.hw(&[x2, x3]),
                d.hw(&[x1, x2, x3]) + d.hw(&[x2, x3, x4]),
            );
            push(
                format!("h(2345)+h(34) <= h(234)+h(345) {tag}"),
                "five-window-steps",
                Relation::Le,
                d.hw(&[x2, x3, x4, x5]) + d.hw(&[x3, x4]),
                d.hw(&[x2, x3, x4]) + d.hw(&[x3, x4, x5]),
            );
            push(
                format!("h(123) = h(13) {tag}"),
                "five-window-steps",
                Relation::Eq,
                d.hw(&[x1, x2, x3]),
                d.hw(&[x1, x3]),
            );
            push(
                format!("h(13) <= h(1)+h(3) {tag}"),
                "five-window-steps",
                Relation::Le,
                d.hw(&[x1, x3]),
                d.hw(&[x1]) + d.hw(&[x3]),
            );
            push(
                format!("h(234) = h(24) {tag}"),
                "five-window-steps",
                Relation::Eq,
                d.hw(&[x2, x3, x4]),
                d.hw(&[x2, x4]),
            );
            push(
                format!("h(345) = h(35) {tag}"),
                "five-window-steps",
                Relation::Eq,
                d.hw(&[x3, x4, x5]),
                d.hw(&[x3, x5]),
            );
            push(
                format!("h(35) <= h(3)+h(5) {tag}"),
                "five-window-steps",
                Relation::Le,
                d.hw(&[x3, x5]),
                d.hw(&[x3]) + d.hw(&[x5]),
            );
            push(
                format!("I(X_j+1; X_j+3 | X_j+2) >= 0 {tag}"),
                "five-window-steps",
                Relation::Le,
                0.0,
                cmi,
            );
        }
    }

    let mut h_ranges: Vec<HRangeValue> = (2..=n)
        .map(|k| HRangeValue { j: 1, k, value: d.h_window(1, k as i64) })
        .collect();
    h_ranges.extend((2..n).map(|j| HRangeValue { j, k: n, value: d.h_window(j as i64, n as i64) }));

    let mut families: Vec<FamilySummary> = Vec::new();
    for r in &records {
        match families.iter_mut().find(|f| f.family == r.family) {
            Some(f) => {
                f.checked += 1;
                f.failed += (r.verdict == Verdict::Fail) as usize;
                f.min_slack = f.min_slack.min(r.slack);
            }
            None => families.push(FamilySummary {
                family: r.family,
                checked: 1,
                failed: (r.verdict == Verdict::Fail) as usize,
                min_slack: r.slack,
            }),
        }
    }

    Ok(EntropyReport {
        n,
        s: d.space().s(),
        fix: fixed.count(),
        log_fix,
        total_entropy: total,
        tolerance: tol,
        exhaustive,
        per_index,
        h_ranges,
        families,
        records,
    })
}

/// Places the low bits of `bits` onto the vertex positions in `slots`.
fn spread(bits: u64, slots: &[usize]) -> u64 {
    slots
        .iter()
        .enumerate()
        .filter(|(k, _)| bits >> k & 1 == 1)
        .fold(0u64, |m, (_, &v)| m | 1 << v)
}

fn mask_label(mask: u64) -> String {
    (0..64)
        .filter(|i| mask >> i & 1 == 1)
        .map(|i| (i + 1).to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn sample<T: Clone>(items: Vec<T>, exhaustive: bool, rng: &mut ChaCha8Rng) -> Vec<T> {
    if exhaustive || items.len() <= SAMPLED_WINDOWS {
        return items;
    }
    (0..SAMPLED_WINDOWS)
        .map(|_| items[rng.gen_range(0..items.len())].clone())
        .collect()
}

/// All `1 = d1 < ... < dk = n`, `k >= 2`, with `d_{t+1} >= d_t + 2`.
pub(crate) fn gap_two_partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(cur: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        let last = *cur.last().unwrap();
        if last == n {
            if cur.len() >= 2 {
                out.push(cur.clone());
            }
            return;
        }
        // the first segment is H_{d1}^{d2}, later ones H_{d+1}^{d'}; both need a gap of 2
        for next in last + 2..=n {
            cur.push(next);
            go(cur, n, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n >= 3 {
        go(&mut vec![1], n, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colour::ColourSpace;
    use crate::protocol::{build_fcp, DEFAULT_ENUMERATION_BUDGET};

    const TOL: f64 = 1e-9;

    fn fix_of(p: &Protocol) -> FixedSet {
        enumerate_fixed_set(p, DEFAULT_ENUMERATION_BUDGET).unwrap()
    }

    /// Independent oracle: entropy by explicit probability map over projected tuples.
    fn oracle_entropy(fixed: &FixedSet, idx: &[usize]) -> f64 {
        let mut counts: HashMap<Vec<u32>, f64> = HashMap::new();
        for m in fixed.members() {
            *counts.entry(idx.iter().map(|&i| m[i - 1]).collect()).or_default() += 1.0;
        }
        let total = fixed.count() as f64;
        let s = fixed.space().s() as f64;
        counts.values().map(|c| -(c / total) * (c / total).log(s)).sum()
    }

    #[test]
    fn marginals_uniform_for_perfect_square() {
        let fixed = fix_of(&build_fcp(7, 4).unwrap());
        let d = EmpiricalDistribution::new(&fixed).unwrap();
        for i in 1..=7 {
            assert!((d.joint_entropy(&[i]).unwrap() - 1.0).abs() < TOL);
        }
    }

    #[test]
    fn constant_protocol_has_zero_entropy() {
        let p = Protocol::constant(ColourSpace::new(3).unwrap(), Cycle::new(5).unwrap(), 0).unwrap();
        let fixed = fix_of(&p);
        let d = EmpiricalDistribution::new(&fixed).unwrap();
        assert_eq!(d.joint_entropy(&[1, 2, 3]).unwrap(), 0.0);
        assert_eq!(d.mutual_information(&[1], &[3]).unwrap(), 0.0);
        assert_eq!(d.h_range(1, 4).unwrap(), 0.0);
    }

    #[test]
    fn total_entropy_is_log_fix() {
        let fixed = fix_of(&build_fcp(5, 6).unwrap());
        assert_eq!(fixed.count(), 72);
        let d = EmpiricalDistribution::new(&fixed).unwrap();
        let h = d.joint_entropy(&[1, 2, 3, 4, 5]).unwrap();
        assert!((h - 72f64.log(6.0)).abs() < TOL);
    }

    #[test]
    fn matches_independent_oracle() {
        let fixed = fix_of(&build_fcp(7, 6).unwrap());
        let d = EmpiricalDistribution::new(&fixed).unwrap();
        for idx in [vec![1], vec![2, 4], vec![1, 2, 3], vec![7, 1], vec![2, 3, 5, 6], vec![1, 2, 3, 4, 5, 6, 7]] {
            let got = d.joint_entropy(&idx).unwrap();
            assert!((got - oracle_entropy(&fixed, &idx)).abs() < 1e-12, "{idx:?}");
        }
    }

    #[test]
    fn conditional_mi_vanishes_on_fcp_interior() {
        let fixed = fix_of(&build_fcp(7, 4).unwrap());
        assert_eq!(fixed.count(), 128);
        let d = EmpiricalDistribution::new(&fixed).unwrap();
        let i = d.conditional_mutual_information(&[2], &[4], &[3]).unwrap();
        assert!(i.abs() < TOL, "{i}");
    }

    #[test]
    fn self_information_is_entropy() {
        let fixed = fix_of(&build_fcp(5, 3).unwrap());
        let d = EmpiricalDistribution::new(&fixed).unwrap();
        for i in 1..=5 {
            let mi = d.mutual_information(&[i], &[i]).unwrap();
            assert!((mi - d.joint_entropy(&[i]).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn h_range_values() {
        let fixed = fix_of(&build_fcp(7, 4).unwrap());
        let d = EmpiricalDistribution::new(&fixed).unwrap();
        assert!((d.h_range(1, 7).unwrap() - 7.0).abs() < TOL);
        let fixed = fix_of(&build_fcp(7, 6).unwrap());
        let d = EmpiricalDistribution::new(&fixed).unwrap();
        let expected = 2.0 * 432f64.log(6.0);
        assert!((d.h_range(1, 7).unwrap() - expected).abs() < TOL);
        assert!((expected - 6.774).abs() < 1e-3);
        assert!(d.h_range(3, 3).is_err());
        assert!(d.h_range(0, 3).is_err());
        assert!(d.h_range(2, 8).is_err());
    }

    #[test]
    fn rejects_empty_and_bad_indices() {
        // f_i = c_{i-1} + 1 on C_3 with s=2 has no fixed point
        let p = Protocol::from_fn(ColourSpace::new(2).unwrap(), Cycle::new(3).unwrap(), |_, l, _| 1 - l).unwrap();
        let fixed = fix_of(&p);
        assert!(fixed.is_empty());
        assert!(matches!(EmpiricalDistribution::new(&fixed), Err(Error::TrivialProtocol)));
        let fixed = fix_of(&build_fcp(5, 2).unwrap());
        let d = EmpiricalDistribution::new(&fixed).unwrap();
        assert!(d.joint_entropy(&[6]).is_err());
        assert!(d.joint_entropy(&[0]).is_err());
        // duplicates collapse
        assert_eq!(d.joint_entropy(&[2, 2]).unwrap(), d.joint_entropy(&[2]).unwrap());
    }

    #[test]
    fn partitions_small() {
        assert_eq!(gap_two_partitions(3), vec![vec![1, 3]]);
        assert_eq!(gap_two_partitions(5), vec![vec![1, 3, 5], vec![1, 5]]);
    }

    #[test]
    fn audit_fcp_7_6_passes() {
        let r = audit_lemmas(&build_fcp(7, 6).unwrap(), &AuditOptions::default()).unwrap();
        assert!(r.all_pass(), "{:?}", r.failures().next());
        assert!(r.exhaustive);
        for fam in ["uniform-total", "marginal", "determinism", "split", "marginal-sum", "full-range", "partition", "five-window", "five-window-steps"] {
            assert!(r.family(fam).map_or(0, |f| f.checked) > 0, "{fam}");
        }
    }

    #[test]
    fn audit_fcp_7_4_is_tight() {
        let r = audit_lemmas(&build_fcp(7, 4).unwrap(), &AuditOptions::default()).unwrap();
        assert!(r.all_pass());
        assert!(r.per_index.iter().all(|h| (h - 1.0).abs() < TOL));
        let full = r.h_ranges.iter().find(|h| h.j == 1 && h.k == 7).unwrap();
        assert!((full.value - 2.0 * r.total_entropy).abs() < TOL);
    }

    #[test]
    fn audit_rejects_trivial() {
        let p = Protocol::from_fn(ColourSpace::new(2).unwrap(), Cycle::new(3).unwrap(), |_, l, _| 1 - l).unwrap();
        assert_eq!(audit_lemmas(&p, &AuditOptions::default()), Err(Error::TrivialProtocol));
    }

    #[test]
    fn partition_inequality_can_be_strict() {
        // copy-left protocol: Fix = constant colourings
        let p = Protocol::from_fn(ColourSpace::new(2).unwrap(), Cycle::new(5).unwrap(), |_, l, _| l).unwrap();
        let r = audit_lemmas(&p, &AuditOptions::default()).unwrap();
        assert!(r.all_pass());
        let strict = r.records.iter().filter(|x| x.family == "partition").any(|x| x.slack > 0.5);
        assert!(strict);
    }
}
