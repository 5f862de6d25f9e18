//! Local functions `f: Z_s^2 -> Z_s` and their classification.
//!
//! * flat: every preimage has exactly `s` elements
//! * semi-perfect: flat, and `U_1`, `U_2` are conditionally independent given
//!   `f(U)` for `U` uniform on `Z_s^2`
//! * perfect: semi-perfect, and `|L(f, z)|`, `|R(f, z)|` do not depend on `z`
//!
//! [`compute_constants`] derives the uniformity radius `epsilon` and the
//! entropy gaps `delta_1`, `delta_2` for small `s`, with every intermediate
//! quantity recorded.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::colour::ColourSpace;
use crate::entropy::entropy_from_counts;
use crate::error::{Error, Result};

/// Conditional mutual information below this counts as zero.
pub const SEMI_PERFECT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalFunction {
    space: ColourSpace,
    table: Vec<u32>,
}

impl LocalFunction {
    /// Row-major `s x s` table: `table[x * s + y] = f(x, y)`.
    pub fn new(space: ColourSpace, table: Vec<u32>) -> Result<Self> {
        let s = space.s() as usize;
        if table.len() != s * s {
            return Err(Error::Dimension {
                expected: s * s,
                got: table.len(),
            });
        }
        if let Some(&bad) = table.iter().find(|&&z| z >= space.s()) {
            return Err(Error::OutOfRange {
                what: "function value",
                value: bad as u64,
                bound: space.s() as u64,
            });
        }
        Ok(LocalFunction { space, table })
    }

    pub fn from_fn(space: ColourSpace, f: impl Fn(u32, u32) -> u32) -> Result<Self> {
        let s = space.s();
        let table = (0..s).flat_map(|x| (0..s).map(move |y| (x, y))).map(|(x, y)| f(x, y)).collect();
        LocalFunction::new(space, table)
    }

    /// `x + y mod s`.
    pub fn sum_mod(space: ColourSpace) -> Self {
        let s = space.s();
        LocalFunction::from_fn(space, |x, y| (x + y) % s).expect("in range")
    }

    /// `f(x, y) = x`.
    pub fn left_projection(space: ColourSpace) -> Self {
        LocalFunction::from_fn(space, |x, _| x).expect("in range")
    }

    /// `f(x, y) = pi(phi(x), psi(y))`.
    pub fn coordinate_merge(space: ColourSpace) -> Self {
        LocalFunction::from_fn(space, |x, y| space.pi_of(space.phi_of(x), space.psi_of(y))).expect("in range")
    }

    pub fn space(&self) -> ColourSpace {
        self.space
    }

    pub fn table(&self) -> &[u32] {
        &self.table
    }

    #[inline]
    pub fn apply(&self, x: u32, y: u32) -> u32 {
        self.table[(x * self.space.s() + y) as usize]
    }

    /// `|f^{-1}(z)|` for every `z`.
    pub fn preimage_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.space.s() as usize];
        for &z in &self.table {
            sizes[z as usize] += 1;
        }
        sizes
    }

    /// `I(U_1; U_2 | f(U))` in base `s` for `U` uniform on `Z_s^2`.
    pub fn conditional_mi(&self) -> f64 {
        let s = self.space.s() as usize;
        let total = (s * s) as u64;
        let base = s as f64;
        let mut xz = vec![0u64; s * s];
        let mut yz = vec![0u64; s * s];
        let mut z_counts = vec![0u64; s];
        for x in 0..s {
            for y in 0..s {
                let z = self.table[x * s + y] as usize;
                xz[x * s + z] += 1;
                yz[y * s + z] += 1;
                z_counts[z] += 1;
            }
        }
        // (U_1, U_2, f(U)) is uniform over s^2 points
        let h_xyz = 2.0;
        let h_xz = entropy_from_counts(xz, total, base);
        let h_yz = entropy_from_counts(yz, total, base);
        let h_z = entropy_from_counts(z_counts, total, base);
        let i = h_xz + h_yz - h_xyz - h_z;
        if i.abs() < 1e-13 {
            0.0
        } else {
            i
        }
    }

    /// `L(f, z)` and `R(f, z)`, sorted.
    pub fn lr_sets(&self, z: u32) -> Result<(Vec<u32>, Vec<u32>)> {
        let s = self.space.s();
        if z >= s {
            return Err(Error::OutOfRange {
                what: "colour",
                value: z as u64,
                bound: s as u64,
            });
        }
        let mut left = BTreeSet::new();
        let mut right = BTreeSet::new();
        for x in 0..s {
            for y in 0..s {
                if self.apply(x, y) == z {
                    left.insert(x);
                    right.insert(y);
                }
            }
        }
        Ok((left.into_iter().collect(), right.into_iter().collect()))
    }

    /// True iff `f^{-1}(z) = L(f, z) x R(f, z)`.
    pub fn preimage_is_rectangle(&self, z: u32) -> Result<bool> {
        let (left, right) = self.lr_sets(z)?;
        let size = self.table.iter().filter(|&&v| v == z).count();
        // every preimage point lies in L x R, so equality is a cardinality check
        Ok(size == left.len() * right.len())
    }

    pub fn classify(&self) -> FunctionClass {
        let s = self.space.s();
        let preimage_sizes = self.preimage_sizes();
        let is_flat = preimage_sizes.iter().all(|&c| c == s as usize);
        let cond_mi = self.conditional_mi();
        let is_semi_perfect = is_flat && cond_mi.abs() <= SEMI_PERFECT_TOLERANCE;
        let (l_sizes, r_sizes): (Vec<usize>, Vec<usize>) = (0..s)
            .map(|z| {
                let (l, r) = self.lr_sets(z).expect("z < s");
                (l.len(), r.len())
            })
            .unzip();
        let constant = |v: &[usize]| v.windows(2).all(|w| w[0] == w[1]);
        let is_perfect = is_semi_perfect && constant(&l_sizes) && constant(&r_sizes);
        FunctionClass {
            is_flat,
            is_semi_perfect,
            is_perfect,
            cond_mi,
            preimage_sizes,
            l_sizes,
            r_sizes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionClass {
    pub is_flat: bool,
    pub is_semi_perfect: bool,
    pub is_perfect: bool,
    pub cond_mi: f64,
    pub preimage_sizes: Vec<usize>,
    pub l_sizes: Vec<usize>,
    pub r_sizes: Vec<usize>,
}

/// True iff `probs` has `k` outcomes, each within `eps` of `1/k`.
pub fn is_k_eps_uniform(probs: &[f64], k: usize, eps: f64) -> Result<bool> {
    if probs.len() != k || k == 0 {
        return Err(Error::Dimension {
            expected: k,
            got: probs.len(),
        });
    }
    let target = 1.0 / k as f64;
    Ok(probs.iter().all(|&p| (p - target).abs() <= eps))
}

/// Largest `|p - 1/k|` over the outcomes.
pub fn max_deviation(probs: &[f64]) -> f64 {
    let target = 1.0 / probs.len() as f64;
    probs.iter().map(|&p| (p - target).abs()).fold(0.0, f64::max)
}

/// Entropy ceiling for a `k`-outcome distribution whose deviation from uniform reaches `eps`:
/// `log_s k - (k eps^2 / 3) / ln s`.
pub fn deviation_entropy_ceiling(s: u32, k: usize, eps: f64) -> f64 {
    let ln_s = (s as f64).ln();
    (k as f64).ln() / ln_s - (k as f64 * eps * eps / 3.0) / ln_s
}

/// Calls `visit` on every flat function of `Z_s^2 -> Z_s` in lexicographic table order.
pub fn for_each_flat_function(space: ColourSpace, mut visit: impl FnMut(&[u32])) {
    let s = space.s() as usize;
    let mut remaining = vec![s; s];
    let mut table = vec![0u32; s * s];
    fn go(pos: usize, table: &mut [u32], remaining: &mut [usize], visit: &mut dyn FnMut(&[u32])) {
        if pos == table.len() {
            visit(table);
            return;
        }
        for z in 0..remaining.len() {
            if remaining[z] == 0 {
                continue;
            }
            remaining[z] -= 1;
            table[pos] = z as u32;
            go(pos + 1, table, remaining, visit);
            remaining[z] += 1;
        }
    }
    go(0, &mut table, &mut remaining, &mut visit);
}

/// Constants supported only where all flat functions can be enumerated.
pub const MAX_CONSTANTS_S: u32 = 3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsilonStep {
    pub exponent: u32,
    pub epsilon: f64,
    pub tv_radius: f64,
    pub mi_perturbation: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantsReport {
    pub s: u32,
    /// `s^(s^2)`, every function `Z_s^2 -> Z_s`.
    pub function_count: u128,
    pub flat_count: usize,
    pub semi_perfect_count: usize,
    pub flat_non_semi_perfect_count: usize,
    pub min_cond_mi: f64,
    /// Row-major table of the first minimizer in enumeration order.
    pub argmin_table: Vec<u32>,
    pub delta1: f64,
    /// `1 / (s^2 (2s + 1))`.
    pub epsilon_cap: f64,
    pub epsilon_cont: f64,
    pub epsilon_trace: Vec<EpsilonStep>,
    pub epsilon: f64,
    /// `7 s^2 epsilon < 1`, needed by the entropy-gap bound for `k = s^2`.
    pub small_radius_ok: bool,
    /// `(s eps^2 / 3) / ln s`.
    pub delta2: f64,
    /// `(s eps^2 / 3) * ln s`, the literal alternative reading of the log factor.
    pub delta2_alt: f64,
    pub delta: f64,
    /// `ceil(7 (1/delta + 2))`.
    pub n_threshold: u128,
}

/// Binary entropy in nats.
fn binary_entropy_nats(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    -t * t.ln() - (1.0 - t) * (1.0 - t).ln()
}

/// Upper bound on `|I(Y_1;Y_3|Y_2) - I(U_1;U_2|f(U))|` when `(Y_1, Y_3)` is
/// `(s^2, eps)`-uniform. Each of the four entropy terms moves by at most
/// `tau log_s D + h(tau) / ln s` (continuity of entropy in total variation),
/// with `tau = s^2 eps` and `D` the size of that term's outcome space.
pub fn mi_perturbation_bound(s: u32, eps: f64) -> Option<f64> {
    let sf = s as f64;
    let tau = sf * sf * eps;
    if tau > 0.5 {
        return None;
    }
    let ln_s = sf.ln();
    let term = |d: f64| tau * d.ln() / ln_s + binary_entropy_nats(tau) / ln_s;
    // H(Y1,Y2), H(Y3,Y2), H(Y1,Y2,Y3) over s^2 outcomes, H(Y2) over s
    Some(3.0 * term(sf * sf) + term(sf))
}

pub fn compute_constants(s: u32) -> Result<ConstantsReport> {
    let space = ColourSpace::new(s)?;
    let function_count = crate::colour::checked_pow(s, (s * s) as usize).unwrap_or(u128::MAX);
    if s > MAX_CONSTANTS_S {
        return Err(Error::Infeasible(format!(
            "constants enumeration infeasible for s={s}: {function_count} functions Z_s^2 -> Z_s"
        )));
    }

    let mut tables: Vec<Vec<u32>> = Vec::new();
    for_each_flat_function(space, |t| tables.push(t.to_vec()));
    let mis: Vec<f64> = tables
        .par_iter()
        .map(|t| LocalFunction { space, table: t.clone() }.conditional_mi())
        .collect();
    let flat_count = tables.len();
    let mut semi_perfect_count = 0;
    let mut best: Option<(f64, usize)> = None;
    for (k, &mi) in mis.iter().enumerate() {
        if mi.abs() <= SEMI_PERFECT_TOLERANCE {
            semi_perfect_count += 1;
        } else if best.is_none_or(|(b, _)| mi < b - 1e-12) {
            best = Some((mi, k));
        }
    }
    let (min_cond_mi, arg) = best.ok_or_else(|| Error::Infeasible("no flat non-semi-perfect function".into()))?;
    let delta1 = min_cond_mi / 2.0;

    let sf = s as f64;
    let epsilon_cap = 1.0 / (sf * sf * (2.0 * sf + 1.0));
    let mut epsilon_trace = Vec::new();
    let mut epsilon_cont = 0.0;
    for exponent in 1..=60u32 {
        let eps = (0.5f64).powi(exponent as i32);
        let bound = mi_perturbation_bound(s, eps);
        let accepted = bound.is_some_and(|b| b <= delta1);
        epsilon_trace.push(EpsilonStep {
            exponent,
            epsilon: eps,
            tv_radius: sf * sf * eps,
            mi_perturbation: bound.unwrap_or(f64::INFINITY),
            accepted,
        });
        if accepted {
            epsilon_cont = eps;
            break;
        }
    }
    let epsilon = epsilon_cap.min(epsilon_cont);
    let small_radius_ok = 7.0 * sf * sf * epsilon < 1.0;
    let gap = sf * epsilon * epsilon / 3.0;
    let delta2 = gap / sf.ln();
    let delta2_alt = gap * sf.ln();
    let delta = delta1.min(delta2);
    let n_threshold = (7.0 * (1.0 / delta + 2.0)).ceil() as u128;

    Ok(ConstantsReport {
        s,
        function_count,
        flat_count,
        semi_perfect_count,
        flat_non_semi_perfect_count: flat_count - semi_perfect_count,
        min_cond_mi,
        argmin_table: tables[arg].clone(),
        delta1,
        epsilon_cap,
        epsilon_cont,
        epsilon_trace,
        epsilon,
        small_radius_ok,
        delta2,
        delta2_alt,
        delta,
        n_threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::entropy_of_probabilities;
    use crate::protocol::build_fcp;

    fn sp(s: u32) -> ColourSpace {
        ColourSpace::new(s).unwrap()
    }

    /// Oracle: conditional MI via explicit conditional distributions.
    fn oracle_cond_mi(f: &LocalFunction) -> f64 {
        let s = f.space().s();
        let base = s as f64;
        let mut total = 0.0;
        for z in 0..s {
            let pts: Vec<(u32, u32)> = (0..s)
                .flat_map(|x| (0..s).map(move |y| (x, y)))
                .filter(|&(x, y)| f.apply(x, y) == z)
                .collect();
            if pts.is_empty() {
                continue;
            }
            let pz = pts.len() as f64 / (s * s) as f64;
            let m = pts.len() as f64;
            let mut px = vec![0.0; s as usize];
            let mut py = vec![0.0; s as usize];
            for &(x, y) in &pts {
                px[x as usize] += 1.0 / m;
                py[y as usize] += 1.0 / m;
            }
            let mut inner = 0.0;
            for &(x, y) in &pts {
                let pxy = 1.0 / m;
                inner += pxy * (pxy / (px[x as usize] * py[y as usize])).log(base);
            }
            total += pz * inner;
        }
        total
    }

    #[test]
    fn sum_mod_is_flat_not_semi_perfect() {
        let c = LocalFunction::sum_mod(sp(2)).classify();
        assert!(c.is_flat && !c.is_semi_perfect && !c.is_perfect);
        assert!((c.cond_mi - 1.0).abs() < 1e-12);
        for s in 3..=6 {
            let f = LocalFunction::sum_mod(sp(s));
            let c = f.classify();
            assert!(c.is_flat && !c.is_semi_perfect);
            assert!((c.cond_mi - oracle_cond_mi(&f)).abs() < 1e-12);
        }
    }

    #[test]
    fn coordinate_merge_is_perfect() {
        let f = LocalFunction::coordinate_merge(sp(6));
        let c = f.classify();
        assert!(c.is_perfect);
        // phi-fibres have b = 3 elements, psi-fibres a = 2
        assert!(c.l_sizes.iter().all(|&l| l == 3));
        assert!(c.r_sizes.iter().all(|&r| r == 2));
        let (l, r) = f.lr_sets(5).unwrap();
        assert_eq!((l.len(), r.len()), (3, 2));
        // phi(5) = 1 is shared by colours 3,4,5; psi(5) = 2 by colours 2,5
        assert_eq!(l, vec![3, 4, 5]);
        assert_eq!(r, vec![2, 5]);
        for z in 0..6 {
            assert!(f.preimage_is_rectangle(z).unwrap());
        }
    }

    #[test]
    fn projection_and_constant() {
        let f = LocalFunction::left_projection(sp(5));
        let c = f.classify();
        assert!(c.is_perfect);
        assert_eq!(f.lr_sets(3).unwrap(), (vec![3], (0..5).collect()));
        let z = LocalFunction::from_fn(sp(4), |_, _| 0).unwrap().classify();
        assert!(!z.is_flat && !z.is_semi_perfect && !z.is_perfect);
        assert_eq!(z.preimage_sizes[0], 16);
    }

    #[test]
    fn xor_preimage_is_not_rectangle() {
        let f = LocalFunction::sum_mod(sp(2));
        assert_eq!(f.lr_sets(0).unwrap(), (vec![0, 1], vec![0, 1]));
        assert!(!f.preimage_is_rectangle(0).unwrap());
        assert!(f.lr_sets(2).is_err());
    }

    #[test]
    fn invalid_tables_rejected() {
        assert!(LocalFunction::new(sp(2), vec![0, 1, 1]).is_err());
        assert!(LocalFunction::new(sp(2), vec![0, 1, 1, 2]).is_err());
    }

    #[test]
    fn exhaustive_s2_classification() {
        let space = sp(2);
        let mut flat = 0;
        let mut non_semi = Vec::new();
        for code in 0..16u32 {
            let table: Vec<u32> = (0..4).map(|b| code >> b & 1).collect();
            let f = LocalFunction::new(space, table.clone()).unwrap();
            let c = f.classify();
            assert!((c.cond_mi - oracle_cond_mi(&f)).abs() < 1e-12);
            if c.is_flat {
                flat += 1;
                if !c.is_semi_perfect {
                    non_semi.push((table, c.cond_mi));
                }
            }
        }
        assert_eq!(flat, 6);
        assert_eq!(non_semi.len(), 2);
        for (table, mi) in non_semi {
            assert!(table == vec![0, 1, 1, 0] || table == vec![1, 0, 0, 1], "{table:?}");
            assert!((mi - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn class_hierarchy_and_rectangles_s3() {
        let space = sp(3);
        let mut count = 0;
        for_each_flat_function(space, |t| {
            count += 1;
            let f = LocalFunction::new(space, t.to_vec()).unwrap();
            let c = f.classify();
            assert!(c.is_flat);
            assert!(!c.is_perfect || c.is_semi_perfect);
            if c.is_semi_perfect {
                for z in 0..3 {
                    assert!(f.preimage_is_rectangle(z).unwrap());
                    let (l, r) = f.lr_sets(z).unwrap();
                    assert_eq!(l.len() * r.len(), 3);
                }
            }
        });
        assert_eq!(count, 1680);
    }

    #[test]
    fn structured_family_rectangles_up_to_12() {
        for s in 2..=12 {
            let f = LocalFunction::coordinate_merge(sp(s));
            assert!(f.classify().is_semi_perfect);
            for z in 0..s {
                let (l, r) = f.lr_sets(z).unwrap();
                assert_eq!(l.len() * r.len(), s as usize);
                assert!(f.preimage_is_rectangle(z).unwrap());
            }
        }
    }

    #[test]
    fn fcp_interior_functions_are_perfect() {
        for s in 2..=12 {
            let p = build_fcp(7, s).unwrap();
            for i in 2..7 {
                assert!(p.local_function(i).unwrap().classify().is_perfect, "s={s} i={i}");
            }
        }
    }

    #[test]
    fn k_eps_uniform() {
        assert!(is_k_eps_uniform(&[0.25; 4], 4, 0.0).unwrap());
        let eps = 0.01;
        assert!(!is_k_eps_uniform(&[0.5 + 2.0 * eps, 0.5 - 2.0 * eps], 2, eps).unwrap());
        assert!(is_k_eps_uniform(&[0.5 + eps / 2.0, 0.5 - eps / 2.0], 2, eps).unwrap());
        assert!(is_k_eps_uniform(&[0.5, 0.5], 3, eps).is_err());
    }

    #[test]
    fn constants_s2() {
        let c = compute_constants(2).unwrap();
        assert_eq!(c.flat_count, 6);
        assert_eq!(c.flat_non_semi_perfect_count, 2);
        assert!((c.delta1 - 0.5).abs() < 1e-12);
        assert!((c.epsilon_cap - 0.05).abs() < 1e-15);
        assert!(c.epsilon <= c.epsilon_cap);
        assert!(c.small_radius_ok);
        assert!(mi_perturbation_bound(2, c.epsilon_cont).unwrap() <= c.delta1);
        assert!(mi_perturbation_bound(2, 2.0 * c.epsilon_cont).is_none_or(|b| b > c.delta1));
        assert!((c.delta - c.delta1.min(c.delta2)).abs() == 0.0);
        assert_eq!(c.n_threshold, (7.0 * (1.0 / c.delta + 2.0)).ceil() as u128);
        assert_eq!(c.argmin_table, vec![0, 1, 1, 0]);
    }

    #[test]
    fn constants_s3_and_refusal() {
        let c = compute_constants(3).unwrap();
        assert_eq!(c.flat_count, 1680);
        assert!(c.delta1 > 0.0);
        let f = LocalFunction::new(sp(3), c.argmin_table.clone()).unwrap();
        assert!((f.conditional_mi() - c.min_cond_mi).abs() < 1e-12);
        match compute_constants(4) {
            Err(Error::Infeasible(msg)) => assert!(msg.contains("4294967296")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ceiling_matches_exact_two_point_case() {
        // one outcome raised by eps, the rest lowered evenly: entropy stays below the ceiling
        for s in [2u32, 3] {
            for k in [s as usize, (s * s) as usize] {
                let eps = 0.5 / (7.0 * k as f64);
                let mut p = vec![1.0 / k as f64 - eps / (k as f64 - 1.0); k];
                p[0] = 1.0 / k as f64 + eps;
                assert!(entropy_of_probabilities(&p, s as f64) <= deviation_entropy_ceiling(s, k, eps));
            }
        }
    }
}
