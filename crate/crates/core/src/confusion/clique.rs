//! Exact maximum clique by bitset branch and bound.
//!
//! Candidates are ordered by greedy sequential colouring; a branch is cut as
//! soon as `|clique| + colour bound <= |best|`. Vertices are first relabelled
//! in degeneracy order (highest core first) and ties always break by index,
//! so the search trace and the returned witness are deterministic.

use std::time::Instant;

use super::bitset::{BitMatrix, Bitset};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliqueOutcome {
    /// Vertices of the best clique found, ascending, original labels.
    pub clique: Vec<usize>,
    /// False when the deadline cut the search short.
    pub exact: bool,
    pub nodes: u64,
}

/// Removal order of repeated minimum-degree deletion, ties by index.
pub fn degeneracy_order(g: &BitMatrix) -> Vec<usize> {
    let n = g.order();
    let mut degree: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut removed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| !removed[v])
            .min_by_key(|&v| (degree[v], v))
            .expect("vertex left");
        removed[v] = true;
        order.push(v);
        for w in g.row(v).iter() {
            if !removed[w] {
                degree[w] -= 1;
            }
        }
    }
    order
}

struct Search<'a> {
    g: &'a BitMatrix,
    best: Vec<usize>,
    deadline: Option<Instant>,
    timed_out: bool,
    nodes: u64,
}

impl Search<'_> {
    /// Greedy colouring of `cand`: returns vertices in non-decreasing colour order with their colour.
    fn colour_sort(&self, cand: &Bitset) -> (Vec<usize>, Vec<usize>) {
        let mut uncoloured = cand.clone();
        let mut order = Vec::with_capacity(cand.count());
        let mut bounds = Vec::with_capacity(order.capacity());
        let mut colour = 0;
        while !uncoloured.is_empty() {
            colour += 1;
            let mut class = uncoloured.clone();
            while let Some(v) = class.first() {
                class.remove(v);
                class.difference_with(self.g.row(v));
                uncoloured.remove(v);
                order.push(v);
                bounds.push(colour);
            }
        }
        (order, bounds)
    }

    fn expand(&mut self, clique: &mut Vec<usize>, mut cand: Bitset) {
        self.nodes += 1;
        if self.nodes.is_multiple_of(1024) {
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    self.timed_out = true;
                }
            }
        }
        if self.timed_out {
            return;
        }
        let (order, bounds) = self.colour_sort(&cand);
        for idx in (0..order.len()).rev() {
            if clique.len() + bounds[idx] <= self.best.len() || self.timed_out {
                return;
            }
            let v = order[idx];
            clique.push(v);
            let next = cand.intersection(self.g.row(v));
            if next.is_empty() {
                if clique.len() > self.best.len() {
                    self.best = clique.clone();
                }
            } else {
                self.expand(clique, next);
            }
            clique.pop();
            cand.remove(v);
        }
    }
}

/// Maximum clique of `g`, optionally bounded by a deadline.
pub fn max_clique(g: &BitMatrix, deadline: Option<Instant>) -> CliqueOutcome {
    max_clique_from(g, &[], deadline)
}

/// As [`max_clique`], starting from a known clique `seed` (ignored unless it is one).
pub fn max_clique_from(g: &BitMatrix, seed: &[usize], deadline: Option<Instant>) -> CliqueOutcome {
    let n = g.order();
    if n == 0 {
        return CliqueOutcome { clique: Vec::new(), exact: true, nodes: 0 };
    }
    let mut order = degeneracy_order(g);
    order.reverse();
    let relabelled = g.permuted(&order);
    let is_clique = seed.iter().all(|&u| u < n && seed.iter().all(|&v| u == v || g.adjacent(u, v)));
    let best = if is_clique && seed.len() > 1 {
        let mut position = vec![0; n];
        for (k, &v) in order.iter().enumerate() {
            position[v] = k;
        }
        seed.iter().map(|&v| position[v]).collect()
    } else {
        vec![0]
    };
    let mut search = Search {
        g: &relabelled,
        best,
        deadline,
        timed_out: false,
        nodes: 0,
    };
    search.expand(&mut Vec::new(), Bitset::full(n));
    let mut clique: Vec<usize> = search.best.iter().map(|&k| order[k]).collect();
    clique.sort_unstable();
    CliqueOutcome {
        clique,
        exact: !search.timed_out,
        nodes: search.nodes,
    }
}

/// Maximum independent set: a maximum clique of the complement.
pub fn max_independent_set(g: &BitMatrix, deadline: Option<Instant>) -> CliqueOutcome {
    max_clique(&g.complement(), deadline)
}

/// As [`max_independent_set`], starting from a known independent set.
pub fn max_independent_set_from(g: &BitMatrix, seed: &[usize], deadline: Option<Instant>) -> CliqueOutcome {
    max_clique_from(&g.complement(), seed, deadline)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_alpha(g: &BitMatrix) -> usize {
        let n = g.order();
        (0u32..1 << n)
            .filter(|&m| {
                (0..n).all(|u| m >> u & 1 == 0 || (0..n).all(|v| m >> v & 1 == 0 || !g.adjacent(u, v)))
            })
            .map(|m| m.count_ones() as usize)
            .max()
            .unwrap()
    }

    fn cycle(n: usize) -> BitMatrix {
        let mut g = BitMatrix::empty(n);
        for i in 0..n {
            g.add_edge(i, (i + 1) % n);
        }
        g
    }

    #[test]
    fn small_known_graphs() {
        assert_eq!(max_independent_set(&cycle(5), None).clique.len(), 2);
        let six = max_independent_set(&cycle(6), None);
        assert_eq!(six.clique.len(), 3);
        assert!(six.exact);
        assert_eq!(max_clique(&cycle(3), None).clique, vec![0, 1, 2]);
        assert_eq!(max_clique(&cycle(7), None).clique.len(), 2);
    }

    #[test]
    fn matches_brute_force_on_random_graphs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..60 {
            let n = rng.gen_range(1..=14);
            let mut g = BitMatrix::empty(n);
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen_bool(0.4) {
                        g.add_edge(u, v);
                    }
                }
            }
            let out = max_independent_set(&g, None);
            assert_eq!(out.clique.len(), brute_alpha(&g));
            for &u in &out.clique {
                for &v in &out.clique {
                    assert!(!g.adjacent(u, v));
                }
            }
        }
    }

    #[test]
    fn seeded_search_agrees() {
        let g = cycle(9);
        let plain = max_independent_set(&g, None);
        let seeded = max_independent_set_from(&g, &[0, 2, 4, 6], None);
        assert_eq!(plain.clique.len(), seeded.clique.len());
        // an invalid seed is ignored
        let bad = max_independent_set_from(&g, &[0, 1, 2, 3, 4, 5], None);
        assert_eq!(bad.clique.len(), 4);
    }

    #[test]
    fn degeneracy_order_is_permutation() {
        let mut o = degeneracy_order(&cycle(9));
        o.sort_unstable();
        assert_eq!(o, (0..9).collect::<Vec<_>>());
    }
}
