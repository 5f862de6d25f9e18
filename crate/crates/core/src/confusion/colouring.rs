//! Exact vertex colouring with DSATUR branch and bound.
//!
//! [`chromatic_number`] brackets `chi` between a lower bound (clique size and
//! `ceil(V / alpha)`) and a greedy DSATUR upper bound, then asks for a
//! `k`-colouring for `k = lower, lower + 1, ...`. If the deadline passes the
//! current bracket is returned as an interval.

use std::time::Instant;

use super::bitset::BitMatrix;

/// Graphs above this order get an interval without exact search.
pub const DEFAULT_EXACT_CHI_MAX_VERTICES: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChiOutcome {
    pub lower: usize,
    pub upper: usize,
    /// A proper colouring with `upper` colours.
    pub colouring: Vec<usize>,
}

impl ChiOutcome {
    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }

    pub fn exact(&self) -> Option<usize> {
        self.is_exact().then_some(self.lower)
    }
}

struct Dsatur<'a> {
    g: &'a BitMatrix,
    k: usize,
    colour: Vec<Option<usize>>,
    /// `tally[v][c]`: coloured neighbours of `v` that use colour `c`.
    tally: Vec<Vec<u32>>,
    saturation: Vec<usize>,
    uncoloured_degree: Vec<usize>,
    deadline: Option<Instant>,
    nodes: u64,
    timed_out: bool,
}

impl<'a> Dsatur<'a> {
    fn new(g: &'a BitMatrix, k: usize, deadline: Option<Instant>) -> Self {
        let n = g.order();
        Dsatur {
            g,
            k,
            colour: vec![None; n],
            tally: vec![vec![0; k]; n],
            saturation: vec![0; n],
            uncoloured_degree: (0..n).map(|v| g.degree(v)).collect(),
            deadline,
            nodes: 0,
            timed_out: false,
        }
    }

    /// Highest saturation, then highest uncoloured degree, then lowest index.
    fn pick(&self) -> Option<usize> {
        (0..self.g.order())
            .filter(|&v| self.colour[v].is_none())
            .max_by_key(|&v| (self.saturation[v], self.uncoloured_degree[v], std::cmp::Reverse(v)))
    }

    fn assign(&mut self, v: usize, c: usize) {
        self.colour[v] = Some(c);
        for w in self.g.row(v).iter() {
            self.uncoloured_degree[w] -= 1;
            if self.tally[w][c] == 0 {
                self.saturation[w] += 1;
            }
            self.tally[w][c] += 1;
        }
    }

    fn unassign(&mut self, v: usize, c: usize) {
        self.colour[v] = None;
        for w in self.g.row(v).iter() {
            self.uncoloured_degree[w] += 1;
            self.tally[w][c] -= 1;
            if self.tally[w][c] == 0 {
                self.saturation[w] -= 1;
            }
        }
    }

    /// Backtracking search for a proper colouring with at most `k` colours.
    fn solve(&mut self, used: usize) -> bool {
        self.nodes += 1;
        if self.nodes.is_multiple_of(4096) {
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    self.timed_out = true;
                }
            }
        }
        if self.timed_out {
            return false;
        }
        let Some(v) = self.pick() else {
            return true;
        };
        // colours beyond `used` are interchangeable, so only the first new one is tried
        let limit = (used + 1).min(self.k);
        for c in 0..limit {
            if self.tally[v][c] != 0 {
                continue;
            }
            self.assign(v, c);
            if self.solve(used.max(c + 1)) {
                return true;
            }
            self.unassign(v, c);
            if self.timed_out {
                return false;
            }
        }
        false
    }

    fn colouring(&self) -> Vec<usize> {
        self.colour.iter().map(|c| c.expect("complete")).collect()
    }
}

/// Greedy DSATUR colouring (no backtracking).
pub fn dsatur_greedy(g: &BitMatrix) -> Vec<usize> {
    let n = g.order();
    let mut d = Dsatur::new(g, n.max(1), None);
    while let Some(v) = d.pick() {
        let c = (0..n).find(|&c| d.tally[v][c] == 0).expect("n colours suffice");
        d.assign(v, c);
    }
    d.colouring()
}

/// The deadline passed before the search finished.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Timeout;

/// A proper colouring with at most `k` colours, `Ok(None)` if none exists.
pub fn k_colouring(g: &BitMatrix, k: usize, deadline: Option<Instant>) -> Result<Option<Vec<usize>>, Timeout> {
    if g.order() == 0 {
        return Ok(Some(Vec::new()));
    }
    if k == 0 {
        return Ok(None);
    }
    let mut d = Dsatur::new(g, k, deadline);
    if d.solve(0) {
        Ok(Some(d.colouring()))
    } else if d.timed_out {
        Err(Timeout)
    } else {
        Ok(None)
    }
}

pub fn is_proper(g: &BitMatrix, colouring: &[usize]) -> bool {
    colouring.len() == g.order()
        && (0..g.order()).all(|u| g.row(u).iter().all(|v| colouring[u] != colouring[v]))
}

pub fn colour_count(colouring: &[usize]) -> usize {
    colouring.iter().map(|&c| c + 1).max().unwrap_or(0)
}

/// `chi(g)` with the given starting lower bound. Exact search only runs when
/// `g.order() <= exact_limit`. A proper `seed` colouring with fewer colours
/// than greedy DSATUR replaces it as the starting upper bound.
pub fn chromatic_number(
    g: &BitMatrix,
    lower_bound: usize,
    exact_limit: usize,
    seed: Option<&[usize]>,
    deadline: Option<Instant>,
) -> ChiOutcome {
    let mut best = dsatur_greedy(g);
    if let Some(seed) = seed.filter(|c| is_proper(g, c)) {
        if colour_count(seed) < colour_count(&best) {
            best = seed.to_vec();
        }
    }
    let upper = colour_count(&best);
    let mut lower = lower_bound.min(upper).max(usize::from(g.order() > 0));
    if g.order() > exact_limit {
        return ChiOutcome { lower, upper, colouring: best };
    }
    let mut found_upper = upper;
    while lower < found_upper {
        match k_colouring(g, lower, deadline) {
            Ok(Some(c)) => {
                found_upper = colour_count(&c);
                lower = lower.min(found_upper);
                best = c;
                break;
            }
            Ok(None) => lower += 1,
            Err(Timeout) => break,
        }
    }
    ChiOutcome {
        lower,
        upper: found_upper,
        colouring: best,
    }
}
