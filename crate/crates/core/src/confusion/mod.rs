//! Confusion graphs of side-information graphs, and exact `alpha` / `chi`.
//!
//! The confusion graph of `(G, s)` has vertex set `Z_s^n`; colourings `c`
//! and `c'` are adjacent iff for some `i`, `c_i != c'_i` while `c` and `c'`
//! agree on every neighbour of `i`. Its independence number is the largest
//! fixed set of any protocol on `G`; its chromatic number is the smallest
//! broadcast alphabet for index coding on `G`.
//!
//! Vertices are mixed-radix integers in `[0, s^n)` with vertex 1 most significant.

pub mod bitset;
pub mod clique;
pub mod colouring;
pub mod graph;

use std::collections::HashMap;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::colour::{checked_pow, decode_mixed, encode_mixed, ColourSpace, Colouring, Cycle};
use crate::error::{Error, Result};
use crate::protocol::{build_fcp, enumerate_fixed_set, fcp_fixed_count, Protocol};

pub use bitset::{BitMatrix, Bitset};
pub use colouring::{ChiOutcome, DEFAULT_EXACT_CHI_MAX_VERTICES};
pub use graph::SideInfoGraph;

/// Explicit adjacency is a dense `V x V` bit matrix; this caps `V`.
pub const DEFAULT_EXPLICIT_VERTEX_BUDGET: u64 = 1 << 15;
pub const DEFAULT_SOLVER_TIMEOUT: Duration = Duration::from_secs(300);

#[derive(Debug, Clone)]
pub struct ConfusionGraph {
    graph: SideInfoGraph,
    space: ColourSpace,
    vertex_count: u128,
    adjacency: Option<BitMatrix>,
}

/// The confusion graph with explicit adjacency when `s^n <= explicit_budget`.
///
/// Over budget the implicit graph is still returned (adjacency queries via
/// [`ConfusionGraph::adjacent`]); [`ConfusionGraph::explicit`] then errors.
pub fn build_confusion(g: &SideInfoGraph, s: u32, explicit_budget: u64) -> Result<ConfusionGraph> {
    let space = ColourSpace::new(s)?;
    let vertex_count = checked_pow(s, g.n()).ok_or(Error::BudgetExceeded {
        what: "confusion graph",
        required: u128::MAX,
        budget: explicit_budget as u128,
    })?;
    let mut cg = ConfusionGraph {
        graph: g.clone(),
        space,
        vertex_count,
        adjacency: None,
    };
    if vertex_count <= explicit_budget as u128 {
        cg.adjacency = Some(cg.build_explicit());
    }
    Ok(cg)
}

impl ConfusionGraph {
    pub fn graph(&self) -> &SideInfoGraph {
        &self.graph
    }

    pub fn space(&self) -> ColourSpace {
        self.space
    }

    pub fn vertex_count(&self) -> u128 {
        self.vertex_count
    }

    pub fn explicit(&self) -> Result<&BitMatrix> {
        self.adjacency.as_ref().ok_or(Error::BudgetExceeded {
            what: "explicit confusion graph",
            required: self.vertex_count,
            budget: DEFAULT_EXPLICIT_VERTEX_BUDGET as u128,
        })
    }

    pub fn encode(&self, c: &[u32]) -> u64 {
        encode_mixed(c, self.space.s())
    }

    pub fn decode(&self, v: u64) -> Colouring {
        let mut out = vec![0; self.graph.n()];
        decode_mixed(v, self.space.s(), &mut out);
        Colouring(out)
    }

    /// Adjacency straight from the definition, without the explicit matrix.
    pub fn adjacent(&self, c: &[u32], d: &[u32]) -> bool {
        confusable(&self.graph, c, d)
    }

    fn build_explicit(&self) -> BitMatrix {
        let n = self.graph.n();
        let s = self.space.s();
        let v_count = self.vertex_count as usize;
        let rows: Vec<Bitset> = (0..v_count)
            .into_par_iter()
            .map(|u| {
                let mut row = Bitset::new(v_count);
                let mut c = vec![0u32; n];
                decode_mixed(u as u64, s, &mut c);
                for i in 0..n {
                    let pinned = self.graph.neighbours(i);
                    let free: Vec<usize> = (0..n).filter(|&j| j != i && !pinned.contains(&j)).collect();
                    let mut d = c.clone();
                    for z in (0..s).filter(|&z| z != c[i]) {
                        d[i] = z;
                        for_each_assignment(&mut d, &free, s, |d| {
                            row.insert(encode_mixed(d, s) as usize);
                        });
                    }
                }
                row
            })
            .collect();
        BitMatrix::from_rows(rows)
    }
}

/// Visits every assignment of the `free` coordinates of `d` (others untouched).
fn for_each_assignment(d: &mut [u32], free: &[usize], s: u32, mut visit: impl FnMut(&[u32])) {
    for &j in free {
        d[j] = 0;
    }
    loop {
        visit(d);
        let mut k = 0;
        while k < free.len() {
            d[free[k]] += 1;
            if d[free[k]] < s {
                break;
            }
            d[free[k]] = 0;
            k += 1;
        }
        if k == free.len() {
            return;
        }
    }
}

/// `c ~ d` in the confusion graph of `g`.
pub fn confusable(g: &SideInfoGraph, c: &[u32], d: &[u32]) -> bool {
    (0..g.n()).any(|i| c[i] != d[i] && g.neighbours(i).iter().all(|&j| c[j] == d[j]))
}

/// Every vertex's colour is a function of its neighbours' colours across `members`.
/// Checked from the definition with a lookup per vertex, independent of the adjacency matrix.
pub fn is_codeable(g: &SideInfoGraph, members: &[Colouring]) -> bool {
    (0..g.n()).all(|i| {
        let mut seen: HashMap<Vec<u32>, u32> = HashMap::new();
        members.iter().all(|m| {
            let key: Vec<u32> = g.neighbours(i).iter().map(|&j| m.0[j]).collect();
            *seen.entry(key).or_insert(m.0[i]) == m.0[i]
        })
    })
}

/// A cycle protocol whose fixed set contains every member of a codeable family.
/// Unseen neighbour pairs guess 0.
pub fn protocol_from_family(n: usize, s: u32, members: &[Colouring]) -> Result<Protocol> {
    let cycle = Cycle::new(n)?;
    let space = ColourSpace::new(s)?;
    let mut tables = vec![vec![0u32; (s * s) as usize]; n];
    let mut set = vec![vec![false; (s * s) as usize]; n];
    for m in members {
        m.validate(n, &space)?;
        for i0 in 0..n {
            let (l, r) = (m.0[(i0 + n - 1) % n], m.0[(i0 + 1) % n]);
            let slot = (l * s + r) as usize;
            if set[i0][slot] && tables[i0][slot] != m.0[i0] {
                return Err(Error::Invalid(format!("family is not codeable at vertex {}", i0 + 1)));
            }
            set[i0][slot] = true;
            tables[i0][slot] = m.0[i0];
        }
    }
    Protocol::new(space, cycle, tables)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaResult {
    pub alpha: usize,
    pub exact: bool,
    pub search_nodes: u64,
    #[serde(skip)]
    pub witness: Vec<Colouring>,
}

/// Exact independence number with a maximum independent set as witness.
/// On timeout `exact` is false and `alpha` is the best lower bound found.
/// On odd cycles the fcp fixed set seeds the search.
pub fn max_independent_set(cg: &ConfusionGraph, deadline: Option<Instant>) -> Result<AlphaResult> {
    let adj = cg.explicit()?;
    let seed = match cg.graph.as_cycle().filter(|n| n % 2 == 1) {
        Some(n) => {
            let p = build_fcp(n, cg.space.s())?;
            let fixed = enumerate_fixed_set(&p, cg.vertex_count as u64)?;
            fixed.members().map(|c| cg.encode(c) as usize).collect()
        }
        None => Vec::new(),
    };
    let out = clique::max_independent_set_from(adj, &seed, deadline);
    Ok(AlphaResult {
        alpha: out.clique.len(),
        exact: out.exact,
        search_nodes: out.nodes,
        witness: out.clique.iter().map(|&v| cg.decode(v as u64)).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiResult {
    pub lower: usize,
    pub upper: usize,
    pub exact: bool,
    pub clique_lower_bound: usize,
    /// Colours used by the broadcast index code, on odd cycles.
    pub index_code_upper_bound: Option<usize>,
}

impl ChiResult {
    pub fn value(&self) -> Option<usize> {
        self.exact.then_some(self.upper)
    }
}

/// `chi` of the confusion graph: exact when the graph has at most
/// `exact_limit` vertices and the deadline holds, otherwise an interval.
/// `alpha`, when known exactly, tightens the lower bound to `ceil(V / alpha)`.
/// On odd cycles the broadcast index code seeds the upper bound.
pub fn chromatic_number(
    cg: &ConfusionGraph,
    alpha: Option<usize>,
    exact_limit: usize,
    deadline: Option<Instant>,
) -> Result<ChiResult> {
    let adj = cg.explicit()?;
    let v = adj.order();
    let clique = clique::max_clique(adj, deadline);
    let mut lower = clique.clique.len();
    if let Some(a) = alpha.filter(|&a| a > 0) {
        lower = lower.max(v.div_ceil(a));
    }
    let seed = index_code_colouring(cg)?;
    let out = colouring::chromatic_number(adj, lower, exact_limit, seed.as_deref(), deadline);
    debug_assert!(colouring::is_proper(adj, &out.colouring));
    Ok(ChiResult {
        lower: out.lower,
        upper: out.upper,
        exact: out.is_exact(),
        clique_lower_bound: clique.clique.len(),
        index_code_upper_bound: seed.map(|c| colouring::colour_count(&c)),
    })
}

/// The packed broadcast of every vertex, as a colouring of the confusion graph.
/// `None` unless the side-information graph is an odd cycle.
fn index_code_colouring(cg: &ConfusionGraph) -> Result<Option<Vec<usize>>> {
    let Some(n) = cg.graph.as_cycle().filter(|n| n % 2 == 1) else {
        return Ok(None);
    };
    let space = cg.space;
    let mut used = std::collections::BTreeMap::new();
    let mut raw = Vec::with_capacity(cg.vertex_count as usize);
    for v in 0..cg.vertex_count as u64 {
        let packed = crate::indexcode::encode(&cg.decode(v), &space, n)?.pack(&space);
        let next = used.len();
        raw.push(*used.entry(packed).or_insert(next));
    }
    Ok(Some(raw))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FcpComparison {
    pub fix: u128,
    pub alpha: usize,
    /// `"equal"`, `"protocol below optimum"`, or `"violation"` (alpha below a realizable fixed set).
    pub relation: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfusionGraphStats {
    pub n: usize,
    pub s: u32,
    pub edges: Vec<(usize, usize)>,
    pub vertex_count: u128,
    pub alpha: Option<AlphaResult>,
    pub chi: Option<ChiResult>,
    pub gn: Option<f64>,
    pub beta: Option<f64>,
    pub beta_interval: Option<(f64, f64)>,
    /// `alpha * chi >= s^n`, when both are exact.
    pub product_check: Option<bool>,
    /// `gn + beta >= n` within tolerance, when both are exact.
    pub identity_check: Option<bool>,
    /// `alpha^2 <= s^n` for cycles with `n >= 4`.
    pub half_bound_check: Option<bool>,
    /// The alpha witness re-verified as codeable straight from the definition.
    pub witness_codeable: Option<bool>,
    pub fcp: Option<FcpComparison>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportOptions {
    pub want_alpha: bool,
    pub want_chi: bool,
    pub explicit_budget: u64,
    pub exact_chi_limit: usize,
    pub timeout: Duration,
    pub tolerance: f64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            want_alpha: true,
            want_chi: true,
            explicit_budget: DEFAULT_EXPLICIT_VERTEX_BUDGET,
            exact_chi_limit: DEFAULT_EXACT_CHI_MAX_VERTICES,
            timeout: DEFAULT_SOLVER_TIMEOUT,
            tolerance: crate::entropy::DEFAULT_TOLERANCE,
        }
    }
}

pub fn gn_beta_report(g: &SideInfoGraph, s: u32, opts: &ReportOptions) -> Result<ConfusionGraphStats> {
    let cg = build_confusion(g, s, opts.explicit_budget)?;
    if cg.adjacency.is_none() {
        return Err(Error::BudgetExceeded {
            what: "explicit confusion graph",
            required: cg.vertex_count,
            budget: opts.explicit_budget as u128,
        });
    }
    let log_s = |x: f64| x.ln() / (s as f64).ln();
    let n = g.n();
    let total = cg.vertex_count;

    let alpha = if opts.want_alpha {
        let deadline = Instant::now() + opts.timeout;
        Some(max_independent_set(&cg, Some(deadline))?)
    } else {
        None
    };
    let exact_alpha = alpha.as_ref().filter(|a| a.exact).map(|a| a.alpha);
    let chi = if opts.want_chi {
        let deadline = Instant::now() + opts.timeout;
        Some(chromatic_number(&cg, exact_alpha, opts.exact_chi_limit, Some(deadline))?)
    } else {
        None
    };
    let exact_chi = chi.as_ref().and_then(ChiResult::value);

    let gn = exact_alpha.map(|a| log_s(a as f64));
    let beta = exact_chi.map(|c| log_s(c as f64));
    let beta_interval = chi
        .as_ref()
        .filter(|c| !c.exact)
        .map(|c| (log_s(c.lower as f64), log_s(c.upper as f64)));
    let product_check = exact_alpha.zip(exact_chi).map(|(a, c)| a as u128 * c as u128 >= total);
    let identity_check = gn.zip(beta).map(|(g, b)| g + b >= n as f64 - opts.tolerance);

    let cycle_len = g.as_cycle();
    let half_bound_check = cycle_len
        .filter(|&len| len >= 4)
        .and(alpha.as_ref())
        .map(|a| (a.alpha as u128) * (a.alpha as u128) <= total);
    let witness_codeable = alpha.as_ref().map(|a| is_codeable(g, &a.witness));
    let fcp = match (cycle_len, exact_alpha) {
        (Some(len), Some(a)) if len % 2 == 1 => {
            let fix = fcp_fixed_count(len, &cg.space);
            let relation = match (a as u128).cmp(&fix) {
                std::cmp::Ordering::Equal => "equal",
                std::cmp::Ordering::Greater => "protocol below optimum",
                std::cmp::Ordering::Less => "violation",
            };
            Some(FcpComparison { fix, alpha: a, relation })
        }
        _ => None,
    };

    Ok(ConfusionGraphStats {
        n,
        s,
        edges: g.edges(),
        vertex_count: total,
        alpha,
        chi,
        gn,
        beta,
        beta_interval,
        product_check,
        identity_check,
        half_bound_check,
        witness_codeable,
        fcp,
    })
}
