//! Protocols on cycles, their fixed sets, and the named constructions.
//!
//! A protocol on `C_n` with `s` colours is stored as `n` dense `s x s` tables.
//! Table `i` maps `(c_{i-1}, c_{i+1})` to the guess of vertex `i`; row is the
//! left neighbour, column the right neighbour.

use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::colour::{checked_pow, ColourSpace, Colouring, Cycle};
use crate::error::{Error, Result};
use crate::funclass::LocalFunction;

/// Default cap on the number of candidate colourings `s^n` an enumeration may cover.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 100_000_000;

pub const PROTOCOL_HEADER: &str = "cycleguess-protocol v1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Protocol {
    space: ColourSpace,
    cycle: Cycle,
    tables: Vec<Vec<u32>>,
}

impl Protocol {
    /// Builds a protocol from `n` row-major `s x s` tables.
    pub fn new(space: ColourSpace, cycle: Cycle, tables: Vec<Vec<u32>>) -> Result<Self> {
        let s = space.s() as usize;
        if tables.len() != cycle.n() {
            return Err(Error::Dimension {
                expected: cycle.n(),
                got: tables.len(),
            });
        }
        for table in &tables {
            if table.len() != s * s {
                return Err(Error::Dimension {
                    expected: s * s,
                    got: table.len(),
                });
            }
            if let Some(&bad) = table.iter().find(|&&g| g >= space.s()) {
                return Err(Error::OutOfRange {
                    what: "table entry",
                    value: bad as u64,
                    bound: space.s() as u64,
                });
            }
        }
        Ok(Protocol {
            space,
            cycle,
            tables,
        })
    }

    /// Builds a protocol from per-vertex closures `f(i, left, right)` with 1-based `i`.
    pub fn from_fn(
        space: ColourSpace,
        cycle: Cycle,
        mut f: impl FnMut(usize, u32, u32) -> u32,
    ) -> Result<Self> {
        let s = space.s();
        let tables = (1..=cycle.n())
            .map(|i| {
                let mut t = Vec::with_capacity((s * s) as usize);
                for left in 0..s {
                    for right in 0..s {
                        t.push(f(i, left, right));
                    }
                }
                t
            })
            .collect();
        Protocol::new(space, cycle, tables)
    }

    /// Every vertex guesses `value` regardless of what it sees.
    pub fn constant(space: ColourSpace, cycle: Cycle, value: u32) -> Result<Self> {
        Protocol::from_fn(space, cycle, |_, _, _| value)
    }

    /// Every table entry drawn uniformly from `Z_s`.
    pub fn random<R: Rng + ?Sized>(space: ColourSpace, cycle: Cycle, rng: &mut R) -> Self {
        let s = space.s();
        let tables = (0..cycle.n())
            .map(|_| (0..s * s).map(|_| rng.gen_range(0..s)).collect())
            .collect();
        Protocol {
            space,
            cycle,
            tables,
        }
    }

    pub fn space(&self) -> ColourSpace {
        self.space
    }

    pub fn cycle(&self) -> Cycle {
        self.cycle
    }

    pub fn n(&self) -> usize {
        self.cycle.n()
    }

    pub fn s(&self) -> u32 {
        self.space.s()
    }

    /// Row-major table of vertex `i` (1-based).
    pub fn table(&self, i: usize) -> Option<&[u32]> {
        i.checked_sub(1)
            .and_then(|i0| self.tables.get(i0))
            .map(Vec::as_slice)
    }

    /// Guess of vertex `i` (1-based) given its left and right neighbour colours.
    pub fn guess(&self, i: usize, left: u32, right: u32) -> Result<u32> {
        let (s, n) = (self.s(), self.n());
        if i == 0 || i > n {
            return Err(Error::OutOfRange {
                what: "vertex index",
                value: i as u64,
                bound: n as u64 + 1,
            });
        }
        for z in [left, right] {
            if z >= s {
                return Err(Error::OutOfRange {
                    what: "colour",
                    value: z as u64,
                    bound: s as u64,
                });
            }
        }
        Ok(self.guess0(i - 1, left, right))
    }

    #[inline]
    pub(crate) fn guess0(&self, i0: usize, left: u32, right: u32) -> u32 {
        self.tables[i0][(left * self.space.s() + right) as usize]
    }

    /// The local function of vertex `i` (1-based).
    pub fn local_function(&self, i: usize) -> Result<LocalFunction> {
        let table = self.table(i).ok_or(Error::OutOfRange {
            what: "vertex index",
            value: i as u64,
            bound: self.n() as u64 + 1,
        })?;
        LocalFunction::new(self.space, table.to_vec())
    }

    /// Applies every local function: returns `(f_1(c), ..., f_n(c))`.
    pub fn evaluate(&self, c: &Colouring) -> Result<Colouring> {
        c.validate(self.n(), &self.space)?;
        Ok(Colouring(self.evaluate_raw(c.as_slice())))
    }

    pub(crate) fn evaluate_raw(&self, c: &[u32]) -> Vec<u32> {
        (0..self.n())
            .map(|i0| {
                self.guess0(i0, c[self.cycle.left0(i0)], c[self.cycle.right0(i0)])
            })
            .collect()
    }

    /// True when every vertex guesses its own colour correctly.
    pub fn is_fixed(&self, c: &[u32]) -> bool {
        c.len() == self.n()
            && c.iter().all(|&z| z < self.s())
            && (0..self.n()).all(|i0| {
                self.guess0(i0, c[self.cycle.left0(i0)], c[self.cycle.right0(i0)]) == c[i0]
            })
    }

    /// Serializes to the versioned text format.
    pub fn to_text(&self) -> String {
        let s = self.s() as usize;
        let mut out = String::new();
        let _ = writeln!(out, "{PROTOCOL_HEADER}");
        let _ = writeln!(out, "n={} s={}", self.n(), s);
        for table in &self.tables {
            out.push('\n');
            for row in table.chunks(s) {
                let line: Vec<String> = row.iter().map(u32::to_string).collect();
                let _ = writeln!(out, "{}", line.join(" "));
            }
        }
        out
    }

    /// Parses the versioned text format. Blank lines and `#` comments are ignored.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        match lines.next() {
            Some((_, PROTOCOL_HEADER)) => {}
            Some((k, other)) => {
                return Err(Error::parse(k, format!("expected header {PROTOCOL_HEADER:?}, got {other:?}")))
            }
            None => return Err(Error::parse(0, "empty protocol file")),
        }
        let (dim_line, dims) = lines
            .next()
            .ok_or_else(|| Error::parse(0, "missing `n=<n> s=<s>` line"))?;
        let (mut n, mut s) = (None, None);
        for tok in dims.split_whitespace() {
            let (key, value) = tok
                .split_once('=')
                .ok_or_else(|| Error::parse(dim_line, format!("bad token {tok:?}")))?;
            let v: usize = value
                .parse()
                .map_err(|_| Error::parse(dim_line, format!("bad number {value:?}")))?;
            match key {
                "n" => n = Some(v),
                "s" => s = Some(v),
                _ => return Err(Error::parse(dim_line, format!("unknown key {key:?}"))),
            }
        }
        let n = n.ok_or_else(|| Error::parse(dim_line, "missing n"))?;
        let s = s.ok_or_else(|| Error::parse(dim_line, "missing s"))?;
        let space = ColourSpace::new(u32::try_from(s).map_err(|_| Error::parse(dim_line, "s too large"))?)?;
        let cycle = Cycle::new(n)?;

        let mut tables = Vec::with_capacity(n);
        for _ in 0..n {
            let mut table = Vec::with_capacity(s * s);
            for _ in 0..s {
                let (k, row) = lines
                    .next()
                    .ok_or_else(|| Error::parse(0, "truncated protocol table"))?;
                let entries = row
                    .split_whitespace()
                    .map(|t| t.parse::<u32>().map_err(|_| Error::parse(k, format!("bad entry {t:?}"))))
                    .collect::<Result<Vec<_>>>()?;
                if entries.len() != s {
                    return Err(Error::parse(k, format!("expected {s} entries, got {}", entries.len())));
                }
                table.extend(entries);
            }
            tables.push(table);
        }
        if let Some((k, extra)) = lines.next() {
            return Err(Error::parse(k, format!("trailing content {extra:?}")));
        }
        Protocol::new(space, cycle, tables)
    }
}

/// `Fix(P)` in lexicographic order, stored flat with stride `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedSet {
    n: usize,
    space: ColourSpace,
    data: Vec<u32>,
}

impl FixedSet {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn space(&self) -> ColourSpace {
        self.space
    }

    pub fn count(&self) -> usize {
        self.data.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn members(&self) -> impl ExactSizeIterator<Item = &[u32]> + '_ {
        self.data.chunks_exact(self.n)
    }

    pub fn colourings(&self) -> Vec<Colouring> {
        self.members().map(|m| Colouring(m.to_vec())).collect()
    }

    pub fn contains(&self, c: &[u32]) -> bool {
        if c.len() != self.n {
            return false;
        }
        let members: Vec<&[u32]> = self.members().collect();
        members.binary_search(&c).is_ok()
    }

    /// One colouring per line, entries space-separated.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.data.len() * 2);
        for m in self.members() {
            let line: Vec<String> = m.iter().map(u32::to_string).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Enumerates `Fix(P)` exactly, refusing when `s^n` exceeds `budget`.
///
/// Colourings are visited in lexicographic order; a prefix is abandoned as
/// soon as an interior vertex whose two neighbours are both assigned guesses
/// wrong. Work is split across threads by the colour of vertex 1 and the
/// per-thread results are concatenated in that order.
pub fn enumerate_fixed_set(p: &Protocol, budget: u64) -> Result<FixedSet> {
    let (n, s) = (p.n(), p.s());
    let required = checked_pow(s, n).unwrap_or(u128::MAX);
    if required > budget as u128 {
        return Err(Error::BudgetExceeded {
            what: "fixed-set enumeration",
            required,
            budget: budget as u128,
        });
    }
    let chunks: Vec<Vec<u32>> = (0..s)
        .into_par_iter()
        .map(|first| {
            let mut out = Vec::new();
            let mut c = vec![0u32; n];
            c[0] = first;
            extend_prefix(p, &mut c, 1, &mut out);
            out
        })
        .collect();
    Ok(FixedSet {
        n,
        space: p.space(),
        data: chunks.concat(),
    })
}

fn extend_prefix(p: &Protocol, c: &mut [u32], pos: usize, out: &mut Vec<u32>) {
    let n = c.len();
    if pos == n {
        let last = n - 1;
        if p.guess0(last, c[last - 1], c[0]) == c[last] && p.guess0(0, c[last], c[1]) == c[0] {
            out.extend_from_slice(c);
        }
        return;
    }
    for z in 0..p.s() {
        c[pos] = z;
        if pos >= 2 && p.guess0(pos - 1, c[pos - 2], z) != c[pos - 1] {
            continue;
        }
        extend_prefix(p, c, pos + 1, out);
    }
}

/// Brute-force `Fix(P)` by testing all `s^n` colourings. Test oracle for [`enumerate_fixed_set`].
pub fn enumerate_fixed_set_naive(p: &Protocol) -> Vec<Vec<u32>> {
    let (n, s) = (p.n(), p.s());
    let total = checked_pow(s, n).expect("naive enumeration overflow") as u64;
    let mut buf = vec![0u32; n];
    let mut out = Vec::new();
    for code in 0..total {
        crate::colour::decode_mixed(code, s, &mut buf);
        if p.is_fixed(&buf) {
            out.push(buf.clone());
        }
    }
    out
}

/// The fractional-clique-partition protocol on an odd cycle.
///
/// Vertices `2k-1, 2k` share their first coordinate, `2k, 2k+1` share their
/// second coordinate, and the second coordinate of vertex 1 is matched to the
/// first coordinate of vertex `n` whenever it is below `a`.
pub fn build_fcp(n: usize, s: u32) -> Result<Protocol> {
    let cycle = Cycle::odd(n)?;
    let space = ColourSpace::new(s)?;
    Protocol::from_fn(space, cycle, |i, left, right| {
        let (phi, psi) = (|z| space.phi_of(z), |z| space.psi_of(z));
        if i == 1 {
            // phi(c_n) < a <= b embeds into Z_b by value.
            space.pi_of(phi(right), phi(left))
        } else if i == n {
            space.pi_of(psi(right) % space.a(), psi(left))
        } else if i % 2 == 0 {
            space.pi_of(phi(left), psi(right))
        } else {
            space.pi_of(phi(right), psi(left))
        }
    })
}

/// `a * s^((n-1)/2)`, the fixed number of [`build_fcp`].
pub fn fcp_fixed_count(n: usize, space: &ColourSpace) -> u128 {
    space.a() as u128 * checked_pow(space.s(), (n - 1) / 2).unwrap_or(u128::MAX)
}

/// Forgets colours `>= s_prime`: any guess outside `Z_{s'}` becomes 0.
pub fn restrict(p: &Protocol, s_prime: u32) -> Result<Protocol> {
    if s_prime < 2 || s_prime > p.s() {
        return Err(Error::Invalid(format!(
            "restricted colour count must lie in [2, {}], got {s_prime}",
            p.s()
        )));
    }
    let space = ColourSpace::new(s_prime)?;
    Protocol::from_fn(space, p.cycle(), |i, left, right| {
        let g = p.guess0(i - 1, left, right);
        if g < s_prime {
            g
        } else {
            0
        }
    })
}

/// `s = m^2 - t` with `t >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RoundDownSpec {
    pub m: u32,
    pub t: u32,
    pub s: u32,
}

impl RoundDownSpec {
    pub fn new(m: u32, t: u32) -> Result<Self> {
        let square = m as u64 * m as u64;
        if (t as u64) > square || square - (t as u64) < 2 {
            return Err(Error::Invalid(format!(
                "m^2 - t must be at least 2 (m={m}, t={t})"
            )));
        }
        Ok(RoundDownSpec {
            m,
            t,
            s: (square - t as u64) as u32,
        })
    }

    /// Smallest `m` with `m^2 >= s`.
    pub fn covering(s: u32) -> Result<Self> {
        let mut m = 1u32;
        while (m as u64) * (m as u64) < s as u64 {
            m += 1;
        }
        RoundDownSpec::new(m, m * m - s)
    }

    /// The protocol behind the bound: the fcp protocol on `m^2` colours, restricted to `s`.
    pub fn protocol(&self, n: usize) -> Result<Protocol> {
        restrict(&build_fcp(n, self.m * self.m)?, self.s)
    }
}

/// `s^(n/2) * (1 - t n / s)`; non-positive values mean the bound is vacuous.
pub fn round_down_bound(spec: &RoundDownSpec, n: usize) -> Result<f64> {
    Cycle::odd(n)?;
    let s = spec.s as f64;
    Ok(s.powf(n as f64 / 2.0) * (1.0 - spec.t as f64 * n as f64 / s))
}
