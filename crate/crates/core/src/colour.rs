//! Colour spaces, the canonical factorization bijection and cycle indexing.
//!
//! A colour space `Z_s` is split as `Z_a x Z_b` with `a` the greatest divisor
//! of `s` not exceeding `sqrt(s)`. The bijection is mixed radix:
//! `phi(z) = z / b`, `psi(z) = z % b`, `pi(x, y) = x * b + y`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// The number of colours `s` together with its factorization `s = a * b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct ColourSpace {
    s: u32,
    a: u32,
    b: u32,
}

impl ColourSpace {
    pub fn new(s: u32) -> Result<Self> {
        if s < 2 {
            return Err(Error::TooFewColours(s as u64));
        }
        let mut a = 1;
        let mut d = 1u32;
        while (d as u64) * (d as u64) <= s as u64 {
            if s.is_multiple_of(d) {
                a = d;
            }
            d += 1;
        }
        Ok(ColourSpace { s, a, b: s / a })
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn a(&self) -> u32 {
        self.a
    }

    pub fn b(&self) -> u32 {
        self.b
    }

    pub fn is_perfect_square(&self) -> bool {
        self.a == self.b
    }

    fn check_colour(&self, z: u32) -> Result<()> {
        if z >= self.s {
            return Err(Error::OutOfRange {
                what: "colour",
                value: z as u64,
                bound: self.s as u64,
            });
        }
        Ok(())
    }

    /// First coordinate of `z`, an element of `Z_a`.
    pub fn phi(&self, z: u32) -> Result<u32> {
        self.check_colour(z)?;
        Ok(self.phi_of(z))
    }

    /// Second coordinate of `z`, an element of `Z_b`.
    pub fn psi(&self, z: u32) -> Result<u32> {
        self.check_colour(z)?;
        Ok(self.psi_of(z))
    }

    /// Inverse of `phi x psi`.
    pub fn pi(&self, x: u32, y: u32) -> Result<u32> {
        if x >= self.a {
            return Err(Error::OutOfRange {
                what: "first coordinate",
                value: x as u64,
                bound: self.a as u64,
            });
        }
        if y >= self.b {
            return Err(Error::OutOfRange {
                what: "second coordinate",
                value: y as u64,
                bound: self.b as u64,
            });
        }
        Ok(self.pi_of(x, y))
    }

    #[inline]
    pub(crate) fn phi_of(&self, z: u32) -> u32 {
        z / self.b
    }

    #[inline]
    pub(crate) fn psi_of(&self, z: u32) -> u32 {
        z % self.b
    }

    #[inline]
    pub(crate) fn pi_of(&self, x: u32, y: u32) -> u32 {
        x * self.b + y
    }

    pub fn contains(&self, z: u32) -> bool {
        z < self.s
    }
}

/// Shorthand for [`ColourSpace::new`].
pub fn factorize(s: u32) -> Result<ColourSpace> {
    ColourSpace::new(s)
}

/// The cycle graph `C_n`. Vertices are 1-based in every public signature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Cycle {
    n: usize,
}

impl Cycle {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::CycleTooShort(n));
        }
        Ok(Cycle { n })
    }

    pub fn odd(n: usize) -> Result<Self> {
        let c = Cycle::new(n)?;
        if n.is_multiple_of(2) {
            return Err(Error::EvenCycle(n));
        }
        Ok(c)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `(i - 1, i + 1)` modulo `n`, mapped back into `1..=n`.
    pub fn neighbours(&self, i: usize) -> Result<(usize, usize)> {
        if i == 0 || i > self.n {
            return Err(Error::OutOfRange {
                what: "vertex index",
                value: i as u64,
                bound: self.n as u64 + 1,
            });
        }
        let i0 = i - 1;
        Ok((self.left0(i0) + 1, self.right0(i0) + 1))
    }

    #[inline]
    pub(crate) fn left0(&self, i0: usize) -> usize {
        (i0 + self.n - 1) % self.n
    }

    #[inline]
    pub(crate) fn right0(&self, i0: usize) -> usize {
        (i0 + 1) % self.n
    }

    /// Reduces an arbitrary (possibly out-of-range) 1-based index modulo `n`, 0-based.
    #[inline]
    pub(crate) fn wrap0(&self, i: i64) -> usize {
        (i - 1).rem_euclid(self.n as i64) as usize
    }
}

/// An assignment of a colour to every vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Colouring(pub Vec<u32>);

impl Colouring {
    pub fn new(entries: Vec<u32>, space: &ColourSpace) -> Result<Self> {
        for &z in &entries {
            space.check_colour(z)?;
        }
        Ok(Colouring(entries))
    }

    pub fn zeros(n: usize) -> Self {
        Colouring(vec![0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    /// Colour of 1-based vertex `i`.
    pub fn get(&self, i: usize) -> Option<u32> {
        i.checked_sub(1).and_then(|i0| self.0.get(i0).copied())
    }

    /// Checks length and colour range against a space.
    pub fn validate(&self, n: usize, space: &ColourSpace) -> Result<()> {
        if self.0.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: self.0.len(),
            });
        }
        for &z in &self.0 {
            space.check_colour(z)?;
        }
        Ok(())
    }
}

impl fmt::Display for Colouring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, z) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{z}")?;
        }
        Ok(())
    }
}

impl FromStr for Colouring {
    type Err = Error;

    /// Parses comma-separated (or whitespace-separated) colours.
    fn from_str(text: &str) -> Result<Self> {
        let entries = text
            .split(|ch: char| ch == ',' || ch.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<u32>()
                    .map_err(|e| Error::parse(1, format!("bad colour {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Colouring(entries))
    }
}

/// Mixed-radix encoding of a colour tuple; entry 0 is the most significant digit,
/// so integer order equals lexicographic order.
pub(crate) fn encode_mixed(entries: &[u32], s: u32) -> u64 {
    entries
        .iter()
        .fold(0u64, |acc, &z| acc * s as u64 + z as u64)
}

pub(crate) fn decode_mixed(mut code: u64, s: u32, out: &mut [u32]) {
    for slot in out.iter_mut().rev() {
        *slot = (code % s as u64) as u32;
        code /= s as u64;
    }
}

/// `s^n` as `u128`, or `None` on overflow.
pub(crate) fn checked_pow(s: u32, n: usize) -> Option<u128> {
    let mut acc: u128 = 1;
    for _ in 0..n {
        acc = acc.checked_mul(s as u128)?;
    }
    Some(acc)
}
