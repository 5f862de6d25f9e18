//! Broadcast index code for odd cycles.
//!
//! With `m = (n-1)/2` the sender broadcasts
//! `phi(c_{2k-1}) + phi(c_{2k}) mod a` and `psi(c_{2k}) + psi(c_{2k+1}) mod b`
//! for `k = 1..=m`, plus the seam residue `psi(c_1) + phi(c_n) mod b`.
//! Each receiver subtracts the coordinate it can see from its neighbours.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::colour::{checked_pow, decode_mixed, ColourSpace, Colouring, Cycle};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Broadcast {
    pub phi_residues: Vec<u32>,
    pub psi_residues: Vec<u32>,
    pub seam_residue: u32,
}

fn half(n: usize) -> Result<usize> {
    Cycle::odd(n)?;
    Ok((n - 1) / 2)
}

/// `b * s^((n-1)/2)`.
pub fn message_space_size(n: usize, space: &ColourSpace) -> Result<u128> {
    let m = half(n)?;
    checked_pow(space.s(), m)
        .and_then(|p| p.checked_mul(space.b() as u128))
        .ok_or_else(|| Error::Invalid(format!("message space for n={n}, s={} overflows", space.s())))
}

pub fn encode(c: &Colouring, space: &ColourSpace, n: usize) -> Result<Broadcast> {
    let m = half(n)?;
    c.validate(n, space)?;
    Ok(encode_raw(&c.0, space, m))
}

fn encode_raw(c: &[u32], space: &ColourSpace, m: usize) -> Broadcast {
    let (a, b) = (space.a(), space.b());
    let n = c.len();
    // c[j] is vertex j + 1
    let phi_residues = (1..=m)
        .map(|k| (space.phi_of(c[2 * k - 2]) + space.phi_of(c[2 * k - 1])) % a)
        .collect();
    let psi_residues = (1..=m)
        .map(|k| (space.psi_of(c[2 * k - 1]) + space.psi_of(c[2 * k])) % b)
        .collect();
    let seam_residue = (space.psi_of(c[0]) + space.phi_of(c[n - 1])) % b;
    Broadcast {
        phi_residues,
        psi_residues,
        seam_residue,
    }
}

impl Broadcast {
    pub fn validate(&self, n: usize, space: &ColourSpace) -> Result<()> {
        let m = half(n)?;
        for (list, what) in [(&self.phi_residues, "phi residue"), (&self.psi_residues, "psi residue")] {
            if list.len() != m {
                return Err(Error::Dimension { expected: m, got: list.len() });
            }
            let bound = if what == "phi residue" { space.a() } else { space.b() };
            if let Some(&v) = list.iter().find(|&&v| v >= bound) {
                return Err(Error::OutOfRange { what, value: v as u64, bound: bound as u64 });
            }
        }
        if self.seam_residue >= space.b() {
            return Err(Error::OutOfRange {
                what: "seam residue",
                value: self.seam_residue as u64,
                bound: space.b() as u64,
            });
        }
        Ok(())
    }

    /// Little-endian mixed radix: phi residues, then psi residues, then the seam.
    pub fn pack(&self, space: &ColourSpace) -> u128 {
        let digits = self
            .phi_residues
            .iter()
            .map(|&r| (r, space.a()))
            .chain(self.psi_residues.iter().map(|&r| (r, space.b())))
            .chain(std::iter::once((self.seam_residue, space.b())));
        let mut value = 0u128;
        let mut weight = 1u128;
        for (r, radix) in digits {
            value += r as u128 * weight;
            weight *= radix as u128;
        }
        value
    }

    pub fn unpack(packed: u128, n: usize, space: &ColourSpace) -> Result<Self> {
        let total = message_space_size(n, space)?;
        if packed >= total {
            return Err(Error::Invalid(format!("packed broadcast {packed} not below {total}")));
        }
        let m = half(n)?;
        let mut rest = packed;
        let mut take = |radix: u32| {
            let r = (rest % radix as u128) as u32;
            rest /= radix as u128;
            r
        };
        let phi_residues = (0..m).map(|_| take(space.a())).collect();
        let psi_residues = (0..m).map(|_| take(space.b())).collect();
        let seam_residue = take(space.b());
        Ok(Broadcast {
            phi_residues,
            psi_residues,
            seam_residue,
        })
    }
}

impl fmt::Display for Broadcast {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[u32]| v.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
        write!(
            f,
            "phi={} psi={} seam={}",
            join(&self.phi_residues),
            join(&self.psi_residues),
            self.seam_residue
        )
    }
}

impl FromStr for Broadcast {
    type Err = Error;

    /// Parses `phi=1,0 psi=0,0 seam=2`.
    fn from_str(text: &str) -> Result<Self> {
        let mut phi = None;
        let mut psi = None;
        let mut seam = None;
        for field in text.split_whitespace() {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| Error::parse(1, format!("expected key=value, got {field:?}")))?;
            let list = || -> Result<Vec<u32>> {
                value
                    .split(',')
                    .filter(|t| !t.is_empty())
                    .map(|t| t.parse().map_err(|e| Error::parse(1, format!("bad residue {t:?}: {e}"))))
                    .collect()
            };
            match key {
                "phi" => phi = Some(list()?),
                "psi" => psi = Some(list()?),
                "seam" => {
                    seam = Some(
                        value
                            .parse()
                            .map_err(|e| Error::parse(1, format!("bad seam residue {value:?}: {e}")))?,
                    )
                }
                _ => return Err(Error::parse(1, format!("unknown field {key:?}"))),
            }
        }
        match (phi, psi, seam) {
            (Some(phi_residues), Some(psi_residues), Some(seam_residue)) => Ok(Broadcast {
                phi_residues,
                psi_residues,
                seam_residue,
            }),
            _ => Err(Error::parse(1, "need phi=, psi= and seam= fields")),
        }
    }
}

/// Colour of vertex `i` (1-based) from its neighbours' colours and the broadcast.
pub fn decode(i: usize, left: u32, right: u32, msg: &Broadcast, space: &ColourSpace, n: usize) -> Result<u32> {
    msg.validate(n, space)?;
    if i == 0 || i > n {
        return Err(Error::OutOfRange { what: "vertex", value: i as u64, bound: n as u64 + 1 });
    }
    for z in [left, right] {
        if !space.contains(z) {
            return Err(Error::OutOfRange { what: "colour", value: z as u64, bound: space.s() as u64 });
        }
    }
    Ok(decode_raw(i, left, right, msg, space, n))
}

fn decode_raw(i: usize, left: u32, right: u32, msg: &Broadcast, space: &ColourSpace, n: usize) -> u32 {
    let (a, b) = (space.a(), space.b());
    let sub = |r: u32, known: u32, modulus: u32| (r + modulus - known % modulus) % modulus;
    let phi = if i == n {
        sub(msg.seam_residue, space.psi_of(right), b)
    } else if i % 2 == 1 {
        sub(msg.phi_residues[(i - 1) / 2], space.phi_of(right), a)
    } else {
        sub(msg.phi_residues[i / 2 - 1], space.phi_of(left), a)
    };
    let psi = if i == 1 {
        sub(msg.seam_residue, space.phi_of(left), b)
    } else if i.is_multiple_of(2) {
        sub(msg.psi_residues[i / 2 - 1], space.psi_of(right), b)
    } else {
        sub(msg.psi_residues[(i - 3) / 2], space.psi_of(left), b)
    };
    space.pi_of(phi, psi)
}

/// Every receiver of `c` decodes its own colour.
pub fn roundtrip_ok(c: &Colouring, space: &ColourSpace, n: usize) -> Result<bool> {
    let msg = encode(c, space, n)?;
    Ok((1..=n).all(|i| decode_raw(i, c.0[(i + n - 2) % n], c.0[i % n], &msg, space, n) == c.0[i - 1]))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundtripSummary {
    pub n: usize,
    pub s: u32,
    pub colourings: u128,
    pub failures: u128,
    pub distinct_messages: u128,
    pub message_space_size: u128,
}

impl fmt::Display for RoundtripSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}^{} = {} colourings, {} failures, {} distinct messages",
            self.s, self.n, self.colourings, self.failures, self.distinct_messages
        )
    }
}

/// Encodes and decodes every colouring of `C_n`, counting failures and distinct broadcasts.
pub fn exhaustive_roundtrip(n: usize, space: &ColourSpace, budget: u128) -> Result<RoundtripSummary> {
    let m = half(n)?;
    let s = space.s();
    let total = checked_pow(s, n).filter(|&t| t <= budget).ok_or(Error::BudgetExceeded {
        what: "index roundtrip",
        required: checked_pow(s, n).unwrap_or(u128::MAX),
        budget,
    })?;
    let space_size = message_space_size(n, space)?;
    let (failures, seen) = (0..total as u64)
        .into_par_iter()
        .fold(
            || (0u128, vec![false; space_size as usize]),
            |(mut fails, mut seen), code| {
                let mut c = vec![0u32; n];
                decode_mixed(code, s, &mut c);
                let msg = encode_raw(&c, space, m);
                seen[msg.pack(space) as usize] = true;
                if !(1..=n).all(|i| decode_raw(i, c[(i + n - 2) % n], c[i % n], &msg, space, n) == c[i - 1]) {
                    fails += 1;
                }
                (fails, seen)
            },
        )
        .reduce(
            || (0, vec![false; space_size as usize]),
            |(f1, mut s1), (f2, s2)| {
                s1.iter_mut().zip(s2).for_each(|(x, y)| *x |= y);
                (f1 + f2, s1)
            },
        );
    Ok(RoundtripSummary {
        n,
        s,
        colourings: total,
        failures,
        distinct_messages: seen.iter().filter(|&&x| x).count() as u128,
        message_space_size: space_size,
    })
}
