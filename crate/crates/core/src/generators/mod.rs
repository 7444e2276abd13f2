//! Windows of the example families: Sturmian colourings, functional k-ary
//! trees, the binary hyperbolic tiling, free-group Cayley balls and coloured
//! grids.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod cayley;
pub mod grid;
pub mod hyperbolic;
pub mod quadratic;
pub mod sturmian;
pub mod tree;

pub use cayley::gen_cayley_free;
pub use grid::{gen_grid, Coloring};
pub use hyperbolic::gen_binary_hyperbolic;
pub use quadratic::QuadraticIrrational;
pub use sturmian::{gen_sturmian, Orientation};
pub use tree::gen_kary_tree;

/// Infinite continuation of an address after its explicit prefix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Tail {
    Constant(u8),
    Periodic(Vec<u8>),
    /// Thue–Morse word t_0 t_1 … with 0 ↦ `zero`, 1 ↦ `one`.
    ThueMorse {
        zero: u8,
        one: u8,
    },
}

/// A finite description of an infinite sequence: explicit prefix, then tail.
/// Indexing is 0-based: entry `n` is a_{n+1} (resp. i_{n+1}).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AddressSequence {
    pub prefix: Vec<u8>,
    pub tail: Tail,
}

impl AddressSequence {
    pub fn periodic(word: &[u8]) -> Self {
        AddressSequence {
            prefix: Vec::new(),
            tail: Tail::Periodic(word.to_vec()),
        }
    }

    pub fn thue_morse(zero: u8, one: u8) -> Self {
        AddressSequence {
            prefix: Vec::new(),
            tail: Tail::ThueMorse { zero, one },
        }
    }

    pub fn constant(c: u8) -> Self {
        AddressSequence {
            prefix: Vec::new(),
            tail: Tail::Constant(c),
        }
    }

    pub fn get(&self, n: usize) -> u8 {
        if n < self.prefix.len() {
            return self.prefix[n];
        }
        let m = n - self.prefix.len();
        match &self.tail {
            Tail::Constant(c) => *c,
            Tail::Periodic(w) => w[m % w.len()],
            Tail::ThueMorse { zero, one } => {
                if m.count_ones().is_multiple_of(2) {
                    *zero
                } else {
                    *one
                }
            }
        }
    }

    pub fn take(&self, n: usize) -> Vec<u8> {
        (0..n).map(|i| self.get(i)).collect()
    }

    /// Checks that every entry that can ever occur lies in `lo..=hi`.
    pub fn check_range(&self, lo: u8, hi: u8, k: usize) -> Result<()> {
        let mut entries = self.prefix.clone();
        match &self.tail {
            Tail::Constant(c) => entries.push(*c),
            Tail::Periodic(w) => {
                if w.is_empty() {
                    return Err(Error::BadStep("empty periodic tail".into()));
                }
                entries.extend(w)
            }
            Tail::ThueMorse { zero, one } => entries.extend([*zero, *one]),
        }
        match entries.into_iter().find(|e| !(lo..=hi).contains(e)) {
            Some(entry) => Err(Error::BadAddressEntry { entry, k }),
            None => Ok(()),
        }
    }

    /// Smallest p ≥ 1 with a_n = a_{n+p} for all n ≥ |prefix|, if periodic.
    pub fn eventual_period(&self) -> Option<usize> {
        match &self.tail {
            Tail::Constant(_) => Some(1),
            Tail::Periodic(w) => {
                (1..=w.len()).find(|&p| w.len() % p == 0 && (0..w.len()).all(|i| w[i] == w[(i + p) % w.len()]))
            }
            Tail::ThueMorse { zero, one } => (zero == one).then_some(1),
        }
    }
}

fn digits(s: &str) -> Result<Vec<u8>> {
    s.split(',')
        .flat_map(|part| {
            let part = part.trim();
            if part.contains(|c: char| !c.is_ascii_digit()) || part.is_empty() {
                vec![Err(Error::BadNumber(part.to_string()))]
            } else if part.len() > 1 && !s.contains(',') {
                // "122" is shorthand for 1,2,2
                part.bytes().map(|b| Ok(b - b'0')).collect()
            } else {
                vec![part.parse::<u8>().map_err(|_| Error::BadNumber(part.to_string()))]
            }
        })
        .collect()
}

impl FromStr for AddressSequence {
    type Err = Error;

    /// `[PREFIX+]TAIL` with TAIL one of `const:C`, `periodic:W`, `thue-morse:Z,O`;
    /// digit lists may be written `1,2,2` or `122`.
    fn from_str(s: &str) -> Result<Self> {
        let (prefix, tail) = match s.split_once('+') {
            Some((p, t)) => (digits(p)?, t),
            None => (Vec::new(), s),
        };
        let bad = || Error::BadNumber(format!("address `{s}`"));
        let (kind, arg) = tail.split_once(':').ok_or_else(bad)?;
        let arg = digits(arg)?;
        let tail = match kind {
            "const" if arg.len() == 1 => Tail::Constant(arg[0]),
            "periodic" if !arg.is_empty() => Tail::Periodic(arg),
            "thue-morse" if arg.len() == 2 => Tail::ThueMorse {
                zero: arg[0],
                one: arg[1],
            },
            _ => return Err(bad()),
        };
        Ok(AddressSequence { prefix, tail })
    }
}
