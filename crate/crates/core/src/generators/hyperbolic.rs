//! Combinatorial patches of the binary tiling of the hyperbolic half-plane.
//!
//! Tiles are `ℓ:o` (level ℓ, offset o). Each tile has one tile above it and
//! two below; `Above(t, u)` says u is the tile just above t, `Right(t, u)` says
//! u is the next tile to the right on the same level. The anchor is `0:0` and
//! its upward column U_n = `n:0` follows the address: the parent of `ℓ:o` is
//! `ℓ+1:⌊(o + b_ℓ)/2⌋` with b_ℓ = a_{ℓ+1} for ℓ ≥ 0 and b_ℓ = 0 below the
//! anchor. With this carry rule a_n = 0 means U_{n−1} is the left child of U_n.
//!
//! The patch is a cone around the anchor: level ℓ keeps the offsets within
//! ⌈W·2^(−ℓ)⌉ of the anchor column (but at least 2b), so every tile keeps
//! both children in view going down. It spans b = min(⌊m/2⌋, 2⌈log₂W⌉)
//! levels below the anchor and m − b above; the anchor's faithful radius is
//! then b, with the horizontal margin never smaller than the vertical one.

use super::AddressSequence;
use crate::error::Result;
use crate::structure::{Language, Structure, StructureBuilder};

pub fn hyperbolic_language() -> Language {
    Language::new([("Above", 2), ("Right", 2)]).expect("static language")
}

fn carry(address: &AddressSequence, level: i64) -> i64 {
    if level >= 0 {
        address.get(level as usize) as i64
    } else {
        0
    }
}

/// Offset of the parent of `level:offset`.
pub fn parent_offset(address: &AddressSequence, level: i64, offset: i64) -> i64 {
    (offset + carry(address, level)).div_euclid(2)
}

pub fn tile_id(level: i64, offset: i64) -> String {
    format!("{level}:{offset}")
}

/// Half-width of the cone at `level`, with `below` levels under the anchor.
pub fn level_half_width(half_width: u32, below: u32, level: i64) -> i64 {
    let w = half_width.max(1) as i64;
    if level <= 0 {
        w << (-level).min(40)
    } else {
        let d = 1i64 << level.min(62);
        ((w + d - 1) / d).max(2 * below as i64)
    }
}

/// Levels kept below the anchor.
pub fn levels_below(levels: u32, half_width: u32) -> u32 {
    let log = 32 - half_width.max(1).saturating_sub(1).leading_zeros();
    (levels / 2).min(2 * log)
}

pub fn gen_binary_hyperbolic(address: &AddressSequence, levels: u32, half_width: u32) -> Result<Structure> {
    address.check_range(0, 1, 2)?;
    let below = levels_below(levels, half_width);
    let lo = -(below as i64);
    let hi = levels as i64 + lo;
    let mut b = StructureBuilder::new(hyperbolic_language());
    let mut rows: Vec<(i64, Vec<u32>)> = Vec::new();
    for level in lo..=hi {
        let w = level_half_width(half_width, below, level);
        let ids = (-w..=w).map(|o| b.element(&tile_id(level, o))).collect();
        rows.push((w, ids));
    }
    let at = |level: i64, o: i64| -> Option<u32> {
        if level < lo || level > hi {
            return None;
        }
        let (w, ids) = &rows[(level - lo) as usize];
        (o.abs() <= *w).then(|| ids[(o + w) as usize])
    };
    let total = b.len();
    let mut below = vec![0u8; total];
    let mut complete = vec![true; total];
    for level in lo..=hi {
        let w = rows[(level - lo) as usize].0;
        for o in -w..=w {
            let t = at(level, o).unwrap();
            match at(level, o + 1) {
                Some(r) => b.tuple(1, &[t, r]),
                None => complete[t as usize] = false,
            }
            if at(level, o - 1).is_none() {
                complete[t as usize] = false;
            }
            match at(level + 1, parent_offset(address, level, o)) {
                Some(p) => {
                    b.tuple(0, &[t, p]);
                    below[p as usize] += 1;
                }
                None => complete[t as usize] = false,
            }
        }
    }
    for t in 0..total {
        if !complete[t] || below[t] != 2 {
            b.frontier(t as u32);
        }
    }
    Ok(b.build())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interior_tiles_have_one_parent_two_children() {
        let addr = AddressSequence::periodic(&[0, 1, 1]);
        let m = gen_binary_hyperbolic(&addr, 12, 16).unwrap();
        let above = 0;
        for t in m.elements() {
            if m.faithful_radius(t) == 0 {
                continue;
            }
            let up = m.incidence(t).iter().filter(|i| i.sym == above && i.pos == 0).count();
            let down = m.incidence(t).iter().filter(|i| i.sym == above && i.pos == 1).count();
            assert_eq!((up, down), (1, 2), "tile {}", m.name(t));
        }
    }

    #[test]
    fn anchor_column_follows_address() {
        let addr = AddressSequence::thue_morse(0, 1);
        let m = gen_binary_hyperbolic(&addr, 20, 8).unwrap();
        for n in 1..10i64 {
            let child = m.lookup(&tile_id(n - 1, 0)).unwrap();
            let parent = m.lookup(&tile_id(n, 0)).unwrap();
            assert!(m.holds(0, &[child, parent]));
            // a_n = 0: U_{n−1} is the left one of the two tiles below U_n
            let sibling_right = m.lookup(&tile_id(n - 1, 1)).unwrap();
            let left = m.holds(0, &[sibling_right, parent]);
            assert_eq!(left, addr.get(n as usize - 1) == 0, "level {n}");
        }
    }
}
