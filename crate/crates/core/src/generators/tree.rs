//! Functional k-ary trees: every node has one parent and k children, and
//! `P_i(y, z)` says that z is the i-th child of y.
//!
//! The window is B(anchor, core) together with the ancestor spine up to
//! `depth` levels and the spine nodes' children. The anchor's address i_1 i_2 …
//! lists, going up, the child index of each spine node under the next one.
//! Node ids are `j/path`: climb j levels from the anchor, then follow `path`
//! (child indices, top-down, dot-separated when k > 9).

use std::collections::HashMap;

use super::AddressSequence;
use crate::error::{Error, Result};
use crate::structure::{Elem, Language, Structure, StructureBuilder};

pub fn tree_language(k: usize) -> Language {
    Language::new((1..=k).map(|i| (format!("P{i}"), 2))).expect("static language")
}

fn child_id(parent: &str, i: usize, k: usize) -> String {
    let sep = if parent.ends_with('/') || k <= 9 { "" } else { "." };
    format!("{parent}{sep}{i}")
}

/// Default core radius, keeping default windows small.
pub const DEFAULT_CORE: u32 = 12;

pub fn gen_kary_tree(k: usize, address: &AddressSequence, depth: u32, core: Option<u32>) -> Result<Structure> {
    if k < 2 {
        return Err(Error::BadAddressEntry { entry: 0, k });
    }
    address.check_range(1, k.min(u8::MAX as usize) as u8, k)?;
    let core = core.unwrap_or(DEFAULT_CORE.min(depth)).min(depth);
    let mut b = StructureBuilder::new(tree_language(k));
    let mut children: HashMap<Elem, usize> = HashMap::new();
    let mut has_parent: Vec<Elem> = Vec::new();

    let spine: Vec<Elem> = (0..=depth).map(|j| b.element(&format!("{j}/"))).collect();
    for j in 1..=depth as usize {
        let i = address.get(j - 1) as usize;
        b.tuple(i - 1, &[spine[j], spine[j - 1]]);
        *children.entry(spine[j]).or_default() += 1;
        has_parent.push(spine[j - 1]);
    }
    // Non-spine subtrees: below a_j, to depth core − j (leaves only above the core).
    for j in 0..=depth as usize {
        let below = if j as u32 <= core { core - j as u32 } else { 1 };
        if below == 0 {
            continue;
        }
        let spine_child = (j > 0).then(|| address.get(j - 1) as usize);
        let root = format!("{j}/");
        let mut frontier = vec![(spine[j], root, 0u32)];
        while let Some((node, name, d)) = frontier.pop() {
            if d == below {
                continue;
            }
            for i in 1..=k {
                if d == 0 && Some(i) == spine_child {
                    continue;
                }
                let cname = child_id(&name, i, k);
                let c = b.element(&cname);
                b.tuple(i - 1, &[node, c]);
                *children.entry(node).or_default() += 1;
                has_parent.push(c);
                frontier.push((c, cname, d + 1));
            }
        }
    }
    let mut parented = vec![false; b.len()];
    for p in has_parent {
        parented[p as usize] = true;
    }
    for e in 0..b.len() as Elem {
        if !parented[e as usize] || children.get(&e).copied().unwrap_or(0) < k {
            b.frontier(e);
        }
    }
    Ok(b.build())
}

/// The address i_1 i_2 … of `node` read off the window (as far as it goes).
pub fn read_address(m: &Structure, node: Elem, max_len: usize) -> Vec<u8> {
    let mut out = Vec::new();
    let mut cur = node;
    'up: while out.len() < max_len {
        for inc in m.incidence(cur) {
            if inc.pos == 1 {
                out.push(inc.sym as u8 + 1);
                cur = m.tuple_of(*inc)[0];
                continue 'up;
            }
        }
        break;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::equational_check;

    /// Size of B(x, h) in the infinite tree, counted by walking up j levels
    /// and then down into the other children.
    fn ball_size_oracle(k: u64, h: u32) -> u64 {
        let full = |d: u32| -> u64 { (0..=d).map(|i| k.pow(i)).sum() };
        let mut total = full(h);
        for j in 1..=h {
            // a_j plus subtrees of its k−1 other children, depth h − j − 1
            total += 1;
            if h > j {
                total += (k - 1) * full(h - j - 1);
            }
        }
        total
    }

    #[test]
    fn interior_ball_sizes() {
        let addr = AddressSequence::constant(1);
        for d in 1..=4 {
            let m = gen_kary_tree(2, &addr, d, None).unwrap();
            let x = m.lookup("0/").unwrap();
            assert_eq!(m.faithful_radius(x), d);
            assert_eq!(m.ball(x, d).unwrap().len() as u64, ball_size_oracle(2, d));
        }
        let m = gen_kary_tree(2, &addr, 1, None).unwrap();
        assert_eq!(m.ball(m.lookup("0/").unwrap(), 1).unwrap().len(), 4);
        let m = gen_kary_tree(2, &addr, 2, None).unwrap();
        assert_eq!(m.ball(m.lookup("0/").unwrap(), 2).unwrap().len(), 10);
    }

    #[test]
    fn address_is_readable() {
        let addr = AddressSequence::thue_morse(1, 2);
        let m = gen_kary_tree(2, &addr, 40, Some(3)).unwrap();
        let x = m.lookup("0/").unwrap();
        assert_eq!(read_address(&m, x, 40), addr.take(40));
    }

    #[test]
    fn ternary_trees_are_equational() {
        let m = gen_kary_tree(3, &"periodic:312".parse().unwrap(), 6, None).unwrap();
        assert!(equational_check(&m).holds());
    }

    #[test]
    fn bad_entries() {
        assert!(matches!(
            gen_kary_tree(2, &AddressSequence::constant(3), 3, None),
            Err(Error::BadAddressEntry { entry: 3, k: 2 })
        ));
    }
}
