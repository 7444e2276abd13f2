//! Exact canonical codes for pointed structures.
//!
//! Ordered partition refinement (seeded by distance from the center) followed
//! by individualisation of the first non-singleton cell. Every leaf of the
//! search tree gives a labelling; the code is the lexicographically least
//! relabelled tuple list. Refinement hashes cell signatures: a collision only
//! makes the partition coarser, and since the hash is computed from
//! isomorphism-invariant data the result stays canonical either way.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use crate::structure::Compact;

struct Graph<'a> {
    c: &'a Compact,
    inc_start: Vec<u32>,
    // (symbol, offset of the tuple in rels[symbol], position)
    inc: Vec<(u32, u32, u32)>,
    nbr_start: Vec<u32>,
    nbr: Vec<u32>,
}

impl<'a> Graph<'a> {
    fn new(c: &'a Compact) -> Self {
        let n = c.n as usize;
        let mut deg = vec![0u32; n + 1];
        for (s, rel) in c.rels.iter().enumerate() {
            let _ = s;
            for &e in rel {
                deg[e as usize + 1] += 1;
            }
        }
        for i in 0..n {
            deg[i + 1] += deg[i];
        }
        let inc_start = deg.clone();
        let mut fill = deg;
        let mut inc = vec![(0, 0, 0); *inc_start.last().unwrap() as usize];
        let mut nbrs: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (s, rel) in c.rels.iter().enumerate() {
            let a = c.arities[s];
            for (t, tuple) in rel.chunks_exact(a).enumerate() {
                for (p, &e) in tuple.iter().enumerate() {
                    let slot = &mut fill[e as usize];
                    inc[*slot as usize] = (s as u32, (t * a) as u32, p as u32);
                    *slot += 1;
                    for &f in tuple {
                        if f != e {
                            nbrs[e as usize].push(f);
                        }
                    }
                }
            }
        }
        let mut nbr_start = Vec::with_capacity(n + 1);
        let mut nbr = Vec::new();
        nbr_start.push(0);
        for mut v in nbrs {
            v.sort_unstable();
            v.dedup();
            nbr.extend(v);
            nbr_start.push(nbr.len() as u32);
        }
        Graph {
            c,
            inc_start,
            inc,
            nbr_start,
            nbr,
        }
    }

    fn incidences(&self, e: u32) -> &[(u32, u32, u32)] {
        &self.inc[self.inc_start[e as usize] as usize..self.inc_start[e as usize + 1] as usize]
    }

    fn neighbors(&self, e: u32) -> &[u32] {
        &self.nbr[self.nbr_start[e as usize] as usize..self.nbr_start[e as usize + 1] as usize]
    }
}

#[derive(Clone)]
struct Partition {
    perm: Vec<u32>,
    /// start index of the cell containing each element
    cell: Vec<u32>,
    /// end (exclusive) of the cell starting at each index
    end: Vec<u32>,
    /// first index that might begin a non-singleton cell
    hint: u32,
}

impl Partition {
    fn initial(keys: &[u32]) -> Self {
        let n = keys.len();
        let mut perm: Vec<u32> = (0..n as u32).collect();
        perm.sort_by_key(|&e| (keys[e as usize], e));
        let mut cell = vec![0; n];
        let mut end = vec![0; n];
        let mut i = 0;
        while i < n {
            let mut j = i;
            while j < n && keys[perm[j] as usize] == keys[perm[i] as usize] {
                j += 1;
            }
            for k in i..j {
                cell[perm[k] as usize] = i as u32;
            }
            end[i] = j as u32;
            i = j;
        }
        Partition {
            perm,
            cell,
            end,
            hint: 0,
        }
    }

    fn first_nonsingleton(&mut self) -> Option<u32> {
        let n = self.perm.len() as u32;
        let mut i = self.hint;
        while i < n {
            let e = self.end[i as usize];
            if e - i > 1 {
                self.hint = i;
                return Some(i);
            }
            i = e;
        }
        self.hint = n;
        None
    }
}

fn signature(g: &Graph, p: &Partition, e: u32, scratch: &mut Vec<u64>) -> u64 {
    scratch.clear();
    for &(s, off, pos) in g.incidences(e) {
        let a = g.c.arities[s as usize];
        let tuple = &g.c.rels[s as usize][off as usize..off as usize + a];
        let mut h = DefaultHasher::new();
        (s, pos).hash(&mut h);
        for &x in tuple {
            p.cell[x as usize].hash(&mut h);
        }
        scratch.push(h.finish());
    }
    scratch.sort_unstable();
    let mut h = DefaultHasher::new();
    scratch.hash(&mut h);
    h.finish()
}

/// Refines `p` to a stable partition. `dirty` lists elements whose signature
/// may have changed.
fn refine(g: &Graph, p: &mut Partition, mut dirty: Vec<u32>) {
    let n = p.perm.len();
    let mut mark = vec![false; n];
    let mut scratch = Vec::new();
    let mut sigs: Vec<(u64, u32)> = Vec::new();
    loop {
        let mut cells: Vec<u32> = dirty
            .iter()
            .map(|&e| p.cell[e as usize])
            .filter(|&c| p.end[c as usize] - c > 1)
            .collect();
        cells.sort_unstable();
        cells.dedup();
        dirty.clear();
        if cells.is_empty() {
            return;
        }
        // Signatures for all affected cells are computed against the partition
        // as it stood at the start of the round.
        let mut splits: Vec<(u32, Vec<(u64, u32)>)> = Vec::new();
        for &c in &cells {
            let end = p.end[c as usize];
            sigs.clear();
            for k in c..end {
                let e = p.perm[k as usize];
                sigs.push((signature(g, p, e, &mut scratch), e));
            }
            if sigs.iter().all(|s| s.0 == sigs[0].0) {
                continue;
            }
            sigs.sort_unstable_by_key(|s| s.0);
            splits.push((c, sigs.clone()));
        }
        if splits.is_empty() {
            return;
        }
        for (c, sorted) in splits {
            let mut start = c as usize;
            for k in 0..sorted.len() {
                let idx = c as usize + k;
                p.perm[idx] = sorted[k].1;
                if k > 0 && sorted[k].0 != sorted[k - 1].0 {
                    p.end[start] = idx as u32;
                    start = idx;
                }
                let e = sorted[k].1;
                if p.cell[e as usize] != start as u32 {
                    p.cell[e as usize] = start as u32;
                    for &f in g.neighbors(e) {
                        if !mark[f as usize] {
                            mark[f as usize] = true;
                            dirty.push(f);
                        }
                    }
                }
            }
            p.end[start] = c as usize as u32 + sorted.len() as u32;
        }
        for &f in &dirty {
            mark[f as usize] = false;
        }
    }
}

fn leaf_code(g: &Graph, p: &Partition) -> Vec<u32> {
    let c = g.c;
    let mut label = vec![0u32; c.n as usize];
    for (i, &e) in p.perm.iter().enumerate() {
        label[e as usize] = i as u32;
    }
    let mut code = Vec::with_capacity(1 + c.rels.iter().map(|r| r.len() + 1).sum::<usize>());
    code.push(c.n);
    for (s, rel) in c.rels.iter().enumerate() {
        let a = c.arities[s];
        let mut tuples: Vec<&[u32]> = Vec::new();
        let relabelled: Vec<u32> = rel.iter().map(|&e| label[e as usize]).collect();
        tuples.extend(relabelled.chunks_exact(a));
        tuples.sort_unstable();
        code.push(tuples.len() as u32);
        for t in tuples {
            code.extend_from_slice(t);
        }
    }
    code
}

fn search(g: &Graph, mut p: Partition, best: &mut Option<Vec<u32>>) {
    let Some(c) = p.first_nonsingleton() else {
        let code = leaf_code(g, &p);
        if best.as_ref().is_none_or(|b| code < *b) {
            *best = Some(code);
        }
        return;
    };
    let end = p.end[c as usize];
    let members: Vec<u32> = p.perm[c as usize..end as usize].to_vec();
    let mut dirty: Vec<u32> = members.iter().flat_map(|&m| g.neighbors(m).iter().copied()).collect();
    dirty.sort_unstable();
    dirty.dedup();
    for &v in &members {
        let mut q = p.clone();
        // v becomes the singleton cell {v} at position c, the rest follow.
        let at = q.perm[c as usize..end as usize].iter().position(|&x| x == v).unwrap() + c as usize;
        q.perm.swap(c as usize, at);
        q.end[c as usize] = c + 1;
        q.end[c as usize + 1] = end;
        for k in c + 1..end {
            let e = q.perm[k as usize];
            q.cell[e as usize] = c + 1;
        }
        q.cell[v as usize] = c;
        refine(g, &mut q, dirty.clone());
        search(g, q, best);
    }
}

/// Canonical code of a pointed compact structure (center = element 0).
pub fn canonical_code(c: &Compact) -> Vec<u32> {
    if c.n == 0 {
        return vec![0];
    }
    let g = Graph::new(c);
    // distance from the center; element 0 is the only one at distance 0
    let mut p = Partition::initial(&c.dist);
    let all: Vec<u32> = (0..c.n).collect();
    refine(&g, &mut p, all);
    let mut best = None;
    search(&g, p, &mut best);
    best.expect("search reaches at least one leaf")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn compact(n: u32, dist: Vec<u32>, arities: Vec<usize>, rels: Vec<Vec<u32>>) -> Compact {
        Compact { n, dist, arities, rels }
    }

    #[test]
    fn relabelling_does_not_change_code() {
        // path 1 - 0 - 2 - 3 with a colour on 3
        let a = compact(4, vec![0, 1, 1, 2], vec![2, 1], vec![vec![1, 0, 0, 2, 2, 3], vec![3]]);
        // the same, but with 1 and 2 swapped
        let b = compact(4, vec![0, 1, 1, 2], vec![2, 1], vec![vec![2, 0, 0, 1, 1, 3], vec![3]]);
        assert_eq!(canonical_code(&a), canonical_code(&b));
    }

    #[test]
    fn center_matters() {
        // directed path 0 -> 1 -> 2, pointed at the start vs. at the middle
        let start = compact(3, vec![0, 1, 2], vec![2], vec![vec![0, 1, 1, 2]]);
        let middle = compact(3, vec![0, 1, 1], vec![2], vec![vec![1, 0, 0, 2]]);
        assert_ne!(canonical_code(&start), canonical_code(&middle));
    }

    #[test]
    fn symmetric_cycle() {
        // undirected 6-cycle pointed at 0 with both edge directions present
        let mut e = Vec::new();
        for i in 0..6u32 {
            let j = (i + 1) % 6;
            e.extend([i, j, j, i]);
        }
        let dist = vec![0, 1, 2, 3, 2, 1];
        let a = compact(6, dist.clone(), vec![2], vec![e.clone()]);
        let rotated: Vec<u32> = e.iter().map(|&x| (6 - x) % 6).collect();
        let b = compact(6, dist, vec![2], vec![rotated]);
        assert_eq!(canonical_code(&a), canonical_code(&b));
    }
}
