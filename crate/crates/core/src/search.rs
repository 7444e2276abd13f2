//! Center-rooted layered matching between two pointed structures.
//!
//! Elements are assigned in BFS order from the source center; each image is
//! drawn from the Gaifman neighbours of an already mapped parent at the same
//! distance from the target center. A tuple is checked (in both directions)
//! as soon as all of its members are assigned, so a map defined on B(a,d) is
//! exactly a pointed isomorphism B(a,d) → B(b,d) once every layer up to d is
//! filled. The live set of partial maps can be grown one layer at a time,
//! which is the finite truncation of the König-lemma arguments used by the
//! symmetry and rigidity code.

use std::collections::HashMap;

use crate::structure::{Elem, Structure};

const NONE: u32 = u32::MAX;

/// One side of a match: BFS layers around a center, grown on demand.
#[derive(Debug, Clone)]
pub struct Side<'m> {
    m: &'m Structure,
    layers: Vec<Vec<Elem>>,
    local: HashMap<Elem, u32>,
    elems: Vec<Elem>,
    dist: Vec<u32>,
    exhausted: bool,
}

impl<'m> Side<'m> {
    pub fn new(m: &'m Structure, center: Elem) -> Self {
        let mut local = HashMap::new();
        local.insert(center, 0);
        Side {
            m,
            layers: vec![vec![center]],
            local,
            elems: vec![center],
            dist: vec![0],
            exhausted: false,
        }
    }

    pub fn structure(&self) -> &'m Structure {
        self.m
    }

    pub fn center(&self) -> Elem {
        self.elems[0]
    }

    /// Radius reached so far.
    pub fn radius(&self) -> u32 {
        self.layers.len() as u32 - 1
    }

    pub fn layer(&self, d: u32) -> &[Elem] {
        self.layers.get(d as usize).map_or(&[], |l| l.as_slice())
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn elements(&self) -> &[Elem] {
        &self.elems
    }

    pub fn local(&self, e: Elem) -> Option<u32> {
        self.local.get(&e).copied()
    }

    pub fn dist(&self, e: Elem) -> Option<u32> {
        self.local(e).map(|l| self.dist[l as usize])
    }

    /// Adds the next BFS layer (possibly empty once the component is used up).
    pub fn grow(&mut self) {
        let d = self.layers.len() as u32;
        let mut next = Vec::new();
        if !self.exhausted {
            for &v in self.layers.last().unwrap() {
                for &w in self.m.neighbors(v) {
                    if let std::collections::hash_map::Entry::Vacant(e) = self.local.entry(w) {
                        e.insert(NONE);
                        next.push(w);
                    }
                }
            }
            next.sort_unstable();
            for &w in &next {
                self.local.insert(w, self.elems.len() as u32);
                self.elems.push(w);
                self.dist.push(d);
            }
            if next.is_empty() {
                self.exhausted = true;
            }
        }
        self.layers.push(next);
    }

    pub fn grow_to(&mut self, radius: u32) {
        while self.radius() < radius {
            self.grow();
        }
    }
}

/// A partial map between the two sides, in local indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    fwd: Vec<u32>,
    inv: Vec<u32>,
}

impl Branch {
    fn fit(&mut self, a: usize, b: usize) {
        if self.fwd.len() < a {
            self.fwd.resize(a, NONE);
        }
        if self.inv.len() < b {
            self.inv.resize(b, NONE);
        }
    }
}

/// Layered matcher from (A,a) to (B,b).
#[derive(Debug, Clone)]
pub struct Matcher<'m> {
    pub a: Side<'m>,
    pub b: Side<'m>,
}

impl<'m> Matcher<'m> {
    pub fn new(a: &'m Structure, ca: Elem, b: &'m Structure, cb: Elem) -> Self {
        Matcher {
            a: Side::new(a, ca),
            b: Side::new(b, cb),
        }
    }

    pub fn grow_to(&mut self, radius: u32) {
        self.a.grow_to(radius);
        self.b.grow_to(radius);
    }

    fn image(&self, br: &Branch, u: Elem) -> Option<Elem> {
        let l = self.a.local(u)? as usize;
        match br.fwd.get(l) {
            Some(&x) if x != NONE => Some(self.b.elems[x as usize]),
            _ => None,
        }
    }

    fn preimage(&self, br: &Branch, v: Elem) -> Option<Elem> {
        let l = self.b.local(v)? as usize;
        match br.inv.get(l) {
            Some(&x) if x != NONE => Some(self.a.elems[x as usize]),
            _ => None,
        }
    }

    /// Tuple checks for the tentative assignment u ↦ v (u, v not yet assigned).
    fn consistent(&self, br: &Branch, u: Elem, v: Elem) -> bool {
        let (ma, mb) = (self.a.m, self.b.m);
        let mut buf = Vec::new();
        let mut ok = |this: &Structure, other: &Structure, x: Elem, y: Elem, fwd: bool| -> bool {
            for inc in this.incidence(x) {
                let tuple = this.tuple_of(*inc);
                buf.clear();
                let mut complete = true;
                for &z in tuple {
                    let w = if z == x {
                        Some(y)
                    } else if fwd {
                        self.image(br, z)
                    } else {
                        self.preimage(br, z)
                    };
                    match w {
                        Some(w) => buf.push(w),
                        None => {
                            complete = false;
                            break;
                        }
                    }
                }
                if complete && !other.holds(inc.sym as usize, &buf) {
                    return false;
                }
            }
            true
        };
        if ma.incidence(u).len() != mb.incidence(v).len()
            && self.a.dist(u) < Some(self.a.radius())
            && self.b.dist(v) < Some(self.b.radius())
            && !self.a.exhausted
            && !self.b.exhausted
        {
            // interior elements of the current balls keep all of their tuples
            return false;
        }
        ok(ma, mb, u, v, true) && ok(mb, ma, v, u, false)
    }

    fn candidates(&self, br: &Branch, u: Elem) -> Vec<Elem> {
        let du = self.a.dist(u).expect("u inside the source ball");
        if du == 0 {
            return vec![self.b.center()];
        }
        let parent = self
            .a
            .m
            .neighbors(u)
            .iter()
            .copied()
            .filter(|&w| self.a.dist(w).is_some_and(|d| d + 1 == du))
            .min_by_key(|&w| self.a.m.neighbors(w).len())
            .expect("non-center element has a parent");
        let pv = self.image(br, parent).expect("parent mapped first");
        self.b
            .m
            .neighbors(pv)
            .iter()
            .copied()
            .filter(|&v| self.b.dist(v) == Some(du) && self.preimage(br, v).is_none())
            .collect()
    }

    fn assign(&self, br: &mut Branch, u: Elem, v: Elem) {
        let (lu, lv) = (self.a.local(u).unwrap(), self.b.local(v).unwrap());
        br.fwd[lu as usize] = lv;
        br.inv[lv as usize] = lu;
    }

    fn unassign(&self, br: &mut Branch, u: Elem, v: Elem) {
        let (lu, lv) = (self.a.local(u).unwrap(), self.b.local(v).unwrap());
        br.fwd[lu as usize] = NONE;
        br.inv[lv as usize] = NONE;
    }

    /// All extensions of `start` to the elements of `order` (BFS-closed:
    /// every element's parent precedes it or is already mapped). Stops after
    /// `limit` solutions.
    pub fn extend(&self, start: &Branch, order: &[Elem], limit: usize) -> Vec<Branch> {
        let mut out = Vec::new();
        let mut cur = start.clone();
        cur.fit(self.a.len(), self.b.len());
        if order.is_empty() {
            out.push(cur);
            return out;
        }
        struct Frame {
            cands: Vec<Elem>,
            next: usize,
            assigned: Option<Elem>,
        }
        let mut frames = vec![Frame {
            cands: self.candidates(&cur, order[0]),
            next: 0,
            assigned: None,
        }];
        while !frames.is_empty() {
            let depth = frames.len();
            let u = order[depth - 1];
            let f = frames.last_mut().unwrap();
            if let Some(prev) = f.assigned.take() {
                self.unassign(&mut cur, u, prev);
            }
            if f.next >= f.cands.len() {
                frames.pop();
                continue;
            }
            let v = f.cands[f.next];
            f.next += 1;
            if !self.consistent(&cur, u, v) {
                continue;
            }
            self.assign(&mut cur, u, v);
            f.assigned = Some(v);
            if depth == order.len() {
                out.push(cur.clone());
                if out.len() >= limit {
                    break;
                }
                continue;
            }
            let next = order[depth];
            let cands = self.candidates(&cur, next);
            frames.push(Frame {
                cands,
                next: 0,
                assigned: None,
            });
        }
        out
    }

    /// The root branch {a ↦ b}, if the centers are compatible.
    pub fn root(&self) -> Option<Branch> {
        let mut br = Branch {
            fwd: Vec::new(),
            inv: Vec::new(),
        };
        br.fit(self.a.len(), self.b.len());
        let (a, b) = (self.a.center(), self.b.center());
        if self.consistent(&br, a, b) {
            self.assign(&mut br, a, b);
            Some(br)
        } else {
            None
        }
    }

    /// Extends every branch by one layer. Returns `false` if the layer sizes
    /// differ (no branch can survive).
    pub fn advance(&mut self, branches: &[Branch], limit: usize) -> Option<Vec<Branch>> {
        let d = self.a.radius().max(self.b.radius()) + 1;
        self.grow_to(d);
        let la = self.a.layer(d).to_vec();
        if la.len() != self.b.layer(d).len() {
            return Some(Vec::new());
        }
        let mut out = Vec::new();
        for br in branches {
            let rest = limit.saturating_sub(out.len());
            if rest == 0 {
                return None;
            }
            let ext = self.extend(br, &la, rest + 1);
            out.extend(ext);
            if out.len() > limit {
                return None;
            }
        }
        Some(out)
    }

    /// Single pointed isomorphism B(a,h) → B(b,h), searched depth-first.
    pub fn find(&mut self, h: u32) -> Option<Branch> {
        self.grow_to(h);
        for d in 1..=h {
            if self.a.layer(d).len() != self.b.layer(d).len() {
                return None;
            }
        }
        let root = self.root()?;
        let order: Vec<Elem> = self.a.elements()[1..].to_vec();
        self.extend(&root, &order, 1).pop()
    }

    /// All pointed isomorphisms B(a,h) → B(b,h), up to `limit`.
    pub fn find_all(&mut self, h: u32, limit: usize) -> Vec<Branch> {
        self.grow_to(h);
        for d in 1..=h {
            if self.a.layer(d).len() != self.b.layer(d).len() {
                return Vec::new();
            }
        }
        let Some(root) = self.root() else {
            return Vec::new();
        };
        let order: Vec<Elem> = self.a.elements()[1..].to_vec();
        self.extend(&root, &order, limit)
    }

    /// Global element pairs of a branch, in source BFS order.
    pub fn pairs(&self, br: &Branch) -> Vec<(Elem, Elem)> {
        br.fwd
            .iter()
            .enumerate()
            .filter(|(_, &x)| x != NONE)
            .map(|(i, &x)| (self.a.elems[i], self.b.elems[x as usize]))
            .collect()
    }

    pub fn image_of(&self, br: &Branch, u: Elem) -> Option<Elem> {
        self.image(br, u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{Language, StructureBuilder};

    fn cycle(n: usize, colored: &[usize]) -> Structure {
        let lang = Language::new([("Succ", 2), ("Black", 1)]).unwrap();
        let mut b = StructureBuilder::new(lang);
        let ids: Vec<Elem> = (0..n).map(|i| b.element(&format!("{i:02}"))).collect();
        for i in 0..n {
            b.tuple(0, &[ids[i], ids[(i + 1) % n]]);
        }
        for &c in colored {
            b.tuple(1, &[ids[c]]);
        }
        b.build()
    }

    #[test]
    fn rotations_of_a_cycle() {
        let m = cycle(6, &[0, 2, 4]);
        let e = |s: &str| m.lookup(s).unwrap();
        let mut mt = Matcher::new(&m, e("00"), &m, e("02"));
        let br = mt.find(3).expect("rotation by 2");
        let pairs = mt.pairs(&br);
        assert!(pairs.contains(&(e("01"), e("03"))));
        let mut mt = Matcher::new(&m, e("00"), &m, e("01"));
        assert!(mt.find(0).is_none());
    }

    #[test]
    fn layered_growth_keeps_single_branch() {
        let m = cycle(10, &[]);
        let e = |s: &str| m.lookup(s).unwrap();
        let mut mt = Matcher::new(&m, e("00"), &m, e("03"));
        let mut live = vec![mt.root().unwrap()];
        for _ in 0..5 {
            live = mt.advance(&live, 16).unwrap();
            assert_eq!(live.len(), 1);
        }
    }
}
