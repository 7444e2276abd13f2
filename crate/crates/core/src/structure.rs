//! Languages and finite windows of relational structures.
//!
//! A [`Structure`] is a finite window of a possibly infinite structure. Elements
//! outside the frontier carry every tuple of the represented structure that
//! involves them, so the Gaifman distance to the frontier (the *depth*) bounds
//! the radius up to which balls extracted from the window are the true balls.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sentinel radius for elements of closed windows (no frontier).
pub const INFINITE: u32 = u32::MAX;

/// Index of an element inside one [`Structure`].
pub type Elem = u32;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
}

/// An ordered list of relation symbols. The order is part of the identity of
/// the language: canonical signatures and the text format both depend on it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Language {
    symbols: Vec<Symbol>,
}

impl Language {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let symbols: Vec<Symbol> = symbols
            .into_iter()
            .map(|(name, arity)| Symbol {
                name: name.into(),
                arity,
            })
            .collect();
        let mut seen = HashSet::new();
        for s in &symbols {
            if s.arity == 0 {
                return Err(Error::InvalidLanguage(format!("`{}` has arity 0", s.name)));
            }
            if !is_identifier(&s.name) {
                return Err(Error::InvalidLanguage(format!("`{}` is not an identifier", s.name)));
            }
            if !seen.insert(s.name.as_str()) {
                return Err(Error::InvalidLanguage(format!("duplicate symbol `{}`", s.name)));
            }
        }
        Ok(Language { symbols })
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s.name == name)
    }

    pub fn arity(&self, sym: usize) -> usize {
        self.symbols[sym].arity
    }

    pub fn name(&self, sym: usize) -> &str {
        &self.symbols[sym].name
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Element ids may not contain separators used by the text format.
pub(crate) fn is_element_id(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| !c.is_whitespace() && !matches!(c, '(' | ')' | ',' | '#'))
}

/// Tuples of one relation, stored flat.
#[derive(Debug, Clone)]
pub struct Relation {
    arity: usize,
    data: Vec<Elem>,
    set: HashSet<Box<[Elem]>>,
}

impl Relation {
    fn new(arity: usize, mut tuples: Vec<Vec<Elem>>) -> Self {
        tuples.sort();
        tuples.dedup();
        let mut data = Vec::with_capacity(tuples.len() * arity);
        let mut set = HashSet::with_capacity(tuples.len());
        for t in tuples {
            data.extend_from_slice(&t);
            set.insert(t.into_boxed_slice());
        }
        Relation { arity, data, set }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.arity
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn tuple(&self, t: usize) -> &[Elem] {
        &self.data[t * self.arity..(t + 1) * self.arity]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[Elem]> + '_ {
        self.data.chunks_exact(self.arity)
    }

    pub fn contains(&self, tuple: &[Elem]) -> bool {
        self.set.contains(tuple)
    }
}

/// A tuple occurrence of an element: symbol index, tuple index, position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Incidence {
    pub sym: u32,
    pub tuple: u32,
    pub pos: u32,
}

/// Raw, unchecked structure description (the input of [`validate_structure`]).
#[derive(Debug, Clone, Default)]
pub struct RawStructure {
    pub symbols: Vec<(String, usize)>,
    pub elements: Vec<String>,
    pub tuples: Vec<(String, Vec<String>)>,
    pub frontier: Vec<String>,
}

fn render_tuple(sym: &str, args: &[String]) -> String {
    format!("{}({})", sym, args.join(","))
}

/// Checks a raw description against the structure invariants and builds it.
pub fn validate_structure(raw: &RawStructure) -> Result<Structure> {
    let language = Language::new(raw.symbols.iter().map(|(n, a)| (n.clone(), *a)))?;
    let mut b = StructureBuilder::new(language);
    for e in &raw.elements {
        if !is_element_id(e) {
            return Err(Error::InvalidLanguage(format!("invalid element id `{e}`")));
        }
        b.element(e);
    }
    for (sym, args) in &raw.tuples {
        let s = b.language.index_of(sym).ok_or_else(|| Error::UnknownSymbol {
            symbol: sym.clone(),
            tuple: render_tuple(sym, args),
        })?;
        let arity = b.language.arity(s);
        if arity != args.len() {
            return Err(Error::ArityMismatch {
                symbol: sym.clone(),
                tuple: render_tuple(sym, args),
                expected: arity,
                found: args.len(),
            });
        }
        let mut ids = Vec::with_capacity(args.len());
        for a in args {
            match b.index.get(a) {
                Some(&i) => ids.push(i),
                None => {
                    return Err(Error::DanglingElement {
                        tuple: render_tuple(sym, args),
                        element: a.clone(),
                    })
                }
            }
        }
        b.tuple(s, &ids);
    }
    for f in &raw.frontier {
        match b.index.get(f) {
            Some(&i) => b.frontier(i),
            None => return Err(Error::DanglingFrontier(f.clone())),
        }
    }
    Ok(b.build())
}

/// Incremental constructor used by generators and parsers. Element ids are
/// re-sorted lexicographically on [`StructureBuilder::build`].
#[derive(Debug, Clone)]
pub struct StructureBuilder {
    language: Language,
    names: Vec<String>,
    index: HashMap<String, Elem>,
    tuples: Vec<Vec<Vec<Elem>>>,
    frontier: Vec<Elem>,
}

impl StructureBuilder {
    pub fn new(language: Language) -> Self {
        let tuples = vec![Vec::new(); language.len()];
        StructureBuilder {
            language,
            names: Vec::new(),
            index: HashMap::new(),
            tuples,
            frontier: Vec::new(),
        }
    }

    pub fn language(&self) -> &Language {
        &self.language
    }

    /// Adds an element (idempotent) and returns its provisional index.
    pub fn element(&mut self, name: &str) -> Elem {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.names.len() as Elem;
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), i);
        i
    }

    pub fn lookup(&self, name: &str) -> Option<Elem> {
        self.index.get(name).copied()
    }

    pub fn tuple(&mut self, sym: usize, args: &[Elem]) {
        debug_assert_eq!(self.language.arity(sym), args.len());
        self.tuples[sym].push(args.to_vec());
    }

    /// Adds a tuple by symbol name. Panics on unknown symbols; generator use only.
    pub fn tuple_named(&mut self, sym: &str, args: &[Elem]) {
        let s = self
            .language
            .index_of(sym)
            .unwrap_or_else(|| panic!("unknown symbol {sym}"));
        self.tuple(s, args);
    }

    pub fn frontier(&mut self, e: Elem) {
        self.frontier.push(e);
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn build(self) -> Structure {
        let n = self.names.len();
        let mut order: Vec<Elem> = (0..n as Elem).collect();
        order.sort_by(|&a, &b| self.names[a as usize].cmp(&self.names[b as usize]));
        let mut remap = vec![0; n];
        for (new, &old) in order.iter().enumerate() {
            remap[old as usize] = new as Elem;
        }
        let mut names = self.names;
        let mut sorted_names = Vec::with_capacity(n);
        for &old in &order {
            sorted_names.push(std::mem::take(&mut names[old as usize]));
        }
        let rels = self
            .tuples
            .into_iter()
            .enumerate()
            .map(|(s, ts)| {
                let ts = ts
                    .into_iter()
                    .map(|t| t.into_iter().map(|e| remap[e as usize]).collect())
                    .collect();
                Relation::new(self.language.arity(s), ts)
            })
            .collect();
        let mut frontier = vec![false; n];
        for f in self.frontier {
            frontier[remap[f as usize] as usize] = true;
        }
        Structure::assemble(self.language, sorted_names, rels, frontier)
    }
}

/// A finite window of a relational structure. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Structure {
    language: Language,
    names: Vec<String>,
    index: HashMap<String, Elem>,
    rels: Vec<Relation>,
    incidence: Vec<Vec<Incidence>>,
    adjacency: Vec<Vec<Elem>>,
    frontier: Vec<bool>,
    depth: Vec<u32>,
}

impl PartialEq for Structure {
    fn eq(&self, other: &Self) -> bool {
        self.language == other.language
            && self.names == other.names
            && self.frontier == other.frontier
            && self.rels.len() == other.rels.len()
            && self.rels.iter().zip(&other.rels).all(|(a, b)| a.data == b.data)
    }
}

impl Eq for Structure {}

impl Structure {
    fn assemble(language: Language, names: Vec<String>, rels: Vec<Relation>, frontier: Vec<bool>) -> Self {
        let n = names.len();
        let index = names.iter().enumerate().map(|(i, s)| (s.clone(), i as Elem)).collect();
        let mut incidence = vec![Vec::new(); n];
        let mut adjacency: Vec<Vec<Elem>> = vec![Vec::new(); n];
        for (s, rel) in rels.iter().enumerate() {
            for (t, tuple) in rel.iter().enumerate() {
                for (p, &e) in tuple.iter().enumerate() {
                    incidence[e as usize].push(Incidence {
                        sym: s as u32,
                        tuple: t as u32,
                        pos: p as u32,
                    });
                    for &f in tuple {
                        if f != e {
                            adjacency[e as usize].push(f);
                        }
                    }
                }
            }
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
            adj.dedup();
        }
        let depth = multi_source_bfs(&adjacency, &frontier);
        Structure {
            language,
            names,
            index,
            rels,
            incidence,
            adjacency,
            frontier,
            depth,
        }
    }

    pub fn language(&self) -> &Language {
        &self.language
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        0..self.names.len() as Elem
    }

    pub fn name(&self, e: Elem) -> &str {
        &self.names[e as usize]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn lookup(&self, name: &str) -> Option<Elem> {
        self.index.get(name).copied()
    }

    pub fn element(&self, name: &str) -> Result<Elem> {
        self.lookup(name).ok_or_else(|| Error::UnknownElement(name.to_string()))
    }

    pub fn relation(&self, sym: usize) -> &Relation {
        &self.rels[sym]
    }

    pub fn relations(&self) -> &[Relation] {
        &self.rels
    }

    pub fn tuple_count(&self) -> usize {
        self.rels.iter().map(Relation::len).sum()
    }

    pub fn incidence(&self, e: Elem) -> &[Incidence] {
        &self.incidence[e as usize]
    }

    pub fn tuple_of(&self, inc: Incidence) -> &[Elem] {
        self.rels[inc.sym as usize].tuple(inc.tuple as usize)
    }

    pub fn holds(&self, sym: usize, tuple: &[Elem]) -> bool {
        self.rels[sym].contains(tuple)
    }

    /// Gaifman neighbours (co-occurrence in some tuple), sorted.
    pub fn neighbors(&self, e: Elem) -> &[Elem] {
        &self.adjacency[e as usize]
    }

    pub fn is_frontier(&self, e: Elem) -> bool {
        self.frontier[e as usize]
    }

    pub fn frontier(&self) -> impl Iterator<Item = Elem> + '_ {
        self.elements().filter(move |&e| self.frontier[e as usize])
    }

    pub fn is_closed(&self) -> bool {
        !self.frontier.iter().any(|&f| f)
    }

    /// Distance to the nearest frontier element, [`INFINITE`] for closed windows.
    pub fn faithful_radius(&self, e: Elem) -> u32 {
        self.depth[e as usize]
    }

    pub fn depths(&self) -> &[u32] {
        &self.depth
    }

    pub fn max_depth(&self) -> Option<u32> {
        self.depth.iter().copied().max()
    }

    /// Elements whose balls of radius `h` are certified by the window.
    pub fn faithful_elements(&self, h: u32) -> Vec<Elem> {
        self.elements().filter(|&e| self.depth[e as usize] >= h).collect()
    }

    /// The deepest element; ties broken by element order.
    pub fn deepest(&self) -> Option<Elem> {
        let mut best: Option<Elem> = None;
        for e in self.elements() {
            match best {
                Some(b) if self.depth[b as usize] >= self.depth[e as usize] => {}
                _ => best = Some(e),
            }
        }
        best
    }

    /// BFS layers around `u` up to `radius` (inclusive).
    pub fn layers(&self, u: Elem, radius: u32) -> Vec<Vec<Elem>> {
        let mut seen = HashSet::new();
        seen.insert(u);
        let mut layers = vec![vec![u]];
        while (layers.len() as u32) <= radius {
            let mut next = Vec::new();
            for &v in layers.last().unwrap() {
                for &w in self.neighbors(v) {
                    if seen.insert(w) {
                        next.push(w);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            next.sort_unstable();
            layers.push(next);
        }
        layers
    }

    /// Gaifman distances from `u`, truncated at `limit`.
    pub fn distances(&self, u: Elem, limit: u32) -> HashMap<Elem, u32> {
        let mut dist = HashMap::new();
        dist.insert(u, 0);
        let mut queue = VecDeque::from([u]);
        while let Some(v) = queue.pop_front() {
            let d = dist[&v];
            if d >= limit {
                continue;
            }
            for &w in self.neighbors(v) {
                if let std::collections::hash_map::Entry::Vacant(slot) = dist.entry(w) {
                    slot.insert(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn distance(&self, u: Elem, v: Elem, limit: u32) -> Option<u32> {
        self.distances(u, limit).get(&v).copied()
    }

    /// Connectedness of the Gaifman graph.
    pub fn is_connected(&self) -> bool {
        if self.is_empty() {
            return true;
        }
        let reached = self.layers(0, INFINITE);
        reached.iter().map(Vec::len).sum::<usize>() == self.len()
    }

    /// Maximum of |B(u,1)| over elements with complete neighbourhoods.
    pub fn local_finiteness_bound(&self) -> Option<usize> {
        self.elements()
            .filter(|&e| self.depth[e as usize] >= 1)
            .map(|e| self.adjacency[e as usize].len() + 1)
            .max()
    }

    /// Induced pointed substructure on B(u,h), checked for faithfulness.
    pub fn ball(&self, u: Elem, h: u32) -> Result<PointedBall> {
        let available = self.faithful_radius(u);
        if h > available {
            return Err(Error::UnfaithfulRadius {
                element: self.name(u).to_string(),
                requested: h,
                available,
            });
        }
        Ok(self.ball_unchecked(u, h))
    }

    pub fn ball_unchecked(&self, u: Elem, h: u32) -> PointedBall {
        let local = self.local_ball(u, h);
        let mut b = StructureBuilder::new(self.language.clone());
        let ids: Vec<Elem> = local.elements.iter().map(|&g| b.element(self.name(g))).collect();
        for (s, rel) in local.compact.rels.iter().enumerate() {
            let arity = self.language.arity(s);
            for t in rel.chunks_exact(arity) {
                let args: Vec<Elem> = t.iter().map(|&l| ids[l as usize]).collect();
                b.tuple(s, &args);
            }
        }
        let structure = b.build();
        let center = structure.lookup(self.name(u)).expect("center present");
        PointedBall {
            structure,
            center,
            radius: h,
        }
    }

    /// Index-only ball used by the signature and census code.
    pub fn local_ball(&self, u: Elem, h: u32) -> LocalBall {
        let layers = self.layers(u, h);
        let mut elements = Vec::new();
        let mut dist = Vec::new();
        for (d, layer) in layers.iter().enumerate() {
            for &e in layer {
                elements.push(e);
                dist.push(d as u32);
            }
        }
        let local: HashMap<Elem, u32> = elements.iter().enumerate().map(|(i, &e)| (e, i as u32)).collect();
        let mut rels = vec![Vec::new(); self.language.len()];
        for &e in &elements {
            for inc in self.incidence(e) {
                if inc.pos != 0 {
                    continue;
                }
                let tuple = self.tuple_of(*inc);
                let mapped: Option<Vec<u32>> = tuple.iter().map(|x| local.get(x).copied()).collect();
                if let Some(m) = mapped {
                    rels[inc.sym as usize].extend(m);
                }
            }
        }
        let arities = (0..self.language.len()).map(|s| self.language.arity(s)).collect();
        LocalBall {
            elements,
            compact: Compact {
                n: dist.len() as u32,
                dist,
                arities,
                rels,
            },
        }
    }

    /// The whole connected component of `u` as a compact pointed structure.
    pub fn pointed_compact(&self, u: Elem) -> Compact {
        self.local_ball(u, INFINITE).compact
    }
}

fn multi_source_bfs(adjacency: &[Vec<Elem>], sources: &[bool]) -> Vec<u32> {
    let mut depth = vec![INFINITE; adjacency.len()];
    let mut queue = VecDeque::new();
    for (i, &s) in sources.iter().enumerate() {
        if s {
            depth[i] = 0;
            queue.push_back(i as Elem);
        }
    }
    while let Some(v) = queue.pop_front() {
        let d = depth[v as usize];
        for &w in &adjacency[v as usize] {
            if depth[w as usize] == INFINITE {
                depth[w as usize] = d + 1;
                queue.push_back(w);
            }
        }
    }
    depth
}

/// A compact pointed structure: element 0 is the center, `dist` holds the
/// distance from the center, tuples are stored flat per symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Compact {
    pub n: u32,
    pub dist: Vec<u32>,
    pub arities: Vec<usize>,
    pub rels: Vec<Vec<u32>>,
}

impl Compact {
    pub fn tuples(&self, sym: usize) -> impl Iterator<Item = &[u32]> + '_ {
        self.rels[sym].chunks_exact(self.arities[sym])
    }

    pub fn tuple_count(&self) -> usize {
        self.rels.iter().zip(&self.arities).map(|(r, a)| r.len() / a).sum()
    }
}

/// A ball extracted as a compact structure, with the global ids of its elements.
#[derive(Debug, Clone)]
pub struct LocalBall {
    pub elements: Vec<Elem>,
    pub compact: Compact,
}

/// A ball (B_M(u,h), u) as a standalone pointed structure with empty frontier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointedBall {
    pub structure: Structure,
    pub center: Elem,
    pub radius: u32,
}

impl PointedBall {
    pub fn len(&self) -> usize {
        self.structure.len()
    }

    pub fn is_empty(&self) -> bool {
        self.structure.is_empty()
    }

    pub fn compact(&self) -> Compact {
        self.structure.pointed_compact(self.center)
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::format::to_text(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize, frontier: &[usize]) -> Structure {
        let mut raw = RawStructure {
            symbols: vec![("Succ".into(), 2)],
            ..Default::default()
        };
        raw.elements = (0..n).map(|i| format!("e{i}")).collect();
        raw.tuples = (0..n - 1)
            .map(|i| ("Succ".to_string(), vec![format!("e{i}"), format!("e{}", i + 1)]))
            .collect();
        raw.frontier = frontier.iter().map(|i| format!("e{i}")).collect();
        validate_structure(&raw).unwrap()
    }

    #[test]
    fn empty_structure_is_valid() {
        let raw = RawStructure::default();
        let s = validate_structure(&raw).unwrap();
        assert!(s.is_empty());
        assert!(s.is_connected());
    }

    #[test]
    fn arity_mismatch_names_tuple() {
        let raw = RawStructure {
            symbols: vec![("Succ".into(), 2)],
            elements: vec!["e0".into(), "e1".into(), "e2".into()],
            tuples: vec![("Succ".into(), vec!["e0".into(), "e1".into(), "e2".into()])],
            frontier: vec![],
        };
        match validate_structure(&raw) {
            Err(Error::ArityMismatch { tuple, .. }) => assert_eq!(tuple, "Succ(e0,e1,e2)"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_symbol_and_dangling_element() {
        let raw = RawStructure {
            symbols: vec![("Succ".into(), 2)],
            elements: vec!["a".into()],
            tuples: vec![("Next".into(), vec!["a".into(), "a".into()])],
            frontier: vec![],
        };
        assert!(matches!(validate_structure(&raw), Err(Error::UnknownSymbol { .. })));
        let raw = RawStructure {
            tuples: vec![("Succ".into(), vec!["a".into(), "b".into()])],
            ..raw
        };
        assert!(matches!(validate_structure(&raw), Err(Error::DanglingElement { element, .. }) if element == "b"));
    }

    #[test]
    fn duplicate_tuples_collapse() {
        let raw = RawStructure {
            symbols: vec![("R".into(), 2)],
            elements: vec!["a".into(), "b".into()],
            tuples: vec![
                ("R".into(), vec!["a".into(), "b".into()]),
                ("R".into(), vec!["a".into(), "b".into()]),
            ],
            frontier: vec![],
        };
        assert_eq!(validate_structure(&raw).unwrap().tuple_count(), 1);
    }

    #[test]
    fn path_depths_match_bfs() {
        let s = path(100, &[0, 99]);
        // e99 is one step closer to e50 than e0 is
        let e50 = s.element("e50").unwrap();
        assert_eq!(s.faithful_radius(e50), 49);
        assert_eq!(s.faithful_radius(s.element("e0").unwrap()), 0);
        for i in 0..100 {
            let e = s.element(&format!("e{i}")).unwrap();
            let expected = i.min(99 - i) as u32;
            assert_eq!(s.faithful_radius(e), expected);
        }
    }

    #[test]
    fn closed_window_is_infinitely_faithful() {
        let s = path(5, &[]);
        assert_eq!(s.faithful_radius(0), INFINITE);
    }

    #[test]
    fn ball_sizes() {
        let s = path(100, &[0, 99]);
        let u = s.element("e50").unwrap();
        let b0 = s.ball(u, 0).unwrap();
        assert_eq!(b0.len(), 1);
        assert_eq!(b0.structure.tuple_count(), 0);
        let b3 = s.ball(u, 3).unwrap();
        assert_eq!(b3.len(), 7);
        assert_eq!(b3.structure.tuple_count(), 6);
        assert!(s.ball(u, 49).is_ok());
        assert!(matches!(s.ball(u, 50), Err(Error::UnfaithfulRadius { .. })));
    }

    #[test]
    fn ball_monotone() {
        let s = path(40, &[0, 39]);
        let u = s.element("e20").unwrap();
        for h in 0..19 {
            let a = s.ball(u, h).unwrap();
            let b = s.ball(u, h + 1).unwrap();
            for name in a.structure.names() {
                assert!(b.structure.lookup(name).is_some());
            }
            assert!(a.structure.tuple_count() <= b.structure.tuple_count());
        }
    }
}
