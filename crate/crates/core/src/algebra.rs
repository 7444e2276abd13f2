//! Word navigation x(R,i,j), equationality, strong commutativity, strong
//! regularity and quotients by finite automorphism groups.

use std::collections::{HashMap, HashSet};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::structure::{Elem, Language, Structure, StructureBuilder};

/// Move from position `i` to position `j` of a tuple of `symbol` (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Step {
    pub symbol: usize,
    pub i: usize,
    pub j: usize,
}

impl Step {
    pub fn new(lang: &Language, symbol: &str, i: usize, j: usize) -> Result<Self> {
        let s = lang
            .index_of(symbol)
            .ok_or_else(|| Error::BadStep(format!("unknown symbol `{symbol}`")))?;
        let a = lang.arity(s);
        if i == j || i == 0 || j == 0 || i > a || j > a {
            return Err(Error::BadStep(format!("{symbol}:{i}>{j}")));
        }
        Ok(Step {
            symbol: s,
            i: i - 1,
            j: j - 1,
        })
    }

    /// Parses `R:i>j` (1-based positions).
    pub fn parse(lang: &Language, text: &str) -> Result<Self> {
        let bad = || Error::BadStep(text.to_string());
        let (sym, pos) = text.trim().split_once(':').ok_or_else(bad)?;
        let (i, j) = pos.split_once('>').ok_or_else(bad)?;
        let i = i.trim().parse().map_err(|_| bad())?;
        let j = j.trim().parse().map_err(|_| bad())?;
        Step::new(lang, sym.trim(), i, j)
    }

    pub fn display(&self, lang: &Language) -> String {
        format!("{}:{}>{}", lang.name(self.symbol), self.i + 1, self.j + 1)
    }

    pub fn inverse(&self) -> Step {
        Step {
            symbol: self.symbol,
            i: self.j,
            j: self.i,
        }
    }
}

/// All steps of a language, in canonical order (symbol, i, j).
pub fn all_steps(lang: &Language) -> Vec<Step> {
    let mut out = Vec::new();
    for s in 0..lang.len() {
        let a = lang.arity(s);
        for i in 0..a {
            for j in 0..a {
                if i != j {
                    out.push(Step { symbol: s, i, j });
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(pub Vec<Step>);

impl Word {
    pub fn parse(lang: &Language, text: &str) -> Result<Self> {
        if text.trim().is_empty() {
            return Ok(Word::default());
        }
        text.split(',')
            .map(|t| Step::parse(lang, t))
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }

    pub fn display(&self, lang: &Language) -> String {
        self.0.iter().map(|s| s.display(lang)).collect::<Vec<_>>().join(",")
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        Word(self.0.iter().chain(&other.0).copied().collect())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|s| format!("#{}:{}>{}", s.symbol, s.i + 1, s.j + 1))
            .collect();
        f.write_str(&parts.join(","))
    }
}

/// x(R,i,j): the unique y with some R-tuple holding x at i and y at j.
pub fn apply_step(m: &Structure, x: Elem, s: Step) -> Result<Option<Elem>> {
    let mut found: Option<Elem> = None;
    for inc in m.incidence(x) {
        if inc.sym as usize != s.symbol || inc.pos as usize != s.i {
            continue;
        }
        let y = m.tuple_of(*inc)[s.j];
        match found {
            Some(z) if z != y => {
                return Err(Error::NotFunctional {
                    symbol: m.language().name(s.symbol).to_string(),
                    i: s.i + 1,
                    j: s.j + 1,
                    element: m.name(x).to_string(),
                })
            }
            _ => found = Some(y),
        }
    }
    Ok(found)
}

pub fn apply_word(m: &Structure, x: Elem, w: &Word) -> Result<Option<Elem>> {
    let mut cur = x;
    for &s in &w.0 {
        match apply_step(m, cur, s)? {
            Some(y) => cur = y,
            None => return Ok(None),
        }
    }
    Ok(Some(cur))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquationalWitness {
    pub symbol: String,
    pub i: usize,
    pub j: usize,
    pub x_tuple: Vec<String>,
    pub y_tuple: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquationalReport {
    pub tuples_scanned: usize,
    pub witness: Option<EquationalWitness>,
}

impl EquationalReport {
    pub fn holds(&self) -> bool {
        self.witness.is_none()
    }
}

/// R(x̄), R(ȳ) and x_i = y_i imply x_j = y_j, for every R, i, j.
pub fn equational_check(m: &Structure) -> EquationalReport {
    let lang = m.language();
    for s in 0..lang.len() {
        let rel = m.relation(s);
        let a = rel.arity();
        for i in 0..a {
            let mut first: HashMap<Elem, usize> = HashMap::with_capacity(rel.len());
            for t in 0..rel.len() {
                let tuple = rel.tuple(t);
                if let Some(&u) = first.get(&tuple[i]) {
                    let other = rel.tuple(u);
                    if let Some(j) = (0..a).find(|&j| other[j] != tuple[j]) {
                        let names = |tp: &[Elem]| tp.iter().map(|&e| m.name(e).to_string()).collect();
                        return EquationalReport {
                            tuples_scanned: m.tuple_count(),
                            witness: Some(EquationalWitness {
                                symbol: lang.name(s).to_string(),
                                i: i + 1,
                                j: j + 1,
                                x_tuple: names(other),
                                y_tuple: names(tuple),
                            }),
                        };
                    }
                } else {
                    first.insert(tuple[i], t);
                }
            }
        }
    }
    EquationalReport {
        tuples_scanned: m.tuple_count(),
        witness: None,
    }
}

fn require_equational(m: &Structure) -> Result<()> {
    let r = equational_check(m);
    match r.witness {
        None => Ok(()),
        Some(w) => Err(Error::NotEquational(format!(
            "{}({}) and {}({}) agree at position {} but not at {}",
            w.symbol,
            w.x_tuple.join(","),
            w.symbol,
            w.y_tuple.join(","),
            w.i,
            w.j
        ))),
    }
}

/// x·w for every word w with |w| ≤ max_len, indexed by length then by the
/// word read as a base-|steps| number.
struct WordTable {
    base: usize,
    levels: Vec<Vec<Option<Elem>>>,
}

impl WordTable {
    fn build(m: &Structure, x: Elem, steps: &[Step], max_len: usize) -> Self {
        let base = steps.len();
        let mut levels: Vec<Vec<Option<Elem>>> = vec![vec![Some(x)]];
        for _ in 0..max_len {
            let prev = levels.last().unwrap();
            let mut next = Vec::with_capacity(prev.len() * base);
            for &p in prev {
                for &s in steps {
                    // equationality was checked up front
                    next.push(p.and_then(|y| apply_step(m, y, s).ok().flatten()));
                }
            }
            levels.push(next);
        }
        WordTable { base, levels }
    }

    fn get(&self, len: usize, index: usize) -> Option<Elem> {
        self.levels[len][index]
    }

    fn concat_index(&self, v: usize, w: usize, w_len: usize) -> usize {
        v * self.base.pow(w_len as u32) + w
    }
}

fn decode(index: usize, len: usize, steps: &[Step]) -> Word {
    let base = steps.len();
    let mut out = vec![steps[0]; len];
    let mut n = index;
    for k in (0..len).rev() {
        out[k] = steps[n % base];
        n /= base;
    }
    Word(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct CommutativityWitness {
    pub anchor: String,
    pub v: String,
    pub w: String,
    pub xvw: String,
    pub xwv: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CommutativityReport {
    pub max_len: usize,
    pub anchors: usize,
    pub pairs_checked: u64,
    pub witness: Option<CommutativityWitness>,
}

impl CommutativityReport {
    pub fn holds(&self) -> bool {
        self.witness.is_none()
    }
}

/// Anchors from which every word of length ≤ max_len stays in the region
/// where the window is complete.
fn word_anchors(m: &Structure, max_len: usize) -> Vec<Elem> {
    m.faithful_elements(max_len as u32)
}

/// xvw = xwv whenever both sides exist, for |v| + |w| ≤ max_len.
pub fn strong_commutativity_check(m: &Structure, max_len: usize) -> Result<CommutativityReport> {
    require_equational(m)?;
    let steps = all_steps(m.language());
    let anchors = word_anchors(m, max_len);
    if steps.is_empty() || max_len < 2 {
        return Ok(CommutativityReport {
            max_len,
            anchors: anchors.len(),
            pairs_checked: 0,
            witness: None,
        });
    }
    let results: Vec<(u64, Option<(Elem, Word, Word, Elem, Elem)>)> = anchors
        .par_iter()
        .map(|&x| {
            let t = WordTable::build(m, x, &steps, max_len);
            let mut checked = 0u64;
            for total in 2..=max_len {
                for vl in 1..total {
                    let wl = total - vl;
                    let (nv, nw) = (steps.len().pow(vl as u32), steps.len().pow(wl as u32));
                    for v in 0..nv {
                        if t.get(vl, v).is_none() {
                            continue;
                        }
                        for w in 0..nw {
                            let a = t.get(total, t.concat_index(v, w, wl));
                            let b = t.get(total, t.concat_index(w, v, vl));
                            if let (Some(a), Some(b)) = (a, b) {
                                checked += 1;
                                if a != b {
                                    return (checked, Some((x, decode(v, vl, &steps), decode(w, wl, &steps), a, b)));
                                }
                            }
                        }
                    }
                }
            }
            (checked, None)
        })
        .collect();
    let pairs_checked = results.iter().map(|r| r.0).sum();
    let witness = results
        .into_iter()
        .find_map(|r| r.1)
        .map(|(x, v, w, a, b)| CommutativityWitness {
            anchor: m.name(x).to_string(),
            v: v.display(m.language()),
            w: w.display(m.language()),
            xvw: m.name(a).to_string(),
            xwv: m.name(b).to_string(),
        });
    Ok(CommutativityReport {
        max_len,
        anchors: anchors.len(),
        pairs_checked,
        witness,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RegularityWitness {
    pub word: String,
    /// (structure index, anchor) with xw = x
    pub fixed: (usize, String),
    /// (structure index, anchor) with yw ≠ y
    pub moved: (usize, String),
}

#[derive(Debug, Clone, Serialize)]
pub struct RegularityReport {
    pub max_len: usize,
    pub anchors: usize,
    pub witness: Option<RegularityWitness>,
}

impl RegularityReport {
    pub fn holds(&self) -> bool {
        self.witness.is_none()
    }
}

/// xw = x ⇔ yw = y across all anchors of the family, for |w| ≤ max_len.
pub fn strong_regularity_check(family: &[&Structure], max_len: usize) -> Result<RegularityReport> {
    let Some(first) = family.first() else {
        return Ok(RegularityReport {
            max_len,
            anchors: 0,
            witness: None,
        });
    };
    for m in family {
        if m.language() != first.language() {
            return Err(Error::LanguageMismatch);
        }
        require_equational(m)?;
    }
    let steps = all_steps(first.language());
    let base = steps.len();
    // per word (length, index): first fixed anchor, first moved anchor
    type Slot = (Option<(usize, Elem)>, Option<(usize, Elem)>);
    let mut status: Vec<Vec<Slot>> = (0..=max_len).map(|l| vec![(None, None); base.pow(l as u32)]).collect();
    let mut anchors = 0;
    for (mi, m) in family.iter().enumerate() {
        let xs = word_anchors(m, max_len);
        anchors += xs.len();
        let tables: Vec<(Elem, WordTable)> = xs
            .par_iter()
            .map(|&x| (x, WordTable::build(m, x, &steps, max_len)))
            .collect();
        for (x, t) in &tables {
            for (l, level) in status.iter_mut().enumerate() {
                for (w, slot) in level.iter_mut().enumerate() {
                    match t.get(l, w) {
                        Some(y) if y == *x => {
                            slot.0.get_or_insert((mi, *x));
                        }
                        Some(_) => {
                            slot.1.get_or_insert((mi, *x));
                        }
                        None => {}
                    }
                }
            }
        }
    }
    for (l, level) in status.iter().enumerate() {
        for (w, slot) in level.iter().enumerate() {
            if let (Some((fm, fx)), Some((mm, mx))) = slot {
                return Ok(RegularityReport {
                    max_len,
                    anchors,
                    witness: Some(RegularityWitness {
                        word: decode(w, l, &steps).display(first.language()),
                        fixed: (*fm, family[*fm].name(*fx).to_string()),
                        moved: (*mm, family[*mm].name(*mx).to_string()),
                    }),
                });
            }
        }
    }
    Ok(RegularityReport {
        max_len,
        anchors,
        witness: None,
    })
}

/// A permutation of the elements of a structure, `perm[x] = xσ`.
pub type Permutation = Vec<Elem>;

/// Checks that `perm` is an automorphism of the whole (closed) window.
pub fn check_automorphism(m: &Structure, perm: &[Elem]) -> Result<()> {
    if perm.len() != m.len() {
        return Err(Error::NotAutomorphism(format!(
            "map covers {} of {} elements",
            perm.len(),
            m.len()
        )));
    }
    let mut seen = vec![false; m.len()];
    for &y in perm {
        if y as usize >= m.len() || std::mem::replace(&mut seen[y as usize], true) {
            return Err(Error::NotAutomorphism("map is not a bijection".into()));
        }
    }
    for (s, rel) in m.relations().iter().enumerate() {
        for t in rel.iter() {
            let img: Vec<Elem> = t.iter().map(|&e| perm[e as usize]).collect();
            if !m.holds(s, &img) {
                let names: Vec<&str> = t.iter().map(|&e| m.name(e)).collect();
                return Err(Error::NotAutomorphism(format!(
                    "{}({}) is not preserved",
                    m.language().name(s),
                    names.join(",")
                )));
            }
        }
    }
    // a bijection of a finite set preserving every tuple also reflects them
    Ok(())
}

#[derive(Debug, Clone)]
pub struct Quotient {
    pub structure: Structure,
    /// π(x) for every element of M.
    pub surjection: Vec<Elem>,
    pub group_order: usize,
}

/// M/H for the group H generated by `generators` (closure bounded by `bound`).
pub fn quotient(m: &Structure, generators: &[Permutation], bound: usize) -> Result<Quotient> {
    if !m.is_closed() {
        return Err(Error::NonClosedWindow);
    }
    for g in generators {
        check_automorphism(m, g)?;
    }
    let n = m.len();
    let identity: Permutation = (0..n as Elem).collect();
    let mut group: HashSet<Permutation> = HashSet::new();
    group.insert(identity.clone());
    let mut frontier = vec![identity];
    while let Some(p) = frontier.pop() {
        for g in generators {
            let q: Permutation = p.iter().map(|&x| g[x as usize]).collect();
            if group.insert(q.clone()) {
                if group.len() > bound {
                    return Err(Error::GroupClosureExceedsBound(bound));
                }
                frontier.push(q);
            }
        }
    }
    // orbit of x = {xσ : σ ∈ H}; named after its least member
    let mut orbit_min: Vec<Elem> = (0..n as Elem).collect();
    for p in &group {
        for x in 0..n {
            let y = p[x] as usize;
            if orbit_min[y] > x as Elem {
                orbit_min[y] = x as Elem;
            }
        }
    }
    let mut b = StructureBuilder::new(m.language().clone());
    let surjection_names: Vec<Elem> = (0..n).map(|x| b.element(m.name(orbit_min[x]))).collect();
    for (s, rel) in m.relations().iter().enumerate() {
        for t in rel.iter() {
            let img: Vec<Elem> = t.iter().map(|&e| surjection_names[e as usize]).collect();
            b.tuple(s, &img);
        }
    }
    let q = b.build();
    let surjection: Vec<Elem> = (0..n)
        .map(|x| q.lookup(m.name(orbit_min[x])).expect("orbit element"))
        .collect();
    for (s, rel) in m.relations().iter().enumerate() {
        for t in rel.iter() {
            let img: Vec<Elem> = t.iter().map(|&e| surjection[e as usize]).collect();
            if !q.holds(s, &img) {
                return Err(Error::VerificationFailed(
                    "canonical surjection is not a homomorphism".into(),
                ));
            }
        }
    }
    Ok(Quotient {
        structure: q,
        surjection,
        group_order: group.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_grid, Coloring};

    fn lookup(m: &Structure, s: &str) -> Elem {
        m.lookup(s).unwrap()
    }

    #[test]
    fn steps_on_a_path() {
        let m = gen_grid(&[10], false, &Coloring::none()).unwrap();
        let lang = m.language();
        let fwd = Step::parse(lang, "Succ:1>2").unwrap();
        assert_eq!(apply_step(&m, lookup(&m, "4"), fwd).unwrap(), Some(lookup(&m, "5")));
        assert_eq!(apply_step(&m, lookup(&m, "0"), fwd.inverse()).unwrap(), None);
        let w = Word::parse(lang, "Succ:1>2,Succ:2>1").unwrap();
        assert_eq!(apply_word(&m, lookup(&m, "4"), &w).unwrap(), Some(lookup(&m, "4")));
        assert_eq!(
            apply_word(&m, lookup(&m, "4"), &Word::default()).unwrap(),
            Some(lookup(&m, "4"))
        );
        assert!(Step::parse(lang, "Succ:1>1").is_err());
    }

    #[test]
    fn not_functional() {
        let raw = crate::structure::RawStructure {
            symbols: vec![("R".into(), 2)],
            elements: vec!["0".into(), "1".into(), "2".into()],
            tuples: vec![
                ("R".into(), vec!["0".into(), "1".into()]),
                ("R".into(), vec!["0".into(), "2".into()]),
            ],
            frontier: vec![],
        };
        let m = crate::structure::validate_structure(&raw).unwrap();
        let s = Step::parse(m.language(), "R:1>2").unwrap();
        assert!(matches!(
            apply_step(&m, lookup(&m, "0"), s),
            Err(Error::NotFunctional { .. })
        ));
        let r = equational_check(&m);
        let w = r.witness.unwrap();
        assert_eq!((w.i, w.j), (1, 2));
        assert!(matches!(
            strong_commutativity_check(&m, 2),
            Err(Error::NotEquational(_))
        ));
    }

    #[test]
    fn cycles_violate_regularity() {
        let c5 = gen_grid(&[5], true, &Coloring::none()).unwrap();
        let c7 = gen_grid(&[7], true, &Coloring::none()).unwrap();
        let r = strong_regularity_check(&[&c5, &c7], 5).unwrap();
        let w = r.witness.expect("violation");
        assert_eq!(w.word, "Succ:1>2,Succ:1>2,Succ:1>2,Succ:1>2,Succ:1>2");
        assert_eq!(w.fixed.0, 0);
        assert_eq!(w.moved.0, 1);
    }

    #[test]
    fn quotient_of_a_cycle() {
        let m = gen_grid(&[12], true, &Coloring::none()).unwrap();
        let rot: Permutation = (0..12)
            .map(|i| {
                let name: i64 = m.name(i).parse().unwrap();
                lookup(&m, &((name + 4) % 12).to_string())
            })
            .collect();
        let q = quotient(&m, &[rot], 1000).unwrap();
        assert_eq!(q.structure.len(), 4);
        assert_eq!(q.structure.relation(0).len(), 4);
        assert_eq!(q.group_order, 3);
        let id: Permutation = (0..12).collect();
        let q = quotient(&m, &[id], 10).unwrap();
        assert_eq!(q.structure.len(), 12);
        let open = gen_grid(&[12], false, &Coloring::none()).unwrap();
        assert!(matches!(quotient(&open, &[], 10), Err(Error::NonClosedWindow)));
    }
}
