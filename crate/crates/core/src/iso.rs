//! Pointed isomorphism, ball-type census, the local isomorphism property and
//! the extraction preorder at a fixed radius.

use std::collections::{HashMap, HashSet, VecDeque};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::refine::canonical_code;
use crate::search::Matcher;
use crate::structure::{Elem, PointedBall, Structure, INFINITE};

/// An injective element map whose tuple preservation (both directions) has
/// been checked on its domain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartialIso {
    /// (source, target) pairs sorted by source element.
    pub map: Vec<(Elem, Elem)>,
    pub source_anchor: Elem,
    pub target_anchor: Elem,
    /// The domain contains B(source_anchor, certified_radius).
    pub certified_radius: u32,
}

impl PartialIso {
    pub fn new(mut map: Vec<(Elem, Elem)>, source_anchor: Elem, target_anchor: Elem, certified_radius: u32) -> Self {
        map.sort_unstable();
        PartialIso {
            map,
            source_anchor,
            target_anchor,
            certified_radius,
        }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, u: Elem) -> Option<Elem> {
        self.map.binary_search_by_key(&u, |p| p.0).ok().map(|i| self.map[i].1)
    }

    pub fn as_hashmap(&self) -> HashMap<Elem, Elem> {
        self.map.iter().copied().collect()
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().all(|(a, b)| a == b)
    }

    /// Element names of the pairs, for reports.
    pub fn named(&self, source: &Structure, target: &Structure) -> Vec<(String, String)> {
        self.map
            .iter()
            .map(|&(a, b)| (source.name(a).to_string(), target.name(b).to_string()))
            .collect()
    }

    pub fn verify(&self, source: &Structure, target: &Structure) -> Result<()> {
        verify_map(source, target, &self.map)
    }
}

/// Independent check that `pairs` is injective and preserves and reflects
/// every tuple whose members all lie in the domain (resp. image).
pub fn verify_map(source: &Structure, target: &Structure, pairs: &[(Elem, Elem)]) -> Result<()> {
    if source.language() != target.language() {
        return Err(Error::LanguageMismatch);
    }
    let fwd: HashMap<Elem, Elem> = pairs.iter().copied().collect();
    let inv: HashMap<Elem, Elem> = pairs.iter().map(|&(a, b)| (b, a)).collect();
    if fwd.len() != pairs.len() || inv.len() != pairs.len() {
        return Err(Error::VerificationFailed("map is not injective".into()));
    }
    let check = |this: &Structure, other: &Structure, m: &HashMap<Elem, Elem>, dir: &str| -> Result<()> {
        for &x in m.keys() {
            for inc in this.incidence(x) {
                if inc.pos != 0 {
                    continue;
                }
                let tuple = this.tuple_of(*inc);
                let image: Option<Vec<Elem>> = tuple.iter().map(|z| m.get(z).copied()).collect();
                if let Some(image) = image {
                    if !other.holds(inc.sym as usize, &image) {
                        let names: Vec<&str> = tuple.iter().map(|&z| this.name(z)).collect();
                        return Err(Error::VerificationFailed(format!(
                            "{dir}: {}({}) has no image",
                            this.language().name(inc.sym as usize),
                            names.join(",")
                        )));
                    }
                }
            }
        }
        Ok(())
    };
    check(source, target, &fwd, "preservation")?;
    check(target, source, &inv, "reflection")
}

/// Canonical code of a pointed ball; equal iff the balls are pointed-isomorphic.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BallSignature {
    pub code: Vec<u8>,
}

impl BallSignature {
    fn from_words(words: &[u32]) -> Self {
        BallSignature {
            code: words.iter().flat_map(|w| w.to_le_bytes()).collect(),
        }
    }

    /// Short stable digest for reports.
    pub fn digest(&self) -> String {
        // FNV-1a, 64 bit
        let mut h: u64 = 0xcbf29ce484222325;
        for &b in &self.code {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        format!("{h:016x}")
    }
}

impl Serialize for BallSignature {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.digest())
    }
}

pub fn signature(ball: &PointedBall) -> BallSignature {
    BallSignature::from_words(&canonical_code(&ball.compact()))
}

/// Signature of (B_M(u,h),u) computed in place, without faithfulness checks.
pub fn ball_signature(m: &Structure, u: Elem, h: u32) -> BallSignature {
    BallSignature::from_words(&canonical_code(&m.local_ball(u, h).compact))
}

/// Pointed isomorphism between two extracted balls.
pub fn pointed_iso(a: &PointedBall, b: &PointedBall) -> Result<Option<PartialIso>> {
    if a.structure.language() != b.structure.language() {
        return Err(Error::LanguageMismatch);
    }
    if a.len() != b.len() || a.structure.tuple_count() != b.structure.tuple_count() {
        return Ok(None);
    }
    let h = a.radius.max(b.radius).min(a.len() as u32);
    let mut mt = Matcher::new(&a.structure, a.center, &b.structure, b.center);
    let Some(br) = mt.find(h) else {
        return Ok(None);
    };
    let pairs = mt.pairs(&br);
    if pairs.len() != a.len() {
        return Ok(None);
    }
    let iso = PartialIso::new(pairs, a.center, b.center, a.radius);
    iso.verify(&a.structure, &b.structure)?;
    Ok(Some(iso))
}

/// Pointed isomorphism (B_M(u,h),u) ≅ (B_N(v,h),v) searched inside the windows.
pub fn pointed_iso_at(m: &Structure, u: Elem, n: &Structure, v: Elem, h: u32) -> Option<PartialIso> {
    let mut mt = Matcher::new(m, u, n, v);
    let br = mt.find(h)?;
    Some(PartialIso::new(mt.pairs(&br), u, v, h))
}

#[derive(Debug, Clone, Serialize)]
pub struct CensusEntry {
    pub signature: BallSignature,
    pub multiplicity: usize,
    pub representative: Elem,
}

#[derive(Debug, Clone, Serialize)]
pub struct CensusTable {
    pub radius: u32,
    /// Sorted by signature.
    pub entries: Vec<CensusEntry>,
    /// Class index of each element, `u32::MAX` if not censused.
    #[serde(skip)]
    pub class_of: Vec<u32>,
}

impl CensusTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn censused(&self) -> usize {
        self.entries.iter().map(|e| e.multiplicity).sum()
    }

    pub fn class(&self, e: Elem) -> Option<usize> {
        match self.class_of.get(e as usize) {
            Some(&c) if c != u32::MAX => Some(c as usize),
            _ => None,
        }
    }

    pub fn find(&self, sig: &BallSignature) -> Option<usize> {
        self.entries.binary_search_by(|e| e.signature.cmp(sig)).ok()
    }

    pub fn members(&self, class: usize) -> Vec<Elem> {
        (0..self.class_of.len() as Elem)
            .filter(|&e| self.class_of[e as usize] == class as u32)
            .collect()
    }
}

/// Classifies all elements of depth ≥ h by the isomorphism type of their h-ball.
pub fn census(m: &Structure, h: u32) -> Result<CensusTable> {
    let elems = m.faithful_elements(h);
    if elems.is_empty() {
        return Err(Error::NoFaithfulElements(h));
    }
    census_of(m, h, &elems)
}

/// Census restricted to the given elements (which must be faithful at h).
pub fn census_of(m: &Structure, h: u32, elems: &[Elem]) -> Result<CensusTable> {
    let sigs: Vec<BallSignature> = elems.par_iter().map(|&e| ball_signature(m, e, h)).collect();
    let mut groups: HashMap<&BallSignature, (usize, Elem)> = HashMap::new();
    for (sig, &e) in sigs.iter().zip(elems) {
        let g = groups.entry(sig).or_insert((0, e));
        g.0 += 1;
        g.1 = g.1.min(e);
    }
    let mut entries: Vec<CensusEntry> = groups
        .into_iter()
        .map(|(sig, (multiplicity, representative))| CensusEntry {
            signature: sig.clone(),
            multiplicity,
            representative,
        })
        .collect();
    entries.sort_by(|a, b| a.signature.cmp(&b.signature));
    let index: HashMap<&BallSignature, u32> = entries
        .iter()
        .enumerate()
        .map(|(i, e)| (&e.signature, i as u32))
        .collect();
    let mut class_of = vec![u32::MAX; m.len()];
    for (sig, &e) in sigs.iter().zip(elems) {
        class_of[e as usize] = index[sig];
    }
    Ok(CensusTable {
        radius: h,
        entries,
        class_of,
    })
}

/// Multi-source BFS distances over the whole window.
pub(crate) fn distances_from_set(m: &Structure, sources: &[Elem]) -> Vec<u32> {
    let mut dist = vec![INFINITE; m.len()];
    let mut queue = VecDeque::new();
    for &s in sources {
        if dist[s as usize] != 0 {
            dist[s as usize] = 0;
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        let d = dist[v as usize];
        for &w in m.neighbors(v) {
            if dist[w as usize] == INFINITE {
                dist[w as usize] = d + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Lower bound (double sweep) on the diameter of `region` measured in the window.
fn region_spread(m: &Structure, region: &[Elem]) -> u32 {
    let Some(&start) = region.first() else {
        return 0;
    };
    let far = |from: Elem| -> (Elem, u32) {
        let d = distances_from_set(m, &[from]);
        region
            .iter()
            .map(|&e| (e, d[e as usize]))
            .filter(|p| p.1 != INFINITE)
            .max_by_key(|p| (p.1, std::cmp::Reverse(p.0)))
            .unwrap_or((from, 0))
    };
    let (a, _) = far(start);
    far(a).1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum LipOutcome {
    /// Every faithful k-ball contains a center of every h-class.
    Holds { k: u32, per_class: Vec<(Elem, u32)> },
    /// At the largest k the window can test, `witness`'s k-ball misses `class`.
    Fails { class: Elem, witness: Elem, k: u32 },
}

#[derive(Debug, Clone, Serialize)]
pub struct LipReport {
    pub h: u32,
    pub classes: usize,
    pub outcome: LipOutcome,
    /// Largest k for which two disjoint faithful k-balls fit in the window.
    pub max_testable_k: u32,
}

/// The local isomorphism property at radius h, up to the window bound.
pub fn lip_check(m: &Structure, h: u32) -> Result<LipReport> {
    let table = census(m, h)?;
    let depth = m.depths();
    let faithful = m.faithful_elements(h);
    let per_class: Vec<(Elem, u32, Vec<u32>)> = table
        .entries
        .par_iter()
        .enumerate()
        .map(|(c, entry)| {
            let occ: Vec<Elem> = faithful
                .iter()
                .copied()
                .filter(|&e| table.class_of[e as usize] == c as u32)
                .collect();
            let dist = distances_from_set(m, &occ);
            let k = faithful
                .iter()
                .map(|&v| {
                    let reach = depth[v as usize].saturating_sub(h).saturating_add(1);
                    dist[v as usize].min(reach)
                })
                .max()
                .unwrap_or(0);
            (entry.representative, k, dist)
        })
        .collect();
    let k = per_class.iter().map(|p| p.1).max().unwrap_or(0);
    let testable = |k: u32| -> bool {
        if k == 0 {
            return true;
        }
        let region: Vec<Elem> = faithful
            .iter()
            .copied()
            .filter(|&e| depth[e as usize] >= k.saturating_add(h))
            .collect();
        !region.is_empty() && region_spread(m, &region) > 2 * k
    };
    // largest testable k, by bisection on a monotone predicate
    let max_testable_k = {
        let cap = m.max_depth().unwrap_or(0).min(m.len() as u32);
        let (mut lo, mut hi) = (0u32, cap);
        while lo < hi {
            let mid = lo + (hi - lo).div_ceil(2);
            if testable(mid) {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        lo
    };
    if k <= max_testable_k {
        return Ok(LipReport {
            h,
            classes: table.len(),
            outcome: LipOutcome::Holds {
                k,
                per_class: per_class.iter().map(|p| (p.0, p.1)).collect(),
            },
            max_testable_k,
        });
    }
    let kt = max_testable_k;
    for (rep, kc, dist) in &per_class {
        if *kc <= kt {
            continue;
        }
        if let Some(&v) = faithful
            .iter()
            .find(|&&v| depth[v as usize] >= kt.saturating_add(h) && dist[v as usize] > kt)
        {
            return Ok(LipReport {
                h,
                classes: table.len(),
                outcome: LipOutcome::Fails {
                    class: *rep,
                    witness: v,
                    k: kt,
                },
                max_testable_k,
            });
        }
    }
    Err(Error::WindowExhausted(format!(
        "no certifiable recurrence radius at h={h}"
    )))
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtractionReport {
    pub h: u32,
    pub m_in_n: bool,
    pub n_in_m: bool,
    /// Representatives (in M) of classes of M missing from N.
    pub missing_in_n: Vec<Elem>,
    /// Representatives (in N) of classes of N missing from M.
    pub missing_in_m: Vec<Elem>,
    pub classes_m: usize,
    pub classes_n: usize,
    /// Raw multiplicities per shared class: (rep in M, count in M, count in N).
    /// Window-sensitive; informational only.
    pub multiplicities: Vec<(Elem, usize, usize)>,
}

/// Class-presence form of the extraction preorder at radius h, both directions.
pub fn extraction_compare(m: &Structure, n: &Structure, h: u32) -> Result<ExtractionReport> {
    if m.language() != n.language() {
        return Err(Error::LanguageMismatch);
    }
    let cm = census(m, h)?;
    let cn = census(n, h)?;
    Ok(compare_tables(&cm, &cn))
}

pub fn compare_tables(cm: &CensusTable, cn: &CensusTable) -> ExtractionReport {
    let in_n: HashMap<&BallSignature, &CensusEntry> = cn.entries.iter().map(|e| (&e.signature, e)).collect();
    let in_m: HashSet<&BallSignature> = cm.entries.iter().map(|e| &e.signature).collect();
    let missing_in_n: Vec<Elem> = cm
        .entries
        .iter()
        .filter(|e| !in_n.contains_key(&e.signature))
        .map(|e| e.representative)
        .collect();
    let missing_in_m: Vec<Elem> = cn
        .entries
        .iter()
        .filter(|e| !in_m.contains(&e.signature))
        .map(|e| e.representative)
        .collect();
    let multiplicities = cm
        .entries
        .iter()
        .filter_map(|e| {
            in_n.get(&e.signature)
                .map(|f| (e.representative, e.multiplicity, f.multiplicity))
        })
        .collect();
    ExtractionReport {
        h: cm.radius,
        m_in_n: missing_in_n.is_empty(),
        n_in_m: missing_in_m.is_empty(),
        missing_in_n,
        missing_in_m,
        classes_m: cm.len(),
        classes_n: cn.len(),
        multiplicities,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{Language, StructureBuilder};

    /// Path on -w..=w with Succ, unary Black on the listed positions.
    fn colored_path(w: i64, black: impl Fn(i64) -> bool) -> Structure {
        let lang = Language::new([("Succ", 2), ("Black", 1)]).unwrap();
        let mut b = StructureBuilder::new(lang);
        for a in -w..=w {
            let x = b.element(&a.to_string());
            if a < w {
                let y = b.element(&(a + 1).to_string());
                b.tuple(0, &[x, y]);
            }
            if black(a) {
                b.tuple(1, &[x]);
            }
        }
        let (l, r) = (b.lookup(&(-w).to_string()).unwrap(), b.lookup(&w.to_string()).unwrap());
        b.frontier(l);
        b.frontier(r);
        b.build()
    }

    #[test]
    fn census_of_plain_and_checkerboard_paths() {
        let plain = colored_path(20, |_| false);
        assert_eq!(census(&plain, 2).unwrap().len(), 1);
        let checker = colored_path(20, |a| a.rem_euclid(2) == 0);
        let t = census(&checker, 1).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.censused(), 39);
        let r = extraction_compare(&checker, &plain, 1).unwrap();
        assert!(!r.m_in_n && !r.n_in_m);
        let r = extraction_compare(&checker, &checker, 1).unwrap();
        assert!(r.m_in_n && r.n_in_m);
    }

    #[test]
    fn lip_plain_path() {
        let plain = colored_path(30, |_| false);
        for h in 0..5 {
            let r = lip_check(&plain, h).unwrap();
            assert!(matches!(r.outcome, LipOutcome::Holds { k: 0, .. }));
        }
    }

    #[test]
    fn lip_single_black_cell_fails() {
        let m = colored_path(200, |a| a == 0);
        let r = lip_check(&m, 0).unwrap();
        match r.outcome {
            LipOutcome::Fails { class, witness, k } => {
                assert_eq!(m.name(class), "0");
                let w: i64 = m.name(witness).parse().unwrap();
                assert!(w.unsigned_abs() as u32 > k);
            }
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn pointed_iso_identity_and_colors() {
        let m = colored_path(10, |a| a == 3);
        let u = m.lookup("0").unwrap();
        let b = m.ball(u, 4).unwrap();
        let iso = pointed_iso(&b, &b).unwrap().unwrap();
        assert!(iso.is_identity());
        let b0 = m.ball(m.lookup("3").unwrap(), 0).unwrap();
        let b1 = m.ball(m.lookup("2").unwrap(), 0).unwrap();
        assert!(pointed_iso(&b0, &b1).unwrap().is_none());
        assert_ne!(signature(&b0), signature(&b1));
    }
}
