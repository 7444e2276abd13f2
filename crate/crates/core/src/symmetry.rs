//! Automorphism-approximants by layered (König) growth, periods and the
//! periodicity rank, and extension of partial isomorphisms.
//!
//! Every verdict is relative to the window: a candidate is only grown while
//! both centers are faithful, so a branch that dies is dead for good (a
//! pointed isomorphism of t-balls restricts to every smaller radius), while a
//! branch alive at the window edge is reported as such.

use std::collections::{BTreeSet, HashMap, HashSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{all_steps, equational_check, Step, Word};
use crate::error::{Error, Result};
use crate::iso::{census_of, extraction_compare, verify_map, CensusTable, PartialIso};
use crate::search::{Branch, Matcher};
use crate::structure::{Elem, Structure, INFINITE};

#[derive(Debug, Clone)]
pub struct SymmetryOptions {
    /// Defaults to the deepest element.
    pub anchor: Option<Elem>,
    pub exclude_identity: bool,
    /// Require yg ∈ B(y, d) on the whole certified region, not just at the anchor.
    pub uniform: bool,
    pub branch_limit: usize,
    /// Stop growing survivors here instead of at the window limit.
    pub max_radius: Option<u32>,
}

impl Default for SymmetryOptions {
    fn default() -> Self {
        SymmetryOptions {
            anchor: None,
            exclude_identity: false,
            uniform: false,
            branch_limit: 4096,
            max_radius: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryVerdict {
    NoneFound,
    Found,
    WindowExhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateStatus {
    /// No branch survives at `radius` (both balls faithful there).
    Died,
    Survived,
    /// Alive at the window limit, below the tested radius.
    Exhausted,
    /// Too many live branches.
    Overflow,
}

#[derive(Debug, Clone, Serialize)]
pub struct CandidateOutcome {
    pub target: Elem,
    pub distance: u32,
    /// min(depth x, depth y)
    pub limit: u32,
    pub status: CandidateStatus,
    pub radius: u32,
    pub branches: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct FoundSymmetry {
    pub target: Elem,
    pub displacement: u32,
    pub surviving_branches: usize,
    /// Whole connected component covered (closed windows).
    pub complete: bool,
    pub map: PartialIso,
}

#[derive(Debug, Clone, Serialize)]
pub struct SymmetryReport {
    pub anchor: Elem,
    pub displacement_bound: u32,
    pub tested_radius: u32,
    pub verdict: SymmetryVerdict,
    pub found: Vec<FoundSymmetry>,
    pub candidates: Vec<CandidateOutcome>,
    pub max_death_radius: Option<u32>,
}

enum Growth {
    Died(u32),
    Survived {
        radius: u32,
        complete: bool,
        branch: Branch,
        count: usize,
    },
    Exhausted(u32, usize),
    Overflow(u32),
}

struct GrowParams<'f> {
    limit: u32,
    stop: u32,
    branch_limit: usize,
    keep: &'f (dyn Fn(&Matcher, &Branch, u32) -> bool + Sync),
    nontrivial: &'f (dyn Fn(&Matcher, &Branch) -> bool + Sync),
    /// An automorphism that is the identity on B(x,1) is the identity.
    edge_rigid: bool,
}

/// Grows the live branches of `mt` one layer at a time.
fn grow_candidate<'m>(mt: &mut Matcher<'m>, p: &GrowParams) -> Growth {
    let Some(root) = mt.root() else {
        return Growth::Died(0);
    };
    let mut live = vec![root];
    let mut t = 0u32;
    let target = p.limit.min(p.stop);
    loop {
        if live.is_empty() {
            return Growth::Died(t);
        }
        if p.edge_rigid && t >= 1 && !live.iter().any(|br| (p.nontrivial)(mt, br)) {
            return Growth::Died(t);
        }
        let complete = t > 0 && mt.a.layer(t).is_empty() && mt.b.layer(t).is_empty();
        if t >= target || complete {
            let good: Vec<&Branch> = live.iter().filter(|br| (p.nontrivial)(mt, br)).collect();
            return match good.first() {
                Some(br) => Growth::Survived {
                    radius: t,
                    complete,
                    branch: (*br).clone(),
                    count: good.len(),
                },
                None if complete => Growth::Died(t),
                None => Growth::Exhausted(t, live.len()),
            };
        }
        match mt.advance(&live, p.branch_limit) {
            None => return Growth::Overflow(t + 1),
            Some(next) => {
                t += 1;
                live = next.into_iter().filter(|br| (p.keep)(mt, br, t)).collect();
            }
        }
    }
}

/// Every automorphism of a pointed 1-ball that also fixes one neighbour of
/// the center is trivial, for every 1-ball type of the window. Then an
/// automorphism fixing an element and its neighbours fixes everything
/// (induction along paths), as long as the window's 1-ball types are all of
/// the structure's.
pub fn edge_rigid(m: &Structure) -> bool {
    let Ok(table) = crate::iso::census(m, 1) else {
        return false;
    };
    table.entries.par_iter().all(|entry| {
        let p = entry.representative;
        let mut mt = Matcher::new(m, p, m, p);
        let autos = mt.find_all(1, 1 << 16);
        if autos.len() >= 1 << 16 {
            return false;
        }
        let maps: Vec<Vec<(Elem, Elem)>> = autos.iter().map(|br| mt.pairs(br)).collect();
        m.neighbors(p)
            .iter()
            .all(|&q| maps.iter().filter(|pairs| pairs.contains(&(q, q))).count() == 1)
    })
}

fn window_limit(a: &Structure, x: Elem, b: &Structure, y: Elem) -> u32 {
    a.faithful_radius(x).min(b.faithful_radius(y))
}

/// Pointed-ball isomorphisms (B(x,r),x) → (B(y,r),y) for y ∈ B(x,d), grown
/// to the window limit.
pub fn find_symmetries(m: &Structure, d: u32, r: u32, opts: &SymmetryOptions) -> Result<SymmetryReport> {
    let x = match opts.anchor {
        Some(x) => x,
        None => m.deepest().ok_or(Error::NoFaithfulElements(0))?,
    };
    // nontrivial automorphisms of equational structures fix no point
    let skip_self = opts.exclude_identity && equational_check(m).holds();
    let rigid = opts.exclude_identity && !skip_self && edge_rigid(m);
    let dist = m.distances(x, d);
    let mut targets: Vec<(Elem, u32)> = dist
        .iter()
        .map(|(&y, &k)| (y, k))
        .filter(|&(y, _)| !(skip_self && y == x))
        .collect();
    targets.sort_by(|p, q| m.name(p.0).cmp(m.name(q.0)));

    let uniform = opts.uniform;
    let keep = move |mt: &Matcher, br: &Branch, t: u32| -> bool {
        if !uniform {
            return true;
        }
        mt.a.layer(t).iter().all(|&u| {
            let v = mt.image_of(br, u).expect("layer mapped");
            m.distance(u, v, d).is_some()
        })
    };
    let exclude = opts.exclude_identity;
    let nontrivial = move |mt: &Matcher, br: &Branch| -> bool {
        !exclude || mt.a.center() != mt.b.center() || mt.pairs(br).iter().any(|(u, v)| u != v)
    };
    let outcomes: Vec<(CandidateOutcome, Option<FoundSymmetry>)> = targets
        .par_iter()
        .map(|&(y, k)| {
            let limit = window_limit(m, x, m, y);
            let params = GrowParams {
                limit,
                stop: opts.max_radius.unwrap_or(INFINITE).max(r),
                branch_limit: opts.branch_limit,
                keep: &keep,
                nontrivial: &nontrivial,
                edge_rigid: rigid,
            };
            let mut mt = Matcher::new(m, x, m, y);
            let g = grow_candidate(&mut mt, &params);
            let (status, radius, branches, found) = match g {
                Growth::Died(t) => (CandidateStatus::Died, t, 0, None),
                Growth::Exhausted(t, n) => (CandidateStatus::Exhausted, t, n, None),
                Growth::Overflow(t) => (CandidateStatus::Overflow, t, opts.branch_limit, None),
                Growth::Survived {
                    radius,
                    complete,
                    branch,
                    count,
                } => {
                    if radius >= r || complete {
                        let map = PartialIso::new(mt.pairs(&branch), x, y, radius);
                        let found = FoundSymmetry {
                            target: y,
                            displacement: k,
                            surviving_branches: count,
                            complete,
                            map,
                        };
                        (CandidateStatus::Survived, radius, count, Some(found))
                    } else {
                        (CandidateStatus::Exhausted, radius, count, None)
                    }
                }
            };
            let outcome = CandidateOutcome {
                target: y,
                distance: k,
                limit,
                status,
                radius,
                branches,
            };
            (outcome, found)
        })
        .collect();
    let mut candidates = Vec::with_capacity(outcomes.len());
    let mut found = Vec::new();
    for (o, f) in outcomes {
        candidates.push(o);
        if let Some(f) = f {
            f.map.verify(m, m)?;
            found.push(f);
        }
    }
    let verdict = if !found.is_empty() {
        SymmetryVerdict::Found
    } else if candidates.iter().all(|c| c.status == CandidateStatus::Died) {
        SymmetryVerdict::NoneFound
    } else {
        SymmetryVerdict::WindowExhausted
    };
    let max_death_radius = candidates
        .iter()
        .filter(|c| c.status == CandidateStatus::Died)
        .map(|c| c.radius)
        .max();
    Ok(SymmetryReport {
        anchor: x,
        displacement_bound: d,
        tested_radius: r,
        verdict,
        found,
        candidates,
        max_death_radius,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PeriodReport {
    pub anchor: Elem,
    pub rank_bound: usize,
    /// `None`: more than `rank_bound` orbits.
    pub rank: Option<usize>,
    /// Radius of the ball types used to separate orbits.
    pub certified_radius: u32,
    /// Number of ball types among faithful elements, for radius 0, 1, …
    pub class_counts: Vec<usize>,
    pub period: Vec<Elem>,
    /// Approximants x ↦ y for the other members of x's orbit near x.
    pub generators: Vec<PartialIso>,
    pub weakly_connected: bool,
    /// Closed windows only: the translates Aσ over all automorphisms σ were
    /// computed explicitly and checked to partition the structure.
    pub disjoint_cover: Option<bool>,
}

fn require_equational(m: &Structure) -> Result<()> {
    match equational_check(m).witness {
        None => Ok(()),
        Some(w) => Err(Error::NotEquational(format!(
            "{} tuples agree at position {} but not at {}",
            w.symbol, w.i, w.j
        ))),
    }
}

/// Ball types at radius c over the faithful elements.
fn classes_at(m: &Structure, c: u32) -> Result<CensusTable> {
    let elems = m.faithful_elements(c);
    if elems.is_empty() {
        return Err(Error::WindowExhausted(format!("no element of depth {c}")));
    }
    census_of(m, c, &elems)
}

/// Greedy weakly connected set containing x with one element of every class:
/// grows through Gaifman neighbours whose class is not yet represented.
fn greedy_period(m: &Structure, table: &CensusTable, x: Elem) -> Result<Vec<Elem>> {
    let class = |e: Elem| table.class(e);
    let Some(cx) = class(x) else {
        return Err(Error::NoOrbitRepresentative(format!(
            "anchor {} is not censused",
            m.name(x)
        )));
    };
    let mut seen: HashSet<usize> = HashSet::from([cx]);
    let mut period = vec![x];
    let mut i = 0;
    while i < period.len() && seen.len() < table.len() {
        let a = period[i];
        for &z in m.neighbors(a) {
            if let Some(c) = class(z) {
                if seen.insert(c) {
                    period.push(z);
                }
            }
        }
        i += 1;
    }
    if seen.len() < table.len() {
        return Err(Error::WindowExhausted(format!(
            "period around {} reaches {} of {} orbits",
            m.name(x),
            seen.len(),
            table.len()
        )));
    }
    Ok(period)
}

/// Every split of A is crossed by a tuple of M.
pub fn is_weakly_connected(m: &Structure, a: &[Elem]) -> bool {
    if a.is_empty() {
        return true;
    }
    let index: HashMap<Elem, usize> = a.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let mut parent: Vec<usize> = (0..a.len()).collect();
    fn root(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for &e in a {
        for inc in m.incidence(e) {
            let members: Vec<usize> = m.tuple_of(*inc).iter().filter_map(|z| index.get(z).copied()).collect();
            for w in members.windows(2) {
                let (r0, r1) = (root(&mut parent, w[0]), root(&mut parent, w[1]));
                parent[r0] = r1;
            }
        }
    }
    let r = root(&mut parent, 0);
    (0..a.len()).all(|i| root(&mut parent, i) == r)
}

/// Unique pointed isomorphism (M,y) → (N,z) at radius h, if any.
fn pointed_map(m: &Structure, y: Elem, n: &Structure, z: Elem, h: u32) -> Option<PartialIso> {
    let mut mt = Matcher::new(m, y, n, z);
    let br = mt.find(h)?;
    Some(PartialIso::new(mt.pairs(&br), y, z, h))
}

/// Radius at which a ball around x covers the whole (finite) component.
fn eccentricity(m: &Structure, x: Elem) -> u32 {
    m.layers(x, INFINITE).len() as u32 - 1
}

/// Periodicity rank of an equational window, up to `rank_bound`.
///
/// Elements with different c-ball types lie in different orbits, so the
/// number of types is a lower bound for the rank; it is accepted as the
/// rank once it is stable from radius c0 to max(2·c0, c0 + 2).
pub fn detect_periodicity(m: &Structure, rank_bound: usize, anchor: Option<Elem>) -> Result<PeriodReport> {
    require_equational(m)?;
    let x = match anchor {
        Some(x) => x,
        None => m.deepest().ok_or(Error::NoFaithfulElements(0))?,
    };
    let mut counts = Vec::new();
    let mut c0 = 0u32;
    let mut c = 0u32;
    let table = loop {
        let table = classes_at(m, c)?;
        let n = table.len();
        counts.push(n);
        if n > rank_bound {
            return Ok(PeriodReport {
                anchor: x,
                rank_bound,
                rank: None,
                certified_radius: c,
                class_counts: counts,
                period: Vec::new(),
                generators: Vec::new(),
                weakly_connected: false,
                disjoint_cover: None,
            });
        }
        if c > 0 && counts[c as usize - 1] != n {
            c0 = c;
        }
        if c >= (2 * c0).max(c0 + 2) {
            break table;
        }
        c += 1;
    };
    let rank = table.len();
    if table.class(x).is_none() {
        return Err(Error::WindowExhausted(format!(
            "anchor {} has depth below {c}",
            m.name(x)
        )));
    }
    let period = greedy_period(m, &table, x)?;
    let weakly_connected = is_weakly_connected(m, &period);

    // approximants x ↦ y for the members y ≠ x of x's class near x
    let cx = table.class(x).unwrap();
    let mut near: Vec<Elem> = m
        .distances(x, 2 * rank as u32)
        .into_keys()
        .filter(|&y| y != x && table.class(y) == Some(cx))
        .collect();
    near.sort_by(|p, q| m.name(*p).cmp(m.name(*q)));
    let closed = m.is_closed();
    let generators: Vec<PartialIso> = near
        .par_iter()
        .filter_map(|&y| {
            let h = if closed {
                eccentricity(m, x)
            } else {
                window_limit(m, x, m, y)
            };
            pointed_map(m, x, m, y, h)
        })
        .collect();

    let disjoint_cover = closed.then(|| {
        let members = table.members(cx);
        let h = eccentricity(m, x);
        let autos: Vec<PartialIso> = members.par_iter().filter_map(|&y| pointed_map(m, x, m, y, h)).collect();
        let mut hit = vec![0usize; m.len()];
        for g in &autos {
            for &a in &period {
                if let Some(b) = g.get(a) {
                    hit[b as usize] += 1;
                }
            }
        }
        autos.len() == members.len() && hit.iter().all(|&k| k == 1)
    });

    Ok(PeriodReport {
        anchor: x,
        rank_bound,
        rank: Some(rank),
        certified_radius: c,
        class_counts: counts,
        period,
        generators,
        weakly_connected,
        disjoint_cover,
    })
}

/// Shortest step word from x to z (along tuples), for conflict reports.
pub fn word_between(m: &Structure, x: Elem, z: Elem) -> Option<Word> {
    let steps = all_steps(m.language());
    let mut prev: HashMap<Elem, (Elem, Step)> = HashMap::new();
    let mut queue = std::collections::VecDeque::from([x]);
    let mut seen = HashSet::from([x]);
    while let Some(v) = queue.pop_front() {
        if v == z {
            let mut word = Vec::new();
            let mut cur = z;
            while cur != x {
                let (p, s) = prev[&cur];
                word.push(s);
                cur = p;
            }
            word.reverse();
            return Some(Word(word));
        }
        for inc in m.incidence(v) {
            let tuple = m.tuple_of(*inc);
            for (j, &w) in tuple.iter().enumerate() {
                if seen.insert(w) {
                    let s = steps
                        .iter()
                        .copied()
                        .find(|s| s.symbol == inc.sym as usize && s.i == inc.pos as usize && s.j == j)
                        .expect("step of the language");
                    prev.insert(w, (v, s));
                    queue.push_back(w);
                }
            }
        }
    }
    None
}

fn conflict(m: &Structure, x: Elem, z: Elem, detail: String) -> Error {
    Error::GluingConflict {
        element: m.name(z).to_string(),
        detail,
        word: word_between(m, x, z).map(|w| w.display(m.language())),
    }
}

/// The local maps ρ_y : B(y,1) → N with yρ_y = yρ, for every y ∈ B(x, r),
/// when they exist.
pub fn local_maps(m: &Structure, n: &Structure, rho: &PartialIso) -> HashMap<Elem, PartialIso> {
    let ball: Vec<Elem> = m
        .layers(rho.source_anchor, rho.certified_radius)
        .into_iter()
        .flatten()
        .collect();
    ball.par_iter()
        .filter_map(|&y| {
            let z = rho.get(y)?;
            if m.faithful_radius(y) < 1 || n.faithful_radius(z) < 1 {
                return None;
            }
            pointed_map(m, y, n, z, 1).map(|p| (y, p))
        })
        .collect()
}

/// Glues ρ on B(x,r) with the one-step maps ρ_y into a map on B(x,r+1).
pub fn extend_partial_iso(
    m: &Structure,
    n: &Structure,
    rho: &PartialIso,
    neighbours: &HashMap<Elem, PartialIso>,
) -> Result<PartialIso> {
    let x = rho.source_anchor;
    let r = rho.certified_radius;
    let ball: Vec<Elem> = m.layers(x, r).into_iter().flatten().collect();
    let mut glued: HashMap<Elem, Elem> = rho.map.iter().copied().collect();
    let mut used: HashMap<Elem, Elem> = rho.map.iter().map(|&(a, b)| (b, a)).collect();
    for &y in &ball {
        let Some(ry) = neighbours.get(&y) else {
            return Err(conflict(m, x, y, "no one-step map at this element".into()));
        };
        if ry.get(y) != rho.get(y) {
            return Err(conflict(m, x, y, "one-step map disagrees at its center".into()));
        }
        let mut local = vec![y];
        local.extend_from_slice(m.neighbors(y));
        for z in local {
            let Some(t) = ry.get(z) else {
                return Err(conflict(m, x, z, format!("one-step map at {} misses it", m.name(y))));
            };
            match glued.get(&z) {
                Some(&old) if old != t => {
                    return Err(conflict(
                        m,
                        x,
                        z,
                        format!("sent to {} and to {}", n.name(old), n.name(t)),
                    ))
                }
                Some(_) => {}
                None => {
                    if let Some(&other) = used.get(&t) {
                        return Err(conflict(
                            m,
                            x,
                            z,
                            format!("shares the image {} with {}", n.name(t), m.name(other)),
                        ));
                    }
                    glued.insert(z, t);
                    used.insert(t, z);
                }
            }
        }
    }
    let pairs: Vec<(Elem, Elem)> = glued.into_iter().collect();
    if let Err(e) = verify_map(m, n, &pairs) {
        let far = ball.last().copied().unwrap_or(x);
        return Err(conflict(m, x, far, e.to_string()));
    }
    Ok(PartialIso::new(pairs, x, rho.target_anchor, r + 1))
}

/// Extends ρ : B(x,s) → M (s ≥ rank) to the window interior by
/// yρ̄ = ((yσ)ρ)σ⁻¹, where σ moves y into a period containing x.
pub fn extend_to_automorphism(m: &Structure, report: &PeriodReport, rho: &PartialIso) -> Result<PartialIso> {
    let rank = report
        .rank
        .ok_or_else(|| Error::HypothesisUnverified("structure has no certified period".into()))?;
    let s = rho.certified_radius;
    if (s as usize) < rank {
        return Err(Error::HypothesisUnverified(format!(
            "ρ is certified to radius {s}, below the rank {rank}"
        )));
    }
    let x = rho.source_anchor;
    let table = classes_at(m, report.certified_radius)?;
    let period = greedy_period(m, &table, x)?;
    let by_class: HashMap<usize, Elem> = period.iter().map(|&a| (table.class(a).unwrap(), a)).collect();
    // how far ρ moves the period
    let mut reach = 0u32;
    for &a in &period {
        let b = rho.get(a).ok_or_else(|| {
            Error::HypothesisUnverified(format!("period element {} outside the domain of ρ", m.name(a)))
        })?;
        let d = m
            .distance(a, b, INFINITE)
            .ok_or_else(|| Error::VerificationFailed("ρ leaves the component".into()))?;
        reach = reach.max(d);
    }
    let need = reach.max(report.certified_radius);
    let interior: Vec<Elem> = m.faithful_elements(need);
    let images: Vec<Result<(Elem, Elem)>> = interior
        .par_iter()
        .map(|&y| {
            let missing = || Error::NoOrbitRepresentative(m.name(y).to_string());
            let a = table
                .class(y)
                .and_then(|c| by_class.get(&c))
                .copied()
                .ok_or_else(missing)?;
            if m.faithful_radius(a) < need {
                return Err(missing());
            }
            let sigma = pointed_map(m, y, m, a, need).ok_or_else(missing)?;
            let target = rho.get(a).expect("checked above");
            let back = sigma
                .map
                .iter()
                .find(|p| p.1 == target)
                .map(|p| p.0)
                .ok_or_else(missing)?;
            Ok((y, back))
        })
        .collect();
    let pairs = images.into_iter().collect::<Result<Vec<_>>>()?;
    verify_map(m, m, &pairs)?;
    for &(y, z) in &pairs {
        if let Some(w) = rho.get(y) {
            if w != z {
                return Err(Error::VerificationFailed(format!(
                    "extension disagrees with ρ at {}",
                    m.name(y)
                )));
            }
        }
    }
    let depth_x = m.faithful_radius(x);
    let certified = if depth_x == INFINITE {
        INFINITE
    } else {
        depth_x.saturating_sub(need)
    };
    let target = pairs
        .iter()
        .find(|p| p.0 == x)
        .map(|p| p.1)
        .ok_or_else(|| Error::NoOrbitRepresentative(m.name(x).to_string()))?;
    Ok(PartialIso::new(pairs, x, target, certified))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IsoVerdict {
    Found,
    Absent,
    WindowExhausted,
}

#[derive(Debug, Clone, Serialize)]
pub struct CensusWitness {
    pub h: u32,
    /// "source" if the class occurs in M only, "target" if in N only.
    pub side: &'static str,
    pub representative: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct PeriodicIsoReport {
    pub verdict: IsoVerdict,
    pub anchor: Elem,
    pub candidates: Vec<CandidateOutcome>,
    pub map: Option<PartialIso>,
    pub census_witness: Option<CensusWitness>,
}

/// Isomorphism M → N for N periodic, by layered search from a deep anchor
/// of M into the period of N, certified to the window limit.
pub fn periodic_isomorphism(
    m: &Structure,
    n: &Structure,
    n_period: &PeriodReport,
    anchor: Option<Elem>,
) -> Result<PeriodicIsoReport> {
    if m.language() != n.language() {
        return Err(Error::LanguageMismatch);
    }
    let x = match anchor {
        Some(x) => x,
        None => m.deepest().ok_or(Error::NoFaithfulElements(0))?,
    };
    let absent = |w: Option<CensusWitness>| PeriodicIsoReport {
        verdict: IsoVerdict::Absent,
        anchor: x,
        candidates: Vec::new(),
        map: None,
        census_witness: w,
    };
    let cmp = extraction_compare(m, n, 1)?;
    if let Some(&rep) = cmp.missing_in_n.first() {
        return Ok(absent(Some(CensusWitness {
            h: 1,
            side: "source",
            representative: m.name(rep).to_string(),
        })));
    }
    if let Some(&rep) = cmp.missing_in_m.first() {
        return Ok(absent(Some(CensusWitness {
            h: 1,
            side: "target",
            representative: n.name(rep).to_string(),
        })));
    }
    if n_period.rank.is_none() {
        return Err(Error::HypothesisUnverified("target has no certified period".into()));
    }
    let keep = |_: &Matcher, _: &Branch, _: u32| true;
    let nontrivial = |_: &Matcher, _: &Branch| true;
    let mut candidates = Vec::new();
    let mut exhausted = false;
    for &y in &n_period.period {
        let limit = window_limit(m, x, n, y);
        let params = GrowParams {
            limit,
            stop: INFINITE,
            branch_limit: 4096,
            keep: &keep,
            nontrivial: &nontrivial,
            edge_rigid: false,
        };
        let mut mt = Matcher::new(m, x, n, y);
        let g = grow_candidate(&mut mt, &params);
        let (status, radius, branches) = match &g {
            Growth::Died(t) => (CandidateStatus::Died, *t, 0),
            Growth::Survived { radius, count, .. } => (CandidateStatus::Survived, *radius, *count),
            Growth::Exhausted(t, k) => (CandidateStatus::Exhausted, *t, *k),
            Growth::Overflow(t) => (CandidateStatus::Overflow, *t, 4096),
        };
        candidates.push(CandidateOutcome {
            target: y,
            distance: 0,
            limit,
            status,
            radius,
            branches,
        });
        match g {
            Growth::Survived { radius, branch, .. } => {
                let map = PartialIso::new(mt.pairs(&branch), x, y, radius);
                map.verify(m, n)?;
                return Ok(PeriodicIsoReport {
                    verdict: IsoVerdict::Found,
                    anchor: x,
                    candidates,
                    map: Some(map),
                    census_witness: None,
                });
            }
            Growth::Died(_) => {}
            _ => exhausted = true,
        }
    }
    Ok(PeriodicIsoReport {
        verdict: if exhausted {
            IsoVerdict::WindowExhausted
        } else {
            IsoVerdict::Absent
        },
        anchor: x,
        candidates,
        map: None,
        census_witness: None,
    })
}

/// Orbit partition of a closed window under a set of automorphisms, as sets.
pub fn orbits(m: &Structure, autos: &[PartialIso]) -> Vec<BTreeSet<Elem>> {
    let mut parent: Vec<Elem> = (0..m.len() as Elem).collect();
    fn root(p: &mut [Elem], mut i: Elem) -> Elem {
        while p[i as usize] != i {
            p[i as usize] = p[p[i as usize] as usize];
            i = p[i as usize];
        }
        i
    }
    for g in autos {
        for &(a, b) in &g.map {
            let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
            if ra != rb {
                parent[ra.max(rb) as usize] = ra.min(rb);
            }
        }
    }
    let mut groups: HashMap<Elem, BTreeSet<Elem>> = HashMap::new();
    for e in m.elements() {
        let r = root(&mut parent, e);
        groups.entry(r).or_default().insert(e);
    }
    let mut out: Vec<BTreeSet<Elem>> = groups.into_values().collect();
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_grid, Coloring};

    fn e(m: &Structure, s: &str) -> Elem {
        m.lookup(s).unwrap()
    }

    #[test]
    fn period_three_translation() {
        let m = gen_grid(&[41], false, &Coloring::period(3)).unwrap();
        let opts = SymmetryOptions {
            anchor: Some(e(&m, "20")),
            exclude_identity: true,
            ..Default::default()
        };
        let rep = find_symmetries(&m, 3, 10, &opts).unwrap();
        assert_eq!(rep.verdict, SymmetryVerdict::Found);
        let targets: Vec<&str> = rep.found.iter().map(|f| m.name(f.target)).collect();
        assert_eq!(targets, vec!["17", "23"]);
        for f in &rep.found {
            assert!(f.map.certified_radius >= 10);
            let shift: i64 = m.name(f.target).parse::<i64>().unwrap() - 20;
            for &(a, b) in &f.map.map {
                let (a, b): (i64, i64) = (m.name(a).parse().unwrap(), m.name(b).parse().unwrap());
                assert_eq!(b - a, shift);
            }
        }
        // colour classes of 18, 19 differ from 20's at radius 1
        assert!(rep
            .candidates
            .iter()
            .filter(|c| c.status == CandidateStatus::Died)
            .all(|c| c.radius <= 1));
    }

    #[test]
    fn small_window_is_inconclusive() {
        let m = gen_grid(&[9], false, &Coloring::period(3)).unwrap();
        let opts = SymmetryOptions {
            anchor: Some(e(&m, "4")),
            exclude_identity: true,
            ..Default::default()
        };
        let rep = find_symmetries(&m, 3, 10, &opts).unwrap();
        assert_eq!(rep.verdict, SymmetryVerdict::WindowExhausted);
    }

    #[test]
    fn ranks_of_paths_and_tori() {
        let path = gen_grid(&[30], false, &Coloring::none()).unwrap();
        let rep = detect_periodicity(&path, 4, None).unwrap();
        assert_eq!(rep.rank, Some(1));
        assert_eq!(rep.period.len(), 1);

        let c = gen_grid(&[12], true, &Coloring::period(4)).unwrap();
        let rep = detect_periodicity(&c, 10, None).unwrap();
        assert_eq!(rep.rank, Some(4));
        assert!(rep.weakly_connected);
        assert_eq!(rep.disjoint_cover, Some(true));

        let rep = detect_periodicity(&c, 3, None).unwrap();
        assert_eq!(rep.rank, None);
    }

    #[test]
    fn shift_extends_to_global_translation() {
        let m = gen_grid(&[40], false, &Coloring::period(2)).unwrap();
        let rep = detect_periodicity(&m, 4, None).unwrap();
        assert_eq!(rep.rank, Some(2));
        let x = e(&m, "20");
        let pairs: Vec<(Elem, Elem)> = (18..=22)
            .map(|i| (e(&m, &i.to_string()), e(&m, &(i + 2).to_string())))
            .collect();
        let rho = PartialIso::new(pairs, x, e(&m, "22"), 2);
        let ext = extend_to_automorphism(&m, &rep, &rho).unwrap();
        assert!(ext.len() > 20);
        for &(a, b) in &ext.map {
            let (a, b): (i64, i64) = (m.name(a).parse().unwrap(), m.name(b).parse().unwrap());
            assert_eq!(b, a + 2);
        }
    }

    #[test]
    fn periodic_isomorphism_verdicts() {
        let p2a = gen_grid(&[30], false, &Coloring::period(2)).unwrap();
        let p2b = gen_grid(&[37], false, &Coloring::period(2)).unwrap();
        let p3 = gen_grid(&[37], false, &Coloring::period(3)).unwrap();
        let per = detect_periodicity(&p2b, 4, None).unwrap();
        let rep = periodic_isomorphism(&p2a, &p2b, &per, None).unwrap();
        assert_eq!(rep.verdict, IsoVerdict::Found);
        let map = rep.map.unwrap();
        assert_eq!(map.certified_radius, 14);
        let per3 = detect_periodicity(&p3, 4, None).unwrap();
        let rep = periodic_isomorphism(&p2a, &p3, &per3, None).unwrap();
        assert_eq!(rep.verdict, IsoVerdict::Absent);
        assert_eq!(rep.census_witness.unwrap().h, 1);
    }

    #[test]
    fn gluing_detects_missing_local_maps() {
        let m = gen_grid(&[21], false, &Coloring::period(2)).unwrap();
        let n = gen_grid(&[21], false, &Coloring::period(3)).unwrap();
        // 10 in m and 9 in n have the same 1-ball (White, Black, White) but
        // different 2-balls (8 is Black in m, 7 is White in n)
        let x = e(&m, "10");
        let rho = PartialIso::new(vec![(x, e(&n, "9"))], x, e(&n, "9"), 0);
        let locals = local_maps(&m, &n, &rho);
        let ext = extend_partial_iso(&m, &n, &rho, &locals).unwrap();
        assert_eq!(ext.certified_radius, 1);
        let locals = local_maps(&m, &n, &ext);
        let err = extend_partial_iso(&m, &n, &ext, &locals).unwrap_err();
        assert!(matches!(err, Error::GluingConflict { word: Some(_), .. }), "{err:?}");
    }
}
