//! Rigidity up to local isomorphism.
//!
//! (Q) at (r, s): every anchor x has distinct y, z ∈ B(x, r) with isomorphic
//! pointed s-balls. A structure is locally isomorphic to a rigid one iff for
//! every r some anchor has no such pair; the rigid limit builds one from
//! nested balls (x_n, r_n, s_n) glued by pointed embeddings θ_n.
//!
//! "(M,y) ≅ (M,z)" is approximated by s-ball equivalence throughout, and every
//! verdict carries the (r, s) at which it was certified.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::iso::{
    ball_signature, census, census_of, distances_from_set, lip_check, verify_map, BallSignature, LipOutcome, PartialIso,
};
use crate::search::Matcher;
use crate::structure::{Elem, Structure, StructureBuilder, INFINITE};

/// Outcome of separating a set of elements by their ball types.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Separation {
    /// All pairwise distinct at radius `s`, and `s` is the least such radius.
    Separated { s: u32 },
    /// `y` and `z` have isomorphic `s`-balls (`s` = the bound).
    Collision { y: Elem, z: Elem, s: u32 },
    /// Some element still colliding is not faithful at `s`.
    Unfaithful { s: u32 },
}

fn split(m: &Structure, groups: &[Vec<Elem>], t: u32) -> Vec<Vec<Elem>> {
    let mut out = Vec::new();
    for g in groups {
        let sigs: Vec<BallSignature> = g.par_iter().map(|&y| ball_signature(m, y, t)).collect();
        let mut by: HashMap<&BallSignature, Vec<Elem>> = HashMap::new();
        for (sig, &y) in sigs.iter().zip(g) {
            by.entry(sig).or_default().push(y);
        }
        let mut parts: Vec<Vec<Elem>> = by.into_values().filter(|v| v.len() > 1).collect();
        for p in &mut parts {
            p.sort_unstable();
        }
        parts.sort();
        out.extend(parts);
    }
    out
}

/// Least s ≤ s_max at which the elements have pairwise non-isomorphic
/// s-balls. Distinct at s implies distinct at every s' ≥ s, so the search
/// doubles t on the groups still colliding and then bisects.
pub fn separation(m: &Structure, elems: &[Elem], s_max: u32) -> Separation {
    let unfaithful = |groups: &[Vec<Elem>], t: u32| groups.iter().flatten().any(|&y| m.faithful_radius(y) < t);
    let mut all: Vec<Elem> = elems.to_vec();
    all.sort_unstable();
    all.dedup();
    let mut groups = vec![all];
    if unfaithful(&groups, 0) {
        return Separation::Unfaithful { s: 0 };
    }
    groups = split(m, &groups, 0);
    if groups.is_empty() {
        return Separation::Separated { s: 0 };
    }
    let mut prev = 0u32;
    loop {
        if prev >= s_max {
            let g = &groups[0];
            return Separation::Collision {
                y: g[0],
                z: g[1],
                s: s_max,
            };
        }
        let t = (prev.max(1) * 2).min(s_max).max(prev + 1);
        if unfaithful(&groups, t) {
            return Separation::Unfaithful { s: t };
        }
        let next = split(m, &groups, t);
        if next.is_empty() {
            // least separating radius in (prev, t]
            let (mut lo, mut hi) = (prev, t);
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if split(m, &groups, mid).is_empty() {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Separation::Separated { s: hi };
        }
        groups = next;
        prev = t;
    }
}

fn ball_elements(m: &Structure, x: Elem, r: u32) -> Vec<Elem> {
    m.layers(x, r).into_iter().flatten().collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct QReport {
    pub r: u32,
    pub s: u32,
    pub anchors_checked: usize,
    /// Every checked anchor has distinct s-equivalent y, z in B(x, r).
    pub holds: bool,
    /// First anchor (canonical order) without such a pair.
    pub witness_anchor: Option<Elem>,
    /// A pair for the first anchor, when one exists.
    pub example_pair: Option<(Elem, Elem)>,
}

/// (Q) at fixed (r, s) over all anchors of depth ≥ r + s.
pub fn property_q_check(m: &Structure, r: u32, s: u32) -> Result<QReport> {
    let anchors = m.faithful_elements(r.saturating_add(s));
    if anchors.is_empty() {
        return Err(Error::WindowExhausted(format!("no anchor of depth {}", r + s)));
    }
    let mut needed: Vec<Elem> = anchors.iter().flat_map(|&x| ball_elements(m, x, r)).collect();
    needed.sort_unstable();
    needed.dedup();
    let table = census_of(m, s, &needed)?;
    let pairs: Vec<Option<(Elem, Elem)>> = anchors
        .par_iter()
        .map(|&x| {
            let mut seen: HashMap<usize, Elem> = HashMap::new();
            for y in ball_elements(m, x, r) {
                let c = table.class(y).expect("censused");
                if let Some(&z) = seen.get(&c) {
                    return Some((z.min(y), z.max(y)));
                }
                seen.insert(c, y);
            }
            None
        })
        .collect();
    let witness_anchor = anchors.iter().zip(&pairs).find(|(_, p)| p.is_none()).map(|(&x, _)| x);
    Ok(QReport {
        r,
        s,
        anchors_checked: anchors.len(),
        holds: witness_anchor.is_none(),
        witness_anchor,
        example_pair: pairs[0],
    })
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum RadiusResult {
    /// No two distinct elements of B(anchor, r) have isomorphic s-balls.
    Witness {
        anchor: Elem,
        s: u32,
    },
    /// Every tried anchor has such a pair; the first one is reported.
    Violation {
        anchor: Elem,
        y: Elem,
        z: Elem,
        s: u32,
    },
    Inconclusive {
        reason: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RigidityVerdict {
    CharacterizationHoldsUpToBounds,
    PropertyPDetected,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct RigidityReport {
    pub radii_tested: Vec<u32>,
    pub s: u32,
    pub per_radius: Vec<(u32, RadiusResult)>,
    pub verdict: RigidityVerdict,
    /// Radius at which the local isomorphism property was certified, if asked.
    pub lip_radius: Option<u32>,
}

#[derive(Debug, Clone)]
pub struct RigidityOptions {
    /// Anchors tried per radius (deepest first, then element order).
    pub max_anchors: usize,
    /// Certify the local isomorphism property at this radius first.
    pub lip_radius: Option<u32>,
}

impl Default for RigidityOptions {
    fn default() -> Self {
        RigidityOptions {
            max_anchors: 64,
            lip_radius: None,
        }
    }
}

/// Deepest elements first, ties in element order.
fn anchor_order(m: &Structure, min_depth: u32) -> Vec<Elem> {
    let mut xs = m.faithful_elements(min_depth);
    xs.sort_by_key(|&x| (std::cmp::Reverse(m.faithful_radius(x)), x));
    xs
}

/// For each r, an anchor x such that distinct y, z ∈ B(x, r) are never
/// s-equivalent.
pub fn rigidity_characterization(
    m: &Structure,
    radii: &[u32],
    s: u32,
    opts: &RigidityOptions,
) -> Result<RigidityReport> {
    if let Some(h) = opts.lip_radius {
        match lip_check(m, h) {
            Ok(rep) if matches!(rep.outcome, LipOutcome::Holds { .. }) => {}
            Ok(_) => {
                return Err(Error::HypothesisUnverified(format!(
                    "local isomorphism property fails at h={h}"
                )))
            }
            Err(e) => {
                return Err(Error::HypothesisUnverified(format!(
                    "local isomorphism property at h={h}: {e}"
                )))
            }
        }
    }
    let mut per_radius = Vec::new();
    let mut p_detected = false;
    for &r in radii {
        let anchors: Vec<Elem> = anchor_order(m, r + 1).into_iter().take(opts.max_anchors).collect();
        let mut first_collision: Option<RadiusResult> = None;
        let mut result = None;
        for &x in &anchors {
            let limit = m.faithful_radius(x).saturating_sub(r).min(s);
            match separation(m, &ball_elements(m, x, r), limit) {
                Separation::Separated { s: used } => {
                    result = Some(RadiusResult::Witness { anchor: x, s: used });
                    break;
                }
                Separation::Collision { y, z, s: at } if at == s => {
                    first_collision.get_or_insert(RadiusResult::Violation { anchor: x, y, z, s: at });
                }
                _ => {}
            }
        }
        let result = match result {
            Some(w) => w,
            None if first_collision.is_some() => {
                if let Ok(q) = property_q_check(m, r, s) {
                    p_detected |= q.holds;
                }
                first_collision.expect("some anchor collided")
            }
            None => RadiusResult::Inconclusive {
                reason: format!("no anchor among {} separates B(x,{r}) within the window", anchors.len()),
            },
        };
        per_radius.push((r, result));
    }
    let verdict = if per_radius
        .iter()
        .all(|(_, res)| matches!(res, RadiusResult::Witness { .. }))
    {
        RigidityVerdict::CharacterizationHoldsUpToBounds
    } else if p_detected {
        RigidityVerdict::PropertyPDetected
    } else {
        RigidityVerdict::Inconclusive
    };
    Ok(RigidityReport {
        radii_tested: radii.to_vec(),
        s,
        per_radius,
        verdict,
        lip_radius: opts.lip_radius,
    })
}

/// The ball B(x, R) as a standalone structure whose frontier is its outer sphere.
pub fn ball_window(m: &Structure, x: Elem, radius: u32) -> Structure {
    let layers = m.layers(x, radius);
    let mut b = StructureBuilder::new(m.language().clone());
    let mut local: HashMap<Elem, Elem> = HashMap::new();
    for (d, layer) in layers.iter().enumerate() {
        for &e in layer {
            let id = b.element(m.name(e));
            local.insert(e, id);
            if d as u32 == radius {
                b.frontier(id);
            }
        }
    }
    let mut buf = Vec::new();
    for &e in local.keys() {
        for inc in m.incidence(e) {
            if inc.pos != 0 {
                continue;
            }
            buf.clear();
            let tuple = m.tuple_of(*inc);
            if tuple.iter().all(|z| local.contains_key(z)) {
                buf.extend(tuple.iter().map(|z| local[z]));
                b.tuple(inc.sym as usize, &buf);
            }
        }
    }
    b.build()
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceStep {
    /// x_n, as an element of M.
    pub anchor: Elem,
    pub r: u32,
    pub s: u32,
    /// Radius from step (a): every faithful ball of this radius holds a copy
    /// of the previous step's pointed ball.
    pub recurrence_radius: u32,
    /// The anchor x of step (b) whose 2r-ball has no s-equivalent pair.
    pub separating_anchor: Option<Elem>,
    /// θ_{n−1}: the previous step's ball onto B(x_n, r_{n−1} + s_{n−1}), in M.
    pub theta: Option<PartialIso>,
    /// (B(x_n, r_n + s_n), x_n) as a standalone window.
    #[serde(skip)]
    pub window: Structure,
}

#[derive(Debug, Clone, Serialize)]
pub struct RigidLimitTrace {
    pub seed: Elem,
    pub steps: Vec<TraceStep>,
    /// Why the construction stopped before the requested number of steps.
    pub truncated: Option<String>,
}

#[derive(Debug, Clone)]
pub struct RigidLimitOptions {
    /// Anchors tried for step (b), in element order.
    pub anchor_pool: usize,
    /// Largest s searched in step (b).
    pub s_cap: u32,
}

impl Default for RigidLimitOptions {
    fn default() -> Self {
        RigidLimitOptions {
            anchor_pool: 32,
            s_cap: 4096,
        }
    }
}

/// Elements whose pointed h-ball is isomorphic to (B(x,h), x), among those
/// of depth ≥ h; screened by small-radius signatures first.
fn occurrences(m: &Structure, x: Elem, h: u32) -> Vec<Elem> {
    let screen = h.min(3);
    let key = ball_signature(m, x, screen);
    m.faithful_elements(h)
        .into_par_iter()
        .filter(|&y| y == x || (ball_signature(m, y, screen) == key && Matcher::new(m, x, m, y).find(h).is_some()))
        .collect()
}

/// Runs the inductive construction for `steps` steps from `seed`.
pub fn rigid_limit(m: &Structure, steps: usize, seed: Elem, opts: &RigidLimitOptions) -> Result<RigidLimitTrace> {
    let depth = m.depths();
    let mut trace = RigidLimitTrace {
        seed,
        steps: vec![TraceStep {
            anchor: seed,
            r: 0,
            s: 0,
            recurrence_radius: 0,
            separating_anchor: None,
            theta: None,
            window: ball_window(m, seed, 0),
        }],
        truncated: None,
    };
    for _ in 0..steps {
        let last = trace.steps.last().unwrap();
        let (xn, rn, sn) = (last.anchor, last.r, last.s);
        let h = rn + sn;

        // (a) recurrence radius of the pointed ball (B(x_n, h), x_n)
        let occ = occurrences(m, xn, h);
        let dist = distances_from_set(m, &occ);
        let k = m
            .faithful_elements(h)
            .iter()
            .map(|&v| dist[v as usize].min(depth[v as usize].saturating_sub(h).saturating_add(1)))
            .max()
            .unwrap_or(INFINITE);
        if k == INFINITE {
            trace.truncated = Some(format!("no faithful element at radius {h}"));
            return Ok(trace);
        }
        let r = k.max(rn + 1);

        // (b) anchor x and least s with no s-equivalent pair in B(x, 2r)
        // element order rather than depth order: the deepest anchors sit
        // together and may all straddle one global symmetry
        let pool: Vec<Elem> = m
            .faithful_elements(2 * r + sn + 1)
            .into_iter()
            .take(opts.anchor_pool)
            .collect();
        if pool.is_empty() {
            trace.truncated = Some(format!("no anchor of depth {} for r={r}", 2 * r + sn + 1));
            return Ok(trace);
        }
        let seps: Vec<Separation> = pool
            .par_iter()
            .map(|&x| {
                let limit = (depth[x as usize] - 2 * r).min(opts.s_cap);
                separation(m, &ball_elements(m, x, 2 * r), limit)
            })
            .collect();
        let best = pool
            .iter()
            .zip(&seps)
            .filter_map(|(&x, sep)| match sep {
                Separation::Separated { s } => Some((*s, x)),
                _ => None,
            })
            .min_by_key(|&(s, x)| (s, anchor_rank(&pool, x)));
        let Some((s, x)) = best else {
            let all_collide = seps.iter().all(|sep| matches!(sep, Separation::Collision { .. }));
            if all_collide && trace.steps.len() == 1 {
                return Err(Error::CharacterizationFails(format!(
                    "every one of {} anchors has distinct equivalent elements within distance {}",
                    pool.len(),
                    2 * r
                )));
            }
            if all_collide {
                return Err(Error::CharacterizationFails(format!(
                    "step {}: no anchor separates B(x,{})",
                    trace.steps.len(),
                    2 * r
                )));
            }
            trace.truncated = Some(format!(
                "step {}: separation of B(x,{}) not certifiable in the window",
                trace.steps.len(),
                2 * r
            ));
            return Ok(trace);
        };

        // (c) x_{n+1} ∈ B(x, r) carrying a copy of the step-n ball
        let occ_set: HashSet<Elem> = occ.into_iter().collect();
        let Some(next) = ball_elements(m, x, r).into_iter().find(|u| occ_set.contains(u)) else {
            trace.truncated = Some(format!(
                "no copy of the step-{} ball within B(x,{r})",
                trace.steps.len() - 1
            ));
            return Ok(trace);
        };
        let s_next = s.max(sn + 1);
        if depth[next as usize] < r + s_next {
            trace.truncated = Some(format!(
                "anchor depth {} below r+s = {}",
                depth[next as usize],
                r + s_next
            ));
            return Ok(trace);
        }
        let mut mt = Matcher::new(m, xn, m, next);
        let br = mt
            .find(h)
            .ok_or_else(|| Error::VerificationFailed("copy of the step ball vanished".into()))?;
        let theta = PartialIso::new(mt.pairs(&br), xn, next, h);
        trace.steps.push(TraceStep {
            anchor: next,
            r,
            s: s_next,
            recurrence_radius: k,
            separating_anchor: Some(x),
            theta: Some(theta),
            window: ball_window(m, next, r + s_next),
        });
    }
    Ok(trace)
}

fn anchor_rank(pool: &[Elem], x: Elem) -> usize {
    pool.iter().position(|&y| y == x).unwrap_or(usize::MAX)
}

#[derive(Debug, Clone, Serialize)]
pub struct StepCheck {
    pub step: usize,
    pub no_equivalent_pair: bool,
    pub classes_present_in_m: bool,
    pub theta_verified: bool,
    pub increasing: bool,
}

impl StepCheck {
    pub fn passed(&self) -> bool {
        self.no_equivalent_pair && self.classes_present_in_m && self.theta_verified && self.increasing
    }
}

/// Re-checks every step of a trace from its standalone windows alone (plus
/// M's census for the class-presence direction).
pub fn verify_trace(m: &Structure, trace: &RigidLimitTrace) -> Result<Vec<StepCheck>> {
    let mut out = Vec::new();
    for (n, step) in trace.steps.iter().enumerate().skip(1) {
        let w = &step.window;
        let xw = w.element(m.name(step.anchor))?;
        // no two distinct elements of B(x_n, r_n) with isomorphic s_n-balls
        let inner = ball_elements(w, xw, step.r);
        let table = census_of(w, step.s, &inner)?;
        let no_equivalent_pair = table.len() == inner.len();
        // every r_n-ball class of the window occurs in M
        let wt = census(w, step.r)?;
        let mt = census(m, step.r)?;
        let classes_present_in_m = wt.entries.iter().all(|e| mt.find(&e.signature).is_some());
        // θ_{n−1} maps the previous window onto a pointed sub-ball of this one
        let prev = &trace.steps[n - 1];
        let theta_verified = match &step.theta {
            Some(theta) => {
                let pairs: Option<Vec<(Elem, Elem)>> = theta
                    .map
                    .iter()
                    .map(|&(a, b)| Some((prev.window.lookup(m.name(a))?, w.lookup(m.name(b))?)))
                    .collect();
                match pairs {
                    Some(p) => {
                        p.len() == prev.window.len()
                            && p.contains(&(prev.window.element(m.name(prev.anchor))?, xw))
                            && verify_map(&prev.window, w, &p).is_ok()
                    }
                    None => false,
                }
            }
            None => false,
        };
        let increasing = step.r > prev.r && step.s > prev.s;
        out.push(StepCheck {
            step: n,
            no_equivalent_pair,
            classes_present_in_m,
            theta_verified,
            increasing,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_grid, Coloring};

    #[test]
    fn separation_on_a_coloured_path() {
        // a single Black point at 40; 42..46 see it at distances 2..6, so
        // the last pair to split is (45, 46), at radius 5
        let mut pattern = vec!["White".to_string(); 81];
        pattern[40] = "Black".into();
        let m = gen_grid(
            &[81],
            false,
            &Coloring {
                weights: vec![1],
                pattern,
            },
        )
        .unwrap();
        let e = |s: &str| m.lookup(s).unwrap();
        let elems: Vec<Elem> = (42..=46).map(|i| e(&i.to_string())).collect();
        assert_eq!(separation(&m, &elems, 10), Separation::Separated { s: 5 });
        assert!(matches!(separation(&m, &elems, 4), Separation::Collision { s: 4, .. }));
        let periodic = gen_grid(&[41], false, &Coloring::period(2)).unwrap();
        let e = |s: &str| periodic.lookup(s).unwrap();
        let elems = vec![e("18"), e("20")];
        assert!(matches!(
            separation(&periodic, &elems, 10),
            Separation::Collision { s: 10, .. }
        ));
    }

    #[test]
    fn q_holds_with_a_period() {
        let m = gen_grid(&[40], false, &Coloring::period(2)).unwrap();
        let q = property_q_check(&m, 2, 5).unwrap();
        assert!(q.holds);
        let rep = rigidity_characterization(&m, &[2], 5, &RigidityOptions::default()).unwrap();
        assert_eq!(rep.verdict, RigidityVerdict::PropertyPDetected);
        let trace = rigid_limit(&m, 2, m.lookup("20").unwrap(), &RigidLimitOptions::default());
        assert!(matches!(trace, Err(Error::CharacterizationFails(_))));
    }

    #[test]
    fn zero_steps() {
        let m = gen_grid(&[10], false, &Coloring::period(2)).unwrap();
        let x = m.lookup("4").unwrap();
        let t = rigid_limit(&m, 0, x, &RigidLimitOptions::default()).unwrap();
        assert_eq!(t.steps.len(), 1);
        assert_eq!((t.steps[0].r, t.steps[0].s), (0, 0));
        assert_eq!(t.steps[0].window.len(), 1);
    }
}
