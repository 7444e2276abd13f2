//! Sturmian colourings T(r,s) of ℤ.
//!
//! Column a meets the cells [a−½,a+½[ × [b−½,b+½[ crossed by the line
//! y = r·x + s; it is coloured White when it meets n+1 of them and Black when
//! it meets n+2, with n = ⌊|r|⌋. Everything is decided by exact sign tests.

use serde::{Deserialize, Serialize};

use super::quadratic::QuadraticIrrational as Q;
use crate::error::{Error, Result};
use crate::structure::{Language, Structure, StructureBuilder};

/// How consecutive integers are related.
///
/// `Directed` uses `Succ(a, a+1)` (an equational structure, no mirror
/// automorphisms). `Undirected` uses a symmetric `Adj` relation, so the mirror
/// symmetries of the colouring are automorphisms of the structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Orientation {
    #[default]
    Directed,
    Undirected,
}

fn half() -> Q {
    Q::rational(1, 2)
}

/// Number of cells of column `a` crossed by y = r·x + s.
pub fn column_count(r: Q, s: Q, a: i64) -> Result<i128> {
    let a = Q::int(a as i128);
    let left = r.checked_mul(a.checked_sub(half())?)?.checked_add(s)?;
    let right = r.checked_mul(a.checked_add(half())?)?.checked_add(s)?;
    if r.signum() > 0 {
        // y ∈ [left, right[ meets [b−½, b+½[ iff left − ½ < b < right + ½
        let lo = left.checked_sub(half())?;
        let hi = right.checked_add(half())?;
        Ok(hi.ceil() - lo.floor() - 1)
    } else {
        // y ∈ ]right, left] meets [b−½, b+½[ iff right − ½ < b ≤ left + ½
        let lo = right.checked_sub(half())?;
        let hi = left.checked_add(half())?;
        Ok(hi.floor() - lo.floor())
    }
}

pub fn is_black(r: Q, s: Q, a: i64) -> Result<bool> {
    let n = r.abs().floor();
    let c = column_count(r, s, a)?;
    debug_assert!(c == n + 1 || c == n + 2, "column count {c} for n = {n}");
    Ok(c == n + 2)
}

pub fn sturmian_language(orientation: Orientation) -> Language {
    let step = match orientation {
        Orientation::Directed => "Succ",
        Orientation::Undirected => "Adj",
    };
    Language::new([(step, 2), ("White", 1), ("Black", 1)]).expect("static language")
}

/// Window a ∈ [−W, W] of T(r,s); frontier {−W, W}.
pub fn gen_sturmian(r: Q, s: Q, half_width: u32, orientation: Orientation) -> Result<Structure> {
    if r.is_rational() {
        return Err(Error::RationalSlope);
    }
    if half_width == 0 {
        return Err(Error::BadNumber("half-width must be at least 1".into()));
    }
    let w = half_width as i64;
    let n = r.abs().floor();
    let mut b = StructureBuilder::new(sturmian_language(orientation));
    let ids: Vec<u32> = (-w..=w).map(|a| b.element(&a.to_string())).collect();
    for (i, a) in (-w..=w).enumerate() {
        let count = column_count(r, s, a)?;
        if count != n + 1 && count != n + 2 {
            return Err(Error::VerificationFailed(format!(
                "column {a} meets {count} cells, expected {} or {}",
                n + 1,
                n + 2
            )));
        }
        b.tuple(if count == n + 1 { 1 } else { 2 }, &[ids[i]]);
        if a < w {
            b.tuple(0, &[ids[i], ids[i + 1]]);
            if orientation == Orientation::Undirected {
                b.tuple(0, &[ids[i + 1], ids[i]]);
            }
        }
    }
    b.frontier(ids[0]);
    b.frontier(*ids.last().unwrap());
    Ok(b.build())
}

/// Black/White word of the window, left to right (`true` = Black).
pub fn colour_word(m: &Structure) -> Vec<bool> {
    let black = m.language().index_of("Black").expect("Sturmian language");
    let mut cols: Vec<(i64, bool)> = m
        .elements()
        .map(|e| {
            let a: i64 = m.name(e).parse().expect("integer ids");
            (a, m.holds(black, &[e]))
        })
        .collect();
    cols.sort_unstable();
    cols.into_iter().map(|c| c.1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent count: enumerate rows b near the column and test whether
    /// the segment of the line over [a−½, a+½[ enters [b−½, b+½[, using the
    /// exact comparison of y-values at the two ends.
    fn oracle_count(r: Q, s: Q, a: i64) -> i128 {
        let y = |x: Q| r.checked_mul(x).unwrap().checked_add(s).unwrap();
        let xl = Q::rational(2 * a as i128 - 1, 2);
        let xr = Q::rational(2 * a as i128 + 1, 2);
        let (yl, yr) = (y(xl), y(xr));
        let centre = y(Q::int(a as i128)).floor();
        let mut count = 0;
        for b in centre - 10..=centre + 10 {
            let bot = Q::rational(2 * b - 1, 2);
            let top = Q::rational(2 * b + 1, 2);
            // points of the segment: x ∈ [xl, xr[, y between yl and yr with the
            // endpoint at xr excluded.
            let hit = if yl < yr {
                yl < top && yr > bot
            } else {
                yr < top && yl >= bot
            };
            if hit {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn columns_of_sqrt2() {
        let r = Q::sqrt(2);
        let s = Q::int(0);
        assert_eq!(column_count(r, s, 0).unwrap(), 3);
        assert_eq!(column_count(r, s, 1).unwrap(), 2);
        for a in -50..=50 {
            assert_eq!(column_count(r, s, a).unwrap(), oracle_count(r, s, a), "column {a}");
        }
    }

    #[test]
    fn oracle_agreement_on_boundary_cases() {
        let r = Q::sqrt(2);
        for s in ["0", "1/2", "sqrt(2)/2", "1/4", "1/3", "-sqrt(2)+1/2"] {
            let s: Q = s.parse().unwrap();
            for a in -40..=40 {
                assert_eq!(column_count(r, s, a).unwrap(), oracle_count(r, s, a));
            }
        }
        let r: Q = "-(1+sqrt(5))/2".parse().unwrap();
        for a in -40..=40 {
            let c = column_count(r, Q::rational(1, 3), a).unwrap();
            assert_eq!(c, oracle_count(r, Q::rational(1, 3), a));
            assert!(c == 2 || c == 3);
        }
    }

    #[test]
    fn rational_slope_rejected() {
        assert!(matches!(
            gen_sturmian(Q::rational(1, 2), Q::int(0), 5, Orientation::Directed),
            Err(Error::RationalSlope)
        ));
    }

    #[test]
    fn window_shape() {
        let m = gen_sturmian(Q::sqrt(2), Q::int(0), 5, Orientation::Directed).unwrap();
        assert_eq!(m.len(), 11);
        assert_eq!(m.faithful_radius(m.lookup("0").unwrap()), 5);
        assert!(colour_word(&m)[5]);
        let u = gen_sturmian(Q::sqrt(2), Q::int(0), 5, Orientation::Undirected).unwrap();
        assert_eq!(u.relation(0).len(), 20);
    }
}
