//! ℤ^d windows and tori with periodic unary colourings.
//!
//! Directions are `E1`…`Ed` (`Succ` when d = 1), with `Ei(x, x + e_i)`. Points
//! are written `x1:x2:…`; coordinates run over 0..size−1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::structure::{Language, Structure, StructureBuilder};

/// Colour of x is `pattern[(Σ weights_i · x_i) mod pattern.len()]`; an empty
/// pattern means no colour relations at all.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Coloring {
    pub weights: Vec<i64>,
    pub pattern: Vec<String>,
}

impl Coloring {
    pub fn none() -> Self {
        Coloring::default()
    }

    pub fn checkerboard(d: usize) -> Self {
        Coloring {
            weights: vec![1; d],
            pattern: vec!["Black".into(), "White".into()],
        }
    }

    /// Period-p colouring of ℤ: Black at multiples of p, White elsewhere.
    pub fn period(p: usize) -> Self {
        let mut pattern = vec!["White".to_string(); p];
        pattern[0] = "Black".into();
        Coloring {
            weights: vec![1],
            pattern,
        }
    }

    /// Distinct colour names, in first-occurrence order.
    pub fn colours(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for c in &self.pattern {
            if !out.contains(c) {
                out.push(c.clone());
            }
        }
        out
    }

    pub fn colour_of(&self, x: &[i64]) -> Option<&str> {
        if self.pattern.is_empty() {
            return None;
        }
        let v: i64 = x.iter().zip(&self.weights).map(|(a, w)| a * w).sum();
        Some(&self.pattern[v.rem_euclid(self.pattern.len() as i64) as usize])
    }
}

pub fn grid_language(d: usize, coloring: &Coloring) -> Result<Language> {
    let mut symbols: Vec<(String, usize)> = if d == 1 {
        vec![("Succ".into(), 2)]
    } else {
        (1..=d).map(|i| (format!("E{i}"), 2)).collect()
    };
    symbols.extend(coloring.colours().into_iter().map(|c| (c, 1)));
    Language::new(symbols)
}

pub fn point_id(x: &[i64]) -> String {
    x.iter().map(i64::to_string).collect::<Vec<_>>().join(":")
}

pub fn gen_grid(sizes: &[usize], torus: bool, coloring: &Coloring) -> Result<Structure> {
    let d = sizes.len();
    if d == 0 || sizes.contains(&0) {
        return Err(Error::InvalidLanguage("grid needs positive sizes".into()));
    }
    if !coloring.pattern.is_empty() && coloring.weights.len() != d {
        return Err(Error::InvalidLanguage(
            "colouring weights must match the dimension".into(),
        ));
    }
    let lang = grid_language(d, coloring)?;
    let colour_sym: Vec<usize> = coloring.colours().iter().map(|c| lang.index_of(c).unwrap()).collect();
    let colours = coloring.colours();
    let mut b = StructureBuilder::new(lang);
    let total: usize = sizes.iter().product();
    let coords = |mut n: usize| -> Vec<i64> {
        let mut x = vec![0; d];
        for i in 0..d {
            x[i] = (n % sizes[i]) as i64;
            n /= sizes[i];
        }
        x
    };
    let ids: Vec<u32> = (0..total).map(|n| b.element(&point_id(&coords(n)))).collect();
    let index = |x: &[i64]| -> usize {
        let mut n = 0;
        for i in (0..d).rev() {
            n = n * sizes[i] + x[i] as usize;
        }
        n
    };
    for n in 0..total {
        let x = coords(n);
        let mut boundary = false;
        for i in 0..d {
            let mut y = x.clone();
            y[i] += 1;
            if y[i] as usize == sizes[i] {
                if torus {
                    y[i] = 0;
                } else {
                    boundary = true;
                    continue;
                }
            }
            b.tuple(i, &[ids[n], ids[index(&y)]]);
            if !torus && x[i] == 0 {
                boundary = true;
            }
        }
        if !torus && (0..d).any(|i| x[i] == 0 || x[i] as usize == sizes[i] - 1) {
            boundary = true;
        }
        if boundary {
            b.frontier(ids[n]);
        }
        if let Some(c) = coloring.colour_of(&x) {
            let k = colours.iter().position(|s| s == c).unwrap();
            b.tuple(colour_sym[k], &[ids[n]]);
        }
    }
    Ok(b.build())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iso::census;

    #[test]
    fn closed_cycle() {
        let m = gen_grid(&[12], true, &Coloring::none()).unwrap();
        assert_eq!(m.len(), 12);
        assert_eq!(m.relation(0).len(), 12);
        assert!(m.is_closed());
    }

    #[test]
    fn checkerboard_census() {
        let m = gen_grid(&[9, 9], false, &Coloring::checkerboard(2)).unwrap();
        assert_eq!(census(&m, 1).unwrap().len(), 2);
        let center = m.lookup("4:4").unwrap();
        assert_eq!(m.faithful_radius(center), 4);
    }
}
