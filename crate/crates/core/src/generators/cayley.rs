//! Balls in the Cayley structure of the free group on k generators:
//! `R_i(y, z)` iff z = y·x_i. Generators are the letters `a`, `b`, …; their
//! inverses are the upper-case letters; the identity is `e`.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::structure::{Language, Structure, StructureBuilder};

pub fn cayley_language(k: usize) -> Language {
    Language::new((1..=k).map(|i| (format!("R{i}"), 2))).expect("static language")
}

fn letter(i: usize, inverse: bool) -> char {
    let c = (b'a' + i as u8) as char;
    if inverse {
        c.to_ascii_uppercase()
    } else {
        c
    }
}

/// Reduced word of y·x_i (or y·x_i⁻¹).
pub fn multiply(word: &str, i: usize, inverse: bool) -> String {
    let l = letter(i, inverse);
    let inv = letter(i, !inverse);
    let w = if word == "e" { "" } else { word };
    let mut s = w.to_string();
    if s.ends_with(inv) {
        s.pop();
    } else {
        s.push(l);
    }
    if s.is_empty() {
        "e".into()
    } else {
        s
    }
}

pub fn word_length(word: &str) -> usize {
    if word == "e" {
        0
    } else {
        word.chars().count()
    }
}

pub fn gen_cayley_free(k: usize, radius: u32) -> Result<Structure> {
    if k == 0 || k > 26 {
        return Err(Error::InvalidLanguage(format!("free group rank {k} outside 1..=26")));
    }
    let mut b = StructureBuilder::new(cayley_language(k));
    let mut layer = vec!["e".to_string()];
    let mut ids: HashMap<String, u32> = HashMap::new();
    ids.insert("e".into(), b.element("e"));
    for _ in 0..radius {
        let mut next = Vec::new();
        for w in &layer {
            for i in 0..k {
                for inv in [false, true] {
                    let z = multiply(w, i, inv);
                    if word_length(&z) > word_length(w) {
                        ids.insert(z.clone(), b.element(&z));
                        next.push(z);
                    }
                }
            }
        }
        layer = next;
    }
    for (w, &y) in &ids {
        for i in 0..k {
            let z = multiply(w, i, false);
            if let Some(&t) = ids.get(&z) {
                b.tuple(i, &[y, t]);
            }
        }
    }
    for w in &layer {
        if radius > 0 || w == "e" {
            let y = ids[w];
            b.frontier(y);
        }
    }
    Ok(b.build())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_match_sphere_counts() {
        assert_eq!(gen_cayley_free(1, 5).unwrap().len(), 11);
        for r in 0..5u32 {
            // 1 + Σ_{n=1}^{r} 2k(2k−1)^{n−1} with k = 2
            let expected: usize = 1 + (1..=r).map(|n| 4 * 3usize.pow(n - 1)).sum::<usize>();
            assert_eq!(gen_cayley_free(2, r).unwrap().len(), expected);
        }
        assert_eq!(gen_cayley_free(2, 2).unwrap().len(), 17);
    }

    #[test]
    fn reduction() {
        assert_eq!(multiply("aB", 1, false), "a");
        assert_eq!(multiply("a", 0, true), "e");
        assert_eq!(multiply("e", 0, true), "A");
    }
}
