//! Weyl group enumeration, length strata, and the dot action.
//!
//! Elements are produced by breadth-first search over words in the simple
//! reflections, deduplicated by their action on rho (which is regular, so
//! the image determines the element). Each element stores a reduced word;
//! the linear action on a weight folds the word over simple reflections, so
//! no matrices are kept and rank-8 groups up to the enumeration cap fit
//! comfortably in memory.
//!
//! Enumeration refuses groups with more than 1,000,000 elements.

use crate::root_data::{RootSystem, Weight};
use crate::{Error, Result};
use num_traits::{Signed, Zero};
use std::collections::BTreeSet;

/// Hard cap on the order of an enumerated Weyl group.
pub const MAX_WEYL_ORDER: u64 = 1_000_000;

/// One group element: a reduced word in the simple reflections, stored
/// left to right in multiplication order (the rightmost letter acts first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeylElement {
    pub word: Vec<u8>,
    /// Image of rho in fundamental coordinates, the deduplication key.
    pub rho_image: Vec<i64>,
}

impl WeylElement {
    pub fn length(&self) -> usize {
        self.word.len()
    }

    pub fn sign(&self) -> i64 {
        if self.word.len() % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

/// A fully enumerated Weyl group with its length strata.
#[derive(Debug, Clone)]
pub struct WeylGroup {
    pub rs: RootSystem,
    /// All elements, sorted by length then by word.
    pub elements: Vec<WeylElement>,
    /// `strata[i]` lists indices into `elements` of the length-i elements.
    pub strata: Vec<Vec<usize>>,
}

impl WeylGroup {
    /// Enumerate the full group by BFS over reduced words.
    pub fn enumerate(rs: &RootSystem) -> Result<WeylGroup> {
        let order = rs.weyl_order();
        if order > MAX_WEYL_ORDER {
            return Err(Error::input(format!(
                "Weyl group of {} has order {order}, beyond the enumeration cap {MAX_WEYL_ORDER}",
                rs.label
            )));
        }
        let rank = rs.rank;
        let rho: Vec<i64> = vec![1; rank];
        let mut seen: BTreeSet<Vec<i64>> = BTreeSet::new();
        seen.insert(rho.clone());
        let mut elements = vec![WeylElement {
            word: Vec::new(),
            rho_image: rho.clone(),
        }];
        let mut frontier: Vec<usize> = vec![0];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            let mut layer: Vec<WeylElement> = Vec::new();
            for &idx in &frontier {
                let w = elements[idx].clone();
                for i in 0..rank as u8 {
                    let img = reflect_int(&rs.cartan, i as usize, &w.rho_image);
                    if seen.insert(img.clone()) {
                        let mut word = Vec::with_capacity(w.word.len() + 1);
                        word.push(i);
                        word.extend_from_slice(&w.word);
                        layer.push(WeylElement {
                            word,
                            rho_image: img,
                        });
                    }
                }
            }
            layer.sort_by(|a, b| a.word.cmp(&b.word));
            layer.dedup_by(|a, b| a.rho_image == b.rho_image);
            for el in layer {
                next.push(elements.len());
                elements.push(el);
            }
            frontier = next;
        }
        assert_eq!(elements.len() as u64, order, "BFS disagrees with the order table");
        let max_len = elements.last().map_or(0, |w| w.length());
        let mut strata = vec![Vec::new(); max_len + 1];
        for (i, w) in elements.iter().enumerate() {
            strata[w.length()].push(i);
        }
        Ok(WeylGroup {
            rs: rs.clone(),
            elements,
            strata,
        })
    }

    /// Linear action of an element on a weight.
    pub fn act(&self, w: &WeylElement, lambda: &Weight) -> Weight {
        apply_word(&self.rs, &w.word, lambda)
    }

    /// Dot action `w . lambda = w(lambda + rho) - rho`.
    pub fn dot(&self, w: &WeylElement, lambda: &Weight) -> Weight {
        dot_word(&self.rs, &w.word, lambda)
    }

    /// The longest element.
    pub fn longest(&self) -> &WeylElement {
        let last = self.strata.last().expect("nonempty strata");
        assert_eq!(last.len(), 1, "longest element must be unique");
        &self.elements[last[0]]
    }
}

fn reflect_int(cartan: &[Vec<i64>], i: usize, v: &[i64]) -> Vec<i64> {
    let mut out = v.to_vec();
    let c = v[i];
    if c != 0 {
        for (j, row) in cartan.iter().enumerate() {
            out[j] -= c * row[i];
        }
    }
    out
}

/// Apply a word in the simple reflections to a weight, rightmost letter
/// first.
pub fn apply_word(rs: &RootSystem, word: &[u8], lambda: &Weight) -> Weight {
    let mut v = lambda.clone();
    for &i in word.iter().rev() {
        v = rs.simple_reflect(i as usize, &v);
    }
    v
}

/// Dot action of a word: shift by rho, act, shift back.
pub fn dot_word(rs: &RootSystem, word: &[u8], lambda: &Weight) -> Weight {
    apply_word(rs, word, &lambda.add(&rs.rho)).sub(&rs.rho)
}

/// Render a word as `"s1 s2 s1"`; the identity is `"e"`.
pub fn word_to_string(word: &[u8]) -> String {
    if word.is_empty() {
        return "e".to_string();
    }
    word.iter()
        .map(|&i| format!("s{}", i + 1))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Parse `"s1 s2 s1"` (or `"e"`/empty for the identity) into a word.
pub fn parse_word(rank: usize, s: &str) -> Result<Vec<u8>> {
    let s = s.trim();
    if s.is_empty() || s == "e" {
        return Ok(Vec::new());
    }
    let mut word = Vec::new();
    for tok in s.split_whitespace() {
        let idx: usize = tok
            .strip_prefix('s')
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::input(format!("bad reflection token {tok:?}")))?;
        if idx == 0 || idx > rank {
            return Err(Error::input(format!(
                "reflection index {idx} out of range 1..={rank}"
            )));
        }
        word.push((idx - 1) as u8);
    }
    Ok(word)
}

/// Sort a weight into the dominant chamber by simple reflections.
///
/// Returns the dominant representative, the sign of the sorting element,
/// and whether the weight was regular (no coordinate hit zero).
pub fn make_dominant(rs: &RootSystem, mu: &Weight) -> (Weight, i64, bool) {
    let mut v = mu.clone();
    let mut sign = 1i64;
    loop {
        match (0..rs.rank).find(|&i| v.0[i].is_negative()) {
            Some(i) => {
                v = rs.simple_reflect(i, &v);
                sign = -sign;
            }
            None => break,
        }
    }
    let regular = v.0.iter().all(|c| !c.is_zero());
    (v, sign, regular)
}

/// Dominant representative for the dot action: sort `mu + rho`, then shift
/// back. The sign and regularity refer to the shifted weight.
pub fn dot_make_dominant(rs: &RootSystem, mu: &Weight) -> (Weight, i64, bool) {
    let (dom, sign, regular) = make_dominant(rs, &mu.add(&rs.rho));
    (dom.sub(&rs.rho), sign, regular)
}

/// Full Weyl orbit of a weight, by closure under simple reflections.
pub fn weight_orbit(rs: &RootSystem, lambda: &Weight) -> Vec<Weight> {
    let mut seen: BTreeSet<Weight> = BTreeSet::new();
    seen.insert(lambda.clone());
    let mut queue = vec![lambda.clone()];
    while let Some(v) = queue.pop() {
        for i in 0..rs.rank {
            let img = rs.simple_reflect(i, &v);
            if seen.insert(img.clone()) {
                queue.push(img);
            }
        }
    }
    seen.into_iter().collect()
}
