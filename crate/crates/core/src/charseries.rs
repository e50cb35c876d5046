//! Sparse truncated character series and one-variable q-series.
//!
//! A [`CharSeries`] stores finitely many terms `c * e^(A - beta - n*delta)`
//! where `A` is the anchor weight (`leading`), `beta` is a nonnegative
//! integer combination of simple roots recorded by its simple-root
//! coordinates (`depth`), and `n` counts powers of the imaginary unit
//! `delta`. Invariants:
//!
//! * no zero coefficient is ever stored;
//! * every stored key satisfies `n <= trunc.delta_max` and
//!   `height(depth) <= trunc.depth_max`;
//! * keys are ordered by `n` first, then lexicographically by `depth`, so
//!   the first discrepancy between two series is deterministic;
//! * dropping a term below the depth window during multiplication is
//!   ordinary truncation, but dropping previously stored content while
//!   re-anchoring sets the sticky `clipped` flag, and clipped series refuse
//!   q-specialization and window comparison.
//!
//! Division by `(1 - e^(-gamma - n0*delta))` is a cumulative sum in key
//! order, exact on the window: with `s = (gamma, n0)` as a key step,
//! `out[k] = in[k] + out[k - s]`, well founded because the step strictly
//! increases `(n, depth)` in the key order for lowering factors and
//! strictly increases `n` for raising ones.
//!
//! [`QSeries`] is a truncated series in one variable `q` (the image of
//! `e^-delta`); [`QPoly`] is an exact sparse polynomial in `q` used where
//! an identity holds without truncation.

use crate::root_data::{RootSystem, Weight};
use crate::{Error, Q, Result, Z};
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::fmt;

/// Truncation window: `delta_max` bounds the delta exponent, `depth_max`
/// bounds the height of the real-root depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Trunc {
    pub delta_max: u32,
    pub depth_max: u32,
}

impl Trunc {
    pub fn new(delta_max: u32, depth_max: u32) -> Self {
        Trunc {
            delta_max,
            depth_max,
        }
    }
}

/// Exponent key of one term, relative to the anchor.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Key {
    pub n: u32,
    pub depth: Vec<u32>,
}

impl Key {
    pub fn origin(rank: usize) -> Self {
        Key {
            n: 0,
            depth: vec![0; rank],
        }
    }

    pub fn height(&self) -> u32 {
        self.depth.iter().sum()
    }
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ds: Vec<String> = self.depth.iter().map(|d| d.to_string()).collect();
        write!(f, "depth [{}], delta {}", ds.join(","), self.n)
    }
}

/// First point where two series disagree, in key order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Discrepancy {
    pub key: Key,
    pub left: Z,
    pub right: Z,
}

/// A truncated character series anchored at `leading`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharSeries {
    leading: Weight,
    trunc: Trunc,
    terms: BTreeMap<Key, Z>,
    clipped: bool,
}

impl CharSeries {
    /// The zero series with the given anchor and window.
    pub fn zero(leading: Weight, trunc: Trunc) -> Self {
        CharSeries {
            leading,
            trunc,
            terms: BTreeMap::new(),
            clipped: false,
        }
    }

    /// The single term `e^leading`.
    pub fn monomial(leading: Weight, trunc: Trunc) -> Self {
        let rank = leading.rank();
        let mut s = CharSeries::zero(leading, trunc);
        s.terms.insert(Key::origin(rank), Z::one());
        s
    }

    /// The single term `e^mu` in a window anchored at `anchor`; the anchor
    /// must dominate `mu` by a nonnegative integer root combination.
    pub fn monomial_below(
        rs: &RootSystem,
        anchor: Weight,
        mu: &Weight,
        trunc: Trunc,
    ) -> Result<Self> {
        let diff = anchor.sub(mu);
        let coords = rs.weight_to_root_coords(&diff);
        let mut depth = Vec::with_capacity(coords.len());
        for c in &coords {
            if !c.is_integer() || c.is_negative() {
                return Err(Error::input(
                    "anchor must dominate the term by an integral root combination",
                ));
            }
            depth.push(u32::try_from(c.to_integer()).map_err(|_| {
                Error::input("term sits too far below the anchor")
            })?);
        }
        let mut s = CharSeries::zero(anchor, trunc);
        let key = Key { n: 0, depth };
        if !s.inside(&key) {
            return Err(Error::input("term falls outside the depth window"));
        }
        s.terms.insert(key, Z::one());
        Ok(s)
    }

    pub fn rank(&self) -> usize {
        self.leading.rank()
    }

    pub fn leading(&self) -> &Weight {
        &self.leading
    }

    pub fn trunc(&self) -> Trunc {
        self.trunc
    }

    pub fn is_clipped(&self) -> bool {
        self.clipped
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Key, &Z)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, key: &Key) -> Z {
        self.terms.get(key).cloned().unwrap_or_else(Z::zero)
    }

    pub fn coeff_at(&self, depth: &[u32], n: u32) -> Z {
        self.coeff(&Key {
            n,
            depth: depth.to_vec(),
        })
    }

    fn inside(&self, key: &Key) -> bool {
        key.n <= self.trunc.delta_max && key.height() <= self.trunc.depth_max
    }

    fn add_term(&mut self, key: Key, c: Z) {
        if c.is_zero() || !self.inside(&key) {
            return;
        }
        let slot = self.terms.entry(key).or_insert_with(Z::zero);
        *slot += c;
        if slot.is_zero() {
            // Re-borrowing to remove; find the key again.
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    /// Multiply by `e^mu`: the anchor moves, the terms do not.
    pub fn translate(&self, mu: &Weight) -> Self {
        let mut out = self.clone();
        out.leading = out.leading.add(mu);
        out
    }

    /// Scale every coefficient.
    pub fn scale(&self, c: &Z) -> Self {
        let mut out = self.clone();
        if c.is_zero() {
            out.terms.clear();
            return out;
        }
        for v in out.terms.values_mut() {
            *v = &*v * c;
        }
        out
    }

    /// Sum of two series sharing anchor and window.
    pub fn add(&self, other: &CharSeries) -> Result<Self> {
        if self.leading != other.leading || self.trunc != other.trunc {
            return Err(Error::input(
                "series addition requires a shared anchor and window",
            ));
        }
        let mut out = self.clone();
        out.clipped |= other.clipped;
        for (k, v) in &other.terms {
            out.add_term(k.clone(), v.clone());
        }
        Ok(out)
    }

    /// Integer linear combination of series with possibly different anchors.
    ///
    /// The result is anchored at the join of the anchors in the root order;
    /// each anchor must differ from the join by a nonnegative integer
    /// combination of simple roots, otherwise the combination is rejected.
    /// All windows must agree.
    pub fn linear_combine(
        rs: &RootSystem,
        parts: &[(Z, CharSeries)],
    ) -> Result<CharSeries> {
        let Some((_, first)) = parts.first() else {
            return Err(Error::input("empty linear combination"));
        };
        let trunc = first.trunc;
        let rank = first.rank();
        if parts.iter().any(|(_, s)| s.trunc != trunc || s.rank() != rank) {
            return Err(Error::input(
                "linear combination requires a shared window",
            ));
        }
        // Root coordinates of each anchor relative to the first.
        let mut rel: Vec<Vec<Q>> = Vec::with_capacity(parts.len());
        for (_, s) in parts {
            let diff = s.leading.sub(&first.leading);
            rel.push(rs.weight_to_root_coords(&diff));
        }
        let mut join_rel = vec![Q::zero(); rank];
        for r in &rel {
            for (j, c) in r.iter().enumerate() {
                if !c.is_integer() {
                    return Err(Error::input(
                        "anchors differ by a non-integral root combination",
                    ));
                }
                if c > &join_rel[j] {
                    join_rel[j] = c.clone();
                }
            }
        }
        let join = first
            .leading
            .add(&rs.root_coords_to_weight(&join_rel));
        let mut out = CharSeries::zero(join, trunc);
        for ((c, s), r) in parts.iter().zip(&rel) {
            let shift: Vec<u32> = join_rel
                .iter()
                .zip(r)
                .map(|(j, ri)| u32::try_from((j - ri).to_integer()).expect("join shift"))
                .collect();
            out.clipped |= s.clipped;
            for (k, v) in &s.terms {
                let key = Key {
                    n: k.n,
                    depth: k.depth.iter().zip(&shift).map(|(d, s)| d + s).collect(),
                };
                // Content pushed past the new depth edge sits below the
                // joined window, which is ordinary truncation: dropping it
                // cannot change any coefficient that stays inside.
                out.add_term(key, c * v);
            }
        }
        Ok(out)
    }

    /// Exact product on the shared window.
    pub fn mul(&self, other: &CharSeries) -> Result<Self> {
        if self.trunc != other.trunc || self.rank() != other.rank() {
            return Err(Error::input("product requires a shared window"));
        }
        let mut out = CharSeries::zero(self.leading.add(&other.leading), self.trunc);
        out.clipped = self.clipped || other.clipped;
        for (ka, va) in &self.terms {
            for (kb, vb) in &other.terms {
                let n = ka.n + kb.n;
                if n > self.trunc.delta_max {
                    continue;
                }
                let key = Key {
                    n,
                    depth: ka.depth.iter().zip(&kb.depth).map(|(a, b)| a + b).collect(),
                };
                out.add_term(key, va * vb);
            }
        }
        Ok(out)
    }

    /// Multiply by `e^(-s*delta)`, dropping what leaves the window.
    pub fn shift_delta(&self, s: u32) -> Self {
        let mut out = CharSeries::zero(self.leading.clone(), self.trunc);
        out.clipped = self.clipped;
        for (k, v) in &self.terms {
            let key = Key {
                n: k.n + s,
                depth: k.depth.clone(),
            };
            out.add_term(key, v.clone());
        }
        out
    }

    /// Re-key the series under a higher anchor and a new window.
    ///
    /// `new_leading` must dominate the current anchor by a nonnegative
    /// integral combination of simple roots. Stored terms move down by the
    /// offset; whatever falls past the new depth edge is ordinary
    /// truncation and is dropped silently.
    pub fn embed(
        &self,
        rs: &RootSystem,
        new_leading: &Weight,
        new_trunc: Trunc,
    ) -> Result<Self> {
        let diff = new_leading.sub(&self.leading);
        let rel = rs.weight_to_root_coords(&diff);
        let mut offset = Vec::with_capacity(rel.len());
        for c in &rel {
            if !c.is_integer() || c < &Q::zero() {
                return Err(Error::input(
                    "embedding anchor must dominate by an integral root combination",
                ));
            }
            offset.push(u32::try_from(c.to_integer()).expect("embed offset"));
        }
        let mut out = CharSeries::zero(new_leading.clone(), new_trunc);
        out.clipped = self.clipped;
        for (k, v) in &self.terms {
            let key = Key {
                n: k.n,
                depth: k.depth.iter().zip(&offset).map(|(d, o)| d + o).collect(),
            };
            out.add_term(key, v.clone());
        }
        Ok(out)
    }

    /// Narrow the depth window, dropping deeper content (ordinary truncation).
    pub fn truncate_depth(&self, depth_max: u32) -> Self {
        let mut out = self.clone();
        out.trunc.depth_max = depth_max;
        out.terms.retain(|k, _| k.height() <= depth_max);
        out
    }

    /// Coefficient of `e^mu * q^n`, zero when `mu` is not reachable from the
    /// anchor by a nonnegative integral root combination.
    pub fn coeff_of_weight(&self, rs: &RootSystem, mu: &Weight, n: u32) -> Z {
        let diff = self.leading.sub(mu);
        let rel = rs.weight_to_root_coords(&diff);
        let mut depth = Vec::with_capacity(rel.len());
        for c in &rel {
            if !c.is_integer() || c < &Q::zero() {
                return Z::zero();
            }
            depth.push(u32::try_from(c.to_integer()).expect("weight depth"));
        }
        self.coeff(&Key { n, depth })
    }

    /// Divide by `(1 - e^(-gamma - n0*delta))` at a fixed anchor.
    ///
    /// `gamma` must be a root or zero; a raising direction (negative of a
    /// positive root, or zero) requires `n0 >= 1`. The anchor does not
    /// move, so the caller is responsible for having budgeted the window.
    pub fn mul_factor_inv(&self, rs: &RootSystem, gamma: &Weight, n0: u32) -> Result<Self> {
        let step = classify_factor(rs, gamma, n0)?;
        if step.n == 0 && step.root.iter().all(|&c| c == 0) {
            unreachable!("classify_factor rejects the unit exponent");
        }
        let mut out = self.clone();
        if step.n > self.trunc.delta_max {
            // The factor only changes layers beyond the window.
            return Ok(out);
        }
        for key in window_keys(self.rank(), self.trunc) {
            let Some(prev_key) = key_minus(&key, &step) else {
                continue;
            };
            if !self.inside(&prev_key) {
                continue;
            }
            let prev = out.terms.get(&prev_key).cloned();
            if let Some(p) = prev {
                let slot = out.terms.entry(key).or_insert_with(Z::zero);
                *slot += p;
                if slot.is_zero() {
                    out.terms.retain(|_, v| !v.is_zero());
                }
            }
        }
        Ok(out)
    }

    /// Divide by `(1 - e^(-gamma - n0*delta))`, re-anchoring first when the
    /// factor raises weights so that the result is again supported below
    /// its anchor.
    pub fn invert_factor(&self, rs: &RootSystem, gamma: &Weight, n0: u32) -> Result<Self> {
        let step = classify_factor(rs, gamma, n0)?;
        let raising = step.root.iter().any(|&c| c < 0);
        if !raising {
            return self.mul_factor_inv(rs, gamma, n0);
        }
        // Highest reachable term: k copies of -gamma with k*n0 <= delta_max.
        let k_max = self.trunc.delta_max / n0;
        let lift = gamma.scale(&crate::q_int(-(k_max as i64)));
        let lift_coords: Vec<u32> = step
            .root
            .iter()
            .map(|&c| u32::try_from(-c * k_max as i64).expect("lift coords"))
            .collect();
        let mut shifted = CharSeries::zero(self.leading.add(&lift), self.trunc);
        shifted.clipped = self.clipped;
        for (k, v) in &self.terms {
            let key = Key {
                n: k.n,
                depth: k.depth.iter().zip(&lift_coords).map(|(d, l)| d + l).collect(),
            };
            if !shifted.inside(&key) {
                shifted.clipped = true;
                continue;
            }
            shifted.add_term(key, v.clone());
        }
        shifted.mul_factor_inv(rs, gamma, n0)
    }

    /// Forget the real directions, keeping `q = e^-delta`.
    ///
    /// Rejected when the series has been clipped or any delta layer has a
    /// stored term at the edge of the depth window, since the layer sum
    /// could then be missing truncated terms.
    pub fn specialize_q(&self) -> Result<QSeries> {
        if self.clipped {
            return Err(Error::input(
                "q-specialization of a clipped series is unreliable",
            ));
        }
        let mut layer_max: BTreeMap<u32, u32> = BTreeMap::new();
        for k in self.terms.keys() {
            let h = k.height();
            let e = layer_max.entry(k.n).or_insert(0);
            if h > *e {
                *e = h;
            }
        }
        if self.trunc.depth_max > 0 {
            for (n, h) in &layer_max {
                if *h + 1 > self.trunc.depth_max {
                    return Err(Error::input(format!(
                        "delta layer {n} reaches the depth window edge; widen the window"
                    )));
                }
            }
        }
        let mut coeffs: BTreeMap<i64, Z> = BTreeMap::new();
        for (k, v) in &self.terms {
            let slot = coeffs.entry(k.n as i64).or_insert_with(Z::zero);
            *slot += v;
        }
        coeffs.retain(|_, v| !v.is_zero());
        Ok(QSeries {
            trunc: self.trunc.delta_max,
            coeffs,
        })
    }

    /// Term-by-term comparison on identical windows; `None` means equal.
    pub fn window_equal(&self, other: &CharSeries) -> Result<Option<Discrepancy>> {
        if self.leading != other.leading || self.trunc != other.trunc {
            return Err(Error::input(
                "window comparison requires identical anchors and windows",
            ));
        }
        if self.clipped || other.clipped {
            return Err(Error::input("window comparison of a clipped series"));
        }
        let mut keys: Vec<&Key> = self.terms.keys().chain(other.terms.keys()).collect();
        keys.sort();
        keys.dedup();
        for k in keys {
            let l = self.coeff(k);
            let r = other.coeff(k);
            if l != r {
                return Ok(Some(Discrepancy {
                    key: k.clone(),
                    left: l,
                    right: r,
                }));
            }
        }
        Ok(None)
    }

    /// JSON form with big-integer coefficients rendered as strings.
    pub fn to_json(&self) -> Value {
        let leading: Vec<String> = self.leading.0.iter().map(|c| c.to_string()).collect();
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|(k, v)| {
                json!({
                    "depth": k.depth,
                    "n": k.n,
                    "c": v.to_string(),
                })
            })
            .collect();
        json!({
            "leading": leading,
            "trunc": {"N": self.trunc.delta_max, "D": self.trunc.depth_max},
            "terms": terms,
        })
    }
}

struct FactorStep {
    root: Vec<i64>,
    n: u32,
}

fn classify_factor(rs: &RootSystem, gamma: &Weight, n0: u32) -> Result<FactorStep> {
    let coords_q = rs.weight_to_root_coords(gamma);
    let mut coords = Vec::with_capacity(coords_q.len());
    for c in &coords_q {
        if !c.is_integer() {
            return Err(Error::input("factor exponent is not in the root lattice"));
        }
        let v = c.to_integer();
        let small = i64::try_from(v).map_err(|_| Error::input("factor exponent too large"))?;
        coords.push(small);
    }
    let is_zero = coords.iter().all(|&c| c == 0);
    if is_zero {
        if n0 == 0 {
            return Err(Error::input("factor (1 - 1) is not invertible"));
        }
        return Ok(FactorStep { root: coords, n: n0 });
    }
    let abs: Vec<i64> = coords.iter().map(|c| c.abs()).collect();
    let matches_root = rs.positive.iter().any(|r| r.coords == abs);
    let all_neg = coords.iter().all(|&c| c <= 0);
    let all_pos = coords.iter().all(|&c| c >= 0);
    if !matches_root || !(all_neg || all_pos) {
        return Err(Error::input("factor exponent must be a root or zero"));
    }
    if all_neg && n0 == 0 {
        return Err(Error::input(
            "a raising factor needs a positive delta depth",
        ));
    }
    Ok(FactorStep { root: coords, n: n0 })
}

fn key_minus(key: &Key, step: &FactorStep) -> Option<Key> {
    if key.n < step.n {
        return None;
    }
    let mut depth = Vec::with_capacity(key.depth.len());
    for (d, s) in key.depth.iter().zip(&step.root) {
        let v = *d as i64 - s;
        if v < 0 {
            return None;
        }
        depth.push(v as u32);
    }
    Some(Key {
        n: key.n - step.n,
        depth,
    })
}

/// All keys in the window, in key order.
fn window_keys(rank: usize, trunc: Trunc) -> Vec<Key> {
    let mut depths = Vec::new();
    let mut cur = vec![0u32; rank];
    gen_depths(rank, trunc.depth_max, 0, 0, &mut cur, &mut depths);
    depths.sort();
    let mut keys = Vec::with_capacity(depths.len() * (trunc.delta_max as usize + 1));
    for n in 0..=trunc.delta_max {
        for d in &depths {
            keys.push(Key {
                n,
                depth: d.clone(),
            });
        }
    }
    keys
}

fn gen_depths(
    rank: usize,
    depth_max: u32,
    idx: usize,
    used: u32,
    cur: &mut Vec<u32>,
    out: &mut Vec<Vec<u32>>,
) {
    if idx == rank {
        out.push(cur.clone());
        return;
    }
    for v in 0..=(depth_max - used) {
        cur[idx] = v;
        gen_depths(rank, depth_max, idx + 1, used + v, cur, out);
    }
    cur[idx] = 0;
}

/// Which family of real affine root directions to invert.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RealRootSet {
    /// Lowering factors for n >= 0 and raising factors for n >= 1.
    PositiveReal,
    /// Both sign directions, n >= 1 only.
    RealNGe1,
    /// `(1 - q^n)^-rank` for n >= 1, no real direction.
    ImaginaryMultR,
}

/// Factor exponents `(gamma, n0)` for `mul_factor_inv`, covering the chosen
/// real-root family on delta layers up to `delta_max`. The order is fixed
/// (layer, then root index, lowering before raising) so that repeated runs
/// walk the window identically.
pub fn real_root_factors(
    rs: &RootSystem,
    which: RealRootSet,
    delta_max: u32,
) -> Vec<(Weight, u32)> {
    let mut out = Vec::new();
    match which {
        RealRootSet::PositiveReal | RealRootSet::RealNGe1 => {
            let start = if which == RealRootSet::PositiveReal { 0 } else { 1 };
            for n in start..=delta_max {
                for root in &rs.positive {
                    let alpha = root.weight();
                    out.push((alpha.clone(), n));
                    if n >= 1 {
                        out.push((alpha.scale(&crate::q_int(-1)), n));
                    }
                }
            }
        }
        RealRootSet::ImaginaryMultR => {
            for n in 1..=delta_max {
                for _ in 0..rs.rank {
                    out.push((Weight::zero(rs.rank), n));
                }
            }
        }
    }
    out
}

/// Inverse product over a family of real affine root directions.
///
/// The raising directions can push content up to `delta_max` copies of the
/// highest root above the base weight 0, so for the two real families the
/// result is anchored at `delta_max * theta` with the depth window widened
/// by the same height; everything at depth `<= trunc.depth_max` below the
/// base is then complete. The imaginary family needs no widening and comes
/// back exactly on `trunc` anchored at 0.
pub fn affine_real_root_product(
    rs: &RootSystem,
    which: RealRootSet,
    trunc: Trunc,
) -> Result<CharSeries> {
    let factors = real_root_factors(rs, which, trunc.delta_max);
    if which == RealRootSet::ImaginaryMultR {
        let mut s = CharSeries::monomial(Weight::zero(rs.rank), trunc);
        for (gamma, n0) in &factors {
            s = s.mul_factor_inv(rs, gamma, *n0)?;
        }
        return Ok(s);
    }
    let raise = trunc.delta_max as i64 * rs.theta.height;
    let raise = u32::try_from(raise).expect("window raise");
    let wide = Trunc::new(trunc.delta_max, trunc.depth_max + 2 * raise);
    let anchor = rs
        .theta
        .weight()
        .scale(&crate::q_int(trunc.delta_max as i64));
    let mut s = CharSeries::monomial_below(rs, anchor, &Weight::zero(rs.rank), wide)?;
    for (gamma, n0) in &factors {
        s = s.mul_factor_inv(rs, gamma, *n0)?;
    }
    Ok(s.truncate_depth(trunc.depth_max + raise))
}

/// A q-series truncated at `q^trunc`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QSeries {
    pub trunc: u32,
    pub coeffs: BTreeMap<i64, Z>,
}

impl QSeries {
    pub fn zero(trunc: u32) -> Self {
        QSeries {
            trunc,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn one(trunc: u32) -> Self {
        let mut s = QSeries::zero(trunc);
        s.coeffs.insert(0, Z::one());
        s
    }

    pub fn coeff(&self, n: i64) -> Z {
        self.coeffs.get(&n).cloned().unwrap_or_else(Z::zero)
    }

    pub fn set(&mut self, n: i64, c: Z) {
        if c.is_zero() {
            self.coeffs.remove(&n);
        } else {
            self.coeffs.insert(n, c);
        }
    }

    pub fn add(&self, other: &QSeries) -> QSeries {
        let trunc = self.trunc.min(other.trunc);
        let mut out = QSeries::zero(trunc);
        for (n, c) in self.coeffs.iter().chain(other.coeffs.iter()) {
            if *n <= trunc as i64 {
                let slot = out.coeffs.entry(*n).or_insert_with(Z::zero);
                *slot += c;
            }
        }
        out.coeffs.retain(|_, v| !v.is_zero());
        out
    }

    pub fn scale(&self, c: &Z) -> QSeries {
        let mut out = self.clone();
        if c.is_zero() {
            out.coeffs.clear();
            return out;
        }
        for v in out.coeffs.values_mut() {
            *v = &*v * c;
        }
        out
    }

    pub fn mul(&self, other: &QSeries) -> QSeries {
        let trunc = self.trunc.min(other.trunc);
        let mut out = QSeries::zero(trunc);
        for (na, ca) in &self.coeffs {
            for (nb, cb) in &other.coeffs {
                let n = na + nb;
                if n <= trunc as i64 {
                    let slot = out.coeffs.entry(n).or_insert_with(Z::zero);
                    *slot += ca * cb;
                }
            }
        }
        out.coeffs.retain(|_, v| !v.is_zero());
        out
    }

    /// Divide by `(1 - q^m)`, `m >= 1`, by cumulative sums.
    pub fn div_one_minus_q(&self, m: u32) -> QSeries {
        assert!(m >= 1, "pure power must be positive");
        let mut out = self.clone();
        for n in 0..=(self.trunc as i64) {
            let prev = out.coeff(n - m as i64);
            if !prev.is_zero() {
                let c = out.coeff(n) + prev;
                out.set(n, c);
            }
        }
        out
    }

    /// First exponent where the two series differ; `None` means equal on
    /// the shared window.
    pub fn first_difference(&self, other: &QSeries) -> Option<(i64, Z, Z)> {
        let trunc = self.trunc.min(other.trunc) as i64;
        let mut keys: Vec<i64> = self
            .coeffs
            .keys()
            .chain(other.coeffs.keys())
            .copied()
            .filter(|n| *n <= trunc)
            .collect();
        keys.sort_unstable();
        keys.dedup();
        for n in keys {
            let l = self.coeff(n);
            let r = other.coeff(n);
            if l != r {
                return Some((n, l, r));
            }
        }
        None
    }

    pub fn to_json(&self) -> Value {
        qmap_to_json(Some(self.trunc), &self.coeffs)
    }
}

impl fmt::Display for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_qmap(&self.coeffs))
    }
}

/// An exact sparse polynomial in `q`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct QPoly {
    pub coeffs: BTreeMap<i64, Z>,
}

impl QPoly {
    pub fn zero() -> Self {
        QPoly::default()
    }

    pub fn one() -> Self {
        QPoly::monomial(0, Z::one())
    }

    pub fn monomial(n: i64, c: Z) -> Self {
        let mut p = QPoly::zero();
        if !c.is_zero() {
            p.coeffs.insert(n, c);
        }
        p
    }

    pub fn coeff(&self, n: i64) -> Z {
        self.coeffs.get(&n).cloned().unwrap_or_else(Z::zero)
    }

    pub fn add(&self, other: &QPoly) -> QPoly {
        let mut out = self.clone();
        for (n, c) in &other.coeffs {
            let slot = out.coeffs.entry(*n).or_insert_with(Z::zero);
            *slot += c;
        }
        out.coeffs.retain(|_, v| !v.is_zero());
        out
    }

    pub fn mul(&self, other: &QPoly) -> QPoly {
        let mut out = QPoly::zero();
        for (na, ca) in &self.coeffs {
            for (nb, cb) in &other.coeffs {
                let slot = out.coeffs.entry(na + nb).or_insert_with(Z::zero);
                *slot += ca * cb;
            }
        }
        out.coeffs.retain(|_, v| !v.is_zero());
        out
    }

    pub fn first_difference(&self, other: &QPoly) -> Option<(i64, Z, Z)> {
        let mut keys: Vec<i64> = self
            .coeffs
            .keys()
            .chain(other.coeffs.keys())
            .copied()
            .collect();
        keys.sort_unstable();
        keys.dedup();
        for n in keys {
            let l = self.coeff(n);
            let r = other.coeff(n);
            if l != r {
                return Some((n, l, r));
            }
        }
        None
    }

    pub fn to_json(&self) -> Value {
        qmap_to_json(None, &self.coeffs)
    }
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_qmap(&self.coeffs))
    }
}

fn qmap_to_json(trunc: Option<u32>, coeffs: &BTreeMap<i64, Z>) -> Value {
    let terms: Vec<Value> = coeffs
        .iter()
        .map(|(n, c)| json!({"n": n, "c": c.to_string()}))
        .collect();
    match trunc {
        Some(t) => json!({"trunc": t, "coeffs": terms}),
        None => json!({"coeffs": terms}),
    }
}

/// Render a coefficient map as `1 - 2q^2 + 2q^6 - q^8`.
pub fn format_qmap(coeffs: &BTreeMap<i64, Z>) -> String {
    if coeffs.is_empty() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (n, c)) in coeffs.iter().enumerate() {
        let neg = c.is_negative();
        let mag = c.abs();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let power = match n {
            0 => String::new(),
            1 => "q".to_string(),
            _ => format!("q^{n}"),
        };
        if power.is_empty() {
            out.push_str(&mag.to_string());
        } else if mag.is_one() {
            out.push_str(&power);
        } else {
            out.push_str(&format!("{mag}{power}"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::q_int;
    use crate::root_data::RootSystem;

    fn a1() -> RootSystem {
        RootSystem::from_label("A1").unwrap()
    }

    fn zed(n: i64) -> Z {
        Z::from(n)
    }

    /// Expand a product of inverted factors in absolute coordinates, with
    /// no anchor bookkeeping at all: a dictionary keyed by (signed root
    /// coordinates, delta power). Used as an oracle for the series path.
    fn oracle_product(
        rs: &RootSystem,
        start: &[i64],
        factors: &[(Vec<i64>, u32)],
        n_max: u32,
        span: i64,
    ) -> BTreeMap<(Vec<i64>, u32), Z> {
        let mut acc: BTreeMap<(Vec<i64>, u32), Z> = BTreeMap::new();
        acc.insert((start.to_vec(), 0), Z::one());
        for (gamma, n0) in factors {
            let k_max = if *n0 > 0 {
                n_max / n0
            } else {
                span as u32
            };
            let mut next: BTreeMap<(Vec<i64>, u32), Z> = BTreeMap::new();
            for ((coords, n), c) in &acc {
                for k in 0..=k_max {
                    let nn = n + k * n0;
                    if nn > n_max {
                        break;
                    }
                    let sh: Vec<i64> = coords
                        .iter()
                        .zip(gamma)
                        .map(|(x, g)| x - k as i64 * g)
                        .collect();
                    if sh.iter().any(|v| v.abs() > span) {
                        continue;
                    }
                    let slot = next.entry((sh, nn)).or_insert_with(Z::zero);
                    *slot += c;
                }
            }
            acc = next;
        }
        acc.retain(|_, v| !v.is_zero());
        let _ = rs;
        acc
    }

    #[test]
    fn reanchored_raising_factor() {
        let rs = a1();
        let one = CharSeries::monomial(Weight::zero(1), Trunc::new(2, 2));
        let alpha = rs.positive[0].weight();
        let minus_alpha = alpha.scale(&q_int(-1));
        let s = one.invert_factor(&rs, &minus_alpha, 1).unwrap();
        // 1 + e^(alpha - delta) + e^(2 alpha - 2 delta), anchored at
        // 2 alpha.
        assert_eq!(s.leading(), &Weight::from_ints(&[4]));
        assert!(!s.is_clipped());
        assert_eq!(s.coeff_at(&[2], 0), zed(1));
        assert_eq!(s.coeff_at(&[1], 1), zed(1));
        assert_eq!(s.coeff_at(&[0], 2), zed(1));
        assert_eq!(s.num_terms(), 3);
    }

    #[test]
    fn imaginary_partitions() {
        let rs = a1();
        let mut s = CharSeries::monomial(Weight::zero(1), Trunc::new(4, 0));
        for n in 1..=4 {
            s = s.mul_factor_inv(&rs, &Weight::zero(1), n).unwrap();
        }
        let expect = [1, 1, 2, 3, 5];
        for (n, e) in expect.iter().enumerate() {
            assert_eq!(s.coeff_at(&[0], n as u32), zed(*e), "partition of {n}");
        }
    }

    #[test]
    fn colored_partition_oracle() {
        // Independent dynamic program for partitions with r colors.
        fn colored(r: u32, n_max: usize) -> Vec<i64> {
            let mut a = vec![0i64; n_max + 1];
            a[0] = 1;
            for part in 1..=n_max {
                for _ in 0..r {
                    for n in part..=n_max {
                        a[n] += a[n - part];
                    }
                }
            }
            a
        }
        for r in 1..=3u32 {
            let rs = a1();
            let mut s = CharSeries::monomial(Weight::zero(1), Trunc::new(6, 0));
            for n in 1..=6 {
                for _ in 0..r {
                    s = s.mul_factor_inv(&rs, &Weight::zero(1), n).unwrap();
                }
            }
            let oracle = colored(r, 6);
            for (n, e) in oracle.iter().enumerate() {
                assert_eq!(s.coeff_at(&[0], n as u32), zed(*e), "r={r}, n={n}");
            }
        }
    }

    #[test]
    fn mixed_product_matches_absolute_oracle() {
        // (1-e^-a)^-1 (1-e^(-a-d))^-1 (1-e^(a-d))^-1 on A1, expanded two
        // ways: through the anchored series machinery, and through a plain
        // absolute-coordinate dictionary.
        let rs = a1();
        let n_max = 3u32;
        let depth = 12u32;
        let alpha = rs.positive[0].weight();
        let minus_alpha = alpha.scale(&q_int(-1));
        // Anchor high enough for the raising factor, with the start term
        // e^0 stored at positive depth below it.
        let anchor = rs.root_coords_to_weight(&[q_int(n_max as i64)]);
        let mut s = CharSeries::monomial_below(
            &rs,
            anchor.clone(),
            &Weight::zero(1),
            Trunc::new(n_max, depth),
        )
        .unwrap();
        assert_eq!(s.leading(), &anchor);
        s = s.mul_factor_inv(&rs, &alpha, 0).unwrap();
        s = s.mul_factor_inv(&rs, &alpha, 1).unwrap();
        s = s.mul_factor_inv(&rs, &minus_alpha, 1).unwrap();

        let oracle = oracle_product(
            &rs,
            &[0],
            &[(vec![1], 0), (vec![1], 1), (vec![-1], 1)],
            n_max,
            40,
        );
        // The bottom n_max * height(theta) rows of the window are
        // sacrificial: a raising factor can pull truncated content back up
        // into them. Compare only on the guaranteed region above.
        let reliable = depth - n_max * rs.theta.height as u32;
        // Series key (depth, n) is anchor - depth in root coords.
        for ((coords, n), c) in &oracle {
            let d = n_max as i64 - coords[0];
            assert!(d >= 0, "oracle term above the anchor");
            if d as u32 > reliable {
                continue;
            }
            assert_eq!(
                s.coeff_at(&[d as u32], *n),
                *c,
                "coords {coords:?} delta {n}"
            );
        }
        for (k, v) in s.terms() {
            if k.depth[0] > reliable {
                continue;
            }
            let coords = vec![n_max as i64 - k.depth[0] as i64];
            assert_eq!(
                oracle.get(&(coords, k.n)).cloned().unwrap_or_else(Z::zero),
                *v,
                "extra term {k}"
            );
        }
    }

    #[test]
    fn linear_combine_joins_anchors() {
        let rs = a1();
        let t = Trunc::new(1, 3);
        let one = CharSeries::monomial(Weight::zero(1), t);
        let alpha = rs.positive[0].weight();
        let below = CharSeries::monomial(alpha.scale(&q_int(-1)), t);
        let s = CharSeries::linear_combine(&rs, &[(zed(1), one), (zed(-1), below)]).unwrap();
        assert_eq!(s.leading(), &Weight::zero(1));
        assert_eq!(s.coeff_at(&[0], 0), zed(1));
        assert_eq!(s.coeff_at(&[1], 0), zed(-1));

        let half = Weight(vec![q_int(1)]);
        let bad = CharSeries::monomial(half, t);
        let out = CharSeries::linear_combine(
            &rs,
            &[(zed(1), CharSeries::monomial(Weight::zero(1), t)), (zed(1), bad)],
        );
        assert!(out.is_err(), "non-root anchor difference must be rejected");
    }

    #[test]
    fn window_equal_reports_first_key() {
        let rs = a1();
        let t = Trunc::new(2, 2);
        let alpha = rs.positive[0].weight();
        let base = CharSeries::monomial(Weight::zero(1), t);
        let a = base.mul_factor_inv(&rs, &alpha, 0).unwrap();
        let mut b = a.clone();
        b.add_term(
            Key {
                n: 1,
                depth: vec![1],
            },
            zed(7),
        );
        let d = a.window_equal(&b).unwrap().expect("must differ");
        assert_eq!(d.key, Key { n: 1, depth: vec![1] });
        assert_eq!((d.left, d.right), (zed(0), zed(7)));
        assert_eq!(a.window_equal(&a).unwrap(), None);
    }

    #[test]
    fn specialize_respects_margin() {
        let rs = a1();
        let alpha = rs.positive[0].weight();
        // Depth window 3 holds e^0 .. e^-3a; the layer-0 support of
        // (1-e^-a)^-1 fills the whole window, so the margin rule fires.
        let tight = CharSeries::monomial(Weight::zero(1), Trunc::new(1, 3))
            .mul_factor_inv(&rs, &alpha, 0)
            .unwrap();
        assert!(tight.specialize_q().is_err());

        // A bounded layer well inside the window specializes fine.
        let wide = CharSeries::monomial(Weight::zero(1), Trunc::new(2, 5));
        let ok = wide
            .mul_factor_inv(&rs, &Weight::zero(1), 1)
            .unwrap()
            .mul_factor_inv(&rs, &alpha, 1)
            .unwrap();
        let q = ok.specialize_q().unwrap();
        assert_eq!(q.coeff(0), zed(1));
        assert_eq!(q.coeff(1), zed(2));
        assert_eq!(q.coeff(2), zed(3));
    }

    #[test]
    fn clipped_flag_sticks_and_blocks() {
        let rs = a1();
        let alpha = rs.positive[0].weight();
        let minus_alpha = alpha.scale(&q_int(-1));
        // Window too narrow to hold the re-anchored content.
        let s = CharSeries::monomial(Weight::zero(1), Trunc::new(4, 1))
            .mul_factor_inv(&rs, &alpha, 0)
            .unwrap()
            .invert_factor(&rs, &minus_alpha, 1)
            .unwrap();
        assert!(s.is_clipped());
        assert!(s.specialize_q().is_err());
        assert!(s.window_equal(&s).is_err());
    }

    #[test]
    fn mul_matches_hand_expansion() {
        let rs = a1();
        let t = Trunc::new(0, 4);
        let alpha = rs.positive[0].weight();
        let base = CharSeries::monomial(Weight::zero(1), t);
        let one_plus = CharSeries::linear_combine(
            &rs,
            &[
                (zed(1), base.clone()),
                (zed(1), CharSeries::monomial(alpha.scale(&q_int(-1)), t)),
            ],
        )
        .unwrap();
        let sq = one_plus.mul(&one_plus).unwrap();
        assert_eq!(sq.coeff_at(&[0], 0), zed(1));
        assert_eq!(sq.coeff_at(&[1], 0), zed(2));
        assert_eq!(sq.coeff_at(&[2], 0), zed(1));
        assert_eq!(sq.num_terms(), 3);
    }

    #[test]
    fn qseries_and_qpoly_format() {
        let mut p = QPoly::one();
        p = p.add(&QPoly::monomial(2, zed(-2)));
        p = p.add(&QPoly::monomial(6, zed(2)));
        p = p.add(&QPoly::monomial(8, zed(-1)));
        assert_eq!(p.to_string(), "1 - 2q^2 + 2q^6 - q^8");
        assert_eq!(QPoly::zero().to_string(), "0");
        assert_eq!(QPoly::monomial(1, zed(1)).to_string(), "q");

        let mut s = QSeries::one(4);
        s.set(1, zed(3));
        let t = s.mul(&s);
        assert_eq!(t.coeff(2), zed(9));
        let d = s.div_one_minus_q(1);
        assert_eq!(d.coeff(4), zed(4), "cumulative sums");
    }

    #[test]
    fn qseries_first_difference_is_lowest() {
        let mut a = QSeries::one(6);
        let mut b = QSeries::one(6);
        a.set(3, zed(5));
        b.set(3, zed(4));
        b.set(2, zed(1));
        assert_eq!(b.first_difference(&a), Some((2, zed(1), zed(0))));
    }
}
