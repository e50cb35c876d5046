//! Finite and affine critical-level characters.
//!
//! The finite side is Freudenthal multiplicities with the Weyl dimension
//! product as a built-in cross-check. The affine side builds Verma-family
//! characters as inverse-factor pipelines over the truncated series ring,
//! assembles the chiral Euler character along two independent routes, and
//! derives the arithmetic consequences: the shifted alternating sum of
//! irreducible characters, the denominator identity as exact polynomials,
//! q-dimension product formulas, and Kac-Kazhdan singular-weight
//! predictions.
//!
//! Window bookkeeping: a pipeline for a character with raising directions
//! (exponents above the base weight) anchors at `base + N*theta` and works
//! on a depth window widened by `2*N*ht(theta)`; the returned series is cut
//! back to `depth + N*ht(theta)`, on which every coefficient is complete
//! because a raising step consumes at least one delta layer per `ht(theta)`
//! of pull.

use std::collections::BTreeMap;

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::charseries::{
    real_root_factors, CharSeries, Discrepancy, QPoly, QSeries, RealRootSet, Trunc,
};
use crate::root_data::{RootSystem, Weight};
use crate::weyl::{self, WeylElement, WeylGroup};
use crate::{q_int, Error, Result, Q, Z};

/// Dimension of the irreducible module by the Weyl product formula.
pub fn weyl_dim(rs: &RootSystem, lambda: &Weight) -> Result<Z> {
    if !lambda.is_integral() || !lambda.is_dominant() {
        return Err(Error::input("dimension needs a dominant integral weight"));
    }
    let shifted = lambda.add(&rs.rho);
    let mut dim = Q::one();
    for root in &rs.positive {
        dim *= rs.pair_coroot(&shifted, root) / rs.pair_coroot(&rs.rho, root);
    }
    assert!(dim.is_integer(), "Weyl product must be an integer");
    Ok(dim.to_integer())
}

/// Dominant weights `mu <= lambda`, keyed by the root coordinates of
/// `lambda - mu`, sorted by total height then lexicographically.
fn dominant_below(rs: &RootSystem, lambda: &Weight) -> Vec<(Vec<u32>, Weight)> {
    let budget = {
        let h = rs.coroot_height(lambda);
        h.floor().to_integer().to_u32().expect("height budget")
    };
    let mut out = Vec::new();
    let mut cur = vec![0u32; rs.rank];
    collect_dominant(rs, lambda, budget, 0, &mut cur, &mut out);
    out.sort_by_key(|(c, _)| {
        (c.iter().map(|&x| x as u64).sum::<u64>(), c.clone())
    });
    out
}

fn collect_dominant(
    rs: &RootSystem,
    lambda: &Weight,
    budget: u32,
    idx: usize,
    cur: &mut Vec<u32>,
    out: &mut Vec<(Vec<u32>, Weight)>,
) {
    if idx == rs.rank {
        let coords: Vec<Q> = cur.iter().map(|&c| q_int(c as i64)).collect();
        let mu = lambda.sub(&rs.root_coords_to_weight(&coords));
        if mu.is_dominant() {
            out.push((cur.clone(), mu));
        }
        return;
    }
    let used: u32 = cur[..idx].iter().sum();
    for v in 0..=(budget - used) {
        cur[idx] = v;
        collect_dominant(rs, lambda, budget, idx + 1, cur, out);
    }
    cur[idx] = 0;
}

/// Finite irreducible character by the Freudenthal recursion, returned on
/// the exact support window at delta degree 0, together with the dimension.
///
/// The dimension is counted from the multiplicities and checked against the
/// Weyl product formula, so the two classical routes guard each other.
pub fn weyl_character(rs: &RootSystem, lambda: &Weight) -> Result<(CharSeries, Z)> {
    if !lambda.is_integral() || !lambda.is_dominant() {
        return Err(Error::input(
            "finite character needs a dominant integral weight",
        ));
    }
    let doms = dominant_below(rs, lambda);
    let index: BTreeMap<Vec<u32>, usize> = doms
        .iter()
        .enumerate()
        .map(|(i, (c, _))| (c.clone(), i))
        .collect();
    let shifted = lambda.add(&rs.rho);
    let norm_top = rs.weight_form(&shifted, &shifted);
    let mut mult: Vec<Z> = vec![Z::zero(); doms.len()];
    mult[0] = Z::one();
    for i in 1..doms.len() {
        let mu = doms[i].1.clone();
        let mut num = Q::zero();
        for root in &rs.positive {
            let alpha = root.weight();
            let mut k = 1i64;
            loop {
                let nu = mu.add(&alpha.scale(&q_int(k)));
                let rel = rs.weight_to_root_coords(&lambda.sub(&nu));
                if rel.iter().any(|c| c.is_negative()) {
                    break;
                }
                let (rep, _, _) = weyl::make_dominant(rs, &nu);
                let key: Vec<u32> = rs
                    .weight_to_root_coords(&lambda.sub(&rep))
                    .iter()
                    .map(|c| {
                        u32::try_from(c.to_integer()).expect("orbit rep below lambda")
                    })
                    .collect();
                if let Some(&j) = index.get(&key) {
                    if !mult[j].is_zero() {
                        num += Q::from_integer(mult[j].clone())
                            * rs.weight_root_form(&nu, root);
                    }
                }
                k += 1;
            }
        }
        let mu_shift = mu.add(&rs.rho);
        let denom = &norm_top - rs.weight_form(&mu_shift, &mu_shift);
        assert!(!denom.is_zero(), "recursion denominator vanished");
        let m = (num * q_int(2)) / denom;
        assert!(m.is_integer() && m.is_positive(), "non-positive multiplicity");
        mult[i] = m.to_integer();
    }

    let two_ht = rs.coroot_height(lambda) * q_int(2);
    assert!(two_ht.is_integer(), "support height must be integral");
    let depth = two_ht.to_integer().to_u32().expect("support height");
    let mut series = CharSeries::zero(lambda.clone(), Trunc::new(0, depth));
    let mut dim = Z::zero();
    for (i, (_, mu)) in doms.iter().enumerate() {
        let orbit = weyl::weight_orbit(rs, mu);
        dim += &mult[i] * Z::from(orbit.len());
        for nu in orbit {
            series = series.add(
                &CharSeries::monomial_below(rs, lambda.clone(), &nu, Trunc::new(0, depth))?
                    .scale(&mult[i]),
            )?;
        }
    }
    let product_dim = weyl_dim(rs, lambda)?;
    assert_eq!(dim, product_dim, "multiplicity count vs dimension product");
    Ok((series, dim))
}

fn theta_height(rs: &RootSystem) -> u32 {
    u32::try_from(rs.theta.height).expect("theta height")
}

/// Widened working window and the depth to keep after the pipeline.
fn raised_window(rs: &RootSystem, trunc: Trunc) -> (Trunc, u32) {
    let raise = trunc.delta_max * theta_height(rs);
    (
        Trunc::new(trunc.delta_max, trunc.depth_max + 2 * raise),
        trunc.depth_max + raise,
    )
}

fn pipeline_anchor(rs: &RootSystem, base: &Weight, delta_max: u32) -> Weight {
    base.add(&rs.theta.weight().scale(&q_int(delta_max as i64)))
}

fn apply_factors(
    rs: &RootSystem,
    mut s: CharSeries,
    factors: &[(Weight, u32)],
) -> Result<CharSeries> {
    for (gamma, n0) in factors {
        s = s.mul_factor_inv(rs, gamma, *n0)?;
    }
    Ok(s)
}

/// Restricted Verma pipeline on the widened window, not yet cut back.
fn restricted_wide(rs: &RootSystem, lambda: &Weight, trunc: Trunc) -> Result<CharSeries> {
    let (wide, _) = raised_window(rs, trunc);
    let anchor = pipeline_anchor(rs, lambda, trunc.delta_max);
    let base = CharSeries::monomial_below(rs, anchor, lambda, wide)?;
    apply_factors(
        rs,
        base,
        &real_root_factors(rs, RealRootSet::PositiveReal, trunc.delta_max),
    )
}

/// Character of the Verma module over the affinization at any highest
/// weight: all lowering real directions, the raising directions for
/// `n >= 1`, and rank-many imaginary directions per layer.
pub fn ch_verma_affine(rs: &RootSystem, lambda: &Weight, trunc: Trunc) -> Result<CharSeries> {
    let (_, keep) = raised_window(rs, trunc);
    let s = restricted_wide(rs, lambda, trunc)?;
    let s = apply_factors(
        rs,
        s,
        &real_root_factors(rs, RealRootSet::ImaginaryMultR, trunc.delta_max),
    )?;
    Ok(s.truncate_depth(keep))
}

/// Verma character with the imaginary directions removed.
pub fn ch_restricted_verma(
    rs: &RootSystem,
    lambda: &Weight,
    trunc: Trunc,
) -> Result<CharSeries> {
    let (_, keep) = raised_window(rs, trunc);
    Ok(restricted_wide(rs, lambda, trunc)?.truncate_depth(keep))
}

/// Twisted free-field module character: the restricted Verma character at
/// the dot-translate `w . nu0`.
pub fn ch_wakimoto(
    rs: &RootSystem,
    w: &WeylElement,
    nu0: &Weight,
    trunc: Trunc,
) -> Result<CharSeries> {
    if !nu0.is_integral() {
        return Err(Error::input("twisted module weight must be integral"));
    }
    let translated = weyl::dot_word(rs, &w.word, nu0);
    ch_restricted_verma(rs, &translated, trunc)
}

/// Which route assembles the chiral Euler character.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EulerPath {
    /// Alternating sum of dot-translated restricted Verma characters.
    WakimotoSum,
    /// Finite character times the two-sided `n >= 1` real-root product.
    Factored,
}

fn require_regular(nu0: &Weight) -> Result<()> {
    if !nu0.is_regular_dominant_integral() {
        return Err(Error::input(
            "chiral Euler character needs a regular dominant integral weight",
        ));
    }
    Ok(())
}

/// Chiral Euler character of the flag manifold sheaf, by either route.
/// Both come back anchored at `nu0 + N*theta` on the same window, so the
/// two results can be compared key by key.
pub fn euler_chiral(
    rs: &RootSystem,
    nu0: &Weight,
    trunc: Trunc,
    path: EulerPath,
) -> Result<CharSeries> {
    require_regular(nu0)?;
    let (wide, keep) = raised_window(rs, trunc);
    match path {
        EulerPath::WakimotoSum => {
            let group = WeylGroup::enumerate(rs)?;
            let mut parts = Vec::with_capacity(group.elements.len());
            for w in &group.elements {
                let translated = weyl::dot_word(rs, &w.word, nu0);
                parts.push((
                    Z::from(w.sign()),
                    restricted_wide(rs, &translated, trunc)?,
                ));
            }
            let sum = CharSeries::linear_combine(rs, &parts)?;
            Ok(sum.truncate_depth(keep))
        }
        EulerPath::Factored => {
            let (finite, _) = weyl_character(rs, nu0)?;
            let anchor = pipeline_anchor(rs, nu0, trunc.delta_max);
            let base = finite.embed(rs, &anchor, wide)?;
            let s = apply_factors(
                rs,
                base,
                &real_root_factors(rs, RealRootSet::RealNGe1, trunc.delta_max),
            )?;
            Ok(s.truncate_depth(keep))
        }
    }
}

/// Exponents `<nu0 + rho, alpha^v>` over the positive roots, the q-degrees
/// showing up in the denominator identity and the irreducible character.
pub fn coroot_exponents(rs: &RootSystem, nu0: &Weight) -> Result<Vec<u32>> {
    let shifted = nu0.add(&rs.rho);
    let mut out = Vec::with_capacity(rs.positive.len());
    for root in &rs.positive {
        let p = rs.pair_coroot(&shifted, root);
        if !p.is_integer() || !p.is_positive() {
            return Err(Error::input(
                "coroot pairings must be positive integers here",
            ));
        }
        out.push(p.to_integer().to_u32().expect("coroot exponent"));
    }
    Ok(out)
}

/// Irreducible critical-level character: the chiral Euler character with
/// the pure-q factors `(1 - q^{<nu0+rho, alpha^v>})` divided back out.
pub fn ch_irreducible_critical(
    rs: &RootSystem,
    nu0: &Weight,
    trunc: Trunc,
) -> Result<CharSeries> {
    let mut s = euler_chiral(rs, nu0, trunc, EulerPath::Factored)?;
    let zero = Weight::zero(rs.rank);
    for m in coroot_exponents(rs, nu0)? {
        s = s.mul_factor_inv(rs, &zero, m)?;
    }
    Ok(s)
}

/// Conformal shifts of the resolution degrees, grouped by Weyl length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftMultiset {
    /// For each cohomological degree, the sorted multiset of q-shifts.
    pub by_degree: BTreeMap<usize, Vec<i64>>,
}

impl ShiftMultiset {
    pub fn to_json(&self) -> Value {
        let map: BTreeMap<String, &Vec<i64>> = self
            .by_degree
            .iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        json!(map)
    }
}

/// Shifts `<nu0 - w . nu0, rho^v>` grouped by the length of `w`.
pub fn cohomology_shifts(rs: &RootSystem, nu0: &Weight) -> Result<ShiftMultiset> {
    require_regular(nu0)?;
    let group = WeylGroup::enumerate(rs)?;
    let mut by_degree: BTreeMap<usize, Vec<i64>> = BTreeMap::new();
    for w in &group.elements {
        let translated = weyl::dot_word(rs, &w.word, nu0);
        let s = rs.coroot_height(&nu0.sub(&translated));
        assert!(s.is_integer(), "shift must be integral");
        by_degree
            .entry(w.length())
            .or_default()
            .push(s.to_integer().to_i64().expect("shift"));
    }
    for v in by_degree.values_mut() {
        v.sort_unstable();
    }
    Ok(ShiftMultiset { by_degree })
}

/// Outcome of the exact polynomial identity check.
#[derive(Clone, Debug)]
pub struct DenomReport {
    pub pass: bool,
    /// Alternating sum of `q^shift` over the Weyl group.
    pub alternating: QPoly,
    /// Product of `(1 - q^{<nu0+rho, alpha^v>})` over the positive roots.
    pub product: QPoly,
    pub first_discrepancy: Option<(i64, Z, Z)>,
}

impl DenomReport {
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "claim": "alternating q-shift sum equals the coroot-exponent product",
            "window": "exact polynomial identity",
            "pass": self.pass,
            "tables": {
                "alternating_sum": self.alternating.to_json(),
                "product": self.product.to_json(),
                "formatted": self.product.to_string(),
            },
        });
        if let Some((deg, l, r)) = &self.first_discrepancy {
            v["first_discrepancy"] = json!({
                "degree": deg,
                "left": l.to_string(),
                "right": r.to_string(),
            });
        }
        v
    }
}

/// Check `sum_w sign(w) q^{<nu0 - w.nu0, rho^v>}` against
/// `prod_{alpha > 0} (1 - q^{<nu0+rho, alpha^v>})`, both exact.
pub fn verify_denominator_identity(rs: &RootSystem, nu0: &Weight) -> Result<DenomReport> {
    require_regular(nu0)?;
    let shifts = cohomology_shifts(rs, nu0)?;
    let mut alternating = QPoly::zero();
    for (degree, list) in &shifts.by_degree {
        let sign = if degree % 2 == 0 { 1 } else { -1 };
        for s in list {
            alternating = alternating.add(&QPoly::monomial(*s, Z::from(sign)));
        }
    }
    let mut product = QPoly::one();
    for m in coroot_exponents(rs, nu0)? {
        let factor = QPoly::one().add(&QPoly::monomial(m as i64, -Z::one()));
        product = product.mul(&factor);
    }
    let first_discrepancy = alternating.first_difference(&product);
    Ok(DenomReport {
        pass: first_discrepancy.is_none(),
        alternating,
        product,
        first_discrepancy,
    })
}

/// Outcome of the chiral resolution identity on a truncation window.
#[derive(Clone, Debug)]
pub struct BwbReport {
    /// The requested window; the series carry the internally widened one.
    pub window: Trunc,
    pub pass: bool,
    /// First mismatch between the two Euler routes, if any.
    pub paths_discrepancy: Option<Discrepancy>,
    /// First mismatch between the Euler character and the shifted
    /// alternating sum of irreducible characters, if any.
    pub sum_discrepancy: Option<Discrepancy>,
    /// Per-delta-degree coefficient sums of the three assembled series,
    /// keyed by a short label.
    pub layer_tables: Vec<(String, Vec<(u32, Z)>)>,
}

impl BwbReport {
    pub fn to_json(&self) -> Value {
        let tables: BTreeMap<&str, Value> = self
            .layer_tables
            .iter()
            .map(|(name, rows)| {
                (
                    name.as_str(),
                    Value::Array(
                        rows.iter()
                            .map(|(n, c)| json!({"degree": n, "coefficient": c.to_string()}))
                            .collect(),
                    ),
                )
            })
            .collect();
        let mut v = json!({
            "claim": "Euler routes agree and equal the shifted alternating irreducible sum",
            "window": {"N": self.window.delta_max, "D": self.window.depth_max},
            "pass": self.pass,
            "tables": tables,
        });
        let disc = self.paths_discrepancy.as_ref().or(self.sum_discrepancy.as_ref());
        if let Some(d) = disc {
            v["first_discrepancy"] = json!({
                "key": d.key.to_string(),
                "left": d.left.to_string(),
                "right": d.right.to_string(),
            });
        }
        v
    }
}

fn layer_sums(s: &CharSeries) -> Vec<(u32, Z)> {
    let mut map: BTreeMap<u32, Z> = BTreeMap::new();
    for (k, v) in s.terms() {
        *map.entry(k.n).or_insert_with(Z::zero) += v;
    }
    map.into_iter().collect()
}

/// Verify the resolution identity: both Euler routes agree, and the Euler
/// character equals `sum_i (-1)^i sum_{s in shifts(i)} q^s` times the
/// irreducible character, coefficient by coefficient on the window.
pub fn verify_chiral_bwb(rs: &RootSystem, nu0: &Weight, trunc: Trunc) -> Result<BwbReport> {
    let wakimoto = euler_chiral(rs, nu0, trunc, EulerPath::WakimotoSum)?;
    let factored = euler_chiral(rs, nu0, trunc, EulerPath::Factored)?;
    let paths_discrepancy = wakimoto.window_equal(&factored)?;

    let irreducible = ch_irreducible_critical(rs, nu0, trunc)?;
    let shifts = cohomology_shifts(rs, nu0)?;
    let mut sum = CharSeries::zero(factored.leading().clone(), factored.trunc());
    for (degree, list) in &shifts.by_degree {
        let sign = Z::from(if degree % 2 == 0 { 1i64 } else { -1 });
        for s in list {
            let shifted = irreducible.shift_delta(u32::try_from(*s).expect("shift"));
            sum = sum.add(&shifted.scale(&sign))?;
        }
    }
    let sum_discrepancy = factored.window_equal(&sum)?;

    let layer_tables = vec![
        ("euler_wakimoto_sum".to_string(), layer_sums(&wakimoto)),
        ("euler_factored".to_string(), layer_sums(&factored)),
        ("shifted_irreducible_sum".to_string(), layer_sums(&sum)),
    ];
    Ok(BwbReport {
        window: trunc,
        pass: paths_discrepancy.is_none() && sum_discrepancy.is_none(),
        paths_discrepancy,
        sum_discrepancy,
        layer_tables,
    })
}

/// Which closed q-dimension product to expand.
#[derive(Clone, Debug)]
pub enum QDimWhich {
    /// `dim V * prod (1-q^j)^{-dim g}`; the graded dimensions of the
    /// generalized highest-weight module do not depend on the level, which
    /// is carried only so callers can record it.
    WeylModule { lambda: Weight, level: Q },
    /// `dim V * prod (1-q^j)^{-2 dim X}`.
    ChiralEuler { nu0: Weight },
    /// The chiral Euler product divided by `prod (1-q^{m_alpha})`.
    Irreducible { nu0: Weight },
}

/// Expand the chosen closed product to `q^n_max`.
pub fn q_dim_formula(rs: &RootSystem, which: &QDimWhich, n_max: u32) -> Result<QSeries> {
    let colored = |weight: &Weight, colors: i64| -> Result<QSeries> {
        let dim = weyl_dim(rs, weight)?;
        let mut s = QSeries::one(n_max).scale(&dim);
        for j in 1..=n_max {
            for _ in 0..colors {
                s = s.div_one_minus_q(j);
            }
        }
        Ok(s)
    };
    match which {
        QDimWhich::WeylModule { lambda, level: _ } => colored(lambda, rs.algebra_dim()),
        QDimWhich::ChiralEuler { nu0 } => colored(nu0, 2 * rs.positive.len() as i64),
        QDimWhich::Irreducible { nu0 } => {
            require_regular(nu0)?;
            let mut s = colored(nu0, 2 * rs.positive.len() as i64)?;
            for m in coroot_exponents(rs, nu0)? {
                s = s.div_one_minus_q(m);
            }
            Ok(s)
        }
    }
}

/// One solved root condition with its predicted singular weights.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KKSolution {
    /// Root coordinates of the positive root solving the condition.
    pub root: Vec<i64>,
    /// The negative integer value of `<lambda + rho, alpha^v>`.
    pub pairing: i64,
    /// Predicted singular weights as (finite part, delta exponent).
    pub weights: Vec<(Weight, u32)>,
}

impl KKSolution {
    pub fn to_json(&self) -> Value {
        json!({
            "root": self.root,
            "pairing": self.pairing,
            "weights": self.weights.iter().map(|(w, d)| json!({
                "weight": w.0.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                "delta": d,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Solve `<lambda + rho, alpha^v> = n` over the positive roots for strictly
/// negative integers `n` and list the predicted singular weights up to the
/// delta bound: the family `lambda + n(-alpha + m*delta)` for `m >= 1`
/// together with the distinguished member at `m = <alpha, rho^v>`.
pub fn kac_kazhdan_singular_weights(
    rs: &RootSystem,
    lambda: &Weight,
    delta_bound: u32,
) -> Result<Vec<KKSolution>> {
    let shifted = lambda.add(&rs.rho);
    let mut out = Vec::new();
    for root in &rs.positive {
        let p = rs.pair_coroot(&shifted, root);
        if !p.is_integer() || !p.is_negative() {
            continue;
        }
        let pairing = p.to_integer().to_i64().expect("pairing");
        let drop = -pairing;
        let finite = lambda.add(&root.weight().scale(&q_int(drop)));
        let mut exps: Vec<u32> = Vec::new();
        let mut m = 1i64;
        while drop * m <= delta_bound as i64 {
            exps.push((drop * m) as u32);
            m += 1;
        }
        let hv = rs.coroot_height(&root.weight());
        assert!(hv.is_integer(), "coroot height of a root");
        let distinguished = drop * hv.to_integer().to_i64().expect("coroot height");
        if distinguished <= delta_bound as i64 && !exps.contains(&(distinguished as u32)) {
            exps.push(distinguished as u32);
            exps.sort_unstable();
        }
        out.push(KKSolution {
            root: root.coords.clone(),
            pairing,
            weights: exps.into_iter().map(|e| (finite.clone(), e)).collect(),
        });
    }
    Ok(out)
}

/// Dominant-after-shift representative of the dot orbit, with a flag for
/// orbits fixed on a wall (where the representative is the orbit's
/// canonical sort key rather than a regular dominant translate).
pub fn block_representative(rs: &RootSystem, lambda: &Weight) -> (Weight, bool) {
    let (rep, _, regular) = weyl::dot_make_dominant(rs, lambda);
    (rep, !regular)
}

/// Character of the subspace annihilated by the positive loop directions in
/// the `w`-twisted module: the inverse factors run over `w`-images of the
/// negative roots only, split by the sign of the image.
pub fn wakimoto_invariants_character(
    rs: &RootSystem,
    w: &WeylElement,
    nu0: &Weight,
    trunc: Trunc,
) -> Result<CharSeries> {
    if !nu0.is_integral() {
        return Err(Error::input("twisted module weight must be integral"));
    }
    let (_, keep) = raised_window(rs, trunc);
    Ok(invariants_wide(rs, w, nu0, trunc)?.truncate_depth(keep))
}

fn invariants_factors(
    rs: &RootSystem,
    w: &WeylElement,
    delta_max: u32,
) -> Vec<(Weight, u32)> {
    // The factor exponents are -beta - n*delta for beta ranging over the
    // w-images of the negative roots; a positive image contributes from
    // layer 0, a negative one (a raising exponent) only from layer 1.
    let images: Vec<(Weight, bool)> = rs
        .positive
        .iter()
        .map(|root| {
            let image = weyl::apply_word(rs, &w.word, &root.weight().scale(&q_int(-1)));
            let coords = rs.weight_to_root_coords(&image);
            let positive = coords.iter().all(|c| !c.is_negative());
            (image, positive)
        })
        .collect();
    let mut factors = Vec::new();
    for n in 0..=delta_max {
        for (image, positive) in &images {
            if *positive || n >= 1 {
                factors.push((image.clone(), n));
            }
        }
    }
    factors
}

fn invariants_wide(
    rs: &RootSystem,
    w: &WeylElement,
    nu0: &Weight,
    trunc: Trunc,
) -> Result<CharSeries> {
    let translated = weyl::dot_word(rs, &w.word, nu0);
    let (wide, _) = raised_window(rs, trunc);
    let anchor = pipeline_anchor(rs, &translated, trunc.delta_max);
    let base = CharSeries::monomial_below(rs, anchor, &translated, wide)?;
    apply_factors(rs, base, &invariants_factors(rs, w, trunc.delta_max))
}
