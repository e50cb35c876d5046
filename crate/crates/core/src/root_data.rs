//! Finite root systems of types A through G, rank at most 8.
//!
//! A [`RootSystem`] is built from its Cartan matrix with the convention
//! `cartan[i][j] = <alpha_j, alpha_i_vee>`, so the fundamental coordinates of
//! the simple root `alpha_j` form column `j`. Weights are stored in
//! fundamental coordinates as vectors of rationals; roots additionally carry
//! their simple-root coordinates, which are nonnegative integers for
//! positive roots.
//!
//! The invariant bilinear form is normalized so that long roots have squared
//! length 2. All derived data (positive roots, the form, rho, the highest
//! root, the dual Coxeter number) is computed once at construction and then
//! read off.

use crate::linalg::QMat;
use crate::{q_int, Error, Q, Result};
use num_traits::{One, Signed, Zero};
use std::fmt;

/// A weight in fundamental coordinates.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Weight(pub Vec<Q>);

impl Weight {
    pub fn zero(rank: usize) -> Self {
        Weight(vec![Q::zero(); rank])
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        Weight(coords.iter().map(|&c| q_int(c)).collect())
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn add(&self, other: &Weight) -> Weight {
        assert_eq!(self.rank(), other.rank(), "rank mismatch");
        Weight(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Weight) -> Weight {
        assert_eq!(self.rank(), other.rank(), "rank mismatch");
        Weight(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, c: &Q) -> Weight {
        Weight(self.0.iter().map(|a| a * c).collect())
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(|c| c.is_integer())
    }

    /// All fundamental coordinates nonnegative.
    pub fn is_dominant(&self) -> bool {
        self.0.iter().all(|c| !c.is_negative())
    }

    /// Integral with all coordinates at least 1, i.e. regular dominant.
    pub fn is_regular_dominant_integral(&self) -> bool {
        self.is_integral() && self.0.iter().all(|c| *c >= Q::one())
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// A root, stored in both coordinate systems.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Root {
    /// Coordinates in the basis of simple roots.
    pub coords: Vec<i64>,
    /// Fundamental coordinates (the Cartan matrix applied to `coords`).
    pub fund: Vec<i64>,
    /// Sum of the simple-root coordinates.
    pub height: i64,
    /// Squared length under the invariant form.
    pub len2: Q,
}

impl Root {
    pub fn weight(&self) -> Weight {
        Weight::from_ints(&self.fund)
    }
}

/// The classical series label of a root system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Series {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

/// A finite root system with its invariant form and distinguished data.
#[derive(Debug, Clone)]
pub struct RootSystem {
    pub label: String,
    pub series: Series,
    pub rank: usize,
    /// `cartan[i][j] = <alpha_j, alpha_i_vee>`.
    pub cartan: Vec<Vec<i64>>,
    /// Symmetrizing factors `d_i = (alpha_i, alpha_i)/2`, long roots scaled
    /// to squared length 2 so `max d_i = 1`.
    pub sym: Vec<Q>,
    /// Positive roots sorted by height, then lexicographically by coords.
    pub positive: Vec<Root>,
    /// Half the sum of positive roots: all fundamental coordinates 1.
    pub rho: Weight,
    /// The highest root.
    pub theta: Root,
    /// Dual Coxeter number.
    pub dual_coxeter: i64,
    cartan_inv: QMat,
}

impl RootSystem {
    /// Build a root system from a label like `"A2"`, `"G2"`, or `"E8"`.
    /// Types A through G are accepted with rank at most 8.
    pub fn from_label(label: &str) -> Result<RootSystem> {
        let label = label.trim();
        let mut chars = label.chars();
        let series = match chars.next() {
            Some('A') => Series::A,
            Some('B') => Series::B,
            Some('C') => Series::C,
            Some('D') => Series::D,
            Some('E') => Series::E,
            Some('F') => Series::F,
            Some('G') => Series::G,
            _ => return Err(Error::input(format!("unknown Cartan label {label:?}"))),
        };
        let rank: usize = chars
            .as_str()
            .parse()
            .map_err(|_| Error::input(format!("unknown Cartan label {label:?}")))?;
        let ok = match series {
            Series::A => (1..=8).contains(&rank),
            Series::B | Series::C => (2..=8).contains(&rank),
            Series::D => (4..=8).contains(&rank),
            Series::E => (6..=8).contains(&rank),
            Series::F => rank == 4,
            Series::G => rank == 2,
        };
        if !ok {
            return Err(Error::input(format!(
                "rank {rank} out of range for series {series:?}"
            )));
        }
        let cartan = cartan_matrix(series, rank);
        Self::from_cartan(label.to_string(), series, cartan)
    }

    fn from_cartan(label: String, series: Series, cartan: Vec<Vec<i64>>) -> Result<RootSystem> {
        let rank = cartan.len();
        let sym = symmetrizer(&cartan);
        let cartan_q = QMat::from_rows(
            cartan
                .iter()
                .map(|r| r.iter().map(|&x| q_int(x)).collect())
                .collect(),
        );
        let cartan_inv = cartan_q.inverse();

        let positive = close_positive_roots(&cartan, &sym);
        let theta = positive
            .iter()
            .max_by_key(|r| (r.height, r.coords.clone()))
            .expect("nonempty root system")
            .clone();
        for r in &positive {
            for (a, b) in r.coords.iter().zip(&theta.coords) {
                assert!(a <= b, "highest root does not dominate {:?}", r.coords);
            }
        }
        assert_eq!(theta.len2, q_int(2), "highest root must be long");

        let rho = Weight(vec![Q::one(); rank]);
        // 1 + <rho, theta_vee>, with theta long so theta_vee has the same
        // coordinates under the normalized form.
        let pairing = pair_with_coroot_raw(&sym, &rho, &theta);
        assert!(pairing.is_integer(), "dual Coxeter pairing must be integral");
        let dual_coxeter = 1 + int_of(&pairing);

        Ok(RootSystem {
            label,
            series,
            rank,
            cartan,
            sym,
            positive,
            rho,
            theta,
            dual_coxeter,
            cartan_inv,
        })
    }

    /// Invariant form `(lambda, mu)` of two weights in fundamental
    /// coordinates.
    pub fn weight_form(&self, lambda: &Weight, mu: &Weight) -> Q {
        // (lambda, mu) = lambda^T diag(d) A^{-1} mu, since the root
        // coordinates of mu are A^{-1} mu and (omega_i, alpha_k) = d_k
        // delta_{ik}.
        let mu_root = self.cartan_inv.apply(&mu.0);
        let mut s = Q::zero();
        for i in 0..self.rank {
            if lambda.0[i].is_zero() || mu_root[i].is_zero() {
                continue;
            }
            s += &lambda.0[i] * &self.sym[i] * &mu_root[i];
        }
        s
    }

    /// Form value `(lambda, alpha)` for a root given in simple-root
    /// coordinates.
    pub fn weight_root_form(&self, lambda: &Weight, root: &Root) -> Q {
        let mut s = Q::zero();
        for i in 0..self.rank {
            if root.coords[i] == 0 || lambda.0[i].is_zero() {
                continue;
            }
            s += q_int(root.coords[i]) * &self.sym[i] * &lambda.0[i];
        }
        s
    }

    /// Pairing `<lambda, alpha_vee> = 2 (lambda, alpha) / (alpha, alpha)`.
    pub fn pair_coroot(&self, lambda: &Weight, root: &Root) -> Q {
        pair_with_coroot_raw(&self.sym, lambda, root)
    }

    /// Pairing `<lambda, rho_vee>`: the sum of the simple-root coordinates
    /// of lambda. For a positive root this is its height.
    pub fn coroot_height(&self, lambda: &Weight) -> Q {
        self.cartan_inv.apply(&lambda.0).into_iter().sum()
    }

    /// Fundamental coordinates of a vector given in simple-root coordinates.
    pub fn root_coords_to_weight(&self, coords: &[Q]) -> Weight {
        let mut out = vec![Q::zero(); self.rank];
        for (j, c) in coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for i in 0..self.rank {
                out[i] += c * q_int(self.cartan[i][j]);
            }
        }
        Weight(out)
    }

    /// Simple-root coordinates of a weight.
    pub fn weight_to_root_coords(&self, lambda: &Weight) -> Vec<Q> {
        self.cartan_inv.apply(&lambda.0)
    }

    /// The simple reflection s_i as a matrix on fundamental coordinates.
    pub fn simple_reflection_matrix(&self, i: usize) -> Vec<Vec<i64>> {
        assert!(i < self.rank, "reflection index out of range");
        let mut m = vec![vec![0i64; self.rank]; self.rank];
        for j in 0..self.rank {
            m[j][j] = 1;
            m[j][i] -= self.cartan[j][i];
        }
        m
    }

    /// Apply the simple reflection s_i to a weight.
    pub fn simple_reflect(&self, i: usize, lambda: &Weight) -> Weight {
        let mut out = lambda.0.clone();
        let c = lambda.0[i].clone();
        if !c.is_zero() {
            for j in 0..self.rank {
                out[j] -= &c * q_int(self.cartan[j][i]);
            }
        }
        Weight(out)
    }

    /// Order of the Weyl group, from the classical tables.
    pub fn weyl_order(&self) -> u64 {
        let n = self.rank as u64;
        match self.series {
            Series::A => factorial(n + 1),
            Series::B | Series::C => (1u64 << n) * factorial(n),
            Series::D => (1u64 << (n - 1)) * factorial(n),
            Series::E => match n {
                6 => 51_840,
                7 => 2_903_040,
                8 => 696_729_600,
                _ => unreachable!(),
            },
            Series::F => 1_152,
            Series::G => 12,
        }
    }

    /// Dimension of the ambient simple Lie algebra.
    pub fn algebra_dim(&self) -> i64 {
        self.rank as i64 + 2 * self.positive.len() as i64
    }

    /// Exponents `m_alpha = <rho, alpha_vee>` over the positive roots, i.e.
    /// the coroot heights, sorted ascending.
    pub fn coroot_heights_of_positive(&self) -> Vec<i64> {
        let mut hs: Vec<i64> = self
            .positive
            .iter()
            .map(|r| int_of(&self.pair_coroot(&self.rho, r)))
            .collect();
        hs.sort_unstable();
        hs
    }
}

fn pair_with_coroot_raw(sym: &[Q], lambda: &Weight, root: &Root) -> Q {
    let mut form = Q::zero();
    for i in 0..lambda.rank() {
        if root.coords[i] == 0 || lambda.0[i].is_zero() {
            continue;
        }
        form += q_int(root.coords[i]) * &sym[i] * &lambda.0[i];
    }
    q_int(2) * form / &root.len2
}

fn int_of(q: &Q) -> i64 {
    assert!(q.is_integer(), "expected integer, got {q}");
    let n = q.to_integer();
    let (sign, digits) = n.to_u64_digits();
    let mag = match digits.len() {
        0 => 0u64,
        1 => digits[0],
        _ => panic!("integer out of i64 range"),
    };
    let v = i64::try_from(mag).expect("integer out of i64 range");
    match sign {
        num_bigint::Sign::Minus => -v,
        _ => v,
    }
}

fn factorial(n: u64) -> u64 {
    (1..=n).product()
}

/// Cartan matrices in the Bourbaki numbering, `cartan[i][j] =
/// <alpha_j, alpha_i_vee>`.
fn cartan_matrix(series: Series, rank: usize) -> Vec<Vec<i64>> {
    let n = rank;
    let mut a = vec![vec![0i64; n]; n];
    for i in 0..n {
        a[i][i] = 2;
    }
    fn chain(a: &mut [Vec<i64>], i: usize, j: usize) {
        a[i][j] = -1;
        a[j][i] = -1;
    }
    match series {
        Series::A => {
            for i in 1..n {
                chain(&mut a, i - 1, i);
            }
        }
        Series::B => {
            // alpha_n short: <alpha_{n-1}, alpha_n_vee> = -2.
            for i in 1..n - 1 {
                chain(&mut a, i - 1, i);
            }
            a[n - 2][n - 1] = -1;
            a[n - 1][n - 2] = -2;
        }
        Series::C => {
            // alpha_n long: transpose of B_n on the last bond.
            for i in 1..n - 1 {
                chain(&mut a, i - 1, i);
            }
            a[n - 2][n - 1] = -2;
            a[n - 1][n - 2] = -1;
        }
        Series::D => {
            for i in 1..n - 1 {
                chain(&mut a, i - 1, i);
            }
            chain(&mut a, n - 3, n - 1);
        }
        Series::E => {
            // Bourbaki: node 2 attaches to node 4 of the A-chain 1-3-4-5-...
            chain(&mut a, 0, 2);
            chain(&mut a, 2, 3);
            chain(&mut a, 1, 3);
            for i in 4..n {
                chain(&mut a, i - 1, i);
            }
        }
        Series::F => {
            // alpha_1, alpha_2 long; alpha_3, alpha_4 short.
            chain(&mut a, 0, 1);
            a[1][2] = -1;
            a[2][1] = -2;
            chain(&mut a, 2, 3);
        }
        Series::G => {
            // alpha_1 short, alpha_2 long.
            a[0][1] = -3;
            a[1][0] = -1;
        }
    }
    a
}

/// Solve `d_i a_ij = d_j a_ji` over the Dynkin graph and scale so the
/// largest `d_i` is 1.
fn symmetrizer(cartan: &[Vec<i64>]) -> Vec<Q> {
    let n = cartan.len();
    let mut d: Vec<Option<Q>> = vec![None; n];
    d[0] = Some(Q::one());
    let mut queue = vec![0usize];
    while let Some(i) = queue.pop() {
        let di = d[i].clone().unwrap();
        for j in 0..n {
            if i == j || cartan[i][j] == 0 || d[j].is_some() {
                continue;
            }
            // d_j = d_i * a_ij / a_ji.
            d[j] = Some(&di * q_int(cartan[i][j]) / q_int(cartan[j][i]));
            queue.push(j);
        }
    }
    let mut d: Vec<Q> = d
        .into_iter()
        .map(|x| x.expect("Dynkin graph must be connected"))
        .collect();
    let max = d.iter().max().unwrap().clone();
    for x in d.iter_mut() {
        *x = &*x / &max;
    }
    for i in 0..n {
        for j in 0..n {
            assert_eq!(
                &d[i] * q_int(cartan[i][j]),
                &d[j] * q_int(cartan[j][i]),
                "symmetrizer failed"
            );
        }
    }
    d
}

/// All positive roots as the positive half of the reflection orbit of the
/// simple roots.
fn close_positive_roots(cartan: &[Vec<i64>], sym: &[Q]) -> Vec<Root> {
    let n = cartan.len();
    let mut seen: std::collections::BTreeSet<Vec<i64>> = std::collections::BTreeSet::new();
    let mut queue: Vec<Vec<i64>> = Vec::new();
    for i in 0..n {
        let mut c = vec![0i64; n];
        c[i] = 1;
        seen.insert(c.clone());
        queue.push(c);
    }
    // s_i acts on simple-root coordinates by c_j -> c_j (j != i),
    // c_i -> c_i - sum_j a_ij c_j.
    while let Some(c) = queue.pop() {
        for i in 0..n {
            let mut img = c.clone();
            let mut pair = 0i64;
            for j in 0..n {
                pair += cartan[i][j] * c[j];
            }
            img[i] -= pair;
            if seen.insert(img.clone()) {
                queue.push(img);
            }
        }
    }
    let mut positive: Vec<Root> = seen
        .into_iter()
        .filter(|c| c.iter().all(|&x| x >= 0))
        .map(|coords| {
            let fund: Vec<i64> = (0..n)
                .map(|i| (0..n).map(|j| cartan[i][j] * coords[j]).sum())
                .collect();
            let height = coords.iter().sum();
            let mut len2 = Q::zero();
            for i in 0..n {
                for j in 0..n {
                    if coords[i] != 0 && coords[j] != 0 {
                        // (alpha_i, alpha_j) = d_i a_ij.
                        len2 += q_int(coords[i] * coords[j] * cartan[i][j]) * &sym[i];
                    }
                }
            }
            Root {
                coords,
                fund,
                height,
                len2,
            }
        })
        .collect();
    positive.sort_by(|a, b| (a.height, &a.coords).cmp(&(b.height, &b.coords)));
    positive
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::q_ratio;

    #[test]
    fn a1_basics() {
        let rs = RootSystem::from_label("A1").unwrap();
        assert_eq!(rs.positive.len(), 1);
        assert_eq!(rs.rho, Weight::from_ints(&[1]));
        assert_eq!(rs.dual_coxeter, 2);
        let omega = Weight::from_ints(&[1]);
        let alpha = &rs.positive[0];
        assert_eq!(rs.pair_coroot(&omega, alpha), q_int(1));
        assert_eq!(rs.pair_coroot(&omega.add(&rs.rho), alpha), q_int(2));
    }

    #[test]
    fn a2_positive_roots() {
        let rs = RootSystem::from_label("A2").unwrap();
        let coords: Vec<Vec<i64>> = rs.positive.iter().map(|r| r.coords.clone()).collect();
        assert_eq!(coords, vec![vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(rs.dual_coxeter, 3);
        let two_rho = Weight::from_ints(&[2, 2]);
        let theta = rs.positive.last().unwrap();
        assert_eq!(rs.pair_coroot(&two_rho, theta), q_int(4));
    }

    #[test]
    fn g2_data() {
        let rs = RootSystem::from_label("G2").unwrap();
        assert_eq!(rs.positive.len(), 6);
        assert_eq!(rs.dual_coxeter, 4);
        assert_eq!(rs.algebra_dim(), 14);
        assert_eq!(rs.weyl_order(), 12);
        assert_eq!(rs.theta.coords, vec![3, 2]);
        assert_eq!(rs.sym, vec![q_ratio(1, 3), q_int(1)]);
    }

    #[test]
    fn b2_data() {
        let rs = RootSystem::from_label("B2").unwrap();
        assert_eq!(rs.positive.len(), 4);
        assert_eq!(rs.dual_coxeter, 3);
        assert_eq!(rs.theta.coords, vec![1, 2]);
        assert_eq!(rs.weyl_order(), 8);
    }

    #[test]
    fn dual_coxeter_table() {
        let expect = [
            ("A1", 2),
            ("A4", 5),
            ("B3", 5),
            ("B4", 7),
            ("C3", 4),
            ("C4", 5),
            ("D4", 6),
            ("D5", 8),
            ("E6", 12),
            ("E7", 18),
            ("E8", 30),
            ("F4", 9),
            ("G2", 4),
        ];
        for (label, h) in expect {
            let rs = RootSystem::from_label(label).unwrap();
            assert_eq!(rs.dual_coxeter, h, "dual Coxeter of {label}");
        }
    }

    #[test]
    fn root_counts_match_dimensions() {
        let dims = [
            ("A3", 15),
            ("B3", 21),
            ("C3", 21),
            ("D4", 28),
            ("E6", 78),
            ("E7", 133),
            ("E8", 248),
            ("F4", 52),
            ("G2", 14),
        ];
        for (label, dim) in dims {
            let rs = RootSystem::from_label(label).unwrap();
            assert_eq!(rs.algebra_dim(), dim, "dimension of {label}");
        }
    }

    #[test]
    fn form_is_symmetric_and_matches_pairings() {
        for label in ["A2", "B2", "G2", "F4", "C3"] {
            let rs = RootSystem::from_label(label).unwrap();
            for i in 0..rs.rank {
                let mut ei = vec![Q::zero(); rs.rank];
                ei[i] = Q::one();
                let omega_i = Weight(ei);
                for (j, root) in rs.positive.iter().enumerate() {
                    let alpha = root.weight();
                    assert_eq!(
                        rs.weight_form(&omega_i, &alpha),
                        rs.weight_form(&alpha, &omega_i),
                        "{label}: form asymmetric at omega_{i}, root {j}"
                    );
                    assert_eq!(
                        rs.weight_form(&alpha, &alpha),
                        root.len2,
                        "{label}: form disagrees with root length"
                    );
                }
                // (omega_i, alpha_k) = d_k delta_ik.
                for k in 0..rs.rank {
                    let alpha_k = rs.positive.iter().find(|r| {
                        r.coords.iter().enumerate().all(|(m, &c)| {
                            c == if m == k { 1 } else { 0 }
                        })
                    });
                    let val = rs.weight_form(&omega_i, &alpha_k.unwrap().weight());
                    let expect = if i == k { rs.sym[k].clone() } else { Q::zero() };
                    assert_eq!(val, expect, "{label}: fundamental pairing");
                }
            }
        }
    }

    #[test]
    fn coroot_height_of_roots_is_height() {
        for label in ["A2", "B2", "G2", "F4"] {
            let rs = RootSystem::from_label(label).unwrap();
            for r in &rs.positive {
                assert_eq!(rs.coroot_height(&r.weight()), q_int(r.height));
            }
            for r in rs.positive.iter().filter(|r| r.height == 1) {
                assert_eq!(
                    rs.pair_coroot(&rs.rho, r),
                    q_int(1),
                    "rho pairs to 1 with every simple coroot"
                );
            }
        }
    }

    #[test]
    fn reflections_permute_roots() {
        for label in ["A2", "B2", "G2"] {
            let rs = RootSystem::from_label(label).unwrap();
            let mut all: Vec<Weight> = rs.positive.iter().map(|r| r.weight()).collect();
            let negs: Vec<Weight> = all.iter().map(|w| w.scale(&q_int(-1))).collect();
            all.extend(negs);
            for i in 0..rs.rank {
                for w in &all {
                    let img = rs.simple_reflect(i, w);
                    assert!(all.contains(&img), "{label}: reflection left root set");
                }
            }
        }
    }

    #[test]
    fn bad_labels_rejected() {
        for label in ["H3", "A0", "A9", "B1", "D3", "E9", "F3", "G3", "XY", ""] {
            assert!(RootSystem::from_label(label).is_err(), "{label} accepted");
        }
    }
}
