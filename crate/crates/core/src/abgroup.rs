//! Finitely generated abelian groups in Smith-normal-form coordinates.
//!
//! A group `Z/d_1 + ... + Z/d_k + Z^r` (with `d_1 | ... | d_k`, each `d_i >= 2`) is
//! stored together with the change of basis from the presentation it was built from.
//! Elements are plain coordinate vectors, torsion coordinates first, each reduced into
//! `[0, d_i)`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, Matrix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AbGroupError {
    #[error("expected a vector of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("coordinate change does not fit in 64-bit integers")]
    Overflow,
    #[error("the group is infinite")]
    InfiniteGroup,
    #[error("torsion orders {0:?} do not form a divisibility chain of integers >= 2")]
    BadInvariants(Vec<i64>),
}

/// Canonical coordinates of a group element.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupElement(pub Vec<i64>);

impl GroupElement {
    pub fn coords(&self) -> &[i64] {
        &self.0
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Order {
    Finite(u64),
    Infinite,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FgAbelianGroup {
    torsion: Vec<i64>,
    free_rank: usize,
    /// `n_gens x dim`: row `i` is the canonical image of the `i`-th presentation generator.
    to_canon: Matrix<i64>,
    /// `dim x n_gens`: a section of `to_canon`.
    from_canon: Matrix<i64>,
}

fn to_i64(m: &Matrix<BigInt>) -> Result<Matrix<i64>, AbGroupError> {
    m.iter()
        .map(|row| {
            row.iter()
                .map(|x| x.to_i64().ok_or(AbGroupError::Overflow))
                .collect()
        })
        .collect()
}

impl FgAbelianGroup {
    /// Cokernel `Z^n / rowspan(relations)`.
    pub fn from_presentation(n_gens: usize, relations: &[Vec<i64>]) -> Result<Self, AbGroupError> {
        for r in relations {
            if r.len() != n_gens {
                return Err(AbGroupError::DimensionMismatch {
                    expected: n_gens,
                    got: r.len(),
                });
            }
        }
        let rel: Matrix<BigInt> = relations
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        let snf = linalg::smith_normal_form(&rel, n_gens);
        let v = to_i64(&snf.v)?;
        let v_inv = to_i64(&snf.v_inv)?;
        let mut torsion = Vec::new();
        let mut tors_cols = Vec::new();
        for (j, d) in snf.diagonal.iter().enumerate() {
            if !d.is_one() {
                torsion.push(d.to_i64().ok_or(AbGroupError::Overflow)?);
                tors_cols.push(j);
            }
        }
        let free_cols: Vec<usize> = (snf.rank()..n_gens).collect();
        let cols: Vec<usize> = tors_cols.iter().chain(&free_cols).copied().collect();
        let to_canon = (0..n_gens)
            .map(|i| cols.iter().map(|&j| v[i][j]).collect())
            .collect();
        let from_canon = cols.iter().map(|&j| v_inv[j].clone()).collect();
        Ok(FgAbelianGroup {
            torsion,
            free_rank: free_cols.len(),
            to_canon,
            from_canon,
        })
    }

    /// The group `Z/d_1 + ... + Z/d_k + Z^r` presented on its own canonical generators.
    pub fn from_invariants(torsion: Vec<i64>, free_rank: usize) -> Result<Self, AbGroupError> {
        let chain_ok =
            torsion.iter().all(|&d| d >= 2) && torsion.windows(2).all(|w| w[1] % w[0] == 0);
        if !chain_ok {
            return Err(AbGroupError::BadInvariants(torsion));
        }
        let dim = torsion.len() + free_rank;
        let id: Matrix<i64> = linalg::identity(dim);
        Ok(FgAbelianGroup {
            torsion,
            free_rank,
            to_canon: id.clone(),
            from_canon: id,
        })
    }

    /// `Z^r + Z/t_1 + ... + Z/t_k` with generators listed free-first, as people usually
    /// write such groups. The torsion orders need not form a chain.
    pub fn from_free_then_torsion(
        free_rank: usize,
        torsion_orders: &[i64],
    ) -> Result<Self, AbGroupError> {
        let k = torsion_orders.len();
        let n = free_rank + k;
        let chain_ok = torsion_orders.iter().all(|&d| d >= 2)
            && torsion_orders.windows(2).all(|w| w[1] % w[0] == 0);
        if chain_ok {
            // canonical order is torsion-first: a permutation suffices
            let mut to_canon = vec![vec![0; n]; n];
            for j in 0..free_rank {
                to_canon[j][k + j] = 1;
            }
            for j in 0..k {
                to_canon[free_rank + j][j] = 1;
            }
            let from_canon = linalg::transpose(&to_canon, n);
            return Ok(FgAbelianGroup {
                torsion: torsion_orders.to_vec(),
                free_rank,
                to_canon,
                from_canon,
            });
        }
        let relations: Vec<Vec<i64>> = torsion_orders
            .iter()
            .enumerate()
            .map(|(j, &t)| {
                let mut r = vec![0; n];
                r[free_rank + j] = t;
                r
            })
            .collect();
        Self::from_presentation(n, &relations)
    }

    pub fn torsion_orders(&self) -> &[i64] {
        &self.torsion
    }

    pub fn free_rank(&self) -> usize {
        self.free_rank
    }

    /// Number of canonical coordinates.
    pub fn dim(&self) -> usize {
        self.torsion.len() + self.free_rank
    }

    /// Number of generators of the presentation this group was built from.
    pub fn n_generators(&self) -> usize {
        self.to_canon.len()
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement(vec![0; self.dim()])
    }

    fn reduce_in_place(&self, v: &mut [i64]) {
        for (x, d) in v.iter_mut().zip(&self.torsion) {
            *x = x.rem_euclid(*d);
        }
    }

    /// Reduces an arbitrary canonical-coordinate vector.
    pub fn reduce(&self, mut v: Vec<i64>) -> GroupElement {
        self.reduce_in_place(&mut v);
        GroupElement(v)
    }

    pub fn element(&self, coords: &[i64]) -> Result<GroupElement, AbGroupError> {
        if coords.len() != self.dim() {
            return Err(AbGroupError::DimensionMismatch {
                expected: self.dim(),
                got: coords.len(),
            });
        }
        Ok(self.reduce(coords.to_vec()))
    }

    /// Maps a vector in presentation-generator coordinates to its canonical element.
    pub fn canonicalize(&self, v: &[i64]) -> Result<GroupElement, AbGroupError> {
        let n = self.n_generators();
        if v.len() != n {
            return Err(AbGroupError::DimensionMismatch {
                expected: n,
                got: v.len(),
            });
        }
        let dim = self.dim();
        let mut acc = vec![0i128; dim];
        for (i, &x) in v.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (a, &m) in acc.iter_mut().zip(&self.to_canon[i]) {
                *a += x as i128 * m as i128;
            }
        }
        let mut out = Vec::with_capacity(dim);
        for (j, a) in acc.into_iter().enumerate() {
            let a = if j < self.torsion.len() {
                a.rem_euclid(self.torsion[j] as i128)
            } else {
                a
            };
            out.push(i64::try_from(a).map_err(|_| AbGroupError::Overflow)?);
        }
        Ok(GroupElement(out))
    }

    /// Image of the `i`-th presentation generator.
    pub fn generator(&self, i: usize) -> GroupElement {
        self.reduce(self.to_canon[i].clone())
    }

    /// A vector in presentation-generator coordinates mapping onto `e`.
    pub fn lift(&self, e: &GroupElement) -> Vec<i64> {
        let n = self.n_generators();
        let mut acc = vec![0i64; n];
        for (j, &c) in e.0.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (a, &m) in acc.iter_mut().zip(&self.from_canon[j]) {
                *a += c * m;
            }
        }
        acc
    }

    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        self.reduce(a.0.iter().zip(&b.0).map(|(x, y)| x + y).collect())
    }

    pub fn sub(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        self.reduce(a.0.iter().zip(&b.0).map(|(x, y)| x - y).collect())
    }

    pub fn neg(&self, a: &GroupElement) -> GroupElement {
        self.reduce(a.0.iter().map(|x| -x).collect())
    }

    pub fn scale(&self, a: &GroupElement, n: i64) -> GroupElement {
        self.reduce(a.0.iter().map(|x| x * n).collect())
    }

    /// `a + n * b`
    pub fn add_scaled(&self, a: &GroupElement, b: &GroupElement, n: i64) -> GroupElement {
        self.reduce(a.0.iter().zip(&b.0).map(|(x, y)| x + n * y).collect())
    }

    pub fn sum<'a>(&self, items: impl IntoIterator<Item = &'a GroupElement>) -> GroupElement {
        let mut acc = vec![0; self.dim()];
        for e in items {
            for (a, x) in acc.iter_mut().zip(&e.0) {
                *a += x;
            }
        }
        self.reduce(acc)
    }

    pub fn torsion_part<'a>(&self, e: &'a GroupElement) -> &'a [i64] {
        &e.0[..self.torsion.len()]
    }

    pub fn free_part<'a>(&self, e: &'a GroupElement) -> &'a [i64] {
        &e.0[self.torsion.len()..]
    }

    pub fn is_torsion(&self, e: &GroupElement) -> bool {
        self.free_part(e).iter().all(|&x| x == 0)
    }

    pub fn element_order(&self, e: &GroupElement) -> Order {
        if !self.is_torsion(e) {
            return Order::Infinite;
        }
        let ord =
            e.0.iter()
                .zip(&self.torsion)
                .fold(1i64, |acc, (&t, &d)| acc.lcm(&(d / t.gcd(&d))));
        Order::Finite(ord as u64)
    }

    pub fn group_size(&self) -> Order {
        if self.free_rank > 0 {
            Order::Infinite
        } else {
            Order::Finite(self.torsion.iter().product::<i64>() as u64)
        }
    }

    /// Every element of a finite group, in lexicographic order of coordinates.
    pub fn enumerate_finite(&self) -> Result<Vec<GroupElement>, AbGroupError> {
        if self.free_rank > 0 {
            return Err(AbGroupError::InfiniteGroup);
        }
        let mut out = vec![Vec::new()];
        for &d in &self.torsion {
            out = out
                .into_iter()
                .flat_map(|prefix: Vec<i64>| {
                    (0..d).map(move |x| {
                        let mut v = prefix.clone();
                        v.push(x);
                        v
                    })
                })
                .collect();
        }
        Ok(out.into_iter().map(GroupElement).collect())
    }

    /// `self / <sub_generators>` together with the projection.
    pub fn quotient_by(&self, sub_generators: &[GroupElement]) -> Quotient {
        let dim = self.dim();
        let mut relations: Vec<Vec<i64>> = Vec::new();
        for (j, &d) in self.torsion.iter().enumerate() {
            let mut r = vec![0; dim];
            r[j] = d;
            relations.push(r);
        }
        relations.extend(sub_generators.iter().map(|g| g.0.clone()));
        let target =
            FgAbelianGroup::from_presentation(dim, &relations).expect("quotient presentation");
        let images = (0..dim).map(|j| target.generator(j)).collect();
        Quotient {
            projection: GroupHom {
                source: self.clone(),
                target,
                images,
            },
        }
    }

    /// The projection onto `Z^free_rank`, whose kernel is the torsion subgroup.
    pub fn free_projection(&self) -> GroupHom {
        let target = FgAbelianGroup::from_invariants(vec![], self.free_rank).expect("free group");
        let k = self.torsion.len();
        let images = (0..self.dim())
            .map(|j| {
                let mut v = vec![0; self.free_rank];
                if j >= k {
                    v[j - k] = 1;
                }
                GroupElement(v)
            })
            .collect();
        GroupHom {
            source: self.clone(),
            target,
            images,
        }
    }

    /// Flips the sign of the `j`-th free coordinate.
    pub fn negate_free_axis(&mut self, j: usize) {
        let c = self.torsion.len() + j;
        for row in self.to_canon.iter_mut() {
            row[c] = -row[c];
        }
        for x in self.from_canon[c].iter_mut() {
            *x = -*x;
        }
    }
}

/// Basis (in Hermite form) of the kernel of `Z^n -> group`, `e_i -> gens_i`.
pub fn relation_lattice(group: &FgAbelianGroup, gens: &[GroupElement]) -> Vec<Vec<i64>> {
    let images: Matrix<BigInt> = gens
        .iter()
        .map(|g| g.0.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    let torsion: Vec<BigInt> = group.torsion.iter().map(|&d| BigInt::from(d)).collect();
    let ker = linalg::hom_kernel(&images, &torsion, group.free_rank);
    ker.iter()
        .map(|r| {
            r.iter()
                .map(|x| x.to_i64().expect("kernel entry fits in i64"))
                .collect()
        })
        .collect()
}

/// Writes group elements as integer combinations of a fixed generating list.
#[derive(Clone, Debug)]
pub struct CombinationSolver {
    n: usize,
    snf: linalg::SmithForm<BigInt>,
}

impl CombinationSolver {
    pub fn new(group: &FgAbelianGroup, gens: &[GroupElement]) -> Self {
        let dim = group.dim();
        let mut rows: Matrix<BigInt> = gens
            .iter()
            .map(|g| g.0.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        for (j, &d) in group.torsion.iter().enumerate() {
            let mut r = vec![BigInt::from(0); dim];
            r[j] = BigInt::from(d);
            rows.push(r);
        }
        CombinationSolver {
            n: gens.len(),
            snf: linalg::smith_normal_form(&rows, dim),
        }
    }

    /// Coefficients `a` with `sum a_i gens_i = target`, if `target` lies in their span.
    pub fn solve(&self, target: &GroupElement) -> Option<Vec<i64>> {
        let b: Vec<BigInt> = target.0.iter().map(|&x| BigInt::from(x)).collect();
        let y = linalg::solve_left_with(&self.snf, &b)?;
        y[..self.n].iter().map(|x| x.to_i64()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupHom {
    pub source: FgAbelianGroup,
    pub target: FgAbelianGroup,
    /// Images of the canonical generators of `source`.
    pub images: Vec<GroupElement>,
}

impl GroupHom {
    pub fn apply(&self, e: &GroupElement) -> GroupElement {
        let mut acc = vec![0i64; self.target.dim()];
        for (&c, img) in e.0.iter().zip(&self.images) {
            if c == 0 {
                continue;
            }
            for (a, x) in acc.iter_mut().zip(&img.0) {
                *a += c * x;
            }
        }
        self.target.reduce(acc)
    }
}

/// A quotient map `G -> G/S` with a set-theoretic section.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quotient {
    pub projection: GroupHom,
}

impl Quotient {
    pub fn group(&self) -> &FgAbelianGroup {
        &self.projection.target
    }

    pub fn source(&self) -> &FgAbelianGroup {
        &self.projection.source
    }

    pub fn project(&self, e: &GroupElement) -> GroupElement {
        self.projection.apply(e)
    }

    /// Some preimage of `e`.
    pub fn lift(&self, e: &GroupElement) -> GroupElement {
        self.source().reduce(self.group().lift(e))
    }

    /// `e` lies in the subgroup that was divided out.
    pub fn in_kernel(&self, e: &GroupElement) -> bool {
        self.project(e).0.iter().all(|&x| x == 0)
    }

    pub fn negate_free_axis(&mut self, j: usize) {
        self.projection.target.negate_free_axis(j);
        let c = self.projection.target.torsion.len() + j;
        for img in self.projection.images.iter_mut() {
            img.0[c] = -img.0[c];
        }
    }
}
