//! The partial order on a group generated by degree elements.
//!
//! `g <= h` iff `h - g` is a nonnegative integer combination of the degrees. A linear
//! functional `theta` that is strictly positive on every degree bounds all searches.

use std::collections::HashMap;
use std::sync::RwLock;

use num_integer::Integer;
use thiserror::Error;

use crate::abgroup::{self, AbGroupError, FgAbelianGroup, GroupElement, Quotient};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrderError {
    #[error("no degree elements given")]
    EmptyDegrees,
    #[error("degree x{} is zero", index + 1)]
    G1Violation { index: usize },
    #[error("degrees do not generate the group: quotient has torsion {torsion:?} and free rank {free_rank}")]
    G2Violation { torsion: Vec<i64>, free_rank: usize },
    #[error("the order is not antisymmetric: {witness} and its negative are both nonnegative")]
    G3Violation { witness: GroupElement },
    #[error("could not decide whether the order is antisymmetric")]
    Inconclusive,
    #[error("free rank {0} is not supported (only ranks 1 and 2)")]
    UnsupportedRank(usize),
    #[error("shift element is not strictly positive")]
    ShiftNotPositive,
    #[error("degenerate sign split: {0}")]
    DegenerateSplit(String),
    #[error("quotient by the shift is infinite")]
    InfiniteQuotient,
    #[error(transparent)]
    Group(#[from] AbGroupError),
}

/// A group with degree elements satisfying the three order axioms.
pub struct GradedDegreeGroup {
    group: FgAbelianGroup,
    degrees: Vec<GroupElement>,
    names: Vec<String>,
    p: GroupElement,
    shift: GroupElement,
    theta: Vec<i64>,
    theta_deg: Vec<i64>,
    counts: RwLock<HashMap<GroupElement, u64>>,
}

impl Clone for GradedDegreeGroup {
    fn clone(&self) -> Self {
        GradedDegreeGroup {
            group: self.group.clone(),
            degrees: self.degrees.clone(),
            names: self.names.clone(),
            p: self.p.clone(),
            shift: self.shift.clone(),
            theta: self.theta.clone(),
            theta_deg: self.theta_deg.clone(),
            counts: RwLock::new(HashMap::new()),
        }
    }
}

impl std::fmt::Debug for GradedDegreeGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GradedDegreeGroup")
            .field("torsion", &self.group.torsion_orders())
            .field("free_rank", &self.group.free_rank())
            .field("degrees", &self.degrees)
            .field("shift", &self.shift)
            .finish()
    }
}

fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn cross(a: &[i64], b: &[i64]) -> i64 {
    a[0] * b[1] - a[1] * b[0]
}

fn theta_rank2(frees: &[Vec<i64>]) -> Option<Vec<i64>> {
    let positive = |t: &[i64]| frees.iter().all(|f| dot(t, f) > 0);
    let mut weak = Vec::new();
    for f in frees {
        for n in [vec![-f[1], f[0]], vec![f[1], -f[0]]] {
            if frees.iter().all(|g| dot(&n, g) >= 0) && !weak.contains(&n) {
                weak.push(n);
            }
        }
    }
    if positive(&frees[0]) {
        return Some(frees[0].clone());
    }
    for (i, a) in weak.iter().enumerate() {
        for b in &weak[i + 1..] {
            let t: Vec<i64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
            if positive(&t) {
                return Some(t);
            }
        }
    }
    weak.into_iter().find(|t| positive(t))
}

/// A positive integer relation among free parts summing to zero, rank at most two.
fn zero_combination(frees: &[Vec<i64>]) -> Option<Vec<(usize, i64)>> {
    let n = frees.len();
    let reduce = |mut v: Vec<(usize, i64)>| {
        let g = v.iter().fold(0i64, |acc, (_, c)| acc.gcd(c));
        for (_, c) in v.iter_mut() {
            *c /= g;
        }
        v
    };
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (&frees[i], &frees[j]);
            let parallel = a.len() == 1 || cross(a, b) == 0;
            if parallel && dot(a, b) < 0 {
                let c = (0..a.len()).find(|&c| a[c] != 0)?;
                let v = reduce(vec![(i, b[c].abs()), (j, a[c].abs())]);
                return Some(v);
            }
        }
    }
    if frees.first().map_or(0, |f| f.len()) == 2 {
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let (a, b, c) = (&frees[i], &frees[j], &frees[k]);
                    let co = [cross(b, c), cross(c, a), cross(a, b)];
                    let all_pos = co.iter().all(|&x| x > 0);
                    let all_neg = co.iter().all(|&x| x < 0);
                    if all_pos || all_neg {
                        let v = vec![(i, co[0].abs()), (j, co[1].abs()), (k, co[2].abs())];
                        return Some(reduce(v));
                    }
                }
            }
        }
    }
    None
}

impl GradedDegreeGroup {
    pub fn build(group: FgAbelianGroup, degrees: Vec<GroupElement>) -> Result<Self, OrderError> {
        let names = (1..=degrees.len()).map(|i| format!("x{i}")).collect();
        Self::build_with(group, degrees, names, None)
    }

    /// Full constructor: `names` label the degrees in monomials; `shift` replaces the
    /// default shift element (the sum of the degrees).
    pub fn build_with(
        group: FgAbelianGroup,
        degrees: Vec<GroupElement>,
        names: Vec<String>,
        shift: Option<GroupElement>,
    ) -> Result<Self, OrderError> {
        if degrees.is_empty() {
            return Err(OrderError::EmptyDegrees);
        }
        for d in &degrees {
            if d.0.len() != group.dim() {
                return Err(AbGroupError::DimensionMismatch {
                    expected: group.dim(),
                    got: d.0.len(),
                }
                .into());
            }
        }
        if let Some(index) = degrees.iter().position(|d| d.0.iter().all(|&x| x == 0)) {
            return Err(OrderError::G1Violation { index });
        }
        let q = group.quotient_by(&degrees);
        if q.group().dim() != 0 {
            return Err(OrderError::G2Violation {
                torsion: q.group().torsion_orders().to_vec(),
                free_rank: q.group().free_rank(),
            });
        }
        let r = group.free_rank();
        if r > 2 {
            return Err(OrderError::UnsupportedRank(r));
        }
        if let Some(d) = degrees.iter().find(|d| group.is_torsion(d)) {
            return Err(OrderError::G3Violation { witness: d.clone() });
        }
        let frees: Vec<Vec<i64>> = degrees
            .iter()
            .map(|d| group.free_part(d).to_vec())
            .collect();
        let theta = match r {
            1 if frees.iter().all(|f| f[0] > 0) => Some(vec![1]),
            1 if frees.iter().all(|f| f[0] < 0) => Some(vec![-1]),
            1 => None,
            _ => theta_rank2(&frees),
        };
        let Some(theta) = theta else {
            let combo = zero_combination(&frees).ok_or(OrderError::Inconclusive)?;
            let t = group.sum(
                combo
                    .iter()
                    .flat_map(|&(i, c)| std::iter::repeat_n(&degrees[i], c as usize)),
            );
            let witness = if t.0.iter().all(|&x| x == 0) {
                degrees[combo[0].0].clone()
            } else {
                t
            };
            return Err(OrderError::G3Violation { witness });
        };
        let theta_deg: Vec<i64> = frees.iter().map(|f| dot(&theta, f)).collect();
        let p = group.sum(&degrees);
        let shift = shift.unwrap_or_else(|| p.clone());
        let ctx = GradedDegreeGroup {
            group,
            degrees,
            names,
            p,
            shift,
            theta,
            theta_deg,
            counts: RwLock::new(HashMap::new()),
        };
        if ctx.theta(&ctx.shift) <= 0 {
            return Err(OrderError::ShiftNotPositive);
        }
        Ok(ctx)
    }

    pub fn group(&self) -> &FgAbelianGroup {
        &self.group
    }

    pub fn degrees(&self) -> &[GroupElement] {
        &self.degrees
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn n_degrees(&self) -> usize {
        self.degrees.len()
    }

    /// Sum of the degrees.
    pub fn p(&self) -> &GroupElement {
        &self.p
    }

    /// The element generating the translation action on upper sets.
    pub fn shift(&self) -> &GroupElement {
        &self.shift
    }

    pub fn theta_functional(&self) -> &[i64] {
        &self.theta
    }

    pub fn theta(&self, g: &GroupElement) -> i64 {
        dot(&self.theta, self.group.free_part(g))
    }

    pub fn theta_of_degree(&self, i: usize) -> i64 {
        self.theta_deg[i]
    }

    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        self.group.add(a, b)
    }

    pub fn sub(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        self.group.sub(a, b)
    }

    /// `g + n * shift`
    pub fn shifted(&self, g: &GroupElement, n: i64) -> GroupElement {
        self.group.add_scaled(g, &self.shift, n)
    }

    /// `n` with `diff = n * shift`, if any.
    pub fn shift_multiple(&self, diff: &GroupElement) -> Option<i64> {
        let ts = self.theta(&self.shift);
        let t = self.theta(diff);
        if t % ts != 0 {
            return None;
        }
        let n = t / ts;
        (self.group.scale(&self.shift, n) == *diff).then_some(n)
    }

    /// The translate `g + n * shift` with `0 <= theta < theta(shift)`.
    pub fn slab_lift(&self, g: &GroupElement) -> GroupElement {
        let n = -Integer::div_floor(&self.theta(g), &self.theta(&self.shift));
        self.shifted(g, n)
    }

    fn count_from(
        &self,
        i: usize,
        rest: &GroupElement,
        memo: &mut HashMap<(usize, GroupElement), u64>,
    ) -> u64 {
        let budget = self.theta(rest);
        if budget < 0 {
            return 0;
        }
        let t = self.theta_deg[i];
        if i + 1 == self.degrees.len() {
            if budget % t != 0 {
                return 0;
            }
            return u64::from(self.group.scale(&self.degrees[i], budget / t) == *rest);
        }
        if let Some(&c) = memo.get(&(i, rest.clone())) {
            return c;
        }
        let mut total = 0;
        let mut r = rest.clone();
        for _ in 0..=budget / t {
            total += self.count_from(i + 1, &r, memo);
            r = self.group.sub(&r, &self.degrees[i]);
        }
        memo.insert((i, rest.clone()), total);
        total
    }

    /// Number of monomials of degree `g`.
    pub fn hom_dim(&self, g: &GroupElement) -> u64 {
        if self.theta(g) < 0 {
            return 0;
        }
        if let Some(&c) = self.counts.read().unwrap().get(g) {
            return c;
        }
        let c = self.count_from(0, g, &mut HashMap::new());
        self.counts.write().unwrap().insert(g.clone(), c);
        c
    }

    pub fn is_nonnegative(&self, g: &GroupElement) -> bool {
        self.hom_dim(g) > 0
    }

    pub fn leq(&self, g: &GroupElement, h: &GroupElement) -> bool {
        self.is_nonnegative(&self.group.sub(h, g))
    }

    pub fn lt(&self, g: &GroupElement, h: &GroupElement) -> bool {
        g != h && self.leq(g, h)
    }

    /// Exponent vectors of all monomials of degree `g`.
    pub fn monomials(&self, g: &GroupElement) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        if self.theta(g) >= 0 {
            let mut cur = vec![0u32; self.degrees.len()];
            self.monomials_from(0, g, &mut cur, &mut out);
        }
        out
    }

    fn monomials_from(
        &self,
        i: usize,
        rest: &GroupElement,
        cur: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
    ) {
        let budget = self.theta(rest);
        if budget < 0 {
            return;
        }
        let t = self.theta_deg[i];
        if i + 1 == self.degrees.len() {
            if budget % t == 0 && self.group.scale(&self.degrees[i], budget / t) == *rest {
                cur[i] = (budget / t) as u32;
                out.push(cur.clone());
                cur[i] = 0;
            }
            return;
        }
        let mut r = rest.clone();
        for k in 0..=budget / t {
            cur[i] = k as u32;
            self.monomials_from(i + 1, &r, cur, out);
            r = self.group.sub(&r, &self.degrees[i]);
        }
        cur[i] = 0;
    }

    /// Degree of a monomial.
    pub fn degree_of(&self, exps: &[u32]) -> GroupElement {
        let mut acc = self.group.zero();
        for (e, d) in exps.iter().zip(&self.degrees) {
            acc = self.group.add_scaled(&acc, d, i64::from(*e));
        }
        acc
    }

    /// `x1*x3`, `x2^2`, or `1` for the constant monomial.
    pub fn monomial_label(&self, exps: &[u32]) -> String {
        let parts: Vec<String> = exps
            .iter()
            .zip(&self.names)
            .filter(|(e, _)| **e > 0)
            .map(|(e, n)| {
                if *e == 1 {
                    n.clone()
                } else {
                    format!("{n}^{e}")
                }
            })
            .collect();
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }

    /// `G / Z*shift` with one slab lift per coset. Requires a finite quotient.
    pub fn coset_reps_mod_shift(&self) -> Result<(Quotient, Vec<GroupElement>), OrderError> {
        let q = self.group.quotient_by(std::slice::from_ref(&self.shift));
        let cosets = q
            .group()
            .enumerate_finite()
            .map_err(|_| OrderError::InfiniteQuotient)?;
        let reps = cosets.iter().map(|c| self.slab_lift(&q.lift(c))).collect();
        Ok((q, reps))
    }

    /// Same presentation up to isomorphism: an isomorphism of groups sending the `i`-th
    /// degree of `self` to the `i`-th degree of `other` exists.
    pub fn graded_isomorphic(&self, other: &GradedDegreeGroup) -> bool {
        self.degrees.len() == other.degrees.len()
            && abgroup::relation_lattice(&self.group, &self.degrees)
                == abgroup::relation_lattice(&other.group, &other.degrees)
    }

    /// Rank-two preprocessing: splits the degrees by the sign of their image in the free
    /// part of `G / Zp`.
    pub fn sign_split(&self) -> Result<SignSplit, OrderError> {
        if self.group.free_rank() != 2 {
            return Err(OrderError::DegenerateSplit(format!(
                "free rank is {}",
                self.group.free_rank()
            )));
        }
        let mut quotient = self.group.quotient_by(std::slice::from_ref(&self.p));
        if quotient.group().free_rank() != 1 {
            return Err(OrderError::DegenerateSplit(
                "quotient by p is not of rank one".into(),
            ));
        }
        let k = quotient.group().torsion_orders().len();
        let pi_of = |q: &Quotient, g: &GroupElement| q.project(g).0[k];
        if pi_of(&quotient, &self.degrees[0]) < 0 {
            quotient.negate_free_axis(0);
        }
        let pi: Vec<i64> = self.degrees.iter().map(|d| pi_of(&quotient, d)).collect();
        if let Some(i) = pi.iter().position(|&v| v == 0) {
            return Err(OrderError::DegenerateSplit(format!(
                "x{} maps to zero",
                i + 1
            )));
        }
        let positive: Vec<usize> = (0..pi.len()).filter(|&i| pi[i] > 0).collect();
        let negative: Vec<usize> = (0..pi.len()).filter(|&i| pi[i] < 0).collect();
        if positive.len() < 2 || negative.len() < 2 {
            return Err(OrderError::DegenerateSplit(format!(
                "{} positive and {} negative degrees",
                positive.len(),
                negative.len()
            )));
        }
        let hg = quotient.group().clone();
        let mut degrees = Vec::new();
        let mut names = Vec::new();
        for &i in &positive {
            degrees.push(quotient.project(&self.degrees[i]));
            names.push(self.names[i].clone());
        }
        for &j in &negative {
            degrees.push(hg.neg(&quotient.project(&self.degrees[j])));
            names.push(format!("-{}", self.names[j]));
        }
        let s = hg.sum(&degrees[..positive.len()]);
        debug_assert_eq!(s, hg.sum(&degrees[positive.len()..]));
        let h = GradedDegreeGroup::build_with(hg, degrees, names, Some(s.clone()))?;
        Ok(SignSplit {
            positive,
            negative,
            pi,
            quotient,
            s,
            h,
        })
    }
}

/// Sign partition of the degrees of a rank-two graded group, with `H = G / Zp`.
#[derive(Clone, Debug)]
pub struct SignSplit {
    /// Indices with positive image, in input order.
    pub positive: Vec<usize>,
    pub negative: Vec<usize>,
    /// Image of each degree in the free part of `H`.
    pub pi: Vec<i64>,
    pub quotient: Quotient,
    /// Sum of the images of the positive degrees.
    pub s: GroupElement,
    /// `H` ordered by the images of the positive degrees and the negated images of the
    /// negative ones, with shift `s`.
    pub h: GradedDegreeGroup,
}

impl SignSplit {
    pub fn q(&self, g: &GroupElement) -> GroupElement {
        self.quotient.project(g)
    }
}
