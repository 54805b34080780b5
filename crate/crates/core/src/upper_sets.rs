//! Upper sets encoded by their antichains `J(I) = I ∩ (I^c + shift)`.
//!
//! Every poset here carries a free translation action whose orbits ("fibers") are
//! finite in number. A complete-representative antichain picks one element per fiber,
//! so it is stored as a vector of shift counts relative to fixed fiber base points.

use std::collections::{HashMap, HashSet, VecDeque};
use std::hash::Hash;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abgroup::{GroupElement, Quotient};
use crate::graded_order::{GradedDegreeGroup, OrderError, SignSplit};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum UpperSetError {
    #[error("the upper set is trivial (no generators)")]
    TrivialUpperSet,
    #[error("element {0} does not belong to the poset")]
    NotInPoset(String),
    #[error("element {0} is not minimal in the upper set")]
    NotMinimal(String),
    #[error("element {0} is not maximal in the antichain")]
    NotMaximal(String),
    #[error("not a complete-representative antichain: {0}")]
    Invalid(Violation),
    #[error("more than {0} classes; raise the class ceiling")]
    CeilingExceeded(usize),
    #[error("internal invariant broken: {0}")]
    InternalInvariantBroken(String),
    #[error(transparent)]
    Order(#[from] OrderError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    /// No element of the candidate lies in this fiber.
    MissingFiber(usize),
    /// Two candidate elements lie in the same fiber.
    RepeatedFiber(usize),
    OutsidePoset(String),
    /// `larger >= smaller + shift`
    Comparable {
        larger: String,
        smaller: String,
    },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::MissingFiber(i) => write!(f, "fiber {i} has no representative"),
            Violation::RepeatedFiber(i) => write!(f, "fiber {i} has two representatives"),
            Violation::OutsidePoset(e) => write!(f, "{e} is outside the poset"),
            Violation::Comparable { larger, smaller } => write!(f, "{larger} >= {smaller} + shift"),
        }
    }
}

/// Which translations identify two antichains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Translation {
    /// Multiples of the shift element only.
    Shift,
    /// Every translation of the ambient group preserving the poset.
    Full,
}

/// A poset with a free `Z`-action by a shift, having finitely many orbits.
pub trait ShiftedPoset: Sync {
    type Elem: Clone + Eq + Hash + Ord + Send + Sync + std::fmt::Display;

    fn fiber_count(&self) -> usize;
    /// The element `n` steps along fiber `fiber`.
    fn element(&self, fiber: usize, n: i64) -> Self::Elem;
    /// Inverse of [`ShiftedPoset::element`].
    fn locate(&self, e: &Self::Elem) -> Option<(usize, i64)>;
    fn leq(&self, a: &Self::Elem, b: &Self::Elem) -> bool;
    /// A monotone integer grading with `level(shift(e)) = level(e) + level_step()`.
    fn level(&self, e: &Self::Elem) -> i64;
    fn level_step(&self) -> i64;
    /// Translates of `set` whose shift-normal forms, taken together, depend only on the
    /// orbit of `set` under the full translation group.
    fn full_translates(&self, set: &[Self::Elem]) -> Vec<Vec<Self::Elem>>;
    /// An independent local criterion for membership, where one is known.
    fn local_check(&self, _set: &[Self::Elem]) -> Option<bool> {
        None
    }
}

/// One representative per fiber: `shifts[f]` steps along fiber `f`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AntichainRep {
    pub shifts: Vec<i64>,
}

impl AntichainRep {
    pub fn seed(fibers: usize) -> Self {
        AntichainRep {
            shifts: vec![0; fibers],
        }
    }

    pub fn elements<P: ShiftedPoset>(&self, poset: &P) -> Vec<P::Elem> {
        self.shifts
            .iter()
            .enumerate()
            .map(|(f, &n)| poset.element(f, n))
            .collect()
    }

    pub fn element<P: ShiftedPoset>(&self, poset: &P, fiber: usize) -> P::Elem {
        poset.element(fiber, self.shifts[fiber])
    }

    /// Sorted elements; the comparison key of canonical forms.
    pub fn sorted_elements<P: ShiftedPoset>(&self, poset: &P) -> Vec<P::Elem> {
        let mut v = self.elements(poset);
        v.sort();
        v
    }

    fn normalized(mut self) -> Self {
        if let Some(&s0) = self.shifts.first() {
            for s in self.shifts.iter_mut() {
                *s -= s0;
            }
        }
        self
    }
}

/// Fiber-indexed poset over a graded group.
///
/// Either all of the group with its order and shift, or the preimage `q^{-1}(J)` of an
/// antichain `J` of `H = G / Zp` in a rank-two group `G`, with the order of `G` and the
/// shift `p`.
#[derive(Clone, Debug)]
pub struct FiberPoset {
    order: Arc<GradedDegreeGroup>,
    quotient: Quotient,
    bases: Vec<GroupElement>,
    index: HashMap<GroupElement, usize>,
    /// `None` for the whole group; translations stabilizing the base antichain otherwise.
    stabilizer: Option<Vec<GroupElement>>,
}

impl FiberPoset {
    /// The whole group. Requires the quotient by the shift to be finite.
    pub fn full(order: Arc<GradedDegreeGroup>) -> Result<Self, UpperSetError> {
        let (quotient, mut bases) = order.coset_reps_mod_shift()?;
        bases.sort_by(|a, b| order.theta(a).cmp(&order.theta(b)).then_with(|| a.cmp(b)));
        let index = bases
            .iter()
            .enumerate()
            .map(|(i, b)| (quotient.project(b), i))
            .collect();
        Ok(FiberPoset {
            order,
            quotient,
            bases,
            index,
            stabilizer: None,
        })
    }

    /// `q^{-1}(J)` for an antichain `J` of the quotient `H` described by `split`.
    pub fn preimage(
        order: Arc<GradedDegreeGroup>,
        split: &SignSplit,
        base: &[GroupElement],
    ) -> Self {
        let mut base = base.to_vec();
        base.sort_by(|a, b| {
            split
                .h
                .theta(a)
                .cmp(&split.h.theta(b))
                .then_with(|| a.cmp(b))
        });
        let bases: Vec<GroupElement> = base
            .iter()
            .map(|h| order.slab_lift(&split.quotient.lift(h)))
            .collect();
        let index = base
            .iter()
            .enumerate()
            .map(|(i, h)| (h.clone(), i))
            .collect();
        let hg = split.h.group();
        let set: HashSet<&GroupElement> = base.iter().collect();
        let mut stabilizer = Vec::new();
        for h in &base {
            let u = hg.sub(h, &base[0]);
            if base.iter().all(|x| set.contains(&hg.add(x, &u))) {
                stabilizer.push(split.quotient.lift(&u));
            }
        }
        FiberPoset {
            order,
            quotient: split.quotient.clone(),
            bases,
            index,
            stabilizer: Some(stabilizer),
        }
    }

    pub fn order(&self) -> &GradedDegreeGroup {
        &self.order
    }

    pub fn order_arc(&self) -> &Arc<GradedDegreeGroup> {
        &self.order
    }

    pub fn bases(&self) -> &[GroupElement] {
        &self.bases
    }

    pub fn is_full(&self) -> bool {
        self.stabilizer.is_none()
    }
}

impl ShiftedPoset for FiberPoset {
    type Elem = GroupElement;

    fn fiber_count(&self) -> usize {
        self.bases.len()
    }

    fn element(&self, fiber: usize, n: i64) -> GroupElement {
        self.order.shifted(&self.bases[fiber], n)
    }

    fn locate(&self, e: &GroupElement) -> Option<(usize, i64)> {
        if e.0.len() != self.order.group().dim() {
            return None;
        }
        let f = *self.index.get(&self.quotient.project(e))?;
        let n = self
            .order
            .shift_multiple(&self.order.sub(e, &self.bases[f]))?;
        Some((f, n))
    }

    fn leq(&self, a: &GroupElement, b: &GroupElement) -> bool {
        self.order.leq(a, b)
    }

    fn level(&self, e: &GroupElement) -> i64 {
        self.order.theta(e)
    }

    fn level_step(&self) -> i64 {
        self.order.theta(self.order.shift())
    }

    fn full_translates(&self, set: &[GroupElement]) -> Vec<Vec<GroupElement>> {
        let g = self.order.group();
        let translate = |t: &GroupElement| set.iter().map(|x| g.add(x, t)).collect::<Vec<_>>();
        match &self.stabilizer {
            Some(stab) => stab.iter().map(translate).collect(),
            None => {
                let lo = set.iter().map(|x| self.order.theta(x)).min().unwrap_or(0);
                set.iter()
                    .filter(|x| self.order.theta(x) == lo)
                    .map(|x| translate(&g.neg(x)))
                    .collect()
            }
        }
    }

    fn local_check(&self, set: &[GroupElement]) -> Option<bool> {
        if self.stabilizer.is_some() || self.order.shift() != self.order.p() {
            return None;
        }
        let members: HashSet<&GroupElement> = set.iter().collect();
        let ok = set.iter().all(|g| {
            self.order.degrees().iter().all(|x| {
                let y = self.order.add(g, x);
                members.contains(&y) || members.contains(&self.order.shifted(&y, -1))
            })
        });
        Some(ok)
    }
}

/// Antichain of the upper set generated by `gens`.
pub fn j_of_upper<P: ShiftedPoset>(
    poset: &P,
    gens: &[P::Elem],
) -> Result<AntichainRep, UpperSetError> {
    if gens.is_empty() {
        return Err(UpperSetError::TrivialUpperSet);
    }
    for g in gens {
        if poset.locate(g).is_none() {
            return Err(UpperSetError::NotInPoset(g.to_string()));
        }
    }
    let step = poset.level_step();
    let mut shifts = Vec::with_capacity(poset.fiber_count());
    for f in 0..poset.fiber_count() {
        let base_level = poset.level(&poset.element(f, 0));
        let mut best: Option<i64> = None;
        for g in gens {
            // least n with g <= element(f, n); levels give a starting point
            let mut n = num_integer::Integer::div_ceil(&(poset.level(g) - base_level), &step);
            let mut tries = 0;
            while !poset.leq(g, &poset.element(f, n)) {
                n += 1;
                tries += 1;
                if tries > 100_000 {
                    return Err(UpperSetError::InternalInvariantBroken(
                        "orbit is not cofinal".into(),
                    ));
                }
            }
            best = Some(best.map_or(n, |b: i64| b.min(n)));
        }
        shifts.push(best.expect("nonempty generators"));
    }
    Ok(AntichainRep { shifts })
}

/// Membership of `g` in the upper set determined by `j`.
pub fn i_contains<P: ShiftedPoset>(poset: &P, j: &AntichainRep, g: &P::Elem) -> bool {
    j.elements(poset).iter().any(|x| poset.leq(x, g))
}

/// Checks the antichain condition (no `a >= b + shift`) on an arbitrary finite set,
/// without requiring completeness.
pub fn antichain_violation<P: ShiftedPoset>(poset: &P, set: &[P::Elem]) -> Option<Violation> {
    let located: Vec<(usize, i64)> = match set.iter().map(|e| poset.locate(e).ok_or(e)).collect() {
        Ok(v) => v,
        Err(e) => return Some(Violation::OutsidePoset(e.to_string())),
    };
    for a in set {
        for (b, &(fb, nb)) in set.iter().zip(&located) {
            if poset.leq(&poset.element(fb, nb + 1), a) {
                return Some(Violation::Comparable {
                    larger: a.to_string(),
                    smaller: b.to_string(),
                });
            }
        }
    }
    None
}

/// Validates a complete-representative antichain, returning its shift vector.
pub fn is_antichain_rep<P: ShiftedPoset>(
    poset: &P,
    set: &[P::Elem],
) -> Result<AntichainRep, UpperSetError> {
    let m = poset.fiber_count();
    let mut shifts: Vec<Option<i64>> = vec![None; m];
    for e in set {
        let (f, n) = poset
            .locate(e)
            .ok_or_else(|| UpperSetError::Invalid(Violation::OutsidePoset(e.to_string())))?;
        if shifts[f].is_some() {
            return Err(UpperSetError::Invalid(Violation::RepeatedFiber(f)));
        }
        shifts[f] = Some(n);
    }
    let shifts: Vec<i64> = shifts
        .into_iter()
        .enumerate()
        .map(|(f, s)| s.ok_or(UpperSetError::Invalid(Violation::MissingFiber(f))))
        .collect::<Result<_, _>>()?;
    let verdict = antichain_violation(poset, set);
    if let Some(local) = poset.local_check(set) {
        if local != verdict.is_none() {
            return Err(UpperSetError::InternalInvariantBroken(
                "local and global antichain tests disagree".into(),
            ));
        }
    }
    match verdict {
        Some(v) => Err(UpperSetError::Invalid(v)),
        None => Ok(AntichainRep { shifts }),
    }
}

/// Fibers whose representative is minimal in the upper set of `j`.
pub fn mutable_fibers<P: ShiftedPoset>(poset: &P, j: &AntichainRep) -> Vec<usize> {
    let els = j.elements(poset);
    (0..els.len())
        .filter(|&a| !(0..els.len()).any(|b| b != a && poset.leq(&els[b], &els[a])))
        .collect()
}

/// Fibers whose representative is maximal in `j`; these admit the inverse mutation.
pub fn comutable_fibers<P: ShiftedPoset>(poset: &P, j: &AntichainRep) -> Vec<usize> {
    let els = j.elements(poset);
    (0..els.len())
        .filter(|&a| !(0..els.len()).any(|b| b != a && poset.leq(&els[a], &els[b])))
        .collect()
}

pub fn mutable_elements<P: ShiftedPoset>(poset: &P, j: &AntichainRep) -> Vec<P::Elem> {
    mutable_fibers(poset, j)
        .into_iter()
        .map(|f| j.element(poset, f))
        .collect()
}

fn fiber_in_rep<P: ShiftedPoset>(poset: &P, j: &AntichainRep, m: &P::Elem) -> Option<usize> {
    let (f, n) = poset.locate(m)?;
    (j.shifts[f] == n).then_some(f)
}

/// Removes the minimal element `m` from the upper set: `m` is replaced by `m + shift`.
pub fn mutate<P: ShiftedPoset>(
    poset: &P,
    j: &AntichainRep,
    m: &P::Elem,
) -> Result<AntichainRep, UpperSetError> {
    let f = fiber_in_rep(poset, j, m).ok_or_else(|| UpperSetError::NotMinimal(m.to_string()))?;
    if !mutable_fibers(poset, j).contains(&f) {
        return Err(UpperSetError::NotMinimal(m.to_string()));
    }
    Ok(step(j, f, 1))
}

/// Inverse of [`mutate`]: the maximal element `m` is replaced by `m - shift`.
pub fn mutate_inverse<P: ShiftedPoset>(
    poset: &P,
    j: &AntichainRep,
    m: &P::Elem,
) -> Result<AntichainRep, UpperSetError> {
    let f = fiber_in_rep(poset, j, m).ok_or_else(|| UpperSetError::NotMaximal(m.to_string()))?;
    if !comutable_fibers(poset, j).contains(&f) {
        return Err(UpperSetError::NotMaximal(m.to_string()));
    }
    Ok(step(j, f, -1))
}

fn step(j: &AntichainRep, f: usize, by: i64) -> AntichainRep {
    let mut out = j.clone();
    out.shifts[f] += by;
    out
}

/// Deterministic representative of the translation orbit of `j`.
pub fn canonical_form<P: ShiftedPoset>(
    poset: &P,
    j: &AntichainRep,
    mode: Translation,
) -> AntichainRep {
    match mode {
        Translation::Shift => j.clone().normalized(),
        Translation::Full => {
            let els = j.elements(poset);
            poset
                .full_translates(&els)
                .into_iter()
                .map(|set| {
                    let mut shifts = vec![0; poset.fiber_count()];
                    for e in &set {
                        let (f, n) = poset.locate(e).expect("translate stays in the poset");
                        shifts[f] = n;
                    }
                    let rep = AntichainRep { shifts }.normalized();
                    (rep.sorted_elements(poset), rep)
                })
                .min()
                .map(|(_, rep)| rep)
                .expect("at least one translate")
        }
    }
}

fn neighbors<P: ShiftedPoset>(poset: &P, j: &AntichainRep) -> Vec<(usize, i64, AntichainRep)> {
    let mut out: Vec<_> = mutable_fibers(poset, j)
        .into_iter()
        .map(|f| (f, 1, step(j, f, 1)))
        .collect();
    out.extend(
        comutable_fibers(poset, j)
            .into_iter()
            .map(|f| (f, -1, step(j, f, -1))),
    );
    out
}

#[derive(Clone, Debug)]
pub struct EnumerateOptions {
    pub mode: Translation,
    pub max_classes: usize,
    pub seed: Option<AntichainRep>,
    /// Visit neighbours in reverse order; the result must not depend on it.
    pub reverse: bool,
}

impl Default for EnumerateOptions {
    fn default() -> Self {
        EnumerateOptions {
            mode: Translation::Full,
            max_classes: 10_000,
            seed: None,
            reverse: false,
        }
    }
}

/// Every class of complete-representative antichains, each as its canonical form, sorted
/// by sorted element tuple.
pub fn enumerate_classes<P: ShiftedPoset>(
    poset: &P,
    opts: &EnumerateOptions,
) -> Result<Vec<AntichainRep>, UpperSetError> {
    let seed = opts
        .seed
        .clone()
        .unwrap_or_else(|| AntichainRep::seed(poset.fiber_count()));
    is_antichain_rep(poset, &seed.elements(poset))?;
    let start = canonical_form(poset, &seed, opts.mode);
    let mut seen: HashSet<AntichainRep> = HashSet::from([start.clone()]);
    let mut frontier = vec![start];
    while !frontier.is_empty() {
        let mut next_sets: Vec<Vec<AntichainRep>> = frontier
            .par_iter()
            .map(|j| {
                neighbors(poset, j)
                    .into_iter()
                    .map(|(_, _, n)| canonical_form(poset, &n, opts.mode))
                    .collect()
            })
            .collect();
        if opts.reverse {
            next_sets.reverse();
            for v in next_sets.iter_mut() {
                v.reverse();
            }
        }
        let mut next = Vec::new();
        for n in next_sets.into_iter().flatten() {
            if seen.insert(n.clone()) {
                if seen.len() > opts.max_classes {
                    return Err(UpperSetError::CeilingExceeded(opts.max_classes));
                }
                next.push(n);
            }
        }
        frontier = next;
    }
    let mut out: Vec<(Vec<P::Elem>, AntichainRep)> = seen
        .into_iter()
        .map(|j| (j.sorted_elements(poset), j))
        .collect();
    out.sort();
    Ok(out.into_iter().map(|(_, j)| j).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// The element moves up by one shift.
    Up,
    /// The element moves down by one shift.
    Down,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MutationStep<E> {
    /// The element of the antichain being moved.
    pub element: E,
    pub direction: Direction,
}

/// A shortest mutation sequence from `from` to a translate of `to`.
pub fn connect<P: ShiftedPoset>(
    poset: &P,
    from: &AntichainRep,
    to: &AntichainRep,
    mode: Translation,
    max_states: usize,
) -> Result<Vec<MutationStep<P::Elem>>, UpperSetError> {
    let target = canonical_form(poset, to, mode);
    let key = |j: &AntichainRep| canonical_form(poset, j, mode);
    let mut parent: HashMap<AntichainRep, Option<(AntichainRep, MutationStep<P::Elem>)>> =
        HashMap::new();
    let start_key = key(from);
    parent.insert(start_key.clone(), None);
    let mut queue = VecDeque::from([(from.clone(), start_key)]);
    while let Some((cur, cur_key)) = queue.pop_front() {
        if cur_key == target {
            let mut path = Vec::new();
            let mut k = cur_key;
            while let Some(Some((prev, st))) = parent.get(&k) {
                path.push(st.clone());
                k = key(prev);
            }
            path.reverse();
            return Ok(path);
        }
        for (f, by, n) in neighbors(poset, &cur) {
            let nk = key(&n);
            if parent.contains_key(&nk) {
                continue;
            }
            let st = MutationStep {
                element: cur.element(poset, f),
                direction: if by > 0 {
                    Direction::Up
                } else {
                    Direction::Down
                },
            };
            parent.insert(nk.clone(), Some((cur.clone(), st)));
            if parent.len() > max_states {
                return Err(UpperSetError::CeilingExceeded(max_states));
            }
            queue.push_back((n, nk));
        }
    }
    Err(UpperSetError::InternalInvariantBroken(
        "antichains are not mutation-connected".into(),
    ))
}

/// Applies a mutation sequence, validating each step.
pub fn replay<P: ShiftedPoset>(
    poset: &P,
    start: &AntichainRep,
    steps: &[MutationStep<P::Elem>],
) -> Result<AntichainRep, UpperSetError> {
    let mut cur = start.clone();
    for st in steps {
        cur = match st.direction {
            Direction::Up => mutate(poset, &cur, &st.element)?,
            Direction::Down => mutate_inverse(poset, &cur, &st.element)?,
        };
    }
    Ok(cur)
}
