//! Cuts of the quiver on `L/B` and their detectors.
//!
//! `L` is the root lattice `{v in Z^{d+1} : sum v = 0}` with `alpha_i = e_i - e_{i-1}`
//! (indices mod `d+1`). Internally `L` is identified with `Z^d` through the basis
//! `alpha_1..alpha_d`; then `alpha_0 = -(alpha_1 + ... + alpha_d)`.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abgroup::{self, CombinationSolver, FgAbelianGroup, GroupElement};
use crate::graded_order::{GradedDegreeGroup, OrderError};
use crate::quiver::{Arrow, QuiverPresentation};
use crate::upper_sets::{AntichainRep, ShiftedPoset};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CutError {
    #[error("expected vectors of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{0:?} does not lie in the root lattice (coordinates must sum to zero)")]
    NotInLattice(Vec<i64>),
    #[error("the subgroup has infinite index")]
    NotCofinite,
    #[error("arrow subset is not a cut: {0}")]
    NotACut(String),
    #[error("map is not a cut detector: {0}")]
    NotADetector(String),
    #[error("the cut is not bounding")]
    NotBounding,
    #[error("inadmissible type: {0}")]
    Inadmissible(Inadmissibility),
    #[error("the graded group has free rank {0}, expected 1")]
    NotRankOne(usize),
    #[error("internal invariant broken: {0}")]
    InternalInvariantBroken(String),
    #[error(transparent)]
    Order(#[from] OrderError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Inadmissibility {
    WrongLength {
        expected: usize,
        got: usize,
    },
    Negative {
        index: usize,
    },
    SumMismatch {
        sum: i64,
        m: usize,
    },
    /// `generator` lies in `B`, but the paired sum `value` is not divisible by `m`.
    Divisibility {
        generator: Vec<i64>,
        value: i64,
        m: usize,
    },
}

impl std::fmt::Display for Inadmissibility {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Inadmissibility::WrongLength { expected, got } => {
                write!(f, "expected {expected} entries, got {got}")
            }
            Inadmissibility::Negative { index } => write!(f, "entry {index} is negative"),
            Inadmissibility::SumMismatch { sum, m } => {
                write!(f, "sum mismatch: entries sum to {sum}, expected {m}")
            }
            Inadmissibility::Divisibility {
                generator,
                value,
                m,
            } => {
                write!(f, "divisibility fails for generator {generator:?}: {value} is not a multiple of {m}")
            }
        }
    }
}

/// `L/B` for a cofinite subgroup `B`, together with the quiver on it.
#[derive(Clone, Debug)]
pub struct LatticeQuotient {
    d: usize,
    generators: Vec<Vec<i64>>,
    coords: Vec<Vec<i64>>,
    group: FgAbelianGroup,
    vertices: Vec<GroupElement>,
    index: HashMap<GroupElement, usize>,
    alpha: Vec<GroupElement>,
    targets: Vec<usize>,
}

/// `alpha`-coordinates of a vector of `L`.
pub fn alpha_coords(v: &[i64]) -> Vec<i64> {
    let d = v.len() - 1;
    (1..=d).map(|i| v[i..].iter().sum()).collect()
}

/// The vector of `L` with the given `alpha_1..alpha_d` coordinates.
pub fn from_alpha_coords(c: &[i64]) -> Vec<i64> {
    let d = c.len();
    let get = |i: usize| if i >= 1 && i <= d { c[i - 1] } else { 0 };
    (0..=d).map(|i| get(i) - get(i + 1)).collect()
}

impl LatticeQuotient {
    /// `B` given by generators written in `Z^{d+1}`.
    pub fn new(d: usize, generators: &[Vec<i64>]) -> Result<Self, CutError> {
        for g in generators {
            if g.len() != d + 1 {
                return Err(CutError::DimensionMismatch {
                    expected: d + 1,
                    got: g.len(),
                });
            }
            if g.iter().sum::<i64>() != 0 {
                return Err(CutError::NotInLattice(g.clone()));
            }
        }
        let coords: Vec<Vec<i64>> = generators.iter().map(|g| alpha_coords(g)).collect();
        let group =
            FgAbelianGroup::from_presentation(d, &coords).expect("well-formed presentation");
        let vertices = group
            .enumerate_finite()
            .map_err(|_| CutError::NotCofinite)?;
        let index: HashMap<GroupElement, usize> = vertices
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, v)| (v, i))
            .collect();
        let mut alpha = vec![group.canonicalize(&vec![-1; d]).expect("dimension")];
        for i in 0..d {
            let mut e = vec![0; d];
            e[i] = 1;
            alpha.push(group.canonicalize(&e).expect("dimension"));
        }
        let targets = vertices
            .iter()
            .flat_map(|v| {
                alpha
                    .iter()
                    .map(|a| index[&group.add(v, a)])
                    .collect::<Vec<_>>()
            })
            .collect();
        Ok(LatticeQuotient {
            d,
            generators: generators.to_vec(),
            coords,
            group,
            vertices,
            index,
            alpha,
            targets,
        })
    }

    /// `B` given by generators in `alpha_1..alpha_d` coordinates.
    pub fn from_alpha(d: usize, generators: &[Vec<i64>]) -> Result<Self, CutError> {
        for g in generators {
            if g.len() != d {
                return Err(CutError::DimensionMismatch {
                    expected: d,
                    got: g.len(),
                });
            }
        }
        let gens: Vec<Vec<i64>> = generators.iter().map(|c| from_alpha_coords(c)).collect();
        Self::new(d, &gens)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.vertices.len()
    }

    pub fn generators(&self) -> &[Vec<i64>] {
        &self.generators
    }

    pub fn group(&self) -> &FgAbelianGroup {
        &self.group
    }

    pub fn vertices(&self) -> &[GroupElement] {
        &self.vertices
    }

    pub fn vertex_index(&self, v: &GroupElement) -> Option<usize> {
        self.index.get(v).copied()
    }

    /// Image of `alpha_i` in `L/B`.
    pub fn alpha(&self, i: usize) -> &GroupElement {
        &self.alpha[i]
    }

    pub fn n_arrows(&self) -> usize {
        self.m() * (self.d + 1)
    }

    /// Arrow index of `x + B -> x + alpha_i + B`.
    pub fn arrow(&self, vertex: usize, ty: usize) -> usize {
        vertex * (self.d + 1) + ty
    }

    /// `(source, target, type)` of an arrow.
    pub fn arrow_ends(&self, a: usize) -> (usize, usize, usize) {
        (a / (self.d + 1), self.targets[a], a % (self.d + 1))
    }

    /// The vertex of `L/B` containing a vector of `alpha`-coordinates.
    pub fn vertex_of_alpha(&self, c: &[i64]) -> usize {
        self.index[&self.group.canonicalize(c).expect("dimension")]
    }

    /// Elementary cycles through each vertex, one per ordering of the types.
    pub fn elementary_cycles(&self) -> Vec<Vec<usize>> {
        let mut perms: Vec<Vec<usize>> = vec![vec![]];
        for _ in 0..=self.d {
            let mut next = Vec::new();
            for p in &perms {
                for t in (0..=self.d).filter(|t| !p.contains(t)) {
                    let mut q = p.clone();
                    q.push(t);
                    next.push(q);
                }
            }
            perms = next;
        }
        let mut out = Vec::new();
        for v in 0..self.m() {
            for p in &perms {
                let mut cur = v;
                let mut cyc = Vec::with_capacity(p.len());
                for &t in p {
                    let a = self.arrow(cur, t);
                    cyc.push(a);
                    cur = self.targets[a];
                }
                out.push(cyc);
            }
        }
        out
    }

    /// Checks the two conditions characterizing types of cuts.
    pub fn is_admissible_type(&self, gamma: &[i64]) -> Result<(), Inadmissibility> {
        if gamma.len() != self.d + 1 {
            return Err(Inadmissibility::WrongLength {
                expected: self.d + 1,
                got: gamma.len(),
            });
        }
        if let Some(index) = gamma.iter().position(|&g| g < 0) {
            return Err(Inadmissibility::Negative { index });
        }
        let m = self.m();
        let sum: i64 = gamma.iter().sum();
        if sum != m as i64 {
            return Err(Inadmissibility::SumMismatch { sum, m });
        }
        for (g, c) in self.generators.iter().zip(&self.coords) {
            let value: i64 = c.iter().zip(&gamma[1..]).map(|(x, y)| x * y).sum();
            if value.rem_euclid(m as i64) != 0 {
                return Err(Inadmissibility::Divisibility {
                    generator: g.clone(),
                    value,
                    m,
                });
            }
        }
        Ok(())
    }
}

/// A set of arrows, as a membership vector indexed by arrow.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cut(pub Vec<bool>);

impl Cut {
    pub fn type_of(&self, lq: &LatticeQuotient) -> Vec<i64> {
        let mut gamma = vec![0; lq.d + 1];
        for (a, &c) in self.0.iter().enumerate() {
            if c {
                gamma[a % (lq.d + 1)] += 1;
            }
        }
        gamma
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CutDetector {
    pub gamma: Vec<i64>,
    /// Value at each vertex of `L/B`, in vertex order.
    pub values: Vec<i64>,
}

/// The detector `f_C` of a cut, by summing increments along a spanning tree and then
/// checking every arrow.
pub fn detector_from_cut(lq: &LatticeQuotient, cut: &Cut) -> Result<CutDetector, CutError> {
    if cut.0.len() != lq.n_arrows() {
        return Err(CutError::DimensionMismatch {
            expected: lq.n_arrows(),
            got: cut.0.len(),
        });
    }
    let gamma = cut.type_of(lq);
    let m = lq.m() as i64;
    if gamma.iter().sum::<i64>() != m {
        return Err(CutError::NotACut(format!(
            "type {gamma:?} does not sum to {m}"
        )));
    }
    let inc = |a: usize| gamma[a % (lq.d + 1)] - if cut.0[a] { m } else { 0 };
    let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); lq.m()];
    for a in 0..lq.n_arrows() {
        incoming[lq.targets[a]].push(a);
    }
    let mut values: Vec<Option<i64>> = vec![None; lq.m()];
    values[0] = Some(0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        let fv = values[v].expect("visited");
        for t in 0..=lq.d {
            let a = lq.arrow(v, t);
            let w = lq.targets[a];
            if values[w].is_none() {
                values[w] = Some(fv + inc(a));
                queue.push_back(w);
            }
        }
        for &a in &incoming[v] {
            let u = a / (lq.d + 1);
            if values[u].is_none() {
                values[u] = Some(fv - inc(a));
                queue.push_back(u);
            }
        }
    }
    let values: Vec<i64> = values
        .into_iter()
        .map(|v| v.expect("L/B is connected"))
        .collect();
    for a in 0..lq.n_arrows() {
        let (s, t, _) = lq.arrow_ends(a);
        if values[t] - values[s] != inc(a) {
            return Err(CutError::NotACut(format!(
                "increments disagree around arrow {a}"
            )));
        }
    }
    Ok(CutDetector { gamma, values })
}

/// The cut `C_f`: arrows along which `f` drops by `m - gamma_i`.
pub fn cut_from_detector(lq: &LatticeQuotient, f: &CutDetector) -> Result<Cut, CutError> {
    if f.values.len() != lq.m() || f.gamma.len() != lq.d + 1 {
        return Err(CutError::NotADetector("wrong table size".into()));
    }
    if f.values[0] != 0 {
        return Err(CutError::NotADetector("value at 0 is not 0".into()));
    }
    let m = lq.m() as i64;
    let mut cut = vec![false; lq.n_arrows()];
    for (a, slot) in cut.iter_mut().enumerate() {
        let (s, t, ty) = lq.arrow_ends(a);
        let diff = f.values[t] - f.values[s];
        if diff == f.gamma[ty] - m {
            *slot = true;
        } else if diff != f.gamma[ty] {
            return Err(CutError::NotADetector(format!(
                "increment {diff} along arrow {a}"
            )));
        }
    }
    Ok(Cut(cut))
}

/// Whether removing the cut leaves an acyclic quiver. Also confirms that this agrees
/// with strict positivity of the type.
pub fn is_bounding(lq: &LatticeQuotient, cut: &Cut) -> Result<bool, CutError> {
    let mut indeg = vec![0usize; lq.m()];
    for a in 0..lq.n_arrows() {
        if !cut.0[a] {
            indeg[lq.targets[a]] += 1;
        }
    }
    let mut queue: VecDeque<usize> = (0..lq.m()).filter(|&v| indeg[v] == 0).collect();
    let mut seen = 0;
    while let Some(v) = queue.pop_front() {
        seen += 1;
        for t in 0..=lq.d {
            let a = lq.arrow(v, t);
            if cut.0[a] {
                continue;
            }
            let w = lq.targets[a];
            indeg[w] -= 1;
            if indeg[w] == 0 {
                queue.push_back(w);
            }
        }
    }
    let acyclic = seen == lq.m();
    let positive = cut.type_of(lq).iter().all(|&g| g > 0);
    if acyclic != positive {
        return Err(CutError::InternalInvariantBroken(
            "acyclicity disagrees with type positivity".into(),
        ));
    }
    Ok(acyclic)
}

/// Homomorphisms from a rank-one graded group to `Z` and to `L/B` realizing the
/// correspondence between its antichains and cuts of type `gamma`.
#[derive(Clone, Debug)]
pub struct CutCorrespondence {
    pub lattice: LatticeQuotient,
    pub gamma: Vec<i64>,
    solver: CombinationSolver,
    group: FgAbelianGroup,
}

impl CutCorrespondence {
    fn new(
        lattice: LatticeQuotient,
        gamma: Vec<i64>,
        group: &FgAbelianGroup,
        degrees: &[GroupElement],
    ) -> Self {
        CutCorrespondence {
            lattice,
            gamma,
            solver: CombinationSolver::new(group, degrees),
            group: group.clone(),
        }
    }

    fn coefficients(&self, g: &GroupElement) -> Vec<i64> {
        self.solver.solve(g).expect("degrees generate the group")
    }

    /// The integer grading sending the `i`-th degree to `gamma_i`.
    pub fn pi(&self, g: &GroupElement) -> i64 {
        self.coefficients(g)
            .iter()
            .zip(&self.gamma)
            .map(|(a, b)| a * b)
            .sum()
    }

    /// The vertex of `L/B` corresponding to the coset of `g` modulo `p`.
    pub fn vertex(&self, g: &GroupElement) -> usize {
        let a = self.coefficients(g);
        let c: Vec<i64> = (1..a.len()).map(|k| a[k] - a[0]).collect();
        self.lattice.vertex_of_alpha(&c)
    }

    pub fn group(&self) -> &FgAbelianGroup {
        &self.group
    }
}

/// `G(B, gamma)`: the image of `e_i -> (gamma_i, alpha_i + B)` in `Z + L/B`.
#[derive(Clone, Debug)]
pub struct CutGroup {
    pub group: FgAbelianGroup,
    pub degrees: Vec<GroupElement>,
    /// The graded structure; `None` when some degree vanishes.
    pub graded: Option<GradedDegreeGroup>,
    pub correspondence: CutCorrespondence,
}

pub fn group_of(lq: &LatticeQuotient, gamma: &[i64]) -> Result<CutGroup, CutError> {
    lq.is_admissible_type(gamma)
        .map_err(CutError::Inadmissible)?;
    let d = lq.d;
    let tors = lq.group.torsion_orders().to_vec();
    // L/B is finite, so its canonical coordinates are all torsion; put Z last
    let images: Vec<Vec<i64>> = (0..=d)
        .map(|i| {
            let mut row = lq.alpha[i].0.clone();
            row.push(gamma[i]);
            row
        })
        .collect();
    let target = FgAbelianGroup::from_invariants(tors, 1).expect("divisibility chain");
    let imgs: Vec<GroupElement> = images.into_iter().map(|r| target.reduce(r)).collect();
    let kernel = abgroup::relation_lattice(&target, &imgs);
    let group = FgAbelianGroup::from_presentation(d + 1, &kernel).expect("presentation");
    let degrees: Vec<GroupElement> = (0..=d).map(|i| group.generator(i)).collect();
    let graded = if gamma.iter().all(|&g| g > 0) {
        Some(GradedDegreeGroup::build(group.clone(), degrees.clone())?)
    } else {
        None
    };
    let correspondence = CutCorrespondence::new(lq.clone(), gamma.to_vec(), &group, &degrees);
    Ok(CutGroup {
        group,
        degrees,
        graded,
        correspondence,
    })
}

/// `(B, gamma)` from a rank-one graded group: `B` is the kernel of
/// `L -> G/Zp, alpha_i -> x_i`, and `gamma_i = (m/m') * pi'(x_i)`.
pub fn data_of_group(ctx: &GradedDegreeGroup) -> Result<CutCorrespondence, CutError> {
    let g = ctx.group();
    if g.free_rank() != 1 {
        return Err(CutError::NotRankOne(g.free_rank()));
    }
    let n = ctx.n_degrees();
    let d = n - 1;
    let q = g.quotient_by(std::slice::from_ref(ctx.p()));
    let images: Vec<GroupElement> = (1..n).map(|k| q.project(&ctx.degrees()[k])).collect();
    let b_alpha = abgroup::relation_lattice(q.group(), &images);
    let lattice = LatticeQuotient::from_alpha(d, &b_alpha)?;
    let m = lattice.m() as i64;
    let m_prime = ctx.theta(ctx.p());
    if m % m_prime != 0 {
        return Err(CutError::InternalInvariantBroken(format!(
            "{m} is not a multiple of {m_prime}"
        )));
    }
    let gamma: Vec<i64> = (0..n)
        .map(|i| m / m_prime * ctx.theta_of_degree(i))
        .collect();
    lattice
        .is_admissible_type(&gamma)
        .map_err(|e| CutError::InternalInvariantBroken(e.to_string()))?;
    Ok(CutCorrespondence::new(lattice, gamma, g, ctx.degrees()))
}

/// The cut `C(J)` of a complete-representative antichain of the whole group.
pub fn cut_of_antichain<P>(
    corr: &CutCorrespondence,
    poset: &P,
    j: &AntichainRep,
) -> Result<Cut, CutError>
where
    P: ShiftedPoset<Elem = GroupElement>,
{
    let els = j.elements(poset);
    let m = corr.lattice.m() as i64;
    let zero = els
        .iter()
        .find(|g| corr.vertex(g) == 0)
        .ok_or_else(|| CutError::InternalInvariantBroken("no representative over 0".into()))?;
    let n = corr.pi(zero) / m;
    let mut values = vec![0; corr.lattice.m()];
    for g in &els {
        values[corr.vertex(g)] = corr.pi(g) - n * m;
    }
    let det = CutDetector {
        gamma: corr.gamma.clone(),
        values,
    };
    cut_from_detector(&corr.lattice, &det)
}

/// The quiver of `A(B, C)`: all arrows outside `C`, with commutativity relations.
pub fn algebra_presentation(
    lq: &LatticeQuotient,
    cut: &Cut,
    names: &[String],
) -> Result<QuiverPresentation, CutError> {
    if !is_bounding(lq, cut)? {
        return Err(CutError::NotBounding);
    }
    let mut arrows = Vec::new();
    for a in 0..lq.n_arrows() {
        if cut.0[a] {
            continue;
        }
        let (s, t, ty) = lq.arrow_ends(a);
        let mut exponents = vec![0; lq.d + 1];
        exponents[ty] = 1;
        arrows.push(Arrow {
            source: s,
            target: t,
            label: names[ty].clone(),
            exponents,
        });
    }
    let mut q = QuiverPresentation {
        vertices: lq.vertices.iter().map(|v| v.0.clone()).collect(),
        arrows,
        relations: vec![],
    };
    q.add_commutativity_relations();
    Ok(q)
}
