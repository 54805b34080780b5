//! Classification of tilting bundles made of line bundles, for Picard rank one and two.

use std::collections::HashSet;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abgroup::GroupElement;
use crate::cuts::{self, CutError};
use crate::graded_order::{GradedDegreeGroup, OrderError, SignSplit};
use crate::quiver::{Arrow, QuiverPresentation};
use crate::stacky_geom::{CohomologyOracle, GeomError};
use crate::upper_sets::{
    self, enumerate_classes, is_antichain_rep, AntichainRep, EnumerateOptions, FiberPoset,
    Translation, UpperSetError,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TiltingError {
    #[error("the graded group has free rank {0}")]
    WrongRank(usize),
    #[error("the mutated set is not tilting: {0}")]
    NotTilting(String),
    #[error("quiver disagrees with the cut algebra: {0}")]
    QuiverMismatch(String),
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error(transparent)]
    UpperSet(#[from] UpperSetError),
    #[error(transparent)]
    Cut(#[from] CutError),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TiltingClass {
    pub rank: usize,
    /// For rank two, the antichain of `H = G / Zp` the class lies over.
    pub base: Option<Vec<GroupElement>>,
    /// Shift vector over the fibers of the poset the class lives in.
    pub rep: AntichainRep,
    /// Degrees of the line bundles, sorted.
    pub bundles: Vec<GroupElement>,
    pub quiver: QuiverPresentation,
    /// `hom[a][b]` is the dimension of `Hom(O(bundles[a]), O(bundles[b]))`.
    pub hom: Vec<Vec<u64>>,
}

/// The classes over one antichain of `H`.
#[derive(Debug, Clone)]
pub struct BaseGroup {
    pub base: Vec<GroupElement>,
    /// Classes in the requested translation mode.
    pub classes: Vec<TiltingClass>,
    /// Number of classes up to the shift by `p` alone.
    pub shift_count: usize,
    /// Number of classes when translations stabilizing the base are also allowed.
    pub full_count: usize,
}

#[derive(Debug, Clone)]
pub struct Rank2Classification {
    pub split: SignSplit,
    pub groups: Vec<BaseGroup>,
}

impl Rank2Classification {
    pub fn classes(&self) -> impl Iterator<Item = &TiltingClass> {
        self.groups.iter().flat_map(|g| g.classes.iter())
    }

    pub fn total(&self) -> usize {
        self.groups.iter().map(|g| g.classes.len()).sum()
    }

    pub fn full_total(&self) -> usize {
        self.groups.iter().map(|g| g.full_count).sum()
    }

    pub fn shift_total(&self) -> usize {
        self.groups.iter().map(|g| g.shift_count).sum()
    }
}

fn require_rank(ctx: &GradedDegreeGroup, r: usize) -> Result<(), TiltingError> {
    let got = ctx.group().free_rank();
    if got != r {
        return Err(TiltingError::WrongRank(got));
    }
    Ok(())
}

/// A pair violating presilting, reported as `(larger, smaller)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresiltingWitness {
    pub larger: GroupElement,
    pub smaller: GroupElement,
    /// `true` when the pair fails in `H` (rank two only).
    pub in_quotient: bool,
}

/// `Ok(())` when the line bundles of degrees `set` have no higher self-extensions, by
/// the order-theoretic criterion; otherwise a violating pair.
pub fn is_presilting(
    ctx: &GradedDegreeGroup,
    set: &[GroupElement],
) -> Result<Result<(), PresiltingWitness>, TiltingError> {
    let rank = ctx.group().free_rank();
    let split = match rank {
        1 => None,
        2 => Some(ctx.sign_split()?),
        r => return Err(TiltingError::WrongRank(r)),
    };
    if let Some(sp) = &split {
        for g in set {
            for h in set {
                let (qg, qh) = (sp.q(g), sp.q(h));
                if sp.h.leq(&sp.h.shifted(&qh, 1), &qg) {
                    return Ok(Err(PresiltingWitness {
                        larger: g.clone(),
                        smaller: h.clone(),
                        in_quotient: true,
                    }));
                }
            }
        }
    }
    for g in set {
        for h in set {
            if ctx.leq(&ctx.add(h, ctx.p()), g) {
                return Ok(Err(PresiltingWitness {
                    larger: g.clone(),
                    smaller: h.clone(),
                    in_quotient: false,
                }));
            }
        }
    }
    Ok(Ok(()))
}

fn sub_exponents(m: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for &e in m {
        out = out
            .into_iter()
            .flat_map(|p| (0..=e).map(move |k| [p.clone(), vec![k]].concat()))
            .collect();
    }
    out
}

/// The quiver of `End(+ O(g))` over `g in set`: an arrow for each monomial between two
/// members that does not factor through a third member. Commutativity relations are
/// added in rank one.
pub fn endomorphism_quiver(ctx: &GradedDegreeGroup, set: &[GroupElement]) -> QuiverPresentation {
    let members: HashSet<&GroupElement> = set.iter().collect();
    let mut arrows = Vec::new();
    for (a, g) in set.iter().enumerate() {
        for (b, h) in set.iter().enumerate() {
            if a == b {
                continue;
            }
            for m in ctx.monomials(&ctx.sub(h, g)) {
                let total: u32 = m.iter().sum();
                if total == 0 {
                    continue;
                }
                let factors = sub_exponents(&m).into_iter().any(|e1| {
                    let s: u32 = e1.iter().sum();
                    s > 0 && s < total && members.contains(&ctx.add(g, &ctx.degree_of(&e1)))
                });
                if !factors {
                    arrows.push(Arrow {
                        source: a,
                        target: b,
                        label: ctx.monomial_label(&m),
                        exponents: m,
                    });
                }
            }
        }
    }
    arrows.sort_by(|x, y| (x.source, x.target, &x.label).cmp(&(y.source, y.target, &y.label)));
    let mut q = QuiverPresentation {
        vertices: set.iter().map(|g| g.0.clone()).collect(),
        arrows,
        relations: vec![],
    };
    if ctx.group().free_rank() == 1 {
        q.add_commutativity_relations();
    }
    q
}

fn hom_matrix(ctx: &GradedDegreeGroup, set: &[GroupElement]) -> Vec<Vec<u64>> {
    set.iter()
        .map(|g| set.iter().map(|h| ctx.hom_dim(&ctx.sub(h, g))).collect())
        .collect()
}

fn make_class(
    ctx: &GradedDegreeGroup,
    poset: &FiberPoset,
    rep: AntichainRep,
    base: Option<Vec<GroupElement>>,
) -> TiltingClass {
    let bundles = rep.sorted_elements(poset);
    TiltingClass {
        rank: ctx.group().free_rank(),
        base,
        quiver: endomorphism_quiver(ctx, &bundles),
        hom: hom_matrix(ctx, &bundles),
        rep,
        bundles,
    }
}

/// Checks that the quiver of a rank-one class is the cut algebra's quiver, arrow for
/// arrow, under the correspondence with cuts.
pub fn check_against_cut(
    corr: &cuts::CutCorrespondence,
    ctx: &GradedDegreeGroup,
    poset: &FiberPoset,
    class: &TiltingClass,
) -> Result<(), TiltingError> {
    let cut = cuts::cut_of_antichain(corr, poset, &class.rep)?;
    let alg = cuts::algebra_presentation(&corr.lattice, &cut, ctx.names())?;
    let vertex = |g: &Vec<i64>| corr.vertex(&GroupElement(g.clone()));
    let mut ours: Vec<(usize, usize, String)> = class
        .quiver
        .arrows
        .iter()
        .map(|a| {
            (
                vertex(&class.quiver.vertices[a.source]),
                vertex(&class.quiver.vertices[a.target]),
                a.label.clone(),
            )
        })
        .collect();
    let mut theirs: Vec<(usize, usize, String)> = alg
        .arrows
        .iter()
        .map(|a| (a.source, a.target, a.label.clone()))
        .collect();
    ours.sort();
    theirs.sort();
    if ours != theirs {
        return Err(TiltingError::QuiverMismatch(format!(
            "{} arrows against {}",
            ours.len(),
            theirs.len()
        )));
    }
    if class.quiver.relations.len() != alg.relations.len() {
        return Err(TiltingError::QuiverMismatch(
            "relation counts differ".into(),
        ));
    }
    Ok(())
}

pub fn rank1_poset(ctx: &Arc<GradedDegreeGroup>) -> Result<FiberPoset, TiltingError> {
    require_rank(ctx, 1)?;
    Ok(FiberPoset::full(ctx.clone())?)
}

/// All tilting classes of a rank-one graded group, each checked against the cut algebra.
pub fn classify_rank1(
    ctx: &Arc<GradedDegreeGroup>,
    mode: Translation,
    max_classes: usize,
) -> Result<Vec<TiltingClass>, TiltingError> {
    let poset = rank1_poset(ctx)?;
    let opts = EnumerateOptions {
        mode,
        max_classes,
        ..Default::default()
    };
    let reps = enumerate_classes(&poset, &opts)?;
    let corr = cuts::data_of_group(ctx)?;
    reps.into_par_iter()
        .map(|rep| {
            let class = make_class(ctx, &poset, rep, None);
            check_against_cut(&corr, ctx, &poset, &class)?;
            Ok(class)
        })
        .collect()
}

/// `q^{-1}(base)` as a poset, for a rank-two group and its sign split.
pub fn rank2_poset(
    ctx: &Arc<GradedDegreeGroup>,
    split: &SignSplit,
    base: &[GroupElement],
) -> FiberPoset {
    FiberPoset::preimage(ctx.clone(), split, base)
}

/// All `d`-tilting classes of a rank-two graded group, grouped by the antichain of `H`
/// they lie over (bases are taken up to all translations of `H`). Over a fixed base,
/// `mode` decides whether translations stabilizing the base identify classes.
pub fn classify_rank2(
    ctx: &Arc<GradedDegreeGroup>,
    mode: Translation,
    max_classes: usize,
) -> Result<Rank2Classification, TiltingError> {
    require_rank(ctx, 2)?;
    let split = ctx.sign_split()?;
    let h = Arc::new(split.h.clone());
    let h_poset = FiberPoset::full(h)?;
    let outer = EnumerateOptions {
        mode: Translation::Full,
        max_classes,
        ..Default::default()
    };
    let bases = enumerate_classes(&h_poset, &outer)?;
    let groups = bases
        .into_par_iter()
        .map(|j| {
            let base = j.sorted_elements(&h_poset);
            let poset = rank2_poset(ctx, &split, &base);
            let run = |mode| {
                enumerate_classes(
                    &poset,
                    &EnumerateOptions {
                        mode,
                        max_classes,
                        ..Default::default()
                    },
                )
            };
            let shifted = run(Translation::Shift)?;
            let full = run(Translation::Full)?;
            let (shift_count, full_count) = (shifted.len(), full.len());
            let reps = match mode {
                Translation::Shift => shifted,
                Translation::Full => full,
            };
            let classes = reps
                .into_iter()
                .map(|rep| {
                    let class = make_class(ctx, &poset, rep, Some(base.clone()));
                    if let Err(w) = is_presilting(ctx, &class.bundles)? {
                        return Err(TiltingError::NotTilting(format!(
                            "{} >= {} + shift",
                            w.larger, w.smaller
                        )));
                    }
                    Ok(class)
                })
                .collect::<Result<Vec<_>, TiltingError>>()?;
            Ok(BaseGroup {
                base,
                classes,
                shift_count,
                full_count,
            })
        })
        .collect::<Result<Vec<_>, TiltingError>>()?;
    Ok(Rank2Classification { split, groups })
}

/// The poset a class lives in.
pub fn poset_of(
    ctx: &Arc<GradedDegreeGroup>,
    class: &TiltingClass,
) -> Result<FiberPoset, TiltingError> {
    match &class.base {
        None => rank1_poset(ctx),
        Some(base) => {
            require_rank(ctx, 2)?;
            let split = ctx.sign_split()?;
            Ok(rank2_poset(ctx, &split, base))
        }
    }
}

/// The APR mutation at a minimal member `m`: `O(m)` is replaced by `O(m + p)`.
pub fn apr_mutate(
    ctx: &Arc<GradedDegreeGroup>,
    class: &TiltingClass,
    m: &GroupElement,
) -> Result<TiltingClass, TiltingError> {
    let poset = poset_of(ctx, class)?;
    let rep = upper_sets::mutate(&poset, &class.rep, m)?;
    let els = rep.elements(&poset);
    is_antichain_rep(&poset, &els).map_err(|e| TiltingError::NotTilting(e.to_string()))?;
    if let Err(w) = is_presilting(ctx, &els)? {
        return Err(TiltingError::NotTilting(format!(
            "{} >= {} + shift",
            w.larger, w.smaller
        )));
    }
    Ok(make_class(ctx, &poset, rep, class.base.clone()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Component {
    Preprojective,
    Preinjective,
}

/// Which side of the upper set of `j` the line bundle `O(g)` falls on.
pub fn component_of(poset: &FiberPoset, j: &AntichainRep, g: &GroupElement) -> Component {
    if upper_sets::i_contains(poset, j, g) {
        Component::Preprojective
    } else {
        Component::Preinjective
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtCheck {
    pub from: GroupElement,
    pub to: GroupElement,
    pub degree: usize,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<ExtCheck>,
    pub failures: Vec<ExtCheck>,
    pub generation: String,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Computes `Ext^r(O(g), O(h))` for every ordered pair of members and `1 <= r <= d`.
/// Generation of the derived category is not checked.
pub fn verify_class(
    oracle: &CohomologyOracle,
    bundles: &[GroupElement],
) -> Result<VerifyReport, TiltingError> {
    let d = oracle.polytope().dim();
    let triples: Vec<(usize, usize, usize)> = (0..bundles.len())
        .flat_map(|a| (0..bundles.len()).flat_map(move |b| (1..=d).map(move |r| (a, b, r))))
        .collect();
    let checks = triples
        .into_par_iter()
        .map(|(a, b, r)| {
            let dim = oracle.ext_dim(&bundles[a], &bundles[b], r)?;
            Ok(ExtCheck {
                from: bundles[a].clone(),
                to: bundles[b].clone(),
                degree: r,
                dim,
            })
        })
        .collect::<Result<Vec<_>, GeomError>>()?;
    let failures = checks.iter().filter(|c| c.dim != 0).cloned().collect();
    Ok(VerifyReport {
        checks,
        failures,
        generation: "by theorem".into(),
    })
}
