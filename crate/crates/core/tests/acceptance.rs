//! End-to-end acceptance checks. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line, in order.

mod common;

use std::collections::{BTreeSet, HashSet};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use common::*;
use stacktilt::abgroup::GroupElement;
use stacktilt::cuts::{self, LatticeQuotient};
use stacktilt::graded_order::GradedDegreeGroup;
use stacktilt::stacky_geom::{CohomologyOracle, Field};
use stacktilt::tilting::{self, TiltingClass};
use stacktilt::upper_sets::{
    self, canonical_form, enumerate_classes, EnumerateOptions, FiberPoset, Translation,
};

// Wall-clock budgets, one per criterion.
const BUDGET_SECS: [f64; 10] = [1.0, 1.0, 1.0, 5.0, 5.0, 10.0, 60.0, 120.0, 120.0, 120.0];
const MAX_CLASSES: usize = 10_000;
const SERRE_SAMPLES: usize = 30;
const VANCOH_SAMPLES: usize = 40;
const ORDER_SAMPLES: usize = 60;
const WINDOW: i64 = 4;
const CUT_MAX_INDEX: i64 = 8;
const SEED: u64 = 0x5eed_7117;

/// Criteria that cannot hold as stated, with what the computation gives instead. The
/// harness still prints FAIL for them, and insists the computed value is unchanged.
const KNOWN_UNATTAINABLE: &[(usize, &str)] = &[(
    4,
    "P1xP1 has 2 + 5 classes over its two bases, not 2 + 4: {0,(1,1),(1,2),(2,1)} is the \
     dual of the listed {(0,1),(1,0),(1,1),(2,2)} and is tilting as well",
)];

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn shape(
    bundles: &[GroupElement],
    ctx: &GradedDegreeGroup,
    origin: &GroupElement,
) -> BTreeSet<Vec<i64>> {
    bundles.iter().map(|b| ctx.sub(b, origin).0).collect()
}

/// Whether some translate of `target` is the set `bundles`.
fn is_translate(
    ctx: &GradedDegreeGroup,
    bundles: &[GroupElement],
    target: &[GroupElement],
) -> bool {
    let want: BTreeSet<Vec<i64>> = target.iter().map(|t| ctx.sub(t, &target[0]).0).collect();
    bundles.iter().any(|b| shape(bundles, ctx, b) == want)
}

fn criterion_1() -> Outcome {
    for d in 1..=4usize {
        let ctx = projective_space(d);
        let classes = tilting::classify_rank1(&ctx, Translation::Full, MAX_CLASSES).map_err(err)?;
        ensure(classes.len() == 1, || {
            format!("P^{d}: {} classes", classes.len())
        })?;
        let c = &classes[0];
        let want: Vec<GroupElement> = (0..=d as i64).map(|k| el(&[k])).collect();
        ensure(c.bundles == want, || {
            format!("P^{d}: bundles {:?}", c.bundles)
        })?;
        let q = &c.quiver;
        ensure(q.vertices.len() == d + 1, || {
            format!("P^{d}: {} vertices", q.vertices.len())
        })?;
        for k in 0..d as i64 {
            let labels: BTreeSet<&str> = q
                .arrows
                .iter()
                .filter(|a| q.vertices[a.source][0] == k && q.vertices[a.target][0] == k + 1)
                .map(|a| a.label.as_str())
                .collect();
            ensure(labels.len() == d + 1, || {
                format!("P^{d}: {} arrows at step {k}", labels.len())
            })?;
        }
        ensure(q.arrows.len() == d * (d + 1), || {
            format!("P^{d}: {} arrows in total", q.arrows.len())
        })?;
    }
    Ok("P^1..P^4 each have one class O..O(d) with the Beilinson quiver".into())
}

fn criterion_2() -> Outcome {
    let ctx = weighted(&[2, 3]);
    let classes = tilting::classify_rank1(&ctx, Translation::Full, MAX_CLASSES).map_err(err)?;
    ensure(classes.len() == 2, || format!("{} classes", classes.len()))?;
    let ints = |v: &[i64]| v.iter().map(|&x| el(&[x])).collect::<Vec<_>>();
    let first = classes
        .iter()
        .find(|c| c.bundles == ints(&[0, 1, 2, 3, 4]))
        .ok_or("no class {0,..,4}")?;
    let arrows: Vec<(String, String, String)> = first.quiver.arrow_multiset();
    let want: Vec<(String, String, String)> = [
        ("0", "2", "x"),
        ("0", "3", "y"),
        ("1", "3", "x"),
        ("1", "4", "y"),
        ("2", "4", "x"),
    ]
    .iter()
    .map(|(s, t, l)| (format!("({s})"), format!("({t})"), l.to_string()))
    .collect();
    ensure(arrows == want, || format!("arrows {arrows:?}"))?;
    let second = classes
        .iter()
        .find(|c| c.bundles != first.bundles)
        .ok_or("one class only")?;
    ensure(
        is_translate(&ctx, &second.bundles, &ints(&[0, 2, 3, 4, 6])),
        || format!("second class {:?}", second.bundles),
    )?;
    let poset = tilting::rank1_poset(&ctx).map_err(err)?;
    let walk = upper_sets::connect(
        &poset,
        &first.rep,
        &second.rep,
        Translation::Full,
        MAX_CLASSES,
    )
    .map_err(err)?;
    let end = upper_sets::replay(&poset, &first.rep, &walk).map_err(err)?;
    ensure(
        canonical_form(&poset, &end, Translation::Full) == second.rep,
        || "walk misses the target".into(),
    )?;
    Ok(format!(
        "2 classes, {{0..4}} quiver matches, connected by a {}-step mutation walk",
        walk.len()
    ))
}

fn criterion_3() -> Outcome {
    for (name, ctx, size) in [("line", line_with_z2(), 4), ("plane", plane_with_z2(), 6)] {
        let classes = tilting::classify_rank1(&ctx, Translation::Full, MAX_CLASSES).map_err(err)?;
        ensure(classes.len() == 2, || {
            format!("{name}: {} classes", classes.len())
        })?;
        ensure(classes.iter().all(|c| c.bundles.len() == size), || {
            format!("{name}: wrong class size")
        })?;
    }
    Ok("Z+Z/2 examples: 2 classes of 4 and 2 classes of 6".into())
}

fn rank_two_summary(
    ctx: &Arc<GradedDegreeGroup>,
) -> Result<(tilting::Rank2Classification, Vec<usize>), String> {
    let res = tilting::classify_rank2(ctx, Translation::Full, MAX_CLASSES).map_err(err)?;
    let mut counts: Vec<usize> = res.groups.iter().map(|g| g.full_count).collect();
    counts.sort();
    Ok((res, counts))
}

fn criterion_4() -> Outcome {
    let ctx = quadric();
    let split = ctx.sign_split().map_err(err)?;
    let hg = split.h.group();
    ensure(hg.torsion_orders() == [2] && hg.free_rank() == 1, || {
        format!("H = {:?}+Z^{}", hg.torsion_orders(), hg.free_rank())
    })?;
    ensure(
        hg.torsion_part(&split.s) == [0] && hg.free_part(&split.s)[0].abs() == 2,
        || format!("s = {}", split.s),
    )?;
    let (res, counts) = rank_two_summary(&ctx)?;
    ensure(res.groups.len() == 2, || {
        format!("{} antichains of H", res.groups.len())
    })?;
    ensure(res.classes().all(|c| c.bundles.len() == 4), || {
        "a class without 4 bundles".into()
    })?;
    let square = [[0, 0], [1, 0], [0, 1], [1, 1]].map(|v| el(&v));
    ensure(
        res.classes()
            .any(|c| is_translate(&ctx, &c.bundles, &square)),
        || "square class missing".into(),
    )?;
    ensure(counts == [2, 4], || {
        format!("classes per base {counts:?}, total {}", res.total())
    })?;
    Ok("2 bases with 2 and 4 classes, total 6, square present".into())
}

/// The value criterion 4 is known to produce instead.
fn criterion_4_computed() -> Result<Vec<usize>, String> {
    Ok(rank_two_summary(&quadric())?.1)
}

fn criterion_5() -> Outcome {
    let ctx = hirzebruch1();
    let split = ctx.sign_split().map_err(err)?;
    let hg = split.h.group();
    ensure(
        hg.torsion_orders().is_empty() && hg.free_rank() == 1,
        || "H is not Z".into(),
    )?;
    ensure(split.h.theta(&split.s) == 4, || format!("s = {}", split.s))?;
    let (res, counts) = rank_two_summary(&ctx)?;
    ensure(
        res.groups.len() == 1 && res.groups[0].base.len() == 4,
        || "expected one base of 4".into(),
    )?;
    ensure(counts == [4], || format!("classes {counts:?}"))?;
    ensure(res.classes().all(|c| c.bundles.len() == 4), || {
        "a class without 4 bundles".into()
    })?;
    let labels: HashSet<String> = res
        .classes()
        .flat_map(|c| c.quiver.arrows.iter().map(|a| a.label.clone()))
        .collect();
    let composite: BTreeSet<&str> = labels
        .iter()
        .map(String::as_str)
        .filter(|l| l.contains('*'))
        .collect();
    ensure(composite == BTreeSet::from(["x*w", "y*w"]), || {
        format!("composite labels {composite:?}")
    })?;
    Ok("H = Z, s = 4, one base of 4, 4 classes, composite arrows x*w and y*w".into())
}

fn criterion_6() -> Outcome {
    let ctx = stacky_surface();
    let split = ctx.sign_split().map_err(err)?;
    let hg = split.h.group();
    ensure(
        hg.torsion_orders().is_empty() && hg.free_rank() == 1,
        || "H is not Z".into(),
    )?;
    ensure(split.h.theta(&split.s) == 5, || format!("s = {}", split.s))?;
    let (res, counts) = rank_two_summary(&ctx)?;
    ensure(
        res.groups.len() == 1 && res.groups[0].base.len() == 5,
        || "expected one base of 5".into(),
    )?;
    ensure(counts == [5], || format!("classes {counts:?}"))?;
    ensure(res.classes().all(|c| c.bundles.len() == 5), || {
        "a class without 5 bundles".into()
    })?;
    Ok("H = Z, s = 5, one base of 5, 5 classes of 5".into())
}

fn criterion_7() -> Outcome {
    let mut checked = 0;
    let mut all: Vec<(&str, Arc<GradedDegreeGroup>, Vec<TiltingClass>)> = Vec::new();
    for (name, ctx) in rank_one_examples() {
        let cl = tilting::classify_rank1(&ctx, Translation::Full, MAX_CLASSES).map_err(err)?;
        all.push((name, ctx, cl));
    }
    for (name, ctx) in rank_two_examples() {
        let cl = tilting::classify_rank2(&ctx, Translation::Full, MAX_CLASSES)
            .map_err(err)?
            .classes()
            .cloned()
            .collect();
        all.push((name, ctx, cl));
    }
    let mut ext_checks = 0;
    for (name, ctx, classes) in all {
        let oracle = CohomologyOracle::from_group(ctx, Field::Rational).map_err(err)?;
        for c in classes {
            let rep = tilting::verify_class(&oracle, &c.bundles).map_err(err)?;
            ensure(rep.passed(), || {
                format!(
                    "{name}: {:?} has {} nonzero Ext",
                    c.bundles,
                    rep.failures.len()
                )
            })?;
            ext_checks += rep.checks.len();
            checked += 1;
        }
    }
    Ok(format!(
        "{checked} classes, {ext_checks} Ext groups, all zero"
    ))
}

/// Every cofinite subgroup with `m <= CUT_MAX_INDEX`, `d <= 2`.
fn lattices() -> Result<Vec<LatticeQuotient>, String> {
    let mut out = Vec::new();
    for d in 1..=2usize {
        for m in 1..=CUT_MAX_INDEX {
            for gens in subgroups(d, m) {
                out.push(LatticeQuotient::from_alpha(d, &gens).map_err(err)?);
            }
        }
    }
    Ok(out)
}

fn criterion_8() -> Outcome {
    let (mut types, mut total) = (0, 0);
    for lq in lattices()? {
        let (d, m) = (lq.d(), lq.m() as i64);
        if m < d as i64 + 1 {
            continue;
        }
        let cuts_all = all_cuts(&lq);
        for gamma in compositions(m - d as i64 - 1, d + 1) {
            let gamma: Vec<i64> = gamma.iter().map(|g| g + 1).collect();
            if lq.is_admissible_type(&gamma).is_err() {
                continue;
            }
            let tag = || format!("B={:?} gamma={gamma:?}", lq.generators());
            let cuts_g: BTreeSet<Vec<bool>> = cuts_all
                .iter()
                .filter(|c| c.type_of(&lq) == gamma)
                .map(|c| c.0.clone())
                .collect();
            let dets = all_detectors(&lq, &gamma);
            for f in &dets {
                let c = cuts::cut_from_detector(&lq, f).map_err(err)?;
                ensure(cuts::detector_from_cut(&lq, &c).map_err(err)? == *f, || {
                    format!("{}: f -> C -> f", tag())
                })?;
                ensure(cuts_g.contains(&c.0), || {
                    format!("{}: detector gives a non-cut", tag())
                })?;
            }
            for c in &cuts_g {
                let f = cuts::detector_from_cut(&lq, &cuts::Cut(c.clone())).map_err(err)?;
                ensure(
                    cuts::cut_from_detector(&lq, &f).map_err(err)?.0 == *c,
                    || format!("{}: C -> f -> C", tag()),
                )?;
            }
            let grp = cuts::group_of(&lq, &gamma).map_err(err)?;
            let graded = Arc::new(
                grp.graded
                    .clone()
                    .ok_or_else(|| format!("{}: ungraded", tag()))?,
            );
            let poset = FiberPoset::full(graded).map_err(err)?;
            let opts = EnumerateOptions {
                mode: Translation::Shift,
                max_classes: MAX_CLASSES,
                ..Default::default()
            };
            let reps = enumerate_classes(&poset, &opts).map_err(err)?;
            let mut image = BTreeSet::new();
            for j in &reps {
                let back = upper_sets::j_of_upper(&poset, &j.elements(&poset)).map_err(err)?;
                ensure(
                    back.sorted_elements(&poset) == j.sorted_elements(&poset),
                    || format!("{}: J -> I -> J", tag()),
                )?;
                image.insert(
                    cuts::cut_of_antichain(&grp.correspondence, &poset, j)
                        .map_err(err)?
                        .0,
                );
            }
            ensure(
                cuts_g.len() == dets.len() && dets.len() == reps.len(),
                || {
                    format!(
                        "{}: {} cuts, {} detectors, {} antichains",
                        tag(),
                        cuts_g.len(),
                        dets.len(),
                        reps.len()
                    )
                },
            )?;
            ensure(image == cuts_g, || {
                format!("{}: antichains do not map onto the cuts", tag())
            })?;
            types += 1;
            total += reps.len();
        }
    }
    Ok(format!(
        "{types} admissible types, {total} cuts matched three ways"
    ))
}

fn criterion_9() -> Outcome {
    let (mut lattices_seen, mut realized_total) = (0, 0);
    for lq in lattices()? {
        let (d, m) = (lq.d(), lq.m() as i64);
        let realized: BTreeSet<Vec<i64>> = all_cuts(&lq).iter().map(|c| c.type_of(&lq)).collect();
        for gamma in compositions(m, d + 1) {
            let admissible = lq.is_admissible_type(&gamma).is_ok();
            ensure(admissible == realized.contains(&gamma), || {
                format!(
                    "B={:?} gamma={gamma:?}: admissible {admissible}, realized {}",
                    lq.generators(),
                    !admissible
                )
            })?;
        }
        ensure(realized.iter().all(|g| g.iter().sum::<i64>() == m), || {
            "a cut type not summing to m".into()
        })?;
        lattices_seen += 1;
        realized_total += realized.len();
    }
    Ok(format!(
        "{lattices_seen} subgroups, {realized_total} realized types, all admissible and conversely"
    ))
}

fn random_element(rng: &mut StdRng, ctx: &GradedDegreeGroup, bound: i64) -> GroupElement {
    let g = ctx.group();
    let raw: Vec<i64> = (0..g.dim())
        .map(|_| rng.gen_range(-bound..=bound))
        .collect();
    g.reduce(raw)
}

fn criterion_10() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED);
    let examples: Vec<_> = rank_one_examples()
        .into_iter()
        .chain(rank_two_examples())
        .collect();
    // Serre duality
    for (name, ctx) in &examples {
        let oracle = CohomologyOracle::from_group(ctx.clone(), Field::Rational).map_err(err)?;
        let d = oracle.polytope().dim();
        for _ in 0..SERRE_SAMPLES {
            let g = random_element(&mut rng, ctx, 5);
            let dual = ctx.sub(&ctx.group().neg(&g), ctx.p());
            for r in 0..=d {
                let a = oracle.cohomology_dim(&g, r).map_err(err)?;
                let b = oracle.cohomology_dim(&dual, d - r).map_err(err)?;
                ensure(a == b, || {
                    format!("{name}: H^{r}({g}) = {a} but H^{}({dual}) = {b}", d - r)
                })?;
            }
        }
    }
    // vanishing along orbits against the order of H
    for (name, ctx) in rank_two_examples() {
        let oracle = CohomologyOracle::from_group(ctx.clone(), Field::Rational).map_err(err)?;
        let split = ctx.sign_split().map_err(err)?;
        let h = &split.h;
        let minus_s = h.group().neg(&split.s);
        for _ in 0..VANCOH_SAMPLES {
            let g = random_element(&mut rng, &ctx, 6);
            let q = split.q(&g);
            let by_order = !h.leq(&split.s, &q) && !h.leq(&q, &minus_s);
            let by_homology = oracle.intermediate_vanishing_on_orbit(&g).map_err(err)?;
            ensure(by_order == by_homology, || {
                format!("{name}: {g} order {by_order}, homology {by_homology}")
            })?;
        }
    }
    // order axioms and the shift action
    let mut orders: Vec<(String, GradedDegreeGroup)> = examples
        .iter()
        .map(|(n, c)| (n.to_string(), c.as_ref().clone()))
        .collect();
    for (name, ctx) in rank_two_examples() {
        orders.push((format!("H of {name}"), ctx.sign_split().map_err(err)?.h));
    }
    for (name, ctx) in &orders {
        for _ in 0..ORDER_SAMPLES {
            let [a, b, c] = [0; 3].map(|_| random_element(&mut rng, ctx, 4));
            ensure(ctx.leq(&a, &a), || format!("{name}: reflexivity"))?;
            ensure(!(ctx.leq(&a, &b) && ctx.leq(&b, &a)) || a == b, || {
                format!("{name}: antisymmetry")
            })?;
            ensure(
                !(ctx.leq(&a, &b) && ctx.leq(&b, &c)) || ctx.leq(&a, &c),
                || format!("{name}: transitivity"),
            )?;
            ensure(ctx.lt(&a, &ctx.shifted(&a, 1)), || {
                format!("{name}: (A1) at {a}")
            })?;
            ensure(
                ctx.leq(&a, &b) == ctx.leq(&ctx.shifted(&a, 1), &ctx.shifted(&b, 1)),
                || format!("{name}: (A2)"),
            )?;
            ensure((0..200).any(|n| ctx.leq(&b, &ctx.shifted(&a, n))), || {
                format!("{name}: (A3) {a} never passes {b}")
            })?;
        }
    }
    // breadth-first enumeration against the window brute force
    let mut posets: Vec<(String, FiberPoset)> = Vec::new();
    for (name, ctx) in rank_one_examples() {
        posets.push((name.to_string(), FiberPoset::full(ctx).map_err(err)?));
    }
    for (name, ctx) in rank_two_examples() {
        let split = ctx.sign_split().map_err(err)?;
        posets.push((
            format!("H of {name}"),
            FiberPoset::full(Arc::new(split.h.clone())).map_err(err)?,
        ));
        let hp = FiberPoset::full(Arc::new(split.h.clone())).map_err(err)?;
        let bases = enumerate_classes(&hp, &EnumerateOptions::default()).map_err(err)?;
        for j in bases {
            let base = j.sorted_elements(&hp);
            posets.push((
                format!("{name} over {base:?}"),
                tilting::rank2_poset(&ctx, &split, &base),
            ));
        }
    }
    let mut compared = 0;
    for (name, poset) in &posets {
        let opts = EnumerateOptions {
            mode: Translation::Shift,
            max_classes: MAX_CLASSES,
            ..Default::default()
        };
        let bfs: BTreeSet<Vec<i64>> = enumerate_classes(poset, &opts)
            .map_err(err)?
            .into_iter()
            .map(|j| j.shifts)
            .filter(|s| s.iter().all(|x| x.abs() <= WINDOW))
            .collect();
        let brute = window_antichains(poset, WINDOW);
        ensure(bfs == brute, || {
            format!(
                "{name}: {} by search, {} by brute force",
                bfs.len(),
                brute.len()
            )
        })?;
        compared += brute.len();
    }
    Ok(format!(
        "Serre duality on {} stacks, vanishing lemma, order axioms, {compared} antichains in window {WINDOW}",
        examples.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [fn() -> Outcome; 10] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
        criterion_10,
    ];
    let mut unexpected = Vec::new();
    for (i, run) in criteria.iter().enumerate() {
        let n = i + 1;
        let t = Instant::now();
        let mut out = run();
        let took = t.elapsed();
        let budget = Duration::from_secs_f64(BUDGET_SECS[i]);
        if out.is_ok() && took > budget {
            out = Err(format!("took {took:.2?}, budget {budget:.2?}"));
        }
        let known = KNOWN_UNATTAINABLE.iter().find(|(k, _)| *k == n);
        match (&out, known) {
            (Ok(msg), _) => println!("criterion {n}: PASS ({took:.2?}) {msg}"),
            (Err(msg), Some((_, why))) => {
                println!("criterion {n}: FAIL ({took:.2?}) {msg} [known: {why}]");
            }
            (Err(msg), None) => {
                println!("criterion {n}: FAIL ({took:.2?}) {msg}");
                unexpected.push(n);
            }
        }
    }
    // a known failure must still fail the way it was analyzed
    match criterion_4_computed() {
        Ok(c) if c == [2, 5] => {}
        other => {
            println!("criterion 4 changed: {other:?}");
            unexpected.push(4);
        }
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {unexpected:?}");
        ExitCode::FAILURE
    }
}
