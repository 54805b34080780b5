mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

use common::*;
use stacktilt::abgroup::{FgAbelianGroup, GroupElement};
use stacktilt::cuts::{self, CutDetector, LatticeQuotient};
use stacktilt::graded_order::GradedDegreeGroup;
use stacktilt::linalg::{smith_normal_form, Matrix};
use stacktilt::stacky_geom::{parse_polytope, reduced_homology, CohomologyOracle, Field};
use stacktilt::tilting;
use stacktilt::upper_sets::{
    self, enumerate_classes, EnumerateOptions, FiberPoset, ShiftedPoset, Translation,
};
use stacktilt::Int;

fn mul(a: &Matrix<Int>, b: &Matrix<Int>) -> Matrix<Int> {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..k).map(|t| &a[i][t] * &b[t][j]).sum())
                .collect()
        })
        .collect()
}

fn example(i: usize) -> Arc<GradedDegreeGroup> {
    let all: Vec<_> = rank_one_examples()
        .into_iter()
        .chain(rank_two_examples())
        .collect();
    all[i % all.len()].1.clone()
}

const N_EXAMPLES: usize = 10;

/// The group itself in rank one, the quotient `H` in rank two.
fn full_poset(ctx: Arc<GradedDegreeGroup>) -> FiberPoset {
    if ctx.group().free_rank() == 1 {
        FiberPoset::full(ctx).unwrap()
    } else {
        FiberPoset::full(Arc::new(ctx.sign_split().unwrap().h)).unwrap()
    }
}

fn element_in(ctx: &GradedDegreeGroup, raw: &[i64]) -> GroupElement {
    ctx.group().reduce(raw[..ctx.group().dim()].to_vec())
}

fn raw() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-6i64..=6, 3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn smith_form_is_a_divisibility_chain(entries in prop::collection::vec(-20i64..=20, 36)) {
        let a: Matrix<Int> = entries.chunks(6).map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
        let s = smith_normal_form(&a, 6);
        for w in s.diagonal.windows(2) {
            prop_assert!((&w[1] % &w[0]).is_zero());
        }
        prop_assert!(s.diagonal.iter().all(|d| d.is_positive()));
        let d = mul(&mul(&s.u, &a), &s.v);
        for i in 0..6 {
            for j in 0..6 {
                let want = if i == j && i < s.rank() { s.diagonal[i].clone() } else { Int::zero() };
                prop_assert_eq!(&d[i][j], &want);
            }
        }
    }

    #[test]
    fn canonicalize_is_idempotent_and_ignores_relations(
        v in prop::collection::vec(-30i64..=30, 3),
        k in -5i64..=5,
        rels in prop::collection::vec(-4i64..=4, 6),
    ) {
        let g = FgAbelianGroup::from_presentation(3, &[rels[..3].to_vec(), rels[3..].to_vec()]).unwrap();
        let c = g.canonicalize(&v).unwrap();
        let lifted = g.lift(&c);
        prop_assert_eq!(g.canonicalize(&lifted).unwrap(), c.clone());
        let moved: Vec<i64> = v.iter().zip(&rels[..3]).map(|(a, r)| a + k * r).collect();
        prop_assert_eq!(g.canonicalize(&moved).unwrap(), c);
    }

    #[test]
    fn quotient_kernel_matches_brute_force(t in 2i64..=6, a in -6i64..=6, b in -6i64..=6) {
        // Z/t + Z modulo one element, checked on a box of representatives
        let g = FgAbelianGroup::from_invariants(vec![t], 1).unwrap();
        let sub = g.reduce(vec![a, b]);
        let q = g.quotient_by(std::slice::from_ref(&sub));
        for x in 0..t {
            for y in -8..=8 {
                let e = g.reduce(vec![x, y]);
                let brute = (-20..=20).any(|n| g.add_scaled(&e, &sub, n) == g.zero());
                prop_assert_eq!(q.in_kernel(&e), brute, "{} in <{}>", e, sub);
            }
        }
    }

    #[test]
    fn order_axioms(i in 0..N_EXAMPLES, a in raw(), b in raw(), c in raw()) {
        let ctx = example(i);
        let [a, b, c] = [a, b, c].map(|v| element_in(&ctx, &v));
        prop_assert!(ctx.leq(&a, &a));
        prop_assert!(!(ctx.leq(&a, &b) && ctx.leq(&b, &a)) || a == b);
        prop_assert!(!(ctx.leq(&a, &b) && ctx.leq(&b, &c)) || ctx.leq(&a, &c));
        prop_assert_eq!(ctx.leq(&a, &b), ctx.leq(&ctx.add(&a, &c), &ctx.add(&b, &c)));
        prop_assert!(ctx.lt(&a, &ctx.shifted(&a, 1)));
        prop_assert!((0..200).any(|n| ctx.leq(&b, &ctx.shifted(&a, n))));
        prop_assert_eq!(ctx.leq(&a, &b), ctx.hom_dim(&ctx.sub(&b, &a)) >= 1);
    }

    #[test]
    fn mutation_round_trips(i in 0..N_EXAMPLES, walk in prop::collection::vec((0usize..8, any::<bool>()), 0..12)) {
        let poset = full_poset(example(i));
        let mut j = upper_sets::AntichainRep::seed(poset.fiber_count());
        for (pick, up) in walk {
            let fibers = if up { upper_sets::mutable_fibers(&poset, &j) } else { upper_sets::comutable_fibers(&poset, &j) };
            let f = fibers[pick % fibers.len()];
            let m = j.element(&poset, f);
            let next = if up { upper_sets::mutate(&poset, &j, &m) } else { upper_sets::mutate_inverse(&poset, &j, &m) }.unwrap();
            let moved = next.element(&poset, f);
            let back = if up { upper_sets::mutate_inverse(&poset, &next, &moved) } else { upper_sets::mutate(&poset, &next, &moved) }.unwrap();
            prop_assert_eq!(&back, &j);
            prop_assert!(upper_sets::is_antichain_rep(&poset, &next.elements(&poset)).is_ok());
            j = next;
        }
        let round = upper_sets::j_of_upper(&poset, &j.elements(&poset)).unwrap();
        prop_assert_eq!(round.sorted_elements(&poset), j.sorted_elements(&poset));
        for n in -3..=3 {
            for f in 0..poset.fiber_count() {
                let g = poset.element(f, n);
                let inside = upper_sets::i_contains(&poset, &j, &g);
                prop_assert_eq!(inside, n >= j.shifts[f]);
            }
        }
    }

    #[test]
    fn serre_duality(i in 0..N_EXAMPLES, g in raw()) {
        let ctx = example(i);
        let oracle = CohomologyOracle::from_group(ctx.clone(), Field::Rational).unwrap();
        let d = oracle.polytope().dim();
        let g = element_in(&ctx, &g);
        let dual = ctx.sub(&ctx.group().neg(&g), ctx.p());
        for r in 0..=d {
            prop_assert_eq!(oracle.cohomology_dim(&g, r).unwrap(), oracle.cohomology_dim(&dual, d - r).unwrap());
        }
        prop_assert_eq!(oracle.cohomology_dim(&g, 0).unwrap() as u64, ctx.hom_dim(&g));
    }

    #[test]
    fn presilting_is_closed_under_subsets(i in 0..N_EXAMPLES, mask in any::<u16>()) {
        let ctx = example(i);
        let classes: Vec<_> = if ctx.group().free_rank() == 1 {
            tilting::classify_rank1(&ctx, Translation::Full, 1000).unwrap()
        } else {
            tilting::classify_rank2(&ctx, Translation::Full, 1000).unwrap().classes().cloned().collect()
        };
        for c in classes {
            prop_assert!(tilting::is_presilting(&ctx, &c.bundles).unwrap().is_ok());
            let sub: Vec<_> = c.bundles.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, b)| b.clone()).collect();
            prop_assert!(tilting::is_presilting(&ctx, &sub).unwrap().is_ok());
        }
    }

    #[test]
    fn detectors_round_trip(d in 1usize..=2, m in 1i64..=8, pick in any::<u32>()) {
        let gens = subgroups(d, m);
        let gens = &gens[pick as usize % gens.len()];
        let lq = LatticeQuotient::from_alpha(d, gens).unwrap();
        let cuts_all = all_cuts(&lq);
        prop_assume!(!cuts_all.is_empty());
        let cut = &cuts_all[(pick as usize / 7) % cuts_all.len()];
        let f: CutDetector = cuts::detector_from_cut(&lq, cut).unwrap();
        prop_assert_eq!(f.values[0], 0);
        prop_assert_eq!(&cuts::cut_from_detector(&lq, &f).unwrap(), cut);
        prop_assert_eq!(f.gamma, cut.type_of(&lq));
    }
}

#[test]
fn boundary_euler_characteristic() {
    let polys: Vec<(usize, Vec<Vec<i64>>)> = vec![
        (1, vec![vec![1], vec![-1]]),
        (2, vec![vec![1, 0], vec![0, 1], vec![-1, -1]]),
        (2, vec![vec![1, 0], vec![-1, 0], vec![0, 1], vec![0, -1]]),
        (
            3,
            vec![
                vec![1, 0, 0],
                vec![0, 1, 0],
                vec![0, 0, 1],
                vec![-1, -1, -1],
            ],
        ),
        (
            3,
            vec![
                vec![1, 0, 0],
                vec![-1, 0, 0],
                vec![0, 1, 0],
                vec![0, -1, 0],
                vec![0, 0, 1],
                vec![0, 0, -1],
            ],
        ),
    ];
    for (dim, verts) in polys {
        let p = parse_polytope(dim, verts.clone()).unwrap();
        let all = (1u64 << p.n_vertices()) - 1;
        let h = reduced_homology(&p.subcomplex(all), dim - 1, Field::Rational);
        let sign = |k: i64| if k % 2 == 0 { 1 } else { -1 };
        let euler: i64 = 1
            + (0..dim as i64)
                .map(|k| sign(k) * h.get(k) as i64)
                .sum::<i64>();
        assert_eq!(euler, 1 + sign(dim as i64 - 1), "boundary of {verts:?}");
    }
}

#[test]
fn homology_does_not_depend_on_the_field() {
    for i in 0..N_EXAMPLES {
        let ctx = example(i);
        let q = CohomologyOracle::from_group(ctx.clone(), Field::Rational).unwrap();
        let n = q.polytope().n_vertices();
        for p in [2, 3] {
            let fp = CohomologyOracle::from_group(ctx.clone(), Field::Prime(p)).unwrap();
            for t in 0..1u64 << n {
                assert_eq!(
                    q.profile(t).dims,
                    fp.profile(t).dims,
                    "example {i}, pattern {t:b}, F_{p}"
                );
            }
        }
    }
}

#[test]
fn enumeration_ignores_visiting_order() {
    for i in 0..N_EXAMPLES {
        let ctx = example(i);
        let poset = full_poset(ctx);
        for mode in [Translation::Shift, Translation::Full] {
            let fwd = enumerate_classes(
                &poset,
                &EnumerateOptions {
                    mode,
                    ..Default::default()
                },
            )
            .unwrap();
            let rev = enumerate_classes(
                &poset,
                &EnumerateOptions {
                    mode,
                    reverse: true,
                    ..Default::default()
                },
            )
            .unwrap();
            assert_eq!(fwd, rev);
        }
    }
}

#[test]
fn classes_are_closed_under_mutation() {
    for i in 0..N_EXAMPLES {
        let ctx = example(i);
        if ctx.group().free_rank() != 1 {
            continue;
        }
        let classes = tilting::classify_rank1(&ctx, Translation::Full, 1000).unwrap();
        let poset = tilting::rank1_poset(&ctx).unwrap();
        let reps: BTreeSet<_> = classes.iter().map(|c| c.rep.clone()).collect();
        for c in &classes {
            for m in upper_sets::mutable_elements(&poset, &c.rep) {
                let next = tilting::apr_mutate(&ctx, c, &m).unwrap();
                let canon = upper_sets::canonical_form(&poset, &next.rep, Translation::Full);
                assert!(
                    reps.contains(&canon),
                    "example {i}: mutation leaves the class list"
                );
            }
        }
    }
}

#[test]
fn brute_force_window_agrees_with_search() {
    for i in 0..N_EXAMPLES {
        let ctx = example(i);
        if ctx.group().free_rank() != 1 {
            continue;
        }
        let poset = FiberPoset::full(ctx).unwrap();
        let bfs: BTreeSet<Vec<i64>> = enumerate_classes(
            &poset,
            &EnumerateOptions {
                mode: Translation::Shift,
                ..Default::default()
            },
        )
        .unwrap()
        .into_iter()
        .map(|j| j.shifts)
        .filter(|s| s.iter().all(|x| x.abs() <= 3))
        .collect();
        assert_eq!(bfs, window_antichains(&poset, 3));
    }
}
