//! Shared examples and brute-force oracles for the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::Arc;

use stacktilt::abgroup::{FgAbelianGroup, GroupElement};
use stacktilt::cuts::{Cut, CutDetector, LatticeQuotient};
use stacktilt::graded_order::GradedDegreeGroup;
use stacktilt::upper_sets::ShiftedPoset;

pub fn names(n: usize) -> Vec<String> {
    if n == 4 {
        ["x", "y", "z", "w"].iter().map(|s| s.to_string()).collect()
    } else if n <= 3 {
        ["x", "y", "z"][..n].iter().map(|s| s.to_string()).collect()
    } else {
        (1..=n).map(|i| format!("x{i}")).collect()
    }
}

/// `Z^free + torsion` with degrees given free coordinates first, as in the examples.
pub fn graded(free: usize, torsion: &[i64], degrees: &[Vec<i64>]) -> Arc<GradedDegreeGroup> {
    let g = FgAbelianGroup::from_free_then_torsion(free, torsion).unwrap();
    let degs = degrees.iter().map(|d| g.canonicalize(d).unwrap()).collect();
    Arc::new(GradedDegreeGroup::build_with(g, degs, names(degrees.len()), None).unwrap())
}

pub fn projective_space(d: usize) -> Arc<GradedDegreeGroup> {
    graded(1, &[], &vec![vec![1]; d + 1])
}

pub fn weighted(w: &[i64]) -> Arc<GradedDegreeGroup> {
    graded(1, &[], &w.iter().map(|&x| vec![x]).collect::<Vec<_>>())
}

pub fn line_with_z2() -> Arc<GradedDegreeGroup> {
    graded(1, &[2], &[vec![1, 0], vec![1, 1]])
}

pub fn plane_with_z2() -> Arc<GradedDegreeGroup> {
    graded(1, &[2], &[vec![1, 0], vec![1, 0], vec![1, 1]])
}

pub fn quadric() -> Arc<GradedDegreeGroup> {
    graded(2, &[], &[vec![1, 0], vec![1, 0], vec![0, 1], vec![0, 1]])
}

pub fn hirzebruch1() -> Arc<GradedDegreeGroup> {
    graded(2, &[], &[vec![1, 0], vec![1, 0], vec![1, 1], vec![0, 1]])
}

pub fn stacky_surface() -> Arc<GradedDegreeGroup> {
    graded(2, &[], &[vec![1, -1], vec![1, 0], vec![1, 1], vec![0, 1]])
}

pub fn rank_one_examples() -> Vec<(&'static str, Arc<GradedDegreeGroup>)> {
    vec![
        ("P^1", projective_space(1)),
        ("P^2", projective_space(2)),
        ("P^3", projective_space(3)),
        ("P^4", projective_space(4)),
        ("P(2,3)", weighted(&[2, 3])),
        ("Z+Z/2 line", line_with_z2()),
        ("Z+Z/2 plane", plane_with_z2()),
    ]
}

pub fn rank_two_examples() -> Vec<(&'static str, Arc<GradedDegreeGroup>)> {
    vec![
        ("P1xP1", quadric()),
        ("Sigma1", hirzebruch1()),
        ("stacky", stacky_surface()),
    ]
}

pub fn el(v: &[i64]) -> GroupElement {
    GroupElement(v.to_vec())
}

/// Cofinite subgroups of `Z^d` of index `m`, `d <= 2`, in Hermite normal form.
pub fn subgroups(d: usize, m: i64) -> Vec<Vec<Vec<i64>>> {
    match d {
        1 => vec![vec![vec![m]]],
        2 => {
            let mut out = Vec::new();
            for a in 1..=m {
                if m % a != 0 {
                    continue;
                }
                let c = m / a;
                for b in 0..c {
                    out.push(vec![vec![a, b], vec![0, c]]);
                }
            }
            out
        }
        _ => unimplemented!("only d <= 2"),
    }
}

/// All compositions of `m` into `parts` nonnegative parts.
pub fn compositions(m: i64, parts: usize) -> Vec<Vec<i64>> {
    if parts == 1 {
        return vec![vec![m]];
    }
    (0..=m)
        .flat_map(|first| {
            compositions(m - first, parts - 1)
                .into_iter()
                .map(move |mut rest| {
                    rest.insert(0, first);
                    rest
                })
        })
        .collect()
}

/// Every arrow subset meeting each elementary cycle exactly once, by backtracking.
pub fn all_cuts(lq: &LatticeQuotient) -> Vec<Cut> {
    let cycles = lq.elementary_cycles();
    let n = lq.n_arrows();
    let mut on: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (c, cyc) in cycles.iter().enumerate() {
        for &a in cyc {
            on[a].push(c);
        }
    }
    // a cycle is closed once its largest arrow index has been decided
    let last: Vec<usize> = cycles.iter().map(|c| *c.iter().max().unwrap()).collect();
    let mut closing: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (c, &l) in last.iter().enumerate() {
        closing[l].push(c);
    }
    let mut count = vec![0u32; cycles.len()];
    let mut choice = vec![false; n];
    let mut out = Vec::new();
    fn go(
        a: usize,
        n: usize,
        on: &[Vec<usize>],
        closing: &[Vec<usize>],
        count: &mut [u32],
        choice: &mut [bool],
        out: &mut Vec<Cut>,
    ) {
        if a == n {
            out.push(Cut(choice.to_vec()));
            return;
        }
        for pick in [false, true] {
            if pick {
                if on[a].iter().any(|&c| count[c] >= 1) {
                    continue;
                }
                on[a].iter().for_each(|&c| count[c] += 1);
            }
            choice[a] = pick;
            if closing[a].iter().all(|&c| count[c] == 1) {
                go(a + 1, n, on, closing, count, choice, out);
            }
            if pick {
                on[a].iter().for_each(|&c| count[c] -= 1);
            }
            choice[a] = false;
        }
    }
    go(0, n, &on, &closing, &mut count, &mut choice, &mut out);
    out
}

/// Every detector of type `gamma`: increments along a spanning tree are chosen freely
/// among the two allowed values, then every arrow is checked.
pub fn all_detectors(lq: &LatticeQuotient, gamma: &[i64]) -> Vec<CutDetector> {
    let m = lq.m() as i64;
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; lq.m()];
    let mut order = vec![0usize];
    let mut seen = vec![false; lq.m()];
    seen[0] = true;
    let mut i = 0;
    while i < order.len() {
        let v = order[i];
        for t in 0..=lq.d() {
            let (_, w, _) = lq.arrow_ends(lq.arrow(v, t));
            if !seen[w] {
                seen[w] = true;
                parent[w] = Some((v, t));
                order.push(w);
            }
        }
        i += 1;
    }
    let tree: Vec<usize> = order[1..].to_vec();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << tree.len()) {
        let mut f = vec![0i64; lq.m()];
        for (k, &w) in tree.iter().enumerate() {
            let (v, t) = parent[w].unwrap();
            f[w] = f[v] + gamma[t] - if mask >> k & 1 == 1 { m } else { 0 };
        }
        let ok = (0..lq.n_arrows()).all(|a| {
            let (s, t, ty) = lq.arrow_ends(a);
            let diff = f[t] - f[s];
            diff == gamma[ty] || diff == gamma[ty] - m
        });
        if ok {
            out.push(CutDetector {
                gamma: gamma.to_vec(),
                values: f,
            });
        }
    }
    out
}

/// Shift vectors (first entry 0, others in `[-window, window]`) of complete
/// antichains, checked directly against the order: no `a >= b + shift`.
pub fn window_antichains<P: ShiftedPoset>(poset: &P, window: i64) -> BTreeSet<Vec<i64>> {
    let fibers = poset.fiber_count();
    let side = 2 * window + 1;
    let mut out = BTreeSet::new();
    let mut shifts = vec![0i64; fibers];
    for code in 0..side.pow(fibers.saturating_sub(1) as u32) {
        let mut c = code;
        for s in shifts.iter_mut().skip(1) {
            *s = c % side - window;
            c /= side;
        }
        let ok = (0..fibers).all(|a| {
            let ea = poset.element(a, shifts[a]);
            (0..fibers).all(|b| !poset.leq(&poset.element(b, shifts[b] + 1), &ea))
        });
        if ok {
            out.insert(shifts.clone());
        }
    }
    out
}
