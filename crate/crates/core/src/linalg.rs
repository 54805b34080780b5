//! Exact integer linear algebra.
//!
//! Everything here is generic over an integer scalar `T: Integer + Signed + Clone`
//! (so `i64`, `i128` and `BigInt` all work). Rational arithmetic is `Ratio<T>`.
//! Matrices are plain row-major `Vec<Vec<T>>`.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};

pub type Matrix<T> = Vec<Vec<T>>;

pub fn identity<T: Integer + Clone>(n: usize) -> Matrix<T> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { T::one() } else { T::zero() })
                .collect()
        })
        .collect()
}

pub fn transpose<T: Clone>(m: &Matrix<T>, cols: usize) -> Matrix<T> {
    (0..cols)
        .map(|j| m.iter().map(|row| row[j].clone()).collect())
        .collect()
}

/// Smith normal form `U * A * V = D` with `U`, `V` unimodular.
///
/// `diagonal` holds the nonzero invariant factors `d_1 | d_2 | ... | d_rank`, all positive.
/// `v_inv` is the inverse of `V`, tracked alongside it.
#[derive(Clone, Debug)]
pub struct SmithForm<T> {
    pub diagonal: Vec<T>,
    pub u: Matrix<T>,
    pub v: Matrix<T>,
    pub v_inv: Matrix<T>,
    pub rows: usize,
    pub cols: usize,
}

impl<T> SmithForm<T> {
    pub fn rank(&self) -> usize {
        self.diagonal.len()
    }
}

struct SnfState<T> {
    a: Matrix<T>,
    u: Matrix<T>,
    v: Matrix<T>,
    v_inv: Matrix<T>,
    rows: usize,
    cols: usize,
}

impl<T: Integer + Signed + Clone> SnfState<T> {
    fn swap_rows(&mut self, i: usize, j: usize) {
        if i != j {
            self.a.swap(i, j);
            self.u.swap(i, j);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for row in self.a.iter_mut().chain(self.v.iter_mut()) {
            row.swap(i, j);
        }
        // V <- V E, so V^{-1} <- E V^{-1}; a swap is its own inverse.
        self.v_inv.swap(i, j);
    }

    /// row_i <- row_i - q * row_j
    fn add_row(&mut self, i: usize, j: usize, q: &T) {
        for c in 0..self.cols {
            let t = self.a[j][c].clone() * q.clone();
            self.a[i][c] = self.a[i][c].clone() - t;
        }
        for c in 0..self.rows {
            let t = self.u[j][c].clone() * q.clone();
            self.u[i][c] = self.u[i][c].clone() - t;
        }
    }

    /// col_i <- col_i - q * col_j
    fn add_col(&mut self, i: usize, j: usize, q: &T) {
        for r in 0..self.rows {
            let t = self.a[r][j].clone() * q.clone();
            self.a[r][i] = self.a[r][i].clone() - t;
        }
        for r in 0..self.cols {
            let t = self.v[r][j].clone() * q.clone();
            self.v[r][i] = self.v[r][i].clone() - t;
        }
        // inverse op on V^{-1}: row_j <- row_j + q * row_i
        for c in 0..self.cols {
            let t = self.v_inv[i][c].clone() * q.clone();
            self.v_inv[j][c] = self.v_inv[j][c].clone() + t;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for x in self.a[i].iter_mut().chain(self.u[i].iter_mut()) {
            *x = -x.clone();
        }
    }

    fn min_abs_nonzero(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for i in t..self.rows {
            for j in t..self.cols {
                let x = &self.a[i][j];
                if x.is_zero() {
                    continue;
                }
                match best {
                    Some((bi, bj)) if self.a[bi][bj].abs() <= x.abs() => {}
                    _ => best = Some((i, j)),
                }
            }
        }
        best
    }

    fn run(&mut self) -> usize {
        let n = self.rows.min(self.cols);
        let mut t = 0;
        while t < n {
            let Some((pi, pj)) = self.min_abs_nonzero(t) else {
                break;
            };
            self.swap_rows(t, pi);
            self.swap_cols(t, pj);
            loop {
                let mut dirty = false;
                for i in t + 1..self.rows {
                    if self.a[i][t].is_zero() {
                        continue;
                    }
                    let q = self.a[i][t].clone() / self.a[t][t].clone();
                    self.add_row(i, t, &q);
                    if !self.a[i][t].is_zero() {
                        dirty = true;
                    }
                }
                for j in t + 1..self.cols {
                    if self.a[t][j].is_zero() {
                        continue;
                    }
                    let q = self.a[t][j].clone() / self.a[t][t].clone();
                    self.add_col(j, t, &q);
                    if !self.a[t][j].is_zero() {
                        dirty = true;
                    }
                }
                if dirty {
                    let (pi, pj) = self.min_abs_nonzero_cross(t);
                    self.swap_rows(t, pi);
                    self.swap_cols(t, pj);
                    continue;
                }
                // pivot must divide the remaining block
                let piv = self.a[t][t].clone();
                let offender = (t + 1..self.rows)
                    .find(|&i| (t + 1..self.cols).any(|j| !self.a[i][j].is_multiple_of(&piv)));
                match offender {
                    Some(i) => {
                        let m1 = -T::one();
                        self.add_row(t, i, &m1);
                    }
                    None => break,
                }
            }
            if self.a[t][t].is_negative() {
                self.negate_row(t);
            }
            t += 1;
        }
        t
    }

    /// Smallest nonzero entry in row `t` or column `t` (beyond the diagonal or on it).
    fn min_abs_nonzero_cross(&self, t: usize) -> (usize, usize) {
        let mut best = (t, t);
        let mut best_val: Option<T> = if self.a[t][t].is_zero() {
            None
        } else {
            Some(self.a[t][t].abs())
        };
        for i in t + 1..self.rows {
            let x = self.a[i][t].abs();
            if !x.is_zero() && best_val.as_ref().is_none_or(|b| &x < b) {
                best = (i, t);
                best_val = Some(x);
            }
        }
        for j in t + 1..self.cols {
            let x = self.a[t][j].abs();
            if !x.is_zero() && best_val.as_ref().is_none_or(|b| &x < b) {
                best = (t, j);
                best_val = Some(x);
            }
        }
        best
    }
}

pub fn smith_normal_form<T: Integer + Signed + Clone>(a: &Matrix<T>, cols: usize) -> SmithForm<T> {
    let rows = a.len();
    for row in a {
        assert_eq!(row.len(), cols, "ragged matrix");
    }
    let mut st = SnfState {
        a: a.clone(),
        u: identity(rows),
        v: identity(cols),
        v_inv: identity(cols),
        rows,
        cols,
    };
    let rank = st.run();
    let diagonal = (0..rank).map(|i| st.a[i][i].clone()).collect();
    SmithForm {
        diagonal,
        u: st.u,
        v: st.v,
        v_inv: st.v_inv,
        rows,
        cols,
    }
}

/// Basis of `{ x : x * A = 0 }` for an `rows x cols` matrix `A`.
pub fn left_kernel<T: Integer + Signed + Clone>(a: &Matrix<T>, cols: usize) -> Matrix<T> {
    let snf = smith_normal_form(a, cols);
    snf.u[snf.rank()..].to_vec()
}

/// Basis of `{ x : A * x = 0 }`.
pub fn right_kernel<T: Integer + Signed + Clone>(a: &Matrix<T>, cols: usize) -> Matrix<T> {
    let at = transpose(a, cols);
    left_kernel(&at, a.len())
}

/// Kernel of the homomorphism `Z^n -> Z^f + (+)_j Z/t_j`, where row `i` of `images` is
/// the image of the `i`-th unit vector (torsion coordinates first, then free ones).
pub fn hom_kernel<T: Integer + Signed + Clone>(
    images: &Matrix<T>,
    torsion: &[T],
    free: usize,
) -> Matrix<T> {
    let n = images.len();
    let k = torsion.len();
    let width = k + free;
    let mut stacked: Matrix<T> = images.clone();
    for (j, t) in torsion.iter().enumerate() {
        let mut row = vec![T::zero(); width];
        row[j] = t.clone();
        stacked.push(row);
    }
    let gens = left_kernel(&stacked, width)
        .into_iter()
        .map(|row| row[..n].to_vec())
        .filter(|row| row.iter().any(|x| !x.is_zero()))
        .collect();
    hermite_rows(gens, n)
}

/// Row-reduces a generating set of a lattice into a basis (echelon form).
pub fn hermite_rows<T: Integer + Signed + Clone>(mut rows: Matrix<T>, cols: usize) -> Matrix<T> {
    let mut out: Matrix<T> = Vec::new();
    let mut pivots = Vec::new();
    let mut r0 = 0;
    for c in 0..cols {
        if r0 >= rows.len() {
            break;
        }
        // gcd-reduce column c over rows r0..
        loop {
            let piv = (r0..rows.len())
                .filter(|&i| !rows[i][c].is_zero())
                .min_by(|&i, &j| rows[i][c].abs().cmp(&rows[j][c].abs()));
            let Some(pi) = piv else { break };
            rows.swap(r0, pi);
            let mut done = true;
            for i in r0 + 1..rows.len() {
                if rows[i][c].is_zero() {
                    continue;
                }
                let q = rows[i][c].clone() / rows[r0][c].clone();
                for cc in 0..cols {
                    let t = rows[r0][cc].clone() * q.clone();
                    rows[i][cc] = rows[i][cc].clone() - t;
                }
                if !rows[i][c].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if rows[r0][c].is_zero() {
            continue;
        }
        if rows[r0][c].is_negative() {
            for x in rows[r0].iter_mut() {
                *x = -x.clone();
            }
        }
        out.push(rows[r0].clone());
        pivots.push(c);
        r0 += 1;
    }
    // reduce entries above each pivot into [0, pivot)
    for (r, &c) in pivots.iter().enumerate() {
        for rr in 0..r {
            let q = out[rr][c].div_floor(&out[r][c]);
            if q.is_zero() {
                continue;
            }
            for cc in 0..cols {
                let t = out[r][cc].clone() * q.clone();
                out[rr][cc] = out[rr][cc].clone() - t;
            }
        }
    }
    out
}

/// Some integer `y` with `y * A = b`, if one exists.
pub fn solve_left<T: Integer + Signed + Clone>(
    a: &Matrix<T>,
    cols: usize,
    b: &[T],
) -> Option<Vec<T>> {
    let snf = smith_normal_form(a, cols);
    solve_left_with(&snf, b)
}

/// As [`solve_left`], reusing a precomputed Smith form of `A`.
pub fn solve_left_with<T: Integer + Signed + Clone>(snf: &SmithForm<T>, b: &[T]) -> Option<Vec<T>> {
    assert_eq!(b.len(), snf.cols);
    let bv: Vec<T> = (0..snf.cols)
        .map(|j| {
            b.iter()
                .zip(&snf.v)
                .fold(T::zero(), |acc, (x, row)| acc + x.clone() * row[j].clone())
        })
        .collect();
    let rank = snf.rank();
    if bv[rank..].iter().any(|x| !x.is_zero()) {
        return None;
    }
    let mut z = vec![T::zero(); snf.rows];
    for i in 0..rank {
        let (q, r) = bv[i].div_rem(&snf.diagonal[i]);
        if !r.is_zero() {
            return None;
        }
        z[i] = q;
    }
    let y = (0..snf.rows)
        .map(|k| {
            z.iter().zip(&snf.u).fold(T::zero(), |acc, (zi, row)| {
                acc + zi.clone() * row[k].clone()
            })
        })
        .collect();
    Some(y)
}

/// Rank over the rationals via fraction-free (Bareiss) elimination.
pub fn rank_rational<T: Integer + Signed + Clone>(a: &Matrix<T>) -> usize {
    let mut m = a.clone();
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut rank = 0;
    let mut prev = T::one();
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        for i in rank + 1..rows {
            for j in c + 1..cols {
                let v = m[rank][c].clone() * m[i][j].clone() - m[i][c].clone() * m[rank][j].clone();
                m[i][j] = v / prev.clone();
            }
            m[i][c] = T::zero();
        }
        prev = m[rank][c].clone();
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = ((r as u128 * b as u128) % p as u128) as u64;
        }
        b = ((b as u128 * b as u128) % p as u128) as u64;
        e >>= 1;
    }
    r
}

/// Rank over `F_p` for a prime `p`.
pub fn rank_mod_p(a: &Matrix<i64>, p: u64) -> usize {
    let mut m: Vec<Vec<u64>> = a
        .iter()
        .map(|row| row.iter().map(|&x| x.rem_euclid(p as i64) as u64).collect())
        .collect();
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(rank, piv);
        let inv = pow_mod(m[rank][c], p - 2, p);
        for j in c..cols {
            m[rank][j] = ((m[rank][j] as u128 * inv as u128) % p as u128) as u64;
        }
        for i in 0..rows {
            if i == rank || m[i][c] == 0 {
                continue;
            }
            let f = m[i][c];
            for j in c..cols {
                let sub = ((f as u128 * m[rank][j] as u128) % p as u128) as u64;
                m[i][j] = (m[i][j] + p - sub) % p;
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// A linear inequality `coeffs . u <= rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct Inequality<T: Clone + Integer> {
    pub coeffs: Vec<Ratio<T>>,
    pub rhs: Ratio<T>,
}

impl<T: Integer + Signed + Clone> Inequality<T> {
    pub fn new(coeffs: Vec<T>, rhs: T) -> Self {
        Inequality {
            coeffs: coeffs.into_iter().map(Ratio::from_integer).collect(),
            rhs: Ratio::from_integer(rhs),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LatticePoints<T> {
    Points(Vec<Vec<T>>),
    Unbounded,
}

/// Eliminates variable `var` by Fourier–Motzkin, returning the projected system.
fn eliminate<T: Integer + Signed + Clone>(
    system: &[Inequality<T>],
    var: usize,
) -> Vec<Inequality<T>> {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut out = Vec::new();
    for ineq in system {
        let c = &ineq.coeffs[var];
        if c.is_zero() {
            out.push(ineq.clone());
        } else if c.is_positive() {
            pos.push(ineq);
        } else {
            neg.push(ineq);
        }
    }
    for p in &pos {
        for n in &neg {
            // p: a x + P <= r ; n: -b x + N <= s ; combine b*p + a*n
            let a = p.coeffs[var].clone();
            let b = -n.coeffs[var].clone();
            let coeffs = p
                .coeffs
                .iter()
                .zip(&n.coeffs)
                .map(|(x, y)| x.clone() * b.clone() + y.clone() * a.clone())
                .collect();
            let rhs = p.rhs.clone() * b.clone() + n.rhs.clone() * a.clone();
            out.push(Inequality { coeffs, rhs });
        }
    }
    out
}

enum Bounds<T> {
    Empty,
    Range(Option<T>, Option<T>),
}

/// Integer bounds on variable 0 of `system`, after projecting out all other variables.
fn bounds_first<T: Integer + Signed + Clone>(system: &[Inequality<T>], dim: usize) -> Bounds<T> {
    let mut sys = system.to_vec();
    for v in (1..dim).rev() {
        sys = eliminate(&sys, v);
        dedup(&mut sys);
    }
    let mut lo: Option<Ratio<T>> = None;
    let mut hi: Option<Ratio<T>> = None;
    for ineq in &sys {
        let c = &ineq.coeffs[0];
        if c.is_zero() {
            if ineq.rhs.is_negative() {
                return Bounds::Empty;
            }
        } else if c.is_positive() {
            let b = ineq.rhs.clone() / c.clone();
            if hi.as_ref().is_none_or(|h| &b < h) {
                hi = Some(b);
            }
        } else {
            let b = ineq.rhs.clone() / c.clone();
            if lo.as_ref().is_none_or(|l| &b > l) {
                lo = Some(b);
            }
        }
    }
    let lo = lo.map(|l| l.ceil().to_integer());
    let hi = hi.map(|h| h.floor().to_integer());
    if let (Some(l), Some(h)) = (&lo, &hi) {
        if l > h {
            return Bounds::Empty;
        }
    }
    Bounds::Range(lo, hi)
}

fn dedup<T: Integer + Signed + Clone>(sys: &mut Vec<Inequality<T>>) {
    // normalise by the first nonzero coefficient magnitude, then drop duplicates
    for ineq in sys.iter_mut() {
        if let Some(c) = ineq.coeffs.iter().find(|c| !c.is_zero()).cloned() {
            let s = c.abs();
            for x in ineq.coeffs.iter_mut() {
                *x = x.clone() / s.clone();
            }
            ineq.rhs = ineq.rhs.clone() / s;
        }
    }
    let mut kept: Vec<Inequality<T>> = Vec::with_capacity(sys.len());
    for ineq in sys.drain(..) {
        if ineq.coeffs.iter().all(|c| c.is_zero()) && !ineq.rhs.is_negative() {
            continue;
        }
        if !kept.contains(&ineq) {
            kept.push(ineq);
        }
    }
    *sys = kept;
}

fn substitute_first<T: Integer + Signed + Clone>(
    system: &[Inequality<T>],
    value: &T,
) -> Vec<Inequality<T>> {
    let v = Ratio::from_integer(value.clone());
    system
        .iter()
        .map(|ineq| Inequality {
            coeffs: ineq.coeffs[1..].to_vec(),
            rhs: ineq.rhs.clone() - ineq.coeffs[0].clone() * v.clone(),
        })
        .collect()
}

/// All integer points of `{ u in Z^dim : A u <= b }`, or `Unbounded` if the set of
/// real solutions is nonempty and unbounded along some scanned axis.
pub fn lattice_points<T: Integer + Signed + Clone>(
    system: &[Inequality<T>],
    dim: usize,
) -> LatticePoints<T> {
    let mut out = Vec::new();
    let mut prefix = Vec::new();
    if collect_points(system, dim, &mut prefix, &mut out) {
        LatticePoints::Points(out)
    } else {
        LatticePoints::Unbounded
    }
}

fn collect_points<T: Integer + Signed + Clone>(
    system: &[Inequality<T>],
    dim: usize,
    prefix: &mut Vec<T>,
    out: &mut Vec<Vec<T>>,
) -> bool {
    if dim == 0 {
        if system.iter().all(|i| !i.rhs.is_negative()) {
            out.push(prefix.clone());
        }
        return true;
    }
    match bounds_first(system, dim) {
        Bounds::Empty => true,
        Bounds::Range(Some(lo), Some(hi)) => {
            let mut x = lo;
            while x <= hi {
                let sub = substitute_first(system, &x);
                prefix.push(x.clone());
                let ok = collect_points(&sub, dim - 1, prefix, out);
                prefix.pop();
                if !ok {
                    return false;
                }
                x = x + T::one();
            }
            true
        }
        Bounds::Range(_, _) => false,
    }
}
