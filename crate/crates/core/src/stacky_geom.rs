//! Simplicial lattice polytopes, their Gale duals, and line-bundle cohomology of the
//! associated toric stacks via reduced homology of subcomplexes of the boundary.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abgroup::{self, CombinationSolver, FgAbelianGroup, GroupElement};
use crate::graded_order::{GradedDegreeGroup, OrderError};
use crate::linalg::{self, Inequality, LatticePoints, Matrix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeomError {
    #[error("expected vectors of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("need at least {needed} vertices, got {got}")]
    TooFewVertices { needed: usize, got: usize },
    #[error("vertex {index} is listed twice")]
    DuplicateVertex { index: usize },
    #[error("vertex {index} lies in the convex hull of vertices {witness:?}")]
    NotAVertex { index: usize, witness: Vec<usize> },
    #[error("vertices {vertices:?} lie on one facet hyperplane")]
    NotSimplicial { vertices: Vec<usize> },
    #[error("the origin is not an interior point")]
    OriginNotInterior,
    #[error("fiber over {twist} is unbounded where the homology is nonzero")]
    UnboundedContribution { twist: GroupElement },
    #[error("the polytope does not match the graded group")]
    Mismatch,
    #[error("twist {0} does not lie in the group")]
    NotInGroup(GroupElement),
    #[error(transparent)]
    Order(#[from] OrderError),
}

/// Coefficient field for homology.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Field {
    #[default]
    #[serde(rename = "Q")]
    Rational,
    #[serde(rename = "Fp")]
    Prime(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Facet {
    /// Vertex indices, increasing.
    pub vertices: Vec<usize>,
    /// Primitive outer normal `w` with `w . v <= offset` on the polytope.
    pub normal: Vec<i64>,
    pub offset: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StackyPolytope {
    dim: usize,
    vertices: Vec<Vec<i64>>,
    facets: Vec<Facet>,
    /// Proper faces (including the empty one) as vertex bitmasks, increasing.
    faces: Vec<u64>,
}

fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn big_matrix(m: &[Vec<i64>]) -> Matrix<BigInt> {
    m.iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect()
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// The unique solution of `A x = b` over the rationals, if `A` has full column rank
/// and the system is consistent.
fn solve_unique(a: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut m: Vec<Vec<BigRational>> = a
        .iter()
        .zip(b)
        .map(|(r, x)| r.iter().cloned().chain([x.clone()]).collect())
        .collect();
    let mut r = 0;
    for c in 0..cols {
        let p = (r..rows).find(|&i| !m[i][c].is_zero())?;
        m.swap(r, p);
        let piv = m[r][c].clone();
        for x in m[r].iter_mut() {
            *x /= piv.clone();
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..=cols {
                    let t = f.clone() * m[r][j].clone();
                    m[i][j] -= t;
                }
            }
        }
        r += 1;
    }
    if m[r..].iter().any(|row| !row[cols].is_zero()) {
        return None;
    }
    Some((0..cols).map(|c| m[c][cols].clone()).collect())
}

/// Subset of the other points whose hull contains `target` (Carathéodory search).
fn hull_witness(points: &[Vec<i64>], target: usize, dim: usize) -> Option<Vec<usize>> {
    let others: Vec<usize> = (0..points.len()).filter(|&i| i != target).collect();
    for k in 1..=(dim + 1).min(others.len()) {
        for sub in subsets(others.len(), k) {
            let idx: Vec<usize> = sub.iter().map(|&s| others[s]).collect();
            let mut a: Vec<Vec<BigRational>> = (0..dim)
                .map(|c| {
                    idx.iter()
                        .map(|&i| BigRational::from_integer(points[i][c].into()))
                        .collect()
                })
                .collect();
            a.push(vec![BigRational::from_integer(1.into()); k]);
            let mut b: Vec<BigRational> = points[target]
                .iter()
                .map(|&x| BigRational::from_integer(x.into()))
                .collect();
            b.push(BigRational::from_integer(1.into()));
            if let Some(lambda) = solve_unique(&a, &b) {
                if lambda.iter().all(|l| !l.is_negative()) {
                    return Some(idx);
                }
            }
        }
    }
    None
}

/// Validates a vertex list and computes its facets by brute force over `dim`-subsets.
pub fn parse_polytope(dim: usize, vertices: Vec<Vec<i64>>) -> Result<StackyPolytope, GeomError> {
    let n = vertices.len();
    if n < dim + 1 {
        return Err(GeomError::TooFewVertices {
            needed: dim + 1,
            got: n,
        });
    }
    assert!(n <= 64, "at most 64 vertices");
    for v in &vertices {
        if v.len() != dim {
            return Err(GeomError::DimensionMismatch {
                expected: dim,
                got: v.len(),
            });
        }
    }
    for i in 0..n {
        if vertices[..i].contains(&vertices[i]) {
            return Err(GeomError::DuplicateVertex { index: i });
        }
    }
    for i in 0..n {
        if let Some(witness) = hull_witness(&vertices, i, dim) {
            return Err(GeomError::NotAVertex { index: i, witness });
        }
    }
    let diffs: Vec<Vec<i64>> = vertices[1..]
        .iter()
        .map(|v| v.iter().zip(&vertices[0]).map(|(a, b)| a - b).collect())
        .collect();
    if linalg::rank_rational(&big_matrix(&diffs)) < dim {
        return Err(GeomError::OriginNotInterior);
    }
    let mut facets = Vec::new();
    for sub in subsets(n, dim) {
        let rows: Vec<Vec<i64>> = sub
            .iter()
            .map(|&i| vertices[i].iter().copied().chain([-1]).collect())
            .collect();
        let ker = linalg::right_kernel(&big_matrix(&rows), dim + 1);
        if ker.len() != 1 {
            continue;
        }
        let mut h: Vec<i64> = ker[0]
            .iter()
            .map(|x| x.to_i64().expect("small normal"))
            .collect();
        let (w, c) = h.split_at(dim);
        let vals: Vec<i64> = (0..n)
            .filter(|i| !sub.contains(i))
            .map(|i| dot(w, &vertices[i]) - c[0])
            .collect();
        if vals.iter().all(|&v| v >= 0) {
            h.iter_mut().for_each(|x| *x = -*x);
        } else if !vals.iter().all(|&v| v <= 0) {
            continue;
        }
        if vals.contains(&0) {
            let on: Vec<usize> = (0..n)
                .filter(|&i| dot(&h[..dim], &vertices[i]) == h[dim])
                .collect();
            return Err(GeomError::NotSimplicial { vertices: on });
        }
        let g = h[..dim].iter().fold(0i64, |acc, x| acc.gcd(x));
        let normal: Vec<i64> = h[..dim].iter().map(|x| x / g).collect();
        let offset = h[dim] / g;
        if offset <= 0 {
            return Err(GeomError::OriginNotInterior);
        }
        facets.push(Facet {
            vertices: sub,
            normal,
            offset,
        });
    }
    let mut faces = BTreeSet::new();
    for f in &facets {
        let mask: u64 = f.vertices.iter().map(|&i| 1u64 << i).sum();
        let mut s = mask;
        loop {
            faces.insert(s);
            if s == 0 {
                break;
            }
            s = (s - 1) & mask;
        }
    }
    Ok(StackyPolytope {
        dim,
        vertices,
        facets,
        faces: faces.into_iter().collect(),
    })
}

impl StackyPolytope {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Vec<i64>] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn faces(&self) -> &[u64] {
        &self.faces
    }

    /// Generators of the irrelevant ideal: for each facet, the product of the variables
    /// off it, as exponent vectors.
    pub fn irrelevant_monomials(&self) -> Vec<Vec<u32>> {
        self.facets
            .iter()
            .map(|f| {
                (0..self.n_vertices())
                    .map(|i| u32::from(!f.vertices.contains(&i)))
                    .collect()
            })
            .collect()
    }

    /// Faces all of whose vertices lie in `t` (a bitmask).
    pub fn subcomplex(&self, t: u64) -> Vec<u64> {
        self.faces.iter().copied().filter(|f| f & !t == 0).collect()
    }
}

/// Reduced homology dimensions `H~_k` for `k = -1 .. top`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomologyProfile {
    pub field: Field,
    pub dims: Vec<usize>,
}

impl HomologyProfile {
    pub fn get(&self, k: i64) -> usize {
        usize::try_from(k + 1)
            .ok()
            .and_then(|i| self.dims.get(i).copied())
            .unwrap_or(0)
    }

    pub fn is_acyclic(&self) -> bool {
        self.dims.iter().all(|&d| d == 0)
    }
}

fn boundary_rank(rows: &[u64], cols: &[u64], field: Field) -> usize {
    if rows.is_empty() || cols.is_empty() {
        return 0;
    }
    let index: HashMap<u64, usize> = cols.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut m = vec![vec![0i64; cols.len()]; rows.len()];
    for (r, &face) in rows.iter().enumerate() {
        let verts: Vec<u32> = (0..64).filter(|b| face >> b & 1 == 1).collect();
        for (j, &v) in verts.iter().enumerate() {
            let sign = if j % 2 == 0 { 1 } else { -1 };
            m[r][index[&(face & !(1u64 << v))]] = sign;
        }
    }
    match field {
        Field::Rational => linalg::rank_rational(&big_matrix(&m)),
        Field::Prime(p) => linalg::rank_mod_p(&m, p),
    }
}

/// Reduced homology of a simplicial complex given by all its faces (the empty face
/// included), in degrees `-1 ..= top`.
pub fn reduced_homology(faces: &[u64], top: usize, field: Field) -> HomologyProfile {
    let by_size: Vec<Vec<u64>> = (0..=top + 2)
        .map(|s| {
            faces
                .iter()
                .copied()
                .filter(|f| f.count_ones() as usize == s)
                .collect()
        })
        .collect();
    // rank of the boundary out of faces of size s
    let ranks: Vec<usize> = (0..=top + 2)
        .map(|s| {
            if s == 0 {
                0
            } else {
                boundary_rank(&by_size[s], &by_size[s - 1], field)
            }
        })
        .collect();
    let dims = (0..=top + 1)
        .map(|s| by_size[s].len() - ranks[s] - ranks[s + 1])
        .collect();
    HomologyProfile { field, dims }
}

/// The graded group of a polytope: `Z^n` modulo the rows of the transposed vertex
/// matrix, with degrees the images of the unit vectors.
pub fn gale_dual(p: &StackyPolytope) -> Result<GradedDegreeGroup, GeomError> {
    let n = p.n_vertices();
    let rows: Vec<Vec<i64>> = (0..p.dim)
        .map(|j| p.vertices.iter().map(|v| v[j]).collect())
        .collect();
    let mut group = FgAbelianGroup::from_presentation(n, &rows).expect("presentation");
    let k = group.torsion_orders().len();
    if group.free_rank() == 1 && group.generator(0).0[k] < 0 {
        group.negate_free_axis(0);
    }
    let degrees = (0..n).map(|i| group.generator(i)).collect();
    Ok(GradedDegreeGroup::build(group, degrees)?)
}

/// A polytope whose Gale dual is the given graded group: vertex `i` is column `i` of the
/// relation lattice of the degrees.
pub fn polytope_from_group(ctx: &GradedDegreeGroup) -> Result<StackyPolytope, GeomError> {
    let k = abgroup::relation_lattice(ctx.group(), ctx.degrees());
    let vertices = (0..ctx.n_degrees())
        .map(|i| k.iter().map(|row| row[i]).collect())
        .collect();
    parse_polytope(k.len(), vertices)
}

/// Line-bundle cohomology by counting exponent vectors of each sign pattern.
#[derive(Debug, Clone)]
pub struct CohomologyOracle {
    polytope: StackyPolytope,
    ctx: Arc<GradedDegreeGroup>,
    field: Field,
    kernel: Vec<Vec<i64>>,
    solver: CombinationSolver,
    /// Homology of the subcomplex on each vertex subset, indexed by bitmask.
    profiles: Vec<HomologyProfile>,
}

impl CohomologyOracle {
    /// `ctx` must be graded isomorphic to the Gale dual of `polytope` via `x_i -> x_i`.
    pub fn new(
        polytope: StackyPolytope,
        ctx: Arc<GradedDegreeGroup>,
        field: Field,
    ) -> Result<Self, GeomError> {
        let n = polytope.n_vertices();
        if ctx.n_degrees() != n {
            return Err(GeomError::Mismatch);
        }
        let kernel = abgroup::relation_lattice(ctx.group(), ctx.degrees());
        let rows: Vec<Vec<i64>> = (0..polytope.dim)
            .map(|j| polytope.vertices.iter().map(|v| v[j]).collect())
            .collect();
        let hnf = linalg::hermite_rows(big_matrix(&rows), n);
        if big_matrix(&kernel) != hnf {
            return Err(GeomError::Mismatch);
        }
        let solver = CombinationSolver::new(ctx.group(), ctx.degrees());
        let top = polytope.dim - 1;
        let profiles = (0..1u64 << n)
            .into_par_iter()
            .map(|t| reduced_homology(&polytope.subcomplex(t), top, field))
            .collect();
        Ok(CohomologyOracle {
            polytope,
            ctx,
            field,
            kernel,
            solver,
            profiles,
        })
    }

    pub fn from_polytope(polytope: StackyPolytope, field: Field) -> Result<Self, GeomError> {
        let ctx = Arc::new(gale_dual(&polytope)?);
        Self::new(polytope, ctx, field)
    }

    pub fn from_group(ctx: Arc<GradedDegreeGroup>, field: Field) -> Result<Self, GeomError> {
        let polytope = polytope_from_group(&ctx)?;
        Self::new(polytope, ctx, field)
    }

    pub fn polytope(&self) -> &StackyPolytope {
        &self.polytope
    }

    pub fn ctx(&self) -> &GradedDegreeGroup {
        &self.ctx
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn profile(&self, t: u64) -> &HomologyProfile {
        &self.profiles[t as usize]
    }

    fn particular(&self, g: &GroupElement) -> Result<Vec<i64>, GeomError> {
        self.solver
            .solve(g)
            .ok_or_else(|| GeomError::NotInGroup(g.clone()))
    }

    /// Sign constraints on `a = base + u K (+ t * 1)`: `a_i >= 0` on `t`, `a_i <= -1` off it.
    fn sign_system(&self, base: &[i64], t: u64, with_shift: bool) -> Vec<Inequality<BigInt>> {
        let n = self.polytope.n_vertices();
        (0..n)
            .map(|i| {
                let mut coeffs: Vec<i64> = self.kernel.iter().map(|row| row[i]).collect();
                if with_shift {
                    coeffs.push(1);
                }
                let coeffs: Vec<BigInt> = coeffs.into_iter().map(BigInt::from).collect();
                if t >> i & 1 == 1 {
                    Inequality::new(
                        coeffs.into_iter().map(|c| -c).collect(),
                        BigInt::from(base[i]),
                    )
                } else {
                    Inequality::new(coeffs, BigInt::from(-1 - base[i]))
                }
            })
            .collect()
    }

    /// Number of exponent vectors of degree `g` with sign pattern `t`.
    pub fn pattern_count(&self, g: &GroupElement, t: u64) -> Result<Option<usize>, GeomError> {
        let base = self.particular(g)?;
        Ok(
            match linalg::lattice_points(&self.sign_system(&base, t, false), self.kernel.len()) {
                LatticePoints::Points(p) => Some(p.len()),
                LatticePoints::Unbounded => None,
            },
        )
    }

    /// `dim H^r(O(g))`.
    pub fn cohomology_dim(&self, g: &GroupElement, r: usize) -> Result<usize, GeomError> {
        let d = self.polytope.dim as i64;
        let k = d - r as i64 - 1;
        let mut total = 0;
        for t in 0..self.profiles.len() as u64 {
            let h = self.profiles[t as usize].get(k);
            if h == 0 {
                continue;
            }
            match self.pattern_count(g, t)? {
                Some(c) => total += c * h,
                None => return Err(GeomError::UnboundedContribution { twist: g.clone() }),
            }
        }
        Ok(total)
    }

    /// `dim Ext^r(O(g), O(h))`.
    pub fn ext_dim(
        &self,
        g: &GroupElement,
        h: &GroupElement,
        r: usize,
    ) -> Result<usize, GeomError> {
        self.cohomology_dim(&self.ctx.sub(h, g), r)
    }

    /// Whether `H^r(O(g + n p)) = 0` for every integer `n` and every `0 < r < d`.
    pub fn intermediate_vanishing_on_orbit(&self, g: &GroupElement) -> Result<bool, GeomError> {
        let d = self.polytope.dim as i64;
        let base = self.particular(g)?;
        for t in 0..self.profiles.len() as u64 {
            let p = &self.profiles[t as usize];
            if !(0..d - 1).any(|k| p.get(k) > 0) {
                continue;
            }
            match linalg::lattice_points(&self.sign_system(&base, t, true), self.kernel.len() + 1) {
                LatticePoints::Points(pts) if pts.is_empty() => {}
                LatticePoints::Points(_) => return Ok(false),
                LatticePoints::Unbounded => {
                    return Err(GeomError::UnboundedContribution { twist: g.clone() })
                }
            }
        }
        Ok(true)
    }
}
