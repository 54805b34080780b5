//! Input documents: a stacky polytope, a graded group, or cut data.

use std::sync::Arc;

use serde::Deserialize;
use stacktilt::abgroup::{FgAbelianGroup, GroupElement};
use stacktilt::cuts::LatticeQuotient;
use stacktilt::graded_order::GradedDegreeGroup;
use stacktilt::stacky_geom::{self, CohomologyOracle, Field, StackyPolytope};

use crate::Failure;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSpec {
    pub polytope: Option<PolytopeSpec>,
    pub group: Option<GroupSpec>,
    pub cuts: Option<CutSpec>,
    #[serde(default)]
    pub field: Field,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolytopeSpec {
    pub dim: usize,
    pub vertices: Vec<Vec<i64>>,
}

/// Degrees are written in generator coordinates: free coordinates first, then one
/// residue per torsion order.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub free_rank: usize,
    #[serde(default)]
    pub torsion_orders: Vec<i64>,
    pub degrees: Vec<Vec<i64>>,
    pub names: Option<Vec<String>>,
}

/// A cofinite subgroup of `Z^d` in the coordinates of the first `d` arrow types, and a type.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutSpec {
    pub d: usize,
    pub generators: Vec<Vec<i64>>,
    pub gamma: Vec<i64>,
}

/// What an input describes once validated.
pub enum Loaded {
    Stack {
        ctx: Arc<GradedDegreeGroup>,
        polytope: Option<StackyPolytope>,
        /// Generators of the input coordinates, used to read twists.
        user: Option<FgAbelianGroup>,
        field: Field,
    },
    Cuts {
        lattice: LatticeQuotient,
        gamma: Vec<i64>,
    },
}

pub fn parse(text: &str) -> Result<Loaded, Failure> {
    let spec: InputSpec =
        serde_json::from_str(text).map_err(|e| Failure::input("MalformedInput", e.to_string()))?;
    let present = [
        spec.polytope.is_some(),
        spec.group.is_some(),
        spec.cuts.is_some(),
    ]
    .iter()
    .filter(|&&b| b)
    .count();
    if present != 1 {
        return Err(Failure::input(
            "MalformedInput",
            "exactly one of polytope, group, cuts must be given",
        ));
    }
    if let Field::Prime(p) = spec.field {
        if p < 2 || (2..p).take_while(|k| k * k <= p).any(|k| p % k == 0) {
            return Err(Failure::input(
                "MalformedInput",
                format!("{p} is not a prime"),
            ));
        }
    }
    if let Some(p) = spec.polytope {
        let polytope =
            stacky_geom::parse_polytope(p.dim, p.vertices).map_err(Failure::from_error)?;
        let ctx = Arc::new(stacky_geom::gale_dual(&polytope).map_err(Failure::from_error)?);
        return Ok(Loaded::Stack {
            ctx,
            polytope: Some(polytope),
            user: None,
            field: spec.field,
        });
    }
    if let Some(g) = spec.group {
        if g.degrees.is_empty() {
            return Err(Failure::input("EmptyDegrees", "no degrees given"));
        }
        let group = FgAbelianGroup::from_free_then_torsion(g.free_rank, &g.torsion_orders)
            .map_err(Failure::from_error)?;
        let degrees = g
            .degrees
            .iter()
            .map(|d| group.canonicalize(d))
            .collect::<Result<Vec<GroupElement>, _>>()
            .map_err(Failure::from_error)?;
        let names = match g.names {
            Some(n) if n.len() != degrees.len() => {
                return Err(Failure::input(
                    "MalformedInput",
                    "one name per degree is required",
                ));
            }
            Some(n) => n,
            None => (1..=degrees.len()).map(|i| format!("x{i}")).collect(),
        };
        let ctx = GradedDegreeGroup::build_with(group.clone(), degrees, names, None)
            .map_err(Failure::from_error)?;
        return Ok(Loaded::Stack {
            ctx: Arc::new(ctx),
            polytope: None,
            user: Some(group),
            field: spec.field,
        });
    }
    let c = spec.cuts.expect("counted above");
    let lattice = LatticeQuotient::from_alpha(c.d, &c.generators).map_err(Failure::from_error)?;
    Ok(Loaded::Cuts {
        lattice,
        gamma: c.gamma,
    })
}

/// Parses `a,b,c` in the input's coordinates.
pub fn element(
    ctx: &GradedDegreeGroup,
    user: Option<&FgAbelianGroup>,
    text: &str,
) -> Result<GroupElement, Failure> {
    let coords = text
        .split(',')
        .map(|t| t.trim().parse::<i64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::input("MalformedElement", format!("{text:?}: {e}")))?;
    match user {
        Some(g) => g.canonicalize(&coords).map_err(Failure::from_error),
        None => ctx.group().element(&coords).map_err(Failure::from_error),
    }
}

pub fn oracle(
    ctx: &Arc<GradedDegreeGroup>,
    polytope: &Option<StackyPolytope>,
    field: Field,
) -> Result<CohomologyOracle, Failure> {
    match polytope {
        Some(p) => CohomologyOracle::new(p.clone(), ctx.clone(), field),
        None => CohomologyOracle::from_group(ctx.clone(), field),
    }
    .map_err(Failure::from_error)
}
