mod input;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use stacktilt::abgroup::GroupElement;
use stacktilt::cuts::{self, LatticeQuotient};
use stacktilt::graded_order::GradedDegreeGroup;
use stacktilt::stacky_geom::Field;
use stacktilt::tilting::{self, TiltingClass};
use stacktilt::upper_sets::{
    self, canonical_form, Direction, EnumerateOptions, FiberPoset, Translation,
};

use input::Loaded;

const SCHEMA_VERSION: u32 = 1;
const DEFAULT_MAX_CLASSES: usize = 10_000;

#[derive(Parser)]
#[command(
    name = "stacktilt",
    version,
    about = "Tilting line bundles on toric Fano stacks of Picard rank one and two"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify tilting bundles made of line bundles.
    Classify {
        #[command(flatten)]
        common: Common,
        /// Write one DOT file per class into this directory.
        #[arg(long)]
        dot_dir: Option<PathBuf>,
    },
    /// Mutate a class at a minimal member, or find a mutation walk to another class.
    Mutate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        class: String,
        /// Member to mutate at, as comma-separated coordinates.
        #[arg(
            long,
            allow_hyphen_values = true,
            conflicts_with = "walk_to",
            required_unless_present = "walk_to"
        )]
        at: Option<String>,
        #[arg(long)]
        walk_to: Option<String>,
    },
    /// Dimensions of line-bundle cohomology.
    Cohomology {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        twist: String,
        /// List every degree, including zeros.
        #[arg(long)]
        all_r: bool,
    },
    /// Check vanishing of higher self-extensions with the homology oracle.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        class: Option<String>,
        /// An explicit set of line bundles instead, as `a,b;c,d;...`.
        #[arg(long, allow_hyphen_values = true, conflicts_with = "class")]
        bundles: Option<String>,
    },
    /// Cuts of a given type with their detectors.
    Cuts {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Paper)]
    mode: Mode,
    #[arg(long)]
    max_classes: Option<usize>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    /// Classes up to every translation preserving the poset.
    Paper,
    /// Classes up to the shift alone.
    Zp,
}

impl Mode {
    fn translation(self) -> Translation {
        match self {
            Mode::Paper => Translation::Full,
            Mode::Zp => Translation::Shift,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Mode::Paper => "paper",
            Mode::Zp => "zp",
        }
    }
}

/// A diagnostic with its exit code.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    kind: String,
    message: String,
}

impl Failure {
    pub fn input(kind: &str, message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            kind: kind.into(),
            message: message.into(),
        }
    }

    /// Named after the innermost error variant.
    pub fn from_error<E: std::fmt::Debug + std::fmt::Display>(e: E) -> Self {
        let dbg = format!("{e:?}");
        let mut s = dbg.as_str();
        for wrapper in ["Geom(", "Order(", "UpperSet(", "Cut(", "Group("] {
            if let Some(rest) = s.strip_prefix(wrapper) {
                s = rest;
            }
        }
        let kind: String = s
            .chars()
            .take_while(|c| c.is_alphanumeric() || *c == '_')
            .collect();
        Failure {
            code: 2,
            kind,
            message: e.to_string(),
        }
    }
}

fn emit(v: &Value) {
    use std::io::Write;
    let text = serde_json::to_string_pretty(v).expect("serializable");
    // a closed pipe downstream is not our failure
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            let diag = json!({
                "schema_version": SCHEMA_VERSION,
                "error": { "kind": f.kind, "message": f.message },
            });
            eprintln!(
                "{}",
                serde_json::to_string_pretty(&diag).expect("serializable")
            );
            ExitCode::from(f.code)
        }
    }
}

fn load(common: &Common) -> Result<Loaded, Failure> {
    if let Some(j) = common.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build_global()
            .map_err(|e| Failure::input("Jobs", e.to_string()))?;
    }
    let text = std::fs::read_to_string(&common.input)
        .map_err(|e| Failure::input("Io", format!("{}: {e}", common.input.display())))?;
    input::parse(&text)
}

fn max_classes(common: &Common) -> Result<usize, Failure> {
    if let Some(n) = common.max_classes {
        return Ok(n);
    }
    match std::env::var("STACKTILT_MAX_CLASSES") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::input("MalformedInput", format!("STACKTILT_MAX_CLASSES={v}"))),
        Err(_) => Ok(DEFAULT_MAX_CLASSES),
    }
}

fn run(cmd: Command) -> Result<u8, Failure> {
    match cmd {
        Command::Classify { common, dot_dir } => classify(&common, dot_dir.as_deref()),
        Command::Mutate {
            common,
            class,
            at,
            walk_to,
        } => mutate(&common, &class, at.as_deref(), walk_to.as_deref()),
        Command::Cohomology {
            common,
            twist,
            all_r,
        } => cohomology(&common, &twist, all_r),
        Command::Verify {
            common,
            class,
            bundles,
        } => verify(&common, class.as_deref(), bundles.as_deref()),
        Command::Cuts { common } => cut_report(&common),
    }
}

fn stack(loaded: Loaded) -> Result<(Arc<GradedDegreeGroup>, Loaded), Failure> {
    match &loaded {
        Loaded::Stack { ctx, .. } => Ok((ctx.clone(), loaded)),
        Loaded::Cuts { .. } => Err(Failure::input(
            "MalformedInput",
            "this command needs a polytope or a group",
        )),
    }
}

struct Entry {
    id: String,
    class: TiltingClass,
}

struct BaseInfo {
    base: Vec<GroupElement>,
    shift_count: usize,
    full_count: usize,
    ids: Vec<String>,
}

struct Catalog {
    ctx: Arc<GradedDegreeGroup>,
    mode: Mode,
    entries: Vec<Entry>,
    bases: Vec<BaseInfo>,
}

fn class_id(class: &TiltingClass) -> String {
    let key = serde_json::to_string(&(&class.base, &class.bundles)).expect("serializable");
    let digest = Sha256::digest(key.as_bytes());
    digest.iter().take(6).map(|b| format!("{b:02x}")).collect()
}

fn catalog(ctx: &Arc<GradedDegreeGroup>, common: &Common) -> Result<Catalog, Failure> {
    let limit = max_classes(common)?;
    let mode = common.mode;
    let entry = |class: TiltingClass| Entry {
        id: class_id(&class),
        class,
    };
    match ctx.group().free_rank() {
        1 => {
            let classes = tilting::classify_rank1(ctx, mode.translation(), limit)
                .map_err(Failure::from_error)?;
            Ok(Catalog {
                ctx: ctx.clone(),
                mode,
                entries: classes.into_iter().map(entry).collect(),
                bases: vec![],
            })
        }
        _ => {
            let res = tilting::classify_rank2(ctx, mode.translation(), limit)
                .map_err(Failure::from_error)?;
            let mut entries = Vec::new();
            let mut bases = Vec::new();
            for g in res.groups {
                let ids = g.classes.iter().map(class_id).collect();
                bases.push(BaseInfo {
                    base: g.base,
                    shift_count: g.shift_count,
                    full_count: g.full_count,
                    ids,
                });
                entries.extend(g.classes.into_iter().map(entry));
            }
            Ok(Catalog {
                ctx: ctx.clone(),
                mode,
                entries,
                bases,
            })
        }
    }
}

impl Catalog {
    fn find(&self, id: &str) -> Result<&Entry, Failure> {
        self.entries
            .iter()
            .find(|e| e.id == id)
            .ok_or_else(|| Failure::input("UnknownClass", format!("no class {id}")))
    }

    fn poset(&self, class: &TiltingClass) -> Result<FiberPoset, Failure> {
        tilting::poset_of(&self.ctx, class).map_err(Failure::from_error)
    }

    fn id_of(&self, class: &TiltingClass, poset: &FiberPoset) -> Option<String> {
        let canon = canonical_form(poset, &class.rep, self.mode.translation());
        self.entries
            .iter()
            .find(|e| e.class.base == class.base && e.class.rep == canon)
            .map(|e| e.id.clone())
    }

    /// The class an APR mutation lands in.
    fn mutated(
        &self,
        entry: &Entry,
        at: &GroupElement,
    ) -> Result<(TiltingClass, Option<String>), Failure> {
        let poset = self.poset(&entry.class)?;
        let next = tilting::apr_mutate(&self.ctx, &entry.class, at).map_err(Failure::from_error)?;
        let id = self.id_of(&next, &poset);
        Ok((next, id))
    }

    fn neighbors(&self, entry: &Entry) -> Result<Vec<Value>, Failure> {
        let poset = self.poset(&entry.class)?;
        let mut out = Vec::new();
        for m in upper_sets::mutable_elements(&poset, &entry.class.rep) {
            let (_, id) = self.mutated(entry, &m)?;
            out.push(json!({ "at": m, "to": id }));
        }
        Ok(out)
    }
}

fn quiver_json(class: &TiltingClass) -> Value {
    let q = &class.quiver;
    json!({
        "vertices": q.vertices,
        "arrows": q.arrows.iter().map(|a| json!({ "source": a.source, "target": a.target, "label": a.label })).collect::<Vec<_>>(),
        "relations": q.relations,
    })
}

fn group_json(ctx: &GradedDegreeGroup) -> Value {
    json!({
        "free_rank": ctx.group().free_rank(),
        "torsion_orders": ctx.group().torsion_orders(),
        "degrees": ctx.degrees(),
        "names": ctx.names(),
    })
}

fn classify(common: &Common, dot_dir: Option<&Path>) -> Result<u8, Failure> {
    let (ctx, _) = stack(load(common)?)?;
    let cat = catalog(&ctx, common)?;
    if let Some(dir) = dot_dir {
        std::fs::create_dir_all(dir).map_err(|e| Failure::input("Io", e.to_string()))?;
        for e in &cat.entries {
            let path = dir.join(format!("{}.dot", e.id));
            std::fs::write(&path, e.class.quiver.to_dot(&e.id))
                .map_err(|err| Failure::input("Io", err.to_string()))?;
        }
    }
    let mut classes = Vec::new();
    for e in &cat.entries {
        classes.push(json!({
            "id": e.id,
            "base": e.class.base,
            "bundles": e.class.bundles,
            "quiver": quiver_json(&e.class),
            "neighbors": cat.neighbors(e)?,
            "verification": "by theorem",
        }));
    }
    let mut report = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "classify",
        "mode": cat.mode.name(),
        "group": group_json(&ctx),
        "class_count": cat.entries.len(),
        "classes": classes,
    });
    if !cat.bases.is_empty() {
        report["bases"] = cat
            .bases
            .iter()
            .map(|b| {
                json!({ "base": b.base, "shift_count": b.shift_count, "full_count": b.full_count, "classes": b.ids })
            })
            .collect();
    }
    emit(&report);
    Ok(0)
}

fn mutate(
    common: &Common,
    class: &str,
    at: Option<&str>,
    walk_to: Option<&str>,
) -> Result<u8, Failure> {
    let (ctx, loaded) = stack(load(common)?)?;
    let Loaded::Stack { user, .. } = &loaded else {
        unreachable!()
    };
    let cat = catalog(&ctx, common)?;
    let from = cat.find(class)?;
    let report = if let Some(at) = at {
        let m = input::element(&ctx, user.as_ref(), at)?;
        let (next, id) = cat.mutated(from, &m)?;
        json!({
            "schema_version": SCHEMA_VERSION,
            "command": "mutate",
            "from": from.id,
            "steps": [{ "element": m, "direction": "up" }],
            "result": { "id": id, "bundles": next.bundles },
        })
    } else {
        let to = cat.find(walk_to.expect("clap requires one of the two"))?;
        if to.class.base != from.class.base {
            return Err(Failure::input(
                "DifferentBases",
                "the two classes lie over different antichains of H",
            ));
        }
        let poset = cat.poset(&from.class)?;
        let mode = cat.mode.translation();
        let limit = max_classes(common)?;
        let steps = upper_sets::connect(&poset, &from.class.rep, &to.class.rep, mode, limit)
            .map_err(Failure::from_error)?;
        let end =
            upper_sets::replay(&poset, &from.class.rep, &steps).map_err(Failure::from_error)?;
        let reached = canonical_form(&poset, &end, mode) == to.class.rep;
        json!({
            "schema_version": SCHEMA_VERSION,
            "command": "mutate",
            "from": from.id,
            "to": to.id,
            "steps": steps.iter().map(|s| json!({
                "element": s.element,
                "direction": match s.direction { Direction::Up => "up", Direction::Down => "down" },
            })).collect::<Vec<_>>(),
            "result": { "bundles": end.sorted_elements(&poset), "reaches_target": reached },
        })
    };
    emit(&report);
    Ok(0)
}

fn cohomology(common: &Common, twist: &str, all_r: bool) -> Result<u8, Failure> {
    let (ctx, loaded) = stack(load(common)?)?;
    let Loaded::Stack {
        polytope,
        user,
        field,
        ..
    } = loaded
    else {
        unreachable!()
    };
    let g = input::element(&ctx, user.as_ref(), twist)?;
    let oracle = input::oracle(&ctx, &polytope, field)?;
    let d = oracle.polytope().dim();
    let mut dims = Vec::new();
    for r in 0..=d {
        let dim = oracle.cohomology_dim(&g, r).map_err(Failure::from_error)?;
        if all_r || dim > 0 {
            dims.push(json!({ "r": r, "dim": dim }));
        }
    }
    emit(&json!({
        "schema_version": SCHEMA_VERSION,
        "command": "cohomology",
        "field": field_name(field),
        "twist": g,
        "dims": dims,
    }));
    Ok(0)
}

fn field_name(f: Field) -> String {
    match f {
        Field::Rational => "Q".into(),
        Field::Prime(p) => format!("F{p}"),
    }
}

fn verify(common: &Common, class: Option<&str>, bundles: Option<&str>) -> Result<u8, Failure> {
    let (ctx, loaded) = stack(load(common)?)?;
    let Loaded::Stack {
        polytope,
        user,
        field,
        ..
    } = loaded
    else {
        unreachable!()
    };
    let oracle = input::oracle(&ctx, &polytope, field)?;
    let targets: Vec<(Option<String>, Vec<GroupElement>)> = match bundles {
        Some(text) => {
            let els = text
                .split(';')
                .map(|t| input::element(&ctx, user.as_ref(), t))
                .collect::<Result<Vec<_>, _>>()?;
            vec![(None, els)]
        }
        None => {
            let cat = catalog(&ctx, common)?;
            match class {
                Some(id) => vec![(Some(id.to_string()), cat.find(id)?.class.bundles.clone())],
                None => cat
                    .entries
                    .iter()
                    .map(|e| (Some(e.id.clone()), e.class.bundles.clone()))
                    .collect(),
            }
        }
    };
    let mut all_passed = true;
    let mut reports = Vec::new();
    for (id, set) in targets {
        let rep = tilting::verify_class(&oracle, &set).map_err(Failure::from_error)?;
        all_passed &= rep.passed();
        reports.push(json!({
            "id": id,
            "bundles": set,
            "passed": rep.passed(),
            "checks": rep.checks.len(),
            "failures": rep.failures.iter().map(|f| json!({
                "from": f.from, "to": f.to, "degree": f.degree, "dim": f.dim,
            })).collect::<Vec<_>>(),
        }));
    }
    emit(&json!({
        "schema_version": SCHEMA_VERSION,
        "command": "verify",
        "field": field_name(field),
        "passed": all_passed,
        "reports": reports,
    }));
    Ok(if all_passed { 0 } else { 1 })
}

fn cut_report(common: &Common) -> Result<u8, Failure> {
    let (lattice, gamma) = match load(common)? {
        Loaded::Cuts { lattice, gamma } => (lattice, gamma),
        Loaded::Stack { ctx, .. } => {
            let corr = cuts::data_of_group(&ctx).map_err(Failure::from_error)?;
            (corr.lattice, corr.gamma)
        }
    };
    let mut report = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "cuts",
        "d": lattice.d(),
        "m": lattice.m(),
        "generators": lattice.generators(),
        "gamma": gamma,
    });
    if let Err(why) = lattice.is_admissible_type(&gamma) {
        report["admissible"] = json!(false);
        report["reason"] = json!(format!("inadmissible: {why}"));
        emit(&report);
        return Ok(0);
    }
    report["admissible"] = json!(true);
    report["cuts"] = json!(enumerate_cuts(&lattice, &gamma, max_classes(common)?)?);
    emit(&report);
    Ok(0)
}

/// Cuts of type `gamma`, found through the antichains of the group `G(B, gamma)`.
fn enumerate_cuts(
    lattice: &LatticeQuotient,
    gamma: &[i64],
    limit: usize,
) -> Result<Vec<Value>, Failure> {
    let grp = cuts::group_of(lattice, gamma).map_err(Failure::from_error)?;
    let graded = grp.graded.clone().ok_or_else(|| {
        Failure::input(
            "ZeroTypeEntry",
            "cuts are enumerated for strictly positive types only",
        )
    })?;
    let poset = FiberPoset::full(Arc::new(graded)).map_err(Failure::from_error)?;
    let opts = EnumerateOptions {
        mode: Translation::Shift,
        max_classes: limit,
        ..Default::default()
    };
    let reps = upper_sets::enumerate_classes(&poset, &opts).map_err(Failure::from_error)?;
    let mut out = Vec::new();
    for j in reps {
        let cut =
            cuts::cut_of_antichain(&grp.correspondence, &poset, &j).map_err(Failure::from_error)?;
        let f = cuts::detector_from_cut(lattice, &cut).map_err(Failure::from_error)?;
        let arrows: Vec<Value> = (0..lattice.n_arrows())
            .filter(|&a| cut.0[a])
            .map(|a| {
                let (s, t, ty) = lattice.arrow_ends(a);
                json!({ "source": s, "target": t, "type": ty })
            })
            .collect();
        out.push(json!({
            "arrows": arrows,
            "detector": f.values,
            "bounding": cuts::is_bounding(lattice, &cut).map_err(Failure::from_error)?,
        }));
    }
    Ok(out)
}
