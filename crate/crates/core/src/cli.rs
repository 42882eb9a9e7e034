//! Command-line front end. `run` returns the exit code and captured output so it
//! can be driven from tests as well as from `main`.
//!
//! Exit codes: 0 success, 1 internal error, 2 invalid configuration, 3 vertex cap
//! exceeded, 4 invalid eigenfunction, 5 formula or characterisation mismatch,
//! 6 file I/O.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::cache::Cache;
use crate::eigen::{
    default_polar_witness, least_valid_t, theta1_elliptic, theta1_from_clique_pair,
    theta1_hyperbolic, theta1_polar, theta2_unitary, verify_eigenfunction, wdb, EigenError,
    Eigenfunction, EigenfunctionFile, WdbReport,
};
use crate::forms::{standard_form, Family};
use crate::gf::{FieldContext, GfError};
use crate::graph::{
    affine_closed_form, affine_delsarte_size_formula, affine_polar_graph, collinearity_graph,
    delsarte_cliques, edge_list, graph6, max_intersecting_delsarte_pair, polar_closed_form,
    spectrum, srg_check, GraphError, GraphJson, PolarGraph, SpectrumInfo, SrgParams,
};
use crate::linalg::Vector;
use crate::oracle::{
    check_characterisation, count_comparison, enumerate_bipartite_pairs,
    enumerate_isolated_clique_pairs, OracleError, PairCatalog,
};
use crate::polar::{expected_t, PolarSpace};

pub const DEFAULT_VERTEX_CAP: usize = 8192;

#[derive(Parser, Debug)]
#[command(name = "polar-eig", version, about = "Polar graphs and their minimum-support eigenfunctions")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a graph, verify strong regularity and print its parameters.
    Build(BuildArgs),
    /// Construct a minimum-support eigenfunction and verify it.
    Eigenfunction(EigenArgs),
    /// Enumerate isolated-clique or complete-bipartite pairs.
    Enumerate(EnumerateArgs),
    /// Compare the pair count with the closed formulas.
    CountCheck(GraphArgs),
    /// Re-check a stored eigenfunction against a freshly built graph.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CliFamily {
    #[value(name = "sp")]
    Sp,
    #[value(name = "o+")]
    OPlus,
    #[value(name = "o")]
    O,
    #[value(name = "o-")]
    OMinus,
    #[value(name = "u")]
    U,
    #[value(name = "vo+")]
    VoPlus,
    #[value(name = "vo-")]
    VoMinus,
}

impl CliFamily {
    fn polar(self) -> Option<Family> {
        match self {
            CliFamily::Sp => Some(Family::Symplectic),
            CliFamily::OPlus => Some(Family::Hyperbolic),
            CliFamily::O => Some(Family::Parabolic),
            CliFamily::OMinus => Some(Family::Elliptic),
            CliFamily::U => Some(Family::Unitary),
            CliFamily::VoPlus | CliFamily::VoMinus => None,
        }
    }

    fn affine_epsilon(self) -> Option<i8> {
        match self {
            CliFamily::VoPlus => Some(1),
            CliFamily::VoMinus => Some(-1),
            _ => None,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    /// Largest graph to build.
    #[arg(long, default_value_t = DEFAULT_VERTEX_CAP)]
    cap: usize,
    /// Cache directory; defaults to $POLAR_EIG_CACHE.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct GraphArgs {
    #[arg(long, value_enum)]
    family: CliFamily,
    /// Rank of the polar space (Sp, O+, O, O−, U).
    #[arg(long)]
    n: Option<usize>,
    /// Half the dimension for affine graphs (VO+, VO−).
    #[arg(long)]
    m: Option<usize>,
    /// Field order, a prime power.
    #[arg(long)]
    q: u64,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ExportFormat {
    EdgeList,
    Graph6,
    Json,
}

#[derive(Args, Debug)]
struct BuildArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Write the graph to this file.
    #[arg(long)]
    export: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ExportFormat::EdgeList)]
    format: ExportFormat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Construct {
    #[value(name = "theta1-polar")]
    Theta1Polar,
    #[value(name = "theta1-hyperbolic")]
    Theta1Hyperbolic,
    #[value(name = "theta1-elliptic")]
    Theta1Elliptic,
    #[value(name = "theta1-cliquepair")]
    Theta1CliquePair,
    #[value(name = "theta2-unitary")]
    Theta2Unitary,
}

impl Construct {
    fn name(self) -> &'static str {
        match self {
            Construct::Theta1Polar => "theta1-polar",
            Construct::Theta1Hyperbolic => "theta1-hyperbolic",
            Construct::Theta1Elliptic => "theta1-elliptic",
            Construct::Theta1CliquePair => "theta1-cliquepair",
            Construct::Theta2Unitary => "theta2-unitary",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FunctionFormat {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct EigenArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long, value_enum)]
    construct: Construct,
    /// Write the eigenfunction to this file.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FunctionFormat::Json)]
    format: FunctionFormat,
    /// Index of L among the singular subspaces of dimension n−2.
    #[arg(long)]
    l_index: Option<usize>,
    /// Indices of M and N among the maximals through L, as `i,j`.
    #[arg(long)]
    pair: Option<String>,
    /// Index of the maximal M (elliptic construction).
    #[arg(long)]
    maximal: Option<usize>,
    /// Vertex index of the shift v (affine constructions).
    #[arg(long)]
    v: Option<usize>,
    /// Vertex index of t (elliptic construction).
    #[arg(long)]
    t: Option<usize>,
    /// Code of the primitive element β (odd unitary construction).
    #[arg(long)]
    beta: Option<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PairKindArg {
    Isolated,
    Bipartite,
}

#[derive(Args, Debug)]
struct EnumerateArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long, value_enum, default_value_t = PairKindArg::Isolated)]
    kind: PairKindArg,
    /// Part size; defaults to θ1+1 for isolated cliques and −θ2 for bipartite pairs.
    #[arg(long)]
    size: Option<usize>,
    /// Write the full catalog as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Search a characterisation witness for every isolated-clique pair.
    #[arg(long)]
    check: bool,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Graph as family:n_or_m:q, e.g. sp:2:2 or vo-:2:3.
    #[arg(long)]
    graph: GraphSpec,
    /// Eigenfunction file (.json or .csv).
    #[arg(long)]
    function: PathBuf,
    /// Eigenvalue for CSV input.
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<i64>,
    #[command(flatten)]
    run: RunArgs,
}

/// `family:n_or_m:q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GraphSpec {
    pub family: CliFamily,
    pub param: usize,
    pub q: u64,
}

impl FromStr for GraphSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [fam, param, q] = parts[..] else {
            return Err(format!("expected family:n_or_m:q, got {s}"));
        };
        Ok(GraphSpec {
            family: CliFamily::from_str(fam, false)?,
            param: param.parse().map_err(|_| format!("bad rank or m: {param}"))?,
            q: q.parse().map_err(|_| format!("bad field order: {q}"))?,
        })
    }
}

impl GraphArgs {
    fn spec(&self) -> Result<GraphSpec, CliError> {
        let param = match (self.family.affine_epsilon(), self.n, self.m) {
            (Some(_), _, Some(m)) => m,
            (Some(_), _, None) => return Err(CliError::Config("affine families need --m".into())),
            (None, Some(n), _) => n,
            (None, None, _) if self.family == CliFamily::U => 2,
            (None, None, _) => return Err(CliError::Config("polar families need --n".into())),
        };
        Ok(GraphSpec {
            family: self.family,
            param,
            q: self.q,
        })
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Cap { vertices: u128, cap: usize },
    Invalid(String),
    Mismatch(String),
    Io(String),
    Internal(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Internal(_) => 1,
            CliError::Config(_) => 2,
            CliError::Cap { .. } => 3,
            CliError::Invalid(_) => 4,
            CliError::Mismatch(_) => 5,
            CliError::Io(_) => 6,
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Cap { vertices, cap } => {
                format!("graph would have {vertices} vertices, above the cap of {cap} (raise with --cap)")
            }
            CliError::Config(m)
            | CliError::Invalid(m)
            | CliError::Mismatch(m)
            | CliError::Io(m)
            | CliError::Internal(m) => m.clone(),
        }
    }
}

impl From<GfError> for CliError {
    fn from(e: GfError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::RankTooLow { .. } | GraphError::Form(_) | GraphError::Field(_) => {
                CliError::Config(e.to_string())
            }
            GraphError::Polar(crate::polar::PolarError::Cache(c)) => CliError::Io(c.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::WitnessNotFound { .. } | OracleError::ConstructionMissing { .. } => {
                CliError::Mismatch(e.to_string())
            }
            OracleError::Cache(c) => CliError::Io(c.to_string()),
            OracleError::Polar(crate::polar::PolarError::Cache(c)) => CliError::Io(c.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<EigenError> for CliError {
    fn from(e: EigenError) -> Self {
        match e {
            EigenError::NotAnEigenfunction { .. }
            | EigenError::ZeroFunction
            | EigenError::VertexOutOfRange { .. }
            | EigenError::GraphMismatch { .. }
            | EigenError::Format(_) => CliError::Invalid(e.to_string()),
            EigenError::Graph(g) => g.into(),
            EigenError::Polar(crate::polar::PolarError::Cache(c)) => CliError::Io(c.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

/// A built graph with its verified parameters. `space` is the polar space of the
/// form (for affine graphs, the quadric the graph is built on).
pub struct Instance {
    pub spec: GraphSpec,
    pub space: PolarSpace,
    pub graph: PolarGraph,
    pub params: SrgParams,
    pub spectrum: SpectrumInfo,
}

fn estimate_vertices(spec: &GraphSpec) -> Result<u128, CliError> {
    let q = spec.q as u128;
    match spec.family.polar() {
        None => Ok(q.pow(2 * spec.param as u32)),
        Some(fam) => {
            let n = spec.param as u32;
            let t = expected_t(fam, fam.ambient_dim(spec.param), spec.q as u32)
                .ok_or_else(|| CliError::Config(format!("{} needs a square field order", fam)))?
                as u128;
            // points of a rank-n space of order (q, t)
            Ok((q.pow(n) - 1) / (q - 1) * (q.pow(n.saturating_sub(1)) * t + 1))
        }
    }
}

impl Instance {
    pub fn build(spec: GraphSpec, cap: usize, cache: Option<&Cache>) -> Result<Self, CliError> {
        let field = FieldContext::from_order(spec.q)?;
        if spec.param == 0 {
            return Err(CliError::Config("rank and m must be positive".into()));
        }
        let vertices = estimate_vertices(&spec)?;
        if vertices > cap as u128 {
            return Err(CliError::Cap { vertices, cap });
        }
        let build_space = |fam: Family, dim: usize| -> Result<PolarSpace, CliError> {
            let form = standard_form(fam, dim, field.clone())
                .map_err(|e| CliError::Config(e.to_string()))?;
            PolarSpace::build(form, cache).map_err(|e| match e {
                crate::polar::PolarError::Cache(c) => CliError::Io(c.to_string()),
                other => CliError::Config(other.to_string()),
            })
        };
        let (space, graph) = match (spec.family.polar(), spec.family.affine_epsilon()) {
            (Some(fam), _) => {
                let space = build_space(fam, fam.ambient_dim(spec.param))?;
                let graph = collinearity_graph(&space)?;
                (space, graph)
            }
            (None, Some(eps)) => {
                let fam = if eps > 0 {
                    Family::Hyperbolic
                } else {
                    Family::Elliptic
                };
                let space = build_space(fam, 2 * spec.param)?;
                let graph = affine_polar_graph(spec.param, eps, field.clone())?;
                (space, graph)
            }
            (None, None) => unreachable!("every family is polar or affine"),
        };
        let params = srg_check(&graph)?;
        let spectrum = spectrum(&params)?;
        Ok(Instance {
            spec,
            space,
            graph,
            params,
            spectrum,
        })
    }

    /// The closed-form (θ1, θ2) for this family.
    pub fn closed_form(&self) -> (i64, i64) {
        let q = self.spec.q;
        match self.spec.family.affine_epsilon() {
            Some(eps) => affine_closed_form(q, self.spec.param as u32, eps),
            None => polar_closed_form(
                q,
                self.space.rank() as u32,
                self.space.descriptor().t() as u64,
            ),
        }
    }
}

#[derive(Serialize)]
struct BuildSummary {
    graph: String,
    v: u64,
    k: u64,
    lambda: u64,
    mu: u64,
    theta1: i64,
    theta2: i64,
    mult_theta1: u64,
    mult_theta2: u64,
    closed_form_theta1: i64,
    closed_form_theta2: i64,
    delsarte_size: Option<u64>,
    nexus: Option<u64>,
    wdb_theta1: u64,
    wdb_theta2: u64,
    notes: Vec<String>,
}

#[derive(Serialize)]
struct EigenSummary {
    graph: String,
    construction: &'static str,
    support: Vec<usize>,
    report: WdbReport,
}

#[derive(Serialize)]
struct CharacterisationSummary {
    pairs: usize,
    witnessed: usize,
    constructed: usize,
}

#[derive(Serialize)]
struct EnumerateSummary {
    graph: String,
    kind: &'static str,
    size: usize,
    total: usize,
    outside_regular: Option<usize>,
    /// Pairs whose ±1 function verified as an eigenfunction (θ1 for isolated cliques,
    /// θ2 for outside-regular bipartite pairs); absent when the size is not optimal.
    verified_eigenfunctions: Option<usize>,
    characterisation: Option<CharacterisationSummary>,
}

#[derive(Serialize)]
struct VerifySummary {
    graph: String,
    valid: bool,
    report: Option<WdbReport>,
    error: Option<String>,
    vertex: Option<usize>,
}

fn json<T: Serialize>(x: &T) -> String {
    let mut s = serde_json::to_string_pretty(x).expect("output serializes");
    s.push('\n');
    s
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn open_cache(run: &RunArgs) -> Result<Option<Cache>, CliError> {
    let cache = match &run.cache_dir {
        Some(dir) => Cache::new(dir).map(Some),
        None => Cache::from_env(),
    };
    cache.map_err(|e| CliError::Io(e.to_string()))
}

fn cmd_build(args: &BuildArgs, out: &mut String) -> Result<(), CliError> {
    let cache = open_cache(&args.graph.run)?;
    let inst = Instance::build(args.graph.spec()?, args.graph.run.cap, cache.as_ref())?;
    let s = &inst.spectrum;
    let (cf1, cf2) = inst.closed_form();
    let mut notes = Vec::new();
    if (cf1, cf2) != (s.theta1, s.theta2) {
        notes.push(format!(
            "closed-form eigenvalues ({cf1}, {cf2}) differ from ({}, {})",
            s.theta1, s.theta2
        ));
    }
    if let Some(eps) = inst.spec.family.affine_epsilon() {
        let literal = affine_delsarte_size_formula(inst.spec.q, inst.spec.param as u32, eps);
        let agrees = s
            .delsarte_size()
            .is_some_and(|d| literal == num_rational::BigRational::from_integer(d.into()));
        if !agrees {
            notes.push(format!(
                "affine clique-size formula gives {literal}; the bound 1+k/(-theta2) = 1+{}/{} is used instead",
                s.k,
                s.m()
            ));
        }
    }
    let summary = BuildSummary {
        graph: inst.graph.label().to_string(),
        v: inst.params.v,
        k: inst.params.k,
        lambda: inst.params.lambda,
        mu: inst.params.mu,
        theta1: s.theta1,
        theta2: s.theta2,
        mult_theta1: s.mult_theta1,
        mult_theta2: s.mult_theta2,
        closed_form_theta1: cf1,
        closed_form_theta2: cf2,
        delsarte_size: s.delsarte_size(),
        nexus: s.delsarte_size().and(s.delsarte_nexus(&inst.params)),
        wdb_theta1: wdb(s.theta1, &inst.params)?,
        wdb_theta2: wdb(s.theta2, &inst.params)?,
        notes,
    };
    if let Some(path) = &args.export {
        let text = match args.format {
            ExportFormat::EdgeList => edge_list(&inst.graph),
            ExportFormat::Graph6 => graph6(&inst.graph) + "\n",
            ExportFormat::Json => json(&GraphJson::new(&inst.graph)),
        };
        write_file(path, &text)?;
    }
    out.push_str(&json(&summary));
    Ok(())
}

fn parse_pair(s: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Config(format!("--pair expects i,j, got {s}"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

fn pick<T: Clone>(items: &[T], i: usize, what: &str) -> Result<T, CliError> {
    items
        .get(i)
        .cloned()
        .ok_or_else(|| CliError::Config(format!("{what} index {i} out of range (0..{})", items.len())))
}

fn vertex_vector(g: &PolarGraph, i: Option<usize>, dim: usize) -> Result<Vector, CliError> {
    match i {
        None => Ok(Vector::zero(dim)),
        Some(i) if i < g.order() => Ok(g.vertex(i).clone()),
        Some(i) => Err(CliError::Config(format!("vertex {i} out of range"))),
    }
}

fn polar_witness(
    inst: &Instance,
    args: &EigenArgs,
) -> Result<
    (
        crate::polar::SingularSubspace,
        crate::polar::SingularSubspace,
        crate::polar::SingularSubspace,
    ),
    CliError,
> {
    let space = &inst.space;
    if args.l_index.is_none() && args.pair.is_none() {
        return Ok(default_polar_witness(space)?);
    }
    let dim = space.rank() as isize - 2;
    let ls = space
        .singular_subspaces(dim)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let l = pick(ls, args.l_index.unwrap_or(0), "L")?;
    let sigma: Vec<_> = space.sigma(&l).into_iter().cloned().collect();
    let (i, j) = args.pair.as_deref().map(parse_pair).transpose()?.unwrap_or((0, 1));
    Ok((l, pick(&sigma, i, "M")?, pick(&sigma, j, "N")?))
}

fn construct(inst: &Instance, args: &EigenArgs) -> Result<Eigenfunction, CliError> {
    let fam = inst.spec.family;
    let wrong = || {
        CliError::Config(format!(
            "{} does not apply to {}",
            args.construct.name(),
            inst.graph.label()
        ))
    };
    let dim = inst.space.form().dim();
    match args.construct {
        Construct::Theta1Polar => {
            if fam.polar().is_none() {
                return Err(wrong());
            }
            let (l, m, n) = polar_witness(inst, args)?;
            Ok(theta1_polar(&inst.space, &l, &m, &n)?)
        }
        Construct::Theta1Hyperbolic => {
            if fam != CliFamily::VoPlus {
                return Err(wrong());
            }
            let (l, m, n) = polar_witness(inst, args)?;
            let v = vertex_vector(&inst.graph, args.v, dim)?;
            Ok(theta1_hyperbolic(&inst.graph, &inst.space, &v, &l, &m, &n)?)
        }
        Construct::Theta1Elliptic => {
            if fam != CliFamily::VoMinus {
                return Err(wrong());
            }
            let m = pick(inst.space.maximals(), args.maximal.unwrap_or(0), "maximal")?;
            let v = vertex_vector(&inst.graph, args.v, dim)?;
            let t = match args.t {
                Some(_) => vertex_vector(&inst.graph, args.t, dim)?,
                None => least_valid_t(&inst.space, &m).ok_or_else(wrong)?,
            };
            Ok(theta1_elliptic(&inst.graph, &inst.space, &v, &m, &t)?)
        }
        Construct::Theta1CliquePair => {
            let cliques = delsarte_cliques(&inst.graph, &inst.params, &inst.spectrum);
            let (c0, c1) = max_intersecting_delsarte_pair(&cliques).map_err(|e| {
                CliError::Config(format!("{} on {}: {e}", args.construct.name(), inst.graph.label()))
            })?;
            Ok(theta1_from_clique_pair(
                &inst.graph,
                &inst.params,
                &cliques,
                &c0,
                &c1,
            )?)
        }
        Construct::Theta2Unitary => {
            if fam != CliFamily::U || dim != 4 {
                return Err(wrong());
            }
            let beta = match args.beta {
                None => None,
                Some(code) => {
                    let f = inst.space.field();
                    let b = f
                        .elem(code)
                        .filter(|&b| f.is_primitive(b))
                        .ok_or_else(|| CliError::Config(format!("{code} is not a primitive element")))?;
                    Some(b)
                }
            };
            Ok(theta2_unitary(&inst.graph, beta)?)
        }
    }
}

fn function_text(f: &Eigenfunction, format: FunctionFormat) -> Result<String, CliError> {
    Ok(match format {
        FunctionFormat::Json => EigenfunctionFile::from_function(f)?.to_json() + "\n",
        FunctionFormat::Csv => f.to_csv(),
    })
}

fn cmd_eigenfunction(args: &EigenArgs, out: &mut String) -> Result<(), CliError> {
    let cache = open_cache(&args.graph.run)?;
    let inst = Instance::build(args.graph.spec()?, args.graph.run.cap, cache.as_ref())?;
    let f = construct(&inst, args)?;
    if let Some(path) = &args.out {
        write_file(path, &function_text(&f, args.format)?)?;
    }
    let report = verify_eigenfunction(&inst.graph, &inst.params, &f)?;
    let tight = report.tight;
    out.push_str(&json(&EigenSummary {
        graph: inst.graph.label().to_string(),
        construction: args.construct.name(),
        support: f.support(),
        report,
    }));
    if !tight {
        return Err(CliError::Invalid("eigenfunction verified but its support is not tight".into()));
    }
    Ok(())
}

fn cmd_enumerate(args: &EnumerateArgs, out: &mut String) -> Result<(), CliError> {
    let cache = open_cache(&args.graph.run)?;
    let inst = Instance::build(args.graph.spec()?, args.graph.run.cap, cache.as_ref())?;
    let s = &inst.spectrum;
    let (catalog, optimal, theta) = match args.kind {
        PairKindArg::Isolated => {
            let size = args.size.unwrap_or(s.theta1 as usize + 1);
            let cat = enumerate_isolated_clique_pairs(&inst.graph, size, cache.as_ref())?;
            (cat, size as i64 == s.theta1 + 1, s.theta1)
        }
        PairKindArg::Bipartite => {
            let size = args.size.unwrap_or(-s.theta2 as usize);
            let cat = enumerate_bipartite_pairs(&inst.graph, size, cache.as_ref())?;
            (cat, size as i64 == -s.theta2, s.theta2)
        }
    };
    let verified = if optimal {
        let mut count = 0;
        for p in catalog.pairs.iter().filter(|p| p.outside_regular != Some(false)) {
            let f = Eigenfunction::signed_indicator(&p.t0, &p.t1, theta, None)?;
            verify_eigenfunction(&inst.graph, &inst.params, &f)?;
            count += 1;
        }
        Some(count)
    } else {
        None
    };
    let characterisation = if args.check && args.kind == PairKindArg::Isolated {
        let r = check_characterisation(&inst.space, &inst.graph, &catalog)?;
        Some(CharacterisationSummary {
            pairs: r.pairs,
            witnessed: r.witnessed,
            constructed: r.constructed,
        })
    } else {
        None
    };
    if let Some(path) = &args.out {
        write_file(path, &json(&catalog))?;
    }
    out.push_str(&json(&EnumerateSummary {
        graph: inst.graph.label().to_string(),
        kind: match args.kind {
            PairKindArg::Isolated => "isolated_cliques",
            PairKindArg::Bipartite => "complete_bipartite",
        },
        size: catalog.size,
        total: catalog.total,
        outside_regular: catalog.outside_regular,
        verified_eigenfunctions: verified,
        characterisation,
    }));
    Ok(())
}

fn cmd_count_check(args: &GraphArgs, out: &mut String) -> Result<(), CliError> {
    let cache = open_cache(&args.run)?;
    let inst = Instance::build(args.spec()?, args.run.cap, cache.as_ref())?;
    let size = inst.spectrum.theta1 as usize + 1;
    let catalog: PairCatalog = enumerate_isolated_clique_pairs(&inst.graph, size, cache.as_ref())?;
    let cmp = count_comparison(&inst.space, inst.graph.provenance(), catalog.total as u64)
        .map_err(|e| CliError::Config(e.to_string()))?;
    out.push_str(&json(&cmp));
    if !cmp.agrees() {
        return Err(CliError::Mismatch(format!(
            "oracle {} vs printed {} and derived {}",
            cmp.oracle, cmp.printed, cmp.derived
        )));
    }
    Ok(())
}

fn read_function(args: &VerifyArgs, inst: &Instance) -> Result<Eigenfunction, CliError> {
    let text = fs::read_to_string(&args.function)
        .map_err(|e| CliError::Io(format!("{}: {e}", args.function.display())))?;
    let is_csv = args
        .function
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        let theta = args
            .theta
            .ok_or_else(|| CliError::Config("CSV input needs --theta".into()))?;
        Ok(Eigenfunction::from_csv(
            &text,
            theta,
            Some(inst.graph.provenance().clone()),
        )?)
    } else {
        Ok(EigenfunctionFile::from_json(&text)?.to_function()?)
    }
}

fn cmd_verify(args: &VerifyArgs, out: &mut String) -> Result<(), CliError> {
    let cache = open_cache(&args.run)?;
    let inst = Instance::build(args.graph, args.run.cap, cache.as_ref())?;
    let label = inst.graph.label().to_string();
    let outcome = match read_function(args, &inst) {
        Err(e) => Err((e, None)),
        Ok(f) => verify_eigenfunction(&inst.graph, &inst.params, &f).map_err(with_vertex),
    };
    match outcome {
        Ok(report) => {
            out.push_str(&json(&VerifySummary {
                graph: label,
                valid: true,
                report: Some(report),
                error: None,
                vertex: None,
            }));
            Ok(())
        }
        Err((err, vertex)) => {
            out.push_str(&json(&VerifySummary {
                graph: label,
                valid: false,
                report: None,
                error: Some(err.message()),
                vertex,
            }));
            Err(err)
        }
    }
}

fn with_vertex(e: EigenError) -> (CliError, Option<usize>) {
    let vertex = match &e {
        EigenError::NotAnEigenfunction { vertex, .. } | EigenError::VertexOutOfRange { vertex, .. } => {
            Some(*vertex)
        }
        _ => None,
    };
    (e.into(), vertex)
}

/// Exit code plus everything written to stdout and stderr.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn dispatch(command: &Command, out: &mut String) -> Result<(), CliError> {
    match command {
        Command::Build(a) => cmd_build(a, out),
        Command::Eigenfunction(a) => cmd_eigenfunction(a, out),
        Command::Enumerate(a) => cmd_enumerate(a, out),
        Command::CountCheck(a) => cmd_count_check(a, out),
        Command::Verify(a) => cmd_verify(a, out),
    }
}

fn workers(command: &Command) -> Option<usize> {
    match command {
        Command::Build(a) => a.graph.run.workers,
        Command::Eigenfunction(a) => a.graph.run.workers,
        Command::Enumerate(a) => a.graph.run.workers,
        Command::CountCheck(a) => a.run.workers,
        Command::Verify(a) => a.run.workers,
    }
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            let (stdout, stderr) = if e.use_stderr() {
                (String::new(), text)
            } else {
                (text, String::new())
            };
            return Outcome {
                code: e.exit_code(),
                stdout,
                stderr,
            };
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers(&cli.command) {
        if w == 0 {
            return Outcome {
                code: 2,
                stdout: String::new(),
                stderr: "error: --workers must be positive\n".into(),
            };
        }
        builder = builder.num_threads(w);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            return Outcome {
                code: 1,
                stdout: String::new(),
                stderr: format!("error: {e}\n"),
            }
        }
    };
    let mut stdout = String::new();
    let result = pool.install(|| dispatch(&cli.command, &mut stdout));
    match result {
        Ok(()) => Outcome {
            code: 0,
            stdout,
            stderr: String::new(),
        },
        Err(e) => Outcome {
            code: e.code(),
            stdout,
            stderr: format!("error: {}\n", e.message()),
        },
    }
}
