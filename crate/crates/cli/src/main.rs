// SPDX-License-Identifier: Apache-2.0
//! `maxlin`: tail dependence, identification and simulation of recursive
//! max-linear models from the command line.
//!
//! Exit status: 0 on success, 1 when the input is well formed but
//! mathematically rejected, 2 on malformed input or usage errors.

mod io;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use maxlin::graph::CausalOrdering;
use maxlin::identify::{
    enumerate_all, enumerate_all_rmwm, recover_from_ordering, recover_from_reachability,
    recover_from_reachability_rmwm, recover_rmwm_from_initials, IdentifiedModel,
};
use maxlin::mlcm::{is_mlcm, is_rmwm_mlcm, minimum_ml_dag, standardize, MlcmCheck, Rejection};
use maxlin::random::generate;
use maxlin::simulate::{empirical_tdm, sample};
use maxlin::taildep::{check_rmwm_tdm, tdm_from_std_mlcm, TdmFailure};
use maxlin::{
    Dag, EnumerateOptions, Error, GenConfig, MlcMatrix, ModelKind, NoiseFamily, NoiseSpec,
    ReachMatrix, StdMlcMatrix, TailDepMatrix, Tolerance,
};

use crate::io::{
    parse_nodes, read_matrix, read_model, render_dot, render_matrix, render_nodes, ModelFile,
};

#[derive(Parser)]
#[command(
    name = "maxlin",
    version,
    about = "Recursive max-linear models on DAGs"
)]
struct Cli {
    /// Numerical tolerance for zero tests and identities.
    #[arg(long, global = true, env = "MAXLIN_TOL", default_value_t = maxlin::tol::DEFAULT_EPS)]
    tol: f64,

    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tail dependence matrix of a model or of a standardized coefficient matrix.
    Tdm(TdmArgs),
    /// Standardize a coefficient matrix so that every column sums to one.
    Standardize(StandardizeArgs),
    /// Recover the standardized coefficient matrix from a tail dependence matrix.
    Recover(RecoverArgs),
    /// List every model whose tail dependence matrix is the given one.
    Enumerate(EnumerateArgs),
    /// Validate a coefficient matrix or a tail dependence matrix.
    Check(CheckArgs),
    /// Draw samples from a model and estimate its tail dependence matrix.
    Simulate(SimulateArgs),
    /// Generate a random model file.
    Gen(GenArgs),
    /// Graphviz description of a model's DAG.
    Dot(DotArgs),
}

#[derive(Args)]
#[command(group(ArgGroup::new("input").required(true).args(["model", "matrix"])))]
struct TdmArgs {
    #[arg(long)]
    model: Option<PathBuf>,
    /// Standardized coefficient matrix (CSV).
    #[arg(long)]
    matrix: Option<PathBuf>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("input").required(true).args(["model", "matrix"])))]
struct StandardizeArgs {
    #[arg(long)]
    model: Option<PathBuf>,
    /// Coefficient matrix (CSV); needs --alpha.
    #[arg(long, requires = "alpha")]
    matrix: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("structure").required(true).args(["reachability", "ordering", "initials"])))]
struct RecoverArgs {
    /// Tail dependence matrix (CSV).
    #[arg(long)]
    chi: PathBuf,
    /// 0/1 reachability matrix (CSV) of the generating DAG.
    #[arg(long)]
    reachability: Option<PathBuf>,
    /// Causal ordering, e.g. `2,1,3`.
    #[arg(long)]
    ordering: Option<String>,
    /// Initial nodes of a max-weighted model, e.g. `1,2`.
    #[arg(long)]
    initials: Option<String>,
    /// Use the max-weighted recursion with --reachability.
    #[arg(long, requires = "reachability")]
    rmwm: bool,
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(long)]
    chi: PathBuf,
    /// Only max-weighted models, one per candidate initial node set.
    #[arg(long)]
    rmwm: bool,
    /// Refuse matrices with more rows than this.
    #[arg(long, default_value_t = maxlin::identify::DEFAULT_MAX_D)]
    max_d: usize,
}

#[derive(Args)]
#[command(group(ArgGroup::new("mode").required(true).args(["mlcm", "rmwm", "tdm_on_dag"])))]
#[command(group(ArgGroup::new("dag").args(["model", "reachability"])))]
struct CheckArgs {
    /// Is this standardized matrix the coefficient matrix of some model?
    #[arg(long, value_name = "FILE")]
    mlcm: Option<PathBuf>,
    /// Is this standardized matrix that of a max-weighted model?
    #[arg(long, value_name = "FILE")]
    rmwm: Option<PathBuf>,
    /// Is --chi the tail dependence matrix of a max-weighted model on the
    /// DAG of --model or --reachability?
    #[arg(long, requires_all = ["chi", "dag"])]
    tdm_on_dag: bool,
    #[arg(long)]
    chi: Option<PathBuf>,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    reachability: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Pareto,
    Frechet,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Noise distribution; its tail index is the model's alpha.
    #[arg(long, value_enum, default_value = "frechet")]
    family: Family,
    /// Estimate the tail dependence matrix at this quantile level and print it.
    #[arg(long)]
    u: Option<f64>,
    /// Write the samples as CSV.
    #[arg(long)]
    samples: Option<PathBuf>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("kind").args(["polytree", "homogeneous", "max_weighted"])))]
struct GenArgs {
    /// Number of nodes.
    d: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Probability of each admissible edge.
    #[arg(long, default_value_t = 0.5)]
    density: f64,
    #[arg(long, default_value_t = 0.1)]
    weight_min: f64,
    #[arg(long, default_value_t = 10.0)]
    weight_max: f64,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long)]
    polytree: bool,
    /// Weights fixed by ancestor counts.
    #[arg(long)]
    homogeneous: bool,
    /// Weights making every path max-weighted.
    #[arg(long)]
    max_weighted: bool,
}

#[derive(Args)]
#[command(group(ArgGroup::new("input").required(true).args(["model", "matrix", "reachability"])))]
struct DotArgs {
    /// Edges labelled with their weights.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Minimum ML DAG of a standardized matrix, edges labelled with b̄_ki.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Transitive reduction of a reachability matrix.
    #[arg(long)]
    reachability: Option<PathBuf>,
}

enum Failure {
    /// Well-formed input that fails a mathematical condition.
    Rejected(String),
    /// Input that could not be read or used.
    Input(String),
}

type CmdResult = Result<String, Failure>;

fn input<T>(r: Result<T, String>) -> Result<T, Failure> {
    r.map_err(Failure::Input)
}

/// Library error message with 1-based node labels.
fn describe(e: &Error) -> String {
    match *e {
        Error::NodeOutOfRange { node, d } => format!("node {} is not in 1..={d}", node + 1),
        Error::SelfLoop(v) => format!("self-loop on node {}", v + 1),
        Error::DuplicateEdge(a, b) => format!("duplicate edge {} -> {}", a + 1, b + 1),
        Error::Cycle(v) => format!("the edges contain a directed cycle through node {}", v + 1),
        Error::InvalidEntry {
            row,
            col,
            value,
            reason,
        } => {
            format!(
                "entry ({}, {}) = {value} is invalid: {reason}",
                row + 1,
                col + 1
            )
        }
        Error::Asymmetric {
            row,
            col,
            upper,
            lower,
        } => format!(
            "matrix is not symmetric at ({}, {}): {upper} vs {lower}",
            row + 1,
            col + 1
        ),
        Error::IllConditionedZero { row, col, value } => format!(
            "entry ({}, {}) = {value:e} is too close to zero to classify",
            row + 1,
            col + 1
        ),
        Error::PatternMismatch { row, col } => format!(
            "sign of chi({}, {}) disagrees with the reachability matrix",
            row + 1,
            col + 1
        ),
        Error::NegativeEntry { row, col, value } => format!(
            "recursion produced a negative value {value:e} at ({}, {})",
            row + 1,
            col + 1
        ),
        Error::NonPositiveDiagonal { node, value } => format!(
            "recursion produced a non-positive diagonal entry {value:e} at node {}",
            node + 1
        ),
        Error::NotAClique(a, b) => format!("not a chi-clique: chi({}, {}) > 0", a + 1, b + 1),
        Error::NoInitialAncestor { node } => {
            format!(
                "node {} has no initial node with positive tail dependence",
                node + 1
            )
        }
        _ => e.to_string(),
    }
}

/// Errors raised while building inputs.
fn malformed(e: Error) -> Failure {
    Failure::Input(describe(&e))
}

/// Errors raised by an algorithm on validated inputs.
fn algorithmic(e: Error) -> Failure {
    match e {
        Error::TooLarge { .. }
        | Error::DimensionMismatch { .. }
        | Error::NodeOutOfRange { .. }
        | Error::NotAPermutation { .. }
        | Error::InvalidArgument(_)
        | Error::InvalidAlpha(_)
        | Error::TooFewExceedances { .. } => malformed(e),
        _ => Failure::Rejected(describe(&e)),
    }
}

fn tdm_failure(f: &TdmFailure) -> String {
    match *f {
        TdmFailure::SignPattern { i, j } => format!(
            "sign of chi({}, {}) disagrees with the common-ancestor pattern",
            i + 1,
            j + 1
        ),
        TdmFailure::NonPositiveDiagonal { node, value } => {
            format!(
                "diagonal coefficient of node {} is {value}, not positive",
                node + 1
            )
        }
        TdmFailure::Multiplicativity { j, k, i, lhs, rhs } => format!(
            "chi({j}, {i}) = {lhs} but chi({j}, {k}) chi({k}, {i}) = {rhs}",
            j = j + 1,
            k = k + 1,
            i = i + 1
        ),
        TdmFailure::CommonAncestorSum { i, j, lhs, rhs } => format!(
            "chi({}, {}) = {lhs} but the common-ancestor sum is {rhs}",
            i + 1,
            j + 1
        ),
    }
}

fn mlcm_rejection(c: &MlcmCheck) -> String {
    match &c.rejection {
        Some(Rejection::BadSignPattern(s)) => {
            format!("sign pattern is not a reachability matrix: {s}")
        }
        Some(Rejection::Mismatch {
            row,
            col,
            expected,
            found,
        }) => format!(
            "entry ({}, {}) is {expected} but the model on the minimum ML DAG gives {found}",
            row + 1,
            col + 1
        ),
        None => format!("worst residual {:e}", c.worst_residual),
    }
}

fn read_chi(path: &Path) -> Result<TailDepMatrix, Failure> {
    let m = input(read_matrix(path))?;
    TailDepMatrix::new(m)
        .map_err(|e| Failure::Input(format!("{}: {}", path.display(), describe(&e))))
}

fn read_std(path: &Path) -> Result<StdMlcMatrix, Failure> {
    let m = input(read_matrix(path))?;
    StdMlcMatrix::new(m)
        .map_err(|e| Failure::Input(format!("{}: {}", path.display(), describe(&e))))
}

fn read_reach(path: &Path) -> Result<ReachMatrix, Failure> {
    let m = input(read_matrix(path))?;
    ReachMatrix::from_sign_pattern(&m)
        .map_err(|e| Failure::Input(format!("{}: {}", path.display(), describe(&e))))
}

fn tolerance(eps: f64) -> Result<Tolerance, Failure> {
    if eps.is_finite() && eps >= 0.0 {
        Ok(Tolerance { eps })
    } else {
        Err(Failure::Input(format!(
            "tolerance must be finite and nonnegative, got {eps}"
        )))
    }
}

fn need_seed(seed: Option<u64>, command: &str) -> Result<u64, Failure> {
    seed.ok_or_else(|| {
        Failure::Input(format!(
            "`{command}` is randomized: pass --seed <N> so the result can be reproduced"
        ))
    })
}

fn run_tdm(a: &TdmArgs) -> CmdResult {
    let b = match (&a.model, &a.matrix) {
        (Some(p), _) => input(read_model(p))?.std_mlcm(),
        (None, Some(p)) => read_std(p)?,
        (None, None) => unreachable!("clap requires one input"),
    };
    Ok(render_matrix(tdm_from_std_mlcm(&b).as_array()))
}

fn run_standardize(a: &StandardizeArgs) -> CmdResult {
    let b = match (&a.model, &a.matrix) {
        (Some(p), _) => {
            let m = input(read_model(p))?;
            let alpha = a.alpha.unwrap_or(m.alpha());
            standardize(&m.mlcm(), alpha).map_err(malformed)?
        }
        (None, Some(p)) => {
            let m = MlcMatrix::new(input(read_matrix(p))?).map_err(malformed)?;
            standardize(&m, a.alpha.expect("clap requires alpha")).map_err(malformed)?
        }
        (None, None) => unreachable!("clap requires one input"),
    };
    Ok(render_matrix(b.as_array()))
}

fn run_recover(a: &RecoverArgs, tol: Tolerance) -> CmdResult {
    let chi = read_chi(&a.chi)?;
    let d = chi.dim();
    let b = if let Some(p) = &a.reachability {
        let r = read_reach(p)?;
        if a.rmwm {
            recover_from_reachability_rmwm(&chi, &r, tol)
        } else {
            recover_from_reachability(&chi, &r, tol)
        }
    } else if let Some(s) = &a.ordering {
        let order = input(parse_nodes(s, d))?;
        let sigma = CausalOrdering::from_order(order).map_err(malformed)?;
        recover_from_ordering(&chi, &sigma, tol)
    } else {
        let v0 = input(parse_nodes(
            a.initials.as_deref().expect("clap requires one"),
            d,
        ))?;
        recover_rmwm_from_initials(&chi, &v0.into_iter().collect(), tol)
    }
    .map_err(algorithmic)?;
    Ok(render_matrix(b.as_array()))
}

fn render_identified(out: &mut String, n: usize, total: usize, m: &IdentifiedModel) {
    let edges: Vec<String> = m
        .min_ml_dag
        .edges()
        .map(|(k, i)| format!("{}->{}", k + 1, i + 1))
        .collect();
    out.push_str(&format!("# model {n} of {total}\n"));
    out.push_str(&format!(
        "# initial nodes: {}\n",
        render_nodes(&m.initial_nodes)
    ));
    out.push_str(&format!(
        "# ordering: {}\n",
        render_nodes(m.ordering_used.order())
    ));
    out.push_str(&format!("# max-weighted: {}\n", m.max_weighted));
    out.push_str(&format!("# edges: {}\n", edges.join(" ")));
    out.push_str(&render_matrix(m.std_mlcm.as_array()));
}

fn run_enumerate(a: &EnumerateArgs, tol: Tolerance) -> CmdResult {
    let chi = read_chi(&a.chi)?;
    if chi.dim() > a.max_d {
        return Err(Failure::Input(format!(
            "d = {} exceeds --max-d {}; raise it explicitly to enumerate",
            chi.dim(),
            a.max_d
        )));
    }
    let models = if a.rmwm {
        enumerate_all_rmwm(&chi, tol)
    } else {
        enumerate_all(
            &chi,
            EnumerateOptions {
                tol,
                max_d: a.max_d,
            },
        )
    }
    .map_err(algorithmic)?;
    if models.is_empty() {
        let what = if a.rmwm {
            "max-weighted model"
        } else {
            "recursive max-linear model"
        };
        return Err(Failure::Rejected(format!(
            "not the tail dependence matrix of any {what}"
        )));
    }
    let mut out = String::new();
    for (n, m) in models.iter().enumerate() {
        if n > 0 {
            out.push('\n');
        }
        render_identified(&mut out, n + 1, models.len(), m);
    }
    Ok(out)
}

fn run_check(a: &CheckArgs, tol: Tolerance) -> CmdResult {
    if let Some(p) = &a.mlcm {
        let c = is_mlcm(&read_std(p)?, tol);
        return if c.valid {
            Ok("accepted\n".into())
        } else {
            Err(Failure::Rejected(mlcm_rejection(&c)))
        };
    }
    if let Some(p) = &a.rmwm {
        let c = is_rmwm_mlcm(&read_std(p)?, tol).map_err(algorithmic)?;
        return if c.valid {
            Ok("accepted\n".into())
        } else {
            Err(Failure::Rejected(mlcm_rejection(&c)))
        };
    }
    let chi = read_chi(a.chi.as_deref().expect("clap requires --chi"))?;
    let dag = match (&a.model, &a.reachability) {
        (Some(p), _) => input(read_model(p))?.dag().clone(),
        (None, Some(p)) => Dag::from_reachability(&read_reach(p)?),
        (None, None) => unreachable!("clap requires a DAG"),
    };
    if dag.node_count() != chi.dim() {
        return Err(Failure::Input(format!(
            "the DAG has {} nodes but the matrix is {}x{}",
            dag.node_count(),
            chi.dim(),
            chi.dim()
        )));
    }
    let report = check_rmwm_tdm(&dag, &chi, tol).map_err(algorithmic)?;
    match (report.accepted, report.std_mlcm, report.failure) {
        (true, Some(b), _) => Ok(format!("# accepted\n{}", render_matrix(b.as_array()))),
        (_, _, Some(f)) => Err(Failure::Rejected(tdm_failure(&f))),
        _ => Err(Failure::Rejected("rejected".into())),
    }
}

fn run_simulate(a: &SimulateArgs) -> CmdResult {
    let seed = need_seed(a.seed, "simulate")?;
    if a.u.is_none() && a.samples.is_none() {
        return Err(Failure::Input(
            "nothing to do: pass --u, --samples or both".into(),
        ));
    }
    let m = input(read_model(&a.model))?;
    let family = match a.family {
        Family::Pareto => NoiseFamily::Pareto,
        Family::Frechet => NoiseFamily::Frechet,
    };
    let noise = NoiseSpec::new(family, m.alpha()).map_err(malformed)?;
    let block = sample(&m, noise, a.n, seed).map_err(malformed)?;
    if let Some(p) = &a.samples {
        write_file(p, &render_matrix(&block.data))?;
    }
    match a.u {
        Some(u) => {
            let chi = empirical_tdm(&block, u).map_err(malformed)?;
            Ok(render_matrix(chi.as_array()))
        }
        None => Ok(String::new()),
    }
}

fn run_gen(a: &GenArgs) -> CmdResult {
    let seed = need_seed(a.seed, "gen")?;
    let kind = if a.polytree {
        ModelKind::Polytree
    } else if a.homogeneous {
        ModelKind::Homogeneous
    } else if a.max_weighted {
        ModelKind::MaxWeighted
    } else {
        ModelKind::Random
    };
    let cfg = GenConfig {
        d: a.d,
        density: a.density,
        weight_range: (a.weight_min, a.weight_max),
        alpha: a.alpha,
        kind,
    };
    let m = generate(&cfg, seed).map_err(malformed)?;
    Ok(ModelFile::from_model(&m).render())
}

fn run_dot(a: &DotArgs, tol: Tolerance) -> CmdResult {
    if let Some(p) = &a.model {
        let m = input(read_model(p))?;
        return Ok(render_dot(m.dag(), |k, i| m.edge_weight(k, i)));
    }
    if let Some(p) = &a.matrix {
        let b = read_std(p)?;
        let dag = minimum_ml_dag(&b, tol).map_err(algorithmic)?;
        return Ok(render_dot(&dag, |k, i| Some(b.get(k, i))));
    }
    let r = read_reach(a.reachability.as_deref().expect("clap requires one input"))?;
    Ok(render_dot(&Dag::from_reachability(&r), |_, _| None))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn run(cli: &Cli) -> CmdResult {
    let tol = tolerance(cli.tol)?;
    match &cli.command {
        Command::Tdm(a) => run_tdm(a),
        Command::Standardize(a) => run_standardize(a),
        Command::Recover(a) => run_recover(a, tol),
        Command::Enumerate(a) => run_enumerate(a, tol),
        Command::Check(a) => run_check(a, tol),
        Command::Simulate(a) => run_simulate(a),
        Command::Gen(a) => run_gen(a),
        Command::Dot(a) => run_dot(a, tol),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|text| match &cli.out {
        Some(p) => write_file(p, &text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::Input(format!("writing output: {e}")))
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Rejected(msg)) => {
            eprintln!("rejected: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
