//! Command-line front end: fit models, run hypothesis tests, and reproduce
//! the batch simulation studies.
//!
//! Every command is deterministic given `--seed`: repeated runs write
//! byte-identical report files. Exit codes: 0 on success, 2 on user or
//! configuration errors, 3 on numerical failures; errors are printed to
//! stderr as a one-line JSON object.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use ergmbf::bf::{evaluate_hypotheses, exploratory_test, DEFAULT_MC_DRAWS};
use ergmbf::error::{Error, Result};
use ergmbf::hypothesis::parse_hypotheses;
use ergmbf::inference::{
    fit_mple, gaussian_approx, normality_check, sample_posterior, ExchangeSettings,
    DEFAULT_AUX_SWEEPS, DEFAULT_MAIN_ITERS, PAPER_MAIN_ITERS,
};
use ergmbf::net::{
    load_dyad_covariate, load_network, load_node_attributes, ColumnKind, NetFormat, Network,
};
use ergmbf::prior::unit_information_prior;
use ergmbf::report::{
    confirmatory_json, confirmatory_text, exploratory_json, exploratory_text, fit_json, fit_text,
    prior_text, FitSummary,
};
use ergmbf::sim::{
    order_study, order_study_csv, size_study, size_study_csv, OrderStudyConfig, SizeStudyConfig,
};
use ergmbf::stats::{ModelSpec, StatisticSpec};

#[derive(Parser)]
#[command(
    name = "ergmbf",
    version,
    about = "Bayesian hypothesis tests for exponential random graph models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model: pseudolikelihood and posterior estimates side by side.
    Fit(FitArgs),
    /// Test hypotheses on coefficients; exploratory-only without --hypothesis.
    Test(TestArgs),
    /// Evidence-vs-size study with the focal p-value pinned near .05.
    SimulateJl(SimulateJlArgs),
    /// Ordered-effects study over a grid of effect scales.
    SimulateOrder(SimulateOrderArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    /// CSV with a from,to header; rows are 1-based indices or node labels.
    Edgelist,
    /// Headerless square CSV of 0/1 entries.
    Adjacency,
}

#[derive(Args)]
struct DataArgs {
    /// Observed network CSV.
    #[arg(long)]
    network: PathBuf,

    /// Input layout of the network file.
    #[arg(long, value_enum, default_value_t = Format::Edgelist)]
    format: Format,

    /// Treat ties as directed.
    #[arg(long)]
    directed: bool,

    /// Node count override, for isolates an edge list cannot mention.
    #[arg(long)]
    n_nodes: Option<usize>,

    /// Node attribute CSV (header row; rows in the network's node order,
    /// which for labeled edge lists is sorted label order).
    #[arg(long)]
    attrs: Option<PathBuf>,

    /// Dyadic covariate as name=path (square CSV); repeatable.
    #[arg(long, value_name = "NAME=PATH")]
    covariate: Vec<String>,

    /// Model statistics JSON: {"terms":[{"kind":"edges"}, ...]}.
    #[arg(long)]
    model: PathBuf,
}

#[derive(Args)]
struct SamplerArgs {
    /// RNG seed; the whole run is reproducible from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Posterior sampler iterations per chain.
    #[arg(long)]
    main_iters: Option<usize>,

    /// Gibbs sweeps per auxiliary network draw.
    #[arg(long)]
    aux_sweeps: Option<usize>,

    /// Independent chains pooled into the posterior sample.
    #[arg(long)]
    chains: Option<usize>,

    /// Long-run settings (more iterations and replicates).
    #[arg(long)]
    paper_scale: bool,
}

impl SamplerArgs {
    fn exchange(&self) -> ExchangeSettings {
        let defaults = ExchangeSettings::default();
        ExchangeSettings {
            main_iters: self.main_iters.unwrap_or(if self.paper_scale {
                PAPER_MAIN_ITERS
            } else {
                DEFAULT_MAIN_ITERS
            }),
            aux_sweeps: self.aux_sweeps.unwrap_or(DEFAULT_AUX_SWEEPS),
            chains: self.chains.unwrap_or(defaults.chains),
            seed: self.seed,
        }
    }
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    sampler: SamplerArgs,
    /// Output directory for report.txt, report.json, draws.csv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TestArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    sampler: SamplerArgs,
    /// Hypotheses, e.g. "a = b; order: a < b < c". Omit for the
    /// exploratory zero/negative/positive test of every coefficient.
    #[arg(long)]
    hypothesis: Option<String>,
    /// Monte Carlo draws for order-constraint probabilities.
    #[arg(long)]
    mc_draws: Option<usize>,
    /// Output directory for report.txt, report.json, draws.csv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateJlArgs {
    /// Network sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// Kept networks per size.
    #[arg(long)]
    reps: Option<usize>,
    #[command(flatten)]
    sampler: SamplerArgs,
    /// Output directory for simulation.csv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateOrderArgs {
    /// Network sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// Effect scales β (effects are β, 2β, 3β), comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    betas: Option<Vec<f64>>,
    /// Generated networks per grid point.
    #[arg(long)]
    reps: Option<usize>,
    #[command(flatten)]
    sampler: SamplerArgs,
    /// Monte Carlo draws for order-constraint probabilities.
    #[arg(long)]
    mc_draws: Option<usize>,
    /// Output directory for simulation.csv.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Fit(args) => cmd_fit(args),
        Command::Test(args) => cmd_test(args),
        Command::SimulateJl(args) => cmd_simulate_jl(args),
        Command::SimulateOrder(args) => cmd_simulate_order(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let kind = if err.is_user_error() { "user" } else { "numerical" };
            eprintln!("{}", json!({ "error": err.to_string(), "kind": kind }));
            ExitCode::from(if err.is_user_error() { 2 } else { 3 })
        }
    }
}

/// Attribute columns the model's terms require, with their kinds.
fn attribute_schema(model: &ModelSpec) -> Result<Vec<(String, ColumnKind)>> {
    let mut schema: Vec<(String, ColumnKind)> = Vec::new();
    let add = |schema: &mut Vec<(String, ColumnKind)>, attr: &str, kind: ColumnKind| {
        match schema.iter().find(|(n, _)| n == attr) {
            Some((_, existing)) if *existing != kind => Err(Error::Invalid(format!(
                "attribute {attr:?} is used both as numeric and as categorical"
            ))),
            Some(_) => Ok(()),
            None => {
                schema.push((attr.to_string(), kind));
                Ok(())
            }
        }
    };
    for term in &model.terms {
        match term {
            StatisticSpec::Nodecov { attr } | StatisticSpec::Absdiff { attr } => {
                add(&mut schema, attr, ColumnKind::Numeric)?;
            }
            StatisticSpec::Nodefactor { attr, .. }
            | StatisticSpec::Nodeifactor { attr, .. }
            | StatisticSpec::Nodeofactor { attr, .. }
            | StatisticSpec::Nodematch { attr }
            | StatisticSpec::Nodemix { attr, .. } => {
                add(&mut schema, attr, ColumnKind::Categorical { reference: None })?;
            }
            _ => {}
        }
    }
    Ok(schema)
}

/// Load the model, network, attributes, and covariates named in the args.
fn load_inputs(data: &DataArgs) -> Result<(Network, ModelSpec)> {
    let model_text = fs::read_to_string(&data.model).map_err(|source| Error::Io {
        path: data.model.display().to_string(),
        source,
    })?;
    let model = ModelSpec::from_json(&model_text)?;

    let format = match data.format {
        Format::Edgelist => NetFormat::EdgeList,
        Format::Adjacency => NetFormat::Adjacency,
    };
    let loaded = load_network(&data.network, data.directed, format, data.n_nodes)?;
    if loaded.self_ties_dropped > 0 {
        eprintln!("note: dropped {} self tie(s)", loaded.self_ties_dropped);
    }
    let mut net = loaded.network;

    let schema = attribute_schema(&model)?;
    if !schema.is_empty() {
        let path = data.attrs.as_ref().ok_or_else(|| {
            Error::Invalid(format!(
                "the model needs node attributes ({}) but no --attrs file was given",
                schema.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>().join(", ")
            ))
        })?;
        let table = load_node_attributes(path, net.n(), &schema)?;
        net = net.with_attributes(table)?;
    }

    for spec in &data.covariate {
        let (name, path) = spec.split_once('=').ok_or_else(|| {
            Error::Invalid(format!("--covariate wants NAME=PATH, got {spec:?}"))
        })?;
        let cov = load_dyad_covariate(Path::new(path), name)?;
        net = net.with_covariate(cov)?;
    }
    Ok((net, model))
}

fn write_out(dir: &Path, name: &str, content: &str) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let path = dir.join(name);
    fs::write(&path, content).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn pretty(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report JSON serializes");
    text.push('\n');
    text
}

fn cmd_fit(args: &FitArgs) -> Result<()> {
    let (net, model) = load_inputs(&args.data)?;
    let (mple, note) = match fit_mple(&net, &model) {
        Ok(fit) => (Some(fit), None),
        Err(Error::MpleDoesNotExist(iters)) => (
            None,
            Some(format!(
                "pseudolikelihood estimate does not exist (separation after {iters} iterations); \
                 posterior estimates are still valid"
            )),
        ),
        Err(e) => return Err(e),
    };

    let prior = unit_information_prior(&net, &model)?;
    let settings = args.sampler.exchange();
    let draws = sample_posterior(&net, &model, &prior, settings)?;
    let post = gaussian_approx(&draws)?;
    let checks = normality_check(&draws, &post);

    let summary = FitSummary {
        mple: mple.as_ref(),
        mple_note: note.as_deref(),
        posterior: Some(&post),
        acceptance_rate: Some(draws.acceptance_rate),
        normality: Some(&checks),
    };
    let text = format!("{}\n{}", fit_text(&summary), prior_text(&prior));
    write_out(&args.out, "report.txt", &text)?;
    write_out(&args.out, "report.json", &pretty(&fit_json(&summary, Some(args.sampler.seed))))?;
    write_out(&args.out, "draws.csv", &draws.to_csv())?;
    print!("{text}");
    println!("reports written to {}", args.out.display());
    Ok(())
}

fn cmd_test(args: &TestArgs) -> Result<()> {
    let (net, model) = load_inputs(&args.data)?;
    let prior = unit_information_prior(&net, &model)?;
    // Parse before the expensive sampling so bad hypothesis text fails fast.
    let hset = args
        .hypothesis
        .as_ref()
        .map(|text| parse_hypotheses(text, prior.names()))
        .transpose()?;
    let settings = args.sampler.exchange();
    let draws = sample_posterior(&net, &model, &prior, settings)?;
    let post = gaussian_approx(&draws)?;
    let rows = exploratory_test(&prior, &post)?;
    let mc_draws = args.mc_draws.unwrap_or(DEFAULT_MC_DRAWS);

    let (text, json) = match &hset {
        Some(hset) => {
            let report = evaluate_hypotheses(&prior, &post, hset, mc_draws, args.sampler.seed)?;
            let mut json = confirmatory_json(&report);
            json["exploratory"] = exploratory_json(&rows, args.sampler.seed)["exploratory"].take();
            let text = format!("{}\n{}", confirmatory_text(&report), exploratory_text(&rows));
            (text, json)
        }
        None => (
            exploratory_text(&rows),
            exploratory_json(&rows, args.sampler.seed),
        ),
    };

    write_out(&args.out, "report.txt", &text)?;
    write_out(&args.out, "report.json", &pretty(&json))?;
    write_out(&args.out, "draws.csv", &draws.to_csv())?;
    print!("{text}");
    println!("reports written to {}", args.out.display());
    Ok(())
}

fn cmd_simulate_jl(args: &SimulateJlArgs) -> Result<()> {
    let paper = args.sampler.paper_scale;
    let cfg = SizeStudyConfig {
        sizes: args.sizes.clone().unwrap_or_else(|| {
            if paper {
                vec![7, 10, 15, 20, 25, 30, 35, 40, 45, 50, 55]
            } else {
                SizeStudyConfig::default().sizes
            }
        }),
        reps: args.reps.unwrap_or(if paper { 300 } else { 50 }),
        exchange: ExchangeSettings {
            chains: args.sampler.chains.unwrap_or(1),
            ..args.sampler.exchange()
        },
        seed: args.sampler.seed,
    };
    let rows = size_study(&cfg)?;
    let csv = size_study_csv(&rows);
    write_out(&args.out, "simulation.csv", &csv)?;
    print!("{csv}");
    println!("simulation written to {}", args.out.display());
    Ok(())
}

fn cmd_simulate_order(args: &SimulateOrderArgs) -> Result<()> {
    let paper = args.sampler.paper_scale;
    let cfg = OrderStudyConfig {
        sizes: args.sizes.clone().unwrap_or_else(|| {
            if paper {
                vec![10, 30, 90]
            } else {
                OrderStudyConfig::default().sizes
            }
        }),
        betas: args.betas.clone().unwrap_or_else(|| OrderStudyConfig::default().betas),
        reps: args.reps.unwrap_or(if paper { 100 } else { 50 }),
        exchange: ExchangeSettings {
            chains: args.sampler.chains.unwrap_or(1),
            ..args.sampler.exchange()
        },
        mc_draws: args.mc_draws.unwrap_or(DEFAULT_MC_DRAWS),
        seed: args.sampler.seed,
        ..OrderStudyConfig::default()
    };
    let rows = order_study(&cfg)?;
    let csv = order_study_csv(&rows);
    write_out(&args.out, "simulation.csv", &csv)?;
    print!("{csv}");
    println!("simulation written to {}", args.out.display());
    Ok(())
}
