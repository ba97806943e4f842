//! Command-line front end: every analysis on file inputs, JSON out.
//!
//! Exit codes: 0 on success, 1 on input errors, 2 on computation errors
//! such as exceeding the exact-LP size cap.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use ctx_core::cbd;
use ctx_core::fractions::{self, CausalOrderSpec};
use ctx_core::parsing::{self, ParseDistribution, PredictionFile, ReadingTimeTable};
use ctx_core::qsim::{self, AnsatzParams, Party, Shape, TrainConfig, WordState};
use ctx_core::scenario::{self, EmpiricalModel, ModelDocument};

#[derive(Parser)]
#[command(
    name = "ctx",
    version,
    about = "Empirical-model analyses on file inputs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the JSON result here instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model file against the numeric invariants.
    Validate { model: PathBuf },
    /// Contextual, signalling, and causal fractions.
    Fractions(FractionsArgs),
    /// Contextuality-by-Default measures of a cyclic system.
    Cbd(CbdArgs),
    /// Bell inequality values.
    Bell(BellArgs),
    /// Circuit simulation: training and analysis.
    #[command(subcommand)]
    Sim(SimCommand),
    /// Garden-path pipeline: signalling fractions, regression, effects.
    #[command(subcommand)]
    Parse(ParseCommand),
}

#[derive(Args)]
struct FractionsArgs {
    #[arg(long, value_enum)]
    measure: FractionMeasure,
    /// Causal order for `--measure causal`.
    #[arg(long, value_enum, default_value = "a<b")]
    order: OrderArg,
    /// Include the witness sub-model in the output.
    #[arg(long)]
    witness: bool,
    model: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum FractionMeasure {
    Cf,
    Sf,
    Causal,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    /// earlier party first (alphabetical party order)
    #[value(name = "a<b")]
    AFirst,
    /// later party first
    #[value(name = "b<a")]
    BFirst,
    /// no signalling in either direction
    Ns,
}

#[derive(Args)]
struct CbdArgs {
    #[arg(long, value_enum)]
    measure: CbdMeasure,
    model: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum CbdMeasure {
    Criterion,
    Ncnt2,
    Delta,
    Influence,
    Consistentify,
}

#[derive(Args)]
struct BellArgs {
    #[arg(long, value_enum)]
    test: BellTest,
    /// A model file, or `builtin` for the quantum realization.
    model: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum BellTest {
    Chsh,
    Kcbs,
}

#[derive(Subcommand)]
enum SimCommand {
    /// Train the variational circuit against a target model.
    Train(TrainArgs),
    /// Analyze trained parameters.
    Analyze(AnalyzeArgs),
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, value_enum)]
    shape: ShapeArg,
    #[arg(long)]
    rounds: usize,
    #[arg(long)]
    steps: usize,
    /// Seed for the initial parameter draw; required for reproducibility.
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1e-2)]
    gamma: f64,
    #[arg(long, default_value_t = 1e-2)]
    delta: f64,
    /// Estimate probabilities from this many samples (0 = exact).
    #[arg(long, default_value_t = 0)]
    shots: u32,
    /// Write the per-step cost trace as `step,cost` CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Target empirical model (any (2,2,2) global-cover file).
    target: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ShapeArg {
    Sv,
    Vo,
}

impl From<ShapeArg> for Shape {
    fn from(s: ShapeArg) -> Shape {
        match s {
            ShapeArg::Sv => Shape::SubjectVerb,
            ShapeArg::Vo => Shape::VerbObject,
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long, value_enum)]
    what: AnalyzeWhat,
    /// Trained parameter file.
    #[arg(long)]
    params: PathBuf,
    /// Second parameter file (overlap, recombine).
    #[arg(long)]
    params_b: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "noun")]
    party: PartyArg,
    /// Word input bit for the first parameter file.
    #[arg(long, default_value_t = 0)]
    input: u8,
    /// Word input bit for the second parameter file (defaults to --input).
    #[arg(long)]
    input_b: Option<u8>,
    /// Circuit inputs for `--what eof`.
    #[arg(long, default_value_t = 0)]
    noun_input: u8,
    #[arg(long, default_value_t = 0)]
    verb_input: u8,
    /// Shape of the recombined model.
    #[arg(long, value_enum, default_value = "sv")]
    shape: ShapeArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum AnalyzeWhat {
    Entropy,
    Eof,
    Overlap,
    Recombine,
}

#[derive(Clone, Copy, ValueEnum)]
enum PartyArg {
    Noun,
    Verb,
}

#[derive(Subcommand)]
enum ParseCommand {
    /// Per-word signalling fractions from prefix files (parse distributions
    /// or prediction files, one per prefix in order).
    Sf { files: Vec<PathBuf> },
    /// Fit the linear reading-time model to `sf,rt_ms` CSV points.
    Regress { points: PathBuf },
    /// Garden-path effect from a reading-time table.
    Gpe {
        table: PathBuf,
        #[arg(long)]
        ambiguous: String,
        #[arg(long)]
        region: u32,
        #[arg(long)]
        unambiguous: String,
        /// Region of the unambiguous variant (defaults to --region).
        #[arg(long)]
        unambiguous_region: Option<u32>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(value) => {
            let mut text = serde_json::to_string_pretty(&value).expect("serializable");
            text.push('\n');
            match &cli.output {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, text) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return ExitCode::from(1);
                    }
                }
                None => {
                    let mut stdout = std::io::stdout();
                    let _ = stdout.write_all(text.as_bytes());
                }
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            let code = match err.downcast_ref::<ctx_core::Error>() {
                Some(ctx_core::Error::LpCapExceeded { .. }) | Some(ctx_core::Error::Lp(_)) => 2,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}

fn load_model(path: &Path) -> anyhow::Result<ModelDocument> {
    let bytes =
        std::fs::read(path).map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
    Ok(scenario::parse_model(&bytes)?)
}

fn load_params(path: &Path) -> anyhow::Result<AnsatzParams> {
    let bytes =
        std::fs::read(path).map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
    Ok(AnsatzParams::from_json(&bytes)?)
}

fn model_value(model: &EmpiricalModel, cyclic: bool) -> Value {
    let bytes = scenario::serialize_model(model, cyclic);
    serde_json::from_slice(&bytes).expect("canonical model JSON")
}

fn lp_cap() -> u128 {
    std::env::var("CTX_LP_CAP")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(fractions::DEFAULT_ASSIGNMENT_CAP)
}

fn run(cli: &Cli) -> anyhow::Result<Value> {
    match &cli.command {
        Command::Validate { model } => {
            let doc = load_model(model)?;
            let report = scenario::validate_model(&doc.model, 1e-9);
            let ns = scenario::is_no_signalling(&doc.model, 1e-9);
            Ok(json!({
                "ok": report.is_empty(),
                "violations": report.iter().map(|v| json!({
                    "context": v.context,
                    "outcome": v.outcome,
                    "magnitude": v.magnitude,
                    "message": v.message,
                })).collect::<Vec<_>>(),
                "no_signalling": ns.ok,
                "worst_signalling_violation": ns.worst_violation,
            }))
        }
        Command::Fractions(args) => {
            let doc = load_model(&args.model)?;
            let (measure, result) = match args.measure {
                FractionMeasure::Cf => {
                    let res = fractions::noncontextual_fraction_with_cap(&doc.model, lp_cap())?;
                    ("cf", res)
                }
                FractionMeasure::Sf => {
                    let res = fractions::nosignalling_fraction(&doc.model)?;
                    ("sf", res)
                }
                FractionMeasure::Causal => {
                    let parties = doc.model.scenario().parties();
                    if parties.len() != 2 {
                        anyhow::bail!("causal fractions need a two-party model");
                    }
                    let order = match args.order {
                        OrderArg::AFirst => CausalOrderSpec::before(&parties[0].0, &parties[1].0),
                        OrderArg::BFirst => CausalOrderSpec::before(&parties[1].0, &parties[0].0),
                        OrderArg::Ns => CausalOrderSpec::no_signalling(),
                    };
                    let res = fractions::causal_fraction_lp(&doc.model, &order)?;
                    ("causal", res)
                }
            };
            // For cf and sf the headline number is the complement (the
            // contextual/signalling fraction); for causal it is lambda.
            let value = match args.measure {
                FractionMeasure::Causal => result.lambda,
                _ => result.complement,
            };
            let mut out = Map::new();
            out.insert("measure".into(), json!(measure));
            out.insert("value".into(), json!(value));
            out.insert("lambda".into(), json!(result.lambda));
            if args.witness {
                if let Some(witness) = &result.witness {
                    out.insert("witness".into(), model_value(witness, false));
                }
            }
            Ok(Value::Object(out))
        }
        Command::Cbd(args) => {
            let doc = load_model(&args.model)?;
            let sys = cbd::from_empirical(&doc.model, None)?;
            match args.measure {
                CbdMeasure::Consistentify => {
                    let model = cbd::consistentify(&sys)?;
                    Ok(model_value(&model, false))
                }
                measure => {
                    let report = cbd::report(&sys);
                    let mut out = Map::new();
                    match measure {
                        CbdMeasure::Criterion => {
                            out.insert("measure".into(), json!("criterion"));
                            out.insert("contextual".into(), json!(report.contextual));
                            out.insert("s_odd".into(), json!(report.s_odd_value));
                            out.insert("delta".into(), json!(report.delta));
                        }
                        CbdMeasure::Ncnt2 => {
                            out.insert("measure".into(), json!("ncnt2"));
                            out.insert("value".into(), json!(report.ncnt2));
                        }
                        CbdMeasure::Delta => {
                            out.insert("measure".into(), json!("delta"));
                            out.insert("value".into(), json!(report.delta));
                        }
                        CbdMeasure::Influence => {
                            out.insert("measure".into(), json!("influence"));
                            let mut map = Map::new();
                            for (content, value) in &report.direct_influences {
                                map.insert(content.clone(), json!(value));
                            }
                            out.insert("direct_influences".into(), Value::Object(map));
                        }
                        CbdMeasure::Consistentify => unreachable!(),
                    }
                    Ok(Value::Object(out))
                }
            }
        }
        Command::Bell(args) => match args.test {
            BellTest::Chsh => {
                let model = if args.model == "builtin" {
                    fractions::chsh_quantum_model()
                } else {
                    load_model(Path::new(&args.model))?.model
                };
                let value = fractions::chsh_value(&model, None)?;
                Ok(json!({"test": "chsh", "value": value, "classical_bound": 2.0}))
            }
            BellTest::Kcbs => {
                let correlators: Vec<f64> = if args.model == "builtin" {
                    fractions::kcbs_quantum_correlators()?.to_vec()
                } else {
                    let doc = load_model(Path::new(&args.model))?;
                    let n = doc.model.scenario().n_contexts();
                    (0..n)
                        .map(|c| doc.model.correlator(c, None))
                        .collect::<ctx_core::Result<_>>()?
                };
                let value = fractions::kcbs_value(&correlators)?;
                Ok(json!({
                    "test": "kcbs",
                    "value": value,
                    "correlators": correlators,
                    "classical_bound": -3.0,
                }))
            }
        },
        Command::Sim(SimCommand::Train(args)) => {
            let doc = load_model(&args.target)?;
            let shape = Shape::from(args.shape);
            let target = qsim::target_from_222(&doc.model, shape)?;
            let config = TrainConfig {
                gamma: args.gamma,
                delta: args.delta,
                steps: args.steps,
                seed: args.seed,
                shots: args.shots,
            };
            let result = qsim::train(&target, shape, args.rounds, &config)?;
            if let Some(path) = &args.trace {
                let mut csv = String::from("step,cost\n");
                for (step, cost) in result.trace.iter().enumerate() {
                    csv.push_str(&format!("{step},{cost}\n"));
                }
                std::fs::write(path, csv)
                    .map_err(|e| anyhow::anyhow!("cannot write trace: {e}"))?;
            }
            let params_json: Value = serde_json::from_slice(&result.params.to_json())?;
            Ok(json!({
                "final_cost": result.final_cost,
                "steps": args.steps,
                "params": params_json,
            }))
        }
        Command::Sim(SimCommand::Analyze(args)) => {
            let params = load_params(&args.params)?;
            match args.what {
                AnalyzeWhat::Entropy => {
                    let state = qsim::word_state(&params, Party::Noun, args.input)?;
                    let WordState::Pure(psi) = state else {
                        anyhow::bail!("entropy is defined for the pure noun states");
                    };
                    let value = qsim::entanglement_entropy(&psi, &[0])?;
                    Ok(json!({"what": "entropy", "input": args.input, "bits": value}))
                }
                AnalyzeWhat::Eof => {
                    let rho = qsim::readout_state(&params, args.noun_input, args.verb_input);
                    let value = qsim::entanglement_of_formation(&rho)?;
                    Ok(json!({
                        "what": "eof",
                        "noun_input": args.noun_input,
                        "verb_input": args.verb_input,
                        "value": value,
                    }))
                }
                AnalyzeWhat::Overlap => {
                    let other = args
                        .params_b
                        .as_ref()
                        .ok_or_else(|| anyhow::anyhow!("overlap needs --params-b"))?;
                    let params_b = load_params(other)?;
                    let party = match args.party {
                        PartyArg::Noun => Party::Noun,
                        PartyArg::Verb => Party::Verb,
                    };
                    let a = qsim::word_state(&params, party, args.input)?;
                    let b = qsim::word_state(&params_b, party, args.input_b.unwrap_or(args.input))?;
                    let value = qsim::state_overlap(&a, &b)?;
                    Ok(json!({"what": "overlap", "value": value}))
                }
                AnalyzeWhat::Recombine => {
                    let other = args
                        .params_b
                        .as_ref()
                        .ok_or_else(|| anyhow::anyhow!("recombine needs --params-b"))?;
                    let params_b = load_params(other)?;
                    let combined = qsim::recombine(&params, &params_b)?;
                    let model = qsim::circuit_model(&combined, Shape::from(args.shape));
                    Ok(model_value(&model, false))
                }
            }
        }
        Command::Parse(ParseCommand::Sf { files }) => {
            if files.len() < 2 {
                anyhow::bail!("need at least two prefix files");
            }
            let mut dists: Vec<ParseDistribution> = Vec::with_capacity(files.len());
            for (k, path) in files.iter().enumerate() {
                let bytes = std::fs::read(path)
                    .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
                let value: Value = serde_json::from_slice(&bytes)
                    .map_err(|e| anyhow::anyhow!("{}: invalid JSON: {e}", path.display()))?;
                let dist = if value.get("predictions").is_some() {
                    // Prediction files are aggregated at the prefix length
                    // their position in the chain implies.
                    let prefix = match dists.first() {
                        Some(first) => first.length() + k,
                        None => 1,
                    };
                    let file = PredictionFile::from_json(&bytes)?;
                    parsing::aggregate_partial_distribution(&file, prefix)?
                } else {
                    ParseDistribution::from_json(&bytes)?
                };
                dists.push(dist);
            }
            let sf = parsing::word_sf_sequence(&dists)?;
            let words: Vec<usize> = (0..sf.len()).map(|k| dists[0].length() + k + 1).collect();
            Ok(json!({"words": words, "sf": sf}))
        }
        Command::Parse(ParseCommand::Regress { points }) => {
            let text = std::fs::read_to_string(points)
                .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", points.display()))?;
            let mut data = Vec::new();
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || (lineno == 0 && line.starts_with("sf")) {
                    continue;
                }
                let mut parts = line.split(',');
                let (Some(x), Some(y)) = (parts.next(), parts.next()) else {
                    anyhow::bail!("malformed point on line {}", lineno + 1);
                };
                data.push((x.trim().parse::<f64>()?, y.trim().parse::<f64>()?));
            }
            let (model, rho) = parsing::fit_regression(&data)?;
            Ok(json!({
                "alpha_ms_per_sf": model.alpha,
                "beta_ms": model.beta,
                "pearson_rho": rho,
                "points": data.len(),
            }))
        }
        Command::Parse(ParseCommand::Gpe {
            table,
            ambiguous,
            region,
            unambiguous,
            unambiguous_region,
        }) => {
            let text = std::fs::read_to_string(table)
                .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", table.display()))?;
            let table = ReadingTimeTable::from_csv(&text)?;
            let value = parsing::garden_path_effect(
                &table,
                ambiguous,
                *region,
                unambiguous,
                unambiguous_region.unwrap_or(*region),
            )?;
            Ok(json!({
                "ambiguous": ambiguous,
                "unambiguous": unambiguous,
                "gpe_ms": value,
            }))
        }
    }
}
