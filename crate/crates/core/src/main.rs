use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use iiot_design::error::Error;
use iiot_design::experiments::{
    annealing_params, run_convergence, run_sweep, write_csv, SweepConfig, SweepMode,
};
use iiot_design::generator::{generate_instance, read_scenario, GeneratorSpec, InstanceFile};
use iiot_design::impact::{CountImpact, ImpactEvaluator, ImpactTableFile, TableImpact};
use iiot_design::model::{BudgetConfig, CostBreakdown, Design, Instance, Money, NamedDesign};
use iiot_design::optimizer::{
    brute_force_design, simulated_annealing, AcceptanceRule, BruteForceLimits, Problem,
};
use iiot_design::propagation::AttackModel;
use iiot_design::risk::{evaluate_risk, RiskMethod, DEFAULT_ENUMERATION_LIMIT};
use iiot_design::setcover::{setcover_to_odp, SetCoverInstance};
use iiot_design::water::WaterImpact;

/// Security investment planner for IIoT systems.
#[derive(Parser)]
#[command(name = "iiot-design", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an instance (and optionally a water scenario). Silent on success.
    Validate {
        instance: PathBuf,
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
    /// Print the risk of a design (all allowed types at the cheapest levels by default).
    Evaluate {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Design JSON; levels are 0-based indices.
        #[arg(long)]
        design: Option<PathBuf>,
    },
    /// Search for a low-risk design within budget.
    Optimize {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        budget: BudgetArgs,
        #[command(flatten)]
        anneal: AnnealArgs,
        /// Enumerate every design instead of annealing.
        #[arg(long)]
        exhaustive: bool,
        #[arg(long, default_value_t = 1_000_000)]
        max_designs: u128,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Best risk and spend per budget, as CSV.
    Sweep {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        anneal: AnnealArgs,
        #[arg(long, value_enum, default_value = "combination")]
        mode: SweepMode,
        /// Comma-separated budgets in ascending order.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "10,20,30,40,50,60,70,80,90,100,110,120"
        )]
        points: Vec<Money>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-iteration trace of a single annealing run, as CSV.
    Convergence {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        budget: BudgetArgs,
        #[command(flatten)]
        anneal: AnnealArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic instance.json and scenario.json into a directory.
    Generate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        sensors: Option<usize>,
        #[arg(long)]
        processing: Option<usize>,
        #[arg(long)]
        interfaces: Option<usize>,
        #[arg(long)]
        fan_in: Option<usize>,
        #[arg(long)]
        nodes: Option<usize>,
        #[arg(long)]
        pipe_density: Option<f64>,
        #[arg(long)]
        injections: Option<usize>,
    },
    /// Build the design instance for a Set Cover question.
    ReduceSetcover {
        /// JSON with `universe`, `families` and `k`.
        #[arg(long, conflicts_with_all = ["universe", "family", "k"])]
        input: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        universe: Vec<String>,
        /// One family, comma-separated; repeat the flag per family.
        #[arg(long)]
        family: Vec<String>,
        #[arg(long)]
        k: Option<Money>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ImpactKind {
    Count,
    Table,
    Water,
}

#[derive(Args)]
struct ProblemArgs {
    instance: PathBuf,
    /// Defaults to the instance file's attack, then nonstealthy.
    #[arg(long)]
    attack: Option<AttackModel>,
    #[arg(long, value_enum, default_value = "count")]
    impact: ImpactKind,
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Monte Carlo sample count, used when too many types are deployed to enumerate.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_LIMIT)]
    exact_limit: usize,
    /// Always sample, even when enumeration is possible.
    #[arg(long)]
    monte_carlo: bool,
}

#[derive(Args)]
struct BudgetArgs {
    /// Combined budget.
    #[arg(long, conflicts_with = "budgets")]
    budget: Option<Money>,
    /// Split budgets as R,D,H.
    #[arg(long, value_parser = parse_split)]
    budgets: Option<BudgetConfig>,
}

#[derive(Args)]
struct AnnealArgs {
    #[arg(long, default_value_t = 2000)]
    iterations: usize,
    /// Defaults to 10% of the empty-design risk.
    #[arg(long)]
    t0: Option<f64>,
    /// Defaults to ln(100) / iterations.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, default_value_t = 3)]
    restarts: usize,
    /// Accept with exp(+Δ/T) instead of exp(-Δ/T).
    #[arg(long)]
    as_printed_acceptance: bool,
}

fn parse_split(s: &str) -> Result<BudgetConfig, String> {
    let parts: Vec<&str> = s.split(',').collect();
    let [r, d, h] = parts.as_slice() else {
        return Err(format!("expected R,D,H, got `{s}`"));
    };
    let num = |x: &str| x.trim().parse::<Money>().map_err(|e| format!("`{x}`: {e}"));
    Ok(BudgetConfig::split(num(r)?, num(d)?, num(h)?))
}

struct Loaded {
    file: InstanceFile,
    instance: Instance,
    impact: Box<dyn ImpactEvaluator>,
    attack: AttackModel,
    risk: RiskMethod,
}

impl Loaded {
    fn problem(&self, budgets: BudgetConfig) -> Problem<'_, dyn ImpactEvaluator> {
        Problem::new(&self.instance, budgets, self.attack, self.impact.as_ref())
            .with_risk_method(self.risk)
    }

    fn budgets(&self, args: &BudgetArgs) -> anyhow::Result<BudgetConfig> {
        match (args.budget, args.budgets, self.file.budgets) {
            (Some(b), _, _) => Ok(BudgetConfig::Combined(b)),
            (None, Some(split), _) => Ok(split),
            (None, None, Some(file)) => Ok(file),
            (None, None, None) => {
                bail!("no budget: pass --budget or --budgets, or put one in the instance")
            }
        }
    }
}

fn load_instance(path: &Path) -> anyhow::Result<(InstanceFile, Instance)> {
    let file = InstanceFile::read(path).with_context(|| format!("reading {}", path.display()))?;
    let instance = file
        .instance()
        .with_context(|| format!("in {}", path.display()))?;
    Ok((file, instance))
}

fn load(args: &ProblemArgs) -> anyhow::Result<Loaded> {
    let (file, instance) = load_instance(&args.instance)?;
    let impact: Box<dyn ImpactEvaluator> = match args.impact {
        ImpactKind::Count => Box::new(CountImpact),
        ImpactKind::Table => {
            let path = args
                .table
                .as_ref()
                .ok_or_else(|| anyhow!("--impact table needs --table"))?;
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let table: ImpactTableFile = serde_json::from_str(&text)
                .map_err(Error::from)
                .with_context(|| format!("in {}", path.display()))?;
            Box::new(TableImpact::new(&instance, &table)?)
        }
        ImpactKind::Water => {
            let path = args
                .scenario
                .as_ref()
                .ok_or_else(|| anyhow!("--impact water needs --scenario"))?;
            let scenario =
                read_scenario(path).with_context(|| format!("reading {}", path.display()))?;
            Box::new(
                WaterImpact::new(&scenario, &instance)
                    .with_context(|| format!("in {}", path.display()))?,
            )
        }
    };
    let risk = if args.monte_carlo {
        RiskMethod::MonteCarlo {
            samples: args.samples,
            seed: args.seed,
        }
    } else {
        RiskMethod::Auto {
            limit: args.exact_limit,
            samples: args.samples,
            seed: args.seed,
        }
    };
    Ok(Loaded {
        attack: args
            .attack
            .or(file.attack)
            .unwrap_or(AttackModel::NonStealthy),
        file,
        instance,
        impact,
        risk,
    })
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn csv_text<T: serde::Serialize>(rows: &[T]) -> anyhow::Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf)?)
}

fn rule(args: &AnnealArgs) -> AcceptanceRule {
    if args.as_printed_acceptance {
        AcceptanceRule::AsPrinted
    } else {
        AcceptanceRule::Standard
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Validate { instance, scenario } => {
            let (_, inst) = load_instance(&instance)?;
            if let Some(path) = scenario {
                let scenario =
                    read_scenario(&path).with_context(|| format!("reading {}", path.display()))?;
                let report = scenario.validate(inst.model());
                if !report.is_empty() {
                    return Err(Error::Validation(report))
                        .with_context(|| format!("in {}", path.display()));
                }
            }
        }
        Command::Evaluate { problem, design } => {
            let loaded = load(&problem)?;
            let design = match design {
                Some(path) => {
                    let text = fs::read_to_string(&path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    let named: NamedDesign = serde_json::from_str(&text).map_err(Error::from)?;
                    Design::from_named(&named, &loaded.instance)?
                }
                None => Design::full(&loaded.instance),
            };
            let est = evaluate_risk(
                &loaded.instance,
                &design,
                loaded.attack,
                loaded.impact.as_ref(),
                loaded.risk,
            )?;
            let mut text = format!("{}\n", est.mean);
            if est.samples > 0 {
                text += &format!("std_error {} samples {}\n", est.std_error, est.samples);
            }
            emit(None, &text)?;
        }
        Command::Optimize {
            problem,
            budget,
            anneal,
            exhaustive,
            max_designs,
            out,
        } => {
            let loaded = load(&problem)?;
            let budgets = loaded.budgets(&budget)?;
            let problem_def = loaded.problem(budgets);
            let design = if exhaustive {
                let limits = BruteForceLimits {
                    max_designs,
                    enumeration_limit: problem.exact_limit,
                };
                brute_force_design(&problem_def, limits)?.0
            } else {
                let mut params = annealing_params(
                    &problem_def,
                    anneal.iterations,
                    anneal.t0,
                    anneal.beta,
                    anneal.restarts,
                )?;
                params.rule = rule(&anneal);
                simulated_annealing(&problem_def, &params, problem.seed)?.best_design
            };
            let method = if exhaustive {
                RiskMethod::Exact {
                    limit: problem.exact_limit,
                }
            } else {
                loaded.risk
            };
            let est = evaluate_risk(
                &loaded.instance,
                &design,
                loaded.attack,
                loaded.impact.as_ref(),
                method,
            )?;
            let report = json!({
                "risk": est.mean,
                "std_error": est.std_error,
                "method": est.method,
                "spend": CostBreakdown::of(&design, loaded.instance.catalog())?,
                "design": design.to_named(&loaded.instance),
            });
            emit(
                out.as_deref(),
                &(serde_json::to_string_pretty(&report)? + "\n"),
            )?;
        }
        Command::Sweep {
            problem,
            anneal,
            mode,
            points,
            out,
        } => {
            let loaded = load(&problem)?;
            if anneal.as_printed_acceptance {
                bail!("--as-printed-acceptance is only supported by optimize");
            }
            let config = SweepConfig {
                budgets: points,
                mode,
                k_max: anneal.iterations,
                t0: anneal.t0,
                beta: anneal.beta,
                restarts: anneal.restarts,
                seed: problem.seed,
                attack: loaded.attack,
                risk: loaded.risk,
            };
            let rows = run_sweep(&loaded.instance, loaded.impact.as_ref(), &config)?;
            emit(out.as_deref(), &csv_text(&rows)?)?;
        }
        Command::Convergence {
            problem,
            budget,
            anneal,
            out,
        } => {
            let loaded = load(&problem)?;
            let problem_def = loaded.problem(loaded.budgets(&budget)?);
            let mut params =
                annealing_params(&problem_def, anneal.iterations, anneal.t0, anneal.beta, 1)?;
            params.rule = rule(&anneal);
            let rows = run_convergence(&problem_def, &params, problem.seed)?;
            emit(out.as_deref(), &csv_text(&rows)?)?;
        }
        Command::Generate {
            out,
            seed,
            sensors,
            processing,
            interfaces,
            fan_in,
            nodes,
            pipe_density,
            injections,
        } => {
            let base = GeneratorSpec::reference();
            let spec = GeneratorSpec {
                sensors: sensors.unwrap_or(base.sensors),
                processing: processing.unwrap_or(base.processing),
                interfaces: interfaces.unwrap_or(base.interfaces),
                fan_in: fan_in.unwrap_or(base.fan_in),
                hydraulic_nodes: nodes.unwrap_or(base.hydraulic_nodes),
                pipe_density: pipe_density.unwrap_or(base.pipe_density),
                injections: injections.unwrap_or(base.injections),
                seed: seed.unwrap_or(base.seed),
            };
            let (components, catalog, scenario) = generate_instance(&spec)?;
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            let file = InstanceFile {
                components,
                catalog,
                budgets: None,
                attack: None,
            };
            emit(Some(&out.join("instance.json")), &file.to_json()?)?;
            emit(
                Some(&out.join("scenario.json")),
                &(serde_json::to_string_pretty(&scenario)? + "\n"),
            )?;
        }
        Command::ReduceSetcover {
            input,
            universe,
            family,
            k,
            out,
        } => {
            let sc = match input {
                Some(path) => {
                    let text = fs::read_to_string(&path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    serde_json::from_str(&text).map_err(Error::from)?
                }
                None => SetCoverInstance {
                    universe,
                    families: family
                        .iter()
                        .map(|f| {
                            f.split(',')
                                .filter(|s| !s.is_empty())
                                .map(str::to_string)
                                .collect()
                        })
                        .collect(),
                    k: k.ok_or_else(|| anyhow!("--k is required without --input"))?,
                },
            };
            let reduced = setcover_to_odp(&sc)?;
            let file = InstanceFile {
                components: reduced.model,
                catalog: reduced.catalog,
                budgets: Some(reduced.budgets),
                attack: Some(reduced.attack),
            };
            emit(out.as_deref(), &file.to_json()?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(if err.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let capacity = err
                .chain()
                .any(|e| e.downcast_ref::<Error>().is_some_and(Error::is_capacity));
            ExitCode::from(if capacity { 2 } else { 1 })
        }
    }
}
