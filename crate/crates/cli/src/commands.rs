use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use sanction_core::belief::{
    belief_models, malicious_campaign_sim, test_schedules, testing_provider, ClientType, Prior, ProviderPhase,
    ReportProbs, ReportingConjecture, TestingConfig,
};
use sanction_core::bounds::BoundReport;
use sanction_core::params::MarketParams;
use sanction_core::ppe::{check_frontier_reports, check_client_floor, compute_ppe_set, ReportScope, DEFAULT_GRID, DEFAULT_TOL};
use sanction_core::report::{fmt_num, CsvTable};
use sanction_core::reproduce::reproduce_pizza;
use sanction_core::sim::automaton::{builtin_profiles, client_automata, profile_by_name, provider_automata};
use sanction_core::sim::backend::backends;
use sanction_core::sim::deviation::one_shot_deviation_check;
use sanction_core::sim::engine::{horizon_for_tail, simulate, TAIL_MASS};
use sanction_core::Error;

use crate::seeds::SeedRange;

#[derive(Debug, Parser)]
#[command(name = "sanction-sim", version, about = "Sanctioning reputation mechanism: bounds, simulation and equilibrium sets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form thresholds and bounds for a parameter file.
    Bounds(BoundsArgs),
    /// Roll out a strategy profile under a reputation back-end.
    Simulate(SimulateArgs),
    /// One-shot deviation check of a strategy profile.
    DeviationCheck(DeviationArgs),
    /// Reputation building against a testing provider, or malicious campaigns.
    ReputationSim(ReputationArgs),
    /// Outer approximation of the equilibrium payoff set.
    PpeSet(PpeArgs),
    /// Write the pizza worked-example table and figure data.
    ReproducePizza(ReproduceArgs),
    /// List the registered profiles, automata, back-ends, models and schedules.
    List,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Text,
    Csv,
    Kv,
}

#[derive(Debug, Args)]
pub struct ParamsArg {
    /// Key-value parameter file.
    #[arg(long)]
    pub params: PathBuf,
    /// Override the client's discount factor.
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub params: ParamsArg,
    #[arg(long)]
    pub mu_star: Option<f64>,
    #[arg(long)]
    pub v_hat_c: Option<f64>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub params: ParamsArg,
    /// Builtin profile name or `client/provider` automaton pair.
    #[arg(long, default_value = "grim-cooperative")]
    pub profile: String,
    #[arg(long, default_value = "direct")]
    pub backend: String,
    #[arg(long, default_value_t)]
    pub seeds: SeedRange,
    /// Rounds per rollout; defaults to the horizon leaving 1e-12 discount mass.
    #[arg(long)]
    pub rounds: Option<u64>,
    /// Trace CSV, one block of rows per seed.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct DeviationArgs {
    #[command(flatten)]
    pub params: ParamsArg,
    #[arg(long, default_value = "grim-cooperative")]
    pub profile: String,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum ReputationMode {
    #[default]
    Testing,
    Campaign,
}

#[derive(Debug, Args)]
pub struct ReputationArgs {
    #[command(flatten)]
    pub params: ParamsArg,
    /// Prior over client types, e.g. `normal=0.7,commitment=0.2,malicious(3)=0.1`.
    #[arg(long, conflicts_with = "mu_star")]
    pub prior: Option<String>,
    /// Shorthand for a commitment/normal prior with this commitment mass.
    #[arg(long)]
    pub mu_star: Option<f64>,
    /// True type of the client in testing mode.
    #[arg(long, default_value = "commitment")]
    pub client_type: String,
    #[arg(long, value_enum, default_value_t)]
    pub mode: ReputationMode,
    #[arg(long, default_value = "worst-case")]
    pub model: String,
    #[arg(long, default_value = "earliest")]
    pub schedule: String,
    #[arg(long, default_value_t)]
    pub seeds: SeedRange,
    #[arg(long)]
    pub rounds: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PpeArgs {
    #[command(flatten)]
    pub params: ParamsArg,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    pub grid: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    /// Parameter file; the built-in pizza market when omitted.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long, default_value = "repro")]
    pub out_dir: PathBuf,
}

#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numeric() {
            Failure::Numeric(e.to_string())
        } else {
            Failure::Validation(e.to_string())
        }
    }
}

type CmdResult = Result<(), Failure>;

pub fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Bounds(a) => bounds(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::DeviationCheck(a) => deviation(a),
        Command::ReputationSim(a) => reputation(a),
        Command::PpeSet(a) => ppe(a),
        Command::ReproducePizza(a) => reproduce(a),
        Command::List => {
            list();
            Ok(())
        }
    }
}

fn load(arg: &ParamsArg) -> Result<MarketParams, Failure> {
    let mut params = MarketParams::from_kv_file(&arg.params)?;
    if let Some(d) = arg.delta {
        params = params.with_delta(d);
    }
    params.validate()?;
    Ok(params)
}

fn write_table(table: &CsvTable, path: &Path) -> CmdResult {
    table.write(path)?;
    Ok(())
}

/// Prints `(key, value)` pairs as aligned text, a two-column CSV or
/// `key=value` lines.
fn emit(entries: &[(String, String)], format: Format) {
    let mut out = String::new();
    match format {
        Format::Text => {
            let width = entries.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            for (k, v) in entries {
                let _ = writeln!(out, "{k:<width$}  {v}");
            }
        }
        Format::Csv => {
            let _ = writeln!(out, "key,value");
            for (k, v) in entries {
                let _ = writeln!(out, "{k},{v}");
            }
        }
        Format::Kv => {
            for (k, v) in entries {
                let _ = writeln!(out, "{k}={v}");
            }
        }
    }
    print!("{out}");
}

fn owned(entries: Vec<(&str, String)>) -> Vec<(String, String)> {
    entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn bounds(a: BoundsArgs) -> CmdResult {
    let params = load(&a.params)?;
    let report = BoundReport::compute(&params, a.mu_star, a.v_hat_c)?;
    let mut entries = owned(report.entries());
    entries.push(("delta_consistent".into(), params.delta_consistent().to_string()));
    emit(&entries, a.format);
    Ok(())
}

fn simulate_cmd(a: SimulateArgs) -> CmdResult {
    let params = load(&a.params)?;
    let profile = profile_by_name(&a.profile)?;
    let registry = backends();
    let factory = registry.get(&a.backend)?;
    let rounds = a.rounds.unwrap_or_else(|| horizon_for_tail(params.delta, TAIL_MASS));

    let mut trace_table: Option<CsvTable> = None;
    let mut summary = CsvTable::new(&["seed", "rounds", "v_client", "v_provider"]);
    for seed in a.seeds.iter() {
        let mut backend = factory(&params);
        let trace = simulate(&params, &profile, backend.as_mut(), seed, rounds)?;
        let v = trace.normalized_payoff(params.delta)?;
        summary.push(vec![seed.to_string(), rounds.to_string(), fmt_num(v.v_client), fmt_num(v.v_provider)]);
        if a.out.is_some() {
            let t = trace.to_csv();
            let table = trace_table.get_or_insert_with(|| {
                let mut header = vec!["seed"];
                header.extend(t.header.iter().map(String::as_str));
                CsvTable::new(&header)
            });
            for row in t.rows {
                let mut r = vec![seed.to_string()];
                r.extend(row);
                table.push(r);
            }
        }
    }
    if let (Some(path), Some(t)) = (&a.out, &trace_table) {
        write_table(t, path)?;
    }
    print_table(&summary, a.format);
    Ok(())
}

/// Tables print as CSV in every format except `kv`, which prints one
/// `key=value` block per row.
fn print_table(t: &CsvTable, format: Format) {
    match format {
        Format::Kv => {
            for row in &t.rows {
                let line: Vec<String> = t.header.iter().zip(row).map(|(h, v)| format!("{h}={v}")).collect();
                println!("{}", line.join(" "));
            }
        }
        Format::Text | Format::Csv => print!("{}", t.to_csv_string()),
    }
}

fn deviation(a: DeviationArgs) -> CmdResult {
    let params = load(&a.params)?;
    let profile = profile_by_name(&a.profile)?;
    let report = one_shot_deviation_check(&params, &profile, params.delta, a.tol)?;
    let mut entries = vec![
        ("profile".to_string(), profile.name.clone()),
        ("delta".to_string(), fmt_num(params.delta)),
        ("passed".to_string(), report.passed().to_string()),
        ("states".to_string(), report.states.len().to_string()),
    ];
    if let Some(w) = report.worst() {
        entries.push(("worst_gain".into(), fmt_num(w.gain)));
        entries.push(("worst_player".into(), w.player.to_string()));
        entries.push(("worst_deviation".into(), w.deviation.to_string()));
        entries.push(("worst_state".into(), w.state_label.clone()));
    }
    emit(&entries, a.format);
    Ok(())
}

fn reputation(a: ReputationArgs) -> CmdResult {
    let params = load(&a.params)?;
    let prior = match (&a.prior, a.mu_star) {
        (Some(text), _) => Prior::parse(text, params.p)?,
        (None, Some(mu)) => Prior::commitment_vs_normal(mu)?,
        (None, None) => return Err(Failure::Validation("one of --prior or --mu-star is required".into())),
    };
    let rounds = a.rounds.unwrap_or_else(|| horizon_for_tail(params.delta, TAIL_MASS));
    let table = match a.mode {
        ReputationMode::Testing => {
            let client_type = ClientType::parse(&a.client_type, params.p)?;
            let models = belief_models();
            let model = (models.get(&a.model)?)();
            let schedules = test_schedules();
            let schedule = (schedules.get(&a.schedule)?)();
            let config = TestingConfig {
                prior,
                delta: params.delta,
                client_type,
                conjecture: ReportingConjecture::new(ReportProbs::new(0.0, 0.0)?),
                model: model.as_ref(),
                schedule: schedule.as_ref(),
                rounds,
                stop_when_settled: true,
            };
            let mut t = CsvTable::new(&["seed", "test_count", "phase", "settled_round", "exposed_round"]);
            let opt = |r: Option<u64>| r.map_or_else(|| "NA".to_string(), |r| r.to_string());
            for seed in a.seeds.iter() {
                let run = testing_provider(&params, &config, seed)?;
                let phase = match run.phase {
                    ProviderPhase::Testing => "testing",
                    ProviderPhase::Settled => "settled",
                    ProviderPhase::Exploiting => "exploiting",
                };
                t.push(vec![
                    seed.to_string(),
                    run.test_count.to_string(),
                    phase.to_string(),
                    opt(run.settled_round),
                    opt(run.exposed_round),
                ]);
            }
            t
        }
        ReputationMode::Campaign => {
            let mut t = CsvTable::new(&["seed", "client_type", "false_negatives", "exposed_round"]);
            for seed in a.seeds.iter() {
                let run = malicious_campaign_sim(&params, &prior, seed, rounds)?;
                t.push(vec![
                    seed.to_string(),
                    run.client_type.to_string(),
                    run.false_negatives.to_string(),
                    run.exposed_round.map_or_else(|| "NA".to_string(), |r| r.to_string()),
                ]);
            }
            t
        }
    };
    match &a.out {
        Some(path) => write_table(&table, path)?,
        None => print!("{}", table.to_csv_string()),
    }
    Ok(())
}

fn ppe(a: PpeArgs) -> CmdResult {
    let params = load(&a.params)?;
    let result = compute_ppe_set(&params, params.delta, a.grid, a.max_iters, a.tol)?;
    if let Some(path) = &a.out {
        write_table(&result.set.to_csv(&params), path)?;
    }
    let pareto_check = check_frontier_reports(&result.set, &params, ReportScope::Pareto, a.tol);
    let rows_check = check_frontier_reports(&result.set, &params, ReportScope::RowMaxima, a.tol);
    let mut entries = vec![
        ("delta".to_string(), fmt_num(params.delta)),
        ("grid".to_string(), fmt_num(a.grid)),
        ("iterations".to_string(), result.iterations.to_string()),
        ("converged".to_string(), result.converged.to_string()),
        ("points".to_string(), result.set.len().to_string()),
        ("hull_vertices".to_string(), result.set.hull().len().to_string()),
        ("no_negative_reports_pareto".to_string(), pareto_check.passed().to_string()),
        (
            "negative_reports_row_maxima".to_string(),
            rows_check.counterexamples.len().to_string(),
        ),
    ];
    if let Some(client_floor) = check_client_floor(&result.set, &params) {
        entries.push(("min_client".into(), fmt_num(client_floor.min_client)));
        entries.push(("implied_gamma".into(), fmt_num(client_floor.implied_gamma)));
        entries.push(("gamma_bound".into(), fmt_num(client_floor.gamma_bound)));
    }
    emit(&entries, a.format);
    if !result.converged {
        return Err(Failure::Numeric(format!(
            "no fixed point after {} iterations; partial set written",
            a.max_iters
        )));
    }
    Ok(())
}

fn reproduce(a: ReproduceArgs) -> CmdResult {
    let params = match &a.params {
        Some(path) => {
            let p = MarketParams::from_kv_file(path)?;
            p.validate()?;
            p
        }
        None => MarketParams::pizza(),
    };
    for path in reproduce_pizza(&params, &a.out_dir)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn list() {
    let section = |title: &str, rows: Vec<(String, String)>| {
        println!("{title}:");
        for (name, summary) in rows {
            println!("  {name:<20} {summary}");
        }
    };
    let pairs = |v: Vec<(&str, &str)>| v.into_iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
    section("profiles", pairs(builtin_profiles().describe()));
    section("client automata", pairs(client_automata().describe()));
    section("provider automata", pairs(provider_automata().describe()));
    section("backends", pairs(backends().describe()));
    section("belief models", pairs(belief_models().describe()));
    section("test schedules", pairs(test_schedules().describe()));
}
