//! `nicmap` — map workload processes onto cluster cores and simulate the
//! resulting traffic.
//!
//! Four subcommands: `map` computes placements, `simulate` replays a workload
//! on an existing placement file, `compare` runs several strategies side by
//! side and reports improvements, `validate` checks input files and touches
//! nothing.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::{self, ExitCode};

use anyhow::{anyhow, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use nicmap::mapping::{self, Placement, Strategy};
use nicmap::metrics::{aggregate, improvement, to_csv, to_json, ReportRow, WaitingScope};
use nicmap::simengine::{self, write_trace, ArrivalModel, NicDuplex, SimOptions};
use nicmap::topology::ClusterSpec;
use nicmap::workload::{self, Workload, BUNDLED_NAMES};

#[derive(Parser)]
#[command(
    name = "nicmap",
    version,
    about = "Process-to-core mapping and message-level cluster simulation",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute placements for a workload under one or more strategies
    Map(MapArgs),
    /// Simulate a workload on an existing placement and report metrics
    Simulate(SimulateArgs),
    /// Map, simulate, and tabulate several strategies on one workload
    Compare(CompareArgs),
    /// Check workload, cluster, and placement files without running anything
    Validate(ValidateArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Workload file, or the name of a bundled workload
    /// (synt_workload_1 .. synt_workload_4)
    #[arg(short = 'w', long = "workload", value_name = "PATH")]
    workload: String,

    /// Cluster description file; omitted means the built-in platform of
    /// 16 nodes x 4 sockets x 4 cores
    #[arg(short = 'c', long = "cluster", value_name = "PATH")]
    cluster: Option<PathBuf>,
}

#[derive(Args)]
struct SimFlags {
    /// Message arrival process
    #[arg(long, value_enum, default_value_t = ArrivalsOpt::Periodic)]
    arrivals: ArrivalsOpt,

    /// RNG seed; required with `--arrivals poisson` and rejected otherwise
    #[arg(long, value_name = "N", required_if_eq("arrivals", "poisson"))]
    seed: Option<u64>,

    /// Whether each NIC serves both directions at once or one at a time
    #[arg(long = "nic-duplex", value_enum, default_value_t = DuplexOpt::Full)]
    nic_duplex: DuplexOpt,

    /// Which servers count toward the total waiting time
    #[arg(long = "waiting-servers", value_enum, default_value_t = ScopeOpt::All)]
    waiting_servers: ScopeOpt,
}

#[derive(Args)]
struct MapArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Strategies to run, comma-separated
    #[arg(
        short = 's',
        long = "strategies",
        value_name = "LIST",
        value_delimiter = ',',
        default_value = "blocked,cyclic,drb,new"
    )]
    strategies: Vec<Strategy>,

    /// Placement file to write; with several strategies the strategy name is
    /// inserted before the extension. Omitted with a single strategy, the
    /// placement JSON goes to stdout.
    #[arg(short = 'o', long = "out", value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Placement file produced by `map` (or written by hand)
    #[arg(short = 'p', long = "placement", value_name = "PATH")]
    placement: PathBuf,

    #[command(flatten)]
    sim: SimFlags,

    /// Report file to write; omitted prints the report to stdout
    #[arg(short = 'o', long = "out", value_name = "PATH")]
    out: Option<PathBuf>,

    /// Report format
    #[arg(long, value_enum, default_value_t = FormatOpt::Csv)]
    format: FormatOpt,

    /// Write a per-hop trace of every message to this file (CSV)
    #[arg(long, value_name = "PATH")]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Strategies to compare, comma-separated
    #[arg(
        short = 's',
        long = "strategies",
        value_name = "LIST",
        value_delimiter = ',',
        default_value = "blocked,cyclic,drb,new"
    )]
    strategies: Vec<Strategy>,

    #[command(flatten)]
    sim: SimFlags,

    /// Report file to write; omitted prints the table to stdout
    #[arg(short = 'o', long = "out", value_name = "PATH")]
    out: Option<PathBuf>,

    /// Report format
    #[arg(long, value_enum, default_value_t = FormatOpt::Csv)]
    format: FormatOpt,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Placement file to check against the workload and cluster
    #[arg(short = 'p', long = "placement", value_name = "PATH")]
    placement: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ArrivalsOpt {
    Periodic,
    Poisson,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DuplexOpt {
    Full,
    Half,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScopeOpt {
    /// Every server, caches included
    All,
    /// Only NIC and memory servers
    #[value(name = "nic,mem")]
    NicMem,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatOpt {
    Csv,
    Json,
}

impl SimFlags {
    /// clap can demand a seed for poisson arrivals, but not forbid one for
    /// periodic; finish the check here so both directions are usage errors.
    fn check_usage(&self) {
        if self.seed.is_some() && self.arrivals == ArrivalsOpt::Periodic {
            Cli::command()
                .error(
                    ErrorKind::ArgumentConflict,
                    "--seed only applies with --arrivals poisson",
                )
                .exit();
        }
    }

    fn options(&self) -> SimOptions {
        SimOptions {
            arrivals: match self.arrivals {
                ArrivalsOpt::Periodic => ArrivalModel::Periodic,
                ArrivalsOpt::Poisson => ArrivalModel::Poisson {
                    seed: self.seed.expect("clap enforces seed for poisson"),
                },
            },
            duplex: match self.nic_duplex {
                DuplexOpt::Full => NicDuplex::Full,
                DuplexOpt::Half => NicDuplex::Half,
            },
        }
    }

    fn scope(&self) -> WaitingScope {
        match self.waiting_servers {
            ScopeOpt::All => WaitingScope::All,
            ScopeOpt::NicMem => WaitingScope::NicAndMemory,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Simulate(args) => args.sim.check_usage(),
        Command::Compare(args) => args.sim.check_usage(),
        Command::Map(_) | Command::Validate(_) => {}
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Map(args) => cmd_map(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Validate(args) => cmd_validate(args),
    }
}

/// Write to stdout, exiting quietly when the reader has gone away — piping
/// a report into `head` must not end in a panic or an error line.
fn write_stdout(bytes: &[u8]) {
    let mut out = io::stdout().lock();
    let result = out.write_all(bytes).and_then(|()| out.flush());
    if let Err(e) = result {
        if e.kind() == io::ErrorKind::BrokenPipe {
            process::exit(0);
        }
        eprintln!("error: writing to stdout: {e}");
        process::exit(1);
    }
}

/// One line to stdout, with the same broken-pipe tolerance as `write_stdout`.
fn say(line: impl AsRef<str>) {
    let mut text = line.as_ref().to_owned();
    text.push('\n');
    write_stdout(text.as_bytes());
}

/// Resolves `-w` to a workload plus the name used in reports: the file stem
/// for paths, the bare name for bundled workloads.
fn load_workload(arg: &str) -> Result<(Workload, String)> {
    let path = Path::new(arg);
    if path.exists() {
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| arg.to_string());
        return Ok((Workload::load(path)?, name));
    }
    let name = arg.trim_end_matches(".json");
    if let Some(text) = workload::bundled(name) {
        return Ok((Workload::from_json(text, name)?, name.to_string()));
    }
    Err(anyhow!(
        "workload {arg}: file not found and not a bundled workload (bundled: {})",
        BUNDLED_NAMES.join(", ")
    ))
}

fn load_cluster(path: &Option<PathBuf>) -> Result<ClusterSpec> {
    match path {
        Some(p) => Ok(ClusterSpec::load(p)?),
        None => Ok(ClusterSpec::default()),
    }
}

/// Deduplicates the requested strategies into the fixed report order.
fn canonical_strategies(requested: &[Strategy]) -> Vec<Strategy> {
    Strategy::ALL
        .into_iter()
        .filter(|s| requested.contains(s))
        .collect()
}

/// `out.json` + `cyclic` -> `out.cyclic.json`; no extension appends one.
fn strategy_path(base: &Path, strategy: Strategy) -> PathBuf {
    match base.extension() {
        Some(ext) => {
            let stem = base.file_stem().unwrap_or_default().to_string_lossy();
            base.with_file_name(format!(
                "{stem}.{}.{}",
                strategy.name(),
                ext.to_string_lossy()
            ))
        }
        None => base.with_file_name(format!(
            "{}.{}",
            base.file_name().unwrap_or_default().to_string_lossy(),
            strategy.name()
        )),
    }
}

fn node_summary(label: &str, placement: &Placement, spec: &ClusterSpec) -> String {
    let totals = placement.per_node_totals(spec.num_nodes);
    let counts: Vec<String> = totals.iter().map(u32::to_string).collect();
    format!("{label}: processes per node: {}", counts.join(" "))
}

fn cmd_map(args: MapArgs) -> Result<()> {
    let (workload, _) = load_workload(&args.input.workload)?;
    let spec = load_cluster(&args.input.cluster)?;
    let strategies = canonical_strategies(&args.strategies);
    if args.out.is_none() && strategies.len() > 1 {
        Cli::command()
            .error(
                ErrorKind::MissingRequiredArgument,
                "writing several strategies needs --out to name the files",
            )
            .exit();
    }
    for strategy in strategies.iter().copied() {
        let placement = mapping::map_with(strategy, &workload, &spec)?;
        match &args.out {
            Some(base) => {
                let path = if strategies.len() == 1 {
                    base.clone()
                } else {
                    strategy_path(base, strategy)
                };
                placement.save(&path)?;
                say(format!("wrote {}", path.display()));
                say(node_summary(strategy.name(), &placement, &spec));
            }
            None => {
                // Placement JSON owns stdout; the summary goes to stderr so
                // the output stays machine-readable.
                say(placement.to_json());
                eprintln!("{}", node_summary(strategy.name(), &placement, &spec));
            }
        }
    }
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let (workload, workload_name) = load_workload(&args.input.workload)?;
    let spec = load_cluster(&args.input.cluster)?;
    let placement = Placement::load(&args.placement)?;
    placement.validate_against(&workload, &spec)?;

    let results = simengine::run(&workload, &placement, &spec, args.sim.options())?;
    if let Some(trace_path) = &args.trace {
        let file = fs::File::create(trace_path)
            .with_context(|| format!("creating trace file {}", trace_path.display()))?;
        write_trace(&results, BufWriter::new(file))
            .with_context(|| format!("writing trace {}", trace_path.display()))?;
        say(format!("wrote {}", trace_path.display()));
    }

    let label = args
        .placement
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "placement".to_string());
    let rows = vec![ReportRow {
        workload: workload_name,
        strategy: label,
        metrics: aggregate(&results, args.sim.scope()),
    }];
    emit_report(&rows, args.format, args.out.as_deref())
}

fn cmd_compare(args: CompareArgs) -> Result<()> {
    let (workload, workload_name) = load_workload(&args.input.workload)?;
    let spec = load_cluster(&args.input.cluster)?;
    let strategies = canonical_strategies(&args.strategies);
    let options = args.sim.options();
    let scope = args.sim.scope();

    // Run everything before writing anything, so a failure cannot leave a
    // partial report behind.
    let mut rows = Vec::new();
    for strategy in strategies {
        let placement = mapping::map_with(strategy, &workload, &spec)
            .with_context(|| format!("mapping with {strategy}"))?;
        let results = simengine::run(&workload, &placement, &spec, options)
            .with_context(|| format!("simulating {strategy}"))?;
        rows.push(ReportRow {
            workload: workload_name.clone(),
            strategy: strategy.name().to_string(),
            metrics: aggregate(&results, scope),
        });
    }

    emit_report(&rows, args.format, args.out.as_deref())?;

    // Improvement lines always land on stdout, after the table or the
    // "wrote ..." notice.
    if let Some(new_row) = rows.iter().find(|r| r.strategy == Strategy::New.name()) {
        for row in rows.iter().filter(|r| r.strategy != Strategy::New.name()) {
            let line = match improvement(
                new_row.metrics.total_waiting_ns,
                row.metrics.total_waiting_ns,
            ) {
                Some(pct) => format!("improvement of new over {}: {pct:.3}%", row.strategy),
                None => format!(
                    "improvement of new over {}: n/a (baseline has no waiting)",
                    row.strategy
                ),
            };
            say(line);
        }
    }
    Ok(())
}

fn cmd_validate(args: ValidateArgs) -> Result<()> {
    let (workload, _) = load_workload(&args.input.workload)?;
    say(format!(
        "workload ok: {} jobs, {} processes",
        workload.jobs.len(),
        workload.total_processes()
    ));
    let spec = load_cluster(&args.input.cluster)?;
    if args.input.cluster.is_some() {
        say(format!("cluster ok: {} cores", spec.total_cores()));
    }
    if let Some(path) = &args.placement {
        let placement = Placement::load(path)?;
        placement.validate_against(&workload, &spec)?;
        say(format!("placement ok: covers {} processes", placement.len()));
    }
    Ok(())
}

fn emit_report(rows: &[ReportRow], format: FormatOpt, out: Option<&Path>) -> Result<()> {
    let text = match format {
        FormatOpt::Csv => to_csv(rows),
        FormatOpt::Json => to_json(rows),
    };
    match out {
        Some(path) => {
            fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
            say(format!("wrote {}", path.display()));
        }
        None => {
            write_stdout(text.as_bytes());
            if !text.ends_with('\n') {
                write_stdout(b"\n");
            }
        }
    }
    Ok(())
}
