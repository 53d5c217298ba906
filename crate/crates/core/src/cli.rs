//! Command-line driver.
//!
//! Exit codes: 0 success, 1 bad input (usage, config, I/O), 2 an internal
//! invariant or oracle check failed.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand};

use crate::accounting::{best_net_gain, break_even, cost_report, sweep, SweepParams, SweepRow};
use crate::config::{load_canonical, load_config, LoadedConfig, ReferenceCount};
use crate::duplication::{duplicate, Action, Strategy};
use crate::model::Thresholds;
use crate::oracle::canonical_search;
use crate::placement::{relocate_all, RelocationRule};
use crate::report;
use crate::topology::canonical_matrix;
use crate::verify::property_suite;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INVARIANT: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "vidrep",
    version,
    about = "Replica placement for zoned video-sharing networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Network config (JSON). Defaults to the bundled reference dataset.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Override the config's relocation rule.
    #[arg(long, value_name = "min-cost|max-demand")]
    pub relocation: Option<RelocationRule>,
    /// Directory to write report files into.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Move every file to its best location and print the relocation table.
    BestLocate {
        #[command(flatten)]
        common: Common,
    },
    /// Run one duplication pass and print the placement grid and trace.
    Duplicate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        strategy: Strategy,
        /// Maximum access cost.
        #[arg(long = "A", value_name = "COST")]
        max_access_cost: Option<u64>,
        /// Minimum hits allowing duplication.
        #[arg(long = "Y", value_name = "HITS")]
        min_hits: Option<u64>,
    },
    /// Run independent duplication passes over a list of Y values.
    #[command(group(ArgGroup::new("ys").required(true).args(["y_list", "y_range"])))]
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        strategy: Strategy,
        #[arg(long = "A", value_name = "COST")]
        max_access_cost: Option<u64>,
        /// Comma-separated Y values.
        #[arg(long = "Y-list", value_delimiter = ',', value_name = "Y,Y,...")]
        y_list: Option<Vec<u64>>,
        /// Inclusive range FROM:TO:STEP.
        #[arg(long = "Y-range", value_name = "FROM:TO:STEP", value_parser = parse_range)]
        y_range: Option<YRange>,
    },
    /// Run the oracle agreement suite and the reference-matrix search.
    Verify {
        /// Random instances per property.
        #[arg(long, default_value_t = 500)]
        instances: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        /// Skip the reference-matrix constraint search.
        #[arg(long)]
        skip_search: bool,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct YRange {
    pub from: u64,
    pub to: u64,
    pub step: u64,
}

impl YRange {
    pub fn values(&self) -> Vec<u64> {
        (self.from..=self.to).step_by(self.step as usize).collect()
    }
}

fn parse_range(s: &str) -> Result<YRange, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [from, to, step] = parts[..] else {
        return Err(format!("expected FROM:TO:STEP, got '{s}'"));
    };
    let num = |p: &str| p.trim().parse::<u64>().map_err(|e| format!("'{p}': {e}"));
    let range = YRange {
        from: num(from)?,
        to: num(to)?,
        step: num(step)?,
    };
    if range.step == 0 || range.from > range.to {
        return Err(format!("empty range '{s}'"));
    }
    Ok(range)
}

/// Failure of a command, mapped to an exit code.
#[derive(Debug)]
enum Failure {
    Input(String),
    Invariant(String),
}

impl<E: std::error::Error> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.to_string())
    }
}

struct Output<'a> {
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
    out_dir: Option<PathBuf>,
}

impl Output<'_> {
    fn file(&self, name: &str, contents: &str) -> Result<(), Failure> {
        if let Some(dir) = &self.out_dir {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(name), contents).map_err(|e| {
                Failure::Input(format!("writing {}: {e}", dir.join(name).display()))
            })?;
        }
        Ok(())
    }
}

fn load(common: &Common) -> Result<LoadedConfig, Failure> {
    let mut loaded = match &common.config {
        Some(path) => load_config(path)?,
        None => load_canonical(),
    };
    if let Some(rule) = common.relocation {
        loaded.relocation = rule;
    }
    Ok(loaded)
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    run_command(cli.command, stdout, stderr)
}

pub fn run_command(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let out_dir = match &command {
        Command::BestLocate { common }
        | Command::Duplicate { common, .. }
        | Command::Sweep { common, .. } => common.out.clone(),
        Command::Verify { out, .. } => out.clone(),
    };
    let mut output = Output {
        stdout,
        stderr,
        out_dir,
    };
    let result = match command {
        Command::BestLocate { common } => best_locate(&common, &mut output),
        Command::Duplicate {
            common,
            strategy,
            max_access_cost,
            min_hits,
        } => run_duplicate(&common, strategy, max_access_cost, min_hits, &mut output),
        Command::Sweep {
            common,
            strategy,
            max_access_cost,
            y_list,
            y_range,
        } => {
            let ys = y_list.unwrap_or_else(|| y_range.map(|r| r.values()).unwrap_or_default());
            run_sweep(&common, strategy, max_access_cost, &ys, &mut output)
        }
        Command::Verify {
            instances,
            seed,
            skip_search,
            ..
        } => run_verify(instances, seed, skip_search, &mut output),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Input(msg)) => {
            let _ = writeln!(output.stderr, "error: {msg}");
            EXIT_INPUT
        }
        Err(Failure::Invariant(msg)) => {
            let _ = writeln!(output.stderr, "invariant violated: {msg}");
            EXIT_INVARIANT
        }
    }
}

fn best_locate(common: &Common, out: &mut Output) -> Result<(), Failure> {
    let cfg = load(common)?;
    let relocation = relocate_all(&cfg.network, cfg.relocation);
    if cfg.relocation == RelocationRule::MinCost
        && relocation.total_cost_after() > relocation.total_cost_before()
    {
        return Err(Failure::Invariant(
            "relocation increased total access cost".into(),
        ));
    }
    let csv = report::relocation_csv(&relocation);
    out.stdout.write_all(csv.as_bytes())?;
    out.file("relocation.csv", &csv)?;
    out.file(
        "placement.txt",
        &report::format_grid(&relocation.placement, cfg.network.zones()),
    )?;
    Ok(())
}

fn run_duplicate(
    common: &Common,
    strategy: Strategy,
    max_access_cost: Option<u64>,
    min_hits: Option<u64>,
    out: &mut Output,
) -> Result<(), Failure> {
    let cfg = load(common)?;
    let net = &cfg.network;
    let thresholds = Thresholds::new(
        max_access_cost.unwrap_or(cfg.thresholds.max_access_cost),
        min_hits.unwrap_or(cfg.thresholds.min_hits),
    );
    let relocated = relocate_all(net, cfg.relocation).placement;
    let run = duplicate(net, &relocated, strategy, thresholds);
    let report = cost_report(net, &relocated, &run.placement, &cfg.tariff)
        .map_err(|e| Failure::Invariant(e.to_string()))?;
    if report.gain != report.access_before - report.access_after {
        return Err(Failure::Invariant(
            "gain breakdown does not sum to total".into(),
        ));
    }
    for event in run.trace.skipped() {
        writeln!(
            out.stderr,
            "warning: no zone within A={} of zone {} for {}; trigger skipped",
            thresholds.max_access_cost,
            event.consumer_zone.get(),
            event.file
        )?;
    }

    let grid = report::format_grid(&run.placement, net.zones());
    let trace = run.trace.to_json_lines();
    write!(out.stdout, "{grid}\n{trace}")?;
    writeln!(
        out.stderr,
        "{} at A={} Y={}: {} duplicates ({} triggers, {} no-ops)",
        strategy,
        thresholds.max_access_cost,
        thresholds.min_hits,
        run.duplicates(),
        run.triggers.len(),
        run.trace
            .events
            .iter()
            .filter(|e| matches!(e.action, Action::NoOp { .. }))
            .count()
    )?;
    out.file("placement.txt", &grid)?;
    out.file("trace.jsonl", &trace)?;
    out.file("cells.csv", &report::cells_csv(&report))?;
    out.file("summary.csv", &report::report_summary_csv(&report))?;
    Ok(())
}

fn divergence_notes(
    rows: &[SweepRow],
    strategy: Strategy,
    reference: &[ReferenceCount],
) -> Vec<String> {
    rows.iter()
        .filter_map(|row| {
            let p = reference
                .iter()
                .find(|p| p.strategy == strategy && p.min_hits == row.min_hits)?;
            (p.count != row.duplicates).then(|| {
                format!(
                    "divergence: {} at Y={} places {} replicas; reference count is {}",
                    strategy, row.min_hits, row.duplicates, p.count
                )
            })
        })
        .collect()
}

fn run_sweep(
    common: &Common,
    strategy: Strategy,
    max_access_cost: Option<u64>,
    ys: &[u64],
    out: &mut Output,
) -> Result<(), Failure> {
    let cfg = load(common)?;
    let params = SweepParams {
        rule: cfg.relocation,
        strategy,
        max_access_cost: max_access_cost.unwrap_or(cfg.thresholds.max_access_cost),
        tariff: cfg.tariff,
    };
    let rows = sweep(&cfg.network, &params, ys)?;
    if strategy == Strategy::Caching && rows.windows(2).any(|w| w[1].duplicates > w[0].duplicates) {
        return Err(Failure::Invariant(
            "caching duplicates increased with Y".into(),
        ));
    }

    let csv = report::sweep_csv(&rows);
    out.stdout.write_all(csv.as_bytes())?;

    let mut notes = divergence_notes(&rows, strategy, &cfg.reference_counts);
    match break_even(&rows) {
        Some(y) => notes.push(format!(
            "break-even: net gain turns non-negative at Y≈{y:.0}"
        )),
        None => notes.push("break-even: no loss-to-gain crossing in this sweep".into()),
    }
    if let Some(best) = best_net_gain(&rows) {
        notes.push(format!(
            "best net gain: {} m.u. at Y={}",
            report::money(best.net_gain),
            best.min_hits
        ));
    }
    let notes_text: String = notes.iter().map(|n| format!("{n}\n")).collect();
    out.stderr.write_all(notes_text.as_bytes())?;

    out.file("sweep.csv", &csv)?;
    out.file("sweep_files.csv", &report::sweep_files_csv(&rows))?;
    out.file("sweep_zones.csv", &report::sweep_zones_csv(&rows))?;
    out.file("notes.txt", &notes_text)?;
    Ok(())
}

fn run_verify(
    instances: usize,
    seed: u64,
    skip_search: bool,
    out: &mut Output,
) -> Result<(), Failure> {
    let outcomes = property_suite(instances, seed);
    let mut failed = Vec::new();
    for o in &outcomes {
        writeln!(out.stdout, "{}", o.line())?;
        for f in &o.failures {
            writeln!(out.stdout, "    {f}")?;
        }
        if !o.passed() {
            failed.push(o.name.to_string());
        }
    }

    let mut search_lines = Vec::new();
    if !skip_search {
        match canonical_search() {
            Ok(hits) => {
                let member = hits.iter().any(|h| h.matrix == canonical_matrix());
                let first = hits[0].matrix == canonical_matrix();
                search_lines.push(format!(
                    "{} reference matrix search: {} satisfying assignments; frozen matrix is {}",
                    if member && first { "PASS" } else { "FAIL" },
                    hits.len(),
                    if first {
                        "the lexicographically first"
                    } else if member {
                        "a member but not the first"
                    } else {
                        "NOT a member"
                    }
                ));
                for h in hits.iter().take(10) {
                    search_lines.push(format!("    (1,4)(2,3)(2,6)(4,5) = {:?}", h.assignment));
                }
                if !(member && first) {
                    failed.push("reference matrix search".into());
                }
            }
            Err(e) => {
                search_lines.push(format!("FAIL reference matrix search: {e}"));
                failed.push("reference matrix search".into());
            }
        }
        for l in &search_lines {
            writeln!(out.stdout, "{l}")?;
        }
    }

    let json = serde_json::to_string_pretty(&outcomes).expect("outcomes serialize");
    out.file("verify.json", &(json + "\n"))?;
    out.file(
        "search.txt",
        &search_lines
            .iter()
            .map(|l| format!("{l}\n"))
            .collect::<String>(),
    )?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Invariant(format!(
            "failed checks: {}",
            failed.join(", ")
        )))
    }
}
