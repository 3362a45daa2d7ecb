use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use nr2::formats::{
    format_fixed, parse_matrix, parse_metrics, parse_scenario, round_half_away, write_ranking,
    write_report, MATRIX_DIGITS, REPORT_DIGITS,
};
use nr2::sim::{compare, run, standard_policies};
use nr2::{
    comparison_matrix, rank, row_minima, ComparisonMatrix, Error, MembershipProvider,
    PairwiseMatrix, SelectionPolicy, SimReport,
};

/// Rank routes by fuzzy relative comparison and simulate route selection.
#[derive(Parser, Debug)]
#[command(name = "nr2", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Rank routes from a pairwise matrix or a metrics table.
    #[command(group(ArgGroup::new("input").required(true).args(["pairwise", "metrics"])))]
    Rank {
        /// Pairwise membership matrix (CSV).
        #[arg(long, value_name = "PATH")]
        pairwise: Option<PathBuf>,
        /// Route metrics table (CSV).
        #[arg(long, value_name = "PATH", requires = "provider")]
        metrics: Option<PathBuf>,
        /// How metrics become pairwise memberships.
        #[arg(long, value_enum, requires = "metrics")]
        provider: Option<Provider>,
        /// Print the comparison matrix and row minima for metrics input too.
        #[arg(long)]
        show_comparison: bool,
        /// Write the ranking as CSV.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Run one policy over a scenario.
    Simulate {
        #[arg(long, value_name = "PATH")]
        scenario: PathBuf,
        /// nr2:ratio, nr2:majority, weighted:W1,W2,W3 or hops.
        #[arg(long)]
        policy: String,
        /// Write the full report, including the per-tick log.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Run every standard policy over a scenario.
    Compare {
        #[arg(long, value_name = "PATH")]
        scenario: PathBuf,
        /// Write the full report, including the per-tick log.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Provider {
    Ratio,
    Majority,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }

    fn from_error(e: Error, context: Option<&Path>) -> Self {
        let code = match e {
            Error::DegenerateComparison { .. } | Error::NoRoute { .. } => 2,
            _ => 1,
        };
        let message = match context {
            Some(path) => format!("{}: {e}", path.display()),
            None => e.to_string(),
        };
        Failure { code, message }
    }
}

type Outcome<T> = Result<T, Failure>;

fn read(path: &Path) -> Outcome<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Outcome<()> {
    std::fs::write(path, text)
        .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))
}

fn display(x: f64) -> String {
    // rounded from the 9-digit file value so screen and file agree
    format_fixed(round_half_away(round_half_away(x, MATRIX_DIGITS), 2), 2)
}

fn show_comparison(out: &mut String, c: &ComparisonMatrix) {
    let ids = c.route_ids();
    let width = ids
        .iter()
        .map(|id| id.as_str().len())
        .max()
        .unwrap_or(0)
        .max(4);
    out.push_str("comparison matrix\n");
    let _ = write!(out, "{:width$}", "");
    for id in ids {
        let _ = write!(out, "  {:>width$}", id.as_str());
    }
    out.push('\n');
    for (i, id) in ids.iter().enumerate() {
        let _ = write!(out, "{:width$}", id.as_str());
        for &v in c.row(i) {
            let _ = write!(out, "  {:>width$}", display(v));
        }
        out.push('\n');
    }
    out.push_str("row minima\n");
    for (id, m) in ids.iter().zip(row_minima(c)) {
        let _ = writeln!(out, "{:width$}  {}", id.as_str(), display(m));
    }
}

fn rank_command(
    pairwise: Option<PathBuf>,
    metrics: Option<PathBuf>,
    provider: Option<Provider>,
    show: bool,
    out_path: Option<PathBuf>,
) -> Outcome<String> {
    let (p, show, source): (PairwiseMatrix, bool, PathBuf) = match (pairwise, metrics, provider) {
        (Some(path), None, _) => {
            let p = parse_matrix(&read(&path)?).map_err(|e| Failure::from_error(e, Some(&path)))?;
            (p, true, path)
        }
        (None, Some(path), Some(provider)) => {
            let table =
                parse_metrics(&read(&path)?).map_err(|e| Failure::from_error(e, Some(&path)))?;
            let provider = match provider {
                Provider::Ratio => MembershipProvider::DesirabilityRatio(None),
                Provider::Majority => MembershipProvider::MetricMajority(None),
            };
            let p = provider
                .pairwise(&table)
                .map_err(|e| Failure::from_error(e, Some(&path)))?;
            (p, show, path)
        }
        _ => {
            return Err(Failure::usage(
                "rank needs --pairwise PATH or --metrics PATH --provider",
            ))
        }
    };
    let mut out = String::new();
    if show {
        let c = comparison_matrix(&p).map_err(|e| Failure::from_error(e, Some(&source)))?;
        show_comparison(&mut out, &c);
    }
    let ranking = rank(&p).map_err(|e| Failure::from_error(e, Some(&source)))?;
    for (k, e) in ranking.entries().iter().enumerate() {
        let _ = writeln!(
            out,
            "rank {}: {} score {}",
            k + 1,
            e.id,
            format_fixed(e.score, REPORT_DIGITS)
        );
    }
    if let Some(path) = out_path {
        write(&path, &write_ranking(&ranking))?;
    }
    Ok(out)
}

fn report_command(
    scenario: &Path,
    policies: &[SelectionPolicy],
    out_path: Option<PathBuf>,
) -> Outcome<String> {
    let s = parse_scenario(&read(scenario)?).map_err(|e| Failure::from_error(e, Some(scenario)))?;
    let report: SimReport = if policies.len() == 1 {
        run(&s, &policies[0])
    } else {
        compare(&s, policies)
    }
    .map_err(|e| Failure::from_error(e, Some(scenario)))?;
    if let Some(path) = out_path {
        write(&path, &write_report(&report, true))?;
    }
    Ok(write_report(&report, false))
}

fn execute(command: Command) -> Outcome<String> {
    match command {
        Command::Rank {
            pairwise,
            metrics,
            provider,
            show_comparison,
            out,
        } => rank_command(pairwise, metrics, provider, show_comparison, out),
        Command::Simulate {
            scenario,
            policy,
            out,
        } => {
            let policy: SelectionPolicy =
                policy.parse().map_err(|e| Failure::from_error(e, None))?;
            report_command(&scenario, &[policy], out)
        }
        Command::Compare { scenario, out } => report_command(&scenario, &standard_policies(), out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let line = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("{}", line.trim());
            return ExitCode::from(1);
        }
    };
    match execute(cli.command) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message.replace('\n', " "));
            ExitCode::from(f.code)
        }
    }
}
