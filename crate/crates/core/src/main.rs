use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use rounds_lab::cake::format::{read_instance, write_instance};
use rounds_lab::harness::{
    bound_rows, bound_sweep, brute_force_rows, emit_report, random_cake_instance, run_cake_instance, run_experiment, to_csv,
    to_svg, BoundReport, ExperimentConfig, Format, HarnessError, Mode, Problem,
};
use rounds_lab::math::parse_rational;
use rounds_lab::Rational;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Command {
    Locate,
    Select,
    Sort,
    Cake,
    Reduce,
    Bounds,
    Brute,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Exact,
    Mc,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Svg,
}

/// Measure round-bounded query algorithms against their closed-form bounds.
#[derive(Debug, Parser)]
#[command(name = "rounds-lab", version)]
struct Cli {
    command: Command,
    #[arg(long, default_value_t = 16)]
    n: u64,
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Success probability, as `3/4` or `0.75`. `bounds` sweeps 0..1 when omitted.
    #[arg(long)]
    p: Option<String>,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Defaults to exact enumeration when it fits the budget.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Points in the `bounds` sweep, beyond p = 0.
    #[arg(long, default_value_t = 20)]
    steps: u32,
    /// Cake instance to divide instead of random ones.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Save the first random cake instance here.
    #[arg(long)]
    save_instance: Option<PathBuf>,
}

fn parse_p(raw: Option<&str>) -> Result<Option<Rational>, HarnessError> {
    raw.map(|s| parse_rational(s).ok_or_else(|| HarnessError::BadConfig(format!("cannot parse p = {s:?}")))).transpose()
}

fn build_report(cli: &Cli) -> Result<BoundReport, HarnessError> {
    let p = parse_p(cli.p.as_deref())?;
    let problem = match cli.command {
        Command::Bounds => {
            return Ok(match p {
                None => bound_sweep(cli.n, cli.k, cli.steps),
                Some(p) => bound_rows(cli.n, cli.k, &[p]),
            });
        }
        Command::Brute => {
            let n = usize::try_from(cli.n).map_err(|_| HarnessError::SearchSpaceTooLarge("n".into()))?;
            return brute_force_rows(n, cli.k, &p.unwrap_or_else(|| Rational::from_integer(1.into())));
        }
        Command::Locate => Problem::Locate,
        Command::Select => Problem::Select,
        Command::Sort => Problem::Sort,
        Command::Cake => Problem::Cake,
        Command::Reduce => Problem::Reduce,
    };
    if problem == Problem::Cake {
        if let Some(path) = &cli.instance {
            let agents = read_instance(path)?;
            return Ok(BoundReport { rows: vec![run_cake_instance(&agents, cli.k, cli.seed)?] });
        }
        if let Some(path) = &cli.save_instance {
            let n = usize::try_from(cli.n).map_err(|_| HarnessError::BadConfig("n is too large".into()))?;
            write_instance(path, &random_cake_instance(n, cli.seed, 0))?;
        }
    }
    let mut config = ExperimentConfig::new(problem, cli.n, cli.k);
    config.p = p.unwrap_or(config.p);
    config.trials = cli.trials;
    config.seed = cli.seed;
    config.mode = cli.mode.map(|m| match m {
        ModeArg::Exact => Mode::Exact,
        ModeArg::Mc => Mode::MonteCarlo,
    });
    Ok(BoundReport { rows: vec![run_experiment(&config)?] })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match build_report(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let format = match cli.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Svg => Format::Svg,
    };
    let written = match &cli.out {
        Some(path) => emit_report(&report, format, path),
        None => match format {
            Format::Csv => to_csv(&report),
            Format::Svg => to_svg(&report),
        }
        .map(|text| print!("{text}")),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    for row in report.rows.iter().filter(|r| !r.pass) {
        eprintln!("FAIL {} n={} k={} p={}: {}", row.problem, row.n, row.k, row.p, row.note);
    }
    if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
