use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, ValueEnum};
use counterctl::{run, OutputFormat, PropertySource, RunConfig};
use counterctl_core::ctl::{ApproxLabel, Engine};
use counterctl_core::reach::Budget;

#[derive(Clone, Copy, ValueEnum)]
enum LabelArg {
    Precise,
    Under,
    Over,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Auto,
    Under,
    Over,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Human,
    Record,
}

/// Global CTL model checking of Presburger counter systems.
#[derive(Parser)]
#[command(name = "counterctl", version)]
struct Args {
    /// System file.
    #[arg(long)]
    system: PathBuf,
    /// Property text, e.g. "EG (x < 10)".
    #[arg(long, conflicts_with = "prop_file", required_unless_present = "prop_file")]
    prop: Option<String>,
    /// File holding the property.
    #[arg(long)]
    prop_file: Option<PathBuf>,
    /// Requested approximation direction.
    #[arg(long, value_enum, default_value = "precise")]
    label: LabelArg,
    /// EG routine.
    #[arg(long, value_enum, default_value = "auto")]
    engine: EngineArg,
    /// Wall-clock limit in seconds.
    #[arg(long, default_value_t = 60.0)]
    timeout: f64,
    /// Fixpoint iteration cap for bounded computations.
    #[arg(long)]
    max_iters: Option<u64>,
    /// Longest flattening tried by the under routine.
    #[arg(long)]
    max_flat_len: Option<usize>,
    /// Node limit per decision-procedure call.
    #[arg(long)]
    qe_node_limit: Option<u64>,
    #[arg(long, value_enum, default_value = "human")]
    format: FormatArg,
    /// Print the strengthened and refined systems to stderr.
    #[arg(long)]
    dump_refined: bool,
    /// Print flattenings up to this length to stderr.
    #[arg(long, num_args = 0..=1, default_missing_value = "4", value_name = "LEN")]
    dump_flattenings: Option<usize>,
    /// Print the per-iteration sets of the EG routines to stderr.
    #[arg(long)]
    dump_iterations: bool,
}

fn main() -> ExitCode {
    let a = Args::parse();
    if !(a.timeout > 0.0 && a.timeout.is_finite()) {
        eprintln!("error: --timeout must be positive");
        return ExitCode::from(2);
    }
    let property = match (a.prop, a.prop_file) {
        (Some(p), _) => PropertySource::Inline(p),
        (None, Some(f)) => PropertySource::File(f),
        (None, None) => unreachable!("clap requires one of them"),
    };
    let mut budget = Budget { wall_clock_limit: Duration::from_secs_f64(a.timeout), ..Budget::default() };
    if let Some(n) = a.max_iters {
        budget.max_iterations = n;
    }
    if let Some(n) = a.max_flat_len {
        budget.max_flattening_length = n;
    }
    if let Some(n) = a.qe_node_limit {
        budget.qe_node_limit = n;
    }
    let config = RunConfig {
        system_path: a.system,
        property,
        label: match a.label {
            LabelArg::Precise => ApproxLabel::Precise,
            LabelArg::Under => ApproxLabel::Under,
            LabelArg::Over => ApproxLabel::Over,
        },
        engine: match a.engine {
            EngineArg::Auto => Engine::Auto,
            EngineArg::Under => Engine::Under,
            EngineArg::Over => Engine::Over,
        },
        budget,
        format: match a.format {
            FormatArg::Human => OutputFormat::Human,
            FormatArg::Record => OutputFormat::Record,
        },
        dump_refined: a.dump_refined,
        dump_flattenings: a.dump_flattenings,
        dump_iterations: a.dump_iterations,
    };
    match run(&config, &mut std::io::stderr()) {
        Ok(report) => {
            print!("{}", report.render(config.format));
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            if config.format == OutputFormat::Record {
                println!("exit={}", e.exit_code());
            }
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
