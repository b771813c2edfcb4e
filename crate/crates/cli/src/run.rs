use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;
use std::time::Duration;

use counterctl_core::ctl::{ApproxLabel, CheckError, Checker, CtlFormula, Engine};
use counterctl_core::flatten::FlatteningEnumerator;
use counterctl_core::presburger::{Formula, Solver};
use counterctl_core::reach::{Budget, Clock, Stats};
use counterctl_core::syntax::{parse_ctl, ParseError};
use counterctl_core::system::{CounterSystem, ReachTag};

use crate::clock::StdClock;
use crate::sysfile::{parse_system, print_system, SysFileError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Human,
    Record,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PropertySource {
    Inline(String),
    File(PathBuf),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub system_path: PathBuf,
    pub property: PropertySource,
    pub label: ApproxLabel,
    pub engine: Engine,
    pub budget: Budget,
    pub format: OutputFormat,
    pub dump_refined: bool,
    pub dump_flattenings: Option<usize>,
    pub dump_iterations: bool,
}

impl RunConfig {
    pub fn new(system_path: impl Into<PathBuf>, property: PropertySource) -> RunConfig {
        RunConfig {
            system_path: system_path.into(),
            property,
            label: ApproxLabel::Precise,
            engine: Engine::Auto,
            budget: Budget::default(),
            format: OutputFormat::Human,
            dump_refined: false,
            dump_flattenings: None,
            dump_iterations: false,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{source}")]
    System { path: PathBuf, source: SysFileError },
    #[error("property:{0}")]
    Property(ParseError),
    #[error("budget exceeded before a precise answer was found")]
    BudgetExceededPrecise,
    #[error(transparent)]
    Check(CheckError),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        2
    }
}

/// Outcome of a successful run.
#[derive(Debug, Clone)]
pub struct Report {
    pub formula: Formula,
    pub label: ApproxLabel,
    pub reach_tag: ReachTag,
    pub elapsed: Duration,
    pub stats: Stats,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        match self.label {
            ApproxLabel::Precise => 0,
            ApproxLabel::Under => 10,
            ApproxLabel::Over => 11,
        }
    }

    /// One `key=value` per line.
    pub fn record(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "formula={}", self.formula);
        let _ = writeln!(s, "label={}", self.label);
        let _ = writeln!(s, "rt_ms={}", self.elapsed.as_millis());
        let _ = writeln!(s, "fl={}", self.stats.max_flattening_length);
        let _ = writeln!(s, "nfe={}", self.stats.flattenings_explored);
        let _ = writeln!(s, "ni={}", self.stats.eg_iterations);
        let _ = writeln!(s, "reach_tag={}", self.reach_tag);
        let _ = writeln!(s, "exit={}", self.exit_code());
        s
    }

    pub fn human(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{}", self.formula);
        let _ = writeln!(s, "label: {}", self.label);
        let _ = writeln!(s, "reach: {}", self.reach_tag);
        let _ = writeln!(
            s,
            "RT {} ms, FL {}, NFE {}, NI {}",
            self.elapsed.as_millis(),
            self.stats.max_flattening_length,
            self.stats.flattenings_explored,
            self.stats.eg_iterations
        );
        for n in &self.stats.notes {
            let _ = writeln!(s, "note: {n}");
        }
        s
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Human => self.human(),
            OutputFormat::Record => self.record(),
        }
    }
}

pub fn load_system(path: &PathBuf) -> Result<CounterSystem, RunError> {
    let src = std::fs::read_to_string(path).map_err(|source| RunError::Io { path: path.clone(), source })?;
    parse_system(&src).map_err(|source| RunError::System { path: path.clone(), source })
}

pub fn load_property(src: &PropertySource) -> Result<CtlFormula, RunError> {
    let text = match src {
        PropertySource::Inline(s) => s.clone(),
        PropertySource::File(p) => std::fs::read_to_string(p).map_err(|source| RunError::Io { path: p.clone(), source })?,
    };
    Ok(parse_ctl(&text).map_err(RunError::Property)?.to_enf())
}

/// Runs one query. Requested dumps are written to `dumps`.
pub fn run(config: &RunConfig, dumps: &mut dyn Write) -> Result<Report, RunError> {
    let clock = StdClock::start();
    let m = load_system(&config.system_path)?;
    let psi = load_property(&config.property)?;
    let checker = Checker::new(&m, &clock, config.budget, config.engine).map_err(RunError::Check)?;
    if config.dump_refined {
        let _ = writeln!(dumps, "# system with reachable-state guards\n{}", print_system(checker.system()));
    }
    let r = checker.sat(&psi, config.label).map_err(|e| match e {
        CheckError::BudgetExceededPrecise => RunError::BudgetExceededPrecise,
        e => RunError::Check(e),
    });
    let traces = checker.eg_traces();
    for t in &traces {
        let refined = checker.system().refine(&t.phi);
        if config.dump_refined {
            let _ = writeln!(dumps, "# refined by {}\n{}", t.phi, print_system(&refined));
        }
        if let Some(len) = config.dump_flattenings {
            let solver = Solver::default();
            let mut e = FlatteningEnumerator::new(&solver, &refined);
            for l in 1..=len {
                for (i, fl) in e.next_length().iter().enumerate() {
                    let _ = writeln!(dumps, "# flattening {i} of length {l}, refined by {}\n{}", t.phi, print_system(fl.system()));
                }
            }
        }
        if config.dump_iterations {
            for (i, h) in t.history.iter().enumerate() {
                let _ = writeln!(dumps, "# {} iteration {i}: {h}", t.routine);
            }
        }
    }
    let r = r?;
    Ok(Report {
        formula: r.formula,
        label: r.label,
        reach_tag: checker.reach_tag(),
        elapsed: clock.elapsed(),
        stats: r.stats,
    })
}

