use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tritter_core::analysis::{run_sweep, threshold_table, SweepSpec, SweepVariable};
use tritter_core::io::{
    cm_csv, cm_record, parse_complex, report_csv, report_record, sweep_csv, sweep_record, thresholds_csv,
    thresholds_record, verify_record, verify_text,
};
use tritter_core::measures::parse_list;
use tritter_core::verify;
use tritter_core::{
    apply_loss, build_report, ideal_output_cm, output_cm_via_transform, Error, InputSpec, LossConfig, LossSetting,
    Mode, Roles, Scenario, ScenarioId,
};

/// Largest squeezing accepted on the command line.
const LAMBDA_CAP: f64 = 0.999;

const EXIT_USAGE: u8 = 1;
const EXIT_VERIFY: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(
    name = "tritter",
    version,
    about = "Entanglement and steering of a lossy tritter state"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the output covariance matrix.
    Cm {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        loss: LossArgs,
        /// Construction path of the lossless matrix.
        #[arg(long, value_enum, default_value_t = Via::ClosedForm)]
        via: Via,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Evaluate measures numerically and from closed forms.
    Measures {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        loss: LossArgs,
        /// Comma-separated measure ids, or `all`.
        #[arg(long, default_value = "all")]
        measures: String,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Tabulate measures over a range of T or lambda.
    Sweep {
        /// Variable to sweep.
        #[arg(long, value_enum, default_value_t = Vary::T)]
        vary: Vary,
        #[arg(long)]
        start: Option<f64>,
        #[arg(long)]
        stop: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
        /// Fixed squeezing for a T sweep.
        #[arg(long)]
        lambda: Option<f64>,
        /// Fixed transmissivity for a lambda sweep.
        #[arg(long = "T")]
        t: Option<f64>,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
        scenario: Option<u8>,
        #[command(flatten)]
        roles: RoleArgs,
        #[arg(long, default_value = "all")]
        measures: String,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Transmissivity thresholds of steering and entanglement.
    Thresholds {
        /// Comma-separated lambdas.
        #[arg(long, default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")]
        lambdas: String,
        /// Comma-separated scenario numbers.
        #[arg(long, default_value = "1,2,3,4,5")]
        scenarios: String,
        #[command(flatten)]
        roles: RoleArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run the acceptance checks; exit status 2 if any fails.
    Verify {
        /// Run a single check by number.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=10))]
        check: Option<u8>,
        #[arg(long, value_enum, default_value_t = VerifyFormat::Text)]
        format: VerifyFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct StateArgs {
    /// TMSV parameter lambda = tanh r, in [0, 0.999].
    #[arg(long, conflicts_with = "r")]
    lambda: Option<f64>,
    /// Squeezing r.
    #[arg(long)]
    r: Option<f64>,
    /// Coherent amplitude, `re+imi`.
    #[arg(long, default_value = "0")]
    gamma: String,
}

#[derive(Args)]
struct RoleArgs {
    /// The single party k.
    #[arg(long, default_value = "c")]
    k: Mode,
    /// Lossy member of the pair in scenarios 2 and 4.
    #[arg(long)]
    lossy_member: Option<Mode>,
}

#[derive(Args)]
struct LossArgs {
    /// Loss scenario.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5), requires = "t")]
    scenario: Option<u8>,
    /// Shared transmissivity of the scenario.
    #[arg(long = "T", requires = "scenario")]
    t: Option<f64>,
    #[arg(long = "T1", conflicts_with = "scenario")]
    t1: Option<f64>,
    #[arg(long = "T2", conflicts_with = "scenario")]
    t2: Option<f64>,
    #[arg(long = "T3", conflicts_with = "scenario")]
    t3: Option<f64>,
    /// No loss (the default when no loss flag is given).
    #[arg(long, conflicts_with_all = ["scenario", "t1", "t2", "t3"])]
    ideal: bool,
    #[command(flatten)]
    roles: RoleArgs,
}

#[derive(Args)]
struct OutArgs {
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Via {
    Transform,
    ClosedForm,
}

#[derive(Clone, Copy, ValueEnum)]
enum Vary {
    T,
    Lambda,
}

/// Why the program stops early.
enum Failure {
    Usage(String),
    Numeric(String),
    Verify(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_)
            | Error::Parse(_)
            | Error::ModeRange { .. }
            | Error::Partition(_)
            | Error::UnsupportedFormula(_) => Failure::Usage(e.to_string()),
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn cli_lambda(l: f64) -> CliResult<f64> {
    if !(0.0..=LAMBDA_CAP).contains(&l) {
        return Err(usage(format!("--lambda must lie in [0, {LAMBDA_CAP}], got {l}")));
    }
    Ok(l)
}

impl StateArgs {
    fn spec(&self) -> CliResult<InputSpec> {
        let gamma = parse_complex(&self.gamma)?;
        let spec = match (self.lambda, self.r) {
            (Some(l), None) => InputSpec::from_lambda(cli_lambda(l)?, gamma)?,
            (None, Some(r)) => InputSpec::from_r(r, gamma)?,
            (None, None) => return Err(usage("one of --lambda or --r is required")),
            (Some(_), Some(_)) => unreachable!("clap rejects --lambda with --r"),
        };
        cli_lambda(spec.lambda())?;
        Ok(spec)
    }
}

impl RoleArgs {
    fn roles(&self) -> CliResult<Roles> {
        Ok(match self.lossy_member {
            Some(m) => Roles::new(self.k, m)?,
            None => Roles::with_k(self.k),
        })
    }
}

impl LossArgs {
    fn setting(&self) -> CliResult<LossSetting> {
        let roles = self.roles.roles()?;
        if let (Some(id), Some(t)) = (self.scenario, self.t) {
            return Ok(LossSetting::Scenario(Scenario::new(ScenarioId::new(id)?, t, roles)?));
        }
        if self.t1.is_some() || self.t2.is_some() || self.t3.is_some() {
            let t = [self.t1, self.t2, self.t3].map(|x| x.unwrap_or(1.0));
            return Ok(LossSetting::Custom(LossConfig::new(t)?));
        }
        Ok(LossSetting::Ideal)
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_numbers<T: std::str::FromStr>(s: &str, what: &str) -> CliResult<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse::<T>().map_err(|_| usage(format!("bad {what} '{x}'"))))
        .collect()
}

fn run(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Cm { state, loss, via, out } => {
            let spec = state.spec()?;
            let setting = loss.setting()?;
            let (base, via_name) = match via {
                Via::Transform => (output_cm_via_transform(&spec)?, "transform"),
                Via::ClosedForm => (ideal_output_cm(spec.lambda())?, "closed-form"),
            };
            let v = apply_loss(&base, &setting.config())?;
            let text = match out.format {
                Format::Csv => cm_csv(&v),
                Format::Json => cm_record(&v, spec.lambda(), &setting, via_name).to_json(),
            };
            emit(&out.out, &text)
        }
        Command::Measures {
            state,
            loss,
            measures,
            out,
        } => {
            let spec = state.spec()?;
            let setting = loss.setting()?;
            let roles = loss.roles.roles()?;
            let ids = parse_list(&measures)?;
            let report = build_report(&ideal_output_cm(spec.lambda())?, spec.lambda(), &setting, roles, &ids)?;
            let text = match out.format {
                Format::Csv => report_csv(&report),
                Format::Json => report_record(&report).to_json(),
            };
            emit(&out.out, &text)
        }
        Command::Sweep {
            vary,
            start,
            stop,
            step,
            lambda,
            t,
            scenario,
            roles,
            measures,
            out,
        } => {
            let (variable, defaults, fixed) = match vary {
                Vary::T => {
                    let l = lambda.ok_or_else(|| usage("a T sweep needs --lambda"))?;
                    if t.is_some() {
                        return Err(usage("--T is the swept variable; use --start/--stop"));
                    }
                    (SweepVariable::Transmissivity, (0.0, 1.0, 0.01), cli_lambda(l)?)
                }
                Vary::Lambda => {
                    if lambda.is_some() {
                        return Err(usage("lambda is the swept variable; use --start/--stop"));
                    }
                    (SweepVariable::Lambda, (0.0, 0.95, 0.05), t.unwrap_or(1.0))
                }
            };
            let spec = SweepSpec {
                variable,
                start: start.unwrap_or(defaults.0),
                stop: stop.unwrap_or(defaults.1),
                step: step.unwrap_or(defaults.2),
                fixed,
                scenario: scenario.map(ScenarioId::new).transpose()?,
                roles: roles.roles()?,
                measures: parse_list(&measures)?,
            };
            if variable == SweepVariable::Lambda && spec.stop > LAMBDA_CAP {
                return Err(usage(format!("--stop must not exceed {LAMBDA_CAP}")));
            }
            if variable == SweepVariable::Lambda && spec.scenario.is_none() && fixed != 1.0 {
                return Err(usage("--T needs --scenario"));
            }
            let rows = run_sweep(&spec)?;
            let text = match out.format {
                Format::Csv => sweep_csv(&spec, &rows),
                Format::Json => sweep_record(&spec, &rows).to_json(),
            };
            emit(&out.out, &text)?;
            if rows.iter().any(|r| r.mismatch()) {
                return Err(Failure::Verify(
                    "closed form and numeric value disagree at some grid point".into(),
                ));
            }
            Ok(())
        }
        Command::Thresholds {
            lambdas,
            scenarios,
            roles,
            out,
        } => {
            let lambdas: Vec<f64> = parse_numbers(&lambdas, "lambda")?;
            for &l in &lambdas {
                cli_lambda(l)?;
            }
            let scenarios = parse_numbers::<u8>(&scenarios, "scenario")?
                .into_iter()
                .map(ScenarioId::new)
                .collect::<Result<Vec<_>, _>>()?;
            let rows = threshold_table(&lambdas, &scenarios, roles.roles()?)?;
            let text = match out.format {
                Format::Csv => thresholds_csv(&rows),
                Format::Json => thresholds_record(&rows).to_json(),
            };
            emit(&out.out, &text)
        }
        Command::Verify { check, format, out } => {
            let checks = match check {
                Some(id) => verify::run_check(id).into_iter().collect(),
                None => verify::run_all(),
            };
            let text = match format {
                VerifyFormat::Text => verify_text(&checks),
                VerifyFormat::Json => verify_record(&checks).to_json(),
            };
            emit(&out, &text)?;
            if checks.iter().all(|c| c.passed) {
                Ok(())
            } else {
                Err(Failure::Verify(format!(
                    "{} of {} checks failed",
                    checks.iter().filter(|c| !c.passed).count(),
                    checks.len()
                )))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Numeric(m)) => {
            eprintln!("numeric error: {m}");
            ExitCode::from(EXIT_NUMERIC)
        }
        Err(Failure::Verify(m)) => {
            eprintln!("verification failed: {m}");
            ExitCode::from(EXIT_VERIFY)
        }
    }
}
