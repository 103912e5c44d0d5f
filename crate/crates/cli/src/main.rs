use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use quasifold::atlas::{transition_map, Atlas};
use quasifold::document::{gallery, DocumentError, InputDocument, Loaded, Overrides};
use quasifold::field::{parse_decimal, DomainKind};
use quasifold::num_rational::BigRational;
use quasifold::report::{full_report, AtlasSection, PolytopeSection, Report, TransitionSection};
use quasifold::verify::{verify_all, NumericAtlas};

#[derive(Parser)]
#[command(
    name = "quasifold",
    version,
    about = "Canonical atlases and Laurent monomial transitions for toric quasifolds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Report encoding.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for the support probe and numeric trials.
    #[arg(long, env = "QUASIFOLD_SEED", default_value_t = 0, global = true)]
    seed: u64,
    /// Parameter sample, e.g. `a=1.4142`.
    #[arg(long, global = true, value_name = "SYMBOL=VALUE")]
    param: Option<String>,
    /// Substitute a rational value for the parameter, e.g. `a=1`.
    #[arg(long, global = true, value_name = "SYMBOL=VALUE")]
    specialize: Option<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Check simpliciality, quasirationality and the face condition.
    Validate { input: PathBuf },
    /// Compile charts, Γ generators, relations and all transitions.
    Atlas { input: PathBuf },
    /// Compute the transition between two maximal cones.
    Transition {
        input: PathBuf,
        /// Source cone τ, e.g. "1,2,3".
        #[arg(long)]
        from: String,
        /// Target cone σ, e.g. "1,2,4".
        #[arg(long)]
        to: String,
    },
    /// Enumerate vertices and print the vertex/cone/fixed-point table.
    Polytope { input: PathBuf },
    /// Run the numeric checks.
    Verify { input: PathBuf },
    /// Run a built-in example end to end.
    Gallery { name: String },
}

enum Failure {
    Input(String),
}

fn split_assignment(text: &str, flag: &str) -> Result<(String, BigRational), Failure> {
    let (name, value) =
        text.split_once('=').ok_or_else(|| Failure::Input(format!("{flag} expects SYMBOL=VALUE, got `{text}`")))?;
    let value = parse_decimal(value).map_err(|e| Failure::Input(format!("{flag}: {e}")))?;
    Ok((name.trim().to_string(), value))
}

fn parse_cone(text: &str, flag: &str) -> Result<Vec<usize>, Failure> {
    let mut cone = text
        .trim_matches(|c| c == '{' || c == '}')
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| Failure::Input(format!("{flag}: `{text}` is not a comma-separated index list")))?;
    cone.sort_unstable();
    Ok(cone)
}

fn read_document(path: &Path) -> Result<InputDocument, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    InputDocument::from_json(&text).map_err(|e| located(path, e))
}

fn located(path: &Path, e: DocumentError) -> Failure {
    match e {
        DocumentError::Json { line, column, message } => {
            Failure::Input(format!("{}:{line}:{column}: {message}", path.display()))
        }
        other => Failure::Input(format!("{}: {other}", path.display())),
    }
}

fn load(doc: &InputDocument, origin: &Path, common: &Common) -> Result<Loaded, Failure> {
    let parameter = common.param.as_deref().map(|p| split_assignment(p, "--param")).transpose()?;
    let overrides = Overrides { parameter, seed: common.seed };
    let loaded = doc.build(&overrides).map_err(|e| located(origin, e))?;
    match common.specialize.as_deref() {
        None => Ok(loaded),
        Some(s) => {
            let (symbol, value) = split_assignment(s, "--specialize")?;
            if loaded.domain.kind() != DomainKind::RationalFunction || loaded.domain.symbol() != symbol {
                return Err(Failure::Input(format!("--specialize: `{symbol}` is not the parameter of this document")));
            }
            loaded.specialize(&value).map_err(|e| located(origin, e))
        }
    }
}

fn run(cli: &Cli) -> Result<Report, Failure> {
    let common = &cli.common;
    let (doc, origin, command) = match &cli.command {
        Command::Gallery { name } => {
            let doc = gallery::load(name).map_err(|e| Failure::Input(e.to_string()))?;
            (doc, PathBuf::from(format!("gallery/{name}.json")), "gallery")
        }
        Command::Validate { input } => (read_document(input)?, input.clone(), "validate"),
        Command::Atlas { input } => (read_document(input)?, input.clone(), "atlas"),
        Command::Transition { input, .. } => (read_document(input)?, input.clone(), "transition"),
        Command::Polytope { input } => (read_document(input)?, input.clone(), "polytope"),
        Command::Verify { input } => (read_document(input)?, input.clone(), "verify"),
    };
    let loaded = load(&doc, &origin, common)?;
    let t = &loaded.triple;
    let mut report = Report::new(command, &loaded, common.seed);
    let validation = t.validate(&loaded.probe);
    let valid = validation.passed();
    let compile = |t| Atlas::compile(t).map_err(|e| Failure::Input(e.to_string()));

    match &cli.command {
        Command::Polytope { .. } => {
            let p = loaded
                .polytope
                .as_ref()
                .ok_or_else(|| Failure::Input(format!("{}: the document has no polytope section", origin.display())))?;
            report.polytope = Some(PolytopeSection::of(p, t));
            report.annotate();
            return Ok(report);
        }
        Command::Transition { from, to, .. } => {
            let (from, to) = (parse_cone(from, "--from")?, parse_cone(to, "--to")?);
            for c in [&from, &to] {
                if !t.fan().max_cones().contains(c) {
                    return Err(Failure::Input(format!("{c:?} is not a maximal cone of the fan")));
                }
            }
            if from == to {
                return Err(Failure::Input("--from and --to name the same cone".into()));
            }
            report.validation = Some(validation);
            if valid {
                let map = transition_map(t, &from, &to).map_err(|e| Failure::Input(e.to_string()))?;
                report.transition = Some(TransitionSection::of(&map));
            }
            report.annotate();
            return Ok(report);
        }
        _ => {}
    }
    report.validation = Some(validation);
    if !valid {
        return Ok(report);
    }
    match &cli.command {
        Command::Validate { .. } => {}
        Command::Atlas { .. } => {
            report.atlas = Some(AtlasSection::of(&compile(t)?, t));
            report.polytope = loaded.polytope.as_ref().map(|p| PolytopeSection::of(p, t));
        }
        Command::Verify { .. } => {
            let atlas = compile(t)?;
            let numeric = NumericAtlas::new(t, &atlas, loaded.trial.parameter_sample)
                .map_err(|e| Failure::Input(e.to_string()))?;
            report.verification = Some(verify_all(&numeric, &loaded.trial));
        }
        Command::Gallery { .. } => report = full_report(command, &loaded).map_err(|e| Failure::Input(e.to_string()))?,
        Command::Polytope { .. } | Command::Transition { .. } => unreachable!("handled above"),
    }
    report.annotate();
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match run(&cli) {
        Ok(r) => r,
        Err(Failure::Input(message)) => {
            eprintln!("error: {message}");
            return ExitCode::from(2);
        }
    };
    let text = match cli.common.format {
        Format::Json => report.to_json() + "\n",
        Format::Text => report.to_text(),
    };
    match &cli.common.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
