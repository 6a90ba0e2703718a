//! Batch front-end over the `permod` library. Every subcommand reads a JSON
//! manifest naming the objects it operates on, prints one JSON report to
//! stdout (or DOT for `export-dot`), and exits 0 only when the requested
//! check or computation succeeded. Reports depend on nothing but the input
//! files and flags, so reruns are byte-identical.

mod commands;
mod manifest;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use permod::persistence::AbelianOp;

use commands::{Outcome, Rendered};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },

    #[error("manifest parse error: {0}")]
    Parse(String),

    #[error("unresolved reference: no {kind} named {name:?} in the manifest")]
    UnresolvedReference { kind: &'static str, name: String },

    #[error(transparent)]
    Core(#[from] permod::Error),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io",
            CliError::Parse(_) => "parse",
            CliError::UnresolvedReference { .. } => "unresolved-reference",
            CliError::Core(_) => "core",
        }
    }

    /// Usage problems exit 2; failures inside a computation exit 1, the same
    /// code a command uses when a check it ran reports a violation.
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(_) => 1,
            _ => 2,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum Format {
    Json,
    Dot,
}

#[derive(Parser)]
#[command(
    name = "permod",
    version,
    about = "Exact pipelines over staircase-encoded persistence modules"
)]
struct Cli {
    /// Prime field characteristic; overrides the manifest's value (101 when
    /// neither is given).
    #[arg(long, global = true)]
    field_char: Option<u64>,

    /// Seed for the randomized suites.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Report format; `dot` applies to export-dot only.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

/// Morphism selection shared by the pointwise operations: a named morphism
/// from the manifest, or a member (default the first) or integer combination
/// of the canonical basis of the pulled-back hom space.
#[derive(Args)]
struct OpArgs {
    /// Source module name.
    source: String,

    /// Target module name.
    target: String,

    /// Named morphism from the manifest; its endpoints must match.
    #[arg(long, conflicts_with_all = ["hom_index", "coeffs"])]
    morphism: Option<String>,

    /// Index into the canonical hom basis (default 0).
    #[arg(long, conflicts_with = "coeffs")]
    hom_index: Option<usize>,

    /// Comma-separated integer coefficients against the canonical hom basis.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    coeffs: Option<Vec<i64>>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a manifest and validate every object in it.
    Validate { manifest: PathBuf },

    /// Merge two encodings over the realized part of their product target.
    Common {
        manifest: PathBuf,
        first: String,
        second: String,
    },

    /// Split an encoding's fibers into order components so its pullback
    /// becomes fully faithful.
    Refine { manifest: PathBuf, encoding: String },

    /// Check the fiber conditions for full faithfulness, on a named monotone
    /// map or on an encoding's cells.
    CheckFf {
        manifest: PathBuf,
        #[arg(long, conflicts_with = "encoding")]
        map: Option<String>,
        #[arg(long)]
        encoding: Option<String>,
    },

    /// Compare the colimit of a pulled-back module against the module at
    /// every target element.
    Counit {
        manifest: PathBuf,
        #[arg(long)]
        map: String,
        #[arg(long)]
        module: String,
    },

    /// Dimension and basis of the natural transformations between two
    /// modules.
    Hom {
        manifest: PathBuf,
        source: String,
        target: String,
    },

    /// Kernel of a morphism between encoded modules, over the refined common
    /// encoding.
    Kernel {
        manifest: PathBuf,
        #[command(flatten)]
        args: OpArgs,
    },

    /// Image of a morphism between encoded modules.
    Image {
        manifest: PathBuf,
        #[command(flatten)]
        args: OpArgs,
    },

    /// Cokernel of a morphism between encoded modules.
    Cokernel {
        manifest: PathBuf,
        #[command(flatten)]
        args: OpArgs,
    },

    /// Order components and topological components of a staircase set.
    Components { manifest: PathBuf, set: String },

    /// Closure and interior operators applied to a staircase set.
    Closure { manifest: PathBuf, set: String },

    /// Present a staircase set as a difference of closed upsets.
    Decompose { manifest: PathBuf, set: String },

    /// Recompute a pointwise operation on a finite sample grid and compare
    /// dimensions and transition ranks.
    Crosscheck {
        manifest: PathBuf,
        /// kernel, image or cokernel.
        op: String,
        #[command(flatten)]
        args: OpArgs,
        #[arg(long)]
        plan: String,
    },

    /// DOT rendering of a named poset or encoding.
    ExportDot { manifest: PathBuf, name: String },

    /// Run every randomized and deterministic suite and report per-suite
    /// outcomes.
    Suite,
}

/// Write through an explicit handle so a consumer that stops reading (for
/// example `head`) ends the stream without a panic.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            match &outcome.body {
                Rendered::Json(value) => {
                    let text = serde_json::to_string_pretty(value).expect("reports serialize");
                    emit(&text);
                }
                Rendered::Text(text) => emit(text),
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(err) => {
            let report = serde_json::json!({
                "error": { "kind": err.kind(), "message": err.to_string() }
            });
            let text = serde_json::to_string_pretty(&report).expect("error reports serialize");
            eprintln!("{text}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    if cli.format == Format::Dot && !matches!(cli.command, Command::ExportDot { .. }) {
        return Err(CliError::Parse(
            "--format dot only applies to export-dot".into(),
        ));
    }
    match &cli.command {
        Command::Suite => Ok(commands::suite(cli.seed)),
        Command::Validate { manifest } => {
            let m = manifest::load(manifest, cli.field_char)?;
            Ok(commands::validate(&m))
        }
        Command::Common {
            manifest,
            first,
            second,
        } => {
            let m = manifest::load(manifest, cli.field_char)?;
            commands::common(&m, first, second)
        }
        Command::Refine { manifest, encoding } => {
            let m = manifest::load(manifest, cli.field_char)?;
            commands::refine(&m, encoding)
        }
        Command::CheckFf {
            manifest,
            map,
            encoding,
        } => {
            let m = manifest::load(manifest, cli.field_char)?;
            match (map, encoding) {
                (Some(map), None) => commands::check_ff_map(&m, map),
                (None, Some(encoding)) => commands::check_ff_encoding(&m, encoding),
                _ => Err(CliError::Parse(
                    "check-ff needs exactly one of --map or --encoding".into(),
                )),
            }
        }
        Command::Counit {
            manifest,
            map,
            module,
        } => {
            let m = manifest::load(manifest, cli.field_char)?;
            commands::counit(&m, map, module)
        }
        Command::Hom {
            manifest,
            source,
            target,
        } => {
            let m = manifest::load(manifest, cli.field_char)?;
            commands::hom(&m, source, target)
        }
        Command::Kernel { manifest, args } => {
            let m = manifest::load(manifest, cli.field_char)?;
            commands::abelian(&m, AbelianOp::Kernel, args)
        }
        Command::Image { manifest, args } => {
            let m = manifest::load(manifest, cli.field_char)?;
            commands::abelian(&m, AbelianOp::Image, args)
        }
        Command::Cokernel { manifest, args } => {
            let m = manifest::load(manifest, cli.field_char)?;
            commands::abelian(&m, AbelianOp::Cokernel, args)
        }
        Command::Components { manifest, set } => {
            let m = manifest::load(manifest, cli.field_char)?;
            commands::components(&m, set)
        }
        Command::Closure { manifest, set } => {
            let m = manifest::load(manifest, cli.field_char)?;
            commands::closure(&m, set)
        }
        Command::Decompose { manifest, set } => {
            let m = manifest::load(manifest, cli.field_char)?;
            commands::decompose(&m, set)
        }
        Command::Crosscheck {
            manifest,
            op,
            args,
            plan,
        } => {
            let m = manifest::load(manifest, cli.field_char)?;
            let op = AbelianOp::from_str(op)?;
            commands::crosscheck(&m, op, args, plan)
        }
        Command::ExportDot { manifest, name } => {
            let m = manifest::load(manifest, cli.field_char)?;
            let dot = commands::export_dot(&m, name)?;
            let body = match cli.format {
                Format::Dot => Rendered::Text(dot),
                Format::Json => Rendered::Json(serde_json::json!({ "name": name, "dot": dot })),
            };
            Ok(Outcome { body, passed: true })
        }
    }
}
