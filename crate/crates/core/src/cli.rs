//! Command-line driver.
//!
//! Exit codes: 0 success; 1 inconsistent diagram or lint errors; 2 unreadable
//! or unrecognized input; 3 invalid model or annotation.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::backend::{emit, EmitOptions, Format, Orientation};
use crate::consistency::{check, CheckOptions, Mode};
use crate::error::Error;
use crate::lint::{has_errors, lint_with, report, report_yaml};
use crate::model::{serialize_canonical, DescriptorKind};
use crate::pipeline::{load, LoadOptions};
use crate::tech::TechTable;

#[derive(Debug, Parser)]
#[command(
    name = "archgen",
    version,
    about = "Architecture diagrams from deployment descriptors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the canonical meta-descriptor.
    Meta {
        #[command(flatten)]
        input: Input,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Emit diagram-as-code.
    Transform {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum)]
        format: FormatArg,
        #[arg(long, value_enum, default_value = "top-bottom")]
        orientation: OrientationArg,
        #[arg(long, default_value = "Software System")]
        system_name: String,
        /// Leave component properties out of the diagram.
        #[arg(long)]
        no_properties: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check that a diagram is what the descriptor produces.
    Check {
        #[command(flatten)]
        input: Input,
        diagram: PathBuf,
        /// Diagram format, when the diagram has no header.
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        /// Compare node and edge statements instead of bytes.
        #[arg(long)]
        semantic: bool,
    },
    /// Print the coverage ledger.
    Coverage {
        #[command(flatten)]
        input: Input,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check the model against the diagram guidelines.
    Lint {
        #[command(flatten)]
        input: Input,
        /// Also lint the document emitted in this format.
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        /// Lint this existing diagram instead of emitting one.
        #[arg(long, conflicts_with = "format")]
        diagram: Option<PathBuf>,
        /// YAML mapping of image prefix to technology tag, added to the defaults.
        #[arg(long)]
        tech_table: Option<PathBuf>,
        #[arg(long)]
        yaml: bool,
    },
}

#[derive(Debug, Args)]
struct Input {
    input: PathBuf,
    #[arg(long, value_enum)]
    frontend: Option<FrontendArg>,
    /// Extra annotation file (repeatable).
    #[arg(long = "annotations")]
    annotations: Vec<PathBuf>,
}

impl Input {
    fn load_options(&self) -> LoadOptions {
        LoadOptions {
            frontend: self.frontend.map(|f| match f {
                FrontendArg::Compose => DescriptorKind::Compose,
                FrontendArg::Kubernetes => DescriptorKind::Kubernetes,
                FrontendArg::Terraform => DescriptorKind::Terraform,
            }),
            annotations: self.annotations.clone(),
            no_sidecar: false,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FrontendArg {
    Compose,
    Kubernetes,
    Terraform,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Structurizr,
    Mermaid,
    Dot,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Structurizr => Format::Structurizr,
            FormatArg::Mermaid => Format::Mermaid,
            FormatArg::Dot => Format::Dot,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OrientationArg {
    TopBottom,
    LeftRight,
}

/// Formats an error as `file:line: message`, as far as location is known.
pub fn diagnostic(e: &Error, fallback_file: &Path) -> String {
    let file = e
        .file()
        .map(str::to_string)
        .unwrap_or_else(|| fallback_file.display().to_string());
    let root = e.root();
    let mut msg = root.to_string();
    if let Error::InvalidModel(report) = root {
        msg = format!("invalid meta-descriptor:\n{report}");
    }
    match e.line() {
        Some(line) => format!("{file}:{line}: {msg}"),
        None => format!("{file}: {msg}"),
    }
}

fn write_artifact(text: &str, output: Option<&Path>, out: &mut dyn Write) -> Result<(), Error> {
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(e).in_file(p.display().to_string())),
        None => out.write_all(text.as_bytes()).map_err(Error::Io),
    }
}

/// Runs the CLI on `argv` (including the program name) and returns the exit code.
pub fn run<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let input = match &cli.command {
        Command::Meta { input, .. }
        | Command::Transform { input, .. }
        | Command::Check { input, .. }
        | Command::Coverage { input, .. }
        | Command::Lint { input, .. } => input.input.clone(),
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "{}", diagnostic(&e, &input));
            e.exit_code()
        }
    }
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Error> {
    match command {
        Command::Meta { input, output } => {
            let loaded = load(&input.input, &input.load_options())?;
            let text = serialize_canonical(&loaded.meta)?;
            write_artifact(&text, output.as_deref(), out)?;
            Ok(0)
        }
        Command::Transform {
            input,
            format,
            orientation,
            system_name,
            no_properties,
            output,
        } => {
            let loaded = load(&input.input, &input.load_options())?;
            let opts = EmitOptions {
                orientation: match orientation {
                    OrientationArg::TopBottom => Orientation::TopBottom,
                    OrientationArg::LeftRight => Orientation::LeftRight,
                },
                system_name,
                include_properties: !no_properties,
            };
            let doc = emit(&loaded.meta, &opts, format.into())?;
            write_artifact(&doc.text, output.as_deref(), out)?;
            Ok(0)
        }
        Command::Check {
            input,
            diagram,
            format,
            semantic,
        } => {
            let opts = CheckOptions {
                mode: if semantic { Mode::Semantic } else { Mode::Bytes },
                format: format.map(Format::from),
                load: input.load_options(),
            };
            let v = check(&input.input, &diagram, &opts)?;
            if v.consistent {
                writeln!(out, "consistent: {} (sha256 {})", diagram.display(), v.actual_digest)?;
                return Ok(0);
            }
            let line = v.first_divergence.map(|l| format!(":{l}")).unwrap_or_default();
            writeln!(
                err,
                "{}{line}: diagram is not consistent with {}",
                diagram.display(),
                input.input.display()
            )?;
            match v.mode {
                Mode::Bytes => {
                    writeln!(
                        err,
                        "  expected: {}",
                        v.expected_line.as_deref().unwrap_or("<end of file>")
                    )?;
                    writeln!(
                        err,
                        "  found:    {}",
                        v.actual_line.as_deref().unwrap_or("<end of file>")
                    )?;
                }
                Mode::Semantic => {
                    for m in &v.missing {
                        writeln!(err, "  missing:    {m}")?;
                    }
                    for u in &v.unexpected {
                        writeln!(err, "  unexpected: {u}")?;
                    }
                }
            }
            writeln!(
                err,
                "  expected sha256 {}, found {}",
                v.expected_digest, v.actual_digest
            )?;
            Ok(1)
        }
        Command::Coverage { input, output } => {
            let loaded = load(&input.input, &input.load_options())?;
            write_artifact(&loaded.ledger.to_yaml(), output.as_deref(), out)?;
            Ok(0)
        }
        Command::Lint {
            input,
            format,
            diagram,
            tech_table,
            yaml,
        } => {
            let loaded = load(&input.input, &input.load_options())?;
            let table = match &tech_table {
                Some(p) => TechTable::load(p)?,
                None => TechTable::default(),
            };
            let doc = match (format, &diagram) {
                (Some(f), _) => Some(emit(&loaded.meta, &EmitOptions::default(), f.into())?),
                (None, Some(p)) => {
                    let text = std::fs::read_to_string(p).map_err(|e| Error::Io(e).in_file(p.display().to_string()))?;
                    let format = crate::backend::parse::detect_format(Some(p), &text)
                        .ok_or_else(|| Error::FormatUnknown(format!("{}: unrecognized diagram format", p.display())))?;
                    Some(crate::backend::DacDocument {
                        format,
                        digest: crate::frontend::digest(&text),
                        text,
                        options_used: EmitOptions::default(),
                    })
                }
                (None, None) => None,
            };
            let findings = lint_with(&loaded.meta, doc.as_ref(), &table);
            let text = if yaml {
                report_yaml(&findings)
            } else {
                report(&findings)
            };
            out.write_all(text.as_bytes())?;
            Ok(if has_errors(&findings) { 1 } else { 0 })
        }
    }
}
