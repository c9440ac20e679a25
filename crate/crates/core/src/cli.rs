//! Command-line front end. Protocols are described by a JSON spec file;
//! reports go to stdout or `--output` as flat, fixed-order documents.
//!
//! Exit codes: 0 success, 1 I/O error, 2 validation or precondition
//! failure, 64 usage error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::analysis::{attack_trace, classify, AnalysisOptions};
use crate::binding::DEFAULT_SEARCH_RESTARTS;
use crate::concealing::{ConcealingMethod, DEFAULT_RESTARTS};
use crate::grouprep::{builtin_rep, close_group, BuiltinName, DEFAULT_GROUP_CAP};
use crate::protocol::{build_protocol, builtin_protocol, QscProtocol};
use crate::qalg::{ComplexMatrix, DensityOperator, StateVector, C64};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

/// Overrides the default restart count when neither flag nor spec sets one.
pub const RESTARTS_ENV: &str = "QSC_RESTARTS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => EXIT_IO,
            CliError::Validation(_) => EXIT_VALIDATION,
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

// ---------------------------------------------------------------------------
// spec file

/// `[re, im]`
pub type JsonComplex = [f64; 2];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FiducialSpec {
    Amplitudes(Vec<JsonComplex>),
    Density(Vec<Vec<JsonComplex>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BuiltinSpec {
    Name(String),
    WithFiducial {
        name: String,
        fiducial: FiducialSpec,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomSpec {
    pub generators: Vec<Vec<Vec<JsonComplex>>>,
    pub fiducial: FiducialSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSpecFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<BuiltinSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom: Option<CustomSpec>,
    pub copies: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
}

fn to_c64(z: &JsonComplex) -> C64 {
    C64::new(z[0], z[1])
}

fn matrix_from_json(rows: &[Vec<JsonComplex>]) -> Result<ComplexMatrix, CliError> {
    let rows: Vec<Vec<C64>> = rows
        .iter()
        .map(|r| r.iter().map(to_c64).collect())
        .collect();
    ComplexMatrix::from_rows(&rows).map_err(invalid)
}

impl FiducialSpec {
    /// Amplitudes are normalized; density matrices must already be valid.
    pub fn density(&self) -> Result<DensityOperator, CliError> {
        match self {
            FiducialSpec::Amplitudes(a) => {
                let v = StateVector::normalized(a.iter().map(to_c64).collect())
                    .map_err(|e| invalid(format!("fiducial amplitudes: {e}")))?;
                Ok(v.projector())
            }
            FiducialSpec::Density(rows) => {
                let m = matrix_from_json(rows)?;
                DensityOperator::new(m).map_err(|e| invalid(format!("fiducial density: {e}")))
            }
        }
    }
}

impl ProtocolSpecFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let spec: Self =
            serde_json::from_str(text).map_err(|e| invalid(format!("malformed spec file: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Structural checks that do not need any group computation.
    pub fn validate(&self) -> Result<(), CliError> {
        match (&self.builtin, &self.custom) {
            (Some(_), Some(_)) => {
                return Err(invalid(
                    "spec must contain exactly one of `builtin` or `custom`, found both",
                ))
            }
            (None, None) => {
                return Err(invalid(
                    "spec must contain exactly one of `builtin` or `custom`, found neither",
                ))
            }
            _ => {}
        }
        if self.copies == 0 {
            return Err(invalid("copies must be at least 1"));
        }
        if self.restarts == Some(0) {
            return Err(invalid("restarts must be at least 1"));
        }
        if let Some(b) = &self.builtin {
            b.name().parse::<BuiltinName>().map_err(invalid)?;
        }
        if let Some(c) = &self.custom {
            if c.generators.is_empty() {
                return Err(invalid("custom spec needs at least one generator"));
            }
            let dim = c.generators[0].len();
            for (i, g) in c.generators.iter().enumerate() {
                if g.len() != dim || g.iter().any(|r| r.len() != dim) {
                    return Err(invalid(format!(
                        "generator {i} is not a square {dim}x{dim} matrix"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Pretty JSON that re-parses to an identical spec.
    pub fn canonical(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("spec serializes");
        s.push('\n');
        s
    }

    pub fn build(&self) -> Result<QscProtocol, CliError> {
        self.validate()?;
        if let Some(b) = &self.builtin {
            let name: BuiltinName = b.name().parse().map_err(invalid)?;
            let builtin = builtin_rep(name).map_err(invalid)?;
            let fid = match b {
                BuiltinSpec::Name(_) => None,
                BuiltinSpec::WithFiducial { fiducial, .. } => Some(fiducial.density()?),
            };
            return builtin_protocol(&builtin, fid.as_ref(), self.copies).map_err(invalid);
        }
        let c = self.custom.as_ref().expect("validated");
        let gens = c
            .generators
            .iter()
            .map(|g| matrix_from_json(g))
            .collect::<Result<Vec<_>, _>>()?;
        let rep = close_group(&gens, DEFAULT_GROUP_CAP).map_err(invalid)?;
        let rho = c.fiducial.density()?;
        build_protocol(&rep, &rho, self.copies).map_err(invalid)
    }
}

impl BuiltinSpec {
    pub fn name(&self) -> &str {
        match self {
            BuiltinSpec::Name(n) => n,
            BuiltinSpec::WithFiducial { name, .. } => name,
        }
    }
}

// ---------------------------------------------------------------------------
// report formatting

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    let r: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(round12(x))
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

/// Ordered flat key-value document; both output formats render from it.
#[derive(Clone, Debug, PartialEq)]
pub struct Report(pub Vec<(&'static str, Value)>);

impl Report {
    pub fn to_json(&self) -> String {
        let mut out = String::from("{\n");
        for (i, (k, v)) in self.0.iter().enumerate() {
            let sep = if i + 1 == self.0.len() { "" } else { "," };
            out.push_str(&format!(
                "  {}: {}{sep}\n",
                Value::String((*k).to_string()),
                serde_json::to_string(v).expect("value serializes")
            ));
        }
        out.push_str("}\n");
        out
    }

    pub fn to_text(&self) -> String {
        let width = self.0.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (k, v) in &self.0 {
            let shown = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            out.push_str(&format!("{k:<width$}  {shown}\n"));
        }
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Text => self.to_text(),
        }
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.0.iter().find(|(k, _)| *k == key).map(|(_, v)| v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

// ---------------------------------------------------------------------------
// commands

#[derive(Parser, Debug)]
#[command(
    name = "qsc",
    version,
    about = "Group-covariant quantum string commitment analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct Common {
    /// Protocol spec file (JSON).
    spec: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Binding and concealing bounds, margin and classification.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Also run the numerical cheating-strategy search.
        #[arg(long)]
        search: bool,
        /// Maximize accessible information on all copies jointly.
        #[arg(long)]
        direct_concealing: bool,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Per-string success probabilities of the maximally entangled attack.
    Attack {
        #[command(flatten)]
        common: Common,
    },
    /// Builtin representations.
    List {
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Rewrite a spec file in canonical form.
    Canon {
        spec: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// Resolution order: flag, spec file, environment, built-in default.
pub fn resolve_restarts(
    flag: Option<usize>,
    spec: Option<usize>,
    env: Option<&str>,
    default: usize,
) -> Result<usize, CliError> {
    if let Some(r) = flag.or(spec) {
        return if r == 0 {
            Err(invalid("restarts must be at least 1"))
        } else {
            Ok(r)
        };
    }
    match env {
        Some(s) => match s.trim().parse::<usize>() {
            Ok(r) if r > 0 => Ok(r),
            _ => Err(invalid(format!(
                "{RESTARTS_ENV}={s:?} is not a positive integer"
            ))),
        },
        None => Ok(default),
    }
}

pub struct AnalyzeFlags {
    pub search: bool,
    pub direct_concealing: bool,
    pub restarts: Option<usize>,
    pub seed: Option<u64>,
    /// Value of the restart-override environment variable, if set.
    pub env_restarts: Option<String>,
}

pub fn analyze_report(spec: &ProtocolSpecFile, flags: &AnalyzeFlags) -> Result<Report, CliError> {
    let p = spec.build()?;
    let env = flags.env_restarts.as_deref();
    let restarts = resolve_restarts(flags.restarts, spec.restarts, env, DEFAULT_RESTARTS)?;
    let search_restarts = if flags.search {
        Some(resolve_restarts(
            flags.restarts,
            spec.restarts,
            env,
            DEFAULT_SEARCH_RESTARTS,
        )?)
    } else {
        None
    };
    let opts = AnalysisOptions {
        concealing: if flags.direct_concealing {
            ConcealingMethod::Direct
        } else {
            ConcealingMethod::Additivity
        },
        restarts,
        search_restarts,
        seed: flags.seed.or(spec.seed).unwrap_or(0),
    };
    let r = classify(&p, &opts).map_err(invalid)?;

    let mut fields: Vec<(&'static str, Value)> = vec![
        ("n", r.n.into()),
        ("d", r.d.into()),
        ("group_order", r.group_order.into()),
        (
            "eigenvalues",
            Value::Array(r.eigenvalues.iter().map(|&l| num(l)).collect()),
        ),
        ("sum_bound", num(r.sum_bound)),
        ("a_bits", num(r.a_bits)),
        ("renyi_a_bits", num(r.renyi_a_bits)),
        ("attack_sum", num(r.attack_sum)),
    ];
    if let Some(best) = r.search_best_sum {
        fields.push(("search_best_sum", num(best)));
    }
    fields.extend([
        ("i_acc_bits", num(r.i_acc_bits)),
        ("b_bits", num(r.b_bits)),
        ("concealing_method", r.concealing_method.as_str().into()),
        ("classification", r.classification.as_str().into()),
        ("margin", num(r.margin)),
        ("seed", r.seed.into()),
    ]);
    Ok(Report(fields))
}

pub fn attack_report(spec: &ProtocolSpecFile) -> Result<Report, CliError> {
    let p = spec.build()?;
    let t = attack_trace(&p).map_err(invalid)?;
    let per_x = t
        .per_x
        .iter()
        .map(|(x, v)| serde_json::json!({ "x": x.to_string(), "p": num(*v) }))
        .collect();
    Ok(Report(vec![
        ("n", p.n().into()),
        ("d", p.dim().into()),
        ("per_x", Value::Array(per_x)),
        ("sum", num(t.sum)),
        ("bound", num(t.bound)),
        ("reduced_distance", num(t.reduced_distance)),
    ]))
}

#[derive(Clone, Debug, Serialize)]
pub struct ListEntry {
    pub name: &'static str,
    pub group_order: usize,
    pub dim: usize,
    pub irreducible: bool,
}

pub fn list_entries() -> Result<Vec<ListEntry>, CliError> {
    BuiltinName::ALL
        .into_iter()
        .map(|name| {
            let b = builtin_rep(name).map_err(invalid)?;
            Ok(ListEntry {
                name: name.as_str(),
                group_order: b.rep.order(),
                dim: b.rep.dim(),
                irreducible: b.rep.is_irreducible(),
            })
        })
        .collect()
}

fn render_list(entries: &[ListEntry], format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(entries).expect("list serializes");
            s.push('\n');
            s
        }
        Format::Text => {
            let mut s = format!(
                "{:<16}{:>7}{:>5}  {}\n",
                "name", "order", "dim", "irreducible"
            );
            for e in entries {
                s.push_str(&format!(
                    "{:<16}{:>7}{:>5}  {}\n",
                    e.name, e.group_order, e.dim, e.irreducible
                ));
            }
            s
        }
    }
}

fn emit(text: &str, output: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    match output {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        }),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

fn execute(cli: Cli, env_restarts: Option<String>, stdout: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze {
            common,
            search,
            direct_concealing,
            restarts,
            seed,
        } => {
            let spec = ProtocolSpecFile::load(&common.spec)?;
            let flags = AnalyzeFlags {
                search,
                direct_concealing,
                restarts,
                seed,
                env_restarts,
            };
            let report = analyze_report(&spec, &flags)?;
            emit(
                &report.render(common.format),
                common.output.as_deref(),
                stdout,
            )
        }
        Command::Attack { common } => {
            let spec = ProtocolSpecFile::load(&common.spec)?;
            let report = attack_report(&spec)?;
            emit(
                &report.render(common.format),
                common.output.as_deref(),
                stdout,
            )
        }
        Command::List { format } => emit(&render_list(&list_entries()?, format), None, stdout),
        Command::Canon { spec, output } => {
            let spec = ProtocolSpecFile::load(&spec)?;
            emit(&spec.canonical(), output.as_deref(), stdout)
        }
    }
}

/// Parses `args` (including the program name), runs, returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if code == EXIT_OK { stdout } else { stderr };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    let env_restarts = std::env::var(RESTARTS_ENV).ok();
    match execute(cli, env_restarts, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
