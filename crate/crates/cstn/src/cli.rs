//! The command-line surface.
//!
//! Exit codes: 0 for a positive verdict (valid / consistent / verified),
//! 1 for a negative verdict, 2 for input errors, 3 for capacity, overflow
//! or internal failures.

use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::dc::{
    check_dc, check_edc, estimate_epsilon_hat, verify_strategy, DcReport, EpsilonHatEstimate,
    SolveError,
};
use crate::dot::{cstn_to_dot, hytn_to_dot};
use crate::format::{parse_cstn, parse_strategy, serialize_cstn, serialize_strategy, DocumentError};
use crate::generators::{
    gen_from_3cnf, gen_gamma_n, gen_gamma_n_strategy, gen_random_cstn, parse_dimacs,
    GammaNParams, RandomCstnParams,
};
use crate::network::{Cstn, Severity};
use crate::rational::EpsilonRational;
use crate::report;
use crate::simulate::{simulate, SimulateError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;

#[derive(Parser)]
#[command(
    name = "cstn",
    about = "Dynamic-consistency checking for conditional simple temporal networks",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a network document and report well-definedness violations.
    Validate {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Decide dynamic consistency, optionally writing the strategy witness
    /// or the losing-node certificate.
    CheckDc {
        file: PathBuf,
        #[arg(long)]
        strategy: Option<PathBuf>,
        #[arg(long)]
        cert: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Decide reaction-bounded dynamic consistency at a given epsilon.
    CheckEdc {
        file: PathBuf,
        /// Reaction bound as a positive rational N/D.
        #[arg(long)]
        epsilon: String,
        #[arg(long)]
        strategy: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Verify a strategy file against a network.
    Verify {
        file: PathBuf,
        #[arg(long)]
        strategy: PathBuf,
        /// Additionally check the reaction-bounded condition at N/D.
        #[arg(long)]
        epsilon: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Bracket the largest tolerated reaction bound by bisection.
    EpsilonHat {
        file: PathBuf,
        #[arg(long, default_value_t = 64)]
        resolution: u64,
        #[arg(long)]
        json: bool,
    },
    /// Instance generators.
    Gen {
        #[command(subcommand)]
        what: GenCommand,
    },
    /// Step through a strategy interactively, answering observations.
    Simulate {
        file: PathBuf,
        #[arg(long)]
        strategy: PathBuf,
    },
    /// Export a network (or its reaction-enriched expansion) as DOT.
    ExportDot {
        file: PathBuf,
        /// Export the expansion at this reaction bound instead.
        #[arg(long)]
        hytn_epsilon: Option<String>,
    },
    /// Run check-dc over every .cstn file in a directory.
    Bench {
        dir: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Subcommand)]
enum GenCommand {
    /// The shrinking-window family with 3n self-observing events.
    GammaN {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the reference strategy.
        #[arg(long)]
        strategy: Option<PathBuf>,
    },
    /// The network whose dynamic consistency negates a formula's
    /// satisfiability; reads DIMACS CNF.
    Cnf {
        #[arg(long)]
        dimacs: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// A seeded random well-defined network.
    Random {
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        props: usize,
        #[arg(long, default_value_t = 0.3)]
        density: f64,
        #[arg(long, default_value_t = 10)]
        weight_range: i64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum CliError {
    Input(String),
    Capacity(String),
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Capacity(_) | SolveError::Overflow(_) | SolveError::Internal(_) => {
                CliError::Capacity(e.to_string())
            }
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<DocumentError> for CliError {
    fn from(e: DocumentError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_network(path: &Path) -> Result<Cstn, CliError> {
    Ok(parse_cstn(&read_file(path)?)?)
}

fn parse_epsilon(s: &str) -> Result<EpsilonRational, CliError> {
    s.parse::<EpsilonRational>()
        .map_err(|e| CliError::Input(e.to_string()))
}

fn write_output(path: Option<&Path>, content: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => {
            fs::write(p, content).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?
        }
        None => stdout.write_all(content.as_bytes())?,
    }
    Ok(())
}

fn emit_json(stdout: &mut dyn Write, value: &impl serde::Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Capacity(format!("json: {e}")))?;
    writeln!(stdout, "{text}")?;
    Ok(())
}

/// Runs the tool; returns the process exit code. Streams are injected so the
/// whole surface is testable in-process.
pub fn cli_main(
    args: &[String],
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
    stdin: &mut dyn BufRead,
) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not errors.
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    EXIT_INPUT
                }
            };
        }
    };
    match dispatch(cli, stdout, stderr, stdin) {
        Ok(code) => code,
        Err(CliError::Input(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_INPUT
        }
        Err(CliError::Capacity(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_CAPACITY
        }
    }
}

fn dispatch(
    cli: Cli,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
    stdin: &mut dyn BufRead,
) -> Result<i32, CliError> {
    match cli.command {
        Command::Validate { file, json } => cmd_validate(&file, json, stdout),
        Command::CheckDc {
            file,
            strategy,
            cert,
            json,
        } => {
            let g = load_network(&file)?;
            let started = Instant::now();
            let report = check_dc(&g)?;
            finish_check(
                "check-dc", &file, &report, strategy.as_deref(), cert.as_deref(), json,
                started, stdout, stderr,
            )
        }
        Command::CheckEdc {
            file,
            epsilon,
            strategy,
            json,
        } => {
            let g = load_network(&file)?;
            let eps = parse_epsilon(&epsilon)?;
            let started = Instant::now();
            let report = check_edc(&g, &eps)?;
            finish_check(
                "check-edc", &file, &report, strategy.as_deref(), None, json, started,
                stdout, stderr,
            )
        }
        Command::Verify {
            file,
            strategy,
            epsilon,
            json,
        } => cmd_verify(&file, &strategy, epsilon.as_deref(), json, stdout),
        Command::EpsilonHat {
            file,
            resolution,
            json,
        } => cmd_epsilon_hat(&file, resolution, json, stdout),
        Command::Gen { what } => cmd_gen(what, stdout),
        Command::Simulate { file, strategy } => cmd_simulate(&file, &strategy, stdout, stdin),
        Command::ExportDot { file, hytn_epsilon } => {
            let g = load_network(&file)?;
            let dot = match hytn_epsilon {
                None => cstn_to_dot(&g),
                Some(e) => {
                    let eps = parse_epsilon(&e)?;
                    let h = crate::dc::construct_h_epsilon(&g, &eps)?;
                    hytn_to_dot(h.hytn())
                }
            };
            stdout.write_all(dot.as_bytes())?;
            Ok(EXIT_OK)
        }
        Command::Bench { dir, json } => cmd_bench(&dir, json, stdout),
    }
}

fn cmd_validate(file: &Path, json: bool, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let text = read_file(file)?;
    // Parse structurally only; well-definedness is this command's verdict,
    // so collect violations instead of failing on them.
    let g = match parse_cstn(&text) {
        Ok(g) => g,
        Err(e @ DocumentError::Syntax { .. }) => return Err(e.into()),
        Err(DocumentError::Semantic(violations)) => {
            if json {
                let vs: Vec<report::ViolationJson> =
                    violations.iter().map(|lv| (&lv.violation).into()).collect();
                emit_json(
                    stdout,
                    &report::ValidateJson {
                        command: "validate".to_owned(),
                        file: file.display().to_string(),
                        ok: false,
                        violations: vs,
                    },
                )?;
            } else {
                for lv in &violations {
                    match lv.line {
                        Some(line) => writeln!(stdout, "line {line}: {}", lv.violation)?,
                        None => writeln!(stdout, "{}", lv.violation)?,
                    }
                }
                writeln!(stdout, "invalid: {} violation(s)", violations.len())?;
            }
            return Ok(EXIT_NEGATIVE);
        }
    };
    let violations = g.validate_wd();
    let ok = violations.iter().all(|v| v.severity != Severity::Error);
    if json {
        let vs: Vec<report::ViolationJson> = violations.iter().map(Into::into).collect();
        emit_json(
            stdout,
            &report::ValidateJson {
                command: "validate".to_owned(),
                file: file.display().to_string(),
                ok,
                violations: vs,
            },
        )?;
    } else {
        for v in &violations {
            writeln!(stdout, "{v}")?;
        }
        writeln!(
            stdout,
            "{}: {} node(s), {} constraint(s), {} proposition(s)",
            if ok { "valid" } else { "invalid" },
            g.node_count(),
            g.constraints().len(),
            g.propositions().len()
        )?;
    }
    Ok(if ok { EXIT_OK } else { EXIT_NEGATIVE })
}

#[allow(clippy::too_many_arguments)]
fn finish_check(
    command: &str,
    file: &Path,
    report: &DcReport,
    strategy_path: Option<&Path>,
    cert_path: Option<&Path>,
    json: bool,
    started: Instant,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, CliError> {
    let mut strategy_file = None;
    if let (Some(path), Some(sigma)) = (strategy_path, report.strategy.as_ref()) {
        fs::write(path, serialize_strategy(sigma))
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        strategy_file = Some(path.display().to_string());
    }
    if let (Some(path), Some(cert)) = (cert_path, report.certificate.as_ref()) {
        let mut text = String::new();
        for node in cert {
            text.push_str(node);
            text.push('\n');
        }
        fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    }

    if json {
        emit_json(
            stdout,
            &report::check_json(command, &file.display().to_string(), report, strategy_file),
        )?;
        // Timing stays off the canonical report.
        let _ = writeln!(stderr, "wall time: {:?}", started.elapsed());
    } else {
        writeln!(stdout, "{}", report.verdict)?;
        let s = &report.stats;
        writeln!(
            stdout,
            "sizes: {} scenarios, {} expanded nodes, {} hyperarcs (size {}), game {}x{}",
            s.scenarios, s.expanded_nodes, s.hyperarcs, s.hytn_size, s.game_nodes, s.game_edges
        )?;
        writeln!(
            stdout,
            "lifting: {} lifts, cap {}, {:?}",
            s.lift_count,
            s.energy_cap,
            started.elapsed()
        )?;
        if let Some(cert) = &report.certificate {
            writeln!(stdout, "losing nodes: {}", cert.len())?;
        }
    }
    Ok(if report.is_positive() {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    })
}

fn cmd_verify(
    file: &Path,
    strategy_path: &Path,
    epsilon: Option<&str>,
    json: bool,
    stdout: &mut dyn Write,
) -> Result<i32, CliError> {
    let g = load_network(file)?;
    let sigma = parse_strategy(&read_file(strategy_path)?)?;
    let eps = epsilon.map(parse_epsilon).transpose()?;
    let report =
        verify_strategy(&g, &sigma, eps.as_ref()).map_err(|e| CliError::Input(e.to_string()))?;
    if json {
        emit_json(
            stdout,
            &report::verify_json(
                &file.display().to_string(),
                &strategy_path.display().to_string(),
                &report,
            ),
        )?;
    } else {
        writeln!(stdout, "viable: {}", report.viable.ok)?;
        writeln!(stdout, "dynamic: {}", report.dynamic.ok)?;
        if let Some(c) = &report.eps_dynamic {
            writeln!(stdout, "eps-dynamic: {}", c.ok)?;
        }
        for check in [&report.viable, &report.dynamic]
            .into_iter()
            .chain(report.eps_dynamic.as_ref())
        {
            if let Some(d) = &check.detail {
                writeln!(stdout, "counterexample: {d}")?;
            }
        }
    }
    Ok(if report.all_ok() {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    })
}

fn cmd_epsilon_hat(
    file: &Path,
    resolution: u64,
    json: bool,
    stdout: &mut dyn Write,
) -> Result<i32, CliError> {
    let g = load_network(file)?;
    let estimate = estimate_epsilon_hat(&g, resolution)?;
    if json {
        emit_json(
            stdout,
            &report::epsilon_hat_json(&file.display().to_string(), &estimate),
        )?;
    } else {
        writeln!(stdout, "{estimate}")?;
    }
    Ok(match estimate {
        EpsilonHatEstimate::NotDynamicallyConsistent => EXIT_NEGATIVE,
        EpsilonHatEstimate::Bracket { .. } => EXIT_OK,
    })
}

fn cmd_gen(what: GenCommand, stdout: &mut dyn Write) -> Result<i32, CliError> {
    match what {
        GenCommand::GammaN { n, out, strategy } => {
            if n == 0 {
                return Err(CliError::Input("--n must be at least 1".to_owned()));
            }
            let params = GammaNParams::new(n);
            let g = gen_gamma_n(&params);
            write_output(out.as_deref(), &serialize_cstn(&g), stdout)?;
            if let Some(path) = strategy {
                let sigma = gen_gamma_n_strategy(&params);
                fs::write(&path, serialize_strategy(&sigma))
                    .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            }
            Ok(EXIT_OK)
        }
        GenCommand::Cnf { dimacs, out } => {
            let f = parse_dimacs(&read_file(&dimacs)?)
                .map_err(|e| CliError::Input(e.to_string()))?;
            let g = gen_from_3cnf(&f);
            write_output(out.as_deref(), &serialize_cstn(&g), stdout)?;
            Ok(EXIT_OK)
        }
        GenCommand::Random {
            nodes,
            props,
            density,
            weight_range,
            seed,
            out,
        } => {
            if props > nodes {
                return Err(CliError::Input(
                    "--props cannot exceed --nodes".to_owned(),
                ));
            }
            if props > 16 {
                return Err(CliError::Input("--props is capped at 16".to_owned()));
            }
            if !(0.0..=1.0).contains(&density) {
                return Err(CliError::Input("--density must be in [0, 1]".to_owned()));
            }
            let g = gen_random_cstn(&RandomCstnParams {
                nodes,
                props,
                arc_density: density,
                weight_range,
                seed,
            });
            write_output(out.as_deref(), &serialize_cstn(&g), stdout)?;
            Ok(EXIT_OK)
        }
    }
}

fn cmd_simulate(
    file: &Path,
    strategy_path: &Path,
    stdout: &mut dyn Write,
    stdin: &mut dyn BufRead,
) -> Result<i32, CliError> {
    let g = load_network(file)?;
    let sigma = parse_strategy(&read_file(strategy_path)?)?;
    let report =
        verify_strategy(&g, &sigma, None).map_err(|e| CliError::Input(e.to_string()))?;
    if !report.viable.ok || !report.dynamic.ok {
        let why = [&report.viable, &report.dynamic]
            .into_iter()
            .filter_map(|c| c.detail.clone())
            .collect::<Vec<_>>()
            .join("; ");
        return Err(CliError::Input(format!(
            "strategy must be viable and dynamic before simulation: {why}"
        )));
    }
    match simulate(&g, &sigma, stdin, stdout) {
        Ok(_) => Ok(EXIT_OK),
        Err(SimulateError::Aborted) => Err(CliError::Input("aborted".to_owned())),
        Err(SimulateError::Io(e)) => Err(CliError::Input(e.to_string())),
        Err(e) => Err(CliError::Capacity(e.to_string())),
    }
}

fn cmd_bench(dir: &Path, json: bool, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "cstn"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::Input(format!(
            "no .cstn files in {}",
            dir.display()
        )));
    }
    let mut entries = Vec::new();
    for path in &files {
        let g = load_network(path)?;
        let started = Instant::now();
        let report = check_dc(&g)?;
        let elapsed = started.elapsed();
        if json {
            entries.push(report::BenchEntryJson {
                file: path
                    .file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_default(),
                verdict: report::verdict_tag(&report.verdict).to_owned(),
                sizes: report::SizesJson::from(&report.stats),
                lifts: report.stats.lift_count,
            });
        } else {
            writeln!(
                stdout,
                "{}\t{}\t{} scenarios\t{} hyperarcs\t{} lifts\t{:?}",
                path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
                report::verdict_tag(&report.verdict),
                report.stats.scenarios,
                report.stats.hyperarcs,
                report.stats.lift_count,
                elapsed
            )?;
        }
    }
    if json {
        emit_json(stdout, &entries)?;
    }
    Ok(EXIT_OK)
}
