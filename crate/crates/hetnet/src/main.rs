//! `hetnet`: validate, classify, analyze, realize, certify and simulate
//! robust heteroclinic networks described by JSON files.

use clap::{Parser, Subcommand};
use hetnet::classify;
use hetnet::model::{self, Mode, Network};
use hetnet::realize::{self, CertStatus, VectorField};
use hetnet::report::{self, Classification, ConsolidatedReport};
use hetnet::simulate::{self, ExperimentConfig};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_INTERNAL: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_INCONCLUSIVE: u8 = 3;

#[derive(Parser)]
#[command(name = "hetnet", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Strictness tolerance for product > 1 checks.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Output directory for report files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format on stdout: json or md.
    #[arg(long, global = true, default_value = "json")]
    format: String,
}

#[derive(Subcommand)]
enum Command {
    /// Load a network file and check its invariants.
    Validate { file: PathBuf },
    /// Check the ac axioms, list Δ-cliques and the structure decomposition.
    Classify { file: PathBuf },
    /// Compute exponents and stability verdicts.
    Analyze {
        file: PathBuf,
        /// thas | thas2 | lv | all
        #[arg(long, default_value = "all")]
        theorem: String,
        #[arg(long)]
        max_witnesses: Option<usize>,
    },
    /// Synthesize an equivariant cubic field realizing the network.
    Realize {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Certify the connections of a network in a given field.
    Certify { net: PathBuf, field: PathBuf },
    /// Run the empirical stability experiment.
    Simulate {
        net: PathBuf,
        field: PathBuf,
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 500.0)]
        tmax: f64,
    },
    /// Full pipeline: classify, analyze, realize, certify, simulate.
    Report {
        file: PathBuf,
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 500.0)]
        tmax: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

#[derive(Debug)]
struct CliError {
    message: String,
    code: u8,
}

impl CliError {
    fn validation(message: impl Into<String>) -> Self {
        CliError {
            message: message.into(),
            code: EXIT_VALIDATION,
        }
    }
    fn internal(message: impl Into<String>) -> Self {
        CliError {
            message: message.into(),
            code: EXIT_INTERNAL,
        }
    }
    fn exit_code(&self) -> u8 {
        self.code
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<model::ModelError> for CliError {
    fn from(e: model::ModelError) -> Self {
        CliError::validation(e.to_string())
    }
}

impl From<classify::ClassifyError> for CliError {
    fn from(e: classify::ClassifyError) -> Self {
        CliError::validation(e.to_string())
    }
}

impl From<hetnet::stability::StabilityError> for CliError {
    fn from(e: hetnet::stability::StabilityError) -> Self {
        CliError::internal(e.to_string())
    }
}

impl From<realize::RealizeError> for CliError {
    fn from(e: realize::RealizeError) -> Self {
        CliError::validation(e.to_string())
    }
}

impl From<simulate::SimError> for CliError {
    fn from(e: simulate::SimError) -> Self {
        CliError::internal(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::internal(e.to_string())
    }
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    match &cli.command {
        Command::Validate { file } => cmd_validate(file),
        Command::Classify { file } => cmd_classify(file),
        Command::Analyze {
            file,
            theorem,
            max_witnesses,
        } => cmd_analyze(file, theorem, *max_witnesses, cli.tol),
        Command::Realize { file, output } => cmd_realize(file, output.as_deref()),
        Command::Certify { net, field } => cmd_certify(net, field),
        Command::Simulate {
            net,
            field,
            eps,
            samples,
            seed,
            tmax,
        } => cmd_simulate(net, field, *eps, *samples, *seed, *tmax, cli.out.as_deref()),
        Command::Report {
            file,
            eps,
            samples,
            seed,
            tmax,
        } => {
            let cfg = ExperimentConfig {
                epsilon: *eps,
                n_samples: *samples,
                seed: *seed,
                t_max: *tmax,
                ..Default::default()
            };
            cmd_report(file, cli, &cfg)
        }
    }
}

fn cmd_validate(file: &Path) -> Result<u8, CliError> {
    let net = model::load_network(file)?;
    let (ac_pass, violations) = match net.mode {
        Mode::Ac => {
            let rep = classify::check_ac(&net);
            (rep.pass(), rep.violations)
        }
        Mode::Extended => (true, Vec::new()),
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "schema_version": "1",
            "valid": true,
            "mode": if net.mode == Mode::Ac { "ac" } else { "extended" },
            "ac_pass": ac_pass,
            "violations": violations,
        }))
        .unwrap()
    );
    Ok(if ac_pass { EXIT_OK } else { EXIT_VALIDATION })
}

fn cmd_classify(file: &Path) -> Result<u8, CliError> {
    let net = model::load_network(file)?;
    if net.mode == Mode::Extended {
        return Err(CliError::validation(
            "the classifier only accepts AC-mode networks",
        ));
    }
    let rep = classify::check_ac(&net);
    if !rep.pass() {
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({
                "schema_version": "1",
                "ac_network": false,
                "report": rep,
            }))
            .unwrap()
        );
        return Ok(EXIT_VALIDATION);
    }
    let cliques = classify::find_delta_cliques(&net)?;
    let decs = classify::decompose_structure(&net)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "schema_version": "1",
            "ac_network": true,
            "report": rep,
            "delta_cliques": cliques,
            "decompositions": decs,
        }))
        .unwrap()
    );
    Ok(EXIT_OK)
}

fn require_clean(net: &Network) -> Result<(), CliError> {
    if net.mode == Mode::Ac {
        let rep = classify::check_ac(net);
        if !rep.pass() {
            let lines: Vec<String> = rep.violations.iter().map(|v| v.to_string()).collect();
            return Err(CliError::validation(format!(
                "network violates the ac axioms:\n  {}",
                lines.join("\n  ")
            )));
        }
    }
    Ok(())
}

fn cmd_analyze(
    file: &Path,
    theorem: &str,
    max_witnesses: Option<usize>,
    tol: f64,
) -> Result<u8, CliError> {
    let net = model::load_network(file)?;
    require_clean(&net)?;
    let mut analysis = report::analyze(&net, tol)?;
    if let Some(k) = max_witnesses {
        analysis.thas.witnesses.truncate(k);
        analysis.thas2.witnesses.truncate(k);
        analysis.lv_aux.witnesses.truncate(k);
    }
    let stable = match theorem {
        "thas" => analysis.thas.stable(),
        "thas2" => analysis.thas2.stable(),
        "lv" => analysis.lv_aux.stable(),
        "all" => analysis.analytic_stable(),
        other => {
            return Err(CliError::validation(format!(
                "unknown theorem {other:?}; use thas, thas2, lv or all"
            )))
        }
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "schema_version": "1",
            "requested": theorem,
            "stable": stable,
            "analysis": analysis,
        }))
        .unwrap()
    );
    Ok(if stable { EXIT_OK } else { EXIT_INCONCLUSIVE })
}

fn cmd_realize(file: &Path, output: Option<&Path>) -> Result<u8, CliError> {
    let net = model::load_network(file)?;
    require_clean(&net)?;
    let field = realize::synthesize_field(&net)?;
    let text = field.to_json();
    match output {
        Some(path) => std::fs::write(path, &text)?,
        None => println!("{text}"),
    }
    Ok(EXIT_OK)
}

fn load_field(path: &Path) -> Result<VectorField, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
    Ok(VectorField::from_json(&text)?)
}

fn cmd_certify(net_path: &Path, field_path: &Path) -> Result<u8, CliError> {
    let net = model::load_network(net_path)?;
    require_clean(&net)?;
    let field = load_field(field_path)?;
    let certs = realize::certify_connections(&field, &net)?;
    let all_pass = certs.iter().all(|c| c.status == CertStatus::Pass);
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "schema_version": "1",
            "all_pass": all_pass,
            "connections": certs,
        }))
        .unwrap()
    );
    Ok(if all_pass { EXIT_OK } else { EXIT_INCONCLUSIVE })
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    net_path: &Path,
    field_path: &Path,
    eps: f64,
    samples: usize,
    seed: u64,
    tmax: f64,
    out: Option<&Path>,
) -> Result<u8, CliError> {
    let net = model::load_network(net_path)?;
    require_clean(&net)?;
    if net.mode == Mode::Extended {
        return Err(CliError::validation(
            "simulation requires an AC-mode network",
        ));
    }
    let field = load_field(field_path)?;
    let polylines = simulate::connection_polylines(&field, &net, 1e-2)?;
    let cfg = ExperimentConfig {
        epsilon: eps,
        n_samples: samples,
        seed,
        t_max: tmax,
        ..Default::default()
    };
    let exp = simulate::stability_experiment(&field, &net, &polylines, &cfg)?;

    let dir = out.unwrap_or(Path::new("hetnet_out"));
    std::fs::create_dir_all(dir)?;
    for (i, traj) in exp.trajectories.iter().enumerate() {
        report::write_trajectory_csv(dir, i, &net, traj)?;
    }
    report::write_distance_svg(dir, &exp)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "schema_version": "1",
            "experiment": exp,
        }))
        .unwrap()
    );
    Ok(EXIT_OK)
}

fn cmd_report(file: &Path, cli: &Cli, cfg: &ExperimentConfig) -> Result<u8, CliError> {
    let net = model::load_network(file)?;
    let mut consolidated = ConsolidatedReport::new(&net);

    if net.mode == Mode::Ac {
        let rep = classify::check_ac(&net);
        if !rep.pass() {
            consolidated.classification = Some(Classification {
                ac_pass: false,
                report: rep,
                cliques: Vec::new(),
                decompositions: Vec::new(),
            });
            emit_report(&consolidated, cli)?;
            return Ok(EXIT_VALIDATION);
        }
        consolidated.classification = Some(Classification {
            ac_pass: true,
            report: rep,
            cliques: classify::find_delta_cliques(&net)?,
            decompositions: classify::decompose_structure(&net)?,
        });
    }

    let analysis = report::analyze(&net, cli.tol)?;
    let stable = analysis.analytic_stable();
    consolidated.analysis = Some(analysis);

    if net.mode == Mode::Ac {
        let field = realize::synthesize_field(&net)?;
        let certs = realize::certify_connections(&field, &net)?;
        if certs.iter().all(|c| c.status == CertStatus::Pass) {
            let polylines = simulate::connection_polylines(&field, &net, 1e-2)?;
            let exp = simulate::stability_experiment(&field, &net, &polylines, cfg)?;
            consolidated.empirical = Some(exp);
        }
    }

    consolidated.settle_agreement();
    emit_report(&consolidated, cli)?;
    Ok(if stable { EXIT_OK } else { EXIT_INCONCLUSIVE })
}

fn emit_report(report: &ConsolidatedReport, cli: &Cli) -> Result<(), CliError> {
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("report.json"), report.to_json())?;
    std::fs::write(dir.join("report.md"), report.to_markdown())?;
    match cli.format.as_str() {
        "md" => println!("{}", report.to_markdown()),
        _ => println!("{}", report.to_json()),
    }
    Ok(())
}
