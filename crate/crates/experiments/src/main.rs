use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use unruh_core::analytic::{
    p_final_damped, p_final_ideal, p_final_translated, ClosedFormResult, TranslatedFormula,
};
use unruh_core::oracle::transition_probability_series;
use unruh_core::params::Process;
use unruh_experiments::config::{ModelKind, RunConfig};
use unruh_experiments::figures::{reproduce, Figure};
use unruh_experiments::output::{num, opt_num, write_file, Table};
use unruh_experiments::simulate::{
    ensemble, ensemble_table, oracle_series, simulate, trajectory_table,
};
use unruh_experiments::sweep::run_sweep;
use unruh_experiments::validate::{validate_params, Severity};
use unruh_experiments::LabResult;

/// Simulations of a two-level detector with a time-dependent gap coupled
/// to one phonon mode.
#[derive(Debug, Parser)]
#[command(name = "unruh-lab", version)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed of the noise ensemble.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides UNRUH_LAB_OUT_DIR and the config file.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Number of Fock levels.
    #[arg(long, global = true)]
    fock_cutoff: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the operating point against the implementation constraints.
    Validate,
    /// Evolve one model and write its trajectory.
    Simulate {
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        process: Option<String>,
        /// Also run the noise ensemble.
        #[arg(long)]
        noise: bool,
    },
    /// First-order transition probability by quadrature on the time grid.
    Oracle {
        #[arg(long)]
        process: Option<String>,
    },
    /// Closed-form p_final for every variant and both processes.
    ClosedForm,
    /// Sweep the acceleration grid.
    Sweep,
    /// Run a figure recipe: fig2, fig3, figS1, figS2, figS3 or all.
    Reproduce { figure: String },
}

fn load(cli: &Cli) -> LabResult<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(n) = cli.fock_cutoff {
        cfg.fock_cutoff = n;
    }
    if let Some(seed) = cli.seed {
        let mut noise = cfg.noise_settings();
        noise.base_seed = seed;
        cfg.noise = Some(noise);
    }
    cfg.resolve_output_dir(cli.out_dir.clone());
    cfg.validate()?;
    Ok(cfg)
}

fn parse_process(s: &Option<String>, default: Process) -> LabResult<Process> {
    Ok(match s {
        Some(s) => s.parse()?,
        None => default,
    })
}

fn closed_form_rows(
    cfg: &RunConfig,
) -> Vec<(Process, &'static str, unruh_core::Result<ClosedFormResult>)> {
    let p = cfg.params;
    let mut out = Vec::new();
    for process in Process::BOTH {
        out.push((process, "ideal", p_final_ideal(&p, process)));
        out.push((
            process,
            "damped-c0",
            p_final_damped(&p.with_c(0.0), process),
        ));
        for f in [
            TranslatedFormula::CorrectedSubstitution,
            TranslatedFormula::LiteralArgument,
        ] {
            let name = match f {
                TranslatedFormula::CorrectedSubstitution => "translated-corrected",
                TranslatedFormula::LiteralArgument => "translated-literal",
            };
            out.push((process, name, p_final_translated(&p, process, f)));
        }
    }
    out
}

fn run(cli: &Cli) -> LabResult<()> {
    let mut cfg = load(cli)?;
    let out = cfg.output_dir.clone();
    match &cli.command {
        Command::Validate => {
            let findings = validate_params(&cfg)?;
            for f in &findings {
                println!("{f}");
            }
            let warnings = findings
                .iter()
                .filter(|f| f.severity == Severity::Warning)
                .count();
            println!(
                "{} constraint(s) checked, {warnings} warning(s)",
                findings.len()
            );
        }
        Command::Simulate {
            model,
            process,
            noise,
        } => {
            if let Some(m) = model {
                cfg.kind = m.parse::<ModelKind>()?;
            }
            cfg.process = parse_process(process, cfg.process)?;
            let traj = simulate(&cfg)?;
            let oracle = oracle_series(&cfg, &traj.times).ok().flatten();
            let stem = format!("simulate_{}_{}", cfg.kind.name(), cfg.process.name());
            let path = trajectory_table(&cfg, &traj, oracle.as_deref())?
                .write(&out.join(format!("{stem}.csv")))?;
            println!("{}", path.display());
            for w in &traj.warnings {
                eprintln!("warning: {w}");
            }
            if *noise || cfg.noise.is_some() {
                let ens = ensemble(&cfg)?;
                let path =
                    ensemble_table(&cfg, &ens).write(&out.join(format!("{stem}_noise.csv")))?;
                println!("{}", path.display());
            }
        }
        Command::Oracle { process } => {
            cfg.process = parse_process(process, cfg.process)?;
            let grid = cfg.grid.times();
            let series = transition_probability_series(cfg.process, &cfg.params, &grid)?;
            let mut t = Table::new(cfg.describe(), &["t_us", "probability", "abs_error"]);
            for o in &series {
                t.push(vec![
                    num(o.t_end * 1e6),
                    num(o.probability),
                    num(o.abs_error),
                ]);
            }
            let path = t.write(&out.join(format!("oracle_{}.csv", cfg.process.name())))?;
            println!("{}", path.display());
        }
        Command::ClosedForm => {
            let mut t = Table::new(
                cfg.describe(),
                &[
                    "process", "variant", "p_final", "p_eff", "eta_pair", "error",
                ],
            );
            for (process, name, r) in closed_form_rows(&cfg) {
                let row = match r {
                    Ok(r) => vec![
                        num(r.p_final),
                        num(r.p_eff),
                        opt_num(r.eta_pair),
                        String::new(),
                    ],
                    Err(e) => vec![
                        num(f64::NAN),
                        num(f64::NAN),
                        num(f64::NAN),
                        e.to_string().replace(',', ";"),
                    ],
                };
                println!(
                    "{:<10} {:<21} p_final {}  p_eff {}",
                    process.name(),
                    name,
                    row[0],
                    row[1]
                );
                t.push([vec![process.name().to_string(), name.to_string()], row].concat());
            }
            let path = t.write(&out.join("closed_form.csv"))?;
            println!("{}", path.display());
        }
        Command::Sweep => {
            let res = run_sweep(&cfg)?;
            let path = write_file(&out.join("sweep.csv"), &res.table(&cfg).render())?;
            println!("{}", path.display());
            if res.failed() > 0 {
                eprintln!(
                    "warning: {} sweep point(s) failed; see the error column",
                    res.failed()
                );
            }
        }
        Command::Reproduce { figure } => {
            let figures = if figure == "all" {
                Figure::ALL.to_vec()
            } else {
                vec![figure.parse()?]
            };
            let mut failed = None;
            for fig in figures {
                let report = reproduce(fig, &cfg)?;
                for f in &report.files {
                    println!("{}", f.path().display());
                }
                for a in &report.assertions {
                    println!(
                        "[{}] {fig}: {} ({})",
                        if a.passed { "PASS" } else { "FAIL" },
                        a.name,
                        a.detail
                    );
                }
                if let Err(e) = report.into_result() {
                    failed.get_or_insert(e);
                }
            }
            if let Some(e) = failed {
                return Err(e);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.json_line());
            ExitCode::FAILURE
        }
    }
}
