//! `tpmwork`: sweeps of the monitored Ising chain, user-defined measurement
//! protocols and the oracle cross-checks, written as CSV.

mod config;
mod output;
mod protocol;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use tpmwork::figures::{
    kinks, sweep_efficacy, sweep_field, sweep_gamma, sweep_gamma_mean, EfficacySweep, FieldSweep, GammaSweep,
};
use tpmwork::oracle::verify::cross_check;
use tpmwork::tpm::{jarzynski_report, work_distribution};

use output::{num, Table};
use protocol::ProtocolSpec;

#[derive(Parser, Debug)]
#[command(name = "tpmwork", version, about = "Work statistics of monitored quantum systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// JSON config; its `kind` must name the subcommand. Defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (standard output when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads, 0 for one per core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Debug logging on stderr (`RUST_LOG` overrides).
    #[arg(long, short, global = true)]
    verbose: bool,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Work density and variance against the monitoring rate at fixed time.
    Fig1,
    /// Long-time work density against the monitoring rate, with kink locations.
    Fig2,
    /// Work density and variance against the transverse field.
    Fig3,
    /// Efficacy against time.
    Fig4,
    /// Work distribution and Jarzynski check of a protocol given in the config.
    Tpm,
    /// Closed forms against the brute-force oracles.
    Verify,
}

impl Command {
    fn kind(self) -> &'static str {
        match self {
            Command::Fig1 => "fig1",
            Command::Fig2 => "fig2",
            Command::Fig3 => "fig3",
            Command::Fig4 => "fig4",
            Command::Tpm => "tpm",
            Command::Verify => "verify",
        }
    }
}

/// Outcome of a subcommand: text to emit and whether every check passed.
struct Report {
    text: Vec<u8>,
    ok: bool,
}

fn table(t: Table) -> Result<Report> {
    let mut text = Vec::new();
    t.write(&mut text)?;
    Ok(Report { text, ok: true })
}

fn run(cmd: Command, common: &Common) -> Result<Report> {
    let path = common.config.as_deref();
    let kind = cmd.kind();
    match cmd {
        Command::Fig1 => {
            let cfg = config::load(path, kind, GammaSweep::transient())?;
            let mut t = Table::new(kind, &cfg, &["h", "gamma", "t", "avg_w", "var_w"])?;
            for r in sweep_gamma(&cfg)? {
                t.row(&[r.h, r.gamma, r.t, r.avg_w, r.var_w]);
            }
            table(t)
        }
        Command::Fig2 => {
            let cfg = config::load(path, kind, GammaSweep::long_time())?;
            let rows = sweep_gamma_mean(&cfg)?;
            let mut t = Table::new(kind, &cfg, &["h", "gamma", "avg_w"])?;
            for r in &rows {
                t.row(&[r.h, r.gamma, r.avg_w]);
            }
            t.footer("kink,h,gamma_kink,gamma_c");
            for k in kinks(&cfg, &rows) {
                let opt = |x: Option<f64>| num(x.unwrap_or(f64::NAN));
                t.footer(format!("kink,{},{},{}", num(k.h), opt(k.gamma_kink), opt(k.gamma_c)));
            }
            table(t)
        }
        Command::Fig3 => {
            let cfg = config::load(path, kind, FieldSweep::default())?;
            let mut t = Table::new(kind, &cfg, &["gamma", "h", "avg_w", "var_w"])?;
            for r in sweep_field(&cfg)? {
                t.row(&[r.gamma, r.h, r.avg_w, r.var_w]);
            }
            table(t)
        }
        Command::Fig4 => {
            let cfg = config::load(path, kind, EfficacySweep::default())?;
            let mut t = Table::new(kind, &cfg, &["gamma", "t", "log_gamma_t", "gamma_t_or_nan"])?;
            t.comment(format!("chain length L = {}", cfg.sites));
            for r in sweep_efficacy(&cfg)? {
                t.row(&[r.gamma, r.t, r.log_gamma_t, r.gamma_t.unwrap_or(f64::NAN)]);
            }
            table(t)
        }
        Command::Tpm => {
            let spec = config::load(path, kind, ProtocolSpec::default())?;
            let protocol = spec.build()?;
            let dist = work_distribution(&protocol)?;
            let rep = jarzynski_report(&protocol)?;
            let mut t = Table::new(kind, &spec, &["work", "probability"])?;
            t.comment(format!("records {}", protocol.record_count()));
            t.comment(format!("mean {} variance {}", num(dist.mean()), num(dist.variance())));
            t.comment(format!(
                "jarzynski lhs {} rhs {} relative_gap {} unital {} unitality_defect {}",
                num(rep.lhs),
                num(rep.rhs),
                num(rep.relative_gap()),
                rep.unital,
                num(rep.unitality_defect)
            ));
            for &(w, p) in &dist.atoms {
                t.row(&[w, p]);
            }
            table(t)
        }
        Command::Verify => {
            if path.is_some() {
                config::load(path, kind, VerifyConfig {})?;
            }
            let checks = cross_check()?;
            let mut text = Vec::new();
            writeln!(text, "{:<40} {:>6} {:>12} {:>10}  result", "check", "cases", "max error", "tolerance")?;
            for c in &checks {
                let verdict = if c.passed() { "PASS" } else { "FAIL" };
                writeln!(
                    text,
                    "{:<40} {:>6} {:>12.3e} {:>10.0e}  {verdict}",
                    c.name, c.cases, c.max_error, c.tolerance
                )?;
            }
            Ok(Report { text, ok: checks.iter().all(|c| c.passed()) })
        }
    }
}

#[derive(Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct VerifyConfig {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.common.verbose { "debug" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: &Cli) -> Result<bool> {
    if cli.common.threads > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cli.common.threads).build_global()?;
    }
    let start = std::time::Instant::now();
    let report = run(cli.command, &cli.common)?;
    log::info!("{} finished in {:.2?}", cli.command.kind(), start.elapsed());
    match &cli.common.out {
        Some(p) => {
            let mut f = BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?);
            f.write_all(&report.text)?;
            f.flush()?;
        }
        None => io::stdout().lock().write_all(&report.text)?,
    }
    Ok(report.ok)
}
