#![allow(clippy::neg_cmp_op_on_partial_ord)]
mod config;
mod output;
mod verify;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use wogl_core::engagement::simulate;
use wogl_core::format::sig;

use config::ScenarioFile;

const AFTER_HELP: &str = "\
Scenario files are JSON with sections `missile`, `target`, `guidance`, `sim`
and an optional `sweep`. All angles in scenario files are in degrees
(missile.gamma_deg, guidance.gamma_f_deg); they are converted to radians
internally. Example:

  {
    \"missile\":  {\"x\": 0, \"y\": 0, \"gamma_deg\": 10, \"speed\": 250},
    \"target\":   {\"x\": 5000, \"y\": 0},
    \"guidance\": {\"weight\": {\"family\": \"power_tgo\", \"params\": {\"n\": 1}},
                 \"gamma_f_deg\": -30, \"tgo_min\": 0.001, \"a_max\": null},
    \"sim\":      {\"mode\": \"nonlinear\", \"dt\": 0.001, \"method\": \"rk4\"},
    \"sweep\":    {\"param\": \"n\", \"values\": [0, 1, 2, 3]}
  }

Weight families: uniform {}, power_tgo {n}, exponential {a}, polynomial {coeffs}.
Linear mode also takes sim.tf, sim.y0 [m] and sim.v0 [m/s].

Exit codes: 0 success, 1 verification failure, 2 usage or configuration
error, 3 simulation failure (divergence or non-finite state).";

#[derive(Parser)]
#[command(name = "wogl", version, about = "Weighted optimal impact-angle guidance: simulate, sweep and verify")]
#[command(after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one engagement; writes trajectory.csv, summary.csv and gains.csv.
    Run {
        #[command(flatten)]
        common: Common,
        /// Also write trajectory.svg and accel.svg.
        #[arg(long)]
        svg: bool,
    },
    /// Run the scenario over a grid of weight parameters; writes sweep.csv.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Weight parameter to vary (defaults to the sweep section, then the family's parameter).
        #[arg(long)]
        param: Option<String>,
        /// Comma-separated grid, overriding the sweep section.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Option<Vec<f64>>,
    },
    /// Check feasibility, gram determinant positivity, moment agreement,
    /// oracle agreement and command-form equivalence for the scenario weight.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Discrete oracle step count (the refinement check uses twice this).
        #[arg(long, default_value_t = 1 << 14)]
        steps: usize,
    },
}

#[derive(Args)]
struct Common {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

enum Failure {
    Verification,
    Usage(anyhow::Error),
    Simulation(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verification => 1,
            Failure::Usage(_) => 2,
            Failure::Simulation(_) => 3,
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

type Outcome = Result<(), Failure>;

fn load(common: &Common) -> Result<(ScenarioFile, wogl_core::engagement::Scenario), Failure> {
    let file = ScenarioFile::load(&common.scenario)?;
    let sc = file
        .to_scenario()
        .with_context(|| format!("{}: invalid scenario", common.scenario.display()))?;
    Ok((file, sc))
}

fn out_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))
        .map_err(Failure::Usage)
}

/// Write to stdout, ignoring a closed pipe.
fn say(text: &str) {
    let _ = io::stdout().lock().write_all(text.as_bytes());
}

fn io_failure(e: anyhow::Error) -> Failure {
    Failure::Simulation(e)
}

fn run(common: &Common, svg: bool) -> Outcome {
    let (_, sc) = load(common)?;
    out_dir(&common.out)?;
    let horizon = verify::initial_state(&sc).map_err(|e| Failure::Usage(e.into()))?.tgo;
    let gains = output::gains_table(&sc.weight, horizon).map_err(Failure::Usage)?;
    output::write_gains(&common.out.join("gains.csv"), &gains).map_err(io_failure)?;

    let traj_path = common.out.join("trajectory.csv");
    let sim = match simulate(&sc) {
        Ok(sim) => sim,
        Err(e) => {
            if let Some(partial) = e.partial_trajectory() {
                output::write_trajectory(&traj_path, partial).map_err(io_failure)?;
                eprintln!("partial trajectory ({} records) kept in {}", partial.len(), traj_path.display());
            }
            return Err(Failure::Simulation(e.into()));
        }
    };
    output::write_trajectory(&traj_path, &sim.records).map_err(io_failure)?;
    output::write_summary(&common.out.join("summary.csv"), &sim.metrics).map_err(io_failure)?;
    if svg {
        output::write_svgs(&common.out, &sim.records).map_err(io_failure)?;
    }

    let m = &sim.metrics;
    let (_, k1, k2) = gains[gains.len() - 1];
    say(&format!(
        "weight             {}\n\
         gains at t0        k1 = {}, k2 = {}\n\
         miss distance      {} m\n\
         impact angle error {} deg\n\
         control cost       {}\n\
         peak acceleration  {} m/s^2\n\
         flight time        {} s\n\
         outputs written to {}\n",
        sc.weight.name(),
        sig(k1, 10),
        sig(k2, 10),
        sig(m.miss_distance, 6),
        sig(m.impact_angle_error.to_degrees(), 6),
        sig(m.total_cost, 8),
        sig(m.peak_accel, 6),
        sig(m.flight_time, 8),
        common.out.display()
    ));
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn sweep(common: &Common, param: Option<&str>, values: Option<&[f64]>) -> Outcome {
    let (file, sc) = load(common)?;
    let section = file.sweep.as_ref();
    let values = values.or(section.map(|s| s.values.as_slice())).unwrap_or(&[]);
    if values.is_empty() {
        return Err(Failure::Usage(anyhow!("sweep grid is empty (give --values or a sweep section)")));
    }
    let param = param
        .or(section.map(|s| s.param.as_str()))
        .or(sc.weight.scalar_param())
        .ok_or_else(|| anyhow!("weight family {} has no sweepable parameter", sc.weight.name()))?;
    sc.weight.with_param(param, values[0]).map_err(|e| Failure::Usage(e.into()))?;
    out_dir(&common.out)?;

    let rows: Vec<String> = values
        .par_iter()
        .map(|&value| {
            let mut run = sc.clone();
            let result = sc
                .weight
                .with_param(param, value)
                .and_then(|w| {
                    run.weight = w;
                    simulate(&run)
                });
            let fields = match result {
                Ok(sim) => format!("{},ok", output::metric_fields(&sim.metrics)),
                Err(e) => format!(",,,,,{}", csv_field(&format!("error: {e}"))),
            };
            format!("{},{},{}", csv_field(param), sig(value, 12), fields)
        })
        .collect();

    let path = common.out.join("sweep.csv");
    let mut text = String::from("param_name,param_value,miss_m,angle_err_deg,cost,peak_accel,flight_time_s,status\n");
    for row in &rows {
        text.push_str(row);
        text.push('\n');
    }
    fs::write(&path, &text).with_context(|| format!("cannot write {}", path.display())).map_err(io_failure)?;
    let failed = rows.iter().filter(|r| !r.ends_with(",ok")).count();
    say(&text);
    say(&format!("{} runs, {failed} failed; written to {}\n", rows.len(), path.display()));
    Ok(())
}

fn verify_cmd(common: &Common, steps: usize) -> Outcome {
    let (_, sc) = load(common)?;
    if steps < 2 {
        return Err(Failure::Usage(anyhow!("--steps must be at least 2")));
    }
    let checks = verify::run_checks(&sc, steps).map_err(|e| Failure::Usage(e.into()))?;
    let mut report = String::new();
    for c in &checks {
        report += &format!("[{}] {}: {}\n", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    report += &format!("{}/{} checks passed\n", checks.len() - failed, checks.len());
    say(&report);
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { common, svg } => run(common, *svg),
        Command::Sweep { common, param, values } => sweep(common, param.as_deref(), values.as_deref()),
        Command::Verify { common, steps } => verify_cmd(common, *steps),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(e) | Failure::Simulation(e) => eprintln!("error: {e:#}"),
                Failure::Verification => eprintln!("verification failed"),
            }
            ExitCode::from(f.code())
        }
    }
}
