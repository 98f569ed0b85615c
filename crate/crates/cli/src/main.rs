//! `medgraph`: manage growth standards, score measurements, render charts,
//! recommend nutrition programs, and serve or sync a data directory.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use medgraph_core::rules::Oedema;
use medgraph_core::standards::{Indicator, Sex, XUnit};

#[derive(Debug, Parser)]
#[command(name = "medgraph", version, about = "Growth charts, z-scores and nutrition rules")]
pub struct Cli {
    /// Data directory holding standards, records and the optional `config` file.
    #[arg(long, global = true, env = "MEDGRAPH_DATA_DIR")]
    data_dir: Option<PathBuf>,
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Manage the standards catalog.
    #[command(subcommand)]
    Standards(StandardsCmd),
    /// Score one measurement against a standard.
    Zscore {
        #[arg(long)]
        dataset: String,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
        #[arg(long)]
        palette: Option<String>,
    },
    /// Render a chart to SVG.
    #[command(subcommand)]
    Chart(ChartCmd),
    /// Recommend a nutrition program. Exit code 0 = NONE, 10 = SFP, 20 = OTP.
    Recommend {
        /// Weight-for-height z-score.
        #[arg(long, allow_hyphen_values = true)]
        z: f64,
        /// Mid-upper arm circumference in cm.
        #[arg(long)]
        muac: f64,
        /// none, +, ++ or +++ (or 0..3).
        #[arg(long, default_value = "none")]
        oedema: Oedema,
        /// Discharged from OTP recently.
        #[arg(long)]
        discharged: bool,
    },
    /// Daily RUTF rations for a weight.
    Rations {
        #[arg(long)]
        weight: f64,
        /// Ration table CSV; defaults to the configured table.
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Serve the HTTP API over the data directory.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: String,
    },
    /// Push queued records and pull changed standards.
    Sync {
        /// Server base URL; defaults to `server_url` from the config file.
        #[arg(long)]
        server: Option<String>,
    },
    /// Manage patients.
    #[command(subcommand)]
    Patient(PatientCmd),
    /// Manage visits.
    #[command(subcommand)]
    Visit(VisitCmd),
}

#[derive(Debug, Subcommand)]
enum StandardsCmd {
    /// Validate a CSV table and store it in the catalog.
    Add {
        csv: PathBuf,
        #[arg(long)]
        id: String,
        #[arg(long)]
        indicator: Indicator,
        #[arg(long)]
        sex: Sex,
        #[arg(long)]
        x_unit: XUnit,
        #[arg(long)]
        x_label: Option<String>,
        #[arg(long)]
        y_label: Option<String>,
    },
    /// List stored standards with their digests.
    List,
}

#[derive(Debug, Args)]
struct ChartOut {
    /// SVG output path.
    #[arg(long)]
    out: PathBuf,
    /// Also write the chart spec as JSON.
    #[arg(long)]
    spec_out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum ChartCmd {
    /// A patient's measurements over a growth standard.
    Growth {
        #[arg(long)]
        dataset: String,
        #[arg(long)]
        patient: String,
        #[arg(long)]
        palette: Option<String>,
        #[command(flatten)]
        out: ChartOut,
    },
    /// Four-panel delivery chart from a JSON description.
    Partograph {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        out: ChartOut,
    },
    /// Two series on left and right axes from a JSON description.
    Dual {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        out: ChartOut,
    },
}

#[derive(Debug, Subcommand)]
enum PatientCmd {
    /// Create or update a patient.
    Add {
        /// Defaults to a random UUID.
        #[arg(long)]
        id: Option<String>,
        #[arg(long)]
        name: String,
        #[arg(long)]
        sex: Sex,
        #[arg(long)]
        birth_date: NaiveDate,
    },
    List,
    Show {
        id: String,
    },
}

#[derive(Debug, Subcommand)]
enum VisitCmd {
    /// Record a visit.
    Add {
        #[arg(long)]
        patient: String,
        /// Defaults to a random UUID.
        #[arg(long)]
        id: Option<String>,
        /// Defaults to today.
        #[arg(long)]
        date: Option<NaiveDate>,
        #[arg(long)]
        weight: Option<f64>,
        #[arg(long)]
        height: Option<f64>,
        #[arg(long)]
        muac: Option<f64>,
        #[arg(long)]
        oedema: Option<Oedema>,
        #[arg(long)]
        note: Option<String>,
    },
    List {
        #[arg(long)]
        patient: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
