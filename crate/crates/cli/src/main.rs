mod args;
mod commands;
mod error;
mod manifest;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::Global;
use error::{CliError, Result};
use manifest::Run;

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::new("threads", e.to_string()))?;
    }
    let g = Global {
        seed: cli.seed,
        out: cli.out.clone(),
    };
    let config = serde_json::to_value(&cli.command)?;
    let name = cli.command.name();
    let mut run = Run::new(&g.out)?;
    let mut verdict = true;
    match &cli.command {
        Command::Ingest(a) => commands::ingest(&mut run, a)?,
        Command::Svd(a) => commands::svd(&mut run, a, &g)?,
        Command::Orthant(a) => commands::orthant(&mut run, a, &g)?,
        Command::Hierarchy(a) => commands::hierarchy(&mut run, a, &g)?,
        Command::Kmeans(a) => commands::kmeans(&mut run, a, &g)?,
        Command::TrainUfm(a) => commands::train_ufm(&mut run, a, &g)?,
        Command::VerifyOnehot(a) => verdict = commands::verify_onehot_cmd(&mut run, a, &g)?,
        Command::Organism => commands::organism(&mut run)?,
        Command::Emergence(a) => commands::emergence(&mut run, a, &g)?,
        Command::ExportCloud(a) => commands::export_cloud(&mut run, a, &g)?,
        Command::Serve(a) => {
            let session = commands::serve_session(&mut run, a, &g)?;
            run.finish(name, cli.seed, cli.threads, &config)?;
            let addr = std::net::SocketAddr::new(a.host, a.port);
            let rt = tokio::runtime::Builder::new_multi_thread()
                .enable_all()
                .build()
                .map_err(|e| CliError::new("runtime", e.to_string()))?;
            eprintln!("serving on http://{addr}");
            return rt
                .block_on(ntpgeo_server::serve(session, addr, a.static_dir.clone()))
                .map_err(|e| CliError::new("serve", format!("{addr}: {e}")));
        }
    }
    run.finish(name, cli.seed, cli.threads, &config)?;
    if !verdict {
        return Err(CliError::new("verification-failed", "computed spectrum does not match the analytic tiers"));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", serde_json::to_string(&e).unwrap_or_else(|_| format!("{{\"error\":\"{}\"}}", e.error)));
            ExitCode::from(1)
        }
    }
}
