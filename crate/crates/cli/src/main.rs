mod cli;
mod commands;
mod error;
mod reproduce;
mod scenario;
mod table;

use clap::Parser as _;
use cli::{Cli, Command};
use commands::Ctx;
use error::{CliError, CliResult};
use sonolink::fem::SolutionCache;
use sonolink::safety::SafetyLimits;
use sonolink::Exec;
use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;
use table::{Meta, Output};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Help and version requests are not errors; everything else is bad input.
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Sphere(_) => "sphere",
        Command::Ringset(_) => "ringset",
        Command::Beam(_) => "beam",
        Command::Disk(_) => "disk",
        Command::Link(_) => "link",
        Command::Relay(_) => "relay",
        Command::Drift(_) => "drift",
        Command::Safety(_) => "safety",
        Command::Reproduce(_) => "reproduce",
        Command::Run(_) => "run",
    }
}

fn execute(cli: Cli) -> CliResult<()> {
    let g = &cli.global;
    let mut ctx = Ctx {
        exec: if g.sequential { Exec::Sequential } else { Exec::Parallel },
        cache: g.cache_dir.as_ref().map_or_else(SolutionCache::from_env, SolutionCache::new),
        limits: SafetyLimits::default(),
    };
    let start = Instant::now();
    let out: Output = match &cli.command {
        Command::Sphere(a) => commands::sphere(&ctx, a)?,
        Command::Ringset(a) => commands::ringset(&ctx, a)?,
        Command::Beam(a) => commands::beam(&ctx, a)?,
        Command::Disk(a) => commands::disk(a)?,
        Command::Link(a) => commands::link(&ctx, a)?,
        Command::Relay(a) => commands::relay(&ctx, a)?,
        Command::Drift(a) => commands::drift(&ctx, a)?,
        Command::Safety(a) => commands::safety(&ctx, a)?,
        Command::Reproduce(a) => reproduce::reproduce(&ctx, a.target)?,
        Command::Run(a) => {
            let sc = scenario::load(&a.scenario)?;
            ctx.limits = sc.limits.clone();
            scenario::run(&ctx, &sc)?
        }
    };
    let name = command_name(&cli.command);
    let meta = Meta { command: name.into(), config_hash: out.config_hash(name), runtime_s: start.elapsed().as_secs_f64() };

    if let Some(dir) = &g.out {
        out.write_dir(dir, &meta)?;
    }
    let text = if g.json {
        serde_json::to_string_pretty(&out.report(&meta)).expect("report serializes") + "\n"
    } else {
        out.stdout_csv()
    };
    let mut stdout = std::io::stdout().lock();
    // A closed pipe (e.g. `| head`) is not an error worth reporting.
    let _ = stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush());
    for n in &out.notes {
        log::warn!("{n}");
    }

    if out.safety_failed && (g.enforce_safety || out.enforce_safety) {
        return Err(CliError::Safety("one or more limits exceeded; see the safety table".into()));
    }
    Ok(())
}
