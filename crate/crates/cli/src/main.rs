use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gtorsion::diffgeo::Backend;
use gtorsion::report::{self, exit, RunConfig, Suite};
use gtorsion::scenarios;
use gtorsion::GeomError;

#[derive(Parser)]
#[command(name = "gtorsion", version, about = "Checks the geometry of almost-product structures and their reduced frame bundles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the selected suites on sampled points and write a JSON report.
    Run(RunArgs),
    /// List the scenario catalogue with expectations.
    List,
    /// Print the formula behind a check; without a name, list all checks.
    Explain { check: Option<String> },
}

#[derive(clap::Args)]
struct RunArgs {
    /// TOML file with defaults and per-scenario overrides; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scenario id (repeatable); all scenarios when omitted.
    #[arg(long = "scenario")]
    scenarios: Vec<String>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// analytic, fd or fd-richardson.
    #[arg(long)]
    backend: Option<String>,
    #[arg(long)]
    fd_step: Option<f64>,
    /// Tolerance override `<class-or-check>=<value>` (repeatable).
    #[arg(long = "tol")]
    tol: Vec<String>,
    /// Suite to run: identity, curvature or minimality (repeatable).
    #[arg(long = "suite")]
    suites: Vec<String>,
    /// Random probe tuples per point.
    #[arg(long)]
    probes: Option<usize>,
    /// Report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn build_config(args: RunArgs) -> Result<RunConfig, GeomError> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::from_toml_file(path)?,
        None => RunConfig::default(),
    };
    if !args.scenarios.is_empty() {
        cfg.scenarios = args.scenarios;
    }
    if args.points.is_some() {
        cfg.points = args.points;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(b) = args.backend {
        cfg.backend = Some(b.parse::<Backend>()?);
    }
    if let Some(h) = args.fd_step {
        cfg.fd_step = h;
    }
    for t in &args.tol {
        let (name, value) = t
            .split_once('=')
            .ok_or_else(|| GeomError::Config(format!("--tol expects <name>=<value>, got `{t}`")))?;
        let v: f64 =
            value.trim().parse().map_err(|_| GeomError::Config(format!("--tol value `{value}` is not a number")))?;
        cfg.tolerances.insert(name.trim().to_string(), v);
    }
    if !args.suites.is_empty() {
        cfg.suites = args.suites.iter().map(|s| s.parse::<Suite>()).collect::<Result<_, _>>()?;
    }
    if let Some(p) = args.probes {
        cfg.probes = p;
    }
    cfg.out = args.out;
    Ok(cfg)
}

fn run(args: RunArgs) -> i32 {
    let cfg = match build_config(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit::CONFIG_ERROR;
        }
    };
    let rep = match report::run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return exit::CONFIG_ERROR;
        }
    };
    match &cfg.out {
        Some(path) => {
            if let Err(e) = rep.write(path) {
                eprintln!("error: {e}");
                return exit::CONFIG_ERROR;
            }
        }
        None => print!("{}", rep.to_json()),
    }
    for sc in &rep.scenarios {
        let failing: Vec<&str> =
            sc.aggregates.iter().filter(|(_, a)| a.gated && a.failures > 0).map(|(n, _)| n.as_str()).collect();
        let status = if sc.pass { "pass" } else { "FAIL" };
        eprintln!("{status} {} ({} points, {})", sc.id, sc.points.len(), sc.backend);
        if !failing.is_empty() {
            eprintln!("  failing: {}", failing.join(", "));
        }
        for e in &sc.expectation_checks {
            let mark = if e.check.pass { "ok" } else { "FAIL" };
            eprintln!(
                "  {mark} {} = {:.3e} (threshold {:.1e}, met at {}/{} points)",
                e.check.name, e.check.value, e.check.tol, e.points_passing, e.points
            );
        }
        for p in sc.points.iter().filter(|p| p.error.is_some()) {
            eprintln!("  point {} {:?}: {}", p.index, p.coords, p.error.as_ref().unwrap().message);
        }
    }
    rep.exit_code
}

fn list() -> i32 {
    for sc in scenarios::catalogue() {
        println!(
            "{:<14} dim {} rank {}  [{}]  {} points, {}\n    {}",
            sc.id,
            sc.dim(),
            sc.rank(),
            sc.expectations.flags().join(", "),
            sc.default_points,
            sc.backend,
            sc.description
        );
    }
    exit::PASS
}

fn explain(check: Option<String>) -> i32 {
    match check {
        None => {
            for c in report::CHECKS {
                println!("{:<34} {}", c.name, c.summary);
            }
            exit::PASS
        }
        Some(name) => match report::explain(&name) {
            Some(text) => {
                print!("{text}");
                exit::PASS
            }
            None => {
                eprintln!("error: unknown check `{name}`; run `gtorsion explain` for the list");
                exit::CONFIG_ERROR
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::CONFIG_ERROR } else { exit::PASS };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let code = match cli.command {
        Command::Run(args) => run(args),
        Command::List => list(),
        Command::Explain { check } => explain(check),
    };
    ExitCode::from(code as u8)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(extra: &[&str]) -> RunArgs {
        let mut argv = vec!["gtorsion", "run"];
        argv.extend_from_slice(extra);
        match Cli::try_parse_from(argv).unwrap().command {
            Command::Run(a) => a,
            _ => unreachable!(),
        }
    }

    #[test]
    fn flags_fill_the_config() {
        let cfg = build_config(args(&[
            "--scenario", "s3-reeb", "--points", "7", "--backend", "fd", "--tol", "gate=1e-5", "--suite", "minimality",
        ]))
        .unwrap();
        assert_eq!(cfg.scenarios, ["s3-reeb"]);
        assert_eq!(cfg.points, Some(7));
        assert_eq!(cfg.backend, Some(Backend::Fd));
        assert_eq!(cfg.tolerances["gate"], 1e-5);
        assert_eq!(cfg.suites, [Suite::Minimality]);
    }

    #[test]
    fn malformed_flags_are_config_errors() {
        for bad in [["--tol", "gate"], ["--tol", "gate=x"], ["--suite", "nope"], ["--backend", "exact"]] {
            assert!(matches!(build_config(args(&bad)), Err(GeomError::Config(_))), "{bad:?}");
        }
    }
}
