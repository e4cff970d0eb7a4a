use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use carbonflow::datagen::{generate_scenario, load_ci_csv, CiTable, GenConfig};
use carbonflow::exec::Execution;
use carbonflow::format::{
    read_scenario, read_solution, verify_solution, write_json, GeneratorMeta, ScenarioFile, SolutionFile,
};
use carbonflow::oracle::{oracle_equivalence, random_small_scenario};
use carbonflow::sweep::{parse_values, run_sweep, SweepInput, SweepParam, SweepSpec};
use carbonflow::{solve_scheme, Error, OffloadCi, Scheme};

const SLOT_ALIGNMENT: &str = "slot t covers clock hours [t-1, t)";

#[derive(Parser)]
#[command(name = "carbonflow", version, about = "Carbon-aware edge task scheduling as min-cost flow")]
struct Cli {
    /// Grid whose carbon intensity prices task offloading.
    #[arg(long, global = true, default_value = "destination", value_parser = parse_offload_ci)]
    offload_ci: OffloadCi,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random scenario.
    Generate {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve a scenario under one scheme.
    Solve {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value = "s1", value_parser = parse_scheme)]
        scheme: Scheme,
        /// Override the battery capacity L.
        #[arg(long)]
        battery_cap: Option<i64>,
        /// Override the server capacity H.
        #[arg(long)]
        server_cap: Option<i64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep battery or server capacity across schemes and seeds.
    Sweep(SweepArgs),
    /// Check a solution file against its scenario.
    Verify {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        solution: PathBuf,
    },
    /// Compare the flow solver with exhaustive enumeration on small random instances.
    OracleCheck {
        #[arg(long, default_value_t = 50)]
        instances: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        sequential: bool,
    },
}

#[derive(Args, Clone)]
struct GenArgs {
    #[arg(long, default_value_t = 3)]
    sites: usize,
    #[arg(long, default_value_t = 24)]
    slots: usize,
    #[arg(long, default_value_t = 100)]
    tasks: usize,
    /// CI table (region,slot,ci_g_per_kwh); the bundled table if omitted.
    #[arg(long)]
    ci: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    trials: u32,
    #[arg(long, default_value_t = 0.5)]
    probability: f64,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, default_value_t = 0.2)]
    beta: f64,
    #[arg(long = "battery-cap", id = "gen_battery_cap", default_value_t = 10)]
    battery_cap: i64,
    #[arg(long = "server-cap", id = "gen_server_cap", default_value_t = 10)]
    server_cap: i64,
    /// First renewable slot (1-based).
    #[arg(long, default_value_t = 8)]
    day_start: usize,
    /// Last renewable slot (1-based, inclusive).
    #[arg(long, default_value_t = 19)]
    day_end: usize,
}

impl GenArgs {
    fn config(&self, seed: u64) -> GenConfig {
        GenConfig {
            seed,
            num_sites: self.sites,
            num_slots: self.slots,
            num_tasks: self.tasks,
            daytime: (self.day_start, self.day_end),
            trials: self.trials,
            probability: self.probability,
            alpha: self.alpha,
            beta: self.beta,
            battery_cap: self.battery_cap,
            server_cap: self.server_cap,
        }
    }

    fn ci_table(&self) -> carbonflow::Result<CiTable> {
        match &self.ci {
            Some(path) => load_ci_csv(path),
            None => Ok(CiTable::bundled()),
        }
    }
}

#[derive(Args)]
struct SweepArgs {
    /// Scenario file(s); otherwise scenarios are generated from --seeds.
    #[arg(long)]
    scenario: Vec<PathBuf>,
    #[command(flatten)]
    gen: GenArgs,
    /// Generator seeds, e.g. `1..10` or `1,4,9`.
    #[arg(long, default_value = "1")]
    seeds: String,
    #[arg(long, default_value = "battery-cap", value_parser = parse_param)]
    param: SweepParam,
    /// Swept values, e.g. `0..14` (inclusive) or `8,10,12`.
    #[arg(long)]
    values: String,
    /// Value of the capacity not being swept.
    #[arg(long, default_value_t = 10)]
    fixed: i64,
    #[arg(long, default_value = "s1,s2,s3,s4")]
    schemes: String,
    /// Output CSV; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fill the runtime_ms column (makes output run-dependent).
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    sequential: bool,
}

fn parse_offload_ci(s: &str) -> Result<OffloadCi, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_param(s: &str) -> Result<SweepParam, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn exec(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::default()
    }
}

/// Exit status for a failed command.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Infeasible(_) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate { gen, seed, out } => generate(&gen, seed, &out),
        Command::Solve {
            scenario,
            scheme,
            battery_cap,
            server_cap,
            out,
        } => solve(&scenario, scheme, battery_cap, server_cap, cli.offload_ci, out.as_deref()),
        Command::Sweep(args) => sweep(&args, cli.offload_ci),
        Command::Verify { scenario, solution } => verify(&scenario, &solution),
        Command::OracleCheck {
            instances,
            seed,
            sequential,
        } => oracle_check(instances, seed, cli.offload_ci, exec(sequential)),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn generate(gen: &GenArgs, seed: u64, out: &Path) -> carbonflow::Result<ExitCode> {
    let ci = gen.ci_table()?;
    let config = gen.config(seed);
    let sc = generate_scenario(&config, &ci)?;
    let meta = GeneratorMeta {
        seed,
        regions: ci.regions[..config.num_sites].to_vec(),
        daytime_slots: config.daytime,
        slot_alignment: SLOT_ALIGNMENT.into(),
        trials: config.trials,
        probability: config.probability,
    };
    write_json(out, &ScenarioFile::from_scenario(&sc, Some(meta)))?;
    println!(
        "seed {seed}: {} sites, {} slots, {} tasks, total renewable {}",
        sc.num_sites,
        sc.num_slots,
        sc.num_tasks(),
        sc.total_renewable()
    );
    println!("wrote {}", out.display());
    Ok(ExitCode::SUCCESS)
}

fn solve(
    path: &Path,
    scheme: Scheme,
    battery_cap: Option<i64>,
    server_cap: Option<i64>,
    offload_ci: OffloadCi,
    out: Option<&Path>,
) -> carbonflow::Result<ExitCode> {
    let (mut sc, _) = read_scenario(path)?;
    sc = sc.with_capacities(battery_cap.unwrap_or(sc.battery_cap), server_cap.unwrap_or(sc.server_cap));
    sc.ensure_valid()?;
    let start = Instant::now();
    match solve_scheme(&sc, scheme, offload_ci) {
        Ok(sol) => {
            let b = sol.breakdown;
            println!("scheme {scheme} (offload CI: {})", offload_ci.name());
            println!("total CF   {}", b.total);
            println!("  grid     {}", b.grid);
            println!("  battery  {}", b.battery);
            println!("  offload  {}", b.offload);
            println!("  loss     {}", b.loss);
            println!("runtime    {:.3} ms", sol.runtime.as_secs_f64() * 1e3);
            if let Some(out) = out {
                write_json(out, &SolutionFile::from_solution(&sc, &sol))?;
                println!("wrote {}", out.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Err(Error::Infeasible(why)) => {
            if let Some(out) = out {
                let ms = start.elapsed().as_secs_f64() * 1e3;
                write_json(out, &SolutionFile::infeasible(scheme, offload_ci, why.to_string(), ms))?;
            }
            Err(Error::Infeasible(why))
        }
        Err(e) => Err(e),
    }
}

fn sweep(args: &SweepArgs, offload_ci: OffloadCi) -> carbonflow::Result<ExitCode> {
    let schemes = args
        .schemes
        .split(',')
        .map(|s| s.trim().parse())
        .collect::<carbonflow::Result<Vec<Scheme>>>()?;
    let spec = SweepSpec {
        param: args.param,
        values: parse_values(&args.values)?,
        fixed: args.fixed,
        schemes,
    };
    spec.validate()?;

    let inputs = if args.scenario.is_empty() {
        let ci = args.gen.ci_table()?;
        parse_values(&args.seeds)?
            .into_iter()
            .map(|seed| {
                let seed = u64::try_from(seed).map_err(|_| Error::Config(format!("negative seed {seed}")))?;
                Ok(SweepInput {
                    label: seed.to_string(),
                    scenario: generate_scenario(&args.gen.config(seed), &ci)?,
                })
            })
            .collect::<carbonflow::Result<Vec<_>>>()?
    } else {
        args.scenario
            .iter()
            .map(|path| {
                let (scenario, file) = read_scenario(path)?;
                Ok(SweepInput {
                    label: scenario_label(path, &file),
                    scenario,
                })
            })
            .collect::<carbonflow::Result<Vec<_>>>()?
    };

    let table = run_sweep(&inputs, &spec, offload_ci, exec(args.sequential))?;
    let csv = table.to_csv(args.timing);
    match &args.out {
        Some(out) => {
            std::fs::write(out, csv).map_err(|e| Error::Io {
                path: out.clone(),
                source: e,
            })?;
            let infeasible = table.rows.iter().filter(|r| r.breakdown.is_none()).count();
            println!(
                "{} rows ({} infeasible) for {} scenario(s) written to {}",
                table.rows.len(),
                infeasible,
                inputs.len(),
                out.display()
            );
        }
        None => print!("{csv}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn scenario_label(path: &Path, file: &ScenarioFile) -> String {
    match &file.generator {
        Some(meta) => meta.seed.to_string(),
        None => path
            .file_stem()
            .map_or_else(|| "scenario".into(), |s| s.to_string_lossy().replace(',', "_")),
    }
}

fn verify(scenario: &Path, solution: &Path) -> carbonflow::Result<ExitCode> {
    let (sc, _) = read_scenario(scenario)?;
    let file = read_solution(solution)?;
    let report = match verify_solution(&sc, &file) {
        Ok(report) => report,
        Err(e @ Error::Shape(_)) => {
            println!("FAIL");
            println!("{e}");
            return Ok(ExitCode::from(1));
        }
        Err(e) => return Err(e),
    };
    if report.is_ok() {
        println!("OK: constraints hold, objective re-prices{}", match file.flow {
            Some(_) => ", flow certificate checks",
            None => "",
        });
        return Ok(ExitCode::SUCCESS);
    }
    println!("FAIL");
    for v in &report.constraints.violations {
        println!("{v}");
    }
    for p in &report.problems {
        println!("{p}");
    }
    Ok(ExitCode::from(1))
}

fn oracle_check(instances: usize, seed: u64, offload_ci: OffloadCi, exec: Execution) -> carbonflow::Result<ExitCode> {
    let start = Instant::now();
    let cases = oracle_equivalence(instances, seed, offload_ci, exec)?;
    let bad: Vec<_> = cases.iter().filter(|c| !c.agrees(1e-9)).collect();
    for c in &bad {
        let show = |v: Option<f64>| v.map_or("infeasible".to_string(), |x| x.to_string());
        println!(
            "seed {} {}: flow {} vs enumeration {}",
            c.seed,
            c.scheme,
            show(c.flow_total),
            show(c.oracle_total)
        );
        let sc = random_small_scenario(c.seed);
        println!("  {} tasks, L={}, H={}", sc.num_tasks(), sc.battery_cap, sc.server_cap);
    }
    let infeasible = cases.iter().filter(|c| c.oracle_total.is_none()).count();
    println!(
        "{} cases ({} instances x {} schemes, {} infeasible): {} disagreements in {:.2}s",
        cases.len(),
        instances,
        Scheme::ALL.len(),
        infeasible,
        bad.len(),
        start.elapsed().as_secs_f64()
    );
    Ok(if bad.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
