use std::process::ExitCode;

use clap::{Parser, Subcommand};
use forwarding_harness::compare::{compare, CompareReport};
use forwarding_harness::error::{EXIT_CONFIG, EXIT_OK, EXIT_PROPERTY};
use forwarding_harness::lasalle::{lasalle_check, LasalleReport};
use forwarding_harness::runner::Summary;
use forwarding_harness::selftest::selftest;
use forwarding_harness::{presets, run, ExperimentConfig, Result};

/// Forwarding stabilization of a transport PDE with a saturated ODE input.
#[derive(Parser)]
#[command(name = "fwdstab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment (config file or preset name) and write CSV output.
    Run { config: String },
    /// Compare two runs of the same experiment.
    Compare { config_a: String, config_b: String },
    /// Closed-loop tail suprema and the zero-inflow energy check.
    Lasalle { config: String },
    /// Run the property battery; exits with 3 on any violation.
    Selftest {
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
    /// List built-in presets, or print one as TOML.
    Presets {
        #[arg(long)]
        show: Option<String>,
    },
}

fn opt(v: Option<f64>) -> String {
    v.map(|t| format!("{t}")).unwrap_or_else(|| "none".into())
}

fn print_summary(s: &Summary) {
    println!("name = {}", s.name);
    println!("solver = {:?}", s.solver);
    println!("steps = {}", s.steps);
    println!("V0 = {:.17e}", s.v0);
    println!("V_end = {:.17e}", s.v_end);
    println!("V_end/V0 = {:.17e}", s.v_ratio);
    println!("max_dV = {:.6e}", s.max_dv);
    println!("min_dV = {:.6e}", s.min_dv);
    println!("V_monotone = {}", s.v_monotone);
    println!("z_sq_end/z_sq_0 = {:.6e}", s.z_sq_ratio);
    println!("w_sq_end/w_sq_0 = {:.6e}", s.w_sq_ratio);
    println!("first |z| < 1e-3 at t = {}", opt(s.first_abs_z_below));
    println!("z^2 stays < 1e-4 from t = {}", opt(s.z_sq_settles));
    println!("|w|^2 stays < 1e-4 from t = {}", opt(s.w_sq_settles));
    for t in &s.tails {
        println!(
            "sup over [{}, end]: |z| = {:.6e}, |u| = {:.6e}, |<w,M>| = {:.6e}",
            t.from, t.sup_abs_z, t.sup_abs_u, t.sup_abs_w_gain
        );
    }
}

fn print_compare(r: &CompareReport) {
    println!("{:>10} {:>24} {:>24} {:>12} {:>12} {:>12}", "t", "z_a", "z_b", "|dz|", "|du|", "|dV|");
    for row in &r.table {
        println!(
            "{:>10.4} {:>24.16e} {:>24.16e} {:>12.4e} {:>12.4e} {:>12.4e}",
            row.t, row.z_a, row.z_b, row.dz, row.du, row.dv
        );
    }
    println!("max |dz| = {:.6e}, max |du| = {:.6e}, max |dV| = {:.6e} over [0, {}]", r.max_dz, r.max_du, r.max_dv, r.t_end);
    match (r.refinement, r.order) {
        (Some(f), Some(q)) => println!("refinement {f}, empirical order {q:.4}"),
        (Some(f), None) => println!("refinement {f}, order undefined (zero deviation)"),
        _ => println!("no common refinement: order not computed"),
    }
}

fn print_lasalle(r: &LasalleReport) {
    println!("z(t_end) = {:.6e}", r.z_end);
    for t in &r.tails {
        println!(
            "sup over [{}, end]: |z| = {:.6e}, |u| = {:.6e}, |<w,M>| = {:.6e}",
            t.from, t.sup_abs_z, t.sup_abs_u, t.sup_abs_w_gain
        );
    }
    let z = &r.zero_inflow;
    println!("zero-inflow transport, lambda = {}", z.lambda);
    println!("  support ends at x = {}", opt(z.support_end));
    println!("  E1(0) = {:.6e}, E2(0) = {:.6e}", z.e1_initial, z.e2_initial);
    println!("  max relative E1 drift before exit = {:.3e}", z.e1_drift_before_exit);
    println!("  max E1 for t >= 1/lambda = {:.3e}", z.e1_after_empty);
    println!("  max E2(t) / (e^(-lambda t) E2(0)) - 1 = {:.3e}", z.e2_decay_excess);
    println!("  E1 preserved = {}", z.e1_preserved);
}

fn execute(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Run { config } => {
            let cfg = ExperimentConfig::resolve(&config)?;
            let (out, written) = run(&cfg)?;
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            print_summary(&out.summary);
            println!("wrote {}", written.trajectory.display());
            Ok(EXIT_OK)
        }
        Command::Compare { config_a, config_b } => {
            let a = ExperimentConfig::resolve(&config_a)?;
            let b = ExperimentConfig::resolve(&config_b)?;
            print_compare(&compare(&a, &b)?);
            Ok(EXIT_OK)
        }
        Command::Lasalle { config } => {
            print_lasalle(&lasalle_check(&ExperimentConfig::resolve(&config)?)?);
            Ok(EXIT_OK)
        }
        Command::Selftest { seed } => {
            let report = selftest(seed)?;
            for c in &report.checks {
                println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            Ok(if report.passed() { EXIT_OK } else { EXIT_PROPERTY })
        }
        Command::Presets { show } => {
            match show {
                Some(name) => {
                    let cfg = presets::find(&name).ok_or_else(|| {
                        forwarding_harness::HarnessError::Config(format!("unknown preset `{name}`"))
                    })?;
                    print!("{}", cfg.to_toml_string()?);
                }
                None => {
                    for p in presets::all() {
                        println!("{:<20} {}", p.name, p.description);
                    }
                }
            }
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    // usage errors are config errors, not clap's default exit code 2
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
