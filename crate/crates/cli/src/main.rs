//! `eulerlax`: residual-based verification of the 2D/3D Euler Lax pairs and
//! the Darboux transformation on periodic grids.
//!
//! Exit codes: 0 = all residuals within tolerance, 1 = a residual failed
//! (the report is still written), 2 = usage or configuration error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use eulerlax_cli::config::ExperimentConfig;
use eulerlax_cli::report::{write_csv, ResidualReport};
use eulerlax_cli::suites;
use eulerlax_cli::UsageError;

#[derive(Parser)]
#[command(
    name = "eulerlax",
    version,
    about = "Verify the Lax-pair structure of 2D/3D Euler and its Darboux transformation"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct Common {
    /// Grid points per axis.
    #[arg(long, default_value_t = 64)]
    n: usize,
    /// Base seed for all random fields; EULERLAX_SEED overrides this flag.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Verdict tolerance for the suite's gating residuals (suite default if omitted).
    #[arg(long)]
    tol: Option<f64>,
    /// Output path: JSON report, CSV for series commands, directory for euler2d-run.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run independent cases on this many threads (1 = sequential).
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

fn parse_shift(s: &str) -> Result<[f64; 3], String> {
    eulerlax_core::lax3d::ShiftVector::parse(s)
        .map(|v| v.alpha)
        .map_err(|e| e.to_string())
}

fn parse_lambda(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected re,im, got `{s}`"));
    }
    let re = parts[0].trim().parse().map_err(|e| format!("re: {e}"))?;
    let im = parts[1].trim().parse().map_err(|e| format!("im: {e}"))?;
    Ok([re, im])
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Poisson-bracket algebra invariants (antisymmetry .. Jacobi).
    #[command(name = "bracket-check")]
    BracketCheck {
        #[command(flatten)]
        common: Common,
        /// Seeded trials per invariant.
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },

    /// Integrate 2D Euler, writing EULF snapshots and diagnostics.csv.
    #[command(name = "euler2d-run")]
    Euler2dRun {
        #[command(flatten)]
        common: Common,
        /// Initial condition: eigenstate:k=1,l=1,A=1 | shear:m=1,A=1 | random:kmax=6.
        #[arg(long, default_value = "eigenstate:k=1,l=1,A=1")]
        init: String,
        /// Time step (default: the CFL bound).
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        tend: f64,
        /// Write a snapshot every this many steps.
        #[arg(long = "snap-every", default_value_t = 10)]
        snap_every: usize,
    },

    /// 2D compatibility identity and λ = 0 kernel suites.
    #[command(name = "lax2d-verify")]
    Lax2dVerify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10)]
        kmax: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },

    /// Transport a candidate eigenfunction along a flow; emit residual CSV.
    #[command(name = "lax2d-transport")]
    Lax2dTransport {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "random:kmax=6")]
        init: String,
        /// Initial eigenfunction: omega0 or a kernel function name.
        #[arg(long, default_value = "omega0")]
        phi0: String,
        #[arg(long, default_value_t = 5e-3)]
        dt: f64,
        #[arg(long, default_value_t = 0.5)]
        tend: f64,
        /// Eigenvalue as re,im.
        #[arg(long, value_parser = parse_lambda, default_value = "0,0")]
        lambda: [f64; 2],
    },

    /// Full Darboux verification on a steady state.
    #[command(name = "darboux-run")]
    DarbouxRun {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "eigenstate:k=1,l=1,A=1")]
        state: String,
        /// Kernel function for the fixed solution f.
        #[arg(long = "f", default_value = "2+cos")]
        f_name: String,
        /// Kernel function for the transformed solution p.
        #[arg(long = "p", default_value = "square")]
        p_name: String,
        /// Potential shift coefficient: F = c Ω.
        #[arg(long, default_value_t = 0.25)]
        c: f64,
        /// Relative threshold for singular-denominator masks.
        #[arg(long = "eps", default_value_t = 1e-3)]
        eps_rel: f64,
    },

    /// 3D commutator cancellation, Beltrami checks, 2D reduction.
    #[command(name = "lax3d-verify")]
    Lax3dVerify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 8)]
        kmax: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, value_parser = parse_shift, default_value = "1,2,3")]
        a1: [f64; 3],
        #[arg(long, value_parser = parse_shift, default_value = "-1,0,2")]
        a2: [f64; 3],
    },

    /// α → 0 limit study of the shifted compatibility equation.
    #[command(name = "lax3d-limit")]
    Lax3dLimit {
        #[command(flatten)]
        common: Common,
        /// Comma-separated epsilon values.
        #[arg(long = "eps", value_delimiter = ',', default_value = "1e-1,1e-2,1e-3")]
        epsilons: Vec<f64>,
        #[arg(long, value_parser = parse_shift, default_value = "1,2,3")]
        a1: [f64; 3],
        #[arg(long, value_parser = parse_shift, default_value = "-1,0,2")]
        a2: [f64; 3],
    },

    /// Residual-vs-resolution study (jacobi or darboux).
    #[command(name = "converge")]
    Converge {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        suite: String,
        #[arg(long, value_delimiter = ',', default_value = "32,48,64")]
        sizes: Vec<usize>,
        /// Input family: analytic (default) or bandlimited.
        #[arg(long, default_value = "analytic")]
        family: String,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                eprintln!("run `eulerlax --help` for usage");
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn effective_seed(cli_seed: u64) -> Result<u64> {
    match std::env::var("EULERLAX_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|e| UsageError(format!("EULERLAX_SEED: {e}")).into()),
        Err(_) => Ok(cli_seed),
    }
}

fn base_config(suite: &str, common: &Common, default_tol: f64) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::new(suite);
    config.n = common.n;
    config.seed = effective_seed(common.seed)?;
    config.tol = common.tol.unwrap_or(default_tol);
    config.jobs = common.jobs;
    config.out = common.out.clone();
    Ok(config)
}

fn emit_report(report: &ResidualReport, out: Option<&Path>) -> Result<ExitCode> {
    match out {
        Some(path) => {
            report.write_json(path)?;
            eprintln!(
                "{}: {} | {} residuals, max {:.3e} | report -> {}",
                report.suite,
                if report.verdict { "PASS" } else { "FAIL" },
                report.residuals.len(),
                report.max_linf(),
                path.display()
            );
        }
        None => println!("{}", serde_json::to_string_pretty(report)?),
    }
    Ok(if report.verdict {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn run(cmd: Cmd) -> Result<ExitCode> {
    match cmd {
        Cmd::BracketCheck { common, trials } => {
            let mut config = base_config("bracket", &common, 1e-8)?;
            config.trials = trials;
            let report = suites::run_suite(&config)?;
            emit_report(&report, common.out.as_deref())
        }

        Cmd::Euler2dRun { common, init, dt, tend, snap_every } => {
            let mut config = base_config("euler2d-run", &common, 1e-8)?;
            config.init = Some(init);
            config.dt = dt;
            config.tend = Some(tend);
            config.snap_every = Some(snap_every);
            let run = suites::euler2d_run(&config)?;

            let dir = common.out.unwrap_or_else(|| PathBuf::from("euler2d-out"));
            std::fs::create_dir_all(&dir)?;
            write_csv(
                &dir.join("diagnostics.csv"),
                "t,energy,enstrophy,mean_vorticity",
                &run.rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>(),
            )?;
            for (step, omega) in &run.snapshots {
                let file = std::fs::File::create(dir.join(format!("omega_{step:05}.eulf")))?;
                eulerlax_core::eulf::write_field2d(std::io::BufWriter::new(file), omega)?;
            }
            eprintln!(
                "euler2d-run: {} steps at dt = {:.3e}, {} snapshots -> {}",
                run.rows.len() - 1,
                run.dt,
                run.snapshots.len(),
                dir.display()
            );
            Ok(ExitCode::SUCCESS)
        }

        Cmd::Lax2dVerify { common, kmax, trials } => {
            let mut config = base_config("lax2d", &common, 1e-8)?;
            config.kmax = kmax;
            config.trials = trials;
            let report = suites::run_suite(&config)?;
            emit_report(&report, common.out.as_deref())
        }

        Cmd::Lax2dTransport { common, init, phi0, dt, tend, lambda } => {
            let mut config = base_config("transport", &common, 1e-5)?;
            config.init = Some(init);
            config.phi0 = Some(phi0);
            config.dt = Some(dt);
            config.tend = Some(tend);
            config.lambda = Some(lambda);
            let (report, series) = suites::transport_suite(&config)?;
            let rows: Vec<Vec<f64>> = series.iter().map(|s| vec![s.t, s.linf, s.l2]).collect();
            match &common.out {
                Some(path) => {
                    write_csv(path, "t,linf,l2", &rows)?;
                    eprintln!(
                        "transport: {} | {} samples -> {}",
                        if report.verdict { "PASS" } else { "FAIL" },
                        rows.len(),
                        path.display()
                    );
                }
                None => {
                    println!("t,linf,l2");
                    for r in &rows {
                        println!("{:.17e},{:.17e},{:.17e}", r[0], r[1], r[2]);
                    }
                }
            }
            Ok(if report.verdict { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }

        Cmd::DarbouxRun { common, state, f_name, p_name, c, eps_rel } => {
            let mut config = base_config("darboux", &common, 1e-6)?;
            config.state = Some(state);
            config.f_name = Some(f_name);
            config.p_name = Some(p_name);
            config.c = Some(c);
            config.eps_rel = Some(eps_rel);
            config.n = if common.n == 64 { 128 } else { common.n };
            let (report, domain) = suites::darboux_suite(&config)?;
            // The darboux-run JSON is the domain schema; the generic report
            // drives the exit code and the stderr summary.
            match &common.out {
                Some(path) => {
                    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
                    serde_json::to_writer_pretty(file, &domain)?;
                    eprintln!(
                        "darboux: {} | mask {:.4} | ch1 {:.3e} ch2 {:.3e} -> {}",
                        if report.verdict { "PASS" } else { "FAIL" },
                        domain.mask_fraction,
                        domain.residuals.ch1,
                        domain.residuals.ch2,
                        path.display()
                    );
                }
                None => println!("{}", serde_json::to_string_pretty(&domain)?),
            }
            Ok(if report.verdict { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }

        Cmd::Lax3dVerify { common, kmax, trials, a1, a2 } => {
            let mut config = base_config("lax3d", &common, 1e-7)?;
            config.kmax = kmax;
            config.trials = trials;
            config.a1 = Some(a1);
            config.a2 = Some(a2);
            let report = suites::run_suite(&config)?;
            emit_report(&report, common.out.as_deref())
        }

        Cmd::Lax3dLimit { common, epsilons, a1, a2 } => {
            let mut config = base_config("alpha-limit", &common, 0.01)?;
            config.epsilons = epsilons;
            config.a1 = Some(a1);
            config.a2 = Some(a2);
            let (report, study) = suites::alpha_limit_suite(&config)?;
            let rows: Vec<Vec<f64>> = study.rows.iter().map(|r| vec![r.eps, r.diff_linf]).collect();
            match &common.out {
                Some(path) => {
                    write_csv(path, "eps,diff_linf", &rows)?;
                    eprintln!(
                        "alpha-limit: {} | fitted order {:?} -> {}",
                        if report.verdict { "PASS" } else { "FAIL" },
                        study.fitted_order,
                        path.display()
                    );
                }
                None => {
                    println!("eps,diff_linf");
                    for r in &rows {
                        println!("{:.17e},{:.17e}", r[0], r[1]);
                    }
                }
            }
            Ok(if report.verdict { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }

        Cmd::Converge { common, suite, sizes, family } => {
            let mut config = base_config(&suite, &common, 1e-8)?;
            config.sizes = sizes;
            config.family = Some(family);
            let (report, rows) = suites::convergence_study(&config)?;
            let csv_rows: Vec<Vec<f64>> = rows.iter().map(|r| vec![r.n as f64, r.residual]).collect();
            match &common.out {
                Some(path) => {
                    write_csv(path, "n,residual", &csv_rows)?;
                    eprintln!(
                        "converge/{}: {} -> {}",
                        report.suite,
                        if report.verdict { "PASS" } else { "FAIL" },
                        path.display()
                    );
                }
                None => {
                    println!("n,residual");
                    for r in &csv_rows {
                        println!("{},{:.17e}", r[0] as usize, r[1]);
                    }
                }
            }
            Ok(if report.verdict { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}
