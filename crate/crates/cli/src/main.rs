//! Command-line driver: build the averaged Choi operators, verify the dual
//! certificates, solve the primal SDP, and simulate the comparison protocol.
//!
//! Exit codes: 0 success, 1 usage error, 2 verification failure,
//! 3 solver non-convergence.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use discrim_core::haar::{build_m, MVariant};
use discrim_core::irrep::{
    closed_form_certificate, transfer_certificate_swap, verify_dual, CandidatePair, DualReport,
};
use discrim_core::matio::write_matrix;
use discrim_core::primal::{
    assemble_primal, check_primal_feasibility, comparison_tester_choi, maximally_mixed_point,
    objective_esp, solve_sdp, SolveParams,
};
use discrim_core::sim::{estimate_esp, SimMode};

#[derive(Parser)]
#[command(name = "discrim", version, about = "certify the 7/8 optimum for discriminating a qubit unitary between two random candidates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PairArg {
    #[value(name = "12")]
    P12,
    #[value(name = "23")]
    P23,
    #[value(name = "31")]
    P31,
}

impl From<PairArg> for CandidatePair {
    fn from(p: PairArg) -> Self {
        match p {
            PairArg::P12 => CandidatePair::P12,
            PairArg::P23 => CandidatePair::P23,
            PairArg::P31 => CandidatePair::P31,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum WarmStart {
    Comparison,
    Mixed,
    None,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Shots,
}

#[derive(Args)]
struct OutArg {
    /// write the report/matrix here (default: DISCRIM_OUT_DIR or stdout only)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Write one averaged Choi operator in the shared matrix format.
    BuildM {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        which: u8,
        #[arg(long)]
        out: PathBuf,
    },
    /// Verify the closed-form dual certificate for a pair (pair 31 via the
    /// register-swap transfer).
    VerifyDual {
        #[arg(long)]
        pair: PairArg,
        #[arg(long, default_value_t = 1e-9)]
        tol_psd: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol_eq: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Assemble and solve the primal SDP for a pair.
    SolvePrimal {
        #[arg(long)]
        pair: PairArg,
        #[arg(long, value_enum, default_value_t = WarmStart::Mixed)]
        warm_start: WarmStart,
        #[arg(long, default_value_t = 1e-8)]
        tol_feas: f64,
        #[arg(long, default_value_t = 1e-4)]
        tol_obj: f64,
        #[arg(long, default_value_t = 50_000)]
        max_iter: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Monte Carlo estimate of the comparison protocol's expected success
    /// probability.
    Simulate {
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        /// defaults to DISCRIM_SEED or 0
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
        mode: ModeArg,
        /// worker threads (0 = rayon default); the estimate is independent
        /// of this value
        #[arg(long, default_value_t = 0)]
        threads: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Run the full pipeline: certificates, exact primal points, solver, and
    /// simulation, with a combined verdict.
    CertifyAll {
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        out: OutArg,
    },
}

fn env_seed(cli_seed: Option<u64>) -> u64 {
    cli_seed
        .or_else(|| std::env::var("DISCRIM_SEED").ok().and_then(|s| s.parse().ok()))
        .unwrap_or(0)
}

fn emit(out: &OutArg, name: &str, text: &str) -> std::io::Result<()> {
    print!("{text}");
    let target = out.out.clone().or_else(|| {
        std::env::var("DISCRIM_OUT_DIR").ok().map(|d| PathBuf::from(d).join(name))
    });
    if let Some(path) = target {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(path, text)?;
    }
    Ok(())
}

fn run_verify(pair: CandidatePair, tol_psd: f64, tol_eq: f64) -> discrim_core::Result<DualReport> {
    match pair {
        CandidatePair::P12 | CandidatePair::P23 => {
            let (vj, vjp) = pair.variants();
            let cert = closed_form_certificate(pair)?;
            verify_dual(&cert, &build_m(vj), &build_m(vjp), tol_psd, tol_eq)
        }
        CandidatePair::P31 => {
            let cert = closed_form_certificate(CandidatePair::P12)?;
            transfer_certificate_swap(
                &cert,
                &build_m(MVariant::M3),
                &build_m(MVariant::M1),
                tol_psd,
                tol_eq,
            )
        }
    }
}

fn real_main() -> Result<ExitCode, Box<dyn std::error::Error>> {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are not usage errors
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            e.print()?;
            return Ok(ExitCode::from(code));
        }
    };

    match cli.command {
        Command::BuildM { which, out } => {
            let m = build_m(MVariant::from_index(which).expect("range-checked"));
            if let Some(parent) = out.parent() {
                std::fs::create_dir_all(parent)?;
            }
            write_matrix(&m, &out)?;
            println!("wrote M<{which}> ({}x{}, trace {:.1}) to {}", m.side(), m.side(), m.trace().re, out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::VerifyDual { pair, tol_psd, tol_eq, out } => {
            let pair = CandidatePair::from(pair);
            let report = run_verify(pair, tol_psd, tol_eq)?;
            emit(&out, &format!("verify-{pair}.txt"), &report.to_string())?;
            Ok(if report.pass { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
        Command::SolvePrimal { pair, warm_start, tol_feas, tol_obj, max_iter, out } => {
            let pair = CandidatePair::from(pair);
            let problem = assemble_primal(pair);
            let warm = match warm_start {
                WarmStart::Comparison => Some(comparison_tester_choi(pair)?),
                WarmStart::Mixed => Some(maximally_mixed_point(problem.rhs)),
                WarmStart::None => None,
            };
            let params = SolveParams { tol_feas, tol_obj, max_iter, warm_start: warm, ..SolveParams::default() };
            let (report, _) = solve_sdp(&problem, &params)?;
            emit(&out, &format!("solve-{pair}.txt"), &report.to_string())?;
            if !report.converged {
                return Ok(ExitCode::from(3));
            }
            Ok(if (report.value - 0.875).abs() <= tol_obj {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::Simulate { trials, seed, mode, threads, out } => {
            let seed = env_seed(seed);
            let mode = match mode {
                ModeArg::Exact => SimMode::Exact,
                ModeArg::Shots => SimMode::Shots,
            };
            let report = if threads > 0 {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build()?
                    .install(|| estimate_esp(trials, seed, mode))
            } else {
                estimate_esp(trials, seed, mode)
            };
            let text = format!("{report}threads: {threads}\n");
            emit(&out, "simulate.txt", &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::CertifyAll { trials, seed, out } => {
            let seed = env_seed(seed);
            let mut text = String::new();
            let mut ok = true;

            for pair in CandidatePair::ALL {
                let report = run_verify(pair, 1e-9, 1e-10)?;
                ok &= report.pass;
                text += &format!("[dual {pair}]\n{report}\n");
            }

            for pair in CandidatePair::ALL {
                let point = comparison_tester_choi(pair)?;
                let feas = check_primal_feasibility(&point.rho1, &point.rho2, 1.0, 1e-12)?;
                let value = objective_esp(&point.rho1, &point.rho2, pair)?;
                let point_ok = feas.pass && (value - 0.875).abs() <= 1e-12;
                ok &= point_ok;
                text += &format!(
                    "[comparison point {pair}]\nvalue: {value:.12}\n{feas}\n"
                );
            }

            for pair in CandidatePair::ALL {
                let problem = assemble_primal(pair);
                let (report, _) = solve_sdp(&problem, &SolveParams::default())?;
                ok &= report.converged && (report.value - 0.875).abs() <= 1e-4;
                text += &format!("[solve {pair}]\n{report}\n");
            }

            let sim = estimate_esp(trials, seed, SimMode::Exact);
            ok &= (sim.mean_esp - 0.875).abs() <= 5.0 * sim.std_error;
            text += &format!("[simulation]\n{sim}\n");

            text += if ok {
                "verdict: optimal ESP = 7/8 certified\n"
            } else {
                "verdict: FAILED\n"
            };
            emit(&out, "certify-all.txt", &text)?;
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
