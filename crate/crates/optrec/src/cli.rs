//! Command-line interface.
//!
//! Three subcommands: `local` (Chebyshev center for one data vector),
//! `global` (optimal linear recovery map), and `verify` (re-check a saved
//! report against its instance). Reports go to stdout as single-line JSON;
//! diagnostics go to stderr. Exit codes: 0 on success, 1 when the problem
//! has no answer or a numerical contract failed (and for failed
//! verifications), 2 for malformed input or usage errors.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
use crate::global;
use crate::local::{self, LocalMethod, LocalRoute, LocalSolution};
use crate::model::{self, ProblemInstance};
use crate::oracle;
use crate::report::{self, ParsedReport};

#[derive(Parser)]
#[command(
    name = "optrec",
    version,
    about = "Worst-case optimal recovery: Chebyshev centers, optimal linear maps, certificates"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Chebyshev center and radius of the set consistent with the data.
    Local {
        /// Instance JSON file.
        #[arg(long)]
        input: PathBuf,
        /// Route: auto, eigen, ball, or sdp.
        #[arg(long, default_value = "auto")]
        method: String,
        /// Root-finding and search tolerance.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Cross-check the result with the sampling oracle.
        #[arg(long)]
        verify: bool,
        /// Random samples for --verify.
        #[arg(long, default_value_t = 20000)]
        oracle_samples: usize,
        /// Oracle seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Globally optimal linear recovery map and its certified value.
    Global {
        /// Instance JSON file.
        #[arg(long)]
        input: PathBuf,
        /// Evaluate the map at this trade-off weight instead of optimizing.
        #[arg(long)]
        tau: Option<f64>,
        /// Search tolerance.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Cross-check the result with the sampling oracle.
        #[arg(long)]
        verify: bool,
        /// Random samples for --verify.
        #[arg(long, default_value_t = 20000)]
        oracle_samples: usize,
        /// Oracle seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Re-check a saved report against its instance.
    Verify {
        /// Instance JSON file.
        #[arg(long)]
        input: PathBuf,
        /// Report JSON file produced by `local` or `global`.
        #[arg(long)]
        report: PathBuf,
        /// Random samples for the soundness check.
        #[arg(long, default_value_t = 20000)]
        oracle_samples: usize,
        /// Oracle seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Parses the process arguments, runs the command, and returns the exit
/// code. Clap handles usage errors itself (printing to stderr, code 2).
pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::Validation(_) | Error::Domain(_) => 2,
        Error::NotSymmetric { .. }
        | Error::RankDeficient { .. }
        | Error::InfiniteWorstCase { .. }
        | Error::EmptyConsistentSet { .. }
        | Error::StrictFeasibility(_)
        | Error::RootNotFound(_)
        | Error::UnboundedGwce
        | Error::NumericalGuard(_) => 1,
    }
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Validation(format!("cannot read {}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<(ProblemInstance, model::Geometry)> {
    let text = read_file(path)?;
    let p = ProblemInstance::from_json_str(&text)?;
    let g = model::validate(&p)?;
    Ok((p, g))
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.cmd {
        Cmd::Local {
            input,
            method,
            tol,
            verify,
            oracle_samples,
            seed,
        } => cmd_local(&input, &method, tol, verify, oracle_samples, seed),
        Cmd::Global {
            input,
            tau,
            tol,
            verify,
            oracle_samples,
            seed,
        } => cmd_global(&input, tau, tol, verify, oracle_samples, seed),
        Cmd::Verify {
            input,
            report,
            oracle_samples,
            seed,
        } => cmd_verify(&input, &report, oracle_samples, seed),
    }
}

/// Relative slack granted to an oracle estimate before it counts as
/// exceeding the certified value.
const SOUND_REL: f64 = 1e-6;
const SOUND_ABS: f64 = 1e-9;

fn cmd_local(
    input: &Path,
    method: &str,
    tol: f64,
    verify: bool,
    oracle_samples: usize,
    seed: u64,
) -> Result<i32> {
    let (p, g) = load_instance(input)?;
    let method: LocalMethod = method.parse()?;
    let sol = local::solve_local(&p, &g, method, tol)?;
    let mut warnings = Vec::new();
    let oracle = if verify {
        let rep = oracle::sample_radius(&p, &g, &sol.center, oracle_samples, seed, Some(&sol))?;
        if rep.estimate > sol.radius * (1.0 + SOUND_REL) + SOUND_ABS {
            warnings.push(format!(
                "oracle estimate {:.9e} exceeds the certified radius {:.9e}; the result is suspect",
                rep.estimate, sol.radius
            ));
        } else if rep.estimate < sol.radius * 0.95 {
            warnings.push(format!(
                "oracle estimate {:.9e} is more than 5% below the certified radius {:.9e}; \
                 sampling may be loose for this geometry",
                rep.estimate, sol.radius
            ));
        }
        if sol.certificate.is_some() {
            let check = oracle::check_center_certificate(&p, &g, &sol)?;
            if !check.passed {
                warnings.push(format!(
                    "certificate check failed: kernel {:.3e}, saturation {:.3e}, \
                     psd margin {:.3e}, stationarity {:.3e}, radius gap {:.3e}",
                    check.kernel_residual,
                    check.saturation_residual,
                    check.psd_margin,
                    check.stationarity_residual,
                    check.radius_gap
                ));
            }
        }
        Some(rep)
    } else {
        None
    };
    println!(
        "{}",
        report::local_report(&p, &sol, oracle, warnings).to_json()
    );
    Ok(0)
}

fn cmd_global(
    input: &Path,
    tau: Option<f64>,
    tol: f64,
    verify: bool,
    oracle_samples: usize,
    seed: u64,
) -> Result<i32> {
    let (p, g) = load_instance(input)?;
    let sol = global::solve_global(&p, &g, tau, tol)?;
    let optimal_tau = tau.is_none();
    let mut warnings = Vec::new();
    if optimal_tau && !g.orthonormal {
        warnings.push(
            "observation rows are not orthonormal: the reported value is a valid lower bound \
             on every recovery map, but the returned map is only guaranteed optimal for \
             orthonormal rows"
                .to_string(),
        );
    }
    let oracle = if verify {
        let rep = oracle::sample_gwce(&p, &g, &sol.map, oracle_samples, seed)?;
        if rep.estimate > sol.lb * (1.0 + SOUND_REL) + SOUND_ABS {
            warnings.push(format!(
                "oracle estimate {:.9e} exceeds the certified value {:.9e}; the result is suspect",
                rep.estimate, sol.lb
            ));
        } else if rep.estimate < sol.lb * 0.95 && optimal_tau && g.orthonormal {
            warnings.push(format!(
                "oracle estimate {:.9e} is more than 5% below the certified value {:.9e}; \
                 sampling may be loose for this geometry",
                rep.estimate, sol.lb
            ));
        }
        Some(rep)
    } else {
        None
    };
    println!(
        "{}",
        report::global_report(&p, &sol, optimal_tau, oracle, warnings).to_json()
    );
    Ok(0)
}

struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn cmd_verify(input: &Path, report_path: &Path, oracle_samples: usize, seed: u64) -> Result<i32> {
    let (p, g) = load_instance(input)?;
    let parsed = report::parse_report(&read_file(report_path)?)?;
    let mut checks: Vec<Check> = Vec::new();

    let digest = report::instance_digest(&p);
    checks.push(Check {
        name: "digest",
        passed: digest == parsed.instance_digest,
        detail: if digest == parsed.instance_digest {
            format!("instance digest {digest} matches")
        } else {
            format!(
                "report was made for {}, instance is {digest}",
                parsed.instance_digest
            )
        },
    });

    if checks[0].passed {
        if let (Some(center), Some(radius)) = (&parsed.center, parsed.radius) {
            verify_local(
                &p,
                &g,
                &parsed,
                center,
                radius,
                oracle_samples,
                seed,
                &mut checks,
            )?;
        } else if let (Some(map), Some(lb)) = (&parsed.map, parsed.lb) {
            let rep = oracle::sample_gwce(&p, &g, map, oracle_samples, seed)?;
            let sound = rep.estimate <= lb * (1.0 + SOUND_REL) + SOUND_ABS;
            checks.push(Check {
                name: "oracle_soundness",
                passed: sound,
                detail: format!("sampled {:.9e} vs certified {:.9e}", rep.estimate, lb),
            });
        } else {
            return Err(Error::Parse(
                "report carries neither a local payload (center, radius) nor a global one \
                 (map, lb)"
                    .into(),
            ));
        }
    }

    let mut failures = 0;
    for c in &checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        println!("{}: {} ({})", c.name, status, c.detail);
        if !c.passed {
            failures += 1;
        }
    }
    Ok(if failures == 0 { 0 } else { 1 })
}

#[allow(clippy::too_many_arguments)]
fn verify_local(
    p: &ProblemInstance,
    g: &model::Geometry,
    parsed: &ParsedReport,
    center: &[f64],
    radius: f64,
    oracle_samples: usize,
    seed: u64,
    checks: &mut Vec<Check>,
) -> Result<()> {
    let model_misfit = crate::linalg::norm(&g.p.matvec(center));
    let data_misfit = {
        let mut r = p.lambda.matvec(center);
        for (ri, yi) in r.iter_mut().zip(&p.y) {
            *ri -= yi;
        }
        crate::linalg::norm(&r)
    };
    let consistent = model_misfit <= p.epsilon + 1e-8 && data_misfit <= p.eta + 1e-8;
    checks.push(Check {
        name: "center_consistency",
        passed: consistent,
        detail: format!(
            "model misfit {:.9e} (budget {:.3e}), data misfit {:.9e} (budget {:.3e})",
            model_misfit, p.epsilon, data_misfit, p.eta
        ),
    });

    let route: LocalRoute = parsed.route.parse()?;
    let rebuilt = LocalSolution {
        route,
        tau_sharp: parsed.tau,
        lambda_sharp: None,
        center: center.to_vec(),
        radius,
        certificate: parsed.certificate.clone(),
    };
    if rebuilt.certificate.is_some() {
        let check = oracle::check_center_certificate(p, g, &rebuilt)?;
        checks.push(Check {
            name: "certificate",
            passed: check.passed,
            detail: format!(
                "kernel {:.3e}, saturation {:.3e}, psd margin {:.3e}, \
                 stationarity {:.3e}, radius gap {:.3e}",
                check.kernel_residual,
                check.saturation_residual,
                check.psd_margin,
                check.stationarity_residual,
                check.radius_gap
            ),
        });
    }

    let rep = oracle::sample_radius(p, g, center, oracle_samples, seed, Some(&rebuilt))?;
    let sound = rep.estimate <= radius * (1.0 + SOUND_REL) + SOUND_ABS;
    checks.push(Check {
        name: "oracle_soundness",
        passed: sound,
        detail: format!("sampled {:.9e} vs certified {:.9e}", rep.estimate, radius),
    });
    Ok(())
}
