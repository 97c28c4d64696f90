//! Command-line driver: exact point counts, divisor-sum sweeps, the
//! predicted constant, and the verification suites, all emitted as
//! deterministic CSV (fixed seed and worker count reproduce every output
//! file byte for byte; timing goes to stderr).

mod config;
mod output;
mod runner;

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_traits::ToPrimitive;

use dp4::divsum::{predicted_leading, restricted_sum, scale_from_integer};
use dp4::lattice::{rho, rho0_closed_form, DivisorTuple, Lattice2, LinearFormSystem};
use dp4::peyre::{
    peyre_constant, tau_inf_mc_chunk, tau_infinity_from_chunks, verify_local_identity, McChunk,
    TauInfMethod,
};
use dp4::surface::{
    count_conic_bundle, count_direct, count_structured, f_theta, f_theta_quadrature, fiber_count,
    fiber_count_with, symmetric_fiber_indices, ConicFiber,
};

use config::{builtin_dp4, load_config, Setup};
use output::CsvWriter;
use runner::{effective_workers, map_chunked, sample_shares, sum_strided};

/// Height cap for the direct counter; beyond this the conic-bundle path is
/// the intended production route.
const DIRECT_CAP: u64 = 10_000;

#[derive(Parser)]
#[command(
    name = "dp4",
    version,
    about = "rational point counts and divisor-sum experiments for a split \
             quartic del Pezzo surface with two A1 singularities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count rational points of height at most B off the lines.
    Count(CountArgs),
    /// Sweep heights and compare N(B)/(B (ln B)^5) with the predicted constant.
    Convergence(ConvergenceArgs),
    /// Evaluate restricted divisor sums S(X; V) against their prediction.
    DivisorSum(DivisorSumArgs),
    /// Assemble the predicted leading constant and its factors.
    Constant(ConstantArgs),
    /// Run a verification suite; exits 1 if any check fails.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct CountArgs {
    /// Height bound.
    #[arg(long = "B")]
    bound: u64,
    #[arg(long, value_enum, default_value = "conic")]
    method: CountMethod,
    /// For the conic method: fold the fourfold (a,b) symmetry.
    #[arg(long, default_value = "true", action = clap::ArgAction::Set)]
    symmetry: bool,
    #[arg(long, default_value = "1")]
    workers: usize,
    /// Output CSV path; stdout if omitted or "-".
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum CountMethod {
    Direct,
    Conic,
    Structured,
}

#[derive(Args)]
struct ConvergenceArgs {
    /// Comma-separated ascending heights (an empty list prints only the header).
    #[arg(long, value_delimiter = ',')]
    heights: Vec<u64>,
    #[arg(long, default_value = "10000")]
    prime_bound: u64,
    #[arg(long, default_value = "1")]
    workers: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DivisorSumArgs {
    /// Problem configuration file (TOML).
    #[arg(long, conflicts_with = "builtin")]
    config: Option<PathBuf>,
    /// Built-in setup name (only "dp4").
    #[arg(long)]
    builtin: Option<String>,
    /// Comma-separated scales X.
    #[arg(long = "X", value_delimiter = ',')]
    x_values: Vec<i64>,
    #[arg(long, default_value = "1000")]
    prime_bound: u64,
    #[arg(long, default_value = "60")]
    truncation: u32,
    /// Monte Carlo samples for non-box polytope volumes.
    #[arg(long, default_value = "1000000")]
    samples: u64,
    #[arg(long, default_value = "0")]
    seed: u64,
    #[arg(long, default_value = "1")]
    workers: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConstantArgs {
    #[arg(long, default_value = "10000")]
    prime_bound: u64,
    #[arg(long, value_enum, default_value = "closed-form")]
    tau_inf_method: TauInfMethodArg,
    #[arg(long, default_value = "10000000")]
    samples: u64,
    #[arg(long, default_value = "0")]
    seed: u64,
    #[arg(long, default_value = "1")]
    workers: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, ValueEnum)]
enum TauInfMethodArg {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    suite: Suite,
    #[arg(long, default_value = "60")]
    truncation: u32,
    #[arg(long, default_value = "1e-9")]
    tolerance: f64,
    #[arg(long, default_value = "10000000")]
    samples: u64,
    #[arg(long, default_value = "0")]
    seed: u64,
    #[arg(long, default_value = "1")]
    workers: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, ValueEnum)]
enum Suite {
    /// Closed-form lattice index vs the residue-counting oracle.
    Rho,
    /// Local identity (1-1/p)^5 (1+1/p) sigma_p = tau_p for p <= 100.
    Local,
    /// Five-dimensional polytope volume 4/45 and its lower slice 1/160.
    Polytope,
    /// Counter cross-validation and fiber symmetries.
    Fibers,
    /// Fiber-volume function f(theta): closed form vs quadrature.
    FiniteF,
}

fn main() -> std::process::ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let outcome = match cli.command {
        Command::Count(a) => cmd_count(a),
        Command::Convergence(a) => cmd_convergence(a),
        Command::DivisorSum(a) => cmd_divisor_sum(a),
        Command::Constant(a) => cmd_constant(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match outcome {
        Ok(true) => {
            eprintln!("done in {:.3}s", started.elapsed().as_secs_f64());
            std::process::ExitCode::SUCCESS
        }
        Ok(false) => {
            eprintln!(
                "verification FAILED after {:.3}s",
                started.elapsed().as_secs_f64()
            );
            std::process::ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::ExitCode::from(2)
        }
    }
}

/// Conic-bundle count with the fiber set partitioned across workers;
/// per-fiber counts are exact integers summed in index order, so the
/// result does not depend on the worker count.
fn parallel_conic_count(bound: u64, symmetry: bool, workers: usize) -> u64 {
    let table = dp4::arith::SpfTable::new(bound.max(3));
    if symmetry {
        let fibers = symmetric_fiber_indices(bound);
        let total = sum_strided(workers, &fibers, |&(a, b)| {
            fiber_count_with(&ConicFiber::new(a, b).expect("coprime"), bound, Some(&table))
        });
        return 4 * total;
    }
    if workers <= 1 {
        return count_conic_bundle(bound, false);
    }
    // expand the orbit plus the (degenerate) diagonal pair
    let mut all: Vec<(i64, i64)> = Vec::new();
    for &(a, b) in &symmetric_fiber_indices(bound) {
        all.extend_from_slice(&[(a, b), (a, -b), (b, a), (b, -a)]);
    }
    if bound >= 1 {
        all.push((1, 1));
        all.push((1, -1));
    }
    sum_strided(workers, &all, |&(a, b)| {
        fiber_count_with(&ConicFiber::new(a, b).expect("coprime"), bound, Some(&table))
    })
}

fn cmd_count(a: CountArgs) -> Result<bool> {
    if a.bound == 0 {
        bail!("--B must be at least 1");
    }
    let method = match a.method {
        CountMethod::Direct => "direct",
        CountMethod::Conic => "conic",
        CountMethod::Structured => "structured",
    };
    if a.method == CountMethod::Direct && a.bound > DIRECT_CAP {
        bail!(
            "direct method is capped at B <= {DIRECT_CAP}; use --method conic for larger heights"
        );
    }
    let t0 = Instant::now();
    let count = match a.method {
        CountMethod::Direct => count_direct(a.bound),
        CountMethod::Conic => parallel_conic_count(a.bound, a.symmetry, a.workers),
        CountMethod::Structured => count_structured(a.bound),
    };
    eprintln!(
        "count B={} method={} -> {} in {:.3}s",
        a.bound,
        method,
        count,
        t0.elapsed().as_secs_f64()
    );
    let mut w = CsvWriter::open(&a.out)?;
    w.header(&["B", "count", "method", "symmetry", "workers"])?;
    w.row(&[
        a.bound.into(),
        count.into(),
        method.into(),
        if a.symmetry { "on" } else { "off" }.into(),
        (effective_workers(a.workers) as u64).into(),
    ])?;
    w.finish()?;
    Ok(true)
}

fn cmd_convergence(a: ConvergenceArgs) -> Result<bool> {
    for pair in a.heights.windows(2) {
        if pair[1] == pair[0] {
            bail!("duplicate height {}", pair[0]);
        }
        if pair[1] < pair[0] {
            bail!("heights must be ascending");
        }
    }
    let constant = peyre_constant(a.prime_bound, TauInfMethod::ClosedForm, 0, 0)?;
    let mut w = CsvWriter::open(&a.out)?;
    w.header(&[
        "B",
        "N_U",
        "B_log5_ratio",
        "predicted_cS",
        "ratio_to_predicted",
        "workers",
    ])?;
    for &b in &a.heights {
        if b < 2 {
            bail!("convergence heights must be at least 2 (ln B must be positive)");
        }
        let t0 = Instant::now();
        let n = parallel_conic_count(b, true, a.workers);
        eprintln!("N({b}) = {n} in {:.3}s", t0.elapsed().as_secs_f64());
        let ratio = n as f64 / (b as f64 * (b as f64).ln().powi(5));
        w.row(&[
            b.into(),
            n.into(),
            ratio.into(),
            constant.value.into(),
            (ratio / constant.value).into(),
            (effective_workers(a.workers) as u64).into(),
        ])?;
    }
    w.finish()?;
    Ok(true)
}

fn load_setup(config: &Option<PathBuf>, builtin: &Option<String>) -> Result<Setup> {
    match (config, builtin) {
        (Some(path), None) => load_config(path),
        (None, Some(name)) if name == "dp4" => Ok(builtin_dp4()),
        (None, Some(other)) => bail!("unknown builtin {other:?} (available: dp4)"),
        (None, None) => bail!("provide --config <path> or --builtin dp4"),
        _ => unreachable!("clap conflicts_with"),
    }
}

/// Restricted sum with the row range of the scaled region partitioned
/// across workers; disjoint bands add exactly, so the result is identical
/// for every worker count.
fn parallel_restricted_sum(
    setup: &Setup,
    x: i64,
    workers: usize,
) -> Result<dp4::divsum::RestrictedSum> {
    let scale = scale_from_integer(x);
    let workers = effective_workers(workers);
    if workers <= 1 {
        return Ok(restricted_sum(
            &scale,
            &setup.lattice,
            &setup.system,
            &setup.region,
            &setup.polytope,
        )?);
    }
    let (lo, hi) = dp4::divsum::scaled_row_range(&setup.region, &scale);
    let span = (hi - lo + 1).max(1);
    let band = (span as u64).div_ceil(workers as u64) as i64;
    let bands: Vec<(i64, i64)> = (0..workers as i64)
        .map(|i| (lo + i * band, (lo + (i + 1) * band - 1).min(hi)))
        .filter(|(a, b)| a <= b)
        .collect();
    let parts = map_chunked(workers, &bands, |&(rlo, rhi)| {
        dp4::divsum::restricted_sum_rows(
            &scale,
            &setup.lattice,
            &setup.system,
            &setup.region,
            &setup.polytope,
            rlo,
            rhi,
        )
    });
    let mut total = dp4::divsum::RestrictedSum {
        value: 0,
        points: 0,
        boundary_ties: 0,
    };
    for p in parts {
        let p = p?;
        total.value += p.value;
        total.points += p.points;
        total.boundary_ties += p.boundary_ties;
    }
    Ok(total)
}

fn cmd_divisor_sum(a: DivisorSumArgs) -> Result<bool> {
    let setup = load_setup(&a.config, &a.builtin)?;
    if a.x_values.is_empty() {
        bail!("--X needs at least one scale");
    }
    let prediction = predicted_leading(
        &setup.lattice,
        &setup.system,
        &setup.region,
        &setup.polytope,
        a.prime_bound,
        a.truncation,
        a.samples,
        a.seed,
    )?;
    eprintln!(
        "predicted leading constant {} (vol R = {}, vol V = {} +- {}, Euler tails <= {:.2e})",
        prediction.value,
        prediction.region_volume,
        prediction.polytope_volume.value,
        prediction.polytope_volume.std_error,
        prediction.euler_product.truncation_tail + prediction.euler_product.product_tail_bound,
    );
    let mut w = CsvWriter::open(&a.out)?;
    w.header(&[
        "X",
        "S",
        "S_over_X2log4X",
        "predicted",
        "ratio",
        "boundary_ties",
        "seed",
        "workers",
    ])?;
    for &x in &a.x_values {
        if x < 1 {
            bail!("scales must be positive integers");
        }
        let t0 = Instant::now();
        let s = parallel_restricted_sum(&setup, x, a.workers)?;
        eprintln!(
            "S({x}) = {} over {} points in {:.3}s",
            s.value,
            s.points,
            t0.elapsed().as_secs_f64()
        );
        let xf = x as f64;
        let normalized = s.value as f64 / (xf * xf * xf.ln().powi(4));
        w.row(&[
            (x as u64).into(),
            s.value.into(),
            normalized.into(),
            prediction.value.into(),
            (normalized / prediction.value).into(),
            s.boundary_ties.into(),
            a.seed.into(),
            (effective_workers(a.workers) as u64).into(),
        ])?;
    }
    w.finish()?;
    Ok(true)
}

fn cmd_constant(a: ConstantArgs) -> Result<bool> {
    let method = match a.tau_inf_method {
        TauInfMethodArg::ClosedForm => TauInfMethod::ClosedForm,
        TauInfMethodArg::Quadrature => TauInfMethod::Quadrature,
        TauInfMethodArg::MonteCarlo => TauInfMethod::MonteCarlo,
    };
    let workers = effective_workers(a.workers);
    let constant = if matches!(method, TauInfMethod::MonteCarlo) {
        // per-worker substreams, deterministic for fixed (seed, workers)
        let shares = sample_shares(a.samples, workers);
        let jobs: Vec<(u64, u64)> = shares
            .iter()
            .enumerate()
            .map(|(i, &s)| (i as u64, s))
            .collect();
        let chunks: Vec<McChunk> = map_chunked(workers, &jobs, |&(stream, n)| {
            tau_inf_mc_chunk(n, a.seed, stream)
        });
        let tinf = tau_infinity_from_chunks(&chunks);
        let mut c = peyre_constant(a.prime_bound, TauInfMethod::ClosedForm, 0, 0)?;
        let alpha_f = c.alpha.to_f64().expect("alpha is finite");
        c.value = alpha_f * tinf.value * c.euler_product;
        c.value_std_error = alpha_f * tinf.std_error * c.euler_product;
        c.tau_infinity = tinf;
        c
    } else {
        peyre_constant(a.prime_bound, method, a.samples, a.seed)?
    };
    let method_name = match method {
        TauInfMethod::ClosedForm => "closed_form",
        TauInfMethod::Quadrature => "quadrature",
        TauInfMethod::MonteCarlo => "monte_carlo",
    };
    let mut w = CsvWriter::open(&a.out)?;
    w.header(&[
        "alpha",
        "tau_infinity",
        "tau_inf_std_error",
        "tau_inf_method",
        "tau_inf_samples",
        "prime_bound",
        "euler_product",
        "product_tail_bound",
        "c_S",
        "c_S_std_error",
        "seed",
        "workers",
    ])?;
    w.row(&[
        constant.alpha.to_string().into(),
        constant.tau_infinity.value.into(),
        constant.tau_infinity.std_error.into(),
        method_name.into(),
        constant.tau_infinity.samples.into(),
        a.prime_bound.into(),
        constant.euler_product.into(),
        constant.product_tail_bound.into(),
        constant.value.into(),
        constant.value_std_error.into(),
        a.seed.into(),
        (workers as u64).into(),
    ])?;
    w.finish()?;
    Ok(true)
}

fn cmd_verify(a: VerifyArgs) -> Result<bool> {
    match a.suite {
        Suite::Rho => verify_rho(&a),
        Suite::Local => verify_local(&a),
        Suite::Polytope => verify_polytope(&a),
        Suite::Fibers => verify_fibers(&a),
        Suite::FiniteF => verify_finite_f(&a),
    }
}

/// Closed form vs residue-count oracle: p in {2,3,5,7}, all e_i <= 3.
fn verify_rho(a: &VerifyArgs) -> Result<bool> {
    let lat = Lattice2::standard();
    let sys = LinearFormSystem::standard();
    let mut w = CsvWriter::open(&a.out)?;
    w.header(&["p", "tuples", "mismatches", "pass"])?;
    let mut all_ok = true;
    for p in [2u64, 3, 5, 7] {
        let mut mismatches = 0u64;
        let mut tuples = 0u64;
        for e1 in 0..=3u32 {
            for e2 in 0..=3u32 {
                for e3 in 0..=3u32 {
                    for e4 in 0..=3u32 {
                        let e = [e1, e2, e3, e4];
                        let d = DivisorTuple(e.map(|x| p.pow(x)));
                        let oracle = rho(&lat, &sys, d)?;
                        let closed = rho0_closed_form(p, e)?;
                        tuples += 1;
                        if BigUint::from(oracle) != closed {
                            mismatches += 1;
                        }
                    }
                }
            }
        }
        let ok = mismatches == 0;
        all_ok &= ok;
        w.row(&[
            p.into(),
            tuples.into(),
            mismatches.into(),
            if ok { "pass" } else { "fail" }.into(),
        ])?;
    }
    w.finish()?;
    Ok(all_ok)
}

/// `(1 - 1/p)^5 (1 + 1/p) sigma_p = tau_p` for every prime up to 100.
fn verify_local(a: &VerifyArgs) -> Result<bool> {
    let primes = dp4::arith::primes_up_to(100);
    let reports = map_chunked(a.workers, &primes, |&p| {
        verify_local_identity(p, a.truncation, a.tolerance).expect("prime input")
    });
    let mut w = CsvWriter::open(&a.out)?;
    w.header(&["p", "sigma_p", "lhs", "tau_p", "abs_error", "pass"])?;
    let mut all_ok = true;
    for r in &reports {
        all_ok &= r.pass;
        w.row(&[
            r.p.into(),
            r.sigma_p.to_string().into(),
            r.lhs.into(),
            r.tau_p.to_string().into(),
            r.abs_error.into(),
            if r.pass { "pass" } else { "fail" }.into(),
        ])?;
    }
    w.finish()?;
    Ok(all_ok)
}

/// Monte Carlo volume of the five-dimensional polytope against 4/45, and
/// of its `u <= 1/2` part against 1/160, both within three standard errors.
fn verify_polytope(a: &VerifyArgs) -> Result<bool> {
    let workers = effective_workers(a.workers);
    let shares = sample_shares(a.samples, workers);
    let jobs: Vec<(u64, u64)> = shares
        .iter()
        .enumerate()
        .map(|(i, &s)| (i as u64, s))
        .collect();
    let counts = map_chunked(workers, &jobs, |&(stream, n)| {
        dp4::peyre::vpp_hits(n, a.seed, stream)
    });
    let hits: u64 = counts.iter().map(|c| c.0).sum();
    let lower: u64 = counts.iter().map(|c| c.1).sum();
    let total = dp4::divsum::estimate_from_hits(hits, a.samples);
    let slice = dp4::divsum::estimate_from_hits(lower, a.samples);
    let target = 4.0 / 45.0;
    let slice_target = 1.0 / 160.0;
    let ok_total = (total.value - target).abs() <= 3.0 * total.std_error;
    let ok_slice = (slice.value - slice_target).abs() <= 3.0 * slice.std_error;
    let mut w = CsvWriter::open(&a.out)?;
    w.header(&[
        "check",
        "estimate",
        "std_error",
        "target",
        "pass",
        "seed",
        "workers",
    ])?;
    w.row(&[
        "volume".into(),
        total.value.into(),
        total.std_error.into(),
        target.into(),
        if ok_total { "pass" } else { "fail" }.into(),
        a.seed.into(),
        (workers as u64).into(),
    ])?;
    w.row(&[
        "lower_slice".into(),
        slice.value.into(),
        slice.std_error.into(),
        slice_target.into(),
        if ok_slice { "pass" } else { "fail" }.into(),
        a.seed.into(),
        (workers as u64).into(),
    ])?;
    w.finish()?;
    Ok(ok_total && ok_slice)
}

/// Exact agreement of the three counters on a height sweep, plus the
/// orbit symmetry of fiber counts.
fn verify_fibers(a: &VerifyArgs) -> Result<bool> {
    let mut w = CsvWriter::open(&a.out)?;
    w.header(&["check", "detail", "pass"])?;
    let mut all_ok = true;

    let sweep_top = 200u64;
    let direct_heights: Vec<u64> = dp4::surface::direct_points(sweep_top)
        .iter()
        .map(|p| p.height())
        .collect();
    let mut ok = true;
    for b in 1..=sweep_top {
        let d = direct_heights.iter().filter(|&&h| h <= b).count() as u64;
        let c = count_conic_bundle(b, true);
        let s = count_structured(b);
        if d != c || c != s {
            ok = false;
            break;
        }
    }
    all_ok &= ok;
    w.row(&[
        "counters_agree".into(),
        format!("B = 1..{sweep_top}").into(),
        if ok { "pass" } else { "fail" }.into(),
    ])?;

    let mut ok = true;
    'orbit: for b in 2..=12i64 {
        for aa in 1..b {
            if dp4::arith::gcd_i64(aa, b) != 1 {
                continue;
            }
            let base = fiber_count(&ConicFiber::new(aa, b).unwrap(), 150);
            for (a2, b2) in [(aa, -b), (b, aa), (b, -aa)] {
                if fiber_count(&ConicFiber::new(a2, b2).unwrap(), 150) != base {
                    ok = false;
                    break 'orbit;
                }
            }
        }
    }
    all_ok &= ok;
    w.row(&[
        "orbit_symmetry".into(),
        "fourfold (a b) orbit at B = 150".into(),
        if ok { "pass" } else { "fail" }.into(),
    ])?;

    let sym = parallel_conic_count(500, true, a.workers);
    let nosym = count_conic_bundle(500, false);
    let ok = sym == nosym;
    all_ok &= ok;
    w.row(&[
        "symmetry_on_off".into(),
        format!("B = 500: {sym} = {nosym}").into(),
        if ok { "pass" } else { "fail" }.into(),
    ])?;
    w.finish()?;
    Ok(all_ok)
}

/// f(theta) closed form vs quadrature within 1e-6 on the standard grid.
fn verify_finite_f(a: &VerifyArgs) -> Result<bool> {
    let mut w = CsvWriter::open(&a.out)?;
    w.header(&["theta", "closed_form", "quadrature", "abs_error", "pass"])?;
    let mut all_ok = true;
    for theta in [1.1f64, 1.5, 2.0, 5.0, 10.0, 100.0] {
        let closed = f_theta(theta)?;
        let quad = f_theta_quadrature(theta, 20_000)?;
        let err = (closed - quad).abs();
        let ok = err < 1e-6;
        all_ok &= ok;
        w.row(&[
            theta.into(),
            closed.into(),
            quad.into(),
            err.into(),
            if ok { "pass" } else { "fail" }.into(),
        ])?;
    }
    w.finish()?;
    Ok(all_ok)
}
