#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use explap::analysis::interpolation_suite;
use explap::descriptor::{parse_domain, parse_germ, GridSpec};
use explap::fixtures;
use explap::geometry::{tilde_boundary_deviation, appendix_inclusion_margin, mu_from_domain, tilde_boundary};
use explap::report::{Report, ReportRow};
use explap::sums::{self, DippState, ExpSumJump, SegmentLoop};
use explap::transform::{self, ClosedFormImage};
use explap::{DomainProfile, ExpSum, InverseConfig, LaplaceConfig, DEFAULT_SEED};

mod plot;

use plot::Series;

#[derive(Parser)]
#[command(name = "explap", version, about = "Laplace transforms at -infinity, inversion and exponential partial sums")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Quadrature tolerance.
    #[arg(long, global = true, env = "EXPLAP_TOL", default_value_t = 1e-10)]
    tol: f64,
    /// CSV destination; without it the table goes to stdout and the summary to stderr.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// SVG destination.
    #[arg(long, global = true)]
    plot: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args)]
struct Inputs {
    /// Germ descriptor: inline JSON or a path.
    #[arg(long)]
    germ: String,
    /// Domain descriptor: inline JSON or a path.
    #[arg(long)]
    domain: String,
}

#[derive(Subcommand)]
enum Command {
    /// Forward transform on a grid of p, checked against the closed form.
    Transform {
        #[command(flatten)]
        inputs: Inputs,
        /// Points p, e.g. `re=-2..2:5,im=1`.
        #[arg(long)]
        grid: GridSpec,
        #[arg(long, default_value_t = 1e-8)]
        max_rel: f64,
    },
    /// Inverse transform of the closed-form image on a grid of w.
    Invert {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        grid: GridSpec,
        #[arg(long, default_value_t = 1e-6)]
        max_err: f64,
    },
    /// Numerical transform followed by numerical inversion.
    Roundtrip {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        grid: GridSpec,
        #[arg(long, default_value_t = 1e-6)]
        max_err: f64,
    },
    /// Loop integral around a window of exponents.
    PartialSum {
        #[command(flatten)]
        inputs: Inputs,
        /// Window `b1..b2`.
        #[arg(long)]
        window: String,
        /// Distance kept between the loop and the support.
        #[arg(long, default_value_t = 0.2)]
        gap: f64,
        #[arg(long)]
        grid: GridSpec,
        #[arg(long, default_value_t = 1e-6)]
        max_err: f64,
    },
    /// Recovers the coefficients at the given exponents.
    Coeffs {
        #[command(flatten)]
        inputs: Inputs,
        /// Comma-separated exponents.
        #[arg(long, value_delimiter = ',', required = true)]
        betas: Vec<f64>,
        #[arg(long, default_value_t = 0.5)]
        radius: f64,
        /// Probe points; defaults to three real points two units inside the domain.
        #[arg(long)]
        probes: Option<GridSpec>,
        #[arg(long, default_value_t = 1e-6)]
        max_err: f64,
    },
    /// Diagonal integration by parts and its evanescent partial sums.
    Resummate {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        grid: GridSpec,
        #[arg(long, value_enum, default_value_t = Method::Evanescent)]
        method: Method,
        /// Largest evanescent index.
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 1e-5)]
        max_err: f64,
    },
    /// Randomized inequality suites.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Multiplies the right-hand side of the checked inequality.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
    },
    /// Growth function and inscribed cones of a domain.
    Domain {
        /// Domain whose growth function is evaluated.
        #[arg(long)]
        mu_of: String,
        #[arg(long, default_value_t = 0.5)]
        theta: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Evanescent,
    Dipp,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Interpolation,
    ForwardBound,
    Neighborhood,
    Calibration,
}

enum Outcome {
    Pass(String),
    Fail { summary: String, failing: usize },
}

struct Output {
    csv: Vec<u8>,
    svg: Option<String>,
    outcome: Outcome,
}

fn load_json(arg: &str) -> anyhow::Result<String> {
    if arg.trim_start().starts_with('{') {
        return Ok(arg.to_string());
    }
    std::fs::read_to_string(arg).with_context(|| format!("reading {arg}"))
}

fn load_germ(arg: &str) -> anyhow::Result<ExpSum> {
    Ok(parse_germ(&load_json(arg)?)?)
}

fn load_domain(arg: &str) -> anyhow::Result<DomainProfile> {
    Ok(parse_domain(&load_json(arg)?)?)
}

fn write_csv<T: Serialize>(rows: &[T]) -> anyhow::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(w.into_inner()?)
}

fn verdict(name: &str, errors: impl Iterator<Item = f64>, limit: f64) -> Outcome {
    let errs: Vec<f64> = errors.collect();
    let failing = errs.iter().filter(|e| !(**e <= limit)).count();
    let max = errs.iter().copied().fold(0.0, f64::max);
    let summary = format!("{name}: {} rows, max error {max:.3e}, limit {limit:.1e}", errs.len());
    if failing == 0 {
        Outcome::Pass(summary)
    } else {
        Outcome::Fail { summary, failing }
    }
}

fn report_outcome(name: &str, rep: &Report) -> Outcome {
    let summary = format!("{name}: {} rows, max ratio {:.6}", rep.rows.len(), rep.max_ratio());
    match rep.failures() {
        0 => Outcome::Pass(summary),
        failing => Outcome::Fail { summary, failing },
    }
}

fn error_chart(title: &str, xs: impl Iterator<Item = f64>, errs: &[f64], xlabel: &str) -> String {
    let points = xs.zip(errs.iter().copied()).collect();
    plot::line_chart(title, xlabel, "error", &[Series { label: "error".into(), points }], true)
}

#[derive(Serialize)]
struct PointRow {
    re: f64,
    im: f64,
    value_re: f64,
    value_im: f64,
    exact_re: f64,
    exact_im: f64,
    error: f64,
}

impl PointRow {
    fn new(z: Complex64, value: Complex64, exact: Complex64, error: f64) -> Self {
        PointRow { re: z.re, im: z.im, value_re: value.re, value_im: value.im, exact_re: exact.re, exact_im: exact.im, error }
    }
}

fn inverse_config(h: &DomainProfile, tol: f64) -> anyhow::Result<InverseConfig> {
    Ok(InverseConfig::for_slope(h.slope().unwrap_or(1.0).max(0.5), tol.max(1e-12) * 10.0)?)
}

fn run_transform(c: &Common, inputs: &Inputs, grid: &GridSpec, max_rel: f64) -> anyhow::Result<Output> {
    let g = load_germ(&inputs.germ)?;
    let h = load_domain(&inputs.domain)?;
    let cfg = LaplaceConfig::at_vertex(h, c.tol)?;
    let w0 = Complex64::new(cfg.w0, 0.0);
    let rows = grid
        .points()
        .into_iter()
        .map(|p| {
            let value = transform::laplace(&g, &cfg, p)?.value;
            let exact = g.laplace_closed_form(w0, p)?;
            let rel = (value - exact).norm() / g.laplace_scale(w0, p).max(f64::MIN_POSITIVE);
            Ok(PointRow::new(p, value, exact, rel))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let errs: Vec<f64> = rows.iter().map(|r| r.error).collect();
    let svg = error_chart("forward transform", (0..errs.len()).map(|i| i as f64), &errs, "point").into();
    Ok(Output { csv: write_csv(&rows)?, svg, outcome: verdict("transform", errs.into_iter(), max_rel) })
}

fn run_invert(c: &Common, inputs: &Inputs, grid: &GridSpec, max_err: f64) -> anyhow::Result<Output> {
    let g = load_germ(&inputs.germ)?;
    let h = load_domain(&inputs.domain)?;
    let icfg = inverse_config(&h, c.tol)?;
    let w0 = h.sup_real().context("domain has no rightmost real point")?;
    let shifted = h.shifted(-1.0);
    let image = ClosedFormImage { g: g.clone(), w0 };
    let rows = grid
        .points()
        .into_iter()
        .map(|w| {
            if !shifted.contains(w) {
                bail!("w = {w} is not in -1 + H");
            }
            let (angle, _) = transform::best_angle(&image, icfg.eps, w, icfg.v_angle)?;
            let value = transform::inverse_laplace(&image, &InverseConfig { v_angle: angle, ..icfg }, w)?.value;
            let exact = g.eval(w);
            Ok(PointRow::new(w, value, exact, (value - exact).norm()))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let errs: Vec<f64> = rows.iter().map(|r| r.error).collect();
    let svg = error_chart("inverse transform", rows.iter().map(|r| r.re), &errs, "Re w").into();
    Ok(Output { csv: write_csv(&rows)?, svg, outcome: verdict("invert", errs.into_iter(), max_err) })
}

fn run_roundtrip(c: &Common, inputs: &Inputs, grid: &GridSpec, max_err: f64) -> anyhow::Result<Output> {
    let g = load_germ(&inputs.germ)?;
    let h = load_domain(&inputs.domain)?;
    let icfg = inverse_config(&h, c.tol)?;
    let cfg = LaplaceConfig::at_vertex(h, c.tol.min(1e-12))?;
    let rep = transform::roundtrip(&g, &cfg, &icfg, &grid.points())?;
    let rows: Vec<PointRow> = rep.points.iter().map(|p| PointRow::new(p.w, p.value, p.exact, p.error)).collect();
    let errs: Vec<f64> = rows.iter().map(|r| r.error).collect();
    let svg = error_chart("roundtrip", rows.iter().map(|r| r.re), &errs, "Re w").into();
    Ok(Output { csv: write_csv(&rows)?, svg, outcome: verdict("roundtrip", errs.into_iter(), max_err) })
}

fn parse_window(s: &str) -> anyhow::Result<(f64, f64)> {
    let (a, b) = s.split_once("..").context("window must look like b1..b2")?;
    let (a, b) = (a.trim().parse::<f64>()?, b.trim().parse::<f64>()?);
    if !(a < b) {
        bail!("window {s} is empty");
    }
    Ok((a, b))
}

fn run_partial_sum(c: &Common, inputs: &Inputs, window: &str, gap: f64, grid: &GridSpec, max_err: f64) -> anyhow::Result<Output> {
    let g = load_germ(&inputs.germ)?;
    let h = load_domain(&inputs.domain)?;
    let (b1, b2) = parse_window(window)?;
    let cfg = LaplaceConfig::at_vertex(h, c.tol)?;
    let lp = SegmentLoop::with_gap(b1, b2, gap)?;
    let points = grid.points();
    let sums = sums::partial_sums(&g, &lp, &cfg, &points)?;
    let inside = ExpSum::from_pairs(g.terms().iter().filter(|t| t.beta > b1 && t.beta < b2).map(|t| (t.beta, t.coeff)))?;
    let rows: Vec<PointRow> = points
        .iter()
        .zip(&sums)
        .map(|(&w, s)| {
            let exact = inside.eval(w);
            PointRow::new(w, s.value, exact, (s.value - exact).norm())
        })
        .collect();
    let errs: Vec<f64> = rows.iter().map(|r| r.error).collect();
    let svg = error_chart("partial sum", rows.iter().map(|r| r.re), &errs, "Re w").into();
    Ok(Output { csv: write_csv(&rows)?, svg, outcome: verdict("partial-sum", errs.into_iter(), max_err) })
}

#[derive(Serialize)]
struct CoeffRow {
    beta: f64,
    re: f64,
    im: f64,
    exact_re: f64,
    exact_im: f64,
    error: f64,
}

fn run_coeffs(
    c: &Common,
    inputs: &Inputs,
    betas: &[f64],
    radius: f64,
    probes: Option<&GridSpec>,
    max_err: f64,
) -> anyhow::Result<Output> {
    let g = load_germ(&inputs.germ)?;
    let h = load_domain(&inputs.domain)?;
    let cfg = LaplaceConfig::at_vertex(h, c.tol)?;
    let probes = match probes {
        Some(p) => p.points(),
        None => (0..3).map(|i| Complex64::new(cfg.w0 - 2.0 - 0.5 * i as f64, 0.0)).collect(),
    };
    let rows = betas
        .iter()
        .map(|&beta| {
            let a = sums::extract_coefficient(&g, beta, radius, &cfg, &probes)?;
            let exact = g.coeff_at(beta);
            Ok(CoeffRow { beta, re: a.re, im: a.im, exact_re: exact.re, exact_im: exact.im, error: (a - exact).norm() })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let errs: Vec<f64> = rows.iter().map(|r| r.error).collect();
    let svg = error_chart("coefficients", rows.iter().map(|r| r.beta), &errs, "beta").into();
    Ok(Output { csv: write_csv(&rows)?, svg, outcome: verdict("coeffs", errs.into_iter(), max_err) })
}

#[derive(Serialize)]
struct DippRow {
    re: f64,
    im: f64,
    value_re: f64,
    value_im: f64,
    exact_re: f64,
    exact_im: f64,
    error: f64,
    terms: usize,
    err_est: f64,
}

fn run_resummate(c: &Common, inputs: &Inputs, grid: &GridSpec, method: Method, n: usize, max_err: f64) -> anyhow::Result<Output> {
    let g = load_germ(&inputs.germ)?;
    let h = load_domain(&inputs.domain)?;
    let cal = sums::calibrate_phi_constant(c.tol.clamp(1e-11, 1e-8))?;
    let points = grid.points();
    match method {
        Method::Evanescent => {
            let state = DippState::for_germ(&g, &h, cal.c_norm, n.max(1) + 4)?;
            let rep = sums::convergence_report(&g, &state, &points, 1..=n.max(1))?;
            let last = rep.rows.last().map_or(0.0, |r| r.max_err);
            let summary = format!(
                "resummate: {} rows, error at n={} {last:.3e}, log slope {:.3}, c_norm {:.9}{:+.9}i",
                rep.rows.len(),
                n.max(1),
                rep.log_slope().unwrap_or(f64::NAN),
                cal.c_norm.re,
                cal.c_norm.im
            );
            let outcome = if last <= max_err { Outcome::Pass(summary) } else { Outcome::Fail { summary, failing: 1 } };
            let pts = rep.rows.iter().map(|r| (r.n as f64, r.max_err)).collect();
            let svg = plot::line_chart("evanescent partial sums", "n", "max error", &[Series { label: "max error".into(), points: pts }], true);
            Ok(Output { csv: rep.to_csv().into_bytes(), svg: Some(svg), outcome })
        }
        Method::Dipp => {
            let state = DippState::for_germ(&g, &h, cal.c_norm, 400)?;
            let jump = ExpSumJump { g: &g, c_norm: cal.c_norm };
            let rows = points
                .iter()
                .map(|&w| {
                    let r = sums::dipp_sum(&jump, &state, w)?;
                    let exact = g.eval(w);
                    Ok(DippRow {
                        re: w.re,
                        im: w.im,
                        value_re: r.value.re,
                        value_im: r.value.im,
                        exact_re: exact.re,
                        exact_im: exact.im,
                        error: (r.value - exact).norm(),
                        terms: r.terms.len(),
                        err_est: r.err_est,
                    })
                })
                .collect::<anyhow::Result<Vec<_>>>()?;
            let errs: Vec<f64> = rows.iter().map(|r| r.error).collect();
            let svg = error_chart("diagonal integration by parts", rows.iter().map(|r| r.re), &errs, "Re w").into();
            Ok(Output { csv: write_csv(&rows)?, svg, outcome: verdict("resummate", errs.into_iter(), max_err) })
        }
    }
}

fn forward_bound_suite(seed: u64, fixtures_n: usize, scale: f64) -> anyhow::Result<Report> {
    let mut rng = fixtures::rng(seed);
    let mut rep = Report::default();
    for _ in 0..fixtures_n {
        let g = fixtures::random_exp_sum(&mut rng, 10, 0.0, 5.0, 0.05)?;
        let h = fixtures::random_log_domain(&mut rng)?;
        let samples = fixtures::forward_bound_samples(&mut rng, 200, 4.0);
        rep.extend(transform::verify_forward_bound(&g, &h, &samples, scale)?);
    }
    Ok(rep)
}

/// Boundary points of `{F < a}` against `H_{a+1,k}`, then the deviation of `F` along `H_{a,k}`.
fn neighborhood_suite(scale: f64) -> anyhow::Result<Report> {
    let mut rep = Report::default();
    for (a, k) in [(-2.0, 1.0), (-3.0, 2.0)] {
        for i in 0..1000 {
            let y = -500.0 + i as f64;
            let x = tilde_boundary(a, k, y)?;
            let rho = (a + 1.0) - k * (1.0 + y.abs()).ln();
            // x < rho as e^x < e^rho
            rep.rows.push(ReportRow::new(Complex64::new(x, y), x.exp(), rho.exp() * scale, 0.0));
        }
        let dev = tilde_boundary_deviation(a, k, 1000, 1e12)?;
        let m = appendix_inclusion_margin(a, k)?.upper;
        rep.rows.push(ReportRow::new(Complex64::new(a, k), dev, m * scale, 0.0));
    }
    Ok(rep)
}

fn calibration_suite(tol: f64) -> anyhow::Result<Report> {
    let reference = sums::calibrate_phi_constant(tol)?.c_norm;
    let mut rep = Report::default();
    for n in [4usize, 5, 6] {
        for t in [2.0, 2.5] {
            let cal = sums::calibrate_phi_at(sums::calibration_curve(), tol, n, t, Complex64::new(1.0, 0.0))?;
            let mut row = ReportRow::new(Complex64::new(n as f64, t), (cal.c_norm - reference).norm(), 1e-6 * reference.norm(), 0.0);
            row.pass &= cal.within;
            rep.rows.push(row);
        }
    }
    Ok(rep)
}

fn run_verify(c: &Common, suite: Suite, trials: usize, scale: f64) -> anyhow::Result<Output> {
    let (name, rep) = match suite {
        Suite::Interpolation => ("interpolation", interpolation_suite(&mut fixtures::rng(c.seed), trials, 12, scale)),
        Suite::ForwardBound => ("forward-bound", forward_bound_suite(c.seed, trials.div_ceil(200).max(1), scale)?),
        Suite::Neighborhood => ("neighborhood", neighborhood_suite(scale)?),
        Suite::Calibration => ("calibration", calibration_suite(c.tol.clamp(1e-11, 1e-8))?),
    };
    let pts = rep.rows.iter().enumerate().map(|(i, r)| (i as f64, r.ratio)).collect();
    let svg = plot::line_chart(name, "sample", "lhs / rhs", &[Series { label: "ratio".into(), points: pts }], true);
    Ok(Output { csv: rep.to_csv().into_bytes(), svg: Some(svg), outcome: report_outcome(name, &rep) })
}

#[derive(Serialize)]
struct DomainRow {
    theta: f64,
    mu: f64,
    theta_inverse: f64,
}

fn run_domain(mu_of: &str, theta: f64) -> anyhow::Result<Output> {
    let h = load_domain(mu_of)?;
    let mu = mu_from_domain(&h);
    let value = mu.eval(theta)?;
    let rows = (1..64)
        .map(|i| {
            let th = FRAC_PI_2 * i as f64 / 64.0;
            Ok(DomainRow { theta: th, mu: mu.eval(th)?, theta_inverse: h.theta_inverse(th)? })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let svg = plot::domain_sketch("domain and inscribed cones", &h, &[0.2, 0.5, 0.9, 1.3], 20.0);
    Ok(Output { csv: write_csv(&rows)?, svg: Some(svg), outcome: Outcome::Pass(format!("{value}")) })
}

fn run(cli: &Cli) -> anyhow::Result<Output> {
    let c = &cli.common;
    if !(c.tol > 0.0) {
        bail!("tolerance must be positive, got {}", c.tol);
    }
    match &cli.command {
        Command::Transform { inputs, grid, max_rel } => run_transform(c, inputs, grid, *max_rel),
        Command::Invert { inputs, grid, max_err } => run_invert(c, inputs, grid, *max_err),
        Command::Roundtrip { inputs, grid, max_err } => run_roundtrip(c, inputs, grid, *max_err),
        Command::PartialSum { inputs, window, gap, grid, max_err } => run_partial_sum(c, inputs, window, *gap, grid, *max_err),
        Command::Coeffs { inputs, betas, radius, probes, max_err } => run_coeffs(c, inputs, betas, *radius, probes.as_ref(), *max_err),
        Command::Resummate { inputs, grid, method, n, max_err } => run_resummate(c, inputs, grid, *method, *n, *max_err),
        Command::Verify { suite, trials, scale } => run_verify(c, *suite, *trials, *scale),
        Command::Domain { mu_of, theta } => run_domain(mu_of, *theta),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let output = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    let is_domain = matches!(cli.command, Command::Domain { .. });
    let written = (|| -> anyhow::Result<()> {
        if let Some(p) = &cli.common.out {
            write_file(p, &output.csv)?;
        } else if !is_domain {
            print!("{}", String::from_utf8_lossy(&output.csv));
        }
        if let (Some(p), Some(svg)) = (&cli.common.plot, &output.svg) {
            write_file(p, svg.as_bytes())?;
        }
        Ok(())
    })();
    if let Err(e) = written {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    let table_on_stdout = cli.common.out.is_none() && !is_domain;
    let say = |line: &str| if table_on_stdout { eprintln!("{line}") } else { println!("{line}") };
    match output.outcome {
        Outcome::Pass(s) => {
            say(&s);
            ExitCode::SUCCESS
        }
        Outcome::Fail { summary, failing } => {
            say(&format!("{summary}; FAILED rows: {failing}"));
            ExitCode::from(2)
        }
    }
}
