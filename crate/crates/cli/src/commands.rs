//! The four subcommands. Each returns its serialized output and whether
//! every check it performs passed.

use std::fmt::Write;

use hejhal_lab::geometry::{geometric_radii, interior_samples};
use hejhal_lab::hejhal::{eigen, homotopy_sweep, lambda_report, LambdaMatrix, LambdaMethod, SweepSettings};
use hejhal_lab::suite::{all_pass, run_suite, Check};
use hejhal_lab::{Error, Problem, Result};
use num_complex::Complex64;
use serde::Serialize;

use crate::run::RunConfig;

pub struct Outcome {
    pub output: String,
    pub pass: bool,
    /// Names of failed checks or steps, for the diagnostic on stderr.
    pub failures: Vec<String>,
}

#[derive(Serialize)]
struct Report<'a> {
    connectivity: usize,
    nodes: usize,
    seed: u64,
    pass: bool,
    checks: &'a [Check],
}

pub fn verify(config: &RunConfig) -> Result<Outcome> {
    let problem = config.problem()?;
    let methods = if problem.handles() > 0 { vec![LambdaMethod::HPeriods, LambdaMethod::DoublePeriods] } else { vec![] };
    let checks = run_suite(&problem, &config.suite(methods))?;
    let pass = all_pass(&checks);
    let report =
        Report { connectivity: problem.connectivity(), nodes: problem.nodes(), seed: config.seed, pass, checks: &checks };
    let mut output = serde_json::to_string_pretty(&report).expect("report serializes");
    output.push('\n');
    let failures = checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect();
    Ok(Outcome { output, pass, failures })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum MethodArg {
    Fit,
    Periods,
    Double,
    All,
}

fn method_name(m: LambdaMethod) -> &'static str {
    match m {
        LambdaMethod::Fit => "fit",
        LambdaMethod::HPeriods => "periods",
        LambdaMethod::DoublePeriods => "double",
    }
}

/// Rows `method,i,j,lambda_ij` for i ≤ j, then `method,k,,mu_k`, 1-based.
pub fn lambda(config: &RunConfig, method: MethodArg) -> Result<Outcome> {
    let problem = config.problem()?;
    if problem.handles() == 0 {
        return Err(Error::NoHandles);
    }
    let periods = match method {
        MethodArg::Fit => vec![],
        MethodArg::Periods => vec![LambdaMethod::HPeriods],
        MethodArg::Double => vec![LambdaMethod::DoublePeriods],
        MethodArg::All => vec![LambdaMethod::HPeriods, LambdaMethod::DoublePeriods],
    };
    let report = lambda_report(&problem, &config.verify_options(periods))?;
    let shown: Vec<&LambdaMatrix> = match method {
        MethodArg::Fit | MethodArg::All => report.matrices.iter().collect(),
        _ => report.matrices.iter().skip(1).collect(),
    };
    let mut out = String::from("method,i,j,value\n");
    for m in &shown {
        for i in 0..m.size() {
            for j in i..m.size() {
                writeln!(out, "{},{},{},{:e}", method_name(m.method), i + 1, j + 1, m.get(i, j)).unwrap();
            }
        }
    }
    let mut failures = Vec::new();
    for m in &shown {
        let (mu, _) = eigen(m);
        for (k, v) in mu.iter().enumerate() {
            writeln!(out, "{},{},,{:e}", method_name(m.method), k + 1, v).unwrap();
        }
        if mu.first().is_some_and(|&v| v <= 0.0) {
            failures.push(format!("{} positivity", method_name(m.method)));
        }
    }
    Ok(Outcome { output: out, pass: failures.is_empty(), failures })
}

/// The interior sample farthest from bΩ among the first few hundred.
fn deepest_point(problem: &Problem, seed: u64) -> Result<(Complex64, f64)> {
    let domain = problem.domain();
    let candidates = interior_samples(domain, None, 256, 1e-3, seed * 4000)?;
    Ok(candidates
        .into_iter()
        .map(|z| (z, domain.distance_to_boundary(z)))
        .fold((Complex64::new(0.0, 0.0), f64::NEG_INFINITY), |best, c| if c.1 > best.1 { c } else { best }))
}

pub struct SweepArgs {
    pub steps: usize,
    pub center: Option<Complex64>,
    pub radius: Option<f64>,
}

/// Rows `step,radius,center_re,center_im,mu_1..mu_m,min_mu,status`.
pub fn sweep(config: &RunConfig, args: &SweepArgs) -> Result<Outcome> {
    if args.steps == 0 {
        return Err(Error::InvalidInput("steps must be at least 1".into()));
    }
    let problem = config.problem()?;
    let domain = problem.domain();
    let (center, depth) = match args.center {
        Some(c) => {
            if !domain.contains(c) {
                return Err(Error::InvalidInput(format!("center {c} is outside the domain")));
            }
            (c, domain.distance_to_boundary(c))
        }
        None => deepest_point(&problem, config.seed)?,
    };
    let radius = args.radius.unwrap_or(0.4 * depth);
    if radius.is_nan() || radius <= 0.0 {
        return Err(Error::InvalidInput("radius must be positive".into()));
    }
    let settings = SweepSettings {
        center,
        radii: geometric_radii(radius, args.steps),
        nodes: config.domain.nodes,
        samples: config.samples,
        margin: config.margin,
        seed: config.seed,
    };
    let trace = homotopy_sweep(domain, &settings)?;
    let m = domain.connectivity();
    let mut out = String::from("step,radius,center_re,center_im");
    for k in 1..=m {
        write!(out, ",mu_{k}").unwrap();
    }
    out.push_str(",min_mu,status\n");
    let mut failures = Vec::new();
    for (s, step) in trace.steps.iter().enumerate() {
        write!(out, "{},{:e},{:e},{:e}", s + 1, step.radius, step.center.re, step.center.im).unwrap();
        let status = if step.error.is_some() {
            "failed"
        } else if step.min_eigenvalue > 0.0 {
            "ok"
        } else {
            "nonpositive"
        };
        for k in 0..m {
            match step.eigenvalues.get(k) {
                Some(v) if step.error.is_none() => write!(out, ",{v:e}").unwrap(),
                _ => out.push(','),
            }
        }
        if step.error.is_none() {
            writeln!(out, ",{:e},{status}", step.min_eigenvalue).unwrap();
        } else {
            writeln!(out, ",,{status}").unwrap();
        }
        if status != "ok" {
            failures.push(format!("step {}: {}", s + 1, step.error.as_deref().unwrap_or(status)));
        }
    }
    Ok(Outcome { output: out, pass: failures.is_empty(), failures })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum KernelArg {
    #[value(name = "S")]
    S,
    #[value(name = "L")]
    L,
    #[value(name = "K")]
    K,
    #[value(name = "Lambda")]
    Lambda,
    #[value(name = "F")]
    F,
}

pub struct TabulateArgs {
    pub kernel: KernelArg,
    pub grid: usize,
    pub w: Complex64,
    pub j: usize,
}

/// Rows `z_re,z_im,w_re,w_im,value_re,value_im` on the admissible points of a
/// G×G grid over the outer curve's bounding box; the w columns are empty for F.
pub fn tabulate(config: &RunConfig, args: &TabulateArgs) -> Result<Outcome> {
    if args.grid < 2 {
        return Err(Error::InvalidInput("grid must be at least 2".into()));
    }
    let problem = config.problem()?;
    let domain = problem.domain();
    let is_f = args.kernel == KernelArg::F;
    if is_f && !(1..=problem.handles()).contains(&args.j) {
        return Err(Error::InvalidInput(format!("j must lie in 1..={}", problem.handles())));
    }
    if !is_f && !domain.contains(args.w) {
        return Err(Error::InvalidInput(format!("w = {} is outside the domain", args.w)));
    }
    let exclusion = problem.grid().exclusion_distance();
    let outer = domain.outer().samples(512);
    let bound = |f: fn(&Complex64) -> f64, max: bool| {
        outer.iter().map(f).fold(if max { f64::NEG_INFINITY } else { f64::INFINITY }, if max { f64::max } else { f64::min })
    };
    let (x0, x1) = (bound(|z| z.re, false), bound(|z| z.re, true));
    let (y0, y1) = (bound(|z| z.im, false), bound(|z| z.im, true));
    let g = args.grid;
    let points: Vec<Complex64> = (0..g)
        .flat_map(|r| (0..g).map(move |c| (r, c)))
        .map(|(r, c)| {
            let step = |lo: f64, hi: f64, k: usize| lo + (hi - lo) * k as f64 / (g - 1) as f64;
            Complex64::new(step(x0, x1, c), step(y0, y1, r))
        })
        .filter(|&z| domain.contains(z) && domain.distance_to_boundary(z) >= exclusion)
        .filter(|&z| is_f || (z - args.w).norm() >= exclusion)
        .collect();
    let values: Vec<Complex64> = match args.kernel {
        KernelArg::S => {
            let s = problem.szego(args.w)?.szego;
            points.iter().map(|&z| s.eval(z)).collect::<Result<_>>()?
        }
        KernelArg::L => {
            let l = problem.szego(args.w)?.garabedian;
            points.iter().map(|&z| l.eval(z)).collect::<Result<_>>()?
        }
        KernelArg::K | KernelArg::Lambda => {
            let green = problem.green(args.w)?;
            let eval = |z| if args.kernel == KernelArg::K { green.bergman(z) } else { green.lambda(z) };
            points.iter().map(|&z| eval(z)).collect::<Result<_>>()?
        }
        KernelArg::F => points.iter().map(|&z| problem.f_prime(args.j, z)).collect(),
    };
    let mut out = String::from("z_re,z_im,w_re,w_im,value_re,value_im\n");
    for (z, v) in points.iter().zip(&values) {
        if is_f {
            writeln!(out, "{:e},{:e},,,{:e},{:e}", z.re, z.im, v.re, v.im).unwrap();
        } else {
            writeln!(out, "{:e},{:e},{:e},{:e},{:e},{:e}", z.re, z.im, args.w.re, args.w.im, v.re, v.im).unwrap();
        }
    }
    Ok(Outcome { output: out, pass: true, failures: Vec::new() })
}
