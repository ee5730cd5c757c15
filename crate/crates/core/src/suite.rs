//! The per-domain invariant suite: every check reduced to a number, a
//! tolerance and a relation between them.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::context::Problem;
use crate::error::{Error, Result};
use crate::geometry::interior_samples;
use crate::hejhal::{
    ahlfors_check, boundary_sign_checks, lambda_report, residue_projection_check, suita_gap, unit_mass_f,
    VerifyOptions,
};
use crate::periods::{beta_period_kappa, sigma_span_rank};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// value ≤ tolerance.
    AtMost,
    /// value > tolerance.
    Exceeds,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub pass: bool,
}

/// Default thresholds by check name.
/// Integer-valued checks use a half-unit bound.
pub const DEFAULT_TOLERANCES: [(&str, f64); 21] = [
    ("boundary_identity", 1e-7),
    ("garabedian_identity", 1e-12),
    ("garabedian_square", 1e-12),
    ("kappa_periods", 1e-6),
    ("identity_residual", 1e-6),
    ("sigma_rank", 1e-8),
    ("lambda_positive", 0.0),
    ("lambda_nondegenerate", 1e-8),
    ("method_agreement", 1e-4),
    ("suita", 0.0),
    ("suita_disk", 1e-8),
    ("unit_mass", 1e-6),
    ("ahlfors_modulus", 1e-8),
    ("ahlfors_winding", 0.5),
    ("ahlfors_derivative", 1e-7),
    ("ahlfors_bound", 1e-10),
    ("residue_projection", 1e-6),
    ("sign_tkt", 0.0),
    ("sign_ftft", 0.0),
    ("sign_zero", 1e-5),
    ("zero_count", 0.5),
];

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub lambda: VerifyOptions,
    /// Overrides of `DEFAULT_TOLERANCES`.
    pub tolerances: BTreeMap<String, f64>,
    /// Interior points for the Suita inequality.
    pub suita_samples: usize,
    /// Parameters a for the π-integral.
    pub mass_samples: usize,
    /// Parameters w for the κ periods.
    pub kappa_samples: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            lambda: VerifyOptions::default(),
            tolerances: BTreeMap::new(),
            suita_samples: 20,
            mass_samples: 3,
            kappa_samples: 10,
        }
    }
}

impl SuiteOptions {
    /// Rejects unknown names and non-positive tolerances.
    pub fn validate(&self) -> Result<()> {
        for (name, &value) in &self.tolerances {
            if !DEFAULT_TOLERANCES.iter().any(|(n, _)| n == name) {
                return Err(Error::InvalidInput(format!("unknown tolerance '{name}'")));
            }
            if value.is_nan() || value <= 0.0 {
                return Err(Error::InvalidInput(format!("tolerance '{name}' must be positive")));
            }
        }
        Ok(())
    }

    fn tolerance(&self, name: &str) -> f64 {
        self.tolerances.get(name).copied().unwrap_or_else(|| {
            DEFAULT_TOLERANCES.iter().find(|(n, _)| *n == name).map(|&(_, t)| t).expect("named check")
        })
    }
}

struct Checks<'a> {
    options: &'a SuiteOptions,
    list: Vec<Check>,
}

impl Checks<'_> {
    fn push(&mut self, name: &str, value: f64, relation: Relation) {
        let tolerance = self.options.tolerance(name);
        let pass = match relation {
            Relation::AtMost => value <= tolerance,
            Relation::Exceeds => value > tolerance,
        };
        self.list.push(Check { name: name.into(), value, tolerance, relation, pass });
    }
}

fn max_norm(values: impl IntoIterator<Item = Complex64>) -> f64 {
    values.into_iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Runs every check that applies to the problem's connectivity.
pub fn run_suite(problem: &Problem, options: &SuiteOptions) -> Result<Vec<Check>> {
    options.validate()?;
    let n = problem.connectivity();
    let grid = problem.grid();
    let lambda = &options.lambda;
    let cuts = problem.cuts().ok();
    let draw = |count, skip| interior_samples(problem.domain(), cuts, count, lambda.margin, lambda.seed * 4000 + skip);
    let mut checks = Checks { options, list: Vec::new() };
    let w = draw(1, 5000)?[0];

    let green = problem.green(w)?;
    let lam = green.lambda_trace();
    let scale = max_norm(green.bergman_trace().iter().chain(&lam).copied());
    let identity = green.bergman_trace().iter().zip(&lam).zip(&grid.tangents).map(|((k, l), t)| k * t + (l * t).conj());
    checks.push("boundary_identity", max_norm(identity) / scale, Relation::AtMost);

    let pair = problem.szego(w)?;
    let (s, l) = (pair.szego.trace(), pair.garabedian.trace());
    let scale = max_norm(s.iter().copied());
    let eq6 = (0..grid.len()).map(|k| l[k] - Complex64::i() * (s[k] * grid.tangents[k]).conj());
    checks.push("garabedian_identity", max_norm(eq6) / scale, Relation::AtMost);
    let eq7 = (0..grid.len()).map(|k| (s[k] * s[k]).conj() * grid.tangents[k].conj() + l[k] * l[k] * grid.tangents[k]);
    checks.push("garabedian_square", max_norm(eq7) / (scale * scale), Relation::AtMost);

    let report = lambda_report(problem, lambda)?;
    checks.push("identity_residual", report.identity.relative, Relation::AtMost);
    if n >= 2 {
        let ws = draw(options.kappa_samples, 6000)?;
        let mut worst: f64 = 0.0;
        for green in problem.greens(&ws)? {
            for j in 1..n {
                worst = worst.max(beta_period_kappa(problem, &green, j)?.norm());
            }
        }
        checks.push("kappa_periods", worst, Relation::AtMost);

        let rank = sigma_span_rank(problem, &draw(4 * (n - 1), 7000)?)?;
        let sv = &rank.singular_values;
        checks.push("sigma_rank", sv[sv.len() - 1] / sv[0], Relation::Exceeds);

        checks.push("lambda_positive", report.min_eigenvalue(), Relation::Exceeds);
        checks.push("lambda_nondegenerate", report.eigen_ratio(), Relation::Exceeds);
        if report.matrices.len() > 1 {
            checks.push("method_agreement", report.max_deviation(), Relation::AtMost);
        }
        let mut gap = f64::INFINITY;
        for a in draw(options.suita_samples, 8000)? {
            gap = gap.min(suita_gap(problem, a)?);
        }
        checks.push("suita", gap, Relation::Exceeds);
    } else {
        checks.push("suita_disk", suita_gap(problem, w)?.abs(), Relation::AtMost);
    }

    let mut mass: f64 = 0.0;
    for a in draw(options.mass_samples, 9000)? {
        let m = unit_mass_f(problem, a)?;
        mass = mass.max((m.weighted - PI).norm()).max((m.plain - PI).norm());
    }
    checks.push("unit_mass", mass, Relation::AtMost);

    let probes = draw(10, 10000)?;
    let ahlfors = ahlfors_check(problem, w, &probes)?;
    checks.push("ahlfors_modulus", ahlfors.modulus_defect, Relation::AtMost);
    checks.push("ahlfors_winding", (ahlfors.winding - n as i64).abs() as f64, Relation::AtMost);
    checks.push("ahlfors_derivative", ahlfors.derivative_error, Relation::AtMost);
    checks.push("ahlfors_bound", (ahlfors.max_ratio - 1.0).max(0.0), Relation::AtMost);
    let residue = residue_projection_check(problem, w, Complex64::new(1.0, 0.0), &probes)?;
    checks.push("residue_projection", residue, Relation::AtMost);

    if n == 2 {
        let signs = boundary_sign_checks(problem, 0)?;
        checks.push("sign_tkt", -signs.tkt, Relation::Exceeds);
        checks.push("sign_ftft", -signs.ftft, Relation::Exceeds);
        checks.push("sign_zero", signs.zero_ratio, Relation::AtMost);
    }
    if n >= 3 {
        let target = 2 * n as i64 - 4;
        let defect = report.zero_counts.iter().map(|z| (2 * z.interior + z.boundary as i64 - target).abs()).max();
        checks.push("zero_count", defect.unwrap_or(0) as f64, Relation::AtMost);
    }
    Ok(checks.list)
}

/// True when every check passed.
pub fn all_pass(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.pass)
}
