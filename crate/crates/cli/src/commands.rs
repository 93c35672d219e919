//! The verification suites behind each subcommand. Every command returns a
//! serializable result carrying its own checks; wall times are collected
//! separately so results stay reproducible.

use std::collections::BTreeMap;
use std::time::Instant;

use ckn_core::calculus::{
    cd_defect_battery, hessian_bound_battery, ibp_s_battery, ibp_sphere_battery,
    integrated_cd_battery, warped_identity_battery, Extremes, ModelE, ModelS, MonomialSphere,
};
use ckn_core::optimizers::{
    ckn_sides, euler_lagrange_residual, tight_sobolev_sides, OptimizerE, OptimizerS,
};
use ckn_core::params::{theorem_hypotheses, CknParams, DerivedParams, HypothesisReport, Regime};
use ckn_core::quadrature::{integrate_radial, integrate_sphere, QuadSettings};
use ckn_core::special::{closed_form_constants, cosh_profile_integral};
use ckn_core::spectral::{
    detect_with_lambda, full_gap_estimate, phase_scan, radial_spectral_gap_S,
    sphere_first_eigenvalue, stability_threshold, theta_eigen_residuals, GapEstimate, ScanGrid,
    ScanRow, Verdict,
};
use ckn_core::CknError;
use serde::Serialize;

use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::seeds::BatterySeeds;

pub const SCHEMA_VERSION: &str = "ckn-report/1";

/// Bound on the two scaled exponent-identity residuals.
pub const IDENTITY_RESIDUAL_TOL: f64 = 1e-12;
/// Lower bound on normalized CD and integrated-CD defects.
pub const DEFECT_TOL: f64 = 1e-9;
/// Lower bound on the Hessian-bound slack and upper bound on its identity.
pub const HESSIAN_TOL: f64 = 1e-10;
/// Pointwise bound on the `theta_axis` eigen-equation residual.
pub const THETA_RESIDUAL_TOL: f64 = 1e-10;
/// Margin `|alpha^2 - (D-1)/(n-1)|` above which the detector must agree with
/// the analytic regime.
pub const VERDICT_MARGIN: f64 = 1e-3;

pub const EL_RADII: usize = 100;
pub const THETA_SAMPLES: usize = 200;
pub const DEFAULT_SAMPLES: usize = 1000;
pub const DEFAULT_DEGREE: usize = 4;
/// Starting node count per axis for the quadrature-backed geometry batteries;
/// doubling still runs up to the configured maximum.
pub const GEOMETRY_START_NODES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    AtMost,
    AtLeast,
}

/// One bound on one measured quantity. Advisory checks are reported but do
/// not affect the pass flag.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: Option<f64>,
    pub relation: Relation,
    pub limit: f64,
    pub enforced: bool,
    pub holds: bool,
}

impl Check {
    /// `value <= limit`; vacuous when `value` is `None`.
    pub fn at_most(name: &str, value: Option<f64>, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            relation: Relation::AtMost,
            limit,
            enforced: true,
            holds: value.is_none_or(|v| v <= limit),
        }
    }

    pub fn at_least(name: &str, value: Option<f64>, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            relation: Relation::AtLeast,
            limit,
            enforced: true,
            holds: value.is_none_or(|v| v >= limit),
        }
    }

    pub fn advisory(mut self) -> Self {
        self.enforced = false;
        self
    }

    pub fn enforced_if(mut self, cond: bool) -> Self {
        self.enforced = cond;
        self
    }

    pub fn passes(&self) -> bool {
        self.holds || !self.enforced
    }
}

pub fn all_pass(checks: &[Check]) -> bool {
    checks.iter().all(Check::passes)
}

/// Wall times in seconds, keyed by suite.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Timings(pub BTreeMap<String, f64>);

impl Timings {
    pub fn time<T>(&mut self, key: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.0.insert(key.into(), start.elapsed().as_secs_f64());
        out
    }
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

fn sphere_dim_supported(d: usize) -> bool {
    matches!(d, 2 | 3)
}

fn require_uncharged(params: &CknParams) -> CliResult<()> {
    if params.weight.charged().len() == params.d() {
        return Err(CliError::Config(
            "every coordinate is charged; the sphere suites need an uncharged axis".into(),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeriveResult {
    pub derived: DerivedParams,
    pub regime: Regime,
    pub hypotheses: HypothesisReport,
    pub tight_constant: f64,
    pub stability_threshold: f64,
    pub checks: Vec<Check>,
}

pub fn cmd_derive(config: &Config) -> CliResult<DeriveResult> {
    let (p, dp) = config.derived()?;
    let (r1, r2) = dp.identity_residuals();
    Ok(DeriveResult {
        derived: dp,
        regime: dp.regime,
        hypotheses: theorem_hypotheses(&p, &dp),
        tight_constant: dp.tight_constant(),
        stability_threshold: stability_threshold(&dp),
        checks: vec![
            Check::at_most("identity_alpha_n", Some(r1), IDENTITY_RESIDUAL_TOL),
            Check::at_most("identity_two_a", Some(r2), IDENTITY_RESIDUAL_TOL),
        ],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantResult {
    pub sphere_area_closed: f64,
    /// `None` outside `d in {2, 3}`, where the closed area is used instead.
    pub sphere_area_quadrature: Option<f64>,
    pub profile_integral_closed: f64,
    pub profile_integral_quadrature: f64,
    pub z_closed: f64,
    pub z_quadrature: f64,
    pub z_rel_diff: f64,
    pub c_opt: f64,
    pub c_opt_proved_sharp: bool,
    pub checks: Vec<Check>,
}

/// `Z` in closed form and by quadrature: the weighted sphere area on the
/// sphere rules times `int_0^inf ((1 + r^{2 alpha})/2)^{-n} r^{alpha n - 1} dr`
/// on the radial rule.
pub fn cmd_constant(config: &Config) -> CliResult<ConstantResult> {
    let (p, dp) = config.derived()?;
    let qs = config.quad_settings();
    let closed = closed_form_constants(&p, &dp)?;
    let area_q = if sphere_dim_supported(p.d()) {
        Some(integrate_sphere(|_| 1.0, &p.weight, &qs)?)
    } else {
        None
    };
    let (alpha, n) = (dp.alpha, dp.n);
    let radial = integrate_radial(
        |r| (0.5 * (1.0 + r.powf(2.0 * alpha))).powf(-n),
        alpha,
        n,
        &qs,
    )?;
    let profile_q = radial.value;
    let z_q = area_q.unwrap_or(closed.sphere_area) * radial.value;
    let z_rel = rel_diff(z_q, closed.z);
    Ok(ConstantResult {
        sphere_area_closed: closed.sphere_area,
        sphere_area_quadrature: area_q,
        profile_integral_closed: cosh_profile_integral(alpha, n)?,
        profile_integral_quadrature: profile_q,
        z_closed: closed.z,
        z_quadrature: z_q,
        z_rel_diff: z_rel,
        c_opt: closed.c_opt,
        c_opt_proved_sharp: closed.c_opt_proved_sharp,
        checks: vec![Check::at_most(
            "z_rel_diff",
            Some(z_rel),
            config.tolerances.quad,
        )],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TightEquality {
    pub lhs: f64,
    pub rhs: f64,
    pub rel_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizerResult {
    pub s: f64,
    pub t: f64,
    pub c_opt: f64,
    pub ratio: f64,
    pub ratio_rel_diff: f64,
    /// Relative Euler-Lagrange residual at log-spaced radii in `[1e-2, 1e2]`.
    pub euler_lagrange: Extremes,
    /// Tight Sobolev sides of the conformal image; `None` when skipped.
    pub tight: Option<TightEquality>,
    pub warnings: Vec<String>,
    pub checks: Vec<Check>,
}

/// Unit direction with positive, distinct coordinates.
fn el_direction(d: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..d).map(|i| 1.0 + 0.3 * i as f64).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / norm).collect()
}

pub fn cmd_verify_optimizer(config: &Config, s: f64, t: f64) -> CliResult<OptimizerResult> {
    let (p, dp) = config.derived()?;
    let qs = config.quad_settings();
    let tol = config.tolerances;
    let opt = OptimizerE::new(s, t, dp)?;
    let c_opt = closed_form_constants(&p, &dp)?.c_opt;
    let sides = ckn_sides(&opt.profile(), &p, &dp, &qs)?;
    let ratio_rel = rel_diff(sides.ratio, c_opt);

    let model_e = ModelE::new(dp, p.weight.clone());
    let dir = el_direction(p.d());
    let el: Vec<f64> = (0..EL_RADII)
        .map(|k| {
            let r = 10f64.powf(-2.0 + 4.0 * k as f64 / (EL_RADII - 1) as f64);
            let x: Vec<f64> = dir.iter().map(|c| r * c).collect();
            euler_lagrange_residual(&opt, &model_e, &x)
        })
        .collect::<Result<_, _>>()?;
    let el = Extremes::of(&el);

    let mut warnings = theorem_hypotheses(&p, &dp).warnings;
    let tight = if sphere_dim_supported(p.d()) && p.weight.last_uncharged() {
        let model = ModelS::new(dp, p.weight.clone())?;
        let v = opt.to_s();
        let scale = (v.c * v.c - v.b * v.b).sqrt();
        let v = OptimizerS::new(v.c / scale, v.b / scale, dp)?;
        let sides = tight_sobolev_sides(&model, &v.expr(), &qs)?;
        Some(TightEquality {
            lhs: sides.lhs,
            rhs: sides.rhs,
            rel_diff: rel_diff(sides.lhs, sides.rhs),
        })
    } else {
        warnings.push("tight Sobolev check skipped: needs d in {2, 3} and A_d = 0".into());
        None
    };
    if dp.regime == Regime::Breaking {
        warnings.push(
            "Breaking regime: the radial ratio is reported, but C_opt is not the sharp constant here"
                .into(),
        );
    }
    let checks = vec![
        Check::at_most("ratio_rel_diff", Some(ratio_rel), tol.eigen),
        Check::at_most("euler_lagrange_max", el.max, tol.identity),
        Check::at_most(
            "tight_equality_rel_diff",
            tight.as_ref().map(|t| t.rel_diff),
            tol.identity,
        ),
    ];
    Ok(OptimizerResult {
        s,
        t,
        c_opt,
        ratio: sides.ratio,
        ratio_rel_diff: ratio_rel,
        euler_lagrange: el,
        tight,
        warnings,
        checks,
    })
}

/// Sample counts per battery: pointwise jet batteries use `samples`, the
/// quadrature-backed ones a fixed fraction of it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GeometryPlan {
    pub pointwise: usize,
    pub integrated_cd: usize,
    pub ibp: usize,
}

impl GeometryPlan {
    pub fn for_samples(samples: usize) -> Self {
        Self {
            pointwise: samples,
            integrated_cd: samples.div_ceil(50),
            ibp: samples.div_ceil(200),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometryResult {
    pub plan: GeometryPlan,
    pub seeds: BatterySeeds,
    pub fault: Option<f64>,
    pub cd_defect: Extremes,
    pub warped_identity: Option<Extremes>,
    pub hessian_identity: Extremes,
    pub hessian_slack: Extremes,
    pub integrated_cd_weighted: Option<Extremes>,
    pub integrated_cd_unweighted: Option<Extremes>,
    pub ibp_sphere: Option<Extremes>,
    pub ibp_s: Option<Extremes>,
    pub skipped: Vec<String>,
    pub checks: Vec<Check>,
}

/// Turns quadrature non-convergence of one battery into a failing check so the
/// remaining results are still reported.
fn converged<T>(
    name: &str,
    r: ckn_core::Result<T>,
    rel_tol: f64,
    failed: &mut Vec<Check>,
) -> CliResult<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(CknError::NonConvergence { rel_change, .. }) => {
            failed.push(Check::at_most(
                &format!("{name}_rel_change"),
                Some(rel_change),
                rel_tol,
            ));
            Ok(None)
        }
        Err(e) => Err(e.into()),
    }
}

/// Geometry batteries for the configured weight. `fault` perturbs the
/// sphere log-density seen by the operators (negative control).
pub fn cmd_geometry(
    config: &Config,
    samples: usize,
    fault: Option<f64>,
) -> CliResult<GeometryResult> {
    let (p, dp) = config.derived()?;
    require_uncharged(&p)?;
    let base = config.quad_settings();
    let qs = QuadSettings {
        radial_nodes: base.radial_nodes.min(GEOMETRY_START_NODES),
        sphere_nodes: base.sphere_nodes.min(GEOMETRY_START_NODES),
        ..base
    };
    let tol = config.tolerances;
    let plan = GeometryPlan::for_samples(samples);
    let seeds = BatterySeeds::from_seed(config.seed);
    let eps = fault.unwrap_or(0.0);
    let sphere = MonomialSphere::new(p.weight.clone())?.with_fault(eps);
    let model = ModelS::new(dp, p.weight.clone())?.with_fault(eps);
    let mut skipped = Vec::new();

    let cd = cd_defect_battery(&sphere, plan.pointwise, seeds.cd_defect)?;
    let hess = hessian_bound_battery(&sphere, plan.pointwise, seeds.hessian_bound)?;
    let warped = if p.weight.last_uncharged() {
        Some(warped_identity_battery(
            &model,
            plan.pointwise,
            seeds.warped_identity,
        )?)
    } else {
        skipped.push("warped identity: needs A_d = 0".into());
        None
    };
    let quad_ok = sphere_dim_supported(p.d());
    if !quad_ok {
        skipped.push(format!(
            "quadrature batteries: d = {} outside {{2, 3}}",
            p.d()
        ));
    }
    let mut unconverged = Vec::new();
    let integrated = if quad_ok {
        converged(
            "integrated_cd",
            integrated_cd_battery(&model, plan.integrated_cd, seeds.integrated_cd, &qs),
            qs.rel_tol,
            &mut unconverged,
        )?
    } else {
        None
    };
    let ibp_sphere = if quad_ok {
        converged(
            "ibp_sphere",
            ibp_sphere_battery(&sphere, plan.ibp, seeds.ibp_sphere, &qs),
            qs.rel_tol,
            &mut unconverged,
        )?
    } else {
        None
    };
    let ibp_s = if quad_ok {
        converged(
            "ibp_s",
            ibp_s_battery(&model, plan.ibp, seeds.ibp_s, &qs),
            qs.rel_tol,
            &mut unconverged,
        )?
    } else {
        None
    };
    let symmetric = dp.regime == Regime::Symmetric;
    if !symmetric {
        skipped.push(format!(
            "integrated CD is only asserted in the Symmetric regime (regime {})",
            dp.regime.as_str()
        ));
    }
    let checks: Vec<Check> = [
        Check::at_least("cd_defect_min", cd.min, -DEFECT_TOL),
        Check::at_most(
            "warped_identity_max",
            warped.and_then(|w| w.max),
            tol.identity,
        ),
        Check::at_most(
            "hessian_identity_max",
            hess.identity_residual.max,
            HESSIAN_TOL,
        ),
        Check::at_least("hessian_slack_min", hess.bound_slack.min, -HESSIAN_TOL),
        Check::at_least(
            "integrated_cd_weighted_min",
            integrated.and_then(|c| c.weighted.min),
            -DEFECT_TOL,
        )
        .enforced_if(symmetric),
        Check::at_least(
            "integrated_cd_unweighted_min",
            integrated.and_then(|c| c.unweighted.min),
            -DEFECT_TOL,
        )
        .enforced_if(symmetric),
        Check::at_most(
            "ibp_sphere_max",
            ibp_sphere.and_then(|e| e.max),
            tol.identity,
        ),
        Check::at_most("ibp_s_max", ibp_s.and_then(|e| e.max), tol.identity),
    ]
    .into_iter()
    .chain(unconverged)
    .collect();
    Ok(GeometryResult {
        plan,
        seeds,
        fault,
        cd_defect: cd,
        warped_identity: warped,
        hessian_identity: hess.identity_residual,
        hessian_slack: hess.bound_slack,
        integrated_cd_weighted: integrated.map(|c| c.weighted),
        integrated_cd_unweighted: integrated.map(|c| c.unweighted),
        ibp_sphere,
        ibp_s,
        skipped,
        checks,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenResult {
    pub degree: usize,
    pub lambda_theta_1: f64,
    pub expected_lambda: f64,
    pub lambda_diff: f64,
    pub ritz_basis_size: usize,
    pub ritz_rank: usize,
    pub theta_residual: Extremes,
    pub radial_gap: f64,
    pub alpha_sq_n: f64,
    pub radial_gap_diff: f64,
    /// Reported next to `D/2`, not asserted.
    pub gap_estimate: GapEstimate,
    pub checks: Vec<Check>,
}

pub fn cmd_eigen(config: &Config, degree: usize) -> CliResult<EigenResult> {
    let (p, dp) = config.derived()?;
    require_uncharged(&p)?;
    let qs = config.quad_settings();
    let tol = config.tolerances;
    let seeds = BatterySeeds::from_seed(config.seed);
    let ritz = sphere_first_eigenvalue(&p.weight, degree, &qs)?;
    let lambda = ritz.first();
    let expected = dp.monomial_dim - 1.0;
    let sphere = MonomialSphere::new(p.weight.clone())?;
    let theta = theta_eigen_residuals(&sphere, THETA_SAMPLES, seeds.theta_residual)?;
    let radial = radial_spectral_gap_S(&dp, degree)?.first();
    let alpha_sq_n = stability_threshold(&dp);
    let gap = full_gap_estimate(&dp, lambda, degree)?;
    let lambda_diff = (lambda - expected).abs();
    let radial_diff = rel_diff(radial, alpha_sq_n);
    let checks = vec![
        Check::at_most("lambda_theta_1_diff", Some(lambda_diff), tol.eigen),
        Check::at_most("theta_residual_max", theta.max, THETA_RESIDUAL_TOL),
        Check::at_most("radial_gap_rel_diff", Some(radial_diff), tol.identity),
        Check::at_least(
            "gap_over_half_dimension",
            Some(gap.gap - gap.half_dimension),
            0.0,
        )
        .advisory(),
    ];
    Ok(EigenResult {
        degree,
        lambda_theta_1: lambda,
        expected_lambda: expected,
        lambda_diff,
        ritz_basis_size: ritz.basis_size,
        ritz_rank: ritz.rank,
        theta_residual: theta,
        radial_gap: radial,
        alpha_sq_n,
        radial_gap_diff: radial_diff,
        gap_estimate: gap,
        checks,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectorResult {
    pub lambda_theta_1: f64,
    pub test_quotient: f64,
    pub closed_form_quotient: f64,
    pub quotient_rel_diff: f64,
    pub threshold: f64,
    pub margin: f64,
    pub verdict: Verdict,
    pub expected_verdict: Verdict,
    pub agrees_with_fs: bool,
    pub checks: Vec<Check>,
}

fn detector_checks(q_rel: f64, agrees: bool, margin: f64, lambda_ok: bool, tol: f64) -> Vec<Check> {
    vec![
        Check::at_most("quotient_rel_diff", Some(q_rel), tol),
        Check::at_least("agrees_with_fs", Some(if agrees { 1.0 } else { 0.0 }), 1.0)
            .enforced_if(margin > VERDICT_MARGIN && lambda_ok),
    ]
}

/// Detector at the configured point, with a given `lambda_theta_1`.
pub fn detector_with_lambda(config: &Config, lambda: f64) -> CliResult<DetectorResult> {
    let (p, dp) = config.derived()?;
    require_uncharged(&p)?;
    let v = detect_with_lambda(&dp, &p.weight, lambda)?;
    let q_rel = rel_diff(v.test_quotient, v.closed_form_quotient);
    let margin = (dp.alpha_sq - dp.fs_bound).abs();
    let lambda_ok = (lambda - (dp.monomial_dim - 1.0)).abs() <= config.tolerances.eigen;
    Ok(DetectorResult {
        lambda_theta_1: lambda,
        test_quotient: v.test_quotient,
        closed_form_quotient: v.closed_form_quotient,
        quotient_rel_diff: q_rel,
        threshold: v.threshold,
        margin,
        verdict: v.verdict,
        expected_verdict: Verdict::expected_for(dp.regime),
        agrees_with_fs: v.agrees_with_fs,
        checks: detector_checks(
            q_rel,
            v.agrees_with_fs,
            margin,
            lambda_ok,
            config.tolerances.identity,
        ),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    pub grid: ScanGrid,
    pub degree: usize,
    pub rows: Vec<ScanRow>,
    pub evaluated: usize,
    pub skipped: usize,
    /// Evaluated rows with margin above [`VERDICT_MARGIN`] whose verdict
    /// differs from the regime prediction.
    pub disagreements: usize,
    pub max_quotient_rel_diff: Option<f64>,
    pub checks: Vec<Check>,
}

pub fn cmd_scan(config: &Config, grid: &ScanGrid, degree: usize) -> CliResult<ScanResult> {
    let p = config.params()?;
    require_uncharged(&p)?;
    let rows = phase_scan(&p.weight, grid, degree, &config.quad_settings())?;
    let evaluated: Vec<&ScanRow> = rows.iter().filter(|r| r.skipped.is_none()).collect();
    let disagreements = evaluated
        .iter()
        .filter(|r| r.margin().is_some_and(|m| m > VERDICT_MARGIN) && r.agree == Some(false))
        .count();
    let max_q = evaluated
        .iter()
        .filter_map(|r| Some(rel_diff(r.quotient?, r.closed_form_quotient?)))
        .reduce(f64::max);
    let checks = vec![
        Check::at_most("disagreements", Some(disagreements as f64), 0.0),
        Check::at_most("max_quotient_rel_diff", max_q, config.tolerances.identity),
    ];
    Ok(ScanResult {
        grid: *grid,
        degree,
        evaluated: evaluated.len(),
        skipped: rows.len() - evaluated.len(),
        disagreements,
        max_quotient_rel_diff: max_q,
        rows,
        checks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ReportOptions {
    pub samples: usize,
    pub degree: usize,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            samples: DEFAULT_SAMPLES,
            degree: DEFAULT_DEGREE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdicts {
    pub derive: bool,
    pub constant: bool,
    pub optimizer: bool,
    pub geometry: bool,
    pub eigen: bool,
    pub detector: bool,
}

impl Verdicts {
    pub fn count(&self) -> (usize, usize) {
        let all = [
            self.derive,
            self.constant,
            self.optimizer,
            self.geometry,
            self.eigen,
            self.detector,
        ];
        (all.iter().filter(|&&v| v).count(), all.len())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub config: Config,
    pub options: ReportOptions,
    pub derive: DeriveResult,
    pub constant: ConstantResult,
    pub optimizer: OptimizerResult,
    pub geometry: GeometryResult,
    pub eigen: EigenResult,
    pub detector: DetectorResult,
    pub verdicts: Verdicts,
    pub pass: bool,
}

impl Report {
    /// One-line summary used by `--quiet`.
    pub fn summary(&self) -> String {
        let (ok, total) = self.verdicts.count();
        format!(
            "{}: {ok}/{total} suites pass; regime {}; detector verdict {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.derive.regime.as_str(),
            self.detector.verdict.as_str()
        )
    }
}

/// Runs every suite on one configuration; the optimizer suite uses
/// `s = t = 1`.
pub fn cmd_report(
    config: &Config,
    options: ReportOptions,
    timings: &mut Timings,
) -> CliResult<Report> {
    let derive = timings.time("derive", || cmd_derive(config))?;
    let constant = timings.time("constant", || cmd_constant(config))?;
    let optimizer = timings.time("optimizer", || cmd_verify_optimizer(config, 1.0, 1.0))?;
    let geometry = timings.time("geometry", || cmd_geometry(config, options.samples, None))?;
    let eigen = timings.time("eigen", || cmd_eigen(config, options.degree))?;
    let detector = timings.time("detector", || {
        detector_with_lambda(config, eigen.lambda_theta_1)
    })?;
    let verdicts = Verdicts {
        derive: all_pass(&derive.checks),
        constant: all_pass(&constant.checks),
        optimizer: all_pass(&optimizer.checks),
        geometry: all_pass(&geometry.checks),
        eigen: all_pass(&eigen.checks),
        detector: all_pass(&detector.checks),
    };
    let (ok, total) = verdicts.count();
    Ok(Report {
        schema: SCHEMA_VERSION,
        config: config.clone(),
        options,
        derive,
        constant,
        optimizer,
        geometry,
        eigen,
        detector,
        verdicts,
        pass: ok == total,
    })
}
