//! Pointwise and integrated identities of the Gamma-calculus: curvature
//! defects, the Hessian bound for `W_theta`, the warped decomposition and
//! integration by parts.

use serde::{Deserialize, Serialize};

use super::expr::Expr;
use super::geometry::{require_order, DiagonalGeometry};
use super::jet::Jet3;
use super::models::{ModelS, MonomialSphere};
use crate::error::{CknError, Result};
use crate::linalg::compensated_sum;
use crate::quadrature::{
    converge, converge_axes, converge_many, gauss_legendre, QuadSettings, SphereRule,
};

/// A signed defect together with the magnitude of the terms it came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Defect {
    pub value: f64,
    pub scale: f64,
}

impl Defect {
    /// `value / max(1, scale)`: rounding in the terms stays below this level.
    pub fn normalized(&self) -> f64 {
        self.value / self.scale.max(1.0)
    }
}

fn max_abs(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// `Gamma_2^theta f - (D-2) Gamma^theta f - (L_theta f)^2/(D-1)` for a jet in
/// sphere chart coordinates.
pub fn cd_sphere_defect(sphere: &MonomialSphere, f: &Jet3) -> Result<Defect> {
    require_order(f, 3, "cd_sphere_defect")?;
    let g = sphere.geometry_at(f.point())?;
    let big_d = sphere.weight().monomial_dim();
    let g2 = g.gamma2(f)?;
    let gam = (big_d - 2.0) * g.gamma(f, f);
    let lf = g.l(f)?;
    let sq = lf * lf / (big_d - 1.0);
    Ok(Defect {
        value: g2 - gam - sq,
        scale: max_abs(&[g2, gam, sq]),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HessianBound {
    /// `nabla^2 W_theta (nabla f, nabla f)` from Christoffel symbols.
    pub hessian: f64,
    /// Same quantity through `Gamma(Gamma(W, f), f) - Gamma(Gamma(f)/2, W)`.
    pub hessian_gamma: f64,
    /// `|hessian - hessian_gamma| / max(1, |hessian|)`.
    pub identity_residual: f64,
    /// `hessian - |A| Gamma(f) - Gamma(W, f)^2/|A|`; `None` when `|A| = 0`.
    pub bound_slack: Option<Defect>,
}

/// Checks the second-order identity for `nabla^2 W_theta` and the convexity
/// bound `nabla^2 W (nabla f, nabla f) >= |A| Gamma f + Gamma(W, f)^2/|A|`.
pub fn hessian_w_bound_residual(sphere: &MonomialSphere, f: &Jet3) -> Result<HessianBound> {
    require_order(f, 3, "hessian_w_bound_residual")?;
    let z = f.point().to_vec();
    let g = sphere.geometry_at(&z)?;
    let vars = Jet3::variables(&z);
    let w = sphere.w_theta(&vars);

    let gwf = g.gamma_jet(&w, f);
    let gff = g.gamma_jet(f, f);
    let hessian_gamma = g.gamma(&gwf, f) - 0.5 * g.gamma(&gff, &w);

    // Round metric phi^{-2} delta: Christoffel symbols of e^{2 sigma} delta
    // with sigma = -log phi.
    let m = z.len();
    let phi = 0.5 * (1.0 + z.iter().map(|v| v * v).sum::<f64>());
    let sigma: Vec<f64> = z.iter().map(|v| -v / phi).collect();
    let sw: f64 = (0..m).map(|k| sigma[k] * w.d1(k)).sum();
    let x: Vec<f64> = (0..m).map(|i| phi * phi * f.d1(i)).collect();
    let mut terms = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            let christ = sigma[j] * w.d1(i) + sigma[i] * w.d1(j) - if i == j { sw } else { 0.0 };
            terms.push((w.d2(i, j) - christ) * x[i] * x[j]);
        }
    }
    let hessian = compensated_sum(terms);

    let abs_a = sphere.weight().abs();
    let bound_slack = if abs_a > 0.0 {
        let a_gamma = abs_a * g.gamma(f, f);
        let gw = g.gamma(&w, f);
        let sq = gw * gw / abs_a;
        Some(Defect {
            value: hessian - a_gamma - sq,
            scale: max_abs(&[hessian, a_gamma, sq]),
        })
    } else {
        None
    };
    Ok(HessianBound {
        hessian,
        hessian_gamma,
        identity_residual: (hessian - hessian_gamma).abs() / hessian.abs().max(1.0),
        bound_slack,
    })
}

/// The two sides of the warped decomposition of the `CD(alpha^2 (n-1), n)`
/// defect on `S`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WarpedTerms {
    pub lhs: f64,
    /// `(1/n) (alpha^2 (1-y^2) sqrt(n-1) f_yy - L_theta f / (sqrt(n-1)(1-y^2)))^2`.
    pub radial_square: f64,
    /// `2 alpha^2 Gamma^theta(f y/(1-y^2) + f_y)`.
    pub mixed: f64,
    /// `(Gamma_2^theta f - alpha^2 (n-2) Gamma^theta f - (L_theta f)^2/(n-1)) / (1-y^2)^2`.
    pub angular: f64,
}

impl WarpedTerms {
    pub fn residual(&self) -> f64 {
        let rhs = self.radial_square + self.mixed + self.angular;
        let scale = max_abs(&[self.lhs, self.radial_square, self.mixed, self.angular]);
        (self.lhs - rhs).abs() / scale.max(1.0)
    }
}

pub fn warped_terms(model: &ModelS, f: &Jet3) -> Result<WarpedTerms> {
    require_order(f, 3, "warped_identity_residual")?;
    let wg = model.geometry_at(f.point())?;
    let (s, th) = (&wg.s, &wg.theta);
    let y = wg.y;
    let om = 1.0 - y * y;
    let a2 = model.dp.alpha * model.dp.alpha;
    let n = model.dp.n;

    let lhs = s.gamma2(f)? - a2 * (n - 1.0) * s.gamma(f, f) - s.l(f)?.powi(2) / n;

    let lt = th.l(f)?;
    let rn = (n - 1.0).sqrt();
    let radial_square = (a2 * om * rn * f.d2(0, 0) - lt / (rn * om)).powi(2) / n;

    let yj = Jet3::variable(f.point(), 0);
    let ratio = yj / ((yj * yj).scale(-1.0) + 1.0);
    let mix = *f * ratio + f.partial(0);
    let mixed = 2.0 * a2 * th.gamma(&mix, &mix);

    let angular =
        (th.gamma2(f)? - a2 * (n - 2.0) * th.gamma(f, f) - lt * lt / (n - 1.0)) / (om * om);
    Ok(WarpedTerms {
        lhs,
        radial_square,
        mixed,
        angular,
    })
}

/// Relative residual of the warped decomposition at the point of `f`.
pub fn warped_identity_residual(model: &ModelS, f: &Jet3) -> Result<f64> {
    Ok(warped_terms(model, f)?.residual())
}

/// Exponents `A_i - 1` on charged coordinates: integrands multiplied by
/// `prod theta_i` then have no `1/theta_i` left from the drift.
fn shifted_exponents(sphere: &MonomialSphere) -> Vec<f64> {
    sphere
        .weight()
        .exponents()
        .iter()
        .map(|&a| if a > 0.0 { a - 1.0 } else { 0.0 })
        .collect()
}

fn charged_product(sphere: &MonomialSphere, theta: &[f64]) -> f64 {
    sphere
        .weight()
        .charged()
        .iter()
        .map(|&i| theta[i])
        .product()
}

/// Result of an integrated identity that should vanish.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IbpResidual {
    /// The integral itself.
    pub value: f64,
    /// `int |integrand|`, the scale of the cancellation.
    pub mass: f64,
    pub nodes: usize,
}

impl IbpResidual {
    pub fn residual(&self) -> f64 {
        self.value.abs()
    }
}

/// `int (f L_theta h + Gamma^theta(f, h)) d mu_theta`, which vanishes.
///
/// `f`, `h` are expressions in the ambient coordinates `theta_1..theta_d`.
pub fn ibp_residual_sphere(
    sphere: &MonomialSphere,
    f: &Expr,
    h: &Expr,
    settings: &QuadSettings,
) -> Result<IbpResidual> {
    let exps = shifted_exponents(sphere);
    let m0 = settings.sphere_nodes;
    let mut mass = 0.0;
    let c = converge(m0, settings.max_nodes, settings.rel_tol, |s| {
        let rule = SphereRule::with_exponents(sphere.weight(), &exps, m0 * s)?;
        let mut terms = Vec::with_capacity(rule.len());
        for i in 0..rule.len() {
            let theta = rule.point(i);
            let p = sphere.from_ambient(theta)?;
            let x = sphere.input_jets(&p)?;
            let g = sphere.geometry_at(&p.z)?;
            let fj = f.eval_jet(&x);
            let hj = h.eval_jet(&x);
            let v = fj.value() * g.l(&hj)? + g.gamma(&fj, &hj);
            terms.push(rule.weights[i] * v * charged_product(sphere, theta));
        }
        mass = compensated_sum(terms.iter().map(|t| t.abs()));
        Ok((compensated_sum(terms), mass))
    })?;
    Ok(IbpResidual {
        value: c.value,
        mass,
        nodes: c.nodes,
    })
}

/// `y`-profile of the cutoff `zeta_k`: 0 within `1/k` of `y = +-1`, 1 on
/// `[-1 + 2/k, 1 - 2/k]`, smooth steps in between (variable 0 is `y`).
pub fn zeta_k(k: f64) -> Expr {
    let y = Expr::var(0);
    ((y.clone() + 1.0) * k - 1.0).step() * ((Expr::c(1.0) - y) * k - 1.0).step()
}

/// Support `[-1 + 1/k, 1 - 1/k]` of [`zeta_k`] with its smoothness breakpoints.
pub fn zeta_k_support(k: f64) -> YSupport {
    YSupport {
        lo: -1.0 + 1.0 / k,
        hi: 1.0 - 1.0 / k,
        breaks: vec![-1.0 + 2.0 / k, 1.0 - 2.0 / k],
    }
}

/// Declared `y`-support of a test function, with interior points where it
/// is only `C^inf` rather than analytic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YSupport {
    pub lo: f64,
    pub hi: f64,
    pub breaks: Vec<f64>,
}

impl YSupport {
    fn knots(&self) -> Result<Vec<f64>> {
        if !(self.lo > -1.0 && self.hi < 1.0 && self.lo < self.hi) {
            return Err(CknError::SupportViolation(format!(
                "support [{}, {}] must lie strictly inside (-1, 1)",
                self.lo, self.hi
            )));
        }
        let mut k = vec![self.lo];
        let mut b = self.breaks.clone();
        b.sort_by(f64::total_cmp);
        for x in b {
            if x > *k.last().unwrap() && x < self.hi {
                k.push(x);
            }
        }
        k.push(self.hi);
        Ok(k)
    }
}

/// `int (h L_S f + Gamma_S(h, f)) d mu_S` for `h` supported in `support`.
///
/// `f`, `h` are expressions in `(y, theta_1, ..., theta_d)`. The support
/// claim is checked by requiring `h` and `h_y` to vanish at its ends.
pub fn ibp_residual_s(
    model: &ModelS,
    f: &Expr,
    h: &Expr,
    support: &YSupport,
    settings: &QuadSettings,
) -> Result<IbpResidual> {
    let knots = support.knots()?;
    let sphere = &model.sphere;
    let probe = SphereRule::new(sphere.weight(), 6)?;
    for &y in &[support.lo, support.hi] {
        for i in 0..probe.len() {
            let (pole, pt) = model.point_of(y, probe.point(i))?;
            let hj = h.eval_jet(&model.input_jets(pole, &pt)?);
            if hj.value().abs() > 1e-12 || hj.d1(0).abs() > 1e-12 {
                return Err(CknError::SupportViolation(format!(
                    "h does not vanish at y = {y} (h = {}, h_y = {})",
                    hj.value(),
                    hj.d1(0)
                )));
            }
        }
    }
    let exps = shifted_exponents(sphere);
    let beta = 0.5 * model.dp.n - 1.0;
    let alpha = model.dp.alpha;
    let (my, ms) = (settings.radial_nodes, settings.sphere_nodes);
    let mut mass = 0.0;
    let c = converge_axes((my, ms), settings.max_nodes, settings.rel_tol, |my, ms| {
        let rule = SphereRule::with_exponents(sphere.weight(), &exps, ms)?;
        let leg = gauss_legendre(my)?;
        let mut terms = Vec::new();
        for win in knots.windows(2) {
            let (a, b) = (win[0], win[1]);
            let half = 0.5 * (b - a);
            for (&t, &wt) in leg.nodes.iter().zip(&leg.weights) {
                let y = a + half * (1.0 + t);
                let wy = wt * half * (1.0 - y * y).powf(beta) / alpha;
                for i in 0..rule.len() {
                    let theta = rule.point(i);
                    let (pole, pt) = model.point_of(y, theta)?;
                    let g = model.geometry_at_order(&pt, 1)?;
                    let fj = f.eval_jet(&model.input_jets_to_order(pole, &pt, 2)?);
                    let hj = h.eval_jet(&model.input_jets_to_order(pole, &pt, 1)?);
                    let v = hj.value() * g.s.l(&fj)? + g.s.gamma(&hj, &fj);
                    terms.push(wy * rule.weights[i] * v * charged_product(sphere, theta));
                }
            }
        }
        mass = compensated_sum(terms.iter().map(|t| t.abs()));
        Ok((compensated_sum(terms), mass))
    })?;
    Ok(IbpResidual {
        value: c.value,
        mass,
        nodes: c.nodes,
    })
}

/// Sphere integrals at fixed `y` of the `CD(alpha^2 (n-1), n)` defect on `S`,
/// with weight `f^{1-nu}` and without.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratedCd {
    pub weighted: f64,
    pub unweighted: f64,
}

/// `int (Gamma_2^S f - alpha^2 (n-1) Gamma_S f - (L_S f)^2/n) f^{1-nu} d mu_theta`
/// at fixed `y`, and the same with weight `1`.
///
/// `f` is an expression in `(y, theta)`; it must be positive, and even in
/// every charged `theta_i` for the integral to be finite when `A_i <= 1`.
pub fn integrated_cd_defect(
    model: &ModelS,
    f: &Expr,
    y: f64,
    nu: f64,
    settings: &QuadSettings,
) -> Result<IntegratedCd> {
    if !(nu > model.dp.n) {
        return Err(CknError::Domain(format!(
            "nu = {nu} must exceed n = {}",
            model.dp.n
        )));
    }
    let a2 = model.dp.alpha * model.dp.alpha;
    let n = model.dp.n;
    let sphere = &model.sphere;
    let m0 = settings.sphere_nodes;
    let (v, _, _) = converge_many(m0, settings.max_nodes, settings.rel_tol, |s| {
        let rule = SphereRule::new(sphere.weight(), m0 * s)?;
        let mut weighted = Vec::with_capacity(rule.len());
        let mut unweighted = Vec::with_capacity(rule.len());
        for i in 0..rule.len() {
            let (pole, pt) = model.point_of(y, rule.point(i))?;
            let fj = f.eval_jet(&model.input_jets(pole, &pt)?);
            if !(fj.value() > 0.0) {
                return Err(CknError::PositivityViolation(fj.value()));
            }
            let g = model.geometry_at(&pt)?;
            let t = rule.weights[i] * cd_density(&g.s, &fj, a2, n)?;
            unweighted.push(t);
            weighted.push(t * fj.value().powf(1.0 - nu));
        }
        let pair = |t: &[f64]| {
            (
                compensated_sum(t.iter().copied()),
                compensated_sum(t.iter().map(|x| x.abs())),
            )
        };
        Ok(vec![pair(&weighted), pair(&unweighted)])
    })?;
    Ok(IntegratedCd {
        weighted: v[0],
        unweighted: v[1],
    })
}

fn cd_density(g: &DiagonalGeometry, f: &Jet3, a2: f64, n: f64) -> Result<f64> {
    Ok(g.gamma2(f)? - a2 * (n - 1.0) * g.gamma(f, f) - g.l(f)?.powi(2) / n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::expr::random_polynomial;
    use crate::params::{derive, CknParams, MonomialWeight};
    use rand::SeedableRng;
    use rand_xoshiro::Xoshiro256PlusPlus;

    fn sphere(a: Vec<f64>) -> MonomialSphere {
        MonomialSphere::new(MonomialWeight::new(a).unwrap()).unwrap()
    }

    fn model_s(a: Vec<f64>, aa: f64, b: f64) -> ModelS {
        let p = CknParams::new(a, aa, b).unwrap();
        ModelS::new(derive(&p).unwrap(), p.weight).unwrap()
    }

    #[test]
    fn constants_have_no_defects() {
        let s = sphere(vec![1.0, 0.0, 0.0]);
        let c = Jet3::constant(&[0.4, 0.7], 3.0);
        assert_eq!(cd_sphere_defect(&s, &c).unwrap().value, 0.0);
        let h = hessian_w_bound_residual(&s, &c).unwrap();
        assert_eq!(h.identity_residual, 0.0);
        assert_eq!(h.bound_slack.unwrap().value, 0.0);
        let m = model_s(vec![1.0, 0.0], 0.0, 0.5);
        let c = Jet3::constant(&[0.2, 0.6], -1.0);
        assert_eq!(warped_identity_residual(&m, &c).unwrap(), 0.0);
    }

    #[test]
    fn linear_functions_on_round_sphere_are_cd_equality() {
        let s = sphere(vec![0.0, 0.0, 0.0]);
        for &(z0, z1) in &[(0.3, -0.5), (1.2, 0.4), (-1.7, 0.9)] {
            let p = super::super::models::SpherePoint {
                pole: super::super::models::Pole::North,
                z: vec![z0, z1],
            };
            let th = s.input_jets(&p).unwrap();
            let f = th[0].scale(0.3) + th[1].scale(-1.1) + th[2].scale(0.7);
            let d = cd_sphere_defect(&s, &f).unwrap();
            assert!(d.normalized().abs() < 1e-12, "{d:?}");
        }
    }

    #[test]
    fn hessian_matches_explicit_chart_formula() {
        let s = sphere(vec![1.0, 2.0, 0.0]);
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(3);
        for &(z0, z1) in &[(0.3, 0.5), (1.2, 0.4), (0.7, 1.9)] {
            let z = [z0, z1];
            let f = random_polynomial(&mut rng, 2, 3).eval_jet(&Jet3::variables(&z));
            let h = hessian_w_bound_residual(&s, &f).unwrap();
            // Explicit stereographic expression for the Hessian of W_theta.
            let phi = 0.5 * (1.0 + z0 * z0 + z1 * z1);
            let a = [1.0, 2.0];
            let grad2 = f.d1(0).powi(2) + f.d1(1).powi(2);
            let xg = z0 * f.d1(0) + z1 * f.d1(1);
            let sa: f64 = (0..2).map(|i| a[i] / z[i] * f.d1(i)).sum();
            let sa2: f64 = (0..2).map(|i| a[i] / (z[i] * z[i]) * f.d1(i).powi(2)).sum();
            let explicit = 3.0 * phi.powi(2) * grad2 + 3.0 * phi.powi(2) * xg * xg
                - 2.0 * phi.powi(3) * sa * xg
                + phi.powi(4) * sa2;
            assert!((h.hessian - explicit).abs() <= 1e-12 * explicit.abs().max(1.0));
            assert!(h.identity_residual < 1e-12);
            assert!(h.bound_slack.unwrap().normalized() > -1e-12);
        }
    }

    #[test]
    fn single_charge_makes_bound_tight() {
        let s = sphere(vec![2.0, 0.0, 0.0]);
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(5);
        for &(z0, z1) in &[(0.3, 0.5), (1.2, -0.4), (0.05, 1.3)] {
            let z = [z0, z1];
            let f = random_polynomial(&mut rng, 2, 3).eval_jet(&Jet3::variables(&z));
            let h = hessian_w_bound_residual(&s, &f).unwrap();
            assert!(h.bound_slack.unwrap().normalized().abs() < 1e-10);
        }
        let round = sphere(vec![0.0, 0.0, 0.0]);
        let f = Jet3::variable(&[0.2, 0.3], 0);
        assert!(hessian_w_bound_residual(&round, &f)
            .unwrap()
            .bound_slack
            .is_none());
    }

    #[test]
    fn warped_identity_for_y_and_polynomials() {
        let m = model_s(vec![1.0, 0.0], 0.0, 0.5);
        let pt = [0.35, 0.8];
        let y = Jet3::variable(&pt, 0);
        let t = warped_terms(&m, &y).unwrap();
        assert!(t.lhs.abs() < 1e-15 && t.residual() < 1e-14, "{t:?}");
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(11);
        for &(yy, zz) in &[(-0.7, 0.2), (0.1, 1.4), (0.9, 0.6)] {
            let p = [yy, zz];
            let f = random_polynomial(&mut rng, 2, 3).eval_jet(&Jet3::variables(&p));
            assert!(warped_identity_residual(&m, &f).unwrap() < 1e-12);
        }
    }

    #[test]
    fn sphere_ibp_examples() {
        let s = sphere(vec![1.0, 0.0]);
        let qs = QuadSettings {
            sphere_nodes: 16,
            ..QuadSettings::default()
        };
        let td = Expr::var(s.axis());
        let r = ibp_residual_sphere(&s, &td, &td, &qs).unwrap();
        assert!(r.residual() < 1e-10, "{r:?}");
        let h = Expr::var(0).powi(3) + (Expr::var(1) * 2.0).sin();
        let r = ibp_residual_sphere(&s, &Expr::c(1.0), &h, &qs).unwrap();
        assert!(r.residual() < 1e-10, "{r:?}");
    }

    #[test]
    fn zeta_k_is_a_smooth_cutoff() {
        for k in [2.5, 4.0, 10.0] {
            let z = zeta_k(k);
            let (mut max_d1, mut max_d2) = (0f64, 0f64);
            for i in 0..=4000 {
                let y = -1.0 + 2.0 * i as f64 / 4000.0;
                let j = z.eval_jet(&[Jet3::variable(&[y], 0)]);
                if (1.0 - y.abs()) <= 1.0 / k {
                    assert_eq!(j.value(), 0.0, "k = {k}, y = {y}");
                }
                if (1.0 - y.abs()) >= 2.0 / k {
                    assert_eq!(j.value(), 1.0, "k = {k}, y = {y}");
                }
                assert!((0.0..=1.0).contains(&j.value()));
                max_d1 = max_d1.max(j.d1(0).abs());
                max_d2 = max_d2.max(j.d2(0, 0).abs());
            }
            assert!(max_d1 <= 2.0 * k * (1.0 + 1e-12), "k = {k}: {max_d1}");
            // Any step over a length 1/k needs |zeta''| >= 4 k^2 somewhere.
            assert!(
                max_d2 >= 4.0 * k * k && max_d2 <= 10.0 * k * k,
                "k = {k}: {max_d2}"
            );
        }
    }

    #[test]
    fn s_ibp_with_cutoff() {
        let m = model_s(vec![1.0, 0.0], 0.0, 0.5);
        let qs = QuadSettings {
            radial_nodes: 16,
            sphere_nodes: 16,
            ..QuadSettings::default()
        };
        let sup = zeta_k_support(4.0);
        let r = ibp_residual_s(&m, &Expr::var(0), &zeta_k(4.0), &sup, &qs).unwrap();
        assert!(r.residual() < 1e-8, "{r:?}");
        let r = ibp_residual_s(&m, &Expr::var(0), &Expr::c(0.0), &sup, &qs).unwrap();
        assert_eq!(r.value, 0.0);
        // A function that does not vanish at the declared support ends.
        let bad = ibp_residual_s(&m, &Expr::var(0), &Expr::c(1.0), &sup, &qs);
        assert!(matches!(bad, Err(CknError::SupportViolation(_))));
    }

    #[test]
    fn integrated_cd_examples() {
        let m = model_s(vec![1.0, 0.0], 0.0, 0.5);
        let qs = QuadSettings {
            sphere_nodes: 16,
            ..QuadSettings::default()
        };
        let n = m.dp.n;
        let c = integrated_cd_defect(&m, &Expr::c(2.0), 0.0, n + 1.0, &qs).unwrap();
        assert_eq!((c.weighted, c.unweighted), (0.0, 0.0));
        let f = Expr::c(2.0) + Expr::var(1 + m.sphere.axis());
        let c = integrated_cd_defect(&m, &f, 0.0, n + 1.0, &qs).unwrap();
        assert!(c.weighted >= -1e-9 && c.unweighted >= -1e-9, "{c:?}");
        let neg = Expr::c(-1.0) + Expr::var(1);
        assert!(matches!(
            integrated_cd_defect(&m, &neg, 0.0, n + 1.0, &qs),
            Err(CknError::PositivityViolation(_))
        ));
        assert!(integrated_cd_defect(&m, &f, 0.0, n, &qs).is_err());
    }
}
