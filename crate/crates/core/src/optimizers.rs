//! The extremal family on both models, the two sides of the inequalities it
//! saturates, and the conformal transport between `E` and `S`.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::{
    random_polynomial, random_trig_polynomial, y_of_r, Expr, Jet3, ModelE, ModelS,
};
use crate::error::{CknError, Result};
use crate::linalg::compensated_sum;
use crate::params::{CknParams, DerivedParams};
use crate::quadrature::{
    converge_many, integrate_radial, integrate_radial_with_decay, ProductRuleS, QuadSettings,
};
use crate::special::{optimal_constant, sphere_weight_area};

/// `f(x) = (s + t |x|^{2 alpha})^{-(n-2)/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerE {
    pub s: f64,
    pub t: f64,
    pub dp: DerivedParams,
}

/// `v(y) = (C + B y)^{-(n-2)/2}` on the compactified model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerS {
    pub c: f64,
    pub b: f64,
    pub dp: DerivedParams,
}

impl OptimizerE {
    pub fn new(s: f64, t: f64, dp: DerivedParams) -> Result<Self> {
        if !(s > 0.0 && t > 0.0 && s.is_finite() && t.is_finite()) {
            return Err(CknError::Domain(format!(
                "optimizer needs s, t > 0, got s = {s}, t = {t}"
            )));
        }
        Ok(Self { s, t, dp })
    }

    fn exponent(&self) -> f64 {
        -0.5 * (self.dp.n - 2.0)
    }

    pub fn value(&self, r: f64) -> f64 {
        (self.s + self.t * r.powf(2.0 * self.dp.alpha)).powf(self.exponent())
    }

    /// Radial profile as an expression in `r` (variable 0).
    pub fn profile(&self) -> Expr {
        (Expr::var(0).powf(2.0 * self.dp.alpha) * self.t + self.s).powf(self.exponent())
    }

    /// Order-3 jet at an ambient point.
    pub fn jet_at(&self, x: &[f64]) -> Jet3 {
        let v = Jet3::variables(x);
        let r2 = v
            .iter()
            .map(|c| *c * *c)
            .reduce(|a, b| a + b)
            .expect("empty point");
        (r2.powf(self.dp.alpha) * self.t + self.s).powf(self.exponent())
    }

    /// Image under the conformal map: `C = s + t`, `B = t - s`.
    pub fn to_s(&self) -> OptimizerS {
        OptimizerS {
            c: self.s + self.t,
            b: self.t - self.s,
            dp: self.dp,
        }
    }
}

impl OptimizerS {
    pub fn new(c: f64, b: f64, dp: DerivedParams) -> Result<Self> {
        if !(c > b.abs() && c.is_finite()) {
            return Err(CknError::Domain(format!(
                "optimizer needs C > |B|, got C = {c}, B = {b}"
            )));
        }
        Ok(Self { c, b, dp })
    }

    /// `C = cosh(eta)`, `B = sinh(eta)`, so that `C^2 - B^2 = 1`.
    pub fn normalized(eta: f64, dp: DerivedParams) -> Self {
        Self {
            c: eta.cosh(),
            b: eta.sinh(),
            dp,
        }
    }

    pub fn normalization_defect(&self) -> f64 {
        self.c * self.c - self.b * self.b - 1.0
    }

    pub fn phi(&self, y: f64) -> f64 {
        self.c + self.b * y
    }

    pub fn value(&self, y: f64) -> f64 {
        self.phi(y).powf(-0.5 * (self.dp.n - 2.0))
    }

    /// `Phi = C + B y` as an expression in `y` (variable 0).
    pub fn phi_expr(&self) -> Expr {
        Expr::var(0) * self.b + self.c
    }

    pub fn expr(&self) -> Expr {
        self.phi_expr().powf(-0.5 * (self.dp.n - 2.0))
    }

    pub fn to_e(&self) -> OptimizerE {
        OptimizerE {
            s: 0.5 * (self.c - self.b),
            t: 0.5 * (self.c + self.b),
            dp: self.dp,
        }
    }
}

/// `phi_E^{(n-2)/2}` with `phi_E = (1 + r^{2 alpha})/2 = 1/(1 - y)`.
fn conformal_weight(y: f64, dp: &DerivedParams) -> f64 {
    (1.0 - y).powf(-0.5 * (dp.n - 2.0))
}

fn polar(x: &[f64]) -> (f64, Vec<f64>) {
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    (r, x.iter().map(|v| v / r).collect())
}

/// `F(y, theta) = f(r(y) theta) phi_E^{(n-2)/2}`, which preserves `int |.|^p`.
pub fn conformal_e_to_s<'a>(
    dp: &'a DerivedParams,
    f: impl Fn(&[f64]) -> f64 + 'a,
) -> impl Fn(f64, &[f64]) -> f64 + 'a {
    move |y, theta| {
        let r = crate::calculus::r_of_y(y, dp.alpha);
        let x: Vec<f64> = theta.iter().map(|t| r * t).collect();
        f(&x) * conformal_weight(y, dp)
    }
}

/// Inverse of [`conformal_e_to_s`].
pub fn conformal_s_to_e<'a>(
    dp: &'a DerivedParams,
    big_f: impl Fn(f64, &[f64]) -> f64 + 'a,
) -> impl Fn(&[f64]) -> f64 + 'a {
    move |x| {
        let (r, theta) = polar(x);
        let phi_e = 0.5 * (1.0 + r.powf(2.0 * dp.alpha));
        big_f(y_of_r(r, dp.alpha), &theta) * phi_e.powf(-0.5 * (dp.n - 2.0))
    }
}

/// Both sides of the weighted CKN inequality for a radial function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CknSides {
    /// `(int |f|^p |x|^{-bp} x^A dx)^{2/p}`.
    pub lhs: f64,
    /// `int |grad f|^2 |x|^{-2a} x^A dx`.
    pub rhs: f64,
    pub ratio: f64,
}

/// CKN sides for the radial profile `f(r)`, given as an expression in `r`.
///
/// In polar coordinates both integrals are the weighted sphere area times a
/// radial integral against `r^{alpha n - 1} dr`; the gradient side carries the
/// extra factor `r^{2 - 2 alpha}`. The quadrature is tuned to profiles that
/// decay like the optimizers, `f = O(r^{-alpha (n-2)})`.
pub fn ckn_sides(
    f: &Expr,
    params: &CknParams,
    dp: &DerivedParams,
    settings: &QuadSettings,
) -> Result<CknSides> {
    let area = sphere_weight_area(&params.weight)?;
    let jet = |r: f64| f.eval_jet(&[Jet3::variable(&[r], 0)]);
    let p = dp.p;
    let lp = integrate_radial(|r| f.eval(&[r]).abs().powf(p), dp.alpha, dp.n, settings)?;
    let grad = integrate_radial_with_decay(
        |r| jet(r).d1(0).powi(2) * r.powf(2.0 - 2.0 * dp.alpha),
        dp.alpha,
        dp.n,
        0.5 * dp.n - 2.0,
        settings,
    )?;
    let lhs = (area * lp.value).powf(2.0 / p);
    let rhs = area * grad.value;
    Ok(CknSides {
        lhs,
        rhs,
        ratio: lhs / rhs,
    })
}

/// Relative residual of `-L_E f = alpha^2 n (n-2) s t f^{p-1}` at `x`,
/// measured against the largest of the two sides and the term magnitudes of
/// `L_E f`, which cancel far from `|x| = 1` when `alpha` is large.
///
/// Dilating `u = phi_E^{-(n-2)/2}`, which solves the equation with constant
/// `alpha^2 n (n-2)/4`, gives the `(s, t)` family with the factor `4 s t`.
pub fn euler_lagrange_residual(opt: &OptimizerE, model: &ModelE, x: &[f64]) -> Result<f64> {
    let f = opt.jet_at(x);
    let lf = model.l(&f)?;
    let dp = &opt.dp;
    let rhs = dp.alpha_sq * dp.n * (dp.n - 2.0) * opt.s * opt.t * f.value().powf(dp.p - 1.0);
    let scale = model.l_scale(&f)?;
    Ok((-lf - rhs).abs() / rhs.abs().max(lf.abs()).max(scale))
}

/// Both sides of the tight Sobolev inequality on `(S, mu_S / Z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TightSides {
    /// `||F||_p^2`.
    pub lhs: f64,
    /// `A_p int Gamma_S(F) + ||F||_2^2`.
    pub rhs: f64,
    /// Total mass used for the normalization (quadrature of `mu_S(S)`).
    pub mass: f64,
}

/// Tight Sobolev sides for `F`, an expression in `(y, theta_1, ..., theta_d)`.
pub fn tight_sobolev_sides(
    model: &ModelS,
    f: &Expr,
    settings: &QuadSettings,
) -> Result<TightSides> {
    let dp = &model.dp;
    let weight = model.sphere.weight();
    if !matches!(weight.d(), 2 | 3) {
        return Err(CknError::UnsupportedDimension(weight.d()));
    }
    let p = dp.p;
    let (my, ms) = (settings.radial_nodes, settings.sphere_nodes);
    let (v, _, _) = converge_many(my.max(ms), settings.max_nodes, settings.rel_tol, |s| {
        let rule = ProductRuleS::new(dp, weight, my * s, ms * s)?;
        let mut nodes = Vec::with_capacity(rule.len());
        rule.for_each(|y, th, w| nodes.push((y, th.to_vec(), w)));
        let vals: Vec<[f64; 4]> = nodes
            .par_iter()
            .map(|(y, th, w)| {
                let mut x = Vec::with_capacity(th.len() + 1);
                x.push(*y);
                x.extend_from_slice(th);
                let (v, grad) = f.eval_grad(&x);
                let g = model.gamma_ambient(*y, th, &grad);
                Ok([w * v.abs().powf(p), w * v * v, w * g, *w])
            })
            .collect::<Result<_>>()?;
        Ok((0..4)
            .map(|k| {
                let s = compensated_sum(vals.iter().map(|t| t[k]));
                let m = compensated_sum(vals.iter().map(|t| t[k].abs()));
                (s, m)
            })
            .collect())
    })?;
    let (lp, l2, energy, mass) = (v[0] / v[3], v[1] / v[3], v[2] / v[3], v[3]);
    Ok(TightSides {
        lhs: lp.powf(2.0 / p),
        rhs: dp.tight_constant() * energy + l2,
        mass,
    })
}

/// `|Phi L_S Phi - (n/2) Gamma_S(Phi) - (n alpha^2/2)(1 - Phi^2)|` at `y`,
/// evaluated through the operators of `S`. For every `(C, B)` it equals
/// `(n alpha^2 / 2) |C^2 - B^2 - 1|`.
pub fn phi_identity_residual(v: &OptimizerS, model: &ModelS, y: f64) -> Result<f64> {
    let theta = axis_point(model);
    let (pole, pt) = model.point_of(y, &theta)?;
    let phi = v.phi_expr().eval_jet(&model.input_jets(pole, &pt)?);
    let g = model.geometry_at(&pt)?;
    let (n, a2) = (model.dp.n, model.dp.alpha_sq);
    let val = phi.value() * g.s.l(&phi)?
        - 0.5 * n * g.s.gamma(&phi, &phi)
        - 0.5 * n * a2 * (1.0 - phi.value().powi(2));
    Ok(val.abs())
}

/// A sphere point inside the charged orthant, away from both poles.
fn axis_point(model: &ModelS) -> Vec<f64> {
    let d = model.sphere.d();
    vec![1.0 / (d as f64).sqrt(); d]
}

/// Outcome of the chamber-splitting comparison `||m||_{p/2} <= ||m||_1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeylCheck {
    pub l1: f64,
    pub lp2: f64,
    /// At most one chamber carries mass (entries at most `1e-14` of the largest
    /// count as empty).
    pub equality: bool,
}

pub fn weyl_extension_check(masses: &[f64], p: f64) -> Result<WeylCheck> {
    if !(p > 2.0) {
        return Err(CknError::Domain(format!("p = {p} must exceed 2")));
    }
    for (index, &value) in masses.iter().enumerate() {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(CknError::NegativeMass { index, value });
        }
    }
    let max = masses.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return Ok(WeylCheck {
            l1: 0.0,
            lp2: 0.0,
            equality: true,
        });
    }
    let q = 0.5 * p;
    let l1 = compensated_sum(masses.iter().copied());
    let lp2 = max * compensated_sum(masses.iter().map(|m| (m / max).powf(q))).powf(1.0 / q);
    let occupied = masses.iter().filter(|&&m| m > 1e-14 * max).count();
    Ok(WeylCheck {
        l1,
        lp2,
        equality: occupied <= 1,
    })
}

/// Largest excesses over the sharp bounds in a perturbation battery.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SharpnessSummary {
    pub samples: usize,
    pub c_opt: f64,
    /// `max (ratio - C_opt)` over radial perturbations on `E`.
    pub max_ratio_excess: Option<f64>,
    /// `max (lhs - rhs)` of the tight inequality over perturbations on `S`;
    /// `None` when the S-side battery is skipped.
    pub max_tight_excess: Option<f64>,
}

/// Radial perturbation `f (1 + eps T(y(r)))` of an optimizer, with `T` a
/// trigonometric polynomial of sup norm at most one.
pub fn perturbed_radial<R: Rng>(rng: &mut R, dp: &DerivedParams) -> Expr {
    let s = rng.random_range(0.2..5.0);
    let t = rng.random_range(0.2..5.0);
    let opt = OptimizerE { s, t, dp: *dp };
    let eps = rng.random_range(0.01..0.4);
    let r2a = Expr::var(0).powf(2.0 * dp.alpha);
    let y = (r2a.clone() - 1.0) / (r2a + 1.0);
    let bump = random_trig_polynomial(rng, 1, 3, 1.0 / 14.0)
        .substitute(&|_| y.clone() * std::f64::consts::PI);
    opt.profile() * (bump * eps + 1.0)
}

/// Perturbation on `S` of a normalized optimizer by a bounded bump in `y`
/// plus a separable product `h(y) g(theta)`, relative so that it stays positive.
/// `h` carries a factor `1 - y^2` so the product is smooth at the poles.
pub fn perturbed_s<R: Rng>(rng: &mut R, model: &ModelS) -> Expr {
    let d = model.sphere.d();
    let v = OptimizerS::normalized(rng.random_range(-1.0..1.0), model.dp);
    let eps = rng.random_range(0.01..0.3);
    let bump = random_trig_polynomial(rng, 1, 2, 1.0 / 10.0);
    let y = Expr::var(0);
    let h = random_polynomial(rng, 1, 2) * (-(y.clone() * y) + 1.0) * (1.0 / 6.0);
    let g = random_trig_polynomial(rng, d, 1, 1.0 / ((2 * (d + 1)) as f64))
        .substitute(&|i| Expr::var(i + 1));
    v.expr() * ((bump + h * g) * eps + 1.0)
}

/// Seeded sharpness battery: radial perturbations through [`ckn_sides`] and,
/// when `tight` is set, perturbations on `S` through [`tight_sobolev_sides`].
pub fn sharpness_battery(
    params: &CknParams,
    dp: &DerivedParams,
    samples: usize,
    seed: u64,
    tight: bool,
    settings: &QuadSettings,
) -> Result<SharpnessSummary> {
    let c_opt = optimal_constant(params, dp)?.value;
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let radial: Vec<Expr> = (0..samples)
        .map(|_| perturbed_radial(&mut rng, dp))
        .collect();
    let model = ModelS::new(*dp, params.weight.clone())?;
    let s_side: Vec<Expr> = if tight {
        (0..samples)
            .map(|_| perturbed_s(&mut rng, &model))
            .collect()
    } else {
        Vec::new()
    };
    let ratios: Vec<f64> = radial
        .par_iter()
        .map(|f| Ok(ckn_sides(f, params, dp, settings)?.ratio - c_opt))
        .collect::<Result<_>>()?;
    let tight_ex: Vec<f64> = s_side
        .iter()
        .map(|f| tight_sobolev_sides(&model, f, settings).map(|t| t.lhs - t.rhs))
        .collect::<Result<_>>()?;
    Ok(SharpnessSummary {
        samples,
        c_opt,
        max_ratio_excess: ratios.into_iter().reduce(f64::max),
        max_tight_excess: tight_ex.into_iter().reduce(f64::max),
    })
}
