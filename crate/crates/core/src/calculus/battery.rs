//! Seeded random batteries over the pointwise and integrated checks.
//!
//! Samples are drawn sequentially from one generator, evaluated in parallel
//! and reduced in sample order, so a seed fixes every number reported here.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::checks::{
    cd_sphere_defect, hessian_w_bound_residual, ibp_residual_s, ibp_residual_sphere,
    integrated_cd_defect, warped_identity_residual, zeta_k, zeta_k_support,
};
use super::expr::{monomial_exponents, random_polynomial, random_trig_polynomial, Expr};
use super::jet::Jet3;
use super::models::{ModelS, MonomialSphere};
use crate::error::Result;
use crate::quadrature::QuadSettings;

/// Smallest and largest value seen by a battery; `None` when it drew no samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremes {
    pub samples: usize,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

impl Extremes {
    pub fn of(values: &[f64]) -> Self {
        let fold = |init: f64, pick: fn(f64, f64) -> f64| {
            values.iter().copied().reduce(pick).map(|v| pick(v, init))
        };
        Self {
            samples: values.len(),
            min: fold(f64::INFINITY, f64::min),
            max: fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// `min >= bound`, vacuously true when empty.
    pub fn min_at_least(&self, bound: f64) -> bool {
        self.min.is_none_or(|m| m >= bound)
    }

    /// `max <= bound`, vacuously true when empty.
    pub fn max_at_most(&self, bound: f64) -> bool {
        self.max.is_none_or(|m| m <= bound)
    }
}

fn rng(seed: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

fn evaluate<T: Sync, F>(samples: &[T], f: F) -> Result<Vec<f64>>
where
    F: Fn(&T) -> Result<f64> + Sync + Send,
{
    samples.par_iter().map(f).collect()
}

/// North-chart point with charged coordinates in `(0.05, 2)` and the others
/// in `(-2, 2)`.
pub(crate) fn chart_point<R: Rng>(rng: &mut R, sphere: &MonomialSphere) -> Vec<f64> {
    (0..sphere.chart_dim())
        .map(|j| {
            if sphere.weight().is_charged(sphere.ambient_index(j)) {
                rng.random_range(0.05..2.0)
            } else {
                rng.random_range(-2.0..2.0)
            }
        })
        .collect()
}

/// Normalized `CD(D-2, D-1)` defects of random cubic polynomials in the chart.
pub fn cd_defect_battery(sphere: &MonomialSphere, samples: usize, seed: u64) -> Result<Extremes> {
    let mut r = rng(seed);
    let draws: Vec<(Vec<f64>, Expr)> = (0..samples)
        .map(|_| {
            let z = chart_point(&mut r, sphere);
            (z, random_polynomial(&mut r, sphere.chart_dim(), 3))
        })
        .collect();
    let v = evaluate(&draws, |(z, f)| {
        let j = f.eval_jet(&Jet3::variables(z));
        Ok(cd_sphere_defect(sphere, &j)?.normalized())
    })?;
    Ok(Extremes::of(&v))
}

/// Residuals of the warped decomposition for random cubics in `(y, z)`.
pub fn warped_identity_battery(model: &ModelS, samples: usize, seed: u64) -> Result<Extremes> {
    let mut r = rng(seed);
    let draws: Vec<(Vec<f64>, Expr)> = (0..samples)
        .map(|_| {
            let mut p = vec![r.random_range(-0.95..0.95)];
            p.extend(chart_point(&mut r, &model.sphere));
            (p, random_polynomial(&mut r, model.frame_dim(), 3))
        })
        .collect();
    let v = evaluate(&draws, |(p, f)| {
        warped_identity_residual(model, &f.eval_jet(&Jet3::variables(p)))
    })?;
    Ok(Extremes::of(&v))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HessianSummary {
    pub identity_residual: Extremes,
    /// Normalized slack of the convexity bound; empty when `|A| = 0`.
    pub bound_slack: Extremes,
}

pub fn hessian_bound_battery(
    sphere: &MonomialSphere,
    samples: usize,
    seed: u64,
) -> Result<HessianSummary> {
    let mut r = rng(seed);
    let draws: Vec<(Vec<f64>, Expr)> = (0..samples)
        .map(|_| {
            let z = chart_point(&mut r, sphere);
            (z, random_polynomial(&mut r, sphere.chart_dim(), 3))
        })
        .collect();
    let out: Vec<_> = draws
        .par_iter()
        .map(|(z, f)| hessian_w_bound_residual(sphere, &f.eval_jet(&Jet3::variables(z))))
        .collect::<Result<_>>()?;
    let ident: Vec<f64> = out.iter().map(|h| h.identity_residual).collect();
    let slack: Vec<f64> = out
        .iter()
        .filter_map(|h| h.bound_slack.map(|d| d.normalized()))
        .collect();
    Ok(HessianSummary {
        identity_residual: Extremes::of(&ident),
        bound_slack: Extremes::of(&slack),
    })
}

/// Positive trigonometric polynomial in `(y, theta)`, even in every charged
/// `theta_i`, with values in `[0.1, 1.9]`.
pub fn random_positive_even_function<R: Rng>(rng: &mut R, sphere: &MonomialSphere) -> Expr {
    let nvars = 1 + sphere.d();
    let degree = 1;
    let terms = monomial_exponents(nvars, degree).len() as f64;
    let g = random_trig_polynomial(rng, nvars, degree, 0.9 / (2.0 * terms));
    let w = sphere.weight().clone();
    let g = g.substitute(&|i| {
        if i > 0 && w.is_charged(i - 1) {
            Expr::var(i).powi(2)
        } else {
            Expr::var(i)
        }
    });
    g + 1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratedCdSummary {
    pub weighted: Extremes,
    pub unweighted: Extremes,
}

/// Integrated CD defects at random `y` and `nu > n` for random positive
/// functions.
pub fn integrated_cd_battery(
    model: &ModelS,
    samples: usize,
    seed: u64,
    settings: &QuadSettings,
) -> Result<IntegratedCdSummary> {
    let mut r = rng(seed);
    let n = model.dp.n;
    let draws: Vec<(Expr, f64, f64)> = (0..samples)
        .map(|_| {
            let f = random_positive_even_function(&mut r, &model.sphere);
            let y = r.random_range(-0.9..0.9);
            let nu = n + r.random_range(0.5..3.0);
            (f, y, nu)
        })
        .collect();
    let out: Vec<_> = draws
        .par_iter()
        .map(|(f, y, nu)| integrated_cd_defect(model, f, *y, *nu, settings))
        .collect::<Result<_>>()?;
    let w: Vec<f64> = out.iter().map(|c| c.weighted).collect();
    let u: Vec<f64> = out.iter().map(|c| c.unweighted).collect();
    Ok(IntegratedCdSummary {
        weighted: Extremes::of(&w),
        unweighted: Extremes::of(&u),
    })
}

/// `|int (f L h + Gamma(f, h))|` on the sphere for random trigonometric `f`, `h`.
pub fn ibp_sphere_battery(
    sphere: &MonomialSphere,
    samples: usize,
    seed: u64,
    settings: &QuadSettings,
) -> Result<Extremes> {
    let mut r = rng(seed);
    let d = sphere.d();
    let draws: Vec<(Expr, Expr)> = (0..samples)
        .map(|_| {
            (
                random_trig_polynomial(&mut r, d, 2, 1.0),
                random_trig_polynomial(&mut r, d, 2, 1.0),
            )
        })
        .collect();
    let v = evaluate(&draws, |(f, h)| {
        Ok(ibp_residual_sphere(sphere, f, h, settings)?.residual())
    })?;
    Ok(Extremes::of(&v))
}

/// `|int (h L_S f + Gamma_S(h, f))|` for quadratic `f` and separable
/// `h = zeta_k(y) g(theta)`.
pub fn ibp_s_battery(
    model: &ModelS,
    samples: usize,
    seed: u64,
    settings: &QuadSettings,
) -> Result<Extremes> {
    let mut r = rng(seed);
    let d = model.sphere.d();
    let draws: Vec<(Expr, Expr, f64)> = (0..samples)
        .map(|_| {
            let f = random_polynomial(&mut r, 1 + d, 2);
            let k = r.random_range(3..=6) as f64;
            let g = random_trig_polynomial(&mut r, d, 1, 1.0).substitute(&|i| Expr::var(i + 1));
            (f, zeta_k(k) * g, k)
        })
        .collect();
    let v = evaluate(&draws, |(f, h, k)| {
        Ok(ibp_residual_s(model, f, h, &zeta_k_support(*k), settings)?.residual())
    })?;
    Ok(Extremes::of(&v))
}
