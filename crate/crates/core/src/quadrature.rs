//! Deterministic quadrature for the singular weighted measures on `E`, `S`
//! and the monomial sphere.
//!
//! Every endpoint singularity is absorbed into a Gauss-Jacobi weight, so the
//! remaining integrands are analytic and node doubling converges fast.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{CknError, Result};
use crate::linalg::{compensated_sum, tridiagonal_eigenvalues};
use crate::params::{DerivedParams, MonomialWeight};
use crate::special::log_gamma;

/// Measure a 1D rule integrates exactly on `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Measure {
    Legendre,
    /// `(1-t)^{beta_right} (1+t)^{beta_left} dt`.
    Jacobi {
        beta_left: f64,
        beta_right: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule1D {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub measure: Measure,
}

impl QuadratureRule1D {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `sum_i w_i f(t_i)`, summed in node order.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        compensated_sum(
            self.nodes
                .iter()
                .zip(&self.weights)
                .map(|(&t, &w)| w * f(t)),
        )
    }
}

/// Doubling schedule and tolerance shared by every integrator here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadSettings {
    pub radial_nodes: usize,
    pub sphere_nodes: usize,
    pub max_nodes: usize,
    pub rel_tol: f64,
}

impl Default for QuadSettings {
    fn default() -> Self {
        Self {
            radial_nodes: 32,
            sphere_nodes: 32,
            max_nodes: 512,
            rel_tol: 1e-10,
        }
    }
}

/// Result of a doubling sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Converged {
    pub value: f64,
    /// Node count (per axis, relative to the first axis) of the accepted value.
    pub nodes: usize,
    pub rel_change: f64,
}

/// Runs `eval(scale)` for `scale = 1, 2, 4, ...` until two consecutive values
/// agree to `rel_tol`.
///
/// `eval` returns the integral and its absolute mass `sum |w f|`; the change
/// is measured against the larger of `|value|` and that mass, which keeps
/// integrals that vanish by symmetry from looping forever.
pub fn converge(
    start_nodes: usize,
    max_nodes: usize,
    rel_tol: f64,
    mut eval: impl FnMut(usize) -> Result<(f64, f64)>,
) -> Result<Converged> {
    let (values, nodes, rel_change) =
        converge_many(start_nodes, max_nodes, rel_tol, |s| Ok(vec![eval(s)?]))?;
    Ok(Converged {
        value: values[0],
        nodes,
        rel_change,
    })
}

/// [`converge`] for several integrals sharing one rule; every component must
/// settle. Returns the values, the node count and the largest last change.
pub fn converge_many(
    start_nodes: usize,
    max_nodes: usize,
    rel_tol: f64,
    mut eval: impl FnMut(usize) -> Result<Vec<(f64, f64)>>,
) -> Result<(Vec<f64>, usize, f64)> {
    if start_nodes == 0 {
        return Err(CknError::Domain("start node count must be positive".into()));
    }
    let mut prev: Vec<f64> = eval(1)?.into_iter().map(|(v, _)| v).collect();
    for &v in &prev {
        check_finite(v)?;
    }
    let mut scale = 2;
    let mut last_change = f64::INFINITY;
    while start_nodes * scale <= max_nodes {
        let cur = eval(scale)?;
        let mut change = 0.0f64;
        for (&(value, mass), &p) in cur.iter().zip(&prev) {
            check_finite(value)?;
            let denom = value.abs().max(mass);
            if denom > 0.0 {
                change = change.max((value - p).abs() / denom);
            }
        }
        let values: Vec<f64> = cur.into_iter().map(|(v, _)| v).collect();
        if change <= rel_tol {
            return Ok((values, start_nodes * scale, change));
        }
        last_change = change;
        prev = values;
        scale *= 2;
    }
    Err(CknError::NonConvergence {
        nodes: start_nodes * scale / 2,
        rel_change: last_change,
    })
}

/// Two-axis doubling. Each pass refines one axis at a time with the other
/// fixed; an axis counts as settled when one more doubling changes the value
/// by at most `rel_tol`, and its accepted count stays at the coarser level so
/// that the other axis is validated against it. Stops after a pass in which
/// neither axis moved. `eval(m1, m2)` returns the integral and its mass and is
/// called at most once per node pair; the returned node count is the first
/// axis's.
pub fn converge_axes(
    start: (usize, usize),
    max_nodes: usize,
    rel_tol: f64,
    mut eval: impl FnMut(usize, usize) -> Result<(f64, f64)>,
) -> Result<Converged> {
    let mut m = [start.0, start.1];
    if m[0] == 0 || m[1] == 0 {
        return Err(CknError::Domain("start node count must be positive".into()));
    }
    let mut cache: Vec<((usize, usize), (f64, f64))> = Vec::new();
    let mut at = |m1: usize, m2: usize| -> Result<(f64, f64)> {
        if let Some(&(_, r)) = cache.iter().find(|(k, _)| *k == (m1, m2)) {
            return Ok(r);
        }
        let r = eval(m1, m2)?;
        check_finite(r.0)?;
        cache.push(((m1, m2), r));
        Ok(r)
    };
    let mut value = at(m[0], m[1])?.0;
    let mut last_change = f64::INFINITY;
    loop {
        let mut moved = false;
        for axis in 0..2 {
            loop {
                let mut n = m;
                n[axis] *= 2;
                if n[axis] > max_nodes {
                    return Err(CknError::NonConvergence {
                        nodes: m[axis],
                        rel_change: last_change,
                    });
                }
                let (next, mass) = at(n[0], n[1])?;
                let denom = next.abs().max(mass);
                let change = if denom > 0.0 {
                    (next - value).abs() / denom
                } else {
                    0.0
                };
                value = next;
                last_change = change;
                if change <= rel_tol {
                    break;
                }
                m = n;
                moved = true;
            }
        }
        if !moved {
            return Ok(Converged {
                value,
                nodes: m[0],
                rel_change: last_change,
            });
        }
    }
}

fn check_finite(v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(CknError::NonFinite("quadrature sum"))
    }
}

fn check_exponent(beta: f64) -> Result<()> {
    if !(beta > -1.0) || !beta.is_finite() {
        return Err(CknError::Domain(format!(
            "Jacobi exponent must exceed -1, got {beta}"
        )));
    }
    Ok(())
}

/// Recurrence of the orthonormal Jacobi polynomials for
/// `(1-t)^a (1+t)^b`: diagonal `a_k`, off-diagonal `b_k` (k >= 1), and `ln mu_0`.
struct JacobiRecurrence {
    diag: Vec<f64>,
    off: Vec<f64>,
    log_mu0: f64,
}

fn jacobi_recurrence(m: usize, a: f64, b: f64) -> Result<JacobiRecurrence> {
    let ab = a + b;
    let mut diag = Vec::with_capacity(m + 1);
    let mut off = Vec::with_capacity(m + 1);
    off.push(0.0);
    for k in 0..=m {
        let kf = k as f64;
        let s = 2.0 * kf + ab;
        let ak = if k == 0 {
            (b - a) / (ab + 2.0)
        } else {
            (b * b - a * a) / (s * (s + 2.0))
        };
        diag.push(ak);
        if k >= 1 {
            let bk2 = if k == 1 {
                4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab).powi(2) * (3.0 + ab))
            } else {
                4.0 * kf * (kf + a) * (kf + b) * (kf + ab) / (s * s * (s + 1.0) * (s - 1.0))
            };
            off.push(bk2.sqrt());
        }
    }
    let log_mu0 = (ab + 1.0) * std::f64::consts::LN_2 + log_gamma(a + 1.0)? + log_gamma(b + 1.0)?
        - log_gamma(ab + 2.0)?;
    Ok(JacobiRecurrence { diag, off, log_mu0 })
}

impl JacobiRecurrence {
    /// `(p_m(x), p_m'(x), sum_{k<m} p_k(x)^2)` for the orthonormal family.
    fn eval(&self, m: usize, x: f64) -> (f64, f64, f64) {
        let p0 = (-0.5 * self.log_mu0).exp();
        let (mut p_prev, mut p) = (0.0, p0);
        let (mut d_prev, mut d) = (0.0, 0.0);
        let mut sum_sq = 0.0;
        for k in 0..m {
            sum_sq += p * p;
            let bk = self.off[k];
            let bk1 = self.off[k + 1];
            let p_next = ((x - self.diag[k]) * p - bk * p_prev) / bk1;
            let d_next = (p + (x - self.diag[k]) * d - bk * d_prev) / bk1;
            p_prev = p;
            p = p_next;
            d_prev = d;
            d = d_next;
        }
        (p, d, sum_sq)
    }
}

/// Gauss-Jacobi rule with `m` nodes for `(1-t)^{beta_right} (1+t)^{beta_left}`.
///
/// Nodes come from the Jacobi matrix eigenvalues, are polished by Newton on
/// the orthonormal recurrence, and weights are the Christoffel numbers.
pub fn gauss_jacobi(m: usize, beta_left: f64, beta_right: f64) -> Result<QuadratureRule1D> {
    check_exponent(beta_left)?;
    check_exponent(beta_right)?;
    if m == 0 {
        return Err(CknError::Domain(
            "a Gauss rule needs at least one node".into(),
        ));
    }
    let rec = jacobi_recurrence(m, beta_right, beta_left)?;
    let mut nodes = tridiagonal_eigenvalues(&rec.diag[..m], &rec.off[1..m])?;
    let mut weights = Vec::with_capacity(m);
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (p, dp, _) = rec.eval(m, *x);
            if dp == 0.0 {
                break;
            }
            let step = p / dp;
            let next = *x - step;
            if !(next > -1.0 && next < 1.0) {
                break;
            }
            *x = next;
            if step.abs() <= 1e-16 * x.abs().max(1e-300) {
                break;
            }
        }
        let (_, _, sum_sq) = rec.eval(m, *x);
        weights.push(1.0 / sum_sq);
    }
    if nodes.windows(2).any(|w| w[0] >= w[1]) || nodes.iter().any(|&x| !(x > -1.0 && x < 1.0)) {
        return Err(CknError::IllConditioned(format!(
            "Gauss-Jacobi nodes not strictly inside (-1, 1) for m = {m}"
        )));
    }
    let measure = if beta_left == 0.0 && beta_right == 0.0 {
        Measure::Legendre
    } else {
        Measure::Jacobi {
            beta_left,
            beta_right,
        }
    };
    Ok(QuadratureRule1D {
        nodes,
        weights,
        measure,
    })
}

pub fn gauss_legendre(m: usize) -> Result<QuadratureRule1D> {
    gauss_jacobi(m, 0.0, 0.0)
}

/// One node of the radial rule for `r^{alpha n - 1} dr` on `(0, inf)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialNode {
    pub r: f64,
    /// Compactified coordinate `y = (r^{2a} - 1)/(r^{2a} + 1)`.
    pub y: f64,
    pub log_weight: f64,
}

/// Rule for `int_0^inf f(r) r^{alpha n - 1} dr` with `2m` nodes.
///
/// The substitution `y = (r^{2 alpha} - 1)/(r^{2 alpha} + 1)` gives
/// `(1/alpha) (1 + y)^{n/2 - 1} (1 - y)^{-n/2 - 1} dy`; the two halves
/// `y < 0` and `y > 0` get separate Jacobi rules so that a jump at `r = 1`
/// costs nothing. The right rule carries `(1 - y)^{beta_right}`, which should
/// match the decay of `f r^{alpha n}` at infinity: `n/2 - 1` when
/// `f = O(r^{-2 alpha n})`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialRule {
    pub nodes: Vec<RadialNode>,
}

impl RadialRule {
    pub fn new(alpha: f64, n: f64, m: usize) -> Result<Self> {
        Self::with_decay(alpha, n, 0.5 * n - 1.0, m)
    }

    pub fn with_decay(alpha: f64, n: f64, beta_right: f64, m: usize) -> Result<Self> {
        if !(alpha > 0.0) || !(n > 2.0) {
            return Err(CknError::Domain(format!(
                "radial rule needs alpha > 0 and n > 2, got alpha = {alpha}, n = {n}"
            )));
        }
        let beta = 0.5 * n - 1.0;
        let tail = -0.5 * n - 1.0;
        let left = gauss_jacobi(m, beta, 0.0)?;
        let right = gauss_jacobi(m, 0.0, beta_right)?;
        let base = |b: f64| -alpha.ln() - (b + 1.0) * std::f64::consts::LN_2;
        let mut nodes = Vec::with_capacity(2 * m);
        for (&t, &w) in left.nodes.iter().zip(&left.weights) {
            // y = (t - 1)/2, 1 + y = (1 + t)/2.
            let one_plus = 0.5 * (1.0 + t);
            let one_minus = 1.0 + 0.5 * (1.0 - t);
            let lw = base(beta) + w.ln() + tail * one_minus.ln();
            nodes.push(radial_node(alpha, one_plus, one_minus, false, lw));
        }
        for (&t, &w) in right.nodes.iter().zip(&right.weights) {
            let one_minus = 0.5 * (1.0 - t);
            let one_plus = 1.0 + 0.5 * (1.0 + t);
            let lw = base(beta_right)
                + w.ln()
                + beta * one_plus.ln()
                + (tail - beta_right) * one_minus.ln();
            nodes.push(radial_node(alpha, one_plus, one_minus, true, lw));
        }
        Ok(Self { nodes })
    }

    /// `(sum w f, sum |w f|)`; nodes where `f = 0` contribute nothing.
    pub fn integrate_with_mass(&self, f: impl Fn(f64) -> f64) -> (f64, f64) {
        let terms: Vec<f64> = self
            .nodes
            .iter()
            .map(|nd| {
                let v = f(nd.r);
                if v == 0.0 {
                    0.0
                } else {
                    v.signum() * (v.abs().ln() + nd.log_weight).exp()
                }
            })
            .collect();
        (
            compensated_sum(terms.iter().copied()),
            compensated_sum(terms.iter().map(|t| t.abs())),
        )
    }
}

fn radial_node(
    alpha: f64,
    one_plus: f64,
    one_minus: f64,
    right: bool,
    log_weight: f64,
) -> RadialNode {
    let y = if right {
        1.0 - one_minus
    } else {
        one_plus - 1.0
    };
    let r = ((one_plus.ln() - one_minus.ln()) / (2.0 * alpha)).exp();
    RadialNode { r, y, log_weight }
}

/// `int_0^inf f(r) r^{alpha n - 1} dr`, the radial part of `d mu_E`.
pub fn integrate_radial_mu_e(
    f: impl Fn(f64) -> f64,
    dp: &DerivedParams,
    settings: &QuadSettings,
) -> Result<f64> {
    integrate_radial(f, dp.alpha, dp.n, settings).map(|c| c.value)
}

/// [`integrate_radial_mu_e`] for explicit `(alpha, n)`, with diagnostics.
pub fn integrate_radial(
    f: impl Fn(f64) -> f64,
    alpha: f64,
    n: f64,
    settings: &QuadSettings,
) -> Result<Converged> {
    integrate_radial_with_decay(f, alpha, n, 0.5 * n - 1.0, settings)
}

/// [`integrate_radial`] with the right Jacobi exponent of
/// [`RadialRule::with_decay`].
pub fn integrate_radial_with_decay(
    f: impl Fn(f64) -> f64,
    alpha: f64,
    n: f64,
    beta_right: f64,
    settings: &QuadSettings,
) -> Result<Converged> {
    let m0 = settings.radial_nodes;
    converge(m0, settings.max_nodes, settings.rel_tol, |s| {
        Ok(RadialRule::with_decay(alpha, n, beta_right, m0 * s)?.integrate_with_mass(&f))
    })
}

/// A node on the unit circle: `(cos phi, sin phi)` and its weight.
type ArcNode = (f64, f64, f64);

/// Rule for `|cos phi|^{a1} |sin phi|^{a2} dphi` over the arc where the
/// coordinates flagged `c1`, `c2` are positive.
fn circle_rule(m: usize, a1: f64, a2: f64, c1: bool, c2: bool) -> Result<Vec<ArcNode>> {
    let mut out = Vec::with_capacity(m);
    if !c1 && !c2 {
        let h = 2.0 * PI / m as f64;
        for j in 0..m {
            let phi = (j as f64 + 0.5) * h;
            out.push((phi.cos(), phi.sin(), h));
        }
        return Ok(out);
    }
    if c1 && c2 {
        let rule = gauss_jacobi(m, a2, a1)?;
        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
            let (s_lo, s_hi) = (0.5 * (1.0 + t), 0.5 * (1.0 - t));
            let sin = (0.5 * PI * s_lo).sin();
            let cos = (0.5 * PI * s_hi).sin();
            let rem = (sin / (1.0 + t)).powf(a2) * (cos / (1.0 - t)).powf(a1);
            out.push((cos, sin, 0.25 * PI * w * rem));
        }
        return Ok(out);
    }
    let e = if c1 { a1 } else { a2 };
    let rule = gauss_jacobi(m, e, e)?;
    for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
        let (s_lo, s_hi) = (0.5 * (1.0 + t), 0.5 * (1.0 - t));
        let vanishing = (PI * s_lo.min(s_hi)).sin();
        let rem = (vanishing / (4.0 * s_lo * s_hi)).powf(e);
        let weight = 0.5 * PI * w * rem;
        if c1 {
            // phi in (-pi/2, pi/2)
            out.push((vanishing, -(PI * s_lo).cos(), weight));
        } else {
            // phi in (0, pi)
            out.push(((PI * s_lo).cos(), vanishing, weight));
        }
    }
    Ok(out)
}

/// Cubature for `theta^A dV` on the monomial sphere, `d` in `{2, 3}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereRule {
    d: usize,
    /// Unit vectors; entries past `d` are zero.
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub weight_exponents: Vec<f64>,
}

impl SphereRule {
    /// Rule with `m` nodes per angle.
    pub fn new(weight: &MonomialWeight, m: usize) -> Result<Self> {
        Self::with_exponents(weight, weight.exponents(), m)
    }

    /// Rule for `theta^e dV` over the monomial sphere of `weight`.
    ///
    /// The domain is fixed by the charged coordinates of `weight`; `e` may
    /// differ from its exponents, e.g. `A_i - 1` for integrands carrying a
    /// factor `1/theta_i`. Entries of `e` must exceed `-1`, and be `0` on
    /// uncharged coordinates.
    pub fn with_exponents(weight: &MonomialWeight, e: &[f64], m: usize) -> Result<Self> {
        let d = weight.d();
        if e.len() != d {
            return Err(CknError::WeightLength {
                expected: d,
                got: e.len(),
            });
        }
        for (i, &ei) in e.iter().enumerate() {
            if !weight.is_charged(i) && ei != 0.0 {
                return Err(CknError::Domain(format!(
                    "exponent {ei} on uncharged coordinate {i}"
                )));
            }
        }
        let a = e;
        let c: Vec<bool> = (0..d).map(|i| weight.is_charged(i)).collect();
        let mut points = Vec::new();
        let mut weights = Vec::new();
        match d {
            2 => {
                for (cs, sn, w) in circle_rule(m, a[0], a[1], c[0], c[1])? {
                    points.push([cs, sn, 0.0]);
                    weights.push(w);
                }
            }
            3 => {
                let azimuth = circle_rule(m, a[0], a[1], c[0], c[1])?;
                let polar = polar_rule(m, a[0] + a[1] + 1.0, a[2], c[2])?;
                for &(sin_psi, cos_psi, wp) in &polar {
                    for &(c, s, wa) in &azimuth {
                        points.push([sin_psi * c, sin_psi * s, cos_psi]);
                        weights.push(wp * wa);
                    }
                }
            }
            _ => return Err(CknError::UnsupportedDimension(d)),
        }
        Ok(Self {
            d,
            points,
            weights,
            weight_exponents: e.to_vec(),
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i][..self.d]
    }

    pub fn integrate_with_mass(&self, f: impl Fn(&[f64]) -> f64) -> (f64, f64) {
        let terms: Vec<f64> = (0..self.len())
            .map(|i| self.weights[i] * f(self.point(i)))
            .collect();
        (
            compensated_sum(terms.iter().copied()),
            compensated_sum(terms.iter().map(|t| t.abs())),
        )
    }
}

/// `(sin psi, cos psi, weight)` for `sin^{e} psi |cos psi|^{a3} dpsi`.
fn polar_rule(m: usize, e: f64, a3: f64, c3: bool) -> Result<Vec<ArcNode>> {
    let mut out = Vec::with_capacity(m);
    if c3 {
        let rule = gauss_jacobi(m, e, a3)?;
        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
            let (s_lo, s_hi) = (0.5 * (1.0 + t), 0.5 * (1.0 - t));
            let sin = (0.5 * PI * s_lo).sin();
            let cos = (0.5 * PI * s_hi).sin();
            let rem = (sin / (1.0 + t)).powf(e) * (cos / (1.0 - t)).powf(a3);
            out.push((sin, cos, 0.25 * PI * w * rem));
        }
    } else {
        let rule = gauss_jacobi(m, e, e)?;
        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
            let (s_lo, s_hi) = (0.5 * (1.0 + t), 0.5 * (1.0 - t));
            let sin = (PI * s_lo.min(s_hi)).sin();
            let rem = (sin / (4.0 * s_lo * s_hi)).powf(e);
            out.push((sin, (PI * s_lo).cos(), 0.5 * PI * w * rem));
        }
    }
    Ok(out)
}

/// `int f theta^A dV` over the monomial sphere.
pub fn integrate_sphere(
    f: impl Fn(&[f64]) -> f64,
    weight: &MonomialWeight,
    settings: &QuadSettings,
) -> Result<f64> {
    if !matches!(weight.d(), 2 | 3) {
        return Err(CknError::UnsupportedDimension(weight.d()));
    }
    let m0 = settings.sphere_nodes;
    converge(m0, settings.max_nodes, settings.rel_tol, |s| {
        Ok(SphereRule::new(weight, m0 * s)?.integrate_with_mass(&f))
    })
    .map(|c| c.value)
}

/// Tensor rule for `d mu_S = (1 - y^2)^{n/2 - 1} / alpha dy d mu_sphere`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductRuleS {
    pub y_nodes: Vec<f64>,
    /// Includes the factor `1/alpha`.
    pub y_weights: Vec<f64>,
    pub sphere: SphereRule,
}

impl ProductRuleS {
    pub fn new(
        dp: &DerivedParams,
        weight: &MonomialWeight,
        m_y: usize,
        m_sphere: usize,
    ) -> Result<Self> {
        let beta = 0.5 * dp.n - 1.0;
        let y = gauss_jacobi(m_y, beta, beta)?;
        let sphere = SphereRule::new(weight, m_sphere)?;
        Ok(Self {
            y_weights: y.weights.iter().map(|w| w / dp.alpha).collect(),
            y_nodes: y.nodes,
            sphere,
        })
    }

    pub fn len(&self) -> usize {
        self.y_nodes.len() * self.sphere.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Calls `visit(y, theta, weight)` for every node, y-major.
    pub fn for_each(&self, mut visit: impl FnMut(f64, &[f64], f64)) {
        for (&y, &wy) in self.y_nodes.iter().zip(&self.y_weights) {
            for i in 0..self.sphere.len() {
                visit(y, self.sphere.point(i), wy * self.sphere.weights[i]);
            }
        }
    }

    pub fn integrate_with_mass(&self, f: impl Fn(f64, &[f64]) -> f64) -> (f64, f64) {
        let mut terms = Vec::with_capacity(self.len());
        self.for_each(|y, th, w| terms.push(w * f(y, th)));
        (
            compensated_sum(terms.iter().copied()),
            compensated_sum(terms.iter().map(|t| t.abs())),
        )
    }

    pub fn integrate(&self, f: impl Fn(f64, &[f64]) -> f64) -> f64 {
        self.integrate_with_mass(f).0
    }
}

/// `int F d mu_S` over the compactified model.
#[allow(non_snake_case)]
pub fn integrate_S(
    f: impl Fn(f64, &[f64]) -> f64,
    dp: &DerivedParams,
    weight: &MonomialWeight,
    settings: &QuadSettings,
) -> Result<f64> {
    integrate_s_converged(f, dp, weight, settings).map(|c| c.value)
}

pub fn integrate_s_converged(
    f: impl Fn(f64, &[f64]) -> f64,
    dp: &DerivedParams,
    weight: &MonomialWeight,
    settings: &QuadSettings,
) -> Result<Converged> {
    if !matches!(weight.d(), 2 | 3) {
        return Err(CknError::UnsupportedDimension(weight.d()));
    }
    let (my, ms) = (settings.radial_nodes, settings.sphere_nodes);
    converge(my.max(ms), settings.max_nodes, settings.rel_tol, |s| {
        Ok(ProductRuleS::new(dp, weight, my * s, ms * s)?.integrate_with_mass(&f))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{derive, CknParams};
    use crate::special::{cosh_profile_integral, log_beta, sphere_weight_area, z_constant};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// `int (1+t)^i (1-t)^a (1+t)^b dt = 2^{a+b+i+1} B(a+1, b+i+1)`.
    fn jacobi_moment(i: u32, a: f64, b: f64) -> f64 {
        let l = (a + b + i as f64 + 1.0) * std::f64::consts::LN_2
            + log_beta(a + 1.0, b + i as f64 + 1.0).unwrap();
        l.exp()
    }

    #[test]
    fn spec_examples_for_gauss_jacobi() {
        let r = gauss_jacobi(2, 0.0, 0.0).unwrap();
        assert_eq!(r.measure, Measure::Legendre);
        assert_relative_eq!(r.integrate(|t| t * t), 2.0 / 3.0, max_relative = 1e-14);
        let r = gauss_jacobi(1, 0.5, 0.5).unwrap();
        assert_relative_eq!(r.integrate(|_| 1.0), PI / 2.0, max_relative = 1e-14);
        let r = gauss_jacobi(3, 2.0, 2.0).unwrap();
        assert_relative_eq!(r.integrate(|_| 1.0), 16.0 / 15.0, max_relative = 1e-14);
    }

    #[test]
    fn domain_errors() {
        assert!(gauss_jacobi(4, -1.0, 0.0).is_err());
        assert!(gauss_jacobi(4, 0.0, -1.5).is_err());
        assert!(gauss_jacobi(0, 0.0, 0.0).is_err());
        assert!(matches!(
            SphereRule::new(&MonomialWeight::unweighted(4).unwrap(), 8),
            Err(CknError::UnsupportedDimension(4))
        ));
    }

    #[test]
    fn exactness_on_beta_moments() {
        for &bl in &[-0.5, 0.0, 0.5, 2.0, 2.5] {
            for &br in &[-0.5, 0.0, 0.5, 2.0, 2.5] {
                for m in 2..=32usize {
                    let rule = gauss_jacobi(m, bl, br).unwrap();
                    assert!(rule.weights.iter().all(|&w| w > 0.0));
                    assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
                    for i in 0..(2 * m as u32) {
                        let exact = jacobi_moment(i, br, bl);
                        let got = rule.integrate(|t| (1.0 + t).powi(i as i32));
                        assert!(
                            ((got - exact) / exact).abs() <= 1e-12,
                            "m={m} bl={bl} br={br} i={i}: {got} vs {exact}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn rules_are_bit_reproducible() {
        assert_eq!(
            gauss_jacobi(37, 1.3, 0.2).unwrap(),
            gauss_jacobi(37, 1.3, 0.2).unwrap()
        );
    }

    #[test]
    fn large_rule_mass_is_exact() {
        let rule = gauss_jacobi(512, 2.0, 2.0).unwrap();
        assert_relative_eq!(rule.integrate(|_| 1.0), 16.0 / 15.0, max_relative = 1e-12);
    }

    #[test]
    fn radial_examples() {
        let s = QuadSettings::default();
        // Classical d = 3: alpha = 1, n = D = 3.
        let v = integrate_radial(|r| if r < 1.0 { 1.0 } else { 0.0 }, 1.0, 3.0, &s).unwrap();
        assert_relative_eq!(v.value, 1.0 / 3.0, max_relative = 1e-10);
        for &(alpha, n) in &[(1.0, 3.0), (0.5, 6.0), (0.25, 6.0), (1.3, 4.2)] {
            let v = integrate_radial(
                |r| {
                    if r > 1.0 {
                        r.powf(-2.0 * alpha * n)
                    } else {
                        0.0
                    }
                },
                alpha,
                n,
                &s,
            )
            .unwrap();
            assert_relative_eq!(v.value, 1.0 / (alpha * n), max_relative = 1e-10);
            // With r = e^u the profile becomes cosh(alpha u)^{-n}.
            let v = integrate_radial(
                |r| (0.5 * (1.0 + r.powf(2.0 * alpha))).powf(-n),
                alpha,
                n,
                &s,
            )
            .unwrap();
            let closed = cosh_profile_integral(alpha, n).unwrap();
            assert_relative_eq!(v.value, closed, max_relative = 1e-10);
        }
    }

    #[test]
    fn radial_constant_density_matches_z_over_area() {
        let p = CknParams::new(vec![0.0; 3], 0.0, 0.0).unwrap();
        let dp = derive(&p).unwrap();
        let s = QuadSettings::default();
        let radial = integrate_radial_mu_e(|r| (0.5 * (1.0 + r * r)).powi(-3), &dp, &s).unwrap();
        assert_relative_eq!(4.0 * PI * radial, 2.0 * PI * PI, max_relative = 1e-10);
    }

    #[test]
    fn sphere_examples() {
        let s = QuadSettings::default();
        let w3 = MonomialWeight::unweighted(3).unwrap();
        let v = integrate_sphere(|t| t[2] * t[2], &w3, &s).unwrap();
        assert_relative_eq!(v, 4.0 * PI / 3.0, max_relative = 1e-10);
        let w = MonomialWeight::new(vec![1.0, 0.0]).unwrap();
        let v = integrate_sphere(|t| t[0], &w, &s).unwrap();
        assert_relative_eq!(v, PI / 2.0, max_relative = 1e-10);
        assert!(integrate_sphere(|_| 1.0, &MonomialWeight::unweighted(4).unwrap(), &s).is_err());
    }

    #[test]
    fn sphere_rule_points_lie_in_positive_cone() {
        for a in [
            vec![1.0, 0.0],
            vec![0.0, 2.5],
            vec![0.5, 1.5],
            vec![0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.5],
            vec![2.0, 1.0, 0.5],
            vec![0.0, 0.7, 0.0],
        ] {
            let w = MonomialWeight::new(a.clone()).unwrap();
            let rule = SphereRule::new(&w, 24).unwrap();
            for i in 0..rule.len() {
                let th = rule.point(i);
                let norm: f64 = th.iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!((norm - 1.0).abs() <= 1e-14);
                for (j, &aj) in a.iter().enumerate() {
                    if aj > 0.0 {
                        assert!(th[j] > 0.0, "{a:?} point {th:?}");
                    }
                }
                assert!(rule.weights[i] > 0.0);
            }
        }
    }

    #[test]
    fn sphere_mass_matches_closed_area() {
        let s = QuadSettings::default();
        for a in [
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.3, 2.2],
            vec![0.0, 0.0],
            vec![0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 0.0, 2.0],
            vec![0.5, 1.0, 1.5],
            vec![0.0, 3.0, 0.0],
        ] {
            let w = MonomialWeight::new(a.clone()).unwrap();
            let v = integrate_sphere(|_| 1.0, &w, &s).unwrap();
            let exact = sphere_weight_area(&w).unwrap();
            assert!(
                ((v - exact) / exact).abs() <= 1e-10,
                "{a:?}: {v} vs {exact}"
            );
        }
    }

    #[test]
    fn product_rule_moments() {
        let s = QuadSettings {
            radial_nodes: 16,
            sphere_nodes: 16,
            ..QuadSettings::default()
        };
        for (a, aa, b) in [
            (vec![0.0; 3], 0.0, 0.0),
            (vec![1.0, 0.0], 0.0, 0.5),
            (vec![1.0, 0.0], -0.5, -0.5),
            (vec![0.5, 1.0, 0.0], -0.3, 0.2),
            (vec![0.0, 2.0], 0.1, 0.4),
        ] {
            let p = CknParams::new(a, aa, b).unwrap();
            let dp = derive(&p).unwrap();
            let z = z_constant(&p, &dp).unwrap();
            let one = integrate_S(|_, _| 1.0, &dp, &p.weight, &s).unwrap();
            assert!(((one - z) / z).abs() <= 1e-10);
            let odd = integrate_S(|y, _| y, &dp, &p.weight, &s).unwrap();
            assert!(odd.abs() <= 1e-12 * z);
            let sq = integrate_S(|y, _| y * y, &dp, &p.weight, &s).unwrap();
            assert_relative_eq!(sq, z / (dp.n + 1.0), max_relative = 1e-10);
        }
    }

    #[test]
    fn converge_reports_failure() {
        let mut k = 0.0;
        let r = converge(4, 32, 1e-10, |_| {
            k += 1.0;
            Ok((k, 1.0))
        });
        assert!(matches!(r, Err(CknError::NonConvergence { .. })));
    }

    #[test]
    fn two_axis_doubling_on_a_separable_integral() {
        // int_{-1}^{1} exp(x) dx * int_{-1}^{1} cos(7 y) dy on a Legendre tensor rule.
        let exact = (1f64.exp() - (-1f64).exp()) * (2.0 * 7f64.sin() / 7.0);
        let mut calls = Vec::new();
        let c = converge_axes((2, 2), 256, 1e-13, |m1, m2| {
            calls.push((m1, m2));
            let (a, b) = (gauss_legendre(m1)?, gauss_legendre(m2)?);
            let ix = a.integrate(f64::exp);
            let iy = b.integrate(|y| (7.0 * y).cos());
            let my = b.integrate(|y| (7.0 * y).cos().abs());
            Ok((ix * iy, ix.abs() * my))
        })
        .unwrap();
        assert_relative_eq!(c.value, exact, max_relative = 1e-12);
        let mut unique = calls.clone();
        unique.sort();
        unique.dedup();
        assert_eq!(unique.len(), calls.len());
        // The y axis needs more nodes than the x axis.
        assert!(calls.iter().any(|&(m1, m2)| m2 > m1));
        let r = converge_axes((2, 2), 16, 1e-13, |m1, _| Ok((m1 as f64, 1.0)));
        assert!(matches!(r, Err(CknError::NonConvergence { .. })));
    }

    proptest! {
        #[test]
        fn jacobi_mass_matches_beta(bl in -0.9f64..6.0, br in -0.9f64..6.0, m in 1usize..40) {
            let rule = gauss_jacobi(m, bl, br).unwrap();
            let exact = jacobi_moment(0, br, bl);
            let got = rule.integrate(|_| 1.0);
            prop_assert!(((got - exact) / exact).abs() <= 1e-12);
        }

        #[test]
        fn radial_power_moments(alpha in 0.2f64..2.0, n in 2.5f64..12.0, j in 0i32..5) {
            // int_0^1 r^{2 alpha j} r^{alpha n - 1} dr = 1/(alpha (n + 2j))
            let s = QuadSettings::default();
            let v = integrate_radial(|r| if r < 1.0 { r.powf(2.0 * alpha * j as f64) } else { 0.0 }, alpha, n, &s)
                .unwrap();
            let exact = 1.0 / (alpha * (n + 2.0 * j as f64));
            prop_assert!(((v.value - exact) / exact).abs() <= 1e-9);
        }
    }
}
