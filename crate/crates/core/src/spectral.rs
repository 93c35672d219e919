//! Rayleigh-Ritz spectra on the monomial sphere and on `S`, the
//! symmetry-breaking detector and the `(a, b)` phase scan.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::battery::chart_point;
use crate::calculus::expr::monomial_exponents;
use crate::calculus::{Expr, Extremes, ModelS, MonomialSphere, Pole, SpherePoint};
use crate::error::{CknError, Result};
use crate::linalg::{compensated_sum, jacobi_eigen, SymMatrix};
use crate::params::{derive, CknParams, DerivedParams, MonomialWeight, Regime};
use crate::quadrature::{converge_many, gauss_jacobi, ProductRuleS, QuadSettings, SphereRule};

/// Gram eigenvalues below this fraction of the largest are treated as
/// linear dependencies of the basis and dropped.
pub const GRAM_DROP: f64 = 1e-10;

/// Tolerance of the detector's comparison between quotient and threshold.
pub const VERDICT_TOL: f64 = 1e-6;

/// Gram and stiffness matrices of a finite basis.
#[derive(Debug, Clone)]
pub struct RayleighRitzBasis {
    pub degree: usize,
    pub gram: SymMatrix,
    pub stiffness: SymMatrix,
}

/// Ritz values of a basis, ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RitzSpectrum {
    pub values: Vec<f64>,
    pub basis_size: usize,
    /// Dimension kept after dropping dependent directions.
    pub rank: usize,
    /// Smallest kept Gram eigenvalue relative to the largest, after diagonal
    /// scaling.
    pub min_gram_eigenvalue: f64,
}

impl RitzSpectrum {
    /// Smallest Ritz value.
    pub fn first(&self) -> f64 {
        self.values[0]
    }
}

impl RayleighRitzBasis {
    /// Solves `K v = lambda G v` by diagonal scaling, eigen-orthogonalization
    /// of `G` and a Jacobi solve of the reduced stiffness.
    pub fn solve(&self) -> Result<RitzSpectrum> {
        let size = self.gram.size();
        if size == 0 || self.stiffness.size() != size {
            return Err(CknError::IllConditioned("empty or mismatched basis".into()));
        }
        let scale: Vec<f64> = (0..size)
            .map(|i| {
                let g = self.gram.get(i, i);
                if g > 0.0 {
                    1.0 / g.sqrt()
                } else {
                    0.0
                }
            })
            .collect();
        let scaled = |m: &SymMatrix| {
            let mut out = SymMatrix::zeros(size);
            for i in 0..size {
                for j in 0..=i {
                    out.set(i, j, m.get(i, j) * scale[i] * scale[j]);
                }
            }
            out
        };
        let (gs, ks) = (scaled(&self.gram), scaled(&self.stiffness));
        let ge = jacobi_eigen(&gs)?;
        let top = ge.values.last().copied().unwrap_or(0.0);
        if !(top > 0.0) {
            return Err(CknError::IllConditioned(
                "Gram matrix has no positive direction".into(),
            ));
        }
        let kept: Vec<usize> = (0..size)
            .filter(|&k| ge.values[k] > GRAM_DROP * top)
            .collect();
        let rank = kept.len();
        // Columns of W = V_kept Lambda_kept^{-1/2}.
        let w: Vec<Vec<f64>> = kept
            .iter()
            .map(|&k| {
                let s = 1.0 / ge.values[k].sqrt();
                ge.vectors[k].iter().map(|v| v * s).collect()
            })
            .collect();
        let kw: Vec<Vec<f64>> = w
            .iter()
            .map(|col| {
                (0..size)
                    .map(|i| compensated_sum((0..size).map(|j| ks.get(i, j) * col[j])))
                    .collect()
            })
            .collect();
        let mut reduced = SymMatrix::zeros(rank);
        for a in 0..rank {
            for b in 0..=a {
                let v = compensated_sum((0..size).map(|i| w[a][i] * kw[b][i]));
                let u = compensated_sum((0..size).map(|i| w[b][i] * kw[a][i]));
                reduced.set(a, b, 0.5 * (u + v));
            }
        }
        let values = jacobi_eigen(&reduced)?.values;
        Ok(RitzSpectrum {
            values,
            basis_size: size,
            rank,
            min_gram_eigenvalue: ge.values[kept[0]] / top,
        })
    }
}

fn check_sphere_dim(d: usize) -> Result<()> {
    if matches!(d, 2 | 3) {
        Ok(())
    } else {
        Err(CknError::UnsupportedDimension(d))
    }
}

/// Value and ambient gradient of `theta^e`.
fn monomial_grad(e: &[u32], theta: &[f64]) -> (f64, Vec<f64>) {
    let value: f64 = e
        .iter()
        .zip(theta)
        .map(|(&k, &t)| t.powi(k as i32))
        .product();
    let grad = (0..e.len())
        .map(|i| {
            if e[i] == 0 {
                return 0.0;
            }
            e.iter()
                .zip(theta)
                .enumerate()
                .map(|(j, (&k, &t))| {
                    if j == i {
                        k as f64 * t.powi(k as i32 - 1)
                    } else {
                        t.powi(k as i32)
                    }
                })
                .product()
        })
        .collect();
    (value, grad)
}

/// Upper-triangle index pairs of an `n x n` symmetric matrix.
fn upper_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect()
}

/// Mean-zero monomial basis on the monomial sphere: every `theta^e` with
/// `1 <= |e| <= degree`, centered against `theta^A dV`. The stiffness uses the
/// round metric, `Gamma(f, h) = grad f . grad h - (theta . grad f)(theta . grad h)`.
pub fn sphere_basis(
    weight: &MonomialWeight,
    degree: usize,
    settings: &QuadSettings,
) -> Result<RayleighRitzBasis> {
    let d = weight.d();
    check_sphere_dim(d)?;
    let exps: Vec<Vec<u32>> = monomial_exponents(d, degree as u32)
        .into_iter()
        .filter(|e| e.iter().any(|&k| k > 0))
        .collect();
    let nb = exps.len();
    let pairs = upper_pairs(nb);
    let m0 = settings.sphere_nodes.max(degree + 2);
    let (v, _, _) = converge_many(m0, settings.max_nodes.max(m0), settings.rel_tol, |s| {
        let rule = SphereRule::new(weight, m0 * s)?;
        // Layout: mass, nb means, Gram pairs, stiffness pairs.
        let width = 1 + nb + 2 * pairs.len();
        let mut terms: Vec<Vec<f64>> = vec![Vec::with_capacity(rule.len()); width];
        for i in 0..rule.len() {
            let th = rule.point(i);
            let w = rule.weights[i];
            let evals: Vec<(f64, Vec<f64>)> = exps.iter().map(|e| monomial_grad(e, th)).collect();
            let radial: Vec<f64> = evals
                .iter()
                .map(|(_, g)| g.iter().zip(th).map(|(a, b)| a * b).sum())
                .collect();
            terms[0].push(w);
            for (k, (val, _)) in evals.iter().enumerate() {
                terms[1 + k].push(w * val);
            }
            for (k, &(a, b)) in pairs.iter().enumerate() {
                terms[1 + nb + k].push(w * evals[a].0 * evals[b].0);
                let dot: f64 = evals[a].1.iter().zip(&evals[b].1).map(|(x, y)| x * y).sum();
                terms[1 + nb + pairs.len() + k].push(w * (dot - radial[a] * radial[b]));
            }
        }
        Ok(terms
            .iter()
            .map(|t| {
                (
                    compensated_sum(t.iter().copied()),
                    compensated_sum(t.iter().map(|x| x.abs())),
                )
            })
            .collect())
    })?;
    let mass = v[0];
    let means = &v[1..=nb];
    let mut gram = SymMatrix::zeros(nb);
    let mut stiffness = SymMatrix::zeros(nb);
    for (k, &(a, b)) in pairs.iter().enumerate() {
        gram.set(a, b, v[1 + nb + k] - means[a] * means[b] / mass);
        stiffness.set(a, b, v[1 + nb + pairs.len() + k]);
    }
    Ok(RayleighRitzBasis {
        degree,
        gram,
        stiffness,
    })
}

/// Smallest nonzero eigenvalue of `-L_theta` on mean-zero functions,
/// estimated over polynomials of degree at most `degree`.
pub fn sphere_first_eigenvalue(
    weight: &MonomialWeight,
    degree: usize,
    settings: &QuadSettings,
) -> Result<RitzSpectrum> {
    if degree < 2 {
        return Err(CknError::Domain(format!(
            "sphere basis degree {degree} is below 2"
        )));
    }
    sphere_basis(weight, degree, settings)?.solve()
}

/// Mean-zero radial basis `y^k - mean`, `1 <= k <= degree`, on `S` with
/// `Gamma_S(f, h) = alpha^2 (1-y^2) f' h'`. Gauss-Jacobi with `degree + 2`
/// nodes integrates every entry exactly.
pub fn radial_basis(dp: &DerivedParams, degree: usize) -> Result<RayleighRitzBasis> {
    if degree < 1 {
        return Err(CknError::Domain(
            "radial basis degree must be at least 1".into(),
        ));
    }
    let beta = 0.5 * dp.n - 1.0;
    let rule = gauss_jacobi(degree + 2, beta, beta)?;
    let mass = rule.integrate(|_| 1.0);
    let pw = |y: f64, k: usize| y.powi(k as i32);
    let dpw = |y: f64, k: usize| k as f64 * y.powi(k as i32 - 1);
    let means: Vec<f64> = (1..=degree)
        .map(|k| rule.integrate(|y| pw(y, k)) / mass)
        .collect();
    let mut gram = SymMatrix::zeros(degree);
    let mut stiffness = SymMatrix::zeros(degree);
    for (a, b) in upper_pairs(degree) {
        let (ka, kb) = (a + 1, b + 1);
        gram.set(
            a,
            b,
            rule.integrate(|y| pw(y, ka) * pw(y, kb)) - means[a] * means[b] * mass,
        );
        stiffness.set(
            a,
            b,
            dp.alpha_sq * rule.integrate(|y| (1.0 - y * y) * dpw(y, ka) * dpw(y, kb)),
        );
    }
    Ok(RayleighRitzBasis {
        degree,
        gram,
        stiffness,
    })
}

/// Smallest nonzero eigenvalue of `-L_S` over radial polynomials in `y`.
#[allow(non_snake_case)]
pub fn radial_spectral_gap_S(dp: &DerivedParams, degree: usize) -> Result<RitzSpectrum> {
    radial_basis(dp, degree)?.solve()
}

/// `alpha^2 n`, the linearized stability requirement at `F = 1` on `S`.
pub fn stability_threshold(dp: &DerivedParams) -> f64 {
    dp.alpha_sq * dp.n
}

/// `|L_theta theta_axis + (D-1) theta_axis|` at random chart points of both
/// poles, with the operator assembled from jets.
pub fn theta_eigen_residuals(
    sphere: &MonomialSphere,
    samples: usize,
    seed: u64,
) -> Result<Extremes> {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let points: Vec<SpherePoint> = (0..samples)
        .map(|k| SpherePoint {
            pole: if k % 2 == 0 { Pole::North } else { Pole::South },
            z: chart_point(&mut rng, sphere),
        })
        .collect();
    let lambda = sphere.weight().monomial_dim() - 1.0;
    let axis = sphere.axis();
    let v: Vec<f64> = points
        .par_iter()
        .map(|p| {
            let f = sphere.input_jets(p)?[axis];
            Ok((sphere.l(&f)? + lambda * f.value()).abs())
        })
        .collect::<Result<_>>()?;
    Ok(Extremes::of(&v))
}

/// Rayleigh quotient of `g = sqrt(1-y^2) theta_axis` on `S`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonradialQuotient {
    /// `int Gamma_S(g) / int g^2` by quadrature with the generic S geometry.
    pub quadrature: f64,
    /// `(alpha^2 + (n+1)(D-1)) / n`.
    pub closed_form: f64,
    pub rel_diff: f64,
    pub nodes: usize,
}

/// Closed reduction of the test quotient: with `w = (1-y^2)^{n/2-1}`,
/// `int y^2 w = int w / (n+1)` and `int (1-y^2) w = n int w / (n+1)`, so
/// `R = (alpha^2 + (n+1) lambda) / n` for an angular eigenvalue `lambda`.
pub fn closed_test_quotient(dp: &DerivedParams, lambda: f64) -> f64 {
    (dp.alpha_sq + (dp.n + 1.0) * lambda) / dp.n
}

/// Test quotient of the nonradial direction `sqrt(1-y^2) theta_axis`,
/// integrated on product rules of `m, 2m, ...` nodes per axis until both
/// integrals settle to `1e-12`.
pub fn nonradial_test_quotient(
    dp: &DerivedParams,
    weight: &MonomialWeight,
    m: usize,
) -> Result<NonradialQuotient> {
    check_sphere_dim(weight.d())?;
    let model = ModelS::new(*dp, weight.clone())?;
    let axis = model.sphere.axis();
    let y = Expr::var(0);
    let g = (-(y.clone() * y) + 1.0).sqrt() * Expr::var(1 + axis);
    let (v, nodes, _) = converge_many(m, 512.max(m), 1e-12, |s| {
        let rule = ProductRuleS::new(dp, weight, m * s, m * s)?;
        let mut pts = Vec::with_capacity(rule.len());
        rule.for_each(|y, th, w| pts.push((y, th.to_vec(), w)));
        let vals: Vec<[f64; 2]> = pts
            .iter()
            .map(|(y, th, w)| {
                let (pole, pt) = model.point_of(*y, th)?;
                let gj = g.eval_jet(&model.input_jets(pole, &pt)?);
                Ok([w * gj.value().powi(2), w * model.gamma(&gj, &gj)?])
            })
            .collect::<Result<_>>()?;
        Ok((0..2)
            .map(|k| {
                let s = compensated_sum(vals.iter().map(|t| t[k]));
                (s, s.abs())
            })
            .collect())
    })?;
    let quadrature = v[1] / v[0];
    let closed_form = closed_test_quotient(dp, weight.monomial_dim() - 1.0);
    Ok(NonradialQuotient {
        quadrature,
        closed_form,
        rel_diff: (quadrature / closed_form - 1.0).abs(),
        nodes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Stable,
    NeutralThreshold,
    Unstable,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Stable => "Stable",
            Verdict::NeutralThreshold => "NeutralThreshold",
            Verdict::Unstable => "Unstable",
        }
    }

    /// Verdict the Felli-Schneider predicate predicts for a regime.
    pub fn expected_for(regime: Regime) -> Self {
        match regime {
            Regime::Symmetric => Verdict::Stable,
            Regime::Threshold => Verdict::NeutralThreshold,
            Regime::Breaking => Verdict::Unstable,
        }
    }

    /// Compares a test quotient with the threshold, with tolerance
    /// [`VERDICT_TOL`].
    pub fn classify(quotient: f64, threshold: f64) -> Self {
        if quotient < threshold - VERDICT_TOL {
            Verdict::Unstable
        } else if quotient > threshold + VERDICT_TOL {
            Verdict::Stable
        } else {
            Verdict::NeutralThreshold
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BreakingVerdict {
    pub lambda_theta_1: f64,
    /// Quadrature value of the test quotient.
    pub test_quotient: f64,
    pub closed_form_quotient: f64,
    /// `alpha^2 n`.
    pub threshold: f64,
    pub verdict: Verdict,
    /// Whether the verdict is the one the analytic regime predicts.
    pub agrees_with_fs: bool,
}

/// Starting per-axis node count of the detector's quadrature; the test
/// direction is polynomial in `(y, theta)`, so two levels are exact.
pub const DETECTOR_NODES: usize = 8;

/// Detector with a precomputed first sphere eigenvalue.
pub fn detect_with_lambda(
    dp: &DerivedParams,
    weight: &MonomialWeight,
    lambda_theta_1: f64,
) -> Result<BreakingVerdict> {
    let q = nonradial_test_quotient(dp, weight, DETECTOR_NODES)?;
    let threshold = stability_threshold(dp);
    let verdict = Verdict::classify(q.quadrature, threshold);
    Ok(BreakingVerdict {
        lambda_theta_1,
        test_quotient: q.quadrature,
        closed_form_quotient: q.closed_form,
        threshold,
        verdict,
        agrees_with_fs: verdict == Verdict::expected_for(dp.regime),
    })
}

/// Linearized symmetry-breaking detector at `F = 1` on `S`.
pub fn symmetry_breaking_detector(
    params: &CknParams,
    degree: usize,
    settings: &QuadSettings,
) -> Result<BreakingVerdict> {
    let dp = derive(params)?;
    let lambda = sphere_first_eigenvalue(&params.weight, degree, settings)?.first();
    detect_with_lambda(&dp, &params.weight, lambda)
}

/// Spectral-gap estimate of `-L_S`: the radial gap and the lowest Ritz value
/// over `sqrt(1-y^2) P(y) theta_axis` with `deg P <= degree`, reported next
/// to `D/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapEstimate {
    pub radial: f64,
    pub angular: f64,
    pub gap: f64,
    pub half_dimension: f64,
}

pub fn full_gap_estimate(dp: &DerivedParams, lambda: f64, degree: usize) -> Result<GapEstimate> {
    let radial = radial_spectral_gap_S(dp, degree.max(1))?.first();
    let beta = 0.5 * dp.n - 1.0;
    let rule = gauss_jacobi(degree + 3, beta, beta)?;
    let size = degree + 1;
    let pw = |y: f64, k: usize| y.powi(k as i32);
    let dpw = |y: f64, k: usize| {
        if k == 0 {
            0.0
        } else {
            k as f64 * y.powi(k as i32 - 1)
        }
    };
    // sqrt(1-y^2) (sqrt(1-y^2) P)' = (1-y^2) P' - y P.
    let lifted = |y: f64, k: usize| (1.0 - y * y) * dpw(y, k) - y * pw(y, k);
    let mut gram = SymMatrix::zeros(size);
    let mut stiffness = SymMatrix::zeros(size);
    for (a, b) in upper_pairs(size) {
        gram.set(
            a,
            b,
            rule.integrate(|y| (1.0 - y * y) * pw(y, a) * pw(y, b)),
        );
        stiffness.set(
            a,
            b,
            rule.integrate(|y| {
                dp.alpha_sq * lifted(y, a) * lifted(y, b) + lambda * pw(y, a) * pw(y, b)
            }),
        );
    }
    let angular = RayleighRitzBasis {
        degree,
        gram,
        stiffness,
    }
    .solve()?
    .first();
    Ok(GapEstimate {
        radial,
        angular,
        gap: radial.min(angular),
        half_dimension: 0.5 * dp.monomial_dim,
    })
}

/// How the second scan axis is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BAxis {
    /// Values are `b`.
    Absolute,
    /// Values are `b - a`.
    Offset,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub a_range: (f64, f64),
    pub b_range: (f64, f64),
    pub b_axis: BAxis,
    pub a_steps: usize,
    pub b_steps: usize,
}

impl ScanGrid {
    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi), steps) in [
            ("a", self.a_range, self.a_steps),
            ("b", self.b_range, self.b_steps),
        ] {
            if !(lo.is_finite() && hi.is_finite()) || lo > hi {
                return Err(CknError::Domain(format!(
                    "malformed {name} range [{lo}, {hi}]"
                )));
            }
            if steps == 0 || (steps == 1 && lo != hi) {
                return Err(CknError::Domain(format!(
                    "{name} range [{lo}, {hi}] needs at least {} steps",
                    if lo == hi { 1 } else { 2 }
                )));
            }
        }
        Ok(())
    }

    fn axis(range: (f64, f64), steps: usize) -> Vec<f64> {
        if steps == 1 {
            return vec![range.0];
        }
        (0..steps)
            .map(|k| range.0 + (range.1 - range.0) * k as f64 / (steps - 1) as f64)
            .collect()
    }

    /// Grid points `(a, b)`, `a`-major.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let bs = Self::axis(self.b_range, self.b_steps);
        Self::axis(self.a_range, self.a_steps)
            .into_iter()
            .flat_map(|a| {
                bs.iter().map(move |&v| match self.b_axis {
                    BAxis::Absolute => (a, v),
                    BAxis::Offset => (a, a + v),
                })
            })
            .collect()
    }
}

/// One grid point of a phase scan; the optional fields are `None` exactly
/// when the point was skipped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub a: f64,
    pub b: f64,
    pub alpha_sq: Option<f64>,
    pub fs_bound: Option<f64>,
    pub regime: Option<Regime>,
    pub lambda_theta_1: Option<f64>,
    pub quotient: Option<f64>,
    pub closed_form_quotient: Option<f64>,
    pub threshold: Option<f64>,
    pub verdict: Option<Verdict>,
    pub agree: Option<bool>,
    pub skipped: Option<String>,
}

impl ScanRow {
    fn skipped(a: f64, b: f64, reason: String) -> Self {
        Self {
            a,
            b,
            alpha_sq: None,
            fs_bound: None,
            regime: None,
            lambda_theta_1: None,
            quotient: None,
            closed_form_quotient: None,
            threshold: None,
            verdict: None,
            agree: None,
            skipped: Some(reason),
        }
    }

    /// `|alpha^2 - (D-1)/(n-1)|` for evaluated rows.
    pub fn margin(&self) -> Option<f64> {
        Some((self.alpha_sq? - self.fs_bound?).abs())
    }
}

fn scan_row(weight: &MonomialWeight, lambda: f64, a: f64, b: f64) -> ScanRow {
    let dp = match CknParams::new(weight.exponents().to_vec(), a, b).and_then(|p| derive(&p)) {
        Ok(dp) => dp,
        Err(e) => return ScanRow::skipped(a, b, e.to_string()),
    };
    match detect_with_lambda(&dp, weight, lambda) {
        Ok(v) => ScanRow {
            a,
            b,
            alpha_sq: Some(dp.alpha_sq),
            fs_bound: Some(dp.fs_bound),
            regime: Some(dp.regime),
            lambda_theta_1: Some(lambda),
            quotient: Some(v.test_quotient),
            closed_form_quotient: Some(v.closed_form_quotient),
            threshold: Some(v.threshold),
            verdict: Some(v.verdict),
            agree: Some(v.agrees_with_fs),
            skipped: None,
        },
        Err(e) => ScanRow::skipped(a, b, e.to_string()),
    }
}

/// Detector over an `(a, b)` grid for one weight. The sphere eigenvalue is
/// computed once; rows are evaluated in parallel and returned in grid order.
pub fn phase_scan(
    weight: &MonomialWeight,
    grid: &ScanGrid,
    degree: usize,
    settings: &QuadSettings,
) -> Result<Vec<ScanRow>> {
    grid.validate()?;
    check_sphere_dim(weight.d())?;
    let lambda = sphere_first_eigenvalue(weight, degree, settings)?.first();
    Ok(grid
        .points()
        .par_iter()
        .map(|&(a, b)| scan_row(weight, lambda, a, b))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn weight(a: &[f64]) -> MonomialWeight {
        MonomialWeight::new(a.to_vec()).unwrap()
    }

    fn dp(a: &[f64], aa: f64, b: f64) -> DerivedParams {
        derive(&CknParams::new(a.to_vec(), aa, b).unwrap()).unwrap()
    }

    #[test]
    fn solve_diagonal_pencil() {
        let mut g = SymMatrix::zeros(2);
        let mut k = SymMatrix::zeros(2);
        g.set(0, 0, 2.0);
        g.set(1, 1, 0.5);
        k.set(0, 0, 6.0);
        k.set(1, 1, 0.5);
        let s = RayleighRitzBasis {
            degree: 1,
            gram: g,
            stiffness: k,
        }
        .solve()
        .unwrap();
        assert_relative_eq!(s.values[0], 1.0, max_relative = 1e-14);
        assert_relative_eq!(s.values[1], 3.0, max_relative = 1e-14);
        assert_eq!(s.rank, 2);
    }

    #[test]
    fn dependent_directions_are_dropped() {
        // Second basis function equals twice the first.
        let mut g = SymMatrix::zeros(2);
        let mut k = SymMatrix::zeros(2);
        for (i, j, c) in [(0, 0, 1.0), (0, 1, 2.0), (1, 1, 4.0)] {
            g.set(i, j, c);
            k.set(i, j, 5.0 * c);
        }
        let s = RayleighRitzBasis {
            degree: 1,
            gram: g,
            stiffness: k,
        }
        .solve()
        .unwrap();
        assert_eq!(s.rank, 1);
        assert_relative_eq!(s.first(), 5.0, max_relative = 1e-12);
        let empty = RayleighRitzBasis {
            degree: 1,
            gram: SymMatrix::zeros(0),
            stiffness: SymMatrix::zeros(0),
        };
        assert!(matches!(empty.solve(), Err(CknError::IllConditioned(_))));
    }

    #[test]
    fn round_sphere_first_eigenvalues() {
        let qs = QuadSettings::default();
        let s2 = sphere_first_eigenvalue(&weight(&[0.0, 0.0, 0.0]), 3, &qs).unwrap();
        assert_relative_eq!(s2.first(), 2.0, max_relative = 1e-10);
        // Second distinct eigenvalue of the round 2-sphere is 6.
        assert!(s2.values.iter().any(|v| (v - 6.0).abs() < 1e-9));
        let s1 = sphere_first_eigenvalue(&weight(&[0.0, 0.0]), 3, &qs).unwrap();
        assert_relative_eq!(s1.first(), 1.0, max_relative = 1e-10);
        assert!(sphere_first_eigenvalue(&weight(&[0.0, 0.0]), 1, &qs).is_err());
    }

    #[test]
    fn radial_gap_examples() {
        let c = dp(&[0.0, 0.0, 0.0], 0.0, 0.0);
        assert_relative_eq!(
            radial_spectral_gap_S(&c, 3).unwrap().first(),
            3.0,
            max_relative = 1e-10
        );
        let s = dp(&[1.0, 0.0], 0.0, 0.5);
        assert_relative_eq!(
            radial_spectral_gap_S(&s, 4).unwrap().first(),
            0.375,
            max_relative = 1e-10
        );
        assert!(radial_spectral_gap_S(&s, 0).is_err());
    }

    #[test]
    fn threshold_examples() {
        assert_relative_eq!(stability_threshold(&dp(&[0.0, 0.0, 0.0], 0.0, 0.0)), 3.0);
        assert_relative_eq!(
            stability_threshold(&dp(&[1.0, 0.0], -0.5, -0.5)),
            12.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn verdict_classification() {
        assert_eq!(Verdict::classify(1.0, 2.0), Verdict::Unstable);
        assert_eq!(
            Verdict::classify(2.0 + 5e-7, 2.0),
            Verdict::NeutralThreshold
        );
        assert_eq!(Verdict::classify(3.0, 2.0), Verdict::Stable);
        assert_eq!(Verdict::expected_for(Regime::Breaking), Verdict::Unstable);
    }

    #[test]
    fn grid_layout_and_validation() {
        let g = ScanGrid {
            a_range: (-1.0, 0.0),
            b_range: (0.0, 0.5),
            b_axis: BAxis::Offset,
            a_steps: 2,
            b_steps: 3,
        };
        let pts = g.points();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[0], (-1.0, -1.0));
        assert_eq!(pts[2], (-1.0, -0.5));
        assert_eq!(pts[5], (0.0, 0.5));
        let bad = ScanGrid {
            a_range: (1.0, 0.0),
            ..g
        };
        assert!(bad.validate().is_err());
        let zero = ScanGrid { a_steps: 0, ..g };
        assert!(zero.validate().is_err());
        let single = ScanGrid {
            a_range: (0.0, 0.0),
            a_steps: 1,
            ..g
        };
        assert!(single.validate().is_ok());
    }
}
