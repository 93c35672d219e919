//! Parameter algebra for the monomial CKN family.
//!
//! A parameter set is a monomial weight `x^A` on `R^d` together with the two
//! exponents `a` and `b`. Everything else (monomial dimension `D`, critical
//! exponent `p`, generalized dimension `n`, `alpha`) is derived here.

use serde::{Deserialize, Serialize};

use crate::error::{CknError, Result};

/// Tolerance used to classify the Felli-Schneider regime when none is given.
pub const DEFAULT_TIE_TOL: f64 = 1e-12;

/// Exponents `A_1, ..., A_d` of the monomial weight `x^A = prod |x_i|^{A_i}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonomialWeight {
    exponents: Vec<f64>,
}

impl MonomialWeight {
    pub fn new(exponents: Vec<f64>) -> Result<Self> {
        if exponents.len() < 2 {
            return Err(CknError::DimensionTooSmall(exponents.len()));
        }
        for (index, &value) in exponents.iter().enumerate() {
            if !(value.is_finite() && value >= 0.0) {
                return Err(CknError::NegativeExponent { index, value });
            }
        }
        Ok(Self { exponents })
    }

    /// The unweighted case `A = 0` in dimension `d`.
    pub fn unweighted(d: usize) -> Result<Self> {
        Self::new(vec![0.0; d])
    }

    pub fn d(&self) -> usize {
        self.exponents.len()
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    pub fn exponent(&self, i: usize) -> f64 {
        self.exponents[i]
    }

    /// Indices `i` with `A_i > 0`.
    pub fn charged(&self) -> Vec<usize> {
        (0..self.d()).filter(|&i| self.exponents[i] > 0.0).collect()
    }

    pub fn is_charged(&self, i: usize) -> bool {
        self.exponents[i] > 0.0
    }

    /// Number of charged coordinates, `k = |K|`.
    pub fn k(&self) -> usize {
        self.exponents.iter().filter(|&&a| a > 0.0).count()
    }

    /// `|A| = sum A_i`.
    pub fn abs(&self) -> f64 {
        self.exponents.iter().sum()
    }

    /// Monomial dimension `D = d + |A|`.
    pub fn monomial_dim(&self) -> f64 {
        self.d() as f64 + self.abs()
    }

    /// Whether the last coordinate is free of weight (`A_d = 0`), which is
    /// what the warped-product picture of the compactified model needs.
    pub fn last_uncharged(&self) -> bool {
        self.exponents[self.d() - 1] == 0.0
    }
}

/// Input family `(d, A, a, b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CknParams {
    pub weight: MonomialWeight,
    pub a: f64,
    pub b: f64,
}

impl CknParams {
    pub fn new(exponents: Vec<f64>, a: f64, b: f64) -> Result<Self> {
        let params = Self {
            weight: MonomialWeight::new(exponents)?,
            a,
            b,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn d(&self) -> usize {
        self.weight.d()
    }

    /// Checks `0 <= b - a < 1` and `a < a_c`.
    pub fn validate(&self) -> Result<()> {
        if !self.a.is_finite() {
            return Err(CknError::NonFinite("a"));
        }
        if !self.b.is_finite() {
            return Err(CknError::NonFinite("b"));
        }
        let delta = self.b - self.a;
        if delta == 1.0 {
            return Err(CknError::HardyEndpoint(delta));
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(CknError::DeltaOutOfRange(delta));
        }
        let big_d = self.weight.monomial_dim();
        let a_c = 0.5 * (big_d - 2.0);
        if self.a >= a_c {
            return Err(CknError::AboveCritical { a: self.a, a_c });
        }
        let denom = big_d - 2.0 + 2.0 * delta;
        if denom <= 0.0 {
            return Err(CknError::InfiniteExponent(denom));
        }
        Ok(())
    }
}

/// Felli-Schneider regime of a parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// `alpha^2 < (D-1)/(n-1)`.
    Symmetric,
    /// `alpha^2 = (D-1)/(n-1)` within the tie tolerance.
    Threshold,
    /// `alpha^2 > (D-1)/(n-1)`.
    Breaking,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Symmetric => "Symmetric",
            Regime::Threshold => "Threshold",
            Regime::Breaking => "Breaking",
        }
    }

    /// Whether the sharp constant is proved for this regime.
    pub fn constant_is_sharp(self) -> bool {
        !matches!(self, Regime::Breaking)
    }
}

/// All quantities derived from a [`CknParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    /// Topological dimension `d`.
    pub d: usize,
    /// Monomial dimension `D = d + |A|`.
    pub monomial_dim: f64,
    /// Critical exponent `p = 2D / (D - 2 + 2(b - a))`.
    pub p: f64,
    /// Generalized dimension `n = 2p / (p - 2)`.
    pub n: f64,
    pub alpha: f64,
    /// `a_c = (D - 2) / 2`.
    pub a_crit: f64,
    /// `b - a`.
    pub delta: f64,
    pub a: f64,
    pub b: f64,
    /// Left side of the Felli-Schneider comparison, `alpha^2`.
    pub alpha_sq: f64,
    /// Right side, `(D - 1) / (n - 1)`.
    pub fs_bound: f64,
    pub regime: Regime,
}

impl DerivedParams {
    /// Residuals of `alpha n = D - b p` and `2a = (D-2) - alpha (n-2)`, each
    /// divided by the largest term magnitude (at least one). `p` and `n` grow
    /// without bound as `D - 2 + 2 delta` and `1 - delta` approach zero.
    pub fn identity_residuals(&self) -> (f64, f64) {
        let (an, bp) = (self.alpha * self.n, self.b * self.p);
        let r1 = an - (self.monomial_dim - bp);
        let s1 = an.abs().max(self.monomial_dim).max(bp.abs()).max(1.0);
        // n - 2 = (D - 2 + 2 delta)/(1 - delta) without cancellation near n = 2.
        let an2 = self.alpha * (self.monomial_dim - 2.0 + 2.0 * self.delta) / (1.0 - self.delta);
        let r2 = 2.0 * self.a - ((self.monomial_dim - 2.0) - an2);
        let s2 = (2.0 * self.a)
            .abs()
            .max((self.monomial_dim - 2.0).abs())
            .max(an2.abs())
            .max(1.0);
        (r1.abs() / s1, r2.abs() / s2)
    }

    /// Constant `A_p = 4 / (alpha^2 n (n-2))` of the tight Sobolev inequality
    /// on the compactified model.
    pub fn tight_constant(&self) -> f64 {
        4.0 / (self.alpha_sq * self.n * (self.n - 2.0))
    }

    /// Yamabe potential `alpha^2 n (n-2) / 4`.
    pub fn yamabe_potential(&self) -> f64 {
        0.25 * self.alpha_sq * self.n * (self.n - 2.0)
    }
}

pub fn derive(params: &CknParams) -> Result<DerivedParams> {
    derive_with_tol(params, DEFAULT_TIE_TOL)
}

pub fn derive_with_tol(params: &CknParams, tie_tol: f64) -> Result<DerivedParams> {
    params.validate()?;
    let (a, b) = (params.a, params.b);
    let big_d = params.weight.monomial_dim();
    let delta = b - a;
    let p = 2.0 * big_d / (big_d - 2.0 + 2.0 * delta);
    let n = big_d / (1.0 - delta);
    let alpha = 1.0 + a - 0.5 * b * p;
    let alpha_sq = alpha * alpha;
    let fs_bound = (big_d - 1.0) / (n - 1.0);
    let mut dp = DerivedParams {
        d: params.d(),
        monomial_dim: big_d,
        p,
        n,
        alpha,
        a_crit: 0.5 * (big_d - 2.0),
        delta,
        a,
        b,
        alpha_sq,
        fs_bound,
        regime: Regime::Threshold,
    };
    dp.regime = felli_schneider(&dp, tie_tol);
    Ok(dp)
}

/// Classifies `alpha^2` against `(D-1)/(n-1)` with an absolute tie tolerance.
pub fn felli_schneider(dp: &DerivedParams, tie_tol: f64) -> Regime {
    let gap = dp.alpha_sq - dp.fs_bound;
    if gap.abs() <= tie_tol {
        Regime::Threshold
    } else if gap < 0.0 {
        Regime::Symmetric
    } else {
        Regime::Breaking
    }
}

/// Which hypotheses of the sharp-constant theorem hold for a parameter set.
///
/// Nothing downstream refuses to run when a flag is false; the flags become
/// warnings on the results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub n_gt_4: bool,
    pub last_uncharged: bool,
    pub fs_condition: bool,
    /// `alpha^2 <= (D-1)/(n-1) < 1`, under which every optimizer is radial.
    pub strict_classification: bool,
    pub warnings: Vec<String>,
}

impl HypothesisReport {
    pub fn all_satisfied(&self) -> bool {
        self.n_gt_4 && self.last_uncharged && self.fs_condition
    }
}

pub fn theorem_hypotheses(params: &CknParams, dp: &DerivedParams) -> HypothesisReport {
    let n_gt_4 = dp.n > 4.0;
    let last_uncharged = params.weight.last_uncharged();
    let fs_condition = dp.regime != Regime::Breaking;
    let strict_classification = fs_condition && dp.fs_bound < 1.0;
    let mut warnings = Vec::new();
    if !n_gt_4 {
        warnings.push(format!(
            "n = {} <= 4: the density and regularity arguments behind the sharp constant need n > 4",
            dp.n
        ));
    }
    if !last_uncharged {
        warnings.push("A_d != 0: no uncharged axis for the warped-product representation".into());
    }
    if !fs_condition {
        warnings.push(format!(
            "alpha^2 = {} > (D-1)/(n-1) = {}: outside the Felli-Schneider range, radial functions are not optimal",
            dp.alpha_sq, dp.fs_bound
        ));
    } else if !strict_classification {
        warnings.push("(D-1)/(n-1) >= 1: optimizers are not classified here".into());
    }
    HypothesisReport {
        n_gt_4,
        last_uncharged,
        fs_condition,
        strict_classification,
        warnings,
    }
}

/// Interpolation exponents `(theta, r)` used to place `p` between `2` and the
/// monomial Sobolev exponent `2D/(D-2)`:
/// `1/p = theta/2 + (1-theta)(D-2)/(2D)` and `r = D + (p/2)(2-D)`.
pub fn interpolation_exponents(monomial_dim: f64, p: f64) -> Result<(f64, f64)> {
    if !(monomial_dim >= 2.0) {
        return Err(CknError::Domain(format!(
            "monomial dimension {monomial_dim} is below 2"
        )));
    }
    let inv_q = (monomial_dim - 2.0) / (2.0 * monomial_dim);
    let inv_p = 1.0 / p;
    if !(p >= 2.0 && inv_p >= inv_q) {
        return Err(CknError::Domain(format!(
            "p = {p} is outside [2, 2D/(D-2)] for D = {monomial_dim}"
        )));
    }
    let theta = (inv_p - inv_q) / (0.5 - inv_q);
    let r = monomial_dim + 0.5 * p * (2.0 - monomial_dim);
    Ok((theta, r))
}

/// `A_q = 4(nu-1) / (nu (nu-2) alpha^2 (n-1))` with `nu = 2q/(q-2)`.
pub fn subcritical_constant_from_nu(nu: f64, alpha: f64, n: f64) -> f64 {
    4.0 * (nu - 1.0) / (nu * (nu - 2.0) * alpha * alpha * (n - 1.0))
}

/// Constant of the subcritical tight inequality at exponent `2 < q < p`,
/// returned together with `nu = 2q/(q-2)`.
pub fn subcritical_constant(q: f64, dp: &DerivedParams) -> Result<(f64, f64)> {
    if !(q > 2.0 && q < dp.p) {
        return Err(CknError::Domain(format!(
            "q = {q} is outside (2, p) with p = {}",
            dp.p
        )));
    }
    let nu = 2.0 * q / (q - 2.0);
    Ok((nu, subcritical_constant_from_nu(nu, dp.alpha, dp.n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn dp(exps: Vec<f64>, a: f64, b: f64) -> DerivedParams {
        derive(&CknParams::new(exps, a, b).unwrap()).unwrap()
    }

    #[test]
    fn classical_sobolev_reduction() {
        let dp = dp(vec![0.0; 3], 0.0, 0.0);
        assert_eq!(dp.monomial_dim, 3.0);
        assert_eq!(dp.p, 6.0);
        assert_eq!(dp.n, 3.0);
        assert_eq!(dp.alpha, 1.0);
        assert_eq!(dp.regime, Regime::Threshold);
    }

    #[test]
    fn half_plane_symmetric_case() {
        let dp = dp(vec![1.0, 0.0], 0.0, 0.5);
        assert_eq!(dp.monomial_dim, 3.0);
        assert_relative_eq!(dp.p, 3.0, epsilon = 1e-15);
        assert_relative_eq!(dp.n, 6.0, epsilon = 1e-15);
        assert_relative_eq!(dp.alpha, 0.25, epsilon = 1e-15);
        assert_relative_eq!(dp.fs_bound, 0.4, epsilon = 1e-15);
        assert_eq!(dp.regime, Regime::Symmetric);
        let (r1, r2) = dp.identity_residuals();
        assert!(r1 <= 1e-12 && r2 <= 1e-12);
    }

    #[test]
    fn identity_residuals_are_scale_free() {
        // delta = 1e-7 on the unweighted plane gives p = 2e7.
        let dp = dp(vec![0.0, 0.0], -1.0, -1.0 + 1e-7);
        assert!(dp.p > 1e7);
        let (r1, r2) = dp.identity_residuals();
        assert!(r1 <= 1e-12 && r2 <= 1e-12, "{r1} {r2}");
        let mut bad = dp;
        bad.alpha *= 1.0 + 1e-9;
        let (r1, _) = bad.identity_residuals();
        assert!(r1 > 1e-10, "{r1}");
    }

    #[test]
    fn half_plane_breaking_case() {
        let dp = dp(vec![1.0, 0.0], -0.5, -0.5);
        assert_eq!(dp.p, 6.0);
        assert_eq!(dp.n, 3.0);
        assert_eq!(dp.alpha, 2.0);
        assert_eq!(dp.alpha * dp.n, dp.monomial_dim - dp.b * dp.p);
        assert_eq!(dp.regime, Regime::Breaking);
    }

    #[test]
    fn domain_errors_name_the_constraint() {
        assert!(matches!(
            CknParams::new(vec![1.0, 0.0], 0.0, 1.0),
            Err(CknError::HardyEndpoint(_))
        ));
        assert!(matches!(
            CknParams::new(vec![1.0, 0.0], 0.0, -0.1),
            Err(CknError::DeltaOutOfRange(_))
        ));
        assert!(matches!(
            CknParams::new(vec![1.0, 0.0], 0.5, 0.6),
            Err(CknError::AboveCritical { .. })
        ));
        assert!(matches!(
            CknParams::new(vec![-1.0, 0.0], 0.0, 0.0),
            Err(CknError::NegativeExponent { index: 0, .. })
        ));
        assert!(matches!(
            CknParams::new(vec![1.0], 0.0, 0.0),
            Err(CknError::DimensionTooSmall(1))
        ));
        assert!(matches!(
            CknParams::new(vec![0.0, 0.0], -1.0, -1.0),
            Err(CknError::InfiniteExponent(_))
        ));
    }

    #[test]
    fn zero_weight_is_accepted() {
        let params = CknParams::new(vec![0.0, 0.0, 0.0, 0.0], 0.0, 0.2).unwrap();
        assert_eq!(params.weight.k(), 0);
        assert!(derive(&params).is_ok());
    }

    #[test]
    fn felli_schneider_examples() {
        assert_eq!(dp(vec![0.0; 3], 0.0, 0.0).regime, Regime::Threshold);
        assert_eq!(dp(vec![1.0, 0.0], 0.0, 0.5).regime, Regime::Symmetric);
        assert_eq!(dp(vec![1.0, 0.0], -0.5, -0.5).regime, Regime::Breaking);
    }

    #[test]
    fn hypotheses_examples() {
        let params = CknParams::new(vec![1.0, 0.0], 0.0, 0.5).unwrap();
        let h = theorem_hypotheses(&params, &derive(&params).unwrap());
        assert!(h.n_gt_4 && h.last_uncharged && h.fs_condition && h.strict_classification);
        assert!(h.warnings.is_empty());

        let params = CknParams::new(vec![0.0; 3], 0.0, 0.0).unwrap();
        let dp3 = derive(&params).unwrap();
        let h = theorem_hypotheses(&params, &dp3);
        assert!(!h.n_gt_4);
        assert!(!h.strict_classification);
        assert!(dp3.fs_bound >= 1.0);

        let params = CknParams::new(vec![1.0, 0.0], -0.5, -0.5).unwrap();
        let h = theorem_hypotheses(&params, &derive(&params).unwrap());
        assert!(!h.fs_condition && !h.n_gt_4);
        assert!(!h.all_satisfied());
    }

    #[test]
    fn interpolation_endpoints() {
        let (theta, r) = interpolation_exponents(3.0, 6.0).unwrap();
        assert_eq!((theta, r), (0.0, 0.0));
        let (theta, r) = interpolation_exponents(3.0, 2.0).unwrap();
        assert_eq!((theta, r), (1.0, 2.0));
        assert!(interpolation_exponents(3.0, 7.0).is_err());
        assert!(interpolation_exponents(3.0, 1.5).is_err());
    }

    #[test]
    fn interpolation_midpoint_solves_both_relations() {
        // Independent solve of 1/3 = theta/2 + (1-theta)/6 gives theta = 1/2.
        let (theta, r) = interpolation_exponents(3.0, 3.0).unwrap();
        assert_relative_eq!(theta, 0.5, epsilon = 1e-15);
        assert_relative_eq!(r, 1.5, epsilon = 1e-15);
        assert!((2.0 * r / (theta * 3.0) - 2.0).abs() <= 1e-12);
    }

    #[test]
    fn subcritical_limit_is_tight_constant() {
        let dp = dp(vec![1.0, 0.0], 0.0, 0.5);
        let q = dp.p * (1.0 - 1e-6);
        let (nu, a_q) = subcritical_constant(q, &dp).unwrap();
        assert!(nu > dp.n);
        assert_relative_eq!(a_q, dp.tight_constant(), max_relative = 1e-5);
    }

    #[test]
    fn subcritical_formula_plug_in() {
        // nu = 4, alpha = 1, n = 5: 4*3 / (4*2*1*4) = 3/8
        assert_relative_eq!(
            subcritical_constant_from_nu(4.0, 1.0, 5.0),
            0.375,
            epsilon = 1e-15
        );
        // q = 4 is above p = 10/3 for the classical d = 5 parameters.
        let dp5 = dp(vec![0.0; 5], 0.0, 0.0);
        assert!(subcritical_constant(4.0, &dp5).is_err());
        assert!(subcritical_constant(2.0, &dp5).is_err());
    }

    fn valid_params() -> impl Strategy<Value = CknParams> {
        (2usize..=4)
            .prop_flat_map(|d| {
                (
                    proptest::collection::vec(prop_oneof![Just(0.0), 0.0..3.0f64], d),
                    0.0..0.99f64,
                    0.0..1.0f64,
                )
            })
            .prop_filter_map("valid", |(exps, delta, s)| {
                let big_d = exps.len() as f64 + exps.iter().sum::<f64>();
                let a_c = 0.5 * (big_d - 2.0);
                let a = a_c - 0.01 - 3.0 * s;
                CknParams::new(exps, a, a + delta).ok()
            })
    }

    proptest! {
        #[test]
        fn identities_and_ordering(params in valid_params()) {
            let dp = derive(&params).unwrap();
            let (r1, r2) = dp.identity_residuals();
            prop_assert!(r1 <= 1e-12 && r2 <= 1e-12);
            prop_assert!(dp.d as f64 <= dp.monomial_dim && dp.monomial_dim <= dp.n * (1.0 + 1e-15));
            prop_assert!(dp.alpha > 0.0);
            let n_alt = 2.0 * dp.p / (dp.p - 2.0);
            prop_assert!((n_alt - dp.n).abs() <= 1e-12 * dp.n.max(1.0));
        }

        #[test]
        fn regime_stable_under_tolerance(params in valid_params(), tol in 1e-14..1e-7f64) {
            let dp = derive(&params).unwrap();
            if (dp.alpha_sq - dp.fs_bound).abs() > 1e-6 {
                prop_assert_eq!(felli_schneider(&dp, tol), dp.regime);
            }
        }
    }
}
