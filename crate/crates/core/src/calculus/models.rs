//! The three weighted manifolds: Euclidean `E`, the monomial sphere and the
//! warped model `S = (-1, 1) x sphere`.

use serde::{Deserialize, Serialize};

use super::geometry::DiagonalGeometry;
use super::jet::Jet3;
use crate::error::{CknError, Result};
use crate::params::{DerivedParams, MonomialWeight};

/// Compactified radial coordinate `y = (r^{2a} - 1)/(r^{2a} + 1)`.
pub fn y_of_r(r: f64, alpha: f64) -> f64 {
    (alpha * r.ln()).tanh()
}

/// Inverse of [`y_of_r`].
pub fn r_of_y(y: f64, alpha: f64) -> f64 {
    (y.atanh() / alpha).exp()
}

/// `R^d_*` with inverse metric `|x|^{2(1-alpha)} delta` and measure
/// `|x|^{-bp} x^A dx`.
#[derive(Debug, Clone)]
pub struct ModelE {
    pub dp: DerivedParams,
    pub weight: MonomialWeight,
}

impl ModelE {
    pub fn new(dp: DerivedParams, weight: MonomialWeight) -> Self {
        Self { dp, weight }
    }

    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.weight.d() {
            return Err(CknError::ChartDomain(format!(
                "point has {} coordinates, expected {}",
                x.len(),
                self.weight.d()
            )));
        }
        if x.iter().all(|&v| v == 0.0) {
            return Err(CknError::ChartDomain("the origin is excluded".into()));
        }
        for (i, &v) in x.iter().enumerate() {
            if self.weight.is_charged(i) && !(v > 0.0) {
                return Err(CknError::ChartDomain(format!(
                    "charged coordinate x_{i} = {v} must be positive"
                )));
            }
        }
        Ok(())
    }

    fn r2(x: &[Jet3]) -> Jet3 {
        x.iter()
            .map(|v| *v * *v)
            .reduce(|a, b| a + b)
            .expect("empty point")
    }

    /// `W_E = -log x^A - ((alpha (n - d) - |A|)/2) log |x|^2` as a jet.
    pub fn w_e(&self, x: &[f64]) -> Result<Jet3> {
        self.check_point(x)?;
        let v = Jet3::variables(x);
        let dp = &self.dp;
        let c = 0.5 * (dp.alpha * (dp.n - dp.d as f64) - self.weight.abs());
        let mut w = Self::r2(&v).ln().scale(-c);
        for (i, &a) in self.weight.exponents().iter().enumerate() {
            if a > 0.0 {
                w = w - v[i].ln().scale(a);
            }
        }
        Ok(w)
    }

    pub fn geometry_at(&self, x: &[f64]) -> Result<DiagonalGeometry> {
        self.check_point(x)?;
        let v = Jet3::variables(x);
        let r2 = Self::r2(&v);
        let g = r2.powf(1.0 - self.dp.alpha);
        let bp = self.dp.b * self.dp.p;
        let mut log_rho = r2.ln().scale(-0.5 * bp);
        for (i, &a) in self.weight.exponents().iter().enumerate() {
            if a > 0.0 {
                log_rho = log_rho + v[i].ln().scale(a);
            }
        }
        let d = x.len();
        Ok(DiagonalGeometry::new((0..d).collect(), vec![g; d], log_rho))
    }

    /// `Gamma_E(f, h) = |x|^{2(1-alpha)} grad f . grad h`.
    pub fn gamma(&self, f: &Jet3, h: &Jet3) -> Result<f64> {
        Ok(self.geometry_at(f.point())?.gamma(f, h))
    }

    pub fn l(&self, f: &Jet3) -> Result<f64> {
        self.geometry_at(f.point())?.l(f)
    }

    pub fn l_scale(&self, f: &Jet3) -> Result<f64> {
        self.geometry_at(f.point())?.l_scale(f)
    }

    pub fn gamma2(&self, f: &Jet3) -> Result<f64> {
        self.geometry_at(f.point())?.gamma2(f)
    }
}

/// Which pole of the projection axis the stereographic chart omits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pole {
    /// Projection from `theta_axis = +1`.
    North,
    /// Projection from `theta_axis = -1`.
    South,
}

/// A point of the monomial sphere in one of the two stereographic charts.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint {
    pub pole: Pole,
    pub z: Vec<f64>,
}

/// Beyond this chart radius a point is moved to the opposite chart.
pub const CHART_SWITCH_RADIUS: f64 = 2.0;

/// The monomial sphere `{theta in S^{d-1} : theta_i > 0 for charged i}` with
/// measure `theta^A dV`, in stereographic charts along an uncharged axis.
///
/// In a chart, `phi = (1 + |z|^2)/2`, the inverse metric is `phi^2 delta` and
/// `W_theta = |A| log phi - sum A_i log z_i`.
#[derive(Debug, Clone)]
pub struct MonomialSphere {
    weight: MonomialWeight,
    axis: usize,
    others: Vec<usize>,
    fault: f64,
}

impl MonomialSphere {
    pub fn new(weight: MonomialWeight) -> Result<Self> {
        let d = weight.d();
        if d < 2 {
            return Err(CknError::DimensionTooSmall(d));
        }
        let axis = (0..d)
            .rev()
            .find(|&i| !weight.is_charged(i))
            .ok_or_else(|| {
                CknError::ChartDomain("every coordinate is charged; no projection axis".into())
            })?;
        let others = (0..d).filter(|&i| i != axis).collect();
        Ok(Self {
            weight,
            axis,
            others,
            fault: 0.0,
        })
    }

    /// Adds `eps * z_0` to the log-density seen by the operators (not by the
    /// quadrature), a negative control for the checks.
    pub fn with_fault(mut self, eps: f64) -> Self {
        self.fault = eps;
        self
    }

    pub fn fault(&self) -> f64 {
        self.fault
    }

    pub fn weight(&self) -> &MonomialWeight {
        &self.weight
    }

    pub fn d(&self) -> usize {
        self.weight.d()
    }

    /// Ambient index of the projection axis.
    pub fn axis(&self) -> usize {
        self.axis
    }

    /// Ambient index of chart coordinate `j`.
    pub fn ambient_index(&self, j: usize) -> usize {
        self.others[j]
    }

    pub fn chart_dim(&self) -> usize {
        self.d() - 1
    }

    pub fn check_chart(&self, z: &[f64]) -> Result<()> {
        if z.len() != self.chart_dim() {
            return Err(CknError::ChartDomain(format!(
                "chart point has {} coordinates, expected {}",
                z.len(),
                self.chart_dim()
            )));
        }
        for (j, &v) in z.iter().enumerate() {
            if !v.is_finite() {
                return Err(CknError::ChartDomain(format!(
                    "chart coordinate z_{j} = {v}"
                )));
            }
            if self.weight.is_charged(self.others[j]) && !(v > 0.0) {
                return Err(CknError::ChartDomain(format!(
                    "charged chart coordinate z_{j} = {v} must be positive"
                )));
            }
        }
        Ok(())
    }

    pub fn to_ambient(&self, p: &SpherePoint) -> Vec<f64> {
        let r2: f64 = p.z.iter().map(|v| v * v).sum();
        let phi = 0.5 * (1.0 + r2);
        let mut theta = vec![0.0; self.d()];
        for (j, &v) in p.z.iter().enumerate() {
            theta[self.others[j]] = v / phi;
        }
        let t = (r2 - 1.0) / (r2 + 1.0);
        theta[self.axis] = match p.pole {
            Pole::North => t,
            Pole::South => -t,
        };
        theta
    }

    /// Chart point for an ambient unit vector, preferring the north chart
    /// unless its radius exceeds [`CHART_SWITCH_RADIUS`].
    pub fn from_ambient(&self, theta: &[f64]) -> Result<SpherePoint> {
        if theta.len() != self.d() {
            return Err(CknError::ChartDomain(
                "ambient point has wrong length".into(),
            ));
        }
        let norm: f64 = theta.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(CknError::ChartDomain(format!("|theta| = {norm} is not 1")));
        }
        let t = theta[self.axis];
        let rest: Vec<f64> = self.others.iter().map(|&i| theta[i]).collect();
        let north: Vec<f64> = rest.iter().map(|v| v / (1.0 - t)).collect();
        let rn: f64 = north.iter().map(|v| v * v).sum::<f64>().sqrt();
        let p = if t < 1.0 && rn <= CHART_SWITCH_RADIUS {
            SpherePoint {
                pole: Pole::North,
                z: north,
            }
        } else {
            SpherePoint {
                pole: Pole::South,
                z: rest.iter().map(|v| v / (1.0 + t)).collect(),
            }
        };
        self.check_chart(&p.z)?;
        Ok(p)
    }

    fn phi(z: &[Jet3]) -> Jet3 {
        let r2 = z
            .iter()
            .map(|v| *v * *v)
            .reduce(|a, b| a + b)
            .expect("empty chart");
        (r2 + 1.0).scale(0.5)
    }

    /// Ambient coordinates `theta_i(z)` as jets over the frame of `z`.
    pub fn ambient_jets(&self, pole: Pole, z: &[Jet3]) -> Vec<Jet3> {
        let phi = Self::phi(z);
        let inv = phi.recip();
        let mut out = vec![inv; self.d()];
        for (j, v) in z.iter().enumerate() {
            out[self.others[j]] = *v * inv;
        }
        out[self.axis] = match pole {
            Pole::North => inv.scale(-1.0) + 1.0,
            Pole::South => inv - 1.0,
        };
        out
    }

    /// `W_theta` as a jet over the frame of `z`.
    pub fn w_theta(&self, z: &[Jet3]) -> Jet3 {
        let mut w = Self::phi(z).ln().scale(self.weight.abs());
        for (j, v) in z.iter().enumerate() {
            let a = self.weight.exponent(self.others[j]);
            if a > 0.0 {
                w = w - v.ln().scale(a);
            }
        }
        w
    }

    /// Log-density of `theta^A dV` against `dz`.
    pub fn log_density(&self, z: &[Jet3]) -> Jet3 {
        let mut l = self.w_theta(z).scale(-1.0) - Self::phi(z).ln().scale(self.chart_dim() as f64);
        if self.fault != 0.0 {
            l = l + z[0].scale(self.fault);
        }
        l
    }

    /// Sphere geometry over a larger frame: chart coordinate `j` lives at
    /// frame index `offset + j`.
    pub fn geometry_in_frame(&self, z: &[Jet3], offset: usize) -> DiagonalGeometry {
        let phi = Self::phi(z);
        let g = phi * phi;
        DiagonalGeometry::new(
            (offset..offset + z.len()).collect(),
            vec![g; z.len()],
            self.log_density(z),
        )
    }

    pub fn geometry_at(&self, z: &[f64]) -> Result<DiagonalGeometry> {
        self.check_chart(z)?;
        Ok(self.geometry_in_frame(&Jet3::variables(z), 0))
    }

    /// `Gamma^theta(f, h)` for jets in chart coordinates.
    pub fn gamma(&self, f: &Jet3, h: &Jet3) -> Result<f64> {
        Ok(self.geometry_at(f.point())?.gamma(f, h))
    }

    /// `L_theta f = Delta f - Gamma^theta(W_theta, f)`.
    pub fn l(&self, f: &Jet3) -> Result<f64> {
        self.geometry_at(f.point())?.l(f)
    }

    pub fn gamma2(&self, f: &Jet3) -> Result<f64> {
        self.geometry_at(f.point())?.gamma2(f)
    }

    /// Jets of the ambient coordinates at a chart point, in its own frame.
    pub fn input_jets(&self, p: &SpherePoint) -> Result<Vec<Jet3>> {
        self.check_chart(&p.z)?;
        Ok(self.ambient_jets(p.pole, &Jet3::variables(&p.z)))
    }
}

/// The warped model `S` in the frame `(y, z)`: inverse metric
/// `alpha^2 (1-y^2)` in `y`, `phi^2/(1-y^2)` in `z`, and measure
/// `(1-y^2)^{n/2-1}/alpha dy d mu_sphere`.
#[derive(Debug, Clone)]
pub struct ModelS {
    pub dp: DerivedParams,
    pub sphere: MonomialSphere,
}

/// S-geometry and the sphere geometry acting on the `z` block of the same frame.
#[derive(Debug, Clone)]
pub struct WarpedGeometry {
    pub s: DiagonalGeometry,
    pub theta: DiagonalGeometry,
    pub y: f64,
}

impl ModelS {
    pub fn new(dp: DerivedParams, weight: MonomialWeight) -> Result<Self> {
        Ok(Self {
            dp,
            sphere: MonomialSphere::new(weight)?,
        })
    }

    pub fn with_fault(mut self, eps: f64) -> Self {
        self.sphere = self.sphere.with_fault(eps);
        self
    }

    pub fn frame_dim(&self) -> usize {
        self.sphere.d()
    }

    pub fn check_point(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.frame_dim() {
            return Err(CknError::ChartDomain(
                "S-chart point has wrong length".into(),
            ));
        }
        let y = point[0];
        if !(y.abs() < 1.0) {
            return Err(CknError::ChartDomain(format!(
                "|y| = {} must be below 1",
                y.abs()
            )));
        }
        self.sphere.check_chart(&point[1..])
    }

    pub fn geometry_at(&self, point: &[f64]) -> Result<WarpedGeometry> {
        self.geometry_at_order(point, 3)
    }

    /// [`Self::geometry_at`] with coefficient jets truncated to `order`;
    /// order one is enough for `L_S` and `Gamma_S` values.
    pub fn geometry_at_order(&self, point: &[f64], order: u8) -> Result<WarpedGeometry> {
        self.check_point(point)?;
        let v = Jet3::variables_to_order(point, order);
        let y = v[0];
        let z = &v[1..];
        let one_minus = (y * y).scale(-1.0) + 1.0;
        let theta = self.sphere.geometry_in_frame(z, 1);
        let alpha = self.dp.alpha;
        let g_y = one_minus.scale(alpha * alpha);
        let phi = MonomialSphere::phi(z);
        let g_z = phi * phi / one_minus;
        let log_rho =
            one_minus.ln().scale(0.5 * self.dp.n - 1.0) + theta.log_rho().add_const(-alpha.ln());
        let mut ginv = vec![g_y];
        ginv.extend(std::iter::repeat_n(g_z, z.len()));
        let s = DiagonalGeometry::new((0..point.len()).collect(), ginv, log_rho);
        Ok(WarpedGeometry {
            s,
            theta,
            y: point[0],
        })
    }

    /// `Gamma_S(f, h) = alpha^2 (1-y^2) f_y h_y + Gamma^theta(f, h)/(1-y^2)`.
    pub fn gamma(&self, f: &Jet3, h: &Jet3) -> Result<f64> {
        Ok(self.geometry_at(f.point())?.s.gamma(f, h))
    }

    pub fn l(&self, f: &Jet3) -> Result<f64> {
        self.geometry_at(f.point())?.s.l(f)
    }

    pub fn gamma2(&self, f: &Jet3) -> Result<f64> {
        self.geometry_at(f.point())?.s.gamma2(f)
    }

    /// `Gamma_S(F)` from the gradient of `F` in the ambient variables
    /// `(y, theta_1, ..., theta_d)` at a point of `S`. The monomial sphere
    /// carries the round metric, so the angular part is the tangential
    /// projection `|grad F|^2 - (theta . grad F)^2`.
    pub fn gamma_ambient(&self, y: f64, theta: &[f64], grad: &[f64]) -> f64 {
        let gt = &grad[1..=theta.len()];
        let sq: f64 = gt.iter().map(|g| g * g).sum();
        let radial: f64 = gt.iter().zip(theta).map(|(g, t)| g * t).sum();
        let one_minus = 1.0 - y * y;
        self.dp.alpha_sq * one_minus * grad[0] * grad[0] + (sq - radial * radial) / one_minus
    }

    /// Frame point for `(y, theta)`.
    pub fn point_of(&self, y: f64, theta: &[f64]) -> Result<(Pole, Vec<f64>)> {
        let sp = self.sphere.from_ambient(theta)?;
        let mut p = vec![y];
        p.extend_from_slice(&sp.z);
        self.check_point(&p)?;
        Ok((sp.pole, p))
    }

    /// Jets of `(y, theta_1, ..., theta_d)` at a frame point, for expressions
    /// written in those variables.
    pub fn input_jets(&self, pole: Pole, point: &[f64]) -> Result<Vec<Jet3>> {
        self.input_jets_to_order(pole, point, 3)
    }

    pub fn input_jets_to_order(&self, pole: Pole, point: &[f64], order: u8) -> Result<Vec<Jet3>> {
        self.check_point(point)?;
        let v = Jet3::variables_to_order(point, order);
        let mut out = vec![v[0]];
        out.extend(self.sphere.ambient_jets(pole, &v[1..]));
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::expr::Expr;
    use crate::params::{derive, CknParams};
    use approx::assert_relative_eq;

    fn params(a: Vec<f64>, aa: f64, b: f64) -> (CknParams, DerivedParams) {
        let p = CknParams::new(a, aa, b).unwrap();
        let dp = derive(&p).unwrap();
        (p, dp)
    }

    #[test]
    fn y_round_trip() {
        for &alpha in &[0.25, 1.0, 1.7] {
            for &r in &[0.05, 0.2, 1.0, 3.0, 8.0] {
                let y = y_of_r(r, alpha);
                let r2a = r.powf(2.0 * alpha);
                assert_relative_eq!(y, (r2a - 1.0) / (r2a + 1.0), epsilon = 1e-15);
                assert_relative_eq!(r_of_y(y, alpha), r, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn euclidean_reduction() {
        let (p, dp) = params(vec![0.0; 3], 0.0, 0.0);
        let m = ModelE::new(dp, p.weight);
        let x = [0.3, 0.5, -0.2];
        let v = Jet3::variables(&x);
        assert_relative_eq!(m.gamma(&v[0], &v[0]).unwrap(), 1.0, epsilon = 1e-15);
        let c = Jet3::constant(&x, 4.0);
        assert_eq!(m.gamma(&c, &c).unwrap(), 0.0);
        assert_eq!(m.l(&c).unwrap(), 0.0);
        // Delta |x|^2 = 2d
        let r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        assert_relative_eq!(m.l(&r2).unwrap(), 6.0, epsilon = 1e-14);
    }

    #[test]
    fn euclidean_density_matches_weight() {
        let (p, dp) = params(vec![1.0, 0.5, 0.0], -0.3, 0.1);
        let m = ModelE::new(dp, p.weight.clone());
        for x in [[0.3, 0.8, -0.4], [1.5, 0.1, 2.0], [0.01, 3.0, 0.0]] {
            let w = m.w_e(&x).unwrap().value();
            let r = (x.iter().map(|v| v * v).sum::<f64>()).sqrt();
            let lhs = (-w).exp() * r.powf(dp.d as f64 * (dp.alpha - 1.0));
            let xa: f64 = x
                .iter()
                .zip(p.weight.exponents())
                .map(|(v, a)| v.abs().powf(*a))
                .product();
            let rhs = r.powf(-dp.b * dp.p) * xa;
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
            let g = m.geometry_at(&x).unwrap();
            assert_relative_eq!(
                g.log_rho().value(),
                rhs.ln(),
                max_relative = 1e-12,
                epsilon = 1e-13
            );
        }
        assert!(m.check_point(&[0.0, 0.0, 0.0]).is_err());
        assert!(m.check_point(&[-0.1, 1.0, 0.0]).is_err());
    }

    #[test]
    fn sphere_chart_round_trip_and_density() {
        let w = MonomialWeight::new(vec![1.0, 2.0, 0.0]).unwrap();
        let s = MonomialSphere::new(w.clone()).unwrap();
        assert_eq!(s.axis(), 2);
        for theta in [
            [0.6f64, 0.0, 0.8],
            [0.3, 0.4, -0.866_025_403_784_438_6],
            [0.1, 0.1, 0.989_949_493_661_166_5],
        ] {
            let mut th = theta;
            th[1] = th[1].max(1e-3);
            let nrm: f64 = th.iter().map(|v| v * v).sum::<f64>().sqrt();
            th.iter_mut().for_each(|v| *v /= nrm);
            let p = s.from_ambient(&th).unwrap();
            let back = s.to_ambient(&p);
            for i in 0..3 {
                assert!((back[i] - th[i]).abs() < 1e-14);
            }
            // theta^A dV against dz: vol factor phi^{-(d-1)}.
            let z = Jet3::variables(&p.z);
            let ld = s.log_density(&z).value();
            let phi = 0.5 * (1.0 + p.z.iter().map(|v| v * v).sum::<f64>());
            let expected = th[0].ln() + 2.0 * th[1].ln() - 2.0 * phi.ln();
            assert_relative_eq!(ld, expected, epsilon = 1e-12);
        }
        assert!(MonomialSphere::new(MonomialWeight::new(vec![1.0, 1.0]).unwrap()).is_err());
    }

    #[test]
    fn s_model_examples_for_f_equal_y() {
        let (p, dp) = params(vec![1.0, 0.0], 0.0, 0.5);
        let m = ModelS::new(dp, p.weight).unwrap();
        let a2 = dp.alpha * dp.alpha;
        for &y in &[-0.8, -0.1, 0.0, 0.45, 0.93] {
            let pt = [y, 0.7];
            let f = Jet3::variable(&pt, 0);
            assert_relative_eq!(
                m.gamma(&f, &f).unwrap(),
                a2 * (1.0 - y * y),
                epsilon = 1e-15
            );
            assert_relative_eq!(m.l(&f).unwrap(), -a2 * dp.n * y, epsilon = 1e-15);
            let g2 = m.gamma2(&f).unwrap();
            assert_relative_eq!(g2, a2 * a2 * (dp.n - 1.0 + y * y), epsilon = 1e-14);
            let cd = g2 - a2 * (dp.n - 1.0) * a2 * (1.0 - y * y) - (a2 * dp.n * y).powi(2) / dp.n;
            assert!(cd.abs() < 1e-14);
            let c = Jet3::constant(&pt, 2.5);
            assert_eq!(m.gamma2(&c).unwrap(), 0.0);
        }
        assert!(m.geometry_at(&[1.0, 0.5]).is_err());
    }

    #[test]
    fn axis_coordinate_is_eigenfunction() {
        for a in [
            vec![1.0, 0.0],
            vec![2.0, 0.0],
            vec![1.0, 1.0, 0.0],
            vec![0.5, 0.0, 0.0],
            vec![0.0, 0.0],
        ] {
            let w = MonomialWeight::new(a).unwrap();
            let s = MonomialSphere::new(w.clone()).unwrap();
            let big_d = w.monomial_dim();
            for zz in [0.3, 1.1, 1.9] {
                for pole in [Pole::North, Pole::South] {
                    let z: Vec<f64> = (0..s.chart_dim())
                        .map(|j| zz * (1.0 + 0.3 * j as f64))
                        .collect();
                    let th = s.input_jets(&SpherePoint { pole, z }).unwrap();
                    let f = th[s.axis()];
                    let lf = s.l(&f).unwrap();
                    assert!((lf + (big_d - 1.0) * f.value()).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn expressions_in_ambient_variables() {
        let w = MonomialWeight::unweighted(3).unwrap();
        let s = MonomialSphere::new(w).unwrap();
        // |theta|^2 = 1 is constant on the sphere.
        let e = Expr::sum((0..3).map(|i| Expr::var(i).powi(2)));
        let th = s
            .input_jets(&SpherePoint {
                pole: Pole::South,
                z: vec![0.4, -0.9],
            })
            .unwrap();
        let j = e.eval_jet(&th);
        assert!((j.value() - 1.0).abs() < 1e-15);
        assert!(j.d1(0).abs() < 1e-14 && j.d2(0, 1).abs() < 1e-14 && j.d3(0, 1, 1).abs() < 1e-13);
    }

    #[test]
    fn ambient_gamma_matches_chart_geometry() {
        let (p, dp) = params(vec![1.0, 0.0, 0.0], 0.0, 0.3);
        let m = ModelS::new(dp, p.weight).unwrap();
        let e = Expr::var(0) * Expr::var(1).powi(2) + (Expr::var(3) * 2.0).sin() - Expr::var(2);
        for (y, th) in [
            (0.2, [0.6, 0.0, 0.8]),
            (-0.7, [0.1, -0.7, -0.72]),
            (0.9, [0.3, 0.6, -0.8]),
        ] {
            let n: f64 = th.iter().map(|v| v * v).sum::<f64>().sqrt();
            let th: Vec<f64> = th.iter().map(|v| v / n).collect();
            let (pole, pt) = m.point_of(y, &th).unwrap();
            let full = e.eval_jet(&m.input_jets(pole, &pt).unwrap());
            let g = m.gamma(&full, &full).unwrap();
            let mut x = vec![y];
            x.extend(&th);
            let (_, grad) = e.eval_grad(&x);
            assert_relative_eq!(m.gamma_ambient(y, &th, &grad), g, max_relative = 1e-12);
        }
    }
}
