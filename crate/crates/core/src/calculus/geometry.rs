//! Carré du champ, generator and iterated carré du champ for a weighted
//! chart with diagonal inverse metric.

use super::jet::Jet3;
use crate::error::{CknError, Result};

/// Chart data at one point: `g^{ii}` for the active coordinates and the log
/// of the measure density with respect to Lebesgue measure in the chart.
///
/// The generator is `L f = (1/rho) d_i(rho g^{ii} d_i f)`; coordinates not in
/// `active` are treated as parameters.
#[derive(Debug, Clone)]
pub struct DiagonalGeometry {
    active: Vec<usize>,
    ginv: Vec<Jet3>,
    log_rho: Jet3,
    drift: Vec<Jet3>,
}

impl DiagonalGeometry {
    /// `ginv[a]` is the inverse-metric entry for coordinate `active[a]`.
    pub fn new(active: Vec<usize>, ginv: Vec<Jet3>, log_rho: Jet3) -> Self {
        assert_eq!(active.len(), ginv.len());
        let drift = active
            .iter()
            .zip(&ginv)
            .map(|(&i, g)| g.partial(i) + *g * log_rho.partial(i))
            .collect();
        Self {
            active,
            ginv,
            log_rho,
            drift,
        }
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn ginv(&self, a: usize) -> &Jet3 {
        &self.ginv[a]
    }

    pub fn log_rho(&self) -> &Jet3 {
        &self.log_rho
    }

    /// `Gamma(f, h)` as a jet, one order below its inputs.
    pub fn gamma_jet(&self, f: &Jet3, h: &Jet3) -> Jet3 {
        let mut acc: Option<Jet3> = None;
        for (a, &i) in self.active.iter().enumerate() {
            let term = self.ginv[a] * f.partial(i) * h.partial(i);
            acc = Some(match acc {
                None => term,
                Some(s) => s + term,
            });
        }
        acc.expect("geometry with no active coordinate")
    }

    /// `L f` as a jet, two orders below `f`.
    pub fn l_jet(&self, f: &Jet3) -> Jet3 {
        let mut acc: Option<Jet3> = None;
        for (a, &i) in self.active.iter().enumerate() {
            let fi = f.partial(i);
            let term = self.ginv[a] * fi.partial(i) + self.drift[a] * fi;
            acc = Some(match acc {
                None => term,
                Some(s) => s + term,
            });
        }
        acc.expect("geometry with no active coordinate")
    }

    pub fn gamma(&self, f: &Jet3, h: &Jet3) -> f64 {
        self.active
            .iter()
            .enumerate()
            .map(|(a, &i)| self.ginv[a].value() * f.d1(i) * h.d1(i))
            .sum()
    }

    pub fn l(&self, f: &Jet3) -> Result<f64> {
        require_order(f, 2, "L")?;
        Ok(self
            .active
            .iter()
            .enumerate()
            .map(|(a, &i)| self.ginv[a].value() * f.d2(i, i) + self.drift[a].value() * f.d1(i))
            .sum())
    }

    /// Sum of the magnitudes of the terms of `L f`, the floating-point scale
    /// against which the computed `L f` is accurate.
    pub fn l_scale(&self, f: &Jet3) -> Result<f64> {
        require_order(f, 2, "L")?;
        Ok(self
            .active
            .iter()
            .enumerate()
            .map(|(a, &i)| {
                (self.ginv[a].value() * f.d2(i, i)).abs() + (self.drift[a].value() * f.d1(i)).abs()
            })
            .sum())
    }

    /// `Gamma_2(f) = L(Gamma f)/2 - Gamma(f, L f)`.
    pub fn gamma2(&self, f: &Jet3) -> Result<f64> {
        require_order(f, 3, "Gamma_2")?;
        let gf = self.gamma_jet(f, f);
        let lf = self.l_jet(f);
        Ok(0.5 * self.l(&gf)? - self.gamma(f, &lf))
    }
}

pub(crate) fn require_order(f: &Jet3, order: u8, what: &str) -> Result<()> {
    if f.order() < order {
        return Err(CknError::Domain(format!(
            "{what} needs a jet of order {order}, got {}",
            f.order()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Flat R^2 with Lebesgue measure.
    fn flat(p: &[f64]) -> DiagonalGeometry {
        let one = Jet3::constant(p, 1.0);
        DiagonalGeometry::new(vec![0, 1], vec![one, one], Jet3::constant(p, 0.0))
    }

    #[test]
    fn flat_space_gamma2_is_hessian_norm() {
        let p = [0.3, -0.7];
        let v = Jet3::variables(&p);
        let f = v[0] * v[0] * v[1] + v[1].powi(3) + v[0];
        let g = flat(&p);
        // Bochner on flat space: Gamma_2 = |Hess f|^2.
        let hs: f64 = (0..2)
            .flat_map(|i| (0..2).map(move |j| (i, j)))
            .map(|(i, j)| f.d2(i, j).powi(2))
            .sum();
        assert!((g.gamma2(&f).unwrap() - hs).abs() < 1e-13);
        assert!((g.l(&f).unwrap() - (f.d2(0, 0) + f.d2(1, 1))).abs() < 1e-14);
    }

    #[test]
    fn l_scale_sums_term_magnitudes() {
        // Harmonic x^2 - y^2: L f = 0 from two terms of size 2.
        let p = [0.5, 0.25];
        let v = Jet3::variables(&p);
        let f = v[0] * v[0] - v[1] * v[1];
        let g = flat(&p);
        assert!(g.l(&f).unwrap().abs() < 1e-15);
        assert!((g.l_scale(&f).unwrap() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn order_is_checked() {
        let p = [0.1, 0.2];
        let f = Jet3::variable(&p, 0).partial(0);
        assert!(flat(&p).gamma2(&f).is_err());
    }

    #[test]
    fn gaussian_ornstein_uhlenbeck() {
        // rho = exp(-|x|^2/2): L = Delta - x.grad, Gamma_2 = |Hess|^2 + Gamma.
        let p = [0.4, 1.2];
        let v = Jet3::variables(&p);
        let one = Jet3::constant(&p, 1.0);
        let lr = (v[0] * v[0] + v[1] * v[1]).scale(-0.5);
        let g = DiagonalGeometry::new(vec![0, 1], vec![one, one], lr);
        let f = v[0] * v[1] + v[0].powi(2);
        let hs = f.d2(0, 0).powi(2) + 2.0 * f.d2(0, 1).powi(2) + f.d2(1, 1).powi(2);
        let gam = f.d1(0).powi(2) + f.d1(1).powi(2);
        assert!((g.gamma2(&f).unwrap() - hs - gam).abs() < 1e-13);
    }
}
