//! Third-order forward-mode jets in up to four chart coordinates.

use std::ops::{Add, Div, Mul, Neg, Sub};

pub const MAX_DIM: usize = 4;

type Grad = [f64; MAX_DIM];
type Hess = [[f64; MAX_DIM]; MAX_DIM];
type Third = [[[f64; MAX_DIM]; MAX_DIM]; MAX_DIM];

/// Value and partial derivatives up to order three at a chart point.
///
/// `order` records how many derivative levels are meaningful: variables and
/// constants start at 3 and every [`Jet3::partial`] lowers it by one. Higher
/// tensors are filled only on sorted index triples and then mirrored, so
/// `hess` and `third` are exactly symmetric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet3 {
    dim: usize,
    order: u8,
    point: [f64; MAX_DIM],
    value: f64,
    grad: Grad,
    hess: Hess,
    third: Third,
}

#[inline]
fn set2(h: &mut Hess, i: usize, j: usize, v: f64) {
    h[i][j] = v;
    h[j][i] = v;
}

#[inline]
fn set3(t: &mut Third, i: usize, j: usize, k: usize, v: f64) {
    t[i][j][k] = v;
    t[i][k][j] = v;
    t[j][i][k] = v;
    t[j][k][i] = v;
    t[k][i][j] = v;
    t[k][j][i] = v;
}

impl Jet3 {
    fn blank(dim: usize, order: u8, point: [f64; MAX_DIM]) -> Self {
        assert!(
            (1..=MAX_DIM).contains(&dim),
            "jet dimension {dim} out of range"
        );
        Self {
            dim,
            order,
            point,
            value: 0.0,
            grad: [0.0; MAX_DIM],
            hess: [[0.0; MAX_DIM]; MAX_DIM],
            third: [[[0.0; MAX_DIM]; MAX_DIM]; MAX_DIM],
        }
    }

    fn pack(point: &[f64]) -> [f64; MAX_DIM] {
        let mut p = [0.0; MAX_DIM];
        p[..point.len()].copy_from_slice(point);
        p
    }

    pub fn constant(point: &[f64], c: f64) -> Self {
        let mut j = Self::blank(point.len(), 3, Self::pack(point));
        j.value = c;
        j
    }

    /// Coordinate function `x_i` at `point`.
    pub fn variable(point: &[f64], i: usize) -> Self {
        let mut j = Self::constant(point, point[i]);
        j.grad[i] = 1.0;
        j
    }

    /// Coordinate function `x_i` carrying derivatives up to `order` only;
    /// arithmetic on such jets skips the higher levels.
    pub fn variable_to_order(point: &[f64], i: usize, order: u8) -> Self {
        assert!(order <= 3, "jet order {order} above three");
        let mut j = Self::variable(point, i);
        j.order = order;
        j
    }

    /// All coordinate functions at `point`.
    pub fn variables(point: &[f64]) -> Vec<Self> {
        (0..point.len()).map(|i| Self::variable(point, i)).collect()
    }

    /// All coordinate functions at `point`, truncated to `order`.
    pub fn variables_to_order(point: &[f64], order: u8) -> Vec<Self> {
        (0..point.len())
            .map(|i| Self::variable_to_order(point, i, order))
            .collect()
    }

    /// Builds a jet from derivative callbacks, evaluated on sorted indices only.
    pub fn from_fn(
        point: &[f64],
        value: f64,
        grad: impl Fn(usize) -> f64,
        hess: impl Fn(usize, usize) -> f64,
        third: impl Fn(usize, usize, usize) -> f64,
    ) -> Self {
        let n = point.len();
        let mut j = Self::constant(point, value);
        for i in 0..n {
            j.grad[i] = grad(i);
            for k in i..n {
                set2(&mut j.hess, i, k, hess(i, k));
                for l in k..n {
                    set3(&mut j.third, i, k, l, third(i, k, l));
                }
            }
        }
        j
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn point(&self) -> &[f64] {
        &self.point[..self.dim]
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn d1(&self, i: usize) -> f64 {
        self.grad[i]
    }

    pub fn d2(&self, i: usize, j: usize) -> f64 {
        self.hess[i][j]
    }

    pub fn d3(&self, i: usize, j: usize, k: usize) -> f64 {
        self.third[i][j][k]
    }

    fn same_frame(&self, other: &Self) {
        debug_assert_eq!(self.dim, other.dim, "jets of different dimension");
        debug_assert!(
            self.point == other.point,
            "jets at different points: {:?} vs {:?}",
            self.point(),
            other.point()
        );
    }

    /// `d/dx_i` of the jet; one derivative level is lost.
    pub fn partial(&self, i: usize) -> Self {
        assert!(self.order > 0, "partial of an order-0 jet");
        let n = self.dim;
        let mut r = Self::blank(n, self.order - 1, self.point);
        r.value = self.grad[i];
        for j in 0..n {
            r.grad[j] = self.hess[i][j];
            for k in 0..n {
                r.hess[j][k] = self.third[i][j][k];
            }
        }
        r
    }

    /// `psi(f)` given `derivs = [psi, psi', psi'', psi''']` at `f.value()`.
    pub fn compose(&self, derivs: [f64; 4]) -> Self {
        let n = self.dim;
        let [c0, c1, c2, c3] = derivs;
        let (g, h, t) = (&self.grad, &self.hess, &self.third);
        let mut r = Self::blank(n, self.order, self.point);
        r.value = c0;
        let ord = self.order;
        for i in 0..n {
            r.grad[i] = c1 * g[i];
            if ord < 2 {
                continue;
            }
            for j in i..n {
                set2(&mut r.hess, i, j, c2 * g[i] * g[j] + c1 * h[i][j]);
                if ord < 3 {
                    continue;
                }
                for k in j..n {
                    let v = c3 * g[i] * g[j] * g[k]
                        + c2 * (h[i][j] * g[k] + h[i][k] * g[j] + h[j][k] * g[i])
                        + c1 * t[i][j][k];
                    set3(&mut r.third, i, j, k, v);
                }
            }
        }
        r
    }

    pub fn scale(&self, c: f64) -> Self {
        self.compose([c * self.value, c, 0.0, 0.0])
    }

    pub fn add_const(&self, c: f64) -> Self {
        let mut r = *self;
        r.value += c;
        r
    }

    pub fn recip(&self) -> Self {
        let v = self.value;
        let i = 1.0 / v;
        self.compose([i, -i * i, 2.0 * i * i * i, -6.0 * i * i * i * i])
    }

    pub fn exp(&self) -> Self {
        let e = self.value.exp();
        self.compose([e, e, e, e])
    }

    pub fn ln(&self) -> Self {
        let v = self.value;
        self.compose([v.ln(), 1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v)])
    }

    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    pub fn powf(&self, e: f64) -> Self {
        let v = self.value;
        self.compose([
            v.powf(e),
            e * v.powf(e - 1.0),
            e * (e - 1.0) * v.powf(e - 2.0),
            e * (e - 1.0) * (e - 2.0) * v.powf(e - 3.0),
        ])
    }

    /// Integer power, exact at zero and for negative bases.
    pub fn powi(&self, e: i32) -> Self {
        let v = self.value;
        let ef = e as f64;
        let p = |k: i32| {
            if e - k < 0 && v == 0.0 {
                0.0
            } else {
                v.powi(e - k)
            }
        };
        self.compose([
            p(0),
            if e == 0 { 0.0 } else { ef * p(1) },
            if e == 0 || e == 1 {
                0.0
            } else {
                ef * (ef - 1.0) * p(2)
            },
            if (0..=2).contains(&e) {
                0.0
            } else {
                ef * (ef - 1.0) * (ef - 2.0) * p(3)
            },
        ])
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.compose([s, c, -s, -c])
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.compose([c, -s, -c, s])
    }

    pub fn tanh(&self) -> Self {
        let t = self.value.tanh();
        let s = 1.0 - t * t;
        self.compose([t, s, -2.0 * t * s, s * (6.0 * t * t - 2.0)])
    }
}

impl Add for Jet3 {
    type Output = Jet3;
    fn add(self, o: Jet3) -> Jet3 {
        self.same_frame(&o);
        let mut r = self;
        r.order = self.order.min(o.order);
        r.value += o.value;
        let n = self.dim;
        for i in 0..n {
            r.grad[i] += o.grad[i];
            if r.order < 2 {
                continue;
            }
            for j in 0..n {
                r.hess[i][j] += o.hess[i][j];
                if r.order < 3 {
                    continue;
                }
                for k in 0..n {
                    r.third[i][j][k] += o.third[i][j][k];
                }
            }
        }
        r
    }
}

impl Neg for Jet3 {
    type Output = Jet3;
    fn neg(self) -> Jet3 {
        self.scale(-1.0)
    }
}

impl Sub for Jet3 {
    type Output = Jet3;
    fn sub(self, o: Jet3) -> Jet3 {
        self + (-o)
    }
}

impl Mul for Jet3 {
    type Output = Jet3;
    fn mul(self, o: Jet3) -> Jet3 {
        self.same_frame(&o);
        let n = self.dim;
        let (a, b) = (&self, &o);
        let mut r = Jet3::blank(n, a.order.min(b.order), a.point);
        r.value = a.value * b.value;
        let ord = r.order;
        for i in 0..n {
            r.grad[i] = a.grad[i] * b.value + a.value * b.grad[i];
            if ord < 2 {
                continue;
            }
            for j in i..n {
                let h = a.hess[i][j] * b.value
                    + a.grad[i] * b.grad[j]
                    + a.grad[j] * b.grad[i]
                    + a.value * b.hess[i][j];
                set2(&mut r.hess, i, j, h);
                if ord < 3 {
                    continue;
                }
                for k in j..n {
                    let t = a.third[i][j][k] * b.value
                        + a.hess[i][j] * b.grad[k]
                        + a.hess[i][k] * b.grad[j]
                        + a.hess[j][k] * b.grad[i]
                        + a.grad[i] * b.hess[j][k]
                        + a.grad[j] * b.hess[i][k]
                        + a.grad[k] * b.hess[i][j]
                        + a.value * b.third[i][j][k];
                    set3(&mut r.third, i, j, k, t);
                }
            }
        }
        r
    }
}

impl Div for Jet3 {
    type Output = Jet3;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet3) -> Jet3 {
        self * o.recip()
    }
}

impl Add<f64> for Jet3 {
    type Output = Jet3;
    fn add(self, c: f64) -> Jet3 {
        self.add_const(c)
    }
}

impl Sub<f64> for Jet3 {
    type Output = Jet3;
    fn sub(self, c: f64) -> Jet3 {
        self.add_const(-c)
    }
}

impl Mul<f64> for Jet3 {
    type Output = Jet3;
    fn mul(self, c: f64) -> Jet3 {
        self.scale(c)
    }
}

impl Div<f64> for Jet3 {
    type Output = Jet3;
    fn div(self, c: f64) -> Jet3 {
        self.scale(1.0 / c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn poly(p: &[f64]) -> Jet3 {
        // f = x^2 y + 3 x z^3 - y z + 2
        let v = Jet3::variables(p);
        let (x, y, z) = (v[0], v[1], v[2]);
        x * x * y + x * z.powi(3) * 3.0 - y * z + 2.0
    }

    #[test]
    fn polynomial_jet_matches_hand_derivatives() {
        let p = [0.7, -1.3, 0.4];
        let f = poly(&p);
        let (x, y, z) = (p[0], p[1], p[2]);
        assert_relative_eq!(
            f.value(),
            x * x * y + 3.0 * x * z.powi(3) - y * z + 2.0,
            epsilon = 1e-15
        );
        assert_relative_eq!(f.d1(0), 2.0 * x * y + 3.0 * z.powi(3), epsilon = 1e-15);
        assert_relative_eq!(f.d1(2), 9.0 * x * z * z - y, epsilon = 1e-15);
        assert_relative_eq!(f.d2(0, 1), 2.0 * x, epsilon = 1e-15);
        assert_relative_eq!(f.d2(2, 2), 18.0 * x * z, epsilon = 1e-15);
        assert_relative_eq!(f.d3(0, 2, 2), 18.0 * z, epsilon = 1e-15);
        assert_relative_eq!(f.d3(2, 0, 2), 18.0 * z, epsilon = 1e-15);
        assert_relative_eq!(f.d3(0, 0, 1), 2.0, epsilon = 1e-15);
        assert_eq!(f.d3(1, 1, 1), 0.0);
    }

    #[test]
    fn tensors_are_exactly_symmetric() {
        let p = [0.3, 1.1, -0.2];
        let v = Jet3::variables(&p);
        let f = (v[0] * v[1]).sin() * (v[2] + v[0] * 2.0).exp() / (v[1] * v[1] + 1.0);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(f.d2(i, j), f.d2(j, i));
                for k in 0..3 {
                    assert_eq!(f.d3(i, j, k), f.d3(k, i, j));
                    assert_eq!(f.d3(i, j, k), f.d3(j, i, k));
                }
            }
        }
    }

    #[test]
    fn partial_lowers_order() {
        let p = [0.5, 0.5];
        let f = Jet3::variable(&p, 0).powi(4);
        assert_eq!(f.order(), 3);
        let fx = f.partial(0);
        assert_eq!(fx.order(), 2);
        assert_relative_eq!(fx.value(), 4.0 * 0.125, epsilon = 1e-15);
        assert_relative_eq!(fx.d2(0, 0), 24.0 * 0.5, epsilon = 1e-15);
        let prod = fx * f;
        assert_eq!(prod.order(), 2);
    }

    #[test]
    fn first_order_jets_keep_value_and_gradient() {
        let p = [0.3, -0.7];
        let build = |x: Jet3, y: Jet3| (x * y).sin() + x.powf(1.5) / (y * y + 1.0);
        let full = build(Jet3::variable(&p, 0), Jet3::variable(&p, 1));
        let low = build(
            Jet3::variable_to_order(&p, 0, 1),
            Jet3::variable_to_order(&p, 1, 1),
        );
        assert_eq!(low.order(), 1);
        assert_eq!(low.value(), full.value());
        assert_eq!((low.d1(0), low.d1(1)), (full.d1(0), full.d1(1)));
        assert_eq!(low.d2(0, 1), 0.0);
    }

    #[test]
    fn elementary_functions_match_closed_forms() {
        let x = Jet3::variable(&[0.8], 0);
        let checks: [(Jet3, [f64; 4]); 5] = [
            (x.exp(), [0.8f64.exp(); 4]),
            (x.ln(), [0.8f64.ln(), 1.0 / 0.8, -1.0 / 0.64, 2.0 / 0.512]),
            (
                x.sin(),
                [0.8f64.sin(), 0.8f64.cos(), -0.8f64.sin(), -0.8f64.cos()],
            ),
            (
                x.sqrt(),
                [
                    0.8f64.sqrt(),
                    0.5 * 0.8f64.powf(-0.5),
                    -0.25 * 0.8f64.powf(-1.5),
                    0.375 * 0.8f64.powf(-2.5),
                ],
            ),
            (
                x.recip(),
                [1.25, -1.5625, 2.0 * 1.25f64.powi(3), -6.0 * 1.25f64.powi(4)],
            ),
        ];
        for (j, d) in checks {
            assert_relative_eq!(j.value(), d[0], max_relative = 1e-15);
            assert_relative_eq!(j.d1(0), d[1], max_relative = 1e-15);
            assert_relative_eq!(j.d2(0, 0), d[2], max_relative = 1e-15);
            assert_relative_eq!(j.d3(0, 0, 0), d[3], max_relative = 1e-14);
        }
    }

    #[test]
    fn powi_handles_zero_and_negative_base() {
        let x = Jet3::variable(&[0.0], 0);
        let c = x.powi(3);
        assert_eq!(
            [c.value(), c.d1(0), c.d2(0, 0), c.d3(0, 0, 0)],
            [0.0, 0.0, 0.0, 6.0]
        );
        let x = Jet3::variable(&[-2.0], 0);
        let c = x.powi(2);
        assert_eq!(
            [c.value(), c.d1(0), c.d2(0, 0), c.d3(0, 0, 0)],
            [4.0, -4.0, 2.0, 0.0]
        );
    }

    #[test]
    fn tanh_derivatives() {
        let x = Jet3::variable(&[0.3], 0);
        let t = x.tanh();
        let alt = (x.scale(2.0).exp() - 1.0) / (x.scale(2.0).exp() + 1.0);
        assert_relative_eq!(t.d3(0, 0, 0), alt.d3(0, 0, 0), max_relative = 1e-13);
    }
}
