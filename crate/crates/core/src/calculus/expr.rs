//! Expression trees for test functions, evaluated on reals or on jets.

use std::ops::{Add, Div, Mul, Neg, Sub};

use rand::Rng;

use super::jet::{Jet3, MAX_DIM};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Powi(Box<Expr>, i32),
    Powf(Box<Expr>, f64),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
    Ln(Box<Expr>),
    Sqrt(Box<Expr>),
    /// Smooth step: 0 for `u <= 0`, 1 for `u >= 1`, `C^inf` in between.
    Step(Box<Expr>),
}

/// `[s, s', s'', s''']` of the smooth step
/// `s(u) = e(u) / (e(u) + e(1-u))`, `e(u) = exp(-1/u)`.
pub fn smooth_step_derivs(u: f64) -> [f64; 4] {
    // exp(-1/u) / u^6 is below 1e-290 here.
    const FLAT: f64 = 1.0 / 700.0;
    if u <= FLAT {
        return [0.0; 4];
    }
    if u >= 1.0 - FLAT {
        return [1.0, 0.0, 0.0, 0.0];
    }
    let x = Jet3::variable(&[u], 0);
    let e1 = x.recip().scale(-1.0).exp();
    let e2 = (x.scale(-1.0) + 1.0).recip().scale(-1.0).exp();
    let s = e1 / (e1 + e2);
    [s.value(), s.d1(0), s.d2(0, 0), s.d3(0, 0, 0)]
}

impl Expr {
    pub fn var(i: usize) -> Self {
        Expr::Var(i)
    }

    pub fn c(v: f64) -> Self {
        Expr::Const(v)
    }

    pub fn powi(self, e: i32) -> Self {
        Expr::Powi(Box::new(self), e)
    }

    pub fn powf(self, e: f64) -> Self {
        Expr::Powf(Box::new(self), e)
    }

    pub fn sin(self) -> Self {
        Expr::Sin(Box::new(self))
    }

    pub fn cos(self) -> Self {
        Expr::Cos(Box::new(self))
    }

    pub fn exp(self) -> Self {
        Expr::Exp(Box::new(self))
    }

    pub fn ln(self) -> Self {
        Expr::Ln(Box::new(self))
    }

    pub fn sqrt(self) -> Self {
        Expr::Sqrt(Box::new(self))
    }

    pub fn step(self) -> Self {
        Expr::Step(Box::new(self))
    }

    /// Largest variable index used, plus one.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.arity().max(b.arity())
            }
            Expr::Neg(a)
            | Expr::Powi(a, _)
            | Expr::Powf(a, _)
            | Expr::Sin(a)
            | Expr::Cos(a)
            | Expr::Exp(a)
            | Expr::Ln(a)
            | Expr::Sqrt(a)
            | Expr::Step(a) => a.arity(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => x[*i],
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Neg(a) => -a.eval(x),
            Expr::Powi(a, e) => a.eval(x).powi(*e),
            Expr::Powf(a, e) => a.eval(x).powf(*e),
            Expr::Sin(a) => a.eval(x).sin(),
            Expr::Cos(a) => a.eval(x).cos(),
            Expr::Exp(a) => a.eval(x).exp(),
            Expr::Ln(a) => a.eval(x).ln(),
            Expr::Sqrt(a) => a.eval(x).sqrt(),
            Expr::Step(a) => smooth_step_derivs(a.eval(x))[0],
        }
    }

    /// Evaluates with jets substituted for the variables; `x` must be non-empty
    /// and share one chart point.
    pub fn eval_jet(&self, x: &[Jet3]) -> Jet3 {
        match self {
            Expr::Const(c) => Jet3::constant(x[0].point(), *c),
            Expr::Var(i) => x[*i],
            Expr::Add(a, b) => a.eval_jet(x) + b.eval_jet(x),
            Expr::Sub(a, b) => a.eval_jet(x) - b.eval_jet(x),
            Expr::Mul(a, b) => a.eval_jet(x) * b.eval_jet(x),
            Expr::Div(a, b) => a.eval_jet(x) / b.eval_jet(x),
            Expr::Neg(a) => -a.eval_jet(x),
            Expr::Powi(a, e) => a.eval_jet(x).powi(*e),
            Expr::Powf(a, e) => a.eval_jet(x).powf(*e),
            Expr::Sin(a) => a.eval_jet(x).sin(),
            Expr::Cos(a) => a.eval_jet(x).cos(),
            Expr::Exp(a) => a.eval_jet(x).exp(),
            Expr::Ln(a) => a.eval_jet(x).ln(),
            Expr::Sqrt(a) => a.eval_jet(x).sqrt(),
            Expr::Step(a) => {
                let j = a.eval_jet(x);
                j.compose(smooth_step_derivs(j.value()))
            }
        }
    }

    /// Value and gradient at `x`, by first-order forward mode.
    pub fn eval_grad(&self, x: &[f64]) -> (f64, [f64; MAX_DIM]) {
        assert!(x.len() <= MAX_DIM, "at most {MAX_DIM} variables");
        let d = self.dual(x);
        (d.v, d.g)
    }

    fn dual(&self, x: &[f64]) -> Dual {
        match self {
            Expr::Const(c) => Dual::constant(*c),
            Expr::Var(i) => {
                let mut g = [0.0; MAX_DIM];
                g[*i] = 1.0;
                Dual { v: x[*i], g }
            }
            Expr::Add(a, b) => a.dual(x).combine(&b.dual(x), 1.0, 1.0, |p, q| p + q),
            Expr::Sub(a, b) => a.dual(x).combine(&b.dual(x), 1.0, -1.0, |p, q| p - q),
            Expr::Mul(a, b) => {
                let (p, q) = (a.dual(x), b.dual(x));
                p.combine(&q, q.v, p.v, |p, q| p * q)
            }
            Expr::Div(a, b) => {
                let (p, q) = (a.dual(x), b.dual(x));
                p.combine(&q, 1.0 / q.v, -p.v / (q.v * q.v), |p, q| p / q)
            }
            Expr::Neg(a) => a.dual(x).chain_value(|v| (-v, -1.0)),
            Expr::Powi(a, e) => a.dual(x).chain_value(|v| {
                let d = if *e == 0 {
                    0.0
                } else {
                    *e as f64 * v.powi(e - 1)
                };
                (v.powi(*e), d)
            }),
            Expr::Powf(a, e) => a.dual(x).chain_value(|v| (v.powf(*e), e * v.powf(e - 1.0))),
            Expr::Sin(a) => a.dual(x).chain_value(|v| (v.sin(), v.cos())),
            Expr::Cos(a) => a.dual(x).chain_value(|v| (v.cos(), -v.sin())),
            Expr::Exp(a) => a.dual(x).chain_value(|v| (v.exp(), v.exp())),
            Expr::Ln(a) => a.dual(x).chain_value(|v| (v.ln(), 1.0 / v)),
            Expr::Sqrt(a) => a.dual(x).chain_value(|v| (v.sqrt(), 0.5 / v.sqrt())),
            Expr::Step(a) => {
                let inner = a.dual(x);
                let s = smooth_step_derivs(inner.v);
                inner.chain(s[0], s[1])
            }
        }
    }

    /// Replaces every `Var(i)` by `map(i)`.
    pub fn substitute(&self, map: &dyn Fn(usize) -> Expr) -> Expr {
        let s = |e: &Expr| Box::new(e.substitute(map));
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var(i) => map(*i),
            Expr::Add(a, b) => Expr::Add(s(a), s(b)),
            Expr::Sub(a, b) => Expr::Sub(s(a), s(b)),
            Expr::Mul(a, b) => Expr::Mul(s(a), s(b)),
            Expr::Div(a, b) => Expr::Div(s(a), s(b)),
            Expr::Neg(a) => Expr::Neg(s(a)),
            Expr::Powi(a, e) => Expr::Powi(s(a), *e),
            Expr::Powf(a, e) => Expr::Powf(s(a), *e),
            Expr::Sin(a) => Expr::Sin(s(a)),
            Expr::Cos(a) => Expr::Cos(s(a)),
            Expr::Exp(a) => Expr::Exp(s(a)),
            Expr::Ln(a) => Expr::Ln(s(a)),
            Expr::Sqrt(a) => Expr::Sqrt(s(a)),
            Expr::Step(a) => Expr::Step(s(a)),
        }
    }

    /// Sum of terms, `0` when empty.
    pub fn sum(terms: impl IntoIterator<Item = Expr>) -> Expr {
        terms
            .into_iter()
            .reduce(|a, b| a + b)
            .unwrap_or(Expr::Const(0.0))
    }
}

macro_rules! bin_op {
    ($tr:ident, $m:ident, $v:ident) => {
        impl $tr for Expr {
            type Output = Expr;
            fn $m(self, o: Expr) -> Expr {
                Expr::$v(Box::new(self), Box::new(o))
            }
        }
        impl $tr<f64> for Expr {
            type Output = Expr;
            fn $m(self, o: f64) -> Expr {
                Expr::$v(Box::new(self), Box::new(Expr::Const(o)))
            }
        }
    };
}

bin_op!(Add, add, Add);
bin_op!(Sub, sub, Sub);
bin_op!(Mul, mul, Mul);
bin_op!(Div, div, Div);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

/// Exponent vectors of all monomials in `nvars` variables of total degree
/// at most `degree`, in graded lexicographic order.
pub fn monomial_exponents(nvars: usize, degree: u32) -> Vec<Vec<u32>> {
    fn rec(nvars: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == nvars {
            out.push(prefix.clone());
            return;
        }
        for e in 0..=left {
            prefix.push(e);
            rec(nvars, left - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(nvars, degree, &mut Vec::new(), &mut out);
    out.sort_by_key(|e| (e.iter().sum::<u32>(), std::cmp::Reverse(e.clone())));
    out
}

/// `prod_i x_i^{e_i}`.
pub fn monomial(exponents: &[u32]) -> Expr {
    let factors: Vec<Expr> = exponents
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(i, &e)| {
            if e == 1 {
                Expr::var(i)
            } else {
                Expr::var(i).powi(e as i32)
            }
        })
        .collect();
    factors
        .into_iter()
        .reduce(|a, b| a * b)
        .unwrap_or(Expr::Const(1.0))
}

/// Polynomial with every monomial of degree `<= degree` and coefficients
/// uniform in `[-1, 1]`.
pub fn random_polynomial<R: Rng + ?Sized>(rng: &mut R, nvars: usize, degree: u32) -> Expr {
    Expr::sum(
        monomial_exponents(nvars, degree)
            .into_iter()
            .map(|e| monomial(&e) * rng.random_range(-1.0..1.0)),
    )
}

/// `sum_k (a_k cos(k.x) + b_k sin(k.x))` over integer frequency vectors with
/// `|k|_1 <= degree`, coefficients uniform in `[-1, 1]` scaled by `amplitude`.
pub fn random_trig_polynomial<R: Rng + ?Sized>(
    rng: &mut R,
    nvars: usize,
    degree: u32,
    amplitude: f64,
) -> Expr {
    let mut terms = Vec::new();
    for e in monomial_exponents(nvars, degree) {
        // Signs make the frequencies cover every orthant up to symmetry.
        let phase = Expr::sum(e.iter().enumerate().filter(|(_, &k)| k > 0).map(|(i, &k)| {
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            Expr::var(i) * (sign * k as f64)
        }));
        let a = amplitude * rng.random_range(-1.0..1.0);
        let b = amplitude * rng.random_range(-1.0..1.0);
        terms.push(phase.clone().cos() * a);
        if e.iter().any(|&k| k > 0) {
            terms.push(phase.sin() * b);
        }
    }
    Expr::sum(terms)
}

/// Value and gradient, the first-order part of a jet.
#[derive(Clone, Copy)]
struct Dual {
    v: f64,
    g: [f64; MAX_DIM],
}

impl Dual {
    fn constant(v: f64) -> Self {
        Self {
            v,
            g: [0.0; MAX_DIM],
        }
    }

    fn chain(&self, f: f64, df: f64) -> Self {
        Self {
            v: f,
            g: self.g.map(|x| df * x),
        }
    }

    fn chain_value(&self, f: impl Fn(f64) -> (f64, f64)) -> Self {
        let (v, d) = f(self.v);
        self.chain(v, d)
    }

    /// `op(self, o)` with partials `da`, `db` in the two arguments.
    fn combine(&self, o: &Self, da: f64, db: f64, op: impl Fn(f64, f64) -> f64) -> Self {
        let mut g = [0.0; MAX_DIM];
        for (k, gk) in g.iter_mut().enumerate() {
            *gk = da * self.g[k] + db * o.g[k];
        }
        Self {
            v: op(self.v, o.v),
            g,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_xoshiro::Xoshiro256PlusPlus;

    #[test]
    fn gradient_matches_jets() {
        let mut r = Xoshiro256PlusPlus::seed_from_u64(8);
        let x = [0.3, -0.4, 0.8, 0.2];
        for _ in 0..20 {
            let e = (random_trig_polynomial(&mut r, 4, 2, 0.2) + 1.5).powf(2.3)
                / (random_polynomial(&mut r, 4, 2).powi(2) + 1.0).sqrt()
                + Expr::var(1).step().exp();
            let j = e.eval_jet(&Jet3::variables(&x));
            let (v, g) = e.eval_grad(&x);
            assert!((v - j.value()).abs() <= 1e-14 * v.abs().max(1.0));
            for (k, gk) in g.iter().enumerate() {
                assert!((gk - j.d1(k)).abs() <= 1e-13 * j.d1(k).abs().max(1.0));
            }
        }
    }

    #[test]
    fn monomial_count() {
        assert_eq!(monomial_exponents(3, 3).len(), 20);
        assert_eq!(monomial_exponents(2, 4).len(), 15);
        assert_eq!(monomial_exponents(1, 0), vec![vec![0]]);
    }

    #[test]
    fn eval_and_jet_agree() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(7);
        let e = random_trig_polynomial(&mut rng, 3, 2, 1.0) * random_polynomial(&mut rng, 3, 2);
        let p = [0.2, -0.4, 0.9];
        let j = e.eval_jet(&Jet3::variables(&p));
        assert!((j.value() - e.eval(&p)).abs() < 1e-14);
    }

    #[test]
    fn substitution() {
        let e = Expr::var(0) * Expr::var(1) + 1.0;
        let s = e.substitute(&|i| Expr::var(i).powi(2));
        assert_eq!(s.eval(&[2.0, 3.0]), 37.0);
        assert_eq!(s.arity(), 2);
    }

    #[test]
    fn smooth_step_shape() {
        assert_eq!(smooth_step_derivs(-0.5), [0.0; 4]);
        assert_eq!(smooth_step_derivs(1.5), [1.0, 0.0, 0.0, 0.0]);
        let mid = smooth_step_derivs(0.5);
        assert!((mid[0] - 0.5).abs() < 1e-15);
        assert!((mid[1] - 2.0).abs() < 1e-14);
        for i in 1..1000 {
            let u = i as f64 / 1000.0;
            let s = smooth_step_derivs(u);
            assert!(s[1] >= -1e-14 && s[1] <= 2.0 + 1e-12, "u = {u}: {s:?}");
            assert!(s[2].abs() <= 10.0, "u = {u}: {s:?}");
            assert!((s[0] + smooth_step_derivs(1.0 - u)[0] - 1.0).abs() < 1e-14);
        }
    }
}
