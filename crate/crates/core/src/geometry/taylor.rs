//! Truncated bivariate Taylor series.
//!
//! A [`Taylor`] carries the value and all partial derivatives up to third
//! order of a scalar function of `(x, y)` at a fixed expansion point. Arithmetic
//! and the elementary functions used by the geometry code propagate the
//! derivatives exactly, which gives closed-form metric derivatives for the
//! built-in shapes and fiber fields without symbolic algebra.
//!
//! Each series tracks the highest order it knows exactly. Taking a partial
//! derivative lowers it by one; combining two series keeps the minimum.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Maximum supported derivative order.
pub const MAX_ORDER: u8 = 3;

/// Number of monomials up to total degree three.
const N: usize = 10;

/// Exponents `(p, q)` of the monomial `x^p y^q` stored at each slot.
const MONOMIALS: [(u8, u8); N] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
];

const fn slot(p: u8, q: u8) -> usize {
    let d = (p + q) as usize;
    d * (d + 1) / 2 + q as usize
}

const fn degree(i: usize) -> u8 {
    MONOMIALS[i].0 + MONOMIALS[i].1
}

const fn factorial(n: u8) -> f64 {
    match n {
        0 | 1 => 1.0,
        2 => 2.0,
        _ => 6.0,
    }
}

/// Number of leading slots holding monomials of degree `<= order`.
const fn slots_for(order: u8) -> usize {
    let o = order as usize + 1;
    o * (o + 1) / 2
}

/// Order marker for values known exactly at every order (constants).
const EXACT: u8 = u8::MAX;

/// Truncated Taylor expansion of a scalar field around a point.
///
/// Coefficients are stored as monomial coefficients, i.e. slot `(p, q)`
/// holds `∂ₓᵖ∂ᵧ^q f / (p! q!)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Taylor {
    c: [f64; N],
    order: u8,
}

impl Taylor {
    pub fn constant(value: f64) -> Self {
        let mut c = [0.0; N];
        c[0] = value;
        Self { c, order: EXACT }
    }

    /// The coordinate `x` expanded at `x0`.
    pub fn var_x(x0: f64, order: u8) -> Self {
        let mut c = [0.0; N];
        c[0] = x0;
        c[1] = 1.0;
        Self {
            c,
            order: order.min(MAX_ORDER),
        }
    }

    /// The coordinate `y` expanded at `y0`.
    pub fn var_y(y0: f64, order: u8) -> Self {
        let mut c = [0.0; N];
        c[0] = y0;
        c[2] = 1.0;
        Self {
            c,
            order: order.min(MAX_ORDER),
        }
    }

    /// Highest derivative order represented exactly.
    pub fn order(&self) -> u8 {
        self.order.min(MAX_ORDER)
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Mixed partial `∂ₓᵖ ∂ᵧ^q` at the expansion point.
    ///
    /// Panics when `p + q` exceeds the known order.
    pub fn partial(&self, p: u8, q: u8) -> f64 {
        assert!(
            p + q <= self.order(),
            "derivative of order {} requested from a series of order {}",
            p + q,
            self.order()
        );
        self.c[slot(p, q)] * factorial(p) * factorial(q)
    }

    pub fn gradient(&self) -> [f64; 2] {
        [self.partial(1, 0), self.partial(0, 1)]
    }

    /// Series of `∂f/∂x` (`axis == 0`) or `∂f/∂y` (`axis == 1`).
    pub fn derivative(&self, axis: usize) -> Self {
        let mut c = [0.0; N];
        for (i, &(p, q)) in MONOMIALS.iter().enumerate() {
            let (e, p2, q2) = if axis == 0 {
                (p, p.wrapping_sub(1), q)
            } else {
                (q, p, q.wrapping_sub(1))
            };
            if e == 0 {
                continue;
            }
            c[slot(p2, q2)] += f64::from(e) * self.c[i];
        }
        let order = if self.order == EXACT {
            EXACT
        } else {
            self.order.saturating_sub(1)
        };
        let mut out = Self { c, order };
        out.truncate();
        out
    }

    fn truncate(&mut self) {
        let keep = slots_for(self.order());
        for v in &mut self.c[keep..] {
            *v = 0.0;
        }
    }

    fn combined_order(a: u8, b: u8) -> u8 {
        a.min(b)
    }

    /// Evaluates `g(self)` from the derivatives `g, g', g'', g'''` of `g`
    /// at `self.value()`.
    fn compose(&self, d: [f64; 4]) -> Self {
        let mut h = *self;
        h.c[0] = 0.0;
        let h2 = h * h;
        let h3 = h2 * h;
        let mut out = Self::constant(d[0]);
        out.order = self.order;
        for i in 1..N {
            out.c[i] = d[1] * h.c[i] + d[2] / 2.0 * h2.c[i] + d[3] / 6.0 * h3.c[i];
        }
        out.truncate();
        out
    }

    pub fn recip(&self) -> Self {
        let a = self.c[0];
        let r = 1.0 / a;
        self.compose([r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r])
    }

    pub fn sqrt(&self) -> Self {
        let a = self.c[0];
        let s = a.sqrt();
        self.compose([s, 0.5 / s, -0.25 / (a * s), 0.375 / (a * a * s)])
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.c[0].sin_cos();
        self.compose([s, c, -s, -c])
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.c[0].sin_cos();
        self.compose([c, -s, -c, s])
    }
}

impl Add for Taylor {
    type Output = Taylor;
    fn add(self, rhs: Taylor) -> Taylor {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(rhs.c.iter()) {
            *a += b;
        }
        let mut out = Taylor {
            c,
            order: Taylor::combined_order(self.order, rhs.order),
        };
        out.truncate();
        out
    }
}

impl Sub for Taylor {
    type Output = Taylor;
    fn sub(self, rhs: Taylor) -> Taylor {
        self + (-rhs)
    }
}

impl Neg for Taylor {
    type Output = Taylor;
    fn neg(self) -> Taylor {
        let mut c = self.c;
        for v in &mut c {
            *v = -*v;
        }
        Taylor {
            c,
            order: self.order,
        }
    }
}

impl Mul for Taylor {
    type Output = Taylor;
    fn mul(self, rhs: Taylor) -> Taylor {
        let order = Taylor::combined_order(self.order, rhs.order);
        let top = order.min(MAX_ORDER);
        let n = slots_for(top);
        let mut c = [0.0; N];
        for i in 0..n {
            let a = self.c[i];
            if a == 0.0 {
                continue;
            }
            let (pi, qi) = MONOMIALS[i];
            for j in 0..n {
                if degree(i) + degree(j) > top {
                    continue;
                }
                let (pj, qj) = MONOMIALS[j];
                c[slot(pi + pj, qi + qj)] += a * rhs.c[j];
            }
        }
        Taylor { c, order }
    }
}

impl Div for Taylor {
    type Output = Taylor;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Taylor) -> Taylor {
        self * rhs.recip()
    }
}

/// Scalar operations shared by `f64` and [`Taylor`], so metric formulas can
/// be written once and evaluated either pointwise or with derivatives.
pub trait Real:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn cst(v: f64) -> Self;
    fn sqrt(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn val(&self) -> f64;
}

impl Real for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn val(&self) -> f64 {
        *self
    }
}

impl Real for Taylor {
    fn cst(v: f64) -> Self {
        Taylor::constant(v)
    }
    fn sqrt(self) -> Self {
        Taylor::sqrt(&self)
    }
    fn sin(self) -> Self {
        Taylor::sin(&self)
    }
    fn cos(self) -> Self {
        Taylor::cos(&self)
    }
    fn val(&self) -> f64 {
        self.value()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xy(x: f64, y: f64) -> (Taylor, Taylor) {
        (Taylor::var_x(x, 3), Taylor::var_y(y, 3))
    }

    #[test]
    fn polynomial_partials() {
        let (x, y) = xy(1.5, -0.5);
        // f = x^2 y + 3 x y^2
        let f = x * x * y + Taylor::constant(3.0) * x * y * y;
        assert!((f.value() - (2.25 * -0.5 + 3.0 * 1.5 * 0.25)).abs() < 1e-14);
        assert!((f.partial(1, 0) - (2.0 * 1.5 * -0.5 + 3.0 * 0.25)).abs() < 1e-14);
        assert!((f.partial(1, 1) - (2.0 * 1.5 + 6.0 * -0.5)).abs() < 1e-14);
        assert!((f.partial(2, 1) - 2.0).abs() < 1e-14);
        assert!((f.partial(1, 2) - 6.0).abs() < 1e-14);
        assert_eq!(f.partial(3, 0), 0.0);
    }

    #[test]
    fn elementary_functions_match_closed_forms() {
        let (x, y) = xy(0.3, 0.7);
        let s = (x * y).sin();
        // d/dx sin(xy) = y cos(xy); d2/dxdy = cos(xy) - xy sin(xy)
        let p = 0.21f64;
        assert!((s.partial(1, 0) - 0.7 * p.cos()).abs() < 1e-14);
        assert!((s.partial(1, 1) - (p.cos() - p * p.sin())).abs() < 1e-14);
        // d3/dx3 sin(xy) = -y^3 cos(xy)
        assert!((s.partial(3, 0) + 0.343 * p.cos()).abs() < 1e-14);

        let r = (Taylor::constant(1.0) + x * x).sqrt();
        let v = 1.09f64;
        assert!((r.partial(1, 0) - 0.3 / v.sqrt()).abs() < 1e-14);
        assert!((r.partial(2, 0) - 1.0 / v.powf(1.5)).abs() < 1e-13);
        // third derivative of sqrt(1+x^2): -3x/(1+x^2)^{5/2}
        assert!((r.partial(3, 0) + 0.9 / v.powf(2.5)).abs() < 1e-13);

        let q = Taylor::constant(1.0) / (x + y);
        assert!((q.partial(0, 2) - 2.0).abs() < 1e-13);
        assert!((q.partial(2, 1) + 6.0).abs() < 1e-13);
    }

    #[test]
    fn derivative_lowers_order() {
        let (x, y) = xy(2.0, 1.0);
        let f = x * x * x * y;
        let fx = f.derivative(0);
        assert_eq!(fx.order(), 2);
        assert!((fx.value() - 12.0).abs() < 1e-14);
        assert!((fx.partial(1, 1) - 12.0).abs() < 1e-14);
        let fxy = fx.derivative(1);
        assert_eq!(fxy.order(), 1);
        assert!((fxy.partial(1, 0) - 12.0).abs() < 1e-14);
    }

    #[test]
    #[should_panic]
    fn partial_beyond_order_panics() {
        let (x, _) = xy(1.0, 1.0);
        let _ = (x * x).derivative(0).derivative(0).partial(2, 0);
    }
}
