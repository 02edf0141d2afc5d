//! Truncated bivariate Taylor polynomials.
//!
//! The vector fields in this crate are written once, generically over
//! [`Scalar`], and evaluated either on plain `f64` or on [`Jet`]. Evaluating
//! on jets whose constant part is a base point and whose linear part is a
//! coordinate system yields the exact Taylor expansion of the field around
//! that point, up to total degree [`JET_DEGREE`]. Normal-form and
//! center-manifold reductions are built on top of that.

use std::ops::{Add, Mul, Neg, Sub};

/// Highest total degree retained by a [`Jet`].
pub const JET_DEGREE: usize = 8;
const N: usize = JET_DEGREE + 1;

/// Arithmetic needed to evaluate the model fields.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
{
    fn cst(v: f64) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
}

impl Scalar for f64 {
    #[inline]
    fn cst(v: f64) -> Self {
        v
    }
    #[inline]
    fn sin(self) -> Self {
        f64::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        f64::cos(self)
    }
}

/// Polynomial in two variables `(s, t)` truncated at total degree
/// [`JET_DEGREE`]. `c[i][j]` is the coefficient of `s^i t^j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    c: [[f64; N]; N],
}

impl Default for Jet {
    fn default() -> Self {
        Self::zero()
    }
}

impl Jet {
    pub fn zero() -> Self {
        Self { c: [[0.0; N]; N] }
    }

    pub fn constant(v: f64) -> Self {
        let mut j = Self::zero();
        j.c[0][0] = v;
        j
    }

    /// `base + ds * s + dt * t`.
    pub fn affine(base: f64, ds: f64, dt: f64) -> Self {
        let mut j = Self::constant(base);
        j.c[1][0] = ds;
        j.c[0][1] = dt;
        j
    }

    /// The first variable `s`.
    pub fn var_s() -> Self {
        Self::affine(0.0, 1.0, 0.0)
    }

    /// The second variable `t`.
    pub fn var_t() -> Self {
        Self::affine(0.0, 0.0, 1.0)
    }

    /// Coefficient of `s^i t^j` (zero beyond the truncation degree).
    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        if i + j > JET_DEGREE {
            0.0
        } else {
            self.c[i][j]
        }
    }

    pub fn set_coeff(&mut self, i: usize, j: usize, v: f64) {
        assert!(i + j <= JET_DEGREE, "jet degree exceeded");
        self.c[i][j] = v;
    }

    pub fn value(&self) -> f64 {
        self.c[0][0]
    }

    /// Homogeneous part of degree `k` as coefficients of `s^{k-j} t^j`, `j = 0..=k`.
    pub fn homogeneous(&self, k: usize) -> Vec<f64> {
        (0..=k).map(|j| self.coeff(k - j, j)).collect()
    }

    /// Drops every term of total degree above `k`.
    pub fn truncate(&self, k: usize) -> Self {
        let mut out = *self;
        for i in 0..N {
            for j in 0..N {
                if i + j > k {
                    out.c[i][j] = 0.0;
                }
            }
        }
        out
    }

    /// Evaluates the polynomial at `(s, t)`.
    pub fn eval(&self, s: f64, t: f64) -> f64 {
        let mut acc = 0.0;
        let mut si = 1.0;
        for i in 0..N {
            let mut tj = 1.0;
            for j in 0..N - i {
                acc += self.c[i][j] * si * tj;
                tj *= t;
            }
            si *= s;
        }
        acc
    }

    /// Substitutes `t = g(s)` where `g` is given by its coefficients
    /// `g[k]` of `s^k`, returning coefficients of `s^k` for `k <= JET_DEGREE`.
    pub fn substitute_t(&self, g: &[f64]) -> Vec<f64> {
        let gs = Univariate::from_slice(g);
        let mut out = Univariate::zero();
        let mut t_pow = Univariate::constant(1.0);
        for j in 0..N {
            let mut row = Univariate::zero();
            for i in 0..N - j {
                row.c[i] = self.c[i][j];
            }
            out = out.add(&row.mul(&t_pow));
            t_pow = t_pow.mul(&gs);
        }
        out.c.to_vec()
    }

    fn nilpotent_split(self) -> (f64, Jet) {
        let mut h = self;
        h.c[0][0] = 0.0;
        (self.c[0][0], h)
    }
}

/// Univariate truncated series used for substitutions.
#[derive(Clone, Copy)]
struct Univariate {
    c: [f64; N],
}

impl Univariate {
    fn zero() -> Self {
        Self { c: [0.0; N] }
    }
    fn constant(v: f64) -> Self {
        let mut u = Self::zero();
        u.c[0] = v;
        u
    }
    fn from_slice(g: &[f64]) -> Self {
        let mut u = Self::zero();
        for (k, v) in g.iter().take(N).enumerate() {
            u.c[k] = *v;
        }
        u
    }
    fn add(&self, o: &Self) -> Self {
        let mut u = *self;
        for k in 0..N {
            u.c[k] += o.c[k];
        }
        u
    }
    fn mul(&self, o: &Self) -> Self {
        let mut u = Self::zero();
        for i in 0..N {
            if self.c[i] == 0.0 {
                continue;
            }
            for j in 0..N - i {
                u.c[i + j] += self.c[i] * o.c[j];
            }
        }
        u
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, o: Jet) -> Jet {
        for i in 0..N {
            for j in 0..N - i {
                self.c[i][j] += o.c[i][j];
            }
        }
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(mut self, o: Jet) -> Jet {
        for i in 0..N {
            for j in 0..N - i {
                self.c[i][j] -= o.c[i][j];
            }
        }
        self
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self * -1.0
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut out = Jet::zero();
        for i1 in 0..N {
            for j1 in 0..N - i1 {
                let x = self.c[i1][j1];
                if x == 0.0 {
                    continue;
                }
                let rem = JET_DEGREE - i1 - j1;
                for i2 in 0..=rem {
                    for j2 in 0..=rem - i2 {
                        out.c[i1 + i2][j1 + j2] += x * o.c[i2][j2];
                    }
                }
            }
        }
        out
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, v: f64) -> Jet {
        self.c[0][0] += v;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, v: f64) -> Jet {
        self.c[0][0] -= v;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(mut self, v: f64) -> Jet {
        for i in 0..N {
            for j in 0..N - i {
                self.c[i][j] *= v;
            }
        }
        self
    }
}

impl Scalar for Jet {
    fn cst(v: f64) -> Self {
        Jet::constant(v)
    }

    // sin(c + h) = sin c cos h + cos c sin h, with h nilpotent.
    fn sin(self) -> Self {
        let (c, h) = self.nilpotent_split();
        let (sh, ch) = sin_cos_nilpotent(h);
        sh * c.cos() + ch * c.sin()
    }

    fn cos(self) -> Self {
        let (c, h) = self.nilpotent_split();
        let (sh, ch) = sin_cos_nilpotent(h);
        ch * c.cos() - sh * c.sin()
    }
}

fn sin_cos_nilpotent(h: Jet) -> (Jet, Jet) {
    let mut sin = Jet::zero();
    let mut cos = Jet::constant(1.0);
    let mut term = Jet::constant(1.0);
    let mut fact = 1.0;
    for k in 1..=JET_DEGREE {
        term = term * h;
        fact *= k as f64;
        let t = term * (1.0 / fact);
        match k % 4 {
            1 => sin = sin + t,
            2 => cos = cos - t,
            3 => sin = sin - t,
            _ => cos = cos + t,
        }
    }
    (sin, cos)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_matches_pointwise_evaluation() {
        let p = Jet::affine(1.0, 2.0, -1.0);
        let q = Jet::affine(-0.5, 0.3, 4.0);
        let r = p * q * p;
        let (s, t) = (0.2, -0.1);
        let direct = p.eval(s, t) * q.eval(s, t) * p.eval(s, t);
        assert!((r.eval(s, t) - direct).abs() < 1e-14);
    }

    #[test]
    fn sine_series_matches_libm_near_base() {
        let x = Jet::affine(0.7, 1.0, 0.5);
        let s = x.sin();
        let c = x.cos();
        let (ds, dt) = (1e-2, -2e-2);
        let arg = 0.7 + ds + 0.5 * dt;
        assert!((s.eval(ds, dt) - arg.sin()).abs() < 1e-15);
        assert!((c.eval(ds, dt) - arg.cos()).abs() < 1e-15);
    }

    #[test]
    fn substitution_of_curve() {
        // s*t + t^2 with t = s + s^2 -> s^2 + s^3 + (s + s^2)^2 = 2 s^2 + 3 s^3 + s^4
        let s = Jet::var_s();
        let t = Jet::var_t();
        let p = s * t + t * t;
        let g = p.substitute_t(&[0.0, 1.0, 1.0]);
        assert_eq!(&g[..5], &[0.0, 0.0, 2.0, 3.0, 1.0]);
    }

    #[test]
    fn truncation_drops_high_degree() {
        let s = Jet::var_s();
        let mut p = s;
        for _ in 0..JET_DEGREE + 3 {
            p = p * s;
        }
        assert_eq!(p, Jet::zero());
    }
}
