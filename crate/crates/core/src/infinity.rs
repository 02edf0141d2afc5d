//! Behaviour at infinity: Poincare compactification charts, the infinite
//! equilibria, and the quasi-homogeneous blow-up of the degenerate one at the
//! origin of the `U2` chart.
//!
//! Chart coordinates are `u = y/x, v = 1/x` on `U1` (`x > 0`) and `V1`
//! (`x < 0`), and `u = x/y, v = 1/y` on `U2` (`y > 0`) and `V2` (`y < 0`).
//! The field is cubic, so each chart field is `v^2` times the pushforward of
//! the planar field and the `V` charts carry the same expressions as the
//! `U` charts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{Jet, Scalar, JET_DEGREE};
use crate::model::{self, Matrix2, Params, State};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chart {
    U1,
    V1,
    U2,
    V2,
}

impl Chart {
    /// Chart coordinates of a finite point, if the point lies in the chart.
    pub fn to_chart(self, s: &State) -> Option<(f64, f64)> {
        match self {
            Self::U1 if s.x > 0.0 => Some((s.y / s.x, 1.0 / s.x)),
            Self::V1 if s.x < 0.0 => Some((s.y / s.x, 1.0 / s.x)),
            Self::U2 if s.y > 0.0 => Some((s.x / s.y, 1.0 / s.y)),
            Self::V2 if s.y < 0.0 => Some((s.x / s.y, 1.0 / s.y)),
            _ => None,
        }
    }

    /// Inverse of [`Chart::to_chart`] for `v != 0`.
    pub fn from_chart(self, u: f64, v: f64) -> State {
        match self {
            Self::U1 | Self::V1 => State {
                x: 1.0 / v,
                y: u / v,
            },
            Self::U2 | Self::V2 => State {
                x: u / v,
                y: 1.0 / v,
            },
        }
    }

    pub fn field(self, p: &Params, u: f64, v: f64) -> [f64; 2] {
        match self {
            Self::U1 | Self::V1 => chart_u1_field(p, u, v),
            Self::U2 | Self::V2 => chart_u2_field(p, u, v),
        }
    }

    /// `v^2` times the time derivative of the chart coordinates along the
    /// planar flow, evaluated at a finite point of the chart.
    pub fn pushforward(self, p: &Params, s: &State) -> Option<[f64; 2]> {
        let (_, v) = self.to_chart(s)?;
        let [fx, fy] = model::vector_field(p, s);
        let v2 = v * v;
        Some(match self {
            Self::U1 | Self::V1 => [
                v2 * (fy * s.x - s.y * fx) / (s.x * s.x),
                v2 * (-fx / (s.x * s.x)),
            ],
            Self::U2 | Self::V2 => [
                v2 * (fx * s.y - s.x * fy) / (s.y * s.y),
                v2 * (-fy / (s.y * s.y)),
            ],
        })
    }
}

/// Field in the `U1` chart.
pub fn chart_u1_field(p: &Params, u: f64, v: f64) -> [f64; 2] {
    let (a, b) = (p.a(), p.b());
    [
        b + u - (a + b - 4.0 * u) * u * v + (b + u) * v * v - a * u * v * v * v,
        v * (1.0 + 4.0 * u * v + v * v - a * (v + v * v * v)),
    ]
}

pub fn chart_u1_jacobian(p: &Params, u: f64, v: f64) -> Matrix2 {
    let (a, b) = (p.a(), p.b());
    [
        [
            1.0 - (a + b) * v + 8.0 * u * v + v * v - a * v * v * v,
            -(a + b - 4.0 * u) * u + 2.0 * (b + u) * v - 3.0 * a * u * v * v,
        ],
        [
            4.0 * v * v,
            1.0 + 8.0 * u * v + 3.0 * v * v - 2.0 * a * v - 4.0 * a * v * v * v,
        ],
    ]
}

/// Field in the `U2` chart.
pub fn chart_u2_field(p: &Params, u: f64, v: f64) -> [f64; 2] {
    let (a, b) = (p.a(), p.b());
    let (u2, v2) = (u * u, v * v);
    [
        -b * u2 * u2 - b * u2 * v2 + a * u2 * v + a * v2 * v + b * u2 * v
            - u2 * u
            - u * v2
            - 4.0 * u * v,
        -b * u2 * u * v - b * u * v2 * v + b * u * v2,
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InfiniteLabel {
    I1,
    I2,
    I3,
    I4,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InfiniteKind {
    UnstableNode,
    DegenerateBlowupRequired,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectorStructure {
    pub hyperbolic_sectors: u32,
    pub parabolic_sectors: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfiniteEquilibrium {
    pub label: InfiniteLabel,
    pub chart: Chart,
    pub coords: (f64, f64),
    pub kind: InfiniteKind,
    /// Jacobian of the chart field, for the hyperbolic points.
    pub jacobian: Option<Matrix2>,
    pub sector_structure: Option<SectorStructure>,
    /// Direction at infinity on the boundary of the Poincare disk.
    pub direction: (f64, f64),
}

fn unit(x: f64, y: f64) -> (f64, f64) {
    let n = x.hypot(y);
    (x / n, y / n)
}

/// The four equilibria on the line at infinity.
pub fn infinite_equilibria(p: &Params) -> Vec<InfiniteEquilibrium> {
    let b = p.b();
    let j1 = chart_u1_jacobian(p, -b, 0.0);
    let degenerate = SectorStructure {
        hyperbolic_sectors: 4,
        parabolic_sectors: 1,
    };
    vec![
        InfiniteEquilibrium {
            label: InfiniteLabel::I1,
            chart: Chart::U1,
            coords: (-b, 0.0),
            kind: InfiniteKind::UnstableNode,
            jacobian: Some(j1),
            sector_structure: None,
            direction: unit(1.0, -b),
        },
        InfiniteEquilibrium {
            label: InfiniteLabel::I2,
            chart: Chart::V1,
            coords: (-b, 0.0),
            kind: InfiniteKind::UnstableNode,
            jacobian: Some(j1),
            sector_structure: None,
            direction: unit(-1.0, b),
        },
        InfiniteEquilibrium {
            label: InfiniteLabel::I3,
            chart: Chart::U2,
            coords: (0.0, 0.0),
            kind: InfiniteKind::DegenerateBlowupRequired,
            jacobian: None,
            sector_structure: Some(degenerate),
            direction: (0.0, 1.0),
        },
        InfiniteEquilibrium {
            label: InfiniteLabel::I4,
            chart: Chart::V2,
            coords: (0.0, 0.0),
            kind: InfiniteKind::DegenerateBlowupRequired,
            jacobian: None,
            sector_structure: Some(degenerate),
            direction: (0.0, -1.0),
        },
    ]
}

/// A planar field that can be expanded on jets.
pub trait JetField {
    fn eval<S: Scalar>(&self, x: S, y: S) -> [S; 2];
}

/// Quasi-homogeneous blow-up `(u, v) = (r cos t, r^2 sin t)` of the `U2`
/// chart at its origin, after division by `(1 + sin^2 t) / r^2`.
#[derive(Clone, Copy, Debug)]
pub struct Blowup {
    pub a: f64,
    pub b: f64,
}

impl Blowup {
    pub fn new(p: &Params) -> Self {
        Self { a: p.a(), b: p.b() }
    }
}

impl JetField for Blowup {
    fn eval<S: Scalar>(&self, r: S, th: S) -> [S; 2] {
        blowup_field_generic(self.a, self.b, r, th)
    }
}

fn blowup_field_generic<S: Scalar>(a: f64, b: f64, r: S, th: S) -> [S; 2] {
    let c = th.cos();
    let s = th.sin();
    let c3 = (th * 3.0).cos();
    let s3 = (th * 3.0).sin();
    let c2 = (th * 2.0).cos();
    let s2 = (th * 2.0).sin();
    let r2 = r * r;
    let r3 = r2 * r;
    let r4 = r3 * r;
    let cc = c * c;
    let ss = s * s;

    let dr = r * (cc * -0.75 + c * (c3 * -0.25 - s2 * 2.0))
        + r2 * c * (c2 * (-b / 2.0) + s * (a / 4.0 + b) + s3 * (a / 4.0) - b / 2.0)
        + r3 * (cc * -0.25 + c * c3 * 0.25)
        + r4 * c * (c2 * (b / 2.0) + s * (3.0 * a / 4.0) - s3 * (a / 4.0) - b / 2.0);
    let dth = c * s * (cc + s * 4.0) * 2.0
        + r * (cc * cc * s * b + cc * ss * (-2.0 * a - b))
        + r2 * ss * s2
        + r3 * (cc * ss * s * b - ss * ss * (2.0 * a));
    [dr, dth]
}

pub fn blowup_field(p: &Params, r: f64, theta: f64) -> [f64; 2] {
    blowup_field_generic(p.a(), p.b(), r, theta)
}

/// Pushforward of the blow-up field through `(u, v) = (r cos t, r^2 sin t)`.
pub fn blowup_pushforward(p: &Params, r: f64, theta: f64) -> [f64; 2] {
    let [dr, dth] = blowup_field(p, r, theta);
    let (s, c) = theta.sin_cos();
    [dr * c - r * s * dth, 2.0 * r * s * dr + r * r * c * dth]
}

/// `2 cos t sin t (cos^2 t + 4 sin t)`, the angular field on the circle `r = 0`.
pub fn circle_polynomial(theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    2.0 * c * s * (c * c + 4.0 * s)
}

/// `arcsin(sqrt(5) - 2)`.
pub fn theta0() -> f64 {
    (5.0f64.sqrt() - 2.0).asin()
}

/// The six zeros of [`circle_polynomial`] in `[0, 2 pi)`, in increasing order.
pub fn circle_angles() -> [f64; 6] {
    use std::f64::consts::{FRAC_PI_2, PI};
    [
        0.0,
        FRAC_PI_2,
        PI,
        PI + theta0(),
        3.0 * FRAC_PI_2,
        2.0 * PI - theta0(),
    ]
}

/// Zeros of [`circle_polynomial`] found by a sign-change sweep of step `h`
/// and polished by bisection.
pub fn sweep_circle_roots(h: f64) -> Vec<f64> {
    let two_pi = 2.0 * std::f64::consts::PI;
    let n = (two_pi / h).ceil() as usize;
    let start = -0.5 * h;
    let mut roots = Vec::new();
    for k in 0..n {
        let (mut lo, mut hi) = (start + k as f64 * h, start + (k + 1) as f64 * h);
        let (mut flo, fhi) = (circle_polynomial(lo), circle_polynomial(hi));
        if flo.signum() == fhi.signum() {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let fm = circle_polynomial(mid);
            if fm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if mid <= lo || mid >= hi {
                break;
            }
            if fm.signum() == flo.signum() {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        let r = (0.5 * (lo + hi)).rem_euclid(two_pi);
        roots.push(if two_pi - r < 1e-12 { 0.0 } else { r });
    }
    roots.sort_by(|a, b| a.total_cmp(b));
    roots
}

/// Linear part of a jet field at a point.
pub fn jet_jacobian<F: JetField>(field: &F, at: [f64; 2]) -> Matrix2 {
    let [gx, gy] = field.eval(Jet::affine(at[0], 1.0, 0.0), Jet::affine(at[1], 0.0, 1.0));
    [
        [gx.coeff(1, 0), gx.coeff(0, 1)],
        [gy.coeff(1, 0), gy.coeff(0, 1)],
    ]
}

/// The circle Jacobians in closed form, for the six angles of
/// [`circle_angles`] in the same order.
pub fn circle_jacobians_closed_form(p: &Params) -> [Matrix2; 6] {
    let s5 = 5.0f64.sqrt();
    let low = (152.0 - 68.0 * s5) * (2.0 * p.a() + 5.0 * p.b());
    let diag = 320.0 - 144.0 * s5;
    let saddle = [[-1.0, 0.0], [0.0, 2.0]];
    [
        saddle,
        [[0.0, 0.0], [0.0, -8.0]],
        saddle,
        [[0.0, 0.0], [low, diag]],
        [[0.0, 0.0], [0.0, 8.0]],
        [[0.0, 0.0], [low, diag]],
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemiHyperbolicData {
    /// The nonzero eigenvalue of the linearization.
    pub lambda: f64,
    /// Order of the first nonzero term of the field on the center manifold.
    pub m: usize,
    pub a_m: f64,
}

/// Default truncation order of the center-manifold series.
pub const DEFAULT_SERIES_ORDER: usize = 6;

/// Reduces a semi-hyperbolic equilibrium to the leading term `a_m r^m` of
/// the field along its center manifold.
///
/// The linearization is diagonalised with the center eigenvector scaled to
/// unit first component, so the center coordinate coincides with the first
/// coordinate of `field` wherever that is possible. The center manifold
/// `eta = h(xi)` is solved as a truncated power series from `eta' = 0`.
pub fn semi_hyperbolic_reduce<F: JetField>(
    field: &F,
    at: [f64; 2],
    order: usize,
) -> Result<SemiHyperbolicData> {
    let order = order.min(JET_DEGREE);
    let l = jet_jacobian(field, at);
    let scale = l.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
    let tr = l[0][0] + l[1][1];
    let det = l[0][0] * l[1][1] - l[0][1] * l[1][0];
    if tr.abs() < 1e-12 * scale {
        return Err(if det.abs() < 1e-12 * scale * scale {
            Error::FullyDegenerate
        } else {
            Error::NotSemiHyperbolic
        });
    }
    if det.abs() > 1e-10 * scale * scale {
        return Err(Error::NotSemiHyperbolic);
    }
    let lambda = tr;

    // Kernel vector: orthogonal to the larger row of L.
    let row = if l[0][0].abs() + l[0][1].abs() >= l[1][0].abs() + l[1][1].abs() {
        l[0]
    } else {
        l[1]
    };
    let mut v0 = [-row[1], row[0]];
    let norm = if v0[0].abs() > 1e-12 * (v0[0].abs() + v0[1].abs()) {
        v0[0]
    } else {
        v0[1]
    };
    v0 = [v0[0] / norm, v0[1] / norm];
    // Eigenvector for lambda.
    let m = [[l[0][0] - lambda, l[0][1]], [l[1][0], l[1][1] - lambda]];
    let row = if m[0][0].abs() + m[0][1].abs() >= m[1][0].abs() + m[1][1].abs() {
        m[0]
    } else {
        m[1]
    };
    let mut v1 = [-row[1], row[0]];
    let big = if v1[0].abs() >= v1[1].abs() {
        v1[0]
    } else {
        v1[1]
    };
    v1 = [v1[0] / big, v1[1] / big];

    let pdet = v0[0] * v1[1] - v1[0] * v0[1];
    let pinv = [[v1[1] / pdet, -v1[0] / pdet], [-v0[1] / pdet, v0[0] / pdet]];
    let x = Jet::affine(at[0], v0[0], v1[0]);
    let y = Jet::affine(at[1], v0[1], v1[1]);
    let [gx, gy] = field.eval(x, y);
    let center = gx * pinv[0][0] + gy * pinv[0][1];
    let stable = gx * pinv[1][0] + gy * pinv[1][1];

    // eta' = lambda eta + N(xi, eta) = 0  =>  eta = -N(xi, eta)/lambda.
    let mut nonlinear = stable;
    nonlinear.set_coeff(0, 0, 0.0);
    nonlinear.set_coeff(1, 0, 0.0);
    nonlinear.set_coeff(0, 1, 0.0);
    let mut h = vec![0.0; JET_DEGREE + 1];
    for _ in 0..=order {
        let next = nonlinear.substitute_t(&h);
        for k in 0..=JET_DEGREE {
            h[k] = if k <= order { -next[k] / lambda } else { 0.0 };
        }
        h[0] = 0.0;
        h[1] = 0.0;
    }
    let g = center.substitute_t(&h);
    let coeff_scale = (0..=order)
        .flat_map(|i| (0..=order - i).map(move |j| (i, j)))
        .map(|(i, j)| center.coeff(i, j).abs().max(stable.coeff(i, j).abs()))
        .fold(1.0f64, f64::max);
    for (k, gk) in g.iter().enumerate().take(order + 1).skip(1) {
        if gk.abs() > 1e-11 * coeff_scale {
            return Ok(SemiHyperbolicData {
                lambda,
                m: k,
                a_m: *gk,
            });
        }
    }
    Err(Error::SeriesOrderExceeded { order })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CircleClass {
    HyperbolicSaddle,
    TopologicalSaddle,
    SaddleNode,
    Node,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleEquilibrium {
    pub theta: f64,
    pub jacobian_at_r0: Matrix2,
    pub classification: CircleClass,
    pub semi_hyp_data: Option<SemiHyperbolicData>,
}

/// Classifies each equilibrium on the blown-up circle.
pub fn circle_equilibria(p: &Params) -> Result<Vec<CircleEquilibrium>> {
    let field = Blowup::new(p);
    circle_angles()
        .iter()
        .map(|&theta| {
            let j = jet_jacobian(&field, [0.0, theta]);
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            if det.abs() > 1e-9 {
                let classification = if det < 0.0 {
                    CircleClass::HyperbolicSaddle
                } else {
                    CircleClass::Node
                };
                return Ok(CircleEquilibrium {
                    theta,
                    jacobian_at_r0: j,
                    classification,
                    semi_hyp_data: None,
                });
            }
            let data = semi_hyperbolic_reduce(&field, [0.0, theta], DEFAULT_SERIES_ORDER)?;
            let classification = if data.m % 2 == 0 {
                CircleClass::SaddleNode
            } else if data.a_m * data.lambda < 0.0 {
                CircleClass::TopologicalSaddle
            } else {
                CircleClass::Node
            };
            Ok(CircleEquilibrium {
                theta,
                jacobian_at_r0: j,
                classification,
                semi_hyp_data: Some(data),
            })
        })
        .collect()
}

/// `p / (1 + |p|)`: a homeomorphism of the plane onto the open unit disk.
pub fn disk_projection(s: &State) -> (f64, f64) {
    let d = 1.0 + s.norm();
    (s.x / d, s.y / d)
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn p(a: f64, b: f64) -> Params {
        Params::new(a, b).unwrap()
    }

    #[test]
    fn chart_u1_examples() {
        assert_eq!(chart_u1_field(&p(1.0, 1.0), -1.0, 0.0), [0.0, 0.0]);
        let [du, dv] = chart_u1_field(&p(1.0, 1.0), 1.5, 0.5);
        assert!((du - 5.9375).abs() < 1e-14);
        let push = Chart::U1
            .pushforward(&p(1.0, 1.0), &State { x: 2.0, y: 3.0 })
            .unwrap();
        assert!((push[0] - du).abs() < 1e-14 && (push[1] - dv).abs() < 1e-14);
        assert_eq!(chart_u1_field(&p(2.0, 3.0), 0.7, 0.0), [3.7, 0.0]);
    }

    #[test]
    fn chart_u2_examples() {
        assert_eq!(chart_u2_field(&p(4.0, 2.0), 0.0, 0.0), [0.0, 0.0]);
        assert_eq!(chart_u2_field(&p(1.0, 1.0), 1.0, 1.0), [-5.0, -1.0]);
        let field = chart_u2_field(&p(1.0, 1.0), 0.5, 0.5);
        let push = Chart::U2
            .pushforward(&p(1.0, 1.0), &State { x: 1.0, y: 2.0 })
            .unwrap();
        assert!((field[0] - push[0]).abs() < 1e-14 && (field[1] - push[1]).abs() < 1e-14);
    }

    #[test]
    fn chart_round_trip() {
        let s = State { x: -2.5, y: 0.75 };
        let (u, v) = Chart::V1.to_chart(&s).unwrap();
        let back = Chart::V1.from_chart(u, v);
        assert!((back.x - s.x).abs() < 1e-15 && (back.y - s.y).abs() < 1e-15);
        assert!(Chart::U1.to_chart(&s).is_none());
        assert!(Chart::U2.to_chart(&s).is_some());
    }

    #[test]
    fn infinite_equilibria_examples() {
        let eqs = infinite_equilibria(&p(1.0, 1.0));
        assert_eq!(eqs.len(), 4);
        assert_eq!(eqs[0].coords, (-1.0, 0.0));
        let j = eqs[0].jacobian.unwrap();
        let ev = model::eigenvalues(&j);
        assert!((ev[0].re - 1.0).abs() < 1e-12 && (ev[1].re - 1.0).abs() < 1e-12);
        assert_eq!(infinite_equilibria(&p(3.0, 7.0))[0].coords, (-7.0, 0.0));
        for e in &eqs {
            assert_eq!(e.coords.1, 0.0);
            assert_eq!(
                e.chart.field(&p(1.0, 1.0), e.coords.0, e.coords.1),
                [0.0, 0.0]
            );
        }
    }

    #[test]
    fn u1_jacobian_matches_finite_differences() {
        let pp = p(2.3, 0.7);
        let (u, v) = (0.4, -0.3);
        let j = chart_u1_jacobian(&pp, u, v);
        let h = 1e-6;
        for col in 0..2 {
            let (du, dv) = if col == 0 { (h, 0.0) } else { (0.0, h) };
            let fp = chart_u1_field(&pp, u + du, v + dv);
            let fm = chart_u1_field(&pp, u - du, v - dv);
            for row in 0..2 {
                assert!(((fp[row] - fm[row]) / (2.0 * h) - j[row][col]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn blowup_zeros_on_circle() {
        let pp = p(1.0, 1.0);
        assert_eq!(blowup_field(&pp, 0.0, 0.0), [0.0, 0.0]);
        let [dr, dth] = blowup_field(&pp, 0.0, PI + theta0());
        assert!(dr.abs() < 1e-15 && dth.abs() < 1e-14);
    }

    #[test]
    fn blowup_consistent_with_chart() {
        let pp = p(2.0, 3.0);
        for &(r, th) in &[(1e-3, 0.4), (5e-3, 2.0), (1e-2, 1.1)] {
            let push = blowup_pushforward(&pp, r, th);
            let (s, c) = f64::sin_cos(th);
            let chart = chart_u2_field(&pp, r * c, r * r * s);
            let k = (1.0 + s * s) / (r * r);
            for i in 0..2 {
                assert!((push[i] - k * chart[i]).abs() <= 1e-8 * (k * chart[i]).abs().max(1e-300));
            }
        }
    }

    #[test]
    fn theta0_value() {
        assert!((theta0() - 0.238_317_461_809_866).abs() < 1e-14);
        // cos^2 + 4 sin vanishes at pi + theta0
        let t = PI + theta0();
        assert!((t.cos().powi(2) + 4.0 * t.sin()).abs() < 1e-14);
    }

    #[test]
    fn circle_sweep_finds_six_roots() {
        let roots = sweep_circle_roots(1e-4);
        let expect = circle_angles();
        assert_eq!(roots.len(), 6);
        for (r, e) in roots.iter().zip(expect.iter()) {
            assert!((r - e).abs() < 1e-12, "{r} vs {e}");
        }
    }

    #[test]
    fn jacobians_match_closed_form() {
        let pp = p(1.0, 1.0);
        let field = Blowup::new(&pp);
        let closed = circle_jacobians_closed_form(&pp);
        for (theta, jc) in circle_angles().iter().zip(closed.iter()) {
            let j = jet_jacobian(&field, [0.0, *theta]);
            for r in 0..2 {
                for c in 0..2 {
                    assert!(
                        (j[r][c] - jc[r][c]).abs() < 1e-12,
                        "theta={theta} [{r}][{c}]"
                    );
                }
            }
        }
        assert!((closed[3][1][0] + 0.368_357_29).abs() < 1e-8);
        assert!((closed[3][1][1] + 1.993789).abs() < 1e-6);
    }

    #[test]
    fn semi_hyperbolic_data() {
        let half = FRAC_PI_2;
        let d = semi_hyperbolic_reduce(&Blowup::new(&p(2.0, 2.0)), [0.0, half], 6).unwrap();
        assert_eq!(d.m, 5);
        assert!((d.lambda + 8.0).abs() < 1e-12);
        assert!((d.a_m - 1.0).abs() < 1e-10);
        let d = semi_hyperbolic_reduce(&Blowup::new(&p(4.0, 1.0)), [0.0, 3.0 * half], 6).unwrap();
        assert_eq!(d.m, 5);
        assert!((d.lambda - 8.0).abs() < 1e-12);
        assert!((d.a_m + 1.0).abs() < 1e-10);
        let d = semi_hyperbolic_reduce(&Blowup::new(&p(2.0, 3.0)), [0.0, half], 6).unwrap();
        assert!((d.a_m - 1.5).abs() < 1e-10);
    }

    #[test]
    fn reduce_rejects_hyperbolic_point() {
        let r = semi_hyperbolic_reduce(&Blowup::new(&p(1.0, 1.0)), [0.0, 0.0], 6);
        assert!(matches!(r, Err(Error::NotSemiHyperbolic)));
    }

    #[test]
    fn series_order_too_low() {
        let r = semi_hyperbolic_reduce(&Blowup::new(&p(1.0, 1.0)), [0.0, FRAC_PI_2], 4);
        assert!(matches!(r, Err(Error::SeriesOrderExceeded { order: 4 })));
    }

    #[test]
    fn disk_projection_examples() {
        assert_eq!(disk_projection(&State { x: 0.0, y: 0.0 }), (0.0, 0.0));
        let (x, y) = disk_projection(&State { x: 3.0, y: 4.0 });
        assert!((x - 0.5).abs() < 1e-15 && (y - 2.0 / 3.0).abs() < 1e-15);
    }

    struct Cusp;
    impl JetField for Cusp {
        fn eval<S: Scalar>(&self, x: S, y: S) -> [S; 2] {
            [y * y, x * x]
        }
    }

    #[test]
    fn fully_degenerate_is_reported() {
        let r = semi_hyperbolic_reduce(&Cusp, [0.0, 0.0], 6);
        assert!(matches!(r, Err(Error::FullyDegenerate)));
    }
}
