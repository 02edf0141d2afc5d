//! Hopf points along `b = b_H(a)`: frequency, Lyapunov coefficients and the
//! Bautin point where the first coefficient changes sign.
//!
//! Both coefficients are computed in the canonical coordinates in which the
//! linear part at the equilibrium reads `(-omega y, omega x)`. Their absolute
//! size depends on that scaling; their signs do not.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cycles::{self, ReturnMapConfig, Section};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::model::{self, hopf_threshold, Params};

/// `2a^4 - 675a^2 - 3125`, which carries the sign of the first Lyapunov
/// coefficient on the Hopf curve.
pub fn l1_sign_poly(a: f64) -> f64 {
    let a2 = a * a;
    2.0 * a2 * a2 - 675.0 * a2 - 3125.0
}

/// `(5/2) sqrt(27 + sqrt(769))`, the positive root of [`l1_sign_poly`].
pub fn bautin_a() -> f64 {
    2.5 * (27.0 + 769.0f64.sqrt()).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Arc {
    Hminus,
    Hplus,
    Bautin,
}

impl Arc {
    /// The equilibrium is asymptotically stable on `H-` including its end at
    /// the Bautin point.
    pub fn equilibrium_stable(self) -> bool {
        matches!(self, Self::Hminus | Self::Bautin)
    }

    fn as_str(self) -> &'static str {
        match self {
            Self::Hminus => "Hminus",
            Self::Hplus => "Hplus",
            Self::Bautin => "Bautin",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HopfData {
    pub a: f64,
    pub b: f64,
    pub omega: f64,
    pub l1: f64,
    pub l2: Option<f64>,
    pub arc: Arc,
}

/// Relative distance to `a_B` below which a point is labelled [`Arc::Bautin`].
pub const BAUTIN_TOL: f64 = 1e-9;

/// Half-width of the window around `a_B` in which L2 is reported.
const L2_WINDOW: f64 = 0.5;

/// Nonlinear part of the field at the Hopf equilibrium, expressed in the
/// canonical basis scaled by `kappa`. Returns the two component jets with the
/// linear part removed, and `omega`.
fn canonical_jets(a: f64, kappa: f64) -> Result<(Jet, Jet, f64)> {
    if !(a > hopf_threshold()) {
        return Err(Error::NotOnHopfCurve { a });
    }
    let p = Params::new(a, model::hopf_b(a))?;
    let eq = model::equilibrium(&p);
    let j = model::jacobian(&p, &eq);
    let omega = model::equilibrium_determinant(&p).sqrt();
    // Columns Re q and -Im q of the eigenvector q = (j12, i omega - j11).
    let t = [[kappa * j[0][1], 0.0], [-kappa * j[0][0], -kappa * omega]];
    let det = t[0][0] * t[1][1] - t[0][1] * t[1][0];
    let inv = [
        [t[1][1] / det, -t[0][1] / det],
        [-t[1][0] / det, t[0][0] / det],
    ];
    let x = Jet::affine(eq.x, t[0][0], t[0][1]);
    let y = Jet::affine(eq.y, t[1][0], t[1][1]);
    let [fx, fy] = model::field(p.a(), p.b(), x, y);
    let mut f = fx * inv[0][0] + fy * inv[0][1];
    let mut g = fx * inv[1][0] + fy * inv[1][1];
    for jet in [&mut f, &mut g] {
        jet.set_coeff(0, 0, 0.0);
        jet.set_coeff(1, 0, 0.0);
        jet.set_coeff(0, 1, 0.0);
    }
    Ok((f, g, omega))
}

/// First Lyapunov coefficient by the planar normal-form formula
///
/// ```text
/// 16 l1 = f_xxx + f_xyy + g_xxy + g_yyy
///       + (f_xy (f_xx + f_yy) - g_xy (g_xx + g_yy) - f_xx g_xx + f_yy g_yy) / omega
/// ```
fn l1_formula(f: &Jet, g: &Jet, omega: f64) -> f64 {
    let fxx = 2.0 * f.coeff(2, 0);
    let fxy = f.coeff(1, 1);
    let fyy = 2.0 * f.coeff(0, 2);
    let gxx = 2.0 * g.coeff(2, 0);
    let gxy = g.coeff(1, 1);
    let gyy = 2.0 * g.coeff(0, 2);
    let fxxx = 6.0 * f.coeff(3, 0);
    let fxyy = 2.0 * f.coeff(1, 2);
    let gxxy = 2.0 * g.coeff(2, 1);
    let gyyy = 6.0 * g.coeff(0, 3);
    let third = fxxx + fxyy + gxxy + gyyy;
    let second = fxy * (fxx + fyy) - gxy * (gxx + gyy) - fxx * gxx + fyy * gyy;
    (third + second / omega) / 16.0
}

pub fn lyapunov_l1(a: f64) -> Result<f64> {
    let (f, g, omega) = canonical_jets(a, 1.0)?;
    Ok(l1_formula(&f, &g, omega))
}

// Homogeneous polynomials of degree k as coefficients of x^{k-j} y^j.
type Homog = Vec<f64>;

fn homog_mul(p: &Homog, q: &Homog) -> Homog {
    let mut out = vec![0.0; p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

fn homog_dx(p: &Homog) -> Homog {
    let k = p.len() - 1;
    (0..k).map(|j| (k - j) as f64 * p[j]).collect()
}

fn homog_dy(p: &Homog) -> Homog {
    (1..p.len()).map(|j| j as f64 * p[j]).collect()
}

/// Solves the square system `m x = rhs` by Gaussian elimination with partial
/// pivoting.
#[allow(clippy::needless_range_loop)]
fn solve_dense(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            if f != 0.0 {
                for c in col..n {
                    m[row][c] -= f * m[col][c];
                }
                rhs[row] -= f * rhs[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|c| m[row][c] * x[c]).sum();
        x[row] = (rhs[row] - s) / m[row][row];
    }
    Some(x)
}

/// Focus quantities `eta_2, eta_3` of `x' = -omega y + f, y' = omega x + g`:
/// a polynomial `V = (x^2 + y^2)/2 + V_3 + ... + V_6` is built degree by
/// degree so that `dV/dt = eta_2 r^4 + eta_3 r^6 + O(r^7)`. The free
/// multiple of `r^k` in each even-degree `V_k` is fixed by zeroing its `x^k`
/// coefficient.
pub fn focus_quantities(f: &Jet, g: &Jet, omega: f64) -> (f64, f64) {
    let pf: Vec<Homog> = (0..=6).map(|m| f.homogeneous(m)).collect();
    let qg: Vec<Homog> = (0..=6).map(|m| g.homogeneous(m)).collect();
    let mut v: Vec<Homog> = vec![vec![], vec![], vec![0.5, 0.0, 0.5]];
    let mut etas = Vec::new();
    for k in 3..=6usize {
        // Degree-k part of grad(V_2 + ... + V_{k-1}) . (f, g).
        let mut r = vec![0.0; k + 1];
        for (j, vj) in v.iter().enumerate().take(k).skip(2) {
            let m = k + 1 - j;
            let term_x = homog_mul(&homog_dx(vj), &pf[m]);
            let term_y = homog_mul(&homog_dy(vj), &qg[m]);
            for i in 0..=k {
                r[i] += term_x[i] + term_y[i];
            }
        }
        // omega * D V_k columns: D(x^{k-j} y^j) = j x^{k-j+1} y^{j-1} - (k-j) x^{k-j-1} y^{j+1}.
        let mut d = vec![vec![0.0; k + 1]; k + 1];
        for j in 0..=k {
            if j >= 1 {
                d[j - 1][j] += omega * j as f64;
            }
            if j < k {
                d[j + 1][j] -= omega * (k - j) as f64;
            }
        }
        let rhs: Vec<f64> = r.iter().map(|x| -x).collect();
        if k % 2 == 1 {
            let vk = solve_dense(d, rhs).expect("rotation operator is invertible in odd degree");
            v.push(vk);
        } else {
            // Unknowns: V_k coefficients j = 1..=k, then eta. Column of eta is -r^k.
            let half = k / 2;
            let mut rk = vec![0.0; k + 1];
            for i in 0..=half {
                rk[2 * i] = binomial(half, i);
            }
            let m: Vec<Vec<f64>> = (0..=k)
                .map(|row| {
                    let mut cols: Vec<f64> = (1..=k).map(|j| d[row][j]).collect();
                    cols.push(-rk[row]);
                    cols
                })
                .collect();
            let sol = solve_dense(m, rhs).expect("focus-quantity system is regular");
            let mut vk = vec![0.0];
            vk.extend_from_slice(&sol[..k]);
            etas.push(sol[k]);
            v.push(vk);
        }
    }
    (etas[0], etas[1])
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Second Lyapunov coefficient, in the canonical basis scaled by `kappa`.
/// Meaningful where the first coefficient vanishes; away from it the value
/// depends on the normal-form gauge.
pub fn lyapunov_l2_scaled(a: f64, kappa: f64) -> Result<f64> {
    let (f, g, omega) = canonical_jets(a, kappa)?;
    Ok(focus_quantities(&f, &g, omega).1)
}

pub fn lyapunov_l2(a: f64) -> Result<f64> {
    lyapunov_l2_scaled(a, 1.0)
}

pub fn hopf_data(a: f64) -> Result<HopfData> {
    if !(a > hopf_threshold()) {
        return Err(Error::NotOnHopfCurve { a });
    }
    let b = model::hopf_b(a);
    let omega = (a * b * (a * a + 25.0)).sqrt() / 5.0;
    let l1 = lyapunov_l1(a)?;
    let a_b = bautin_a();
    let arc = if (a - a_b).abs() <= BAUTIN_TOL * a_b {
        Arc::Bautin
    } else if a < a_b {
        Arc::Hminus
    } else {
        Arc::Hplus
    };
    let l2 = if (a - a_b).abs() <= L2_WINDOW {
        Some(lyapunov_l2(a)?)
    } else {
        None
    };
    Ok(HopfData {
        a,
        b,
        omega,
        l1,
        l2,
        arc,
    })
}

/// `n` evenly spaced Hopf points over `[lo, hi]`.
pub fn hopf_scan(lo: f64, hi: f64, n: usize) -> Result<Vec<HopfData>> {
    if !(lo > hopf_threshold()) || !(hi >= lo) || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "hopf_scan needs 5*sqrt(5/3) < lo <= hi and n >= 1, got [{lo}, {hi}], n={n}"
        )));
    }
    let pts: Vec<f64> = (0..n)
        .map(|k| {
            if n == 1 {
                lo
            } else {
                lo + (hi - lo) * k as f64 / (n - 1) as f64
            }
        })
        .collect();
    crate::par::map(&pts, |a| hopf_data(*a))
        .into_iter()
        .collect()
}

/// CSV `a,b,omega,L1,arc`.
pub fn hopf_scan_csv(rows: &[HopfData]) -> String {
    let mut out = String::from("a,b,omega,L1,arc\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{:e},{:e},{:e},{:e},{}",
            r.a,
            r.b,
            r.omega,
            r.l1,
            r.arc.as_str()
        );
    }
    out
}

/// Positions in a scan where L1 changes sign, as `(a_left, a_right)` pairs.
pub fn sign_changes(rows: &[HopfData]) -> Vec<(f64, f64)> {
    rows.windows(2)
        .filter(|w| w[0].l1.signum() != w[1].l1.signum())
        .map(|w| (w[0].a, w[1].a))
        .collect()
}

/// Bisects the numerical L1 on a sign-change bracket.
pub fn l1_root(mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut f_lo = lyapunov_l1(lo)?;
    let f_hi = lyapunov_l1(hi)?;
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::InvalidArgument(format!(
            "L1 does not change sign on [{lo}, {hi}]"
        )));
    }
    while hi - lo > tol * hi.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        let f_mid = lyapunov_l1(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Displacement of the return map at a Hopf point, fitted as
/// `d(s)/s = c2 s^2 + c4 s^4` over small section offsets `s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisplacementFit {
    pub offsets: Vec<f64>,
    pub displacements: Vec<f64>,
    pub c2: f64,
    pub c4: f64,
    /// Slope of `log |d|` against `log s` between the extreme offsets.
    pub log_slope: f64,
}

impl DisplacementFit {
    /// Sign of the leading nonlinearity: `c4` when the cubic term is
    /// negligible over the fitted range, `c2` otherwise.
    pub fn leading_sign(&self) -> f64 {
        let s = *self.offsets.last().unwrap_or(&1.0);
        if (self.c2 * s * s).abs() < 0.1 * (self.c4 * s.powi(4)).abs() {
            self.c4.signum()
        } else {
            self.c2.signum()
        }
    }
}

/// Fits the return-map displacement near the weak focus at `(a, b_H(a))`.
pub fn displacement_fit(a: f64, offsets: &[f64]) -> Result<DisplacementFit> {
    if offsets.len() < 2 {
        return Err(Error::InvalidArgument("need at least two offsets".into()));
    }
    let p = Params::new(a, model::hopf_b(a))?;
    let cfg = ReturnMapConfig {
        rel_tol: 1e-12,
        abs_tol: 1e-14,
        ..Default::default()
    };
    let mut ds = Vec::with_capacity(offsets.len());
    for &s in offsets {
        let r = cycles::return_offset(&p, Section::Horizontal, s, &cfg, false)
            .map_err(Error::NoReturn)?;
        ds.push(r.offset - s);
    }
    // Least squares for d/s = c2 s^2 + c4 s^4.
    let (mut s11, mut s12, mut s22, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&s, &d) in offsets.iter().zip(&ds) {
        let (u, w, z) = (s * s, s.powi(4), d / s);
        s11 += u * u;
        s12 += u * w;
        s22 += w * w;
        r1 += u * z;
        r2 += w * z;
    }
    let det = s11 * s22 - s12 * s12;
    let c2 = (r1 * s22 - r2 * s12) / det;
    let c4 = (s11 * r2 - s12 * r1) / det;
    let n = offsets.len() - 1;
    let log_slope = (ds[n].abs().ln() - ds[0].abs().ln()) / (offsets[n].ln() - offsets[0].ln());
    Ok(DisplacementFit {
        offsets: offsets.to_vec(),
        displacements: ds,
        c2,
        c4,
        log_slope,
    })
}

/// Offsets used for the return-map check of L2 at the Bautin point: large
/// enough for the quintic term to dominate integration error, small enough
/// to stay in the weak-focus regime.
pub const BAUTIN_FIT_OFFSETS: [f64; 5] = [0.04, 0.06, 0.09, 0.13, 0.18];
