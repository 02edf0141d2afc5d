//! Closed-form layer of the cubic Lengyel-Epstein family
//!
//! ```text
//! x' = (a - x)(1 + x^2) - 4xy,    y' = b x (1 + x^2 - y)
//! ```
//!
//! together with the rational form it is a positive rescaling of, the unique
//! equilibrium, its linearization, the parameter-plane curves and the
//! Bendixson-Dulac certificate for the absence of closed orbits.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Scalar;

/// Left end of the Hopf curve, `5 sqrt(5/3)`.
pub fn hopf_threshold() -> f64 {
    5.0 * (5.0f64 / 3.0).sqrt()
}

/// Left end of the basin curve, `3 sqrt(3)`.
pub fn basin_threshold() -> f64 {
    3.0 * 3.0f64.sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    a: f64,
    b: f64,
}

impl Params {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0 {
            Ok(Self { a, b })
        } else {
            Err(Error::InvalidParams { a, b })
        }
    }

    #[inline]
    pub fn a(&self) -> f64 {
        self.a
    }

    #[inline]
    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn with_b(&self, b: f64) -> Result<Self> {
        Self::new(self.a, b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub x: f64,
    pub y: f64,
}

impl State {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if x.is_finite() && y.is_finite() {
            Ok(Self { x, y })
        } else {
            Err(Error::NonFiniteState { x, y })
        }
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(&self, o: &State) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.x, self.y]
    }
}

impl From<[f64; 2]> for State {
    fn from(v: [f64; 2]) -> Self {
        Self { x: v[0], y: v[1] }
    }
}

pub type Matrix2 = [[f64; 2]; 2];

/// Polynomial field, generic so it can be expanded on jets.
#[inline]
pub fn field<S: Scalar>(a: f64, b: f64, x: S, y: S) -> [S; 2] {
    let q = x * x + 1.0;
    [(S::cst(a) - x) * q - x * y * 4.0, x * (q - y) * b]
}

/// Cubic vector field `F(x, y)`.
pub fn vector_field(p: &Params, s: &State) -> [f64; 2] {
    field(p.a, p.b, s.x, s.y)
}

/// Rational right-hand side; `vector_field = (1 + x^2) * original_vector_field`.
pub fn original_vector_field(p: &Params, s: &State) -> [f64; 2] {
    let q = 1.0 + s.x * s.x;
    [p.a - s.x - 4.0 * s.x * s.y / q, p.b * s.x * (1.0 - s.y / q)]
}

/// Divergence of the cubic field.
pub fn divergence(p: &Params, s: &State) -> f64 {
    let j = jacobian(p, s);
    j[0][0] + j[1][1]
}

/// The unique equilibrium `(a/5, 1 + a^2/25)`.
pub fn equilibrium(p: &Params) -> State {
    let x = p.a / 5.0;
    State { x, y: 1.0 + x * x }
}

pub fn jacobian(p: &Params, s: &State) -> Matrix2 {
    let (a, b, x, y) = (p.a, p.b, s.x, s.y);
    [
        [-(1.0 + x * x) + 2.0 * x * (a - x) - 4.0 * y, -4.0 * x],
        [b * (1.0 + 3.0 * x * x - y), -b * x],
    ]
}

/// Trace of the linearization at the equilibrium, `3a^2/25 - 5 - ab/5`.
pub fn equilibrium_trace(p: &Params) -> f64 {
    3.0 * p.a * p.a / 25.0 - 5.0 - p.a * p.b / 5.0
}

/// Determinant of the linearization at the equilibrium, `ab(a^2 + 25)/25`.
pub fn equilibrium_determinant(p: &Params) -> f64 {
    p.a * p.b * (p.a * p.a + 25.0) / 25.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EquilibriumKind {
    StableNode,
    StableFocus,
    CenterLinear,
    UnstableFocus,
    UnstableNode,
    Degenerate,
}

impl EquilibriumKind {
    pub fn is_stable(self) -> bool {
        matches!(self, Self::StableNode | Self::StableFocus)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub location: State,
    pub jacobian: Matrix2,
    pub trace: f64,
    pub determinant: f64,
    pub eigenvalues: [Complex64; 2],
    pub kind: EquilibriumKind,
}

pub fn eigenvalues(j: &Matrix2) -> [Complex64; 2] {
    let tr = j[0][0] + j[1][1];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let disc = tr * tr - 4.0 * det;
    if disc >= 0.0 {
        let sq = disc.sqrt();
        // Avoid cancellation in the smaller root.
        let big = -0.5 * (tr + tr.signum() * sq);
        if big == 0.0 {
            [Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)]
        } else {
            let l1 = -big;
            let l2 = -det / big;
            let (hi, lo) = if l1 >= l2 { (l1, l2) } else { (l2, l1) };
            [Complex64::new(hi, 0.0), Complex64::new(lo, 0.0)]
        }
    } else {
        let im = (-disc).sqrt() / 2.0;
        [Complex64::new(tr / 2.0, im), Complex64::new(tr / 2.0, -im)]
    }
}

/// Default trace tolerance used to flag Hopf candidates, relative to the
/// size of the Jacobian entries.
pub const DEFAULT_TOL_TRACE: f64 = 1e-10;

pub fn classify_equilibrium(p: &Params) -> EquilibriumReport {
    classify_equilibrium_with_tol(p, DEFAULT_TOL_TRACE)
}

pub fn classify_equilibrium_with_tol(p: &Params, tol_trace: f64) -> EquilibriumReport {
    let location = equilibrium(p);
    let j = jacobian(p, &location);
    let trace = equilibrium_trace(p);
    let determinant = equilibrium_determinant(p);
    let scale = 1.0 + j.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let disc = trace * trace - 4.0 * determinant;
    let kind = if determinant <= 0.0 || trace.abs() < tol_trace * scale {
        EquilibriumKind::Degenerate
    } else if trace < 0.0 {
        if disc >= 0.0 {
            EquilibriumKind::StableNode
        } else {
            EquilibriumKind::StableFocus
        }
    } else if disc >= 0.0 {
        EquilibriumKind::UnstableNode
    } else {
        EquilibriumKind::UnstableFocus
    };
    EquilibriumReport {
        location,
        jacobian: j,
        trace,
        determinant,
        eigenvalues: eigenvalues(&j),
        kind,
    }
}

/// Hopf curve `b_H(a) = (3a^2 - 125) / (5a)`.
pub fn hopf_b(a: f64) -> f64 {
    (3.0 * a * a - 125.0) / (5.0 * a)
}

/// Basin curve `b_a(a) = a - 3 a^{1/3}`.
pub fn basin_b(a: f64) -> f64 {
    a - 3.0 * a.cbrt()
}

/// Membership in A, split into its two defining pieces.
pub fn in_set_a(p: &Params) -> bool {
    p.a <= basin_threshold() || p.b > basin_b(p.a)
}

/// Membership in B (strict stability of the equilibrium).
pub fn in_set_b(p: &Params) -> bool {
    p.a <= hopf_threshold() || p.b > hopf_b(p.a)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegionKind {
    InA,
    InBNotA,
    OnHminus,
    OnHplus,
    AtBautin,
    InD,
    UnstableOutsideD,
    OnSapprox,
}

/// Whether the two-cycle region has been decided for this label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DStatus {
    Resolved,
    Unresolved,
    NotApplicable,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionLabel {
    pub kind: RegionKind,
    pub b_h_at_a: f64,
    pub b_a_at_a: f64,
    /// `a <= 3 sqrt(3)`: A holds for every b.
    pub a_unconditional: bool,
    /// `a <= 5 sqrt(5/3)`: B holds for every b.
    pub b_unconditional: bool,
    pub d_status: DStatus,
}

/// Default half-width of the band treated as lying on the Hopf curve,
/// relative to `max(1, |b_H(a)|)`.
pub const DEFAULT_TOL_CURVE: f64 = 1e-9;

/// Labels `(a, b)` without counting cycles. Points of B outside A are where
/// the two-cycle region lives; those come back with
/// [`DStatus::Unresolved`] and are settled by
/// [`crate::cycles::region_with_cycles`].
pub fn region_membership(p: &Params, tol_curve: f64) -> RegionLabel {
    let (a, b) = (p.a, p.b);
    let b_h = hopf_b(a);
    let b_a = basin_b(a);
    let a_unconditional = a <= basin_threshold();
    let b_unconditional = a <= hopf_threshold();
    let mut label = RegionLabel {
        kind: RegionKind::InA,
        b_h_at_a: b_h,
        b_a_at_a: b_a,
        a_unconditional,
        b_unconditional,
        d_status: DStatus::NotApplicable,
    };
    let on_curve = !b_unconditional && (b - b_h).abs() <= tol_curve * b_h.abs().max(1.0);
    if on_curve {
        let a_b = crate::hopf::bautin_a();
        label.kind = if (a - a_b).abs() <= tol_curve * a_b {
            RegionKind::AtBautin
        } else if a < a_b {
            RegionKind::OnHminus
        } else {
            RegionKind::OnHplus
        };
    } else if in_set_a(p) {
        label.kind = RegionKind::InA;
    } else if in_set_b(p) {
        label.kind = RegionKind::InBNotA;
        label.d_status = DStatus::Unresolved;
    } else {
        label.kind = RegionKind::UnstableOutsideD;
    }
    label
}

/// Divergence of `F / x`, `f(x) = a - b - 2x - a/x^2`.
pub fn dulac_divergence(p: &Params, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "Dulac divergence needs x > 0, got {x}"
        )));
    }
    Ok(p.a - p.b - 2.0 * x - p.a / (x * x))
}

/// Cubic majorant `g(x) = -2x^3 + 3 a^{1/3} x^2 - a`; `x^2 f(x) < g(x)` on A.
pub fn dulac_majorant(a: f64, x: f64) -> f64 {
    -2.0 * x * x * x + 3.0 * a.cbrt() * x * x - a
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DulacCertificate {
    pub holds: bool,
    pub worst_x: f64,
    pub worst_value: f64,
    /// `g(a^{1/3})`, zero up to rounding.
    pub majorant_at_peak: f64,
    /// Upper end of the sampled interval; beyond it `f(x) <= -x`.
    pub tail_start: f64,
}

pub const DEFAULT_DULAC_GRID: usize = 10_000;

/// Samples `f` on a logarithmic grid over `(0, x_max]`. Past
/// `max(a, 1)` the bound `f(x) <= a - b - 2x <= -x` makes sampling
/// unnecessary, so `x_max` is raised to at least that value. Below the grid,
/// `f < a - a/x^2 < 0`.
pub fn dulac_certificate(p: &Params, x_max: f64, n_grid: usize) -> Result<DulacCertificate> {
    if n_grid < 2 || !(x_max > 0.0) {
        return Err(Error::InvalidArgument(
            "dulac_certificate needs n_grid >= 2 and x_max > 0".into(),
        ));
    }
    let hi = x_max.max(p.a).max(1.0);
    let lo = 1e-4 * p.a.cbrt().min(1.0);
    let ratio = (hi / lo).ln() / (n_grid - 1) as f64;
    let mut worst_x = lo;
    let mut worst_value = f64::NEG_INFINITY;
    for k in 0..n_grid {
        let x = if k + 1 == n_grid {
            hi
        } else {
            lo * (ratio * k as f64).exp()
        };
        let v = dulac_divergence(p, x)?;
        if v > worst_value {
            worst_value = v;
            worst_x = x;
        }
    }
    Ok(DulacCertificate {
        holds: worst_value < 0.0,
        worst_x,
        worst_value,
        majorant_at_peak: dulac_majorant(p.a, p.a.cbrt()),
        tail_start: hi,
    })
}
