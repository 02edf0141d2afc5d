//! Limit cycles around the equilibrium via a Poincare return map.
//!
//! Every periodic orbit must enclose the unique equilibrium `P = (x_P, y_P)`,
//! so each one crosses the ray `{(x, y_P): x > x_P}` exactly once per turn.
//! Cycles are the zeros of the displacement `d(x) = P(x) - x` of the first
//! return map on that ray; their stability is read off the derivative of the
//! return map, cross-checked against `exp` of the divergence integral.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, DStatus, Params, RegionKind, RegionLabel, State};
use crate::ode::{self, Control, SolverOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoReturnReason {
    /// The orbit reached the equilibrium before coming back.
    Converged,
    Escaped,
    Timeout,
}

/// Ray through the equilibrium used as transversal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Section {
    /// `{(x, y_P): x > x_P}`, crossed upwards.
    Horizontal,
    /// `{(x_P, y): y > y_P}`, crossed leftwards.
    Vertical,
}

impl Section {
    fn point(self, eq: &State, offset: f64) -> State {
        match self {
            Self::Horizontal => State {
                x: eq.x + offset,
                y: eq.y,
            },
            Self::Vertical => State {
                x: eq.x,
                y: eq.y + offset,
            },
        }
    }

    /// Negative before the crossing, positive after.
    fn crossing(self, eq: &State, y: &[f64]) -> f64 {
        match self {
            Self::Horizontal => y[1] - eq.y,
            Self::Vertical => eq.x - y[0],
        }
    }

    fn on_ray(self, eq: &State, y: &[f64]) -> bool {
        match self {
            Self::Horizontal => y[0] > eq.x,
            Self::Vertical => y[1] > eq.y,
        }
    }

    fn offset(self, eq: &State, y: &[f64]) -> f64 {
        match self {
            Self::Horizontal => y[0] - eq.x,
            Self::Vertical => y[1] - eq.y,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReturnMapConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Longest time allowed for a single turn.
    pub max_time: f64,
    pub r_escape: f64,
    /// Distance to the equilibrium counted as convergence.
    pub conv_radius: f64,
}

impl Default for ReturnMapConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-11,
            abs_tol: 1e-13,
            max_time: 1e3,
            r_escape: 1e6,
            conv_radius: 1e-9,
        }
    }
}

/// One turn around the equilibrium.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Return {
    /// Offset from the equilibrium along the section after one turn.
    pub offset: f64,
    pub period: f64,
    /// Integral of the divergence of the field over the turn.
    pub divergence_integral: f64,
    /// Accepted steps of the turn when recording was requested.
    pub samples: Vec<(f64, State)>,
}

/// First return to `section` from the point at `offset > 0` along it.
pub fn return_offset(
    p: &Params,
    section: Section,
    offset: f64,
    cfg: &ReturnMapConfig,
    record: bool,
) -> std::result::Result<Return, NoReturnReason> {
    let (a, b) = (p.a(), p.b());
    let eq = model::equilibrium(p);
    let start = section.point(&eq, offset);
    let opts = SolverOptions {
        rtol: cfg.rel_tol,
        atol: cfg.abs_tol,
        h_max: f64::INFINITY,
        max_steps: 5_000_000,
    };
    let mut samples = Vec::new();
    if record {
        samples.push((0.0, start));
    }
    let mut outcome: Option<std::result::Result<Return, NoReturnReason>> = None;
    ode::solve(
        |y: &[f64; 3]| {
            let [fx, fy] = model::field(a, b, y[0], y[1]);
            let div = -(1.0 + y[0] * y[0]) + 2.0 * y[0] * (a - y[0]) - 4.0 * y[1] - b * y[0];
            [fx, fy, div]
        },
        0.0,
        [start.x, start.y, 0.0],
        cfg.max_time,
        &opts,
        |step| {
            let g0 = section.crossing(&eq, &step.y0);
            let g1 = section.crossing(&eq, &step.y1);
            if g0 < 0.0 && g1 >= 0.0 {
                if let Some((t, y)) = step.locate(|y| section.crossing(&eq, y), 1e-14) {
                    if section.on_ray(&eq, &y) {
                        if record {
                            samples.push((t, State { x: y[0], y: y[1] }));
                        }
                        outcome = Some(Ok(Return {
                            offset: section.offset(&eq, &y),
                            period: t,
                            divergence_integral: y[2],
                            samples: std::mem::take(&mut samples),
                        }));
                        return Control::Stop;
                    }
                }
            }
            if record {
                samples.push((
                    step.t1(),
                    State {
                        x: step.y1[0],
                        y: step.y1[1],
                    },
                ));
            }
            let s = State {
                x: step.y1[0],
                y: step.y1[1],
            };
            if s.norm() >= cfg.r_escape {
                outcome = Some(Err(NoReturnReason::Escaped));
                return Control::Stop;
            }
            if s.dist(&eq) < cfg.conv_radius {
                outcome = Some(Err(NoReturnReason::Converged));
                return Control::Stop;
            }
            Control::Continue
        },
    );
    match outcome {
        Some(r) => r,
        None => Err(NoReturnReason::Timeout),
    }
}

/// Return map on the horizontal ray, in absolute `x` coordinates.
pub fn return_map(p: &Params, x0: f64, cfg: &ReturnMapConfig) -> Result<f64> {
    let eq = model::equilibrium(p);
    if !(x0 > eq.x) {
        return Err(Error::InvalidArgument(format!(
            "section point must satisfy x > x_P = {}, got {x0}",
            eq.x
        )));
    }
    return_offset(p, Section::Horizontal, x0 - eq.x, cfg, false)
        .map(|r| eq.x + r.offset)
        .map_err(Error::NoReturn)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stability {
    Stable,
    Unstable,
    SemistableSuspect,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleInfo {
    /// Absolute `x` of the crossing with the horizontal section.
    pub section_x: f64,
    pub period: f64,
    /// Derivative of the return map at the fixed point.
    pub floquet: f64,
    /// `exp` of the divergence integral over one period.
    pub floquet_divergence: f64,
    pub stability: Stability,
    #[serde(skip)]
    pub orbit: Vec<(f64, State)>,
}

impl CycleInfo {
    pub fn orbit_csv(&self) -> String {
        crate::integrate::samples_to_csv(&self.orbit)
    }
}

/// JSON array `[{section_x, period, floquet, stability}]`.
pub fn cycles_to_json(cycles: &[CycleInfo]) -> serde_json::Value {
    serde_json::Value::Array(
        cycles
            .iter()
            .map(|c| {
                serde_json::json!({
                    "section_x": c.section_x,
                    "period": c.period,
                    "floquet": c.floquet,
                    "stability": c.stability,
                })
            })
            .collect(),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleSearch {
    pub section: Section,
    /// Seeds on the section, geometric in the offset.
    pub n_seed: usize,
    pub min_offset: f64,
    /// Bisection stops below this bracket width.
    pub root_tol: f64,
    /// Roots closer than this are merged.
    pub dedup: f64,
    /// Relative step of the central-difference multiplier.
    pub fd_step: f64,
    /// Band around 1 in which a multiplier is reported as semistable.
    pub semistable_band: f64,
    pub map: ReturnMapConfig,
}

impl Default for CycleSearch {
    fn default() -> Self {
        Self {
            section: Section::Horizontal,
            n_seed: 60,
            min_offset: 1e-3,
            root_tol: 1e-10,
            dedup: 1e-6,
            fd_step: 1e-6,
            semistable_band: 1e-3,
            map: ReturnMapConfig::default(),
        }
    }
}

fn displacement(p: &Params, s: &CycleSearch, offset: f64) -> Option<f64> {
    return_offset(p, s.section, offset, &s.map, false)
        .ok()
        .map(|r| r.offset - offset)
}

/// Golden-section search for the extremum of `sign * d` on `[lo, hi]`,
/// returning `(offset, d)` at the smallest `sign * d` found.
fn dip(p: &Params, s: &CycleSearch, lo: f64, hi: f64, sign: f64) -> Option<(f64, f64)> {
    let gr = 0.5 * (5.0f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - gr * (b - a);
    let mut d = a + gr * (b - a);
    let mut fc = sign * displacement(p, s, c)?;
    let mut fd = sign * displacement(p, s, d)?;
    for _ in 0..60 {
        if fc.min(fd) < 0.0 || (b - a) < s.root_tol * b.max(1.0) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = sign * displacement(p, s, c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = sign * displacement(p, s, d)?;
        }
    }
    if fc < fd {
        Some((c, sign * fc))
    } else {
        Some((d, sign * fd))
    }
}

fn bisect(p: &Params, s: &CycleSearch, mut lo: f64, mut hi: f64, mut d_lo: f64) -> Option<f64> {
    while hi - lo > s.root_tol * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        let dm = displacement(p, s, mid)?;
        if dm == 0.0 {
            return Some(mid);
        }
        if dm.signum() == d_lo.signum() {
            lo = mid;
            d_lo = dm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Sampled displacement `d(offset)` over the seed grid, `None` where the
/// orbit fails to come back.
pub fn displacement_profile(
    p: &Params,
    s: &CycleSearch,
    max_offset: f64,
) -> Vec<(f64, Option<f64>)> {
    let n = s.n_seed.max(2);
    let lo = s.min_offset.min(0.5 * max_offset);
    let ratio = (max_offset / lo).ln() / (n - 1) as f64;
    let offsets: Vec<f64> = (0..n).map(|k| lo * (ratio * k as f64).exp()).collect();
    let ds = crate::par::map(&offsets, |o| displacement(p, s, *o));
    offsets.into_iter().zip(ds).collect()
}

fn brackets(p: &Params, s: &CycleSearch, profile: &[(f64, Option<f64>)]) -> Vec<(f64, f64, f64)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i + 1 < profile.len() {
        if let ((x0, Some(d0)), (x1, Some(d1))) = (profile[i], profile[i + 1]) {
            if d0 == 0.0 || d0.signum() != d1.signum() {
                out.push((x0, x1, d0));
            } else if i + 2 < profile.len() {
                // Two roots can hide between seeds when d dips towards zero.
                if let (x2, Some(d2)) = profile[i + 2] {
                    let sign = d1.signum();
                    if d2.signum() == sign && d1.abs() < d0.abs() && d1.abs() < d2.abs() {
                        if let Some((xm, dm)) = dip(p, s, x0, x2, sign) {
                            if dm.signum() != sign {
                                out.push((x0, xm, d0));
                                out.push((xm, x2, dm));
                                i += 2;
                                continue;
                            }
                        }
                    }
                }
            }
        }
        i += 1;
    }
    out
}

/// Locates, refines and classifies the cycles whose crossing offset lies in
/// `(0, max_offset]` along the search section.
pub fn find_cycles_in(p: &Params, s: &CycleSearch, max_offset: f64) -> Result<Vec<CycleInfo>> {
    if s.n_seed < 2 || !(max_offset > 0.0) {
        return Err(Error::InvalidArgument(
            "cycle search needs n_seed >= 2 and a positive range".into(),
        ));
    }
    let mut profile = displacement_profile(p, s, max_offset);
    // Shrink the range while more than half the seeds fail to return.
    let mut range = max_offset;
    for _ in 0..4 {
        let failed = profile.iter().filter(|(_, d)| d.is_none()).count();
        if 2 * failed <= profile.len() {
            break;
        }
        let last_ok = profile
            .iter()
            .rev()
            .find(|(_, d)| d.is_some())
            .map(|(o, _)| *o);
        range = match last_ok {
            Some(o) => o.max(range / 4.0),
            None => range / 4.0,
        };
        profile = displacement_profile(p, s, range);
    }

    let mut roots: Vec<f64> = Vec::new();
    for (lo, hi, d_lo) in brackets(p, s, &profile) {
        if let Some(r) = bisect(p, s, lo, hi, d_lo) {
            if roots.iter().all(|q| (q - r).abs() > s.dedup) {
                roots.push(r);
            }
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let eq = model::equilibrium(p);
    let results = crate::par::map(&roots, |r| classify_root(p, s, &eq, *r));
    Ok(results.into_iter().flatten().collect())
}

fn classify_root(p: &Params, s: &CycleSearch, eq: &State, offset: f64) -> Option<CycleInfo> {
    let turn = return_offset(p, s.section, offset, &s.map, true).ok()?;
    let h = s.fd_step * offset.max(1e-3);
    let plus = return_offset(p, s.section, offset + h, &s.map, false).ok()?;
    let minus = return_offset(p, s.section, offset - h, &s.map, false).ok()?;
    let floquet = (plus.offset - minus.offset) / (2.0 * h);
    let stability = if floquet < 1.0 - s.semistable_band {
        Stability::Stable
    } else if floquet > 1.0 + s.semistable_band {
        Stability::Unstable
    } else {
        Stability::SemistableSuspect
    };
    // Crossing with the horizontal ray, whichever section was searched.
    let section_x = match s.section {
        Section::Horizontal => eq.x + offset,
        Section::Vertical => horizontal_crossing(&turn.samples, p, eq).unwrap_or(f64::NAN),
    };
    Some(CycleInfo {
        section_x,
        period: turn.period,
        floquet,
        floquet_divergence: turn.divergence_integral.exp(),
        stability,
        orbit: turn.samples,
    })
}

fn horizontal_crossing(samples: &[(f64, State)], _p: &Params, eq: &State) -> Option<f64> {
    samples.windows(2).find_map(|w| {
        let (s0, s1) = (w[0].1, w[1].1);
        if s0.y < eq.y && s1.y >= eq.y {
            let t = (eq.y - s0.y) / (s1.y - s0.y);
            let x = s0.x + t * (s1.x - s0.x);
            (x > eq.x).then_some(x)
        } else {
            None
        }
    })
}

/// Cycles with section crossing in `(x_P, x_max]` on the horizontal ray.
pub fn find_cycles(p: &Params, x_max: f64, n_seed: usize) -> Result<Vec<CycleInfo>> {
    let eq = model::equilibrium(p);
    if !(x_max > eq.x) {
        return Err(Error::InvalidArgument(format!(
            "x_max must exceed x_P = {}",
            eq.x
        )));
    }
    let s = CycleSearch {
        n_seed,
        ..Default::default()
    };
    find_cycles_in(p, &s, x_max - eq.x)
}

/// Default search extent along the section, `10 (1 + a/5)`.
pub fn default_range(p: &Params) -> f64 {
    10.0 * (1.0 + p.a() / 5.0)
}

/// Cycles found with the default search, widening the range while the
/// outermost seed still drifts outwards.
pub fn detect_cycles(p: &Params, s: &CycleSearch) -> Result<Vec<CycleInfo>> {
    let mut range = default_range(p);
    for _ in 0..3 {
        let cycles = find_cycles_in(p, s, range)?;
        let eq = model::equilibrium(p);
        let outer_push = displacement(p, s, range).map(|d| d > 0.0).unwrap_or(false);
        let touches = cycles
            .last()
            .map(|c| s.section == Section::Horizontal && c.section_x - eq.x > 0.9 * range)
            .unwrap_or(false);
        if !outer_push && !touches {
            return Ok(cycles);
        }
        range *= 4.0;
    }
    find_cycles_in(p, s, range)
}

pub fn count_cycles(p: &Params) -> Result<usize> {
    Ok(detect_cycles(p, &CycleSearch::default())?.len())
}

/// Central-difference multiplier of a detected cycle, cross-checked by the
/// divergence integral. Returns `(finite_difference, divergence)`.
pub fn floquet_multiplier(p: &Params, c: &CycleInfo) -> Result<(f64, f64)> {
    let eq = model::equilibrium(p);
    let s = CycleSearch::default();
    let info = classify_root(p, &s, &eq, c.section_x - eq.x)
        .ok_or(Error::NoReturn(NoReturnReason::Timeout))?;
    Ok((info.floquet, info.floquet_divergence))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemistableBracket {
    pub a: f64,
    /// Midpoint of the final bracket.
    pub b_s: f64,
    /// Largest b seen with two cycles.
    pub b_two: f64,
    /// Smallest b seen with none.
    pub b_none: f64,
    pub b_h: f64,
}

/// Locates the fold of cycles above the Hopf curve for `a > a_B` by
/// bisection in `b` between a two-cycle and a cycle-free parameter.
pub fn semistable_b(a: f64, tol_b: f64) -> Result<SemistableBracket> {
    semistable_b_with(a, tol_b, &CycleSearch::default())
}

pub fn semistable_b_with(a: f64, tol_b: f64, s: &CycleSearch) -> Result<SemistableBracket> {
    let a_b = crate::hopf::bautin_a();
    if !(a > a_b) || !(tol_b > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "semistable_b needs a > a_B = {a_b} and tol_b > 0"
        )));
    }
    let b_h = model::hopf_b(a);
    let count = |b: f64| -> Result<usize> { Ok(detect_cycles(&Params::new(a, b)?, s)?.len()) };

    // Walk up from the Hopf curve until two cycles appear, then until none.
    let mut delta = tol_b / 8.0;
    let mut b_two = None;
    let mut b_none = None;
    let mut last_two = None;
    for _ in 0..40 {
        let b = b_h + delta;
        let n = count(b)?;
        if n >= 2 {
            b_two = Some(b);
            last_two = Some(b);
        } else if n == 0 && b_two.is_some() {
            b_none = Some(b);
            break;
        } else if n == 0 {
            break;
        }
        delta *= 2.0;
    }
    let (mut lo, mut hi) = match (b_two, b_none) {
        (Some(_), Some(h)) => (last_two.unwrap(), h),
        _ => {
            return Err(Error::BracketFailure {
                a,
                detail: format!("no two-cycle band found above b_H = {b_h}"),
            })
        }
    };
    while hi - lo > tol_b {
        let mid = 0.5 * (lo + hi);
        if count(mid)? >= 2 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(SemistableBracket {
        a,
        b_s: 0.5 * (lo + hi),
        b_two: lo,
        b_none: hi,
        b_h,
    })
}

/// [`model::region_membership`] with the two-cycle region settled by
/// counting cycles.
pub fn region_with_cycles(p: &Params, tol_curve: f64) -> Result<RegionLabel> {
    let mut label = model::region_membership(p, tol_curve);
    if label.d_status == DStatus::Unresolved {
        let cycles = detect_cycles(p, &CycleSearch::default())?;
        if cycles
            .iter()
            .any(|c| c.stability == Stability::SemistableSuspect)
        {
            label.kind = RegionKind::OnSapprox;
        } else if cycles.len() >= 2 {
            label.kind = RegionKind::InD;
        }
        label.d_status = DStatus::Resolved;
    }
    Ok(label)
}
