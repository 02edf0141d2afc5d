//! Orbits of the cubic field: adaptive integration with fate classification,
//! invariance checks, basin scans and the search for unbounded orbits.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, Params, State};
use crate::ode::{self, Control, SolverOptions, Termination};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_time: f64,
    pub max_steps: usize,
    pub r_escape: f64,
    pub tol_conv: f64,
    /// Keep every accepted step in [`Orbit::samples`].
    pub record: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_time: 1e4,
            max_steps: 10_000_000,
            r_escape: 1e6,
            tol_conv: 1e-8,
            record: true,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.rel_tol,
            self.abs_tol,
            self.max_time,
            self.r_escape,
            self.tol_conv,
        ]
        .iter()
        .all(|v| v.is_finite() && *v > 0.0);
        if !positive || self.max_steps == 0 {
            return Err(Error::InvalidArgument(
                "integrator settings must be positive".into(),
            ));
        }
        if self.rel_tol > 1e-3 || self.abs_tol > 1e-3 {
            return Err(Error::InvalidArgument(
                "rel_tol and abs_tol must not exceed 1e-3".into(),
            ));
        }
        Ok(())
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            rtol: self.rel_tol,
            atol: self.abs_tol,
            h_max: f64::INFINITY,
            max_steps: self.max_steps,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fate {
    ConvergedToEquilibrium,
    Escaped,
    SuspectedCycle,
    BudgetExhausted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Orbit {
    /// `(t, state)` per accepted step, starting with the initial condition.
    /// Empty when recording is off.
    pub samples: Vec<(f64, State)>,
    pub fate: Fate,
    pub t_end: f64,
    pub final_state: State,
    /// Norm of the state at the step that crossed the escape radius.
    pub escape_radius_hit: Option<f64>,
    /// The field overflowed before the escape radius was reached.
    pub overflow: bool,
}

impl Orbit {
    /// CSV with header `t,x,y`, one row per sample.
    pub fn to_csv(&self) -> String {
        samples_to_csv(&self.samples)
    }
}

pub fn samples_to_csv(samples: &[(f64, State)]) -> String {
    let mut out = String::with_capacity(32 * samples.len() + 8);
    out.push_str("t,x,y\n");
    for (t, s) in samples {
        let _ = writeln!(out, "{t:e},{:e},{:e}", s.x, s.y);
    }
    out
}

/// Accepted steps spent inside the convergence ball before the verdict.
const DWELL_SAMPLES: usize = 10;

/// Integrates from `s0` until the orbit settles at the equilibrium, leaves
/// the escape radius, or the budget runs out.
///
/// Convergence requires the orbit to stay inside the `tol_conv` ball for
/// [`DWELL_SAMPLES`] further steps spanning at least one decay time
/// `1/|Re lambda|` of the linearization.
pub fn integrate(p: &Params, s0: State, cfg: &IntegratorConfig) -> Result<Orbit> {
    cfg.validate()?;
    State::new(s0.x, s0.y)?;
    let (a, b) = (p.a(), p.b());
    let eq = model::equilibrium(p);
    let report = model::classify_equilibrium(p);
    let decay = report.eigenvalues[0]
        .re
        .abs()
        .max(report.eigenvalues[1].re.abs());
    let dwell_time = if decay > 0.0 {
        (1.0 / decay).min(0.5 * cfg.max_time)
    } else {
        0.5 * cfg.max_time
    };

    let mut samples = Vec::new();
    if cfg.record {
        samples.push((0.0, s0));
    }
    let mut last = (0.0, s0);
    let mut fate = None;
    let mut escape_radius_hit = None;
    let mut inside_since: Option<(f64, usize)> = None;
    let mut crossings: Vec<f64> = Vec::new();

    let check_converged = |t: f64, s: &State, inside: &mut Option<(f64, usize)>| -> bool {
        if s.dist(&eq) < cfg.tol_conv {
            let (t_in, n) = inside.get_or_insert((t, 0));
            *n += 1;
            *n > DWELL_SAMPLES && t - *t_in >= dwell_time
        } else {
            *inside = None;
            false
        }
    };

    // An orbit starting at the equilibrium never moves.
    let f0 = model::vector_field(p, &s0);
    if s0.dist(&eq) < cfg.tol_conv && f0 == [0.0, 0.0] {
        return Ok(Orbit {
            samples,
            fate: Fate::ConvergedToEquilibrium,
            t_end: 0.0,
            final_state: s0,
            escape_radius_hit: None,
            overflow: false,
        });
    }
    check_converged(0.0, &s0, &mut inside_since);

    // Solve for the deviation from P_a so the relative tolerance tightens
    // near the equilibrium instead of leaving a noise floor of order
    // rel_tol * |P_a| there.
    let stats = ode::solve(
        |z: &[f64; 2]| model::field(a, b, z[0] + eq.x, z[1] + eq.y),
        0.0,
        [s0.x - eq.x, s0.y - eq.y],
        cfg.max_time,
        &cfg.solver_options(),
        |step| {
            let t = step.t1();
            let s = State {
                x: step.y1[0] + eq.x,
                y: step.y1[1] + eq.y,
            };
            if step.y0[1] < 0.0 && step.y1[1] >= 0.0 {
                if let Some((tc, zc)) = step.locate(|z| z[1], 1e-12) {
                    if zc[0] > 0.0 {
                        crossings.push(tc);
                    }
                }
            }
            if cfg.record {
                samples.push((t, s));
            }
            last = (t, s);
            let norm = s.norm();
            if norm >= cfg.r_escape {
                escape_radius_hit = Some(norm);
                fate = Some(Fate::Escaped);
                return Control::Stop;
            }
            if check_converged(t, &s, &mut inside_since) {
                fate = Some(Fate::ConvergedToEquilibrium);
                return Control::Stop;
            }
            Control::Continue
        },
    );

    let mut overflow = false;
    let fate = match fate {
        Some(f) => f,
        None => match stats.termination {
            Termination::NonFinite => {
                overflow = true;
                Fate::Escaped
            }
            Termination::StepTooSmall if last.1.norm() > 1e3 => {
                overflow = true;
                Fate::Escaped
            }
            _ => {
                let half = 0.5 * last.0;
                let late = crossings.iter().filter(|t| **t >= half).count();
                if late >= 3 && last.1.dist(&eq) > 100.0 * cfg.tol_conv {
                    Fate::SuspectedCycle
                } else {
                    Fate::BudgetExhausted
                }
            }
        },
    };
    Ok(Orbit {
        samples,
        fate,
        t_end: last.0,
        final_state: last.1,
        escape_radius_hit,
        overflow,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InvariantRegion {
    /// Open first quadrant.
    Quadrant,
    /// Half-plane `x > 0`.
    HalfPlane,
}

impl InvariantRegion {
    pub fn contains(self, s: &State, slack: f64) -> bool {
        match self {
            Self::Quadrant => s.x > -slack && s.y > -slack,
            Self::HalfPlane => s.x > -slack,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub region: InvariantRegion,
    pub start: State,
    pub t: f64,
    pub state: State,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub orbits_checked: usize,
    pub samples_checked: usize,
    pub violations: Vec<Violation>,
}

pub const BOUNDARY_SLACK: f64 = 1e-9;

/// Checks one orbit against a region, sample by sample.
pub fn check_invariance(
    p: &Params,
    start: State,
    region: InvariantRegion,
    cfg: &IntegratorConfig,
) -> Result<(usize, Option<Violation>)> {
    let cfg = IntegratorConfig {
        record: true,
        ..*cfg
    };
    let orbit = integrate(p, start, &cfg)?;
    let bad = orbit
        .samples
        .iter()
        .find(|(_, s)| !region.contains(s, BOUNDARY_SLACK))
        .map(|(t, s)| Violation {
            region,
            start,
            t: *t,
            state: *s,
        });
    Ok((orbit.samples.len(), bad))
}

/// Integrates `n_samples` random starts in the first quadrant and as many in
/// the half-plane `x > 0`, recording any sample that leaves its region.
pub fn verify_invariance(
    p: &Params,
    n_samples: usize,
    seed: u64,
    cfg: &IntegratorConfig,
) -> Result<InvarianceReport> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument(
            "n_samples must be at least 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eq = model::equilibrium(p);
    let x_hi = 4.0 * eq.x.max(1.0);
    let y_hi = 4.0 * eq.y.max(1.0);
    let mut starts = Vec::with_capacity(2 * n_samples);
    for _ in 0..n_samples {
        let x = rng.gen_range(1e-3..x_hi);
        let y = rng.gen_range(1e-3..y_hi);
        starts.push((InvariantRegion::Quadrant, State { x, y }));
    }
    for _ in 0..n_samples {
        let x = rng.gen_range(1e-3..x_hi);
        let y = rng.gen_range(-y_hi..y_hi);
        starts.push((InvariantRegion::HalfPlane, State { x, y }));
    }
    let results = crate::par::map(&starts, |(region, s)| check_invariance(p, *s, *region, cfg));
    let mut report = InvarianceReport {
        orbits_checked: 0,
        samples_checked: 0,
        violations: Vec::new(),
    };
    for r in results {
        let (n, v) = r?;
        report.orbits_checked += 1;
        report.samples_checked += n;
        report.violations.extend(v);
    }
    Ok(report)
}

/// Rectangle of initial conditions, sampled on an `nx` by `ny` lattice
/// including the corners (a single point when a count is 1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub nx: usize,
    pub ny: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<State> {
        let lin = |(lo, hi): (f64, f64), n: usize, k: usize| {
            if n <= 1 {
                lo
            } else {
                lo + (hi - lo) * k as f64 / (n - 1) as f64
            }
        };
        let mut out = Vec::with_capacity(self.nx * self.ny);
        for j in 0..self.ny {
            for i in 0..self.nx {
                out.push(State {
                    x: lin(self.x_range, self.nx, i),
                    y: lin(self.y_range, self.ny, j),
                });
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasinReport {
    pub total: usize,
    pub converged: usize,
    pub escaped: usize,
    pub other: usize,
    /// Starts that did not converge, with their fate.
    pub failures: Vec<(State, Fate)>,
    /// Largest final distance to the equilibrium among converged orbits.
    pub worst_final_distance: f64,
}

pub fn basin_scan(p: &Params, grid: &Grid, cfg: &IntegratorConfig) -> Result<BasinReport> {
    if grid.x_range.0 <= 0.0 || grid.nx == 0 || grid.ny == 0 {
        return Err(Error::InvalidArgument(
            "basin grid must lie in x > 0 and be non-empty".into(),
        ));
    }
    let cfg = IntegratorConfig {
        record: false,
        ..*cfg
    };
    let eq = model::equilibrium(p);
    let points = grid.points();
    let fates = crate::par::map(&points, |s| {
        integrate(p, *s, &cfg).map(|o| (o.fate, o.final_state))
    });
    let mut report = BasinReport {
        total: points.len(),
        converged: 0,
        escaped: 0,
        other: 0,
        failures: Vec::new(),
        worst_final_distance: 0.0,
    };
    for (s, r) in points.iter().zip(fates) {
        let (fate, fin) = r?;
        match fate {
            Fate::ConvergedToEquilibrium => {
                report.converged += 1;
                report.worst_final_distance = report.worst_final_distance.max(fin.dist(&eq));
                continue;
            }
            Fate::Escaped => report.escaped += 1,
            _ => report.other += 1,
        }
        report.failures.push((*s, fate));
    }
    Ok(report)
}

/// Starting points tried by [`escape_search`] when none are given.
pub const DEFAULT_ESCAPE_CANDIDATES: [(f64, f64); 4] =
    [(-1.0, -10.0), (-5.0, -50.0), (-10.0, -1.0), (-0.5, -100.0)];

pub fn default_escape_candidates() -> Vec<State> {
    DEFAULT_ESCAPE_CANDIDATES
        .iter()
        .map(|&(x, y)| State { x, y })
        .collect()
}

/// First candidate whose orbit leaves every bounded set.
pub fn escape_search(
    p: &Params,
    candidates: &[State],
    cfg: &IntegratorConfig,
) -> Result<(State, Orbit)> {
    if candidates.is_empty() {
        return Err(Error::InvalidArgument(
            "escape_search needs at least one candidate".into(),
        ));
    }
    for c in candidates {
        let orbit = integrate(p, *c, cfg)?;
        if orbit.fate == Fate::Escaped {
            return Ok((*c, orbit));
        }
    }
    Err(Error::NoWitness {
        tried: candidates.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(a: f64, b: f64) -> Params {
        Params::new(a, b).unwrap()
    }

    #[test]
    fn start_at_equilibrium_is_converged() {
        let o = integrate(
            &p(5.0, 1.0),
            State { x: 1.0, y: 2.0 },
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert_eq!(o.fate, Fate::ConvergedToEquilibrium);
        assert_eq!(o.final_state, State { x: 1.0, y: 2.0 });
    }

    #[test]
    fn converges_from_half_plane() {
        let o = integrate(
            &p(5.0, 1.0),
            State { x: 0.5, y: 1.0 },
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert_eq!(o.fate, Fate::ConvergedToEquilibrium);
        assert!(o.final_state.dist(&State { x: 1.0, y: 2.0 }) < 1e-6);
        assert!(o.samples.windows(2).all(|w| w[1].0 > w[0].0));
    }

    #[test]
    fn escapes_from_third_quadrant() {
        let o = integrate(
            &p(5.0, 1.0),
            State { x: -1.0, y: -10.0 },
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert_eq!(o.fate, Fate::Escaped);
        assert!(o.final_state.norm() >= 1e6 || o.overflow);
    }

    #[test]
    fn unstable_focus_orbit_is_flagged_as_cycle() {
        let cfg = IntegratorConfig {
            max_time: 200.0,
            ..Default::default()
        };
        let o = integrate(&p(10.0, 3.4), State { x: 2.3, y: 5.0 }, &cfg).unwrap();
        assert_eq!(o.fate, Fate::SuspectedCycle);
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = IntegratorConfig {
            rel_tol: 1e-2,
            ..Default::default()
        };
        assert!(integrate(&p(1.0, 1.0), State { x: 0.0, y: 0.0 }, &cfg).is_err());
        let cfg = IntegratorConfig {
            max_time: -1.0,
            ..Default::default()
        };
        assert!(integrate(&p(1.0, 1.0), State { x: 0.0, y: 0.0 }, &cfg).is_err());
    }

    #[test]
    fn csv_header_and_rows() {
        let cfg = IntegratorConfig {
            max_time: 1.0,
            ..Default::default()
        };
        let o = integrate(&p(5.0, 1.0), State { x: 0.5, y: 1.0 }, &cfg).unwrap();
        let csv = o.to_csv();
        assert!(csv.starts_with("t,x,y\n"));
        assert_eq!(csv.lines().count(), o.samples.len() + 1);
    }

    #[test]
    fn grid_points_cover_corners() {
        let g = Grid {
            x_range: (0.1, 50.0),
            y_range: (-50.0, 50.0),
            nx: 10,
            ny: 10,
        };
        let pts = g.points();
        assert_eq!(pts.len(), 100);
        assert_eq!(pts[0], State { x: 0.1, y: -50.0 });
        assert_eq!(pts[99], State { x: 50.0, y: 50.0 });
    }

    #[test]
    fn basin_of_single_point() {
        let g = Grid {
            x_range: (1.0, 1.0),
            y_range: (2.0, 2.0),
            nx: 1,
            ny: 1,
        };
        let r = basin_scan(&p(5.0, 1.0), &g, &IntegratorConfig::default()).unwrap();
        assert_eq!((r.total, r.converged), (1, 1));
    }

    #[test]
    fn basin_grid_must_be_in_half_plane() {
        let g = Grid {
            x_range: (-1.0, 1.0),
            y_range: (0.0, 1.0),
            nx: 2,
            ny: 2,
        };
        assert!(basin_scan(&p(5.0, 1.0), &g, &IntegratorConfig::default()).is_err());
    }

    #[test]
    fn boundary_start_enters_half_plane() {
        let cfg = IntegratorConfig {
            max_time: 50.0,
            ..Default::default()
        };
        let (_, v) = check_invariance(
            &p(20.0, 1.0),
            State { x: 0.0, y: 3.0 },
            InvariantRegion::HalfPlane,
            &cfg,
        )
        .unwrap();
        assert!(v.is_none());
    }

    #[test]
    fn escape_search_needs_candidates() {
        assert!(escape_search(&p(1.0, 1.0), &[], &IntegratorConfig::default()).is_err());
        let err = escape_search(
            &p(5.0, 1.0),
            &[State { x: 1.0, y: 2.0 }],
            &IntegratorConfig::default(),
        );
        assert!(matches!(err, Err(Error::NoWitness { tried: 1 })));
    }
}
