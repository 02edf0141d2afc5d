use std::fmt;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use lengyel_core::cycles::{self, CycleInfo, CycleSearch, Section, Stability};
use lengyel_core::hopf;
use lengyel_core::infinity;
use lengyel_core::integrate::{self, Fate, IntegratorConfig};
use lengyel_core::model::{self, Params, RegionKind, RegionLabel, State};
use lengyel_core::verify::{self, Suite};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::svg::{Frame, Svg};
use crate::{Cli, Command, Global, SectionArg, SuiteArg};

pub enum Outcome {
    Success,
    VerificationFailed,
}

/// A command-line value that is well-formed but unusable.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

pub fn exit_code_for(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<Usage>().is_some() {
        return 2;
    }
    match e.downcast_ref::<lengyel_core::Error>() {
        Some(
            lengyel_core::Error::InvalidParams { .. }
            | lengyel_core::Error::InvalidArgument(_)
            | lengyel_core::Error::NonFiniteState { .. }
            | lengyel_core::Error::NotOnHopfCurve { .. },
        ) => 2,
        _ => 1,
    }
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let g = &cli.global;
    if g.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(g.workers)
            .build_global()
            .context("configuring worker threads")?;
    }
    let cfg = IntegratorConfig {
        rel_tol: g.rel_tol,
        abs_tol: g.abs_tol,
        r_escape: g.r_escape,
        tol_conv: g.tol_conv,
        ..IntegratorConfig::default()
    };
    cfg.validate()?;
    if !(g.tol_curve >= 0.0) {
        return Err(usage("--tol-curve must be non-negative"));
    }
    fs::create_dir_all(&g.out).with_context(|| format!("creating {}", g.out.display()))?;

    match &cli.command {
        Command::Simulate {
            a,
            b,
            x0,
            y0,
            t_max,
        } => simulate(g, &cfg, *a, *b, *x0, *y0, *t_max),
        Command::Portrait {
            a,
            b,
            window,
            n_orbits,
            t_orbit,
        } => portrait(g, &cfg, *a, *b, *window, *n_orbits, *t_orbit),
        Command::Regions {
            a_range,
            b_range,
            resolution,
            with_cycles,
            probes,
            tol_b,
        } => regions(
            g,
            *a_range,
            *b_range,
            *resolution,
            *with_cycles,
            probes,
            *tol_b,
        ),
        Command::Infinity { a, b } => infinity_cmd(g, &cfg, *a, *b),
        Command::Hopf { a_range, n } => hopf_cmd(g, *a_range, *n),
        Command::Cycles {
            a,
            b,
            x_max,
            n_seed,
            section,
            semistable,
            tol_b,
        } => cycles_cmd(g, *a, *b, *x_max, *n_seed, *section, *semistable, *tol_b),
        Command::Dulac {
            a,
            b,
            x_max,
            n_grid,
        } => dulac_cmd(g, *a, *b, *x_max, *n_grid),
        Command::Verify { suite } => verify_cmd(g, *suite),
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

fn write_json(dir: &Path, name: &str, v: &Value) -> Result<()> {
    write(dir, name, &(serde_json::to_string_pretty(v)? + "\n"))
}

fn params(a: f64, b: f64) -> Result<Params> {
    Ok(Params::new(a, b)?)
}

fn simulate(
    g: &Global,
    cfg: &IntegratorConfig,
    a: f64,
    b: f64,
    x0: f64,
    y0: f64,
    t_max: f64,
) -> Result<Outcome> {
    let p = params(a, b)?;
    let s0 = State::new(x0, y0)?;
    let cfg = IntegratorConfig {
        max_time: t_max,
        ..*cfg
    };
    cfg.validate()?;
    let orbit = integrate::integrate(&p, s0, &cfg)?;
    let eq = model::equilibrium(&p);
    write(&g.out, "orbit.csv", &orbit.to_csv())?;
    write_json(
        &g.out,
        "fate.json",
        &json!({
            "schema": verify::SCHEMA_VERSION,
            "a": a, "b": b,
            "initial": [x0, y0],
            "fate": orbit.fate,
            "t_end": orbit.t_end,
            "final_state": [orbit.final_state.x, orbit.final_state.y],
            "distance_to_equilibrium": orbit.final_state.dist(&eq),
            "escape_radius_hit": orbit.escape_radius_hit,
            "overflow": orbit.overflow,
        }),
    )?;
    println!(
        "fate {:?} at t = {:.6} final ({:.9}, {:.9})",
        orbit.fate, orbit.t_end, orbit.final_state.x, orbit.final_state.y
    );
    Ok(Outcome::Success)
}

fn cycle_json(a: f64, b: f64, p: &Params, cs: &[CycleInfo]) -> Value {
    let eq = model::equilibrium(p);
    json!({
        "schema": verify::SCHEMA_VERSION,
        "a": a, "b": b,
        "equilibrium": [eq.x, eq.y],
        "equilibrium_kind": model::classify_equilibrium(p).kind,
        "cycles": cycles::cycles_to_json(cs),
    })
}

/// Splits an orbit into pixel polylines, cutting where it leaves the frame.
fn clipped_paths(f: &Frame, pts: impl Iterator<Item = (f64, f64)>) -> Vec<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    for (x, y) in pts {
        if f.contains(x, y) {
            cur.push(f.px(x, y));
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Keeps every k-th point so long orbits stay small in the SVG.
fn thin<T: Copy>(v: &[T], max: usize) -> Vec<T> {
    let k = v.len().div_ceil(max.max(1)).max(1);
    let mut out: Vec<T> = v.iter().step_by(k).copied().collect();
    if let Some(last) = v.last() {
        out.push(*last);
    }
    out
}

fn portrait(
    g: &Global,
    cfg: &IntegratorConfig,
    a: f64,
    b: f64,
    window: Option<[f64; 4]>,
    n_orbits: usize,
    t_orbit: f64,
) -> Result<Outcome> {
    let p = params(a, b)?;
    let eq = model::equilibrium(&p);
    let cs = cycles::detect_cycles(&p, &CycleSearch::default())?;
    let win = match window {
        Some(w) => {
            if !(w[1] > w[0] && w[3] > w[2]) {
                return Err(usage("--window needs xmin < xmax and ymin < ymax"));
            }
            w
        }
        None => {
            let (mut x0, mut x1, mut y0, mut y1) = (eq.x, eq.x, eq.y, eq.y);
            for (_, s) in cs.iter().flat_map(|c| c.orbit.iter()) {
                x0 = x0.min(s.x);
                x1 = x1.max(s.x);
                y0 = y0.min(s.y);
                y1 = y1.max(s.y);
            }
            let hx = (0.25 * (x1 - x0)).max(eq.x.max(1.0));
            let hy = (0.25 * (y1 - y0)).max(0.5 * eq.y.max(1.0));
            [x0 - hx, x1 + hx, y0 - hy, y1 + hy]
        }
    };
    let frame = Frame::new((win[0], win[1]), (win[2], win[3]), 720.0, 600.0);
    let side = (n_orbits as f64).sqrt().ceil().max(1.0) as usize;
    let starts: Vec<State> = (0..n_orbits)
        .map(|k| {
            let (i, j) = (k % side, k / side);
            State {
                x: win[0] + (win[1] - win[0]) * (i as f64 + 0.5) / side as f64,
                y: win[2] + (win[3] - win[2]) * (j as f64 + 0.5) / side as f64,
            }
        })
        .collect();
    let orbit_cfg = IntegratorConfig {
        max_time: t_orbit,
        record: true,
        ..*cfg
    };
    let orbits: Vec<_> = starts
        .par_iter()
        .map(|s| integrate::integrate(&p, *s, &orbit_cfg))
        .collect();

    let mut svg = Svg::new(frame.width, frame.height);
    svg.axes(&frame, "x", "y");
    for o in orbits {
        let o = o?;
        let pts = thin(&o.samples, 4000);
        for path in clipped_paths(&frame, pts.iter().map(|(_, s)| (s.x, s.y))) {
            svg.polyline(&path, "#9ab", 0.8, false);
        }
    }
    for c in &cs {
        let (stroke, dashed) = match c.stability {
            Stability::Stable => ("#1565c0", false),
            Stability::Unstable => ("#c62828", true),
            Stability::SemistableSuspect => ("#6a1b9a", true),
        };
        let pts = thin(&c.orbit, 4000);
        for path in clipped_paths(&frame, pts.iter().map(|(_, s)| (s.x, s.y))) {
            svg.polyline(&path, stroke, 2.2, dashed);
        }
    }
    let stable = model::classify_equilibrium(&p).kind.is_stable();
    svg.circle(
        frame.px(eq.x, eq.y),
        4.0,
        if stable { "black" } else { "white" },
        "black",
    );
    svg.text(
        (50.0, 24.0),
        14.0,
        &format!("a = {a}, b = {b}: {} cycle(s)", cs.len()),
    );
    write(&g.out, "portrait.svg", &svg.finish())?;
    write_json(&g.out, "cycles.json", &cycle_json(a, b, &p, &cs))?;
    println!(
        "portrait with {} cycle(s) written to {}",
        cs.len(),
        g.out.display()
    );
    Ok(Outcome::Success)
}

fn kind_color(k: RegionKind) -> &'static str {
    match k {
        RegionKind::InA => "#c8e6c9",
        RegionKind::InBNotA => "#fff9c4",
        RegionKind::InD => "#ffcc80",
        RegionKind::OnSapprox => "#ce93d8",
        RegionKind::UnstableOutsideD => "#ffcdd2",
        RegionKind::OnHminus | RegionKind::OnHplus | RegionKind::AtBautin => "#90a4ae",
    }
}

fn label_for(p: &Params, with_cycles: bool, tol_curve: f64) -> Result<RegionLabel> {
    Ok(if with_cycles {
        cycles::region_with_cycles(p, tol_curve)?
    } else {
        model::region_membership(p, tol_curve)
    })
}

fn regions(
    g: &Global,
    a_range: [f64; 2],
    b_range: [f64; 2],
    resolution: [f64; 2],
    with_cycles: bool,
    probes: &[[f64; 2]],
    tol_b: f64,
) -> Result<Outcome> {
    let positive =
        a_range[0] > 0.0 && b_range[0] > 0.0 && a_range[1] > a_range[0] && b_range[1] > b_range[0];
    if !positive {
        return Err(usage("ranges must be positive with lo < hi"));
    }
    let (nx, ny) = (resolution[0] as usize, resolution[1] as usize);
    if nx == 0 || ny == 0 || resolution[0].fract() != 0.0 || resolution[1].fract() != 0.0 {
        return Err(usage("--resolution needs two positive integers"));
    }
    let da = (a_range[1] - a_range[0]) / nx as f64;
    let db = (b_range[1] - b_range[0]) / ny as f64;
    let cells: Vec<(usize, usize)> = (0..ny).flat_map(|j| (0..nx).map(move |i| (i, j))).collect();
    let labels: Vec<Result<(f64, f64, RegionLabel)>> = cells
        .par_iter()
        .map(|&(i, j)| {
            let a = a_range[0] + (i as f64 + 0.5) * da;
            let b = b_range[0] + (j as f64 + 0.5) * db;
            Ok((
                a,
                b,
                label_for(&Params::new(a, b)?, with_cycles, g.tol_curve)?,
            ))
        })
        .collect();
    let labels = labels.into_iter().collect::<Result<Vec<_>>>()?;

    let probe_labels = probes
        .iter()
        .map(|&[a, b]| Ok(json!({ "a": a, "b": b, "label": label_for(&params(a, b)?, with_cycles, g.tol_curve)? })))
        .collect::<Result<Vec<Value>>>()?;

    let a_b = hopf::bautin_a();
    let mut s_curve = Vec::new();
    if with_cycles && a_range[1] > a_b + 0.25 {
        let lo = a_range[0].max(a_b + 0.25);
        let n = 6;
        let a_values: Vec<f64> = (0..n)
            .map(|k| lo + (a_range[1] - lo) * k as f64 / (n - 1) as f64)
            .collect();
        let brackets: Vec<_> = a_values
            .par_iter()
            .map(|a| cycles::semistable_b(*a, tol_b))
            .collect();
        for (a, r) in a_values.iter().zip(brackets) {
            s_curve.push(match r {
                Ok(s) => json!({ "a": a, "b_s": s.b_s, "b_two": s.b_two, "b_none": s.b_none, "b_h": s.b_h }),
                Err(e) => json!({ "a": a, "error": e.to_string() }),
            });
        }
    }

    let sqrt5 = 5f64.sqrt();
    let anchors = json!({
        "a1": model::basin_threshold(),
        "a2": model::hopf_threshold(),
        "intersection": [5.0 * sqrt5, 2.0 * sqrt5],
        "bautin": [a_b, model::hopf_b(a_b)],
    });
    let pixels: Vec<Value> = labels
        .iter()
        .map(|(a, b, l)| json!({ "a": a, "b": b, "kind": l.kind }))
        .collect();
    write_json(
        &g.out,
        "regions.json",
        &json!({
            "schema": verify::SCHEMA_VERSION,
            "a_range": a_range, "b_range": b_range, "nx": nx, "ny": ny,
            "with_cycles": with_cycles,
            "anchors": anchors,
            "probes": probe_labels,
            "semistable": s_curve,
            "pixels": pixels,
        }),
    )?;

    let frame = Frame::new(
        (a_range[0], a_range[1]),
        (b_range[0], b_range[1]),
        760.0,
        560.0,
    );
    let mut svg = Svg::new(frame.width, frame.height);
    for (a, b, l) in &labels {
        let (x0, y0) = frame.px(a - 0.5 * da, b + 0.5 * db);
        let (x1, y1) = frame.px(a + 0.5 * da, b - 0.5 * db);
        svg.rect(x0, y0, x1 - x0, y1 - y0, kind_color(l.kind));
    }
    let curve = |f: &dyn Fn(f64) -> f64, from: f64| -> Vec<(f64, f64)> {
        let from = from.max(a_range[0]);
        (0..=400)
            .map(|k| from + (a_range[1] - from) * k as f64 / 400.0)
            .map(|a| (a, f(a)))
            .filter(|(a, b)| frame.contains(*a, *b))
            .map(|(a, b)| frame.px(a, b))
            .collect()
    };
    svg.polyline(
        &curve(&model::hopf_b, model::hopf_threshold()),
        "#b71c1c",
        1.8,
        false,
    );
    svg.polyline(
        &curve(&model::basin_b, model::basin_threshold()),
        "#1b5e20",
        1.8,
        false,
    );
    let s_pts: Vec<(f64, f64)> = s_curve
        .iter()
        .filter_map(|v| Some((v["a"].as_f64()?, v["b_s"].as_f64()?)))
        .filter(|(a, b)| frame.contains(*a, *b))
        .map(|(a, b)| frame.px(a, b))
        .collect();
    svg.polyline(&s_pts, "#4a148c", 1.8, true);
    for (a, b, name) in [
        (5.0 * sqrt5, 2.0 * sqrt5, "I"),
        (a_b, model::hopf_b(a_b), "B"),
    ] {
        if frame.contains(a, b) {
            let c = frame.px(a, b);
            svg.circle(c, 3.5, "black", "black");
            svg.text((c.0 + 5.0, c.1 - 5.0), 12.0, name);
        }
    }
    for (a, name) in [
        (model::basin_threshold(), "a1"),
        (model::hopf_threshold(), "a2"),
    ] {
        if a > a_range[0] && a < a_range[1] {
            let (x, y) = frame.px(a, b_range[0]);
            svg.line((x, y), (x, y + 6.0), "black", 1.0);
            svg.text((x - 6.0, y + 18.0), 11.0, name);
        }
    }
    svg.axes(&frame, "a", "b");
    write(&g.out, "regions.svg", &svg.finish())?;
    println!(
        "{} pixels labelled, {} probe(s)",
        labels.len(),
        probes.len()
    );
    Ok(Outcome::Success)
}

fn infinity_cmd(g: &Global, cfg: &IntegratorConfig, a: f64, b: f64) -> Result<Outcome> {
    let p = params(a, b)?;
    let inf = infinity::infinite_equilibria(&p);
    let circle = infinity::circle_equilibria(&p)?;
    write_json(
        &g.out,
        "infinity.json",
        &json!({
            "schema": verify::SCHEMA_VERSION,
            "a": a, "b": b,
            "theta0": infinity::theta0(),
            "infinite_equilibria": inf,
            "circle_equilibria": circle,
        }),
    )?;

    let radius = 260.0;
    let centre = (300.0, 300.0);
    let to_px = |(u, v): (f64, f64)| (centre.0 + radius * u, centre.1 - radius * v);
    let mut svg = Svg::new(600.0, 600.0);
    svg.circle(centre, radius, "none", "#333");
    let eq = model::equilibrium(&p);
    let mut starts: Vec<State> = Vec::new();
    for i in 0..5 {
        for j in 0..5 {
            starts.push(State {
                x: -8.0 + 4.0 * i as f64,
                y: -8.0 + 4.0 * j as f64,
            });
        }
    }
    starts.extend(integrate::default_escape_candidates());
    let orbit_cfg = IntegratorConfig {
        max_time: 20.0,
        record: true,
        ..*cfg
    };
    let orbits: Vec<_> = starts
        .par_iter()
        .map(|s| integrate::integrate(&p, *s, &orbit_cfg))
        .collect();
    for o in orbits {
        let o = o?;
        let color = if o.fate == Fate::Escaped {
            "#c62828"
        } else {
            "#90a4ae"
        };
        let pts: Vec<(f64, f64)> = thin(&o.samples, 3000)
            .iter()
            .map(|(_, s)| to_px(infinity::disk_projection(s)))
            .collect();
        svg.polyline(&pts, color, 0.9, false);
    }
    svg.circle(to_px(infinity::disk_projection(&eq)), 3.5, "black", "black");
    for e in &inf {
        let c = to_px(e.direction);
        let fill = match e.kind {
            infinity::InfiniteKind::UnstableNode => "white",
            infinity::InfiniteKind::DegenerateBlowupRequired => "#ff8f00",
        };
        svg.circle(c, 5.0, fill, "black");
        let off = (e.direction.0 * 16.0 - 6.0, -e.direction.1 * 16.0 + 4.0);
        svg.text((c.0 + off.0, c.1 + off.1), 13.0, &format!("{:?}", e.label));
    }
    svg.text(
        (12.0, 20.0),
        14.0,
        &format!("Poincare disk, a = {a}, b = {b}"),
    );
    write(&g.out, "disk.svg", &svg.finish())?;
    for c in &circle {
        println!(
            "theta = {:.10} {:?} {:?}",
            c.theta, c.classification, c.semi_hyp_data
        );
    }
    Ok(Outcome::Success)
}

fn hopf_cmd(g: &Global, a_range: [f64; 2], n: usize) -> Result<Outcome> {
    if !(a_range[0] > model::hopf_threshold() && a_range[1] > a_range[0]) || n < 2 {
        return Err(usage(format!(
            "--a-range must satisfy {} < lo < hi and --n >= 2",
            model::hopf_threshold()
        )));
    }
    let rows = hopf::hopf_scan(a_range[0], a_range[1], n)?;
    write(&g.out, "hopf_scan.csv", &hopf::hopf_scan_csv(&rows))?;
    let changes = hopf::sign_changes(&rows);
    let roots: Vec<f64> = changes
        .iter()
        .filter_map(|(l, h)| hopf::l1_root(*l, *h, 1e-12).ok())
        .collect();
    let a_b = hopf::bautin_a();
    let l2 = hopf::lyapunov_l2(a_b)?;
    let fit = hopf::displacement_fit(a_b, &hopf::BAUTIN_FIT_OFFSETS)?;
    write_json(
        &g.out,
        "hopf.json",
        &json!({
            "schema": verify::SCHEMA_VERSION,
            "a_range": a_range, "n": n,
            "sign_changes": changes,
            "l1_roots": roots,
            "bautin_closed_form": a_b,
            "l2_at_bautin": l2,
            "displacement_fit": fit,
        }),
    )?;
    println!(
        "{} sign change(s); L1 root(s) {:?}; closed form {a_b:.9}; L2(a_B) = {l2:.6e}",
        changes.len(),
        roots
    );
    Ok(Outcome::Success)
}

#[allow(clippy::too_many_arguments)]
fn cycles_cmd(
    g: &Global,
    a: f64,
    b: f64,
    x_max: Option<f64>,
    n_seed: usize,
    section: SectionArg,
    semistable: bool,
    tol_b: f64,
) -> Result<Outcome> {
    let p = params(a, b)?;
    if n_seed < 2 {
        return Err(usage("--n-seed must be at least 2"));
    }
    let s = CycleSearch {
        n_seed,
        section: match section {
            SectionArg::Horizontal => Section::Horizontal,
            SectionArg::Vertical => Section::Vertical,
        },
        ..CycleSearch::default()
    };
    let eq = model::equilibrium(&p);
    let cs = match x_max {
        Some(x) if x > eq.x => cycles::find_cycles_in(&p, &s, x - eq.x)?,
        Some(_) => return Err(usage(format!("--x-max must exceed x_P = {}", eq.x))),
        None => cycles::detect_cycles(&p, &s)?,
    };
    let mut out = cycle_json(a, b, &p, &cs);
    out["floquet_divergence"] = json!(cs.iter().map(|c| c.floquet_divergence).collect::<Vec<_>>());
    if semistable {
        out["semistable"] = match cycles::semistable_b(a, tol_b) {
            Ok(s) => serde_json::to_value(s)?,
            Err(e) => json!({ "error": e.to_string() }),
        };
    }
    write_json(&g.out, "cycles.json", &out)?;
    for (k, c) in cs.iter().enumerate() {
        write(&g.out, &format!("cycle_{k}.csv"), &c.orbit_csv())?;
        println!(
            "cycle {k}: section_x = {:.10}, period = {:.6}, multiplier = {:.6} ({:?})",
            c.section_x, c.period, c.floquet, c.stability
        );
    }
    if cs.is_empty() {
        println!("no cycles found");
    }
    Ok(Outcome::Success)
}

fn dulac_cmd(g: &Global, a: f64, b: f64, x_max: f64, n_grid: usize) -> Result<Outcome> {
    let p = params(a, b)?;
    let c = model::dulac_certificate(&p, x_max, n_grid)?;
    write_json(
        &g.out,
        "dulac.json",
        &json!({
            "schema": verify::SCHEMA_VERSION,
            "a": a, "b": b,
            "in_set_a": model::in_set_a(&p),
            "certificate": c,
        }),
    )?;
    println!(
        "Dulac divergence negative on (0, {}]: {} (max {:.6e} at x = {:.6})",
        c.tail_start, c.holds, c.worst_value, c.worst_x
    );
    Ok(Outcome::Success)
}

fn verify_cmd(g: &Global, suite: SuiteArg) -> Result<Outcome> {
    let suite = match suite {
        SuiteArg::All => Suite::All,
        SuiteArg::Theorem1 => Suite::Theorem1,
        SuiteArg::Theorem2 => Suite::Theorem2,
        SuiteArg::Hopf => Suite::Hopf,
        SuiteArg::Cycles => Suite::Cycles,
        SuiteArg::Dulac => Suite::Dulac,
        SuiteArg::Infinity => Suite::Infinity,
    };
    let summary = verify::run(suite, g.seed);
    let text = summary.to_json() + "\n";
    write(&g.out, "verify.json", &text)?;
    print!("{text}");
    for c in summary.checks.iter().filter(|c| !c.passed) {
        eprintln!("FAILED {}::{}", c.suite, c.name);
    }
    Ok(if summary.passed {
        Outcome::Success
    } else {
        Outcome::VerificationFailed
    })
}
