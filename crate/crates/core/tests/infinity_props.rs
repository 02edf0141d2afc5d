use std::f64::consts::{FRAC_PI_2, PI};

use lengyel_core::infinity::*;
use lengyel_core::integrate::{default_escape_candidates, escape_search, IntegratorConfig};
use lengyel_core::{model, Params, State};
use proptest::prelude::*;

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

/// Independent oracle: `v^2 d/dt (chart coords)` with the quotient rule
/// written out per chart.
fn oracle_pushforward(chart: Chart, p: &Params, s: &State) -> [f64; 2] {
    let [fx, fy] = model::vector_field(p, s);
    match chart {
        Chart::U1 | Chart::V1 => {
            let v = 1.0 / s.x;
            let du = (fy - (s.y / s.x) * fx) / s.x;
            let dv = -fx / (s.x * s.x);
            [v * v * du, v * v * dv]
        }
        Chart::U2 | Chart::V2 => {
            let v = 1.0 / s.y;
            let du = (fx - (s.x / s.y) * fy) / s.y;
            let dv = -fy / (s.y * s.y);
            [v * v * du, v * v * dv]
        }
    }
}

fn collinear_at(chart: Chart, a: f64, b: f64, x: f64, y: f64) -> Result<(), TestCaseError> {
    let p = Params::new(a, b).unwrap();
    let s = State { x, y };
    let (u, v) = chart.to_chart(&s).unwrap();
    let field = chart.field(&p, u, v);
    let push = oracle_pushforward(chart, &p, &s);
    let scale = push[0].abs().max(push[1].abs());
    for i in 0..2 {
        prop_assert!(
            (field[i] - push[i]).abs() <= 1e-10 * scale,
            "{chart:?} at ({x},{y}): {:?} vs {:?}",
            field,
            push
        );
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn collinearity_u1(a in 0.01f64..50.0, b in 0.01f64..50.0, x in 0.05f64..50.0, y in -50.0f64..50.0) {
        collinear_at(Chart::U1, a, b, x, y)?;
    }

    #[test]
    fn collinearity_v1(a in 0.01f64..50.0, b in 0.01f64..50.0, x in -50.0f64..-0.05, y in -50.0f64..50.0) {
        collinear_at(Chart::V1, a, b, x, y)?;
    }

    #[test]
    fn collinearity_u2(a in 0.01f64..50.0, b in 0.01f64..50.0, x in -50.0f64..50.0, y in 0.05f64..50.0) {
        collinear_at(Chart::U2, a, b, x, y)?;
    }

    #[test]
    fn collinearity_v2(a in 0.01f64..50.0, b in 0.01f64..50.0, x in -50.0f64..50.0, y in -50.0f64..-0.05) {
        collinear_at(Chart::V2, a, b, x, y)?;
    }
}

proptest! {
    #[test]
    fn chart_round_trip(x in -1e3f64..1e3, y in -1e3f64..1e3) {
        let s = State { x, y };
        for chart in [Chart::U1, Chart::V1, Chart::U2, Chart::V2] {
            if let Some((u, v)) = chart.to_chart(&s) {
                let back = chart.from_chart(u, v);
                prop_assert!(rel_close(back.x, x, 1e-12) || (back.x - x).abs() < 1e-12);
                prop_assert!(rel_close(back.y, y, 1e-12) || (back.y - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn line_at_infinity_invariant(a in 0.01f64..50.0, b in 0.01f64..50.0, u in -100.0f64..100.0) {
        let p = Params::new(a, b).unwrap();
        prop_assert_eq!(chart_u1_field(&p, u, 0.0)[1], 0.0);
        prop_assert_eq!(chart_u2_field(&p, u, 0.0)[1], 0.0);
        prop_assert!(rel_close(chart_u1_field(&p, u, 0.0)[0], b + u, 1e-15));
    }

    #[test]
    fn blowup_pushforward_matches_u2(
        a in 0.01f64..50.0,
        b in 0.01f64..50.0,
        r in 1e-5f64..1e-2,
        theta in 0.0f64..(2.0 * PI),
    ) {
        // Stay off the circle equilibria where both sides vanish to leading order.
        prop_assume!(circle_angles().iter().all(|t| (theta - t).abs() > 1e-3));
        prop_assume!((2.0 * PI - theta) > 1e-3);
        let p = Params::new(a, b).unwrap();
        let push = blowup_pushforward(&p, r, theta);
        let (s, c) = theta.sin_cos();
        let chart = chart_u2_field(&p, r * c, r * r * s);
        let k = (1.0 + s * s) / (r * r);
        let scale = chart[0].abs().max(chart[1].abs()) * k;
        for i in 0..2 {
            prop_assert!((push[i] - k * chart[i]).abs() <= 1e-8 * scale, "{:?} vs {:?}", push, chart);
        }
    }

    #[test]
    fn circle_jacobians_match_finite_differences(a in 0.01f64..50.0, b in 0.01f64..50.0) {
        let p = Params::new(a, b).unwrap();
        let closed = circle_jacobians_closed_form(&p);
        let h = 1e-6;
        for (theta, jc) in circle_angles().iter().zip(closed.iter()) {
            let dr = {
                let fp = blowup_field(&p, h, *theta);
                let fm = blowup_field(&p, -h, *theta);
                [(fp[0] - fm[0]) / (2.0 * h), (fp[1] - fm[1]) / (2.0 * h)]
            };
            let dt = {
                let fp = blowup_field(&p, 0.0, theta + h);
                let fm = blowup_field(&p, 0.0, theta - h);
                [(fp[0] - fm[0]) / (2.0 * h), (fp[1] - fm[1]) / (2.0 * h)]
            };
            let fd = [[dr[0], dt[0]], [dr[1], dt[1]]];
            for r in 0..2 {
                for c in 0..2 {
                    prop_assert!((fd[r][c] - jc[r][c]).abs() < 1e-6 * (1.0 + jc[r][c].abs()),
                        "theta={} [{}][{}] fd={} closed={}", theta, r, c, fd[r][c], jc[r][c]);
                }
            }
        }
    }

    #[test]
    fn semi_hyperbolic_classification(a in 0.1f64..30.0, b in 0.1f64..30.0) {
        let p = Params::new(a, b).unwrap();
        let eqs = circle_equilibria(&p).unwrap();
        prop_assert_eq!(eqs.len(), 6);
        let ab4 = a * b / 4.0;
        let d = eqs[1].semi_hyp_data.unwrap();
        prop_assert_eq!(d.m, 5);
        prop_assert!((d.lambda + 8.0).abs() < 1e-10 && rel_close(d.a_m, ab4, 1e-8));
        let d = eqs[4].semi_hyp_data.unwrap();
        prop_assert_eq!(d.m, 5);
        prop_assert!((d.lambda - 8.0).abs() < 1e-10 && rel_close(d.a_m, -ab4, 1e-8));
        let d3 = eqs[3].semi_hyp_data.unwrap();
        let d5 = eqs[5].semi_hyp_data.unwrap();
        prop_assert!(d3.m == 2 && d3.a_m > 0.0);
        prop_assert!(d5.m == 2 && d5.a_m < 0.0);
        prop_assert_eq!(eqs[0].classification, CircleClass::HyperbolicSaddle);
        prop_assert_eq!(eqs[2].classification, CircleClass::HyperbolicSaddle);
        prop_assert_eq!(eqs[1].classification, CircleClass::TopologicalSaddle);
        prop_assert_eq!(eqs[4].classification, CircleClass::TopologicalSaddle);
        prop_assert_eq!(eqs[3].classification, CircleClass::SaddleNode);
        prop_assert_eq!(eqs[5].classification, CircleClass::SaddleNode);
        for e in &eqs {
            prop_assert!(circle_polynomial(e.theta).abs() < 1e-12);
        }
    }

    #[test]
    fn disk_projection_inside_unit_disk(x in -1e6f64..1e6, y in -1e6f64..1e6) {
        let (px, py) = disk_projection(&State { x, y });
        prop_assert!(px.hypot(py) < 1.0);
    }
}

#[test]
fn pi_half_example_matches_ab_over_four() {
    let p = Params::new(2.0, 3.0).unwrap();
    let d =
        semi_hyperbolic_reduce(&Blowup::new(&p), [0.0, FRAC_PI_2], DEFAULT_SERIES_ORDER).unwrap();
    assert_eq!(d.m, 5);
    assert!((d.a_m - 1.5).abs() < 1e-10);
}

#[test]
fn escaping_orbit_heads_to_i4_direction() {
    let p = Params::new(5.0, 1.0).unwrap();
    let (_, orbit) = escape_search(
        &p,
        &default_escape_candidates(),
        &IntegratorConfig::default(),
    )
    .unwrap();
    let last = orbit.samples.last().unwrap().1;
    let (dx, dy) = disk_projection(&last);
    assert!(
        dx.hypot(dy) > 0.99,
        "projected end point {dx},{dy} not near the boundary"
    );
    let i4 = infinite_equilibria(&p)[3].direction;
    assert!(
        (dx - i4.0).abs() < 0.05 && (dy - i4.1).abs() < 0.05,
        "end direction ({dx},{dy})"
    );
}
