use lengyel_web::{cycles_json, orbit_json, region_map, MAX_ORBIT_POINTS, REGION_CODES};
use serde_json::Value;

#[test]
fn orbit_converges_to_equilibrium() {
    let v: Value = serde_json::from_str(&orbit_json(5.0, 1.0, 0.5, 1.0, 1e4).unwrap()).unwrap();
    assert_eq!(v["fate"], "ConvergedToEquilibrium");
    let pts = v["points"].as_array().unwrap();
    assert!(pts.len().is_multiple_of(2) && pts.len() <= 2 * MAX_ORBIT_POINTS);
    let (x, y) = (
        pts[pts.len() - 2].as_f64().unwrap(),
        pts[pts.len() - 1].as_f64().unwrap(),
    );
    assert!((x - 1.0).abs() < 1e-6 && (y - 2.0).abs() < 1e-6);
}

#[test]
fn orbit_rejects_bad_parameters() {
    assert!(orbit_json(-1.0, 1.0, 0.5, 1.0, 10.0).is_err());
    assert!(orbit_json(5.0, 1.0, f64::NAN, 1.0, 10.0).is_err());
}

#[test]
fn region_map_codes() {
    let m = region_map(0.5, 30.0, 0.2, 20.0, 30, 20);
    assert_eq!(m.len(), 600);
    assert!(m.iter().all(|&c| (c as usize) < REGION_CODES.len()));
    // Bottom-left cell has a < 3 sqrt(3): set A.
    assert_eq!(REGION_CODES[m[19 * 30] as usize], "InA");
    // Bottom-right cell (a ~ 29.5, b ~ 0.7) lies below the Hopf curve.
    assert_eq!(REGION_CODES[m[19 * 30 + 29] as usize], "UnstableOutsideD");
    assert!(m.contains(&1));
}

#[test]
fn cycles_in_two_cycle_region() {
    let v: Value = serde_json::from_str(&cycles_json(24.712, 13.85).unwrap()).unwrap();
    assert_eq!(v["region"], "InD");
    let c = v["cycles"].as_array().unwrap();
    assert_eq!(c.len(), 2);
    assert_eq!(c[0]["stability"], "Unstable");
    assert_eq!(c[1]["stability"], "Stable");
}
