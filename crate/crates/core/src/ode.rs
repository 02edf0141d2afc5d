//! Dormand-Prince 5(4) with PI step-size control and continuous extension.
//!
//! Fixed-size state vectors `[f64; D]`; the right-hand side is autonomous.
//! Every accepted step is handed to an observer as a [`Step`], which carries
//! the dense-output polynomial for event location.

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h_max: f64::INFINITY,
            max_steps: 10_000_000,
        }
    }
}

/// One accepted step with its continuous extension.
#[derive(Clone, Copy, Debug)]
pub struct Step<const D: usize> {
    pub t0: f64,
    pub h: f64,
    pub y0: [f64; D],
    pub y1: [f64; D],
    pub f0: [f64; D],
    pub f1: [f64; D],
    rcont: [[f64; D]; 5],
}

impl<const D: usize> Step<D> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    /// Dense output at `t` within `[t0, t0 + h]` (extrapolates outside).
    pub fn eval(&self, t: f64) -> [f64; D] {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let r = &self.rcont;
        std::array::from_fn(|i| {
            r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])))
        })
    }

    /// Finds `t` in the step where `g(eval(t))` vanishes, given a sign change
    /// of `g` between the endpoints; stops once the bracket is below `tol`
    /// relative in time.
    pub fn locate<G: Fn(&[f64; D]) -> f64>(&self, g: G, tol: f64) -> Option<(f64, [f64; D])> {
        let (mut ta, mut tb) = (self.t0, self.t1());
        let (mut ga, mut gb) = (g(&self.y0), g(&self.y1));
        if ga == 0.0 {
            return Some((ta, self.y0));
        }
        if gb == 0.0 {
            return Some((tb, self.y1));
        }
        if ga.signum() == gb.signum() {
            return None;
        }
        let scale = self.t1().abs().max(self.h.abs()).max(1.0);
        // Illinois variant of regula falsi.
        let mut side = 0i8;
        for _ in 0..200 {
            let tc = (ta * gb - tb * ga) / (gb - ga);
            let tc = if tc.is_finite() && tc > ta.min(tb) && tc < ta.max(tb) {
                tc
            } else {
                0.5 * (ta + tb)
            };
            let yc = self.eval(tc);
            let gc = g(&yc);
            if gc == 0.0 || (tb - ta).abs() < tol * scale {
                return Some((tc, yc));
            }
            if gc.signum() == gb.signum() {
                tb = tc;
                gb = gc;
                if side == -1 {
                    ga *= 0.5;
                }
                side = -1;
            } else {
                ta = tc;
                ga = gc;
                if side == 1 {
                    gb *= 0.5;
                }
                side = 1;
            }
        }
        let tc = 0.5 * (ta + tb);
        Some((tc, self.eval(tc)))
    }
}

/// Observer verdict after each accepted step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    /// Reached `t_end`.
    Finished,
    /// The observer asked to stop.
    Stopped,
    MaxSteps,
    /// The right-hand side or the state became non-finite.
    NonFinite,
    /// Step size underflowed relative to `t`.
    StepTooSmall,
}

#[derive(Clone, Copy, Debug)]
pub struct SolveStats {
    pub t: f64,
    pub accepted: usize,
    pub rejected: usize,
    pub termination: Termination,
}

fn add_scaled<const D: usize>(y: &[f64; D], terms: &[(f64, &[f64; D])]) -> [f64; D] {
    std::array::from_fn(|i| {
        let mut s = 0.0;
        for (c, k) in terms {
            s += c * k[i];
        }
        y[i] + s
    })
}

fn finite<const D: usize>(v: &[f64; D]) -> bool {
    v.iter().all(|x| x.is_finite())
}

fn err_norm<const D: usize>(y0: &[f64; D], y1: &[f64; D], e: &[f64; D], o: &SolverOptions) -> f64 {
    let mut acc = 0.0;
    for i in 0..D {
        let sk = o.atol + o.rtol * y0[i].abs().max(y1[i].abs());
        let r = e[i] / sk;
        acc += r * r;
    }
    (acc / D as f64).sqrt()
}

fn initial_step<const D: usize, F: Fn(&[f64; D]) -> [f64; D]>(
    f: &F,
    y0: &[f64; D],
    f0: &[f64; D],
    dir: f64,
    o: &SolverOptions,
) -> f64 {
    let mut dnf = 0.0;
    let mut dny = 0.0;
    for i in 0..D {
        let sk = o.atol + o.rtol * y0[i].abs();
        dnf += (f0[i] / sk).powi(2);
        dny += (y0[i] / sk).powi(2);
    }
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
        1e-6
    } else {
        0.01 * (dny / dnf).sqrt()
    };
    h = h.min(o.h_max);
    let y1 = add_scaled(y0, &[(dir * h, f0)]);
    let f1 = f(&y1);
    if !finite(&f1) {
        return h * 1e-3;
    }
    let mut der2 = 0.0;
    for i in 0..D {
        let sk = o.atol + o.rtol * y0[i].abs();
        der2 += ((f1[i] - f0[i]) / sk).powi(2);
    }
    let der2 = der2.sqrt() / h;
    let der12 = der2.max(dnf.sqrt());
    let h1 = if der12 <= 1e-15 {
        (h * 1e-3).max(1e-6)
    } else {
        (0.01 / der12).powf(0.2)
    };
    (100.0 * h).min(h1).min(o.h_max)
}

/// Integrates `y' = f(y)` from `(t0, y0)` towards `t_end` (either direction).
/// `observe` sees every accepted step, in order.
pub fn solve<const D: usize, F, O>(
    f: F,
    t0: f64,
    y0: [f64; D],
    t_end: f64,
    opts: &SolverOptions,
    mut observe: O,
) -> SolveStats
where
    F: Fn(&[f64; D]) -> [f64; D],
    O: FnMut(&Step<D>) -> Control,
{
    const SAFE: f64 = 0.9;
    const FAC_MIN: f64 = 0.2;
    const FAC_MAX: f64 = 10.0;
    const BETA: f64 = 0.04;
    let expo1 = 0.2 - BETA * 0.75;

    let mut stats = SolveStats {
        t: t0,
        accepted: 0,
        rejected: 0,
        termination: Termination::Finished,
    };
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(&y);
    if !finite(&y) || !finite(&k1) {
        stats.termination = Termination::NonFinite;
        return stats;
    }
    if t == t_end {
        return stats;
    }
    let mut h = initial_step(&f, &y, &k1, dir, opts);
    let mut err_old: f64 = 1e-4;
    let mut last_rejected = false;
    let mut steps = 0usize;
    let mut overflowed = false;

    loop {
        if steps >= opts.max_steps {
            stats.termination = Termination::MaxSteps;
            break;
        }
        let remaining = (t_end - t) * dir;
        if remaining <= 0.0 {
            break;
        }
        let mut last = false;
        if h >= remaining {
            h = remaining;
            last = true;
        }
        if h <= 1e-14 * t.abs().max(1.0) {
            stats.termination = if overflowed {
                Termination::NonFinite
            } else {
                Termination::StepTooSmall
            };
            break;
        }
        steps += 1;
        let hs = dir * h;
        let y2 = add_scaled(&y, &[(hs * A21, &k1)]);
        let k2 = f(&y2);
        let y3 = add_scaled(&y, &[(hs * A31, &k1), (hs * A32, &k2)]);
        let k3 = f(&y3);
        let y4 = add_scaled(&y, &[(hs * A41, &k1), (hs * A42, &k2), (hs * A43, &k3)]);
        let k4 = f(&y4);
        let y5 = add_scaled(
            &y,
            &[
                (hs * A51, &k1),
                (hs * A52, &k2),
                (hs * A53, &k3),
                (hs * A54, &k4),
            ],
        );
        let k5 = f(&y5);
        let y6 = add_scaled(
            &y,
            &[
                (hs * A61, &k1),
                (hs * A62, &k2),
                (hs * A63, &k3),
                (hs * A64, &k4),
                (hs * A65, &k5),
            ],
        );
        let k6 = f(&y6);
        let y_new = add_scaled(
            &y,
            &[
                (hs * A71, &k1),
                (hs * A73, &k3),
                (hs * A74, &k4),
                (hs * A75, &k5),
                (hs * A76, &k6),
            ],
        );
        let k7 = f(&y_new);

        if !finite(&y_new) || !finite(&k7) {
            // Overflow inside the step. Shrink and retry; a genuine blow-up
            // drives the step below the floor and ends as NonFinite.
            h *= 0.1;
            last_rejected = true;
            overflowed = true;
            stats.rejected += 1;
            continue;
        }
        overflowed = false;

        let e: [f64; D] = std::array::from_fn(|i| {
            hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
        });
        let err = err_norm(&y, &y_new, &e, opts);

        if err <= 1.0 {
            let fac11 = err.max(1e-300).powf(expo1);
            let fac = (fac11 / err_old.powf(BETA) / SAFE).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut h_new = h / fac;
            err_old = err.max(1e-4);

            let ydiff: [f64; D] = std::array::from_fn(|i| y_new[i] - y[i]);
            let bspl: [f64; D] = std::array::from_fn(|i| hs * k1[i] - ydiff[i]);
            let rcont = [
                y,
                ydiff,
                bspl,
                std::array::from_fn(|i| ydiff[i] - hs * k7[i] - bspl[i]),
                std::array::from_fn(|i| {
                    hs * (D1 * k1[i]
                        + D3 * k3[i]
                        + D4 * k4[i]
                        + D5 * k5[i]
                        + D6 * k6[i]
                        + D7 * k7[i])
                }),
            ];
            let step = Step {
                t0: t,
                h: hs,
                y0: y,
                y1: y_new,
                f0: k1,
                f1: k7,
                rcont,
            };
            stats.accepted += 1;
            t = if last { t_end } else { t + hs };
            y = y_new;
            k1 = k7;
            stats.t = t;
            if observe(&step) == Control::Stop {
                stats.termination = Termination::Stopped;
                break;
            }
            if last {
                break;
            }
            if last_rejected {
                h_new = h_new.min(h);
            }
            last_rejected = false;
            h = h_new.min(opts.h_max);
        } else {
            let fac11 = err.powf(expo1);
            h /= (fac11 / SAFE).min(1.0 / FAC_MIN);
            last_rejected = true;
            stats.rejected += 1;
        }
    }
    stats
}
