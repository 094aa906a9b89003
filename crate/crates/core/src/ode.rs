//! Explicit Runge–Kutta integrators: classical RK4 with fixed step and
//! Dormand–Prince 5(4) with embedded error control.
//!
//! Both integrate `y′ = f(t, y)` from `t0` to `t1` in either time direction and
//! land exactly on `t1`. A guard is consulted after every accepted step.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Classical RK4; the step is shrunk slightly so that an integer number of steps hits `t1`.
    Rk4 { step: f64 },
    /// Dormand–Prince 5(4) with mixed error weight `atol + rtol·|y|`.
    Rk45 { rtol: f64, atol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub method: Method,
    pub max_steps: usize,
    /// Keep every accepted state instead of only the endpoint.
    pub record: bool,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { method: Method::Rk45 { rtol: 1e-9, atol: 1e-9 }, max_steps: 1_000_000, record: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OdeStatus {
    Completed,
    /// The guard asked to stop; the last state is the one that tripped it.
    Stopped,
    StepBudget,
    StepUnderflow,
    NonFinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdeSolution {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub status: OdeStatus,
    pub accepted: usize,
    pub rejected: usize,
}

impl OdeSolution {
    pub fn last(&self) -> &[f64] {
        self.states.last().expect("solution holds at least the initial state")
    }

    pub fn t_last(&self) -> f64 {
        *self.times.last().expect("solution holds at least the initial time")
    }
}

/// Integrate with a guard `stop(t, y)` that may terminate early.
pub fn solve<F, G>(mut f: F, y0: &[f64], t0: f64, t1: f64, opts: &OdeOptions, mut stop: G) -> OdeSolution
where
    F: FnMut(f64, &[f64], &mut [f64]),
    G: FnMut(f64, &[f64]) -> bool,
{
    let mut sol = OdeSolution {
        times: vec![t0],
        states: vec![y0.to_vec()],
        status: OdeStatus::Completed,
        accepted: 0,
        rejected: 0,
    };
    if t1 == t0 {
        return sol;
    }
    if !y0.iter().all(|v| v.is_finite()) {
        sol.status = OdeStatus::NonFinite;
        return sol;
    }
    if stop(t0, y0) {
        sol.status = OdeStatus::Stopped;
        return sol;
    }
    match opts.method {
        Method::Rk4 { step } => rk4(&mut f, y0, t0, t1, step, opts, &mut stop, &mut sol),
        Method::Rk45 { rtol, atol } => dopri(&mut f, y0, t0, t1, rtol, atol, opts, &mut stop, &mut sol),
    }
    sol
}

fn push(sol: &mut OdeSolution, record: bool, t: f64, y: &[f64]) {
    if record || sol.times.len() == 1 {
        sol.times.push(t);
        sol.states.push(y.to_vec());
    } else {
        *sol.times.last_mut().unwrap() = t;
        sol.states.last_mut().unwrap().copy_from_slice(y);
    }
}

#[allow(clippy::too_many_arguments)]
fn rk4<F, G>(f: &mut F, y0: &[f64], t0: f64, t1: f64, step: f64, opts: &OdeOptions, stop: &mut G, sol: &mut OdeSolution)
where
    F: FnMut(f64, &[f64], &mut [f64]),
    G: FnMut(f64, &[f64]) -> bool,
{
    let span = t1 - t0;
    let nsteps = ((span.abs() / step.abs()).ceil() as usize).max(1);
    if nsteps > opts.max_steps {
        sol.status = OdeStatus::StepBudget;
        return;
    }
    let h = span / nsteps as f64;
    let d = y0.len();
    let mut y = y0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (vec![0.0; d], vec![0.0; d], vec![0.0; d], vec![0.0; d], vec![0.0; d]);
    for i in 0..nsteps {
        let t = t0 + h * i as f64;
        f(t, &y, &mut k1);
        for j in 0..d {
            tmp[j] = y[j] + 0.5 * h * k1[j];
        }
        f(t + 0.5 * h, &tmp, &mut k2);
        for j in 0..d {
            tmp[j] = y[j] + 0.5 * h * k2[j];
        }
        f(t + 0.5 * h, &tmp, &mut k3);
        for j in 0..d {
            tmp[j] = y[j] + h * k3[j];
        }
        f(t + h, &tmp, &mut k4);
        for j in 0..d {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        let tn = if i + 1 == nsteps { t1 } else { t0 + h * (i + 1) as f64 };
        sol.accepted += 1;
        if !y.iter().all(|v| v.is_finite()) {
            sol.status = OdeStatus::NonFinite;
            return;
        }
        push(sol, opts.record, tn, &y);
        if stop(tn, &y) {
            sol.status = OdeStatus::Stopped;
            return;
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
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
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order minus fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[allow(clippy::too_many_arguments)]
fn dopri<F, G>(
    f: &mut F,
    y0: &[f64],
    t0: f64,
    t1: f64,
    rtol: f64,
    atol: f64,
    opts: &OdeOptions,
    stop: &mut G,
    sol: &mut OdeSolution,
) where
    F: FnMut(f64, &[f64], &mut [f64]),
    G: FnMut(f64, &[f64]) -> bool,
{
    let d = y0.len();
    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut k = [(); 7].map(|_| vec![0.0; d]);
    let mut tmp = vec![0.0; d];
    let mut ynew = vec![0.0; d];

    let weight = |a: f64, b: f64| (atol + rtol * a.abs().max(b.abs())).max(f64::MIN_POSITIVE);

    f(t, &y, &mut k[0]);
    // initial step from the scale of y and y′
    let mut h = {
        let d0 = y.iter().map(|v| (v / weight(*v, *v)).abs()).fold(0.0, f64::max);
        let d1 = y.iter().zip(&k[0]).map(|(v, dv)| (dv / weight(*v, *v)).abs()).fold(0.0, f64::max);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h0.min(span)
    };
    let h_floor = 1e-14 * span.max(t0.abs()).max(1e-300);

    let mut steps = 0usize;
    while (t1 - t) * dir > 0.0 {
        if steps >= opts.max_steps {
            sol.status = OdeStatus::StepBudget;
            return;
        }
        steps += 1;
        let remaining = (t1 - t).abs();
        let last = h >= remaining;
        let hs = if last { remaining } else { h } * dir;

        macro_rules! stage {
            ($out:expr, $c:expr, [$($a:expr => $ki:expr),*]) => {{
                for j in 0..d {
                    tmp[j] = y[j] + hs * (0.0 $(+ $a * k[$ki][j])*);
                }
                f(t + $c * hs, &tmp, &mut k[$out]);
            }};
        }
        stage!(1, C2, [A21 => 0]);
        stage!(2, C3, [A31 => 0, A32 => 1]);
        stage!(3, C4, [A41 => 0, A42 => 1, A43 => 2]);
        stage!(4, C5, [A51 => 0, A52 => 1, A53 => 2, A54 => 3]);
        stage!(5, 1.0, [A61 => 0, A62 => 1, A63 => 2, A64 => 3, A65 => 4]);
        for j in 0..d {
            ynew[j] = y[j] + hs * (B1 * k[0][j] + B3 * k[2][j] + B4 * k[3][j] + B5 * k[4][j] + B6 * k[5][j]);
        }
        let t_next = if last { t1 } else { t + hs };
        f(t_next, &ynew, &mut k[6]);

        let mut err = 0.0_f64;
        let mut finite = true;
        for j in 0..d {
            let e = hs
                * (E1 * k[0][j] + E3 * k[2][j] + E4 * k[3][j] + E5 * k[4][j] + E6 * k[5][j] + E7 * k[6][j]);
            if !e.is_finite() || !ynew[j].is_finite() {
                finite = false;
                break;
            }
            err = err.max((e / weight(y[j], ynew[j])).abs());
        }

        if !finite {
            sol.rejected += 1;
            h *= 0.25;
            if h < h_floor {
                sol.status = OdeStatus::NonFinite;
                return;
            }
            continue;
        }

        if err <= 1.0 {
            t = t_next;
            core::mem::swap(&mut y, &mut ynew);
            let (first, rest) = k.split_at_mut(1);
            first[0].copy_from_slice(&rest[5]);
            sol.accepted += 1;
            push(sol, opts.record, t, &y);
            if stop(t, &y) {
                sol.status = OdeStatus::Stopped;
                return;
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = if last { h } else { h * fac };
        } else {
            sol.rejected += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            if h < h_floor {
                sol.status = OdeStatus::StepUnderflow;
                return;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_decay(_: f64, y: &[f64], dy: &mut [f64]) {
        dy[0] = -y[0];
        dy[1] = y[0];
    }

    #[test]
    fn rk45_matches_exponential() {
        let opts = OdeOptions { method: Method::Rk45 { rtol: 1e-11, atol: 1e-13 }, ..Default::default() };
        let s = solve(exp_decay, &[1.0, 0.0], 0.0, 2.0, &opts, |_, _| false);
        assert_eq!(s.status, OdeStatus::Completed);
        assert_eq!(s.t_last(), 2.0);
        assert!((s.last()[0] - (-2f64).exp()).abs() < 1e-10);
        assert!((s.last()[1] - (1.0 - (-2f64).exp())).abs() < 1e-10);
    }

    #[test]
    fn rk4_lands_on_endpoint_backwards() {
        let opts = OdeOptions { method: Method::Rk4 { step: 0.003 }, record: true, ..Default::default() };
        let s = solve(exp_decay, &[1.0, 0.0], 0.0, -1.0, &opts, |_, _| false);
        assert_eq!(s.t_last(), -1.0);
        assert!((s.last()[0] - 1f64.exp()).abs() < 1e-9);
        assert!(s.times.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn guard_stops_integration() {
        let opts = OdeOptions::default();
        let s = solve(exp_decay, &[1.0, 0.0], 0.0, 10.0, &opts, |_, y| y[0] < 0.5);
        assert_eq!(s.status, OdeStatus::Stopped);
        assert!(s.last()[0] < 0.5 && s.t_last() < 10.0);
    }

    #[test]
    fn rk4_fourth_order_convergence() {
        let run = |h| {
            let opts = OdeOptions { method: Method::Rk4 { step: h }, ..Default::default() };
            (solve(exp_decay, &[1.0, 0.0], 0.0, 1.0, &opts, |_, _| false).last()[0] - (-1f64).exp()).abs()
        };
        let ratio = run(0.1) / run(0.05);
        assert!(ratio > 14.0 && ratio < 18.0, "ratio {ratio}");
    }
}
