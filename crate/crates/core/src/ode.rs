// Copyright 2026 The chaintransport Authors
// SPDX-License-Identifier: Apache-2.0

//! Adaptive Dormand–Prince 5(4) integrator for complex-valued linear systems.

use num_complex::Complex64;

use crate::linalg::ZERO;

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-13,
            max_steps: 5_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stop {
    /// Caller's predicate fired.
    Condition,
    /// Reached the requested end time.
    EndTime,
    MaxSteps,
    StepUnderflow,
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
// b - b*: difference between the 5th- and embedded 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `y' = f(t, y)` from `t0` to `t_end`, calling `stop(t, y)` after
/// every accepted step. Returns the final time and why integration ended;
/// `y` holds the state at that time.
pub fn integrate<F, S>(
    f: F,
    t0: f64,
    y: &mut Vec<Complex64>,
    t_end: f64,
    tol: Tolerances,
    mut stop: S,
) -> (f64, Stop)
where
    F: Fn(f64, &[Complex64], &mut [Complex64]),
    S: FnMut(f64, &[Complex64]) -> bool,
{
    let n = y.len();
    let mut k: Vec<Vec<Complex64>> = (0..7).map(|_| vec![ZERO; n]).collect();
    let mut tmp = vec![ZERO; n];
    let mut y_new = vec![ZERO; n];
    let mut t = t0;

    f(t, y, &mut k[0]);
    let mut h = initial_step(y, &k[0], tol).min(t_end - t0);
    let mut steps = 0usize;
    let mut prev_err = 1e-4f64;

    while t < t_end {
        if steps >= tol.max_steps {
            return (t, Stop::MaxSteps);
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return (t, Stop::StepUnderflow);
        }
        h = h.min(t_end - t);

        stage(&mut tmp, y, h, &k, &[A21]);
        f(t + C2 * h, &tmp, &mut k[1]);
        stage(&mut tmp, y, h, &k, &[A31, A32]);
        f(t + C3 * h, &tmp, &mut k[2]);
        stage(&mut tmp, y, h, &k, &[A41, A42, A43]);
        f(t + C4 * h, &tmp, &mut k[3]);
        stage(&mut tmp, y, h, &k, &[A51, A52, A53, A54]);
        f(t + C5 * h, &tmp, &mut k[4]);
        stage(&mut tmp, y, h, &k, &[A61, A62, A63, A64, A65]);
        f(t + h, &tmp, &mut k[5]);
        stage(&mut y_new, y, h, &k, &[B1, 0.0, B3, B4, B5, B6]);
        f(t + h, &y_new, &mut k[6]);

        let mut err_sq = 0.0;
        for i in 0..n {
            let e = h * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
            let scale = tol.atol + tol.rtol * y[i].norm().max(y_new[i].norm());
            err_sq += (e.norm() / scale).powi(2);
        }
        let err = (err_sq / n as f64).sqrt();

        if err <= 1.0 {
            t += h;
            std::mem::swap(y, &mut y_new);
            k.swap(0, 6);
            steps += 1;
            if stop(t, y) {
                return (t, Stop::Condition);
            }
            // PI step-size control.
            let fac = 0.9 * err.max(1e-10).powf(-0.7 / 5.0) * prev_err.powf(0.4 / 5.0);
            h *= fac.clamp(0.2, 5.0);
            prev_err = err.max(1e-4);
        } else {
            h *= (0.9 * err.powf(-0.2)).max(0.2);
        }
    }
    (t, Stop::EndTime)
}

fn stage(out: &mut [Complex64], y: &[Complex64], h: f64, k: &[Vec<Complex64>], a: &[f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = ZERO;
        for (kj, &aj) in k.iter().zip(a) {
            if aj != 0.0 {
                acc += aj * kj[i];
            }
        }
        *o = y[i] + h * acc;
    }
}

fn initial_step(y: &[Complex64], dy: &[Complex64], tol: Tolerances) -> f64 {
    let scale = |i: usize| tol.atol + tol.rtol * y[i].norm();
    let d0 = (0..y.len()).map(|i| (y[i].norm() / scale(i)).powi(2)).sum::<f64>().sqrt();
    let d1 = (0..y.len()).map(|i| (dy[i].norm() / scale(i)).powi(2)).sum::<f64>().sqrt();
    if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        (0.01 * d0 / d1).min(1.0)
    }
}
