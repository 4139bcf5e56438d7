//! Dormand–Prince 5(4) integrator.

use crate::{Error, Result};

/// Step control.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub enum OdeSettings {
    /// Embedded error control with a mixed absolute/relative tolerance.
    Adaptive { tol: f64 },
    /// Uniform steps; the result depends smoothly on the initial data, which
    /// finite-difference derivatives need.
    Fixed { steps: usize },
}

impl Default for OdeSettings {
    fn default() -> Self {
        OdeSettings::Adaptive { tol: 1e-10 }
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Outcome of an integration.
#[derive(Clone, Debug)]
pub struct OdeSolution {
    pub y: Vec<f64>,
    pub steps: usize,
}

/// Integrates `y' = f(t, y)` from `t0` to `t1` (either direction).
pub fn integrate<F>(f: F, y0: &[f64], t0: f64, t1: f64, settings: OdeSettings) -> Result<OdeSolution>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let n = y0.len();
    let mut k = vec![vec![0.0; n]; 7];
    let mut y = y0.to_vec();
    let mut tmp = vec![0.0; n];
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(OdeSolution { y, steps: 0 });
    }
    let stage = |k: &mut Vec<Vec<f64>>, tmp: &mut Vec<f64>, y: &[f64], t: f64, h: f64| {
        f(t, y, &mut k[0]);
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += h * A[s][j] * kj[i];
                }
                tmp[i] = acc;
            }
            f(t + C[s] * h, tmp, &mut k[s]);
        }
    };
    match settings {
        OdeSettings::Fixed { steps } => {
            let steps = steps.max(1);
            let h = span / steps as f64;
            for s in 0..steps {
                let t = t0 + s as f64 * h;
                stage(&mut k, &mut tmp, &y, t, h);
                for i in 0..n {
                    y[i] += h * (0..7).map(|j| B5[j] * k[j][i]).sum::<f64>();
                }
            }
            Ok(OdeSolution { y, steps })
        }
        OdeSettings::Adaptive { tol } => {
            let dir = span.signum();
            let mut t = t0;
            let mut h = span.abs().min(0.05) * dir;
            let mut steps = 0usize;
            let mut ynew = vec![0.0; n];
            while (t1 - t) * dir > 0.0 {
                if (t + h - t1) * dir > 0.0 {
                    h = t1 - t;
                }
                stage(&mut k, &mut tmp, &y, t, h);
                let mut err: f64 = 0.0;
                for i in 0..n {
                    let mut hi = 0.0;
                    let mut lo = 0.0;
                    for j in 0..7 {
                        hi += B5[j] * k[j][i];
                        lo += B4[j] * k[j][i];
                    }
                    ynew[i] = y[i] + h * hi;
                    let sc = tol * (1.0 + y[i].abs().max(ynew[i].abs()));
                    err = err.max((h * (hi - lo)).abs() / sc);
                }
                if err <= 1.0 {
                    t += h;
                    std::mem::swap(&mut y, &mut ynew);
                    steps += 1;
                    if (t1 - t).abs() <= 1e-13 * span.abs() {
                        break;
                    }
                }
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                h *= fac;
                if h.abs() < 1e-14 * span.abs() || steps > 2_000_000 {
                    return Err(Error::Integrator { achieved: err * tol });
                }
            }
            Ok(OdeSolution { y, steps })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oscillator(_: f64, y: &[f64], dy: &mut [f64]) {
        dy[0] = y[1];
        dy[1] = -y[0];
    }

    #[test]
    fn harmonic_oscillator_both_modes() {
        for s in [OdeSettings::Adaptive { tol: 1e-12 }, OdeSettings::Fixed { steps: 400 }] {
            let out = integrate(oscillator, &[0.0, 1.0], 0.0, 3.0, s).unwrap();
            assert!((out.y[0] - 3f64.sin()).abs() < 1e-10, "{s:?}: {}", out.y[0]);
            assert!((out.y[1] - 3f64.cos()).abs() < 1e-10);
        }
    }

    #[test]
    fn backward_in_time() {
        let out = integrate(oscillator, &[0.0, 1.0], 0.0, -2.0, OdeSettings::Adaptive { tol: 1e-12 }).unwrap();
        assert!((out.y[0] - (-2f64).sin()).abs() < 1e-10);
    }

    #[test]
    fn fixed_steps_converge_at_fifth_order() {
        let err = |n| {
            let out = integrate(oscillator, &[0.0, 1.0], 0.0, 3.0, OdeSettings::Fixed { steps: n }).unwrap();
            (out.y[0] - 3f64.sin()).abs()
        };
        let ratio = err(20) / err(40);
        assert!(ratio > 25.0, "{ratio}");
    }
}
