//! Fixed-step classical Runge-Kutta for small complex systems.

use crate::quantum::C64;

#[inline]
fn axpy<const N: usize>(y: &[C64; N], k: &[C64; N], h: f64) -> [C64; N] {
    let mut out = *y;
    for (o, ki) in out.iter_mut().zip(k) {
        *o += ki * h;
    }
    out
}

/// One RK4 step of `y' = f(t, y)`.
pub fn rk4_step<const N: usize, F>(f: &F, t: f64, y: &[C64; N], dt: f64) -> [C64; N]
where
    F: Fn(f64, &[C64; N]) -> [C64; N],
{
    let k1 = f(t, y);
    let k2 = f(t + dt / 2.0, &axpy(y, &k1, dt / 2.0));
    let k3 = f(t + dt / 2.0, &axpy(y, &k2, dt / 2.0));
    let k4 = f(t + dt, &axpy(y, &k3, dt));
    let mut out = *y;
    for i in 0..N {
        out[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_fourth_order() {
        let f = |_t: f64, y: &[C64; 1]| [y[0] * C64::new(-1.0, 2.0)];
        let exact = (C64::new(-1.0, 2.0)).exp();
        let err = |steps: usize| {
            let dt = 1.0 / steps as f64;
            let mut y = [C64::new(1.0, 0.0)];
            for i in 0..steps {
                y = rk4_step(&f, i as f64 * dt, &y, dt);
            }
            (y[0] - exact).norm()
        };
        let ratio = err(50) / err(100);
        assert!((ratio - 16.0).abs() < 1.0, "convergence ratio {ratio}");
    }

    #[test]
    fn time_dependent_rhs() {
        // y' = 3t², y(0) = 0 is integrated exactly by a fourth-order method.
        let f = |t: f64, _y: &[C64; 1]| [C64::new(3.0 * t * t, 0.0)];
        let mut y = [C64::new(0.0, 0.0)];
        for i in 0..10 {
            y = rk4_step(&f, i as f64 * 0.1, &y, 0.1);
        }
        assert!((y[0].re - 1.0).abs() < 1e-13);
    }
}
