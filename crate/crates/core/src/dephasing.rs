//! Photon shot-noise dephasing of a qubit coupled to a thermally populated
//! resonator.
//!
//! Two closed-form laws are provided, one for a linear dispersive shift χ
//! and one for a Kerr-type shift χ′:
//!
//! ```text
//! Γ_lin = n κ χ² / (κ² + χ²)
//! Γ_nl  = 64 n³ χ′² / κ
//! ```
//!
//! The second follows from a phase-space treatment in which the qubit
//! coherence picks up a factor `exp(μ(t))` with
//!
//! ```text
//! Ż = −2iχ′(Z³ + 2Z²) − κZ + 2κn      (cubic)
//! Ż = −4iχ′Z² − κZ + 2κn              (quadratic, O(Z³) dropped)
//! μ̇ = −χ′Z²
//! ```
//!
//! so that the dephasing rate is `Γ = −χ′ Im Z²` and the frequency shift
//! `Δ = −χ′ Re Z²` once `Z` has settled. The quadratic equation has the
//! exact solution `Z(t) = 4κn T / (A + κT)` with `T = tanh(tA/2)` and
//! `A = √(κ² + 32iκnχ′)`.
//!
//! Rates are angular: κ, χ and χ′ are supplied in Hz and multiplied by 2π.

use crate::error::{invalid, Error, Result};
use crate::ode::rk4_step;
use crate::quantum::C64;
use crate::units::{angular, BOLTZMANN, PLANCK};

/// Mean thermal photon number `1/(exp(hν/k_BT) − 1)`.
pub fn thermal_occupation(nu_r: f64, temperature: f64) -> Result<f64> {
    if !(nu_r.is_finite() && nu_r > 0.0) {
        return Err(invalid("nu_r", "must be positive"));
    }
    if !(temperature.is_finite() && temperature >= 0.0) {
        return Err(invalid("temperature", "must be non-negative"));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    let x = PLANCK * nu_r / (BOLTZMANN * temperature);
    Ok(1.0 / x.exp_m1())
}

/// Source of the resonator occupation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Occupation {
    Mean(f64),
    Thermal { temperature: f64, nu_r: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DephasingParams {
    /// Hz.
    pub kappa: f64,
    /// Hz.
    pub chi: f64,
    /// Hz.
    pub chi_prime: f64,
    pub occupation: Occupation,
}

impl DephasingParams {
    pub fn new(kappa: f64, chi: f64, chi_prime: f64, n_th: f64) -> Self {
        Self {
            kappa,
            chi,
            chi_prime,
            occupation: Occupation::Mean(n_th),
        }
    }

    pub fn thermal(kappa: f64, chi: f64, chi_prime: f64, temperature: f64, nu_r: f64) -> Self {
        Self {
            kappa,
            chi,
            chi_prime,
            occupation: Occupation::Thermal { temperature, nu_r },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return Err(invalid("kappa", "must be positive"));
        }
        if !self.chi.is_finite() {
            return Err(invalid("chi", "must be finite"));
        }
        if !self.chi_prime.is_finite() {
            return Err(invalid("chi_prime", "must be finite"));
        }
        self.n_th().map(|_| ())
    }

    pub fn n_th(&self) -> Result<f64> {
        match self.occupation {
            Occupation::Mean(n) if n.is_finite() && n >= 0.0 => Ok(n),
            Occupation::Mean(n) => Err(invalid("n_th", format!("must be non-negative, got {n}"))),
            Occupation::Thermal { temperature, nu_r } => thermal_occupation(nu_r, temperature),
        }
    }

    fn angular_rates(&self) -> (f64, f64, f64) {
        (angular(self.kappa), angular(self.chi), angular(self.chi_prime))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedLinear,
    ClosedNonlinear,
    OdeCubic,
    OdeQuadratic,
    QuadraticAnalytic,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::ClosedLinear => "closed_linear",
            Method::ClosedNonlinear => "closed_nonlinear",
            Method::OdeCubic => "ode_cubic",
            Method::OdeQuadratic => "ode_quadratic",
            Method::QuadraticAnalytic => "quadratic_analytic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DephasingResult {
    /// 1/s.
    pub gamma: f64,
    /// rad/s.
    pub delta: f64,
    pub method: Method,
    /// `1/Γ` in s, infinite when Γ = 0.
    pub t_phi: f64,
}

impl DephasingResult {
    fn new(gamma: f64, delta: f64, method: Method) -> Self {
        Self {
            gamma,
            delta,
            method,
            t_phi: 1.0 / gamma,
        }
    }
}

pub fn gamma_linear(p: &DephasingParams) -> Result<DephasingResult> {
    p.validate()?;
    let (kappa, chi, _) = p.angular_rates();
    let n = p.n_th()?;
    let gamma = if chi == 0.0 {
        0.0
    } else {
        n * kappa * chi * chi / (kappa * kappa + chi * chi)
    };
    Ok(DephasingResult::new(gamma, 0.0, Method::ClosedLinear))
}

pub fn gamma_nonlinear_analytic(p: &DephasingParams) -> Result<DephasingResult> {
    p.validate()?;
    let (kappa, _, chip) = p.angular_rates();
    let n = p.n_th()?;
    Ok(DephasingResult::new(
        64.0 * n.powi(3) * chip * chip / kappa,
        0.0,
        Method::ClosedNonlinear,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZModel {
    Cubic,
    Quadratic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZTrajectory {
    pub times: Vec<f64>,
    pub z: Vec<C64>,
    pub mu: Vec<C64>,
}

/// Largest step accepted by [`z_trajectory`]: `1/(50κ)` with κ angular.
pub fn max_step(kappa_hz: f64) -> f64 {
    1.0 / (50.0 * angular(kappa_hz))
}

const DIVERGENCE_BOUND: f64 = 1e3;

/// Integrates `(Z, μ)` from zero with fixed RK4 steps no longer than `dt`.
pub fn z_trajectory(p: &DephasingParams, t_end: f64, dt: f64, model: ZModel) -> Result<ZTrajectory> {
    p.validate()?;
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(invalid("t_end", "must be positive"));
    }
    let limit = max_step(p.kappa);
    if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
        return Err(Error::StepTooLarge { dt, limit });
    }
    let (kappa, _, chip) = p.angular_rates();
    let n = p.n_th()?;
    let two_i_chip = C64::new(0.0, 2.0 * chip);
    let rhs = move |_t: f64, y: &[C64; 2]| {
        let z = y[0];
        let z2 = z * z;
        let nonlinear = match model {
            ZModel::Cubic => two_i_chip * (z2 * z + z2 * 2.0),
            ZModel::Quadratic => two_i_chip * z2 * 2.0,
        };
        [-nonlinear - z * kappa + 2.0 * kappa * n, -z2 * chip]
    };
    let steps = (t_end / dt).ceil() as usize;
    let h = t_end / steps as f64;
    let mut times = Vec::with_capacity(steps + 1);
    let mut z = Vec::with_capacity(steps + 1);
    let mut mu = Vec::with_capacity(steps + 1);
    let mut y = [C64::new(0.0, 0.0); 2];
    times.push(0.0);
    z.push(y[0]);
    mu.push(y[1]);
    for k in 0..steps {
        let t = k as f64 * h;
        y = rk4_step(&rhs, t, &y, h);
        let t_next = (k + 1) as f64 * h;
        if !(y[0].norm() <= DIVERGENCE_BOUND) {
            return Err(Error::Diverged { t: t_next });
        }
        times.push(t_next);
        z.push(y[0]);
        mu.push(y[1]);
    }
    Ok(ZTrajectory { times, z, mu })
}

fn sqrt_a(kappa: f64, n: f64, chip: f64) -> C64 {
    // Principal branch, Re √ > 0.
    C64::new(kappa * kappa, 32.0 * kappa * n * chip).sqrt()
}

/// Steady state of the quadratic equation, `4κn / (κ + A)`.
pub fn z_quadratic_analytic(p: &DephasingParams) -> Result<C64> {
    p.validate()?;
    let (kappa, _, chip) = p.angular_rates();
    let n = p.n_th()?;
    let a = sqrt_a(kappa, n, chip);
    Ok(4.0 * kappa * n / (a + kappa))
}

/// Exact quadratic-model trajectory value `Z(t)`.
pub fn z_quadratic_closed_form(p: &DephasingParams, t: f64) -> Result<C64> {
    p.validate()?;
    let (kappa, _, chip) = p.angular_rates();
    let n = p.n_th()?;
    let a = sqrt_a(kappa, n, chip);
    let tanh = (a * (t / 2.0)).tanh();
    Ok(4.0 * kappa * n * tanh / (a + tanh * kappa))
}

/// Tolerance below zero accepted before a rate is treated as unphysical.
pub const NEGATIVE_RATE_TOL: f64 = 1e-12;

/// `Γ = −χ′ Im Z²`, `Δ = −χ′ Re Z²` for a settled `Z`.
pub fn gamma_from_z(z: C64, chi_prime: f64, method: Method) -> Result<DephasingResult> {
    let chip = angular(chi_prime);
    let z2 = z * z;
    let gamma = -chip * z2.im;
    if gamma < -NEGATIVE_RATE_TOL {
        return Err(Error::NegativeRate { gamma });
    }
    Ok(DephasingResult::new(gamma.max(0.0), -chip * z2.re, method))
}

/// Settling horizon in units of `1/κ`.
pub const SETTLE_WINDOWS: f64 = 50.0;

/// Relative change of Z over the last `1/κ` window accepted as settled.
pub const SETTLE_TOL: f64 = 1e-9;

/// Γ from the late-time average of an integrated `Z` trajectory.
///
/// Integrates to `50/κ` with `dt = 1/(50κ)`, checks that Z moved by less
/// than [`SETTLE_TOL`] over the final `1/κ`, and averages the last 10%.
pub fn gamma_ode(p: &DephasingParams, model: ZModel) -> Result<DephasingResult> {
    p.validate()?;
    let kappa = angular(p.kappa);
    let dt = max_step(p.kappa);
    let traj = z_trajectory(p, SETTLE_WINDOWS / kappa, dt, model)?;
    let last = *traj.z.last().expect("non-empty trajectory");
    let per_window = (traj.z.len() - 1) as f64 / SETTLE_WINDOWS;
    let earlier = traj.z[traj.z.len() - 1 - per_window.round() as usize];
    let scale = last.norm();
    if scale > 0.0 {
        let change = (last - earlier).norm() / scale;
        if change > SETTLE_TOL {
            return Err(Error::NotConverged {
                what: "Z steady state".into(),
                change,
            });
        }
    }
    let tail = traj.z.len() / 10;
    let mean: C64 = traj.z[traj.z.len() - tail..].iter().sum::<C64>() / tail as f64;
    let method = match model {
        ZModel::Cubic => Method::OdeCubic,
        ZModel::Quadratic => Method::OdeQuadratic,
    };
    gamma_from_z(mean, p.chi_prime, method)
}

pub fn gamma_quadratic_analytic(p: &DephasingParams) -> Result<DephasingResult> {
    gamma_from_z(z_quadratic_analytic(p)?, p.chi_prime, Method::QuadraticAnalytic)
}

/// Which rate enters a dephasing curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DephasingLaw {
    Linear,
    Nonlinear,
    /// Sum of the linear and nonlinear rates.
    #[default]
    Combined,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    /// K.
    pub temperature: f64,
    pub n_th: f64,
    /// 1/s.
    pub gamma: f64,
    /// s; infinite when Γ = 0.
    pub t_phi: f64,
}

/// Closed-form dephasing time versus temperature.
pub fn dephasing_curve(
    chi: f64,
    chi_prime: f64,
    kappa: f64,
    nu_r: f64,
    temperatures: &[f64],
    law: DephasingLaw,
) -> Result<Vec<CurvePoint>> {
    if temperatures.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(invalid("temperatures", "must be positive"));
    }
    if temperatures.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("temperatures", "must be strictly ascending"));
    }
    temperatures
        .iter()
        .map(|&temperature| {
            let p = DephasingParams::thermal(kappa, chi, chi_prime, temperature, nu_r);
            let lin = gamma_linear(&p)?.gamma;
            let nl = gamma_nonlinear_analytic(&p)?.gamma;
            let gamma = match law {
                DephasingLaw::Linear => lin,
                DephasingLaw::Nonlinear => nl,
                DephasingLaw::Combined => lin + nl,
            };
            Ok(CurvePoint {
                temperature,
                n_th: p.n_th()?,
                gamma,
                t_phi: 1.0 / gamma,
            })
        })
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
