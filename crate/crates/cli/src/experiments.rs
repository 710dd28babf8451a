//! The experiment catalog: parameters, output columns and per-point
//! evaluation.

use mixcoupling::dephasing::{
    dephasing_curve, gamma_linear, gamma_nonlinear_analytic, gamma_ode, DephasingLaw, DephasingParams,
    ZModel,
};
use mixcoupling::diagnostics::{cpt_overlap_scan, mixed_model_overlap_scan, GUARD_LEVELS};
use mixcoupling::dispersive::{chi_perturbative, cpt_spectrum, extract_shifts, mixed_model_shifts};
use mixcoupling::models::{CptParams, MixedCouplingParams, ResonatorConvention};
use mixcoupling::quantum::C64;
use mixcoupling::readout::{integrate_trajectory, ReadoutConfig, SNR_PREFACTOR};
use mixcoupling::units::GHZ;

use crate::config::Point;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kind {
    /// Hz.
    Frequency,
    /// K.
    Temperature,
    /// s.
    Time,
    /// Dimensionless.
    Real,
    Count { min: usize },
    Choice(&'static [&'static str]),
}

impl Kind {
    pub fn sweepable(self) -> bool {
        matches!(self, Kind::Frequency | Kind::Temperature | Kind::Time | Kind::Real)
    }

    /// SI unit of the stored value.
    pub fn unit(self) -> &'static str {
        match self {
            Kind::Frequency => "Hz",
            Kind::Temperature => "K",
            Kind::Time => "s",
            _ => "",
        }
    }

    pub fn describe(self) -> String {
        match self {
            Kind::Frequency => "frequency".into(),
            Kind::Temperature => "temperature".into(),
            Kind::Time => "time".into(),
            Kind::Real => "number".into(),
            Kind::Count { min } => format!("integer >= {min}"),
            Kind::Choice(o) => format!("one of {}", o.join("|")),
        }
    }

    pub fn example(self) -> &'static str {
        match self {
            Kind::Frequency => "5 GHz",
            Kind::Temperature => "50 mK",
            Kind::Time => "400 ns",
            _ => "1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    /// SI units.
    Num(f64),
    Count(usize),
    Choice(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fallback {
    Required,
    Optional,
    Default(Value),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpec {
    pub name: &'static str,
    pub kind: Kind,
    pub fallback: Fallback,
}

const fn param(name: &'static str, kind: Kind, fallback: Fallback) -> ParamSpec {
    ParamSpec { name, kind, fallback }
}

/// Parameters that become required when a choice takes a given value.
#[derive(Debug)]
pub struct Condition {
    pub when: &'static str,
    pub equals: &'static str,
    pub require: &'static [&'static str],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Real,
    Complex,
    Integer,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: &'static str,
    pub kind: ColumnKind,
    pub unit: &'static str,
}

const fn real(name: &'static str, unit: &'static str) -> Column {
    Column { name, kind: ColumnKind::Real, unit }
}

const fn complex(name: &'static str, unit: &'static str) -> Column {
    Column { name, kind: ColumnKind::Complex, unit }
}

const fn integer(name: &'static str) -> Column {
    Column { name, kind: ColumnKind::Integer, unit: "" }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Real(f64),
    Complex(C64),
    Integer(i64),
    Missing,
}

pub type Rows = Vec<Vec<Cell>>;

#[derive(Debug)]
pub struct Experiment {
    pub name: &'static str,
    pub summary: &'static str,
    pub params: &'static [ParamSpec],
    pub conditions: &'static [Condition],
    /// Parameter that must be swept.
    pub sweep_required: Option<&'static str>,
    pub columns: &'static [Column],
    /// One or more output rows for a grid point.
    pub eval: fn(&Point) -> mixcoupling::Result<Rows>,
}

impl Experiment {
    pub fn param(&'static self, name: &str) -> Option<&'static ParamSpec> {
        self.params.iter().find(|p| p.name == name)
    }

    /// One catalog line: name, summary and required parameters.
    pub fn catalog_line(&self) -> String {
        let required: Vec<&str> = self
            .params
            .iter()
            .filter(|p| p.fallback == Fallback::Required)
            .map(|p| p.name)
            .collect();
        let required = if required.is_empty() {
            "none".to_string()
        } else {
            required.join(", ")
        };
        format!("{:<16} {} [required: {required}]", self.name, self.summary)
    }
}

pub fn find(name: &str) -> Option<&'static Experiment> {
    CATALOG.iter().find(|e| e.name == name)
}

use Fallback::{Default as Def, Optional, Required};
use Value::{Choice as Ch, Count as N, Num};

const RESONATOR: &[&str] = &["direct", "standard_lc"];
const LAWS: &[&str] = &["linear", "nonlinear", "combined"];
const MODELS: &[&str] = &["mixed", "cpt"];

macro_rules! with_cpt_params {
    ($($extra:expr),* $(,)?) => { &[
        $($extra,)*
        param("e_j_sigma", Kind::Frequency, Def(Num(18.0 * GHZ))),
        param("e_j_delta", Kind::Frequency, Def(Num(0.0))),
        param("e_c_sigma", Kind::Frequency, Def(Num(10.0 * GHZ))),
        param("e_c_delta", Kind::Frequency, Def(Num(0.0))),
        param("e_cr", Kind::Frequency, Def(Num(10.0 * GHZ))),
        param("e_lr", Kind::Frequency, Def(Num(100.0 * GHZ))),
        param("n_g", Kind::Real, Def(Num(0.25))),
        param("phi_ext", Kind::Real, Def(Num(3.0))),
        param("ng_prime", Kind::Real, Optional),
        param("n_charge_max", Kind::Count { min: 1 }, Def(N(CptParams::DEFAULT_CHARGE_CUTOFF))),
        param("n_fock", Kind::Count { min: 3 }, Def(N(CptParams::DEFAULT_FOCK_CUTOFF))),
        param("resonator", Kind::Choice(RESONATOR), Def(Ch("direct"))),
    ] };
}

macro_rules! with_readout_params {
    ($($extra:expr),* $(,)?) => { &[
        $($extra,)*
        param("kappa", Kind::Frequency, Required),
        param("chi", Kind::Frequency, Def(Num(0.0))),
        param("chi_prime", Kind::Frequency, Required),
        param("n_steady", Kind::Real, Required),
        param("t_end", Kind::Time, Required),
        param("eta", Kind::Real, Def(Num(1.0))),
        param("dt", Kind::Time, Optional),
        param("epsilon", Kind::Real, Optional),
        param("snr_prefactor", Kind::Real, Def(Num(SNR_PREFACTOR))),
    ] };
}

pub static CATALOG: [Experiment; 6] = [
    Experiment {
        name: "shift_sweep",
        summary: "dispersive and Kerr shifts of the mixed spin-boson model",
        params: &[
            param("nu_q", Kind::Frequency, Required),
            param("nu_r", Kind::Frequency, Required),
            param("g_x", Kind::Frequency, Required),
            param("g_p", Kind::Frequency, Required),
            param("n_max", Kind::Count { min: 3 }, Def(N(8))),
        ],
        conditions: &[],
        sweep_required: None,
        columns: &[
            real("chi", "Hz"),
            real("chi_prime", "Hz"),
            real("chi_perturbative", "Hz"),
            real("k_r0", "Hz"),
            real("k_r1", "Hz"),
            real("nu_r_dressed", "Hz"),
            real("nu_q_dressed", "Hz"),
        ],
        eval: shift_sweep,
    },
    Experiment {
        name: "cpt_sweep",
        summary: "dispersive and Kerr shifts of the Cooper pair transistor",
        params: with_cpt_params![],
        conditions: &[],
        sweep_required: None,
        columns: &[
            real("chi", "Hz"),
            real("chi_prime", "Hz"),
            real("nu_q_dressed", "Hz"),
            real("nu_r_dressed", "Hz"),
            real("nu_e", "Hz"),
            real("min_overlap", ""),
        ],
        eval: cpt_sweep,
    },
    Experiment {
        name: "dephasing_curve",
        summary: "photon shot-noise dephasing versus temperature",
        params: &[
            param("kappa", Kind::Frequency, Required),
            param("chi", Kind::Frequency, Required),
            param("chi_prime", Kind::Frequency, Required),
            param("nu_r", Kind::Frequency, Required),
            param("temperature", Kind::Temperature, Required),
            param("law", Kind::Choice(LAWS), Def(Ch("combined"))),
        ],
        conditions: &[],
        sweep_required: None,
        columns: &[
            real("n_th", ""),
            real("gamma_linear", "1/s"),
            real("gamma_nonlinear", "1/s"),
            real("gamma_nonlinear_ode", "1/s"),
            real("gamma", "1/s"),
            real("t_phi", "s"),
        ],
        eval: dephasing,
    },
    Experiment {
        name: "readout_sim",
        summary: "semiclassical readout trajectories, SNR and error versus time",
        params: with_readout_params![param("samples", Kind::Count { min: 2 }, Def(N(201)))],
        conditions: &[],
        sweep_required: None,
        columns: &[
            real("t", "s"),
            complex("alpha0", "sqrt(photons)"),
            complex("alpha1", "sqrt(photons)"),
            real("snr", ""),
            real("error", ""),
        ],
        eval: readout_sim,
    },
    Experiment {
        name: "kappa_sweep",
        summary: "readout error at t_end versus resonator linewidth",
        params: with_readout_params![],
        conditions: &[],
        sweep_required: Some("kappa"),
        columns: &[
            real("epsilon", "sqrt(photons) rad/s"),
            real("snr", ""),
            real("error", ""),
            real("photons0", ""),
            real("photons1", ""),
        ],
        eval: kappa_sweep,
    },
    Experiment {
        name: "overlap_scan",
        summary: "qubit-state overlaps versus photon number",
        params: with_cpt_params![
            param("model", Kind::Choice(MODELS), Def(Ch("mixed"))),
            param("nu_q", Kind::Frequency, Optional),
            param("nu_r", Kind::Frequency, Optional),
            param("g_x", Kind::Frequency, Optional),
            param("g_p", Kind::Frequency, Optional),
            param("n_max_scan", Kind::Count { min: 0 }, Def(N(10))),
            param("q_levels", Kind::Count { min: 2 }, Def(N(2))),
            param("threshold", Kind::Real, Def(Num(0.05))),
            param("n_max", Kind::Count { min: 1 }, Optional),
        ],
        conditions: &[Condition {
            when: "model",
            equals: "mixed",
            require: &["nu_q", "nu_r", "g_x", "g_p"],
        }],
        sweep_required: None,
        columns: &[
            integer("q"),
            integer("q_prime"),
            integer("n"),
            real("fidelity", ""),
            integer("critical_n"),
        ],
        eval: overlap,
    },
];

fn mixed_params(p: &Point, n_max: usize) -> MixedCouplingParams {
    MixedCouplingParams::new(p.num("nu_q"), p.num("nu_r"), p.num("g_x"), p.num("g_p"), n_max)
}

fn cpt_params(p: &Point) -> CptParams {
    CptParams {
        n_charge_max: p.count("n_charge_max").expect("default"),
        n_fock: p.count("n_fock").expect("default"),
        ng_prime: p.opt_num("ng_prime"),
        resonator: match p.choice("resonator") {
            "standard_lc" => ResonatorConvention::StandardLc,
            _ => ResonatorConvention::Direct,
        },
        ..CptParams::from_sum_delta(
            p.num("e_j_sigma"),
            p.num("e_j_delta"),
            p.num("e_c_sigma"),
            p.num("e_c_delta"),
            p.num("e_cr"),
            p.num("e_lr"),
            p.num("n_g"),
            p.num("phi_ext"),
        )
    }
}

fn shift_sweep(p: &Point) -> mixcoupling::Result<Rows> {
    let params = mixed_params(p, p.count("n_max").expect("default"));
    let s = mixed_model_shifts(&params)?;
    Ok(vec![vec![
        Cell::Real(s.chi),
        Cell::Real(s.chi_prime),
        Cell::Real(chi_perturbative(&params)?),
        Cell::Real(s.k_r0),
        Cell::Real(s.k_r1),
        Cell::Real(s.nu_r_dressed),
        Cell::Real(s.nu_q_dressed),
    ]])
}

fn cpt_sweep(p: &Point) -> mixcoupling::Result<Rows> {
    let ds = cpt_spectrum(&cpt_params(p), 3, 3)?;
    let s = extract_shifts(&ds)?;
    Ok(vec![vec![
        Cell::Real(s.chi),
        Cell::Real(s.chi_prime),
        Cell::Real(s.nu_q_dressed),
        Cell::Real(s.nu_r_dressed),
        s.nu_e.map_or(Cell::Missing, Cell::Real),
        Cell::Real(ds.min_overlap()),
    ]])
}

fn dephasing(p: &Point) -> mixcoupling::Result<Rows> {
    let (kappa, chi, chi_prime, nu_r, t) = (
        p.num("kappa"),
        p.num("chi"),
        p.num("chi_prime"),
        p.num("nu_r"),
        p.num("temperature"),
    );
    let law = match p.choice("law") {
        "linear" => DephasingLaw::Linear,
        "nonlinear" => DephasingLaw::Nonlinear,
        _ => DephasingLaw::Combined,
    };
    let dp = DephasingParams::thermal(kappa, chi, chi_prime, t, nu_r);
    let point = dephasing_curve(chi, chi_prime, kappa, nu_r, &[t], law)?[0];
    Ok(vec![vec![
        Cell::Real(point.n_th),
        Cell::Real(gamma_linear(&dp)?.gamma),
        Cell::Real(gamma_nonlinear_analytic(&dp)?.gamma),
        Cell::Real(gamma_ode(&dp, ZModel::Cubic)?.gamma),
        Cell::Real(point.gamma),
        Cell::Real(point.t_phi),
    ]])
}

fn readout_config(p: &Point) -> ReadoutConfig {
    let mut cfg = ReadoutConfig::new(
        p.num("kappa"),
        p.num("chi"),
        p.num("chi_prime"),
        p.num("n_steady"),
        p.num("t_end"),
    )
    .with_eta(p.num("eta"));
    cfg.snr_prefactor = p.num("snr_prefactor");
    if let Some(dt) = p.opt_num("dt") {
        cfg.dt = dt;
    }
    cfg.epsilon = p.opt_num("epsilon");
    cfg
}

fn readout_sim(p: &Point) -> mixcoupling::Result<Rows> {
    let traj = integrate_trajectory(&readout_config(p))?;
    let len = traj.times.len();
    let samples = p.count("samples").expect("default").min(len);
    let mut picked: Vec<usize> = (0..samples)
        .map(|i| (i as f64 * (len - 1) as f64 / (samples - 1) as f64).round() as usize)
        .collect();
    picked.dedup();
    Ok(picked
        .into_iter()
        .map(|i| {
            vec![
                Cell::Real(traj.times[i]),
                Cell::Complex(traj.alpha0[i]),
                Cell::Complex(traj.alpha1[i]),
                Cell::Real(traj.snr[i]),
                Cell::Real(traj.error[i]),
            ]
        })
        .collect())
}

fn kappa_sweep(p: &Point) -> mixcoupling::Result<Rows> {
    let traj = integrate_trajectory(&readout_config(p))?;
    let (p0, p1) = traj.final_photons();
    Ok(vec![vec![
        Cell::Real(traj.epsilon),
        Cell::Real(traj.final_snr()),
        Cell::Real(traj.final_error()),
        Cell::Real(p0),
        Cell::Real(p1),
    ]])
}

fn overlap(p: &Point) -> mixcoupling::Result<Rows> {
    use mixcoupling::diagnostics::critical_photon_estimate;

    let n_scan = p.count("n_max_scan").expect("default");
    let cutoff = n_scan + GUARD_LEVELS;
    let scan = match p.choice("model") {
        "cpt" => {
            let n_fock = p.count("n_fock").expect("default").max(cutoff);
            let params = CptParams {
                n_fock: p.count("n_max").unwrap_or(n_fock),
                ..cpt_params(p)
            };
            cpt_overlap_scan(&params, p.count("q_levels").expect("default"), n_scan)?
        }
        _ => mixed_model_overlap_scan(&mixed_params(p, p.count("n_max").unwrap_or(cutoff)), &[0, 1], &[0, 1], n_scan)?,
    };
    let critical = critical_photon_estimate(&scan, p.num("threshold"))?;
    Ok(scan
        .rows
        .iter()
        .map(|r| {
            let crit = critical
                .iter()
                .find(|c| c.q == r.q && c.q_prime == r.q_prime)
                .and_then(|c| c.n)
                .map_or(Cell::Missing, |n| Cell::Integer(n as i64));
            vec![
                Cell::Integer(r.q as i64),
                Cell::Integer(r.q_prime as i64),
                Cell::Integer(r.n as i64),
                Cell::Real(r.fidelity),
                crit,
            ]
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn catalog_is_consistent() {
        let names: BTreeSet<_> = CATALOG.iter().map(|e| e.name).collect();
        assert_eq!(names.len(), 6);
        for e in &CATALOG {
            let params: BTreeSet<_> = e.params.iter().map(|p| p.name).collect();
            assert_eq!(params.len(), e.params.len(), "{}: duplicate parameter", e.name);
            for c in e.conditions {
                assert!(params.contains(c.when));
                assert!(c.require.iter().all(|r| params.contains(r)));
            }
            if let Some(s) = e.sweep_required {
                assert!(params.contains(s));
            }
            for p in e.params {
                if let (Kind::Choice(opts), Fallback::Default(Value::Choice(d))) = (p.kind, p.fallback) {
                    assert!(opts.contains(&d), "{}.{}", e.name, p.name);
                }
            }
        }
    }

    #[test]
    fn catalog_lines() {
        let line = find("shift_sweep").unwrap().catalog_line();
        assert!(line.starts_with("shift_sweep"));
        assert!(line.contains("nu_q, nu_r, g_x, g_p"));
        assert!(find("cpt_sweep").unwrap().catalog_line().contains("[required: none]"));
    }
}
