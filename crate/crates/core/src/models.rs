//! Model Hamiltonians.
//!
//! * [`build_mixed_spin_boson`]: a qubit coupled to one resonator through
//!   both quadratures,
//!   `H/ħ = (ω_q/2)σ_z + ω_r a†a + g_X σ_x X + g_P σ_y P` with
//!   `X = a† + a` and `P = i(a† − a)`.
//! * [`build_synthetic_dispersive`]: the diagonal dispersive + Kerr form used
//!   as a reference for shift extraction.
//! * [`build_cpt_hamiltonian`]: a Cooper pair transistor embedded in a
//!   resonator, written in the island charge basis.
//!
//! Parameters are linear frequencies (Hz). Returned operators are in rad/s.
//!
//! With σ_y = [[0, −i], [i, 0]] the coupling splits into a rotating part
//! proportional to `g_X − g_P` and a counter-rotating part proportional to
//! `g_X + g_P`. Setting `g_X = −g_P` therefore leaves a pure Jaynes-Cummings
//! interaction and `g_X = g_P` a pure anti-Jaynes-Cummings one.

use std::f64::consts::TAU;

use log::warn;

use crate::error::{invalid, Error, Result};
use crate::quantum::{
    annihilation, c, eigendecompose, embed, pauli, tensor, Axis, CMatrix, EigenSystem, Factor,
    HilbertSpace, Operator, C64, I,
};
use crate::units::angular;

fn positive(name: &'static str, value: f64) -> Result<()> {
    if !(value.is_finite() && value > 0.0) {
        return Err(invalid(name, format!("must be positive and finite, got {value}")));
    }
    Ok(())
}

fn finite(name: &'static str, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(invalid(name, format!("must be finite, got {value}")));
    }
    Ok(())
}

/// Parameters of the minimal mixed-coupling model (all Hz).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedCouplingParams {
    pub nu_q: f64,
    pub nu_r: f64,
    pub g_x: f64,
    pub g_p: f64,
    /// Highest Fock state kept.
    pub n_max: usize,
}

impl MixedCouplingParams {
    pub fn new(nu_q: f64, nu_r: f64, g_x: f64, g_p: f64, n_max: usize) -> Self {
        Self {
            nu_q,
            nu_r,
            g_x,
            g_p,
            n_max,
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("nu_q", self.nu_q)?;
        positive("nu_r", self.nu_r)?;
        finite("g_x", self.g_x)?;
        finite("g_p", self.g_p)?;
        if self.nu_q == self.nu_r {
            return Err(Error::Resonance);
        }
        if self.n_max < 1 {
            return Err(invalid("n_max", "photon cutoff must be at least 1"));
        }
        Ok(())
    }

    /// `|g_X|, |g_P| ≤ 0.1 |ν_r − ν_q|`.
    pub fn is_perturbative(&self) -> bool {
        let bound = 0.1 * (self.nu_r - self.nu_q).abs();
        self.g_x.abs() <= bound && self.g_p.abs() <= bound
    }

    pub fn with_couplings(&self, g_x: f64, g_p: f64) -> Self {
        Self { g_x, g_p, ..*self }
    }

    pub fn with_n_max(&self, n_max: usize) -> Self {
        Self { n_max, ..*self }
    }
}

pub fn build_mixed_spin_boson(p: &MixedCouplingParams) -> Result<Operator> {
    p.validate()?;
    if !p.is_perturbative() {
        warn!(
            "couplings g_X = {:.4e} Hz, g_P = {:.4e} Hz exceed 10% of the detuning",
            p.g_x, p.g_p
        );
    }
    let space = HilbertSpace::spin_boson(p.n_max)?;
    let a = annihilation(p.n_max)?;
    let ad = a.adjoint();
    let x = &ad + &a;
    let pq = (&ad - &a).scale(I);
    let n = &ad * &a;

    let sz = embed(&pauli(Axis::Z), 0, &space)?;
    let num = embed(&n, 1, &space)?;
    let sx_x = tensor(&pauli(Axis::X), &x);
    let sy_p = tensor(&pauli(Axis::Y), &pq);

    let h = &(&(&sz * (angular(p.nu_q) / 2.0)) + &(&num * angular(p.nu_r)))
        + &(&(&sx_x * angular(p.g_x)) + &(&sy_p * angular(p.g_p)));
    Ok(h)
}

/// `H/ħ = (ω_q/2)σ_z + ω_r a†a + χσ_z a†a + χ′σ_z a†a†aa`, diagonal in the
/// product basis. `chi` and `chi_prime` are in Hz.
pub fn build_synthetic_dispersive(
    chi: f64,
    chi_prime: f64,
    nu_r: f64,
    nu_q: f64,
    n_max: usize,
) -> Result<Operator> {
    if n_max < 3 {
        return Err(invalid("n_max", "synthetic model needs n_max >= 3"));
    }
    for (name, v) in [("chi", chi), ("chi_prime", chi_prime), ("nu_r", nu_r), ("nu_q", nu_q)] {
        finite(name, v)?;
    }
    let space = HilbertSpace::spin_boson(n_max)?;
    let mut diag = Vec::with_capacity(space.dim());
    for s in [1.0, -1.0] {
        for n in 0..=n_max {
            let n = n as f64;
            diag.push(
                s * angular(nu_q) / 2.0
                    + n * angular(nu_r)
                    + s * angular(chi) * n
                    + s * angular(chi_prime) * n * (n - 1.0),
            );
        }
    }
    Operator::diagonal(space, &diag)
}

/// How the resonator energies enter the Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResonatorConvention {
    /// `E_Cr n_δ² + E_Lr δ²`, giving `ν_r = 2√(E_Cr E_Lr)`.
    #[default]
    Direct,
    /// `4E_Cr n_δ² + (E_Lr/2) δ²`, giving `ν_r = √(8 E_Cr E_Lr)`.
    StandardLc,
}

/// Cooper pair transistor coupled to a resonator (energies in Hz).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CptParams {
    pub e_j1: f64,
    pub e_j2: f64,
    pub e_c1: f64,
    pub e_c2: f64,
    pub e_cr: f64,
    pub e_lr: f64,
    /// Island offset charge in units of 2e.
    pub n_g: f64,
    /// External flux in radians.
    pub phi_ext: f64,
    /// Island charges `round(n_g) ± n_charge_max` are kept.
    pub n_charge_max: usize,
    pub n_fock: usize,
    /// Two-level offset charge; defaults to `2 n_g − 1`.
    pub ng_prime: Option<f64>,
    pub resonator: ResonatorConvention,
}

impl CptParams {
    pub const DEFAULT_CHARGE_CUTOFF: usize = 6;
    pub const DEFAULT_FOCK_CUTOFF: usize = 14;

    /// Builds parameters from sums and differences of the junction energies.
    #[allow(clippy::too_many_arguments)]
    pub fn from_sum_delta(
        e_j_sigma: f64,
        e_j_delta: f64,
        e_c_sigma: f64,
        e_c_delta: f64,
        e_cr: f64,
        e_lr: f64,
        n_g: f64,
        phi_ext: f64,
    ) -> Self {
        Self {
            e_j1: (e_j_sigma + e_j_delta) / 2.0,
            e_j2: (e_j_sigma - e_j_delta) / 2.0,
            e_c1: (e_c_sigma + e_c_delta) / 2.0,
            e_c2: (e_c_sigma - e_c_delta) / 2.0,
            e_cr,
            e_lr,
            n_g,
            phi_ext,
            n_charge_max: Self::DEFAULT_CHARGE_CUTOFF,
            n_fock: Self::DEFAULT_FOCK_CUTOFF,
            ng_prime: None,
            resonator: ResonatorConvention::default(),
        }
    }

    pub fn e_j_sigma(&self) -> f64 {
        self.e_j1 + self.e_j2
    }

    pub fn e_j_delta(&self) -> f64 {
        self.e_j1 - self.e_j2
    }

    pub fn e_c_sigma(&self) -> f64 {
        self.e_c1 + self.e_c2
    }

    pub fn e_c_delta(&self) -> f64 {
        self.e_c1 - self.e_c2
    }

    /// Island charging energy.
    pub fn e_c_island(&self) -> f64 {
        self.e_c_sigma()
    }

    pub fn ng_prime(&self) -> f64 {
        self.ng_prime.unwrap_or(2.0 * self.n_g - 1.0)
    }

    /// Coefficients `(A, B)` of `A n_δ² + B δ²` in Hz.
    pub fn resonator_coefficients(&self) -> (f64, f64) {
        match self.resonator {
            ResonatorConvention::Direct => (self.e_cr, self.e_lr),
            ResonatorConvention::StandardLc => (4.0 * self.e_cr, self.e_lr / 2.0),
        }
    }

    /// Bare resonator frequency `2√(AB)` in Hz.
    pub fn nu_r_bare(&self) -> f64 {
        let (a, b) = self.resonator_coefficients();
        2.0 * (a * b).sqrt()
    }

    /// Zero-point amplitudes `(δ_zpf, n_zpf)`.
    pub fn zero_point(&self) -> (f64, f64) {
        let (a, b) = self.resonator_coefficients();
        ((a / (4.0 * b)).powf(0.25), (b / (4.0 * a)).powf(0.25))
    }

    pub fn charge_window(&self) -> (i64, i64) {
        let center = self.n_g.round() as i64;
        let w = self.n_charge_max as i64;
        (center - w, center + w)
    }

    pub fn validate(&self) -> Result<()> {
        positive("e_j1", self.e_j1)?;
        positive("e_j2", self.e_j2)?;
        positive("e_c1", self.e_c1)?;
        positive("e_c2", self.e_c2)?;
        positive("e_cr", self.e_cr)?;
        positive("e_lr", self.e_lr)?;
        finite("n_g", self.n_g)?;
        finite("phi_ext", self.phi_ext)?;
        if let Some(ng) = self.ng_prime {
            finite("ng_prime", ng)?;
        }
        if self.n_charge_max < 5 {
            return Err(invalid("n_charge_max", "must be at least 5"));
        }
        if self.n_fock < 3 {
            return Err(invalid("n_fock", "must be at least 3"));
        }
        Ok(())
    }

    pub fn space(&self) -> Result<HilbertSpace> {
        let (n_min, n_max) = self.charge_window();
        HilbertSpace::new(vec![
            Factor::Charge { n_min, n_max },
            Factor::Boson { n_max: self.n_fock },
        ])
    }
}

struct IslandOps {
    n_offset: Operator,
    cos_phi: Operator,
    sin_phi: Operator,
}

fn island_operators(p: &CptParams) -> Result<IslandOps> {
    let (n_min, n_max) = p.charge_window();
    let space = HilbertSpace::single(Factor::Charge { n_min, n_max })?;
    let dim = space.dim();
    let offsets: Vec<f64> = (n_min..=n_max).map(|n| n as f64 - p.n_g).collect();
    let n_offset = Operator::diagonal(space.clone(), &offsets)?;
    // up = Σ |n+1⟩⟨n|
    let mut up = CMatrix::zeros(dim, dim);
    for k in 0..dim - 1 {
        up[(k + 1, k)] = c(1.0);
    }
    let up = Operator::new(space, up)?;
    let cos_phi = &(&up + &up.adjoint()) * 0.5;
    let sin_phi = (&up - &up.adjoint()).scale(C64::new(0.0, -0.5));
    Ok(IslandOps {
        n_offset,
        cos_phi,
        sin_phi,
    })
}

/// Full CPT + resonator Hamiltonian on `Charge ⊗ Boson`.
///
/// ```text
/// H = A n_δ² + B δ² + E_CI (n_I − n_g)² − E_CΔ n_δ (n_I − n_g)
///     − E_JΣ cos((φ_ext + δ)/2) cos φ_I + E_JΔ sin((φ_ext + δ)/2) sin φ_I
/// ```
///
/// The flux-dependent cosine and sine of δ are exact matrix functions of
/// the truncated δ operator.
pub fn build_cpt_hamiltonian(p: &CptParams) -> Result<Operator> {
    p.validate()?;
    let island = island_operators(p)?;
    let (a_coef, b_coef) = p.resonator_coefficients();
    let (dz, nz) = p.zero_point();

    let b = annihilation(p.n_fock)?;
    let bd = b.adjoint();
    let delta = &(&b + &bd) * dz;
    let n_delta = (&bd - &b).scale(C64::new(0.0, nz));
    let h_res = &(&(&n_delta * &n_delta) * a_coef) + &(&(&delta * &delta) * b_coef);
    let half_angle_cos = delta.map_hermitian(|d| ((p.phi_ext + d) / 2.0).cos())?;
    let half_angle_sin = delta.map_hermitian(|d| ((p.phi_ext + d) / 2.0).sin())?;

    let id_island = Operator::identity(island.n_offset.space().clone());
    let id_res = Operator::identity(b.space().clone());
    let n2 = &island.n_offset * &island.n_offset;

    let terms = [
        tensor(&id_island, &h_res),
        &tensor(&n2, &id_res) * p.e_c_island(),
        &tensor(&island.n_offset, &n_delta) * (-p.e_c_delta()),
        &tensor(&island.cos_phi, &half_angle_cos) * (-p.e_j_sigma()),
        &tensor(&island.sin_phi, &half_angle_sin) * p.e_j_delta(),
    ];
    let mut h = Operator::zeros(p.space()?);
    for t in &terms {
        h = &h + t;
    }
    Ok(&h * TAU)
}

/// Island-only Hamiltonian at δ = 0, in rad/s. Its eigenstates serve as the
/// bare qubit levels when labeling CPT dressed states.
pub fn build_cpt_island_hamiltonian(p: &CptParams) -> Result<Operator> {
    p.validate()?;
    let island = island_operators(p)?;
    let n2 = &island.n_offset * &island.n_offset;
    let h = &(&(&n2 * p.e_c_island())
        + &(&island.cos_phi * (-p.e_j_sigma() * (p.phi_ext / 2.0).cos())))
        + &(&island.sin_phi * (p.e_j_delta() * (p.phi_ext / 2.0).sin()));
    Ok(&h * TAU)
}

pub fn cpt_island_levels(p: &CptParams) -> Result<EigenSystem> {
    eigendecompose(&build_cpt_island_hamiltonian(p)?)
}

/// Relative tolerance for the lowest CPT levels under cutoff increases.
pub const CPT_CONVERGENCE_TOL: f64 = 1e-6;

/// Checks that the six lowest CPT levels move by at most
/// [`CPT_CONVERGENCE_TOL`] (relative to the level spread) when the charge
/// cutoff grows by 3 and the Fock cutoff by 5. Returns the worst change.
pub fn check_cpt_convergence(p: &CptParams) -> Result<f64> {
    const LEVELS: usize = 6;
    let lowest = |q: &CptParams| -> Result<Vec<f64>> {
        let es = eigendecompose(&build_cpt_hamiltonian(q)?)?;
        Ok(es.energies[..LEVELS].to_vec())
    };
    let base = lowest(p)?;
    let scale = base
        .iter()
        .map(|e| e.abs())
        .fold(base[LEVELS - 1] - base[0], f64::max);
    let mut worst: f64 = 0.0;
    for (what, q) in [
        (
            "charge cutoff",
            CptParams {
                n_charge_max: p.n_charge_max + 3,
                ..*p
            },
        ),
        (
            "Fock cutoff",
            CptParams {
                n_fock: p.n_fock + 5,
                ..*p
            },
        ),
    ] {
        let other = lowest(&q)?;
        let change = base
            .iter()
            .zip(&other)
            .map(|(a, b)| (a - b).abs() / scale)
            .fold(0.0, f64::max);
        if change > CPT_CONVERGENCE_TOL {
            return Err(Error::NotConverged {
                what: format!("lowest CPT levels ({what})"),
                change,
            });
        }
        worst = worst.max(change);
    }
    Ok(worst)
}

/// Operator content of a two-level coupling term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingSignature {
    NDeltaSigmaZ,
    DeltaSigmaZ,
    Delta2SigmaZ,
    DeltaSigmaX,
    Delta2SigmaX,
}

impl CouplingSignature {
    pub fn label(&self) -> &'static str {
        match self {
            Self::NDeltaSigmaZ => "n_δ σ_z",
            Self::DeltaSigmaZ => "δ σ_z",
            Self::Delta2SigmaZ => "δ² σ_z",
            Self::DeltaSigmaX => "δ σ_x",
            Self::Delta2SigmaX => "δ² σ_x",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingTerm {
    pub signature: CouplingSignature,
    /// Hz.
    pub coefficient: f64,
}

/// Couplings of the CPT reduced to its two lowest charge states and rotated
/// into the island eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoLevelCouplings {
    pub z: C64,
    pub m: f64,
    pub eps_island: f64,
    /// Coefficient of `n_δ σ_x` (Hz).
    pub g_x_eff: f64,
    /// Coefficient of `δ σ_y` (Hz).
    pub g_p_eff: f64,
    /// Two-level island splitting `2 E_JΣ ε` (Hz).
    pub nu_q: f64,
    pub extra_terms: Vec<CouplingTerm>,
}

impl TwoLevelCouplings {
    pub fn term(&self, signature: CouplingSignature) -> Option<f64> {
        self.extra_terms
            .iter()
            .find(|t| t.signature == signature)
            .map(|t| t.coefficient)
    }
}

pub fn cpt_two_level_couplings(p: &CptParams) -> Result<TwoLevelCouplings> {
    p.validate()?;
    let ejs = p.e_j_sigma();
    let ejd = p.e_j_delta();
    let eci = p.e_c_island();
    let ecd = p.e_c_delta();
    let ngp = p.ng_prime();
    if eci < ejs {
        warn!("E_CI = {eci:.4e} Hz is below E_JΣ = {ejs:.4e} Hz; two-level reduction is rough");
    }
    let half = p.phi_ext / 2.0;
    let z = C64::new(-half.cos(), ejd / ejs * half.sin());
    let zabs = z.norm();
    if zabs < 1e-12 {
        return Err(Error::Degenerate(
            "|z| = 0: φ_ext = π with balanced junctions".into(),
        ));
    }
    let m = eci * ngp / (2.0 * ejs);
    let eps = (m * m + zabs * zabs).sqrt();
    let sin_phi = p.phi_ext.sin();
    let extra_terms = vec![
        CouplingTerm {
            signature: CouplingSignature::NDeltaSigmaZ,
            coefficient: ecd * eci * ngp / (4.0 * ejs * eps),
        },
        CouplingTerm {
            signature: CouplingSignature::DeltaSigmaZ,
            coefficient: (ejs * ejs + ejd * ejd) * sin_phi / (4.0 * ejs * eps),
        },
        CouplingTerm {
            signature: CouplingSignature::Delta2SigmaZ,
            coefficient: ejs * zabs * zabs / (4.0 * eps),
        },
        CouplingTerm {
            signature: CouplingSignature::DeltaSigmaX,
            coefficient: -eci * (ejs * ejs - ejd * ejd) * ngp * sin_phi / (4.0 * ejs * eps * zabs),
        },
        CouplingTerm {
            signature: CouplingSignature::Delta2SigmaX,
            coefficient: ejs * zabs * m / (4.0 * eps),
        },
    ];
    Ok(TwoLevelCouplings {
        z,
        m,
        eps_island: eps,
        g_x_eff: ecd * zabs / (2.0 * eps),
        g_p_eff: ejd / zabs,
        nu_q: 2.0 * ejs * eps,
        extra_terms,
    })
}
