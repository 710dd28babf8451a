//! Dressed-state labeling and dispersive/Kerr shift extraction.
//!
//! Dressed levels are labeled `|q,n⟩` with `q` counting qubit levels upward
//! from the ground state. For the two-level models `q = 0` is σ_z = −1 and
//! `q = 1` is σ_z = +1. In that labeling the reference Hamiltonian
//! `χσ_z a†a + χ′σ_z a†a†aa` gives
//!
//! ```text
//! χ    = (ω_r,1 − ω_r,0) / 2        ω_r,q = E(q,1) − E(q,0)
//! K_q  = E(q,2) − 2E(q,1) + E(q,0)
//! χ′   = (K_1 − K_0) / 4
//! ```
//!
//! all reported in Hz.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::models::{
    build_cpt_hamiltonian, build_mixed_spin_boson, cpt_island_levels, CptParams,
    MixedCouplingParams,
};
use crate::quantum::{eigendecompose, CVector, EigenSystem, HilbertSpace, C64};
use crate::units::{angular, linear};

/// Minimum |⟨bare|dressed⟩|² accepted for a label.
pub const DEFAULT_OVERLAP_FLOOR: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct BareState {
    pub q: usize,
    pub n: usize,
    /// rad/s; fixes the labeling order.
    pub energy: f64,
    pub vector: CVector,
}

/// Reference states used to identify dressed eigenvectors.
#[derive(Debug, Clone)]
pub struct BareBasis {
    pub space: HilbertSpace,
    pub states: Vec<BareState>,
}

impl BareBasis {
    /// Product states of `SpinHalf ⊗ Boson`; `q_levels` must be 1 or 2.
    pub fn spin_boson(
        space: &HilbertSpace,
        nu_q: f64,
        nu_r: f64,
        q_levels: usize,
        n_levels: usize,
    ) -> Result<Self> {
        let n_cut = match space.factors() {
            [crate::quantum::Factor::SpinHalf, crate::quantum::Factor::Boson { n_max }] => *n_max,
            _ => return Err(invalid("space", format!("expected SpinHalf ⊗ Boson, got {space}"))),
        };
        if !(1..=2).contains(&q_levels) {
            return Err(invalid("q_levels", "a spin-1/2 has at most 2 levels"));
        }
        if n_levels == 0 || n_levels > n_cut + 1 {
            return Err(invalid(
                "n_levels",
                format!("{n_levels} photon levels requested with cutoff {n_cut}"),
            ));
        }
        let mut states = Vec::new();
        for q in 0..q_levels {
            let spin_digit = 1 - q;
            let sz = if q == 1 { 1.0 } else { -1.0 };
            for n in 0..n_levels {
                let mut v = CVector::zeros(space.dim());
                v[space.index_of(&[spin_digit, n])?] = C64::new(1.0, 0.0);
                states.push(BareState {
                    q,
                    n,
                    energy: sz * angular(nu_q) / 2.0 + n as f64 * angular(nu_r),
                    vector: v,
                });
            }
        }
        Ok(Self::sorted(space.clone(), states))
    }

    /// Island eigenstates at δ = 0 tensored with resonator Fock states.
    pub fn cpt(p: &CptParams, q_levels: usize, n_levels: usize) -> Result<Self> {
        let space = p.space()?;
        let island = cpt_island_levels(p)?;
        let dc = space.factor_dim(0);
        let df = space.factor_dim(1);
        if q_levels == 0 || q_levels > dc {
            return Err(invalid("q_levels", format!("{q_levels} of {dc} island levels")));
        }
        if n_levels == 0 || n_levels > df {
            return Err(invalid("n_levels", format!("{n_levels} of {df} Fock levels")));
        }
        let omega_r = angular(p.nu_r_bare());
        let mut states = Vec::new();
        for q in 0..q_levels {
            let iv = island.vector(q);
            for n in 0..n_levels {
                let mut v = CVector::zeros(space.dim());
                for k in 0..dc {
                    v[k * df + n] = iv[k];
                }
                states.push(BareState {
                    q,
                    n,
                    energy: island.energies[q] + n as f64 * omega_r,
                    vector: v,
                });
            }
        }
        Ok(Self::sorted(space, states))
    }

    fn sorted(space: HilbertSpace, mut states: Vec<BareState>) -> Self {
        // Stable sort keeps (q, n) order among equal bare energies.
        states.sort_by(|a, b| a.energy.total_cmp(&b.energy));
        Self { space, states }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedLevel {
    pub index: usize,
    /// rad/s.
    pub energy: f64,
    pub overlap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DressedSpectrum {
    pub labels: BTreeMap<(usize, usize), DressedLevel>,
    /// Eigenindices that carry no label.
    pub unassigned: Vec<usize>,
    /// Labels whose best candidate fell below the overlap floor.
    pub rejected: Vec<((usize, usize), f64)>,
    /// Dressed eigenvectors, columns indexed like the eigensystem.
    pub vectors: nalgebra::DMatrix<C64>,
    pub space: HilbertSpace,
}

impl DressedSpectrum {
    pub fn level(&self, q: usize, n: usize) -> Result<&DressedLevel> {
        self.labels.get(&(q, n)).ok_or(Error::MissingLabel { q, n })
    }

    pub fn energy(&self, q: usize, n: usize) -> Result<f64> {
        Ok(self.level(q, n)?.energy)
    }

    pub fn vector(&self, q: usize, n: usize) -> Result<CVector> {
        let idx = self.level(q, n)?.index;
        Ok(self.vectors.column(idx).into_owned())
    }

    pub fn min_overlap(&self) -> f64 {
        self.labels.values().map(|l| l.overlap).fold(1.0, f64::min)
    }
}

/// Greedy maximum-overlap labeling.
///
/// Bare states are visited in ascending bare energy; each takes the
/// still-free eigenvector with the largest overlap (ties go to the lower
/// eigenindex). A best overlap below `overlap_floor` leaves the label out.
pub fn label_dressed_states(
    es: &EigenSystem,
    basis: &BareBasis,
    overlap_floor: f64,
) -> Result<DressedSpectrum> {
    if basis.states.len() > es.len() {
        return Err(Error::TooManyLabels {
            requested: basis.states.len(),
            available: es.len(),
        });
    }
    if es.vectors.nrows() != basis.space.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.space.dim(),
            got: es.vectors.nrows(),
        });
    }
    let mut taken = vec![false; es.len()];
    let mut labels = BTreeMap::new();
    let mut rejected = Vec::new();
    for bare in &basis.states {
        let overlaps = es.vectors.adjoint() * &bare.vector;
        let mut best: Option<(usize, f64)> = None;
        for (j, amp) in overlaps.iter().enumerate() {
            if taken[j] {
                continue;
            }
            let ov = amp.norm_sqr();
            if best.map_or(true, |(_, b)| ov > b) {
                best = Some((j, ov));
            }
        }
        let (j, ov) = best.expect("fewer labels than eigenvectors");
        if ov >= overlap_floor {
            taken[j] = true;
            labels.insert(
                (bare.q, bare.n),
                DressedLevel {
                    index: j,
                    energy: es.energies[j],
                    overlap: ov.min(1.0),
                },
            );
        } else {
            rejected.push(((bare.q, bare.n), ov));
        }
    }
    let unassigned = (0..es.len()).filter(|&j| !taken[j]).collect();
    Ok(DressedSpectrum {
        labels,
        unassigned,
        rejected,
        vectors: es.vectors.clone(),
        space: basis.space.clone(),
    })
}

/// Shifts extracted from a labeled spectrum (all Hz).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftReport {
    pub chi: f64,
    pub chi_prime: f64,
    pub k_r0: f64,
    pub k_r1: f64,
    pub nu_r_dressed: f64,
    pub nu_q_dressed: f64,
    /// `|0,0⟩ → |2,0⟩` transition, when the model has a second excited level.
    pub nu_e: Option<f64>,
}

pub fn extract_shifts(ds: &DressedSpectrum) -> Result<ShiftReport> {
    let e = |q, n| ds.energy(q, n);
    let omega_r = |q| -> Result<f64> { Ok(e(q, 1)? - e(q, 0)?) };
    let kerr = |q| -> Result<f64> { Ok(e(q, 2)? - 2.0 * e(q, 1)? + e(q, 0)?) };
    let (wr0, wr1) = (omega_r(0)?, omega_r(1)?);
    let (k0, k1) = (linear(kerr(0)?), linear(kerr(1)?));
    let nu_e = match ds.energy(2, 0) {
        Ok(e20) => Some(linear(e20 - e(0, 0)?)),
        Err(_) => None,
    };
    Ok(ShiftReport {
        chi: linear(wr1 - wr0) / 2.0,
        chi_prime: (k1 - k0) / 4.0,
        k_r0: k0,
        k_r1: k1,
        nu_r_dressed: linear(wr0 + wr1) / 2.0,
        nu_q_dressed: linear(e(1, 0)? - e(0, 0)?),
        nu_e,
    })
}

fn detuning_denominator(p: &MixedCouplingParams) -> Result<f64> {
    if p.nu_q == p.nu_r {
        return Err(Error::Resonance);
    }
    Ok(p.nu_r * p.nu_r - p.nu_q * p.nu_q)
}

/// Leading-order dispersive shift as usually quoted for this model (Hz):
/// `[ω_q(g_X² + g_P²) − 2ω_r g_X g_P] / (ω_r² − ω_q²)`.
///
/// This carries a different normalization from [`extract_shifts`]; see
/// [`chi_perturbative`] for the directly comparable value.
pub fn chi_analytic(p: &MixedCouplingParams) -> Result<f64> {
    let d = detuning_denominator(p)?;
    Ok((p.nu_q * (p.g_x * p.g_x + p.g_p * p.g_p) - 2.0 * p.nu_r * p.g_x * p.g_p) / d)
}

/// Leading-order χ in the convention of [`extract_shifts`], equal to
/// `−2 · chi_analytic`.
pub fn chi_perturbative(p: &MixedCouplingParams) -> Result<f64> {
    Ok(-2.0 * chi_analytic(p)?)
}

/// Both `g_P` values with vanishing leading-order χ at fixed `g_X`:
/// `(g_X/ω_q)(ω_r ∓ √(ω_r² − ω_q²))`, lower branch first.
pub fn chi_zero_gp(g_x: f64, nu_q: f64, nu_r: f64) -> Result<(f64, f64)> {
    if !(nu_q > 0.0) {
        return Err(invalid("nu_q", "must be positive"));
    }
    if nu_r < nu_q {
        return Err(Error::NoRealRoot(format!(
            "ν_r = {nu_r:e} Hz below ν_q = {nu_q:e} Hz"
        )));
    }
    if nu_r == nu_q {
        return Err(Error::Resonance);
    }
    let root = (nu_r * nu_r - nu_q * nu_q).sqrt();
    Ok((g_x / nu_q * (nu_r - root), g_x / nu_q * (nu_r + root)))
}

/// Coefficients of `σ_z X²` and `σ_z P²` in the leading-order effective
/// Hamiltonian (Hz).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaHCoefficients {
    pub c_x2: f64,
    pub c_p2: f64,
}

impl DeltaHCoefficients {
    /// χ in the [`extract_shifts`] convention implied by these terms.
    pub fn chi(&self) -> f64 {
        2.0 * (self.c_x2 + self.c_p2)
    }

    /// Coefficient of the two-photon term `σ_z (a² + a†²)`.
    pub fn squeezing(&self) -> f64 {
        self.c_x2 - self.c_p2
    }
}

/// `c_X2 = (ω_r g_X g_P − ω_q g_X²)/(ω_r² − ω_q²)`,
/// `c_P2 = (ω_r g_X g_P − ω_q g_P²)/(ω_r² − ω_q²)`.
pub fn deltah_coefficients(p: &MixedCouplingParams) -> Result<DeltaHCoefficients> {
    let d = detuning_denominator(p)?;
    let cross = p.nu_r * p.g_x * p.g_p;
    Ok(DeltaHCoefficients {
        c_x2: (cross - p.nu_q * p.g_x * p.g_x) / d,
        c_p2: (cross - p.nu_q * p.g_p * p.g_p) / d,
    })
}

/// Labels `q ∈ {0,1}`, `n ∈ {0,1,2}` on the mixed model and extracts shifts.
pub fn mixed_model_shifts(p: &MixedCouplingParams) -> Result<ShiftReport> {
    extract_shifts(&mixed_model_spectrum(p, 3)?)
}

/// Labeled mixed-model spectrum with `n_levels` photon levels per qubit state.
pub fn mixed_model_spectrum(p: &MixedCouplingParams, n_levels: usize) -> Result<DressedSpectrum> {
    let h = build_mixed_spin_boson(p)?;
    let es = eigendecompose(&h)?;
    let basis = BareBasis::spin_boson(h.space(), p.nu_q, p.nu_r, 2, n_levels)?;
    label_dressed_states(&es, &basis, DEFAULT_OVERLAP_FLOOR)
}

/// Change of the extracted shifts when the Fock cutoff grows by five (Hz).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationNoise {
    pub chi: f64,
    pub chi_prime: f64,
}

/// Shifts at the given cutoff together with their truncation noise floor.
pub fn mixed_model_shifts_with_noise(
    p: &MixedCouplingParams,
) -> Result<(ShiftReport, TruncationNoise)> {
    let base = mixed_model_shifts(p)?;
    let finer = mixed_model_shifts(&p.with_n_max(p.n_max + 5))?;
    Ok((
        base,
        TruncationNoise {
            chi: (finer.chi - base.chi).abs(),
            chi_prime: (finer.chi_prime - base.chi_prime).abs(),
        },
    ))
}

/// Mixed-model shifts on the `g_X × g_P` grid, row-major in `g_X`.
pub fn shift_grid(
    base: &MixedCouplingParams,
    g_x: &[f64],
    g_p: &[f64],
) -> Vec<Result<ShiftReport>> {
    let points: Vec<(f64, f64)> = g_x
        .iter()
        .flat_map(|&gx| g_p.iter().map(move |&gp| (gx, gp)))
        .collect();
    points
        .par_iter()
        .map(|&(gx, gp)| mixed_model_shifts(&base.with_couplings(gx, gp)))
        .collect()
}

/// Labeled CPT spectrum with island levels `q < q_levels` and photon levels
/// `n < n_levels`.
pub fn cpt_spectrum(p: &CptParams, q_levels: usize, n_levels: usize) -> Result<DressedSpectrum> {
    let h = build_cpt_hamiltonian(p)?;
    let es = eigendecompose(&h)?;
    let basis = BareBasis::cpt(p, q_levels, n_levels)?;
    label_dressed_states(&es, &basis, DEFAULT_OVERLAP_FLOOR)
}

/// CPT shifts, including `ν_e` when the second excited island level labels.
pub fn cpt_shifts(p: &CptParams) -> Result<ShiftReport> {
    extract_shifts(&cpt_spectrum(p, 3, 3)?)
}

/// Energy of a labeled level in Hz, handy for reporting.
pub fn level_frequency(ds: &DressedSpectrum, q: usize, n: usize) -> Result<f64> {
    Ok(ds.energy(q, n)? / TAU)
}
