//! Overlap diagnostics for the validity of the dispersive picture.
//!
//! For a labeled spectrum the qubit part of `|q,0⟩` is compared with that of
//! `|q′,n⟩` as the photon number grows. Same-state fidelities near one and
//! cross-state fidelities near zero mean the qubit label survives
//! dressing. A cross-state fidelity crossing a small threshold marks the
//! onset of hybridization.

use log::warn;

use crate::dispersive::{
    cpt_spectrum, label_dressed_states, BareBasis, DressedSpectrum, DEFAULT_OVERLAP_FLOOR,
};
use crate::error::{invalid, Result};
use crate::models::{build_mixed_spin_boson, CptParams, MixedCouplingParams};
use crate::quantum::{eigendecompose, fidelity, reduced_state, Factor};

/// Reference hybridization levels.
pub const DEFAULT_THRESHOLDS: [f64; 2] = [0.05, 0.1];

/// Photon levels kept above the scanned range.
pub const GUARD_LEVELS: usize = 5;

/// Fidelity jump between neighbouring photon numbers flagged as suspicious.
pub const JUMP_LIMIT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapRow {
    pub q: usize,
    pub q_prime: usize,
    pub n: usize,
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OverlapScan {
    pub model_id: String,
    /// Grouped by `(q, q′)` pair, ascending `n` within each group.
    pub rows: Vec<OverlapRow>,
    /// `(q, q′, n)` where `|F(n) − F(n−1)|` exceeded [`JUMP_LIMIT`].
    pub jumps: Vec<(usize, usize, usize)>,
}

impl OverlapScan {
    pub fn pair(&self, q: usize, q_prime: usize) -> impl Iterator<Item = &OverlapRow> {
        self.rows
            .iter()
            .filter(move |r| r.q == q && r.q_prime == q_prime)
    }
}

fn boson_cutoff(ds: &DressedSpectrum) -> Result<(usize, usize)> {
    let factors = ds.space.factors();
    let boson = factors
        .iter()
        .position(|f| matches!(f, Factor::Boson { .. }))
        .ok_or_else(|| invalid("space", "no resonator factor"))?;
    let n_max = match factors[boson] {
        Factor::Boson { n_max } => n_max,
        _ => unreachable!(),
    };
    if factors.len() != 2 {
        return Err(invalid("space", "expected a qubit factor and a resonator factor"));
    }
    Ok((1 - boson, n_max))
}

/// Fidelity of the reduced qubit states of `|q,0⟩` and `|q′,n⟩` for every
/// listed pair and `n ≤ n_max_scan`.
pub fn overlap_scan(
    ds: &DressedSpectrum,
    q_list: &[usize],
    q_prime_list: &[usize],
    n_max_scan: usize,
    model_id: &str,
) -> Result<OverlapScan> {
    let (qubit, n_max) = boson_cutoff(ds)?;
    if n_max_scan + GUARD_LEVELS > n_max {
        return Err(invalid(
            "n_max_scan",
            format!("{n_max_scan} leaves fewer than {GUARD_LEVELS} guard levels below cutoff {n_max}"),
        ));
    }
    let reduced = |q: usize, n: usize| reduced_state(&ds.vector(q, n)?, &ds.space, qubit);
    let mut rows = Vec::new();
    let mut jumps = Vec::new();
    for &q in q_list {
        let reference = reduced(q, 0)?;
        for &qp in q_prime_list {
            let mut prev: Option<f64> = None;
            for n in 0..=n_max_scan {
                let f = fidelity(&reference, &reduced(qp, n)?)?;
                if let Some(p) = prev {
                    if (f - p).abs() > JUMP_LIMIT {
                        warn!("{model_id}: fidelity |{q},0> vs |{qp},{n}> jumped from {p:.3} to {f:.3}");
                        jumps.push((q, qp, n));
                    }
                }
                prev = Some(f);
                rows.push(OverlapRow {
                    q,
                    q_prime: qp,
                    n,
                    fidelity: f,
                });
            }
        }
    }
    Ok(OverlapScan {
        model_id: model_id.to_string(),
        rows,
        jumps,
    })
}

/// Overlap scan of the mixed model; the Fock cutoff must leave the guard
/// levels above `n_max_scan`.
pub fn mixed_model_overlap_scan(
    p: &MixedCouplingParams,
    q_list: &[usize],
    q_prime_list: &[usize],
    n_max_scan: usize,
) -> Result<OverlapScan> {
    let h = build_mixed_spin_boson(p)?;
    let es = eigendecompose(&h)?;
    let basis = BareBasis::spin_boson(h.space(), p.nu_q, p.nu_r, 2, n_max_scan + 1)?;
    let ds = label_dressed_states(&es, &basis, DEFAULT_OVERLAP_FLOOR)?;
    overlap_scan(&ds, q_list, q_prime_list, n_max_scan, "mixed_spin_boson")
}

/// Overlap scan of the CPT over island levels `0..q_levels`.
pub fn cpt_overlap_scan(
    p: &CptParams,
    q_levels: usize,
    n_max_scan: usize,
) -> Result<OverlapScan> {
    let ds = cpt_spectrum(p, q_levels, n_max_scan + 1)?;
    let qs: Vec<usize> = (0..q_levels).collect();
    overlap_scan(&ds, &qs, &qs, n_max_scan, "cpt")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CriticalPhoton {
    pub q: usize,
    pub q_prime: usize,
    /// First photon number whose cross-state fidelity exceeds the threshold.
    pub n: Option<usize>,
}

/// First threshold crossing for every cross pair (`q ≠ q′`) in the scan.
pub fn critical_photon_estimate(scan: &OverlapScan, threshold: f64) -> Result<Vec<CriticalPhoton>> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(invalid("threshold", "must lie in (0, 1)"));
    }
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for r in &scan.rows {
        if r.q != r.q_prime && !pairs.contains(&(r.q, r.q_prime)) {
            pairs.push((r.q, r.q_prime));
        }
    }
    Ok(pairs
        .into_iter()
        .map(|(q, q_prime)| CriticalPhoton {
            q,
            q_prime,
            n: scan
                .pair(q, q_prime)
                .find(|r| r.fidelity > threshold)
                .map(|r| r.n),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{GHZ, MHZ};

    fn params(g: f64, n_max: usize) -> MixedCouplingParams {
        MixedCouplingParams::new(5.0 * GHZ, 8.0 * GHZ, g, g, n_max)
    }

    fn synthetic(values: &[f64]) -> OverlapScan {
        OverlapScan {
            model_id: "synthetic".into(),
            rows: values
                .iter()
                .enumerate()
                .map(|(n, &f)| OverlapRow { q: 0, q_prime: 1, n, fidelity: f })
                .collect(),
            jumps: vec![],
        }
    }

    #[test]
    fn zero_coupling_fidelities() {
        let scan = mixed_model_overlap_scan(&params(0.0, 15), &[0, 1], &[0, 1], 10).unwrap();
        for r in &scan.rows {
            let expected = if r.q == r.q_prime { 1.0 } else { 0.0 };
            assert!((r.fidelity - expected).abs() < 1e-12, "{r:?}");
        }
        assert_eq!(scan.rows.len(), 4 * 11);
    }

    #[test]
    fn perturbative_regime() {
        // g/Δ = 0.01
        let scan = mixed_model_overlap_scan(&params(30.0 * MHZ, 25), &[0, 1], &[0, 1], 20).unwrap();
        for r in scan.rows.iter().filter(|r| r.q == r.q_prime && r.n <= 10) {
            assert!(r.fidelity > 0.99, "{r:?}");
        }
        for n in 0..=20 {
            for q in 0..2 {
                let same = scan.pair(q, q).nth(n).unwrap().fidelity;
                let cross = scan.pair(q, 1 - q).nth(n).unwrap().fidelity;
                assert!(same >= cross);
            }
        }
        let crit = critical_photon_estimate(&scan, 0.05).unwrap();
        assert_eq!(crit.len(), 2);
        assert!(crit.iter().all(|c| c.n.is_none()));
        assert!(scan.jumps.is_empty());
    }

    #[test]
    fn guard_levels_enforced() {
        assert!(mixed_model_overlap_scan(&params(0.0, 14), &[0], &[0], 10).is_err());
        assert!(mixed_model_overlap_scan(&params(0.0, 15), &[0], &[0], 10).is_ok());
    }

    #[test]
    fn synthetic_crossings() {
        assert_eq!(critical_photon_estimate(&synthetic(&[0.0; 30]), 0.05).unwrap()[0].n, None);
        let mut values = vec![0.01; 40];
        for v in values.iter_mut().skip(25) {
            *v = 0.2;
        }
        assert_eq!(critical_photon_estimate(&synthetic(&values), 0.05).unwrap()[0].n, Some(25));
        assert!(critical_photon_estimate(&synthetic(&values), 1.0).is_err());
        assert!(critical_photon_estimate(&synthetic(&values), 0.0).is_err());
    }

    #[test]
    fn cpt_scan_runs() {
        let p = CptParams {
            n_fock: 12,
            ..CptParams::from_sum_delta(18.0 * GHZ, 0.0, 10.0 * GHZ, 0.0, 10.0 * GHZ, 100.0 * GHZ, 0.3, 2.8)
        };
        let scan = cpt_overlap_scan(&p, 2, 5).unwrap();
        assert_eq!(scan.model_id, "cpt");
        for r in &scan.rows {
            assert!((0.0..=1.0).contains(&r.fidelity));
        }
        assert!(scan.pair(0, 0).next().unwrap().fidelity > 0.999);
    }
}
