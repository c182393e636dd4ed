//! Prony series fitted to frequency-domain storage and loss moduli.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::MaterialError;
use crate::dma::FrequencySweep;
use crate::numeric::golden_section;
use crate::numeric::nnls::nnls;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PronyTerm {
    pub e_mpa: f64,
    pub tau_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PronySeries {
    pub terms: Vec<PronyTerm>,
    pub e_infinity: f64,
}

impl PronySeries {
    pub fn instantaneous_modulus(&self) -> f64 {
        self.e_infinity + self.terms.iter().map(|t| t.e_mpa).sum::<f64>()
    }

    pub fn storage(&self, freq_hz: f64) -> f64 {
        let w = 2.0 * PI * freq_hz;
        self.e_infinity
            + self
                .terms
                .iter()
                .map(|t| {
                    let x = w * t.tau_s;
                    t.e_mpa * x * x / (1.0 + x * x)
                })
                .sum::<f64>()
    }

    pub fn loss(&self, freq_hz: f64) -> f64 {
        let w = 2.0 * PI * freq_hz;
        self.terms
            .iter()
            .map(|t| {
                let x = w * t.tau_s;
                t.e_mpa * x / (1.0 + x * x)
            })
            .sum()
    }

    pub fn validate(&self) -> Result<(), MaterialError> {
        if self.terms.iter().any(|t| !(t.e_mpa >= 0.0) || !(t.tau_s > 0.0)) {
            return Err(MaterialError::InvalidCard("Prony moduli must be >= 0 and taus > 0".into()));
        }
        if self.terms.windows(2).any(|w| w[1].tau_s <= w[0].tau_s) {
            return Err(MaterialError::InvalidCard("Prony taus must be strictly increasing".into()));
        }
        if !(self.e_infinity >= 0.0) {
            return Err(MaterialError::InvalidCard("e_infinity must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PronyFit {
    pub series: PronySeries,
    /// Relative RMS misfit of the storage modulus.
    pub storage_rel_rms: f64,
    /// Relative RMS misfit of the loss modulus.
    pub loss_rel_rms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PronyOptions {
    /// One pass of per-tau golden-section refinement after the fixed-grid
    /// solve.
    pub refine: bool,
    /// How far (decades) the outermost taus may move past the band spanned
    /// by the sweep frequencies.
    pub margin_decades: f64,
}

impl Default for PronyOptions {
    fn default() -> Self {
        Self {
            refine: true,
            margin_decades: 1.0,
        }
    }
}

const NNLS_MAX_ITER: usize = 500;

struct Data {
    omega: Vec<f64>,
    storage: Vec<f64>,
    loss: Vec<f64>,
}

impl Data {
    fn system(&self, log_taus: &[f64]) -> (DMatrix<f64>, DVector<f64>) {
        let n = self.omega.len();
        let k = log_taus.len();
        let mut a = DMatrix::zeros(2 * n, k + 1);
        let mut b = DVector::zeros(2 * n);
        for (i, &w) in self.omega.iter().enumerate() {
            a[(i, 0)] = 1.0 / self.storage[i];
            b[i] = 1.0;
            b[n + i] = 1.0;
            for (j, lt) in log_taus.iter().enumerate() {
                let x = w * 10f64.powf(*lt);
                let d = 1.0 + x * x;
                a[(i, j + 1)] = x * x / d / self.storage[i];
                a[(n + i, j + 1)] = x / d / self.loss[i];
            }
        }
        (a, b)
    }

    fn solve(&self, log_taus: &[f64]) -> Result<(DVector<f64>, f64), MaterialError> {
        let (a, b) = self.system(log_taus);
        let sol = nnls(&a, &b, NNLS_MAX_ITER).ok_or(MaterialError::NonConvergence(
            "non-negative least squares did not converge".into(),
        ))?;
        Ok((sol.x, sol.residual_norm))
    }
}

/// Fit with default options.
pub fn fit_prony(sweep: &FrequencySweep, n_terms: usize) -> Result<PronyFit, MaterialError> {
    fit_prony_with(sweep, n_terms, &PronyOptions::default())
}

pub fn fit_prony_with(
    sweep: &FrequencySweep,
    n_terms: usize,
    opts: &PronyOptions,
) -> Result<PronyFit, MaterialError> {
    if n_terms == 0 || sweep.rows.len() < 2 * n_terms {
        return Err(MaterialError::InsufficientData {
            rows: sweep.rows.len(),
            n_terms,
        });
    }
    if sweep
        .rows
        .iter()
        .any(|r| !(r.freq_hz > 0.0 && r.storage_mpa > 0.0 && r.loss_mpa > 0.0))
    {
        return Err(MaterialError::InvalidCard(
            "sweep rows need positive frequency, storage and loss".into(),
        ));
    }
    let data = Data {
        omega: sweep.rows.iter().map(|r| 2.0 * PI * r.freq_hz).collect(),
        storage: sweep.rows.iter().map(|r| r.storage_mpa).collect(),
        loss: sweep.rows.iter().map(|r| r.loss_mpa).collect(),
    };
    let f_min = sweep.rows.iter().map(|r| r.freq_hz).fold(f64::INFINITY, f64::min);
    let f_max = sweep.rows.iter().map(|r| r.freq_hz).fold(0.0, f64::max);
    let lo = (1.0 / (2.0 * PI * f_max)).log10();
    let hi = (1.0 / (2.0 * PI * f_min)).log10();

    let mut log_taus: Vec<f64> = if n_terms == 1 {
        vec![0.5 * (lo + hi)]
    } else {
        (0..n_terms)
            .map(|k| lo + (hi - lo) * k as f64 / (n_terms - 1) as f64)
            .collect()
    };

    if opts.refine {
        // Keep neighbours strictly ordered.
        let gap = 1e-6;
        for k in 0..n_terms {
            let lower = if k == 0 { lo - opts.margin_decades } else { log_taus[k - 1] + gap };
            let upper = if k + 1 == n_terms {
                hi + opts.margin_decades
            } else {
                log_taus[k + 1] - gap
            };
            if upper <= lower {
                continue;
            }
            let current = data.solve(&log_taus)?.1;
            let mut trial = log_taus.clone();
            let (best, score) = golden_section(
                |t| {
                    trial[k] = t;
                    data.solve(&trial).map(|s| s.1).unwrap_or(f64::INFINITY)
                },
                lower,
                upper,
                48,
            );
            if score < current {
                log_taus[k] = best;
            }
        }
    }

    let (x, _) = data.solve(&log_taus)?;
    let series = PronySeries {
        e_infinity: x[0],
        terms: log_taus
            .iter()
            .enumerate()
            .map(|(j, lt)| PronyTerm {
                e_mpa: x[j + 1],
                tau_s: 10f64.powf(*lt),
            })
            .collect(),
    };
    let (sr, lr) = relative_misfit(&series, sweep);
    Ok(PronyFit {
        series,
        storage_rel_rms: sr,
        loss_rel_rms: lr,
    })
}

/// Relative RMS misfit of storage and loss against a sweep.
pub fn relative_misfit(series: &PronySeries, sweep: &FrequencySweep) -> (f64, f64) {
    let n = sweep.rows.len().max(1) as f64;
    let s = sweep
        .rows
        .iter()
        .map(|r| ((series.storage(r.freq_hz) - r.storage_mpa) / r.storage_mpa).powi(2))
        .sum::<f64>();
    let l = sweep
        .rows
        .iter()
        .map(|r| ((series.loss(r.freq_hz) - r.loss_mpa) / r.loss_mpa).powi(2))
        .sum::<f64>();
    ((s / n).sqrt(), (l / n).sqrt())
}

/// True when the loss tangent reaches 1 anywhere in the sweep.
pub fn check_viscoelastic_dominance(sweep: &FrequencySweep) -> bool {
    sweep.rows.iter().any(|r| r.tan_delta >= 1.0)
}
