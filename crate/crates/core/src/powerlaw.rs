//! Continuous power-law tail fit with the lower cutoff chosen by minimizing the
//! Kolmogorov–Smirnov distance between the empirical tail and the fitted model
//! (maximum-likelihood exponent for each candidate cutoff).

use serde::Serialize;

/// Fewest tail samples a candidate cutoff may leave.
pub const MIN_TAIL: usize = 10;
/// Candidate cutoffs examined, spread evenly over the distinct sample values.
const MAX_CANDIDATES: usize = 256;
/// Above this many samples the KS scan runs on an evenly strided subsample of
/// the sorted data.
const MAX_SCAN: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub x_min: f64,
    pub alpha: f64,
    pub ks_distance: f64,
    pub tail_len: usize,
}

/// Returns `None` when fewer than [`MIN_TAIL`] positive finite samples exist or
/// the sample has no spread.
pub fn fit_tail(samples: &[f64]) -> Option<PowerLawFit> {
    let mut xs: Vec<f64> = samples
        .iter()
        .copied()
        .filter(|x| x.is_finite() && *x > 0.0)
        .collect();
    if xs.len() < MIN_TAIL {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    if xs.len() > MAX_SCAN {
        let stride = xs.len() as f64 / MAX_SCAN as f64;
        xs = (0..MAX_SCAN)
            .map(|k| xs[(k as f64 * stride) as usize])
            .collect();
    }
    if xs[0] == xs[xs.len() - 1] {
        return None;
    }

    let logs: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    // suffix[k] = sum of logs[k..]
    let mut suffix = vec![0.0; logs.len() + 1];
    for k in (0..logs.len()).rev() {
        suffix[k] = suffix[k + 1] + logs[k];
    }

    // first index of each distinct value that leaves a long enough tail
    let mut starts: Vec<usize> = Vec::new();
    for k in 0..xs.len().saturating_sub(MIN_TAIL - 1) {
        if k == 0 || xs[k] != xs[k - 1] {
            starts.push(k);
        }
    }
    if starts.len() > MAX_CANDIDATES {
        let stride = starts.len() as f64 / MAX_CANDIDATES as f64;
        starts = (0..MAX_CANDIDATES)
            .map(|c| starts[(c as f64 * stride) as usize])
            .collect();
    }

    let mut best: Option<PowerLawFit> = None;
    for &k in &starts {
        let n = (xs.len() - k) as f64;
        let log_min = logs[k];
        let spread = suffix[k] - n * log_min;
        if spread <= 0.0 {
            continue;
        }
        let alpha = 1.0 + n / spread;
        let mut ks: f64 = 0.0;
        for (t, &lx) in logs[k..].iter().enumerate() {
            let model = 1.0 - ((1.0 - alpha) * (lx - log_min)).exp();
            let below = t as f64 / n;
            let above = (t + 1) as f64 / n;
            ks = ks.max((model - below).abs()).max((above - model).abs());
        }
        if best.is_none_or(|b| ks < b.ks_distance) {
            best = Some(PowerLawFit {
                x_min: xs[k],
                alpha,
                ks_distance: ks,
                tail_len: xs.len() - k,
            });
        }
    }
    best
}
