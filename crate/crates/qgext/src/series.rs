//! Convergence decisions for nonnegative series.
//!
//! The verdicts here gate every volume and membership classification, so they
//! are deliberately conservative: `Converges` and `Diverges` are only issued
//! with an explicit certificate, everything else stays `Inconclusive`.
//!
//! Certificates:
//! - ratio: the term ratio stays below 1 on a trailing window and the
//!   geometric tail bound drops below an absolute tolerance. Decisive for the
//!   factorially decaying series produced by the antitree constructions.
//! - comparison: a log-log fit of the trailing window against `n^p`. Slopes
//!   steeper than [`SummabilityOptions::comparison_converge_slope`] certify a
//!   p-series majorant with an integral tail bound; slopes above
//!   [`SummabilityOptions::comparison_diverge_slope`] (with terms bounded away
//!   from zero) certify a divergent minorant. This covers the polynomially
//!   decaying rope-ladder series where the ratio test degenerates to 1.
//! - threshold: partial sums crossing a configurable divergence threshold.

use serde::{Deserialize, Serialize};

use crate::report::F17;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Ratio,
    Comparison,
    Threshold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "decision", rename_all = "snake_case")]
pub enum Decision {
    /// The partial sums converge; the full sum lies in
    /// `[estimate, estimate + bound_gap]`.
    Converges { estimate: F17, bound_gap: F17 },
    Diverges { threshold_crossed: bool },
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummabilityVerdict {
    #[serde(flatten)]
    pub decision: Decision,
    pub method: Option<Method>,
    /// Sampled partial sums (uniform stride, always including the last).
    pub partial_sums: Vec<F17>,
}

impl SummabilityVerdict {
    pub fn converges(&self) -> bool {
        matches!(self.decision, Decision::Converges { .. })
    }

    pub fn diverges(&self) -> bool {
        matches!(self.decision, Decision::Diverges { .. })
    }

    pub fn is_inconclusive(&self) -> bool {
        matches!(self.decision, Decision::Inconclusive)
    }

    /// Last computed partial sum.
    pub fn partial_sum(&self) -> f64 {
        self.partial_sums.last().map(|x| x.0).unwrap_or(0.0)
    }

    /// Upper estimate of the full sum; only meaningful for `Converges`.
    pub fn upper_estimate(&self) -> Option<f64> {
        match self.decision {
            Decision::Converges { estimate, bound_gap } => Some(estimate.0 + bound_gap.0),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummabilityOptions {
    /// Fraction of the samples forming the trailing analysis window.
    pub window_frac: f64,
    /// Absolute tolerance on the geometric tail bound.
    pub geometric_tail_tol: f64,
    /// Partial-sum level treated as divergence.
    pub divergence_threshold: f64,
    /// Log-log slope at or below which a p-series majorant is certified.
    pub comparison_converge_slope: f64,
    /// Log-log slope at or above which (with terms bounded below) a divergent
    /// minorant is certified.
    pub comparison_diverge_slope: f64,
    /// Keep at most this many sampled partial sums in the verdict.
    pub max_samples: usize,
}

impl Default for SummabilityOptions {
    fn default() -> Self {
        SummabilityOptions {
            window_frac: 0.25,
            geometric_tail_tol: 1e-9,
            divergence_threshold: 1e6,
            comparison_converge_slope: -1.5,
            comparison_diverge_slope: -0.5,
            max_samples: 256,
        }
    }
}

/// Classifies the nonnegative series with the given term sequence.
pub fn analyze(terms: &[f64], opts: &SummabilityOptions) -> SummabilityVerdict {
    let mut partial = Vec::with_capacity(terms.len());
    let mut sum = 0.0f64;
    for &t in terms {
        debug_assert!(t >= 0.0, "series terms must be nonnegative");
        sum += t;
        partial.push(sum);
    }
    let sampled = sample(&partial, opts.max_samples);

    let verdict = |decision: Decision, method: Option<Method>| SummabilityVerdict {
        decision,
        method,
        partial_sums: sampled.clone(),
    };

    if terms.iter().all(|&t| t == 0.0) {
        return verdict(
            Decision::Converges {
                estimate: F17(0.0),
                bound_gap: F17(0.0),
            },
            Some(Method::Ratio),
        );
    }
    if sum > opts.divergence_threshold {
        return verdict(
            Decision::Diverges {
                threshold_crossed: true,
            },
            Some(Method::Threshold),
        );
    }

    let window_len = ((terms.len() as f64 * opts.window_frac).ceil() as usize).max(4);
    if terms.len() < window_len + 4 {
        return verdict(Decision::Inconclusive, None);
    }
    let window_start = terms.len() - window_len;
    let window = &terms[window_start..];

    // An eventually-zero series sums exactly.
    if window.iter().all(|&t| t == 0.0) {
        return verdict(
            Decision::Converges {
                estimate: F17(sum),
                bound_gap: F17(0.0),
            },
            Some(Method::Ratio),
        );
    }
    if window.iter().any(|&t| t == 0.0) {
        return verdict(Decision::Inconclusive, None);
    }

    // Ratio certificate with geometric tail bound.
    let mut ratio_max = 0.0f64;
    for pair in window.windows(2) {
        ratio_max = ratio_max.max(pair[1] / pair[0]);
    }
    if ratio_max < 1.0 {
        let tail = window[window.len() - 1] * ratio_max / (1.0 - ratio_max);
        if tail <= opts.geometric_tail_tol {
            return verdict(
                Decision::Converges {
                    estimate: F17(sum),
                    bound_gap: F17(tail),
                },
                Some(Method::Ratio),
            );
        }
    }

    // Comparison against n^p via a least-squares log-log fit on the window.
    let slope = log_log_slope(window, window_start);
    if slope >= opts.comparison_diverge_slope {
        let scale = terms.iter().cloned().fold(0.0, f64::max);
        let floor = 1e-12 * (1.0 + scale);
        if window.iter().all(|&t| t >= floor) {
            return verdict(
                Decision::Diverges {
                    threshold_crossed: false,
                },
                Some(Method::Comparison),
            );
        }
    }
    if slope <= opts.comparison_converge_slope && ratio_max <= 1.0 + 1e-9 {
        // majorant C n^p with p = slope, C fitted as the window maximum
        let p = slope;
        let mut c = 0.0f64;
        for (k, &t) in window.iter().enumerate() {
            let n = (window_start + k + 1) as f64;
            c = c.max(t * n.powf(-p));
        }
        let n_last = terms.len() as f64;
        let tail = c * n_last.powf(p + 1.0) / (-p - 1.0);
        return verdict(
            Decision::Converges {
                estimate: F17(sum),
                bound_gap: F17(tail),
            },
            Some(Method::Comparison),
        );
    }

    verdict(Decision::Inconclusive, None)
}

/// Analyze with default thresholds.
pub fn analyze_default(terms: &[f64]) -> SummabilityVerdict {
    analyze(terms, &SummabilityOptions::default())
}

fn log_log_slope(window: &[f64], window_start: usize) -> f64 {
    let mut sx = 0.0;
    let mut sy = 0.0;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let m = window.len() as f64;
    for (k, &t) in window.iter().enumerate() {
        let x = ((window_start + k + 1) as f64).ln();
        let y = t.ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let denom = m * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return 0.0;
    }
    (m * sxy - sx * sy) / denom
}

fn sample(partial: &[f64], max_samples: usize) -> Vec<F17> {
    if partial.is_empty() {
        return Vec::new();
    }
    if partial.len() <= max_samples {
        return partial.iter().copied().map(F17).collect();
    }
    let stride = partial.len().div_ceil(max_samples);
    let mut out: Vec<F17> = partial.iter().copied().step_by(stride).map(F17).collect();
    if out.last().map(|x| x.0) != partial.last().copied() {
        out.push(F17(*partial.last().unwrap()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_series_converges_by_ratio() {
        let terms: Vec<f64> = (0..60).map(|n| 0.5f64.powi(n)).collect();
        let v = analyze_default(&terms);
        assert!(v.converges());
        assert_eq!(v.method, Some(Method::Ratio));
        let upper = v.upper_estimate().unwrap();
        assert!((v.partial_sum() - 2.0).abs() < 1e-12);
        assert!(upper >= 2.0 && upper - 2.0 < 1e-8);
    }

    #[test]
    fn quadratic_decay_converges_by_comparison() {
        let terms: Vec<f64> = (1..200).map(|n| (n as f64).powi(-2)).collect();
        let v = analyze_default(&terms);
        assert!(v.converges(), "got {:?}", v.decision);
        assert_eq!(v.method, Some(Method::Comparison));
        // true sum is π²/6; the certificate must bracket it
        let total = std::f64::consts::PI.powi(2) / 6.0;
        assert!(v.partial_sum() <= total);
        assert!(v.upper_estimate().unwrap() >= total - 1e-9);
    }

    #[test]
    fn constant_terms_diverge_by_comparison() {
        let terms = vec![0.5; 100];
        let v = analyze_default(&terms);
        assert!(v.diverges());
        assert_eq!(v.method, Some(Method::Comparison));
    }

    #[test]
    fn growing_sums_cross_threshold() {
        let terms = vec![1e5; 20];
        let v = analyze_default(&terms);
        assert!(v.diverges());
        assert_eq!(v.method, Some(Method::Threshold));
    }

    #[test]
    fn harmonic_series_is_inconclusive() {
        // slope -1 sits between the divergence and convergence margins: the
        // honest answer at finite horizon
        let terms: Vec<f64> = (1..500).map(|n| 1.0 / n as f64).collect();
        let v = analyze_default(&terms);
        assert!(v.is_inconclusive());
    }

    #[test]
    fn zero_series_converges_exactly() {
        let v = analyze_default(&[0.0; 12]);
        assert!(v.converges());
        assert_eq!(v.upper_estimate(), Some(0.0));
    }

    #[test]
    fn eventually_zero_series_sums_exactly() {
        let mut terms = vec![1.0, 2.0, 0.25];
        terms.extend(vec![0.0; 40]);
        let v = analyze_default(&terms);
        assert!(v.converges());
        assert_eq!(v.partial_sum(), 3.25);
        assert_eq!(v.upper_estimate(), Some(3.25));
    }

    #[test]
    fn factorial_decay_certifies_tiny_tail() {
        let mut terms = Vec::new();
        let mut t = 1.0f64;
        for n in 1..30 {
            t /= (n * 6) as f64;
            terms.push(t);
        }
        let v = analyze_default(&terms);
        assert!(v.converges());
        assert_eq!(v.method, Some(Method::Ratio));
        match v.decision {
            Decision::Converges { bound_gap, .. } => assert!(bound_gap.0 <= 1e-9),
            _ => unreachable!(),
        }
    }
}
