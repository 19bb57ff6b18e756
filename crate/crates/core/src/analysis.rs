//! Quantitative signatures extracted from time series: power-law exponents
//! on geometrically binned data, plateau detection, and the metastable
//! lifetime τ_c read off a kink in PR(t).

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::observables::TimeSeries;

pub const DEFAULT_BIN_RATIO: f64 = 1.2;

/// Fits with fewer bins than this are rejected.
pub const MIN_FIT_BINS: usize = 5;

/// Result of a log-log least-squares fit `v ≈ amplitude · t^exponent`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub amplitude: f64,
    /// Standard error of the exponent.
    pub stderr: f64,
    pub r_squared: f64,
    /// Inclusive fit window `(t_min, t_max)`.
    pub window: (u64, u64),
    pub bins: usize,
}

/// Ordinary least squares `y = a + b x`; returns `(b, a, stderr(b), r²)`.
fn ols(x: &[f64], y: &[f64]) -> (f64, f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (xi, yi) in x.iter().zip(y) {
        let (dx, dy) = (xi - mx, yi - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let b = sxy / sxx;
    let a = my - b * mx;
    let ssr = (syy - b * sxy).max(0.0);
    let stderr = if x.len() > 2 {
        (ssr / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    let r2 = if syy > 0.0 { 1.0 - ssr / syy } else { 1.0 };
    (b, a, stderr, r2)
}

/// Splits `[t_min, t_max]` into consecutive bins whose lower edges grow by
/// `ratio` (each bin holds at least one step).
fn geometric_bins(t_min: u64, t_max: u64, ratio: f64) -> Vec<(u64, u64)> {
    let mut bins = Vec::new();
    let mut lo = t_min;
    while lo <= t_max {
        let hi = ((lo as f64 * ratio).ceil() as u64)
            .max(lo + 1)
            .min(t_max + 1);
        bins.push((lo, hi - 1));
        lo = hi;
    }
    bins
}

/// Fits a power law to `series` over `[t_min, t_max]`.
///
/// The series is first averaged over geometric bins (edges growing by
/// `bin_ratio`); OLS then runs on `(ln t̄, ln v̄)` of the bin means.
pub fn fit_power_law(
    series: &TimeSeries,
    t_min: u64,
    t_max: u64,
    bin_ratio: f64,
) -> Result<PowerLawFit> {
    if t_min < 1 {
        return Err(invalid("fit window must start at t >= 1"));
    }
    if t_max <= t_min {
        return Err(invalid(format!("empty fit window [{t_min}, {t_max}]")));
    }
    if !bin_ratio.is_finite() || bin_ratio <= 1.0 {
        return Err(invalid(format!("bin ratio must be > 1, got {bin_ratio}")));
    }
    match series.end() {
        Some(end) if series.start() <= t_min && t_max <= end => {}
        _ => {
            return Err(Error::SeriesTooShort(format!(
                "fit window [{t_min}, {t_max}] not covered by `{}` (t = {}..{:?})",
                series.name(),
                series.start(),
                series.end()
            )))
        }
    }

    let bins = geometric_bins(t_min, t_max, bin_ratio);
    if bins.len() < MIN_FIT_BINS {
        return Err(Error::Fit(format!(
            "only {} bins in [{t_min}, {t_max}] at ratio {bin_ratio}; need {MIN_FIT_BINS}",
            bins.len()
        )));
    }
    let mut lx = Vec::with_capacity(bins.len());
    let mut ly = Vec::with_capacity(bins.len());
    for &(lo, hi) in &bins {
        let vals = series.window(lo, hi);
        let count = vals.len() as f64;
        let mean_v = vals.iter().sum::<f64>() / count;
        let mean_t = (lo + hi) as f64 / 2.0;
        if mean_v.is_nan() || mean_v <= 0.0 {
            return Err(Error::Fit(format!(
                "bin [{lo}, {hi}] of `{}` has non-positive mean {mean_v}",
                series.name()
            )));
        }
        lx.push(mean_t.ln());
        ly.push(mean_v.ln());
    }
    let (exponent, intercept, stderr, r_squared) = ols(&lx, &ly);
    Ok(PowerLawFit {
        exponent,
        amplitude: intercept.exp(),
        stderr,
        r_squared,
        window: (t_min, t_max),
        bins: bins.len(),
    })
}

/// Plateau check between an early and a late window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Saturation {
    pub saturated: bool,
    /// Mean over the late window.
    pub level: f64,
    /// Mean over the early window.
    pub reference: f64,
}

/// Saturated iff `|mean(w2) − mean(w1)| ≤ rel_tol · mean(w1)`. Windows are
/// inclusive `(lo, hi)` step ranges and `w2` must start after `w1` ends.
pub fn detect_saturation(
    series: &TimeSeries,
    w1: (u64, u64),
    w2: (u64, u64),
    rel_tol: f64,
) -> Result<Saturation> {
    if w1.0 > w1.1 || w2.0 > w2.1 {
        return Err(invalid("saturation windows must satisfy lo <= hi"));
    }
    if w2.0 <= w1.1 {
        return Err(invalid(
            "saturation windows must be disjoint with w2 after w1",
        ));
    }
    let mean = |w: (u64, u64)| -> Result<f64> {
        let v = series.window(w.0, w.1);
        if v.is_empty() {
            return Err(Error::SeriesTooShort(format!(
                "window [{}, {}] of `{}` holds no samples",
                w.0,
                w.1,
                series.name()
            )));
        }
        Ok(v.iter().sum::<f64>() / v.len() as f64)
    };
    let reference = mean(w1)?;
    let level = mean(w2)?;
    Ok(Saturation {
        saturated: (level - reference).abs() <= rel_tol * reference,
        level,
        reference,
    })
}

/// Knobs of the τ_c detector.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetrapParams {
    /// Width of each sliding regression window (steps).
    pub window: usize,
    /// Absolute floor on the trigger slope (PR units per step).
    pub slope_threshold: f64,
    /// Consecutive windows that must stay above the trigger.
    pub sustain: usize,
    /// Trigger is at least this multiple of |baseline slope|.
    pub baseline_multiplier: f64,
}

impl Default for DetrapParams {
    fn default() -> Self {
        Self {
            window: 100,
            slope_threshold: 0.05,
            sustain: 50,
            baseline_multiplier: 5.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetrapResult {
    /// Start of the first window whose slope rises above the trigger and
    /// stays there; `None` if that never happens.
    pub tau_c: Option<u64>,
    /// Median sliding slope over the first 10% of the series.
    pub baseline_slope: f64,
    /// Slope at `tau_c`, or the steepest window slope if never triggered.
    pub trigger_slope: f64,
    /// The trigger level actually used.
    pub threshold: f64,
}

/// Least-squares slope of every length-`window` stretch of `values`;
/// element `s` covers `values[s..s + window]`.
pub fn sliding_slopes(values: &[f64], window: usize) -> Vec<f64> {
    if window < 2 || values.len() < window {
        return Vec::new();
    }
    let w = window as f64;
    let mx = (w - 1.0) / 2.0;
    let sxx: f64 = (0..window).map(|i| (i as f64 - mx).powi(2)).sum();
    values
        .windows(window)
        .map(|ys| {
            let my = ys.iter().sum::<f64>() / w;
            let sxy: f64 = ys
                .iter()
                .enumerate()
                .map(|(i, y)| (i as f64 - mx) * (y - my))
                .sum();
            sxy / sxx
        })
        .collect()
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let m = s.len() / 2;
    if s.len().is_multiple_of(2) {
        (s[m - 1] + s[m]) / 2.0
    } else {
        s[m]
    }
}

/// Locates the end of the metastable plateau in a PR series: the first point
/// where the sliding-window slope jumps above
/// `max(slope_threshold, baseline_multiplier · |baseline|)` for `sustain`
/// consecutive windows. Only the first such transition is reported.
pub fn detect_detrapping_time(pr: &TimeSeries, params: &DetrapParams) -> Result<DetrapResult> {
    if params.window < 10 {
        return Err(invalid(format!(
            "detrap window must be >= 10, got {}",
            params.window
        )));
    }
    if params.sustain < 1 {
        return Err(invalid("detrap sustain must be >= 1"));
    }
    if pr.len() < 2 * params.window {
        return Err(Error::SeriesTooShort(format!(
            "detrap window {} needs at least {} samples, got {}",
            params.window,
            2 * params.window,
            pr.len()
        )));
    }
    let slopes = sliding_slopes(pr.values(), params.window);
    let head = (pr.len() / 10).clamp(1, slopes.len());
    let baseline_slope = median(&slopes[..head]);
    let threshold = params
        .slope_threshold
        .max(params.baseline_multiplier * baseline_slope.abs());

    let mut run = 0usize;
    let mut tau = None;
    for (s, &k) in slopes.iter().enumerate() {
        if k > threshold {
            run += 1;
            if run == params.sustain {
                tau = Some(s + 1 - params.sustain);
                break;
            }
        } else {
            run = 0;
        }
    }
    let trigger_slope = match tau {
        Some(s) => slopes[s],
        None => slopes.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    };
    Ok(DetrapResult {
        tau_c: tau.map(|s| pr.start() + s as u64),
        baseline_slope,
        trigger_slope,
        threshold,
    })
}

/// Fit window for the radiation tail: starts one detector window after τ_c
/// (or at `fallback.0` when nothing triggered) and ends at `t_end`.
pub fn radiation_window(
    detrap: &DetrapResult,
    params: &DetrapParams,
    fallback: (u64, u64),
    t_end: u64,
) -> (u64, u64) {
    match detrap.tau_c {
        Some(tau) => ((tau + params.window as u64).max(1), t_end),
        None => (fallback.0, fallback.1.min(t_end)),
    }
}
