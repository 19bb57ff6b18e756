//! Measured quantities: probability density, participation ratio, survival
//! probability and the (SP, dSP/dt) phase portrait.

use crate::error::{Error, Result};
use crate::lattice::WalkerState;

/// Scalar observable sampled at consecutive integer steps starting at `start`.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    name: String,
    start: u64,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(name: impl Into<String>, start: u64, values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            start,
            values,
        }
    }

    /// Samples `f(t)` for `t = start..=end`.
    pub fn from_fn(name: impl Into<String>, start: u64, end: u64, f: impl Fn(u64) -> f64) -> Self {
        Self::new(name, start, (start..=end).map(f).collect())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Time of the first sample.
    pub fn start(&self) -> u64 {
        self.start
    }

    /// Time of the last sample, or `None` if empty.
    pub fn end(&self) -> Option<u64> {
        (!self.values.is_empty()).then(|| self.start + self.values.len() as u64 - 1)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, t: u64) -> Option<f64> {
        let i = t.checked_sub(self.start)?;
        self.values.get(i as usize).copied()
    }

    /// `(t, value)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.start + i as u64, v))
    }

    /// Samples with `lo <= t <= hi`.
    pub fn window(&self, lo: u64, hi: u64) -> &[f64] {
        let Some(end) = self.end() else { return &[] };
        let lo = lo.max(self.start);
        let hi = hi.min(end);
        if lo > hi {
            return &[];
        }
        &self.values[(lo - self.start) as usize..=(hi - self.start) as usize]
    }
}

/// Coin-resolved and total probability per site at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityProfile {
    pub t: u64,
    /// Site of `probs[0]`.
    pub offset: i64,
    /// `[pL, pS, pR, pTotal]` per site.
    pub probs: Vec<[f64; 4]>,
}

impl DensityProfile {
    /// `[pL, pS, pR, pTotal]` at site `n`; zeros outside the stored window.
    pub fn at(&self, n: i64) -> [f64; 4] {
        let i = n - self.offset;
        if i < 0 {
            return [0.0; 4];
        }
        self.probs.get(i as usize).copied().unwrap_or([0.0; 4])
    }

    pub fn total(&self, n: i64) -> f64 {
        self.at(n)[3]
    }

    /// `(n, [pL, pS, pR, pTotal])` pairs over the stored window.
    pub fn iter(&self) -> impl Iterator<Item = (i64, [f64; 4])> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(move |(i, &p)| (self.offset + i as i64, p))
    }

    /// Σ_n pTotal
    pub fn sum(&self) -> f64 {
        self.probs.iter().map(|p| p[3]).sum()
    }
}

#[inline]
fn site_probs(site: &[num_complex::Complex64; 3]) -> [f64; 4] {
    let (l, s, r) = (site[0].norm_sqr(), site[1].norm_sqr(), site[2].norm_sqr());
    [l, s, r, l + s + r]
}

/// |ψ_{n,c}|² per coin component and |ψ_n|² = Σ_c |ψ_{n,c}|² per site.
pub fn probability_density(state: &WalkerState) -> DensityProfile {
    DensityProfile {
        t: state.time(),
        offset: state.offset(),
        probs: state.amplitudes().iter().map(site_probs).collect(),
    }
}

/// PR = 1 / Σ_n |ψ_n|⁴ over site totals.
pub fn participation_ratio(state: &WalkerState) -> f64 {
    let ipr: f64 = state
        .amplitudes()
        .iter()
        .map(|s| {
            let p = site_probs(s)[3];
            p * p
        })
        .sum();
    1.0 / ipr
}

/// SP = |ψ_{n=0}|², summed over the coin.
pub fn survival_probability(state: &WalkerState) -> f64 {
    site_probs(&state.site(0))[3]
}

/// One point of the (SP, dSP/dt) portrait.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct PortraitPoint {
    pub t: u64,
    pub sp: f64,
    /// Backward difference SP(t) − SP(t−1).
    pub velocity: f64,
}

/// Pairs each SP(t), t ≥ start + 1, with its backward difference.
pub fn phase_portrait(sp: &TimeSeries) -> Result<Vec<PortraitPoint>> {
    phase_portrait_every(sp, 1)
}

/// [`phase_portrait`] keeping every `every`-th point.
pub fn phase_portrait_every(sp: &TimeSeries, every: usize) -> Result<Vec<PortraitPoint>> {
    if sp.len() < 2 {
        return Err(Error::SeriesTooShort(format!(
            "phase portrait needs at least 2 samples, got {}",
            sp.len()
        )));
    }
    if every == 0 {
        return Err(crate::error::invalid("portrait subsampling must be >= 1"));
    }
    let v = sp.values();
    Ok(v.windows(2)
        .enumerate()
        .step_by(every)
        .map(|(i, w)| PortraitPoint {
            t: sp.start() + i as u64 + 1,
            sp: w[1],
            velocity: w[1] - w[0],
        })
        .collect())
}
