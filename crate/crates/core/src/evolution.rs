//! One step of the nonlinear walk is `Û(t) = Ŝ [Ĉ ⊗ I] Û_nl(t-1)`:
//! a Kerr-type self-phase on every component, the Grover coin on every site,
//! then the conditional shift. No operator matrix is ever built; each step
//! is a fused phase+coin pass followed by an in-place shift.

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;

use crate::error::{invalid, Error, Result};
use crate::lattice::WalkerState;
use crate::observables::{participation_ratio, probability_density, survival_probability};
use crate::observables::{DensityProfile, TimeSeries};

/// `evolve` aborts once `|norm - 1|` exceeds this.
pub const NORM_ABORT_TOL: f64 = 1e-8;

/// Above this χ the phase 2πχ|ψ|² can wrap more than once per step.
pub const CHI_WARN_ABOVE: f64 = 2.0;

/// Parameters of a single step.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct StepParams {
    /// Nonlinearity strength χ.
    pub chi: f64,
}

impl StepParams {
    pub fn new(chi: f64) -> Result<Self> {
        if !chi.is_finite() || chi < 0.0 {
            return Err(invalid(format!("chi must be finite and >= 0, got {chi}")));
        }
        if chi > CHI_WARN_ABOVE {
            log::warn!("chi = {chi} exceeds {CHI_WARN_ABOVE}; the nonlinear phase wraps");
        }
        Ok(Self { chi })
    }

    pub fn linear() -> Self {
        Self { chi: 0.0 }
    }
}

#[inline(always)]
fn kerr_phase(a: C64, strength: f64) -> C64 {
    let (s, c) = (strength * a.norm_sqr()).sin_cos();
    C64::new(a.re * c - a.im * s, a.re * s + a.im * c)
}

/// Grover coin: `C = (2/3) J - I`, i.e. `(1/3)[[-1,2,2],[2,-1,2],[2,2,-1]]`.
///
/// L and R are summed first so that swapping them gives bit-identical
/// results; mirror-symmetric inputs then stay exactly symmetric.
#[inline(always)]
fn grover(s: [C64; 3]) -> [C64; 3] {
    let m = ((s[0] + s[2]) + s[1]) * (2.0 / 3.0);
    [m - s[0], m - s[1], m - s[2]]
}

/// Multiplies each ψ_{n,c} by `exp(i 2πχ |ψ_{n,c}|²)`. A no-op for χ = 0.
pub fn apply_nonlinear_phase(state: &mut WalkerState, params: StepParams) {
    if params.chi == 0.0 {
        return;
    }
    let strength = TAU * params.chi;
    for site in state.amps.iter_mut() {
        for a in site.iter_mut() {
            *a = kerr_phase(*a, strength);
        }
    }
}

/// Applies the Grover coin to the coin triple at every site.
pub fn apply_coin(state: &mut WalkerState) {
    for site in state.amps.iter_mut() {
        *site = grover(*site);
    }
}

/// Conditional shift: L moves to `n - 1`, S stays, R moves to `n + 1`.
///
/// The stored window grows by one site on each side.
pub fn apply_shift(state: &mut WalkerState) {
    let zero = C64::default();
    let len = state.amps.len();
    state.amps.push([zero; 3]);
    state.amps.push([zero; 3]);
    // New slot j holds site offset-1+j: L from old slot j, S from j-1, R from
    // j-2. Walking downwards never reads a slot that was already rewritten.
    let amps = &mut state.amps;
    for j in (0..len + 2).rev() {
        let l = if j < len { amps[j][0] } else { zero };
        let s = if j >= 1 && j - 1 < len {
            amps[j - 1][1]
        } else {
            zero
        };
        let r = if j >= 2 { amps[j - 2][2] } else { zero };
        amps[j] = [l, s, r];
    }
    state.offset -= 1;
}

/// One full step `phase → coin → shift`, advancing `t` by one.
pub fn step(state: &mut WalkerState, params: StepParams) {
    if params.chi == 0.0 {
        apply_coin(state);
    } else {
        let strength = TAU * params.chi;
        for site in state.amps.iter_mut() {
            let s = *site;
            *site = grover([
                kerr_phase(s[0], strength),
                kerr_phase(s[1], strength),
                kerr_phase(s[2], strength),
            ]);
        }
    }
    apply_shift(state);
    state.t += 1;
}

/// Everything recorded over one run.
#[derive(Clone, Debug)]
pub struct RunRecord {
    pub chi: f64,
    /// SP(t) for t = 0..=steps.
    pub sp: TimeSeries,
    /// PR(t) for t = 0..=steps.
    pub pr: TimeSeries,
    /// Σ|ψ|² for t = 0..=steps.
    pub norm: TimeSeries,
    /// Density profiles at every multiple of `record_every` (t = 0 included).
    pub snapshots: Vec<DensityProfile>,
    pub final_state: WalkerState,
}

/// Runs `steps` steps from `initial`, recording SP, PR and the norm every
/// step and a density snapshot every `record_every` steps.
pub fn evolve(
    initial: &WalkerState,
    params: StepParams,
    steps: usize,
    record_every: usize,
) -> Result<RunRecord> {
    evolve_with(initial, params, steps, record_every, |_| {})
}

/// [`evolve`] with a callback invoked on the state after every step
/// (and once on the initial state).
pub fn evolve_with<F>(
    initial: &WalkerState,
    params: StepParams,
    steps: usize,
    record_every: usize,
    mut observe: F,
) -> Result<RunRecord>
where
    F: FnMut(&WalkerState),
{
    if steps < 1 {
        return Err(invalid("steps must be >= 1"));
    }
    if record_every < 1 {
        return Err(invalid("record_every must be >= 1"));
    }
    let mut state = initial.clone();
    state.amps.reserve_exact(2 * steps);

    let t0 = state.t;
    let mut sp = Vec::with_capacity(steps + 1);
    let mut pr = Vec::with_capacity(steps + 1);
    let mut norm = Vec::with_capacity(steps + 1);
    let mut snapshots = Vec::new();

    for k in 0..=steps {
        if k > 0 {
            step(&mut state, params);
        }
        let n = state.norm();
        if n.is_nan() || (n - 1.0).abs() > NORM_ABORT_TOL {
            return Err(Error::NormDrift {
                t: state.t,
                norm: n,
            });
        }
        norm.push(n);
        sp.push(survival_probability(&state));
        pr.push(participation_ratio(&state));
        if k % record_every == 0 {
            snapshots.push(probability_density(&state));
        }
        observe(&state);
    }

    Ok(RunRecord {
        chi: params.chi,
        sp: TimeSeries::new("SP", t0, sp),
        pr: TimeSeries::new("PR", t0, pr),
        norm: TimeSeries::new("norm", t0, norm),
        snapshots,
        final_state: state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Coin, CoinBasis, CoinVector};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn localized(p: i64, b: CoinBasis) -> WalkerState {
        WalkerState::new_localized(p, b.vector()).unwrap()
    }

    #[test]
    fn phase_with_zero_chi_is_bit_identical() {
        let mut s = localized(0, CoinBasis::SigmaMinus1);
        for _ in 0..5 {
            step(&mut s, StepParams::new(0.3).unwrap());
        }
        let before = s.clone();
        apply_nonlinear_phase(&mut s, StepParams::linear());
        assert_eq!(s, before);
    }

    #[test]
    fn phase_half_chi_on_unit_amplitude() {
        let mut s = localized(0, CoinBasis::L);
        apply_nonlinear_phase(&mut s, StepParams::new(0.5).unwrap());
        assert!((s.amplitude(0, Coin::L) - c(-1.0)).norm() < 1e-15);
    }

    #[test]
    fn phase_unit_chi_on_two_half_components() {
        let mut s = localized(0, CoinBasis::SigmaMinus2);
        apply_nonlinear_phase(&mut s, StepParams::new(1.0).unwrap());
        let r2 = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitude(0, Coin::L) - c(-r2)).norm() < 1e-15);
        assert!((s.amplitude(0, Coin::R) - c(r2)).norm() < 1e-15);
        assert_eq!(s.amplitude(0, Coin::S), c(0.0));
    }

    #[test]
    fn coin_first_column() {
        let mut s = localized(0, CoinBasis::L);
        apply_coin(&mut s);
        let got = s.site(0);
        let want = [c(-1.0 / 3.0), c(2.0 / 3.0), c(2.0 / 3.0)];
        for i in 0..3 {
            assert!((got[i] - want[i]).norm() < 1e-15);
        }
    }

    #[test]
    fn coin_eigenvectors() {
        for (b, ev) in [
            (CoinBasis::SigmaPlus, 1.0),
            (CoinBasis::SigmaMinus1, -1.0),
            (CoinBasis::SigmaMinus2, -1.0),
        ] {
            let mut s = localized(0, b);
            apply_coin(&mut s);
            let v = b.vector();
            for cc in Coin::ALL {
                assert!((s.amplitude(0, cc) - v.get(cc) * ev).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn shift_moves_components() {
        let mut s = localized(0, CoinBasis::L);
        apply_shift(&mut s);
        assert_eq!(s.amplitude(-1, Coin::L), c(1.0));
        assert_eq!(s.site_range(), (-1, 1));

        let mut s = localized(0, CoinBasis::S);
        apply_shift(&mut s);
        assert_eq!(s.amplitude(0, Coin::S), c(1.0));

        let mut s = localized(4, CoinBasis::R);
        apply_shift(&mut s);
        assert_eq!(s.amplitude(5, Coin::R), c(1.0));
        assert!((s.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn shift_of_mixed_triple() {
        let v = CoinVector::new(c(0.6), C64::new(0.0, 0.64), c(0.48));
        let mut s = WalkerState::new_localized(0, v).unwrap();
        apply_shift(&mut s);
        assert_eq!(s.site(-1), [c(0.6), c(0.0), c(0.0)]);
        assert_eq!(s.site(0), [c(0.0), C64::new(0.0, 0.64), c(0.0)]);
        assert_eq!(s.site(1), [c(0.0), c(0.0), c(0.48)]);
    }

    #[test]
    fn one_linear_step_from_sigma_plus() {
        for chi in [0.0, 0.2, 1.0] {
            let mut s = localized(0, CoinBasis::SigmaPlus);
            step(&mut s, StepParams::new(chi).unwrap());
            assert_eq!(s.time(), 1);
            let d = probability_density(&s);
            for n in -1..=1 {
                assert!((d.total(n) - 1.0 / 3.0).abs() < 1e-15, "chi {chi} n {n}");
            }
        }
    }

    #[test]
    fn one_linear_step_from_l() {
        let mut s = localized(0, CoinBasis::L);
        step(&mut s, StepParams::linear());
        assert!((s.amplitude(-1, Coin::L).norm_sqr() - 1.0 / 9.0).abs() < 1e-15);
        assert!((s.amplitude(0, Coin::S).norm_sqr() - 4.0 / 9.0).abs() < 1e-15);
        assert!((s.amplitude(1, Coin::R).norm_sqr() - 4.0 / 9.0).abs() < 1e-15);
        assert!((s.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn evolve_short_run_keeps_norm() {
        let s = localized(0, CoinBasis::SigmaPlus);
        let rec = evolve(&s, StepParams::new(0.2).unwrap(), 10, 5).unwrap();
        assert_eq!(rec.norm.len(), 11);
        assert!(rec.norm.values().iter().all(|n| (n - 1.0).abs() <= 1e-12));
        assert_eq!(
            rec.snapshots.iter().map(|d| d.t).collect::<Vec<_>>(),
            [0, 5, 10]
        );
        assert_eq!(rec.final_state.site_range(), (-10, 10));
    }

    #[test]
    fn evolve_rejects_bad_arguments() {
        let s = localized(0, CoinBasis::SigmaPlus);
        assert!(evolve(&s, StepParams::linear(), 0, 1).is_err());
        assert!(evolve(&s, StepParams::linear(), 5, 0).is_err());
        assert!(StepParams::new(-0.1).is_err());
        assert!(StepParams::new(f64::NAN).is_err());
        assert!(StepParams::new(3.0).is_ok());
    }

    #[test]
    fn evolve_aborts_on_norm_blow_up() {
        let mut s = localized(0, CoinBasis::SigmaPlus);
        s.scale(c(1.0 + 1e-6));
        match evolve(&s, StepParams::linear(), 3, 1) {
            Err(Error::NormDrift { t, .. }) => assert_eq!(t, 0),
            other => panic!("expected NormDrift, got {other:?}"),
        }
    }

    #[test]
    fn sigma_plus_saturates_and_sigma_minus_decays() {
        let rec = evolve(
            &localized(0, CoinBasis::SigmaPlus),
            StepParams::linear(),
            100,
            10,
        )
        .unwrap();
        let late = &rec.sp.values()[50..];
        let min = late.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min > 0.05, "SP fell to {min}");

        let rec = evolve(
            &localized(0, CoinBasis::SigmaMinus1),
            StepParams::linear(),
            1000,
            100,
        )
        .unwrap();
        let sp = rec.sp.values();
        assert!(sp[1000] < 0.01 && sp[1000] < sp[100]);
    }
}
