//! Walker state over position ⊗ coin space, and the standard coin vectors.
//!
//! Coin components are always ordered `(L, S, R)`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest accepted deviation of a coin vector's squared norm from 1.
pub const COIN_NORM_TOL: f64 = 1e-9;

/// Internal degree of freedom of the walker.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Coin {
    L,
    S,
    R,
}

impl Coin {
    pub const ALL: [Coin; 3] = [Coin::L, Coin::S, Coin::R];

    #[inline]
    pub fn index(self) -> usize {
        match self {
            Coin::L => 0,
            Coin::S => 1,
            Coin::R => 2,
        }
    }
}

/// Named coin inputs: the computational basis plus the eigenbasis of the
/// Grover coin.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CoinBasis {
    L,
    S,
    R,
    #[serde(rename = "sigma_plus")]
    SigmaPlus,
    #[serde(rename = "sigma_minus_1")]
    SigmaMinus1,
    #[serde(rename = "sigma_minus_2")]
    SigmaMinus2,
}

impl CoinBasis {
    pub const ALL: [CoinBasis; 6] = [
        CoinBasis::L,
        CoinBasis::S,
        CoinBasis::R,
        CoinBasis::SigmaPlus,
        CoinBasis::SigmaMinus1,
        CoinBasis::SigmaMinus2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CoinBasis::L => "L",
            CoinBasis::S => "S",
            CoinBasis::R => "R",
            CoinBasis::SigmaPlus => "sigma_plus",
            CoinBasis::SigmaMinus1 => "sigma_minus_1",
            CoinBasis::SigmaMinus2 => "sigma_minus_2",
        }
    }

    pub fn vector(self) -> CoinVector {
        coin_basis(self)
    }
}

impl fmt::Display for CoinBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CoinBasis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CoinBasis::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::UnknownCoin(s.to_string()))
    }
}

/// A three-component complex vector in coin space, `(aL, aS, aR)`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct CoinVector(pub [C64; 3]);

impl CoinVector {
    pub fn new(l: C64, s: C64, r: C64) -> Self {
        Self([l, s, r])
    }

    pub fn from_real(l: f64, s: f64, r: f64) -> Self {
        Self([C64::new(l, 0.0), C64::new(s, 0.0), C64::new(r, 0.0)])
    }

    pub fn get(&self, c: Coin) -> C64 {
        self.0[c.index()]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &CoinVector) -> C64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn scaled(&self, z: C64) -> Self {
        Self(self.0.map(|a| a * z))
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= COIN_NORM_TOL
    }
}

impl From<[C64; 3]> for CoinVector {
    fn from(a: [C64; 3]) -> Self {
        Self(a)
    }
}

/// Returns the exact normalized coin vector for `name`.
pub fn coin_basis(name: CoinBasis) -> CoinVector {
    let r3 = 1.0 / 3f64.sqrt();
    let r6 = 1.0 / 6f64.sqrt();
    let r2 = 1.0 / 2f64.sqrt();
    match name {
        CoinBasis::L => CoinVector::from_real(1.0, 0.0, 0.0),
        CoinBasis::S => CoinVector::from_real(0.0, 1.0, 0.0),
        CoinBasis::R => CoinVector::from_real(0.0, 0.0, 1.0),
        CoinBasis::SigmaPlus => CoinVector::from_real(r3, r3, r3),
        CoinBasis::SigmaMinus1 => CoinVector::from_real(r6, -2.0 * r6, r6),
        CoinBasis::SigmaMinus2 => CoinVector::from_real(r2, 0.0, -r2),
    }
}

/// Amplitude field ψ_{n,c}(t) on a contiguous window of sites.
///
/// Site `offset + i` is stored at `amps[i]`. Sites outside the window carry
/// zero amplitude. Each coin step widens the window by one site on each side,
/// so a walker started at site `p` stores exactly `[p - t, p + t]`.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkerState {
    pub(crate) t: u64,
    pub(crate) offset: i64,
    pub(crate) amps: Vec<[C64; 3]>,
}

impl WalkerState {
    /// All amplitude on `position` with coin state `coin`, at `t = 0`.
    pub fn new_localized(position: i64, coin: CoinVector) -> Result<Self> {
        let norm = coin.norm_sqr();
        if norm.is_nan() || (norm - 1.0).abs() > COIN_NORM_TOL {
            return Err(Error::CoinNotNormalized { norm });
        }
        Ok(Self {
            t: 0,
            offset: position,
            amps: vec![coin.0],
        })
    }

    /// Like [`WalkerState::new_localized`], reserving storage for `steps`
    /// future steps so the evolution never reallocates.
    pub fn with_capacity(position: i64, coin: CoinVector, steps: usize) -> Result<Self> {
        let mut state = Self::new_localized(position, coin)?;
        state.amps.reserve_exact(2 * steps);
        Ok(state)
    }

    /// Builds a state from raw per-site amplitudes. No normalization check.
    pub fn from_amplitudes(t: u64, offset: i64, amps: Vec<[C64; 3]>) -> Self {
        Self { t, offset, amps }
    }

    pub fn time(&self) -> u64 {
        self.t
    }

    /// Lowest stored site.
    pub fn offset(&self) -> i64 {
        self.offset
    }

    /// Inclusive range of stored sites.
    pub fn site_range(&self) -> (i64, i64) {
        (self.offset, self.offset + self.amps.len() as i64 - 1)
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amplitudes(&self) -> &[[C64; 3]] {
        &self.amps
    }

    fn slot(&self, n: i64) -> Option<usize> {
        let i = n.checked_sub(self.offset)?;
        if i >= 0 && (i as usize) < self.amps.len() {
            Some(i as usize)
        } else {
            None
        }
    }

    /// ψ_{n,c}(t); exactly zero outside the stored window.
    pub fn amplitude(&self, n: i64, c: Coin) -> C64 {
        self.slot(n)
            .map(|i| self.amps[i][c.index()])
            .unwrap_or_default()
    }

    /// Coin triple at site `n`.
    pub fn site(&self, n: i64) -> [C64; 3] {
        self.slot(n).map(|i| self.amps[i]).unwrap_or_default()
    }

    /// Σ_{n,c} |ψ_{n,c}|²
    pub fn norm(&self) -> f64 {
        self.amps
            .iter()
            .map(|s| s[0].norm_sqr() + s[1].norm_sqr() + s[2].norm_sqr())
            .sum()
    }

    /// Multiplies every amplitude by `z`.
    pub fn scale(&mut self, z: C64) {
        for s in self.amps.iter_mut() {
            for a in s.iter_mut() {
                *a *= z;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const R3: f64 = 0.577_350_269_189_625_8;

    #[test]
    fn basis_values() {
        let sp = coin_basis(CoinBasis::SigmaPlus);
        for a in sp.0 {
            assert!((a.re - R3).abs() < 1e-15 && a.im == 0.0);
        }
        assert_eq!(
            coin_basis(CoinBasis::L),
            CoinVector::from_real(1.0, 0.0, 0.0)
        );
        let sm2 = coin_basis(CoinBasis::SigmaMinus2);
        let r2 = std::f64::consts::FRAC_1_SQRT_2;
        assert!((sm2.0[0].re - r2).abs() < 1e-15);
        assert_eq!(sm2.0[1], C64::new(0.0, 0.0));
        assert!((sm2.0[2].re + r2).abs() < 1e-15);
        let sm1 = coin_basis(CoinBasis::SigmaMinus1);
        assert!((sm1.0[1].re + 2.0 / 6f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn basis_is_orthonormal() {
        for a in CoinBasis::ALL[3..].iter() {
            for b in CoinBasis::ALL[3..].iter() {
                let ip = a.vector().inner(&b.vector());
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((ip - want).norm() <= 1e-15, "{a} {b}: {ip}");
            }
        }
    }

    #[test]
    fn localized_norm_is_one() {
        for b in CoinBasis::ALL {
            let s = WalkerState::new_localized(0, b.vector()).unwrap();
            assert!((s.norm() - 1.0).abs() <= 1e-12);
            assert_eq!(s.time(), 0);
        }
    }

    #[test]
    fn localized_reads_back() {
        let s = WalkerState::new_localized(0, CoinBasis::L.vector()).unwrap();
        assert_eq!(s.amplitude(0, Coin::L), C64::new(1.0, 0.0));
        assert_eq!(s.amplitude(0, Coin::S), C64::new(0.0, 0.0));
        assert_eq!(s.amplitude(3, Coin::S), C64::new(0.0, 0.0));
        assert_eq!(s.amplitude(i64::MIN, Coin::S), C64::new(0.0, 0.0));

        let v = CoinBasis::SigmaMinus1.vector();
        let s = WalkerState::new_localized(5, v).unwrap();
        for c in Coin::ALL {
            assert_eq!(s.amplitude(5, c), v.get(c));
            assert_eq!(s.amplitude(0, c), C64::new(0.0, 0.0));
        }
        let s = WalkerState::new_localized(0, CoinBasis::SigmaPlus.vector()).unwrap();
        assert!((s.amplitude(0, Coin::S).re - R3).abs() < 1e-15);
    }

    #[test]
    fn rejects_unnormalized_coin() {
        let bad = CoinVector::from_real(1.0, 1.0, 0.0);
        assert!(matches!(
            WalkerState::new_localized(0, bad),
            Err(Error::CoinNotNormalized { .. })
        ));
        let nan = CoinVector::from_real(f64::NAN, 0.0, 0.0);
        assert!(WalkerState::new_localized(0, nan).is_err());
        let close = CoinVector::from_real(1.0 + 1e-12, 0.0, 0.0);
        assert!(WalkerState::new_localized(0, close).is_ok());
    }

    #[test]
    fn norm_of_single_half_amplitude() {
        let s = WalkerState::from_amplitudes(
            0,
            0,
            vec![[C64::new(0.5, 0.0), C64::default(), C64::default()]],
        );
        assert_eq!(s.norm(), 0.25);
    }

    #[test]
    fn coin_names_round_trip() {
        for b in CoinBasis::ALL {
            assert_eq!(b.name().parse::<CoinBasis>().unwrap(), b);
        }
        assert!("sigma".parse::<CoinBasis>().is_err());
    }
}
