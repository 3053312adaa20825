//! Quadrature convention shared by every formula in the crate.
//!
//! Field quadratures are `x = (a + a†)/2` and `p = (a − a†)/2i`, so that
//! `[x, p] = i/2`. Under this choice the vacuum has variance 1/4 in each
//! quadrature, a coherent state `|α⟩` has `⟨x⟩ = Re α` and `⟨p⟩ = Im α`,
//! and position/momentum eigenstates overlap as `⟨x|p⟩ = e^{2ixp}/√π`.
//! Switching to `ħ = 1` or `[x, p] = i` rescales every closed form, so the
//! constants below are the only place the convention is spelled out.

use std::f64::consts::PI;

/// The `c` in `[x, p] = i·c`.
pub const COMMUTATOR: f64 = 0.5;

/// Quadrature variance of the vacuum, `c/2`.
pub const VACUUM_VARIANCE: f64 = COMMUTATOR / 2.0;

/// Phase rate of the position-momentum kernel: `⟨x|p⟩ ∝ exp(i·FOURIER_RATE·x·p)`.
pub const FOURIER_RATE: f64 = 1.0 / COMMUTATOR;

/// Normalisation of `⟨x|p⟩`, i.e. `1/√(2πc)`.
pub fn fourier_norm() -> f64 {
    1.0 / (2.0 * PI * COMMUTATOR).sqrt()
}

/// Prefactor `(2πσ²)^{-1/4}` of a minimum-uncertainty wavefunction.
pub fn vacuum_amplitude_norm() -> f64 {
    (2.0 * PI * VACUUM_VARIANCE).powf(-0.25)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_half_commutator_values() {
        assert_eq!(FOURIER_RATE, 2.0);
        assert!((fourier_norm() - 1.0 / PI.sqrt()).abs() < 1e-15);
        assert!((vacuum_amplitude_norm() - (2.0 / PI).powf(0.25)).abs() < 1e-15);
    }
}
