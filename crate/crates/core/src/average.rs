//! Fidelities averaged over pools of coherent input states.
//!
//! Every family reduces to an integral of the Gaussian
//! `F(α) = F₀·exp(−a·Re²α − b·Im²α)` (see [`QuadratureKernels`]) against the
//! family's density, which is done in closed form except for the general
//! (asymmetric) disk.

use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::model::{
    ChannelSqueezing, CoherentAmplitude, InputDistribution, ProtocolSettings, QuadratureKernels,
};
use crate::quadrature::{self, Adaptive};
use crate::special::{erf_ratio, exp_neg_times_i0};

/// Below this value of `|√2 − g|²R²` the symmetric disk formula switches
/// to its Taylor expansion.
pub const DISK_SERIES_THRESHOLD: f64 = 1e-8;

/// An averaged fidelity together with the inputs that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AveragedFidelity {
    pub value: f64,
    pub family: InputDistribution,
    pub settings: ProtocolSettings,
    pub r: ChannelSqueezing,
}

/// Averaged fidelity for any input family.
pub fn average_fidelity(
    family: InputDistribution,
    r: ChannelSqueezing,
    s: &ProtocolSettings,
) -> Result<AveragedFidelity> {
    let value = average_value(&family, r, s)?;
    Ok(AveragedFidelity {
        value,
        family,
        settings: *s,
        r,
    })
}

/// Bare value of [`average_fidelity`].
pub fn average_value(
    family: &InputDistribution,
    r: ChannelSqueezing,
    s: &ProtocolSettings,
) -> Result<f64> {
    let k = QuadratureKernels::new(r, s);
    match *family {
        InputDistribution::RealLine { radius } => Ok(line(&k, radius, k.rate_pos())),
        InputDistribution::ImagLine { radius } => Ok(line(&k, radius, k.rate_mom())),
        InputDistribution::Circumference { radius } => Ok(circle(&k, radius)),
        InputDistribution::Disk { radius } => disk(&k, radius),
        InputDistribution::Gaussian { lambda, beta } => Ok(gaussian(&k, lambda, beta)),
    }
}

fn line(k: &QuadratureKernels, radius: f64, rate: f64) -> f64 {
    k.vacuum_fidelity() * erf_ratio(radius * rate.sqrt())
}

fn circle(k: &QuadratureKernels, radius: f64) -> f64 {
    let (h_plus, h_minus) = half_rates(k);
    let r2 = radius * radius;
    k.vacuum_fidelity() * exp_neg_times_i0(h_plus * r2, h_minus * r2)
}

fn half_rates(k: &QuadratureKernels) -> (f64, f64) {
    let (a, b) = (k.rate_pos(), k.rate_mom());
    (0.5 * (a + b), 0.5 * (a - b))
}

fn disk(k: &QuadratureKernels, radius: f64) -> Result<f64> {
    let (h_plus, h_minus) = half_rates(k);
    let r2 = radius * radius;
    if h_minus == 0.0 {
        return Ok(k.vacuum_fidelity() * one_minus_exp_ratio(h_plus * r2));
    }
    // (1/R²)∫₀^{R²} e^{−h₊u} I₀(h₋u) du, the angular integral done exactly.
    let opts = Adaptive::default()
        .with_tolerance(1e-15, 1e-13)
        .with_panels(8);
    let est = quadrature::integrate(|u| exp_neg_times_i0(h_plus * u, h_minus * u), 0.0, r2, opts)?;
    Ok(k.vacuum_fidelity() * est.value / r2)
}

/// `(1 − e^{−y})/y`, continuous through `y = 0`.
fn one_minus_exp_ratio(y: f64) -> f64 {
    if y.abs() < DISK_SERIES_THRESHOLD {
        1.0 - 0.5 * y
    } else {
        -(-y).exp_m1() / y
    }
}

fn gaussian(k: &QuadratureKernels, lambda: f64, beta: CoherentAmplitude) -> f64 {
    let den_pos = k.f1_pos + lambda * k.f2_pos;
    let den_mom = k.f1_mom + lambda * k.f2_mom;
    let exponent = -lambda * k.f1_pos * beta.re * beta.re / den_pos
        - lambda * k.f1_mom * beta.im * beta.im / den_mom;
    lambda * exponent.exp() / (den_pos * den_mom).sqrt()
}

fn check_radius(radius: f64, allow_zero: bool) -> Result<()> {
    let ok = radius.is_finite() && (radius > 0.0 || (allow_zero && radius == 0.0));
    if ok {
        Ok(())
    } else {
        Err(Error::invalid("R", radius, "radius out of range"))
    }
}

/// Uniform average over `α ∈ [−R, R]` on the real axis.
pub fn avg_fidelity_real(r: ChannelSqueezing, radius: f64, s: &ProtocolSettings) -> Result<f64> {
    check_radius(radius, false)?;
    let k = QuadratureKernels::new(r, s);
    Ok(line(&k, radius, k.rate_pos()))
}

/// Uniform average over `α ∈ i·[−R, R]`.
pub fn avg_fidelity_imag(r: ChannelSqueezing, radius: f64, s: &ProtocolSettings) -> Result<f64> {
    check_radius(radius, false)?;
    let k = QuadratureKernels::new(r, s);
    Ok(line(&k, radius, k.rate_mom()))
}

/// Uniform average over the circle `|α| = R`.
pub fn avg_fidelity_circle(r: ChannelSqueezing, radius: f64, s: &ProtocolSettings) -> Result<f64> {
    check_radius(radius, true)?;
    Ok(circle(&QuadratureKernels::new(r, s), radius))
}

/// Circle average at `θ = π/4`, `g_u = g_v = g`:
/// `2·exp(−R²(√2 − g)²/D)/D` with `D = (2 + g²)cosh²r − √2·g·sinh 2r`.
pub fn avg_fidelity_circle_sym(r: ChannelSqueezing, radius: f64, g: f64) -> Result<f64> {
    check_radius(radius, true)?;
    let d = symmetric_denominator(r, g);
    Ok(2.0 / d * (-radius * radius * (SQRT_2 - g).powi(2) / d).exp())
}

/// Uniform average over the disk `|α| ≤ R` at `θ = π/4`, `g_u = g_v = g`:
/// `2(1 − e^{−c})/((√2 − g)²R²)` with `c = R²(√2 − g)²/D`.
pub fn avg_fidelity_disk_sym(r: ChannelSqueezing, radius: f64, g: f64) -> Result<f64> {
    check_radius(radius, false)?;
    let d = symmetric_denominator(r, g);
    let c = (SQRT_2 - g).powi(2) * radius * radius;
    let y = c / d;
    let ratio = if c < DISK_SERIES_THRESHOLD {
        1.0 - 0.5 * y
    } else {
        -(-y).exp_m1() / y
    };
    Ok(2.0 / d * ratio)
}

/// Uniform average over the disk for arbitrary settings.
pub fn avg_fidelity_disk(r: ChannelSqueezing, radius: f64, s: &ProtocolSettings) -> Result<f64> {
    check_radius(radius, false)?;
    disk(&QuadratureKernels::new(r, s), radius)
}

/// Average against the density `(λ/π)·exp(−λ|α − β|²)`.
pub fn avg_fidelity_gaussian(
    r: ChannelSqueezing,
    lambda: f64,
    beta: CoherentAmplitude,
    s: &ProtocolSettings,
) -> Result<f64> {
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::invalid(
            "lambda",
            lambda,
            "must be finite and positive",
        ));
    }
    Ok(gaussian(&QuadratureKernels::new(r, s), lambda, beta))
}

/// `D(g) = (2 + g²)cosh²r − √2·g·sinh 2r`, twice `f₂` at `θ = π/4`.
pub fn symmetric_denominator(r: ChannelSqueezing, g: f64) -> f64 {
    let r = r.value();
    (2.0 + g * g) * r.cosh().powi(2) - SQRT_2 * g * (2.0 * r).sinh()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{original_cvtp_fidelity, state_fidelity};
    use std::f64::consts::FRAC_PI_4;

    fn sq(r: f64) -> ChannelSqueezing {
        ChannelSqueezing::new(r).unwrap()
    }

    fn settings(theta: f64, g_u: f64, g_v: f64) -> ProtocolSettings {
        ProtocolSettings::new(theta, g_u, g_v).unwrap()
    }

    #[test]
    fn small_radius_recovers_vacuum_fidelity() {
        let s = settings(0.6, 1.3, 0.8);
        let f0 = state_fidelity(CoherentAmplitude::ZERO, sq(0.4), &s);
        for v in [
            avg_fidelity_real(sq(0.4), 1e-6, &s).unwrap(),
            avg_fidelity_imag(sq(0.4), 1e-6, &s).unwrap(),
            avg_fidelity_circle(sq(0.4), 0.0, &s).unwrap(),
            avg_fidelity_disk(sq(0.4), 1e-6, &s).unwrap(),
        ] {
            assert!((v - f0).abs() < 1e-8);
        }
    }

    #[test]
    fn vanishing_rate_is_handled() {
        // g_u = sec θ zeroes the position rate.
        let theta = 0.5f64;
        let s = settings(theta, 1.0 / theta.cos(), 0.9);
        let v = avg_fidelity_real(sq(0.3), 2.0, &s).unwrap();
        let f0 = state_fidelity(CoherentAmplitude::ZERO, sq(0.3), &s);
        assert!((v - f0).abs() < 1e-14);
    }

    #[test]
    fn imag_is_mirrored_real() {
        let s = settings(0.3, 0.7, 1.9);
        let a = avg_fidelity_imag(sq(0.8), 1.7, &s).unwrap();
        let b = avg_fidelity_real(sq(0.8), 1.7, &s.mirrored()).unwrap();
        assert!((a - b).abs() < 1e-12);
        let o = ProtocolSettings::original();
        let a = avg_fidelity_imag(sq(0.0), 2.0, &o).unwrap();
        let b = avg_fidelity_real(sq(0.0), 2.0, &o).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn circle_symmetric_forms_agree() {
        for (r, radius, g) in [(0.5, 1.0, 1.0), (1.3, 0.2, 2.4), (0.0, 3.0, 0.1)] {
            let a = avg_fidelity_circle_sym(sq(r), radius, g).unwrap();
            let b = avg_fidelity_circle(sq(r), radius, &ProtocolSettings::symmetric(g)).unwrap();
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn circle_at_zero_radius_with_tanh_gain_is_perfect() {
        for r in [0.0f64, 0.5, 1.0, 2.0] {
            let v = avg_fidelity_circle_sym(sq(r), 0.0, SQRT_2 * r.tanh()).unwrap();
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn unit_gain_recovers_original_protocol() {
        for r in [0.0, 0.4, 1.7] {
            let f = original_cvtp_fidelity(sq(r));
            assert!((avg_fidelity_circle_sym(sq(r), 3.0, SQRT_2).unwrap() - f).abs() < 1e-12);
            assert!((avg_fidelity_disk_sym(sq(r), 3.0, SQRT_2).unwrap() - f).abs() < 1e-12);
            let g = avg_fidelity_gaussian(
                sq(r),
                1e-6,
                CoherentAmplitude::ZERO,
                &ProtocolSettings::original(),
            );
            assert!((g.unwrap() - f).abs() < 1e-12);
        }
    }

    #[test]
    fn disk_series_branch_is_continuous() {
        let r = sq(0.7);
        let radius = 1.0;
        let g_in = SQRT_2 - 0.5e-4;
        let g_out = SQRT_2 - 2e-4;
        let d_in = avg_fidelity_disk_sym(r, radius, g_in).unwrap();
        let d_out = avg_fidelity_disk_sym(r, radius, g_out).unwrap();
        for (g, v) in [(g_in, d_in), (g_out, d_out)] {
            let d = symmetric_denominator(r, g);
            let c = (SQRT_2 - g).powi(2) * radius * radius / d;
            let direct = 2.0 / d * -(-c).exp_m1() / c;
            assert!((v - direct).abs() < 1e-15, "{v} vs {direct}");
        }
    }

    #[test]
    fn general_disk_reduces_to_symmetric_form() {
        for (r, radius, g) in [(0.5, 1.0, 1.2), (1.0, 4.0, 1.3), (0.2, 50.0, 1.4)] {
            let a = avg_fidelity_disk_sym(sq(r), radius, g).unwrap();
            let b = avg_fidelity_disk(sq(r), radius, &ProtocolSettings::symmetric(g)).unwrap();
            assert!((a - b).abs() < 1e-13, "{a} vs {b}");
            // Nudge θ off π/4 so the quadrature branch is taken.
            let s = ProtocolSettings::new(FRAC_PI_4 + 1e-9, g, g).unwrap();
            let c = avg_fidelity_disk(sq(r), radius, &s).unwrap();
            assert!((a - c).abs() < 1e-8, "{a} vs {c}");
        }
    }

    #[test]
    fn narrow_gaussian_is_a_point_evaluation() {
        let s = settings(0.9, 1.1, 1.6);
        let beta = CoherentAmplitude::new(1.0, 1.0);
        let v = avg_fidelity_gaussian(sq(0.6), 1e8, beta, &s).unwrap();
        assert!((v - state_fidelity(beta, sq(0.6), &s)).abs() < 1e-6);
    }

    #[test]
    fn large_radius_stays_finite() {
        let s = settings(0.4, 1.5, 0.3);
        for v in [
            avg_fidelity_circle(sq(2.0), 50.0, &s).unwrap(),
            avg_fidelity_disk(sq(2.0), 50.0, &s).unwrap(),
            avg_fidelity_real(sq(2.0), 50.0, &s).unwrap(),
        ] {
            assert!(v.is_finite() && v > 0.0 && v <= 1.0);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let s = ProtocolSettings::original();
        assert!(avg_fidelity_real(sq(0.1), 0.0, &s).is_err());
        assert!(avg_fidelity_circle(sq(0.1), -1.0, &s).is_err());
        assert!(avg_fidelity_gaussian(sq(0.1), 0.0, CoherentAmplitude::ZERO, &s).is_err());
        assert!(avg_fidelity_disk_sym(sq(0.1), f64::NAN, 1.0).is_err());
    }
}
