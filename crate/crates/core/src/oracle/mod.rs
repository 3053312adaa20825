//! Numerical oracles for the closed forms.
//!
//! Tier 1 ([`sim`]) simulates the protocol on wavefunctions. Tier 2
//! ([`tier2`]) integrates the closed-form state fidelity against each input
//! density.

pub mod sim;
pub mod tier2;

use std::f64::consts::PI;

use crate::error::Result;
use crate::model::{ChannelSqueezing, CoherentAmplitude, InputDistribution, ProtocolSettings};
use crate::quadrature::{gauss_hermite, gauss_legendre, Estimate};

pub use sim::{oracle_state_fidelity, oracle_state_fidelity_estimate};
pub use tier2::tier2_average;

/// Smallest node budget accepted by [`oracle_average_fidelity`].
pub const MIN_BUDGET: usize = 4;

/// Tier-1 average fidelity: a fixed quadrature rule over α with `budget`
/// nodes per axis, each node evaluated by [`oracle_state_fidelity`].
///
/// The error estimate is the difference from the same rule with half as many
/// nodes.
pub fn oracle_average_fidelity(
    family: &InputDistribution,
    r: ChannelSqueezing,
    s: &ProtocolSettings,
    budget: usize,
) -> Result<Estimate> {
    tier2::check_budget(budget, MIN_BUDGET)?;
    let fine = average_with_rule(family, r, s, budget)?;
    let coarse = average_with_rule(family, r, s, budget / 2)?;
    Ok(Estimate {
        value: fine,
        error: (fine - coarse).abs(),
    })
}

fn average_with_rule(
    family: &InputDistribution,
    r: ChannelSqueezing,
    s: &ProtocolSettings,
    n: usize,
) -> Result<f64> {
    let f = |re: f64, im: f64| oracle_state_fidelity(CoherentAmplitude::new(re, im), r, s);
    match *family {
        InputDistribution::RealLine { radius } | InputDistribution::ImagLine { radius } => {
            let real = matches!(family, InputDistribution::RealLine { .. });
            let (x, w) = gauss_legendre(n);
            let mut total = 0.0;
            for (xi, wi) in x.iter().zip(&w) {
                let t = radius * xi;
                total += wi * if real { f(t, 0.0)? } else { f(0.0, t)? };
            }
            Ok(total / 2.0)
        }
        InputDistribution::Circumference { radius } => {
            let mut total = 0.0;
            for k in 0..n {
                let w = 2.0 * PI * k as f64 / n as f64;
                total += f(radius * w.cos(), radius * w.sin())?;
            }
            Ok(total / n as f64)
        }
        InputDistribution::Disk { radius } => {
            // u = ρ² makes the radial measure uniform.
            let (x, w) = gauss_legendre(n);
            let mut total = 0.0;
            for (xi, wi) in x.iter().zip(&w) {
                let rho = radius * (0.5 * (xi + 1.0)).sqrt();
                let mut ring = 0.0;
                for k in 0..n {
                    let om = 2.0 * PI * k as f64 / n as f64;
                    ring += f(rho * om.cos(), rho * om.sin())?;
                }
                total += wi * ring / n as f64;
            }
            Ok(total / 2.0)
        }
        InputDistribution::Gaussian { lambda, beta } => {
            let (z, w) = gauss_hermite(n);
            let scale = 1.0 / lambda.sqrt();
            let mut total = 0.0;
            for (zi, wi) in z.iter().zip(&w) {
                for (zj, wj) in z.iter().zip(&w) {
                    total += wi * wj * f(beta.re + scale * zi, beta.im + scale * zj)?;
                }
            }
            Ok(total / PI)
        }
    }
}
