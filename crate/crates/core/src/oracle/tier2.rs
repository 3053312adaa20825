//! Direct quadrature of the closed-form state fidelity against each input
//! density. Independent of the averaged closed forms.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{
    state_fidelity, ChannelSqueezing, CoherentAmplitude, InputDistribution, ProtocolSettings,
};
use crate::quadrature::{integrate, Adaptive, Estimate};

/// Half-width of the Gaussian window in units of `1/√λ`.
const GAUSSIAN_WINDOW: f64 = 9.0;

fn tight() -> Adaptive {
    Adaptive::default().with_tolerance(1e-15, 1e-12)
}

/// `∫ f(x) dx` of a function whose evaluation may itself fail.
fn nested<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    a: f64,
    b: f64,
    opts: Adaptive,
) -> Result<Estimate> {
    let mut failure = None;
    let est = integrate(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        a,
        b,
        opts,
    );
    match failure {
        Some(e) => Err(e),
        None => est,
    }
}

/// Average of the closed-form state fidelity over `family`, by adaptive
/// Gauss–Kronrod quadrature in the family's natural coordinates.
pub fn tier2_average(
    family: &InputDistribution,
    r: ChannelSqueezing,
    s: &ProtocolSettings,
) -> Result<Estimate> {
    let f = |re: f64, im: f64| state_fidelity(CoherentAmplitude::new(re, im), r, s);
    let scale = |e: Estimate, k: f64| Estimate {
        value: e.value * k,
        error: e.error * k,
    };
    match *family {
        InputDistribution::RealLine { radius } => {
            integrate(|x| f(x, 0.0), -radius, radius, tight().with_panels(4))
                .map(|e| scale(e, 0.5 / radius))
        }
        InputDistribution::ImagLine { radius } => {
            integrate(|y| f(0.0, y), -radius, radius, tight().with_panels(4))
                .map(|e| scale(e, 0.5 / radius))
        }
        InputDistribution::Circumference { radius } => integrate(
            |w| f(radius * w.cos(), radius * w.sin()),
            0.0,
            2.0 * PI,
            tight().with_panels(8),
        )
        .map(|e| scale(e, 0.5 / PI)),
        InputDistribution::Disk { radius } => nested(
            |rho| {
                integrate(
                    |w| f(rho * w.cos(), rho * w.sin()),
                    0.0,
                    2.0 * PI,
                    tight().with_panels(8),
                )
                .map(|e| rho * e.value)
            },
            0.0,
            radius,
            tight().with_panels(4),
        )
        .map(|e| scale(e, 1.0 / (PI * radius * radius))),
        InputDistribution::Gaussian { lambda, beta } => {
            let w = GAUSSIAN_WINDOW / lambda.sqrt();
            let density = |x: f64| (-lambda * x * x).exp();
            nested(
                |dx| {
                    integrate(
                        |dy| density(dy) * f(beta.re + dx, beta.im + dy),
                        -w,
                        w,
                        tight().with_panels(6),
                    )
                    .map(|e| density(dx) * e.value)
                },
                -w,
                w,
                tight().with_panels(6),
            )
            .map(|e| scale(e, lambda / PI))
        }
    }
}

/// Integral of the density of `family` over the plane; the line and circle
/// families are singular and report `None`.
pub fn density_mass(family: &InputDistribution) -> Option<Result<f64>> {
    let window = match *family {
        InputDistribution::Disk { radius } => radius,
        InputDistribution::Gaussian { lambda, beta } => {
            GAUSSIAN_WINDOW / lambda.sqrt() + beta.re.abs().max(beta.im.abs())
        }
        _ => return None,
    };
    let density = |x: f64, y: f64| {
        family
            .plane_density(CoherentAmplitude::new(x, y))
            .unwrap_or(0.0)
    };
    let res = match *family {
        // Polar coordinates keep the disk edge off the integration panels.
        InputDistribution::Disk { radius } => nested(
            |rho| {
                integrate(
                    |w| rho * density(rho * w.cos(), rho * w.sin()),
                    0.0,
                    2.0 * PI,
                    tight(),
                )
                .map(|e| e.value)
            },
            0.0,
            radius,
            tight(),
        ),
        _ => nested(
            |x| {
                integrate(|y| density(x, y), -window, window, tight().with_panels(8))
                    .map(|e| e.value)
            },
            -window,
            window,
            tight().with_panels(8),
        ),
    };
    Some(res.map(|e| e.value))
}

pub(crate) fn check_budget(budget: usize, minimum: usize) -> Result<()> {
    if budget < minimum {
        return Err(Error::InvalidParameter {
            name: "budget",
            value: budget as f64,
            reason: "too few quadrature nodes for this family",
        });
    }
    Ok(())
}
