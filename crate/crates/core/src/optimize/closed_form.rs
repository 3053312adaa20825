//! Closed-form optimal gains for the families where the stationarity
//! conditions can be solved analytically.

use std::f64::consts::SQRT_2;

use crate::average::{avg_fidelity_circle_sym, symmetric_denominator};
use crate::error::{Error, Result};
use crate::model::ChannelSqueezing;

/// Optimal `g_v` for the real-line family at fixed `θ`:
/// `sinh 2r·cos θ / (cosh²r + cos 2θ·sinh²r)`.
pub fn optimal_gv_real(theta: f64, r: ChannelSqueezing) -> f64 {
    let r = r.value();
    let den = r.cosh().powi(2) + (2.0 * theta).cos() * r.sinh().powi(2);
    debug_assert!(den > 0.0);
    (2.0 * r).sinh() * theta.cos() / den
}

/// Optimal `g_u` for the imaginary-line family at fixed `θ`:
/// `sinh 2r·sin θ / (cosh²r − cos 2θ·sinh²r)`.
pub fn optimal_gu_imag(theta: f64, r: ChannelSqueezing) -> f64 {
    let r = r.value();
    let den = r.cosh().powi(2) - (2.0 * theta).cos() * r.sinh().powi(2);
    debug_assert!(den > 0.0);
    (2.0 * r).sinh() * theta.sin() / den
}

/// Optimal common gain for the centred Gaussian family:
/// `(2√2 + λ√2·sinh 2r)/(2 + λ + λ·cosh 2r)`.
pub fn optimal_g_gaussian_centered(r: ChannelSqueezing, lambda: f64) -> Result<f64> {
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::invalid(
            "lambda",
            lambda,
            "must be finite and positive",
        ));
    }
    let r = r.value();
    Ok((2.0 * SQRT_2 + lambda * SQRT_2 * (2.0 * r).sinh())
        / (2.0 + lambda + lambda * (2.0 * r).cosh()))
}

/// Coefficients, highest degree first, of the stationarity cubic for the
/// symmetric circle average:
///
/// `√2(e^r sinh 2r cosh r + 2R²) − g·e^r(3cosh 2r − 1)cosh r
///  − g²√2(R² − 3e^r sinh r cosh²r) − g³e^r cosh³r = 0`.
pub fn circle_cubic(r: ChannelSqueezing, radius: f64) -> [f64; 4] {
    let r = r.value();
    let (c, s, e) = (r.cosh(), r.sinh(), r.exp());
    let r2 = radius * radius;
    [
        -e * c * c * c,
        -SQRT_2 * (r2 - 3.0 * e * s * c * c),
        -e * (3.0 * (2.0 * r).cosh() - 1.0) * c,
        SQRT_2 * (e * (2.0 * r).sinh() * c + 2.0 * r2),
    ]
}

fn horner(p: &[f64; 4], x: f64) -> (f64, f64) {
    let v = ((p[0] * x + p[1]) * x + p[2]) * x + p[3];
    let d = (3.0 * p[0] * x + 2.0 * p[1]) * x + p[2];
    (v, d)
}

/// Real roots of `p[0]x³ + p[1]x² + p[2]x + p[3]` with `p[0] ≠ 0`, in
/// ascending order, each polished by Newton steps.
pub fn real_cubic_roots(p: &[f64; 4]) -> Vec<f64> {
    let a = p[1] / p[0];
    let b = p[2] / p[0];
    let c = p[3] / p[0];
    // x = t − a/3 gives t³ + q·t + s = 0.
    let shift = a / 3.0;
    let q = b - a * a / 3.0;
    let s = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = (s / 2.0).powi(2) + (q / 3.0).powi(3);
    let mut roots = if disc > 0.0 {
        let sq = disc.sqrt();
        let u = (-s / 2.0 + sq).cbrt();
        let v = (-s / 2.0 - sq).cbrt();
        vec![u + v - shift]
    } else if q == 0.0 {
        vec![-shift]
    } else {
        let m = 2.0 * (-q / 3.0).sqrt();
        let arg = (3.0 * s / (q * m)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        (0..3)
            .map(|k| m * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() - shift)
            .collect()
    };
    for x in roots.iter_mut() {
        for _ in 0..4 {
            let (v, d) = horner(p, *x);
            if d == 0.0 || !v.is_finite() {
                break;
            }
            let next = *x - v / d;
            // Near a multiple root Newton can overshoot; keep the better point.
            if horner(p, next).0.abs() < v.abs() {
                *x = next;
            } else {
                break;
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots
}

/// The optimal symmetric gain for the circle family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleGain {
    pub g: f64,
    pub fidelity: f64,
    /// Set when the cubic had no admissible root and a bounded 1-D search
    /// supplied the gain instead.
    pub fallback: bool,
}

/// `D²·d(ln F)/dg` for the symmetric circle average in factored form,
/// `R²(√2 − g)(2D + (√2 − g)D′) − D·D′`; proportional to [`circle_cubic`]
/// but free of the cancellation between its `R²`-sized coefficients.
fn circle_stationarity(r: ChannelSqueezing, radius: f64, g: f64) -> f64 {
    let rv = r.value();
    let c2 = rv.cosh().powi(2);
    let d = symmetric_denominator(r, g);
    let dd = 2.0 * g * c2 - SQRT_2 * (2.0 * rv).sinh();
    let u = SQRT_2 - g;
    radius * radius * u * (2.0 * d + u * dd) - d * dd
}

fn polish_circle_root(r: ChannelSqueezing, radius: f64, mut g: f64) -> f64 {
    let h = 1e-7 * g.abs().max(1.0);
    for _ in 0..3 {
        let v = circle_stationarity(r, radius, g);
        let slope = (circle_stationarity(r, radius, g + h) - circle_stationarity(r, radius, g - h))
            / (2.0 * h);
        if slope == 0.0 || !slope.is_finite() {
            break;
        }
        let next = g - v / slope;
        if circle_stationarity(r, radius, next).abs() < v.abs() {
            g = next;
        } else {
            break;
        }
    }
    g
}

/// Non-negative real root of [`circle_cubic`] maximizing the symmetric circle
/// average; ties go to the smaller gain.
pub fn optimal_g_circle(r: ChannelSqueezing, radius: f64) -> Result<CircleGain> {
    if !radius.is_finite() || radius < 0.0 {
        return Err(Error::invalid(
            "R",
            radius,
            "radius must be finite and non-negative",
        ));
    }
    let mut best: Option<CircleGain> = None;
    for g in real_cubic_roots(&circle_cubic(r, radius)) {
        if g < 0.0 {
            continue;
        }
        let g = polish_circle_root(r, radius, g).max(0.0);
        let fidelity = avg_fidelity_circle_sym(r, radius, g)?;
        if best.is_none_or(|b| fidelity > b.fidelity) {
            best = Some(CircleGain {
                g,
                fidelity,
                fallback: false,
            });
        }
    }
    match best {
        Some(b) => Ok(b),
        None => {
            let (g, fidelity) = golden_max(
                |g| avg_fidelity_circle_sym(r, radius, g).unwrap_or(0.0),
                0.0,
                10.0,
                1e-12,
            );
            Ok(CircleGain {
                g,
                fidelity,
                fallback: true,
            })
        }
    }
}

/// Golden-section maximization of a unimodal function on `[a, b]`.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}
