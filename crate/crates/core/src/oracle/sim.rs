//! Wavefunction-level simulation of the teleportation protocol.
//!
//! Alice mixes the input `φ_α` with her half of the two-mode squeezed vacuum
//! on a beam splitter of angle θ, measures momentum `p̃_v` on one output port
//! and position `x̃_u` on the other, and Bob displaces his mode by
//! `(g_u·x̃_u, g_v·p̃_v)`. Everything below integrates the position-basis
//! wavefunctions numerically; nothing here uses the closed-form fidelity.
//!
//! Integration windows and step sizes come from the Gaussian envelope of the
//! integrands, which is read off the exponents of the wavefunctions.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::convention::{fourier_norm, vacuum_amplitude_norm, FOURIER_RATE};
use crate::error::{Error, Result};
use crate::model::{ChannelSqueezing, CoherentAmplitude, MeasurementOutcome, ProtocolSettings};
use crate::quadrature::Estimate;

/// Half-width of every truncated window, in envelope standard deviations.
pub const WINDOW_SIGMAS: f64 = 10.0;

/// Agreement required between successive refinements.
pub const REFINEMENT_TOLERANCE: f64 = 1e-10;

// Step rule for a Gaussian of width σ modulated at angular frequency ω:
// h = π/(|ω| + SPACING_K/σ) keeps the aliasing error below ~1e-16 even on the
// half-density grid used for the convergence check.
const SPACING_K: f64 = 9.0;

const OUTER_NODES: usize = 48;
const MAX_LEVELS: u32 = 3;

/// Position-space samples of a wavefunction on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WavefunctionGrid {
    pub nodes: Vec<f64>,
    pub amplitudes: Vec<Complex64>,
    pub halfwidth: f64,
}

impl WavefunctionGrid {
    /// Samples `f` on `centre ± halfwidth` with `n` nodes.
    pub fn sample<F: FnMut(f64) -> Complex64>(
        centre: f64,
        halfwidth: f64,
        n: usize,
        mut f: F,
    ) -> Self {
        let grid = uniform(centre, halfwidth, n);
        let amplitudes = grid.iter().map(|&x| f(x)).collect();
        Self {
            nodes: grid,
            amplitudes,
            halfwidth,
        }
    }

    /// Trapezoid estimate of `∫|ψ|²`.
    pub fn norm_sqr(&self) -> f64 {
        let h = self.nodes[1] - self.nodes[0];
        h * self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>()
    }
}

/// `(2/π)^{1/4}·exp(−x² + 2αx − |α|²/2 − α²/2)`.
pub fn coherent_wavefunction(alpha: CoherentAmplitude, x: f64) -> Complex64 {
    let a = alpha.to_complex();
    let exponent = -x * x + 2.0 * a * x - 0.5 * a.norm_sqr() - 0.5 * a * a;
    vacuum_amplitude_norm() * exponent.exp()
}

/// `√(2/π)·exp(−e^{−2r}(x₂ + x₃)²/2 − e^{2r}(x₂ − x₃)²/2)`.
pub fn tmsv_wavefunction(r: ChannelSqueezing, x2: f64, x3: f64) -> f64 {
    let r = r.value();
    let sum = x2 + x3;
    let diff = x2 - x3;
    vacuum_amplitude_norm().powi(2)
        * (-(-2.0 * r).exp() * sum * sum / 2.0 - (2.0 * r).exp() * diff * diff / 2.0).exp()
}

/// Quadratic exponent `A·v² + 2B·v·y + C·y² + 2b_v·v + 2b_y·y + k` of a
/// Gaussian integrand in two variables.
#[derive(Debug, Clone, Copy, Default)]
struct QuadForm {
    a: f64,
    b: f64,
    c: f64,
    bv: f64,
    by: f64,
    k: f64,
}

impl QuadForm {
    /// Adds `w·(p·v + q·y + k)²`.
    fn add(&mut self, w: f64, p: f64, q: f64, k: f64) {
        self.a += w * p * p;
        self.b += w * p * q;
        self.c += w * q * q;
        self.bv += w * p * k;
        self.by += w * q * k;
        self.k += w * k * k;
    }

    fn det(&self) -> f64 {
        self.a * self.c - self.b * self.b
    }

    /// `uᵀ M⁻¹ w` for the 2×2 matrix of second-order coefficients.
    fn inv_product(&self, u: (f64, f64), w: (f64, f64)) -> f64 {
        (self.c * u.0 * w.0 - self.b * (u.0 * w.1 + u.1 * w.0) + self.a * u.1 * w.1) / self.det()
    }

    fn minimiser(&self) -> (f64, f64) {
        let det = self.det();
        (
            (-self.c * self.bv + self.b * self.by) / det,
            (self.b * self.bv - self.a * self.by) / det,
        )
    }

    /// Minimising `v` at fixed `y`.
    fn conditional_v(&self, y: f64) -> f64 {
        -(self.b * y + self.bv) / self.a
    }

    /// Width of `exp(−Q)` along `v` at fixed `y`.
    fn sigma_v(&self) -> f64 {
        1.0 / (2.0 * self.a).sqrt()
    }

    /// Width of the `y`-marginal of `exp(−Q)`.
    fn sigma_y(&self) -> f64 {
        1.0 / (2.0 * self.det() / self.a).sqrt()
    }

    /// `log` of `|∫∫ exp(−Q + i·ωᵀ(v, y))|²` up to a constant.
    fn log_sq_magnitude(&self, omega: (f64, f64)) -> f64 {
        let b = (self.bv, self.by);
        2.0 * (self.inv_product(b, b) - self.k) - 0.5 * self.inv_product(omega, omega)
    }
}

/// Exponent of `φ_α(v·sinθ + x̃·cosθ)·Φ(v·cosθ − x̃·sinθ, y − shift)` in
/// `(v, y)`, where `v` is the integration variable of the momentum
/// measurement.
fn channel_terms(
    form: &mut QuadForm,
    alpha: CoherentAmplitude,
    r: f64,
    theta: f64,
    x_u: f64,
    shift: f64,
) {
    let (s, c) = theta.sin_cos();
    form.add(1.0, s, 0.0, x_u * c - alpha.re);
    form.add((-2.0 * r).exp() / 2.0, c, 1.0, -x_u * s - shift);
    form.add((2.0 * r).exp() / 2.0, c, -1.0, -x_u * s + shift);
}

fn uniform(centre: f64, halfwidth: f64, n: usize) -> Vec<f64> {
    debug_assert!(n >= 3 && n % 2 == 1);
    let h = 2.0 * halfwidth / (n - 1) as f64;
    let mid = (n / 2) as f64;
    (0..n).map(|i| centre + (i as f64 - mid) * h).collect()
}

/// Odd node count covering `±WINDOW_SIGMAS·sigma` with spacing at most `h`.
fn node_count(sigma: f64, h: f64) -> usize {
    2 * ((WINDOW_SIGMAS * sigma / h).ceil() as usize).max(2) + 1
}

fn step(sigma: f64, omega: f64) -> f64 {
    PI / (omega.abs() + SPACING_K / sigma)
}

/// Fine and half-density trapezoid sums of complex samples on a uniform grid
/// of odd length.
fn trapezoid_pair(values: &[Complex64], h: f64) -> (Complex64, Complex64) {
    let fine: Complex64 = values.iter().sum();
    let coarse: Complex64 = values.iter().step_by(2).sum();
    (fine * h, coarse * 2.0 * h)
}

/// Amplitude `Ψ′(p̃_v, x̃_u, x₃)` of Bob's mode after Alice's measurement,
/// unnormalized so that `∫|Ψ′|² dx₃` is the outcome density.
pub fn post_measurement_amplitude(
    alpha: CoherentAmplitude,
    r: ChannelSqueezing,
    theta: f64,
    outcome: MeasurementOutcome,
    x3: f64,
) -> Result<Complex64> {
    check_theta(theta)?;
    let (s, c) = theta.sin_cos();
    let mut form = QuadForm::default();
    channel_terms(&mut form, alpha, r.value(), theta, outcome.x_u, 0.0);
    let centre = form.conditional_v(x3);
    let sigma = form.sigma_v();
    let omega = FOURIER_RATE * (alpha.im * s - outcome.p_v);
    let h = step(sigma, omega);
    let n = node_count(sigma, h);
    let halfwidth = h * (n / 2) as f64;
    let values: Vec<Complex64> = uniform(centre, halfwidth, n)
        .into_iter()
        .map(|v| {
            coherent_wavefunction(alpha, v * s + outcome.x_u * c)
                * tmsv_wavefunction(r, v * c - outcome.x_u * s, x3)
                * Complex64::from_polar(1.0, -FOURIER_RATE * v * outcome.p_v)
        })
        .collect();
    let (fine, coarse) = trapezoid_pair(&values, h);
    let diff = (fine - coarse).norm();
    if diff > REFINEMENT_TOLERANCE {
        return Err(Error::QuadratureNonConvergence {
            context: "post-measurement amplitude",
            difference: diff,
        });
    }
    Ok(fourier_norm() * fine)
}

/// Bob's unnormalized state `χ(x₃) = e^{2i·g_v·p̃_v·x₃}·Ψ′(x₃ − g_u·x̃_u)`,
/// without the global phase.
pub fn teleported_wavefunction(
    alpha: CoherentAmplitude,
    r: ChannelSqueezing,
    s: &ProtocolSettings,
    outcome: MeasurementOutcome,
    x3: f64,
) -> Result<Complex64> {
    let psi = post_measurement_amplitude(alpha, r, s.theta, outcome, x3 - s.g_u * outcome.x_u)?;
    Ok(Complex64::from_polar(1.0, FOURIER_RATE * s.g_v * outcome.p_v * x3) * psi)
}

/// Width of `|Ψ′(x₃)|²` in `x₃` and its centre.
fn bob_marginal(
    alpha: CoherentAmplitude,
    r: ChannelSqueezing,
    theta: f64,
    x_u: f64,
    shift: f64,
) -> (f64, f64) {
    let mut form = QuadForm::default();
    channel_terms(&mut form, alpha, r.value(), theta, x_u, shift);
    (
        form.minimiser().1,
        form.sigma_y() / std::f64::consts::SQRT_2,
    )
}

/// Outcome density `p(p̃_v, x̃_u) = ∫|Ψ′(x₃)|² dx₃`.
pub fn outcome_probability(
    alpha: CoherentAmplitude,
    r: ChannelSqueezing,
    theta: f64,
    outcome: MeasurementOutcome,
) -> Result<f64> {
    let (centre, sigma) = bob_marginal(alpha, r, theta, outcome.x_u, 0.0);
    // |Ψ′|² has no oscillation; a few nodes per σ is ample.
    let n = node_count(sigma, sigma / 4.0);
    let h = 2.0 * WINDOW_SIGMAS * sigma / (n - 1) as f64;
    let mut fine = 0.0;
    let mut coarse = 0.0;
    for (i, x3) in uniform(centre, WINDOW_SIGMAS * sigma, n)
        .into_iter()
        .enumerate()
    {
        let v = post_measurement_amplitude(alpha, r, theta, outcome, x3)?.norm_sqr();
        fine += v;
        if i % 2 == 0 {
            coarse += v;
        }
    }
    let (fine, coarse) = (fine * h, coarse * 2.0 * h);
    if (fine - coarse).abs() > REFINEMENT_TOLERANCE {
        return Err(Error::QuadratureNonConvergence {
            context: "outcome probability",
            difference: (fine - coarse).abs(),
        });
    }
    Ok(fine)
}

/// Means and standard deviations `((x̃_u, σ), (p̃_v, σ))` of the measurement
/// record, from the input and channel quadrature statistics.
pub fn outcome_envelope(
    alpha: CoherentAmplitude,
    r: ChannelSqueezing,
    theta: f64,
) -> ((f64, f64), (f64, f64)) {
    let (s, c) = theta.sin_cos();
    let ch = (2.0 * r.value()).cosh();
    let sx = ((c * c + s * s * ch) / 4.0).sqrt();
    let sp = ((s * s + c * c * ch) / 4.0).sqrt();
    ((alpha.re * c, sx), (alpha.im * s, sp))
}

/// `∫∫ p(p̃_v, x̃_u)` over the outcome plane.
pub fn total_outcome_probability(
    alpha: CoherentAmplitude,
    r: ChannelSqueezing,
    theta: f64,
    nodes: usize,
) -> Result<f64> {
    let n = nodes.max(3) | 1;
    let ((mx, sx), (mp, sp)) = outcome_envelope(alpha, r, theta);
    let hx = 2.0 * WINDOW_SIGMAS * sx / (n - 1) as f64;
    let hp = 2.0 * WINDOW_SIGMAS * sp / (n - 1) as f64;
    let mut total = 0.0;
    for x_u in uniform(mx, WINDOW_SIGMAS * sx, n) {
        for p_v in uniform(mp, WINDOW_SIGMAS * sp, n) {
            total += outcome_probability(alpha, r, theta, MeasurementOutcome { p_v, x_u })?;
        }
    }
    Ok(total * hx * hp)
}

/// `|⟨φ_α|χ⟩|²/p` for one measurement outcome.
pub fn conditional_fidelity(
    alpha: CoherentAmplitude,
    r: ChannelSqueezing,
    s: &ProtocolSettings,
    outcome: MeasurementOutcome,
) -> Result<f64> {
    let prob = outcome_probability(alpha, r, s.theta, outcome)?;
    let (centre, sigma) = bob_marginal(alpha, r, s.theta, outcome.x_u, s.g_u * outcome.x_u);
    // The overlap integrand is bounded by |φ_α| and |χ|; cover both.
    let lo = (centre - WINDOW_SIGMAS * sigma).min(alpha.re - 6.0);
    let hi = (centre + WINDOW_SIGMAS * sigma).max(alpha.re + 6.0);
    let mut n = 257;
    let mut previous: Option<Complex64> = None;
    for _ in 0..8 {
        let h = (hi - lo) / (n - 1) as f64;
        let mut sum = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let x3 = lo + h * i as f64;
            sum += coherent_wavefunction(alpha, x3).conj()
                * teleported_wavefunction(alpha, r, s, outcome, x3)?;
        }
        let overlap = sum * h;
        if let Some(prev) = previous {
            if (overlap - prev).norm() <= REFINEMENT_TOLERANCE {
                return Ok(overlap.norm_sqr() / prob);
            }
        }
        previous = Some(overlap);
        n = 2 * n - 1;
    }
    Err(Error::QuadratureNonConvergence {
        context: "conditional fidelity",
        difference: f64::NAN,
    })
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta < PI / 2.0) {
        return Err(Error::invalid(
            "theta",
            theta,
            "beam-splitter angle must lie in (0, pi/2)",
        ));
    }
    Ok(())
}

/// Everything about the fidelity integrand that does not depend on `p̃_v`.
struct FidelityIntegrand {
    alpha: CoherentAmplitude,
    r: ChannelSqueezing,
    s: ProtocolSettings,
}

impl FidelityIntegrand {
    /// Exponent of `|φ_α(x₃)|·|φ_α(..)|·Φ(.., x₃ − g_u·x̃_u)` in `(v, x₃)`.
    fn form(&self, x_u: f64) -> QuadForm {
        let mut form = QuadForm::default();
        channel_terms(
            &mut form,
            self.alpha,
            self.r.value(),
            self.s.theta,
            x_u,
            self.s.g_u * x_u,
        );
        form.add(1.0, 0.0, 1.0, -self.alpha.re);
        form
    }

    /// Angular frequencies of the integrand in `(v, x₃)`.
    fn omega(&self, p_v: f64) -> (f64, f64) {
        let b = self.alpha.im;
        (
            FOURIER_RATE * (b * self.s.theta.sin() - p_v),
            FOURIER_RATE * (self.s.g_v * p_v - b),
        )
    }

    /// The `p̃_v`-independent factor of the integrand.
    fn kernel(&self, v: f64, x3: f64, x_u: f64) -> Complex64 {
        let (s, c) = self.s.theta.sin_cos();
        coherent_wavefunction(self.alpha, x3).conj()
            * coherent_wavefunction(self.alpha, v * s + x_u * c)
            * tmsv_wavefunction(self.r, v * c - x_u * s, x3 - self.s.g_u * x_u)
    }
}

/// Fits `exp(q(t))` with quadratic `q` (given exactly by three samples) and
/// returns its mean and standard deviation.
fn gaussian_from_log<F: Fn(f64) -> f64>(q: F) -> Result<(f64, f64)> {
    let (qm, q0, qp) = (q(-1.0), q(0.0), q(1.0));
    let curvature = 0.5 * (qp + qm - 2.0 * q0);
    let slope = 0.5 * (qp - qm);
    if curvature.is_nan() || curvature >= 0.0 {
        return Err(Error::NumericDomain(format!(
            "fidelity integrand envelope is not normalizable (curvature {curvature})"
        )));
    }
    Ok((-slope / (2.0 * curvature), (-0.5 / curvature).sqrt()))
}

/// Fidelity `∫∫ dp̃_v dx̃_u |∫dx₃ φ_α*(x₃)·χ(x₃)|²` of the teleported state.
pub fn oracle_state_fidelity(
    alpha: CoherentAmplitude,
    r: ChannelSqueezing,
    s: &ProtocolSettings,
) -> Result<f64> {
    oracle_state_fidelity_estimate(alpha, r, s).map(|e| e.value)
}

/// [`oracle_state_fidelity`] with the refinement difference as error.
pub fn oracle_state_fidelity_estimate(
    alpha: CoherentAmplitude,
    r: ChannelSqueezing,
    s: &ProtocolSettings,
) -> Result<Estimate> {
    check_theta(s.theta)?;
    let integrand = FidelityIntegrand { alpha, r, s: *s };
    let form0 = integrand.form(0.0);
    // Window over outcomes: the squared overlap is Gaussian in both records.
    let (mx, sx) = gaussian_from_log(|x_u| {
        let f = integrand.form(x_u);
        f.log_sq_magnitude((0.0, 0.0))
    })?;
    let (mp, sp) = gaussian_from_log(|p_v| form0.log_sq_magnitude(integrand.omega(p_v)))?;

    let p_lo = mp - WINDOW_SIGMAS * sp;
    let p_hi = mp + WINDOW_SIGMAS * sp;
    let ratio = form0.b / form0.a;
    let freq_bounds = |f: &dyn Fn((f64, f64)) -> f64| {
        f(integrand.omega(p_lo))
            .abs()
            .max(f(integrand.omega(p_hi)).abs())
    };
    let omega_v = freq_bounds(&|w| w.0);
    let omega_3 = freq_bounds(&|w| w.1 - w.0 * ratio);
    let sigma_v = form0.sigma_v();
    let sigma_3 = form0.sigma_y();

    let mut last = f64::NAN;
    for level in 0..MAX_LEVELS {
        let refine = (1u32 << level) as f64;
        let hv = step(sigma_v, omega_v) / refine;
        let h3 = step(sigma_3, omega_3) / refine;
        let nv = node_count(sigma_v, hv);
        let n3 = node_count(sigma_3, h3);
        let t: Vec<f64> = uniform(0.0, hv * (nv / 2) as f64, nv);
        let n_out = (OUTER_NODES << level) + 1;
        let xs = uniform(mx, WINDOW_SIGMAS * sx, n_out);
        let ps = uniform(mp, WINDOW_SIGMAS * sp, n_out);
        let hx = xs[1] - xs[0];
        let hp = ps[1] - ps[0];

        let mut sum_fine = 0.0;
        let mut sum_outer_coarse = 0.0;
        let mut sum_inner_coarse = 0.0;
        let mut kernel = vec![Complex64::new(0.0, 0.0); n3 * nv];
        let mut x3_nodes = vec![0.0; n3];
        let mut v_centres = vec![0.0; n3];
        let mut u = vec![Complex64::new(0.0, 0.0); nv];
        for (ix, &x_u) in xs.iter().enumerate() {
            let form = integrand.form(x_u);
            let x3c = form.minimiser().1;
            for (i, x3) in uniform(x3c, h3 * (n3 / 2) as f64, n3)
                .into_iter()
                .enumerate()
            {
                x3_nodes[i] = x3;
                v_centres[i] = form.conditional_v(x3);
                for (j, tj) in t.iter().enumerate() {
                    kernel[i * nv + j] = integrand.kernel(v_centres[i] + tj, x3, x_u);
                }
            }
            for (ip, &p_v) in ps.iter().enumerate() {
                // Outcome phase e^{2i p̃ (g_v x₃ − v)} split into row and column factors.
                let k = FOURIER_RATE * p_v;
                for (j, tj) in t.iter().enumerate() {
                    u[j] = Complex64::from_polar(1.0, -k * tj);
                }
                let mut fine = Complex64::new(0.0, 0.0);
                let mut coarse = Complex64::new(0.0, 0.0);
                for i in 0..n3 {
                    let row = &kernel[i * nv..(i + 1) * nv];
                    let mut acc = Complex64::new(0.0, 0.0);
                    let mut acc_coarse = Complex64::new(0.0, 0.0);
                    for (j, (m, uj)) in row.iter().zip(&u).enumerate() {
                        let term = m * uj;
                        acc += term;
                        if j % 2 == 0 {
                            acc_coarse += term;
                        }
                    }
                    let phase =
                        Complex64::from_polar(1.0, k * (s.g_v * x3_nodes[i] - v_centres[i]));
                    fine += phase * acc;
                    if i % 2 == 0 {
                        coarse += phase * acc_coarse;
                    }
                }
                let amp = fine * (hv * h3 * fourier_norm());
                let amp_coarse = coarse * (4.0 * hv * h3 * fourier_norm());
                let w = amp.norm_sqr();
                sum_fine += w;
                sum_inner_coarse += amp_coarse.norm_sqr();
                if ix % 2 == 0 && ip % 2 == 0 {
                    sum_outer_coarse += w;
                }
            }
        }
        let value = sum_fine * hx * hp;
        let outer_coarse = sum_outer_coarse * 4.0 * hx * hp;
        let inner_coarse = sum_inner_coarse * hx * hp;
        let diff = (value - outer_coarse)
            .abs()
            .max((value - inner_coarse).abs());
        if !value.is_finite() {
            return Err(Error::NumericDomain("non-finite oracle fidelity".into()));
        }
        if diff <= REFINEMENT_TOLERANCE {
            return Ok(Estimate { value, error: diff });
        }
        last = diff;
    }
    Err(Error::QuadratureNonConvergence {
        context: "oracle state fidelity",
        difference: last,
    })
}
