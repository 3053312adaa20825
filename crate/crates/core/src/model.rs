//! Domain types, the two quadrature kernels and the single-state fidelity.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};
use std::fmt;

use crate::error::{Error, Result};

/// Squeezing `r ≥ 0` of the two-mode squeezed vacuum shared by sender and receiver.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ChannelSqueezing(f64);

impl ChannelSqueezing {
    pub fn new(r: f64) -> Result<Self> {
        if !r.is_finite() || r < 0.0 {
            return Err(Error::invalid(
                "r",
                r,
                "squeezing must be finite and non-negative",
            ));
        }
        Ok(Self(r))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Beam-splitter angle and the two displacement gains applied by the receiver.
///
/// `g_u` scales the position displacement `x₃ → x₃ + g_u·x̃_u`, `g_v` the
/// momentum displacement `p₃ → p₃ + g_v·p̃_v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolSettings {
    pub theta: f64,
    pub g_u: f64,
    pub g_v: f64,
}

impl ProtocolSettings {
    pub fn new(theta: f64, g_u: f64, g_v: f64) -> Result<Self> {
        if !theta.is_finite() || theta <= 0.0 || theta >= FRAC_PI_2 {
            return Err(Error::invalid(
                "theta",
                theta,
                "must lie in the open interval (0, π/2)",
            ));
        }
        if !g_u.is_finite() {
            return Err(Error::invalid("g_u", g_u, "gain must be finite"));
        }
        if !g_v.is_finite() {
            return Err(Error::invalid("g_v", g_v, "gain must be finite"));
        }
        Ok(Self { theta, g_u, g_v })
    }

    /// Balanced beam splitter with `g_u = g_v = √2`.
    pub fn original() -> Self {
        Self {
            theta: FRAC_PI_4,
            g_u: SQRT_2,
            g_v: SQRT_2,
        }
    }

    /// Balanced beam splitter with a common gain.
    pub fn symmetric(g: f64) -> Self {
        Self {
            theta: FRAC_PI_4,
            g_u: g,
            g_v: g,
        }
    }

    /// The mirror image under `Re α ↔ Im α`: `θ → π/2 − θ`, `g_u ↔ g_v`.
    pub fn mirrored(self) -> Self {
        Self {
            theta: FRAC_PI_2 - self.theta,
            g_u: self.g_v,
            g_v: self.g_u,
        }
    }
}

/// Complex amplitude labelling the coherent input state `|α⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CoherentAmplitude {
    pub re: f64,
    pub im: f64,
}

impl CoherentAmplitude {
    pub const ZERO: Self = Self { re: 0.0, im: 0.0 };

    pub fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub fn from_polar(magnitude: f64, phase: f64) -> Self {
        Self {
            re: magnitude * phase.cos(),
            im: magnitude * phase.sin(),
        }
    }

    pub fn magnitude(self) -> f64 {
        self.re.hypot(self.im)
    }

    /// The phase `ω` in `α = |α|e^{iω}`.
    pub fn phase(self) -> f64 {
        self.im.atan2(self.re)
    }

    pub fn to_complex(self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re, self.im)
    }
}

impl From<num_complex::Complex64> for CoherentAmplitude {
    fn from(z: num_complex::Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

/// Homodyne results: momentum of mode `v` and position of mode `u`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MeasurementOutcome {
    pub p_v: f64,
    pub x_u: f64,
}

/// Which family an [`InputDistribution`] belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FamilyKind {
    RealLine,
    ImagLine,
    Circumference,
    Disk,
    Gaussian,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 5] = [
        FamilyKind::RealLine,
        FamilyKind::ImagLine,
        FamilyKind::Circumference,
        FamilyKind::Disk,
        FamilyKind::Gaussian,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::RealLine => "real",
            FamilyKind::ImagLine => "imag",
            FamilyKind::Circumference => "circle",
            FamilyKind::Disk => "disk",
            FamilyKind::Gaussian => "gaussian",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|kind| kind.name() == name)
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Pool of coherent states the sender draws from.
///
/// - `RealLine`/`ImagLine`: `α` uniform on `[−R, R]` along the real/imaginary axis.
/// - `Circumference`: `|α| = R`, phase uniform.
/// - `Disk`: `α` uniform on `|α| ≤ R`.
/// - `Gaussian`: density `(λ/π)·exp(−λ|α − β|²)`, i.e. variance `1/(2λ)` per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InputDistribution {
    RealLine {
        radius: f64,
    },
    ImagLine {
        radius: f64,
    },
    Circumference {
        radius: f64,
    },
    Disk {
        radius: f64,
    },
    Gaussian {
        lambda: f64,
        beta: CoherentAmplitude,
    },
}

impl InputDistribution {
    pub fn real_line(radius: f64) -> Result<Self> {
        positive("R", radius).map(|radius| Self::RealLine { radius })
    }

    pub fn imag_line(radius: f64) -> Result<Self> {
        positive("R", radius).map(|radius| Self::ImagLine { radius })
    }

    pub fn circumference(radius: f64) -> Result<Self> {
        if !radius.is_finite() || radius < 0.0 {
            return Err(Error::invalid(
                "R",
                radius,
                "radius must be finite and non-negative",
            ));
        }
        Ok(Self::Circumference { radius })
    }

    pub fn disk(radius: f64) -> Result<Self> {
        positive("R", radius).map(|radius| Self::Disk { radius })
    }

    pub fn gaussian(lambda: f64, beta: CoherentAmplitude) -> Result<Self> {
        let lambda = positive("lambda", lambda)?;
        if !beta.re.is_finite() || !beta.im.is_finite() {
            return Err(Error::invalid(
                "beta",
                beta.re + beta.im,
                "centre must be finite",
            ));
        }
        Ok(Self::Gaussian { lambda, beta })
    }

    pub fn kind(&self) -> FamilyKind {
        match self {
            Self::RealLine { .. } => FamilyKind::RealLine,
            Self::ImagLine { .. } => FamilyKind::ImagLine,
            Self::Circumference { .. } => FamilyKind::Circumference,
            Self::Disk { .. } => FamilyKind::Disk,
            Self::Gaussian { .. } => FamilyKind::Gaussian,
        }
    }

    /// Density over the complex plane for the two absolutely continuous families.
    pub fn plane_density(&self, alpha: CoherentAmplitude) -> Option<f64> {
        match *self {
            Self::Disk { radius } => Some(if alpha.magnitude() <= radius {
                1.0 / (PI * radius * radius)
            } else {
                0.0
            }),
            Self::Gaussian { lambda, beta } => {
                let d2 = (alpha.re - beta.re).powi(2) + (alpha.im - beta.im).powi(2);
                Some(lambda / PI * (-lambda * d2).exp())
            }
            _ => None,
        }
    }

    /// The family with `Re α ↔ Im α` exchanged.
    pub fn mirrored(self) -> Self {
        match self {
            Self::RealLine { radius } => Self::ImagLine { radius },
            Self::ImagLine { radius } => Self::RealLine { radius },
            Self::Gaussian { lambda, beta } => Self::Gaussian {
                lambda,
                beta: CoherentAmplitude::new(beta.im, beta.re),
            },
            other => other,
        }
    }
}

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if !value.is_finite() || value <= 0.0 {
        return Err(Error::invalid(name, value, "must be finite and positive"));
    }
    Ok(value)
}

/// `f₁(θ, g) = (1 − g·sin θ)²`.
pub fn kernel_f1(theta: f64, g: f64) -> f64 {
    let d = 1.0 - g * theta.sin();
    d * d
}

/// `f₂(θ, g) = [(2 + g²)cosh²r + g²cos(2θ)sinh²r − 2g·cos θ·sinh(2r)]/2`.
///
/// Equals twice the summed quadrature variance of input and output, so it is
/// bounded below by 1/2 for every real argument.
pub fn kernel_f2(theta: f64, g: f64, r: ChannelSqueezing) -> f64 {
    let r = r.value();
    let (c, s) = (r.cosh(), r.sinh());
    let f2 = ((2.0 + g * g) * c * c + g * g * (2.0 * theta).cos() * s * s
        - 2.0 * g * theta.cos() * (2.0 * r).sinh())
        / 2.0;
    debug_assert!(f2 > 0.0, "f2 = {f2} at theta = {theta}, g = {g}, r = {r}");
    f2
}

/// The four kernel values entering every fidelity formula.
///
/// The position quadrature carries `f₁(θ + π/2, g_u)` and `f₂(θ − π/2, g_u)`,
/// the momentum quadrature `f₁(θ, g_v)` and `f₂(θ, g_v)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureKernels {
    pub f1_pos: f64,
    pub f2_pos: f64,
    pub f1_mom: f64,
    pub f2_mom: f64,
}

impl QuadratureKernels {
    pub fn new(r: ChannelSqueezing, s: &ProtocolSettings) -> Self {
        Self {
            f1_pos: kernel_f1(s.theta + FRAC_PI_2, s.g_u),
            f2_pos: kernel_f2(s.theta - FRAC_PI_2, s.g_u, r),
            f1_mom: kernel_f1(s.theta, s.g_v),
            f2_mom: kernel_f2(s.theta, s.g_v, r),
        }
    }

    /// Gaussian decay rate of the fidelity in `Re α`.
    pub fn rate_pos(&self) -> f64 {
        self.f1_pos / self.f2_pos
    }

    /// Gaussian decay rate of the fidelity in `Im α`.
    pub fn rate_mom(&self) -> f64 {
        self.f1_mom / self.f2_mom
    }

    /// Fidelity at `α = 0`.
    pub fn vacuum_fidelity(&self) -> f64 {
        1.0 / (self.f2_pos * self.f2_mom).sqrt()
    }
}

/// Fidelity of the teleported state with the input `|α⟩`, averaged over
/// measurement outcomes:
///
/// `F(α) = [f₂ᵤ f₂ᵥ]^{-1/2} · exp(−(f₁ᵥ/f₂ᵥ)·Im²α − (f₁ᵤ/f₂ᵤ)·Re²α)`.
pub fn state_fidelity(alpha: CoherentAmplitude, r: ChannelSqueezing, s: &ProtocolSettings) -> f64 {
    let k = QuadratureKernels::new(r, s);
    k.vacuum_fidelity()
        * (-k.rate_mom() * alpha.im * alpha.im - k.rate_pos() * alpha.re * alpha.re).exp()
}

/// Fidelity of the balanced, unit-gain protocol: `1/(1 + e^{−2r})`.
pub fn original_cvtp_fidelity(r: ChannelSqueezing) -> f64 {
    1.0 / (1.0 + (-2.0 * r.value()).exp())
}
