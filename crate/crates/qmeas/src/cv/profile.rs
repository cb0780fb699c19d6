//! Detector acceptance functions: the even, L2-normalized response profile
//! `f(u)` of a finite-resolution position detector, together with its second
//! moment `sigma_x^2`, the momentum kick `eta(p)^2 = int |f'|^2`, and the
//! autocorrelation that drives the off-diagonal suppression of the kernel.

use crate::error::{Error, Result};

/// Simpson quadrature over `[a, b]`; `panels` is rounded up to even.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels + panels % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + h * k as f64);
    }
    acc * h / 3.0
}

/// Detector acceptance profile. All variants are even functions of `u`,
/// normalized so `int |f(u)|^2 du = 1`.
#[derive(Clone, Debug)]
pub enum AcceptanceProfile {
    /// `f(u) = (sigma sqrt(2 pi))^{-1/2} exp(-u^2 / 4 sigma^2)`.
    Gaussian { sigma: f64 },
    /// `f(u) = s / (1 + cosh(alpha u)/cosh(alpha b))`, a square pulse on
    /// `[-b, b]` smoothed on the scale `1/alpha`.
    SmoothedSquare { alpha: f64, b: f64 },
    /// Even samples on a symmetric grid, cubic-interpolated, renormalized at
    /// construction.
    Tabulated(TabulatedProfile),
}

/// Sampled profile; see [`AcceptanceProfile::tabulated`].
#[derive(Clone, Debug)]
pub struct TabulatedProfile {
    /// Sample abscissas, symmetric about zero, ascending.
    us: Vec<f64>,
    /// Normalized sample values.
    fs: Vec<f64>,
}

impl TabulatedProfile {
    fn du(&self) -> f64 {
        self.us[1] - self.us[0]
    }

    /// Cubic (4-point Lagrange) interpolation; zero outside the samples.
    fn eval(&self, u: f64) -> f64 {
        let n = self.us.len();
        let lo = self.us[0];
        let hi = self.us[n - 1];
        if u < lo || u > hi {
            return 0.0;
        }
        let du = self.du();
        let pos = (u - lo) / du;
        let cell = (pos.floor() as usize).min(n - 2);
        let base = cell.saturating_sub(1).min(n - 4);
        let t = pos - base as f64;
        let mut out = 0.0;
        for (k, &fk) in self.fs[base..base + 4].iter().enumerate() {
            let mut l = 1.0;
            for m in 0..4 {
                if m != k {
                    l *= (t - m as f64) / (k as f64 - m as f64);
                }
            }
            out += l * fk;
        }
        out
    }
}

impl AcceptanceProfile {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        if sigma.is_nan() || sigma <= 0.0 {
            return Err(Error::InvalidProfile {
                reason: format!("gaussian width must be positive, got {sigma}"),
            });
        }
        Ok(Self::Gaussian { sigma })
    }

    pub fn smoothed_square(alpha: f64, b: f64) -> Result<Self> {
        if alpha.is_nan() || b.is_nan() || alpha <= 0.0 || b <= 0.0 {
            return Err(Error::InvalidProfile {
                reason: format!("smoothed square needs alpha, b > 0, got ({alpha}, {b})"),
            });
        }
        Ok(Self::SmoothedSquare { alpha, b })
    }

    /// Builds a tabulated profile from samples on a uniform symmetric grid.
    /// Requires evenness; the samples are rescaled to unit L2 norm.
    pub fn tabulated(us: Vec<f64>, fs: Vec<f64>) -> Result<Self> {
        if us.len() != fs.len() || us.len() < 9 {
            return Err(Error::InvalidProfile {
                reason: "need at least 9 matching samples".into(),
            });
        }
        let n = us.len();
        let du = us[1] - us[0];
        for i in 1..n {
            if (us[i] - us[i - 1] - du).abs() > 1e-9 * du {
                return Err(Error::InvalidProfile {
                    reason: "sample grid must be uniform".into(),
                });
            }
        }
        if (us[0] + us[n - 1]).abs() > 1e-9 * du {
            return Err(Error::InvalidProfile {
                reason: "sample grid must be symmetric about zero".into(),
            });
        }
        let scale = fs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            if (fs[i] - fs[n - 1 - i]).abs() > 1e-8 * scale.max(1.0) {
                return Err(Error::InvalidProfile {
                    reason: format!("profile must be even: f({}) != f({})", us[i], us[n - 1 - i]),
                });
            }
        }
        let mut table = TabulatedProfile { us, fs };
        let norm = simpson(
            |u| table.eval(u).powi(2),
            table.us[0],
            table.us[table.us.len() - 1],
            4 * n,
        );
        if norm <= 0.0 {
            return Err(Error::InvalidProfile {
                reason: "profile has zero norm".into(),
            });
        }
        let s = norm.sqrt();
        for v in &mut table.fs {
            *v /= s;
        }
        Ok(Self::Tabulated(table))
    }

    /// Smoothed-square prefactor `s` with
    /// `s^2 = alpha / (2 coth^2(alpha b)(alpha b coth(alpha b) - 1))`.
    fn smoothed_square_prefactor(alpha: f64, b: f64) -> f64 {
        let ab = alpha * b;
        let coth = 1.0 / ab.tanh();
        (alpha / (2.0 * coth * coth * (ab * coth - 1.0))).sqrt()
    }

    /// The profile value `f(u)`.
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            Self::Gaussian { sigma } => {
                let norm = (sigma * (2.0 * std::f64::consts::PI).sqrt()).powf(-0.5);
                norm * (-u * u / (4.0 * sigma * sigma)).exp()
            }
            Self::SmoothedSquare { alpha, b } => {
                let s = Self::smoothed_square_prefactor(*alpha, *b);
                // cosh(alpha u)/cosh(alpha b) in log space to survive large
                // arguments.
                let au = (alpha * u).abs();
                let ab = alpha * b;
                let log_ratio = au - ab + (1.0 + (-2.0 * au).exp()).ln()
                    - (1.0 + (-2.0 * ab).exp()).ln();
                if log_ratio > 700.0 {
                    return 0.0;
                }
                s / (1.0 + log_ratio.exp())
            }
            Self::Tabulated(t) => t.eval(u),
        }
    }

    /// Integration half-range that captures the profile to round-off.
    fn support_radius(&self) -> f64 {
        match self {
            Self::Gaussian { sigma } => 18.0 * sigma,
            Self::SmoothedSquare { alpha, b } => b + 45.0 / alpha,
            Self::Tabulated(t) => t.us[t.us.len() - 1],
        }
    }

    /// `|int f^2 - 1|`, by quadrature.
    pub fn normalization_defect(&self) -> f64 {
        let r = self.support_radius();
        (simpson(|u| self.eval(u).powi(2), -r, r, self.quadrature_panels(r)) - 1.0).abs()
    }

    /// Detector resolution squared, `sigma_x^2 = int u^2 |f(u)|^2 du`.
    ///
    /// The smoothed square uses the closed form
    /// `b^2 (1 - 2ab cosh(ab) / 3(ab cosh(ab) - sinh(ab)) + pi^2/3(ab)^2)`,
    /// cross-checked against quadrature; if they were ever to disagree beyond
    /// 1e-4 relative, the quadrature value wins.
    pub fn sigma_x_squared(&self) -> Result<f64> {
        match self {
            Self::Gaussian { sigma } => Ok(sigma * sigma),
            Self::SmoothedSquare { alpha, b } => {
                let ab = alpha * b;
                // 2ab cosh / 3(ab cosh - sinh) with cosh divided out, so large
                // arguments don't overflow.
                let closed = b
                    * b
                    * (1.0 - 2.0 * ab / (3.0 * (ab - ab.tanh()))
                        + std::f64::consts::PI.powi(2) / (3.0 * ab * ab));
                let quad = self.second_moment_quadrature();
                if (closed - quad).abs() > 1e-4 * quad.abs().max(1e-300) {
                    return Ok(quad);
                }
                Ok(closed)
            }
            Self::Tabulated(_) => Ok(self.second_moment_quadrature()),
        }
    }

    /// Second moment by direct quadrature; the oracle side of the
    /// closed-form/quadrature cross-check.
    pub fn second_moment_quadrature(&self) -> f64 {
        let r = self.support_radius();
        simpson(|u| u * u * self.eval(u).powi(2), -r, r, self.quadrature_panels(r))
    }

    /// Enough Simpson panels to resolve the sharpest feature of the profile.
    fn quadrature_panels(&self, radius: f64) -> usize {
        let sharpest = match self {
            Self::Gaussian { sigma } => *sigma,
            Self::SmoothedSquare { alpha, .. } => 1.0 / alpha,
            Self::Tabulated(t) => t.du(),
        };
        16_000usize.max((16.0 * radius / sharpest).ceil() as usize).min(4_000_000)
    }

    /// Momentum disturbance `eta(p)^2 = int |f'(u)|^2 du`. Bounded below by
    /// `1/(4 sigma_x^2)`, with equality exactly for the Gaussian.
    pub fn eta_p_squared(&self) -> Result<f64> {
        match self {
            Self::Gaussian { sigma } => Ok(1.0 / (4.0 * sigma * sigma)),
            Self::SmoothedSquare { alpha, b } => {
                let ab = alpha * b;
                let coth = 1.0 / ab.tanh();
                Ok(alpha * alpha / 6.0
                    * (1.0 / (ab * coth - 1.0) - 3.0 / ab.sinh().powi(2)))
            }
            Self::Tabulated(t) => {
                // Finite-difference derivative of the interpolant on a fine
                // grid, then quadrature of its square.
                let r = t.us[t.us.len() - 1];
                let h = t.du() / 16.0;
                Ok(simpson(
                    |u| ((self.eval(u + h) - self.eval(u - h)) / (2.0 * h)).powi(2),
                    -r,
                    r,
                    16_000,
                ))
            }
        }
    }

    /// Autocorrelation `F(u) = int f(w) f(w - u) dw`; the factor that
    /// multiplies the kernel off-diagonals under a position measurement.
    /// `F(0) = 1` and `F'' (0) = -eta(p)^2`.
    pub fn autocorrelation(&self, u: f64) -> f64 {
        match self {
            Self::Gaussian { sigma } => (-u * u / (8.0 * sigma * sigma)).exp(),
            Self::SmoothedSquare { alpha, b } => {
                let au = alpha * u.abs();
                if au < 0.25 {
                    // The closed form divides by sinh(alpha u / 2); near zero
                    // evaluate the integral directly instead.
                    return self.autocorrelation_quadrature(u);
                }
                let ab = alpha * b;
                let u = u.abs();
                let pref = alpha * ab.sinh() / (2.0 * (ab / ab.tanh() - 1.0));
                let num = (b - u / 2.0) * (alpha * (b + u / 2.0)).sinh()
                    - (b + u / 2.0) * (alpha * (b - u / 2.0)).sinh();
                let den = (alpha * u / 2.0).sinh()
                    * (alpha * (b + u / 2.0)).sinh()
                    * (alpha * (b - u / 2.0)).sinh();
                if den == 0.0 || !den.is_finite() || !num.is_finite() {
                    return self.autocorrelation_quadrature(u);
                }
                pref * num / den
            }
            Self::Tabulated(_) => self.autocorrelation_quadrature(u),
        }
    }

    /// Autocorrelation by direct quadrature (oracle for the closed forms).
    pub fn autocorrelation_quadrature(&self, u: f64) -> f64 {
        let r = self.support_radius();
        simpson(
            |w| self.eval(w) * self.eval(w - u),
            -r,
            r + u.abs(),
            self.quadrature_panels(r),
        )
    }
}
