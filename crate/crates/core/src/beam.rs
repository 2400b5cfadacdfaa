//! Closed-form first-order Gaussian beam for the sound-speed profile
//! n(x) = √(1 - x), launched from the y-axis at angle Θ.
//!
//! The central ray through launch offset z is
//!
//! ```text
//!     x(s) = 2 s ξ₀ - s²,   y(s; z) = z + 2 s η₀,
//!     ξ(s) = ξ₀ - s,        η(s) = η₀,
//! ```
//!
//! with ξ₀ = cos Θ, η₀ = sin Θ. The ray turns at s = ξ₀ where it touches
//! the caustic line x = x_c = ξ₀². All beam coefficients are rational in
//! s through the geometric spreading polynomial
//!
//! ```text
//!     q(s) = 1 + 2is - s² β,   β = 1 + 2i ξ₀ = q'(0)/... (q(0) = 1),
//! ```
//!
//! which never vanishes for real s. Its square root is taken with the cut
//! along the ray {-tβ : t ≥ 0}, which the curve s ↦ q(s) never crosses,
//! so √q(s) stays continuous even though the principal root would jump
//! near s = 1/ξ₀.

use crate::{Error, Result};
use num_complex::Complex64;

/// Default admissible interval for the incidence angle: grazing and
/// normal incidence are excluded.
pub const THETA_MIN: f64 = 0.1;
pub const THETA_MAX: f64 = std::f64::consts::FRAC_PI_2 - 0.1;

/// Incidence geometry derived from the angle Θ ∈ (0, π/2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Incidence {
    /// incidence angle in radians
    pub theta: f64,
    /// ξ₀ = cos Θ
    pub xi0: f64,
    /// η₀ = sin Θ
    pub eta0: f64,
    /// β = 1 + 2i ξ₀
    pub beta: Complex64,
    /// caustic abscissa x_c = ξ₀²
    pub x_c: f64,
}

/// Build the incidence data, rejecting near-grazing and near-normal
/// angles where the fold geometry degenerates.
pub fn make_incidence(theta: f64) -> Result<Incidence> {
    if !(THETA_MIN..=THETA_MAX).contains(&theta) {
        return Err(Error::BadIncidence {
            theta,
            lo: THETA_MIN,
            hi: THETA_MAX,
        });
    }
    let xi0 = theta.cos();
    let eta0 = theta.sin();
    Ok(Incidence {
        theta,
        xi0,
        eta0,
        beta: Complex64::new(1.0, 2.0 * xi0),
        x_c: xi0 * xi0,
    })
}

impl Incidence {
    /// Ray abscissa x(s) = 2 s ξ₀ - s².
    pub fn ray_x(&self, s: f64) -> f64 {
        2.0 * s * self.xi0 - s * s
    }

    /// Ray ordinate y(s; z) = z + 2 s η₀.
    pub fn ray_y(&self, s: f64, z: f64) -> f64 {
        z + 2.0 * s * self.eta0
    }

    /// Momentum ξ(s) = ξ₀ - s (the η component stays η₀).
    pub fn momentum_xi(&self, s: f64) -> f64 {
        self.xi0 - s
    }

    /// Reference phase S(s; z) = η₀ z + 2s - 2 s² ξ₀ + (2/3) s³, the
    /// integral of 2 (1 - x(s)) from the launch value S(0; z) = η₀ z.
    pub fn phase_s(&self, s: f64, z: f64) -> f64 {
        self.eta0 * z + 2.0 * s - 2.0 * s * s * self.xi0 + 2.0 / 3.0 * s * s * s
    }

    /// Beam parameter along the ray that passes through height y: the
    /// s-value of the ray point with the same y-coordinate,
    /// s* = (y - z) / (2 η₀).
    pub fn s_star(&self, y: f64, z: f64) -> f64 {
        (y - z) / (2.0 * self.eta0)
    }
}

/// The geometric spreading polynomial q(s) = 1 + 2is - s² β.
pub fn q_poly(s: f64, inc: &Incidence) -> Complex64 {
    Complex64::new(1.0, 2.0 * s) - s * s * inc.beta
}

/// dq/ds = 2i - 2sβ.
pub fn q_poly_prime(s: f64, inc: &Incidence) -> Complex64 {
    Complex64::new(0.0, 2.0) - 2.0 * s * inc.beta
}

/// Square root with the branch cut along {-tβ : t ≥ 0}: computed as
/// √(w β̄) / √(β̄) with principal roots. Continuous along s ↦ q(s) for
/// all real s, which the principal root is not.
pub fn sqrt_branch_safe(w: Complex64, inc: &Incidence) -> Result<Complex64> {
    let bc = inc.beta.conj();
    let rotated = w * bc;
    // the excluded ray maps to the negative real axis of the rotated plane
    if rotated.im == 0.0 && rotated.re < 0.0 {
        return Err(Error::BranchCut(w));
    }
    Ok(rotated.sqrt() / bc.sqrt())
}

/// Hessian entry m11(s) = (2i - (ξ₀ + s) β) / (2 q(s)).
pub fn m11(s: f64, inc: &Incidence) -> Complex64 {
    (Complex64::new(0.0, 2.0) - (inc.xi0 + s) * inc.beta) / (2.0 * q_poly(s, inc))
}

/// Hessian entry m22(s) = (ξ₀ - s) β / (2 q(s)); in particular
/// m22(0) = ξ₀ β / 2 and m22(ξ₀) = 0.
pub fn m22(s: f64, inc: &Incidence) -> Complex64 {
    (inc.xi0 - s) * inc.beta / (2.0 * q_poly(s, inc))
}

/// Full Hessian M(s) = (M₀ - (sβ/2) I) / q(s) with M₀ = Q + iP,
/// P = [[η₀², -η₀ξ₀], [-η₀ξ₀, ξ₀²]], Q = (1/2)[[-ξ₀, -η₀], [-η₀, ξ₀]].
/// Returned row-major. Solves the Riccati equation dM/ds = -2M².
pub fn m_matrix(s: f64, inc: &Incidence) -> [[Complex64; 2]; 2] {
    let m0 = m0_matrix(inc);
    let shift = s * inc.beta / 2.0;
    let q = q_poly(s, inc);
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let diag = if i == j { shift } else { Complex64::new(0.0, 0.0) };
            out[i][j] = (m0[i][j] - diag) / q;
        }
    }
    out
}

/// Initial Hessian M₀ = Q + iP.
pub fn m0_matrix(inc: &Incidence) -> [[Complex64; 2]; 2] {
    let (xi0, eta0) = (inc.xi0, inc.eta0);
    [
        [
            Complex64::new(-xi0 / 2.0, eta0 * eta0),
            Complex64::new(-eta0 / 2.0, -eta0 * xi0),
        ],
        [
            Complex64::new(-eta0 / 2.0, -eta0 * xi0),
            Complex64::new(xi0 / 2.0, xi0 * xi0),
        ],
    ]
}

/// Gaussian launch envelope A(y) = exp(-y² / (2σ²)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    pub sigma: f64,
}

impl Envelope {
    pub fn new(sigma: f64) -> Self {
        Envelope { sigma }
    }

    pub fn eval(&self, y: f64) -> f64 {
        (-y * y / (2.0 * self.sigma * self.sigma)).exp()
    }

    /// k-scaled Fourier transform
    /// Â(η) = √(k/2π) ∫ A(y) e^{-ikyη} dy = σ √k e^{-k²η²σ²/2}.
    pub fn hat(&self, eta: f64, k: f64) -> f64 {
        self.sigma * k.sqrt() * (-0.5 * k * k * eta * eta * self.sigma * self.sigma).exp()
    }

    /// Half-width η_max at which |Â| has fallen to `floor` times |Â(0)|.
    pub fn hat_support(&self, k: f64, floor: f64) -> f64 {
        (-2.0 * floor.ln()).sqrt() / (k * self.sigma)
    }
}

/// Beam amplitude a(s; z) = A(z) √(-i m22(0)) / √q(s), branch-safe root
/// in the denominator. |a| |q|^{1/2} is constant in s by construction.
pub fn amplitude(s: f64, z: f64, inc: &Incidence, env: &Envelope) -> Result<Complex64> {
    let m22_0 = inc.xi0 * inc.beta / 2.0;
    let root0 = (Complex64::new(0.0, -1.0) * m22_0).sqrt();
    Ok(env.eval(z) * root0 / sqrt_branch_safe(q_poly(s, inc), inc)?)
}

/// Single-beam field value
/// a(s*; z) exp(ik [S + (x - x(s*)) ξ(s*) + (1/2) m11(s*)(x - x(s*))²])
/// with s* the parameter of the ray point at height y.
pub fn beam_value(
    x: f64,
    y: f64,
    z: f64,
    inc: &Incidence,
    env: &Envelope,
    k: f64,
) -> Result<Complex64> {
    let s = inc.s_star(y, z);
    let dx = x - inc.ray_x(s);
    let phase = Complex64::new(inc.phase_s(s, z) + dx * inc.momentum_xi(s), 0.0)
        + 0.5 * m11(s, inc) * dx * dx;
    Ok(amplitude(s, z, inc, env)? * (Complex64::i() * k * phase).exp())
}
