//! The two phases that drive every oscillatory integral here, and their
//! analytic derivatives.
//!
//! With δ = x_c - x the distance to the caustic and η the spectral
//! offset, the cubic "Airy phase"
//!
//! ```text
//!     φ_a(δ, θ, η) = -θ³/3 + θ (δ - 2 η₀ η)
//! ```
//!
//! generates Airy functions under ∫ e^{ikφ_a}, and the beam phase adds a
//! complex correction that vanishes to second order on the stationary
//! set θ² = δ:
//!
//! ```text
//!     φ_g(δ, θ, η) = φ_a + (1/2) m11(ξ₀ + θ) (θ² - δ)².
//! ```
//!
//! Im φ_g = (θ² - δ)² η₀² / (2 |q(ξ₀+θ)|²) ≥ 0, so e^{ikφ_g} never
//! grows; for large |θ| the imaginary part saturates at η₀²/(2|β|²)
//! while the real part behaves like -θ³/3 + θ³·(3/4 - ...) ≈ large, and
//! (φ_g - φ_a)/θ² → 3/4.
//!
//! Derivatives are exact: φ_a is a polynomial and the correction is a
//! rational function of θ (m11 is a ratio of polynomials), so repeated
//! quotient-rule differentiation stays closed-form. The module also
//! carries the cubic Taylor remainder Z used to compare e^{iz} against
//! its second-order jet, and the empirical stationary-set clearance
//! radius c₀.

use crate::beam::{m11, Incidence};
use num_complex::Complex64;

/// Geometry of one phase evaluation: incidence, distance to the caustic,
/// spectral offset.
#[derive(Debug, Clone, Copy)]
pub struct PhaseContext {
    pub inc: Incidence,
    /// δ = x_c - x, assumed in [0, 1]
    pub delta: f64,
    /// spectral offset η
    pub eta: f64,
}

impl PhaseContext {
    pub fn new(inc: Incidence, delta: f64, eta: f64) -> crate::Result<Self> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(crate::Error::Other(format!(
                "delta = {delta} outside [0, 1]"
            )));
        }
        Ok(PhaseContext { inc, delta, eta })
    }

    /// The η-dependent linear coefficient δ - 2 η₀ η of φ_a.
    fn lin(&self) -> f64 {
        self.delta - 2.0 * self.inc.eta0 * self.eta
    }
}

/// Which of the two phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseKind {
    Airy,
    Beam,
}

/// φ_a(δ, θ, η) = -θ³/3 + θ (δ - 2 η₀ η).
pub fn phi_a(ctx: &PhaseContext, theta: f64) -> f64 {
    -theta * theta * theta / 3.0 + theta * ctx.lin()
}

/// φ_g(δ, θ, η) = φ_a + (1/2) m11(ξ₀+θ) (θ² - δ)².
pub fn phi_g(ctx: &PhaseContext, theta: f64) -> Complex64 {
    let w = theta * theta - ctx.delta;
    Complex64::new(phi_a(ctx, theta), 0.0)
        + 0.5 * m11(ctx.inc.xi0 + theta, &ctx.inc) * w * w
}

/// n-th θ-derivative (1 ≤ n ≤ 4) of the chosen phase, fully analytic.
pub fn phi_derivative(ctx: &PhaseContext, theta: f64, n: usize, which: PhaseKind) -> Complex64 {
    assert!((1..=4).contains(&n), "derivative order {n} outside 1..=4");
    let airy = phi_a_derivative(ctx, theta, n);
    match which {
        PhaseKind::Airy => airy,
        PhaseKind::Beam => airy + beam_correction(ctx).derivative_n(n).eval(theta),
    }
}

fn phi_a_derivative(ctx: &PhaseContext, theta: f64, n: usize) -> Complex64 {
    let v = match n {
        1 => -theta * theta + ctx.lin(),
        2 => -2.0 * theta,
        3 => -2.0,
        _ => 0.0,
    };
    Complex64::new(v, 0.0)
}

/// The correction φ_g - φ_a as an explicit rational function of θ:
/// numerator (2i - (2ξ₀+θ)β)(θ²-δ)², denominator 4 q(ξ₀+θ).
fn beam_correction(ctx: &PhaseContext) -> RationalFn {
    let inc = &ctx.inc;
    let b = inc.beta;
    // m11(ξ₀+θ) numerator: 2i - (2ξ₀+θ)β, and (θ²-δ)²
    let m_num = CPoly::new(vec![Complex64::new(0.0, 2.0) - 2.0 * inc.xi0 * b, -b]);
    let w = CPoly::new(vec![
        Complex64::new(-ctx.delta, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
    ]);
    let num = m_num.mul(&w).mul(&w);
    // q(ξ₀+θ) = β η₀² + (2i - 2ξ₀β) θ - β θ², times 4 for the 1/2·1/(2q)
    let den = CPoly::new(vec![
        4.0 * b * inc.eta0 * inc.eta0,
        4.0 * (Complex64::new(0.0, 2.0) - 2.0 * inc.xi0 * b),
        -4.0 * b,
    ]);
    RationalFn { num, den }
}

/// Complex-coefficient polynomial, ascending coefficients.
#[derive(Debug, Clone)]
struct CPoly(Vec<Complex64>);

impl CPoly {
    fn new(c: Vec<Complex64>) -> Self {
        CPoly(c)
    }

    fn eval(&self, x: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.0.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    fn derivative(&self) -> Self {
        CPoly(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| i as f64 * c)
                .collect(),
        )
    }

    fn mul(&self, o: &CPoly) -> Self {
        let mut out = vec![Complex64::new(0.0, 0.0); self.0.len() + o.0.len() - 1];
        for (i, &a) in self.0.iter().enumerate() {
            for (j, &b) in o.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        CPoly(out)
    }

    fn sub(&self, o: &CPoly) -> Self {
        let n = self.0.len().max(o.0.len());
        let get = |v: &[Complex64], i: usize| v.get(i).copied().unwrap_or_default();
        CPoly((0..n).map(|i| get(&self.0, i) - get(&o.0, i)).collect())
    }
}

/// Ratio of polynomials with exact differentiation by the quotient rule.
#[derive(Debug, Clone)]
struct RationalFn {
    num: CPoly,
    den: CPoly,
}

impl RationalFn {
    fn eval(&self, x: f64) -> Complex64 {
        self.num.eval(x) / self.den.eval(x)
    }

    fn derivative(&self) -> Self {
        // (p/q)' = (p'q - pq') / q²
        let p = &self.num;
        let q = &self.den;
        RationalFn {
            num: p.derivative().mul(q).sub(&p.mul(&q.derivative())),
            den: q.mul(q),
        }
    }

    fn derivative_n(&self, n: usize) -> Self {
        let mut r = self.clone();
        for _ in 0..n {
            r = r.derivative();
        }
        r
    }
}

/// Taylor remainder of e^{iz} past its second-order jet:
/// Z(z) = (e^{iz} - 1 - iz - (iz)²/2) / z³
///      = (1/(2i)) ∫₀¹ e^{isz} (1-s)² ds.
/// |Z| < 1/2 on Im z ≥ 0; Z(0) = -i/6. Below |z| = 1e-2 the difference
/// form loses ~6 digits to cancellation, so a 12-term series of the
/// integral form takes over.
pub fn z_remainder(z: Complex64) -> Complex64 {
    if z.norm() < 1e-2 {
        // Z(z) = -i Σ_{j≥0} (iz)^j / (j+3)!
        let iz = Complex64::i() * z;
        let mut term = Complex64::new(1.0, 0.0);
        let mut fact = 6.0; // (0+3)!
        let mut sum = Complex64::new(0.0, 0.0);
        for j in 0..12 {
            sum += term / fact;
            term *= iz;
            fact *= (j + 4) as f64;
        }
        return -Complex64::i() * sum;
    }
    let iz = Complex64::i() * z;
    (iz.exp() - (Complex64::new(1.0, 0.0) + iz + iz * iz / 2.0)) / (z * z * z)
}

/// Smallest c such that |∂θ φ(δ, θ, η)| ≥ θ²/16 holds for every sampled
/// θ with |θ| ≥ c (1 + |η|^{1/2}), scanned over δ ∈ [0, 1], η ∈ [-1, 1]
/// and |θ| ≤ 50, for both phases. A small safety margin is added so
/// downstream truncation radii sit strictly inside the verified region.
pub fn empirical_c0(inc: &Incidence) -> f64 {
    let mut c0: f64 = 0.0;
    let deltas = [0.0, 0.1, 0.25, 0.5, 0.75, 1.0];
    let etas = [-1.0, -0.5, -0.1, 0.0, 0.1, 0.5, 1.0];
    for &delta in &deltas {
        for &eta in &etas {
            let ctx = PhaseContext { inc: *inc, delta, eta };
            let scale = 1.0 + eta.abs().sqrt();
            let mut theta = -50.0;
            while theta <= 50.0 {
                if theta != 0.0 {
                    for which in [PhaseKind::Airy, PhaseKind::Beam] {
                        let d1 = phi_derivative(&ctx, theta, 1, which).norm();
                        if d1 < theta * theta / 16.0 {
                            // bound fails here: c must push the admissible
                            // region past this θ
                            c0 = c0.max(theta.abs() / scale);
                        }
                    }
                }
                theta += 0.02;
            }
        }
    }
    c0 * 1.05 + 0.05
}
