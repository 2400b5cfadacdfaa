//! Evaluation of the Airy function Ai and its derivatives on the parts of
//! the complex plane the solver actually visits: the real axis and the
//! rotated rays arg z = ±π/3.
//!
//! Three evaluation branches cover the plane:
//!
//! ```text
//!   |z| <= 7           Maclaurin: Ai(z) = Ai(0) f(z) + Ai'(0) g(z) with
//!                      f, g the two power-series solutions of w'' = z w,
//!                      30 terms each.
//!
//!   |z| > 7,           Poincaré expansion
//!   |arg z| <= 2π/3        Ai(z) ~ e^{-ζ} / (2 √π z^{1/4}) Σ (-1)^n u_n ζ^{-n},
//!                      ζ = (2/3) z^{3/2}, truncated at 12 terms.
//!
//!   |z| > 7,           rotation through the connection identity
//!   |arg z| > 2π/3         Ai(z) = α Ai(-αz) + ᾱ Ai(-ᾱz),  α = e^{iπ/3},
//!                      whose rotated arguments land in the previous sector.
//! ```
//!
//! The crossover radius 7 balances the two series: the 30-term Maclaurin
//! (summed in double-double to defeat cancellation on the recessive side)
//! holds ~13 digits there, and the asymptotic tail reaches ~1e-10
//! relative. The `method` tag on
//! [`AiryValue`] records which branch produced a value; `Asymptotic` is
//! only reported in the sector |arg z| <= π/3 where the expansion is used
//! at full advertised accuracy, everything else that is not Maclaurin is
//! tagged `Rotated`.
//!
//! Bi is deliberately not exposed; where a second solution is needed the
//! callers use Ai at rotated arguments instead.

use num_complex::Complex64;
use std::f64::consts::PI;

/// Radius of the disk handled by the Maclaurin series.
pub const CROSSOVER_RADIUS: f64 = 7.0;

/// Ai(0) = 3^(-2/3) / Γ(2/3), validated against an extended-precision
/// series oracle in the tests below.
pub const AI_ZERO: f64 = 0.355_028_053_887_817_239_26;

/// Ai'(0) = -3^(-1/3) / Γ(1/3), same oracle.
pub const AI_PRIME_ZERO: f64 = -0.258_819_403_792_806_798_41;

/// α = e^{iπ/3}, the rotation in the connection identity
/// Ai(z) = α Ai(-αz) + ᾱ Ai(-ᾱz).
pub fn alpha() -> Complex64 {
    Complex64::from_polar(1.0, PI / 3.0)
}

/// Which evaluation branch produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AiryMethod {
    Maclaurin,
    Asymptotic,
    Rotated,
}

/// Ai and Ai' at a point, together with the branch that computed them.
#[derive(Debug, Clone, Copy)]
pub struct AiryValue {
    pub z: Complex64,
    pub ai: Complex64,
    pub ai_prime: Complex64,
    pub method: AiryMethod,
}

#[derive(Debug, thiserror::Error)]
pub enum AiryError {
    /// exp(-(2/3) z^{3/2}) would exceed the floating range. The sign of
    /// the real part of the exponent is carried so callers can tell
    /// blow-up from a plain range overflow.
    #[error("airy overflow at z = {z}: |Re(2/3 z^(3/2))| = {exponent} exceeds the f64 range")]
    Overflow { z: Complex64, exponent: f64 },
    /// The asymptotic surrogate has a pole/branch point at the origin.
    #[error("argument z = 0 outside the domain of the asymptotic surrogate")]
    ZeroArgument,
}

/// Largest |Re ζ| for which e^{±ζ} stays finite in f64.
const EXP_LIMIT: f64 = 709.0;

/// Number of Maclaurin terms kept in each of the two series.
const MACLAURIN_TERMS: usize = 30;

/// Number of terms kept in the asymptotic series Σ (-1)^n u_n ζ^{-n}.
/// At the crossover radius |ζ| = (2/3)·7^{3/2} ≈ 12.3 the terms still
/// decrease through n = 12, where the first omitted one is ~1e-10.
const ASYMPTOTIC_TERMS: usize = 12;

/// Evaluate Ai and Ai' with full branch/overflow reporting.
pub fn eval(z: Complex64) -> Result<AiryValue, AiryError> {
    if z.norm() <= CROSSOVER_RADIUS {
        let (ai, ai_prime) = maclaurin(z);
        return Ok(AiryValue {
            z,
            ai,
            ai_prime,
            method: AiryMethod::Maclaurin,
        });
    }
    let sector = z.arg().abs();
    if sector <= 2.0 * PI / 3.0 + 1e-14 {
        let (ai, ai_prime) = asymptotic(z)?;
        let method = if sector <= PI / 3.0 + 1e-14 {
            AiryMethod::Asymptotic
        } else {
            AiryMethod::Rotated
        };
        return Ok(AiryValue {
            z,
            ai,
            ai_prime,
            method,
        });
    }
    if z.im == 0.0 {
        // Real z < -crossover: the rotated arguments form a conjugate
        // pair, so the decomposition collapses to twice a real part with
        // a purely imaginary ζ. The oscillation phase t = (2/3)|z|^{3/2}
        // is computed in double-double; a plain powf carries a few-ulp
        // phase error that finite differences of the caller would
        // amplify by 1/h².
        let (ai, ai_prime) = negative_axis(-z.re);
        return Ok(AiryValue {
            z,
            ai,
            ai_prime,
            method: AiryMethod::Rotated,
        });
    }
    // One rotation: both -αz and -ᾱz fall in |arg| <= 2π/3, so a single
    // application of the connection identity always suffices.
    let a = alpha();
    let ac = a.conj();
    let (ai_m, aip_m) = asymptotic(-a * z)?;
    let (ai_c, aip_c) = asymptotic(-ac * z)?;
    Ok(AiryValue {
        z,
        ai: a * ai_m + ac * ai_c,
        // chain rule through the rotated arguments
        ai_prime: -a * a * aip_m - ac * ac * aip_c,
        method: AiryMethod::Rotated,
    })
}

/// Ai and Ai' at z = -s, s > crossover, through the conjugate-pair form
/// of the connection identity:
///
/// ```text
///   Ai(-s)  =  π^{-1/2} s^{-1/4} Re[ e^{i(t - π/4)}  Σ (-1)^n u_n (-it)^{-n} ],
///   Ai'(-s) =  π^{-1/2} s^{1/4}  Re[ e^{i(t - 3π/4)} Σ (-1)^n v_n (-it)^{-n} ],
/// ```
///
/// t = (2/3) s^{3/2}, evaluated in double-double so the phase is accurate
/// to well below one ulp of the result.
fn negative_axis(s: f64) -> (Complex64, Complex64) {
    // t = (2/3) s^{3/2} in double-double
    let r = dd_sqrt(s);
    let s32 = DD::from(s).mul(r);
    let t = s32.scale_f64(2.0).div_f64(3.0);
    // π/4 = (hi, lo)/4 of the double-double π
    let pi4 = DD::with_lo(std::f64::consts::PI / 4.0, 1.2246467991473532e-16 / 4.0);

    let inv_zeta = Complex64::new(0.0, 1.0) / t.to_f64(); // 1/ζ = i/t
    let mut u = 1.0;
    let mut sum_ai = Complex64::new(0.0, 0.0);
    let mut sum_aip = Complex64::new(0.0, 0.0);
    let mut pow = Complex64::new(1.0, 0.0);
    for n in 0..ASYMPTOTIC_TERMS {
        let nf = n as f64;
        let v = u * (6.0 * nf + 1.0) / (1.0 - 6.0 * nf);
        sum_ai += u * pow;
        sum_aip += v * pow;
        u *= (3.0 * nf + 0.5) * (3.0 * nf + 1.5) * (3.0 * nf + 2.5)
            / (54.0 * (nf + 1.0) * (nf + 0.5));
        pow *= -inv_zeta;
    }

    // e^{i(t - π/4)} with the double-double phase folded in to first order
    let phase = t.add(pi4.neg());
    let rot = Complex64::new(phase.hi.cos(), phase.hi.sin())
        * Complex64::new(1.0, phase.lo);
    let q4 = s.sqrt().sqrt();
    let pref = 1.0 / (PI.sqrt() * q4);
    let ai = pref * (rot * sum_ai).re;
    // extra -π/2 rotation for the derivative: e^{i(t - 3π/4)}
    let rot_p = rot * Complex64::new(0.0, -1.0);
    let aip = q4 * q4 * pref * (rot_p * sum_aip).re;
    (Complex64::new(ai, 0.0), Complex64::new(aip, 0.0))
}

/// √x in double-double via one Newton refinement of the f64 root.
fn dd_sqrt(x: f64) -> DD {
    let y0 = x.sqrt();
    let y0sq = DD::two_prod(y0, y0);
    // x - y0² exactly, then one correction step
    let resid = DD::from(x).add(y0sq.neg());
    let corr = resid.to_f64() / (2.0 * y0);
    DD::two_sum(y0, corr)
}

/// Ai(z). Overflow is reported as infinite components, never as garbage;
/// use [`eval`] when the failure needs to be caught.
pub fn ai(z: Complex64) -> Complex64 {
    match eval(z) {
        Ok(v) => v.ai,
        Err(_) => Complex64::new(f64::INFINITY, f64::INFINITY),
    }
}

/// Ai'(z), same conventions as [`ai`].
pub fn ai_prime(z: Complex64) -> Complex64 {
    match eval(z) {
        Ok(v) => v.ai_prime,
        Err(_) => Complex64::new(f64::INFINITY, f64::INFINITY),
    }
}

/// The closed-form asymptotic surrogate
/// Ãi(z) = (1/2) π^{-1/2} z^{-1/4} e^{-(2/3) z^{3/2}}
/// with principal branches throughout.
pub fn ai_tilde(z: Complex64) -> Result<Complex64, AiryError> {
    if z == Complex64::new(0.0, 0.0) {
        return Err(AiryError::ZeroArgument);
    }
    let zeta = (2.0 / 3.0) * z.powf(1.5);
    if zeta.re < -EXP_LIMIT {
        return Err(AiryError::Overflow {
            z,
            exponent: zeta.re.abs(),
        });
    }
    Ok(0.5 / PI.sqrt() * z.powf(-0.25) * (-zeta).exp())
}

/// Maclaurin evaluation: Ai = Ai(0) f + Ai'(0) g where
/// f = Σ c_k z^{3k}, g = Σ d_k z^{3k+1} with
/// c_{k+1} = c_k / ((3k+2)(3k+3)), d_{k+1} = d_k / ((3k+3)(3k+4)).
///
/// Both series are summed in double-double arithmetic: near |z| = 7 the
/// individual terms reach ~1e4 while the result can be ~1e-7 (the
/// recessive solution on the positive axis), so a plain f64 sum loses
/// six digits to cancellation and, worse, turns finite-difference tests
/// of the result into noise.
fn maclaurin(z: Complex64) -> (Complex64, Complex64) {
    let ai0 = DD::with_lo(0.3550280538878172, 2.05233632436212e-17);
    let aip0 = DD::with_lo(-0.2588194037928068, 2.522243111610832e-17);
    let zc = CDD::from_c64(z);
    let z3 = zc.mul(&zc).mul(&zc);
    let mut c = DD::from(1.0); // coefficient of z^{3k} in f
    let mut d = DD::from(1.0); // coefficient of z^{3k+1} in g
    let mut pow3k = CDD::one(); // z^{3k}
    let mut pow3km1 = CDD::zero(); // z^{3k-1}, zero placeholder at k = 0
    let mut f = CDD::zero();
    let mut fp = CDD::zero();
    let mut g = CDD::zero();
    let mut gp = CDD::zero();
    for k in 0..MACLAURIN_TERMS {
        let kf = k as f64;
        f = f.add(&pow3k.scale(&c));
        g = g.add(&pow3k.mul(&zc).scale(&d));
        // f' term: 3k c_k z^{3k-1}; absent for k = 0
        fp = fp.add(&pow3km1.scale(&c.scale_f64(3.0 * kf)));
        gp = gp.add(&pow3k.scale(&d.scale_f64(3.0 * kf + 1.0)));
        c = c.div_f64((3.0 * kf + 2.0) * (3.0 * kf + 3.0));
        d = d.div_f64((3.0 * kf + 3.0) * (3.0 * kf + 4.0));
        pow3km1 = if k == 0 { zc.mul(&zc) } else { pow3km1.mul(&z3) };
        pow3k = pow3k.mul(&z3);
    }
    let ai = f.scale(&ai0).add(&g.scale(&aip0));
    let aip = fp.scale(&ai0).add(&gp.scale(&aip0));
    (ai.to_c64(), aip.to_c64())
}

/// Minimal double-double arithmetic (Dekker/Knuth error-free transforms,
/// products through `mul_add`), just enough for the Maclaurin sum.
#[derive(Debug, Clone, Copy)]
struct DD {
    hi: f64,
    lo: f64,
}

impl From<f64> for DD {
    fn from(x: f64) -> Self {
        DD { hi: x, lo: 0.0 }
    }
}

impl DD {
    fn with_lo(hi: f64, lo: f64) -> Self {
        DD { hi, lo }
    }

    fn two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        let bb = s - a;
        let err = (a - (s - bb)) + (b - bb);
        DD { hi: s, lo: err }
    }

    fn two_prod(a: f64, b: f64) -> Self {
        let p = a * b;
        let err = a.mul_add(b, -p);
        DD { hi: p, lo: err }
    }

    fn add(self, o: DD) -> Self {
        let s = Self::two_sum(self.hi, o.hi);
        let lo = s.lo + self.lo + o.lo;
        let r = Self::two_sum(s.hi, lo);
        DD { hi: r.hi, lo: r.lo }
    }

    fn mul(self, o: DD) -> Self {
        let p = Self::two_prod(self.hi, o.hi);
        let lo = p.lo + self.hi * o.lo + self.lo * o.hi;
        let r = Self::two_sum(p.hi, lo);
        DD { hi: r.hi, lo: r.lo }
    }

    fn scale_f64(self, s: f64) -> Self {
        self.mul(DD::from(s))
    }

    fn div_f64(self, d: f64) -> Self {
        let q1 = self.hi / d;
        let prod = Self::two_prod(q1, d);
        let r = (self.hi - prod.hi) - prod.lo + self.lo;
        let q2 = r / d;
        let s = Self::two_sum(q1, q2);
        DD { hi: s.hi, lo: s.lo }
    }

    fn neg(self) -> Self {
        DD {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// Complex number with double-double components.
#[derive(Debug, Clone, Copy)]
struct CDD {
    re: DD,
    im: DD,
}

impl CDD {
    fn zero() -> Self {
        CDD {
            re: DD::from(0.0),
            im: DD::from(0.0),
        }
    }

    fn one() -> Self {
        CDD {
            re: DD::from(1.0),
            im: DD::from(0.0),
        }
    }

    fn from_c64(z: Complex64) -> Self {
        CDD {
            re: DD::from(z.re),
            im: DD::from(z.im),
        }
    }

    fn to_c64(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    fn add(&self, o: &CDD) -> Self {
        CDD {
            re: self.re.add(o.re),
            im: self.im.add(o.im),
        }
    }

    fn mul(&self, o: &CDD) -> Self {
        CDD {
            re: self.re.mul(o.re).add(self.im.mul(o.im).neg()),
            im: self.re.mul(o.im).add(self.im.mul(o.re)),
        }
    }

    fn scale(&self, s: &DD) -> Self {
        CDD {
            re: self.re.mul(*s),
            im: self.im.mul(*s),
        }
    }
}

/// Poincaré expansion for |arg z| <= 2π/3, |z| > crossover.
fn asymptotic(z: Complex64) -> Result<(Complex64, Complex64), AiryError> {
    let zeta = (2.0 / 3.0) * z.powf(1.5);
    if zeta.re < -EXP_LIMIT {
        return Err(AiryError::Overflow {
            z,
            exponent: zeta.re.abs(),
        });
    }
    let inv_zeta = 1.0 / zeta;
    let mut u = 1.0; // u_n
    let mut sum_ai = Complex64::new(0.0, 0.0);
    let mut sum_aip = Complex64::new(0.0, 0.0);
    let mut pow = Complex64::new(1.0, 0.0); // (-1)^n ζ^{-n}, sign folded in
    for n in 0..ASYMPTOTIC_TERMS {
        let nf = n as f64;
        let v = u * (6.0 * nf + 1.0) / (1.0 - 6.0 * nf); // v_n for Ai'
        sum_ai += u * pow;
        sum_aip += v * pow;
        u *= (3.0 * nf + 0.5) * (3.0 * nf + 1.5) * (3.0 * nf + 2.5)
            / (54.0 * (nf + 1.0) * (nf + 0.5));
        pow *= -inv_zeta;
    }
    let pref = (-zeta).exp() / (2.0 * PI.sqrt());
    let q4 = z.powf(0.25);
    Ok((pref / q4 * sum_ai, -pref * q4 * sum_aip))
}

/// Coefficients of the polynomials p_m, q_m in the closed form
/// Ai^{(m)}(x) = p_m(x) Ai(x) + q_m(x) Ai'(x), generated by
/// p_{m+1} = p_m' + x q_m, q_{m+1} = p_m + q_m', p_0 = 1, q_0 = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct AiryDerivativePolys {
    pub order: usize,
    /// ascending coefficients of p_m
    pub p_coeffs: Vec<f64>,
    /// ascending coefficients of q_m
    pub q_coeffs: Vec<f64>,
}

impl AiryDerivativePolys {
    pub fn eval(&self, z: Complex64) -> (Complex64, Complex64) {
        (poly_eval(&self.p_coeffs, z), poly_eval(&self.q_coeffs, z))
    }
}

fn poly_eval(coeffs: &[f64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

fn poly_derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| i as f64 * c)
        .collect()
}

/// x * p(x) as a coefficient shift.
fn poly_shift(coeffs: &[f64]) -> Vec<f64> {
    if coeffs.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0];
    out.extend_from_slice(coeffs);
    out
}

fn poly_add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| a.get(i).copied().unwrap_or(0.0) + b.get(i).copied().unwrap_or(0.0))
        .collect()
}

/// Build p_m, q_m by running the recursion from (p_0, q_0) = (1, 0).
pub fn airy_derivative_polys(m: usize) -> AiryDerivativePolys {
    let mut p = vec![1.0];
    let mut q: Vec<f64> = Vec::new();
    for _ in 0..m {
        let p_next = poly_add(&poly_derivative(&p), &poly_shift(&q));
        let q_next = poly_add(&p, &poly_derivative(&q));
        p = p_next;
        q = q_next;
    }
    AiryDerivativePolys {
        order: m,
        p_coeffs: p,
        q_coeffs: q,
    }
}

/// Ai^{(m)}(z) through the polynomial closed form.
pub fn ai_nth_derivative(z: Complex64, m: usize) -> Result<Complex64, AiryError> {
    let v = eval(z)?;
    let polys = airy_derivative_polys(m);
    let (p, q) = polys.eval(z);
    Ok(p * v.ai + q * v.ai_prime)
}
