//! Scalar special functions.

use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{check_q, Error, Result};

/// The q-integer `[k]_q = 1 - q^k`.
pub fn q_integer(k: u32, q: f64) -> Result<f64> {
    check_q(q)?;
    Ok(1.0 - q.powi(k as i32))
}

/// The q-Pochhammer symbol `(a; q)_n = (1 - a)(1 - aq)...(1 - aq^{n-1})`.
pub fn q_pochhammer(a: f64, q: f64, n: u32) -> f64 {
    let mut prod = 1.0;
    let mut term = a;
    for _ in 0..n {
        prod *= 1.0 - term;
        term *= q;
    }
    prod
}

/// Terminating `1phi0(q^{-n}; q, z) = (z q^{-n}; q)_n`.
pub fn phi10(n: u32, q: f64, z: f64) -> f64 {
    q_pochhammer(z * q.powi(-(n as i32)), q, n)
}

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// `ln(1 + x) - x`, accurate for small `|x|`.
fn log1pmx(x: f64) -> f64 {
    if x.abs() > 0.1 {
        return x.ln_1p() - x;
    }
    let mut sum = 0.0;
    let mut pow = x * x;
    let mut k = 2.0;
    loop {
        let term = pow / k;
        if k as i32 % 2 == 0 {
            sum -= term;
        } else {
            sum += term;
        }
        if term.abs() <= 1e-17 * sum.abs() {
            return sum;
        }
        pow *= x;
        k += 1.0;
    }
}

/// Remainder of Stirling's series for `ln Gamma(a)`, valid for `a > 20`.
fn stirling_tail(a: f64) -> f64 {
    let a2 = a * a;
    (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - (1.0 / 1680.0 - 1.0 / (1188.0 * a2)) / a2) / a2) / a2)
        / a
}

/// `z^a e^{-z} / Gamma(a)`, computed without cancellation for large `a`.
fn gamma_prefix(a: f64, z: f64) -> f64 {
    if a <= 20.0 {
        (a * z.ln() - z - libm::lgamma(a)).exp()
    } else {
        let d = (z - a) / a;
        (a / (2.0 * std::f64::consts::PI)).sqrt() * (a * log1pmx(d) - stirling_tail(a)).exp()
    }
}

/// Regularized upper incomplete gamma function `Q(a, z) = Gamma(a, z) / Gamma(a)`.
///
/// `Q(0, z)` is 0 for `z > 0` and `Q(a, 0)` is 1 (including `a = 0`).
pub fn regularized_gamma_q(a: f64, z: f64) -> Result<f64> {
    if !(a >= 0.0) || !(z >= 0.0) || !a.is_finite() {
        return Err(Error::Domain(format!(
            "Q(a, z) needs a >= 0 and z >= 0, got a = {a}, z = {z}"
        )));
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    if a == 0.0 {
        return Ok(0.0);
    }
    if z.is_infinite() {
        return Ok(0.0);
    }
    let cap = 500usize.max((60.0 * a.sqrt()) as usize);
    let prefix = gamma_prefix(a, z);
    if z < a + 1.0 {
        let mut ap = a;
        let mut term = 1.0 / a;
        let mut sum = term;
        for _ in 0..cap {
            ap += 1.0;
            term *= z / ap;
            sum += term;
            if term.abs() < sum.abs() * 1e-16 {
                break;
            }
        }
        Ok((1.0 - sum * prefix).clamp(0.0, 1.0))
    } else {
        let tiny = 1e-300;
        let mut b = z + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..=cap {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        Ok((prefix * h).clamp(0.0, 1.0))
    }
}

/// `e^{-m} m^k / k!`, using the Stirling form for large `k`.
fn poisson_term(k: u64, m: f64) -> f64 {
    let kf = k as f64;
    if k <= 20 {
        return (kf * m.ln() - m - libm::lgamma(kf + 1.0)).exp();
    }
    (kf * log1pmx((m - kf) / kf) - stirling_tail(kf)).exp() / (2.0 * std::f64::consts::PI * kf).sqrt()
}

/// Poisson distribution function `sum_{k<=n} e^{-m} m^k / k!` by direct summation
/// outward from the largest term.
pub fn poisson_cdf(n: u64, m: f64) -> f64 {
    if m == 0.0 {
        return 1.0;
    }
    let anchor = n.min(m.floor() as u64);
    let top = poisson_term(anchor, m);
    let mut sum = top;
    let mut term = top;
    for k in (1..=anchor).rev() {
        term *= k as f64 / m;
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    term = top;
    for k in anchor + 1..=n {
        term *= m / k as f64;
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    sum.min(1.0)
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Natural log of the gamma function.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x - LN_SQRT_2PI).exp()
}

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Polynomial in one variable with exact rational coefficients.
///
/// `coeffs[k]` is the coefficient of `eta^k`. The zero polynomial has no
/// coefficients; otherwise the last coefficient is nonzero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalPolynomial {
    coeffs: Vec<BigRational>,
}

impl RationalPolynomial {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_ints(pairs: &[(i64, i64)]) -> Self {
        Self::new(
            pairs
                .iter()
                .map(|&(n, d)| BigRational::new(BigInt::from(n), BigInt::from(d)))
                .collect(),
        )
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    fn coeff(&self, k: usize) -> BigRational {
        self.coeffs.get(k).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * BigRational::from_integer(BigInt::from(k)))
                .collect(),
        )
    }

    /// Multiplies by `eta^k`.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![BigRational::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Self::new(coeffs)
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) - other.coeff(k)).collect())
    }

    pub fn eval_exact(&self, eta: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * eta + c)
    }

    pub fn to_f64_coeffs(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::NAN))
            .collect()
    }

    pub fn eval(&self, eta: f64) -> f64 {
        horner(&self.to_f64_coeffs(), eta)
    }
}

impl fmt::Display for RationalPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(", "))
    }
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `C_0(eta) = (eta^2 - 1) / 3`.
fn c0() -> RationalPolynomial {
    RationalPolynomial::from_ints(&[(-1, 3), (0, 1), (1, 3)])
}

/// Right-hand side `eta (eta^2 - 2) P - (2 eta^2 - 1) P' + eta P''`.
fn recurrence_rhs(prev: &RationalPolynomial) -> RationalPolynomial {
    let d1 = prev.derivative();
    let d2 = d1.derivative();
    let a = prev.shift(3).sub(&prev.shift(1).scale(&rat(2)));
    let b = d1.shift(2).scale(&rat(2)).sub(&d1);
    a.sub(&b).add(&d2.shift(1))
}

/// Left-hand operator `P + eta P' - P''`.
fn recurrence_lhs(p: &RationalPolynomial) -> RationalPolynomial {
    let d1 = p.derivative();
    p.add(&d1.shift(1)).sub(&d1.derivative())
}

fn solve_step(prev: &RationalPolynomial) -> RationalPolynomial {
    let rhs = recurrence_rhs(prev);
    let Some(deg) = rhs.degree() else {
        return RationalPolynomial::zero();
    };
    let mut c = vec![BigRational::zero(); deg + 3];
    for k in (0..=deg).rev() {
        let kk = k as i64;
        let upper = &c[k + 2] * rat((kk + 2) * (kk + 1));
        c[k] = (rhs.coeff(k) + upper) / rat(kk + 1);
    }
    RationalPolynomial::new(c)
}

/// The polynomial `C_n(eta)` of degree `3n + 2`.
pub fn cn_polynomial(n: usize) -> RationalPolynomial {
    let mut p = c0();
    for _ in 0..n {
        p = solve_step(&p);
    }
    p
}

/// `LHS(C_n) - RHS(C_{n-1})` for `n >= 1`; the zero polynomial when the recurrence holds.
pub fn cn_residual(n: usize) -> RationalPolynomial {
    if n == 0 {
        return cn_polynomial(0).sub(&c0());
    }
    let prev = cn_polynomial(n - 1);
    recurrence_lhs(&cn_polynomial(n)).sub(&recurrence_rhs(&prev))
}

const CN_TABLE_LEN: usize = 12;

fn cn_table() -> &'static Vec<Vec<f64>> {
    static TABLE: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut out = Vec::with_capacity(CN_TABLE_LEN);
        let mut p = c0();
        for _ in 0..CN_TABLE_LEN {
            out.push(p.to_f64_coeffs());
            p = solve_step(&p);
        }
        out
    })
}

/// Floating-point evaluation of `C_n(eta)`.
pub fn cn_eval(n: usize, eta: f64) -> f64 {
    match cn_table().get(n) {
        Some(c) => horner(c, eta),
        None => cn_polynomial(n).eval(eta),
    }
}
