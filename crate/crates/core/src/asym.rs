//! Large-L expansions of the six-term coefficients in the scaling regime
//! `y_j - x_i = L + c_ij sqrt(L)`, `t = L`.
//!
//! The Gaussian double integral
//!
//! ```text
//! I(s1, s2) = 1/(4 pi^2) int int K(u1, u2) F1(u1) F2(u2) du1 du2,   K = (u1 - u2)/(u1 - q u2)
//! ```
//!
//! is evaluated with the `sigma` integrations done in closed form, so each
//! `Fj` is `int_{-inf}^{sj} exp(-u^2/2 - i s u) ds = i exp(-u^2/2 - i sj u)/u`
//! (plus its `L^{-1/2}` correction). Both `u` lines sit in the upper half
//! plane, `Im u2 = 2` and `Im u1 = 2 q (1 + deform)`.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conventions::{Conventions, ExponentConvention, IndicatorConvention};
use crate::error::{check_q, Error, Result};
use crate::specfun::{cn_eval, erfc, normal_cdf, normal_pdf};

/// Highest supported number of `C_n` correction terms.
pub const MAX_ORDER: u32 = 8;
/// Relative offset of the `u1` line from the pole line `Im u1 = q Im u2`.
pub const DEFAULT_DEFORM: f64 = -0.5;

const LINE_HEIGHT: f64 = 2.0;
const HALF_WIDTH: f64 = 12.0;
const STEP: f64 = 0.05;
const REFINE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub q: f64,
    pub n1: u32,
    pub n2: u32,
    /// The scale `L` (also the time).
    pub l: f64,
    pub c11: f64,
    pub c12: f64,
    pub c21: f64,
    /// Number of correction terms.
    pub order: u32,
    /// Lattice reading the expansions are matched to.
    pub conventions: Conventions,
}

impl ScalingParams {
    /// One particle per species, printed conventions.
    pub fn new(q: f64, l: f64, c11: f64, c12: f64, c21: f64, order: u32) -> Self {
        Self { q, n1: 1, n2: 1, l, c11, c12, c21, order, conventions: Conventions::as_printed() }
    }

    pub fn c22(&self) -> f64 {
        self.c12 - (self.c11 - self.c21)
    }

    pub fn validate(&self) -> Result<()> {
        check_q(self.q)?;
        if !(self.l > 0.0) || !self.l.is_finite() {
            return Err(Error::Domain(format!("L must be positive and finite, got {}", self.l)));
        }
        if !(self.c11 > self.c21) {
            return Err(Error::Precondition(format!(
                "c11 > c21 required, got c11 = {}, c21 = {}",
                self.c11, self.c21
            )));
        }
        if self.order > MAX_ORDER {
            return Err(Error::Precondition(format!("order must be <= {MAX_ORDER}")));
        }
        if self.n1 == 0 || self.n2 == 0 {
            return Err(Error::Precondition("n1 and n2 must be positive".into()));
        }
        Ok(())
    }

    fn gaussian_order(&self) -> u32 {
        self.order.min(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymResult {
    pub value: f64,
    pub order_used: u32,
    pub pieces: Vec<(&'static str, f64)>,
}

/// `a = L + c^2/2 + c sqrt(L + c^2/4)`, the inverse of `a - c sqrt(a) = L`.
pub fn a_shift(c: f64, l: f64) -> Result<f64> {
    let arg = l + 0.25 * c * c;
    if !(arg >= 0.0) || !(l > 0.0) {
        return Err(Error::Domain(format!("a_shift needs L > 0 and L + c^2/4 >= 0, got L = {l}, c = {c}")));
    }
    Ok(l + 0.5 * c * c + c * arg.sqrt())
}

/// `1/2 erfc(-c/sqrt 2)` plus the series `exp(-c^2/2)/sqrt(2 pi a) sum_{n<order} C_n(-c) a^{-n/2}`.
fn erfc_expansion(c: f64, l: f64, order: u32) -> Result<(f64, f64)> {
    if order > MAX_ORDER {
        return Err(Error::Precondition(format!("order must be <= {MAX_ORDER}")));
    }
    let a = a_shift(c, l)?;
    let lead = 0.5 * erfc(-c / std::f64::consts::SQRT_2);
    let pre = (-0.5 * c * c).exp() / (2.0 * std::f64::consts::PI * a).sqrt();
    let series: f64 = (0..order as usize).map(|n| cn_eval(n, -c) / a.powf(0.5 * n as f64)).sum();
    Ok((lead, pre * series))
}

/// Expansion of `Q(y1 - x1, L)`.
pub fn q1_asym(c11: f64, l: f64, order: u32) -> Result<AsymResult> {
    let (lead, series) = erfc_expansion(c11, l, order)?;
    Ok(AsymResult {
        value: lead + series,
        order_used: order,
        pieces: vec![("erfc", lead), ("series", series)],
    })
}

/// Expansion of `1 - Q(y1 - x2, L)`.
pub fn q3_asym(c21: f64, l: f64, order: u32) -> Result<AsymResult> {
    let (lead, series) = erfc_expansion(c21, l, order)?;
    Ok(AsymResult {
        value: 1.0 - (lead + series),
        order_used: order,
        pieces: vec![("erfc", lead), ("series", series)],
    })
}

/// Linear coefficient of the `L^{-1/2}` correction polynomial.
fn linear_coeff(exponent: ExponentConvention) -> f64 {
    match exponent {
        ExponentConvention::Printed => 1.5,
        ExponentConvention::Shifted => 0.5,
    }
}

fn correction(u: C64, s: f64, exponent: ExponentConvention) -> C64 {
    let i = C64::i();
    i * linear_coeff(exponent) * u + 0.5 * s * u * u - i * u * u * u / 3.0
}

/// Integrand of the double Gaussian integral before the `sigma` integrations.
pub fn gaussian_kernel(
    u1: C64,
    u2: C64,
    s1: f64,
    s2: f64,
    q: f64,
    l: f64,
    order: u32,
    exponent: ExponentConvention,
) -> Result<C64> {
    if order > 1 {
        return Err(Error::Precondition("Gaussian kernel supports order 0 or 1".into()));
    }
    let den = u1 - q * u2;
    if den.norm() < 1e-8 {
        return Err(Error::PoleProximity(format!("|u1 - q u2| = {:e}", den.norm())));
    }
    let i = C64::i();
    let base = (u1 - u2) / den * (-0.5 * u1 * u1 - i * s1 * u1 - 0.5 * u2 * u2 - i * s2 * u2).exp();
    if order == 0 {
        return Ok(base);
    }
    let corr = (correction(u1, s1, exponent) + correction(u2, s2, exponent)) / l.sqrt();
    Ok(base * (1.0 - corr))
}

/// `sigma`-antiderivatives at `u` (with `Im u > 0`): the leading term and the
/// coefficient of `-L^{-1/2}`.
fn antiderivatives(u: C64, s: f64, exponent: ExponentConvention) -> (C64, C64) {
    let i = C64::i();
    let e = (-0.5 * u * u - i * s * u).exp();
    let a = i * e / u;
    let b = e * (i * s / u + 1.0 / (u * u));
    let lin = i * linear_coeff(exponent) * u - i * u * u * u / 3.0;
    (a, lin * a + 0.5 * u * u * b)
}

struct Line {
    u: Vec<C64>,
    f: Vec<C64>,
    g: Vec<C64>,
}

fn line(im: f64, s: f64, exponent: ExponentConvention) -> Line {
    let h = 0.5 * STEP;
    let n = (2.0 * HALF_WIDTH / h).round() as usize + 1;
    let mut out = Line { u: Vec::with_capacity(n), f: Vec::with_capacity(n), g: Vec::with_capacity(n) };
    for k in 0..n {
        let u = C64::new(-HALF_WIDTH + k as f64 * h, im);
        let (f, g) = antiderivatives(u, s, exponent);
        out.u.push(u);
        out.f.push(f);
        out.g.push(g);
    }
    out
}

fn double_line_integral<K>(
    s1: f64,
    s2: f64,
    l: f64,
    order: u32,
    deform: f64,
    q: f64,
    exponent: ExponentConvention,
    kernel: K,
) -> Result<f64>
where
    K: Fn(C64, C64) -> C64 + Sync,
{
    if order > 1 {
        return Err(Error::Precondition("Gaussian integrals support order 0 or 1".into()));
    }
    if deform == 0.0 || deform <= -1.0 || !deform.is_finite() {
        return Err(Error::Precondition(format!("deform must be finite, nonzero and > -1, got {deform}")));
    }
    let im1 = q * LINE_HEIGHT * (1.0 + deform);
    if (im1 - q * LINE_HEIGHT).abs() < 1e-8 {
        return Err(Error::PoleProximity("u1 line lies on the pole line".into()));
    }
    let l1 = line(im1, s1, exponent);
    let l2 = line(LINE_HEIGHT, s2, exponent);
    let corr = if order == 1 { 1.0 / l.sqrt() } else { 0.0 };
    let rows: Vec<(C64, C64)> = (0..l1.u.len())
        .into_par_iter()
        .map(|i| {
            let (mut all, mut even) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
            for j in 0..l2.u.len() {
                let k = kernel(l1.u[i], l2.u[j]);
                let v = k * (l1.f[i] * l2.f[j] - corr * (l1.g[i] * l2.f[j] + l1.f[i] * l2.g[j]));
                all += v;
                if j % 2 == 0 {
                    even += v;
                }
            }
            (all, if i % 2 == 0 { even } else { C64::new(0.0, 0.0) })
        })
        .collect();
    let (all, even) = rows.iter().fold((C64::new(0.0, 0.0), C64::new(0.0, 0.0)), |acc, r| (acc.0 + r.0, acc.1 + r.1));
    let norm = 1.0 / (4.0 * std::f64::consts::PI * std::f64::consts::PI);
    let fine = all.re * (0.5 * STEP).powi(2) * norm;
    let coarse = even.re * STEP * STEP * norm;
    if !fine.is_finite() || (fine - coarse).abs() > REFINE_TOL {
        return Err(Error::NonConvergence(format!(
            "Gaussian integral step halving changed the value by {:e}",
            (fine - coarse).abs()
        )));
    }
    Ok(fine)
}

/// The Gaussian double integral `I(s1, s2)` with printed exponents.
pub fn i_asym(s1: f64, s2: f64, q: f64, l: f64, order: u32, deform: f64) -> Result<f64> {
    i_asym_with(s1, s2, q, l, order, deform, ExponentConvention::Printed)
}

pub fn i_asym_with(
    s1: f64,
    s2: f64,
    q: f64,
    l: f64,
    order: u32,
    deform: f64,
    exponent: ExponentConvention,
) -> Result<f64> {
    check_q(q)?;
    double_line_integral(s1, s2, l, order, deform, q, exponent, |u1, u2| (u1 - u2) / (u1 - q * u2))
}

/// `q1` in the reading selected by the conventions.
fn q1_lattice(s: &ScalingParams) -> Result<f64> {
    let v = q1_asym(s.c11, s.l, s.order)?.value;
    Ok(match s.conventions.indicator {
        IndicatorConvention::Printed => v,
        IndicatorConvention::Complement => 1.0 - v,
    })
}

/// `q1` in the reading selected by `s.conventions`.
pub fn q1_asym_for(s: &ScalingParams) -> Result<AsymResult> {
    s.validate()?;
    let r = q1_asym(s.c11, s.l, s.order)?;
    Ok(AsymResult { value: q1_lattice(s)?, ..r })
}

/// `q3` in the reading selected by `s.conventions`.
pub fn q3_asym_for(s: &ScalingParams) -> Result<AsymResult> {
    s.validate()?;
    let r = q3_asym(s.c21, s.l, s.order)?;
    let value = match s.conventions.indicator {
        IndicatorConvention::Printed => r.value,
        IndicatorConvention::Complement => 1.0 - r.value,
    };
    Ok(AsymResult { value, ..r })
}

fn gaussian(s: &ScalingParams, a: f64, b: f64) -> Result<f64> {
    let (s1, s2) = s.conventions.order_pair(a, b);
    i_asym_with(s1, s2, s.q, s.l, s.gaussian_order(), DEFAULT_DEFORM, s.conventions.exponent)
}

/// `q5 ~ q I(c21, c12)`.
pub fn q5_asym(s: &ScalingParams) -> Result<AsymResult> {
    s.validate()?;
    let i = gaussian(s, s.c21, s.c12)?;
    Ok(AsymResult { value: s.q * i, order_used: s.gaussian_order(), pieces: vec![("gaussian", i)] })
}

/// `q6 ~ 1 - q1 - q I(c11, c12)`.
pub fn q6_asym(s: &ScalingParams) -> Result<AsymResult> {
    s.validate()?;
    let q1 = q1_lattice(s)?;
    let i = gaussian(s, s.c11, s.c12)?;
    Ok(AsymResult {
        value: 1.0 - q1 - s.q * i,
        order_used: s.gaussian_order(),
        pieces: vec![("q1", q1), ("gaussian", i)],
    })
}

/// Limit of the single small-contour integral, up to sign: `Phi(c)` at
/// order 0, plus the `L^{-1/2}` correction at order 1.
pub fn q4_single_asym(c: f64, l: f64, order: u32) -> Result<f64> {
    q4_single_asym_with(c, l, order, ExponentConvention::Printed)
}

pub fn q4_single_asym_with(c: f64, l: f64, order: u32, exponent: ExponentConvention) -> Result<f64> {
    if order > 1 {
        return Err(Error::Precondition("single Gaussian integral supports order 0 or 1".into()));
    }
    if !(l > 0.0) {
        return Err(Error::Domain(format!("L must be positive, got {l}")));
    }
    let lead = normal_cdf(c);
    if order == 0 {
        return Ok(lead);
    }
    let k = linear_coeff(exponent);
    Ok(lead + normal_pdf(c) * ((k - 0.5) - (c * c + 2.0) / 6.0) / l.sqrt())
}

/// `q4 ~ I(c11, c12) + 1 - S(c11) - S(c12)/q`, `S` the single-integral limit.
pub fn q4_asym(s: &ScalingParams) -> Result<AsymResult> {
    s.validate()?;
    let (s1, s2) = s.conventions.order_pair(s.c11, s.c12);
    let o = s.gaussian_order();
    let i = gaussian(s, s.c11, s.c12)?;
    let a = q4_single_asym_with(s1, s.l, o, s.conventions.exponent)?;
    let b = q4_single_asym_with(s2, s.l, o, s.conventions.exponent)?;
    Ok(AsymResult {
        value: i + 1.0 - a - b / s.q,
        order_used: o,
        pieces: vec![("gaussian", i), ("single_1", a), ("single_2", b)],
    })
}

/// Least-squares slope of `ln |err|` against `ln L`.
pub fn fit_slope(ls: &[f64], errors: &[f64]) -> Result<f64> {
    if ls.len() < 3 || ls.len() != errors.len() {
        return Err(Error::Precondition("need at least three (L, error) pairs".into()));
    }
    if errors.iter().any(|e| !(e.abs() > 1e-300) || !e.is_finite()) {
        return Err(Error::DegenerateFit("an error value is zero or not finite".into()));
    }
    let xs: Vec<f64> = ls.iter().map(|l| l.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.abs().ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all L values are equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// Fitted exponent of `|exact(L) - asym(L)|` over `ls`.
pub fn convergence_rate<E, A>(exact: E, asym: A, ls: &[f64]) -> Result<f64>
where
    E: Fn(f64) -> Result<f64>,
    A: Fn(f64) -> Result<f64>,
{
    let errors = ls.iter().map(|&l| Ok((exact(l)? - asym(l)?).abs())).collect::<Result<Vec<f64>>>()?;
    fit_slope(ls, &errors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::regularized_gamma_q;

    #[test]
    fn a_shift_examples() {
        assert_eq!(a_shift(0.0, 100.0).unwrap(), 100.0);
        assert!((a_shift(1.0, 100.0).unwrap() - (100.5 + 100.25f64.sqrt())).abs() < 1e-12);
        for c in [-2.0, -0.5, 0.7, 3.0] {
            let a = a_shift(c, 400.0).unwrap();
            assert!((a - c * a.sqrt() - 400.0).abs() < 1e-9);
        }
        assert!(a_shift(1.0, -5.0).is_err());
    }

    #[test]
    fn q1_q3_structure() {
        assert_eq!(q1_asym(0.0, 400.0, 0).unwrap().value, 0.5);
        assert_eq!(q3_asym(0.0, 400.0, 0).unwrap().value, 0.5);
        for c in [-1.3, 0.0, 0.5, 2.2] {
            for k in 0..=MAX_ORDER {
                let s = q1_asym(c, 250.0, k).unwrap().value + q3_asym(c, 250.0, k).unwrap().value;
                assert!((s - 1.0).abs() <= f64::EPSILON);
            }
        }
        assert!(q1_asym(0.5, 400.0, MAX_ORDER + 1).is_err());
    }

    #[test]
    fn q1_tracks_incomplete_gamma() {
        // At c = 0 the lattice exponent is exactly L. C_1(0) = 0, so orders 1
        // and 2 coincide there.
        for l in [100.0, 400.0, 1600.0] {
            let exact = regularized_gamma_q(l, l).unwrap();
            let errs: Vec<f64> = (0..4).map(|k| (q1_asym(0.0, l, k).unwrap().value - exact).abs()).collect();
            assert!(errs[1] < errs[0] && errs[2] <= errs[1] && errs[3] < errs[2], "{errs:?}");
        }
    }

    #[test]
    fn antiderivatives_match_quadrature() {
        let u = C64::new(0.7, 2.0);
        let s = 0.4;
        for exponent in [ExponentConvention::Printed, ExponentConvention::Shifted] {
            let (a, g) = antiderivatives(u, s, exponent);
            // Composite Simpson on [-40, s].
            let (lo, n) = (-40.0, 20_000);
            let h = (s - lo) / n as f64;
            let (mut fa, mut fg) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
            for k in 0..=n {
                let x = lo + k as f64 * h;
                let w = h / 3.0 * if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
                let e = (-0.5 * u * u - C64::i() * x * u).exp();
                fa += w * e;
                fg += w * e * correction(u, x, exponent);
            }
            assert!((fa - a).norm() < 1e-8 * a.norm());
            assert!((fg - g).norm() < 1e-8 * g.norm());
        }
    }

    #[test]
    fn kernel_examples() {
        let p = ExponentConvention::Printed;
        let v = gaussian_kernel(C64::new(0.3, 1.0), C64::new(0.0, 0.0), 0.0, 0.0, 0.5, 100.0, 0, p).unwrap();
        let expect = (-0.5 * C64::new(0.3, 1.0).powi(2)).exp();
        assert!((v - expect).norm() < 1e-14);
        let u = C64::new(0.5, 0.5);
        assert!(matches!(gaussian_kernel(0.5 * u, u, 0.0, 0.0, 0.5, 100.0, 0, p), Err(Error::PoleProximity(_))));
        let (u1, u2) = (C64::new(0.4, 0.3), C64::new(-0.2, 1.0));
        let k0 = gaussian_kernel(u1, u2, 0.1, 0.2, 0.5, 1e6, 0, p).unwrap();
        let k1 = gaussian_kernel(u1, u2, 0.1, 0.2, 0.5, 1e6, 1, p).unwrap();
        let rel = ((k1 - k0) / k0).norm();
        assert!(rel > 1e-4 && rel < 1e-2, "{rel}");
    }

    #[test]
    fn separable_kernel_factorises() {
        for order in [0, 1] {
            let (s1, s2, l) = (0.4, -0.3, 400.0);
            let p = ExponentConvention::Printed;
            let v = double_line_integral(s1, s2, l, order, DEFAULT_DEFORM, 0.5, p, |_, _| C64::new(1.0, 0.0)).unwrap();
            let a = q4_single_asym(s1, l, order).unwrap();
            let b = q4_single_asym(s2, l, order).unwrap();
            let expect = if order == 0 { a * b } else {
                let (a0, b0) = (normal_cdf(s1), normal_cdf(s2));
                a * b0 + a0 * b - a0 * b0
            };
            assert!((v - expect).abs() < 1e-10, "order {order}: {v} vs {expect}");
        }
    }

    #[test]
    fn gaussian_integral_limits() {
        let v = i_asym(0.3, -8.0, 0.5, 400.0, 0, DEFAULT_DEFORM).unwrap();
        assert!(v.abs() < 1e-6, "{v}");
        // In s1 the decay is slower: moving the u1 line up crosses the pole
        // u1 = q u2, whose residue falls off like exp(-s1^2 q^2 / (2 (1 + q^2))).
        let v8 = i_asym(-8.0, 0.3, 0.5, 400.0, 0, DEFAULT_DEFORM).unwrap();
        let v12 = i_asym(-12.0, 0.3, 0.5, 400.0, 0, DEFAULT_DEFORM).unwrap();
        assert!(v8.abs() < 1e-3 && v12.abs() < 1e-5 && v12.abs() < v8.abs(), "{v8} {v12}");
        assert!(i_asym(-8.0, 0.3, 0.9, 400.0, 0, DEFAULT_DEFORM).unwrap().abs() < 1e-5);
        // With no pole between the lines the kernel is O(1); deep positive
        // arguments approach the full-mass value.
        let full = i_asym(8.0, 8.0, 0.5, 400.0, 0, DEFAULT_DEFORM).unwrap();
        assert!(full.is_finite());
        assert!(i_asym(0.0, 0.0, 0.5, 400.0, 0, 0.0).is_err());
        assert!(i_asym(0.0, 0.0, 0.5, 400.0, 2, DEFAULT_DEFORM).is_err());
    }

    #[test]
    fn single_asym_examples() {
        assert_eq!(q4_single_asym(0.0, 100.0, 0).unwrap(), 0.5);
        assert!(q4_single_asym(-8.0, 100.0, 0).unwrap() < 1e-6);
    }

    #[test]
    fn q5_q6_vanish_in_tail() {
        let s = ScalingParams::new(0.5, 400.0, -7.0, -8.0, -8.5, 0);
        assert!(q5_asym(&s).unwrap().value.abs() < 1e-6);
        let q6 = q6_asym(&s).unwrap();
        assert!((q6.value - (1.0 - q6.pieces[0].1)).abs() < 1e-6);
    }

    #[test]
    fn continuity_on_grid() {
        let mut prev = None;
        for k in 0..8 {
            let c = -0.4 + 0.1 * k as f64;
            let v = q5_asym(&ScalingParams::new(0.5, 400.0, 0.5, c, 0.0, 1)).unwrap().value;
            if let Some(p) = prev {
                let jump: f64 = v - p;
                assert!(jump.abs() < 0.05);
            }
            prev = Some(v);
        }
    }

    #[test]
    fn slopes() {
        let ls = [100.0, 400.0, 1600.0, 6400.0];
        let e: Vec<f64> = ls.iter().map(|l: &f64| 3.0 * l.powf(-0.5)).collect();
        assert!((fit_slope(&ls, &e).unwrap() + 0.5).abs() < 1e-6);
        let ls: Vec<f64> = (0..9).map(|k| 100.0 * 10f64.powf(k as f64 / 4.0)).collect();
        let e: Vec<f64> = ls.iter().map(|l| 2.0 / l + 5.0 * l.powf(-1.5)).collect();
        let s = fit_slope(&ls, &e).unwrap();
        assert!(s > -1.2 && s < -0.9, "{s}");
        assert!(fit_slope(&ls, &vec![0.01; ls.len()]).unwrap().abs() < 1e-12);
        assert!(matches!(fit_slope(&[1.0, 2.0, 3.0], &[1.0, 0.0, 1.0]), Err(Error::DegenerateFit(_))));
        assert!(fit_slope(&[1.0, 2.0], &[1.0, 1.0]).is_err());
        let r = convergence_rate(|l| Ok(1.0 + 1.0 / l), |_| Ok(1.0), &[10.0, 100.0, 1000.0]).unwrap();
        assert!((r + 1.0).abs() < 1e-6);
    }

    #[test]
    fn scaling_validation() {
        assert!(ScalingParams::new(0.5, 100.0, 0.0, 0.3, 0.5, 0).validate().is_err());
        assert!(ScalingParams::new(0.5, -1.0, 0.5, 0.3, 0.0, 0).validate().is_err());
        let s = ScalingParams::new(0.5, 100.0, 0.5, 0.3, 0.0, 0);
        assert!((s.c22() + 0.2).abs() < 1e-15);
    }
}
