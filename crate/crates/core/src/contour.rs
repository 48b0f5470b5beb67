//! Trapezoidal quadrature on circles and the contour integrals of the formula.
//!
//! All closed-contour integrals carry the `1/(2 pi i)` normalisation. The
//! integrands share the factor `(1 - w)^{-e} e^{-wt} / w` for an effective
//! exponent `e` (see [`Conventions::exponents`]).

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::conventions::Conventions;
use crate::error::{check_q, Error, Result};
use crate::exact::LatticeParams;

type C64 = Complex64;

const TWO_PI_I: C64 = C64::new(0.0, 2.0 * PI);
/// Fewest trapezoidal nodes on a circle.
pub const MIN_NODES: usize = 16;

/// Sign relating a positively oriented small single integral to the Poisson
/// distribution function:
/// `(1/2 pi i) \oint (1-w)^{-(m+1)} e^{-wt} dw/w = SMALL_CONTOUR_SIGN * poisson_cdf(m, t)`.
pub const SMALL_CONTOUR_SIGN: f64 = -1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContourKind {
    Circle,
    VerticalSegment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Positive,
    Negative,
}

/// A circle or a vertical segment carrying a fixed number of quadrature nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contour {
    pub kind: ContourKind,
    pub center: C64,
    /// Radius of a circle or half-length of a segment.
    pub radius: f64,
    pub nodes: usize,
    pub orientation: Orientation,
}

impl Contour {
    pub fn circle(center: C64, radius: f64, nodes: usize) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidContour(format!("radius must be positive, got {radius}")));
        }
        if nodes < MIN_NODES {
            return Err(Error::InvalidContour(format!("circle needs at least {MIN_NODES} nodes, got {nodes}")));
        }
        Ok(Self {
            kind: ContourKind::Circle,
            center,
            radius,
            nodes,
            orientation: Orientation::Positive,
        })
    }

    /// Segment from `center - i h` to `center + i h`.
    pub fn vertical_segment(center: C64, half_length: f64, nodes: usize) -> Result<Self> {
        if !(half_length > 0.0) || nodes < 2 {
            return Err(Error::InvalidContour(
                "segment needs positive half-length and at least two nodes".into(),
            ));
        }
        Ok(Self {
            kind: ContourKind::VerticalSegment,
            center,
            radius: half_length,
            nodes,
            orientation: Orientation::Positive,
        })
    }

    pub fn with_nodes(mut self, nodes: usize) -> Self {
        self.nodes = nodes;
        self
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = radius;
        self
    }

    pub fn reversed(mut self) -> Self {
        self.orientation = match self.orientation {
            Orientation::Positive => Orientation::Negative,
            Orientation::Negative => Orientation::Positive,
        };
        self
    }

    fn sign(&self) -> f64 {
        match self.orientation {
            Orientation::Positive => 1.0,
            Orientation::Negative => -1.0,
        }
    }

    /// Nodes `w_k` and weights `dw_k` of the trapezoidal rule.
    pub fn points(&self) -> Vec<(C64, C64)> {
        let n = self.nodes;
        let s = self.sign();
        match self.kind {
            ContourKind::Circle => (0..n)
                .map(|k| {
                    let e = C64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64);
                    let w = self.center + self.radius * e;
                    let dw = C64::i() * self.radius * e * (2.0 * PI / n as f64) * s;
                    (w, dw)
                })
                .collect(),
            ContourKind::VerticalSegment => {
                let h = 2.0 * self.radius / (n - 1) as f64;
                (0..n)
                    .map(|k| {
                        let y = -self.radius + h * k as f64;
                        let end = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
                        (self.center + C64::new(0.0, y), C64::new(0.0, h * end * s))
                    })
                    .collect()
            }
        }
    }

    /// Distance from `z` to the contour.
    pub fn distance_to(&self, z: C64) -> f64 {
        match self.kind {
            ContourKind::Circle => ((z - self.center).norm() - self.radius).abs(),
            ContourKind::VerticalSegment => {
                let d = z - self.center;
                let y = d.im.clamp(-self.radius, self.radius);
                (d - C64::new(0.0, y)).norm()
            }
        }
    }

    /// Winding number around `z`, from quadrature of `1/(w - z)`.
    ///
    /// The node count grows with `radius / distance` so that points close to
    /// the contour are still resolved. Points on the contour give NaN.
    pub fn winding_number(&self, z: C64) -> f64 {
        let d = self.distance_to(z);
        if !(d > 1e-13 * self.radius.max(1.0)) {
            return f64::NAN;
        }
        let nodes = ((40.0 * self.radius / d).ceil() as usize).clamp(2048, 1 << 22);
        quad_closed(&self.with_nodes(nodes), |w| 1.0 / (w - z)).re
    }
}

/// `(1/2 pi i) \oint f(w) dw` by the trapezoidal rule.
pub fn quad_closed<F: Fn(C64) -> C64>(contour: &Contour, f: F) -> C64 {
    contour.points().into_iter().map(|(w, dw)| f(w) * dw).sum::<C64>() / TWO_PI_I
}

/// `(1/2 pi i)^2 \oint\oint k(w1, w2) dw1 dw2` by the tensor trapezoidal rule.
pub fn quad_double<F: Fn(C64, C64) -> C64>(c1: &Contour, c2: &Contour, k: F) -> C64 {
    let p1 = c1.points();
    let p2 = c2.points();
    let mut total = C64::new(0.0, 0.0);
    for &(w1, d1) in &p1 {
        let mut row = C64::new(0.0, 0.0);
        for &(w2, d2) in &p2 {
            row += k(w1, w2) * d2;
        }
        total += row * d1;
    }
    total / (TWO_PI_I * TWO_PI_I)
}

/// The three contours `C`, `C~1`, `C~2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourFamily {
    /// `C`: encloses 0 and 1.
    pub large: Contour,
    /// `C~1`: encloses `q C~2` and 1, not 0.
    pub small_outer: Contour,
    /// `C~2`: encloses 1, not 0.
    pub small_inner: Contour,
    pub q: f64,
}

fn winding_is(c: &Contour, z: C64, expected: f64, what: &str) -> Result<()> {
    let w = match c.kind {
        ContourKind::Circle => {
            let d = (z - c.center).norm();
            if (d - c.radius).abs() <= 1e-13 * c.radius.max(1.0) {
                f64::NAN
            } else if d < c.radius {
                c.sign()
            } else {
                0.0
            }
        }
        _ => c.winding_number(z),
    };
    if (w - expected).abs() > 1e-6 {
        return Err(Error::InvalidContour(format!(
            "{what}: winding number around {z} is {w:.6}, expected {expected}"
        )));
    }
    Ok(())
}

impl ContourFamily {
    /// Checks the nesting invariants by winding numbers at sampled points.
    pub fn validate(&self) -> Result<()> {
        check_q(self.q)?;
        for c in [&self.large, &self.small_outer, &self.small_inner] {
            if c.kind != ContourKind::Circle || c.orientation != Orientation::Positive {
                return Err(Error::InvalidContour("family contours must be positive circles".into()));
            }
        }
        let zero = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        winding_is(&self.large, zero, 1.0, "C around 0")?;
        winding_is(&self.large, one, 1.0, "C around 1")?;
        winding_is(&self.small_inner, one, 1.0, "C~2 around 1")?;
        winding_is(&self.small_inner, zero, 0.0, "C~2 around 0")?;
        winding_is(&self.small_outer, one, 1.0, "C~1 around 1")?;
        winding_is(&self.small_outer, zero, 0.0, "C~1 around 0")?;
        let gap = self.inner_gap();
        if !(gap > 0.0) {
            return Err(Error::InvalidContour(format!(
                "q C~2 is not strictly inside C~1 (gap {gap:.3e})"
            )));
        }
        for (w, _) in self.small_inner.with_nodes(64).points() {
            winding_is(&self.small_outer, self.q * w, 1.0, "C~1 around q C~2")?;
        }
        if self.large.center.norm() > 0.0 {
            let lr = self.large.radius;
            let pole_gap = lr - self.q * (self.large.center.norm() + lr) - self.large.center.norm();
            if !(pole_gap > 0.0) {
                return Err(Error::InvalidContour("q C meets C".into()));
            }
        }
        Ok(())
    }

    /// Minimum distance between `C~1` and the scaled circle `q C~2`.
    pub fn inner_gap(&self) -> f64 {
        let c = self.q * self.small_inner.center;
        let r = self.q * self.small_inner.radius;
        self.small_outer.radius - (c - self.small_outer.center).norm() - r
    }

    pub fn with_nodes(mut self, nodes: usize) -> Self {
        self.large.nodes = nodes;
        self.small_outer.nodes = nodes;
        self.small_inner.nodes = nodes;
        self
    }

    /// Circles placed for effective exponents `(e1, e2)` and time `t`.
    ///
    /// `C~2 = circle(1, r2)` with `r2` minimising the peak of
    /// `|(1-w)^{-e2} e^{-wt} / w|`, which sits on the real axis left of 1,
    /// capped at `1 - 0.03 / q`.
    /// `C~1` is centred near 1 with its left edge halfway between 0 and
    /// `q C~2`, and `C` has the radius minimising the peak integrand on it.
    pub fn adapted(q: f64, e1: i64, e2: i64, t: f64, nodes: usize) -> Result<Self> {
        check_q(q)?;
        // Keep C~1 and q C~2 resolvable at the default node cap: their gap
        // and the distance of C~1 from 0 are both about q (1 - r2) / 2.
        let r2 = small_radius(e2 as f64, t).min((1.0 - RESOLUTION / q).max(0.05));
        let r1 = small_radius(e1 as f64, t);
        let left_inner = q * (1.0 - r2);
        let left = (1.0 - r1).min(0.5 * left_inner);
        let gap = left_inner - left;
        let right = (2.0 - left).max(q * (1.0 + r2) + gap);
        let fam = Self {
            large: Contour::circle(C64::new(0.0, 0.0), large_radius(e1, e2, t), nodes)?,
            small_outer: Contour::circle(C64::new(0.5 * (left + right), 0.0), 0.5 * (right - left), nodes)?,
            small_inner: Contour::circle(C64::new(1.0, 0.0), r2, nodes)?,
            q,
        };
        fam.validate()?;
        Ok(fam)
    }
}

const RESOLUTION: f64 = 0.03;

/// Smallest radius in `[0.05, 0.95]` at which `-e ln r - t (1 - r) - ln(1 - r)`,
/// the peak log-magnitude on `circle(1, r)`, is within `ln 100` of its minimum.
/// Smaller circles keep `C~1` further from 0 and need fewer nodes.
fn small_radius(e: f64, t: f64) -> f64 {
    let f = |r: f64| -e * r.ln() - t * (1.0 - r) - (1.0 - r).ln();
    let deriv = |r: f64| -e / r + t + 1.0 / (1.0 - r);
    let (floor, ceil) = (0.05, 0.95);
    if deriv(floor) >= 0.0 {
        return floor;
    }
    let best = if deriv(ceil) <= 0.0 {
        ceil
    } else {
        let (mut lo, mut hi) = (floor, ceil);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if deriv(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let target = f(best) + 100f64.ln();
    if f(floor) <= target {
        return floor;
    }
    let (mut lo, mut hi) = (floor, best);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Radius in `[1.02, 6]` minimising the peak log-magnitude of the large-contour integrand.
fn large_radius(e1: i64, e2: i64, t: f64) -> f64 {
    let peak = |r: f64, e: f64| {
        (0..=64)
            .map(|k| {
                let w = C64::from_polar(r, PI * k as f64 / 64.0);
                -e * (C64::new(1.0, 0.0) - w).norm().ln() - t * w.re
            })
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let mut best = (f64::INFINITY, 1.5);
    for k in 0..=240 {
        let r = 1.02 * (6.0f64 / 1.02).powf(k as f64 / 240.0);
        let v = peak(r, e1 as f64) + peak(r, e2 as f64);
        if v < best.0 {
            best = (v, r);
        }
    }
    best.1
}

/// The fixed family `C = circle(0, 1.5)`, `C~2 = circle(1, 0.1)`,
/// `C~1 = circle((1+q)/2, (1-q)/2 + 0.1 q + 0.05)` with 256 nodes.
pub fn default_contours(q: f64) -> Result<ContourFamily> {
    check_q(q)?;
    let c1 = 0.5 * (1.0 + q);
    let r1 = 0.5 * (1.0 - q) + 0.1 * q + 0.05;
    if r1 >= c1 {
        return Err(Error::InvalidContour(format!("C~1 would enclose 0 for q = {q}")));
    }
    let fam = ContourFamily {
        large: Contour::circle(C64::new(0.0, 0.0), 1.5, 256)?,
        small_outer: Contour::circle(C64::new(c1, 0.0), r1, 256)?,
        small_inner: Contour::circle(C64::new(1.0, 0.0), 0.1, 256)?,
        q,
    };
    fam.validate()?;
    Ok(fam)
}

/// Node refinement policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSettings {
    /// Largest node count per contour.
    pub max_nodes: usize,
    /// Stop once successive values differ by less than `tol * max(1, |value|)`.
    pub tol: f64,
    /// Report non-convergence if the final change exceeds `fail_tol * max(1, |value|)`.
    pub fail_tol: f64,
}

impl Default for QuadSettings {
    fn default() -> Self {
        Self {
            max_nodes: 4096,
            tol: 1e-10,
            fail_tol: 1e-7,
        }
    }
}

/// A real quantity evaluated by contour quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermValue {
    pub value: f64,
    /// Imaginary part of the quadrature; zero in exact arithmetic.
    pub imag: f64,
    /// Nodes per contour at the final refinement.
    pub nodes: usize,
    /// Absolute change at the final doubling.
    pub change: f64,
}

/// Doubles the node count from `start` until successive values agree.
/// Without room to double, the change is reported as NaN.
fn refine<F: Fn(usize) -> Result<C64>>(start: usize, settings: &QuadSettings, f: F) -> Result<(C64, usize, f64)> {
    // Leave room for at least one doubling under the cap.
    let mut n = start.min(settings.max_nodes / 2).max(MIN_NODES);
    let mut prev = f(n)?;
    if 2 * n > settings.max_nodes {
        return Ok((prev, n, f64::NAN));
    }
    loop {
        n *= 2;
        let next = f(n)?;
        let change = (next - prev).norm();
        let scale = next.norm().max(1.0);
        if change < settings.tol * scale {
            return Ok((next, n, change));
        }
        if 2 * n > settings.max_nodes {
            if change > settings.fail_tol * scale {
                return Err(Error::NonConvergence(format!(
                    "contour quadrature changed by {change:.3e} at {n} nodes"
                )));
            }
            return Ok((next, n, change));
        }
        prev = next;
    }
}

/// `(1 - w)^{-e} e^{-wt} / w`.
fn factor(e: i64, t: f64, w: C64) -> C64 {
    let one_minus = C64::new(1.0, 0.0) - w;
    (-(e as f64) * one_minus.ln() - w * t).exp() / w
}

fn double_sum(c1: &Contour, c2: &Contour, q: f64, e1: i64, e2: i64, t: f64) -> Result<C64> {
    let f1: Vec<(C64, C64)> = c1.points().into_iter().map(|(w, dw)| (w, factor(e1, t, w) * dw)).collect();
    let f2: Vec<(C64, C64)> = c2.points().into_iter().map(|(w, dw)| (w, factor(e2, t, w) * dw)).collect();
    let rows: Vec<(C64, f64)> = f1
        .par_iter()
        .map(|&(w1, g1)| {
            let mut row = C64::new(0.0, 0.0);
            let mut min_den = f64::INFINITY;
            for &(w2, g2) in &f2 {
                let den = w1 - q * w2;
                min_den = min_den.min(den.norm_sqr());
                row += (w1 - w2) / den * g2;
            }
            (row * g1, min_den)
        })
        .collect();
    let total: C64 = rows.iter().map(|r| r.0).sum();
    let min_den = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    if min_den.sqrt() < 1e-12 {
        return Err(Error::PoleProximity("node pair on w1 = q w2".into()));
    }
    Ok(total / (TWO_PI_I * TWO_PI_I))
}

/// `(1/2 pi i)^2 \oint_{c1}\oint_{c2} (w1-w2)/(w1-q w2) f_{e1}(w1) f_{e2}(w2) dw1 dw2`
/// with node refinement.
pub fn double_term(
    c1: &Contour,
    c2: &Contour,
    q: f64,
    e1: i64,
    e2: i64,
    t: f64,
    settings: &QuadSettings,
) -> Result<TermValue> {
    let start = c1.nodes.max(c2.nodes);
    let (v, nodes, change) = refine(start, settings, |n| {
        double_sum(&c1.with_nodes(n), &c2.with_nodes(n), q, e1, e2, t)
    })?;
    Ok(TermValue { value: v.re, imag: v.im, nodes, change })
}

/// `(1/2 pi i) \oint_c (1-w)^{-e} e^{-wt} dw/w` with node refinement.
pub fn single_term(c: &Contour, e: i64, t: f64, settings: &QuadSettings) -> Result<TermValue> {
    let (v, nodes, change) = refine(c.nodes, settings, |n| {
        Ok(quad_closed(&c.with_nodes(n), |w| factor(e, t, w)))
    })?;
    Ok(TermValue { value: v.re, imag: v.im, nodes, change })
}

/// The small single integral with exponent `m + 1` at the contour's own node count.
pub fn eval_small_single(m: i64, t: f64, c: &Contour) -> f64 {
    quad_closed(c, |w| factor(m + 1, t, w)).re
}

fn combine(parts: &[TermValue], value: f64) -> TermValue {
    TermValue {
        value,
        imag: parts.iter().map(|p| p.imag.abs()).fold(0.0, f64::max),
        nodes: parts.iter().map(|p| p.nodes).max().unwrap_or(0),
        change: parts.iter().map(|p| p.change).fold(0.0, f64::max),
    }
}

/// Effective exponents of the `q4`/`q6` integrals (both measured from `x1`).
pub fn exponents_from_x1(params: &LatticeParams, conv: &Conventions) -> (i64, i64) {
    conv.exponents(params.y1 - params.x1, params.y2 - params.x1)
}

/// Effective exponents of the `q5` integral (`y1 - x2`, `y2 - x1`).
pub fn exponents_q5(params: &LatticeParams, conv: &Conventions) -> (i64, i64) {
    conv.exponents(params.y1 - params.x2, params.y2 - params.x1)
}

/// `q4` as a double integral over the large contour.
pub fn eval_q4(params: &LatticeParams, fam: &ContourFamily, conv: &Conventions, settings: &QuadSettings) -> Result<TermValue> {
    let (e1, e2) = exponents_from_x1(params, conv);
    double_term(&fam.large, &fam.large, params.q, e1, e2, params.t, settings)
}

/// `q4` from small contours: `J + 1 + s1 + s2 / q`, where `J` is the small
/// double integral and `s_j` the small single integrals.
pub fn eval_q4_deformed(
    params: &LatticeParams,
    fam: &ContourFamily,
    conv: &Conventions,
    settings: &QuadSettings,
) -> Result<TermValue> {
    let (e1, e2) = exponents_from_x1(params, conv);
    let j = double_term(&fam.small_outer, &fam.small_inner, params.q, e1, e2, params.t, settings)?;
    let s1 = single_term(&fam.small_outer, e1, params.t, settings)?;
    let s2 = single_term(&fam.small_inner, e2, params.t, settings)?;
    Ok(combine(&[j, s1, s2], j.value + 1.0 + s1.value + s2.value / params.q))
}

/// `q4` from small contours and `q6`, sharing the double integral `J`.
pub fn eval_q4_q6_deformed(
    params: &LatticeParams,
    fam: &ContourFamily,
    conv: &Conventions,
    q1: f64,
    settings: &QuadSettings,
) -> Result<(TermValue, TermValue)> {
    let (e1, e2) = exponents_from_x1(params, conv);
    let j = double_term(&fam.small_outer, &fam.small_inner, params.q, e1, e2, params.t, settings)?;
    let s1 = single_term(&fam.small_outer, e1, params.t, settings)?;
    let s2 = single_term(&fam.small_inner, e2, params.t, settings)?;
    Ok((
        combine(&[j, s1, s2], j.value + 1.0 + s1.value + s2.value / params.q),
        combine(&[j], 1.0 - q1 - params.q * j.value),
    ))
}

/// `q5 = q J(y1 - x2, y2 - x1)` over `C~1 x C~2`.
pub fn eval_q5(params: &LatticeParams, fam: &ContourFamily, conv: &Conventions, settings: &QuadSettings) -> Result<TermValue> {
    let (e1, e2) = exponents_q5(params, conv);
    let j = double_term(&fam.small_outer, &fam.small_inner, params.q, e1, e2, params.t, settings)?;
    Ok(combine(&[j], params.q * j.value))
}

/// `q6 = 1 - q1 - q J(y1 - x1, y2 - x1)` over `C~1 x C~2`.
pub fn eval_q6(
    params: &LatticeParams,
    fam: &ContourFamily,
    conv: &Conventions,
    q1: f64,
    settings: &QuadSettings,
) -> Result<TermValue> {
    let (e1, e2) = exponents_from_x1(params, conv);
    let j = double_term(&fam.small_outer, &fam.small_inner, params.q, e1, e2, params.t, settings)?;
    Ok(combine(&[j], 1.0 - q1 - params.q * j.value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::poisson_cdf;

    fn c(re: f64, r: f64, n: usize) -> Contour {
        Contour::circle(C64::new(re, 0.0), r, n).unwrap()
    }

    #[test]
    fn cauchy_checks() {
        let big = c(0.0, 1.5, 64);
        assert!((quad_closed(&big, |w| 1.0 / w) - 1.0).norm() < 1e-12);
        assert!(quad_closed(&c(1.0, 0.1, 64), |w| 1.0 / w).norm() < 1e-12);
        assert!(quad_closed(&big, |w| 1.0 / (w * (1.0 - w))).norm() < 1e-10);
        assert!((quad_closed(&big.reversed(), |w| 1.0 / w) + 1.0).norm() < 1e-12);
    }

    #[test]
    fn double_quadrature() {
        let big = c(0.0, 1.5, 64);
        assert!((quad_double(&big, &big, |a, b| 1.0 / (a * b)) - 1.0).norm() < 1e-12);
        let small = c(1.0, 0.3, 64);
        let f = |w: C64| (w * w).exp() / (w - 1.0).powi(2);
        let g = |w: C64| 1.0 / (w * (w - 1.0));
        let prod = quad_closed(&small, f) * quad_closed(&big, g);
        let both = quad_double(&small, &big, |a, b| f(a) * g(b));
        assert!((prod - both).norm() < 1e-12);
    }

    #[test]
    fn large_kernel_nodes_avoid_pole() {
        let q = 0.5;
        let big = c(0.0, 1.5, 128);
        let min = big
            .points()
            .iter()
            .flat_map(|&(a, _)| big.points().into_iter().map(move |(b, _)| (a - q * b).norm()))
            .fold(f64::INFINITY, f64::min);
        assert!(min >= (1.0 - q) * 1.5 - 1e-12);
    }

    #[test]
    fn segment_quadrature() {
        let s = Contour::vertical_segment(C64::new(0.0, 0.0), 1.0, 2001).unwrap();
        // \int_{-1}^{1} i dy / (2 pi i) = 2 / (2 pi)
        let v = quad_closed(&s, |_| C64::new(1.0, 0.0));
        assert!((v.re - 1.0 / PI).abs() < 1e-12);
        assert!((s.distance_to(C64::new(1.0, 2.0)) - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn default_family_geometry() {
        let fam = default_contours(0.5).unwrap();
        assert_eq!(fam.small_outer.center, C64::new(0.75, 0.0));
        assert!((fam.small_outer.radius - 0.35).abs() < 1e-15);
        assert!(fam.small_outer.winding_number(C64::new(0.0, 0.0)).abs() < 1e-9);
        assert!((fam.small_outer.winding_number(C64::new(1.0, 0.0)) - 1.0).abs() < 1e-9);
        assert!(fam.inner_gap() > 0.0);
        default_contours(0.9).unwrap();
        default_contours(0.06).unwrap();
        // Below q = 1/18 the fixed C~1 radius reaches its centre.
        assert!(default_contours(0.05).is_err());
        assert!(default_contours(1.0).is_err());
    }

    #[test]
    fn invalid_families_rejected() {
        let mut fam = default_contours(0.5).unwrap();
        fam.small_outer = fam.small_outer.with_radius(0.2);
        assert!(fam.validate().is_err());
        let mut fam = default_contours(0.5).unwrap();
        fam.small_inner = c(1.0, 1.2, 256);
        assert!(fam.validate().is_err());
        let mut fam = default_contours(0.5).unwrap();
        fam.large = c(0.0, 0.8, 256);
        assert!(fam.validate().is_err());
        assert!(Contour::circle(C64::new(0.0, 0.0), 1.0, 8).is_err());
    }

    #[test]
    fn small_single_matches_residue_series() {
        let fam = default_contours(0.5).unwrap();
        let s0 = eval_small_single(0, 1.0, &fam.small_inner);
        assert!((s0 - SMALL_CONTOUR_SIGN * (-1.0f64).exp()).abs() < 1e-12);
        let s3 = eval_small_single(3, 2.0, &fam.small_inner);
        assert!((s3 - SMALL_CONTOUR_SIGN * poisson_cdf(3, 2.0)).abs() < 1e-12);
        assert!(eval_small_single(-1, 3.0, &fam.small_inner).abs() < 1e-12);
    }

    #[test]
    fn adapted_family_is_valid() {
        for &(q, e1, e2, t) in &[(0.2, 40, 0, 10.0), (0.9, 0, 40, 0.0), (0.5, 1650, 1612, 1600.0), (0.3, -2, -1, 5.0)] {
            let fam = ContourFamily::adapted(q, e1, e2, t, 256).unwrap();
            fam.validate().unwrap();
        }
    }

    fn params(q: f64, m1: i64, m2: i64, t: f64) -> LatticeParams {
        LatticeParams { q, n1: 1, n2: 1, x1: 0, x2: 1, y1: m1, y2: m2, t }
    }

    #[test]
    fn q4_radius_invariance() {
        let p = params(0.5, 2, 3, 1.0);
        let conv = Conventions::as_printed();
        let s = QuadSettings::default();
        let mut fam = default_contours(0.5).unwrap().with_nodes(512);
        fam.large = fam.large.with_radius(1.3);
        let a = eval_q4(&p, &fam, &conv, &s).unwrap();
        fam.large = fam.large.with_radius(1.7);
        let b = eval_q4(&p, &fam, &conv, &s).unwrap();
        assert!((a.value - b.value).abs() < 1e-10);
        assert!(a.imag.abs() < 1e-9);
    }

    #[test]
    fn q4_deformation_identity_examples() {
        let conv = Conventions::as_printed();
        let s = QuadSettings::default();
        for p in [params(0.5, 2, 3, 1.0), params(0.5, 2, 3, 0.0), params(0.5, -1, -1, 1.0)] {
            let fam = default_contours(p.q).unwrap();
            let a = eval_q4(&p, &fam, &conv, &s).unwrap().value;
            let b = eval_q4_deformed(&p, &fam, &conv, &s).unwrap().value;
            assert!((a - b).abs() < 1e-9, "{p:?}: {a} vs {b}");
        }
    }

    #[test]
    fn q5_node_and_radius_invariance() {
        let p = params(0.5, 3, 4, 1.0);
        let conv = Conventions::verified();
        let fixed = QuadSettings { max_nodes: 256, ..QuadSettings::default() };
        let fam = default_contours(0.5).unwrap();
        let a = eval_q5(&p, &fam, &conv, &fixed).unwrap().value;
        let b = eval_q5(&p, &fam.with_nodes(512), &conv, &QuadSettings { max_nodes: 512, ..fixed }).unwrap().value;
        assert!((a - b).abs() < 1e-10);
        let mut shrunk = fam;
        shrunk.small_inner = shrunk.small_inner.with_radius(0.07);
        let c = eval_q5(&p, &shrunk, &conv, &QuadSettings::default()).unwrap().value;
        assert!((a - c).abs() < 1e-9);
    }

    #[test]
    fn q5_decays_for_large_time() {
        let p = params(0.5, 2, 2, 50.0);
        let fam = ContourFamily::adapted(0.5, 2, 2, 50.0, 256).unwrap();
        let v = eval_q5(&p, &fam, &Conventions::verified(), &QuadSettings::default()).unwrap();
        assert!(v.value.abs() < 1e-12);
    }
}
