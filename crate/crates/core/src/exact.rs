//! Assembly of the six-term formula `sum_i delta_i p_i`.

use serde::{Deserialize, Serialize};

use crate::asym::ScalingParams;
use crate::contour::{
    eval_q4, eval_q4_q6_deformed, eval_q5, eval_q6, exponents_from_x1, exponents_q5, ContourFamily,
    QuadSettings, TermValue,
};
use crate::conventions::{Conventions, IndicatorConvention};
use crate::error::{check_q, Error, Result};
use crate::specfun::{ln_gamma, q_pochhammer, regularized_gamma_q};

/// A lattice instance: `n1` species-0 particles at `x1`, `n2` species-1
/// particles at `x2`, dual particles at `y1` (species 0) and `y2` (species 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeParams {
    pub q: f64,
    pub n1: u32,
    pub n2: u32,
    pub x1: i64,
    pub x2: i64,
    pub y1: i64,
    pub y2: i64,
    pub t: f64,
}

impl LatticeParams {
    pub fn validate(&self) -> Result<()> {
        check_q(self.q)?;
        if self.n1 == 0 || self.n2 == 0 {
            return Err(Error::Precondition("n1 and n2 must be positive".into()));
        }
        if self.x1 >= self.x2 {
            return Err(Error::Precondition(format!(
                "x1 < x2 required, got x1 = {}, x2 = {}",
                self.x1, self.x2
            )));
        }
        if !(self.t >= 0.0) || !self.t.is_finite() {
            return Err(Error::Precondition(format!("t must be finite and >= 0, got {}", self.t)));
        }
        Ok(())
    }

    /// Shifts every site by `c`.
    pub fn translated(&self, c: i64) -> Self {
        Self {
            x1: self.x1 + c,
            x2: self.x2 + c,
            y1: self.y1 + c,
            y2: self.y2 + c,
            ..*self
        }
    }
}

/// How `q5` was evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Q5Route {
    Contour,
    Factorised,
    DualChain,
}

impl Q5Route {
    pub fn as_str(self) -> &'static str {
        match self {
            Q5Route::Contour => "contour",
            Q5Route::Factorised => "factorised",
            Q5Route::DualChain => "dual-chain",
        }
    }
}

/// Quadrature diagnostics for `q4`, `q5`, `q6` in that order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub imag: [f64; 3],
    pub nodes: [usize; 3],
    pub change: [f64; 3],
    pub q5_route: Q5Route,
}

impl Diagnostics {
    pub fn max_imag(&self) -> f64 {
        self.imag.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

/// All intermediates of the formula. Arrays are indexed from 0, so
/// `qs[0]` is `q1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SixTerms {
    pub deltas: [f64; 6],
    pub qs: [f64; 6],
    pub ps: [f64; 6],
    pub total: f64,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContourChoice {
    /// Circles fitted to each integral's exponents and time.
    Adapted,
    /// One family for every integral; `q4` uses the large contour directly.
    Fixed(ContourFamily),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub conventions: Conventions,
    pub contours: ContourChoice,
    pub quad: QuadSettings,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            conventions: Conventions::verified(),
            contours: ContourChoice::Adapted,
            quad: QuadSettings::default(),
        }
    }
}

/// The six prefactors `delta_1..delta_6`.
pub fn deltas(n1: u32, n2: u32, q: f64) -> [f64; 6] {
    let h1 = q.powf(0.5 * n1 as f64);
    let p1m = q_pochhammer(q.powf(-(n1 as f64) - 0.5), q, n1);
    let p1p = q_pochhammer(q.powf(-(n1 as f64) + 0.5), q, n1);
    let p2m = q_pochhammer(q.powf(-(n2 as f64) - 0.5), q, n2);
    let p2p = q_pochhammer(q.powf(-(n2 as f64) + 0.5), q, n2);
    [
        h1 * p1m * p2p,
        h1 * p1p * p2p,
        p1m * p2p / h1,
        p1p * p2p / h1,
        p1m * p2m / h1,
        p1p * p2m / h1,
    ]
}

/// `Q(m, t)` for `m > 0`, and 0 for `m <= 0`.
fn tail(m: i64, t: f64) -> Result<f64> {
    if m > 0 {
        regularized_gamma_q(m as f64, t)
    } else {
        Ok(0.0)
    }
}

/// `(q1, q2, q3)` with `q2 = 1 - q1 - q3`.
pub fn q123(params: &LatticeParams, conv: &Conventions) -> Result<[f64; 3]> {
    let LatticeParams { x1, x2, y1, t, .. } = *params;
    let (q1, q3) = match conv.indicator {
        IndicatorConvention::Complement => {
            let q1 = if y1 > x1 { 1.0 - tail(y1 - x1, t)? } else { 1.0 };
            (q1, tail(y1 - x2, t)?)
        }
        IndicatorConvention::Printed => {
            let q1 = if y1 > x1 { tail(y1 - x1, t)? } else { 1.0 };
            let q3 = if y1 >= x2 {
                1.0 - regularized_gamma_q((y1 - x2) as f64, t)?
            } else {
                0.0
            };
            (q1, q3)
        }
    };
    Ok([q1, 1.0 - q1 - q3, q3])
}

/// `p = (q1 - q4, q4, q2 + q3 - q5 - q6, -q3 + q5 + q6, q5, q3 - q5)`.
pub fn p_vector(qs: &[f64; 6]) -> [f64; 6] {
    let [q1, q2, q3, q4, q5, q6] = *qs;
    [q1 - q4, q4, q2 + q3 - q5 - q6, -q3 + q5 + q6, q5, q3 - q5]
}

/// Probability that the two dual particles both stay above their thresholds
/// up to time `t`.
///
/// The species-0 dual particle starts `m1` sites above its threshold and
/// jumps left at rate 1. The species-1 particle starts `m2` sites above its
/// own threshold and jumps left at rate 1, or `q` while sharing a site with
/// the first. They share a site when `j - i = offset`, with `i`, `j` the
/// heights above the respective thresholds. Computed by uniformization of
/// the killed chain.
pub fn dual_survival(q: f64, m1: i64, m2: i64, offset: i64, t: f64) -> Result<f64> {
    check_q(q)?;
    if m1 <= 0 || m2 <= 0 {
        return Ok(0.0);
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    let (n1, n2) = (m1 as usize, m2 as usize);
    let rate = 2.0;
    let mu = rate * t;
    let kmax = (mu + 12.0 * mu.sqrt() + 40.0).ceil() as usize;
    if (n1 as f64) * (n2 as f64) * (kmax as f64) > 4e9 {
        return Err(Error::NonConvergence(format!(
            "dual chain with {} states over {kmax} steps exceeds the work limit",
            n1 * n2
        )));
    }
    let idx = |i: usize, j: usize| (i - 1) * n2 + (j - 1);
    let mut v = vec![0.0; n1 * n2];
    let mut next = vec![0.0; n1 * n2];
    v[idx(n1, n2)] = 1.0;
    let mut total = 0.0;
    for k in 0..=kmax {
        let mass: f64 = v.iter().sum();
        let kf = k as f64;
        total += (kf * mu.ln() - mu - ln_gamma(kf + 1.0)).exp() * mass;
        if mass < 1e-300 {
            break;
        }
        next.iter_mut().for_each(|x| *x = 0.0);
        for i in 1..=n1 {
            for j in 1..=n2 {
                let p = v[idx(i, j)];
                if p == 0.0 {
                    continue;
                }
                let r2 = if j as i64 - i as i64 == offset { q } else { 1.0 };
                next[idx(i, j)] += p * (1.0 - (1.0 + r2) / rate);
                if i > 1 {
                    next[idx(i - 1, j)] += p / rate;
                }
                if j > 1 {
                    next[idx(i, j - 1)] += p * r2 / rate;
                }
            }
        }
        std::mem::swap(&mut v, &mut next);
    }
    Ok(total.min(1.0))
}

fn family(opts: &EvalOptions, q: f64, e1: i64, e2: i64, t: f64) -> Result<ContourFamily> {
    match opts.contours {
        ContourChoice::Adapted => ContourFamily::adapted(q, e1, e2, t, 128),
        ContourChoice::Fixed(fam) => Ok(fam),
    }
}

fn q5_term(params: &LatticeParams, opts: &EvalOptions) -> Result<(TermValue, Q5Route)> {
    let conv = &opts.conventions;
    let LatticeParams { q, x1, x2, y1, y2, t, .. } = *params;
    let exact = |value| TermValue { value, imag: 0.0, nodes: 0, change: 0.0 };
    if conv.piecewise_q5 && y1 > y2 {
        if y2 <= x2 {
            let v = tail(y1 - x2, t)? * tail(y2 - x1, t)?;
            return Ok((exact(v), Q5Route::Factorised));
        }
        let v = dual_survival(q, y1 - x2, y2 - x1, x2 - x1, t)?;
        return Ok((exact(v), Q5Route::DualChain));
    }
    let (e1, e2) = exponents_q5(params, conv);
    let fam = family(opts, q, e1, e2, t)?;
    Ok((eval_q5(params, &fam, conv, &opts.quad)?, Q5Route::Contour))
}

/// Evaluates the six-term formula and all its intermediates.
pub fn two_point_value(params: &LatticeParams, opts: &EvalOptions) -> Result<SixTerms> {
    params.validate()?;
    let conv = &opts.conventions;
    let [q1, q2, q3] = q123(params, conv)?;
    let (e1, e2) = exponents_from_x1(params, conv);
    let fam = family(opts, params.q, e1, e2, params.t)?;
    let (q4, q6) = match opts.contours {
        ContourChoice::Adapted => eval_q4_q6_deformed(params, &fam, conv, q1, &opts.quad)?,
        ContourChoice::Fixed(_) => (
            eval_q4(params, &fam, conv, &opts.quad)?,
            eval_q6(params, &fam, conv, q1, &opts.quad)?,
        ),
    };
    let (q5, route) = q5_term(params, opts)?;
    let qs = [q1, q2, q3, q4.value, q5.value, q6.value];
    let ps = p_vector(&qs);
    let ds = deltas(params.n1, params.n2, params.q);
    let total = ds.iter().zip(&ps).map(|(d, p)| d * p).sum();
    Ok(SixTerms {
        deltas: ds,
        qs,
        ps,
        total,
        diagnostics: Diagnostics {
            imag: [q4.imag, q5.imag, q6.imag],
            nodes: [q4.nodes, q5.nodes, q6.nodes],
            change: [q4.change, q5.change, q6.change],
            q5_route: route,
        },
    })
}

/// Lattice instance for a scaling regime: `x1 = 0`, `x2 = round((c11 - c21) sqrt L)`,
/// `y1 = round(L + c11 sqrt L)`, `y2 = round(L + c12 sqrt L)`, `t = L`,
/// rounding half to even.
pub fn scaling_to_lattice(s: &ScalingParams) -> Result<LatticeParams> {
    s.validate()?;
    let root = s.l.sqrt();
    let round = |v: f64| v.round_ties_even() as i64;
    Ok(LatticeParams {
        q: s.q,
        n1: s.n1,
        n2: s.n2,
        x1: 0,
        x2: round((s.c11 - s.c21) * root),
        y1: round(s.l + s.c11 * root),
        y2: round(s.l + s.c12 * root),
        t: s.l,
    })
}

/// Contour values `[q1, q3, q4, q5, q6]` on the lattice instance of `s`,
/// read with `s.conventions` and without the piecewise `q5`, which is the
/// form the asymptotic expansions describe.
pub fn scaling_exact(s: &ScalingParams, quad: &QuadSettings) -> Result<[f64; 5]> {
    let p = scaling_to_lattice(s)?;
    let conv = Conventions { piecewise_q5: false, ..s.conventions };
    let [q1, _, q3] = q123(&p, &conv)?;
    let (a1, a2) = exponents_q5(&p, &conv);
    let q5 = eval_q5(&p, &ContourFamily::adapted(p.q, a1, a2, p.t, 256)?, &conv, quad)?;
    let (b1, b2) = exponents_from_x1(&p, &conv);
    let fam = ContourFamily::adapted(p.q, b1, b2, p.t, 256)?;
    let (q4, q6) = eval_q4_q6_deformed(&p, &fam, &conv, q1, quad)?;
    Ok([q1, q3, q4.value, q5.value, q6.value])
}
