//! Reading conventions for the six-term formula.
//!
//! The default ([`Conventions::verified`]) is the combination that reproduces
//! exact expectations of the duality observable computed from the particle
//! dynamics. [`Conventions::as_printed`] keeps the literal reading, which is
//! the one the asymptotic expansions are written for.

use serde::{Deserialize, Serialize};

/// How `q1` and `q3` are read from the incomplete gamma function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IndicatorConvention {
    /// `q1 = 1 - Q(y1 - x1, t)` for `y1 > x1`, else 1; `q3 = Q(y1 - x2, t)` for `y1 > x2`, else 0.
    Complement,
    /// `q1 = Q(y1 - x1, t)` for `y1 > x1`, else 1; `q3 = 1 - Q(y1 - x2, t)` for `y1 >= x2`, else 0.
    Printed,
}

/// Power of `(1 - w)^{-1}` attached to a site difference `m` in the contour integrands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExponentConvention {
    /// Exponent `m`.
    Shifted,
    /// Exponent `m + 1`.
    Printed,
}

impl ExponentConvention {
    pub fn offset(self) -> i64 {
        match self {
            ExponentConvention::Shifted => 0,
            ExponentConvention::Printed => 1,
        }
    }
}

/// Assignment of exponents to the two variables of the double-contour kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Labelling {
    /// The larger exponent goes with `w1`.
    Ordered,
    /// The first site difference goes with `w1` regardless of size.
    Printed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conventions {
    pub indicator: IndicatorConvention,
    pub exponent: ExponentConvention,
    pub labelling: Labelling,
    /// Evaluate `q5` piecewise: contour for `y1 <= y2`, product of gamma
    /// functions for `y2 <= x2`, killed dual chain otherwise.
    pub piecewise_q5: bool,
}

impl Conventions {
    pub fn verified() -> Self {
        Self {
            indicator: IndicatorConvention::Complement,
            exponent: ExponentConvention::Shifted,
            labelling: Labelling::Ordered,
            piecewise_q5: true,
        }
    }

    pub fn as_printed() -> Self {
        Self {
            indicator: IndicatorConvention::Printed,
            exponent: ExponentConvention::Printed,
            labelling: Labelling::Printed,
            piecewise_q5: false,
        }
    }

    /// Effective exponents for site differences `(m1, m2)`.
    pub fn exponents(&self, m1: i64, m2: i64) -> (i64, i64) {
        let (e1, e2) = (m1 + self.exponent.offset(), m2 + self.exponent.offset());
        match self.labelling {
            Labelling::Ordered if e1 < e2 => (e2, e1),
            _ => (e1, e2),
        }
    }

    /// Orders a pair of scaling constants the same way [`Self::exponents`] orders exponents.
    pub fn order_pair(&self, s1: f64, s2: f64) -> (f64, f64) {
        match self.labelling {
            Labelling::Ordered if s1 < s2 => (s2, s1),
            _ => (s1, s2),
        }
    }
}

impl Default for Conventions {
    fn default() -> Self {
        Self::verified()
    }
}
