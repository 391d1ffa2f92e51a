use serde::{Deserialize, Serialize};

/// Default tolerance for scale-normalized identity residuals.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Violation of an exact identity at one point.
///
/// `raw` is the max-abs violation over all index choices; `scale` is the
/// max-abs of the individual terms that enter the identity. The verdict
/// quantity is `raw / (1 + scale)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub raw: f64,
    pub scale: f64,
}

impl Residual {
    pub const ZERO: Residual = Residual { raw: 0.0, scale: 0.0 };

    pub fn normalized(&self) -> f64 {
        self.raw / (1.0 + self.scale)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.normalized() <= tol
    }

    /// The larger of two residuals by normalized value; ties keep `self`.
    pub fn worse(self, other: Residual) -> Residual {
        if other.normalized() > self.normalized() {
            other
        } else {
            self
        }
    }
}

/// Running max of violations and term magnitudes.
#[derive(Debug, Clone, Copy, Default)]
pub struct ResidualAcc {
    raw: f64,
    scale: f64,
}

impl ResidualAcc {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn violation(&mut self, v: f64) {
        // NaN must not hide: f64::max would drop it
        if v.is_nan() {
            self.raw = f64::NAN;
        } else if !self.raw.is_nan() {
            self.raw = self.raw.max(v.abs());
        }
    }

    #[inline]
    pub fn term(&mut self, t: f64) {
        self.scale = self.scale.max(t.abs());
    }

    #[inline]
    pub fn terms(&mut self, ts: &[f64]) {
        for &t in ts {
            self.term(t);
        }
    }

    /// Records `sum(terms)` as the violation and every summand as a term.
    #[inline]
    pub fn sum(&mut self, ts: &[f64]) {
        self.terms(ts);
        self.violation(ts.iter().sum());
    }

    pub fn finish(self) -> Residual {
        Residual {
            raw: self.raw,
            scale: self.scale,
        }
    }
}
