//! Fixed catalog of initial profiles `w0`. A profile is a sum of terms; there
//! is deliberately no general expression language.

use std::f64::consts::PI;

use forwarding_core::{gain_closed_form, Params64};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Term {
    /// `amplitude sin(2 pi frequency x + phase)`.
    Sine {
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    /// `sum_k coeffs[k] x^k`.
    Polynomial { coeffs: Vec<f64> },
    Constant { value: f64 },
    /// Smooth bump `amplitude exp(1 - 1 / (1 - r^2))`, `r = (x - center) / half_width`,
    /// zero outside `|r| < 1`.
    Bump { center: f64, half_width: f64, amplitude: f64 },
    /// `scale M(x)`, the forwarding gain of the configured plant.
    Gain { scale: f64 },
}

impl Term {
    fn validate(&self) -> Result<(), String> {
        let finite = |vals: &[f64]| vals.iter().all(|v| v.is_finite());
        let ok = match self {
            Term::Sine { amplitude, frequency, phase } => finite(&[*amplitude, *frequency, *phase]),
            Term::Polynomial { coeffs } => finite(coeffs),
            Term::Constant { value } => value.is_finite(),
            Term::Bump { center, half_width, amplitude } => {
                if !(*half_width > 0.0) {
                    return Err(format!("bump half_width must be > 0, got {half_width}"));
                }
                finite(&[*center, *half_width, *amplitude])
            }
            Term::Gain { scale } => scale.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(format!("non-finite coefficient in {self:?}"))
        }
    }

    fn eval(&self, x: f64, params: &Params64) -> f64 {
        match self {
            Term::Sine { amplitude, frequency, phase } => amplitude * (2.0 * PI * frequency * x + phase).sin(),
            Term::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c),
            Term::Constant { value } => *value,
            Term::Bump { center, half_width, amplitude } => {
                let r = (x - center) / half_width;
                if r.abs() < 1.0 {
                    amplitude * (1.0 - 1.0 / (1.0 - r * r)).exp()
                } else {
                    0.0
                }
            }
            Term::Gain { scale } => scale * gain_closed_form(params, x),
        }
    }
}

/// `w0` as a sum of catalog terms; the empty sum is `w0 = 0`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Profile(pub Vec<Term>);

impl Profile {
    pub fn validate(&self) -> Result<(), String> {
        self.0.iter().try_for_each(Term::validate)
    }

    pub fn eval(&self, x: f64, params: &Params64) -> f64 {
        self.0.iter().map(|t| t.eval(x, params)).sum()
    }

    /// Closure form expected by the solvers.
    pub fn function<'a>(&'a self, params: &'a Params64) -> impl Fn(f64) -> f64 + 'a {
        move |x| self.eval(x, params)
    }

    /// Continuous-level compatibility defect `|w0(0) - w0(1) - gamma z0|`.
    pub fn compat_defect(&self, z0: f64, params: &Params64) -> f64 {
        (self.eval(0.0, params) - self.eval(1.0, params) - params.gamma() * z0).abs()
    }
}
