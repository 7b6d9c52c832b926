//! Canonical text form: terms in canonical key order joined by ` + ` / ` - `,
//! each as `coeff*x1^a*y2^b*nu^c*dx1^dx2` with unit factors omitted.

use std::fmt;

use num_traits::{Signed, Zero};

use super::{GradedSeries, Monomial, VariableProfile, MAX_DIM};
use crate::scalar::GaussianRational;

pub(crate) fn monomial_string(m: &Monomial, profile: &VariableProfile) -> String {
    let mut factors: Vec<String> = Vec::new();
    let fiber = profile.tag.symbol();
    for k in 0..MAX_DIM {
        match m.x[k] {
            0 => {}
            1 => factors.push(format!("x{}", k + 1)),
            e => factors.push(format!("x{}^{}", k + 1, e)),
        }
    }
    for k in 0..MAX_DIM {
        match m.fiber[k] {
            0 => {}
            1 => factors.push(format!("{fiber}{}", k + 1)),
            e => factors.push(format!("{fiber}{}^{}", k + 1, e)),
        }
    }
    match m.nu {
        0 => {}
        1 => factors.push("nu".into()),
        e => factors.push(format!("nu^{e}")),
    }
    if m.dx != 0 {
        let forms: Vec<String> = m.form_indices().iter().map(|k| format!("dx{}", k + 1)).collect();
        factors.push(forms.join("^"));
    }
    if factors.is_empty() {
        "1".into()
    } else {
        factors.join("*")
    }
}

/// Splits a coefficient into a sign and a magnitude string (empty when the
/// magnitude is the real unit).
fn coefficient_parts(c: &GaussianRational) -> (bool, String) {
    if c.im.is_zero() {
        let neg = c.re.is_negative();
        let mag = GaussianRational::real(c.re.abs());
        (neg, if mag.is_one() { String::new() } else { mag.to_string() })
    } else if c.re.is_zero() {
        let neg = c.im.is_negative();
        (neg, GaussianRational::imaginary(c.im.abs()).to_string())
    } else {
        (false, format!("({c})"))
    }
}

pub(crate) fn term_string(m: &Monomial, c: &GaussianRational, profile: &VariableProfile) -> (bool, String) {
    let (neg, mag) = coefficient_parts(c);
    let body = if *m == Monomial::ONE {
        if mag.is_empty() {
            "1".to_string()
        } else {
            mag
        }
    } else if mag.is_empty() {
        monomial_string(m, profile)
    } else {
        format!("{mag}*{}", monomial_string(m, profile))
    };
    (neg, body)
}

impl fmt::Display for GradedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (m, c)) in self.terms.iter().enumerate() {
            let (neg, body) = term_string(m, c, &self.profile);
            match (idx, neg) {
                (0, false) => write!(f, "{body}")?,
                (0, true) => write!(f, "-{body}")?,
                (_, false) => write!(f, " + {body}")?,
                (_, true) => write!(f, " - {body}")?,
            }
        }
        Ok(())
    }
}
