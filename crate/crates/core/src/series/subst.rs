//! Composition of series with substituted variables, and reversion of
//! fiber systems that are the identity at linear order.

use std::collections::{BTreeMap, HashMap};

use super::{FiberTag, GradedSeries, JetValidity, MultiIndex, TermSink, VariableProfile, MAX_DIM};
use crate::error::{Error, Result};

/// A variable assignment. Unassigned variables map to the same-named
/// variable of the target profile (fiber variables take the target tag).
#[derive(Clone, Debug)]
pub struct Substitution {
    target: VariableProfile,
    x: Vec<Option<GradedSeries>>,
    fiber: Vec<Option<GradedSeries>>,
}

impl Substitution {
    pub fn new(target: VariableProfile) -> Self {
        Self { target, x: vec![None; target.n], fiber: vec![None; target.n] }
    }

    /// `x^k ← s`; `s` must be `x^k` plus terms of positive fiber degree.
    pub fn x(mut self, k: usize, s: GradedSeries) -> Self {
        self.x[k] = Some(s);
        self
    }

    /// Fiber variable `k ← s`; `s` must have no fiber-constant terms.
    pub fn fiber(mut self, k: usize, s: GradedSeries) -> Self {
        self.fiber[k] = Some(s);
        self
    }

    pub fn target(&self) -> &VariableProfile {
        &self.target
    }

    fn check(&self) -> Result<()> {
        let assigned = self.x.iter().chain(self.fiber.iter()).flatten();
        for s in assigned {
            if s.profile() != &self.target {
                return Err(Error::ProfileMismatch("substituted series must use the target profile".into()));
            }
            if s.terms().any(|(m, _)| m.dx != 0) {
                return Err(Error::InadmissibleSubstitution("substituted series must be free of dx".into()));
            }
        }
        for (k, s) in self.fiber.iter().enumerate() {
            if let Some(s) = s {
                if let Some((m, _)) = s.terms().find(|(m, _)| m.fiber_deg() == 0) {
                    return Err(Error::InadmissibleSubstitution(format!(
                        "fiber variable {} maps to a series with fiber-constant term {}",
                        k + 1,
                        s.render_monomial(m)
                    )));
                }
            }
        }
        for (k, s) in self.x.iter().enumerate() {
            if let Some(s) = s {
                let correction = s.sub(&GradedSeries::x_var(self.target, k))?;
                let bad = correction.terms().find(|(m, _)| m.fiber_deg() == 0).map(|(m, _)| *m);
                if let Some(m) = bad {
                    return Err(Error::InadmissibleSubstitution(format!(
                        "x{} maps to x{} plus a correction with fiber-constant term {}",
                        k + 1,
                        k + 1,
                        s.render_monomial(&m)
                    )));
                }
            }
        }
        Ok(())
    }
}

impl GradedSeries {
    /// Composition `a(x(·), fiber(·))`, re-expanded and truncated to the
    /// target profile. The result carries the target's fiber tag.
    pub fn substitute(&self, sub: &Substitution) -> Result<GradedSeries> {
        let target = sub.target;
        if self.profile.n != target.n {
            return Err(Error::ProfileMismatch(format!("dimension {} vs {}", self.profile.n, target.n)));
        }
        sub.check()?;

        let shifts_x = sub.x.iter().any(Option::is_some);
        let mut valid = match (self.valid_x, shifts_x) {
            (JetValidity::Through(v), true) => {
                // Missing terms of x-degree > v reappear at x-degree ≥ v + 1 − N_f.
                if v < target.fiber_order {
                    return Err(Error::InadmissibleSubstitution(format!(
                        "jet valid through x-degree {v} cannot be shifted in x at fiber order {}",
                        target.fiber_order
                    )));
                }
                JetValidity::Through(v - target.fiber_order)
            }
            (v, _) => v,
        };
        for s in sub.x.iter().chain(sub.fiber.iter()).flatten() {
            valid = valid.min(s.valid_x());
        }

        // Group terms by the exponents of assigned variables so that each
        // power product is multiplied once.
        let mut groups: BTreeMap<(MultiIndex, MultiIndex), TermSink> = BTreeMap::new();
        for (m, c) in self.terms() {
            if m.fiber_deg() > target.fiber_order || m.nu as u32 > target.nu_order {
                continue;
            }
            let mut ax = [0u8; MAX_DIM];
            let mut af = [0u8; MAX_DIM];
            let mut rest = *m;
            for k in 0..target.n {
                if sub.x[k].is_some() {
                    ax[k] = m.x[k];
                    rest.x[k] = 0;
                }
                if sub.fiber[k].is_some() {
                    af[k] = m.fiber[k];
                    rest.fiber[k] = 0;
                }
            }
            groups
                .entry((ax, af))
                .or_insert_with(|| TermSink::new(target, JetValidity::Exact))
                .push(rest, c.clone());
        }

        let mut powers: HashMap<(bool, usize, u8), GradedSeries> = HashMap::new();
        let mut power = |is_x: bool, k: usize, e: u8| -> Result<GradedSeries> {
            if let Some(p) = powers.get(&(is_x, k, e)) {
                return Ok(p.clone());
            }
            let base = if is_x { sub.x[k].as_ref() } else { sub.fiber[k].as_ref() };
            let p = base.expect("assigned").pow(e as u32)?;
            powers.insert((is_x, k, e), p.clone());
            Ok(p)
        };

        let mut out = TermSink::new(target, valid);
        for ((ax, af), rest) in groups {
            let mut acc = rest.finish();
            for k in 0..target.n {
                if ax[k] > 0 {
                    acc = acc.mul(&power(true, k, ax[k])?)?;
                }
                if af[k] > 0 {
                    acc = acc.mul(&power(false, k, af[k])?)?;
                }
            }
            out.limit_validity(acc.valid_x());
            for (m, c) in acc.terms() {
                out.push(*m, c.clone());
            }
        }
        Ok(out.finish())
    }
}

/// Inverts `ξ_p = F_p(x, ζ) = ζ_p + (fiber degree ≥ 2)` to `ζ_p(x, ξ)`
/// through fiber order `N_f` by the fixed-point iteration
/// `ζ ← ξ − (F − id)(ζ)`. The result is written with fiber tag `out`.
pub fn reverse_fiber_system(system: &[GradedSeries], out: FiberTag) -> Result<Vec<GradedSeries>> {
    let Some(first) = system.first() else {
        return Err(Error::ProfileMismatch("empty fiber system".into()));
    };
    let input = *first.profile();
    if system.len() != input.n {
        return Err(Error::ProfileMismatch(format!("{} series for dimension {}", system.len(), input.n)));
    }
    let mut excess = Vec::with_capacity(input.n);
    for (p, f) in system.iter().enumerate() {
        if f.profile() != &input {
            return Err(Error::ProfileMismatch("fiber system entries must share a profile".into()));
        }
        if f.terms().any(|(m, _)| m.dx != 0) {
            return Err(Error::FormPartNotAllowed("fiber system entries must be functions".into()));
        }
        let identity = GradedSeries::fiber_var(input, p);
        let low = f.select(|m| m.fiber_deg() <= 1);
        if low != identity {
            return Err(Error::NonIdentityLinearPart(format!("entry {} has linear part {}", p + 1, low)));
        }
        excess.push(f.sub(&identity)?);
    }

    let target = input.with_tag(out);
    let identity: Vec<GradedSeries> = (0..input.n).map(|p| GradedSeries::fiber_var(target, p)).collect();
    let mut current = identity.clone();
    for _ in 0..input.fiber_order {
        let sub = (0..input.n).fold(Substitution::new(target), |s, j| s.fiber(j, current[j].clone()));
        current = excess
            .iter()
            .zip(&identity)
            .map(|(h, id)| id.sub(&h.substitute(&sub)?))
            .collect::<Result<_>>()?;
    }
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::GaussianRational;
    use crate::series::TermSpec;

    fn yprof() -> VariableProfile {
        VariableProfile::new(2, 6, 4, 3, FiberTag::Y).unwrap()
    }

    #[test]
    fn linear_relabeling() {
        let p = yprof();
        let xi = p.with_tag(FiberTag::Xi);
        let a = GradedSeries::make(p, vec![TermSpec::new(1).fiber(&[1, 1])]).unwrap();
        let sub = Substitution::new(xi)
            .fiber(0, GradedSeries::fiber_var(xi, 1))
            .fiber(1, GradedSeries::fiber_var(xi, 0).neg());
        assert_eq!(a.substitute(&sub).unwrap().to_string(), "-xi1*xi2");
    }

    #[test]
    fn taylor_shift() {
        let z = yprof().with_tag(FiberTag::Zeta);
        let f = GradedSeries::polynomial(z, vec![TermSpec::new(1).x(&[1]), TermSpec::new(1).x(&[2])]).unwrap();
        let shift = &GradedSeries::x_var(z, 0) + &GradedSeries::fiber_var(z, 0);
        let got = f.substitute(&Substitution::new(z).x(0, shift.clone())).unwrap();
        let expect = &shift + &(&shift * &shift);
        assert_eq!(got, expect);
        assert_eq!(got.to_string(), "zeta1 + zeta1^2 + x1 + 2*x1*zeta1 + x1^2");
    }

    #[test]
    fn rejects_nonzero_constant() {
        let p = yprof();
        let sub = Substitution::new(p).fiber(0, GradedSeries::one(p));
        assert!(matches!(
            GradedSeries::fiber_var(p, 0).substitute(&sub),
            Err(Error::InadmissibleSubstitution(_))
        ));
    }

    #[test]
    fn x_shift_consumes_jet_order() {
        let p = VariableProfile::new(2, 6, 2, 3, FiberTag::Y).unwrap();
        let f = GradedSeries::make(p, vec![TermSpec::new(1).x(&[3])]).unwrap();
        let shift = &GradedSeries::x_var(p, 0) + &GradedSeries::fiber_var(p, 1);
        let got = f.substitute(&Substitution::new(p).x(0, shift)).unwrap();
        assert_eq!(got.valid_x(), JetValidity::Through(4));
    }

    #[test]
    fn reverse_quadratic_system() {
        let z = yprof().with_tag(FiberTag::Zeta);
        let xi = z.with_tag(FiberTag::Xi);
        let f1 = GradedSeries::make(z, vec![TermSpec::new(1).fiber(&[1]), TermSpec::new(1).fiber(&[0, 2])]).unwrap();
        let f2 = GradedSeries::fiber_var(z, 1);
        let inv = reverse_fiber_system(&[f1.clone(), f2.clone()], FiberTag::Xi).unwrap();
        let e1 = GradedSeries::make(xi, vec![TermSpec::new(1).fiber(&[1]), TermSpec::new(-1).fiber(&[0, 2])]).unwrap();
        assert_eq!(inv[0], e1);
        assert_eq!(inv[1], GradedSeries::fiber_var(xi, 1));
        // Back-substitution returns ξ.
        let sub = Substitution::new(xi).fiber(0, inv[0].clone()).fiber(1, inv[1].clone());
        assert_eq!(f1.substitute(&sub).unwrap(), GradedSeries::fiber_var(xi, 0));
    }

    #[test]
    fn reverse_identity_and_errors() {
        let z = yprof().with_tag(FiberTag::Zeta);
        let id: Vec<_> = (0..2).map(|p| GradedSeries::fiber_var(z, p)).collect();
        let inv = reverse_fiber_system(&id, FiberTag::Xi).unwrap();
        assert_eq!(inv[1].to_string(), "xi2");
        let scaled = vec![id[0].scale(&GaussianRational::integer(2)), id[1].clone()];
        assert!(matches!(reverse_fiber_system(&scaled, FiberTag::Xi), Err(Error::NonIdentityLinearPart(_))));
    }
}
