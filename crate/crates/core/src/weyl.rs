//! Fiberwise structures on sections of the Weyl bundle: the `∘` product,
//! the fiber Poisson bracket, the pairing and the operators `δ`, `δ⁻¹`, `∇`.

use std::collections::{BTreeMap, HashMap};
use std::ops::{Add, Deref, Neg, Sub};

use crate::error::{Error, Result};
use crate::geometry::ChartGeometry;
use crate::scalar::GaussianRational;
use crate::series::{FiberTag, GradedSeries, Monomial, MultiIndex, Var, VariableProfile, MAX_DIM};

/// A section of `W ⊗ Λ` on the chart: a series with fiber tag `y` in the
/// Weyl profile of its geometry.
#[derive(Clone, Debug, PartialEq)]
pub struct WeylElement(GradedSeries);

impl WeylElement {
    pub fn new(series: GradedSeries) -> Self {
        debug_assert_eq!(series.profile().tag, FiberTag::Y);
        Self(series)
    }

    pub fn series(&self) -> &GradedSeries {
        &self.0
    }

    pub fn into_series(self) -> GradedSeries {
        self.0
    }

    /// Lifts a fiber-free function of `x` (and `ν`) into the Weyl profile.
    pub fn function(geo: &ChartGeometry, f: &GradedSeries) -> Result<Self> {
        Ok(Self(f.reprofile(geo.weyl_profile())?))
    }
}

impl Deref for WeylElement {
    type Target = GradedSeries;
    fn deref(&self) -> &GradedSeries {
        &self.0
    }
}

impl std::fmt::Display for WeylElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

impl From<GradedSeries> for WeylElement {
    fn from(s: GradedSeries) -> Self {
        Self::new(s)
    }
}

impl Add for &WeylElement {
    type Output = WeylElement;
    fn add(self, rhs: &WeylElement) -> WeylElement {
        WeylElement(&self.0 + &rhs.0)
    }
}

impl Sub for &WeylElement {
    type Output = WeylElement;
    fn sub(self, rhs: &WeylElement) -> WeylElement {
        WeylElement(&self.0 - &rhs.0)
    }
}

impl Neg for &WeylElement {
    type Output = WeylElement;
    fn neg(self) -> WeylElement {
        WeylElement(self.0.neg())
    }
}

/// One contraction pattern of the product: `coeff · ∂^α a · ∂^β b`, where
/// `coeff` already carries `(iν/2)^k`.
#[derive(Clone, Debug)]
struct Contraction {
    alpha: MultiIndex,
    beta: MultiIndex,
    coeff: GradedSeries,
}

/// The coefficients `(iν/2)^k Σ_M Π (Λ^{jl})^{M_jl} / M_jl!` of the product,
/// grouped by `(row sums, column sums)` of `M`, for `k ≤ Deg cap / 2`.
#[derive(Clone, Debug)]
pub(crate) struct ContractionTable {
    levels: Vec<Vec<Contraction>>,
}

impl ContractionTable {
    pub(crate) fn build(lambda: &[Vec<GradedSeries>], profile: VariableProfile) -> Result<Self> {
        let n = lambda.len();
        let max_k = profile.deg_cap.unwrap_or(2 * profile.nu_order) / 2;
        let max_k = max_k.min(profile.nu_order) as usize;
        let entries: Vec<(usize, usize)> =
            (0..n).flat_map(|j| (0..n).map(move |l| (j, l))).filter(|&(j, l)| !lambda[j][l].is_zero()).collect();
        // powers[e][t] = (Λ^{j_e l_e})^t / t!
        let mut powers: Vec<Vec<GradedSeries>> = Vec::with_capacity(entries.len());
        for &(j, l) in &entries {
            let mut row = vec![GradedSeries::one(profile)];
            for t in 1..=max_k {
                let next = row[t - 1].mul(&lambda[j][l])?.scale(&GaussianRational::ratio(1, t as i64));
                row.push(next);
            }
            powers.push(row);
        }
        let half_i = &GaussianRational::ratio(1, 2) * &GaussianRational::i();
        let mut levels = vec![Vec::new()];
        for k in 1..=max_k {
            let mut grouped: BTreeMap<(MultiIndex, MultiIndex), GradedSeries> = BTreeMap::new();
            let mut counts = vec![0usize; entries.len()];
            enumerate_compositions(k, 0, &mut counts, &mut |counts| {
                let mut alpha = [0u8; MAX_DIM];
                let mut beta = [0u8; MAX_DIM];
                let mut c = GradedSeries::one(profile);
                for (e, &t) in counts.iter().enumerate() {
                    if t == 0 {
                        continue;
                    }
                    let (j, l) = entries[e];
                    alpha[j] += t as u8;
                    beta[l] += t as u8;
                    c = &c * &powers[e][t];
                }
                let slot = grouped.entry((alpha, beta)).or_insert_with(|| GradedSeries::zero(profile));
                *slot = &*slot + &c;
            });
            let factor = (0..k).fold(GaussianRational::one(), |acc, _| &acc * &half_i);
            let level = grouped
                .into_iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|((alpha, beta), c)| Contraction { alpha, beta, coeff: c.scale(&factor).mul_nu_pow(k as u32) })
                .collect();
            levels.push(level);
        }
        Ok(Self { levels })
    }
}

/// Calls `f` with every vector of `counts.len()` nonnegative integers
/// summing to `remaining`, filling from position `pos`.
fn enumerate_compositions(remaining: usize, pos: usize, counts: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if pos + 1 >= counts.len() {
        if let Some(last) = counts.last_mut() {
            *last = remaining;
            f(counts);
            *counts.last_mut().unwrap() = 0;
        }
        return;
    }
    for t in 0..=remaining {
        counts[pos] = t;
        enumerate_compositions(remaining - t, pos + 1, counts, f);
    }
    counts[pos] = 0;
}

fn check_profile(geo: &ChartGeometry, a: &GradedSeries) -> Result<()> {
    if a.profile() != &geo.weyl_profile() {
        return Err(Error::ProfileMismatch(format!("element does not belong to chart '{}'", geo.name())));
    }
    Ok(())
}

/// `a ∘ b`.
pub fn fiber_product(geo: &ChartGeometry, a: &WeylElement, b: &WeylElement) -> Result<WeylElement> {
    check_profile(geo, a)?;
    check_profile(geo, b)?;
    Ok(WeylElement(product_series(geo, a, b)?))
}

fn product_series(geo: &ChartGeometry, a: &GradedSeries, b: &GradedSeries) -> Result<GradedSeries> {
    let mut out = a.mul(b)?;
    if a.is_zero() || b.is_zero() {
        return Ok(out);
    }
    let cap = geo.weyl_profile().deg_cap.unwrap_or(u32::MAX);
    let min_deg = |s: &GradedSeries| s.terms().map(|(m, _)| m.total_deg()).min().unwrap_or(0);
    let (amin, bmin) = (min_deg(a), min_deg(b));
    let (amax_s, bmax_s) = (a.grading_range(crate::series::Grading::Sym), b.grading_range(crate::series::Grading::Sym));
    let max_k = amax_s.map_or(0, |r| r.1).min(bmax_s.map_or(0, |r| r.1)) as usize;
    let mut da: HashMap<MultiIndex, GradedSeries> = HashMap::new();
    let mut db: HashMap<MultiIndex, GradedSeries> = HashMap::new();
    for (k, level) in geo.contractions().levels.iter().enumerate().skip(1) {
        // Each contraction lowers the fiber degree of both factors by k and
        // adds ν^k, so Deg never falls below amin + bmin.
        if k > max_k || amin + bmin > cap {
            break;
        }
        for c in level {
            let x = da.entry(c.alpha).or_insert_with(|| a.fiber_deriv_multi(&c.alpha));
            if x.is_zero() {
                continue;
            }
            let y = db.entry(c.beta).or_insert_with(|| b.fiber_deriv_multi(&c.beta));
            if y.is_zero() {
                continue;
            }
            let term = c.coeff.mul(x)?.mul(y)?;
            out = out.add(&term)?;
        }
    }
    Ok(out)
}

fn parity_split(a: &GradedSeries) -> [GradedSeries; 2] {
    [a.select(|m| m.form_deg() % 2 == 0), a.select(|m| m.form_deg() % 2 == 1)]
}

/// Graded commutator `[a,b] = a∘b − (−1)^{deg_a(a)·deg_a(b)} b∘a`, applied
/// to the form-parity components of inhomogeneous inputs.
pub fn commutator(geo: &ChartGeometry, a: &WeylElement, b: &WeylElement) -> Result<WeylElement> {
    check_profile(geo, a)?;
    check_profile(geo, b)?;
    let pa = parity_split(a);
    let pb = parity_split(b);
    let mut out = GradedSeries::zero(geo.weyl_profile());
    for (i, x) in pa.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in pb.iter().enumerate() {
            if y.is_zero() {
                continue;
            }
            let xy = product_series(geo, x, y)?;
            let yx = product_series(geo, y, x)?;
            out = if i * j == 1 { out.add(&xy)?.add(&yx)? } else { out.add(&xy)?.sub(&yx)? };
        }
    }
    Ok(WeylElement(out))
}

/// `(1/iν)[a,b]`. The commutator's `ν`-free part vanishes identically, so the
/// division is exact; a failure is surfaced as an error.
pub fn scaled_commutator(geo: &ChartGeometry, a: &WeylElement, b: &WeylElement) -> Result<WeylElement> {
    let c = commutator(geo, a, b)?;
    let minus_i = -GaussianRational::i();
    Ok(WeylElement(c.exact_div_nu()?.scale(&minus_i)))
}

/// `{a,b}_{TM} = ω^{jk} ∂a/∂y^j · ∂b/∂y^k`.
pub fn fiber_poisson(geo: &ChartGeometry, a: &WeylElement, b: &WeylElement) -> Result<WeylElement> {
    check_profile(geo, a)?;
    check_profile(geo, b)?;
    let omega = geo.omega_upper();
    let n = geo.dim();
    let da: Vec<GradedSeries> = (0..n).map(|j| a.partial_deriv(Var::Fiber(j))).collect::<Result<_>>()?;
    let db: Vec<GradedSeries> = (0..n).map(|k| b.partial_deriv(Var::Fiber(k))).collect::<Result<_>>()?;
    let mut out = GradedSeries::zero(geo.weyl_profile());
    for j in 0..n {
        if da[j].is_zero() {
            continue;
        }
        for k in 0..n {
            if omega[j][k].is_zero() || db[k].is_zero() {
                continue;
            }
            out = out.add(&omega[j][k].mul(&da[j])?.mul(&db[k])?)?;
        }
    }
    Ok(WeylElement(out))
}

/// `⟨a,b⟩ = (a∘b)|_{y=0}` for form-free `a`, `b`.
pub fn pairing(geo: &ChartGeometry, a: &WeylElement, b: &WeylElement) -> Result<GradedSeries> {
    if a.terms().chain(b.terms()).any(|(m, _)| m.dx != 0) {
        return Err(Error::FormPartNotAllowed("pairing takes form-free elements".into()));
    }
    Ok(fiber_product(geo, a, b)?.at_fiber_zero())
}

/// `δa = dx^j ∧ ∂a/∂y^j`.
pub fn delta(a: &WeylElement) -> WeylElement {
    let n = a.profile().n;
    let mut out = GradedSeries::zero(*a.profile());
    for j in 0..n {
        let d = a.partial_deriv(Var::Fiber(j)).expect("fiber derivatives never fail");
        out = &out + &d.wedge_dx_left(j);
    }
    WeylElement(out)
}

/// `δ⁻¹a = (1/(p+q)) y^j i(∂/∂x^j) a` on each `(deg_s, deg_a) = (p, q)` piece,
/// zero on `p = q = 0`.
pub fn delta_inv(a: &WeylElement) -> WeylElement {
    let p = *a.profile();
    let weighted = a.filter_map(p, a.valid_x(), |m, c| {
        let w = m.fiber_deg() + m.form_deg();
        (w > 0 && m.dx != 0).then(|| (*m, c.div_int(w as i64)))
    });
    let mut out = GradedSeries::zero(p);
    for j in 0..p.n {
        let contracted = weighted.interior_product(j);
        if contracted.is_zero() {
            continue;
        }
        let y = Monomial::fiber_only(crate::series::unit_index(j));
        out = &out + &contracted.mul_monomial_left(&y, &GaussianRational::one());
    }
    WeylElement(out)
}

/// `∇a = dx^j ∧ (∂a/∂x^j − Γ^l_{jk} y^k ∂a/∂y^l)`.
pub fn nabla_ext(geo: &ChartGeometry, a: &WeylElement) -> Result<WeylElement> {
    check_profile(geo, a)?;
    let n = geo.dim();
    let p = geo.weyl_profile();
    let dy: Vec<GradedSeries> = (0..n).map(|l| a.partial_deriv(Var::Fiber(l))).collect::<Result<_>>()?;
    let mut out = GradedSeries::zero(p);
    for j in 0..n {
        let mut inner = a.partial_deriv(Var::X(j))?;
        for l in 0..n {
            if dy[l].is_zero() {
                continue;
            }
            for k in 0..n {
                let g = geo.gamma(l, j, k);
                if g.is_zero() {
                    continue;
                }
                let yk = GradedSeries::fiber_var(p, k);
                inner = inner.sub(&g.mul(&yk)?.mul(&dy[l])?)?;
            }
        }
        out = out.add(&inner.wedge_dx_left(j))?;
    }
    Ok(WeylElement(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::preset;
    use crate::series::{Grading, TermSpec};

    fn el(geo: &ChartGeometry, terms: Vec<TermSpec>) -> WeylElement {
        WeylElement::new(GradedSeries::make(geo.weyl_profile(), terms).unwrap())
    }

    fn y(geo: &ChartGeometry, k: usize) -> WeylElement {
        WeylElement::new(GradedSeries::fiber_var(geo.weyl_profile(), k))
    }

    #[test]
    fn moyal_generators() {
        let f1 = preset("moyal2").unwrap();
        let prod = fiber_product(&f1, &y(&f1, 0), &y(&f1, 1)).unwrap();
        assert_eq!(prod.to_string(), "y1*y2 + 1/2*i*nu");
        let sc = scaled_commutator(&f1, &y(&f1, 0), &y(&f1, 1)).unwrap();
        assert_eq!(sc.to_string(), "1");
        let one = WeylElement::new(GradedSeries::one(f1.weyl_profile()));
        assert!(scaled_commutator(&f1, &y(&f1, 0), &one).unwrap().is_zero());
        assert_eq!(fiber_poisson(&f1, &y(&f1, 0), &y(&f1, 1)).unwrap().to_string(), "1");
        assert_eq!(pairing(&f1, &y(&f1, 0), &y(&f1, 1)).unwrap().to_string(), "1/2*i*nu");
        assert!(pairing(&f1, &y(&f1, 0), &y(&f1, 0)).unwrap().is_zero());
    }

    #[test]
    fn wick_generators() {
        let f2 = preset("wick2").unwrap();
        assert_eq!(fiber_product(&f2, &y(&f2, 0), &y(&f2, 1)).unwrap().to_string(), "y1*y2 + i*nu");
        assert_eq!(fiber_product(&f2, &y(&f2, 1), &y(&f2, 0)).unwrap().to_string(), "y1*y2");
        assert_eq!(scaled_commutator(&f2, &y(&f2, 0), &y(&f2, 1)).unwrap().to_string(), "1");
    }

    #[test]
    fn second_order_moyal_term() {
        let f1 = preset("moyal2").unwrap();
        let a = el(&f1, vec![TermSpec::new(1).fiber(&[2])]);
        let b = el(&f1, vec![TermSpec::new(1).fiber(&[0, 2])]);
        // y1² ∘ y2² = y1²y2² + 2iν y1y2 − ν²/2
        assert_eq!(fiber_product(&f1, &a, &b).unwrap().to_string(), "y1^2*y2^2 + 2*i*y1*y2*nu - 1/2*nu^2");
    }

    #[test]
    fn delta_examples() {
        let f1 = preset("moyal2").unwrap();
        assert_eq!(delta(&y(&f1, 0)).to_string(), "dx1");
        let yy = el(&f1, vec![TermSpec::new(1).fiber(&[1, 1])]);
        assert_eq!(delta(&yy).to_string(), "y1*dx2 + y2*dx1");
        let a = el(&f1, vec![TermSpec::new(1).fiber(&[1]).dx(&[1])]);
        assert_eq!(delta_inv(&a).to_string(), "1/2*y1*y2");
        let two = el(&f1, vec![TermSpec::new(1).dx(&[0, 1])]);
        assert_eq!(delta_inv(&two).to_string(), "1/2*y1*dx2 - 1/2*y2*dx1");
        let c = el(&f1, vec![TermSpec::new(3).nu(1)]);
        assert!(delta_inv(&c).is_zero());
    }

    #[test]
    fn nabla_examples() {
        let f3 = preset("torsion2").unwrap();
        assert_eq!(nabla_ext(&f3, &y(&f3, 0)).unwrap().to_string(), "-y2*dx1");
        let one = WeylElement::new(GradedSeries::one(f3.weyl_profile()));
        assert!(nabla_ext(&f3, &one).unwrap().is_zero());
        let f1 = preset("moyal2").unwrap();
        let f = el(&f1, vec![TermSpec::new(1).x(&[2, 1])]);
        assert_eq!(nabla_ext(&f1, &f).unwrap().to_string(), "x1^2*dx2 + 2*x1*x2*dx1");
    }

    #[test]
    fn homotopy_identity_on_monomials() {
        let f1 = preset("moyal2").unwrap();
        let p = f1.weyl_profile();
        for a in 0..4u32 {
            for b in 0..4u32 - a {
                for dx in [vec![], vec![0], vec![1], vec![0, 1]] {
                    if a + b == 0 && dx.is_empty() {
                        continue;
                    }
                    let w = WeylElement::new(GradedSeries::make(p, vec![TermSpec::new(1).fiber(&[a, b]).dx(&dx)]).unwrap());
                    let back = &delta(&delta_inv(&w)) + &delta_inv(&delta(&w));
                    assert_eq!(back, w, "y^({a},{b}) dx{dx:?}");
                }
            }
        }
    }

    #[test]
    fn torsion_element_identities() {
        for name in ["moyal2", "torsion2", "symmetric2", "curved2", "wick2"] {
            let g = preset(name).unwrap();
            let t = g.element_t().unwrap();
            let r = g.element_r().unwrap();
            assert!(delta(&t).is_zero(), "{name}");
            let nt = nabla_ext(&g, &t).unwrap();
            assert!(delta(&r).agrees_with(&nt), "{name}: {:?}", delta(&r).difference_report(&nt));
        }
    }

    #[test]
    fn product_is_bigraded() {
        let f1 = preset("curved2").unwrap();
        let a = el(&f1, vec![TermSpec::new(1).x(&[0, 1]).fiber(&[1, 1]).dx(&[0])]);
        let b = el(&f1, vec![TermSpec::new(2).fiber(&[0, 2])]);
        let prod = fiber_product(&f1, &a, &b).unwrap();
        assert_eq!(prod.grading_range(Grading::Total), Some((4, 4)));
        assert_eq!(prod.grading_range(Grading::Form), Some((1, 1)));
    }
}
