//! The Fedosov element `r` and its `ν`-free counterpart `r∨`, the
//! connections `D` and `D∨`, and their residual and flatness checks.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::ChartGeometry;
use crate::scalar::GaussianRational;
use crate::series::{GradedSeries, Grading, TermSpec};
use crate::weyl::{self, WeylElement};

/// `r` by `Deg` and `r∨` by `deg_s`, each through the chart's maximal `Deg`.
#[derive(Clone, Debug)]
pub struct FedosovData {
    geometry: ChartGeometry,
    r_parts: Vec<WeylElement>,
    r: WeylElement,
    rc_parts: Vec<WeylElement>,
    rc: WeylElement,
}

/// Order in which the terms of a right-hand side are summed. The result
/// must not depend on it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SumOrder {
    #[default]
    Forward,
    Reverse,
}

fn sum_parts(geo: &ChartGeometry, parts: &[WeylElement]) -> WeylElement {
    parts.iter().fold(WeylElement::new(GradedSeries::zero(geo.weyl_profile())), |acc, p| &acc + p)
}

fn sum_in_order(geo: &ChartGeometry, mut terms: Vec<GradedSeries>, order: SumOrder) -> Result<GradedSeries> {
    if order == SumOrder::Reverse {
        terms.reverse();
    }
    terms.iter().try_fold(GradedSeries::zero(geo.weyl_profile()), |acc, t| acc.add(t))
}

/// `−(i/ν) Σ_{a+b=k+2} r^{(a)} ∘ r^{(b)}`.
fn quadratic_term(geo: &ChartGeometry, parts: &[WeylElement], k: usize, order: SumOrder) -> Result<GradedSeries> {
    let mut products = Vec::new();
    for a in 2..=k {
        let b = k + 2 - a;
        if b < 2 || b >= parts.len() || parts[a].is_zero() || parts[b].is_zero() {
            continue;
        }
        products.push(weyl::fiber_product(geo, &parts[a], &parts[b])?.into_series());
    }
    let sum = sum_in_order(geo, products, order)?;
    Ok(sum.exact_div_nu()?.scale(&-GaussianRational::i()))
}

/// Solves `δr = T + R + ∇r − (i/ν) r∘r + Ω` degree by degree in `Deg`,
/// with `r^{(0)} = r^{(1)} = 0` and `δ⁻¹r = 0`. Returns `r^{(0)}..r^{(K)}`.
pub fn compute_r(geo: &ChartGeometry) -> Result<Vec<WeylElement>> {
    compute_r_ordered(geo, SumOrder::Forward)
}

pub fn compute_r_ordered(geo: &ChartGeometry, order: SumOrder) -> Result<Vec<WeylElement>> {
    let k_max = geo.orders().deg as usize;
    let t = geo.element_t()?;
    let r_el = geo.element_r()?;
    let zero = || WeylElement::new(GradedSeries::zero(geo.weyl_profile()));
    let mut parts = vec![zero(), zero()];
    for k in 1..k_max {
        let terms = vec![
            t.component(Grading::Total, k as u32),
            r_el.component(Grading::Total, k as u32),
            geo.omega2().component(Grading::Total, k as u32),
            weyl::nabla_ext(geo, &parts[k])?.into_series(),
            quadratic_term(geo, &parts, k, order)?,
        ];
        let rhs = WeylElement::new(sum_in_order(geo, terms, order)?);
        parts.push(weyl::delta_inv(&rhs));
    }
    let data_r = sum_parts(geo, &parts);
    if let Some(report) = residual_r(geo, &data_r)? {
        return Err(Error::Invariant(format!("residual of the r equation: {report}")));
    }
    Ok(parts)
}

/// First disagreement of `δr` with the right-hand side on `Deg ≤ K − 1`.
pub fn residual_r(geo: &ChartGeometry, r: &WeylElement) -> Result<Option<String>> {
    let cut = geo.orders().deg - 1;
    let lhs = weyl::delta(r).up_to(Grading::Total, cut);
    let rr = weyl::fiber_product(geo, r, r)?.into_series();
    let quad = rr.exact_div_nu()?.scale(&-GaussianRational::i());
    let rhs = geo
        .element_t()?
        .series()
        .add(geo.element_r()?.series())?
        .add(weyl::nabla_ext(geo, r)?.series())?
        .add(&quad)?
        .add(geo.omega2())?
        .up_to(Grading::Total, cut);
    Ok(lhs.difference_report(&rhs))
}

/// `{·,·}_{TM}` of all ordered pairs of components with fiber degrees summing
/// to `m + 2`, halved.
fn classical_quadratic(geo: &ChartGeometry, parts: &[WeylElement], m: usize, order: SumOrder) -> Result<GradedSeries> {
    let mut brackets = Vec::new();
    for a in 2..=m {
        let b = m + 2 - a;
        if b < 2 || b >= parts.len() || parts[a].is_zero() || parts[b].is_zero() {
            continue;
        }
        brackets.push(weyl::fiber_poisson(geo, &parts[a], &parts[b])?.into_series());
    }
    Ok(sum_in_order(geo, brackets, order)?.scale(&GaussianRational::ratio(1, 2)))
}

/// Solves `δr∨ = T + R + ∇r∨ + ½{r∨, r∨}_{TM}` by `deg_s`, starting from
/// `r∨₂ = δ⁻¹T`. Returns `r∨₀..r∨_K`.
pub fn compute_r_classical(geo: &ChartGeometry) -> Result<Vec<WeylElement>> {
    compute_r_classical_ordered(geo, SumOrder::Forward)
}

pub fn compute_r_classical_ordered(geo: &ChartGeometry, order: SumOrder) -> Result<Vec<WeylElement>> {
    let k_max = geo.orders().deg as usize;
    let t = geo.element_t()?;
    let r_el = geo.element_r()?;
    let zero = || WeylElement::new(GradedSeries::zero(geo.weyl_profile()));
    let mut parts = vec![zero(), zero()];
    for m in 1..k_max {
        let terms = vec![
            t.component(Grading::Sym, m as u32),
            r_el.component(Grading::Sym, m as u32),
            weyl::nabla_ext(geo, &parts[m])?.into_series(),
            classical_quadratic(geo, &parts, m, order)?,
        ];
        let rhs = WeylElement::new(sum_in_order(geo, terms, order)?);
        parts.push(weyl::delta_inv(&rhs));
    }
    let rc = sum_parts(geo, &parts);
    if let Some(report) = residual_r_classical(geo, &rc)? {
        return Err(Error::Invariant(format!("residual of the classical r equation: {report}")));
    }
    Ok(parts)
}

/// First disagreement of `δr∨` with the right-hand side on `deg_s ≤ K − 1`.
pub fn residual_r_classical(geo: &ChartGeometry, rc: &WeylElement) -> Result<Option<String>> {
    let cut = geo.orders().deg - 1;
    let lhs = weyl::delta(rc).up_to(Grading::Sym, cut);
    let half = GaussianRational::ratio(1, 2);
    let rhs = geo
        .element_t()?
        .series()
        .add(geo.element_r()?.series())?
        .add(weyl::nabla_ext(geo, rc)?.series())?
        .add(&weyl::fiber_poisson(geo, rc, rc)?.scale(&half))?
        .up_to(Grading::Sym, cut);
    Ok(lhs.difference_report(&rhs))
}

impl FedosovData {
    /// Runs both recursions and their residual checks.
    pub fn compute(geo: &ChartGeometry) -> Result<Self> {
        let (r_parts, rc_parts) = rayon::join(|| compute_r(geo), || compute_r_classical(geo));
        let (r_parts, rc_parts) = (r_parts?, rc_parts?);
        let r = sum_parts(geo, &r_parts);
        let rc = sum_parts(geo, &rc_parts);
        Ok(Self { geometry: geo.clone(), r_parts, r, rc_parts, rc })
    }

    pub fn geometry(&self) -> &ChartGeometry {
        &self.geometry
    }

    /// Maximal `Deg` (and `deg_s` for `r∨`) computed.
    pub fn max_deg(&self) -> u32 {
        self.geometry.orders().deg
    }

    pub fn r(&self) -> &WeylElement {
        &self.r
    }

    /// `r^{(k)}`, zero beyond the computed range.
    pub fn r_component(&self, k: usize) -> WeylElement {
        self.r_parts.get(k).cloned().unwrap_or_else(|| WeylElement::new(GradedSeries::zero(self.geometry.weyl_profile())))
    }

    pub fn r_classical(&self) -> &WeylElement {
        &self.rc
    }

    /// `r∨_m`, zero beyond the computed range.
    pub fn r_classical_component(&self, m: usize) -> WeylElement {
        self.rc_parts.get(m).cloned().unwrap_or_else(|| WeylElement::new(GradedSeries::zero(self.geometry.weyl_profile())))
    }

    /// The `dx^p` coefficient `r∨_p(x, y)` of `r∨`.
    pub fn r_classical_form(&self, p: usize) -> WeylElement {
        WeylElement::new(self.rc.form_component(1 << p))
    }

    /// The `dx^p` coefficient `r_p(x, ν, y)` of `r`.
    pub fn r_form(&self, p: usize) -> WeylElement {
        WeylElement::new(self.r.form_component(1 << p))
    }

    /// `Dw = −δw + ∇w − (i/ν)[r, w]`.
    pub fn apply_d(&self, w: &WeylElement) -> Result<WeylElement> {
        let geo = &self.geometry;
        let ad = weyl::scaled_commutator(geo, &self.r, w)?;
        let out = weyl::nabla_ext(geo, w)?.series().sub(weyl::delta(w).series())?.add(ad.series())?;
        Ok(WeylElement::new(out))
    }

    /// `D∨w = −δw + ∇w + {r∨, w}_{TM}`.
    pub fn apply_d_classical(&self, w: &WeylElement) -> Result<WeylElement> {
        let geo = &self.geometry;
        let br = weyl::fiber_poisson(geo, &self.rc, w)?;
        let out = weyl::nabla_ext(geo, w)?.series().sub(weyl::delta(w).series())?.add(br.series())?;
        Ok(WeylElement::new(out))
    }

    /// Largest `Deg` through which `D²w` is determined by `r^{(≤K)}` and the
    /// product truncation, for `w` of minimal `Deg` `m`.
    pub fn flatness_cutoff(&self, m: u32) -> u32 {
        (m + self.max_deg()).saturating_sub(4).min(self.max_deg() - 1)
    }

    /// `D(Dw)` on the justified degrees; `None` if it vanishes there.
    pub fn d_squared_defect(&self, w: &WeylElement) -> Result<Option<String>> {
        let m = w.grading_range(Grading::Total).map_or(0, |r| r.0);
        let dd = self.apply_d(&self.apply_d(w)?)?;
        let cut = dd.up_to(Grading::Total, self.flatness_cutoff(m));
        Ok((!cut.is_zero()).then(|| cut.to_string()))
    }

    /// `D∨(D∨w)` on the justified fiber degrees; `None` if it vanishes there.
    pub fn d_classical_squared_defect(&self, w: &WeylElement) -> Result<Option<String>> {
        let m = w.grading_range(Grading::Sym).map_or(0, |r| r.0);
        let dd = self.apply_d_classical(&self.apply_d_classical(w)?)?;
        let cut = dd.up_to(Grading::Sym, self.flatness_cutoff(m));
        Ok((!cut.is_zero()).then(|| cut.to_string()))
    }

    /// Probe basis for flatness: `y^α` with `|α| ≤ 2` and `x^k y^α` with
    /// `|α| ≤ 1`.
    pub fn flatness_probes(&self) -> Vec<WeylElement> {
        let geo = &self.geometry;
        let n = geo.dim();
        let p = geo.weyl_profile();
        let mut out = Vec::new();
        let mut fibers: Vec<Vec<u32>> = vec![vec![0; n]];
        for j in 0..n {
            let mut e = vec![0; n];
            e[j] = 1;
            fibers.push(e);
        }
        let linear = fibers.clone();
        for j in 0..n {
            for k in j..n {
                let mut e = vec![0; n];
                e[j] += 1;
                e[k] += 1;
                fibers.push(e);
            }
        }
        for f in &fibers {
            out.push(WeylElement::new(GradedSeries::polynomial(p, vec![TermSpec::new(1).fiber(f)]).expect("in profile")));
        }
        for k in 0..n {
            let mut x = vec![0; n];
            x[k] = 1;
            for f in &linear {
                let t = TermSpec::new(1).x(&x).fiber(f);
                out.push(WeylElement::new(GradedSeries::polynomial(p, vec![t]).expect("in profile")));
            }
        }
        out
    }

    /// `D² = 0` on every probe; the first failing probe is reported.
    pub fn check_flatness(&self) -> Result<Option<String>> {
        self.check_on_probes(|w| self.d_squared_defect(w))
    }

    /// `(D∨)² = 0` on every ν-free probe.
    pub fn check_classical_flatness(&self) -> Result<Option<String>> {
        self.check_on_probes(|w| self.d_classical_squared_defect(w))
    }

    fn check_on_probes<F>(&self, f: F) -> Result<Option<String>>
    where
        F: Fn(&WeylElement) -> Result<Option<String>> + Sync,
    {
        let probes = self.flatness_probes();
        let results: Vec<Result<Option<String>>> = probes.par_iter().map(&f).collect();
        for (w, res) in probes.iter().zip(results) {
            if let Some(defect) = res? {
                return Ok(Some(format!("probe {w}: {defect}")));
            }
        }
        Ok(None)
    }

    /// `r|_{ν=0} = r∨` through `deg_s ≤ K`.
    pub fn classical_consistency(&self) -> Option<String> {
        let k = self.max_deg();
        let a = self.r.nu_free().up_to(Grading::Sym, k);
        let b = self.rc.up_to(Grading::Sym, k);
        a.difference_report(&b)
    }
}

/// `c(ν) = 1 − √(1 − ν)` through `ν^m`, the unique solution of
/// `2c = ν + c²` with `c(0) = 0`.
pub fn f4_coefficients(m: u32) -> Vec<GaussianRational> {
    // c_1 = 1/2, c_j = ½ Σ_{a+b=j} c_a c_b.
    let mut c = vec![GaussianRational::zero(); m as usize + 1];
    if m >= 1 {
        c[1] = GaussianRational::ratio(1, 2);
    }
    for j in 2..=m as usize {
        let mut s = GaussianRational::zero();
        for a in 1..j {
            s += &c[a] * &c[j - a];
        }
        c[j] = s.div_int(2);
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{preset, preset_with, Orders};

    #[test]
    fn flat_moyal_has_zero_r() {
        let data = FedosovData::compute(&preset("moyal2").unwrap()).unwrap();
        assert!(data.r().is_zero());
        assert!(data.r_classical().is_zero());
        let one = WeylElement::new(GradedSeries::one(data.geometry().weyl_profile()));
        assert!(data.apply_d(&one).unwrap().is_zero());
        assert!(data.apply_d_classical(&one).unwrap().is_zero());
    }

    #[test]
    fn torsion_fixture_first_component() {
        let geo = preset_with("torsion2", Orders::for_degree(4)).unwrap();
        let data = FedosovData::compute(&geo).unwrap();
        let expect = GradedSeries::make(
            geo.weyl_profile(),
            vec![TermSpec::new(GaussianRational::ratio(1, 3)).fiber(&[1, 1]).dx(&[1]), TermSpec::new(GaussianRational::ratio(-1, 3)).fiber(&[0, 2]).dx(&[0])],
        )
        .unwrap();
        assert_eq!(data.r_component(2).series(), &expect);
        assert_eq!(data.r_classical_component(2).series(), &expect);
        assert!(data.classical_consistency().is_none());
        assert!(weyl::delta_inv(data.r()).is_zero());
    }

    #[test]
    fn f4_closed_form() {
        let geo = preset_with("moyal2-omega", Orders::for_degree(6)).unwrap();
        let data = FedosovData::compute(&geo).unwrap();
        let c = f4_coefficients(3);
        assert_eq!(c[2], GaussianRational::ratio(1, 8));
        assert_eq!(c[3], GaussianRational::ratio(1, 16));
        let mut terms = Vec::new();
        for a in 1..=2u32 {
            terms.push(TermSpec::new(c[a as usize].clone()).nu(a).fiber(&[1]).dx(&[1]));
            terms.push(TermSpec::new(-c[a as usize].clone()).nu(a).fiber(&[0, 1]).dx(&[0]));
        }
        let expect = GradedSeries::make(geo.weyl_profile(), terms).unwrap();
        assert_eq!(data.r().series(), &expect);
        assert!(data.r_classical().is_zero());
    }

    #[test]
    fn flatness_on_curved_fixture() {
        let geo = preset_with("curved2", Orders::for_degree(6)).unwrap();
        let data = FedosovData::compute(&geo).unwrap();
        assert!(!data.r().is_zero());
        assert_eq!(data.check_flatness().unwrap(), None);
        assert_eq!(data.check_classical_flatness().unwrap(), None);
        assert!(data.classical_consistency().is_none());
    }

    #[test]
    fn sum_order_does_not_matter() {
        let geo = preset_with("curved2", Orders::for_degree(6)).unwrap();
        assert_eq!(compute_r(&geo).unwrap(), compute_r_ordered(&geo, SumOrder::Reverse).unwrap());
        assert_eq!(
            compute_r_classical(&geo).unwrap(),
            compute_r_classical_ordered(&geo, SumOrder::Reverse).unwrap()
        );
    }
}
