//! The quantization map `τ`, its `ν`-free version `τ∨`, the star product,
//! `κ`, and the order bounds of `τ`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fedosov::FedosovData;
use crate::geometry::{invert_matrix, ChartGeometry, JetMatrix};
use crate::scalar::GaussianRational;
use crate::series::{GradedSeries, Grading, JetValidity, Monomial, MultiIndex, Var, VariableProfile};
use crate::weyl::{self, WeylElement};

/// `f ∗ g` as coefficients of `ν^0, ν^1, …`; those beyond
/// `certified_order` are reported but not trusted.
#[derive(Clone, Debug, PartialEq)]
pub struct StarSeries {
    pub coeffs: Vec<GradedSeries>,
    pub certified_order: u32,
}

impl StarSeries {
    /// `Σ_{r ≤ certified} ν^r C_r` as one series.
    pub fn certified_series(&self) -> GradedSeries {
        let p = *self.coeffs[0].profile();
        self.coeffs
            .iter()
            .enumerate()
            .take(self.certified_order as usize + 1)
            .fold(GradedSeries::zero(p), |acc, (r, c)| &acc + &c.mul_nu_pow(r as u32))
    }

    pub fn coefficient(&self, r: u32) -> Result<&GradedSeries> {
        if r > self.certified_order {
            return Err(Error::UncertifiedOrder { requested: r, certified: self.certified_order });
        }
        Ok(&self.coeffs[r as usize])
    }
}

impl fmt::Display for StarSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.certified_series().fmt(f)
    }
}

/// `κ^k = τ(x^k)∨` and the jet matrix `χ^k_j = ∂κ^k/∂y^j |_{y=0}`.
#[derive(Clone, Debug)]
pub struct Kappa {
    pub components: Vec<WeylElement>,
    pub linear_part: JetMatrix,
}

impl Kappa {
    /// Whether the constant term of the linear part is invertible.
    pub fn linear_part_invertible(&self) -> bool {
        let c: Vec<Vec<GaussianRational>> =
            self.linear_part.iter().map(|row| row.iter().map(|s| s.coefficient(&Monomial::ONE)).collect()).collect();
        invert_matrix(&c).is_some()
    }

    /// Whether the linear part is the identity matrix.
    pub fn linear_part_is_identity(&self) -> bool {
        self.linear_part.iter().enumerate().all(|(k, row)| {
            row.iter().enumerate().all(|(j, s)| {
                let want = if j == k { GradedSeries::one(*s.profile()) } else { GradedSeries::zero(*s.profile()) };
                s.agrees_with(&want)
            })
        })
    }
}

/// Outcome of an order-bound check on `f ↦ τ(f)^{(k)}_{k−2l}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderVerdict {
    pub k: u32,
    pub l: u32,
    pub bound: u32,
    pub observed: Option<u32>,
    pub passed: bool,
}

type Cache = Mutex<HashMap<MultiIndex, Arc<WeylElement>>>;

/// Fedosov data plus caches of `τ` and `τ∨` on monomials `x^β`.
pub struct Quantizer {
    data: FedosovData,
    tau_cache: Cache,
    tau_classical_cache: Cache,
}

fn lift(geo: &ChartGeometry, f: &GradedSeries) -> Result<GradedSeries> {
    if f.profile().n != geo.dim() {
        return Err(Error::ProfileMismatch(format!("function of {} variables on a {}-dimensional chart", f.profile().n, geo.dim())));
    }
    if f.terms().any(|(m, _)| m.fiber_deg() > 0 || m.dx != 0) {
        return Err(Error::FormPartNotAllowed("quantized functions must be fiber- and form-free".into()));
    }
    f.reprofile(geo.weyl_profile())
}

fn nu_coefficient(s: &GradedSeries, r: u32) -> GradedSeries {
    s.filter_map(*s.profile(), s.valid_x(), |m, c| (m.nu as u32 == r).then(|| (Monomial { nu: 0, ..*m }, c.clone())))
}

impl Quantizer {
    pub fn new(data: FedosovData) -> Self {
        Self { data, tau_cache: Mutex::default(), tau_classical_cache: Mutex::default() }
    }

    /// Computes the Fedosov data of a chart and wraps it.
    pub fn for_geometry(geo: &ChartGeometry) -> Result<Self> {
        Ok(Self::new(FedosovData::compute(geo)?))
    }

    pub fn data(&self) -> &FedosovData {
        &self.data
    }

    pub fn geometry(&self) -> &ChartGeometry {
        self.data.geometry()
    }

    fn profile(&self) -> VariableProfile {
        self.geometry().weyl_profile()
    }

    /// Largest `ν`-order of `f ∗ g`, `L[w]` and `R[w]` that is exact at the
    /// computed `Deg`: `⌊K/2⌋`.
    pub fn certified_order(&self) -> u32 {
        self.data.max_deg() / 2
    }

    /// `τ(f)` of a `ν`-free `f` by the recursion in `Deg`:
    /// `τ^{(k+1)} = δ⁻¹(∇τ^{(k)} − (i/ν) Σ_l ad(r^{(l+2)}) τ^{(k−l)})`.
    /// Returns the components `τ^{(0)}..τ^{(K)}`.
    pub fn tau_components(&self, f: &GradedSeries) -> Result<Vec<WeylElement>> {
        let geo = self.geometry();
        let f = lift(geo, f)?;
        if f.terms().any(|(m, _)| m.nu > 0) {
            return Err(Error::InvalidProfile("tau_components takes a nu-free function".into()));
        }
        let k_max = self.data.max_deg() as usize;
        let mut parts = vec![WeylElement::new(f)];
        for k in 0..k_max {
            let mut acc = weyl::nabla_ext(geo, &parts[k])?.into_series();
            for l in 0..k {
                let r = self.data.r_component(l + 2);
                if r.is_zero() || parts[k - l].is_zero() {
                    continue;
                }
                // −(i/ν)[a,b] = (1/iν)[a,b]
                acc = acc.add(weyl::scaled_commutator(geo, &r, &parts[k - l])?.series())?;
            }
            parts.push(weyl::delta_inv(&WeylElement::new(acc)));
        }
        Ok(parts)
    }

    /// `τ∨(f)` by the recursion in `deg_s`:
    /// `τ∨_{k+1} = δ⁻¹(∇τ∨_k + Σ_l {r∨_{l+2}, τ∨_{k−l}}_{TM})`.
    pub fn tau_classical_components(&self, f: &GradedSeries) -> Result<Vec<WeylElement>> {
        let geo = self.geometry();
        let f = lift(geo, f)?.nu_free();
        let k_max = self.data.max_deg() as usize;
        let mut parts = vec![WeylElement::new(f)];
        for k in 0..k_max {
            let mut acc = weyl::nabla_ext(geo, &parts[k])?.into_series();
            for l in 0..k {
                let r = self.data.r_classical_component(l + 2);
                if r.is_zero() || parts[k - l].is_zero() {
                    continue;
                }
                acc = acc.add(weyl::fiber_poisson(geo, &r, &parts[k - l])?.series())?;
            }
            parts.push(weyl::delta_inv(&WeylElement::new(acc)));
        }
        Ok(parts)
    }

    fn cached(&self, beta: &[MultiIndex], classical: bool) -> Result<Vec<Arc<WeylElement>>> {
        let cache = if classical { &self.tau_classical_cache } else { &self.tau_cache };
        let missing: Vec<MultiIndex> = {
            let map = cache.lock().expect("cache lock");
            let mut m: Vec<MultiIndex> = beta.iter().filter(|b| !map.contains_key(*b)).copied().collect();
            m.sort();
            m.dedup();
            m
        };
        let computed: Vec<(MultiIndex, Result<WeylElement>)> = missing
            .par_iter()
            .map(|b| {
                let mono = GradedSeries::monomial(self.profile(), Monomial::x_only(*b), GaussianRational::one());
                let parts =
                    if classical { self.tau_classical_components(&mono) } else { self.tau_components(&mono) };
                let sum = parts.map(|ps| {
                    ps.iter().fold(WeylElement::new(GradedSeries::zero(self.profile())), |acc, p| &acc + p)
                });
                (*b, sum)
            })
            .collect();
        let mut map = cache.lock().expect("cache lock");
        for (b, res) in computed {
            map.insert(b, Arc::new(res?));
        }
        Ok(beta.iter().map(|b| map[b].clone()).collect())
    }

    fn linear_tau(&self, f: &GradedSeries, classical: bool) -> Result<WeylElement> {
        let geo = self.geometry();
        let f = lift(geo, f)?;
        let p = self.profile();
        let nu_max = if classical { 0 } else { f.grading_range(Grading::Nu).map_or(0, |r| r.1) };
        let mut total = GradedSeries::zero(p);
        for a in 0..=nu_max {
            let fa = nu_coefficient(&f, a);
            if fa.is_zero() {
                continue;
            }
            let ta = if fa.valid_x() == JetValidity::Exact {
                let betas: Vec<MultiIndex> = fa.terms().map(|(m, _)| m.x).collect();
                let taus = self.cached(&betas, classical)?;
                let mut acc = GradedSeries::zero(p);
                for ((_, c), t) in fa.terms().zip(taus) {
                    acc = acc.add(&t.scale(c))?;
                }
                acc
            } else {
                let parts = if classical { self.tau_classical_components(&fa)? } else { self.tau_components(&fa)? };
                parts.iter().try_fold(GradedSeries::zero(p), |acc, t| acc.add(t))?
            };
            total = total.add(&ta.mul_nu_pow(a))?;
        }
        Ok(WeylElement::new(total))
    }

    /// `τ(f)` through `Deg ≤ K` for `ν`-formal `f`, by `ν`-linearity.
    pub fn tau(&self, f: &GradedSeries) -> Result<WeylElement> {
        self.linear_tau(f, false)
    }

    /// `τ∨(f)` through `deg_s ≤ K`; only the `ν`-free part of `f` enters.
    pub fn tau_classical(&self, f: &GradedSeries) -> Result<WeylElement> {
        self.linear_tau(f, true)
    }

    /// Checks `τ(f)|_{y=0} = f` and `Dτ(f) = 0` on `Deg ≤ K − 2`.
    pub fn verify_tau(&self, f: &GradedSeries) -> Result<Option<String>> {
        let t = self.tau(f)?;
        let f_l = lift(self.geometry(), f)?;
        let cut = self.data.max_deg().saturating_sub(2);
        if let Some(d) = t.at_fiber_zero().up_to(Grading::Total, cut).difference_report(&f_l.up_to(Grading::Total, cut)) {
            return Ok(Some(format!("tau(f)|y=0 differs from f {d}")));
        }
        let dt = self.data.apply_d(&t)?.up_to(Grading::Total, cut);
        Ok((!dt.is_zero()).then(|| format!("D tau(f) = {dt}")))
    }

    /// Checks `τ∨(f)|_{y=0} = f` and `D∨τ∨(f) = 0` on `deg_s ≤ K − 2`.
    pub fn verify_tau_classical(&self, f: &GradedSeries) -> Result<Option<String>> {
        let t = self.tau_classical(f)?;
        let f_l = lift(self.geometry(), f)?.nu_free();
        if let Some(d) = t.at_fiber_zero().difference_report(&f_l) {
            return Ok(Some(format!("tau_classical(f)|y=0 differs from f {d}")));
        }
        let cut = self.data.max_deg().saturating_sub(2);
        let dt = self.data.apply_d_classical(&t)?.up_to(Grading::Sym, cut);
        Ok((!dt.is_zero()).then(|| format!("D tau_classical(f) = {dt}")))
    }

    /// `f ∗ g = ⟨τ(f), τ(g)⟩`.
    pub fn star(&self, f: &GradedSeries, g: &GradedSeries) -> Result<StarSeries> {
        let geo = self.geometry();
        let (tf, tg) = rayon::join(|| self.tau(f), || self.tau(g));
        let prod = weyl::pairing(geo, &tf?, &tg?)?;
        let top = geo.weyl_profile().nu_order;
        let coeffs = (0..=top).map(|r| nu_coefficient(&prod, r)).collect();
        Ok(StarSeries { coeffs, certified_order: self.certified_order() })
    }

    /// The `ν^r` coefficient `C_r(f, g)`.
    pub fn extract_c(&self, r: u32, f: &GradedSeries, g: &GradedSeries) -> Result<GradedSeries> {
        if r > self.certified_order() {
            return Err(Error::UncertifiedOrder { requested: r, certified: self.certified_order() });
        }
        Ok(self.star(f, g)?.coeffs[r as usize].clone())
    }

    /// `κ^k = τ(x^k)∨` with its fiber-linear part.
    pub fn kappa(&self) -> Result<Kappa> {
        let p = self.profile();
        let n = self.geometry().dim();
        let components: Vec<WeylElement> =
            (0..n).map(|k| self.tau_classical(&GradedSeries::x_var(p, k))).collect::<Result<_>>()?;
        let linear_part = components
            .iter()
            .map(|kap| (0..n).map(|j| kap.partial_deriv(Var::Fiber(j)).map(|d| d.at_fiber_zero())).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        Ok(Kappa { components, linear_part })
    }

    /// Reconstructs `f ↦ τ(f)^{(k)}_{k−2l}` by probing monomials up to degree
    /// `k` and checks that it has differential order at most `k − l`.
    pub fn verify_natural(&self, k: u32, l: u32) -> Result<OrderVerdict> {
        if k == 0 || k > self.data.max_deg() || 2 * l > k.saturating_sub(1) {
            return Err(Error::ProbeBudget(format!(
                "(k, l) = ({k}, {l}) outside 1 <= k <= {}, 0 <= l <= (k-1)/2",
                self.data.max_deg()
            )));
        }
        let s = k - 2 * l;
        let table = crate::symbols::reconstruct_table(
            self.geometry().dim(),
            self.profile(),
            k,
            |f| Ok(self.tau(f)?.component(Grading::Total, k).component(Grading::Sym, s)),
            0x5eed ^ (k as u64) << 8 ^ l as u64,
        )?;
        let bound = k - l;
        let observed = table.keys().map(crate::series::multi_degree).max();
        Ok(OrderVerdict { k, l, bound, observed, passed: observed.is_none_or(|o| o <= bound) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{preset, preset_with, Orders};
    use crate::poly::parse_polynomial;

    fn q(name: &str, k: u32) -> Quantizer {
        Quantizer::for_geometry(&preset_with(name, Orders::for_degree(k)).unwrap()).unwrap()
    }

    fn poly(qz: &Quantizer, s: &str) -> GradedSeries {
        parse_polynomial(s, qz.geometry().weyl_profile()).unwrap()
    }

    #[test]
    fn flat_tau_is_taylor() {
        let qz = q("moyal2", 6);
        assert_eq!(qz.tau(&poly(&qz, "x1")).unwrap().to_string(), "y1 + x1");
        assert_eq!(qz.tau(&poly(&qz, "x1^2")).unwrap().to_string(), "y1^2 + 2*x1*y1 + x1^2");
        assert_eq!(qz.tau(&poly(&qz, "1")).unwrap().to_string(), "1");
        assert_eq!(qz.tau_classical(&poly(&qz, "x1")).unwrap().to_string(), "y1 + x1");
    }

    #[test]
    fn moyal_and_wick_products() {
        let qz = q("moyal2", 8);
        assert_eq!(qz.star(&poly(&qz, "x1"), &poly(&qz, "x2")).unwrap().to_string(), "x1*x2 + 1/2*i*nu");
        assert_eq!(qz.star(&poly(&qz, "x2"), &poly(&qz, "x1")).unwrap().to_string(), "x1*x2 - 1/2*i*nu");
        assert_eq!(
            qz.star(&poly(&qz, "x1^2"), &poly(&qz, "x2^2")).unwrap().to_string(),
            "x1^2*x2^2 + 2*i*x1*x2*nu - 1/2*nu^2"
        );
        let wick = q("wick2", 8);
        assert_eq!(wick.star(&poly(&wick, "x1"), &poly(&wick, "x2")).unwrap().to_string(), "x1*x2 + i*nu");
        assert_eq!(wick.star(&poly(&wick, "x2"), &poly(&wick, "x1")).unwrap().to_string(), "x1*x2");
    }

    #[test]
    fn uncertified_order_is_refused() {
        let qz = q("moyal2", 4);
        let f = poly(&qz, "x1");
        assert!(matches!(qz.extract_c(3, &f, &f), Err(Error::UncertifiedOrder { requested: 3, certified: 2 })));
    }

    #[test]
    fn tau_postconditions_on_torsion_fixture() {
        let qz = q("torsion2", 6);
        for s in ["x1", "x2^2", "x1*x2 + 3*x1^3"] {
            assert_eq!(qz.verify_tau(&poly(&qz, s)).unwrap(), None, "{s}");
            assert_eq!(qz.verify_tau_classical(&poly(&qz, s)).unwrap(), None, "{s}");
            let t = qz.tau(&poly(&qz, s)).unwrap();
            assert_eq!(t.nu_free(), qz.tau_classical(&poly(&qz, s)).unwrap().into_series().up_to(Grading::Sym, 6));
        }
    }

    #[test]
    fn kappa_linear_part() {
        let flat = q("moyal2", 4);
        let k = flat.kappa().unwrap();
        assert_eq!(k.components[1].to_string(), "y2 + x2");
        assert!(k.linear_part_is_identity());
        let tor = q("torsion2", 4);
        let k = tor.kappa().unwrap();
        assert!(k.linear_part_is_identity() && k.linear_part_invertible());
        assert!(k.components.iter().any(|c| c.grading_range(Grading::Sym).unwrap().1 >= 2));
    }

    #[test]
    fn order_bounds() {
        let flat = q("moyal2", 4);
        let v = flat.verify_natural(1, 0).unwrap();
        assert!(v.passed && v.observed == Some(1));
        let tor = q("torsion2", 4);
        assert!(tor.verify_natural(3, 1).unwrap().passed);
        assert!(tor.verify_natural(2, 0).unwrap().passed);
        assert!(flat.verify_natural(2, 1).is_err());
        let _ = preset("moyal2").unwrap();
    }
}
